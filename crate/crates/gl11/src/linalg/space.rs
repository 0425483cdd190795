use crate::error::{Error, Result};

/// A finite-dimensional Z2-graded vector space: one parity label per basis
/// vector.
///
/// Tensor products order the basis lexicographically with the leftmost factor
/// slowest, and the parity of a product basis vector is the mod-2 sum of the
/// factor parities. Every operation in this crate relies on that ordering.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct GradedSpace {
    parity: Vec<u8>,
}

impl GradedSpace {
    pub fn new(parity: Vec<u8>) -> Result<Self> {
        if parity.is_empty() {
            return Err(Error::Invalid("graded space must have dim >= 1".into()));
        }
        for &p in &parity {
            if p > 1 {
                return Err(Error::BadParity(p));
            }
        }
        Ok(Self { parity })
    }

    /// The fundamental gl(1|1) space: dim 2, parities (0, 1).
    pub fn gl11() -> Self {
        Self { parity: vec![0, 1] }
    }

    /// Two-dimensional space with the parities reversed, (1, 0). The
    /// second-level fused spaces and the first-level antisymmetric fused
    /// space carry this grading.
    pub fn odd_even() -> Self {
        Self { parity: vec![1, 0] }
    }

    pub fn dim(&self) -> usize {
        self.parity.len()
    }

    pub fn parity(&self, i: usize) -> u8 {
        self.parity[i]
    }

    pub fn parities(&self) -> &[u8] {
        &self.parity
    }

    /// Tensor product: lexicographic basis, leftmost factor slowest, parities
    /// added mod 2.
    pub fn tensor(&self, other: &GradedSpace) -> GradedSpace {
        let mut parity = Vec::with_capacity(self.dim() * other.dim());
        for &p in &self.parity {
            for &q in &other.parity {
                parity.push((p + q) % 2);
            }
        }
        GradedSpace { parity }
    }

    /// Tensor product of a whole chain of factors.
    pub fn tensor_chain(chain: &[GradedSpace]) -> Result<GradedSpace> {
        let mut it = chain.iter();
        let first = it
            .next()
            .ok_or_else(|| Error::Invalid("empty chain".into()))?;
        let mut acc = first.clone();
        for s in it {
            acc = acc.tensor(s);
        }
        Ok(acc)
    }
}
