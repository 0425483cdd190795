//! Z2-graded operators and the super tensor calculus.
//!
//! Conventions (used by every higher layer):
//! - basis ordering of tensor products is lexicographic, leftmost factor
//!   slowest;
//! - super tensor product: (A (x)s B)^{ik}_{jl} = (-1)^{[p(i)+p(j)]p(k)} A^i_j B^k_l;
//! - super trace: str A = sum_a (-1)^{p(a)} A^a_a;
//! - partial super transposition in factor 1 of a two-factor space:
//!   (A^{st1})^{(i,k)}_{(j,l)} = A^{(j,k)}_{(i,l)} (-1)^{p(i)[p(i)+p(j)]};
//! - non-adjacent embeddings are realized by conjugating an adjacent-slot
//!   embedding with graded swaps, so there is a single audited sign path.
//!
//! Sign factors are computed as exact integers before any floating-point
//! multiplication.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::dense::Matrix;
use crate::linalg::space::GradedSpace;

/// A dense complex matrix together with its graded domain and codomain.
/// All Koszul signs live in the operations, not the storage.
#[derive(Debug, Clone, PartialEq)]
pub struct GradedOperator {
    domain: GradedSpace,
    codomain: GradedSpace,
    entries: Matrix,
}

fn sign(exp: u8) -> f64 {
    if exp % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

impl GradedOperator {
    pub fn new(domain: GradedSpace, codomain: GradedSpace, entries: Matrix) -> Result<Self> {
        if entries.rows() != codomain.dim() || entries.cols() != domain.dim() {
            return Err(Error::ShapeMismatch(format!(
                "entries are {}x{}, spaces need {}x{}",
                entries.rows(),
                entries.cols(),
                codomain.dim(),
                domain.dim()
            )));
        }
        Ok(Self {
            domain,
            codomain,
            entries,
        })
    }

    pub fn endo(space: GradedSpace, entries: Matrix) -> Result<Self> {
        Self::new(space.clone(), space, entries)
    }

    pub fn identity(space: &GradedSpace) -> Self {
        Self {
            domain: space.clone(),
            codomain: space.clone(),
            entries: Matrix::identity(space.dim()),
        }
    }

    pub fn zero(domain: &GradedSpace, codomain: &GradedSpace) -> Self {
        Self {
            domain: domain.clone(),
            codomain: codomain.clone(),
            entries: Matrix::zeros(codomain.dim(), domain.dim()),
        }
    }

    /// Matrix unit E^{ab} (maps basis vector b to basis vector a).
    pub fn matrix_unit(space: &GradedSpace, a: usize, b: usize) -> Self {
        let mut m = Matrix::zeros(space.dim(), space.dim());
        m[(a, b)] = C64::new(1.0, 0.0);
        Self {
            domain: space.clone(),
            codomain: space.clone(),
            entries: m,
        }
    }

    pub fn domain(&self) -> &GradedSpace {
        &self.domain
    }

    pub fn codomain(&self) -> &GradedSpace {
        &self.codomain
    }

    pub fn entries(&self) -> &Matrix {
        &self.entries
    }

    pub fn entries_mut(&mut self) -> &mut Matrix {
        &mut self.entries
    }

    pub fn dim_checked_square(&self) -> Result<usize> {
        if self.domain != self.codomain {
            return Err(Error::NotSquare {
                rows: self.codomain.dim(),
                cols: self.domain.dim(),
            });
        }
        Ok(self.domain.dim())
    }

    /// Composition self . rhs (apply rhs first).
    pub fn compose(&self, rhs: &GradedOperator) -> Result<GradedOperator> {
        if rhs.codomain != self.domain {
            return Err(Error::ShapeMismatch(format!(
                "compose: rhs codomain dim {} parity {:?} != lhs domain dim {} parity {:?}",
                rhs.codomain.dim(),
                rhs.codomain.parities(),
                self.domain.dim(),
                self.domain.parities()
            )));
        }
        Ok(GradedOperator {
            domain: rhs.domain.clone(),
            codomain: self.codomain.clone(),
            entries: self.entries.matmul(&rhs.entries)?,
        })
    }

    pub fn add(&self, rhs: &GradedOperator) -> Result<GradedOperator> {
        if self.domain != rhs.domain || self.codomain != rhs.codomain {
            return Err(Error::ShapeMismatch("add: spaces differ".into()));
        }
        Ok(GradedOperator {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            entries: self.entries.add(&rhs.entries)?,
        })
    }

    pub fn sub(&self, rhs: &GradedOperator) -> Result<GradedOperator> {
        if self.domain != rhs.domain || self.codomain != rhs.codomain {
            return Err(Error::ShapeMismatch("sub: spaces differ".into()));
        }
        Ok(GradedOperator {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            entries: self.entries.sub(&rhs.entries)?,
        })
    }

    pub fn scale(&self, s: C64) -> GradedOperator {
        GradedOperator {
            domain: self.domain.clone(),
            codomain: self.codomain.clone(),
            entries: self.entries.scale(s),
        }
    }

    /// Plain transpose. For the real orthogonal swap operators this is the
    /// inverse.
    pub fn transpose(&self) -> GradedOperator {
        GradedOperator {
            domain: self.codomain.clone(),
            codomain: self.domain.clone(),
            entries: self.entries.transpose(),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.frobenius_norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.max_abs()
    }

    /// Relative Frobenius distance, with a floor so exact zeros compare
    /// cleanly.
    pub fn rel_distance(&self, rhs: &GradedOperator) -> f64 {
        let diff = match self.sub(rhs) {
            Ok(d) => d.frobenius_norm(),
            Err(_) => return f64::INFINITY,
        };
        let scale = self.frobenius_norm().max(rhs.frobenius_norm()).max(1e-30);
        diff / scale
    }
}

/// Super tensor product with the Koszul sign rule
/// (A (x)s B)^{ik}_{jl} = (-1)^{[p(i)+p(j)] p(k)} A^i_j B^k_l.
pub fn super_tensor(a: &GradedOperator, b: &GradedOperator) -> GradedOperator {
    let domain = a.domain.tensor(&b.domain);
    let codomain = a.codomain.tensor(&b.codomain);
    let (adr, adc) = (a.codomain.dim(), a.domain.dim());
    let (bdr, bdc) = (b.codomain.dim(), b.domain.dim());
    let mut m = Matrix::zeros(adr * bdr, adc * bdc);
    for i in 0..adr {
        let pi = a.codomain.parity(i);
        for j in 0..adc {
            let pj = a.domain.parity(j);
            let aij = a.entries[(i, j)];
            if aij.norm_sqr() == 0.0 {
                continue;
            }
            for k in 0..bdr {
                let s = sign((pi + pj) * b.codomain.parity(k));
                let row = i * bdr + k;
                for l in 0..bdc {
                    let v = b.entries[(k, l)];
                    if v.norm_sqr() == 0.0 {
                        continue;
                    }
                    m[(row, j * bdc + l)] = s * (aij * v);
                }
            }
        }
    }
    GradedOperator {
        domain,
        codomain,
        entries: m,
    }
}

/// Super tensor product of a whole list of operators, left to right.
pub fn super_tensor_chain(ops: &[&GradedOperator]) -> Result<GradedOperator> {
    let mut it = ops.iter();
    let first = *it
        .next()
        .ok_or_else(|| Error::Invalid("empty tensor chain".into()))?;
    let mut acc = first.clone();
    for op in it {
        acc = super_tensor(&acc, op);
    }
    Ok(acc)
}

/// Full super trace: str A = sum_a (-1)^{p(a)} A^a_a.
pub fn super_trace_full(a: &GradedOperator) -> Result<C64> {
    let n = a.dim_checked_square()?;
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        acc += sign(a.domain.parity(i)) * a.entries[(i, i)];
    }
    Ok(acc)
}

/// Graded swap V (x) W -> W (x) V: v (x) w |-> (-1)^{p(v)p(w)} w (x) v.
pub fn graded_swap(v: &GradedSpace, w: &GradedSpace) -> GradedOperator {
    let domain = v.tensor(w);
    let codomain = w.tensor(v);
    let (dv, dw) = (v.dim(), w.dim());
    let mut m = Matrix::zeros(dw * dv, dv * dw);
    for i in 0..dv {
        for k in 0..dw {
            let s = sign(v.parity(i) * w.parity(k));
            m[(k * dv + i, i * dw + k)] = C64::new(s, 0.0);
        }
    }
    GradedOperator {
        domain,
        codomain,
        entries: m,
    }
}

/// Super permutation operator on V (x) V:
/// P^{ik}_{jl} = (-1)^{p(i)p(k)} delta_{il} delta_{jk}; P^2 = I.
pub fn super_permutation(v: &GradedSpace) -> GradedOperator {
    graded_swap(v, v)
}

/// Which factor of a two-factor space a partial operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Factor {
    First,
    Second,
}

/// Partial super transposition on a two-factor space:
/// st1: (A^{st1})^{(i,k)}_{(j,l)} = A^{(j,k)}_{(i,l)} (-1)^{p(i)[p(i)+p(j)]},
/// st2 analogously in the second pair of indices.
pub fn partial_super_transpose(
    a: &GradedOperator,
    left: &GradedSpace,
    right: &GradedSpace,
    factor: Factor,
) -> Result<GradedOperator> {
    let space = left.tensor(right);
    if a.domain != space || a.codomain != space {
        return Err(Error::ShapeMismatch(
            "partial super transpose: operator does not act on the given two-factor space".into(),
        ));
    }
    let (dl, dr) = (left.dim(), right.dim());
    let mut m = Matrix::zeros(space.dim(), space.dim());
    for i in 0..dl {
        for k in 0..dr {
            for j in 0..dl {
                for l in 0..dr {
                    let (src, s) = match factor {
                        Factor::First => (
                            (j * dr + k, i * dr + l),
                            sign(left.parity(i) * (left.parity(i) + left.parity(j))),
                        ),
                        Factor::Second => (
                            (i * dr + l, j * dr + k),
                            sign(right.parity(k) * (right.parity(k) + right.parity(l))),
                        ),
                    };
                    m[(i * dr + k, j * dr + l)] = s * a.entries[src];
                }
            }
        }
    }
    GradedOperator::endo(space, m)
}

/// Move factor `f` of `chain` to the front by adjacent graded swaps.
/// Returns the full-chain operator W (original order -> new order) and the
/// reordered chain.
fn move_factor_to_front(chain: &[GradedSpace], f: usize) -> Result<(GradedOperator, Vec<GradedSpace>)> {
    let mut order: Vec<GradedSpace> = chain.to_vec();
    let total = GradedSpace::tensor_chain(&order)?;
    let mut w = GradedOperator::identity(&total);
    // bubble slot f leftward
    for pos in (1..=f).rev() {
        let swap = adjacent_swap(&order, pos - 1)?;
        w = swap.compose(&w)?;
        order.swap(pos - 1, pos);
    }
    Ok((w, order))
}

/// Adjacent graded swap of slots (i, i+1) embedded in the full chain.
fn adjacent_swap(chain: &[GradedSpace], i: usize) -> Result<GradedOperator> {
    if i + 1 >= chain.len() {
        return Err(Error::FactorOutOfRange {
            index: i + 1,
            len: chain.len(),
        });
    }
    let swap = graded_swap(&chain[i], &chain[i + 1]);
    let mut ops: Vec<GradedOperator> = Vec::new();
    if i > 0 {
        let left = GradedSpace::tensor_chain(&chain[..i])?;
        ops.push(GradedOperator::identity(&left));
    }
    ops.push(swap);
    if i + 2 < chain.len() {
        let right = GradedSpace::tensor_chain(&chain[i + 2..])?;
        ops.push(GradedOperator::identity(&right));
    }
    let refs: Vec<&GradedOperator> = ops.iter().collect();
    super_tensor_chain(&refs)
}

/// Partial super trace over the given factors of the chain. Tracing all
/// factors leaves a 1-dimensional even space holding the full super trace.
///
/// Each traced factor is brought to the front by graded swaps and then traced
/// with str_1 M = sum_g (-1)^{p(g)} (diagonal block g of M), which keeps all
/// Koszul bookkeeping in one place.
pub fn partial_super_trace(
    a: &GradedOperator,
    chain: &[GradedSpace],
    traced: &[usize],
) -> Result<GradedOperator> {
    let total = GradedSpace::tensor_chain(chain)?;
    if a.domain != total || a.codomain != total {
        return Err(Error::ShapeMismatch(
            "partial super trace: operator does not act on the given chain".into(),
        ));
    }
    for &t in traced {
        if t >= chain.len() {
            return Err(Error::FactorOutOfRange {
                index: t,
                len: chain.len(),
            });
        }
    }
    let mut sorted: Vec<usize> = traced.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != traced.len() {
        return Err(Error::Invalid("duplicate traced factor".into()));
    }
    if sorted.len() == chain.len() {
        // full trace: return the scalar as a 1x1 even operator
        let val = super_trace_full(a)?;
        let unit = GradedSpace::new(vec![0])?;
        let mut m = Matrix::zeros(1, 1);
        m[(0, 0)] = val;
        return GradedOperator::endo(unit, m);
    }

    let mut op = a.clone();
    let mut cur_chain: Vec<GradedSpace> = chain.to_vec();
    // trace the highest index first so the earlier indices stay valid
    for &t in sorted.iter().rev() {
        let (w, new_chain) = move_factor_to_front(&cur_chain, t)?;
        // W is real orthogonal, so the inverse is the transpose
        let conj = w.compose(&op)?.compose(&w.transpose())?;
        op = trace_front(&conj, &new_chain)?;
        cur_chain = new_chain[1..].to_vec();
    }
    Ok(op)
}

/// Super trace over the leftmost factor of a chain.
fn trace_front(a: &GradedOperator, chain: &[GradedSpace]) -> Result<GradedOperator> {
    let front = &chain[0];
    let rest = GradedSpace::tensor_chain(&chain[1..])?;
    let d = rest.dim();
    let mut m = Matrix::zeros(d, d);
    for g in 0..front.dim() {
        let s = sign(front.parity(g));
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] += s * a.entries[(g * d + i, g * d + j)];
            }
        }
    }
    GradedOperator::endo(rest, m)
}

/// Embed an operator acting on the selected factors (in the given order)
/// into the full chain, acting as the identity elsewhere.
///
/// Positions are 0-based, distinct, and may be in any order; `embed(R, [2,1], ..)`
/// places the first tensor slot of `R` on chain factor 2. Realized by
/// conjugating an adjacent left-aligned embedding with graded swaps.
pub fn embed(
    a: &GradedOperator,
    positions: &[usize],
    chain: &[GradedSpace],
) -> Result<GradedOperator> {
    let n = chain.len();
    if positions.is_empty() {
        return Err(Error::Invalid("embed: no positions given".into()));
    }
    let mut seen = vec![false; n];
    for &p in positions {
        if p >= n {
            return Err(Error::FactorOutOfRange { index: p, len: n });
        }
        if seen[p] {
            return Err(Error::Invalid(format!("embed: duplicate position {p}")));
        }
        seen[p] = true;
    }
    let selected = GradedSpace::tensor_chain(
        &positions
            .iter()
            .map(|&p| chain[p].clone())
            .collect::<Vec<_>>(),
    )?;
    if a.domain != selected || a.codomain != selected {
        return Err(Error::ShapeMismatch(format!(
            "embed: operator space {:?} does not match selected factors {:?}",
            a.domain.parities(),
            selected.parities()
        )));
    }

    // fast path: positions already the leading slots in order
    let contiguous_front = positions.iter().enumerate().all(|(i, &p)| p == i);
    if contiguous_front {
        return left_aligned(a, positions.len(), chain);
    }

    // Build W moving the selected factors to the front, in order.
    let mut cur_chain: Vec<GradedSpace> = chain.to_vec();
    let mut cur_index: Vec<usize> = (0..n).collect(); // original factor at each slot
    let total = GradedSpace::tensor_chain(chain)?;
    let mut w = GradedOperator::identity(&total);
    for (target_slot, &orig) in positions.iter().enumerate() {
        let from = cur_index.iter().position(|&x| x == orig).expect("tracked");
        for pos in (target_slot + 1..=from).rev() {
            let swap = adjacent_swap(&cur_chain, pos - 1)?;
            w = swap.compose(&w)?;
            cur_chain.swap(pos - 1, pos);
            cur_index.swap(pos - 1, pos);
        }
    }
    let aligned = left_aligned(a, positions.len(), &cur_chain)?;
    // W is real orthogonal
    w.transpose().compose(&aligned)?.compose(&w)
}

/// A (x)s I on a chain whose first `m` factors carry `a`.
fn left_aligned(a: &GradedOperator, m: usize, chain: &[GradedSpace]) -> Result<GradedOperator> {
    if m == chain.len() {
        return Ok(a.clone());
    }
    let rest = GradedSpace::tensor_chain(&chain[m..])?;
    Ok(super_tensor(a, &GradedOperator::identity(&rest)))
}

/// Left-to-right product of operators.
pub fn product(ops: &[&GradedOperator]) -> Result<GradedOperator> {
    let mut it = ops.iter();
    let first = *it
        .next()
        .ok_or_else(|| Error::Invalid("empty product".into()))?;
    let mut acc = first.clone();
    for op in it {
        acc = acc.compose(op)?;
    }
    Ok(acc)
}
