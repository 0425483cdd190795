//! The two-branch fusion hierarchy: degenerate-point projectors, fused
//! R-matrices and fused boundary K-matrices.
//!
//! The first branch starts from the symmetric rank-2 projector at u = eta,
//! the second from the antisymmetric one at u = -eta. Each branch fuses
//! twice; the two second-level R-matrices coincide, which closes the
//! hierarchy.
//!
//! Fused operators are represented in the 2-dimensional projected bases, in
//! the order the basis vectors are listed below; the 4 -> 2 isometry is kept
//! alongside so products mixing fused and unfused spaces stay well-typed.
//! Every fused R-matrix is exactly linear in the spectral parameter, so the
//! sandwich construction is evaluated at two generic points and extended
//! linearly; this keeps the removable zeros of the sandwich normalization
//! out of the arithmetic.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{
    embed, graded_swap, product, super_tensor, GradedOperator, GradedSpace, Matrix,
};
use crate::model::{k_minus, k_plus, r_matrix, GrassmannContext, ModelParameters};

/// Fusion branch, named for the symmetry type of its first-level projector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    /// Starts from the symmetric projector at u = eta.
    Sym,
    /// Starts from the antisymmetric projector at u = -eta.
    Asym,
}

/// The four rank-2 projectors of the hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectorKind {
    /// Symmetric projector on V (x) V (image of R(eta)/2eta).
    Plus,
    /// Antisymmetric projector on V (x) V (image of -R(-eta)/2eta).
    Minus,
    /// Second-level projector on V_sym1 (x) V (image of R_sym1(-3eta/2)/(-3eta)).
    Level2Sym,
    /// Second-level projector on V_asym1 (x) V (image of R_asym1(3eta/2)/(3eta)).
    Level2Asym,
}

/// Whether the fused factor sits first or second in the pair an operator
/// acts on. Monodromy factors use FusedFirst, reflecting-monodromy factors
/// use FusedSecond.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FusedSide {
    FusedFirst,
    FusedSecond,
}

/// A rank-2 idempotent built from explicit basis vectors, plus the isometry
/// onto the fused space.
#[derive(Debug, Clone)]
pub struct Projector {
    /// Orthonormal vectors spanning the image, as columns over the big space.
    pub basis: Vec<Vec<C64>>,
    /// The idempotent sum of |v><v| on the big space.
    pub operator: GradedOperator,
    /// Parities of the projected basis.
    pub fused_space: GradedSpace,
    /// Isometry fused space -> big space; operator = isometry . isometry^T.
    pub isometry: GradedOperator,
    /// The two factor spaces of the big space, in order.
    pub factors: (GradedSpace, GradedSpace),
}

impl Projector {
    fn from_basis(
        factors: (GradedSpace, GradedSpace),
        fused_space: GradedSpace,
        basis: Vec<Vec<C64>>,
    ) -> Result<Self> {
        let big = factors.0.tensor(&factors.1);
        let dim = big.dim();
        let mut iso = Matrix::zeros(dim, fused_space.dim());
        for (col, v) in basis.iter().enumerate() {
            if v.len() != dim {
                return Err(Error::ShapeMismatch("projector basis length".into()));
            }
            for (row, &x) in v.iter().enumerate() {
                iso[(row, col)] = x;
            }
        }
        let isometry = GradedOperator::new(fused_space.clone(), big.clone(), iso)?;
        let operator = isometry.compose(&isometry.transpose())?;
        Ok(Self {
            basis,
            operator,
            fused_space,
            isometry,
            factors,
        })
    }

    /// Compress a two-factor operator to the fused space: U^T M U.
    pub fn compress(&self, m: &GradedOperator) -> Result<GradedOperator> {
        self.isometry
            .transpose()
            .compose(m)?
            .compose(&self.isometry)
    }

    /// Graded-swap the two factors of this projector, giving the projector
    /// realized on the reversed pair ordering. The basis vectors are swapped
    /// with their Koszul signs, which keeps the fused-space identification
    /// canonical.
    pub fn swapped(&self) -> Result<Projector> {
        let (a, b) = (&self.factors.0, &self.factors.1);
        let swap = graded_swap(a, b);
        let mut basis = Vec::with_capacity(self.basis.len());
        for v in &self.basis {
            let mut col = Matrix::zeros(v.len(), 1);
            for (i, &x) in v.iter().enumerate() {
                col[(i, 0)] = x;
            }
            let swapped = swap.entries().matmul(&col)?;
            basis.push((0..v.len()).map(|i| swapped[(i, 0)]).collect());
        }
        Projector::from_basis((b.clone(), a.clone()), self.fused_space.clone(), basis)
    }
}

/// First-level fused space of the symmetric branch: parities (0, 1).
pub fn sym1_space() -> GradedSpace {
    GradedSpace::gl11()
}

/// First-level fused space of the antisymmetric branch: parities (1, 0).
pub fn asym1_space() -> GradedSpace {
    GradedSpace::odd_even()
}

/// Second-level fused space (both branches): parities (1, 0).
pub fn level2_space() -> GradedSpace {
    GradedSpace::odd_even()
}

const SQRT2_INV: f64 = std::f64::consts::FRAC_1_SQRT_2;

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// Build one of the four projectors from its explicit basis vectors and
/// cross-validate it against the degeneracy of the matching (fused)
/// R-matrix at the special point; a residual above 1e-11 is a construction
/// error.
pub fn projector(kind: ProjectorKind, eta: C64) -> Result<Projector> {
    let proj = projector_basis(kind)?;
    let (degenerate, scalar) = match kind {
        ProjectorKind::Plus => (r_matrix(eta, eta), 2.0 * eta),
        ProjectorKind::Minus => (r_matrix(-eta, eta), -2.0 * eta),
        ProjectorKind::Level2Sym => (
            fuse_r(Branch::Sym, 1, FusedSide::FusedFirst, -1.5 * eta, eta)?,
            -3.0 * eta,
        ),
        ProjectorKind::Level2Asym => (
            fuse_r(Branch::Asym, 1, FusedSide::FusedFirst, 1.5 * eta, eta)?,
            3.0 * eta,
        ),
    };
    let residual = degenerate.rel_distance(&proj.operator.scale(scalar));
    if residual > 1e-11 {
        return Err(Error::Invalid(format!(
            "projector construction failed its degeneracy cross-check: residual {residual:.3e}"
        )));
    }
    Ok(proj)
}

/// The projector built from its basis vectors alone, without the degeneracy
/// cross-check. The fusion sandwiches call this on their hot path; the
/// checked constructor above exercises the same object.
pub(crate) fn projector_basis(kind: ProjectorKind) -> Result<Projector> {
    let v = GradedSpace::gl11();
    match kind {
        ProjectorKind::Plus => {
            // |11> and (|12> + |21>)/sqrt(2), parities (0, 1)
            let basis = vec![
                vec![c(1.0), c(0.0), c(0.0), c(0.0)],
                vec![c(0.0), c(SQRT2_INV), c(SQRT2_INV), c(0.0)],
            ];
            Projector::from_basis((v.clone(), v), sym1_space(), basis)
        }
        ProjectorKind::Minus => {
            // (|12> - |21>)/sqrt(2) and |22>, parities (1, 0)
            let basis = vec![
                vec![c(0.0), c(SQRT2_INV), c(-SQRT2_INV), c(0.0)],
                vec![c(0.0), c(0.0), c(0.0), c(1.0)],
            ];
            Projector::from_basis((v.clone(), v), asym1_space(), basis)
        }
        ProjectorKind::Level2Sym => {
            // on V_sym1 (x) V in the basis (psi_i (x) e_k):
            // (sqrt(2) psi_1 (x) |2> - psi_2 (x) |1>)/sqrt(3) and psi_2 (x) |2>,
            // parities (1, 0)
            let s3 = 1.0 / 3.0f64.sqrt();
            let basis = vec![
                vec![c(0.0), c(2.0f64.sqrt() * s3), c(-s3), c(0.0)],
                vec![c(0.0), c(0.0), c(0.0), c(1.0)],
            ];
            Projector::from_basis((sym1_space(), v), level2_space(), basis)
        }
        ProjectorKind::Level2Asym => {
            // on V_asym1 (x) V:
            // psibar_1 (x) |1> and (sqrt(2) psibar_2 (x) |1> - psibar_1 (x) |2>)/sqrt(3),
            // parities (1, 0)
            let s3 = 1.0 / 3.0f64.sqrt();
            let basis = vec![
                vec![c(1.0), c(0.0), c(0.0), c(0.0)],
                vec![c(0.0), c(-s3), c(2.0f64.sqrt() * s3), c(0.0)],
            ];
            Projector::from_basis((asym1_space(), v), level2_space(), basis)
        }
    }
}

/// The fused auxiliary space for (branch, level).
pub fn fused_space(branch: Branch, level: u8) -> GradedSpace {
    match (branch, level) {
        (Branch::Sym, 1) => sym1_space(),
        (Branch::Asym, 1) => asym1_space(),
        (_, _) => level2_space(),
    }
}

/// Evaluate the raw level-1 fusion sandwich at a point where the
/// normalization is comfortably nonzero.
fn level1_sandwich(branch: Branch, side: FusedSide, u: C64, eta: C64) -> Result<GradedOperator> {
    let v = GradedSpace::gl11();
    let half = 0.5 * eta;
    let proj = projector_basis(match branch {
        Branch::Sym => ProjectorKind::Plus,
        Branch::Asym => ProjectorKind::Minus,
    })?;
    // shifts of the two inner R factors and the scalar normalization
    let (d1, d2, norm) = match branch {
        Branch::Sym => (-half, half, u + half),
        Branch::Asym => (half, -half, u - half),
    };
    let chain = [v.clone(), v.clone(), v.clone()];
    match side {
        FusedSide::FusedFirst => {
            // chain [V1, V2, V3]: P R_{1,3}(u+d1) R_{2,3}(u+d2) P, compress (1,2)
            let p = embed(&proj.operator, &[0, 1], &chain)?;
            let r13 = embed(&r_matrix(u + d1, eta), &[0, 2], &chain)?;
            let r23 = embed(&r_matrix(u + d2, eta), &[1, 2], &chain)?;
            let mid = product(&[&p, &r13, &r23, &p])?;
            let iso = super_tensor(&proj.isometry, &GradedOperator::identity(&v));
            let compressed = iso.transpose().compose(&mid)?.compose(&iso)?;
            Ok(compressed.scale(c(1.0) / norm))
        }
        FusedSide::FusedSecond => {
            // chain [V3, V1, V2]: P R_{3,1}(u+d1) R_{3,2}(u+d2) P, compress (2,3)
            let p = embed(&proj.operator, &[1, 2], &chain)?;
            let r31 = embed(&r_matrix(u + d1, eta), &[0, 1], &chain)?;
            let r32 = embed(&r_matrix(u + d2, eta), &[0, 2], &chain)?;
            let mid = product(&[&p, &r31, &r32, &p])?;
            let iso = super_tensor(&GradedOperator::identity(&v), &proj.isometry);
            let compressed = iso.transpose().compose(&mid)?.compose(&iso)?;
            Ok(compressed.scale(c(1.0) / norm))
        }
    }
}

/// Evaluate the raw level-2 fusion sandwich.
fn level2_sandwich(branch: Branch, side: FusedSide, u: C64, eta: C64) -> Result<GradedOperator> {
    let v = GradedSpace::gl11();
    let half = 0.5 * eta;
    let l1 = fused_space(branch, 1);
    let (proj, inner_shift, outer_shift) = match branch {
        // P2 R_{2,3}(u+eta) R_{sym1,3}(u-eta/2) P2, normalized by u
        Branch::Sym => (projector_basis(ProjectorKind::Level2Sym)?, eta, -half),
        // P2 R_{2,3}(u-eta) R_{asym1,3}(u+eta/2) P2, normalized by u
        Branch::Asym => (projector_basis(ProjectorKind::Level2Asym)?, -eta, half),
    };
    match side {
        FusedSide::FusedFirst => {
            // chain [V_l1, V2, V3]
            let chain = [l1.clone(), v.clone(), v.clone()];
            let p = embed(&proj.operator, &[0, 1], &chain)?;
            let r23 = embed(&r_matrix(u + inner_shift, eta), &[1, 2], &chain)?;
            let rl13 = embed(
                &fuse_r(branch, 1, FusedSide::FusedFirst, u + outer_shift, eta)?,
                &[0, 2],
                &chain,
            )?;
            let mid = product(&[&p, &r23, &rl13, &p])?;
            let iso = super_tensor(&proj.isometry, &GradedOperator::identity(&v));
            let compressed = iso.transpose().compose(&mid)?.compose(&iso)?;
            Ok(compressed.scale(c(1.0) / u))
        }
        FusedSide::FusedSecond => {
            // chain [V3, V2, V_l1], swapped projector on the (V2, V_l1) pair
            let chain = [v.clone(), v.clone(), l1.clone()];
            let proj_sw = proj.swapped()?;
            let p = embed(&proj_sw.operator, &[1, 2], &chain)?;
            let r32 = embed(&r_matrix(u + inner_shift, eta), &[0, 1], &chain)?;
            let rl13 = embed(
                &fuse_r(branch, 1, FusedSide::FusedSecond, u + outer_shift, eta)?,
                &[0, 2],
                &chain,
            )?;
            let mid = product(&[&p, &r32, &rl13, &p])?;
            let iso = super_tensor(&GradedOperator::identity(&v), &proj_sw.isometry);
            let compressed = iso.transpose().compose(&mid)?.compose(&iso)?;
            Ok(compressed.scale(c(1.0) / u))
        }
    }
}

/// Two generic sample points, scaled by eta, used for the linear
/// reconstruction of fused R-matrices. Chosen away from every removable
/// zero of the sandwich normalizations.
fn sample_points(eta: C64) -> (C64, C64) {
    (eta * C64::new(0.313, 0.741), eta * C64::new(-0.527, 0.219))
}

/// Fused R-matrix for the given branch, level (1 or 2) and side. Exact for
/// all u, including the degenerate points of the underlying sandwich.
pub fn fuse_r(
    branch: Branch,
    level: u8,
    side: FusedSide,
    u: C64,
    eta: C64,
) -> Result<GradedOperator> {
    if level != 1 && level != 2 {
        return Err(Error::Invalid(format!("fusion level {level} out of range")));
    }
    let (u0, u1) = sample_points(eta);
    let f = |x: C64| -> Result<GradedOperator> {
        match level {
            1 => level1_sandwich(branch, side, x, eta),
            _ => level2_sandwich(branch, side, x, eta),
        }
    };
    let r0 = f(u0)?;
    let r1 = f(u1)?;
    // linear in u: R(u) = R(u0) + (u - u0)/(u1 - u0) (R(u1) - R(u0))
    let t = (u - u0) / (u1 - u0);
    r0.add(&r1.sub(&r0)?.scale(t))
}

fn checked_norm(factor: &str, at: C64, value: C64) -> Result<C64> {
    if value.norm() < 1e-8 {
        return Err(Error::DegenerateNormalization {
            factor: factor.to_string(),
            at: format!("{at}"),
            magnitude: value.norm(),
        });
    }
    Ok(value)
}

/// Which boundary matrix a fused K is built from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KSign {
    Minus,
    Plus,
}

/// First- or second-level fused K-matrix on V_grassmann (x) V_fused.
///
/// The scalar prefactors are applied exactly as printed; evaluation at a
/// zero of a normalization is a domain error naming the offending factor.
pub fn fuse_k(
    branch: Branch,
    level: u8,
    sign: KSign,
    u: C64,
    p: &ModelParameters,
    g: &GrassmannContext,
) -> Result<GradedOperator> {
    match level {
        1 => fuse_k_level1(branch, sign, u, p, g),
        2 => fuse_k_level2(branch, sign, u, p, g),
        _ => Err(Error::Invalid(format!("fusion level {level} out of range"))),
    }
}

fn k_of(sign: KSign, u: C64, p: &ModelParameters, g: &GrassmannContext) -> Result<GradedOperator> {
    match sign {
        KSign::Minus => k_minus(u, p, g),
        KSign::Plus => k_plus(u, p, g),
    }
}

fn fuse_k_level1(
    branch: Branch,
    sign: KSign,
    u: C64,
    p: &ModelParameters,
    g: &GrassmannContext,
) -> Result<GradedOperator> {
    let v = GradedSpace::gl11();
    let eta = p.eta;
    let half = 0.5 * eta;
    let one = c(1.0);
    let proj = projector_basis(match branch {
        Branch::Sym => ProjectorKind::Plus,
        Branch::Asym => ProjectorKind::Minus,
    })?;
    // chain [V_g, V_1, V_2]
    let chain = [g.aux_space().clone(), v.clone(), v.clone()];
    let pk = embed(&proj.operator, &[1, 2], &chain)?;
    let (k_a, r_mid, k_b, norm) = match (branch, sign) {
        (Branch::Sym, KSign::Minus) => (
            embed(&k_of(sign, u - half, p, g)?, &[0, 1], &chain)?,
            embed(&r_matrix(2.0 * u, eta), &[2, 1], &chain)?,
            embed(&k_of(sign, u + half, p, g)?, &[0, 2], &chain)?,
            checked_norm(
                "[1+(u-eta/2)a_-](u+eta/2)",
                u,
                (one + (u - half) * p.a_minus) * (u + half),
            )?,
        ),
        (Branch::Sym, KSign::Plus) => (
            embed(&k_of(sign, u + half, p, g)?, &[0, 2], &chain)?,
            embed(&r_matrix(-2.0 * u, eta), &[1, 2], &chain)?,
            embed(&k_of(sign, u - half, p, g)?, &[0, 1], &chain)?,
            checked_norm(
                "[1+(u+eta/2)a_+](u-eta/2)",
                u,
                (one + (u + half) * p.a_plus) * (u - half),
            )?,
        ),
        (Branch::Asym, KSign::Minus) => (
            embed(&k_of(sign, u + half, p, g)?, &[0, 1], &chain)?,
            embed(&r_matrix(2.0 * u, eta), &[2, 1], &chain)?,
            embed(&k_of(sign, u - half, p, g)?, &[0, 2], &chain)?,
            checked_norm(
                "[1-(u+eta/2)a_-](u-eta/2)",
                u,
                (one - (u + half) * p.a_minus) * (u - half),
            )?,
        ),
        (Branch::Asym, KSign::Plus) => (
            embed(&k_of(sign, u - half, p, g)?, &[0, 2], &chain)?,
            embed(&r_matrix(-2.0 * u, eta), &[1, 2], &chain)?,
            embed(&k_of(sign, u + half, p, g)?, &[0, 1], &chain)?,
            checked_norm(
                "[1-(u-eta/2)a_+](u+eta/2)",
                u,
                (one - (u - half) * p.a_plus) * (u + half),
            )?,
        ),
    };
    let mid = product(&[&pk, &k_a, &r_mid, &k_b, &pk])?;
    // compress factors (1,2) of [V_g, V1, V2]
    let iso = super_tensor(&GradedOperator::identity(g.aux_space()), &proj.isometry);
    let compressed = iso.transpose().compose(&mid)?.compose(&iso)?;
    Ok(compressed.scale(one / norm))
}

fn fuse_k_level2(
    branch: Branch,
    sign: KSign,
    u: C64,
    p: &ModelParameters,
    g: &GrassmannContext,
) -> Result<GradedOperator> {
    let v = GradedSpace::gl11();
    let eta = p.eta;
    let half = 0.5 * eta;
    let one = c(1.0);
    let l1 = fused_space(branch, 1);
    let proj = projector_basis(match branch {
        Branch::Sym => ProjectorKind::Level2Sym,
        Branch::Asym => ProjectorKind::Level2Asym,
    })?;
    // chain [V_g, V_l1, V_2]; the level-1 fused K couples (V_g, V_l1)
    let chain = [g.aux_space().clone(), l1.clone(), v.clone()];
    let pk = embed(&proj.operator, &[1, 2], &chain)?;
    let (k_a, r_mid, k_b, norm) = match (branch, sign) {
        (Branch::Sym, KSign::Minus) => (
            embed(&k_of(sign, u + eta, p, g)?, &[0, 2], &chain)?,
            embed(
                &fuse_r(branch, 1, FusedSide::FusedFirst, 2.0 * u + half, eta)?,
                &[1, 2],
                &chain,
            )?,
            embed(&fuse_k_level1(branch, sign, u - half, p, g)?, &[0, 1], &chain)?,
            checked_norm(
                "2[1-(u+eta)a_-](u-eta/2)",
                u,
                2.0 * (one - (u + eta) * p.a_minus) * (u - half),
            )?,
        ),
        (Branch::Sym, KSign::Plus) => (
            embed(&fuse_k_level1(branch, sign, u - half, p, g)?, &[0, 1], &chain)?,
            embed(
                &fuse_r(branch, 1, FusedSide::FusedSecond, -2.0 * u - half, eta)?,
                &[2, 1],
                &chain,
            )?,
            embed(&k_of(sign, u + eta, p, g)?, &[0, 2], &chain)?,
            checked_norm("2(1-u a_+)(u+eta)", u, 2.0 * (one - u * p.a_plus) * (u + eta))?,
        ),
        (Branch::Asym, KSign::Minus) => (
            embed(&k_of(sign, u - eta, p, g)?, &[0, 2], &chain)?,
            embed(
                &fuse_r(branch, 1, FusedSide::FusedFirst, 2.0 * u - half, eta)?,
                &[1, 2],
                &chain,
            )?,
            embed(&fuse_k_level1(branch, sign, u + half, p, g)?, &[0, 1], &chain)?,
            checked_norm(
                "2[1+(u-eta)a_-](u+eta/2)",
                u,
                2.0 * (one + (u - eta) * p.a_minus) * (u + half),
            )?,
        ),
        (Branch::Asym, KSign::Plus) => (
            embed(&fuse_k_level1(branch, sign, u + half, p, g)?, &[0, 1], &chain)?,
            embed(
                &fuse_r(branch, 1, FusedSide::FusedSecond, -2.0 * u + half, eta)?,
                &[2, 1],
                &chain,
            )?,
            embed(&k_of(sign, u - eta, p, g)?, &[0, 2], &chain)?,
            checked_norm("2(1+u a_+)(u-eta)", u, 2.0 * (one + u * p.a_plus) * (u - eta))?,
        ),
    };
    let mid = product(&[&pk, &k_a, &r_mid, &k_b, &pk])?;
    let iso = super_tensor(&GradedOperator::identity(g.aux_space()), &proj.isometry);
    let compressed = iso.transpose().compose(&mid)?.compose(&iso)?;
    Ok(compressed.scale(one / norm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn cx(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn rand_c(rng: &mut ChaCha8Rng) -> C64 {
        cx(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    }

    /// Closed form of the level-1 symmetric fused R-matrix.
    fn sym1_closed(u: C64, eta: C64) -> GradedOperator {
        let s2 = 2.0f64.sqrt();
        let mut m = Matrix::zeros(4, 4);
        m[(0, 0)] = u + 1.5 * eta;
        m[(1, 1)] = u - 0.5 * eta;
        m[(1, 2)] = s2 * eta;
        m[(2, 1)] = s2 * eta;
        m[(2, 2)] = u + 0.5 * eta;
        m[(3, 3)] = u - 1.5 * eta;
        GradedOperator::endo(sym1_space().tensor(&GradedSpace::gl11()), m).unwrap()
    }

    /// Closed form of the level-1 antisymmetric fused R-matrix.
    fn asym1_closed(u: C64, eta: C64) -> GradedOperator {
        let s2 = 2.0f64.sqrt();
        let mut m = Matrix::zeros(4, 4);
        m[(0, 0)] = u + 1.5 * eta;
        m[(1, 1)] = u - 0.5 * eta;
        m[(1, 2)] = -s2 * eta;
        m[(2, 1)] = -s2 * eta;
        m[(2, 2)] = u + 0.5 * eta;
        m[(3, 3)] = u - 1.5 * eta;
        GradedOperator::endo(asym1_space().tensor(&GradedSpace::gl11()), m).unwrap()
    }

    /// Closed form of the second-level fused R-matrix (both branches).
    fn level2_closed(u: C64, eta: C64) -> GradedOperator {
        let s3 = 3.0f64.sqrt();
        let mut m = Matrix::zeros(4, 4);
        m[(0, 0)] = u + 2.0 * eta;
        m[(1, 1)] = u - eta;
        m[(1, 2)] = -s3 * eta;
        m[(2, 1)] = -s3 * eta;
        m[(2, 2)] = u + eta;
        m[(3, 3)] = u - 2.0 * eta;
        GradedOperator::endo(level2_space().tensor(&GradedSpace::gl11()), m).unwrap()
    }

    #[test]
    fn projectors_are_rank2_idempotents() {
        for kind in [
            ProjectorKind::Plus,
            ProjectorKind::Minus,
            ProjectorKind::Level2Sym,
            ProjectorKind::Level2Asym,
        ] {
            let p = projector(kind, cx(1.0, 0.0)).unwrap();
            let pp = p.operator.compose(&p.operator).unwrap();
            assert!(pp.rel_distance(&p.operator) < 1e-15);
            // rank: plain trace of the idempotent
            let tr: C64 = (0..4).map(|i| p.operator.entries()[(i, i)]).sum();
            assert!((tr - cx(2.0, 0.0)).norm() < 1e-14);
            // orthonormal basis
            for (i, a) in p.basis.iter().enumerate() {
                for (j, b) in p.basis.iter().enumerate() {
                    let dot: C64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((dot - cx(expect, 0.0)).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn plus_and_minus_are_complete() {
        let plus = projector(ProjectorKind::Plus, cx(1.0, 0.0)).unwrap();
        let minus = projector(ProjectorKind::Minus, cx(1.0, 0.0)).unwrap();
        let sum = plus.operator.add(&minus.operator).unwrap();
        assert!(sum.rel_distance(&GradedOperator::identity(sum.domain())) < 1e-15);
    }

    #[test]
    fn plus_projector_fixes_symmetric_vector() {
        let plus = projector(ProjectorKind::Plus, cx(1.0, 0.0)).unwrap();
        let psi2 = &plus.basis[1];
        let mut col = Matrix::zeros(4, 1);
        for (i, &x) in psi2.iter().enumerate() {
            col[(i, 0)] = x;
        }
        let out = plus.operator.entries().matmul(&col).unwrap();
        assert!(out.sub(&col).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn level2_sym_projector_fixes_its_basis() {
        let p = projector(ProjectorKind::Level2Sym, cx(1.0, 0.0)).unwrap();
        for v in &p.basis {
            let mut col = Matrix::zeros(4, 1);
            for (i, &x) in v.iter().enumerate() {
                col[(i, 0)] = x;
            }
            let out = p.operator.entries().matmul(&col).unwrap();
            assert!(out.sub(&col).unwrap().max_abs() < 1e-15);
        }
    }

    #[test]
    fn degeneracy_cross_checks() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..5 {
            let eta = rand_c(&mut rng) + cx(0.6, 0.0);
            // R(eta) = 2 eta P_plus; the checked constructor runs the same
            // comparison internally
            let plus = projector(ProjectorKind::Plus, eta).unwrap();
            let r = r_matrix(eta, eta);
            assert!(r.rel_distance(&plus.operator.scale(2.0 * eta)) < 1e-11);
            // R(-eta) = -2 eta P_minus
            let minus = projector(ProjectorKind::Minus, eta).unwrap();
            let r = r_matrix(-eta, eta);
            assert!(r.rel_distance(&minus.operator.scale(-2.0 * eta)) < 1e-11);
            // R_sym1(-3 eta/2) = -3 eta P_level2sym
            let l2 = projector(ProjectorKind::Level2Sym, eta).unwrap();
            let r = fuse_r(Branch::Sym, 1, FusedSide::FusedFirst, -1.5 * eta, eta).unwrap();
            assert!(r.rel_distance(&l2.operator.scale(-3.0 * eta)) < 1e-11);
            // R_asym1(3 eta/2) = 3 eta P_level2asym
            let l2 = projector(ProjectorKind::Level2Asym, eta).unwrap();
            let r = fuse_r(Branch::Asym, 1, FusedSide::FusedFirst, 1.5 * eta, eta).unwrap();
            assert!(r.rel_distance(&l2.operator.scale(3.0 * eta)) < 1e-11);
        }
    }

    #[test]
    fn fused_r_matches_closed_forms() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..20 {
            let u = 2.0 * rand_c(&mut rng);
            let eta = rand_c(&mut rng) + cx(0.6, 0.0);
            let got = fuse_r(Branch::Sym, 1, FusedSide::FusedFirst, u, eta).unwrap();
            assert!(got.rel_distance(&sym1_closed(u, eta)) < 1e-12);
            let got = fuse_r(Branch::Asym, 1, FusedSide::FusedFirst, u, eta).unwrap();
            assert!(got.rel_distance(&asym1_closed(u, eta)) < 1e-12);
            let got = fuse_r(Branch::Sym, 2, FusedSide::FusedFirst, u, eta).unwrap();
            assert!(got.rel_distance(&level2_closed(u, eta)) < 1e-12);
            let got = fuse_r(Branch::Asym, 2, FusedSide::FusedFirst, u, eta).unwrap();
            assert!(got.rel_distance(&level2_closed(u, eta)) < 1e-12);
        }
    }

    #[test]
    fn fusion_closure() {
        // the two branches coincide at the second level
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let u = 2.0 * rand_c(&mut rng);
            let eta = rand_c(&mut rng) + cx(0.6, 0.0);
            for side in [FusedSide::FusedFirst, FusedSide::FusedSecond] {
                let a = fuse_r(Branch::Sym, 2, side, u, eta).unwrap();
                let b = fuse_r(Branch::Asym, 2, side, u, eta).unwrap();
                assert!(a.rel_distance(&b) < 1e-12);
            }
        }
    }

    #[test]
    fn fused_second_side_is_graded_swap_of_first() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let v = GradedSpace::gl11();
        for (branch, level) in [
            (Branch::Sym, 1u8),
            (Branch::Asym, 1),
            (Branch::Sym, 2),
            (Branch::Asym, 2),
        ] {
            let u = 2.0 * rand_c(&mut rng);
            let eta = rand_c(&mut rng) + cx(0.6, 0.0);
            let first = fuse_r(branch, level, FusedSide::FusedFirst, u, eta).unwrap();
            let second = fuse_r(branch, level, FusedSide::FusedSecond, u, eta).unwrap();
            let fs = fused_space(branch, level);
            let sw = graded_swap(&fs, &v);
            let expect = sw.compose(&first).unwrap().compose(&sw.transpose()).unwrap();
            assert!(second.rel_distance(&expect) < 1e-12);
        }
    }

    #[test]
    fn fused_r_linear_in_u() {
        // third-point check of the linear reconstruction
        let eta = cx(0.83, 0.21);
        for branch in [Branch::Sym, Branch::Asym] {
            for level in [1u8, 2] {
                let u = cx(1.91, -0.77);
                let direct = match level {
                    1 => level1_sandwich(branch, FusedSide::FusedFirst, u, eta).unwrap(),
                    _ => level2_sandwich(branch, FusedSide::FusedFirst, u, eta).unwrap(),
                };
                let linear = fuse_r(branch, level, FusedSide::FusedFirst, u, eta).unwrap();
                assert!(direct.rel_distance(&linear) < 1e-11);
            }
        }
    }

    #[test]
    fn fused_gybe_all_aux_choices() {
        // R_{a,2}(u-v) R_{a,3}(u) R_{2,3}(v) = R_{2,3}(v) R_{a,3}(u) R_{a,2}(u-v)
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let v = GradedSpace::gl11();
        let variants: Vec<(Option<(Branch, u8)>, GradedSpace)> = vec![
            (None, v.clone()),
            (Some((Branch::Sym, 1)), sym1_space()),
            (Some((Branch::Asym, 1)), asym1_space()),
            (Some((Branch::Sym, 2)), level2_space()),
            (Some((Branch::Asym, 2)), level2_space()),
        ];
        for (tag, aux) in variants {
            for _ in 0..10 {
                let u = rand_c(&mut rng);
                let w = rand_c(&mut rng);
                let eta = rand_c(&mut rng) + cx(0.6, 0.0);
                let r_aux = |x: C64| -> GradedOperator {
                    match tag {
                        None => r_matrix(x, eta),
                        Some((b, l)) => fuse_r(b, l, FusedSide::FusedFirst, x, eta).unwrap(),
                    }
                };
                let chain = [aux.clone(), v.clone(), v.clone()];
                let ra2 = embed(&r_aux(u - w), &[0, 1], &chain).unwrap();
                let ra3 = embed(&r_aux(u), &[0, 2], &chain).unwrap();
                let r23 = embed(&r_matrix(w, eta), &[1, 2], &chain).unwrap();
                let lhs = product(&[&ra2, &ra3, &r23]).unwrap();
                let rhs = product(&[&r23, &ra3, &ra2]).unwrap();
                assert!(lhs.rel_distance(&rhs) < 1e-10);
            }
        }
    }

    #[test]
    fn fused_k_closure() {
        // second-level fused K-matrices agree across branches
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let g = GrassmannContext::new();
        for _ in 0..50 {
            let mut p = ModelParameters::open_reference(2);
            p.eta = rand_c(&mut rng) + cx(0.7, 0.0);
            p.a_minus = rand_c(&mut rng);
            p.a_plus = rand_c(&mut rng);
            p.b_minus = rand_c(&mut rng);
            p.b_plus = rand_c(&mut rng);
            p.f_minus = rand_c(&mut rng);
            p.f_plus = rand_c(&mut rng);
            let u = 2.0 * rand_c(&mut rng);
            for sign in [KSign::Minus, KSign::Plus] {
                let a = fuse_k(Branch::Sym, 2, sign, u, &p, &g);
                let b = fuse_k(Branch::Asym, 2, sign, u, &p, &g);
                match (a, b) {
                    (Ok(a), Ok(b)) => assert!(a.rel_distance(&b) < 1e-9),
                    // a draw can land near a normalization zero; skip it
                    _ => continue,
                }
            }
        }
    }

    #[test]
    fn fused_k_level1_special_value() {
        // with b = f = 0 and a_- = 0 the sandwich reduces to
        // P (u+eta/2)^{-1} R(2u) P compressed, by direct substitution
        let g = GrassmannContext::new();
        let mut p = ModelParameters::open_reference(2);
        p.a_minus = cx(0.0, 0.0);
        p.b_minus = cx(0.0, 0.0);
        p.f_minus = cx(0.0, 0.0);
        let u = cx(0.43, 0.17);
        let eta = p.eta;
        let got = fuse_k(Branch::Sym, 1, KSign::Minus, u, &p, &g).unwrap();
        let body = crate::model::grassmann_body(&got, &g).unwrap();
        let plus = projector_basis(ProjectorKind::Plus).unwrap();
        let r = r_matrix(2.0 * u, eta);
        let expect = plus
            .compress(&r)
            .unwrap()
            .scale(cx(1.0, 0.0) / (u + 0.5 * eta));
        assert!(body.rel_distance(&expect) < 1e-12);
    }

    #[test]
    fn fused_k_normalization_error_names_factor() {
        let g = GrassmannContext::new();
        let p = ModelParameters::open_reference(2);
        // u = eta/2 zeroes the (u - eta/2) factor of the sym K^+ normalization
        let err = fuse_k(Branch::Sym, 1, KSign::Plus, 0.5 * p.eta, &p, &g).unwrap_err();
        let msg = format!("{err}");
        assert!(msg.contains("(u-eta/2)"), "got: {msg}");
    }

    #[test]
    fn fused_reflection_equations() {
        // fused RE for K^- and fused dual RE for K^+ with the fused level-1
        // spaces in the first slot and a base space in the second
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let g = GrassmannContext::new();
        let v = GradedSpace::gl11();
        for branch in [Branch::Sym, Branch::Asym] {
            for _ in 0..6 {
                let mut p = ModelParameters::open_reference(2);
                p.a_minus = rand_c(&mut rng);
                p.a_plus = rand_c(&mut rng);
                p.b_minus = rand_c(&mut rng);
                p.b_plus = rand_c(&mut rng);
                p.f_minus = rand_c(&mut rng);
                p.f_plus = rand_c(&mut rng);
                let eta = p.eta;
                let u = rand_c(&mut rng);
                let w = rand_c(&mut rng);
                let aux = fused_space(branch, 1);
                let chain = [g.aux_space().clone(), aux.clone(), v.clone()];
                let r_ab = |x: C64| fuse_r(branch, 1, FusedSide::FusedFirst, x, eta).unwrap();
                let r_ba = |x: C64| fuse_r(branch, 1, FusedSide::FusedSecond, x, eta).unwrap();

                let ka_m = |x: C64| -> Option<GradedOperator> {
                    fuse_k(branch, 1, KSign::Minus, x, &p, &g)
                        .ok()
                        .map(|k| embed(&k, &[0, 1], &chain).unwrap())
                };
                let kb_m =
                    |x: C64| embed(&k_minus(x, &p, &g).unwrap(), &[0, 2], &chain).unwrap();
                if let (Some(kau), _) = (ka_m(u), ()) {
                    let lhs = product(&[
                        &embed(&r_ab(u - w), &[1, 2], &chain).unwrap(),
                        &kau,
                        &embed(&r_ba(u + w), &[2, 1], &chain).unwrap(),
                        &kb_m(w),
                    ])
                    .unwrap();
                    let rhs = product(&[
                        &kb_m(w),
                        &embed(&r_ab(u + w), &[1, 2], &chain).unwrap(),
                        &kau,
                        &embed(&r_ba(u - w), &[2, 1], &chain).unwrap(),
                    ])
                    .unwrap();
                    assert!(lhs.rel_distance(&rhs) < 1e-9, "fused RE failed");
                }

                let ka_p = |x: C64| -> Option<GradedOperator> {
                    fuse_k(branch, 1, KSign::Plus, x, &p, &g)
                        .ok()
                        .map(|k| embed(&k, &[0, 1], &chain).unwrap())
                };
                let kb_p = |x: C64| embed(&k_plus(x, &p, &g).unwrap(), &[0, 2], &chain).unwrap();
                if let Some(kau) = ka_p(u) {
                    let lhs = product(&[
                        &embed(&r_ab(w - u), &[1, 2], &chain).unwrap(),
                        &kau,
                        &embed(&r_ba(-u - w), &[2, 1], &chain).unwrap(),
                        &kb_p(w),
                    ])
                    .unwrap();
                    let rhs = product(&[
                        &kb_p(w),
                        &embed(&r_ab(-u - w), &[1, 2], &chain).unwrap(),
                        &kau,
                        &embed(&r_ba(w - u), &[2, 1], &chain).unwrap(),
                    ])
                    .unwrap();
                    assert!(lhs.rel_distance(&rhs) < 1e-9, "fused dual RE failed");
                }
            }
        }
    }
}
