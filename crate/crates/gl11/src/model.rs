//! The gl(1|1) model data: R-matrix, boundary K-matrices over the complex
//! Grassmann algebra with one generator, and the parameter record shared by
//! all downstream modules.
//!
//! The Grassmann algebra is represented by one auxiliary graded site
//! super-tensored at the far left of every open-chain operator; the signs of
//! the generator anticommuting past fermionic operators then come for free
//! from the super tensor product.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    super_tensor, GradedOperator, GradedSpace, Matrix,
};

/// Boundary condition of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Open,
}

impl std::fmt::Display for Boundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Boundary::Periodic => write!(f, "periodic"),
            Boundary::Open => write!(f, "open"),
        }
    }
}

/// Site count, crossing parameter, inhomogeneities and boundary data.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParameters {
    pub n: usize,
    pub eta: C64,
    pub theta: Vec<C64>,
    pub a_minus: C64,
    pub a_plus: C64,
    pub b_minus: C64,
    pub b_plus: C64,
    pub f_minus: C64,
    pub f_plus: C64,
    pub boundary: Boundary,
}

impl ModelParameters {
    /// Homogeneous periodic chain.
    pub fn periodic(n: usize, eta: C64) -> Self {
        Self {
            n,
            eta,
            theta: vec![C64::new(0.0, 0.0); n],
            a_minus: C64::new(0.0, 0.0),
            a_plus: C64::new(0.0, 0.0),
            b_minus: C64::new(0.0, 0.0),
            b_plus: C64::new(0.0, 0.0),
            f_minus: C64::new(0.0, 0.0),
            f_plus: C64::new(0.0, 0.0),
            boundary: Boundary::Periodic,
        }
    }

    /// Homogeneous open chain. Grassmann coefficients default to 1, which is
    /// generic and exercises every boundary term; spectra do not depend on
    /// them.
    pub fn open(n: usize, eta: C64, a_plus: C64, a_minus: C64) -> Self {
        Self {
            n,
            eta,
            theta: vec![C64::new(0.0, 0.0); n],
            a_minus,
            a_plus,
            b_minus: C64::new(1.0, 0.0),
            b_plus: C64::new(1.0, 0.0),
            f_minus: C64::new(1.0, 0.0),
            f_plus: C64::new(1.0, 0.0),
            boundary: Boundary::Open,
        }
    }

    /// The open-boundary preset used by the reference spectra: a_+ = 0.5,
    /// a_- = 1.2, eta = 1.
    pub fn open_reference(n: usize) -> Self {
        Self::open(
            n,
            C64::new(1.0, 0.0),
            C64::new(0.5, 0.0),
            C64::new(1.2, 0.0),
        )
    }

    pub fn with_theta(mut self, theta: Vec<C64>) -> Result<Self> {
        if theta.len() != self.n {
            return Err(Error::Invalid(format!(
                "expected {} inhomogeneities, got {}",
                self.n,
                theta.len()
            )));
        }
        self.theta = theta;
        Ok(self)
    }

    /// Generic-position gate for identity-verification runs: inhomogeneities
    /// pairwise distinct and theta_i +- theta_j away from {0, eta, 2 eta}.
    /// Open-boundary identity runs additionally need each theta_j away from
    /// {0, +-eta/2, +-eta, +-3 eta/2}.
    pub fn validate_generic(&self) -> Result<()> {
        let bad = |z: C64, name: String| Err(Error::DegenerateParameters(name + &format!(" = {z}")));
        let offsets = [
            C64::new(0.0, 0.0),
            self.eta,
            -self.eta,
            2.0 * self.eta,
            -2.0 * self.eta,
        ];
        for i in 0..self.n {
            for j in 0..self.n {
                if i == j {
                    continue;
                }
                for (z, tag) in [
                    (self.theta[i] - self.theta[j], "-"),
                    (self.theta[i] + self.theta[j], "+"),
                ] {
                    for off in offsets {
                        if (z - off).norm() < 1e-6 {
                            return bad(z, format!("theta_{i} {tag} theta_{j}"));
                        }
                    }
                }
            }
        }
        if self.boundary == Boundary::Open {
            let half = 0.5 * self.eta;
            let specials = [
                C64::new(0.0, 0.0),
                half,
                -half,
                self.eta,
                -self.eta,
                3.0 * half,
                -3.0 * half,
            ];
            for (j, t) in self.theta.iter().enumerate() {
                for s in specials {
                    if (t - s).norm() < 1e-6 {
                        return bad(*t, format!("theta_{j}"));
                    }
                }
            }
        }
        Ok(())
    }

    /// Enforce the Hermitian-Hamiltonian preset: b = conj(f), a real.
    pub fn hermitize(mut self) -> Self {
        self.a_minus = C64::new(self.a_minus.re, 0.0);
        self.a_plus = C64::new(self.a_plus.re, 0.0);
        self.b_minus = self.f_minus.conj();
        self.b_plus = self.f_plus.conj();
        self
    }
}

/// One auxiliary graded site representing the complex Grassmann algebra with
/// a single generator.
///
/// The generator acts by left multiplication on the algebra itself, giving a
/// nilpotent odd operator on a dim-2 space with parities (0, 1); the adjoint
/// generator is the constant -i times it.
#[derive(Debug, Clone)]
pub struct GrassmannContext {
    aux_space: GradedSpace,
    generator: GradedOperator,
    adjoint_factor: C64,
}

impl GrassmannContext {
    pub fn new() -> Self {
        let aux_space = GradedSpace::gl11();
        let mut m = Matrix::zeros(2, 2);
        m[(1, 0)] = C64::new(1.0, 0.0);
        let generator = GradedOperator::endo(aux_space.clone(), m).expect("2x2 on dim-2 space");
        Self {
            aux_space,
            generator,
            adjoint_factor: C64::new(0.0, -1.0),
        }
    }

    pub fn aux_space(&self) -> &GradedSpace {
        &self.aux_space
    }

    /// The generator as an odd operator on the auxiliary site.
    pub fn generator(&self) -> &GradedOperator {
        &self.generator
    }

    /// The adjoint generator (-i times the generator).
    pub fn adjoint_generator(&self) -> GradedOperator {
        self.generator.scale(self.adjoint_factor)
    }

    pub fn adjoint_factor(&self) -> C64 {
        self.adjoint_factor
    }
}

impl Default for GrassmannContext {
    fn default() -> Self {
        Self::new()
    }
}

/// a(u) = prod_j (u - theta_j).
pub fn a_scalar(p: &ModelParameters, u: C64) -> C64 {
    p.theta.iter().fold(C64::new(1.0, 0.0), |acc, t| acc * (u - t))
}

/// alpha(u) = (1 + u a_-)[1 + (u + eta) a_+] prod_j (u + theta_j + eta)(u - theta_j + eta);
/// the scalar entering the open-chain operator identities and T-Q relation.
pub fn alpha_scalar(p: &ModelParameters, u: C64) -> C64 {
    let one = C64::new(1.0, 0.0);
    let mut acc = (one + u * p.a_minus) * (one + (u + p.eta) * p.a_plus);
    for t in &p.theta {
        acc *= (u + t + p.eta) * (u - t + p.eta);
    }
    acc
}

/// The gl(1|1) R-matrix on V (x) V in the basis (11), (12), (21), (22):
/// diag-block form with entries u + eta | [u, eta; eta, u] | u - eta.
pub fn r_matrix(u: C64, eta: C64) -> GradedOperator {
    let v = GradedSpace::gl11();
    let space = v.tensor(&v);
    let mut m = Matrix::zeros(4, 4);
    m[(0, 0)] = u + eta;
    m[(1, 1)] = u;
    m[(1, 2)] = eta;
    m[(2, 1)] = eta;
    m[(2, 2)] = u;
    m[(3, 3)] = u - eta;
    GradedOperator::endo(space, m).expect("4x4 on dim-4 space")
}

fn k_matrix(
    u: C64,
    a: C64,
    b: C64,
    f: C64,
    g: &GrassmannContext,
) -> GradedOperator {
    let v = GradedSpace::gl11();
    let ig = GradedOperator::identity(g.aux_space());
    // body: I + u diag(a, -a) on the boundary space
    let mut body = Matrix::identity(2);
    body[(0, 0)] += u * a;
    body[(1, 1)] -= u * a;
    let body = GradedOperator::endo(v.clone(), body).expect("2x2");
    let mut out = super_tensor(&ig, &body);
    // off-diagonal Grassmann entries: u b E (x) E^{12} + u f E_adj (x) E^{21}
    let e12 = GradedOperator::matrix_unit(&v, 0, 1);
    let e21 = GradedOperator::matrix_unit(&v, 1, 0);
    let soul_b = super_tensor(&g.generator().scale(u * b), &e12);
    let soul_f = super_tensor(&g.adjoint_generator().scale(u * f), &e21);
    out = out.add(&soul_b).expect("same space");
    out.add(&soul_f).expect("same space")
}

/// Boundary reflection matrix K^-(u) on V_aux (x) V.
pub fn k_minus(u: C64, p: &ModelParameters, g: &GrassmannContext) -> Result<GradedOperator> {
    if p.boundary != Boundary::Open {
        return Err(Error::RequiresOpenBoundary);
    }
    Ok(k_matrix(u, p.a_minus, p.b_minus, p.f_minus, g))
}

/// Dual boundary reflection matrix K^+(u) on V_aux (x) V.
pub fn k_plus(u: C64, p: &ModelParameters, g: &GrassmannContext) -> Result<GradedOperator> {
    if p.boundary != Boundary::Open {
        return Err(Error::RequiresOpenBoundary);
    }
    Ok(k_matrix(u, p.a_plus, p.b_plus, p.f_plus, g))
}

/// Extract the Grassmann-free part of an operator on V_aux (x) W.
///
/// Products of the model's operators are at most linear in the generator, so
/// they are block lower-triangular in the auxiliary grading; the body is the
/// (0,0) diagonal block. A nonzero (0,1) block signals a sign bug upstream.
pub fn grassmann_body(a: &GradedOperator, g: &GrassmannContext) -> Result<GradedOperator> {
    let dim = a.dim_checked_square()?;
    let gd = g.aux_space().dim();
    if dim % gd != 0 {
        return Err(Error::ShapeMismatch(
            "operator dimension is not a multiple of the Grassmann site".into(),
        ));
    }
    let rest = dim / gd;
    let rest_parity: Vec<u8> = (0..rest)
        .map(|i| {
            // parity of the residual factor: total parity minus aux parity of block 0
            a.domain().parity(i)
        })
        .collect();
    let rest_space = GradedSpace::new(rest_parity)?;
    let mut body = Matrix::zeros(rest, rest);
    let mut upper = 0.0f64;
    for i in 0..rest {
        for j in 0..rest {
            body[(i, j)] = a.entries()[(i, j)];
            upper = upper.max(a.entries()[(i, rest + j)].norm());
        }
    }
    let scale = a.entries().max_abs().max(1e-30);
    if upper > 1e-10 * scale {
        return Err(Error::GrassmannStructure(format!(
            "aux-(0,1) block has magnitude {:.3e} relative to {:.3e}",
            upper, scale
        )));
    }
    GradedOperator::endo(rest_space, body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{
        embed, partial_super_transpose, product, super_permutation, Factor, GradedOperator,
    };
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn rand_c(rng: &mut ChaCha8Rng) -> C64 {
        c(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5)
    }

    #[test]
    fn regularity() {
        let eta = c(0.7, 0.3);
        let r0 = r_matrix(c(0.0, 0.0), eta);
        let p = super_permutation(&GradedSpace::gl11()).scale(eta);
        assert!(r0.rel_distance(&p) < 1e-15);
    }

    #[test]
    fn unitarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let chain = [GradedSpace::gl11(), GradedSpace::gl11()];
        for _ in 0..50 {
            let u = rand_c(&mut rng);
            let eta = rand_c(&mut rng) + c(0.5, 0.0);
            let r12 = r_matrix(u, eta);
            let r21 = embed(&r_matrix(-u, eta), &[1, 0], &chain).unwrap();
            let lhs = r12.compose(&r21).unwrap();
            let rho1 = -(u - eta) * (u + eta);
            let rhs = GradedOperator::identity(r12.domain()).scale(rho1);
            assert!(lhs.rel_distance(&rhs) < 1e-11);
        }
    }

    #[test]
    fn crossing_unitarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let v = GradedSpace::gl11();
        let chain = [v.clone(), v.clone()];
        for _ in 0..50 {
            let u = rand_c(&mut rng);
            let eta = rand_c(&mut rng) + c(0.5, 0.0);
            let lhs_a = partial_super_transpose(&r_matrix(-u, eta), &v, &v, Factor::First).unwrap();
            let r21 = embed(&r_matrix(u, eta), &[1, 0], &chain).unwrap();
            let lhs_b = partial_super_transpose(&r21, &v, &v, Factor::First).unwrap();
            let lhs = lhs_a.compose(&lhs_b).unwrap();
            let rhs = GradedOperator::identity(lhs.domain()).scale(-u * u);
            assert!(lhs.rel_distance(&rhs) < 1e-11);
        }
    }

    #[test]
    fn graded_yang_baxter() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = GradedSpace::gl11();
        let chain = [v.clone(), v.clone(), v.clone()];
        for _ in 0..100 {
            let u = rand_c(&mut rng);
            let w = rand_c(&mut rng);
            let eta = rand_c(&mut rng) + c(0.5, 0.0);
            let r12 = embed(&r_matrix(u - w, eta), &[0, 1], &chain).unwrap();
            let r13 = embed(&r_matrix(u, eta), &[0, 2], &chain).unwrap();
            let r23 = embed(&r_matrix(w, eta), &[1, 2], &chain).unwrap();
            let lhs = product(&[&r12, &r13, &r23]).unwrap();
            let rhs = product(&[&r23, &r13, &r12]).unwrap();
            assert!(lhs.rel_distance(&rhs) < 1e-11);
        }
    }

    #[test]
    fn grassmann_generator_is_odd_and_nilpotent() {
        let g = GrassmannContext::new();
        let e = g.generator();
        let e2 = e.compose(e).unwrap();
        assert_eq!(e2.max_abs(), 0.0);
        // maps the even basis vector to the odd one and kills the odd one
        assert_eq!(e.entries()[(1, 0)], c(1.0, 0.0));
        assert_eq!(e.entries()[(0, 1)], c(0.0, 0.0));
        let adj = g.adjoint_generator();
        assert_eq!(adj.entries()[(1, 0)], c(0.0, -1.0));
    }

    #[test]
    fn k_minus_at_zero_is_identity() {
        let p = ModelParameters::open_reference(2);
        let g = GrassmannContext::new();
        let k = k_minus(c(0.0, 0.0), &p, &g).unwrap();
        assert!(k.rel_distance(&GradedOperator::identity(k.domain())) < 1e-15);
        let kp = k_plus(c(0.0, 0.0), &p, &g).unwrap();
        assert!(kp.rel_distance(&GradedOperator::identity(kp.domain())) < 1e-15);
    }

    #[test]
    fn k_requires_open_boundary() {
        let p = ModelParameters::periodic(2, c(1.0, 0.0));
        let g = GrassmannContext::new();
        assert!(k_minus(c(0.3, 0.0), &p, &g).is_err());
        assert!(k_plus(c(0.3, 0.0), &p, &g).is_err());
    }

    #[test]
    fn k_body_is_diagonal_form() {
        let p = ModelParameters::open_reference(2);
        let g = GrassmannContext::new();
        let u = c(0.37, -0.21);
        let k = k_minus(u, &p, &g).unwrap();
        let body = grassmann_body(&k, &g).unwrap();
        let mut expect = Matrix::identity(2);
        expect[(0, 0)] += u * p.a_minus;
        expect[(1, 1)] -= u * p.a_minus;
        let expect = GradedOperator::endo(GradedSpace::gl11(), expect).unwrap();
        assert!(body.rel_distance(&expect) < 1e-15);
    }

    #[test]
    fn grassmann_body_of_identity() {
        let g = GrassmannContext::new();
        let space = g.aux_space().tensor(&GradedSpace::gl11());
        let i = GradedOperator::identity(&space);
        let body = grassmann_body(&i, &g).unwrap();
        assert!(body.rel_distance(&GradedOperator::identity(&GradedSpace::gl11())) < 1e-15);
    }

    #[test]
    fn k_matrices_do_not_commute() {
        // non-commutativity witness for a_- = 1.2, a_+ = 0.5, b = f = 1
        let p = ModelParameters::open_reference(2);
        let g = GrassmannContext::new();
        let km = k_minus(c(0.3, 0.0), &p, &g).unwrap();
        let kp = k_plus(c(0.7, 0.0), &p, &g).unwrap();
        let comm = km
            .compose(&kp)
            .unwrap()
            .sub(&kp.compose(&km).unwrap())
            .unwrap();
        assert!(comm.frobenius_norm() > 1e-3);
    }

    fn reflection_residual(p: &ModelParameters, u: C64, w: C64, dual: bool) -> f64 {
        // ambient chain: [grassmann, V1, V2]
        let g = GrassmannContext::new();
        let v = GradedSpace::gl11();
        let chain = [g.aux_space().clone(), v.clone(), v.clone()];
        let eta = p.eta;
        let emb_r = |x: C64, pos: &[usize]| embed(&r_matrix(x, eta), pos, &chain).unwrap();
        let emb_k = |x: C64, slot: usize, plus: bool| {
            let k = if plus {
                k_plus(x, p, &g).unwrap()
            } else {
                k_minus(x, p, &g).unwrap()
            };
            embed(&k, &[0, slot], &chain).unwrap()
        };
        if !dual {
            let lhs = product(&[
                &emb_r(u - w, &[1, 2]),
                &emb_k(u, 1, false),
                &emb_r(u + w, &[2, 1]),
                &emb_k(w, 2, false),
            ])
            .unwrap();
            let rhs = product(&[
                &emb_k(w, 2, false),
                &emb_r(u + w, &[1, 2]),
                &emb_k(u, 1, false),
                &emb_r(u - w, &[2, 1]),
            ])
            .unwrap();
            lhs.rel_distance(&rhs)
        } else {
            let lhs = product(&[
                &emb_r(w - u, &[1, 2]),
                &emb_k(u, 1, true),
                &emb_r(-u - w, &[2, 1]),
                &emb_k(w, 2, true),
            ])
            .unwrap();
            let rhs = product(&[
                &emb_k(w, 2, true),
                &emb_r(-u - w, &[1, 2]),
                &emb_k(u, 1, true),
                &emb_r(w - u, &[2, 1]),
            ])
            .unwrap();
            lhs.rel_distance(&rhs)
        }
    }

    #[test]
    fn reflection_equations_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..10 {
            let mut p = ModelParameters::open_reference(2);
            p.a_minus = rand_c(&mut rng);
            p.a_plus = rand_c(&mut rng);
            p.b_minus = rand_c(&mut rng);
            p.b_plus = rand_c(&mut rng);
            p.f_minus = rand_c(&mut rng);
            p.f_plus = rand_c(&mut rng);
            let u = rand_c(&mut rng);
            let w = rand_c(&mut rng);
            assert!(reflection_residual(&p, u, w, false) < 1e-10);
            assert!(reflection_residual(&p, u, w, true) < 1e-10);
        }
    }

    #[test]
    fn r_matrix_determinant_matches_cofactor_expansion() {
        // oracle: direct 4x4 cofactor expansion, which collapses to
        // (u^2 - eta^2)^2 for this matrix
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..10 {
            let u = rand_c(&mut rng);
            let eta = rand_c(&mut rng) + c(0.5, 0.0);
            let r = r_matrix(u, eta);
            let m = r.entries();
            let minor3 = |rows: [usize; 3], cols: [usize; 3]| {
                m[(rows[0], cols[0])]
                    * (m[(rows[1], cols[1])] * m[(rows[2], cols[2])]
                        - m[(rows[1], cols[2])] * m[(rows[2], cols[1])])
                    - m[(rows[0], cols[1])]
                        * (m[(rows[1], cols[0])] * m[(rows[2], cols[2])]
                            - m[(rows[1], cols[2])] * m[(rows[2], cols[0])])
                    + m[(rows[0], cols[2])]
                        * (m[(rows[1], cols[0])] * m[(rows[2], cols[1])]
                            - m[(rows[1], cols[1])] * m[(rows[2], cols[0])])
            };
            let cofactor = m[(0, 0)] * minor3([1, 2, 3], [1, 2, 3])
                - m[(0, 1)] * minor3([1, 2, 3], [0, 2, 3])
                + m[(0, 2)] * minor3([1, 2, 3], [0, 1, 3])
                - m[(0, 3)] * minor3([1, 2, 3], [0, 1, 2]);
            let det = crate::linalg::lu_determinant(m).unwrap();
            assert!((det - cofactor).norm() < 1e-12 * cofactor.norm().max(1.0));
            let closed = (u * u - eta * eta) * (u * u - eta * eta);
            assert!((det - closed).norm() < 1e-12 * closed.norm().max(1.0));
        }
    }

    #[test]
    fn generic_position_gate() {
        let mut p = ModelParameters::periodic(2, c(1.0, 0.0));
        p.theta = vec![c(0.3, 0.1), c(0.3, 0.1)];
        assert!(p.validate_generic().is_err());
        p.theta = vec![c(0.31, 0.12), c(-0.47, 0.55)];
        assert!(p.validate_generic().is_ok());
        // difference exactly eta
        p.theta = vec![c(1.2, 0.1), c(0.2, 0.1)];
        assert!(p.validate_generic().is_err());
    }
}
