//! Monodromy and transfer matrices, periodic and open, at every fusion
//! level, together with the Hamiltonians and the full battery of operator
//! identity verifications.
//!
//! Open-chain operators act on [grassmann site, auxiliary space, physical
//! sites...]; the auxiliary space is supertraced away by the transfer
//! matrix, leaving an operator on grassmann (x) physical.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::fusion::{fuse_k, fuse_r, fused_space, Branch, FusedSide, KSign};
use crate::linalg::{
    choose_nodes, embed, interpolate_operator, lu_factor, partial_super_trace, product,
    super_tensor, GradedOperator, GradedSpace, PolySamples,
};
use crate::model::{
    a_scalar, alpha_scalar, grassmann_body, k_minus, k_plus, r_matrix, Boundary, GrassmannContext,
    ModelParameters,
};
use crate::report::{format_complex, Check};

/// Auxiliary space selector for monodromy matrices.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Aux {
    Base,
    Fused(Branch, u8),
}

impl Aux {
    pub fn space(self) -> GradedSpace {
        match self {
            Aux::Base => GradedSpace::gl11(),
            Aux::Fused(b, l) => fused_space(b, l),
        }
    }
}

/// Transfer-matrix level within the fusion hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    /// t(u), the base transfer matrix.
    Base,
    /// First-level fused transfer matrix from the symmetric branch.
    Sym1,
    /// First-level fused transfer matrix from the antisymmetric branch.
    Asym1,
    /// The common second level that closes the hierarchy.
    Tilde,
}

impl Level {
    pub fn aux(self) -> Aux {
        match self {
            Level::Base => Aux::Base,
            Level::Sym1 => Aux::Fused(Branch::Sym, 1),
            Level::Asym1 => Aux::Fused(Branch::Asym, 1),
            Level::Tilde => Aux::Fused(Branch::Sym, 2),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Level::Base => "t",
            Level::Sym1 => "t1",
            Level::Asym1 => "t2",
            Level::Tilde => "ttilde",
        }
    }

    pub const ALL: [Level; 4] = [Level::Base, Level::Sym1, Level::Asym1, Level::Tilde];
}

/// A transfer-matrix level bound to its parameters: a polynomial family in
/// the spectral parameter with a known degree bound.
#[derive(Debug, Clone)]
pub struct TransferFamily {
    pub params: ModelParameters,
    pub level: Level,
}

impl TransferFamily {
    pub fn new(params: ModelParameters, level: Level) -> Self {
        Self { params, level }
    }

    pub fn evaluate(&self, g: &GrassmannContext, u: C64) -> Result<GradedOperator> {
        transfer(&self.params, g, self.level, u)
    }

    /// Polynomial degree bound: N-1 for periodic chains; 2N+2 for open ones,
    /// whose top coefficient vanishes identically.
    pub fn degree_bound(&self) -> usize {
        match self.params.boundary {
            Boundary::Periodic => self.params.n.saturating_sub(1),
            Boundary::Open => 2 * self.params.n + 2,
        }
    }

    /// Monomial coefficient operators up to the degree bound, by sampling
    /// and entrywise interpolation.
    pub fn coefficients(&self, g: &GrassmannContext) -> Result<Vec<GradedOperator>> {
        let bound = match self.params.boundary {
            Boundary::Periodic => self.params.n, // one slot above, to see it vanish
            Boundary::Open => 2 * self.params.n + 2,
        };
        transfer_coefficients(&self.params, g, self.level, bound).map(|(c, _)| c)
    }
}

fn r_aux_phys(aux: Aux, x: C64, eta: C64) -> Result<GradedOperator> {
    match aux {
        Aux::Base => Ok(r_matrix(x, eta)),
        Aux::Fused(b, l) => fuse_r(b, l, FusedSide::FusedFirst, x, eta),
    }
}

fn r_phys_aux(aux: Aux, x: C64, eta: C64) -> Result<GradedOperator> {
    match aux {
        Aux::Base => Ok(r_matrix(x, eta)),
        Aux::Fused(b, l) => fuse_r(b, l, FusedSide::FusedSecond, x, eta),
    }
}

/// Ordered product R_{a,1}(u - theta_1) ... R_{a,N}(u - theta_N) embedded in
/// an arbitrary chain; `phys_slots[j]` holds site j+1.
pub fn monodromy_in_chain(
    p: &ModelParameters,
    aux: Aux,
    aux_slot: usize,
    phys_slots: &[usize],
    chain: &[GradedSpace],
    u: C64,
) -> Result<GradedOperator> {
    let mut factors = Vec::with_capacity(phys_slots.len());
    for (j, &slot) in phys_slots.iter().enumerate() {
        let r = r_aux_phys(aux, u - p.theta[j], p.eta)?;
        factors.push(embed(&r, &[aux_slot, slot], chain)?);
    }
    let refs: Vec<&GradedOperator> = factors.iter().collect();
    product(&refs)
}

/// Reversed product R_{N,a}(u + theta_N) ... R_{1,a}(u + theta_1).
pub fn reflecting_monodromy_in_chain(
    p: &ModelParameters,
    aux: Aux,
    aux_slot: usize,
    phys_slots: &[usize],
    chain: &[GradedSpace],
    u: C64,
) -> Result<GradedOperator> {
    let mut factors = Vec::with_capacity(phys_slots.len());
    for (j, &slot) in phys_slots.iter().enumerate().rev() {
        let r = r_phys_aux(aux, u + p.theta[j], p.eta)?;
        factors.push(embed(&r, &[slot, aux_slot], chain)?);
    }
    let refs: Vec<&GradedOperator> = factors.iter().collect();
    product(&refs)
}

fn aux_phys_chain(p: &ModelParameters, aux: Aux) -> Vec<GradedSpace> {
    let mut chain = vec![aux.space()];
    chain.extend(std::iter::repeat(GradedSpace::gl11()).take(p.n));
    chain
}

/// Monodromy matrix on V_aux (x) V^{(x) N}.
pub fn monodromy(p: &ModelParameters, aux: Aux, u: C64) -> Result<GradedOperator> {
    let chain = aux_phys_chain(p, aux);
    let phys: Vec<usize> = (1..=p.n).collect();
    monodromy_in_chain(p, aux, 0, &phys, &chain, u)
}

/// Reflecting monodromy matrix on V_aux (x) V^{(x) N}.
pub fn reflecting_monodromy(p: &ModelParameters, aux: Aux, u: C64) -> Result<GradedOperator> {
    let chain = aux_phys_chain(p, aux);
    let phys: Vec<usize> = (1..=p.n).collect();
    reflecting_monodromy_in_chain(p, aux, 0, &phys, &chain, u)
}

/// Fused K-matrix extended through the removable zeros of the sandwich
/// normalization. The fused K entries are degree <= 1 in u, so two good
/// sample points determine them everywhere.
pub fn fused_k_extended(
    branch: Branch,
    level: u8,
    sign: KSign,
    u: C64,
    p: &ModelParameters,
    g: &GrassmannContext,
) -> Result<GradedOperator> {
    let scale = p.eta.norm().max(0.5);
    let candidates = [
        C64::new(0.337, 0.719),
        C64::new(-0.541, 0.233),
        C64::new(0.193, -0.677),
        C64::new(-0.367, -0.451),
        C64::new(0.729, 0.157),
        C64::new(0.111, 0.529),
        C64::new(-0.673, -0.089),
        C64::new(0.457, -0.311),
    ];
    let mut got: Vec<(C64, GradedOperator)> = Vec::new();
    for cand in candidates {
        let x = cand * scale;
        if let Ok(k) = fuse_k(branch, level, sign, x, p, g) {
            got.push((x, k));
            if got.len() == 2 {
                break;
            }
        }
    }
    if got.len() < 2 {
        return Err(Error::Invalid(
            "could not find two regular points for the fused K-matrix".into(),
        ));
    }
    let (x0, k0) = &got[0];
    let (x1, k1) = &got[1];
    let t = (u - x0) / (x1 - x0);
    k0.add(&k1.sub(k0)?.scale(t))
}

fn k_for_level(
    level: Level,
    sign: KSign,
    u: C64,
    p: &ModelParameters,
    g: &GrassmannContext,
) -> Result<GradedOperator> {
    match level.aux() {
        Aux::Base => match sign {
            KSign::Minus => k_minus(u, p, g),
            KSign::Plus => k_plus(u, p, g),
        },
        Aux::Fused(b, l) => fused_k_extended(b, l, sign, u, p, g),
    }
}

/// Transfer matrix at the given level.
///
/// Periodic: supertrace over the auxiliary space of the monodromy, acting on
/// V^{(x) N}. Open: str_aux{ K^+ T K^- That } acting on V_g (x) V^{(x) N}.
pub fn transfer(
    p: &ModelParameters,
    g: &GrassmannContext,
    level: Level,
    u: C64,
) -> Result<GradedOperator> {
    let aux = level.aux();
    match p.boundary {
        Boundary::Periodic => {
            let chain = aux_phys_chain(p, aux);
            let t = monodromy(p, aux, u)?;
            partial_super_trace(&t, &chain, &[0])
        }
        Boundary::Open => {
            // chain [V_g, V_aux, V x N]
            let mut chain = vec![g.aux_space().clone(), aux.space()];
            chain.extend(std::iter::repeat(GradedSpace::gl11()).take(p.n));
            let phys: Vec<usize> = (2..2 + p.n).collect();
            let k_plus_op = embed(&k_for_level(level, KSign::Plus, u, p, g)?, &[0, 1], &chain)?;
            let k_minus_op = embed(&k_for_level(level, KSign::Minus, u, p, g)?, &[0, 1], &chain)?;
            let t = monodromy_in_chain(p, aux, 1, &phys, &chain, u)?;
            let that = reflecting_monodromy_in_chain(p, aux, 1, &phys, &chain, u)?;
            let full = product(&[&k_plus_op, &t, &k_minus_op, &that])?;
            partial_super_trace(&full, &chain, &[1])
        }
    }
}

/// The spectrum-relevant block of the transfer matrix: for open chains the
/// Grassmann-free body on V^{(x) N}, for periodic chains the transfer matrix
/// itself.
pub fn transfer_body(
    p: &ModelParameters,
    g: &GrassmannContext,
    level: Level,
    u: C64,
) -> Result<GradedOperator> {
    let t = transfer(p, g, level, u)?;
    match p.boundary {
        Boundary::Periodic => Ok(t),
        Boundary::Open => grassmann_body(&t, g),
    }
}

fn require_homogeneous(p: &ModelParameters) -> Result<()> {
    if p.theta.iter().any(|t| t.norm() > 1e-12) {
        return Err(Error::DegenerateParameters(
            "Hamiltonian construction requires the homogeneous point theta = 0".into(),
        ));
    }
    Ok(())
}

/// The Hamiltonian at the homogeneous point.
///
/// Periodic: sum of super permutations P_{j,j+1} with wrap-around, acting on
/// V^{(x) N}. Open: bulk permutations plus boundary terms linear in the
/// Grassmann generator, acting on V_g (x) V^{(x) N}.
pub fn hamiltonian(p: &ModelParameters, g: &GrassmannContext) -> Result<GradedOperator> {
    require_homogeneous(p)?;
    let v = GradedSpace::gl11();
    let perm = crate::linalg::super_permutation(&v);
    match p.boundary {
        Boundary::Periodic => {
            let chain: Vec<GradedSpace> = vec![v.clone(); p.n];
            let total = GradedSpace::tensor_chain(&chain)?;
            let mut h = GradedOperator::zero(&total, &total);
            for j in 0..p.n {
                let k = (j + 1) % p.n;
                h = h.add(&embed(&perm, &[j, k], &chain)?)?;
            }
            Ok(h)
        }
        Boundary::Open => {
            let mut chain = vec![g.aux_space().clone()];
            chain.extend(std::iter::repeat(v.clone()).take(p.n));
            let total = GradedSpace::tensor_chain(&chain)?;
            let mut h = GradedOperator::zero(&total, &total);
            // bulk: sites j, j+1 live at slots j, j+1 (slot 0 is the
            // grassmann site)
            for j in 1..p.n {
                h = h.add(&embed(&perm, &[j, j + 1], &chain)?)?;
            }
            let eta = p.eta;
            let eta_pow = eta.powu(p.n as u32 - 1);
            let one = C64::new(1.0, 0.0);
            let number = GradedOperator::matrix_unit(&v, 1, 1);
            let annihilate = GradedOperator::matrix_unit(&v, 0, 1);
            let create = GradedOperator::matrix_unit(&v, 1, 0);
            let gen = embed(g.generator(), &[0], &chain)?;
            let gen_adj = embed(&g.adjoint_generator(), &[0], &chain)?;
            let ident = GradedOperator::identity(&total);

            let boundary_term = |site: usize,
                                 a: C64,
                                 b: C64,
                                 f: C64|
             -> Result<GradedOperator> {
                let n_op = embed(&number, &[site], &chain)?;
                let c_op = embed(&annihilate, &[site], &chain)?;
                let cdag_op = embed(&create, &[site], &chain)?;
                ident
                    .scale(a)
                    .sub(&n_op.scale(2.0 * a))?
                    .add(&gen.compose(&c_op)?.scale(b))?
                    .add(&gen_adj.compose(&cdag_op)?.scale(f))
            };

            // With the monodromy ordered R_{0,1}...R_{0,N}, the K^- boundary
            // term acts on site N and the K^+ one on site 1 (the second
            // derivative of the transfer matrix fixes this orientation).
            let k_minus_term = boundary_term(p.n, p.a_minus, p.b_minus, p.f_minus)?
                .scale(0.5 * eta_pow);
            let k_plus_term = boundary_term(1, p.a_plus, p.b_plus, p.f_plus)?
                .scale(0.5 * eta_pow / (one + p.a_plus * eta));
            h = h.add(&k_minus_term)?.add(&k_plus_term)?;
            Ok(h)
        }
    }
}

fn rel_residual(a: &GradedOperator, b: &GradedOperator) -> f64 {
    a.rel_distance(b)
}

/// Norm of X relative to a reference scale (for "X vanishes" checks).
fn vanish_residual(x: &GradedOperator, scale: f64) -> f64 {
    x.frobenius_norm() / scale.max(1e-30)
}

// ---------------------------------------------------------------------------
// verification: projection identities
// ---------------------------------------------------------------------------

/// Degenerate-point projection identities of the monodromy and reflecting
/// monodromy matrices: one-sided projector absorption at the
/// inhomogeneities, generic-u right absorption, and the projector-sandwich
/// product relations with their scalar prefactors.
pub fn verify_projection_identities(p: &ModelParameters, tol: f64) -> Result<Vec<Check>> {
    p.validate_generic()?;
    let v = GradedSpace::gl11();
    let eta = p.eta;
    let mut checks = Vec::new();

    let plus = crate::fusion::projector(crate::fusion::ProjectorKind::Plus, eta)?;
    let minus = crate::fusion::projector(crate::fusion::ProjectorKind::Minus, eta)?;
    let l2sym = crate::fusion::projector(crate::fusion::ProjectorKind::Level2Sym, eta)?;
    let l2asym = crate::fusion::projector(crate::fusion::ProjectorKind::Level2Asym, eta)?;

    // ambient [aux_a, aux_b, phys...]
    let with_chain = |a: GradedSpace, b: GradedSpace| -> Vec<GradedSpace> {
        let mut chain = vec![a, b];
        chain.extend(std::iter::repeat(v.clone()).take(p.n));
        chain
    };
    let phys: Vec<usize> = (2..2 + p.n).collect();

    // base-base families at each theta_j: X = P X
    {
        let chain = with_chain(v.clone(), v.clone());
        for (j, &th) in p.theta.iter().enumerate() {
            for (proj, shift, tag) in [(&plus, eta, "plus"), (&minus, -eta, "minus")] {
                let t1 = monodromy_in_chain(p, Aux::Base, 0, &phys, &chain, th)?;
                let t2 = monodromy_in_chain(p, Aux::Base, 1, &phys, &chain, th + shift)?;
                let x = t1.compose(&t2)?;
                let pe = embed(&proj.operator, &[0, 1], &chain)?;
                let res = rel_residual(&x, &pe.compose(&x)?);
                checks.push(Check::new(
                    format!("projection/monodromy-{tag}/theta{j}"),
                    res,
                    tol,
                ));
                // reflecting analogue at -theta_j
                let h1 = reflecting_monodromy_in_chain(p, Aux::Base, 0, &phys, &chain, -th)?;
                let h2 =
                    reflecting_monodromy_in_chain(p, Aux::Base, 1, &phys, &chain, -th + shift)?;
                let xh = h1.compose(&h2)?;
                let res = rel_residual(&xh, &pe.compose(&xh)?);
                checks.push(Check::new(
                    format!("projection/reflecting-{tag}/theta{j}"),
                    res,
                    tol,
                ));
            }
        }
    }

    // second-level families: T_2(theta_j) T_fused1(theta_j -+ 3 eta/2) absorbed
    // by the second-level projectors
    for (branch, proj, shift, tag) in [
        (Branch::Sym, &l2sym, -1.5 * eta, "level2sym"),
        (Branch::Asym, &l2asym, 1.5 * eta, "level2asym"),
    ] {
        let aux = Aux::Fused(branch, 1);
        let chain = with_chain(aux.space(), v.clone());
        let pe = embed(&proj.operator, &[0, 1], &chain)?;
        for (j, &th) in p.theta.iter().enumerate() {
            let t2 = monodromy_in_chain(p, Aux::Base, 1, &phys, &chain, th)?;
            let tf = monodromy_in_chain(p, aux, 0, &phys, &chain, th + shift)?;
            let x = t2.compose(&tf)?;
            let res = rel_residual(&x, &pe.compose(&x)?);
            checks.push(Check::new(format!("projection/monodromy-{tag}/theta{j}"), res, tol));
        }
        // reflecting analogue, reversed pair ordering [V, V_fused1, phys...]
        let chain_r = with_chain(v.clone(), aux.space());
        let pe_r = embed(&proj.swapped()?.operator, &[0, 1], &chain_r)?;
        for (j, &th) in p.theta.iter().enumerate() {
            let h2 = reflecting_monodromy_in_chain(p, Aux::Base, 0, &phys, &chain_r, -th)?;
            let hf = reflecting_monodromy_in_chain(p, aux, 1, &phys, &chain_r, -th + shift)?;
            let x = h2.compose(&hf)?;
            let res = rel_residual(&x, &pe_r.compose(&x)?);
            checks.push(Check::new(
                format!("projection/reflecting-{tag}/theta{j}"),
                res,
                tol,
            ));
        }
    }

    // generic-u right absorption: X P = P X P
    {
        let chain = with_chain(v.clone(), v.clone());
        let u = 0.311 * eta + C64::new(0.157, 0.233);
        let t1 = monodromy_in_chain(p, Aux::Base, 0, &phys, &chain, u)?;
        let t2 = monodromy_in_chain(p, Aux::Base, 1, &phys, &chain, u + eta)?;
        let x = t1.compose(&t2)?;
        let pe = embed(&plus.operator, &[0, 1], &chain)?;
        let res = rel_residual(&x.compose(&pe)?, &pe.compose(&x)?.compose(&pe)?);
        checks.push(Check::new("projection/right-absorption-monodromy", res, tol));
        let h1 = reflecting_monodromy_in_chain(p, Aux::Base, 0, &phys, &chain, u)?;
        let h2 = reflecting_monodromy_in_chain(p, Aux::Base, 1, &phys, &chain, u + eta)?;
        let xh = h1.compose(&h2)?;
        let res = rel_residual(&xh.compose(&pe)?, &pe.compose(&xh)?.compose(&pe)?);
        checks.push(Check::new("projection/right-absorption-reflecting", res, tol));
    }

    // sandwich product relations: compressed P X P equals the fused
    // monodromy with its scalar prefactor
    let u = -0.277 * eta + C64::new(0.341, -0.229);
    let fused_chain = |aux: Aux| -> Vec<GradedSpace> {
        let mut chain = vec![aux.space()];
        chain.extend(std::iter::repeat(v.clone()).take(p.n));
        chain
    };
    let compress_pair =
        |proj: &crate::fusion::Projector, x: &GradedOperator| -> Result<GradedOperator> {
            let rest = GradedSpace::tensor_chain(&vec![v.clone(); p.n])?;
            let iso = super_tensor(&proj.isometry, &GradedOperator::identity(&rest));
            iso.transpose().compose(x)?.compose(&iso)
        };

    // level-1 sandwiches of the plain monodromy
    {
        let chain = with_chain(v.clone(), v.clone());
        for (proj, shift, half_shift, aux_out, tag) in [
            (&plus, eta, 0.5 * eta, Aux::Fused(Branch::Sym, 1), "sym1"),
            (&minus, -eta, -0.5 * eta, Aux::Fused(Branch::Asym, 1), "asym1"),
        ] {
            let t1 = monodromy_in_chain(p, Aux::Base, 0, &phys, &chain, u)?;
            let t2 = monodromy_in_chain(p, Aux::Base, 1, &phys, &chain, u + shift)?;
            let pe = embed(&proj.operator, &[0, 1], &chain)?;
            let x = product(&[&pe, &t1, &t2, &pe])?;
            let lhs = compress_pair(proj, &x)?;
            let rhs_chain = fused_chain(aux_out);
            let rhs_phys: Vec<usize> = (1..=p.n).collect();
            let rhs = monodromy_in_chain(p, aux_out, 0, &rhs_phys, &rhs_chain, u + half_shift)?
                .scale(a_scalar(p, u + shift));
            checks.push(Check::new(
                format!("projection/sandwich-monodromy-{tag}"),
                rel_residual(&lhs, &rhs),
                tol,
            ));
        }
    }
    // level-2 sandwiches
    for (branch, proj, inner_shift, outer_shift, tag) in [
        (Branch::Sym, &l2sym, eta, -0.5 * eta, "tilde-sym"),
        (Branch::Asym, &l2asym, -eta, 0.5 * eta, "tilde-asym"),
    ] {
        let aux1 = Aux::Fused(branch, 1);
        let aux2 = Aux::Fused(branch, 2);
        let chain = with_chain(aux1.space(), v.clone());
        let t2 = monodromy_in_chain(p, Aux::Base, 1, &phys, &chain, u + inner_shift)?;
        let tf = monodromy_in_chain(p, aux1, 0, &phys, &chain, u + outer_shift)?;
        let pe = embed(&proj.operator, &[0, 1], &chain)?;
        let x = product(&[&pe, &t2, &tf, &pe])?;
        let lhs = compress_pair(proj, &x)?;
        let rhs_chain = fused_chain(aux2);
        let rhs_phys: Vec<usize> = (1..=p.n).collect();
        let rhs = monodromy_in_chain(p, aux2, 0, &rhs_phys, &rhs_chain, u)?
            .scale(a_scalar(p, u));
        checks.push(Check::new(
            format!("projection/sandwich-monodromy-{tag}"),
            rel_residual(&lhs, &rhs),
            tol,
        ));
    }

    // reflecting sandwiches with prod(u + theta_l +- shift) prefactors
    {
        let chain = with_chain(v.clone(), v.clone());
        let prefactor = |shift: C64| -> C64 {
            p.theta
                .iter()
                .fold(C64::new(1.0, 0.0), |acc, t| acc * (u + t + shift))
        };
        for (proj, shift, half_shift, aux_out, tag) in [
            (&plus, eta, 0.5 * eta, Aux::Fused(Branch::Sym, 1), "sym1"),
            (&minus, -eta, -0.5 * eta, Aux::Fused(Branch::Asym, 1), "asym1"),
        ] {
            let h1 = reflecting_monodromy_in_chain(p, Aux::Base, 0, &phys, &chain, u)?;
            let h2 = reflecting_monodromy_in_chain(p, Aux::Base, 1, &phys, &chain, u + shift)?;
            let pe = embed(&proj.operator, &[0, 1], &chain)?;
            let x = product(&[&pe, &h1, &h2, &pe])?;
            let lhs = compress_pair(proj, &x)?;
            let rhs_chain = fused_chain(aux_out);
            let rhs_phys: Vec<usize> = (1..=p.n).collect();
            let rhs =
                reflecting_monodromy_in_chain(p, aux_out, 0, &rhs_phys, &rhs_chain, u + half_shift)?
                    .scale(prefactor(shift));
            checks.push(Check::new(
                format!("projection/sandwich-reflecting-{tag}"),
                rel_residual(&lhs, &rhs),
                tol,
            ));
        }
        // second level, reversed pair ordering [V, V_fused1, phys...]
        for (branch, proj, inner_shift, outer_shift, tag) in [
            (Branch::Sym, &l2sym, eta, -0.5 * eta, "tilde-sym"),
            (Branch::Asym, &l2asym, -eta, 0.5 * eta, "tilde-asym"),
        ] {
            let aux1 = Aux::Fused(branch, 1);
            let aux2 = Aux::Fused(branch, 2);
            let chain_r = with_chain(v.clone(), aux1.space());
            let proj_sw = proj.swapped()?;
            let h2 = reflecting_monodromy_in_chain(p, Aux::Base, 0, &phys, &chain_r, u + inner_shift)?;
            let hf = reflecting_monodromy_in_chain(p, aux1, 1, &phys, &chain_r, u + outer_shift)?;
            let pe = embed(&proj_sw.operator, &[0, 1], &chain_r)?;
            let x = product(&[&pe, &h2, &hf, &pe])?;
            let rest = GradedSpace::tensor_chain(&vec![v.clone(); p.n])?;
            let iso = super_tensor(&proj_sw.isometry, &GradedOperator::identity(&rest));
            let lhs = iso.transpose().compose(&x)?.compose(&iso)?;
            let rhs_chain = fused_chain(aux2);
            let rhs_phys: Vec<usize> = (1..=p.n).collect();
            let rhs = reflecting_monodromy_in_chain(p, aux2, 0, &rhs_phys, &rhs_chain, u)?
                .scale(prefactor(C64::new(0.0, 0.0)));
            checks.push(Check::new(
                format!("projection/sandwich-reflecting-{tag}"),
                rel_residual(&lhs, &rhs),
                tol,
            ));
        }
    }

    Ok(checks)
}

// ---------------------------------------------------------------------------
// verification: operator product identities
// ---------------------------------------------------------------------------

/// Transfer-matrix product identities evaluated at the inhomogeneities, as
/// full operator equalities.
pub fn verify_operator_identities(
    p: &ModelParameters,
    g: &GrassmannContext,
    tol: f64,
) -> Result<Vec<Check>> {
    p.validate_generic()?;
    match p.boundary {
        Boundary::Periodic => verify_operator_identities_periodic(p, g, tol),
        Boundary::Open => verify_operator_identities_open(p, g, tol),
    }
}

fn verify_operator_identities_periodic(
    p: &ModelParameters,
    g: &GrassmannContext,
    tol: f64,
) -> Result<Vec<Check>> {
    let eta = p.eta;
    let half = 0.5 * eta;
    let mut checks = Vec::new();
    let t = |level: Level, u: C64| transfer(p, g, level, u);
    for (j, &th) in p.theta.iter().enumerate() {
        // t(th) t(th+eta) = a(th+eta) t1(th+eta/2)
        let lhs = t(Level::Base, th)?.compose(&t(Level::Base, th + eta)?)?;
        let rhs = t(Level::Sym1, th + half)?.scale(a_scalar(p, th + eta));
        checks.push(Check::new(
            format!("operator-identity/periodic-1/theta{j}"),
            rel_residual(&lhs, &rhs),
            tol,
        ));
        // t(th-eta) t(th) = a(th-eta) t2(th-eta/2)
        let lhs = t(Level::Base, th - eta)?.compose(&t(Level::Base, th)?)?;
        let rhs = t(Level::Asym1, th - half)?.scale(a_scalar(p, th - eta));
        checks.push(Check::new(
            format!("operator-identity/periodic-2/theta{j}"),
            rel_residual(&lhs, &rhs),
            tol,
        ));
        // t1(th-3eta/2) t(th) = a(th-eta) ttilde(th-eta)
        let lhs = t(Level::Sym1, th - 1.5 * eta)?.compose(&t(Level::Base, th)?)?;
        let rhs = t(Level::Tilde, th - eta)?.scale(a_scalar(p, th - eta));
        checks.push(Check::new(
            format!("operator-identity/periodic-3/theta{j}"),
            rel_residual(&lhs, &rhs),
            tol,
        ));
        // t2(th+3eta/2) t(th) = a(th+eta) ttilde(th+eta)
        let lhs = t(Level::Asym1, th + 1.5 * eta)?.compose(&t(Level::Base, th)?)?;
        let rhs = t(Level::Tilde, th + eta)?.scale(a_scalar(p, th + eta));
        checks.push(Check::new(
            format!("operator-identity/periodic-4/theta{j}"),
            rel_residual(&lhs, &rhs),
            tol,
        ));
    }
    Ok(checks)
}

fn verify_operator_identities_open(
    p: &ModelParameters,
    g: &GrassmannContext,
    tol: f64,
) -> Result<Vec<Check>> {
    let eta = p.eta;
    let half = 0.5 * eta;
    let mut checks = Vec::new();
    let t = |level: Level, u: C64| transfer(p, g, level, u);
    for (j, &th) in p.theta.iter().enumerate() {
        for (s, x) in [(1.0, th), (-1.0, -th)] {
            let sign_tag = if s > 0.0 { "p" } else { "m" };
            // t(x) t(x+eta) = -(1/4) x(x+eta)/(x+eta/2)^2 alpha(x) t1(x+eta/2)
            let lhs = t(Level::Base, x)?.compose(&t(Level::Base, x + eta)?)?;
            let pref = -0.25 * (x * (x + eta)) / ((x + half) * (x + half)) * alpha_scalar(p, x);
            let rhs = t(Level::Sym1, x + half)?.scale(pref);
            checks.push(Check::new(
                format!("operator-identity/open-1{sign_tag}/theta{j}"),
                rel_residual(&lhs, &rhs),
                tol,
            ));
            // t(x-eta) t(x) = -(1/4) x(x-eta)/(x-eta/2)^2 alpha(-x) t2(x-eta/2)
            let lhs = t(Level::Base, x - eta)?.compose(&t(Level::Base, x)?)?;
            let pref = -0.25 * (x * (x - eta)) / ((x - half) * (x - half)) * alpha_scalar(p, -x);
            let rhs = t(Level::Asym1, x - half)?.scale(pref);
            checks.push(Check::new(
                format!("operator-identity/open-2{sign_tag}/theta{j}"),
                rel_residual(&lhs, &rhs),
                tol,
            ));
            // t1(x-3eta/2) t(x) = - x(x-3eta/2)/[(x-eta/2)(x-eta)] alpha(-x) ttilde(x-eta)
            let lhs = t(Level::Sym1, x - 1.5 * eta)?.compose(&t(Level::Base, x)?)?;
            let pref = -(x * (x - 1.5 * eta)) / ((x - half) * (x - eta)) * alpha_scalar(p, -x);
            let rhs = t(Level::Tilde, x - eta)?.scale(pref);
            checks.push(Check::new(
                format!("operator-identity/open-3{sign_tag}/theta{j}"),
                rel_residual(&lhs, &rhs),
                tol,
            ));
            // t2(x+3eta/2) t(x) = - x(x+3eta/2)/[(x+eta/2)(x+eta)] alpha(x) ttilde(x+eta)
            let lhs = t(Level::Asym1, x + 1.5 * eta)?.compose(&t(Level::Base, x)?)?;
            let pref = -(x * (x + 1.5 * eta)) / ((x + half) * (x + eta)) * alpha_scalar(p, x);
            let rhs = t(Level::Tilde, x + eta)?.scale(pref);
            checks.push(Check::new(
                format!("operator-identity/open-4{sign_tag}/theta{j}"),
                rel_residual(&lhs, &rhs),
                tol,
            ));
        }
    }
    Ok(checks)
}

// ---------------------------------------------------------------------------
// verification: commutativity, tilde equality, degrees, special points,
// asymptotics, Grassmann independence
// ---------------------------------------------------------------------------

/// Mutual commutativity of the transfer family across levels and spectral
/// points, plus the equality of the two second-level routes.
pub fn verify_commutativity(
    p: &ModelParameters,
    g: &GrassmannContext,
    tol: f64,
) -> Result<Vec<Check>> {
    let mut checks = Vec::new();
    let u = 0.437 * p.eta + C64::new(0.213, 0.171);
    let w = -0.289 * p.eta + C64::new(-0.117, 0.307);
    let ops_u: Vec<(Level, GradedOperator)> = Level::ALL
        .iter()
        .map(|&l| transfer(p, g, l, u).map(|t| (l, t)))
        .collect::<Result<_>>()?;
    let ops_w: Vec<(Level, GradedOperator)> = Level::ALL
        .iter()
        .map(|&l| transfer(p, g, l, w).map(|t| (l, t)))
        .collect::<Result<_>>()?;
    for (la, a) in &ops_u {
        for (lb, b) in &ops_w {
            let comm = a.compose(b)?.sub(&b.compose(a)?)?;
            let scale = a.frobenius_norm() * b.frobenius_norm();
            checks.push(Check::new(
                format!("commutativity/{}-{}", la.name(), lb.name()),
                comm.frobenius_norm() / scale.max(1e-30),
                tol,
            ));
        }
    }
    // the two second-level fusion routes give the same transfer matrix
    for x in [u, w] {
        let sym = transfer_tilde_branch(p, g, Branch::Sym, x)?;
        let asym = transfer_tilde_branch(p, g, Branch::Asym, x)?;
        checks.push(Check::new(
            "commutativity/tilde-branch-equality",
            rel_residual(&sym, &asym),
            tol,
        ));
    }
    Ok(checks)
}

/// Second-level transfer matrix built through one specific branch.
pub fn transfer_tilde_branch(
    p: &ModelParameters,
    g: &GrassmannContext,
    branch: Branch,
    u: C64,
) -> Result<GradedOperator> {
    let aux = Aux::Fused(branch, 2);
    match p.boundary {
        Boundary::Periodic => {
            let chain = aux_phys_chain(p, aux);
            let t = monodromy(p, aux, u)?;
            partial_super_trace(&t, &chain, &[0])
        }
        Boundary::Open => {
            let mut chain = vec![g.aux_space().clone(), aux.space()];
            chain.extend(std::iter::repeat(GradedSpace::gl11()).take(p.n));
            let phys: Vec<usize> = (2..2 + p.n).collect();
            let kp = embed(&fused_k_extended(branch, 2, KSign::Plus, u, p, g)?, &[0, 1], &chain)?;
            let km = embed(
                &fused_k_extended(branch, 2, KSign::Minus, u, p, g)?,
                &[0, 1],
                &chain,
            )?;
            let t = monodromy_in_chain(p, aux, 1, &phys, &chain, u)?;
            let that = reflecting_monodromy_in_chain(p, aux, 1, &phys, &chain, u)?;
            let full = product(&[&kp, &t, &km, &that])?;
            partial_super_trace(&full, &chain, &[1])
        }
    }
}

/// Zeros of the fused-K sandwich normalizations, used to keep interpolation
/// nodes away from points where the raw construction degenerates.
fn k_normalization_zeros(p: &ModelParameters) -> Vec<C64> {
    let eta = p.eta;
    let half = 0.5 * eta;
    let mut zeros = vec![
        C64::new(0.0, 0.0),
        half,
        -half,
        eta,
        -eta,
        1.5 * eta,
        -1.5 * eta,
        2.0 * eta,
        -2.0 * eta,
    ];
    let mut push_inv = |a: C64, shifts: &[C64]| {
        if a.norm() > 1e-12 {
            let inv = C64::new(1.0, 0.0) / a;
            for &s in shifts {
                zeros.push(inv + s);
                zeros.push(-inv + s);
            }
        }
    };
    let shifts = [
        C64::new(0.0, 0.0),
        half,
        -half,
        eta,
        -eta,
        1.5 * eta,
        -1.5 * eta,
    ];
    push_inv(p.a_minus, &shifts);
    push_inv(p.a_plus, &shifts);
    zeros
}

/// Interpolate a transfer level as an operator-valued polynomial; returns
/// the monomial coefficients up to `degree_bound` together with the common
/// shift applied to the default integer nodes (recorded in reports).
pub fn transfer_coefficients(
    p: &ModelParameters,
    g: &GrassmannContext,
    level: Level,
    degree_bound: usize,
) -> Result<(Vec<GradedOperator>, C64)> {
    let mut avoid = k_normalization_zeros(p);
    avoid.extend(p.theta.iter().copied());
    let (nodes, shift) = choose_nodes(degree_bound + 1, &avoid);
    let values: Vec<GradedOperator> = nodes
        .iter()
        .map(|&u| transfer(p, g, level, u))
        .collect::<Result<_>>()?;
    let coeffs = interpolate_operator(&PolySamples {
        nodes,
        values,
        degree_bound,
    })?;
    Ok((coeffs, shift))
}

/// Degree checks: periodic transfer matrices are polynomials of exact degree
/// N-1 (the u^N slot vanishes).
pub fn verify_degree(p: &ModelParameters, g: &GrassmannContext, tol: f64) -> Result<Vec<Check>> {
    if p.boundary != Boundary::Periodic {
        return Err(Error::Invalid("degree check applies to periodic chains".into()));
    }
    let mut checks = Vec::new();
    for level in Level::ALL {
        let (coeffs, shift) = transfer_coefficients(p, g, level, p.n)?;
        let scale = coeffs
            .iter()
            .map(|c| c.frobenius_norm())
            .fold(0.0f64, f64::max);
        checks.push(
            Check::new(
                format!("degree/periodic-{}", level.name()),
                vanish_residual(&coeffs[p.n], scale),
                tol,
            )
            .with_note(format!("node shift {}", format_complex(shift))),
        );
    }
    Ok(checks)
}

/// Special-point evaluations of the open transfer matrices.
pub fn verify_special_points(
    p: &ModelParameters,
    g: &GrassmannContext,
    tol: f64,
) -> Result<Vec<Check>> {
    if p.boundary != Boundary::Open {
        return Err(Error::Invalid("special points apply to open chains".into()));
    }
    let eta = p.eta;
    let half = 0.5 * eta;
    let zero = C64::new(0.0, 0.0);
    let mut checks = Vec::new();
    // scale for the "vanishes at 0" checks: the transfer matrix at a generic
    // point
    let scale = transfer(p, g, Level::Base, 0.379 * eta + C64::new(0.143, 0.201))?.frobenius_norm();
    for level in Level::ALL {
        let t0 = transfer(p, g, level, zero)?;
        checks.push(Check::new(
            format!("special-point/{}-at-0", level.name()),
            vanish_residual(&t0, scale),
            tol,
        ));
    }
    let t_base = |u: C64| transfer(p, g, Level::Base, u);
    let pairs: [(&str, GradedOperator, GradedOperator); 5] = [
        (
            "t1(-eta/2)=-2t(-eta)",
            transfer(p, g, Level::Sym1, -half)?,
            t_base(-eta)?.scale(C64::new(-2.0, 0.0)),
        ),
        (
            "t1(eta/2)=-2t(eta)",
            transfer(p, g, Level::Sym1, half)?,
            t_base(eta)?.scale(C64::new(-2.0, 0.0)),
        ),
        (
            "t2(-eta/2)=2t(-eta)",
            transfer(p, g, Level::Asym1, -half)?,
            t_base(-eta)?.scale(C64::new(2.0, 0.0)),
        ),
        (
            "t2(eta/2)=2t(eta)",
            transfer(p, g, Level::Asym1, half)?,
            t_base(eta)?.scale(C64::new(2.0, 0.0)),
        ),
        (
            "ttilde(eta)=(2/3)t1(3eta/2)",
            transfer(p, g, Level::Tilde, eta)?,
            transfer(p, g, Level::Sym1, 1.5 * eta)?.scale(C64::new(2.0 / 3.0, 0.0)),
        ),
    ];
    for (name, lhs, rhs) in pairs {
        checks.push(Check::new(
            format!("special-point/{name}"),
            rel_residual(&lhs, &rhs),
            tol,
        ));
    }
    Ok(checks)
}

/// Leading coefficient of the open transfer family.
///
/// The u^{2N+2} coefficient vanishes and the u^{2N+1} coefficient is a
/// scalar multiple of the identity: (2, -8, 8, -8) kappa for
/// (t, t1, t2, ttilde), with kappa = a_+ + a_- + N a_+ a_- eta. At N = 1
/// this matches the printed asymptotic constant; for N > 1 the printed
/// constant omits the factor N, which both the transfer-matrix expansion
/// and the T-Q parameterization require.
pub fn verify_asymptotics(
    p: &ModelParameters,
    g: &GrassmannContext,
    tol: f64,
) -> Result<Vec<Check>> {
    if p.boundary != Boundary::Open {
        return Err(Error::Invalid("asymptotics apply to open chains".into()));
    }
    let kappa = open_kappa(p);
    let mut checks = Vec::new();
    let deg = 2 * p.n + 2;
    for (level, factor) in [
        (Level::Base, 2.0),
        (Level::Sym1, -8.0),
        (Level::Asym1, 8.0),
        (Level::Tilde, -8.0),
    ] {
        let (coeffs, shift) = transfer_coefficients(p, g, level, deg)?;
        let scale = coeffs
            .iter()
            .map(|c| c.frobenius_norm())
            .fold(0.0f64, f64::max);
        checks.push(
            Check::new(
                format!("asymptotics/{}-top-vanishes", level.name()),
                vanish_residual(&coeffs[deg], scale),
                tol,
            )
            .with_note(format!("node shift {}", format_complex(shift))),
        );
        let expect = GradedOperator::identity(coeffs[deg - 1].domain()).scale(factor * kappa);
        checks.push(Check::new(
            format!("asymptotics/{}-leading", level.name()),
            rel_residual(&coeffs[deg - 1], &expect),
            tol,
        ));
    }
    Ok(checks)
}

/// kappa = a_+ + a_- + N a_+ a_- eta, the leading asymptotic constant of the
/// open transfer matrix.
pub fn open_kappa(p: &ModelParameters) -> C64 {
    p.a_plus + p.a_minus + (p.n as f64) * p.a_plus * p.a_minus * p.eta
}

/// The body of the open transfer matrix must not depend on the Grassmann
/// coefficients.
pub fn verify_grassmann_independence(
    p: &ModelParameters,
    g: &GrassmannContext,
    draws: &[(C64, C64, C64, C64)],
    tol: f64,
) -> Result<Vec<Check>> {
    if p.boundary != Boundary::Open {
        return Err(Error::Invalid(
            "Grassmann independence applies to open chains".into(),
        ));
    }
    let u = 0.291 * p.eta + C64::new(0.187, -0.233);
    let reference = transfer_body(p, g, Level::Base, u)?;
    let scale = reference.max_abs();
    let mut checks = Vec::new();
    for (i, &(b_minus, b_plus, f_minus, f_plus)) in draws.iter().enumerate() {
        let mut q = p.clone();
        q.b_minus = b_minus;
        q.b_plus = b_plus;
        q.f_minus = f_minus;
        q.f_plus = f_plus;
        let body = transfer_body(&q, g, Level::Base, u)?;
        let diff = body.sub(&reference)?.max_abs();
        checks.push(Check::new(
            format!("grassmann-independence/draw{i}"),
            diff / scale.max(1e-30),
            tol,
        ));
    }
    Ok(checks)
}

// ---------------------------------------------------------------------------
// verification: Hamiltonians
// ---------------------------------------------------------------------------

/// Consistency of the directly constructed Hamiltonians with derivatives of
/// the transfer matrix: log-derivative for periodic chains, second
/// derivative for open ones.
pub fn verify_hamiltonian_consistency(
    p: &ModelParameters,
    g: &GrassmannContext,
    tol: f64,
) -> Result<Vec<Check>> {
    require_homogeneous(p)?;
    let eta = p.eta;
    let direct = hamiltonian(p, g)?;
    match p.boundary {
        Boundary::Periodic => {
            let h = 1e-5 * eta;
            let t_plus = transfer(p, g, Level::Base, h)?;
            let t_minus = transfer(p, g, Level::Base, -h)?;
            let t0 = transfer(p, g, Level::Base, C64::new(0.0, 0.0))?;
            let tprime = t_plus.sub(&t_minus)?.scale(C64::new(0.5, 0.0) / h);
            // solve t0 X = t', then H = eta X (the family commutes, so the
            // order of the log-derivative does not matter)
            let x = lu_factor(t0.entries())?.solve(tprime.entries())?;
            let fd = GradedOperator::endo(t0.domain().clone(), x)?.scale(eta);
            Ok(vec![Check::new(
                "hamiltonian/periodic-log-derivative",
                rel_residual(&fd, &direct),
                tol,
            )])
        }
        Boundary::Open => {
            let h = 1e-4 * eta;
            let t_plus = transfer(p, g, Level::Base, h)?;
            let t_minus = transfer(p, g, Level::Base, -h)?;
            let t0 = transfer(p, g, Level::Base, C64::new(0.0, 0.0))?;
            let second = t_plus
                .add(&t_minus)?
                .sub(&t0.scale(C64::new(2.0, 0.0)))?
                .scale(C64::new(1.0, 0.0) / (h * h));
            let one = C64::new(1.0, 0.0);
            let pref = one / (8.0 * eta.powu(p.n as u32) * (one + p.a_plus * eta));
            let fd = second.scale(pref);
            Ok(vec![Check::new(
                "hamiltonian/open-second-derivative",
                rel_residual(&fd, &direct),
                tol,
            )])
        }
    }
}

// ---------------------------------------------------------------------------
// verification: RTT relations
// ---------------------------------------------------------------------------

/// Graded RTT relations for the monodromy and reflecting monodromy, with the
/// auxiliary pair (fused-or-base, base).
pub fn verify_rtt(p: &ModelParameters, tol: f64) -> Result<Vec<Check>> {
    let v = GradedSpace::gl11();
    let eta = p.eta;
    let u = 0.357 * eta + C64::new(0.119, 0.241);
    let w = -0.243 * eta + C64::new(0.313, -0.139);
    let mut checks = Vec::new();
    let variants: [(Aux, &str); 4] = [
        (Aux::Base, "base"),
        (Aux::Fused(Branch::Sym, 1), "sym1"),
        (Aux::Fused(Branch::Asym, 1), "asym1"),
        (Aux::Fused(Branch::Sym, 2), "tilde"),
    ];
    for (aux, tag) in variants {
        let mut chain = vec![aux.space(), v.clone()];
        chain.extend(std::iter::repeat(v.clone()).take(p.n));
        let phys: Vec<usize> = (2..2 + p.n).collect();
        let r = embed(&r_aux_phys(aux, u - w, eta)?, &[0, 1], &chain)?;
        let ta = monodromy_in_chain(p, aux, 0, &phys, &chain, u)?;
        let tb = monodromy_in_chain(p, Aux::Base, 1, &phys, &chain, w)?;
        let lhs = product(&[&r, &ta, &tb])?;
        let rhs = product(&[&tb, &ta, &r])?;
        checks.push(Check::new(
            format!("rtt/monodromy-{tag}"),
            rel_residual(&lhs, &rhs),
            tol,
        ));
        let ha = reflecting_monodromy_in_chain(p, aux, 0, &phys, &chain, u)?;
        let hb = reflecting_monodromy_in_chain(p, Aux::Base, 1, &phys, &chain, w)?;
        let lhs = product(&[&r, &ha, &hb])?;
        let rhs = product(&[&hb, &ha, &r])?;
        checks.push(Check::new(
            format!("rtt/reflecting-{tag}"),
            rel_residual(&lhs, &rhs),
            tol,
        ));
    }
    Ok(checks)
}

// ---------------------------------------------------------------------------
// verification: fused two-transfer products
// ---------------------------------------------------------------------------

/// The supertraced two-transfer products behind the operator identities.
/// The base product carries the known crossing-unitarity scalar; the two
/// fused products have undetermined printed normalizations, so the scalar is
/// fitted and reported.
pub fn verify_fused_products(
    p: &ModelParameters,
    g: &GrassmannContext,
    tol: f64,
) -> Result<Vec<Check>> {
    if p.boundary != Boundary::Open {
        return Err(Error::Invalid("fused products apply to open chains".into()));
    }
    let v = GradedSpace::gl11();
    let eta = p.eta;
    let u = 0.273 * eta + C64::new(0.201, 0.149);
    let mut checks = Vec::new();

    // base-base: t(u) t(u+eta) equals the double-aux supertrace divided by
    // the crossing-unitarity scalar -(2u+eta)^2
    {
        let mut chain = vec![g.aux_space().clone(), v.clone(), v.clone()];
        chain.extend(std::iter::repeat(v.clone()).take(p.n));
        let phys: Vec<usize> = (3..3 + p.n).collect();
        let kp = |x: C64, slot: usize| -> Result<GradedOperator> {
            embed(&k_plus(x, p, g)?, &[0, slot], &chain)
        };
        let km = |x: C64, slot: usize| -> Result<GradedOperator> {
            embed(&k_minus(x, p, g)?, &[0, slot], &chain)
        };
        let big = product(&[
            &kp(u + eta, 2)?,
            &embed(&r_matrix(-2.0 * u - eta, eta), &[1, 2], &chain)?,
            &kp(u, 1)?,
            &monodromy_in_chain(p, Aux::Base, 1, &phys, &chain, u)?,
            &monodromy_in_chain(p, Aux::Base, 2, &phys, &chain, u + eta)?,
            &km(u, 1)?,
            &embed(&r_matrix(2.0 * u + eta, eta), &[2, 1], &chain)?,
            &km(u + eta, 2)?,
            &reflecting_monodromy_in_chain(p, Aux::Base, 1, &phys, &chain, u)?,
            &reflecting_monodromy_in_chain(p, Aux::Base, 2, &phys, &chain, u + eta)?,
        ])?;
        let traced = partial_super_trace(&big, &chain, &[1, 2])?;
        let rho2 = -(2.0 * u + eta) * (2.0 * u + eta);
        let lhs = transfer(p, g, Level::Base, u)?
            .compose(&transfer(p, g, Level::Base, u + eta)?)?;
        checks.push(Check::new(
            "fused-product/base",
            rel_residual(&lhs, &traced.scale(C64::new(1.0, 0.0) / rho2)),
            tol,
        ));
    }

    // fused-base products with fitted scalars
    for (branch, tag) in [(Branch::Sym, "sym1"), (Branch::Asym, "asym1")] {
        let aux = Aux::Fused(branch, 1);
        let half = 0.5 * eta;
        // evaluation points and levels per branch
        let (tf_arg, tb_arg, level) = match branch {
            Branch::Sym => (u - half, u + eta, Level::Sym1),
            Branch::Asym => (u + half, u - eta, Level::Asym1),
        };
        let mut chain = vec![g.aux_space().clone(), aux.space(), v.clone()];
        chain.extend(std::iter::repeat(v.clone()).take(p.n));
        let phys: Vec<usize> = (3..3 + p.n).collect();
        let r_arg = match branch {
            Branch::Sym => 2.0 * u + half,
            Branch::Asym => 2.0 * u - half,
        };
        let big = product(&[
            &embed(&fused_k_extended(branch, 1, KSign::Plus, tf_arg, p, g)?, &[0, 1], &chain)?,
            &embed(
                &fuse_r(branch, 1, FusedSide::FusedSecond, -r_arg, eta)?,
                &[2, 1],
                &chain,
            )?,
            &embed(&k_plus(tb_arg, p, g)?, &[0, 2], &chain)?,
            &monodromy_in_chain(p, Aux::Base, 2, &phys, &chain, tb_arg)?,
            &monodromy_in_chain(p, aux, 1, &phys, &chain, tf_arg)?,
            &embed(&k_minus(tb_arg, p, g)?, &[0, 2], &chain)?,
            &embed(
                &fuse_r(branch, 1, FusedSide::FusedFirst, r_arg, eta)?,
                &[1, 2],
                &chain,
            )?,
            &embed(&fused_k_extended(branch, 1, KSign::Minus, tf_arg, p, g)?, &[0, 1], &chain)?,
            &reflecting_monodromy_in_chain(p, Aux::Base, 2, &phys, &chain, tb_arg)?,
            &reflecting_monodromy_in_chain(p, aux, 1, &phys, &chain, tf_arg)?,
        ])?;
        let traced = partial_super_trace(&big, &chain, &[1, 2])?;
        let lhs = transfer(p, g, level, tf_arg)?.compose(&transfer(p, g, Level::Base, tb_arg)?)?;
        // fit traced = rho * lhs in the Frobenius inner product
        let mut num = C64::new(0.0, 0.0);
        let mut den = C64::new(0.0, 0.0);
        for (a, b) in lhs.entries().data().iter().zip(traced.entries().data()) {
            num += a.conj() * b;
            den += a.conj() * a;
        }
        let rho = num / den;
        let residual = traced
            .sub(&lhs.scale(rho))?
            .frobenius_norm()
            / traced.frobenius_norm().max(1e-30);
        checks.push(
            Check::new(format!("fused-product/{tag}"), residual, tol).with_note(format!(
                "fitted scalar at 2u{}eta/2: {}",
                if branch == Branch::Sym { "+" } else { "-" },
                format_complex(rho)
            )),
        );
    }
    Ok(checks)
}
