//! Bethe-ansatz spectra: root solvers for the periodic and open Bethe
//! equations, eigenvalue assembly through the T-Q relations, energies, and
//! determinant-based certification that the enumerated states exhaust the
//! transfer-matrix spectrum.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{eval_poly, interpolate_scalar, lu_determinant, PolySamples};
use crate::model::{
    a_scalar, alpha_scalar, grassmann_body, Boundary, GrassmannContext, ModelParameters,
};
use crate::report::{format_complex, Check};
use crate::transfer::{hamiltonian, transfer_body, Level};

// ---------------------------------------------------------------------------
// polynomial helpers
// ---------------------------------------------------------------------------

fn poly_mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        if x.norm_sqr() == 0.0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Monic polynomial with the given roots.
fn poly_from_roots(roots: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(1.0, 0.0)];
    for &r in roots {
        out = poly_mul(&out, &[-r, C64::new(1.0, 0.0)]);
    }
    out
}

/// Coefficients of p(s u + t).
fn poly_affine(p: &[C64], s: C64, t: C64) -> Vec<C64> {
    // Horner in the ring of polynomials
    let mut out: Vec<C64> = vec![C64::new(0.0, 0.0)];
    for &c in p.iter().rev() {
        out = poly_mul(&out, &[t, s]);
        out[0] += c;
    }
    out
}

fn poly_sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    let n = a.len().max(b.len());
    let mut out = vec![C64::new(0.0, 0.0); n];
    for (i, &x) in a.iter().enumerate() {
        out[i] += x;
    }
    for (i, &x) in b.iter().enumerate() {
        out[i] -= x;
    }
    out
}

/// Drop top coefficients that vanish relative to the largest one.
fn poly_trim(mut p: Vec<C64>) -> Vec<C64> {
    let scale = p.iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    while p.len() > 1 && p.last().map(|c| c.norm()).unwrap_or(0.0) <= 1e-12 * scale {
        p.pop();
    }
    p
}

/// Quantized ordering key: stable against last-ulp jitter in computed roots.
fn order_key(z: &C64) -> (i64, i64) {
    ((z.re * 1e9).round() as i64, (z.im * 1e9).round() as i64)
}

fn a_coeffs(p: &ModelParameters) -> Vec<C64> {
    poly_from_roots(&p.theta)
}

fn alpha_coeffs(p: &ModelParameters) -> Vec<C64> {
    let one = C64::new(1.0, 0.0);
    let mut roots = Vec::with_capacity(2 * p.n);
    for &t in &p.theta {
        roots.push(-t - p.eta);
        roots.push(t - p.eta);
    }
    let mut out = poly_from_roots(&roots);
    out = poly_mul(&out, &[one, p.a_minus]);
    out = poly_mul(&out, &[one + p.eta * p.a_plus, p.a_plus]);
    out
}

// ---------------------------------------------------------------------------
// Aberth-Ehrlich simultaneous iteration
// ---------------------------------------------------------------------------

/// All roots of a complex polynomial given by coefficients c_0 + c_1 u + ...,
/// via Aberth-Ehrlich simultaneous iteration. Initial points sit on a circle
/// of radius 1 + max |c_k / c_n|; convergence at 1e-12 step norm, 500-sweep
/// cap.
pub fn aberth_roots(coeffs: &[C64]) -> Result<Vec<C64>> {
    let coeffs = poly_trim(coeffs.to_vec());
    let n = coeffs.len() - 1;
    if n == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[n];
    let monic: Vec<C64> = coeffs.iter().map(|c| c / lead).collect();
    let deriv: Vec<C64> = (1..=n)
        .map(|k| monic[k] * C64::new(k as f64, 0.0))
        .collect();

    let radius = 1.0 + monic[..n].iter().map(|c| c.norm()).fold(0.0f64, f64::max);
    let mut z: Vec<C64> = (0..n)
        .map(|j| {
            let angle = 2.0 * std::f64::consts::PI * (j as f64) / (n as f64) + 0.43;
            radius * C64::new(angle.cos(), angle.sin())
        })
        .collect();

    let max_sweeps = 500;
    for _sweep in 0..max_sweeps {
        let mut max_step = 0.0f64;
        for j in 0..n {
            let pv = eval_poly(&monic, z[j]);
            let dv = eval_poly(&deriv, z[j]);
            if dv.norm() == 0.0 {
                // nudge off a critical point
                z[j] += C64::new(1e-6, 1e-6);
                max_step = f64::MAX;
                continue;
            }
            let w = pv / dv;
            let mut s = C64::new(0.0, 0.0);
            for (k, &zk) in z.iter().enumerate() {
                if k != j {
                    s += C64::new(1.0, 0.0) / (z[j] - zk);
                }
            }
            let denom = C64::new(1.0, 0.0) - w * s;
            let step = if denom.norm() < 1e-14 { w } else { w / denom };
            z[j] -= step;
            max_step = max_step.max(step.norm() / z[j].norm().max(1.0));
        }
        if max_step <= 1e-12 {
            return Ok(z);
        }
    }
    let residual = z
        .iter()
        .map(|&zj| eval_poly(&monic, zj).norm())
        .fold(0.0f64, f64::max);
    Err(Error::RootsNotConverged {
        sweeps: max_sweeps,
        residual,
    })
}

/// A couple of Newton polish steps on the original coefficients.
fn newton_polish(coeffs: &[C64], mut z: C64) -> C64 {
    let n = coeffs.len() - 1;
    let deriv: Vec<C64> = (1..=n)
        .map(|k| coeffs[k] * C64::new(k as f64, 0.0))
        .collect();
    for _ in 0..3 {
        let pv = eval_poly(coeffs, z);
        let dv = eval_poly(&deriv, z);
        if dv.norm() == 0.0 {
            break;
        }
        z -= pv / dv;
    }
    z
}

// ---------------------------------------------------------------------------
// Bethe equations
// ---------------------------------------------------------------------------

/// Finite candidate roots of the periodic Bethe equations: the zeros of
/// a(u - eta) - a(u), a polynomial of degree N-1 (the Bethe equations are
/// per-root for this model).
pub fn solve_bae_periodic(p: &ModelParameters) -> Result<Vec<C64>> {
    let a = a_coeffs(p);
    let shifted = poly_affine(&a, C64::new(1.0, 0.0), -p.eta);
    let d = poly_trim(poly_sub(&shifted, &a));
    let mut roots = aberth_roots(&d)?;
    for r in &mut roots {
        *r = newton_polish(&d, *r);
    }
    roots.sort_by_key(order_key);
    Ok(roots)
}

/// Residual |a(mu-eta)/a(mu) - 1| of a periodic Bethe root.
pub fn bae_residual_periodic(p: &ModelParameters, mu: C64) -> f64 {
    (a_scalar(p, mu - p.eta) / a_scalar(p, mu) - C64::new(1.0, 0.0)).norm()
}

/// Representative finite roots of the open Bethe equations.
///
/// All zeros of alpha(lambda) - alpha(-lambda - eta) are found (degree
/// 2N+1 after the top coefficient cancels), the fixed point lambda = -eta/2
/// is deflated, and the remaining roots are paired under the involution
/// lambda <-> -lambda - eta; one representative per pair is returned, the
/// member with the smaller imaginary part.
pub fn solve_bae_open(p: &ModelParameters) -> Result<Vec<C64>> {
    if p.boundary != Boundary::Open {
        return Err(Error::RequiresOpenBoundary);
    }
    let alpha = alpha_coeffs(p);
    let reflected = poly_affine(&alpha, C64::new(-1.0, 0.0), -p.eta);
    let d = poly_trim(poly_sub(&alpha, &reflected));
    let mut roots = aberth_roots(&d)?;
    for r in &mut roots {
        *r = newton_polish(&d, *r);
    }
    // deflate the always-present trivial fixed point
    let half = -0.5 * p.eta;
    let (idx, dist) = roots
        .iter()
        .enumerate()
        .map(|(i, r)| (i, (r - half).norm()))
        .min_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal))
        .ok_or_else(|| Error::Invalid("open Bethe polynomial has no roots".into()))?;
    if dist > 1e-7 {
        return Err(Error::Invalid(format!(
            "trivial root -eta/2 missing: nearest root is {dist:.3e} away"
        )));
    }
    roots.swap_remove(idx);

    // pair under the involution
    let mut used = vec![false; roots.len()];
    let mut reps = Vec::new();
    for i in 0..roots.len() {
        if used[i] {
            continue;
        }
        used[i] = true;
        let partner_target = -roots[i] - p.eta;
        let mut best: Option<(usize, f64)> = None;
        for (j, r) in roots.iter().enumerate() {
            if used[j] {
                continue;
            }
            let dist = (r - partner_target).norm();
            if best.map(|(_, d)| dist < d).unwrap_or(true) {
                best = Some((j, dist));
            }
        }
        match best {
            Some((j, dist)) if dist <= 1e-7 * roots[i].norm().max(1.0) => {
                used[j] = true;
                let (a, b) = (roots[i], roots[j]);
                let rep = if (a.im, a.re) <= (b.im, b.re) { a } else { b };
                reps.push(rep);
            }
            _ => {
                return Err(Error::UnpairedRoot {
                    root: format_complex(roots[i]),
                });
            }
        }
    }
    let mut roots = aberth_roots(&d)?;
    for r in &mut roots {
        *r = newton_polish(&d, *r);
    }
    reps.sort_by_key(order_key);
    Ok(reps)
}

/// Residual |alpha(lambda)/alpha(-lambda-eta) - 1| of an open Bethe root.
pub fn bae_residual_open(p: &ModelParameters, lambda: C64) -> f64 {
    (alpha_scalar(p, lambda) / alpha_scalar(p, -lambda - p.eta) - C64::new(1.0, 0.0)).norm()
}

// ---------------------------------------------------------------------------
// states
// ---------------------------------------------------------------------------

/// A chosen multiset of finite Bethe roots; fully determines the eigenvalue
/// function through the T-Q relation.
#[derive(Debug, Clone, PartialEq)]
pub struct BetheRootSet {
    pub kind: Boundary,
    pub finite_roots: Vec<C64>,
    /// Periodic chains admit a root at infinity, which contributes the
    /// factor 1 to every Q-ratio.
    pub has_infinite_root: bool,
    pub m: usize,
}

impl BetheRootSet {
    pub fn new(kind: Boundary, mut finite_roots: Vec<C64>, has_infinite_root: bool) -> Self {
        finite_roots.sort_by_key(order_key);
        let m = finite_roots.len() + usize::from(has_infinite_root);
        Self {
            kind,
            finite_roots,
            has_infinite_root,
            m,
        }
    }

    /// Canonical sort key: root count, infinite flag, then the root list.
    pub fn sort_key(&self) -> (usize, bool, Vec<(i64, i64)>) {
        let detail = self.finite_roots.iter().map(order_key).collect();
        (self.finite_roots.len(), self.has_infinite_root, detail)
    }
}

/// All Bethe states generated by the candidate roots: every subset of the
/// finite candidates, periodic chains additionally with and without the
/// infinite root. Always 2^N states.
pub fn enumerate_states(p: &ModelParameters, candidates: &[C64]) -> Vec<BetheRootSet> {
    let mut states = Vec::new();
    let n = candidates.len();
    for mask in 0u64..(1 << n) {
        let subset: Vec<C64> = (0..n)
            .filter(|&k| mask & (1 << k) != 0)
            .map(|k| candidates[k])
            .collect();
        match p.boundary {
            Boundary::Periodic => {
                states.push(BetheRootSet::new(p.boundary, subset.clone(), false));
                states.push(BetheRootSet::new(p.boundary, subset, true));
            }
            Boundary::Open => {
                states.push(BetheRootSet::new(p.boundary, subset, false));
            }
        }
    }
    states.sort_by_key(|s| s.sort_key());
    states
}

// ---------------------------------------------------------------------------
// T-Q relations
// ---------------------------------------------------------------------------

fn guard_distance(name: &str, at: C64, dist: f64) -> Result<()> {
    if dist < 1e-10 {
        return Err(Error::NearQZero {
            at: format!("{name} at {}", format_complex(at)),
            distance: dist,
        });
    }
    Ok(())
}

/// Eigenvalue of the transfer matrix at the given level, assembled from the
/// T-Q relation for this root set. Evaluation must stay away from the zeros
/// of Q (the poles cancel analytically, not numerically).
pub fn tq_lambda(roots: &BetheRootSet, p: &ModelParameters, level: Level, u: C64) -> Result<C64> {
    let eta = p.eta;
    let one = C64::new(1.0, 0.0);
    match roots.kind {
        Boundary::Periodic => {
            let q = |x: C64| -> C64 {
                roots
                    .finite_roots
                    .iter()
                    .fold(one, |acc, &mu| acc * (x - mu))
            };
            let q_dist = |x: C64| -> f64 {
                roots
                    .finite_roots
                    .iter()
                    .map(|&mu| (x - mu).norm())
                    .fold(f64::INFINITY, f64::min)
            };
            let a = |x: C64| a_scalar(p, x);
            let half = 0.5 * eta;
            match level {
                Level::Base => {
                    guard_distance("Q(u)", u, q_dist(u))?;
                    Ok((a(u) - a(u - eta)) * q(u + eta) / q(u))
                }
                Level::Sym1 => {
                    guard_distance("Q(u-eta/2)", u, q_dist(u - half))?;
                    Ok((a(u - half) - a(u - 1.5 * eta)) * q(u + 1.5 * eta) / q(u - half))
                }
                Level::Asym1 => {
                    guard_distance("Q(u-eta/2)", u, q_dist(u - half))?;
                    Ok((a(u - 1.5 * eta) - a(u - half)) * q(u + 1.5 * eta) / q(u - half))
                }
                Level::Tilde => {
                    guard_distance("Q(u-eta)", u, q_dist(u - eta))?;
                    Ok((a(u - 2.0 * eta) - a(u - eta)) * q(u + 2.0 * eta) / q(u - eta))
                }
            }
        }
        Boundary::Open => {
            let q = |x: C64| -> C64 {
                roots
                    .finite_roots
                    .iter()
                    .fold(one, |acc, &l| acc * (x - l) * (x + l + eta))
            };
            let q_dist = |x: C64| -> f64 {
                roots
                    .finite_roots
                    .iter()
                    .flat_map(|&l| [(x - l).norm(), (x + l + eta).norm()])
                    .fold(f64::INFINITY, f64::min)
            };
            let al = |x: C64| alpha_scalar(p, x);
            let half = 0.5 * eta;
            match level {
                Level::Base => {
                    guard_distance("Q(u)", u, q_dist(u))?;
                    guard_distance("2u+eta", u, (2.0 * u + eta).norm())?;
                    let pref = 2.0 * u / (2.0 * u + eta);
                    Ok(pref * (al(u) - al(-u - eta)) * q(u - eta) / q(u))
                }
                Level::Sym1 | Level::Asym1 => {
                    guard_distance("Q(u+eta/2)", u, q_dist(u + half))?;
                    guard_distance("u+eta", u, (u + eta).norm())?;
                    let bracket = al(u + half) - al(-u - 1.5 * eta);
                    let ratio = q(u - 1.5 * eta) / q(u + half);
                    let pref = 4.0 * u / (u + eta);
                    let sign = if level == Level::Sym1 { -1.0 } else { 1.0 };
                    Ok(sign * pref * bracket * ratio)
                }
                Level::Tilde => {
                    guard_distance("Q(u+eta)", u, q_dist(u + eta))?;
                    guard_distance("2u+3eta", u, (2.0 * u + 3.0 * eta).norm())?;
                    let pref = -8.0 * u / (2.0 * u + 3.0 * eta);
                    Ok(pref * (al(u + eta) - al(-u - 2.0 * eta)) * q(u - 2.0 * eta) / q(u + eta))
                }
            }
        }
    }
}

// ---------------------------------------------------------------------------
// energies
// ---------------------------------------------------------------------------

/// Energy of a Bethe state at the homogeneous point.
pub fn energy(roots: &BetheRootSet, p: &ModelParameters) -> Result<C64> {
    if p.theta.iter().any(|t| t.norm() > 1e-12) {
        return Err(Error::DegenerateParameters(
            "energy formulas hold at the homogeneous point theta = 0".into(),
        ));
    }
    let eta = p.eta;
    let one = C64::new(1.0, 0.0);
    match roots.kind {
        Boundary::Periodic => {
            let mut e = C64::new(-(p.n as f64), 0.0);
            for &mu in &roots.finite_roots {
                let denom = (eta - mu) * mu;
                if denom.norm() < 1e-12 {
                    return Err(Error::Invalid(format!(
                        "Bethe root {} sits on an energy pole",
                        format_complex(mu)
                    )));
                }
                e += eta * eta / denom;
            }
            Ok(e)
        }
        Boundary::Open => {
            let mut sum = C64::new(0.0, 0.0);
            for &l in &roots.finite_roots {
                let denom = l * (l + eta);
                if denom.norm() < 1e-12 {
                    return Err(Error::Invalid(format!(
                        "Bethe root {} sits on an energy pole",
                        format_complex(l)
                    )));
                }
                sum += one / denom;
            }
            let const_term = eta.powi(p.n as i32 - 2)
                * 0.5
                * (C64::new(2.0 * p.n as f64 - 1.0, 0.0) + p.a_minus * eta
                    - one / (one + p.a_plus * eta));
            Ok(eta.powu(p.n as u32) * sum + const_term)
        }
    }
}

// ---------------------------------------------------------------------------
// certification
// ---------------------------------------------------------------------------

/// One fully assembled state of the spectrum.
#[derive(Debug, Clone)]
pub struct SpectralLine {
    pub roots: BetheRootSet,
    pub energy: C64,
}

/// The solved spectrum plus every certification residual.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub lines: Vec<SpectralLine>,
    pub checks: Vec<Check>,
}

/// Pick generic evaluation points away from the given bad set.
fn generic_points(count: usize, scale: C64, avoid: &[C64]) -> Vec<C64> {
    let candidates = [
        C64::new(0.437, 0.219),
        C64::new(-0.351, 0.407),
        C64::new(0.243, -0.533),
        C64::new(0.619, 0.117),
        C64::new(-0.523, -0.281),
        C64::new(0.157, 0.641),
        C64::new(-0.133, -0.457),
        C64::new(0.721, -0.203),
        C64::new(-0.671, 0.313),
        C64::new(0.311, 0.523),
    ];
    let mut out = Vec::new();
    for c in candidates {
        if out.len() == count {
            break;
        }
        let z = c * scale;
        if avoid.iter().all(|&b| (z - b).norm() > 0.12) {
            out.push(z);
        }
    }
    // fallback: march along a line until clear
    let mut k = 1.0;
    while out.len() < count {
        let z = scale * C64::new(0.437 + 0.119 * k, 0.219 - 0.083 * k);
        if avoid.iter().all(|&b| (z - b).norm() > 0.12) {
            out.push(z);
        }
        k += 1.0;
    }
    out
}

/// Hadamard row bound with each row norm floored at the mean row scale, so
/// an exactly-annihilated row of a (near-)diagonal matrix does not collapse
/// the scale together with the determinant.
fn floored_hadamard(m: &crate::linalg::Matrix) -> f64 {
    let dim = m.rows();
    let floor = m.frobenius_norm() / dim as f64;
    let mut prod = 1.0f64;
    for i in 0..dim {
        let s: f64 = (0..dim).map(|j| m[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        prod *= s.max(floor).max(1e-300);
    }
    prod.max(1e-30)
}

/// Solve, enumerate, and certify the full spectrum at the homogeneous point:
/// per-state eigenvalue membership by determinant, completeness through the
/// characteristic polynomial, and the energy cross-check against the
/// Hamiltonian.
pub fn certify_spectrum(
    p: &ModelParameters,
    g: &GrassmannContext,
    membership_tol: f64,
    completeness_tol: f64,
) -> Result<SpectrumResult> {
    match p.boundary {
        Boundary::Periodic => {
            if p.n > 6 {
                return Err(Error::CertificationSize {
                    kind: "periodic",
                    max: 6,
                    n: p.n,
                });
            }
        }
        Boundary::Open => {
            if p.n > 4 {
                return Err(Error::CertificationSize {
                    kind: "open",
                    max: 4,
                    n: p.n,
                });
            }
        }
    }
    let candidates = match p.boundary {
        Boundary::Periodic => solve_bae_periodic(p)?,
        Boundary::Open => solve_bae_open(p)?,
    };
    let mut checks = Vec::new();
    for (k, &r) in candidates.iter().enumerate() {
        let res = match p.boundary {
            Boundary::Periodic => bae_residual_periodic(p, r),
            Boundary::Open => bae_residual_open(p, r),
        };
        checks.push(Check::new(format!("bae-residual/root{k}"), res, 1e-9));
    }
    let states = enumerate_states(p, &candidates);
    let lines: Vec<SpectralLine> = states
        .iter()
        .map(|s| {
            energy(s, p).map(|e| SpectralLine {
                roots: s.clone(),
                energy: e,
            })
        })
        .collect::<Result<_>>()?;

    // evaluation points away from every Q zero and degenerate offset
    let mut avoid: Vec<C64> = candidates.clone();
    if p.boundary == Boundary::Open {
        avoid.extend(candidates.iter().map(|&l| -l - p.eta));
    }
    for m in [-2.0f64, -1.5, -1.0, -0.5, 0.0, 0.5, 1.0, 1.5, 2.0] {
        avoid.push(m * p.eta);
    }
    let eval_points = generic_points(3, p.eta, &avoid);

    let dim = 1usize << p.n;
    for (pi, &u_star) in eval_points.iter().enumerate() {
        let t = transfer_body(p, g, Level::Base, u_star)?;
        // membership: det(t - Lambda_s I) ~ 0, relative to the Hadamard bound
        let lambdas: Vec<C64> = states
            .iter()
            .map(|s| tq_lambda(s, p, Level::Base, u_star))
            .collect::<Result<_>>()?;
        for (si, (s, &lam)) in states.iter().zip(&lambdas).enumerate() {
            let mut m = t.entries().clone();
            for d in 0..dim {
                m[(d, d)] -= lam;
            }
            let det = lu_determinant(&m)?;
            let scale = floored_hadamard(&m);
            checks.push(
                Check::new(
                    format!("membership/point{pi}/state{si}"),
                    det.norm() / scale,
                    membership_tol,
                )
                .with_note(format!("M = {}", s.m)),
            );
        }
        // completeness: characteristic polynomial of t equals prod (x - Lambda_s).
        // The determinant is sampled on a circle at the geometric mean of the
        // eigenvalue magnitudes, which balances the dynamic range of the
        // samples; integer-grid nodes or an enclosing circle would lose the
        // low-order coefficients to roundoff at this degree.
        let radius = (lambdas
            .iter()
            .map(|l| l.norm().max(0.3).ln())
            .sum::<f64>()
            / lambdas.len() as f64)
            .exp();
        let nodes: Vec<C64> = (0..=dim)
            .map(|k| {
                let angle = 2.0 * std::f64::consts::PI * (k as f64) / (dim as f64 + 1.0) + 0.19;
                radius * C64::new(angle.cos(), angle.sin())
            })
            .collect();
        let values: Vec<C64> = nodes
            .iter()
            .map(|&x| {
                let mut m = t.entries().scale(C64::new(-1.0, 0.0));
                for d in 0..dim {
                    m[(d, d)] += x;
                }
                lu_determinant(&m)
            })
            .collect::<Result<_>>()?;
        let char_poly = interpolate_scalar(&PolySamples {
            nodes,
            values,
            degree_bound: dim,
        })?;
        let expect = poly_from_roots(&lambdas);
        let coeff_scale = char_poly
            .iter()
            .chain(&expect)
            .map(|c| c.norm())
            .fold(0.0f64, f64::max);
        let mut worst = 0.0f64;
        for (a, b) in char_poly.iter().zip(&expect) {
            worst = worst.max((a - b).norm() / coeff_scale.max(1e-30));
        }
        checks.push(Check::new(
            format!("completeness/point{pi}"),
            worst,
            completeness_tol,
        ));
    }

    // energy cross-check against the Hamiltonian (undefined at N = 1,
    // where no two-site bulk term exists)
    if p.n < 2 {
        return Ok(SpectrumResult { lines, checks });
    }
    let h_full = hamiltonian(p, g)?;
    let h = match p.boundary {
        Boundary::Periodic => h_full,
        Boundary::Open => grassmann_body(&h_full, g)?,
    };
    for (si, line) in lines.iter().enumerate() {
        let mut m = h.entries().clone();
        for d in 0..dim {
            m[(d, d)] -= line.energy;
        }
        let det = lu_determinant(&m)?;
        let scale = floored_hadamard(&m);
        checks.push(Check::new(
            format!("energy-det/state{si}"),
            det.norm() / scale,
            completeness_tol,
        ));
    }

    Ok(SpectrumResult { lines, checks })
}

// ---------------------------------------------------------------------------
// reference tables
// ---------------------------------------------------------------------------

/// A root column entry: a finite root or the infinite one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RootCell {
    Finite(C64),
    Infinite,
}

/// One spectrum row: the root cells followed by the energy.
#[derive(Debug, Clone)]
pub struct TableRow {
    pub roots: Vec<RootCell>,
    pub energy: C64,
}

impl TableRow {
    fn canonical(mut self) -> Self {
        self.roots.sort_by_key(|c| match c {
            RootCell::Infinite => (i64::MAX, i64::MAX),
            RootCell::Finite(z) => order_key(z),
        });
        self
    }

    fn sort_key(&self) -> (usize, usize, Vec<(i64, i64)>) {
        let finite: Vec<(i64, i64)> = self
            .roots
            .iter()
            .filter_map(|c| match c {
                RootCell::Finite(z) => {
                    Some(((z.re * 1e6).round() as i64, (z.im * 1e6).round() as i64))
                }
                RootCell::Infinite => None,
            })
            .collect();
        let infs = self.roots.len() - finite.len();
        (finite.len(), infs, finite)
    }
}

/// Canonicalize a whole table: sort roots within rows and rows within the
/// table.
pub fn canonicalize_table(rows: Vec<TableRow>) -> Vec<TableRow> {
    let mut rows: Vec<TableRow> = rows.into_iter().map(TableRow::canonical).collect();
    rows.sort_by_key(|r| r.sort_key());
    rows
}

/// Compute the spectrum table for the given parameters.
pub fn computed_table(p: &ModelParameters) -> Result<Vec<TableRow>> {
    let candidates = match p.boundary {
        Boundary::Periodic => solve_bae_periodic(p)?,
        Boundary::Open => solve_bae_open(p)?,
    };
    let states = enumerate_states(p, &candidates);
    let mut rows = Vec::with_capacity(states.len());
    for s in states {
        let e = energy(&s, p)?;
        let mut cells: Vec<RootCell> =
            s.finite_roots.iter().map(|&r| RootCell::Finite(r)).collect();
        if s.has_infinite_root {
            cells.push(RootCell::Infinite);
        }
        rows.push(TableRow {
            roots: cells,
            energy: e,
        });
    }
    Ok(canonicalize_table(rows))
}

/// Which reference spectrum to reproduce.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceTable {
    /// Periodic, N = 3, eta = 1, homogeneous.
    PeriodicN3,
    /// Periodic, N = 4, eta = 1, homogeneous.
    PeriodicN4,
    /// Open, N = 3, eta = 1, a_+ = 0.5, a_- = 1.2, homogeneous.
    OpenN3,
}

impl ReferenceTable {
    pub fn parameters(self) -> ModelParameters {
        match self {
            ReferenceTable::PeriodicN3 => ModelParameters::periodic(3, C64::new(1.0, 0.0)),
            ReferenceTable::PeriodicN4 => ModelParameters::periodic(4, C64::new(1.0, 0.0)),
            ReferenceTable::OpenN3 => ModelParameters::open_reference(3),
        }
    }

    /// The reference rows for this spectrum.
    pub fn rows(self) -> Vec<TableRow> {
        let row = |roots: Vec<RootCell>, e: f64| TableRow {
            roots,
            energy: C64::new(e, 0.0),
        };
        let fin = |re: f64, im: f64| RootCell::Finite(C64::new(re, im));
        match self {
            ReferenceTable::PeriodicN3 => {
                let s3 = 3.0f64.sqrt();
                let mu_p = fin(0.5, s3 / 6.0);
                let mu_m = fin(0.5, -s3 / 6.0);
                canonicalize_table(vec![
                    row(vec![], -3.0),
                    row(vec![RootCell::Infinite], -3.0),
                    row(vec![mu_m], 0.0),
                    row(vec![mu_p], 0.0),
                    row(vec![mu_m, RootCell::Infinite], 0.0),
                    row(vec![mu_p, RootCell::Infinite], 0.0),
                    row(vec![mu_p, mu_m], 3.0),
                    row(vec![mu_p, mu_m, RootCell::Infinite], 3.0),
                ])
            }
            ReferenceTable::PeriodicN4 => {
                let mu_p = fin(0.5, 0.5);
                let mu_m = fin(0.5, -0.5);
                let mu_r = fin(0.5, 0.0);
                let inf = RootCell::Infinite;
                canonicalize_table(vec![
                    row(vec![], -4.0),
                    row(vec![inf], -4.0),
                    row(vec![mu_p], -2.0),
                    row(vec![mu_m], -2.0),
                    row(vec![mu_r], 0.0),
                    row(vec![inf, mu_p], -2.0),
                    row(vec![inf, mu_m], -2.0),
                    row(vec![inf, mu_r], 0.0),
                    row(vec![mu_p, mu_m], 0.0),
                    row(vec![mu_p, mu_r], 2.0),
                    row(vec![mu_m, mu_r], 2.0),
                    row(vec![inf, mu_p, mu_m], 0.0),
                    row(vec![inf, mu_m, mu_r], 2.0),
                    row(vec![inf, mu_p, mu_r], 2.0),
                    row(vec![mu_p, mu_m, mu_r], 4.0),
                    row(vec![inf, mu_p, mu_m, mu_r], 4.0),
                ])
            }
            ReferenceTable::OpenN3 => {
                let la = fin(-0.5, -1.5235);
                let lb = fin(-0.5, -0.2187);
                let lc = fin(-0.5, -0.5565);
                canonicalize_table(vec![
                    row(vec![], 2.7667),
                    row(vec![la], 2.3777),
                    row(vec![lb], -0.5911),
                    row(vec![lc], 0.9800),
                    row(vec![la, lb], -0.9800),
                    row(vec![la, lc], 0.5911),
                    row(vec![lb, lc], -2.3777),
                    row(vec![la, lb, lc], -2.7667),
                ])
            }
        }
    }
}

/// Row-by-row comparison of canonicalized tables. Mismatches name the row,
/// column, expected and computed values.
pub fn compare_tables(got: &[TableRow], expected: &[TableRow], tol: f64) -> Vec<Check> {
    let mut checks = Vec::new();
    if got.len() != expected.len() {
        checks.push(Check::failed(
            "table/row-count",
            tol,
            format!("expected {} rows, got {}", expected.len(), got.len()),
        ));
        return checks;
    }
    for (i, (g, e)) in got.iter().zip(expected).enumerate() {
        if g.roots.len() != e.roots.len() {
            checks.push(Check::failed(
                format!("table/row{i}/shape"),
                tol,
                format!("expected {} roots, got {}", e.roots.len(), g.roots.len()),
            ));
            continue;
        }
        for (col, (gc, ec)) in g.roots.iter().zip(&e.roots).enumerate() {
            match (gc, ec) {
                (RootCell::Infinite, RootCell::Infinite) => {
                    checks.push(Check::new(format!("table/row{i}/root{col}"), 0.0, tol));
                }
                (RootCell::Finite(gz), RootCell::Finite(ez)) => {
                    checks.push(
                        Check::new(format!("table/row{i}/root{col}"), (gz - ez).norm(), tol)
                            .with_note(format!(
                                "expected {}, got {}",
                                format_complex(*ez),
                                format_complex(*gz)
                            )),
                    );
                }
                _ => {
                    checks.push(Check::failed(
                        format!("table/row{i}/root{col}"),
                        tol,
                        "finite/infinite mismatch",
                    ));
                }
            }
        }
        checks.push(
            Check::new(
                format!("table/row{i}/energy"),
                (g.energy - e.energy).norm(),
                tol,
            )
            .with_note(format!(
                "expected {}, got {}",
                format_complex(e.energy),
                format_complex(g.energy)
            )),
        );
    }
    checks
}

/// CSV serialization of a table: root columns then the energy, complex
/// numbers as `re+imi` with 12 significant digits, the infinite root as
/// `inf`, absent roots as empty cells.
pub fn table_to_csv(rows: &[TableRow], n: usize, root_label: &str) -> String {
    let mut out = String::new();
    for k in 1..=n {
        out.push_str(&format!("{root_label}_{k},"));
    }
    out.push_str("energy\n");
    for row in rows {
        for k in 0..n {
            match row.roots.get(k) {
                Some(RootCell::Finite(z)) => out.push_str(&format_complex(*z)),
                Some(RootCell::Infinite) => out.push_str("inf"),
                None => {}
            }
            out.push(',');
        }
        out.push_str(&format_complex(row.energy));
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// continuity of spectra in the inhomogeneities
// ---------------------------------------------------------------------------

/// Richardson continuity check: Bethe roots at theta = eps r converge to the
/// homogeneous roots as eps -> 0, with the linear term cancelled between
/// eps = 1e-2 and eps = 1e-3.
pub fn verify_continuity(
    p: &ModelParameters,
    direction: &[C64],
    tol_scale: f64,
) -> Result<Vec<Check>> {
    let eps1 = 1e-2;
    let eps2 = 1e-3;
    let solve_at = |eps: f64| -> Result<Vec<C64>> {
        let mut q = p.clone();
        q.theta = direction.iter().map(|r| r * eps).collect();
        match p.boundary {
            Boundary::Periodic => solve_bae_periodic(&q),
            Boundary::Open => solve_bae_open(&q),
        }
    };
    let base = solve_at(0.0)?;
    let r1 = solve_at(eps1)?;
    let r2 = solve_at(eps2)?;
    let pair = |set: &[C64], target: C64| -> C64 {
        *set.iter()
            .min_by(|a, b| {
                (*a - target)
                    .norm()
                    .partial_cmp(&(*b - target).norm())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("nonempty root set")
    };
    let mut checks = Vec::new();
    let tol = 10.0 * eps1 * eps1 * tol_scale;
    for (k, &r0) in base.iter().enumerate() {
        let a = pair(&r1, r0);
        let b = pair(&r2, r0);
        let extrap = (eps1 * b - eps2 * a) / (eps1 - eps2);
        checks.push(Check::new(
            format!("continuity/root{k}"),
            (extrap - r0).norm() / r0.norm().max(1.0),
            tol,
        ));
    }
    Ok(checks)
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

    #[test]
    fn aberth_finds_known_roots() {
        // (u - 1)(u - 2i)(u + 3) with roots 1, 2i, -3
        let poly = poly_from_roots(&[cx(1.0, 0.0), cx(0.0, 2.0), cx(-3.0, 0.0)]);
        let mut roots = aberth_roots(&poly).unwrap();
        roots.sort_by(|a, b| a.re.partial_cmp(&b.re).unwrap());
        assert!((roots[0] - cx(-3.0, 0.0)).norm() < 1e-10);
        assert!((roots[1] - cx(0.0, 2.0)).norm() < 1e-10);
        assert!((roots[2] - cx(1.0, 0.0)).norm() < 1e-10);
    }

    #[test]
    fn aberth_handles_constant_and_scaled_polys() {
        assert!(aberth_roots(&[cx(3.0, 0.0)]).unwrap().is_empty());
        let poly: Vec<C64> = poly_from_roots(&[cx(0.5, 0.5)])
            .iter()
            .map(|c| c * cx(0.0, -7.0))
            .collect();
        let roots = aberth_roots(&poly).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - cx(0.5, 0.5)).norm() < 1e-11);
    }

    #[test]
    fn poly_affine_matches_direct_evaluation() {
        let p = vec![cx(1.0, 2.0), cx(-0.5, 0.3), cx(0.0, 1.0), cx(2.0, 0.0)];
        let s = cx(-1.0, 0.0);
        let t = cx(-0.7, 0.2);
        let q = poly_affine(&p, s, t);
        for u in [cx(0.3, 0.1), cx(-1.2, 0.7), cx(2.0, -0.4)] {
            let direct = eval_poly(&p, s * u + t);
            let via = eval_poly(&q, u);
            assert!((direct - via).norm() < 1e-12 * direct.norm().max(1.0));
        }
    }

    #[test]
    fn periodic_bae_closed_form_homogeneous() {
        // mu = eta / (1 - omega), omega^N = 1, omega != 1
        for n in [2usize, 3, 4, 5] {
            let p = ModelParameters::periodic(n, cx(1.0, 0.0));
            let got = solve_bae_periodic(&p).unwrap();
            let mut expect: Vec<C64> = (1..n)
                .map(|k| {
                    let angle = 2.0 * std::f64::consts::PI * (k as f64) / (n as f64);
                    cx(1.0, 0.0) / (cx(1.0, 0.0) - cx(angle.cos(), angle.sin()))
                })
                .collect();
            expect.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
            assert_eq!(got.len(), expect.len());
            for (g, e) in got.iter().zip(&expect) {
                assert!((g - e).norm() < 1e-10, "n={n}: {g} vs {e}");
            }
        }
    }

    #[test]
    fn periodic_bae_reference_values() {
        // N=3: (3 +- i sqrt 3)/6 ; N=4: (1 +- i)/2 and 1/2 ; N=2: 1/2
        let p = ModelParameters::periodic(3, cx(1.0, 0.0));
        let roots = solve_bae_periodic(&p).unwrap();
        let s3 = 3.0f64.sqrt();
        assert!((roots[0] - cx(0.5, -s3 / 6.0)).norm() < 1e-9);
        assert!((roots[1] - cx(0.5, s3 / 6.0)).norm() < 1e-9);

        let p = ModelParameters::periodic(4, cx(1.0, 0.0));
        let roots = solve_bae_periodic(&p).unwrap();
        assert_eq!(roots.len(), 3);
        assert!((roots[0] - cx(0.5, -0.5)).norm() < 1e-9);
        assert!((roots[1] - cx(0.5, 0.0)).norm() < 1e-9);
        assert!((roots[2] - cx(0.5, 0.5)).norm() < 1e-9);

        let p = ModelParameters::periodic(2, cx(1.0, 0.0));
        let roots = solve_bae_periodic(&p).unwrap();
        assert_eq!(roots.len(), 1);
        assert!((roots[0] - cx(0.5, 0.0)).norm() < 1e-9);
    }

    #[test]
    fn open_bae_reference_values() {
        let p = ModelParameters::open_reference(3);
        let reps = solve_bae_open(&p).unwrap();
        assert_eq!(reps.len(), 3);
        // printed to 4 decimals; sorted by imaginary part here
        let expect = [cx(-0.5, -1.5235), cx(-0.5, -0.5565), cx(-0.5, -0.2187)];
        for (g, e) in reps.iter().zip(&expect) {
            assert!((g - e).norm() < 1e-4, "{g} vs {e}");
        }
        for &r in &reps {
            assert!(bae_residual_open(&p, r) < 1e-9);
        }
    }

    #[test]
    fn open_bae_excludes_trivial_root_and_counts_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for n in [2usize, 3] {
            for _ in 0..5 {
                let mut p = ModelParameters::open_reference(n);
                p.a_plus = cx(rng.random::<f64>() + 0.2, rng.random::<f64>() - 0.5);
                p.a_minus = cx(rng.random::<f64>() + 0.2, rng.random::<f64>() - 0.5);
                let reps = solve_bae_open(&p).unwrap();
                assert_eq!(reps.len(), n, "expected N representative pairs");
                for &r in &reps {
                    assert!((r + 0.5 * p.eta).norm() > 1e-6, "trivial root not excluded");
                    assert!(bae_residual_open(&p, r) < 1e-9);
                }
            }
        }
    }

    #[test]
    fn enumerate_counts_states() {
        let p = ModelParameters::periodic(3, cx(1.0, 0.0));
        let candidates = solve_bae_periodic(&p).unwrap();
        let states = enumerate_states(&p, &candidates);
        assert_eq!(states.len(), 8);
        assert!(states.iter().any(|s| s.m == 0)); // the empty set is a state
        assert!(states.iter().all(|s| s.m <= p.n));

        let p = ModelParameters::open_reference(3);
        let candidates = solve_bae_open(&p).unwrap();
        let states = enumerate_states(&p, &candidates);
        assert_eq!(states.len(), 8);
    }

    #[test]
    fn tq_m0_periodic_is_bare_difference() {
        let mut p = ModelParameters::periodic(3, cx(0.9, 0.3));
        p.theta = vec![cx(0.1, 0.0), cx(-0.2, 0.1), cx(0.3, -0.2)];
        let state = BetheRootSet::new(Boundary::Periodic, vec![], false);
        let u = cx(0.77, -0.21);
        let got = tq_lambda(&state, &p, Level::Base, u).unwrap();
        let expect = a_scalar(&p, u) - a_scalar(&p, u - p.eta);
        assert!((got - expect).norm() < 1e-12);
    }

    #[test]
    fn tq_infinite_root_contributes_unity() {
        let p = ModelParameters::periodic(3, cx(1.0, 0.0));
        let candidates = solve_bae_periodic(&p).unwrap();
        let without = BetheRootSet::new(Boundary::Periodic, candidates.clone(), false);
        let with = BetheRootSet::new(Boundary::Periodic, candidates, true);
        let u = cx(0.63, 0.41);
        let a = tq_lambda(&without, &p, Level::Base, u).unwrap();
        let b = tq_lambda(&with, &p, Level::Base, u).unwrap();
        assert!((a - b).norm() < 1e-12);
    }

    #[test]
    fn tq_guards_pole_proximity() {
        let p = ModelParameters::periodic(3, cx(1.0, 0.0));
        let candidates = solve_bae_periodic(&p).unwrap();
        let state = BetheRootSet::new(Boundary::Periodic, candidates.clone(), false);
        let err = tq_lambda(&state, &p, Level::Base, candidates[0]).unwrap_err();
        assert!(matches!(err, Error::NearQZero { .. }));
    }

    #[test]
    fn periodic_functional_relations() {
        // the four eigenvalue product relations at every inhomogeneity, for
        // every enumerated state
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let mut p = ModelParameters::periodic(3, cx(1.0, 0.0));
        loop {
            p.theta = (0..3)
                .map(|_| cx(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            if p.validate_generic().is_ok() {
                break;
            }
        }
        let candidates = solve_bae_periodic(&p).unwrap();
        let eta = p.eta;
        for state in enumerate_states(&p, &candidates) {
            for &th in &p.theta {
                let lam = |level: Level, u: C64| tq_lambda(&state, &p, level, u).unwrap();
                let rel = |lhs: C64, rhs: C64| (lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(1.0);
                assert!(rel(
                    lam(Level::Base, th) * lam(Level::Base, th + eta),
                    a_scalar(&p, th + eta) * lam(Level::Sym1, th + 0.5 * eta)
                ) <= 1e-9);
                assert!(rel(
                    lam(Level::Base, th - eta) * lam(Level::Base, th),
                    a_scalar(&p, th - eta) * lam(Level::Asym1, th - 0.5 * eta)
                ) <= 1e-9);
                assert!(rel(
                    lam(Level::Sym1, th - 1.5 * eta) * lam(Level::Base, th),
                    a_scalar(&p, th - eta) * lam(Level::Tilde, th - eta)
                ) <= 1e-9);
                assert!(rel(
                    lam(Level::Asym1, th + 1.5 * eta) * lam(Level::Base, th),
                    a_scalar(&p, th + eta) * lam(Level::Tilde, th + eta)
                ) <= 1e-9);
            }
        }
    }

    #[test]
    fn open_tq_special_values_and_q_symmetry() {
        let p = ModelParameters::open_reference(3);
        let reps = solve_bae_open(&p).unwrap();
        let eta = p.eta;
        for state in enumerate_states(&p, &reps) {
            let lam = |level: Level, u: C64| tq_lambda(&state, &p, level, u).unwrap();
            // Lambda(0) = 0
            assert!(lam(Level::Base, cx(0.0, 0.0)).norm() < 1e-10);
            // Lambda1(eta/2) = -2 Lambda(eta)
            let l1 = lam(Level::Sym1, 0.5 * eta);
            let lb = lam(Level::Base, eta);
            assert!((l1 + 2.0 * lb).norm() <= 1e-9 * l1.norm().max(1.0));
            // Lambdatilde(eta) = (2/3) Lambda1(3 eta/2)
            let lt = lam(Level::Tilde, eta);
            let l32 = lam(Level::Sym1, 1.5 * eta);
            assert!((lt - 2.0 / 3.0 * l32).norm() <= 1e-9 * lt.norm().max(1.0));
            // replacing a root by its involution partner leaves Q unchanged
            if !state.finite_roots.is_empty() {
                let mut flipped = state.finite_roots.clone();
                flipped[0] = -flipped[0] - eta;
                let other = BetheRootSet::new(Boundary::Open, flipped, false);
                let u = cx(0.31, 0.17);
                let a = tq_lambda(&state, &p, Level::Base, u).unwrap();
                let b = tq_lambda(&other, &p, Level::Base, u).unwrap();
                assert!((a - b).norm() <= 1e-12 * a.norm().max(1.0));
            }
        }
    }

    #[test]
    fn open_functional_relations_generic_theta() {
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let mut p = ModelParameters::open_reference(2);
        loop {
            p.theta = (0..2)
                .map(|_| cx(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
                .collect();
            if p.validate_generic().is_ok() {
                break;
            }
        }
        let reps = solve_bae_open(&p).unwrap();
        let eta = p.eta;
        let half = 0.5 * eta;
        for state in enumerate_states(&p, &reps) {
            let lam = |level: Level, u: C64| tq_lambda(&state, &p, level, u).unwrap();
            let rel = |lhs: C64, rhs: C64| (lhs - rhs).norm() / lhs.norm().max(rhs.norm()).max(1.0);
            for &th in &p.theta {
                for x in [th, -th] {
                    let pref1 =
                        -0.25 * (x * (x + eta)) / ((x + half) * (x + half)) * alpha_scalar(&p, x);
                    assert!(
                        rel(
                            lam(Level::Base, x) * lam(Level::Base, x + eta),
                            pref1 * lam(Level::Sym1, x + half)
                        ) <= 1e-8,
                        "family 1 at x={x}"
                    );
                    let pref2 =
                        -0.25 * (x * (x - eta)) / ((x - half) * (x - half)) * alpha_scalar(&p, -x);
                    assert!(
                        rel(
                            lam(Level::Base, x - eta) * lam(Level::Base, x),
                            pref2 * lam(Level::Asym1, x - half)
                        ) <= 1e-8,
                        "family 2 at x={x}"
                    );
                    let pref3 =
                        -(x * (x - 1.5 * eta)) / ((x - half) * (x - eta)) * alpha_scalar(&p, -x);
                    assert!(
                        rel(
                            lam(Level::Sym1, x - 1.5 * eta) * lam(Level::Base, x),
                            pref3 * lam(Level::Tilde, x - eta)
                        ) <= 1e-8,
                        "family 3 at x={x}"
                    );
                    let pref4 =
                        -(x * (x + 1.5 * eta)) / ((x + half) * (x + eta)) * alpha_scalar(&p, x);
                    assert!(
                        rel(
                            lam(Level::Asym1, x + 1.5 * eta) * lam(Level::Base, x),
                            pref4 * lam(Level::Tilde, x + eta)
                        ) <= 1e-8,
                        "family 4 at x={x}"
                    );
                }
            }
        }
    }

    #[test]
    fn energies_match_reference_tables() {
        // periodic N=3
        let p = ModelParameters::periodic(3, cx(1.0, 0.0));
        let roots = solve_bae_periodic(&p).unwrap();
        let pair = BetheRootSet::new(Boundary::Periodic, roots.clone(), false);
        assert!((energy(&pair, &p).unwrap() - cx(3.0, 0.0)).norm() < 1e-9);
        let empty = BetheRootSet::new(Boundary::Periodic, vec![], true);
        assert!((energy(&empty, &p).unwrap() - cx(-3.0, 0.0)).norm() < 1e-12);

        // open N=3 reference rows
        let p = ModelParameters::open_reference(3);
        let empty = BetheRootSet::new(Boundary::Open, vec![], false);
        assert!((energy(&empty, &p).unwrap() - cx(2.7667, 0.0)).norm() < 1e-4);
        let reps = solve_bae_open(&p).unwrap();
        // the single root with imaginary part -1.5235 gives 2.3777
        let la = reps
            .iter()
            .find(|r| (r.im + 1.5235).abs() < 1e-3)
            .copied()
            .unwrap();
        let one = BetheRootSet::new(Boundary::Open, vec![la], false);
        assert!((energy(&one, &p).unwrap() - cx(2.3777, 0.0)).norm() < 1e-4);
        let full = BetheRootSet::new(Boundary::Open, reps, false);
        assert!((energy(&full, &p).unwrap() - cx(-2.7667, 0.0)).norm() < 1e-4);
    }

    #[test]
    fn certify_single_site_periodic() {
        // N = 1: the transfer matrix is eta times the identity and both
        // states carry Lambda = eta
        let p = ModelParameters::periodic(1, cx(1.0, 0.0));
        let g = GrassmannContext::new();
        let result = certify_spectrum(&p, &g, 1e-8, 1e-6).unwrap();
        assert_eq!(result.lines.len(), 2);
        for c in &result.checks {
            assert!(c.passed, "{}: {:.3e}", c.name, c.residual);
        }
    }

    #[test]
    fn certify_periodic_n3() {
        let p = ModelParameters::periodic(3, cx(1.0, 0.0));
        let g = GrassmannContext::new();
        let result = certify_spectrum(&p, &g, 1e-8, 1e-6).unwrap();
        assert_eq!(result.lines.len(), 8);
        for c in &result.checks {
            assert!(c.passed, "{}: {:.3e}", c.name, c.residual);
        }
        let mut energies: Vec<f64> = result.lines.iter().map(|l| l.energy.re).collect();
        energies.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let expect = [-3.0, -3.0, 0.0, 0.0, 0.0, 0.0, 3.0, 3.0];
        for (g, e) in energies.iter().zip(&expect) {
            assert!((g - e).abs() < 1e-9);
        }
    }

    #[test]
    fn certify_open_n2() {
        let p = ModelParameters::open_reference(2);
        let g = GrassmannContext::new();
        let result = certify_spectrum(&p, &g, 1e-8, 1e-6).unwrap();
        assert_eq!(result.lines.len(), 4);
        for c in &result.checks {
            assert!(c.passed, "{}: {:.3e}", c.name, c.residual);
        }
    }

    #[test]
    fn certify_rejects_oversize() {
        let p = ModelParameters::periodic(7, cx(1.0, 0.0));
        let g = GrassmannContext::new();
        assert!(matches!(
            certify_spectrum(&p, &g, 1e-8, 1e-6),
            Err(Error::CertificationSize { .. })
        ));
    }

    #[test]
    fn reference_table_comparison_passes() {
        for table in [
            ReferenceTable::PeriodicN3,
            ReferenceTable::PeriodicN4,
            ReferenceTable::OpenN3,
        ] {
            let p = table.parameters();
            let got = computed_table(&p).unwrap();
            let tol = if table == ReferenceTable::OpenN3 {
                1e-4
            } else {
                1e-9
            };
            for c in compare_tables(&got, &table.rows(), tol) {
                assert!(
                    c.passed,
                    "{:?} {}: {:.3e} {:?}",
                    table, c.name, c.residual, c.note
                );
            }
        }
    }

    #[test]
    fn csv_shape() {
        let p = ModelParameters::periodic(3, cx(1.0, 0.0));
        let rows = computed_table(&p).unwrap();
        let csv = table_to_csv(&rows, 3, "mu");
        let lines: Vec<&str> = csv.trim().lines().collect();
        assert_eq!(lines.len(), 9);
        assert_eq!(lines[0], "mu_1,mu_2,mu_3,energy");
        // the M = 0 row has empty root cells
        assert!(lines[1].starts_with(",,"));
        assert!(csv.contains("inf"));
    }

    #[test]
    fn continuity_in_inhomogeneities() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let p = ModelParameters::periodic(3, cx(1.0, 0.0));
        let direction: Vec<C64> = (0..3)
            .map(|_| cx(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        for c in verify_continuity(&p, &direction, 1.0).unwrap() {
            assert!(c.passed, "{}: {:.3e}", c.name, c.residual);
        }
        let p = ModelParameters::open_reference(2);
        let direction: Vec<C64> = (0..2)
            .map(|_| cx(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        for c in verify_continuity(&p, &direction, 1.0).unwrap() {
            assert!(c.passed, "{}: {:.3e}", c.name, c.residual);
        }
    }

    #[test]
    fn lambda_polynomial_degree_and_asymptotics() {
        use crate::linalg::{choose_nodes, interpolate_scalar, PolySamples};
        // periodic: every eigenvalue function interpolates to degree <= N-1
        let p = ModelParameters::periodic(3, cx(1.0, 0.0));
        let candidates = solve_bae_periodic(&p).unwrap();
        let avoid: Vec<C64> = candidates.iter().flat_map(|&m| [m, m + p.eta]).collect();
        for state in enumerate_states(&p, &candidates) {
            let (nodes, _) = choose_nodes(p.n + 1, &avoid);
            let values: Vec<C64> = nodes
                .iter()
                .map(|&u| tq_lambda(&state, &p, Level::Base, u).unwrap())
                .collect();
            let coeffs = interpolate_scalar(&PolySamples {
                nodes,
                values,
                degree_bound: p.n,
            })
            .unwrap();
            let scale = coeffs.iter().map(|c| c.norm()).fold(1e-30, f64::max);
            assert!(coeffs[p.n].norm() <= 1e-9 * scale, "degree exceeded");
        }
        // open: leading coefficients are (2, -8, 8, -8) kappa at u^{2N+1},
        // with the u^{2N+2} slot empty
        let p = ModelParameters::open_reference(2);
        let kappa = crate::transfer::open_kappa(&p);
        let reps = solve_bae_open(&p).unwrap();
        let deg = 2 * p.n + 2;
        let mut avoid: Vec<C64> = reps
            .iter()
            .flat_map(|&l| {
                [l, -l - p.eta, l + 1.5 * p.eta, -l + 0.5 * p.eta, l + 2.0 * p.eta]
            })
            .collect();
        for m in [-1.5f64, -1.0, -0.5, 0.0] {
            avoid.push(m * p.eta);
        }
        for state in enumerate_states(&p, &reps) {
            for (level, factor) in [
                (Level::Base, 2.0),
                (Level::Sym1, -8.0),
                (Level::Asym1, 8.0),
                (Level::Tilde, -8.0),
            ] {
                let (nodes, _) = choose_nodes(deg + 1, &avoid);
                let values: Vec<C64> = nodes
                    .iter()
                    .map(|&u| tq_lambda(&state, &p, level, u).unwrap())
                    .collect();
                let coeffs = interpolate_scalar(&PolySamples {
                    nodes,
                    values,
                    degree_bound: deg,
                })
                .unwrap();
                let scale = coeffs.iter().map(|c| c.norm()).fold(1e-30, f64::max);
                assert!(coeffs[deg].norm() <= 1e-8 * scale, "top coefficient");
                let expect = factor * kappa;
                assert!(
                    (coeffs[deg - 1] - expect).norm() <= 1e-8 * expect.norm(),
                    "leading coefficient {} vs {}",
                    coeffs[deg - 1],
                    expect
                );
            }
        }
    }

    #[test]
    fn hermitian_preset_energies_real() {
        let mut rng = ChaCha8Rng::seed_from_u64(45);
        for _ in 0..3 {
            let mut p = ModelParameters::open_reference(2);
            p.a_plus = cx(rng.random::<f64>() + 0.1, 0.0);
            p.a_minus = cx(rng.random::<f64>() + 0.1, 0.0);
            p.f_minus = cx(rng.random::<f64>(), rng.random::<f64>());
            p.f_plus = cx(rng.random::<f64>(), rng.random::<f64>());
            let p = p.hermitize();
            let reps = solve_bae_open(&p).unwrap();
            for state in enumerate_states(&p, &reps) {
                let e = energy(&state, &p).unwrap();
                assert!(e.im.abs() < 1e-8, "energy not real: {e}");
            }
        }
    }
}
