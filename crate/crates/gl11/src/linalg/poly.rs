//! Polynomial sampling and interpolation. Operator-valued polynomials in the
//! spectral parameter are handled by sampling at generic nodes and
//! interpolating entrywise.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::dense::Matrix;
use crate::linalg::op::GradedOperator;

/// Samples of a polynomial (scalar- or operator-valued) at distinct nodes.
#[derive(Debug, Clone)]
pub struct PolySamples<T> {
    pub nodes: Vec<C64>,
    pub values: Vec<T>,
    pub degree_bound: usize,
}

fn check_nodes(nodes: &[C64], degree_bound: usize, count: usize) -> Result<()> {
    if count != nodes.len() {
        return Err(Error::ShapeMismatch("node/value count mismatch".into()));
    }
    if nodes.len() < degree_bound + 1 {
        return Err(Error::TooFewNodes {
            needed: degree_bound + 1,
            degree: degree_bound,
            got: nodes.len(),
        });
    }
    for (i, a) in nodes.iter().enumerate() {
        for b in nodes.iter().skip(i + 1) {
            if (a - b).norm() < 1e-14 {
                return Err(Error::DuplicateNode(format!("{a}")));
            }
        }
    }
    Ok(())
}

/// Leja ordering: start from the largest node, then greedily take the node
/// maximizing the distance product to everything chosen so far. Keeps the
/// Newton divided differences well conditioned at high degree.
fn leja_order(nodes: &[C64]) -> Vec<usize> {
    let n = nodes.len();
    let mut order = Vec::with_capacity(n);
    let mut remaining: Vec<usize> = (0..n).collect();
    let first = remaining
        .iter()
        .enumerate()
        .max_by(|(_, &a), (_, &b)| {
            nodes[a]
                .norm()
                .partial_cmp(&nodes[b].norm())
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .map(|(pos, _)| pos)
        .unwrap_or(0);
    order.push(remaining.swap_remove(first));
    let mut log_dist: Vec<f64> = vec![0.0; n];
    while !remaining.is_empty() {
        let last = *order.last().expect("nonempty");
        for &r in &remaining {
            log_dist[r] += (nodes[r] - nodes[last]).norm().max(1e-300).ln();
        }
        let (pos, _) = remaining
            .iter()
            .enumerate()
            .max_by(|(_, &a), (_, &b)| {
                log_dist[a]
                    .partial_cmp(&log_dist[b])
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .expect("nonempty");
        order.push(remaining.swap_remove(pos));
    }
    order
}

/// Newton divided differences, converted to monomial coefficients
/// c_0 + c_1 u + ... . The residual at every node is checked against a
/// 1e-10 relative gate.
pub fn interpolate_scalar(samples: &PolySamples<C64>) -> Result<Vec<C64>> {
    check_nodes(&samples.nodes, samples.degree_bound, samples.values.len())?;
    let order = leja_order(&samples.nodes);
    let nodes: Vec<C64> = order.iter().map(|&i| samples.nodes[i]).collect();
    let values: Vec<C64> = order.iter().map(|&i| samples.values[i]).collect();
    let coeffs = newton_coefficients(&nodes, &values);
    // residual gate
    let scale = samples
        .values
        .iter()
        .map(|v| v.norm())
        .fold(0.0f64, f64::max)
        .max(1e-30);
    for (x, v) in samples.nodes.iter().zip(&samples.values) {
        let got = eval_poly(&coeffs, *x);
        if (got - v).norm() > 1e-10 * scale {
            return Err(Error::Invalid(format!(
                "interpolation residual {:.3e} at node {x}",
                (got - v).norm() / scale
            )));
        }
    }
    Ok(coeffs)
}

/// Entrywise interpolation of operator samples. All samples must share the
/// same spaces; the result is one coefficient operator per power of u.
pub fn interpolate_operator(samples: &PolySamples<GradedOperator>) -> Result<Vec<GradedOperator>> {
    check_nodes(&samples.nodes, samples.degree_bound, samples.values.len())?;
    let first = &samples.values[0];
    for v in &samples.values[1..] {
        if v.domain() != first.domain() || v.codomain() != first.codomain() {
            return Err(Error::ShapeMismatch(
                "operator samples act on different spaces".into(),
            ));
        }
    }
    let rows = first.entries().rows();
    let cols = first.entries().cols();
    let n = samples.nodes.len();
    let order = leja_order(&samples.nodes);
    let nodes: Vec<C64> = order.iter().map(|&i| samples.nodes[i]).collect();
    let mut coeff_mats = vec![Matrix::zeros(rows, cols); n];
    let mut scratch = vec![C64::new(0.0, 0.0); n];
    for r in 0..rows {
        for cidx in 0..cols {
            for (k, &i) in order.iter().enumerate() {
                scratch[k] = samples.values[i].entries()[(r, cidx)];
            }
            let coeffs = newton_coefficients(&nodes, &scratch);
            for (k, c) in coeffs.iter().enumerate() {
                coeff_mats[k][(r, cidx)] = *c;
            }
        }
    }
    coeff_mats
        .into_iter()
        .map(|m| GradedOperator::new(first.domain().clone(), first.codomain().clone(), m))
        .collect()
}

fn newton_coefficients(nodes: &[C64], values: &[C64]) -> Vec<C64> {
    let n = nodes.len();
    // divided difference table, in place
    let mut dd: Vec<C64> = values.to_vec();
    for level in 1..n {
        for i in (level..n).rev() {
            dd[i] = (dd[i] - dd[i - 1]) / (nodes[i] - nodes[i - level]);
        }
    }
    // expand the Newton form into monomial coefficients
    let mut coeffs = vec![C64::new(0.0, 0.0); n];
    // poly starts as the constant dd[n-1], then c(u) -> c(u)*(u - x_k) + dd[k]
    coeffs[0] = dd[n - 1];
    let mut deg = 0usize;
    for k in (0..n - 1).rev() {
        // multiply by (u - nodes[k])
        for i in (1..=deg + 1).rev() {
            let lower = coeffs[i - 1];
            coeffs[i] = lower + coeffs[i].scale_neg_x(nodes[k]);
        }
        coeffs[0] = -nodes[k] * coeffs[0] + dd[k];
        deg += 1;
    }
    coeffs
}

trait ScaleNegX {
    fn scale_neg_x(self, x: C64) -> C64;
}
impl ScaleNegX for C64 {
    fn scale_neg_x(self, x: C64) -> C64 {
        -x * self
    }
}

/// Horner evaluation of c_0 + c_1 u + ...
pub fn eval_poly(coeffs: &[C64], u: C64) -> C64 {
    let mut acc = C64::new(0.0, 0.0);
    for c in coeffs.iter().rev() {
        acc = acc * u + c;
    }
    acc
}

/// Default interpolation nodes: integers 0, 1, 2, ... shifted by a common
/// complex offset chosen so every node stays clear of the given points
/// (inhomogeneities, crossing-parameter multiples). Returns the nodes and
/// the shift that was applied, for the report.
pub fn choose_nodes(count: usize, avoid: &[C64]) -> (Vec<C64>, C64) {
    let base: Vec<C64> = (0..count).map(|k| C64::new(k as f64, 0.0)).collect();
    let candidates = [
        C64::new(0.0, 0.0),
        C64::new(0.31, 0.43),
        C64::new(-0.27, 0.51),
        C64::new(0.44, -0.29),
        C64::new(-0.38, -0.41),
        C64::new(0.17, 0.61),
    ];
    'shift: for s in candidates {
        for b in &base {
            for a in avoid {
                if (b + s - a).norm() < 0.2 {
                    continue 'shift;
                }
            }
        }
        return (base.iter().map(|b| b + s).collect(), s);
    }
    // fall back to a shift no finite avoid-set can collide with exactly
    let s = C64::new(0.123456789, 0.987654321);
    (base.iter().map(|b| b + s).collect(), s)
}
