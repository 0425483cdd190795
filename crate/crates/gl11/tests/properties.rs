//! Property tests for the graded tensor calculus and interpolation.

use num_complex::Complex64 as C64;
use proptest::prelude::*;

use gl11::linalg::{
    choose_nodes, eval_poly, graded_swap, interpolate_scalar, super_tensor, super_trace_full,
    GradedOperator, GradedSpace, Matrix, PolySamples,
};

/// Entries on a dyadic grid: products of three stay exact in f64, so the
/// associativity check can demand exact zeros.
fn dyadic() -> impl Strategy<Value = C64> {
    (-16i32..=16, -16i32..=16)
        .prop_map(|(a, b)| C64::new(a as f64 / 16.0, b as f64 / 16.0))
}

fn dyadic_op(space: GradedSpace) -> impl Strategy<Value = GradedOperator> {
    let d = space.dim();
    proptest::collection::vec(dyadic(), d * d).prop_map(move |data| {
        let mut m = Matrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = data[i * d + j];
            }
        }
        GradedOperator::endo(space.clone(), m).unwrap()
    })
}

fn any_space() -> impl Strategy<Value = GradedSpace> {
    prop_oneof![
        Just(GradedSpace::gl11()),
        Just(GradedSpace::odd_even()),
        Just(GradedSpace::new(vec![0, 0, 1]).unwrap()),
        Just(GradedSpace::new(vec![1, 1]).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn super_tensor_associative_exactly(
        a in dyadic_op(GradedSpace::gl11()),
        b in dyadic_op(GradedSpace::odd_even()),
        c in dyadic_op(GradedSpace::gl11()),
    ) {
        let left = super_tensor(&super_tensor(&a, &b), &c);
        let right = super_tensor(&a, &super_tensor(&b, &c));
        prop_assert_eq!(left.entries(), right.entries());
    }

    #[test]
    fn graded_swap_is_orthogonal_involution(
        va in any_space(),
        vb in any_space(),
    ) {
        let s = graded_swap(&va, &vb);
        let back = graded_swap(&vb, &va);
        let id = back.compose(&s).unwrap();
        prop_assert!(id.rel_distance(&GradedOperator::identity(id.domain())) == 0.0);
        // transpose inverts it as well
        let idt = s.transpose().compose(&s).unwrap();
        prop_assert!(idt.rel_distance(&GradedOperator::identity(idt.domain())) == 0.0);
    }

    #[test]
    fn partial_trace_splits_pure_tensors(
        a in dyadic_op(GradedSpace::gl11()),
        b in dyadic_op(GradedSpace::odd_even()),
    ) {
        let ab = super_tensor(&a, &b);
        let chain = [a.domain().clone(), b.domain().clone()];
        let t2 = gl11::linalg::partial_super_trace(&ab, &chain, &[1]).unwrap();
        let expect = a.scale(super_trace_full(&b).unwrap());
        prop_assert!(t2.rel_distance(&expect) < 1e-14);
        let t1 = gl11::linalg::partial_super_trace(&ab, &chain, &[0]).unwrap();
        let expect = b.scale(super_trace_full(&a).unwrap());
        prop_assert!(t1.rel_distance(&expect) < 1e-14);
    }

    #[test]
    fn interpolation_inverts_sampling(
        coeffs in proptest::collection::vec(
            (-1.0f64..1.0, -1.0f64..1.0).prop_map(|(re, im)| C64::new(re, im)),
            1..8,
        )
    ) {
        let degree = coeffs.len() - 1;
        let (nodes, _) = choose_nodes(degree + 1, &[]);
        let values: Vec<C64> = nodes.iter().map(|&u| eval_poly(&coeffs, u)).collect();
        // coefficient recovery is bounded by roundoff at the scale of the
        // sampled values, which on an integer-grid dwarfs the coefficients
        let value_scale = values.iter().map(|v| v.norm()).fold(1.0f64, f64::max);
        let back = interpolate_scalar(&PolySamples { nodes, values, degree_bound: degree }).unwrap();
        for (g, e) in back.iter().zip(&coeffs) {
            prop_assert!((g - e).norm() <= 1e-10 * value_scale);
        }
    }

    #[test]
    fn supertrace_of_commutator_of_even_ops_vanishes(
        a in dyadic_op(GradedSpace::gl11().tensor(&GradedSpace::gl11())),
        b in dyadic_op(GradedSpace::gl11().tensor(&GradedSpace::gl11())),
    ) {
        // restrict to the grade-preserving parts
        let space = a.domain().clone();
        let project_even = |op: &GradedOperator| {
            let mut m = op.entries().clone();
            for i in 0..space.dim() {
                for j in 0..space.dim() {
                    if space.parity(i) != space.parity(j) {
                        m[(i, j)] = C64::new(0.0, 0.0);
                    }
                }
            }
            GradedOperator::endo(space.clone(), m).unwrap()
        };
        let ae = project_even(&a);
        let be = project_even(&b);
        let ab = super_trace_full(&ae.compose(&be).unwrap()).unwrap();
        let ba = super_trace_full(&be.compose(&ae).unwrap()).unwrap();
        prop_assert!((ab - ba).norm() <= 1e-12);
    }
}
