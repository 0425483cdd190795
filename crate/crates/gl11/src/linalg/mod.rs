//! Z2-graded dense linear algebra: super tensor products, super traces,
//! partial super transpositions, chain embeddings, plus the plain complex
//! LU and polynomial interpolation everything downstream consumes.

pub mod dense;
pub mod op;
pub mod poly;
pub mod space;

pub use dense::{lu_determinant, lu_factor, LuFactors, Matrix};
pub use op::{
    embed, graded_swap, partial_super_trace, partial_super_transpose, product, super_permutation,
    super_tensor, super_tensor_chain, super_trace_full, Factor, GradedOperator,
};
pub use poly::{choose_nodes, eval_poly, interpolate_operator, interpolate_scalar, PolySamples};
pub use space::GradedSpace;
