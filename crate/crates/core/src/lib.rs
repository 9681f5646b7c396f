//! Independence complexes of graph products: construction, exact homology,
//! homotopy-type rewriting and closed-form predictions.

pub mod closed_forms;
pub mod complex;
pub mod graph;
pub mod homology;
pub mod homotopy;
pub mod poly;
pub mod reduction;
pub mod scalar;

pub use complex::{independence_complex, SimplicialComplex, DEFAULT_FACE_BUDGET};
pub use graph::{product, Graph, GraphError, Label, ProductKind};
pub use homology::{
    component_homology, independence_homology, independence_pieces, reduced_homology, reduced_homology_direct, BettiTable, HomologyError,
    HomologyGroup, IntegerMatrix,
};
pub use homotopy::{betti_match, component_match, BettiPolynomial, HtError, HtType};
pub use closed_forms::{Family, PredictionKey, Predicted};
pub use poly::{series_div, Poly};
pub use reduction::{reduce, reduce_with, replay, Certification, DerivationTrace, ReduceError, ReduceOptions, Reduction, Rule, RuleOrder};

/// Arbitrary-precision boundary and elimination matrices.
pub type BigMatrix = IntegerMatrix<num_bigint::BigInt>;
/// Fixed-width matrices for the overflow-checked fast path.
pub type SmallMatrix = IntegerMatrix<i64>;
/// Exact rational scalars.
pub type Rational = num_rational::BigRational;
/// Polynomials in one variable with exact rational coefficients.
pub type RatPoly = Poly<Rational>;
/// Bivariate series coefficients: polynomials in `t` whose coefficients are polynomials in `x`.
pub type RatBiPoly = Poly<RatPoly>;
/// Floating-point polynomials for approximate evaluation.
pub type FloatPoly = Poly<f64>;
