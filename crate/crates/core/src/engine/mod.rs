//! Words, polynomials and tracial functionals on free products.

pub mod checks;
pub mod functional;
pub mod matrix;
pub mod poly;
pub mod word;

pub use checks::{
    check_alternating_vanishing, check_alternating_vanishing_to_degree, check_diagonal_amalgamation,
    check_diagonal_amalgamation_to_degree, check_freeness, check_freeness_polys, ViolationReport,
};
pub use functional::{
    free_family_functional, rdiagonal_functional, DynFunctional, FunctionalBuilder, RDiagonalRepr, SourceSpec, TraceFunctional,
};
pub use matrix::{block_embed, eta, eta0, MatrixOverPoly, ScalarMatrix};
pub use poly::NcPoly;
pub use word::{Letter, Symbol, Word};
