//! Boundary determination: boundary normal coordinates, the symbol
//! recursion of the factorization of `(−Δ_g)^m + X + q` as a first-order
//! system, and recovery of `X`, `q` on `{x_n = 0}`.

pub mod jet;
pub mod metric;
pub mod recover;
pub mod symbols;

pub use jet::{Jet, JetMatrix};
pub use metric::{assembled_laplacian, coeffs_eq, BoundaryNormalMetric, EqCoefficients, PerturbationJet};
pub use recover::{recover_xq_boundary, recovery_round_trip, write_recovery_csv, xi_design, BoundaryValues, RecoveryRow};
pub use symbols::{solve_b0, solve_bm1, symbol_b1, symbol_stack, HomSymbol, SymbolStack};
