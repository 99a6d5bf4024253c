//! From lower-order perturbations to ray-transform data: partial Fourier
//! slices in `x₁`, the gauge direction, closedness and potentials, the
//! `Q_λ` slice, and the Green identity for the formal adjoint.

pub mod field;
pub mod fourier;
pub mod gauge;
pub mod green;

pub use field::{Potential, SupportBox, VectorFieldM};
pub use fourier::{partial_fourier, q_slice, slice_at, FourierQuadrature, FourierSlice};
pub use gauge::{
    closedness_check, default_lambdas, gauge_pipeline, gauge_vanishing_check, integrate_potential, potential_round_trip,
    potential_slice, q_pipeline, ray_integral_check, write_pipeline_csv, ClosednessReport, GaugeResolution,
    IntegratedPotential, PipelineRow, PotentialRoundTrip, RayIntegralReport,
};
pub use green::{green_identity_check, green_identity_check_with_order, observed_orders, GreenProblem, GreenReport};
