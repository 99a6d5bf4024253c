//! Complex geometrical optics on admissible products `M ⊂ ℝ × D`: phases,
//! amplitudes, the Cauchy-transform `∂̄` solver and semiclassical estimates.

pub mod amplitude;
pub mod cauchy;
pub mod conjugation;
pub mod grid;
pub mod moment;
pub mod phase;

pub use amplitude::{transport_residual, Amplitude, PhaseOnGrid};
pub use cauchy::{cauchy_transform, dbar_cauchy_solve, CauchyDomain, CauchyGrid};
pub use conjugation::{carleman_ratio, conjugated_residual_scaling, log_spaced, CarlemanReport, LowerOrder, ScalingReport};
pub use grid::{ChartBox, ChartGrid, GridFieldM};
pub use moment::{holomorphic_moment, ShadowContour};
pub use phase::{eikonal_residual, EikonalReport, Phase};
