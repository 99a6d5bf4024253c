//! Attenuated geodesic ray transform of (function, 1-form) pairs.

pub mod adjoint;
pub mod fields;
pub mod forward;
pub mod kernel;
pub mod solenoidal;

pub use adjoint::{adjoint_tstar, normal_operator, santalo_check, sphere_nodes_at, AdjointValue, DomainQuadrature, SantaloReport, SantaloResolution};
pub use fields::{OneFormD, PairField, Regularity, ScalarFieldD, C64};
pub use forward::{forward_t, FanBeamData, RayBundle, RayQuadrature};
pub use kernel::{conditioning_study, default_basis, kernel_pair, ConditioningReport};
pub use solenoidal::{solenoidal_decompose, PolarGrid, SolenoidalParts};
