//! Simple 2-D metrics, admissible product metrics, geodesics and charts.

pub mod domain;
pub mod gallery;
pub mod geodesic;
pub mod influx;
pub mod metric;
pub mod polar;
pub mod simplicity;

pub use domain::StarDomain;
pub use geodesic::{shoot_geodesic, GeodesicPath, PathSample, UnitTangent};
pub use influx::{boundary_frame, BoundaryFrame, InfluxGrid, InfluxNode};
pub use metric::{christoffels, Christoffel, ConformalProduct, MetricField2D, Point2};
pub use polar::{polar_coords, ExpState, PolarChart};
pub use simplicity::{simplicity_diagnostics, SimplicityReport};
