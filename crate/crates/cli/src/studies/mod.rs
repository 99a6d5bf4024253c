//! One study per subcommand. Each validates what it needs from the config,
//! records checks in the session and writes its tables.

mod boundary;
mod carleman;
mod cgo;
mod kernel;
mod recover;
mod transform;

use crate::config::{ConfigError, ExperimentConfig};
use crate::report::Session;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::io;

#[derive(Debug)]
pub enum StudyError {
    Usage(ConfigError),
    Io(io::Error),
}

impl fmt::Display for StudyError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StudyError::Usage(e) => write!(f, "usage: {e}"),
            StudyError::Io(e) => write!(f, "i/o: {e}"),
        }
    }
}

impl From<ConfigError> for StudyError {
    fn from(e: ConfigError) -> Self {
        StudyError::Usage(e)
    }
}

impl From<io::Error> for StudyError {
    fn from(e: io::Error) -> Self {
        StudyError::Io(e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::Subcommand)]
pub enum Study {
    /// Forward transform, adjoint duality, geodesics and simplicity.
    Transform,
    /// Kernel pairs [−λp, dp] and conditioning on a basis.
    Kernel,
    /// Eikonal and transport residuals and the conjugated residual scaling.
    Cgo,
    /// Carleman ratio ‖P_φu‖/(h‖u‖) for random compactly supported u.
    Carleman,
    /// Boundary symbol recursion and recovery of (X, q) at the boundary.
    Boundary,
    /// Gauge pipeline for gradient fields and the Green identity.
    Recover,
    /// Every study above.
    All,
}

impl Study {
    pub fn name(self) -> &'static str {
        match self {
            Study::Transform => "transform",
            Study::Kernel => "kernel",
            Study::Cgo => "cgo",
            Study::Carleman => "carleman",
            Study::Boundary => "boundary",
            Study::Recover => "recover",
            Study::All => "all",
        }
    }

    fn parts(self) -> Vec<Study> {
        match self {
            Study::All => vec![
                Study::Transform,
                Study::Kernel,
                Study::Cgo,
                Study::Carleman,
                Study::Boundary,
                Study::Recover,
            ],
            s => vec![s],
        }
    }

    /// Usage errors are raised here, before any check runs.
    pub fn validate(self, cfg: &ExperimentConfig) -> Result<(), ConfigError> {
        for s in self.parts() {
            match s {
                Study::Transform | Study::Kernel | Study::Recover => cfg.require_lambda_list()?,
                Study::Cgo => cgo::validate(cfg)?,
                Study::Carleman => cfg.require_h_list()?,
                Study::Boundary => boundary::validate(cfg)?,
                Study::All => {}
            }
        }
        Ok(())
    }

    pub fn run(self, cfg: &ExperimentConfig, session: &mut Session) -> Result<(), StudyError> {
        self.validate(cfg)?;
        for s in self.parts() {
            match s {
                Study::Transform => transform::run(cfg, session)?,
                Study::Kernel => kernel::run(cfg, session)?,
                Study::Cgo => cgo::run(cfg, session)?,
                Study::Carleman => carleman::run(cfg, session)?,
                Study::Boundary => boundary::run(cfg, session)?,
                Study::Recover => recover::run(cfg, session)?,
                Study::All => {}
            }
        }
        Ok(())
    }
}

/// Independent generator per study so that `all` reproduces the tables of
/// the single subcommands.
fn rng_for(cfg: &ExperimentConfig, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.seed ^ salt.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn err_string<E: fmt::Display>(e: E) -> String {
    e.to_string()
}
