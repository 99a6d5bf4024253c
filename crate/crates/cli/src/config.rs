//! Experiment configuration: a TOML file of `key = value` lines with a
//! `[resolution]` section. Every key is optional.

use admissible::geometry::gallery;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::path::{Path, PathBuf};

/// Environment variable that overrides `output_dir`.
pub const OUTPUT_DIR_ENV: &str = "ADMISSIBLE_OUTPUT_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Gallery metric on the unit disk.
    pub metric_name: String,
    /// Polyharmonic order.
    pub m: usize,
    /// Seed for the randomized test families.
    pub seed: u64,
    /// Members per randomized family.
    pub samples: usize,
    pub output_dir: PathBuf,
    pub lambda_list: Vec<f64>,
    /// Semiclassical parameters, strictly decreasing.
    pub h_list: Vec<f64>,
    pub resolution: Resolution,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Resolution {
    /// Influx grid for the duality check and the kernel study.
    pub influx_s: usize,
    pub influx_phi: usize,
    /// Gauss panel length along rays.
    pub ray_step: f64,
    pub domain_rho: usize,
    pub domain_theta: usize,
    pub sphere_nodes: usize,
    /// Nodes per axis of the CGO chart grid.
    pub chart_nodes: usize,
    /// Influx grid and ray step of the gauge pipeline.
    pub gauge_s: usize,
    pub gauge_phi: usize,
    pub gauge_ray_step: f64,
    /// Gauss panels of the `x₁` Fourier transform.
    pub fourier_panels: usize,
    /// Nodes per axis of the Green identity grid.
    pub green_nodes: usize,
    /// Boundary points in the symbol recovery.
    pub boundary_points: usize,
}

impl Default for Resolution {
    fn default() -> Self {
        Self {
            influx_s: 128,
            influx_phi: 64,
            ray_step: 0.25,
            domain_rho: 16,
            domain_theta: 32,
            sphere_nodes: 32,
            chart_nodes: 33,
            gauge_s: 32,
            gauge_phi: 16,
            gauge_ray_step: 0.05,
            fourier_panels: 16,
            green_nodes: 129,
            boundary_points: 6,
        }
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            metric_name: "euclidean_disk".into(),
            m: 2,
            seed: 2024,
            samples: 5,
            output_dir: PathBuf::from("admissible-out"),
            lambda_list: vec![-0.3, 0.0, 0.3],
            h_list: (0..8).map(|k| 0.1 * 0.1f64.powf(k as f64 / 7.0)).collect(),
            resolution: Resolution::default(),
        }
    }
}

/// Invalid configuration; reported as a usage error.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn bad(msg: impl Into<String>) -> ConfigError {
    ConfigError(msg.into())
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: Self = toml::from_str(text).map_err(|e| bad(format!("config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| bad(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies [`OUTPUT_DIR_ENV`] when set and non-empty.
    pub fn with_env_override(mut self) -> Self {
        if let Some(dir) = std::env::var_os(OUTPUT_DIR_ENV).filter(|d| !d.is_empty()) {
            self.output_dir = PathBuf::from(dir);
        }
        self
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if !gallery::NAMES.contains(&self.metric_name.as_str()) {
            return Err(bad(format!(
                "unknown metric '{}' (known: {})",
                self.metric_name,
                gallery::NAMES.join(", ")
            )));
        }
        if self.m == 0 {
            return Err(bad("m must be positive"));
        }
        if self.samples == 0 {
            return Err(bad("samples must be positive"));
        }
        let r = &self.resolution;
        let counts = [
            ("influx_s", r.influx_s),
            ("influx_phi", r.influx_phi),
            ("domain_rho", r.domain_rho),
            ("domain_theta", r.domain_theta),
            ("sphere_nodes", r.sphere_nodes),
            ("chart_nodes", r.chart_nodes),
            ("gauge_s", r.gauge_s),
            ("gauge_phi", r.gauge_phi),
            ("fourier_panels", r.fourier_panels),
            ("green_nodes", r.green_nodes),
            ("boundary_points", r.boundary_points),
        ];
        if let Some((name, _)) = counts.iter().find(|c| c.1 == 0) {
            return Err(bad(format!("resolution.{name} must be positive")));
        }
        for (name, v) in [("ray_step", r.ray_step), ("gauge_ray_step", r.gauge_ray_step)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(bad(format!("resolution.{name} must be positive")));
            }
        }
        if self.h_list.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return Err(bad("h_list entries must be positive"));
        }
        if self.h_list.windows(2).any(|w| w[1] >= w[0]) {
            return Err(bad("h_list must be strictly decreasing"));
        }
        if self.lambda_list.iter().any(|l| !l.is_finite()) {
            return Err(bad("lambda_list entries must be finite"));
        }
        Ok(())
    }

    pub fn require_h_list(&self) -> Result<(), ConfigError> {
        if self.h_list.is_empty() {
            return Err(bad("h_list is empty"));
        }
        Ok(())
    }

    pub fn require_lambda_list(&self) -> Result<(), ConfigError> {
        if self.lambda_list.is_empty() {
            return Err(bad("lambda_list is empty"));
        }
        Ok(())
    }

    /// Resolved configuration as TOML, the input of the config hash.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }
}

/// Text printed by `--help` under the config option.
pub fn defaults_help() -> String {
    let d = ExperimentConfig::default();
    let r = &d.resolution;
    format!(
        "TOML file; all keys optional. Defaults:\n  \
         metric_name = \"{}\"  ({})\n  m = {}\n  seed = {}\n  samples = {}\n  output_dir = \"{}\"  (overridden by ${OUTPUT_DIR_ENV})\n  \
         lambda_list = {:?}\n  h_list = 8 log-spaced values from 0.1 down to 0.01\n  \
         [resolution]\n  influx_s = {}\n  influx_phi = {}\n  ray_step = {}\n  domain_rho = {}\n  domain_theta = {}\n  sphere_nodes = {}\n  \
         chart_nodes = {}\n  gauge_s = {}\n  gauge_phi = {}\n  gauge_ray_step = {}\n  fourier_panels = {}\n  green_nodes = {}\n  boundary_points = {}",
        d.metric_name,
        gallery::NAMES.join(", "),
        d.m,
        d.seed,
        d.samples,
        d.output_dir.display(),
        d.lambda_list,
        r.influx_s,
        r.influx_phi,
        r.ray_step,
        r.domain_rho,
        r.domain_theta,
        r.sphere_nodes,
        r.chart_nodes,
        r.gauge_s,
        r.gauge_phi,
        r.gauge_ray_step,
        r.fourier_panels,
        r.green_nodes,
        r.boundary_points,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        assert_eq!(ExperimentConfig::parse("").unwrap(), ExperimentConfig::default());
    }

    #[test]
    fn sections_and_overrides() {
        let c = ExperimentConfig::parse(
            "metric_name = \"conformal_bump\"\nseed = 9\nh_list = [0.1, 0.05, 0.01]\n[resolution]\nchart_nodes = 17\n",
        )
        .unwrap();
        assert_eq!(c.metric_name, "conformal_bump");
        assert_eq!(c.resolution.chart_nodes, 17);
        assert_eq!(c.resolution.green_nodes, 129);
    }

    #[test]
    fn invalid_configs() {
        for text in [
            "metric_name = \"torus\"",
            "h_list = [0.01, 0.1]",
            "h_list = [0.1, -0.1]",
            "[resolution]\ninflux_s = 0",
            "[resolution]\nray_step = 0.0",
            "unknown_key = 1",
            "m = 0",
        ] {
            assert!(ExperimentConfig::parse(text).is_err(), "{text}");
        }
    }

    #[test]
    fn canonical_form_round_trips() {
        let c = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::parse(&c.canonical()).unwrap(), c);
    }
}
