use super::err_string;
use crate::config::{ConfigError, ExperimentConfig};
use crate::report::{num, Relation, Session, Table};
use admissible::cgo::{
    conjugated_residual_scaling, eikonal_residual, transport_residual, Amplitude, ChartBox, ChartGrid, LowerOrder, Phase,
};
use admissible::geometry::gallery;
use num_complex::Complex64 as C;
use std::io;

const EIKONAL_TOL: f64 = 1e-6;
const TRANSPORT_TOL: f64 = 1e-6;
/// The residual decays like `h^{m+1}`; the fitted slope may fall short by this much.
const SLOPE_SLACK: f64 = 0.2;
const CONTROL_MAX: f64 = 0.2;
const CONTROL_DISTORTION: f64 = 0.5;
const CONTROL_NODES: usize = 17;

pub fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    cfg.require_h_list()?;
    let (hi, lo) = (cfg.h_list[0], cfg.h_list[cfg.h_list.len() - 1]);
    if cfg.h_list.len() < 2 || hi / lo < 10.0 * (1.0 - 1e-12) {
        return Err(ConfigError("cgo needs an h_list spanning at least a decade".into()));
    }
    Ok(())
}

pub fn run(cfg: &ExperimentConfig, s: &mut Session) -> io::Result<()> {
    let setup = gallery::product(&cfg.metric_name, (-0.5, 0.5)).and_then(|prod| {
        let phase = Phase::new(prod.base(), Phase::default_center(), 1.0)?;
        let n = cfg.resolution.chart_nodes;
        let grid = ChartGrid::new(&prod, &phase, ChartBox::default(), [n; 3])?;
        Ok((prod, phase, grid))
    });
    let (prod, phase, grid) = match setup {
        Ok(v) => v,
        Err(e) => {
            s.check("cgo.setup", Relation::Below, 0.0, || Err(e.to_string()));
            return Ok(());
        }
    };
    let bounds = ChartBox::default();
    s.check("cgo.eikonal_residual", Relation::Below, EIKONAL_TOL, || {
        eikonal_residual(&phase, bounds.r, bounds.theta, 6).map(|r| r.max()).map_err(err_string)
    });
    let amp = Amplitude::exponential(&phase, 1.0, |t| (2.0 * t).cos());
    s.check("cgo.transport_residual", Relation::Below, TRANSPORT_TOL, || {
        transport_residual(&amp, &phase, &grid, cfg.m).map_err(err_string)
    });
    let lower = LowerOrder::from_fn(
        &grid,
        |[x1, r, th]| [C::new(0.3 * r.sin(), x1), C::new(0.2, 0.1 * th), C::new(x1 * th, 0.0)],
        |[x1, r, _]| C::new(1.0 + x1 * r, 0.5),
    );
    let mut scaling = None;
    let target = (cfg.m + 1) as f64 - SLOPE_SLACK;
    s.check("cgo.scaling_slope", Relation::AtLeast, target, || {
        let rep = conjugated_residual_scaling(&amp, &phase, &grid, &lower, cfg.m, &cfg.h_list).map_err(err_string)?;
        let slope = rep.slope;
        scaling = Some(rep);
        Ok(slope)
    });
    let mut control = None;
    s.check("cgo.eikonal_violating_control_slope", Relation::AtMost, CONTROL_MAX, || {
        let bad = phase.clone().with_distortion(CONTROL_DISTORTION);
        let g = ChartGrid::new(&prod, &bad, bounds, [CONTROL_NODES; 3]).map_err(err_string)?;
        let flat = Amplitude::new(|_, _, _| C::new(1.0, 0.0), |_| 1.0);
        let rep = conjugated_residual_scaling(&flat, &bad, &g, &LowerOrder::zero(&g), cfg.m, &cfg.h_list).map_err(err_string)?;
        let slope = rep.slope.abs();
        control = Some(rep);
        Ok(slope)
    });
    let mut t = Table::new(&["h", "residual_norm", "control_norm"]);
    for (k, &h) in cfg.h_list.iter().enumerate() {
        let pick = |r: &Option<admissible::cgo::ScalingReport>| r.as_ref().map_or(f64::NAN, |r| r.norms[k]);
        t.push(vec![num(h), num(pick(&scaling)), num(pick(&control))]);
    }
    s.table("cgo_scaling", &t)?;
    if let Some(rep) = &scaling {
        let mut c = Table::new(&["power", "coefficient_norm"]);
        for (k, v) in rep.coefficient_norms.iter().enumerate() {
            c.push(vec![k.to_string(), num(*v)]);
        }
        s.table("cgo_coefficients", &c)?;
    }
    Ok(())
}
