use super::{err_string, rng_for};
use crate::config::ExperimentConfig;
use crate::report::{num, Relation, Session, Table};
use admissible::geometry::{gallery, shoot_geodesic, simplicity_diagnostics, InfluxGrid, MetricField2D, UnitTangent};
use admissible::raytransform::{
    forward_t, santalo_check, OneFormD, PairField, RayQuadrature, Regularity, SantaloResolution, ScalarFieldD, C64,
};
use rand::Rng;
use std::io;
use std::sync::Arc;

const DRIFT_TOL: f64 = 1e-10;
const CLOSED_FORM_TOL: f64 = 1e-9;
const SANTALO_TOL: f64 = 1e-5;
const REFINEMENT_DROP: f64 = 8.0;

fn resolution(cfg: &ExperimentConfig) -> SantaloResolution {
    let r = &cfg.resolution;
    SantaloResolution {
        n_s: r.influx_s,
        n_phi: r.influx_phi,
        n_rho: r.domain_rho,
        n_theta: r.domain_theta,
        sphere_nodes: r.sphere_nodes,
        quad: RayQuadrature::with_step(r.ray_step),
    }
}

fn fiber_bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

fn sample_pair(metric: &MetricField2D) -> PairField {
    let d = metric.domain().clone();
    PairField::new(
        ScalarFieldD::real(&d, |x| (-3.0 * (x.x - 0.2).powi(2) - 2.0 * (x.y + 0.1).powi(2)).exp()),
        OneFormD::new(&d, |x| [C64::new(x.y * x.y, 0.1), C64::new(x.x.sin(), 0.0)], Regularity::Smooth),
    )
}

fn geodesics(metric: &MetricField2D, s: &mut Session) -> io::Result<()> {
    let grid = InfluxGrid::new(metric, 24, 12);
    let mut table = Table::new(&["ray", "t", "x1", "x2", "v1", "v2"]);
    let mut paths = Vec::new();
    s.check("transform.energy_drift_per_length", Relation::Below, DRIFT_TOL, || {
        let grid = grid.map_err(err_string)?;
        let mut drift = 0.0f64;
        for n in grid.nodes() {
            let start = UnitTangent::new(metric, n.x, n.v).map_err(err_string)?;
            let path = shoot_geodesic(metric, &start, 1e-12).map_err(err_string)?;
            drift = drift.max(path.energy_drift(metric) / path.tau);
            paths.push(path);
        }
        Ok(drift)
    });
    for (k, p) in paths.iter().step_by(37).enumerate() {
        for q in &p.samples {
            table.push(vec![k.to_string(), num(q.t), num(q.x.x), num(q.x.y), num(q.v.x), num(q.v.y)]);
        }
    }
    s.table("transform_geodesics", &table)
}

pub fn run(cfg: &ExperimentConfig, s: &mut Session) -> io::Result<()> {
    let metric = match gallery::metric(&cfg.metric_name) {
        Ok(m) => m,
        Err(e) => {
            s.check("transform.metric", Relation::Below, 0.0, || Err(e.to_string()));
            return Ok(());
        }
    };
    s.check("transform.simplicity_margin", Relation::AtLeast, f64::MIN_POSITIVE, || {
        let r = simplicity_diagnostics(&metric, 16).map_err(err_string)?;
        Ok(r.jacobi_margin.min(r.convexity_margin))
    });
    geodesics(&metric, s)?;

    let res = resolution(cfg);
    let grid = match InfluxGrid::new(&metric, res.n_s, res.n_phi) {
        Ok(g) => Arc::new(g),
        Err(e) => {
            s.check("transform.influx_grid", Relation::Below, 0.0, || Err(e.to_string()));
            return Ok(());
        }
    };
    let pair = sample_pair(&metric);
    let mut fwd = Table::new(&["lambda", "s", "phi", "re", "im", "valid"]);
    for &lambda in &cfg.lambda_list {
        let data = forward_t(&metric, lambda, &pair, grid.clone(), &res.quad);
        for (n, (v, ok)) in grid.nodes().iter().zip(data.values.iter().zip(&data.valid)) {
            fwd.push(vec![num(lambda), num(n.s), num(n.phi), num(v.re), num(v.im), ok.to_string()]);
        }
    }
    s.table("transform_forward", &fwd)?;

    if cfg.metric_name == "euclidean_disk" {
        s.check("transform.fan_beam_closed_form", Relation::Below, CLOSED_FORM_TOL, || {
            let d = metric.domain().clone();
            let one = PairField::function_only(ScalarFieldD::real(&d, |_| 1.0));
            let quad = RayQuadrature::per_ray(64);
            let mut worst = 0.0f64;
            for &lambda in &cfg.lambda_list {
                let data = forward_t(&metric, lambda, &one, grid.clone(), &quad);
                for (n, v) in grid.nodes().iter().zip(&data.values) {
                    let l = -2.0 * n.x.dot(&n.v);
                    let exact = if lambda == 0.0 { l } else { (1.0 - (-lambda * l).exp()) / lambda };
                    worst = worst.max((v - exact).norm());
                }
            }
            Ok(worst)
        });
    }

    let mut rng = rng_for(cfg, 1);
    let d = metric.domain().clone();
    let mut table = Table::new(&["couple", "lambda", "defect", "refined_defect", "lhs_re", "lhs_im", "rhs_re", "rhs_im"]);
    let mut drops = Vec::new();
    for k in 0..cfg.samples {
        let (cx, cy, w) = (rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4), rng.gen_range(1.0..4.0));
        let (a1, a2, b) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.5..2.0));
        let (h1, h2, h3) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
        let lambda = cfg.lambda_list[k % cfg.lambda_list.len()];
        let pair = PairField::new(
            ScalarFieldD::real(&d, move |x| (-w * ((x.x - cx).powi(2) + (x.y - cy).powi(2))).exp()),
            OneFormD::new(
                &d,
                move |x| [C64::new(a1 * x.y * x.y, a2), C64::new((b * x.x).sin(), a1 * x.x * x.y)],
                Regularity::Smooth,
            ),
        );
        let h = move |s: f64, p: f64| {
            let env = fiber_bump(p / 1.3);
            C64::new((1.0 + h1 * s.cos() + h2 * (2.0 * s).sin()) * env, h3 * s.sin() * env)
        };
        let mut row = None;
        s.check(&format!("transform.santalo_defect[{k}]"), Relation::Below, SANTALO_TOL, || {
            let coarse = santalo_check(&metric, lambda, &pair, &h, &res).map_err(err_string)?;
            let fine = santalo_check(&metric, lambda, &pair, &h, &res.refined()).map_err(err_string)?;
            row = Some((coarse, fine));
            Ok(coarse.defect)
        });
        if let Some((c, f)) = row {
            drops.push(c.defect / f.defect.max(f64::MIN_POSITIVE));
            table.push(vec![
                k.to_string(),
                num(lambda),
                num(c.defect),
                num(f.defect),
                num(c.lhs.re),
                num(c.lhs.im),
                num(c.rhs.re),
                num(c.rhs.im),
            ]);
        }
    }
    s.check("transform.santalo_refinement_drop", Relation::AtLeast, REFINEMENT_DROP, || {
        drops
            .iter()
            .copied()
            .reduce(f64::min)
            .ok_or_else(|| "no duality check completed".to_string())
    });
    s.table("transform_santalo", &table)
}
