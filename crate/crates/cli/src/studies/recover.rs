use super::{err_string, rng_for};
use crate::config::ExperimentConfig;
use crate::report::{num, Relation, Session, Table};
use admissible::geometry::{gallery, ConformalProduct, Point2};
use admissible::recovery::{
    gauge_pipeline, green_identity_check, observed_orders, ray_integral_check, FourierQuadrature, GaugeResolution,
    GreenProblem, Potential, SupportBox, VectorFieldM,
};
use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use rand::Rng;
use std::io;

const RAY_TOL: f64 = 1e-7;
const RESIDUAL_TOL: f64 = 1e-6;
const CONTROL_MIN: f64 = 1e-2;
const GREEN_TOL: f64 = 1e-6;
const GREEN_ORDER: f64 = 4.0;
const ORDER_SLACK: f64 = 0.5;

const SUPPORT: SupportBox = SupportBox {
    x1: (-0.5, 0.6),
    center: Point2::new(0.1, -0.05),
    radius: 0.55,
};
const SMALL: SupportBox = SupportBox {
    x1: (-0.3, 0.2),
    center: Point2::new(-0.2, 0.15),
    radius: 0.4,
};

fn potentials(prod: &ConformalProduct, cfg: &ExperimentConfig) -> Vec<Potential> {
    let mut rng = rng_for(cfg, 6);
    let mut amp = || C::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    let (a, b, c, d) = (amp(), amp(), amp(), amp());
    vec![
        Potential::bump(prod, SUPPORT, a, 8),
        Potential::bump(prod, SMALL, b, 7),
        Potential::bump(prod, SUPPORT, c, 8).sum(&Potential::bump(
            prod,
            SupportBox {
                center: Point2::new(0.25, -0.2),
                radius: 0.35,
                ..SMALL
            },
            d,
            9,
        )),
    ]
}

/// `X♭ = b · (0, −(y₂ − c₂), y₁ − c₁)/radius`, closed only when `b` is constant.
fn rotational(prod: &ConformalProduct) -> VectorFieldM {
    let b = Potential::bump(prod, SUPPORT, C::new(2.0, 0.0), 8);
    VectorFieldM::from_flat(
        prod,
        move |x| {
            let v = b.value(x);
            [C::default(), -v * (x.z - SUPPORT.center.y) / SUPPORT.radius, v * (x.y - SUPPORT.center.x) / SUPPORT.radius]
        },
        Some(SUPPORT),
    )
}

fn gauge(cfg: &ExperimentConfig, s: &mut Session) -> io::Result<()> {
    let r = &cfg.resolution;
    let res = GaugeResolution {
        n_s: r.gauge_s,
        n_phi: r.gauge_phi,
        ray_step: r.gauge_ray_step,
        fourier: FourierQuadrature {
            panels: r.fourier_panels,
            ..FourierQuadrature::default()
        },
    };
    let prod = match gallery::product(&cfg.metric_name, (-1.0, 1.0)) {
        Ok(p) => p,
        Err(e) => {
            s.check("recover.setup", Relation::Below, 0.0, || Err(e.to_string()));
            return Ok(());
        }
    };
    let mut t = Table::new(&["potential", "lambda", "max_ray_integral", "closedness_residual", "potential_roundtrip_defect"]);
    let mut worst: Result<[f64; 3], String> = Ok([0.0; 3]);
    for (k, phi) in potentials(&prod, cfg).iter().enumerate() {
        match gauge_pipeline(phi, &cfg.lambda_list, &res) {
            Ok(rows) => {
                for row in rows {
                    if let Ok(w) = worst.as_mut() {
                        w[0] = w[0].max(row.max_ray_integral);
                        w[1] = w[1].max(row.closedness_residual);
                        w[2] = w[2].max(row.potential_roundtrip_defect);
                    }
                    t.push(vec![
                        k.to_string(),
                        num(row.lambda),
                        num(row.max_ray_integral),
                        num(row.closedness_residual),
                        num(row.potential_roundtrip_defect),
                    ]);
                }
            }
            Err(e) => worst = Err(e.to_string()),
        }
    }
    let pick = |i: usize| worst.clone().map(|w| w[i]);
    s.check("recover.gradient_ray_integrals", Relation::Below, RAY_TOL, || pick(0));
    s.check("recover.closedness_residual", Relation::Below, RESIDUAL_TOL, || pick(1));
    s.check("recover.potential_round_trip", Relation::Below, RESIDUAL_TOL, || pick(2));
    s.check("recover.non_gradient_control", Relation::AtLeast, CONTROL_MIN, || {
        ray_integral_check(&rotational(&prod), &cfg.lambda_list, &res).map(|r| r.max()).map_err(err_string)
    });
    s.table("recover_pipeline", &t)
}

fn green(cfg: &ExperimentConfig, s: &mut Session) -> io::Result<()> {
    let metric = match gallery::metric(&cfg.metric_name) {
        Ok(m) => m,
        Err(e) => {
            s.check("recover.green_setup", Relation::Below, 0.0, || Err(e.to_string()));
            return Ok(());
        }
    };
    let p = GreenProblem::new(
        vec![(-0.6, 0.6); 2],
        move |x| {
            let g = metric.g(&Point2::new(x[0], x[1]));
            DMatrix::from_fn(2, 2, |i, j| g[(i, j)])
        },
        cfg.m,
        |x| vec![C::new(0.5 + x[1], 0.3 * x[0]), C::new(x[0].sin(), -0.2)],
        |x| C::new(1.0 + x[0] * x[1], 0.4),
        |x| C::new((1.5 * x[0] - x[1]).cos(), 0.5 * x[1]),
        |x| C::new((x[0] + 0.7 * x[1]).exp(), (2.0 * x[1]).sin()),
    );
    let n = cfg.resolution.green_nodes;
    let sizes = [n.div_ceil(2), n, 2 * n - 1];
    let reports: Result<Vec<_>, String> = sizes.iter().map(|&k| green_identity_check(&p, k).map_err(err_string)).collect();
    let mut t = Table::new(&["n", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "defect"]);
    if let Ok(reps) = &reports {
        for r in reps {
            t.push(vec![r.n.to_string(), num(r.lhs.re), num(r.lhs.im), num(r.rhs.re), num(r.rhs.im), num(r.defect)]);
        }
    }
    s.check("recover.green_defect", Relation::Below, GREEN_TOL, || reports.clone().map(|r| r[1].defect));
    s.check("recover.green_order_error", Relation::Below, ORDER_SLACK, || {
        reports.clone().map(|r| (observed_orders(&r)[1] - GREEN_ORDER).abs())
    });
    s.table("recover_green", &t)
}

pub fn run(cfg: &ExperimentConfig, s: &mut Session) -> io::Result<()> {
    gauge(cfg, s)?;
    green(cfg, s)
}
