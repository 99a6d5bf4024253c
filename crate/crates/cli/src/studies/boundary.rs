use super::err_string;
use crate::config::{ConfigError, ExperimentConfig};
use crate::report::{num, Relation, Session, Table};
use admissible::boundary::{recovery_round_trip, BoundaryNormalMetric, Jet, PerturbationJet, RecoveryRow};
use std::io;

const FLAT_TOL: f64 = 1e-10;
const CURVED_TOL: f64 = 1e-6;
const RELATION_TOL: f64 = 1e-8;
const CURVED_COEFFS: [f64; 5] = [0.35, -0.2, 0.15, 0.1, 0.08];

pub fn validate(cfg: &ExperimentConfig) -> Result<(), ConfigError> {
    if cfg.m < 2 {
        return Err(ConfigError(format!("boundary recovery needs m ≥ 2, got {}", cfg.m)));
    }
    Ok(())
}

fn points(n: usize, count: usize) -> Vec<Vec<f64>> {
    let step = if count > 1 { 0.75 / (count - 1) as f64 } else { 0.0 };
    (0..count)
        .map(|k| (0..n - 1).map(|j| -0.4 + step * k as f64 + 0.1 * j as f64).collect())
        .collect()
}

fn varying(m: usize) -> admissible::Result<PerturbationJet> {
    PerturbationJet::new(
        m,
        |x| {
            let n = x.len();
            let mut v: Vec<Jet> = (0..n).map(|k| (x[k] * (0.5 + k as f64)).sin() + (1.0 + k as f64)).collect();
            v[n - 1] = v[n - 1] + x[0] * x[n - 1] * 3.0;
            v
        },
        |x| (x[0] * 0.7).cos() * 2.0 + x[x.len() - 1] * 4.0,
    )
}

fn family(name: &str, n: usize, m: usize, pts: &[Vec<f64>]) -> admissible::Result<Vec<RecoveryRow>> {
    if name == "flat" {
        let x: Vec<f64> = (0..n).map(|k| 1.0 + k as f64 - 0.3 * (k * k) as f64).collect();
        recovery_round_trip(&BoundaryNormalMetric::flat(n)?, &PerturbationJet::constant(m, x, 2.5)?, pts)
    } else {
        recovery_round_trip(&BoundaryNormalMetric::polynomial(n, CURVED_COEFFS)?, &varying(m)?, pts)
    }
}

pub fn run(cfg: &ExperimentConfig, s: &mut Session) -> io::Result<()> {
    let mut t = Table::new(&["family", "n", "x1", "x2", "error", "relation_residual", "fit_residual", "q_spread"]);
    let mut relation: Result<f64, String> = Ok(0.0);
    for (fam, tol) in [("flat", FLAT_TOL), ("curved", CURVED_TOL)] {
        s.check(&format!("boundary.{fam}_recovery_error"), Relation::Below, tol, || {
            let mut worst = 0.0f64;
            for n in [2, 3] {
                let rows = family(fam, n, cfg.m, &points(n, cfg.resolution.boundary_points)).map_err(err_string);
                let rows = match rows {
                    Ok(r) => r,
                    Err(e) => {
                        relation = Err(e.clone());
                        return Err(e);
                    }
                };
                for r in rows {
                    worst = worst.max(r.error());
                    if let Ok(v) = relation.as_mut() {
                        *v = v.max(r.relation_residual);
                    }
                    let coord = |j: usize| r.point.get(j).map_or(String::new(), |v| num(*v));
                    t.push(vec![
                        fam.into(),
                        n.to_string(),
                        coord(0),
                        coord(1),
                        num(r.error()),
                        num(r.relation_residual),
                        num(r.recovered.fit_residual),
                        num(r.recovered.q_spread),
                    ]);
                }
            }
            Ok(worst)
        });
    }
    s.check("boundary.symbol_relation_residual", Relation::Below, RELATION_TOL, || relation);
    s.table("boundary_recovery", &t)
}
