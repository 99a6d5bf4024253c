use super::{err_string, rng_for};
use crate::config::ExperimentConfig;
use crate::report::{num, Relation, Session, Table};
use admissible::cgo::{carleman_ratio, ChartBox, ChartGrid, Phase};
use admissible::geometry::gallery;
use num_complex::Complex64 as C;
use rand::Rng;
use std::f64::consts::PI;
use std::io;

/// Empirical constant of the estimate; the observed minima sit far above it.
const RATIO_MIN: f64 = 0.3;

fn sine_bump(t: f64, a: f64, b: f64) -> f64 {
    if t <= a || t >= b {
        0.0
    } else {
        (PI * (t - a) / (b - a)).sin().powi(6)
    }
}

pub fn run(cfg: &ExperimentConfig, s: &mut Session) -> io::Result<()> {
    let setup = gallery::product(&cfg.metric_name, (-0.5, 0.5)).and_then(|prod| {
        let phase = Phase::new(prod.base(), Phase::default_center(), 1.0)?;
        let n = cfg.resolution.chart_nodes;
        ChartGrid::new(&prod, &phase, ChartBox::default(), [n; 3])
    });
    let grid = match setup {
        Ok(g) => g,
        Err(e) => {
            s.check("carleman.setup", Relation::Below, 0.0, || Err(e.to_string()));
            return Ok(());
        }
    };
    let mut rng = rng_for(cfg, 4);
    let mut t = Table::new(&["sample", "h", "ratio"]);
    s.check("carleman.min_ratio", Relation::AtLeast, RATIO_MIN, || {
        let mut worst = f64::INFINITY;
        for k in 0..cfg.samples {
            // supports stay clear of the four boundary layers of the default box
            let (c1, w1) = (rng.gen_range(-0.1..0.1), rng.gen_range(0.15..0.25));
            let (c2, w2) = (rng.gen_range(1.65..1.75), rng.gen_range(0.2..0.3));
            let (c3, w3) = (rng.gen_range(-0.03..0.03), rng.gen_range(0.08..0.12));
            let (freq, ph) = (rng.gen_range(0.0..6.0), rng.gen_range(0.0..2.0 * PI));
            let u = move |[x1, r, th]: [f64; 3]| {
                let env = sine_bump(x1, c1 - w1, c1 + w1) * sine_bump(r, c2 - w2, c2 + w2) * sine_bump(th, c3 - w3, c3 + w3);
                C::from_polar(env, freq * (x1 + r) + ph)
            };
            let rep = carleman_ratio(u, &grid, &cfg.h_list, 1).map_err(err_string)?;
            for (h, r) in rep.h.iter().zip(&rep.ratios) {
                t.push(vec![k.to_string(), num(*h), num(*r)]);
            }
            worst = worst.min(rep.min);
        }
        Ok(worst)
    });
    s.table("carleman", &t)
}
