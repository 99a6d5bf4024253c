use super::{err_string, rng_for};
use crate::config::ExperimentConfig;
use crate::report::{num, Relation, Session, Table};
use admissible::geometry::{gallery, InfluxGrid, Point2};
use admissible::raytransform::{
    conditioning_study, default_basis, kernel_pair, PairField, RayBundle, RayQuadrature, ScalarFieldD, C64,
};
use rand::Rng;
use std::io;
use std::sync::Arc;

const RATIO_TOL: f64 = 1e-6;
/// Relative size of the smallest singular value on the basis without a
/// kernel direction, and with one appended.
const CLEAN_FLOOR: f64 = 1e-3;
const COLLAPSE_CEILING: f64 = 1e-8;
const BASIS_SIZE: usize = 8;

/// `p = (1 − |x|²)(a + b x + c y + e sin(k x y))` with its exact gradient.
fn potential(rng: &mut impl Rng, d: &admissible::geometry::StarDomain) -> ScalarFieldD {
    let (a, b, c, e, k) = (
        rng.gen_range(0.5..1.5),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(1.0..3.0),
    );
    let inner = move |x: &Point2| a + b * x.x + c * x.y + e * (k * x.x * x.y).sin();
    ScalarFieldD::real(d, move |x| (1.0 - x.norm_squared()) * inner(x)).with_gradient(move |x| {
        let w = 1.0 - x.norm_squared();
        let ck = e * k * (k * x.x * x.y).cos();
        [
            C64::new(-2.0 * x.x * inner(x) + w * (b + ck * x.y), 0.0),
            C64::new(-2.0 * x.y * inner(x) + w * (c + ck * x.x), 0.0),
        ]
    })
}

pub fn run(cfg: &ExperimentConfig, s: &mut Session) -> io::Result<()> {
    let r = &cfg.resolution;
    let setup = gallery::metric(&cfg.metric_name).and_then(|m| {
        let g = InfluxGrid::new(&m, r.influx_s, r.influx_phi)?;
        Ok((m, g))
    });
    let (metric, grid) = match setup {
        Ok(v) => v,
        Err(e) => {
            s.check("kernel.setup", Relation::Below, 0.0, || Err(e.to_string()));
            return Ok(());
        }
    };
    let bundle = RayBundle::trace(&metric, Arc::new(grid), 1e-12);
    let quad = RayQuadrature::with_step(r.ray_step.min(0.05));
    let d = metric.domain().clone();
    let mut rng = rng_for(cfg, 2);
    let potentials: Vec<ScalarFieldD> = (0..cfg.samples).map(|_| potential(&mut rng, &d)).collect();

    let mut ratios = Table::new(&["sample", "lambda", "ratio"]);
    s.check("kernel.ratio", Relation::Below, RATIO_TOL, || {
        if bundle.invalid_count() > 0 {
            return Err(format!("{} rays failed", bundle.invalid_count()));
        }
        let mut worst = 0.0f64;
        for (k, p) in potentials.iter().enumerate() {
            for &lambda in &cfg.lambda_list {
                let num_data = bundle.transform(lambda, &kernel_pair(lambda, p).map_err(err_string)?, &quad);
                let den = bundle.transform(lambda, &PairField::function_only(p.clone()), &quad);
                let ratio = num_data.norm() / den.norm();
                worst = worst.max(ratio);
                ratios.push(vec![k.to_string(), num(lambda), num(ratio)]);
            }
        }
        Ok(worst)
    });
    s.table("kernel_ratios", &ratios)?;

    let mut sv = Table::new(&["lambda", "basis", "index", "singular_value"]);
    let basis = default_basis(&metric, BASIS_SIZE);
    let mut clean = f64::INFINITY;
    let mut collapsed = 0.0f64;
    let mut failure = None;
    for &lambda in &cfg.lambda_list {
        let mut with_kernel = basis.clone();
        match kernel_pair(lambda, &potentials[0]) {
            Ok(k) => with_kernel.push(k),
            Err(e) => failure = Some(e.to_string()),
        }
        for (tag, b) in [("clean", &basis), ("with_kernel", &with_kernel)] {
            match conditioning_study(&bundle, lambda, b, &quad) {
                Ok(rep) => {
                    let rel = rep.smallest() / rep.singular_values[0];
                    if tag == "clean" {
                        clean = clean.min(rel);
                    } else {
                        collapsed = collapsed.max(rel);
                    }
                    for (i, v) in rep.singular_values.iter().enumerate() {
                        sv.push(vec![num(lambda), tag.into(), i.to_string(), num(*v)]);
                    }
                }
                Err(e) => failure = Some(e.to_string()),
            }
        }
    }
    let outcome = |v: f64| failure.clone().map_or(Ok(v), Err);
    s.check("kernel.clean_basis_smallest_singular", Relation::AtLeast, CLEAN_FLOOR, || outcome(clean));
    s.check("kernel.kernel_direction_smallest_singular", Relation::Below, COLLAPSE_CEILING, || outcome(collapsed));
    s.table("kernel_conditioning", &sv)
}
