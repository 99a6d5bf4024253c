//! Acceptance suite. Each criterion prints one `PASS`/`FAIL` line with the
//! measured value, the pinned tolerance and the wall time; the process exits
//! with status 1 if any criterion fails.

use admissible::boundary::{BoundaryNormalMetric, Jet, PerturbationJet, recovery_round_trip};
use admissible::cgo::{carleman_ratio, conjugated_residual_scaling, log_spaced, Amplitude, ChartBox, ChartGrid, LowerOrder, Phase};
use admissible::geometry::{gallery, shoot_geodesic, simplicity_diagnostics, InfluxGrid, Point2, UnitTangent};
use admissible::raytransform::{
    forward_t, kernel_pair, santalo_check, OneFormD, PairField, RayBundle, RayQuadrature, Regularity, SantaloResolution,
    ScalarFieldD, C64,
};
use admissible::recovery::{
    closedness_check, default_lambdas, gauge_vanishing_check, green_identity_check, observed_orders, potential_round_trip,
    ray_integral_check, FourierQuadrature, GaugeResolution, GreenProblem, Potential, SupportBox, VectorFieldM,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;
use std::time::{Duration, Instant};

const SEED: u64 = 0x5eed_2024;

struct Outcome {
    pass: bool,
    detail: String,
}

fn check(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn bump1(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

fn santalo_adjoint() -> Outcome {
    const DEFECT_TOL: f64 = 1e-5;
    const MIN_DROP: f64 = 8.0;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst = 0.0f64;
    let mut worst_drop = f64::INFINITY;
    let mut ok = true;
    for name in ["euclidean_disk", "conformal_bump"] {
        let m = gallery::metric(name).unwrap();
        let d = m.domain().clone();
        for _ in 0..5 {
            let (cx, cy, w) = (rng.gen_range(-0.4..0.4), rng.gen_range(-0.4..0.4), rng.gen_range(1.0..4.0));
            let (a1, a2, b) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.5..2.0));
            let (h1, h2, h3) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            let lambda = rng.gen_range(-0.5..0.5);
            let pair = PairField::new(
                ScalarFieldD::real(&d, move |x| (-w * ((x.x - cx).powi(2) + (x.y - cy).powi(2))).exp()),
                OneFormD::new(
                    &d,
                    move |x| [C64::new(a1 * x.y * x.y, a2), C64::new((b * x.x).sin(), a1 * x.x * x.y)],
                    Regularity::Smooth,
                ),
            );
            let h = move |s: f64, p: f64| {
                let env = bump1(p / 1.3);
                C64::new((1.0 + h1 * s.cos() + h2 * (2.0 * s).sin()) * env, h3 * s.sin() * env)
            };
            let res = SantaloResolution::default();
            let coarse = santalo_check(&m, lambda, &pair, &h, &res).unwrap();
            let fine = santalo_check(&m, lambda, &pair, &h, &res.refined()).unwrap();
            let drop = coarse.defect / fine.defect.max(1e-300);
            worst = worst.max(coarse.defect);
            worst_drop = worst_drop.min(drop);
            ok &= coarse.defect < DEFECT_TOL && drop >= MIN_DROP;
        }
    }
    check(
        ok,
        format!("max defect {worst:.3e} (tol {DEFECT_TOL:e}), min refinement drop {worst_drop:.1}x (tol {MIN_DROP}x)"),
    )
}

fn kernel_vanishing() -> Outcome {
    const RATIO_TOL: f64 = 1e-6;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 1);
    let mut worst = 0.0f64;
    for name in ["euclidean_disk", "conformal_bump"] {
        let m = gallery::metric(name).unwrap();
        let d = m.domain().clone();
        let bundle = RayBundle::trace(&m, Arc::new(InfluxGrid::new(&m, 48, 24).unwrap()), 1e-12);
        let quad = RayQuadrature::with_step(0.05);
        for _ in 0..5 {
            // p = (1 − |x|²)(a + b x + c y + e sin(k x y))
            let (a, b, c, e, k) = (
                rng.gen_range(0.5..1.5),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(-1.0..1.0),
                rng.gen_range(1.0..3.0),
            );
            let inner = move |x: &Point2| a + b * x.x + c * x.y + e * (k * x.x * x.y).sin();
            let p = ScalarFieldD::real(&d, move |x| (1.0 - x.norm_squared()) * inner(x)).with_gradient(move |x| {
                let w = 1.0 - x.norm_squared();
                let ck = e * k * (k * x.x * x.y).cos();
                [
                    C64::new(-2.0 * x.x * inner(x) + w * (b + ck * x.y), 0.0),
                    C64::new(-2.0 * x.y * inner(x) + w * (c + ck * x.x), 0.0),
                ]
            });
            for lambda in [-0.3, 0.0, 0.3] {
                let num = bundle.transform(lambda, &kernel_pair(lambda, &p).unwrap(), &quad);
                let den = bundle.transform(lambda, &PairField::function_only(p.clone()), &quad);
                worst = worst.max(num.norm() / den.norm());
            }
        }
    }
    check(worst < RATIO_TOL, format!("max ‖T[−λp, dp]‖/‖T[p, 0]‖ {worst:.3e} (tol {RATIO_TOL:e})"))
}

fn fan_beam_values() -> Outcome {
    const TOL: f64 = 1e-9;
    let m = gallery::metric("euclidean_disk").unwrap();
    let d = m.domain().clone();
    let grid = Arc::new(InfluxGrid::new(&m, 32, 16).unwrap());
    let quad = RayQuadrature::per_ray(64);
    let one = PairField::function_only(ScalarFieldD::real(&d, |_| 1.0));
    let dx1 = PairField::form_only(OneFormD::new(&d, |_| [C64::new(1.0, 0.0), C64::default()], Regularity::Smooth));
    let mut worst = 0.0f64;
    for lambda in [0.0, 0.25, 0.7, -0.4] {
        let a = forward_t(&m, lambda, &one, grid.clone(), &quad);
        let b = forward_t(&m, lambda, &dx1, grid.clone(), &quad);
        for (k, n) in grid.nodes().iter().enumerate() {
            let l = -2.0 * n.x.dot(&n.v);
            let exact = if lambda == 0.0 { l } else { (1.0 - (-lambda * l).exp()) / lambda };
            worst = worst.max((a.values[k] - exact).norm());
            worst = worst.max((b.values[k] - exact * n.v.x).norm());
        }
    }
    check(worst < TOL, format!("max deviation from closed forms {worst:.3e} (tol {TOL:e})"))
}

fn cgo_scaling() -> Outcome {
    const SLOPE_MIN: f64 = 2.8;
    const CONTROL_MAX: f64 = 0.2;
    let h = log_spaced(0.01, 0.1, 8);
    let mut min_slope = f64::INFINITY;
    let mut max_control = 0.0f64;
    for name in ["euclidean_disk", "conformal_bump"] {
        let prod = gallery::product(name, (-0.5, 0.5)).unwrap();
        let phase = Phase::new(prod.base(), Phase::default_center(), 1.0).unwrap();
        let grid = ChartGrid::new(&prod, &phase, ChartBox::default(), [33; 3]).unwrap();
        let amp = Amplitude::exponential(&phase, 1.0, |t| (2.0 * t).cos());
        let lower = LowerOrder::from_fn(
            &grid,
            |[x1, r, th]| [C64::new(0.3 * r.sin(), x1), C64::new(0.2, 0.1 * th), C64::new(x1 * th, 0.0)],
            |[x1, r, _]| C64::new(1.0 + x1 * r, 0.5),
        );
        let rep = conjugated_residual_scaling(&amp, &phase, &grid, &lower, 2, &h).unwrap();
        min_slope = min_slope.min(rep.slope);

        let bad = phase.clone().with_distortion(0.5);
        let bad_grid = ChartGrid::new(&prod, &bad, ChartBox::default(), [17; 3]).unwrap();
        let flat_amp = Amplitude::new(|_, _, _| C64::new(1.0, 0.0), |_| 1.0);
        let ctl = conjugated_residual_scaling(&flat_amp, &bad, &bad_grid, &LowerOrder::zero(&bad_grid), 2, &h).unwrap();
        max_control = max_control.max(ctl.slope.abs());
    }
    check(
        min_slope >= SLOPE_MIN && max_control <= CONTROL_MAX,
        format!("min slope {min_slope:.3} (≥ {SLOPE_MIN}), eikonal-violating control |slope| {max_control:.3} (≤ {CONTROL_MAX})"),
    )
}

fn carleman_estimate() -> Outcome {
    const RATIO_MIN: f64 = 0.3;
    let prod = gallery::product("euclidean_disk", (-0.5, 0.5)).unwrap();
    let phase = Phase::new(prod.base(), Phase::default_center(), 1.0).unwrap();
    let grid = ChartGrid::new(&prod, &phase, ChartBox::default(), [33; 3]).unwrap();
    let h = log_spaced(0.01, 0.1, 8);
    let sine_bump = |t: f64, a: f64, b: f64| {
        if t <= a || t >= b {
            0.0
        } else {
            (PI * (t - a) / (b - a)).sin().powi(6)
        }
    };
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 4);
    let mut worst = f64::INFINITY;
    for _ in 0..5 {
        let (c1, w1) = (rng.gen_range(-0.1..0.1), rng.gen_range(0.15..0.25));
        let (c2, w2) = (rng.gen_range(1.65..1.75), rng.gen_range(0.2..0.3));
        let (c3, w3) = (rng.gen_range(-0.03..0.03), rng.gen_range(0.08..0.12));
        let (k, ph) = (rng.gen_range(0.0..6.0), rng.gen_range(0.0..2.0 * PI));
        let u = move |[x1, r, th]: [f64; 3]| {
            let env = sine_bump(x1, c1 - w1, c1 + w1) * sine_bump(r, c2 - w2, c2 + w2) * sine_bump(th, c3 - w3, c3 + w3);
            C64::from_polar(env, k * (x1 + r) + ph)
        };
        worst = worst.min(carleman_ratio(u, &grid, &h, 1).unwrap().min);
    }
    check(worst >= RATIO_MIN, format!("min ‖P_φu‖/(h‖u‖) {worst:.3} (≥ {RATIO_MIN})"))
}

fn boundary_recovery() -> Outcome {
    const FLAT_TOL: f64 = 1e-10;
    const CURVED_TOL: f64 = 1e-6;
    const RELATION_TOL: f64 = 1e-8;
    let mut flat_err = 0.0f64;
    let mut curved_err = 0.0f64;
    let mut relation = 0.0f64;
    for (n, m) in [(2, 2), (3, 2), (3, 3)] {
        let points: Vec<Vec<f64>> = (0..6).map(|k| (0..n - 1).map(|j| -0.4 + 0.15 * k as f64 + 0.1 * j as f64).collect()).collect();
        let x_const: Vec<f64> = (0..n).map(|k| 1.0 + k as f64 - 0.3 * (k * k) as f64).collect();
        let flat = PerturbationJet::constant(m, x_const, 2.5).unwrap();
        for r in recovery_round_trip(&BoundaryNormalMetric::flat(n).unwrap(), &flat, &points).unwrap() {
            flat_err = flat_err.max(r.error());
            relation = relation.max(r.relation_residual);
        }
        let varying = PerturbationJet::new(
            m,
            |x| {
                let n = x.len();
                let mut v: Vec<Jet> = (0..n).map(|k| (x[k] * (0.5 + k as f64)).sin() + (1.0 + k as f64)).collect();
                v[n - 1] = v[n - 1] + x[0] * x[n - 1] * 3.0;
                v
            },
            |x| (x[0] * 0.7).cos() * 2.0 + x[x.len() - 1] * 4.0,
        )
        .unwrap();
        let metric = BoundaryNormalMetric::polynomial(n, [0.35, -0.2, 0.15, 0.1, 0.08]).unwrap();
        for r in recovery_round_trip(&metric, &varying, &points).unwrap() {
            curved_err = curved_err.max(r.error());
            relation = relation.max(r.relation_residual);
        }
    }
    check(
        flat_err < FLAT_TOL && curved_err < CURVED_TOL && relation < RELATION_TOL,
        format!(
            "flat error {flat_err:.3e} (tol {FLAT_TOL:e}), curved error {curved_err:.3e} (tol {CURVED_TOL:e}), relations {relation:.3e} (tol {RELATION_TOL:e})"
        ),
    )
}

fn gauge_pipeline() -> Outcome {
    const RAY_TOL: f64 = 1e-7;
    const RESIDUAL_TOL: f64 = 1e-6;
    const CONTROL_MIN: f64 = 1e-2;
    let prod = gallery::product("conformal_bump", (-1.0, 1.0)).unwrap();
    let s = SupportBox {
        x1: (-0.5, 0.6),
        center: Point2::new(0.1, -0.05),
        radius: 0.55,
    };
    let small = SupportBox {
        x1: (-0.3, 0.2),
        center: Point2::new(-0.2, 0.15),
        radius: 0.4,
    };
    let phis = [
        Potential::bump(&prod, s, C64::new(0.8, -0.3), 8),
        Potential::bump(&prod, small, C64::new(-0.5, 1.0), 7),
        Potential::bump(&prod, s, C64::new(1.0, 0.0), 8).sum(&Potential::bump(
            &prod,
            SupportBox {
                center: Point2::new(0.25, -0.2),
                radius: 0.35,
                ..small
            },
            C64::new(0.0, 2.0),
            9,
        )),
    ];
    let lambdas = default_lambdas();
    let res = GaugeResolution::default();
    let (mut rays, mut closed, mut round) = (0.0f64, 0.0f64, 0.0f64);
    for phi in &phis {
        rays = rays.max(gauge_vanishing_check(phi, &lambdas, &res).unwrap().max());
        closed = closed.max(closedness_check(&VectorFieldM::gradient(phi), &lambdas, 120, &res.fourier).unwrap().max());
        round = round.max(potential_round_trip(phi, 40).unwrap().max());
    }
    let b = Potential::bump(&prod, s, C64::new(2.0, 0.0), 8);
    let rotational = VectorFieldM::from_flat(
        &prod,
        move |x| {
            let v = b.value(x);
            [C64::default(), -v * (x.z - s.center.y) / s.radius, v * (x.y - s.center.x) / s.radius]
        },
        Some(s),
    );
    let control = ray_integral_check(&rotational, &[-0.3, 0.0, 0.3], &GaugeResolution { fourier: FourierQuadrature::default(), ..res })
        .unwrap()
        .max();
    check(
        rays < RAY_TOL && closed < RESIDUAL_TOL && round < RESIDUAL_TOL && control >= CONTROL_MIN,
        format!(
            "ray integrals {rays:.3e} (tol {RAY_TOL:e}), closedness {closed:.3e}, potential round trip {round:.3e} (tol {RESIDUAL_TOL:e}), non-gradient control {control:.3e} (≥ {CONTROL_MIN:e})"
        ),
    )
}

fn green_identity() -> Outcome {
    const DEFECT_TOL: f64 = 1e-6;
    const ORDER: f64 = 4.0;
    const ORDER_SLACK: f64 = 0.5;
    let p = GreenProblem::new(
        vec![(-0.6, 0.6); 2],
        |x| DMatrix::identity(2, 2) * (1.0 + 0.2 * (-(x[0] * x[0] + x[1] * x[1])).exp()),
        2,
        |x| vec![C64::new(0.5 + x[1], 0.3 * x[0]), C64::new(x[0].sin(), -0.2)],
        |x| C64::new(1.0 + x[0] * x[1], 0.4),
        |x| C64::new((1.5 * x[0] - x[1]).cos(), 0.5 * x[1]),
        |x| C64::new((x[0] + 0.7 * x[1]).exp(), (2.0 * x[1]).sin()),
    );
    let reps: Vec<_> = [65, 129, 257].iter().map(|&n| green_identity_check(&p, n).unwrap()).collect();
    let order = observed_orders(&reps)[1];
    check(
        reps[1].defect < DEFECT_TOL && (order - ORDER).abs() < ORDER_SLACK,
        format!(
            "defect at 129² {:.3e} (tol {DEFECT_TOL:e}), observed order {order:.2} (target {ORDER} ± {ORDER_SLACK})",
            reps[1].defect
        ),
    )
}

fn geometry() -> Outcome {
    const DRIFT_TOL: f64 = 1e-10;
    let mut drift = 0.0f64;
    let mut verdicts = Vec::new();
    let mut ok = true;
    for name in gallery::NAMES {
        let m = gallery::metric(name).unwrap();
        let report = simplicity_diagnostics(&m, 16).unwrap();
        let expect = name != "sphere_cap_large";
        ok &= report.pass == expect;
        verdicts.push(format!("{name}={}", if report.pass { "simple" } else { "not simple" }));
        if expect {
            for n in InfluxGrid::new(&m, 24, 12).unwrap().nodes() {
                let path = shoot_geodesic(&m, &UnitTangent::new(&m, n.x, n.v).unwrap(), 1e-12).unwrap();
                drift = drift.max(path.energy_drift(&m) / path.tau);
            }
        }
    }
    ok &= drift < DRIFT_TOL;
    check(ok, format!("energy drift per unit length {drift:.3e} (tol {DRIFT_TOL:e}); {}", verdicts.join(", ")))
}

fn main() {
    let criteria: [(&str, Duration, fn() -> Outcome); 9] = [
        ("santalo adjoint identity", Duration::from_secs(120), santalo_adjoint),
        ("kernel vanishing", Duration::from_secs(60), kernel_vanishing),
        ("fan-beam analytic values", Duration::from_secs(60), fan_beam_values),
        ("cgo conjugated scaling", Duration::from_secs(300), cgo_scaling),
        ("carleman L2 ratio", Duration::from_secs(60), carleman_estimate),
        ("boundary recovery round trip", Duration::from_secs(60), boundary_recovery),
        ("gauge pipeline", Duration::from_secs(180), gauge_pipeline),
        ("green identity", Duration::from_secs(120), green_identity),
        ("geometry", Duration::from_secs(60), geometry),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (k, (name, budget, run)) in criteria.iter().enumerate() {
        if !filter.is_empty() && !filter.iter().any(|f| name.contains(f.as_str())) {
            continue;
        }
        let t = Instant::now();
        let out = run();
        let elapsed = t.elapsed();
        let pass = out.pass && elapsed <= *budget;
        if !pass {
            failed += 1;
        }
        println!(
            "{} criterion {}: {name}: {}; runtime {:.1}s (budget {}s)",
            if pass { "PASS" } else { "FAIL" },
            k + 1,
            out.detail,
            elapsed.as_secs_f64(),
            budget.as_secs()
        );
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
