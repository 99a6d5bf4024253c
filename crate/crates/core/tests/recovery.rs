use admissible::geometry::{gallery, Point2};
use admissible::recovery::*;
use nalgebra::DMatrix;
use num_complex::Complex64 as C;
use proptest::prelude::*;

fn support() -> SupportBox {
    SupportBox {
        x1: (-0.5, 0.6),
        center: Point2::new(0.1, -0.05),
        radius: 0.55,
    }
}

fn potentials(metric: &str) -> Vec<Potential> {
    let prod = gallery::product(metric, (-1.0, 1.0)).unwrap();
    let s = support();
    let a = Potential::bump(&prod, s, C::new(0.8, -0.3), 8);
    let small = SupportBox {
        x1: (-0.3, 0.2),
        center: Point2::new(-0.2, 0.15),
        radius: 0.4,
    };
    let b = Potential::bump(&prod, small, C::new(-0.5, 1.0), 7);
    let c = a.sum(&Potential::bump(&prod, SupportBox { center: Point2::new(0.25, -0.2), radius: 0.35, ..small }, C::new(0.0, 2.0), 9));
    vec![a, b, c]
}

fn rotational(metric: &str) -> VectorFieldM {
    let prod = gallery::product(metric, (-1.0, 1.0)).unwrap();
    let s = support();
    let bump = Potential::bump(&prod, s, C::new(2.0, 0.0), 8);
    VectorFieldM::from_flat(
        &prod,
        move |x| {
            let b = bump.value(x);
            [C::default(), -b * (x.z - s.center.y) / s.radius, b * (x.y - s.center.x) / s.radius]
        },
        Some(s),
    )
}

#[test]
fn gradient_fields_pass_the_whole_pipeline() {
    let lambdas = default_lambdas();
    for metric in ["euclidean_disk", "conformal_bump"] {
        for phi in potentials(metric) {
            let rows = gauge_pipeline(&phi, &lambdas, &GaugeResolution::default()).unwrap();
            for r in &rows {
                assert!(r.max_ray_integral < 1e-7, "{metric}: {r:?}");
                assert!(r.closedness_residual < 1e-6, "{metric}: {r:?}");
                assert!(r.potential_roundtrip_defect < 1e-6, "{metric}: {r:?}");
            }
        }
    }
}

#[test]
fn rotational_field_is_seen_by_rays() {
    let x = rotational("conformal_bump");
    let rep = ray_integral_check(&x, &[-0.3, 0.0, 0.3], &GaugeResolution::default()).unwrap();
    assert!(rep.max() >= 1e-2, "{rep:?}");
    let closed = closedness_check(&x, &[0.0], 60, &FourierQuadrature::default()).unwrap();
    assert!(closed.form > 1e-2, "{closed:?}");
}

#[test]
fn non_closed_form_is_rejected() {
    let form = |x: &[f64]| vec![C::new(-x[1], 0.0), C::new(x[0], 0.0)];
    let targets = vec![vec![0.5, 0.5], vec![-0.3, 0.7]];
    assert!(matches!(
        integrate_potential(&form, &[0.0, 0.0], &targets, 1e-8),
        Err(admissible::error::Error::NotClosed(_))
    ));
}

#[test]
fn q_slice_is_analytic_in_lambda() {
    // d/dλ Q_λ = ∫ i x₁ e^{iλx₁} q c dx₁, compared with a centered difference
    let prod = gallery::product("conformal_bump", (-1.0, 1.0)).unwrap();
    let s = support();
    let bump = Potential::bump(&prod, s, C::new(1.0, 0.0), 8);
    let b2 = bump.clone();
    let quad = FourierQuadrature::default();
    let y = Point2::new(0.2, 0.1);
    let q_at = |lam: f64| q_slice({ let b = bump.clone(); move |x| b.value(x) * (1.0 + x.y) }, &prod, lam, Some(s), &quad).unwrap().eval(&y);
    let weighted = q_slice(move |x| b2.value(x) * (1.0 + x.y) * C::new(0.0, x.x), &prod, 0.3, Some(s), &quad).unwrap();
    let h = 1e-3;
    let fd = (q_at(0.3 - 2.0 * h) - q_at(0.3 - h) * 8.0 + q_at(0.3 + h) * 8.0 - q_at(0.3 + 2.0 * h)) / (12.0 * h);
    assert!((fd - weighted.eval(&y)).norm() < 1e-9, "{fd} vs {}", weighted.eval(&y));
}

#[test]
fn zero_q_difference_gives_zero_data() {
    let prod = gallery::product("euclidean_disk", (-1.0, 1.0)).unwrap();
    let rep = q_pipeline(|_| C::default(), &prod, Some(support()), &[0.0, 0.4], &GaugeResolution::default()).unwrap();
    assert_eq!(rep.max(), 0.0);
}

#[test]
fn pipeline_csv_has_one_row_per_lambda() {
    let phi = potentials("euclidean_disk").remove(0);
    let res = GaugeResolution { n_s: 12, n_phi: 8, ..Default::default() };
    let rows = gauge_pipeline(&phi, &[0.0, 0.2], &res).unwrap();
    let mut buf = Vec::new();
    write_pipeline_csv(&rows, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 3);
    assert!(text.starts_with("lambda,max_ray_integral"));
}

fn green_problem(curved: bool, x_scale: f64) -> GreenProblem {
    GreenProblem::new(
        vec![(-0.6, 0.6); 2],
        move |x| {
            let c = if curved { 1.0 + 0.2 * (-(x[0] * x[0] + x[1] * x[1])).exp() } else { 1.0 };
            DMatrix::identity(2, 2) * c
        },
        2,
        move |x| vec![C::new(0.5 + x[1], 0.3 * x[0]) * x_scale, C::new(x[0].sin(), -0.2) * x_scale],
        |x| C::new(1.0 + x[0] * x[1], 0.4),
        |x| C::new((1.5 * x[0] - x[1]).cos(), 0.5 * x[1]),
        |x| C::new((x[0] + 0.7 * x[1]).exp(), (2.0 * x[1]).sin()),
    )
}

#[test]
fn green_identity_converges_at_fourth_order() {
    for curved in [false, true] {
        let p = green_problem(curved, 1.0);
        let reps: Vec<GreenReport> = [65, 129, 257].iter().map(|&n| green_identity_check(&p, n).unwrap()).collect();
        assert!(reps[1].defect < 1e-6, "{reps:?}");
        let orders = observed_orders(&reps);
        assert!((orders[1] - 4.0).abs() < 0.5, "{orders:?}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn partial_fourier_is_linear_and_conjugate_symmetric(
        lam in -1.0f64..1.0, a in -2.0f64..2.0, b in -2.0f64..2.0, yx in -0.3f64..0.3, yy in -0.3f64..0.3,
    ) {
        let prod = gallery::product("euclidean_disk", (-1.0, 1.0)).unwrap();
        let s = support();
        let p1 = Potential::bump(&prod, s, C::new(1.0, 0.0), 6);
        let p2 = Potential::bump(&prod, s, C::new(0.0, 0.0), 6).sum(&Potential::bump(&prod, SupportBox { radius: 0.3, ..s }, C::new(1.0, 0.0), 6));
        let (g1, g2) = (VectorFieldM::gradient(&p1), VectorFieldM::gradient(&p2));
        let (h1, h2) = (g1.clone(), g2.clone());
        let combo = VectorFieldM::from_flat(&prod, move |x| {
            let (u, v) = (h1.flat(x), h2.flat(x));
            [0, 1, 2].map(|k| u[k] * a + v[k] * b)
        }, Some(s));
        let quad = FourierQuadrature::default();
        let y = Point2::new(yx, yy);
        let nodes = quad.nodes(s.x1.0, s.x1.1);
        let lhs = slice_at(&combo, lam, &nodes, &y);
        let (u, v) = (slice_at(&g1, lam, &nodes, &y), slice_at(&g2, lam, &nodes, &y));
        let neg = slice_at(&g1, -lam, &nodes, &y);
        for k in 0..3 {
            prop_assert!((lhs[k] - (u[k] * a + v[k] * b)).norm() < 1e-12);
            prop_assert!((u[k] - neg[k].conj()).norm() < 1e-12);
        }
    }
}
