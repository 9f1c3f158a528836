use approx::assert_relative_eq;
use ndarray::{array, Array1, Array2};
use proptest::prelude::*;
use qipfot::datagen::{rotate2d, two_moons, RngSeed};
use qipfot::hermite::{hermite_function, hermite_with_derivatives};
use qipfot::qipf::{default_eval_points, uniform_grid};
use qipfot::{ipf::ipf_evaluate, normalize_moment_field, qipf_moments, KernelConfig, LaplacianMethod, SampleSet};
use rand_distr::{Distribution, Normal};

fn orders(m: usize) -> Vec<usize> {
    (1..=m).collect()
}

fn max_abs_diff(a: &Array2<f64>, b: &Array2<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn moon_fields_survive_rotation() {
    let (a, _) = two_moons(120, 0.05, RngSeed(11)).unwrap();
    let cfg = KernelConfig::manual(0.2);
    let eval = default_eval_points(&a, 0.2);
    let before = qipf_moments(&a, &cfg, &orders(12), &eval).unwrap();
    for angle in [0.3, 1.7, -2.9] {
        let ra = SampleSet::new(rotate2d(a.points(), angle).unwrap()).unwrap();
        let reval = rotate2d(&eval, angle).unwrap();
        let after = qipf_moments(&ra, &cfg, &orders(12), &reval).unwrap();
        assert!(max_abs_diff(&before.values, &after.values) <= 1e-9);
    }
}

#[test]
fn translation_and_sample_order_leave_field_unchanged() {
    let pts = array![[0.1, 0.4], [0.9, -0.2], [0.3, 0.3], [-0.5, 0.8], [0.0, 0.0], [1.2, 0.7]];
    let s = SampleSet::new(pts.clone()).unwrap();
    let cfg = KernelConfig::manual(0.5);
    let eval = uniform_grid(-1.0, 1.0, 9);
    let eval = Array2::from_shape_fn((9, 2), |(i, j)| if j == 0 { eval[[i, 0]] } else { 0.5 * eval[[i, 0]] });
    let base = qipf_moments(&s, &cfg, &orders(6), &eval).unwrap();

    let shift = array![3.25, -1.5];
    let moved = SampleSet::new(&pts + &shift).unwrap();
    let moved_eval = &eval + &shift;
    let t = qipf_moments(&moved, &cfg, &orders(6), &moved_eval).unwrap();
    let scale = base.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    assert!(max_abs_diff(&base.values, &t.values) <= 1e-12 * scale.max(1.0) * 100.0);

    let perm = [4, 2, 5, 0, 3, 1];
    let permuted = SampleSet::new(Array2::from_shape_fn((6, 2), |(i, j)| pts[[perm[i], j]])).unwrap();
    let p = qipf_moments(&permuted, &cfg, &orders(6), &eval).unwrap();
    assert!(max_abs_diff(&base.values, &p.values) <= 1e-12 * scale.max(1.0));
}

#[test]
fn hermite_ode_identity_by_differences() {
    let h = 1e-4;
    for k in 0..=20 {
        for i in 0..=100 {
            let u = -5.0 + 0.1 * i as f64;
            let second = (hermite_function(k, u + h).unwrap() - 2.0 * hermite_function(k, u).unwrap()
                + hermite_function(k, u - h).unwrap())
                / (h * h);
            let d = hermite_with_derivatives(k, u).unwrap();
            let c = u * u - 2.0 * k as f64 - 1.0;
            let rhs = c * d.value;
            // recurrence error grows about linearly in k and is amplified by 1/h^2;
            // |h_k| never exceeds pi^(-1/4)
            let roundoff = 4.0 * (k + 1) as f64 * f64::EPSILON * 0.7512 / (h * h);
            // leading truncation term h^2/12 * h'''' with h'''' = 2h + 4u h' + c h''
            let fourth = 2.0 * d.value + 4.0 * u * d.first + c * d.second;
            let truncation = 1.5 * h * h / 12.0 * fourth.abs();
            let err = (second - rhs).abs();
            assert!(err <= 1e-8 + roundoff + truncation, "k={k} u={u}: {err}");
        }
    }
}

#[test]
fn analytic_second_derivative_satisfies_ode() {
    for k in [0, 1, 5, 12, 40, 64] {
        for u in [-7.0, -1.3, 0.0, 0.4, 2.2, 9.0] {
            let v = hermite_with_derivatives(k, u).unwrap();
            assert_relative_eq!(v.second, (u * u - 2.0 * k as f64 - 1.0) * v.value, epsilon = 1e-12);
        }
    }
}

#[test]
fn finite_difference_moments_track_analytic() {
    let mut rng = RngSeed(5).rng();
    let normal = Normal::new(0.0, 1.0).unwrap();
    let x: Vec<f64> = (0..100).map(|_| normal.sample(&mut rng)).collect();
    let s = SampleSet::from_column(&x).unwrap();
    let analytic = KernelConfig::default();
    let sigma = analytic.resolve_sigma(&s).unwrap();
    let eval = default_eval_points(&s, sigma);
    let a = normalize_moment_field(&qipf_moments(&s, &analytic, &orders(12), &eval).unwrap());
    let fd_cfg = analytic.with_laplacian(LaplacianMethod::FiniteDifference);
    let f = normalize_moment_field(&qipf_moments(&s, &fd_cfg, &orders(12), &eval).unwrap());
    assert!(max_abs_diff(&a.values, &f.values) <= 1e-3);
}

#[test]
fn moments_are_nonnegative_with_zero_floor() {
    let (a, _) = two_moons(80, 0.1, RngSeed(2)).unwrap();
    let cfg = KernelConfig::default();
    let sigma = cfg.resolve_sigma(&a).unwrap();
    let f = qipf_moments(&a, &cfg, &[0, 1, 2, 7, 12], &default_eval_points(&a, sigma)).unwrap();
    for row in f.values.rows() {
        assert!(row.iter().all(|&v| v >= -1e-12));
        assert!(row.iter().copied().fold(f64::INFINITY, f64::min).abs() <= 1e-12);
    }
}

fn density_mad(n: usize, seed: u64) -> f64 {
    let mut rng = RngSeed(seed).rng();
    let normal = Normal::new(0.0, 1.0).unwrap();
    let x: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
    let s = SampleSet::from_column(&x).unwrap();
    let cfg = KernelConfig::default();
    let sigma = cfg.resolve_sigma(&s).unwrap();
    let grid = Array1::linspace(-3.0, 3.0, 61);
    let norm = 1.0 / (sigma * (2.0 * std::f64::consts::PI).sqrt());
    grid.iter()
        .map(|&u| {
            let est = ipf_evaluate(&s, &cfg, &[u]).unwrap() * norm;
            let truth = (-0.5 * u * u).exp() / (2.0 * std::f64::consts::PI).sqrt();
            (est - truth).abs()
        })
        .sum::<f64>()
        / grid.len() as f64
}

#[test]
fn potential_approaches_true_density_with_n() {
    let mads: Vec<f64> = [50, 200, 800]
        .iter()
        .map(|&n| (0..20).map(|s| density_mad(n, 100 + s)).sum::<f64>() / 20.0)
        .collect();
    assert!(mads[0] > mads[1] && mads[1] > mads[2], "{mads:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rotation_invariance_fuzz(
        pts in prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 6..30),
        angle in -3.2f64..3.2,
        sigma in 0.2f64..1.0,
    ) {
        let a = Array2::from_shape_fn((pts.len(), 2), |(i, j)| if j == 0 { pts[i].0 } else { pts[i].1 });
        prop_assume!(SampleSet::new(a.clone()).is_ok());
        let s = SampleSet::new(a.clone()).unwrap();
        let cfg = KernelConfig::manual(sigma);
        let before = qipf_moments(&s, &cfg, &orders(8), &a).unwrap();
        let r = rotate2d(&a, angle).unwrap();
        let after = qipf_moments(&SampleSet::new(r.clone()).unwrap(), &cfg, &orders(8), &r).unwrap();
        let scale = before.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        prop_assert!(max_abs_diff(&before.values, &after.values) <= 1e-9 * scale);
    }

    #[test]
    fn normalized_field_in_unit_interval(xs in prop::collection::vec(-10.0f64..10.0, 3..40)) {
        prop_assume!(xs.iter().any(|&v| v != xs[0]));
        let s = SampleSet::from_column(&xs).unwrap();
        let cfg = KernelConfig::default();
        let sigma = cfg.resolve_sigma(&s).unwrap();
        let f = normalize_moment_field(&qipf_moments(&s, &cfg, &orders(6), &default_eval_points(&s, sigma)).unwrap());
        prop_assert!(f.values.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
