use ndarray::Array2;
use proptest::prelude::*;
use qipfot::baselines::PairedSeries;
use qipfot::datagen::{equitability_pair, RngSeed};
use qipfot::dependence::{
    mismatch_score, qipf_ot_dependence, qipf_ot_dependence_paired, CloudMode, DependenceConfig, ScoreRule,
};
use qipfot::ot::MomentCoupling;
use qipfot::SampleSet;
use rand::seq::SliceRandom;
use rand::Rng;

fn fuzz_column(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = RngSeed(seed).rng();
    match seed % 3 {
        0 => (0..n).map(|_| rng.random::<f64>()).collect(),
        1 => (0..n).map(|_| (rng.random::<f64>() * 6.0).exp()).collect(),
        // coarse grid with ties
        _ => (0..n).map(|_| (rng.random::<f64>() * 8.0).floor()).collect(),
    }
}

#[test]
fn identical_inputs_give_identical_reports() {
    let p = equitability_pair(120, 0.4, RngSeed(5)).unwrap();
    let cfg = DependenceConfig::default();
    let a = qipf_ot_dependence_paired(&p, &cfg, RngSeed(1)).unwrap();
    let b = qipf_ot_dependence_paired(&p, &cfg, RngSeed(1)).unwrap();
    assert_eq!(a, b);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn score_stays_in_unit_interval_on_fuzz_inputs() {
    let cfg = DependenceConfig::default();
    let mut rng = RngSeed(2024).rng();
    for trial in 0..1000u64 {
        let n = rng.random_range(10..=100);
        let x = fuzz_column(n, 3 * trial);
        let y = fuzz_column(n, 3 * trial + 7);
        let p = PairedSeries::new(x, y).unwrap();
        let r = qipf_ot_dependence_paired(&p, &cfg, RngSeed(trial)).unwrap();
        assert!((0.0..=1.0).contains(&r.score), "trial {trial}: {}", r.score);
        for d in &r.directions {
            assert_eq!(d.score == 1.0, d.mismatched_moments.is_empty(), "trial {trial}");
        }
    }
}

#[test]
fn self_dependence_is_one() {
    let cfg = DependenceConfig::default();
    let mut rng = RngSeed(77).rng();
    for seed in 0..20u64 {
        let n = rng.random_range(20..=200);
        let x = SampleSet::from_column(&fuzz_column(n, 3 * seed)).unwrap();
        let r = qipf_ot_dependence(&x, &x, &cfg, RngSeed(seed)).unwrap();
        assert_eq!(r.score, 1.0, "seed {seed}");
    }
}

#[test]
fn joint_row_permutation_leaves_score_unchanged() {
    let cfg = DependenceConfig::default();
    for seed in 0..5u64 {
        let p = equitability_pair(80, 0.1 * seed as f64 + 0.3, RngSeed(seed)).unwrap();
        let mut order: Vec<usize> = (0..p.len()).collect();
        order.shuffle(&mut RngSeed(seed + 100).rng());
        let q = PairedSeries::new(order.iter().map(|&i| p.x()[i]).collect(), order.iter().map(|&i| p.y()[i]).collect())
            .unwrap();
        let a = qipf_ot_dependence_paired(&p, &cfg, RngSeed(0)).unwrap().score;
        let b = qipf_ot_dependence_paired(&q, &cfg, RngSeed(0)).unwrap().score;
        assert!((a - b).abs() <= 1e-12, "seed {seed}: {a} vs {b}");
    }
}

#[test]
fn separate_row_permutation_is_invisible_to_quantile_clouds() {
    let cfg = DependenceConfig { cloud: CloudMode::Quantile, ..DependenceConfig::default() };
    for seed in 0..5u64 {
        let p = equitability_pair(80, 0.5, RngSeed(seed)).unwrap();
        let mut ys = p.y().to_vec();
        ys.shuffle(&mut RngSeed(seed + 200).rng());
        let x = SampleSet::from_column(p.x()).unwrap();
        let a = qipf_ot_dependence(&x, &SampleSet::from_column(p.y()).unwrap(), &cfg, RngSeed(0)).unwrap().score;
        let b = qipf_ot_dependence(&x, &SampleSet::from_column(&ys).unwrap(), &cfg, RngSeed(0)).unwrap().score;
        assert!((a - b).abs() <= 1e-12, "seed {seed}: {a} vs {b}");
    }
}

#[test]
fn independence_and_identity_bounds() {
    let cfg = DependenceConfig::default();
    let mean = |a: f64| {
        (0..10u64)
            .map(|s| qipf_ot_dependence_paired(&equitability_pair(200, a, RngSeed(s)).unwrap(), &cfg, RngSeed(s)))
            .map(|r| r.unwrap().score)
            .sum::<f64>()
            / 10.0
    };
    assert!(mean(0.0) <= 0.3);
    assert!(mean(1.0) >= 0.9);
}

fn diagonal_dominant(m: usize, seed: u64) -> Array2<f64> {
    let mut rng = RngSeed(seed).rng();
    Array2::from_shape_fn((m, m), |(i, j)| if i == j { 1.0 + rng.random::<f64>() } else { 0.5 * rng.random::<f64>() })
}

proptest! {
    #[test]
    fn tail_mismatch_costs_at_least_head_mismatch(m in 2usize..16, seed in 0u64..10_000, target in 0usize..15) {
        let base = diagonal_dominant(m, seed);
        let off = |k: usize| if target % m == k { (k + 1) % m } else { target % m };
        let mut head = base.clone();
        head[[0, off(0)]] = 10.0;
        let mut tail = base;
        tail[[m - 1, off(m - 1)]] = 10.0;
        let orders: Vec<usize> = (1..=m).collect();
        let h = mismatch_score(&MomentCoupling { orders: orders.clone(), mass: head }, ScoreRule::IndexWeighted);
        let t = mismatch_score(&MomentCoupling { orders, mass: tail }, ScoreRule::IndexWeighted);
        prop_assert_eq!(h.mismatched.clone(), vec![1]);
        prop_assert_eq!(t.mismatched.clone(), vec![m]);
        prop_assert!(t.score <= h.score);
    }
}
