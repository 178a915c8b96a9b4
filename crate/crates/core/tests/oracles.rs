use gaitphase_core::classifiers::{train, HyperParams, Kernel, MaxFeatures, ModelKind, Samples};
use gaitphase_core::evaluation::roc_auc;
use gaitphase_core::labeling::{detect_extrema, label_phases, PhaseConvention};
use gaitphase_core::windowing::{features, segment, WindowSpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

mod common;

/// Straight transcription of the four feature definitions.
fn naive_features(x: &[f64]) -> [f64; 4] {
    let n = x.len() as f64;
    let sgn = |v: f64| -> f64 {
        if v > 0.0 {
            1.0
        } else if v < 0.0 {
            -1.0
        } else {
            0.0
        }
    };
    let mut zc = 0.0;
    for i in 1..x.len() {
        zc += (sgn(x[i - 1]) - sgn(x[i])).abs() / 2.0;
    }
    let mut mav = 0.0;
    let mut mean = 0.0;
    for v in x {
        mav += v.abs();
        mean += v;
    }
    mav /= n;
    mean /= n;
    let mut var = 0.0;
    let mut mad = 0.0;
    for v in x {
        var += (v - mean) * (v - mean);
        mad += (v - mean).abs();
    }
    [zc, mav, (var / n).sqrt(), mad / n]
}

fn random_window(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let n = rng.gen_range(2..=500);
    let zeros = rng.gen_bool(0.3);
    (0..n)
        .map(|_| if zeros && rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(-1.0..1.0) })
        .collect()
}

#[test]
fn features_match_naive_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..2000 {
        let w = random_window(&mut rng);
        let got = features(&w).unwrap().to_array();
        let want = naive_features(&w);
        for (g, e) in got.iter().zip(want) {
            assert!((g - e).abs() <= 1e-12, "{got:?} vs {want:?}");
        }
        assert!(got[3] <= got[2] + 1e-15);
    }
}

#[test]
fn feature_scaling_laws_hold_exactly() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..500 {
        let w = random_window(&mut rng);
        let c = 2f64.powi(rng.gen_range(-8..8));
        let scaled: Vec<f64> = w.iter().map(|v| v * c).collect();
        let (a, b) = (features(&w).unwrap(), features(&scaled).unwrap());
        assert_eq!(a.zc, b.zc);
        assert_eq!(a.mav * c, b.mav);
        assert_eq!(a.sigma * c, b.sigma);
        assert_eq!(a.mad * c, b.mad);
    }
}

#[test]
fn auc_matches_pairwise_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..300 {
        let n = rng.gen_range(2..=400);
        let levels = rng.gen_range(1..=50);
        let scores: Vec<f64> = (0..n).map(|_| rng.gen_range(0..levels) as f64 / levels as f64).collect();
        let mut labels: Vec<u8> = (0..n).map(|_| u8::from(rng.gen_bool(0.4))).collect();
        labels[0] = 0;
        labels[n - 1] = 1;
        let auc = roc_auc(&scores, &labels).unwrap();
        assert!((auc - common::brute_auc(&scores, &labels)).abs() <= 1e-12);
        let flipped: Vec<u8> = labels.iter().map(|l| 1 - l).collect();
        assert_eq!(auc + roc_auc(&scores, &flipped).unwrap(), 1.0);
    }
}

fn blob_data(seed: u64, n: usize) -> Samples {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = Vec::new();
    let mut y = Vec::new();
    for _ in 0..n {
        let label = u8::from(rng.gen_bool(0.5));
        let shift = if label == 1 { 0.8 } else { -0.8 };
        for _ in 0..4 {
            x.push(shift * rng.gen_range(0.0..1.0) + rng.gen_range(-1.0..1.0));
        }
        y.push(label);
    }
    Samples::new(x, y, 4).unwrap()
}

fn params_for(kind: ModelKind) -> HyperParams {
    match kind {
        ModelKind::GaussianNb => HyperParams::GaussianNb { var_smoothing: 1e-9 },
        ModelKind::DecisionTree => HyperParams::DecisionTree { max_depth: 5, min_samples_leaf: 1 },
        ModelKind::RandomForest => HyperParams::RandomForest {
            n_trees: 30,
            max_depth: 6,
            min_samples_leaf: 1,
            max_features: MaxFeatures::Sqrt,
            bootstrap: true,
        },
        ModelKind::GradientBoosting => HyperParams::GradientBoosting { n_rounds: 40, learning_rate: 0.1, max_depth: 3 },
        ModelKind::Svm => HyperParams::Svm { c: 1.0, kernel: Kernel::Rbf { gamma: 0.5 } },
        ModelKind::Knn => HyperParams::Knn { k: 7 },
    }
}

/// AUC only sees the ranking of scores, so any map that keeps every pair's
/// order (strictly increasing on the observed values) leaves it unchanged.
#[test]
fn auc_invariant_under_monotone_score_maps_per_model() {
    let train_set = blob_data(1, 300);
    let test_set = blob_data(2, 200);
    let maps: [fn(f64) -> f64; 4] = [|s| s * 8.0, |s| s.exp(), |s| s * s * s + s, |s| (s + 1.0).ln()];
    for kind in ModelKind::ALL {
        let model = train(kind, &params_for(kind), &train_set, 3).unwrap();
        let scores = model.score_samples(&test_set).unwrap();
        let base = roc_auc(&scores, test_set.labels()).unwrap();
        assert!(base > 0.7, "{kind}: {base}");
        let mut applied = 0;
        for f in maps {
            let mapped: Vec<f64> = scores.iter().map(|&s| f(s)).collect();
            // rounding can merge neighbours, and ln needs s > -1
            let keeps_order = (0..scores.len()).all(|i| {
                (0..scores.len()).all(|j| scores[i].partial_cmp(&scores[j]) == mapped[i].partial_cmp(&mapped[j]))
            });
            if keeps_order {
                assert_eq!(roc_auc(&mapped, test_set.labels()).unwrap(), base, "{kind}");
                applied += 1;
            }
        }
        assert!(applied >= 2, "{kind}: only {applied} maps applicable");
    }
}

#[test]
fn single_unbagged_forest_tree_matches_decision_tree() {
    let data = blob_data(4, 150);
    let probe = blob_data(5, 100);
    for depth in [1, 2, 4, 8] {
        let dt = train(ModelKind::DecisionTree, &HyperParams::DecisionTree { max_depth: depth, min_samples_leaf: 1 }, &data, 0).unwrap();
        let rf = train(
            ModelKind::RandomForest,
            &HyperParams::RandomForest { n_trees: 1, max_depth: depth, min_samples_leaf: 1, max_features: MaxFeatures::All, bootstrap: false },
            &data,
            123,
        )
        .unwrap();
        assert_eq!(dt.score_samples(&probe).unwrap(), rf.score_samples(&probe).unwrap());
    }
}

/// Rippled knee trace: real extrema come from the slow cycle, the ripple
/// must not create extra ones.
#[test]
fn ripple_does_not_create_extrema() {
    let n = 8000;
    let knee: Vec<f64> = (0..n)
        .map(|i| {
            let t = i as f64 / 1000.0;
            (2.0 * std::f64::consts::PI * t).sin() + 0.05 * (2.0 * std::f64::consts::PI * 9.0 * t).sin()
        })
        .collect();
    let sig = gaitphase_core::dataset::SampledSignal::new(knee, 1000.0, "knee").unwrap();
    let ex = detect_extrema(&sig, 0.3, 400.0).unwrap();
    assert_eq!(ex.len(), 16);
    for (k, (i, _)) in ex.iter().enumerate() {
        let expected = 250 + 500 * k;
        assert!(i.abs_diff(expected) <= 30, "extremum {k} at {i}");
    }
}

#[test]
fn opposite_convention_complements_auc() {
    let rec = common::recording(3, 6.0, 1);
    let emg = gaitphase_core::dsp::normalize_maxabs(&rec.rf_emg).unwrap();
    let knee = gaitphase_core::dsp::normalize_maxabs(&rec.knee_angle).unwrap();
    let ex = detect_extrema(&knee, 0.3, 400.0).unwrap();
    let a = label_phases(&knee, &ex, PhaseConvention::MaxStartsStance).unwrap();
    let b = label_phases(&knee, &ex, PhaseConvention::MinStartsStance).unwrap();
    assert!(a.labels.iter().zip(&b.labels).all(|(x, y)| x + y == 1));
    let spec = WindowSpec::new(100.0, 20.0, 10.0);
    let ma = segment(&emg, &a, &spec, 3).unwrap();
    let mb = segment(&emg, &b, &spec, 3).unwrap();
    let scores: Vec<f64> = ma.rows.iter().map(|r| r.features.mav).collect();
    assert_eq!(roc_auc(&scores, &ma.labels()).unwrap() + roc_auc(&scores, &mb.labels()).unwrap(), 1.0);
}
