use std::sync::Mutex;

use gaitphase_core::classifiers::search::{IntRange, LogRange, SearchSpace};
use gaitphase_core::classifiers::{HyperParams, ModelKind};
use gaitphase_core::evaluation::{
    batch_scores, evaluate_cell, fit_fold, make_folds, prepare_fold, replay_stream, run_sweep, CellData, EvalConfig,
    FoldAudit, NoAudit, NoClock, Protocol, Stage, SweepGrid, TrainOptions,
};
use gaitphase_core::labeling::STANCE;
use gaitphase_core::windowing::WindowSpec;
use gaitphase_core::Error;

mod common;

/// Small, fast search space for tests.
fn small_space() -> SearchSpace {
    SearchSpace {
        rf_trees: IntRange::new(5, 10),
        rf_max_depth: IntRange::new(2, 4),
        gbm_rounds: IntRange::new(5, 15),
        knn_k: IntRange::new(1, 15),
        svm_c: LogRange::new(0.1, 10.0),
        ..SearchSpace::default()
    }
}

fn cfg(protocol: Protocol) -> EvalConfig {
    EvalConfig {
        budget: 2,
        seed: 11,
        space: small_space(),
        protocol,
        train: TrainOptions { svm_max_train_rows: Some(400) },
        permute_labels: None,
    }
}

#[derive(Default)]
struct Recorder {
    events: Mutex<Vec<(Vec<u32>, Stage, Vec<u32>)>>,
}

impl FoldAudit for Recorder {
    fn record(&self, held_out: &[u32], stage: Stage, subjects: &[u32]) {
        self.events.lock().unwrap().push((held_out.to_vec(), stage, subjects.to_vec()));
    }
}

#[test]
fn no_training_access_touches_held_out_subjects() {
    let subjects = common::subjects(&[1, 2, 3, 4], 5.0, 3);
    let folds = make_folds(&[1, 2, 3, 4]).unwrap();
    for protocol in [Protocol::Flat, Protocol::Nested] {
        let audit = Recorder::default();
        for kind in ModelKind::ALL {
            evaluate_cell(WindowSpec::new(100.0, 20.0, 20.0), kind, &subjects, &folds, &cfg(protocol), &audit).unwrap();
        }
        let events = audit.events.into_inner().unwrap();
        assert!(events.iter().any(|e| e.1 == Stage::ScalerFit));
        assert!(events.iter().any(|e| e.1 == Stage::SearchTrain));
        if protocol == Protocol::Nested {
            assert!(events.iter().any(|e| e.1 == Stage::FinalTrain));
            assert!(events.iter().any(|e| e.0.len() == 2));
        }
        for (held_out, stage, seen) in &events {
            assert!(!seen.is_empty());
            for h in held_out {
                assert!(!seen.contains(h), "{stage:?} read held-out subject {h}");
            }
        }
    }
}

#[test]
fn rows_never_mix_subjects() {
    let subjects = common::subjects(&[1, 2, 3], 4.0, 5);
    let data = CellData::build(WindowSpec::new(200.0, 0.0, 10.0), &subjects).unwrap();
    for (id, m) in data.subjects.iter().zip(&data.matrices) {
        assert!(m.rows.iter().all(|r| r.subject == *id));
    }
    let folds = make_folds(&data.subjects).unwrap();
    for f in &folds.folds {
        let p = prepare_fold(&data, f, &[], &NoAudit).unwrap();
        assert!(p.train.subjects().iter().all(|s| *s != f.test));
        assert!(p.test.subjects().iter().all(|s| *s == f.test));
    }
}

#[test]
fn cell_is_deterministic_and_order_invariant() {
    let ids = [1, 2, 3, 4];
    let subjects = common::subjects(&ids, 5.0, 7);
    let folds = make_folds(&ids).unwrap();
    let spec = WindowSpec::new(150.0, 10.0, 20.0);
    let c = cfg(Protocol::Flat);
    for kind in ModelKind::ALL {
        let a = evaluate_cell(spec, kind, &subjects, &folds, &c, &NoAudit).unwrap();
        let b = evaluate_cell(spec, kind, &subjects, &folds, &c, &NoAudit).unwrap();
        assert_eq!(a, b);
        let mut shuffled = subjects.clone();
        shuffled.reverse();
        shuffled.swap(0, 2);
        assert_eq!(a, evaluate_cell(spec, kind, &shuffled, &folds, &c, &NoAudit).unwrap());
        assert!(a.per_fold_auc.iter().flatten().all(|v| (0.0..=1.0).contains(v)));
        let defined: Vec<f64> = a.per_fold_auc.iter().flatten().copied().collect();
        assert_eq!(a.mean_auc, defined.iter().sum::<f64>() / defined.len() as f64);
    }
}

#[test]
fn synthetic_signal_is_learnable() {
    let ids = [1, 2, 3, 4];
    let subjects = common::subjects(&ids, 8.0, 9);
    let folds = make_folds(&ids).unwrap();
    let cell = evaluate_cell(WindowSpec::new(200.0, 40.0, 20.0), ModelKind::GaussianNb, &subjects, &folds, &cfg(Protocol::Flat), &NoAudit)
        .unwrap();
    assert!(cell.mean_auc > 0.75, "{}", cell.mean_auc);
    assert!(cell.pooled_auc.unwrap() > 0.7);
}

#[test]
fn single_class_subject_is_excluded_with_warning() {
    let ids = [1, 2, 3];
    let mut subjects = common::subjects(&ids, 5.0, 2);
    subjects[1].phases.labels.iter_mut().for_each(|l| *l = STANCE);
    let folds = make_folds(&ids).unwrap();
    let cell = evaluate_cell(WindowSpec::new(100.0, 0.0, 20.0), ModelKind::Knn, &subjects, &folds, &cfg(Protocol::Flat), &NoAudit)
        .unwrap();
    assert_eq!(cell.per_fold_auc[1], None);
    assert!(cell.per_fold_auc[0].is_some() && cell.per_fold_auc[2].is_some());
    assert_eq!(cell.warnings.len(), 1);
    assert!(cell.warnings[0].contains("subject 2"));
}

#[test]
fn errors_carry_cell_coordinates() {
    let subjects = common::subjects(&[1, 2], 2.0, 1);
    let grid = SweepGrid { windows_ms: vec![100.0, 5000.0], delays_ms: vec![30.0], stride_ms: 10.0 };
    let err = run_sweep(&grid, &[ModelKind::Knn], &subjects, &cfg(Protocol::Flat), &NoAudit, vec![]).unwrap_err();
    match err {
        Error::Cell { window_ms, delay_ms, model, .. } => {
            assert_eq!((window_ms, delay_ms, model), (5000.0, 30.0, "knn"));
        }
        other => panic!("unexpected {other:?}"),
    }
    assert_eq!(
        run_sweep(&grid, &[ModelKind::Knn], &subjects[..1], &cfg(Protocol::Flat), &NoAudit, vec![]).unwrap_err(),
        Error::TooFewSubjects(1)
    );
}

#[test]
fn single_cell_sweep() {
    let subjects = common::subjects(&[1, 2, 3], 4.0, 4);
    let r = run_sweep(&SweepGrid::single(100.0, 20.0), &[ModelKind::Svm], &subjects, &cfg(Protocol::Flat), &NoAudit, vec![])
        .unwrap();
    assert_eq!(r.cells.len(), 1);
    assert_eq!(r.best_per_model, r.cells);
}

#[test]
fn replay_is_bit_identical_to_batch() {
    let ids = [1, 2, 3];
    let subjects = common::subjects(&ids, 5.0, 6);
    let spec = WindowSpec::new(120.0, 20.0, 10.0);
    let data = CellData::build(spec, &subjects).unwrap();
    let folds = make_folds(&ids).unwrap();
    let params = [
        HyperParams::Svm { c: 1.0, kernel: gaitphase_core::classifiers::Kernel::Rbf { gamma: 0.3 } },
        HyperParams::GradientBoosting { n_rounds: 10, learning_rate: 0.1, max_depth: 3 },
        HyperParams::Knn { k: 5 },
    ];
    for fold in &folds.folds {
        let prepared = prepare_fold(&data, fold, &[], &NoAudit).unwrap();
        let test = subjects.iter().find(|s| s.subject_id == fold.test).unwrap();
        for p in &params {
            let (model, _) = fit_fold(p, &prepared, 1, &TrainOptions::default(), &NoAudit, Stage::FinalTrain).unwrap();
            let live = replay_stream(&test.emg, &model, &prepared.scaler, &spec, &NoClock).unwrap();
            let batch = batch_scores(&test.emg, &model, &prepared.scaler, &spec).unwrap();
            assert_eq!(live.len(), batch.len());
            for (l, (t, s)) in live.iter().zip(&batch) {
                assert_eq!(l.time_ms, *t);
                assert_eq!(l.score.to_bits(), s.to_bits());
            }
        }
    }
}
