use alloc::string::String;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use super::{evaluate_model, make_folds, CellData, EvalConfig, FoldAudit, SweepCell};
use crate::classifiers::ModelKind;
use crate::error::{Error, Result};
use crate::preprocess::SubjectData;
use crate::windowing::{WindowSpec, DEFAULT_STRIDE_MS};

/// Window sizes × delays, all in milliseconds.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SweepGrid {
    pub windows_ms: Vec<f64>,
    pub delays_ms: Vec<f64>,
    pub stride_ms: f64,
}

impl SweepGrid {
    /// Windows 50..=400 ms by 25, delays 0..=100 ms by 10.
    pub fn full() -> Self {
        Self {
            windows_ms: (0..15).map(|i| 50.0 + 25.0 * i as f64).collect(),
            delays_ms: (0..11).map(|i| 10.0 * i as f64).collect(),
            stride_ms: DEFAULT_STRIDE_MS,
        }
    }

    pub fn quick() -> Self {
        Self {
            windows_ms: alloc::vec![275.0, 300.0, 325.0, 375.0],
            delays_ms: alloc::vec![0.0, 10.0, 20.0, 40.0],
            stride_ms: DEFAULT_STRIDE_MS,
        }
    }

    pub fn single(window_ms: f64, delay_ms: f64) -> Self {
        Self { windows_ms: alloc::vec![window_ms], delays_ms: alloc::vec![delay_ms], stride_ms: DEFAULT_STRIDE_MS }
    }

    /// Specs in window-major order.
    pub fn specs(&self) -> Vec<WindowSpec> {
        self.windows_ms
            .iter()
            .flat_map(|&w| self.delays_ms.iter().map(move |&d| WindowSpec::new(w, d, self.stride_ms)))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.windows_ms.len() * self.delays_ms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Mean AUC of one model over the grid: rows are windows, columns delays.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct Heatmap {
    pub kind: ModelKind,
    pub windows_ms: Vec<f64>,
    pub delays_ms: Vec<f64>,
    pub values: Vec<Vec<Option<f64>>>,
}

fn spread(means: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let v: Vec<f64> = means.flatten().collect();
    let lo = v.iter().copied().reduce(f64::min)?;
    let hi = v.iter().copied().reduce(f64::max)?;
    Some(hi - lo)
}

fn mean(v: impl Iterator<Item = Option<f64>>) -> Option<f64> {
    let d: Vec<f64> = v.flatten().collect();
    if d.is_empty() {
        None
    } else {
        Some(d.iter().sum::<f64>() / d.len() as f64)
    }
}

impl Heatmap {
    /// Range across windows of the delay-averaged AUC.
    pub fn window_effect(&self) -> Option<f64> {
        spread(self.values.iter().map(|row| mean(row.iter().copied())))
    }

    /// Range across delays of the window-averaged AUC.
    pub fn delay_effect(&self) -> Option<f64> {
        spread((0..self.delays_ms.len()).map(|j| mean(self.values.iter().map(|row| row[j]))))
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct SweepReport {
    /// Sorted by window, delay, then model.
    pub cells: Vec<SweepCell>,
    /// One entry per evaluated model, in model order.
    pub best_per_model: Vec<SweepCell>,
    pub seed: u64,
    pub config: Vec<(String, String)>,
}

fn coord(c: &SweepCell) -> (f64, f64, usize) {
    (c.window_ms, c.delay_ms, c.kind.index())
}

impl SweepReport {
    /// Orders cells by coordinate, whatever order they were produced in,
    /// and picks each model's best cell (ties: smaller window, then
    /// smaller delay).
    pub fn assemble(mut cells: Vec<SweepCell>, seed: u64, config: Vec<(String, String)>) -> Self {
        cells.sort_by(|a, b| {
            let (ca, cb) = (coord(a), coord(b));
            ca.0.total_cmp(&cb.0).then(ca.1.total_cmp(&cb.1)).then(ca.2.cmp(&cb.2))
        });
        let best_per_model = ModelKind::ALL
            .iter()
            .filter_map(|&k| {
                cells
                    .iter()
                    .filter(|c| c.kind == k)
                    .fold(None::<&SweepCell>, |best, c| match best {
                        Some(b) if c.mean_auc <= b.mean_auc => Some(b),
                        _ => Some(c),
                    })
                    .cloned()
            })
            .collect();
        Self { cells, best_per_model, seed, config }
    }

    pub fn best(&self, kind: ModelKind) -> Option<&SweepCell> {
        self.best_per_model.iter().find(|c| c.kind == kind)
    }

    pub fn models(&self) -> Vec<ModelKind> {
        self.best_per_model.iter().map(|c| c.kind).collect()
    }

    pub fn heatmap(&self, kind: ModelKind) -> Heatmap {
        let mut windows: Vec<f64> = self.cells.iter().map(|c| c.window_ms).collect();
        let mut delays: Vec<f64> = self.cells.iter().map(|c| c.delay_ms).collect();
        for v in [&mut windows, &mut delays] {
            v.sort_by(f64::total_cmp);
            v.dedup();
        }
        let values = windows
            .iter()
            .map(|&w| {
                delays
                    .iter()
                    .map(|&d| {
                        self.cells
                            .iter()
                            .find(|c| c.kind == kind && c.window_ms == w && c.delay_ms == d)
                            .map(|c| c.mean_auc)
                    })
                    .collect()
            })
            .collect();
        Heatmap { kind, windows_ms: windows, delays_ms: delays, values }
    }

    pub fn warnings(&self) -> impl Iterator<Item = &String> {
        self.cells.iter().flat_map(|c| c.warnings.iter())
    }
}

/// Evaluates every (window, delay, model) cell in turn. Each window spec
/// is segmented once and shared by all models.
pub fn run_sweep(
    grid: &SweepGrid,
    models: &[ModelKind],
    subjects: &[SubjectData],
    cfg: &EvalConfig,
    audit: &dyn FoldAudit,
    config: Vec<(String, String)>,
) -> Result<SweepReport> {
    if grid.is_empty() {
        return Err(Error::Empty("sweep grid"));
    }
    if models.is_empty() {
        return Err(Error::Empty("model set"));
    }
    let ids: Vec<u32> = subjects.iter().map(|s| s.subject_id).collect();
    let folds = make_folds(&ids)?;
    let mut cells = Vec::with_capacity(grid.len() * models.len());
    for spec in grid.specs() {
        let mut data = CellData::build(spec, subjects).map_err(|e| e.in_cell(spec.window_ms, spec.delay_ms, models[0]))?;
        if let Some(s) = cfg.permute_labels {
            data.permute_labels(s);
        }
        for &kind in models {
            let cell = evaluate_model(&data, kind, &folds, cfg, audit)
                .map_err(|e| e.in_cell(spec.window_ms, spec.delay_ms, kind))?;
            cells.push(cell);
        }
    }
    Ok(SweepReport::assemble(cells, cfg.seed, config))
}
