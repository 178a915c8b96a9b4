//! Stance/swing labels from knee-angle extrema.

use alloc::format;
use alloc::vec::Vec;

#[cfg(feature = "serde")]
use serde::{Deserialize, Serialize};

use crate::dataset::SampledSignal;
use crate::error::{Error, Result};
use crate::units::ms_to_samples;

pub const SWING: u8 = 0;
pub const STANCE: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum ExtremumKind {
    Max,
    Min,
}

impl ExtremumKind {
    fn opposite(self) -> Self {
        match self {
            Self::Max => Self::Min,
            Self::Min => Self::Max,
        }
    }
}

/// Alternating maxima and minima, strictly increasing in index.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct ExtremaList {
    pub indices: Vec<usize>,
    pub kinds: Vec<ExtremumKind>,
}

impl ExtremaList {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, ExtremumKind)> + '_ {
        self.indices.iter().copied().zip(self.kinds.iter().copied())
    }

    /// Checks ordering, alternation and that every index is below `len`.
    pub fn validate(&self, len: usize) -> Result<()> {
        if self.indices.len() != self.kinds.len() {
            return Err(Error::InvalidExtrema(format!(
                "{} indices but {} kinds",
                self.indices.len(),
                self.kinds.len()
            )));
        }
        if self.indices.is_empty() {
            return Err(Error::InvalidExtrema("no extrema".into()));
        }
        for w in self.indices.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidExtrema(format!("indices not increasing at {}", w[1])));
            }
        }
        for w in self.kinds.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidExtrema("kinds do not alternate".into()));
            }
        }
        if let Some(&last) = self.indices.last() {
            if last >= len {
                return Err(Error::InvalidExtrema(format!("index {last} beyond signal of {len} samples")));
            }
        }
        Ok(())
    }
}

/// Which interval counts as stance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub enum PhaseConvention {
    /// Interval starting at a knee-flexion maximum is stance.
    #[default]
    MaxStartsStance,
    /// Interval starting at a minimum is stance.
    MinStartsStance,
}

impl PhaseConvention {
    pub fn tag(self) -> &'static str {
        match self {
            Self::MaxStartsStance => "max_starts_stance",
            Self::MinStartsStance => "min_starts_stance",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag {
            "max_starts_stance" => Some(Self::MaxStartsStance),
            "min_starts_stance" => Some(Self::MinStartsStance),
            _ => None,
        }
    }

    fn label_after(self, kind: ExtremumKind) -> u8 {
        match (self, kind) {
            (Self::MaxStartsStance, ExtremumKind::Max) | (Self::MinStartsStance, ExtremumKind::Min) => STANCE,
            _ => SWING,
        }
    }
}

/// Per-sample labels: 0 = swing, 1 = stance.
#[derive(Debug, Clone, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(Serialize, Deserialize))]
pub struct PhaseSeries {
    pub labels: Vec<u8>,
    pub convention: PhaseConvention,
}

impl PhaseSeries {
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Indices `i` where `labels[i] != labels[i - 1]`.
    pub fn transitions(&self) -> Vec<usize> {
        (1..self.labels.len()).filter(|&i| self.labels[i] != self.labels[i - 1]).collect()
    }
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    index: usize,
    kind: ExtremumKind,
    value: f64,
    prominence: f64,
}

impl Candidate {
    /// More extreme in its own direction.
    fn beats(&self, other: &Candidate) -> bool {
        match self.kind {
            ExtremumKind::Max => self.value > other.value,
            ExtremumKind::Min => self.value < other.value,
        }
    }
}

/// Local maxima of `x`, plateaus reported at their middle sample.
fn local_maxima(x: &[f64]) -> Vec<usize> {
    let n = x.len();
    let mut peaks = Vec::new();
    if n < 3 {
        return peaks;
    }
    let mut i = 1;
    while i < n - 1 {
        if x[i - 1] < x[i] {
            let mut ahead = i + 1;
            while ahead < n - 1 && x[ahead] == x[i] {
                ahead += 1;
            }
            if x[ahead] < x[i] {
                peaks.push((i + ahead - 1) / 2);
                i = ahead;
                continue;
            }
        }
        i += 1;
    }
    peaks
}

/// Height of the peak above the higher of its two bases, where each base is
/// the lowest point before the signal rises above the peak (or ends).
fn prominence(x: &[f64], peak: usize) -> f64 {
    let v = x[peak];
    let mut left_min = v;
    let mut i = peak;
    loop {
        if x[i] > v {
            break;
        }
        left_min = left_min.min(x[i]);
        if i == 0 {
            break;
        }
        i -= 1;
    }
    let mut right_min = v;
    for &xi in &x[peak..] {
        if xi > v {
            break;
        }
        right_min = right_min.min(xi);
    }
    v - left_min.max(right_min)
}

fn candidates(x: &[f64], kind: ExtremumKind, threshold: f64) -> Vec<Candidate> {
    let work: Vec<f64> = match kind {
        ExtremumKind::Max => x.to_vec(),
        ExtremumKind::Min => x.iter().map(|v| -v).collect(),
    };
    local_maxima(&work)
        .into_iter()
        .map(|index| Candidate { index, kind, value: x[index], prominence: prominence(&work, index) })
        .filter(|c| c.prominence >= threshold)
        .collect()
}

/// Greedy per-kind distance filter: most prominent first, drop anything
/// closer than `sep` to an already kept candidate.
fn enforce_distance(mut cands: Vec<Candidate>, sep: usize) -> Vec<Candidate> {
    cands.sort_by(|a, b| b.prominence.total_cmp(&a.prominence).then(a.index.cmp(&b.index)));
    let mut kept: Vec<Candidate> = Vec::with_capacity(cands.len());
    for c in cands {
        if kept.iter().all(|k| k.index.abs_diff(c.index) >= sep) {
            kept.push(c);
        }
    }
    kept.sort_by_key(|c| c.index);
    kept
}

/// Collapses runs of same-kind neighbours to their most extreme member.
fn alternate(sorted: Vec<Candidate>) -> Vec<Candidate> {
    let mut out: Vec<Candidate> = Vec::with_capacity(sorted.len());
    for c in sorted {
        match out.last_mut() {
            Some(last) if last.kind == c.kind => {
                if c.beats(last) {
                    *last = c;
                }
            }
            _ => out.push(c),
        }
    }
    out
}

/// Finds alternating knee-angle maxima and minima.
///
/// `min_prominence` is relative to half the signal's peak-to-peak range, so
/// the result does not change under positive rescaling or offset. Adjacent
/// opposite-kind extrema closer than `min_separation_ms` are removed as a
/// pair (a wiggle), after which alternation is restored.
pub fn detect_extrema(signal: &SampledSignal, min_prominence: f64, min_separation_ms: f64) -> Result<ExtremaList> {
    if !(min_prominence > 0.0 && min_prominence < 1.0) {
        return Err(Error::InvalidArgument(format!("prominence {min_prominence} outside (0, 1)")));
    }
    if !(min_separation_ms > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "minimum separation must be positive, got {min_separation_ms} ms"
        )));
    }
    let x = signal.samples();
    let sep = ms_to_samples(min_separation_ms, signal.sample_rate_hz()).max(1);
    if x.len() < 2 * sep {
        return Err(Error::SignalTooShort { len: x.len(), min_separation: sep });
    }
    let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let half_range = (hi - lo) / 2.0;
    if half_range <= 0.0 {
        return Err(Error::NoGaitCycles);
    }
    let threshold = min_prominence * half_range;

    let mut all = enforce_distance(candidates(x, ExtremumKind::Max, threshold), sep);
    all.extend(enforce_distance(candidates(x, ExtremumKind::Min, threshold), sep));
    all.sort_by_key(|c| c.index);
    let mut list = alternate(all);

    loop {
        let closest = list
            .windows(2)
            .enumerate()
            .map(|(i, w)| (w[1].index - w[0].index, i))
            .filter(|&(gap, _)| gap < sep)
            .min();
        let Some((_, i)) = closest else { break };
        list.drain(i..i + 2);
        list = alternate(list);
    }

    if list.is_empty() {
        return Err(Error::NoGaitCycles);
    }
    Ok(ExtremaList {
        indices: list.iter().map(|c| c.index).collect(),
        kinds: list.iter().map(|c| c.kind).collect(),
    })
}

/// Constant label on each inter-extremum interval; the label toggles at
/// every extremum. Samples before the first extremum carry the label of the
/// interval that would precede it (the opposite one).
pub fn label_phases(knee: &SampledSignal, extrema: &ExtremaList, convention: PhaseConvention) -> Result<PhaseSeries> {
    extrema.validate(knee.len())?;
    let mut labels = Vec::with_capacity(knee.len());
    let first_kind = extrema.kinds[0];
    labels.resize(extrema.indices[0], convention.label_after(first_kind.opposite()));
    for (pos, &kind) in extrema.kinds.iter().enumerate() {
        let end = extrema.indices.get(pos + 1).copied().unwrap_or(knee.len());
        labels.resize(end, convention.label_after(kind));
    }
    Ok(PhaseSeries { labels, convention })
}
