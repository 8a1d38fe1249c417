//! Detectors that classify matrix sequences from finite-horizon data.
//!
//! Every detector works on a sampled horizon and reports a [`Verdict`] that
//! carries the diagnostics and thresholds it used. Limits (`lim`, `liminf`,
//! `limsup`) are replaced by statistics over a tail window of the horizon and
//! by least-squares trends in log-log scale.

mod points;

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matgen::{MatrixSequence, RankOne};
use crate::spectra::{
    self, singular_values, tail_len, ProfileRow, SingularProfile, SpectrumSet,
};
use crate::CMat;

pub use points::{
    classify_point, classify_point_with_split, classify_points_from_spectra, dichotomy_scan,
    sym_spectra, CountSeries, DichotomyReport, PointClass, PointKind,
};

/// Sampled indices `n_min, n_min + step, …` up to `n_max`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Horizon {
    pub n_min: usize,
    pub n_max: usize,
    pub step: usize,
}

impl Horizon {
    pub fn new(n_min: usize, n_max: usize, step: usize) -> Result<Self> {
        if n_min == 0 || step == 0 || n_min > n_max {
            return Err(Error::InvalidHorizon(format!(
                "n_min = {n_min}, n_max = {n_max}, step = {step}"
            )));
        }
        Ok(Self { n_min, n_max, step })
    }

    pub fn indices(&self) -> Vec<usize> {
        (self.n_min..=self.n_max).step_by(self.step).collect()
    }

    fn from_indices(indices: &[usize]) -> Self {
        let n_min = indices.first().copied().unwrap_or(0);
        let n_max = indices.last().copied().unwrap_or(0);
        let step = match indices {
            [a, b, ..] if indices.windows(2).all(|w| w[1] - w[0] == b - a) => b - a,
            _ => 0,
        };
        Self { n_min, n_max, step }
    }
}

/// Thresholds shared by the detectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Thresholds {
    /// Singular values below this count as vanishing.
    pub tau_zero: f64,
    /// Singular values at or above this count as bounded away from zero.
    pub tau_gap: f64,
    /// Lower bound for `σ_1` of a stable sequence.
    pub tau_stab: f64,
    /// Level below which `sup_{n≥k} Σ_k` signals compactness.
    pub tau_compact: f64,
    /// Fraction of the horizon used as the tail window.
    pub tail: f64,
    /// Number of leading/trailing singular values examined.
    pub probe_depth: usize,
    /// A log-log slope at or below this value means "tends to zero".
    pub decay_slope: f64,
    /// Minimal final count for an essential point.
    pub growth_min: usize,
    /// Largest matrix dimension the detectors will build.
    pub max_dim: usize,
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            tau_zero: 1e-6,
            tau_gap: 1e-3,
            tau_stab: 1e-6,
            tau_compact: 1e-2,
            tail: 0.25,
            probe_depth: 8,
            decay_slope: -0.5,
            growth_min: 3,
            max_dim: 4096,
        }
    }
}

impl Thresholds {
    fn record(&self, evidence: &mut BTreeMap<String, f64>) {
        let entries = [
            ("threshold.tau_zero", self.tau_zero),
            ("threshold.tau_gap", self.tau_gap),
            ("threshold.tau_stab", self.tau_stab),
            ("threshold.tau_compact", self.tau_compact),
            ("threshold.tail", self.tail),
            ("threshold.probe_depth", self.probe_depth as f64),
            ("threshold.decay_slope", self.decay_slope),
            ("threshold.growth_min", self.growth_min as f64),
        ];
        for (k, v) in entries {
            evidence.insert(k.to_string(), v);
        }
    }
}

/// Essential rank of a compact sequence.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EssRank {
    Finite(usize),
    Infinite,
}

impl fmt::Display for EssRank {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EssRank::Finite(r) => write!(f, "{r}"),
            EssRank::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Classification {
    Stable,
    Unstable,
    Fredholm { alpha: usize },
    Compact { ess_rank: EssRank },
    NotNormallySolvable,
    Fractal,
    NotFractal,
    Inconclusive,
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::Stable => write!(f, "Stable"),
            Classification::Unstable => write!(f, "Unstable"),
            Classification::Fredholm { alpha } => write!(f, "Fredholm({alpha})"),
            Classification::Compact { ess_rank } => write!(f, "Compact({ess_rank})"),
            Classification::NotNormallySolvable => write!(f, "NotNormallySolvable"),
            Classification::Fractal => write!(f, "Fractal"),
            Classification::NotFractal => write!(f, "NotFractal"),
            Classification::Inconclusive => write!(f, "Inconclusive"),
        }
    }
}

/// Outcome of one detector together with its numeric evidence.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub detector: &'static str,
    pub classification: Classification,
    pub evidence: BTreeMap<String, f64>,
    pub horizon: Horizon,
}

impl Verdict {
    fn new(detector: &'static str, indices: &[usize], th: &Thresholds) -> Self {
        let mut evidence = BTreeMap::new();
        th.record(&mut evidence);
        Self {
            detector,
            classification: Classification::Inconclusive,
            evidence,
            horizon: Horizon::from_indices(indices),
        }
    }

    fn set(&mut self, key: impl Into<String>, value: f64) {
        self.evidence.insert(key.into(), value);
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.evidence.get(key).copied()
    }
}

/// Least-squares slope of `ln y` against `ln n`. Values are floored at
/// `1e-300` so that exact zeros stay finite.
pub fn log_log_slope(points: &[(usize, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|&(n, _)| (n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|&(_, y)| y.max(1e-300).ln()).collect();
    linear_slope(&xs, &ys)
}

pub(crate) fn linear_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Some(sxy / sxx)
}

/// Tail statistics of one singular-value track.
#[derive(Clone, Copy, Debug)]
struct Track {
    min: f64,
    max: f64,
    slope: Option<f64>,
}

impl Track {
    fn of(rows: &[ProfileRow], value: impl Fn(&ProfileRow) -> Option<f64>) -> Option<Self> {
        let points: Vec<(usize, f64)> = rows
            .iter()
            .filter_map(|r| value(r).map(|v| (r.n, v)))
            .collect();
        if points.is_empty() {
            return None;
        }
        Some(Self {
            min: points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min),
            max: points.iter().map(|p| p.1).fold(0.0, f64::max),
            slope: log_log_slope(&points),
        })
    }

    fn tends_to_zero(&self, th: &Thresholds) -> bool {
        self.max < th.tau_zero || self.slope.is_some_and(|s| s <= th.decay_slope)
    }

    fn record(&self, v: &mut Verdict, name: &str) {
        v.set(format!("{name}.tail_min"), self.min);
        v.set(format!("{name}.tail_max"), self.max);
        if let Some(s) = self.slope {
            v.set(format!("{name}.slope"), s);
        }
    }
}

/// Singular values of `A_n` for every sampled `n`.
pub fn profile(seq: &MatrixSequence, horizon: &Horizon, th: &Thresholds) -> Result<SingularProfile> {
    let indices = horizon.indices();
    check_range(seq, &indices, th)?;
    let rows = indices
        .par_iter()
        .map(|&n| {
            let m = seq.generate(n)?;
            let sv = singular_values(&m).map_err(|e| with_size(e, n))?;
            Ok(ProfileRow { n, sv })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SingularProfile::new(rows))
}

pub(crate) fn check_range(seq: &MatrixSequence, indices: &[usize], th: &Thresholds) -> Result<()> {
    for &n in indices {
        if seq.max_index().is_some_and(|m| n > m) {
            return Err(Error::OutOfRange {
                label: seq.label().to_string(),
                n,
            });
        }
        if seq.dimension(n) > th.max_dim {
            return Err(Error::InvalidHorizon(format!(
                "dimension {} at n = {n} exceeds the cap {}",
                seq.dimension(n),
                th.max_dim
            )));
        }
    }
    Ok(())
}

pub(crate) fn with_size(e: Error, n: usize) -> Error {
    match e {
        Error::NumericalBreakdown { message, .. } => Error::NumericalBreakdown { size: n, message },
        other => other,
    }
}

/// Stable iff the tail minimum of `σ_1(A_n)` is at least `tau`.
pub fn classify_stability(p: &SingularProfile, tau: f64, th: &Thresholds) -> Verdict {
    let mut v = Verdict::new("stability", &p.indices(), th);
    v.set("tau", tau);
    if p.len() < 10 {
        v.set("sizes", p.len() as f64);
        return v;
    }
    let Some(track) = Track::of(p.tail(th.tail), |r| r.sigma(1)) else {
        return v;
    };
    track.record(&mut v, "sigma_1");
    v.classification = if track.min >= tau {
        Classification::Stable
    } else {
        Classification::Unstable
    };
    v
}

/// Fredholm index detection through the splitting of singular values.
///
/// Returns `Fredholm(α)` for the smallest `α ≤ probe_depth` such that
/// `σ_1, …, σ_α` have tail maximum below `tau_zero` and `σ_{α+1}` has tail
/// minimum at least `tau_gap` without a decaying trend; `NotNormallySolvable`
/// when every `σ_k`, `k ≤ probe_depth`, tends to zero; `Inconclusive`
/// otherwise.
pub fn classify_fredholm(p: &SingularProfile, tau_zero: f64, tau_gap: f64, th: &Thresholds) -> Verdict {
    let mut v = Verdict::new("fredholm", &p.indices(), th);
    v.set("tau_zero", tau_zero);
    v.set("tau_gap", tau_gap);
    if p.len() < 20 {
        v.set("sizes", p.len() as f64);
        return v;
    }
    let tail = p.tail(th.tail);
    let depth = th.probe_depth;
    let tracks: Vec<Option<Track>> = (1..=depth + 1)
        .map(|k| Track::of(tail, |r| r.sigma(k)))
        .collect();
    for (k, t) in tracks.iter().enumerate() {
        if let Some(t) = t {
            t.record(&mut v, &format!("sigma_{}", k + 1));
        }
    }
    for (alpha, t) in tracks.iter().enumerate() {
        let Some(t) = t else { break };
        if t.min >= tau_gap && !t.tends_to_zero(th) {
            v.classification = Classification::Fredholm { alpha };
            return v;
        }
        if t.max >= tau_zero {
            break;
        }
    }
    let zero_th = Thresholds {
        tau_zero,
        ..th.clone()
    };
    let all_vanish = tracks[..depth]
        .iter()
        .all(|t| t.is_some_and(|t| t.tends_to_zero(&zero_th)));
    if all_vanish {
        v.classification = Classification::NotNormallySolvable;
    }
    v
}

/// Compactness through the decay of `k ↦ sup_{n ≥ k} Σ_k(A_n)`.
///
/// The sequence is `Compact` when this quantity drops below `tau` for some
/// `k ≤ probe_depth`. The essential rank is the smallest `r` for which
/// `Σ_{r+1}` tends to zero, or `Infinite` if no probed `Σ_{r+1}` does.
pub fn classify_compact(p: &SingularProfile, tau: f64, probe_depth: usize, th: &Thresholds) -> Verdict {
    let mut v = Verdict::new("compact", &p.indices(), th);
    v.set("tau", tau);
    if p.is_empty() {
        return v;
    }
    let sups: Vec<f64> = (1..=probe_depth)
        .map(|k| {
            p.rows
                .iter()
                .filter(|r| r.n >= k)
                .map(|r| r.big_sigma(k))
                .fold(0.0, f64::max)
        })
        .collect();
    for (k, s) in sups.iter().enumerate() {
        v.set(format!("sup_big_sigma_{}", k + 1), *s);
    }
    let tail = p.tail(th.tail);
    let mut ess_rank = EssRank::Infinite;
    for r in 0..probe_depth {
        let track = Track::of(tail, |row| Some(row.big_sigma(r + 1))).expect("nonempty tail");
        track.record(&mut v, &format!("big_sigma_{}", r + 1));
        if track.tends_to_zero(th) {
            ess_rank = EssRank::Finite(r);
            break;
        }
    }
    if sups.iter().any(|&s| s < tau) {
        v.classification = Classification::Compact { ess_rank };
        if let EssRank::Finite(r) = ess_rank {
            v.set("ess_rank", r as f64);
        }
    }
    v
}

/// Eigenvalues of every sampled `A_n` after checking that it is normal.
pub fn normal_spectra(seq: &MatrixSequence, horizon: &Horizon, th: &Thresholds) -> Result<Vec<SpectrumSet>> {
    let indices = horizon.indices();
    check_range(seq, &indices, th)?;
    indices
        .par_iter()
        .map(|&n| {
            let m = seq.generate(n)?;
            let residual = spectra::normality_residual(&m);
            if residual > 1e-10 * spectra::max_abs(&m).max(1.0) {
                return Err(Error::NotNormal { n, residual });
            }
            let values = spectra::eigenvalues(&m).map_err(|e| with_size(e, n))?;
            Ok(SpectrumSet::new(n, values))
        })
        .collect()
}

/// Fractality of a normal sequence: the spectra in the tail window must be
/// pairwise within Hausdorff distance `eps`.
pub fn classify_fractal_normal(spectra: &[SpectrumSet], eps: f64, th: &Thresholds) -> Result<Verdict> {
    let indices: Vec<usize> = spectra.iter().map(|s| s.n).collect();
    let mut v = Verdict::new("fractal", &indices, th);
    v.set("epsilon", eps);
    let window = &spectra[spectra.len() - tail_len(spectra.len(), th.tail)..];
    if window.len() < 2 {
        return Ok(v);
    }
    let mut worst = (0.0f64, 0usize, 0usize);
    for (i, a) in window.iter().enumerate() {
        for b in &window[i + 1..] {
            let h = spectra::hausdorff(&a.values, &b.values)?;
            if h > worst.0 {
                worst = (h, a.n, b.n);
            }
        }
    }
    v.set("max_hausdorff", worst.0);
    if worst.0 <= eps {
        v.classification = Classification::Fractal;
    } else {
        v.classification = Classification::NotFractal;
        v.set("witness.n", worst.1 as f64);
        v.set("witness.m", worst.2 as f64);
    }
    Ok(v)
}

fn lower_median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    values[(values.len() - 1) / 2]
}

fn refine<'a>(
    current: Vec<&'a ProfileRow>,
    tol: f64,
    th: &Thresholds,
    value: impl Fn(&ProfileRow) -> f64,
) -> Vec<&'a ProfileRow> {
    if current.is_empty() {
        return current;
    }
    let tail = &current[current.len() - tail_len(current.len(), th.tail)..];
    let mut vals: Vec<f64> = tail.iter().map(|r| value(r)).collect();
    let median = lower_median(&mut vals);
    current
        .into_iter()
        .filter(|r| (value(r) - median).abs() <= tol)
        .collect()
}

/// Greedy diagonal refinement towards a subsequence on which the leading
/// and trailing singular values converge.
///
/// For `k = 1, …, probe_depth` the current index set is filtered twice: once
/// by `Σ_k` and once by `σ_k`, keeping indices whose value lies within `tol`
/// of the lower median over the tail of the current set.
pub fn extract_fractal_subsequence(
    p: &SingularProfile,
    probe_depth: usize,
    tol: f64,
    th: &Thresholds,
) -> Result<Vec<usize>> {
    let mut current: Vec<&ProfileRow> = p.rows.iter().collect();
    for k in 1..=probe_depth {
        current = refine(current, tol, th, |r| r.big_sigma(k));
        current = refine(current, tol, th, |r| r.sigma(k).unwrap_or(0.0));
    }
    if current.len() < 3 {
        return Err(Error::TooFewIndices {
            found: current.len(),
        });
    }
    Ok(current.iter().map(|r| r.n).collect())
}

/// `K_n` with `A_n + K_n` having its `alpha` smallest singular values lifted
/// to `σ_{alpha+1}(A_n)`; `rank K_n ≤ alpha`.
pub fn stabilizing_perturbation(a: &CMat, alpha: usize) -> Result<CMat> {
    let n = a.nrows();
    let mut k = CMat::zeros(n, a.ncols());
    if alpha == 0 || alpha >= n {
        return Ok(k);
    }
    let (u, s, v) = spectra::svd(a)?;
    // s is nonincreasing: the α smallest sit at the end.
    let target = s[n - alpha - 1];
    for j in n - alpha..n {
        let lift = target - s[j];
        for c in 0..n {
            let vc = v[(c, j)].conj();
            for r in 0..n {
                k[(r, c)] += u[(r, j)] * vc * lift;
            }
        }
    }
    Ok(k)
}

/// The stabilized sequence `(A_n + K_n)`.
pub fn stabilize(seq: &MatrixSequence, alpha: usize) -> MatrixSequence {
    seq.try_map(format!("{}+stabilizer[{alpha}]", seq.label()), move |n, a| {
        let k = stabilizing_perturbation(&a, alpha).map_err(|e| with_size(e, n))?;
        Ok(&a + &k)
    })
}

/// Counts of vanishing singular values per size for the alternating-weight
/// sequence `I + P_n K P_n (+ R_n K R_n for even n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct AlphaParity {
    pub rows: Vec<(usize, usize)>,
    /// The count over the tail of the odd sizes, if constant there.
    pub odd: Option<usize>,
    /// The count over the tail of the even sizes, if constant there.
    pub even: Option<usize>,
}

pub fn alpha_parity_check(k: &[RankOne], horizon: &Horizon, th: &Thresholds) -> Result<AlphaParity> {
    let seq = crate::matgen::sequences::alternating_weight(k.to_vec());
    let p = profile(&seq, horizon, th)?;
    let rows: Vec<(usize, usize)> = p
        .rows
        .iter()
        .map(|r| (r.n, r.sv.iter().filter(|&&s| s < th.tau_zero).count()))
        .collect();
    let tail_count = |parity: usize| {
        let sub: Vec<usize> = rows.iter().filter(|r| r.0 % 2 == parity).map(|r| r.1).collect();
        if sub.is_empty() {
            return None;
        }
        let tail = &sub[sub.len() - tail_len(sub.len(), th.tail)..];
        tail.iter().all(|&c| c == tail[0]).then_some(tail[0])
    };
    Ok(AlphaParity {
        odd: tail_count(1),
        even: tail_count(0),
        rows,
    })
}
