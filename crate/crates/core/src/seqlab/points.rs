//! Essential and transient points of self-adjoint sequences.
//!
//! A real `λ` is essential when the eigenvalue counts `N(A_n, (λ-ε, λ+ε))`
//! grow without bound for every `ε`, and transient when they stay bounded for
//! some `ε`. At a finite horizon a series is bounded when its tail never
//! exceeds the maximum reached before the tail (or, without a head, when the
//! tail is constant). It grows when it is not bounded, has a nonnegative
//! least-squares slope over the tail and ends at `growth_min` or above.

use std::fmt;

use rayon::prelude::*;

use super::{check_range, linear_slope, with_size, Horizon, Thresholds};
use crate::error::Result;
use crate::matgen::MatrixSequence;
use crate::spectra::{count_in_interval, sym_eigenvalues, tail_len, SpectrumSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PointKind {
    Essential,
    Transient,
    Mixed,
    Inconclusive,
}

impl fmt::Display for PointKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PointKind::Essential => "Essential",
            PointKind::Transient => "Transient",
            PointKind::Mixed => "Mixed",
            PointKind::Inconclusive => "Inconclusive",
        };
        f.write_str(s)
    }
}

/// `c_n(ε) = N(A_n, (λ-ε, λ+ε))` over the sampled `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct CountSeries {
    pub epsilon: f64,
    pub counts: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointClass {
    pub lambda: f64,
    pub class: PointKind,
    pub counts: Vec<CountSeries>,
    /// Classes of the two halves of the split (selected, complement) when
    /// both halves have enough samples.
    pub split: Option<(PointKind, PointKind)>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Trend {
    Growing,
    Bounded,
    Unclear,
}

fn trend(series: &[(usize, usize)], th: &Thresholds) -> Trend {
    if series.is_empty() {
        return Trend::Unclear;
    }
    let window = tail_len(series.len(), th.tail).max(3.min(series.len()));
    let (head, tail) = series.split_at(series.len() - window);
    let tail_max = tail.iter().map(|c| c.1).max().unwrap_or(0);
    let bounded = match head.iter().map(|c| c.1).max() {
        Some(head_max) => tail_max <= head_max,
        None => tail.iter().all(|c| c.1 == tail[0].1),
    };
    if bounded {
        return Trend::Bounded;
    }
    let xs: Vec<f64> = tail.iter().map(|c| c.0 as f64).collect();
    let ys: Vec<f64> = tail.iter().map(|c| c.1 as f64).collect();
    let last = tail[tail.len() - 1].1;
    match linear_slope(&xs, &ys) {
        Some(s) if s >= 0.0 && last >= th.growth_min => Trend::Growing,
        _ => Trend::Unclear,
    }
}

fn kind_of(series: &[CountSeries], keep: impl Fn(usize) -> bool, th: &Thresholds) -> PointKind {
    let trends: Vec<Trend> = series
        .iter()
        .map(|s| {
            let sub: Vec<(usize, usize)> = s.counts.iter().copied().filter(|c| keep(c.0)).collect();
            trend(&sub, th)
        })
        .collect();
    if trends.is_empty() {
        PointKind::Inconclusive
    } else if trends.iter().all(|&t| t == Trend::Growing) {
        PointKind::Essential
    } else if trends.contains(&Trend::Bounded) {
        PointKind::Transient
    } else {
        PointKind::Inconclusive
    }
}

/// Minimal number of samples on each side of a split.
const MIN_SPLIT_SAMPLES: usize = 3;

fn classify_one(
    spectra: &[SpectrumSet],
    eigs: &[Vec<f64>],
    lambda: f64,
    eps_grid: &[f64],
    split: &dyn Fn(usize) -> bool,
    th: &Thresholds,
) -> Result<PointClass> {
    let counts = eps_grid
        .iter()
        .map(|&eps| {
            let counts = spectra
                .iter()
                .zip(eigs)
                .map(|(s, e)| Ok((s.n, count_in_interval(e, lambda - eps, lambda + eps)?)))
                .collect::<Result<Vec<_>>>()?;
            Ok(CountSeries {
                epsilon: eps,
                counts,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let full = kind_of(&counts, |_| true, th);
    let selected = spectra.iter().filter(|s| split(s.n)).count();
    let rest = spectra.len() - selected;
    let halves = (selected >= MIN_SPLIT_SAMPLES && rest >= MIN_SPLIT_SAMPLES).then(|| {
        (
            kind_of(&counts, split, th),
            kind_of(&counts, |n| !split(n), th),
        )
    });
    let class = match halves {
        Some((PointKind::Essential, PointKind::Transient))
        | Some((PointKind::Transient, PointKind::Essential)) => PointKind::Mixed,
        _ => full,
    };
    Ok(PointClass {
        lambda,
        class,
        counts,
        split: halves,
    })
}

/// Eigenvalues of every sampled `A_n` of a self-adjoint sequence.
pub fn sym_spectra(seq: &MatrixSequence, horizon: &Horizon, th: &Thresholds) -> Result<Vec<SpectrumSet>> {
    let indices = horizon.indices();
    check_range(seq, &indices, th)?;
    indices
        .par_iter()
        .map(|&n| {
            let m = seq.generate(n)?;
            let e = sym_eigenvalues(&m).map_err(|e| with_size(e, n))?;
            Ok(SpectrumSet::from_real(n, &e))
        })
        .collect()
}

/// Classifies each `λ` from precomputed spectra, splitting the horizon with
/// `split` to look for mixed behaviour.
pub fn classify_points_from_spectra(
    spectra: &[SpectrumSet],
    lambdas: &[f64],
    eps_grid: &[f64],
    split: &dyn Fn(usize) -> bool,
    th: &Thresholds,
) -> Result<Vec<PointClass>> {
    let eigs: Vec<Vec<f64>> = spectra.iter().map(SpectrumSet::real_values).collect();
    lambdas
        .iter()
        .map(|&l| classify_one(spectra, &eigs, l, eps_grid, split, th))
        .collect()
}

fn even(n: usize) -> bool {
    n % 2 == 0
}

/// Classifies `λ` with the parity split.
pub fn classify_point(
    seq: &MatrixSequence,
    lambda: f64,
    eps_grid: &[f64],
    horizon: &Horizon,
    th: &Thresholds,
) -> Result<PointClass> {
    classify_point_with_split(seq, lambda, eps_grid, horizon, &even, th)
}

/// Classifies `λ` with a caller-provided split of the indices.
pub fn classify_point_with_split(
    seq: &MatrixSequence,
    lambda: f64,
    eps_grid: &[f64],
    horizon: &Horizon,
    split: &dyn Fn(usize) -> bool,
    th: &Thresholds,
) -> Result<PointClass> {
    let spectra = sym_spectra(seq, horizon, th)?;
    let mut out = classify_points_from_spectra(&spectra, &[lambda], eps_grid, split, th)?;
    Ok(out.remove(0))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DichotomyReport {
    pub points: Vec<PointClass>,
}

impl DichotomyReport {
    /// Points that are neither essential nor transient.
    pub fn violations(&self) -> Vec<&PointClass> {
        self.points
            .iter()
            .filter(|p| matches!(p.class, PointKind::Mixed | PointKind::Inconclusive))
            .collect()
    }

    pub fn holds(&self) -> bool {
        self.violations().is_empty()
    }
}

/// Classifies every `λ` of the grid (parity split).
pub fn dichotomy_scan(
    seq: &MatrixSequence,
    lambdas: &[f64],
    eps_grid: &[f64],
    horizon: &Horizon,
    th: &Thresholds,
) -> Result<DichotomyReport> {
    let spectra = sym_spectra(seq, horizon, th)?;
    let points = classify_points_from_spectra(&spectra, lambdas, eps_grid, &even, th)?;
    Ok(DichotomyReport { points })
}
