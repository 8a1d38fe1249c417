//! Finite-size algebraic identities with machine-precision residuals.
//!
//! Each check builds both sides of a matrix identity at one or more sizes and
//! reports the spectral norm of the difference.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matgen::{cuntz_isometry, diagonal, hankel, reflect_conjugate, toeplitz};
use crate::seqlab::Horizon;
use crate::spectra::{max_abs, singular_values, spectral_norm};
use crate::symbols::{FourierSymbol, DEFAULT_SAMPLES};
use crate::CMat;

/// Relative bound of the Widom check, scaled by `1 + ‖a‖∞‖b‖∞`.
pub const WIDOM_TOLERANCE: f64 = 1e-12;
/// Bound for identities whose entries are copied or 0/1 products.
pub const EXACT_TOLERANCE: f64 = 1e-14;
/// Default bound for `|‖T_n(a)‖ - ‖a‖∞|` at the largest sampled `n`.
pub const NORM_FORMULA_BOUND: f64 = 1e-2;

#[derive(Clone, Debug, PartialEq)]
pub struct IdentityReport {
    pub name: String,
    pub n_range: Vec<usize>,
    /// `(n, residual)` for every checked size.
    pub rows: Vec<(usize, f64)>,
    pub max_residual: f64,
    pub bound: f64,
    pub pass: bool,
    /// Sizes that hit a boundary case of the checked formula.
    pub boundary: Vec<usize>,
    /// Auxiliary per-size values (the norm sequence for the norm formula).
    pub trace: Vec<(usize, f64)>,
}

impl IdentityReport {
    pub fn new(name: impl Into<String>, rows: Vec<(usize, f64)>, bound: f64) -> Self {
        let max_residual = rows.iter().map(|r| r.1).fold(0.0, f64::max);
        Self {
            name: name.into(),
            n_range: rows.iter().map(|r| r.0).collect(),
            rows,
            max_residual,
            bound,
            pass: max_residual <= bound,
            boundary: Vec::new(),
            trace: Vec::new(),
        }
    }
}

fn residual(lhs: &CMat, rhs: &CMat) -> Result<f64> {
    let d = lhs - rhs;
    if max_abs(&d) == 0.0 {
        return Ok(0.0);
    }
    spectral_norm(&d)
}

fn leading(m: &CMat, n: usize) -> CMat {
    m.submatrix(0, 0, n, n).to_owned()
}

/// Both sides of `P_n T(ab) P_n = T_n(a) T_n(b) + P_n H(a) H(b̃) P_n
/// + R_n H(ã) H(b) R_n`.
pub fn widom_sides(a: &FourierSymbol, b: &FourierSymbol, n: usize) -> (CMat, CMat) {
    let lhs = toeplitz(&a.multiply(b), n);
    // Hankels of trig polynomials vanish beyond their degree, so products of
    // size n + degree agree with the infinite ones on the leading n × n block.
    let m = n + a.degree().max(b.degree());
    let h1 = &hankel(a, m) * &hankel(&b.flip(), m);
    let h2 = &hankel(&a.flip(), m) * &hankel(b, m);
    let rhs = &(&(&toeplitz(a, n) * &toeplitz(b, n)) + &leading(&h1, n))
        + &reflect_conjugate(&leading(&h2, n));
    (lhs, rhs)
}

pub fn widom_check(a: &FourierSymbol, b: &FourierSymbol, n: usize) -> Result<IdentityReport> {
    let (lhs, rhs) = widom_sides(a, b, n);
    let scale = 1.0 + a.sup_norm(DEFAULT_SAMPLES) * b.sup_norm(DEFAULT_SAMPLES);
    Ok(IdentityReport::new(
        "widom",
        vec![(n, residual(&lhs, &rhs)?)],
        WIDOM_TOLERANCE * scale,
    ))
}

/// `R_n T_n(a) R_n = T_n(ã)`.
pub fn reflection_check(a: &FourierSymbol, n: usize) -> Result<IdentityReport> {
    let lhs = reflect_conjugate(&toeplitz(a, n));
    let rhs = toeplitz(&a.flip(), n);
    Ok(IdentityReport::new(
        "reflection",
        vec![(n, residual(&lhs, &rhs)?)],
        EXACT_TOLERANCE,
    ))
}

fn check_cuntz(big_n: usize, word: &[usize]) -> Result<()> {
    if big_n < 2 {
        return Err(Error::InvalidCuntz(format!("N = {big_n} (need N >= 2)")));
    }
    if let Some(&i) = word.iter().find(|&&i| i >= big_n) {
        return Err(Error::InvalidCuntz(format!("letter {i} outside [0, {big_n})")));
    }
    Ok(())
}

/// Residuals of the truncated Cuntz relations at one size.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CuntzResiduals {
    /// `max_{i≠j} ‖P_n S_i^* P_n S_j P_n‖`.
    pub orthogonality: f64,
    /// `‖Σ_i P_n S_i P_n S_i^* P_n - P_n‖`.
    pub completeness: f64,
    /// `max_i ‖S S^* S - S‖` with `S = P_n S_i P_n`.
    pub partial_isometry: f64,
}

impl CuntzResiduals {
    pub fn max(&self) -> f64 {
        self.orthogonality.max(self.completeness).max(self.partial_isometry)
    }
}

pub fn cuntz_residuals(big_n: usize, n: usize) -> Result<CuntzResiduals> {
    check_cuntz(big_n, &[])?;
    let s: Vec<CMat> = (0..big_n).map(|i| cuntz_isometry(big_n, i, n)).collect();
    let zero = CMat::zeros(n, n);
    let mut orthogonality = 0.0f64;
    let mut partial_isometry = 0.0f64;
    let mut sum = CMat::zeros(n, n);
    for (i, si) in s.iter().enumerate() {
        for (j, sj) in s.iter().enumerate() {
            if i != j {
                orthogonality = orthogonality.max(residual(&(si.adjoint() * sj), &zero)?);
            }
        }
        let ssa = si * si.adjoint();
        partial_isometry = partial_isometry.max(residual(&(&ssa * si), si)?);
        sum = &sum + &ssa;
    }
    let completeness = residual(&sum, &CMat::identity(n, n))?;
    Ok(CuntzResiduals {
        orthogonality,
        completeness,
        partial_isometry,
    })
}

/// Truncated Cuntz relations for every `n` in `sizes`.
pub fn cuntz_relations_check(big_n: usize, sizes: &[usize]) -> Result<IdentityReport> {
    check_cuntz(big_n, &[])?;
    let rows = sizes
        .par_iter()
        .map(|&n| Ok((n, cuntz_residuals(big_n, n)?.max())))
        .collect::<Result<Vec<_>>>()?;
    Ok(IdentityReport::new(
        format!("cuntz-relations[N={big_n}]"),
        rows,
        EXACT_TOLERANCE,
    ))
}

/// `v = i_1 + i_2 N + … + i_k N^{k-1}`.
pub fn word_value(big_n: usize, word: &[usize]) -> usize {
    word.iter().rev().fold(0, |acc, &i| acc * big_n + i)
}

/// Rank `m = ⌈(n - v) / N^k⌉`, clamped to `[0, n]`, of the projection
/// predicted for `W^* W`.
pub fn cuntz_projection_rank(big_n: usize, word: &[usize], n: usize) -> usize {
    let v = word_value(big_n, word);
    let nk = big_n.pow(word.len() as u32);
    if n <= v {
        0
    } else {
        (n - v).div_ceil(nk).min(n)
    }
}

/// `W = P_n S_{i_1} P_n S_{i_2} P_n … P_n S_{i_k} P_n`.
pub fn cuntz_word(big_n: usize, word: &[usize], n: usize) -> Result<CMat> {
    check_cuntz(big_n, word)?;
    Ok(word.iter().fold(CMat::identity(n, n), |acc, &i| {
        &acc * &cuntz_isometry(big_n, i, n)
    }))
}

/// Compares `W^* W` with `P_m`, `m` from [`cuntz_projection_rank`]. Sizes
/// with `n ≡ v (mod N^k)` are listed in `boundary`.
pub fn cuntz_projection_check(big_n: usize, word: &[usize], n: usize) -> Result<IdentityReport> {
    if word.is_empty() {
        return Err(Error::InvalidCuntz("empty word".into()));
    }
    let w = cuntz_word(big_n, word, n)?;
    let lhs = w.adjoint() * &w;
    let m = cuntz_projection_rank(big_n, word, n);
    let rhs = diagonal((0..n).map(|j| if j < m { 1.0 } else { 0.0 }));
    let letters: Vec<String> = word.iter().map(|i| i.to_string()).collect();
    let mut report = IdentityReport::new(
        format!("cuntz-projection[N={big_n},word={}]", letters.join("")),
        vec![(n, residual(&lhs, &rhs)?)],
        EXACT_TOLERANCE,
    );
    let v = word_value(big_n, word);
    if n >= v && (n - v) % big_n.pow(word.len() as u32) == 0 {
        report.boundary.push(n);
    }
    Ok(report)
}

/// `|‖T_n(a)‖ - ‖a‖∞|` at the largest sampled `n`; `trace` holds `‖T_n(a)‖`
/// for every sampled `n`.
pub fn norm_formula_check(a: &FourierSymbol, horizon: &Horizon, bound: f64) -> Result<IdentityReport> {
    let sup = a.sup_norm(DEFAULT_SAMPLES);
    let trace = horizon
        .indices()
        .par_iter()
        .map(|&n| {
            let sv = singular_values(&toeplitz(a, n))?;
            Ok((n, sv.last().copied().unwrap_or(0.0)))
        })
        .collect::<Result<Vec<_>>>()?;
    let &(n, top) = trace.last().expect("horizon is nonempty");
    let mut report = IdentityReport::new("norm-formula", vec![(n, (top - sup).abs())], bound);
    report.trace = trace;
    Ok(report)
}
