//! Dense spectral kernels and finite-horizon limit-set tooling.

use faer::{Mat, Side};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::CMat;

/// Relative tolerance for the self-adjointness test.
pub const SELF_ADJOINT_TOLERANCE: f64 = 1e-10;

/// Eigenvalues within this distance of an interval endpoint are snapped onto it.
pub const ENDPOINT_SNAP: f64 = 1e-10;

fn breakdown(size: usize, e: impl std::fmt::Debug) -> Error {
    Error::NumericalBreakdown {
        size,
        message: format!("{e:?}"),
    }
}

/// True when every entry has zero imaginary part.
pub fn is_real(m: &CMat) -> bool {
    (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| m[(i, j)].im == 0.0))
}

fn real_part(m: &CMat) -> Mat<f64> {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)].re)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMat) -> f64 {
    let mut out = 0.0f64;
    for j in 0..m.ncols() {
        for i in 0..m.nrows() {
            out = out.max(m[(i, j)].norm());
        }
    }
    out
}

/// Largest entry modulus of `M - M*`.
pub fn hermitian_residual(m: &CMat) -> f64 {
    let n = m.nrows();
    let mut out = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            out = out.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    out
}

/// Largest entry modulus of `MM* - M*M`.
pub fn normality_residual(m: &CMat) -> f64 {
    let left = m * m.adjoint();
    let right = m.adjoint() * m;
    max_abs(&(&left - &right))
}

pub fn is_self_adjoint(m: &CMat) -> bool {
    m.nrows() == m.ncols()
        && hermitian_residual(m) <= SELF_ADJOINT_TOLERANCE * max_abs(m).max(1.0)
}

/// Singular values in nondecreasing order.
pub fn singular_values(m: &CMat) -> Result<Vec<f64>> {
    let n = m.nrows().min(m.ncols());
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut sv = if is_real(m) {
        real_part(m).singular_values().map_err(|e| breakdown(n, e))?
    } else {
        m.singular_values().map_err(|e| breakdown(n, e))?
    };
    sv.reverse();
    Ok(sv)
}

/// Full decomposition `M = U diag(s) V*` of a square matrix with `s`
/// nonincreasing.
pub fn svd(m: &CMat) -> Result<(CMat, Vec<f64>, CMat)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((CMat::zeros(0, 0), Vec::new(), CMat::zeros(0, 0)));
    }
    let lift = |x: faer::MatRef<'_, f64>| CMat::from_fn(x.nrows(), x.ncols(), |i, j| Complex64::new(x[(i, j)], 0.0));
    if is_real(m) {
        let d = real_part(m).svd().map_err(|e| breakdown(n, e))?;
        let s = d.S().column_vector().iter().copied().collect();
        Ok((lift(d.U()), s, lift(d.V())))
    } else {
        let d = m.svd().map_err(|e| breakdown(n, e))?;
        let s = d.S().column_vector().iter().map(|c| c.re).collect();
        Ok((d.U().to_owned(), s, d.V().to_owned()))
    }
}

/// Spectral norm, i.e. the largest singular value.
pub fn spectral_norm(m: &CMat) -> Result<f64> {
    Ok(singular_values(m)?.last().copied().unwrap_or(0.0))
}

/// Eigenvalues of a self-adjoint matrix in nondecreasing order.
pub fn sym_eigenvalues(m: &CMat) -> Result<Vec<f64>> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSelfAdjoint {
            residual: f64::INFINITY,
        });
    }
    if !is_self_adjoint(m) {
        return Err(Error::NotSelfAdjoint {
            residual: hermitian_residual(m),
        });
    }
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if is_real(m) {
        real_part(m)
            .self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| breakdown(n, e))
    } else {
        m.self_adjoint_eigenvalues(Side::Lower)
            .map_err(|e| breakdown(n, e))
    }
}

/// Eigen-decomposition `M = U diag(λ) U*` of a self-adjoint matrix, with
/// eigenvalues in nondecreasing order.
pub fn sym_eigen(m: &CMat) -> Result<(Vec<f64>, CMat)> {
    if !is_self_adjoint(m) {
        return Err(Error::NotSelfAdjoint {
            residual: hermitian_residual(m),
        });
    }
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), CMat::zeros(0, 0)));
    }
    let evd = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| breakdown(n, e))?;
    let values = evd.S().column_vector().iter().map(|c| c.re).collect();
    Ok((values, evd.U().to_owned()))
}

/// Eigenvalues of a general square matrix (used for normal sequences).
pub fn eigenvalues(m: &CMat) -> Result<Vec<Complex64>> {
    let n = m.nrows();
    if n == 0 {
        return Ok(Vec::new());
    }
    if is_self_adjoint(m) {
        return Ok(sym_eigenvalues(m)?
            .into_iter()
            .map(|x| Complex64::new(x, 0.0))
            .collect());
    }
    m.eigenvalues().map_err(|e| breakdown(n, e))
}

/// Number of eigenvalues strictly inside `(lo, hi)`, counted with
/// multiplicity.
pub fn count_in_interval(eigs: &[f64], lo: f64, hi: f64) -> Result<usize> {
    if lo.is_nan() || hi.is_nan() || lo >= hi {
        return Err(Error::InvalidInterval { lo, hi });
    }
    let snap = |x: f64| {
        if (x - lo).abs() <= ENDPOINT_SNAP {
            lo
        } else if (x - hi).abs() <= ENDPOINT_SNAP {
            hi
        } else {
            x
        }
    };
    Ok(eigs
        .iter()
        .map(|&x| snap(x))
        .filter(|&x| x > lo && x < hi)
        .count())
}

fn sorted_unique(points: &[Complex64]) -> Vec<Complex64> {
    let mut v = points.to_vec();
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    v.dedup();
    v
}

/// Distance from `x` to the nearest point of a sorted, real-valued set.
fn nearest_real(sorted: &[f64], x: f64) -> f64 {
    let idx = sorted.partition_point(|&v| v < x);
    let mut best = f64::INFINITY;
    if idx < sorted.len() {
        best = best.min((sorted[idx] - x).abs());
    }
    if idx > 0 {
        best = best.min((sorted[idx - 1] - x).abs());
    }
    best
}

fn one_sided(from: &[Complex64], to: &[Complex64]) -> f64 {
    if from.iter().chain(to).all(|z| z.im == 0.0) {
        let to_re: Vec<f64> = to.iter().map(|z| z.re).collect();
        from.iter()
            .map(|z| nearest_real(&to_re, z.re))
            .fold(0.0, f64::max)
    } else {
        from.iter()
            .map(|a| to.iter().map(|b| (a - b).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    }
}

/// Hausdorff distance between two finite nonempty point sets.
pub fn hausdorff(l: &[Complex64], m: &[Complex64]) -> Result<f64> {
    if l.is_empty() || m.is_empty() {
        return Err(Error::EmptySet);
    }
    let l = sorted_unique(l);
    let m = sorted_unique(m);
    Ok(one_sided(&l, &m).max(one_sided(&m, &l)))
}

/// Real-valued convenience wrapper around [`hausdorff`].
pub fn hausdorff_real(l: &[f64], m: &[f64]) -> Result<f64> {
    let lift = |v: &[f64]| v.iter().map(|&x| Complex64::new(x, 0.0)).collect::<Vec<_>>();
    hausdorff(&lift(l), &lift(m))
}

/// Eigenvalues of `A_n` with multiplicity.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumSet {
    pub n: usize,
    pub values: Vec<Complex64>,
}

impl SpectrumSet {
    pub fn new(n: usize, values: Vec<Complex64>) -> Self {
        Self { n, values }
    }

    pub fn from_real(n: usize, values: &[f64]) -> Self {
        Self {
            n,
            values: values.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        }
    }

    pub fn real_values(&self) -> Vec<f64> {
        self.values.iter().map(|z| z.re).collect()
    }
}

/// Number of trailing entries covered by a tail fraction of `len` items.
pub fn tail_len(len: usize, fraction: f64) -> usize {
    if len == 0 {
        return 0;
    }
    ((fraction * len as f64).ceil() as usize).clamp(1, len)
}

/// Finite-horizon estimates of `limsup σ(A_n)` and `liminf σ(A_n)`.
///
/// Every point of the tail-window sets is a candidate. A candidate enters
/// the limsup estimate when points of at least two distinct indices lie
/// within `eps` of it (one index if the window has a single set), and the
/// liminf estimate when every index of the window contributes such a
/// point. Both outputs are thinned so that kept points are more than
/// `eps / 2` apart.
pub fn limiting_sets(
    sets: &[SpectrumSet],
    eps: f64,
    tail: f64,
) -> (Vec<Complex64>, Vec<Complex64>) {
    let window = &sets[sets.len() - tail_len(sets.len(), tail)..];
    if window.is_empty() {
        return (Vec::new(), Vec::new());
    }
    let prepared: Vec<Vec<Complex64>> = window.iter().map(|s| sorted_unique(&s.values)).collect();
    let near = |set: &[Complex64], x: Complex64| -> bool {
        if x.im == 0.0 && set.iter().all(|z| z.im == 0.0) {
            let re: Vec<f64> = set.iter().map(|z| z.re).collect();
            nearest_real(&re, x.re) <= eps
        } else {
            set.iter().any(|z| (z - x).norm() <= eps)
        }
    };
    let candidates = sorted_unique(&prepared.concat());
    let need_sup = window.len().min(2);
    let mut sup = Vec::new();
    let mut inf = Vec::new();
    for &x in &candidates {
        let hits = prepared.iter().filter(|set| near(set, x)).count();
        if hits >= need_sup {
            sup.push(x);
        }
        if hits == prepared.len() {
            inf.push(x);
        }
    }
    (thin(sup, eps / 2.0), thin(inf, eps / 2.0))
}

fn thin(points: Vec<Complex64>, radius: f64) -> Vec<Complex64> {
    let mut kept: Vec<Complex64> = Vec::new();
    for p in points {
        if kept.iter().all(|k| (k - p).norm() > radius) {
            kept.push(p);
        }
    }
    kept
}

/// Singular values of one matrix of a sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct ProfileRow {
    pub n: usize,
    /// Nondecreasing: `sv[k - 1]` is `σ_k(A_n)`.
    pub sv: Vec<f64>,
}

impl ProfileRow {
    pub fn dim(&self) -> usize {
        self.sv.len()
    }

    /// `σ_k(A_n)`, the k-th smallest singular value (1-based).
    pub fn sigma(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.sv.get(i).copied())
    }

    /// `Σ_k(A_n) = σ_{δ(n)-k+1}(A_n)`, the k-th largest singular value;
    /// zero once `k` exceeds the dimension.
    pub fn big_sigma(&self, k: usize) -> f64 {
        if k == 0 || k > self.sv.len() {
            0.0
        } else {
            self.sv[self.sv.len() - k]
        }
    }
}

/// Table of ordered singular values over a range of sizes.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SingularProfile {
    pub rows: Vec<ProfileRow>,
}

impl SingularProfile {
    pub fn new(rows: Vec<ProfileRow>) -> Self {
        Self { rows }
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn indices(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.n).collect()
    }

    pub fn tail(&self, fraction: f64) -> &[ProfileRow] {
        &self.rows[self.rows.len() - tail_len(self.rows.len(), fraction)..]
    }

    /// Keeps the rows whose index satisfies `keep`.
    pub fn restrict(&self, mut keep: impl FnMut(usize) -> bool) -> Self {
        Self {
            rows: self.rows.iter().filter(|r| keep(r.n)).cloned().collect(),
        }
    }

    pub fn row(&self, n: usize) -> Option<&ProfileRow> {
        self.rows.iter().find(|r| r.n == n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matgen::{block_flip, toeplitz};
    use crate::symbols::FourierSymbol;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn real_mat(rows: &[&[f64]]) -> CMat {
        CMat::from_fn(rows.len(), rows[0].len(), |i, j| Complex64::new(rows[i][j], 0.0))
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize, complex: bool) -> CMat {
        CMat::from_fn(n, n, |_, _| {
            let im = if complex { rng.random_range(-1.0..1.0) } else { 0.0 };
            Complex64::new(rng.random_range(-1.0..1.0), im)
        })
    }

    fn hermitian(m: &CMat) -> CMat {
        let mut h = m + m.adjoint();
        for i in 0..h.nrows() {
            h[(i, i)].im = 0.0;
        }
        h
    }

    #[test]
    fn singular_values_examples() {
        assert_eq!(singular_values(&CMat::zeros(3, 3)).unwrap(), vec![0.0; 3]);
        let shift = toeplitz(&FourierSymbol::monomial(1), 6);
        let sv = singular_values(&shift).unwrap();
        assert!(sv[0].abs() < 1e-14);
        assert!(sv[1..].iter().all(|s| (s - 1.0).abs() < 1e-13));
        // Rotation by a complex phase is unitary.
        let u = CMat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 0) => Complex64::new(0.0, 1.0) / 2f64.sqrt(),
            (0, 1) => Complex64::new(1.0, 0.0) / 2f64.sqrt(),
            (1, 0) => Complex64::new(1.0, 0.0) / 2f64.sqrt(),
            _ => Complex64::new(0.0, 1.0) / 2f64.sqrt(),
        });
        let sv = singular_values(&u).unwrap();
        assert!(sv.iter().all(|s| (s - 1.0).abs() < 1e-14));
    }

    #[test]
    fn sym_eigenvalues_examples() {
        let d = real_mat(&[&[3.0, 0.0, 0.0], &[0.0, 1.0, 0.0], &[0.0, 0.0, 0.0]]);
        assert_eq!(sym_eigenvalues(&d).unwrap(), vec![0.0, 1.0, 3.0]);
        let e = sym_eigenvalues(&block_flip(2)).unwrap();
        assert!((e[0] + 1.0).abs() < 1e-15 && (e[1] - 1.0).abs() < 1e-15);
        let n = 4;
        let e = sym_eigenvalues(&toeplitz(&FourierSymbol::real([(1, 1.0), (-1, 1.0)]), n)).unwrap();
        for (idx, k) in (1..=n).rev().enumerate() {
            let expected = 2.0 * (k as f64 * PI / (n as f64 + 1.0)).cos();
            assert!((e[idx] - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn sym_eigenvalues_rejects_non_hermitian() {
        let m = real_mat(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(matches!(sym_eigenvalues(&m), Err(Error::NotSelfAdjoint { .. })));
    }

    #[test]
    fn complex_hermitian_eigenvalues() {
        // [[1, i], [-i, 1]] has eigenvalues 0 and 2.
        let m = CMat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => Complex64::new(0.0, 1.0),
            (1, 0) => Complex64::new(0.0, -1.0),
            _ => Complex64::new(1.0, 0.0),
        });
        let e = sym_eigenvalues(&m).unwrap();
        assert!(e[0].abs() < 1e-14 && (e[1] - 2.0).abs() < 1e-14);
    }

    #[test]
    fn count_examples() {
        assert_eq!(count_in_interval(&[0.0, 1.0, 3.0], -0.5, 0.5), Ok(1));
        assert_eq!(count_in_interval(&[-1.0, 1.0], -2.0, 2.0), Ok(2));
        assert!(count_in_interval(&[0.0], 1.0, 1.0).is_err());
        // Open interval: endpoints excluded after snapping.
        assert_eq!(count_in_interval(&[1.0 + 1e-12, 2.0], 1.0, 2.0 + 1e-11), Ok(0));
    }

    #[test]
    fn hausdorff_examples() {
        assert_eq!(hausdorff_real(&[0.0], &[1.0]), Ok(1.0));
        assert_eq!(hausdorff_real(&[0.0, 1.0], &[0.0]), Ok(1.0));
        assert_eq!(hausdorff_real(&[0.5, 2.0], &[2.0, 0.5]), Ok(0.0));
        assert_eq!(hausdorff_real(&[], &[1.0]), Err(Error::EmptySet));
        let i = Complex64::new(0.0, 1.0);
        assert!((hausdorff(&[i], &[Complex64::new(1.0, 0.0)]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn limiting_sets_examples() {
        let constant: Vec<SpectrumSet> = (1..=6).map(|n| SpectrumSet::from_real(n, &[0.0, 1.0])).collect();
        let (sup, inf) = limiting_sets(&constant, 0.1, 1.0);
        assert_eq!(sup.len(), 2);
        assert_eq!(inf.len(), 2);

        let alternating: Vec<SpectrumSet> = (1..=6)
            .map(|n| SpectrumSet::from_real(n, &[(n % 2) as f64]))
            .collect();
        let (sup, inf) = limiting_sets(&alternating, 0.1, 1.0);
        assert_eq!(sup.len(), 2);
        assert!(inf.is_empty());
    }

    #[test]
    fn limiting_sets_cover_cosine_band() {
        let sym = FourierSymbol::real([(1, 1.0), (-1, 1.0)]);
        let sets: Vec<SpectrumSet> = (1..=8)
            .map(|j| {
                let n = 250 * j;
                SpectrumSet::from_real(n, &sym_eigenvalues(&toeplitz(&sym, n)).unwrap())
            })
            .collect();
        let eps = 0.02;
        let (_, inf) = limiting_sets(&sets, eps, 0.5);
        for j in 0..=400 {
            let x = -2.0 + 4.0 * j as f64 / 400.0;
            let d = inf.iter().map(|z| (z.re - x).abs()).fold(f64::INFINITY, f64::min);
            assert!(d <= eps, "x = {x} uncovered (distance {d})");
        }
    }

    #[test]
    fn weyl_perturbation_bound() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for trial in 0..20 {
            let n = 2 + trial % 9;
            let m = random_matrix(&mut rng, n, trial % 2 == 0);
            let e = random_matrix(&mut rng, n, true);
            let e = CMat::from_fn(n, n, |i, j| e[(i, j)] * 1e-2);
            let perturbed = &m + &e;
            let bound = spectral_norm(&e).unwrap();
            let a = singular_values(&m).unwrap();
            let b = singular_values(&perturbed).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() <= bound + 1e-12);
            }
        }
    }

    #[test]
    fn cauchy_interlacing_holds() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 2..12 {
            let h = hermitian(&random_matrix(&mut rng, n, true));
            let big = sym_eigenvalues(&h).unwrap();
            let lead = h.submatrix(0, 0, n - 1, n - 1).to_owned();
            let small = sym_eigenvalues(&lead).unwrap();
            for k in 0..n - 1 {
                assert!(big[k] <= small[k] + 1e-12 && small[k] <= big[k + 1] + 1e-12);
            }
        }
    }

    #[test]
    fn norm_is_largest_singular_value() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_matrix(&mut rng, 7, true);
        let sv = singular_values(&m).unwrap();
        assert!(sv.windows(2).all(|w| w[0] <= w[1]));
        let fro: f64 = sv.iter().map(|s| s * s).sum::<f64>().sqrt();
        assert!((fro - m.norm_l2()).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn hausdorff_triangle(
            a in prop::collection::vec(-5.0f64..5.0, 1..8),
            b in prop::collection::vec(-5.0f64..5.0, 1..8),
            c in prop::collection::vec(-5.0f64..5.0, 1..8),
        ) {
            let ab = hausdorff_real(&a, &b).unwrap();
            let bc = hausdorff_real(&b, &c).unwrap();
            let ac = hausdorff_real(&a, &c).unwrap();
            prop_assert!(ac <= ab + bc + 1e-12);
            prop_assert_eq!(ab, hausdorff_real(&b, &a).unwrap());
        }
    }
}
