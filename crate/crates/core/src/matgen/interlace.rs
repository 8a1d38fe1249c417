//! Self-adjoint matrices with prescribed eigenvalues of all leading blocks.
//!
//! Given `A` with eigenvalues `α_1 ≤ … ≤ α_n` and a tuple `β` interlacing
//! `α`, the bordered matrix
//!
//! ```text
//!     B = [ A    U z ]
//!         [ z*U* c   ]
//! ```
//!
//! has eigenvalues `β` when `A = U diag(α) U*`, the border `z` is constant on
//! each cluster `γ_i` of equal `α` values with
//!
//! ```text
//!     x_i² · k_i · ∏_{j≠i} (γ_j − γ_i) = −∏_l (δ_l − γ_i)
//! ```
//!
//! (`k_i` the cluster size, `δ` what is left of `β` after removing `k_i − 1`
//! copies of each `γ_i`), and the corner is fixed by the trace,
//! `c = Σβ − Σα`.

use std::sync::Arc;

use num_complex::Complex64;
use rand::Rng;

use super::MatrixSequence;
use crate::error::{Error, Result};
use crate::spectra::{sym_eigen, sym_eigenvalues};
use crate::CMat;

/// Relative tolerance for the interlacing inequalities and for matching
/// repeated values of `β`.
pub const CLUSTER_TOLERANCE: f64 = 1e-8;

/// Relative spread below which prescribed values are merged into one
/// eigenvalue of higher multiplicity.
const MERGE_TOLERANCE: f64 = 1e-12;

/// Relative tolerance for the spectrum checks before and after extension.
const SPECTRUM_TOLERANCE: f64 = 1e-8;

/// Relative size of a negative `x²` that is clamped to zero.
const CLAMP_TOLERANCE: f64 = 1e-9;

fn scale_of(values: &[f64]) -> f64 {
    values.iter().fold(1.0f64, |m, v| m.max(v.abs()))
}

fn is_sorted(v: &[f64]) -> bool {
    v.windows(2).all(|w| w[0] <= w[1])
}

/// Checks `β_1 ≤ α_1 ≤ β_2 ≤ … ≤ α_n ≤ β_{n+1}` up to `tol`.
fn check_interlacing(alpha: &[f64], beta: &[f64], tol: f64) -> Result<()> {
    if beta.len() != alpha.len() + 1 {
        return Err(Error::NotInterlacing(format!(
            "expected {} values, got {}",
            alpha.len() + 1,
            beta.len()
        )));
    }
    if !is_sorted(alpha) || !is_sorted(beta) {
        return Err(Error::NotInterlacing("tuples must be nondecreasing".into()));
    }
    for (k, &a) in alpha.iter().enumerate() {
        if beta[k] > a + tol || a > beta[k + 1] + tol {
            return Err(Error::NotInterlacing(format!(
                "violation at position {}: {} ≤ {} ≤ {} fails",
                k + 1,
                beta[k],
                a,
                beta[k + 1]
            )));
        }
    }
    Ok(())
}

/// Clusters of a sorted tuple as `(start, multiplicity)`.
fn clusters(alpha: &[f64], tol: f64) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = Vec::new();
    for (i, &a) in alpha.iter().enumerate() {
        match out.last_mut() {
            Some((start, count)) if a - alpha[*start] <= tol => *count += 1,
            _ => out.push((i, 1)),
        }
    }
    out
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Extends self-adjoint `A` (eigenvalues `alpha`) to a self-adjoint matrix of
/// size `n + 1` whose leading `n × n` block is exactly `A` and whose
/// eigenvalues are `beta`.
pub fn interlace_extend(a: &CMat, alpha: &[f64], beta: &[f64]) -> Result<CMat> {
    let n = a.nrows();
    if a.ncols() != n || alpha.len() != n {
        return Err(Error::SpectrumMismatch(format!(
            "matrix of size {}×{} with {} prescribed eigenvalues",
            n,
            a.ncols(),
            alpha.len()
        )));
    }
    let scale = scale_of(alpha).max(scale_of(beta));
    let tol = CLUSTER_TOLERANCE * scale;
    check_interlacing(alpha, beta, tol)?;

    let (computed, u) = sym_eigen(a)?;
    let drift = computed
        .iter()
        .zip(alpha)
        .map(|(c, a)| (c - a).abs())
        .fold(0.0, f64::max);
    if drift > SPECTRUM_TOLERANCE * scale {
        return Err(Error::SpectrumMismatch(format!(
            "eigenvalues of A deviate from the prescribed tuple by {drift:e}"
        )));
    }

    // Cluster values are taken from the computed spectrum of A so that
    // rounding does not accumulate along a chain.
    let groups: Vec<(f64, usize)> = clusters(alpha, MERGE_TOLERANCE * scale)
        .into_iter()
        .map(|(start, k)| (mean(&computed[start..start + k]), k))
        .collect();

    // Remove k_i − 1 copies of every γ_i from β; the rest is δ.
    let mut delta: Vec<f64> = beta.to_vec();
    for &(gamma, k) in &groups {
        for _ in 1..k {
            let pos = delta
                .iter()
                .enumerate()
                .filter(|(_, d)| (**d - gamma).abs() <= tol)
                .min_by(|x, y| (x.1 - gamma).abs().total_cmp(&(y.1 - gamma).abs()))
                .map(|(p, _)| p)
                .ok_or_else(|| {
                    Error::NotInterlacing(format!(
                        "eigenvalue {gamma} has multiplicity {k} but β repeats it fewer than {} times",
                        k - 1
                    ))
                })?;
            delta.remove(pos);
        }
    }
    debug_assert_eq!(delta.len(), groups.len() + 1);

    let mut border = Vec::with_capacity(groups.len());
    for (i, &(gamma, k)) in groups.iter().enumerate() {
        let others: Vec<f64> = groups
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, &(g, _))| g - gamma)
            .collect();
        // Interleave factors so the running product stays in range.
        let mut ratio = -1.0;
        for (l, &d) in delta.iter().enumerate() {
            ratio *= d - gamma;
            if let Some(o) = others.get(l) {
                ratio /= o;
            }
        }
        let square = ratio / k as f64;
        let x = if square >= 0.0 {
            square.sqrt()
        } else if square >= -CLAMP_TOLERANCE * scale * scale {
            0.0
        } else {
            return Err(Error::NegativeSquare {
                cluster: i,
                value: square,
            });
        };
        border.extend(std::iter::repeat_n(x, k));
    }

    // w = U z, the border column in the original basis.
    let w: Vec<Complex64> = (0..n)
        .map(|r| (0..n).map(|c| u[(r, c)] * border[c]).sum())
        .collect();
    let corner = beta.iter().sum::<f64>() - (0..n).map(|i| a[(i, i)].re).sum::<f64>();

    let b = CMat::from_fn(n + 1, n + 1, |i, j| match (i < n, j < n) {
        (true, true) => a[(i, j)],
        (true, false) => w[i],
        (false, true) => w[j].conj(),
        (false, false) => Complex64::new(corner, 0.0),
    });

    let got = sym_eigenvalues(&b)?;
    let err = got
        .iter()
        .zip(beta)
        .map(|(g, b)| (g - b).abs())
        .fold(0.0, f64::max);
    if err > SPECTRUM_TOLERANCE * scale {
        return Err(Error::SpectrumMismatch(format!(
            "extended matrix misses the target spectrum by {err:e}"
        )));
    }
    Ok(b)
}

/// Ordered tuples `α^{(1)}, …, α^{(N)}`, each interlacing the next.
#[derive(Clone, Debug, PartialEq)]
pub struct InterlaceChain {
    tuples: Vec<Vec<f64>>,
    bound: f64,
}

impl InterlaceChain {
    /// Validates the chain: level `n` holds `n` sorted values bounded by
    /// `bound`, and consecutive levels interlace.
    pub fn new(tuples: Vec<Vec<f64>>, bound: f64) -> Result<Self> {
        let tol = CLUSTER_TOLERANCE * bound.max(1.0);
        for (idx, t) in tuples.iter().enumerate() {
            if t.len() != idx + 1 {
                return Err(Error::NotInterlacing(format!(
                    "level {} has {} entries",
                    idx + 1,
                    t.len()
                )));
            }
            if t.iter().any(|v| v.abs() > bound + tol) {
                return Err(Error::NotInterlacing(format!(
                    "level {} exceeds the bound {bound}",
                    idx + 1
                )));
            }
        }
        for (idx, pair) in tuples.windows(2).enumerate() {
            check_interlacing(&pair[0], &pair[1], tol).map_err(|e| Error::Interlace {
                level: idx + 2,
                source: Box::new(e),
            })?;
        }
        if let Some(first) = tuples.first() {
            if !is_sorted(first) {
                return Err(Error::NotInterlacing("level 1 is not sorted".into()));
            }
        }
        Ok(Self { tuples, bound })
    }

    /// A random chain of the given length with values in `[-bound, bound]`.
    pub fn random<R: Rng + ?Sized>(levels: usize, bound: f64, rng: &mut R) -> Self {
        let mut tuples: Vec<Vec<f64>> = Vec::with_capacity(levels);
        if levels > 0 {
            tuples.push(vec![rng.random_range(-bound..=bound)]);
        }
        while tuples.len() < levels {
            let prev = tuples.last().unwrap();
            let n = prev.len();
            let next: Vec<f64> = (0..=n)
                .map(|k| {
                    let lo = if k == 0 { -bound } else { prev[k - 1] };
                    let hi = if k == n { bound } else { prev[k] };
                    rng.random_range(lo..=hi)
                })
                .collect();
            tuples.push(next);
        }
        Self { tuples, bound }
    }

    pub fn tuples(&self) -> &[Vec<f64>] {
        &self.tuples
    }

    pub fn bound(&self) -> f64 {
        self.bound
    }

    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    /// `α^{(n)}` (1-based level).
    pub fn level(&self, n: usize) -> Option<&[f64]> {
        n.checked_sub(1).and_then(|i| self.tuples.get(i)).map(Vec::as_slice)
    }
}

/// The interlacing chain with spectra `{0, 1, 3}` at even sizes
/// and `{0, 2, 3}` at odd sizes (from size 4 on).
pub fn exf340_tuples(levels: usize) -> InterlaceChain {
    let tuples = (1..=levels)
        .map(|n| match n {
            1 => vec![1.0],
            2 => vec![0.0, 2.0],
            3 => vec![0.0, 1.0, 3.0],
            _ if n % 2 == 0 => {
                let k = n / 2;
                let mut t = vec![0.0; k];
                t.push(1.0);
                t.extend(std::iter::repeat_n(3.0, k - 1));
                t
            }
            _ => {
                let k = n / 2;
                let mut t = vec![0.0; k + 1];
                t.push(2.0);
                t.extend(std::iter::repeat_n(3.0, k - 1));
                t
            }
        })
        .collect();
    InterlaceChain {
        tuples,
        bound: 3.0,
    }
}

/// Builds nested matrices `A_1, …, A_N` with `eig(A_n) = α^{(n)}` and returns
/// them as a sequence bounded by `N`.
pub fn interlace_chain(chain: &InterlaceChain) -> Result<MatrixSequence> {
    let mut matrices: Vec<CMat> = Vec::with_capacity(chain.len());
    let mut current = CMat::zeros(0, 0);
    let mut prev: &[f64] = &[];
    for (idx, tuple) in chain.tuples().iter().enumerate() {
        current = interlace_extend(&current, prev, tuple).map_err(|e| Error::Interlace {
            level: idx + 1,
            source: Box::new(e),
        })?;
        matrices.push(current.clone());
        prev = tuple;
    }
    let matrices = Arc::new(matrices);
    let levels = matrices.len();
    Ok(MatrixSequence::new("interlace-chain", move |n| matrices[n - 1].clone()).bounded(levels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::max_abs;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn real(rows: &[&[f64]]) -> CMat {
        CMat::from_fn(rows.len(), rows.len(), |i, j| Complex64::new(rows[i][j], 0.0))
    }

    fn close(a: &CMat, b: &CMat, tol: f64) -> bool {
        max_abs(&(a - b)) <= tol
    }

    #[test]
    fn extend_scalar_to_flip() {
        let b = interlace_extend(&real(&[&[0.0]]), &[0.0], &[-1.0, 1.0]).unwrap();
        assert!(close(&b, &real(&[&[0.0, 1.0], &[1.0, 0.0]]), 1e-14));
    }

    #[test]
    fn extend_with_multiplicity() {
        let a = real(&[&[0.0, 0.0], &[0.0, 0.0]]);
        let b = interlace_extend(&a, &[0.0, 0.0], &[0.0, 0.0, 1.0]).unwrap();
        let expected = real(&[&[0.0, 0.0, 0.0], &[0.0, 0.0, 0.0], &[0.0, 0.0, 1.0]]);
        assert!(close(&b, &expected, 1e-14));
    }

    #[test]
    fn extend_degenerate() {
        let b = interlace_extend(&real(&[&[2.5]]), &[2.5], &[2.5, 2.5]).unwrap();
        assert!(close(&b, &real(&[&[2.5, 0.0], &[0.0, 2.5]]), 1e-14));
    }

    #[test]
    fn extend_from_empty() {
        let b = interlace_extend(&CMat::zeros(0, 0), &[], &[4.0]).unwrap();
        assert_eq!(b, real(&[&[4.0]]));
    }

    #[test]
    fn extend_complex_hermitian() {
        // [[1, i], [-i, 1]] has eigenvalues 0, 2.
        let a = CMat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => Complex64::new(0.0, 1.0),
            (1, 0) => Complex64::new(0.0, -1.0),
            _ => Complex64::new(1.0, 0.0),
        });
        let beta = [-0.5, 1.0, 2.5];
        let b = interlace_extend(&a, &[0.0, 2.0], &beta).unwrap();
        assert!(close(&b.submatrix(0, 0, 2, 2).to_owned(), &a, 0.0));
        let e = sym_eigenvalues(&b).unwrap();
        for (x, y) in e.iter().zip(beta) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn extend_rejects_bad_input() {
        let a = real(&[&[0.0]]);
        assert!(matches!(
            interlace_extend(&a, &[0.0], &[0.5, 1.0]),
            Err(Error::NotInterlacing(_))
        ));
        assert!(matches!(
            interlace_extend(&a, &[1.0], &[0.0, 2.0]),
            Err(Error::SpectrumMismatch(_))
        ));
        let m = real(&[&[0.0, 0.0], &[0.0, 0.0]]);
        // β must repeat the double eigenvalue at least once.
        assert!(interlace_extend(&m, &[0.0, 0.0], &[-1.0, 1e-3, 1.0]).is_err());
    }

    #[test]
    fn exf340_levels() {
        let chain = exf340_tuples(12);
        assert_eq!(chain.level(4).unwrap(), &[0.0, 0.0, 1.0, 3.0]);
        assert_eq!(chain.level(5).unwrap(), &[0.0, 0.0, 0.0, 2.0, 3.0]);
        assert!(InterlaceChain::new(chain.tuples().to_vec(), 3.0).is_ok());
    }

    #[test]
    fn constant_chain_gives_scalar_matrices() {
        let chain = InterlaceChain::new((1..=6).map(|n| vec![1.5; n]).collect(), 2.0).unwrap();
        let seq = interlace_chain(&chain).unwrap();
        for n in 1..=6 {
            let a = seq.generate(n).unwrap();
            let target = crate::matgen::diagonal(vec![1.5; n]);
            assert!(close(&a, &target, 1e-14));
        }
    }

    #[test]
    fn random_chain_is_reproduced_and_nested() {
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let chain = InterlaceChain::random(30, 10.0, &mut rng);
            assert!(InterlaceChain::new(chain.tuples().to_vec(), 10.0).is_ok());
            let seq = interlace_chain(&chain).unwrap();
            for n in 1..30 {
                let small = seq.generate(n).unwrap();
                let big = seq.generate(n + 1).unwrap();
                assert_eq!(big.submatrix(0, 0, n, n).to_owned(), small);
                let e = sym_eigenvalues(&big).unwrap();
                for (x, y) in e.iter().zip(chain.level(n + 1).unwrap()) {
                    assert!((x - y).abs() < 1e-9, "seed {seed}, n {}", n + 1);
                }
            }
        }
    }

    #[test]
    fn nearly_equal_values_stay_distinct() {
        let a = interlace_extend(&CMat::zeros(0, 0), &[], &[1.0]).unwrap();
        let b = interlace_extend(&a, &[1.0], &[1.0 - 3e-10, 1.0 + 2e-10]).unwrap();
        let c = interlace_extend(&b, &[1.0 - 3e-10, 1.0 + 2e-10], &[1.0 - 5e-10, 1.0, 1.0 + 4e-10])
            .unwrap();
        let e = sym_eigenvalues(&c).unwrap();
        for (x, y) in e.iter().zip([1.0 - 5e-10, 1.0, 1.0 + 4e-10]) {
            assert!((x - y).abs() < 1e-13);
        }
    }

    #[test]
    fn chain_validation_reports_level() {
        let bad = vec![vec![0.0], vec![1.0, 2.0]];
        assert!(matches!(
            InterlaceChain::new(bad, 3.0),
            Err(Error::Interlace { level: 2, .. })
        ));
    }
}
