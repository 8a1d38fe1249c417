//! Finite sections of the structured operators under study.
//!
//! Every generator is closed-form per entry, so a [`MatrixSequence`] can be
//! sampled at any index in any order and always yields the same matrix.

mod arveson;
mod interlace;

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::symbols::FourierSymbol;
use crate::CMat;

pub use arveson::{arveson_permutation, ArvesonPermutation};
pub use interlace::{exf340_tuples, interlace_chain, interlace_extend, InterlaceChain};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

type DimFn = Arc<dyn Fn(usize) -> usize + Send + Sync>;
type GenFn = Arc<dyn Fn(usize) -> Result<CMat> + Send + Sync>;

/// A bounded sequence `(A_n)` of `δ(n) × δ(n)` matrices.
#[derive(Clone)]
pub struct MatrixSequence {
    label: String,
    dimension: DimFn,
    generate: GenFn,
    max_index: Option<usize>,
}

impl fmt::Debug for MatrixSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MatrixSequence")
            .field("label", &self.label)
            .field("max_index", &self.max_index)
            .finish()
    }
}

impl MatrixSequence {
    /// Sequence with `δ(n) = n`.
    pub fn new<F>(label: impl Into<String>, generate: F) -> Self
    where
        F: Fn(usize) -> CMat + Send + Sync + 'static,
    {
        Self::with_dimension(label, |n| n, generate)
    }

    pub fn with_dimension<D, F>(label: impl Into<String>, dimension: D, generate: F) -> Self
    where
        D: Fn(usize) -> usize + Send + Sync + 'static,
        F: Fn(usize) -> CMat + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            dimension: Arc::new(dimension),
            generate: Arc::new(move |n| Ok(generate(n))),
            max_index: None,
        }
    }

    /// Sequence with `δ(n) = n` whose generator may fail.
    pub fn try_new<F>(label: impl Into<String>, generate: F) -> Self
    where
        F: Fn(usize) -> Result<CMat> + Send + Sync + 'static,
    {
        Self {
            label: label.into(),
            dimension: Arc::new(|n| n),
            generate: Arc::new(generate),
            max_index: None,
        }
    }

    /// Limits the sequence to indices `1..=max`.
    pub fn bounded(mut self, max: usize) -> Self {
        self.max_index = Some(max);
        self
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn max_index(&self) -> Option<usize> {
        self.max_index
    }

    pub fn dimension(&self, n: usize) -> usize {
        (self.dimension)(n)
    }

    pub fn generate(&self, n: usize) -> Result<CMat> {
        if n == 0 || self.max_index.is_some_and(|m| n > m) {
            return Err(Error::OutOfRange {
                label: self.label.clone(),
                n,
            });
        }
        (self.generate)(n)
    }

    /// The restricted sequence `(A_{η(n)})`. `eta` must be strictly increasing.
    pub fn restrict<E>(&self, label: impl Into<String>, eta: E) -> Self
    where
        E: Fn(usize) -> usize + Send + Sync + 'static,
    {
        let eta = Arc::new(eta);
        let (dim, gen) = (self.dimension.clone(), self.generate.clone());
        let e1 = eta.clone();
        let max_index = self
            .max_index
            .map(|m| (1..=m).take_while(|&n| eta(n) <= m).count());
        Self {
            label: label.into(),
            dimension: Arc::new(move |n| dim(e1(n))),
            generate: Arc::new(move |n| gen(eta(n))),
            max_index,
        }
    }

    /// Applies `f` to every matrix of the sequence.
    pub fn try_map<F>(&self, label: impl Into<String>, f: F) -> Self
    where
        F: Fn(usize, CMat) -> Result<CMat> + Send + Sync + 'static,
    {
        let gen = self.generate.clone();
        Self {
            label: label.into(),
            dimension: self.dimension.clone(),
            generate: Arc::new(move |n| f(n, gen(n)?)),
            max_index: self.max_index,
        }
    }
}

/// `P_n T(a) P_n`: entry `(i, j)` is `a_{i-j}`.
pub fn toeplitz(a: &FourierSymbol, n: usize) -> CMat {
    CMat::from_fn(n, n, |i, j| a.coeff(i as i64 - j as i64))
}

/// `P_n H(a) P_n`: entry `(i, j)` is `a_{i+j+1}`.
pub fn hankel(a: &FourierSymbol, n: usize) -> CMat {
    CMat::from_fn(n, n, |i, j| a.coeff((i + j + 1) as i64))
}

/// `R_n M R_n`: entry `(i, j)` is `M(n-1-i, n-1-j)`.
pub fn reflect_conjugate(m: &CMat) -> CMat {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "reflect_conjugate needs a square matrix");
    CMat::from_fn(n, n, |i, j| m[(n - 1 - i, n - 1 - j)])
}

/// One term `left · right*` of a finite-rank operator.
#[derive(Clone, Debug, PartialEq)]
pub struct RankOne {
    pub left: Vec<Complex64>,
    pub right: Vec<Complex64>,
}

impl RankOne {
    pub fn new(left: Vec<Complex64>, right: Vec<Complex64>) -> Self {
        Self { left, right }
    }

    /// `s · e_i e_j*`.
    pub fn unit(i: usize, j: usize, s: f64) -> Self {
        let mut left = vec![Complex64::new(0.0, 0.0); i + 1];
        let mut right = vec![Complex64::new(0.0, 0.0); j + 1];
        left[i] = Complex64::new(s, 0.0);
        right[j] = ONE;
        Self { left, right }
    }
}

/// Leading `n × n` block of `Σ left · right*`; vectors are zero-padded.
pub fn finite_rank(terms: &[RankOne], n: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    for t in terms {
        for (i, &l) in t.left.iter().enumerate().take(n) {
            if l == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (j, &r) in t.right.iter().enumerate().take(n) {
                m[(i, j)] += l * r.conj();
            }
        }
    }
    m
}

/// `P_n S_i P_n` for the Cuntz isometry `S_i e_r = e_{rN+i}`.
pub fn cuntz_isometry(big_n: usize, i: usize, n: usize) -> CMat {
    assert!(big_n >= 2 && i < big_n, "need N >= 2 and 0 <= i < N");
    let mut m = CMat::zeros(n, n);
    for r in 0..n {
        let k = r * big_n + i;
        if k >= n {
            break;
        }
        m[(k, r)] = ONE;
    }
    m
}

/// `P_n S_0^* P_n S_0 P_n - P_n S_1^* P_n S_1 P_n`.
pub fn cuntz_difference(big_n: usize, n: usize) -> CMat {
    let s0 = cuntz_isometry(big_n, 0, n);
    let s1 = cuntz_isometry(big_n, 1, n);
    &(s0.adjoint() * &s0) - &(s1.adjoint() * &s1)
}

/// Leading `n × n` block of `diag([[0,1],[1,0]], [[0,1],[1,0]], …)`.
pub fn block_flip(n: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    for p in (0..n.saturating_sub(1)).step_by(2) {
        m[(p, p + 1)] = ONE;
        m[(p + 1, p)] = ONE;
    }
    m
}

pub fn diagonal(values: impl IntoIterator<Item = f64>) -> CMat {
    let values: Vec<f64> = values.into_iter().collect();
    let n = values.len();
    CMat::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(values[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    })
}

/// `diag(0, …, 0, 1)` for even `n` and `diag(0, 1, …, 1)` for odd `n`.
pub fn alternating_diagonal(n: usize) -> CMat {
    if n % 2 == 0 {
        diagonal((0..n).map(|j| if j + 1 == n { 1.0 } else { 0.0 }))
    } else {
        diagonal((0..n).map(|j| if j == 0 { 0.0 } else { 1.0 }))
    }
}

/// `diag(1, 1/2, 1/4, …)` truncated to size `n`.
pub fn geometric_diagonal(n: usize) -> CMat {
    diagonal((0..n).map(|j| 0.5f64.powi(j as i32)))
}

/// Sequences of the finite sections method for the generators above.
pub mod sequences {
    use super::*;

    pub fn toeplitz(a: FourierSymbol) -> MatrixSequence {
        MatrixSequence::new(format!("toeplitz[{a}]"), move |n| super::toeplitz(&a, n))
    }

    /// `P_n T(a) P_n + P_n K P_n + R_n L R_n`.
    pub fn toeplitz_plus_compact(a: FourierSymbol, k: Vec<RankOne>, l: Vec<RankOne>) -> MatrixSequence {
        MatrixSequence::new(format!("toeplitz+compact[{a}]"), move |n| {
            let t = super::toeplitz(&a, n);
            let pk = super::finite_rank(&k, n);
            let rl = reflect_conjugate(&super::finite_rank(&l, n));
            &(&t + &pk) + &rl
        })
    }

    pub fn hankel(a: FourierSymbol) -> MatrixSequence {
        MatrixSequence::new(format!("hankel[{a}]"), move |n| super::hankel(&a, n))
    }

    pub fn finite_rank(terms: Vec<RankOne>) -> MatrixSequence {
        MatrixSequence::new("finite-rank", move |n| super::finite_rank(&terms, n))
    }

    /// `P_n K P_n` with `K = diag(values)`.
    pub fn diagonal_compact(values: Vec<f64>) -> MatrixSequence {
        MatrixSequence::new("diagonal-compact", move |n| {
            diagonal((0..n).map(|j| values.get(j).copied().unwrap_or(0.0)))
        })
    }

    pub fn identity() -> MatrixSequence {
        MatrixSequence::new("identity", |n| CMat::identity(n, n))
    }

    pub fn zero() -> MatrixSequence {
        MatrixSequence::new("zero", |n| CMat::zeros(n, n))
    }

    pub fn block_flip() -> MatrixSequence {
        MatrixSequence::new("block-flip", super::block_flip)
    }

    pub fn arveson() -> MatrixSequence {
        MatrixSequence::new("arveson", super::arveson_permutation)
    }

    pub fn alternating_diagonal() -> MatrixSequence {
        MatrixSequence::new("alternating-diagonal", super::alternating_diagonal)
    }

    pub fn geometric_diagonal() -> MatrixSequence {
        MatrixSequence::new("geometric-diagonal", super::geometric_diagonal)
    }

    pub fn cuntz_difference(big_n: usize) -> MatrixSequence {
        MatrixSequence::new(format!("cuntz-difference[N={big_n}]"), move |n| {
            super::cuntz_difference(big_n, n)
        })
    }

    /// `I_n + P_n K P_n` for odd `n`, `I_n + P_n K P_n + R_n K R_n` for even `n`.
    pub fn alternating_weight(k: Vec<RankOne>) -> MatrixSequence {
        MatrixSequence::new("alternating-weight", move |n| {
            let pk = super::finite_rank(&k, n);
            let mut m = &CMat::identity(n, n) + &pk;
            if n % 2 == 0 {
                m = &m + &reflect_conjugate(&pk);
            }
            m
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{max_abs, singular_values};
    use proptest::prelude::*;

    fn zeros_except(n: usize, ones: &[(usize, usize)]) -> CMat {
        let mut m = CMat::zeros(n, n);
        for &(i, j) in ones {
            m[(i, j)] = ONE;
        }
        m
    }

    fn diff(a: &CMat, b: &CMat) -> f64 {
        max_abs(&(a - b))
    }

    #[test]
    fn toeplitz_examples() {
        let v = toeplitz(&FourierSymbol::monomial(1), 3);
        assert_eq!(v, zeros_except(3, &[(1, 0), (2, 1)]));
        assert_eq!(toeplitz(&FourierSymbol::real([(0, 1.0)]), 5), CMat::identity(5, 5));
        let c = toeplitz(&FourierSymbol::real([(1, 1.0), (-1, 1.0)]), 2);
        assert_eq!(c, zeros_except(2, &[(0, 1), (1, 0)]));
    }

    #[test]
    fn hankel_examples() {
        assert_eq!(hankel(&FourierSymbol::monomial(1), 2), zeros_except(2, &[(0, 0)]));
        assert_eq!(hankel(&FourierSymbol::real([(0, 5.0)]), 4), CMat::zeros(4, 4));
        assert_eq!(
            hankel(&FourierSymbol::monomial(3), 3),
            zeros_except(3, &[(0, 2), (1, 1), (2, 0)])
        );
    }

    #[test]
    fn reflect_examples() {
        assert_eq!(reflect_conjugate(&CMat::identity(4, 4)), CMat::identity(4, 4));
        let m = CMat::from_fn(2, 2, |i, j| Complex64::new((2 * i + j) as f64, 0.0));
        let r = reflect_conjugate(&m);
        assert_eq!(r[(0, 0)], m[(1, 1)]);
        assert_eq!(r[(0, 1)], m[(1, 0)]);
        assert_eq!(r[(1, 0)], m[(0, 1)]);
        assert_eq!(r[(1, 1)], m[(0, 0)]);
    }

    #[test]
    fn finite_rank_examples() {
        assert_eq!(finite_rank(&[RankOne::unit(0, 0, 1.0)], 3), zeros_except(3, &[(0, 0)]));
        assert_eq!(finite_rank(&[], 3), CMat::zeros(3, 3));
        // Three orthonormal pairs spread over a 6-dimensional block.
        let s = 0.5f64.sqrt();
        let v = |entries: &[(usize, f64)]| {
            let mut out = vec![Complex64::new(0.0, 0.0); 6];
            for &(i, x) in entries {
                out[i] = Complex64::new(x, 0.0);
            }
            out
        };
        let terms = vec![
            RankOne::new(v(&[(0, s), (1, s)]), v(&[(2, 1.0)])),
            RankOne::new(v(&[(0, s), (1, -s)]), v(&[(3, s), (4, s)])),
            RankOne::new(v(&[(5, 1.0)]), v(&[(3, s), (4, -s)])),
        ];
        let sv = singular_values(&finite_rank(&terms, 8)).unwrap();
        let rank = sv.iter().filter(|&&x| x > 1e-12).count();
        assert_eq!(rank, 3);
    }

    #[test]
    fn cuntz_examples() {
        assert_eq!(cuntz_isometry(2, 0, 4), zeros_except(4, &[(0, 0), (2, 1)]));
        assert_eq!(cuntz_isometry(2, 1, 4), zeros_except(4, &[(1, 0), (3, 1)]));
        for n in 1..20 {
            let s0 = cuntz_isometry(3, 0, n);
            let s2 = cuntz_isometry(3, 2, n);
            assert_eq!(s0.adjoint() * &s2, CMat::zeros(n, n));
        }
    }

    #[test]
    fn cuntz_truncations_are_partial_isometries() {
        for big_n in 2..5 {
            for i in 0..big_n {
                for n in 1..40 {
                    let s = cuntz_isometry(big_n, i, n);
                    assert_eq!(&(&s * s.adjoint()) * &s, s);
                }
            }
        }
    }

    #[test]
    fn block_flip_examples() {
        assert_eq!(block_flip(2), zeros_except(2, &[(0, 1), (1, 0)]));
        assert_eq!(block_flip(3), zeros_except(3, &[(0, 1), (1, 0)]));
        for n in 1..=12 {
            let sv = singular_values(&block_flip(n)).unwrap();
            let zeros = sv.iter().filter(|&&x| x < 1e-12).count();
            assert_eq!(zeros, n % 2);
            assert!(sv[n % 2..].iter().all(|x| (x - 1.0).abs() < 1e-12));
        }
    }

    #[test]
    fn restriction_composes_index_map() {
        let seq = sequences::block_flip().restrict("even", |n| 2 * n);
        assert_eq!(seq.dimension(3), 6);
        assert_eq!(seq.generate(3).unwrap(), block_flip(6));
        let bounded = sequences::identity().bounded(10).restrict("odd", |n| 2 * n - 1);
        assert_eq!(bounded.max_index(), Some(5));
        assert!(bounded.generate(6).is_err());
    }

    #[test]
    fn generators_are_reproducible() {
        let seq = sequences::toeplitz(FourierSymbol::real([(0, 2.0), (1, -1.0), (-3, 0.5)]));
        assert_eq!(seq.generate(17).unwrap(), seq.generate(17).unwrap());
        assert_eq!(seq.generate(17).unwrap().nrows(), 17);
    }

    fn arb_symbol() -> impl Strategy<Value = FourierSymbol> {
        prop::collection::vec((-5i64..=5, -2.0f64..2.0, -2.0f64..2.0), 0..7).prop_map(|t| {
            FourierSymbol::new(t.into_iter().map(|(k, re, im)| (k, Complex64::new(re, im))))
        })
    }

    proptest! {
        #[test]
        fn toeplitz_adjoint_matches_adjoint_symbol(a in arb_symbol(), n in 1usize..12) {
            let t = toeplitz(&a, n);
            prop_assert_eq!(t.adjoint().to_owned(), toeplitz(&a.adjoint(), n));
        }

        #[test]
        fn reflection_flips_symbol(a in arb_symbol(), n in 1usize..12) {
            prop_assert_eq!(reflect_conjugate(&toeplitz(&a, n)), toeplitz(&a.flip(), n));
        }

        #[test]
        fn reflection_is_involution(a in arb_symbol(), n in 1usize..10) {
            let h = hankel(&a, n);
            prop_assert!(diff(&reflect_conjugate(&reflect_conjugate(&h)), &h) == 0.0);
        }
    }
}
