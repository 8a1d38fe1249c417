//! Trigonometric polynomials on the unit circle.
//!
//! A [`FourierSymbol`] stores the finitely many nonzero Fourier coefficients
//! `a_k` of a generating function `a(e^{iθ}) = Σ_k a_k e^{ikθ}`. Toeplitz and
//! Hankel truncations in [`crate::matgen`] are built from these coefficients.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default number of equispaced samples on the circle.
pub const DEFAULT_SAMPLES: usize = 4096;

/// Moduli below this value count as a zero of the symbol.
pub const ZERO_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Debug, Default, PartialEq)]
pub struct FourierSymbol {
    coeffs: BTreeMap<i64, Complex64>,
}

impl FourierSymbol {
    /// Builds a symbol from `(frequency, coefficient)` pairs. Repeated
    /// frequencies are summed and exact zeros are dropped.
    pub fn new<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (i64, Complex64)>,
    {
        let mut coeffs = BTreeMap::new();
        for (k, c) in terms {
            *coeffs.entry(k).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        coeffs.retain(|_, c| *c != Complex64::new(0.0, 0.0));
        Self { coeffs }
    }

    /// Builds a symbol from real coefficients.
    pub fn real<I>(terms: I) -> Self
    where
        I: IntoIterator<Item = (i64, f64)>,
    {
        Self::new(terms.into_iter().map(|(k, re)| (k, Complex64::new(re, 0.0))))
    }

    /// Builds a symbol from `(k, re, im)` triples, the config literal format.
    pub fn from_triples(triples: &[(i64, f64, f64)]) -> Self {
        Self::new(triples.iter().map(|&(k, re, im)| (k, Complex64::new(re, im))))
    }

    pub fn monomial(k: i64) -> Self {
        Self::real([(k, 1.0)])
    }

    pub fn constant(c: Complex64) -> Self {
        Self::new([(0, c)])
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        self.coeffs.get(&k).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(&k, &c)| (k, c))
    }

    pub fn to_triples(&self) -> Vec<(i64, f64, f64)> {
        self.iter().map(|(k, c)| (k, c.re, c.im)).collect()
    }

    /// Largest positive frequency in the support, or 0.
    pub fn max_positive_freq(&self) -> usize {
        self.coeffs
            .keys()
            .next_back()
            .map_or(0, |&k| k.max(0) as usize)
    }

    /// Largest `|k|` in the support.
    pub fn degree(&self) -> usize {
        self.coeffs
            .keys()
            .map(|k| k.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn evaluate(&self, theta: f64) -> Complex64 {
        self.iter()
            .map(|(k, c)| c * Complex64::from_polar(1.0, k as f64 * theta))
            .sum()
    }

    /// The symbol `ã(t) = a(1/t)`: coefficient `k` moves to `-k`.
    pub fn flip(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(&k, &c)| (-k, c)).collect(),
        }
    }

    /// Symbol of the adjoint Toeplitz operator: coefficient `k` becomes
    /// `conj(a_{-k})`.
    pub fn adjoint(&self) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|(&k, &c)| (-k, c.conj())).collect(),
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self::new(self.iter().map(|(k, c)| (k, c * s)))
    }

    /// Convolution of the coefficient sequences.
    pub fn multiply(&self, other: &Self) -> Self {
        let mut terms = Vec::with_capacity(self.coeffs.len() * other.coeffs.len());
        for (j, a) in self.iter() {
            for (k, b) in other.iter() {
                terms.push((j + k, a * b));
            }
        }
        Self::new(terms)
    }

    fn grid(samples: usize) -> impl Iterator<Item = f64> {
        (0..samples).map(move |j| TAU * j as f64 / samples as f64)
    }

    /// Winding number about the origin by phase unwrapping on `samples`
    /// equispaced points.
    pub fn winding_number(&self, samples: usize) -> Result<i64> {
        let samples = samples.max(2 * self.degree() + 1).max(3);
        let values: Vec<(f64, Complex64)> = Self::grid(samples)
            .map(|theta| (theta, self.evaluate(theta)))
            .collect();
        if let Some(&(theta, v)) = values.iter().find(|(_, v)| v.norm() < ZERO_TOLERANCE) {
            return Err(Error::ZeroOnCircle {
                theta,
                modulus: v.norm(),
            });
        }
        let total: f64 = (0..samples)
            .map(|j| {
                let cur = values[j].1;
                let next = values[(j + 1) % samples].1;
                (next / cur).arg()
            })
            .sum();
        Ok((total / TAU).round() as i64)
    }

    /// Maximum of `|a|` over the sample grid. The grid is refined to at
    /// least `2·degree + 1` points.
    pub fn sup_norm(&self, samples: usize) -> f64 {
        let samples = samples.max(2 * self.degree() + 1);
        Self::grid(samples)
            .map(|theta| self.evaluate(theta).norm())
            .fold(0.0, f64::max)
    }
}

impl Mul for &FourierSymbol {
    type Output = FourierSymbol;

    fn mul(self, rhs: &FourierSymbol) -> FourierSymbol {
        self.multiply(rhs)
    }
}

impl fmt::Display for FourierSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .iter()
            .map(|(k, c)| format!("({k}, {}, {})", c.re, c.im))
            .collect();
        write!(f, "{}", parts.join(", "))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn evaluate_examples() {
        assert!((FourierSymbol::monomial(1).evaluate(0.0) - c(1.0)).norm() < 1e-15);
        let cos2 = FourierSymbol::real([(1, 1.0), (-1, 1.0)]);
        assert!((cos2.evaluate(PI / 3.0) - c(1.0)).norm() < 1e-15);
        let a = FourierSymbol::real([(0, 2.0), (1, 1.0)]);
        assert!((a.evaluate(PI) - c(1.0)).norm() < 1e-15);
    }

    #[test]
    fn zero_coefficients_are_dropped() {
        let a = FourierSymbol::real([(0, 1.0), (3, 0.0), (2, 1.0), (2, -1.0)]);
        assert_eq!(a, FourierSymbol::real([(0, 1.0)]));
        assert_eq!(a.iter().count(), 1);
    }

    #[test]
    fn flip_examples() {
        assert_eq!(FourierSymbol::monomial(1).flip(), FourierSymbol::monomial(-1));
        let a = FourierSymbol::real([(0, 2.0), (1, 1.0)]);
        assert_eq!(a.flip(), FourierSymbol::real([(0, 2.0), (-1, 1.0)]));
    }

    #[test]
    fn multiply_examples() {
        let p = FourierSymbol::monomial(1).multiply(&FourierSymbol::monomial(-1));
        assert_eq!(p, FourierSymbol::real([(0, 1.0)]));
        let a = FourierSymbol::real([(0, 2.0), (1, 1.0)]);
        let prod = &a * &a.flip();
        assert_eq!(prod, FourierSymbol::real([(0, 5.0), (1, 2.0), (-1, 2.0)]));
        assert_eq!(a.multiply(&FourierSymbol::real([(0, 1.0)])), a);
    }

    #[test]
    fn winding_examples() {
        assert_eq!(FourierSymbol::monomial(1).winding_number(DEFAULT_SAMPLES), Ok(1));
        let a = FourierSymbol::real([(0, 2.0), (1, 1.0)]);
        assert_eq!(a.winding_number(DEFAULT_SAMPLES), Ok(0));
        assert_eq!(FourierSymbol::monomial(-2).winding_number(DEFAULT_SAMPLES), Ok(-2));
    }

    #[test]
    fn winding_rejects_zero_on_circle() {
        // 2cos θ vanishes at θ = π/2, which lies on the 4096-point grid.
        let a = FourierSymbol::real([(1, 1.0), (-1, 1.0)]);
        assert!(matches!(
            a.winding_number(DEFAULT_SAMPLES),
            Err(Error::ZeroOnCircle { .. })
        ));
        assert!(FourierSymbol::zero().winding_number(16).is_err());
    }

    #[test]
    fn sup_norm_examples() {
        let a = FourierSymbol::real([(0, 2.0), (1, 1.0)]);
        assert!((a.sup_norm(DEFAULT_SAMPLES) - 3.0).abs() < 1e-6);
        let cos2 = FourierSymbol::real([(1, 1.0), (-1, 1.0)]);
        assert!((cos2.sup_norm(DEFAULT_SAMPLES) - 2.0).abs() < 1e-12);
        let k = FourierSymbol::constant(Complex64::new(3.0, -4.0));
        assert!((k.sup_norm(8) - 5.0).abs() < 1e-14);
    }

    fn arb_symbol() -> impl Strategy<Value = FourierSymbol> {
        prop::collection::vec((-6i64..=6, -2.0f64..2.0, -2.0f64..2.0), 0..8).prop_map(|t| {
            FourierSymbol::new(t.into_iter().map(|(k, re, im)| (k, Complex64::new(re, im))))
        })
    }

    proptest! {
        #[test]
        fn flip_is_involution(a in arb_symbol()) {
            prop_assert_eq!(a.flip().flip(), a);
        }

        #[test]
        fn flip_reverses_argument(a in arb_symbol(), theta in -4.0f64..4.0) {
            let d = a.flip().evaluate(theta) - a.evaluate(-theta);
            prop_assert!(d.norm() < 1e-12);
        }

        #[test]
        fn flip_preserves_sup_norm(a in arb_symbol()) {
            let (f, g) = (a.flip().sup_norm(512), a.sup_norm(512));
            prop_assert!((f - g).abs() <= 1e-12 * (1.0 + g));
        }

        #[test]
        fn winding_is_additive(a in arb_symbol(), b in arb_symbol()) {
            let (wa, wb, wab) = (
                a.winding_number(4096),
                b.winding_number(4096),
                a.multiply(&b).winding_number(4096),
            );
            if let (Ok(wa), Ok(wb), Ok(wab)) = (wa, wb, wab) {
                // Near-zero symbols can alias on a finite grid; only assert
                // when both factors stay well away from the origin.
                let m = |s: &FourierSymbol| (0..4096)
                    .map(|j| s.evaluate(TAU * j as f64 / 4096.0).norm())
                    .fold(f64::INFINITY, f64::min);
                if m(&a) > 0.5 && m(&b) > 0.5 {
                    prop_assert_eq!(wab, wa + wb);
                }
            }
        }
    }
}
