//! Arveson's involutive permutation of the positive integers.
//!
//! With `E_1 = 4ℕ`, `f(k) = k² + 1` on `E_1`, `O_1 = f(E_1)`,
//! `E_2 = 2ℕ \ 4ℕ` and `O_2 = (2ℕ - 1) \ O_1`, the map `f` is extended to
//! `E_2` by the order-preserving bijection onto `O_2`. Then `π(k) = f(k)`
//! for even `k` and `π(k) = f⁻¹(k)` for odd `k`.

use num_complex::Complex64;

use crate::CMat;

#[derive(Clone, Copy, Debug, Default)]
pub struct ArvesonPermutation;

fn isqrt(x: u64) -> u64 {
    let mut r = (x as f64).sqrt() as u64;
    while r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    r
}

impl ArvesonPermutation {
    /// `#{t ≥ 1 : 16t² + 1 ≤ x}`, the number of elements of `O_1` up to `x`.
    fn count_o1(x: u64) -> u64 {
        if x < 17 {
            0
        } else {
            isqrt((x - 1) / 16)
        }
    }

    fn in_o1(x: u64) -> bool {
        x >= 17 && (x - 1) % 16 == 0 && {
            let t = isqrt((x - 1) / 16);
            16 * t * t + 1 == x
        }
    }

    /// The `j`-th element (1-based) of `O_2` in increasing order.
    fn nth_o2(j: u64) -> u64 {
        let mut m = j;
        loop {
            let x = 2 * m - 1;
            if !Self::in_o1(x) && m - Self::count_o1(x) == j {
                return x;
            }
            m += 1;
        }
    }

    /// `π(k)` for `k ≥ 1`.
    pub fn image(k: u64) -> u64 {
        assert!(k >= 1, "the permutation acts on positive integers");
        if k % 4 == 0 {
            k * k + 1
        } else if k % 2 == 0 {
            Self::nth_o2((k + 2) / 4)
        } else if Self::in_o1(k) {
            4 * isqrt((k - 1) / 16)
        } else {
            let j = (k + 1) / 2 - Self::count_o1(k);
            4 * j - 2
        }
    }
}

/// `P_n A P_n` where `A e_k = e_{π(k)}` (1-based basis).
pub fn arveson_permutation(n: usize) -> CMat {
    let mut m = CMat::zeros(n, n);
    for k in 1..=n as u64 {
        let p = ArvesonPermutation::image(k);
        if p <= n as u64 {
            m[(p as usize - 1, k as usize - 1)] = Complex64::new(1.0, 0.0);
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::is_self_adjoint;
    use std::collections::BTreeSet;

    /// Direct construction from the set definitions, for cross-checking.
    fn brute_force(limit: u64) -> Vec<u64> {
        let o1: BTreeSet<u64> = (1..).map(|t| 16 * t * t + 1).take_while(|&x| x <= 64 * limit * limit).collect();
        let e2: Vec<u64> = (1..).map(|j| 4 * j - 2).take_while(|&x| x <= 8 * limit).collect();
        let o2: Vec<u64> = (1..)
            .map(|m| 2 * m - 1)
            .filter(|x| !o1.contains(x))
            .take(e2.len())
            .collect();
        let mut pi = vec![0; limit as usize + 1];
        for k in 1..=limit {
            pi[k as usize] = if k % 4 == 0 {
                k * k + 1
            } else if k % 2 == 0 {
                o2[e2.iter().position(|&e| e == k).unwrap()]
            } else if o1.contains(&k) {
                *((1..).map(|t| 4 * t).find(|&e| e * e + 1 == k).as_ref().unwrap())
            } else {
                e2[o2.iter().position(|&o| o == k).unwrap()]
            };
        }
        pi
    }

    #[test]
    fn documented_values() {
        assert_eq!(ArvesonPermutation::image(4), 17);
        assert_eq!(ArvesonPermutation::image(17), 4);
        assert_eq!(ArvesonPermutation::image(2), 1);
        assert_eq!(ArvesonPermutation::image(1), 2);
        // O_2 skips 17, so the ninth element of E_2 (k = 34) maps to 19.
        assert_eq!(ArvesonPermutation::image(6), 3);
        assert_eq!(ArvesonPermutation::image(34), 19);
    }

    #[test]
    fn matches_set_construction() {
        let pi = brute_force(600);
        for k in 1..=600u64 {
            assert_eq!(ArvesonPermutation::image(k), pi[k as usize], "k = {k}");
        }
    }

    #[test]
    fn involution_without_fixed_points() {
        for k in 1..=10_000u64 {
            let p = ArvesonPermutation::image(k);
            assert_ne!(p, k);
            assert_eq!(ArvesonPermutation::image(p), k, "k = {k}");
        }
    }

    #[test]
    fn truncation_is_symmetric_partial_permutation() {
        for n in [1, 2, 5, 17, 40, 101] {
            let m = arveson_permutation(n);
            assert!(is_self_adjoint(&m));
            for i in 0..n {
                let row: f64 = (0..n).map(|j| m[(i, j)].re).sum();
                let col: f64 = (0..n).map(|j| m[(j, i)].re).sum();
                assert!(row <= 1.0 && col <= 1.0);
            }
        }
    }
}
