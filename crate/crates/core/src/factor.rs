//! Integer factorization for group orders `2^n - 1` with `n <= 63`.
//!
//! Trial division removes every prime below 10^6, then Brent's variant of
//! Pollard rho splits what is left. Every reported prime passes a Miller-Rabin
//! test with a base set that is deterministic for 64-bit inputs.

use serde::{Deserialize, Serialize};

const TRIAL_BOUND: u64 = 1_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Factorization {
    factors: Vec<(u64, u32)>,
}

impl Factorization {
    /// `(prime, exponent)` pairs with strictly increasing primes.
    pub fn factors(&self) -> &[(u64, u32)] {
        &self.factors
    }

    pub fn primes(&self) -> impl Iterator<Item = u64> + '_ {
        self.factors.iter().map(|&(p, _)| p)
    }

    /// Product of the prime powers.
    pub fn value(&self) -> u128 {
        self.factors
            .iter()
            .map(|&(p, e)| (p as u128).pow(e))
            .product()
    }

    pub fn is_squarefree(&self) -> bool {
        self.factors.iter().all(|&(_, e)| e == 1)
    }
}

#[inline]
pub(crate) fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for p in SMALL {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

// Brent's cycle detection with batched gcds. Returns a nontrivial divisor of
// the odd composite n, trying successive polynomial constants.
fn pollard_brent(n: u64) -> u64 {
    for c in 1u64.. {
        let f = |x: u64| (mul_mod(x, x, n) + c) % n;
        let (mut y, mut r, mut q) = (2u64, 1u64, 1u64);
        let mut x = y;
        let mut g = 1;
        let mut ys = y;
        const BATCH: u64 = 128;
        while g == 1 {
            x = y;
            for _ in 0..r {
                y = f(y);
            }
            let mut k = 0;
            while k < r && g == 1 {
                ys = y;
                for _ in 0..BATCH.min(r - k) {
                    y = f(y);
                    q = mul_mod(q, x.abs_diff(y), n);
                }
                g = gcd(q, n);
                k += BATCH;
            }
            r *= 2;
        }
        if g == n {
            // Batch overshot; replay one step at a time.
            loop {
                ys = f(ys);
                g = gcd(x.abs_diff(ys), n);
                if g > 1 {
                    break;
                }
            }
        }
        if g != n {
            return g;
        }
    }
    unreachable!()
}

fn split_into(n: u64, out: &mut Vec<u64>) {
    if n == 1 {
        return;
    }
    if is_prime(n) {
        out.push(n);
        return;
    }
    let d = pollard_brent(n);
    split_into(d, out);
    split_into(n / d, out);
}

/// Complete factorization of `m`, for `2 <= m <= 2^63 - 1`.
pub fn factorize(m: u64) -> Factorization {
    assert!(m >= 2, "factorize needs m >= 2");
    let mut primes = Vec::new();
    let mut rest = m;
    let mut p = 2u64;
    while p < TRIAL_BOUND && p * p <= rest {
        while rest.is_multiple_of(p) {
            primes.push(p);
            rest /= p;
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if rest > 1 {
        split_into(rest, &mut primes);
    }
    primes.sort_unstable();
    let mut factors: Vec<(u64, u32)> = Vec::new();
    for q in primes {
        match factors.last_mut() {
            Some((last, e)) if *last == q => *e += 1,
            _ => factors.push((q, 1)),
        }
    }
    Factorization { factors }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_values() {
        assert_eq!(factorize(7).factors(), &[(7, 1)]);
        assert_eq!(factorize(15).factors(), &[(3, 1), (5, 1)]);
        assert_eq!(factorize(2).factors(), &[(2, 1)]);
        assert_eq!(factorize(1 << 20).factors(), &[(2, 20)]);
    }

    #[test]
    fn mersenne_53() {
        let f = factorize((1 << 53) - 1);
        assert_eq!(f.factors(), &[(6361, 1), (69431, 1), (20394401, 1)]);
        assert_eq!(f.value(), (1u128 << 53) - 1);
    }

    #[test]
    fn square_factors_are_kept() {
        // 2^6 - 1 = 3^2 * 7, 2^42 - 1 = 3^2 * 7^2 * 43 * 127 * 337 * 5419
        assert_eq!(factorize(63).factors(), &[(3, 2), (7, 1)]);
        let f = factorize((1 << 42) - 1);
        assert_eq!(
            f.factors(),
            &[(3, 2), (7, 2), (43, 1), (127, 1), (337, 1), (5419, 1)]
        );
        assert!(!f.is_squarefree());
    }

    #[test]
    fn all_mersenne_numbers_multiply_back() {
        for n in 2..=63u32 {
            let m = (1u64 << n) - 1;
            let f = factorize(m);
            assert_eq!(f.value(), m as u128, "n = {n}");
            assert!(f.primes().all(is_prime), "n = {n}");
            assert!(f.factors().windows(2).all(|w| w[0].0 < w[1].0));
        }
    }

    #[test]
    fn large_semiprime_needs_rho() {
        // Both factors exceed the trial division bound.
        let (a, b) = (1_000_003u64, 2_147_483_647u64);
        assert_eq!(factorize(a * b).factors(), &[(a, 1), (b, 1)]);
    }

    #[test]
    fn primality_edges() {
        assert!(!is_prime(0));
        assert!(!is_prime(1));
        assert!(is_prime(2));
        assert!(is_prime((1 << 61) - 1));
        assert!(!is_prime(3215031751)); // strong pseudoprime to bases 2,3,5,7
    }
}
