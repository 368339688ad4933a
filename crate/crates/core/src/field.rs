//! Arithmetic in `GF(2)[x] / <P>` for a primitive `P` of degree `n <= 63`.

use std::fmt;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::{factorize, Factorization};
use crate::poly::SparsePoly;

pub const MIN_DEGREE: u32 = 2;
pub const MAX_DEGREE: u32 = 63;

/// A residue of degree below `n`, bit i holding the coefficient of x^i.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct FieldElement(u64);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl std::ops::BitXor for FieldElement {
    type Output = FieldElement;

    fn bitxor(self, rhs: FieldElement) -> FieldElement {
        FieldElement(self.0 ^ rhs.0)
    }
}

impl std::ops::BitXorAssign for FieldElement {
    fn bitxor_assign(&mut self, rhs: FieldElement) {
        self.0 ^= rhs.0;
    }
}

impl fmt::Display for FieldElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}", self.0)
    }
}

/// Field `F_{2^n}` defined by a primitive polynomial, with the factored group
/// order `M = 2^n - 1` attached. Immutable once built.
#[derive(Clone)]
pub struct FieldContext {
    poly: SparsePoly,
    n: u32,
    mask: u64,
    /// P without its leading term, i.e. x^n mod P.
    tail: u64,
    order: u64,
    factorization: Factorization,
    /// P with its leading term.
    bits: u64,
    /// `floor(x^(2n) / P)`, the Barrett constant.
    mu: u64,
    hw_clmul: bool,
}

impl fmt::Debug for FieldContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldContext")
            .field("poly", &self.poly)
            .field("n", &self.n)
            .field("order", &self.order)
            .field("factorization", &self.factorization)
            .finish()
    }
}

impl FieldContext {
    /// Validates that `poly` is primitive and attaches the factorization of
    /// `2^n - 1`.
    pub fn new(poly: SparsePoly) -> Result<Self> {
        let n = match poly.degree() {
            Some(d) if (MIN_DEGREE as u64..=MAX_DEGREE as u64).contains(&d) => d as u32,
            Some(d) => return Err(Error::DegreeOutOfRange(d)),
            None => return Err(Error::DegreeOutOfRange(0)),
        };
        let order = (1u64 << n) - 1;
        let ctx = Self::unchecked(poly, n, factorize(order));
        ctx.check_primitive()?;
        Ok(ctx)
    }

    fn unchecked(poly: SparsePoly, n: u32, factorization: Factorization) -> Self {
        let mask = (1u64 << n) - 1;
        let bits = poly.to_bits().expect("degree checked");
        let tail = bits & mask;
        let mu = barrett_constant(bits, n);
        FieldContext {
            poly,
            n,
            mask,
            tail,
            order: (1u64 << n) - 1,
            factorization,
            bits,
            mu,
            hw_clmul: hw_clmul_available(),
        }
    }

    fn check_primitive(&self) -> Result<()> {
        let n = self.n;
        let p_bits = self.poly.to_bits().expect("degree checked");
        if p_bits & 1 == 0 {
            return Err(Error::NotPrimitive("reducible (divisible by x)"));
        }
        // Rabin's irreducibility test.
        let x = self.x();
        let frob = |k: u32| {
            let mut a = x;
            for _ in 0..k {
                a = self.square(a);
            }
            a
        };
        if frob(n) != x {
            return Err(Error::NotPrimitive("reducible"));
        }
        for (r, _) in factorize_small(n) {
            let h = frob(n / r) ^ x;
            if poly_gcd(h.0, p_bits) != 1 {
                return Err(Error::NotPrimitive("reducible"));
            }
        }
        for p in self.factorization.primes() {
            if self.pow(x, self.order / p) == FieldElement::ONE {
                return Err(Error::NotPrimitive(
                    "x does not generate the multiplicative group",
                ));
            }
        }
        Ok(())
    }

    /// Draws random degree-n polynomials until a primitive one appears.
    pub fn random_primitive<R: Rng + ?Sized>(n: u32, rng: &mut R) -> Result<Self> {
        if !(MIN_DEGREE..=MAX_DEGREE).contains(&n) {
            return Err(Error::DegreeOutOfRange(n as u64));
        }
        let order = (1u64 << n) - 1;
        let factorization = factorize(order);
        loop {
            let bits = (rng.random::<u64>() & ((1u64 << n) - 1)) | 1 | (1u64 << n);
            let ctx = Self::unchecked(SparsePoly::from_bits(bits), n, factorization.clone());
            if ctx.check_primitive().is_ok() {
                return Ok(ctx);
            }
        }
    }

    pub fn poly(&self) -> &SparsePoly {
        &self.poly
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// Multiplicative group order `M = 2^n - 1`.
    pub fn order(&self) -> u64 {
        self.order
    }

    pub fn factorization(&self) -> &Factorization {
        &self.factorization
    }

    pub fn x(&self) -> FieldElement {
        // n >= 2 so x is already reduced
        FieldElement(2)
    }

    /// Interprets `bits` as a residue; `None` when it has degree >= n.
    pub fn element(&self, bits: u64) -> Option<FieldElement> {
        (bits & !self.mask == 0).then_some(FieldElement(bits))
    }

    /// Barrett reduction of a product of two reduced elements.
    #[inline]
    fn reduce(&self, c: u128) -> FieldElement {
        let q = (clmul_portable((c >> self.n) as u64, self.mu) >> self.n) as u64;
        let r = c ^ clmul_portable(q, self.bits);
        FieldElement(r as u64 & self.mask)
    }

    #[inline]
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        if self.hw_clmul {
            FieldElement(mul_hw(a.0, b.0, self.bits, self.mu, self.n) & self.mask)
        } else {
            self.reduce(clmul_portable(a.0, b.0))
        }
    }

    #[inline]
    pub fn square(&self, a: FieldElement) -> FieldElement {
        self.mul(a, a)
    }

    /// `a * x`
    #[inline]
    pub fn mul_x(&self, a: FieldElement) -> FieldElement {
        let s = a.0 << 1;
        if s >> self.n & 1 == 1 {
            FieldElement((s & self.mask) ^ self.tail)
        } else {
            FieldElement(s)
        }
    }

    pub fn pow(&self, a: FieldElement, k: u64) -> FieldElement {
        if k == 0 {
            return FieldElement::ONE;
        }
        let mut acc = FieldElement::ONE;
        for bit in (0..64 - k.leading_zeros()).rev() {
            acc = self.square(acc);
            if k >> bit & 1 == 1 {
                acc = self.mul(acc, a);
            }
        }
        acc
    }

    /// `x^k mod P` by square-and-shift after reducing `k` modulo the group
    /// order.
    pub fn monomial(&self, k: u64) -> FieldElement {
        let k = k % self.order;
        let mut acc = FieldElement::ONE;
        if k == 0 {
            return acc;
        }
        for bit in (0..64 - k.leading_zeros()).rev() {
            acc = self.square(acc);
            if k >> bit & 1 == 1 {
                acc = self.mul_x(acc);
            }
        }
        acc
    }

    pub fn inverse(&self, a: FieldElement) -> Option<FieldElement> {
        (!a.is_zero()).then(|| self.pow(a, self.order - 1))
    }

    /// Image of a sparse polynomial in the field.
    pub fn residue(&self, p: &SparsePoly) -> FieldElement {
        p.exponents()
            .iter()
            .fold(FieldElement::ZERO, |acc, &e| acc ^ self.monomial(e))
    }

    /// `x^0, x^1, ..., x^max` by repeated multiplication by x.
    pub fn power_table(&self, max: u64) -> Vec<FieldElement> {
        let mut out = Vec::with_capacity(max as usize + 1);
        let mut a = FieldElement::ONE;
        for _ in 0..=max {
            out.push(a);
            a = self.mul_x(a);
        }
        out
    }

    /// True iff `m` is a nonzero multiple of P with a constant term, weight at
    /// most `w` and degree at most `max_degree`.
    pub fn verify_multiple(&self, m: &SparsePoly, w: usize, max_degree: u64) -> bool {
        !m.is_zero()
            && m.has_constant_term()
            && m.weight() <= w
            && m.degree().is_some_and(|d| d <= max_degree)
            && self.residue(m).is_zero()
    }
}

/// Free-function spelling of [`FieldContext::new`].
pub fn make_context(poly: SparsePoly) -> Result<FieldContext> {
    FieldContext::new(poly)
}

fn factorize_small(n: u32) -> Vec<(u32, u32)> {
    if n < 2 {
        return Vec::new();
    }
    factorize(n as u64)
        .factors()
        .iter()
        .map(|&(p, e)| (p as u32, e))
        .collect()
}

/// Quotient of `x^(2n)` by P (degree n, so it fits a word for n <= 63).
fn barrett_constant(p: u64, n: u32) -> u64 {
    // long division of x^(2n): the remainder is tracked as a 2n-bit window
    let mut rem: u128 = 1 << (2 * n);
    let mut q = 0u64;
    for i in (0..=n).rev() {
        if rem >> (n + i) & 1 == 1 {
            rem ^= (p as u128) << i;
            q |= 1 << i;
        }
    }
    q
}

fn poly_gcd(mut a: u64, mut b: u64) -> u64 {
    let deg = |v: u64| 63 - v.leading_zeros();
    while b != 0 {
        while a != 0 && deg(a) >= deg(b) {
            a ^= b << (deg(a) - deg(b));
        }
        (a, b) = (b, a);
    }
    a
}

pub(crate) fn clmul_portable(a: u64, b: u64) -> u128 {
    let mut tab = [0u128; 16];
    let b = b as u128;
    for i in 1..16 {
        tab[i] = if i & 1 == 1 { tab[i - 1] ^ b } else { tab[i >> 1] << 1 };
    }
    let mut acc = 0u128;
    for shift in (0..16).rev() {
        acc = (acc << 4) ^ tab[(a >> (4 * shift)) as usize & 0xf];
    }
    acc
}

#[cfg(target_arch = "x86_64")]
fn hw_clmul_available() -> bool {
    std::arch::is_x86_feature_detected!("pclmulqdq")
}

#[cfg(not(target_arch = "x86_64"))]
fn hw_clmul_available() -> bool {
    false
}

/// Product mod P, with Barrett reduction; the caller masks to n bits.
#[cfg(target_arch = "x86_64")]
#[inline]
fn mul_hw(a: u64, b: u64, p: u64, mu: u64, n: u32) -> u64 {
    #[target_feature(enable = "pclmulqdq")]
    unsafe fn inner(a: u64, b: u64, p: u64, mu: u64, n: u32) -> u64 {
        use std::arch::x86_64::*;
        #[inline(always)]
        unsafe fn clmul(a: u64, b: u64) -> u128 {
            let r = _mm_clmulepi64_si128(_mm_cvtsi64_si128(a as i64), _mm_cvtsi64_si128(b as i64), 0);
            let lo = _mm_cvtsi128_si64(r) as u64;
            let hi = _mm_cvtsi128_si64(_mm_unpackhi_epi64(r, r)) as u64;
            (hi as u128) << 64 | lo as u128
        }
        let c = clmul(a, b);
        let q = (clmul((c >> n) as u64, mu) >> n) as u64;
        (c ^ clmul(q, p)) as u64
    }
    // SAFETY: only reached when pclmulqdq was detected at context build.
    unsafe { inner(a, b, p, mu, n) }
}

#[cfg(not(target_arch = "x86_64"))]
#[inline]
fn mul_hw(a: u64, b: u64, p: u64, mu: u64, n: u32) -> u64 {
    let c = clmul_portable(a, b);
    let q = (clmul_portable((c >> n) as u64, mu) >> n) as u64;
    (c ^ clmul_portable(q, p)) as u64
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ctx(exps: &[u64]) -> FieldContext {
        FieldContext::new(SparsePoly::from_exponents(exps.iter().copied())).unwrap()
    }

    fn bits(exps: &[u64]) -> FieldElement {
        FieldElement(SparsePoly::from_exponents(exps.iter().copied()).to_bits().unwrap())
    }

    #[test]
    fn context_construction() {
        let f8 = ctx(&[0, 1, 3]);
        assert_eq!((f8.n(), f8.order()), (3, 7));
        assert_eq!(f8.factorization().factors(), &[(7, 1)]);
        let f16 = ctx(&[0, 1, 4]);
        assert_eq!((f16.n(), f16.order()), (4, 15));
        assert_eq!(f16.factorization().factors(), &[(3, 1), (5, 1)]);
        ctx(&[0, 1, 2]);
    }

    #[test]
    fn rejects_non_primitive() {
        let err = |e: &[u64]| FieldContext::new(SparsePoly::from_exponents(e.iter().copied()));
        assert!(matches!(err(&[0, 2]), Err(Error::NotPrimitive(_))));
        assert!(matches!(err(&[1, 3]), Err(Error::NotPrimitive(_))));
        // x^4+x^3+x^2+x+1 is irreducible but x has order 5
        assert!(matches!(err(&[0, 1, 2, 3, 4]), Err(Error::NotPrimitive(_))));
        assert!(matches!(err(&[0]), Err(Error::DegreeOutOfRange(0))));
        assert!(matches!(err(&[0, 1]), Err(Error::DegreeOutOfRange(1))));
        assert!(matches!(err(&[0, 64]), Err(Error::DegreeOutOfRange(64))));
        assert!(matches!(err(&[]), Err(Error::DegreeOutOfRange(_))));
    }

    #[test]
    fn dense_degree_53_polynomial_is_primitive() {
        let p = crate::poly::parse_poly(
            "53,47,45,44,42,40,39,38,36,33,32,31,30,28,27,26,25,21,20,17,16,15,13,11,10,7,6,3,2,1,0",
        )
        .unwrap();
        let c = FieldContext::new(p).unwrap();
        assert_eq!(c.order(), (1 << 53) - 1);
    }

    #[test]
    fn residue_examples() {
        let f8 = ctx(&[0, 1, 3]);
        let p = |e: &[u64]| SparsePoly::from_exponents(e.iter().copied());
        assert_eq!(f8.residue(&p(&[0, 1, 3])), FieldElement::ZERO);
        assert_eq!(f8.residue(&p(&[5])), bits(&[0, 1, 2]));
        assert_eq!(f8.residue(&p(&[0, 4, 5])), FieldElement::ZERO);
    }

    #[test]
    fn monomial_examples() {
        let f8 = ctx(&[0, 1, 3]);
        let f16 = ctx(&[0, 1, 4]);
        assert_eq!(f8.monomial(0), FieldElement::ONE);
        assert_eq!(f8.monomial(7), FieldElement::ONE);
        assert_eq!(f16.monomial(12), bits(&[0, 1, 2, 3]));
    }

    #[test]
    fn mul_examples() {
        let f8 = ctx(&[0, 1, 3]);
        assert_eq!(f8.mul(bits(&[1]), bits(&[2])), bits(&[0, 1]));
        assert_eq!(f8.mul(FieldElement::ZERO, bits(&[0, 2])), FieldElement::ZERO);
        // (x^2 + 1)^2 = x^12 = x^5 = x^2 + x + 1
        assert_eq!(f8.mul(bits(&[0, 2]), bits(&[0, 2])), bits(&[0, 1, 2]));
    }

    #[test]
    fn verify_multiple_examples() {
        let f8 = ctx(&[0, 1, 3]);
        let p = |e: &[u64]| SparsePoly::from_exponents(e.iter().copied());
        assert!(f8.verify_multiple(&p(&[0, 1, 3]), 3, 7));
        assert!(!f8.verify_multiple(&p(&[0, 4, 5]), 3, 4));
        assert!(f8.verify_multiple(&p(&[0, 2, 6]), 3, 7));
        assert!(!f8.verify_multiple(&p(&[1, 2, 4]), 3, 7)); // x * P, no constant term
        assert!(!f8.verify_multiple(&SparsePoly::zero(), 3, 7));
        assert!(!f8.verify_multiple(&p(&[0, 1, 3]), 2, 7));
    }

    #[test]
    fn monomial_map_is_a_bijection_for_small_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 2..=16 {
            let f = FieldContext::random_primitive(n, &mut rng).unwrap();
            let mut seen = vec![false; 1 << n];
            let mut a = FieldElement::ONE;
            for k in 0..f.order() {
                assert_eq!(a, f.monomial(k));
                assert!(!a.is_zero() && !seen[a.0 as usize], "n={n} k={k}");
                seen[a.0 as usize] = true;
                a = f.mul_x(a);
            }
            assert_eq!(a, FieldElement::ONE);
        }
    }

    #[test]
    fn hardware_and_portable_clmul_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..10_000 {
            let (a, b) = (rng.random::<u64>(), rng.random::<u64>());
            // bit-serial reference
            let mut r = 0u128;
            for i in 0..64 {
                if b >> i & 1 == 1 {
                    r ^= (a as u128) << i;
                }
            }
            assert_eq!(r, clmul_portable(a, b));
        }
    }

    #[test]
    fn hardware_and_portable_reduction_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for n in [2u32, 3, 17, 32, 53, 63] {
            let f = FieldContext::random_primitive(n, &mut rng).unwrap();
            for _ in 0..2000 {
                let a = FieldElement(rng.random::<u64>() & f.mask);
                let b = FieldElement(rng.random::<u64>() & f.mask);
                let soft = f.reduce(clmul_portable(a.0, b.0));
                assert_eq!(FieldElement(mul_hw(a.0, b.0, f.bits, f.mu, n) & f.mask), soft);
                // shift-and-add reference
                let mut acc = FieldElement::ZERO;
                let mut sh = a;
                for i in 0..n {
                    if b.0 >> i & 1 == 1 {
                        acc ^= sh;
                    }
                    sh = f.mul_x(sh);
                }
                assert_eq!(acc, soft);
            }
        }
    }

    #[test]
    fn inverse_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = FieldContext::random_primitive(61, &mut rng).unwrap();
        for _ in 0..200 {
            let a = FieldElement(rng.random::<u64>() & ((1 << 61) - 1));
            if a.is_zero() {
                continue;
            }
            assert_eq!(f.mul(a, f.inverse(a).unwrap()), FieldElement::ONE);
        }
        assert_eq!(f.inverse(FieldElement::ZERO), None);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn residue_is_additive(
            seed in any::<u64>(),
            n in 2u32..=63,
            a in proptest::collection::vec(0u64..5000, 0..10),
            b in proptest::collection::vec(0u64..5000, 0..10),
        ) {
            let f = FieldContext::random_primitive(n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let pa = SparsePoly::from_exponents(a);
            let pb = SparsePoly::from_exponents(b);
            prop_assert_eq!(f.residue(&pa.xor(&pb)), f.residue(&pa) ^ f.residue(&pb));
        }

        #[test]
        fn monomials_are_periodic_and_multiplicative(
            seed in any::<u64>(),
            n in 2u32..=63,
            i in any::<u64>(),
            j in any::<u64>(),
        ) {
            let f = FieldContext::random_primitive(n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let (i, j) = (i >> 2, j >> 2);
            prop_assert_eq!(f.monomial(i), f.monomial(i % f.order()));
            prop_assert_eq!(f.mul(f.monomial(i), f.monomial(j)), f.monomial(i + j));
        }

        #[test]
        fn mul_is_commutative_associative(seed in any::<u64>(), n in 2u32..=63, a: u64, b: u64, c: u64) {
            let f = FieldContext::random_primitive(n, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
            let m = (1u64 << n) - 1;
            let (a, b, c) = (FieldElement(a & m), FieldElement(b & m), FieldElement(c & m));
            prop_assert_eq!(f.mul(a, b), f.mul(b, a));
            prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
            prop_assert_eq!(f.mul(a, FieldElement::ONE), a);
            prop_assert_eq!(f.mul(a, f.x()), f.mul_x(a));
        }
    }
}
