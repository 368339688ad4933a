//! Strictly increasing exponent tuples over `[1, max]`.

use rand::Rng;

use crate::field::{FieldContext, FieldElement};

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binom(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for j in 0..k {
        // acc * (n - j) / (j + 1) stays integral at every step
        let num = match acc.checked_mul((n - j) as u128) {
            Some(v) => v,
            None => return u128::MAX,
        };
        acc = num / (j as u128 + 1);
    }
    acc
}

/// All `C(max, q)` tuples `0 < t_1 < ... < t_q <= max` in lexicographic
/// order; `q = 0` yields one empty tuple.
pub fn enumerate_tuples(q: usize, max: u64) -> Tuples {
    Tuples {
        max,
        cur: (1..=q as u64).collect(),
        done: q as u64 > max,
    }
}

pub struct Tuples {
    max: u64,
    cur: Vec<u64>,
    done: bool,
}

impl Iterator for Tuples {
    type Item = Vec<u64>;

    fn next(&mut self) -> Option<Vec<u64>> {
        if self.done {
            return None;
        }
        let out = self.cur.clone();
        let q = self.cur.len();
        // advance the rightmost position that still has room
        let mut i = q;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            let limit = self.max - (q - 1 - i) as u64;
            if self.cur[i] < limit {
                self.cur[i] += 1;
                for j in i + 1..q {
                    self.cur[j] = self.cur[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

/// Colexicographic rank of a tuple over `[1, ..]`.
pub fn colex_rank(tuple: &[u64]) -> u128 {
    tuple
        .iter()
        .enumerate()
        .map(|(i, &t)| binom(t - 1, i as u64 + 1))
        .sum()
}

/// Inverse of [`colex_rank`] for tuples bounded by `max`.
pub fn colex_unrank(mut rank: u128, q: usize, max: u64, out: &mut Vec<u64>) {
    out.clear();
    out.resize(q, 0);
    let mut hi = max;
    for i in (1..=q as u64).rev() {
        // largest c in [i-1, hi-1] with C(c, i) <= rank
        let (mut lo, mut top) = (i - 1, hi - 1);
        while lo < top {
            let mid = lo + (top - lo).div_ceil(2);
            if binom(mid, i) <= rank {
                lo = mid;
            } else {
                top = mid - 1;
            }
        }
        rank -= binom(lo, i);
        out[i as usize - 1] = lo + 1;
        hi = lo;
    }
}

/// Uniform random tuple by unranking a uniform rank.
pub fn random_tuple<R: Rng + ?Sized>(rng: &mut R, q: usize, max: u64, out: &mut Vec<u64>) {
    let total = binom(max, q as u64);
    assert!(total > 0 && total < u128::MAX, "tuple space empty or too large");
    colex_unrank(rng.random_range(0..total), q, max, out);
}

/// `x^i` lookups, tabulated up to a bound and computed beyond it.
pub(crate) struct Monomials<'a> {
    ctx: &'a FieldContext,
    table: Vec<FieldElement>,
}

const MONOMIAL_TABLE_MAX: u64 = 1 << 24;

impl<'a> Monomials<'a> {
    pub(crate) fn new(ctx: &'a FieldContext, max: u64) -> Self {
        Monomials {
            ctx,
            table: ctx.power_table(max.min(MONOMIAL_TABLE_MAX)),
        }
    }

    #[inline]
    pub(crate) fn get(&self, i: u64) -> FieldElement {
        match self.table.get(i as usize) {
            Some(&v) => v,
            None => self.ctx.monomial(i),
        }
    }

    pub(crate) fn sum(&self, tuple: &[u64]) -> FieldElement {
        tuple.iter().fold(FieldElement::ZERO, |acc, &t| acc ^ self.get(t))
    }
}

/// Calls `f(tuple, 1 + sum x^t)` for every q-tuple over `[1, max]` whose first
/// element is `first` (every tuple when `q = 0`, ignoring `first`).
pub(crate) fn walk_with_first<F>(q: usize, first: u64, max: u64, mono: &Monomials, f: &mut F)
where
    F: FnMut(&[u64], FieldElement),
{
    let mut buf = vec![0u64; q];
    if q == 0 {
        f(&buf, FieldElement::ONE);
        return;
    }
    if first + (q as u64 - 1) > max {
        return;
    }
    buf[0] = first;
    walk(&mut buf, 1, first + 1, max, FieldElement::ONE ^ mono.get(first), mono, f);
}

fn walk<F>(
    buf: &mut [u64],
    depth: usize,
    start: u64,
    max: u64,
    acc: FieldElement,
    mono: &Monomials,
    f: &mut F,
) where
    F: FnMut(&[u64], FieldElement),
{
    if depth == buf.len() {
        f(buf, acc);
        return;
    }
    let remaining = (buf.len() - depth) as u64;
    for v in start..=max - (remaining - 1) {
        buf[depth] = v;
        walk(buf, depth + 1, v + 1, max, acc ^ mono.get(v), mono, f);
    }
}

/// Range of first elements for q-tuples over `[1, max]`.
pub(crate) fn first_elements(q: usize, max: u64) -> std::ops::RangeInclusive<u64> {
    if q == 0 {
        1..=1
    } else if q as u64 > max {
        #[allow(clippy::reversed_empty_ranges)]
        {
            1..=0
        }
    } else {
        1..=max - (q as u64 - 1)
    }
}
