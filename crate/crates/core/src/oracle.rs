//! Slow reference implementations on dense bit arrays. Nothing here calls
//! the field arithmetic in [`crate::field`].

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{FieldContext, FieldElement};
use crate::poly::SparsePoly;
use crate::search::tuples::binom;
use crate::search::{sort_records, MultipleRecord};

/// Largest `C(D, w-1)` the enumeration accepts.
pub const MAX_CANDIDATES: u128 = 1_000_000_000;
/// Largest group order [`brute_force_log`] walks.
pub const MAX_LOG_ORDER: u64 = 1 << 26;

/// Bits of P with x^n included, plus n.
fn dense_modulus(ctx: &FieldContext) -> (u64, u32) {
    let mut bits = 0u64;
    for &e in ctx.poly().exponents() {
        if e < ctx.n() as u64 {
            bits |= 1 << e;
        }
    }
    (bits, ctx.n())
}

#[inline]
fn times_x(v: u64, low: u64, n: u32) -> u64 {
    let s = v << 1;
    if s >> n & 1 == 1 {
        (s ^ (1 << n)) ^ low
    } else {
        s
    }
}

/// Every multiple of weight exactly `w` with constant term and degree at
/// most `D`, by exhaustive enumeration.
pub fn brute_force_multiples(ctx: &FieldContext, w: u32, max_degree: u64) -> Result<Vec<MultipleRecord>> {
    if w < 2 {
        return Ok(Vec::new());
    }
    let k = (w - 1) as usize;
    let candidates = binom(max_degree, k as u64);
    if candidates > MAX_CANDIDATES {
        return Err(Error::InstanceTooLarge(format!(
            "C({max_degree}, {k}) = {candidates} candidates"
        )));
    }
    let (low, n) = dense_modulus(ctx);
    let mut pow = Vec::with_capacity(max_degree as usize + 1);
    let mut v = 1u64;
    for _ in 0..=max_degree {
        pow.push(v);
        v = times_x(v, low, n);
    }
    let top = max_degree + 1 - k as u64;
    let mut found: Vec<Vec<u64>> = (1..=top.max(1))
        .into_par_iter()
        .flat_map_iter(|first| {
            let mut out = Vec::new();
            if k as u64 <= max_degree {
                let mut stack = vec![first];
                dfs(&pow, k, max_degree, 1 ^ pow[first as usize], &mut stack, &mut out);
            }
            out
        })
        .collect();
    found.sort();
    let mut records: Vec<MultipleRecord> = found
        .into_iter()
        .map(|t| MultipleRecord::new(SparsePoly::from_sorted_unique(t), None))
        .collect();
    sort_records(&mut records);
    Ok(records)
}

fn dfs(pow: &[u64], k: usize, max: u64, acc: u64, stack: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
    let last = *stack.last().unwrap();
    if stack.len() == k {
        if acc == 0 {
            out.push(std::iter::once(0).chain(stack.iter().copied()).collect());
        }
        return;
    }
    let remaining = (k - stack.len()) as u64;
    for t in last + 1..=max - (remaining - 1) {
        stack.push(t);
        dfs(pow, k, max, acc ^ pow[t as usize], stack, out);
        stack.pop();
    }
}

/// Log of `a` by walking powers of x from 1.
pub fn brute_force_log(ctx: &FieldContext, a: FieldElement) -> Result<u64> {
    if a.is_zero() {
        return Err(Error::LogOfZero);
    }
    if ctx.order() > MAX_LOG_ORDER {
        return Err(Error::InstanceTooLarge(format!("group order {}", ctx.order())));
    }
    let (low, n) = dense_modulus(ctx);
    let target = a.bits();
    let mut v = 1u64;
    for k in 0..ctx.order() {
        if v == target {
            return Ok(k);
        }
        v = times_x(v, low, n);
    }
    unreachable!("x generates the group")
}

fn dense(p: &SparsePoly) -> Vec<u64> {
    let words = p.degree().map_or(0, |d| d as usize / 64 + 1);
    let mut v = vec![0u64; words];
    for &e in p.exponents() {
        v[e as usize / 64] |= 1 << (e % 64);
    }
    v
}

fn bit(v: &[u64], i: u64) -> bool {
    v[i as usize / 64] >> (i % 64) & 1 == 1
}

fn flip(v: &mut [u64], i: u64) {
    v[i as usize / 64] ^= 1 << (i % 64);
}

/// Schoolbook long division over GF(2). Meant for small degrees; the
/// remainder is held densely.
pub fn poly_divides(p: &SparsePoly, m: &SparsePoly) -> bool {
    let dp = p.degree().expect("nonzero divisor");
    let Some(dm) = m.degree() else {
        return true;
    };
    let mut rem = dense(m);
    let mut i = dm;
    while i >= dp {
        if bit(&rem, i) {
            for &e in p.exponents() {
                flip(&mut rem, e + i - dp);
            }
        }
        if i == 0 {
            break;
        }
        i -= 1;
    }
    rem.iter().all(|&w| w == 0)
}
