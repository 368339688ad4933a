//! Zech logarithms `Z(i) = Log(1 + x^i)` and the identities linking them.
//!
//! Over GF(2) three maps send a Zech pair `(i, Z(i))` to another one:
//! doubling `(2i, 2Z(i))` (Frobenius), the involution `(Z(i), i)`, and
//! `(M - i, Z(i) - i)` from `1 + x^-i = x^-i (1 + x^i)`.

use std::collections::BTreeSet;

use super::LogEngine;
use crate::error::Result;

/// Closure of `(i, zi)` under the three Zech identities, all exponents taken
/// modulo `m`. Holds at most `6n` pairs.
pub fn zech_orbit(i: u64, zi: u64, m: u64) -> BTreeSet<(u64, u64)> {
    let mulmod2 = |a: u64| ((a as u128 * 2) % m as u128) as u64;
    let mut seen = BTreeSet::new();
    let mut stack = vec![(i % m, zi % m)];
    while let Some((j, z)) = stack.pop() {
        if j == 0 || !seen.insert((j, z)) {
            continue;
        }
        stack.push((mulmod2(j), mulmod2(z)));
        stack.push((z, j));
        stack.push((m - j, (z + m - j) % m));
    }
    seen
}

/// `Z(i)` for `i` in `0..=max`, `None` where undefined. Even exponents reuse
/// `Z(i) = 2 Z(i/2)`, halving the number of logarithms computed; the second
/// value is that count.
pub fn zech_table(engine: &LogEngine, max: u64) -> Result<(Vec<Option<u64>>, u64)> {
    let m = engine.ctx().order();
    let mut out: Vec<Option<u64>> = Vec::with_capacity(max as usize + 1);
    let mut computed = 0;
    for i in 0..=max {
        let z = if i % m == 0 {
            None
        } else if i % 2 == 0 {
            out[(i / 2) as usize].map(|z| ((z as u128 * 2) % m as u128) as u64)
        } else {
            computed += 1;
            Some(engine.zech_log(i)?)
        };
        out.push(z);
    }
    Ok((out, computed))
}
