//! Stored side of the logarithmic trade-off: `(Log(1 + sum x^g), g)` pairs
//! sorted by logarithm, queried by cyclic intervals.

use std::ops::Range;

use rayon::prelude::*;

use super::tuples::{colex_rank, colex_unrank, first_elements, walk_with_first, Monomials};
use crate::dlog::LogEngine;
use crate::error::Result;

/// Index ranges of `sorted` whose key lies in the cyclic interval
/// `[lo, hi]` modulo `m`: one slice, or two when the interval wraps past
/// `m - 1`. `lo == (hi + 1) mod m` covers the whole circle.
pub fn range_query<T>(
    sorted: &[T],
    key: impl Fn(&T) -> u64,
    lo: u64,
    hi: u64,
    m: u64,
) -> [Range<usize>; 2] {
    let (lo, hi) = (lo % m, hi % m);
    let first_at_least = |v: u64| sorted.partition_point(|t| key(t) < v);
    let first_above = |v: u64| sorted.partition_point(|t| key(t) <= v);
    if lo <= hi {
        [first_at_least(lo)..first_above(hi), 0..0]
    } else {
        [first_at_least(lo)..sorted.len(), 0..first_above(hi)]
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogTableEntry {
    pub log: u64,
    pub gamma: Vec<u64>,
    /// Largest exponent of `gamma`, 0 for the empty tuple.
    pub max_exp: u64,
}

#[derive(Debug, Clone)]
pub struct LogTable {
    q: usize,
    max_degree: u64,
    modulus: u64,
    /// `(log, colex rank)`, sorted.
    entries: Vec<(u64, u64)>,
    /// Ranks whose polynomial `1 + sum x^g` vanishes mod P and has no log.
    zero: Vec<u64>,
    log_calls: u64,
}

/// Bytes per stored entry.
pub(crate) const ENTRY_BYTES: u64 = 16;

impl LogTable {
    /// Logs of `1 + x^g1 + ... + x^gq` for every q-tuple over
    /// `[1, max_degree]`. Runs on the current rayon pool.
    pub fn build(engine: &LogEngine, q: usize, max_degree: u64) -> Result<Self> {
        let ctx = engine.ctx();
        let modulus = ctx.order();
        let (mut entries, zero, log_calls) = if q == 1 {
            Self::build_zech(engine, max_degree)?
        } else {
            let mono = Monomials::new(ctx, max_degree);
            let parts: Vec<(Vec<(u64, u64)>, Vec<u64>, u64)> = first_elements(q, max_degree)
                .into_par_iter()
                .map(|first| {
                    let mut local = Vec::new();
                    let mut zero = Vec::new();
                    let mut calls = 0;
                    walk_with_first(q, first, max_degree, &mono, &mut |t, r| {
                        let rank = colex_rank(t) as u64;
                        if r.is_zero() {
                            zero.push(rank);
                        } else {
                            calls += 1;
                            local.push((engine.discrete_log(r).expect("nonzero"), rank));
                        }
                    });
                    (local, zero, calls)
                })
                .collect();
            let mut entries = Vec::new();
            let mut zero = Vec::new();
            let mut calls = 0;
            for (e, z, c) in parts {
                entries.extend(e);
                zero.extend(z);
                calls += c;
            }
            (entries, zero, calls)
        };
        entries.par_sort_unstable();
        Ok(LogTable {
            q,
            max_degree,
            modulus,
            entries,
            zero,
            log_calls,
        })
    }

    // 1 + x^g is a Zech logarithm; Z(2g) = 2 Z(g) covers the even g.
    #[allow(clippy::type_complexity)]
    fn build_zech(engine: &LogEngine, max: u64) -> Result<(Vec<(u64, u64)>, Vec<u64>, u64)> {
        let m = engine.ctx().order();
        let odd: Vec<Option<u64>> = (0..max.div_ceil(2))
            .into_par_iter()
            .map(|k| {
                let i = 2 * k + 1;
                (i % m != 0).then(|| engine.zech_log(i).expect("defined"))
            })
            .collect();
        let calls = odd.iter().filter(|z| z.is_some()).count() as u64;
        let mut z: Vec<Option<u64>> = vec![None; max as usize + 1];
        for i in 1..=max {
            z[i as usize] = if i % 2 == 1 {
                odd[(i / 2) as usize]
            } else if i % m == 0 {
                None
            } else {
                z[(i / 2) as usize].map(|v| ((v as u128 * 2) % m as u128) as u64)
            };
        }
        let mut entries = Vec::with_capacity(max as usize);
        let mut zero = Vec::new();
        for i in 1..=max {
            // colex rank of (i) is i - 1
            match z[i as usize] {
                Some(l) => entries.push((l, i - 1)),
                None => zero.push(i - 1),
            }
        }
        Ok((entries, zero, calls))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn tuple_size(&self) -> usize {
        self.q
    }

    pub fn max_degree(&self) -> u64 {
        self.max_degree
    }

    pub fn log_calls(&self) -> u64 {
        self.log_calls
    }

    pub fn bytes(&self) -> u64 {
        (self.entries.len() + self.zero.len()) as u64 * ENTRY_BYTES
    }

    pub fn logs(&self) -> impl Iterator<Item = u64> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    pub(crate) fn raw(&self) -> &[(u64, u64)] {
        &self.entries
    }

    pub(crate) fn zero_ranks(&self) -> &[u64] {
        &self.zero
    }

    pub(crate) fn unrank(&self, rank: u64, out: &mut Vec<u64>) {
        colex_unrank(rank as u128, self.q, self.max_degree, out);
    }

    pub fn entry(&self, i: usize) -> LogTableEntry {
        let (log, rank) = self.entries[i];
        let mut gamma = Vec::new();
        self.unrank(rank, &mut gamma);
        LogTableEntry {
            log,
            max_exp: gamma.last().copied().unwrap_or(0),
            gamma,
        }
    }

    /// Entries whose log lies in the cyclic interval `[lo, hi]`.
    pub fn range_query(&self, lo: u64, hi: u64) -> Vec<LogTableEntry> {
        range_query(&self.entries, |e| e.0, lo, hi, self.modulus)
            .into_iter()
            .flatten()
            .map(|i| self.entry(i))
            .collect()
    }

    /// Calls `f(index, e)` for every entry and every integer shift
    /// `e in [lo, hi]` with `log = base + e (mod M)`. The interval may be
    /// longer than M, in which case an entry shows up once per period.
    pub(crate) fn scan(&self, base: u64, lo: i64, hi: i64, mut f: impl FnMut(usize, i64)) {
        if lo > hi || self.entries.is_empty() {
            return;
        }
        let m = self.modulus as i128;
        let a = base as i128 + lo as i128;
        let b = base as i128 + hi as i128;
        let (k0, k1) = (a.div_euclid(m), b.div_euclid(m));
        for k in k0..=k1 {
            let start = a.max(k * m) - k * m;
            let end = b.min(k * m + m - 1) - k * m;
            let s = self.entries.partition_point(|e| (e.0 as i128) < start);
            let t = self.entries.partition_point(|e| (e.0 as i128) <= end);
            for (idx, entry) in self.entries[s..t].iter().enumerate() {
                let e = entry.0 as i128 + k * m - base as i128;
                f(s + idx, e as i64);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dlog::build_engine;
    use crate::field::FieldContext;
    use crate::poly::SparsePoly;
    use proptest::prelude::*;

    #[test]
    fn range_query_examples() {
        let logs = [1u64, 3, 6];
        let pick = |lo, hi| -> Vec<u64> {
            range_query(&logs, |&v| v, lo, hi, 7)
                .into_iter()
                .flatten()
                .map(|i| logs[i])
                .collect()
        };
        assert_eq!(pick(2, 4), vec![3]);
        assert_eq!(pick(6, 1), vec![6, 1]);
        assert_eq!(pick(0, 6), vec![1, 3, 6]);
        assert_eq!(pick(4, 3), vec![6, 1, 3]);
        assert_eq!(pick(4, 5), Vec::<u64>::new());
    }

    #[test]
    fn table_entries_carry_their_logs() {
        let ctx = FieldContext::new(SparsePoly::from_exponents([0, 1, 4])).unwrap();
        let engine = build_engine(&ctx, u64::MAX).unwrap();
        for q in 0..4 {
            let t = LogTable::build(&engine, q, 20).unwrap();
            assert_eq!(
                t.len() + t.zero_ranks().len(),
                crate::search::tuples::binom(20, q as u64) as usize
            );
            assert!(t.logs().collect::<Vec<_>>().windows(2).all(|w| w[0] <= w[1]));
            for i in 0..t.len() {
                let e = t.entry(i);
                let p = SparsePoly::from_exponents(e.gamma.iter().copied().chain([0]));
                assert_eq!(ctx.monomial(e.log), ctx.residue(&p));
            }
            for &r in t.zero_ranks() {
                let mut g = Vec::new();
                t.unrank(r, &mut g);
                let p = SparsePoly::from_exponents(g.iter().copied().chain([0]));
                assert!(ctx.residue(&p).is_zero());
            }
        }
        // 1 + x^15 vanishes in F_16
        let t = LogTable::build(&engine, 1, 20).unwrap();
        assert_eq!(t.zero_ranks(), &[14]);
    }

    #[test]
    fn scan_wraps_over_several_periods() {
        let ctx = FieldContext::new(SparsePoly::from_exponents([0, 1, 3])).unwrap();
        let engine = build_engine(&ctx, u64::MAX).unwrap();
        let t = LogTable::build(&engine, 1, 3).unwrap();
        let mut seen = Vec::new();
        t.scan(2, -9, 9, |i, e| seen.push((t.entry(i).log, e)));
        for &(log, e) in &seen {
            assert_eq!((2 + e).rem_euclid(7) as u64, log);
            assert!((-9..=9).contains(&e));
        }
        // every entry appears for each of its representatives in [-7, 11]
        let expected: usize = (0..t.len())
            .map(|i| {
                let l = t.entry(i).log as i64;
                (-9..=9).filter(|e| (2 + e - l).rem_euclid(7) == 0).count()
            })
            .sum();
        assert_eq!(seen.len(), expected);
    }

    proptest! {
        #[test]
        fn range_query_matches_linear_scan(
            mut logs in proptest::collection::vec(0u64..101, 0..40),
            lo in 0u64..101,
            hi in 0u64..101,
        ) {
            logs.sort_unstable();
            let m = 101;
            let got: Vec<u64> = range_query(&logs, |&v| v, lo, hi, m)
                .into_iter()
                .flatten()
                .map(|i| logs[i])
                .collect();
            let mut got_sorted = got.clone();
            got_sorted.sort_unstable();
            let want: Vec<u64> = logs
                .iter()
                .copied()
                .filter(|&v| if lo <= hi { lo <= v && v <= hi } else { v >= lo || v <= hi })
                .collect();
            prop_assert_eq!(got_sorted, want);
        }
    }
}
