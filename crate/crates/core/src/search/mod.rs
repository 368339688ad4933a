//! All low-weight multiples of P up to a degree bound.
//!
//! Two solvers share the same output contract: every multiple of weight
//! exactly `w` with a constant term and degree at most `D`, canonical and
//! deduplicated, sorted by `(degree, exponents)`.
//!
//! * [`tmto_find_all`] is the classical trade-off: store the residues of
//!   `x^g1 + ... + x^gq1`, probe with `x^d1 + ... + x^dq2 + 1`.
//! * [`logtmto_find_all`] stores logarithms of `1 + x^g1 + ... + x^gq1` and
//!   looks for logs of the probe side within distance about `D`, so each
//!   match carries its own shift.

mod classical;
mod logtable;
mod logtmto;
pub mod tuples;

use std::time::Duration;

use rustc_hash::FxHashMap;
use serde::Serialize;

pub use classical::tmto_find_all;
pub use logtable::{range_query, LogTable, LogTableEntry};
pub use logtmto::logtmto_find_all;
pub(crate) use logtmto::{probe, ProbeCounts};

use crate::error::{Error, Result};
use crate::poly::{xor_sorted_into, SparsePoly};

/// Default cap on predicted table bytes.
pub const DEFAULT_BUDGET_BYTES: u64 = 1 << 31;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Classical,
    Logarithmic,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::Classical => "tmto",
            Algorithm::Logarithmic => "logtmto",
        }
    }

    /// Terms contributed besides the two tuples: the shared constant for the
    /// classical split, both constants for the logarithmic one.
    fn constants(self) -> u32 {
        match self {
            Algorithm::Classical => 1,
            Algorithm::Logarithmic => 2,
        }
    }
}

/// The balanced split `(q1, q2)` with `q1 <= q2`.
pub fn default_split(w: u32, algorithm: Algorithm) -> Result<(u32, u32)> {
    let c = algorithm.constants();
    if w < 2 {
        return Err(Error::WeightTooSmall(w));
    }
    let rest = w - c;
    Ok((rest / 2, rest.div_ceil(2)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchParams {
    pub weight: u32,
    pub max_degree: u64,
    pub q1: u32,
    pub q2: u32,
    /// Enumerate the probe side only up to [`second_phase_bound`]. Only the
    /// logarithmic solver uses it.
    pub restrict_second_phase: bool,
    pub algorithm: Algorithm,
    pub threads: usize,
    pub budget_bytes: u64,
}

impl SearchParams {
    pub fn new(algorithm: Algorithm, weight: u32, max_degree: u64) -> Result<Self> {
        let (q1, q2) = default_split(weight, algorithm)?;
        Ok(SearchParams {
            weight,
            max_degree,
            q1,
            q2,
            restrict_second_phase: false,
            algorithm,
            threads: 1,
            budget_bytes: DEFAULT_BUDGET_BYTES,
        })
    }

    pub fn restricted(mut self, on: bool) -> Self {
        self.restrict_second_phase = on;
        self
    }

    pub fn threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }

    pub fn budget(mut self, bytes: u64) -> Self {
        self.budget_bytes = bytes;
        self
    }

    pub fn split(mut self, q1: u32, q2: u32) -> Self {
        self.q1 = q1;
        self.q2 = q2;
        self
    }

    pub(crate) fn validate(&self, expected: Algorithm) -> Result<()> {
        if self.algorithm != expected {
            return Err(Error::InvalidParams(format!(
                "{} solver called with {} parameters",
                expected.name(),
                self.algorithm.name()
            )));
        }
        let c = self.algorithm.constants();
        if self.q1 + self.q2 + c != self.weight {
            return Err(Error::InvalidParams(format!(
                "split {}+{}+{c} does not equal weight {}",
                self.q1, self.q2, self.weight
            )));
        }
        if self.q1 > self.q2 {
            return Err(Error::InvalidParams("split needs q1 <= q2".into()));
        }
        if self.max_degree == 0 || self.max_degree > crate::poly::MAX_EXPONENT / 2 {
            return Err(Error::InvalidParams(format!(
                "degree bound {} out of range",
                self.max_degree
            )));
        }
        Ok(())
    }
}

/// Where a multiple came from: the stored tuple, the probe tuple and, for
/// the logarithmic solver, the shift applied to the probe half.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Provenance {
    pub gamma: Vec<u64>,
    pub delta: Vec<u64>,
    pub shift: Option<i64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MultipleRecord {
    pub poly: SparsePoly,
    pub weight: usize,
    pub degree: u64,
    pub provenance: Option<Provenance>,
}

impl MultipleRecord {
    pub fn new(poly: SparsePoly, provenance: Option<Provenance>) -> Self {
        MultipleRecord {
            weight: poly.weight(),
            degree: poly.degree().unwrap_or(0),
            poly,
            provenance,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SearchStats {
    pub table_entries: u64,
    pub table_bytes: u64,
    pub probes: u64,
    pub log_calls: u64,
    /// Matches of the right residue or shift before deduplication.
    pub raw_hits: u64,
    pub duplicates: u64,
    /// Matches with shift 0, which only yield weight <= w - 2.
    pub zero_shift_skips: u64,
    /// Matches where terms cancelled below weight w.
    pub cancelled: u64,
    #[serde(skip)]
    pub phase1_time: Duration,
    #[serde(skip)]
    pub phase2_time: Duration,
    pub second_phase_bound: u64,
}

#[derive(Debug, Clone)]
pub struct SearchOutcome {
    pub records: Vec<MultipleRecord>,
    pub stats: SearchStats,
}

/// Deduplicating sink. Keeps the smallest provenance per multiple so merged
/// results do not depend on how work was split.
#[derive(Debug, Default)]
pub(crate) struct Collector {
    found: FxHashMap<SparsePoly, Provenance>,
    pub(crate) hits: u64,
}

impl Collector {
    pub(crate) fn offer(&mut self, poly: SparsePoly, prov: Provenance) {
        self.hits += 1;
        match self.found.get_mut(&poly) {
            Some(old) => {
                if prov < *old {
                    *old = prov;
                }
            }
            None => {
                self.found.insert(poly, prov);
            }
        }
    }

    /// [`Collector::offer`] without allocating for repeats.
    pub(crate) fn offer_parts(&mut self, exps: &[u64], gamma: &[u64], delta: &[u64], shift: Option<i64>) {
        self.hits += 1;
        match self.found.get_mut(exps) {
            Some(old) => {
                if (gamma, delta, shift) < (old.gamma.as_slice(), old.delta.as_slice(), old.shift) {
                    *old = Provenance {
                        gamma: gamma.to_vec(),
                        delta: delta.to_vec(),
                        shift,
                    };
                }
            }
            None => {
                self.found.insert(
                    SparsePoly::from_sorted_unique(exps.to_vec()),
                    Provenance {
                        gamma: gamma.to_vec(),
                        delta: delta.to_vec(),
                        shift,
                    },
                );
            }
        }
    }

    pub(crate) fn merge(mut self, other: Collector) -> Collector {
        let (mut big, small) = if self.found.len() >= other.found.len() {
            (std::mem::take(&mut self), other)
        } else {
            (other, std::mem::take(&mut self))
        };
        big.hits += small.hits;
        for (poly, prov) in small.found {
            big.hits -= 1;
            big.offer(poly, prov);
        }
        big
    }

    pub(crate) fn len(&self) -> usize {
        self.found.len()
    }

    pub(crate) fn into_sorted(self) -> Vec<MultipleRecord> {
        let mut out: Vec<MultipleRecord> = self
            .found
            .into_iter()
            .map(|(p, prov)| MultipleRecord::new(p, Some(prov)))
            .collect();
        sort_records(&mut out);
        out
    }
}

pub fn sort_records(records: &mut [MultipleRecord]) {
    records.sort_by(|a, b| {
        (a.degree, a.poly.exponents()).cmp(&(b.degree, b.poly.exponents()))
    });
}

/// Representative of `lg - ld` modulo the odd `m` in `[-(m-1)/2, (m-1)/2]`.
pub fn centered_shift(lg: u64, ld: u64, m: u64) -> i64 {
    let d = ((lg as i128 - ld as i128).rem_euclid(m as i128)) as u64;
    if d > (m - 1) / 2 {
        d as i64 - m as i64
    } else {
        d as i64
    }
}

/// `(1 + sum x^g) + x^e (1 + sum x^d)` for `e > 0`, or
/// `x^-e (1 + sum x^g) + (1 + sum x^d)` for `e < 0`. Coinciding terms cancel.
pub fn assemble_multiple(gamma: &[u64], delta: &[u64], e: i64) -> Result<SparsePoly> {
    if e == 0 {
        return Err(Error::ZeroShift);
    }
    let mut out = Vec::with_capacity(gamma.len() + delta.len() + 2);
    assemble_into(gamma, delta, e, &mut out);
    Ok(SparsePoly::from_sorted_unique(out))
}

/// Exponents of [`assemble_multiple`] for `e != 0`, written to `out`.
pub(crate) fn assemble_into(gamma: &[u64], delta: &[u64], e: i64, out: &mut Vec<u64>) {
    let (sg, sd) = if e > 0 { (0, e as u64) } else { (e.unsigned_abs(), 0) };
    out.clear();
    xor_sorted_into(
        std::iter::once(sg).chain(gamma.iter().map(|g| g + sg)),
        std::iter::once(sd).chain(delta.iter().map(|d| d + sd)),
        out,
    );
}

/// Degree bound for the probe side under which every weight-w multiple keeps
/// a representation: `ceil(D / floor((w-1)/q2))`.
///
/// The gaps between consecutive terms of a multiple sum to at most D and
/// contain `floor((w-1)/q2)` disjoint runs of `q2` gaps, each of which is
/// the probe tuple of some decomposition. When `q2` divides `w - 1` this is
/// `ceil(D q2 / (w-1))`.
pub fn second_phase_bound(max_degree: u64, w: u32, q2: u32) -> u64 {
    if q2 == 0 || w < 2 {
        return max_degree;
    }
    let runs = ((w - 1) / q2).max(1) as u64;
    max_degree.div_ceil(runs)
}

/// Heuristic count `D^(w-1) / ((w-1)! 2^n)` of weight-w multiples.
pub fn estimate_count(n: u32, w: u32, max_degree: u64) -> f64 {
    if w < 1 {
        return 0.0;
    }
    let k = (w - 1) as f64;
    let ln_fact: f64 = (2..w).map(|i| (i as f64).ln()).sum();
    (k * (max_degree as f64).ln() - ln_fact - n as f64 * std::f64::consts::LN_2).exp()
}

pub(crate) fn check_budget(entries: u128, bytes_per_entry: u64, budget: u64) -> Result<u64> {
    let predicted = entries.saturating_mul(bytes_per_entry as u128);
    if predicted > budget as u128 {
        return Err(Error::MemoryBudgetExceeded {
            predicted,
            budget: budget as u128,
        });
    }
    Ok(predicted as u64)
}

pub(crate) fn thread_pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("thread pool")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_splits() {
        assert_eq!(default_split(4, Algorithm::Classical).unwrap(), (1, 2));
        assert_eq!(default_split(4, Algorithm::Logarithmic).unwrap(), (1, 1));
        assert_eq!(default_split(7, Algorithm::Logarithmic).unwrap(), (2, 3));
        assert_eq!(default_split(2, Algorithm::Classical).unwrap(), (0, 1));
        assert_eq!(default_split(2, Algorithm::Logarithmic).unwrap(), (0, 0));
        assert_eq!(default_split(1, Algorithm::Classical), Err(Error::WeightTooSmall(1)));
        assert_eq!(default_split(0, Algorithm::Logarithmic), Err(Error::WeightTooSmall(0)));
    }

    #[test]
    fn centered_shift_examples() {
        assert_eq!(centered_shift(3, 6, 7), -3);
        assert_eq!(centered_shift(4, 4, 7), 0);
        assert_eq!(centered_shift(6, 1, 7), -2);
        assert_eq!(centered_shift(1, 6, 7), 2);
        let m = (1u64 << 63) - 1;
        assert_eq!(centered_shift(0, m - 1, m), 1);
        assert_eq!(centered_shift(m - 1, 0, m), -1);
    }

    #[test]
    fn assemble_examples() {
        assert_eq!(
            assemble_multiple(&[1], &[2], -3).unwrap().exponents(),
            &[0, 2, 3, 4]
        );
        assert_eq!(
            assemble_multiple(&[3], &[1], -2).unwrap().exponents(),
            &[0, 1, 2, 5]
        );
        assert_eq!(assemble_multiple(&[1], &[1], 0), Err(Error::ZeroShift));
        // e + d = g cancels
        assert_eq!(assemble_multiple(&[5], &[3], 2).unwrap().exponents(), &[0, 2]);
        assert_eq!(assemble_multiple(&[], &[], 7).unwrap().exponents(), &[0, 7]);
    }

    #[test]
    fn second_phase_bound_examples() {
        assert_eq!(second_phase_bound(100, 4, 1), 34);
        assert_eq!(second_phase_bound(1 << 15, 7, 3), 1 << 14);
        assert_eq!(second_phase_bound(1 << 15, 5, 2), 1 << 14);
        // q2 = 2 does not divide w - 1 = 5: only two disjoint runs fit
        assert_eq!(second_phase_bound(23, 6, 2), 12);
    }

    #[test]
    fn six_term_gap_pattern_needs_the_floor() {
        // Terms 0,1,11,12,22,23: every decomposition into 1+A and x^e(1+B)
        // with |A| = |B| = 2 gives B degree >= 11 > ceil(2*23/5) = 10.
        let terms = [0u64, 1, 11, 12, 22, 23];
        let mut best = u64::MAX;
        for e_idx in 1..6 {
            // mul1: e = t, B + e = two terms above e
            for i in e_idx + 1..6 {
                for j in i + 1..6 {
                    best = best.min(terms[j] - terms[e_idx]);
                }
            }
        }
        // mul2: 1 + B holds 0 and two other terms
        for i in 1..6 {
            for j in i + 1..6 {
                best = best.min(terms[j]);
            }
        }
        assert_eq!(best, 11);
        assert!(best > (2 * 23u64).div_ceil(5));
        assert!(best <= second_phase_bound(23, 6, 2));
    }

    #[test]
    fn estimate_examples() {
        assert!((estimate_count(3, 3, 7) - 49.0 / 16.0).abs() < 1e-9);
        assert!((estimate_count(4, 3, 15) - 225.0 / 32.0).abs() < 1e-9);
        let v = estimate_count(53, 4, 1 << 20);
        assert!((v - 2f64.powi(60) / (6.0 * 2f64.powi(53))).abs() < 1e-6);
        assert!((v - 21.33).abs() < 0.01);
    }

    #[test]
    fn params_validation() {
        let p = SearchParams::new(Algorithm::Logarithmic, 6, 100).unwrap();
        assert_eq!((p.q1, p.q2), (2, 2));
        assert!(p.validate(Algorithm::Logarithmic).is_ok());
        assert!(p.validate(Algorithm::Classical).is_err());
        assert!(p.clone().split(1, 2).validate(Algorithm::Logarithmic).is_err());
        assert!(p.clone().split(3, 1).validate(Algorithm::Logarithmic).is_err());
        let mut zero = p;
        zero.max_degree = 0;
        assert!(zero.validate(Algorithm::Logarithmic).is_err());
    }
}
