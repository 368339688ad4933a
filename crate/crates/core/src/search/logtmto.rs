//! Logarithmic trade-off: weight-w multiples `(1 + A) + x^e (1 + B)`.

use std::time::Instant;

use rayon::prelude::*;

use super::logtable::{LogTable, ENTRY_BYTES};
use super::tuples::{binom, colex_rank, first_elements, walk_with_first, Monomials};
use super::{
    assemble_into, check_budget, second_phase_bound, thread_pool, Algorithm, Collector,
    SearchOutcome, SearchParams, SearchStats,
};
use crate::dlog::LogEngine;
use crate::error::Result;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub(crate) struct ProbeCounts {
    pub raw_hits: u64,
    pub zero_shift: u64,
    pub cancelled: u64,
}

impl ProbeCounts {
    fn add(&mut self, o: ProbeCounts) {
        self.raw_hits += o.raw_hits;
        self.zero_shift += o.zero_shift;
        self.cancelled += o.cancelled;
    }
}

/// Matches one probe tuple `delta` against the stored table.
///
/// `l_delta` is `Log(1 + sum x^d)`, or `None` when that polynomial vanishes
/// mod P; then it pairs with the vanishing stored tuples at every shift.
/// Shifts satisfy `max(gamma) - D <= e <= D - max(delta)`, and `e > 0` when
/// `positive_only` is set. Shift 0 and matches that lose terms to
/// cancellation are counted, not emitted. `emit` receives gamma, the shift
/// and the exponents of the multiple.
#[allow(clippy::too_many_arguments)]
pub(crate) fn probe<F>(
    table: &LogTable,
    delta: &[u64],
    l_delta: Option<u64>,
    max_degree: u64,
    weight: u32,
    positive_only: bool,
    counts: &mut ProbeCounts,
    emit: &mut F,
) where
    F: FnMut(&[u64], i64, &[u64]),
{
    let q1 = table.tuple_size();
    let dmax = delta.last().copied().unwrap_or(0);
    if dmax > max_degree {
        return;
    }
    let hi = (max_degree - dmax) as i64;
    let lo = if positive_only {
        1
    } else {
        q1 as i64 - max_degree as i64
    };
    let mut gamma = Vec::with_capacity(q1);
    let mut poly = Vec::with_capacity(weight as usize + 2);
    let mut handle = |rank: u64, e: i64| {
        // colex order: max(gamma) <= D + e  iff  rank < C(D + e, q1)
        if e < 0 && q1 > 0 && rank as u128 >= binom((max_degree as i64 + e) as u64, q1 as u64) {
            return;
        }
        if e == 0 {
            counts.zero_shift += 1;
            return;
        }
        counts.raw_hits += 1;
        table.unrank(rank, &mut gamma);
        assemble_into(&gamma, delta, e, &mut poly);
        if poly.len() != weight as usize {
            counts.cancelled += 1;
            return;
        }
        emit(&gamma, e, &poly);
    };
    match l_delta {
        Some(ld) => {
            let raw = table.raw();
            table.scan(ld, lo, hi, |idx, e| handle(raw[idx].1, e));
        }
        None => {
            for &rank in table.zero_ranks() {
                for e in lo..=hi {
                    handle(rank, e);
                }
            }
        }
    }
}

#[derive(Default)]
struct Partial {
    collector: Collector,
    counts: ProbeCounts,
    probes: u64,
    log_calls: u64,
}

impl Partial {
    fn merge(mut self, o: Partial) -> Partial {
        self.collector = self.collector.merge(o.collector);
        self.counts.add(o.counts);
        self.probes += o.probes;
        self.log_calls += o.log_calls;
        self
    }
}

/// Every multiple of weight exactly `w`, with constant term and degree at
/// most `D`, found through logarithms.
pub fn logtmto_find_all(engine: &LogEngine, params: &SearchParams) -> Result<SearchOutcome> {
    params.validate(Algorithm::Logarithmic)?;
    let ctx = engine.ctx();
    let d = params.max_degree;
    let (q1, q2) = (params.q1 as usize, params.q2 as usize);
    let entries = binom(d, q1 as u64);
    let reuse = q1 == q2;
    let per_entry = ENTRY_BYTES + if reuse { 8 } else { 0 };
    check_budget(entries, per_entry, params.budget_bytes)?;

    let pool = thread_pool(params.threads);
    pool.install(|| {
        let t0 = Instant::now();
        let table = LogTable::build(engine, q1, d)?;
        // probe logs come for free when both sides enumerate the same tuples
        let by_rank: Option<Vec<u64>> = reuse.then(|| {
            let mut v = vec![u64::MAX; entries as usize];
            for &(log, rank) in table.raw() {
                v[rank as usize] = log;
            }
            v
        });
        let phase1_time = t0.elapsed();

        let t1 = Instant::now();
        let d2 = if params.restrict_second_phase {
            second_phase_bound(d, params.weight, params.q2).min(d)
        } else {
            d
        };
        // with identical sides, (A, B, -e) repeats (B, A, e)
        let positive_only = reuse && d2 == d;
        let mono = Monomials::new(ctx, d2);
        let part = first_elements(q2, d2)
            .into_par_iter()
            .map(|first| {
                let mut part = Partial::default();
                walk_with_first(q2, first, d2, &mono, &mut |t, r| {
                    part.probes += 1;
                    let ld = if r.is_zero() {
                        None
                    } else if let Some(v) = &by_rank {
                        Some(v[colex_rank(t) as usize])
                    } else {
                        part.log_calls += 1;
                        Some(engine.discrete_log(r).expect("nonzero"))
                    };
                    let collector = &mut part.collector;
                    probe(
                        &table,
                        t,
                        ld,
                        d,
                        params.weight,
                        positive_only,
                        &mut part.counts,
                        &mut |g, e, poly| collector.offer_parts(poly, g, t, Some(e)),
                    );
                });
                part
            })
            .reduce(Partial::default, Partial::merge);
        let phase2_time = t1.elapsed();

        let offered = part.collector.hits;
        let distinct = part.collector.len() as u64;
        let stats = SearchStats {
            table_entries: (table.len() + table.zero_ranks().len()) as u64,
            table_bytes: table.bytes() + by_rank.as_ref().map_or(0, |v| v.len() as u64 * 8),
            probes: part.probes,
            log_calls: table.log_calls() + part.log_calls,
            raw_hits: part.counts.raw_hits,
            duplicates: offered - distinct,
            zero_shift_skips: part.counts.zero_shift,
            cancelled: part.counts.cancelled,
            phase1_time,
            phase2_time,
            second_phase_bound: d2,
        };
        Ok(SearchOutcome {
            records: part.collector.into_sorted(),
            stats,
        })
    })
}
