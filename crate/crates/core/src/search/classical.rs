//! Classical trade-off: store `sum x^g` over q1-tuples, probe with
//! `1 + sum x^d` over q2-tuples, and match equal residues.

use std::time::Instant;

use rayon::prelude::*;

use super::tuples::{binom, colex_rank, colex_unrank, first_elements, walk_with_first, Monomials};
use super::{
    check_budget, thread_pool, Algorithm, Collector, SearchOutcome, SearchParams,
    SearchStats,
};
use crate::dlog::{slots_for, ElementMap, SLOT_BYTES};
use crate::error::Result;
use crate::field::{FieldContext, FieldElement};
use crate::poly::xor_sorted_into;

/// Residues sorted with their tuple ranks, indexed by the first position of
/// each distinct nonzero residue.
struct ResidueTable {
    q: usize,
    max_degree: u64,
    sorted: Vec<(u64, u64)>,
    index: ElementMap,
    zero_end: usize,
}

impl ResidueTable {
    fn build(ctx: &FieldContext, q: usize, max_degree: u64) -> Self {
        let mono = Monomials::new(ctx, max_degree);
        let mut sorted: Vec<(u64, u64)> = first_elements(q, max_degree)
            .into_par_iter()
            .flat_map_iter(|first| {
                let mut local = Vec::new();
                walk_with_first(q, first, max_degree, &mono, &mut |t, r| {
                    // walk yields 1 + sum; the stored side has no constant
                    local.push(((r ^ FieldElement::ONE).bits(), colex_rank(t) as u64));
                });
                local
            })
            .collect();
        sorted.par_sort_unstable();
        let zero_end = sorted.partition_point(|e| e.0 == 0);
        let distinct = sorted[zero_end..]
            .windows(2)
            .filter(|w| w[0].0 != w[1].0)
            .count() as u64
            + u64::from(sorted.len() > zero_end);
        let mut index = ElementMap::with_entries(distinct);
        for i in zero_end..sorted.len() {
            if i == zero_end || sorted[i].0 != sorted[i - 1].0 {
                index.insert_new(sorted[i].0, i as u64);
            }
        }
        ResidueTable {
            q,
            max_degree,
            sorted,
            index,
            zero_end,
        }
    }

    fn matches(&self, residue: FieldElement) -> &[(u64, u64)] {
        let key = residue.bits();
        if key == 0 {
            return &self.sorted[..self.zero_end];
        }
        match self.index.get(key) {
            Some(start) => {
                let start = start as usize;
                let len = self.sorted[start..].partition_point(|e| e.0 == key);
                &self.sorted[start..start + len]
            }
            None => &[],
        }
    }

    fn bytes(&self) -> u64 {
        self.sorted.len() as u64 * 16 + self.index.bytes()
    }
}

#[derive(Default)]
struct Partial {
    collector: Collector,
    probes: u64,
    raw_hits: u64,
    cancelled: u64,
}

/// Every multiple of weight exactly `w`, with constant term and degree at
/// most `D`, found by residue collisions.
pub fn tmto_find_all(ctx: &FieldContext, params: &SearchParams) -> Result<SearchOutcome> {
    params.validate(Algorithm::Classical)?;
    let d = params.max_degree;
    let (q1, q2) = (params.q1 as usize, params.q2 as usize);
    let entries = binom(d, q1 as u64);
    let per_entry = 16 + (slots_for(1 << 20) * SLOT_BYTES).div_ceil(1 << 20);
    check_budget(entries, per_entry, params.budget_bytes)?;

    let pool = thread_pool(params.threads);
    pool.install(|| {
        let t0 = Instant::now();
        let table = ResidueTable::build(ctx, q1, d);
        let phase1_time = t0.elapsed();

        let t1 = Instant::now();
        let mono = Monomials::new(ctx, d);
        let symmetric = q1 == q2;
        let part = first_elements(q2, d)
            .into_par_iter()
            .map(|first| {
                let mut part = Partial::default();
                let mut gamma = Vec::with_capacity(q1);
                let mut poly = Vec::with_capacity(params.weight as usize);
                walk_with_first(q2, first, d, &mono, &mut |t, r| {
                    part.probes += 1;
                    let rank_delta = if symmetric { colex_rank(t) as u64 } else { 0 };
                    for &(_, rank) in table.matches(r) {
                        // (A, B) and (B, A) give the same multiple
                        if symmetric && rank > rank_delta {
                            continue;
                        }
                        part.raw_hits += 1;
                        colex_unrank(rank as u128, table.q, table.max_degree, &mut gamma);
                        poly.clear();
                        xor_sorted_into(
                            std::iter::once(0).chain(gamma.iter().copied()),
                            t.iter().copied(),
                            &mut poly,
                        );
                        if poly.len() != params.weight as usize {
                            part.cancelled += 1;
                            continue;
                        }
                        part.collector.offer_parts(&poly, &gamma, t, None);
                    }
                });
                part
            })
            .reduce(Partial::default, |mut a, b| {
                a.collector = a.collector.merge(b.collector);
                a.probes += b.probes;
                a.raw_hits += b.raw_hits;
                a.cancelled += b.cancelled;
                a
            });
        let phase2_time = t1.elapsed();

        let offered = part.collector.hits;
        let distinct = part.collector.len() as u64;
        let stats = SearchStats {
            table_entries: table.sorted.len() as u64,
            table_bytes: table.bytes(),
            probes: part.probes,
            log_calls: 0,
            raw_hits: part.raw_hits,
            duplicates: offered - distinct,
            zero_shift_skips: 0,
            cancelled: part.cancelled,
            phase1_time,
            phase2_time,
            second_phase_bound: d,
        };
        Ok(SearchOutcome {
            records: part.collector.into_sorted(),
            stats,
        })
    })
}
