//! Finding some multiples without enumerating all of them.
//!
//! Randomness comes from ChaCha8 seeded with `seed_from_u64(seed)`. The
//! parallel samplers split the iteration sequence into chunks of
//! [`CHUNK`] iterations; chunk `c` draws from stream `c` of that generator.
//! Chunks are merged in order, so the record and event streams do not depend
//! on the thread count.

use std::collections::{HashMap, HashSet};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dlog::LogEngine;
use crate::error::{Error, Result};
use crate::field::{FieldContext, FieldElement};
use crate::poly::SparsePoly;
use crate::search::tuples::{binom, colex_rank, random_tuple, Monomials};
use crate::search::{
    default_split, probe, thread_pool, Algorithm, LogTable, MultipleRecord, ProbeCounts,
    Provenance,
};

/// Iterations per independently seeded chunk.
pub const CHUNK: u64 = 1024;
pub const DEFAULT_PROGRESS_STRIDE: u64 = 1024;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SampleParams {
    pub weight: u32,
    pub max_degree: u64,
    /// Stop after this many distinct multiples.
    pub count: u64,
    /// Stored tuple size; the balanced split when `None`.
    pub q1: Option<u32>,
    /// Degree bound of the stored side, `D` when `None`.
    pub precompute_degree: Option<u64>,
    pub seed: u64,
    pub max_iterations: u64,
    pub threads: usize,
    pub progress_stride: u64,
}

impl SampleParams {
    pub fn new(weight: u32, max_degree: u64, count: u64) -> Self {
        SampleParams {
            weight,
            max_degree,
            count,
            q1: None,
            precompute_degree: None,
            seed: 0,
            max_iterations: 1 << 20,
            threads: 1,
            progress_stride: DEFAULT_PROGRESS_STRIDE,
        }
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn max_iterations(mut self, n: u64) -> Self {
        self.max_iterations = n;
        self
    }

    pub fn threads(mut self, threads: usize) -> Self {
        self.threads = threads.max(1);
        self
    }

    pub fn q1(mut self, q1: u32) -> Self {
        self.q1 = Some(q1);
        self
    }

    pub fn precompute_degree(mut self, k: u64) -> Self {
        self.precompute_degree = Some(k);
        self
    }

    pub fn progress_stride(mut self, stride: u64) -> Self {
        self.progress_stride = stride;
        self
    }

    fn validate(&self, min_weight: u32) -> Result<()> {
        if self.weight < min_weight {
            return Err(Error::WeightTooSmall(self.weight));
        }
        if self.count == 0 {
            return Err(Error::InvalidParams("count must be at least 1".into()));
        }
        if self.max_degree == 0 || self.max_degree > crate::poly::MAX_EXPONENT / 2 {
            return Err(Error::InvalidParams(format!(
                "degree bound {} out of range",
                self.max_degree
            )));
        }
        if self.progress_stride == 0 {
            return Err(Error::InvalidParams("progress stride must be positive".into()));
        }
        Ok(())
    }

    fn stored_degree(&self) -> Result<u64> {
        let k = self.precompute_degree.unwrap_or(self.max_degree);
        if k == 0 || k > self.max_degree {
            return Err(Error::InvalidParams(format!(
                "precompute degree {k} must lie in 1..={}",
                self.max_degree
            )));
        }
        Ok(k)
    }

    /// `(q1, q2)` with `q1 + q2 + c = w`.
    fn split(&self, algorithm: Algorithm) -> Result<(usize, usize)> {
        let c = match algorithm {
            Algorithm::Classical => 1,
            Algorithm::Logarithmic => 2,
        };
        let q1 = match self.q1 {
            Some(q1) => q1,
            None => default_split(self.weight, algorithm)?.0,
        };
        if q1 + c > self.weight {
            return Err(Error::InvalidParams(format!(
                "q1 = {q1} leaves no probe side for weight {}",
                self.weight
            )));
        }
        Ok((q1 as usize, (self.weight - c - q1) as usize))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ProgressEvent {
    pub iteration: u64,
    pub found: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct SampleOutcome {
    /// Distinct multiples in discovery order.
    pub records: Vec<MultipleRecord>,
    pub events: Vec<ProgressEvent>,
    pub iterations: u64,
    /// Multiples produced, counting repeats.
    pub raw_hits: u64,
    pub duplicates: u64,
    /// Iteration of the first hit.
    pub first_hit: Option<u64>,
    /// Stored entries at the end of the run.
    pub table_entries: u64,
    /// The iteration budget ran out before `count` multiples were found.
    pub exhausted: bool,
}

/// Writes events in the `iteration,found` CSV format.
pub fn write_progress_csv<W: std::io::Write>(events: &[ProgressEvent], mut out: W) -> std::io::Result<()> {
    writeln!(out, "iteration,found")?;
    for e in events {
        writeln!(out, "{},{}", e.iteration, e.found)?;
    }
    Ok(())
}

/// Sequential bookkeeping shared by the samplers.
struct Run {
    stride: u64,
    next_event: u64,
    count: u64,
    seen: HashSet<SparsePoly>,
    out: SampleOutcome,
}

impl Run {
    fn new(params: &SampleParams) -> Self {
        Run {
            stride: params.progress_stride,
            next_event: params.progress_stride,
            count: params.count,
            seen: HashSet::new(),
            out: SampleOutcome::default(),
        }
    }

    fn found(&self) -> u64 {
        self.out.records.len() as u64
    }

    fn done(&self) -> bool {
        self.found() >= self.count
    }

    /// Emits the events of every stride boundary up to `iteration`.
    fn events_through(&mut self, iteration: u64) {
        while self.next_event <= iteration {
            let found = self.found();
            self.out.events.push(ProgressEvent {
                iteration: self.next_event,
                found,
            });
            self.next_event += self.stride;
        }
    }

    /// Records a hit made at `iteration` (1-based).
    fn hit(&mut self, iteration: u64, poly: SparsePoly, prov: Provenance) {
        self.events_through(iteration - 1);
        self.out.raw_hits += 1;
        self.out.first_hit.get_or_insert(iteration);
        if self.seen.insert(poly.clone()) {
            self.out.records.push(MultipleRecord::new(poly, Some(prov)));
        } else {
            self.out.duplicates += 1;
        }
    }

    fn finish(mut self, iterations: u64) -> SampleOutcome {
        self.events_through(iterations);
        if self.out.events.last().map(|e| e.iteration) != Some(iterations) {
            let found = self.found();
            self.out.events.push(ProgressEvent { iteration: iterations, found });
        }
        self.out.iterations = iterations;
        self.out.exhausted = !self.done();
        self.out
    }
}

struct Hit {
    iteration: u64,
    poly: SparsePoly,
    prov: Provenance,
}

/// Runs `step` for up to `max_iterations` iterations in seeded chunks.
fn drive<F>(params: &SampleParams, table_entries: u64, step: F) -> SampleOutcome
where
    F: Fn(&mut ChaCha8Rng, &mut Vec<(SparsePoly, Provenance)>) + Sync,
{
    let mut run = Run::new(params);
    run.out.table_entries = table_entries;
    let total = params.max_iterations;
    let chunks = total.div_ceil(CHUNK);
    let threads = params.threads.max(1) as u64;
    let pool = thread_pool(params.threads);
    let mut next_chunk = 0;
    let mut done = 0;
    'outer: while next_chunk < chunks && !run.done() {
        let wave: Vec<u64> = (next_chunk..chunks.min(next_chunk + threads)).collect();
        next_chunk += wave.len() as u64;
        let results: Vec<(u64, Vec<Hit>)> = pool.install(|| {
            wave.par_iter()
                .map(|&c| {
                    let start = c * CHUNK;
                    let len = CHUNK.min(total - start);
                    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
                    rng.set_stream(c);
                    let mut buf = Vec::new();
                    let mut hits = Vec::new();
                    for j in 0..len {
                        step(&mut rng, &mut buf);
                        hits.extend(buf.drain(..).map(|(poly, prov)| Hit {
                            iteration: start + j + 1,
                            poly,
                            prov,
                        }));
                    }
                    (start + len, hits)
                })
                .collect()
        });
        for (end, hits) in results {
            for h in hits {
                run.hit(h.iteration, h.poly, h.prov);
                if run.done() {
                    done = h.iteration;
                    break 'outer;
                }
            }
            done = end;
        }
    }
    run.finish(done)
}

/// Draws `A = 1 + x^t1 + ... + x^t(w-2)` and keeps `A + x^Log(A)` when the
/// log lands in `[1, D]` off the terms of A.
pub fn random_log_sample(engine: &LogEngine, params: &SampleParams) -> Result<SampleOutcome> {
    params.validate(3)?;
    let ctx = engine.ctx();
    let d = params.max_degree;
    let q = (params.weight - 2) as usize;
    if binom(d, q as u64) == 0 {
        return Err(Error::InvalidParams(format!("no {q}-tuples below degree {d}")));
    }
    let mono = Monomials::new(ctx, d);
    Ok(drive(params, 0, |rng, out| {
        let mut t = Vec::with_capacity(q);
        random_tuple(rng, q, d, &mut t);
        let a = FieldElement::ONE ^ mono.sum(&t);
        if a.is_zero() {
            return;
        }
        let l = engine.discrete_log(a).expect("nonzero");
        if l == 0 || l > d || t.binary_search(&l).is_ok() {
            return;
        }
        let poly = SparsePoly::from_exponents(std::iter::once(0).chain(t.iter().copied()).chain([l]));
        out.push((
            poly,
            Provenance {
                gamma: t,
                delta: Vec::new(),
                shift: Some(l as i64),
            },
        ));
    }))
}

/// Stores logs of every `1 + q1-tuple` up to degree K, then matches random
/// q2-tuples up to degree D against the table.
pub fn birthday_logtmto(engine: &LogEngine, params: &SampleParams) -> Result<SampleOutcome> {
    params.validate(2)?;
    let k = params.stored_degree()?;
    let (q1, q2) = params.split(Algorithm::Logarithmic)?;
    let d = params.max_degree;
    if binom(d, q2 as u64) == 0 {
        return Err(Error::InvalidParams(format!("no {q2}-tuples below degree {d}")));
    }
    let table = thread_pool(params.threads).install(|| LogTable::build(engine, q1, k))?;
    let mono = Monomials::new(engine.ctx(), d);
    let entries = (table.len() + table.zero_ranks().len()) as u64;
    Ok(drive(params, entries, |rng, out| {
        let mut delta = Vec::with_capacity(q2);
        random_tuple(rng, q2, d, &mut delta);
        let r = FieldElement::ONE ^ mono.sum(&delta);
        let ld = (!r.is_zero()).then(|| engine.discrete_log(r).expect("nonzero"));
        let mut counts = ProbeCounts::default();
        probe(&table, &delta, ld, d, params.weight, false, &mut counts, &mut |g, e, poly| {
            out.push((
                SparsePoly::from_sorted_unique(poly.to_vec()),
                Provenance {
                    gamma: g.to_vec(),
                    delta: delta.clone(),
                    shift: Some(e),
                },
            ))
        });
    }))
}

/// Incremental classical trade-off: each iteration draws one stored tuple
/// and one probe tuple, checks each against the other side's entries, then
/// inserts both. Sequential; the thread count is ignored.
pub fn birthday_tmto(ctx: &FieldContext, params: &SampleParams) -> Result<SampleOutcome> {
    params.validate(2)?;
    let (q1, q2) = params.split(Algorithm::Classical)?;
    let d = params.max_degree;
    if binom(d, q2 as u64) == 0 || binom(d, q1 as u64) == 0 {
        return Err(Error::InvalidParams(format!("no tuples below degree {d}")));
    }
    let mono = Monomials::new(ctx, d);
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut run = Run::new(params);
    // residue -> tuples; the stored side keys on sum x^g, the probe side on 1 + sum x^d
    let mut stored: HashMap<u64, Vec<Vec<u64>>> = HashMap::new();
    let mut probes: HashMap<u64, Vec<Vec<u64>>> = HashMap::new();
    let mut seen_stored = HashSet::new();
    let mut seen_probe = HashSet::new();
    let mut inserts = 0u64;
    let mut iteration = 0;
    let mut t = Vec::new();
    let emit = |run: &mut Run, iteration: u64, g: &[u64], dl: &[u64]| {
        let poly = SparsePoly::from_exponents(
            std::iter::once(0).chain(g.iter().copied()).chain(dl.iter().copied()),
        );
        if poly.weight() == params.weight as usize {
            run.hit(
                iteration,
                poly,
                Provenance {
                    gamma: g.to_vec(),
                    delta: dl.to_vec(),
                    shift: None,
                },
            );
        }
    };
    while iteration < params.max_iterations && !run.done() {
        iteration += 1;
        random_tuple(&mut rng, q1, d, &mut t);
        if seen_stored.insert(colex_rank(&t)) {
            let key = mono.sum(&t).bits();
            if let Some(list) = probes.get(&key) {
                for dl in list {
                    emit(&mut run, iteration, &t, dl);
                }
            }
            stored.entry(key).or_default().push(t.clone());
            inserts += 1;
        }
        random_tuple(&mut rng, q2, d, &mut t);
        if seen_probe.insert(colex_rank(&t)) {
            let key = (FieldElement::ONE ^ mono.sum(&t)).bits();
            if let Some(list) = stored.get(&key) {
                for g in list {
                    emit(&mut run, iteration, g, &t);
                }
            }
            probes.entry(key).or_default().push(t.clone());
            inserts += 1;
        }
    }
    run.out.table_entries = inserts;
    Ok(run.finish(iteration))
}

/// Advice for Wagner's generalized birthday method, when its cost
/// `2^a * 2^(n/(a+1))` with `2^a <= w - 1` lists beats the square-root
/// birthday cost `sqrt(2^n / D)`. The method itself is not implemented.
pub fn wagner_advice(n: u32, w: u32, max_degree: u64) -> Option<String> {
    if w < 5 {
        return None;
    }
    let a = (w - 1).ilog2();
    let wagner = a as f64 + n as f64 / (a as f64 + 1.0);
    let birthday = (n as f64 - (max_degree.max(1) as f64).log2()) / 2.0;
    (wagner < birthday).then(|| {
        format!(
            "Wagner's generalized birthday method with 2^{a} lists costs about O(2^a * 2^(n/(a+1))) = 2^{wagner:.1}, below the birthday bound 2^{birthday:.1}; it is not implemented here"
        )
    })
}
