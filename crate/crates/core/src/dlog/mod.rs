//! Discrete logarithms to base x in `F_{2^n}^*`.
//!
//! The group order `M = 2^n - 1` is split into prime powers. For each prime
//! power `p^e` the element is projected into the subgroup of order `p^e`,
//! its base-p digits are peeled off one at a time in the subgroup of order
//! p, and the partial logs are recombined with the CRT.
//!
//! Within an order-p subgroup the log is found with a baby-step giant-step
//! search whose baby table holds `m` powers of the subgroup generator. A full
//! table is the special case `m = p`, answered with a single lookup.
//! Primes up to the tabulation threshold get a full table, larger ones keep
//! `m = ceil(sqrt(p))` unless the configuration asks for a bigger baby table.

mod cache;
mod table;
mod zech;

pub use cache::{dump_engine, load_engine, read_engine, write_engine, CACHE_MAGIC, CACHE_VERSION};
pub use table::{slots_for, ElementMap, SLOT_BYTES};
pub use zech::{zech_orbit, zech_table};

use crate::error::{Error, Result};
use crate::factor::{mul_mod, Factorization};
use crate::field::{FieldContext, FieldElement};

/// Total full-table entries the default threshold may spend.
pub const DEFAULT_TABLE_ENTRIES: u64 = 1 << 26;
/// Default cap on predicted engine memory.
pub const DEFAULT_MEMORY_CAP: u64 = 1 << 31;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EngineConfig {
    /// Primes up to this bound get a full subgroup table. `None` picks the
    /// largest bound whose tables fit [`DEFAULT_TABLE_ENTRIES`].
    pub tabulation_threshold: Option<u64>,
    /// Minimum baby-table size for primes above the threshold.
    pub baby_steps: Option<u64>,
    pub memory_cap: u64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            tabulation_threshold: None,
            baby_steps: None,
            memory_cap: DEFAULT_MEMORY_CAP,
        }
    }
}

impl EngineConfig {
    pub fn with_threshold(threshold: u64) -> Self {
        EngineConfig {
            tabulation_threshold: Some(threshold),
            ..Self::default()
        }
    }

    /// Everything tabulated.
    pub fn full() -> Self {
        Self::with_threshold(u64::MAX)
    }

    fn resolved_threshold(&self, factorization: &Factorization) -> u64 {
        self.tabulation_threshold
            .unwrap_or_else(|| default_threshold(factorization))
    }

    fn baby_size(&self, p: u64, threshold: u64) -> u64 {
        if p <= threshold {
            return p;
        }
        let root = isqrt_ceil(p);
        self.baby_steps.map_or(root, |m| m.clamp(root, p))
    }
}

/// Largest prime bound such that the full tables of all primes up to it hold
/// at most [`DEFAULT_TABLE_ENTRIES`] entries (smallest primes first).
pub fn default_threshold(factorization: &Factorization) -> u64 {
    let mut total = 0u64;
    let mut threshold = 1;
    for p in factorization.primes() {
        total = total.saturating_add(p);
        if total > DEFAULT_TABLE_ENTRIES {
            break;
        }
        threshold = p;
    }
    threshold
}

fn isqrt_ceil(p: u64) -> u64 {
    let mut r = (p as f64).sqrt() as u64;
    while r * r > p {
        r -= 1;
    }
    while r * r < p {
        r += 1;
    }
    r
}

/// Bytes held by the subgroup tables an engine with `config` would allocate.
pub fn predict_memory(factorization: &Factorization, config: &EngineConfig) -> u128 {
    let threshold = config.resolved_threshold(factorization);
    factorization
        .primes()
        .map(|p| slots_for(config.baby_size(p, threshold)) as u128 * SLOT_BYTES as u128)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    FullTable,
    BabyStepGiantStep { baby_steps: u64 },
}

/// Log solver for the order-p subgroup generated by `x^(M/p)`.
#[derive(Debug, Clone)]
pub(crate) struct SubgroupSolver {
    prime: u64,
    baby: ElementMap,
    stride: u64,
    /// g^(-stride)
    giant: FieldElement,
    giant_steps: u64,
}

impl SubgroupSolver {
    fn build(ctx: &FieldContext, prime: u64, stride: u64) -> Self {
        let g = ctx.monomial(ctx.order() / prime);
        let mut baby = ElementMap::with_entries(stride);
        let mut cur = FieldElement::ONE;
        for j in 0..stride {
            baby.insert_new(cur.bits(), j);
            cur = ctx.mul(cur, g);
        }
        Self::with_table(ctx, prime, baby, stride)
    }

    fn with_table(ctx: &FieldContext, prime: u64, baby: ElementMap, stride: u64) -> Self {
        let g = ctx.monomial(ctx.order() / prime);
        SubgroupSolver {
            prime,
            baby,
            stride,
            giant: ctx.pow(g, (prime - stride % prime) % prime),
            giant_steps: prime.div_ceil(stride),
        }
    }

    #[inline]
    fn log(&self, ctx: &FieldContext, t: FieldElement) -> u64 {
        let mut cur = t;
        for i in 0..self.giant_steps {
            if let Some(j) = self.baby.get(cur.bits()) {
                return (i * self.stride + j) % self.prime;
            }
            cur = ctx.mul(cur, self.giant);
        }
        panic!("element {t} is not in the subgroup of order {}", self.prime);
    }

    pub(crate) fn strategy(&self) -> Strategy {
        if self.stride == self.prime {
            Strategy::FullTable
        } else {
            Strategy::BabyStepGiantStep {
                baby_steps: self.stride,
            }
        }
    }
}

#[derive(Debug, Clone)]
struct PrimePowerPart {
    prime: u64,
    exponent: u32,
    /// p^e
    modulus: u64,
    /// M / p^e
    cofactor: u64,
    /// x^(-cofactor), the inverse of the order-p^e generator
    gen_inv: FieldElement,
    /// Multiplier taking a residue mod p^e to its CRT lift mod M.
    crt: u64,
    solver: SubgroupSolver,
}

/// Pohlig-Hellman discrete-log engine. Immutable once built.
#[derive(Debug, Clone)]
pub struct LogEngine {
    ctx: FieldContext,
    threshold: u64,
    parts: Vec<PrimePowerPart>,
}

fn inverse_mod(a: u64, m: u64) -> u64 {
    let (mut old_r, mut r) = (a as i128, m as i128);
    let (mut old_s, mut s) = (1i128, 0i128);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    debug_assert_eq!(old_r, 1);
    old_s.rem_euclid(m as i128) as u64
}

impl LogEngine {
    pub fn build(ctx: &FieldContext, config: &EngineConfig) -> Result<Self> {
        let predicted = predict_memory(ctx.factorization(), config);
        if predicted > config.memory_cap as u128 {
            return Err(Error::MemoryBudgetExceeded {
                predicted,
                budget: config.memory_cap as u128,
            });
        }
        let threshold = config.resolved_threshold(ctx.factorization());
        let solvers = ctx
            .factorization()
            .primes()
            .map(|p| SubgroupSolver::build(ctx, p, config.baby_size(p, threshold)))
            .collect();
        Ok(Self::assemble(ctx.clone(), threshold, solvers))
    }

    fn assemble(ctx: FieldContext, threshold: u64, solvers: Vec<SubgroupSolver>) -> Self {
        let m = ctx.order();
        let parts = ctx
            .factorization()
            .factors()
            .iter()
            .zip(solvers)
            .map(|(&(prime, exponent), solver)| {
                let modulus = prime.pow(exponent);
                let cofactor = m / modulus;
                let crt = mul_mod(cofactor % m, inverse_mod(cofactor % modulus, modulus), m);
                PrimePowerPart {
                    prime,
                    exponent,
                    modulus,
                    cofactor,
                    gen_inv: ctx.monomial(m - cofactor),
                    crt,
                    solver,
                }
            })
            .collect();
        LogEngine {
            ctx,
            threshold,
            parts,
        }
    }

    pub fn ctx(&self) -> &FieldContext {
        &self.ctx
    }

    pub fn threshold(&self) -> u64 {
        self.threshold
    }

    /// Strategy chosen for each prime factor, in increasing prime order.
    pub fn strategies(&self) -> Vec<(u64, Strategy)> {
        self.parts
            .iter()
            .map(|p| (p.prime, p.solver.strategy()))
            .collect()
    }

    /// Bytes held by the subgroup tables.
    pub fn table_bytes(&self) -> u64 {
        self.parts.iter().map(|p| p.solver.baby.bytes()).sum()
    }

    pub(crate) fn solvers(&self) -> impl Iterator<Item = &SubgroupSolver> {
        self.parts.iter().map(|p| &p.solver)
    }

    /// The k with `x^k = a`, in `[0, M-1]`.
    pub fn discrete_log(&self, a: FieldElement) -> Result<u64> {
        if a.is_zero() {
            return Err(Error::LogOfZero);
        }
        let ctx = &self.ctx;
        let m = ctx.order();
        let mut acc = 0u64;
        for part in &self.parts {
            let h = ctx.pow(a, part.cofactor);
            let residue = if part.exponent == 1 {
                part.solver.log(ctx, h)
            } else {
                let mut known = 0u64;
                let mut place = 1u64;
                for level in 0..part.exponent {
                    let stripped = ctx.mul(h, ctx.pow(part.gen_inv, known));
                    let t = ctx.pow(stripped, part.prime.pow(part.exponent - 1 - level));
                    known += part.solver.log(ctx, t) * place;
                    place *= part.prime;
                }
                known
            };
            debug_assert!(residue < part.modulus);
            acc = (acc + mul_mod(residue, part.crt, m)) % m;
        }
        Ok(acc)
    }

    /// Zech logarithm `Z(i) = Log(1 + x^i)`.
    pub fn zech_log(&self, i: u64) -> Result<u64> {
        if i.is_multiple_of(self.ctx.order()) {
            return Err(Error::ZechUndefined(i));
        }
        self.discrete_log(FieldElement::ONE ^ self.ctx.monomial(i))
    }
}

/// Free-function spelling of [`LogEngine::build`] with an explicit threshold.
pub fn build_engine(ctx: &FieldContext, tabulation_threshold: u64) -> Result<LogEngine> {
    if tabulation_threshold == 0 {
        return Err(Error::InvalidParams("tabulation threshold must be >= 1".into()));
    }
    LogEngine::build(ctx, &EngineConfig::with_threshold(tabulation_threshold))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::factor::factorize;
    use crate::poly::SparsePoly;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn ctx(exps: &[u64]) -> FieldContext {
        FieldContext::new(SparsePoly::from_exponents(exps.iter().copied())).unwrap()
    }

    fn bits(c: &FieldContext, exps: &[u64]) -> FieldElement {
        c.residue(&SparsePoly::from_exponents(exps.iter().copied()))
    }

    #[test]
    fn strategies_follow_threshold() {
        let e = build_engine(&ctx(&[0, 1, 3]), 1_000_000).unwrap();
        assert_eq!(e.strategies(), vec![(7, Strategy::FullTable)]);
        let e = build_engine(&ctx(&[0, 1, 4]), 4).unwrap();
        assert_eq!(
            e.strategies(),
            vec![
                (3, Strategy::FullTable),
                (5, Strategy::BabyStepGiantStep { baby_steps: 3 })
            ]
        );
        assert!(build_engine(&ctx(&[0, 1, 4]), 0).is_err());
    }

    #[test]
    fn log_examples() {
        let f8 = build_engine(&ctx(&[0, 1, 3]), 100).unwrap();
        assert_eq!(f8.discrete_log(FieldElement::ONE).unwrap(), 0);
        assert_eq!(f8.discrete_log(bits(f8.ctx(), &[0, 1])).unwrap(), 3);
        assert_eq!(f8.discrete_log(FieldElement::ZERO), Err(Error::LogOfZero));
        let f16 = build_engine(&ctx(&[0, 1, 4]), 100).unwrap();
        assert_eq!(f16.discrete_log(bits(f16.ctx(), &[0, 3])).unwrap(), 14);
    }

    #[test]
    fn zech_examples() {
        let f8 = build_engine(&ctx(&[0, 1, 3]), 100).unwrap();
        assert_eq!(f8.zech_log(1).unwrap(), 3);
        assert_eq!(f8.zech_log(2).unwrap(), 6);
        assert_eq!(f8.zech_log(7), Err(Error::ZechUndefined(7)));
        assert_eq!(f8.zech_log(0), Err(Error::ZechUndefined(0)));
    }

    #[test]
    fn degree_53_memory_prediction() {
        let f = factorize((1 << 53) - 1);
        let bytes = predict_memory(&f, &EngineConfig::full());
        let mb = bytes as f64 / 1e6;
        assert!((mb / 439.0 - 1.0).abs() <= 0.2, "{mb} MB");
        // the default budget tabulates every prime of 2^53 - 1
        assert_eq!(default_threshold(&f), 20394401);
    }

    #[test]
    fn budget_is_enforced() {
        let c = ctx(&[0, 1, 4]);
        let config = EngineConfig {
            memory_cap: 10,
            ..EngineConfig::full()
        };
        assert!(matches!(
            LogEngine::build(&c, &config),
            Err(Error::MemoryBudgetExceeded { .. })
        ));
    }

    #[test]
    fn prime_power_lifting() {
        // 2^6 - 1 = 3^2 * 7 and 2^12 - 1 = 3^2 * 5 * 7 * 13
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in [6u32, 12, 20, 21] {
            let c = FieldContext::random_primitive(n, &mut rng).unwrap();
            assert!(!c.factorization().is_squarefree());
            for threshold in [1, u64::MAX] {
                let e = build_engine(&c, threshold).unwrap();
                for k in 0..c.order().min(5000) {
                    assert_eq!(e.discrete_log(c.monomial(k)).unwrap(), k, "n={n}");
                }
            }
        }
    }

    #[test]
    fn large_field_round_trip_with_bsgs() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        // 2^47 - 1 = 2351 * 4513 * 13264529
        let c = FieldContext::random_primitive(47, &mut rng).unwrap();
        let e = build_engine(&c, 1).unwrap();
        assert!(e
            .strategies()
            .iter()
            .all(|(_, s)| matches!(s, Strategy::BabyStepGiantStep { .. })));
        for _ in 0..200 {
            let k = rng.random_range(0..c.order());
            assert_eq!(e.discrete_log(c.monomial(k)).unwrap(), k);
        }
    }

    #[test]
    fn baby_size_is_clamped() {
        let config = EngineConfig {
            tabulation_threshold: Some(1),
            baby_steps: Some(3),
            memory_cap: DEFAULT_MEMORY_CAP,
        };
        assert_eq!(config.baby_size(101, 1), 11);
        let config = EngineConfig {
            baby_steps: Some(1000),
            ..config
        };
        assert_eq!(config.baby_size(101, 1), 101);
        assert_eq!(isqrt_ceil(1 << 40), 1 << 20);
        assert_eq!(isqrt_ceil((1 << 40) + 1), (1 << 20) + 1);
    }
}
