//! Binary engine cache.
//!
//! Little-endian layout:
//!
//! ```text
//! magic      8 bytes  "LWDLOG\0\0"
//! version    u32
//! n          u32
//! terms      u32, then that many u64 exponents of P
//! threshold  u64
//! parts      u32, then per prime factor:
//!              prime u64, stride u64, slots u64, slots * (key u64, value u64)
//! checksum   32 bytes, SHA-256 of everything above
//! ```
//!
//! Derived values (giant steps, CRT multipliers) are recomputed on load.

use std::path::Path;

use sha2::{Digest, Sha256};

use super::{slots_for, ElementMap, LogEngine, SubgroupSolver};
use crate::error::{Error, Result};
use crate::field::FieldContext;
use crate::poly::SparsePoly;

pub const CACHE_MAGIC: [u8; 8] = *b"LWDLOG\0\0";
pub const CACHE_VERSION: u32 = 1;

pub fn dump_engine(engine: &LogEngine) -> Vec<u8> {
    let mut out = Vec::with_capacity(engine.table_bytes() as usize + 256);
    out.extend_from_slice(&CACHE_MAGIC);
    out.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    out.extend_from_slice(&engine.ctx().n().to_le_bytes());
    let exps = engine.ctx().poly().exponents();
    out.extend_from_slice(&(exps.len() as u32).to_le_bytes());
    for e in exps {
        out.extend_from_slice(&e.to_le_bytes());
    }
    out.extend_from_slice(&engine.threshold().to_le_bytes());
    let solvers: Vec<&SubgroupSolver> = engine.solvers().collect();
    out.extend_from_slice(&(solvers.len() as u32).to_le_bytes());
    for s in solvers {
        out.extend_from_slice(&s.prime.to_le_bytes());
        out.extend_from_slice(&s.stride.to_le_bytes());
        let slots = s.baby.slots();
        out.extend_from_slice(&(slots.len() as u64).to_le_bytes());
        for [k, v] in slots {
            out.extend_from_slice(&k.to_le_bytes());
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    let digest = Sha256::digest(&out);
    out.extend_from_slice(&digest);
    out
}

struct Reader<'a> {
    buf: &'a [u8],
}

impl Reader<'_> {
    fn take(&mut self, k: usize) -> Result<&[u8]> {
        if self.buf.len() < k {
            return Err(Error::Cache("truncated".into()));
        }
        let (head, tail) = self.buf.split_at(k);
        self.buf = tail;
        Ok(head)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn load_engine(bytes: &[u8]) -> Result<LogEngine> {
    if bytes.len() < CACHE_MAGIC.len() + 32 {
        return Err(Error::Cache("truncated".into()));
    }
    let (body, digest) = bytes.split_at(bytes.len() - 32);
    if Sha256::digest(body).as_slice() != digest {
        return Err(Error::Cache("checksum mismatch".into()));
    }
    let mut r = Reader { buf: body };
    if r.take(8)? != CACHE_MAGIC {
        return Err(Error::Cache("bad magic".into()));
    }
    let version = r.u32()?;
    if version != CACHE_VERSION {
        return Err(Error::Cache(format!("unsupported version {version}")));
    }
    let n = r.u32()?;
    let terms = r.u32()?;
    let mut exps = Vec::with_capacity(terms as usize);
    for _ in 0..terms {
        exps.push(r.u64()?);
    }
    let ctx = FieldContext::new(SparsePoly::from_exponents(exps))?;
    if ctx.n() != n {
        return Err(Error::Cache("degree does not match polynomial".into()));
    }
    let threshold = r.u64()?;
    let parts = r.u32()? as usize;
    let primes: Vec<u64> = ctx.factorization().primes().collect();
    if parts != primes.len() {
        return Err(Error::Cache("factor count mismatch".into()));
    }
    let mut solvers = Vec::with_capacity(parts);
    for &expected in &primes {
        let prime = r.u64()?;
        let stride = r.u64()?;
        let count = r.u64()?;
        if prime != expected || stride == 0 || stride > prime || count != slots_for(stride) {
            return Err(Error::Cache(format!("inconsistent table for prime {prime}")));
        }
        let mut slots = Vec::with_capacity(count as usize);
        for _ in 0..count {
            slots.push([r.u64()?, r.u64()?]);
        }
        let baby = ElementMap::from_slots(slots)
            .filter(|m| m.len() == stride)
            .ok_or_else(|| Error::Cache(format!("corrupt table for prime {prime}")))?;
        solvers.push(SubgroupSolver::with_table(&ctx, prime, baby, stride));
    }
    if !r.buf.is_empty() {
        return Err(Error::Cache("trailing bytes".into()));
    }
    Ok(LogEngine::assemble(ctx, threshold, solvers))
}

pub fn write_engine(engine: &LogEngine, path: &Path) -> Result<()> {
    std::fs::write(path, dump_engine(engine)).map_err(|e| Error::Cache(e.to_string()))
}

pub fn read_engine(path: &Path) -> Result<LogEngine> {
    let bytes = std::fs::read(path).map_err(|e| Error::Cache(e.to_string()))?;
    load_engine(&bytes)
}
