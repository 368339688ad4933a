//! Sparse binary polynomials.
//!
//! A polynomial over GF(2) is stored as the strictly increasing list of the
//! exponents with a nonzero coefficient. Addition is symmetric difference of
//! the exponent sets, so building a polynomial from a list with repeats keeps
//! only the exponents that occur an odd number of times.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest exponent accepted anywhere in the crate.
pub const MAX_EXPONENT: u64 = (1 << 63) - 1;

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SparsePoly {
    exponents: Vec<u64>,
}

impl std::borrow::Borrow<[u64]> for SparsePoly {
    fn borrow(&self) -> &[u64] {
        &self.exponents
    }
}

/// Symmetric difference of two strictly increasing sequences, appended to
/// `out`.
pub(crate) fn xor_sorted_into(
    a: impl IntoIterator<Item = u64>,
    b: impl IntoIterator<Item = u64>,
    out: &mut Vec<u64>,
) {
    let mut a = a.into_iter().peekable();
    let mut b = b.into_iter().peekable();
    loop {
        match (a.peek().copied(), b.peek().copied()) {
            (Some(x), Some(y)) if x == y => {
                a.next();
                b.next();
            }
            (Some(x), Some(y)) if x < y => {
                out.push(x);
                a.next();
            }
            (Some(_), Some(y)) => {
                out.push(y);
                b.next();
            }
            (Some(x), None) => {
                out.push(x);
                a.next();
            }
            (None, Some(y)) => {
                out.push(y);
                b.next();
            }
            (None, None) => return,
        }
    }
}

impl SparsePoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self { exponents: vec![0] }
    }

    /// Builds the canonical polynomial from arbitrary exponents; repeated
    /// exponents cancel in pairs.
    pub fn from_exponents<I: IntoIterator<Item = u64>>(iter: I) -> Self {
        let mut exps: Vec<u64> = iter.into_iter().collect();
        exps.sort_unstable();
        let mut out = Vec::with_capacity(exps.len());
        let mut i = 0;
        while i < exps.len() {
            let mut j = i;
            while j < exps.len() && exps[j] == exps[i] {
                j += 1;
            }
            if (j - i) % 2 == 1 {
                out.push(exps[i]);
            }
            i = j;
        }
        Self { exponents: out }
    }

    /// Wraps an already strictly increasing exponent list.
    ///
    /// Debug builds check the ordering.
    pub fn from_sorted_unique(exponents: Vec<u64>) -> Self {
        debug_assert!(exponents.windows(2).all(|w| w[0] < w[1]));
        Self { exponents }
    }

    pub fn exponents(&self) -> &[u64] {
        &self.exponents
    }

    pub fn into_exponents(self) -> Vec<u64> {
        self.exponents
    }

    pub fn weight(&self) -> usize {
        self.exponents.len()
    }

    /// Degree of the polynomial; `None` for zero.
    pub fn degree(&self) -> Option<u64> {
        self.exponents.last().copied()
    }

    pub fn is_zero(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn has_constant_term(&self) -> bool {
        self.exponents.first() == Some(&0)
    }

    pub fn contains(&self, e: u64) -> bool {
        self.exponents.binary_search(&e).is_ok()
    }

    /// Sum over GF(2): symmetric difference of the exponent sets.
    pub fn xor(&self, other: &SparsePoly) -> SparsePoly {
        let (a, b) = (&self.exponents, &other.exponents);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        SparsePoly { exponents: out }
    }

    /// Multiplication by `x^k`.
    pub fn shifted(&self, k: u64) -> SparsePoly {
        SparsePoly {
            exponents: self.exponents.iter().map(|&e| e + k).collect(),
        }
    }

    /// Dense coefficient word with bit i holding the coefficient of x^i.
    /// Only defined when the degree is below 64.
    pub fn to_bits(&self) -> Option<u64> {
        match self.degree() {
            Some(d) if d >= 64 => None,
            _ => Some(self.exponents.iter().fold(0u64, |acc, &e| acc | (1 << e))),
        }
    }

    pub fn from_bits(bits: u64) -> SparsePoly {
        SparsePoly {
            exponents: (0..64).filter(|i| bits >> i & 1 == 1).collect(),
        }
    }
}

/// Parses either a comma-separated exponent list (`"53,47,1,0"`) or a hex
/// coefficient string with a `0x` prefix where bit i is the coefficient of x^i.
pub fn parse_poly(spec: &str) -> Result<SparsePoly> {
    let spec = spec.trim();
    if spec.is_empty() {
        return Err(Error::EmptySpec);
    }
    if let Some(hex) = spec.strip_prefix("0x").or_else(|| spec.strip_prefix("0X")) {
        if hex.is_empty() {
            return Err(Error::MalformedToken(spec.to_string()));
        }
        let mut exps = Vec::new();
        for (pos, c) in hex.chars().rev().enumerate() {
            let digit = c
                .to_digit(16)
                .ok_or_else(|| Error::MalformedToken(spec.to_string()))? as u64;
            for bit in 0..4 {
                if digit >> bit & 1 == 1 {
                    exps.push(4 * pos as u64 + bit);
                }
            }
        }
        return Ok(SparsePoly::from_exponents(exps));
    }
    let mut exps = Vec::new();
    for tok in spec.split(',') {
        let tok = tok.trim();
        let e: u64 = tok
            .parse()
            .map_err(|_| Error::MalformedToken(tok.to_string()))?;
        if e > MAX_EXPONENT {
            return Err(Error::MalformedToken(tok.to_string()));
        }
        exps.push(e);
    }
    Ok(SparsePoly::from_exponents(exps))
}

impl FromStr for SparsePoly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_poly(s)
    }
}

/// Ascending comma-separated exponents, the record line format.
impl fmt::Display for SparsePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.exponents.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}
