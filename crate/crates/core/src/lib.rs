//! Low-weight multiples of binary primitive polynomials.
//!
//! Given a primitive `P` of degree `n <= 63`, the crate finds multiples of
//! `P` with few terms and bounded degree, either all of them ([`search`]) or
//! a requested number by random sampling ([`sampler`]). The logarithmic
//! solvers run on a Pohlig-Hellman engine over `F_{2^n}` ([`dlog`]).

pub mod dlog;
pub mod error;
pub mod factor;
pub mod field;
pub mod oracle;
pub mod poly;
pub mod sampler;
pub mod search;

pub use dlog::{build_engine, EngineConfig, LogEngine};
pub use error::{Error, Result};
pub use factor::{factorize, Factorization};
pub use field::{make_context, FieldContext, FieldElement};
pub use poly::{parse_poly, SparsePoly};
pub use search::{
    logtmto_find_all, tmto_find_all, Algorithm, MultipleRecord, SearchOutcome, SearchParams,
};
