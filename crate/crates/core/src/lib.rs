//! Claim extraction from long-form answers and evaluation of extracted claims.
//!
//! Answers are split into sentences ([`textseg`]), pushed through Selection,
//! Disambiguation and Decomposition ([`pipeline`]) and the resulting claims are
//! judged for entailment, coverage and decontextualization ([`eval`]). All
//! model traffic goes through a caching [`gateway`], so a warm cache replays a
//! run without network access.

pub mod error;
pub mod eval;
pub mod gateway;
pub mod num;
pub mod parse;
pub mod pipeline;
pub mod postprocess;
pub mod prompts;
pub mod records;
pub mod search;
pub mod stats;
pub mod textseg;

pub use error::{Error, ParseError, Result};
pub use num::Real;

pub type ScoreCard64 = eval::coverage::ScoreCard<f64>;
pub type ScoreCard32 = eval::coverage::ScoreCard<f32>;
pub type ZTest64 = stats::ZTest<f64>;
pub type ZTest32 = stats::ZTest<f32>;
pub type HolmResult64 = stats::HolmResult<f64>;
pub type HolmResult32 = stats::HolmResult<f32>;
pub type AgreementReport64 = stats::AgreementReport<f64>;
pub type AgreementReport32 = stats::AgreementReport<f32>;
