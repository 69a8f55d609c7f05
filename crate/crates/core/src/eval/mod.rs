//! Evaluation of extracted claims: entailment, coverage and decontextualization.

pub mod coverage;
pub mod decontext;
pub mod entailment;
pub mod retrieval;

use crate::error::{ParseError, Result};
use crate::gateway::{Attempted, Gateway, PromptRequest};
use crate::prompts::PromptKind;

/// A single-completion LLM judge with parse retries.
#[derive(Clone, Copy)]
pub struct Judge<'a> {
    pub gateway: &'a Gateway,
    pub model_id: &'a str,
    pub max_retries: usize,
}

impl<'a> Judge<'a> {
    pub fn new(gateway: &'a Gateway, model_id: &'a str, max_retries: usize) -> Self {
        Judge { gateway, model_id, max_retries }
    }

    pub fn ask<T, F>(&self, kind: PromptKind, vars: &[(&str, &str)], parse: F) -> Result<Attempted<T>>
    where
        F: Fn(&str) -> std::result::Result<T, ParseError>,
    {
        let user = kind.render_user(vars)?;
        let req = PromptRequest::new(self.model_id, kind.system(), user, 1);
        self.gateway.call_with_retries(&req, 0, self.max_retries, parse)
    }
}

/// Percentage with one decimal, as reported in tables.
pub fn pct1(num: usize, den: usize) -> f64 {
    if den == 0 {
        return 0.0;
    }
    (1000.0 * num as f64 / den as f64).round() / 10.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_decimal_percentages() {
        assert_eq!(pct1(99, 100), 99.0);
        assert_eq!(pct1(7, 10), 70.0);
        assert_eq!(pct1(2, 3), 66.7);
        assert_eq!(pct1(0, 0), 0.0);
    }
}
