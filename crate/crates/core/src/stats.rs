//! Significance tests and agreement statistics.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::num::Real;

/// Complementary error function, accurate to about 1e-15 in `f64`.
///
/// Below 1 the positive-term series for erf is summed and subtracted from 1,
/// which loses at most a digit there; above it a continued fraction is
/// evaluated with the modified Lentz method.
pub fn erfc<T: Real>(x: T) -> T {
    let two = T::lit(2.0);
    if x < T::zero() {
        return two - erfc(-x);
    }
    let x2 = x * x;
    let sqrt_pi = T::lit(std::f64::consts::PI).sqrt();
    if x < T::one() {
        let mut term = x;
        let mut sum = x;
        let mut n = 0usize;
        while term > T::epsilon() * sum && n < 200 {
            n += 1;
            term = term * two * x2 / T::count(2 * n + 1);
            sum = sum + term;
        }
        T::one() - two / sqrt_pi * (-x2).exp() * sum
    } else {
        let tiny = T::min_positive_value() / T::epsilon();
        let mut f = x;
        let mut c = x;
        let mut d = T::zero();
        for n in 1..5000usize {
            let a = T::count(n) / two;
            d = x + a * d;
            if d.abs() < tiny {
                d = tiny;
            }
            c = x + a / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = d.recip();
            let delta = c * d;
            f = f * delta;
            if (delta - T::one()).abs() < T::epsilon() {
                break;
            }
        }
        (-x2).exp() / (sqrt_pi * f)
    }
}

/// Two-sided tail probability of a standard normal at `z`.
pub fn two_sided_p<T: Real>(z: T) -> T {
    erfc(z.abs() / T::lit(std::f64::consts::SQRT_2))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProportionPair {
    pub x1: usize,
    pub n1: usize,
    pub x2: usize,
    pub n2: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZTest<T: Real> {
    pub z: T,
    /// Two-sided.
    pub p_value: T,
    /// Pooled proportion was 0 or 1, so the variance vanished.
    pub degenerate: bool,
}

/// Pooled-variance two-proportion z-test.
pub fn two_proportion_z_test<T: Real>(p: &ProportionPair) -> Result<ZTest<T>> {
    if p.n1 == 0 || p.n2 == 0 || p.x1 > p.n1 || p.x2 > p.n2 {
        return Err(Error::Input(format!("invalid proportions {p:?}")));
    }
    let (n1, n2) = (T::count(p.n1), T::count(p.n2));
    let pooled = T::count(p.x1 + p.x2) / (n1 + n2);
    if pooled == T::zero() || pooled == T::one() {
        return Ok(ZTest { z: T::zero(), p_value: T::one(), degenerate: true });
    }
    let se = (pooled * (T::one() - pooled) * (n1.recip() + n2.recip())).sqrt();
    let z = (T::count(p.x1) / n1 - T::count(p.x2) / n2) / se;
    Ok(ZTest { z, p_value: two_sided_p(z), degenerate: false })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolmResult<T: Real> {
    /// Step-down adjusted p-values, in input order.
    pub adjusted: Vec<T>,
    pub reject: Vec<bool>,
}

/// Holm's step-down correction; a hypothesis is rejected when its adjusted
/// p-value is below `alpha`.
pub fn holm_bonferroni<T: Real>(p_values: &[T], alpha: T) -> Result<HolmResult<T>> {
    if p_values.is_empty() {
        return Err(Error::Input("no p-values to correct".into()));
    }
    if let Some(bad) = p_values.iter().find(|p| !(**p >= T::zero() && **p <= T::one())) {
        return Err(Error::Input(format!("p-value {bad:?} outside [0, 1]")));
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].partial_cmp(&p_values[b]).expect("checked finite").then(a.cmp(&b)));
    let mut adjusted = vec![T::zero(); m];
    let mut running = T::zero();
    for (rank, &idx) in order.iter().enumerate() {
        let scaled = (T::count(m - rank) * p_values[idx]).min(T::one());
        running = running.max(scaled);
        adjusted[idx] = running;
    }
    let reject = adjusted.iter().map(|a| *a < alpha).collect();
    Ok(HolmResult { adjusted, reject })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgreementReport<T: Real> {
    pub alpha: T,
    pub n_items: usize,
    pub n_annotators: usize,
    /// Items with at least two labels.
    pub n_pairable: usize,
}

/// Krippendorff's alpha at the nominal level. `labels[item][annotator]` is
/// `None` where that annotator did not label the item.
pub fn krippendorff_alpha<T: Real, L: Eq + Hash>(labels: &[Vec<Option<L>>]) -> Result<AgreementReport<T>> {
    let mut index: HashMap<&L, usize> = HashMap::new();
    let mut n_c: Vec<T> = Vec::new();
    let mut disagreement = T::zero();
    let mut n_pairable = 0usize;
    let mut counts: Vec<usize> = Vec::new();
    for item in labels {
        counts.iter_mut().for_each(|c| *c = 0);
        let mut m = 0usize;
        for l in item.iter().flatten() {
            let next = index.len();
            let c = *index.entry(l).or_insert(next);
            if c >= counts.len() {
                counts.resize(c + 1, 0);
                n_c.resize(c + 1, T::zero());
            }
            counts[c] += 1;
            m += 1;
        }
        if m < 2 {
            continue;
        }
        n_pairable += 1;
        let weight = T::count(m - 1).recip();
        let same: usize = counts.iter().map(|c| c * c.saturating_sub(1)).sum();
        // ordered pairs of differing values
        let differing = m * (m - 1) - same;
        disagreement = disagreement + T::count(differing) * weight;
        for (c, &k) in counts.iter().enumerate() {
            // each value pairs with the m-1 others in its unit
            n_c[c] = n_c[c] + T::count(k * (m - 1)) * weight;
        }
    }
    if n_pairable == 0 {
        return Err(Error::Input("no item was labeled by two or more annotators".into()));
    }
    let n_annotators = labels.iter().map(Vec::len).max().unwrap_or(0);
    let report = |alpha| AgreementReport { alpha, n_items: labels.len(), n_annotators, n_pairable };
    if disagreement == T::zero() {
        return Ok(report(T::one()));
    }
    let n: T = n_c.iter().fold(T::zero(), |a, b| a + *b);
    let sum_sq = n_c.iter().fold(T::zero(), |a, b| a + *b * *b);
    let expected = n * n - sum_sq;
    Ok(report(T::one() - (n - T::one()) * disagreement / expected))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AnnotatorTag {
    #[serde(rename = "HIGH-contains")]
    HighContains,
    #[serde(rename = "LOW-lean-contains")]
    LowLeanContains,
    #[serde(rename = "LOW-lean-against")]
    LowLeanAgainst,
}

impl std::str::FromStr for AnnotatorTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "HIGH-contains" => Ok(AnnotatorTag::HighContains),
            "LOW-lean-contains" => Ok(AnnotatorTag::LowLeanContains),
            "LOW-lean-against" => Ok(AnnotatorTag::LowLeanAgainst),
            other => Err(Error::Input(format!("unknown annotator tag {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Confidence {
    High,
    Low,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TagAggregate {
    pub contains: bool,
    pub confidence: Confidence,
}

/// Collapses one sentence's tags by precedence: a high-confidence "contains"
/// tag wins, then a low-confidence lean towards "contains", then a lean
/// against; no tags means a confident "does not contain".
pub fn aggregate_annotator_tags(tags: &[AnnotatorTag]) -> TagAggregate {
    let has = |t| tags.contains(&t);
    if has(AnnotatorTag::HighContains) {
        TagAggregate { contains: true, confidence: Confidence::High }
    } else if has(AnnotatorTag::LowLeanContains) {
        TagAggregate { contains: true, confidence: Confidence::Low }
    } else if has(AnnotatorTag::LowLeanAgainst) {
        TagAggregate { contains: false, confidence: Confidence::Low }
    } else {
        TagAggregate { contains: false, confidence: Confidence::High }
    }
}

/// Parses tag strings, then aggregates.
pub fn aggregate_tag_strings(tags: &[&str]) -> Result<TagAggregate> {
    let parsed = tags.iter().map(|t| t.parse()).collect::<Result<Vec<AnnotatorTag>>>()?;
    Ok(aggregate_annotator_tags(&parsed))
}

/// One pairwise comparison in a significance report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub method_a: String,
    pub method_b: String,
    pub metric: String,
    pub family: String,
    pub z: f64,
    pub p: f64,
    pub p_adjusted: f64,
    pub reject: bool,
}

/// All pairwise z-tests between methods for one metric, Holm-corrected as a
/// family. `groups` holds (method, successes, trials).
pub fn pairwise_comparisons(family: &str, metric: &str, groups: &[(String, usize, usize)], alpha: f64) -> Result<Vec<ComparisonRow>> {
    let mut rows = Vec::new();
    let mut ps = Vec::new();
    for i in 0..groups.len() {
        for j in i + 1..groups.len() {
            let (a, xa, na) = &groups[i];
            let (b, xb, nb) = &groups[j];
            let t = two_proportion_z_test::<f64>(&ProportionPair { x1: *xa, n1: *na, x2: *xb, n2: *nb })?;
            ps.push(t.p_value);
            rows.push(ComparisonRow {
                method_a: a.clone(),
                method_b: b.clone(),
                metric: metric.to_string(),
                family: family.to_string(),
                z: t.z,
                p: t.p_value,
                p_adjusted: 0.0,
                reject: false,
            });
        }
    }
    if rows.is_empty() {
        return Ok(rows);
    }
    let holm = holm_bonferroni(&ps, alpha)?;
    for (row, (adj, rej)) in rows.iter_mut().zip(holm.adjusted.into_iter().zip(holm.reject)) {
        row.p_adjusted = adj;
        row.reject = rej;
    }
    Ok(rows)
}
