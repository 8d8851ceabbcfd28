//! BLEU composition: modified precisions, brevity penalty, weighted geometric mean.

use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::{Corpus, EvalUnit};
use crate::error::{Error, Result};
use crate::ngram::{clipped_matches, extract_ngrams, PrecisionStat};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Smoothing {
    #[default]
    None,
    /// `(matched + 1) / (total + 1)` for every order above 1.
    AddOneHighOrder,
}

impl fmt::Display for Smoothing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Smoothing::None => "none",
            Smoothing::AddOneHighOrder => "add-one-high-order",
        })
    }
}

impl FromStr for Smoothing {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Smoothing::None),
            "add-one-high-order" => Ok(Smoothing::AddOneHighOrder),
            other => Err(Error::InvalidArgument(format!(
                "unknown smoothing '{other}' (valid: none, add-one-high-order)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuConfig {
    pub max_n: usize,
    pub weights: Vec<f64>,
    pub smoothing: Smoothing,
}

impl Default for BleuConfig {
    fn default() -> Self {
        BleuConfig::uniform(4)
    }
}

impl BleuConfig {
    pub fn uniform(max_n: usize) -> Self {
        BleuConfig {
            max_n,
            weights: vec![1.0 / max_n as f64; max_n],
            smoothing: Smoothing::None,
        }
    }

    /// All weight on order `n`.
    pub fn single_order(n: usize) -> Self {
        let mut weights = vec![0.0; n];
        weights[n - 1] = 1.0;
        BleuConfig {
            max_n: n,
            weights,
            smoothing: Smoothing::None,
        }
    }

    pub fn with_smoothing(mut self, smoothing: Smoothing) -> Self {
        self.smoothing = smoothing;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_n == 0 {
            return Err(Error::InvalidArgument("max_n must be at least 1".into()));
        }
        if self.weights.len() != self.max_n {
            return Err(Error::InvalidArgument(format!(
                "{} weights given for max_n = {}",
                self.weights.len(),
                self.max_n
            )));
        }
        if self.weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidArgument("weights must be finite and non-negative".into()));
        }
        let sum: f64 = self.weights.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidArgument(format!("weights sum to {sum}, expected 1")));
        }
        Ok(())
    }
}

/// Integer sufficient statistics; corpus BLEU is composed from their sum.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BleuStats {
    pub matched: Vec<u64>,
    pub total: Vec<u64>,
    pub cand_len: u64,
    pub ref_len: u64,
}

impl Add for BleuStats {
    type Output = BleuStats;

    fn add(mut self, rhs: BleuStats) -> BleuStats {
        if self.matched.len() < rhs.matched.len() {
            self.matched.resize(rhs.matched.len(), 0);
            self.total.resize(rhs.total.len(), 0);
        }
        for (i, (m, t)) in rhs.matched.iter().zip(&rhs.total).enumerate() {
            self.matched[i] += m;
            self.total[i] += t;
        }
        self.cand_len += rhs.cand_len;
        self.ref_len += rhs.ref_len;
        self
    }
}

/// Reference length closest to `cand_len`; ties go to the shorter reference.
pub fn effective_ref_len(cand_len: usize, ref_lens: impl IntoIterator<Item = usize>) -> usize {
    ref_lens
        .into_iter()
        .min_by_key(|&r| (r.abs_diff(cand_len), r))
        .unwrap_or(0)
}

pub fn unit_stats(unit: &EvalUnit, max_n: usize) -> Result<BleuStats> {
    let mut stats = BleuStats {
        matched: Vec::with_capacity(max_n),
        total: Vec::with_capacity(max_n),
        cand_len: unit.candidate.len() as u64,
        ref_len: effective_ref_len(unit.candidate.len(), unit.references.iter().map(|r| r.len())) as u64,
    };
    for n in 1..=max_n {
        let cand = extract_ngrams(&unit.candidate, n)?;
        let refs = unit
            .references
            .iter()
            .map(|r| extract_ngrams(r, n))
            .collect::<Result<Vec<_>>>()?;
        stats.matched.push(clipped_matches(&cand, &refs)?);
        stats.total.push(cand.total());
    }
    Ok(stats)
}

/// `1` when the candidate is at least as long as the reference, `e^(1 - r/c)` otherwise.
/// An empty candidate against a non-empty reference gets `0`.
pub fn brevity_penalty(cand_len: u64, ref_len: u64) -> f64 {
    if cand_len >= ref_len {
        1.0
    } else if cand_len == 0 {
        0.0
    } else {
        (1.0 - ref_len as f64 / cand_len as f64).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BleuScore {
    pub max_n: usize,
    pub weights: Vec<f64>,
    pub smoothing: Smoothing,
    pub precisions: Vec<PrecisionStat>,
    pub bp: f64,
    pub cand_len: u64,
    pub ref_len: u64,
    pub score: f64,
    /// Weighted orders with no candidate n-grams; they were left out of the mean.
    pub undefined_orders: Vec<usize>,
}

impl BleuScore {
    pub fn from_stats(stats: &BleuStats, config: &BleuConfig) -> BleuScore {
        let precisions: Vec<PrecisionStat> = (0..config.max_n)
            .map(|i| PrecisionStat::new(i + 1, stats.matched[i], stats.total[i]))
            .collect();
        let bp = brevity_penalty(stats.cand_len, stats.ref_len);

        let mut undefined_orders = Vec::new();
        let mut log_sum = 0.0;
        let mut weight_sum = 0.0;
        let mut zero = false;
        for (p, &w) in precisions.iter().zip(&config.weights) {
            if w == 0.0 {
                continue;
            }
            if p.total == 0 {
                undefined_orders.push(p.order);
                continue;
            }
            let value = match config.smoothing {
                Smoothing::AddOneHighOrder if p.order >= 2 => (p.matched + 1) as f64 / (p.total + 1) as f64,
                _ => p.matched as f64 / p.total as f64,
            };
            if value == 0.0 {
                zero = true;
                continue;
            }
            log_sum += w * value.ln();
            weight_sum += w;
        }

        let score = if zero || weight_sum == 0.0 {
            0.0
        } else if undefined_orders.is_empty() {
            bp * log_sum.exp()
        } else {
            bp * (log_sum / weight_sum).exp()
        };

        BleuScore {
            max_n: config.max_n,
            weights: config.weights.clone(),
            smoothing: config.smoothing,
            precisions,
            bp,
            cand_len: stats.cand_len,
            ref_len: stats.ref_len,
            score,
            undefined_orders,
        }
    }
}

fn sum_stats(units: &[EvalUnit], max_n: usize) -> Result<BleuStats> {
    units
        .par_iter()
        .map(|u| unit_stats(u, max_n))
        .try_reduce(BleuStats::default, |a, b| Ok(a + b))
}

pub fn bleu_units(units: &[EvalUnit], config: &BleuConfig) -> Result<BleuScore> {
    config.validate()?;
    if units.is_empty() {
        return Err(Error::InvalidArgument("corpus is empty".into()));
    }
    Ok(BleuScore::from_stats(&sum_stats(units, config.max_n)?, config))
}

/// Corpus BLEU: per-order match/total counts and lengths are summed over all units first.
pub fn bleu_corpus(corpus: &Corpus, config: &BleuConfig) -> Result<BleuScore> {
    bleu_units(&corpus.units, config)
}

pub fn bleu_sentence(unit: &EvalUnit, config: &BleuConfig) -> Result<BleuScore> {
    bleu_units(std::slice::from_ref(unit), config)
}

/// One score per order `1..=max_n`, each with all weight on that order.
pub fn ngram_curve(units: &[EvalUnit], max_n: usize) -> Result<Vec<BleuScore>> {
    if max_n == 0 {
        return Err(Error::InvalidArgument("max_n must be at least 1".into()));
    }
    if units.is_empty() {
        return Err(Error::InvalidArgument("corpus is empty".into()));
    }
    let stats = sum_stats(units, max_n)?;
    Ok((1..=max_n)
        .map(|n| BleuScore::from_stats(&stats, &BleuConfig::single_order(n)))
        .collect())
}
