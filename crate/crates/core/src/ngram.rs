//! N-gram profiles, clipped matching and modified precision.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};
use crate::text::Segment;

/// Multiset of the contiguous `order`-token windows of one segment.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NGramCounts<'a> {
    pub order: usize,
    pub counts: HashMap<Vec<&'a str>, u64>,
}

impl<'a> NGramCounts<'a> {
    /// Number of n-gram occurrences (sum of counts).
    pub fn total(&self) -> u64 {
        self.counts.values().sum()
    }

    pub fn get(&self, gram: &[&str]) -> u64 {
        self.counts.get(gram).copied().unwrap_or(0)
    }
}

pub fn extract_ngrams(segment: &Segment, n: usize) -> Result<NGramCounts<'_>> {
    if n == 0 {
        return Err(Error::InvalidArgument("n-gram order must be at least 1".into()));
    }
    let surfaces: Vec<&str> = segment.surfaces().collect();
    let mut counts = HashMap::new();
    for window in surfaces.windows(n) {
        *counts.entry(window.to_vec()).or_insert(0) += 1;
    }
    Ok(NGramCounts { order: n, counts })
}

/// Candidate n-gram occurrences credited by the references, each candidate
/// n-gram clipped at its largest count in any single reference.
pub fn clipped_matches(cand: &NGramCounts<'_>, refs: &[NGramCounts<'_>]) -> Result<u64> {
    if let Some(r) = refs.iter().find(|r| r.order != cand.order) {
        return Err(Error::InvalidArgument(format!(
            "order mismatch: candidate is order {}, reference is order {}",
            cand.order, r.order
        )));
    }
    Ok(cand
        .counts
        .iter()
        .map(|(gram, &count)| {
            let max_ref = refs.iter().map(|r| r.get(gram)).max().unwrap_or(0);
            count.min(max_ref)
        })
        .sum())
}

/// Matched/total n-gram counts for one order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrecisionStat {
    pub order: usize,
    pub matched: u64,
    pub total: u64,
}

impl PrecisionStat {
    pub fn new(order: usize, matched: u64, total: u64) -> Self {
        debug_assert!(matched <= total);
        PrecisionStat { order, matched, total }
    }

    /// `matched / total`, or `None` when there are no candidate n-grams.
    pub fn value(&self) -> Option<f64> {
        (self.total > 0).then(|| self.matched as f64 / self.total as f64)
    }
}

/// Corpus-level modified precision for order `n`.
pub fn modified_precision(corpus: &Corpus, n: usize) -> Result<PrecisionStat> {
    if corpus.is_empty() {
        return Err(Error::InvalidArgument("corpus is empty".into()));
    }
    let mut stat = PrecisionStat::new(n, 0, 0);
    for unit in &corpus.units {
        let cand = extract_ngrams(&unit.candidate, n)?;
        let refs = unit
            .references
            .iter()
            .map(|r| extract_ngrams(r, n))
            .collect::<Result<Vec<_>>>()?;
        stat.matched += clipped_matches(&cand, &refs)?;
        stat.total += cand.total();
    }
    Ok(stat)
}
