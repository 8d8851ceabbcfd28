//! METEOR: staged unigram alignment, recall-weighted F-mean and fragmentation penalty.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Add;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::align::{count_chunks, crosses, solve_min_crossing, Alignment, AlignmentBuilder, Edge, MatchStage};
use crate::corpus::{Corpus, EvalUnit};
use crate::error::{Error, Result};
use crate::hindi::{clause_match_counts, group_token_pairs, lwg_group_pairs, lwg_match, lwg_split, pos_match};
use crate::resources::ResourceSet;
use crate::text::Segment;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FmeanMode {
    /// `10PR / (R + 9P)`
    #[default]
    RecallWeighted,
    /// `2PR / (P + R)`
    Harmonic,
}

impl FmeanMode {
    pub fn combine(self, precision: f64, recall: f64) -> f64 {
        if precision == 0.0 || recall == 0.0 {
            return 0.0;
        }
        match self {
            FmeanMode::RecallWeighted => 10.0 * precision * recall / (recall + 9.0 * precision),
            FmeanMode::Harmonic => 2.0 * precision * recall / (precision + recall),
        }
    }
}

impl fmt::Display for FmeanMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FmeanMode::RecallWeighted => "recall-weighted",
            FmeanMode::Harmonic => "harmonic",
        })
    }
}

impl FromStr for FmeanMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "recall-weighted" => Ok(FmeanMode::RecallWeighted),
            "harmonic" => Ok(FmeanMode::Harmonic),
            other => Err(Error::InvalidArgument(format!(
                "unknown fmean mode '{other}' (valid: recall-weighted, harmonic)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeteorConfig {
    pub stages: Vec<MatchStage>,
    pub fmean: FmeanMode,
    /// Penalty weight.
    pub gamma: f64,
    /// Penalty exponent.
    pub beta: f64,
    /// Weight of the clause-match ratio in METEOR-Hindi's final score.
    pub lambda: f64,
    /// POS tags starting with this prefix mark verbs.
    pub verb_tag_prefix: String,
}

impl Default for MeteorConfig {
    fn default() -> Self {
        MeteorConfig::base()
    }
}

impl MeteorConfig {
    /// Exact, stem and synonym stages.
    pub fn base() -> Self {
        MeteorConfig {
            stages: MatchStage::BASE.to_vec(),
            fmean: FmeanMode::RecallWeighted,
            gamma: 0.5,
            beta: 3.0,
            lambda: 0.0,
            verb_tag_prefix: "V".to_string(),
        }
    }

    /// All five stages, pure pipeline (`lambda = 0`).
    pub fn hindi() -> Self {
        MeteorConfig {
            stages: MatchStage::ALL.to_vec(),
            ..MeteorConfig::base()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::InvalidArgument(format!(
                "gamma must lie in [0, 1], got {}",
                self.gamma
            )));
        }
        if !(self.beta.is_finite() && self.beta > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::InvalidArgument(format!(
                "lambda must lie in [0, 1], got {}",
                self.lambda
            )));
        }
        if self.stages.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "stages must be distinct and in pipeline order (exact, stem, synonym, lwg, pos)".into(),
            ));
        }
        Ok(())
    }
}

/// Counts from which every METEOR quantity is derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MeteorStats {
    pub matches: u64,
    pub cand_len: u64,
    pub ref_len: u64,
    pub chunks: u64,
}

impl Add for MeteorStats {
    type Output = MeteorStats;

    fn add(self, rhs: MeteorStats) -> MeteorStats {
        MeteorStats {
            matches: self.matches + rhs.matches,
            cand_len: self.cand_len + rhs.cand_len,
            ref_len: self.ref_len + rhs.ref_len,
            chunks: self.chunks + rhs.chunks,
        }
    }
}

/// Derived METEOR quantities for one set of counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeteorParts {
    pub precision: f64,
    pub recall: f64,
    pub fmean: f64,
    pub penalty: f64,
    pub score: f64,
}

impl MeteorStats {
    pub fn compute(&self, config: &MeteorConfig) -> MeteorParts {
        if self.matches == 0 || self.cand_len == 0 || self.ref_len == 0 {
            return MeteorParts {
                precision: 0.0,
                recall: 0.0,
                fmean: 0.0,
                penalty: 0.0,
                score: 0.0,
            };
        }
        let m = self.matches as f64;
        let precision = m / self.cand_len as f64;
        let recall = m / self.ref_len as f64;
        let fmean = config.fmean.combine(precision, recall);
        let penalty = config.gamma * (self.chunks as f64 / m).powf(config.beta);
        MeteorParts {
            precision,
            recall,
            fmean,
            penalty,
            score: fmean * (1.0 - penalty),
        }
    }
}

/// Clause diagnostics for METEOR-Hindi.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ClauseStats {
    pub matched: u64,
    pub total: u64,
}

impl ClauseStats {
    pub fn ratio(&self) -> f64 {
        if self.total == 0 {
            0.0
        } else {
            self.matched as f64 / self.total as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeteorScore {
    pub matches: u64,
    pub cand_len: u64,
    pub ref_len: u64,
    pub precision: f64,
    pub recall: f64,
    pub fmean: f64,
    pub chunks: u64,
    pub penalty: f64,
    pub score: f64,
    pub stage_histogram: BTreeMap<MatchStage, u64>,
    /// Reference picked for a single unit; `None` for corpus aggregates.
    pub ref_choice: Option<usize>,
    /// Present for METEOR-Hindi runs.
    pub clauses: Option<ClauseStats>,
    /// Empty candidate or reference involved.
    pub degenerate: bool,
    /// Enabled stages whose resource table was unavailable.
    pub missing_resources: Vec<MatchStage>,
}

impl MeteorScore {
    pub fn stats(&self) -> MeteorStats {
        MeteorStats {
            matches: self.matches,
            cand_len: self.cand_len,
            ref_len: self.ref_len,
            chunks: self.chunks,
        }
    }

    fn from_parts(
        stats: MeteorStats,
        config: &MeteorConfig,
        clauses: Option<ClauseStats>,
        stage_histogram: BTreeMap<MatchStage, u64>,
    ) -> MeteorScore {
        let parts = stats.compute(config);
        let score = match clauses {
            Some(c) if config.lambda > 0.0 => parts.score * (1.0 - config.lambda) + c.ratio() * config.lambda,
            _ => parts.score,
        };
        MeteorScore {
            matches: stats.matches,
            cand_len: stats.cand_len,
            ref_len: stats.ref_len,
            precision: parts.precision,
            recall: parts.recall,
            fmean: parts.fmean,
            chunks: stats.chunks,
            penalty: parts.penalty,
            score,
            stage_histogram,
            ref_choice: None,
            clauses,
            degenerate: false,
            missing_resources: Vec::new(),
        }
    }
}

/// Pairs proposed by one matcher stage.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StageProposal {
    pub pairs: Vec<(usize, usize)>,
    pub resource_missing: bool,
}

/// All pairs of still-free positions that `stage` treats as equivalent.
pub fn match_stage(
    cand: &Segment,
    reference: &Segment,
    cand_free: &[bool],
    ref_free: &[bool],
    stage: MatchStage,
    resources: &ResourceSet,
) -> StageProposal {
    let missing = match stage {
        MatchStage::Exact => false,
        MatchStage::Stem => !resources.has_stems(),
        MatchStage::Synonym => !resources.has_synsets(),
        MatchStage::Lwg => !resources.has_function_words(),
        MatchStage::Pos => !resources.has_pos(),
    };
    if missing {
        return StageProposal {
            pairs: Vec::new(),
            resource_missing: true,
        };
    }

    let free_tokens = |seg: &'_ Segment, free: &[bool]| -> Vec<crate::text::Token> {
        seg.tokens.iter().filter(|t| free[t.index]).cloned().collect()
    };

    let pairs = match stage {
        MatchStage::Lwg => {
            let cg = eligible_groups(cand, cand_free, resources);
            let rg = eligible_groups(reference, ref_free, resources);
            lwg_match(&cg, &rg, resources)
        }
        MatchStage::Pos => pos_match(
            &free_tokens(cand, cand_free),
            &free_tokens(reference, ref_free),
            resources,
        ),
        _ => {
            let mut out = Vec::new();
            for c in cand.tokens.iter().filter(|t| cand_free[t.index]) {
                for r in reference.tokens.iter().filter(|t| ref_free[t.index]) {
                    let hit = match stage {
                        MatchStage::Exact => c.surface == r.surface,
                        MatchStage::Stem => resources.stem(&c.surface) == resources.stem(&r.surface),
                        MatchStage::Synonym => resources.are_synonyms(&c.surface, &r.surface),
                        _ => unreachable!(),
                    };
                    if hit {
                        out.push((c.index, r.index));
                    }
                }
            }
            out
        }
    };
    StageProposal {
        pairs,
        resource_missing: false,
    }
}

fn eligible_groups(seg: &Segment, free: &[bool], resources: &ResourceSet) -> Vec<crate::hindi::LocalWordGroup> {
    lwg_split(seg, resources)
        .into_iter()
        .filter(|g| !g.is_headless() && g.token_indices().all(|i| free[i]))
        .collect()
}

/// Alignment of one candidate against one reference plus the stages that lacked resources.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignOutcome {
    pub alignment: Alignment,
    pub missing: Vec<MatchStage>,
}

/// Runs the configured stages in order; each stage sees only positions the earlier ones left free.
pub fn align_segments(
    cand: &Segment,
    reference: &Segment,
    stages: &[MatchStage],
    resources: &ResourceSet,
) -> AlignOutcome {
    let mut builder = AlignmentBuilder::new(cand.len(), reference.len());
    let mut missing = Vec::new();
    for &stage in stages {
        let cand_free: Vec<bool> = (0..cand.len()).map(|i| builder.cand_free(i)).collect();
        let ref_free: Vec<bool> = (0..reference.len()).map(|j| builder.ref_free(j)).collect();
        if stage == MatchStage::Lwg {
            if !resources.has_function_words() {
                missing.push(stage);
                continue;
            }
            let cg = eligible_groups(cand, &cand_free, resources);
            let rg = eligible_groups(reference, &ref_free, resources);
            let fixed = builder.fixed_pairs();
            let group_pairs = lwg_group_pairs(&cg, &rg, resources);
            let edges: Vec<Edge> = group_pairs
                .iter()
                .map(|&(g, h)| Edge {
                    left: g,
                    right: h,
                    fixed_cost: group_token_pairs(&cg[g], &rg[h])
                        .iter()
                        .map(|&p| fixed.iter().filter(|&&f| crosses(p, f)).count() as u32)
                        .sum(),
                })
                .collect();
            let chosen: Vec<(usize, usize)> = solve_min_crossing(&edges)
                .into_iter()
                .flat_map(|(g, h)| group_token_pairs(&cg[g], &rg[h]))
                .collect();
            builder.commit(stage, &chosen);
            continue;
        }
        let proposal = match_stage(cand, reference, &cand_free, &ref_free, stage, resources);
        if proposal.resource_missing {
            missing.push(stage);
        }
        builder.add_stage(stage, &proposal.pairs);
    }
    AlignOutcome {
        alignment: builder.finish(0),
        missing,
    }
}

fn histogram(alignment: &Alignment) -> BTreeMap<MatchStage, u64> {
    let mut h = BTreeMap::new();
    for p in &alignment.pairs {
        *h.entry(p.stage).or_insert(0) += 1;
    }
    h
}

/// Scores a unit against each reference and keeps the best final score
/// (earliest reference on ties).
pub(crate) fn score_unit(
    unit: &EvalUnit,
    config: &MeteorConfig,
    resources: &ResourceSet,
    clauses: bool,
) -> MeteorScore {
    let mut best: Option<MeteorScore> = None;
    for (k, reference) in unit.references.iter().enumerate() {
        let outcome = align_segments(&unit.candidate, reference, &config.stages, resources);
        let mut alignment = outcome.alignment;
        alignment.ref_choice = k;
        let stats = MeteorStats {
            matches: alignment.len() as u64,
            cand_len: unit.candidate.len() as u64,
            ref_len: reference.len() as u64,
            chunks: count_chunks(&alignment) as u64,
        };
        let clause_stats =
            clauses.then(|| clause_match_counts(&unit.candidate, &alignment, resources, &config.verb_tag_prefix));
        let mut score = MeteorScore::from_parts(stats, config, clause_stats, histogram(&alignment));
        score.ref_choice = Some(k);
        score.degenerate = unit.candidate.is_empty() || reference.is_empty();
        score.missing_resources = outcome.missing;
        if best.as_ref().is_none_or(|b| score.score > b.score) {
            best = Some(score);
        }
    }
    best.expect("unit has at least one reference")
}

/// METEOR for one unit with the configured stages (default: exact, stem, synonym).
pub fn meteor_unit(unit: &EvalUnit, config: &MeteorConfig, resources: &ResourceSet) -> MeteorScore {
    score_unit(unit, config, resources, false)
}

/// Sums per-unit counts and recomputes every derived quantity from the sums.
pub fn aggregate(scores: &[MeteorScore], config: &MeteorConfig) -> MeteorScore {
    let stats = scores.iter().fold(MeteorStats::default(), |acc, s| acc + s.stats());
    let clauses = scores.iter().try_fold(ClauseStats::default(), |acc, s| {
        s.clauses.map(|c| ClauseStats {
            matched: acc.matched + c.matched,
            total: acc.total + c.total,
        })
    });
    let mut hist = BTreeMap::new();
    for s in scores {
        for (stage, n) in &s.stage_histogram {
            *hist.entry(*stage).or_insert(0) += n;
        }
    }
    let mut out = MeteorScore::from_parts(stats, config, clauses, hist);
    out.degenerate = scores.iter().any(|s| s.degenerate);
    let mut missing: Vec<MatchStage> = scores
        .iter()
        .flat_map(|s| s.missing_resources.iter().copied())
        .collect();
    missing.sort();
    missing.dedup();
    out.missing_resources = missing;
    out
}

pub(crate) fn corpus_scores(
    corpus: &Corpus,
    config: &MeteorConfig,
    resources: &ResourceSet,
    clauses: bool,
) -> Result<Vec<MeteorScore>> {
    config.validate()?;
    if corpus.is_empty() {
        return Err(Error::InvalidArgument("corpus is empty".into()));
    }
    Ok(corpus
        .units
        .par_iter()
        .map(|u| score_unit(u, config, resources, clauses))
        .collect())
}

/// Corpus METEOR from summed matches, lengths and chunks.
pub fn meteor_corpus(corpus: &Corpus, config: &MeteorConfig, resources: &ResourceSet) -> Result<MeteorScore> {
    Ok(aggregate(&corpus_scores(corpus, config, resources, false)?, config))
}
