//! Human ratings, metric comparison tables, engine rankings and the JSON report.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bleu::{bleu_corpus, bleu_sentence, BleuConfig, BleuScore};
use crate::cli::RunConfig;
use crate::corpus::{load_corpus, read_lines, Corpus};
use crate::error::{Error, Result};
use crate::hindi::{meteor_hindi, meteor_hindi_corpus};
use crate::meteor::{meteor_corpus, meteor_unit, MeteorConfig, MeteorScore};
use crate::resources::{ResourceManifest, ResourceSet};

pub const SCHEMA_VERSION: u32 = 1;

/// One rating on the five-point scale (5 Excellent, 4 Good, 3 Understandable,
/// 2 Barely Understandable, 1 Unacceptable).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HumanRating {
    pub line_no: usize,
    pub rating: u8,
}

pub fn rating_label(rating: u8) -> Option<&'static str> {
    match rating {
        5 => Some("Excellent"),
        4 => Some("Good"),
        3 => Some("Understandable"),
        2 => Some("Barely Understandable"),
        1 => Some("Unacceptable"),
        _ => None,
    }
}

fn parse_rating(field: &str, path: &Path, line: usize) -> Result<u8> {
    let value: i64 = field
        .trim()
        .parse()
        .map_err(|_| Error::malformed(path, line, format!("rating '{field}' is not an integer")))?;
    if !(1..=5).contains(&value) {
        return Err(Error::malformed(path, line, format!("rating {value} outside 1-5")));
    }
    Ok(value as u8)
}

fn parse_line_no(field: &str, path: &Path, line: usize) -> Result<usize> {
    match field.trim().parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(Error::malformed(path, line, format!("bad line number '{field}'"))),
    }
}

fn data_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    Ok(read_lines(path)?
        .into_iter()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .collect())
}

/// Reads `line_no<TAB>rating` lines.
pub fn load_ratings(path: &Path) -> Result<Vec<HumanRating>> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for (line, text) in data_lines(path)? {
        let fields: Vec<&str> = text.split('\t').collect();
        if fields.len() != 2 {
            return Err(Error::malformed(path, line, "expected line_no<TAB>rating"));
        }
        let line_no = parse_line_no(fields[0], path, line)?;
        let rating = parse_rating(fields[1], path, line)?;
        if !seen.insert(line_no) {
            return Err(Error::malformed(
                path,
                line,
                format!("duplicate rating for line {line_no}"),
            ));
        }
        out.push(HumanRating { line_no, rating });
    }
    Ok(out)
}

/// Reads `engine<TAB>line_no<TAB>rating` lines, grouped by engine label.
pub fn load_engine_ratings(path: &Path) -> Result<BTreeMap<String, Vec<HumanRating>>> {
    let mut seen = HashSet::new();
    let mut out: BTreeMap<String, Vec<HumanRating>> = BTreeMap::new();
    for (line, text) in data_lines(path)? {
        let fields: Vec<&str> = text.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::malformed(path, line, "expected engine<TAB>line_no<TAB>rating"));
        }
        let engine = fields[0].trim().to_string();
        let line_no = parse_line_no(fields[1], path, line)?;
        let rating = parse_rating(fields[2], path, line)?;
        if !seen.insert((engine.clone(), line_no)) {
            return Err(Error::malformed(
                path,
                line,
                format!("duplicate rating for engine '{engine}' line {line_no}"),
            ));
        }
        out.entry(engine).or_default().push(HumanRating { line_no, rating });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HumanMapping {
    /// mean / 5
    #[default]
    MeanOver5,
    /// (mean - 1) / 4
    MeanMinus1Over4,
}

impl fmt::Display for HumanMapping {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HumanMapping::MeanOver5 => "mean-over-5",
            HumanMapping::MeanMinus1Over4 => "mean-minus-1-over-4",
        })
    }
}

impl FromStr for HumanMapping {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mean-over-5" => Ok(HumanMapping::MeanOver5),
            "mean-minus-1-over-4" => Ok(HumanMapping::MeanMinus1Over4),
            other => Err(Error::InvalidArgument(format!(
                "unknown human mapping '{other}' (valid: mean-over-5, mean-minus-1-over-4)"
            ))),
        }
    }
}

/// Corpus-level human score in [0, 1]; `None` for an empty list.
pub fn normalize_human(ratings: &[HumanRating], mapping: HumanMapping) -> Option<f64> {
    if ratings.is_empty() {
        return None;
    }
    let mean = ratings.iter().map(|r| f64::from(r.rating)).sum::<f64>() / ratings.len() as f64;
    Some(match mapping {
        HumanMapping::MeanOver5 => mean / 5.0,
        HumanMapping::MeanMinus1Over4 => (mean - 1.0) / 4.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    Bleu,
    Meteor,
    MeteorHindi,
}

impl MetricKind {
    pub const ALL: [MetricKind; 3] = [MetricKind::Bleu, MetricKind::Meteor, MetricKind::MeteorHindi];

    pub fn name(self) -> &'static str {
        match self {
            MetricKind::Bleu => "bleu",
            MetricKind::Meteor => "meteor",
            MetricKind::MeteorHindi => "meteor-hindi",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            MetricKind::Bleu => "BLEU",
            MetricKind::Meteor => "METEOR",
            MetricKind::MeteorHindi => "METEOR-Hindi",
        }
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        MetricKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown metric '{s}' (valid: bleu, meteor, meteor-hindi)")))
    }
}

/// A metric together with every parameter it runs with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "metric", rename_all = "kebab-case")]
pub enum MetricConfig {
    Bleu(BleuConfig),
    Meteor(MeteorConfig),
    MeteorHindi(MeteorConfig),
}

impl MetricConfig {
    pub fn kind(&self) -> MetricKind {
        match self {
            MetricConfig::Bleu(_) => MetricKind::Bleu,
            MetricConfig::Meteor(_) => MetricKind::Meteor,
            MetricConfig::MeteorHindi(_) => MetricKind::MeteorHindi,
        }
    }

    pub fn defaults(kind: MetricKind) -> MetricConfig {
        match kind {
            MetricKind::Bleu => MetricConfig::Bleu(BleuConfig::default()),
            MetricKind::Meteor => MetricConfig::Meteor(MeteorConfig::base()),
            MetricKind::MeteorHindi => MetricConfig::MeteorHindi(MeteorConfig::hindi()),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MetricConfig::Bleu(c) => c.validate(),
            MetricConfig::Meteor(c) | MetricConfig::MeteorHindi(c) => c.validate(),
        }
    }
}

/// Corpus-level result of one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricResult {
    pub config: MetricConfig,
    /// Always "corpus": statistics summed over units before scoring.
    pub aggregation: String,
    pub score: f64,
    pub bleu: Option<BleuScore>,
    pub meteor: Option<MeteorScore>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SentenceScore {
    pub line_no: usize,
    pub score: f64,
}

pub fn score_corpus(corpus: &Corpus, config: &MetricConfig, resources: &ResourceSet) -> Result<MetricResult> {
    let (score, bleu, meteor) = match config {
        MetricConfig::Bleu(c) => {
            let s = bleu_corpus(corpus, c)?;
            (s.score, Some(s), None)
        }
        MetricConfig::Meteor(c) => {
            let s = meteor_corpus(corpus, c, resources)?;
            (s.score, None, Some(s))
        }
        MetricConfig::MeteorHindi(c) => {
            let s = meteor_hindi_corpus(corpus, c, resources)?;
            (s.score, None, Some(s))
        }
    };
    Ok(MetricResult {
        config: config.clone(),
        aggregation: "corpus".to_string(),
        score,
        bleu,
        meteor,
    })
}

/// Per-line scores, for explicit sentence-level reporting.
pub fn score_sentences(corpus: &Corpus, config: &MetricConfig, resources: &ResourceSet) -> Result<Vec<SentenceScore>> {
    config.validate()?;
    corpus
        .units
        .iter()
        .map(|u| {
            let score = match config {
                MetricConfig::Bleu(c) => bleu_sentence(u, c)?.score,
                MetricConfig::Meteor(c) => meteor_unit(u, c, resources).score,
                MetricConfig::MeteorHindi(c) => meteor_hindi(u, c, resources).score,
            };
            Ok(SentenceScore {
                line_no: u.line_no,
                score,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub metric: String,
    pub score: f64,
    /// `None` only for the human row.
    pub config: Option<MetricConfig>,
    /// Set only for the human row.
    pub human_mapping: Option<HumanMapping>,
}

/// One row per metric, plus a `Human` row when ratings are given; sorted ascending by score.
pub fn compare_metrics(
    corpus: &Corpus,
    metrics: &[MetricConfig],
    resources: &ResourceSet,
    ratings: Option<(&[HumanRating], HumanMapping)>,
) -> Result<Vec<ComparisonRow>> {
    let mut rows = metrics
        .iter()
        .map(|m| {
            let result = score_corpus(corpus, m, resources)?;
            Ok(ComparisonRow {
                metric: m.kind().label().to_string(),
                score: result.score,
                config: Some(m.clone()),
                human_mapping: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    if let Some((ratings, mapping)) = ratings {
        let score = normalize_human(ratings, mapping)
            .ok_or_else(|| Error::InvalidArgument("ratings file contains no ratings".into()))?;
        rows.push(ComparisonRow {
            metric: "Human".to_string(),
            score,
            config: None,
            human_mapping: Some(mapping),
        });
    }
    rows.sort_by(|a, b| a.score.total_cmp(&b.score));
    Ok(rows)
}

/// Aligned two-column table with a header line.
pub fn render_comparison(rows: &[ComparisonRow]) -> String {
    let width = rows
        .iter()
        .map(|r| r.metric.chars().count())
        .max()
        .unwrap_or(0)
        .max("Metric".len());
    let mut out = format!("{:<width$}\tScore\n", "Metric");
    for r in rows {
        out.push_str(&format!("{:<width$}\t{:.4}\n", r.metric, r.score));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineResult {
    pub label: String,
    /// Keyed by metric name.
    pub scores: BTreeMap<String, f64>,
    pub human: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankedEngine {
    pub rank: usize,
    pub label: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRanking {
    pub metric: String,
    pub engines: Vec<RankedEngine>,
    /// Spearman coefficient against human scores, when every engine has one.
    pub spearman_vs_human: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub results: Vec<EngineResult>,
    pub rankings: Vec<MetricRanking>,
}

/// Engines by descending score on `metric`; equal scores fall back to label order.
pub fn rank_by(results: &[EngineResult], metric: &str) -> MetricRanking {
    let mut scored: Vec<(&str, f64)> = results
        .iter()
        .filter_map(|r| r.scores.get(metric).map(|&s| (r.label.as_str(), s)))
        .collect();
    scored.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    let engines = scored
        .into_iter()
        .enumerate()
        .map(|(i, (label, score))| RankedEngine {
            rank: i + 1,
            label: label.to_string(),
            score,
        })
        .collect();

    let humans: Option<Vec<f64>> = results.iter().map(|r| r.human).collect();
    let spearman_vs_human = humans.and_then(|h| {
        let metric_scores: Option<Vec<f64>> = results.iter().map(|r| r.scores.get(metric).copied()).collect();
        rank_correlation(&metric_scores?, &h)
    });
    MetricRanking {
        metric: metric.to_string(),
        engines,
        spearman_vs_human,
    }
}

/// An engine's candidate file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineInput {
    pub label: String,
    pub path: PathBuf,
}

/// Scores every engine against the same references and ranks them per metric.
pub fn rank_engines<P: AsRef<Path>>(
    engines: &[EngineInput],
    reference_paths: &[P],
    metrics: &[MetricConfig],
    resources: &ResourceSet,
    human: Option<&BTreeMap<String, f64>>,
) -> Result<Ranking> {
    if engines.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "ranking needs at least 2 engines, got {}",
            engines.len()
        )));
    }
    let mut labels = HashSet::new();
    if let Some(dup) = engines.iter().find(|e| !labels.insert(e.label.as_str())) {
        return Err(Error::InvalidArgument(format!(
            "engine label '{}' given twice",
            dup.label
        )));
    }
    for m in metrics {
        m.validate()?;
    }

    let mut results = Vec::with_capacity(engines.len());
    for engine in engines {
        let wrap = |e: Error| Error::Engine {
            engine: engine.label.clone(),
            source: Box::new(e),
        };
        let corpus = load_corpus(&engine.path, reference_paths).map_err(wrap)?;
        let mut scores = BTreeMap::new();
        for m in metrics {
            let r = score_corpus(&corpus, m, resources).map_err(wrap)?;
            scores.insert(m.kind().name().to_string(), r.score);
        }
        results.push(EngineResult {
            label: engine.label.clone(),
            scores,
            human: human.and_then(|h| h.get(&engine.label).copied()),
        });
    }
    let rankings = metrics.iter().map(|m| rank_by(&results, m.kind().name())).collect();
    Ok(Ranking { results, rankings })
}

/// Ranks starting at 1, tied values sharing the mean of their positions.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman rank correlation (Pearson correlation of average ranks).
/// `None` with fewer than two pairs, mismatched lengths, or a constant side.
pub fn rank_correlation(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    let rx = average_ranks(xs);
    let ry = average_ranks(ys);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Machine-readable output of every subcommand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: String,
    pub tokenizer: String,
    pub config: RunConfig,
    pub resources: ResourceManifest,
    pub scores: Vec<MetricResult>,
    pub sentence_scores: Option<BTreeMap<String, Vec<SentenceScore>>>,
    pub comparison: Option<Vec<ComparisonRow>>,
    pub human: Option<f64>,
    pub ranking: Option<Ranking>,
}

impl Report {
    pub fn new(config: RunConfig, resources: ResourceManifest) -> Report {
        Report {
            schema_version: SCHEMA_VERSION,
            tool: format!("hindeval {}", env!("CARGO_PKG_VERSION")),
            tokenizer: crate::text::TOKENIZER_VERSION.to_string(),
            config,
            resources,
            scores: Vec::new(),
            sentence_scores: None,
            comparison: None,
            human: None,
            ranking: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Report> {
        serde_json::from_str(text).map_err(|e| Error::InvalidArgument(format!("invalid report JSON: {e}")))
    }
}
