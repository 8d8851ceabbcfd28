//! Command-line front end: `score`, `compare` and `rank`.
//!
//! Exit codes: 0 success, 2 bad input data, 3 bad arguments or configuration.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::align::MatchStage;
use crate::bleu::{BleuConfig, BleuScore, Smoothing};
use crate::corpus::load_corpus;
use crate::error::{Error, Result};
use crate::meteor::{FmeanMode, MeteorConfig, MeteorScore};
use crate::report::{
    compare_metrics, load_engine_ratings, load_ratings, normalize_human, rank_engines, render_comparison, score_corpus,
    score_sentences, EngineInput, HumanMapping, MetricConfig, MetricKind, Ranking, Report,
};
use crate::resources::{load_resources, ResourcePaths, ResourceSet};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "hindeval",
    version,
    about = "BLEU, METEOR and METEOR-Hindi for Hindi machine translation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Corpus-level score of one metric.
    Score(ScoreArgs),
    /// Several metrics side by side, optionally with a human row.
    Compare(CompareArgs),
    /// Rank two or more engines against the same references.
    Rank(RankArgs),
}

#[derive(Debug, Args)]
struct ScoreArgs {
    /// Candidate file, one segment per line.
    #[arg(long)]
    cand: PathBuf,
    /// Reference file, line-aligned with the candidate. Repeatable.
    #[arg(long = "ref", required = true)]
    refs: Vec<PathBuf>,
    /// bleu, meteor or meteor-hindi.
    #[arg(long)]
    metric: String,
    /// Also report a score per line.
    #[arg(long)]
    sentence_level: bool,
    #[command(flatten)]
    params: MetricParams,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct CompareArgs {
    #[arg(long)]
    cand: PathBuf,
    #[arg(long = "ref", required = true)]
    refs: Vec<PathBuf>,
    /// Comma-separated metric names.
    #[arg(long, default_value = "bleu,meteor,meteor-hindi")]
    metrics: String,
    /// Human ratings, `line_no<TAB>rating` with ratings 1-5.
    #[arg(long)]
    ratings: Option<PathBuf>,
    /// mean-over-5 or mean-minus-1-over-4.
    #[arg(long, default_value = "mean-over-5")]
    human_mapping: String,
    #[command(flatten)]
    params: MetricParams,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct RankArgs {
    /// LABEL=FILE. Repeat for each engine.
    #[arg(long = "engine", required = true)]
    engines: Vec<String>,
    #[arg(long = "ref", required = true)]
    refs: Vec<PathBuf>,
    #[arg(long, default_value = "bleu,meteor,meteor-hindi")]
    metrics: String,
    /// Per-engine ratings, `engine<TAB>line_no<TAB>rating`.
    #[arg(long)]
    ratings_per_engine: Option<PathBuf>,
    #[arg(long, default_value = "mean-over-5")]
    human_mapping: String,
    #[command(flatten)]
    params: MetricParams,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Debug, Args)]
struct MetricParams {
    /// Highest BLEU n-gram order.
    #[arg(long, default_value_t = 4)]
    max_n: usize,
    /// Comma-separated BLEU weights (default uniform).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    weights: Option<Vec<f64>>,
    /// none or add-one-high-order.
    #[arg(long, default_value = "none")]
    smoothing: String,
    /// recall-weighted or harmonic.
    #[arg(long, default_value = "recall-weighted")]
    fmean: String,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    gamma: f64,
    #[arg(long, default_value_t = 3.0, allow_hyphen_values = true)]
    beta: f64,
    /// Clause-match weight for METEOR-Hindi.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    lambda: f64,
    #[arg(long, default_value = "V")]
    verb_tag_prefix: String,
    /// Directory holding stems.tsv, synsets.txt, pos.tsv, function_words.txt.
    #[arg(long, env = "HINDEVAL_RESOURCES")]
    resources: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Write the JSON report here.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Print the JSON report instead of text.
    #[arg(long)]
    json: bool,
}

/// Every input and parameter of a run, embedded in its report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub candidate: Option<PathBuf>,
    pub references: Vec<PathBuf>,
    pub engines: Vec<EngineInput>,
    pub metrics: Vec<MetricConfig>,
    pub ratings: Option<PathBuf>,
    pub human_mapping: Option<HumanMapping>,
    pub resources_dir: Option<PathBuf>,
    pub sentence_level: bool,
}

impl MetricParams {
    fn build(&self, kind: MetricKind) -> Result<MetricConfig> {
        let config = match kind {
            MetricKind::Bleu => {
                let smoothing: Smoothing = self.smoothing.parse()?;
                let base = match &self.weights {
                    Some(w) => BleuConfig {
                        max_n: self.max_n,
                        weights: w.clone(),
                        smoothing,
                    },
                    None if self.max_n == 0 => return Err(Error::InvalidArgument("max_n must be at least 1".into())),
                    None => BleuConfig::uniform(self.max_n).with_smoothing(smoothing),
                };
                MetricConfig::Bleu(base)
            }
            MetricKind::Meteor | MetricKind::MeteorHindi => {
                let stages = if kind == MetricKind::Meteor {
                    MeteorConfig::base().stages
                } else {
                    MeteorConfig::hindi().stages
                };
                let c = MeteorConfig {
                    stages,
                    fmean: self.fmean.parse::<FmeanMode>()?,
                    gamma: self.gamma,
                    beta: self.beta,
                    lambda: self.lambda,
                    verb_tag_prefix: self.verb_tag_prefix.clone(),
                };
                if kind == MetricKind::Meteor {
                    MetricConfig::Meteor(c)
                } else {
                    MetricConfig::MeteorHindi(c)
                }
            }
        };
        config.validate()?;
        Ok(config)
    }

    fn build_all(&self, names: &str) -> Result<Vec<MetricConfig>> {
        let mut out: Vec<MetricConfig> = Vec::new();
        for name in names.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let config = self.build(name.parse()?)?;
            if out.iter().any(|c| c.kind() == config.kind()) {
                return Err(Error::InvalidArgument(format!("metric '{name}' listed twice")));
            }
            out.push(config);
        }
        if out.is_empty() {
            return Err(Error::InvalidArgument("no metrics given".into()));
        }
        Ok(out)
    }

    fn load_resources(&self) -> Result<ResourceSet> {
        match &self.resources {
            None => Ok(ResourceSet::empty()),
            Some(dir) => {
                if !dir.is_dir() {
                    return Err(Error::io(
                        dir,
                        std::io::Error::new(std::io::ErrorKind::NotFound, "resource directory not found"),
                    ));
                }
                load_resources(&ResourcePaths::from_dir(dir))
            }
        }
    }
}

/// Tables the configured stages read.
fn needed_tables(config: &MetricConfig) -> Vec<&'static str> {
    let stages = match config {
        MetricConfig::Bleu(_) => return Vec::new(),
        MetricConfig::Meteor(c) | MetricConfig::MeteorHindi(c) => &c.stages,
    };
    let mut out = Vec::new();
    for stage in stages {
        let table = match stage {
            MatchStage::Exact => continue,
            MatchStage::Stem => "stems",
            MatchStage::Synonym => "synsets",
            MatchStage::Lwg => "function_words",
            MatchStage::Pos => "pos",
        };
        out.push(table);
    }
    if matches!(config, MetricConfig::MeteorHindi(_)) && !out.contains(&"pos") {
        // clause segmentation reads POS tags
        out.push("pos");
    }
    out.sort_unstable();
    out
}

fn resource_warnings(metrics: &[MetricConfig], resources: &ResourceSet, err: &mut dyn Write) -> Result<()> {
    let missing = resources.manifest().missing();
    for m in metrics {
        let lacking: Vec<&str> = needed_tables(m).into_iter().filter(|t| missing.contains(t)).collect();
        if lacking.is_empty() {
            continue;
        }
        let name = m.kind().name();
        if m.kind() == MetricKind::MeteorHindi && resources.is_empty() {
            writeln!(err, "warning: {name}: resources missing; degraded to base pipeline")
        } else {
            writeln!(
                err,
                "warning: {name}: resource tables missing ({}); their stages match nothing",
                lacking.join(", ")
            )
        }
        .map_err(|e| Error::io("<stderr>", e))?;
    }
    Ok(())
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<()> {
    out.write_all(text.as_bytes()).map_err(|e| Error::io("<stdout>", e))
}

fn emit(report: &Report, args: &OutputArgs, out: &mut dyn Write, text: &str) -> Result<()> {
    let json = report.to_json();
    if let Some(path) = &args.output {
        std::fs::write(path, &json).map_err(|e| Error::io(path, e))?;
    }
    write_out(out, if args.json { &json } else { text })
}

fn bleu_text(s: &BleuScore) -> String {
    let mut t = String::new();
    for (n, p) in s.precisions.iter().enumerate() {
        match p.value() {
            Some(v) => t.push_str(&format!("p{}: {v:.4} ({}/{})\n", n + 1, p.matched, p.total)),
            None => t.push_str(&format!("p{}: undefined (0/0)\n", n + 1)),
        }
    }
    t.push_str(&format!("bp: {:.4} (c={}, r={})\n", s.bp, s.cand_len, s.ref_len));
    t
}

fn meteor_text(s: &MeteorScore) -> String {
    let mut t = format!(
        "matches: {} (cand {}, ref {})\nprecision: {:.4}\nrecall: {:.4}\nfmean: {:.4}\nchunks: {}\npenalty: {:.4}\n",
        s.matches, s.cand_len, s.ref_len, s.precision, s.recall, s.fmean, s.chunks, s.penalty
    );
    if !s.stage_histogram.is_empty() {
        let parts: Vec<String> = s.stage_histogram.iter().map(|(k, v)| format!("{k}={v}")).collect();
        t.push_str(&format!("stages: {}\n", parts.join(" ")));
    }
    if let Some(c) = &s.clauses {
        t.push_str(&format!("clauses: {}/{} matched\n", c.matched, c.total));
    }
    t
}

fn run_score(args: ScoreArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let metric = args.params.build(args.metric.parse()?)?;
    let resources = args.params.load_resources()?;
    let corpus = load_corpus(&args.cand, &args.refs)?;
    resource_warnings(std::slice::from_ref(&metric), &resources, err)?;

    let result = score_corpus(&corpus, &metric, &resources)?;
    if let Some(b) = &result.bleu {
        if !b.undefined_orders.is_empty() {
            let orders: Vec<String> = b.undefined_orders.iter().map(usize::to_string).collect();
            writeln!(
                err,
                "warning: no candidate n-grams of order {}; those orders were dropped",
                orders.join(", ")
            )
            .map_err(|e| Error::io("<stderr>", e))?;
        }
    }

    let mut text = format!("metric: {}\n", metric.kind().name());
    if let Some(b) = &result.bleu {
        text.push_str(&bleu_text(b));
    }
    if let Some(m) = &result.meteor {
        text.push_str(&meteor_text(m));
    }
    text.push_str(&format!("score: {:.4}\n", result.score));

    let mut report = Report::new(
        RunConfig {
            command: "score".into(),
            candidate: Some(args.cand.clone()),
            references: args.refs.clone(),
            engines: Vec::new(),
            metrics: vec![metric.clone()],
            ratings: None,
            human_mapping: None,
            resources_dir: args.params.resources.clone(),
            sentence_level: args.sentence_level,
        },
        resources.manifest().clone(),
    );
    if args.sentence_level {
        let sentences = score_sentences(&corpus, &metric, &resources)?;
        text.push_str("line\tscore\n");
        for s in &sentences {
            text.push_str(&format!("{}\t{:.4}\n", s.line_no, s.score));
        }
        report.sentence_scores = Some(BTreeMap::from([(metric.kind().name().to_string(), sentences)]));
    }
    report.scores.push(result);
    emit(&report, &args.out, out, &text)
}

fn run_compare(args: CompareArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let metrics = args.params.build_all(&args.metrics)?;
    let mapping: HumanMapping = args.human_mapping.parse()?;
    let resources = args.params.load_resources()?;
    let corpus = load_corpus(&args.cand, &args.refs)?;
    let ratings = args.ratings.as_deref().map(load_ratings).transpose()?;
    if let Some(rs) = &ratings {
        if let Some(r) = rs.iter().find(|r| r.line_no > corpus.len()) {
            writeln!(
                err,
                "warning: ratings mention line {} but the corpus has {} lines",
                r.line_no,
                corpus.len()
            )
            .map_err(|e| Error::io("<stderr>", e))?;
        }
    }
    resource_warnings(&metrics, &resources, err)?;

    let rows = compare_metrics(&corpus, &metrics, &resources, ratings.as_deref().map(|r| (r, mapping)))?;

    let mut report = Report::new(
        RunConfig {
            command: "compare".into(),
            candidate: Some(args.cand.clone()),
            references: args.refs.clone(),
            engines: Vec::new(),
            metrics: metrics.clone(),
            ratings: args.ratings.clone(),
            human_mapping: ratings.as_ref().map(|_| mapping),
            resources_dir: args.params.resources.clone(),
            sentence_level: false,
        },
        resources.manifest().clone(),
    );
    report.scores = metrics
        .iter()
        .map(|m| score_corpus(&corpus, m, &resources))
        .collect::<Result<_>>()?;
    report.human = ratings.as_deref().and_then(|r| normalize_human(r, mapping));
    report.comparison = Some(rows.clone());
    emit(&report, &args.out, out, &render_comparison(&rows))
}

fn parse_engine(spec: &str) -> Result<EngineInput> {
    match spec.split_once('=') {
        Some((label, path)) if !label.is_empty() && !path.is_empty() => Ok(EngineInput {
            label: label.to_string(),
            path: PathBuf::from(path),
        }),
        _ => Err(Error::InvalidArgument(format!("engine '{spec}' is not LABEL=FILE"))),
    }
}

fn ranking_text(ranking: &Ranking) -> String {
    let mut t = String::new();
    for r in &ranking.rankings {
        let label = r
            .metric
            .parse::<MetricKind>()
            .map(MetricKind::label)
            .unwrap_or(&r.metric);
        t.push_str(&format!("{label}\n"));
        for e in &r.engines {
            t.push_str(&format!("{}\t{}\t{:.4}\n", e.rank, e.label, e.score));
        }
        if let Some(rho) = r.spearman_vs_human {
            t.push_str(&format!("spearman vs human: {rho:.4}\n"));
        }
    }
    t
}

fn run_rank(args: RankArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<()> {
    let engines = args
        .engines
        .iter()
        .map(|s| parse_engine(s))
        .collect::<Result<Vec<_>>>()?;
    if engines.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "ranking needs at least 2 engines, got {}",
            engines.len()
        )));
    }
    let metrics = args.params.build_all(&args.metrics)?;
    let mapping: HumanMapping = args.human_mapping.parse()?;
    let resources = args.params.load_resources()?;
    resource_warnings(&metrics, &resources, err)?;

    let human = match &args.ratings_per_engine {
        None => None,
        Some(path) => {
            let by_engine = load_engine_ratings(path)?;
            for label in by_engine.keys() {
                if !engines.iter().any(|e| &e.label == label) {
                    writeln!(err, "warning: ratings given for unknown engine '{label}'")
                        .map_err(|e| Error::io("<stderr>", e))?;
                }
            }
            Some(
                by_engine
                    .iter()
                    .filter_map(|(k, v)| normalize_human(v, mapping).map(|h| (k.clone(), h)))
                    .collect::<BTreeMap<String, f64>>(),
            )
        }
    };

    let ranking = rank_engines(&engines, &args.refs, &metrics, &resources, human.as_ref())?;
    let mut report = Report::new(
        RunConfig {
            command: "rank".into(),
            candidate: None,
            references: args.refs.clone(),
            engines: engines.clone(),
            metrics: metrics.clone(),
            ratings: args.ratings_per_engine.clone(),
            human_mapping: human.as_ref().map(|_| mapping),
            resources_dir: args.params.resources.clone(),
            sentence_level: false,
        },
        resources.manifest().clone(),
    );
    let text = ranking_text(&ranking);
    report.ranking = Some(ranking);
    emit(&report, &args.out, out, &text)
}

fn exit_code(e: &Error) -> i32 {
    if e.is_config_error() {
        EXIT_CONFIG
    } else {
        EXIT_INPUT
    }
}

/// Parses `args` (program name first), runs the subcommand and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_CONFIG
                }
            };
        }
    };
    let result = match cli.command {
        Command::Score(a) => run_score(a, out, err),
        Command::Compare(a) => run_compare(a, out, err),
        Command::Rank(a) => run_rank(a, out, err),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Convenience for tests: the exit code plus captured stdout and stderr.
pub fn run_captured<I, T>(args: I) -> (i32, String, String)
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let mut out = Vec::new();
    let mut err = Vec::new();
    let code = run(args, &mut out, &mut err);
    (
        code,
        String::from_utf8_lossy(&out).into_owned(),
        String::from_utf8_lossy(&err).into_owned(),
    )
}
