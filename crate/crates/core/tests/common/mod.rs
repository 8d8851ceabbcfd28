#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use hindeval::align::{crossings, select_alignment, MatchStage};
use hindeval::bleu::{bleu_corpus, brevity_penalty, BleuConfig};
use hindeval::cli::RunConfig;
use hindeval::corpus::{Corpus, EvalUnit};
use hindeval::hindi::{clause_split, lwg_split, meteor_hindi, meteor_hindi_corpus};
use hindeval::meteor::{align_segments, meteor_corpus, meteor_unit, MeteorConfig};
use hindeval::ngram::{clipped_matches, extract_ngrams};
use hindeval::report::{
    normalize_human, rank_by, rank_correlation, score_corpus, EngineResult, HumanMapping, HumanRating, MetricConfig,
    MetricKind, Report,
};
use hindeval::resources::{load_resources, ResourcePaths, ResourceSet};
use hindeval::text::{tokenize, Segment};
use proptest::prelude::*;
use proptest::test_runner::{RngAlgorithm, TestCaseError, TestRng};

pub const ALPHABET: [&str; 5] = ["a", "b", "c", "d", "e"];

pub fn toy_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join("toy")
}

pub fn toy_resources() -> ResourceSet {
    load_resources(&ResourcePaths::from_dir(&toy_dir())).expect("toy lexicons load")
}

/// Tables over the five-letter alphabet so every stage can fire on random input.
pub fn alphabet_resources() -> ResourceSet {
    ResourceSet::empty()
        .with_stems([("a", "a"), ("b", "a")])
        .unwrap()
        .with_synsets([vec!["c", "d"]])
        .with_pos([("a", "NN"), ("b", "NN"), ("c", "VM"), ("d", "VAUX"), ("e", "PSP")])
        .unwrap()
        .with_function_words(["d", "e"])
}

pub fn rng(seed: u8) -> TestRng {
    TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32])
}

pub fn words(tokens: &[usize]) -> String {
    tokens.iter().map(|&t| ALPHABET[t]).collect::<Vec<_>>().join(" ")
}

pub fn random_line(rng: &mut TestRng, max_len: usize) -> String {
    let len = rng.random_range(0..=max_len);
    let tokens: Vec<usize> = (0..len).map(|_| rng.random_range(0..ALPHABET.len())).collect();
    words(&tokens)
}

pub fn corpus_of(cands: &[String], refs: &[Vec<String>]) -> Corpus {
    Corpus::from_lines(cands, refs).expect("well-formed corpus")
}

// ---------------------------------------------------------------- desk corpus

const SUBJECTS: [&str; 8] = ["राम", "सीता", "मोहन", "गीता", "किसान", "शिक्षक", "लड़का", "लड़की"];
const OBJECTS: [(&str, Option<&str>); 6] = [
    ("किताब", Some("पुस्तक")),
    ("पत्र", Some("चिट्ठी")),
    ("खाना", Some("भोजन")),
    ("पानी", Some("जल")),
    ("सेब", None),
    ("फल", None),
];
const PLACES: [(&str, Option<&str>); 4] = [
    ("घर", Some("मकान")),
    ("शहर", Some("नगर")),
    ("बाज़ार", None),
    ("स्कूल", None),
];
const ADJECTIVES: [(&str, Option<&str>); 5] = [
    ("सुंदर", Some("खूबसूरत")),
    ("बड़ा", Some("विशाल")),
    ("नया", None),
    ("लाल", None),
    ("पुराना", None),
];
const VERBS: [(&str, &str); 6] = [
    ("खाया", "खाई"),
    ("पढ़ा", "पढ़ी"),
    ("लिखा", "लिखी"),
    ("खरीदा", "खरीदी"),
    ("देखा", "देखी"),
    ("लाया", "लाई"),
];

fn pick<T: Copy>(rng: &mut TestRng, items: &[T]) -> T {
    items[rng.random_range(0..items.len())]
}

fn swap_syn(rng: &mut TestRng, word: (&'static str, Option<&'static str>)) -> &'static str {
    match word.1 {
        Some(alt) if rng.random_bool(0.5) => alt,
        _ => word.0,
    }
}

/// One reference clause and a perturbed candidate of it: synonym swaps,
/// verb inflection changes, phrase reordering and the odd substituted name.
pub fn desk_pair(rng: &mut TestRng) -> (Vec<&'static str>, Vec<&'static str>) {
    let subject = pick(rng, &SUBJECTS);
    let object = pick(rng, &OBJECTS);
    let place = pick(rng, &PLACES);
    let adjective = pick(rng, &ADJECTIVES);
    let verb = pick(rng, &VERBS);
    let with_aux = rng.random_bool(0.3);

    let mut reference = vec![subject, "ने", place.0, "में", adjective.0, object.0, verb.0];
    if with_aux {
        reference.push("था");
    }
    reference.push("।");

    let cand_subject = if rng.random_bool(0.15) {
        pick(rng, &SUBJECTS)
    } else {
        subject
    };
    let subject_phrase = vec![cand_subject, "ने"];
    let place_phrase = vec![swap_syn(rng, place), "में"];
    let object_phrase = vec![swap_syn(rng, adjective), swap_syn(rng, object)];
    let verb_form = if rng.random_bool(0.4) { verb.1 } else { verb.0 };

    let mut phrases = [subject_phrase, place_phrase, object_phrase];
    match rng.random_range(0..4) {
        0 => phrases.swap(0, 1),
        1 => phrases.rotate_left(1),
        2 => phrases.swap(1, 2),
        _ => {}
    }
    let mut cand: Vec<&'static str> = phrases.concat();
    cand.push(verb_form);
    if with_aux {
        cand.push(if verb_form == verb.1 { "थी" } else { "था" });
    }
    cand.push("।");
    (cand, reference)
}

/// 50 deterministic desk units, one reference each.
pub fn desk_corpus() -> (Vec<String>, Vec<Vec<String>>) {
    let mut rng = rng(7);
    let mut cands = Vec::new();
    let mut refs = Vec::new();
    for _ in 0..50 {
        let (c, r) = desk_pair(&mut rng);
        cands.push(c.join(" "));
        refs.push(r.join(" "));
    }
    (cands, vec![refs])
}

/// `n_units` units of two joined clauses (about 15 to 20 tokens each).
pub fn long_desk_corpus(n_units: usize, seed: u8) -> (Vec<String>, Vec<Vec<String>>) {
    let mut rng = rng(seed);
    let mut cands = Vec::new();
    let mut refs = Vec::new();
    for _ in 0..n_units {
        let (mut c1, mut r1) = desk_pair(&mut rng);
        let (c2, r2) = desk_pair(&mut rng);
        c1.pop();
        r1.pop();
        c1.push("और");
        r1.push("और");
        c1.extend(c2);
        r1.extend(r2);
        cands.push(c1.join(" "));
        refs.push(r1.join(" "));
    }
    (cands, vec![refs])
}

// ---------------------------------------------------------------- oracles

/// Clipped matches computed by handing out reference occurrences one at a time.
pub fn oracle_clipped(cand: &[&str], refs: &[Vec<&str>], n: usize) -> u64 {
    let grams = |toks: &[&str]| -> Vec<Vec<String>> {
        if toks.len() < n {
            return Vec::new();
        }
        toks.windows(n)
            .map(|w| w.iter().map(|s| s.to_string()).collect())
            .collect()
    };
    let cand_grams = grams(cand);
    let mut distinct: Vec<&Vec<String>> = Vec::new();
    for g in &cand_grams {
        if !distinct.contains(&g) {
            distinct.push(g);
        }
    }
    let mut total = 0;
    for g in distinct {
        let occurrences = cand_grams.iter().filter(|x| *x == g).count();
        let mut best = 0;
        for r in refs {
            let mut pool = grams(r);
            let mut consumed = 0;
            for _ in 0..occurrences {
                if let Some(pos) = pool.iter().position(|x| x == g) {
                    pool.remove(pos);
                    consumed += 1;
                }
            }
            best = best.max(consumed);
        }
        total += best;
    }
    total
}

type Best = (usize, u64, Vec<(usize, usize)>);

/// Best (cardinality, crossings, pairs) over every injective matching of equal tokens.
pub fn oracle_alignment(cand: &[&str], reference: &[&str]) -> Best {
    fn walk(
        i: usize,
        cand: &[&str],
        reference: &[&str],
        used: &mut Vec<bool>,
        current: &mut Vec<(usize, usize)>,
        best: &mut Option<Best>,
    ) {
        if i == cand.len() {
            let key = (current.len(), crossings(current), current.clone());
            let better = match best {
                None => true,
                Some((m, x, p)) => key.0 > *m || (key.0 == *m && (key.1 < *x || (key.1 == *x && key.2 < *p))),
            };
            if better {
                *best = Some(key);
            }
            return;
        }
        walk(i + 1, cand, reference, used, current, best);
        for j in 0..reference.len() {
            if !used[j] && cand[i] == reference[j] {
                used[j] = true;
                current.push((i, j));
                walk(i + 1, cand, reference, used, current, best);
                current.pop();
                used[j] = false;
            }
        }
    }
    let mut best = None;
    walk(
        0,
        cand,
        reference,
        &mut vec![false; reference.len()],
        &mut Vec::new(),
        &mut best,
    );
    best.unwrap()
}

pub fn exact_alignment(cand: &[&str], reference: &[&str]) -> Vec<(usize, usize)> {
    let mut proposals = Vec::new();
    for (i, c) in cand.iter().enumerate() {
        for (j, r) in reference.iter().enumerate() {
            if c == r {
                proposals.push((i, j));
            }
        }
    }
    select_alignment(&[(MatchStage::Exact, proposals)], cand.len(), reference.len()).index_pairs()
}

// ---------------------------------------------------------------- strategies

pub fn token_ids(max_len: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..ALPHABET.len(), 0..=max_len)
}

pub fn line(max_len: usize) -> impl Strategy<Value = String> {
    token_ids(max_len).prop_map(|t| words(&t))
}

/// (candidates, references per reference file) with `1..=max_refs` files.
pub fn small_corpus(max_units: usize, max_refs: usize) -> impl Strategy<Value = (Vec<String>, Vec<Vec<String>>)> {
    (1..=max_units, 1..=max_refs).prop_flat_map(|(units, n_refs)| {
        (
            prop::collection::vec(line(8), units),
            prop::collection::vec(prop::collection::vec(line(8), units), n_refs),
        )
    })
}

pub fn scores(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, 2..=max_len)
}

// ---------------------------------------------------------------- checks

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), TestCaseError> {
    if cond {
        Ok(())
    } else {
        Err(TestCaseError::fail(msg.into()))
    }
}

pub fn check_score_bounds(input: (Vec<String>, Vec<Vec<String>>)) -> Result<(), TestCaseError> {
    let corpus = corpus_of(&input.0, &input.1);
    let res = alphabet_resources();
    let b = bleu_corpus(&corpus, &BleuConfig::default()).unwrap();
    ensure((0.0..=1.0).contains(&b.score), format!("bleu {}", b.score))?;
    for p in &b.precisions {
        ensure(p.matched <= p.total, "matched exceeds total")?;
        if let Some(v) = p.value() {
            ensure((0.0..=1.0).contains(&v), "precision out of range")?;
        }
    }
    let base = MeteorConfig::base();
    let m = meteor_corpus(&corpus, &base, &res).unwrap();
    ensure((0.0..=1.0).contains(&m.score), format!("meteor {}", m.score))?;
    let mut hindi = MeteorConfig::hindi();
    hindi.lambda = 0.1;
    let h = meteor_hindi_corpus(&corpus, &hindi, &res).unwrap();
    ensure((0.0..=1.0).contains(&h.score), format!("meteor-hindi {}", h.score))?;
    for unit in &corpus.units {
        let s = meteor_unit(unit, &base, &res);
        ensure((0.0..=1.0).contains(&s.score), "unit meteor out of range")?;
        ensure((0.0..=base.gamma).contains(&s.penalty), "penalty outside [0, gamma]")?;
        if s.matches >= 1 {
            ensure(s.chunks >= 1 && s.chunks <= s.matches, "chunks outside [1, m]")?;
        }
    }
    Ok(())
}

pub fn check_brevity_penalty((c, r): (u64, u64)) -> Result<(), TestCaseError> {
    let bp = brevity_penalty(c, r);
    ensure((0.0..=1.0).contains(&bp), format!("bp {bp}"))?;
    if c > 0 {
        ensure((bp == 1.0) == (c >= r), format!("bp {bp} for c={c} r={r}"))?;
    }
    Ok(())
}

pub fn check_clip_monotone((cand, refs, extra): (String, Vec<String>, String)) -> Result<(), TestCaseError> {
    let c = tokenize(&cand);
    let mut rs: Vec<Segment> = refs.iter().map(|r| tokenize(r)).collect();
    let before: Vec<u64> = (1..=4)
        .map(|n| {
            let refs_n: Vec<_> = rs.iter().map(|r| extract_ngrams(r, n).unwrap()).collect();
            clipped_matches(&extract_ngrams(&c, n).unwrap(), &refs_n).unwrap()
        })
        .collect();
    rs.push(tokenize(&extra));
    for n in 1..=4 {
        let refs_n: Vec<_> = rs.iter().map(|r| extract_ngrams(r, n).unwrap()).collect();
        let after = clipped_matches(&extract_ngrams(&c, n).unwrap(), &refs_n).unwrap();
        ensure(
            after >= before[n - 1],
            format!("order {n}: {after} < {}", before[n - 1]),
        )?;
    }
    Ok(())
}

pub fn check_reorder_invariance((input, seed): ((Vec<String>, Vec<Vec<String>>), u64)) -> Result<(), TestCaseError> {
    let (cands, refs) = input;
    let n = cands.len();
    let mut order: Vec<usize> = (0..n).collect();
    // deterministic shuffle keyed by the seed
    order.sort_by_key(|&i| (i as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ seed);
    let cands2: Vec<String> = order.iter().map(|&i| cands[i].clone()).collect();
    let refs2: Vec<Vec<String>> = refs
        .iter()
        .map(|f| order.iter().map(|&i| f[i].clone()).collect())
        .collect();
    let a = corpus_of(&cands, &refs);
    let b = corpus_of(&cands2, &refs2);
    let res = alphabet_resources();
    for kind in MetricKind::ALL {
        let cfg = MetricConfig::defaults(kind);
        let x = score_corpus(&a, &cfg, &res).unwrap().score;
        let y = score_corpus(&b, &cfg, &res).unwrap().score;
        ensure(x.to_bits() == y.to_bits(), format!("{}: {x} vs {y}", kind.name()))?;
    }
    Ok(())
}

pub fn check_clip_oracle((cand, refs): (Vec<usize>, Vec<Vec<usize>>)) -> Result<(), TestCaseError> {
    let c_text = words(&cand);
    let r_texts: Vec<String> = refs.iter().map(|r| words(r)).collect();
    let c = tokenize(&c_text);
    let rs: Vec<Segment> = r_texts.iter().map(|r| tokenize(r)).collect();
    let c_tokens: Vec<&str> = c.surfaces().collect();
    let r_tokens: Vec<Vec<&str>> = rs.iter().map(|r| r.surfaces().collect()).collect();
    for n in 1..=4 {
        let refs_n: Vec<_> = rs.iter().map(|r| extract_ngrams(r, n).unwrap()).collect();
        let got = clipped_matches(&extract_ngrams(&c, n).unwrap(), &refs_n).unwrap();
        let want = oracle_clipped(&c_tokens, &r_tokens, n);
        ensure(got == want, format!("order {n}: {got} != oracle {want}"))?;
    }
    Ok(())
}

pub fn check_alignment_oracle((cand, reference): (Vec<usize>, Vec<usize>)) -> Result<(), TestCaseError> {
    let c: Vec<&str> = cand.iter().map(|&t| ALPHABET[t]).collect();
    let r: Vec<&str> = reference.iter().map(|&t| ALPHABET[t]).collect();
    let got = exact_alignment(&c, &r);
    let (m, x, pairs) = oracle_alignment(&c, &r);
    ensure(got.len() == m, format!("cardinality {} != {m}", got.len()))?;
    ensure(crossings(&got) == x, format!("crossings {} != {x}", crossings(&got)))?;
    ensure(got == pairs, format!("tie-break {got:?} != {pairs:?}"))?;
    Ok(())
}

pub fn check_alignment_shape((cand, reference): (String, String)) -> Result<(), TestCaseError> {
    let res = alphabet_resources();
    let c = tokenize(&cand);
    let r = tokenize(&reference);
    let a = align_segments(&c, &r, &MatchStage::ALL, &res).alignment;
    let b = align_segments(&c, &r, &MatchStage::ALL, &res).alignment;
    ensure(a == b, "alignment not deterministic")?;
    let mut cs: Vec<usize> = a.pairs.iter().map(|p| p.cand).collect();
    let mut rs: Vec<usize> = a.pairs.iter().map(|p| p.reference).collect();
    cs.dedup();
    rs.sort_unstable();
    rs.dedup();
    ensure(cs.len() == a.len() && rs.len() == a.len(), "alignment not injective")?;
    ensure(
        a.pairs.iter().all(|p| p.cand < c.len() && p.reference < r.len()),
        "index out of range",
    )?;
    Ok(())
}

pub fn check_stage_monotone((cand, reference): (String, String)) -> Result<(), TestCaseError> {
    let res = alphabet_resources();
    let c = tokenize(&cand);
    let r = tokenize(&reference);
    let mut prev = 0;
    for k in 1..=MatchStage::ALL.len() {
        let m = align_segments(&c, &r, &MatchStage::ALL[..k], &res).alignment.len();
        ensure(m >= prev, format!("{k} stages: m {m} < {prev}"))?;
        prev = m;
    }
    let unit = EvalUnit::from_text(&cand, &[&reference]);
    let base = meteor_unit(&unit, &MeteorConfig::base(), &res).matches;
    let hindi = meteor_hindi(&unit, &MeteorConfig::hindi(), &res).matches;
    ensure(hindi >= base, format!("meteor-hindi m {hindi} < meteor m {base}"))?;
    Ok(())
}

pub fn check_hindi_structure(text: String) -> Result<(), TestCaseError> {
    let res = alphabet_resources();
    let seg = tokenize(&text);
    let groups = lwg_split(&seg, &res);
    ensure(
        groups.iter().map(|g| g.len()).sum::<usize>() == seg.len(),
        "groups do not partition tokens",
    )?;
    let mut covered: Vec<usize> = groups
        .iter()
        .flat_map(|g| g.token_indices().collect::<Vec<_>>())
        .collect();
    covered.sort_unstable();
    ensure(
        covered == (0..seg.len()).collect::<Vec<_>>(),
        "group indices not a partition",
    )?;

    let clauses = clause_split(&seg, &res, "V");
    let mut next = 0;
    for c in &clauses {
        ensure(
            c.start == next && c.end > c.start,
            format!("clause gap or overlap at {next}"),
        )?;
        next = c.end;
    }
    ensure(next == seg.len(), "clauses do not cover the segment")?;
    Ok(())
}

pub fn check_tokenize_idempotent(text: String) -> Result<(), TestCaseError> {
    let once = tokenize(&text);
    let again = tokenize(&text);
    ensure(once.tokens == again.tokens, "tokenize not deterministic")?;
    let round = tokenize(&once.detokenize());
    ensure(
        round.surfaces().eq(once.surfaces()),
        "detokenize/tokenize changed tokens",
    )?;
    Ok(())
}

pub fn check_spearman((xs, seed): (Vec<f64>, u64)) -> Result<(), TestCaseError> {
    let ys: Vec<f64> = xs
        .iter()
        .enumerate()
        .map(|(i, x)| ((i as u64 ^ seed) % 7) as f64 + x / 10.0)
        .collect();
    let rho = rank_correlation(&xs, &ys);
    let reversed: Vec<f64> = ys.iter().map(|y| -y).collect();
    let anti = rank_correlation(&xs, &reversed);
    match (rho, anti) {
        (Some(a), Some(b)) => ensure((a + b).abs() < 1e-12, format!("{a} vs {b}"))?,
        (None, None) => {}
        _ => return Err(TestCaseError::fail("definedness differs under reversal")),
    }
    let transformed: Vec<f64> = xs.iter().map(|x| (3.0 * x).exp() + 1.0).collect();
    let same = rank_correlation(&transformed, &ys);
    ensure(
        same == rho,
        format!("monotone transform changed rho: {same:?} vs {rho:?}"),
    )?;
    if let Some(r) = rho {
        ensure((-1.0..=1.0).contains(&r), "rho out of range")?;
    }
    Ok(())
}

pub fn check_ranking(xs: Vec<f64>) -> Result<(), TestCaseError> {
    let results: Vec<EngineResult> = xs
        .iter()
        .enumerate()
        .map(|(i, &s)| EngineResult {
            label: format!("e{i:02}"),
            scores: BTreeMap::from([("bleu".to_string(), (s * 4.0).round() / 4.0)]),
            human: None,
        })
        .collect();
    let ranked = rank_by(&results, "bleu");
    let mut labels: Vec<&str> = ranked.engines.iter().map(|e| e.label.as_str()).collect();
    ensure(
        ranked.engines.windows(2).all(|w| w[0].score >= w[1].score),
        "not descending",
    )?;
    ensure(
        ranked
            .engines
            .windows(2)
            .all(|w| w[0].score > w[1].score || w[0].label < w[1].label),
        "ties not broken by label",
    )?;
    labels.sort_unstable();
    let mut expected: Vec<&str> = results.iter().map(|r| r.label.as_str()).collect();
    expected.sort_unstable();
    ensure(labels == expected, "ranking is not a permutation")?;
    Ok(())
}

pub fn check_human_monotone(ratings: Vec<(u8, u8)>) -> Result<(), TestCaseError> {
    let low: Vec<HumanRating> = ratings
        .iter()
        .enumerate()
        .map(|(i, &(a, _))| HumanRating {
            line_no: i + 1,
            rating: a,
        })
        .collect();
    let high: Vec<HumanRating> = ratings
        .iter()
        .enumerate()
        .map(|(i, &(a, b))| HumanRating {
            line_no: i + 1,
            rating: a.max(b),
        })
        .collect();
    for mapping in [HumanMapping::MeanOver5, HumanMapping::MeanMinus1Over4] {
        let l = normalize_human(&low, mapping).unwrap();
        let h = normalize_human(&high, mapping).unwrap();
        ensure(h >= l, format!("{mapping}: {h} < {l}"))?;
        ensure((0.0..=1.0).contains(&h), "human score out of range")?;
    }
    Ok(())
}

pub fn check_report_roundtrip(input: (Vec<String>, Vec<Vec<String>>)) -> Result<(), TestCaseError> {
    let corpus = corpus_of(&input.0, &input.1);
    let res = alphabet_resources();
    let metrics: Vec<MetricConfig> = MetricKind::ALL.into_iter().map(MetricConfig::defaults).collect();
    let mut report = Report::new(
        RunConfig {
            command: "compare".into(),
            candidate: Some("cand.txt".into()),
            references: vec!["ref.txt".into()],
            engines: Vec::new(),
            metrics: metrics.clone(),
            ratings: None,
            human_mapping: None,
            resources_dir: None,
            sentence_level: false,
        },
        res.manifest().clone(),
    );
    report.scores = metrics
        .iter()
        .map(|m| score_corpus(&corpus, m, &res).unwrap())
        .collect();
    let first = report.to_json();
    let parsed = Report::from_json(&first).map_err(|e| TestCaseError::fail(e.to_string()))?;
    let second = parsed.to_json();
    ensure(first == second, "report JSON not byte-identical after round trip")?;
    ensure(parsed == report, "parsed report differs")?;
    Ok(())
}

pub fn check_permutation_precision(tokens: Vec<usize>) -> Result<(), TestCaseError> {
    if tokens.is_empty() {
        return Ok(());
    }
    let mut shuffled = tokens.clone();
    shuffled.reverse();
    shuffled.rotate_left(tokens.len() / 2);
    let unit = EvalUnit::from_text(&words(&shuffled), &[&words(&tokens)]);
    let s = hindeval::bleu::bleu_sentence(&unit, &BleuConfig::single_order(1)).unwrap();
    ensure(
        s.precisions[0].value() == Some(1.0),
        "permutation lost unigram precision",
    )?;
    Ok(())
}
