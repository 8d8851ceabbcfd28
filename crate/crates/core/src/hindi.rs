//! METEOR-Hindi extensions: local word groups, POS matching and clause matching.
//!
//! The full pipeline is exact → stem → synonym → LWG → POS. The clause-match
//! ratio is a diagnostic that can be blended into the final score with weight
//! `lambda` (default 0).

use crate::align::Alignment;
use crate::corpus::{Corpus, EvalUnit};
use crate::error::Result;
use crate::meteor::{aggregate, corpus_scores, score_unit, ClauseStats, MeteorConfig, MeteorScore};
use crate::resources::ResourceSet;
use crate::text::{is_danda, Segment, Token};

/// A content word followed by the function words that attach to it.
///
/// A segment that opens with function words puts them in a headless group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocalWordGroup {
    pub content: Option<Token>,
    pub attached: Vec<Token>,
}

impl LocalWordGroup {
    pub fn is_headless(&self) -> bool {
        self.content.is_none()
    }

    pub fn len(&self) -> usize {
        self.attached.len() + usize::from(self.content.is_some())
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn token_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.content.iter().chain(&self.attached).map(|t| t.index)
    }

    fn key<'a>(&'a self, resources: &'a ResourceSet) -> Option<(&'a str, Vec<&'a str>)> {
        let content = self.content.as_ref()?;
        let mut fws: Vec<&str> = self.attached.iter().map(|t| t.surface.as_str()).collect();
        fws.sort_unstable();
        Some((resources.stem(&content.surface), fws))
    }
}

/// Left-to-right grouping: each content word opens a group, function words join the latest one.
pub fn lwg_split(segment: &Segment, resources: &ResourceSet) -> Vec<LocalWordGroup> {
    let mut groups: Vec<LocalWordGroup> = Vec::new();
    for token in &segment.tokens {
        if resources.is_function_word(&token.surface) {
            match groups.last_mut() {
                Some(g) => g.attached.push(token.clone()),
                None => groups.push(LocalWordGroup {
                    content: None,
                    attached: vec![token.clone()],
                }),
            }
        } else {
            groups.push(LocalWordGroup {
                content: Some(token.clone()),
                attached: Vec::new(),
            });
        }
    }
    groups
}

/// Index pairs of groups whose content stems and function-word multisets agree.
pub fn lwg_group_pairs(
    cand_groups: &[LocalWordGroup],
    ref_groups: &[LocalWordGroup],
    resources: &ResourceSet,
) -> Vec<(usize, usize)> {
    let ref_keys: Vec<_> = ref_groups.iter().map(|g| g.key(resources)).collect();
    let mut out = Vec::new();
    for (g, cg) in cand_groups.iter().enumerate() {
        let Some(ck) = cg.key(resources) else { continue };
        for (h, rk) in ref_keys.iter().enumerate() {
            if rk.as_ref() == Some(&ck) {
                out.push((g, h));
            }
        }
    }
    out
}

/// Token pairs for two matching groups: content with content, then function
/// words paired by surface in order of occurrence.
pub fn group_token_pairs(cand: &LocalWordGroup, reference: &LocalWordGroup) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(cand.len());
    if let (Some(c), Some(r)) = (&cand.content, &reference.content) {
        out.push((c.index, r.index));
    }
    let mut taken = vec![false; reference.attached.len()];
    for c in &cand.attached {
        if let Some(k) =
            (0..reference.attached.len()).find(|&k| !taken[k] && reference.attached[k].surface == c.surface)
        {
            taken[k] = true;
            out.push((c.index, reference.attached[k].index));
        }
    }
    out
}

/// Member-token pairs of every matching group pair.
pub fn lwg_match(
    cand_groups: &[LocalWordGroup],
    ref_groups: &[LocalWordGroup],
    resources: &ResourceSet,
) -> Vec<(usize, usize)> {
    let mut out: Vec<(usize, usize)> = lwg_group_pairs(cand_groups, ref_groups, resources)
        .into_iter()
        .flat_map(|(g, h)| group_token_pairs(&cand_groups[g], &ref_groups[h]))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// Pairs of tagged tokens with identical POS tags; untagged tokens are skipped.
pub fn pos_match(cand: &[Token], reference: &[Token], resources: &ResourceSet) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for c in cand {
        let Some(ct) = resources.pos_tag(&c.surface) else {
            continue;
        };
        for r in reference {
            if resources.pos_tag(&r.surface) == Some(ct) {
                out.push((c.index, r.index));
            }
        }
    }
    out
}

/// Half-open token range of a segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Clause {
    pub start: usize,
    pub end: usize,
    pub contains_verb: bool,
}

impl Clause {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

fn is_verb(segment: &Segment, k: usize, resources: &ResourceSet, verb_prefix: &str) -> bool {
    resources
        .pos_tag(segment.surface(k))
        .is_some_and(|t| t.starts_with(verb_prefix))
}

/// Splits after each verb run and at each danda; a danda right after a verb
/// run closes that clause.
pub fn clause_split(segment: &Segment, resources: &ResourceSet, verb_prefix: &str) -> Vec<Clause> {
    let n = segment.len();
    if n == 0 {
        return Vec::new();
    }
    let verbs: Vec<bool> = (0..n).map(|k| is_verb(segment, k, resources, verb_prefix)).collect();
    if !verbs.contains(&true) {
        return vec![Clause {
            start: 0,
            end: n,
            contains_verb: false,
        }];
    }
    let danda = |k: usize| is_danda(segment.surface(k));
    let mut clauses = Vec::new();
    let mut start = 0;
    for k in 0..n {
        let close = danda(k) || (verbs[k] && (k + 1 == n || (!verbs[k + 1] && !danda(k + 1))));
        if close {
            clauses.push(Clause {
                start,
                end: k + 1,
                contains_verb: verbs[start..=k].contains(&true),
            });
            start = k + 1;
        }
    }
    if start < n {
        clauses.push(Clause {
            start,
            end: n,
            contains_verb: verbs[start..].contains(&true),
        });
    }
    clauses
}

/// Candidate clauses with at least half their tokens aligned and every verb aligned.
pub fn clause_match_counts(
    candidate: &Segment,
    alignment: &Alignment,
    resources: &ResourceSet,
    verb_prefix: &str,
) -> ClauseStats {
    let clauses = clause_split(candidate, resources, verb_prefix);
    let matched = clauses
        .iter()
        .filter(|c| {
            let aligned = (c.start..c.end).filter(|&k| alignment.is_cand_aligned(k)).count();
            let verbs_aligned = (c.start..c.end)
                .filter(|&k| is_verb(candidate, k, resources, verb_prefix))
                .all(|k| alignment.is_cand_aligned(k));
            2 * aligned >= c.len() && verbs_aligned
        })
        .count();
    ClauseStats {
        matched: matched as u64,
        total: clauses.len() as u64,
    }
}

pub fn clause_match_ratio(unit: &EvalUnit, alignment: &Alignment, resources: &ResourceSet, verb_prefix: &str) -> f64 {
    clause_match_counts(&unit.candidate, alignment, resources, verb_prefix).ratio()
}

/// METEOR with the Hindi stages; `config.lambda` blends in the clause-match ratio.
pub fn meteor_hindi(unit: &EvalUnit, config: &MeteorConfig, resources: &ResourceSet) -> MeteorScore {
    score_unit(unit, config, resources, true)
}

pub fn meteor_hindi_corpus(corpus: &Corpus, config: &MeteorConfig, resources: &ResourceSet) -> Result<MeteorScore> {
    Ok(aggregate(&corpus_scores(corpus, config, resources, true)?, config))
}
