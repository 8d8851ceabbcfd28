//! Unigram alignment with minimal crossings.
//!
//! Each matcher stage proposes candidate/reference pairs over positions that are
//! still unmapped. The stage keeps a maximum-cardinality injective subset; among
//! those it keeps one with the fewest crossings against everything aligned so
//! far, and among those the lexicographically smallest pair list.
//!
//! The search walks candidate positions left to right. A state is the current
//! position plus the set of reference positions used by this stage. Branches are
//! cut when they can no longer reach the stage's maximum matching size (checked
//! with augmenting paths), or when their crossing cost already meets the best
//! known solution. Suffix costs are memoized as exact values or lower bounds.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Matcher stages in pipeline order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatchStage {
    Exact,
    Stem,
    Synonym,
    Lwg,
    Pos,
}

impl MatchStage {
    pub const ALL: [MatchStage; 5] = [
        MatchStage::Exact,
        MatchStage::Stem,
        MatchStage::Synonym,
        MatchStage::Lwg,
        MatchStage::Pos,
    ];

    pub const BASE: [MatchStage; 3] = [MatchStage::Exact, MatchStage::Stem, MatchStage::Synonym];

    pub fn name(self) -> &'static str {
        match self {
            MatchStage::Exact => "exact",
            MatchStage::Stem => "stem",
            MatchStage::Synonym => "synonym",
            MatchStage::Lwg => "lwg",
            MatchStage::Pos => "pos",
        }
    }
}

impl fmt::Display for MatchStage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MatchStage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        MatchStage::ALL.into_iter().find(|st| st.name() == s).ok_or_else(|| {
            Error::InvalidArgument(format!("unknown stage '{s}' (valid: exact, stem, synonym, lwg, pos)"))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct AlignedPair {
    pub cand: usize,
    pub reference: usize,
    pub stage: MatchStage,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Alignment {
    /// Sorted by candidate index.
    pub pairs: Vec<AlignedPair>,
    /// Index of the reference this alignment was made against.
    pub ref_choice: usize,
}

impl Alignment {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn index_pairs(&self) -> Vec<(usize, usize)> {
        self.pairs.iter().map(|p| (p.cand, p.reference)).collect()
    }

    pub fn crossings(&self) -> u64 {
        crossings(&self.index_pairs())
    }

    pub fn is_cand_aligned(&self, cand: usize) -> bool {
        self.pairs.binary_search_by_key(&cand, |p| p.cand).is_ok()
    }
}

/// Pairs `(i, j)` and `(i2, j2)` cross when `(i - i2)(j - j2) < 0`.
pub fn crosses(a: (usize, usize), b: (usize, usize)) -> bool {
    (a.0 < b.0 && a.1 > b.1) || (a.0 > b.0 && a.1 < b.1)
}

pub fn crossings(pairs: &[(usize, usize)]) -> u64 {
    let mut n = 0;
    for (k, &a) in pairs.iter().enumerate() {
        for &b in &pairs[k + 1..] {
            if crosses(a, b) {
                n += 1;
            }
        }
    }
    n
}

/// Maximal runs of pairs that advance by one on both sides at once.
pub fn count_chunks(alignment: &Alignment) -> usize {
    let pairs = &alignment.pairs;
    if pairs.is_empty() {
        return 0;
    }
    1 + pairs
        .windows(2)
        .filter(|w| !(w[1].cand == w[0].cand + 1 && w[1].reference == w[0].reference + 1))
        .count()
}

/// Runs the stages in order, each over the positions left unmapped by the previous ones.
pub fn select_alignment(
    stage_pairs: &[(MatchStage, Vec<(usize, usize)>)],
    cand_len: usize,
    ref_len: usize,
) -> Alignment {
    let mut builder = AlignmentBuilder::new(cand_len, ref_len);
    for (stage, pairs) in stage_pairs {
        builder.add_stage(*stage, pairs);
    }
    builder.finish(0)
}

/// Incremental form of [`select_alignment`] for pipelines whose later stages
/// depend on what earlier stages consumed.
#[derive(Debug, Clone)]
pub struct AlignmentBuilder {
    cand_used: Vec<bool>,
    ref_used: Vec<bool>,
    pairs: Vec<AlignedPair>,
}

impl AlignmentBuilder {
    pub fn new(cand_len: usize, ref_len: usize) -> Self {
        AlignmentBuilder {
            cand_used: vec![false; cand_len],
            ref_used: vec![false; ref_len],
            pairs: Vec::new(),
        }
    }

    pub fn cand_free(&self, i: usize) -> bool {
        !self.cand_used[i]
    }

    pub fn ref_free(&self, j: usize) -> bool {
        !self.ref_used[j]
    }

    pub fn fixed_pairs(&self) -> Vec<(usize, usize)> {
        self.pairs.iter().map(|p| (p.cand, p.reference)).collect()
    }

    /// Selects from `proposals` (pairs touching mapped positions are ignored) and records the result.
    pub fn add_stage(&mut self, stage: MatchStage, proposals: &[(usize, usize)]) -> Vec<(usize, usize)> {
        let fixed = self.fixed_pairs();
        let edges: Vec<Edge> = proposals
            .iter()
            .filter(|&&(i, j)| self.cand_free(i) && self.ref_free(j))
            .map(|&(i, j)| Edge {
                left: i,
                right: j,
                fixed_cost: fixed.iter().filter(|&&f| crosses((i, j), f)).count() as u32,
            })
            .collect();
        let chosen = solve_min_crossing(&edges);
        self.commit(stage, &chosen);
        chosen
    }

    /// Records pairs chosen elsewhere. Panics if a position is already mapped.
    pub fn commit(&mut self, stage: MatchStage, chosen: &[(usize, usize)]) {
        for &(i, j) in chosen {
            assert!(!self.cand_used[i] && !self.ref_used[j], "position mapped twice");
            self.cand_used[i] = true;
            self.ref_used[j] = true;
            self.pairs.push(AlignedPair {
                cand: i,
                reference: j,
                stage,
            });
        }
    }

    pub fn finish(mut self, ref_choice: usize) -> Alignment {
        self.pairs.sort();
        Alignment {
            pairs: self.pairs,
            ref_choice,
        }
    }
}

/// A proposed link with its crossing count against already-fixed links.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub left: usize,
    pub right: usize,
    pub fixed_cost: u32,
}

/// Maximum-cardinality injective subset of `edges` with the fewest crossings
/// (among the chosen edges plus each edge's `fixed_cost`); ties go to the
/// lexicographically smallest sorted pair list.
pub fn solve_min_crossing(edges: &[Edge]) -> Vec<(usize, usize)> {
    if edges.is_empty() {
        return Vec::new();
    }
    Solver::new(edges).run()
}

const INF: u32 = u32::MAX / 4;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Mask(Vec<u64>);

impl Mask {
    fn empty(bits: usize) -> Self {
        Mask(vec![0; bits.div_ceil(64).max(1)])
    }

    fn contains(&self, j: usize) -> bool {
        self.0[j / 64] >> (j % 64) & 1 == 1
    }

    fn with(&self, j: usize) -> Mask {
        let mut m = self.clone();
        m.0[j / 64] |= 1 << (j % 64);
        m
    }

    fn count_above(&self, j: usize) -> u32 {
        let word = j / 64;
        let bit = j % 64;
        let mut n = if bit == 63 {
            0
        } else {
            (self.0[word] >> (bit + 1)).count_ones()
        };
        for w in &self.0[word + 1..] {
            n += w.count_ones();
        }
        n
    }

    fn intersects(&self, other: &Mask) -> bool {
        self.0.iter().zip(&other.0).any(|(a, b)| a & b != 0)
    }
}

struct Solver {
    /// Original left index for each search level.
    lefts: Vec<usize>,
    /// Original right index for each compact right id (increasing).
    rights: Vec<usize>,
    /// Per level: (compact right, fixed cost), sorted by right.
    options: Vec<Vec<(usize, u32)>>,
    /// Per compact right: twin rights (same left neighbourhood) with a larger index.
    twins_above: Vec<Mask>,
    n_rights: usize,
    cost_memo: HashMap<(usize, Mask), (u32, bool)>,
    match_memo: HashMap<(usize, Mask), usize>,
}

impl Solver {
    fn new(edges: &[Edge]) -> Self {
        let mut lefts: Vec<usize> = edges.iter().map(|e| e.left).collect();
        lefts.sort_unstable();
        lefts.dedup();
        let mut rights: Vec<usize> = edges.iter().map(|e| e.right).collect();
        rights.sort_unstable();
        rights.dedup();
        let n_rights = rights.len();

        let mut options = vec![Vec::new(); lefts.len()];
        let mut neighbours: Vec<Vec<usize>> = vec![Vec::new(); n_rights];
        for e in edges {
            let level = lefts.binary_search(&e.left).unwrap();
            let r = rights.binary_search(&e.right).unwrap();
            options[level].push((r, e.fixed_cost));
            neighbours[r].push(level);
        }
        for opts in &mut options {
            opts.sort_unstable();
            opts.dedup_by_key(|o| o.0);
        }
        for n in &mut neighbours {
            n.sort_unstable();
            n.dedup();
        }

        let mut twins_above = vec![Mask::empty(n_rights); n_rights];
        for a in 0..n_rights {
            for b in a + 1..n_rights {
                if neighbours[a] == neighbours[b] {
                    twins_above[a] = twins_above[a].with(b);
                }
            }
        }

        Solver {
            lefts,
            rights,
            options,
            twins_above,
            n_rights,
            cost_memo: HashMap::new(),
            match_memo: HashMap::new(),
        }
    }

    fn run(mut self) -> Vec<(usize, usize)> {
        let root = Mask::empty(self.n_rights);
        let best = self.solve(0, &root, INF);
        debug_assert!(best < INF);

        let mut chosen = Vec::new();
        let mut mask = root;
        let mut target = best;
        for level in 0..self.lefts.len() {
            let mut picked = false;
            for (option, cost) in self.feasible(level, &mask) {
                if cost > target {
                    continue;
                }
                let next = match option {
                    Some(r) => mask.with(r),
                    None => mask.clone(),
                };
                if cost + self.solve(level + 1, &next, target - cost + 1) == target {
                    if let Some(r) = option {
                        chosen.push((self.lefts[level], self.rights[r]));
                    }
                    mask = next;
                    target -= cost;
                    picked = true;
                    break;
                }
            }
            assert!(picked, "alignment search lost its optimum");
        }
        chosen
    }

    /// Options at `level` that keep the maximum matching size, in lexicographic
    /// order: takes by ascending right, then the skip (`None`).
    fn feasible(&mut self, level: usize, mask: &Mask) -> Vec<(Option<usize>, u32)> {
        let need = self.max_matching(level, mask);
        let mut out = Vec::new();
        if need == 0 {
            out.push((None, 0));
            return out;
        }
        for k in 0..self.options[level].len() {
            let (r, fixed) = self.options[level][k];
            if mask.contains(r) || mask.intersects(&self.twins_above[r]) {
                continue;
            }
            let next = mask.with(r);
            if 1 + self.max_matching(level + 1, &next) == need {
                out.push((Some(r), fixed + mask.count_above(r)));
            }
        }
        if self.max_matching(level + 1, mask) == need {
            out.push((None, 0));
        }
        out
    }

    /// Exact minimum suffix cost when it is below `limit`; otherwise a lower bound `>= limit`.
    fn solve(&mut self, level: usize, mask: &Mask, limit: u32) -> u32 {
        if level == self.lefts.len() {
            return 0;
        }
        let key = (level, mask.clone());
        if let Some(&(value, exact)) = self.cost_memo.get(&key) {
            if exact || value >= limit {
                return value;
            }
        }

        let mut best = INF;
        for (option, cost) in self.feasible(level, mask) {
            let cap = limit.min(best);
            let value = if cost >= cap {
                cost
            } else {
                let next = match option {
                    Some(r) => mask.with(r),
                    None => mask.clone(),
                };
                cost.saturating_add(self.solve(level + 1, &next, cap - cost)).min(INF)
            };
            best = best.min(value);
        }
        self.cost_memo.insert(key, (best, best < limit));
        best
    }

    /// Size of a maximum matching between levels `level..` and rights outside `mask`.
    fn max_matching(&mut self, level: usize, mask: &Mask) -> usize {
        let key = (level, mask.clone());
        if let Some(&n) = self.match_memo.get(&key) {
            return n;
        }
        let mut owner: Vec<Option<usize>> = vec![None; self.n_rights];
        let mut size = 0;
        for l in level..self.lefts.len() {
            let mut seen = vec![false; self.n_rights];
            if self.augment(l, mask, &mut owner, &mut seen) {
                size += 1;
            }
        }
        self.match_memo.insert(key, size);
        size
    }

    fn augment(&self, l: usize, mask: &Mask, owner: &mut [Option<usize>], seen: &mut [bool]) -> bool {
        for &(r, _) in &self.options[l] {
            if mask.contains(r) || seen[r] {
                continue;
            }
            seen[r] = true;
            if owner[r].is_none() || self.augment(owner[r].unwrap(), mask, owner, seen) {
                owner[r] = Some(l);
                return true;
            }
        }
        false
    }
}
