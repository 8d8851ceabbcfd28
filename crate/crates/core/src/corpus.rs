//! Line-aligned candidate/reference corpora.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::text::Segment;

/// One candidate with its line-aligned references.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalUnit {
    pub candidate: Segment,
    pub references: Vec<Segment>,
    /// 1-based line number in the source files.
    pub line_no: usize,
}

impl EvalUnit {
    pub fn new(candidate: Segment, references: Vec<Segment>, line_no: usize) -> Result<Self> {
        if references.is_empty() {
            return Err(Error::InvalidArgument(format!(
                "unit at line {line_no} has no references"
            )));
        }
        Ok(EvalUnit {
            candidate,
            references,
            line_no,
        })
    }

    /// Convenience constructor from raw strings; line number 1.
    pub fn from_text(candidate: &str, references: &[&str]) -> Self {
        EvalUnit {
            candidate: Segment::parse(candidate),
            references: references.iter().map(|r| Segment::parse(r)).collect(),
            line_no: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub units: Vec<EvalUnit>,
    pub n_refs: usize,
}

impl Corpus {
    /// Builds a corpus from in-memory lines: `references[k]` is the k-th reference set.
    pub fn from_lines<S: AsRef<str>>(candidates: &[S], references: &[Vec<S>]) -> Result<Corpus> {
        if references.is_empty() {
            return Err(Error::InvalidArgument("at least one reference set is required".into()));
        }
        if let Some(bad) = references.iter().find(|r| r.len() != candidates.len()) {
            return Err(Error::InvalidArgument(format!(
                "reference set has {} lines, candidates have {}",
                bad.len(),
                candidates.len()
            )));
        }
        let units = candidates
            .iter()
            .enumerate()
            .map(|(i, cand)| EvalUnit {
                candidate: Segment::parse(cand.as_ref()),
                references: references.iter().map(|r| Segment::parse(r[i].as_ref())).collect(),
                line_no: i + 1,
            })
            .collect();
        Ok(Corpus {
            units,
            n_refs: references.len(),
        })
    }

    pub fn len(&self) -> usize {
        self.units.len()
    }

    pub fn is_empty(&self) -> bool {
        self.units.is_empty()
    }
}

/// Reads a UTF-8 file and splits it into lines (LF or CRLF). A trailing
/// newline does not open an extra line; blank lines inside the file are kept.
pub fn read_lines(path: &Path) -> Result<Vec<String>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| Error::Encoding {
        path: path.to_path_buf(),
        offset: e.valid_up_to(),
    })?;
    Ok(split_lines(text))
}

pub(crate) fn split_lines(text: &str) -> Vec<String> {
    if text.is_empty() {
        return Vec::new();
    }
    let body = text.strip_suffix('\n').unwrap_or(text);
    body.split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l).to_string())
        .collect()
}

/// Loads a candidate file and one or more parallel reference files.
pub fn load_corpus<P: AsRef<Path>>(candidate_path: &Path, reference_paths: &[P]) -> Result<Corpus> {
    if reference_paths.is_empty() {
        return Err(Error::InvalidArgument("at least one reference file is required".into()));
    }
    let candidates = read_lines(candidate_path)?;
    if candidates.is_empty() {
        return Err(Error::EmptyCandidate {
            path: candidate_path.to_path_buf(),
        });
    }
    let references = reference_paths
        .iter()
        .map(|p| read_lines(p.as_ref()))
        .collect::<Result<Vec<_>>>()?;

    if references.iter().any(|r| r.len() != candidates.len()) {
        let mut counts: Vec<(PathBuf, usize)> = vec![(candidate_path.to_path_buf(), candidates.len())];
        counts.extend(
            reference_paths
                .iter()
                .zip(&references)
                .map(|(p, r)| (p.as_ref().to_path_buf(), r.len())),
        );
        return Err(Error::LineCountMismatch(counts));
    }
    Corpus::from_lines(&candidates, &references)
}
