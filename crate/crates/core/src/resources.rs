//! Lexical resources backing the stem, synonym, LWG and POS matchers.
//!
//! File formats (UTF-8, `#` starts a comment line, blank lines ignored):
//!
//! * `stems.tsv`: `surface<TAB>stem`
//! * `synsets.txt`: one synset per line, members separated by whitespace
//! * `pos.tsv`: `surface<TAB>tag`
//! * `function_words.txt`: one word per line
//!
//! Every entry is NFC-normalized on load so it compares equal to tokens.

use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::text::{normalize, Token};

pub const STEMS_FILE: &str = "stems.tsv";
pub const SYNSETS_FILE: &str = "synsets.txt";
pub const POS_FILE: &str = "pos.tsv";
pub const FUNCTION_WORDS_FILE: &str = "function_words.txt";

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ResourcePaths {
    pub stems: Option<PathBuf>,
    pub synsets: Option<PathBuf>,
    pub pos: Option<PathBuf>,
    pub function_words: Option<PathBuf>,
}

impl ResourcePaths {
    /// Picks up whichever of the four standard file names exist in `dir`.
    pub fn from_dir(dir: &Path) -> ResourcePaths {
        let pick = |name: &str| {
            let p = dir.join(name);
            p.is_file().then_some(p)
        };
        ResourcePaths {
            stems: pick(STEMS_FILE),
            synsets: pick(SYNSETS_FILE),
            pos: pick(POS_FILE),
            function_words: pick(FUNCTION_WORDS_FILE),
        }
    }
}

/// Where a table came from; embedded in reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableSource {
    pub path: String,
    pub sha256: String,
    pub entries: usize,
}

/// Source of each table, `None` when the file was not supplied.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceManifest {
    pub stems: Option<TableSource>,
    pub synsets: Option<TableSource>,
    pub pos: Option<TableSource>,
    pub function_words: Option<TableSource>,
}

#[derive(Debug, Clone, Default)]
pub struct ResourceSet {
    stems: HashMap<String, String>,
    synsets: Vec<Vec<String>>,
    synset_index: HashMap<String, Vec<usize>>,
    pos: HashMap<String, String>,
    function_words: HashSet<String>,
    manifest: ResourceManifest,
}

impl ResourceSet {
    pub fn empty() -> ResourceSet {
        ResourceSet::default()
    }

    pub fn manifest(&self) -> &ResourceManifest {
        &self.manifest
    }

    pub fn has_stems(&self) -> bool {
        !self.stems.is_empty()
    }

    pub fn has_synsets(&self) -> bool {
        !self.synsets.is_empty()
    }

    pub fn has_pos(&self) -> bool {
        !self.pos.is_empty()
    }

    pub fn has_function_words(&self) -> bool {
        !self.function_words.is_empty()
    }

    /// True when no table carries any entry.
    pub fn is_empty(&self) -> bool {
        !(self.has_stems() || self.has_synsets() || self.has_pos() || self.has_function_words())
    }

    /// Stem from the table, or the surface itself when absent.
    pub fn stem<'a>(&'a self, surface: &'a str) -> &'a str {
        self.stems.get(surface).map(String::as_str).unwrap_or(surface)
    }

    pub fn synsets(&self) -> &[Vec<String>] {
        &self.synsets
    }

    pub fn are_synonyms(&self, a: &str, b: &str) -> bool {
        match (self.synset_index.get(a), self.synset_index.get(b)) {
            (Some(xs), Some(ys)) => xs.iter().any(|x| ys.contains(x)),
            _ => false,
        }
    }

    pub fn pos_tag(&self, surface: &str) -> Option<&str> {
        self.pos.get(surface).map(String::as_str)
    }

    pub fn is_function_word(&self, surface: &str) -> bool {
        self.function_words.contains(surface)
    }

    pub fn with_stems<I, K, V>(mut self, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        for (i, (k, v)) in entries.into_iter().enumerate() {
            insert_unique(&mut self.stems, k.as_ref(), v.as_ref(), Path::new("<stems>"), i + 1)?;
        }
        Ok(self)
    }

    pub fn with_synsets<I, S, W>(mut self, sets: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: IntoIterator<Item = W>,
        W: AsRef<str>,
    {
        for set in sets {
            self.push_synset(set.into_iter().map(|w| normalize(w.as_ref())).collect());
        }
        self
    }

    pub fn with_pos<I, K, V>(mut self, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (K, V)>,
        K: AsRef<str>,
        V: AsRef<str>,
    {
        for (i, (k, v)) in entries.into_iter().enumerate() {
            insert_unique(&mut self.pos, k.as_ref(), v.as_ref(), Path::new("<pos>"), i + 1)?;
        }
        Ok(self)
    }

    pub fn with_function_words<I, W>(mut self, words: I) -> Self
    where
        I: IntoIterator<Item = W>,
        W: AsRef<str>,
    {
        self.function_words
            .extend(words.into_iter().map(|w| normalize(w.as_ref())));
        self
    }

    fn push_synset(&mut self, words: Vec<String>) {
        let mut members: Vec<String> = Vec::with_capacity(words.len());
        for w in words {
            if !w.is_empty() && !members.contains(&w) {
                members.push(w);
            }
        }
        if members.is_empty() {
            return;
        }
        let id = self.synsets.len();
        for m in &members {
            self.synset_index.entry(m.clone()).or_default().push(id);
        }
        self.synsets.push(members);
    }
}

/// Convenience accessor mirroring [`ResourceSet::stem`] for tokens.
pub fn stem_of<'a>(token: &'a Token, resources: &'a ResourceSet) -> &'a str {
    resources.stem(&token.surface)
}

fn insert_unique(map: &mut HashMap<String, String>, key: &str, value: &str, path: &Path, line: usize) -> Result<()> {
    let key = normalize(key);
    let value = normalize(value);
    if key.is_empty() || value.is_empty() {
        return Err(Error::malformed(path, line, "empty key or value"));
    }
    match map.get(&key) {
        Some(existing) if *existing != value => Err(Error::malformed(
            path,
            line,
            format!("'{key}' mapped to both '{existing}' and '{value}'"),
        )),
        Some(_) => Ok(()),
        None => {
            map.insert(key, value);
            Ok(())
        }
    }
}

/// Non-comment, non-blank lines with their 1-based line numbers.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
}

fn parse_pairs(text: &str, path: &Path, map: &mut HashMap<String, String>) -> Result<()> {
    for (line, l) in content_lines(text) {
        let fields: Vec<&str> = l.split('\t').collect();
        if fields.len() != 2 {
            return Err(Error::malformed(
                path,
                line,
                format!("expected 2 tab-separated fields, found {}", fields.len()),
            ));
        }
        if fields.iter().any(|f| f.trim().contains(char::is_whitespace)) {
            return Err(Error::malformed(path, line, "fields must be single tokens"));
        }
        insert_unique(map, fields[0].trim(), fields[1].trim(), path, line)?;
    }
    Ok(())
}

struct LoadedFile {
    text: String,
    source: TableSource,
}

fn read_table(path: &Path) -> Result<LoadedFile> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    let sha256 = hex::encode(Sha256::digest(&bytes));
    let text = String::from_utf8(bytes).map_err(|e| Error::Encoding {
        path: path.to_path_buf(),
        offset: e.utf8_error().valid_up_to(),
    })?;
    Ok(LoadedFile {
        text,
        source: TableSource {
            path: path.display().to_string(),
            sha256,
            entries: 0,
        },
    })
}

/// Loads whichever tables are given; missing ones stay empty and are `None` in the manifest.
pub fn load_resources(paths: &ResourcePaths) -> Result<ResourceSet> {
    let mut set = ResourceSet::empty();

    if let Some(path) = &paths.stems {
        let mut file = read_table(path)?;
        parse_pairs(&file.text, path, &mut set.stems)?;
        file.source.entries = set.stems.len();
        set.manifest.stems = Some(file.source);
    }
    if let Some(path) = &paths.synsets {
        let mut file = read_table(path)?;
        for (_, l) in content_lines(&file.text) {
            set.push_synset(normalize(l).split(' ').map(str::to_string).collect());
        }
        file.source.entries = set.synsets.len();
        set.manifest.synsets = Some(file.source);
    }
    if let Some(path) = &paths.pos {
        let mut file = read_table(path)?;
        parse_pairs(&file.text, path, &mut set.pos)?;
        file.source.entries = set.pos.len();
        set.manifest.pos = Some(file.source);
    }
    if let Some(path) = &paths.function_words {
        let mut file = read_table(path)?;
        for (line, l) in content_lines(&file.text) {
            let word = normalize(l);
            if word.contains(' ') {
                return Err(Error::malformed(path, line, "expected one word per line"));
            }
            set.function_words.insert(word);
        }
        file.source.entries = set.function_words.len();
        set.manifest.function_words = Some(file.source);
    }
    Ok(set)
}

impl ResourceManifest {
    /// Names of tables that were not supplied.
    pub fn missing(&self) -> Vec<&'static str> {
        [
            ("function_words", self.function_words.is_some()),
            ("pos", self.pos.is_some()),
            ("stems", self.stems.is_some()),
            ("synsets", self.synsets.is_some()),
        ]
        .into_iter()
        .filter(|(_, present)| !present)
        .map(|(name, _)| name)
        .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn loads_each_format() {
        let dir = tempfile::tempdir().unwrap();
        write(dir.path(), STEMS_FILE, "# comment\nलड़के\tलड़क\nलड़का\tलड़क\n");
        write(dir.path(), SYNSETS_FILE, "घर मकान गृह\n\n");
        write(dir.path(), POS_FILE, "सेब\tNN\nखाया\tVM\n");
        write(dir.path(), FUNCTION_WORDS_FILE, "ने\nमें\n");
        let res = load_resources(&ResourcePaths::from_dir(dir.path())).unwrap();

        assert_eq!(res.stem("लड़के"), "लड़क");
        assert_eq!(res.stem("लड़का"), "लड़क");
        assert_eq!(res.synsets().len(), 1);
        assert_eq!(res.synsets()[0].len(), 3);
        assert!(res.are_synonyms("घर", "गृह"));
        assert!(!res.are_synonyms("घर", "सेब"));
        assert_eq!(res.pos_tag("खाया"), Some("VM"));
        assert!(res.is_function_word("ने"));
        assert!(res.manifest().missing().is_empty());
        assert_eq!(res.manifest().stems.as_ref().unwrap().entries, 2);
        assert_eq!(res.manifest().stems.as_ref().unwrap().sha256.len(), 64);
    }

    #[test]
    fn nothing_supplied() {
        let res = load_resources(&ResourcePaths::default()).unwrap();
        assert!(res.is_empty());
        assert_eq!(res.manifest().missing(), ["function_words", "pos", "stems", "synsets"]);
        assert_eq!(res.stem("सेब"), "सेब");
    }

    #[test]
    fn precomposed_entries_match_tokens() {
        let dir = tempfile::tempdir().unwrap();
        // precomposed U+095C in the file, decomposed in text after NFC
        let p = write(
            dir.path(),
            STEMS_FILE,
            "\u{0932}\u{095C}\u{0915}\u{0947}\t\u{0932}\u{095C}\u{0915}\n",
        );
        let res = load_resources(&ResourcePaths {
            stems: Some(p),
            ..Default::default()
        })
        .unwrap();
        let token = &crate::text::Segment::parse("लड़के").tokens[0];
        assert_eq!(stem_of(token, &res), normalize("\u{0932}\u{095C}\u{0915}"));
    }

    #[test]
    fn malformed_line_names_file_and_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), STEMS_FILE, "a\tb\nbroken line\n");
        let err = load_resources(&ResourcePaths {
            stems: Some(p),
            ..Default::default()
        })
        .unwrap_err();
        assert!(matches!(err, Error::Malformed { line: 2, .. }), "{err}");
        assert!(err.to_string().contains("stems.tsv:2"));
    }

    #[test]
    fn conflicting_duplicate_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), POS_FILE, "सेब\tNN\nसेब\tNN\nसेब\tVM\n");
        let err = load_resources(&ResourcePaths {
            pos: Some(p),
            ..Default::default()
        })
        .unwrap_err();
        assert!(matches!(err, Error::Malformed { line: 3, .. }), "{err}");
    }

    #[test]
    fn synset_members_deduplicated() {
        let res = ResourceSet::empty().with_synsets([["घर", "मकान", "घर"]]);
        assert_eq!(res.synsets()[0], ["घर", "मकान"]);
    }
}
