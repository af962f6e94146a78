//! Dataset ingest, label vocabulary, multi-hot encoding and label statistics.
//!
//! Datasets are JSONL, one `{"id", "text", "labels"}` object per line. A TSV
//! import (`id<TAB>text<TAB>label,label,...`) is also accepted.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::fsio;

/// Ordered label names; a label's index is its position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabelVocabulary {
    labels: Vec<String>,
    index: HashMap<String, usize>,
}

impl LabelVocabulary {
    pub fn new<I, S>(labels: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        let mut index = HashMap::with_capacity(labels.len());
        for (i, label) in labels.iter().enumerate() {
            if label.is_empty() {
                return Err(Error::InvalidArgument("empty label name".into()));
            }
            if index.insert(label.clone(), i).is_some() {
                return Err(Error::DuplicateLabel(label.clone()));
            }
        }
        Ok(Self { labels, index })
    }

    /// Reads one label per non-blank line; line order is index order.
    pub fn load(path: &Path) -> Result<Self> {
        let raw = fsio::read_to_string(path)?;
        let labels: Vec<&str> = raw
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect();
        if labels.is_empty() {
            return Err(Error::EmptyVocabulary(path.to_path_buf()));
        }
        Self::new(labels)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn contains(&self, label: &str) -> bool {
        self.index.contains_key(label)
    }

    /// SHA-256 over the newline-joined label list, hex encoded. Models store
    /// this to detect being applied with a different vocabulary.
    pub fn fingerprint(&self) -> String {
        let mut h = Sha256::new();
        for label in &self.labels {
            h.update(label.as_bytes());
            h.update(b"\n");
        }
        hex::encode(h.finalize())
    }

    pub fn encode(&self, labels: &BTreeSet<String>) -> Result<MultiHot> {
        let mut bits = vec![false; self.len()];
        for label in labels {
            let i = self.index_of(label).ok_or_else(|| Error::UnknownLabel {
                label: label.clone(),
                line: None,
            })?;
            bits[i] = true;
        }
        Ok(MultiHot { bits })
    }

    pub fn decode(&self, hot: &MultiHot) -> Result<BTreeSet<String>> {
        if hot.len() != self.len() {
            return Err(Error::ShapeMismatch(format!(
                "multi-hot of length {} against vocabulary of size {}",
                hot.len(),
                self.len()
            )));
        }
        Ok(hot.ones().map(|i| self.labels[i].clone()).collect())
    }
}

/// Fixed-length 0/1 vector indexed by vocabulary position.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MultiHot {
    bits: Vec<bool>,
}

impl MultiHot {
    pub fn zeros(len: usize) -> Self {
        Self {
            bits: vec![false; len],
        }
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        Self { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    pub fn set(&mut self, i: usize, on: bool) {
        self.bits[i] = on;
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// Indices of the set bits, ascending.
    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
    }
}

/// One tweet with its (possibly empty) label set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Example {
    pub id: String,
    pub text: String,
    #[serde(default)]
    pub labels: BTreeSet<String>,
}

impl Example {
    pub fn new<I, S>(id: impl Into<String>, text: impl Into<String>, labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            id: id.into(),
            text: text.into(),
            labels: labels.into_iter().map(Into::into).collect(),
        }
    }
}

/// Anything carrying an id and a label set: gold examples and predictions.
pub trait Labeled {
    fn id(&self) -> &str;
    fn label_set(&self) -> &BTreeSet<String>;
}

impl Labeled for Example {
    fn id(&self) -> &str {
        &self.id
    }

    fn label_set(&self) -> &BTreeSet<String> {
        &self.labels
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExample {
    id: String,
    text: String,
    #[serde(default)]
    labels: Option<Vec<String>>,
}

/// Loads a JSONL dataset. Labels are checked against `vocab` when one is
/// given; with `require_labels` every example must carry at least one label.
/// Blank lines are skipped.
pub fn load_dataset(
    path: &Path,
    vocab: Option<&LabelVocabulary>,
    require_labels: bool,
) -> Result<Vec<Example>> {
    let raw = fsio::read_to_string(path)?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in raw.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: RawExample = serde_json::from_str(line).map_err(|e| Error::Malformed {
            path: path.to_path_buf(),
            line: lineno,
            message: e.to_string(),
        })?;
        let ex = Example::new(rec.id, rec.text, rec.labels.unwrap_or_default());
        check_example(&ex, lineno, vocab, require_labels, &mut seen)?;
        out.push(ex);
    }
    Ok(out)
}

/// Loads `id<TAB>text<TAB>comma-separated labels` lines. The label column may
/// be absent or empty.
pub fn load_tsv(
    path: &Path,
    vocab: Option<&LabelVocabulary>,
    require_labels: bool,
) -> Result<Vec<Example>> {
    let raw = fsio::read_to_string(path)?;
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for (i, line) in raw.lines().enumerate() {
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let mut cols = line.splitn(3, '\t');
        let (Some(id), Some(text)) = (cols.next(), cols.next()) else {
            return Err(Error::Malformed {
                path: path.to_path_buf(),
                line: lineno,
                message: "expected at least two tab-separated columns".into(),
            });
        };
        let labels = cols
            .next()
            .unwrap_or("")
            .split(',')
            .map(str::trim)
            .filter(|l| !l.is_empty());
        let ex = Example::new(id, text, labels);
        check_example(&ex, lineno, vocab, require_labels, &mut seen)?;
        out.push(ex);
    }
    Ok(out)
}

/// Dispatches on extension: `.tsv` goes through [`load_tsv`], anything else
/// is read as JSONL.
pub fn load_any(
    path: &Path,
    vocab: Option<&LabelVocabulary>,
    require_labels: bool,
) -> Result<Vec<Example>> {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("tsv") => load_tsv(path, vocab, require_labels),
        _ => load_dataset(path, vocab, require_labels),
    }
}

fn check_example(
    ex: &Example,
    line: usize,
    vocab: Option<&LabelVocabulary>,
    require_labels: bool,
    seen: &mut HashSet<String>,
) -> Result<()> {
    if !seen.insert(ex.id.clone()) {
        return Err(Error::DuplicateId {
            id: ex.id.clone(),
            line: Some(line),
        });
    }
    if require_labels && ex.labels.is_empty() {
        return Err(Error::MissingLabels {
            id: ex.id.clone(),
            line: Some(line),
        });
    }
    if let Some(vocab) = vocab {
        if let Some(bad) = ex.labels.iter().find(|l| !vocab.contains(l)) {
            return Err(Error::UnknownLabel {
                label: bad.clone(),
                line: Some(line),
            });
        }
    }
    Ok(())
}

/// Validates an in-memory dataset the same way [`load_dataset`] validates a file.
pub fn validate(
    examples: &[Example],
    vocab: Option<&LabelVocabulary>,
    require_labels: bool,
) -> Result<()> {
    let mut seen = HashSet::new();
    for (i, ex) in examples.iter().enumerate() {
        check_example(ex, i + 1, vocab, require_labels, &mut seen)?;
    }
    Ok(())
}

pub fn to_jsonl(examples: &[Example]) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    for ex in examples {
        serde_json::to_writer(&mut buf, ex)?;
        buf.push(b'\n');
    }
    Ok(buf)
}

pub fn write_dataset(path: &Path, examples: &[Example]) -> Result<()> {
    fsio::write_atomic(path, &to_jsonl(examples)?)
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub per_label_counts: BTreeMap<String, usize>,
    pub labels_per_example_histogram: BTreeMap<usize, usize>,
    pub n_examples: usize,
}

impl DatasetStats {
    pub fn total_label_occurrences(&self) -> usize {
        self.per_label_counts.values().sum()
    }
}

pub fn compute_stats(dataset: &[Example]) -> DatasetStats {
    let mut stats = DatasetStats {
        n_examples: dataset.len(),
        ..DatasetStats::default()
    };
    for ex in dataset {
        for label in &ex.labels {
            *stats.per_label_counts.entry(label.clone()).or_default() += 1;
        }
        *stats
            .labels_per_example_histogram
            .entry(ex.labels.len())
            .or_default() += 1;
    }
    stats
}

/// Occurrence count per label.
pub fn label_counts(dataset: &[Example]) -> BTreeMap<String, usize> {
    compute_stats(dataset).per_label_counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn tmp_with(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn abc() -> LabelVocabulary {
        LabelVocabulary::new(["A", "B", "C"]).unwrap()
    }

    #[test]
    fn vocabulary_order_defines_index() {
        let f = tmp_with("A\nB\n\nC\n");
        let v = LabelVocabulary::load(f.path()).unwrap();
        assert_eq!(v.len(), 3);
        assert_eq!(v.index_of("B"), Some(1));
    }

    #[test]
    fn vocabulary_rejects_duplicates_and_empty_files() {
        let f = tmp_with("A\nA\n");
        match LabelVocabulary::load(f.path()) {
            Err(Error::DuplicateLabel(l)) => assert_eq!(l, "A"),
            other => panic!("expected duplicate error, got {other:?}"),
        }
        let f = tmp_with("\n  \n");
        assert!(matches!(
            LabelVocabulary::load(f.path()),
            Err(Error::EmptyVocabulary(_))
        ));
    }

    #[test]
    fn twenty_one_technique_file() {
        let names: Vec<String> = (0..21).map(|i| format!("technique_{i}")).collect();
        let f = tmp_with(&names.join("\n"));
        assert_eq!(LabelVocabulary::load(f.path()).unwrap().len(), 21);
    }

    #[test]
    fn encode_examples() {
        let v = abc();
        let set: BTreeSet<String> = ["C", "A"].iter().map(|s| s.to_string()).collect();
        assert_eq!(v.encode(&set).unwrap().bits(), &[true, false, true]);
        assert_eq!(
            v.encode(&BTreeSet::new()).unwrap().bits(),
            &[false, false, false]
        );
        let b: BTreeSet<String> = [String::from("B")].into();
        assert_eq!(v.decode(&v.encode(&b).unwrap()).unwrap(), b);
        let bad: BTreeSet<String> = [String::from("Z")].into();
        assert!(matches!(v.encode(&bad), Err(Error::UnknownLabel { .. })));
    }

    #[test]
    fn loads_in_file_order() {
        let f = tmp_with(concat!(
            r#"{"id":"1","text":"a","labels":["A"]}"#,
            "\n",
            r#"{"id":"2","text":"b","labels":["B","C"]}"#,
            "\n",
            r#"{"id":"3","text":"c","labels":["C"]}"#,
            "\n"
        ));
        let ds = load_dataset(f.path(), Some(&abc()), true).unwrap();
        let ids: Vec<_> = ds.iter().map(|e| e.id.as_str()).collect();
        assert_eq!(ids, ["1", "2", "3"]);
    }

    #[test]
    fn unknown_label_names_label_and_line() {
        let f = tmp_with(concat!(
            r#"{"id":"1","text":"a","labels":["A"]}"#,
            "\n",
            r#"{"id":"2","text":"b","labels":["NotATechnique"]}"#,
            "\n"
        ));
        match load_dataset(f.path(), Some(&abc()), true) {
            Err(Error::UnknownLabel { label, line }) => {
                assert_eq!(label, "NotATechnique");
                assert_eq!(line, Some(2));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn malformed_and_duplicate_lines() {
        let f = tmp_with("{\"id\":\"1\",\"text\":\"a\"}\n{not json\n");
        match load_dataset(f.path(), None, false) {
            Err(Error::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        let f = tmp_with("{\"id\":\"1\",\"text\":\"a\"}\n{\"id\":\"1\",\"text\":\"b\"}\n");
        assert!(matches!(
            load_dataset(f.path(), None, false),
            Err(Error::DuplicateId { .. })
        ));
    }

    #[test]
    fn gold_data_requires_labels() {
        let f = tmp_with("{\"id\":\"1\",\"text\":\"a\",\"labels\":[]}\n");
        assert!(matches!(
            load_dataset(f.path(), None, true),
            Err(Error::MissingLabels { .. })
        ));
        assert_eq!(load_dataset(f.path(), None, false).unwrap().len(), 1);
    }

    #[test]
    fn tsv_import() {
        let f = tmp_with("e1\thello world\tA, C\ne2\tbye\t\n");
        let path = f.path().with_extension("tsv");
        std::fs::copy(f.path(), &path).unwrap();
        let ds = load_any(&path, Some(&abc()), false).unwrap();
        std::fs::remove_file(&path).unwrap();
        assert_eq!(ds[0].labels.len(), 2);
        assert_eq!(ds[0].text, "hello world");
        assert!(ds[1].labels.is_empty());
    }

    #[test]
    fn stats_hand_count() {
        let ds = vec![
            Example::new("1", "", ["A"]),
            Example::new("2", "", ["A", "B"]),
        ];
        let s = compute_stats(&ds);
        assert_eq!(
            s.per_label_counts,
            BTreeMap::from([("A".into(), 2), ("B".into(), 1)])
        );
        assert_eq!(
            s.labels_per_example_histogram,
            BTreeMap::from([(1, 1), (2, 1)])
        );
        assert_eq!(s.n_examples, 2);
    }

    #[test]
    fn stats_empty_and_seven_labels() {
        assert_eq!(compute_stats(&[]), DatasetStats::default());
        let mut ds = vec![Example::new("x", "", ["A", "B", "C", "D", "E", "F", "G"])];
        ds.push(Example::new("y", "", ["A"]));
        let s = compute_stats(&ds);
        assert_eq!(s.labels_per_example_histogram[&7], 1);
    }

    #[test]
    fn stats_json_keys() {
        let s = compute_stats(&[Example::new("1", "", ["A"])]);
        let v: serde_json::Value = serde_json::to_value(&s).unwrap();
        assert_eq!(v["labels_per_example_histogram"]["1"], 1);
        assert_eq!(v["n_examples"], 1);
    }
}
