mod common;

use std::collections::BTreeSet;

use common::{label_name, label_subset};
use proptest::prelude::*;
use propvote::corpus::{compute_stats, load_dataset, write_dataset, Example, LabelVocabulary};

fn vocab(n: usize) -> LabelVocabulary {
    LabelVocabulary::new((0..n).map(label_name)).unwrap()
}

fn dataset(n_labels: usize) -> impl Strategy<Value = Vec<Example>> {
    prop::collection::vec(("\\PC{0,30}", label_subset(n_labels)), 0..25).prop_map(|rows| {
        rows.into_iter()
            .enumerate()
            .map(|(i, (text, labels))| Example {
                id: format!("id-{i}"),
                text,
                labels,
            })
            .collect()
    })
}

proptest! {
    #[test]
    fn encode_decode_roundtrip(labels in label_subset(8)) {
        let v = vocab(8);
        let hot = v.encode(&labels).unwrap();
        prop_assert_eq!(hot.ones().count(), labels.len());
        prop_assert_eq!(v.decode(&hot).unwrap(), labels);
    }

    #[test]
    fn stats_identities(ds in dataset(6)) {
        let s = compute_stats(&ds);
        let weighted: usize = s.labels_per_example_histogram.iter().map(|(k, c)| k * c).sum();
        prop_assert_eq!(weighted, s.total_label_occurrences());
        prop_assert_eq!(s.labels_per_example_histogram.values().sum::<usize>(), s.n_examples);
        prop_assert_eq!(s.n_examples, ds.len());
    }

    #[test]
    fn write_then_load_is_identity(ds in dataset(5)) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.jsonl");
        write_dataset(&path, &ds).unwrap();
        let back = load_dataset(&path, Some(&vocab(5)), false).unwrap();
        prop_assert_eq!(back, ds);
    }
}

#[test]
fn labels_serialize_sorted_and_dedupe() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("d.jsonl");
    std::fs::write(
        &path,
        "{\"id\":\"1\",\"text\":\"x\",\"labels\":[\"B\",\"A\",\"B\"]}\n",
    )
    .unwrap();
    let ds = load_dataset(&path, None, true).unwrap();
    assert_eq!(
        ds[0].labels,
        BTreeSet::from(["A".to_string(), "B".to_string()])
    );
}
