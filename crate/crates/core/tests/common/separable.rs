use std::collections::BTreeSet;

use propvote::corpus::{Example, LabelVocabulary};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Marker words drawn from per-label alphabets that share no characters with
/// each other or with the filler, so label presence is a linear function of
/// the marker n-grams.
const MARKERS: [&str; 4] = ["qqzq", "ŵŷŵŷ", "ЖЖэЖ", "ღღჯღ"];
const FILLER: [&str; 8] = ["ab", "cd", "ef", "gh", "ijk", "lmn", "opr", "stu"];

pub fn separable_dataset(n: usize, seed: u64) -> (Vec<Example>, LabelVocabulary) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab = LabelVocabulary::new((0..MARKERS.len()).map(|i| format!("T{i}"))).unwrap();
    let examples = (0..n)
        .map(|i| {
            let k = rng.gen_range(1..=2);
            let mut labels = BTreeSet::new();
            while labels.len() < k {
                labels.insert(rng.gen_range(0..MARKERS.len()));
            }
            let mut words: Vec<&str> = (0..6).map(|_| *FILLER.choose(&mut rng).unwrap()).collect();
            words.extend(labels.iter().map(|&l| MARKERS[l]));
            words.shuffle(&mut rng);
            Example {
                id: format!("s{i}"),
                text: words.join(" "),
                labels: labels.iter().map(|l| format!("T{l}")).collect(),
            }
        })
        .collect();
    (examples, vocab)
}
