#![allow(dead_code)]

use std::path::{Path, PathBuf};

use lenient_cer::{
    Arc, Label, Lattice, LexWeight, NgramModel, NgramRestorer, ReadingDictionary, Resources,
    VariantLexicon,
};
use rand::Rng;

pub fn data_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data")
}

pub fn read_data(name: &str) -> String {
    std::fs::read_to_string(data_dir().join(name)).unwrap()
}

pub fn fixture_resources() -> Resources {
    Resources::new(ReadingDictionary::from_tsv(&read_data("readings.tsv")).unwrap())
        .with_lexicon(VariantLexicon::from_tsv(&read_data("lexicon.tsv")).unwrap())
        .with_restorer(NgramRestorer::new(
            NgramModel::from_tsv(&read_data("ngram.tsv")).unwrap(),
        ))
}

/// Plain two-row Levenshtein distance.
pub fn lev(a: &[char], b: &[char]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    for (i, &x) in a.iter().enumerate() {
        let mut cur = vec![i + 1; b.len() + 1];
        for (j, &y) in b.iter().enumerate() {
            cur[j + 1] = (prev[j] + usize::from(x != y))
                .min(prev[j + 1] + 1)
                .min(cur[j] + 1);
        }
        prev = cur;
    }
    prev[b.len()]
}

/// Every complete path as (characters, summed lm), epsilons dropped.
pub fn enumerate(lattice: &Lattice) -> Vec<(Vec<char>, f64)> {
    fn walk(
        l: &Lattice,
        q: usize,
        chars: &mut Vec<char>,
        lm: f64,
        out: &mut Vec<(Vec<char>, f64)>,
    ) {
        if l.is_final(q) {
            out.push((chars.clone(), lm + l.final_weight(q).lm.value()));
        }
        for arc in l.arcs(q) {
            let pushed = match arc.label {
                Label::Char(c) => {
                    chars.push(c);
                    true
                }
                Label::Epsilon => false,
            };
            walk(l, arc.next, chars, lm + arc.weight.lm.value(), out);
            if pushed {
                chars.pop();
            }
        }
    }
    let mut out = Vec::new();
    if let Some(s) = lattice.start() {
        walk(lattice, s, &mut Vec::new(), 0.0, &mut out);
    }
    out
}

pub fn sorted_strings(lattice: &Lattice) -> Vec<String> {
    let mut v: Vec<String> = enumerate(lattice)
        .into_iter()
        .map(|(c, _)| c.into_iter().collect())
        .collect();
    v.sort();
    v
}

/// Random acyclic lattice: arcs only go from lower to higher state ids.
/// `lm` adds small integer lm weights; `eps` allows epsilon arcs.
pub fn random_lattice(
    rng: &mut impl Rng,
    max_states: usize,
    alphabet: &[char],
    lm: bool,
    eps: bool,
) -> Lattice {
    let n = rng.gen_range(1..=max_states);
    let mut l = Lattice::new();
    for _ in 0..n {
        l.add_state();
    }
    l.set_start(0);
    let weight = |rng: &mut _| {
        if lm {
            LexWeight::new(0.0, Rng::gen_range(rng, 0..3) as f64)
        } else {
            LexWeight::new(0.0, 0.0)
        }
    };
    for q in 0..n {
        for r in q + 1..n {
            let arcs = if rng.gen_bool(0.5) {
                rng.gen_range(1..=2)
            } else {
                0
            };
            for _ in 0..arcs {
                let label = if eps && rng.gen_bool(0.15) {
                    Label::Epsilon
                } else {
                    Label::Char(alphabet[rng.gen_range(0..alphabet.len())])
                };
                let w = weight(rng);
                l.add_arc(q, Arc::new(label, w, r));
            }
        }
        if rng.gen_bool(0.35) || q == n - 1 {
            let w = weight(rng);
            l.set_final(q, w);
        }
    }
    l
}

pub fn random_string(rng: &mut impl Rng, max_len: usize, alphabet: &[char]) -> Vec<char> {
    let len = rng.gen_range(0..=max_len);
    (0..len)
        .map(|_| alphabet[rng.gen_range(0..alphabet.len())])
        .collect()
}

/// Brute-force best path: minimum distance, then lm, then longest, then
/// lexicographically smallest.
pub fn oracle_best(lattice: &Lattice, hyp: &[char]) -> Option<(usize, f64, Vec<char>)> {
    enumerate(lattice)
        .into_iter()
        .map(|(p, lm)| (lev(&p, hyp), lm, p))
        .min_by(|a, b| {
            a.0.cmp(&b.0)
                .then(a.1.total_cmp(&b.1))
                .then(b.2.len().cmp(&a.2.len()))
                .then(a.2.cmp(&b.2))
        })
}
