//! Levenshtein distance between a lattice and a hypothesis string.
//!
//! The dynamic program runs over (lattice state, hypothesis position) pairs in
//! reverse topological order, which is the same search as composing the
//! lattice with a unit-cost edit transducer and the hypothesis acceptor and
//! taking the shortest path, without building the composition.
//!
//! When several lattice paths reach the minimum distance the chosen path is the
//! one with, in order: the smaller language-model weight, more characters, and
//! the lexicographically smaller label sequence.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::Serialize;

use crate::lattice::{Label, Lattice, LatticeError, StateId};
use crate::weight::{LexWeight, TropicalWeight};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Match,
    Sub,
    Ins,
    Del,
}

/// One alignment column. `reference` is the lattice-path symbol, `hypothesis`
/// the hypothesis symbol; insertions have no reference side and deletions no
/// hypothesis side.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AlignOp<T> {
    pub kind: OpKind,
    pub reference: Option<T>,
    pub hypothesis: Option<T>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EditCounts {
    pub sub: usize,
    pub ins: usize,
    pub del: usize,
}

impl EditCounts {
    pub fn distance(&self) -> usize {
        self.sub + self.ins + self.del
    }

    fn record(&mut self, kind: OpKind) {
        match kind {
            OpKind::Match => {}
            OpKind::Sub => self.sub += 1,
            OpKind::Ins => self.ins += 1,
            OpKind::Del => self.del += 1,
        }
    }

    pub fn from_ops<T>(ops: &[AlignOp<T>]) -> Self {
        let mut counts = EditCounts::default();
        for op in ops {
            counts.record(op.kind);
        }
        counts
    }
}

impl std::ops::AddAssign for EditCounts {
    fn add_assign(&mut self, rhs: Self) {
        self.sub += rhs.sub;
        self.ins += rhs.ins;
        self.del += rhs.del;
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EditResult {
    pub distance: usize,
    pub counts: EditCounts,
    pub best_path: Vec<char>,
    pub best_path_lm: TropicalWeight,
    pub alignment: Vec<AlignOp<char>>,
}

impl EditResult {
    pub fn best_path_string(&self) -> String {
        self.best_path.iter().collect()
    }
}

/// Apply an alignment to its reference side, yielding the hypothesis side.
pub fn replay<T: Clone>(alignment: &[AlignOp<T>]) -> Vec<T> {
    alignment
        .iter()
        .filter_map(|op| op.hypothesis.clone())
        .collect()
}

/// Reference side of an alignment.
pub fn reference_side<T: Clone>(alignment: &[AlignOp<T>]) -> Vec<T> {
    alignment
        .iter()
        .filter_map(|op| op.reference.clone())
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct Cost {
    edit: f64,
    lm: f64,
    len: usize,
}

impl Cost {
    const TERMINAL_BASE: Cost = Cost {
        edit: 0.0,
        lm: 0.0,
        len: 0,
    };

    fn extend(self, edit: f64, weight: LexWeight, chars: usize) -> Cost {
        Cost {
            edit: self.edit + edit + weight.edit.value(),
            lm: self.lm + weight.lm.value(),
            len: self.len + chars,
        }
    }

    /// Smaller is better: edit, then lm, then longer paths first.
    fn order(&self, other: &Cost) -> Ordering {
        self.edit
            .total_cmp(&other.edit)
            .then_with(|| self.lm.total_cmp(&other.lm))
            .then_with(|| other.len.cmp(&self.len))
    }
}

fn better(candidate: Cost, current: Option<Cost>) -> bool {
    match current {
        None => true,
        Some(c) => candidate.order(&c) == Ordering::Less,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
struct Config {
    state: StateId,
    pos: usize,
}

#[derive(Clone, Copy, Debug)]
enum Step {
    Start,
    Ins {
        from: Config,
    },
    Arc {
        from: Config,
        label: char,
        kind: OpKind,
    },
}

/// Minimum Levenshtein distance between `hypothesis` and any complete path
/// of `lattice`, with the argmin path and its alignment.
pub fn edit_distance(lattice: &Lattice, hypothesis: &[char]) -> Result<EditResult, LatticeError> {
    let lattice = lattice.prepared()?;
    let order = lattice.topological_order()?;
    let start = lattice.start().ok_or(LatticeError::EmptyLattice)?;
    let n = hypothesis.len();
    let width = n + 1;
    let idx = |q: StateId, j: usize| q * width + j;

    // tail[q, j]: best cost of finishing from state q having consumed j
    // hypothesis symbols.
    let mut tail: Vec<Option<Cost>> = vec![None; lattice.num_states() * width];
    for &q in order.iter().rev() {
        for j in (0..=n).rev() {
            let mut best: Option<Cost> = None;
            if j == n && lattice.is_final(q) {
                best = Some(Cost::TERMINAL_BASE.extend(0.0, lattice.final_weight(q), 0));
            }
            if j < n {
                if let Some(t) = tail[idx(q, j + 1)] {
                    let c = t.extend(1.0, LexWeight::new(0.0, 0.0), 0);
                    if better(c, best) {
                        best = Some(c);
                    }
                }
            }
            for arc in lattice.arcs(q) {
                let Label::Char(label) = arc.label else {
                    unreachable!("prepared lattices are epsilon-free")
                };
                if j < n {
                    if let Some(t) = tail[idx(arc.next, j + 1)] {
                        let sub = if label == hypothesis[j] { 0.0 } else { 1.0 };
                        let c = t.extend(sub, arc.weight, 1);
                        if better(c, best) {
                            best = Some(c);
                        }
                    }
                }
                if let Some(t) = tail[idx(arc.next, j)] {
                    let c = t.extend(1.0, arc.weight, 1);
                    if better(c, best) {
                        best = Some(c);
                    }
                }
            }
            tail[idx(q, j)] = best;
        }
    }

    let optimum = tail[idx(start, 0)].ok_or(LatticeError::EmptyLattice)?;
    let optimal = |from: Config, edit: f64, weight: LexWeight, chars: usize, to: Config| match (
        tail[idx(from.state, from.pos)],
        tail[idx(to.state, to.pos)],
    ) {
        (Some(here), Some(there)) => there.extend(edit, weight, chars) == here,
        _ => false,
    };

    // Walk forward over the set of configurations that stay optimal, always
    // taking the smallest next label, so the emitted path is the
    // lexicographically smallest among the optimal ones.
    let mut parents: BTreeMap<Config, Step> = BTreeMap::new();
    let mut frontier: Vec<Config> = vec![Config {
        state: start,
        pos: 0,
    }];
    parents.insert(frontier[0], Step::Start);
    close_under_insertions(&mut frontier, &mut parents, n, |from, to| {
        optimal(from, 1.0, LexWeight::new(0.0, 0.0), 0, to)
    });
    let mut generation: Vec<BTreeMap<Config, Step>> = vec![parents];
    for _ in 0..optimum.len {
        let mut next_label: Option<char> = None;
        for &cfg in &frontier {
            for arc in lattice.arcs(cfg.state) {
                let label = arc.label.as_char().unwrap();
                if next_label.is_some_and(|l| l <= label) {
                    continue;
                }
                let del = optimal(
                    cfg,
                    1.0,
                    arc.weight,
                    1,
                    Config {
                        state: arc.next,
                        pos: cfg.pos,
                    },
                );
                let diag = cfg.pos < n && {
                    let sub = if label == hypothesis[cfg.pos] {
                        0.0
                    } else {
                        1.0
                    };
                    optimal(
                        cfg,
                        sub,
                        arc.weight,
                        1,
                        Config {
                            state: arc.next,
                            pos: cfg.pos + 1,
                        },
                    )
                };
                if del || diag {
                    next_label = Some(label);
                }
            }
        }
        let label = next_label.expect("an optimal path of the stated length exists");
        let mut parents: BTreeMap<Config, Step> = BTreeMap::new();
        for &cfg in &frontier {
            for arc in lattice.arcs(cfg.state) {
                if arc.label != Label::Char(label) {
                    continue;
                }
                if cfg.pos < n {
                    let matched = label == hypothesis[cfg.pos];
                    let to = Config {
                        state: arc.next,
                        pos: cfg.pos + 1,
                    };
                    if optimal(cfg, if matched { 0.0 } else { 1.0 }, arc.weight, 1, to) {
                        let kind = if matched { OpKind::Match } else { OpKind::Sub };
                        parents.entry(to).or_insert(Step::Arc {
                            from: cfg,
                            label,
                            kind,
                        });
                    }
                }
                let to = Config {
                    state: arc.next,
                    pos: cfg.pos,
                };
                if optimal(cfg, 1.0, arc.weight, 1, to) {
                    parents.entry(to).or_insert(Step::Arc {
                        from: cfg,
                        label,
                        kind: OpKind::Del,
                    });
                }
            }
        }
        frontier = parents.keys().copied().collect();
        close_under_insertions(&mut frontier, &mut parents, n, |from, to| {
            optimal(from, 1.0, LexWeight::new(0.0, 0.0), 0, to)
        });
        generation.push(parents);
    }

    let terminal = frontier
        .iter()
        .copied()
        .find(|cfg| {
            cfg.pos == n
                && lattice.is_final(cfg.state)
                && tail[idx(cfg.state, n)]
                    == Some(Cost::TERMINAL_BASE.extend(0.0, lattice.final_weight(cfg.state), 0))
        })
        .expect("optimal walk ends in a final configuration");

    // Backtrack through the recorded parents.
    let mut ops: Vec<AlignOp<char>> = Vec::new();
    let mut cfg = terminal;
    let mut level = generation.len() - 1;
    loop {
        match generation[level][&cfg] {
            Step::Start => break,
            Step::Ins { from } => {
                ops.push(AlignOp {
                    kind: OpKind::Ins,
                    reference: None,
                    hypothesis: Some(hypothesis[from.pos]),
                });
                cfg = from;
            }
            Step::Arc { from, label, kind } => {
                ops.push(AlignOp {
                    kind,
                    reference: Some(label),
                    hypothesis: (kind != OpKind::Del).then(|| hypothesis[from.pos]),
                });
                cfg = from;
                level -= 1;
            }
        }
    }
    ops.reverse();
    let counts = EditCounts::from_ops(&ops);
    Ok(EditResult {
        distance: counts.distance(),
        counts,
        best_path: reference_side(&ops),
        best_path_lm: TropicalWeight::new(optimum.lm),
        alignment: ops,
    })
}

fn close_under_insertions(
    frontier: &mut Vec<Config>,
    parents: &mut BTreeMap<Config, Step>,
    n: usize,
    optimal: impl Fn(Config, Config) -> bool,
) {
    // Positions only grow, so one sweep in ascending order reaches everything.
    let mut i = 0;
    frontier.sort();
    while i < frontier.len() {
        let from = frontier[i];
        if from.pos < n {
            let to = Config {
                state: from.state,
                pos: from.pos + 1,
            };
            if !parents.contains_key(&to) && optimal(from, to) {
                parents.insert(to, Step::Ins { from });
                frontier.push(to);
            }
        }
        i += 1;
    }
    frontier.sort();
    frontier.dedup();
}

/// Lattice edit distance divided by the length of the selected best path.
pub fn lenient_cer(lattice: &Lattice, hypothesis: &[char]) -> Result<f64, LatticeError> {
    let result = edit_distance(lattice, hypothesis)?;
    rate(&result)
}

pub(crate) fn rate(result: &EditResult) -> Result<f64, LatticeError> {
    if result.best_path.is_empty() {
        return Err(LatticeError::EmptyReference);
    }
    Ok(result.distance as f64 / result.best_path.len() as f64)
}

/// Unit-cost Levenshtein alignment between two sequences. Ties between
/// alignments of equal cost prefer substitution/match, then deletion, then
/// insertion when walking back from the end.
pub fn levenshtein<T: PartialEq + Clone>(reference: &[T], hypothesis: &[T]) -> Vec<AlignOp<T>> {
    let (m, n) = (reference.len(), hypothesis.len());
    let w = n + 1;
    let mut d = vec![0usize; (m + 1) * w];
    for i in 0..=m {
        d[i * w] = i;
    }
    for (j, cell) in d.iter_mut().enumerate().take(w) {
        *cell = j;
    }
    for i in 1..=m {
        for j in 1..=n {
            let sub = d[(i - 1) * w + j - 1] + usize::from(reference[i - 1] != hypothesis[j - 1]);
            let del = d[(i - 1) * w + j] + 1;
            let ins = d[i * w + j - 1] + 1;
            d[i * w + j] = sub.min(del).min(ins);
        }
    }
    let mut ops = Vec::with_capacity(m.max(n));
    let (mut i, mut j) = (m, n);
    while i > 0 || j > 0 {
        let here = d[i * w + j];
        if i > 0 && j > 0 {
            let same = reference[i - 1] == hypothesis[j - 1];
            if d[(i - 1) * w + j - 1] + usize::from(!same) == here {
                ops.push(AlignOp {
                    kind: if same { OpKind::Match } else { OpKind::Sub },
                    reference: Some(reference[i - 1].clone()),
                    hypothesis: Some(hypothesis[j - 1].clone()),
                });
                i -= 1;
                j -= 1;
                continue;
            }
        }
        if i > 0 && d[(i - 1) * w + j] + 1 == here {
            ops.push(AlignOp {
                kind: OpKind::Del,
                reference: Some(reference[i - 1].clone()),
                hypothesis: None,
            });
            i -= 1;
        } else {
            ops.push(AlignOp {
                kind: OpKind::Ins,
                reference: None,
                hypothesis: Some(hypothesis[j - 1].clone()),
            });
            j -= 1;
        }
    }
    ops.reverse();
    ops
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Arc;
    use crate::weight::Semiring;

    fn chars(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    fn parallel(words: &[&str]) -> Lattice {
        let mut lat = Lattice::new();
        let start = lat.add_state();
        let end = lat.add_state();
        lat.set_start(start);
        lat.set_final(end, LexWeight::one());
        for word in words {
            let cs = chars(word);
            let mut cur = start;
            for (i, &c) in cs.iter().enumerate() {
                let next = if i + 1 == cs.len() {
                    end
                } else {
                    lat.add_state()
                };
                lat.add_arc(cur, Arc::new(Label::Char(c), LexWeight::one(), next));
                cur = next;
            }
        }
        lat
    }

    #[test]
    fn exact_single_path() {
        let r = edit_distance(&Lattice::from_str_path("だめ"), &chars("だめ")).unwrap();
        assert_eq!(r.distance, 0);
        assert_eq!(r.best_path_string(), "だめ");
    }

    #[test]
    fn katakana_branch_matches() {
        let r = edit_distance(&parallel(&["だめ", "ダメ"]), &chars("ダメ")).unwrap();
        assert_eq!(r.distance, 0);
        assert_eq!(r.best_path_string(), "ダメ");
    }

    #[test]
    fn kitten_sitting() {
        let r = edit_distance(&Lattice::from_str_path("kitten"), &chars("sitting")).unwrap();
        assert_eq!(r.distance, 3);
        assert_eq!(
            r.counts,
            EditCounts {
                sub: 2,
                ins: 1,
                del: 0
            }
        );
        assert_eq!(replay(&r.alignment), chars("sitting"));
        assert_eq!(reference_side(&r.alignment), chars("kitten"));
    }

    #[test]
    fn empty_hypothesis_is_all_deletions() {
        let r = edit_distance(&Lattice::from_str_path("あ"), &[]).unwrap();
        assert_eq!(
            r.counts,
            EditCounts {
                sub: 0,
                ins: 0,
                del: 1
            }
        );
        assert_eq!(
            lenient_cer(&Lattice::from_str_path("あ"), &[]).unwrap(),
            1.0
        );
    }

    #[test]
    fn empty_best_path_rejected() {
        let lat = Lattice::from_str_path("");
        assert_eq!(
            lenient_cer(&lat, &chars("a")),
            Err(LatticeError::EmptyReference)
        );
    }

    #[test]
    fn tie_prefers_lower_lm_then_longer_then_smaller_labels() {
        // Both "ab" and "cb" are one substitution away from "xb".
        let mut lat = parallel(&["ab", "cb"]);
        assert_eq!(
            edit_distance(&lat, &chars("xb"))
                .unwrap()
                .best_path_string(),
            "ab"
        );
        // Make "ab" cost more in the lm dimension.
        let mut weighted = Lattice::new();
        let s = weighted.add_state();
        let m1 = weighted.add_state();
        let m2 = weighted.add_state();
        let f = weighted.add_state();
        weighted.set_start(s);
        weighted.set_final(f, LexWeight::one());
        weighted.add_arc(s, Arc::new(Label::Char('a'), LexWeight::new(0.0, 2.0), m1));
        weighted.add_arc(m1, Arc::new(Label::Char('b'), LexWeight::one(), f));
        weighted.add_arc(s, Arc::new(Label::Char('c'), LexWeight::new(0.0, 1.0), m2));
        weighted.add_arc(m2, Arc::new(Label::Char('b'), LexWeight::one(), f));
        let r = edit_distance(&weighted, &chars("xb")).unwrap();
        assert_eq!(r.best_path_string(), "cb");
        assert_eq!(r.best_path_lm.value(), 1.0);

        // "abx": "ab" needs one insertion, "abc" one substitution.
        lat = parallel(&["ab", "abc"]);
        let r = edit_distance(&lat, &chars("abx")).unwrap();
        assert_eq!(r.distance, 1);
        assert_eq!(r.best_path_string(), "abc");
    }

    #[test]
    fn epsilon_lattices_are_scored() {
        let mut lat = Lattice::new();
        for _ in 0..3 {
            lat.add_state();
        }
        lat.set_start(0);
        lat.add_arc(0, Arc::new(Label::Epsilon, LexWeight::one(), 1));
        lat.add_arc(1, Arc::new(Label::Char('a'), LexWeight::one(), 2));
        lat.set_final(2, LexWeight::one());
        assert_eq!(edit_distance(&lat, &chars("a")).unwrap().distance, 0);
    }

    #[test]
    fn empty_lattice() {
        assert_eq!(
            edit_distance(&Lattice::new(), &chars("a")),
            Err(LatticeError::EmptyLattice)
        );
    }

    #[test]
    fn string_levenshtein_counts() {
        let ops = levenshtein(&chars("がんばれ"), &chars("頑張れ"));
        assert_eq!(EditCounts::from_ops(&ops).distance(), 3);
        assert_eq!(replay(&ops), chars("頑張れ"));
        let ops = levenshtein(&chars("だめ"), &chars("ダメ"));
        assert_eq!(
            EditCounts::from_ops(&ops),
            EditCounts {
                sub: 2,
                ins: 0,
                del: 0
            }
        );
        assert!(levenshtein::<char>(&[], &[]).is_empty());
    }

    #[test]
    fn zero_weight_arcs_are_ignored() {
        let mut lat = parallel(&["a"]);
        lat.add_arc(0, Arc::new(Label::Char('b'), LexWeight::zero(), 1));
        let r = edit_distance(&lat, &chars("b")).unwrap();
        assert_eq!(r.distance, 1);
    }
}
