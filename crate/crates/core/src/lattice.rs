//! Acyclic weighted character acceptors.
//!
//! A [`Lattice`] holds one list of outgoing arcs per state, a start state and
//! a final weight per state ([`LexWeight::zero`] for non-final states). The
//! scoring code assumes the lattice is acyclic and epsilon-free; use
//! [`Lattice::remove_epsilons`] and [`Lattice::trim`] to get there.

use std::collections::VecDeque;
use std::fmt::{self, Write as _};

use thiserror::Error;

use crate::weight::{LexWeight, Semiring};

pub type StateId = usize;

#[derive(Debug, Error, PartialEq)]
pub enum LatticeError {
    #[error("lattice has no complete path")]
    EmptyLattice,
    #[error("lattice contains a cycle")]
    Cyclic,
    #[error("best matching path is empty; rate denominator would be zero")]
    EmptyReference,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Epsilon,
    Char(char),
}

impl Label {
    pub fn as_char(self) -> Option<char> {
        match self {
            Label::Epsilon => None,
            Label::Char(c) => Some(c),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Epsilon => f.write_str("<eps>"),
            Label::Char(c) => f.write_char(*c),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Arc {
    pub label: Label,
    pub weight: LexWeight,
    pub next: StateId,
}

impl Arc {
    pub fn new(label: Label, weight: LexWeight, next: StateId) -> Self {
        Arc {
            label,
            weight,
            next,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct State {
    arcs: Vec<Arc>,
    final_weight: LexWeight,
}

impl State {
    fn new() -> Self {
        State {
            arcs: Vec::new(),
            final_weight: LexWeight::zero(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Lattice {
    states: Vec<State>,
    start: Option<StateId>,
}

impl Lattice {
    pub fn new() -> Self {
        Lattice::default()
    }

    /// Single-path lattice spelling `text`, all weights one.
    pub fn from_chars(text: &[char]) -> Self {
        let mut lattice = Lattice::new();
        let mut cur = lattice.add_state();
        lattice.set_start(cur);
        for &c in text {
            let next = lattice.add_state();
            lattice.add_arc(cur, Arc::new(Label::Char(c), LexWeight::one(), next));
            cur = next;
        }
        lattice.set_final(cur, LexWeight::one());
        lattice
    }

    pub fn from_str_path(text: &str) -> Self {
        let chars: Vec<char> = text.chars().collect();
        Self::from_chars(&chars)
    }

    pub fn add_state(&mut self) -> StateId {
        self.states.push(State::new());
        self.states.len() - 1
    }

    pub fn set_start(&mut self, state: StateId) {
        assert!(state < self.states.len(), "start state out of range");
        self.start = Some(state);
    }

    pub fn set_final(&mut self, state: StateId, weight: LexWeight) {
        self.states[state].final_weight = weight;
    }

    pub fn add_arc(&mut self, from: StateId, arc: Arc) {
        assert!(arc.next < self.states.len(), "arc target out of range");
        self.states[from].arcs.push(arc);
    }

    pub fn start(&self) -> Option<StateId> {
        self.start
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn num_arcs(&self) -> usize {
        self.states.iter().map(|s| s.arcs.len()).sum()
    }

    pub fn arcs(&self, state: StateId) -> &[Arc] {
        &self.states[state].arcs
    }

    pub fn final_weight(&self, state: StateId) -> LexWeight {
        self.states[state].final_weight
    }

    pub fn is_final(&self, state: StateId) -> bool {
        !self.states[state].final_weight.is_zero()
    }

    pub fn has_epsilons(&self) -> bool {
        self.states
            .iter()
            .flat_map(|s| &s.arcs)
            .any(|a| a.label == Label::Epsilon)
    }

    /// Kahn's algorithm; fails on a cycle.
    pub fn topological_order(&self) -> Result<Vec<StateId>, LatticeError> {
        let n = self.states.len();
        let mut indegree = vec![0usize; n];
        for s in &self.states {
            for a in &s.arcs {
                indegree[a.next] += 1;
            }
        }
        let mut queue: VecDeque<StateId> = (0..n).filter(|&q| indegree[q] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(q) = queue.pop_front() {
            order.push(q);
            for a in &self.states[q].arcs {
                indegree[a.next] -= 1;
                if indegree[a.next] == 0 {
                    queue.push_back(a.next);
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            Err(LatticeError::Cyclic)
        }
    }

    fn reachable_from_start(&self) -> Vec<bool> {
        let mut seen = vec![false; self.states.len()];
        let Some(start) = self.start else {
            return seen;
        };
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(q) = stack.pop() {
            for a in &self.states[q].arcs {
                if !seen[a.next] {
                    seen[a.next] = true;
                    stack.push(a.next);
                }
            }
        }
        seen
    }

    fn coreachable(&self) -> Vec<bool> {
        let n = self.states.len();
        let mut reverse: Vec<Vec<StateId>> = vec![Vec::new(); n];
        for (q, s) in self.states.iter().enumerate() {
            for a in &s.arcs {
                if !a.weight.is_zero() {
                    reverse[a.next].push(q);
                }
            }
        }
        let mut seen = vec![false; n];
        let mut stack: Vec<StateId> = (0..n).filter(|&q| self.is_final(q)).collect();
        for &q in &stack {
            seen[q] = true;
        }
        while let Some(q) = stack.pop() {
            for &p in &reverse[q] {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        seen
    }

    /// Keep only states that lie on some start-to-final path. Survivors are
    /// renumbered with the start as state 0 and the rest in original order.
    pub fn trim(&self) -> Lattice {
        let access = self.reachable_from_start();
        let coaccess = self.coreachable();
        let mut remap = vec![None; self.states.len()];
        let mut out = Lattice::new();
        let keep = |q: StateId| access[q] && coaccess[q];
        let mut order: Vec<StateId> = Vec::with_capacity(self.states.len());
        if let Some(s) = self.start.filter(|&s| keep(s)) {
            order.push(s);
        }
        order.extend((0..self.states.len()).filter(|&q| keep(q) && Some(q) != self.start));
        for &q in &order {
            remap[q] = Some(out.add_state());
        }
        if order.is_empty() {
            return out;
        }
        out.start = Some(0);
        for &q in &order {
            let nq = remap[q].unwrap();
            out.states[nq].final_weight = self.states[q].final_weight;
            for a in &self.states[q].arcs {
                if a.weight.is_zero() {
                    continue;
                }
                if let Some(nr) = remap[a.next] {
                    out.states[nq].arcs.push(Arc::new(a.label, a.weight, nr));
                }
            }
        }
        out
    }

    /// Remove epsilon arcs from an acyclic lattice. Epsilon paths between two
    /// states are summarized by their best weight, so the accepted language
    /// and the best weight of every label sequence are preserved.
    pub fn remove_epsilons(&self) -> Result<Lattice, LatticeError> {
        let order = self.topological_order()?;
        let n = self.states.len();
        // closure[q] = best epsilon-path weight from q to each state.
        let mut closure: Vec<Vec<(StateId, LexWeight)>> = vec![Vec::new(); n];
        for &q in order.iter().rev() {
            let mut acc: Vec<LexWeight> = vec![LexWeight::zero(); n];
            acc[q] = LexWeight::one();
            for a in &self.states[q].arcs {
                if a.label != Label::Epsilon {
                    continue;
                }
                for &(r, w) in &closure[a.next] {
                    acc[r] = acc[r].plus(a.weight.times(w));
                }
            }
            closure[q] = acc
                .into_iter()
                .enumerate()
                .filter(|(_, w)| !w.is_zero())
                .collect();
        }
        let mut out = Lattice::new();
        for _ in 0..n {
            out.add_state();
        }
        out.start = self.start;
        for (q, reach) in closure.iter().enumerate() {
            let mut final_weight = LexWeight::zero();
            for &(r, w) in reach {
                final_weight = final_weight.plus(w.times(self.states[r].final_weight));
                for a in &self.states[r].arcs {
                    if a.label != Label::Epsilon {
                        out.states[q]
                            .arcs
                            .push(Arc::new(a.label, w.times(a.weight), a.next));
                    }
                }
            }
            out.states[q].final_weight = final_weight;
        }
        Ok(out.trim())
    }

    /// Epsilon-free, trimmed copy ready for scoring.
    pub fn prepared(&self) -> Result<Lattice, LatticeError> {
        self.topological_order()?;
        let lattice = if self.has_epsilons() {
            self.remove_epsilons()?
        } else {
            self.trim()
        };
        if lattice.start.is_none() {
            return Err(LatticeError::EmptyLattice);
        }
        Ok(lattice)
    }

    /// Label sequences of all complete paths with their weights. Exponential;
    /// meant for small lattices and diagnostics.
    pub fn paths(&self) -> Vec<(Vec<Label>, LexWeight)> {
        let mut out = Vec::new();
        if let Some(start) = self.start {
            let mut labels = Vec::new();
            self.collect_paths(start, LexWeight::one(), &mut labels, &mut out);
        }
        out
    }

    fn collect_paths(
        &self,
        q: StateId,
        w: LexWeight,
        labels: &mut Vec<Label>,
        out: &mut Vec<(Vec<Label>, LexWeight)>,
    ) {
        if self.is_final(q) {
            out.push((labels.clone(), w.times(self.states[q].final_weight)));
        }
        for a in &self.states[q].arcs {
            labels.push(a.label);
            self.collect_paths(a.next, w.times(a.weight), labels, out);
            labels.pop();
        }
    }

    /// Serialize as tab-separated text: `src dst label edit,lm` per arc and
    /// `state edit,lm` per final state. State 0 is the start; lattices whose
    /// start is elsewhere are renumbered by swapping the start with state 0.
    pub fn to_text(&self) -> String {
        let n = self.states.len();
        let start = self.start.unwrap_or(0);
        let map = |q: StateId| {
            if q == start {
                0
            } else if q == 0 {
                start
            } else {
                q
            }
        };
        let mut order: Vec<StateId> = (0..n).collect();
        order.sort_by_key(|&q| map(q));
        let mut out = String::new();
        for &q in &order {
            for a in &self.states[q].arcs {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}",
                    map(q),
                    map(a.next),
                    a.label,
                    a.weight
                );
            }
        }
        for &q in &order {
            if self.is_final(q) {
                let _ = writeln!(out, "{}\t{}", map(q), self.states[q].final_weight);
            }
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Lattice, LatticeError> {
        let mut lattice = Lattice::new();
        let ensure = |lattice: &mut Lattice, q: StateId| {
            while lattice.states.len() <= q {
                lattice.add_state();
            }
        };
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            if line.is_empty() {
                continue;
            }
            let err = |message: &str| LatticeError::Parse {
                line: line_no,
                message: message.to_string(),
            };
            let fields: Vec<&str> = line.split('\t').collect();
            match fields.as_slice() {
                [src, dst, label, weight] => {
                    let src: StateId = src.parse().map_err(|_| err("bad source state"))?;
                    let dst: StateId = dst.parse().map_err(|_| err("bad target state"))?;
                    let label = parse_label(label)
                        .ok_or_else(|| err("label must be one character or <eps>"))?;
                    let weight = parse_weight(weight).ok_or_else(|| err("bad weight"))?;
                    ensure(&mut lattice, src.max(dst));
                    lattice.add_arc(src, Arc::new(label, weight, dst));
                }
                [state, weight] => {
                    let state: StateId = state.parse().map_err(|_| err("bad final state"))?;
                    let weight = parse_weight(weight).ok_or_else(|| err("bad weight"))?;
                    ensure(&mut lattice, state);
                    lattice.set_final(state, weight);
                }
                _ => return Err(err("expected 2 or 4 tab-separated fields")),
            }
        }
        if !lattice.states.is_empty() {
            lattice.start = Some(0);
        }
        Ok(lattice)
    }
}

fn parse_label(s: &str) -> Option<Label> {
    if s == "<eps>" {
        return Some(Label::Epsilon);
    }
    let mut it = s.chars();
    match (it.next(), it.next()) {
        (Some(c), None) => Some(Label::Char(c)),
        _ => None,
    }
}

fn parse_weight(s: &str) -> Option<LexWeight> {
    let (edit, lm) = s.split_once(',')?;
    let edit: f64 = edit.trim().parse().ok()?;
    let lm: f64 = lm.trim().parse().ok()?;
    if edit.is_nan() || lm.is_nan() {
        return None;
    }
    Some(LexWeight::new(edit, lm))
}

/// ⊕ over all complete paths of the ⊗-product of their weights.
pub fn shortest_distance(lattice: &Lattice) -> Result<LexWeight, LatticeError> {
    let order = lattice.topological_order()?;
    let start = lattice.start.ok_or(LatticeError::EmptyLattice)?;
    let mut dist = vec![LexWeight::zero(); lattice.num_states()];
    dist[start] = LexWeight::one();
    let mut total = LexWeight::zero();
    for &q in &order {
        if dist[q].is_zero() {
            continue;
        }
        total = total.plus(dist[q].times(lattice.final_weight(q)));
        for a in lattice.arcs(q) {
            dist[a.next] = dist[a.next].plus(dist[q].times(a.weight));
        }
    }
    if total.is_zero() {
        Err(LatticeError::EmptyLattice)
    } else {
        Ok(total)
    }
}

/// Labels and weight of a minimum-weight complete path. Among paths of equal
/// weight the first one found in arc order wins.
pub fn shortest_path(lattice: &Lattice) -> Result<(Vec<Label>, LexWeight), LatticeError> {
    let order = lattice.topological_order()?;
    lattice.start.ok_or(LatticeError::EmptyLattice)?;
    // Backward distances so the path can be read off going forward.
    let n = lattice.num_states();
    let mut tail = vec![LexWeight::zero(); n];
    for &q in order.iter().rev() {
        let mut best = lattice.final_weight(q);
        for a in lattice.arcs(q) {
            best = best.plus(a.weight.times(tail[a.next]));
        }
        tail[q] = best;
    }
    let start = lattice.start.unwrap();
    if tail[start].is_zero() {
        return Err(LatticeError::EmptyLattice);
    }
    let mut labels = Vec::new();
    let mut q = start;
    loop {
        if lattice.final_weight(q) == tail[q] {
            break;
        }
        let arc = lattice
            .arcs(q)
            .iter()
            .find(|a| a.weight.times(tail[a.next]) == tail[q])
            .expect("backward distance must be realized by some arc");
        labels.push(arc.label);
        q = arc.next;
    }
    Ok((labels, tail[start]))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(e: f64, l: f64) -> LexWeight {
        LexWeight::new(e, l)
    }

    #[test]
    fn single_path_distance_is_one() {
        let lat = Lattice::from_str_path("だめ");
        assert_eq!(shortest_distance(&lat).unwrap(), w(0.0, 0.0));
    }

    #[test]
    fn parallel_paths_tie_broken_by_lm() {
        let mut lat = Lattice::new();
        let s = lat.add_state();
        let f = lat.add_state();
        lat.set_start(s);
        lat.set_final(f, LexWeight::one());
        lat.add_arc(s, Arc::new(Label::Char('a'), w(1.0, 5.0), f));
        lat.add_arc(s, Arc::new(Label::Char('b'), w(1.0, 2.0), f));
        assert_eq!(shortest_distance(&lat).unwrap(), w(1.0, 2.0));
        let (labels, weight) = shortest_path(&lat).unwrap();
        assert_eq!(labels, vec![Label::Char('b')]);
        assert_eq!(weight, w(1.0, 2.0));
    }

    #[test]
    fn empty_lattice_is_an_error() {
        let mut lat = Lattice::new();
        let s = lat.add_state();
        lat.set_start(s);
        assert_eq!(shortest_distance(&lat), Err(LatticeError::EmptyLattice));
        assert_eq!(
            shortest_distance(&Lattice::new()),
            Err(LatticeError::EmptyLattice)
        );
    }

    #[test]
    fn cycle_detected() {
        let mut lat = Lattice::new();
        let a = lat.add_state();
        let b = lat.add_state();
        lat.set_start(a);
        lat.set_final(b, LexWeight::one());
        lat.add_arc(a, Arc::new(Label::Char('x'), LexWeight::one(), b));
        lat.add_arc(b, Arc::new(Label::Char('y'), LexWeight::one(), a));
        assert_eq!(lat.topological_order(), Err(LatticeError::Cyclic));
    }

    #[test]
    fn trim_drops_dead_end() {
        let mut lat = Lattice::from_str_path("ab");
        let dead = lat.add_state();
        lat.add_arc(0, Arc::new(Label::Char('z'), LexWeight::one(), dead));
        let trimmed = lat.trim();
        assert_eq!(trimmed.num_states(), lat.num_states() - 1);
        assert_eq!(trimmed.paths(), lat.paths());
        assert_eq!(trimmed.trim(), trimmed);
    }

    #[test]
    fn trim_of_pathless_lattice_is_empty() {
        let mut lat = Lattice::new();
        let s = lat.add_state();
        lat.set_start(s);
        let t = lat.trim();
        assert_eq!(t.num_states(), 0);
        assert_eq!(t.start(), None);
    }

    #[test]
    fn epsilon_removal_preserves_language() {
        // 0 -eps-> 1 -a-> 2 (final), 0 -b-> 2, 1 final with weight <0,3>
        let mut lat = Lattice::new();
        for _ in 0..3 {
            lat.add_state();
        }
        lat.set_start(0);
        lat.add_arc(0, Arc::new(Label::Epsilon, w(0.0, 1.0), 1));
        lat.add_arc(1, Arc::new(Label::Char('a'), w(0.0, 0.0), 2));
        lat.add_arc(0, Arc::new(Label::Char('b'), w(0.0, 0.0), 2));
        lat.set_final(2, LexWeight::one());
        lat.set_final(1, w(0.0, 3.0));
        let out = lat.remove_epsilons().unwrap();
        assert!(!out.has_epsilons());
        let mut paths: Vec<_> = out
            .paths()
            .into_iter()
            .map(|(l, w)| (l.iter().map(|x| x.to_string()).collect::<String>(), w))
            .collect();
        paths.sort_by(|a, b| a.0.cmp(&b.0));
        assert_eq!(
            paths,
            vec![
                (String::new(), w(0.0, 4.0)),
                ("a".to_string(), w(0.0, 1.0)),
                ("b".to_string(), w(0.0, 0.0)),
            ]
        );
    }

    #[test]
    fn text_round_trip() {
        let mut lat = Lattice::new();
        for _ in 0..3 {
            lat.add_state();
        }
        lat.set_start(0);
        lat.add_arc(0, Arc::new(Label::Char('ラ'), w(0.0, 0.5), 1));
        lat.add_arc(0, Arc::new(Label::Epsilon, w(1.0, 0.0), 2));
        lat.add_arc(1, Arc::new(Label::Char('\u{30FC}'), LexWeight::one(), 2));
        lat.set_final(2, LexWeight::one());
        let text = lat.to_text();
        assert_eq!(
            text,
            "0\t1\tラ\t0,0.5\n0\t2\t<eps>\t1,0\n1\t2\tー\t0,0\n2\t0,0\n"
        );
        assert_eq!(Lattice::from_text(&text).unwrap(), lat);
    }

    #[test]
    fn text_parse_errors_carry_line_numbers() {
        let err = Lattice::from_text("0\t1\tab\t0,0\n").unwrap_err();
        assert!(matches!(err, LatticeError::Parse { line: 1, .. }));
        let err = Lattice::from_text("0\t1\ta\t0,0\n1\tx\n").unwrap_err();
        assert!(matches!(err, LatticeError::Parse { line: 2, .. }));
    }
}
