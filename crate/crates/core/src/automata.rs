// SPDX-License-Identifier: Apache-2.0

//! Symbolic finite automata over [`IntervalList`] labels.
//!
//! States are dense integers local to each automaton; every construction
//! that combines automata re-indexes its result. Labels on stored
//! transitions are always canonical and non-empty.
//!
//! [`Sfa`] keeps at most one transition per `(src, dst)` pair, merging the
//! labels of parallel edges. [`EpsilonSfa`] keeps its transitions as a plain
//! set, which is what product constructions produce and compare.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::{self, Write as _};
use std::ops::Deref;

use crate::error::{Error, Result};
use crate::interval::{CodePoint, Interval, IntervalList};

pub type StateId = usize;

/// A finite sequence of code points.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word(Vec<CodePoint>);

impl Word {
    pub fn new(symbols: Vec<CodePoint>) -> Self {
        Word(symbols)
    }

    pub fn empty() -> Self {
        Word(Vec::new())
    }

    pub fn push(&mut self, c: CodePoint) {
        self.0.push(c);
    }

    pub fn into_inner(self) -> Vec<CodePoint> {
        self.0
    }

    /// The word as a `String`, or `None` if some code point is a surrogate.
    pub fn to_string_lossless(&self) -> Option<String> {
        self.0.iter().map(|c| c.to_char()).collect()
    }
}

impl Deref for Word {
    type Target = [CodePoint];

    fn deref(&self) -> &[CodePoint] {
        &self.0
    }
}

impl From<&str> for Word {
    fn from(s: &str) -> Self {
        Word(s.chars().map(CodePoint::from).collect())
    }
}

impl From<Vec<CodePoint>> for Word {
    fn from(v: Vec<CodePoint>) -> Self {
        Word(v)
    }
}

impl FromIterator<CodePoint> for Word {
    fn from_iter<T: IntoIterator<Item = CodePoint>>(iter: T) -> Self {
        Word(iter.into_iter().collect())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.0 {
            match c.to_char() {
                Some(ch) if !ch.is_control() => f.write_char(ch)?,
                _ => write!(f, "\\u{{{:x}}}", c.value())?,
            }
        }
        Ok(())
    }
}

/// A labeled transition `src --label--> dst`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Transition {
    pub src: StateId,
    pub label: IntervalList,
    pub dst: StateId,
}

impl Transition {
    pub fn new(src: StateId, label: IntervalList, dst: StateId) -> Self {
        Transition { src, label, dst }
    }
}

/// Resource limits for constructions that can blow up.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Limits {
    pub max_states: usize,
}

impl Limits {
    pub const DEFAULT_MAX_STATES: usize = 100_000;

    pub fn unbounded() -> Self {
        Limits {
            max_states: usize::MAX,
        }
    }

    pub(crate) fn check(&self, states: usize, what: &'static str) -> Result<()> {
        if states > self.max_states {
            return Err(Error::StateLimit {
                limit: self.max_states,
                what,
            });
        }
        Ok(())
    }
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_states: Self::DEFAULT_MAX_STATES,
        }
    }
}

fn check_states<'a>(
    num_states: usize,
    sets: impl IntoIterator<Item = &'a BTreeSet<StateId>>,
) -> Result<()> {
    for set in sets {
        if let Some(&q) = set.iter().find(|&&q| q >= num_states) {
            return Err(Error::Invalid(format!(
                "state {q} out of range for {num_states} states"
            )));
        }
    }
    Ok(())
}

fn check_transition(num_states: usize, t: &Transition) -> Result<()> {
    if t.src >= num_states || t.dst >= num_states {
        return Err(Error::Invalid(format!(
            "transition {} -> {} out of range for {num_states} states",
            t.src, t.dst
        )));
    }
    if t.label.is_empty() {
        return Err(Error::Invalid(format!(
            "transition {} -> {} has an empty label",
            t.src, t.dst
        )));
    }
    Ok(())
}

// Forward reachability over a successor relation.
pub(crate) fn reachable(num_states: usize, roots: &BTreeSet<StateId>, succ: &[Vec<StateId>]) -> Vec<bool> {
    let mut seen = vec![false; num_states];
    let mut stack: Vec<StateId> = roots.iter().copied().collect();
    for &q in &stack {
        seen[q] = true;
    }
    while let Some(q) = stack.pop() {
        for &r in &succ[q] {
            if !seen[r] {
                seen[r] = true;
                stack.push(r);
            }
        }
    }
    seen
}

/// Graphviz escaping for quoted ids and labels.
pub(crate) fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

pub(crate) fn dot_header(out: &mut String, name: &str, num_states: usize, initial: &BTreeSet<StateId>, accepting: &BTreeSet<StateId>) {
    let _ = writeln!(out, "digraph {name} {{");
    let _ = writeln!(out, "  rankdir=LR;");
    for q in 0..num_states {
        let shape = if accepting.contains(&q) { "doublecircle" } else { "circle" };
        let _ = writeln!(out, "  q{q} [shape={shape}];");
    }
    for &q in initial {
        let _ = writeln!(out, "  start{q} [shape=point];");
        let _ = writeln!(out, "  start{q} -> q{q};");
    }
}

/// A symbolic finite automaton.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sfa {
    num_states: usize,
    // sorted by (src, dst), at most one entry per pair
    transitions: Vec<Transition>,
    initial: BTreeSet<StateId>,
    accepting: BTreeSet<StateId>,
}

impl Sfa {
    /// Validating constructor. Parallel edges are merged.
    pub fn new(
        num_states: usize,
        initial: impl IntoIterator<Item = StateId>,
        accepting: impl IntoIterator<Item = StateId>,
        transitions: impl IntoIterator<Item = Transition>,
    ) -> Result<Sfa> {
        let initial: BTreeSet<_> = initial.into_iter().collect();
        let accepting: BTreeSet<_> = accepting.into_iter().collect();
        check_states(num_states, [&initial, &accepting])?;
        let transitions: Vec<_> = transitions.into_iter().collect();
        for t in &transitions {
            check_transition(num_states, t)?;
        }
        Ok(Sfa::build(num_states, initial, accepting, transitions))
    }

    // Internal constructor: endpoints are trusted, empty labels are dropped.
    pub(crate) fn build(
        num_states: usize,
        initial: BTreeSet<StateId>,
        accepting: BTreeSet<StateId>,
        transitions: impl IntoIterator<Item = Transition>,
    ) -> Sfa {
        let mut merged: BTreeMap<(StateId, StateId), IntervalList> = BTreeMap::new();
        for t in transitions {
            if t.label.is_empty() {
                continue;
            }
            merged
                .entry((t.src, t.dst))
                .and_modify(|l| *l = l.union(&t.label))
                .or_insert(t.label);
        }
        let transitions = merged
            .into_iter()
            .map(|((src, dst), label)| Transition { src, label, dst })
            .collect();
        Sfa {
            num_states,
            transitions,
            initial,
            accepting,
        }
    }

    /// The automaton with no states, accepting nothing.
    pub fn empty() -> Sfa {
        Sfa::build(0, BTreeSet::new(), BTreeSet::new(), [])
    }

    /// Accepts exactly the empty word.
    pub fn epsilon() -> Sfa {
        Sfa::build(1, BTreeSet::from([0]), BTreeSet::from([0]), [])
    }

    /// Accepts every word.
    pub fn universal() -> Sfa {
        Sfa::build(
            1,
            BTreeSet::from([0]),
            BTreeSet::from([0]),
            [Transition::new(0, IntervalList::full(), 0)],
        )
    }

    /// Accepts exactly `word`.
    pub fn literal(word: &[CodePoint]) -> Sfa {
        let n = word.len();
        Sfa::build(
            n + 1,
            BTreeSet::from([0]),
            BTreeSet::from([n]),
            word.iter()
                .enumerate()
                .map(|(k, &c)| Transition::new(k, IntervalList::single(c), k + 1)),
        )
    }

    /// Accepts the one-symbol words drawn from `label`.
    pub fn symbol(label: IntervalList) -> Sfa {
        Sfa::build(
            2,
            BTreeSet::from([0]),
            BTreeSet::from([1]),
            [Transition::new(0, label, 1)],
        )
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn initial(&self) -> &BTreeSet<StateId> {
        &self.initial
    }

    pub fn accepting(&self) -> &BTreeSet<StateId> {
        &self.accepting
    }

    /// Transitions leaving `q`.
    pub fn transitions_from(&self, q: StateId) -> &[Transition] {
        let lo = self.transitions.partition_point(|t| t.src < q);
        let hi = self.transitions.partition_point(|t| t.src <= q);
        &self.transitions[lo..hi]
    }

    fn successors(&self) -> Vec<Vec<StateId>> {
        let mut succ = vec![Vec::new(); self.num_states];
        for t in &self.transitions {
            succ[t.src].push(t.dst);
        }
        succ
    }

    fn predecessors(&self) -> Vec<Vec<StateId>> {
        let mut pred = vec![Vec::new(); self.num_states];
        for t in &self.transitions {
            pred[t.dst].push(t.src);
        }
        pred
    }

    /// Membership by simulating the set of active states.
    pub fn accepts(&self, word: &[CodePoint]) -> bool {
        let mut current = self.initial.clone();
        for &c in word {
            if current.is_empty() {
                return false;
            }
            current = current
                .iter()
                .flat_map(|&q| self.transitions_from(q))
                .filter(|t| t.label.contains(c))
                .map(|t| t.dst)
                .collect();
        }
        current.iter().any(|q| self.accepting.contains(q))
    }

    /// True iff no accepting state is reachable from an initial state.
    pub fn is_empty(&self) -> bool {
        let seen = reachable(self.num_states, &self.initial, &self.successors());
        !self.accepting.iter().any(|&q| seen[q])
    }

    /// Keep only states that are reachable and co-reachable.
    pub fn trim(&self) -> Sfa {
        let fwd = reachable(self.num_states, &self.initial, &self.successors());
        let bwd = reachable(self.num_states, &self.accepting, &self.predecessors());
        let mut rename = vec![usize::MAX; self.num_states];
        let mut next = 0;
        for q in 0..self.num_states {
            if fwd[q] && bwd[q] {
                rename[q] = next;
                next += 1;
            }
        }
        let keep = |q: &StateId| rename[*q] != usize::MAX;
        Sfa {
            num_states: next,
            transitions: self
                .transitions
                .iter()
                .filter(|t| keep(&t.src) && keep(&t.dst))
                .map(|t| Transition::new(rename[t.src], t.label.clone(), rename[t.dst]))
                .collect(),
            initial: self.initial.iter().filter(|q| keep(q)).map(|&q| rename[q]).collect(),
            accepting: self.accepting.iter().filter(|q| keep(q)).map(|&q| rename[q]).collect(),
        }
    }

    /// Disjoint union.
    pub fn union(&self, other: &Sfa) -> Sfa {
        let off = self.num_states;
        Sfa::build(
            self.num_states + other.num_states,
            self.initial.iter().copied().chain(other.initial.iter().map(|q| q + off)).collect(),
            self.accepting.iter().copied().chain(other.accepting.iter().map(|q| q + off)).collect(),
            self.transitions.iter().cloned().chain(
                other
                    .transitions
                    .iter()
                    .map(|t| Transition::new(t.src + off, t.label.clone(), t.dst + off)),
            ),
        )
    }

    /// Language concatenation, built without ε edges: every accepting state
    /// of `self` also gets the outgoing edges of `other`'s initial states.
    pub fn concat(&self, other: &Sfa) -> Sfa {
        let off = self.num_states;
        let other_initial_accepts = other.initial.iter().any(|q| other.accepting.contains(q));
        let self_accepts_empty = self.initial.iter().any(|q| self.accepting.contains(q));

        let mut transitions: Vec<Transition> = self.transitions.clone();
        transitions.extend(
            other
                .transitions
                .iter()
                .map(|t| Transition::new(t.src + off, t.label.clone(), t.dst + off)),
        );
        for &f in &self.accepting {
            for &i in &other.initial {
                for t in other.transitions_from(i) {
                    transitions.push(Transition::new(f, t.label.clone(), t.dst + off));
                }
            }
        }

        let mut initial = self.initial.clone();
        if self_accepts_empty {
            initial.extend(other.initial.iter().map(|q| q + off));
        }
        let mut accepting: BTreeSet<StateId> = other.accepting.iter().map(|q| q + off).collect();
        if other_initial_accepts {
            accepting.extend(self.accepting.iter().copied());
        }
        Sfa::build(self.num_states + other.num_states, initial, accepting, transitions).trim()
    }

    /// Product automaton for `L(self) ∩ L(other)` without a state ceiling.
    pub fn intersect(&self, other: &Sfa) -> Sfa {
        self.intersect_within(other, &Limits::unbounded())
            .expect("unbounded limits cannot be exceeded")
    }

    /// Product automaton for `L(self) ∩ L(other)`; only pairs reachable from
    /// the initial pairs are built.
    pub fn intersect_within(&self, other: &Sfa, limits: &Limits) -> Result<Sfa> {
        let mut index: HashMap<(StateId, StateId), StateId> = HashMap::new();
        let mut queue = VecDeque::new();
        let mut initial = BTreeSet::new();
        for &p in &self.initial {
            for &q in &other.initial {
                let id = index.len();
                index.insert((p, q), id);
                initial.insert(id);
                queue.push_back((p, q));
            }
        }
        limits.check(index.len(), "intersection")?;

        let mut transitions = Vec::new();
        let mut accepting = BTreeSet::new();
        while let Some((p, q)) = queue.pop_front() {
            let src = index[&(p, q)];
            if self.accepting.contains(&p) && other.accepting.contains(&q) {
                accepting.insert(src);
            }
            for t1 in self.transitions_from(p) {
                for t2 in other.transitions_from(q) {
                    let label = t1.label.intersect(&t2.label);
                    if label.is_empty() {
                        continue;
                    }
                    let key = (t1.dst, t2.dst);
                    let dst = match index.get(&key) {
                        Some(&d) => d,
                        None => {
                            let d = index.len();
                            index.insert(key, d);
                            limits.check(index.len(), "intersection")?;
                            queue.push_back(key);
                            d
                        }
                    };
                    transitions.push(Transition::new(src, label, dst));
                }
            }
        }
        Ok(Sfa::build(index.len(), initial, accepting, transitions))
    }

    /// Subset construction over minterms of the outgoing labels. The result
    /// has one initial state and is complete: the empty subset acts as a
    /// sink with a full self-loop whenever some symbol leads nowhere.
    pub fn determinize(&self, limits: &Limits) -> Result<Sfa> {
        let start: Vec<StateId> = self.initial.iter().copied().collect();
        let mut index: HashMap<Vec<StateId>, StateId> = HashMap::new();
        let mut subsets: Vec<Vec<StateId>> = Vec::new();
        index.insert(start.clone(), 0);
        subsets.push(start);

        let mut transitions = Vec::new();
        let mut k = 0;
        while k < subsets.len() {
            let outgoing: Vec<&Transition> = subsets[k]
                .iter()
                .flat_map(|&q| self.transitions_from(q))
                .collect();
            for (targets, label) in minterms(&outgoing) {
                let dst = match index.get(&targets) {
                    Some(&d) => d,
                    None => {
                        let d = subsets.len();
                        index.insert(targets.clone(), d);
                        subsets.push(targets);
                        limits.check(subsets.len(), "determinization")?;
                        d
                    }
                };
                transitions.push(Transition::new(k, label, dst));
            }
            k += 1;
        }

        let accepting = subsets
            .iter()
            .enumerate()
            .filter(|(_, s)| s.iter().any(|q| self.accepting.contains(q)))
            .map(|(id, _)| id)
            .collect();
        Ok(Sfa::build(subsets.len(), BTreeSet::from([0]), accepting, transitions))
    }

    /// Automaton for the complement language: determinize, then flip
    /// acceptance.
    pub fn complement(&self, limits: &Limits) -> Result<Sfa> {
        let det = self.determinize(limits)?;
        let accepting = (0..det.num_states)
            .filter(|q| !det.accepting.contains(q))
            .collect();
        Ok(Sfa { accepting, ..det })
    }

    /// One initial state and pairwise-disjoint outgoing labels.
    pub fn is_deterministic(&self) -> bool {
        self.initial.len() == 1
            && (0..self.num_states).all(|q| {
                let out = self.transitions_from(q);
                out.iter().enumerate().all(|(i, a)| {
                    out[i + 1..].iter().all(|b| a.label.intersect(&b.label).is_empty())
                })
            })
    }

    /// Outgoing labels of every state cover the whole alphabet.
    pub fn is_complete(&self) -> bool {
        (0..self.num_states).all(|q| {
            self.transitions_from(q)
                .iter()
                .fold(IntervalList::empty(), |acc, t| acc.union(&t.label))
                .is_full()
        })
    }

    /// A shortest accepted word, choosing the smallest symbol of each label.
    pub fn shortest_word(&self) -> Option<Word> {
        let mut parent: Vec<Option<(StateId, CodePoint)>> = vec![None; self.num_states];
        let mut seen = vec![false; self.num_states];
        let mut queue: VecDeque<StateId> = self.initial.iter().copied().collect();
        for &q in &self.initial {
            seen[q] = true;
        }
        while let Some(q) = queue.pop_front() {
            if self.accepting.contains(&q) {
                let mut word = Vec::new();
                let mut cur = q;
                while let Some((prev, c)) = parent[cur] {
                    word.push(c);
                    cur = prev;
                }
                word.reverse();
                return Some(Word(word));
            }
            for t in self.transitions_from(q) {
                if !seen[t.dst] {
                    seen[t.dst] = true;
                    parent[t.dst] = Some((q, t.label.least().expect("labels are non-empty")));
                    queue.push_back(t.dst);
                }
            }
        }
        None
    }

    /// Re-read as an ε-automaton with no ε edges.
    pub fn to_epsilon(&self) -> EpsilonSfa {
        EpsilonSfa {
            num_states: self.num_states,
            transitions: self.transitions.iter().cloned().collect(),
            epsilons: BTreeSet::new(),
            initial: self.initial.clone(),
            accepting: self.accepting.clone(),
        }
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        dot_header(&mut out, "sfa", self.num_states, &self.initial, &self.accepting);
        for t in &self.transitions {
            let _ = writeln!(
                out,
                "  q{} -> q{} [label=\"{}\"];",
                t.src,
                t.dst,
                dot_escape(&t.label.to_string())
            );
        }
        out.push_str("}\n");
        out
    }
}

// Refine the alphabet into atoms that each lie entirely inside or entirely
// outside every outgoing label, then merge atoms with equal target sets.
// The atoms partition the alphabet, so symbols leading nowhere come out
// with the empty target set.
fn minterms(outgoing: &[&Transition]) -> BTreeMap<Vec<StateId>, IntervalList> {
    let mut atoms: Vec<(IntervalList, BTreeSet<StateId>)> =
        vec![(IntervalList::full(), BTreeSet::new())];
    for t in outgoing {
        let mut refined = Vec::with_capacity(atoms.len() + 1);
        for (atom, targets) in atoms {
            let inside = atom.intersect(&t.label);
            if inside.is_empty() {
                refined.push((atom, targets));
                continue;
            }
            let outside = atom.difference(&t.label);
            let mut with = targets.clone();
            with.insert(t.dst);
            refined.push((inside, with));
            if outside.is_nonempty() {
                refined.push((outside, targets));
            }
        }
        atoms = refined;
    }
    let mut grouped: BTreeMap<Vec<StateId>, IntervalList> = BTreeMap::new();
    for (atom, targets) in atoms {
        grouped
            .entry(targets.into_iter().collect())
            .and_modify(|l| *l = l.union(&atom))
            .or_insert(atom);
    }
    grouped
}

/// A symbolic automaton with additional unlabeled ε edges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EpsilonSfa {
    num_states: usize,
    transitions: BTreeSet<Transition>,
    epsilons: BTreeSet<(StateId, StateId)>,
    initial: BTreeSet<StateId>,
    accepting: BTreeSet<StateId>,
}

impl EpsilonSfa {
    pub fn new(
        num_states: usize,
        initial: impl IntoIterator<Item = StateId>,
        accepting: impl IntoIterator<Item = StateId>,
        transitions: impl IntoIterator<Item = Transition>,
        epsilons: impl IntoIterator<Item = (StateId, StateId)>,
    ) -> Result<EpsilonSfa> {
        let initial: BTreeSet<_> = initial.into_iter().collect();
        let accepting: BTreeSet<_> = accepting.into_iter().collect();
        check_states(num_states, [&initial, &accepting])?;
        let transitions: BTreeSet<_> = transitions.into_iter().collect();
        for t in &transitions {
            check_transition(num_states, t)?;
        }
        let epsilons: BTreeSet<_> = epsilons.into_iter().collect();
        if let Some((p, q)) = epsilons.iter().find(|(p, q)| *p >= num_states || *q >= num_states) {
            return Err(Error::Invalid(format!(
                "epsilon edge {p} -> {q} out of range for {num_states} states"
            )));
        }
        Ok(EpsilonSfa {
            num_states,
            transitions,
            epsilons,
            initial,
            accepting,
        })
    }

    pub(crate) fn from_parts(
        num_states: usize,
        initial: BTreeSet<StateId>,
        accepting: BTreeSet<StateId>,
        transitions: BTreeSet<Transition>,
        epsilons: BTreeSet<(StateId, StateId)>,
    ) -> EpsilonSfa {
        debug_assert!(transitions.iter().all(|t| t.label.is_nonempty()));
        EpsilonSfa {
            num_states,
            transitions,
            epsilons,
            initial,
            accepting,
        }
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn transitions(&self) -> &BTreeSet<Transition> {
        &self.transitions
    }

    pub fn epsilons(&self) -> &BTreeSet<(StateId, StateId)> {
        &self.epsilons
    }

    pub fn initial(&self) -> &BTreeSet<StateId> {
        &self.initial
    }

    pub fn accepting(&self) -> &BTreeSet<StateId> {
        &self.accepting
    }

    fn labeled_out(&self) -> Vec<Vec<&Transition>> {
        let mut out = vec![Vec::new(); self.num_states];
        for t in &self.transitions {
            out[t.src].push(t);
        }
        out
    }

    fn epsilon_succ(&self) -> Vec<Vec<StateId>> {
        let mut succ = vec![Vec::new(); self.num_states];
        for &(p, q) in &self.epsilons {
            succ[p].push(q);
        }
        succ
    }

    /// ε-closure of every state. Cycles, including self-loops, are fine.
    pub fn closures(&self) -> Vec<BTreeSet<StateId>> {
        let succ = self.epsilon_succ();
        (0..self.num_states)
            .map(|q| {
                let seen = reachable(self.num_states, &BTreeSet::from([q]), &succ);
                (0..self.num_states).filter(|&r| seen[r]).collect()
            })
            .collect()
    }

    /// Membership by simulation, closing the active set under ε after each
    /// step.
    pub fn accepts(&self, word: &[CodePoint]) -> bool {
        let succ = self.epsilon_succ();
        let out = self.labeled_out();
        let close = |set: BTreeSet<StateId>| -> BTreeSet<StateId> {
            let seen = reachable(self.num_states, &set, &succ);
            (0..self.num_states).filter(|&q| seen[q]).collect()
        };
        let mut current = close(self.initial.clone());
        for &c in word {
            let next = current
                .iter()
                .flat_map(|&q| out[q].iter())
                .filter(|t| t.label.contains(c))
                .map(|t| t.dst)
                .collect();
            current = close(next);
        }
        current.iter().any(|q| self.accepting.contains(q))
    }

    /// Equivalent automaton without ε edges: each state inherits the labeled
    /// edges and acceptance of its ε-closure. The result is trimmed.
    pub fn eliminate_epsilons(&self) -> Sfa {
        let closures = self.closures();
        let out = self.labeled_out();
        let mut transitions = Vec::new();
        let mut accepting = BTreeSet::new();
        for (q, closure) in closures.iter().enumerate() {
            if closure.iter().any(|r| self.accepting.contains(r)) {
                accepting.insert(q);
            }
            for &r in closure {
                for t in &out[r] {
                    transitions.push(Transition::new(q, t.label.clone(), t.dst));
                }
            }
        }
        Sfa::build(self.num_states, self.initial.clone(), accepting, transitions).trim()
    }

    /// Keep states reachable from the initial states and co-reachable to an
    /// accepting state, following both kinds of edge. Also returns, for each
    /// kept state, its id in `self`.
    pub fn trim(&self) -> (EpsilonSfa, Vec<StateId>) {
        let mut succ = self.epsilon_succ();
        let mut pred = vec![Vec::new(); self.num_states];
        for &(p, q) in &self.epsilons {
            pred[q].push(p);
        }
        for t in &self.transitions {
            succ[t.src].push(t.dst);
            pred[t.dst].push(t.src);
        }
        let fwd = reachable(self.num_states, &self.initial, &succ);
        let bwd = reachable(self.num_states, &self.accepting, &pred);
        let kept: Vec<StateId> = (0..self.num_states).filter(|&q| fwd[q] && bwd[q]).collect();
        let mut rename = vec![usize::MAX; self.num_states];
        for (new, &old) in kept.iter().enumerate() {
            rename[old] = new;
        }
        let keep = |q: StateId| rename[q] != usize::MAX;
        let trimmed = EpsilonSfa {
            num_states: kept.len(),
            transitions: self
                .transitions
                .iter()
                .filter(|t| keep(t.src) && keep(t.dst))
                .map(|t| Transition::new(rename[t.src], t.label.clone(), rename[t.dst]))
                .collect(),
            epsilons: self
                .epsilons
                .iter()
                .filter(|(p, q)| keep(*p) && keep(*q))
                .map(|&(p, q)| (rename[p], rename[q]))
                .collect(),
            initial: self.initial.iter().filter(|&&q| keep(q)).map(|&q| rename[q]).collect(),
            accepting: self.accepting.iter().filter(|&&q| keep(q)).map(|&q| rename[q]).collect(),
        };
        (trimmed, kept)
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        dot_header(&mut out, "esfa", self.num_states, &self.initial, &self.accepting);
        for t in &self.transitions {
            let _ = writeln!(
                out,
                "  q{} -> q{} [label=\"{}\"];",
                t.src,
                t.dst,
                dot_escape(&t.label.to_string())
            );
        }
        for (p, q) in &self.epsilons {
            let _ = writeln!(out, "  q{p} -> q{q} [label=\"ε\", style=dashed];");
        }
        out.push_str("}\n");
        out
    }
}

/// Regular expressions over code points.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Regex {
    Literal(Word),
    Range(Interval),
    Concat(Box<Regex>, Box<Regex>),
    Union(Box<Regex>, Box<Regex>),
    Star(Box<Regex>),
    Plus(Box<Regex>),
    AnyChar,
}

impl Regex {
    pub fn literal(s: &str) -> Regex {
        Regex::Literal(Word::from(s))
    }

    pub fn range(lo: char, hi: char) -> Result<Regex> {
        Ok(Regex::Range(Interval::between(lo.into(), hi.into())?))
    }

    pub fn concat(a: Regex, b: Regex) -> Regex {
        Regex::Concat(Box::new(a), Box::new(b))
    }

    pub fn union(a: Regex, b: Regex) -> Regex {
        Regex::Union(Box::new(a), Box::new(b))
    }

    pub fn star(r: Regex) -> Regex {
        Regex::Star(Box::new(r))
    }

    pub fn plus(r: Regex) -> Regex {
        Regex::Plus(Box::new(r))
    }

    /// Thompson-style construction into an ε-automaton.
    pub fn to_epsilon_sfa(&self) -> EpsilonSfa {
        let mut b = ThompsonBuilder::default();
        let (start, end) = b.fragment(self);
        EpsilonSfa::from_parts(
            b.num_states,
            BTreeSet::from([start]),
            BTreeSet::from([end]),
            b.transitions,
            b.epsilons,
        )
    }

    /// Build the automaton for this expression (via ε-elimination).
    pub fn to_sfa(&self) -> Sfa {
        self.to_epsilon_sfa().eliminate_epsilons()
    }
}

#[derive(Default)]
struct ThompsonBuilder {
    num_states: usize,
    transitions: BTreeSet<Transition>,
    epsilons: BTreeSet<(StateId, StateId)>,
}

impl ThompsonBuilder {
    fn state(&mut self) -> StateId {
        self.num_states += 1;
        self.num_states - 1
    }

    // Returns (entry, exit): the words read on paths from entry to exit are
    // exactly the language of `r`.
    fn fragment(&mut self, r: &Regex) -> (StateId, StateId) {
        match r {
            Regex::Literal(w) => {
                let start = self.state();
                let mut cur = start;
                for &c in w.iter() {
                    let next = self.state();
                    self.transitions
                        .insert(Transition::new(cur, IntervalList::single(c), next));
                    cur = next;
                }
                (start, cur)
            }
            Regex::Range(iv) => self.symbol(IntervalList::from(*iv)),
            Regex::AnyChar => self.symbol(IntervalList::full()),
            Regex::Concat(a, b) => {
                let (a0, a1) = self.fragment(a);
                let (b0, b1) = self.fragment(b);
                self.epsilons.insert((a1, b0));
                (a0, b1)
            }
            Regex::Union(a, b) => {
                let start = self.state();
                let (a0, a1) = self.fragment(a);
                let (b0, b1) = self.fragment(b);
                let end = self.state();
                self.epsilons.extend([(start, a0), (start, b0), (a1, end), (b1, end)]);
                (start, end)
            }
            Regex::Star(a) => {
                let start = self.state();
                let (a0, a1) = self.fragment(a);
                let end = self.state();
                self.epsilons.extend([(start, a0), (a1, a0), (a1, end), (start, end)]);
                (start, end)
            }
            Regex::Plus(a) => {
                let (a0, a1) = self.fragment(a);
                self.epsilons.insert((a1, a0));
                (a0, a1)
            }
        }
    }

    fn symbol(&mut self, label: IntervalList) -> (StateId, StateId) {
        let start = self.state();
        let end = self.state();
        self.transitions.insert(Transition::new(start, label, end));
        (start, end)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testing::{all_words, digits_plus, lang_eq_upto, w};

    fn digit() -> IntervalList {
        IntervalList::from_pairs(&[(48, 57)]).unwrap()
    }

    fn lower() -> IntervalList {
        IntervalList::from_pairs(&[(97, 122)]).unwrap()
    }

    #[test]
    fn digit_plus_membership() {
        let a = digits_plus();
        assert!(a.accepts(&w("2025")));
        assert!(!a.accepts(&w("")));
        assert!(!a.accepts(&w("12a")));
    }

    #[test]
    fn constructor_rejects_bad_parts() {
        assert!(Sfa::new(1, [1], [], []).is_err());
        assert!(Sfa::new(2, [0], [1], [Transition::new(0, IntervalList::empty(), 1)]).is_err());
        assert!(Sfa::new(2, [0], [1], [Transition::new(0, digit(), 2)]).is_err());
        assert!(EpsilonSfa::new(1, [0], [0], [], [(0, 3)]).is_err());
    }

    #[test]
    fn parallel_edges_merge() {
        let a = Sfa::new(
            2,
            [0],
            [1],
            [
                Transition::new(0, IntervalList::from_pairs(&[(1, 2)]).unwrap(), 1),
                Transition::new(0, IntervalList::from_pairs(&[(3, 4)]).unwrap(), 1),
            ],
        )
        .unwrap();
        assert_eq!(a.transitions().len(), 1);
        assert_eq!(a.transitions()[0].label, IntervalList::from_pairs(&[(1, 4)]).unwrap());
    }

    #[test]
    fn epsilon_elimination() {
        // no ε edges: language unchanged
        let plain = digits_plus();
        let e = plain.to_epsilon();
        assert!(lang_eq_upto(&e.eliminate_epsilons(), &plain, &['1', 'a'], 4));

        // q0 -ε-> q1 -[0-9]-> q2
        let e = EpsilonSfa::new(3, [0], [2], [Transition::new(1, digit(), 2)], [(0, 1)]).unwrap();
        let a = e.eliminate_epsilons();
        for word in all_words(&['0', '9', 'x'], 3) {
            let expected = word.len() == 1 && digit().contains(word[0]);
            assert_eq!(a.accepts(&word), expected, "{word}");
            assert_eq!(e.accepts(&word), expected, "{word}");
        }

        // accepting reachable by ε only
        let e = EpsilonSfa::new(2, [0], [1], [], [(0, 1)]).unwrap();
        assert!(e.eliminate_epsilons().accepts(&w("")));

        // ε cycles and self-loops
        let e = EpsilonSfa::new(
            3,
            [0],
            [2],
            [Transition::new(1, digit(), 2)],
            [(0, 0), (0, 1), (1, 0), (2, 0)],
        )
        .unwrap();
        let a = e.eliminate_epsilons();
        assert!(a.accepts(&w("12")));
        assert!(!a.accepts(&w("")));
    }

    #[test]
    fn intersection() {
        let d = digits_plus();
        let seven = Sfa::literal(&w("7"));
        let both = d.intersect(&seven);
        for word in all_words(&['7', '1', 'a'], 3) {
            assert_eq!(both.accepts(&word), word == w("7"));
        }
        assert!(d.intersect(&Sfa::empty()).is_empty());
        assert!(lang_eq_upto(&d.intersect(&d), &d, &['0', '5', 'x'], 4));
        assert!(d.intersect(&Sfa::symbol(lower()).concat(&Sfa::universal())).is_empty());
    }

    #[test]
    fn intersection_ceiling() {
        let a = Regex::star(Regex::AnyChar).to_sfa();
        let big = Sfa::literal(&w("abcdefgh"));
        let err = a.intersect_within(&big, &Limits { max_states: 3 }).unwrap_err();
        assert!(matches!(err, Error::StateLimit { limit: 3, .. }));
    }

    #[test]
    fn union() {
        let xy = Sfa::literal(&w("x")).union(&Sfa::literal(&w("y")));
        for word in all_words(&['x', 'y'], 2) {
            assert_eq!(xy.accepts(&word), word == w("x") || word == w("y"));
        }
        let d = digits_plus();
        assert!(lang_eq_upto(&d.union(&Sfa::empty()), &d, &['3', 'a'], 4));
        let dl = Sfa::symbol(digit()).union(&Sfa::symbol(lower()));
        assert!(dl.accepts(&w("5")));
        assert!(dl.accepts(&w("k")));
        assert!(!dl.accepts(&w("K")));
    }

    #[test]
    fn concatenation() {
        let ab = Sfa::literal(&w("a")).concat(&Sfa::literal(&w("b")));
        assert!(ab.accepts(&w("ab")));
        assert!(!ab.accepts(&w("a")));
        let opt = Sfa::epsilon().union(&Sfa::literal(&w("a")));
        let both = opt.concat(&opt);
        for word in all_words(&['a', 'b'], 3) {
            assert_eq!(both.accepts(&word), word.len() <= 2 && !word.contains(&'b'.into()));
        }
        assert!(Sfa::empty().concat(&digits_plus()).is_empty());
    }

    #[test]
    fn regex_construction() {
        let r = Regex::plus(Regex::range('0', '9').unwrap());
        assert!(lang_eq_upto(&r.to_sfa(), &digits_plus(), &['0', '9', 'a'], 4));

        let eps = Regex::literal("").to_sfa();
        for word in all_words(&['a'], 2) {
            assert_eq!(eps.accepts(&word), word.is_empty());
        }

        let ab_star = Regex::concat(Regex::literal("a"), Regex::star(Regex::literal("b"))).to_sfa();
        for word in all_words(&['a', 'b'], 3) {
            let s = word.to_string();
            let expected = s.starts_with('a') && s[1..].chars().all(|c| c == 'b');
            assert_eq!(ab_star.accepts(&word), expected, "{s}");
        }

        let any = Regex::AnyChar.to_sfa();
        assert!(any.accepts(&[CodePoint::MAX]));
        assert!(!any.accepts(&w("")));

        let u = Regex::union(Regex::literal("ab"), Regex::plus(Regex::literal(""))).to_sfa();
        assert!(u.accepts(&w("ab")) && u.accepts(&w("")) && !u.accepts(&w("a")));
    }

    #[test]
    fn determinization() {
        let d = digits_plus();
        let det = d.determinize(&Limits::default()).unwrap();
        assert!(det.is_deterministic() && det.is_complete());
        assert!(lang_eq_upto(&det, &d, &['0', 'x'], 4));

        let u = d.union(&Regex::plus(Regex::range('0', '5').unwrap()).to_sfa());
        let det = u.determinize(&Limits::default()).unwrap();
        assert!(det.is_deterministic() && det.is_complete());
        assert!(lang_eq_upto(&det, &u, &['0', '7', 'x'], 4));

        let det = Sfa::empty().determinize(&Limits::default()).unwrap();
        assert_eq!(det.num_states(), 1);
        assert!(det.accepting().is_empty());
        assert!(det.is_complete());
    }

    #[test]
    fn determinization_ceiling() {
        // (a|b)* a (a|b)^4 needs 32 subsets
        let ab = Regex::union(Regex::literal("a"), Regex::literal("b"));
        let mut r = Regex::concat(Regex::star(ab.clone()), Regex::literal("a"));
        for _ in 0..4 {
            r = Regex::concat(r, ab.clone());
        }
        let a = r.to_sfa();
        assert!(a.determinize(&Limits { max_states: 8 }).is_err());
        assert!(a.determinize(&Limits::default()).unwrap().num_states() >= 32);
    }

    #[test]
    fn complementation() {
        let all = Sfa::universal().complement(&Limits::default()).unwrap();
        assert!(all.is_empty());

        let ab = Sfa::literal(&w("ab"));
        let not_ab = ab.complement(&Limits::default()).unwrap();
        for word in all_words(&['a', 'b'], 4) {
            assert_eq!(not_ab.accepts(&word), word != w("ab"));
        }
        let back = not_ab.complement(&Limits::default()).unwrap();
        assert!(lang_eq_upto(&back, &ab, &['a', 'b'], 4));
    }

    #[test]
    fn emptiness_and_trim() {
        let dead = Sfa::new(3, [0], [2], [Transition::new(0, digit(), 1)]).unwrap();
        assert!(dead.is_empty());
        assert!(!Sfa::literal(&w("x")).is_empty());
        assert!(digits_plus().intersect(&Regex::plus(Regex::range('a', 'z').unwrap()).to_sfa()).is_empty());

        let with_dead = Sfa::new(
            3,
            [0],
            [1],
            [Transition::new(0, digit(), 1), Transition::new(0, lower(), 2)],
        )
        .unwrap();
        let t = with_dead.trim();
        assert_eq!(t.num_states(), 2);
        assert!(lang_eq_upto(&t, &with_dead, &['1', 'a'], 3));

        let t = dead.trim();
        assert_eq!(t.num_states(), 0);
        assert!(t.is_empty());

        let d = digits_plus();
        let five = Regex::plus(Regex::range('0', '5').unwrap()).to_sfa();
        assert!(lang_eq_upto(&d.intersect(&five).trim(), &d.intersect(&five), &['1', '7', 'a'], 4));
    }

    #[test]
    fn shortest_words() {
        assert_eq!(digits_plus().shortest_word(), Some(w("0")));
        assert_eq!(Sfa::epsilon().shortest_word(), Some(w("")));
        assert_eq!(Sfa::empty().shortest_word(), None);
        assert_eq!(Sfa::literal(&w("hey")).shortest_word(), Some(w("hey")));
    }

    #[test]
    fn dot_output() {
        let dot = digits_plus().to_dot();
        assert!(dot.starts_with("digraph sfa {"));
        assert!(dot.contains("[label=\"[0-9]\"]"));
        assert!(dot.contains("doublecircle"));
        let e = EpsilonSfa::new(2, [0], [1], [], [(0, 1)]).unwrap();
        assert!(e.to_dot().contains("style=dashed"));
    }

    #[test]
    fn word_rendering() {
        assert_eq!(w("a\"b").to_string(), "a\"b");
        assert_eq!(Word::new(vec![CodePoint::new(0xD800).unwrap()]).to_string(), "\\u{d800}");
        assert_eq!(Word::new(vec![CodePoint::new(10).unwrap()]).to_string(), "\\u{a}");
    }
}
