// SPDX-License-Identifier: Apache-2.0

//! Product of a transducer with an automaton.
//!
//! The product reads the transducer's input from the automaton and keeps
//! its output: the resulting ε-automaton accepts exactly the outputs of the
//! transducer on words accepted by the automaton.
//!
//! [`product_abstract`] builds the product over every pair of states.
//! [`product_loop`] only visits pairs reachable from the initial pairs.
//! After trimming both yield the same automaton up to the naming of pairs,
//! which [`Product::same_structure`] checks.

use std::collections::{BTreeSet, HashMap, VecDeque};

use crate::automata::{EpsilonSfa, Limits, Sfa, StateId, Transition};
use crate::error::Result;
use crate::interval::IntervalList;
use crate::transducer::{OutputFn, Sft};

/// Bijection between product states and (transducer state, automaton state)
/// pairs.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PairStateMap {
    pairs: Vec<(StateId, StateId)>,
    index: HashMap<(StateId, StateId), StateId>,
}

impl PairStateMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// The id of `pair`, allocating the next id if it is new. The flag tells
    /// whether it was.
    pub fn get_or_insert(&mut self, pair: (StateId, StateId)) -> (StateId, bool) {
        if let Some(&id) = self.index.get(&pair) {
            return (id, false);
        }
        let id = self.pairs.len();
        self.pairs.push(pair);
        self.index.insert(pair, id);
        (id, true)
    }

    pub fn id(&self, pair: (StateId, StateId)) -> Option<StateId> {
        self.index.get(&pair).copied()
    }

    pub fn pair(&self, id: StateId) -> (StateId, StateId) {
        self.pairs[id]
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (StateId, (StateId, StateId))> + '_ {
        self.pairs.iter().copied().enumerate()
    }
}

type Pair = (StateId, StateId);

/// A product automaton together with the pair each of its states stands for.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Product {
    automaton: EpsilonSfa,
    pairs: PairStateMap,
}

/// A product with its states replaced by their pairs, so that two products
/// can be compared without regard to state numbering.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PairView {
    pub states: BTreeSet<Pair>,
    pub transitions: BTreeSet<(Pair, IntervalList, Pair)>,
    pub epsilons: BTreeSet<(Pair, Pair)>,
    pub initial: BTreeSet<Pair>,
    pub accepting: BTreeSet<Pair>,
}

impl Product {
    pub fn automaton(&self) -> &EpsilonSfa {
        &self.automaton
    }

    pub fn pairs(&self) -> &PairStateMap {
        &self.pairs
    }

    pub fn into_automaton(self) -> EpsilonSfa {
        self.automaton
    }

    /// Drop useless states, keeping the pair labels of the survivors.
    pub fn trim(&self) -> Product {
        let (automaton, kept) = self.automaton.trim();
        let mut pairs = PairStateMap::new();
        for old in kept {
            pairs.get_or_insert(self.pairs.pair(old));
        }
        Product { automaton, pairs }
    }

    pub fn pair_view(&self) -> PairView {
        let a = &self.automaton;
        let p = |q: StateId| self.pairs.pair(q);
        PairView {
            states: (0..a.num_states()).map(p).collect(),
            transitions: a
                .transitions()
                .iter()
                .map(|t| (p(t.src), t.label.clone(), p(t.dst)))
                .collect(),
            epsilons: a.epsilons().iter().map(|&(x, y)| (p(x), p(y))).collect(),
            initial: a.initial().iter().map(|&q| p(q)).collect(),
            accepting: a.accepting().iter().map(|&q| p(q)).collect(),
        }
    }

    /// Isomorphism through the pair labels.
    pub fn same_structure(&self, other: &Product) -> bool {
        self.pair_view() == other.pair_view()
    }
}

/// Product over the full pair space `Q_t × Q_a`; pair `(p, p')` gets id
/// `p * |Q_a| + p'`.
pub fn product_abstract(t: &Sft, a: &Sfa) -> Result<Product> {
    t.check()?;
    let na = a.num_states();
    let id = |p: StateId, q: StateId| p * na + q;
    let mut pairs = PairStateMap::new();
    for p in 0..t.num_states() {
        for q in 0..na {
            pairs.get_or_insert((p, q));
        }
    }

    let mut labeled = BTreeSet::new();
    let mut epsilons = BTreeSet::new();
    for tr in t.transitions() {
        let f = t.function(tr.func);
        match &tr.input {
            None => {
                let out = f.apply(None)?;
                for q in 0..na {
                    match &out {
                        Some(s) => labeled.insert(Transition::new(id(tr.src, q), s.clone(), id(tr.dst, q))),
                        None => epsilons.insert((id(tr.src, q), id(tr.dst, q))),
                    };
                }
            }
            Some(alpha) => {
                for ta in a.transitions() {
                    let sigma = alpha.intersect(&ta.label);
                    if sigma.is_empty() {
                        continue;
                    }
                    if let Some(s) = f.lift(&sigma)? {
                        labeled.insert(Transition::new(id(tr.src, ta.src), s, id(tr.dst, ta.dst)));
                    }
                    if f.may_erase(&sigma) {
                        epsilons.insert((id(tr.src, ta.src), id(tr.dst, ta.dst)));
                    }
                }
            }
        }
    }

    let cross = |x: &BTreeSet<StateId>, y: &BTreeSet<StateId>| -> BTreeSet<StateId> {
        x.iter().flat_map(|&p| y.iter().map(move |&q| id(p, q))).collect()
    };
    let automaton = EpsilonSfa::from_parts(
        pairs.len(),
        cross(t.initial(), a.initial()),
        cross(t.accepting(), a.accepting()),
        labeled,
        epsilons,
    );
    Ok(Product { automaton, pairs })
}

struct LoopState<'a> {
    t: &'a Sft,
    a: &'a Sfa,
    limits: &'a Limits,
    pairs: PairStateMap,
    queue: VecDeque<StateId>,
    // labeled edges
    d1: BTreeSet<Transition>,
    // ε edges
    d2: BTreeSet<(StateId, StateId)>,
}

impl LoopState<'_> {
    fn visit(&mut self, pair: Pair) -> Result<StateId> {
        let (id, fresh) = self.pairs.get_or_insert(pair);
        if fresh {
            self.limits.check(self.pairs.len(), "transducer product")?;
            self.queue.push_back(id);
        }
        Ok(id)
    }

    fn trans_comp(&mut self, id: StateId) -> Result<()> {
        let (p, q) = self.pairs.pair(id);
        for tr in self.t.transitions_from(p) {
            let f = self.t.function(tr.func);
            match &tr.input {
                None => self.subtrans_comp_eps(id, q, f, tr.dst)?,
                Some(alpha) => self.subtrans_comp(id, q, alpha, f, tr.dst)?,
            }
        }
        Ok(())
    }

    // The transducer moves without reading; the automaton stays put.
    fn subtrans_comp_eps(&mut self, id: StateId, q: StateId, f: &OutputFn, dst: StateId) -> Result<()> {
        let out = f.apply(None)?;
        let target = self.visit((dst, q))?;
        match out {
            Some(s) => {
                self.d1.insert(Transition::new(id, s, target));
            }
            None => {
                self.d2.insert((id, target));
            }
        }
        Ok(())
    }

    // Both sides read one symbol from the common part of their labels.
    fn subtrans_comp(
        &mut self,
        id: StateId,
        q: StateId,
        alpha: &IntervalList,
        f: &OutputFn,
        dst: StateId,
    ) -> Result<()> {
        for ta in self.a.transitions_from(q) {
            let sigma = alpha.intersect(&ta.label);
            if sigma.is_empty() {
                continue;
            }
            let out = f.lift(&sigma)?;
            let erases = f.may_erase(&sigma);
            let target = self.visit((dst, ta.dst))?;
            if let Some(s) = out {
                self.d1.insert(Transition::new(id, s, target));
            }
            if erases {
                self.d2.insert((id, target));
            }
        }
        Ok(())
    }
}

/// Product restricted to the pairs reachable from the initial pairs.
pub fn product_loop(t: &Sft, a: &Sfa, limits: &Limits) -> Result<Product> {
    t.check()?;
    let mut st = LoopState {
        t,
        a,
        limits,
        pairs: PairStateMap::new(),
        queue: VecDeque::new(),
        d1: BTreeSet::new(),
        d2: BTreeSet::new(),
    };
    let mut initial = BTreeSet::new();
    for &p in t.initial() {
        for &q in a.initial() {
            initial.insert(st.visit((p, q))?);
        }
    }
    while let Some(id) = st.queue.pop_front() {
        st.trans_comp(id)?;
    }
    let accepting = st
        .pairs
        .iter()
        .filter(|(_, (p, q))| t.accepting().contains(p) && a.accepting().contains(q))
        .map(|(id, _)| id)
        .collect();
    let automaton = EpsilonSfa::from_parts(st.pairs.len(), initial, accepting, st.d1, st.d2);
    Ok(Product {
        automaton,
        pairs: st.pairs,
    })
}

/// Automaton for the outputs of `t` on the language of `a`.
pub fn product_image(t: &Sft, a: &Sfa, limits: &Limits) -> Result<Sfa> {
    let product = product_loop(t, a, limits)?;
    log::debug!(
        "product: {} pairs, {} labeled edges, {} ε edges",
        product.pairs.len(),
        product.automaton.transitions().len(),
        product.automaton.epsilons().len()
    );
    Ok(product.automaton.eliminate_epsilons().trim())
}
