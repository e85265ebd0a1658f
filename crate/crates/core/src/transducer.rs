// SPDX-License-Identifier: Apache-2.0

//! Symbolic finite transducers.
//!
//! A transition `src --input / f--> dst` reads one symbol from its input
//! label, or nothing when the input is `None`, and emits whatever the output
//! function `f` produces for it. Transitions refer to output functions by
//! index into the transducer's function table so that one function can be
//! shared by many transitions.
//!
//! Output functions form a small closed algebra ([`OutputFn`]) whose set
//! lifts are exact, which is what the product construction needs.

use std::collections::{BTreeSet, HashSet};
use std::fmt::{self, Write as _};

use crate::automata::{dot_escape, dot_header, reachable, Sfa, StateId, Word};
use crate::error::{Error, Result};
use crate::interval::{CodePoint, IntervalList};

/// Labels wider than this are refused by the enumeration oracle.
pub const ENUMERATION_SPAN_LIMIT: u64 = 4096;

/// What a transition emits for the symbol it reads.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum OutputFn {
    /// Emit nothing.
    Erase,
    /// Copy the input symbol.
    Identity,
    /// Emit the input symbol shifted by a constant.
    Offset(i64),
    /// Emit one symbol from a fixed non-empty set, whatever the input.
    Const(IntervalList),
}

impl OutputFn {
    pub fn constant(set: IntervalList) -> Result<OutputFn> {
        if set.is_empty() {
            return Err(Error::Invalid("constant output set is empty".into()));
        }
        Ok(OutputFn::Const(set))
    }

    /// Output set for a single input symbol, or for no input (`None`).
    /// `Ok(None)` means the function emits the empty word.
    pub fn apply(&self, input: Option<CodePoint>) -> Result<Option<IntervalList>> {
        match (self, input) {
            (OutputFn::Erase, _) => Ok(None),
            (OutputFn::Identity, Some(x)) => Ok(Some(IntervalList::single(x))),
            (OutputFn::Offset(d), Some(x)) => Ok(Some(IntervalList::single(x.offset(*d)?))),
            (OutputFn::Identity | OutputFn::Offset(_), None) => Ok(None),
            (OutputFn::Const(s), _) => Ok(Some(s.clone())),
        }
    }

    /// Set lift over a non-empty label: the union of the outputs of every
    /// member, or `None` when every member maps to the empty word.
    pub fn lift(&self, label: &IntervalList) -> Result<Option<IntervalList>> {
        if label.is_empty() {
            return Err(Error::EmptyLift);
        }
        match self {
            OutputFn::Erase => Ok(None),
            OutputFn::Identity => Ok(Some(label.clone())),
            OutputFn::Offset(d) => label.offset(*d).map(Some),
            OutputFn::Const(s) => Ok(Some(s.clone())),
        }
    }

    /// Whether some member of the label maps to the empty word.
    pub fn may_erase(&self, label: &IntervalList) -> bool {
        label.is_nonempty() && matches!(self, OutputFn::Erase)
    }
}

impl fmt::Display for OutputFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OutputFn::Erase => f.write_str("erase"),
            OutputFn::Identity => f.write_str("id"),
            OutputFn::Offset(d) => write!(f, "{d:+}"),
            OutputFn::Const(s) => {
                let inner = s.to_string();
                write!(f, "const{{{}}}", &inner[1..inner.len() - 1])
            }
        }
    }
}

/// Index into an [`Sft`]'s function table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FnIndex(pub usize);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SftTransition {
    pub src: StateId,
    /// `None` reads nothing.
    pub input: Option<IntervalList>,
    pub func: FnIndex,
    pub dst: StateId,
}

impl SftTransition {
    pub fn new(src: StateId, input: Option<IntervalList>, func: FnIndex, dst: StateId) -> Self {
        SftTransition {
            src,
            input,
            func,
            dst,
        }
    }
}

/// A symbolic finite transducer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sft {
    num_states: usize,
    // sorted by src, deduplicated
    transitions: Vec<SftTransition>,
    initial: BTreeSet<StateId>,
    accepting: BTreeSet<StateId>,
    functions: Vec<OutputFn>,
}

impl Sft {
    /// Assemble a transducer without checking it; see [`Sft::check`].
    pub fn from_parts(
        num_states: usize,
        initial: impl IntoIterator<Item = StateId>,
        accepting: impl IntoIterator<Item = StateId>,
        transitions: impl IntoIterator<Item = SftTransition>,
        functions: Vec<OutputFn>,
    ) -> Sft {
        let transitions: BTreeSet<_> = transitions.into_iter().collect();
        Sft {
            num_states,
            transitions: transitions.into_iter().collect(),
            initial: initial.into_iter().collect(),
            accepting: accepting.into_iter().collect(),
            functions,
        }
    }

    /// Assemble and check a transducer.
    pub fn new(
        num_states: usize,
        initial: impl IntoIterator<Item = StateId>,
        accepting: impl IntoIterator<Item = StateId>,
        transitions: impl IntoIterator<Item = SftTransition>,
        functions: Vec<OutputFn>,
    ) -> Result<Sft> {
        let sft = Sft::from_parts(num_states, initial, accepting, transitions, functions);
        sft.check()?;
        Ok(sft)
    }

    /// Well-formedness: states and function indices in range, input labels
    /// and constant outputs non-empty, and offsets that keep every symbol
    /// of their input label inside the code point range.
    pub fn check(&self) -> Result<()> {
        let n = self.num_states;
        if let Some(q) = self.initial.iter().chain(&self.accepting).find(|&&q| q >= n) {
            return Err(Error::Invalid(format!("state {q} out of range for {n} states")));
        }
        for (k, f) in self.functions.iter().enumerate() {
            if let OutputFn::Const(s) = f {
                if s.is_empty() {
                    return Err(Error::Invalid(format!("function {k} has an empty constant set")));
                }
            }
        }
        for t in &self.transitions {
            if t.src >= n || t.dst >= n {
                return Err(Error::Invalid(format!(
                    "transition {} -> {} out of range for {n} states",
                    t.src, t.dst
                )));
            }
            let Some(f) = self.functions.get(t.func.0) else {
                return Err(Error::Invalid(format!(
                    "transition {} -> {} uses missing function {}",
                    t.src, t.dst, t.func.0
                )));
            };
            if let Some(label) = &t.input {
                if label.is_empty() {
                    return Err(Error::Invalid(format!(
                        "transition {} -> {} has an empty input label",
                        t.src, t.dst
                    )));
                }
                if let OutputFn::Offset(d) = f {
                    label.offset(*d)?;
                }
            }
        }
        Ok(())
    }

    pub fn is_well_formed(&self) -> bool {
        self.check().is_ok()
    }

    pub fn num_states(&self) -> usize {
        self.num_states
    }

    pub fn transitions(&self) -> &[SftTransition] {
        &self.transitions
    }

    pub fn transitions_from(&self, q: StateId) -> &[SftTransition] {
        let lo = self.transitions.partition_point(|t| t.src < q);
        let hi = self.transitions.partition_point(|t| t.src <= q);
        &self.transitions[lo..hi]
    }

    pub fn initial(&self) -> &BTreeSet<StateId> {
        &self.initial
    }

    pub fn accepting(&self) -> &BTreeSet<StateId> {
        &self.accepting
    }

    pub fn functions(&self) -> &[OutputFn] {
        &self.functions
    }

    /// # Panics
    ///
    /// If the index is out of range; well-formed transducers never do that.
    pub fn function(&self, idx: FnIndex) -> &OutputFn {
        &self.functions[idx.0]
    }

    /// Brute-force output language: the outputs of every accepting trace of
    /// at most `max_trace_len` steps whose input is accepted by `a`.
    ///
    /// Labels and output sets are expanded symbol by symbol, so this is only
    /// usable on transducers with narrow labels. It shares no code with the
    /// product construction and serves as its reference.
    pub fn output_language_bounded(&self, a: &Sfa, max_trace_len: usize) -> Result<BTreeSet<Word>> {
        type Config = (StateId, BTreeSet<StateId>, Vec<CodePoint>);

        fn expand(set: &IntervalList) -> Result<Vec<CodePoint>> {
            let span = set.cardinality();
            if span > ENUMERATION_SPAN_LIMIT {
                return Err(Error::SpanTooLarge {
                    span,
                    limit: ENUMERATION_SPAN_LIMIT,
                });
            }
            Ok(set.points().collect())
        }

        // states from which acceptance is still possible, on either side
        let mut pred_t = vec![Vec::new(); self.num_states];
        for t in &self.transitions {
            pred_t[t.dst].push(t.src);
        }
        let live_t = reachable(self.num_states, &self.accepting, &pred_t);
        let mut pred_a = vec![Vec::new(); a.num_states()];
        for t in a.transitions() {
            pred_a[t.dst].push(t.src);
        }
        let live_a = reachable(a.num_states(), a.accepting(), &pred_a);

        // simulate `a` on one more input symbol
        let step = |active: &BTreeSet<StateId>, x: CodePoint| -> BTreeSet<StateId> {
            active
                .iter()
                .flat_map(|&q| a.transitions_from(q))
                .filter(|t| live_a[t.dst] && t.label.contains(x))
                .map(|t| t.dst)
                .collect()
        };

        let mut outputs = BTreeSet::new();
        let start: BTreeSet<StateId> = a.initial().iter().copied().filter(|&q| live_a[q]).collect();
        let mut layer: HashSet<Config> = if start.is_empty() {
            HashSet::new()
        } else {
            self.initial
                .iter()
                .filter(|&&q| live_t[q])
                .map(|&q| (q, start.clone(), Vec::new()))
                .collect()
        };
        for depth in 0..=max_trace_len {
            let mut next: HashSet<Config> = HashSet::new();
            for (q, active, out) in &layer {
                if self.accepting.contains(q) && active.iter().any(|p| a.accepting().contains(p)) {
                    outputs.insert(Word::new(out.clone()));
                }
                if depth == max_trace_len {
                    continue;
                }
                for t in self.transitions_from(*q).iter().filter(|t| live_t[t.dst]) {
                    let f = self.function(t.func);
                    let mut emit = |active: BTreeSet<StateId>, produced: Option<IntervalList>| -> Result<()> {
                        match produced {
                            None => {
                                next.insert((t.dst, active, out.clone()));
                            }
                            Some(set) => {
                                for y in expand(&set)? {
                                    let mut o = out.clone();
                                    o.push(y);
                                    next.insert((t.dst, active.clone(), o));
                                }
                            }
                        }
                        Ok(())
                    };
                    match &t.input {
                        None => emit(active.clone(), f.apply(None)?)?,
                        Some(label) => {
                            for x in expand(label)? {
                                let after = step(active, x);
                                // no extension of this input is accepted by `a`
                                if after.is_empty() {
                                    continue;
                                }
                                emit(after, f.apply(Some(x))?)?;
                            }
                        }
                    }
                }
            }
            layer = next;
        }
        Ok(outputs)
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::new();
        dot_header(&mut out, "sft", self.num_states, &self.initial, &self.accepting);
        for t in &self.transitions {
            let input = t
                .input
                .as_ref()
                .map_or_else(|| "ε".to_string(), IntervalList::to_string);
            let func = self
                .functions
                .get(t.func.0)
                .map_or_else(|| format!("#{}", t.func.0), OutputFn::to_string);
            let _ = writeln!(
                out,
                "  q{} -> q{} [label=\"{}\"];",
                t.src,
                t.dst,
                dot_escape(&format!("{input} / {func}"))
            );
        }
        out.push_str("}\n");
        out
    }
}

/// One step of a transducer run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TraceStep {
    pub input: Option<CodePoint>,
    pub output: Option<CodePoint>,
}

/// The sequence of (input, output) pairs of one run.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Trace {
    pub steps: Vec<TraceStep>,
}

impl Trace {
    pub fn input_word(&self) -> Word {
        self.steps.iter().filter_map(|s| s.input).collect()
    }

    pub fn output_word(&self) -> Word {
        self.steps.iter().filter_map(|s| s.output).collect()
    }
}
