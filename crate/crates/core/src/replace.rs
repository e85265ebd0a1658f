// SPDX-License-Identifier: Apache-2.0

//! Replacement of one pattern occurrence, as a transducer.
//!
//! `build_replace_sft(p, r)` copies a prefix, erases one word of `L(p)`,
//! emits `r` and copies the rest. Words with no occurrence of the pattern
//! have no run; [`replace_image`] adds them back unchanged.

use std::collections::BTreeSet;

use crate::automata::{Limits, Sfa, StateId};
use crate::error::{Error, Result};
use crate::interval::{CodePoint, IntervalList};
use crate::product::product_image;
use crate::transducer::{FnIndex, OutputFn, Sft, SftTransition};

const ERASE: FnIndex = FnIndex(0);

/// Transducer reading a word of `L(p)` and emitting nothing.
///
/// Its single initial state has no incoming edges, so that the
/// pass-through loop added by [`build_replace_sft`] cannot be re-entered
/// from inside a match. When `p` does not already have that shape a fresh
/// initial state is added with copies of the outgoing edges of the
/// original initial states.
pub fn pattern_to_eraser(p: &Sfa) -> Result<Sft> {
    if p.initial().iter().any(|q| p.accepting().contains(q)) {
        return Err(Error::EmptyMatchPattern);
    }
    let p = p.trim();
    let edge = |src: StateId, label: &IntervalList, dst: StateId| {
        SftTransition::new(src, Some(label.clone()), ERASE, dst)
    };
    let isolated = p.initial().len() == 1
        && p.transitions().iter().all(|t| !p.initial().contains(&t.dst));
    if isolated || p.num_states() == 0 {
        return Sft::new(
            p.num_states(),
            p.initial().iter().copied(),
            p.accepting().iter().copied(),
            p.transitions().iter().map(|t| edge(t.src, &t.label, t.dst)),
            vec![OutputFn::Erase],
        );
    }
    let fresh = p.num_states();
    let copies = p
        .transitions()
        .iter()
        .filter(|t| p.initial().contains(&t.src))
        .map(|t| edge(fresh, &t.label, t.dst));
    Sft::new(
        fresh + 1,
        [fresh],
        p.accepting().iter().copied(),
        p.transitions()
            .iter()
            .map(|t| edge(t.src, &t.label, t.dst))
            .chain(copies)
            .collect::<Vec<_>>(),
        vec![OutputFn::Erase],
    )
}

/// Transducer emitting `r` without reading anything: a chain of
/// `|r| + 1` states joined by ε-input constant edges.
pub fn const_to_emitter(r: &[CodePoint]) -> Sft {
    let functions = r
        .iter()
        .map(|&c| OutputFn::Const(IntervalList::single(c)))
        .collect();
    Sft::from_parts(
        r.len() + 1,
        [0],
        [r.len()],
        (0..r.len()).map(|k| SftTransition::new(k, None, FnIndex(k), k + 1)),
        functions,
    )
}

/// Transducer replacing one occurrence of a word of `L(p)` by `r`.
pub fn build_replace_sft(p: &Sfa, r: &[CodePoint]) -> Result<Sft> {
    let eraser = pattern_to_eraser(p)?;
    let emitter = const_to_emitter(r);
    let ne = eraser.num_states();
    let nf = eraser.functions().len();
    let mut functions = eraser.functions().to_vec();
    functions.extend(emitter.functions().iter().cloned());
    let identity = FnIndex(functions.len());
    functions.push(OutputFn::Identity);

    let mut transitions: Vec<SftTransition> = eraser.transitions().to_vec();
    transitions.extend(emitter.transitions().iter().map(|t| {
        SftTransition::new(t.src + ne, t.input.clone(), FnIndex(t.func.0 + nf), t.dst + ne)
    }));
    for &f in eraser.accepting() {
        for &i in emitter.initial() {
            transitions.push(SftTransition::new(f, None, ERASE, i + ne));
        }
    }
    for &q in eraser.initial() {
        transitions.push(SftTransition::new(q, Some(IntervalList::full()), identity, q));
    }
    let accepting: BTreeSet<StateId> = emitter.accepting().iter().map(|&q| q + ne).collect();
    for &q in &accepting {
        transitions.push(SftTransition::new(q, Some(IntervalList::full()), identity, q));
    }
    Sft::new(
        ne + emitter.num_states(),
        eraser.initial().iter().copied(),
        accepting,
        transitions,
        functions,
    )
}

/// Words containing some word of `L(p)` as a factor.
pub fn contains_pattern(p: &Sfa) -> Sfa {
    Sfa::universal().concat(p).concat(&Sfa::universal())
}

/// Every result of replacing one occurrence of `p` by `r` in a word of `a`,
/// plus the words of `a` in which `p` does not occur.
pub fn replace_image(a: &Sfa, p: &Sfa, r: &[CodePoint], limits: &Limits) -> Result<Sfa> {
    let sft = build_replace_sft(p, r)?;
    let replaced = product_image(&sft, a, limits)?;
    let no_match = contains_pattern(p).complement(limits)?;
    let unchanged = a.intersect_within(&no_match, limits)?;
    Ok(replaced.union(&unchanged).trim())
}
