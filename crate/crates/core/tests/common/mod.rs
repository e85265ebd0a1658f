// SPDX-License-Identifier: Apache-2.0

// Helpers shared by the integration tests. Nothing here calls into the
// constructions under test except to build inputs.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use symtrans::{CodePoint, FnIndex, Interval, IntervalList, OutputFn, Regex, Sfa, Sft, SftTransition, Transition, Word};

pub fn cp(v: u32) -> CodePoint {
    CodePoint::new(v).unwrap()
}

pub fn word(s: &str) -> Word {
    Word::from(s)
}

pub fn all_words(alphabet: &[CodePoint], max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    let mut layer = vec![Word::empty()];
    for _ in 0..max_len {
        let mut next = Vec::new();
        for w in &layer {
            for &c in alphabet {
                let mut longer = w.clone();
                longer.push(c);
                next.push(longer);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// The language of `a` if it is finite and has at most `cap` words.
///
/// Works on the useful part of the automaton: the language is infinite
/// exactly when that part has a cycle.
pub fn finite_language(a: &Sfa, cap: usize) -> Option<BTreeSet<Word>> {
    let n = a.num_states();
    let mut succ: Vec<Vec<(IntervalList, usize)>> = vec![Vec::new(); n];
    let mut pred: Vec<Vec<usize>> = vec![Vec::new(); n];
    for t in a.transitions() {
        succ[t.src].push((t.label.clone(), t.dst));
        pred[t.dst].push(t.src);
    }
    let closure = |start: &BTreeSet<usize>, edges: &dyn Fn(usize) -> Vec<usize>| {
        let mut seen = vec![false; n];
        let mut stack: Vec<usize> = start.iter().copied().collect();
        for &q in start {
            seen[q] = true;
        }
        while let Some(q) = stack.pop() {
            for r in edges(q) {
                if !seen[r] {
                    seen[r] = true;
                    stack.push(r);
                }
            }
        }
        seen
    };
    let fwd = closure(a.initial(), &|q| succ[q].iter().map(|(_, r)| *r).collect());
    let bwd = closure(a.accepting(), &|q| pred[q].clone());
    let useful: Vec<bool> = (0..n).map(|q| fwd[q] && bwd[q]).collect();

    // cycle check among useful states
    let mut color = vec![0u8; n];
    fn cyclic(q: usize, succ: &[Vec<(IntervalList, usize)>], useful: &[bool], color: &mut [u8]) -> bool {
        color[q] = 1;
        for (_, r) in &succ[q] {
            if !useful[*r] {
                continue;
            }
            if color[*r] == 1 || (color[*r] == 0 && cyclic(*r, succ, useful, color)) {
                return true;
            }
        }
        color[q] = 2;
        false
    }
    for q in 0..n {
        if useful[q] && color[q] == 0 && cyclic(q, &succ, &useful, &mut color) {
            return None;
        }
    }

    let mut out = BTreeSet::new();
    let mut stack: Vec<(usize, Vec<CodePoint>)> = a
        .initial()
        .iter()
        .filter(|&&q| useful[q])
        .map(|&q| (q, Vec::new()))
        .collect();
    while let Some((q, w)) = stack.pop() {
        if a.accepting().contains(&q) {
            out.insert(Word::new(w.clone()));
            if out.len() > cap {
                return None;
            }
        }
        for (label, r) in &succ[q] {
            if !useful[*r] {
                continue;
            }
            if label.cardinality() > cap as u64 {
                return None;
            }
            for x in label.points() {
                let mut longer = w.clone();
                longer.push(x);
                stack.push((*r, longer));
            }
        }
    }
    Some(out)
}

/// End positions of the matches of `re` in `s` starting at `start`.
fn ends(re: &Regex, s: &[CodePoint], start: usize) -> BTreeSet<usize> {
    match re {
        Regex::Literal(w) => {
            if s.len() >= start + w.len() && s[start..start + w.len()] == w[..] {
                BTreeSet::from([start + w.len()])
            } else {
                BTreeSet::new()
            }
        }
        Regex::Range(iv) => match s.get(start) {
            Some(&c) if iv.contains(c) => BTreeSet::from([start + 1]),
            _ => BTreeSet::new(),
        },
        Regex::AnyChar => {
            if start < s.len() {
                BTreeSet::from([start + 1])
            } else {
                BTreeSet::new()
            }
        }
        Regex::Concat(a, b) => ends(a, s, start).into_iter().flat_map(|m| ends(b, s, m)).collect(),
        Regex::Union(a, b) => ends(a, s, start).into_iter().chain(ends(b, s, start)).collect(),
        Regex::Star(a) | Regex::Plus(a) => {
            let mut reached = BTreeSet::new();
            if matches!(re, Regex::Star(_)) {
                reached.insert(start);
            }
            let mut frontier = vec![start];
            let mut visited = BTreeSet::from([start]);
            while let Some(p) = frontier.pop() {
                for m in ends(a, s, p) {
                    reached.insert(m);
                    if visited.insert(m) {
                        frontier.push(m);
                    }
                }
            }
            reached
        }
    }
}

/// Backtracking regex membership.
pub fn regex_matches(re: &Regex, s: &[CodePoint]) -> bool {
    ends(re, s, 0).contains(&s.len())
}

/// Replace one factor accepted by `matches` by `r`, every way possible; the
/// word itself when nothing matches.
pub fn rewrite_any(s: &[CodePoint], matches: impl Fn(&[CodePoint]) -> bool, r: &[CodePoint]) -> BTreeSet<Word> {
    let mut out = BTreeSet::new();
    for i in 0..=s.len() {
        for j in i..=s.len() {
            if matches(&s[i..j]) {
                let mut v = s[..i].to_vec();
                v.extend_from_slice(r);
                v.extend_from_slice(&s[j..]);
                out.insert(Word::new(v));
            }
        }
    }
    if out.is_empty() {
        out.insert(Word::new(s.to_vec()));
    }
    out
}

/// A random canonical list over `[0, max]` built from up to `max_items`
/// random intervals.
pub fn random_list(rng: &mut impl Rng, max: u32, max_items: usize) -> IntervalList {
    let k = rng.gen_range(0..=max_items);
    IntervalList::normalize((0..k).map(|_| {
        let a = rng.gen_range(0..=max);
        let b = rng.gen_range(0..=max);
        Interval::new(a.min(b), a.max(b)).unwrap()
    }))
}

fn random_label(rng: &mut impl Rng, max: u32) -> IntervalList {
    loop {
        let l = random_list(rng, max, 2);
        if l.is_nonempty() {
            return l;
        }
    }
}

/// A random automaton with 1 to `max_states` states over `[0, max]`.
pub fn random_sfa(rng: &mut impl Rng, max_states: usize, max: u32) -> Sfa {
    let n = rng.gen_range(1..=max_states);
    let mut initial: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.3)).collect();
    if initial.is_empty() {
        initial.push(0);
    }
    let accepting: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.4)).collect();
    let k = rng.gen_range(0..=2 * n + 1);
    let transitions: Vec<Transition> = (0..k)
        .map(|_| Transition::new(rng.gen_range(0..n), random_label(rng, max), rng.gen_range(0..n)))
        .collect();
    Sfa::new(n, initial, accepting, transitions).unwrap()
}

fn random_output_fn(rng: &mut impl Rng, max: u32) -> OutputFn {
    match rng.gen_range(0..4) {
        0 => OutputFn::Erase,
        1 => OutputFn::Identity,
        2 => OutputFn::Offset(rng.gen_range(-3..=3)),
        _ => OutputFn::Const(random_label(rng, max)),
    }
}

/// A random well-formed transducer with 1 to `max_states` states over
/// `[0, max]`. With `eps_acyclic`, transitions that read nothing only go
/// from lower to higher state numbers.
pub fn random_sft(rng: &mut impl Rng, max_states: usize, max: u32, eps_acyclic: bool) -> Sft {
    loop {
        let n = rng.gen_range(1..=max_states);
        let functions: Vec<OutputFn> = (0..rng.gen_range(1..=4)).map(|_| random_output_fn(rng, max)).collect();
        let mut initial: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.3)).collect();
        if initial.is_empty() {
            initial.push(0);
        }
        let accepting: Vec<usize> = (0..n).filter(|_| rng.gen_bool(0.4)).collect();
        let k = rng.gen_range(0..=2 * n + 1);
        let mut transitions = Vec::new();
        for _ in 0..k {
            let src = rng.gen_range(0..n);
            let dst = rng.gen_range(0..n);
            let func = FnIndex(rng.gen_range(0..functions.len()));
            if rng.gen_bool(0.3) {
                if eps_acyclic && src >= dst {
                    continue;
                }
                transitions.push(SftTransition::new(src, None, func, dst));
            } else {
                transitions.push(SftTransition::new(src, Some(random_label(rng, max)), func, dst));
            }
        }
        let sft = Sft::from_parts(n, initial, accepting, transitions, functions);
        if sft.is_well_formed() {
            return sft;
        }
    }
}
