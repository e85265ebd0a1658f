// SPDX-License-Identifier: Apache-2.0

//! Fixtures shared by the unit tests.

use crate::automata::{Sfa, Transition, Word};
use crate::interval::{CodePoint, IntervalList};
use crate::transducer::{FnIndex, OutputFn, Sft, SftTransition};

pub fn w(s: &str) -> Word {
    Word::from(s)
}

pub fn range(lo: char, hi: char) -> IntervalList {
    IntervalList::from_pairs(&[(lo as u32, hi as u32)]).unwrap()
}

/// Every word over `alphabet` of length at most `max_len`, shortest first.
pub fn all_words(alphabet: &[char], max_len: usize) -> Vec<Word> {
    let mut out = vec![Word::empty()];
    let mut layer = vec![Word::empty()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * alphabet.len());
        for word in &layer {
            for &c in alphabet {
                let mut longer = word.clone();
                longer.push(CodePoint::from(c));
                next.push(longer);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// Language equality restricted to words over `alphabet` up to `max_len`.
pub fn lang_eq_upto(a: &Sfa, b: &Sfa, alphabet: &[char], max_len: usize) -> bool {
    all_words(alphabet, max_len)
        .iter()
        .all(|word| a.accepts(word) == b.accepts(word))
}

/// `[0-9]+` as a two-state automaton.
pub fn digits_plus() -> Sfa {
    let d = range('0', '9');
    Sfa::new(
        2,
        [0],
        [1],
        [Transition::new(0, d.clone(), 1), Transition::new(1, d, 1)],
    )
    .unwrap()
}

/// Lowercase run followed by an uppercase run, with the cases swapped.
pub fn case_swap_sft() -> Sft {
    let lower = range('a', 'z');
    let upper = range('A', 'Z');
    Sft::new(
        3,
        [0],
        [2],
        [
            SftTransition::new(0, Some(lower.clone()), FnIndex(0), 1),
            SftTransition::new(1, Some(lower), FnIndex(0), 1),
            SftTransition::new(1, Some(upper.clone()), FnIndex(1), 2),
            SftTransition::new(2, Some(upper), FnIndex(1), 2),
        ],
        vec![OutputFn::Offset(-32), OutputFn::Offset(32)],
    )
    .unwrap()
}

fn replace_digits_with(sigma: IntervalList) -> Sft {
    let d = range('0', '9');
    let c = |ch: char| OutputFn::Const(range(ch, ch));
    Sft::new(
        6,
        [0],
        [5],
        [
            SftTransition::new(0, Some(sigma.clone()), FnIndex(1), 0),
            SftTransition::new(0, Some(d.clone()), FnIndex(0), 1),
            SftTransition::new(1, Some(d), FnIndex(0), 1),
            SftTransition::new(1, None, FnIndex(0), 2),
            SftTransition::new(2, None, FnIndex(2), 3),
            SftTransition::new(3, None, FnIndex(3), 4),
            SftTransition::new(4, None, FnIndex(4), 5),
            SftTransition::new(5, Some(sigma), FnIndex(1), 5),
        ],
        vec![OutputFn::Erase, OutputFn::Identity, c('N'), c('U'), c('M')],
    )
    .unwrap()
}

/// Replace one `[0-9]+` match by `NUM`.
pub fn replace_digits_sft() -> Sft {
    replace_digits_with(IntervalList::full())
}

/// As [`replace_digits_sft`] with the pass-through loops limited to
/// printable ASCII, narrow enough to enumerate.
pub fn replace_digits_sft_ascii() -> Sft {
    replace_digits_with(range(' ', '~'))
}
