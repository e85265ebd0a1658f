// SPDX-License-Identifier: Apache-2.0

//! Interval lists over Unicode code points.
//!
//! An [`IntervalList`] is a sorted sequence of closed intervals `[lo, hi]`
//! that denotes the union of its members. Every list handed out by this
//! module is in canonical form:
//!
//! - each interval is well formed (`lo <= hi`),
//! - consecutive intervals are strictly increasing and separated by at least
//!   one missing code point (`hi_k + 1 < lo_{k+1}`).
//!
//! The second condition also rules out adjacent intervals, so two canonical
//! lists denote the same set exactly when they are structurally equal.
//! All binary operations are linear merges over the two inputs; nothing is
//! ever split into single code points.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

/// Largest Unicode code point.
pub const MAX_CODE_POINT: u32 = 0x10FFFF;

/// A Unicode code point in `[0, 0x10FFFF]`.
///
/// Surrogates are valid code points here; they are simply not `char`s.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CodePoint(u32);

impl CodePoint {
    pub const MIN: CodePoint = CodePoint(0);
    pub const MAX: CodePoint = CodePoint(MAX_CODE_POINT);

    pub fn new(value: u32) -> Result<Self> {
        if value > MAX_CODE_POINT {
            return Err(Error::CodePointOutOfRange(value as i64));
        }
        Ok(CodePoint(value))
    }

    pub const fn value(self) -> u32 {
        self.0
    }

    pub fn to_char(self) -> Option<char> {
        char::from_u32(self.0)
    }

    /// Shift by `delta`, failing when the result leaves the code point range.
    pub fn offset(self, delta: i64) -> Result<Self> {
        let v = self.0 as i64 + delta;
        if !(0..=MAX_CODE_POINT as i64).contains(&v) {
            return Err(Error::CodePointOutOfRange(v));
        }
        Ok(CodePoint(v as u32))
    }
}

impl From<char> for CodePoint {
    fn from(c: char) -> Self {
        CodePoint(c as u32)
    }
}

impl TryFrom<u32> for CodePoint {
    type Error = Error;

    fn try_from(value: u32) -> Result<Self> {
        CodePoint::new(value)
    }
}

impl fmt::Display for CodePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0 {
            // graphic ASCII, minus the characters that carry meaning in the
            // `[a-c f-f]` rendering
            c @ 0x21..=0x7E if !matches!(c, 0x2D | 0x5B | 0x5C | 0x5D) => {
                write!(f, "{}", c as u8 as char)
            }
            c => write!(f, "\\u{{{c:x}}}"),
        }
    }
}

/// A closed interval `[lo, hi]` of code points with `lo <= hi`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Interval {
    lo: u32,
    hi: u32,
}

impl Interval {
    pub fn new(lo: u32, hi: u32) -> Result<Self> {
        if hi > MAX_CODE_POINT {
            return Err(Error::CodePointOutOfRange(hi as i64));
        }
        if lo > hi {
            return Err(Error::MalformedInterval { lo, hi });
        }
        Ok(Interval { lo, hi })
    }

    pub fn between(lo: CodePoint, hi: CodePoint) -> Result<Self> {
        Interval::new(lo.0, hi.0)
    }

    pub fn single(c: CodePoint) -> Self {
        Interval { lo: c.0, hi: c.0 }
    }

    pub fn lo(&self) -> CodePoint {
        CodePoint(self.lo)
    }

    pub fn hi(&self) -> CodePoint {
        CodePoint(self.hi)
    }

    #[allow(clippy::len_without_is_empty)]
    pub fn len(&self) -> u64 {
        (self.hi - self.lo) as u64 + 1
    }

    pub fn contains(&self, c: CodePoint) -> bool {
        self.lo <= c.0 && c.0 <= self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", CodePoint(self.lo), CodePoint(self.hi))
    }
}

/// A canonical list of code-point intervals; the label algebra of every
/// automaton and transducer in this crate.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IntervalList {
    items: Vec<Interval>,
}

// Appends `[lo, hi]` to a list under construction whose items are sorted by
// `lo`, merging with the last item on overlap or adjacency.
fn push_merged(items: &mut Vec<Interval>, lo: u32, hi: u32) {
    if let Some(last) = items.last_mut() {
        if lo as u64 <= last.hi as u64 + 1 {
            last.hi = last.hi.max(hi);
            return;
        }
    }
    items.push(Interval { lo, hi });
}

impl IntervalList {
    /// The empty set.
    pub fn empty() -> Self {
        IntervalList { items: Vec::new() }
    }

    /// Every code point, `[(0, 0x10FFFF)]`.
    pub fn full() -> Self {
        IntervalList {
            items: vec![Interval {
                lo: 0,
                hi: MAX_CODE_POINT,
            }],
        }
    }

    pub fn single(c: CodePoint) -> Self {
        IntervalList {
            items: vec![Interval::single(c)],
        }
    }

    /// Canonicalize an arbitrary sequence of well-formed intervals: sort,
    /// then merge overlapping and adjacent neighbours.
    pub fn normalize(raw: impl IntoIterator<Item = Interval>) -> Self {
        let mut raw: Vec<Interval> = raw.into_iter().collect();
        raw.sort_unstable();
        let mut items = Vec::with_capacity(raw.len());
        for iv in raw {
            push_merged(&mut items, iv.lo, iv.hi);
        }
        IntervalList { items }
    }

    /// Build from raw `(lo, hi)` pairs, rejecting malformed ones.
    pub fn from_pairs(pairs: &[(u32, u32)]) -> Result<Self> {
        let ivs = pairs
            .iter()
            .map(|&(lo, hi)| Interval::new(lo, hi))
            .collect::<Result<Vec<_>>>()?;
        Ok(IntervalList::normalize(ivs))
    }

    /// Checks the canonical-form conditions on a raw sequence.
    pub fn is_canonical(items: &[Interval]) -> bool {
        items.iter().all(|iv| iv.lo <= iv.hi && iv.hi <= MAX_CODE_POINT)
            && items
                .windows(2)
                .all(|w| (w[0].hi as u64) + 1 < w[1].lo as u64)
    }

    pub fn items(&self) -> &[Interval] {
        &self.items
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn is_nonempty(&self) -> bool {
        !self.items.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.items.len() == 1 && self.items[0].lo == 0 && self.items[0].hi == MAX_CODE_POINT
    }

    /// Number of code points denoted.
    pub fn cardinality(&self) -> u64 {
        self.items.iter().map(Interval::len).sum()
    }

    /// Smallest member, if any.
    pub fn least(&self) -> Option<CodePoint> {
        self.items.first().map(|iv| CodePoint(iv.lo))
    }

    pub fn contains(&self, c: CodePoint) -> bool {
        // first interval whose upper end is >= c
        let idx = self.items.partition_point(|iv| iv.hi < c.0);
        self.items.get(idx).is_some_and(|iv| iv.lo <= c.0)
    }

    pub fn intersect(&self, other: &IntervalList) -> IntervalList {
        let (a, b) = (&self.items, &other.items);
        let mut items = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            let lo = a[i].lo.max(b[j].lo);
            let hi = a[i].hi.min(b[j].hi);
            if lo <= hi {
                push_merged(&mut items, lo, hi);
            }
            if a[i].hi < b[j].hi {
                i += 1;
            } else {
                j += 1;
            }
        }
        IntervalList { items }
    }

    pub fn difference(&self, other: &IntervalList) -> IntervalList {
        let b = &other.items;
        let mut items = Vec::new();
        let mut j = 0;
        for iv in &self.items {
            while j < b.len() && b[j].hi < iv.lo {
                j += 1;
            }
            // u64 so that `hi + 1` past MAX_CODE_POINT cannot wrap
            let mut lo = iv.lo as u64;
            let mut k = j;
            while k < b.len() && b[k].lo <= iv.hi && lo <= iv.hi as u64 {
                if b[k].lo as u64 > lo {
                    push_merged(&mut items, lo as u32, b[k].lo - 1);
                }
                lo = lo.max(b[k].hi as u64 + 1);
                k += 1;
            }
            if lo <= iv.hi as u64 {
                push_merged(&mut items, lo as u32, iv.hi);
            }
        }
        IntervalList { items }
    }

    pub fn union(&self, other: &IntervalList) -> IntervalList {
        let (a, b) = (&self.items, &other.items);
        let mut items = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() || j < b.len() {
            let next = if j >= b.len() || (i < a.len() && a[i].lo <= b[j].lo) {
                i += 1;
                a[i - 1]
            } else {
                j += 1;
                b[j - 1]
            };
            push_merged(&mut items, next.lo, next.hi);
        }
        IntervalList { items }
    }

    pub fn complement(&self) -> IntervalList {
        IntervalList::full().difference(self)
    }

    /// Shift every member by `delta`. Fails if any member would leave the
    /// code point range.
    pub fn offset(&self, delta: i64) -> Result<IntervalList> {
        let (Some(first), Some(last)) = (self.items.first(), self.items.last()) else {
            return Ok(IntervalList::empty());
        };
        let lo = first.lo as i64 + delta;
        let hi = last.hi as i64 + delta;
        if lo < 0 || hi > MAX_CODE_POINT as i64 {
            return Err(Error::ShiftOutOfRange {
                interval: self.to_string(),
                delta,
            });
        }
        let items = self
            .items
            .iter()
            .map(|iv| Interval {
                lo: (iv.lo as i64 + delta) as u32,
                hi: (iv.hi as i64 + delta) as u32,
            })
            .collect();
        Ok(IntervalList { items })
    }

    /// Iterate every member in increasing order.
    pub fn points(&self) -> impl Iterator<Item = CodePoint> + '_ {
        self.items
            .iter()
            .flat_map(|iv| (iv.lo..=iv.hi).map(CodePoint))
    }

    /// Materialize the denoted set. The caller is responsible for keeping
    /// the span small.
    pub fn elements(&self) -> BTreeSet<CodePoint> {
        self.points().collect()
    }
}

impl From<Interval> for IntervalList {
    fn from(iv: Interval) -> Self {
        IntervalList { items: vec![iv] }
    }
}

impl FromIterator<Interval> for IntervalList {
    fn from_iter<T: IntoIterator<Item = Interval>>(iter: T) -> Self {
        IntervalList::normalize(iter)
    }
}

impl fmt::Display for IntervalList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (k, iv) in self.items.iter().enumerate() {
            if k > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{iv}")?;
        }
        f.write_str("]")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn list(pairs: &[(u32, u32)]) -> IntervalList {
        IntervalList::from_pairs(pairs).unwrap()
    }

    fn pairs(l: &IntervalList) -> Vec<(u32, u32)> {
        l.items().iter().map(|iv| (iv.lo, iv.hi)).collect()
    }

    fn set(l: &IntervalList) -> BTreeSet<u32> {
        l.points().map(CodePoint::value).collect()
    }

    #[test]
    fn denotation() {
        assert_eq!(set(&list(&[(1, 5)])), BTreeSet::from([1, 2, 3, 4, 5]));
        assert!(set(&list(&[])).is_empty());
        assert_eq!(set(&list(&[(1, 2), (5, 5)])), BTreeSet::from([1, 2, 5]));
    }

    #[test]
    fn emptiness() {
        assert!(list(&[]).is_empty());
        assert!(!list(&[(3, 3)]).is_empty());
        assert!(!list(&[(0, MAX_CODE_POINT)]).is_empty());
        assert!(!list(&[]).is_nonempty());
        assert!(list(&[(3, 3)]).is_nonempty());
        assert!(list(&[(1, 2), (9, 9)]).is_nonempty());
    }

    #[test]
    fn intersection() {
        assert_eq!(pairs(&list(&[(1, 5)]).intersect(&list(&[(3, 4)]))), [(3, 4)]);
        assert!(list(&[(1, 2)]).intersect(&list(&[(4, 6)])).is_empty());
        // checked against the set oracle over 0..=30
        let a = list(&[(0, 9), (20, 30)]);
        let b = list(&[(5, 25)]);
        let expected: BTreeSet<u32> = set(&a).intersection(&set(&b)).copied().collect();
        let got = a.intersect(&b);
        assert_eq!(set(&got), expected);
        assert_eq!(pairs(&got), [(5, 9), (20, 25)]);
    }

    #[test]
    fn difference() {
        assert_eq!(
            pairs(&list(&[(1, 5)]).difference(&list(&[(3, 4)]))),
            [(1, 2), (5, 5)]
        );
        assert_eq!(pairs(&list(&[(1, 5)]).difference(&list(&[]))), [(1, 5)]);
        assert!(list(&[(1, 5)]).difference(&list(&[(0, 9)])).is_empty());
        assert!(IntervalList::full().difference(&IntervalList::full()).is_empty());
    }

    #[test]
    fn union() {
        let a = list(&[(1, 3)]);
        let b = list(&[(2, 6)]);
        let expected: BTreeSet<u32> = set(&a).union(&set(&b)).copied().collect();
        assert_eq!(set(&a.union(&b)), expected);
        assert_eq!(pairs(&a.union(&b)), [(1, 6)]);
        assert_eq!(pairs(&list(&[(1, 2)]).union(&list(&[(3, 4)]))), [(1, 4)]);
        assert_eq!(pairs(&list(&[]).union(&list(&[(7, 7)]))), [(7, 7)]);
    }

    #[test]
    fn membership() {
        let lower = list(&[(97, 122)]);
        assert!(lower.contains(CodePoint(97)));
        assert!(!lower.contains(CodePoint(64)));
        assert!(list(&[(1, 2), (5, 5)]).contains(CodePoint(5)));
        assert!(IntervalList::full().contains(CodePoint(0)));
        assert!(!IntervalList::empty().contains(CodePoint(0)));
    }

    #[test]
    fn offsets() {
        assert_eq!(pairs(&list(&[(97, 122)]).offset(-32).unwrap()), [(65, 90)]);
        assert!(matches!(
            list(&[(0, 0)]).offset(-1),
            Err(Error::ShiftOutOfRange { .. })
        ));
        assert!(list(&[(MAX_CODE_POINT, MAX_CODE_POINT)]).offset(1).is_err());
        assert!(list(&[]).offset(5).unwrap().is_empty());
    }

    #[test]
    fn normalization() {
        let raw = [Interval::new(5, 9).unwrap(), Interval::new(1, 6).unwrap()];
        assert_eq!(pairs(&IntervalList::normalize(raw)), [(1, 9)]);
        assert_eq!(pairs(&list(&[(1, 2), (3, 4)])), [(1, 4)]);
        assert!(list(&[]).is_empty());
        assert_eq!(
            IntervalList::from_pairs(&[(4, 2)]),
            Err(Error::MalformedInterval { lo: 4, hi: 2 })
        );
        assert!(Interval::new(0, MAX_CODE_POINT + 1).is_err());
    }

    #[test]
    fn full_set() {
        assert_eq!(pairs(&IntervalList::full()), [(0, MAX_CODE_POINT)]);
        assert!(IntervalList::full().is_full());
        assert!(IntervalList::empty().complement().is_full());
    }

    #[test]
    fn rendering() {
        assert_eq!(list(&[(97, 99), (102, 102)]).to_string(), "[a-c f-f]");
        assert_eq!(list(&[(0, 0x20)]).to_string(), "[\\u{0}-\\u{20}]");
        assert_eq!(list(&[]).to_string(), "[]");
        assert_eq!(list(&[(45, 45)]).to_string(), "[\\u{2d}-\\u{2d}]");
    }

    fn small_list() -> impl Strategy<Value = IntervalList> {
        prop::collection::vec((0u32..=60, 0u32..=8), 0..6).prop_map(|raw| {
            IntervalList::normalize(raw.into_iter().map(|(lo, w)| Interval::new(lo, lo + w).unwrap()))
        })
    }

    proptest! {
        #[test]
        fn operations_match_sets(a in small_list(), b in small_list(), c in 0u32..=80) {
            let (sa, sb) = (set(&a), set(&b));
            for r in [a.intersect(&b), a.difference(&b), a.union(&b)] {
                prop_assert!(IntervalList::is_canonical(r.items()));
            }
            prop_assert_eq!(set(&a.intersect(&b)), sa.intersection(&sb).copied().collect::<BTreeSet<_>>());
            prop_assert_eq!(set(&a.difference(&b)), sa.difference(&sb).copied().collect::<BTreeSet<_>>());
            prop_assert_eq!(set(&a.union(&b)), sa.union(&sb).copied().collect::<BTreeSet<_>>());
            prop_assert_eq!(a.contains(CodePoint(c)), sa.contains(&c));
            prop_assert_eq!(a.is_empty(), sa.is_empty());
        }

        #[test]
        fn canonical_form_is_unique(a in small_list(), b in small_list()) {
            // a ∪ b and b ∪ a, built along different merge orders, agree
            prop_assert_eq!(a.union(&b), b.union(&a));
            let rebuilt = IntervalList::normalize(set(&a).into_iter().map(|p| Interval::new(p, p).unwrap()));
            prop_assert_eq!(rebuilt, a);
        }
    }
}
