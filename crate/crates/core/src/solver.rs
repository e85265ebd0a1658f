// SPDX-License-Identifier: Apache-2.0

//! Forward-propagation solver for flat string constraints.
//!
//! Each string variable gets a regular domain. Variables are visited in
//! dependency order, and the domain of a variable is the intersection of Σ*
//! with the image of every constraint that defines it. An empty domain
//! proves unsatisfiability. Non-empty domains prove satisfiability only
//! when the dependency graph is a forest in which every variable feeds at
//! most one constraint; otherwise the answer is inconclusive.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use petgraph::algo::toposort;
use petgraph::graph::{DiGraph, NodeIndex};

use crate::automata::{Limits, Regex, Sfa, Word};
use crate::error::Result;
use crate::interval::CodePoint;
use crate::replace::{contains_pattern, replace_image};
use crate::smtlib::Script;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StrVar(String);

impl StrVar {
    pub fn new(name: impl Into<String>) -> Self {
        StrVar(name.into())
    }

    pub fn name(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for StrVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A flat constraint. The `replace` forms rewrite one occurrence of the
/// pattern, chosen freely, or leave the source unchanged if the pattern
/// does not occur in it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Constraint {
    /// `lhs = "value"`
    EqConst { lhs: StrVar, value: Word },
    /// `lhs = rhs`
    EqVar { lhs: StrVar, rhs: StrVar },
    /// `lhs = left ++ right`
    EqConcat { lhs: StrVar, left: StrVar, right: StrVar },
    /// `lhs = replace(src, "pattern", "replacement")`
    EqReplace { lhs: StrVar, src: StrVar, pattern: Word, replacement: Word },
    /// `lhs = replace_re(src, pattern, "replacement")`
    EqReplaceRe { lhs: StrVar, src: StrVar, pattern: Regex, replacement: Word },
    /// `var ∈ L(regex)`
    InRe { var: StrVar, regex: Regex },
}

impl Constraint {
    /// The variable this constraint restricts.
    pub fn target(&self) -> &StrVar {
        match self {
            Constraint::EqConst { lhs, .. }
            | Constraint::EqVar { lhs, .. }
            | Constraint::EqConcat { lhs, .. }
            | Constraint::EqReplace { lhs, .. }
            | Constraint::EqReplaceRe { lhs, .. } => lhs,
            Constraint::InRe { var, .. } => var,
        }
    }

    /// Variables read by this constraint, with repetitions.
    pub fn sources(&self) -> Vec<&StrVar> {
        match self {
            Constraint::EqConst { .. } | Constraint::InRe { .. } => vec![],
            Constraint::EqVar { rhs, .. } => vec![rhs],
            Constraint::EqConcat { left, right, .. } => vec![left, right],
            Constraint::EqReplace { src, .. } | Constraint::EqReplaceRe { src, .. } => vec![src],
        }
    }

    /// Automaton for the pattern of a replace constraint.
    fn pattern_sfa(&self) -> Option<Sfa> {
        match self {
            Constraint::EqReplace { pattern, .. } => Some(Sfa::literal(pattern)),
            Constraint::EqReplaceRe { pattern, .. } => Some(pattern.to_sfa()),
            _ => None,
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constraint::EqConst { lhs, value } => write!(f, "{lhs} = {value:?}", value = value.to_string()),
            Constraint::EqVar { lhs, rhs } => write!(f, "{lhs} = {rhs}"),
            Constraint::EqConcat { lhs, left, right } => write!(f, "{lhs} = {left} ++ {right}"),
            Constraint::EqReplace { lhs, src, pattern, replacement } => write!(
                f,
                "{lhs} = replace({src}, {:?}, {:?})",
                pattern.to_string(),
                replacement.to_string()
            ),
            Constraint::EqReplaceRe { lhs, src, replacement, .. } => {
                write!(f, "{lhs} = replace_re({src}, <regex>, {:?})", replacement.to_string())
            }
            Constraint::InRe { var, .. } => write!(f, "{var} in <regex>"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Sat,
    Unsat,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Sat => "sat",
            Verdict::Unsat => "unsat",
            Verdict::Inconclusive => "unknown",
        })
    }
}

/// Variable to domain map.
pub type Domains = BTreeMap<StrVar, Sfa>;

#[derive(Debug, Clone)]
pub struct Outcome {
    pub verdict: Verdict,
    pub domains: Domains,
    /// Topological order used, when the graph is acyclic.
    pub order: Vec<StrVar>,
    /// Why the answer is inconclusive, if it is.
    pub reason: Option<String>,
}

/// Edges run from each source variable to the target of the constraint.
#[derive(Debug, Clone)]
pub struct DependencyGraph {
    graph: DiGraph<StrVar, usize>,
    nodes: HashMap<StrVar, NodeIndex>,
    definitions: BTreeMap<StrVar, usize>,
    uses: BTreeMap<StrVar, usize>,
}

impl DependencyGraph {
    pub fn build(decls: &[StrVar], constraints: &[Constraint]) -> Self {
        let mut graph = DiGraph::new();
        let mut nodes = HashMap::new();
        let mut node = |graph: &mut DiGraph<StrVar, usize>, v: &StrVar| {
            *nodes.entry(v.clone()).or_insert_with(|| graph.add_node(v.clone()))
        };
        for v in decls {
            node(&mut graph, v);
        }
        let mut definitions = BTreeMap::new();
        let mut uses = BTreeMap::new();
        for (k, c) in constraints.iter().enumerate() {
            let target = node(&mut graph, c.target());
            if !matches!(c, Constraint::InRe { .. }) {
                *definitions.entry(c.target().clone()).or_insert(0) += 1;
            }
            for s in c.sources() {
                let source = node(&mut graph, s);
                graph.add_edge(source, target, k);
                *uses.entry(s.clone()).or_insert(0) += 1;
            }
        }
        DependencyGraph {
            graph,
            nodes,
            definitions,
            uses,
        }
    }

    pub fn variables(&self) -> impl Iterator<Item = &StrVar> {
        self.graph.node_weights()
    }

    pub fn num_edges(&self) -> usize {
        self.graph.edge_count()
    }

    /// Number of equations with `v` on the left.
    pub fn definition_count(&self, v: &StrVar) -> usize {
        self.definitions.get(v).copied().unwrap_or(0)
    }

    /// Number of occurrences of `v` on right-hand sides.
    pub fn use_count(&self, v: &StrVar) -> usize {
        self.uses.get(v).copied().unwrap_or(0)
    }

    pub fn contains(&self, v: &StrVar) -> bool {
        self.nodes.contains_key(v)
    }

    /// Sources before targets, or `None` on a cycle.
    pub fn topological_order(&self) -> Option<Vec<StrVar>> {
        toposort(&self.graph, None)
            .ok()
            .map(|order| order.into_iter().map(|n| self.graph[n].clone()).collect())
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    /// Acyclic, and no variable occurs more than once on right-hand sides.
    /// Under this condition every word of a non-empty domain extends to a
    /// full solution, since the sources of different constraints are
    /// disjoint and can be chosen independently.
    pub fn has_tree_property(&self) -> bool {
        self.is_acyclic() && self.uses.values().all(|&n| n <= 1)
    }
}

fn image(c: &Constraint, domains: &Domains, limits: &Limits) -> Result<Sfa> {
    let dom = |v: &StrVar| domains.get(v).cloned().unwrap_or_else(Sfa::universal);
    Ok(match c {
        Constraint::EqConst { value, .. } => Sfa::literal(value),
        Constraint::EqVar { rhs, .. } => dom(rhs),
        Constraint::EqConcat { left, right, .. } => {
            let cat = dom(left).concat(&dom(right));
            limits.check(cat.num_states(), "concatenation")?;
            cat
        }
        Constraint::EqReplace { src, replacement, .. } | Constraint::EqReplaceRe { src, replacement, .. } => {
            let p = c.pattern_sfa().expect("replace constraint");
            replace_image(&dom(src), &p, replacement, limits)?
        }
        Constraint::InRe { regex, .. } => regex.to_sfa(),
    })
}

/// Compute every domain in dependency order and classify the result.
pub fn forward_propagate(decls: &[StrVar], constraints: &[Constraint], limits: &Limits) -> Outcome {
    let graph = DependencyGraph::build(decls, constraints);
    let mut domains: Domains = graph
        .variables()
        .map(|v| (v.clone(), Sfa::universal()))
        .collect();
    let inconclusive = |domains: Domains, order: Vec<StrVar>, reason: String| {
        log::info!("inconclusive: {reason}");
        Outcome {
            verdict: Verdict::Inconclusive,
            domains,
            order,
            reason: Some(reason),
        }
    };
    let Some(order) = graph.topological_order() else {
        return inconclusive(domains, Vec::new(), "cyclic dependency between variables".into());
    };
    let mut by_target: BTreeMap<&StrVar, Vec<&Constraint>> = BTreeMap::new();
    for c in constraints {
        by_target.entry(c.target()).or_default().push(c);
    }
    for v in &order {
        let mut dom = Sfa::universal();
        for c in by_target.get(v).into_iter().flatten() {
            let step = image(c, &domains, limits).and_then(|img| dom.intersect_within(&img, limits));
            match step {
                Ok(next) => dom = next.trim(),
                Err(e) => return inconclusive(domains, order.clone(), format!("{c}: {e}")),
            }
            log::info!(
                "{c}: domain of {v} now has {} states and {} transitions",
                dom.num_states(),
                dom.transitions().len()
            );
        }
        domains.insert(v.clone(), dom);
    }
    let verdict = if domains.values().any(Sfa::is_empty) {
        Verdict::Unsat
    } else if graph.has_tree_property() {
        Verdict::Sat
    } else {
        Verdict::Inconclusive
    };
    let reason = (verdict == Verdict::Inconclusive)
        .then(|| "some variable is shared between constraints".to_string());
    if let Some(r) = &reason {
        log::info!("inconclusive: {r}");
    }
    Outcome {
        verdict,
        domains,
        order,
        reason,
    }
}

/// Solve the constraints of a parsed script.
pub fn solve(script: &Script, limits: &Limits) -> Outcome {
    forward_propagate(&script.decls, &script.asserts, limits)
}

/// Every result of replacing one factor accepted by `matches` with `r`, or
/// `s` itself if no factor matches.
pub fn replace_any(s: &[CodePoint], matches: impl Fn(&[CodePoint]) -> bool, r: &[CodePoint]) -> BTreeSet<Word> {
    let mut out = BTreeSet::new();
    for i in 0..=s.len() {
        for j in i..=s.len() {
            if matches(&s[i..j]) {
                out.insert(s[..i].iter().chain(r).chain(&s[j..]).copied().collect());
            }
        }
    }
    if out.is_empty() {
        out.insert(Word::from(s.to_vec()));
    }
    out
}

/// Whether the assignment satisfies every constraint. Unassigned variables
/// make the constraints that mention them false.
pub fn evaluate(constraints: &[Constraint], assignment: &BTreeMap<StrVar, Word>) -> bool {
    constraints.iter().all(|c| {
        let get = |v: &StrVar| assignment.get(v);
        let Some(lhs) = get(c.target()) else {
            return false;
        };
        match c {
            Constraint::EqConst { value, .. } => lhs == value,
            Constraint::EqVar { rhs, .. } => get(rhs) == Some(lhs),
            Constraint::EqConcat { left, right, .. } => match (get(left), get(right)) {
                (Some(x), Some(y)) => lhs.len() == x.len() + y.len() && lhs.starts_with(x) && lhs.ends_with(y),
                _ => false,
            },
            Constraint::EqReplace { src, replacement, .. } | Constraint::EqReplaceRe { src, replacement, .. } => {
                let p = c.pattern_sfa().expect("replace constraint");
                get(src).is_some_and(|s| replace_any(s, |m| p.accepts(m), replacement).contains(lhs))
            }
            Constraint::InRe { regex, .. } => regex.to_sfa().accepts(lhs),
        }
    })
}

/// A satisfying assignment read back from the domains of a `Sat` outcome,
/// visiting targets before their sources. Checked with [`evaluate`] before
/// being returned.
pub fn extract_witness(constraints: &[Constraint], outcome: &Outcome) -> Option<BTreeMap<StrVar, Word>> {
    if outcome.verdict != Verdict::Sat {
        return None;
    }
    let dom = |v: &StrVar| outcome.domains.get(v);
    let mut assignment: BTreeMap<StrVar, Word> = BTreeMap::new();
    fn assign(assignment: &mut BTreeMap<StrVar, Word>, v: &StrVar, w: Word) -> Option<()> {
        match assignment.get(v) {
            Some(old) if *old != w => None,
            _ => {
                assignment.insert(v.clone(), w);
                Some(())
            }
        }
    }
    for v in outcome.order.iter().rev() {
        let value = match assignment.get(v) {
            Some(w) => w.clone(),
            None => dom(v)?.shortest_word()?,
        };
        assign(&mut assignment, v, value.clone())?;
        for c in constraints.iter().filter(|c| c.target() == v) {
            match c {
                Constraint::EqConst { .. } | Constraint::InRe { .. } => {}
                Constraint::EqVar { rhs, .. } => assign(&mut assignment, rhs, value.clone())?,
                Constraint::EqConcat { left, right, .. } => {
                    let (dl, dr) = (dom(left)?, dom(right)?);
                    let k = (0..=value.len()).find(|&k| dl.accepts(&value[..k]) && dr.accepts(&value[k..]))?;
                    assign(&mut assignment, left, Word::from(value[..k].to_vec()))?;
                    assign(&mut assignment, right, Word::from(value[k..].to_vec()))?;
                }
                Constraint::EqReplace { src, replacement, .. } | Constraint::EqReplaceRe { src, replacement, .. } => {
                    let p = c.pattern_sfa()?;
                    let ds = dom(src)?;
                    let pre = preimage(&value, ds, &p, replacement)?;
                    assign(&mut assignment, src, pre)?;
                }
            }
        }
    }
    evaluate(constraints, &assignment).then_some(assignment)
}

// A word of `ds` that one replacement of `p` by `r` turns into `value`.
fn preimage(value: &[CodePoint], ds: &Sfa, p: &Sfa, r: &[CodePoint]) -> Option<Word> {
    if ds.accepts(value) && !contains_pattern(p).accepts(value) {
        return Some(Word::from(value.to_vec()));
    }
    (0..=value.len().checked_sub(r.len())?)
        .filter(|&i| value[i..i + r.len()] == *r)
        .find_map(|i| {
            let around = Sfa::literal(&value[..i]).concat(p).concat(&Sfa::literal(&value[i + r.len()..]));
            around.intersect(ds).shortest_word()
        })
}
