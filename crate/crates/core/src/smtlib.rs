// SPDX-License-Identifier: Apache-2.0

//! SMT-LIB front end and command line driver.
//!
//! Supported: `set-logic` (QF_S, QF_SLIA), `declare-fun`/`declare-const`
//! of sort String, `assert`, `check-sat`, with `set-info`, `set-option`
//! and `exit` accepted and ignored. Assertions may use `and`, `=`,
//! `str.++`, `str.replace`, `str.replace_re` and `str.in_re` over the
//! regex operators `str.to_re`, `re.range`, `re.++`, `re.union`, `re.*`,
//! `re.+`, `re.opt`, `re.allchar` and `re.all`. Nested terms are flattened
//! with fresh variables whose names start with `.`.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::fmt::{self, Write as _};
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use thiserror::Error;

use crate::automata::{Limits, Regex, Word};
use crate::interval::{CodePoint, Interval};
use crate::solver::{solve, Constraint, StrVar};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{position}: {message}")]
pub struct ParseError {
    pub position: Position,
    pub message: String,
}

fn fail<T>(position: Position, message: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError {
        position,
        message: message.into(),
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum SExpr {
    Atom(String, Position),
    Str(Word, Position),
    List(Vec<SExpr>, Position),
}

impl SExpr {
    fn position(&self) -> Position {
        match self {
            SExpr::Atom(_, p) | SExpr::Str(_, p) | SExpr::List(_, p) => *p,
        }
    }

    fn atom(&self) -> Option<&str> {
        match self {
            SExpr::Atom(s, _) => Some(s),
            _ => None,
        }
    }

    // Head symbol and arguments of an application.
    fn app(&self) -> Option<(&str, &[SExpr])> {
        match self {
            SExpr::List(items, _) => match items.split_first() {
                Some((SExpr::Atom(head, _), args)) => Some((head, args)),
                _ => None,
            },
            _ => None,
        }
    }

    fn describe(&self) -> String {
        match self {
            SExpr::Atom(s, _) => s.clone(),
            SExpr::Str(..) => "string literal".into(),
            SExpr::List(..) => self.app().map_or("list".into(), |(h, _)| h.to_string()),
        }
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            chars: src.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn pos(&self) -> Position {
        Position {
            line: self.line,
            column: self.column,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn skip_blank(&mut self) {
        while let Some(&c) = self.chars.peek() {
            if c == ';' {
                while self.bump().is_some_and(|c| c != '\n') {}
            } else if c.is_whitespace() {
                self.bump();
            } else {
                break;
            }
        }
    }

    fn exprs(&mut self) -> Result<Vec<SExpr>, ParseError> {
        let mut out = Vec::new();
        loop {
            self.skip_blank();
            if self.chars.peek().is_none() {
                return Ok(out);
            }
            out.push(self.expr()?);
        }
    }

    fn expr(&mut self) -> Result<SExpr, ParseError> {
        self.skip_blank();
        let start = self.pos();
        match self.chars.peek().copied() {
            None => fail(start, "unexpected end of input"),
            Some('(') => {
                self.bump();
                let mut items = Vec::new();
                loop {
                    self.skip_blank();
                    match self.chars.peek() {
                        None => return fail(start, "unclosed parenthesis"),
                        Some(')') => {
                            self.bump();
                            return Ok(SExpr::List(items, start));
                        }
                        Some(_) => items.push(self.expr()?),
                    }
                }
            }
            Some(')') => fail(start, "unexpected ')'"),
            Some('"') => {
                self.bump();
                let mut raw = String::new();
                loop {
                    match self.bump() {
                        None => return fail(start, "unterminated string literal"),
                        Some('"') if self.chars.peek() == Some(&'"') => {
                            self.bump();
                            raw.push('"');
                        }
                        Some('"') => break,
                        Some(c) => raw.push(c),
                    }
                }
                Ok(SExpr::Str(unescape(&raw), start))
            }
            Some('|') => {
                self.bump();
                let mut name = String::new();
                loop {
                    match self.bump() {
                        None => return fail(start, "unterminated quoted symbol"),
                        Some('|') => break,
                        Some(c) => name.push(c),
                    }
                }
                Ok(SExpr::Atom(name, start))
            }
            Some(_) => {
                let mut name = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_whitespace() || matches!(c, '(' | ')' | '"' | ';' | '|') {
                        break;
                    }
                    name.push(c);
                    self.bump();
                }
                Ok(SExpr::Atom(name, start))
            }
        }
    }
}

// \u{d..d} with 1 to 5 hex digits and \udddd; anything else is literal.
fn unescape(raw: &str) -> Word {
    let chars: Vec<char> = raw.chars().collect();
    let mut out = Vec::new();
    let mut k = 0;
    while k < chars.len() {
        if chars[k] == '\\' && chars.get(k + 1) == Some(&'u') {
            let hex = |s: &[char]| -> Option<u32> {
                let s: String = s.iter().collect();
                u32::from_str_radix(&s, 16).ok()
            };
            if chars.get(k + 2) == Some(&'{') {
                if let Some(close) = chars[k + 3..].iter().position(|&c| c == '}') {
                    let digits = &chars[k + 3..k + 3 + close];
                    if (1..=5).contains(&digits.len()) && digits.iter().all(char::is_ascii_hexdigit) {
                        if let Some(cp) = hex(digits).and_then(|v| CodePoint::new(v).ok()) {
                            out.push(cp);
                            k += 4 + close;
                            continue;
                        }
                    }
                }
            } else if k + 6 <= chars.len() && chars[k + 2..k + 6].iter().all(char::is_ascii_hexdigit) {
                if let Some(cp) = hex(&chars[k + 2..k + 6]).and_then(|v| CodePoint::new(v).ok()) {
                    out.push(cp);
                    k += 6;
                    continue;
                }
            }
        }
        out.push(CodePoint::from(chars[k]));
        k += 1;
    }
    Word::new(out)
}

/// A parsed script: declared variables and flattened assertions.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Script {
    pub logic: Option<String>,
    pub decls: Vec<StrVar>,
    pub asserts: Vec<Constraint>,
    pub has_check_sat: bool,
}

const SUPPORTED_LOGICS: [&str; 2] = ["QF_S", "QF_SLIA"];

const INTEGER_OPS: [&str; 14] = [
    "str.len", "str.to_int", "str.to.int", "str.from_int", "str.indexof", "str.at", "str.substr", "+", "-",
    "*", "<", "<=", ">", ">=",
];

struct Builder {
    script: Script,
    declared: BTreeSet<String>,
    fresh: usize,
}

impl Builder {
    fn fresh_var(&mut self) -> StrVar {
        loop {
            let name = format!(".fresh{}", self.fresh);
            self.fresh += 1;
            if self.declared.insert(name.clone()) {
                let v = StrVar::new(name);
                self.script.decls.push(v.clone());
                return v;
            }
        }
    }

    fn unsupported<T>(&self, e: &SExpr) -> Result<T, ParseError> {
        let what = e.describe();
        if INTEGER_OPS.contains(&what.as_str()) {
            fail(e.position(), format!("unsupported: {what} (integer terms are not supported)"))
        } else {
            fail(e.position(), format!("unsupported: {what}"))
        }
    }

    fn command(&mut self, cmd: &SExpr) -> Result<bool, ParseError> {
        let Some((head, args)) = cmd.app() else {
            return fail(cmd.position(), "expected a command");
        };
        match head {
            "set-logic" => {
                let logic = args.first().and_then(SExpr::atom).unwrap_or_default();
                if !SUPPORTED_LOGICS.contains(&logic) {
                    return fail(cmd.position(), format!("unsupported: logic {logic}"));
                }
                self.script.logic = Some(logic.to_string());
            }
            "set-info" | "set-option" => {}
            "exit" => return Ok(false),
            "check-sat" => self.script.has_check_sat = true,
            "declare-fun" | "declare-const" => self.declare(head, args, cmd.position())?,
            "assert" => match args {
                [term] => self.assertion(term)?,
                _ => return fail(cmd.position(), "assert takes one term"),
            },
            other => return fail(cmd.position(), format!("unsupported: {other}")),
        }
        Ok(true)
    }

    fn declare(&mut self, head: &str, args: &[SExpr], pos: Position) -> Result<(), ParseError> {
        let (name, sort) = match (head, args) {
            ("declare-fun", [SExpr::Atom(n, _), SExpr::List(params, _), sort]) if params.is_empty() => (n, sort),
            ("declare-const", [SExpr::Atom(n, _), sort]) => (n, sort),
            ("declare-fun", [_, SExpr::List(..), _]) => return fail(pos, "unsupported: function declarations with arguments"),
            _ => return fail(pos, format!("malformed {head}")),
        };
        if sort.atom() != Some("String") {
            return fail(sort.position(), format!("unsupported: sort {}", sort.describe()));
        }
        if !self.declared.insert(name.clone()) {
            return fail(pos, format!("{name} is already declared"));
        }
        self.script.decls.push(StrVar::new(name.clone()));
        Ok(())
    }

    fn assertion(&mut self, term: &SExpr) -> Result<(), ParseError> {
        if term.atom() == Some("true") {
            return Ok(());
        }
        let Some((head, args)) = term.app() else {
            return self.unsupported(term);
        };
        match (head, args) {
            ("and", conjuncts) => conjuncts.iter().try_for_each(|c| self.assertion(c)),
            ("=", terms) if terms.len() >= 2 => terms.windows(2).try_for_each(|pair| self.equation(&pair[0], &pair[1])),
            ("str.in_re", [t, re]) => {
                let var = self.name(t)?;
                let regex = self.regex(re)?;
                self.script.asserts.push(Constraint::InRe { var, regex });
                Ok(())
            }
            _ => self.unsupported(term),
        }
    }

    fn equation(&mut self, t1: &SExpr, t2: &SExpr) -> Result<(), ParseError> {
        for t in [t1, t2] {
            if t.app().is_some_and(|(head, _)| INTEGER_OPS.contains(&head)) {
                return self.unsupported(t);
            }
        }
        if let Some(v) = self.var(t1)? {
            self.define(v, t2)
        } else if let Some(v) = self.var(t2)? {
            self.define(v, t1)
        } else {
            let v = self.name(t1)?;
            self.define(v, t2)
        }
    }

    // A declared variable, `None` for other terms.
    fn var(&self, t: &SExpr) -> Result<Option<StrVar>, ParseError> {
        match t {
            SExpr::Atom(name, pos) => {
                if self.declared.contains(name) {
                    Ok(Some(StrVar::new(name.clone())))
                } else if name.chars().all(|c| c.is_ascii_digit()) {
                    fail(*pos, format!("unsupported: numeral {name} (integer terms are not supported)"))
                } else {
                    fail(*pos, format!("unknown symbol {name}"))
                }
            }
            _ => Ok(None),
        }
    }

    // The variable standing for `t`, introducing one if needed.
    fn name(&mut self, t: &SExpr) -> Result<StrVar, ParseError> {
        if let Some(v) = self.var(t)? {
            return Ok(v);
        }
        let v = self.fresh_var();
        self.define(v.clone(), t)?;
        Ok(v)
    }

    fn literal(&self, t: &SExpr, what: &str) -> Result<Word, ParseError> {
        match t {
            SExpr::Str(w, _) => Ok(w.clone()),
            _ => fail(t.position(), format!("unsupported: {what} must be a string literal")),
        }
    }

    fn define(&mut self, lhs: StrVar, t: &SExpr) -> Result<(), ParseError> {
        let c = match t {
            SExpr::Str(w, _) => Constraint::EqConst { lhs, value: w.clone() },
            SExpr::Atom(..) => {
                let rhs = self.var(t)?.expect("atoms are variables");
                Constraint::EqVar { lhs, rhs }
            }
            SExpr::List(..) => match t.app() {
                Some(("str.++", [])) => Constraint::EqConst { lhs, value: Word::empty() },
                Some(("str.++", [one])) => return self.define(lhs, one),
                Some(("str.++", [first, rest @ ..])) => {
                    let left = self.name(first)?;
                    let right = match rest {
                        [second] => self.name(second)?,
                        _ => {
                            let v = self.fresh_var();
                            let mut items = vec![SExpr::Atom("str.++".into(), t.position())];
                            items.extend(rest.iter().cloned());
                            self.define(v.clone(), &SExpr::List(items, t.position()))?;
                            v
                        }
                    };
                    Constraint::EqConcat { lhs, left, right }
                }
                Some(("str.replace", [s, p, r])) => {
                    let src = self.name(s)?;
                    let pattern = self.literal(p, "str.replace pattern")?;
                    let replacement = self.literal(r, "str.replace replacement")?;
                    Constraint::EqReplace { lhs, src, pattern, replacement }
                }
                Some(("str.replace_re", [s, p, r])) => {
                    let src = self.name(s)?;
                    let pattern = self.regex(p)?;
                    let replacement = self.literal(r, "str.replace_re replacement")?;
                    Constraint::EqReplaceRe { lhs, src, pattern, replacement }
                }
                _ => return self.unsupported(t),
            },
        };
        self.script.asserts.push(c);
        Ok(())
    }

    fn regex(&self, t: &SExpr) -> Result<Regex, ParseError> {
        match t.atom() {
            Some("re.allchar") => return Ok(Regex::AnyChar),
            Some("re.all") => return Ok(Regex::star(Regex::AnyChar)),
            _ => {}
        }
        let Some((head, args)) = t.app() else {
            return self.unsupported(t);
        };
        let fold = |args: &[SExpr], join: fn(Regex, Regex) -> Regex| -> Result<Regex, ParseError> {
            let mut it = args.iter().map(|a| self.regex(a));
            let first = it.next().ok_or_else(|| ParseError {
                position: t.position(),
                message: format!("{head} needs at least one argument"),
            })??;
            it.try_fold(first, |acc, r| Ok(join(acc, r?)))
        };
        match (head, args) {
            ("str.to_re", [s]) => Ok(Regex::Literal(self.literal(s, "str.to_re argument")?)),
            ("re.range", [lo, hi]) => {
                let bound = |e: &SExpr| -> Result<CodePoint, ParseError> {
                    match e {
                        SExpr::Str(w, _) if w.len() == 1 => Ok(w[0]),
                        _ => fail(e.position(), "re.range bounds must be single-character string literals"),
                    }
                };
                let (lo, hi) = (bound(lo)?, bound(hi)?);
                match Interval::between(lo, hi) {
                    Ok(iv) => Ok(Regex::Range(iv)),
                    Err(_) => fail(t.position(), "unsupported: re.range with lower bound above upper bound"),
                }
            }
            ("re.++", args) => fold(args, Regex::concat),
            ("re.union", args) => fold(args, Regex::union),
            ("re.*", [r]) => Ok(Regex::star(self.regex(r)?)),
            ("re.+", [r]) => Ok(Regex::plus(self.regex(r)?)),
            ("re.opt", [r]) => Ok(Regex::union(self.regex(r)?, Regex::Literal(Word::empty()))),
            _ => self.unsupported(t),
        }
    }
}

/// Parse a script. Errors carry the line and column of the offending term.
pub fn parse_script(src: &str) -> Result<Script, ParseError> {
    let exprs = Lexer::new(src).exprs()?;
    let mut b = Builder {
        script: Script::default(),
        declared: BTreeSet::new(),
        fresh: 0,
    };
    for cmd in &exprs {
        if !b.command(cmd)? {
            break;
        }
    }
    Ok(b.script)
}

fn symbol(name: &str) -> String {
    let simple = !name.is_empty()
        && !name.starts_with(|c: char| c.is_ascii_digit())
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || "~!@$%^&*_-+=<>.?/".contains(c));
    if simple {
        name.to_string()
    } else {
        format!("|{name}|")
    }
}

fn string_literal(w: &Word) -> String {
    let mut out = String::from("\"");
    for c in w.iter() {
        match c.to_char() {
            Some('"') => out.push_str("\"\""),
            Some(ch) if (' '..='~').contains(&ch) && ch != '\\' => out.push(ch),
            _ => {
                let _ = write!(out, "\\u{{{:x}}}", c.value());
            }
        }
    }
    out.push('"');
    out
}

fn regex_term(r: &Regex) -> String {
    match r {
        Regex::Literal(w) => format!("(str.to_re {})", string_literal(w)),
        Regex::Range(iv) => format!(
            "(re.range {} {})",
            string_literal(&Word::new(vec![iv.lo()])),
            string_literal(&Word::new(vec![iv.hi()]))
        ),
        Regex::Concat(a, b) => format!("(re.++ {} {})", regex_term(a), regex_term(b)),
        Regex::Union(a, b) => format!("(re.union {} {})", regex_term(a), regex_term(b)),
        Regex::Star(a) => format!("(re.* {})", regex_term(a)),
        Regex::Plus(a) => format!("(re.+ {})", regex_term(a)),
        Regex::AnyChar => "re.allchar".into(),
    }
}

impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(logic) = &self.logic {
            writeln!(f, "(set-logic {logic})")?;
        }
        for v in &self.decls {
            writeln!(f, "(declare-fun {} () String)", symbol(v.name()))?;
        }
        let s = |v: &StrVar| symbol(v.name());
        for c in &self.asserts {
            let body = match c {
                Constraint::EqConst { lhs, value } => format!("(= {} {})", s(lhs), string_literal(value)),
                Constraint::EqVar { lhs, rhs } => format!("(= {} {})", s(lhs), s(rhs)),
                Constraint::EqConcat { lhs, left, right } => format!("(= {} (str.++ {} {}))", s(lhs), s(left), s(right)),
                Constraint::EqReplace { lhs, src, pattern, replacement } => format!(
                    "(= {} (str.replace {} {} {}))",
                    s(lhs),
                    s(src),
                    string_literal(pattern),
                    string_literal(replacement)
                ),
                Constraint::EqReplaceRe { lhs, src, pattern, replacement } => format!(
                    "(= {} (str.replace_re {} {} {}))",
                    s(lhs),
                    s(src),
                    regex_term(pattern),
                    string_literal(replacement)
                ),
                Constraint::InRe { var, regex } => format!("(str.in_re {} {})", s(var), regex_term(regex)),
            };
            writeln!(f, "(assert {body})")?;
        }
        if self.has_check_sat {
            writeln!(f, "(check-sat)")?;
        }
        Ok(())
    }
}

/// Options of the `solve` command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolverConfig {
    pub state_ceiling: usize,
    pub verbosity: u8,
    pub dot_dump_dir: Option<PathBuf>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            state_ceiling: Limits::DEFAULT_MAX_STATES,
            verbosity: 0,
            dot_dump_dir: None,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "symtrans", version, about = "String constraint solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Decide an SMT-LIB script; prints sat, unsat or unknown.
    Solve {
        file: PathBuf,
        /// Write the final domain of every variable as DOT into this directory.
        #[arg(long, value_name = "DIR")]
        dump_dot: Option<PathBuf>,
        /// Abort a construction once it needs more states than this.
        #[arg(long, value_name = "N", default_value_t = Limits::DEFAULT_MAX_STATES, value_parser = positive)]
        max_states: usize,
        /// Log propagation steps to stderr (repeat for more detail).
        #[arg(short, long, action = clap::ArgAction::Count)]
        verbose: u8,
    },
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(0) => Err("must be at least 1".into()),
        Ok(n) => Ok(n),
        Err(e) => Err(e.to_string()),
    }
}

impl Command {
    pub fn config(&self) -> (&Path, SolverConfig) {
        match self {
            Command::Solve {
                file,
                dump_dot,
                max_states,
                verbose,
            } => (
                file,
                SolverConfig {
                    state_ceiling: *max_states,
                    verbosity: *verbose,
                    dot_dump_dir: dump_dot.clone(),
                },
            ),
        }
    }
}

fn file_name(var: &StrVar) -> String {
    let safe: String = var
        .name()
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.') { c } else { '_' })
        .collect();
    format!("{safe}.dot")
}

/// Run a parsed command line. Returns the process exit code: 0 for any
/// verdict, 1 on input or output errors.
pub fn run(command: &Command, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let (path, config) = command.config();
    if config.verbosity >= 1 {
        let _ = writeln!(
            err,
            "note: str.replace and str.replace_re are read as replacing any one matching occurrence, \
             not the leftmost one"
        );
    }
    let src = match std::fs::read_to_string(path) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {}: {e}", path.display());
            return 1;
        }
    };
    let script = match parse_script(&src) {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {}:{e}", path.display());
            return 1;
        }
    };
    let limits = Limits {
        max_states: config.state_ceiling,
    };
    let outcome = solve(&script, &limits);
    if let Some(dir) = &config.dot_dump_dir {
        let written = std::fs::create_dir_all(dir).and_then(|()| {
            outcome
                .domains
                .iter()
                .try_for_each(|(v, dom)| std::fs::write(dir.join(file_name(v)), dom.to_dot()))
        });
        if let Err(e) = written {
            let _ = writeln!(err, "error: {}: {e}", dir.display());
            return 1;
        }
    }
    if writeln!(out, "{}", outcome.verdict).is_err() {
        return 1;
    }
    0
}

/// Parse `args` (program name first) and run them.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli.command, out, err),
        Err(e) => {
            let _ = write!(err, "{e}");
            e.exit_code()
        }
    }
}
