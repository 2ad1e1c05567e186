//! A small regex dialect with full-match language semantics.
//!
//! Matching is Thompson-NFA simulation, so results depend only on the
//! language of the pattern. Stacked quantifiers such as `a+?` are read as a
//! quantifier applied to a quantified atom, not as lazy or possessive forms.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::env::{meta_str, meta_strings, DifficultySchedule, Generated, ParamSpec, Params, Reject, ScoreResult, Task, TaskInstance};
use crate::grammar::{DepthBounds, Grammar};
use crate::rng::TaskRng;

/// Largest repetition count accepted in `{m,n}`.
pub const MAX_REPEAT: u32 = 1000;
/// Compiled automata larger than this are refused.
pub const MAX_NFA_STATES: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Perl {
    Digit,
    NotDigit,
    Word,
    NotWord,
    Space,
    NotSpace,
}

impl Perl {
    fn matches(self, c: char) -> bool {
        let word = c.is_ascii_alphanumeric() || c == '_';
        let space = matches!(c, ' ' | '\t' | '\n' | '\r' | '\x0b' | '\x0c');
        match self {
            Perl::Digit => c.is_ascii_digit(),
            Perl::NotDigit => !c.is_ascii_digit(),
            Perl::Word => word,
            Perl::NotWord => !word,
            Perl::Space => space,
            Perl::NotSpace => !space,
        }
    }

    fn letter(self) -> char {
        match self {
            Perl::Digit => 'd',
            Perl::NotDigit => 'D',
            Perl::Word => 'w',
            Perl::NotWord => 'W',
            Perl::Space => 's',
            Perl::NotSpace => 'S',
        }
    }

    fn from_letter(c: char) -> Option<Perl> {
        Some(match c {
            'd' => Perl::Digit,
            'D' => Perl::NotDigit,
            'w' => Perl::Word,
            'W' => Perl::NotWord,
            's' => Perl::Space,
            'S' => Perl::NotSpace,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ClassItem {
    Char(char),
    Range(char, char),
    Perl(Perl),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharClass {
    pub negated: bool,
    pub items: Vec<ClassItem>,
    /// False for a bare `\d`-style escape outside brackets.
    pub bracketed: bool,
}

impl CharClass {
    pub fn perl(p: Perl) -> Self {
        CharClass { negated: false, items: vec![ClassItem::Perl(p)], bracketed: false }
    }

    pub fn matches(&self, c: char) -> bool {
        let hit = self.items.iter().any(|it| match *it {
            ClassItem::Char(x) => x == c,
            ClassItem::Range(a, b) => a <= c && c <= b,
            ClassItem::Perl(p) => p.matches(c),
        });
        hit != self.negated
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Regex {
    Empty,
    Literal(char),
    /// Any character except newline.
    Dot,
    Class(CharClass),
    Concat(Vec<Regex>),
    Alt(Vec<Regex>),
    Group(Box<Regex>),
    Repeat { inner: Box<Regex>, min: u32, max: Option<u32> },
    StartAnchor,
    EndAnchor,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegexError {
    #[error("unexpected end of pattern")]
    UnexpectedEnd,
    #[error("unbalanced parenthesis at {0}")]
    Unbalanced(usize),
    #[error("nothing to repeat at {0}")]
    NothingToRepeat(usize),
    #[error("bad repetition bounds at {0}")]
    BadRepeat(usize),
    #[error("unsupported escape \\{0}")]
    BadEscape(char),
    #[error("bad character range {0}-{1}")]
    BadRange(char, char),
    #[error("pattern too large")]
    TooLarge,
}

const META: &str = ".^$*+?()[]{}|\\";

fn push_escaped(out: &mut String, c: char, in_class: bool) {
    match c {
        '\t' => out.push_str("\\t"),
        '\n' => out.push_str("\\n"),
        '\r' => out.push_str("\\r"),
        c if (!in_class && META.contains(c)) || (in_class && "]\\^-[".contains(c)) => {
            out.push('\\');
            out.push(c);
        }
        c => out.push(c),
    }
}

impl fmt::Display for Regex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = String::new();
        self.write(&mut s);
        f.write_str(&s)
    }
}

impl Regex {
    pub fn parse(text: &str) -> Result<Regex, RegexError> {
        let mut p = Parser { chars: text.chars().collect(), pos: 0 };
        let r = p.alt()?;
        if p.pos < p.chars.len() {
            return Err(RegexError::Unbalanced(p.pos));
        }
        Ok(r)
    }

    fn write(&self, out: &mut String) {
        match self {
            Regex::Empty => {}
            Regex::Literal(c) => push_escaped(out, *c, false),
            Regex::Dot => out.push('.'),
            Regex::StartAnchor => out.push('^'),
            Regex::EndAnchor => out.push('$'),
            Regex::Class(cls) => {
                if !cls.bracketed && !cls.negated && cls.items.len() == 1 {
                    if let ClassItem::Perl(p) = cls.items[0] {
                        out.push('\\');
                        out.push(p.letter());
                        return;
                    }
                }
                out.push('[');
                if cls.negated {
                    out.push('^');
                }
                for it in &cls.items {
                    match *it {
                        ClassItem::Char(c) => push_escaped(out, c, true),
                        ClassItem::Range(a, b) => {
                            push_escaped(out, a, true);
                            out.push('-');
                            push_escaped(out, b, true);
                        }
                        ClassItem::Perl(p) => {
                            out.push('\\');
                            out.push(p.letter());
                        }
                    }
                }
                out.push(']');
            }
            Regex::Concat(parts) => {
                for p in parts {
                    if matches!(p, Regex::Alt(_)) {
                        out.push_str("(?:");
                        p.write(out);
                        out.push(')');
                    } else {
                        p.write(out);
                    }
                }
            }
            Regex::Alt(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        out.push('|');
                    }
                    p.write(out);
                }
            }
            Regex::Group(inner) => {
                out.push('(');
                inner.write(out);
                out.push(')');
            }
            Regex::Repeat { inner, min, max } => {
                if matches!(**inner, Regex::Concat(_) | Regex::Alt(_) | Regex::Empty) {
                    out.push_str("(?:");
                    inner.write(out);
                    out.push(')');
                } else {
                    inner.write(out);
                }
                match (min, max) {
                    (0, None) => out.push('*'),
                    (1, None) => out.push('+'),
                    (0, Some(1)) => out.push('?'),
                    (m, None) => out.push_str(&format!("{{{m},}}")),
                    (m, Some(n)) if m == n => out.push_str(&format!("{{{m}}}")),
                    (m, Some(n)) => out.push_str(&format!("{{{m},{n}}}")),
                }
            }
        }
    }

    pub fn compile(&self) -> Result<Nfa, RegexError> {
        Nfa::compile(self)
    }

    /// Anchored membership test.
    pub fn full_match(&self, s: &str) -> bool {
        self.compile().map(|n| n.full_match(s)).unwrap_or(false)
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn alt(&mut self) -> Result<Regex, RegexError> {
        let mut branches = vec![self.concat()?];
        while self.peek() == Some('|') {
            self.pos += 1;
            branches.push(self.concat()?);
        }
        Ok(if branches.len() == 1 { branches.pop().unwrap() } else { Regex::Alt(branches) })
    }

    fn concat(&mut self) -> Result<Regex, RegexError> {
        let mut parts = Vec::new();
        while let Some(c) = self.peek() {
            if c == '|' || c == ')' {
                break;
            }
            let atom_pos = self.pos;
            let mut atom = self.atom()?;
            while let Some((min, max)) = self.quantifier()? {
                if matches!(atom, Regex::Empty) && atom_pos == self.pos {
                    return Err(RegexError::NothingToRepeat(atom_pos));
                }
                atom = Regex::Repeat { inner: Box::new(atom), min, max };
            }
            parts.push(atom);
        }
        Ok(match parts.len() {
            0 => Regex::Empty,
            1 => parts.pop().unwrap(),
            _ => Regex::Concat(parts),
        })
    }

    fn number(&mut self) -> Option<u32> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return None;
        }
        let s: String = self.chars[start..self.pos].iter().collect();
        Some(s.parse().unwrap_or(u32::MAX))
    }

    fn quantifier(&mut self) -> Result<Option<(u32, Option<u32>)>, RegexError> {
        let start = self.pos;
        let q = match self.peek() {
            Some('*') => (0, None),
            Some('+') => (1, None),
            Some('?') => (0, Some(1)),
            Some('{') => {
                self.pos += 1;
                let m = self.number();
                let q = if let (Some('}'), Some(exact)) = (self.peek(), m) {
                    (exact, m)
                } else if self.peek() == Some(',') {
                    self.pos += 1;
                    let n = self.number();
                    if self.peek() != Some('}') || (m.is_none() && n.is_none()) {
                        self.pos = start;
                        return Ok(None);
                    }
                    (m.unwrap_or(0), n)
                } else {
                    // Not a quantifier; `{` is a literal.
                    self.pos = start;
                    return Ok(None);
                };
                if q.0 > MAX_REPEAT || q.1.is_some_and(|n| n > MAX_REPEAT || n < q.0) {
                    return Err(RegexError::BadRepeat(start));
                }
                q
            }
            _ => return Ok(None),
        };
        self.pos += 1;
        Ok(Some(q))
    }

    fn atom(&mut self) -> Result<Regex, RegexError> {
        let start = self.pos;
        let c = self.peek().ok_or(RegexError::UnexpectedEnd)?;
        self.pos += 1;
        Ok(match c {
            '(' => {
                if self.chars[self.pos..].starts_with(&['?', ':']) {
                    self.pos += 2;
                    let inner = self.alt()?;
                    self.expect_close(start)?;
                    // Non-capturing groups only affect grouping.
                    Regex::Group(Box::new(inner))
                } else {
                    let inner = self.alt()?;
                    self.expect_close(start)?;
                    Regex::Group(Box::new(inner))
                }
            }
            '*' | '+' | '?' => return Err(RegexError::NothingToRepeat(start)),
            '{' => {
                self.pos = start;
                if self.quantifier()?.is_some() {
                    return Err(RegexError::NothingToRepeat(start));
                }
                self.pos = start + 1;
                Regex::Literal('{')
            }
            '.' => Regex::Dot,
            '^' => Regex::StartAnchor,
            '$' => Regex::EndAnchor,
            '[' => Regex::Class(self.class()?),
            '\\' => match self.escape()? {
                ClassItem::Perl(p) => Regex::Class(CharClass::perl(p)),
                ClassItem::Char(c) => Regex::Literal(c),
                ClassItem::Range(..) => unreachable!(),
            },
            c => Regex::Literal(c),
        })
    }

    fn expect_close(&mut self, open: usize) -> Result<(), RegexError> {
        if self.peek() == Some(')') {
            self.pos += 1;
            Ok(())
        } else {
            Err(RegexError::Unbalanced(open))
        }
    }

    fn escape(&mut self) -> Result<ClassItem, RegexError> {
        let c = self.peek().ok_or(RegexError::UnexpectedEnd)?;
        self.pos += 1;
        if let Some(p) = Perl::from_letter(c) {
            return Ok(ClassItem::Perl(p));
        }
        Ok(ClassItem::Char(match c {
            't' => '\t',
            'n' => '\n',
            'r' => '\r',
            'f' => '\x0c',
            'v' => '\x0b',
            c if c.is_ascii_alphanumeric() => return Err(RegexError::BadEscape(c)),
            c => c,
        }))
    }

    fn class(&mut self) -> Result<CharClass, RegexError> {
        let mut negated = false;
        if self.peek() == Some('^') {
            negated = true;
            self.pos += 1;
        }
        let mut items = Vec::new();
        let mut first = true;
        loop {
            let c = self.peek().ok_or(RegexError::UnexpectedEnd)?;
            if c == ']' && !first {
                self.pos += 1;
                break;
            }
            first = false;
            self.pos += 1;
            let item = if c == '\\' { self.escape()? } else { ClassItem::Char(c) };
            let ClassItem::Char(lo) = item else {
                items.push(item);
                continue;
            };
            let is_range = self.peek() == Some('-') && self.chars.get(self.pos + 1).is_some_and(|&n| n != ']');
            if !is_range {
                items.push(item);
                continue;
            }
            self.pos += 1;
            let hc = self.peek().ok_or(RegexError::UnexpectedEnd)?;
            self.pos += 1;
            let hi = if hc == '\\' {
                match self.escape()? {
                    ClassItem::Char(h) => h,
                    _ => return Err(RegexError::BadRange(lo, hc)),
                }
            } else {
                hc
            };
            if hi < lo {
                return Err(RegexError::BadRange(lo, hi));
            }
            items.push(ClassItem::Range(lo, hi));
        }
        Ok(CharClass { negated, items, bracketed: true })
    }
}

#[derive(Clone, Debug)]
enum Edge {
    Eps(usize),
    Any(usize),
    Char(char, usize),
    Class(usize, usize),
    AtStart(usize),
    AtEnd(usize),
}

/// Thompson automaton with a single accepting state.
#[derive(Clone, Debug)]
pub struct Nfa {
    edges: Vec<Vec<Edge>>,
    classes: Vec<CharClass>,
    start: usize,
    accept: usize,
}

impl Nfa {
    pub fn compile(re: &Regex) -> Result<Nfa, RegexError> {
        let mut nfa = Nfa { edges: Vec::new(), classes: Vec::new(), start: 0, accept: 0 };
        let (s, e) = nfa.build(re)?;
        nfa.start = s;
        nfa.accept = e;
        Ok(nfa)
    }

    pub fn num_states(&self) -> usize {
        self.edges.len()
    }

    fn state(&mut self) -> Result<usize, RegexError> {
        if self.edges.len() >= MAX_NFA_STATES {
            return Err(RegexError::TooLarge);
        }
        self.edges.push(Vec::new());
        Ok(self.edges.len() - 1)
    }

    fn build(&mut self, re: &Regex) -> Result<(usize, usize), RegexError> {
        let s = self.state()?;
        let e = self.state()?;
        match re {
            Regex::Empty => self.edges[s].push(Edge::Eps(e)),
            Regex::Literal(c) => self.edges[s].push(Edge::Char(*c, e)),
            Regex::Dot => self.edges[s].push(Edge::Any(e)),
            Regex::StartAnchor => self.edges[s].push(Edge::AtStart(e)),
            Regex::EndAnchor => self.edges[s].push(Edge::AtEnd(e)),
            Regex::Class(c) => {
                self.classes.push(c.clone());
                let id = self.classes.len() - 1;
                self.edges[s].push(Edge::Class(id, e));
            }
            Regex::Group(inner) => {
                let (a, b) = self.build(inner)?;
                self.edges[s].push(Edge::Eps(a));
                self.edges[b].push(Edge::Eps(e));
            }
            Regex::Concat(parts) => {
                let mut cur = s;
                for p in parts {
                    let (a, b) = self.build(p)?;
                    self.edges[cur].push(Edge::Eps(a));
                    cur = b;
                }
                self.edges[cur].push(Edge::Eps(e));
            }
            Regex::Alt(parts) => {
                for p in parts {
                    let (a, b) = self.build(p)?;
                    self.edges[s].push(Edge::Eps(a));
                    self.edges[b].push(Edge::Eps(e));
                }
            }
            Regex::Repeat { inner, min, max } => {
                let mut cur = s;
                for _ in 0..*min {
                    let (a, b) = self.build(inner)?;
                    self.edges[cur].push(Edge::Eps(a));
                    cur = b;
                }
                match max {
                    None => {
                        let (a, b) = self.build(inner)?;
                        self.edges[cur].push(Edge::Eps(a));
                        self.edges[b].push(Edge::Eps(a));
                        self.edges[b].push(Edge::Eps(e));
                        self.edges[cur].push(Edge::Eps(e));
                    }
                    Some(n) => {
                        for _ in *min..*n {
                            let (a, b) = self.build(inner)?;
                            self.edges[cur].push(Edge::Eps(a));
                            self.edges[cur].push(Edge::Eps(e));
                            cur = b;
                        }
                        self.edges[cur].push(Edge::Eps(e));
                    }
                }
            }
        }
        Ok((s, e))
    }

    fn closure(&self, set: &mut Vec<usize>, seen: &mut [bool], at_start: bool, at_end: bool) {
        let mut stack = set.clone();
        while let Some(q) = stack.pop() {
            for edge in &self.edges[q] {
                let next = match *edge {
                    Edge::Eps(t) => Some(t),
                    Edge::AtStart(t) if at_start => Some(t),
                    Edge::AtEnd(t) if at_end => Some(t),
                    _ => None,
                };
                if let Some(t) = next {
                    if !seen[t] {
                        seen[t] = true;
                        set.push(t);
                        stack.push(t);
                    }
                }
            }
        }
    }

    pub fn full_match(&self, s: &str) -> bool {
        let chars: Vec<char> = s.chars().collect();
        let n = self.edges.len();
        let mut seen = vec![false; n];
        seen[self.start] = true;
        let mut cur = vec![self.start];
        self.closure(&mut cur, &mut seen, true, chars.is_empty());
        for (i, &c) in chars.iter().enumerate() {
            let mut seen = vec![false; n];
            let mut next = Vec::new();
            for &q in &cur {
                for edge in &self.edges[q] {
                    let t = match *edge {
                        Edge::Any(t) if c != '\n' => t,
                        Edge::Char(x, t) if x == c => t,
                        Edge::Class(id, t) if self.classes[id].matches(c) => t,
                        _ => continue,
                    };
                    if !seen[t] {
                        seen[t] = true;
                        next.push(t);
                    }
                }
            }
            if next.is_empty() {
                return false;
            }
            self.closure(&mut next, &mut seen, false, i + 1 == chars.len());
            cur = next;
        }
        cur.contains(&self.accept)
    }

    /// Whether any string over `alphabet` reaches the accepting state.
    pub fn accepts_some(&self, alphabet: &[char]) -> bool {
        // Anchors are treated as satisfiable; they only ever shrink the language
        // to strings the simulation still checks.
        let n = self.edges.len();
        let mut seen = vec![false; n];
        let mut stack = vec![self.start];
        seen[self.start] = true;
        while let Some(q) = stack.pop() {
            if q == self.accept {
                return true;
            }
            for edge in &self.edges[q] {
                let t = match *edge {
                    Edge::Eps(t) | Edge::AtStart(t) | Edge::AtEnd(t) => t,
                    Edge::Any(t) if alphabet.iter().any(|&c| c != '\n') => t,
                    Edge::Char(x, t) if alphabet.contains(&x) => t,
                    Edge::Class(id, t) if alphabet.iter().any(|&c| self.classes[id].matches(c)) => t,
                    _ => continue,
                };
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        false
    }
}

/// Characters used when sampling strings: printable ASCII without `'`, plus tab.
pub fn sample_alphabet() -> Vec<char> {
    (' '..='~').filter(|&c| c != '\'').chain(['\t']).collect()
}

/// Samples a string from the language of `re`, or `None` when a class has
/// no member in the sampling alphabet. Unbounded repetition adds a
/// geometric number of extra copies.
pub fn sample_match(re: &Regex, rng: &mut TaskRng) -> Option<String> {
    let alphabet = sample_alphabet();
    let mut out = String::new();
    sample_into(re, rng, &alphabet, &mut out)?;
    Some(out)
}

fn sample_into(re: &Regex, rng: &mut TaskRng, alphabet: &[char], out: &mut String) -> Option<()> {
    match re {
        Regex::Empty | Regex::StartAnchor | Regex::EndAnchor => {}
        Regex::Literal(c) => out.push(*c),
        Regex::Dot => {
            let printable: Vec<char> = alphabet.iter().copied().filter(|&c| c != '\t').collect();
            out.push(*rng.choose(&printable));
        }
        Regex::Class(cls) => {
            let members: Vec<char> = alphabet.iter().copied().filter(|&c| cls.matches(c)).collect();
            if members.is_empty() {
                return None;
            }
            out.push(*rng.choose(&members));
        }
        Regex::Concat(parts) => {
            for p in parts {
                sample_into(p, rng, alphabet, out)?;
            }
        }
        Regex::Alt(parts) => sample_into(rng.choose(parts), rng, alphabet, out)?,
        Regex::Group(inner) => sample_into(inner, rng, alphabet, out)?,
        Regex::Repeat { inner, min, max } => {
            let extra_cap = match max {
                Some(n) => (n - min) as usize,
                None => 4,
            };
            let extra = if max.is_some() {
                rng.range_usize(0, extra_cap)
            } else {
                rng.geometric(0.5, extra_cap)
            };
            for _ in 0..(*min as usize + extra) {
                sample_into(inner, rng, alphabet, out)?;
            }
        }
    }
    Some(())
}

fn regex_grammar() -> Grammar {
    Grammar::from_rules(
        "R",
        &[
            ("R", "C", 4.0),
            ("R", "C '|' R", 1.0),
            ("C", "P", 3.0),
            ("C", "P C", 2.0),
            ("P", "A", 3.0),
            ("P", "A 'STAR'", 0.6),
            ("P", "A 'PLUS'", 0.6),
            ("P", "A 'OPT'", 0.6),
            ("P", "A 'REP'", 0.5),
            ("A", "'LIT'", 3.0),
            ("A", "'CLASS'", 1.5),
            ("A", "'PRE'", 1.0),
            ("A", "'DOT'", 0.4),
            ("A", "'(' R ')'", 1.0),
        ],
    )
    .expect("regex grammar is valid")
}

fn literal_text(rng: &mut TaskRng) -> String {
    let pools = [
        "abcdefghijklmnopqrstuvwxyz",
        "ABCDEFGHIJKLMNOPQRSTUVWXYZ",
        "0123456789",
        " .-_!#@%&,;:<>=/\\",
    ];
    let pool: Vec<char> = rng.choose(&[pools[0], pools[0], pools[1], pools[2], pools[3]]).chars().collect();
    let mut s = String::new();
    push_escaped(&mut s, *rng.choose(&pool), false);
    s
}

fn class_text(rng: &mut TaskRng) -> String {
    let printable: Vec<char> = (' '..='~').filter(|&c| c != '\'').collect();
    match rng.below(6) {
        0 => "[a-z]".into(),
        1 => "[A-Z]".into(),
        2 => "[0-9]".into(),
        3 => {
            let a = rng.below(printable.len() - 1);
            let b = (a + 1 + rng.below(40)).min(printable.len() - 1);
            let mut s = String::from("[");
            push_escaped(&mut s, printable[a], true);
            s.push('-');
            push_escaped(&mut s, printable[b], true);
            s.push(']');
            s
        }
        4 => {
            let k = rng.range_usize(2, 4);
            let mut s = String::from("[");
            for i in rng.sample_indices(26, k) {
                s.push((b'a' + i as u8) as char);
            }
            s.push(']');
            s
        }
        _ => {
            let k = rng.range_usize(1, 3);
            let mut s = String::from("[^");
            for i in rng.sample_indices(26, k) {
                s.push((b'a' + i as u8) as char);
            }
            s.push(']');
            s
        }
    }
}

/// Samples a random pattern whose grammar derivation depth lies in the bounds.
pub fn generate_regex(min_depth: usize, max_depth: usize, rng: &mut TaskRng) -> Result<(Regex, String), Reject> {
    let g = regex_grammar();
    let bounds = DepthBounds::new(min_depth, max_depth.max(min_depth)).map_err(|e| Reject::new(e.to_string()))?;
    let tree = g.sample(bounds, rng).map_err(|e| Reject::new(e.to_string()))?;
    let mut text = String::new();
    for tok in tree.yield_tokens() {
        match tok.as_str() {
            "LIT" => text.push_str(&literal_text(rng)),
            "CLASS" => text.push_str(&class_text(rng)),
            "PRE" => text.push_str(rng.choose(&["\\d", "\\w", "\\s", "\\d", "\\w"])),
            "DOT" => text.push('.'),
            "STAR" => text.push('*'),
            "PLUS" => text.push('+'),
            "OPT" => text.push('?'),
            "REP" => {
                let m = rng.range_usize(1, 3);
                if rng.chance(0.5) {
                    text.push_str(&format!("{{{m}}}"));
                } else {
                    text.push_str(&format!("{{{m},{}}}", m + rng.range_usize(1, 3)));
                }
            }
            other => text.push_str(other),
        }
    }
    let re = Regex::parse(&text).map_err(|e| Reject::new(format!("generated pattern failed to parse: {e}")))?;
    Ok((re, text))
}

fn regex_schedule(extra: Vec<ParamSpec>) -> DifficultySchedule {
    let mut params = vec![
        ParamSpec::discrete("min_depth", 5.0, 0.4, 4.0, 12.0),
        ParamSpec::discrete("max_depth", 7.0, 1.0, 5.0, 16.0),
    ];
    params.extend(extra);
    DifficultySchedule::new(params)
}

fn usable_example(s: &str) -> bool {
    !s.contains('\'') && !s.contains('\n') && s.chars().count() <= 24
}

/// Prompt exemplar fixed by the task format.
pub const FOLLOWING_EXEMPLAR: &str = "'daf' is a valid match for regex '[a-z]{3}' but not 'ab1'";

pub struct RegexFollowing;

impl Task for RegexFollowing {
    fn name(&self) -> &'static str {
        "regex_following"
    }

    fn schedule(&self) -> DifficultySchedule {
        regex_schedule(vec![])
    }

    fn generate(&self, params: &Params, rng: &mut TaskRng) -> Result<Generated, Reject> {
        let (re, text) = generate_regex(params.usize("min_depth"), params.usize("max_depth"), rng)?;
        let nfa = re.compile().map_err(|e| Reject::new(e.to_string()))?;
        let answer = sample_match(&re, rng).ok_or_else(|| Reject::new("empty sampling language"))?;
        if !usable_example(&answer) || answer.trim() != answer || answer.is_empty() || !nfa.full_match(&answer) {
            return Err(Reject::new("unusable reference match"));
        }
        Ok(Generated::new(format!("{FOLLOWING_EXEMPLAR}\nReturn a valid match for {text}"), answer)
            .meta("regex", text.clone())
            .meta("regex_length", text.chars().count()))
    }

    fn score(&self, instance: &TaskInstance, candidate: &str) -> ScoreResult {
        let Some(text) = meta_str(instance, "regex") else {
            return ScoreResult::new(0.0).with("error", "instance lacks regex");
        };
        let Ok(re) = Regex::parse(text) else {
            return ScoreResult::new(0.0).with("error", "instance regex does not parse");
        };
        let c = candidate.trim_matches(['\r', '\n']);
        ScoreResult::binary(re.full_match(c))
    }

    fn size_proxy(&self, instance: &TaskInstance) -> Option<f64> {
        instance.meta("regex_length")?.as_f64()
    }
}

fn quoted_list(xs: &[String]) -> String {
    xs.iter().map(|s| format!("'{s}'")).collect::<Vec<_>>().join(", ")
}

pub fn induction_prompt(positives: &[String], negatives: &[String]) -> String {
    format!(
        "Return a regex that matches all POSITIVE strings and none of the NEGATIVE strings.\nPOSITIVE: {}\nNEGATIVE: {}",
        quoted_list(positives),
        quoted_list(negatives)
    )
}

/// Reward for an induced pattern: half the accuracy below perfect
/// classification, otherwise one minus a length penalty capped at one half.
pub fn score_induction(target: &str, positives: &[String], negatives: &[String], candidate: &str) -> ScoreResult {
    let cand = candidate.trim_matches(['\r', '\n']);
    let nfa = match Regex::parse(cand).and_then(|r| r.compile()) {
        Ok(n) => n,
        Err(e) => return ScoreResult::parse_error(e),
    };
    let total = positives.len() + negatives.len();
    let correct = positives.iter().filter(|s| nfa.full_match(s)).count()
        + negatives.iter().filter(|s| !nfa.full_match(s)).count();
    let acc = if total == 0 { 1.0 } else { correct as f64 / total as f64 };
    if correct < total {
        return ScoreResult::new(0.5 * acc).with("accuracy", acc);
    }
    let lt = target.chars().count().max(1) as f64;
    let lc = cand.chars().count() as f64;
    let penalty = ((lc - lt) / (2.0 * lt)).clamp(0.0, 0.5);
    ScoreResult::new(1.0 - penalty).with("accuracy", acc).with("length_penalty", penalty)
}

pub struct RegexInduction;

impl Task for RegexInduction {
    fn name(&self) -> &'static str {
        "regex_induction"
    }

    fn schedule(&self) -> DifficultySchedule {
        regex_schedule(vec![
            ParamSpec::discrete("positives", 5.0, 0.6, 2.0, 12.0),
            ParamSpec::discrete("negatives", 5.0, 0.6, 2.0, 12.0),
        ])
    }

    fn generate(&self, params: &Params, rng: &mut TaskRng) -> Result<Generated, Reject> {
        let (min_d, max_d) = (params.usize("min_depth"), params.usize("max_depth"));
        let (re, text) = generate_regex(min_d, max_d, rng)?;
        let nfa = re.compile().map_err(|e| Reject::new(e.to_string()))?;
        let mut pos = BTreeSet::new();
        for _ in 0..params.usize("positives") * 6 {
            if pos.len() == params.usize("positives") {
                break;
            }
            if let Some(s) = sample_match(&re, rng) {
                if usable_example(&s) && nfa.full_match(&s) {
                    pos.insert(s);
                }
            }
        }
        let mut neg = BTreeSet::new();
        for _ in 0..params.usize("negatives") * 6 {
            if neg.len() == params.usize("negatives") {
                break;
            }
            let Ok((other, _)) = generate_regex(min_d, max_d, rng) else { continue };
            if let Some(s) = sample_match(&other, rng) {
                if usable_example(&s) && !nfa.full_match(&s) {
                    neg.insert(s);
                }
            }
        }
        if pos.is_empty() || neg.is_empty() {
            return Err(Reject::new("too few examples"));
        }
        let mut positives: Vec<String> = pos.into_iter().collect();
        let mut negatives: Vec<String> = neg.into_iter().collect();
        rng.shuffle(&mut positives);
        rng.shuffle(&mut negatives);
        Ok(Generated::new(induction_prompt(&positives, &negatives), text.clone())
            .meta("positives", positives)
            .meta("negatives", negatives)
            .meta("regex_length", text.chars().count()))
    }

    fn score(&self, instance: &TaskInstance, candidate: &str) -> ScoreResult {
        let (Some(p), Some(n)) = (meta_strings(instance, "positives"), meta_strings(instance, "negatives")) else {
            return ScoreResult::new(0.0).with("error", "instance lacks examples");
        };
        score_induction(&instance.answer, &p, &n, candidate)
    }

    fn size_proxy(&self, instance: &TaskInstance) -> Option<f64> {
        instance.meta("regex_length")?.as_f64()
    }
}
