//! Weighted context-free production sampling with minimum and maximum depth control.
//!
//! Depth is node depth: a terminal leaf has depth 0 and a nonterminal node has
//! depth `1 + max(child depths)`. Before sampling we tabulate, for every
//! nonterminal and every depth `k` up to the budget, whether some derivation
//! has depth exactly `k`. Sampling then only ever picks productions that can
//! still land inside the requested window, so every returned tree satisfies
//! the bounds without whole-tree rejection.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::rng::TaskRng;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Terminal(String),
    Nonterminal(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Production {
    pub lhs: usize,
    pub rhs: Vec<Symbol>,
    pub weight: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum GrammarError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("nonterminal `{0}` has no productions")]
    MissingProductions(String),
    #[error("production weight must be positive and finite, got {0}")]
    BadWeight(f64),
    #[error("unknown start symbol `{0}`")]
    UnknownStart(String),
    #[error("nonterminal `{0}` has no terminating derivation")]
    NonTerminating(String),
    #[error("depth bounds [{min}, {max}] are malformed")]
    InvalidBounds { min: usize, max: usize },
    #[error("no derivation of `{symbol}` has depth in [{min}, {max}]")]
    InfeasibleBounds { symbol: String, min: usize, max: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DepthBounds {
    pub min_depth: usize,
    /// `None` means unbounded.
    pub max_depth: Option<usize>,
}

impl DepthBounds {
    pub fn new(min_depth: usize, max_depth: usize) -> Result<Self, GrammarError> {
        if min_depth > max_depth {
            return Err(GrammarError::InvalidBounds { min: min_depth, max: max_depth });
        }
        Ok(DepthBounds { min_depth, max_depth: Some(max_depth) })
    }

    pub fn at_least(min_depth: usize) -> Self {
        DepthBounds { min_depth, max_depth: None }
    }

    pub fn unbounded() -> Self {
        DepthBounds::at_least(0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DerivationTree {
    pub symbol: Symbol,
    /// Production used at this node; `None` for terminal leaves.
    pub production: Option<usize>,
    pub children: Vec<DerivationTree>,
}

impl DerivationTree {
    pub fn leaf(token: &str) -> Self {
        DerivationTree {
            symbol: Symbol::Terminal(token.to_string()),
            production: None,
            children: Vec::new(),
        }
    }

    pub fn depth(&self) -> usize {
        match self.symbol {
            Symbol::Terminal(_) => 0,
            Symbol::Nonterminal(_) => 1 + self.children.iter().map(|c| c.depth()).max().unwrap_or(0),
        }
    }

    pub fn yield_tokens(&self) -> Vec<String> {
        let mut out = Vec::new();
        self.collect_yield(&mut out);
        out
    }

    fn collect_yield(&self, out: &mut Vec<String>) {
        match &self.symbol {
            Symbol::Terminal(t) => out.push(t.clone()),
            Symbol::Nonterminal(_) => self.children.iter().for_each(|c| c.collect_yield(out)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grammar {
    names: Vec<String>,
    productions: Vec<Production>,
    by_lhs: Vec<Vec<usize>>,
    start: usize,
}

/// Extra headroom over the largest minimal depth when the caller gives no maximum.
const UNBOUNDED_SLACK: usize = 8;

impl Grammar {
    /// Builds a grammar from `(lhs, rhs, weight)` triples. The rhs uses the
    /// textual syntax: quoted terminals, bare nonterminals.
    pub fn from_rules(start: &str, rules: &[(&str, &str, f64)]) -> Result<Self, GrammarError> {
        let mut b = Builder::default();
        for (i, (lhs, rhs, w)) in rules.iter().enumerate() {
            b.add(lhs, rhs, *w, i + 1)?;
        }
        b.finish(start, true)
    }

    /// Parses `LHS -> 'terminal' Nonterminal ...` lines (alternatives on
    /// separate lines; `|` is also accepted). Every nonterminal must have a production.
    pub fn from_text(text: &str) -> Result<Self, GrammarError> {
        Self::parse_text(text, true)
    }

    /// Like [`Grammar::from_text`] but tolerates nonterminals with no productions.
    pub fn from_text_lenient(text: &str) -> Result<Self, GrammarError> {
        Self::parse_text(text, false)
    }

    fn parse_text(text: &str, strict: bool) -> Result<Self, GrammarError> {
        let mut b = Builder::default();
        let mut start = None;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (lhs, rhs) = line.split_once("->").ok_or_else(|| GrammarError::Parse {
                line: i + 1,
                msg: "expected `->`".into(),
            })?;
            let lhs = lhs.trim();
            if start.is_none() {
                start = Some(lhs.to_string());
            }
            for alt in split_alternatives(rhs) {
                b.add(lhs, &alt, 1.0, i + 1)?;
            }
        }
        let start = start.ok_or(GrammarError::Parse { line: 0, msg: "empty grammar".into() })?;
        b.finish(&start, strict)
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn name(&self, nt: usize) -> &str {
        &self.names[nt]
    }

    pub fn nonterminal(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn num_nonterminals(&self) -> usize {
        self.names.len()
    }

    pub fn productions(&self) -> &[Production] {
        &self.productions
    }

    pub fn productions_of(&self, nt: usize) -> impl Iterator<Item = (usize, &Production)> {
        self.by_lhs[nt].iter().map(move |&i| (i, &self.productions[i]))
    }

    pub fn terminals(&self) -> Vec<String> {
        let mut ts: Vec<String> = self
            .productions
            .iter()
            .flat_map(|p| p.rhs.iter())
            .filter_map(|s| match s {
                Symbol::Terminal(t) => Some(t.clone()),
                _ => None,
            })
            .collect();
        ts.sort();
        ts.dedup();
        ts
    }

    pub fn render_production(&self, p: &Production) -> String {
        let rhs: Vec<String> = p
            .rhs
            .iter()
            .map(|s| match s {
                Symbol::Terminal(t) => format!("'{t}'"),
                Symbol::Nonterminal(n) => self.names[*n].clone(),
            })
            .collect();
        format!("{} -> {}", self.names[p.lhs], rhs.join(" "))
    }

    /// One production per line, in declaration order.
    pub fn to_text(&self) -> String {
        self.productions
            .iter()
            .map(|p| self.render_production(p))
            .collect::<Vec<_>>()
            .join("\n")
    }

    /// Least fixpoint of `depth(N) = 1 + min_p max_{child} depth(child)`;
    /// `None` marks nonterminals with no terminating derivation.
    pub fn min_depth_map(&self) -> BTreeMap<String, Option<usize>> {
        let depths = self.min_depths();
        self.names.iter().cloned().zip(depths).collect()
    }

    fn min_depths(&self) -> Vec<Option<usize>> {
        let mut depth: Vec<Option<usize>> = vec![None; self.names.len()];
        loop {
            let mut changed = false;
            for p in &self.productions {
                let mut worst = 0usize;
                let mut ok = true;
                for s in &p.rhs {
                    if let Symbol::Nonterminal(n) = s {
                        match depth[*n] {
                            Some(d) => worst = worst.max(d),
                            None => {
                                ok = false;
                                break;
                            }
                        }
                    }
                }
                if ok {
                    let cand = worst + 1;
                    if depth[p.lhs].is_none_or(|d| cand < d) {
                        depth[p.lhs] = Some(cand);
                        changed = true;
                    }
                }
            }
            if !changed {
                return depth;
            }
        }
    }

    /// Samples a derivation of the start symbol with depth inside `bounds`.
    pub fn sample(&self, bounds: DepthBounds, rng: &mut TaskRng) -> Result<DerivationTree, GrammarError> {
        self.sample_from(self.start, bounds, rng)
    }

    pub fn sample_from(
        &self,
        symbol: usize,
        bounds: DepthBounds,
        rng: &mut TaskRng,
    ) -> Result<DerivationTree, GrammarError> {
        let min_depths = self.min_depths();
        let Some(base) = min_depths[symbol] else {
            return Err(GrammarError::NonTerminating(self.names[symbol].clone()));
        };
        let largest_min = min_depths.iter().flatten().copied().max().unwrap_or(0);
        let cap = match bounds.max_depth {
            Some(m) => {
                if bounds.min_depth > m {
                    return Err(GrammarError::InvalidBounds { min: bounds.min_depth, max: m });
                }
                m
            }
            None => bounds.min_depth.max(base).max(largest_min) + 2 * self.names.len() + UNBOUNDED_SLACK,
        };
        let table = DepthTable::build(self, cap);
        let lo = bounds.min_depth;
        if !(lo..=cap).any(|k| table.exact[symbol][k]) {
            return Err(GrammarError::InfeasibleBounds {
                symbol: self.names[symbol].clone(),
                min: lo,
                max: bounds.max_depth.unwrap_or(usize::MAX),
            });
        }
        Ok(self.sample_node(&table, symbol, lo, cap, rng))
    }

    fn sample_node(&self, table: &DepthTable, nt: usize, lo: usize, hi: usize, rng: &mut TaskRng) -> DerivationTree {
        let candidates: Vec<usize> = self.by_lhs[nt]
            .iter()
            .copied()
            .filter(|&p| (lo.max(1)..=hi).any(|k| table.prod_exact[p][k]))
            .collect();
        debug_assert!(!candidates.is_empty(), "caller checked feasibility");
        let weights: Vec<f64> = candidates.iter().map(|&p| self.productions[p].weight).collect();
        let chosen = candidates[rng.weighted_index(&weights)];
        let prod = &self.productions[chosen];

        let child_hi = hi - 1;
        let need = lo.saturating_sub(1);
        let nt_positions: Vec<usize> = prod
            .rhs
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s, Symbol::Nonterminal(_)))
            .map(|(i, _)| i)
            .collect();
        // One child carries the minimum-depth obligation.
        let forced = if need >= 1 {
            let capable: Vec<usize> = nt_positions
                .iter()
                .copied()
                .filter(|&i| match prod.rhs[i] {
                    Symbol::Nonterminal(c) => (need..=child_hi).any(|k| table.exact[c][k]),
                    _ => false,
                })
                .collect();
            Some(*rng.choose(&capable))
        } else {
            None
        };

        let children = prod
            .rhs
            .iter()
            .enumerate()
            .map(|(i, s)| match s {
                Symbol::Terminal(t) => DerivationTree::leaf(t),
                Symbol::Nonterminal(c) => {
                    let child_lo = if Some(i) == forced { need } else { 0 };
                    self.sample_node(table, *c, child_lo, child_hi, rng)
                }
            })
            .collect();
        DerivationTree {
            symbol: Symbol::Nonterminal(nt),
            production: Some(chosen),
            children,
        }
    }
}

impl fmt::Display for Grammar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

/// `exact[n][k]`: some derivation of nonterminal `n` has depth exactly `k`.
struct DepthTable {
    exact: Vec<Vec<bool>>,
    prod_exact: Vec<Vec<bool>>,
}

impl DepthTable {
    fn build(g: &Grammar, cap: usize) -> Self {
        let n = g.names.len();
        let mut exact = vec![vec![false; cap + 1]; n];
        let mut upto = vec![vec![false; cap + 1]; n];
        let mut prod_exact = vec![vec![false; cap + 1]; g.productions.len()];
        for k in 1..=cap {
            for (pi, p) in g.productions.iter().enumerate() {
                let mut all_fit = true;
                let mut some_tight = false;
                let mut has_nt = false;
                for s in &p.rhs {
                    if let Symbol::Nonterminal(c) = s {
                        has_nt = true;
                        all_fit &= upto[*c][k - 1];
                        some_tight |= exact[*c][k - 1];
                    }
                }
                let ok = if has_nt { all_fit && some_tight } else { k == 1 };
                if ok {
                    prod_exact[pi][k] = true;
                    exact[p.lhs][k] = true;
                }
            }
            for nt in 0..n {
                upto[nt][k] = upto[nt][k - 1] || exact[nt][k];
            }
        }
        DepthTable { exact, prod_exact }
    }
}

fn split_alternatives(rhs: &str) -> Vec<String> {
    let mut alts = vec![String::new()];
    let mut in_quote = false;
    for c in rhs.chars() {
        match c {
            '\'' => {
                in_quote = !in_quote;
                alts.last_mut().unwrap().push(c);
            }
            '|' if !in_quote => alts.push(String::new()),
            _ => alts.last_mut().unwrap().push(c),
        }
    }
    alts
}

#[derive(Default)]
struct Builder {
    names: Vec<String>,
    rules: Vec<(usize, Vec<RawSym>, f64)>,
}

enum RawSym {
    T(String),
    N(usize),
}

impl Builder {
    fn intern(&mut self, name: &str) -> usize {
        match self.names.iter().position(|n| n == name) {
            Some(i) => i,
            None => {
                self.names.push(name.to_string());
                self.names.len() - 1
            }
        }
    }

    fn add(&mut self, lhs: &str, rhs: &str, weight: f64, line: usize) -> Result<(), GrammarError> {
        if !(weight > 0.0 && weight.is_finite()) {
            return Err(GrammarError::BadWeight(weight));
        }
        if lhs.is_empty() || !lhs.chars().all(|c| c.is_alphanumeric() || c == '_') {
            return Err(GrammarError::Parse { line, msg: format!("bad nonterminal `{lhs}`") });
        }
        let lhs = self.intern(lhs);
        let mut syms = Vec::new();
        let mut chars = rhs.chars().peekable();
        while let Some(&c) = chars.peek() {
            if c.is_whitespace() {
                chars.next();
            } else if c == '\'' {
                chars.next();
                let mut tok = String::new();
                loop {
                    match chars.next() {
                        Some('\'') => break,
                        Some('\\') => match chars.next() {
                            Some(e) => tok.push(e),
                            None => return Err(GrammarError::Parse { line, msg: "dangling escape".into() }),
                        },
                        Some(ch) => tok.push(ch),
                        None => return Err(GrammarError::Parse { line, msg: "unterminated terminal".into() }),
                    }
                }
                syms.push(RawSym::T(tok));
            } else {
                let mut name = String::new();
                while let Some(&ch) = chars.peek() {
                    if ch.is_whitespace() || ch == '\'' {
                        break;
                    }
                    name.push(ch);
                    chars.next();
                }
                if !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
                    return Err(GrammarError::Parse { line, msg: format!("bad symbol `{name}`") });
                }
                syms.push(RawSym::N(self.intern(&name)));
            }
        }
        self.rules.push((lhs, syms, weight));
        Ok(())
    }

    fn finish(self, start: &str, strict: bool) -> Result<Grammar, GrammarError> {
        let start = self
            .names
            .iter()
            .position(|n| n == start)
            .ok_or_else(|| GrammarError::UnknownStart(start.to_string()))?;
        let mut by_lhs = vec![Vec::new(); self.names.len()];
        let productions: Vec<Production> = self
            .rules
            .into_iter()
            .enumerate()
            .map(|(i, (lhs, syms, weight))| {
                by_lhs[lhs].push(i);
                Production {
                    lhs,
                    rhs: syms
                        .into_iter()
                        .map(|s| match s {
                            RawSym::T(t) => Symbol::Terminal(t),
                            RawSym::N(n) => Symbol::Nonterminal(n),
                        })
                        .collect(),
                    weight,
                }
            })
            .collect();
        if strict {
            if let Some(i) = by_lhs.iter().position(|ps| ps.is_empty()) {
                return Err(GrammarError::MissingProductions(self.names[i].clone()));
            }
        }
        Ok(Grammar {
            names: self.names,
            productions,
            by_lhs,
            start,
        })
    }
}
