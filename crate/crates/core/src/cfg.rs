//! Random context-free grammars, derivation counting, and the parsability and parsing tasks.

use std::collections::BTreeSet;

use crate::env::{meta_str, meta_strings, normalize_word, DifficultySchedule, Generated, ParamSpec, Params, Reject, ScoreResult, Task, TaskInstance};
use crate::grammar::{DepthBounds, DerivationTree, Grammar, Symbol};
use crate::rng::TaskRng;

/// Number of derivations, saturated: `0`, `1`, or `2` meaning "two or more".
pub type Count = u8;

fn add(a: Count, b: Count) -> Count {
    (a + b).min(2)
}

fn mul(a: Count, b: Count) -> Count {
    (a * b).min(2)
}

/// Derivation counts for every nonterminal over every span of a token string.
///
/// Without epsilon productions a rule with several symbols splits its span
/// into strictly shorter pieces, so spans are filled by increasing length.
/// Within one span only unit rules `A -> B` relate nonterminals; those are
/// closed by a least fixpoint in the saturated semiring, which turns any
/// productive unit cycle into "two or more".
pub struct ParseChart<'g> {
    grammar: &'g Grammar,
    tokens: Vec<String>,
    /// `counts[i][len - 1][nt]` for the span starting at `i` of length `len`.
    counts: Vec<Vec<Vec<Count>>>,
}

impl<'g> ParseChart<'g> {
    pub fn build(grammar: &'g Grammar, tokens: &[String]) -> Self {
        let n = tokens.len();
        let k = grammar.num_nonterminals();
        let mut chart = ParseChart {
            grammar,
            tokens: tokens.to_vec(),
            counts: (0..n).map(|i| vec![vec![0; k]; n - i]).collect(),
        };
        for len in 1..=n {
            for i in 0..=n - len {
                let mut base = vec![0; k];
                for p in grammar.productions() {
                    if is_unit(&p.rhs) {
                        continue;
                    }
                    let w = chart.ways(&p.rhs, i, i + len);
                    base[p.lhs] = add(base[p.lhs], w);
                }
                let mut cur = base.clone();
                loop {
                    let mut next = base.clone();
                    for p in grammar.productions() {
                        if let [Symbol::Nonterminal(m)] = p.rhs[..] {
                            next[p.lhs] = add(next[p.lhs], cur[m]);
                        }
                    }
                    if next == cur {
                        break;
                    }
                    cur = next;
                }
                chart.counts[i][len - 1] = cur;
            }
        }
        chart
    }

    fn span(&self, nt: usize, i: usize, j: usize) -> Count {
        if j <= i {
            return 0;
        }
        self.counts[i][j - i - 1][nt]
    }

    fn symbol_ways(&self, s: &Symbol, i: usize, j: usize) -> Count {
        match s {
            Symbol::Terminal(t) => (j == i + 1 && self.tokens[i] == *t) as Count,
            Symbol::Nonterminal(m) => self.span(*m, i, j),
        }
    }

    /// Ways for `rhs` to cover exactly `[i, j)`, each symbol taking at least one token.
    fn ways(&self, rhs: &[Symbol], i: usize, j: usize) -> Count {
        if rhs.is_empty() {
            return (i == j) as Count;
        }
        let len = j - i;
        if rhs.len() > len {
            return 0;
        }
        // reach[p] = ways for the symbols so far to cover [i, p).
        let mut reach = vec![0 as Count; len + 1];
        reach[0] = 1;
        for s in rhs {
            let mut next = vec![0 as Count; len + 1];
            for (a, &w) in reach.iter().enumerate() {
                if w == 0 {
                    continue;
                }
                for b in a + 1..=len {
                    let sw = self.symbol_ways(s, i + a, i + b);
                    if sw > 0 {
                        next[b] = add(next[b], mul(w, sw));
                    }
                }
            }
            reach = next;
        }
        reach[len]
    }

    pub fn count(&self) -> Count {
        if self.tokens.is_empty() {
            return 0;
        }
        self.span(self.grammar.start(), 0, self.tokens.len())
    }

    /// One derivation tree of the whole string, if any.
    pub fn tree(&self) -> Option<DerivationTree> {
        if self.count() == 0 {
            return None;
        }
        self.extract(self.grammar.start(), 0, self.tokens.len(), &mut BTreeSet::new())
    }

    fn extract(&self, nt: usize, i: usize, j: usize, unit_path: &mut BTreeSet<usize>) -> Option<DerivationTree> {
        if !unit_path.insert(nt) {
            return None;
        }
        let result = self.grammar.productions_of(nt).find_map(|(pi, p)| {
            if let [Symbol::Nonterminal(m)] = p.rhs[..] {
                if self.span(m, i, j) == 0 {
                    return None;
                }
                let child = self.extract(m, i, j, unit_path)?;
                return Some(node(nt, pi, vec![child]));
            }
            if self.ways(&p.rhs, i, j) == 0 {
                return None;
            }
            let children = self.split(&p.rhs, i, j)?;
            Some(node(nt, pi, children))
        });
        unit_path.remove(&nt);
        result
    }

    fn split(&self, rhs: &[Symbol], i: usize, j: usize) -> Option<Vec<DerivationTree>> {
        let (first, rest) = rhs.split_first()?;
        let max_end = j - rest.len();
        for mid in i + 1..=max_end {
            if self.symbol_ways(first, i, mid) == 0 || self.ways(rest, mid, j) == 0 {
                continue;
            }
            let head = match first {
                Symbol::Terminal(t) => DerivationTree::leaf(t),
                Symbol::Nonterminal(m) => match self.extract(*m, i, mid, &mut BTreeSet::new()) {
                    Some(t) => t,
                    None => continue,
                },
            };
            let mut tail = if rest.is_empty() { Vec::new() } else { self.split(rest, mid, j)? };
            tail.insert(0, head);
            return Some(tail);
        }
        None
    }
}

fn node(nt: usize, production: usize, children: Vec<DerivationTree>) -> DerivationTree {
    DerivationTree { symbol: Symbol::Nonterminal(nt), production: Some(production), children }
}

fn is_unit(rhs: &[Symbol]) -> bool {
    matches!(rhs, [Symbol::Nonterminal(_)])
}

/// Saturated number of parse trees of `tokens` (0, 1, or 2 for "ambiguous").
/// Tokens that are not terminals of the grammar give 0 immediately.
pub fn count_parses(g: &Grammar, tokens: &[String]) -> Count {
    let terminals: BTreeSet<String> = g.terminals().into_iter().collect();
    if tokens.iter().any(|t| !terminals.contains(t)) {
        return 0;
    }
    ParseChart::build(g, tokens).count()
}

pub fn parsability_label(count: Count) -> &'static str {
    match count {
        0 => "unparsable",
        1 => "unambiguous",
        _ => "ambiguous",
    }
}

/// Grammar block: one production per line, continuation lines indented.
pub fn render_grammar(g: &Grammar) -> String {
    g.to_text().lines().collect::<Vec<_>>().join("\n    ")
}

pub fn to_lisp(g: &Grammar, t: &DerivationTree) -> String {
    match &t.symbol {
        Symbol::Terminal(s) => s.clone(),
        Symbol::Nonterminal(n) => {
            let mut parts = vec![g.name(*n).to_string()];
            parts.extend(t.children.iter().map(|c| to_lisp(g, c)));
            format!("({})", parts.join(" "))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

pub fn parse_sexp(text: &str) -> Result<Sexp, String> {
    let spaced = text.replace('(', " ( ").replace(')', " ) ");
    let tokens: Vec<&str> = spaced.split_whitespace().collect();
    let mut pos = 0;
    let e = sexp_at(&tokens, &mut pos)?;
    if pos != tokens.len() {
        return Err(format!("trailing input after position {pos}"));
    }
    Ok(e)
}

fn sexp_at(tokens: &[&str], pos: &mut usize) -> Result<Sexp, String> {
    let tok = *tokens.get(*pos).ok_or("unexpected end of input")?;
    *pos += 1;
    match tok {
        "(" => {
            let mut items = Vec::new();
            loop {
                match tokens.get(*pos) {
                    None => return Err("unclosed parenthesis".into()),
                    Some(&")") => {
                        *pos += 1;
                        return Ok(Sexp::List(items));
                    }
                    Some(_) => items.push(sexp_at(tokens, pos)?),
                }
            }
        }
        ")" => Err("unexpected `)`".into()),
        atom => Ok(Sexp::Atom(atom.to_string())),
    }
}

/// Checks that `tree` is a derivation of `nt` under `g` and appends its yield.
fn check_tree(g: &Grammar, nt: usize, tree: &[Sexp], out: &mut Vec<String>) -> Result<(), String> {
    let children = &tree[1..];
    let matches_rhs = |rhs: &[Symbol]| {
        rhs.len() == children.len()
            && rhs.iter().zip(children).all(|(s, c)| match (s, c) {
                (Symbol::Terminal(t), Sexp::Atom(a)) => terminal_eq(t, a),
                (Symbol::Nonterminal(m), Sexp::List(items)) => {
                    matches!(items.first(), Some(Sexp::Atom(l)) if label_eq(g.name(*m), l))
                }
                _ => false,
            })
    };
    let Some((_, p)) = g.productions_of(nt).find(|(_, p)| matches_rhs(&p.rhs)) else {
        return Err(format!("no production of {} matches this node", g.name(nt)));
    };
    for (s, c) in p.rhs.iter().zip(children) {
        match (s, c) {
            (Symbol::Terminal(t), _) => out.push(t.clone()),
            (Symbol::Nonterminal(m), Sexp::List(items)) => check_tree(g, *m, items, out)?,
            _ => unreachable!(),
        }
    }
    Ok(())
}

fn label_eq(name: &str, label: &str) -> bool {
    name.to_uppercase() == label.to_uppercase()
}

fn terminal_eq(t: &str, atom: &str) -> bool {
    let a = atom.trim_matches(|c| c == '\'' || c == '"');
    t.to_lowercase() == a.to_lowercase()
}

/// Reward 1 iff `candidate` is a derivation tree of `g` from its start symbol yielding `tokens`.
pub fn score_parse_tree(g: &Grammar, tokens: &[String], candidate: &str) -> ScoreResult {
    let sexp = match parse_sexp(candidate.trim()) {
        Ok(s) => s,
        Err(e) => return ScoreResult::parse_error(e),
    };
    let Sexp::List(items) = &sexp else {
        return ScoreResult::parse_error("expected a parenthesized tree");
    };
    match items.first() {
        Some(Sexp::Atom(l)) if label_eq(g.name(g.start()), l) => {}
        _ => return ScoreResult::binary(false).with("error", "root must be the start symbol"),
    }
    let mut leaves = Vec::new();
    if let Err(e) = check_tree(g, g.start(), items, &mut leaves) {
        return ScoreResult::binary(false).with("error", e);
    }
    ScoreResult::binary(leaves == tokens)
}

const WORDS: &[&str] = &[
    "shake", "reach", "expert", "development", "seek", "your", "of", "tree", "river", "cold", "bright", "sing",
    "stone", "quick", "paper", "moon", "walk", "gold", "north", "little", "garden", "open", "window", "sleep",
    "storm", "plan", "green", "bread", "light", "road", "fire", "glass", "dream", "truth", "voice", "field",
    "table", "friend", "ocean", "winter", "salt", "horse", "clock", "teach", "share", "build", "rain", "hope",
    "that", "the", "a", "not", "and", "who", "what", "with", "near", "under", "over", "into",
];

/// Rhs shapes: `T` stands for a terminal slot, `N` for a nonterminal slot.
fn shape_grammar(dyck_weight: f64) -> Grammar {
    let mut rules = vec![("R", "X", 3.0), ("R", "X R", 2.0), ("X", "'T'", 1.0), ("X", "'N'", 1.0)];
    if dyck_weight > 0.0 {
        rules.push(("R", "'[' R ']'", dyck_weight));
    }
    Grammar::from_rules("R", &rules).expect("shape grammar is valid")
}

#[derive(Clone, Debug)]
pub struct CfgParams {
    pub nonterminals: usize,
    pub terminals: usize,
    pub max_productions: usize,
    pub max_shape_depth: usize,
    pub dyck_weight: f64,
}

/// Samples a grammar over `S, A, B, ...` whose start symbol is productive.
/// Dead or cyclic rules are kept.
pub fn sample_cfg(p: &CfgParams, rng: &mut TaskRng) -> Result<Grammar, Reject> {
    let names: Vec<String> = std::iter::once("S".to_string())
        .chain((0..p.nonterminals.saturating_sub(1)).map(|i| ((b'A' + i as u8) as char).to_string()))
        .collect();
    let vocab: Vec<&str> = rng.sample_indices(WORDS.len(), p.terminals.max(1)).into_iter().map(|i| WORDS[i]).collect();
    let shapes = shape_grammar(p.dyck_weight);
    let bounds = DepthBounds::new(2, p.max_shape_depth.max(2)).map_err(|e| Reject::new(e.to_string()))?;
    let mut lines: Vec<(usize, String)> = Vec::new();
    let mut seen = BTreeSet::new();
    for (ni, name) in names.iter().enumerate() {
        let k = rng.range_usize(1, p.max_productions.max(1));
        for _ in 0..k {
            let shape = shapes.sample(bounds, rng).map_err(|e| Reject::new(e.to_string()))?.yield_tokens();
            let rhs: Vec<String> = shape
                .iter()
                .map(|s| match s.as_str() {
                    "T" => format!("'{}'", rng.choose(&vocab)),
                    "N" => rng.choose(&names).clone(),
                    b => format!("'{b}'"),
                })
                .collect();
            let line = format!("{name} -> {}", rhs.join(" "));
            if seen.insert(line.clone()) {
                lines.push((ni, line));
            }
        }
    }
    let (start_lines, mut rest): (Vec<_>, Vec<_>) = lines.into_iter().partition(|(ni, _)| *ni == 0);
    rng.shuffle(&mut rest);
    let text: Vec<String> = start_lines.into_iter().chain(rest).map(|(_, l)| l).collect();
    let g = Grammar::from_text(&text.join("\n")).map_err(|e| Reject::new(e.to_string()))?;
    if g.min_depth_map().get("S").copied().flatten().is_none() {
        return Err(Reject::new("start symbol is not productive"));
    }
    Ok(g)
}

fn cfg_schedule(extra: Vec<ParamSpec>) -> DifficultySchedule {
    let mut params = vec![
        ParamSpec::discrete("nonterminals", 3.0, 0.5, 2.0, 8.0),
        ParamSpec::discrete("terminals", 3.0, 0.6, 2.0, 10.0),
        ParamSpec::discrete("max_productions", 2.0, 0.3, 1.0, 4.0),
        ParamSpec::discrete("max_shape_depth", 3.0, 0.2, 2.0, 5.0),
        ParamSpec::continuous("dyck_weight", 0.3, 0.1, 0.0, 1.0),
        ParamSpec::discrete("min_depth", 2.0, 0.4, 1.0, 8.0),
        ParamSpec::discrete("max_depth", 4.0, 1.0, 2.0, 12.0),
    ];
    params.extend(extra);
    DifficultySchedule::new(params)
}

const MAX_TOKENS: usize = 40;

fn sample_string(params: &Params, rng: &mut TaskRng) -> Result<(Grammar, DerivationTree), Reject> {
    let cp = CfgParams {
        nonterminals: params.usize("nonterminals"),
        terminals: params.usize("terminals"),
        max_productions: params.usize("max_productions"),
        max_shape_depth: params.usize("max_shape_depth"),
        dyck_weight: params.get("dyck_weight"),
    };
    let g = sample_cfg(&cp, rng)?;
    let lo = params.usize("min_depth");
    let hi = params.usize("max_depth").max(lo);
    let bounds = DepthBounds::new(lo, hi).map_err(|e| Reject::new(e.to_string()))?;
    let tree = g.sample(bounds, rng).map_err(|e| Reject::new(e.to_string()))?;
    if tree.yield_tokens().len() > MAX_TOKENS {
        return Err(Reject::new("string too long"));
    }
    Ok((g, tree))
}

/// Swaps two tokens, inserts a vocabulary token, or deletes one.
pub fn perturb(tokens: &[String], vocab: &[String], rng: &mut TaskRng) -> Vec<String> {
    let mut t = tokens.to_vec();
    match rng.below(3) {
        0 if t.len() >= 2 => {
            let i = rng.below(t.len() - 1);
            let j = i + 1 + rng.below(t.len() - 1 - i);
            t.swap(i, j);
        }
        1 | 0 => {
            let i = rng.below(t.len() + 1);
            t.insert(i, rng.choose(vocab).clone());
        }
        _ => {
            if t.len() > 1 {
                t.remove(rng.below(t.len()));
            } else {
                t.push(rng.choose(vocab).clone());
            }
        }
    }
    t
}

fn block(grammar: &Grammar, string: &str) -> String {
    format!("(GRAMMAR)\n{}\n\n(STRING)\n{}\n\n(QUESTION)\n", render_grammar(grammar), string)
}

pub fn parsability_prompt(g: &Grammar, string: &str) -> String {
    format!(
        "{}What is the parsability of this string?\nAnswer with exactly one word, unambiguous|ambiguous|unparsable",
        block(g, string)
    )
}

pub fn parsing_prompt(g: &Grammar, string: &str) -> String {
    format!(
        "{}Return the fully parenthesized parse tree of STRING in Lisp style.\n\
         Use uppercase for nonterminals, lowercase unquoted tokens for terminals\n\
         Given G_ex: S -> NP VP, NP -> 'det' Noun, Noun -> 'noun', VP -> 'verb'         \
         and G_ex: \"det noun verb\" correct Lisp Parse Tree would be (S (NP det (Noun noun)) (VP verb)).\"",
        block(g, string)
    )
}

fn grammar_of(instance: &TaskInstance) -> Option<(Grammar, Vec<String>)> {
    let g = Grammar::from_text_lenient(meta_str(instance, "grammar")?).ok()?;
    Some((g, meta_strings(instance, "tokens")?))
}

pub struct Parsability;

impl Task for Parsability {
    fn name(&self) -> &'static str {
        "parsability"
    }

    fn schedule(&self) -> DifficultySchedule {
        cfg_schedule(vec![ParamSpec::continuous("perturb_prob", 0.4, 0.0, 0.0, 1.0)])
    }

    fn generate(&self, params: &Params, rng: &mut TaskRng) -> Result<Generated, Reject> {
        let (g, tree) = sample_string(params, rng)?;
        let mut tokens = tree.yield_tokens();
        let perturbed = rng.chance(params.get("perturb_prob"));
        if perturbed {
            tokens = perturb(&tokens, &g.terminals(), rng);
        }
        let label = parsability_label(count_parses(&g, &tokens));
        let string = tokens.join(" ");
        Ok(Generated::new(parsability_prompt(&g, &string), label)
            .meta("grammar", g.to_text())
            .meta("tokens", tokens.clone())
            .meta("perturbed", perturbed)
            .meta("length", tokens.len()))
    }

    fn score(&self, instance: &TaskInstance, candidate: &str) -> ScoreResult {
        let c = normalize_word(candidate);
        if !matches!(c.as_str(), "unambiguous" | "ambiguous" | "unparsable") {
            return ScoreResult::parse_error("expected unambiguous, ambiguous or unparsable");
        }
        ScoreResult::binary(c == normalize_word(&instance.answer))
    }

    fn size_proxy(&self, instance: &TaskInstance) -> Option<f64> {
        instance.meta("length")?.as_f64()
    }
}

pub struct Parsing;

impl Task for Parsing {
    fn name(&self) -> &'static str {
        "parsing"
    }

    fn schedule(&self) -> DifficultySchedule {
        cfg_schedule(vec![])
    }

    fn generate(&self, params: &Params, rng: &mut TaskRng) -> Result<Generated, Reject> {
        let (g, tree) = sample_string(params, rng)?;
        let tokens = tree.yield_tokens();
        if count_parses(&g, &tokens) != 1 {
            return Err(Reject::new("string does not have a unique parse"));
        }
        let string = tokens.join(" ");
        Ok(Generated::new(parsing_prompt(&g, &string), to_lisp(&g, &tree))
            .meta("grammar", g.to_text())
            .meta("tokens", tokens.clone())
            .meta("length", tokens.len()))
    }

    fn score(&self, instance: &TaskInstance, candidate: &str) -> ScoreResult {
        let Some((g, tokens)) = grammar_of(instance) else {
            return ScoreResult::new(0.0).with("error", "instance lacks grammar");
        };
        score_parse_tree(&g, &tokens, candidate)
    }

    fn size_proxy(&self, instance: &TaskInstance) -> Option<f64> {
        instance.meta("length")?.as_f64()
    }
}
