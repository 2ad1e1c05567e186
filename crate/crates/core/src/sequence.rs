//! Integer sequences from random recursive formulas, scored by exact re-evaluation.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::Value;
use thiserror::Error;

use crate::env::{DifficultySchedule, Generated, ParamSpec, Params, Reject, ScoreResult, Task, TaskInstance};
use crate::grammar::{DepthBounds, DerivationTree, Grammar};
use crate::rng::TaskRng;

pub const LENGTH: usize = 8;
/// Largest magnitude of any shown term.
pub const TERM_CAP: i64 = 1_000_000_000_000;
/// Largest magnitude of any intermediate value during evaluation.
pub const EVAL_GUARD: i64 = 1_000_000_000_000_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Pow,
    Mod,
}

impl Op {
    fn symbol(self) -> &'static str {
        match self {
            Op::Add => "+",
            Op::Sub => "-",
            Op::Mul => "*",
            Op::Pow => "**",
            Op::Mod => "%",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            Op::Add | Op::Sub => 1,
            Op::Mul | Op::Mod => 2,
            Op::Pow => 4,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Formula {
    Const(BigInt),
    N,
    /// `U[n - k]`
    Back(usize),
    Neg(Box<Formula>),
    Bin(Op, Box<Formula>, Box<Formula>),
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("value exceeds the evaluation guard")]
    Overflow,
    #[error("negative exponent")]
    NegativeExponent,
    #[error("modulo by zero")]
    ModuloByZero,
    #[error("reference before the first term")]
    OutOfRange,
}

fn guard(v: BigInt) -> Result<BigInt, EvalError> {
    if v.abs() > BigInt::from(EVAL_GUARD) {
        Err(EvalError::Overflow)
    } else {
        Ok(v)
    }
}

impl Formula {
    pub fn bin(op: Op, a: Formula, b: Formula) -> Formula {
        Formula::Bin(op, Box::new(a), Box::new(b))
    }

    pub fn constant(c: i64) -> Formula {
        Formula::Const(BigInt::from(c))
    }

    /// Evaluates at index `n` where `terms[i]` is `U[i]`.
    pub fn eval(&self, n: usize, terms: &[BigInt]) -> Result<BigInt, EvalError> {
        match self {
            Formula::Const(c) => Ok(c.clone()),
            Formula::N => Ok(BigInt::from(n)),
            Formula::Back(k) => n.checked_sub(*k).and_then(|i| terms.get(i)).cloned().ok_or(EvalError::OutOfRange),
            Formula::Neg(a) => Ok(-a.eval(n, terms)?),
            Formula::Bin(op, a, b) => {
                let (x, y) = (a.eval(n, terms)?, b.eval(n, terms)?);
                guard(match op {
                    Op::Add => x + y,
                    Op::Sub => x - y,
                    Op::Mul => x * y,
                    Op::Mod => {
                        if y.is_zero() {
                            return Err(EvalError::ModuloByZero);
                        }
                        x.mod_floor(&y)
                    }
                    Op::Pow => {
                        if y.is_negative() {
                            return Err(EvalError::NegativeExponent);
                        }
                        if x.is_zero() || x.abs().is_one() {
                            let even = y.is_even();
                            if x.is_zero() {
                                if y.is_zero() { BigInt::one() } else { BigInt::zero() }
                            } else if x.is_negative() && !even {
                                -BigInt::one()
                            } else {
                                BigInt::one()
                            }
                        } else {
                            // |x| >= 2, so exponents past 62 overflow the guard.
                            let e = y.to_u32().filter(|&e| e <= 62).ok_or(EvalError::Overflow)?;
                            x.pow(e)
                        }
                    }
                })
            }
        }
    }

    /// Largest back-reference offset; zero when there is none.
    pub fn degree(&self) -> usize {
        match self {
            Formula::Back(k) => *k,
            Formula::Neg(a) => a.degree(),
            Formula::Bin(_, a, b) => a.degree().max(b.degree()),
            _ => 0,
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Formula::Neg(a) => 1 + a.depth(),
            Formula::Bin(_, a, b) => 1 + a.depth().max(b.depth()),
            _ => 1,
        }
    }

    /// Whether the formula uses `%` or unary minus on a non-literal.
    pub fn uses_extensions(&self) -> bool {
        match self {
            Formula::Neg(a) => !matches!(**a, Formula::Const(_)) || a.uses_extensions(),
            Formula::Bin(Op::Mod, _, _) => true,
            Formula::Bin(_, a, b) => a.uses_extensions() || b.uses_extensions(),
            _ => false,
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Formula::Const(c) if c.is_negative() => 3,
            Formula::Neg(_) => 3,
            Formula::Bin(op, _, _) => op.precedence(),
            _ => 5,
        }
    }

    fn render_at(&self, min: u8) -> String {
        let s = match self {
            Formula::Const(c) => c.to_string(),
            Formula::N => "n".into(),
            Formula::Back(k) => format!("U[n - {k}]"),
            Formula::Neg(a) => format!("-{}", a.render_at(3)),
            Formula::Bin(Op::Pow, a, b) => format!("{}**{}", a.render_at(5), b.render_at(3)),
            Formula::Bin(op, a, b) => {
                let p = op.precedence();
                format!("{}{}{}", a.render_at(p), op.symbol(), b.render_at(p + 1))
            }
        };
        if self.precedence() < min {
            format!("({s})")
        } else {
            s
        }
    }
}

impl std::fmt::Display for Formula {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.render_at(0))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("cannot read formula at byte {pos}: {msg}")]
pub struct FormulaError {
    pub pos: usize,
    pub msg: String,
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err<T>(&self, msg: &str) -> Result<T, FormulaError> {
        Err(FormulaError { pos: self.pos, msg: msg.into() })
    }

    fn peek(&mut self) -> Option<u8> {
        while self.src.get(self.pos).is_some_and(|c| c.is_ascii_whitespace()) {
            self.pos += 1;
        }
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, s: &str) -> bool {
        self.peek();
        if self.src[self.pos..].starts_with(s.as_bytes()) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Result<BigInt, FormulaError> {
        self.peek();
        let start = self.pos;
        while self.src.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected a number");
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).expect("digits").parse().expect("digits"))
    }

    fn expr(&mut self) -> Result<Formula, FormulaError> {
        let mut lhs = self.term()?;
        loop {
            let op = if self.eat("+") {
                Op::Add
            } else if self.eat("-") {
                Op::Sub
            } else {
                return Ok(lhs);
            };
            lhs = Formula::bin(op, lhs, self.term()?);
        }
    }

    fn term(&mut self) -> Result<Formula, FormulaError> {
        let mut lhs = self.unary()?;
        loop {
            self.peek();
            let op = if self.src[self.pos..].starts_with(b"**") {
                return Ok(lhs);
            } else if self.eat("*") {
                Op::Mul
            } else if self.eat("%") {
                Op::Mod
            } else {
                return Ok(lhs);
            };
            lhs = Formula::bin(op, lhs, self.unary()?);
        }
    }

    fn unary(&mut self) -> Result<Formula, FormulaError> {
        if self.eat("-") {
            let inner = self.unary()?;
            return Ok(match inner {
                Formula::Const(c) => Formula::Const(-c),
                other => Formula::Neg(Box::new(other)),
            });
        }
        if self.eat("+") {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Formula, FormulaError> {
        let base = self.atom()?;
        if self.eat("**") {
            return Ok(Formula::bin(Op::Pow, base, self.unary()?));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Formula, FormulaError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(")") {
                    return self.err("expected `)`");
                }
                Ok(e)
            }
            Some(b'n') => {
                self.pos += 1;
                Ok(Formula::N)
            }
            Some(b'U') => {
                self.pos += 1;
                if !(self.eat("[") && self.eat("n") && self.eat("-")) {
                    return self.err("expected `[n - k]`");
                }
                let k = self.number()?.to_usize().filter(|&k| k >= 1);
                let Some(k) = k else { return self.err("offset must be a positive integer") };
                if !self.eat("]") {
                    return self.err("expected `]`");
                }
                Ok(Formula::Back(k))
            }
            Some(c) if c.is_ascii_digit() => Ok(Formula::Const(self.number()?)),
            _ => self.err("expected a number, `n`, `U[n - k]` or `(`"),
        }
    }
}

/// Reads a right-hand side such as `n*U[n - 1]`. Surrounding backticks are
/// ignored.
pub fn parse_formula(text: &str) -> Result<Formula, FormulaError> {
    let t = text.trim().trim_matches('`').trim();
    let mut p = Parser { src: t.as_bytes(), pos: 0 };
    let f = p.expr()?;
    if p.peek().is_some() {
        return p.err("trailing input");
    }
    Ok(f)
}

/// Production order matters: [`tree_to_formula`] dispatches on it.
pub fn formula_grammar() -> Grammar {
    Grammar::from_rules(
        "E",
        &[
            ("E", "E '+' E", 1.0),
            ("E", "E '-' E", 0.8),
            ("E", "E '*' E", 1.0),
            ("E", "E '**' 'K'", 0.15),
            ("E", "E '%' 'M'", 0.15),
            ("E", "'-' E", 0.1),
            ("E", "'n'", 2.0),
            ("E", "'U'", 3.0),
            ("E", "'C'", 2.0),
        ],
    )
    .expect("formula grammar is valid")
}

fn tree_to_formula(t: &DerivationTree, max_degree: usize, rng: &mut TaskRng) -> Formula {
    let nt: Vec<&DerivationTree> = t.children.iter().filter(|c| c.production.is_some()).collect();
    let sub = |i: usize, rng: &mut TaskRng| tree_to_formula(nt[i], max_degree, rng);
    match t.production.expect("nonterminal node") {
        0 => Formula::bin(Op::Add, sub(0, rng), sub(1, rng)),
        1 => Formula::bin(Op::Sub, sub(0, rng), sub(1, rng)),
        2 => Formula::bin(Op::Mul, sub(0, rng), sub(1, rng)),
        3 => Formula::bin(Op::Pow, sub(0, rng), Formula::constant(rng.range_i64(2, 3))),
        4 => Formula::bin(Op::Mod, sub(0, rng), Formula::constant(rng.range_i64(2, 9))),
        5 => Formula::Neg(Box::new(sub(0, rng))),
        6 => Formula::N,
        7 => Formula::Back(rng.range_usize(1, max_degree.max(1))),
        _ => Formula::constant(rng.range_i64(-3, 9)),
    }
}

/// Terms `U[0..len]`: the initial terms, then the formula from `n = degree`.
pub fn unroll(f: &Formula, initial: &[BigInt], len: usize) -> Result<Vec<BigInt>, EvalError> {
    let mut terms = initial.to_vec();
    for n in initial.len()..len {
        let v = f.eval(n, &terms)?;
        terms.push(v);
    }
    Ok(terms)
}

fn big_list(xs: &[BigInt]) -> String {
    format!("[{}]", xs.iter().map(BigInt::to_string).collect::<Vec<_>>().join(", "))
}

pub fn sequence_prompt(terms: &[BigInt], degree: usize) -> String {
    let len = terms.len();
    format!(
        "You are given a sequence of {len} numbers generated by a recursive formula of known degree of recursion, here equal to {degree}.\n\
         The indexation of the sequence start from 0, i.e. we provide you [U0,U1,...,U{}].Your task is to infer the formula that defines U[n] in terms of previous values and the current index n.\n\n\
         Instruction:\n\
         - Use only the binary operators: +, -, *, **\n\
         - Reference if necessary to previous terms as U[n - 1], U[n - 2], ..., U[n - d] where d is the given degree of recursion (use exactly this format)\n\
         - You can use \"n\" as the current index (e.g., U[n] = n)\n\
         - You must only provide the right-hand side of the formula (i.e., f(U[n], n) such that U[n] = f(...))\n\
         - ⚠️ This implies to not include \"U[n] =\" in your output.\n \
         - The degree of recursion of your guessed formula must be inferior or equal to the one of the true formula\n\n\
         - The sequence you are asked to induce its recursive formula have the following properties:\n\
         Sequence: {}\n\
         Degree of recurrence: {degree}\n\
         Initial terms: {}\n\n \
         Your provided answer must be valid for all terms n ≥ d, and must be as simple as possible.",
        len - 1,
        big_list(terms),
        big_list(&terms[..degree]),
    )
}

/// 1.0 iff the candidate has degree at most `degree` and reproduces every
/// term from index `degree` on.
pub fn score_formula(terms: &[BigInt], degree: usize, candidate: &str) -> ScoreResult {
    let f = match parse_formula(candidate) {
        Ok(f) => f,
        Err(e) => return ScoreResult::parse_error(e),
    };
    if f.degree() > degree {
        return ScoreResult::new(0.0).with("error", format!("degree {} exceeds {degree}", f.degree()));
    }
    for n in degree..terms.len() {
        match f.eval(n, terms) {
            Ok(v) if v == terms[n] => {}
            Ok(_) => return ScoreResult::new(0.0).with("first_mismatch", n),
            Err(e) => return ScoreResult::new(0.0).with("error", e.to_string()),
        }
    }
    ScoreResult::new(1.0)
}

pub struct SequentialInduction;

impl Task for SequentialInduction {
    fn name(&self) -> &'static str {
        "sequential_induction"
    }

    fn schedule(&self) -> DifficultySchedule {
        DifficultySchedule::new(vec![
            ParamSpec::discrete("min_depth", 2.0, 0.3, 1.0, 6.0),
            ParamSpec::discrete("max_depth", 3.0, 0.6, 2.0, 9.0),
            ParamSpec::discrete("max_degree", 1.0, 0.3, 1.0, 3.0),
        ])
    }

    fn generate(&self, params: &Params, rng: &mut TaskRng) -> Result<Generated, Reject> {
        let lo = params.usize("min_depth").max(1);
        let bounds = DepthBounds::new(lo, params.usize("max_depth").max(lo)).map_err(|e| Reject::new(e.to_string()))?;
        let tree = formula_grammar().sample(bounds, rng).map_err(|e| Reject::new(e.to_string()))?;
        let f = tree_to_formula(&tree, params.usize("max_degree"), rng);
        let degree = f.degree();
        let initial: Vec<BigInt> = (0..degree).map(|_| BigInt::from(rng.range_i64(-9, 9))).collect();
        let terms = unroll(&f, &initial, LENGTH).map_err(|e| Reject::new(e.to_string()))?;
        if terms.iter().any(|t| t.abs() > BigInt::from(TERM_CAP)) {
            return Err(Reject::new("terms too large"));
        }
        if terms.iter().all(|t| *t == terms[0]) || terms[degree..].iter().all(|t| *t == terms[degree]) {
            return Err(Reject::new("constant sequence"));
        }
        let answer = f.to_string();
        // The rendering must read back as the same function.
        if parse_formula(&answer).ok().and_then(|g| unroll(&g, &initial, LENGTH).ok()).as_deref() != Some(&terms[..]) {
            return Err(Reject::new("rendering does not round-trip"));
        }
        let as_json: Vec<Value> = terms.iter().map(|t| Value::from(t.to_string())).collect();
        Ok(Generated::new(sequence_prompt(&terms, degree), answer)
            .meta("sequence", as_json)
            .meta("degree", degree)
            .meta("depth", f.depth())
            .meta("uses_extensions", f.uses_extensions()))
    }

    fn score(&self, instance: &TaskInstance, candidate: &str) -> ScoreResult {
        let terms: Option<Vec<BigInt>> = instance
            .meta("sequence")
            .and_then(Value::as_array)
            .and_then(|a| a.iter().map(|v| v.as_str()?.parse().ok()).collect());
        let degree = instance.meta("degree").and_then(Value::as_u64);
        match (terms, degree) {
            (Some(t), Some(d)) if (d as usize) <= t.len() => score_formula(&t, d as usize, candidate),
            _ => ScoreResult::new(0.0).with("error", "instance lacks sequence data"),
        }
    }

    fn size_proxy(&self, instance: &TaskInstance) -> Option<f64> {
        instance.meta("depth")?.as_f64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ints(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn reference_instance() {
        let f = parse_formula("n*U[n - 1]").unwrap();
        let terms = unroll(&f, &ints(&[-1]), LENGTH).unwrap();
        assert_eq!(terms, ints(&[-1, -1, -2, -6, -24, -120, -720, -5040]));
        assert_eq!(score_formula(&terms, 1, "n*U[n - 1]").reward, 1.0);
        let p = sequence_prompt(&terms, 1);
        assert!(p.contains("Sequence: [-1, -1, -2, -6, -24, -120, -720, -5040]\nDegree of recurrence: 1\nInitial terms: [-1]\n\n Your provided answer"));
        assert!(p.contains("[U0,U1,...,U7].Your task"));
    }

    #[test]
    fn scoring_rules() {
        let evens = ints(&[0, 2, 4, 6, 8, 10, 12, 14]);
        assert_eq!(score_formula(&evens, 1, "U[n - 1]+2").reward, 1.0);
        assert_eq!(score_formula(&evens, 1, "2*n").reward, 1.0);
        assert_eq!(score_formula(&evens, 1, "U[n - 2]+4").reward, 0.0);
        assert_eq!(score_formula(&evens, 1, "U[n - 1]+3").reward, 0.0);
        assert_eq!(score_formula(&evens, 1, "U[n] = 2*n").reward, 0.0);
        assert_eq!(score_formula(&evens, 1, "2**(0-1)").reward, 0.0);
        assert_eq!(score_formula(&evens, 1, "").reward, 0.0);
    }

    #[test]
    fn python_precedence() {
        let at = |s: &str| parse_formula(s).unwrap().eval(3, &[]).unwrap();
        assert_eq!(at("-2**2"), BigInt::from(-4));
        assert_eq!(at("2**3**2"), BigInt::from(512));
        assert_eq!(at("-7 % 3"), BigInt::from(2));
        assert_eq!(at("n-2-1"), BigInt::from(0));
        assert_eq!(at("(n - 1)*(n + 1)"), BigInt::from(8));
    }

    #[test]
    fn rendering_parenthesizes_minimally() {
        let f = Formula::bin(Op::Mul, Formula::bin(Op::Add, Formula::N, Formula::constant(1)), Formula::Back(2));
        assert_eq!(f.to_string(), "(n+1)*U[n - 2]");
        let g = Formula::bin(Op::Pow, Formula::constant(-3), Formula::constant(2));
        assert_eq!(g.to_string(), "(-3)**2");
        let h = Formula::bin(Op::Sub, Formula::N, Formula::bin(Op::Sub, Formula::N, Formula::constant(1)));
        assert_eq!(h.to_string(), "n-(n-1)");
    }

    #[test]
    fn guard_stops_explosions() {
        let f = parse_formula("U[n - 1]**3").unwrap();
        assert_eq!(unroll(&f, &ints(&[7]), LENGTH), Err(EvalError::Overflow));
    }
}
