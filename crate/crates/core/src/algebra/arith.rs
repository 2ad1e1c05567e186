//! Arithmetic expressions: grammar-driven generation, exact evaluation, rendering, scoring.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde_json::Value;

use super::{parse_rational, rational_to_string, render_rounded};
use crate::env::{DifficultySchedule, Generated, ParamSpec, Params, Reject, ScoreResult, Task, TaskInstance};
use crate::grammar::{DepthBounds, DerivationTree, Grammar};
use crate::rng::TaskRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    /// Literal with its surface text (`7.6`, `-14`).
    Num(BigRational, String),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    /// Rendered `(e)**2`.
    Square(Box<Expr>),
    /// Explicit parentheses.
    Group(Box<Expr>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DivisionByZero;

impl Expr {
    pub fn num(text: &str) -> Expr {
        Expr::Num(parse_rational(text).expect("valid literal"), text.to_string())
    }

    pub fn eval(&self) -> Result<BigRational, DivisionByZero> {
        Ok(match self {
            Expr::Num(v, _) => v.clone(),
            Expr::Bin(op, l, r) => {
                let (a, b) = (l.eval()?, r.eval()?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b.is_zero() {
                            return Err(DivisionByZero);
                        }
                        a / b
                    }
                }
            }
            Expr::Square(e) => {
                let v = e.eval()?;
                &v * &v
            }
            Expr::Group(e) => e.eval()?,
        })
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Num(..) => 1,
            Expr::Bin(_, l, r) => 1 + l.depth().max(r.depth()),
            Expr::Square(e) | Expr::Group(e) => 1 + e.depth(),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(op, ..) => op.precedence(),
            _ => 3,
        }
    }

    pub fn render(&self) -> String {
        match self {
            Expr::Num(_, text) => text.clone(),
            Expr::Group(e) => format!("({})", e.render()),
            Expr::Square(e) => format!("({})**2", e.render()),
            Expr::Bin(op, l, r) => {
                let p = op.precedence();
                let left = if l.precedence() < p { format!("({})", l.render()) } else { l.render() };
                let right = match r.as_ref() {
                    Expr::Num(v, text) if v.is_negative() || text.starts_with('-') => {
                        if matches!(op, BinOp::Add | BinOp::Sub) {
                            format!("({text})")
                        } else {
                            text.clone()
                        }
                    }
                    other if other.precedence() <= p => format!("({})", other.render()),
                    other => other.render(),
                };
                format!("{left} {} {right}", op.symbol())
            }
        }
    }
}

/// Exact evaluator over the surface syntax, independent of the AST.
pub fn evaluate_text(text: &str) -> Result<BigRational, String> {
    let tokens = tokenize(text)?;
    let mut p = TextParser { tokens, pos: 0 };
    let v = p.expr()?;
    if p.pos != p.tokens.len() {
        return Err(format!("unexpected token at {}", p.pos));
    }
    Ok(v)
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigRational),
    Op(&'static str),
    Open,
    Close,
}

fn tokenize(text: &str) -> Result<Vec<Tok>, String> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        match c {
            ' ' | '\t' | '\n' => i += 1,
            '(' => {
                out.push(Tok::Open);
                i += 1
            }
            ')' => {
                out.push(Tok::Close);
                i += 1
            }
            '+' => {
                out.push(Tok::Op("+"));
                i += 1
            }
            '-' => {
                out.push(Tok::Op("-"));
                i += 1
            }
            '/' => {
                out.push(Tok::Op("/"));
                i += 1
            }
            '*' => {
                if chars.get(i + 1) == Some(&'*') {
                    out.push(Tok::Op("**"));
                    i += 2;
                } else {
                    out.push(Tok::Op("*"));
                    i += 1;
                }
            }
            d if d.is_ascii_digit() || d == '.' => {
                let start = i;
                while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                    i += 1;
                }
                let s: String = chars[start..i].iter().collect();
                out.push(Tok::Num(parse_rational(&s).ok_or(format!("bad number {s}"))?));
            }
            other => return Err(format!("unexpected character {other:?}")),
        }
    }
    Ok(out)
}

struct TextParser {
    tokens: Vec<Tok>,
    pos: usize,
}

impl TextParser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos)
    }

    fn expr(&mut self) -> Result<BigRational, String> {
        let mut acc = self.term()?;
        while let Some(Tok::Op(op @ ("+" | "-"))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.term()?;
            acc = if op == "+" { acc + rhs } else { acc - rhs };
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<BigRational, String> {
        let mut acc = self.unary()?;
        while let Some(Tok::Op(op @ ("*" | "/"))) = self.peek().cloned() {
            self.pos += 1;
            let rhs = self.unary()?;
            if op == "*" {
                acc *= rhs;
            } else {
                if rhs.is_zero() {
                    return Err("division by zero".into());
                }
                acc /= rhs;
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<BigRational, String> {
        if let Some(Tok::Op("-")) = self.peek() {
            self.pos += 1;
            return Ok(-self.unary()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<BigRational, String> {
        let base = self.primary()?;
        if let Some(Tok::Op("**")) = self.peek() {
            self.pos += 1;
            let e = self.unary()?;
            if !e.is_integer() || e.is_negative() || e > BigRational::from_integer(BigInt::from(16)) {
                return Err("unsupported exponent".into());
            }
            let n: usize = e.to_integer().try_into().map_err(|_| "exponent")?;
            return Ok(num_traits::pow(base, n));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<BigRational, String> {
        match self.tokens.get(self.pos).cloned() {
            Some(Tok::Num(v)) => {
                self.pos += 1;
                Ok(v)
            }
            Some(Tok::Open) => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(&Tok::Close) {
                    return Err("missing `)`".into());
                }
                self.pos += 1;
                Ok(v)
            }
            _ => Err("expected a number or `(`".into()),
        }
    }
}

/// Production order matters: [`tree_to_expr`] dispatches on it.
pub fn expression_grammar() -> Grammar {
    Grammar::from_rules(
        "E",
        &[
            ("E", "E '+' E", 1.0),
            ("E", "E '-' E", 1.0),
            ("E", "E '*' E", 1.0),
            ("E", "E '/' E", 0.6),
            ("E", "'(' E ')' '**' '2'", 0.25),
            ("E", "'(' E ')'", 0.5),
            ("E", "'N'", 5.0),
        ],
    )
    .expect("expression grammar is valid")
}

fn random_literal(rng: &mut TaskRng, float_prob: f64) -> Expr {
    if rng.chance(float_prob) {
        let tenths = rng.range_i64(-150, 150);
        let v = BigRational::new(BigInt::from(tenths), BigInt::from(10));
        let text = format!("{}{}.{}", if tenths < 0 { "-" } else { "" }, tenths.abs() / 10, tenths.abs() % 10);
        Expr::Num(v, text)
    } else {
        let n = rng.range_i64(-15, 15);
        Expr::Num(BigRational::from_integer(BigInt::from(n)), n.to_string())
    }
}

fn tree_to_expr(t: &DerivationTree, rng: &mut TaskRng, float_prob: f64) -> Expr {
    let nt: Vec<&DerivationTree> = t.children.iter().filter(|c| c.production.is_some()).collect();
    let bin = |op, rng: &mut TaskRng| {
        Expr::Bin(op, Box::new(tree_to_expr(nt[0], rng, float_prob)), Box::new(tree_to_expr(nt[1], rng, float_prob)))
    };
    match t.production.expect("nonterminal node") {
        0 => bin(BinOp::Add, rng),
        1 => bin(BinOp::Sub, rng),
        2 => bin(BinOp::Mul, rng),
        3 => bin(BinOp::Div, rng),
        4 => Expr::Square(Box::new(tree_to_expr(nt[0], rng, float_prob))),
        5 => Expr::Group(Box::new(tree_to_expr(nt[0], rng, float_prob))),
        _ => random_literal(rng, float_prob),
    }
}

/// Samples an expression with depth in `[min_depth, max_depth]`, resampling
/// literals until no divisor evaluates to zero.
pub fn generate_expression(
    min_depth: usize,
    max_depth: usize,
    float_prob: f64,
    rng: &mut TaskRng,
) -> Result<Expr, Reject> {
    let g = expression_grammar();
    let bounds = DepthBounds::new(min_depth, max_depth.max(min_depth)).map_err(|e| Reject::new(e.to_string()))?;
    let tree = g.sample(bounds, rng).map_err(|e| Reject::new(e.to_string()))?;
    for _ in 0..50 {
        let e = tree_to_expr(&tree, rng, float_prob);
        if e.eval().is_ok() {
            return Ok(e);
        }
    }
    Err(Reject::new("every literal assignment divided by zero"))
}

const MAX_MAGNITUDE: i64 = 10_000_000;

pub struct Arithmetics;

impl Task for Arithmetics {
    fn name(&self) -> &'static str {
        "arithmetics"
    }

    fn schedule(&self) -> DifficultySchedule {
        DifficultySchedule::new(vec![
            ParamSpec::discrete("min_depth", 3.0, 0.6, 1.0, 12.0),
            ParamSpec::discrete("max_depth", 6.0, 1.6, 3.0, 20.0),
            ParamSpec::continuous("float_prob", 0.3, 0.05, 0.0, 0.6),
        ])
    }

    fn generate(&self, params: &Params, rng: &mut TaskRng) -> Result<Generated, Reject> {
        let min_depth = params.usize("min_depth");
        let max_depth = params.usize("max_depth").max(min_depth);
        let e = generate_expression(min_depth, max_depth, params.get("float_prob"), rng)?;
        let value = e.eval().map_err(|_| Reject::new("division by zero"))?;
        if value.abs() > BigRational::from_integer(BigInt::from(MAX_MAGNITUDE)) {
            return Err(Reject::new("value too large"));
        }
        let text = e.render();
        let prompt = format!("Evaluate {text}.\n Answer with only a number.");
        Ok(Generated::new(prompt, render_rounded(&value, 2))
            .meta("expression", text)
            .meta("exact", rational_to_string(&value))
            .meta("depth", e.depth()))
    }

    fn score(&self, instance: &TaskInstance, candidate: &str) -> ScoreResult {
        score_arithmetic(instance, candidate)
    }

    fn size_proxy(&self, instance: &TaskInstance) -> Option<f64> {
        instance.meta("depth")?.as_f64()
    }
}

pub fn score_arithmetic(instance: &TaskInstance, candidate: &str) -> ScoreResult {
    let Some(truth) = instance.meta("exact").and_then(Value::as_str).and_then(parse_rational) else {
        return ScoreResult::new(0.0).with("error", "instance lacks exact value");
    };
    let Some(c) = parse_rational(candidate.trim().trim_end_matches('.')) else {
        return ScoreResult::parse_error("not a number");
    };
    let tol = BigRational::new(BigInt::from(5), BigInt::from(1000));
    let err = (c - truth).abs();
    ScoreResult::binary(err <= tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_expr() -> Expr {
        use BinOp::*;
        let b = |op, l, r| Expr::Bin(op, Box::new(l), Box::new(r));
        let g = |e| Expr::Group(Box::new(e));
        let n = Expr::num;
        let first = b(Mul, g(b(Add, n("-12"), b(Mul, n("13"), n("10")))), n("7.6"));
        let e = b(Sub, first, b(Mul, n("8.1"), n("5.1")));
        let e = b(Add, e, n("-2.6"));
        let e = b(Add, e, n("12"));
        b(Add, e, g(b(Div, n("5.6"), n("-14"))))
    }

    #[test]
    fn reference_value() {
        let e = reference_expr();
        assert_eq!(e.render(), "(-12 + 13 * 10) * 7.6 - 8.1 * 5.1 + (-2.6) + 12 + (5.6 / -14)");
        let v = e.eval().unwrap();
        assert_eq!(render_rounded(&v, 2), "864.49");
        assert_eq!(evaluate_text(&e.render()).unwrap(), v);
    }

    #[test]
    fn zero_plus_zero() {
        let e = Expr::Bin(BinOp::Add, Box::new(Expr::num("0")), Box::new(Expr::num("0")));
        assert_eq!(render_rounded(&e.eval().unwrap(), 2), "0");
    }

    #[test]
    fn division_by_zero_detected() {
        let e = Expr::Bin(BinOp::Div, Box::new(Expr::num("1")), Box::new(Expr::num("0")));
        assert_eq!(e.eval(), Err(DivisionByZero));
        assert!(evaluate_text("1 / (2 - 2)").is_err());
    }

    #[test]
    fn right_operand_parenthesization() {
        use BinOp::*;
        let e = Expr::Bin(
            Sub,
            Box::new(Expr::num("1")),
            Box::new(Expr::Bin(Sub, Box::new(Expr::num("2")), Box::new(Expr::num("3")))),
        );
        assert_eq!(e.render(), "1 - (2 - 3)");
        assert_eq!(evaluate_text(&e.render()).unwrap(), e.eval().unwrap());
        let sq = Expr::Square(Box::new(Expr::num("-3")));
        assert_eq!(sq.render(), "(-3)**2");
        assert_eq!(evaluate_text("(-3)**2").unwrap(), BigRational::from_integer(9.into()));
    }

    fn instance_with(exact: &str) -> TaskInstance {
        TaskInstance {
            task: "arithmetics".into(),
            seed: 0,
            difficulty: 0.0,
            prompt: String::new(),
            answer: String::new(),
            metadata: [("exact".to_string(), Value::from(exact))].into_iter().collect(),
        }
    }

    #[test]
    fn scoring_tolerance() {
        let inst = instance_with("86449/100");
        assert_eq!(score_arithmetic(&inst, "864.49").reward, 1.0);
        assert_eq!(score_arithmetic(&inst, "864.493").reward, 1.0);
        assert_eq!(score_arithmetic(&inst, "864.6").reward, 0.0);
        let bad = score_arithmetic(&inst, "about 864");
        assert_eq!(bad.reward, 0.0);
        assert!(bad.details.contains_key("parse_error"));
    }
}
