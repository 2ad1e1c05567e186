//! Reader for the clause syntax: `cnf(name,role,(lit|...|lit)).` or a bare `(lit|...)`.

use std::collections::HashMap;

use thiserror::Error;

use super::term::{Clause, Literal, Term};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {pos}: {msg}")]
pub struct SyntaxError {
    pub pos: usize,
    pub msg: String,
}

/// A clause as it appears in a problem file.
#[derive(Clone, Debug, PartialEq)]
pub struct NamedClause {
    pub name: String,
    pub role: String,
    pub clause: Clause,
}

struct Reader<'a> {
    src: &'a [u8],
    pos: usize,
    /// Variables named `X<n>` keep index `n - 1`; other names get fresh indices.
    vars: HashMap<String, u32>,
    next_free: u32,
}

impl<'a> Reader<'a> {
    fn new(src: &'a str) -> Self {
        Reader { src: src.as_bytes(), pos: 0, vars: HashMap::new(), next_free: 1000 }
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, SyntaxError> {
        Err(SyntaxError { pos: self.pos, msg: msg.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(s.as_bytes()) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> Result<(), SyntaxError> {
        if self.eat(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    fn ident(&mut self) -> Result<String, SyntaxError> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected an identifier");
        }
        Ok(String::from_utf8_lossy(&self.src[start..self.pos]).into_owned())
    }

    fn var_index(&mut self, name: &str) -> u32 {
        if let Some(&i) = self.vars.get(name) {
            return i;
        }
        let i = match name.strip_prefix('X').and_then(|d| d.parse::<u32>().ok()) {
            Some(n) if (1..1000).contains(&n) => n - 1,
            _ => {
                self.next_free += 1;
                self.next_free - 1
            }
        };
        self.vars.insert(name.to_string(), i);
        i
    }

    fn term(&mut self) -> Result<Term, SyntaxError> {
        let name = self.ident()?;
        if name.as_bytes()[0].is_ascii_uppercase() {
            return Ok(Term::Var(self.var_index(&name)));
        }
        if self.peek() == Some(b'(') {
            self.pos += 1;
            let mut args = vec![self.term()?];
            while self.eat(",") {
                args.push(self.term()?);
            }
            self.expect(")")?;
            return Ok(Term::app(&name, args));
        }
        Ok(Term::constant(&name))
    }

    fn literal(&mut self) -> Result<Literal, SyntaxError> {
        let mut positive = true;
        while self.eat("~") {
            positive = !positive;
        }
        let start = self.pos;
        let lhs = self.term()?;
        if self.eat("!=") {
            let rhs = self.term()?;
            return Ok(Literal::eq(!positive, lhs, rhs));
        }
        if self.eat("=") {
            let rhs = self.term()?;
            return Ok(Literal::eq(positive, lhs, rhs));
        }
        match lhs {
            Term::App(pred, args) => Ok(Literal { positive, pred, args }),
            Term::Var(_) => Err(SyntaxError { pos: start, msg: "a variable is not a literal".into() }),
        }
    }

    fn disjunction(&mut self) -> Result<Clause, SyntaxError> {
        if self.eat("$false") {
            return Ok(Clause::default());
        }
        let mut lits = vec![self.literal()?];
        while self.eat("|") {
            lits.push(self.literal()?);
        }
        Ok(Clause::new(lits))
    }

    /// `(a|b)`, `((a|b))`, or `a|b`.
    fn clause_body(&mut self) -> Result<Clause, SyntaxError> {
        if self.peek() == Some(b'(') {
            let save = self.pos;
            self.pos += 1;
            let inner = match self.clause_body() {
                Ok(c) if self.eat(")") => return Ok(c),
                Ok(_) => SyntaxError { pos: self.pos, msg: "expected `)`".into() },
                Err(e) => e,
            };
            self.pos = save;
            // Report whichever reading got further.
            return self.disjunction().map_err(|e| if e.pos >= inner.pos { e } else { inner });
        }
        self.disjunction()
    }

    fn done(&mut self) -> Result<(), SyntaxError> {
        self.eat(".");
        if self.peek().is_some() {
            return self.err("trailing input");
        }
        Ok(())
    }
}

/// Parses one clause in either bare or `cnf(...)` form.
pub fn parse_clause(text: &str) -> Result<Clause, SyntaxError> {
    parse_named(text).map(|n| n.clause)
}

pub fn parse_named(text: &str) -> Result<NamedClause, SyntaxError> {
    let mut r = Reader::new(text);
    r.skip_ws();
    if r.src[r.pos..].starts_with(b"cnf(") {
        r.pos += 4;
        let name = r.ident()?;
        r.expect(",")?;
        let role = r.ident()?;
        r.expect(",")?;
        let clause = r.clause_body()?;
        r.expect(")")?;
        r.done()?;
        return Ok(NamedClause { name, role, clause });
    }
    let clause = r.clause_body()?;
    r.done()?;
    Ok(NamedClause { name: String::new(), role: "axiom".into(), clause })
}

/// Parses a problem: one `cnf(...)` per line; `%` and `#` start comments.
pub fn parse_cnf(text: &str) -> Result<Vec<NamedClause>, SyntaxError> {
    let mut out = Vec::new();
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let t = line.trim();
        if !(t.is_empty() || t.starts_with('%') || t.starts_with('#')) {
            out.push(parse_named(t).map_err(|e| SyntaxError { pos: e.pos + offset, msg: e.msg })?);
        }
        offset += line.len();
    }
    Ok(out)
}

/// TPTP line for a clause.
pub fn render_cnf(name: &str, role: &str, c: &Clause) -> String {
    format!("cnf({name},{role},{c})")
}
