//! First-order terms, literals and clauses, with unification and matching.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

pub type Sym = Arc<str>;

/// Predicate symbol used for the builtin equality.
pub const EQ: &str = "=";

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Var(u32),
    App(Sym, Vec<Term>),
}

impl Term {
    pub fn constant(name: &str) -> Term {
        Term::App(name.into(), Vec::new())
    }

    pub fn app(name: &str, args: Vec<Term>) -> Term {
        Term::App(name.into(), args)
    }

    pub fn weight(&self) -> usize {
        match self {
            Term::Var(_) => 1,
            Term::App(_, args) => 1 + args.iter().map(Term::weight).sum::<usize>(),
        }
    }

    pub fn is_ground(&self) -> bool {
        match self {
            Term::Var(_) => false,
            Term::App(_, args) => args.iter().all(Term::is_ground),
        }
    }

    pub fn collect_vars(&self, out: &mut Vec<u32>) {
        match self {
            Term::Var(v) => out.push(*v),
            Term::App(_, args) => args.iter().for_each(|a| a.collect_vars(out)),
        }
    }

    fn map_vars(&self, f: &mut impl FnMut(u32) -> Term) -> Term {
        match self {
            Term::Var(v) => f(*v),
            Term::App(s, args) => Term::App(s.clone(), args.iter().map(|a| a.map_vars(f)).collect()),
        }
    }

    fn occurs(&self, v: u32, s: &Subst) -> bool {
        match self {
            Term::Var(w) => {
                if *w == v {
                    return true;
                }
                match s.get(*w) {
                    Some(t) => t.occurs(v, s),
                    None => false,
                }
            }
            Term::App(_, args) => args.iter().any(|a| a.occurs(v, s)),
        }
    }

    /// Non-variable subterm positions, as argument-index paths, root included.
    pub fn positions(&self, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if let Term::App(_, args) = self {
            out.push(prefix.clone());
            for (i, a) in args.iter().enumerate() {
                prefix.push(i);
                a.positions(prefix, out);
                prefix.pop();
            }
        }
    }

    pub fn at(&self, path: &[usize]) -> &Term {
        match (path.split_first(), self) {
            (None, _) => self,
            (Some((i, rest)), Term::App(_, args)) => args[*i].at(rest),
            _ => panic!("bad term path"),
        }
    }

    pub fn replace_at(&self, path: &[usize], new: &Term) -> Term {
        match (path.split_first(), self) {
            (None, _) => new.clone(),
            (Some((i, rest)), Term::App(s, args)) => {
                let mut args = args.clone();
                args[*i] = args[*i].replace_at(rest, new);
                Term::App(s.clone(), args)
            }
            _ => panic!("bad term path"),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "X{}", v + 1),
            Term::App(s, args) if args.is_empty() => write!(f, "{s}"),
            Term::App(s, args) => {
                write!(f, "{s}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

/// Triangular substitution.
#[derive(Clone, Debug, Default)]
pub struct Subst {
    map: HashMap<u32, Term>,
}

impl Subst {
    pub fn get(&self, v: u32) -> Option<&Term> {
        self.map.get(&v)
    }

    pub fn bind(&mut self, v: u32, t: Term) {
        self.map.insert(v, t);
    }

    pub fn apply(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => match self.map.get(v) {
                Some(b) => self.apply(b),
                None => t.clone(),
            },
            Term::App(s, args) => Term::App(s.clone(), args.iter().map(|a| self.apply(a)).collect()),
        }
    }

    fn walk<'a>(&'a self, t: &'a Term) -> &'a Term {
        let mut cur = t;
        while let Term::Var(v) = cur {
            match self.map.get(v) {
                Some(b) => cur = b,
                None => break,
            }
        }
        cur
    }

    pub fn apply_literal(&self, l: &Literal) -> Literal {
        Literal { positive: l.positive, pred: l.pred.clone(), args: l.args.iter().map(|a| self.apply(a)).collect() }
    }
}

/// Extends `s` to a most general unifier of `a` and `b`.
pub fn unify(a: &Term, b: &Term, s: &mut Subst) -> bool {
    let a = s.walk(a).clone();
    let b = s.walk(b).clone();
    match (&a, &b) {
        (Term::Var(x), Term::Var(y)) if x == y => true,
        (Term::Var(x), t) | (t, Term::Var(x)) => {
            if t.occurs(*x, s) {
                return false;
            }
            s.bind(*x, t.clone());
            true
        }
        (Term::App(f, xs), Term::App(g, ys)) => {
            f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| unify(x, y, s))
        }
    }
}

pub fn unify_args(xs: &[Term], ys: &[Term], s: &mut Subst) -> bool {
    xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| unify(x, y, s))
}

/// One-way matching: binds only variables of `pattern`; `target` is never instantiated.
pub fn match_term(pattern: &Term, target: &Term, s: &mut HashMap<u32, Term>) -> bool {
    match pattern {
        Term::Var(v) => match s.get(v) {
            Some(b) => b == target,
            None => {
                s.insert(*v, target.clone());
                true
            }
        },
        Term::App(f, xs) => match target {
            Term::App(g, ys) => f == g && xs.len() == ys.len() && xs.iter().zip(ys).all(|(x, y)| match_term(x, y, s)),
            Term::Var(_) => false,
        },
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Literal {
    pub positive: bool,
    pub pred: Sym,
    pub args: Vec<Term>,
}

impl Literal {
    pub fn new(positive: bool, pred: &str, args: Vec<Term>) -> Self {
        Literal { positive, pred: pred.into(), args }
    }

    pub fn eq(positive: bool, l: Term, r: Term) -> Self {
        Literal { positive, pred: EQ.into(), args: vec![l, r] }
    }

    pub fn is_eq(&self) -> bool {
        &*self.pred == EQ
    }

    pub fn negated(&self) -> Literal {
        Literal { positive: !self.positive, ..self.clone() }
    }

    pub fn weight(&self) -> usize {
        // Equality is not counted as a symbol of its own.
        let base = if self.is_eq() { 0 } else { 1 };
        base + self.args.iter().map(Term::weight).sum::<usize>()
    }

    /// The literal with equality sides swapped; other literals are returned unchanged.
    pub fn flipped(&self) -> Literal {
        if self.is_eq() {
            Literal { positive: self.positive, pred: self.pred.clone(), args: vec![self.args[1].clone(), self.args[0].clone()] }
        } else {
            self.clone()
        }
    }

    fn map_vars(&self, f: &mut impl FnMut(u32) -> Term) -> Literal {
        Literal { positive: self.positive, pred: self.pred.clone(), args: self.args.iter().map(|a| a.map_vars(f)).collect() }
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_eq() {
            let op = if self.positive { "=" } else { "!=" };
            return write!(f, "{}{op}{}", self.args[0], self.args[1]);
        }
        if !self.positive {
            f.write_str("~")?;
        }
        Term::App(self.pred.clone(), self.args.clone()).fmt(f)
    }
}

/// Matches `pattern` into `target`, trying both orientations of equality.
fn match_literal_options(pattern: &Literal, target: &Literal, s: &HashMap<u32, Term>) -> Vec<HashMap<u32, Term>> {
    if pattern.positive != target.positive || pattern.pred != target.pred || pattern.args.len() != target.args.len() {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut try_with = |p: &Literal| {
        let mut s2 = s.clone();
        if p.args.iter().zip(&target.args).all(|(x, y)| match_term(x, y, &mut s2)) {
            out.push(s2);
        }
    };
    try_with(pattern);
    if pattern.is_eq() {
        try_with(&pattern.flipped());
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Clause {
    pub literals: Vec<Literal>,
}

impl Clause {
    pub fn new(literals: Vec<Literal>) -> Self {
        Clause { literals }
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn weight(&self) -> usize {
        self.literals.iter().map(Literal::weight).sum()
    }

    pub fn vars(&self) -> Vec<u32> {
        let mut out = Vec::new();
        for l in &self.literals {
            for a in &l.args {
                a.collect_vars(&mut out);
            }
        }
        out
    }

    pub fn max_var(&self) -> Option<u32> {
        self.vars().into_iter().max()
    }

    pub fn is_ground(&self) -> bool {
        self.literals.iter().all(|l| l.args.iter().all(Term::is_ground))
    }

    pub fn shifted(&self, offset: u32) -> Clause {
        Clause { literals: self.literals.iter().map(|l| l.map_vars(&mut |v| Term::Var(v + offset))).collect() }
    }

    /// Renames variables to `X1, X2, ...` in order of first occurrence and
    /// drops repeated literals. Literal order is kept.
    pub fn normalized(&self) -> Clause {
        let mut map: HashMap<u32, u32> = HashMap::new();
        let mut lits: Vec<Literal> = Vec::new();
        for l in &self.literals {
            if lits.contains(l) {
                continue;
            }
            lits.push(l.clone());
        }
        let lits = lits
            .iter()
            .map(|l| {
                l.map_vars(&mut |v| {
                    let n = map.len() as u32;
                    Term::Var(*map.entry(v).or_insert(n))
                })
            })
            .collect::<Vec<_>>();
        // Renaming can make two literals equal; drop those as well.
        let mut out: Vec<Literal> = Vec::new();
        for l in lits {
            if !out.contains(&l) {
                out.push(l);
            }
        }
        Clause { literals: out }
    }

    /// Contains complementary literals or a positive `t = t`.
    pub fn is_tautology(&self) -> bool {
        self.literals.iter().any(|l| l.is_eq() && l.positive && l.args[0] == l.args[1])
            || self.literals.iter().any(|l| {
                self.literals
                    .iter()
                    .any(|m| m.positive != l.positive && m.pred == l.pred && (m.args == l.args || (l.is_eq() && m.flipped().args == l.args)))
            })
    }

    /// Whether some instance of `self` is a sub-multiset of `other`.
    pub fn subsumes(&self, other: &Clause) -> bool {
        if self.literals.len() > other.literals.len() {
            return false;
        }
        let mut used = vec![false; other.literals.len()];
        subsume_from(&self.literals, &other.literals, 0, &HashMap::new(), &mut used)
    }

    /// Equal up to variable renaming, literal order and equality orientation.
    pub fn is_variant(&self, other: &Clause) -> bool {
        self.literals.len() == other.literals.len() && self.subsumes(other) && other.subsumes(self)
    }
}

fn subsume_from(pat: &[Literal], target: &[Literal], i: usize, s: &HashMap<u32, Term>, used: &mut [bool]) -> bool {
    if i == pat.len() {
        return true;
    }
    for j in 0..target.len() {
        if used[j] {
            continue;
        }
        for s2 in match_literal_options(&pat[i], &target[j], s) {
            used[j] = true;
            let ok = subsume_from(pat, target, i + 1, &s2, used);
            used[j] = false;
            if ok {
                return true;
            }
        }
    }
    false
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.literals.is_empty() {
            return f.write_str("$false");
        }
        f.write_str("(")?;
        for (i, l) in self.literals.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            write!(f, "{l}")?;
        }
        f.write_str(")")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(i: u32) -> Term {
        Term::Var(i)
    }

    #[test]
    fn unification_with_occurs_check() {
        let mut s = Subst::default();
        let a = Term::app("f", vec![v(0), Term::constant("b")]);
        let b = Term::app("f", vec![Term::constant("a"), v(1)]);
        assert!(unify(&a, &b, &mut s));
        assert_eq!(s.apply(&a), s.apply(&b));
        let mut s = Subst::default();
        assert!(!unify(&v(0), &Term::app("f", vec![v(0)]), &mut s));
    }

    #[test]
    fn subsumption_and_variants() {
        let p = |t: Term| Literal::new(true, "p", vec![t]);
        let c1 = Clause::new(vec![p(v(0))]);
        let c2 = Clause::new(vec![p(Term::constant("a")), Literal::new(false, "q", vec![v(3)])]);
        assert!(c1.subsumes(&c2));
        assert!(!c2.subsumes(&c1));
        let e1 = Clause::new(vec![Literal::eq(true, v(0), Term::constant("a"))]);
        let e2 = Clause::new(vec![Literal::eq(true, Term::constant("a"), v(5))]);
        assert!(e1.is_variant(&e2));
    }

    #[test]
    fn normalization_renames_by_first_occurrence() {
        let c = Clause::new(vec![Literal::new(true, "p", vec![v(7), v(3), v(7)])]);
        assert_eq!(c.normalized().to_string(), "(p(X1,X2,X1))");
    }
}
