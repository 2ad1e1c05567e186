use std::rc::Rc;

use proptest::prelude::*;
use verigen::regex::{CharClass, ClassItem, Perl, Regex};

/// Brzozowski-derivative matcher, independent of the automaton.
enum D {
    Nothing,
    Eps,
    Sym(Rc<dyn Fn(char) -> bool>),
    Cat(Rc<D>, Rc<D>),
    Or(Rc<D>, Rc<D>),
    Star(Rc<D>),
}

fn cat(a: Rc<D>, b: Rc<D>) -> Rc<D> {
    match (&*a, &*b) {
        (D::Nothing, _) | (_, D::Nothing) => Rc::new(D::Nothing),
        (D::Eps, _) => b,
        (_, D::Eps) => a,
        _ => Rc::new(D::Cat(a, b)),
    }
}

fn or(a: Rc<D>, b: Rc<D>) -> Rc<D> {
    match (&*a, &*b) {
        (D::Nothing, _) => b,
        (_, D::Nothing) => a,
        _ => Rc::new(D::Or(a, b)),
    }
}

fn nullable(d: &D) -> bool {
    match d {
        D::Nothing | D::Sym(_) => false,
        D::Eps | D::Star(_) => true,
        D::Cat(a, b) => nullable(a) && nullable(b),
        D::Or(a, b) => nullable(a) || nullable(b),
    }
}

fn deriv(d: &Rc<D>, c: char) -> Rc<D> {
    match &**d {
        D::Nothing | D::Eps => Rc::new(D::Nothing),
        D::Sym(p) => Rc::new(if p(c) { D::Eps } else { D::Nothing }),
        D::Cat(a, b) => {
            let left = cat(deriv(a, c), b.clone());
            if nullable(a) { or(left, deriv(b, c)) } else { left }
        }
        D::Or(a, b) => or(deriv(a, c), deriv(b, c)),
        D::Star(a) => cat(deriv(a, c), d.clone()),
    }
}

fn perl_pred(p: Perl, c: char) -> bool {
    let word = c.is_ascii_alphanumeric() || c == '_';
    let space = c.is_ascii_whitespace() || c == '\x0b';
    match p {
        Perl::Digit => c.is_ascii_digit(),
        Perl::NotDigit => !c.is_ascii_digit(),
        Perl::Word => word,
        Perl::NotWord => !word,
        Perl::Space => space,
        Perl::NotSpace => !space,
    }
}

fn lower(r: &Regex) -> Rc<D> {
    match r {
        Regex::Empty => Rc::new(D::Eps),
        Regex::Literal(x) => {
            let x = *x;
            Rc::new(D::Sym(Rc::new(move |c| c == x)))
        }
        Regex::Dot => Rc::new(D::Sym(Rc::new(|c| c != '\n'))),
        Regex::Class(cls) => {
            let cls = cls.clone();
            Rc::new(D::Sym(Rc::new(move |c| {
                let hit = cls.items.iter().any(|it| match *it {
                    ClassItem::Char(x) => x == c,
                    ClassItem::Range(a, b) => (a..=b).contains(&c),
                    ClassItem::Perl(p) => perl_pred(p, c),
                });
                hit ^ cls.negated
            })))
        }
        Regex::Concat(ps) => ps.iter().map(lower).fold(Rc::new(D::Eps), cat),
        Regex::Alt(ps) => ps.iter().map(lower).reduce(or).unwrap(),
        Regex::Group(g) => lower(g),
        Regex::Repeat { inner, min, max } => {
            let x = lower(inner);
            let mut acc = Rc::new(D::Eps);
            for _ in 0..*min {
                acc = cat(acc, x.clone());
            }
            match max {
                None => cat(acc, Rc::new(D::Star(x))),
                Some(n) => {
                    for _ in *min..*n {
                        acc = cat(acc, or(Rc::new(D::Eps), x.clone()));
                    }
                    acc
                }
            }
        }
        Regex::StartAnchor | Regex::EndAnchor => unreachable!("not generated"),
    }
}

pub fn derivative_match(r: &Regex, s: &str) -> bool {
    let mut d = lower(r);
    for c in s.chars() {
        d = deriv(&d, c);
    }
    nullable(&d)
}

pub fn universe(max_len: usize) -> Vec<String> {
    let mut all = vec![String::new()];
    let mut layer = vec![String::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|s| ['a', 'b', 'c'].map(|c| format!("{s}{c}")))
            .collect();
        all.extend(layer.iter().cloned());
    }
    all
}

fn leaf() -> impl Strategy<Value = Regex> {
    prop_oneof![
        4 => prop::sample::select(vec!['a', 'b', 'c']).prop_map(Regex::Literal),
        1 => Just(Regex::Dot),
        1 => Just(Regex::Empty),
        2 => (any::<bool>(), prop::sample::subsequence(vec!['a', 'b', 'c'], 1..=2)).prop_map(|(neg, cs)| {
            Regex::Class(CharClass {
                negated: neg,
                items: cs.into_iter().map(ClassItem::Char).collect(),
                bracketed: true,
            })
        }),
        1 => Just(Regex::Class(CharClass { negated: false, items: vec![ClassItem::Range('a', 'b')], bracketed: true })),
        1 => Just(Regex::Class(CharClass::perl(Perl::Word))),
    ]
}

pub fn regex_strategy() -> impl Strategy<Value = Regex> {
    leaf().prop_recursive(4, 16, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Regex::Concat),
            prop::collection::vec(inner.clone(), 2..=3).prop_map(Regex::Alt),
            inner.clone().prop_map(|r| Regex::Group(Box::new(r))),
            (inner, 0u32..=2, prop::option::of(0u32..=2)).prop_map(|(r, m, extra)| Regex::Repeat {
                inner: Box::new(Regex::Group(Box::new(r))),
                min: m,
                max: extra.map(|e| m + e),
            }),
        ]
    })
}
