use verigen::sequence::{SequentialInduction, LENGTH, TERM_CAP};
use verigen::{generate, score, TaskInstance};

/// Evaluator for the answer syntax with Python semantics, written apart from
/// the library: `**` binds tighter than unary minus and is right-associative,
/// `%` takes the sign of the divisor. Returns None on overflow.
struct Eval<'a> {
    s: &'a [u8],
    i: usize,
    n: i128,
    terms: &'a [i128],
}

impl Eval<'_> {
    fn skip(&mut self) {
        while self.s.get(self.i) == Some(&b' ') {
            self.i += 1;
        }
    }

    fn eat(&mut self, tok: &str) -> bool {
        self.skip();
        if self.s[self.i..].starts_with(tok.as_bytes()) {
            self.i += tok.len();
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Option<i128> {
        let mut v = self.product()?;
        loop {
            if self.eat("+") {
                v = v.checked_add(self.product()?)?;
            } else if self.eat("-") {
                v = v.checked_sub(self.product()?)?;
            } else {
                return Some(v);
            }
        }
    }

    fn product(&mut self) -> Option<i128> {
        let mut v = self.unary()?;
        loop {
            self.skip();
            if self.s[self.i..].starts_with(b"**") {
                return Some(v);
            } else if self.eat("*") {
                v = v.checked_mul(self.unary()?)?;
            } else if self.eat("%") {
                let m = self.unary()?;
                v = v.checked_rem_euclid(m).map(|r| if m < 0 && r != 0 { r + m } else { r })?;
            } else {
                return Some(v);
            }
        }
    }

    fn unary(&mut self) -> Option<i128> {
        if self.eat("-") {
            return self.unary()?.checked_neg();
        }
        let base = self.atom()?;
        if self.eat("**") {
            let e = self.unary()?;
            return base.checked_pow(u32::try_from(e).ok()?);
        }
        Some(base)
    }

    fn atom(&mut self) -> Option<i128> {
        self.skip();
        if self.eat("(") {
            let v = self.sum()?;
            assert!(self.eat(")"));
            return Some(v);
        }
        if self.eat("U[n - ") {
            let k = self.number();
            assert!(self.eat("]"));
            return Some(self.terms[(self.n - k) as usize]);
        }
        if self.eat("n") {
            return Some(self.n);
        }
        Some(self.number())
    }

    fn number(&mut self) -> i128 {
        let start = self.i;
        while self.s.get(self.i).is_some_and(u8::is_ascii_digit) {
            self.i += 1;
        }
        std::str::from_utf8(&self.s[start..self.i]).unwrap().parse().unwrap()
    }
}

fn oracle_terms(formula: &str, initial: &[i128]) -> Option<Vec<i128>> {
    let mut terms = initial.to_vec();
    for n in initial.len()..LENGTH {
        let mut e = Eval { s: formula.as_bytes(), i: 0, n: n as i128, terms: &terms };
        let v = e.sum()?;
        e.skip();
        assert_eq!(e.i, formula.len(), "trailing input in {formula}");
        terms.push(v);
    }
    Some(terms)
}

fn sequence(inst: &TaskInstance) -> Vec<i128> {
    inst.metadata["sequence"].as_array().unwrap().iter().map(|v| v.as_str().unwrap().parse().unwrap()).collect()
}

#[test]
fn generated_terms_match_an_independent_evaluator() {
    let mut compared = 0;
    for seed in 0..1000 {
        let d = (seed % 6) as f64;
        let inst = generate(&SequentialInduction, seed, d).unwrap();
        let terms = sequence(&inst);
        assert_eq!(terms.len(), LENGTH);
        assert!(terms.iter().all(|t| t.abs() <= TERM_CAP as i128), "seed {seed}");
        let degree = inst.metadata["degree"].as_u64().unwrap() as usize;
        if let Some(got) = oracle_terms(&inst.answer, &terms[..degree]) {
            assert_eq!(got, terms, "seed {seed}: {}", inst.answer);
            compared += 1;
        }
        assert_eq!(score(&SequentialInduction, &inst, &inst.answer).reward, 1.0);
    }
    assert!(compared >= 950, "only {compared} formulas evaluated without overflow");
}

#[test]
fn wrong_formulas_are_rejected() {
    for seed in 0..200 {
        let inst = generate(&SequentialInduction, seed, 2.0).unwrap();
        let shifted = format!("({})+1", inst.answer);
        assert_eq!(score(&SequentialInduction, &inst, &shifted).reward, 0.0, "{shifted}");
    }
}
