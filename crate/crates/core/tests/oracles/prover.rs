use proptest::prelude::*;
use verigen::prover::{Clause, Literal, Term};

pub const CONSTS: [&str; 3] = ["a", "b", "c"];
pub const PREDS: [&str; 2] = ["p", "q"];

pub fn ground_literal() -> impl Strategy<Value = Literal> {
    let c = || (0usize..3).prop_map(|i| Term::constant(CONSTS[i]));
    prop_oneof![
        (any::<bool>(), 0usize..2, c()).prop_map(|(pos, p, t)| Literal::new(pos, PREDS[p], vec![t])),
        (any::<bool>(), c(), c()).prop_map(|(pos, l, r)| Literal::eq(pos, l, r)),
    ]
}

pub fn ground_problem() -> impl Strategy<Value = Vec<Clause>> {
    prop::collection::vec(prop::collection::vec(ground_literal(), 1..4).prop_map(Clause::new), 1..7)
}

/// Brute force over all models with a domain of at most three elements:
/// constants map to elements, each predicate to a subset.
pub fn satisfiable(clauses: &[Clause]) -> bool {
    let name = |t: &Term| match t {
        Term::App(s, _) => CONSTS.iter().position(|c| **c == **s).unwrap(),
        Term::Var(_) => unreachable!(),
    };
    for assign in 0..27usize {
        let elem = [assign % 3, (assign / 3) % 3, assign / 9];
        for ext in 0..64usize {
            let holds = |l: &Literal| -> bool {
                let v = if l.is_eq() {
                    elem[name(&l.args[0])] == elem[name(&l.args[1])]
                } else {
                    let p = PREDS.iter().position(|p| **p == *l.pred).unwrap();
                    (ext >> (3 * p + elem[name(&l.args[0])])) & 1 == 1
                };
                v == l.positive
            };
            if clauses.iter().all(|c| c.literals.iter().any(holds)) {
                return true;
            }
        }
    }
    false
}
