mod oracles;

use proptest::prelude::*;
use proptest::strategy::ValueTree;

use oracles::prover::{ground_problem, satisfiable, CONSTS, PREDS};
use verigen::prover::{one_step_check, parse_clause, prove, saturate, Budget, Clause, Literal, Status, Term};

fn term_strategy() -> impl Strategy<Value = Term> {
    let leaf = prop_oneof![(0u32..4).prop_map(Term::Var), (0usize..3).prop_map(|i| Term::constant(CONSTS[i]))];
    leaf.prop_recursive(3, 12, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|t| Term::app("f", vec![t])),
            (inner.clone(), inner).prop_map(|(x, y)| Term::app("g", vec![x, y])),
        ]
    })
}

fn literal_strategy() -> impl Strategy<Value = Literal> {
    prop_oneof![
        (any::<bool>(), 0usize..2, term_strategy()).prop_map(|(pos, p, t)| Literal::new(pos, PREDS[p], vec![t])),
        (any::<bool>(), term_strategy(), term_strategy()).prop_map(|(pos, l, r)| Literal::eq(pos, l, r)),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn print_parse_round_trip(lits in prop::collection::vec(literal_strategy(), 1..5)) {
        let c = Clause::new(lits);
        let back = parse_clause(&c.to_string()).unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn ground_verdicts_agree_with_models(clauses in ground_problem()) {
        let r = saturate(&clauses, &Budget::default());
        let sat = satisfiable(&clauses);
        match r.status {
            Status::Proved => prop_assert!(!sat, "refuted a satisfiable set"),
            Status::Saturated => prop_assert!(sat, "saturated an unsatisfiable set"),
            Status::BudgetExhausted => {}
        }
    }

    #[test]
    fn derivation_edges_are_single_inferences(lits in prop::collection::vec(prop::collection::vec(literal_strategy(), 1..3), 2..5)) {
        let clauses: Vec<Clause> = lits.into_iter().map(Clause::new).collect();
        let budget = Budget { max_clauses: 200, max_given: 30, ..Budget::default() };
        let r = saturate(&clauses, &budget);
        for n in &r.graph.nodes {
            if let Some((a, b)) = n.parents {
                prop_assert!(one_step_check(&r.graph.nodes[a].clause, &r.graph.nodes[b].clause, &n.clause));
            }
        }
    }
}

#[test]
fn ground_problems_are_decided() {
    // Small ground sets should almost always get a verdict within the default budget.
    let mut runner = proptest::test_runner::TestRunner::deterministic();
    let mut open = 0;
    for _ in 0..300 {
        let clauses = ground_problem().new_tree(&mut runner).unwrap().current();
        if saturate(&clauses, &Budget::default()).status == Status::BudgetExhausted {
            open += 1;
        }
    }
    eprintln!("undecided: {open}/300");
    assert!(open <= 15, "{open} of 300 ground problems undecided");
}

#[test]
fn proofs_use_only_given_premises() {
    let axioms: Vec<Clause> = ["(p(X1)|~q(X1))", "(q(a))", "(r(b))"].iter().map(|s| parse_clause(s).unwrap()).collect();
    let r = prove(&axioms, &parse_clause("(p(a))").unwrap(), &Budget::default());
    assert_eq!(r.status, Status::Proved);
    let used = r.graph.input_support(r.empty_clause.unwrap());
    assert_eq!(used, vec![0, 1, 3]);
}
