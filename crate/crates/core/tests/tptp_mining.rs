use verigen::prover::{one_step_check, saturate, Clause};
use verigen::tptp::{corpora, mined_graph, mining_budget, pick_theorem};
use verigen::TaskRng;

#[test]
fn theorem_dags_are_made_of_single_inferences() {
    let mut rng = TaskRng::new(8);
    let mut edges = 0;
    for i in 0..100 {
        let corpus = i % corpora().len();
        let th = pick_theorem(corpus, 1 + i % 6, &mut rng).expect("corpus has theorems");
        let g = th.graph();
        assert_eq!(*th.dag.last().unwrap(), th.target);
        for &id in &th.dag {
            if let Some((a, b)) = g.nodes[id].parents {
                assert!(th.dag.contains(&a) && th.dag.contains(&b));
                assert!(one_step_check(&g.nodes[a].clause, &g.nodes[b].clause, &g.nodes[id].clause), "node {id}");
                edges += 1;
            }
        }
    }
    assert!(edges >= 100);
}

#[test]
fn mining_is_deterministic() {
    let c = &corpora()[2];
    let axioms: Vec<Clause> = c.axioms.iter().map(|a| a.clause.clone()).collect();
    let fresh = saturate(&axioms, &mining_budget()).graph;
    let cached = mined_graph(2);
    assert_eq!(fresh.nodes.len(), cached.nodes.len());
    for (x, y) in fresh.nodes.iter().zip(&cached.nodes) {
        assert_eq!(x.clause, y.clause);
        assert_eq!(x.parents, y.parents);
    }
}
