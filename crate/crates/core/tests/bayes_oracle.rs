mod oracles;

use oracles::bayes::{enumerate, random_query};
use proptest::prelude::*;
use verigen::bayes::*;
use verigen::TaskRng;

#[test]
fn elimination_matches_enumeration_on_200_nets() {
    let mut worst: f64 = 0.0;
    for seed in 0..200 {
        let mut rng = TaskRng::new(seed);
        let n = rng.range_usize(1, 6);
        let net = sample_net(n, 2, 0.5, 3, &mut rng);
        assert!(net.is_valid());
        for with_do in [false, true] {
            let q = random_query(&net, &mut rng, with_do);
            let got = posterior(&net, &q).expect("cpts have no zero entries");
            let want = enumerate(&net, &q).unwrap();
            for (g, w) in got.iter().zip(&want) {
                worst = worst.max((g - w).abs());
            }
        }
    }
    assert!(worst <= 1e-9, "max deviation {worst}");
}

#[test]
fn larger_domains_match_enumeration() {
    for seed in 0..50 {
        let mut rng = TaskRng::new(1000 + seed);
        let net = sample_net(rng.range_usize(2, 5), 4, 0.6, 2, &mut rng);
        let q = random_query(&net, &mut rng, true);
        let got = posterior(&net, &q).unwrap();
        let want = enumerate(&net, &q).unwrap();
        assert!(got.iter().zip(&want).all(|(g, w)| (g - w).abs() <= 1e-9));
    }
}

#[test]
fn intervening_downstream_leaves_the_root_alone() {
    // Chain X00 -> X01 -> X02: imposing X02 says nothing about X00.
    let net = BayesNet {
        cards: vec![2, 2, 2],
        parents: vec![vec![], vec![0], vec![1]],
        cpts: vec![vec![vec![30, 70]], vec![vec![90, 10], vec![20, 80]], vec![vec![60, 40], vec![5, 95]]],
    };
    let prior = posterior(&net, &Query { target: 0, ..Default::default() }).unwrap();
    for x in 0..2 {
        let q = Query { interventions: vec![(2, x)], target: 0, ..Default::default() };
        let p = posterior(&net, &q).unwrap();
        assert!(p.iter().zip(&prior).all(|(a, b)| (a - b).abs() < 1e-12));
        // Observing it does change the belief.
        let seen = posterior(&net, &Query { evidence: vec![(2, x)], target: 0, ..Default::default() }).unwrap();
        assert!((seen[0] - prior[0]).abs() > 1e-3);
    }
}

#[test]
fn zero_probability_evidence_is_an_error() {
    let net = BayesNet {
        cards: vec![2, 2],
        parents: vec![vec![], vec![0]],
        cpts: vec![vec![vec![100, 0]], vec![vec![50, 50], vec![50, 50]]],
    };
    let q = Query { evidence: vec![(0, 1)], target: 1, ..Default::default() };
    assert_eq!(posterior(&net, &q), Err(InferenceError::ZeroEvidence));
    let q = Query { evidence: vec![(1, 0)], target: 1, ..Default::default() };
    assert!(matches!(posterior(&net, &q), Err(InferenceError::BadQuery(_))));
}

proptest! {
    #[test]
    fn empty_intervention_set_is_association(seed in any::<u64>()) {
        let mut rng = TaskRng::new(seed);
        let net = sample_net(rng.range_usize(2, 6), 3, 0.5, 3, &mut rng);
        let q = random_query(&net, &mut rng, false);
        let surgery = posterior(&net.intervene(&[]), &q).unwrap();
        prop_assert_eq!(surgery, posterior(&net, &q).unwrap());
    }

    #[test]
    fn posteriors_are_distributions(seed in any::<u64>()) {
        let mut rng = TaskRng::new(seed);
        let net = sample_net(rng.range_usize(2, 8), 3, 0.5, 3, &mut rng);
        prop_assert!(net.is_valid());
        let q = random_query(&net, &mut rng, true);
        let p = posterior(&net, &q).unwrap();
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        prop_assert!(p.iter().all(|x| *x >= 0.0));
        // The answer as printed scores 1.0 against itself.
        prop_assert!((score_distribution(&p, &render_distribution(&p)).reward - 1.0).abs() < 1e-9);
    }
}
