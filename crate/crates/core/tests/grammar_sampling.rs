use verigen::grammar::{DepthBounds, Grammar};
use verigen::TaskRng;

fn expr_grammar() -> Grammar {
    Grammar::from_rules(
        "E",
        &[
            ("E", "E '+' T", 1.0),
            ("E", "T", 2.0),
            ("T", "T '*' F", 1.0),
            ("T", "F", 2.0),
            ("F", "'(' E ')'", 1.0),
            ("F", "'n'", 3.0),
        ],
    )
    .unwrap()
}

#[test]
fn fixed_depth_is_always_hit() {
    let g = expr_grammar();
    let mut rng = TaskRng::new(2024);
    for k in [3usize, 5, 7] {
        let bounds = DepthBounds::new(k, k).unwrap();
        for _ in 0..10_000 / 3 + 1 {
            let t = g.sample(bounds, &mut rng).unwrap();
            assert_eq!(t.depth(), k);
        }
    }
}

#[test]
fn window_bounds_hold() {
    let g = expr_grammar();
    let mut rng = TaskRng::new(7);
    let bounds = DepthBounds::new(4, 9).unwrap();
    for _ in 0..2000 {
        let d = g.sample(bounds, &mut rng).unwrap().depth();
        assert!((4..=9).contains(&d), "depth {d}");
    }
}

#[test]
fn root_choice_follows_weights() {
    // Three productions with weights 1:2:5. Under unbounded sampling every
    // production is compatible at the root, so counts should match weights.
    let g = Grammar::from_rules(
        "S",
        &[("S", "'a'", 5.0), ("S", "S 'b'", 2.0), ("S", "'c' S", 1.0)],
    )
    .unwrap();
    let mut rng = TaskRng::new(11);
    let n = 10_000;
    let mut counts = [0f64; 3];
    for _ in 0..n {
        let t = g.sample(DepthBounds::unbounded(), &mut rng).unwrap();
        counts[t.production.unwrap()] += 1.0;
    }
    let probs = [5.0 / 8.0, 2.0 / 8.0, 1.0 / 8.0];
    let chi2: f64 = counts
        .iter()
        .zip(probs)
        .map(|(o, p)| {
            let e = p * n as f64;
            (o - e).powi(2) / e
        })
        .sum();
    // Critical value of chi-square with 2 degrees of freedom at alpha = 0.01.
    assert!(chi2 < 9.210, "chi2 = {chi2}, counts {counts:?}");
}

#[test]
fn sampling_is_deterministic() {
    let g = expr_grammar();
    let bounds = DepthBounds::new(3, 8).unwrap();
    let a: Vec<_> = {
        let mut rng = TaskRng::new(5);
        (0..100).map(|_| g.sample(bounds, &mut rng).unwrap()).collect()
    };
    let b: Vec<_> = {
        let mut rng = TaskRng::new(5);
        (0..100).map(|_| g.sample(bounds, &mut rng).unwrap()).collect()
    };
    assert_eq!(a, b);
}
