use verigen::bayes::{BayesNet, Query};
use verigen::TaskRng;

/// Truncated factorization by brute force: sum the product of the
/// non-intervened CPTs over every joint assignment consistent with the query.
pub fn enumerate(net: &BayesNet, q: &Query) -> Option<Vec<f64>> {
    let n = net.len();
    let total: usize = net.cards.iter().product();
    let mut dist = vec![0.0; net.cards[q.target]];
    for mut k in 0..total {
        let mut a = vec![0; n];
        for v in (0..n).rev() {
            a[v] = k % net.cards[v];
            k /= net.cards[v];
        }
        if q.evidence.iter().chain(&q.interventions).any(|&(v, x)| a[v] != x) {
            continue;
        }
        let mut p = 1.0;
        for v in 0..n {
            if q.interventions.iter().any(|&(u, _)| u == v) {
                continue;
            }
            let row = net.parents[v].iter().fold(0, |acc, &u| acc * net.cards[u] + a[u]);
            p *= f64::from(net.cpts[v][row][a[v]]) / 100.0;
        }
        dist[a[q.target]] += p;
    }
    let z: f64 = dist.iter().sum();
    (z > 0.0).then(|| dist.iter().map(|x| x / z).collect())
}

pub fn random_query(net: &BayesNet, rng: &mut TaskRng, with_do: bool) -> Query {
    let n = net.len();
    let k = n.min(1 + rng.range_usize(0, 3));
    let picks = rng.sample_indices(n, k);
    let target = picks[0];
    let mut q = Query { target, ..Default::default() };
    for &v in &picks[1..] {
        let x = rng.below(net.cards[v]);
        if with_do && rng.chance(0.5) {
            q.interventions.push((v, x));
        } else {
            q.evidence.push((v, x));
        }
    }
    q
}
