//! Random discrete Bayesian networks, exact posteriors with optional
//! interventions, and distribution-distance scoring.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{json, Value};
use thiserror::Error;

use crate::env::{DifficultySchedule, Generated, ParamSpec, Params, Reject, ScoreResult, Task, TaskInstance};
use crate::rng::TaskRng;

/// Probabilities are stored as integer hundredths.
pub const SCALE: u32 = 100;

#[derive(Clone, Debug, PartialEq)]
pub struct BayesNet {
    pub cards: Vec<usize>,
    /// Parents of each node; every parent index is smaller than the node.
    pub parents: Vec<Vec<usize>>,
    /// `cpts[node][row][value]` in hundredths. Rows enumerate parent
    /// assignments with the first parent most significant.
    pub cpts: Vec<Vec<Vec<u32>>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InferenceError {
    #[error("the evidence has probability zero")]
    ZeroEvidence,
    #[error("inconsistent query: {0}")]
    BadQuery(String),
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Query {
    pub evidence: Vec<(usize, usize)>,
    pub interventions: Vec<(usize, usize)>,
    pub target: usize,
}

pub fn var_name(i: usize) -> String {
    format!("X{i:02}")
}

impl BayesNet {
    pub fn len(&self) -> usize {
        self.cards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cards.is_empty()
    }

    /// CPT row index for a full assignment.
    pub fn row_index(&self, node: usize, assignment: &[usize]) -> usize {
        self.parents[node].iter().fold(0, |acc, &p| acc * self.cards[p] + assignment[p])
    }

    pub fn prob(&self, node: usize, row: usize, value: usize) -> f64 {
        f64::from(self.cpts[node][row][value]) / f64::from(SCALE)
    }

    /// Whether parents precede children and every row sums to one.
    pub fn is_valid(&self) -> bool {
        (0..self.len()).all(|n| {
            let rows: usize = self.parents[n].iter().map(|&p| self.cards[p]).product();
            self.parents[n].iter().all(|&p| p < n)
                && self.cpts[n].len() == rows
                && self.cpts[n].iter().all(|r| r.len() == self.cards[n] && r.iter().sum::<u32>() == SCALE)
        })
    }

    /// Graph surgery: intervened nodes lose their parents and take their
    /// imposed value with certainty.
    pub fn intervene(&self, interventions: &[(usize, usize)]) -> BayesNet {
        let mut net = self.clone();
        for &(v, x) in interventions {
            net.parents[v].clear();
            let mut row = vec![0; net.cards[v]];
            row[x] = SCALE;
            net.cpts[v] = vec![row];
        }
        net
    }

    pub fn to_json(&self) -> Value {
        json!({"cards": self.cards, "parents": self.parents, "cpts": self.cpts})
    }
}

/// Rounds a distribution to hundredths that sum to exactly one, keeping
/// every entry at least 0.01 (largest-remainder allocation).
pub fn round_hundredths(p: &[f64]) -> Vec<u32> {
    let k = p.len() as u32;
    let free = SCALE - k;
    let total: f64 = p.iter().sum();
    let exact: Vec<f64> = p.iter().map(|x| x / total * f64::from(free)).collect();
    let mut out: Vec<u32> = exact.iter().map(|x| x.floor() as u32).collect();
    let mut left = free - out.iter().sum::<u32>();
    let mut order: Vec<usize> = (0..p.len()).collect();
    order.sort_by(|&a, &b| (exact[b] - exact[b].floor()).total_cmp(&(exact[a] - exact[a].floor())).then(a.cmp(&b)));
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        out[i] += 1;
        left -= 1;
    }
    out.iter().map(|x| x + 1).collect()
}

pub fn sample_net(n: usize, max_card: usize, edge_prob: f64, max_parents: usize, rng: &mut TaskRng) -> BayesNet {
    let cards: Vec<usize> = (0..n).map(|_| rng.range_usize(2, max_card.max(2))).collect();
    let mut parents = Vec::with_capacity(n);
    let mut cpts = Vec::with_capacity(n);
    for v in 0..n {
        let mut ps: Vec<usize> = (0..v).filter(|_| rng.chance(edge_prob)).collect();
        while ps.len() > max_parents {
            ps.remove(rng.below(ps.len()));
        }
        let rows: usize = ps.iter().map(|&p| cards[p]).product();
        let table = (0..rows)
            .map(|_| {
                let w: Vec<f64> = (0..cards[v]).map(|_| rng.exponential()).collect();
                round_hundredths(&w)
            })
            .collect();
        parents.push(ps);
        cpts.push(table);
    }
    BayesNet { cards, parents, cpts }
}

#[derive(Clone, Debug)]
struct Factor {
    vars: Vec<usize>,
    cards: Vec<usize>,
    table: Vec<f64>,
}

impl Factor {
    fn index(&self, assignment: &BTreeMap<usize, usize>) -> usize {
        self.vars.iter().zip(&self.cards).fold(0, |acc, (v, c)| acc * c + assignment[v])
    }

    fn assignments<'a>(vars: &'a [usize], cards: &'a [usize]) -> impl Iterator<Item = BTreeMap<usize, usize>> + 'a {
        let total: usize = cards.iter().product();
        (0..total).map(move |mut k| {
            let mut a = BTreeMap::new();
            for (v, c) in vars.iter().zip(cards).rev() {
                a.insert(*v, k % c);
                k /= c;
            }
            a
        })
    }

    fn product(&self, other: &Factor) -> Factor {
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        for (v, c) in other.vars.iter().zip(&other.cards) {
            if !vars.contains(v) {
                vars.push(*v);
                cards.push(*c);
            }
        }
        let table = Factor::assignments(&vars, &cards).map(|a| self.table[self.index(&a)] * other.table[other.index(&a)]).collect();
        Factor { vars, cards, table }
    }

    fn sum_out(&self, var: usize) -> Factor {
        let pos = self.vars.iter().position(|&v| v == var).expect("variable in factor");
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(pos);
        cards.remove(pos);
        let mut out = Factor { table: vec![0.0; cards.iter().product()], vars, cards };
        for a in Factor::assignments(&self.vars, &self.cards) {
            let i = out.index(&a);
            out.table[i] += self.table[self.index(&a)];
        }
        out
    }

    fn restrict(&self, var: usize, value: usize) -> Factor {
        let Some(pos) = self.vars.iter().position(|&v| v == var) else { return self.clone() };
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(pos);
        cards.remove(pos);
        let mut out = Factor { table: vec![0.0; cards.iter().product()], vars, cards };
        for a in Factor::assignments(&self.vars, &self.cards).filter(|a| a[&var] == value) {
            let i = out.index(&a);
            out.table[i] = self.table[self.index(&a)];
        }
        out
    }
}

fn check_query(net: &BayesNet, q: &Query) -> Result<(), InferenceError> {
    let bad = |m: &str| Err(InferenceError::BadQuery(m.into()));
    if q.target >= net.len() {
        return bad("target out of range");
    }
    let mut seen = vec![false; net.len()];
    for &(v, x) in q.evidence.iter().chain(&q.interventions) {
        if v >= net.len() || x >= net.cards[v] {
            return bad("assignment out of range");
        }
        if v == q.target || seen[v] {
            return bad("variable assigned twice or equal to the target");
        }
        seen[v] = true;
    }
    Ok(())
}

/// Posterior of the target after applying interventions by surgery and then
/// conditioning on evidence, by variable elimination.
pub fn posterior(net: &BayesNet, q: &Query) -> Result<Vec<f64>, InferenceError> {
    check_query(net, q)?;
    let net = net.intervene(&q.interventions);
    let mut factors: Vec<Factor> = (0..net.len())
        .map(|v| {
            let mut vars = net.parents[v].clone();
            vars.push(v);
            let cards: Vec<usize> = vars.iter().map(|&u| net.cards[u]).collect();
            let table = Factor::assignments(&vars, &cards)
                .map(|a| {
                    let row = net.parents[v].iter().fold(0, |acc, &p| acc * net.cards[p] + a[&p]);
                    net.prob(v, row, a[&v])
                })
                .collect();
            Factor { vars, cards, table }
        })
        .collect();
    for &(v, x) in &q.evidence {
        factors = factors.iter().map(|f| f.restrict(v, x)).collect();
    }
    let observed: Vec<usize> = q.evidence.iter().map(|e| e.0).collect();
    let mut hidden: Vec<usize> = (0..net.len()).filter(|v| *v != q.target && !observed.contains(v)).collect();
    while !hidden.is_empty() {
        // Greedy min-size elimination order.
        let cost = |v: usize, fs: &[Factor]| -> usize {
            let mut scope: Vec<usize> = fs.iter().filter(|f| f.vars.contains(&v)).flat_map(|f| f.vars.clone()).collect();
            scope.sort_unstable();
            scope.dedup();
            scope.iter().map(|&u| net.cards[u]).product()
        };
        let (i, _) = hidden.iter().enumerate().min_by_key(|(_, &v)| cost(v, &factors)).expect("nonempty");
        let v = hidden.remove(i);
        let (touching, rest): (Vec<Factor>, Vec<Factor>) = factors.into_iter().partition(|f| f.vars.contains(&v));
        factors = rest;
        if let Some(first) = touching.first() {
            let joint = touching[1..].iter().fold(first.clone(), |acc, f| acc.product(f));
            factors.push(joint.sum_out(v));
        }
    }
    let unit = Factor { vars: vec![], cards: vec![], table: vec![1.0] };
    let joint = factors.iter().fold(unit, |acc, f| acc.product(f));
    let dist: Vec<f64> = (0..net.cards[q.target])
        .map(|x| {
            let mut a = BTreeMap::new();
            a.insert(q.target, x);
            joint.table[joint.index(&a)]
        })
        .collect();
    let z: f64 = dist.iter().sum();
    if z <= 0.0 {
        return Err(InferenceError::ZeroEvidence);
    }
    Ok(dist.iter().map(|p| p / z).collect())
}

/// Hundredths as Python would print the float: `0.7`, `0.34`, `1.0`.
pub fn render_prob(h: u32) -> String {
    let s = format!("{}.{:02}", h / 100, h % 100);
    let s = s.trim_end_matches('0');
    if s.ends_with('.') {
        format!("{s}0")
    } else {
        s.to_string()
    }
}

pub fn describe(net: &BayesNet) -> String {
    let mut lines = Vec::new();
    for v in 0..net.len() {
        let name = var_name(v);
        let rows: usize = net.cpts[v].len();
        for row in 0..rows {
            let dist = (0..net.cards[v])
                .map(|x| format!("the probability of {name} = {x} is {}", render_prob(net.cpts[v][row][x])))
                .collect::<Vec<_>>()
                .join(" and ");
            if net.parents[v].is_empty() {
                lines.push(format!("{dist}."));
                continue;
            }
            let mut k = row;
            let mut vals = vec![0; net.parents[v].len()];
            for (i, &p) in net.parents[v].iter().enumerate().rev() {
                vals[i] = k % net.cards[p];
                k /= net.cards[p];
            }
            let cond = net.parents[v]
                .iter()
                .zip(&vals)
                .map(|(&p, x)| format!("{} = {x}", var_name(p)))
                .collect::<Vec<_>>()
                .join(" and ");
            lines.push(format!("If {cond}, then {dist}."));
        }
    }
    lines.join(" \n ")
}

pub fn scenario(q: &Query) -> String {
    let mut parts: Vec<String> = q
        .interventions
        .iter()
        .map(|&(v, x)| format!("Doing/Imposing that the state {} is equal to {x}", var_name(v)))
        .collect();
    parts.extend(q.evidence.iter().map(|&(v, x)| format!("Observing/Knowing that the state {} is equal to {x}", var_name(v))));
    parts.join(". ")
}

pub fn bayes_prompt(net: &BayesNet, q: &Query) -> String {
    let values = (0..net.cards[q.target]).map(|x| format!("'{x}'")).collect::<Vec<_>>().join(", ");
    format!(
        "### System Description\n\
         This section describes the probabilistic relationships between variables in the system:\n\
         {}\n\n\
         ### Scenario\n\
         Given the system described above, consider the following specific conditions:\n\
         {}\n\n\
         ### Your Task\n\
         Calculate the probability distribution for the variable '{}', which can take the following values: [{values}].\n\n\
         ### Required Output Format\n\
         You must return the probability distribution over all values of the target variable in the format of a Python dictionary. The output should map each value to its estimated probability.\n\
         You will be evaluated based on how close your estimated probability distribution is to the true one.\n\n\
         For example, if the target variable is X01 (which can take values 0 or 1) and you estimate that P(X01 = 0) = 0.4 and P(X01 = 1) = 0.6, your answer must be: {{0: 0.4, 1: 0.6}} (in between the proper xml tags if asked). ",
        describe(net),
        scenario(q),
        var_name(q.target),
    )
}

pub fn render_distribution(p: &[f64]) -> String {
    let mut s = String::from("{");
    for (i, x) in p.iter().enumerate() {
        if i > 0 {
            s.push_str(", ");
        }
        let _ = write!(s, "{i}: {x:?}");
    }
    s.push('}');
    s
}

/// Reads `{0: 0.4, 1: 0.6}`; keys may be quoted. Returns `None` on any
/// malformed entry.
pub fn parse_distribution(text: &str) -> Option<BTreeMap<String, f64>> {
    let t = text.trim().trim_matches('`').trim();
    let inner = t.strip_prefix('{')?.strip_suffix('}')?;
    let mut out = BTreeMap::new();
    for entry in inner.split(',').map(str::trim).filter(|e| !e.is_empty()) {
        let (k, v) = entry.split_once(':')?;
        let key = k.trim().trim_matches(|c| c == '\'' || c == '"').trim().to_string();
        let value: f64 = v.trim().parse().ok()?;
        if key.is_empty() || !value.is_finite() || out.insert(key, value).is_some() {
            return None;
        }
    }
    Some(out)
}

/// `1 - TV(candidate, truth)`. Negative entries count as zero; the candidate
/// must sum to within 0.01 of one and is then renormalized.
pub fn score_distribution(truth: &[f64], candidate: &str) -> ScoreResult {
    let Some(map) = parse_distribution(candidate) else {
        return ScoreResult::parse_error("expected a dictionary such as {0: 0.4, 1: 0.6}");
    };
    let map: BTreeMap<String, f64> = map.into_iter().map(|(k, v)| (k, v.max(0.0))).collect();
    let total: f64 = map.values().sum();
    if !(0.99..=1.01).contains(&total) {
        return ScoreResult::new(0.0).with("error", format!("probabilities sum to {total}"));
    }
    let mut tv = 0.0;
    for (i, t) in truth.iter().enumerate() {
        tv += (map.get(&i.to_string()).copied().unwrap_or(0.0) / total - t).abs();
    }
    let known: Vec<String> = (0..truth.len()).map(|i| i.to_string()).collect();
    tv += map.iter().filter(|(k, _)| !known.contains(k)).map(|(_, v)| v / total).sum::<f64>();
    // Printed floats and renormalization leave residue around 1e-16.
    let tv = if tv < 1e-9 { 0.0 } else { tv / 2.0 };
    ScoreResult::new((1.0 - tv).max(0.0)).with("tv", tv)
}

fn bayes_schedule(extra: Vec<ParamSpec>) -> DifficultySchedule {
    let mut specs = vec![
        ParamSpec::discrete("nodes", 3.0, 0.6, 2.0, 12.0),
        ParamSpec::discrete("max_card", 2.0, 0.25, 2.0, 4.0),
        ParamSpec::continuous("edge_prob", 0.45, 0.05, 0.0, 0.8),
        ParamSpec::discrete("max_parents", 2.0, 0.2, 1.0, 3.0),
    ];
    specs.extend(extra);
    DifficultySchedule::new(specs)
}

fn pick_query(net: &BayesNet, n_do: usize, n_ev: usize, rng: &mut TaskRng) -> Option<Query> {
    if n_do + n_ev + 1 > net.len() {
        return None;
    }
    let picks = rng.sample_indices(net.len(), n_do + n_ev + 1);
    let assign = |v: usize, rng: &mut TaskRng| (v, rng.below(net.cards[v]));
    let target = picks[0];
    let mut interventions: Vec<(usize, usize)> = picks[1..=n_do].iter().map(|&v| assign(v, rng)).collect();
    let mut evidence: Vec<(usize, usize)> = picks[n_do + 1..].iter().map(|&v| assign(v, rng)).collect();
    interventions.sort_unstable();
    evidence.sort_unstable();
    Some(Query { evidence, interventions, target })
}

fn bayes_instance(net: &BayesNet, q: &Query) -> Result<Generated, Reject> {
    let dist = posterior(net, q).map_err(|e| Reject::new(e.to_string()))?;
    let pairs = |xs: &[(usize, usize)]| xs.iter().map(|&(v, x)| json!([var_name(v), x])).collect::<Vec<_>>();
    Ok(Generated::new(bayes_prompt(net, q), render_distribution(&dist))
        .meta("net", net.to_json())
        .meta("target", var_name(q.target))
        .meta("evidence", pairs(&q.evidence))
        .meta("interventions", pairs(&q.interventions))
        .meta("distribution", dist)
        .meta("nodes", net.len()))
}

fn truth_of(instance: &TaskInstance) -> Option<Vec<f64>> {
    instance.meta("distribution")?.as_array()?.iter().map(Value::as_f64).collect()
}

fn score_instance(instance: &TaskInstance, candidate: &str) -> ScoreResult {
    match truth_of(instance) {
        Some(t) => score_distribution(&t, candidate),
        None => ScoreResult::new(0.0).with("error", "instance lacks distribution"),
    }
}

fn net_from_params(params: &Params, rng: &mut TaskRng) -> BayesNet {
    sample_net(
        params.usize("nodes").max(2),
        params.usize("max_card"),
        params.get("edge_prob"),
        params.usize("max_parents"),
        rng,
    )
}

pub struct BayesianAssociation;

impl Task for BayesianAssociation {
    fn name(&self) -> &'static str {
        "bayesian_association"
    }

    fn schedule(&self) -> DifficultySchedule {
        bayes_schedule(vec![ParamSpec::discrete("evidence", 1.0, 0.3, 1.0, 6.0)])
    }

    fn generate(&self, params: &Params, rng: &mut TaskRng) -> Result<Generated, Reject> {
        let net = net_from_params(params, rng);
        let n_ev = params.usize("evidence").clamp(1, net.len() - 1);
        let q = pick_query(&net, 0, n_ev, rng).ok_or_else(|| Reject::new("query does not fit"))?;
        bayes_instance(&net, &q)
    }

    fn score(&self, instance: &TaskInstance, candidate: &str) -> ScoreResult {
        score_instance(instance, candidate)
    }

    fn size_proxy(&self, instance: &TaskInstance) -> Option<f64> {
        instance.meta("nodes")?.as_f64()
    }
}

pub struct BayesianIntervention;

impl Task for BayesianIntervention {
    fn name(&self) -> &'static str {
        "bayesian_intervention"
    }

    fn schedule(&self) -> DifficultySchedule {
        bayes_schedule(vec![
            ParamSpec::discrete("interventions", 1.0, 0.2, 1.0, 4.0),
            ParamSpec::discrete("evidence", 1.0, 0.25, 0.0, 5.0),
        ])
    }

    fn generate(&self, params: &Params, rng: &mut TaskRng) -> Result<Generated, Reject> {
        let net = net_from_params(params, rng);
        let n_do = params.usize("interventions").clamp(1, net.len() - 1);
        let n_ev = params.usize("evidence").min(net.len() - 1 - n_do);
        let q = pick_query(&net, n_do, n_ev, rng).ok_or_else(|| Reject::new("query does not fit"))?;
        bayes_instance(&net, &q)
    }

    fn score(&self, instance: &TaskInstance, candidate: &str) -> ScoreResult {
        score_instance(instance, candidate)
    }

    fn size_proxy(&self, instance: &TaskInstance) -> Option<f64> {
        instance.meta("nodes")?.as_f64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_association() -> BayesNet {
        BayesNet {
            cards: vec![2, 2, 2],
            parents: vec![vec![], vec![0], vec![0]],
            cpts: vec![vec![vec![70, 30]], vec![vec![34, 66], vec![35, 65]], vec![vec![8, 92], vec![65, 35]]],
        }
    }

    fn reference_intervention() -> BayesNet {
        BayesNet {
            cards: vec![2, 2, 2],
            parents: vec![vec![], vec![0], vec![1]],
            cpts: vec![vec![vec![78, 22]], vec![vec![59, 41], vec![50, 50]], vec![vec![78, 22], vec![1, 99]]],
        }
    }

    #[test]
    fn reference_association_values() {
        let net = reference_association();
        let q = Query { evidence: vec![(2, 0)], interventions: vec![], target: 0 };
        let p = posterior(&net, &q).unwrap();
        let hand = 0.7 * 0.08 / (0.7 * 0.08 + 0.3 * 0.65);
        assert!((p[0] - hand).abs() < 1e-12);
        assert!((p[0] - 0.2231).abs() < 1e-4);
        let prompt = bayes_prompt(&net, &q);
        assert!(prompt.contains(
            "the probability of X00 = 0 is 0.7 and the probability of X00 = 1 is 0.3. \n If X00 = 0, then the probability of X01 = 0 is 0.34 and the probability of X01 = 1 is 0.66. \n"
        ));
        assert!(prompt.contains("Observing/Knowing that the state X02 is equal to 0\n\n### Your Task\nCalculate the probability distribution for the variable 'X00', which can take the following values: ['0', '1']."));
    }

    #[test]
    fn reference_intervention_values() {
        let net = reference_intervention();
        let q = Query { evidence: vec![(0, 1)], interventions: vec![(2, 0)], target: 1 };
        let p = posterior(&net, &q).unwrap();
        assert!((p[0] - 0.5).abs() < 1e-12 && (p[1] - 0.5).abs() < 1e-12);
        assert_eq!(
            scenario(&q),
            "Doing/Imposing that the state X02 is equal to 0. Observing/Knowing that the state X00 is equal to 1"
        );
    }

    #[test]
    fn probabilities_print_like_python_floats() {
        assert_eq!(render_prob(70), "0.7");
        assert_eq!(render_prob(8), "0.08");
        assert_eq!(render_prob(100), "1.0");
        assert_eq!(render_distribution(&[0.25, 0.75]), "{0: 0.25, 1: 0.75}");
    }

    #[test]
    fn tv_scoring() {
        assert_eq!(score_distribution(&[0.9, 0.1], "{0: 0.9, 1: 0.1}").reward, 1.0);
        assert!((score_distribution(&[0.9, 0.1], "{0: 0.5, 1: 0.5}").reward - 0.6).abs() < 1e-12);
        assert!((score_distribution(&[0.8, 0.2], "{0: 0.2, 1: 0.8}").reward - 0.4).abs() < 1e-12);
        assert_eq!(score_distribution(&[0.8, 0.2], "{'0': 0.8, '1': 0.2}").reward, 1.0);
        assert_eq!(score_distribution(&[0.8, 0.2], "{0: 0.5}").reward, 0.0);
        assert_eq!(score_distribution(&[0.8, 0.2], "0.8, 0.2").reward, 0.0);
        // Within tolerance the candidate is renormalized.
        assert!((score_distribution(&[0.5, 0.5], "{0: 0.503, 1: 0.503}").reward - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rounding_keeps_rows_exact() {
        assert_eq!(round_hundredths(&[1.0, 1.0, 1.0]).iter().sum::<u32>(), 100);
        assert!(round_hundredths(&[1e-9, 1.0]).iter().all(|&h| h >= 1));
    }

    #[test]
    fn single_node_prior() {
        let net = BayesNet { cards: vec![2], parents: vec![vec![]], cpts: vec![vec![vec![40, 60]]] };
        assert_eq!(describe(&net), "the probability of X00 = 0 is 0.4 and the probability of X00 = 1 is 0.6.");
        assert_eq!(posterior(&net, &Query { target: 0, ..Default::default() }).unwrap(), vec![0.4, 0.6]);
    }
}
