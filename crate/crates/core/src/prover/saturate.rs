//! Given-clause saturation with binary resolution and paramodulation.
//!
//! Unary inferences (factoring, equality resolution) are folded into the
//! binary step that produced their premise: each resolvent or paramodulant
//! is returned together with its unary closure, and all of them are recorded
//! with the same two parents. Every derived node therefore has exactly two
//! parents. Input clauses get the same closure, added as extra leaves.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet, VecDeque};
use std::time::{Duration, Instant};

use super::term::{unify, unify_args, Clause, Literal, Subst, Term};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Rule {
    Input,
    /// Unary closure of an input clause.
    Preprocess,
    Resolution,
    Paramodulation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub clause: Clause,
    pub parents: Option<(usize, usize)>,
    pub rule: Rule,
    pub depth: usize,
    /// Input clause index for leaves.
    pub source: Option<usize>,
}

/// Every clause kept during a run, with its provenance.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DerivationGraph {
    pub nodes: Vec<Node>,
}

impl DerivationGraph {
    pub fn is_leaf(&self, id: usize) -> bool {
        self.nodes[id].parents.is_none()
    }

    /// Ancestors of `id` including itself, in increasing id order.
    pub fn ancestors(&self, id: usize) -> Vec<usize> {
        let mut seen = vec![false; self.nodes.len()];
        let mut stack = vec![id];
        while let Some(n) = stack.pop() {
            if seen[n] {
                continue;
            }
            seen[n] = true;
            if let Some((a, b)) = self.nodes[n].parents {
                stack.push(a);
                stack.push(b);
            }
        }
        (0..self.nodes.len()).filter(|&i| seen[i]).collect()
    }

    /// Leaves among the ancestors of `id`.
    pub fn support(&self, id: usize) -> Vec<usize> {
        self.ancestors(id).into_iter().filter(|&n| self.is_leaf(n)).collect()
    }

    /// Input clause indices a node depends on.
    pub fn input_support(&self, id: usize) -> Vec<usize> {
        let mut out: Vec<usize> = self
            .support(id)
            .into_iter()
            .filter_map(|n| self.nodes[n].source)
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Proved,
    Saturated,
    BudgetExhausted,
}

#[derive(Clone, Debug)]
pub struct Budget {
    /// Cap on recorded nodes.
    pub max_clauses: usize,
    /// Cap on given-clause iterations.
    pub max_given: usize,
    /// Heavier derived clauses are dropped, which forfeits a `Saturated` verdict.
    pub max_weight: usize,
    pub max_literals: usize,
    /// Wall-clock cap. Off by default because it makes runs nondeterministic.
    pub max_time: Option<Duration>,
}

impl Default for Budget {
    fn default() -> Self {
        Budget { max_clauses: 3000, max_given: 400, max_weight: 40, max_literals: 6, max_time: None }
    }
}

impl Budget {
    pub fn scaled(&self, k: usize) -> Budget {
        Budget {
            max_clauses: self.max_clauses * k,
            max_given: self.max_given * k,
            max_weight: self.max_weight,
            max_literals: self.max_literals,
            max_time: self.max_time.map(|t| t * k as u32),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProofResult {
    pub status: Status,
    pub graph: DerivationGraph,
    pub empty_clause: Option<usize>,
}

impl ProofResult {
    /// Node ids of the refutation, in increasing order.
    pub fn proof(&self) -> Option<Vec<usize>> {
        self.empty_clause.map(|e| self.graph.ancestors(e))
    }
}

/// Ratio of weight-based to age-based picks.
const WEIGHT_PICKS: usize = 4;
const CLOSURE_LIMIT: usize = 8;

/// Runs the given-clause loop on `inputs`.
pub fn saturate(inputs: &[Clause], budget: &Budget) -> ProofResult {
    Saturation::new(budget.clone()).run(inputs)
}

struct Saturation {
    budget: Budget,
    graph: DerivationGraph,
    seen: HashSet<Clause>,
    active: Vec<usize>,
    by_weight: BinaryHeap<Reverse<(usize, usize)>>,
    by_age: VecDeque<usize>,
    taken: HashSet<usize>,
    incomplete: bool,
}

enum Outcome {
    Continue,
    Empty(usize),
    Full,
}

impl Saturation {
    fn new(budget: Budget) -> Self {
        Saturation {
            budget,
            graph: DerivationGraph::default(),
            seen: HashSet::new(),
            active: Vec::new(),
            by_weight: BinaryHeap::new(),
            by_age: VecDeque::new(),
            taken: HashSet::new(),
            incomplete: false,
        }
    }

    fn finish(self, status: Status, empty: Option<usize>) -> ProofResult {
        ProofResult { status, graph: self.graph, empty_clause: empty }
    }

    fn add(&mut self, clause: Clause, parents: Option<(usize, usize)>, rule: Rule, source: Option<usize>) -> Outcome {
        let clause = clause.normalized();
        if clause.is_tautology() {
            return Outcome::Continue;
        }
        if parents.is_some() && (clause.weight() > self.budget.max_weight || clause.len() > self.budget.max_literals) {
            self.incomplete = true;
            return Outcome::Continue;
        }
        if !self.seen.insert(clause.clone()) {
            return Outcome::Continue;
        }
        if parents.is_some() && self.active.iter().any(|&a| self.graph.nodes[a].clause.subsumes(&clause)) {
            return Outcome::Continue;
        }
        if self.graph.nodes.len() >= self.budget.max_clauses {
            return Outcome::Full;
        }
        let depth = parents.map_or(0, |(a, b)| 1 + self.graph.nodes[a].depth.max(self.graph.nodes[b].depth));
        let id = self.graph.nodes.len();
        let empty = clause.is_empty();
        let w = clause.weight();
        self.graph.nodes.push(Node { clause, parents, rule, depth, source });
        if empty {
            return Outcome::Empty(id);
        }
        self.by_weight.push(Reverse((w, id)));
        self.by_age.push_back(id);
        Outcome::Continue
    }

    fn pick(&mut self, iteration: usize) -> Option<usize> {
        let by_age = iteration % (WEIGHT_PICKS + 1) == WEIGHT_PICKS;
        loop {
            let next = if by_age {
                self.by_age.pop_front().or_else(|| self.by_weight.pop().map(|Reverse((_, id))| id))
            } else {
                self.by_weight.pop().map(|Reverse((_, id))| id).or_else(|| self.by_age.pop_front())
            }?;
            if self.taken.insert(next) {
                return Some(next);
            }
        }
    }

    fn run(mut self, inputs: &[Clause]) -> ProofResult {
        let start = Instant::now();
        for (i, c) in inputs.iter().enumerate() {
            let before = self.graph.nodes.len();
            match self.add(c.clone(), None, Rule::Input, Some(i)) {
                Outcome::Empty(e) => return self.finish(Status::Proved, Some(e)),
                Outcome::Full => return self.finish(Status::BudgetExhausted, None),
                Outcome::Continue => {}
            }
            if self.graph.nodes.len() == before {
                continue;
            }
            for extra in unary_closure(&self.graph.nodes[before].clause.clone()).into_iter().skip(1) {
                match self.add(extra, None, Rule::Preprocess, Some(i)) {
                    Outcome::Empty(e) => return self.finish(Status::Proved, Some(e)),
                    Outcome::Full => return self.finish(Status::BudgetExhausted, None),
                    Outcome::Continue => {}
                }
            }
        }
        let mut iteration = 0;
        while let Some(given) = self.pick(iteration) {
            iteration += 1;
            if iteration > self.budget.max_given || self.budget.max_time.is_some_and(|t| start.elapsed() > t) {
                return self.finish(Status::BudgetExhausted, None);
            }
            let gc = self.graph.nodes[given].clause.clone();
            if self.active.iter().any(|&a| self.graph.nodes[a].clause.subsumes(&gc)) {
                continue;
            }
            self.active.push(given);
            let partners = self.active.clone();
            for other in partners {
                let oc = self.graph.nodes[other].clause.clone();
                for (child, rule) in infer(&gc, &oc) {
                    match self.add(child, Some((given, other)), rule, None) {
                        Outcome::Empty(e) => return self.finish(Status::Proved, Some(e)),
                        Outcome::Full => return self.finish(Status::BudgetExhausted, None),
                        Outcome::Continue => {}
                    }
                }
            }
        }
        let status = if self.incomplete { Status::BudgetExhausted } else { Status::Saturated };
        self.finish(status, None)
    }
}

/// All binary inferences between `a` and `b` (in both roles), each followed by
/// its unary closure. Clauses are returned normalized.
pub fn infer(a: &Clause, b: &Clause) -> Vec<(Clause, Rule)> {
    let offset = a.max_var().map_or(0, |m| m + 1);
    let b = b.shifted(offset);
    let mut raw: Vec<(Clause, Rule)> = Vec::new();
    resolve(a, &b, &mut raw);
    paramodulate(a, &b, &mut raw);
    paramodulate(&b, a, &mut raw);
    let mut out: Vec<(Clause, Rule)> = Vec::new();
    let mut seen: HashSet<Clause> = HashSet::new();
    for (c, rule) in raw {
        for d in unary_closure(&c) {
            if seen.insert(d.clone()) {
                out.push((d, rule));
            }
        }
    }
    out
}

fn without(c: &Clause, skip: &[usize]) -> Vec<Literal> {
    c.literals.iter().enumerate().filter(|(i, _)| !skip.contains(i)).map(|(_, l)| l.clone()).collect()
}

fn resolve(a: &Clause, b: &Clause, out: &mut Vec<(Clause, Rule)>) {
    for (i, la) in a.literals.iter().enumerate() {
        for (j, lb) in b.literals.iter().enumerate() {
            if la.positive == lb.positive || la.pred != lb.pred {
                continue;
            }
            let mut options = vec![lb.clone()];
            if lb.is_eq() {
                options.push(lb.flipped());
            }
            for lb in options {
                let mut s = Subst::default();
                if !unify_args(&la.args, &lb.args, &mut s) {
                    continue;
                }
                let lits: Vec<Literal> = without(a, &[i])
                    .iter()
                    .chain(without(b, &[j]).iter())
                    .map(|l| s.apply_literal(l))
                    .collect();
                out.push((Clause::new(lits), Rule::Resolution));
            }
        }
    }
}

fn vars_of(t: &Term) -> Vec<u32> {
    let mut v = Vec::new();
    t.collect_vars(&mut v);
    v
}

/// Simple weight ordering: `s > t` when `s` is heavier and every variable of
/// `t` occurs in `s`. Ground terms of equal weight are compared structurally.
fn greater(s: &Term, t: &Term) -> bool {
    if s.weight() == t.weight() && s.is_ground() && t.is_ground() {
        return s > t;
    }
    if s.weight() <= t.weight() {
        return false;
    }
    let vs = vars_of(s);
    vars_of(t).iter().all(|v| vs.contains(v))
}

/// Rewrites with a positive equation of `from` inside a literal of `into`.
fn paramodulate(from: &Clause, into: &Clause, out: &mut Vec<(Clause, Rule)>) {
    for (i, eq) in from.literals.iter().enumerate() {
        if !eq.is_eq() || !eq.positive {
            continue;
        }
        for (l, r) in [(&eq.args[0], &eq.args[1]), (&eq.args[1], &eq.args[0])] {
            if matches!(l, Term::Var(_)) {
                continue;
            }
            for (j, target) in into.literals.iter().enumerate() {
                for (k, arg) in target.args.iter().enumerate() {
                    let mut paths = Vec::new();
                    arg.positions(&mut vec![], &mut paths);
                    for path in paths {
                        let sub = arg.at(&path);
                        let mut s = Subst::default();
                        if !unify(l, sub, &mut s) {
                            continue;
                        }
                        let (ls, rs) = (s.apply(l), s.apply(r));
                        if ls == rs || greater(&rs, &ls) {
                            continue;
                        }
                        let mut rewritten = target.clone();
                        rewritten.args[k] = arg.replace_at(&path, r);
                        let mut lits: Vec<Literal> = without(from, &[i]).iter().map(|x| s.apply_literal(x)).collect();
                        for (m, x) in into.literals.iter().enumerate() {
                            let x = if m == j { &rewritten } else { x };
                            lits.push(s.apply_literal(x));
                        }
                        out.push((Clause::new(lits), Rule::Paramodulation));
                    }
                }
            }
        }
    }
}

/// The clause followed by everything reachable through factoring and
/// equality resolution, normalized, capped at a small number of clauses.
pub fn unary_closure(c: &Clause) -> Vec<Clause> {
    let first = c.normalized();
    let mut out = vec![first.clone()];
    let mut seen: HashSet<Clause> = HashSet::from([first.clone()]);
    let mut queue = VecDeque::from([first]);
    while let Some(cur) = queue.pop_front() {
        for next in unary_steps(&cur) {
            if out.len() >= CLOSURE_LIMIT {
                return out;
            }
            let n = next.normalized();
            if seen.insert(n.clone()) {
                out.push(n.clone());
                queue.push_back(n);
            }
        }
    }
    out
}

fn unary_steps(c: &Clause) -> Vec<Clause> {
    let mut out = Vec::new();
    for (i, l) in c.literals.iter().enumerate() {
        if l.is_eq() && !l.positive {
            let mut s = Subst::default();
            if unify(&l.args[0], &l.args[1], &mut s) {
                out.push(Clause::new(without(c, &[i]).iter().map(|x| s.apply_literal(x)).collect()));
            }
        }
        for (j, m) in c.literals.iter().enumerate().skip(i + 1) {
            if l.positive != m.positive || l.pred != m.pred {
                continue;
            }
            let mut options = vec![m.clone()];
            if m.is_eq() {
                options.push(m.flipped());
            }
            for m in options {
                let mut s = Subst::default();
                if unify_args(&l.args, &m.args, &mut s) {
                    out.push(Clause::new(without(c, &[j]).iter().map(|x| s.apply_literal(x)).collect()));
                }
            }
        }
    }
    out
}

/// Whether `child` is, up to renaming, a result of one inference between the
/// parents, taken in either order. The capped unary closure makes `infer`
/// slightly order-dependent, so both orders are tried.
pub fn one_step_check(p1: &Clause, p2: &Clause, child: &Clause) -> bool {
    let target = child.normalized();
    let hit = |a, b| infer(a, b).iter().any(|(c, _)| c.is_variant(&target));
    hit(p1, p2) || hit(p2, p1)
}

/// Refutes `axioms` plus the Skolemized negation of `conjecture`.
pub fn prove(axioms: &[Clause], conjecture: &Clause, budget: &Budget) -> ProofResult {
    let mut inputs = axioms.to_vec();
    inputs.extend(negate_conjecture(conjecture));
    saturate(&inputs, budget)
}

/// Unit clauses of the negated conjecture, its variables replaced by fresh constants.
pub fn negate_conjecture(conjecture: &Clause) -> Vec<Clause> {
    let mut vars = conjecture.vars();
    vars.sort();
    vars.dedup();
    let mut s = Subst::default();
    for (k, v) in vars.iter().enumerate() {
        s.bind(*v, Term::constant(&format!("sk{}", k + 1)));
    }
    conjecture.literals.iter().map(|l| Clause::new(vec![s.apply_literal(&l.negated())])).collect()
}

#[cfg(test)]
mod tests {
    use super::super::parse::parse_clause;
    use super::*;

    fn cs(xs: &[&str]) -> Vec<Clause> {
        xs.iter().map(|x| parse_clause(x).unwrap()).collect()
    }

    #[test]
    fn two_resolution_steps() {
        let r = saturate(&cs(&["(q(a))", "(p(X1)|~q(X1))", "(~p(a))"]), &Budget::default());
        assert_eq!(r.status, Status::Proved);
        let e = r.empty_clause.unwrap();
        for id in r.graph.ancestors(e) {
            if let Some((a, b)) = r.graph.nodes[id].parents {
                assert!(one_step_check(&r.graph.nodes[a].clause, &r.graph.nodes[b].clause, &r.graph.nodes[id].clause));
            }
        }
    }

    #[test]
    fn saturates_without_goal() {
        let r = saturate(&cs(&["(p(a))"]), &Budget::default());
        assert_eq!(r.status, Status::Saturated);
        let r = prove(&cs(&["(p(a))"]), &parse_clause("(q(a))").unwrap(), &Budget::default());
        assert_eq!(r.status, Status::Saturated);
    }

    #[test]
    fn reference_analysis_step() {
        let p1 = parse_clause("(minimum(X2,X1)=X1|~less_or_equal(X1,X2))").unwrap();
        let p2 = parse_clause("(less_or_equal(X1,X1))").unwrap();
        let child = parse_clause("(minimum(X1,X1)=X1)").unwrap();
        assert!(one_step_check(&p1, &p2, &child));
        assert!(one_step_check(&p2, &p1, &child));
        let a = parse_clause("(p(a))").unwrap();
        let q = parse_clause("(q(a))").unwrap();
        assert!(!one_step_check(&a, &q, &a));
    }

    #[test]
    fn reference_equidistance_entailment() {
        let axioms = cs(&[
            "(equidistant(X1,X2,X3,X4)|~equidistant(X4,X3,X1,X2))",
            "(equidistant(X1,X2,X3,X4)|~equidistant(X5,X6,X1,X2)|~equidistant(X4,X3,X5,X6))",
        ]);
        let goal = parse_clause("(equidistant(X1,X2,X3,X4)|~equidistant(X4,X3,X5,X6)|~equidistant(X2,X1,X5,X6))").unwrap();
        assert_eq!(prove(&axioms, &goal, &Budget::default()).status, Status::Proved);
        assert_eq!(prove(&axioms, &axioms[0], &Budget::default()).status, Status::Proved);
    }

    #[test]
    fn either_parent_order_is_accepted() {
        let p1 = parse_clause("(product(X1,X2,X1)|~product(X3,X4,X1)|~product(X4,X2,X4))").unwrap();
        let p2 = parse_clause("(product(X1,X2,X3)|~product(X1,X4,X5)|~product(X4,X6,X2)|~product(X5,X6,X3))").unwrap();
        let child = parse_clause("(product(X1,X2,X2)|~product(X1,X1,X2)|~product(X1,X1,X1))").unwrap();
        assert!(one_step_check(&p1, &p2, &child));
        assert!(one_step_check(&p2, &p1, &child));
    }

    #[test]
    fn paramodulation_rewrites() {
        let r = saturate(&cs(&["(f(a)=b)", "(p(f(a)))", "(~p(b))"]), &Budget::default());
        assert_eq!(r.status, Status::Proved);
        let r = saturate(&cs(&["(a=b)", "(a!=b)"]), &Budget::default());
        assert_eq!(r.status, Status::Proved);
    }
}
