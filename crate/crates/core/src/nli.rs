//! Natural-language inference over "room" scenarios, labeled by the prover.
//!
//! Every statement template carries a clausal translation over the predicates
//! `room`, `person`, one predicate per adjective and one per activity. The
//! fragment is function-free, so saturation usually terminates and `neutral`
//! can be certified by two saturations.

use std::collections::BTreeSet;

use serde_json::Value;

use crate::env::{
    jaccard, meta_str, normalize_word, parse_index_list, render_index_list, DifficultySchedule, Generated, ParamSpec,
    Params, Reject, ScoreResult, Task, TaskInstance,
};
use crate::prover::term::Subst;
use crate::prover::{saturate, Budget, Clause, Literal, ProofResult, Status, Term};
use crate::rng::TaskRng;

pub const NAMES: [&str; 7] = ["Mary", "Paul", "Fred", "Alice", "John", "Lucy", "Susan"];

pub const ADJECTIVES: [&str; 20] = [
    "funny", "quiet", "humble", "scarred", "long haired", "wise", "creative", "patient", "curious", "organized",
    "popular", "kind", "brave", "tall", "happy", "romantic", "strong", "old", "blue eyed", "formal",
];

/// (affirmative phrase, negated phrase, predicate)
pub const ACTIVITIES: [(&str, &str, &str); 12] = [
    ("owns a 3D printer", "does not own a 3D printer", "owns_a_3d_printer"),
    (
        "develops open-source software projects in their free time",
        "does not develop open-source software projects in their free time",
        "develops_open_source_software",
    ),
    ("can play the flute", "cannot play the flute", "can_play_the_flute"),
    ("travels domestically frequently", "does not travel domestically frequently", "travels_domestically"),
    ("is a cybersecurity expert", "is not a cybersecurity expert", "is_a_cybersecurity_expert"),
    ("practices archery", "does not practice archery", "practices_archery"),
    ("enjoys windsurfing", "does not enjoy windsurfing", "enjoys_windsurfing"),
    (
        "is an active member of a local robotics club",
        "is not an active member of a local robotics club",
        "is_a_robotics_club_member",
    ),
    ("collects vintage stamps", "does not collect vintage stamps", "collects_vintage_stamps"),
    ("writes poetry", "does not write poetry", "writes_poetry"),
    ("enjoys stargazing", "does not enjoy stargazing", "enjoys_stargazing"),
    ("hosts a popular podcast", "does not host a popular podcast", "hosts_a_popular_podcast"),
];

const ROOM: &str = "room";
const PERSON: &str = "person";

/// A property usable after a subject: an adjective or an activity.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Prop {
    Adj(usize),
    Act(usize),
}

impl Prop {
    pub fn pred(self) -> String {
        match self {
            Prop::Adj(i) => ADJECTIVES[i].replace(' ', "_"),
            Prop::Act(i) => ACTIVITIES[i].2.to_string(),
        }
    }

    /// Verb phrase, e.g. "is funny" or "does not own a 3D printer".
    pub fn phrase(self, positive: bool) -> String {
        match (self, positive) {
            (Prop::Adj(i), true) => format!("is {}", ADJECTIVES[i]),
            (Prop::Adj(i), false) => format!("is not {}", ADJECTIVES[i]),
            (Prop::Act(i), true) => ACTIVITIES[i].0.to_string(),
            (Prop::Act(i), false) => ACTIVITIES[i].1.to_string(),
        }
    }

    fn lit(self, positive: bool, t: Term) -> Literal {
        Literal::new(positive, &self.pred(), vec![t])
    }

    /// Recovers a property from its predicate name.
    pub fn from_pred(pred: &str) -> Option<Prop> {
        (0..ADJECTIVES.len())
            .map(Prop::Adj)
            .chain((0..ACTIVITIES.len()).map(Prop::Act))
            .find(|p| p.pred() == pred)
    }
}

fn constant(name: &str) -> Term {
    Term::constant(&name.to_lowercase())
}

fn x() -> Term {
    Term::Var(0)
}

fn lit(positive: bool, pred: &str, t: Term) -> Literal {
    Literal::new(positive, pred, vec![t])
}

fn adj_pred(a: usize) -> String {
    Prop::Adj(a).pred()
}

/// One premise line with its clausal translation.
#[derive(Clone, Debug, PartialEq)]
pub struct Statement {
    pub text: String,
    pub clauses: Vec<Clause>,
}

impl Statement {
    pub fn fact(name: &str, p: Prop, positive: bool) -> Self {
        Statement { text: format!("{name} {}", p.phrase(positive)), clauses: vec![Clause::new(vec![p.lit(positive, constant(name))])] }
    }

    pub fn in_room(name: &str) -> Self {
        Statement { text: format!("{name} is in the room"), clauses: vec![Clause::new(vec![lit(true, ROOM, constant(name))])] }
    }

    pub fn a_person(name: &str, a: usize) -> Self {
        let c = constant(name);
        Statement {
            text: format!("{name} is a {} person", ADJECTIVES[a]),
            clauses: vec![Clause::new(vec![lit(true, PERSON, c.clone())]), Clause::new(vec![lit(true, &adj_pred(a), c)])],
        }
    }

    pub fn neither(name: &str, p: Prop, q: Prop) -> Self {
        let c = constant(name);
        Statement {
            text: format!("{name} neither {} nor {}", p.phrase(true), q.phrase(true)),
            clauses: vec![Clause::new(vec![p.lit(false, c.clone())]), Clause::new(vec![q.lit(false, c)])],
        }
    }

    pub fn only_persons(names: &[&str]) -> Self {
        let text = if names.len() == 1 {
            format!("{} is the only person in the room.", names[0])
        } else {
            format!("{} are the only persons in the room.", names.join(", "))
        };
        let mut clauses = Vec::new();
        for n in names {
            clauses.push(Clause::new(vec![lit(true, ROOM, constant(n))]));
            clauses.push(Clause::new(vec![lit(true, PERSON, constant(n))]));
        }
        let mut closure = vec![lit(false, ROOM, x()), lit(false, PERSON, x())];
        closure.extend(names.iter().map(|n| Literal::eq(true, x(), constant(n))));
        clauses.push(Clause::new(closure));
        Statement { text, clauses }
    }

    pub fn everyone(p: Prop, positive: bool) -> Self {
        Statement {
            text: format!("everyone in the room {}", p.phrase(positive)),
            clauses: vec![Clause::new(vec![lit(false, ROOM, x()), p.lit(positive, x())])],
        }
    }

    pub fn everyone_if(p: Prop, q: Prop, q_positive: bool) -> Self {
        Statement {
            text: format!("everyone in the room {} if they {}", p.phrase(true), q.phrase(q_positive)),
            clauses: vec![Clause::new(vec![lit(false, ROOM, x()), q.lit(!q_positive, x()), p.lit(true, x())])],
        }
    }

    pub fn all_persons_are(a: usize, b: usize) -> Self {
        Statement {
            text: format!("all {} persons in the room are {}", ADJECTIVES[a], ADJECTIVES[b]),
            clauses: vec![Clause::new(vec![
                lit(false, ROOM, x()),
                lit(false, PERSON, x()),
                lit(false, &adj_pred(a), x()),
                lit(true, &adj_pred(b), x()),
            ])],
        }
    }

    pub fn no_person_is(a: usize, b: usize) -> Self {
        Statement {
            text: format!("no {} person in the room is {}", ADJECTIVES[a], ADJECTIVES[b]),
            clauses: vec![Clause::new(vec![
                lit(false, ROOM, x()),
                lit(false, PERSON, x()),
                lit(false, &adj_pred(a), x()),
                lit(false, &adj_pred(b), x()),
            ])],
        }
    }

    /// `witness` names the fresh constant standing for "someone".
    pub fn someone(a: usize, b: usize, witness: &str) -> Self {
        let w = Term::constant(witness);
        Statement {
            text: format!("someone in the room is a {} {} person", ADJECTIVES[a], ADJECTIVES[b]),
            clauses: vec![
                Clause::new(vec![lit(true, ROOM, w.clone())]),
                Clause::new(vec![lit(true, PERSON, w.clone())]),
                Clause::new(vec![lit(true, &adj_pred(a), w.clone())]),
                Clause::new(vec![lit(true, &adj_pred(b), w)]),
            ],
        }
    }

    pub fn if_someone(a: usize, b: usize, p: Prop) -> Self {
        Statement {
            text: format!("if someone is a {} {} person then he/she {}", ADJECTIVES[a], ADJECTIVES[b], p.phrase(true)),
            clauses: vec![Clause::new(vec![
                lit(false, PERSON, x()),
                lit(false, &adj_pred(a), x()),
                lit(false, &adj_pred(b), x()),
                p.lit(true, x()),
            ])],
        }
    }

    pub fn everyone_conj(p: Prop, a: usize, q: Prop) -> Self {
        Statement {
            text: format!("everyone in the room {}, is not a {} person and {}", p.phrase(true), ADJECTIVES[a], q.phrase(true)),
            clauses: vec![
                Clause::new(vec![lit(false, ROOM, x()), p.lit(true, x())]),
                Clause::new(vec![lit(false, ROOM, x()), lit(false, PERSON, x()), lit(false, &adj_pred(a), x())]),
                Clause::new(vec![lit(false, ROOM, x()), q.lit(true, x())]),
            ],
        }
    }
}

/// A conjunction of ground literals with its surface text.
#[derive(Clone, Debug, PartialEq)]
pub struct Hypothesis {
    pub text: String,
    pub literals: Vec<Literal>,
}

impl Hypothesis {
    pub fn fact(name: &str, p: Prop, positive: bool) -> Self {
        Hypothesis { text: format!("{name} {}", p.phrase(positive)), literals: vec![p.lit(positive, constant(name))] }
    }

    pub fn a_person(name: &str, a: usize) -> Self {
        let c = constant(name);
        Hypothesis {
            text: format!("{name} is a {} person", ADJECTIVES[a]),
            literals: vec![lit(true, PERSON, c.clone()), lit(true, &adj_pred(a), c)],
        }
    }

    /// Clauses asserting the hypothesis.
    pub fn assert_clauses(&self) -> Vec<Clause> {
        self.literals.iter().map(|l| Clause::new(vec![l.clone()])).collect()
    }

    /// The single clause asserting its negation.
    pub fn deny_clause(&self) -> Clause {
        Clause::new(self.literals.iter().map(Literal::negated).collect())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Label {
    Entailment,
    Contradiction,
    Neutral,
}

impl Label {
    pub fn as_str(self) -> &'static str {
        match self {
            Label::Entailment => "entailment",
            Label::Contradiction => "contradiction",
            Label::Neutral => "neutral",
        }
    }
}

pub fn nli_budget() -> Budget {
    Budget { max_clauses: 3000, max_given: 500, max_weight: 30, max_literals: 6, max_time: None }
}

fn premise_clauses<'a>(statements: impl IntoIterator<Item = &'a Statement>) -> Vec<Clause> {
    statements.into_iter().flat_map(|s| s.clauses.iter().cloned()).collect()
}

/// Replaces each clause with a variable equation (the "only persons" closure)
/// by its instances over the constants of the problem. The fragment is
/// function-free, so by Herbrand's theorem this preserves satisfiability.
///
/// Distinct names denote distinct people, so an equation between two names
/// is false and drops out, and `c=c` makes its instance a tautology. What
/// remains involves "someone" witnesses; for those the names' pairwise
/// disequalities are added.
pub fn ground_closures(clauses: Vec<Clause>) -> Vec<Clause> {
    let is_name = |t: &Term| matches!(t, Term::App(s, args) if args.is_empty() && NAMES.iter().any(|n| n.to_lowercase() == **s));
    let mut constants: BTreeSet<Term> = BTreeSet::new();
    for c in &clauses {
        for l in &c.literals {
            constants.extend(l.args.iter().filter(|a| a.is_ground()).cloned());
        }
    }
    let mut out = Vec::with_capacity(clauses.len());
    let mut residual_eq = false;
    for c in clauses {
        let has_var_eq = c.literals.iter().any(|l| l.is_eq() && l.args.iter().any(|a| matches!(a, Term::Var(_))));
        if !has_var_eq {
            out.push(c);
            continue;
        }
        let mut vars = c.vars();
        vars.sort();
        vars.dedup();
        let mut instances = vec![c];
        for v in vars {
            instances = instances
                .iter()
                .flat_map(|c| {
                    constants.iter().map(move |k| {
                        let mut s = Subst::default();
                        s.bind(v, k.clone());
                        Clause::new(c.literals.iter().map(|l| s.apply_literal(l)).collect())
                    })
                })
                .collect();
        }
        for inst in instances {
            if inst.literals.iter().any(|l| l.is_eq() && l.positive && l.args[0] == l.args[1]) {
                continue;
            }
            let lits: Vec<Literal> = inst
                .literals
                .into_iter()
                .filter(|l| !(l.is_eq() && l.positive && is_name(&l.args[0]) && is_name(&l.args[1])))
                .collect();
            residual_eq |= lits.iter().any(Literal::is_eq);
            out.push(Clause::new(lits));
        }
    }
    if residual_eq {
        let names: Vec<&Term> = constants.iter().filter(|t| is_name(t)).collect();
        for (i, a) in names.iter().enumerate() {
            for b in &names[i + 1..] {
                out.push(Clause::new(vec![Literal::eq(false, (*a).clone(), (*b).clone())]));
            }
        }
    }
    out
}

fn run(clauses: Vec<Clause>, budget: &Budget) -> ProofResult {
    saturate(&ground_closures(clauses), budget)
}

/// Goal clauses whose refutation certifies `label`.
fn goal_clauses(hyp: &Hypothesis, label: Label) -> Vec<Clause> {
    match label {
        Label::Entailment => vec![hyp.deny_clause()],
        _ => hyp.assert_clauses(),
    }
}

/// Whether the statements refute the hypothesis goal for `label`.
pub fn proves<'a>(statements: impl IntoIterator<Item = &'a Statement>, hyp: &Hypothesis, label: Label, budget: &Budget) -> bool {
    let mut clauses = premise_clauses(statements);
    clauses.extend(goal_clauses(hyp, label));
    run(clauses, budget).status == Status::Proved
}

/// Certified label and, for decisive labels, the refutation. `None` when the
/// premises are inconsistent or a run is inconclusive.
pub fn certify(statements: &[Statement], hyp: &Hypothesis, budget: &Budget) -> Option<(Label, Option<ProofResult>)> {
    let base = premise_clauses(statements);
    if run(base.clone(), budget).status != Status::Saturated {
        return None;
    }
    let attempt = |label: Label| {
        let mut clauses = base.clone();
        clauses.extend(goal_clauses(hyp, label));
        run(clauses, budget)
    };
    let ent = attempt(Label::Entailment);
    let con = attempt(Label::Contradiction);
    match (ent.status, con.status) {
        (Status::Proved, Status::Proved) => None,
        (Status::Proved, _) => Some((Label::Entailment, Some(ent))),
        (_, Status::Proved) => Some((Label::Contradiction, Some(con))),
        (Status::Saturated, Status::Saturated) => Some((Label::Neutral, None)),
        _ => None,
    }
}

/// Proof lines `id. clause` for leaves and `id. clause <- p1, p2` for inferences.
pub fn render_proof(result: &ProofResult) -> Vec<String> {
    let Some(ids) = result.proof() else { return Vec::new() };
    let index = |n: usize| ids.iter().position(|&m| m == n).expect("parent is an ancestor") + 1;
    ids.iter()
        .enumerate()
        .map(|(i, &n)| {
            let node = &result.graph.nodes[n];
            match node.parents {
                Some((a, b)) => format!("{}. {} <- {}, {}", i + 1, node.clause, index(a), index(b)),
                None => format!("{}. {}", i + 1, node.clause),
            }
        })
        .collect()
}

/// Picks `k` distinct items from a pool.
fn pick<T: Copy>(pool: &[T], k: usize, rng: &mut TaskRng) -> Vec<T> {
    rng.sample_indices(pool.len(), k.min(pool.len())).into_iter().map(|i| pool[i]).collect()
}

struct Scenario {
    names: Vec<&'static str>,
    adjs: Vec<usize>,
    props: Vec<Prop>,
}

impl Scenario {
    fn sample(params: &Params, rng: &mut TaskRng) -> Self {
        let names = pick(&NAMES, params.usize("names").max(1), rng);
        let n_props = params.usize("predicates").max(2);
        let n_adj = n_props.div_ceil(2);
        let adjs = pick(&(0..ADJECTIVES.len()).collect::<Vec<_>>(), n_adj, rng);
        let acts = pick(&(0..ACTIVITIES.len()).collect::<Vec<_>>(), n_props - n_adj, rng);
        let props = adjs.iter().map(|&a| Prop::Adj(a)).chain(acts.iter().map(|&a| Prop::Act(a))).collect();
        Scenario { names, adjs, props }
    }

    fn name(&self, rng: &mut TaskRng) -> &'static str {
        rng.choose(&self.names)
    }

    fn adj(&self, rng: &mut TaskRng) -> usize {
        *rng.choose(&self.adjs)
    }

    fn prop(&self, rng: &mut TaskRng) -> Prop {
        *rng.choose(&self.props)
    }

    fn two_adjs(&self, rng: &mut TaskRng) -> (usize, usize) {
        let a = self.adj(rng);
        let b = self.adj(rng);
        if a == b && self.adjs.len() > 1 {
            (a, *self.adjs.iter().find(|&&c| c != a).expect("two adjectives"))
        } else {
            (a, b)
        }
    }

    /// `closed` rules out "someone" witnesses, which would need equality
    /// reasoning against an "only persons" statement.
    fn statement(&self, rule_prob: f64, closed: bool, witnesses: &mut usize, rng: &mut TaskRng) -> Statement {
        if rng.chance(rule_prob) {
            match rng.below(7) {
                0 => Statement::everyone(self.prop(rng), rng.chance(0.75)),
                1 => Statement::everyone_if(self.prop(rng), self.prop(rng), rng.chance(0.7)),
                2 => {
                    let (a, b) = self.two_adjs(rng);
                    Statement::all_persons_are(a, b)
                }
                3 => {
                    let (a, b) = self.two_adjs(rng);
                    Statement::no_person_is(a, b)
                }
                4 if !closed => {
                    *witnesses += 1;
                    let (a, b) = self.two_adjs(rng);
                    Statement::someone(a, b, &format!("someone{witnesses}"))
                }
                4 | 5 => {
                    let (a, b) = self.two_adjs(rng);
                    let rest: Vec<Prop> = self.props.iter().copied().filter(|&p| p != Prop::Adj(a) && p != Prop::Adj(b)).collect();
                    let p = if rest.is_empty() { self.prop(rng) } else { *rng.choose(&rest) };
                    Statement::if_someone(a, b, p)
                }
                _ => Statement::everyone_conj(self.prop(rng), self.adj(rng), self.prop(rng)),
            }
        } else {
            match rng.below(5) {
                0 | 1 => Statement::fact(self.name(rng), self.prop(rng), rng.chance(0.7)),
                2 => Statement::a_person(self.name(rng), self.adj(rng)),
                3 => Statement::in_room(self.name(rng)),
                _ => {
                    let p = self.prop(rng);
                    let q = *rng.choose(&self.props.iter().copied().filter(|&q| q != p).collect::<Vec<_>>());
                    Statement::neither(self.name(rng), p, q)
                }
            }
        }
    }

    fn premises(&self, params: &Params, rng: &mut TaskRng) -> Vec<Statement> {
        let n = params.usize("statements").max(1);
        let rule_prob = params.get("rule_prob");
        let mut witnesses = 0;
        let mut out = Vec::with_capacity(n);
        let closed = rng.chance(0.4);
        if closed {
            let k = rng.range_usize(1, self.names.len().min(3));
            out.push(Statement::only_persons(&pick(&self.names, k, rng)));
        }
        while out.len() < n {
            out.push(self.statement(rule_prob, closed, &mut witnesses, rng));
        }
        rng.shuffle(&mut out);
        out
    }

    /// Prefers a ground consequence of the premises about a named person, so
    /// decisive labels are common; certification still decides the label.
    fn hypothesis(&self, statements: &[Statement], budget: &Budget, rng: &mut TaskRng) -> Hypothesis {
        let result = run(premise_clauses(statements), budget);
        let named: BTreeSet<String> = self.names.iter().map(|n| n.to_lowercase()).collect();
        let mut stated: Vec<(&'static str, Prop, bool)> = Vec::new();
        let mut derived: Vec<(&'static str, Prop, bool)> = Vec::new();
        for node in &result.graph.nodes {
            let [l] = node.clause.literals.as_slice() else { continue };
            let (Some(p), [Term::App(c, args)]) = (Prop::from_pred(&l.pred), l.args.as_slice()) else { continue };
            if !args.is_empty() || !named.contains(&**c) {
                continue;
            }
            let name = *self.names.iter().find(|n| n.to_lowercase() == **c).expect("named constant");
            let bucket = if node.parents.is_some() { &mut derived } else { &mut stated };
            if !bucket.contains(&(name, p, l.positive)) {
                bucket.push((name, p, l.positive));
            }
        }
        // Consequences that need an inference make for more interesting evidence.
        if derived.is_empty() || rng.chance(0.25) {
            derived.extend(stated);
        }
        let r = rng.below(3);
        if r < 2 && !derived.is_empty() {
            let (name, p, positive) = *rng.choose(&derived);
            // r == 0 keeps the derived polarity (entailment), r == 1 flips it.
            let positive = if r == 0 { positive } else { !positive };
            if let (Prop::Adj(a), true, true) = (p, positive, rng.chance(0.3)) {
                return Hypothesis::a_person(name, a);
            }
            return Hypothesis::fact(name, p, positive);
        }
        let name = self.name(rng);
        if rng.chance(0.2) {
            Hypothesis::a_person(name, self.adj(rng))
        } else {
            Hypothesis::fact(name, self.prop(rng), rng.chance(0.6))
        }
    }
}

fn nli_schedule() -> DifficultySchedule {
    DifficultySchedule::new(vec![
        ParamSpec::discrete("statements", 7.0, 1.2, 2.0, 24.0),
        ParamSpec::discrete("names", 3.0, 0.4, 2.0, 7.0),
        ParamSpec::discrete("predicates", 6.0, 0.8, 3.0, 16.0),
        ParamSpec::continuous("rule_prob", 0.5, 0.05, 0.0, 0.85),
    ])
}

fn fol_lines(statements: &[Statement]) -> Vec<String> {
    statements
        .iter()
        .map(|s| s.clauses.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(" & "))
        .collect()
}

pub fn nli_prompt(statements: &[Statement], hyp: &Hypothesis) -> String {
    let mut out = String::from("Premise:\nthere is a room.\n");
    for s in statements {
        out.push_str(&s.text);
        out.push('\n');
    }
    out.push_str(&format!(
        "Hypothesis:\n{}\n\nIf the Premise entails the Hypothesis, the label is 'entailment'.\n\
         If the Premise contradicts the Hypothesis, the label is 'contradiction'.\n\
         If neither, the label is 'neutral'.\nAnswer with exactly one word, neutral|contradiction|entailment",
        hyp.text
    ));
    out
}

pub fn evidence_prompt(statements: &[Statement], hyp: &Hypothesis, label: Label) -> String {
    let mut out = String::from("Premise:\n");
    for (i, s) in statements.iter().enumerate() {
        out.push_str(&format!("[{i}] {}\n", s.text));
    }
    let verb = if label == Label::Contradiction { "contradict" } else { "entail" };
    out.push_str(&format!(
        "Hypothesis:\n{}\n\nWhich statements in the premise {verb} the hypothesis?\n\
         Only answer the list of supporting statements, e.g. [0, 6, 7].",
        hyp.text
    ));
    out
}

pub struct LogicNli;

impl Task for LogicNli {
    fn name(&self) -> &'static str {
        "logic_nli"
    }

    fn schedule(&self) -> DifficultySchedule {
        nli_schedule()
    }

    fn generate(&self, params: &Params, rng: &mut TaskRng) -> Result<Generated, Reject> {
        let budget = nli_budget();
        let scenario = Scenario::sample(params, rng);
        let statements = scenario.premises(params, rng);
        let hyp = scenario.hypothesis(&statements, &budget, rng);
        let (label, proof) = certify(&statements, &hyp, &budget).ok_or_else(|| Reject::new("no decisive label"))?;
        let mut g = Generated::new(nli_prompt(&statements, &hyp), label.as_str())
            .meta("premises_fol", fol_lines(&statements))
            .meta("hypothesis_fol", hyp.literals.iter().map(|l| l.to_string()).collect::<Vec<_>>())
            .meta("statements", statements.len());
        if let Some(p) = proof {
            g = g.meta("proof", render_proof(&p));
        }
        Ok(g)
    }

    fn score(&self, instance: &TaskInstance, candidate: &str) -> ScoreResult {
        let got = normalize_word(candidate);
        if !["entailment", "contradiction", "neutral"].contains(&got.as_str()) {
            return ScoreResult::parse_error(format!("`{}` is not a label", candidate.trim()));
        }
        ScoreResult::binary(got == instance.answer)
    }

    fn size_proxy(&self, instance: &TaskInstance) -> Option<f64> {
        instance.meta("statements")?.as_f64()
    }
}

/// Greedy deletion: drops each statement in turn while the label still proves.
pub fn minimal_support(statements: &[Statement], hyp: &Hypothesis, label: Label, budget: &Budget) -> Vec<usize> {
    let mut kept: Vec<usize> = (0..statements.len()).collect();
    for i in 0..statements.len() {
        let trial: Vec<usize> = kept.iter().copied().filter(|&j| j != i).collect();
        if proves(trial.iter().map(|&j| &statements[j]), hyp, label, budget) {
            kept = trial;
        }
    }
    kept
}

pub struct EvidenceRetrieval;

impl Task for EvidenceRetrieval {
    fn name(&self) -> &'static str {
        "evidence_retrieval"
    }

    fn schedule(&self) -> DifficultySchedule {
        nli_schedule()
    }

    fn generate(&self, params: &Params, rng: &mut TaskRng) -> Result<Generated, Reject> {
        let budget = nli_budget();
        let scenario = Scenario::sample(params, rng);
        let statements = scenario.premises(params, rng);
        let hyp = scenario.hypothesis(&statements, &budget, rng);
        let (label, _) = certify(&statements, &hyp, &budget).ok_or_else(|| Reject::new("no decisive label"))?;
        if label == Label::Neutral {
            return Err(Reject::new("neutral hypothesis has no evidence"));
        }
        let support = minimal_support(&statements, &hyp, label, &budget);
        if !proves(support.iter().map(|&j| &statements[j]), &hyp, label, &budget) {
            return Err(Reject::new("support set does not prove the label"));
        }
        for &i in &support {
            if proves(support.iter().filter(|&&j| j != i).map(|&j| &statements[j]), &hyp, label, &budget) {
                return Err(Reject::new("support set is not minimal"));
            }
        }
        Ok(Generated::new(evidence_prompt(&statements, &hyp, label), render_index_list(&support))
            .meta("label", label.as_str())
            .meta("premises_fol", fol_lines(&statements))
            .meta("hypothesis_fol", hyp.literals.iter().map(|l| l.to_string()).collect::<Vec<_>>())
            .meta("statements", statements.len()))
    }

    fn score(&self, instance: &TaskInstance, candidate: &str) -> ScoreResult {
        let Some(got) = parse_index_list(candidate) else {
            return ScoreResult::parse_error("expected a list of statement indices");
        };
        let Some(want) = parse_index_list(&instance.answer) else {
            return ScoreResult::new(0.0).with("error", "instance answer is malformed");
        };
        let got: BTreeSet<i64> = got.into_iter().collect();
        let want: BTreeSet<i64> = want.into_iter().collect();
        let r = jaccard(&got, &want);
        ScoreResult::new(r).with("jaccard", Value::from(r)).with("label", meta_str(instance, "label").unwrap_or(""))
    }

    fn size_proxy(&self, instance: &TaskInstance) -> Option<f64> {
        instance.meta("statements")?.as_f64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn adj(name: &str) -> usize {
        ADJECTIVES.iter().position(|a| *a == name).unwrap()
    }

    fn act(pred: &str) -> Prop {
        Prop::Act(ACTIVITIES.iter().position(|a| a.2 == pred).unwrap())
    }

    #[test]
    fn reference_nli_instance() {
        let s = vec![
            Statement::all_persons_are(adj("scarred"), adj("humble")),
            Statement::everyone_if(act("owns_a_3d_printer"), act("develops_open_source_software"), true),
            Statement::everyone(Prop::Adj(adj("long haired")), true),
            Statement::someone(adj("quiet"), adj("patient"), "someone1"),
            Statement::no_person_is(adj("wise"), adj("creative")),
            Statement::a_person("Lucy", adj("funny")),
            Statement::neither("Susan", Prop::Adj(adj("quiet")), act("is_a_robotics_club_member")),
        ];
        assert_eq!(s[1].text, "everyone in the room owns a 3D printer if they develops open-source software projects in their free time");
        assert_eq!(s[6].text, "Susan neither is quiet nor is an active member of a local robotics club");
        let hyp = Hypothesis::fact("Lucy", Prop::Adj(adj("funny")), true);
        assert_eq!(hyp.text, "Lucy is funny");
        let (label, proof) = certify(&s, &hyp, &nli_budget()).unwrap();
        assert_eq!(label, Label::Entailment);
        assert!(!render_proof(&proof.unwrap()).is_empty());
        assert!(nli_prompt(&s, &hyp).starts_with("Premise:\nthere is a room.\nall scarred persons in the room are humble\n"));
    }

    #[test]
    fn reference_evidence_instance() {
        let flute = act("can_play_the_flute");
        let s = vec![
            Statement::only_persons(&["Mary", "Paul", "Fred"]),
            Statement::fact("Mary", flute, true),
            Statement::everyone_if(act("is_a_cybersecurity_expert"), act("travels_domestically"), false),
            Statement::if_someone(adj("funny"), adj("popular"), act("is_a_cybersecurity_expert")),
            Statement::everyone_conj(Prop::Adj(adj("organized")), adj("quiet"), flute),
            Statement::fact("John", Prop::Adj(adj("humble")), true),
            Statement::everyone_if(Prop::Adj(adj("funny")), act("enjoys_windsurfing"), true),
            Statement::a_person("Alice", adj("curious")),
        ];
        assert_eq!(s[0].text, "Mary, Paul, Fred are the only persons in the room.");
        assert_eq!(s[4].text, "everyone in the room is organized, is not a quiet person and can play the flute");
        let hyp = Hypothesis::a_person("Paul", adj("quiet"));
        let budget = nli_budget();
        let (label, _) = certify(&s, &hyp, &budget).unwrap();
        assert_eq!(label, Label::Contradiction);
        assert_eq!(minimal_support(&s, &hyp, label, &budget), vec![0, 4]);
        assert!(evidence_prompt(&s, &hyp, label).contains("Which statements in the premise contradict the hypothesis?"));
    }

    #[test]
    fn negation_contradicts_and_restatement_entails() {
        let p = Prop::Adj(adj("brave"));
        let s = vec![Statement::fact("Fred", p, true)];
        let budget = nli_budget();
        assert_eq!(certify(&s, &Hypothesis::fact("Fred", p, false), &budget).unwrap().0, Label::Contradiction);
        assert_eq!(certify(&s, &Hypothesis::fact("Fred", p, true), &budget).unwrap().0, Label::Entailment);
        assert_eq!(certify(&s, &Hypothesis::fact("Mary", p, true), &budget).unwrap().0, Label::Neutral);
        assert_eq!(minimal_support(&s, &Hypothesis::fact("Fred", p, true), Label::Entailment, &budget), vec![0]);
    }
}
