//! Random PDDL-like domains, natural-language rendering, and plan validation by simulation.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::env::{DifficultySchedule, Generated, ParamSpec, Params, Reject, ScoreResult, Task, TaskInstance};
use crate::rng::TaskRng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FluentSchema {
    pub name: String,
    pub arity: usize,
}

/// A fluent applied to action parameters (by position).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaAtom {
    pub fluent: usize,
    pub params: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemaLiteral {
    pub positive: bool,
    pub atom: SchemaAtom,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionSchema {
    pub name: String,
    pub arity: usize,
    pub preconditions: Vec<SchemaLiteral>,
    pub add: Vec<SchemaAtom>,
    pub delete: Vec<SchemaAtom>,
}

/// A ground fluent: fluent index and object indices.
pub type GroundFluent = (usize, Vec<usize>);

pub type State = BTreeSet<GroundFluent>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanningDomain {
    pub fluents: Vec<FluentSchema>,
    pub actions: Vec<ActionSchema>,
    pub objects: Vec<String>,
    pub initial: State,
    pub goal: State,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroundAction {
    pub action: usize,
    pub args: Vec<usize>,
}

/// A plan step as written, before name resolution.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PlanStep {
    pub name: String,
    pub args: Vec<String>,
}

impl fmt::Display for PlanStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}({})", self.name, self.args.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum SimFailure {
    #[error("step {step}: unknown action `{name}`")]
    UnknownAction { step: usize, name: String },
    #[error("step {step}: unknown object `{name}`")]
    UnknownObject { step: usize, name: String },
    #[error("step {step}: `{name}` takes {expected} arguments, got {got}")]
    Arity { step: usize, name: String, expected: usize, got: usize },
    #[error("step {step}: precondition {literal} does not hold")]
    Precondition { step: usize, literal: String },
}

impl SimFailure {
    pub fn step(&self) -> usize {
        match self {
            SimFailure::UnknownAction { step, .. }
            | SimFailure::UnknownObject { step, .. }
            | SimFailure::Arity { step, .. }
            | SimFailure::Precondition { step, .. } => *step,
        }
    }

    pub fn is_syntactic(&self) -> bool {
        !matches!(self, SimFailure::Precondition { .. })
    }
}

impl PlanningDomain {
    pub fn render_fluent(&self, g: &GroundFluent) -> String {
        let args: Vec<&str> = g.1.iter().map(|o| self.objects[*o].as_str()).collect();
        format!("{}({})", self.fluents[g.0].name, args.join(", "))
    }

    fn param_name(&self, action: usize, p: usize) -> String {
        format!("{}_parameter{}", self.actions[action].name, p)
    }

    fn render_schema_atom(&self, action: usize, a: &SchemaAtom) -> String {
        let args: Vec<String> = a.params.iter().map(|p| self.param_name(action, *p)).collect();
        format!("{}({})", self.fluents[a.fluent].name, args.join(", "))
    }

    fn ground(a: &SchemaAtom, args: &[usize]) -> GroundFluent {
        (a.fluent, a.params.iter().map(|p| args[*p]).collect())
    }

    pub fn applicable(&self, state: &State, ga: &GroundAction) -> Result<(), String> {
        let schema = &self.actions[ga.action];
        for lit in &schema.preconditions {
            let g = Self::ground(&lit.atom, &ga.args);
            if state.contains(&g) != lit.positive {
                let s = self.render_fluent(&g);
                return Err(if lit.positive { s } else { format!("(not {s})") });
            }
        }
        Ok(())
    }

    /// Applies delete effects, then add effects.
    pub fn apply(&self, state: &State, ga: &GroundAction) -> State {
        let schema = &self.actions[ga.action];
        let mut next = state.clone();
        for a in &schema.delete {
            next.remove(&Self::ground(a, &ga.args));
        }
        for a in &schema.add {
            next.insert(Self::ground(a, &ga.args));
        }
        next
    }

    fn resolve(&self, step: usize, s: &PlanStep) -> Result<GroundAction, SimFailure> {
        let action = self
            .actions
            .iter()
            .position(|a| a.name == s.name)
            .ok_or_else(|| SimFailure::UnknownAction { step, name: s.name.clone() })?;
        let expected = self.actions[action].arity;
        if s.args.len() != expected {
            return Err(SimFailure::Arity { step, name: s.name.clone(), expected, got: s.args.len() });
        }
        let args = s
            .args
            .iter()
            .map(|a| {
                self.objects
                    .iter()
                    .position(|o| o == a)
                    .ok_or_else(|| SimFailure::UnknownObject { step, name: a.clone() })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(GroundAction { action, args })
    }

    /// Executes `plan` from the initial state, stopping at the first failing step.
    pub fn simulate(&self, plan: &[PlanStep]) -> Result<State, SimFailure> {
        let mut state = self.initial.clone();
        for (i, s) in plan.iter().enumerate() {
            let ga = self.resolve(i, s)?;
            self.applicable(&state, &ga)
                .map_err(|literal| SimFailure::Precondition { step: i, literal })?;
            state = self.apply(&state, &ga);
        }
        Ok(state)
    }

    pub fn reaches_goal(&self, plan: &[PlanStep]) -> bool {
        self.simulate(plan).is_ok_and(|s| self.goal.is_subset(&s))
    }

    fn step_of(&self, ga: &GroundAction) -> PlanStep {
        PlanStep {
            name: self.actions[ga.action].name.clone(),
            args: ga.args.iter().map(|o| self.objects[*o].clone()).collect(),
        }
    }

    fn ground_actions(&self) -> Vec<GroundAction> {
        let mut out = Vec::new();
        for (ai, a) in self.actions.iter().enumerate() {
            let n = self.objects.len();
            let total = n.pow(a.arity as u32);
            for mut code in 0..total {
                let mut args = vec![0; a.arity];
                for slot in args.iter_mut() {
                    *slot = code % n;
                    code /= n;
                }
                out.push(GroundAction { action: ai, args });
            }
        }
        out
    }

    pub fn render_prompt(&self, reference_len: usize) -> String {
        let mut out = String::from("I am playing with a set of objects.\n\nHere are the actions I can do:\n");
        for (ai, a) in self.actions.iter().enumerate() {
            let params: Vec<String> = (0..a.arity).map(|p| self.param_name(ai, p)).collect();
            out.push_str(&format!("{} with {}\n", a.name, params.join(", ")));
        }
        out.push_str("\nI have the following restrictions on my actions:\n");
        let mut sentences = Vec::new();
        for (ai, a) in self.actions.iter().enumerate() {
            if !a.preconditions.is_empty() {
                let lits: Vec<String> = a
                    .preconditions
                    .iter()
                    .map(|l| {
                        let s = self.render_schema_atom(ai, &l.atom);
                        if l.positive { s } else { format!("(not {s})") }
                    })
                    .collect();
                sentences.push(format!(
                    "To perform {} action, the following facts need to be true: {}.",
                    a.name,
                    lits.join(", ")
                ));
            }
            if !a.add.is_empty() {
                let atoms: Vec<String> = a.add.iter().map(|x| self.render_schema_atom(ai, x)).collect();
                sentences.push(format!(
                    "Once {} action is performed the following facts will be true: {}.",
                    a.name,
                    atoms.join(", ")
                ));
            }
            if !a.delete.is_empty() {
                let atoms: Vec<String> = a.delete.iter().map(|x| self.render_schema_atom(ai, x)).collect();
                sentences.push(format!(
                    "Once {} action is performed the following facts will be false: {}.",
                    a.name,
                    atoms.join(", ")
                ));
            }
        }
        for s in sentences {
            out.push('\n');
            out.push_str(&s);
            out.push('\n');
        }
        out.push('\n');
        if !self.initial.is_empty() {
            let init: Vec<String> = self.initial.iter().map(|g| self.render_fluent(g)).collect();
            out.push_str(&format!("As initial conditions I have that, {}.\n", init.join(", ")));
        }
        out.push_str("Everything unspecified is false by default\n\n");
        let goal: Vec<String> = self.goal.iter().map(|g| self.render_fluent(g)).collect();
        out.push_str(&format!("My goal is to have that {}.\n", goal.join(", ")));
        out.push_str(&format!(
            "Hint: Reference solution has {reference_len} actions (may not be optimal). Return only the plan:\n"
        ));
        out.push_str("Multiple lines if needed, one action i.e. actionx(objectx, objectx...) per line.");
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: {msg}")]
pub struct PlanParseError {
    pub line: usize,
    pub msg: String,
}

/// Parses one action per non-empty line: `name(arg, arg)` or a bare `name`.
pub fn parse_plan(text: &str) -> Result<Vec<PlanStep>, PlanParseError> {
    let mut steps = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let err = |msg: &str| PlanParseError { line: i, msg: msg.to_string() };
        let (name, args) = match line.find('(') {
            Some(open) => {
                let close = line.rfind(')').ok_or_else(|| err("missing `)`"))?;
                if close != line.len() - 1 || close < open {
                    return Err(err("trailing text after `)`"));
                }
                let inner = line[open + 1..close].trim();
                let args: Vec<String> = if inner.is_empty() {
                    Vec::new()
                } else {
                    inner.split(',').map(|a| a.trim().to_string()).collect()
                };
                (line[..open].trim().to_string(), args)
            }
            None => (line.to_string(), Vec::new()),
        };
        let ident = |s: &str| !s.is_empty() && s.chars().all(|c| c.is_alphanumeric() || c == '_');
        if !ident(&name) || !args.iter().all(|a| ident(a)) {
            return Err(err("malformed action"));
        }
        steps.push(PlanStep { name, args });
    }
    Ok(steps)
}

#[derive(Clone, Copy, Debug)]
pub struct DomainParams {
    pub fluents: usize,
    pub max_arity: usize,
    pub actions: usize,
    pub objects: usize,
    pub walk_length: usize,
    pub precondition_prob: f64,
    pub delete_prob: f64,
    pub initial_prob: f64,
    pub max_goal: usize,
}

impl DomainParams {
    fn from_params(p: &Params) -> Self {
        DomainParams {
            fluents: p.usize("fluents").max(1),
            max_arity: p.usize("max_arity").max(1),
            actions: p.usize("actions").max(1),
            objects: p.usize("objects").max(1),
            walk_length: p.usize("plan_length"),
            precondition_prob: p.get("precondition_prob"),
            delete_prob: p.get("delete_prob"),
            initial_prob: p.get("initial_prob"),
            max_goal: p.usize("max_goal").max(1),
        }
    }
}

/// Samples a domain and a reference plan. The goal is a nonempty set of
/// fluents made true by a random walk of `walk_length` state-changing steps.
pub fn generate_domain(p: &DomainParams, rng: &mut TaskRng) -> Result<(PlanningDomain, Vec<PlanStep>), Reject> {
    let fluents: Vec<FluentSchema> = (0..p.fluents)
        .map(|i| FluentSchema { name: format!("fluent_{i}"), arity: rng.range_usize(1, p.max_arity) })
        .collect();
    let random_atom = |rng: &mut TaskRng, arity: usize| {
        let f = rng.below(fluents.len());
        SchemaAtom { fluent: f, params: (0..fluents[f].arity).map(|_| rng.below(arity)).collect() }
    };
    let mut actions = Vec::new();
    for i in 0..p.actions {
        let arity = rng.range_usize(1, p.max_arity);
        let mut add = vec![random_atom(rng, arity)];
        if rng.chance(p.delete_prob) {
            let extra = random_atom(rng, arity);
            if !add.contains(&extra) {
                add.push(extra);
            }
        }
        let mut delete = Vec::new();
        if rng.chance(p.delete_prob) {
            let d = random_atom(rng, arity);
            if !add.contains(&d) {
                delete.push(d);
            }
        }
        let mut preconditions: Vec<SchemaLiteral> = Vec::new();
        for _ in 0..2 {
            if rng.chance(p.precondition_prob) {
                let lit = SchemaLiteral { positive: rng.chance(0.5), atom: random_atom(rng, arity) };
                if !preconditions.iter().any(|l| l.atom == lit.atom) {
                    preconditions.push(lit);
                }
            }
        }
        actions.push(ActionSchema { name: format!("action_{i}"), arity, preconditions, add, delete });
    }
    let objects: Vec<String> = (0..p.objects).map(|i| format!("object_{i}")).collect();
    let mut domain = PlanningDomain { fluents, actions, objects, initial: State::new(), goal: State::new() };

    let mut initial = State::new();
    for (fi, f) in domain.fluents.iter().enumerate() {
        let n = domain.objects.len();
        for mut code in 0..n.pow(f.arity as u32) {
            let mut args = vec![0; f.arity];
            for slot in args.iter_mut() {
                *slot = code % n;
                code /= n;
            }
            if rng.chance(p.initial_prob) {
                initial.insert((fi, args));
            }
        }
    }
    domain.initial = initial.clone();

    let ground = domain.ground_actions();
    let mut state = initial.clone();
    let mut walk = Vec::new();
    for _ in 0..p.walk_length {
        let moves: Vec<(&GroundAction, State)> = ground
            .iter()
            .filter(|ga| domain.applicable(&state, ga).is_ok())
            .map(|ga| (ga, domain.apply(&state, ga)))
            .filter(|(_, next)| *next != state)
            .collect();
        if moves.is_empty() {
            return Err(Reject::new("random walk got stuck"));
        }
        let (ga, next) = &moves[rng.below(moves.len())];
        walk.push((*ga).clone());
        state = next.clone();
    }

    let pool: Vec<GroundFluent> = if p.walk_length == 0 {
        initial.iter().cloned().collect()
    } else {
        state.difference(&initial).cloned().collect()
    };
    if pool.is_empty() {
        return Err(Reject::new("walk made nothing newly true"));
    }
    let k = pool.len().min(p.max_goal);
    let goal: State = rng.sample_indices(pool.len(), k).into_iter().map(|i| pool[i].clone()).collect();
    domain.goal = goal;

    let plan: Vec<PlanStep> = walk.iter().map(|ga| domain.step_of(ga)).collect();
    if !domain.reaches_goal(&plan) {
        return Err(Reject::new("reference plan failed self-check"));
    }
    Ok((domain, plan))
}

pub struct Planning;

impl Task for Planning {
    fn name(&self) -> &'static str {
        "planning"
    }

    fn schedule(&self) -> DifficultySchedule {
        DifficultySchedule::new(vec![
            ParamSpec::discrete("fluents", 1.0, 0.6, 1.0, 6.0),
            ParamSpec::discrete("max_arity", 1.0, 0.25, 1.0, 3.0),
            ParamSpec::discrete("actions", 1.0, 0.6, 1.0, 6.0),
            ParamSpec::discrete("objects", 3.0, 0.4, 2.0, 8.0),
            ParamSpec::discrete("plan_length", 2.0, 0.8, 1.0, 12.0),
            ParamSpec::discrete("max_goal", 2.0, 0.4, 1.0, 6.0),
            ParamSpec::continuous("precondition_prob", 0.0, 0.12, 0.0, 0.6),
            ParamSpec::continuous("delete_prob", 0.0, 0.1, 0.0, 0.5),
            ParamSpec::continuous("initial_prob", 0.0, 0.04, 0.0, 0.3),
        ])
    }

    fn generate(&self, params: &Params, rng: &mut TaskRng) -> Result<Generated, Reject> {
        let dp = DomainParams::from_params(params);
        let (domain, plan) = generate_domain(&dp, rng)?;
        let plan_lines: Vec<String> = plan.iter().map(|s| s.to_string()).collect();
        let prompt = domain.render_prompt(plan.len());
        Ok(Generated::new(prompt, plan_lines.join("\n"))
            .meta("domain", serde_json::to_value(&domain).expect("domain serializes"))
            .meta("plan_length", plan.len()))
    }

    fn score(&self, instance: &TaskInstance, candidate: &str) -> ScoreResult {
        let Some(domain) = instance
            .meta("domain")
            .and_then(|v| serde_json::from_value::<PlanningDomain>(v.clone()).ok())
        else {
            return ScoreResult::new(0.0).with("error", "instance lacks a domain");
        };
        let plan = match parse_plan(candidate) {
            Ok(p) => p,
            Err(e) => return ScoreResult::parse_error(e),
        };
        match domain.simulate(&plan) {
            Err(f) => ScoreResult::new(0.0)
                .with("failure", f.to_string())
                .with("failed_step", f.step())
                .with("syntactic", f.is_syntactic()),
            Ok(state) => {
                let missing: Vec<Value> = domain
                    .goal
                    .difference(&state)
                    .map(|g| Value::from(domain.render_fluent(g)))
                    .collect();
                ScoreResult::binary(missing.is_empty()).with("unmet_goals", missing)
            }
        }
    }

    fn size_proxy(&self, instance: &TaskInstance) -> Option<f64> {
        instance.meta("plan_length")?.as_f64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The easy instance shape: one unary fluent, one action that sets it.
    pub(crate) fn reference_domain() -> PlanningDomain {
        PlanningDomain {
            fluents: vec![FluentSchema { name: "fluent_0".into(), arity: 1 }],
            actions: vec![ActionSchema {
                name: "action_0".into(),
                arity: 1,
                preconditions: vec![],
                add: vec![SchemaAtom { fluent: 0, params: vec![0] }],
                delete: vec![],
            }],
            objects: vec!["object_0".into(), "object_1".into(), "object_2".into()],
            initial: State::new(),
            goal: [(0, vec![1]), (0, vec![2])].into_iter().collect(),
        }
    }

    #[test]
    fn reference_prompt_is_reproduced() {
        let expected = "I am playing with a set of objects.

Here are the actions I can do:
action_0 with action_0_parameter0

I have the following restrictions on my actions:

Once action_0 action is performed the following facts will be true: fluent_0(action_0_parameter0).

Everything unspecified is false by default

My goal is to have that fluent_0(object_1), fluent_0(object_2).
Hint: Reference solution has 2 actions (may not be optimal). Return only the plan:
Multiple lines if needed, one action i.e. actionx(objectx, objectx...) per line.";
        assert_eq!(reference_domain().render_prompt(2), expected);
    }

    #[test]
    fn reference_plan_and_reordering_reach_goal() {
        let d = reference_domain();
        let plan = parse_plan("action_0(object_2)\naction_0(object_1)").unwrap();
        assert!(d.reaches_goal(&plan));
        let swapped = parse_plan("    action_0(object_1)\n    action_0(object_2)\n").unwrap();
        assert!(d.reaches_goal(&swapped));
        let partial = parse_plan("action_0(object_1)").unwrap();
        assert!(!d.reaches_goal(&partial));
    }

    #[test]
    fn empty_plan_when_goal_already_holds() {
        let mut d = reference_domain();
        d.initial = d.goal.clone();
        assert!(d.reaches_goal(&[]));
    }

    #[test]
    fn unsatisfied_precondition_fails_at_step_zero() {
        let mut d = reference_domain();
        d.actions[0].preconditions.push(SchemaLiteral {
            positive: true,
            atom: SchemaAtom { fluent: 0, params: vec![0] },
        });
        let plan = parse_plan("action_0(object_1)").unwrap();
        let err = d.simulate(&plan).unwrap_err();
        assert_eq!(err.step(), 0);
        assert!(!err.is_syntactic());
    }

    #[test]
    fn syntactic_failures_carry_step() {
        let d = reference_domain();
        let cases = [
            ("action_0(object_1)\naction_9(object_1)", 1),
            ("action_0(object_7)", 0),
            ("action_0(object_1)\naction_0(object_1, object_2)", 1),
        ];
        for (text, step) in cases {
            let err = d.simulate(&parse_plan(text).unwrap()).unwrap_err();
            assert!(err.is_syntactic());
            assert_eq!(err.step(), step, "{text}");
        }
    }

    #[test]
    fn delete_then_add() {
        let mut d = reference_domain();
        // Same atom deleted and added: add wins.
        d.actions[0].delete.push(SchemaAtom { fluent: 0, params: vec![0] });
        let s = d.simulate(&parse_plan("action_0(object_1)").unwrap()).unwrap();
        assert!(s.contains(&(0, vec![1])));
    }

    #[test]
    fn walk_length_zero_gives_goal_in_initial_state() {
        let p = DomainParams {
            fluents: 2,
            max_arity: 1,
            actions: 1,
            objects: 3,
            walk_length: 0,
            precondition_prob: 0.0,
            delete_prob: 0.0,
            initial_prob: 0.5,
            max_goal: 2,
        };
        let mut rng = TaskRng::new(4);
        let mut found = false;
        for _ in 0..20 {
            if let Ok((d, plan)) = generate_domain(&p, &mut rng) {
                assert!(plan.is_empty());
                assert!(d.goal.is_subset(&d.initial));
                assert!(d.reaches_goal(&[]));
                found = true;
            }
        }
        assert!(found);
    }

    #[test]
    fn garbage_parses_fail() {
        assert!(parse_plan("action_0(object_1").is_err());
        assert!(parse_plan("do the thing!").is_err());
    }
}
