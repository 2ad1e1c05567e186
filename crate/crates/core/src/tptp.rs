//! Theorem mining over bundled CNF corpora and the three tasks built on it:
//! conjecture entailment, premise selection, and proof reconstruction.

use std::collections::BTreeSet;
use std::sync::OnceLock;

use serde_json::{json, Value};

use crate::env::{
    jaccard, meta_str, meta_strings, normalize_word, parse_index_list, render_index_list, DifficultySchedule,
    Generated, ParamSpec, Params, Reject, ScoreResult, Task, TaskInstance,
};
use crate::prover::{
    one_step_check, parse_clause, parse_cnf, prove, render_cnf, saturate, Budget, Clause, DerivationGraph, NamedClause,
    Status, SyntaxError,
};
use crate::rng::TaskRng;

const SOURCES: [(&str, &str); 5] = [
    ("geometry.p", include_str!("../corpora/geometry.p")),
    ("ring_theory.p", include_str!("../corpora/ring_theory.p")),
    ("analysis.p", include_str!("../corpora/analysis.p")),
    ("group_theory.p", include_str!("../corpora/group_theory.p")),
    ("set_theory.p", include_str!("../corpora/set_theory.p")),
];

#[derive(Clone, Debug)]
pub struct Corpus {
    pub domain: String,
    pub axioms: Vec<NamedClause>,
}

/// Parses a corpus file; the domain comes from a `# domain: <name>` header line.
pub fn parse_corpus(text: &str) -> Result<Corpus, SyntaxError> {
    let domain = text
        .lines()
        .find_map(|l| l.trim().strip_prefix("# domain:").map(|d| d.trim().to_string()))
        .ok_or(SyntaxError { pos: 0, msg: "missing `# domain:` header".into() })?;
    Ok(Corpus { domain, axioms: parse_cnf(text)? })
}

pub fn corpora() -> &'static [Corpus] {
    static CORPORA: OnceLock<Vec<Corpus>> = OnceLock::new();
    CORPORA.get_or_init(|| {
        SOURCES
            .iter()
            .map(|(file, text)| parse_corpus(text).unwrap_or_else(|e| panic!("bundled corpus {file}: {e}")))
            .collect()
    })
}

pub fn mining_budget() -> Budget {
    Budget { max_clauses: 1500, max_given: 120, max_weight: 24, max_literals: 4, max_time: None }
}

/// Budget behind every provability label. Negative labels are checked with
/// twice this budget.
pub fn label_budget() -> Budget {
    Budget { max_clauses: 600, max_given: 60, max_weight: 26, max_literals: 4, max_time: None }
}

/// The saturation graph of a whole corpus, computed once.
pub fn mined_graph(corpus: usize) -> &'static DerivationGraph {
    static GRAPHS: OnceLock<Vec<DerivationGraph>> = OnceLock::new();
    &GRAPHS.get_or_init(|| {
        corpora()
            .iter()
            .map(|c| {
                let clauses: Vec<Clause> = c.axioms.iter().map(|a| a.clause.clone()).collect();
                saturate(&clauses, &mining_budget()).graph
            })
            .collect()
    })[corpus]
}

/// Largest clause weight offered as a theorem.
const MAX_THEOREM_WEIGHT: usize = 22;

/// A derived clause together with its proof DAG.
#[derive(Clone, Debug)]
pub struct Theorem {
    pub corpus: usize,
    pub target: usize,
    /// Ancestor node ids including the target, increasing.
    pub dag: Vec<usize>,
    pub depth: usize,
}

impl Theorem {
    pub fn graph(&self) -> &'static DerivationGraph {
        mined_graph(self.corpus)
    }

    pub fn clause(&self) -> &'static Clause {
        &self.graph().nodes[self.target].clause
    }

    pub fn leaves(&self) -> Vec<usize> {
        self.dag.iter().copied().filter(|&n| self.graph().is_leaf(n)).collect()
    }
}

fn eligible(g: &DerivationGraph, id: usize) -> bool {
    let n = &g.nodes[id];
    let Some((a, b)) = n.parents else { return false };
    // A clause that reuses one parent twice reads oddly as a two-parent step.
    if a == b {
        return false;
    }
    let c = &n.clause;
    !c.is_empty() && c.weight() <= MAX_THEOREM_WEIGHT && c.len() <= 3
}

/// Picks a theorem whose depth is the requested one, or the nearest available.
pub fn pick_theorem(corpus: usize, depth: usize, rng: &mut TaskRng) -> Option<Theorem> {
    let g = mined_graph(corpus);
    let candidates: Vec<usize> = (0..g.nodes.len()).filter(|&i| eligible(g, i)).collect();
    let best = candidates.iter().map(|&i| g.nodes[i].depth.abs_diff(depth)).min()?;
    let at: Vec<usize> = candidates.into_iter().filter(|&i| g.nodes[i].depth.abs_diff(depth) == best).collect();
    let target = *rng.choose(&at);
    Some(Theorem { corpus, target, dag: g.ancestors(target), depth: g.nodes[target].depth })
}

/// A set of DAG nodes from which the target follows: start from its parents
/// and repeatedly replace a derived node by its own parents.
pub fn sample_cut(th: &Theorem, expand_prob: f64, rng: &mut TaskRng) -> Vec<usize> {
    let g = th.graph();
    let (a, b) = g.nodes[th.target].parents.expect("theorems are derived");
    let mut cut: BTreeSet<usize> = [a, b].into();
    loop {
        let expandable: Vec<usize> = cut.iter().copied().filter(|&n| !g.is_leaf(n)).collect();
        if expandable.is_empty() || !rng.chance(expand_prob) {
            break;
        }
        let n = *rng.choose(&expandable);
        let (p, q) = g.nodes[n].parents.expect("derived");
        cut.remove(&n);
        cut.insert(p);
        cut.insert(q);
    }
    cut.into_iter().collect()
}

pub fn clauses_of(g: &DerivationGraph, ids: &[usize]) -> Vec<Clause> {
    ids.iter().map(|&i| g.nodes[i].clause.clone()).collect()
}

pub fn entails(premises: &[Clause], target: &Clause, budget: &Budget) -> Status {
    prove(premises, target, budget).status
}

fn budget_json(b: &Budget) -> Value {
    json!({"max_clauses": b.max_clauses, "max_given": b.max_given, "max_weight": b.max_weight, "max_literals": b.max_literals})
}

/// Corpus axioms shown as background: those the proof rests on plus a few
/// others, in corpus order.
fn fundamental_axioms(th: &Theorem, rng: &mut TaskRng) -> Vec<String> {
    let corpus = &corpora()[th.corpus];
    let g = th.graph();
    let mut used: BTreeSet<usize> = th.leaves().iter().filter_map(|&n| g.nodes[n].source).collect();
    let others: Vec<usize> = (0..corpus.axioms.len()).filter(|i| !used.contains(i)).collect();
    for i in rng.sample_indices(others.len(), 2.min(others.len())) {
        used.insert(others[i]);
    }
    used.into_iter()
        .take(8)
        .map(|i| {
            let a = &corpus.axioms[i];
            render_cnf(&a.name, &a.role, &a.clause)
        })
        .collect()
}

fn tptp_schedule(extra: Vec<ParamSpec>) -> DifficultySchedule {
    let mut specs = vec![
        ParamSpec::discrete("proof_depth", 1.5, 0.6, 1.0, 8.0),
        ParamSpec::continuous("expand_prob", 0.3, 0.08, 0.0, 0.8),
    ];
    specs.extend(extra);
    DifficultySchedule::new(specs)
}

fn theorem_for(params: &Params, rng: &mut TaskRng) -> Result<Theorem, Reject> {
    let corpus = rng.below(corpora().len());
    let depth = params.usize("proof_depth").max(1);
    pick_theorem(corpus, depth, rng).ok_or_else(|| Reject::new("corpus has no eligible theorem"))
}

fn bullet_list(items: &[String]) -> String {
    items.iter().map(|s| format!("- {s}")).collect::<Vec<_>>().join("\n")
}

pub fn entailment_prompt(domain: &str, fundamentals: &[String], subset: &[Clause], theorem: &Clause) -> String {
    let subset: Vec<String> = subset.iter().map(|c| c.to_string()).collect();
    format!(
        "You are a mathematical logic assistant. Your task is to determine the sufficiency of a specific set of axioms for proving a theorem.\n\n\
         By using the **Superposition Calculus** (which includes rules like Resolution and Paramodulation).\n\
         ## General Context\n\
         The problem is set in the domain of: **{domain}**.\n\
         The following are the fundamental axioms of this domain, providing a general theoretical background:\n\
         Fundamental Axioms:\n{}\n\n--- \n\n\
         ## Task\n\
         Now, you are given a specific **subset of axioms** and a theorem from this domain.\n\n\
         **Axiom Subset under consideration:**\n{}\n\n\
         **Theorem to prove:**\n`{theorem}`\n\n\
         ### Question\n\
         Is the **\"Axiom Subset under consideration\"** listed above **sufficient on its own** to prove the **\"Theorem to prove\"**?\n\n\
         ### Response Format\n\
         Respond **only** with `True` if the provided subset is sufficient, or `False` otherwise. Do not provide explanations.",
        bullet_list(fundamentals),
        bullet_list(&subset),
    )
}

pub struct ConjectureEntailment;

impl Task for ConjectureEntailment {
    fn name(&self) -> &'static str {
        "conjecture_entailment"
    }

    fn schedule(&self) -> DifficultySchedule {
        tptp_schedule(vec![])
    }

    fn generate(&self, params: &Params, rng: &mut TaskRng) -> Result<Generated, Reject> {
        let th = theorem_for(params, rng)?;
        let g = th.graph();
        let cut = sample_cut(&th, params.get("expand_prob"), rng);
        let budget = label_budget();
        let mut shown = clauses_of(g, &cut);
        let target = th.clause();
        let positive = rng.chance(0.5);
        let mut perturbation = "none";
        if positive {
            if rng.chance(0.25) {
                // Extra premises keep the subset sufficient.
                let outside: Vec<usize> = (0..g.nodes.len()).filter(|i| !th.dag.contains(i) && eligible(g, *i)).collect();
                if !outside.is_empty() {
                    shown.push(g.nodes[*rng.choose(&outside)].clause.clone());
                    perturbation = "addition";
                }
            }
            if entails(&shown, target, &budget) != Status::Proved {
                return Err(Reject::new("positive subset not proved within budget"));
            }
        } else {
            let victim = rng.below(shown.len());
            let replace = shown.len() < 2 || rng.chance(0.5);
            if replace {
                let outside: Vec<usize> = (0..g.nodes.len()).filter(|i| !th.dag.contains(i)).collect();
                if outside.is_empty() {
                    return Err(Reject::new("no replacement candidates"));
                }
                shown[victim] = g.nodes[*rng.choose(&outside)].clause.clone();
                perturbation = "replacement";
            } else {
                shown.remove(victim);
                perturbation = "removal";
            }
            if entails(&shown, target, &budget.scaled(2)) == Status::Proved {
                return Err(Reject::new("perturbed subset still proves the theorem"));
            }
        }
        rng.shuffle(&mut shown);
        let corpus = &corpora()[th.corpus];
        let prompt = entailment_prompt(&corpus.domain, &fundamental_axioms(&th, rng), &shown, target);
        Ok(Generated::new(prompt, if positive { "True" } else { "False" })
            .meta("domain", corpus.domain.clone())
            .meta("theorem", target.to_string())
            .meta("premises", shown.iter().map(|c| c.to_string()).collect::<Vec<_>>())
            .meta("proof_depth", th.depth)
            .meta("perturbation", perturbation)
            .meta("budget", budget_json(&budget)))
    }

    fn score(&self, instance: &TaskInstance, candidate: &str) -> ScoreResult {
        let got = normalize_word(candidate);
        if got != "true" && got != "false" {
            return ScoreResult::parse_error("expected True or False");
        }
        ScoreResult::binary(got == instance.answer.to_lowercase())
    }

    fn size_proxy(&self, instance: &TaskInstance) -> Option<f64> {
        instance.meta("proof_depth")?.as_f64()
    }
}

pub fn premise_selection_prompt(domain: &str, fundamentals: &[String], theorem: &Clause, pool: &[Clause]) -> String {
    let pool: Vec<String> = pool.iter().enumerate().map(|(i, c)| format!("{}. {c}", i + 1)).collect();
    format!(
        "You are a mathematical logic assistant. Your task is to identify a minimal set of premises sufficient for a proof.\n\n\
         By using the **Superposition Calculus** (which includes rules like Resolution and Paramodulation).\n\
         ## General Context\n\
         The problem is set in the domain of: **{domain}**.\n\
         The following are the fundamental axioms of this domain. They provide general context. **Do not use them in the proof itself.**\n\
         Fundamental Axioms:\n{}\n\n--- \n\n\
         ## Task\n\
         Your goal is to prove the following theorem:\n\
         **Theorem:**\n`{theorem}`\n\n\
         Below is a numbered pool of potential premises. Your task is to identify the **minimal subset** of numbers from this pool whose corresponding statements are **sufficient on their own** to prove the theorem.\n\
         **Pool of Premises:**\n{}\n\n\
         ### Question\n\
         Which is the smallest set of numbered premises from the pool that is sufficient to prove the theorem, without using the fundamental axioms from the context?\n\n\
         ### Response Format\n\
         Your answer must be **only** a list of numbers, sorted in increasing order. For example: `[2, 5, 8]`.",
        bullet_list(fundamentals),
        pool.join("\n"),
    )
}

pub struct TheoremPremiseSelection;

impl Task for TheoremPremiseSelection {
    fn name(&self) -> &'static str {
        "theorem_premise_selection"
    }

    fn schedule(&self) -> DifficultySchedule {
        tptp_schedule(vec![ParamSpec::discrete("distractors", 2.0, 0.8, 1.0, 10.0)])
    }

    fn generate(&self, params: &Params, rng: &mut TaskRng) -> Result<Generated, Reject> {
        let th = theorem_for(params, rng)?;
        let g = th.graph();
        let support = sample_cut(&th, params.get("expand_prob"), rng);
        let outside: Vec<usize> = (0..g.nodes.len()).filter(|i| !th.dag.contains(i) && g.nodes[*i].clause.weight() <= MAX_THEOREM_WEIGHT).collect();
        let k = params.usize("distractors").min(outside.len());
        let mut pool: Vec<(usize, bool)> = support.iter().map(|&n| (n, true)).collect();
        pool.extend(rng.sample_indices(outside.len(), k).into_iter().map(|i| (outside[i], false)));
        rng.shuffle(&mut pool);
        let clauses: Vec<Clause> = pool.iter().map(|&(n, _)| g.nodes[n].clause.clone()).collect();
        let answer: Vec<usize> = pool.iter().enumerate().filter(|(_, p)| p.1).map(|(i, _)| i + 1).collect();
        let target = th.clause();
        let budget = label_budget();
        let chosen: Vec<Clause> = answer.iter().map(|&i| clauses[i - 1].clone()).collect();
        if entails(&chosen, target, &budget) != Status::Proved {
            return Err(Reject::new("support not proved within budget"));
        }
        // Every support member must be needed even with all distractors present.
        for &i in &answer {
            let rest: Vec<Clause> = clauses.iter().enumerate().filter(|(j, _)| j + 1 != i).map(|(_, c)| c.clone()).collect();
            if entails(&rest, target, &budget) == Status::Proved {
                return Err(Reject::new("a support member is redundant"));
            }
        }
        let corpus = &corpora()[th.corpus];
        let prompt = premise_selection_prompt(&corpus.domain, &fundamental_axioms(&th, rng), target, &clauses);
        Ok(Generated::new(prompt, render_index_list(&answer))
            .meta("domain", corpus.domain.clone())
            .meta("theorem", target.to_string())
            .meta("pool", clauses.iter().map(|c| c.to_string()).collect::<Vec<_>>())
            .meta("proof_depth", th.depth)
            .meta("budget", budget_json(&budget)))
    }

    fn score(&self, instance: &TaskInstance, candidate: &str) -> ScoreResult {
        let Some(got) = parse_index_list(candidate) else {
            return ScoreResult::parse_error("expected a list of premise numbers");
        };
        let want: BTreeSet<i64> = parse_index_list(&instance.answer).unwrap_or_default().into_iter().collect();
        let got: BTreeSet<i64> = got.into_iter().collect();
        let r = jaccard(&got, &want);
        ScoreResult::new(r).with("jaccard", r)
    }

    fn size_proxy(&self, instance: &TaskInstance) -> Option<f64> {
        instance.meta("proof_depth")?.as_f64()
    }
}

pub fn reconstruction_prompt(domain: &str, theorem: &Clause, clauses: &[Clause]) -> String {
    let list: Vec<String> = clauses.iter().enumerate().map(|(i, c)| format!("{}. {c}", i + 1)).collect();
    format!(
        "Your task is to reconstruct the dependency graph of a mathematical proof from the domain of **{domain}**.\n\n\
         The proof graph concludes with the theorem: `{theorem}`\n\n\
         ## Proof Context & Rules\n\
         This proof was generated by using the **Superposition Calculus** (which includes rules like Resolution and Paramodulation).\n\n\
         Therefore, the proof has the following properties:\n\
         - **Starting Points:** Some clauses in the list are starting points (axioms ) and are not derived from other clauses.\n\
         - **Derived Clauses:** Every other clause is derived from exactly **two** parent clauses from the list.\n\
         - **Clause Reuse:** A single clause can be used as a parent in multiple derivation steps.\n\n\
         ## Your Task\n\
         Given the rules above, reconstruct the proof from the following shuffled list of clauses. Identify the derivation for every clause that is not a starting point.\n\n\
         **Shuffled Clauses:**\n{}\n\n\
         ## Required Output Format\n\
         - List **only** the derivation steps.\n\
         - Each step must be on a new line.\n\
         - Use the exact format `CHILD <- PARENT_1, PARENT_2`. Example: `5 <- 2, 4`.(for each line)\n\
         - All clauses from the list must be used in the final structure.\n\
         - No explanations, comments, or extra text.",
        list.join("\n"),
    )
}

/// A derivation step `child <- p1, p2` with the parents in increasing order.
pub type Step = (usize, usize, usize);

pub fn parse_step(line: &str) -> Option<Step> {
    let (child, parents) = line.split_once("<-")?;
    let child = child.trim().parse().ok()?;
    let (a, b) = parents.split_once(',')?;
    let (a, b): (usize, usize) = (a.trim().parse().ok()?, b.trim().parse().ok()?);
    Some((child, a.min(b), a.max(b)))
}

/// Structural F1 against the true steps, blended half and half with the
/// fraction of candidate lines that are valid single inferences.
pub fn score_reconstruction(clauses: &[Clause], truth: &BTreeSet<Step>, candidate: &str) -> ScoreResult {
    let lines: Vec<&str> = candidate.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
    if lines.is_empty() {
        return ScoreResult::new(0.0).with("structural", 0.0).with("semantic", 0.0);
    }
    let mut seen: BTreeSet<Step> = BTreeSet::new();
    let mut unparsed = 0usize;
    for l in &lines {
        match parse_step(l) {
            Some(s) => {
                seen.insert(s);
            }
            None => unparsed += 1,
        }
    }
    let total = seen.len() + unparsed;
    let hits = seen.intersection(truth).count();
    let precision = hits as f64 / total as f64;
    let recall = if truth.is_empty() { 1.0 } else { hits as f64 / truth.len() as f64 };
    let f1 = if hits == 0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
    let get = |i: usize| i.checked_sub(1).and_then(|i| clauses.get(i));
    let valid = seen
        .iter()
        .filter(|&&(c, a, b)| match (get(c), get(a), get(b)) {
            (Some(c), Some(a), Some(b)) => one_step_check(a, b, c),
            _ => false,
        })
        .count();
    let semantic = valid as f64 / total as f64;
    ScoreResult::new(0.5 * f1 + 0.5 * semantic).with("structural", f1).with("semantic", semantic)
}

pub fn render_steps(steps: &BTreeSet<Step>) -> String {
    steps.iter().map(|(c, a, b)| format!("{c} <- {a}, {b}")).collect::<Vec<_>>().join("\n")
}

pub struct ProofReconstruction;

impl Task for ProofReconstruction {
    fn name(&self) -> &'static str {
        "proof_reconstruction"
    }

    fn schedule(&self) -> DifficultySchedule {
        tptp_schedule(vec![])
    }

    fn generate(&self, params: &Params, rng: &mut TaskRng) -> Result<Generated, Reject> {
        let th = theorem_for(params, rng)?;
        let g = th.graph();
        if th.dag.iter().any(|&n| matches!(g.nodes[n].parents, Some((a, b)) if a == b)) {
            return Err(Reject::new("proof reuses a parent within one step"));
        }
        let mut order = th.dag.clone();
        rng.shuffle(&mut order);
        let number = |n: usize| order.iter().position(|&m| m == n).expect("in dag") + 1;
        let steps: BTreeSet<Step> = th
            .dag
            .iter()
            .filter_map(|&n| {
                let (a, b) = g.nodes[n].parents?;
                let (a, b) = (number(a), number(b));
                Some((number(n), a.min(b), a.max(b)))
            })
            .collect();
        let clauses = clauses_of(g, &order);
        let domain = corpora()[th.corpus].domain.clone();
        Ok(Generated::new(reconstruction_prompt(&domain, th.clause(), &clauses), render_steps(&steps))
            .meta("domain", domain)
            .meta("theorem", th.clause().to_string())
            .meta("clauses", clauses.iter().map(|c| c.to_string()).collect::<Vec<_>>())
            .meta("proof_depth", th.depth)
            .meta("steps", steps.len()))
    }

    fn score(&self, instance: &TaskInstance, candidate: &str) -> ScoreResult {
        let Some(texts) = meta_strings(instance, "clauses") else {
            return ScoreResult::new(0.0).with("error", "instance lacks clauses");
        };
        let Ok(clauses) = texts.iter().map(|t| parse_clause(t)).collect::<Result<Vec<_>, _>>() else {
            return ScoreResult::new(0.0).with("error", "instance clauses do not parse");
        };
        let truth: BTreeSet<Step> = instance.answer.lines().filter_map(parse_step).collect();
        score_reconstruction(&clauses, &truth, candidate).with("domain", meta_str(instance, "domain").unwrap_or(""))
    }

    fn size_proxy(&self, instance: &TaskInstance) -> Option<f64> {
        instance.meta("proof_depth")?.as_f64()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpora_parse_and_are_consistent() {
        for (i, c) in corpora().iter().enumerate() {
            assert!(c.axioms.len() >= 10, "{}", c.domain);
            let clauses: Vec<Clause> = c.axioms.iter().map(|a| a.clause.clone()).collect();
            assert_ne!(saturate(&clauses, &mining_budget()).status, Status::Proved, "{}", c.domain);
            assert!(mined_graph(i).nodes.len() > c.axioms.len());
        }
    }

    #[test]
    fn reference_reconstruction_step() {
        let clauses: Vec<Clause> = ["(minimum(X1,X1)=X1)", "(minimum(X2,X1)=X1|~less_or_equal(X1,X2))", "(less_or_equal(X1,X1))"]
            .iter()
            .map(|s| parse_clause(s).unwrap())
            .collect();
        let truth: BTreeSet<Step> = [(1, 2, 3)].into();
        assert_eq!(score_reconstruction(&clauses, &truth, "1 <- 2, 3").reward, 1.0);
        assert_eq!(score_reconstruction(&clauses, &truth, "1 <- 3, 2").reward, 1.0);
        assert_eq!(score_reconstruction(&clauses, &truth, "").reward, 0.0);
        assert_eq!(score_reconstruction(&clauses, &truth, "2 <- 1, 3").reward, 0.0);
        let prompt = reconstruction_prompt("Analysis", &clauses[0], &clauses);
        assert!(prompt.contains("**Shuffled Clauses:**\n1. (minimum(X1,X1)=X1)\n2. (minimum(X2,X1)=X1|~less_or_equal(X1,X2))\n3. (less_or_equal(X1,X1))\n"));
    }

    #[test]
    fn reference_entailment_instance() {
        let subset: Vec<Clause> = [
            "(equidistant(X1,X2,X3,X4)|~equidistant(X4,X3,X1,X2))",
            "(equidistant(X1,X2,X3,X4)|~equidistant(X5,X6,X1,X2)|~equidistant(X4,X3,X5,X6))",
        ]
        .iter()
        .map(|s| parse_clause(s).unwrap())
        .collect();
        let theorem = parse_clause("(equidistant(X1,X2,X3,X4)|~equidistant(X4,X3,X5,X6)|~equidistant(X2,X1,X5,X6))").unwrap();
        assert_eq!(entails(&subset, &theorem, &label_budget()), Status::Proved);
        let geo = &corpora()[0];
        let fundamentals: Vec<String> = geo.axioms[..2].iter().map(|a| render_cnf(&a.name, &a.role, &a.clause)).collect();
        let p = entailment_prompt(&geo.domain, &fundamentals, &subset, &theorem);
        assert!(p.contains("Fundamental Axioms:\n- cnf(reflexivity_for_equidistance,axiom,(equidistant(X1,X2,X2,X1)))\n"));
        assert!(p.contains("**Theorem to prove:**\n`(equidistant(X1,X2,X3,X4)|~equidistant(X4,X3,X5,X6)|~equidistant(X2,X1,X5,X6))`"));
    }

    #[test]
    fn reference_ring_pool_is_answered_by_distributivity() {
        let pool: Vec<Clause> = [
            "(multiply(X1,add(X2,X3))=add(multiply(X1,X2),multiply(X1,X3)))",
            "(add(multiply(X1,multiply(X2,X3)),multiply(X4,multiply(X2,additive_inverse(X3))))=multiply(add(X1,additive_inverse(X4)),multiply(X2,X3)))",
            "(add(multiply(X1,add(X2,X2)),add(X3,multiply(add(X1,X1),additive_inverse(X2))))=X3)",
            "(multiply(add(X1,X2),X3)=add(multiply(X1,X3),multiply(X2,X3)))",
        ]
        .iter()
        .map(|s| parse_clause(s).unwrap())
        .collect();
        let theorem = parse_clause("(multiply(add(X1,X1),X2)=multiply(X1,add(X2,X2)))").unwrap();
        let chosen = vec![pool[0].clone(), pool[3].clone()];
        assert_eq!(entails(&chosen, &theorem, &label_budget()), Status::Proved);
        assert_ne!(entails(&chosen[..1], &theorem, &label_budget()), Status::Proved);
    }
}
