//! Name lookup over every task family.

use crate::algebra::{Arithmetics, EquationSystem};
use crate::bayes::{BayesianAssociation, BayesianIntervention};
use crate::cfg::{Parsability, Parsing};
use crate::env::Task;
use crate::nli::{EvidenceRetrieval, LogicNli};
use crate::planning::Planning;
use crate::regex::{RegexFollowing, RegexInduction};
use crate::sequence::SequentialInduction;
use crate::sets::{SetEquality, SetIntersection, SetMissingElement};
use crate::tptp::{ConjectureEntailment, ProofReconstruction, TheoremPremiseSelection};

static TASKS: [&(dyn Task + Sync); 18] = [
    &Planning,
    &EquationSystem,
    &RegexFollowing,
    &RegexInduction,
    &Arithmetics,
    &SequentialInduction,
    &ConjectureEntailment,
    &TheoremPremiseSelection,
    &ProofReconstruction,
    &LogicNli,
    &EvidenceRetrieval,
    &Parsability,
    &Parsing,
    &BayesianAssociation,
    &BayesianIntervention,
    &SetEquality,
    &SetIntersection,
    &SetMissingElement,
];

pub fn all_tasks() -> &'static [&'static (dyn Task + Sync)] {
    &TASKS
}

pub fn task_names() -> Vec<&'static str> {
    TASKS.iter().map(|t| t.name()).collect()
}

pub fn get_task(name: &str) -> Option<&'static dyn Task> {
    TASKS.iter().find(|t| t.name() == name).map(|t| *t as &dyn Task)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_are_unique_and_complete() {
        let mut names = task_names();
        names.sort_unstable();
        names.dedup();
        assert_eq!(names.len(), 18);
        assert!(get_task("logic_nli").is_some());
        assert!(get_task("nope").is_none());
    }
}
