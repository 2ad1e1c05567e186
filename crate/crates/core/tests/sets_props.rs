use std::collections::BTreeSet;

use proptest::prelude::*;
use verigen::sets::{split_elements, Domain, DOMAINS};
use verigen::{generate, get_task, TaskInstance};

fn strings(inst: &TaskInstance, key: &str) -> Vec<String> {
    inst.metadata[key].as_array().unwrap().iter().map(|v| v.as_str().unwrap().to_string()).collect()
}

fn domain_of(inst: &TaskInstance) -> Domain {
    Domain::from_name(inst.metadata["domain"].as_str().unwrap()).unwrap()
}

/// The bracketed list after `label: ` on its own line of the prompt.
fn prompt_list(prompt: &str, label: &str) -> Vec<String> {
    let line = prompt.lines().find(|l| l.starts_with(label)).unwrap();
    split_elements(&line[label.len()..]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn elements_render_and_parse_back(d in 0usize..7, frac in 0.0f64..1.0) {
        let domain = DOMAINS[d];
        let (lo, hi) = domain.range();
        let v = lo + ((hi - lo) as f64 * frac) as i64;
        prop_assert_eq!(domain.parse(&domain.render(v)), Some(v));
        let listed = split_elements(&domain.list(&[v, lo, hi])).unwrap();
        prop_assert_eq!(listed.len(), 3);
        prop_assert_eq!(domain.parse(&listed[0]), Some(v));
    }
}

#[test]
fn missing_element_is_strictly_inside_a_contiguous_run() {
    let t = get_task("set_missing_element").unwrap();
    for seed in 0..1000 {
        let inst = generate(t, seed, (seed % 6) as f64).unwrap();
        let domain = domain_of(&inst);
        let shown: Vec<i64> = prompt_list(&inst.prompt, "Set_A: ").iter().map(|s| domain.parse(s).unwrap()).collect();
        let answer = domain.parse(&inst.answer).unwrap();
        let (min, max) = (*shown.iter().min().unwrap(), *shown.iter().max().unwrap());
        assert!(min < answer && answer < max, "seed {seed}");
        assert!(!shown.contains(&answer));
        let all: BTreeSet<i64> = shown.iter().copied().chain([answer]).collect();
        assert_eq!(all.len() as i64, max - min + 1, "seed {seed}: not a run");
    }
}

#[test]
fn equality_labels_agree_with_the_listed_sets() {
    let t = get_task("set_equality").unwrap();
    let mut trues = 0;
    for seed in 0..1000 {
        let inst = generate(t, seed, (seed % 6) as f64).unwrap();
        let domain = domain_of(&inst);
        let a: BTreeSet<i64> = prompt_list(&inst.prompt, "Set1: ").iter().map(|s| domain.parse(s).unwrap()).collect();
        let b: BTreeSet<i64> = prompt_list(&inst.prompt, "Set2: ").iter().map(|s| domain.parse(s).unwrap()).collect();
        assert_eq!(strings(&inst, "set1").len(), a.len());
        let expected = if a == b { "True" } else { "False" };
        assert_eq!(inst.answer, expected, "seed {seed}");
        trues += usize::from(a == b);
    }
    assert!((350..=650).contains(&trues), "{trues} equal pairs");
}

#[test]
fn intersection_answer_is_the_intersection() {
    let t = get_task("set_intersection").unwrap();
    for seed in 0..500 {
        let inst = generate(t, seed, (seed % 6) as f64).unwrap();
        let domain = domain_of(&inst);
        let parse = |label| prompt_list(&inst.prompt, label).iter().map(|s| domain.parse(s).unwrap()).collect::<BTreeSet<i64>>();
        let truth: BTreeSet<i64> = parse("Set1: ").intersection(&parse("Set2: ")).copied().collect();
        assert_eq!(inst.answer, domain.set(&truth), "seed {seed}");
    }
}
