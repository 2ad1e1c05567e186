mod oracles;

use std::collections::BTreeMap;

use oracles::cfg::{language, random_grammar, strings_up_to};
use verigen::cfg::{count_parses, Parsability};
use verigen::{generate, TaskRng};

#[test]
fn counts_match_bottom_up_language() {
    let mut rng = TaskRng::new(31);
    let strings = strings_up_to(8);
    for _ in 0..100 {
        let g = random_grammar(&mut rng);
        let lang = language(&g, 8);
        for s in &strings {
            let tokens: Vec<String> = s.iter().map(|t| t.to_string()).collect();
            let expected = lang.get(&tokens).copied().unwrap_or(0);
            assert_eq!(count_parses(&g, &tokens), expected, "{}\non {:?}", g.to_text(), s);
        }
    }
}

#[test]
fn parsability_labels_cover_all_classes_at_easy_level() {
    let mut hist: BTreeMap<String, usize> = BTreeMap::new();
    for seed in 0..1000 {
        let inst = generate(&Parsability, seed, 0.0).unwrap();
        *hist.entry(inst.answer).or_default() += 1;
    }
    for label in ["unambiguous", "ambiguous", "unparsable"] {
        assert!(hist.get(label).copied().unwrap_or(0) > 0, "{hist:?}");
    }
}
