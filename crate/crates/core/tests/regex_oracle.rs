mod oracles;

use oracles::regex::{derivative_match, regex_strategy, universe};
use proptest::prelude::*;
use verigen::regex::Regex;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn nfa_agrees_with_derivatives(r in regex_strategy()) {
        let nfa = r.compile().unwrap();
        for s in universe(5) {
            prop_assert_eq!(nfa.full_match(&s), derivative_match(&r, &s), "pattern {} on {:?}", r, s);
        }
    }

    #[test]
    fn printed_pattern_has_same_language(r in regex_strategy()) {
        let printed = r.to_string();
        let reparsed = Regex::parse(&printed).unwrap();
        for s in universe(4) {
            prop_assert_eq!(reparsed.full_match(&s), derivative_match(&r, &s), "pattern {}", printed);
        }
    }
}
