mod oracles;

use oracles::algebra::{oracle, system_strategy};
use proptest::prelude::*;
use verigen::algebra::arith::{evaluate_text, generate_expression};
use verigen::algebra::classify_target;
use verigen::TaskRng;

#[test]
fn rendered_expressions_reevaluate_to_same_value() {
    let mut rng = TaskRng::new(99);
    for i in 0..500 {
        let (lo, hi) = if i % 2 == 0 { (3, 6) } else { (6, 14) };
        let e = generate_expression(lo, hi, 0.4, &mut rng).unwrap();
        let text = e.render();
        assert_eq!(evaluate_text(&text).unwrap(), e.eval().unwrap(), "{text}");
        assert!((lo..=hi).contains(&e.depth()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]
    #[test]
    fn classification_matches_minor_oracle((sys, t) in system_strategy()) {
        prop_assert_eq!(classify_target(&sys, t), oracle(&sys, t));
    }
}
