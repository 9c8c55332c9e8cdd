mod common;

use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn larger_budget_keeps_solutions(seed in any::<u64>()) {
        common::check_relaxation(seed).map_err(TestCaseError::fail)?;
    }
}
