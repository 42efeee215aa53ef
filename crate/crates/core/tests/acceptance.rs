//! End-to-end acceptance suite: ten criteria with pinned tolerances.
//!
//! One test per criterion. Each prints its single-line verdict — PASS or
//! FAIL together with the measured value, the threshold, and the elapsed
//! time — and asserts the verdict, so `--nocapture` shows the numbers
//! even when everything passes.

use otfs::acceptance::{
    criterion_1, criterion_10, criterion_2, criterion_3, criterion_4, criterion_5, criterion_6,
    criterion_7, criterion_8, criterion_9,
};

macro_rules! criterion_test {
    ($test_name:ident, $criterion:ident) => {
        #[test]
        fn $test_name() {
            let result = $criterion();
            println!("{}", result.line());
            assert!(result.passed, "{}", result.line());
        }
    };
}

criterion_test!(criterion_01_architecture_equivalence, criterion_1);
criterion_test!(criterion_02_closed_form_io, criterion_2);
criterion_test!(criterion_03_analytic_effective_channel, criterion_3);
criterion_test!(criterion_04_ofdm_degeneracy, criterion_4);
criterion_test!(criterion_05_transform_unitarity, criterion_5);
criterion_test!(criterion_06_mobility_arithmetic, criterion_6);
criterion_test!(criterion_07_unit_modulus_path_unitarity, criterion_7);
criterion_test!(criterion_08_noiseless_mmse_detection, criterion_8);
criterion_test!(criterion_09_awgn_ber_theory, criterion_9);
criterion_test!(criterion_10_ambiguity_quadrature, criterion_10);
