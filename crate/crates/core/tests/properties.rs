//! Property-based checks on randomized shapes and data.
//!
//! These complement the fixed-seed unit tests by letting the shrinker
//! hunt for awkward grid dimensions: energy conservation and round
//! trips must hold for every `(M, N)`, not just the powers of two the
//! examples favor.

use num_complex::Complex64;
use proptest::prelude::*;

use otfs::grid::{read_complex_matrix, write_complex_matrix, DdGrid};
use otfs::transforms::{dzt, idzt, isfft, sfft};

fn arb_grid(max_m: usize, max_n: usize) -> impl Strategy<Value = DdGrid> {
    (1..=max_m, 1..=max_n)
        .prop_flat_map(|(m, n)| {
            proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), m * n)
                .prop_map(move |pairs| {
                    let data = pairs
                        .into_iter()
                        .map(|(re, im)| Complex64::new(re, im))
                        .collect();
                    DdGrid::from_data(m, n, data).expect("length matches dims")
                })
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prop_sfft_inverts_isfft_and_preserves_energy(x in arb_grid(24, 12)) {
        let tf = isfft(&x);
        let back = sfft(&tf);
        prop_assert!(back.max_abs_diff(&x) < 1e-12, "round trip error {}", back.max_abs_diff(&x));
        prop_assert!((tf.norm() - x.norm()).abs() < 1e-12, "energy drift");
    }

    #[test]
    fn prop_idzt_inverts_dzt(x in arb_grid(24, 12)) {
        let (m, n) = x.dims();
        let seq = idzt(&x);
        let z = dzt(&seq, m, n);
        prop_assert!(z.max_abs_diff(&x) < 1e-12, "round trip error {}", z.max_abs_diff(&x));
    }

    #[test]
    fn prop_grid_file_round_trips(x in arb_grid(16, 16)) {
        let mut buf = Vec::new();
        write_complex_matrix(&mut buf, x.rows(), x.cols(), x.data()).unwrap();
        let (rows, cols, data) = read_complex_matrix(&mut buf.as_slice()).unwrap();
        prop_assert_eq!((rows, cols), x.dims());
        prop_assert_eq!(&data, x.data());
    }
}
