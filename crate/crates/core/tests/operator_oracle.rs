use fracdiff::{
    apply_direct, assemble_operator, assemble_operator_with_blocks, DiffusionSamples,
    FractionalOrder, Grid,
};
use proptest::prelude::*;

fn check_equivalence(alpha: f64, n: usize, d_plus: Vec<f64>, d_minus: Vec<f64>, u: &[f64]) {
    let alpha = FractionalOrder::new(alpha).unwrap();
    let grid = Grid::new(0.0, 1.0, n).unwrap();
    let coeffs = DiffusionSamples::new(d_plus, d_minus).unwrap();
    let op = assemble_operator(&grid, alpha, &coeffs).unwrap();
    let fast = op.apply(u).unwrap();
    let direct = apply_direct(u, &grid, alpha, &coeffs).unwrap();
    let scale = 1.0 + direct.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    for (x, y) in fast.iter().zip(&direct) {
        assert!((x - y).abs() <= 1e-12 * scale, "{x} vs {y}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn assembly_matches_direct_summation(
        alpha in prop::sample::select(vec![0.55, 0.75, 0.95]),
        (n, d_plus, d_minus, u) in (2usize..=32).prop_flat_map(|n| (
            Just(n),
            prop::collection::vec(0.0f64..3.0, n),
            prop::collection::vec(0.0f64..3.0, n),
            prop::collection::vec(-1.0f64..1.0, n - 1),
        )),
    ) {
        check_equivalence(alpha, n, d_plus, d_minus, &u);
    }
}

#[test]
fn blocks_reproduce_matrix() {
    let alpha = FractionalOrder::new(0.7).unwrap();
    let grid = Grid::new(-1.0, 1.0, 12).unwrap();
    let coeffs = DiffusionSamples::sample(&grid, |x| 1.0 + x * x, |x| (2.0 - x).sqrt()).unwrap();
    let op = assemble_operator_with_blocks(&grid, alpha, &coeffs).unwrap();
    let b = op.blocks().unwrap();
    let dp =
        nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(coeffs.d_plus()));
    let dm =
        nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(coeffs.d_minus()));
    let rebuilt =
        (&b.left_plus * dp * &b.right_plus + &b.left_minus * dm * &b.right_minus) * op.eta();
    let scale = op.matrix().amax();
    assert!((rebuilt - op.matrix()).amax() <= 1e-13 * scale);
}

#[test]
fn discontinuous_coefficient_sampled_on_defined_branch() {
    let grid = Grid::new(-1.0, 1.0, 4).unwrap();
    let d = |x: f64| if x < 0.0 { 1.5 * (-x).exp() } else { 1.0 };
    let coeffs = DiffusionSamples::sample(&grid, d, |_| 1.0).unwrap();
    // nodes -1, -0.5, 0, 0.5 for d+
    assert_eq!(coeffs.d_plus()[2], 1.0);
    assert_eq!(coeffs.d_plus().len(), 4);
    assert_eq!(coeffs.d_minus().len(), 4);
}

#[test]
fn zero_vector_maps_to_zero() {
    let alpha = FractionalOrder::new(0.6).unwrap();
    let grid = Grid::new(0.0, 1.0, 8).unwrap();
    let coeffs = DiffusionSamples::sample(&grid, |_| 1.0, |_| 2.0).unwrap();
    let out = apply_direct(&[0.0; 7], &grid, alpha, &coeffs).unwrap();
    assert!(out.iter().all(|&v| v == 0.0));
}
