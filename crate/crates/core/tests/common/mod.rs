//! Fixtures and independent oracles shared by the integration suites.

use dea_core::data::{DeaData, SpecialSets};
use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Four DMUs on one input and one output; A spans the CRS frontier, A and C
/// the VRS one.
pub fn m1() -> DeaData {
    DeaData::new(
        ndarray::array![[2.0, 4.0, 5.0, 8.0]],
        ndarray::array![[2.0, 2.0, 4.0, 2.0]],
        Some(vec!["A".into(), "B".into(), "C".into(), "D".into()]),
        None,
        None,
        SpecialSets::default(),
    )
    .unwrap()
}

/// The 23-DMU synthetic dataset with three technology groups.
pub fn meta() -> DeaData {
    let x = [
        2.0, 3.0, 5.0, 4.64, 6.4, 11.0, 9.4, 8.4, 5.4, 4.0, 5.44, 5.7, 8.26, 6.76, 9.0, 10.0, 12.0,
        10.76, 12.98, 13.56, 10.4, 11.64, 10.68,
    ];
    let y = [
        1.0, 3.0, 4.0, 0.69, 2.41, 2.0, 3.37, 1.41, 9.81, 8.29, 6.57, 8.69, 8.63, 7.63, 9.0, 11.0,
        12.0, 9.73, 9.27, 6.83, 7.25, 4.27, 2.5,
    ];
    let names: Vec<String> = (b'A'..=b'W').map(|c| (c as char).to_string()).collect();
    DeaData::new(
        Array2::from_shape_vec((1, 23), x.to_vec()).unwrap(),
        Array2::from_shape_vec((1, 23), y.to_vec()).unwrap(),
        Some(names),
        None,
        None,
        SpecialSets::default(),
    )
    .unwrap()
}

/// Published BCC input-oriented scores of `meta` against the pooled frontier.
pub const META_CONCAVE: [f64; 23] = [
    1.00000, 0.84957, 0.56461, 0.43103, 0.37294, 0.20676, 0.28194, 0.25149, 1.00000, 1.00000,
    0.64855, 0.76639, 0.52217, 0.56493, 0.51711, 0.89863, 1.00000, 0.49501, 0.37771, 0.26545,
    0.35718, 0.24889, 0.22580,
];

/// Published minimum-over-group-frontier scores of `meta`.
pub const META_NONCONCAVE: [f64; 23] = [
    1.00000, 1.00000, 0.80000, 0.43103, 0.42266, 0.22727, 0.39787, 0.26250, 1.00000, 1.00000,
    0.73529, 0.76639, 0.52217, 0.59172, 0.51711, 1.00000, 1.00000, 0.49501, 0.37771, 0.29499,
    0.38462, 0.34364, 0.25749,
];

pub fn meta_groups() -> Vec<Vec<usize>> {
    vec![(0..8).collect(), (8..14).collect(), (14..23).collect()]
}

/// Random positive instances: up to 12 DMUs over at most 3 inputs and 3
/// outputs, entries in [0.5, 10].
pub fn random_corpus(count: usize, seed: u64) -> Vec<DeaData> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.random_range(2..=12usize);
            let m = rng.random_range(1..=3usize);
            let s = rng.random_range(1..=3usize);
            let input = Array2::from_shape_fn((m, n), |_| rng.random_range(0.5..10.0));
            let output = Array2::from_shape_fn((s, n), |_| rng.random_range(0.5..10.0));
            DeaData::from_matrices(input, output).unwrap()
        })
        .collect()
}

/// Closed-form CCR input-oriented scores for one-input one-output data.
pub fn ratio_oracle(data: &DeaData) -> Vec<f64> {
    assert_eq!(data.num_inputs(), 1);
    assert_eq!(data.num_outputs(), 1);
    let ratios: Vec<f64> = (0..data.num_dmus())
        .map(|j| data.output[(0, j)] / data.input[(0, j)])
        .collect();
    let best = ratios.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    ratios.iter().map(|r| r / best).collect()
}

/// Enumeration oracle for BCC input-oriented scores on one-input one-output
/// data: the cheapest input able to produce `y_o` lies on a vertex or a
/// segment between two observed DMUs.
pub fn vrs_io_oracle(data: &DeaData) -> Vec<f64> {
    assert_eq!(data.num_inputs(), 1);
    assert_eq!(data.num_outputs(), 1);
    let n = data.num_dmus();
    let xs: Vec<f64> = (0..n).map(|j| data.input[(0, j)]).collect();
    let ys: Vec<f64> = (0..n).map(|j| data.output[(0, j)]).collect();
    (0..n)
        .map(|o| {
            let mut best = f64::INFINITY;
            for j in 0..n {
                if ys[j] >= ys[o] {
                    best = best.min(xs[j]);
                }
                for k in 0..n {
                    if (ys[j] <= ys[o] && ys[o] <= ys[k]) && ys[k] > ys[j] {
                        let t = (ys[o] - ys[j]) / (ys[k] - ys[j]);
                        best = best.min(xs[j] + t * (xs[k] - xs[j]));
                    }
                }
            }
            best / xs[o]
        })
        .collect()
}

pub fn assert_close(got: f64, want: f64, tol: f64, what: &str) {
    assert!(
        (got - want).abs() <= tol,
        "{what}: got {got}, want {want} (tol {tol})"
    );
}
