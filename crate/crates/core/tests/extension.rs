//! Minimal-Lipschitz interpolation properties.

mod common;

use lipfit::data::{empirical_lipschitz_lower, sample_uniform, Domain, LabeledDataset};
use lipfit::extension::LipschitzExtension;
use lipfit::{BatchMap, Tensor64};
use proptest::prelude::*;

fn dataset(n: usize, seed: u64) -> LabeledDataset<f64> {
    let d = Domain::new(vec![-1.0; 2], vec![1.0; 2]).unwrap();
    let x: Tensor64 = sample_uniform(&d, n, seed).unwrap();
    let y = Tensor64::from_fn(n, 2, |i, j| ((i + 1) as f64 * (j as f64 + 0.3) + seed as f64).sin());
    LabeledDataset::new(x, y, 0.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn interpolates_and_stays_between_envelopes(n in 2usize..25, seed in 0u64..1000, px in -1.0f64..1.0, py in -1.0f64..1.0) {
        let ds = dataset(n, seed);
        let ext = LipschitzExtension::new(ds.clone()).unwrap();
        for i in 0..n {
            let v = ext.evaluate(ds.inputs().row(i));
            for j in 0..2 {
                prop_assert!((v[j] - ds.outputs().get(i, j)).abs() <= 1e-12);
            }
        }
        let p = [px, py];
        let v = ext.evaluate(&p);
        for j in 0..2 {
            prop_assert!(ext.whitney_lower(&p, j) <= v[j] + 1e-12 && v[j] <= ext.mcshane_upper(&p, j) + 1e-12);
        }
    }

    #[test]
    fn sampled_quotients_respect_vector_constant(n in 2usize..25, seed in 0u64..1000) {
        let ds = dataset(n, seed);
        let ext = LipschitzExtension::new(ds.clone()).unwrap();
        let d = Domain::new(vec![-1.5; 2], vec![1.5; 2]).unwrap();
        let a: Tensor64 = sample_uniform(&d, 200, seed + 1).unwrap();
        let b: Tensor64 = sample_uniform(&d, 200, seed + 2).unwrap();
        let q = common::max_quotient(&ext.eval_batch(&a).unwrap(), &ext.eval_batch(&b).unwrap(), &a, &b);
        prop_assert!(q <= ext.vector_lipschitz() * (1.0 + 1e-9));
        // Each output alone is never steeper than the data.
        prop_assert!(ext.lipschitz().iter().all(|&l| l <= empirical_lipschitz_lower(&ds).unwrap() * (1.0 + 1e-12)));
    }
}
