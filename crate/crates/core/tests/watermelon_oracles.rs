mod common;

use monosurf::geometry::{sample_iid, DensityModel, RngSeed};
use monosurf::tableau::{greene_k_decreasing_size, lis_length, rsk_shape};
use monosurf::watermelon::{max_k_decreasing, max_k_decreasing_profile, max_k_decreasing_with_cap, peel_k_decreasing, verify};
use monosurf::Error;
use rand::Rng;

#[test]
fn flow_matches_exhaustive_search() {
    let mut rng = RngSeed(21).rng();
    for _ in 0..60 {
        let n = rng.gen_range(0..=11);
        let ps = common::random_permutation_points(&mut rng, n);
        for k in 0..=n {
            let got = max_k_decreasing(&ps, k).unwrap();
            assert_eq!(got.size, common::brute_max_k_decreasing(&ps, k), "n={n} k={k}");
            assert!(verify(&got, &ps, k));
        }
    }
}

#[test]
fn profile_is_certified_by_the_shape() {
    for seed in 0..25 {
        let ps = sample_iid::<f64>(&DensityModel::uniform_diamond(), 180, RngSeed(seed)).unwrap();
        let shape = rsk_shape(&ps);
        let lis = lis_length(&ps);
        let profile = max_k_decreasing_profile(&ps, lis + 2, 5000).unwrap();
        for (k, &size) in profile.iter().enumerate() {
            assert_eq!(size, greene_k_decreasing_size(&shape, k));
        }
    }
}

#[test]
fn sequences_are_decreasing_and_disjoint() {
    let ps = sample_iid::<f64>(&DensityModel::uniform_square(), 400, RngSeed(9)).unwrap();
    let w = max_k_decreasing(&ps, 7).unwrap();
    assert_eq!(w.sequences.len(), 7);
    assert!(w.certified);
    assert!(verify(&w, &ps, 7));
    assert!(lis_length(&w.subset) <= 7);
}

#[test]
fn cap_is_enforced() {
    let ps = sample_iid::<f64>(&DensityModel::uniform_square(), 50, RngSeed(1)).unwrap();
    assert!(matches!(max_k_decreasing_with_cap(&ps, 3, 49), Err(Error::CapExceeded { n: 50, cap: 49 })));
    let approx = peel_k_decreasing(&ps, 3);
    assert!(!approx.certified);
    assert!(approx.size <= max_k_decreasing(&ps, 3).unwrap().size);
    assert!(lis_length(&approx.subset) <= 3);
}

#[test]
fn k_zero_and_k_large() {
    let ps = sample_iid::<f64>(&DensityModel::uniform_square(), 60, RngSeed(4)).unwrap();
    let w0 = max_k_decreasing(&ps, 0).unwrap();
    assert_eq!(w0.size, 0);
    assert!(w0.sequences.is_empty());
    let all = max_k_decreasing(&ps, 60).unwrap();
    assert_eq!(all.size, 60);
}
