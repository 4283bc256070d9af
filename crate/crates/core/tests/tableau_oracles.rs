mod common;

use monosurf::fixtures::staircase_example;
use monosurf::geometry::{sample_iid, DensityModel, RngSeed};
use monosurf::tableau::{kappa_surface, lds_length, lis_length, rsk_shape};
use monosurf::PointSet;
use proptest::prelude::*;

#[test]
fn example_labels() {
    let k = kappa_surface(&staircase_example::<f64>());
    let at = [((1.0, 2.0), 0), ((3.0, 5.0), 1), ((5.0, 5.0), 2), ((7.0, 6.0), 3)];
    for ((x, y), v) in at {
        assert_eq!(k.eval(x, y), v);
    }
}

#[test]
fn kappa_matches_definition_on_random_sets() {
    let mut rng = RngSeed(11).rng();
    for _ in 0..100 {
        let n = rand::Rng::gen_range(&mut rng, 0..=10);
        let ps = common::random_permutation_points(&mut rng, n);
        let k = kappa_surface(&ps);
        for qx in 0..=n + 1 {
            for qy in 0..=n + 1 {
                // Query both on and between point coordinates.
                for (x, y) in [(qx as f64 + 0.5, qy as f64 + 0.25), (qx as f64, qy as f64)] {
                    assert_eq!(k.eval(x, y), common::kappa_direct(&ps, x, y));
                }
            }
        }
    }
}

#[test]
fn f32_and_f64_agree() {
    let ps64 = sample_iid::<f64>(&DensityModel::uniform_square(), 500, RngSeed(3)).unwrap();
    let pairs: Vec<(f64, f64)> = ps64.points().iter().map(|p| (p.x, p.y)).collect();
    let ps32 = PointSet::<f32>::from_pairs(&pairs);
    // Rounding to f32 may merge coordinates; skip in that unlikely case.
    if let Ok(ps32) = ps32 {
        assert_eq!(lis_length(&ps32), lis_length(&ps64));
        assert_eq!(rsk_shape(&ps32), rsk_shape(&ps64));
    }
}

proptest! {
    #[test]
    fn lis_agrees_with_quadratic(perm in Just((0..40).collect::<Vec<usize>>()).prop_shuffle()) {
        let pairs: Vec<(f64, f64)> = perm.iter().enumerate().map(|(i, &y)| (i as f64, y as f64)).collect();
        let ps = PointSet::<f64>::from_pairs(&pairs).unwrap();
        let ys: Vec<f64> = perm.iter().map(|&y| y as f64).collect();
        prop_assert_eq!(lis_length(&ps), common::lis_quadratic(&ys));
        let neg: Vec<f64> = ys.iter().map(|y| -y).collect();
        prop_assert_eq!(lds_length(&ps), common::lis_quadratic(&neg));
        let shape = rsk_shape(&ps);
        prop_assert_eq!(shape.rows()[0], lis_length(&ps));
        prop_assert_eq!(shape.rows().len(), lds_length(&ps));
        prop_assert_eq!(shape.size(), 40);
    }
}
