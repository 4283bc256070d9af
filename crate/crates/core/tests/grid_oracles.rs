mod common;

use monosurf::fixtures::staircase_example;
use monosurf::geometry::RngSeed;
use monosurf::grid::{
    extend_monotone, forward_products, from_kappa, l1_distance, project_u_r, project_u_r_report, GridDomain, MonotoneGrid,
    ProjectionOptions,
};
use monosurf::tableau::kappa_surface;
use rand::Rng;

fn opts() -> ProjectionOptions {
    ProjectionOptions { tol: 1e-12, max_sweeps: 200_000 }
}

#[test]
fn projection_matches_qp_oracle() {
    let d = GridDomain::<f64>::spanning(0.0, 0.0, 1.0, 1.0, 6).unwrap();
    let mut rng = RngSeed(5).rng();
    for _ in 0..20 {
        let v: Vec<f64> = (0..36).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let p = project_u_r(d, &v, 1.0, opts()).unwrap();
        assert!(p.diam() <= 1.0 + 1e-12);
        let (x, kkt) = common::qp_projection_oracle(&d, &v, p.values(), 1.0);
        assert!(kkt < 1e-6, "KKT residual {kkt}");
        assert!(common::u_r_violation(&d, &x, 1.0) < 1e-6);
        for (a, b) in x.iter().zip(p.values()) {
            assert!((a - b).abs() < 1e-6);
        }
    }
}

#[test]
fn projection_is_idempotent_and_nonexpansive() {
    let d = GridDomain::<f64>::spanning(0.0, 0.0, 1.0, 1.0, 9).unwrap();
    let mut rng = RngSeed(6).rng();
    for _ in 0..10 {
        let v: Vec<f64> = (0..d.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let p = project_u_r(d, &v, 0.7, ProjectionOptions::default()).unwrap();
        let again = project_u_r(d, p.values(), 0.7, ProjectionOptions::default()).unwrap();
        for (a, b) in p.values().iter().zip(again.values()) {
            assert!((a - b).abs() <= 2e-8);
        }
        // No feasible point is farther from p than from v.
        for _ in 0..20 {
            let q = common::random_monotone_grid(&mut rng, 9);
            let scale = 0.7 / q.diam().max(1e-9);
            let q: Vec<f64> = q.values().iter().map(|x| x * scale.min(1.0)).collect();
            let dist = |a: &[f64]| a.iter().zip(&q).map(|(x, y)| (x - y).powi(2)).sum::<f64>();
            assert!(dist(p.values()) <= dist(&v) + 1e-9);
        }
    }
}

#[test]
fn zero_diameter_projects_to_mean() {
    let d = GridDomain::<f64>::spanning(0.0, 0.0, 1.0, 1.0, 4).unwrap();
    let v: Vec<f64> = (0..16).map(|k| k as f64 * 0.3 - 1.0).collect();
    let mean = v.iter().sum::<f64>() / 16.0;
    let p = project_u_r_report(d, &v, 0.0, ProjectionOptions::default()).unwrap();
    for x in p.grid.values() {
        assert!((x - mean).abs() < 1e-8);
    }
}

#[test]
fn diam_equals_full_scan() {
    let mut rng = RngSeed(7).rng();
    for _ in 0..20 {
        let g = common::random_monotone_grid(&mut rng, 7);
        let max = g.values().iter().cloned().fold(f64::MIN, f64::max);
        let min = g.values().iter().cloned().fold(f64::MAX, f64::min);
        assert_eq!(g.diam(), max - min);
    }
}

#[test]
fn extension_restricts_to_input() {
    let d = GridDomain::<f64>::spanning(-0.75, -0.75, 0.75, 0.75, 31).unwrap();
    let partial: Vec<Option<f64>> =
        d.nodes().map(|(x, y)| (x.abs() + y.abs() < std::f64::consts::FRAC_1_SQRT_2).then_some(x + y)).collect();
    let w = extend_monotone(d, &partial).unwrap();
    for (k, v) in partial.iter().enumerate() {
        if let Some(v) = v {
            assert_eq!(w.values()[k], *v);
        }
    }
    let given: Vec<f64> = partial.iter().flatten().copied().collect();
    assert_eq!(w.min(), given.iter().cloned().fold(f64::MAX, f64::min));
    assert_eq!(w.max(), given.iter().cloned().fold(f64::MIN, f64::max));
}

#[test]
fn single_node_extension() {
    let d = GridDomain::<f64>::spanning(0.0, 0.0, 1.0, 1.0, 5).unwrap();
    let mut partial = vec![None; d.len()];
    partial[d.idx(2, 3)] = Some(4.5);
    let w = extend_monotone(d, &partial).unwrap();
    assert!(w.values().iter().all(|&v| v == 4.5));
}

#[test]
fn products_of_affine_and_bilinear() {
    let d = GridDomain::<f64>::spanning(0.0, 0.0, 1.0, 1.0, 11).unwrap();
    let g = MonotoneGrid::from_fn(d, |x, y| x + y).unwrap();
    assert!(forward_products(&g).iter().all(|t| (t - 1.0).abs() < 1e-12));
    let c = MonotoneGrid::constant(d, 2.0);
    assert!(forward_products(&c).iter().all(|&t| t == 0.0));
}

#[test]
fn l1_of_constants() {
    let d = GridDomain::<f64>::spanning(0.0, 0.0, 1.0, 1.0, 8).unwrap();
    let a = MonotoneGrid::constant(d, 0.25);
    let b = MonotoneGrid::constant(d, -0.5);
    assert!((l1_distance(&a, &b).unwrap() - 0.75).abs() < 1e-12);
    assert_eq!(l1_distance(&a, &a).unwrap(), 0.0);
}

#[test]
fn example_staircase_on_grid() {
    let d = GridDomain::<f64>::spanning(0.0, 0.0, 8.0, 8.0, 9).unwrap();
    let g = from_kappa(&kappa_surface(&staircase_example::<f64>()), 1.0, d).unwrap();
    assert_eq!(g.get(5, 5), 2.0);
    assert_eq!(g.get(7, 6), 3.0);
    assert_eq!(g.get(1, 2), 0.0);
}
