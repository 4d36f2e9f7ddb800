use flagf::liealg::bracket;
use flagf::metricgeom::{
    build_split, check_naturally_reductive, check_naturally_reductive_within, metric_eval, nomizu,
    u_tensor_closed, u_tensor_solved, BilinearMap, Block, MetricParams, TripleSplit,
};
use flagf::phispace::{build_automorphism, build_phi_space};
use flagf::{LieElement, UMethod};
use nalgebra::DVector;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn split(n: usize, k: usize) -> TripleSplit {
    build_split(&build_phi_space(build_automorphism(n, 1, k).unwrap()).unwrap()).unwrap()
}

fn random_m(split: &TripleSplit, rng: &mut ChaCha8Rng) -> LieElement {
    split.from_coords(&DVector::from_fn(split.dim(), |_, _| rng.random_range(-1.0..1.0)))
}

fn bracket_m(split: &TripleSplit, x: &LieElement, y: &LieElement) -> LieElement {
    split.m().project(&bracket(x, y).unwrap()).unwrap()
}

#[test]
fn block_structure() {
    for n in 4..=8 {
        let sp = split(n, 4);
        assert_eq!(sp.dims(), (2, 2 * (n - 3), n - 3));
        assert!(sp.orthogonality_residual().unwrap() < 1e-12);
        assert!(sp.bracket_relation_residual().unwrap() < 1e-10);
        assert!(sp.invariance_residual().unwrap() < 1e-10);
    }
}

#[test]
fn split_does_not_depend_on_order() {
    let a = split(6, 4);
    let b = split(6, 6);
    for blk in Block::ALL {
        for v in a.part(blk).basis() {
            assert!(b.part(blk).contains(v).unwrap());
        }
    }
}

#[test]
fn u_closed_matches_solved_on_grid() {
    let sp = split(6, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for i in 0..5 {
        for j in 0..5 {
            let (s, t) = (0.3 + 0.6 * i as f64, 0.3 + 0.6 * j as f64);
            let p = MetricParams::with_default_kappa(6, s, t).unwrap();
            let c = BilinearMap::u_closed(&sp, &p).unwrap();
            let v = BilinearMap::u_solved(&sp, &p).unwrap();
            assert!(c.max_diff(&v) < 1e-12);
            for _ in 0..3 {
                let x = random_m(&sp, &mut rng);
                let y = random_m(&sp, &mut rng);
                let a = u_tensor_closed(&sp, &p, &x, &y).unwrap();
                let b = u_tensor_solved(&sp, &p, &x, &y).unwrap();
                assert!((&a - &b).amax() < 1e-12);
            }
        }
    }
}

#[test]
fn u_satisfies_its_defining_identity() {
    // 2 g(U(X,Y), Z) = g(X, [Z,Y]_m) + g([Z,X]_m, Y)
    let sp = split(5, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (s, t) in [(0.5, 2.0), (1.7, 0.4), (3.0, 3.0)] {
        let p = MetricParams::with_default_kappa(5, s, t).unwrap();
        for _ in 0..10 {
            let (x, y, z) = (random_m(&sp, &mut rng), random_m(&sp, &mut rng), random_m(&sp, &mut rng));
            let u = u_tensor_closed(&sp, &p, &x, &y).unwrap();
            let lhs = 2.0 * metric_eval(&sp, &p, &u, &z).unwrap();
            let rhs = metric_eval(&sp, &p, &x, &bracket_m(&sp, &z, &y)).unwrap()
                + metric_eval(&sp, &p, &bracket_m(&sp, &z, &x), &y).unwrap();
            assert!((lhs - rhs).abs() < 1e-11, "{lhs} vs {rhs}");
        }
    }
}

#[test]
fn u_vanishes_only_at_normal_metric() {
    let sp = split(6, 4);
    let p = MetricParams::with_default_kappa(6, 1.0, 1.0).unwrap();
    assert!(BilinearMap::u_solved(&sp, &p).unwrap().amax() < 1e-12);
    for (s, t) in [(1.0, 1.1), (0.9, 1.0), (2.0, 2.0), (0.5, 3.0)] {
        let p = MetricParams::with_default_kappa(6, s, t).unwrap();
        assert!(BilinearMap::u_solved(&sp, &p).unwrap().amax() > 1e-3, "({s}, {t})");
    }
}

#[test]
fn u_is_symmetric_and_kappa_free() {
    let sp = split(5, 6);
    let p = MetricParams::new(1.3, 0.6, 4.0).unwrap();
    let u = BilinearMap::u_solved(&sp, &p).unwrap();
    let u2 = BilinearMap::u_solved(&sp, &p.with_kappa(8.0).unwrap()).unwrap();
    assert!(u.max_diff(&u2) < 1e-13);
    for i in 0..sp.dim() {
        for j in 0..sp.dim() {
            assert!((u.eval_basis(i, j) - u.eval_basis(j, i)).amax() < 1e-13);
        }
    }
}

#[test]
fn nomizu_is_metric_and_torsion_free() {
    let sp = split(6, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..10 {
        let p = MetricParams::with_default_kappa(6, rng.random_range(0.25..3.0), rng.random_range(0.25..3.0)).unwrap();
        let (x, y, z) = (random_m(&sp, &mut rng), random_m(&sp, &mut rng), random_m(&sp, &mut rng));
        let axy = nomizu(&sp, &p, &x, &y, UMethod::Solved).unwrap();
        let axz = nomizu(&sp, &p, &x, &z, UMethod::Solved).unwrap();
        let compat = metric_eval(&sp, &p, &axy, &z).unwrap() + metric_eval(&sp, &p, &y, &axz).unwrap();
        assert!(compat.abs() < 1e-10);
        let ayx = nomizu(&sp, &p, &y, &x, UMethod::Solved).unwrap();
        assert!((&(&axy - &ayx) - &bracket_m(&sp, &x, &y)).amax() < 1e-12);
    }
}

#[test]
fn natural_reductivity() {
    for n in [4, 6] {
        let sp = split(n, 4);
        let at = |s, t| check_naturally_reductive(&sp, &MetricParams::with_default_kappa(n, s, t).unwrap()).unwrap();
        assert!(at(1.0, 1.0).holds);
        assert!(at(2.0, 1.0).residual > 1e-3);
        assert!(at(1.0, 2.0).residual > 1e-3);
        let p = MetricParams::with_default_kappa(n, 2.0, 0.5).unwrap();
        for b in Block::ALL {
            assert!(check_naturally_reductive_within(&sp, &p, b).unwrap().holds);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn metric_scales_with_kappa(s in 0.2f64..4.0, t in 0.2f64..4.0, kappa in 0.1f64..10.0, seed in 0u64..1000) {
        let sp = split(5, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, y) = (random_m(&sp, &mut rng), random_m(&sp, &mut rng));
        let p = MetricParams::new(s, t, kappa).unwrap();
        let g1 = metric_eval(&sp, &p, &x, &y).unwrap();
        let g2 = metric_eval(&sp, &p.with_kappa(2.0 * kappa).unwrap(), &x, &y).unwrap();
        prop_assert!((g2 - 2.0 * g1).abs() < 1e-10 * (1.0 + g1.abs()));
        prop_assert!(metric_eval(&sp, &p, &x, &x).unwrap() > 0.0);
    }
}

#[test]
fn rejects_non_positive_parameters() {
    assert!(MetricParams::new(0.0, 1.0, 1.0).is_err());
    assert!(MetricParams::new(1.0, -1.0, 1.0).is_err());
    assert!(MetricParams::new(1.0, 1.0, 0.0).is_err());
    let sp = split(5, 4);
    let outside = &LieElement::elementary(5, 1, 2) + &LieElement::elementary(5, 0, 1);
    assert!(sp.coords(&outside).is_err());
}
