use flagf::canonical::{find, generate_f_structures};
use flagf::classify::{
    check_metric_compat, characteristic_set, evaluate, membership, sweep, ClassContext, Grid,
};
use flagf::liealg::bracket;
use flagf::metricgeom::{build_split, u_tensor_closed, MetricParams, TripleSplit};
use flagf::phispace::{build_automorphism, build_phi_space};
use flagf::{CanonicalStructure, CharacteristicSet, ClassCondition, LieElement, UMethod};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn setup(n: usize, k: usize) -> (TripleSplit, Vec<CanonicalStructure>) {
    let ps = build_phi_space(build_automorphism(n, 1, k).unwrap()).unwrap();
    let fs = generate_f_structures(&ps).unwrap();
    (build_split(&ps).unwrap(), fs)
}

fn bm(sp: &TripleSplit, x: &LieElement, y: &LieElement) -> LieElement {
    sp.m().project(&bracket(x, y).unwrap()).unwrap()
}

/// The quadratic form of a condition evaluated directly on `X`.
fn quadratic(
    sp: &TripleSplit,
    p: &MetricParams,
    f: &CanonicalStructure,
    cond: ClassCondition,
    x: &LieElement,
) -> LieElement {
    let fa = |v: &LieElement| f.op().apply(v).unwrap();
    let u = |a: &LieElement, b: &LieElement| u_tensor_closed(sp, p, a, b).unwrap();
    let fx = fa(x);
    let ffx = fa(&fx);
    match cond {
        ClassCondition::Kill => &(&bm(sp, x, &fx).scale(0.5) + &u(x, &fx)) - &fa(&u(x, x)),
        ClassCondition::Nk => &(&bm(sp, &fx, &ffx).scale(0.5) + &u(&fx, &ffx)) - &fa(&u(&fx, &fx)),
        ClassCondition::G1 => {
            let inner = &(&u(&fx, &ffx).scale(2.0) - &fa(&u(&fx, &fx))) + &fa(&u(&ffx, &ffx));
            fa(&inner)
        }
    }
}

#[test]
fn polarization_bounds_direct_quadratic() {
    let (sp, fs) = setup(5, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let d = sp.dim();
    for id in ["f1", "f2", "f4"] {
        let f = find(&fs, id).unwrap();
        let ctx = ClassContext::new(&sp, f).unwrap();
        for (s, t) in [(1.0, 4.0 / 3.0), (2.0, 0.5), (1.0, 2.5)] {
            let p = MetricParams::with_default_kappa(5, s, t).unwrap();
            for cond in ClassCondition::ALL {
                let m = membership(&ctx, &p, cond, UMethod::Closed).unwrap();
                let pair_max = m.residual * ctx.f_norm() * p.residual_scale();
                let mut largest: f64 = 0.0;
                for _ in 0..100 {
                    let c = DVector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
                    let x = sp.from_coords(&c);
                    let q = sp.coords(&quadratic(&sp, &p, f, cond, &x)).unwrap().norm();
                    let l1: f64 = c.iter().map(|v| v.abs()).sum();
                    // ‖Σ x_i x_j C_ij‖ ≤ ½ ‖x‖₁² max‖C_ij + C_ji‖ · √d
                    assert!(q <= 0.5 * l1 * l1 * pair_max * (d as f64).sqrt() + 1e-12);
                    largest = largest.max(q);
                }
                if m.member {
                    assert!(largest < 1e-12, "{id} {cond} ({s},{t})");
                } else {
                    assert!(largest > 1e-6, "{id} {cond} ({s},{t})");
                }
            }
        }
    }
}

#[test]
fn closed_and_solved_u_agree_on_verdicts() {
    let (sp, fs) = setup(6, 6);
    let grid = Grid::new(0.5, 2.5, 0.5, vec![(1.0, 4.0 / 3.0)]).unwrap();
    for f in fs.iter().filter(|f| !f.id().starts_with('-')) {
        let ctx = ClassContext::new(&sp, f).unwrap();
        let a = sweep(&ctx, &grid.points(), 5.0, UMethod::Closed).unwrap();
        let b = sweep(&ctx, &grid.points(), 5.0, UMethod::Solved).unwrap();
        for (x, y) in a.iter().zip(&b) {
            for c in ClassCondition::ALL {
                assert_eq!(x.get(c).member, y.get(c).member);
                assert!((x.get(c).residual - y.get(c).residual).abs() < 1e-8);
            }
        }
    }
}

#[test]
fn memberships_ignore_kappa() {
    let (sp, fs) = setup(5, 4);
    let ctx = ClassContext::new(&sp, find(&fs, "f0").unwrap()).unwrap();
    for (s, t) in [(1.0, 4.0 / 3.0), (1.0, 2.0), (0.7, 1.9)] {
        let p = MetricParams::new(s, t, 4.0).unwrap();
        let a = evaluate(&ctx, &p, UMethod::Closed).unwrap();
        let b = evaluate(&ctx, &p.with_kappa(8.0).unwrap(), UMethod::Closed).unwrap();
        for c in ClassCondition::ALL {
            assert_eq!(a.get(c).member, b.get(c).member);
            assert!((a.get(c).residual - b.get(c).residual).abs() < 1e-12);
        }
    }
}

#[test]
fn normal_metric_nearly_kaehler_term_vanishes() {
    for (k, id) in [(4, "f0"), (6, "f1")] {
        let (sp, fs) = setup(6, k);
        let f = find(&fs, id).unwrap();
        let p = MetricParams::with_default_kappa(6, 1.0, 1.0).unwrap();
        let ctx = ClassContext::new(&sp, f).unwrap();
        assert!(membership(&ctx, &p, ClassCondition::Nk, UMethod::Closed).unwrap().member);
        let basis = sp.m().basis();
        let fa = |v: &LieElement| f.op().apply(v).unwrap();
        for x in basis {
            for y in basis {
                // polarization of ½[fX, f²X]_m
                let a = bm(&sp, &fa(x), &fa(&fa(y)));
                let b = bm(&sp, &fa(y), &fa(&fa(x)));
                assert!((&a + &b).amax() < 1e-12);
            }
        }
    }
}

#[test]
fn nearly_kaehler_line_samples() {
    let (sp, fs) = setup(5, 6);
    let ctx = ClassContext::new(&sp, find(&fs, "f1").unwrap()).unwrap();
    for t in [0.3, 1.0, 4.0 / 3.0, 2.5] {
        let on = MetricParams::with_default_kappa(5, 1.0, t).unwrap();
        assert!(membership(&ctx, &on, ClassCondition::Nk, UMethod::Closed).unwrap().member);
        for s in [0.5, 2.0] {
            let off = MetricParams::with_default_kappa(5, s, t).unwrap();
            let m = membership(&ctx, &off, ClassCondition::Nk, UMethod::Closed).unwrap();
            assert!(m.residual > 1e-3 && m.witness.is_some());
        }
    }
}

#[test]
fn killing_point_found_off_lattice() {
    let (sp, fs) = setup(5, 4);
    let ctx = ClassContext::new(&sp, find(&fs, "f0").unwrap()).unwrap();
    let grid = Grid::new(0.3, 2.7, 0.4, vec![]).unwrap();
    match characteristic_set(&ctx, ClassCondition::Kill, &grid, 4.0, 1e-12, UMethod::Closed).unwrap() {
        CharacteristicSet::Points { points } => {
            assert_eq!(points.len(), 1);
            assert!((points[0].0 - 1.0).abs() < 1e-8 && (points[0].1 - 4.0 / 3.0).abs() < 1e-8);
        }
        other => panic!("{other:?}"),
    }
    match characteristic_set(&ctx, ClassCondition::Nk, &grid, 4.0, 1e-12, UMethod::Closed).unwrap() {
        CharacteristicSet::LineS { s } => assert!((s - 1.0).abs() < 1e-8),
        other => panic!("{other:?}"),
    }
}

#[test]
fn chain_and_compatibility() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for (n, k) in [(4, 4), (5, 6), (7, 6)] {
        let (sp, fs) = setup(n, k);
        for f in &fs {
            let ctx = ClassContext::new(&sp, f).unwrap();
            let reports = sweep(&ctx, &Grid::default_grid().points(), (n - 1) as f64, UMethod::Closed).unwrap();
            assert!(reports.iter().all(|r| r.chain_holds() && !r.any_indeterminate()));
            for _ in 0..5 {
                let p = MetricParams::with_default_kappa(n, rng.random_range(0.1..4.0), rng.random_range(0.1..4.0)).unwrap();
                assert!(check_metric_compat(f, &sp, &p).unwrap().holds);
            }
        }
    }
}
