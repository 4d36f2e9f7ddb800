use flagf::liealg::{
    bracket, image_basis, kernel_basis, rank, so_basis, so_dim, trace_form, EndoOnM, Subspace,
};
use flagf::LieElement;
use nalgebra::DMatrix;
use proptest::prelude::*;

fn skew(n: usize) -> impl Strategy<Value = LieElement> {
    prop::collection::vec(-2.0f64..2.0, n * n)
        .prop_map(move |v| LieElement::skew_part(&DMatrix::from_vec(n, n, v)))
}

fn triple() -> impl Strategy<Value = (LieElement, LieElement, LieElement)> {
    (3usize..7).prop_flat_map(|n| (skew(n), skew(n), skew(n)))
}

proptest! {
    #[test]
    fn jacobi_identity((x, y, z) in triple()) {
        let a = bracket(&x, &bracket(&y, &z).unwrap()).unwrap();
        let b = bracket(&y, &bracket(&z, &x).unwrap()).unwrap();
        let c = bracket(&z, &bracket(&x, &y).unwrap()).unwrap();
        prop_assert!((&(&a + &b) + &c).amax() < 1e-12);
    }

    #[test]
    fn trace_form_is_ad_invariant((x, y, z) in triple()) {
        let lhs = trace_form(&bracket(&x, &y).unwrap(), &z).unwrap();
        let rhs = trace_form(&x, &bracket(&y, &z).unwrap()).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-11);
    }

    #[test]
    fn rank_nullity(rows in 2usize..7, cols in 2usize..7, r in 0usize..4,
                    seed in prop::collection::vec(-1.0f64..1.0, 7 * 4 + 4 * 7)) {
        // a product of thin factors has rank at most r
        let r = r.min(rows).min(cols);
        let a = DMatrix::from_fn(rows, r, |i, j| seed[i * 4 + j]);
        let b = DMatrix::from_fn(r, cols, |i, j| seed[28 + i * 7 + j]);
        let m = &a * &b;
        let k = kernel_basis(&m);
        let im = image_basis(&m);
        prop_assert_eq!(k.ncols() + rank(&m), cols);
        prop_assert_eq!(im.ncols(), rank(&m));
        prop_assert!((&m * &k).amax() < 1e-9);
        prop_assert!(rank(&m) <= r);
    }

    #[test]
    fn reorthonormalize_is_idempotent(n in 3usize..6, picks in prop::collection::vec(0usize..15, 1..5),
                                      noise in prop::collection::vec(-1.0f64..1.0, 5)) {
        let basis = so_basis(n);
        let vectors: Vec<LieElement> = picks
            .iter()
            .zip(&noise)
            .map(|(&p, &c)| &basis[p % basis.len()] + &basis[(p + 1) % basis.len()].scale(c))
            .collect();
        let sub = Subspace::span(n, &vectors).unwrap();
        let once = sub.reorthonormalize().unwrap();
        let twice = once.reorthonormalize().unwrap();
        prop_assert_eq!(once.dim(), sub.dim());
        prop_assert!(once.orthonormality_defect() < 1e-12);
        for v in twice.basis() {
            prop_assert!(once.contains(v).unwrap());
        }
        for v in &vectors {
            prop_assert!(sub.contains(v).unwrap());
        }
    }
}

#[test]
fn basis_is_trace_orthonormal() {
    for n in 2..7 {
        let b = so_basis(n);
        assert_eq!(b.len(), so_dim(n));
        for (i, x) in b.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                let expect = if i == j { 1.0 } else { 0.0 };
                assert!((trace_form(x, y).unwrap() - expect).abs() < 1e-15);
            }
        }
    }
}

#[test]
fn polynomial_matches_repeated_application() {
    let n = 4;
    let full = Subspace::full(n);
    let rot = LieElement::elementary(n, 0, 1);
    // ad(rot) on so(4)
    let ad = EndoOnM::from_fn(full.clone(), |x| bracket(&rot, x)).unwrap();
    let x = &LieElement::elementary(n, 0, 2) + &LieElement::elementary(n, 1, 3).scale(0.5);
    let p = ad.polynomial(&[1.0, -2.0, 0.5]);
    let ax = ad.apply(&x).unwrap();
    let aax = ad.apply(&ax).unwrap();
    let direct = &(&x + &ax.scale(-2.0)) + &aax.scale(0.5);
    assert!((&p.apply(&x).unwrap() - &direct).amax() < 1e-14);
}

#[test]
fn non_skew_input_is_rejected() {
    let mut m = DMatrix::zeros(3, 3);
    m[(0, 1)] = 1.0;
    assert!(LieElement::new(m).is_err());
}
