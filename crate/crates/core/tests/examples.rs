use std::f64::consts::FRAC_1_SQRT_2;

use austere_core::c4::{a0, c4_shape_operator, c4_spectrum, isotropy_reflection, NormalDirection};
use austere_core::subspaces::{
    bryant_subspace, dimest_bound, families_for, is_austere_subspace_grid, isotropic_search, predicted_signature,
    witt_bound, BilinearFormSig,
};
use austere_core::{Field, Quaternion};
use nalgebra::DMatrix;

const FIELDS: [Field; 3] = [Field::Real, Field::Complex, Field::Quaternion];

fn direction(a: f64, c: f64) -> NormalDirection {
    NormalDirection {
        a: Quaternion::real(a),
        b: Quaternion::real(0.0),
        c,
        d: 0.0,
    }
}

fn close(x: &[f64], y: &[f64], tol: f64) -> bool {
    x.len() == y.len() && x.iter().zip(y).all(|(a, b)| (a - b).abs() <= tol)
}

#[test]
fn diagonal_normal_has_paired_spectrum() {
    let s = c4_spectrum(&direction(0.0, FRAC_1_SQRT_2), Field::Real).unwrap();
    let h = FRAC_1_SQRT_2;
    assert!(close(&s, &[-h, -h, h, h], 1e-14), "{s:?}");
}

#[test]
fn off_diagonal_and_diagonal_normals_are_isospectral() {
    for f in FIELDS {
        let s = c4_spectrum(&direction(FRAC_1_SQRT_2, 0.0), f).unwrap();
        let t = c4_spectrum(&direction(0.0, FRAC_1_SQRT_2), f).unwrap();
        assert!(close(&s, &t, 1e-13), "{f}: {s:?} vs {t:?}");
        assert!(s.iter().sum::<f64>().abs() < 1e-13);
    }
}

#[test]
fn shape_operator_is_linear_in_the_normal() {
    for f in FIELDS {
        let xi = direction(0.3, -0.8).to_matrix(f).unwrap();
        let eta = NormalDirection {
            a: Quaternion::real(0.0),
            b: Quaternion::new(0.2, 0.0, 0.0, 0.0),
            c: 0.0,
            d: 0.7,
        }
        .to_matrix(f)
        .unwrap();
        let sum = c4_shape_operator(&(&xi + &eta)).unwrap();
        let parts = c4_shape_operator(&xi).unwrap() + c4_shape_operator(&eta).unwrap();
        assert!((sum - parts).amax() < 1e-14);
    }
}

#[test]
fn isotropy_reflection_examples() {
    let p = isotropy_reflection(&direction(1.0, 0.0), Field::Real);
    let expect = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -1.0, 1.0, -1.0]));
    assert!((p.to_real_dmatrix() - expect).amax() < 1e-15);

    let eta = direction(0.0, FRAC_1_SQRT_2);
    let p = isotropy_reflection(&eta, Field::Real).to_real_dmatrix();
    let expect = DMatrix::from_row_slice(
        4,
        4,
        &[0.0, -1.0, 0.0, 0.0, -1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, -1.0],
    );
    assert!((&p - expect).amax() < 1e-15);

    for f in FIELDS {
        let xi = NormalDirection {
            a: Quaternion::real(0.4),
            b: Quaternion::real(-0.5),
            c: 0.6,
            d: 0.1,
        };
        let p = isotropy_reflection(&xi, f);
        let m = xi.to_matrix(f).unwrap();
        let flipped = p.matmul(&m).matmul(&p.adjoint());
        assert!((&flipped + &m).norm() < 1e-14);
        let fixed = p.matmul(&a0(f)).matmul(&p.adjoint());
        assert!((&fixed - &a0(f)).norm() < 1e-14);
    }
}

#[test]
fn small_families_are_austere_by_grid() {
    for n in 2..=4 {
        for fam in families_for(n) {
            let spec = bryant_subspace(&fam, n).unwrap();
            if spec.dim() <= 4 {
                let v = is_austere_subspace_grid(&spec).unwrap();
                assert!(v.austere, "n = {n}, {fam:?}");
                assert_eq!(v.failure_bound, 0.0);
            }
        }
    }
}

#[test]
fn split_form_example() {
    let form = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![1.0, -1.0, 0.0]));
    let sig = BilinearFormSig::of(&form, 1e-12);
    assert_eq!((sig.r, sig.s), (1, 1));
    assert_eq!(witt_bound(sig), 2);
    let w = isotropic_search(&form, 2, 10, 3).unwrap().expect("a 2-dimensional isotropic subspace");
    assert_eq!(w.basis.len(), 2);
    assert!(w.max_form_value < 1e-12);
    assert!(isotropic_search(&form, 3, 50, 3).unwrap().is_none());
}

#[test]
fn bound_values() {
    let got: Vec<usize> = (3..=8).map(|n| dimest_bound(n).unwrap()).collect();
    assert_eq!(got, [3, 6, 8, 12, 15, 20]);
    let s = predicted_signature(5);
    assert_eq!((s.nullity, s.pos_index, s.neg_index), (3, 4, 4));
    let s = predicted_signature(6);
    assert_eq!((s.nullity, s.pos_index, s.neg_index), (5, 6, 6));
}
