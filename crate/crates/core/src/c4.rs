//! The critical stratum in size 4: the orbit of `A0 = ½ diag(1, 1, -1, -1)`.
//!
//! Shape operators there are computed from orbit generators: the tangent
//! vector `[A0, W]` comes from the curve `exp(-tW) A0 exp(tW)`, and moving a
//! normal vector `ξ` along that curve gives `S_ξ(V) = -(ξW - Wξ)^T`.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{e_check, e_hat, FMatrix, Field, Quaternion};
use crate::geometry::{pairing_residual, sorted_eigenvalues};
use crate::subspaces::{
    family_contains, is_austere_subspace, is_austere_subspace_grid, BryantFamily, RatMatrix,
    SubspaceSpec, SubspaceVerdict,
};
use crate::tol;

/// Pairs `(i, j)` spanning the tangent space, zero-based.
pub const TANGENT_PAIRS: [(usize, usize); 4] = [(0, 2), (0, 3), (1, 2), (1, 3)];

pub fn a0(field: Field) -> FMatrix {
    FMatrix::diag(field, &[0.5, 0.5, -0.5, -0.5])
}

/// Orthonormal tangent and normal frames at `A0`, with the generator of
/// each tangent vector.
#[derive(Debug, Clone)]
pub struct C4Frame {
    pub field: Field,
    pub a0: FMatrix,
    pub tangent: Vec<FMatrix>,
    pub generators: Vec<FMatrix>,
    pub normal: Vec<FMatrix>,
    pub tangent_labels: Vec<String>,
    pub normal_labels: Vec<String>,
}

fn unit_label(q: Quaternion) -> &'static str {
    if q == Quaternion::I {
        "i"
    } else if q == Quaternion::J {
        "j"
    } else {
        "k"
    }
}

/// Tangent order: `Ê13, Ê14, Ê23, Ê24`, then `qĚ` on the same pairs for each
/// imaginary unit. Normal order: `Ê12, Ê34, η1, η2`, then `qĚ12, qĚ34`.
pub fn c4_frame(field: Field) -> C4Frame {
    let mut tangent = Vec::new();
    let mut generators = Vec::new();
    let mut tangent_labels = Vec::new();
    for &(i, j) in &TANGENT_PAIRS {
        tangent.push(e_hat(field, 4, i, j));
        generators.push(e_check(field, 4, i, j));
        tangent_labels.push(format!("E^{}{}", i + 1, j + 1));
    }
    let mut normal = vec![
        e_hat(field, 4, 0, 1),
        e_hat(field, 4, 2, 3),
        FMatrix::diag(field, &[FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0, 0.0]),
        FMatrix::diag(field, &[0.0, 0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2]),
    ];
    let mut normal_labels: Vec<String> = ["E^12", "E^34", "eta1", "eta2"].map(String::from).to_vec();
    for &q in field.imaginary_units() {
        for &(i, j) in &TANGENT_PAIRS {
            tangent.push(e_check(field, 4, i, j).left_scale(q).with_field(field));
            generators.push(e_hat(field, 4, i, j).left_scale(q).with_field(field));
            tangent_labels.push(format!("{}Ev{}{}", unit_label(q), i + 1, j + 1));
        }
        for (i, j) in [(0, 1), (2, 3)] {
            normal.push(e_check(field, 4, i, j).left_scale(q).with_field(field));
            normal_labels.push(format!("{}Ev{}{}", unit_label(q), i + 1, j + 1));
        }
    }
    C4Frame {
        field,
        a0: a0(field),
        tangent,
        generators,
        normal,
        tangent_labels,
        normal_labels,
    }
}

/// A normal vector at `A0`: `[[c, a], [ā, -c]] ⊕ [[d, b], [b̄, -d]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalDirection {
    pub a: Quaternion,
    pub b: Quaternion,
    pub c: f64,
    pub d: f64,
}

impl NormalDirection {
    pub fn to_matrix(&self, field: Field) -> Result<FMatrix> {
        if self.a.excess_over(field) > 0.0 || self.b.excess_over(field) > 0.0 {
            return Err(Error::Mismatch(format!(
                "normal direction has entries outside {field}"
            )));
        }
        let mut m = FMatrix::zeros(field, 4);
        m.set(0, 0, Quaternion::real(self.c));
        m.set(1, 1, Quaternion::real(-self.c));
        m.set(0, 1, self.a);
        m.set(1, 0, self.a.conj());
        m.set(2, 2, Quaternion::real(self.d));
        m.set(3, 3, Quaternion::real(-self.d));
        m.set(2, 3, self.b);
        m.set(3, 2, self.b.conj());
        Ok(m)
    }

    pub fn from_matrix(xi: &FMatrix) -> Result<Self> {
        check_normal(xi)?;
        Ok(NormalDirection {
            a: xi.get(0, 1),
            b: xi.get(2, 3),
            c: xi.get(0, 0).w,
            d: xi.get(2, 2).w,
        })
    }

    /// Gaussian coefficients on the normal frame, normalized.
    pub fn random<R: rand::Rng + ?Sized>(field: Field, rng: &mut R) -> Result<Self> {
        let frame = c4_frame(field);
        let mut xi = FMatrix::zeros(field, 4);
        for v in &frame.normal {
            let g: f64 = StandardNormal.sample(rng);
            xi = xi.axpy(g, v);
        }
        let norm = xi.norm();
        NormalDirection::from_matrix(&xi.scale(1.0 / norm))
    }
}

/// Errors unless `ξ` is a nonzero normal vector to the orbit at `A0`.
fn check_normal(xi: &FMatrix) -> Result<()> {
    if xi.n() != 4 {
        return Err(Error::domain(format!("need a 4x4 matrix, got {}x{}", xi.n(), xi.n())));
    }
    let r = xi.hermitian_residual();
    if r > tol::STRUCTURAL {
        return Err(Error::NotHermitian { residual: r });
    }
    let frame = c4_frame(xi.field());
    let scale = xi.norm().max(f64::MIN_POSITIVE);
    let off = frame
        .tangent
        .iter()
        .chain(std::iter::once(&frame.a0))
        .map(|t| xi.inner(t).abs())
        .fold(xi.re_trace().abs(), f64::max);
    if off > tol::STRUCTURAL * scale.max(1.0) {
        return Err(Error::domain(format!(
            "not a normal vector at A0: tangential or radial part {off:.3e}"
        )));
    }
    if xi.norm() < tol::STRUCTURAL {
        return Err(Error::domain("zero normal vector"));
    }
    Ok(())
}

/// Matrix of `S_ξ` in the tangent frame, `M_ij = <S_ξ(e_j), e_i>`.
pub fn c4_shape_operator(xi: &FMatrix) -> Result<DMatrix<f64>> {
    check_normal(xi)?;
    let frame = c4_frame(xi.field());
    let images: Vec<FMatrix> = frame
        .generators
        .iter()
        .map(|w| (&xi.matmul(w) - &w.matmul(xi)).scale(-1.0))
        .collect();
    let d = frame.tangent.len();
    Ok(DMatrix::from_fn(d, d, |i, j| images[j].inner(&frame.tangent[i])))
}

/// Ascending eigenvalues of `S_ξ`.
pub fn c4_spectrum(xi: &NormalDirection, field: Field) -> Result<Vec<f64>> {
    Ok(sorted_eigenvalues(&c4_shape_operator(&xi.to_matrix(field)?)?))
}

fn reflection_block(x: f64, y: f64) -> [[f64; 2]; 2] {
    let r = x.hypot(y);
    if r < 1e-12 {
        [[1.0, 0.0], [0.0, -1.0]]
    } else {
        [[x / r, -y / r], [-y / r, -x / r]]
    }
}

/// Orthogonal `P` fixing `A0` with `P ξ P^T = -ξ`.
pub fn isotropy_reflection(xi: &NormalDirection, field: Field) -> FMatrix {
    let p1 = reflection_block(xi.a.w, xi.c);
    let p2 = reflection_block(xi.b.w, xi.d);
    let mut m = FMatrix::zeros(field, 4);
    for i in 0..2 {
        for j in 0..2 {
            m.set(i, j, Quaternion::real(p1[i][j]));
            m.set(2 + i, 2 + j, Quaternion::real(p2[i][j]));
        }
    }
    m
}

/// Exact form of the reflection identity for one block: with
/// `Q = [[x, -y], [-y, -x]]`, `Q S Q = -(x²+y²) S` for `S = [[y, x], [x, -y]]`
/// and `Q J Q = -(x²+y²) J` for `J = [[0, 1], [-1, 0]]`.
pub fn reflection_identity_exact(x: &BigRational, y: &BigRational) -> bool {
    let q = [[x.clone(), -y.clone()], [-y.clone(), -x.clone()]];
    let s = [[y.clone(), x.clone()], [x.clone(), -y.clone()]];
    let one = BigRational::one();
    let zero = BigRational::zero();
    let j = [[zero.clone(), one.clone()], [-one, zero]];
    let mul = |a: &[[BigRational; 2]; 2], b: &[[BigRational; 2]; 2]| {
        let mut out: [[BigRational; 2]; 2] = Default::default();
        for (r, row) in out.iter_mut().enumerate() {
            for (c, v) in row.iter_mut().enumerate() {
                *v = &a[r][0] * &b[0][c] + &a[r][1] * &b[1][c];
            }
        }
        out
    };
    let r2 = x * x + y * y;
    [s, j].iter().all(|m| {
        let lhs = mul(&mul(&q, m), &q);
        (0..2).all(|r| (0..2).all(|c| lhs[r][c] == -(&r2 * &m[r][c])))
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct C4AusterityReport {
    pub field: Field,
    pub trials: usize,
    pub max_pairing_residual: f64,
    /// `max ‖P ξ P^T + ξ‖ + ‖P A0 P^T - A0‖`.
    pub max_reflection_residual: f64,
    pub austere: bool,
}

/// Random unit normals: spectra must be symmetric under negation.
pub fn verify_c4_austere(field: Field, trials: usize, seed: u64) -> Result<C4AusterityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = a0(field);
    let mut max_pairing_residual: f64 = 0.0;
    let mut max_reflection_residual: f64 = 0.0;
    for _ in 0..trials {
        let dir = NormalDirection::random(field, &mut rng)?;
        let xi = dir.to_matrix(field)?;
        let eig = sorted_eigenvalues(&c4_shape_operator(&xi)?);
        max_pairing_residual = max_pairing_residual.max(pairing_residual(&eig));
        let p = isotropy_reflection(&dir, field);
        let pt = p.adjoint();
        let r = (&xi.conjugate_by(&pt) + &xi).norm() + (&a.conjugate_by(&pt) - &a).norm();
        max_reflection_residual = max_reflection_residual.max(r);
    }
    Ok(C4AusterityReport {
        field,
        trials,
        max_pairing_residual,
        max_reflection_residual,
        austere: max_pairing_residual <= tol::PAIRING && max_reflection_residual <= tol::STRUCTURAL,
    })
}

/// The real orthogonal change of basis that exposes the block pattern.
pub fn pattern_conjugator_real() -> DMatrix<f64> {
    DMatrix::from_row_slice(
        4,
        4,
        &[
            1.0, 0.0, 0.0, 1.0, //
            0.0, -1.0, 1.0, 0.0, //
            0.0, 1.0, 1.0, 0.0, //
            1.0, 0.0, 0.0, -1.0,
        ],
    ) * FRAC_1_SQRT_2
}

/// Block permutation (3, 2, 1, 4) of 2x2 blocks times `diag(P, P)`.
pub fn pattern_conjugator_complex() -> DMatrix<f64> {
    let p = pattern_conjugator_real();
    let mut dp = DMatrix::zeros(8, 8);
    dp.view_mut((0, 0), (4, 4)).copy_from(&p);
    dp.view_mut((4, 4), (4, 4)).copy_from(&p);
    let order = [2, 1, 0, 3];
    let mut perm = DMatrix::zeros(8, 8);
    for (bi, &bj) in order.iter().enumerate() {
        for t in 0..2 {
            perm[(2 * bi + t, 2 * bj + t)] = 1.0;
        }
    }
    perm * dp
}

/// The expected sparsity pattern, rebuilt from the free entries of `m`.
fn pattern_template(m: &DMatrix<f64>) -> DMatrix<f64> {
    if m.nrows() == 4 {
        let (a, c, d, b) = (m[(0, 2)], m[(0, 3)], m[(1, 2)], m[(1, 3)]);
        DMatrix::from_row_slice(
            4,
            4,
            &[0.0, 0.0, a, c, 0.0, 0.0, d, b, a, d, 0.0, 0.0, c, b, 0.0, 0.0],
        )
    } else {
        let (e, a, c) = (m[(0, 5)], m[(0, 6)], m[(0, 7)]);
        let (d, b, f) = (m[(1, 6)], m[(1, 7)], m[(2, 7)]);
        let block = DMatrix::from_row_slice(
            4,
            4,
            &[0.0, e, a, c, -e, 0.0, d, b, a, d, 0.0, f, c, b, -f, 0.0],
        );
        let mut t = DMatrix::zeros(8, 8);
        t.view_mut((0, 4), (4, 4)).copy_from(&block);
        t.view_mut((4, 0), (4, 4)).copy_from(&block.transpose());
        t
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BryantCheck {
    pub field: Field,
    pub dim: usize,
    /// Conjugated shape operators, scaled by `√2` and rounded to integers.
    pub conjugated: Vec<Vec<Vec<i64>>>,
    pub max_pattern_residual: f64,
    pub rounding_error: f64,
    pub family: BryantFamily,
    pub family_size: usize,
    pub in_family: bool,
    pub randomized: SubspaceVerdict,
    /// Deterministic grid verdict, when the dimension allows it.
    pub grid: Option<SubspaceVerdict>,
}

impl BryantCheck {
    pub fn passed(&self) -> bool {
        self.max_pattern_residual <= 1e-12
            && self.rounding_error <= 1e-9
            && self.in_family
            && self.randomized.austere
            && self.grid.as_ref().is_none_or(|g| g.austere)
    }
}

/// Conjugates the shape operators of the normal frame into block form
/// (`Q S Q^T`), checks the pattern, and tests the resulting subspace exactly.
pub fn bryant_normal_form_check(field: Field, trials: usize, seed: u64) -> Result<BryantCheck> {
    let q = match field {
        Field::Real => pattern_conjugator_real(),
        Field::Complex => pattern_conjugator_complex(),
        Field::Quaternion => {
            return Err(Error::domain("the block pattern is stated over R and C only"));
        }
    };
    let frame = c4_frame(field);
    let size = q.nrows();
    let mut max_pattern_residual: f64 = 0.0;
    let mut rounding_error: f64 = 0.0;
    let mut basis = Vec::new();
    let mut conjugated = Vec::new();
    for xi in &frame.normal {
        let m = &q * c4_shape_operator(xi)? * q.transpose();
        max_pattern_residual = max_pattern_residual.max((&m - pattern_template(&m)).amax());
        let scaled = &m * std::f64::consts::SQRT_2;
        let (r, err) = RatMatrix::round_from(&scaled, 1);
        rounding_error = rounding_error.max(err);
        conjugated.push(
            (0..size)
                .map(|i| (0..size).map(|j| scaled[(i, j)].round() as i64).collect())
                .collect(),
        );
        basis.push(r);
    }
    let spec = SubspaceSpec::new(size, basis)?;
    let family = BryantFamily::LambdaBlock;
    let in_family = spec
        .basis
        .iter()
        .map(|b| family_contains(&family, size, b))
        .collect::<Result<Vec<bool>>>()?
        .into_iter()
        .all(|x| x);
    let grid = if spec.dim() <= 4 {
        Some(is_austere_subspace_grid(&spec)?)
    } else {
        None
    };
    Ok(BryantCheck {
        field,
        dim: spec.dim(),
        conjugated,
        max_pattern_residual,
        rounding_error,
        family,
        family_size: size,
        in_family,
        randomized: is_austere_subspace(&spec, trials, seed),
        grid,
    })
}

/// Rational `p/q`, for callers building exact inputs.
pub fn ratio(p: i64, q: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(q))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn s_mat(rows: [[f64; 4]; 4], s: f64) -> DMatrix<f64> {
        DMatrix::from_fn(4, 4, |i, j| rows[i][j] * s)
    }

    fn displayed_real() -> Vec<DMatrix<f64>> {
        let s = FRAC_1_SQRT_2;
        vec![
            s_mat([[0., 0., 1., 0.], [0., 0., 0., 1.], [1., 0., 0., 0.], [0., 1., 0., 0.]], -s),
            s_mat([[0., 1., 0., 0.], [1., 0., 0., 0.], [0., 0., 0., 1.], [0., 0., 1., 0.]], s),
            s_mat([[1., 0., 0., 0.], [0., 1., 0., 0.], [0., 0., -1., 0.], [0., 0., 0., -1.]], -s),
            s_mat([[1., 0., 0., 0.], [0., -1., 0., 0.], [0., 0., 1., 0.], [0., 0., 0., -1.]], s),
            s_mat([[0., 0., 1., 0.], [0., 0., 0., 1.], [-1., 0., 0., 0.], [0., -1., 0., 0.]], s),
            s_mat([[0., 1., 0., 0.], [-1., 0., 0., 0.], [0., 0., 0., 1.], [0., 0., -1., 0.]], s),
        ]
    }

    #[test]
    fn frame_sizes() {
        for (f, t, n) in [(Field::Real, 4, 4), (Field::Complex, 8, 6), (Field::Quaternion, 16, 10)] {
            let fr = c4_frame(f);
            assert_eq!((fr.tangent.len(), fr.normal.len()), (t, n));
            let all: Vec<&FMatrix> = fr.tangent.iter().chain(&fr.normal).chain([&fr.a0]).collect();
            for (i, x) in all.iter().enumerate() {
                for (j, y) in all.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((x.inner(y) - want).abs() < 1e-14, "{f} {i} {j}");
                }
            }
            for (v, w) in fr.tangent.iter().zip(&fr.generators) {
                assert!((&fr.a0.commutator(w) - v).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn matches_displayed_representations() {
        let a = displayed_real();
        let real = c4_frame(Field::Real);
        for (xi, want) in real.normal.iter().zip(&a[..4]) {
            let got = c4_shape_operator(xi).unwrap();
            assert!((&got - want).amax() < 1e-12, "{got}{want}");
        }
        let cx = c4_frame(Field::Complex);
        let block = |m: &DMatrix<f64>, off: bool| {
            let mut out = DMatrix::zeros(8, 8);
            if off {
                out.view_mut((0, 4), (4, 4)).copy_from(m);
                out.view_mut((4, 0), (4, 4)).copy_from(&-m);
            } else {
                out.view_mut((0, 0), (4, 4)).copy_from(m);
                out.view_mut((4, 4), (4, 4)).copy_from(m);
            }
            out
        };
        let want: Vec<DMatrix<f64>> = (0..6).map(|i| block(&a[i], i >= 4)).collect();
        for (k, xi) in cx.normal.iter().enumerate() {
            let got = c4_shape_operator(xi).unwrap();
            assert!((&got - &want[k]).amax() < 1e-12, "B{}: {got}", k + 1);
        }
    }

    #[test]
    fn rejects_non_normal() {
        let fr = c4_frame(Field::Real);
        assert!(c4_shape_operator(&fr.tangent[0]).is_err());
        assert!(c4_shape_operator(&fr.a0).is_err());
        assert!(c4_shape_operator(&FMatrix::zeros(Field::Real, 4)).is_err());
        let odd = NormalDirection { a: Quaternion::I, b: Quaternion::ZERO, c: 0.0, d: 0.0 };
        assert!(odd.to_matrix(Field::Real).is_err());
    }

    #[test]
    fn spectra_symmetric() {
        for f in Field::ALL {
            let r = verify_c4_austere(f, 200, 3).unwrap();
            assert!(r.austere, "{r:?}");
        }
        let e = c4_spectrum(
            &NormalDirection { a: Quaternion::real(FRAC_1_SQRT_2), b: Quaternion::ZERO, c: 0.0, d: 0.0 },
            Field::Real,
        )
        .unwrap();
        assert!((e[0] + FRAC_1_SQRT_2).abs() < 1e-12 && (e[3] - FRAC_1_SQRT_2).abs() < 1e-12);
    }

    #[test]
    fn degenerate_reflection() {
        let dir = NormalDirection { a: Quaternion::I, b: Quaternion::ZERO, c: 0.0, d: 0.5 };
        let p = isotropy_reflection(&dir, Field::Complex);
        let xi = dir.to_matrix(Field::Complex).unwrap();
        assert!((&xi.conjugate_by(&p.adjoint()) + &xi).norm() < 1e-14);
    }

    #[test]
    fn block_patterns() {
        for (f, dim) in [(Field::Real, 4), (Field::Complex, 6)] {
            let c = bryant_normal_form_check(f, 200, 1).unwrap();
            assert_eq!(c.dim, dim);
            assert!(c.passed(), "{f}: {c:?}");
        }
        assert!(bryant_normal_form_check(Field::Quaternion, 1, 1).is_err());
    }

    proptest! {
        #[test]
        fn reflection_exact(x in -40i64..40, y in -40i64..40, q in 1i64..30) {
            prop_assert!(reflection_identity_exact(&ratio(x, q), &ratio(y, q)));
        }
    }
}
