//! Power-trace functionals, their gradients and Hessians, the odd trace map
//! and its Gram determinant.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{balanced_normal_form, half_index, FMatrix};
use crate::tol;

/// `tr A^k`, real for Hermitian `A`.
pub fn trace_power(a: &FMatrix, k: usize) -> f64 {
    a.pow(k).re_trace()
}

/// Fails unless `a` is traceless with unit norm.
pub fn check_on_sphere(a: &FMatrix) -> Result<()> {
    let tr = a.trace().norm();
    let dn = (a.norm_sqr() - 1.0).abs();
    if tr > tol::STRUCTURAL || dn > tol::STRUCTURAL {
        return Err(Error::NotOnSphere(format!(
            "|tr A| = {tr:.3e}, ||A||^2 - 1 = {dn:.3e}"
        )));
    }
    Ok(())
}

/// Fails unless `x` is traceless and orthogonal to `a`.
pub fn check_tangent(a: &FMatrix, x: &FMatrix) -> Result<()> {
    let scale = x.norm().max(1.0);
    let tr = x.trace().norm();
    let ip = a.inner(x).abs();
    if tr > tol::STRUCTURAL * scale || ip > tol::STRUCTURAL * scale {
        return Err(Error::NotTangent(format!("|tr X| = {tr:.3e}, <X, A> = {ip:.3e}")));
    }
    Ok(())
}

/// `cos t A + sin t X`, the great circle leaving `a` in the unit direction `x`.
pub fn great_circle(a: &FMatrix, x: &FMatrix, t: f64) -> FMatrix {
    a.scale(t.cos()).axpy(t.sin(), x)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GradientReport {
    pub k: usize,
    pub at: FMatrix,
    pub grad_e: FMatrix,
    pub grad_s: FMatrix,
    pub norm_s: f64,
}

fn grad_from_powers(powers: &[FMatrix], k: usize, sphere: bool) -> FMatrix {
    let a = &powers[1];
    let n = a.n() as f64;
    let mut g = powers[k - 1].axpy(-powers[k - 1].re_trace() / n, &FMatrix::identity(a.field(), a.n()));
    if sphere {
        g = g.axpy(-powers[k].re_trace(), a);
    }
    g.scale(k as f64)
}

/// Gradient of `F_k = tr A^k` on the traceless matrices.
pub fn grad_euclid(a: &FMatrix, k: usize) -> FMatrix {
    assert!(k >= 1, "k must be positive");
    grad_from_powers(&a.powers(k), k, false)
}

/// Gradients of `f_k` on the unit sphere and of `F_k` on the ambient space.
pub fn grad_sphere(a: &FMatrix, k: usize) -> Result<GradientReport> {
    if k == 0 {
        return Err(Error::domain("k must be positive"));
    }
    check_on_sphere(a)?;
    let powers = a.powers(k);
    let grad_s = grad_from_powers(&powers, k, true);
    Ok(GradientReport {
        k,
        at: a.clone(),
        grad_e: grad_from_powers(&powers, k, false),
        norm_s: grad_s.norm(),
        grad_s,
    })
}

/// Riemannian Hessian of `f_k` on the sphere, evaluated on tangent `x`, `y`.
pub fn hessian_sphere(a: &FMatrix, k: usize, x: &FMatrix, y: &FMatrix) -> Result<f64> {
    if k == 0 {
        return Err(Error::domain("k must be positive"));
    }
    check_on_sphere(a)?;
    check_tangent(a, x)?;
    check_tangent(a, y)?;
    let powers = a.powers(k);
    let kf = k as f64;
    let mut d2 = 0.0;
    for l in 0..k.saturating_sub(1) {
        d2 += x.matmul(&powers[l]).inner(&powers[k - l - 2].matmul(y));
    }
    Ok(kf * d2 - kf * powers[k].re_trace() * x.inner(y))
}

/// `(f3, f5, ..., f(2p+1))`.
pub fn phi_map(a: &FMatrix) -> Result<Vec<f64>> {
    check_on_sphere(a)?;
    let half = half_index(a.n());
    let powers = a.powers(2 * half + 1);
    Ok((1..=half).map(|al| powers[2 * al + 1].re_trace()).collect())
}

/// Spherical gradients of `f3, ..., f(2p+1)`.
pub fn odd_gradients(a: &FMatrix) -> Result<Vec<FMatrix>> {
    check_on_sphere(a)?;
    let half = half_index(a.n());
    let powers = a.powers(2 * half + 1);
    Ok((1..=half)
        .map(|al| grad_from_powers(&powers, 2 * al + 1, true))
        .collect())
}

/// Gram matrix `<grad f(2α+1), grad f(2β+1)>`.
pub fn gram_matrix(a: &FMatrix) -> Result<DMatrix<f64>> {
    let g = odd_gradients(a)?;
    Ok(DMatrix::from_fn(g.len(), g.len(), |i, j| g[i].inner(&g[j])))
}

/// Determinant of `[λ_j^(2i)]`, rows `i = 0..=p`.
pub fn vandermonde_det(lambdas: &[f64]) -> f64 {
    let q = lambdas.len();
    DMatrix::from_fn(q, q, |i, j| lambdas[j].powi(2 * i as i32)).determinant()
}

/// `prod_{i<j} (λ_j^2 - λ_i^2)`.
pub fn vandermonde_product(lambdas: &[f64]) -> f64 {
    let mut prod = 1.0;
    for i in 0..lambdas.len() {
        for j in i + 1..lambdas.len() {
            prod *= lambdas[j].powi(2) - lambdas[i].powi(2);
        }
    }
    prod
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Regular,
    Critical,
    Indeterminate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RegularityVerdict {
    pub at: FMatrix,
    pub phi_values: Vec<f64>,
    pub gram_det: f64,
    /// `det G / prod G_αα`, in `[0, 1]`.
    pub gram_ratio: f64,
    pub lambdas: Vec<f64>,
    /// Smallest gap between distinct `λ_i^2`.
    pub lambda_gap: f64,
    pub gram_verdict: Verdict,
    pub lambda_verdict: Verdict,
    pub verdict: Verdict,
    pub is_regular: bool,
}

/// Normalized Gram ratio; 1 when there are no odd constraints.
pub fn gram_ratio(g: &DMatrix<f64>) -> f64 {
    if g.nrows() == 0 {
        return 1.0;
    }
    let diag: f64 = g.diagonal().iter().product();
    if diag <= f64::MIN_POSITIVE {
        return 0.0;
    }
    (g.determinant() / diag).clamp(0.0, 1.0)
}

fn classify(value: f64, regular_above: f64, critical_below: f64) -> Verdict {
    if value > regular_above {
        Verdict::Regular
    } else if value < critical_below {
        Verdict::Critical
    } else {
        Verdict::Indeterminate
    }
}

/// Regular/critical classification of a zero of the odd trace map, decided
/// both by the Gram determinant and by distinctness of the `λ_i`.
pub fn gram_regularity(a: &FMatrix) -> Result<RegularityVerdict> {
    let phi_values = phi_map(a)?;
    let form = balanced_normal_form(a)?;
    let g = gram_matrix(a)?;
    let gram_det = if g.nrows() == 0 { 1.0 } else { g.determinant() };
    let ratio = gram_ratio(&g);

    let sq: Vec<f64> = form.lambdas.iter().map(|l| l * l).collect();
    let mut lambda_gap = f64::INFINITY;
    for i in 0..sq.len() {
        for j in i + 1..sq.len() {
            lambda_gap = lambda_gap.min((sq[i] - sq[j]).abs());
        }
    }
    let gram_verdict = classify(ratio, tol::GRAM_REGULAR, tol::GRAM_CRITICAL);
    let lambda_verdict = if sq.len() <= 1 {
        Verdict::Regular
    } else {
        classify(lambda_gap, tol::LAMBDA_DISTINCT, tol::LAMBDA_TIED)
    };
    let verdict = match (gram_verdict, lambda_verdict) {
        (x, y) if x == y => x,
        // The Gram ratio decays like a high power of the gaps for large n, so
        // a decisive eigenvalue verdict settles an undecided ratio and vice versa.
        (Verdict::Indeterminate, y) => y,
        (x, Verdict::Indeterminate) => x,
        (x, y) => {
            return Err(Error::IllConditioned(format!(
                "Gram verdict {x:?} (ratio {ratio:.3e}) contradicts eigenvalue verdict {y:?} (gap {lambda_gap:.3e})"
            )))
        }
    };
    Ok(RegularityVerdict {
        at: a.clone(),
        phi_values,
        gram_det,
        gram_ratio: ratio,
        lambdas: form.lambdas,
        lambda_gap,
        gram_verdict,
        lambda_verdict,
        verdict,
        is_regular: verdict == Verdict::Regular,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{e_hat, random_unitary, Field};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn test_point(field: Field) -> FMatrix {
        let s = 20f64.sqrt();
        FMatrix::diag(field, &[3.0 / s, -3.0 / s, 1.0 / s, -1.0 / s])
    }

    #[test]
    fn trace_power_examples() {
        let c = FMatrix::diag(Field::Real, &[0.5, -0.5, 0.5, -0.5]);
        assert_eq!(trace_power(&c, 3), 0.0);
        assert!((trace_power(&test_point(Field::Real), 4) - 0.41).abs() < 1e-15);
        let b = FMatrix::diag(Field::Real, &[2.0, -1.0, -1.0]).scale(1.0 / 6f64.sqrt());
        assert!((trace_power(&b, 3) - 6.0 / 6f64.powf(1.5)).abs() < 1e-15);
    }

    #[test]
    fn gradient_at_test_point() {
        let r = grad_sphere(&test_point(Field::Real), 3).unwrap();
        let expect = FMatrix::diag(Field::Real, &[0.6, 0.6, -0.6, -0.6]);
        assert!((&r.grad_s - &expect).norm() < 1e-14);
        assert!((r.norm_s - 1.2).abs() < 1e-14);
    }

    #[test]
    fn gradient_vanishes_on_critical_orbit_and_for_k2() {
        let c = FMatrix::diag(Field::Complex, &[0.5, -0.5, 0.5, -0.5]);
        assert!(grad_sphere(&c, 3).unwrap().norm_s < 1e-15);
        assert!(grad_sphere(&test_point(Field::Real), 2).unwrap().norm_s < 1e-15);
    }

    #[test]
    fn off_sphere_rejected() {
        let a = FMatrix::diag(Field::Real, &[1.0, -1.0]);
        assert!(matches!(grad_sphere(&a, 3), Err(Error::NotOnSphere(_))));
    }

    #[test]
    fn hessian_k2_vanishes_and_nontangent_rejected() {
        let a = test_point(Field::Real);
        let x = e_hat(Field::Real, 4, 0, 2);
        assert!(hessian_sphere(&a, 2, &x, &x).unwrap().abs() < 1e-15);
        assert!(matches!(
            hessian_sphere(&a, 3, &a, &x),
            Err(Error::NotTangent(_))
        ));
    }

    #[test]
    fn hessian_matches_second_difference() {
        let a = test_point(Field::Real);
        let x = e_hat(Field::Real, 4, 0, 2);
        let h = 1e-4;
        let f = |t: f64| trace_power(&great_circle(&a, &x, t), 3);
        let fd = (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h);
        let exact = hessian_sphere(&a, 3, &x, &x).unwrap();
        assert!((fd - exact).abs() < 1e-5, "{fd} vs {exact}");
    }

    #[test]
    fn phi_examples() {
        assert_eq!(phi_map(&FMatrix::diag(Field::Real, &[0.5, -0.5, 0.5, -0.5])).unwrap(), vec![0.0]);
        let b = FMatrix::diag(Field::Real, &[2.0, -1.0, -1.0]).scale(1.0 / 6f64.sqrt());
        assert!((phi_map(&b).unwrap()[0] - 0.408248290463863).abs() < 1e-12);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c = FMatrix::diag(Field::Real, &[s, -s, 0.0, 0.0, 0.0]);
        assert_eq!(phi_map(&c).unwrap().len(), 2);
        assert!(phi_map(&c).unwrap().iter().all(|v| v.abs() < 1e-16));
    }

    #[test]
    fn regularity_examples() {
        let c = FMatrix::diag(Field::Real, &[0.5, -0.5, 0.5, -0.5]);
        let v = gram_regularity(&c).unwrap();
        assert_eq!(v.gram_det, 0.0);
        assert!(!v.is_regular);
        assert_eq!(v.verdict, Verdict::Critical);

        let v = gram_regularity(&test_point(Field::Real)).unwrap();
        assert!((v.gram_det - 1.44).abs() < 1e-13);
        assert!(v.is_regular);

        let c5 = FMatrix::diag(Field::Real, &[0.5, -0.5, 0.5, -0.5, 0.0]);
        assert_eq!(gram_regularity(&c5).unwrap().verdict, Verdict::Critical);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let c5 = FMatrix::diag(Field::Real, &[s, -s, 0.0, 0.0, 0.0]);
        assert_eq!(gram_regularity(&c5).unwrap().verdict, Verdict::Critical);
    }

    #[test]
    fn size_two_is_always_regular() {
        let a = e_hat(Field::Real, 2, 0, 1);
        let v = gram_regularity(&a).unwrap();
        assert!(v.is_regular && v.phi_values.is_empty() && v.gram_det == 1.0);
    }

    #[test]
    fn gradient_is_equivariant() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for field in Field::ALL {
            let a = crate::field::sample_orbit(5, field, crate::field::Region::B, &mut rng)
                .unwrap()
                .a;
            let p = random_unitary(field, 5, &mut rng);
            for k in 3..6 {
                let lhs = grad_sphere(&a.conjugate_by(&p), k).unwrap().grad_s;
                let rhs = grad_sphere(&a, k).unwrap().grad_s.conjugate_by(&p);
                assert!((&lhs - &rhs).norm() < 1e-9 * (1.0 + rhs.norm()));
            }
        }
    }

    proptest! {
        #[test]
        fn vandermonde_identity(l in proptest::collection::vec(-1.0..1.0f64, 1..6)) {
            let det = vandermonde_det(&l);
            let prod = vandermonde_product(&l);
            prop_assert!((det - prod).abs() <= 1e-9 * prod.abs() + 1e-14);
        }

        #[test]
        fn hessian_is_symmetric(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = crate::field::sample_orbit(4, Field::Complex, crate::field::Region::B, &mut rng).unwrap().a;
            let basis = crate::field::orthonormal_basis(4, Field::Complex).unwrap();
            let tangent = |i: usize| {
                let x = &basis[i];
                x.axpy(-x.inner(&a), &a)
            };
            let (x, y) = (tangent(seed as usize % 15), tangent((seed as usize + 7) % 15));
            let hxy = hessian_sphere(&a, 5, &x, &y).unwrap();
            let hyx = hessian_sphere(&a, 5, &y, &x).unwrap();
            prop_assert!((hxy - hyx).abs() < 1e-12);
        }
    }
}
