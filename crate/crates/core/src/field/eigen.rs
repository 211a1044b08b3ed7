use nalgebra::{Complex, DMatrix, SymmetricEigen};

use super::{FMatrix, Field, Quaternion};
use crate::error::{Error, Result};
use crate::tol;

/// Eigen-decomposition `P^* A P = diag(values)` with `values` descending.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    /// Unitary over the matrix's field; columns are eigenvectors. Over R
    /// the determinant is +1.
    pub vectors: FMatrix,
}

pub fn hermitian_eigen(a: &FMatrix) -> Result<HermitianEigen> {
    let residual = a.hermitian_residual();
    if residual > tol::STRUCTURAL * a.max_abs().max(1.0) {
        return Err(Error::NotHermitian { residual });
    }
    match a.field() {
        Field::Real => Ok(real_eigen(a)),
        Field::Complex => Ok(complex_eigen(a)),
        Field::Quaternion => Ok(quaternion_eigen(a)),
    }
}

fn descending_order(values: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&i, &j| values[j].total_cmp(&values[i]));
    idx
}

fn real_eigen(a: &FMatrix) -> HermitianEigen {
    let n = a.n();
    let eig = SymmetricEigen::new(a.to_real_dmatrix());
    let order = descending_order(eig.eigenvalues.as_slice());
    let mut p = DMatrix::from_fn(n, n, |i, k| eig.eigenvectors[(i, order[k])]);
    if p.determinant() < 0.0 {
        p.column_mut(n - 1).neg_mut();
    }
    HermitianEigen {
        values: order.iter().map(|&k| eig.eigenvalues[k]).collect(),
        vectors: FMatrix::from_real_dmatrix(Field::Real, &p),
    }
}

fn complex_eigen(a: &FMatrix) -> HermitianEigen {
    let n = a.n();
    let eig = SymmetricEigen::new(a.to_complex_dmatrix());
    let order = descending_order(eig.eigenvalues.as_slice());
    let vectors = FMatrix::from_fn(Field::Complex, n, |i, k| {
        let c = eig.eigenvectors[(i, order[k])];
        Quaternion::new(c.re, c.im, 0.0, 0.0)
    });
    HermitianEigen {
        values: order.iter().map(|&k| eig.eigenvalues[k]).collect(),
        vectors,
    }
}

/// Quaternionic vector from a complex eigenvector `(u; v)` of the embedding.
fn quaternion_vector(col: &[Complex<f64>], n: usize) -> Vec<Quaternion> {
    (0..n)
        .map(|k| {
            let u = col[k];
            let v = col[n + k];
            Quaternion::from_complex_pair((u.re, u.im), (-v.re, v.im))
        })
        .collect()
}

/// `x^* y` for quaternionic column vectors.
pub(crate) fn qdot(x: &[Quaternion], y: &[Quaternion]) -> Quaternion {
    x.iter()
        .zip(y)
        .fold(Quaternion::ZERO, |acc, (&a, &b)| acc + a.conj() * b)
}

pub(crate) fn qnorm(x: &[Quaternion]) -> f64 {
    x.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
}

/// Removes the components of `v` along orthonormal `basis` (right scalars).
pub(crate) fn project_out(v: &mut [Quaternion], basis: &[Vec<Quaternion>]) {
    for b in basis {
        let c = qdot(b, v);
        for (vk, &bk) in v.iter_mut().zip(b) {
            *vk -= bk * c;
        }
    }
}

fn quaternion_eigen(a: &FMatrix) -> HermitianEigen {
    let n = a.n();
    let eig = SymmetricEigen::new(a.complex_embedding());
    let order = descending_order(eig.eigenvalues.as_slice());
    let doubled: Vec<f64> = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let scale = doubled.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let cluster = 1e-7 * scale;

    let candidates: Vec<Vec<Quaternion>> = order
        .iter()
        .map(|&k| {
            let col: Vec<Complex<f64>> = eig.eigenvectors.column(k).iter().copied().collect();
            quaternion_vector(&col, n)
        })
        .collect();

    let mut used = vec![false; 2 * n];
    let mut columns: Vec<Vec<Quaternion>> = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for i in 0..n {
        let target = 0.5 * (doubled[2 * i] + doubled[2 * i + 1]);
        // Any vector of the doubled eigenspace gives a quaternionic
        // eigenvector; pick the one least explained by earlier columns.
        let mut best: Option<(usize, Vec<Quaternion>, f64)> = None;
        for (c, cand) in candidates.iter().enumerate() {
            let in_cluster = (doubled[c] - target).abs() <= cluster || c / 2 == i;
            if used[c] || !in_cluster {
                continue;
            }
            let mut v = cand.clone();
            project_out(&mut v, &columns);
            let r = qnorm(&v);
            if best.as_ref().is_none_or(|b| r > b.2) {
                best = Some((c, v, r));
            }
        }
        let (c, mut v, r) = best.expect("cluster always has two candidates");
        used[c] = true;
        v.iter_mut().for_each(|q| *q = *q / r);
        columns.push(v);
        values.push(target);
    }
    let vectors = FMatrix::from_fn(Field::Quaternion, n, |i, k| columns[k][i]);
    HermitianEigen { values, vectors }
}

/// Diagonal form `diag(λ1, -λ1, ..., λp, -λp[, λ(p+1)])` of a matrix whose
/// odd power traces vanish.
#[derive(Debug, Clone)]
pub struct BalancedForm {
    /// Unitary with `P^* A P = D`; over R it lies in SO(n).
    pub p: FMatrix,
    pub d: FMatrix,
    /// Diagonal of `D`.
    pub mu: Vec<f64>,
    /// `λ1 >= ... >= λ(p+1) >= 0`.
    pub lambdas: Vec<f64>,
}

/// `p = ⌊(n-1)/2⌋`, the number of odd trace powers constrained beyond the trace.
pub fn half_index(n: usize) -> usize {
    (n - 1) / 2
}

pub fn balanced_normal_form(a: &FMatrix) -> Result<BalancedForm> {
    let n = a.n();
    let half = half_index(n);
    let scale = a.norm().max(f64::MIN_POSITIVE);
    let powers = a.powers(2 * half + 1);
    for k in (1..=2 * half + 1).step_by(2) {
        let t = powers[k].re_trace();
        if t.abs() > tol::AUSTERE * scale.powi(k as i32) {
            return Err(Error::NotAustere(format!("tr A^{k} = {t:.3e}")));
        }
    }
    let eig = hermitian_eigen(a)?;
    let zero = tol::PAIRING * scale;
    let pos: Vec<usize> = (0..n).filter(|&i| eig.values[i] > zero).collect();
    let neg: Vec<usize> = (0..n).rev().filter(|&i| eig.values[i] < -zero).collect();
    let zeros: Vec<usize> = (0..n).filter(|&i| eig.values[i].abs() <= zero).collect();
    if pos.len() != neg.len() {
        return Err(Error::NotAustere(format!(
            "{} positive vs {} negative eigenvalues",
            pos.len(),
            neg.len()
        )));
    }
    let mut order = Vec::with_capacity(n);
    let mut mu = Vec::with_capacity(n);
    let mut lambdas = Vec::with_capacity(half + 1);
    for (&i, &j) in pos.iter().zip(&neg) {
        let (lp, ln) = (eig.values[i], eig.values[j]);
        if (lp + ln).abs() > tol::PAIRING * scale {
            return Err(Error::NotAustere(format!("cannot pair {lp} with {ln}")));
        }
        let lambda = 0.5 * (lp - ln);
        lambdas.push(lambda);
        mu.extend([lambda, -lambda]);
        order.extend([i, j]);
    }
    for &z in &zeros {
        order.push(z);
        mu.push(0.0);
    }
    while lambdas.len() < half + 1 {
        lambdas.push(0.0);
    }
    debug_assert_eq!(lambdas.len(), half + 1);

    let field = a.field();
    let mut p = FMatrix::from_fn(field, n, |i, k| eig.vectors.get(i, order[k]));
    if field == Field::Real && p.to_real_dmatrix().determinant() < 0.0 {
        for i in 0..n {
            p.set(i, n - 1, -p.get(i, n - 1));
        }
    }
    Ok(BalancedForm {
        p,
        d: FMatrix::diag(field, &mu),
        mu,
        lambdas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::sample::random_unitary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag_residual(a: &FMatrix, p: &FMatrix, values: &[f64]) -> f64 {
        let d = a.conjugate_by(p);
        (&d - &FMatrix::diag(a.field(), values).with_field(d.field())).norm()
    }

    fn unitarity(p: &FMatrix) -> f64 {
        (&p.adjoint().matmul(p) - &FMatrix::identity(p.field(), p.n())).norm()
    }

    fn random_hermitian(field: Field, n: usize, seed: u64) -> FMatrix {
        use rand::Rng;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut m = FMatrix::zeros(field, n);
        for i in 0..n {
            m.set(i, i, Quaternion::real(rng.random_range(-1.0..1.0)));
            for j in i + 1..n {
                let mut q = Quaternion::new(
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                );
                match field {
                    Field::Real => q = Quaternion::real(q.w),
                    Field::Complex => q.y = 0.0,
                    Field::Quaternion => {}
                }
                q.z = if field == Field::Quaternion { q.z } else { 0.0 };
                m.set(i, j, q);
                m.set(j, i, q.conj());
            }
        }
        m
    }

    #[test]
    fn diagonal_real_matrix() {
        let a = FMatrix::diag(Field::Real, &[1.0, -1.0, 0.0]);
        let e = hermitian_eigen(&a).unwrap();
        assert_eq!(e.values, vec![1.0, 0.0, -1.0]);
        assert!(diag_residual(&a, &e.vectors, &e.values) < 1e-14);
        for q in e.vectors.entries() {
            let v = q.w.abs();
            assert!(v < 1e-14 || (v - 1.0).abs() < 1e-14, "permutation expected");
        }
    }

    #[test]
    fn off_diagonal_two_by_two() {
        let a = crate::field::e_hat(Field::Real, 2, 0, 1);
        let e = hermitian_eigen(&a).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!((e.values[0] - s).abs() < 1e-15 && (e.values[1] + s).abs() < 1e-15);
    }

    #[test]
    fn random_matrices_diagonalize() {
        for field in Field::ALL {
            for seed in 0..20 {
                let n = 2 + (seed as usize % 5);
                let a = random_hermitian(field, n, seed);
                let e = hermitian_eigen(&a).unwrap();
                assert!(diag_residual(&a, &e.vectors, &e.values) <= 1e-9 * a.norm());
                assert!(unitarity(&e.vectors) <= 1e-10);
                assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
            }
        }
    }

    #[test]
    fn quaternion_eigenvalues_are_halved_embedding() {
        let a = random_hermitian(Field::Quaternion, 3, 99);
        let e = hermitian_eigen(&a).unwrap();
        let emb = SymmetricEigen::new(a.complex_embedding());
        let mut doubled: Vec<f64> = emb.eigenvalues.iter().copied().collect();
        doubled.sort_by(|x, y| y.total_cmp(x));
        for (i, v) in e.values.iter().enumerate() {
            assert!((doubled[2 * i] - doubled[2 * i + 1]).abs() < 1e-10);
            assert!((v - doubled[2 * i]).abs() < 1e-10);
        }
    }

    #[test]
    fn repeated_quaternion_eigenvalues() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_unitary(Field::Quaternion, 4, &mut rng);
        let d = FMatrix::diag(Field::Quaternion, &[0.5, 0.5, -0.5, -0.5]);
        let a = d.conjugate_by(&u.adjoint());
        let e = hermitian_eigen(&a).unwrap();
        assert!(diag_residual(&a, &e.vectors, &e.values) < 1e-12);
        assert!(unitarity(&e.vectors) < 1e-12);
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut a = FMatrix::zeros(Field::Real, 2);
        a.set(0, 1, Quaternion::real(1.0));
        assert!(matches!(hermitian_eigen(&a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn balanced_form_reorders() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let a = FMatrix::diag(Field::Real, &[-s, s, 0.0]);
        let b = balanced_normal_form(&a).unwrap();
        assert_eq!(b.mu, vec![s, -s, 0.0]);
        assert_eq!(b.lambdas, vec![s, 0.0]);
        assert!((&a.conjugate_by(&b.p) - &b.d).norm() < 1e-14);
        assert!(b.p.to_real_dmatrix().determinant() > 0.0);
    }

    #[test]
    fn balanced_form_of_critical_representative() {
        let a = FMatrix::diag(Field::Real, &[0.5, -0.5, 0.5, -0.5]);
        let b = balanced_normal_form(&a).unwrap();
        assert_eq!(b.mu, vec![0.5, -0.5, 0.5, -0.5]);
        assert_eq!(b.lambdas, vec![0.5, 0.5]);
    }

    #[test]
    fn balanced_form_lambdas_of_conjugated_point() {
        let s = 20f64.sqrt();
        for field in Field::ALL {
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let u = random_unitary(field, 4, &mut rng);
            let a = FMatrix::diag(field, &[3.0 / s, -3.0 / s, 1.0 / s, -1.0 / s]).conjugate_by(&u);
            let b = balanced_normal_form(&a).unwrap();
            assert!((b.lambdas[0] - 3.0 / s).abs() < 1e-12);
            assert!((b.lambdas[1] - 1.0 / s).abs() < 1e-12);
            assert!((&a.conjugate_by(&b.p) - &b.d).norm() < 1e-10);
        }
    }

    #[test]
    fn balanced_form_rejects_odd_traces() {
        let a = FMatrix::diag(Field::Real, &[2.0, -1.0, -1.0]).scale(1.0 / 6f64.sqrt());
        assert!(matches!(balanced_normal_form(&a), Err(Error::NotAustere(_))));
    }
}
