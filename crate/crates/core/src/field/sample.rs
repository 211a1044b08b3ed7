use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::eigen::{half_index, project_out, qnorm};
use super::{FMatrix, Field, Quaternion};
use crate::error::{Error, Result};

/// Orthonormalized Gaussian matrix over `field`; lies in SO(n) over R.
pub fn random_unitary<R: Rng + ?Sized>(field: Field, n: usize, rng: &mut R) -> FMatrix {
    let mut gaussian = || -> f64 { rng.sample(StandardNormal) };
    let mut columns: Vec<Vec<Quaternion>> = Vec::with_capacity(n);
    while columns.len() < n {
        let mut v: Vec<Quaternion> = (0..n)
            .map(|_| {
                let mut c = [0.0; 4];
                for slot in c.iter_mut().take(field.dim()) {
                    *slot = gaussian();
                }
                Quaternion::from_array(c)
            })
            .collect();
        project_out(&mut v, &columns);
        let r = qnorm(&v);
        if r < 1e-8 {
            continue;
        }
        v.iter_mut().for_each(|q| *q = *q / r);
        columns.push(v);
    }
    let mut u = FMatrix::from_fn(field, n, |i, k| columns[k][i]);
    if field == Field::Real && u.to_real_dmatrix().determinant() < 0.0 {
        for i in 0..n {
            u.set(i, 0, -u.get(i, 0));
        }
    }
    u
}

/// Which subset of the zero level of the odd trace map to sample from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// Even `n`, all `λ` distinct and nonzero.
    BTilde,
    /// Regular points: distinct `λ`, with `λ(p+1) = 0` for odd `n`.
    B,
    /// The critical orbit through `½diag(1,-1,1,-1)`, `n = 4`.
    C4,
}

/// Diagonal `diag(λ1, -λ1, ..., λp, -λp[, λ(p+1)])`; for odd `n` the last
/// slot is a single zero and `lambdas` has `p` or `p+1` entries.
pub fn balanced_diagonal(field: Field, n: usize, lambdas: &[f64]) -> FMatrix {
    let mut mu = Vec::with_capacity(n);
    for &l in lambdas {
        if mu.len() + 2 <= n {
            mu.extend([l, -l]);
        }
    }
    mu.resize(n, 0.0);
    FMatrix::diag(field, &mu)
}

/// A sampled orbit point `a = p^* d p`.
#[derive(Debug, Clone)]
pub struct OrbitSample {
    pub a: FMatrix,
    pub p: FMatrix,
    pub d: FMatrix,
    pub lambdas: Vec<f64>,
}

/// Random unit `λ` profile for `region`: descending, pairwise separated by
/// at least `0.05 λ1`.
pub fn sample_lambdas<R: Rng + ?Sized>(n: usize, region: Region, rng: &mut R) -> Result<Vec<f64>> {
    check_region(n, region)?;
    let half = half_index(n);
    if region == Region::C4 {
        return Ok(vec![0.5, 0.5]);
    }
    let free = if n % 2 == 0 { half + 1 } else { half };
    loop {
        let mut l: Vec<f64> = (0..free).map(|_| rng.random_range(0.0..1.0)).collect();
        l.sort_by(|a, b| b.total_cmp(a));
        let top = l[0];
        let separated = l.windows(2).all(|w| w[0] - w[1] >= 0.05 * top)
            && l.last().is_some_and(|&x| x >= 0.05 * top);
        if !separated {
            continue;
        }
        let norm = (2.0 * l.iter().map(|x| x * x).sum::<f64>()).sqrt();
        l.iter_mut().for_each(|x| *x /= norm);
        if n % 2 == 1 {
            l.push(0.0);
        }
        return Ok(l);
    }
}

fn check_region(n: usize, region: Region) -> Result<()> {
    match region {
        Region::C4 if n != 4 => Err(Error::domain(format!("C4 region needs n = 4, got {n}"))),
        Region::BTilde if n % 2 == 1 || n < 2 => {
            Err(Error::domain(format!("BTilde region needs even n, got {n}")))
        }
        _ if n < 2 => Err(Error::domain(format!("need n >= 2, got {n}"))),
        _ => Ok(()),
    }
}

pub fn sample_orbit<R: Rng + ?Sized>(
    n: usize,
    field: Field,
    region: Region,
    rng: &mut R,
) -> Result<OrbitSample> {
    let lambdas = sample_lambdas(n, region, rng)?;
    let d = balanced_diagonal(field, n, &lambdas);
    let p = random_unitary(field, n, rng);
    Ok(OrbitSample {
        a: d.conjugate_by(&p),
        p,
        d,
        lambdas,
    })
}

/// Deterministic per seed.
pub fn sample_point(n: usize, field: Field, region: Region, seed: u64) -> Result<FMatrix> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(sample_orbit(n, field, region, &mut rng)?.a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::hermitian_eigen;

    #[test]
    fn unitary_over_each_field() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for field in Field::ALL {
            for n in 1..7 {
                let u = random_unitary(field, n, &mut rng);
                let e = &u.adjoint().matmul(&u) - &FMatrix::identity(field, n);
                assert!(e.norm() < 1e-12);
                assert_eq!(u.field_excess(), 0.0);
            }
        }
        let u = random_unitary(Field::Real, 5, &mut rng);
        assert!(u.to_real_dmatrix().determinant() > 0.0);
    }

    #[test]
    fn c4_points_have_half_eigenvalues() {
        for seed in 0..5 {
            let a = sample_point(4, Field::Real, Region::C4, seed).unwrap();
            let e = hermitian_eigen(&a).unwrap();
            for (v, w) in e.values.iter().zip([0.5, 0.5, -0.5, -0.5]) {
                assert!((v - w).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn btilde_points_are_generic() {
        for field in Field::ALL {
            for seed in 0..5 {
                let a = sample_point(4, field, Region::BTilde, seed).unwrap();
                let e = hermitian_eigen(&a).unwrap();
                assert!((e.values.iter().sum::<f64>()).abs() < 1e-12);
                assert!((e.values[0] + e.values[3]).abs() < 1e-12);
                assert!((e.values[1] + e.values[2]).abs() < 1e-12);
                assert!(e.values[0] - e.values[1] > 1e-3 && e.values[1] > 1e-3);
                assert!((a.norm() - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn odd_n_has_zero_slot() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = sample_orbit(5, Field::Complex, Region::B, &mut rng).unwrap();
        assert_eq!(s.lambdas.len(), 3);
        assert_eq!(s.lambdas[2], 0.0);
        assert!((s.d.norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn deterministic_per_seed() {
        let a = sample_point(6, Field::Quaternion, Region::B, 42).unwrap();
        let b = sample_point(6, Field::Quaternion, Region::B, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, sample_point(6, Field::Quaternion, Region::B, 43).unwrap());
    }

    #[test]
    fn region_mismatch_rejected() {
        assert!(sample_point(5, Field::Real, Region::C4, 0).is_err());
        assert!(sample_point(5, Field::Real, Region::BTilde, 0).is_err());
    }

    #[test]
    fn conjugation_is_isometric() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for field in Field::ALL {
            let a = sample_orbit(5, field, Region::B, &mut rng).unwrap().a;
            let b = sample_orbit(5, field, Region::B, &mut rng).unwrap().a;
            let p = random_unitary(field, 5, &mut rng);
            let lhs = a.conjugate_by(&p).inner(&b.conjugate_by(&p));
            assert!((lhs - a.inner(&b)).abs() < 1e-10 * (1.0 + a.inner(&b).abs()));
            assert_eq!(a.inner(&b), b.inner(&a));
        }
    }
}
