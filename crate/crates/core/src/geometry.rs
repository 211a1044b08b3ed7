//! Frames, shape operators and principal spectra of the regular zero level
//! `B(n, F)` of the odd trace map.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{
    ambient_dim, balanced_normal_form, coordinates, e_hat, half_index, imaginary_e_check,
    orthonormal_basis, pairs, FMatrix, Field,
};
use crate::tol;
use crate::trace::{check_tangent, gram_regularity, great_circle, odd_gradients, Verdict};

/// Which shape the tangent frame takes at the diagonal point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FrameCase {
    /// `n` odd: `Ê_ij`-type vectors and `X_1..X_(p-1)`.
    OddN,
    /// `n` even, `λ(p+1) != 0`: `Ê_ij`-type vectors and `X_1..X_p`.
    EvenNonzero,
    /// `n` even, `λ(p+1) = 0`: `X_1..X_(p-1)` and `Ê`.
    EvenKernel,
}

/// A point of `B(n, F)` with its frames. `A = P D P^*`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FramedPoint {
    pub a: FMatrix,
    pub p: FMatrix,
    pub d: FMatrix,
    pub mu: Vec<f64>,
    pub lambdas: Vec<f64>,
    /// Orthonormal.
    pub tangent_frame: Vec<FMatrix>,
    /// `ξ_α`, unit but in general not mutually orthogonal.
    pub normal_frame: Vec<FMatrix>,
    pub rho: Vec<f64>,
    pub case_tag: FrameCase,
    pub gram_ratio: f64,
    /// Set when the point is close to the critical set.
    pub warning: Option<String>,
}

impl FramedPoint {
    pub fn field(&self) -> Field {
        self.a.field()
    }

    pub fn n(&self) -> usize {
        self.a.n()
    }

    /// Number of normal directions `ξ_α`.
    pub fn half(&self) -> usize {
        self.normal_frame.len()
    }

    pub fn dim(&self) -> usize {
        self.tangent_frame.len()
    }
}

/// `X_α = A^(2α+1) - tr(A^(2α+2)) A`.
pub fn x_alpha(a: &FMatrix, alpha: usize) -> FMatrix {
    let powers = a.powers(2 * alpha + 2);
    powers[2 * alpha + 1].axpy(-powers[2 * alpha + 2].re_trace(), a)
}

/// Ê-type frame vectors at a diagonal point: `Ê_ij` and `q Ě_ij` for every pair.
fn off_diagonal_frame(field: Field, n: usize) -> Vec<FMatrix> {
    let mut out: Vec<FMatrix> = pairs(n).map(|(i, j)| e_hat(field, n, i, j)).collect();
    for &q in field.imaginary_units() {
        out.extend(pairs(n).map(|(i, j)| imaginary_e_check(q, n, i, j).with_field(field)));
    }
    out
}

/// Frames at a regular point.
pub fn frame_point(a: &FMatrix) -> Result<FramedPoint> {
    let verdict = gram_regularity(a)?;
    match verdict.verdict {
        Verdict::Regular => {}
        Verdict::Critical => {
            return Err(Error::Critical(format!(
                "Gram ratio {:.3e}, λ = {:?}",
                verdict.gram_ratio, verdict.lambdas
            )))
        }
        Verdict::Indeterminate => {
            return Err(Error::IllConditioned(format!(
                "regularity undecided: Gram ratio {:.3e}, λ gap {:.3e}",
                verdict.gram_ratio, verdict.lambda_gap
            )))
        }
    }
    let n = a.n();
    let field = a.field();
    let half = half_index(n);
    let form = balanced_normal_form(a)?;

    let case_tag = if n % 2 == 1 {
        FrameCase::OddN
    } else if form.mu[n - 1].abs() <= 1e-8 && form.mu[n - 2].abs() <= 1e-8 {
        FrameCase::EvenKernel
    } else {
        FrameCase::EvenNonzero
    };
    // The diagonal tangent directions are the matrices odd on each pair
    // (λ_j, -λ_j) and orthogonal to D; they span the same space as the X_α
    // but stay well conditioned when the λ_j^2 crowd together.
    let d_unit = form.d.scale(1.0 / form.d.norm());
    let mut diag_block: Vec<FMatrix> = Vec::with_capacity(n / 2);
    for j in 0..n / 2 {
        let mut e = vec![0.0; n];
        e[2 * j] = std::f64::consts::FRAC_1_SQRT_2;
        e[2 * j + 1] = -std::f64::consts::FRAC_1_SQRT_2;
        let mut v = FMatrix::diag(field, &e);
        for w in std::iter::once(&d_unit).chain(&diag_block) {
            v = v.axpy(-v.inner(w), w);
        }
        let r = v.norm();
        if r > 1e-8 {
            diag_block.push(v.scale(1.0 / r));
        }
    }
    let x_count = match case_tag {
        FrameCase::EvenNonzero => half,
        _ => half.saturating_sub(1),
    };
    let expected_block = x_count + usize::from(case_tag == FrameCase::EvenKernel);
    if diag_block.len() != expected_block {
        return Err(Error::IllConditioned(format!(
            "diagonal frame block has {} directions, expected {expected_block}",
            diag_block.len()
        )));
    }

    let pstar = form.p.adjoint();
    let tangent_frame: Vec<FMatrix> = off_diagonal_frame(field, n)
        .into_iter()
        .chain(diag_block)
        .map(|v| v.conjugate_by(&pstar))
        .collect();

    let grads = odd_gradients(a)?;
    let rho: Vec<f64> = grads.iter().map(FMatrix::norm).collect();
    let normal_frame = grads
        .iter()
        .zip(&rho)
        .map(|(g, r)| g.scale(1.0 / r))
        .collect();
    let warning = (verdict.gram_ratio < 1e-6).then(|| {
        format!(
            "close to the critical set: Gram ratio {:.3e}",
            verdict.gram_ratio
        )
    });

    let expected = ambient_dim(n, field)? - half - 1;
    debug_assert_eq!(tangent_frame.len(), expected);
    Ok(FramedPoint {
        a: a.clone(),
        p: form.p,
        d: form.d,
        mu: form.mu,
        lambdas: form.lambdas,
        tangent_frame,
        normal_frame,
        rho,
        case_tag,
        gram_ratio: verdict.gram_ratio,
        warning,
    })
}

fn check_alpha(fp: &FramedPoint, alpha: usize) -> Result<()> {
    if alpha == 0 || alpha > fp.half() {
        return Err(Error::domain(format!(
            "alpha must lie in 1..={}, got {alpha}",
            fp.half()
        )));
    }
    Ok(())
}

/// `<S_ξα V_i, V_j>` in the tangent frame.
pub fn shape_operator(fp: &FramedPoint, alpha: usize) -> Result<DMatrix<f64>> {
    check_alpha(fp, alpha)?;
    let frame = &fp.tangent_frame;
    let powers = fp.a.powers(2 * alpha - 1);
    // left[r][i] = V_i A^r, right[s][j] = A^s V_j
    let left: Vec<Vec<FMatrix>> = (0..2 * alpha)
        .map(|r| frame.iter().map(|v| v.matmul(&powers[r])).collect())
        .collect();
    let right: Vec<Vec<FMatrix>> = (0..2 * alpha)
        .map(|s| frame.iter().map(|v| powers[s].matmul(v)).collect())
        .collect();
    let coef = -((2 * alpha + 1) as f64) / fp.rho[alpha - 1];
    let k = frame.len();
    let mut m = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let mut acc = 0.0;
            for r in 0..2 * alpha {
                acc += left[r][i].inner(&right[2 * alpha - 1 - r][j]);
            }
            m[(i, j)] = coef * acc;
            m[(j, i)] = coef * acc;
        }
    }
    Ok(m)
}

/// Eigenvalues, ascending.
pub fn sorted_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

/// `max_k |e_k + e_(K-1-k)|` over ascending eigenvalues.
pub fn pairing_residual(sorted: &[f64]) -> f64 {
    let k = sorted.len();
    (0..k)
        .map(|i| (sorted[i] + sorted[k - 1 - i]).abs())
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub value: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrincipalSpectrum {
    pub direction_index: usize,
    pub eigenvalues: Vec<f64>,
    /// Ascending by value.
    pub clusters: Vec<Cluster>,
    pub pairing_residual: f64,
    pub austere: bool,
}

impl PrincipalSpectrum {
    pub fn multiplicities(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.multiplicity).collect()
    }
}

/// Groups ascending values into clusters of width `tol`; fails when two
/// clusters are closer than `10 tol`.
pub fn cluster_values(sorted: &[f64], tol: f64) -> Result<Vec<Cluster>> {
    let mut out: Vec<(f64, f64, usize)> = Vec::new(); // (sum, last, count)
    for &v in sorted {
        match out.last_mut() {
            Some((sum, last, count)) if v - *sum / *count as f64 <= tol => {
                *sum += v;
                *last = v;
                *count += 1;
            }
            Some((_, last, _)) if v - *last <= 10.0 * tol => {
                return Err(Error::ClusterAmbiguity(format!(
                    "values {last} and {v} are {:.3e} apart (cluster width {tol:.3e})",
                    v - *last
                )));
            }
            _ => out.push((v, v, 1)),
        }
    }
    Ok(out
        .into_iter()
        .map(|(sum, _, count)| Cluster {
            value: sum / count as f64,
            multiplicity: count,
        })
        .collect())
}

pub fn cluster_tolerance(sorted: &[f64]) -> f64 {
    let radius = sorted.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    tol::CLUSTER * (radius + 1.0)
}

pub fn spectrum_of(m: &DMatrix<f64>, alpha: usize) -> Result<PrincipalSpectrum> {
    let eigenvalues = sorted_eigenvalues(m);
    let width = cluster_tolerance(&eigenvalues);
    let clusters = cluster_values(&eigenvalues, width)?;
    let pairing = pairing_residual(&eigenvalues);
    let radius = eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    Ok(PrincipalSpectrum {
        direction_index: alpha,
        austere: pairing <= tol::DERIVED * radius.max(1.0),
        pairing_residual: pairing,
        eigenvalues,
        clusters,
    })
}

pub fn principal_spectrum(fp: &FramedPoint, alpha: usize) -> Result<PrincipalSpectrum> {
    spectrum_of(&shape_operator(fp, alpha)?, alpha)
}

/// Largest Frobenius norm of `[S_α, S_β]` over all pairs.
pub fn normal_commutator_norm(fp: &FramedPoint) -> Result<f64> {
    let ops: Vec<DMatrix<f64>> = (1..=fp.half())
        .map(|al| shape_operator(fp, al))
        .collect::<Result<_>>()?;
    let mut worst: f64 = 0.0;
    for i in 0..ops.len() {
        for j in i + 1..ops.len() {
            let c = &ops[i] * &ops[j] - &ops[j] * &ops[i];
            worst = worst.max(c.norm());
        }
    }
    Ok(worst)
}

/// Whether all shape operators commute within `1e-8` relative.
pub fn verify_flat_normal_bundle(fp: &FramedPoint) -> Result<bool> {
    let scale = (1..=fp.half())
        .map(|al| shape_operator(fp, al).map(|m| m.norm()))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(1.0f64, f64::max);
    Ok(normal_commutator_norm(fp)? <= tol::DERIVED * scale * scale)
}

/// Closed-form scalar curvature of `B(4, F)`.
pub fn scalar_curvature_b4(a: &FMatrix, field: Field) -> Result<f64> {
    if a.n() != 4 {
        return Err(Error::domain(format!("needs n = 4, got {}", a.n())));
    }
    crate::trace::check_on_sphere(a)?;
    let excess = crate::trace::trace_power(a, 4) - 0.25;
    if excess <= tol::DERIVED {
        return Err(Error::Critical(format!("tr A^4 - 1/4 = {excess:.3e}")));
    }
    let m = field.dim() as f64;
    Ok(6.0 * m * (6.0 * m + 1.0) - 2.0 * m / excess)
}

/// Scalar curvature from the Gauss equation, `(N-2)(N-3) - |II|^2`, for `n = 4`.
pub fn scalar_curvature_gauss(fp: &FramedPoint) -> Result<f64> {
    if fp.n() != 4 {
        return Err(Error::domain(format!("needs n = 4, got {}", fp.n())));
    }
    let big_n = ambient_dim(4, fp.field())? as f64;
    let s = shape_operator(fp, 1)?;
    Ok((big_n - 2.0) * (big_n - 3.0) - s.norm_squared())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Signature {
    pub nullity: usize,
    pub pos_index: usize,
    pub neg_index: usize,
}

/// Nullity and indices of the second fundamental form in direction `ξ_α`.
pub fn second_form_signature(fp: &FramedPoint, alpha: usize) -> Result<Signature> {
    let spectrum = principal_spectrum(fp, alpha)?;
    let width = cluster_tolerance(&spectrum.eigenvalues);
    let mut sig = Signature {
        nullity: 0,
        pos_index: 0,
        neg_index: 0,
    };
    for c in &spectrum.clusters {
        if c.value.abs() <= width {
            sig.nullity += c.multiplicity;
        } else if c.value > 0.0 {
            sig.pos_index += c.multiplicity;
        } else {
            sig.neg_index += c.multiplicity;
        }
    }
    Ok(sig)
}

/// Dimension of the linear span of `samples` inside `E(n, F)`.
pub fn substantiality_rank(samples: &[FMatrix]) -> Result<usize> {
    let first = samples
        .first()
        .ok_or_else(|| Error::domain("no samples"))?;
    let (n, field) = (first.n(), first.field());
    let big_n = ambient_dim(n, field)?;
    if samples.len() < big_n {
        return Err(Error::domain(format!(
            "need at least {big_n} samples, got {}",
            samples.len()
        )));
    }
    if let Some(bad) = samples.iter().find(|s| s.n() != n || s.field() != field) {
        return Err(Error::Mismatch(format!(
            "sample of size {} over {} among size {n} over {field}",
            bad.n(),
            bad.field()
        )));
    }
    let basis = orthonormal_basis(n, field)?;
    let rows: Vec<Vec<f64>> = samples.iter().map(|s| coordinates(s, &basis)).collect();
    let m = DMatrix::from_fn(rows.len(), big_n, |i, j| rows[i][j]);
    let s = m.singular_values();
    let top = s.max();
    Ok(s.iter().filter(|&&v| v > 1e-9 * top).count())
}

/// Compares `S_ξα V_i` with minus the tangential part of the derivative of
/// `ξ_α` along the great circle through `V_i`; returns the largest
/// coordinate discrepancy.
pub fn weingarten_residual(fp: &FramedPoint, alpha: usize, index: usize, h: f64) -> Result<f64> {
    check_alpha(fp, alpha)?;
    let v = fp
        .tangent_frame
        .get(index)
        .ok_or_else(|| Error::domain(format!("frame index {index} out of range")))?;
    check_tangent(&fp.a, v)?;
    let xi = |t: f64| -> Result<FMatrix> {
        let g = &odd_gradients(&great_circle(&fp.a, v, t))?[alpha - 1];
        Ok(g.scale(1.0 / g.norm()))
    };
    let dxi = (&xi(h)? - &xi(-h)?).scale(0.5 / h);
    let m = shape_operator(fp, alpha)?;
    let mut worst: f64 = 0.0;
    for (j, w) in fp.tangent_frame.iter().enumerate() {
        worst = worst.max((-dxi.inner(w) - m[(index, j)]).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{random_unitary, sample_orbit, Region};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn test_point(field: Field) -> FMatrix {
        let s = 20f64.sqrt();
        FMatrix::diag(field, &[3.0 / s, -3.0 / s, 1.0 / s, -1.0 / s])
    }

    #[test]
    fn frame_sizes_and_cases() {
        let s = 10f64.sqrt();
        let d5 = FMatrix::diag(Field::Real, &[2.0 / s, -2.0 / s, 1.0 / s, -1.0 / s, 0.0]);
        let fp = frame_point(&d5).unwrap();
        assert_eq!((fp.case_tag, fp.dim()), (FrameCase::OddN, 11));
        let fp = frame_point(&test_point(Field::Real)).unwrap();
        assert_eq!((fp.case_tag, fp.dim()), (FrameCase::EvenNonzero, 7));
        let fp = frame_point(&test_point(Field::Complex)).unwrap();
        assert_eq!(fp.dim(), 13);
        let k = FMatrix::diag(Field::Real, &[0.6, -0.6, 0.8, -0.8, 0.0, 0.0]).scale(1.0 / 2f64.sqrt());
        let fp = frame_point(&k).unwrap();
        assert_eq!(fp.case_tag, FrameCase::EvenKernel);
        assert_eq!(fp.dim(), ambient_dim(6, Field::Real).unwrap() - 3);
    }

    #[test]
    fn critical_point_rejected() {
        let c = FMatrix::diag(Field::Real, &[0.5, -0.5, 0.5, -0.5]);
        assert!(matches!(frame_point(&c), Err(Error::Critical(_))));
    }

    #[test]
    fn frames_are_orthonormal_and_tangent() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for field in Field::ALL {
            for n in 2..7 {
                let a = sample_orbit(n, field, Region::B, &mut rng).unwrap().a;
                let fp = frame_point(&a).unwrap();
                assert_eq!(fp.dim(), ambient_dim(n, field).unwrap() - half_index(n) - 1);
                for (i, v) in fp.tangent_frame.iter().enumerate() {
                    assert!(v.inner(&a).abs() < 1e-10 && v.trace().norm() < 1e-10);
                    for xi in &fp.normal_frame {
                        assert!(v.inner(xi).abs() < 1e-9, "n={n} {field}");
                    }
                    for (j, w) in fp.tangent_frame.iter().enumerate() {
                        let e = if i == j { 1.0 } else { 0.0 };
                        assert!((v.inner(w) - e).abs() < 1e-10);
                    }
                }
            }
        }
    }

    #[test]
    fn spectrum_at_test_point() {
        let r5 = 5f64.sqrt();
        let fp = frame_point(&test_point(Field::Real)).unwrap();
        let sp = principal_spectrum(&fp, 1).unwrap();
        let values: Vec<f64> = sp.clusters.iter().map(|c| c.value).collect();
        let expect = [-r5, -r5 / 2.0, 0.0, r5 / 2.0, r5];
        for (v, e) in values.iter().zip(expect) {
            assert!((v - e).abs() < 1e-12);
        }
        assert_eq!(sp.multiplicities(), vec![1, 1, 3, 1, 1]);
        assert!(sp.austere);
        for (field, m) in [(Field::Complex, 2), (Field::Quaternion, 4)] {
            let fp = frame_point(&test_point(field)).unwrap();
            let sp = principal_spectrum(&fp, 1).unwrap();
            assert_eq!(sp.multiplicities(), vec![m, m, 2 * m + 1, m, m]);
        }
    }

    #[test]
    fn diagonal_block_entries() {
        let fp = frame_point(&test_point(Field::Real)).unwrap();
        let m = shape_operator(&fp, 1).unwrap();
        // Ê_12 comes first: -(3/ρ)(μ1 + μ2) = 0; Ê_13: -(3/1.2)(μ1 + μ3).
        let s = 20f64.sqrt();
        assert!(m[(0, 0)].abs() < 1e-14);
        assert!((m[(1, 1)] + 2.5 * 4.0 / s).abs() < 1e-14);
        assert!(m[(6, 6)].abs() < 1e-14);
        for j in 0..6 {
            assert!(m[(6, j)].abs() < 1e-14);
        }
    }

    #[test]
    fn flatness_examples() {
        let s = 10f64.sqrt();
        let d5 = FMatrix::diag(Field::Real, &[2.0 / s, -2.0 / s, 1.0 / s, -1.0 / s, 0.0]);
        let fp = frame_point(&d5).unwrap();
        assert!(normal_commutator_norm(&fp).unwrap() <= 1e-9);
        assert!(verify_flat_normal_bundle(&fp).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = sample_orbit(6, Field::Complex, Region::BTilde, &mut rng).unwrap().a;
        assert!(verify_flat_normal_bundle(&frame_point(&a).unwrap()).unwrap());
        assert!(verify_flat_normal_bundle(&frame_point(&test_point(Field::Real)).unwrap()).unwrap());
    }

    #[test]
    fn scalar_curvature_anchor_values() {
        for (field, s) in [(Field::Real, 29.5), (Field::Complex, 131.0), (Field::Quaternion, 550.0)] {
            let a = test_point(field);
            assert!((scalar_curvature_b4(&a, field).unwrap() - s).abs() < 1e-11);
            let g = scalar_curvature_gauss(&frame_point(&a).unwrap()).unwrap();
            assert!((g - s).abs() < 1e-9 * s);
        }
        let c = FMatrix::diag(Field::Real, &[0.5, -0.5, 0.5, -0.5]);
        assert!(scalar_curvature_b4(&c, Field::Real).is_err());
    }

    #[test]
    fn signatures() {
        let fp = frame_point(&test_point(Field::Real)).unwrap();
        let sig = second_form_signature(&fp, 1).unwrap();
        assert_eq!((sig.nullity, sig.pos_index, sig.neg_index), (3, 2, 2));
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (n, expect) in [(5, (3, 4, 4)), (6, (5, 6, 6))] {
            let a = sample_orbit(n, Field::Real, Region::B, &mut rng).unwrap().a;
            let sig = second_form_signature(&frame_point(&a).unwrap(), 1).unwrap();
            assert_eq!((sig.nullity, sig.pos_index, sig.neg_index), expect);
        }
    }

    #[test]
    fn alpha_out_of_range() {
        let fp = frame_point(&test_point(Field::Real)).unwrap();
        assert!(shape_operator(&fp, 0).is_err());
        assert!(shape_operator(&fp, 2).is_err());
    }

    #[test]
    fn frame_independent_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for field in Field::ALL {
            let a = sample_orbit(5, field, Region::B, &mut rng).unwrap().a;
            let p = random_unitary(field, 5, &mut rng);
            let fa = frame_point(&a).unwrap();
            let fb = frame_point(&a.conjugate_by(&p)).unwrap();
            for al in 1..=2 {
                let ea = principal_spectrum(&fa, al).unwrap().eigenvalues;
                let eb = principal_spectrum(&fb, al).unwrap().eigenvalues;
                for (x, y) in ea.iter().zip(&eb) {
                    assert!((x - y).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn weingarten_matches_finite_difference() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a = sample_orbit(5, Field::Complex, Region::B, &mut rng).unwrap().a;
        let fp = frame_point(&a).unwrap();
        for al in 1..=2 {
            for i in (0..fp.dim()).step_by(3) {
                assert!(weingarten_residual(&fp, al, i, 1e-5).unwrap() < 1e-5);
            }
        }
    }

    #[test]
    fn substantiality() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let c4: Vec<FMatrix> = (0..200)
            .map(|_| sample_orbit(4, Field::Real, Region::C4, &mut rng).unwrap().a)
            .collect();
        assert_eq!(substantiality_rank(&c4).unwrap(), 9);
        let b4: Vec<FMatrix> = (0..200)
            .map(|_| sample_orbit(4, Field::Complex, Region::B, &mut rng).unwrap().a)
            .collect();
        assert_eq!(substantiality_rank(&b4).unwrap(), 15);
        let same = vec![test_point(Field::Real); 20];
        assert_eq!(substantiality_rank(&same).unwrap(), 1);
        assert!(substantiality_rank(&same[..3]).is_err());
    }

    #[test]
    fn clustering_detects_ambiguity() {
        assert!(cluster_values(&[0.0, 5e-6], 1e-6).is_err());
        let c = cluster_values(&[0.0, 1e-7, 1.0], 1e-6).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].multiplicity, 2);
    }
}
