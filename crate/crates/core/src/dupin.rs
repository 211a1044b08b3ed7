//! Dupin structure of `B(4, F)`: principal curvatures, curvature circles,
//! the Legendre lift, curvature-sphere spans and Lie brackets of the chart
//! frame (real case).
//!
//! Index pairs are zero-based: the curvature circle of `κ1` is `(0, 2)`.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt::Write as _;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{
    ambient_dim, balanced_normal_form, coordinates, hermitian_eigen, e_check, e_hat, orthonormal_basis, pairs,
    sample_orbit, FMatrix, Field, Region,
};
use crate::geometry::{frame_point, shape_operator, sorted_eigenvalues, x_alpha, FramedPoint};
use crate::tol;
use crate::trace::{odd_gradients, trace_power};

/// Curvature-circle pairs of `κ1..κ4`.
pub const CIRCLE_PAIRS: [(usize, usize); 4] = [(0, 2), (1, 3), (0, 3), (1, 2)];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KappaProfile {
    pub kappas: [f64; 5],
    pub multiplicities: [usize; 5],
    pub lambda1: f64,
    pub lambda2: f64,
    pub rho1: f64,
}

/// Closed-form principal curvatures on `B̃(4, F)`; `field` fixes the multiplicities.
pub fn kappa_profile(a: &FMatrix, field: Field) -> Result<KappaProfile> {
    if a.n() != 4 {
        return Err(Error::domain(format!("needs n = 4, got {}", a.n())));
    }
    crate::trace::check_on_sphere(a)?;
    let form = balanced_normal_form(a)?;
    let (l1, l2) = (form.lambdas[0], form.lambdas[1]);
    if l2 <= 1e-8 || l1 - l2 <= 1e-8 {
        return Err(Error::domain(format!(
            "not a principal-orbit point: λ = ({l1}, {l2})"
        )));
    }
    let rho1 = 3.0 * (trace_power(a, 4) - 0.25).sqrt();
    let k1 = 3.0 * (l1 + l2) / rho1;
    let k3 = 3.0 * (l1 - l2) / rho1;
    let m = field.dim();
    Ok(KappaProfile {
        kappas: [k1, -k1, k3, -k3, 0.0],
        multiplicities: [m, m, m, m, 2 * m + 1],
        lambda1: l1,
        lambda2: l2,
        rho1,
    })
}

/// `exp(t Ě_ij)`, a rotation by `t/√2` in the `(i, j)` plane.
pub fn rotation(field: Field, n: usize, (i, j): (usize, usize), t: f64) -> FMatrix {
    let (s, c) = (t * FRAC_1_SQRT_2).sin_cos();
    let mut r = FMatrix::identity(field, n);
    r.set(i, i, c.into());
    r.set(j, j, c.into());
    r.set(i, j, s.into());
    r.set(j, i, (-s).into());
    r
}

fn check_pair(pair: (usize, usize)) -> Result<()> {
    if CIRCLE_PAIRS.contains(&pair) {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "pair {pair:?} is not a curvature-circle pair"
        )))
    }
}

/// `γ_ij(t) = (exp(tĚ_ij) P)^* D (exp(tĚ_ij) P)`; here `A = P^* D P`.
pub fn curvature_circle(p: &FMatrix, d: &FMatrix, pair: (usize, usize), t: f64) -> Result<FMatrix> {
    check_pair(pair)?;
    let q = rotation(p.field(), p.n(), pair, t).matmul(p);
    Ok(d.conjugate_by(&q))
}

/// `γ_ij'(t) = (μ_i - μ_j) (exp(tĚ_ij) P)^* Ê_ij (exp(tĚ_ij) P)`.
pub fn curvature_circle_velocity(
    p: &FMatrix,
    d: &FMatrix,
    pair: (usize, usize),
    t: f64,
) -> Result<FMatrix> {
    check_pair(pair)?;
    let (i, j) = pair;
    let q = rotation(p.field(), p.n(), pair, t).matmul(p);
    let mu_diff = d.get(i, i).w - d.get(j, j).w;
    Ok(e_hat(d.field(), d.n(), i, j).conjugate_by(&q).scale(mu_diff))
}

/// `(P, D)` with `A = P^* D P`, `D = diag(λ1, -λ1, λ2, -λ2)`.
pub fn orbit_coordinates(a: &FMatrix) -> Result<(FMatrix, FMatrix)> {
    let form = balanced_normal_form(a)?;
    Ok((form.p.adjoint(), form.d))
}

/// `S v` for a tangent vector `v`, expressed back in `E(n, F)`.
pub fn apply_shape_operator(fp: &FramedPoint, m: &DMatrix<f64>, v: &FMatrix) -> FMatrix {
    let c: Vec<f64> = fp.tangent_frame.iter().map(|w| v.inner(w)).collect();
    let mut out = FMatrix::zeros(fp.field(), fp.n());
    for (i, w) in fp.tangent_frame.iter().enumerate() {
        let s: f64 = (0..c.len()).map(|j| m[(i, j)] * c[j]).sum();
        out = out.axpy(s, w);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleCheck {
    pub pair: (usize, usize),
    /// Largest change of any sorted eigenvalue of `S_ξ1` along the grid.
    pub max_variation: f64,
    /// Largest `|S v - r v|` for the unit velocity `v`, `r = <S v, v>`.
    pub direction_residual: f64,
    /// Largest deviation of `|r|` from the matched `|κ|`.
    pub kappa_mismatch: f64,
}

/// Walks the curvature circle `pair` through `a` on `grid` equally spaced
/// parameters in `[0, 2π]` and records how the shape operator changes.
pub fn check_curvature_circle(a: &FMatrix, pair: (usize, usize), grid: usize) -> Result<CircleCheck> {
    check_pair(pair)?;
    let profile = kappa_profile(a, a.field())?;
    let slot = CIRCLE_PAIRS.iter().position(|&q| q == pair).expect("checked");
    let matched = profile.kappas[slot].abs();
    let (p, d) = orbit_coordinates(a)?;
    let base = sorted_eigenvalues(&shape_operator(&frame_point(a)?, 1)?);
    let mut out = CircleCheck {
        pair,
        max_variation: 0.0,
        direction_residual: 0.0,
        kappa_mismatch: 0.0,
    };
    for k in 0..grid {
        let t = 2.0 * std::f64::consts::PI * k as f64 / (grid.max(2) - 1) as f64;
        let g = curvature_circle(&p, &d, pair, t)?;
        let fp = frame_point(&g)?;
        let m = shape_operator(&fp, 1)?;
        let e = sorted_eigenvalues(&m);
        for (x, y) in e.iter().zip(&base) {
            out.max_variation = out.max_variation.max((x - y).abs());
        }
        let v = curvature_circle_velocity(&p, &d, pair, t)?;
        let v = v.scale(1.0 / v.norm());
        let sv = apply_shape_operator(&fp, &m, &v);
        let r = sv.inner(&v);
        out.direction_residual = out.direction_residual.max(sv.axpy(-r, &v).norm());
        out.kappa_mismatch = out.kappa_mismatch.max((r.abs() - matched).abs());
    }
    Ok(out)
}

/// CSV trace `t,kappa1..kappa5` along a curvature circle.
pub fn circle_trace_csv(a: &FMatrix, pair: (usize, usize), samples: usize) -> Result<String> {
    let (p, d) = orbit_coordinates(a)?;
    let mut out = String::from("t,kappa1,kappa2,kappa3,kappa4,kappa5\n");
    for k in 0..samples {
        let t = 2.0 * std::f64::consts::PI * k as f64 / (samples.max(2) - 1) as f64;
        let g = curvature_circle(&p, &d, pair, t)?;
        let kp = kappa_profile(&g, a.field())?;
        write!(out, "{t}").expect("write to String");
        for v in kp.kappas {
            write!(out, ",{v}").expect("write to String");
        }
        out.push('\n');
    }
    Ok(out)
}

/// A vector of `R^(N+2)` under the Lie metric `diag(-1, 1, ..., 1, -1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LieVector {
    pub coordinates: Vec<f64>,
}

impl LieVector {
    /// `(a, B, c)` with `B` in coordinates of an orthonormal basis.
    pub fn from_parts(a: f64, b: &FMatrix, c: f64, basis: &[FMatrix]) -> Self {
        let mut coordinates = vec![a];
        coordinates.extend(crate::field::coordinates(b, basis));
        coordinates.push(c);
        LieVector { coordinates }
    }

    pub fn scaled_add(&self, s: f64, other: &LieVector) -> LieVector {
        LieVector {
            coordinates: self
                .coordinates
                .iter()
                .zip(&other.coordinates)
                .map(|(x, y)| s * x + y)
                .collect(),
        }
    }
}

pub fn lie_inner(x: &LieVector, y: &LieVector) -> f64 {
    let k = x.coordinates.len();
    assert_eq!(k, y.coordinates.len(), "Lie vectors of different length");
    let mut s = -x.coordinates[0] * y.coordinates[0] - x.coordinates[k - 1] * y.coordinates[k - 1];
    for i in 1..k - 1 {
        s += x.coordinates[i] * y.coordinates[i];
    }
    s
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LegendreLift {
    pub z1: LieVector,
    pub zlast: LieVector,
    /// `K_i = κ_i Z1 + Zlast`.
    pub k: Vec<LieVector>,
    pub xi1: FMatrix,
    pub profile: KappaProfile,
}

pub fn legendre_lift_in(a: &FMatrix, basis: &[FMatrix]) -> Result<LegendreLift> {
    let profile = kappa_profile(a, a.field())?;
    let g = &odd_gradients(a)?[0];
    let xi1 = g.scale(1.0 / g.norm());
    let z1 = LieVector::from_parts(1.0, a, 0.0, basis);
    let zlast = LieVector::from_parts(0.0, &xi1, 1.0, basis);
    let k = profile.kappas.iter().map(|&kap| z1.scaled_add(kap, &zlast)).collect();
    Ok(LegendreLift {
        z1,
        zlast,
        k,
        xi1,
        profile,
    })
}

pub fn legendre_lift(a: &FMatrix) -> Result<LegendreLift> {
    legendre_lift_in(a, &orthonormal_basis(a.n(), a.field())?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankReport {
    pub rank: usize,
    /// `s_(rank-1) / s_rank`, infinite at full rank.
    pub gap: f64,
    pub singular_values: Vec<f64>,
}

/// Numerical rank with a decisive singular-value gap.
pub fn numerical_rank(m: &DMatrix<f64>) -> Result<RankReport> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    let top = s.first().copied().unwrap_or(0.0);
    let rank = s.iter().filter(|&&v| v > 1e-9 * top).count();
    let gap = match (rank, s.get(rank)) {
        (0, _) => f64::INFINITY,
        (r, Some(&next)) => s[r - 1] / next.max(f64::MIN_POSITIVE),
        (_, None) => f64::INFINITY,
    };
    if gap < tol::RANK_GAP {
        return Err(Error::IllConditioned(format!(
            "rank {rank} has singular-value gap {gap:.3e}"
        )));
    }
    Ok(RankReport {
        rank,
        gap,
        singular_values: s,
    })
}

/// Rank of the span of the curvature sphere `K_i` (`index` in `1..=5`) over
/// sampled principal-orbit points.
pub fn curvature_sphere_span(index: usize, field: Field, samples: usize, seed: u64) -> Result<RankReport> {
    if !(1..=5).contains(&index) {
        return Err(Error::domain(format!("curvature sphere index {index} not in 1..=5")));
    }
    let big_n = ambient_dim(4, field)?;
    if samples < big_n + 2 {
        return Err(Error::domain(format!("need at least {} samples", big_n + 2)));
    }
    let basis = orthonormal_basis(4, field)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(samples);
    for _ in 0..samples {
        let a = sample_orbit(4, field, Region::BTilde, &mut rng)?.a;
        rows.push(legendre_lift_in(&a, &basis)?.k[index - 1].coordinates.clone());
    }
    let m = DMatrix::from_fn(samples, big_n + 2, |i, j| rows[i][j]);
    numerical_rank(&m)
}

/// Rank of `dφ` at `(I, D)` on `{(Ě_ij, 0)} ∪ {(0, X_α)}`, real case.
pub fn chart_differential_rank(d: &FMatrix) -> Result<RankReport> {
    let n = d.n();
    if n % 2 == 1 {
        return Err(Error::domain("the chart needs even n"));
    }
    let d = d.clone().with_field(Field::Real);
    let basis = orthonormal_basis(n, Field::Real)?;
    let mut images: Vec<FMatrix> = pairs(n)
        .map(|(i, j)| {
            let x = e_check(Field::Real, n, i, j);
            &d.matmul(&x) - &x.matmul(&d)
        })
        .collect();
    images.extend((1..=n / 2 - 1).map(|al| x_alpha(&d, al)));
    let rows: Vec<Vec<f64>> = images.iter().map(|v| coordinates(v, &basis)).collect();
    numerical_rank(&DMatrix::from_fn(rows.len(), basis.len(), |i, j| rows[i][j]))
}

/// The chart frame `Y_ij(B) = P^T Ê_ij P` where `B = P^T D' P`, `P` near a reference.
#[derive(Debug, Clone)]
pub struct ChartFrame {
    pub at: FMatrix,
    reference: FMatrix,
}

impl ChartFrame {
    /// `at` must be `diag(λ1, -λ1, λ2, -λ2, ...)` with distinct nonzero `λ`.
    pub fn new(at: &FMatrix) -> Result<Self> {
        let n = at.n();
        let mu = at.diagonal_real();
        if at.field() != Field::Real || n % 2 == 1 {
            return Err(Error::domain("the chart frame is real and needs even n"));
        }
        let off = (at - &FMatrix::diag(Field::Real, &mu)).max_abs();
        let ordered = mu.chunks(2).all(|c| c[0] > 0.0 && (c[0] + c[1]).abs() <= 1e-12)
            && mu.chunks(2).zip(mu.chunks(2).skip(1)).all(|(x, y)| x[0] > y[0]);
        if off > 0.0 || !ordered {
            return Err(Error::domain("chart frame base point must be an ordered balanced diagonal"));
        }
        Ok(ChartFrame {
            at: at.clone(),
            reference: FMatrix::identity(Field::Real, n),
        })
    }

    /// First factor of `φ^-1(b)`: rows are eigenvectors, signs aligned with the reference.
    ///
    /// Flow integrators evaluate the frame slightly off the orbit, so rows are
    /// matched to the base diagonal by nearest eigenvalue rather than by an
    /// exact balanced form.
    pub fn rotation_at(&self, b: &FMatrix) -> Result<FMatrix> {
        let n = b.n();
        let eig = hermitian_eigen(&b.clone().with_field(Field::Real))?;
        let mu = self.at.diagonal_real();
        let mut p = FMatrix::zeros(Field::Real, n);
        for (k, m) in mu.iter().enumerate() {
            let c = (0..n)
                .min_by(|&x, &y| (eig.values[x] - m).abs().total_cmp(&(eig.values[y] - m).abs()))
                .unwrap_or(k);
            for j in 0..n {
                p.set(k, j, eig.vectors.get(j, c));
            }
        }
        for k in 0..n {
            let dot: f64 = (0..n).map(|j| p.get(k, j).w * self.reference.get(k, j).w).sum();
            if dot < 0.0 {
                for j in 0..n {
                    p.set(k, j, -p.get(k, j));
                }
            }
        }
        Ok(p)
    }

    pub fn y(&self, pair: (usize, usize), b: &FMatrix) -> Result<FMatrix> {
        let p = self.rotation_at(b)?;
        Ok(e_hat(Field::Real, b.n(), pair.0, pair.1).conjugate_by(&p))
    }

    /// One classical Runge–Kutta step of the flow of `Y_pair`.
    pub fn flow(&self, pair: (usize, usize), b: &FMatrix, h: f64) -> Result<FMatrix> {
        let k1 = self.y(pair, b)?;
        let k2 = self.y(pair, &b.axpy(h / 2.0, &k1))?;
        let k3 = self.y(pair, &b.axpy(h / 2.0, &k2))?;
        let k4 = self.y(pair, &b.axpy(h, &k3))?;
        let incr = k1.axpy(2.0, &k2).axpy(2.0, &k3).axpy(1.0, &k4);
        Ok(b.axpy(h / 6.0, &incr))
    }

    fn loop_defect(&self, p1: (usize, usize), p2: (usize, usize), h: f64) -> Result<FMatrix> {
        let b = self.flow(p1, &self.at, h)?;
        let b = self.flow(p2, &b, h)?;
        let b = self.flow(p1, &b, -h)?;
        let b = self.flow(p2, &b, -h)?;
        Ok(&b - &self.at)
    }

    /// `[Y_p1, Y_p2]` at the base point from the flow commutator loop.
    pub fn bracket_flow(&self, p1: (usize, usize), p2: (usize, usize), h: f64) -> Result<FMatrix> {
        let sum = &self.loop_defect(p1, p2, h)? + &self.loop_defect(p1, p2, -h)?;
        Ok(sum.scale(0.5 / (h * h)))
    }
}

/// Orthogonal projection onto `span(frame)` for an orthonormal `frame`.
fn project(v: &FMatrix, frame: &[FMatrix]) -> FMatrix {
    frame
        .iter()
        .fold(FMatrix::zeros(v.field(), v.n()), |acc, w| acc.axpy(v.inner(w), w))
}

/// `∇_{Y_ij} Y_kl` at a diagonal point: `(μ_i - μ_j)^-1 [Ê_kl, Ě_ij]^T`.
pub fn connection(d: &FMatrix, tangent: &[FMatrix], ij: (usize, usize), kl: (usize, usize)) -> FMatrix {
    let n = d.n();
    let e = e_hat(Field::Real, n, kl.0, kl.1);
    let c = e_check(Field::Real, n, ij.0, ij.1);
    let mu = d.diagonal_real();
    project(&e.commutator(&c), tangent).scale(1.0 / (mu[ij.0] - mu[ij.1]))
}

/// Closed-form `[Y_p1, Y_p2]` at the diagonal point `d`.
pub fn bracket_closed_form(d: &FMatrix, p1: (usize, usize), p2: (usize, usize)) -> Result<FMatrix> {
    let fp = frame_point(d)?;
    Ok(&connection(d, &fp.tangent_frame, p1, p2) - &connection(d, &fp.tangent_frame, p2, p1))
}

/// Brackets of conullity fields used to show each `T_κ^⊥` is not integrable,
/// with the distribution `κ1..κ5` they land in.
pub const OBSTRUCTIONS: [((usize, usize), (usize, usize), usize); 5] = [
    ((0, 1), (1, 2), 1),
    ((0, 1), (0, 3), 2),
    ((0, 1), (1, 3), 3),
    ((0, 1), (0, 2), 4),
    ((0, 2), (0, 3), 5),
];

/// Orthonormal basis of `T_κa` at a diagonal point of `B̃(4, R)`.
pub fn distribution_at_diagonal(d: &FMatrix, kappa: usize) -> Vec<FMatrix> {
    let e = |i, j| e_hat(Field::Real, 4, i, j);
    match kappa {
        1..=4 => {
            let (i, j) = CIRCLE_PAIRS[kappa - 1];
            vec![e(i, j)]
        }
        _ => {
            let x = x_alpha(d, 1);
            vec![e(0, 1), e(2, 3), x.scale(1.0 / x.norm())]
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Obstruction {
    pub pairs: ((usize, usize), (usize, usize)),
    pub kappa: usize,
    pub bracket: FMatrix,
    /// Norm of the component inside `T_κ`.
    pub component: f64,
    /// Norm of the component outside `T_κ`.
    pub off_span: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeakIrreducibility {
    pub obstructions: Vec<Obstruction>,
    pub weakly_irreducible: bool,
}

/// Evaluates the five bracket obstructions at a diagonal point of `B̃(4, R)`.
pub fn weak_irreducibility_check(d: &FMatrix) -> Result<WeakIrreducibility> {
    ChartFrame::new(d)?;
    if d.n() != 4 {
        return Err(Error::domain("weak irreducibility is checked for n = 4"));
    }
    let fp = frame_point(d)?;
    let mut obstructions = Vec::with_capacity(5);
    for (p1, p2, kappa) in OBSTRUCTIONS {
        let bracket =
            &connection(d, &fp.tangent_frame, p1, p2) - &connection(d, &fp.tangent_frame, p2, p1);
        let inside = project(&bracket, &distribution_at_diagonal(d, kappa));
        obstructions.push(Obstruction {
            pairs: (p1, p2),
            kappa,
            component: inside.norm(),
            off_span: (&bracket - &inside).norm(),
            bracket,
        });
    }
    let weakly_irreducible = obstructions
        .iter()
        .all(|o| o.component >= 1e-3 && o.off_span <= 1e-9);
    Ok(WeakIrreducibility {
        obstructions,
        weakly_irreducible,
    })
}
