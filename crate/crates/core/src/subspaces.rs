//! Austere matrices and subspaces of real symmetric matrices in exact
//! arithmetic, the explicit maximal families, the isotropic-subspace bound
//! and the resulting dimension estimate.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{half_index, sample_orbit, Field, Region};
use crate::geometry::{frame_point, second_form_signature, Signature};

/// Dense square matrix with exact rational entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatMatrix {
    n: usize,
    data: Vec<BigRational>,
}

fn int(v: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(v))
}

impl RatMatrix {
    pub fn zeros(n: usize) -> Self {
        RatMatrix {
            n,
            data: vec![BigRational::zero(); n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> BigRational) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        RatMatrix { n, data }
    }

    /// From integer rows.
    pub fn from_ints(rows: &[&[i64]]) -> Self {
        let n = rows.len();
        RatMatrix::from_fn(n, |i, j| int(rows[i][j]))
    }

    pub fn diag(values: &[BigRational]) -> Self {
        RatMatrix::from_fn(values.len(), |i, j| {
            if i == j {
                values[i].clone()
            } else {
                BigRational::zero()
            }
        })
    }

    /// `E_ij + E_ji` (or `E_ii` when `i == j`) scaled by `v`.
    pub fn sym_unit(n: usize, i: usize, j: usize, v: BigRational) -> Self {
        let mut m = RatMatrix::zeros(n);
        m.set(i, j, v.clone());
        m.set(j, i, v);
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &BigRational {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigRational) {
        self.data[i * self.n + j] = v;
    }

    pub fn entries(&self) -> &[BigRational] {
        &self.data
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn add(&self, other: &RatMatrix) -> RatMatrix {
        RatMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, s: &BigRational) -> RatMatrix {
        RatMatrix {
            n: self.n,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn matmul(&self, other: &RatMatrix) -> RatMatrix {
        let n = self.n;
        RatMatrix::from_fn(n, |i, j| {
            (0..n).fold(BigRational::zero(), |acc, k| acc + self.get(i, k) * other.get(k, j))
        })
    }

    pub fn trace(&self) -> BigRational {
        (0..self.n).fold(BigRational::zero(), |acc, i| acc + self.get(i, i))
    }

    /// Least common denominator of the entries.
    fn denominator_lcm(&self) -> BigInt {
        use num_integer::Integer;
        self.data
            .iter()
            .fold(BigInt::one(), |l, v| l.lcm(v.denom()))
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j).to_f64().unwrap_or(f64::NAN))
    }

    /// Nearest rational matrix with entries `round(x * scale) / scale`, with the
    /// rounding error.
    pub fn round_from(m: &DMatrix<f64>, scale: i64) -> (RatMatrix, f64) {
        let mut err: f64 = 0.0;
        let r = RatMatrix::from_fn(m.nrows(), |i, j| {
            let x = m[(i, j)] * scale as f64;
            err = err.max((x - x.round()).abs());
            BigRational::new(BigInt::from(x.round() as i64), BigInt::from(scale))
        });
        (r, err)
    }
}

impl fmt::Display for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.n {
            let row: Vec<String> = (0..self.n).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// Index of the first odd power `2k+1` whose trace is nonzero, if any.
fn first_nonzero_odd_trace_big(m: &[BigInt], n: usize) -> Option<usize> {
    let half = half_index(n.max(1));
    let mut powers: Vec<Vec<BigInt>> = Vec::with_capacity(half + 2);
    let mut id = vec![BigInt::zero(); n * n];
    for i in 0..n {
        id[i * n + i] = BigInt::one();
    }
    powers.push(id);
    for k in 0..=half {
        let prev = &powers[k];
        let mut next = vec![BigInt::zero(); n * n];
        for i in 0..n {
            for l in 0..n {
                let a = &prev[i * n + l];
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    next[i * n + j] += a * &m[l * n + j];
                }
            }
        }
        powers.push(next);
    }
    // tr A^(2k+1) = sum_ij (A^k)_ij (A^(k+1))_ji
    (0..=half).find(|&k| {
        let mut t = BigInt::zero();
        for i in 0..n {
            for j in 0..n {
                t += &powers[k][i * n + j] * &powers[k + 1][j * n + i];
            }
        }
        !t.is_zero()
    })
}

/// As above in checked `i128`; `None` on overflow.
fn first_nonzero_odd_trace_i128(m: &[i128], n: usize) -> Option<Option<usize>> {
    let half = half_index(n.max(1));
    let mut powers: Vec<Vec<i128>> = Vec::with_capacity(half + 2);
    let mut id = vec![0i128; n * n];
    for i in 0..n {
        id[i * n + i] = 1;
    }
    powers.push(id);
    for k in 0..=half {
        let prev = &powers[k];
        let mut next = vec![0i128; n * n];
        for i in 0..n {
            for l in 0..n {
                let a = prev[i * n + l];
                if a == 0 {
                    continue;
                }
                for j in 0..n {
                    let t = a.checked_mul(m[l * n + j])?;
                    next[i * n + j] = next[i * n + j].checked_add(t)?;
                }
            }
        }
        powers.push(next);
    }
    for k in 0..=half {
        let mut t: i128 = 0;
        for i in 0..n {
            for j in 0..n {
                t = t.checked_add(powers[k][i * n + j].checked_mul(powers[k + 1][j * n + i])?)?;
            }
        }
        if t != 0 {
            return Some(Some(k));
        }
    }
    Some(None)
}

fn first_nonzero_odd_trace(m: &[BigInt], n: usize) -> Option<usize> {
    let small: Option<Vec<i128>> = m.iter().map(ToPrimitive::to_i128).collect();
    if let Some(small) = small {
        if let Some(r) = first_nonzero_odd_trace_i128(&small, n) {
            return r;
        }
    }
    first_nonzero_odd_trace_big(m, n)
}

fn integer_entries(a: &RatMatrix, lcm: &BigInt) -> Vec<BigInt> {
    a.data
        .iter()
        .map(|v| (v * BigRational::from_integer(lcm.clone())).to_integer())
        .collect()
}

/// `tr A^(2k+1) = 0` for `0 <= k <= ⌊(n-1)/2⌋`, decided exactly.
pub fn is_austere_exact(a: &RatMatrix) -> Result<bool> {
    if !a.is_symmetric() {
        return Err(Error::domain("austerity is tested on symmetric matrices"));
    }
    let lcm = a.denominator_lcm();
    Ok(first_nonzero_odd_trace(&integer_entries(a, &lcm), a.n).is_none())
}

/// A linear subspace of symmetric matrices with an exact basis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubspaceSpec {
    pub n: usize,
    pub basis: Vec<RatMatrix>,
}

/// Exact rank of a list of vectors by fraction-free elimination.
pub fn exact_rank(rows: &[Vec<BigRational>]) -> usize {
    let mut m: Vec<Vec<BigRational>> = rows.to_vec();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(pivot) = (rank..m.len()).find(|&r| !m[r][c].is_zero()) else {
            continue;
        };
        m.swap(rank, pivot);
        let p = m[rank][c].clone();
        for r in 0..m.len() {
            if r != rank && !m[r][c].is_zero() {
                let f = &m[r][c] / &p;
                for k in c..cols {
                    let v = &m[rank][k] * &f;
                    m[r][k] -= v;
                }
            }
        }
        rank += 1;
    }
    rank
}

impl SubspaceSpec {
    /// Checks size, symmetry and linear independence.
    pub fn new(n: usize, basis: Vec<RatMatrix>) -> Result<Self> {
        if let Some(b) = basis.iter().find(|b| b.n != n || !b.is_symmetric()) {
            return Err(Error::domain(format!(
                "basis element is not a symmetric {n}x{n} matrix:\n{b}"
            )));
        }
        let rows: Vec<Vec<BigRational>> = basis.iter().map(|b| b.data.clone()).collect();
        if exact_rank(&rows) != basis.len() {
            return Err(Error::domain("basis is linearly dependent"));
        }
        Ok(SubspaceSpec { n, basis })
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn combination(&self, coefficients: &[i64]) -> RatMatrix {
        self.basis
            .iter()
            .zip(coefficients)
            .fold(RatMatrix::zeros(self.n), |acc, (b, &c)| acc.add(&b.scale(&int(c))))
    }

    /// Whether `m` lies in the span.
    pub fn contains(&self, m: &RatMatrix) -> bool {
        let mut rows: Vec<Vec<BigRational>> = self.basis.iter().map(|b| b.data.clone()).collect();
        rows.push(m.data.clone());
        exact_rank(&rows) == self.dim()
    }

    /// Whether every basis element of `other` lies in the span.
    pub fn contains_subspace(&self, other: &SubspaceSpec) -> bool {
        let mut rows: Vec<Vec<BigRational>> = self.basis.iter().map(|b| b.data.clone()).collect();
        rows.extend(other.basis.iter().map(|b| b.data.clone()));
        exact_rank(&rows) == self.dim()
    }
}

#[derive(Serialize, Deserialize)]
struct SubspaceJson {
    n: usize,
    basis: Vec<Vec<Vec<String>>>,
}

impl Serialize for SubspaceSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let basis = self
            .basis
            .iter()
            .map(|b| {
                (0..self.n)
                    .map(|i| (0..self.n).map(|j| b.get(i, j).to_string()).collect())
                    .collect()
            })
            .collect();
        SubspaceJson { n: self.n, basis }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for SubspaceSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = SubspaceJson::deserialize(d)?;
        let mut basis = Vec::with_capacity(raw.basis.len());
        for m in &raw.basis {
            if m.len() != raw.n || m.iter().any(|r| r.len() != raw.n) {
                return Err(D::Error::custom(format!("basis matrix is not {0}x{0}", raw.n)));
            }
            let mut out = RatMatrix::zeros(raw.n);
            for (i, row) in m.iter().enumerate() {
                for (j, v) in row.iter().enumerate() {
                    out.set(i, j, parse_rational(v).map_err(D::Error::custom)?);
                }
            }
            basis.push(out);
        }
        SubspaceSpec::new(raw.n, basis).map_err(D::Error::custom)
    }
}

/// Parses `"p/q"` or `"p"`; decimal and exponent forms are rejected.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let t = s.trim();
    if t.contains(['.', 'e', 'E']) {
        return Err(Error::Parse(format!(
            "floating input {t:?} is not accepted in exact arithmetic"
        )));
    }
    BigRational::from_str(t).map_err(|e| Error::Parse(format!("{t:?}: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub coefficients: Vec<i64>,
    /// The first odd power with nonzero trace.
    pub power: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceVerdict {
    pub austere: bool,
    pub trials: usize,
    pub witness: Option<Witness>,
    /// Upper bound on the chance that a non-austere subspace passes all trials.
    pub failure_bound: f64,
}

struct IntegerBasis {
    n: usize,
    basis: Vec<Vec<BigInt>>,
}

impl IntegerBasis {
    fn new(spec: &SubspaceSpec) -> Self {
        use num_integer::Integer;
        let lcm = spec
            .basis
            .iter()
            .fold(BigInt::one(), |l, b| l.lcm(&b.denominator_lcm()));
        IntegerBasis {
            n: spec.n,
            basis: spec.basis.iter().map(|b| integer_entries(b, &lcm)).collect(),
        }
    }

    fn check(&self, coefficients: &[i64]) -> Option<usize> {
        let mut m = vec![BigInt::zero(); self.n * self.n];
        for (b, &c) in self.basis.iter().zip(coefficients) {
            if c == 0 {
                continue;
            }
            let c = BigInt::from(c);
            for (x, y) in m.iter_mut().zip(b) {
                *x += &c * y;
            }
        }
        first_nonzero_odd_trace(&m, self.n)
    }
}

/// Tests random integer combinations with coefficients in `[-n, n]`.
///
/// The trace conditions are polynomials of degree at most `n` in the
/// coefficients, so a non-austere subspace survives one trial with
/// probability at most `n / (2n + 1)`.
pub fn is_austere_subspace(spec: &SubspaceSpec, trials: usize, seed: u64) -> SubspaceVerdict {
    let ib = IntegerBasis::new(spec);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bound = spec.n as i64;
    let per_trial = spec.n as f64 / (2 * spec.n + 1) as f64;
    for t in 0..trials {
        let c: Vec<i64> = (0..spec.dim()).map(|_| rng.random_range(-bound..=bound)).collect();
        if let Some(k) = ib.check(&c) {
            return SubspaceVerdict {
                austere: false,
                trials: t + 1,
                witness: Some(Witness {
                    coefficients: c,
                    power: 2 * k + 1,
                }),
                failure_bound: 0.0,
            };
        }
    }
    SubspaceVerdict {
        austere: true,
        trials,
        witness: None,
        failure_bound: per_trial.powi(trials.min(i32::MAX as usize) as i32),
    }
}

/// Deterministic test on the grid `{0..n}^dim`; a proof for `dim <= 4`.
pub fn is_austere_subspace_grid(spec: &SubspaceSpec) -> Result<SubspaceVerdict> {
    if spec.dim() > 4 {
        return Err(Error::domain("grid mode is limited to dim <= 4"));
    }
    let ib = IntegerBasis::new(spec);
    let side = spec.n as i64 + 1;
    let total = (side as usize).pow(spec.dim() as u32);
    for idx in 0..total {
        let mut rest = idx;
        let c: Vec<i64> = (0..spec.dim())
            .map(|_| {
                let v = (rest % side as usize) as i64;
                rest /= side as usize;
                v
            })
            .collect();
        if let Some(k) = ib.check(&c) {
            return Ok(SubspaceVerdict {
                austere: false,
                trials: idx + 1,
                witness: Some(Witness {
                    coefficients: c,
                    power: 2 * k + 1,
                }),
                failure_bound: 0.0,
            });
        }
    }
    Ok(SubspaceVerdict {
        austere: true,
        trials: total,
        witness: None,
        failure_bound: 0.0,
    })
}

/// The explicit maximal austere families.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BryantFamily {
    /// `[[m1, m2], [m2, -m1]]` with symmetric blocks (zero-padded for odd `n`).
    PairedBlock,
    /// `[[0, m], [m^t, 0]]` with `m` of size `k x (n-k)`.
    OffDiagonal { k: usize },
    /// `[[λI, m], [m^t, -λI]]` (zero-padded for odd `n`).
    LambdaBlock,
    /// `[[a, b], [b, -a]]`, padded with zeros to size `n` (`n` in 2, 3).
    TraceFreePlane,
    /// The three-parameter `n = 4` family; `λ1 >= λ2 >= 0 >= λ3` with
    /// `λ1 λ2 λ3 + λ1 + λ2 + λ3 = 0`.
    Special { lambdas: [String; 3] },
}

impl BryantFamily {
    pub fn special(l: [BigRational; 3]) -> Self {
        BryantFamily::Special {
            lambdas: l.map(|v| v.to_string()),
        }
    }
}

/// `λ3 = -(λ1 + λ2) / (1 + λ1 λ2)`, the value that satisfies the cubic constraint.
pub fn special_lambda3(l1: &BigRational, l2: &BigRational) -> BigRational {
    -(l1 + l2) / (BigRational::one() + l1 * l2)
}

pub fn special_constraint(l: &[BigRational; 3]) -> BigRational {
    &l[0] * &l[1] * &l[2] + &l[0] + &l[1] + &l[2]
}

/// Dimension stated for the family.
pub fn family_dim(family: &BryantFamily, n: usize) -> usize {
    let half = half_index(n);
    let q = if n % 2 == 0 { half + 1 } else { half };
    match family {
        BryantFamily::PairedBlock => q * (q + 1),
        BryantFamily::OffDiagonal { k } => k * (n - k),
        BryantFamily::LambdaBlock => q * q + 1,
        BryantFamily::TraceFreePlane => 2,
        BryantFamily::Special { .. } => 3,
    }
}

pub fn bryant_subspace(family: &BryantFamily, n: usize) -> Result<SubspaceSpec> {
    if n < 2 {
        return Err(Error::domain(format!("need n >= 2, got {n}")));
    }
    let half = half_index(n);
    let q = if n % 2 == 0 { half + 1 } else { half };
    let one = BigRational::one;
    let mut basis = Vec::new();
    match family {
        BryantFamily::PairedBlock => {
            if q == 0 {
                return Err(Error::domain("paired blocks need n >= 2"));
            }
            for a in 0..q {
                for b in a..q {
                    let mut m1 = RatMatrix::sym_unit(n, a, b, one());
                    m1.set(q + a, q + b, -one());
                    m1.set(q + b, q + a, -one());
                    basis.push(m1);
                    let mut m2 = RatMatrix::sym_unit(n, a, q + b, one());
                    m2.set(b, q + a, one());
                    m2.set(q + a, b, one());
                    basis.push(m2);
                }
            }
        }
        BryantFamily::OffDiagonal { k } => {
            if *k == 0 || 2 * k > n {
                return Err(Error::Constraint(format!(
                    "off-diagonal family needs 1 <= k <= n/2, got k = {k}"
                )));
            }
            for a in 0..*k {
                for b in *k..n {
                    basis.push(RatMatrix::sym_unit(n, a, b, one()));
                }
            }
        }
        BryantFamily::LambdaBlock => {
            if q == 0 {
                return Err(Error::domain("lambda blocks need n >= 3 when n is odd"));
            }
            let mut d = vec![BigRational::zero(); n];
            d[..q].iter_mut().for_each(|v| *v = one());
            d[q..2 * q].iter_mut().for_each(|v| *v = -one());
            basis.push(RatMatrix::diag(&d));
            for a in 0..q {
                for b in 0..q {
                    basis.push(RatMatrix::sym_unit(n, a, q + b, one()));
                }
            }
        }
        BryantFamily::TraceFreePlane => {
            if !(2..=3).contains(&n) {
                return Err(Error::domain("the plane family is stated for n = 2, 3"));
            }
            let mut d = vec![BigRational::zero(); n];
            d[0] = one();
            d[1] = -one();
            basis.push(RatMatrix::diag(&d));
            basis.push(RatMatrix::sym_unit(n, 0, 1, one()));
        }
        BryantFamily::Special { lambdas } => {
            if n != 4 {
                return Err(Error::domain("the three-parameter family needs n = 4"));
            }
            let l: Vec<BigRational> = lambdas
                .iter()
                .map(|s| parse_rational(s))
                .collect::<Result<_>>()?;
            let l = [l[0].clone(), l[1].clone(), l[2].clone()];
            let zero = BigRational::zero();
            if !(l[0] >= l[1] && l[1] >= zero && zero >= l[2]) {
                return Err(Error::Constraint(format!(
                    "need λ1 >= λ2 >= 0 >= λ3, got ({}, {}, {})",
                    l[0], l[1], l[2]
                )));
            }
            let c = special_constraint(&l);
            if !c.is_zero() {
                return Err(Error::Constraint(format!(
                    "λ1λ2λ3 + λ1 + λ2 + λ3 = {c}, not 0"
                )));
            }
            let mut x1 = RatMatrix::sym_unit(4, 0, 1, one());
            x1.set(2, 3, l[0].clone());
            x1.set(3, 2, l[0].clone());
            let mut x2 = RatMatrix::sym_unit(4, 0, 2, one());
            x2.set(1, 3, l[1].clone());
            x2.set(3, 1, l[1].clone());
            let mut x3 = RatMatrix::sym_unit(4, 0, 3, one());
            x3.set(1, 2, l[2].clone());
            x3.set(2, 1, l[2].clone());
            basis.extend([x1, x2, x3]);
        }
    }
    SubspaceSpec::new(n, basis)
}

/// Whether `m` belongs to the family (exact membership in its span).
pub fn family_contains(family: &BryantFamily, n: usize, m: &RatMatrix) -> Result<bool> {
    Ok(bryant_subspace(family, n)?.contains(m))
}

/// All explicit families for size `n >= 2` (every admissible `k` for the
/// off-diagonal blocks).
pub fn families_for(n: usize) -> Vec<BryantFamily> {
    let mut out = Vec::new();
    if n < 2 {
        return out;
    }
    out.push(BryantFamily::PairedBlock);
    out.extend((1..=n / 2).map(|k| BryantFamily::OffDiagonal { k }));
    out.push(BryantFamily::LambdaBlock);
    if (2..=3).contains(&n) {
        out.push(BryantFamily::TraceFreePlane);
    }
    out
}

/// Signature `(r, s)` of a symmetric bilinear form on `R^n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BilinearFormSig {
    pub n: usize,
    pub r: usize,
    pub s: usize,
}

impl BilinearFormSig {
    pub fn new(n: usize, r: usize, s: usize) -> Result<Self> {
        if r + s > n {
            return Err(Error::domain(format!("r + s = {} exceeds n = {n}", r + s)));
        }
        Ok(BilinearFormSig { n, r, s })
    }

    /// Counts eigenvalues above `tol`, below `-tol`.
    pub fn of(form: &DMatrix<f64>, tol: f64) -> Self {
        let e = SymmetricEigen::new(form.clone()).eigenvalues;
        BilinearFormSig {
            n: form.nrows(),
            r: e.iter().filter(|&&v| v > tol).count(),
            s: e.iter().filter(|&&v| v < -tol).count(),
        }
    }
}

/// Upper bound `(n - r - s) + min(r, s)` on totally isotropic subspaces.
pub fn witt_bound(sig: BilinearFormSig) -> usize {
    (sig.n - sig.r - sig.s) + sig.r.min(sig.s)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsotropicSubspace {
    /// Euclidean-orthonormal basis vectors.
    pub basis: Vec<Vec<f64>>,
    /// `max |b(w_i, w_j)|`.
    pub max_form_value: f64,
}

/// Null space of `m` (columns), via SVD.
fn null_space(m: &DMatrix<f64>, cols: usize, tol: f64) -> DMatrix<f64> {
    if m.nrows() == 0 {
        return DMatrix::identity(cols, cols);
    }
    // Pad to at least `cols` rows so the SVD returns a full right basis.
    let mut padded = DMatrix::zeros(m.nrows().max(cols), cols);
    padded.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let top = svd.singular_values.max().max(1.0);
    let keep: Vec<usize> = (0..cols)
        .filter(|&i| svd.singular_values[i] <= tol * top)
        .collect();
    DMatrix::from_fn(cols, keep.len(), |r, c| vt[(keep[c], r)])
}

fn one_attempt<R: Rng>(form: &DMatrix<f64>, target: usize, rng: &mut R, tol: f64) -> Vec<DVector<f64>> {
    let n = form.nrows();
    let mut w: Vec<DVector<f64>> = Vec::new();
    while w.len() < target {
        // Complement: Euclidean- and b-orthogonal to the current span.
        let mut cons = DMatrix::zeros(2 * w.len(), n);
        for (i, v) in w.iter().enumerate() {
            cons.row_mut(2 * i).copy_from(&v.transpose());
            cons.row_mut(2 * i + 1).copy_from(&(form * v).transpose());
        }
        let c = null_space(&cons, n, 1e-10);
        if c.ncols() == 0 {
            break;
        }
        let restricted = c.transpose() * form * &c;
        let eig = SymmetricEigen::new(restricted);
        let scale = eig.eigenvalues.amax().max(1.0);
        let kernel: Vec<usize> = (0..c.ncols())
            .filter(|&i| eig.eigenvalues[i].abs() <= tol * scale)
            .collect();
        let pos: Vec<usize> = (0..c.ncols()).filter(|&i| eig.eigenvalues[i] > tol * scale).collect();
        let neg: Vec<usize> = (0..c.ncols()).filter(|&i| eig.eigenvalues[i] < -tol * scale).collect();
        let mut coeffs = DVector::zeros(c.ncols());
        if !kernel.is_empty() {
            for &i in &kernel {
                coeffs[i] = rng.random_range(-1.0..1.0);
            }
        } else if !pos.is_empty() && !neg.is_empty() {
            let mut u = DVector::zeros(c.ncols());
            let mut v = DVector::zeros(c.ncols());
            for &i in &pos {
                u[i] = rng.random_range(-1.0..1.0);
            }
            for &i in &neg {
                v[i] = rng.random_range(-1.0..1.0);
            }
            let bu: f64 = pos.iter().map(|&i| eig.eigenvalues[i] * u[i] * u[i]).sum();
            let bv: f64 = neg.iter().map(|&i| -eig.eigenvalues[i] * v[i] * v[i]).sum();
            coeffs = u / bu.sqrt() + v / bv.sqrt();
        } else {
            break;
        }
        let x = &c * (&eig.eigenvectors * coeffs);
        let norm = x.norm();
        if norm < 1e-12 {
            continue;
        }
        w.push(x / norm);
    }
    w
}

/// Randomized greedy search for a totally isotropic subspace of dimension
/// `target`: kernel directions first, then hyperbolic combinations inside
/// the b-orthogonal complement.
pub fn isotropic_search(
    form: &DMatrix<f64>,
    target: usize,
    budget: usize,
    seed: u64,
) -> Result<Option<IsotropicSubspace>> {
    if form.nrows() != form.ncols() || (form - form.transpose()).amax() > 1e-12 * form.amax().max(1.0) {
        return Err(Error::domain("form must be square and symmetric"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tol = 1e-9;
    for _ in 0..budget {
        let w = one_attempt(form, target, &mut rng, tol);
        if w.len() >= target {
            let mut max_form_value: f64 = 0.0;
            for a in &w {
                for b in &w {
                    max_form_value = max_form_value.max((a.transpose() * form * b)[(0, 0)].abs());
                }
            }
            return Ok(Some(IsotropicSubspace {
                basis: w.iter().map(|v| v.iter().copied().collect()).collect(),
                max_form_value,
            }));
        }
    }
    Ok(None)
}

/// Largest dimension reached by `attempts` independent greedy runs with no target cap.
pub fn isotropic_search_max(form: &DMatrix<f64>, attempts: usize, seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..attempts)
        .map(|_| one_attempt(form, form.nrows() + 1, &mut rng, 1e-9).len())
        .max()
        .unwrap_or(0)
}

/// Upper bound on austere subspaces meeting the regular set.
pub fn dimest_bound(n: usize) -> Result<usize> {
    if n < 3 {
        return Err(Error::domain(format!("need n >= 3, got {n}")));
    }
    let p = half_index(n);
    Ok(if n % 2 == 1 { p * p + 2 * p } else { p * p + 3 * p + 2 })
}

/// Nullity and index of the second fundamental form in direction `ξ1`
/// predicted for a regular real point.
pub fn predicted_signature(n: usize) -> Signature {
    let p = half_index(n);
    let (nullity, index) = if n % 2 == 1 {
        (2 * p - 1, p * p)
    } else {
        (2 * p + 1, p * p + p)
    };
    Signature {
        nullity,
        pos_index: index,
        neg_index: index,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimestReport {
    pub n: usize,
    pub predicted: Signature,
    pub observed: Vec<Signature>,
    pub mismatches: usize,
    /// `1 + nullity + index` from the first observation.
    pub chain_bound: usize,
    pub dimest_bound: usize,
}

pub fn verify_dimest_ingredients(n: usize, trials: usize, seed: u64) -> Result<DimestReport> {
    if !(3..=8).contains(&n) {
        return Err(Error::domain(format!("n must lie in 3..=8, got {n}")));
    }
    let predicted = predicted_signature(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut observed = Vec::with_capacity(trials);
    for _ in 0..trials {
        let a = sample_orbit(n, Field::Real, Region::B, &mut rng)?.a;
        observed.push(second_form_signature(&frame_point(&a)?, 1)?);
    }
    let mismatches = observed.iter().filter(|s| **s != predicted).count();
    let first = observed.first().copied().unwrap_or(predicted);
    Ok(DimestReport {
        n,
        predicted,
        chain_bound: 1 + first.nullity + first.pos_index.min(first.neg_index),
        observed,
        mismatches,
        dimest_bound: dimest_bound(n)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn rat(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    #[test]
    fn exact_austerity_examples() {
        let half = RatMatrix::diag(&[rat(1, 2), rat(-1, 2), rat(1, 2), rat(-1, 2)]);
        assert!(is_austere_exact(&half).unwrap());
        let d = RatMatrix::from_ints(&[&[2, 0, 0], &[0, -1, 0], &[0, 0, -1]]);
        assert!(!is_austere_exact(&d).unwrap());
        for x in [rat(3, 7), rat(-5, 2), rat(0, 1)] {
            let m = RatMatrix::sym_unit(2, 0, 1, x);
            assert!(is_austere_exact(&m).unwrap());
        }
        let mut ns = RatMatrix::zeros(2);
        ns.set(0, 1, rat(1, 1));
        assert!(is_austere_exact(&ns).is_err());
    }

    #[test]
    fn subspace_examples() {
        let paired = bryant_subspace(&BryantFamily::PairedBlock, 4).unwrap();
        assert!(is_austere_subspace(&paired, 500, 1).austere);
        let spec = SubspaceSpec::new(
            3,
            vec![
                RatMatrix::from_ints(&[&[1, 0, 0], &[0, 0, 0], &[0, 0, -1]]),
                RatMatrix::from_ints(&[&[0, 0, 0], &[0, 1, 0], &[0, 0, -1]]),
            ],
        )
        .unwrap();
        let v = is_austere_subspace(&spec, 100, 2);
        assert!(!v.austere);
        let w = v.witness.unwrap();
        assert!(!is_austere_exact(&spec.combination(&w.coefficients)).unwrap());
        let witness = spec.combination(&[1, 1]);
        assert_eq!(witness, RatMatrix::from_ints(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, -2]]));
        assert_eq!(witness.matmul(&witness).matmul(&witness).trace(), rat(-6, 1));
        let zero = SubspaceSpec::new(3, vec![]).unwrap();
        assert!(is_austere_subspace(&zero, 10, 0).austere);
    }

    #[test]
    fn family_dimensions() {
        assert_eq!(bryant_subspace(&BryantFamily::OffDiagonal { k: 2 }, 4).unwrap().dim(), 4);
        assert_eq!(bryant_subspace(&BryantFamily::LambdaBlock, 4).unwrap().dim(), 5);
        let l = [rat(1, 1), rat(1, 1), rat(-1, 1)];
        assert!(special_constraint(&l).is_zero());
        let s = bryant_subspace(&BryantFamily::special(l), 4).unwrap();
        assert_eq!(s.dim(), 3);
        assert!(is_austere_subspace_grid(&s).unwrap().austere);
        for n in 2..9 {
            for f in families_for(n) {
                let s = bryant_subspace(&f, n).unwrap();
                assert_eq!(s.dim(), family_dim(&f, n), "{f:?} n={n}");
            }
        }
    }

    #[test]
    fn constraint_violations() {
        let bad = BryantFamily::special([rat(1, 1), rat(1, 1), rat(-1, 2)]);
        assert!(matches!(bryant_subspace(&bad, 4), Err(Error::Constraint(_))));
        let order = BryantFamily::special([rat(1, 1), rat(2, 1), rat(-1, 1)]);
        assert!(matches!(bryant_subspace(&order, 4), Err(Error::Constraint(_))));
        assert!(bryant_subspace(&BryantFamily::OffDiagonal { k: 3 }, 4).is_err());
    }

    #[test]
    fn non_austere_family_detected_by_grid() {
        let spec = SubspaceSpec::new(
            3,
            vec![RatMatrix::from_ints(&[&[2, 0, 0], &[0, -1, 0], &[0, 0, -1]])],
        )
        .unwrap();
        assert!(!is_austere_subspace_grid(&spec).unwrap().austere);
    }

    #[test]
    fn json_round_trip() {
        let s = bryant_subspace(&BryantFamily::special([rat(3, 1), rat(1, 2), rat(-7, 5)]), 4);
        assert!(s.is_ok(), "{s:?}");
        let s = s.unwrap();
        let json = serde_json::to_string(&s).unwrap();
        assert!(json.contains("\"-7/5\""));
        let back: SubspaceSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        let float = r#"{"n":2,"basis":[[["0.5","0"],["0","-0.5"]]]}"#;
        assert!(serde_json::from_str::<SubspaceSpec>(float).is_err());
    }

    #[test]
    fn witt_examples() {
        assert_eq!(witt_bound(BilinearFormSig::new(3, 1, 1).unwrap()), 2);
        assert_eq!(witt_bound(BilinearFormSig::new(7, 2, 2).unwrap()), 5);
        assert_eq!(witt_bound(BilinearFormSig::new(11, 4, 4).unwrap()), 7);
        assert!(BilinearFormSig::new(3, 2, 2).is_err());
    }

    #[test]
    fn isotropic_examples() {
        let f = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, -1.0, 0.0]));
        let found = isotropic_search(&f, 2, 10, 1).unwrap().unwrap();
        assert_eq!(found.basis.len(), 2);
        assert!(found.max_form_value < 1e-10);
        let g = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 1.0, -1.0]));
        assert!(isotropic_search(&g, 2, 50, 1).unwrap().is_none());
        assert_eq!(isotropic_search_max(&g, 50, 2), 1);
    }

    #[test]
    fn dimest_values() {
        assert_eq!(dimest_bound(4).unwrap(), 6);
        assert_eq!(dimest_bound(5).unwrap(), 8);
        assert_eq!(dimest_bound(3).unwrap(), 3);
        assert!(dimest_bound(2).is_err());
        for p in 1..4 {
            assert_eq!(dimest_bound(2 * p + 2).unwrap(), (p + 1) * (p + 2));
        }
    }

    #[test]
    fn dimest_ingredients_small() {
        for (n, sig) in [(4, (3, 2, 2)), (5, (3, 4, 4)), (7, (5, 9, 9))] {
            let r = verify_dimest_ingredients(n, 3, 5).unwrap();
            assert_eq!(r.mismatches, 0);
            let o = r.observed[0];
            assert_eq!((o.nullity, o.pos_index, o.neg_index), sig);
            assert_eq!(r.chain_bound, r.dimest_bound);
        }
    }

    proptest! {
        #[test]
        fn special_lambda3_satisfies_constraint(a in 0i64..50, b in 0i64..50, q in 1i64..20) {
            let (l1, l2) = if a >= b { (rat(a, q), rat(b, q)) } else { (rat(b, q), rat(a, q)) };
            let l3 = special_lambda3(&l1, &l2);
            prop_assert!(l3 <= BigRational::zero());
            prop_assert!(special_constraint(&[l1, l2, l3]).is_zero());
        }

        #[test]
        fn witt_bound_monotone(n in 1usize..20, lo in 0usize..10, hi in 0usize..10) {
            let lo = lo.min(n / 2);
            let hi = hi.min(n - lo);
            if hi >= lo && hi + 1 + lo <= n {
                let a = witt_bound(BilinearFormSig::new(n, hi, lo).unwrap());
                let b = witt_bound(BilinearFormSig::new(n, hi + 1, lo).unwrap());
                prop_assert!(b <= a);
            }
        }
    }
}
