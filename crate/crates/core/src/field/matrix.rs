use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use super::{Field, Quaternion};
use crate::error::{Error, Result};

/// A dense square matrix over R, C or H.
///
/// Entries are always stored as quaternions; `field` records which
/// components may be nonzero. Products of matrices over different fields
/// are taken in the larger field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct FMatrix {
    field: Field,
    n: usize,
    data: Vec<Quaternion>,
}

impl FMatrix {
    pub fn zeros(field: Field, n: usize) -> Self {
        FMatrix {
            field,
            n,
            data: vec![Quaternion::ZERO; n * n],
        }
    }

    pub fn identity(field: Field, n: usize) -> Self {
        let mut m = FMatrix::zeros(field, n);
        for i in 0..n {
            m.data[i * n + i] = Quaternion::ONE;
        }
        m
    }

    pub fn diag(field: Field, values: &[f64]) -> Self {
        let n = values.len();
        let mut m = FMatrix::zeros(field, n);
        for (i, &v) in values.iter().enumerate() {
            m.data[i * n + i] = Quaternion::real(v);
        }
        m
    }

    pub fn from_fn(field: Field, n: usize, mut f: impl FnMut(usize, usize) -> Quaternion) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        FMatrix { field, n, data }
    }

    /// Real matrix from row-major entries.
    pub fn from_real(field: Field, n: usize, entries: &[f64]) -> Self {
        assert_eq!(entries.len(), n * n, "expected {} entries", n * n);
        FMatrix {
            field,
            n,
            data: entries.iter().map(|&v| Quaternion::real(v)).collect(),
        }
    }

    /// The matrix unit `E_ij` (zero-based indices).
    pub fn unit(field: Field, n: usize, i: usize, j: usize) -> Self {
        let mut m = FMatrix::zeros(field, n);
        m.data[i * n + j] = Quaternion::ONE;
        m
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &[Quaternion] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Quaternion {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, q: Quaternion) {
        self.data[i * self.n + j] = q;
    }

    /// Re-tags the matrix as living over `field`.
    pub fn with_field(mut self, field: Field) -> Self {
        debug_assert!(
            self.data.iter().all(|q| q.excess_over(field) <= 1e-12),
            "entries do not fit in {field}"
        );
        self.field = field;
        self
    }

    /// Largest entry component that does not belong to the tagged field.
    pub fn field_excess(&self) -> f64 {
        self.data
            .iter()
            .map(|q| q.excess_over(self.field))
            .fold(0.0, f64::max)
    }

    pub fn adjoint(&self) -> FMatrix {
        FMatrix::from_fn(self.field, self.n, |i, j| self.get(j, i).conj())
    }

    pub fn matmul(&self, other: &FMatrix) -> FMatrix {
        debug_assert_eq!(self.n, other.n);
        let n = self.n;
        let mut out = FMatrix::zeros(self.field.join(other.field), n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == Quaternion::ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// Left multiplication of every entry by a scalar, `q A`.
    pub fn left_scale(&self, q: Quaternion) -> FMatrix {
        let field = if q.excess_over(Field::Real) == 0.0 {
            self.field
        } else if q.excess_over(Field::Complex) == 0.0 {
            self.field.join(Field::Complex)
        } else {
            Field::Quaternion
        };
        FMatrix {
            field,
            n: self.n,
            data: self.data.iter().map(|&a| q * a).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> FMatrix {
        FMatrix {
            field: self.field,
            n: self.n,
            data: self.data.iter().map(|&a| a * s).collect(),
        }
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: f64, other: &FMatrix) -> FMatrix {
        debug_assert_eq!(self.n, other.n);
        FMatrix {
            field: self.field.join(other.field),
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| a + b * s)
                .collect(),
        }
    }

    pub fn trace(&self) -> Quaternion {
        (0..self.n).fold(Quaternion::ZERO, |acc, i| acc + self.get(i, i))
    }

    pub fn re_trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i).w).sum()
    }

    /// Real inner product `Re tr(A B^*)`.
    pub fn inner(&self, other: &FMatrix) -> f64 {
        debug_assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a.dot(*b))
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.inner(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|q| q.norm()).fold(0.0, f64::max)
    }

    /// `max |A_ij - conj(A_ji)|`.
    pub fn hermitian_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for i in 0..self.n {
            for j in i..self.n {
                r = r.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        r
    }

    pub fn is_hermitian(&self, atol: f64) -> bool {
        self.hermitian_residual() <= atol
    }

    pub fn commutator(&self, other: &FMatrix) -> FMatrix {
        &self.matmul(other) - &other.matmul(self)
    }

    /// `[I, A, A^2, ..., A^k]`.
    pub fn powers(&self, k: usize) -> Vec<FMatrix> {
        let mut out = Vec::with_capacity(k + 1);
        out.push(FMatrix::identity(self.field, self.n));
        for i in 0..k {
            let next = out[i].matmul(self);
            out.push(next);
        }
        out
    }

    pub fn pow(&self, k: usize) -> FMatrix {
        self.powers(k).pop().expect("powers is never empty")
    }

    /// `P^* A P`.
    pub fn conjugate_by(&self, p: &FMatrix) -> FMatrix {
        p.adjoint().matmul(self).matmul(p)
    }

    /// All real components, entry by entry.
    pub fn components(&self) -> Vec<f64> {
        self.data.iter().flat_map(|q| q.to_array()).collect()
    }

    pub fn diagonal_real(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i).w).collect()
    }

    pub fn to_real_dmatrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| self.get(i, j).w)
    }

    pub fn from_real_dmatrix(field: Field, m: &DMatrix<f64>) -> Self {
        FMatrix::from_fn(field, m.nrows(), |i, j| Quaternion::real(m[(i, j)]))
    }

    pub fn to_complex_dmatrix(&self) -> DMatrix<Complex<f64>> {
        DMatrix::from_fn(self.n, self.n, |i, j| {
            let q = self.get(i, j);
            Complex::new(q.w, q.x)
        })
    }

    /// Complex `2n x 2n` image under `a + b j -> [[a, b], [-conj b, conj a]]`.
    ///
    /// This is an algebra homomorphism, so Hermitian matrices map to
    /// Hermitian matrices with every eigenvalue doubled.
    pub fn complex_embedding(&self) -> DMatrix<Complex<f64>> {
        let n = self.n;
        let mut out = DMatrix::from_element(2 * n, 2 * n, Complex::new(0.0, 0.0));
        for i in 0..n {
            for j in 0..n {
                let ((ar, ai), (br, bi)) = self.get(i, j).to_complex_pair();
                let a = Complex::new(ar, ai);
                let b = Complex::new(br, bi);
                out[(i, j)] = a;
                out[(i, n + j)] = b;
                out[(n + i, j)] = -b.conj();
                out[(n + i, n + j)] = a.conj();
            }
        }
        out
    }
}

impl Add for &FMatrix {
    type Output = FMatrix;
    fn add(self, o: &FMatrix) -> FMatrix {
        self.axpy(1.0, o)
    }
}

impl Sub for &FMatrix {
    type Output = FMatrix;
    fn sub(self, o: &FMatrix) -> FMatrix {
        self.axpy(-1.0, o)
    }
}

impl Mul for &FMatrix {
    type Output = FMatrix;
    fn mul(self, o: &FMatrix) -> FMatrix {
        self.matmul(o)
    }
}

impl Mul<f64> for &FMatrix {
    type Output = FMatrix;
    fn mul(self, s: f64) -> FMatrix {
        self.scale(s)
    }
}

impl Neg for &FMatrix {
    type Output = FMatrix;
    fn neg(self) -> FMatrix {
        self.scale(-1.0)
    }
}

/// `⟨A, B⟩ = Re tr(A B^*)`, checked for matching size and field.
pub fn frobenius_inner(a: &FMatrix, b: &FMatrix) -> Result<f64> {
    if a.n() != b.n() || a.field() != b.field() {
        return Err(Error::Mismatch(format!(
            "{}x{} over {} vs {}x{} over {}",
            a.n(),
            a.n(),
            a.field(),
            b.n(),
            b.n(),
            b.field()
        )));
    }
    Ok(a.inner(b))
}

/// Wire format: scalars are always 4-tuples `[w, x, y, z]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixJson {
    pub field: Field,
    pub n: usize,
    pub entries: Vec<Vec<[f64; 4]>>,
}

impl From<FMatrix> for MatrixJson {
    fn from(m: FMatrix) -> Self {
        let entries = (0..m.n)
            .map(|i| (0..m.n).map(|j| m.get(i, j).to_array()).collect())
            .collect();
        MatrixJson {
            field: m.field,
            n: m.n,
            entries,
        }
    }
}

impl TryFrom<MatrixJson> for FMatrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<Self> {
        if j.entries.len() != j.n || j.entries.iter().any(|row| row.len() != j.n) {
            return Err(Error::Parse(format!("entries must be {0}x{0}", j.n)));
        }
        let m = FMatrix::from_fn(j.field, j.n, |i, k| Quaternion::from_array(j.entries[i][k]));
        let excess = m.field_excess();
        if excess > 0.0 {
            return Err(Error::Parse(format!(
                "entry has component {excess} outside field {}",
                j.field
            )));
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedding_is_multiplicative() {
        let a = FMatrix::from_fn(Field::Quaternion, 3, |i, j| {
            Quaternion::new(i as f64 - 0.5, j as f64, (i * j) as f64 * 0.3, 1.0 - j as f64)
        });
        let b = FMatrix::from_fn(Field::Quaternion, 3, |i, j| {
            Quaternion::new(0.2 * j as f64, 1.0 + i as f64, -0.7, (i + j) as f64 * 0.1)
        });
        let lhs = a.matmul(&b).complex_embedding();
        let rhs = a.complex_embedding() * b.complex_embedding();
        assert!((lhs - rhs).norm() < 1e-12);
    }

    #[test]
    fn inner_matches_trace_formula() {
        let a = FMatrix::from_fn(Field::Complex, 2, |i, j| Quaternion::new(i as f64, j as f64, 0.0, 0.0));
        let b = FMatrix::from_fn(Field::Complex, 2, |i, j| Quaternion::new(1.0, (i + j) as f64, 0.0, 0.0));
        let via_trace = a.matmul(&b.adjoint()).trace().w;
        assert!((a.inner(&b) - via_trace).abs() < 1e-14);
    }

    #[test]
    fn inner_rejects_mismatch() {
        let a = FMatrix::identity(Field::Real, 3);
        let b = FMatrix::identity(Field::Complex, 3);
        assert!(matches!(frobenius_inner(&a, &b), Err(Error::Mismatch(_))));
        let c = FMatrix::identity(Field::Real, 2);
        assert!(frobenius_inner(&a, &c).is_err());
    }

    #[test]
    fn json_round_trip_is_lossless() {
        let m = FMatrix::from_fn(Field::Quaternion, 2, |i, j| {
            Quaternion::new(0.1 + i as f64 / 3.0, 1e-17, std::f64::consts::PI * j as f64, -2.5)
        });
        let text = serde_json::to_string(&m).unwrap();
        let back: FMatrix = serde_json::from_str(&text).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn json_rejects_components_outside_field() {
        let text = r#"{"field":"R","n":1,"entries":[[[1.0,2.0,0.0,0.0]]]}"#;
        assert!(serde_json::from_str::<FMatrix>(text).is_err());
        let text = r#"{"field":"C","n":2,"entries":[[[1.0,2.0,0.0,0.0]]]}"#;
        assert!(serde_json::from_str::<FMatrix>(text).is_err());
    }
}
