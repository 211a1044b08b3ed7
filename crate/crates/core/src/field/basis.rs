use std::f64::consts::FRAC_1_SQRT_2;

use serde::Serialize;

use super::{FMatrix, Field, Quaternion};
use crate::error::{Error, Result};

/// Real dimension `N(n, F) = n(n-1)m/2 + n - 1` of the traceless Hermitian matrices.
pub fn ambient_dim(n: usize, field: Field) -> Result<usize> {
    if n < 2 {
        return Err(Error::domain(format!("need n >= 2, got {n}")));
    }
    Ok(n * (n - 1) * field.dim() / 2 + n - 1)
}

/// `Ê_ij = (E_ij + E_ji)/√2`, zero-based `i < j`.
pub fn e_hat(field: Field, n: usize, i: usize, j: usize) -> FMatrix {
    let mut m = FMatrix::zeros(field, n);
    m.set(i, j, Quaternion::real(FRAC_1_SQRT_2));
    m.set(j, i, Quaternion::real(FRAC_1_SQRT_2));
    m
}

/// `Ě_ij = (E_ij - E_ji)/√2`, zero-based `i < j`.
pub fn e_check(field: Field, n: usize, i: usize, j: usize) -> FMatrix {
    let mut m = FMatrix::zeros(field, n);
    m.set(i, j, Quaternion::real(FRAC_1_SQRT_2));
    m.set(j, i, Quaternion::real(-FRAC_1_SQRT_2));
    m
}

/// `Ê_i = (E_11 - E_ii)/√2`, zero-based `i >= 1`.
pub fn e_hat_diag(field: Field, n: usize, i: usize) -> FMatrix {
    let mut m = FMatrix::zeros(field, n);
    m.set(0, 0, Quaternion::real(FRAC_1_SQRT_2));
    m.set(i, i, Quaternion::real(-FRAC_1_SQRT_2));
    m
}

/// `q Ě_ij` for an imaginary unit `q`; Hermitian.
pub fn imaginary_e_check(q: Quaternion, n: usize, i: usize, j: usize) -> FMatrix {
    e_check(Field::Real, n, i, j).left_scale(q)
}

/// Which of the five families an element belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BasisKind {
    /// `Ê_i`, diagonal.
    Diagonal,
    /// `Ê_ij`, real symmetric.
    Symmetric,
    /// `q Ě_ij` with `q` the given imaginary unit (1 = i, 2 = j, 3 = k).
    Imaginary(u8),
}

#[derive(Debug, Clone)]
pub struct BasisElement {
    pub kind: BasisKind,
    /// Zero-based indices; for `Diagonal` the pair is `(0, i)`.
    pub indices: (usize, usize),
    pub matrix: FMatrix,
}

impl BasisElement {
    pub fn label(&self) -> String {
        let (i, j) = (self.indices.0 + 1, self.indices.1 + 1);
        match self.kind {
            BasisKind::Diagonal => format!("E^_{j}"),
            BasisKind::Symmetric => format!("E^_{i}{j}"),
            BasisKind::Imaginary(u) => {
                let q = ["", "i", "j", "k"][u as usize];
                format!("{q}Ev_{i}{j}")
            }
        }
    }
}

/// The canonical basis of `E(n, F)`.
///
/// Order: `Ê_2..Ê_n`, then `Ê_ij`, then `i Ě_ij`, `j Ě_ij`, `k Ě_ij`
/// (pairs lexicographic). The diagonal elements are linearly independent
/// but not mutually orthogonal.
#[derive(Debug, Clone)]
pub struct BasisFamily {
    pub n: usize,
    pub field: Field,
    pub elements: Vec<BasisElement>,
}

impl BasisFamily {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn matrices(&self) -> impl Iterator<Item = &FMatrix> {
        self.elements.iter().map(|e| &e.matrix)
    }
}

pub fn canonical_basis(n: usize, field: Field) -> Result<BasisFamily> {
    ambient_dim(n, field)?;
    let mut elements = Vec::new();
    for i in 1..n {
        elements.push(BasisElement {
            kind: BasisKind::Diagonal,
            indices: (0, i),
            matrix: e_hat_diag(field, n, i),
        });
    }
    for (i, j) in pairs(n) {
        elements.push(BasisElement {
            kind: BasisKind::Symmetric,
            indices: (i, j),
            matrix: e_hat(field, n, i, j),
        });
    }
    for (u, &q) in field.imaginary_units().iter().enumerate() {
        for (i, j) in pairs(n) {
            elements.push(BasisElement {
                kind: BasisKind::Imaginary(u as u8 + 1),
                indices: (i, j),
                matrix: imaginary_e_check(q, n, i, j).with_field(field),
            });
        }
    }
    Ok(BasisFamily { n, field, elements })
}

/// An orthonormal basis of `E(n, F)`: the off-diagonal canonical elements
/// plus the normalized Helmert diagonals `(E_11 + .. + E_kk - k E_(k+1)(k+1)) / √(k(k+1))`.
pub fn orthonormal_basis(n: usize, field: Field) -> Result<Vec<FMatrix>> {
    let family = canonical_basis(n, field)?;
    let mut out = Vec::with_capacity(family.len());
    for k in 1..n {
        let s = 1.0 / ((k * (k + 1)) as f64).sqrt();
        let mut d = vec![0.0; n];
        d[..k].iter_mut().for_each(|v| *v = s);
        d[k] = -(k as f64) * s;
        out.push(FMatrix::diag(field, &d));
    }
    out.extend(
        family
            .elements
            .into_iter()
            .filter(|e| e.kind != BasisKind::Diagonal)
            .map(|e| e.matrix),
    );
    Ok(out)
}

/// Coordinates of `a` against an orthonormal list.
pub fn coordinates(a: &FMatrix, basis: &[FMatrix]) -> Vec<f64> {
    basis.iter().map(|b| a.inner(b)).collect()
}

/// Zero-based pairs `i < j`.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}
