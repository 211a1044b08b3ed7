//! Browser bindings for a few size-4 computations.
//!
//! The plain functions do the work and are what the native tests call; the
//! `wasm_bindgen` wrappers only translate errors into JavaScript exceptions.

use austere_core::c4::{c4_spectrum, NormalDirection};
use austere_core::dupin::{circle_trace_csv, kappa_profile, CIRCLE_PAIRS};
use austere_core::geometry::scalar_curvature_b4;
use austere_core::{FMatrix, Field, Quaternion};
use serde::Serialize;
use wasm_bindgen::prelude::*;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSummary {
    pub diagonal: [f64; 4],
    pub kappas: [f64; 5],
    pub multiplicities: [usize; 5],
    pub scalar_curvature: f64,
}

fn field(code: &str) -> Result<Field, String> {
    Field::from_code(code).ok_or_else(|| format!("unknown field {code:?}, expected R, C or H"))
}

/// `diag(l1, -l1, l2, -l2)` rescaled onto the unit sphere.
pub fn point(l1: f64, l2: f64, field: Field) -> Result<FMatrix, String> {
    let norm = (2.0 * (l1 * l1 + l2 * l2)).sqrt();
    if !norm.is_finite() || norm == 0.0 {
        return Err("λ1 and λ2 must be finite and not both zero".into());
    }
    Ok(FMatrix::diag(field, &[l1 / norm, -l1 / norm, l2 / norm, -l2 / norm]))
}

pub fn summarize(l1: f64, l2: f64, code: &str) -> Result<PointSummary, String> {
    let f = field(code)?;
    let a = point(l1, l2, f)?;
    let kp = kappa_profile(&a, f).map_err(|e| e.to_string())?;
    let scalar_curvature = scalar_curvature_b4(&a, f).map_err(|e| e.to_string())?;
    let d = a.diagonal_real();
    Ok(PointSummary {
        diagonal: [d[0], d[1], d[2], d[3]],
        kappas: kp.kappas,
        multiplicities: kp.multiplicities,
        scalar_curvature,
    })
}

/// CSV of the principal curvatures along the curvature circle `circle` (0..4).
pub fn circle_csv(l1: f64, l2: f64, code: &str, circle: usize, samples: usize) -> Result<String, String> {
    let pair = *CIRCLE_PAIRS
        .get(circle)
        .ok_or_else(|| format!("circle index {circle} out of range 0..4"))?;
    if !(2..=2000).contains(&samples) {
        return Err(format!("samples must lie in 2..=2000, got {samples}"));
    }
    let f = field(code)?;
    circle_trace_csv(&point(l1, l2, f)?, pair, samples).map_err(|e| e.to_string())
}

/// Ascending shape operator eigenvalues at the critical point for the normal
/// `[[c, a], [ā, -c]] ⊕ [[d, b], [b̄, -d]]`; `a` and `b` are `w, x, y, z` quaternions.
pub fn critical_spectrum(code: &str, a: &[f64], b: &[f64], c: f64, d: f64) -> Result<Vec<f64>, String> {
    let f = field(code)?;
    let quat = |v: &[f64]| -> Result<Quaternion, String> {
        match v {
            [w, x, y, z] => Ok(Quaternion::new(*w, *x, *y, *z)),
            _ => Err(format!("expected 4 quaternion components, got {}", v.len())),
        }
    };
    let xi = NormalDirection {
        a: quat(a)?,
        b: quat(b)?,
        c,
        d,
    };
    c4_spectrum(&xi, f).map_err(|e| e.to_string())
}

#[wasm_bindgen(js_name = summarize)]
pub fn summarize_js(l1: f64, l2: f64, field: &str) -> Result<String, JsError> {
    let s = summarize(l1, l2, field).map_err(|e| JsError::new(&e))?;
    serde_json::to_string(&s).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = circleCsv)]
pub fn circle_csv_js(l1: f64, l2: f64, field: &str, circle: usize, samples: usize) -> Result<String, JsError> {
    circle_csv(l1, l2, field, circle, samples).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = criticalSpectrum)]
pub fn critical_spectrum_js(field: &str, a: &[f64], b: &[f64], c: f64, d: f64) -> Result<Vec<f64>, JsError> {
    critical_spectrum(field, a, b, c, d).map_err(|e| JsError::new(&e))
}
