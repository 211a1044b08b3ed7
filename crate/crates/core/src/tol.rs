//! Default tolerances. Callers that need other values pass them explicitly.

/// Absolute slack for structural checks: Hermitian, traceless, unit norm, tangency.
pub const STRUCTURAL: f64 = 1e-10;

/// Relative slack for derived quantities.
pub const DERIVED: f64 = 1e-8;

/// Relative bound on `|tr A^k|` for a point to count as a zero of the odd trace map.
pub const AUSTERE: f64 = 1e-8;

/// Relative slack for pairing `λ` with `-λ`.
pub const PAIRING: f64 = 1e-8;

/// Relative width of an eigenvalue cluster.
pub const CLUSTER: f64 = 1e-6;

/// Normalized Gram ratio above which a point is regular.
pub const GRAM_REGULAR: f64 = 1e-10;

/// Normalized Gram ratio below which a point is critical.
pub const GRAM_CRITICAL: f64 = 1e-13;

/// Minimal relative gap between distinct `λ_i^2` for a regular verdict.
pub const LAMBDA_DISTINCT: f64 = 1e-6;

/// Gap below which two `λ_i^2` count as tied.
pub const LAMBDA_TIED: f64 = 1e-12;

/// Singular-value ratio required before a numerical rank is reported.
pub const RANK_GAP: f64 = 1e6;
