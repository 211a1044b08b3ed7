use austere_core::field::MatrixJson;
use austere_core::{FMatrix, Field};

use crate::{usage, CliError};

/// Parses `diag:v1,v2,...` with an optional common divisor suffix `/K` or
/// `/sqrtK`, e.g. `diag:3,-3,1,-1/sqrt20`.
pub fn parse_matrix_arg(spec: &str, field: Field) -> Result<FMatrix, CliError> {
    let body = spec
        .strip_prefix("diag:")
        .ok_or_else(|| usage(format!("matrix shorthand must start with 'diag:', got {spec:?}")))?;
    let (values, divisor) = match body.rsplit_once('/') {
        Some((v, d)) => {
            let d = d.trim();
            let div = match d.strip_prefix("sqrt") {
                Some(r) => parse_num(r)?.sqrt(),
                None => parse_num(d)?,
            };
            (v, div)
        }
        None => (body, 1.0),
    };
    if divisor == 0.0 {
        return Err(usage("zero divisor in matrix shorthand"));
    }
    let diag: Vec<f64> = values
        .split(',')
        .map(|s| parse_num(s).map(|x| x / divisor))
        .collect::<Result<_, _>>()?;
    if diag.len() < 2 {
        return Err(usage("a diagonal needs at least two entries"));
    }
    Ok(FMatrix::diag(field, &diag))
}

fn parse_num(s: &str) -> Result<f64, CliError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| usage(format!("not a number: {s:?}")))
}

/// Inline shorthand, or else a path to a matrix JSON file.
pub fn load_matrix(arg: &str, field: Field) -> Result<FMatrix, CliError> {
    if arg.starts_with("diag:") {
        return parse_matrix_arg(arg, field);
    }
    let text = std::fs::read_to_string(arg)?;
    let json: MatrixJson = serde_json::from_str(&text)?;
    Ok(FMatrix::try_from(json)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shorthand() {
        let m = parse_matrix_arg("diag:3,-3,1,-1/sqrt20", Field::Quaternion).unwrap();
        assert_eq!(m.n(), 4);
        assert_eq!(m.field(), Field::Quaternion);
        assert!((m.norm() - 1.0).abs() < 1e-15);
        let plain = parse_matrix_arg("diag:0.5,-0.5", Field::Real).unwrap();
        assert_eq!(plain.diagonal_real(), vec![0.5, -0.5]);
        assert!(parse_matrix_arg("3,-3", Field::Real).is_err());
        assert!(parse_matrix_arg("diag:1,x", Field::Real).is_err());
        assert!(parse_matrix_arg("diag:1,-1/0", Field::Real).is_err());
    }
}
