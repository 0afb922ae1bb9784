//! Matrix interchange format.
//!
//! ```json
//! {"field": "q", "n": 2, "rows": [["1", "0"], ["-3/4", "1"]]}
//! {"field": {"gfp": 101}, "n": 2, "rows": [[1, 0], [57, 1]]}
//! ```
//!
//! Rationals are strings `"num/den"` or `"num"`; a Unicode minus sign is
//! accepted on input and `-` is always written. Residues are integers in
//! `[0, p)`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use super::{AbstractMatrix, MatrixError};
use crate::field::{FieldError, Fp, PrimeField};

#[derive(Debug, Error)]
pub enum MatrixFormatError {
    #[error("invalid matrix JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unknown field {0:?}, expected \"q\" or {{\"gfp\": p}}")]
    UnknownField(String),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("bad scalar at row {row}, column {col}: {reason}")]
    BadScalar { row: usize, col: usize, reason: String },
    #[error(transparent)]
    Shape(#[from] MatrixError),
    #[error("declared n = {declared} but rows describe a {actual}x{actual} matrix")]
    DimensionMismatch { declared: usize, actual: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AnyMatrix {
    Rational(AbstractMatrix<BigRational>),
    PrimeField(PrimeField, AbstractMatrix<Fp>),
}

impl AnyMatrix {
    pub fn dim(&self) -> usize {
        match self {
            AnyMatrix::Rational(m) => m.dim(),
            AnyMatrix::PrimeField(_, m) => m.dim(),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum FieldRepr {
    Named(String),
    Gfp { gfp: u64 },
}

#[derive(Serialize, Deserialize)]
struct MatrixRepr {
    field: FieldRepr,
    n: usize,
    rows: Vec<Vec<Value>>,
}

pub fn format_rational(x: &BigRational) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_rational(s: &str) -> Result<BigRational, String> {
    let s = s.trim().replace('\u{2212}', "-");
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s.as_str(), "1"),
    };
    let num: BigInt = num.parse().map_err(|_| format!("bad numerator {num:?}"))?;
    let den: BigInt = den.parse().map_err(|_| format!("bad denominator {den:?}"))?;
    if den.is_zero() {
        return Err("zero denominator".into());
    }
    Ok(BigRational::new(num, den))
}

pub fn from_json(text: &str) -> Result<AnyMatrix, MatrixFormatError> {
    let repr: MatrixRepr = serde_json::from_str(text)?;
    let bad = |row, col, reason: String| MatrixFormatError::BadScalar { row, col, reason };

    let matrix = match repr.field {
        FieldRepr::Named(name) if name == "q" => {
            let mut rows = Vec::with_capacity(repr.rows.len());
            for (i, row) in repr.rows.iter().enumerate() {
                let mut out = Vec::with_capacity(row.len());
                for (j, v) in row.iter().enumerate() {
                    let x = match v {
                        Value::String(s) => parse_rational(s).map_err(|e| bad(i, j, e))?,
                        Value::Number(n) if n.is_i64() => {
                            BigRational::from_integer(n.as_i64().unwrap_or_default().into())
                        }
                        other => return Err(bad(i, j, format!("expected a string, got {other}"))),
                    };
                    out.push(x);
                }
                rows.push(out);
            }
            AnyMatrix::Rational(AbstractMatrix::from_rows(rows)?)
        }
        FieldRepr::Named(name) => return Err(MatrixFormatError::UnknownField(name)),
        FieldRepr::Gfp { gfp } => {
            let field = PrimeField::new(gfp)?;
            let mut rows = Vec::with_capacity(repr.rows.len());
            for (i, row) in repr.rows.iter().enumerate() {
                let mut out = Vec::with_capacity(row.len());
                for (j, v) in row.iter().enumerate() {
                    let x = v
                        .as_u64()
                        .and_then(|x| field.try_elem(x))
                        .ok_or_else(|| bad(i, j, format!("expected an integer in [0, {gfp}), got {v}")))?;
                    out.push(x);
                }
                rows.push(out);
            }
            AnyMatrix::PrimeField(field, AbstractMatrix::from_rows(rows)?)
        }
    };
    if matrix.dim() != repr.n {
        return Err(MatrixFormatError::DimensionMismatch {
            declared: repr.n,
            actual: matrix.dim(),
        });
    }
    Ok(matrix)
}

pub fn to_json(m: &AnyMatrix) -> String {
    let repr = match m {
        AnyMatrix::Rational(m) => MatrixRepr {
            field: FieldRepr::Named("q".into()),
            n: m.dim(),
            rows: m
                .rows()
                .map(|r| r.iter().map(|x| Value::String(format_rational(x))).collect())
                .collect(),
        },
        AnyMatrix::PrimeField(f, m) => MatrixRepr {
            field: FieldRepr::Gfp { gfp: f.modulus() },
            n: m.dim(),
            rows: m
                .rows()
                .map(|r| r.iter().map(|x| Value::from(x.value())).collect())
                .collect(),
        },
    };
    serde_json::to_string(&repr).expect("matrix serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_rational_matrix() {
        let m = from_json(r#"{"field":"q","n":2,"rows":[["1","0"],["−3/4","1"]]}"#).unwrap();
        let AnyMatrix::Rational(m) = &m else { panic!() };
        assert_eq!(m[(1, 0)], BigRational::new((-3).into(), 4.into()));
        assert_eq!(
            to_json(&AnyMatrix::Rational(m.clone())),
            r#"{"field":"q","n":2,"rows":[["1","0"],["-3/4","1"]]}"#
        );
    }

    #[test]
    fn parses_prime_field_matrix() {
        let text = r#"{"field":{"gfp":101},"n":1,"rows":[[100]]}"#;
        let m = from_json(text).unwrap();
        assert_eq!(to_json(&m), text);
        assert!(matches!(
            from_json(r#"{"field":{"gfp":101},"n":1,"rows":[[101]]}"#),
            Err(MatrixFormatError::BadScalar { .. })
        ));
        assert!(matches!(
            from_json(r#"{"field":{"gfp":4},"n":0,"rows":[]}"#),
            Err(MatrixFormatError::Field(FieldError::NonPrimeModulus(4)))
        ));
    }

    #[test]
    fn rejects_bad_shapes_and_fields() {
        assert!(matches!(
            from_json(r#"{"field":"q","n":3,"rows":[["1"]]}"#),
            Err(MatrixFormatError::DimensionMismatch { declared: 3, actual: 1 })
        ));
        assert!(matches!(
            from_json(r#"{"field":"q","n":2,"rows":[["1","2"],["3"]]}"#),
            Err(MatrixFormatError::Shape(_))
        ));
        assert!(matches!(
            from_json(r#"{"field":"r","n":0,"rows":[]}"#),
            Err(MatrixFormatError::UnknownField(_))
        ));
        assert!(matches!(
            from_json(r#"{"field":"q","n":1,"rows":[["1/0"]]}"#),
            Err(MatrixFormatError::BadScalar { .. })
        ));
    }

    #[test]
    fn rationals_are_reduced_on_input() {
        assert_eq!(parse_rational("6/4").unwrap(), BigRational::new(3.into(), 2.into()));
        assert_eq!(format_rational(&parse_rational("-10/5").unwrap()), "-2");
    }
}
