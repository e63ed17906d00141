//! Interchange encodings for scalars, exponential sums and matrices.
//!
//! Rationals are `"num/den"` strings, scalars are `{"r", "s"}` objects, an
//! exponential sum is a list of `{"coef", "exp"}` terms and a matrix lists its
//! nonzero entries sorted by `(i, j)`.

use serde::{Deserialize, Serialize};

use super::expsum::{ExpSum, Term, MAX_ARITY};
use super::matrix::SparseMatrix;
use super::rational::{format_rational, parse_rational};
use super::scalar::Scalar;
use crate::error::{Error, Result};

pub const VARIABLE_NAMES: [&str; MAX_ARITY] = ["theta", "theta_prime"];

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarJson {
    pub r: String,
    pub s: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermJson {
    pub coef: ScalarJson,
    pub exp: Vec<String>,
}

pub type ExpSumJson = Vec<TermJson>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryJson {
    pub i: usize,
    pub j: usize,
    pub val: ExpSumJson,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub rows: usize,
    pub cols: usize,
    pub arity: usize,
    pub vars: Vec<String>,
    pub entries: Vec<EntryJson>,
}

impl From<&Scalar> for ScalarJson {
    fn from(c: &Scalar) -> Self {
        ScalarJson {
            r: format_rational(c.r()),
            s: format_rational(c.s()),
        }
    }
}

impl ScalarJson {
    pub fn parse(&self, field: &str) -> Result<Scalar> {
        let r = parse_rational(&self.r).map_err(|e| reframe(e, &format!("{field}.r")))?;
        let s = parse_rational(&self.s).map_err(|e| reframe(e, &format!("{field}.s")))?;
        Ok(Scalar::new(r, s))
    }
}

pub fn expsum_to_json(v: &ExpSum) -> ExpSumJson {
    v.terms()
        .iter()
        .map(|t| TermJson {
            coef: (&t.coef).into(),
            exp: t.exponent.iter().map(format_rational).collect(),
        })
        .collect()
}

/// Decodes a term list. The arity cannot be recovered from an empty list, so
/// it is always supplied by the caller.
pub fn expsum_from_json(terms: &[TermJson], arity: usize, field: &str) -> Result<ExpSum> {
    let parsed = terms
        .iter()
        .enumerate()
        .map(|(k, t)| {
            let f = format!("{field}[{k}]");
            if t.exp.len() != arity {
                return Err(Error::parse(
                    format!("{f}.exp"),
                    format!("expected {arity} exponents, found {}", t.exp.len()),
                ));
            }
            let exponent = t
                .exp
                .iter()
                .map(|s| parse_rational(s).map_err(|e| reframe(e, &format!("{f}.exp"))))
                .collect::<Result<Vec<_>>>()?;
            Ok(Term {
                exponent,
                coef: t.coef.parse(&format!("{f}.coef"))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ExpSum::from_terms(arity, parsed)
}

impl From<&SparseMatrix> for MatrixJson {
    fn from(m: &SparseMatrix) -> Self {
        MatrixJson {
            rows: m.rows(),
            cols: m.cols(),
            arity: m.arity(),
            vars: VARIABLE_NAMES[..m.arity()]
                .iter()
                .map(|s| s.to_string())
                .collect(),
            entries: m
                .entries()
                .map(|(i, j, v)| EntryJson {
                    i,
                    j,
                    val: expsum_to_json(v),
                })
                .collect(),
        }
    }
}

impl MatrixJson {
    pub fn to_matrix(&self) -> Result<SparseMatrix> {
        if self.arity > MAX_ARITY {
            return Err(Error::ArityTooLarge(self.arity));
        }
        if self.vars.len() != self.arity {
            return Err(Error::parse("vars", "length must equal arity"));
        }
        let mut m = SparseMatrix::zeros(self.rows, self.cols, self.arity);
        for (k, e) in self.entries.iter().enumerate() {
            let field = format!("entries[{k}]");
            let v = expsum_from_json(&e.val, self.arity, &format!("{field}.val"))?;
            if v.is_zero() {
                return Err(Error::parse(field, "stored entries must be nonzero"));
            }
            m.set(e.i, e.j, v).map_err(|err| reframe(err, &field))?;
        }
        Ok(m)
    }
}

pub(crate) fn reframe(e: Error, field: &str) -> Error {
    match e {
        Error::Parse { message, .. } => Error::parse(field, message),
        other => Error::parse(field, other.to_string()),
    }
}

/// A JSON object whose keys keep the order they were pushed in, used for
/// label-keyed exports.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labelled<T>(pub Vec<(String, T)>);

impl<T: Serialize> Serialize for Labelled<T> {
    fn serialize<S: serde::Serializer>(
        &self,
        serializer: S,
    ) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            map.serialize_entry(k, v)?;
        }
        map.end()
    }
}
