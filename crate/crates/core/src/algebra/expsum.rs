//! Canonical finite exponential sums `Σ cₖ·exp(aₖ·x)`.
//!
//! `x` is a vector of at most two formal variables (`θ`, `θ′`). Coefficients
//! live in Q(√2), exponent vectors are rational. Two sums are equal as
//! functions iff their canonical forms are equal, which makes every functional
//! identity in the crate decidable by plain structural comparison.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::rational::{to_f64, Rational};
use super::scalar::Scalar;
use crate::error::{Error, Result};

pub const MAX_ARITY: usize = 2;

/// One term `coef·exp(exponent·x)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Term {
    pub exponent: Vec<Rational>,
    pub coef: Scalar,
}

/// A canonical exponential sum.
///
/// Terms are sorted lexicographically by exponent, exponents are pairwise
/// distinct and no coefficient is zero. The empty sum is zero.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExpSum {
    arity: usize,
    terms: Vec<Term>,
}

impl ExpSum {
    pub fn zero(arity: usize) -> Self {
        ExpSum {
            arity,
            terms: Vec::new(),
        }
    }

    pub fn one(arity: usize) -> Self {
        Self::constant(arity, Scalar::one())
    }

    pub fn constant(arity: usize, c: Scalar) -> Self {
        Self::monomial(c, vec![Rational::zero(); arity])
    }

    /// `c·exp(exponent·x)`; the arity is the length of `exponent`.
    pub fn monomial(coef: Scalar, exponent: Vec<Rational>) -> Self {
        let arity = exponent.len();
        if coef.is_zero() {
            return Self::zero(arity);
        }
        ExpSum {
            arity,
            terms: vec![Term { exponent, coef }],
        }
    }

    /// `exp(m·θ)` in one variable.
    pub fn exp(m: Rational) -> Self {
        Self::monomial(Scalar::one(), vec![m])
    }

    /// Builds a canonical sum from arbitrary terms, merging equal exponents
    /// and dropping zero coefficients.
    pub fn from_terms(arity: usize, terms: impl IntoIterator<Item = Term>) -> Result<Self> {
        if arity > MAX_ARITY {
            return Err(Error::ArityTooLarge(arity));
        }
        let mut acc: BTreeMap<Vec<Rational>, Scalar> = BTreeMap::new();
        for t in terms {
            if t.exponent.len() != arity {
                return Err(Error::ArityMismatch {
                    left: arity,
                    right: t.exponent.len(),
                });
            }
            *acc.entry(t.exponent).or_insert_with(Scalar::zero) += &t.coef;
        }
        Ok(Self::from_map(arity, acc))
    }

    fn from_map(arity: usize, acc: BTreeMap<Vec<Rational>, Scalar>) -> Self {
        let terms = acc
            .into_iter()
            .filter(|(_, c)| !c.is_zero())
            .map(|(exponent, coef)| Term { exponent, coef })
            .collect();
        ExpSum { arity, terms }
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self.terms[0].coef.is_one()
            && self.terms[0].exponent.iter().all(Zero::is_zero)
    }

    /// A single term (a pure exponential times a constant).
    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    /// True if the sum does not depend on the variables.
    pub fn is_constant(&self) -> bool {
        self.terms
            .iter()
            .all(|t| t.exponent.iter().all(Zero::is_zero))
    }

    /// Re-canonicalizes from scratch; the identity on every value this type
    /// can hold.
    pub fn canonicalize(&self) -> Self {
        Self::from_terms(self.arity, self.terms.iter().cloned())
            .expect("terms of an ExpSum always match its arity")
    }

    fn check_arity(&self, other: &ExpSum) -> Result<()> {
        if self.arity != other.arity {
            return Err(Error::ArityMismatch {
                left: self.arity,
                right: other.arity,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &ExpSum) -> Result<ExpSum> {
        self.check_arity(other)?;
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        let mut terms = Vec::with_capacity(a.len() + b.len());
        while i < a.len() && j < b.len() {
            match a[i].exponent.cmp(&b[j].exponent) {
                std::cmp::Ordering::Less => {
                    terms.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    terms.push(b[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let coef = &a[i].coef + &b[j].coef;
                    if !coef.is_zero() {
                        terms.push(Term {
                            exponent: a[i].exponent.clone(),
                            coef,
                        });
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        terms.extend_from_slice(&a[i..]);
        terms.extend_from_slice(&b[j..]);
        Ok(ExpSum {
            arity: self.arity,
            terms,
        })
    }

    pub fn try_sub(&self, other: &ExpSum) -> Result<ExpSum> {
        self.try_add(&-other)
    }

    pub fn try_mul(&self, other: &ExpSum) -> Result<ExpSum> {
        self.check_arity(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(ExpSum::zero(self.arity));
        }
        let mut acc: BTreeMap<Vec<Rational>, Scalar> = BTreeMap::new();
        for s in &self.terms {
            for t in &other.terms {
                let exponent: Vec<Rational> = s
                    .exponent
                    .iter()
                    .zip(&t.exponent)
                    .map(|(u, v)| u + v)
                    .collect();
                *acc.entry(exponent).or_insert_with(Scalar::zero) += &(&s.coef * &t.coef);
            }
        }
        Ok(Self::from_map(self.arity, acc))
    }

    pub fn scale(&self, c: &Scalar) -> ExpSum {
        if c.is_zero() {
            return ExpSum::zero(self.arity);
        }
        ExpSum {
            arity: self.arity,
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    exponent: t.exponent.clone(),
                    coef: &t.coef * c,
                })
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> ExpSum {
        let mut acc = ExpSum::one(self.arity);
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Substitutes `x ↦ map·x′`: every exponent row vector `u` becomes `u·map`.
    pub fn lift(&self, map: &ExponentMap) -> Result<ExpSum> {
        if map.source_arity() != self.arity {
            return Err(Error::DimensionMismatch(format!(
                "exponent map expects arity {}, sum has arity {}",
                map.source_arity(),
                self.arity
            )));
        }
        Self::from_terms(
            map.target_arity(),
            self.terms.iter().map(|t| Term {
                exponent: map.apply(&t.exponent),
                coef: t.coef.clone(),
            }),
        )
    }

    /// The exact value at the origin: the sum of the coefficients.
    pub fn at_origin(&self) -> Scalar {
        self.terms
            .iter()
            .fold(Scalar::zero(), |acc, t| &acc + &t.coef)
    }

    /// Double-precision value at `point`.
    pub fn eval(&self, point: &[f64]) -> Result<f64> {
        if point.len() != self.arity {
            return Err(Error::ArityMismatch {
                left: self.arity,
                right: point.len(),
            });
        }
        Ok(self
            .terms
            .iter()
            .map(|t| {
                let x: f64 = t
                    .exponent
                    .iter()
                    .zip(point)
                    .map(|(a, p)| to_f64(a) * p)
                    .sum();
                t.coef.to_f64() * x.exp()
            })
            .sum())
    }
}

impl<'a> Add<&'a ExpSum> for &'a ExpSum {
    type Output = ExpSum;
    /// Panics on arity mismatch; use [`ExpSum::try_add`] to get an error.
    fn add(self, rhs: &ExpSum) -> ExpSum {
        self.try_add(rhs).expect("ExpSum addition")
    }
}

impl<'a> Sub<&'a ExpSum> for &'a ExpSum {
    type Output = ExpSum;
    fn sub(self, rhs: &ExpSum) -> ExpSum {
        self.try_sub(rhs).expect("ExpSum subtraction")
    }
}

impl<'a> Mul<&'a ExpSum> for &'a ExpSum {
    type Output = ExpSum;
    fn mul(self, rhs: &ExpSum) -> ExpSum {
        self.try_mul(rhs).expect("ExpSum multiplication")
    }
}

impl Neg for &ExpSum {
    type Output = ExpSum;
    fn neg(self) -> ExpSum {
        ExpSum {
            arity: self.arity,
            terms: self
                .terms
                .iter()
                .map(|t| Term {
                    exponent: t.exponent.clone(),
                    coef: -&t.coef,
                })
                .collect(),
        }
    }
}

impl fmt::Display for ExpSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const VARS: [&str; MAX_ARITY] = ["θ", "θ′"];
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            let exponent: Vec<String> = t
                .exponent
                .iter()
                .zip(VARS)
                .filter(|(a, _)| !a.is_zero())
                .map(|(a, v)| {
                    if a.is_one() {
                        v.to_string()
                    } else {
                        format!("{a}{v}")
                    }
                })
                .collect();
            if exponent.is_empty() {
                write!(f, "{}", t.coef)?;
            } else {
                write!(f, "{}·e^({})", t.coef, exponent.join("+"))?;
            }
        }
        Ok(())
    }
}

/// A rational substitution matrix of shape `source × target` for
/// [`ExpSum::lift`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExponentMap {
    source: usize,
    target: usize,
    rows: Vec<Vec<Rational>>,
}

impl ExponentMap {
    pub fn new(source: usize, target: usize, rows: Vec<Vec<Rational>>) -> Result<Self> {
        if source > MAX_ARITY {
            return Err(Error::ArityTooLarge(source));
        }
        if target > MAX_ARITY {
            return Err(Error::ArityTooLarge(target));
        }
        if rows.len() != source || rows.iter().any(|r| r.len() != target) {
            return Err(Error::DimensionMismatch(format!(
                "exponent map must be {source}×{target}"
            )));
        }
        Ok(ExponentMap {
            source,
            target,
            rows,
        })
    }

    /// Embeds constants into `target` variables.
    pub fn constant(target: usize) -> Result<Self> {
        Self::new(0, target, Vec::new())
    }

    /// One variable `θ ↦ a·θ + b·θ′` (or `θ ↦ a·θ` when `target == 1`).
    pub fn linear(coeffs: &[i64]) -> Result<Self> {
        let row = coeffs.iter().map(|&c| super::rational::int(c)).collect();
        Self::new(1, coeffs.len(), vec![row])
    }

    pub fn source_arity(&self) -> usize {
        self.source
    }

    pub fn target_arity(&self) -> usize {
        self.target
    }

    fn apply(&self, u: &[Rational]) -> Vec<Rational> {
        (0..self.target)
            .map(|j| {
                u.iter()
                    .zip(&self.rows)
                    .fold(Rational::zero(), |acc, (ui, row)| acc + ui * &row[j])
            })
            .collect()
    }
}
