//! The generator `H = Σ' m·P` with `R̂(θ) = e^{θH}`, its power identity and
//! the cubic relations implied by the braid equation.
//!
//! `Σ'` runs over the merged basis with `PP` left out.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::algebra::{int, rational::pow, ExpSum, Rational, Scalar, SparseMatrix};
use crate::braid::{embed_12_23, BraidMatrix, ParamSet};
use crate::error::{Error, Result};
use crate::projectors::{build_merged_basis, conjugate, Basis, MergedLabel};
use crate::report::{ReportBuilder, VerificationReport};

/// Relative max-norm tolerance of the truncated series comparison.
pub const SERIES_TOLERANCE: f64 = 1e-10;

/// `H` together with the parameters it was built from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hamiltonian {
    matrix: SparseMatrix,
    params: ParamSet,
}

impl Hamiltonian {
    /// `Σ' m·P` over the supplied merged basis.
    pub fn from_basis(params: &ParamSet, basis: &Basis<MergedLabel>) -> Result<Self> {
        Ok(Hamiltonian {
            matrix: weighted_sum(basis, params.merged_weights())?,
            params: params.clone(),
        })
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }
}

/// `H = Σ' m_α′ P_α′` over the merged basis.
pub fn build_h(params: &ParamSet) -> Hamiltonian {
    Hamiltonian::from_basis(params, &build_merged_basis(params.dim()))
        .expect("the merged basis covers every parameter")
}

/// `Σ m_α P_α` for any labelled family; every weight needs a projector.
pub fn weighted_sum<L>(basis: &Basis<L>, weights: &BTreeMap<L, Rational>) -> Result<SparseMatrix>
where
    L: Ord + fmt::Display,
{
    let first = basis
        .values()
        .next()
        .ok_or_else(|| Error::DimensionMismatch("empty projector basis".into()))?;
    let mut out = SparseMatrix::zeros(first.rows(), first.cols(), first.arity());
    for (l, m) in weights {
        let p = basis
            .get(l)
            .ok_or_else(|| Error::MissingCoefficient(format!("projector for {l}")))?;
        out = out.try_add(&p.scale(&Scalar::rational(m.clone())))?;
    }
    Ok(out)
}

/// `Hⁿ = Σ' mⁿ P` for `n = 2..=max_n`, using the projectors in `basis`.
pub fn verify_h_powers(
    h: &Hamiltonian,
    basis: &Basis<MergedLabel>,
    max_n: u32,
) -> VerificationReport {
    let mut report = ReportBuilder::new("power identity");
    let weights = h.params().merged_weights();
    let mut power = h.matrix().clone();
    for n in 2..=max_n {
        power = &power * h.matrix();
        let powered: BTreeMap<MergedLabel, Rational> =
            weights.iter().map(|(l, m)| (*l, pow(m, n))).collect();
        match weighted_sum(basis, &powered) {
            Ok(expected) => {
                report.compare(&format!("H^{n} − Σ m^{n} P"), &power, &expected);
            }
            Err(e) => {
                report.note(e.to_string());
                report.position("basis", 0, 0, ExpSum::one(0));
                break;
            }
        }
    }
    report.note(format!("powers 2..={max_n}"));
    report.finish()
}

fn h12_h23(h: &SparseMatrix) -> Result<(SparseMatrix, SparseMatrix)> {
    if !h.is_square() {
        return Err(Error::DimensionMismatch("H must be square".into()));
    }
    let n = (h.rows() as f64).sqrt().round() as usize;
    if n * n != h.rows() {
        return Err(Error::DimensionMismatch(format!("{} is not N²", h.rows())));
    }
    embed_12_23(h, n)
}

/// `[[H₁₂, H₂₃], H₁₂] = [[H₂₃, H₁₂], H₂₃]` with `H₁₂ = H⊗I`, `H₂₃ = I⊗H`.
pub fn verify_double_commutator(h: &SparseMatrix) -> VerificationReport {
    let mut report = ReportBuilder::new("double commutator");
    let (a, b) = match h12_h23(h) {
        Ok(pair) => pair,
        Err(e) => {
            report.note(e.to_string());
            report.position("shape", 0, 0, ExpSum::one(0));
            return report.finish();
        }
    };
    let comm = |x: &SparseMatrix, y: &SparseMatrix| &(x * y) - &(y * x);
    let ab = comm(&a, &b);
    let ba = comm(&b, &a);
    report.compare(
        "[[H12,H23],H12] − [[H23,H12],H23]",
        &comm(&ab, &a),
        &comm(&ba, &b),
    );
    report.finish()
}

/// The projector form of the cubic relation, summed literally:
/// `Σ m_α m_β m_γ (P_α¹² P_β²³ P_γ¹² − P_α²³ P_β¹² P_γ²³)` against
/// `½ Σ m_α m_β (m_α − m_β)(P_α¹² P_β²³ − P_α²³ P_β¹²)`.
///
/// The identity is checked at the given rational weights, not as a
/// polynomial identity in symbolic `m`.
pub fn verify_trilinear_identity(
    params: &ParamSet,
    basis: &Basis<MergedLabel>,
) -> VerificationReport {
    let mut report = ReportBuilder::new("trilinear projector identity");
    let weights: Vec<(MergedLabel, Rational)> = params
        .merged_weights()
        .iter()
        .map(|(l, m)| (*l, m.clone()))
        .collect();
    let mut embedded = Vec::with_capacity(weights.len());
    for (l, _) in &weights {
        let Some(p) = basis.get(l) else {
            report.note(format!("no projector for {l}"));
            report.position("basis", 0, 0, ExpSum::one(0));
            return report.finish();
        };
        embedded.push(h12_h23(p).expect("projectors are N²×N²"));
    }
    let size = embedded[0].0.rows();
    let zero = || SparseMatrix::zeros(size, size, 0);
    let scalar = |q: Rational| Scalar::rational(q);

    let trilinear = (0..weights.len())
        .into_par_iter()
        .map(|a| {
            let (a12, a23) = &embedded[a];
            let mut acc = zero();
            for (b, (b12, b23)) in embedded.iter().enumerate() {
                let (ab, ba) = (a12 * b23, a23 * b12);
                let mab = &weights[a].1 * &weights[b].1;
                for (c, (c12, c23)) in embedded.iter().enumerate() {
                    let term = &(&ab * c12) - &(&ba * c23);
                    acc = &acc + &term.scale(&scalar(&mab * &weights[c].1));
                }
            }
            acc
        })
        .reduce(zero, |x, y| &x + &y);

    let half = int(1) / int(2);
    let mut bilinear = zero();
    for (a, (a12, a23)) in embedded.iter().enumerate() {
        for (b, (b12, b23)) in embedded.iter().enumerate() {
            let (ma, mb) = (&weights[a].1, &weights[b].1);
            let c = &half * ma * mb * (ma - mb);
            if c.is_zero() {
                continue;
            }
            let term = &(a12 * b23) - &(a23 * b12);
            bilinear = &bilinear + &term.scale(&scalar(c));
        }
    }
    report.compare("trilinear − bilinear", &trilinear, &bilinear);
    report.note(format!(
        "{} weighted projectors, checked at sampled rational weights",
        weights.len()
    ));
    report.finish()
}

/// Truncated bivariate series with matrix coefficients, keyed by the
/// exponents `(r, s)` of `θ^r θ′^s`.
type Series = BTreeMap<(u32, u32), SparseMatrix>;

fn factorial(n: u32) -> Rational {
    (1..=n as i64).fold(Rational::one(), |acc, k| acc * int(k))
}

/// `e^{(aθ + bθ′)X}` up to total degree `max`, for `a, b ∈ {0, 1}`.
fn exp_series(x: &SparseMatrix, a: u32, b: u32, max: u32) -> Series {
    let mut out = Series::new();
    let mut power = SparseMatrix::identity(x.rows(), 0);
    for n in 0..=max {
        if n > 0 {
            power = &power * x;
        }
        // (aθ + bθ′)ⁿ/n! = Σ_{r+s=n} a^r b^s θ^r θ′^s / (r! s!)
        for r in 0..=n {
            let s = n - r;
            if (a == 0 && r > 0) || (b == 0 && s > 0) {
                continue;
            }
            let c = Rational::one() / (factorial(r) * factorial(s));
            let term = power.scale(&Scalar::rational(c));
            let slot = out
                .entry((r, s))
                .or_insert_with(|| SparseMatrix::zeros(x.rows(), x.cols(), 0));
            *slot = &*slot + &term;
        }
    }
    out
}

fn series_mul(x: &Series, y: &Series, max: u32) -> Series {
    let mut out = Series::new();
    for (&(r1, s1), a) in x {
        for (&(r2, s2), b) in y {
            if r1 + s1 + r2 + s2 > max {
                continue;
            }
            let prod = a * b;
            let slot = out
                .entry((r1 + r2, s1 + s2))
                .or_insert_with(|| SparseMatrix::zeros(a.rows(), b.cols(), 0));
            *slot = &*slot + &prod;
        }
    }
    out
}

/// Expands `e^{θH₁₂}e^{(θ+θ′)H₂₃}e^{θ′H₁₂}` and its image under
/// `(12) ↔ (23), θ ↔ θ′` to third order. The linear and quadratic
/// coefficients must agree identically; at third order only the
/// `θθ′(θ+θ′)` combination may differ, and it vanishes exactly when the
/// double commutator identity holds.
pub fn verify_low_order_terms(h: &SparseMatrix) -> VerificationReport {
    let mut report = ReportBuilder::new("low-order series terms");
    let (a, b) = match h12_h23(h) {
        Ok(pair) => pair,
        Err(e) => {
            report.note(e.to_string());
            report.position("shape", 0, 0, ExpSum::one(0));
            return report.finish();
        }
    };
    let max = 3;
    let lhs = series_mul(
        &series_mul(&exp_series(&a, 1, 0, max), &exp_series(&b, 1, 1, max), max),
        &exp_series(&a, 0, 1, max),
        max,
    );
    let rhs = series_mul(
        &series_mul(&exp_series(&b, 0, 1, max), &exp_series(&a, 1, 1, max), max),
        &exp_series(&b, 1, 0, max),
        max,
    );
    let size = a.rows();
    let coef = |s: &Series, k: (u32, u32)| {
        s.get(&k)
            .cloned()
            .unwrap_or_else(|| SparseMatrix::zeros(size, size, 0))
    };
    let diff = |k| &coef(&lhs, k) - &coef(&rhs, k);
    for k in [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2), (3, 0), (0, 3)] {
        report.residual(&format!("θ^{}θ′^{} coefficient", k.0, k.1), &diff(k));
    }
    // θ²θ′ and θθ′² must carry the same residual, i.e. it factors as θθ′(θ+θ′).
    let (d21, d12) = (diff((2, 1)), diff((1, 2)));
    report.compare("θ²θ′ vs θθ′² residual", &d21, &d12);
    report.residual("θθ′(θ+θ′) coefficient", &d21);
    report.finish()
}

/// Compares `R̂(θ)` with `Σ_{n ≤ order} θⁿHⁿ/n!` in double precision; `Hⁿ`
/// is computed exactly first. Passes when the relative max-norm deviation
/// is below [`SERIES_TOLERANCE`].
pub fn verify_exponential_series(
    r: &BraidMatrix,
    h: &SparseMatrix,
    theta: f64,
    order: u32,
) -> VerificationReport {
    let mut report = ReportBuilder::new(format!("e^(θH) series at θ = {theta}"));
    let rm = r.matrix();
    if h.rows() != rm.rows() || !h.is_square() || h.arity() != 0 {
        report.note("H must be a constant matrix of the same size as R̂");
        report.position("shape", 0, 0, ExpSum::one(0));
        return report.finish();
    }
    let size = rm.rows();
    let exact = match rm.eval(&[theta]) {
        Ok(v) => v,
        Err(e) => {
            report.note(e.to_string());
            report.position("eval", 0, 0, ExpSum::one(0));
            return report.finish();
        }
    };
    let mut series = vec![0.0; size * size];
    let mut power = SparseMatrix::identity(size, 0);
    let mut scale = 1.0_f64;
    for n in 0..=order {
        if n > 0 {
            power = &power * h;
            scale *= theta / f64::from(n);
        }
        for (i, j, v) in power.entries() {
            series[i * size + j] += scale * v.at_origin().to_f64();
        }
    }
    let norm = exact
        .iter()
        .fold(0.0_f64, |m, x| m.max(x.abs()))
        .max(f64::MIN_POSITIVE);
    let mut worst = 0.0_f64;
    for (k, (x, y)) in exact.iter().zip(&series).enumerate() {
        let dev = (x - y).abs() / norm;
        worst = worst.max(dev);
        if dev.is_nan() || dev >= SERIES_TOLERANCE {
            let (i, j) = (k / size, k % size);
            report.position("|R̂(θ) − series| / max|R̂(θ)|", i, j, rm.entry(i, j));
        }
    }
    report.note(format!("order {order}, max relative deviation {worst:.3e}"));
    report.finish()
}

/// `M·H·M` is diagonal and each entry is the exponent of the matching
/// diagonal entry of `M·R̂·M`, with `0` at the centre.
pub fn verify_spectral_slopes(
    r: &BraidMatrix,
    h: &SparseMatrix,
    m: &SparseMatrix,
) -> VerificationReport {
    let mut report = ReportBuilder::new("spectral slopes");
    let (dh, dr) = match (conjugate(m, h), conjugate(m, r.matrix())) {
        (Ok(dh), Ok(dr)) => (dh, dr),
        (Err(e), _) | (_, Err(e)) => {
            report.note(e.to_string());
            report.position("shape", 0, 0, ExpSum::one(0));
            return report.finish();
        }
    };
    for (i, j, v) in dh.entries().filter(|(i, j, _)| i != j) {
        report.position("M·H·M off-diagonal", i, j, v.clone());
    }
    for (i, j, v) in dr.entries().filter(|(i, j, _)| i != j) {
        report.position("M·R̂·M off-diagonal", i, j, v.clone());
    }
    for k in 0..dh.rows() {
        let slope = dh.entry(k, k).at_origin();
        let want = match slope.is_rational() {
            true => ExpSum::exp(slope.r().clone()),
            false => {
                report.position("irrational slope", k, k, dh.entry(k, k));
                continue;
            }
        };
        let got = dr.entry(k, k);
        if got != want {
            report.position("M·R̂·M − e^(θ·slope)", k, k, &got - &want);
        }
    }
    report.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;
    use crate::braid::{build_braid, random_params};
    use crate::projectors::{build_diagonalizer, OddDim, Sign};

    fn dim(n: usize) -> OddDim {
        OddDim::new(n).unwrap()
    }

    #[test]
    fn h_of_zero_params_is_zero() {
        assert!(build_h(&ParamSet::zero(dim(3))).matrix().is_zero());
    }

    #[test]
    fn h_entries_n3() {
        let params = random_params(dim(3), 5, true).unwrap();
        let h = build_h(&params);
        let m = |eps| params.m_ij(1, 1, eps).unwrap().clone();
        let want = (m(Sign::Plus) + m(Sign::Minus)) / int(2);
        assert_eq!(
            h.matrix().entry(0, 0),
            ExpSum::constant(0, Scalar::rational(want))
        );
        assert!(h.matrix().entry(4, 4).is_zero());
    }

    #[test]
    fn powers_hold_and_detect_a_doubled_projector() {
        let params = random_params(dim(3), 2, true).unwrap();
        let basis = build_merged_basis(dim(3));
        let h = build_h(&params);
        assert!(verify_h_powers(&h, &basis, 3).pass);
        assert!(verify_h_powers(&build_h(&ParamSet::zero(dim(3))), &basis, 3).pass);

        let mut bad = basis.clone();
        let l = MergedLabel::Pi {
            i: 1,
            eps: Sign::Plus,
        };
        bad.insert(l, bad[&l].scale(&Scalar::from_int(2)));
        let h_bad = Hamiltonian::from_basis(&params, &bad).unwrap();
        let report = verify_h_powers(&h_bad, &bad, 2);
        assert!(!report.pass);
    }

    #[test]
    fn double_commutator() {
        let params = random_params(dim(3), 8, true).unwrap();
        assert!(verify_double_commutator(build_h(&params).matrix()).pass);
        assert!(verify_double_commutator(&SparseMatrix::zeros(9, 9, 0)).pass);
    }

    #[test]
    fn trilinear() {
        let basis = build_merged_basis(dim(3));
        let params = random_params(dim(3), 4, true).unwrap();
        assert!(verify_trilinear_identity(&params, &basis).pass);
        let equal = ParamSet::from_fn(dim(3), |_| rat(3, 2));
        assert!(verify_trilinear_identity(&equal, &basis).pass);
        assert!(verify_trilinear_identity(&ParamSet::zero(dim(3)), &basis).pass);
    }

    #[test]
    fn low_orders_cancel() {
        let params = random_params(dim(3), 6, true).unwrap();
        let r = verify_low_order_terms(build_h(&params).matrix());
        assert!(r.pass, "{r}");
    }

    #[test]
    fn series_matches() {
        let params = random_params(dim(3), 3, true).unwrap();
        let r = build_braid(&params);
        let h = build_h(&params);
        for theta in [0.0, 0.1, 0.3] {
            let rep = verify_exponential_series(&r, h.matrix(), theta, 25);
            assert!(rep.pass, "{rep}");
        }
        let zero = ParamSet::zero(dim(3));
        let rep = verify_exponential_series(&build_braid(&zero), build_h(&zero).matrix(), 0.3, 25);
        assert!(rep.pass);
    }

    #[test]
    fn series_detects_a_wrong_generator() {
        let params = random_params(dim(3), 3, true).unwrap();
        let r = build_braid(&params);
        let h = build_h(&params).matrix().scale(&Scalar::from_int(2));
        assert!(!verify_exponential_series(&r, &h, 0.3, 25).pass);
    }

    #[test]
    fn slopes_match_spectrum() {
        for n in [3, 5] {
            let params = random_params(dim(n), 1, true).unwrap();
            let rep = verify_spectral_slopes(
                &build_braid(&params),
                build_h(&params).matrix(),
                &build_diagonalizer(dim(n)),
            );
            assert!(rep.pass, "{rep}");
        }
    }
}
