//! Braid matrices `R̂(θ) = Σ f_α(θ)·P_α` over the nested projector basis,
//! their structural checks and the exact braid-equation residual.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::algebra::json::{expsum_from_json, expsum_to_json, reframe, ExpSumJson, MatrixJson};
use crate::algebra::{
    format_rational, int, parse_rational, rat, ExpSum, ExponentMap, Rational, Scalar, SparseMatrix,
};
use crate::error::{Error, Result};
use crate::projectors::{build_projectors, MergedLabel, OddDim, ProjectorLabel, Sign};
use crate::report::{ReportBuilder, VerificationReport};

/// The free exponents `m`, one per non-`PP` merged label.
///
/// `m_pi(i, ε)` is stored under `MergedLabel::Pi`, `m_ip(i, ε)` under
/// `MergedLabel::Ip` and the shared `m_ij(i, j, ε) = m_ij̄(i, j, ε)` under
/// `MergedLabel::TildeIj`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ParamSet {
    dim: OddDim,
    m: BTreeMap<MergedLabel, Rational>,
}

impl ParamSet {
    /// Builds a parameter set by evaluating `f` on every non-`PP` merged label.
    pub fn from_fn(dim: OddDim, mut f: impl FnMut(MergedLabel) -> Rational) -> Self {
        let m = MergedLabel::all(dim)
            .into_iter()
            .filter(|l| *l != MergedLabel::Pp)
            .map(|l| (l, f(l)))
            .collect();
        ParamSet { dim, m }
    }

    pub fn zero(dim: OddDim) -> Self {
        Self::from_fn(dim, |_| Rational::zero())
    }

    /// Assigns `values` to the labels in canonical order.
    pub fn from_values(dim: OddDim, values: &[Rational]) -> Result<Self> {
        let expected = dim.parameter_count();
        if values.len() != expected {
            return Err(Error::DimensionMismatch(format!(
                "N = {dim} needs {expected} parameters, got {}",
                values.len()
            )));
        }
        let mut it = values.iter().cloned();
        Ok(Self::from_fn(dim, |_| it.next().expect("length checked")))
    }

    pub fn dim(&self) -> OddDim {
        self.dim
    }

    /// Number of free exponents, `2(p² − 1) = (N + 3)(N − 1)/2`.
    pub fn count(&self) -> usize {
        self.m.len()
    }

    pub fn values(&self) -> Vec<Rational> {
        self.m.values().cloned().collect()
    }

    /// Exponents keyed by merged label, `PP` excluded.
    pub fn merged_weights(&self) -> &BTreeMap<MergedLabel, Rational> {
        &self.m
    }

    /// Exponent attached to an unmerged label; zero for `PP`.
    pub fn weight(&self, label: ProjectorLabel) -> Rational {
        match label.merged() {
            MergedLabel::Pp => Rational::zero(),
            l => self.m[&l].clone(),
        }
    }

    /// Exponents keyed by unmerged label, `PP` excluded.
    pub fn unmerged_weights(&self) -> BTreeMap<ProjectorLabel, Rational> {
        ProjectorLabel::all(self.dim)
            .into_iter()
            .filter(|l| *l != ProjectorLabel::Pp)
            .map(|l| (l, self.weight(l)))
            .collect()
    }

    pub fn m_pi(&self, i: usize, eps: Sign) -> Option<&Rational> {
        self.m.get(&MergedLabel::Pi { i, eps })
    }

    pub fn m_ip(&self, i: usize, eps: Sign) -> Option<&Rational> {
        self.m.get(&MergedLabel::Ip { i, eps })
    }

    pub fn m_ij(&self, i: usize, j: usize, eps: Sign) -> Option<&Rational> {
        self.m.get(&MergedLabel::TildeIj { i, j, eps })
    }

    /// Replaces one exponent.
    pub fn with(&self, label: MergedLabel, m: Rational) -> Result<Self> {
        if !self.m.contains_key(&label) {
            return Err(Error::IndexOutOfRange(format!(
                "{label} for N = {}",
                self.dim
            )));
        }
        let mut out = self.clone();
        out.m.insert(label, m);
        Ok(out)
    }

    /// Pairs `(m⁺, m⁻)` sharing the same non-sign indices, keyed by the `+`
    /// label.
    pub fn sign_pairs(&self) -> Vec<(MergedLabel, Rational, Rational)> {
        self.m
            .iter()
            .filter_map(|(l, plus)| {
                let minus = match *l {
                    MergedLabel::Pi { i, eps: Sign::Plus } => MergedLabel::Pi {
                        i,
                        eps: Sign::Minus,
                    },
                    MergedLabel::Ip { i, eps: Sign::Plus } => MergedLabel::Ip {
                        i,
                        eps: Sign::Minus,
                    },
                    MergedLabel::TildeIj {
                        i,
                        j,
                        eps: Sign::Plus,
                    } => MergedLabel::TildeIj {
                        i,
                        j,
                        eps: Sign::Minus,
                    },
                    _ => return None,
                };
                Some((*l, plus.clone(), self.m[&minus].clone()))
            })
            .collect()
    }

    /// Swaps each `(m⁺, m⁻)` pair where needed so that `m⁺ ≥ m⁻`.
    pub fn with_positive_ordering(&self) -> Self {
        let mut out = self.clone();
        for (l, plus, minus) in self.sign_pairs() {
            if plus < minus {
                let partner = flip_sign(l);
                out.m.insert(l, minus);
                out.m.insert(partner, plus);
            }
        }
        out
    }

    /// `f_α = e^{m_α θ}` for every non-`PP` unmerged label.
    pub fn to_coefficients(&self) -> CoefficientMap {
        let f = self
            .unmerged_weights()
            .into_iter()
            .map(|(l, m)| (l, ExpSum::exp(m)))
            .collect();
        CoefficientMap { dim: self.dim, f }
    }

    pub fn to_json(&self) -> ParamSetJson {
        let mut out = ParamSetJson {
            n: self.dim.n(),
            m_pi: Vec::new(),
            m_ip: Vec::new(),
            m_ij: Vec::new(),
        };
        for (l, m) in &self.m {
            let m = format_rational(m);
            match *l {
                MergedLabel::Pi { i, eps } => out.m_pi.push(SiteParamJson {
                    i,
                    eps: eps.symbol().to_string(),
                    m,
                }),
                MergedLabel::Ip { i, eps } => out.m_ip.push(SiteParamJson {
                    i,
                    eps: eps.symbol().to_string(),
                    m,
                }),
                MergedLabel::TildeIj { i, j, eps } => out.m_ij.push(PairParamJson {
                    i,
                    j,
                    eps: eps.symbol().to_string(),
                    m,
                }),
                MergedLabel::Pp => unreachable!("PP carries no parameter"),
            }
        }
        out
    }

    /// Validates a decoded parameter file: every label present exactly once
    /// and in range.
    pub fn from_json(json: &ParamSetJson) -> Result<Self> {
        let dim = OddDim::new(json.n).map_err(|e| Error::parse("N", e.to_string()))?;
        let mut m = BTreeMap::new();
        let mut insert = |field: String, label: MergedLabel, value: &str| -> Result<()> {
            let in_range = |k: usize| (1..dim.p()).contains(&k);
            let ok = match label {
                MergedLabel::Pi { i, .. } | MergedLabel::Ip { i, .. } => in_range(i),
                MergedLabel::TildeIj { i, j, .. } => in_range(i) && in_range(j),
                MergedLabel::Pp => false,
            };
            if !ok {
                return Err(Error::parse(
                    field,
                    format!("index out of range for N = {dim}"),
                ));
            }
            let q = parse_rational(value).map_err(|e| reframe(e, &format!("{field}.m")))?;
            if m.insert(label, q).is_some() {
                return Err(Error::parse(field, format!("duplicate entry for {label}")));
            }
            Ok(())
        };
        let sign =
            |field: &str, s: &str| Sign::parse(s).map_err(|e| reframe(e, &format!("{field}.eps")));
        for (k, e) in json.m_pi.iter().enumerate() {
            let f = format!("m_pi[{k}]");
            let eps = sign(&f, &e.eps)?;
            insert(f, MergedLabel::Pi { i: e.i, eps }, &e.m)?;
        }
        for (k, e) in json.m_ip.iter().enumerate() {
            let f = format!("m_ip[{k}]");
            let eps = sign(&f, &e.eps)?;
            insert(f, MergedLabel::Ip { i: e.i, eps }, &e.m)?;
        }
        for (k, e) in json.m_ij.iter().enumerate() {
            let f = format!("m_ij[{k}]");
            let eps = sign(&f, &e.eps)?;
            insert(
                f,
                MergedLabel::TildeIj {
                    i: e.i,
                    j: e.j,
                    eps,
                },
                &e.m,
            )?;
        }
        for l in MergedLabel::all(dim) {
            if l != MergedLabel::Pp && !m.contains_key(&l) {
                let field = match l {
                    MergedLabel::Pi { .. } => "m_pi",
                    MergedLabel::Ip { .. } => "m_ip",
                    _ => "m_ij",
                };
                return Err(Error::parse(field, format!("missing entry for {l}")));
            }
        }
        Ok(ParamSet { dim, m })
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let json: ParamSetJson =
            serde_json::from_str(s).map_err(|e| Error::parse("params", e.to_string()))?;
        Self::from_json(&json)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("plain data serializes")
    }
}

fn flip_sign(l: MergedLabel) -> MergedLabel {
    let neg = |eps: Sign| eps * Sign::Minus;
    match l {
        MergedLabel::Pp => MergedLabel::Pp,
        MergedLabel::Pi { i, eps } => MergedLabel::Pi { i, eps: neg(eps) },
        MergedLabel::Ip { i, eps } => MergedLabel::Ip { i, eps: neg(eps) },
        MergedLabel::TildeIj { i, j, eps } => MergedLabel::TildeIj {
            i,
            j,
            eps: neg(eps),
        },
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SiteParamJson {
    pub i: usize,
    pub eps: String,
    pub m: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairParamJson {
    pub i: usize,
    pub j: usize,
    pub eps: String,
    pub m: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSetJson {
    #[serde(rename = "N")]
    pub n: usize,
    pub m_pi: Vec<SiteParamJson>,
    pub m_ip: Vec<SiteParamJson>,
    pub m_ij: Vec<PairParamJson>,
}

/// Arbitrary spectral coefficients `f_α(θ)` for the unmerged labels, with
/// `f_PP = 1` implied. Used to build matrices outside the solution set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientMap {
    dim: OddDim,
    f: BTreeMap<ProjectorLabel, ExpSum>,
}

impl CoefficientMap {
    /// Checks completeness over the non-`PP` labels, arity 1 and
    /// invertibility. A `PP` entry is accepted only if it equals `1`.
    pub fn new(dim: OddDim, coeffs: BTreeMap<ProjectorLabel, ExpSum>) -> Result<Self> {
        let labels: BTreeSet<ProjectorLabel> = ProjectorLabel::all(dim).into_iter().collect();
        let mut f = BTreeMap::new();
        for (l, v) in coeffs {
            if !labels.contains(&l) {
                return Err(Error::IndexOutOfRange(format!("{l} for N = {dim}")));
            }
            if v.arity() != 1 {
                return Err(Error::InvalidCoefficient(format!(
                    "{l} has arity {}, expected 1",
                    v.arity()
                )));
            }
            if v.is_zero() {
                return Err(Error::ZeroCoefficient(l.to_string()));
            }
            if l == ProjectorLabel::Pp {
                if !v.is_one() {
                    return Err(Error::InvalidCoefficient(format!(
                        "PP is normalized to 1, got {v}"
                    )));
                }
                continue;
            }
            f.insert(l, v);
        }
        if let Some(l) = labels
            .iter()
            .find(|l| **l != ProjectorLabel::Pp && !f.contains_key(*l))
        {
            return Err(Error::MissingCoefficient(l.to_string()));
        }
        Ok(CoefficientMap { dim, f })
    }

    pub fn dim(&self) -> OddDim {
        self.dim
    }

    pub fn get(&self, label: ProjectorLabel) -> ExpSum {
        match label {
            ProjectorLabel::Pp => ExpSum::one(1),
            l => self.f[&l].clone(),
        }
    }

    /// Non-`PP` coefficients in canonical label order.
    pub fn iter(&self) -> impl Iterator<Item = (&ProjectorLabel, &ExpSum)> {
        self.f.iter()
    }

    /// Replaces one coefficient, re-checking invertibility.
    pub fn with(&self, label: ProjectorLabel, f: ExpSum) -> Result<Self> {
        let mut all = self.f.clone();
        all.insert(label, f);
        Self::new(self.dim, all)
    }

    pub fn to_json(&self) -> CoefficientMapJson {
        CoefficientMapJson {
            n: self.dim.n(),
            coefficients: self
                .f
                .iter()
                .map(|(l, f)| CoefficientJson {
                    label: l.to_string(),
                    f: expsum_to_json(f),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &CoefficientMapJson) -> Result<Self> {
        let dim = OddDim::new(json.n).map_err(|e| Error::parse("N", e.to_string()))?;
        let mut f = BTreeMap::new();
        for (k, c) in json.coefficients.iter().enumerate() {
            let field = format!("coefficients[{k}]");
            let label = ProjectorLabel::parse_for(&c.label, dim)
                .map_err(|e| reframe(e, &format!("{field}.label")))?;
            let v = expsum_from_json(&c.f, 1, &format!("{field}.f"))?;
            if v.is_zero() {
                return Err(Error::parse(
                    format!("{field}.f"),
                    "coefficient must be nonzero",
                ));
            }
            if f.insert(label, v).is_some() {
                return Err(Error::parse(field, format!("duplicate label {label}")));
            }
        }
        Self::new(dim, f)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientJson {
    pub label: String,
    pub f: ExpSumJson,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientMapJson {
    #[serde(rename = "N")]
    pub n: usize,
    pub coefficients: Vec<CoefficientJson>,
}

/// Where a braid matrix came from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Provenance {
    Params(ParamSet),
    Custom(CoefficientMap),
}

impl Provenance {
    pub fn coefficients(&self) -> CoefficientMap {
        match self {
            Provenance::Params(p) => p.to_coefficients(),
            Provenance::Custom(c) => c.clone(),
        }
    }

    pub fn params(&self) -> Option<&ParamSet> {
        match self {
            Provenance::Params(p) => Some(p),
            Provenance::Custom(_) => None,
        }
    }
}

/// An `N²×N²` arity-1 matrix `R̂(θ)` together with its construction data.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BraidMatrix {
    dim: OddDim,
    matrix: SparseMatrix,
    provenance: Provenance,
}

impl BraidMatrix {
    /// Wraps an arbitrary matrix, e.g. a hand-corrupted build. Only the shape
    /// is checked; all structure is left to the verifiers.
    pub fn from_parts(dim: OddDim, matrix: SparseMatrix, provenance: Provenance) -> Result<Self> {
        if matrix.rows() != dim.size() || matrix.cols() != dim.size() {
            return Err(Error::DimensionMismatch(format!(
                "braid matrix for N = {dim} must be {0}×{0}, got {1}×{2}",
                dim.size(),
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(BraidMatrix {
            dim,
            matrix,
            provenance,
        })
    }

    pub fn dim(&self) -> OddDim {
        self.dim
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Same provenance, different matrix.
    pub fn with_matrix(&self, matrix: SparseMatrix) -> Result<Self> {
        Self::from_parts(self.dim, matrix, self.provenance.clone())
    }

    /// `c·R̂(θ)`. The normalization `f_PP = 1` is what the identity checks
    /// use; this is for export only.
    pub fn rescaled(&self, c: &Scalar) -> SparseMatrix {
        self.matrix.scale(c)
    }

    pub fn to_json(&self) -> BraidMatrixJson {
        BraidMatrixJson {
            matrix: (&self.matrix).into(),
            provenance: match &self.provenance {
                Provenance::Params(p) => ProvenanceJson::Params(p.to_json()),
                Provenance::Custom(c) => ProvenanceJson::Coefficients(c.to_json()),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProvenanceJson {
    Params(ParamSetJson),
    Coefficients(CoefficientMapJson),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BraidMatrixJson {
    #[serde(flatten)]
    pub matrix: MatrixJson,
    pub provenance: ProvenanceJson,
}

fn assemble(coeffs: &CoefficientMap) -> SparseMatrix {
    let dim = coeffs.dim();
    let mut out = SparseMatrix::zeros(dim.size(), dim.size(), 1);
    for (l, p) in build_projectors(dim) {
        let f = coeffs.get(l);
        for (i, j, c) in p.entries() {
            let v = f.scale(&c.at_origin());
            out.add_at(i, j, &v).expect("in range");
        }
    }
    out
}

/// `R̂(θ) = P_pp + Σ e^{mθ}P` over all unmerged labels, with
/// `m_ij̄ = m_ij` built in.
pub fn build_braid(params: &ParamSet) -> BraidMatrix {
    BraidMatrix {
        dim: params.dim(),
        matrix: assemble(&params.to_coefficients()),
        provenance: Provenance::Params(params.clone()),
    }
}

/// `Σ f_α·P_α` with no constraint on the coefficients.
pub fn build_braid_custom(coeffs: &CoefficientMap) -> BraidMatrix {
    BraidMatrix {
        dim: coeffs.dim(),
        matrix: assemble(coeffs),
        provenance: Provenance::Custom(coeffs.clone()),
    }
}

/// The projector label whose `±` pair owns the diagonal slot `(a, c)`,
/// reported with `ε = +`.
fn owner(dim: OddDim, a: usize, c: usize) -> ProjectorLabel {
    let p = dim.p();
    let low = |k: usize| k.min(dim.bar(k));
    let eps = Sign::Plus;
    match (a == p, c == p) {
        (true, true) => ProjectorLabel::Pp,
        (true, false) => ProjectorLabel::Pi { i: low(c), eps },
        (false, true) => ProjectorLabel::Ip { i: low(a), eps },
        (false, false) => {
            let (i, j) = (low(a), low(c));
            if (a < p) == (c < p) {
                ProjectorLabel::Ij { i, j, eps }
            } else {
                ProjectorLabel::IjBar { i, j, eps }
            }
        }
    }
}

fn with_sign(l: ProjectorLabel, eps: Sign) -> ProjectorLabel {
    match l {
        ProjectorLabel::Pp => ProjectorLabel::Pp,
        ProjectorLabel::Pi { i, .. } => ProjectorLabel::Pi { i, eps },
        ProjectorLabel::Ip { i, .. } => ProjectorLabel::Ip { i, eps },
        ProjectorLabel::Ij { i, j, .. } => ProjectorLabel::Ij { i, j, eps },
        ProjectorLabel::IjBar { i, j, .. } => ProjectorLabel::IjBar { i, j, eps },
    }
}

/// The entries of `R̂` written down slot by slot: the half-sum
/// `½(f⁺ + f⁻)` on the diagonal, the half-difference `½(f⁺ − f⁻)` on the
/// antidiagonal, and `1` at the centre.
pub fn closed_form_matrix(coeffs: &CoefficientMap) -> SparseMatrix {
    let dim = coeffs.dim();
    let n = dim.n();
    let size = dim.size();
    let half = Scalar::from_ratio(1, 2);
    let mut out = SparseMatrix::zeros(size, size, 1);
    for a in 1..=n {
        for c in 1..=n {
            let row = dim.index(a, c);
            let l = owner(dim, a, c);
            if l == ProjectorLabel::Pp {
                out.set(row, row, ExpSum::one(1)).expect("in range");
                continue;
            }
            let plus = coeffs.get(with_sign(l, Sign::Plus));
            let minus = coeffs.get(with_sign(l, Sign::Minus));
            out.set(row, row, (&plus + &minus).scale(&half))
                .expect("in range");
            out.set(row, size - 1 - row, (&plus - &minus).scale(&half))
                .expect("in range");
        }
    }
    out
}

/// Support on the diagonal and antidiagonal only, `1` at the centre, and
/// every entry equal to its closed form. The entry count must match the
/// closed form's, which is `2N² − 1` unless some `m⁺ = m⁻`.
pub fn verify_pattern(r: &BraidMatrix) -> VerificationReport {
    let dim = r.dim();
    let size = dim.size();
    let centre = dim.index(dim.p(), dim.p());
    let mut report = ReportBuilder::new("diagonal/antidiagonal pattern");
    for (i, j, v) in r.matrix().entries() {
        if i != j && i + j != size - 1 {
            report.position("off-pattern entry", i, j, v.clone());
        }
    }
    let centre_value = r.matrix().entry(centre, centre);
    if !centre_value.is_one() {
        report.position(
            "centre ≠ 1",
            centre,
            centre,
            &centre_value - &ExpSum::one(1),
        );
    }
    let expected = closed_form_matrix(&r.provenance().coefficients());
    report.compare("R̂ − closed form", r.matrix(), &expected);
    let (count, want) = (r.matrix().nnz(), expected.nnz());
    report.note(format!(
        "{count} nonzero entries (closed form {want}, generic 2N²−1 = {})",
        dim.braid_nonzeros()
    ));
    if count != want {
        report.note("entry count differs from the closed form");
    }
    report.finish()
}

/// `R̂ ⊗ I_N` and `I_N ⊗ R̂` on `V⊗V⊗V`.
pub fn embed_12_23(r: &SparseMatrix, n: usize) -> Result<(SparseMatrix, SparseMatrix)> {
    let id = SparseMatrix::identity(n, r.arity());
    Ok((r.kron(&id)?, id.kron(r)?))
}

/// The exact residual of
/// `R̂₁₂(θ)R̂₂₃(θ+θ′)R̂₁₂(θ′) = R̂₂₃(θ′)R̂₁₂(θ+θ′)R̂₂₃(θ)` on `V⊗V⊗V`.
pub fn verify_braid_equation(r: &BraidMatrix) -> VerificationReport {
    braid_residual(r.matrix(), r.dim().n())
}

pub(crate) fn braid_residual(r: &SparseMatrix, n: usize) -> VerificationReport {
    let mut report = ReportBuilder::new("braid equation");
    if r.arity() != 1 {
        report.note(format!("expected arity 1, found {}", r.arity()));
        report.position("arity", 0, 0, ExpSum::one(0));
        return report.finish();
    }
    let lift = |c: [i64; 2]| {
        let map = ExponentMap::linear(&c).expect("1→2 map");
        embed_12_23(&r.lift(&map).expect("arity 1"), n).expect("same arity")
    };
    let (a12, a23) = lift([1, 0]);
    let (s12, s23) = lift([1, 1]);
    let (b12, b23) = lift([0, 1]);
    let lhs = &(&a12 * &s23) * &b12;
    let rhs = &(&b23 * &s12) * &a23;
    report.compare(
        "R12(θ)R23(θ+θ′)R12(θ′) − R23(θ′)R12(θ+θ′)R23(θ)",
        &lhs,
        &rhs,
    );
    report.note(format!("{} nonzero entries on the left side", lhs.nnz()));
    report.finish()
}

/// `R̂(−θ)·R̂(θ) = I` and `R̂(0) = I`.
pub fn verify_inverse_property(r: &BraidMatrix) -> VerificationReport {
    let mut report = ReportBuilder::new("inverse and unit");
    let m = r.matrix();
    if m.arity() != 1 {
        report.note(format!("expected arity 1, found {}", m.arity()));
        report.position("arity", 0, 0, ExpSum::one(0));
        return report.finish();
    }
    let reflected = m
        .lift(&ExponentMap::linear(&[-1]).expect("1→1 map"))
        .expect("arity 1");
    let size = m.rows();
    report.compare(
        "R̂(−θ)R̂(θ) − I",
        &(&reflected * m),
        &SparseMatrix::identity(size, 1),
    );
    report.compare("R̂(0) − I", &m.at_origin(), &SparseMatrix::identity(size, 0));
    report.finish()
}

/// With every `m⁺ > m⁻`, all stored entries must be positive at each
/// sampled `θ > 0`. Violations of the hypothesis are reported at the
/// diagonal slot of the offending `+` projector.
pub fn check_boltzmann_positivity(r: &BraidMatrix, theta_samples: &[f64]) -> VerificationReport {
    let mut report = ReportBuilder::new("Boltzmann positivity");
    let Some(params) = r.provenance().params() else {
        report.note("positivity hypothesis needs a parameter set; custom coefficients given");
        report.position("provenance", 0, 0, ExpSum::one(0));
        return report.finish();
    };
    let dim = r.dim();
    for (l, plus, minus) in params.sign_pairs() {
        if plus <= minus {
            let (a, c) = l.constituents()[0].diagonal_site(dim);
            let k = dim.index(a, c);
            report.note(format!(
                "hypothesis m⁺ > m⁻ fails for {l}: {} ≤ {}",
                format_rational(&plus),
                format_rational(&minus)
            ));
            report.position(
                "m⁺ ≤ m⁻",
                k,
                k,
                ExpSum::constant(0, Scalar::rational(&plus - &minus)),
            );
        }
    }
    for &theta in theta_samples {
        if theta.is_nan() || theta <= 0.0 {
            report.note(format!("sample θ = {theta} is not positive"));
            report.position("θ ≤ 0", 0, 0, ExpSum::one(0));
            continue;
        }
        for (i, j, v) in r.matrix().entries() {
            let x = v.eval(&[theta]).unwrap_or(f64::NAN);
            if x.is_nan() || x <= 0.0 {
                report.position(&format!("entry ≤ 0 at θ = {theta}"), i, j, v.clone());
            }
        }
    }
    report.note(format!(
        "{} entries checked at {} samples",
        r.matrix().nnz(),
        theta_samples.len()
    ));
    report.finish()
}

/// Numerator range of generated exponents.
const NUM_RANGE: std::ops::RangeInclusive<i64> = -9..=9;
/// Denominator range of generated exponents.
const DEN_RANGE: std::ops::RangeInclusive<i64> = 1..=9;

/// Number of distinct nonzero rationals `a/b` with `a`, `b` in the
/// generator's ranges.
pub fn distinct_pool_size() -> usize {
    let mut set = BTreeSet::new();
    for a in NUM_RANGE {
        for b in DEN_RANGE {
            if a != 0 {
                set.insert(rat(a, b));
            }
        }
    }
    set.len()
}

/// Random exponents `a/b`, `a ∈ [−9, 9]`, `b ∈ [1, 9]`, reproducible per
/// seed. With `distinct`, every value is nonzero and pairwise distinct.
pub fn random_params(dim: OddDim, seed: u64, distinct: bool) -> Result<ParamSet> {
    let needed = dim.parameter_count();
    if distinct {
        let available = distinct_pool_size();
        if needed > available {
            return Err(Error::ParameterPoolExhausted { needed, available });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = BTreeSet::new();
    let mut values = Vec::with_capacity(needed);
    while values.len() < needed {
        let q = rat(rng.gen_range(NUM_RANGE), rng.gen_range(DEN_RANGE));
        if distinct && (q.is_zero() || !seen.insert(q.clone())) {
            continue;
        }
        values.push(q);
    }
    ParamSet::from_values(dim, &values)
}

/// Coefficients from `params` except `f_IJbar(1,1,+)`, whose exponent is
/// shifted by one so that `m_11̄⁺ ≠ m_11⁺`.
pub fn mismatched_pair_coefficients(params: &ParamSet) -> CoefficientMap {
    let l = ProjectorLabel::IjBar {
        i: 1,
        j: 1,
        eps: Sign::Plus,
    };
    let m = params.weight(l) + int(1);
    params
        .to_coefficients()
        .with(l, ExpSum::exp(m))
        .expect("nonzero exponential")
}

/// Coefficients from `params` except `f_PI(1,+) = 1 + e^{θ}`, which is not
/// a single exponential.
pub fn non_exponential_coefficients(params: &ParamSet) -> CoefficientMap {
    let l = ProjectorLabel::Pi {
        i: 1,
        eps: Sign::Plus,
    };
    params
        .to_coefficients()
        .with(l, &ExpSum::one(1) + &ExpSum::exp(Rational::one()))
        .expect("nonzero sum")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(n: usize) -> OddDim {
        OddDim::new(n).unwrap()
    }

    /// `(m₁₁⁺, m₁₁⁻, m₁₂⁺, m₁₂⁻, m₂₁⁺, m₂₁⁻)` for N = 3, where `m₁₂ = m_ip`
    /// and `m₂₁ = m_pi`.
    fn n3(m: [Rational; 6]) -> ParamSet {
        let [a_p, a_m, b_p, b_m, c_p, c_m] = m;
        ParamSet::from_fn(dim(3), |l| match l {
            MergedLabel::TildeIj {
                eps: Sign::Plus, ..
            } => a_p.clone(),
            MergedLabel::TildeIj { .. } => a_m.clone(),
            MergedLabel::Ip {
                eps: Sign::Plus, ..
            } => b_p.clone(),
            MergedLabel::Ip { .. } => b_m.clone(),
            MergedLabel::Pi {
                eps: Sign::Plus, ..
            } => c_p.clone(),
            MergedLabel::Pi { .. } => c_m.clone(),
            MergedLabel::Pp => unreachable!(),
        })
    }

    fn sample() -> ParamSet {
        n3([int(1), rat(-1, 2), int(2), rat(1, 3), int(-3), rat(1, 5)])
    }

    #[test]
    fn parameter_counts() {
        for (n, c) in [(3, 6), (5, 16), (7, 30), (9, 48), (11, 70)] {
            assert_eq!(ParamSet::zero(dim(n)).count(), c);
        }
    }

    #[test]
    fn n3_layout() {
        let half = Scalar::from_ratio(1, 2);
        let pm = |p: Rational, m: Rational| {
            let (ep, em) = (ExpSum::exp(p), ExpSum::exp(m));
            ((&ep + &em).scale(&half), (&ep - &em).scale(&half))
        };
        let (ap, am) = pm(int(1), rat(-1, 2));
        let (bp, bm) = pm(int(2), rat(1, 3));
        let (cp, cm) = pm(int(-3), rat(1, 5));
        let one = ExpSum::one(1);
        let expected = [
            (0, 0, &ap),
            (0, 8, &am),
            (1, 1, &bp),
            (1, 7, &bm),
            (2, 2, &ap),
            (2, 6, &am),
            (3, 3, &cp),
            (3, 5, &cm),
            (4, 4, &one),
            (5, 3, &cm),
            (5, 5, &cp),
            (6, 2, &am),
            (6, 6, &ap),
            (7, 1, &bm),
            (7, 7, &bp),
            (8, 0, &am),
            (8, 8, &ap),
        ];
        let want = SparseMatrix::from_entries(
            9,
            9,
            1,
            expected.iter().map(|&(i, j, v)| (i, j, v.clone())),
        )
        .unwrap();
        let r = build_braid(&sample());
        assert_eq!(r.matrix(), &want);
        assert_eq!(r.matrix().nnz(), 17);
    }

    #[test]
    fn a_plus_plus_a_minus_is_the_plus_exponential() {
        let r = build_braid(&sample());
        let sum = &r.matrix().entry(0, 0) + &r.matrix().entry(0, 8);
        assert_eq!(sum, ExpSum::exp(int(1)));
    }

    #[test]
    fn zero_params_give_identity() {
        let r = build_braid(&ParamSet::zero(dim(5)));
        assert_eq!(r.matrix(), &SparseMatrix::identity(25, 1));
    }

    #[test]
    fn nonzero_counts() {
        for seed in [1, 2] {
            for n in [5, 7] {
                let r = build_braid(&random_params(dim(n), seed, true).unwrap());
                assert_eq!(r.matrix().nnz(), dim(n).braid_nonzeros());
            }
        }
    }

    #[test]
    fn custom_from_params_matches() {
        let p = sample();
        let custom = build_braid_custom(&p.to_coefficients());
        assert_eq!(custom.matrix(), build_braid(&p).matrix());
    }

    #[test]
    fn coefficient_map_rejects_bad_input() {
        let p = sample();
        let c = p.to_coefficients();
        let l = ProjectorLabel::Pi {
            i: 1,
            eps: Sign::Plus,
        };
        assert_eq!(
            c.with(l, ExpSum::zero(1)),
            Err(Error::ZeroCoefficient("PI(1,+)".into()))
        );
        assert!(c.with(ProjectorLabel::Pp, ExpSum::exp(int(1))).is_err());
        assert!(c.with(ProjectorLabel::Pp, ExpSum::one(1)).is_ok());
        let mut partial: BTreeMap<_, _> = c.iter().map(|(l, f)| (*l, f.clone())).collect();
        partial.remove(&l);
        assert_eq!(
            CoefficientMap::new(dim(3), partial),
            Err(Error::MissingCoefficient("PI(1,+)".into()))
        );
    }

    #[test]
    fn mismatched_pair_breaks_repetition() {
        let r = build_braid_custom(&mismatched_pair_coefficients(&sample()));
        let m = r.matrix();
        assert_ne!(m.entry(0, 0), m.entry(2, 2));
        assert_ne!(m.entry(0, 8), m.entry(2, 6));
        assert_eq!(m.nnz(), 17);
    }

    #[test]
    fn pattern_checks() {
        assert!(verify_pattern(&build_braid(&sample())).pass);
        let r = build_braid(&sample());
        let mut bad = r.matrix().clone();
        bad.set(0, 1, ExpSum::exp(int(1))).unwrap();
        let report = verify_pattern(&r.with_matrix(bad).unwrap());
        assert!(!report.pass);
        assert_eq!(report.residual_support, vec![(0, 1)]);
    }

    #[test]
    fn braid_equation_on_sample_and_witnesses() {
        let p = sample();
        assert!(verify_braid_equation(&build_braid(&p)).pass);
        assert!(verify_braid_equation(&build_braid(&ParamSet::zero(dim(3)))).pass);
        let bad = build_braid_custom(&mismatched_pair_coefficients(&p));
        assert!(!verify_braid_equation(&bad).pass);
        let bad = build_braid_custom(&non_exponential_coefficients(&p));
        assert!(!verify_braid_equation(&bad).pass);
    }

    #[test]
    fn inverse_property() {
        assert!(
            verify_inverse_property(&build_braid(&random_params(dim(5), 4, true).unwrap())).pass
        );
        let bad = build_braid_custom(&non_exponential_coefficients(&sample()));
        let report = verify_inverse_property(&bad);
        assert!(!report.pass);
    }

    #[test]
    fn boltzmann() {
        let p = sample().with_positive_ordering();
        let r = check_boltzmann_positivity(&build_braid(&p), &[0.1, 1.0, 5.0]);
        assert!(r.pass, "{r}");

        let zero = check_boltzmann_positivity(&build_braid(&ParamSet::zero(dim(3))), &[1.0]);
        assert!(!zero.pass);
        assert!(zero.notes.iter().any(|n| n.contains("hypothesis")));

        // m₁₁⁺ < m₁₁⁻ makes a₋ = ½(e^{m⁺θ} − e^{m⁻θ}) negative for θ > 0.
        let swapped = n3([rat(-1, 2), int(1), int(2), rat(1, 3), int(1), rat(1, 5)]);
        let r = build_braid(&swapped);
        let a_minus = r.matrix().entry(0, 8);
        assert!(a_minus.eval(&[0.5]).unwrap() < 0.0);
        let report = check_boltzmann_positivity(&r, &[0.5]);
        assert!(report.residual_support.contains(&(0, 8)));
    }

    #[test]
    fn random_params_are_reproducible() {
        let a = random_params(dim(5), 9, true).unwrap();
        assert_eq!(a, random_params(dim(5), 9, true).unwrap());
        let values: BTreeSet<_> = a.values().into_iter().collect();
        assert_eq!(values.len(), 16);
        assert!(!values.contains(&Rational::zero()));
        assert_eq!(random_params(dim(7), 2, true).unwrap().count(), 30);
        assert_ne!(a, random_params(dim(5), 10, true).unwrap());
    }

    #[test]
    fn distinct_pool_has_a_limit() {
        assert_eq!(distinct_pool_size(), 110);
        assert!(random_params(dim(13), 0, true).is_ok());
        assert!(matches!(
            random_params(dim(15), 0, true),
            Err(Error::ParameterPoolExhausted { needed: 126, .. })
        ));
        assert!(random_params(dim(15), 0, false).is_ok());
    }

    #[test]
    fn param_json_round_trip() {
        let p = random_params(dim(5), 3, true).unwrap();
        let s = p.to_json_string();
        assert_eq!(ParamSet::from_json_str(&s).unwrap(), p);
        assert!(s.contains("\"N\": 5"));
    }

    #[test]
    fn param_json_errors_name_the_field() {
        let mut json = sample().to_json();
        json.m_ij[1].m = "1/0".into();
        let err = ParamSet::from_json(&json).unwrap_err();
        assert!(err.to_string().contains("m_ij[1].m"), "{err}");

        let mut json = sample().to_json();
        json.m_pi.pop();
        assert!(ParamSet::from_json(&json)
            .unwrap_err()
            .to_string()
            .contains("m_pi"));

        let mut json = sample().to_json();
        json.m_ip[0].eps = "x".into();
        assert!(ParamSet::from_json(&json)
            .unwrap_err()
            .to_string()
            .contains("m_ip[0].eps"));

        let mut json = sample().to_json();
        json.n = 4;
        assert!(ParamSet::from_json(&json).is_err());
    }

    #[test]
    fn coefficient_json_round_trip() {
        let c = non_exponential_coefficients(&sample());
        let back = CoefficientMap::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
    }
}
