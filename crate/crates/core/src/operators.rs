//! The operators `L⁺(θ) = R̂(θ)P` and `t(θ) = PR̂(θ)`, their `N×N` blocks,
//! the constant `X` matrices and the exchange relations.
//!
//! An operator on `k` quantum sites is an `N·W × N·W` matrix with
//! `W = N^k`, laid out as auxiliary ⊗ quantum: block `L_ab` occupies rows
//! `(a−1)W..aW` and columns `(b−1)W..bW`. For a single site this gives
//! `(L_ab)_cd = L[(a−1)N + (c−1), (b−1)N + (d−1)]`.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::json::{Labelled, MatrixJson};
use crate::algebra::{int, ExpSum, ExponentMap, Scalar, SparseMatrix};
use crate::braid::{BraidMatrix, ParamSet};
use crate::error::{Error, Result};
use crate::projectors::{
    build_flip, conjugate, parse_index, split_label, MergedLabel, OddDim, Sign,
};
use crate::report::{ReportBuilder, VerificationReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OperatorKind {
    Lplus,
    Transfer,
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OperatorKind::Lplus => write!(f, "lplus"),
            OperatorKind::Transfer => write!(f, "transfer"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OperatorMatrix {
    kind: OperatorKind,
    dim: OddDim,
    sites: usize,
    matrix: SparseMatrix,
}

impl OperatorMatrix {
    pub fn new(
        kind: OperatorKind,
        dim: OddDim,
        sites: usize,
        matrix: SparseMatrix,
    ) -> Result<Self> {
        let w = quantum_size(dim, sites)?;
        let size = dim.n() * w;
        if matrix.rows() != size || matrix.cols() != size {
            return Err(Error::DimensionMismatch(format!(
                "{sites}-site operator for N = {dim} must be {size}×{size}, got {}×{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        Ok(OperatorMatrix {
            kind,
            dim,
            sites,
            matrix,
        })
    }

    pub fn kind(&self) -> OperatorKind {
        self.kind
    }

    pub fn dim(&self) -> OddDim {
        self.dim
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    pub fn matrix(&self) -> &SparseMatrix {
        &self.matrix
    }

    /// `W = N^sites`, the side of each block.
    pub fn quantum_dim(&self) -> usize {
        self.matrix.rows() / self.dim.n()
    }

    /// Same kind and shape, different entries.
    pub fn with_matrix(&self, matrix: SparseMatrix) -> Result<Self> {
        Self::new(self.kind, self.dim, self.sites, matrix)
    }

    pub fn to_json(&self) -> OperatorJson {
        OperatorJson {
            matrix: (&self.matrix).into(),
            kind: self.kind,
            sites: self.sites,
        }
    }
}

fn quantum_size(dim: OddDim, sites: usize) -> Result<usize> {
    if sites == 0 {
        return Err(Error::DimensionMismatch(
            "an operator needs at least one site".into(),
        ));
    }
    u32::try_from(sites)
        .ok()
        .and_then(|k| dim.n().checked_pow(k))
        .and_then(|w| w.checked_mul(dim.n()).map(|_| w))
        .ok_or_else(|| Error::DimensionMismatch(format!("{sites} sites overflow the index range")))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorJson {
    #[serde(flatten)]
    pub matrix: MatrixJson,
    pub kind: OperatorKind,
    pub sites: usize,
}

fn flip_at(n: usize, arity: usize) -> SparseMatrix {
    build_flip(n)
        .and_then(|p| p.with_arity(arity))
        .expect("N ≥ 3")
}

/// `L⁺(θ) = R̂(θ)·P`.
pub fn build_lplus(r: &BraidMatrix) -> OperatorMatrix {
    let m = r.matrix();
    OperatorMatrix {
        kind: OperatorKind::Lplus,
        dim: r.dim(),
        sites: 1,
        matrix: m * &flip_at(r.dim().n(), m.arity()),
    }
}

/// `t(θ) = P·R̂(θ)`.
pub fn build_transfer(r: &BraidMatrix) -> OperatorMatrix {
    let m = r.matrix();
    OperatorMatrix {
        kind: OperatorKind::Transfer,
        dim: r.dim(),
        sites: 1,
        matrix: &flip_at(r.dim().n(), m.arity()) * m,
    }
}

/// The block `L_ab` (1-based), a `W×W` matrix.
pub fn extract_block(op: &OperatorMatrix, a: usize, b: usize) -> Result<SparseMatrix> {
    let n = op.dim().n();
    for k in [a, b] {
        if !(1..=n).contains(&k) {
            return Err(Error::IndexOutOfRange(format!(
                "block index {k} outside 1..={n}"
            )));
        }
    }
    let w = op.quantum_dim();
    op.matrix().block((a - 1) * w, (b - 1) * w, w, w)
}

/// `(L_ab)_cd = R̂_{ad,cb}` for every index quadruple.
pub fn verify_block_law(r: &BraidMatrix, l: &OperatorMatrix) -> VerificationReport {
    let mut report = ReportBuilder::new("block law");
    if l.sites() != 1 || l.dim() != r.dim() {
        report.note("block law needs a fundamental operator of the same dimension");
        report.position("shape", 0, 0, ExpSum::one(0));
        return report.finish();
    }
    let dim = r.dim();
    let n = dim.n();
    for a in 1..=n {
        for b in 1..=n {
            let block = extract_block(l, a, b).expect("in range");
            for c in 1..=n {
                for d in 1..=n {
                    // R̂_{ad,cb} is the coefficient of (ad)⊗(cb).
                    let want = r.matrix().entry(dim.index(a, c), dim.index(d, b));
                    let got = block.entry(c - 1, d - 1);
                    if got != want {
                        report.position(
                            &format!("(L_{a}{b})_{c}{d} − R̂_{a}{d},{c}{b}"),
                            (a - 1) * n + c - 1,
                            (b - 1) * n + d - 1,
                            &got - &want,
                        );
                    }
                }
            }
        }
    }
    report.finish()
}

/// `t = P·L⁺·P` and `(t_ab)_cd = (L⁺_cd)_ab`.
pub fn verify_flip_duality(l: &OperatorMatrix, t: &OperatorMatrix) -> VerificationReport {
    let mut report = ReportBuilder::new("flip duality");
    if l.sites() != 1 || t.sites() != 1 || l.dim() != t.dim() {
        report.note("flip duality needs fundamental operators of the same dimension");
        report.position("shape", 0, 0, ExpSum::one(0));
        return report.finish();
    }
    let n = l.dim().n();
    let p = flip_at(n, l.matrix().arity());
    report.compare("P·L⁺·P − t", &(&(&p * l.matrix()) * &p), t.matrix());
    for a in 1..=n {
        for b in 1..=n {
            let tb = extract_block(t, a, b).expect("in range");
            for c in 1..=n {
                for d in 1..=n {
                    let lb = l.matrix().entry((c - 1) * n + a - 1, (d - 1) * n + b - 1);
                    let got = tb.entry(c - 1, d - 1);
                    if got != lb {
                        report.position(
                            &format!("(t_{a}{b})_{c}{d} − (L⁺_{c}{d})_{a}{b}"),
                            (a - 1) * n + c - 1,
                            (b - 1) * n + d - 1,
                            &got - &lb,
                        );
                    }
                }
            }
        }
    }
    report.finish()
}

/// A fundamental operator evaluated at `θ = 0` equals the flip `P`.
pub fn verify_unit_value(op: &OperatorMatrix) -> VerificationReport {
    let mut report = ReportBuilder::new(format!("{}(0) = P", op.kind()));
    if op.sites() != 1 {
        report.note("unit value is stated for fundamental operators");
        report.position("shape", 0, 0, ExpSum::one(0));
        return report.finish();
    }
    report.compare(
        "op(0) − P",
        &op.matrix().at_origin(),
        &flip_at(op.dim().n(), 0),
    );
    report.finish()
}

/// Labels of the `N²` constant matrices `X`.
///
/// `JbarI { j, i, eps }` is `X_{j̄i} = (j̄i) + ε(jī)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum XLabel {
    Pp,
    Pi { i: usize, eps: Sign },
    Ip { i: usize, eps: Sign },
    Ij { i: usize, j: usize, eps: Sign },
    JbarI { j: usize, i: usize, eps: Sign },
}

impl XLabel {
    pub fn all(dim: OddDim) -> Vec<XLabel> {
        let mut out = vec![XLabel::Pp];
        for i in dim.inner() {
            for eps in Sign::BOTH {
                out.push(XLabel::Pi { i, eps });
            }
        }
        for i in dim.inner() {
            for eps in Sign::BOTH {
                out.push(XLabel::Ip { i, eps });
            }
        }
        for i in dim.inner() {
            for j in dim.inner() {
                for eps in Sign::BOTH {
                    out.push(XLabel::Ij { i, j, eps });
                }
            }
        }
        for j in dim.inner() {
            for i in dim.inner() {
                for eps in Sign::BOTH {
                    out.push(XLabel::JbarI { j, i, eps });
                }
            }
        }
        out
    }

    pub fn sign(self) -> Option<Sign> {
        match self {
            XLabel::Pp => None,
            XLabel::Pi { eps, .. }
            | XLabel::Ip { eps, .. }
            | XLabel::Ij { eps, .. }
            | XLabel::JbarI { eps, .. } => Some(eps),
        }
    }

    /// True for the generators that carry no index `p`.
    pub fn is_p_free(self) -> bool {
        matches!(self, XLabel::Ij { .. } | XLabel::JbarI { .. })
    }

    /// The two matrix units `(x, y)` (1-based) with `X = E_first + ε·E_second`.
    /// `X_pp` has only the first.
    pub fn support(self, dim: OddDim) -> ((usize, usize), Option<(usize, usize)>) {
        let p = dim.p();
        let b = |k| dim.bar(k);
        match self {
            XLabel::Pp => ((p, p), None),
            XLabel::Pi { i, .. } => ((p, i), Some((p, b(i)))),
            XLabel::Ip { i, .. } => ((i, p), Some((b(i), p))),
            XLabel::Ij { i, j, .. } => ((i, j), Some((b(i), b(j)))),
            XLabel::JbarI { j, i, .. } => ((b(j), i), Some((j, b(i)))),
        }
    }
}

impl fmt::Display for XLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            XLabel::Pp => write!(f, "X_pp"),
            XLabel::Pi { i, eps } => write!(f, "X_pi({i},{})", eps.symbol()),
            XLabel::Ip { i, eps } => write!(f, "X_ip({i},{})", eps.symbol()),
            XLabel::Ij { i, j, eps } => write!(f, "X_ij({i},{j},{})", eps.symbol()),
            XLabel::JbarI { j, i, eps } => write!(f, "X_jbar_i({j},{i},{})", eps.symbol()),
        }
    }
}

impl FromStr for XLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = split_label(s)?;
        let label = match (name, args.as_slice()) {
            ("X_pp", []) => XLabel::Pp,
            ("X_pi", [i, e]) => XLabel::Pi {
                i: parse_index(i)?,
                eps: Sign::parse(e)?,
            },
            ("X_ip", [i, e]) => XLabel::Ip {
                i: parse_index(i)?,
                eps: Sign::parse(e)?,
            },
            ("X_ij", [i, j, e]) => XLabel::Ij {
                i: parse_index(i)?,
                j: parse_index(j)?,
                eps: Sign::parse(e)?,
            },
            ("X_jbar_i", [j, i, e]) => XLabel::JbarI {
                j: parse_index(j)?,
                i: parse_index(i)?,
                eps: Sign::parse(e)?,
            },
            _ => return Err(Error::parse("label", format!("unknown X label {s:?}"))),
        };
        Ok(label)
    }
}

pub type XBasis = BTreeMap<XLabel, SparseMatrix>;

fn x_matrix(dim: OddDim, label: XLabel) -> SparseMatrix {
    let n = dim.n();
    let (first, second) = label.support(dim);
    let mut entries = vec![(first.0 - 1, first.1 - 1, Scalar::one())];
    if let (Some((x, y)), Some(eps)) = (second, label.sign()) {
        entries.push((x - 1, y - 1, eps.scalar()));
    }
    SparseMatrix::from_scalars(n, n, entries).expect("in range")
}

/// The `N²` constant `N×N` matrices with entries in `{0, ±1}`.
pub fn build_x_basis(dim: OddDim) -> XBasis {
    XLabel::all(dim)
        .into_iter()
        .map(|l| (l, x_matrix(dim, l)))
        .collect()
}

/// Dense integer rows of each `X`, keyed by label string.
pub fn x_basis_json(basis: &XBasis) -> Labelled<Vec<Vec<i64>>> {
    Labelled(
        basis
            .iter()
            .map(|(l, m)| {
                let rows = (0..m.rows())
                    .map(|i| {
                        (0..m.cols())
                            .map(|j| {
                                let c = m.entry(i, j).at_origin();
                                if c.is_zero() {
                                    0
                                } else if c == Scalar::one() {
                                    1
                                } else {
                                    -1
                                }
                            })
                            .collect()
                    })
                    .collect();
                (l.to_string(), rows)
            })
            .collect(),
    )
}

/// Coordinates of a constant `N×N` matrix in the `X` basis; only nonzero
/// coordinates are returned.
pub fn x_coordinates(dim: OddDim, m: &SparseMatrix) -> Result<BTreeMap<XLabel, Scalar>> {
    let n = dim.n();
    if m.rows() != n || m.cols() != n || m.arity() != 0 {
        return Err(Error::DimensionMismatch(format!(
            "X coordinates need a constant {n}×{n} matrix"
        )));
    }
    let at = |(x, y): (usize, usize)| m.entry(x - 1, y - 1).at_origin();
    let half = Scalar::from_ratio(1, 2);
    let mut out = BTreeMap::new();
    for l in XLabel::all(dim) {
        let (first, second) = l.support(dim);
        let c = match (second, l.sign()) {
            (Some(s), Some(eps)) => &half * &(&at(first) + &(&eps.scalar() * &at(s))),
            _ => at(first),
        };
        if !c.is_zero() {
            out.insert(l, c);
        }
    }
    Ok(out)
}

/// The listed product `X_a·X_b` as a combination of `X`s, or `None` when the
/// table lists no product for the pair (which then has to vanish).
pub fn x_product_rule(a: XLabel, b: XLabel) -> Option<Vec<(Scalar, XLabel)>> {
    use XLabel::*;
    let s = |e: Sign| e.scalar();
    let one = Scalar::one;
    let rule = match (a, b) {
        (Pp, Pp) => vec![(one(), Pp)],
        (Pp, Pi { .. }) => vec![(one(), b)],
        (Ip { .. }, Pp) => vec![(one(), a)],
        (Pi { i, eps: e }, Ip { i: k, eps: f }) if i == k => {
            vec![(&one() + &s(e * f), Pp)]
        }
        (Ip { i, eps: e }, Pi { i: j, eps: f }) => vec![
            (one(), Ij { i, j, eps: e * f }),
            (
                s(e),
                JbarI {
                    j: i,
                    i: j,
                    eps: e * f,
                },
            ),
        ],
        (Pi { i, eps: e }, Ij { i: k, j, eps: f }) if i == k => {
            vec![(one(), Pi { i: j, eps: e * f })]
        }
        (Ij { i, j, eps: e }, Ip { i: k, eps: f }) if j == k => vec![(one(), Ip { i, eps: e * f })],
        (Pi { i, eps: e }, JbarI { j: k, i: j, eps: f }) if i == k => {
            vec![(s(e), Pi { i: j, eps: e * f })]
        }
        (JbarI { j, i, eps: e }, Ip { i: k, eps: f }) if i == k => {
            vec![(s(e * f), Ip { i: j, eps: e * f })]
        }
        (Ij { i, j, eps: e }, Ij { i: k, j: l, eps: f }) if j == k => {
            vec![(
                one(),
                Ij {
                    i,
                    j: l,
                    eps: e * f,
                },
            )]
        }
        (Ij { i, j, eps: e }, JbarI { j: k, i: l, eps: f }) if j == k => {
            vec![(
                s(e),
                JbarI {
                    j: i,
                    i: l,
                    eps: e * f,
                },
            )]
        }
        (JbarI { j, i, eps: e }, Ij { i: k, j: l, eps: f }) if i == k => {
            vec![(
                one(),
                JbarI {
                    j,
                    i: l,
                    eps: e * f,
                },
            )]
        }
        (JbarI { j, i, eps: e }, JbarI { j: k, i: l, eps: f }) if i == k => {
            vec![(
                s(e),
                Ij {
                    i: j,
                    j: l,
                    eps: e * f,
                },
            )]
        }
        _ => return None,
    };
    Some(rule)
}

fn combine(basis: &XBasis, terms: &[(Scalar, XLabel)], n: usize) -> Result<SparseMatrix> {
    let mut out = SparseMatrix::zeros(n, n, 0);
    for (c, l) in terms {
        let x = basis
            .get(l)
            .ok_or_else(|| Error::IndexOutOfRange(format!("{l} is not in the basis")))?;
        out = &out + &x.scale(c);
    }
    Ok(out)
}

fn basis_dim(basis: &XBasis) -> Option<OddDim> {
    basis
        .values()
        .next()
        .and_then(|m| OddDim::new(m.rows()).ok())
}

/// Multiplies every ordered pair and compares with the product table:
/// listed products must match, unlisted ones must vanish.
pub fn verify_x_algebra(basis: &XBasis) -> VerificationReport {
    let mut report = ReportBuilder::new("X product table");
    let Some(dim) = basis_dim(basis) else {
        report.note("basis is empty or not N×N with odd N ≥ 3");
        report.position("shape", 0, 0, ExpSum::one(0));
        return report.finish();
    };
    let n = dim.n();
    let pairs: Vec<(&XLabel, &SparseMatrix, &XLabel, &SparseMatrix)> = basis
        .iter()
        .flat_map(|(a, ma)| basis.iter().map(move |(b, mb)| (a, ma, b, mb)))
        .collect();
    let outcomes: Vec<(bool, String, std::result::Result<SparseMatrix, String>)> = pairs
        .par_iter()
        .map(|&(a, ma, b, mb)| {
            let rule = x_product_rule(*a, *b);
            let listed = rule.is_some();
            let expected = combine(basis, &rule.unwrap_or_default(), n);
            let ctx = format!("X[{a}]·X[{b}]");
            let residual = expected.map(|e| &(ma * mb) - &e).map_err(|e| e.to_string());
            (listed, ctx, residual)
        })
        .collect();
    let listed = outcomes.iter().filter(|o| o.0).count();
    for (_, ctx, residual) in &outcomes {
        match residual {
            Ok(r) => {
                report.residual(ctx, r);
            }
            Err(e) => {
                report.note(format!("{ctx}: {e}"));
                report.position(ctx, 0, 0, ExpSum::one(0));
            }
        }
    }
    report.note(format!(
        "{} ordered pairs: {listed} listed, {} required to vanish",
        outcomes.len(),
        outcomes.len() - listed
    ));
    report.finish()
}

/// Every product decomposes exactly in the `X` basis, and products of
/// `p`-free generators stay `p`-free.
pub fn verify_x_closure(basis: &XBasis) -> VerificationReport {
    let mut report = ReportBuilder::new("X closure");
    let Some(dim) = basis_dim(basis) else {
        report.note("basis is empty or not N×N with odd N ≥ 3");
        report.position("shape", 0, 0, ExpSum::one(0));
        return report.finish();
    };
    let n = dim.n();
    for (a, ma) in basis {
        for (b, mb) in basis {
            let prod = ma * mb;
            let ctx = format!("X[{a}]·X[{b}]");
            let coords = x_coordinates(dim, &prod).expect("constant N×N");
            let terms: Vec<(Scalar, XLabel)> =
                coords.iter().map(|(l, c)| (c.clone(), *l)).collect();
            match combine(basis, &terms, n) {
                Ok(rebuilt) => {
                    report.compare(&format!("{ctx} outside span"), &prod, &rebuilt);
                }
                Err(e) => {
                    report.note(format!("{ctx}: {e}"));
                    report.position(&ctx, 0, 0, ExpSum::one(0));
                }
            }
            if a.is_p_free() && b.is_p_free() {
                for (l, c) in &coords {
                    if !l.is_p_free() {
                        report.note(format!("{ctx} has a component along {l}"));
                        let ((x, y), _) = l.support(dim);
                        report.position(&ctx, x - 1, y - 1, ExpSum::constant(0, c.clone()));
                    }
                }
            }
        }
    }
    report.finish()
}

/// `C₁ = (X_pp + Σᵢ X_ii⁺)/N = I/N`, and `X_pp − C₁`, `X_ii⁺ − 2C₁` and all
/// other `X` are traceless.
pub fn verify_traceless_decomposition(basis: &XBasis) -> VerificationReport {
    let mut report = ReportBuilder::new("traceless decomposition");
    let Some(dim) = basis_dim(basis) else {
        report.note("basis is empty or not N×N with odd N ≥ 3");
        report.position("shape", 0, 0, ExpSum::one(0));
        return report.finish();
    };
    let n = dim.n();
    let inv_n = Scalar::rational(int(1) / int(n as i64));
    let diag_plus = |i| XLabel::Ij {
        i,
        j: i,
        eps: Sign::Plus,
    };
    let mut sum = basis[&XLabel::Pp].clone();
    for i in dim.inner() {
        sum = &sum + &basis[&diag_plus(i)];
    }
    let c1 = sum.scale(&inv_n);
    report.compare("C₁ − I/N", &c1, &SparseMatrix::identity(n, 0).scale(&inv_n));
    for (l, x) in basis {
        let shifted = match *l {
            XLabel::Pp => x - &c1,
            XLabel::Ij {
                i,
                j,
                eps: Sign::Plus,
            } if i == j => x - &c1.scale(&Scalar::from_int(2)),
            _ => x.clone(),
        };
        let tr = shifted.trace();
        if !tr.is_zero() {
            report.position(&format!("trace of shifted {l}"), 0, 0, tr);
        }
    }
    report.finish()
}

/// A block `(a, b)` entering a combination with the given sign.
type SignedBlock = (Sign, (usize, usize));

/// Which blocks combine into each `X` and which exponent factors out.
///
/// For `L⁺`, `(L_ab + εL_āb̄)` is proportional to `(ba) + ε(b̄ā)`, so
/// `X_ij` comes from `L_ji`. The transfer matrix reads its coefficients from
/// the transposed slot, which swaps `m_pi ↔ m_ip` and `m_ij ↔ m_ji`.
fn factorization_rule(
    kind: OperatorKind,
    dim: OddDim,
    l: XLabel,
) -> (Vec<SignedBlock>, Option<MergedLabel>) {
    let p = dim.p();
    let b = |k| dim.bar(k);
    let plus = Sign::Plus;
    let pair = |eps, x: (usize, usize), y: (usize, usize)| vec![(plus, x), (eps, y)];
    let tilde = |i, j, eps| MergedLabel::TildeIj { i, j, eps };
    let lplus = kind == OperatorKind::Lplus;
    match l {
        XLabel::Pp => (vec![(plus, (p, p))], None),
        XLabel::Pi { i, eps } => (
            pair(eps, (i, p), (b(i), p)),
            Some(if lplus {
                MergedLabel::Ip { i, eps }
            } else {
                MergedLabel::Pi { i, eps }
            }),
        ),
        XLabel::Ip { i, eps } => (
            pair(eps, (p, i), (p, b(i))),
            Some(if lplus {
                MergedLabel::Pi { i, eps }
            } else {
                MergedLabel::Ip { i, eps }
            }),
        ),
        XLabel::Ij { i, j, eps } => (
            pair(eps, (j, i), (b(j), b(i))),
            Some(if lplus {
                tilde(j, i, eps)
            } else {
                tilde(i, j, eps)
            }),
        ),
        XLabel::JbarI { j, i, eps } => (
            pair(eps, (i, b(j)), (b(i), j)),
            Some(if lplus {
                tilde(i, j, eps)
            } else {
                tilde(j, i, eps)
            }),
        ),
    }
}

/// Two exact checks on a fundamental operator: each block combination
/// times `e^{−mθ}` is the constant `X`, and every nonzero entry of `M·L·M`
/// is a single exponential.
pub fn verify_theta_factorization(
    op: &OperatorMatrix,
    params: &ParamSet,
    m: &SparseMatrix,
) -> VerificationReport {
    let mut report = ReportBuilder::new(format!("θ-factorization of {}", op.kind()));
    let dim = op.dim();
    if op.sites() != 1 || params.dim() != dim {
        report.note("θ-factorization needs a fundamental operator matching the parameters");
        report.position("shape", 0, 0, ExpSum::one(0));
        return report.finish();
    }
    let arity = op.matrix().arity();
    let basis = build_x_basis(dim);
    for (l, x) in &basis {
        let (blocks, weight) = factorization_rule(op.kind(), dim, *l);
        let mut comb = SparseMatrix::zeros(dim.n(), dim.n(), arity);
        for (eps, (a, b)) in blocks {
            let block = extract_block(op, a, b).expect("in range");
            comb = &comb + &block.scale(&eps.scalar());
        }
        let exponent = weight
            .map(|w| -params.merged_weights()[&w].clone())
            .unwrap_or_else(|| int(0));
        let factored = match comb.scale_by(&ExpSum::exp(exponent)) {
            Ok(f) => f,
            Err(e) => {
                report.note(format!("{l}: {e}"));
                report.position(&l.to_string(), 0, 0, ExpSum::one(0));
                continue;
            }
        };
        let want = x.with_arity(arity).expect("constant lifts");
        report.compare(&format!("e^(−mθ)·blocks − {l}"), &factored, &want);
    }
    match conjugate(m, op.matrix()) {
        Ok(c) => {
            for (i, j, v) in c.entries() {
                if !v.is_monomial() {
                    report.position("M·L·M entry is not a single exponential", i, j, v.clone());
                }
            }
        }
        Err(e) => {
            report.note(format!("conjugation failed: {e}"));
            report.position("conjugation", 0, 0, ExpSum::one(0));
        }
    }
    report.finish()
}

/// `(ΔL)_ab = Σ_c A_ac ⊗ B_cb`, the operator on the combined quantum sites.
pub fn coproduct(a: &OperatorMatrix, b: &OperatorMatrix) -> Result<OperatorMatrix> {
    if a.kind() != b.kind() || a.dim() != b.dim() {
        return Err(Error::OperatorMismatch(format!(
            "cannot combine {} (N = {}) with {} (N = {})",
            a.kind(),
            a.dim(),
            b.kind(),
            b.dim()
        )));
    }
    if a.matrix().arity() != b.matrix().arity() {
        return Err(Error::ArityMismatch {
            left: a.matrix().arity(),
            right: b.matrix().arity(),
        });
    }
    let n = a.dim().n();
    let sites = a.sites() + b.sites();
    let (wa, wb) = (a.quantum_dim(), b.quantum_dim());
    let w = quantum_size(a.dim(), sites)?;
    // B entries grouped by auxiliary row index c.
    let mut b_rows: Vec<Vec<(usize, usize, usize, &ExpSum)>> = vec![Vec::new(); n];
    for (row, col, v) in b.matrix().entries() {
        b_rows[row / wb].push((row % wb, col / wb, col % wb, v));
    }
    let mut out = SparseMatrix::zeros(n * w, n * w, a.matrix().arity());
    for (row, col, va) in a.matrix().entries() {
        let (aa, x) = (row / wa, row % wa);
        let (c, y) = (col / wa, col % wa);
        for &(u, bb, v, vb) in &b_rows[c] {
            let r = aa * w + x * wb + u;
            let s = bb * w + y * wb + v;
            out.add_at(r, s, &(va * vb))?;
        }
    }
    OperatorMatrix::new(a.kind(), a.dim(), sites, out)
}

/// `L` acting on auxiliary slot 1 and the quantum space of
/// `aux₁ ⊗ aux₂ ⊗ quantum`, identity on `aux₂`.
fn embed_first(l: &SparseMatrix, n: usize, w: usize) -> SparseMatrix {
    let size = n * n * w;
    let mut out = SparseMatrix::zeros(size, size, l.arity());
    for (row, col, v) in l.entries() {
        let (a, e) = (row / w, row % w);
        let (b, f) = (col / w, col % w);
        for c in 0..n {
            out.set((a * n + c) * w + e, (b * n + c) * w + f, v.clone())
                .expect("in range");
        }
    }
    out
}

/// Both sides of `R(θ−θ′)·L₂(θ)·L₁(θ′) = L₂(θ′)·L₁(θ)·R(θ−θ′)` on
/// `aux₁ ⊗ aux₂ ⊗ quantum`, with `R` acting on the auxiliary pair.
fn exchange_sides(r: &SparseMatrix, l: &OperatorMatrix) -> Result<(SparseMatrix, SparseMatrix)> {
    let n = l.dim().n();
    let w = l.quantum_dim();
    if r.rows() != n * n || r.arity() != 1 || l.matrix().arity() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "exchange relation needs an arity-1 {0}×{0} R and an arity-1 operator",
            n * n
        )));
    }
    let lift = |m: &SparseMatrix, c: &[i64]| m.lift(&ExponentMap::linear(c).expect("1→2 map"));
    let rd = lift(r, &[1, -1])?.kron(&SparseMatrix::identity(w, 2))?;
    let (l_t, l_tp) = (lift(l.matrix(), &[1, 0])?, lift(l.matrix(), &[0, 1])?);
    let id_n = SparseMatrix::identity(n, 2);
    let second = |m: &SparseMatrix| id_n.kron(m);
    let lhs = &(&rd * &second(&l_t)?) * &embed_first(&l_tp, n, w);
    let rhs = &(&second(&l_tp)? * &embed_first(&l_t, n, w)) * &rd;
    Ok((lhs, rhs))
}

fn exchange_report(name: &str, r: &SparseMatrix, l: &OperatorMatrix) -> VerificationReport {
    let mut report = ReportBuilder::new(name);
    match exchange_sides(r, l) {
        Ok((lhs, rhs)) => {
            report.compare("R(θ−θ′)L₂(θ)L₁(θ′) − L₂(θ′)L₁(θ)R(θ−θ′)", &lhs, &rhs);
            report.note(format!(
                "{} sites, {}×{} residual space",
                l.sites(),
                lhs.rows(),
                lhs.cols()
            ));
        }
        Err(e) => {
            report.note(e.to_string());
            report.position("shape", 0, 0, ExpSum::one(0));
        }
    }
    report.finish()
}

/// The RLL relation `R̂(θ−θ′)L₂(θ)L₁(θ′) = L₂(θ′)L₁(θ)R̂(θ−θ′)`.
pub fn verify_rll(r: &BraidMatrix, l: &OperatorMatrix) -> VerificationReport {
    if r.dim() != l.dim() {
        let mut report = ReportBuilder::new("RLL relation");
        report.note("braid matrix and operator have different N");
        report.position("shape", 0, 0, ExpSum::one(0));
        return report.finish();
    }
    exchange_report("RLL relation", r.matrix(), l)
}

/// The transfer-matrix exchange relation, i.e. RLL with `R̂₂₁ = P·R̂·P`.
pub fn verify_transfer_exchange(r: &BraidMatrix, t: &OperatorMatrix) -> VerificationReport {
    if r.dim() != t.dim() {
        let mut report = ReportBuilder::new("transfer exchange");
        report.note("braid matrix and operator have different N");
        report.position("shape", 0, 0, ExpSum::one(0));
        return report.finish();
    }
    let p = flip_at(r.dim().n(), r.matrix().arity());
    let r21 = &(&p * r.matrix()) * &p;
    exchange_report("transfer exchange", &r21, t)
}

/// With `L⁻ = L⁺ = R̂P`, `(R̂⁻¹L⁻P) ⊗ I = I ⊗ (L⁻PR̂⁻¹)` and both sides are
/// `I ⊗ I`.
pub fn verify_lminus_degeneracy(r: &BraidMatrix) -> VerificationReport {
    verify_lminus_degeneracy_with(r, build_lplus(r).matrix())
}

/// The same check for an arbitrary candidate `L⁻`.
pub fn verify_lminus_degeneracy_with(r: &BraidMatrix, lminus: &SparseMatrix) -> VerificationReport {
    let mut report = ReportBuilder::new("L⁻ degeneracy");
    let m = r.matrix();
    if m.arity() != 1 || lminus.arity() != 1 || lminus.rows() != m.rows() || !lminus.is_square() {
        report.note("L⁻ must be an arity-1 matrix of the same size as R̂");
        report.position("shape", 0, 0, ExpSum::one(0));
        return report.finish();
    }
    let n = r.dim().n();
    let inv = m
        .lift(&ExponentMap::linear(&[-1]).expect("1→1 map"))
        .expect("arity 1");
    let lp = lminus * &flip_at(n, 1);
    let id = SparseMatrix::identity(n, 1);
    let lhs = (&inv * &lp).kron(&id).expect("same arity");
    let rhs = id.kron(&(&lp * &inv)).expect("same arity");
    let unit = SparseMatrix::identity(n * n * n, 1);
    report.compare("(R̂⁻¹L⁻P)⊗I − I⊗I", &lhs, &unit);
    report.compare("I⊗(L⁻PR̂⁻¹) − I⊗I", &rhs, &unit);
    report.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::rat;
    use crate::braid::{
        build_braid, build_braid_custom, mismatched_pair_coefficients, random_params,
    };
    use crate::projectors::build_diagonalizer;

    fn dim(n: usize) -> OddDim {
        OddDim::new(n).unwrap()
    }

    fn generic(n: usize) -> BraidMatrix {
        build_braid(&random_params(dim(n), 7, true).unwrap())
    }

    #[test]
    fn lplus_and_transfer_relations() {
        for n in [3, 5] {
            let r = generic(n);
            let (l, t) = (build_lplus(&r), build_transfer(&r));
            assert!(verify_block_law(&r, &l).pass);
            assert!(verify_flip_duality(&l, &t).pass);
            assert!(verify_unit_value(&l).pass);
            assert!(verify_unit_value(&t).pass);
        }
    }

    #[test]
    fn lplus_n3_layout_swaps_b_and_c_against_transfer() {
        let r = generic(3);
        let (l, t) = (build_lplus(&r), build_transfer(&r));
        let rm = r.matrix();
        // L⁺ row 1 carries b± at columns 3 and 5; t row 1 carries c± there.
        assert_eq!(l.matrix().entry(1, 3), rm.entry(1, 1));
        assert_eq!(l.matrix().entry(1, 5), rm.entry(1, 7));
        assert_eq!(t.matrix().entry(1, 3), rm.entry(3, 3));
        assert_eq!(t.matrix().entry(1, 5), rm.entry(3, 5));
        assert_eq!(l.matrix().nnz(), 17);
    }

    #[test]
    fn centre_block_is_pp() {
        let l = build_lplus(&generic(3));
        let b = extract_block(&l, 2, 2).unwrap();
        assert_eq!(b, SparseMatrix::unit(3, 1, 1).with_arity(1).unwrap());
        assert!(extract_block(&l, 0, 1).is_err());
        assert!(extract_block(&l, 1, 4).is_err());
    }

    #[test]
    fn identity_operator_blocks() {
        let op = OperatorMatrix::new(OperatorKind::Lplus, dim(3), 1, SparseMatrix::identity(9, 1))
            .unwrap();
        for a in 1..=3 {
            for b in 1..=3 {
                let block = extract_block(&op, a, b).unwrap();
                assert_eq!(block.is_identity(), a == b);
                assert_eq!(block.is_zero(), a != b);
            }
        }
    }

    #[test]
    fn x_basis_shape() {
        for n in [3, 5, 7] {
            let basis = build_x_basis(dim(n));
            assert_eq!(basis.len(), n * n);
            for (l, x) in &basis {
                assert_eq!(x.nnz(), if *l == XLabel::Pp { 1 } else { 2 });
            }
        }
        let basis = build_x_basis(dim(3));
        assert_eq!(basis[&XLabel::Pp], SparseMatrix::unit(3, 1, 1));
        let pi = &basis[&XLabel::Pi {
            i: 1,
            eps: Sign::Plus,
        }];
        let support: Vec<_> = pi.entries().map(|(i, j, _)| (i, j)).collect();
        assert_eq!(support, vec![(1, 0), (1, 2)]);
    }

    #[test]
    fn x_label_strings() {
        for l in XLabel::all(dim(5)) {
            assert_eq!(l.to_string().parse::<XLabel>().unwrap(), l);
        }
        assert_eq!(
            XLabel::JbarI {
                j: 2,
                i: 1,
                eps: Sign::Minus
            }
            .to_string(),
            "X_jbar_i(2,1,-)"
        );
    }

    #[test]
    fn listed_products() {
        let basis = build_x_basis(dim(5));
        let (p, m) = (Sign::Plus, Sign::Minus);
        let x = |l: XLabel| basis[&l].clone();
        assert_eq!(&x(XLabel::Pp) * &x(XLabel::Pp), x(XLabel::Pp));
        assert!((&x(XLabel::Pi { i: 1, eps: p }) * &x(XLabel::Ip { i: 1, eps: m })).is_zero());
        assert_eq!(
            &x(XLabel::Ij { i: 1, j: 2, eps: p }) * &x(XLabel::Ij { i: 2, j: 1, eps: m }),
            x(XLabel::Ij { i: 1, j: 1, eps: m })
        );
    }

    #[test]
    fn x_algebra_and_closure() {
        for n in [3, 5] {
            let basis = build_x_basis(dim(n));
            let r = verify_x_algebra(&basis);
            assert!(r.pass, "{r}");
            assert!(verify_x_closure(&basis).pass);
            assert!(verify_traceless_decomposition(&basis).pass);
        }
    }

    #[test]
    fn x_algebra_reports_a_broken_generator() {
        let mut basis = build_x_basis(dim(3));
        let l = XLabel::Ij {
            i: 1,
            j: 1,
            eps: Sign::Minus,
        };
        basis.insert(l, basis[&l].scale(&Scalar::from_int(2)));
        let r = verify_x_algebra(&basis);
        assert!(!r.pass);
        assert!(r
            .residual_sample
            .iter()
            .any(|s| s.context.contains("X_ij(1,1,-)")));
    }

    #[test]
    fn n3_identity_from_x() {
        let basis = build_x_basis(dim(3));
        let sum = &basis[&XLabel::Pp]
            + &basis[&XLabel::Ij {
                i: 1,
                j: 1,
                eps: Sign::Plus,
            }];
        assert!(sum.is_identity());
    }

    #[test]
    fn coordinates_round_trip() {
        let d = dim(5);
        let basis = build_x_basis(d);
        let m = SparseMatrix::from_scalars(
            5,
            5,
            [
                (0, 4, Scalar::from_int(3)),
                (3, 2, Scalar::from_ratio(1, 2)),
            ],
        )
        .unwrap();
        let coords = x_coordinates(d, &m).unwrap();
        let terms: Vec<_> = coords.iter().map(|(l, c)| (c.clone(), *l)).collect();
        assert_eq!(combine(&basis, &terms, 5).unwrap(), m);
    }

    #[test]
    fn theta_factorization_for_both_operators() {
        for n in [3, 5, 7] {
            let params = random_params(dim(n), 11, true).unwrap();
            let r = build_braid(&params);
            let m = build_diagonalizer(dim(n));
            let rep = verify_theta_factorization(&build_lplus(&r), &params, &m);
            assert!(rep.pass, "{rep}");
            let rep = verify_theta_factorization(&build_transfer(&r), &params, &m);
            assert!(rep.pass, "{rep}");
        }
    }

    #[test]
    fn theta_factorization_flags_a_corrupted_entry() {
        let params = random_params(dim(3), 1, true).unwrap();
        let l = build_lplus(&build_braid(&params));
        let mut bad = l.matrix().clone();
        bad.add_at(0, 0, &ExpSum::exp(rat(1, 1))).unwrap();
        let rep = verify_theta_factorization(
            &l.with_matrix(bad).unwrap(),
            &params,
            &build_diagonalizer(dim(3)),
        );
        assert!(!rep.pass);
        assert!(rep
            .residual_sample
            .iter()
            .any(|s| s.context.contains("single exponential")));
    }

    #[test]
    fn ij_combination_lands_on_the_transposed_generator() {
        let params = random_params(dim(5), 3, true).unwrap();
        let l = build_lplus(&build_braid(&params));
        let eps = Sign::Minus;
        // L_12 + εL_{1̄2̄} with 1̄ = 5, 2̄ = 4.
        let comb = &extract_block(&l, 1, 2).unwrap() - &extract_block(&l, 5, 4).unwrap();
        let m = params.m_ij(1, 2, eps).unwrap().clone();
        let factored = comb.scale_by(&ExpSum::exp(-m)).unwrap();
        let basis = build_x_basis(dim(5));
        let x21 = basis[&XLabel::Ij { i: 2, j: 1, eps }]
            .with_arity(1)
            .unwrap();
        let x12 = basis[&XLabel::Ij { i: 1, j: 2, eps }]
            .with_arity(1)
            .unwrap();
        assert_eq!(factored, x21);
        assert_ne!(factored, x12);
    }

    #[test]
    fn coproduct_shape_and_origin() {
        let l = build_lplus(&generic(3));
        let d = coproduct(&l, &l).unwrap();
        assert_eq!((d.sites(), d.matrix().rows()), (2, 27));
        assert_eq!(d.quantum_dim(), 9);
        // At θ = 0 every block is a product of flips: a permutation matrix.
        let origin = d.matrix().at_origin();
        assert_eq!(origin.nnz(), 27);
        assert!((&origin * &origin.transpose()).is_identity());
        let t = build_transfer(&generic(3));
        assert!(coproduct(&l, &t).is_err());
    }

    #[test]
    fn rll_and_exchange() {
        for n in [3, 5] {
            let r = generic(n);
            assert!(verify_rll(&r, &build_lplus(&r)).pass);
            assert!(verify_transfer_exchange(&r, &build_transfer(&r)).pass);
        }
        let r = generic(3);
        let l = build_lplus(&r);
        assert!(verify_rll(&r, &coproduct(&l, &l).unwrap()).pass);
        let t = build_transfer(&r);
        assert!(verify_transfer_exchange(&r, &coproduct(&t, &t).unwrap()).pass);
    }

    #[test]
    fn rll_detects_corruption_and_broken_braids() {
        let r = generic(3);
        let l = build_lplus(&r);
        let mut bad = l.matrix().clone();
        bad.add_at(1, 3, &ExpSum::exp(int(1))).unwrap();
        assert!(!verify_rll(&r, &l.with_matrix(bad).unwrap()).pass);

        let params = random_params(dim(3), 7, true).unwrap();
        let broken = build_braid_custom(&mismatched_pair_coefficients(&params));
        assert!(!verify_transfer_exchange(&broken, &build_transfer(&broken)).pass);
    }

    #[test]
    fn lminus() {
        let r = generic(3);
        assert!(verify_lminus_degeneracy(&r).pass);
        let doubled = r
            .matrix()
            .lift(&ExponentMap::linear(&[2]).unwrap())
            .unwrap();
        let lminus = &doubled * &flip_at(3, 1);
        assert!(!verify_lminus_degeneracy_with(&r, &lminus).pass);
    }
}
