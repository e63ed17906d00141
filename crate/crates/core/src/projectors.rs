//! The nested projector basis for odd `N`, its merged refinement, and the
//! involutive diagonalizer `M`.
//!
//! Indices follow the 1-based convention `1..=N` with `N = 2p − 1` and the
//! bar involution `ī = N − i + 1`, so `p̄ = p`. The matrix unit `(ab)⊗(cd)` is
//! stored at row `(a−1)N + (c−1)`, column `(b−1)N + (d−1)`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_traits::One;
use rayon::prelude::*;

use crate::algebra::{ExpSum, ExponentMap, Scalar, SparseMatrix};
use crate::error::{Error, Result};
use crate::report::{ReportBuilder, VerificationReport};

/// An odd dimension `N ≥ 3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OddDim(usize);

impl OddDim {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 || n.is_multiple_of(2) {
            return Err(Error::InvalidDimension(n));
        }
        Ok(OddDim(n))
    }

    /// Recovers `N` from an `N² × N²` matrix size.
    pub fn from_square_size(size: usize) -> Result<Self> {
        let n = (size as f64).sqrt().round() as usize;
        if n * n != size {
            return Err(Error::DimensionMismatch(format!(
                "{size} is not a perfect square"
            )));
        }
        Self::new(n)
    }

    pub fn n(self) -> usize {
        self.0
    }

    /// The middle index `p = (N + 1)/2`.
    pub fn p(self) -> usize {
        self.0.div_ceil(2)
    }

    pub fn bar(self, i: usize) -> usize {
        self.0 + 1 - i
    }

    /// The unbarred indices `1..p`.
    pub fn inner(self) -> std::ops::Range<usize> {
        1..self.p()
    }

    /// Composite 0-based index of the 1-based pair `(a, c)`.
    pub fn index(self, a: usize, c: usize) -> usize {
        (a - 1) * self.0 + (c - 1)
    }

    /// Side length `N²` of the two-site space.
    pub fn size(self) -> usize {
        self.0 * self.0
    }

    /// `(N + 3)(N − 1)/2`, the number of free exponents.
    pub fn parameter_count(self) -> usize {
        (self.0 + 3) * (self.0 - 1) / 2
    }

    /// `2N² − 1`, the number of nonzero entries of a generic braid matrix.
    pub fn braid_nonzeros(self) -> usize {
        2 * self.0 * self.0 - 1
    }
}

impl fmt::Display for OddDim {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The sign label `ε = ±1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub const BOTH: [Sign; 2] = [Sign::Plus, Sign::Minus];

    pub fn value(self) -> i64 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    pub fn scalar(self) -> Scalar {
        Scalar::from_int(self.value())
    }

    pub fn symbol(self) -> char {
        match self {
            Sign::Plus => '+',
            Sign::Minus => '-',
        }
    }

    pub fn parse(s: &str) -> Result<Sign> {
        match s.trim() {
            "+" | "+1" => Ok(Sign::Plus),
            "-" | "-1" => Ok(Sign::Minus),
            other => Err(Error::parse(
                "eps",
                format!("expected \"+\" or \"-\", got {other:?}"),
            )),
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

/// Labels of the `N²` nested projectors.
///
/// The derived ordering is the canonical iteration order: `PP`, then `PI`,
/// `IP`, `IJ`, `IJbar`, each lexicographic in `(i, j, ε)` with `+` first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ProjectorLabel {
    Pp,
    Pi { i: usize, eps: Sign },
    Ip { i: usize, eps: Sign },
    Ij { i: usize, j: usize, eps: Sign },
    IjBar { i: usize, j: usize, eps: Sign },
}

/// Labels of the `2p² − 1` merged projectors, where `IJ` and `IJbar` are
/// fused into `TildeIj`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MergedLabel {
    Pp,
    Pi { i: usize, eps: Sign },
    Ip { i: usize, eps: Sign },
    TildeIj { i: usize, j: usize, eps: Sign },
}

impl ProjectorLabel {
    pub fn all(dim: OddDim) -> Vec<ProjectorLabel> {
        let mut out = vec![ProjectorLabel::Pp];
        for i in dim.inner() {
            for eps in Sign::BOTH {
                out.push(ProjectorLabel::Pi { i, eps });
            }
        }
        for i in dim.inner() {
            for eps in Sign::BOTH {
                out.push(ProjectorLabel::Ip { i, eps });
            }
        }
        for i in dim.inner() {
            for j in dim.inner() {
                for eps in Sign::BOTH {
                    out.push(ProjectorLabel::Ij { i, j, eps });
                }
            }
        }
        for i in dim.inner() {
            for j in dim.inner() {
                for eps in Sign::BOTH {
                    out.push(ProjectorLabel::IjBar { i, j, eps });
                }
            }
        }
        out
    }

    pub fn merged(self) -> MergedLabel {
        match self {
            ProjectorLabel::Pp => MergedLabel::Pp,
            ProjectorLabel::Pi { i, eps } => MergedLabel::Pi { i, eps },
            ProjectorLabel::Ip { i, eps } => MergedLabel::Ip { i, eps },
            ProjectorLabel::Ij { i, j, eps } | ProjectorLabel::IjBar { i, j, eps } => {
                MergedLabel::TildeIj { i, j, eps }
            }
        }
    }

    fn check(self, dim: OddDim) -> Result<Self> {
        let ok = |k: usize| (1..dim.p()).contains(&k);
        let valid = match self {
            ProjectorLabel::Pp => true,
            ProjectorLabel::Pi { i, .. } | ProjectorLabel::Ip { i, .. } => ok(i),
            ProjectorLabel::Ij { i, j, .. } | ProjectorLabel::IjBar { i, j, .. } => ok(i) && ok(j),
        };
        if valid {
            Ok(self)
        } else {
            Err(Error::IndexOutOfRange(format!("{self} for N = {dim}")))
        }
    }

    /// Parses a canonical label string and checks it against `dim`.
    pub fn parse_for(s: &str, dim: OddDim) -> Result<Self> {
        s.parse::<ProjectorLabel>()?.check(dim)
    }

    /// The diagonal position `(a, c)` (1-based) that `M·P·M` occupies.
    pub fn diagonal_site(self, dim: OddDim) -> (usize, usize) {
        let p = dim.p();
        let pick = |k: usize, eps: Sign| match eps {
            Sign::Plus => k,
            Sign::Minus => dim.bar(k),
        };
        match self {
            ProjectorLabel::Pp => (p, p),
            ProjectorLabel::Pi { i, eps } => (p, pick(i, eps)),
            ProjectorLabel::Ip { i, eps } => (pick(i, eps), p),
            ProjectorLabel::Ij { i, j, eps } => (pick(i, eps), pick(j, eps)),
            ProjectorLabel::IjBar { i, j, eps } => match eps {
                Sign::Plus => (i, dim.bar(j)),
                Sign::Minus => (dim.bar(i), j),
            },
        }
    }
}

impl MergedLabel {
    pub fn all(dim: OddDim) -> Vec<MergedLabel> {
        let set: BTreeSet<MergedLabel> = ProjectorLabel::all(dim)
            .into_iter()
            .map(ProjectorLabel::merged)
            .collect();
        set.into_iter().collect()
    }

    /// The unmerged labels this one is the sum of.
    pub fn constituents(self) -> Vec<ProjectorLabel> {
        match self {
            MergedLabel::Pp => vec![ProjectorLabel::Pp],
            MergedLabel::Pi { i, eps } => vec![ProjectorLabel::Pi { i, eps }],
            MergedLabel::Ip { i, eps } => vec![ProjectorLabel::Ip { i, eps }],
            MergedLabel::TildeIj { i, j, eps } => vec![
                ProjectorLabel::Ij { i, j, eps },
                ProjectorLabel::IjBar { i, j, eps },
            ],
        }
    }
}

impl fmt::Display for ProjectorLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ProjectorLabel::Pp => write!(f, "PP"),
            ProjectorLabel::Pi { i, eps } => write!(f, "PI({i},{})", eps.symbol()),
            ProjectorLabel::Ip { i, eps } => write!(f, "IP({i},{})", eps.symbol()),
            ProjectorLabel::Ij { i, j, eps } => write!(f, "IJ({i},{j},{})", eps.symbol()),
            ProjectorLabel::IjBar { i, j, eps } => write!(f, "IJbar({i},{j},{})", eps.symbol()),
        }
    }
}

impl fmt::Display for MergedLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            MergedLabel::Pp => write!(f, "PP"),
            MergedLabel::Pi { i, eps } => write!(f, "PI({i},{})", eps.symbol()),
            MergedLabel::Ip { i, eps } => write!(f, "IP({i},{})", eps.symbol()),
            MergedLabel::TildeIj { i, j, eps } => write!(f, "TildeIJ({i},{j},{})", eps.symbol()),
        }
    }
}

/// Splits `"NAME(a,b,±)"` into the name and its arguments.
pub(crate) fn split_label(s: &str) -> Result<(&str, Vec<&str>)> {
    let s = s.trim();
    match s.find('(') {
        None => Ok((s, Vec::new())),
        Some(open) => {
            let inner = s[open + 1..]
                .strip_suffix(')')
                .ok_or_else(|| Error::parse("label", format!("unbalanced parentheses in {s:?}")))?;
            Ok((&s[..open], inner.split(',').map(str::trim).collect()))
        }
    }
}

pub(crate) fn parse_index(s: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::parse("label", format!("invalid index {s:?}")))
}

impl FromStr for ProjectorLabel {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let (name, args) = split_label(s)?;
        let label = match (name, args.as_slice()) {
            ("PP", []) => ProjectorLabel::Pp,
            ("PI", [i, e]) => ProjectorLabel::Pi {
                i: parse_index(i)?,
                eps: Sign::parse(e)?,
            },
            ("IP", [i, e]) => ProjectorLabel::Ip {
                i: parse_index(i)?,
                eps: Sign::parse(e)?,
            },
            ("IJ", [i, j, e]) => ProjectorLabel::Ij {
                i: parse_index(i)?,
                j: parse_index(j)?,
                eps: Sign::parse(e)?,
            },
            ("IJbar", [i, j, e]) => ProjectorLabel::IjBar {
                i: parse_index(i)?,
                j: parse_index(j)?,
                eps: Sign::parse(e)?,
            },
            _ => {
                return Err(Error::parse(
                    "label",
                    format!("unknown projector label {s:?}"),
                ))
            }
        };
        Ok(label)
    }
}

/// A labelled family of projectors.
pub type Basis<L> = BTreeMap<L, SparseMatrix>;

/// Accumulates `c·(ab)⊗(cd)` into an `N²×N²` constant matrix.
struct UnitWriter {
    dim: OddDim,
    m: SparseMatrix,
}

impl UnitWriter {
    fn new(dim: OddDim) -> Self {
        UnitWriter {
            dim,
            m: SparseMatrix::zeros(dim.size(), dim.size(), 0),
        }
    }

    fn put(&mut self, c: &Scalar, (a, b): (usize, usize), (cc, d): (usize, usize)) {
        let (row, col) = (self.dim.index(a, cc), self.dim.index(b, d));
        self.m
            .add_at(row, col, &ExpSum::constant(0, c.clone()))
            .expect("indices are in range by construction");
    }

    fn finish(self) -> SparseMatrix {
        self.m
    }
}

fn projector(dim: OddDim, label: ProjectorLabel) -> SparseMatrix {
    let p = dim.p();
    let half = Scalar::from_ratio(1, 2);
    let mut w = UnitWriter::new(dim);
    match label {
        ProjectorLabel::Pp => w.put(&Scalar::one(), (p, p), (p, p)),
        ProjectorLabel::Pi { i, eps } => {
            let (ib, he) = (dim.bar(i), &half * &eps.scalar());
            w.put(&half, (p, p), (i, i));
            w.put(&half, (p, p), (ib, ib));
            w.put(&he, (p, p), (i, ib));
            w.put(&he, (p, p), (ib, i));
        }
        ProjectorLabel::Ip { i, eps } => {
            let (ib, he) = (dim.bar(i), &half * &eps.scalar());
            w.put(&half, (i, i), (p, p));
            w.put(&half, (ib, ib), (p, p));
            w.put(&he, (i, ib), (p, p));
            w.put(&he, (ib, i), (p, p));
        }
        ProjectorLabel::Ij { i, j, eps } => {
            let (ib, jb, he) = (dim.bar(i), dim.bar(j), &half * &eps.scalar());
            w.put(&half, (i, i), (j, j));
            w.put(&half, (ib, ib), (jb, jb));
            w.put(&he, (i, ib), (j, jb));
            w.put(&he, (ib, i), (jb, j));
        }
        ProjectorLabel::IjBar { i, j, eps } => {
            let (ib, jb, he) = (dim.bar(i), dim.bar(j), &half * &eps.scalar());
            w.put(&half, (i, i), (jb, jb));
            w.put(&half, (ib, ib), (j, j));
            w.put(&he, (i, ib), (jb, j));
            w.put(&he, (ib, i), (j, jb));
        }
    }
    w.finish()
}

/// The `N²` nested projectors, each an `N²×N²` constant matrix with entries
/// in `{0, ±½, 1}`.
pub fn build_projectors(dim: OddDim) -> Basis<ProjectorLabel> {
    ProjectorLabel::all(dim)
        .into_iter()
        .map(|l| (l, projector(dim, l)))
        .collect()
}

/// The `2p² − 1` merged projectors.
pub fn build_merged_basis(dim: OddDim) -> Basis<MergedLabel> {
    MergedLabel::all(dim)
        .into_iter()
        .map(|l| {
            let m = l
                .constituents()
                .into_iter()
                .map(|c| projector(dim, c))
                .reduce(|a, b| &a + &b)
                .expect("every merged label has a constituent");
            (l, m)
        })
        .collect()
}

/// Checks `P_α P_β = δ_αβ P_α` for every ordered pair and `Σ P_α = I`.
pub fn verify_projector_axioms<L>(basis: &Basis<L>) -> VerificationReport
where
    L: Ord + fmt::Display + Sync,
{
    let mut report = ReportBuilder::new("projector axioms");
    let Some(first) = basis.values().next() else {
        report.note("empty basis");
        return report.finish();
    };
    let (size, arity) = (first.rows(), first.arity());
    if basis
        .values()
        .any(|m| !m.is_square() || m.rows() != size || m.arity() != arity)
    {
        report.note("projectors differ in shape or arity");
        // Mark the whole basis as failing without attempting products.
        report.position("shape", 0, 0, ExpSum::one(0));
        return report.finish();
    }

    let entries: Vec<(&L, &SparseMatrix)> = basis.iter().collect();
    let residuals: Vec<(String, SparseMatrix)> = entries
        .par_iter()
        .flat_map_iter(|&(la, pa)| {
            entries.iter().filter_map(move |&(lb, pb)| {
                let prod = pa * pb;
                let residual = if la == lb { &prod - pa } else { prod };
                (!residual.is_zero()).then(|| (format!("P[{la}]·P[{lb}]"), residual))
            })
        })
        .collect();
    for (ctx, r) in &residuals {
        report.residual(ctx, r);
    }

    let sum = basis
        .values()
        .fold(SparseMatrix::zeros(size, size, arity), |acc, m| &acc + m);
    report.compare("ΣP − I", &sum, &SparseMatrix::identity(size, arity));
    report.note(format!(
        "{} projectors, {} ordered products",
        basis.len(),
        basis.len() * basis.len()
    ));
    report.finish()
}

/// The involutive diagonalizer `M = M⁻¹`: off-centre blocks carry `±1/√2`,
/// the centre entry is `1`.
pub fn build_diagonalizer(dim: OddDim) -> SparseMatrix {
    let p = dim.p();
    let r = Scalar::inv_sqrt2();
    let neg = -&r;
    let mut w = UnitWriter::new(dim);
    w.put(&Scalar::one(), (p, p), (p, p));
    for i in dim.inner() {
        let ib = dim.bar(i);
        // (pp)⊗((ii) − (īī) + (iī) + (īi)) and the mirrored factor order.
        for (c, (a, b)) in [(&r, (i, i)), (&neg, (ib, ib)), (&r, (i, ib)), (&r, (ib, i))] {
            w.put(c, (p, p), (a, b));
            w.put(c, (a, b), (p, p));
        }
        for j in dim.inner() {
            let jb = dim.bar(j);
            // ((ii) − (īī))⊗((jj) + (j̄j̄))
            for (c, left) in [(&r, (i, i)), (&neg, (ib, ib))] {
                for right in [(j, j), (jb, jb)] {
                    w.put(c, left, right);
                }
            }
            // ((iī) + (īi))⊗((jj̄) + (j̄j))
            for left in [(i, ib), (ib, i)] {
                for right in [(j, jb), (jb, j)] {
                    w.put(&r, left, right);
                }
            }
        }
    }
    w.finish()
}

/// The flip `P` on `V⊗V`, sending `a⊗c` to `c⊗a`.
pub fn build_flip(n: usize) -> Result<SparseMatrix> {
    if n < 2 {
        return Err(Error::DimensionMismatch(format!(
            "flip needs N ≥ 2, got {n}"
        )));
    }
    SparseMatrix::from_scalars(
        n * n,
        n * n,
        (0..n).flat_map(|a| (0..n).map(move |c| (a * n + c, c * n + a, Scalar::one()))),
    )
}

/// `M·A·M`, with the constant `M` embedded at the arity of `A`.
pub fn conjugate(m: &SparseMatrix, a: &SparseMatrix) -> Result<SparseMatrix> {
    if !m.is_square() || !a.is_square() || m.rows() != a.rows() {
        return Err(Error::DimensionMismatch(format!(
            "conjugating a {}×{} matrix by a {}×{} matrix",
            a.rows(),
            a.cols(),
            m.rows(),
            m.cols()
        )));
    }
    let m = m.with_arity(a.arity())?;
    m.try_mul(a)?.try_mul(&m)
}

/// A diagonal entry of `M·R·M` tagged with the projector that produced it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpectralEntry {
    pub position: usize,
    pub label: ProjectorLabel,
    pub value: ExpSum,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spectrum {
    pub entries: Vec<SpectralEntry>,
}

impl Spectrum {
    /// Diagonal values in storage order.
    pub fn values(&self) -> Vec<ExpSum> {
        self.entries.iter().map(|e| e.value.clone()).collect()
    }

    pub fn distinct(&self) -> BTreeSet<ExpSum> {
        self.entries.iter().map(|e| e.value.clone()).collect()
    }

    /// Degree of the minimal polynomial, i.e. the number of distinct
    /// eigenvalues.
    pub fn minimal_polynomial_degree(&self) -> usize {
        self.distinct().len()
    }
}

/// Diagonalizes `r` with `m` and pairs every diagonal slot with its label.
///
/// Fails with [`Error::NotDiagonal`] if `M·R·M` has off-diagonal residue.
pub fn spectrum(r: &SparseMatrix, m: &SparseMatrix) -> Result<Spectrum> {
    let dim = OddDim::from_square_size(r.rows())?;
    let d = conjugate(m, r)?;
    if !d.is_diagonal() {
        let mut report = ReportBuilder::new("M·R·M diagonal");
        for (i, j, v) in d.entries().filter(|(i, j, _)| i != j) {
            report.position("off-diagonal", i, j, v.clone());
        }
        return Err(Error::NotDiagonal(Box::new(report.finish())));
    }
    let mut labels: BTreeMap<usize, ProjectorLabel> = BTreeMap::new();
    for l in ProjectorLabel::all(dim) {
        let (a, c) = l.diagonal_site(dim);
        labels.insert(dim.index(a, c), l);
    }
    let entries = d
        .diagonal()
        .into_iter()
        .enumerate()
        .map(|(position, value)| SpectralEntry {
            position,
            label: labels[&position],
            value,
        })
        .collect();
    Ok(Spectrum { entries })
}

/// Checks the diagonal braid law `d(θ)·d(θ′) = d(θ + θ′)` for every entry.
pub fn verify_diagonal_braid(diagonal: &[ExpSum], dim: OddDim) -> VerificationReport {
    let mut report = ReportBuilder::new("diagonal braid law");
    if diagonal.len() != dim.size() {
        report.note(format!(
            "expected {} diagonal entries, found {}",
            dim.size(),
            diagonal.len()
        ));
        report.position("length", 0, 0, ExpSum::one(0));
        return report.finish();
    }
    let maps = [[1, 0], [0, 1], [1, 1]].map(|c| ExponentMap::linear(&c).expect("valid map"));
    for (k, d) in diagonal.iter().enumerate() {
        if d.arity() != 1 {
            report.note(format!("entry {k} has arity {}, expected 1", d.arity()));
            report.position("arity", k, k, d.clone());
            continue;
        }
        let lift = |m: &ExponentMap| d.lift(m).expect("arity checked");
        let residual = &(&lift(&maps[0]) * &lift(&maps[1])) - &lift(&maps[2]);
        if !residual.is_zero() {
            if !d.is_monomial() {
                report.note(format!("entry {k} is not a single exponential: {d}"));
            }
            report.position("d(θ)d(θ′) − d(θ+θ′)", k, k, residual);
        }
    }
    report.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dim(n: usize) -> OddDim {
        OddDim::new(n).unwrap()
    }

    #[test]
    fn odd_dim_rules() {
        assert!(OddDim::new(4).is_err());
        assert!(OddDim::new(1).is_err());
        let d = dim(7);
        assert_eq!(d.p(), 4);
        for i in 1..=7 {
            assert_eq!(d.bar(d.bar(i)), i);
            assert_eq!(i + d.bar(i), 2 * d.p());
        }
        assert_eq!(d.bar(d.p()), d.p());
    }

    #[test]
    fn label_counts() {
        for n in [3, 5, 7, 9] {
            let d = dim(n);
            let p = d.p();
            assert_eq!(ProjectorLabel::all(d).len(), n * n);
            assert_eq!(1 + 4 * (p - 1) + 4 * (p - 1) * (p - 1), n * n);
            assert_eq!(MergedLabel::all(d).len(), 2 * p * p - 1);
        }
    }

    #[test]
    fn label_order_is_sorted() {
        let labels = ProjectorLabel::all(dim(5));
        let mut sorted = labels.clone();
        sorted.sort();
        assert_eq!(labels, sorted);
        assert_eq!(labels[0], ProjectorLabel::Pp);
        assert_eq!(
            labels[1],
            ProjectorLabel::Pi {
                i: 1,
                eps: Sign::Plus
            }
        );
        assert_eq!(
            labels[2],
            ProjectorLabel::Pi {
                i: 1,
                eps: Sign::Minus
            }
        );
    }

    #[test]
    fn label_strings_round_trip() {
        for l in ProjectorLabel::all(dim(5)) {
            assert_eq!(
                ProjectorLabel::parse_for(&l.to_string(), dim(5)).unwrap(),
                l
            );
        }
        assert_eq!(
            "IJbar(2,1,-)".parse::<ProjectorLabel>().unwrap(),
            ProjectorLabel::IjBar {
                i: 2,
                j: 1,
                eps: Sign::Minus
            }
        );
        assert!(ProjectorLabel::parse_for("PI(2,+)", dim(3)).is_err());
        assert!("PQ(1,+)".parse::<ProjectorLabel>().is_err());
        assert!("PI(1,x)".parse::<ProjectorLabel>().is_err());
    }

    #[test]
    fn p_pp_for_n3() {
        let b = build_projectors(dim(3));
        let pp = &b[&ProjectorLabel::Pp];
        assert_eq!(pp.nnz(), 1);
        assert!(pp.get(4, 4).unwrap().is_one());
    }

    #[test]
    fn completeness_n5() {
        let b = build_projectors(dim(5));
        let sum = b
            .values()
            .fold(SparseMatrix::zeros(25, 25, 0), |a, m| &a + m);
        assert!(sum.is_identity());
    }

    #[test]
    fn merged_tilde_is_sum_and_idempotent() {
        let d = dim(3);
        let b = build_projectors(d);
        let m = build_merged_basis(d);
        assert_eq!(m.len(), 7);
        let plus = Sign::Plus;
        let tilde = &m[&MergedLabel::TildeIj {
            i: 1,
            j: 1,
            eps: plus,
        }];
        let sum = &b[&ProjectorLabel::Ij {
            i: 1,
            j: 1,
            eps: plus,
        }] + &b[&ProjectorLabel::IjBar {
            i: 1,
            j: 1,
            eps: plus,
        }];
        assert_eq!(tilde, &sum);
        assert_eq!(&(tilde * tilde), tilde);
        assert_eq!(build_merged_basis(dim(7)).len(), 31);
    }

    #[test]
    fn axioms_pass_for_standard_bases() {
        for n in [3, 5] {
            assert!(verify_projector_axioms(&build_projectors(dim(n))).pass);
            assert!(verify_projector_axioms(&build_merged_basis(dim(n))).pass);
        }
    }

    #[test]
    fn doubled_projector_fails_at_its_label() {
        let mut b = build_projectors(dim(3));
        let l = ProjectorLabel::Ip {
            i: 1,
            eps: Sign::Minus,
        };
        let doubled = b[&l].scale(&Scalar::from_int(2));
        b.insert(l, doubled);
        let r = verify_projector_axioms(&b);
        assert!(!r.pass);
        assert!(r
            .residual_sample
            .iter()
            .any(|s| s.context == "P[IP(1,-)]·P[IP(1,-)]"));
    }

    #[test]
    fn diagonalizer_matches_printed_n3_layout() {
        // √2·M for N = 3, row by row: (col, value) pairs.
        let s2 = Scalar::sqrt2();
        let rows: [&[(usize, i64)]; 9] = [
            &[(0, 1), (8, 1)],
            &[(1, 1), (7, 1)],
            &[(2, 1), (6, 1)],
            &[(3, 1), (5, 1)],
            &[],
            &[(3, 1), (5, -1)],
            &[(2, 1), (6, -1)],
            &[(1, 1), (7, -1)],
            &[(0, 1), (8, -1)],
        ];
        let mut expected = SparseMatrix::zeros(9, 9, 0);
        for (i, row) in rows.iter().enumerate() {
            for &(j, v) in row.iter() {
                expected
                    .set(i, j, ExpSum::constant(0, Scalar::from_int(v)))
                    .unwrap();
            }
        }
        expected.set(4, 4, ExpSum::constant(0, s2.clone())).unwrap();
        assert_eq!(build_diagonalizer(dim(3)).scale(&s2), expected);
    }

    #[test]
    fn diagonalizer_is_an_involution() {
        for n in [3, 5, 7] {
            let m = build_diagonalizer(dim(n));
            assert!((&m * &m).is_identity());
        }
    }

    #[test]
    fn conjugated_projectors_are_diagonal_units() {
        for n in [3, 5] {
            let d = dim(n);
            let m = build_diagonalizer(d);
            for (l, p) in build_projectors(d) {
                let c = conjugate(&m, &p).unwrap();
                let (a, cc) = l.diagonal_site(d);
                let k = d.index(a, cc);
                assert_eq!(c, SparseMatrix::unit(d.size(), k, k), "label {l}");
            }
        }
    }

    #[test]
    fn conjugation_checks_shapes() {
        let m = build_diagonalizer(dim(3));
        assert!(conjugate(&m, &SparseMatrix::identity(4, 0)).is_err());
        assert!(conjugate(&m, &SparseMatrix::identity(9, 0))
            .unwrap()
            .is_identity());
    }

    #[test]
    fn flip_layout() {
        let p = build_flip(2).unwrap();
        let support: Vec<_> = p.entries().map(|(i, j, _)| (i, j)).collect();
        assert_eq!(support, vec![(0, 0), (1, 2), (2, 1), (3, 3)]);
        let p5 = build_flip(5).unwrap();
        assert!((&p5 * &p5).is_identity());
        assert!(build_flip(1).is_err());
    }

    #[test]
    fn diagonal_law() {
        let d = dim(3);
        let ones = vec![ExpSum::one(1); 9];
        assert!(verify_diagonal_braid(&ones, d).pass);
        let mut bad = ones.clone();
        bad[3] = &ExpSum::one(1) + &ExpSum::exp(crate::algebra::int(1));
        let r = verify_diagonal_braid(&bad, d);
        assert!(!r.pass);
        assert_eq!(r.residual_support, vec![(3, 3)]);
    }
}
