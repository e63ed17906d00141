//! Command implementations, independent of argument parsing.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context as _, Result};
use clap::ValueEnum;
use oddbraid::algebra::json::{Labelled, MatrixJson};
use oddbraid::braid::{
    build_braid, build_braid_custom, random_params, BraidMatrix, CoefficientMap,
    CoefficientMapJson, ParamSet,
};
use oddbraid::expansion::build_h;
use oddbraid::operators::{build_lplus, build_transfer, build_x_basis, x_basis_json};
use oddbraid::projectors::{
    build_diagonalizer, build_flip, build_merged_basis, build_projectors, Basis,
};
use oddbraid::{OddDim, VerificationReport};
use serde::Serialize;

use crate::checks::{Check, Context};

/// Dimension used when neither `--n` nor a parameter file is given.
pub const DEFAULT_N: usize = 3;

/// Where the parameter set comes from.
#[derive(Clone, Debug, Default)]
pub struct ParamSource {
    pub n: Option<usize>,
    pub seed: u64,
    pub params: Option<PathBuf>,
}

impl ParamSource {
    /// Reads `--params` if given, otherwise draws distinct random exponents
    /// from `--seed`.
    pub fn load(&self) -> Result<ParamSet> {
        match &self.params {
            Some(path) => {
                let text = read(path)?;
                let params = ParamSet::from_json_str(&text)
                    .with_context(|| format!("invalid parameter file {}", path.display()))?;
                if let Some(n) = self.n {
                    if n != params.dim().n() {
                        bail!(
                            "--n {n} disagrees with N = {} in {}",
                            params.dim().n(),
                            path.display()
                        );
                    }
                }
                Ok(params)
            }
            None => Ok(random_params(self.dim()?, self.seed, true)?),
        }
    }

    /// The dimension from `--n`, the parameter file, or the default.
    pub fn dim(&self) -> Result<OddDim> {
        match (&self.params, self.n) {
            (Some(_), _) => Ok(self.load()?.dim()),
            (None, n) => Ok(OddDim::new(n.unwrap_or(DEFAULT_N))?),
        }
    }
}

/// Accepts odd `N ≥ 3`.
pub fn parse_n(s: &str) -> std::result::Result<usize, String> {
    let n: usize = s
        .parse()
        .map_err(|e| format!("`{s}` is not a dimension: {e}"))?;
    OddDim::new(n).map(OddDim::n).map_err(|e| e.to_string())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Writes `text` to `path`, or to stdout without a path.
pub fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("cannot write {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

pub fn gen_params(n: usize, seed: u64) -> Result<ParamSet> {
    Ok(random_params(OddDim::new(n)?, seed, true)?)
}

/// Objects `build` can export.
#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Object {
    /// The braid matrix R(θ).
    Rhat,
    /// The diagonalizer M.
    M,
    /// L+(θ) = R(θ)P.
    Lplus,
    /// t(θ) = P·R(θ).
    Transfer,
    /// H = sum m P over the merged basis.
    H,
    /// The flip P.
    Flip,
    /// The N² nested projectors.
    Projectors,
    /// The merged projectors.
    Merged,
    /// The N² constant generators X.
    XBasis,
}

impl Object {
    /// Whether the object depends on the parameter values.
    pub fn needs_params(self) -> bool {
        matches!(
            self,
            Object::Rhat | Object::Lplus | Object::Transfer | Object::H
        )
    }
}

fn basis_json<L: std::fmt::Display>(basis: &Basis<L>) -> Labelled<MatrixJson> {
    Labelled(
        basis
            .iter()
            .map(|(l, m)| (l.to_string(), m.into()))
            .collect(),
    )
}

/// The JSON text of `object`. `coefficients` replaces the parameter set by
/// arbitrary spectral coefficients for the braid matrix and its operators.
pub fn build(object: Object, source: &ParamSource, coefficients: Option<&Path>) -> Result<String> {
    let braid = || -> Result<BraidMatrix> {
        match coefficients {
            Some(path) => {
                let text = read(path)?;
                let json: CoefficientMapJson = serde_json::from_str(&text)
                    .with_context(|| format!("invalid coefficient file {}", path.display()))?;
                let coeffs = CoefficientMap::from_json(&json)
                    .with_context(|| format!("invalid coefficient file {}", path.display()))?;
                Ok(build_braid_custom(&coeffs))
            }
            None => Ok(build_braid(&source.load()?)),
        }
    };
    if coefficients.is_some() && !matches!(object, Object::Rhat | Object::Lplus | Object::Transfer)
    {
        bail!("--coefficients applies to rhat, lplus and transfer only");
    }
    match object {
        Object::Rhat => to_json(&braid()?.to_json()),
        Object::Lplus => to_json(&build_lplus(&braid()?).to_json()),
        Object::Transfer => to_json(&build_transfer(&braid()?).to_json()),
        Object::H => to_json(&MatrixJson::from(build_h(&source.load()?).matrix())),
        Object::M => to_json(&MatrixJson::from(&build_diagonalizer(source.dim()?))),
        Object::Flip => to_json(&MatrixJson::from(&build_flip(source.dim()?.n())?)),
        Object::Projectors => to_json(&basis_json(&build_projectors(source.dim()?))),
        Object::Merged => to_json(&basis_json(&build_merged_basis(source.dim()?))),
        Object::XBasis => to_json(&x_basis_json(&build_x_basis(source.dim()?))),
    }
}

/// One executed check.
pub struct Outcome {
    pub check: &'static Check,
    pub report: VerificationReport,
    pub started_ms: f64,
    pub ms: f64,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.check.passed(&self.report)
    }

    /// One status line, e.g. `PASS  braid  R12(θ)… [3.2 ms]`.
    pub fn line(&self) -> String {
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let support = self.report.residual_support.len();
        let detail = match (self.check.expected_failure, self.report.pass) {
            (true, false) => format!(" (identity fails as expected, {support} residual entries)"),
            (true, true) => " (identity unexpectedly holds)".to_string(),
            (false, false) => format!(" ({support} residual entries)"),
            (false, true) => String::new(),
        };
        format!(
            "{status}  {:<20} {}{detail} [{:.1} ms]",
            self.check.name, self.check.identity, self.ms
        )
    }
}

fn millis(since: Instant) -> f64 {
    (since.elapsed().as_secs_f64() * 1e6).round() / 1e3
}

/// Runs `checks` in order; `on_done` sees each outcome as it completes.
pub fn run_checks(
    ctx: &Context,
    checks: &[&'static Check],
    mut on_done: impl FnMut(&Outcome),
) -> Vec<Outcome> {
    let start = Instant::now();
    checks
        .iter()
        .map(|&check| {
            let started_ms = millis(start);
            let t = Instant::now();
            let report = check.run(ctx);
            let outcome = Outcome {
                check,
                report,
                started_ms,
                ms: millis(t),
            };
            on_done(&outcome);
            outcome
        })
        .collect()
}

#[derive(Serialize)]
struct ReportEntry<'a> {
    check: &'a str,
    identity: &'a str,
    pass: bool,
    expected_failure: bool,
    identity_holds: bool,
    residual_support_size: usize,
    notes: &'a [String],
    started_ms: f64,
    ms: f64,
}

/// The structured report, one element per executed check.
pub fn report_json(outcomes: &[Outcome]) -> Result<String> {
    let entries: Vec<ReportEntry> = outcomes
        .iter()
        .map(|o| ReportEntry {
            check: o.check.name,
            identity: o.check.identity,
            pass: o.passed(),
            expected_failure: o.check.expected_failure,
            identity_holds: o.report.pass,
            residual_support_size: o.report.residual_support.len(),
            notes: &o.report.notes,
            started_ms: o.started_ms,
            ms: o.ms,
        })
        .collect();
    to_json(&entries)
}
