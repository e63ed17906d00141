//! The check registry: every verification the CLI can run, with the
//! identity it establishes.

use std::cell::OnceCell;
use std::collections::BTreeSet;

use oddbraid::algebra::SparseMatrix;
use oddbraid::braid::{
    build_braid, build_braid_custom, check_boltzmann_positivity, mismatched_pair_coefficients,
    non_exponential_coefficients, verify_braid_equation, verify_inverse_property, verify_pattern,
    BraidMatrix, ParamSet,
};
use oddbraid::expansion::{
    build_h, verify_double_commutator, verify_exponential_series, verify_h_powers,
    verify_low_order_terms, verify_spectral_slopes, verify_trilinear_identity, Hamiltonian,
};
use oddbraid::operators::{
    build_lplus, build_transfer, build_x_basis, coproduct, verify_block_law, verify_flip_duality,
    verify_lminus_degeneracy, verify_rll, verify_theta_factorization,
    verify_traceless_decomposition, verify_transfer_exchange, verify_unit_value, verify_x_algebra,
    verify_x_closure, OperatorMatrix, XBasis,
};
use oddbraid::projectors::{
    build_diagonalizer, build_merged_basis, build_projectors, spectrum, verify_diagonal_braid,
    verify_projector_axioms, Basis,
};
use oddbraid::report::ReportBuilder;
use oddbraid::{ExpSum, MergedLabel, OddDim, ProjectorLabel, Scalar, VerificationReport};

/// Default θ samples for the positivity check.
pub const POSITIVITY_THETA: [f64; 3] = [0.1, 1.0, 5.0];
/// Default θ samples for the series check.
pub const SERIES_THETA: [f64; 2] = [0.1, 0.3];
/// Default truncation order for the series check.
pub const SERIES_ORDER: u32 = 25;

/// Objects shared between checks, built on first use.
pub struct Context {
    params: ParamSet,
    theta: Option<Vec<f64>>,
    order: u32,
    braid: OnceCell<BraidMatrix>,
    lplus: OnceCell<OperatorMatrix>,
    transfer: OnceCell<OperatorMatrix>,
    diagonalizer: OnceCell<SparseMatrix>,
    projectors: OnceCell<Basis<ProjectorLabel>>,
    merged: OnceCell<Basis<MergedLabel>>,
    x_basis: OnceCell<XBasis>,
    h: OnceCell<Hamiltonian>,
}

impl Context {
    /// `theta` overrides the default samples of every θ-sampled check.
    pub fn new(params: ParamSet, theta: Option<Vec<f64>>, order: Option<u32>) -> Self {
        Context {
            params,
            theta,
            order: order.unwrap_or(SERIES_ORDER),
            braid: OnceCell::new(),
            lplus: OnceCell::new(),
            transfer: OnceCell::new(),
            diagonalizer: OnceCell::new(),
            projectors: OnceCell::new(),
            merged: OnceCell::new(),
            x_basis: OnceCell::new(),
            h: OnceCell::new(),
        }
    }

    pub fn dim(&self) -> OddDim {
        self.params.dim()
    }

    pub fn params(&self) -> &ParamSet {
        &self.params
    }

    fn braid(&self) -> &BraidMatrix {
        self.braid.get_or_init(|| build_braid(&self.params))
    }

    fn lplus(&self) -> &OperatorMatrix {
        self.lplus.get_or_init(|| build_lplus(self.braid()))
    }

    fn transfer(&self) -> &OperatorMatrix {
        self.transfer.get_or_init(|| build_transfer(self.braid()))
    }

    fn diagonalizer(&self) -> &SparseMatrix {
        self.diagonalizer
            .get_or_init(|| build_diagonalizer(self.dim()))
    }

    fn projectors(&self) -> &Basis<ProjectorLabel> {
        self.projectors.get_or_init(|| build_projectors(self.dim()))
    }

    fn merged(&self) -> &Basis<MergedLabel> {
        self.merged.get_or_init(|| build_merged_basis(self.dim()))
    }

    fn x_basis(&self) -> &XBasis {
        self.x_basis.get_or_init(|| build_x_basis(self.dim()))
    }

    fn h(&self) -> &Hamiltonian {
        self.h.get_or_init(|| build_h(&self.params))
    }

    fn theta_or(&self, default: &[f64]) -> Vec<f64> {
        self.theta.clone().unwrap_or_else(|| default.to_vec())
    }
}

/// One registered check.
pub struct Check {
    pub name: &'static str,
    pub identity: &'static str,
    /// The check passes when the targeted identity fails.
    pub expected_failure: bool,
    run: fn(&Context) -> VerificationReport,
}

impl Check {
    pub fn run(&self, ctx: &Context) -> VerificationReport {
        (self.run)(ctx)
    }

    /// Whether `report` counts as a pass for this check.
    pub fn passed(&self, report: &VerificationReport) -> bool {
        report.pass != self.expected_failure
    }
}

const fn check(
    name: &'static str,
    identity: &'static str,
    run: fn(&Context) -> VerificationReport,
) -> Check {
    Check {
        name,
        identity,
        expected_failure: false,
        run,
    }
}

const fn negative(
    name: &'static str,
    identity: &'static str,
    run: fn(&Context) -> VerificationReport,
) -> Check {
    Check {
        name,
        identity,
        expected_failure: true,
        run,
    }
}

pub static REGISTRY: &[Check] = &[
    check(
        "projector-axioms",
        "P_α P_β = δ_αβ P_α, Σ P_α = I (nested basis)",
        |c| verify_projector_axioms(c.projectors()),
    ),
    check(
        "merged-axioms",
        "P_α P_β = δ_αβ P_α, Σ P_α = I (merged basis)",
        |c| verify_projector_axioms(c.merged()),
    ),
    check(
        "pattern",
        "R̂(θ) supported on diagonal and antidiagonal, closed-form entries",
        |c| verify_pattern(c.braid()),
    ),
    check(
        "counting",
        "(N+3)(N−1)/2 parameters, N² projectors, 2N²−1 nonzero entries",
        counting,
    ),
    check(
        "braid",
        "R̂₁₂(θ)R̂₂₃(θ+θ′)R̂₁₂(θ′) = R̂₂₃(θ′)R̂₁₂(θ+θ′)R̂₂₃(θ)",
        |c| verify_braid_equation(c.braid()),
    ),
    check("inverse", "R̂(−θ)R̂(θ) = I, R̂(0) = I", |c| {
        verify_inverse_property(c.braid())
    }),
    check("diagonalizer", "M·M = I", diagonalizer),
    check(
        "spectrum",
        "M·R̂(θ)·M = diag of e^(mθ), slot by slot",
        spectrum_check,
    ),
    check(
        "diagonal-braid",
        "d(θ)d(θ′) = d(θ+θ′) for every eigenvalue",
        |c| match spectrum(c.braid().matrix(), c.diagonalizer()) {
            Ok(s) => verify_diagonal_braid(&s.values(), c.dim()),
            Err(e) => failed("diagonal braid law", e),
        },
    ),
    check(
        "boltzmann",
        "every entry positive for θ > 0 when each m⁺ > m⁻",
        |c| {
            let ordered = build_braid(&c.params.with_positive_ordering());
            check_boltzmann_positivity(&ordered, &c.theta_or(&POSITIVITY_THETA))
        },
    ),
    check("flip-duality", "t = P·L⁺·P", |c| {
        verify_flip_duality(c.lplus(), c.transfer())
    }),
    check("block-law", "(L⁺_ab)_cd = R̂_(ad),(cb)", |c| {
        verify_block_law(c.braid(), c.lplus())
    }),
    check("unit-value", "L⁺(0) = P, t(0) = P", |c| {
        merge(
            "unit value",
            [
                verify_unit_value(c.lplus()),
                verify_unit_value(c.transfer()),
            ],
        )
    }),
    check(
        "rll",
        "R̂(θ−θ′)L₂(θ)L₁(θ′) = L₂(θ′)L₁(θ)R̂(θ−θ′)",
        |c| verify_rll(c.braid(), c.lplus()),
    ),
    check(
        "rll-coproduct",
        "RLL for the two-site coproduct of L⁺",
        |c| match coproduct(c.lplus(), c.lplus()) {
            Ok(l2) => verify_rll(c.braid(), &l2),
            Err(e) => failed("RLL relation", e),
        },
    ),
    check(
        "transfer-exchange",
        "exchange relation of t with R̂₂₁ = P·R̂·P",
        |c| verify_transfer_exchange(c.braid(), c.transfer()),
    ),
    check(
        "lminus",
        "(R̂⁻¹L⁻P)⊗I = I⊗(L⁻PR̂⁻¹) = I with L⁻ = L⁺",
        |c| verify_lminus_degeneracy(c.braid()),
    ),
    check(
        "x-algebra",
        "X products follow the closed multiplication table",
        |c| verify_x_algebra(c.x_basis()),
    ),
    check(
        "x-closure",
        "X products stay in the span; p-free generators close",
        |c| verify_x_closure(c.x_basis()),
    ),
    check(
        "traceless",
        "C₁ = I/N and the shifted generators are traceless",
        |c| verify_traceless_decomposition(c.x_basis()),
    ),
    check(
        "theta-factorization",
        "e^(−mθ)(L_ab + εL_āb̄) is a constant X; M·L·M entries monomial",
        |c| {
            merge(
                "θ-factorization",
                [
                    verify_theta_factorization(c.lplus(), &c.params, c.diagonalizer()),
                    verify_theta_factorization(c.transfer(), &c.params, c.diagonalizer()),
                ],
            )
        },
    ),
    check("h-powers", "Hⁿ = Σ mⁿ P for n = 2, 3", |c| {
        verify_h_powers(c.h(), c.merged(), 3)
    }),
    check(
        "double-commutator",
        "[[H₁₂,H₂₃],H₁₂] = [[H₂₃,H₁₂],H₂₃]",
        |c| verify_double_commutator(c.h().matrix()),
    ),
    check(
        "trilinear",
        "cubic projector identity Σ mmm PPP = ½ Σ mm(m−m′) PP",
        |c| verify_trilinear_identity(&c.params, c.merged()),
    ),
    check(
        "low-order",
        "series terms of the braid equation cancel through third order",
        |c| verify_low_order_terms(c.h().matrix()),
    ),
    check(
        "series",
        "R̂(θ) = e^(θH), truncated series within 1e-10",
        |c| {
            let reports = c
                .theta_or(&SERIES_THETA)
                .into_iter()
                .map(|t| verify_exponential_series(c.braid(), c.h().matrix(), t, c.order));
            merge("exponential series", reports)
        },
    ),
    check(
        "spectral-slopes",
        "M·H·M holds the exponents of M·R̂·M",
        |c| verify_spectral_slopes(c.braid(), c.h().matrix(), c.diagonalizer()),
    ),
    negative(
        "mismatched-pair",
        "braid equation fails when m_ij̄ ≠ m_ij",
        |c| {
            verify_braid_equation(&build_braid_custom(&mismatched_pair_coefficients(
                &c.params,
            )))
        },
    ),
    negative(
        "non-exponential",
        "braid equation fails for a coefficient 1 + e^θ",
        |c| {
            verify_braid_equation(&build_braid_custom(&non_exponential_coefficients(
                &c.params,
            )))
        },
    ),
];

pub fn find(name: &str) -> Option<&'static Check> {
    REGISTRY.iter().find(|c| c.name == name)
}

/// Resolves `--checks` and `--negative` selectors to registry entries in
/// registry order. With neither selector, every check is selected.
pub fn select(checks: &[String], negatives: &[String]) -> Result<Vec<&'static Check>, String> {
    let mut names = BTreeSet::new();
    if checks.is_empty() && negatives.is_empty() {
        return Ok(REGISTRY.iter().collect());
    }
    for name in checks {
        if name == "all" {
            names.extend(REGISTRY.iter().map(|c| c.name));
            continue;
        }
        let c = find(name).ok_or_else(|| unknown(name))?;
        names.insert(c.name);
    }
    for name in negatives {
        if name == "all" {
            names.extend(
                REGISTRY
                    .iter()
                    .filter(|c| c.expected_failure)
                    .map(|c| c.name),
            );
            continue;
        }
        match find(name) {
            Some(c) if c.expected_failure => {
                names.insert(c.name);
            }
            Some(_) => return Err(format!("`{name}` is not a negative check")),
            None => return Err(unknown(name)),
        }
    }
    Ok(REGISTRY.iter().filter(|c| names.contains(c.name)).collect())
}

fn unknown(name: &str) -> String {
    let known: Vec<&str> = REGISTRY.iter().map(|c| c.name).collect();
    format!(
        "unknown check `{name}`; known checks: all, {}",
        known.join(", ")
    )
}

fn failed(name: &str, e: oddbraid::Error) -> VerificationReport {
    let mut report = ReportBuilder::new(name);
    report.note(e.to_string());
    report.position("error", 0, 0, ExpSum::one(0));
    report.finish()
}

/// Combines reports, keeping every residual position and note.
fn merge(name: &str, reports: impl IntoIterator<Item = VerificationReport>) -> VerificationReport {
    let mut out = ReportBuilder::new(name);
    for r in reports {
        for n in r.notes {
            out.note(format!("{}: {n}", r.name));
        }
        for &(i, j) in &r.residual_support {
            let value = r
                .residual_sample
                .iter()
                .find(|s| (s.row, s.col) == (i, j))
                .map(|s| s.value.clone())
                .unwrap_or_else(|| ExpSum::one(0));
            out.position(&r.name, i, j, value);
        }
    }
    out.finish()
}

fn count_gap(report: &mut ReportBuilder, what: &str, got: usize, want: usize) {
    report.note(format!("{what}: {got} (expected {want})"));
    if got != want {
        let gap = Scalar::from_int(got as i64 - want as i64);
        report.position(what, 0, 0, ExpSum::constant(0, gap));
    }
}

fn counting(c: &Context) -> VerificationReport {
    let mut report = ReportBuilder::new("counting formulas");
    let n = c.dim().n();
    count_gap(
        &mut report,
        "parameters",
        c.params.count(),
        (n + 3) * (n - 1) / 2,
    );
    count_gap(&mut report, "projectors", c.projectors().len(), n * n);
    count_gap(
        &mut report,
        "nonzero entries",
        c.braid().matrix().nnz(),
        2 * n * n - 1,
    );
    report.finish()
}

fn diagonalizer(c: &Context) -> VerificationReport {
    let mut report = ReportBuilder::new("diagonalizer involution");
    let m = c.diagonalizer();
    report.compare("M·M − I", &(m * m), &SparseMatrix::identity(m.rows(), 0));
    report.finish()
}

/// `M·R·M` is diagonal and slot `k` carries `e^{mθ}` for the projector
/// whose diagonal site is `k`.
fn spectrum_check(c: &Context) -> VerificationReport {
    let mut report = ReportBuilder::new("spectrum");
    let s = match spectrum(c.braid().matrix(), c.diagonalizer()) {
        Ok(s) => s,
        Err(e) => return failed("spectrum", e),
    };
    for e in &s.entries {
        let want = match e.label {
            ProjectorLabel::Pp => ExpSum::one(1),
            l => ExpSum::exp(c.params.weight(l)),
        };
        if e.value != want {
            report.position(
                &format!("slot of {}", e.label),
                e.position,
                e.position,
                &e.value - &want,
            );
        }
    }
    report.note(format!(
        "{} distinct eigenvalues",
        s.minimal_polynomial_degree()
    ));
    report.finish()
}
