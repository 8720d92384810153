//! Relative charges from the Lorentzian index formula.
//!
//! `Q_R = −∫_M Â∧ch(∇^E) + (h₁ − h₂ + η₁ − η₂)/2`, `Q_L` is the same with
//! every term negated, so `Q_R + Q_L = 0` and `Q_chir = Q_R − Q_L = 2Q_R`.

use alloc::format;

use crate::flow::{mode_family_cylinder, projector_trace};
use crate::forms::{index_form_integral, FormIntegral};
use crate::models::{validate_product_structure, Cylinder, ModelKind, SpacetimeModel};
use crate::spectral::{circle_spectrum, eta_closed, heisenberg_eta_smooth, torus_summary, SpectrumSummary};
use crate::{Error, Result};

/// Deviations from an integer above `ANOMALY_FACTOR × tol` flag a report.
pub const ANOMALY_FACTOR: f64 = 100.0;

/// All terms of the charge formula for one model.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChargeReport {
    /// Model kind.
    pub model: ModelKind,
    /// `∫_M Â∧ch(∇^E)`; absent for the sphere reference.
    pub form_integral: Option<FormIntegral>,
    /// `η(∇_{Σ₁})`
    pub eta1: Option<f64>,
    /// `η(∇_{Σ₂})`
    pub eta2: Option<f64>,
    /// `h(∇_{Σ₁})`
    pub h1: Option<u32>,
    /// `h(∇_{Σ₂})`
    pub h2: Option<u32>,
    /// Smooth parts `b⁴/(96π²a⁴)` at `t₁`, `t₂` (Bianchi-II).
    pub eta_smooth: Option<[f64; 2]>,
    /// Integer offsets `N(t₁)`, `N(t₂)` as supplied (Bianchi-II).
    pub integer_offsets: Option<[Option<i64>; 2]>,
    /// `Q_R`
    pub q_right: f64,
    /// `Q_L`
    pub q_left: f64,
    /// `Q_R + Q_L`
    pub q_total: f64,
    /// `Q_R − Q_L`
    pub q_chiral: f64,
    /// `|Q_R − round(Q_R)|`
    pub nearest_integer_deviation: f64,
    /// Projector-trace value of `Q_R` (cylinder).
    pub oracle_value: Option<i64>,
    /// Some `N` was missing and taken as 0; the charges are then the
    /// `N`-independent part only.
    pub partial: bool,
    /// `nearest_integer_deviation > 100 × tol`.
    pub anomalous: bool,
}

impl ChargeReport {
    fn from_terms(model: ModelKind, q_right: f64, tol: f64) -> Self {
        let q_left = -q_right;
        let deviation = (q_right - libm::round(q_right)).abs();
        Self {
            model,
            form_integral: None,
            eta1: None,
            eta2: None,
            h1: None,
            h2: None,
            eta_smooth: None,
            integer_offsets: None,
            q_right,
            q_left,
            q_total: q_right + q_left,
            q_chiral: q_right - q_left,
            nearest_integer_deviation: deviation,
            oracle_value: None,
            partial: false,
            anomalous: !(deviation <= ANOMALY_FACTOR * tol),
        }
    }

    /// Report for two coincident hypersurfaces: `M` has empty interior, both
    /// states agree and every charge vanishes. Models reject such windows, so
    /// this is the only way to express that case.
    pub fn coincident(model: ModelKind) -> Self {
        Self::from_terms(model, 0.0, 0.0)
    }
}

/// `Q_R = −∫Â∧ch + (h₁ − h₂ + η₁ − η₂)/2`
pub fn right_handed_charge(form_integral: f64, h1: u32, h2: u32, eta1: f64, eta2: f64) -> f64 {
    -form_integral + (f64::from(h1) - f64::from(h2) + eta1 - eta2) / 2.0
}

/// `Q_L = ∫Â∧ch + (−h₁ + h₂ − η₁ + η₂)/2`
pub fn left_handed_charge(form_integral: f64, h1: u32, h2: u32, eta1: f64, eta2: f64) -> f64 {
    form_integral + (-f64::from(h1) + f64::from(h2) - eta1 + eta2) / 2.0
}

/// Assembles all charges for `model`.
///
/// Every profile must have product structure (first derivative at most
/// `tol` on both end segments); `tol` is also the quadrature tolerance for
/// the form integral and sets the anomaly threshold.
pub fn assemble_charges(model: &SpacetimeModel, tol: f64) -> Result<ChargeReport> {
    if !(tol > 0.0) {
        return Err(Error::parameter("tol", "tolerance must be positive"));
    }
    let validation = validate_product_structure(model, tol);
    if !validation.passed {
        let worst = validation
            .checks
            .iter()
            .filter(|c| !c.passed)
            .max_by(|a, b| a.max_derivative.total_cmp(&b.max_derivative));
        let reason = match worst {
            Some(c) => format!(
                "profile {} is not constant near the hypersurfaces (max |derivative| {:e} > {:e})",
                c.profile, c.max_derivative, tol
            ),
            None => format!("product structure check failed at tolerance {tol:e}"),
        };
        return Err(Error::Precondition(reason));
    }
    match model {
        SpacetimeModel::Cylinder(cyl) => cylinder_report(model, cyl, tol),
        SpacetimeModel::BianchiI(b) => {
            let form = index_form_integral(model, tol)?;
            let SpectrumSummary::Torus { eta, h, .. } = torus_summary(b.spin()) else {
                unreachable!()
            };
            let q = right_handed_charge(form.value, h, h, eta, eta);
            let mut report = ChargeReport::from_terms(ModelKind::BianchiI, q, tol);
            report.form_integral = Some(form);
            report.eta1 = Some(eta);
            report.eta2 = Some(eta);
            report.h1 = Some(h);
            report.h2 = Some(h);
            Ok(report)
        }
        SpacetimeModel::BianchiII(b) => {
            let form = index_form_integral(model, tol)?;
            let w = b.window();
            let smooth1 = heisenberg_eta_smooth(b.a().value(w.t1()), b.b().value(w.t1()))?;
            let smooth2 = heisenberg_eta_smooth(b.a().value(w.t2()), b.b().value(w.t2()))?;
            let (n1, n2) = (b.n1(), b.n2());
            let eta1 = smooth1 - n1.unwrap_or(0) as f64;
            let eta2 = smooth2 - n2.unwrap_or(0) as f64;
            // Kernel dimensions are not modelled; they enter only through N.
            let q = right_handed_charge(form.value, 0, 0, eta1, eta2);
            let mut report = ChargeReport::from_terms(ModelKind::BianchiII, q, tol);
            report.form_integral = Some(form);
            report.eta1 = Some(eta1);
            report.eta2 = Some(eta2);
            report.h1 = Some(0);
            report.h2 = Some(0);
            report.eta_smooth = Some([smooth1, smooth2]);
            report.integer_offsets = Some([n1, n2]);
            report.partial = n1.is_none() || n2.is_none();
            Ok(report)
        }
        SpacetimeModel::SphereReference(s) => {
            let q_chiral = reference_sphere_charge(s.k())?;
            Ok(ChargeReport::from_terms(
                ModelKind::SphereReference,
                q_chiral as f64 / 2.0,
                tol,
            ))
        }
    }
}

fn cylinder_report(model: &SpacetimeModel, cyl: &Cylinder, tol: f64) -> Result<ChargeReport> {
    let w = cyl.window();
    let form = index_form_integral(model, tol)?;
    let eta_at = |t: f64| -> Result<_> {
        let spec = circle_spectrum(cyl.circumference(), cyl.spin(), cyl.gauge().value(t), true)?;
        Ok(eta_closed(&spec))
    };
    let (e1, e2) = (eta_at(w.t1())?, eta_at(w.t2())?);
    let q = right_handed_charge(form.value, e1.h, e2.h, e1.eta, e2.eta);
    let trace = projector_trace(&mode_family_cylinder(model)?, w.t1(), w.t2())?;
    let mut report = ChargeReport::from_terms(ModelKind::Cylinder, q, tol);
    report.form_integral = Some(form);
    report.eta1 = Some(e1.eta);
    report.eta2 = Some(e2.eta);
    report.h1 = Some(e1.h);
    report.h2 = Some(e2.h);
    report.oracle_value = Some(trace.value);
    Ok(report)
}

/// Formula and oracle values of `Q_R` on a cylinder.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct CrossValidation {
    /// `Q_R` from the index formula.
    pub formula_q_right: f64,
    /// `Q_R` from the projector trace.
    pub oracle_q_right: i64,
    /// The formula value is within `1e-8` of the oracle integer.
    pub equal: bool,
    /// Some eigenvalue sits at zero at `t₁` or `t₂`. The comparison is then
    /// a record of how the two zero-mode conventions interact, not a check.
    pub lattice_endpoint: bool,
}

/// Tolerance for treating the formula value as the oracle integer.
pub const CROSS_VALIDATION_TOLERANCE: f64 = 1e-8;

/// Compares the index formula with the projector trace on a cylinder.
pub fn cross_validate_cylinder(model: &SpacetimeModel) -> Result<CrossValidation> {
    let SpacetimeModel::Cylinder(cyl) = model else {
        return Err(Error::UnsupportedModel {
            operation: "cross_validate_cylinder",
            model: model.kind().name(),
        });
    };
    let w = cyl.window();
    let form = index_form_integral(model, 1e-12)?;
    let spectrum = |t: f64| circle_spectrum(cyl.circumference(), cyl.spin(), cyl.gauge().value(t), true);
    let (e1, e2) = (eta_closed(&spectrum(w.t1())?), eta_closed(&spectrum(w.t2())?));
    let formula = right_handed_charge(form.value, e1.h, e2.h, e1.eta, e2.eta);
    let trace = projector_trace(&mode_family_cylinder(model)?, w.t1(), w.t2())?;
    Ok(CrossValidation {
        formula_q_right: formula,
        oracle_q_right: trace.value,
        equal: (formula - trace.value as f64).abs() < CROSS_VALIDATION_TOLERANCE,
        lattice_endpoint: trace.boundary_warning || e1.h > 0 || e2.h > 0,
    })
}

/// `Q_chir = (−1)^k · 2 · C(2k, k)` for the sphere family, in exact
/// arithmetic. Fails for `k = 0` and when the value overflows `i64`.
pub fn reference_sphere_charge(k: u32) -> Result<i64> {
    if k == 0 {
        return Err(Error::domain("reference_sphere_charge", "k must be at least 1"));
    }
    let overflow = || Error::domain("reference_sphere_charge", format!("value overflows for k = {k}"));
    // C(2k, k) built as C(k+i, i) for i = 1..=k; each step divides exactly.
    let mut binom: u128 = 1;
    for i in 1..=u128::from(k) {
        binom = binom.checked_mul(u128::from(k) + i).ok_or_else(overflow)? / i;
    }
    let magnitude = i64::try_from(binom.checked_mul(2).ok_or_else(overflow)?).map_err(|_| overflow())?;
    Ok(if k % 2 == 0 { magnitude } else { -magnitude })
}
