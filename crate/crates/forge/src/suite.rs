//! Randomized invariant suite.
//!
//! Every property draws from its own ChaCha stream derived from the seed, so
//! a given `(seed, cases)` pair always produces the same report.

use std::f64::consts::PI;

use anomaly_core::charge::{assemble_charges, cross_validate_cylinder};
use anomaly_core::flow::{mode_family_cylinder, projector_trace, spectral_flow};
use anomaly_core::forms::{ahat_density_at, ahat_density_closed_bianchi2, default_step, SpacetimePoint};
use anomaly_core::models::{
    plateau_profile, BianchiI, BianchiII, CircleSpin, Cylinder, HeisenbergSpin, PolynomialProfile, Profile,
    SpacetimeModel, TimeWindow, TorusSpin,
};
use anomaly_core::spectral::{circle_spectrum, eta_closed, eta_zeta_oracle, ArithmeticSpectrum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Suite parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub cases: usize,
    pub quadrature_tolerance: f64,
    pub eta_tolerance: f64,
    pub cutoff: usize,
    pub levels: usize,
}

/// Pass/fail count for one property.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyOutcome {
    pub name: String,
    pub cases: usize,
    pub passed: usize,
    pub failed: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub first_failure: Option<String>,
}

/// Result of [`run_suite`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub seed: u64,
    pub properties: Vec<PropertyOutcome>,
    pub total_cases: usize,
    pub total_failed: usize,
    pub passed: bool,
}

/// Distance kept between endpoint eigenvalues and zero, in units of the
/// level spacing.
pub const LATTICE_MARGIN: f64 = 1e-6;

/// Independent stream for property number `index`.
pub fn property_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Unit window.
pub fn unit_window() -> TimeWindow {
    TimeWindow::new(0.0, 1.0).expect("valid window")
}

/// Parameters of a random cylinder job.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylinderCase {
    pub circumference: f64,
    pub spin: CircleSpin,
    pub from: f64,
    pub to: f64,
    pub ramp: f64,
}

impl CylinderCase {
    /// `L ∈ [1, 10]`, either spin structure, endpoint values in `[−5, 5]`
    /// whose eigenvalues stay [`LATTICE_MARGIN`] away from zero.
    pub fn random(rng: &mut impl Rng) -> Self {
        let circumference = rng.gen_range(1.0..10.0);
        let spin = if rng.gen_bool(0.5) {
            CircleSpin::Nontrivial
        } else {
            CircleSpin::Trivial
        };
        let mut endpoint = || loop {
            let a: f64 = rng.gen_range(-5.0..5.0);
            if !near_lattice(circumference, spin, a) {
                return a;
            }
        };
        let (from, to) = (endpoint(), endpoint());
        Self {
            circumference,
            spin,
            from,
            to,
            ramp: rng.gen_range(0.05..0.45),
        }
    }

    /// Same case with both endpoint values moved by `shift`.
    pub fn shifted(self, shift: f64) -> Self {
        Self {
            from: self.from + shift,
            to: self.to + shift,
            ..self
        }
    }

    pub fn model(&self) -> SpacetimeModel {
        let w = unit_window();
        let gauge = plateau_profile(self.from, self.to, w, self.ramp).expect("valid ramp");
        SpacetimeModel::Cylinder(Cylinder::new(self.circumference, self.spin, gauge, w).expect("valid cylinder"))
    }

    /// `(L/2π)A₁` at the start and end.
    pub fn reduced(&self) -> (f64, f64) {
        let f = self.circumference / (2.0 * PI);
        (f * self.from, f * self.to)
    }

    /// Q_chir from the floor formulas: `2⌊x₁⌋ − 2⌊x₂⌋` (trivial) or
    /// `2⌊x₁ − ½⌋ − 2⌊x₂ − ½⌋` (nontrivial).
    pub fn floor_formula(&self) -> f64 {
        let (x1, x2) = self.reduced();
        let s = self.spin.sigma();
        2.0 * (x1 - s).floor() - 2.0 * (x2 - s).floor()
    }
}

fn near_lattice(circumference: f64, spin: CircleSpin, a: f64) -> bool {
    let x = circumference * a / (2.0 * PI) + spin.sigma();
    (x - x.round()).abs() < LATTICE_MARGIN
}

/// Random cubic profile around `centre`, positive on the unit window.
pub fn random_polynomial(rng: &mut impl Rng, centre: f64) -> Profile {
    let coefficients = vec![
        centre + rng.gen_range(-0.2..0.2),
        rng.gen_range(-0.5..0.5),
        rng.gen_range(-0.8..0.8),
        rng.gen_range(-0.5..0.5),
    ];
    Profile::Polynomial(PolynomialProfile::new(0.5, coefficients).expect("finite coefficients"))
}

/// Random point of `[0.05, 0.95] × [0, 1)³`.
pub fn random_point(rng: &mut impl Rng) -> SpacetimePoint {
    SpacetimePoint::new(
        rng.gen_range(0.05..0.95),
        [rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0)],
    )
}

type Check<'a> = Box<dyn FnMut(&mut ChaCha8Rng) -> Result<(), String> + 'a>;

/// Runs every property with `cfg.cases` cases (fewer for the expensive
/// Bianchi-II integrals and the zeta oracle).
pub fn run_suite(cfg: &SuiteConfig) -> SuiteReport {
    let tol = cfg.quadrature_tolerance;
    let heavy = (cfg.cases / 10).max(3);
    let oracle_cases = (cfg.cases / 5).max(5);
    let properties: Vec<(&str, usize, Check)> = vec![
        (
            "cylinder_integrality_and_oracle",
            cfg.cases,
            Box::new(|rng| {
                let case = CylinderCase::random(rng);
                let r = assemble_charges(&case.model(), tol).map_err(|e| e.to_string())?;
                let oracle = r.oracle_value.ok_or("no oracle value")?;
                if r.nearest_integer_deviation >= 1e-8 || r.q_right.round() as i64 != oracle {
                    return Err(format!("{case:?}: Q_R = {}, oracle {oracle}", r.q_right));
                }
                if r.q_total != 0.0 {
                    return Err(format!("{case:?}: Q_total = {}", r.q_total));
                }
                if (r.q_chiral - case.floor_formula()).abs() > 1e-8 {
                    return Err(format!("{case:?}: Q_chir = {}, floor formula {}", r.q_chiral, case.floor_formula()));
                }
                Ok(())
            }),
        ),
        (
            "flow_equals_trace",
            cfg.cases,
            Box::new(|rng| {
                let case = CylinderCase::random(rng);
                let family = mode_family_cylinder(&case.model()).map_err(|e| e.to_string())?;
                let trace = projector_trace(&family, 0.0, 1.0).map_err(|e| e.to_string())?;
                let flow = spectral_flow(&family, 0.0, 1.0, 64).map_err(|e| e.to_string())?;
                if trace.value != flow.value {
                    return Err(format!("{case:?}: trace {} flow {}", trace.value, flow.value));
                }
                Ok(())
            }),
        ),
        (
            "time_reversal",
            cfg.cases,
            Box::new(|rng| {
                let case = CylinderCase::random(rng);
                let family = mode_family_cylinder(&case.model()).map_err(|e| e.to_string())?;
                let forward = projector_trace(&family, 0.0, 1.0).map_err(|e| e.to_string())?.value;
                let backward = projector_trace(&family, 1.0, 0.0).map_err(|e| e.to_string())?.value;
                let flow_back = spectral_flow(&family, 1.0, 0.0, 64).map_err(|e| e.to_string())?.value;
                if backward != -forward || flow_back != -forward {
                    return Err(format!("{case:?}: {forward} vs {backward}, {flow_back}"));
                }
                Ok(())
            }),
        ),
        (
            "gauge_shift",
            cfg.cases,
            Box::new(|rng| {
                let case = CylinderCase::random(rng);
                let m: i32 = rng.gen_range(-4..=4);
                let shifted = case.shifted(2.0 * PI / case.circumference * f64::from(m));
                let q = |c: &CylinderCase| assemble_charges(&c.model(), tol).map(|r| r.q_chiral);
                let (a, b) = (q(&case).map_err(|e| e.to_string())?, q(&shifted).map_err(|e| e.to_string())?);
                if (a - b).abs() > 1e-8 {
                    return Err(format!("{case:?}, m = {m}: {a} vs {b}"));
                }
                Ok(())
            }),
        ),
        (
            "cross_validation",
            cfg.cases,
            Box::new(|rng| {
                let case = CylinderCase::random(rng);
                let c = cross_validate_cylinder(&case.model()).map_err(|e| e.to_string())?;
                if !c.equal || c.lattice_endpoint {
                    return Err(format!("{case:?}: {c:?}"));
                }
                Ok(())
            }),
        ),
        (
            "hurwitz_identity",
            cfg.cases,
            Box::new(|rng| {
                let l: f64 = rng.gen_range(1.0..10.0);
                let a1 = loop {
                    let a: f64 = rng.gen_range(-5.0..5.0);
                    if !near_lattice(l, CircleSpin::Trivial, a) {
                        break a;
                    }
                };
                let x = l * a1 / (2.0 * PI);
                let e = eta_closed(&circle_spectrum(l, CircleSpin::Trivial, a1, true).map_err(|e| e.to_string())?);
                let lhs = 2.0 * x + f64::from(e.h) + e.eta;
                let rhs = 2.0 * x.floor() + 1.0;
                if (lhs - rhs).abs() > 1e-12 {
                    return Err(format!("x = {x}: {lhs} vs {rhs}"));
                }
                Ok(())
            }),
        ),
        (
            "eta_oracle_agreement",
            oracle_cases,
            Box::new(|rng| {
                let s: f64 = rng.gen_range(0.2..5.0);
                let sigma = if rng.gen_bool(0.5) { 0.5 } else { 0.0 };
                let a: f64 = rng.gen_range(0.05..0.95);
                let k: i32 = rng.gen_range(-3..=3);
                let spec = ArithmeticSpectrum::new(s, sigma, s * (a - sigma + f64::from(k))).map_err(|e| e.to_string())?;
                let z = eta_zeta_oracle(&spec, cfg.cutoff, cfg.levels).map_err(|e| e.to_string())?;
                let closed = eta_closed(&spec).eta;
                if (z.eta - closed).abs() > cfg.eta_tolerance {
                    return Err(format!("{spec:?}: oracle {} closed {closed}", z.eta));
                }
                Ok(())
            }),
        ),
        (
            "bianchi_i_vanishing",
            cfg.cases,
            Box::new(|rng| {
                let scales = [random_polynomial(rng, 1.0), random_polynomial(rng, 1.2), random_polynomial(rng, 0.9)];
                let model = SpacetimeModel::BianchiI(
                    BianchiI::new(scales, TorusSpin::new(rng.gen_range(0..8)).unwrap(), unit_window())
                        .map_err(|e| e.to_string())?,
                );
                let d = ahat_density_at(&model, &random_point(rng), default_step()).map_err(|e| e.to_string())?;
                if d.abs() >= 1e-8 {
                    return Err(format!("density {d:e}"));
                }
                Ok(())
            }),
        ),
        (
            "bianchi_ii_closed_form",
            cfg.cases,
            Box::new(|rng| {
                let (a, b) = (random_polynomial(rng, 1.1), random_polynomial(rng, 1.0));
                let model = SpacetimeModel::BianchiII(
                    BianchiII::new(a.clone(), b.clone(), HeisenbergSpin::new(0).unwrap(), unit_window(), None, None)
                        .map_err(|e| e.to_string())?,
                );
                let p = random_point(rng);
                let numeric = ahat_density_at(&model, &p, default_step()).map_err(|e| e.to_string())?;
                let closed = ahat_density_closed_bianchi2(a.jet(p.t), b.jet(p.t)).map_err(|e| e.to_string())?;
                let rel = (numeric - closed).abs() / (closed.abs() + 1e-12);
                if rel >= 1e-6 {
                    return Err(format!("t = {}: numeric {numeric:e}, closed {closed:e}", p.t));
                }
                Ok(())
            }),
        ),
        (
            "bianchi_ii_cancellation",
            heavy,
            Box::new(|rng| {
                let w = unit_window();
                let plateau = |rng: &mut ChaCha8Rng| {
                    plateau_profile(rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0), w, rng.gen_range(0.05..0.45))
                };
                let a = plateau(rng).map_err(|e| e.to_string())?;
                let b = plateau(rng).map_err(|e| e.to_string())?;
                let (n1, n2) = (rng.gen_range(-100..=100), rng.gen_range(-100..=100));
                let model = SpacetimeModel::BianchiII(
                    BianchiII::new(a, b, HeisenbergSpin::new(rng.gen_range(0..4)).unwrap(), w, Some(n1), Some(n2))
                        .map_err(|e| e.to_string())?,
                );
                let r = assemble_charges(&model, tol).map_err(|e| e.to_string())?;
                if (r.q_chiral - (n2 - n1) as f64).abs() >= 1e-6 {
                    return Err(format!("N = ({n1}, {n2}): Q_chir = {}", r.q_chiral));
                }
                Ok(())
            }),
        ),
    ];

    let mut outcomes = Vec::with_capacity(properties.len());
    for (index, (name, cases, mut check)) in properties.into_iter().enumerate() {
        let mut rng = property_rng(cfg.seed, index as u64);
        let mut outcome = PropertyOutcome {
            name: name.to_string(),
            cases,
            passed: 0,
            failed: 0,
            first_failure: None,
        };
        for _ in 0..cases {
            match check(&mut rng) {
                Ok(()) => outcome.passed += 1,
                Err(msg) => {
                    outcome.failed += 1;
                    outcome.first_failure.get_or_insert(msg);
                }
            }
        }
        outcomes.push(outcome);
    }
    let total_cases = outcomes.iter().map(|o| o.cases).sum();
    let total_failed = outcomes.iter().map(|o| o.failed).sum();
    SuiteReport {
        seed: cfg.seed,
        properties: outcomes,
        total_cases,
        total_failed,
        passed: total_failed == 0,
    }
}
