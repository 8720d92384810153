//! Acceptance gate. Prints one line per criterion and exits nonzero if any
//! fails. Tolerances and case counts are fixed here on purpose.

use std::f64::consts::PI;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anomaly_core::charge::{assemble_charges, reference_sphere_charge, ChargeReport};
use anomaly_core::flow::{mode_family_cylinder, projector_trace};
use anomaly_core::forms::{ahat_density_at, ahat_density_closed_bianchi2, default_step, index_form_integral};
use anomaly_core::models::{
    plateau_profile, BianchiI, BianchiII, CircleSpin, Cylinder, HeisenbergSpin, Jet, SpacetimeModel, TimeWindow,
    TorusSpin,
};
use anomaly_core::spectral::{circle_spectrum, eta_closed, eta_zeta_oracle, ArithmeticSpectrum};
use anomaly_forge::suite::{property_rng, random_point, random_polynomial, unit_window, CylinderCase};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_240_501;
const QUADRATURE_TOL: f64 = 1e-9;
const INTEGRALITY_TOL: f64 = 1e-8;
const HURWITZ_TOL: f64 = 1e-12;
const ETA_ORACLE_TOL: f64 = 1e-6;
const DENSITY_TOL: f64 = 1e-8;
const JET_RELATIVE_TOL: f64 = 1e-6;
const INTEGRAL_TOL: f64 = 1e-8;
const CANCELLATION_TOL: f64 = 1e-6;
const EXAMPLE_BUDGET: Duration = Duration::from_secs(1);
const SUITE_BUDGET: Duration = Duration::from_secs(30);

type Verdict = Result<String, String>;

fn rng(criterion: u64) -> ChaCha8Rng {
    property_rng(SEED, criterion)
}

fn cylinder_0_3_to_2_7(spin: CircleSpin) -> SpacetimeModel {
    let w = unit_window();
    let gauge = plateau_profile(0.3, 2.7, w, 0.25).unwrap();
    SpacetimeModel::Cylinder(Cylinder::new(2.0 * PI, spin, gauge, w).unwrap())
}

fn plateau_cylinder(spin: CircleSpin, want: f64) -> Verdict {
    let start = Instant::now();
    let model = cylinder_0_3_to_2_7(spin);
    let r = assemble_charges(&model, QUADRATURE_TOL).map_err(|e| e.to_string())?;
    let trace = projector_trace(&mode_family_cylinder(&model).map_err(|e| e.to_string())?, 0.0, 1.0)
        .map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let detail = format!(
        "Q_chir = {}, Q_R = {}, oracle = {}, {:.1} ms",
        r.q_chiral,
        r.q_right,
        trace.value,
        elapsed.as_secs_f64() * 1e3
    );
    let exact = r.q_chiral == want && r.q_right == trace.value as f64 && r.oracle_value == Some(trace.value);
    if exact && elapsed < EXAMPLE_BUDGET {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_cylinders() -> Verdict {
    let mut rng = rng(3);
    let start = Instant::now();
    let (mut integral, mut agree, mut spins) = (0, 0, [0, 0]);
    for _ in 0..500 {
        let case = CylinderCase::random(&mut rng);
        spins[usize::from(case.spin == CircleSpin::Nontrivial)] += 1;
        let r = assemble_charges(&case.model(), QUADRATURE_TOL).map_err(|e| e.to_string())?;
        if r.nearest_integer_deviation < INTEGRALITY_TOL {
            integral += 1;
        }
        if r.oracle_value == Some(r.q_right.round() as i64) {
            agree += 1;
        }
    }
    let elapsed = start.elapsed();
    let detail = format!(
        "integer {integral}/500, oracle {agree}/500, spins {}+{}, {:.2} s",
        spins[0],
        spins[1],
        elapsed.as_secs_f64()
    );
    if integral == 500 && agree == 500 && elapsed < SUITE_BUDGET {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn hurwitz() -> Verdict {
    let mut rng = rng(4);
    let mut worst: f64 = 0.0;
    for _ in 0..1000 {
        let l: f64 = rng.gen_range(1.0..10.0);
        let a1: f64 = rng.gen_range(-5.0..5.0);
        let x = l * a1 / (2.0 * PI);
        let e = eta_closed(&circle_spectrum(l, CircleSpin::Trivial, a1, true).map_err(|e| e.to_string())?);
        let lhs = 2.0 * x + f64::from(e.h) + e.eta;
        worst = worst.max((lhs - (2.0 * x.floor() + 1.0)).abs());
    }
    let mut oracle_worst: f64 = 0.0;
    for _ in 0..100 {
        let s: f64 = rng.gen_range(0.2..5.0);
        let sigma = if rng.gen_bool(0.5) { 0.5 } else { 0.0 };
        let a: f64 = rng.gen_range(0.05..0.95);
        let k: i32 = rng.gen_range(-3..=3);
        let spec = ArithmeticSpectrum::new(s, sigma, s * (a - sigma + f64::from(k))).map_err(|e| e.to_string())?;
        let z = eta_zeta_oracle(&spec, 64, 7).map_err(|e| e.to_string())?;
        oracle_worst = oracle_worst.max((z.eta - eta_closed(&spec).eta).abs());
    }
    let detail = format!("identity residual {worst:.2e} (1000), oracle residual {oracle_worst:.2e} (100)");
    if worst <= HURWITZ_TOL && oracle_worst <= ETA_ORACLE_TOL {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bianchi_i() -> Verdict {
    let mut rng = rng(5);
    let mut worst: f64 = 0.0;
    let mut charges = Vec::new();
    for i in 0..100 {
        let scales = [
            random_polynomial(&mut rng, 1.0),
            random_polynomial(&mut rng, 1.2),
            random_polynomial(&mut rng, 0.9),
        ];
        let spin = TorusSpin::new(rng.gen_range(0..8)).unwrap();
        let model = SpacetimeModel::BianchiI(BianchiI::new(scales, spin, unit_window()).map_err(|e| e.to_string())?);
        let d = ahat_density_at(&model, &random_point(&mut rng), default_step()).map_err(|e| e.to_string())?;
        worst = worst.max(d.abs());
        if i % 10 == 0 {
            let w = unit_window();
            let plateau = |rng: &mut ChaCha8Rng| plateau_profile(rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0), w, 0.2);
            let scales = [plateau(&mut rng).unwrap(), plateau(&mut rng).unwrap(), plateau(&mut rng).unwrap()];
            let m = SpacetimeModel::BianchiI(BianchiI::new(scales, spin, w).unwrap());
            let r = assemble_charges(&m, QUADRATURE_TOL).map_err(|e| e.to_string())?;
            charges.push((r.q_chiral, r.nearest_integer_deviation));
        }
    }
    let max_q = charges.iter().fold(0.0f64, |m, (q, _)| m.max(q.abs()));
    let rounds_to_zero = charges.iter().all(|&(q, dev)| q.round() == 0.0 && dev < INTEGRALITY_TOL);
    let detail = format!("max |density| {worst:.2e} (100 points), max |Q_chir| {max_q:.1e} ({} models)", charges.len());
    if worst < DENSITY_TOL && rounds_to_zero {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bianchi_ii() -> Verdict {
    let mut rng = rng(6);
    let w = unit_window();
    let mut worst_rel: f64 = 0.0;
    for _ in 0..100 {
        let (a, b) = (random_polynomial(&mut rng, 1.1), random_polynomial(&mut rng, 1.0));
        let model = SpacetimeModel::BianchiII(
            BianchiII::new(a.clone(), b.clone(), HeisenbergSpin::new(0).unwrap(), w, None, None)
                .map_err(|e| e.to_string())?,
        );
        let p = random_point(&mut rng);
        let numeric = ahat_density_at(&model, &p, default_step()).map_err(|e| e.to_string())?;
        let closed: f64 = ahat_density_closed_bianchi2(a.jet(p.t), b.jet(p.t)).map_err(|e| e.to_string())?;
        worst_rel = worst_rel.max((numeric - closed).abs() / closed.abs().max(f64::MIN_POSITIVE));
    }
    // Constant jets have no curvature at all.
    let flat = ahat_density_closed_bianchi2(Jet { value: 1.0, d1: 0.0, d2: 0.0 }, Jet { value: 2.0, d1: 0.0, d2: 0.0 })
        .map_err(|e| e.to_string())?;

    let model = SpacetimeModel::BianchiII(
        BianchiII::new(
            plateau_profile(1.0, 1.0, w, 0.2).unwrap(),
            plateau_profile(1.0, 2.0, w, 0.2).unwrap(),
            HeisenbergSpin::new(0).unwrap(),
            w,
            None,
            None,
        )
        .unwrap(),
    );
    let integral = index_form_integral(&model, QUADRATURE_TOL).map_err(|e| e.to_string())?.value;
    let want = -15.0 / (192.0 * PI * PI);
    let integral_err = (integral - want).abs();

    let mut cancel_worst: f64 = 0.0;
    for _ in 0..10 {
        let plateau =
            |rng: &mut ChaCha8Rng| plateau_profile(rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0), w, rng.gen_range(0.05..0.45));
        let (n1, n2) = (rng.gen_range(-1000..=1000), rng.gen_range(-1000..=1000));
        let model = SpacetimeModel::BianchiII(
            BianchiII::new(
                plateau(&mut rng).unwrap(),
                plateau(&mut rng).unwrap(),
                HeisenbergSpin::new(rng.gen_range(0..4)).unwrap(),
                w,
                Some(n1),
                Some(n2),
            )
            .unwrap(),
        );
        let r = assemble_charges(&model, QUADRATURE_TOL).map_err(|e| e.to_string())?;
        cancel_worst = cancel_worst.max((r.q_chiral - (n2 - n1) as f64).abs());
    }
    let detail = format!(
        "jet rel. error {worst_rel:.2e} (100), integral {integral:.12e} vs {want:.12e} (err {integral_err:.1e}), cancellation {cancel_worst:.1e} (10)"
    );
    if worst_rel < JET_RELATIVE_TOL && flat == 0.0 && integral_err < INTEGRAL_TOL && cancel_worst < CANCELLATION_TOL {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn sphere() -> Verdict {
    let q1 = reference_sphere_charge(1).map_err(|e| e.to_string())?;
    let q2 = reference_sphere_charge(2).map_err(|e| e.to_string())?;
    let detail = format!("k = 1 -> {q1}, k = 2 -> {q2}");
    if q1 == -4 && q2 == 12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn conservation() -> Verdict {
    let mut rng = rng(8);
    let (mut total_ok, mut reversal_ok, mut gauge_ok) = (0, 0, 0);
    let total_zero = |r: &ChargeReport| r.q_total == 0.0 && r.q_left == -r.q_right;
    for _ in 0..50 {
        let case = CylinderCase::random(&mut rng);
        let model = case.model();
        let r = assemble_charges(&model, QUADRATURE_TOL).map_err(|e| e.to_string())?;
        total_ok += usize::from(total_zero(&r));

        let family = mode_family_cylinder(&model).map_err(|e| e.to_string())?;
        let forward = projector_trace(&family, 0.0, 1.0).map_err(|e| e.to_string())?.value;
        // Reversed profile on the same window.
        let reversed = CylinderCase { from: case.to, to: case.from, ..case };
        let back_family = mode_family_cylinder(&reversed.model()).map_err(|e| e.to_string())?;
        let backward = projector_trace(&back_family, 0.0, 1.0).map_err(|e| e.to_string())?.value;
        let swapped = projector_trace(&family, 1.0, 0.0).map_err(|e| e.to_string())?.value;
        reversal_ok += usize::from(backward == -forward && swapped == -forward);

        let m: i32 = rng.gen_range(-4..=4);
        let shifted = case.shifted(2.0 * PI / case.circumference * f64::from(m));
        let s = assemble_charges(&shifted.model(), QUADRATURE_TOL).map_err(|e| e.to_string())?;
        gauge_ok += usize::from((s.q_chiral - r.q_chiral).abs() < INTEGRALITY_TOL && total_zero(&s));
    }
    let detail = format!("Q_total = 0 {total_ok}/50, time reversal {reversal_ok}/50, gauge shift {gauge_ok}/50");
    if total_ok == 50 && reversal_ok == 50 && gauge_ok == 50 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() -> ExitCode {
    // Window sanity: the helpers all use [0, 1].
    assert_eq!(unit_window(), TimeWindow::new(0.0, 1.0).unwrap());
    let criteria: [(&str, fn() -> Verdict); 8] = [
        ("plateau cylinder, trivial spin", || plateau_cylinder(CircleSpin::Trivial, -4.0)),
        ("plateau cylinder, nontrivial spin", || plateau_cylinder(CircleSpin::Nontrivial, -6.0)),
        ("random cylinders: integrality and oracle", random_cylinders),
        ("hurwitz identity and eta oracle", hurwitz),
        ("bianchi-i vanishing", bianchi_i),
        ("bianchi-ii closed form and cancellation", bianchi_ii),
        ("sphere reference table", sphere),
        ("conservation and symmetries", conservation),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {}: {name} ({detail})", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {}: {name} ({detail})", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
