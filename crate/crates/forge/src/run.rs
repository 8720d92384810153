//! Command execution.

use std::f64::consts::PI;
use std::time::Instant;

use anomaly_core::charge::{assemble_charges, cross_validate_cylinder, reference_sphere_charge, ChargeReport};
use anomaly_core::flow::{branch_trace, mode_family_cylinder, projector_trace, spectral_flow};
use anomaly_core::forms::{
    ahat_density_at, bianchi2_boundary_integral, default_step, form_integral_full_grid, index_form_integral,
    SpacetimePoint,
};
use anomaly_core::models::{validate_product_structure, ModelKind, SpacetimeModel};
use anomaly_core::spectral::{circle_spectrum, eta_closed, eta_zeta_oracle, heisenberg_summary, torus_summary};
use anomaly_core::Error;

use crate::job::{BuiltModel, Command, JobSpec, UsageError};
use crate::report::{ErrorDoc, EtaEndpoint, Report, ResultPayload, Status, Versions, SCHEMA_VERSION};
use crate::suite::{run_suite, SuiteConfig};

/// Largest gap tolerated between the reduced and full-grid form integrals.
pub const FULL_GRID_TOLERANCE: f64 = 1e-4;

/// The zeta oracle is only held to its tolerance for `frac(σ + c/s)` in
/// this range (or exactly 0).
pub const ORACLE_GATED_RANGE: (f64, f64) = (0.05, 0.95);

/// Process exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CHECK_FAILED: i32 = 1;
    pub const USAGE: i32 = 2;
    pub const COMPUTATION: i32 = 3;
    pub const IO: i32 = 4;
}

/// Report plus optional CSV bytes.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: Report,
    pub csv: Option<Vec<u8>>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        match (&self.report.status, &self.report.error) {
            (Status::Ok, _) => exit::OK,
            (Status::CheckFailed, _) => exit::CHECK_FAILED,
            (Status::Error, Some(e)) if e.kind == "usage" => exit::USAGE,
            (Status::Error, _) => exit::COMPUTATION,
        }
    }
}

enum Failure {
    Usage(UsageError),
    Core(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<UsageError> for Failure {
    fn from(e: UsageError) -> Self {
        Failure::Usage(e)
    }
}

struct Computed {
    payload: ResultPayload,
    check_failed: bool,
    csv: Option<Vec<u8>>,
}

/// Runs `command` on `job`. Never panics on bad input; errors end up in
/// the report.
pub fn run(command: Command, job: &JobSpec) -> Outcome {
    let start = Instant::now();
    let mut warnings = Vec::new();
    let result = execute(command, job, &mut warnings);
    let (status, payload, error, csv) = match result {
        Ok(c) => {
            let status = if c.check_failed { Status::CheckFailed } else { Status::Ok };
            (status, Some(c.payload), None, c.csv)
        }
        Err(f) => (Status::Error, None, Some(error_doc(f)), None),
    };
    Outcome {
        report: Report {
            schema_version: SCHEMA_VERSION.to_string(),
            versions: Versions::current(),
            command,
            job: job.clone(),
            status,
            result: payload,
            error,
            warnings,
            wall_time_seconds: start.elapsed().as_secs_f64(),
        },
        csv,
    }
}

fn error_doc(f: Failure) -> ErrorDoc {
    match f {
        Failure::Usage(u) => ErrorDoc {
            kind: "usage".into(),
            message: u.message,
            pointer: Some(u.pointer),
        },
        Failure::Core(e) => {
            let kind = match e {
                Error::Parameter { .. } => "parameter",
                Error::Domain { .. } => "domain",
                Error::UnsupportedModel { .. } => "unsupported_model",
                Error::SingularMetric { .. } => "singular_metric",
                Error::Accuracy { .. } => "accuracy",
                Error::Resolution { .. } => "resolution",
                Error::Precondition(_) => "precondition",
            };
            ErrorDoc {
                kind: kind.into(),
                message: e.to_string(),
                pointer: None,
            }
        }
    }
}

fn precondition(msg: impl Into<String>) -> Failure {
    Failure::Core(Error::Precondition(msg.into()))
}

fn execute(command: Command, job: &JobSpec, warnings: &mut Vec<String>) -> Result<Computed, Failure> {
    if let Some(c) = job.command {
        if c != command {
            return Err(UsageError::new("/command", format!("job is for `{c}` but `{command}` was requested")).into());
        }
    }
    if command == Command::Suite {
        let cfg = SuiteConfig {
            seed: job.seed.unwrap_or(0),
            cases: job.options.cases,
            quadrature_tolerance: job.tolerances.quadrature,
            eta_tolerance: job.tolerances.eta_oracle,
            cutoff: job.options.cutoff,
            levels: job.options.levels,
        };
        let report = run_suite(&cfg);
        return Ok(Computed {
            check_failed: !report.passed,
            payload: ResultPayload::Suite(report),
            csv: None,
        });
    }
    let doc = job
        .model
        .as_ref()
        .ok_or_else(|| UsageError::new("/model", format!("`{command}` needs a model")))?;
    let model = match doc.build()? {
        BuiltModel::Model(m) => m,
        BuiltModel::Coincident(kind) if command == Command::Charge => {
            warnings.push("t1 = t2: the hypersurfaces coincide and every charge vanishes".into());
            return Ok(Computed {
                payload: ResultPayload::Charge {
                    charge: ChargeReport::coincident(kind),
                    cross_validation: None,
                },
                check_failed: false,
                csv: None,
            });
        }
        BuiltModel::Coincident(kind) => {
            return Err(UsageError::new(
                format!("/model/{}/window", kind.name()),
                format!("`{command}` needs t1 < t2"),
            )
            .into())
        }
    };
    let kind = model.kind();
    let needs = |ok: bool, what: &str| if ok { Ok(()) } else { Err(precondition(format!("`{command}` requires {what}, got a {} model", kind.name()))) };
    match command {
        Command::Flow => needs(kind == ModelKind::Cylinder, "a cylinder model")?,
        Command::Reference => needs(kind == ModelKind::SphereReference, "a sphere_reference model")?,
        Command::Eta | Command::Forms | Command::Validate => {
            needs(kind != ModelKind::SphereReference, "a model with a time window")?
        }
        Command::Charge | Command::Suite => {}
    }
    match command {
        Command::Charge => charge(&model, job, warnings),
        Command::Flow => flow(&model, job, warnings),
        Command::Eta => eta(&model, job, warnings),
        Command::Forms => forms(&model, job, warnings),
        Command::Validate => {
            let report = validate_product_structure(&model, job.tolerances.quadrature);
            Ok(Computed {
                check_failed: !report.passed,
                payload: ResultPayload::Validate(report),
                csv: None,
            })
        }
        Command::Reference => {
            let SpacetimeModel::SphereReference(s) = &model else { unreachable!() };
            Ok(Computed {
                payload: ResultPayload::Reference {
                    k: s.k(),
                    q_chiral: reference_sphere_charge(s.k())?,
                },
                check_failed: false,
                csv: None,
            })
        }
        Command::Suite => unreachable!(),
    }
}

fn charge(model: &SpacetimeModel, job: &JobSpec, warnings: &mut Vec<String>) -> Result<Computed, Failure> {
    let report = assemble_charges(model, job.tolerances.quadrature)?;
    if report.anomalous {
        warnings.push(format!(
            "Q_R = {} is {:e} away from an integer",
            report.q_right, report.nearest_integer_deviation
        ));
    }
    if report.partial {
        warnings.push("N(t1) or N(t2) missing: charges carry only the N-independent part".into());
    }
    let mut check_failed = false;
    let cross = match model {
        SpacetimeModel::Cylinder(_) => {
            let c = cross_validate_cylinder(model)?;
            if c.lattice_endpoint {
                warnings.push(
                    "an eigenvalue sits at zero on a hypersurface; formula and trace compared under the p_≥ convention"
                        .into(),
                );
            } else if !c.equal {
                check_failed = true;
            }
            Some(c)
        }
        _ => None,
    };
    Ok(Computed {
        payload: ResultPayload::Charge {
            charge: report,
            cross_validation: cross,
        },
        check_failed,
        csv: None,
    })
}

fn window(model: &SpacetimeModel) -> (f64, f64) {
    let w = model.window().expect("windowed model");
    (w.t1(), w.t2())
}

fn flow(model: &SpacetimeModel, job: &JobSpec, warnings: &mut Vec<String>) -> Result<Computed, Failure> {
    let (t1, t2) = window(model);
    let family = mode_family_cylinder(model)?;
    let trace = projector_trace(&family, t1, t2)?;
    let flow = spectral_flow(&family, t1, t2, job.options.samples)?;
    if trace.boundary_warning {
        warnings.push("an eigenvalue sits at zero on a hypersurface; counted as non-negative".into());
    }
    let csv = match job.output.csv_path {
        Some(_) => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["mode_index", "t", "lambda"]).map_err(csv_failure)?;
            for (k, t, lambda) in branch_trace(&family, t1, t2, job.options.samples) {
                w.write_record([k.to_string(), t.to_string(), lambda.to_string()])
                    .map_err(csv_failure)?;
            }
            Some(w.into_inner().map_err(|e| csv_failure(e.into_error().into()))?)
        }
        None => None,
    };
    let agree = trace.value == flow.value;
    Ok(Computed {
        payload: ResultPayload::Flow { trace, flow, agree },
        check_failed: !agree,
        csv,
    })
}

fn csv_failure(e: csv::Error) -> Failure {
    precondition(format!("csv encoding failed: {e}"))
}

fn eta(model: &SpacetimeModel, job: &JobSpec, warnings: &mut Vec<String>) -> Result<Computed, Failure> {
    let (t1, t2) = window(model);
    let mut endpoints = Vec::new();
    let mut check_failed = false;
    for (i, t) in [t1, t2].into_iter().enumerate() {
        let mut e = EtaEndpoint {
            t,
            closed: None,
            oracle: None,
            oracle_difference: None,
            summary: None,
            integer_offset: None,
        };
        match model {
            SpacetimeModel::Cylinder(c) => {
                let spec = circle_spectrum(c.circumference(), c.spin(), c.gauge().value(t), true)?;
                let closed = eta_closed(&spec);
                let oracle = eta_zeta_oracle(&spec, job.options.cutoff, job.options.levels)?;
                let diff = (oracle.eta - closed.eta).abs();
                let a = spec.fractional_offset();
                let gated = a == 0.0 || (ORACLE_GATED_RANGE.0..=ORACLE_GATED_RANGE.1).contains(&a);
                if !gated {
                    warnings.push(format!(
                        "t = {t}: frac(σ + c/s) = {a} is outside the oracle's accuracy range; not gated"
                    ));
                } else if diff > job.tolerances.eta_oracle {
                    check_failed = true;
                }
                e.closed = Some(closed);
                e.oracle = Some(oracle);
                e.oracle_difference = Some(diff);
            }
            SpacetimeModel::BianchiI(b) => e.summary = Some(torus_summary(b.spin())),
            SpacetimeModel::BianchiII(b) => {
                e.summary = Some(heisenberg_summary(b.a().value(t), b.b().value(t))?);
                e.integer_offset = if i == 0 { b.n1() } else { b.n2() };
            }
            SpacetimeModel::SphereReference(_) => unreachable!(),
        }
        endpoints.push(e);
    }
    Ok(Computed {
        payload: ResultPayload::Eta { endpoints },
        check_failed,
        csv: None,
    })
}

fn forms(model: &SpacetimeModel, job: &JobSpec, warnings: &mut Vec<String>) -> Result<Computed, Failure> {
    let tol = job.tolerances.quadrature;
    let (t1, t2) = window(model);
    let integral = index_form_integral(model, tol)?;
    let product = validate_product_structure(model, tol).passed;
    let reference_value = match model {
        SpacetimeModel::Cylinder(c) => {
            Some(c.circumference() / (2.0 * PI) * (c.gauge().value(t2) - c.gauge().value(t1)))
        }
        SpacetimeModel::BianchiI(_) => Some(0.0),
        SpacetimeModel::BianchiII(b) if product => Some(bianchi2_boundary_integral(
            b.a().value(t1),
            b.b().value(t1),
            b.a().value(t2),
            b.b().value(t2),
        )),
        SpacetimeModel::BianchiII(_) => {
            warnings.push("no product structure: the boundary-term formula does not apply".into());
            None
        }
        SpacetimeModel::SphereReference(_) => unreachable!(),
    };
    let mut check_failed = reference_value.is_some_and(|r| (integral.value - r).abs() > 10.0 * tol);
    let full_grid = match (job.options.grid_nodes, model) {
        (Some(n), SpacetimeModel::BianchiI(_) | SpacetimeModel::BianchiII(_)) => {
            let g = form_integral_full_grid(model, n, tol)?;
            check_failed |= (g.value - integral.value).abs() > FULL_GRID_TOLERANCE;
            Some(g)
        }
        (Some(_), _) => {
            warnings.push("grid_nodes ignored: the cylinder integral is one-dimensional".into());
            None
        }
        (None, _) => None,
    };
    let csv = match job.output.csv_path {
        Some(_) => Some(density_csv(model, t1, t2, job.options.samples)?),
        None => None,
    };
    Ok(Computed {
        payload: ResultPayload::Forms {
            integral,
            reference_value,
            full_grid,
        },
        check_failed,
        csv,
    })
}

/// `t, density`: the `dt∧dθ` coefficient of `ch` on the cylinder, the
/// `dt∧dx∧dy∧dz` coefficient of `Â` at the domain centre otherwise.
fn density_csv(model: &SpacetimeModel, t1: f64, t2: f64, samples: usize) -> Result<Vec<u8>, Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["t", "density"]).map_err(csv_failure)?;
    let step = default_step();
    for i in 0..samples {
        let t = t1 + (t2 - t1) * i as f64 / (samples - 1) as f64;
        let d = match model {
            SpacetimeModel::Cylinder(c) => c.gauge().derivative(t) / (2.0 * PI),
            _ => ahat_density_at(model, &SpacetimePoint::centre(t), step)?,
        };
        w.write_record([t.to_string(), d.to_string()]).map_err(csv_failure)?;
    }
    w.into_inner().map_err(|e| csv_failure(e.into_error().into()))
}
