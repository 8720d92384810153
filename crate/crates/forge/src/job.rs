//! Job documents: parsing, defaults and model construction.

use std::fmt;
use std::path::PathBuf;

use anomaly_core::models::{
    plateau_profile, BianchiI, BianchiII, CircleSpin, Cylinder, HeisenbergSpin, ModelKind, PolynomialProfile,
    Profile, SampledProfile, SpacetimeModel, SphereReference, TimeWindow, TorusSpin,
};
use serde::{Deserialize, Serialize};

/// Job commands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Assemble all charges.
    Charge,
    /// Projector trace and spectral flow (cylinder).
    Flow,
    /// η and kernel dimensions at both hypersurfaces.
    Eta,
    /// Form integral and density samples.
    Forms,
    /// Product-structure check.
    Validate,
    /// Sphere reference value.
    Reference,
    /// Randomized invariant suite.
    Suite,
}

impl Command {
    /// Name as used on the command line and in documents.
    pub fn name(self) -> &'static str {
        match self {
            Command::Charge => "charge",
            Command::Flow => "flow",
            Command::Eta => "eta",
            Command::Forms => "forms",
            Command::Validate => "validate",
            Command::Reference => "reference",
            Command::Suite => "suite",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A parsed job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JobSpec {
    /// Must match the command given on the command line when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Command>,
    /// Not needed by `suite`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelDoc>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default)]
    pub options: Options,
}

/// Numeric tolerances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Absolute quadrature tolerance; also the product-structure tolerance
    /// and the scale of the integrality gate.
    #[serde(default = "default_quadrature")]
    pub quadrature: f64,
    /// Allowed gap between the zeta oracle and the closed-form η.
    #[serde(default = "default_eta_oracle")]
    pub eta_oracle: f64,
}

/// Default quadrature tolerance.
pub const DEFAULT_QUADRATURE_TOLERANCE: f64 = 1e-9;
/// Default η oracle tolerance.
pub const DEFAULT_ETA_ORACLE_TOLERANCE: f64 = 1e-6;

fn default_quadrature() -> f64 {
    DEFAULT_QUADRATURE_TOLERANCE
}

fn default_eta_oracle() -> f64 {
    DEFAULT_ETA_ORACLE_TOLERANCE
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            quadrature: DEFAULT_QUADRATURE_TOLERANCE,
            eta_oracle: DEFAULT_ETA_ORACLE_TOLERANCE,
        }
    }
}

/// Where results go. `--out` overrides `report_path`; with neither, the
/// report is printed.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report_path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub csv_path: Option<PathBuf>,
}

/// Command-specific knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Options {
    /// Time samples for spectral flow and CSV traces.
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Zeta oracle cutoff `K`.
    #[serde(default = "default_cutoff")]
    pub cutoff: usize,
    /// Zeta oracle Richardson levels.
    #[serde(default = "default_levels")]
    pub levels: usize,
    /// Cases per randomized property in `suite`.
    #[serde(default = "default_cases")]
    pub cases: usize,
    /// Gauss–Legendre nodes per spatial direction for the full-grid check
    /// in `forms`; skipped when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_nodes: Option<usize>,
}

fn default_samples() -> usize {
    256
}

fn default_cutoff() -> usize {
    64
}

fn default_levels() -> usize {
    7
}

fn default_cases() -> usize {
    100
}

impl Default for Options {
    fn default() -> Self {
        Self {
            samples: default_samples(),
            cutoff: default_cutoff(),
            levels: default_levels(),
            cases: default_cases(),
            grid_nodes: None,
        }
    }
}

/// `[t1, t2]`; `t1 = t2` is accepted here and only meaningful for `charge`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowDoc {
    pub t1: f64,
    pub t2: f64,
}

/// Time profile description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileDoc {
    Plateau {
        v_start: f64,
        v_end: f64,
        ramp_fraction: f64,
    },
    /// Uniform samples from `t1` to `t2`.
    Sampled { values: Vec<f64> },
    /// `Σ cᵢ (t − origin)ⁱ`
    Polynomial {
        #[serde(default)]
        origin: f64,
        coefficients: Vec<f64>,
    },
}

/// Spacetime model description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub enum ModelDoc {
    #[serde(rename = "cylinder")]
    Cylinder {
        circumference: f64,
        spin: CircleSpin,
        gauge: ProfileDoc,
        window: WindowDoc,
    },
    #[serde(rename = "bianchi_i")]
    BianchiI {
        a1: ProfileDoc,
        a2: ProfileDoc,
        a3: ProfileDoc,
        /// Torus spin structure, 0..=7.
        spin: u8,
        window: WindowDoc,
    },
    #[serde(rename = "bianchi_ii")]
    BianchiII {
        a: ProfileDoc,
        b: ProfileDoc,
        /// Heisenberg spin structure, 0..=3.
        spin: u8,
        window: WindowDoc,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n1: Option<i64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n2: Option<i64>,
    },
    #[serde(rename = "sphere_reference")]
    SphereReference { k: u32 },
}

/// A job that cannot be run as written, located by JSON pointer.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{message} (at {pointer})")]
pub struct UsageError {
    /// RFC 6901 pointer into the job document; empty for the whole document.
    pub pointer: String,
    pub message: String,
}

impl UsageError {
    pub fn new(pointer: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            pointer: pointer.into(),
            message: message.into(),
        }
    }
}

/// Parses a job document.
pub fn parse_job(text: &str) -> Result<JobSpec, UsageError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let job: JobSpec = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let pointer = json_pointer(e.path());
        UsageError::new(pointer, e.into_inner().to_string())
    })?;
    de.end().map_err(|e| UsageError::new("", e.to_string()))?;
    job.check()?;
    Ok(job)
}

fn json_pointer(path: &serde_path_to_error::Path) -> String {
    use serde_path_to_error::Segment;
    let mut out = String::new();
    for seg in path.iter() {
        out.push('/');
        match seg {
            Segment::Seq { index } => out.push_str(&index.to_string()),
            Segment::Map { key } => out.push_str(&key.replace('~', "~0").replace('/', "~1")),
            Segment::Enum { variant } => out.push_str(variant),
            Segment::Unknown => out.push('?'),
        }
    }
    out
}

impl JobSpec {
    fn check(&self) -> Result<(), UsageError> {
        let t = &self.tolerances;
        if !(t.quadrature > 0.0 && t.quadrature.is_finite()) {
            return Err(UsageError::new("/tolerances/quadrature", "must be positive"));
        }
        if !(t.eta_oracle > 0.0 && t.eta_oracle.is_finite()) {
            return Err(UsageError::new("/tolerances/eta_oracle", "must be positive"));
        }
        let o = &self.options;
        if o.samples < 2 {
            return Err(UsageError::new("/options/samples", "at least 2"));
        }
        if o.cutoff < 10 {
            return Err(UsageError::new("/options/cutoff", "at least 10"));
        }
        if !(2..=12).contains(&o.levels) {
            return Err(UsageError::new("/options/levels", "must lie in 2..=12"));
        }
        if o.grid_nodes == Some(0) {
            return Err(UsageError::new("/options/grid_nodes", "at least 1"));
        }
        Ok(())
    }
}

/// A model ready for computation, or the degenerate window case.
#[derive(Debug, Clone, PartialEq)]
pub enum BuiltModel {
    Model(SpacetimeModel),
    /// `t1 = t2`: both hypersurfaces coincide.
    Coincident(ModelKind),
}

impl ModelDoc {
    /// Model discriminant.
    pub fn kind(&self) -> ModelKind {
        match self {
            ModelDoc::Cylinder { .. } => ModelKind::Cylinder,
            ModelDoc::BianchiI { .. } => ModelKind::BianchiI,
            ModelDoc::BianchiII { .. } => ModelKind::BianchiII,
            ModelDoc::SphereReference { .. } => ModelKind::SphereReference,
        }
    }

    /// Constructs the model; construction errors point into `/model`.
    pub fn build(&self) -> Result<BuiltModel, UsageError> {
        let base = format!("/model/{}", self.kind().name());
        let window = |w: &WindowDoc| -> Result<Option<TimeWindow>, UsageError> {
            if w.t1 == w.t2 && w.t1.is_finite() {
                return Ok(None);
            }
            TimeWindow::new(w.t1, w.t2)
                .map(Some)
                .map_err(|e| UsageError::new(format!("{base}/window"), e.to_string()))
        };
        let at = |field: &str| {
            let base = base.clone();
            let field = field.to_string();
            move |e: anomaly_core::Error| UsageError::new(format!("{base}/{field}"), e.to_string())
        };
        let model = match self {
            ModelDoc::Cylinder {
                circumference,
                spin,
                gauge,
                window: w,
            } => {
                let Some(w) = window(w)? else {
                    return Ok(BuiltModel::Coincident(ModelKind::Cylinder));
                };
                let gauge = gauge.build(w).map_err(at("gauge"))?;
                SpacetimeModel::Cylinder(Cylinder::new(*circumference, *spin, gauge, w).map_err(at(""))?)
            }
            ModelDoc::BianchiI {
                a1,
                a2,
                a3,
                spin,
                window: w,
            } => {
                let Some(w) = window(w)? else {
                    return Ok(BuiltModel::Coincident(ModelKind::BianchiI));
                };
                let scales = [
                    a1.build(w).map_err(at("a1"))?,
                    a2.build(w).map_err(at("a2"))?,
                    a3.build(w).map_err(at("a3"))?,
                ];
                let spin = TorusSpin::new(*spin).map_err(at("spin"))?;
                SpacetimeModel::BianchiI(BianchiI::new(scales, spin, w).map_err(at(""))?)
            }
            ModelDoc::BianchiII {
                a,
                b,
                spin,
                window: w,
                n1,
                n2,
            } => {
                let Some(w) = window(w)? else {
                    return Ok(BuiltModel::Coincident(ModelKind::BianchiII));
                };
                let a = a.build(w).map_err(at("a"))?;
                let b = b.build(w).map_err(at("b"))?;
                let spin = HeisenbergSpin::new(*spin).map_err(at("spin"))?;
                SpacetimeModel::BianchiII(BianchiII::new(a, b, spin, w, *n1, *n2).map_err(at(""))?)
            }
            ModelDoc::SphereReference { k } => {
                SpacetimeModel::SphereReference(SphereReference::new(*k).map_err(at("k"))?)
            }
        };
        Ok(BuiltModel::Model(model))
    }
}

impl ProfileDoc {
    fn build(&self, window: TimeWindow) -> anomaly_core::Result<Profile> {
        match self {
            ProfileDoc::Plateau {
                v_start,
                v_end,
                ramp_fraction,
            } => plateau_profile(*v_start, *v_end, window, *ramp_fraction),
            ProfileDoc::Sampled { values } => Ok(Profile::Sampled(SampledProfile::new(window, values.clone())?)),
            ProfileDoc::Polynomial { origin, coefficients } => {
                Ok(Profile::Polynomial(PolynomialProfile::new(*origin, coefficients.clone())?))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_fill_in() {
        let job = parse_job(r#"{"model": {"sphere_reference": {"k": 2}}}"#).unwrap();
        assert_eq!(job.tolerances, Tolerances::default());
        assert_eq!(job.options.cutoff, 64);
        assert!(job.command.is_none());
    }

    #[test]
    fn pointer_to_bad_field() {
        let doc = r#"{"model": {"cylinder": {"circumference": 1.0, "spin": "trivial",
            "gauge": {"plateau": {"v_start": "x", "v_end": 1.0, "ramp_fraction": 0.1}},
            "window": {"t1": 0.0, "t2": 1.0}}}}"#;
        let e = parse_job(doc).unwrap_err();
        assert_eq!(e.pointer, "/model/cylinder/gauge/plateau/v_start");
    }

    #[test]
    fn unknown_fields_rejected() {
        let e = parse_job(r#"{"tolerances": {"quadrature": 1e-9, "extra": 1}}"#).unwrap_err();
        assert!(e.pointer.starts_with("/tolerances"), "{}", e.pointer);
        let e = parse_job(r#"{"model": {"sphere_reference": {"k": 1, "n": 2}}}"#).unwrap_err();
        assert!(e.pointer.starts_with("/model/sphere_reference"), "{}", e.pointer);
        assert!(parse_job(r#"{"model": {"torus": {}}}"#).is_err());
    }

    #[test]
    fn construction_errors_point_into_model() {
        let doc = r#"{"model": {"bianchi_ii": {"a": {"plateau": {"v_start": 1, "v_end": 1, "ramp_fraction": 0.7}},
            "b": {"sampled": {"values": [1, 1]}}, "spin": 0, "window": {"t1": 0, "t2": 1}}}}"#;
        let job = parse_job(doc).unwrap();
        let e = job.model.unwrap().build().unwrap_err();
        assert_eq!(e.pointer, "/model/bianchi_ii/a");
    }

    #[test]
    fn coincident_window() {
        let doc = r#"{"model": {"cylinder": {"circumference": 1.0, "spin": "nontrivial",
            "gauge": {"polynomial": {"coefficients": [0.5]}}, "window": {"t1": 2.0, "t2": 2.0}}}}"#;
        let built = parse_job(doc).unwrap().model.unwrap().build().unwrap();
        assert_eq!(built, BuiltModel::Coincident(ModelKind::Cylinder));
    }
}
