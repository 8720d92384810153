//! Report documents.

use anomaly_core::charge::{ChargeReport, CrossValidation};
use anomaly_core::flow::{FlowResult, TraceResult};
use anomaly_core::forms::FormIntegral;
use anomaly_core::models::ValidationReport;
use anomaly_core::spectral::{EtaResult, SpectrumSummary, ZetaEstimate};
use serde::{Deserialize, Serialize};

use crate::job::{Command, JobSpec};
use crate::suite::SuiteReport;

/// Version of the job and report schemas.
pub const SCHEMA_VERSION: &str = "1.0.0";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Versions {
    pub anomaly_forge: String,
    pub anomaly_core: String,
}

impl Versions {
    pub fn current() -> Self {
        Self {
            anomaly_forge: env!("CARGO_PKG_VERSION").to_string(),
            anomaly_core: anomaly_core::VERSION.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    /// Computed, all checks passed.
    Ok,
    /// Computed, but a check in the result failed.
    CheckFailed,
    /// Not computed.
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorDoc {
    /// `usage`, `precondition`, `accuracy`, `unsupported_model`,
    /// `resolution`, `numeric` or `io`.
    pub kind: String,
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pointer: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: String,
    pub versions: Versions,
    pub command: Command,
    pub job: JobSpec,
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<ResultPayload>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<ErrorDoc>,
    pub warnings: Vec<String>,
    /// Excluded from determinism comparisons.
    pub wall_time_seconds: f64,
}

impl Report {
    /// Everything except the wall time, serialized; identical jobs give
    /// identical bytes.
    pub fn deterministic_payload(&self) -> String {
        let mut copy = self.clone();
        copy.wall_time_seconds = 0.0;
        serde_json::to_string(&copy).expect("reports serialize")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ResultPayload {
    Charge {
        charge: ChargeReport,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        cross_validation: Option<CrossValidation>,
    },
    Flow {
        trace: TraceResult,
        flow: FlowResult,
        agree: bool,
    },
    Eta {
        endpoints: Vec<EtaEndpoint>,
    },
    Forms {
        integral: FormIntegral,
        /// Closed-form value where one exists.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        reference_value: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        full_grid: Option<FormIntegral>,
    },
    Validate(ValidationReport),
    Reference {
        k: u32,
        q_chiral: i64,
    },
    Suite(SuiteReport),
}

/// η data at one hypersurface.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtaEndpoint {
    pub t: f64,
    /// Closed form on the conjugate circle spectrum (cylinder).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub closed: Option<EtaResult>,
    /// Zeta-continuation estimate (cylinder).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<ZetaEstimate>,
    /// `|oracle − closed|`
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle_difference: Option<f64>,
    /// Torus or Heisenberg facts.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub summary: Option<SpectrumSummary>,
    /// Supplied `N(t)` (Bianchi-II).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub integer_offset: Option<i64>,
}
