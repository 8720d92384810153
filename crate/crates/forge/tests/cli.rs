use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use anomaly_forge::job::ModelDoc;
use anomaly_forge::report::{ResultPayload, Status};
use anomaly_forge::{parse_job, JobSpec, Report};
use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

struct Run {
    code: i32,
    report: Option<Report>,
    stderr: String,
    dir: tempfile::TempDir,
}

fn forge(command: &str, job: &str, extra: &[&str]) -> Run {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let output = Command::new(env!("CARGO_BIN_EXE_anomaly-forge"))
        .current_dir(dir.path())
        .args([command, "--job"])
        .arg(data(job))
        .arg("--out")
        .arg(&out)
        .args(extra)
        .output()
        .unwrap();
    let report = fs::read_to_string(&out).ok().map(|s| serde_json::from_str(&s).unwrap());
    Run {
        code: output.status.code().unwrap(),
        report,
        stderr: String::from_utf8_lossy(&output.stderr).into_owned(),
        dir,
    }
}

#[test]
fn charge_plateau_cylinder() {
    let r = forge("charge", "cylinder_trivial.json", &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let report = r.report.unwrap();
    assert_eq!(report.status, Status::Ok);
    let Some(ResultPayload::Charge { charge, cross_validation }) = report.result else {
        panic!()
    };
    assert_eq!(charge.q_chiral, -4.0);
    assert_eq!(charge.oracle_value, Some(-2));
    assert!(cross_validation.unwrap().equal);
    assert_eq!(report.schema_version, anomaly_forge::SCHEMA_VERSION);
}

#[test]
fn charge_nontrivial_and_bianchi() {
    let r = forge("charge", "cylinder_nontrivial.json", &[]);
    let Some(ResultPayload::Charge { charge, .. }) = r.report.unwrap().result else { panic!() };
    assert_eq!(charge.q_chiral.round(), -6.0);

    let r = forge("charge", "bianchi_i.json", &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let Some(ResultPayload::Charge { charge, .. }) = r.report.unwrap().result else { panic!() };
    assert!(charge.q_chiral.abs() < 1e-9);

    let r = forge("charge", "bianchi_ii.json", &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let Some(ResultPayload::Charge { charge, .. }) = r.report.unwrap().result else { panic!() };
    assert!((charge.q_chiral - 4.0).abs() < 1e-6);
    assert!(!charge.partial);
}

#[test]
fn coincident_hypersurfaces_give_zero() {
    let r = forge("charge", "coincident.json", &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let report = r.report.unwrap();
    assert_eq!(report.warnings.len(), 1);
    let Some(ResultPayload::Charge { charge, .. }) = report.result else { panic!() };
    assert_eq!(charge.q_chiral, 0.0);
    // Other commands need a real window.
    assert_eq!(forge("forms", "coincident.json", &[]).code, 2);
}

#[test]
fn flow_writes_branch_csv() {
    let r = forge("flow", "flow_sampled.json", &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let Some(ResultPayload::Flow { trace, flow, agree }) = r.report.unwrap().result else { panic!() };
    assert!(agree);
    assert_eq!(trace.value, -3);
    assert_eq!(flow.crossings.len(), 3);
    let mut reader = csv::Reader::from_path(r.dir.path().join("flow.csv")).unwrap();
    assert_eq!(reader.headers().unwrap(), vec!["mode_index", "t", "lambda"]);
    let rows: Vec<_> = reader.records().map(|r| r.unwrap()).collect();
    assert!(rows.len() >= 3 * 101);
    let last: f64 = rows[100][1].parse().unwrap();
    assert_eq!(last, 2.0);
}

#[test]
fn eta_oracle_matches() {
    let r = forge("eta", "eta_cylinder.json", &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let report = r.report.unwrap();
    assert!(report.warnings.is_empty());
    let Some(ResultPayload::Eta { endpoints }) = report.result else { panic!() };
    let expected = [1.0 - 2.0 * 0.7, 1.0 - 2.0 * 0.3];
    for (e, want) in endpoints.iter().zip(expected) {
        assert!((e.closed.unwrap().eta - want).abs() < 1e-12);
        assert!(e.oracle_difference.unwrap() < 1e-6);
    }
}

#[test]
fn forms_with_full_grid_and_density_csv() {
    let r = forge("forms", "bianchi_ii_forms.json", &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let Some(ResultPayload::Forms { integral, reference_value, full_grid }) = r.report.unwrap().result else {
        panic!()
    };
    assert!((integral.value - reference_value.unwrap()).abs() < 1e-8);
    assert!((integral.value - full_grid.unwrap().value).abs() < 1e-4);
    let text = fs::read_to_string(r.dir.path().join("density.csv")).unwrap();
    assert!(text.starts_with("t,density\n"));
    assert_eq!(text.lines().count(), 34);
}

#[test]
fn failing_validation_exits_nonzero() {
    let r = forge("validate", "validate_linear.json", &[]);
    assert_eq!(r.code, 1);
    let Some(ResultPayload::Validate(v)) = r.report.unwrap().result else { panic!() };
    assert!(!v.passed);
    assert!((v.checks[0].max_derivative - 1.0).abs() < 1e-12);
}

#[test]
fn precondition_and_usage_errors() {
    // charge refuses a profile without product structure
    let r = forge("charge", "validate_linear.json", &["--seed", "1"]);
    assert_eq!(r.code, 2, "{}", r.stderr);
    assert!(r.stderr.contains("/command"));
    let r = forge("flow", "bianchi_i.json", &[]);
    assert_eq!(r.code, 2);

    let dir = tempfile::tempdir().unwrap();
    let mut doc: Value = serde_json::from_str(&fs::read_to_string(data("validate_linear.json")).unwrap()).unwrap();
    doc.as_object_mut().unwrap().remove("command");
    let path = dir.path().join("job.json");
    fs::write(&path, doc.to_string()).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_anomaly-forge"))
        .args(["charge", "--job"])
        .arg(&path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let report: Report = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report.error.unwrap().kind, "precondition");

    let out = Command::new(env!("CARGO_BIN_EXE_anomaly-forge"))
        .args(["flow", "--job"])
        .arg(data("sphere_k1.json").with_file_name("bianchi_ii.json"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn schema_violations_name_the_field() {
    for (file, pointer) in [
        ("invalid/bad_ramp_type.json", "/model/cylinder/gauge/plateau/ramp_fraction"),
        ("invalid/unknown_spin.json", "/model/cylinder/spin"),
    ] {
        let r = forge("charge", file, &[]);
        assert_eq!(r.code, 2);
        assert!(r.report.is_none());
        assert!(r.stderr.contains(pointer), "{file}: {}", r.stderr);
    }
    let r = forge("reference", "invalid/extra_field.json", &[]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("tolerence"), "{}", r.stderr);
}

#[test]
fn reference_value() {
    let r = forge("reference", "sphere_k1.json", &[]);
    assert_eq!(r.code, 0);
    let Some(ResultPayload::Reference { k, q_chiral }) = r.report.unwrap().result else { panic!() };
    assert_eq!((k, q_chiral), (1, -4));
}

#[test]
fn suite_is_deterministic() {
    let a = forge("suite", "suite_small.json", &[]);
    let b = forge("suite", "suite_small.json", &[]);
    assert_eq!(a.code, 0, "{}", a.stderr);
    let (a, b) = (a.report.unwrap(), b.report.unwrap());
    assert_eq!(a.deterministic_payload(), b.deterministic_payload());
    let Some(ResultPayload::Suite(s)) = &a.result else { panic!() };
    assert!(s.passed && s.seed == 7);

    let c = forge("suite", "suite_small.json", &["--seed", "8"]).report.unwrap();
    assert_eq!(c.job.seed, Some(8));
    assert_ne!(a.deterministic_payload(), c.deterministic_payload());
}

fn corpus() -> Vec<PathBuf> {
    let mut files: Vec<_> = fs::read_dir(data(""))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    files.sort();
    files
}

#[test]
fn corpus_round_trips() {
    let files = corpus();
    assert!(files.len() >= 10);
    for path in files {
        let text = fs::read_to_string(&path).unwrap();
        let job: JobSpec = parse_job(&text).unwrap();
        let again = parse_job(&serde_json::to_string(&job).unwrap()).unwrap();
        assert_eq!(job, again, "{}", path.display());
        // Every field the document sets survives serialization unchanged.
        let original: Value = serde_json::from_str(&text).unwrap();
        let echoed = serde_json::to_value(&job).unwrap();
        assert_subset(&original, &echoed, &path.display().to_string());
    }
}

fn assert_subset(doc: &Value, echoed: &Value, ctx: &str) {
    match (doc, echoed) {
        (Value::Object(a), Value::Object(b)) => {
            for (k, v) in a {
                assert_subset(v, b.get(k).unwrap_or_else(|| panic!("{ctx}: missing {k}")), ctx);
            }
        }
        (Value::Number(a), Value::Number(b)) => assert_eq!(a.as_f64(), b.as_f64(), "{ctx}"),
        _ => assert_eq!(doc, echoed, "{ctx}"),
    }
}

#[test]
fn reports_round_trip() {
    for (command, file) in [("charge", "cylinder_trivial.json"), ("eta", "eta_cylinder.json"), ("flow", "flow_sampled.json")] {
        let r = forge(command, file, &[]);
        let text = fs::read_to_string(r.dir.path().join("report.json")).unwrap();
        let report: Report = serde_json::from_str(&text).unwrap();
        let again: Value = serde_json::to_value(&report).unwrap();
        assert_eq!(serde_json::from_str::<Value>(&text).unwrap(), again);
    }
}

#[test]
fn schema_lists_every_command_and_model() {
    let schema: Value =
        serde_json::from_str(&fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("schema/job.schema.json")).unwrap())
            .unwrap();
    let commands = schema["properties"]["command"]["enum"].as_array().unwrap();
    for c in ["charge", "flow", "eta", "forms", "validate", "reference", "suite"] {
        assert!(commands.iter().any(|v| v == c));
        let parsed: anomaly_forge::Command = serde_json::from_value(Value::String(c.into())).unwrap();
        assert_eq!(parsed.name(), c);
    }
    let models = schema["$defs"]["model"]["properties"].as_object().unwrap();
    let docs = [
        r#"{"cylinder": {"circumference": 1, "spin": "trivial", "gauge": {"sampled": {"values": [0, 0]}}, "window": {"t1": 0, "t2": 1}}}"#,
        r#"{"bianchi_i": {"a1": {"sampled": {"values": [1, 1]}}, "a2": {"sampled": {"values": [1, 1]}}, "a3": {"sampled": {"values": [1, 1]}}, "spin": 0, "window": {"t1": 0, "t2": 1}}}"#,
        r#"{"bianchi_ii": {"a": {"sampled": {"values": [1, 1]}}, "b": {"sampled": {"values": [1, 1]}}, "spin": 0, "window": {"t1": 0, "t2": 1}}}"#,
        r#"{"sphere_reference": {"k": 1}}"#,
    ];
    assert_eq!(models.len(), docs.len());
    for d in docs {
        let m: ModelDoc = serde_json::from_str(d).unwrap();
        assert!(models.contains_key(m.kind().name()));
    }
}
