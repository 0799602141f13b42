//! Verification reports and their canonical JSON form.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::Result;
use crate::io::{matrix_to_json, vector_to_json};
use crate::lattice::LatticeVector;
use crate::regular_op::RegularOperator;
use crate::scalar::{Scalar, Tolerance};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClaimId {
    Prop21,
    Cor22,
    Cor23,
    SynnatzschkeA,
    Counterexample,
    Gap,
}

impl ClaimId {
    pub const ALL: [ClaimId; 6] = [
        ClaimId::Prop21,
        ClaimId::Cor22,
        ClaimId::Cor23,
        ClaimId::SynnatzschkeA,
        ClaimId::Counterexample,
        ClaimId::Gap,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClaimId::Prop21 => "prop21",
            ClaimId::Cor22 => "cor22",
            ClaimId::Cor23 => "cor23",
            ClaimId::SynnatzschkeA => "synnatzschke_a",
            ClaimId::Counterexample => "counterexample",
            ClaimId::Gap => "gap",
        }
    }
}

impl std::str::FromStr for ClaimId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        ClaimId::ALL
            .into_iter()
            .find(|c| c.as_str() == s)
            .ok_or_else(|| format!("unknown claim id {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    Info,
}

/// One named check. Repeated checks with the same name are merged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub deviation: f64,
    pub exact_zero: bool,
    pub evaluations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub label: String,
    pub value: Value,
}

/// Row of the finite-model vs ℓ∞ comparison in counterexample reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastRow {
    pub quantity: String,
    pub finite_value: String,
    pub paper_linf_value: String,
    pub citation: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub claim_id: ClaimId,
    /// Rational arithmetic when `true`.
    pub exact: bool,
    pub inputs_digest: String,
    pub status: Status,
    pub max_deviation: f64,
    pub exact_zero: bool,
    pub cases: u64,
    pub checks: Vec<Check>,
    pub witnesses: Vec<Witness>,
    pub metrics: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub contrast: Vec<ContrastRow>,
    pub seed: Option<u64>,
    /// Wall-clock time. Left unset by the verifiers so that reports stay
    /// byte-identical across runs.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub runtime_ms: Option<u64>,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.status != Status::Fail
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn to_canonical_json(&self) -> String {
        let value = serde_json::to_value(self).expect("report serializes");
        canonical_json(&value)
    }

    /// Merges per-case reports of one claim into a single report.
    pub fn aggregate(
        claim: ClaimId,
        exact: bool,
        reports: &[VerificationReport],
        inputs: &Value,
        seed: Option<u64>,
    ) -> VerificationReport {
        let mut builder = ReportBuilder::new(claim, exact);
        let mut first_failure = None;
        for r in reports {
            for c in &r.checks {
                builder.push(c.clone());
            }
            for (k, v) in &r.metrics {
                let slot = builder.metrics.entry(k.clone()).or_insert(f64::NEG_INFINITY);
                *slot = slot.max(*v);
            }
            if r.status == Status::Fail && first_failure.is_none() {
                first_failure = Some(r);
            }
            if r.status == Status::Info {
                builder.info = true;
            }
        }
        if let Some(r) = first_failure.or(reports.first()) {
            builder.witnesses = r.witnesses.clone();
        }
        let mut out = builder.finish(inputs, seed);
        out.cases = reports.iter().map(|r| r.cases).sum();
        out
    }
}

/// Accumulates checks, witnesses and metrics for one report.
#[derive(Debug, Clone)]
pub struct ReportBuilder {
    claim: ClaimId,
    exact: bool,
    checks: Vec<Check>,
    witnesses: Vec<Witness>,
    metrics: BTreeMap<String, f64>,
    contrast: Vec<ContrastRow>,
    info: bool,
}

impl ReportBuilder {
    pub fn new(claim: ClaimId, exact: bool) -> Self {
        Self {
            claim,
            exact,
            checks: Vec::new(),
            witnesses: Vec::new(),
            metrics: BTreeMap::new(),
            contrast: Vec::new(),
            info: false,
        }
    }

    pub fn push(&mut self, check: Check) -> bool {
        let passed = check.passed;
        match self.checks.iter_mut().find(|c| c.name == check.name) {
            Some(c) => {
                c.passed &= check.passed;
                c.deviation = c.deviation.max(check.deviation);
                c.exact_zero &= check.exact_zero;
                c.evaluations += check.evaluations;
            }
            None => self.checks.push(check),
        }
        passed
    }

    pub fn flag(&mut self, name: &str, ok: bool) -> bool {
        self.push(Check {
            name: name.into(),
            passed: ok,
            deviation: if ok { 0.0 } else { 1.0 },
            exact_zero: ok,
            evaluations: 1,
        })
    }

    /// `lhs = rhs` entrywise.
    pub fn matrices_equal<S: Scalar>(
        &mut self,
        name: &str,
        lhs: &RegularOperator<S>,
        rhs: &RegularOperator<S>,
        tol: Tolerance,
    ) -> bool {
        let check = match lhs.max_abs_diff(rhs) {
            Ok(dev) => {
                let exact_zero = if S::EXACT { lhs == rhs } else { dev == 0.0 };
                let passed = if S::EXACT { exact_zero } else { dev <= tol.0 };
                Check { name: name.into(), passed, deviation: dev, exact_zero, evaluations: 1 }
            }
            Err(_) => shape_failure(name),
        };
        self.push(check)
    }

    pub fn vectors_equal<S: Scalar>(
        &mut self,
        name: &str,
        lhs: &LatticeVector<S>,
        rhs: &LatticeVector<S>,
        tol: Tolerance,
    ) -> bool {
        let check = match lhs.max_abs_diff(rhs) {
            Ok(dev) => {
                let exact_zero = if S::EXACT { lhs == rhs } else { dev == 0.0 };
                let passed = if S::EXACT { exact_zero } else { dev <= tol.0 };
                Check { name: name.into(), passed, deviation: dev, exact_zero, evaluations: 1 }
            }
            Err(_) => shape_failure(name),
        };
        self.push(check)
    }

    /// `lhs ≤ rhs` componentwise; the deviation is the largest excess.
    pub fn vector_le<S: Scalar>(
        &mut self,
        name: &str,
        lhs: &LatticeVector<S>,
        rhs: &LatticeVector<S>,
        tol: Tolerance,
    ) -> bool {
        let check = match lhs.try_sub(rhs) {
            Ok(diff) => {
                let excess = diff.pos_part();
                let dev = excess
                    .entries()
                    .iter()
                    .map(Scalar::to_f64)
                    .fold(0.0, f64::max);
                let exact_zero = excess.is_zero();
                let passed = if S::EXACT { exact_zero } else { dev <= tol.0 };
                Check { name: name.into(), passed, deviation: dev, exact_zero, evaluations: 1 }
            }
            Err(_) => shape_failure(name),
        };
        self.push(check)
    }

    /// `|lhs − rhs| ≤ tol`.
    pub fn floats_close(&mut self, name: &str, lhs: f64, rhs: f64, tol: f64) -> bool {
        let dev = (lhs - rhs).abs();
        self.push(Check {
            name: name.into(),
            passed: dev <= tol,
            deviation: dev,
            exact_zero: dev == 0.0,
            evaluations: 1,
        })
    }

    /// `lhs ≤ rhs + tol`.
    pub fn float_le(&mut self, name: &str, lhs: f64, rhs: f64, tol: f64) -> bool {
        let dev = (lhs - rhs).max(0.0);
        self.push(Check {
            name: name.into(),
            passed: lhs <= rhs + tol,
            deviation: dev,
            exact_zero: dev == 0.0,
            evaluations: 1,
        })
    }

    pub fn witness(&mut self, label: &str, value: Value) {
        self.witnesses.push(Witness { label: label.into(), value });
    }

    pub fn witness_matrix<S: Scalar>(&mut self, label: &str, m: &RegularOperator<S>) {
        self.witness(label, matrix_to_json(m));
    }

    pub fn witness_vector<S: Scalar>(&mut self, label: &str, v: &LatticeVector<S>) {
        self.witness(label, vector_to_json(v));
    }

    pub fn metric(&mut self, name: &str, value: f64) {
        self.metrics.insert(name.into(), value);
    }

    pub fn contrast(&mut self, row: ContrastRow) {
        self.contrast.push(row);
    }

    /// Marks the report as informational: checks still run, but the
    /// status is `info` unless one of them fails.
    pub fn informational(&mut self) {
        self.info = true;
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn finish(self, inputs: &Value, seed: Option<u64>) -> VerificationReport {
        let passed = self.checks.iter().all(|c| c.passed);
        let status = match (passed, self.info) {
            (false, _) => Status::Fail,
            (true, true) => Status::Info,
            (true, false) => Status::Pass,
        };
        VerificationReport {
            claim_id: self.claim,
            exact: self.exact,
            inputs_digest: digest(inputs),
            status,
            max_deviation: self.checks.iter().map(|c| c.deviation).fold(0.0, f64::max),
            exact_zero: self.checks.iter().all(|c| c.exact_zero),
            cases: 1,
            checks: self.checks,
            witnesses: self.witnesses,
            metrics: self.metrics,
            contrast: self.contrast,
            seed,
            runtime_ms: None,
        }
    }
}

fn shape_failure(name: &str) -> Check {
    Check {
        name: name.into(),
        passed: false,
        deviation: f64::INFINITY,
        exact_zero: false,
        evaluations: 1,
    }
}

/// SHA-256 of the canonical JSON form, hex encoded.
pub fn digest(value: &Value) -> String {
    let hash = Sha256::digest(canonical_json(value).as_bytes());
    hash.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// JSON with sorted object keys, no whitespace, and floats printed with 17
/// significant digits in exponent form. Non-finite floats become strings.
pub fn canonical_json(value: &Value) -> String {
    let mut out = String::new();
    write_canonical(value, &mut out);
    out
}

fn write_canonical(value: &Value, out: &mut String) {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if n.is_i64() || n.is_u64() {
                out.push_str(&n.to_string());
            } else {
                let f = n.as_f64().unwrap_or(f64::NAN);
                out.push_str(&format_float(f));
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("string")),
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_canonical(item, out);
            }
            out.push(']');
        }
        Value::Object(map) => {
            let mut keys: Vec<&String> = map.keys().collect();
            keys.sort();
            out.push('{');
            for (i, k) in keys.into_iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).expect("key"));
                out.push(':');
                write_canonical(&map[k], out);
            }
            out.push('}');
        }
    }
}

fn format_float(f: f64) -> String {
    if f.is_finite() {
        format!("{f:.16e}")
    } else {
        format!("\"{f}\"")
    }
}

/// Writes the canonical report to `path` through a temporary file and a
/// rename, so readers never see a partial report.
pub fn emit_report(report: &VerificationReport, path: &Path) -> Result<()> {
    write_atomically(path, &(report.to_canonical_json() + "\n"))
}

pub fn write_atomically(path: &Path, contents: &str) -> Result<()> {
    let file_name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "report".into());
    let tmp = path.with_file_name(format!(".{file_name}.tmp"));
    std::fs::write(&tmp, contents)?;
    if let Err(e) = std::fs::rename(&tmp, path) {
        let _ = std::fs::remove_file(&tmp);
        return Err(e.into());
    }
    Ok(())
}
