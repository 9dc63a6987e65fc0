use std::collections::BTreeMap;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::exact_arith::Polynomial;

use super::{Certificate, CertificateKind};

pub const REPORT_SCHEMA: &str = "g2cert-report/1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    /// A proving certificate verified and nothing was left out of scope.
    Obstructed,
    /// Proving certificates cover part of the parameter space; the rest is
    /// out of scope (possibly with sampling evidence).
    PartiallyOutOfScope,
    OutOfScope,
    DataNotShipped,
    NotObstructed,
    Failed,
}

impl Outcome {
    pub fn label(self) -> &'static str {
        match self {
            Outcome::Obstructed => "obstructed",
            Outcome::PartiallyOutOfScope => "partially out of scope",
            Outcome::OutOfScope => "out of scope",
            Outcome::DataNotShipped => "data not shipped",
            Outcome::NotObstructed => "not obstructed",
            Outcome::Failed => "failed",
        }
    }

    /// Obstructed or explicitly out of scope.
    pub fn is_accounted(self) -> bool {
        !matches!(self, Outcome::NotObstructed | Outcome::Failed)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryReport {
    pub id: String,
    pub name: String,
    pub outcome: Outcome,
    /// λ(d̂α) takes negative values, so the SU(3) stage ran.
    pub reached_su3_stage: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lambda: Option<Polynomial>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub su_constraints: Vec<Polynomial>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub certificates: Vec<Certificate>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl EntryReport {
    pub fn new(id: &str, name: &str) -> Self {
        EntryReport {
            id: id.to_string(),
            name: name.to_string(),
            outcome: Outcome::NotObstructed,
            reached_su3_stage: false,
            lambda: None,
            su_constraints: Vec::new(),
            certificates: Vec::new(),
            notes: Vec::new(),
            error: None,
        }
    }

    pub fn failed(id: &str, name: &str, err: impl std::fmt::Display) -> Self {
        EntryReport {
            outcome: Outcome::Failed,
            error: Some(err.to_string()),
            ..EntryReport::new(id, name)
        }
    }

    pub fn all_verified(&self) -> bool {
        self.outcome != Outcome::Failed && self.certificates.iter().all(|c| c.verified)
    }

    pub fn has_proving_certificate(&self) -> bool {
        self.certificates
            .iter()
            .any(|c| c.verified && c.kind.is_proving())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub seed: u64,
    pub samples: u64,
    pub entries: Vec<EntryReport>,
    /// Wall-clock milliseconds per entry; excluded from comparisons.
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub timing_ms: BTreeMap<String, u64>,
}

impl Report {
    pub fn new(seed: u64, samples: u64) -> Self {
        Report {
            schema: REPORT_SCHEMA.to_string(),
            seed,
            samples,
            entries: Vec::new(),
            timing_ms: BTreeMap::new(),
        }
    }

    pub fn all_verified(&self) -> bool {
        self.entries.iter().all(EntryReport::all_verified)
    }

    pub fn entry(&self, id: &str) -> Option<&EntryReport> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn without_timing(&self) -> Report {
        Report {
            timing_ms: BTreeMap::new(),
            ..self.clone()
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> serde_json::Result<Report> {
        serde_json::from_str(text)
    }

    pub fn to_markdown(&self) -> String {
        let mut md = String::new();
        let _ = writeln!(md, "# Obstruction report\n");
        let _ = writeln!(
            md,
            "seed `{}`, samples per sampled step `{}`\n",
            self.seed, self.samples
        );
        let _ = writeln!(
            md,
            "| id | algebra | outcome | SU(3) stage | certificates |"
        );
        let _ = writeln!(md, "|---|---|---|---|---|");
        for e in &self.entries {
            let certs: Vec<String> = e
                .certificates
                .iter()
                .map(|c| {
                    let mark = if c.verified { "" } else { " (unverified)" };
                    format!("{}{}", describe(&c.kind), mark)
                })
                .collect();
            let _ = writeln!(
                md,
                "| {} | `{}` | {} | {} | {} |",
                e.id,
                e.name,
                e.outcome.label(),
                if e.reached_su3_stage { "yes" } else { "no" },
                certs.join("; ")
            );
        }
        for e in &self.entries {
            if e.notes.is_empty() && e.error.is_none() && e.lambda.is_none() {
                continue;
            }
            let _ = writeln!(md, "\n## {}\n", e.id);
            if let Some(l) = &e.lambda {
                let _ = writeln!(md, "- λ(d̂α) = `{l}`");
            }
            for c in &e.su_constraints {
                let _ = writeln!(md, "- strong unimodularity: `{c} = 0`");
            }
            for n in &e.notes {
                let _ = writeln!(md, "- {n}");
            }
            if let Some(err) = &e.error {
                let _ = writeln!(md, "- **error**: {err}");
            }
        }
        if !self.timing_ms.is_empty() {
            let _ = writeln!(md, "\n## Timing (ms)\n");
            for (k, v) in &self.timing_ms {
                let _ = writeln!(md, "- {k}: {v}");
            }
        }
        md
    }
}

fn describe(k: &CertificateKind) -> String {
    match k {
        CertificateKind::ZeroDiagonal { indices } => format!("b(e_i,e_i) = 0 for i in {indices:?}"),
        CertificateKind::LambdaIdenticallyZero => "λ ≡ 0".into(),
        CertificateKind::LambdaNonNegative { .. } => "λ ≥ 0 (witness)".into(),
        CertificateKind::NullDirection { index, .. } => format!("h(e{index},e{index}) ≡ 0"),
        CertificateKind::SignProduct { i, j, .. } => format!("h{i}{i}·h{j}{j} ≤ 0"),
        CertificateKind::GaugeNull(g) => {
            format!("gauge null pair ({}, {})", g.null_pair[0], g.null_pair[1])
        }
        CertificateKind::SampledNoSu3(s) => {
            format!(
                "sampled, non-proving: {} passes / {} samples (seed {})",
                s.passes, s.accepted, s.seed
            )
        }
    }
}
