use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ontology::RelationType;
use crate::sampling::SplitKind;

/// Published AUC of the homogeneous heuristic-feature `buys_from` predictor (SNLP).
pub const SNLP_REFERENCE_AUC: f64 = 0.76;

/// Reference test AUCs reported on a proprietary automotive supplier dataset, kept for
/// side-by-side display only.
pub const REFERENCE_TEST_AUC: [(RelationType, f64); 7] = [
    (RelationType::MakesProduct, 0.989),
    (RelationType::HasCert, 0.430),
    (RelationType::ComplimentaryProductTo, 1.000),
    (RelationType::LocatedIn, 0.613),
    (RelationType::HasCapability, 0.564),
    (RelationType::BuysFrom, 0.877),
    (RelationType::CapabilityProduces, 1.000),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SplitAuc {
    pub auc: f64,
    pub n_pos: usize,
    pub n_neg: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelationRow {
    pub relation: RelationType,
    pub train: Option<SplitAuc>,
    pub validation: Option<SplitAuc>,
    pub test: Option<SplitAuc>,
}

impl RelationRow {
    pub fn get(&self, kind: SplitKind) -> Option<&SplitAuc> {
        match kind {
            SplitKind::Train => self.train.as_ref(),
            SplitKind::Validation => self.validation.as_ref(),
            SplitKind::Test => self.test.as_ref(),
        }
    }

    pub(crate) fn set(&mut self, kind: SplitKind, value: Option<SplitAuc>) {
        match kind {
            SplitKind::Train => self.train = value,
            SplitKind::Validation => self.validation = value,
            SplitKind::Test => self.test = value,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRow {
    pub heuristic: String,
    pub relation: RelationType,
    pub split: SplitKind,
    pub auc: f64,
    pub n_pos: usize,
    pub n_neg: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub fingerprint: String,
    pub rows: Vec<RelationRow>,
    pub baselines: Vec<BaselineRow>,
    pub snlp_reference_auc: f64,
}

impl EvalReport {
    pub fn row(&self, relation: RelationType) -> Option<&RelationRow> {
        self.rows.iter().find(|r| r.relation == relation)
    }

    pub fn auc(&self, relation: RelationType, kind: SplitKind) -> Option<f64> {
        self.row(relation)?.get(kind).map(|s| s.auc)
    }

    pub fn best_baseline(&self) -> Option<&BaselineRow> {
        self.baselines.iter().max_by(|a, b| a.auc.total_cmp(&b.auc))
    }

    /// Long format: `relation,split,auc,n_pos,n_neg`. Absent cells are omitted.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("relation,split,auc,n_pos,n_neg\n");
        for row in &self.rows {
            for kind in SplitKind::ALL {
                if let Some(s) = row.get(kind) {
                    let _ = writeln!(out, "{},{},{:.6},{},{}", row.relation, kind.as_str(), s.auc, s.n_pos, s.n_neg);
                }
            }
        }
        out
    }

    pub fn baselines_csv(&self) -> String {
        let mut out = String::from("heuristic,relation,split,auc,n_pos,n_neg\n");
        for b in &self.baselines {
            let _ = writeln!(out, "{},{},{},{:.6},{},{}", b.heuristic, b.relation, b.split.as_str(), b.auc, b.n_pos, b.n_neg);
        }
        let _ = writeln!(out, "snlp_reference,buys_from,test,{:.6},,", self.snlp_reference_auc);
        out
    }

    pub fn to_markdown(&self) -> String {
        let cell = |s: Option<&SplitAuc>| s.map_or("n/a".to_string(), |s| format!("{:.3}", s.auc));
        let mut out = String::new();
        let _ = writeln!(out, "# Link prediction AUC\n");
        let _ = writeln!(out, "config fingerprint: `{}`\n", self.fingerprint);
        let _ = writeln!(out, "| relation | train_auc | val_auc | test_auc | reference_test_auc |");
        let _ = writeln!(out, "|---|---|---|---|---|");
        for row in &self.rows {
            let reference = REFERENCE_TEST_AUC
                .iter()
                .find(|(r, _)| *r == row.relation)
                .map_or("n/a".to_string(), |(_, a)| format!("{a:.3}"));
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {} |",
                row.relation,
                cell(row.train.as_ref()),
                cell(row.validation.as_ref()),
                cell(row.test.as_ref()),
                reference
            );
        }
        let _ = writeln!(out, "\n## Baselines (undirected buys_from heuristics)\n");
        let _ = writeln!(out, "| heuristic | split | auc |");
        let _ = writeln!(out, "|---|---|---|");
        for b in &self.baselines {
            let _ = writeln!(out, "| {} | {} | {:.3} |", b.heuristic, b.split.as_str(), b.auc);
        }
        let _ = writeln!(out, "| SNLP (published reference) | test | {:.3} |", self.snlp_reference_auc);
        let _ = writeln!(
            out,
            "\nreference_test_auc: results on proprietary industrial data, not comparable to synthetic data."
        );
        out
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<EvalReport> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn render(&self, format: ReportFormat) -> Result<String> {
        Ok(match format {
            ReportFormat::Csv => self.to_csv(),
            ReportFormat::Markdown => self.to_markdown(),
            ReportFormat::Json => self.to_json()?,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Markdown,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "markdown" | "md" => Ok(ReportFormat::Markdown),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::Config(format!("unknown report format {other:?}"))),
        }
    }
}

pub fn emit_report(report: &EvalReport, path: impl AsRef<Path>, format: ReportFormat) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, report.render(format)?).map_err(|e| Error::io(path, e))
}
