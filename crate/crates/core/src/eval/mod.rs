//! Per-relation AUC evaluation and heuristic baselines.

mod auc;
mod heuristics;
mod inference;
mod report;

pub use auc::{auc, auc_from_scores, ScoredExample};
pub use heuristics::{heuristic_scores, Heuristic, UndirectedView};
pub use inference::{embed_nodes, probabilities, score_triplets, INFERENCE_CHUNK};
pub use report::{
    emit_report, BaselineRow, EvalReport, RelationRow, ReportFormat, SplitAuc, REFERENCE_TEST_AUC,
    SNLP_REFERENCE_AUC,
};

use log::debug;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{KnowledgeGraph, Triplet};
use crate::model::ModelParams;
use crate::ontology::RelationType;
use crate::sampling::{corrupt, seeded_rng, CorruptionMode, SplitKind, TripletSplit};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalConfig {
    /// Neighbour fan-out used when encoding for evaluation.
    pub fanout: usize,
    /// Relation whose validation AUC drives model and sweep selection.
    pub target_relation: RelationType,
    pub baselines: bool,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            fanout: 10,
            target_relation: RelationType::BuysFrom,
            baselines: true,
        }
    }
}

/// Positives paired with one filtered endpoint-swap negative each.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalSet {
    pub triplets: Vec<Triplet>,
    pub labels: Vec<bool>,
}

impl EvalSet {
    pub fn build<R: Rng + ?Sized>(full: &KnowledgeGraph, positives: &[Triplet], rng: &mut R) -> Self {
        let mut set = EvalSet::default();
        for p in positives {
            set.triplets.push(*p);
            set.labels.push(true);
        }
        for p in positives {
            match corrupt(p, full, rng, CorruptionMode::EndpointSwap) {
                Ok(n) => {
                    set.triplets.push(n.triplet);
                    set.labels.push(false);
                }
                Err(e) => debug!("no evaluation negative: {e}"),
            }
        }
        set
    }

    pub fn counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&y| y).count();
        (pos, self.labels.len() - pos)
    }

    /// AUC of the model on this set, or `None` if a class is missing.
    pub fn model_auc<R: Rng + ?Sized>(
        &self,
        params: &ModelParams,
        messages: &KnowledgeGraph,
        fanout: usize,
        rng: &mut R,
    ) -> Result<Option<f64>> {
        let (pos, neg) = self.counts();
        if pos == 0 || neg == 0 {
            return Ok(None);
        }
        let scores = score_triplets(params, messages, &self.triplets, fanout, rng)?;
        auc_from_scores(&scores, &self.labels).map(Some)
    }
}

fn stream(relation: RelationType, kind: SplitKind) -> u64 {
    (relation.index() * 3 + kind as usize) as u64
}

/// Scores every split of every relation. Encoding only sees training
/// triplets as messages.
pub fn evaluate(
    params: &ModelParams,
    full: &KnowledgeGraph,
    split: &TripletSplit,
    config: &EvalConfig,
    seed: u64,
    fingerprint: &str,
) -> Result<EvalReport> {
    if params.entity_count() != full.entity_count() {
        return Err(Error::Incompatible(format!(
            "parameters cover {} entities, graph has {}",
            params.entity_count(),
            full.entity_count()
        )));
    }
    let messages = split.training_graph(full)?;
    let view = config.baselines.then(|| UndirectedView::new(&messages, RelationType::BuysFrom));
    let mut rows = Vec::new();
    let mut baselines = Vec::new();
    for relation in RelationType::ALL {
        let mut row = RelationRow {
            relation,
            train: None,
            validation: None,
            test: None,
        };
        for kind in SplitKind::ALL {
            let positives: Vec<Triplet> = split.part(kind).iter().filter(|t| t.relation == relation).copied().collect();
            let set = EvalSet::build(full, &positives, &mut seeded_rng(seed, 0xE000 + stream(relation, kind)));
            let (n_pos, n_neg) = set.counts();
            let auc = set.model_auc(params, &messages, config.fanout, &mut seeded_rng(seed, 0xF000 + stream(relation, kind)))?;
            row.set(kind, auc.map(|auc| SplitAuc { auc, n_pos, n_neg }));

            if let (Some(view), RelationType::BuysFrom, SplitKind::Test, Some(_)) = (&view, relation, kind, auc) {
                for h in Heuristic::ALL {
                    let scores: Vec<f64> = set.triplets.iter().map(|t| view.score(t.source, t.destination, h)).collect();
                    baselines.push(BaselineRow {
                        heuristic: h.as_str().to_string(),
                        relation,
                        split: kind,
                        auc: auc_from_scores(&scores, &set.labels)?,
                        n_pos,
                        n_neg,
                    });
                }
            }
        }
        rows.push(row);
    }
    Ok(EvalReport {
        fingerprint: fingerprint.to_string(),
        rows,
        baselines,
        snlp_reference_auc: SNLP_REFERENCE_AUC,
    })
}
