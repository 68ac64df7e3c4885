//! Command implementations shared by the CLI, tests and the C ABI.
//!
//! Every command writes its artifacts into an output directory and records
//! them, with the config fingerprint and a SHA-256 digest, in
//! `manifest.json` there.

use std::collections::{BTreeMap, BinaryHeap};
use std::cmp::Ordering;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use log::{info, warn};
use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::RunConfig;
use crate::derive::{derive_relations, weight_histogram, DerivationSummary};
use crate::error::{Error, Result};
use crate::eval::{embed_nodes, evaluate, EvalReport, EvalSet, ReportFormat};
use crate::graph::{EntityId, KnowledgeGraph, Triplet};
use crate::ingest::{build_graph, parse_company_table};
use crate::model::{load_checkpoint, predict_prob, save_checkpoint, Checkpoint, ModelParams};
use crate::ontology::{EntityType, RelationType};
use crate::sampling::{seeded_rng, split_triplets, TripletSplit};
use crate::synth::{generate, SynthGraph};
use crate::train::{train, TrainOutcome};

/// Candidate spaces up to this size are scored exhaustively by `predict`.
pub const EXHAUSTIVE_CANDIDATE_LIMIT: u64 = 10_000_000;
/// Number of candidates sampled when the space is larger.
pub const SAMPLED_CANDIDATES: usize = 1_000_000;

#[derive(Debug, Default, Serialize, Deserialize)]
struct Manifest {
    artifacts: BTreeMap<String, ManifestEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestEntry {
    fingerprint: String,
    sha256: String,
}

/// Output directory bound to one config fingerprint.
#[derive(Debug, Clone)]
pub struct Outputs {
    dir: PathBuf,
    fingerprint: String,
}

impl Outputs {
    pub fn new(dir: impl Into<PathBuf>, fingerprint: impl Into<String>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        Ok(Outputs {
            dir,
            fingerprint: fingerprint.into(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Writes `contents` to `name` and records it in the manifest.
    pub fn write(&self, name: &str, contents: impl AsRef<[u8]>) -> Result<PathBuf> {
        let path = self.path(name);
        std::fs::write(&path, contents.as_ref()).map_err(|e| Error::io(&path, e))?;
        self.record(name)?;
        Ok(path)
    }

    /// Records an artifact that was written by other means.
    pub fn record(&self, name: &str) -> Result<()> {
        let path = self.path(name);
        let bytes = std::fs::read(&path).map_err(|e| Error::io(&path, e))?;
        let manifest_path = self.path("manifest.json");
        let mut manifest: Manifest = match std::fs::read_to_string(&manifest_path) {
            Ok(text) => serde_json::from_str(&text).unwrap_or_default(),
            Err(_) => Manifest::default(),
        };
        manifest.artifacts.insert(
            name.to_string(),
            ManifestEntry {
                fingerprint: self.fingerprint.clone(),
                sha256: hex::encode(Sha256::digest(&bytes)),
            },
        );
        let text = serde_json::to_string_pretty(&manifest)?;
        std::fs::write(&manifest_path, text).map_err(|e| Error::io(&manifest_path, e))
    }
}

/// Entity and triplet inventories in two small tables.
pub fn graph_summary(graph: &KnowledgeGraph) -> String {
    let mut out = String::from("entity type      count\n");
    for t in EntityType::ALL {
        let _ = writeln!(out, "{:<16} {}", t.as_str(), graph.entities_of(t).len());
    }
    let _ = writeln!(out, "{:<16} {}\n", "total", graph.entity_count());
    let _ = writeln!(out, "{:<54} count", "triplet type");
    for (r, n) in graph.relation_counts() {
        let (d, g) = r.signature();
        let _ = writeln!(out, "{:<54} {n}", format!("({d}, {r}, {g})"));
    }
    let _ = writeln!(out, "{:<54} {}", "total", graph.triplet_count());
    out
}

fn require<'a>(flag: Option<&'a Path>, configured: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    flag.or(configured.as_deref())
        .ok_or_else(|| Error::Config(format!("no {what} path given (flag or config paths section)")))
}

pub fn cmd_build(config: &RunConfig, out: &Outputs, input: Option<&Path>) -> Result<KnowledgeGraph> {
    let input = require(input, &config.paths.input, "input CSV")?;
    let records = parse_company_table(input)?;
    let graph = build_graph(&records)?;
    out.write("graph.tsv", graph.to_text())?;
    Ok(graph)
}

pub fn cmd_derive(config: &RunConfig, out: &Outputs, graph: Option<&Path>) -> Result<(KnowledgeGraph, DerivationSummary)> {
    config.derive.validate()?;
    let path = require(graph, &config.paths.graph, "graph")?;
    let mut g = KnowledgeGraph::load(path)?;
    let summary = derive_relations(&mut g, &config.derive)?;
    if summary.capability_produces_added == 0 && summary.complimentary_added == 0 {
        warn!("thresholds admitted no derived edges");
    }
    out.write("graph.derived.tsv", g.to_text())?;
    out.write(
        "hist_capability_produces.csv",
        weight_histogram(&summary.capability_pairs, 1)?.to_csv(),
    )?;
    out.write(
        "hist_complimentary_product_to.csv",
        weight_histogram(&summary.product_pairs, 1)?.to_csv(),
    )?;
    Ok((g, summary))
}

pub fn make_split(graph: &KnowledgeGraph, config: &RunConfig) -> Result<TripletSplit> {
    let triplets: Vec<Triplet> = graph.triplets().collect();
    split_triplets(&triplets, &config.split)
}

pub fn cmd_split(config: &RunConfig, out: &Outputs, graph: Option<&Path>) -> Result<TripletSplit> {
    let g = KnowledgeGraph::load(require(graph, &config.paths.graph, "graph")?)?;
    let split = make_split(&g, config)?;
    out.write("split.csv", split.to_csv())?;
    Ok(split)
}

fn load_or_split(config: &RunConfig, graph: &KnowledgeGraph, split: Option<&Path>, out: &Outputs) -> Result<TripletSplit> {
    match split.or(config.paths.split.as_deref()) {
        Some(p) => TripletSplit::load(p, graph),
        None => {
            let s = make_split(graph, config)?;
            out.write("split.csv", s.to_csv())?;
            Ok(s)
        }
    }
}

pub fn cmd_train(config: &RunConfig, out: &Outputs, graph: Option<&Path>, split: Option<&Path>) -> Result<TrainOutcome> {
    config.validate()?;
    let g = KnowledgeGraph::load(require(graph, &config.paths.graph, "graph")?)?;
    let split = load_or_split(config, &g, split, out)?;
    let outcome = train(&g, &split, &config.model, &config.train, &config.eval, config.seed)?;
    let fp = config.fingerprint();
    out.write("loss.csv", outcome.loss_csv())?;
    save_checkpoint(&outcome.params, &outcome.state, Some(&fp), out.path("checkpoint_final.ckpt"))?;
    out.record("checkpoint_final.ckpt")?;
    save_checkpoint(&outcome.best_params, &outcome.best_state, Some(&fp), out.path("checkpoint_best.ckpt"))?;
    out.record("checkpoint_best.ckpt")?;
    Ok(outcome)
}

pub fn load_compatible_checkpoint(config: &RunConfig, graph: &KnowledgeGraph, path: &Path) -> Result<Checkpoint> {
    let ck = load_checkpoint(path)?;
    ck.validate(graph.entity_count(), Some(config.model.dim), Some(config.model.depth))?;
    Ok(ck)
}

pub fn write_report(out: &Outputs, report: &EvalReport) -> Result<()> {
    out.write("report.csv", report.render(ReportFormat::Csv)?)?;
    out.write("report.md", report.render(ReportFormat::Markdown)?)?;
    out.write("report.json", report.render(ReportFormat::Json)?)?;
    out.write("baselines.csv", report.baselines_csv())?;
    Ok(())
}

pub fn cmd_eval(
    config: &RunConfig,
    out: &Outputs,
    graph: Option<&Path>,
    checkpoint: Option<&Path>,
    split: Option<&Path>,
) -> Result<EvalReport> {
    config.validate()?;
    let g = KnowledgeGraph::load(require(graph, &config.paths.graph, "graph")?)?;
    let ck = load_compatible_checkpoint(config, &g, require(checkpoint, &config.paths.checkpoint, "checkpoint")?)?;
    let split = TripletSplit::load(require(split, &config.paths.split, "split manifest")?, &g)?;
    let report = evaluate(&ck.params, &g, &split, &config.eval, config.seed, &config.fingerprint())?;
    write_report(out, &report)?;
    Ok(report)
}

/// Synthetic graph, derivation, split, training and evaluation in memory.
pub fn run_experiment(config: &RunConfig) -> Result<(SynthGraph, TrainOutcome, EvalReport)> {
    config.validate()?;
    let mut synth = generate(&config.synth)?;
    derive_relations(&mut synth.graph, &config.derive)?;
    let split = make_split(&synth.graph, config)?;
    let outcome = train(&synth.graph, &split, &config.model, &config.train, &config.eval, config.seed)?;
    let report = evaluate(&outcome.params, &synth.graph, &split, &config.eval, config.seed, &config.fingerprint())?;
    Ok((synth, outcome, report))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub cooccurrence_threshold: u32,
    pub projection_threshold: u32,
    pub dim: usize,
    pub depth: usize,
    pub val_auc: f64,
    /// Position in grid enumeration order.
    pub grid_index: usize,
}

/// Leaderboard order: validation AUC descending, then lower co-occurrence
/// threshold, lower projection threshold, and grid order.
fn leaderboard_order(a: &SweepEntry, b: &SweepEntry) -> Ordering {
    b.val_auc
        .total_cmp(&a.val_auc)
        .then(a.cooccurrence_threshold.cmp(&b.cooccurrence_threshold))
        .then(a.projection_threshold.cmp(&b.projection_threshold))
        .then(a.grid_index.cmp(&b.grid_index))
}

pub fn sort_leaderboard(entries: &mut [SweepEntry]) {
    entries.sort_by(leaderboard_order);
}

pub fn leaderboard_csv(entries: &[SweepEntry]) -> String {
    let mut out = String::from("rank,cooccurrence_threshold,projection_threshold,dim,depth,val_auc\n");
    for (i, e) in entries.iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.6}",
            i + 1,
            e.cooccurrence_threshold,
            e.projection_threshold,
            e.dim,
            e.depth,
            e.val_auc
        );
    }
    out
}

/// Grid search over thresholds, `d` and `K`, selecting by validation AUC of
/// the grid's target relation. Derived relations in `base` are recomputed for
/// every threshold pair.
pub fn sweep(config: &RunConfig, base: &KnowledgeGraph) -> Result<(Vec<SweepEntry>, RunConfig)> {
    let grid = &config.sweep;
    if grid.cooccurrence_thresholds.is_empty()
        || grid.projection_thresholds.is_empty()
        || grid.dims.is_empty()
        || grid.depths.is_empty()
    {
        return Err(Error::Empty("sweep grid is empty".into()));
    }
    let mut entries = Vec::new();
    let mut configs = Vec::new();
    for &cooc in &grid.cooccurrence_thresholds {
        for &proj in &grid.projection_thresholds {
            let mut point = config.clone();
            point.derive.capability_cooccurrence_threshold = cooc;
            point.derive.projection_weight_threshold = proj;
            point.validate()?;
            let mut g = base.clone();
            derive_relations(&mut g, &point.derive)?;
            let split = make_split(&g, &point)?;
            for &dim in &grid.dims {
                for &depth in &grid.depths {
                    let mut cfg = point.clone();
                    cfg.model.dim = dim;
                    cfg.model.depth = depth;
                    cfg.validate()?;
                    let outcome = train(&g, &split, &cfg.model, &cfg.train, &cfg.eval, cfg.seed)?;
                    let positives: Vec<Triplet> = split
                        .validation
                        .iter()
                        .filter(|t| t.relation == grid.target_relation)
                        .copied()
                        .collect();
                    let messages = split.training_graph(&g)?;
                    let set = EvalSet::build(&g, &positives, &mut seeded_rng(cfg.seed, 0x5eed));
                    let val_auc = set
                        .model_auc(&outcome.params, &messages, cfg.eval.fanout, &mut seeded_rng(cfg.seed, 0x5eee))?
                        .unwrap_or(f64::NAN);
                    info!("sweep cooc={cooc} proj={proj} d={dim} K={depth}: val_auc={val_auc:.4}");
                    entries.push(SweepEntry {
                        cooccurrence_threshold: cooc,
                        projection_threshold: proj,
                        dim,
                        depth,
                        val_auc,
                        grid_index: configs.len(),
                    });
                    configs.push(cfg);
                }
            }
        }
    }
    sort_leaderboard(&mut entries);
    let best = configs[entries[0].grid_index].clone();
    Ok((entries, best))
}

pub fn cmd_sweep(config: &RunConfig, out: &Outputs, graph: Option<&Path>) -> Result<(Vec<SweepEntry>, RunConfig)> {
    let g = KnowledgeGraph::load(require(graph, &config.paths.graph, "graph")?)?;
    let (entries, best) = sweep(config, &g)?;
    out.write("leaderboard.csv", leaderboard_csv(&entries))?;
    out.write("best_config.json", serde_json::to_string_pretty(&best)?)?;
    Ok((entries, best))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub source: EntityId,
    pub destination: EntityId,
    pub probability: f64,
}

impl Eq for Prediction {}

impl Ord for Prediction {
    /// Best first: higher probability, then lower (source, destination).
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .probability
            .total_cmp(&self.probability)
            .then(self.source.cmp(&other.source))
            .then(self.destination.cmp(&other.destination))
    }
}

impl PartialOrd for Prediction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone)]
pub struct PredictionSet {
    pub relation: RelationType,
    pub predictions: Vec<Prediction>,
    pub candidate_space: u64,
    /// Number of candidates drawn when the space was too large to enumerate.
    pub sampled: Option<usize>,
}

/// Top-`k` unobserved triplets of `relation`, ranked by predicted probability.
///
/// Candidates are type-correct pairs that are not facts and not self-pairs.
/// For `complimentary_product_to` only canonical pairs (lower id first) are
/// scored.
pub fn predict<R: Rng + ?Sized>(
    params: &ModelParams,
    graph: &KnowledgeGraph,
    relation: RelationType,
    k: usize,
    fanout: usize,
    rng: &mut R,
) -> Result<PredictionSet> {
    if k < 1 {
        return Err(Error::Config("top-k must be >= 1".into()));
    }
    let sources = graph.entities_of(relation.domain());
    let dests = graph.entities_of(relation.range());
    let canonical = relation == RelationType::ComplimentaryProductTo;
    let is_candidate = |u: EntityId, v: EntityId| {
        u != v && (!canonical || u < v) && !graph.contains(&Triplet::new(u, relation, v))
    };
    let space = sources.len() as u64 * dests.len() as u64;

    let mut nodes: Vec<EntityId> = sources.to_vec();
    nodes.extend_from_slice(dests);
    let (ids, h) = embed_nodes(params, graph, &nodes, fanout, rng)?;
    let row: BTreeMap<EntityId, usize> = ids.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let r = params.relation(relation);
    let prob = |u: EntityId, v: EntityId| {
        let (a, b) = (h.row(row[&u]), h.row(row[&v]));
        predict_prob(a.iter().zip(r).zip(b).map(|((x, y), z)| x * y * z).sum())
    };

    // Max-heap by `Ord`, whose greatest element is the worst prediction kept.
    let mut heap: BinaryHeap<Prediction> = BinaryHeap::with_capacity(k + 1);
    let mut offer = |p: Prediction| {
        if heap.len() < k {
            heap.push(p);
        } else if heap.peek().is_some_and(|worst| p < *worst) {
            heap.pop();
            heap.push(p);
        }
    };
    let mut seen = 0usize;
    let sampled = if space <= EXHAUSTIVE_CANDIDATE_LIMIT {
        for &u in sources {
            for &v in dests {
                if is_candidate(u, v) {
                    seen += 1;
                    offer(Prediction { source: u, destination: v, probability: prob(u, v) });
                }
            }
        }
        None
    } else {
        let mut drawn = std::collections::HashSet::new();
        for _ in 0..SAMPLED_CANDIDATES {
            let u = sources[rng.random_range(0..sources.len())];
            let v = dests[rng.random_range(0..dests.len())];
            if is_candidate(u, v) && drawn.insert((u, v)) {
                seen += 1;
                offer(Prediction { source: u, destination: v, probability: prob(u, v) });
            }
        }
        warn!("candidate space {space} exceeds {EXHAUSTIVE_CANDIDATE_LIMIT}; sampled {SAMPLED_CANDIDATES} draws");
        Some(SAMPLED_CANDIDATES)
    };
    if seen == 0 {
        return Err(Error::Empty(format!("no candidate triplets for {relation}")));
    }
    let mut predictions = heap.into_vec();
    predictions.sort();
    Ok(PredictionSet {
        relation,
        predictions,
        candidate_space: space,
        sampled,
    })
}

pub fn predictions_csv(graph: &KnowledgeGraph, set: &PredictionSet) -> String {
    let mut out = String::from("source_id,source,relation,dest_id,destination,probability\n");
    for p in &set.predictions {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.9}",
            p.source,
            graph.entities()[p.source as usize].label,
            set.relation,
            p.destination,
            graph.entities()[p.destination as usize].label,
            p.probability
        );
    }
    out
}

pub fn cmd_predict(
    config: &RunConfig,
    out: &Outputs,
    graph: Option<&Path>,
    checkpoint: Option<&Path>,
    relation: RelationType,
    k: usize,
) -> Result<PredictionSet> {
    let g = KnowledgeGraph::load(require(graph, &config.paths.graph, "graph")?)?;
    let ck = load_compatible_checkpoint(config, &g, require(checkpoint, &config.paths.checkpoint, "checkpoint")?)?;
    let set = predict(&ck.params, &g, relation, k, config.eval.fanout, &mut seeded_rng(config.seed, 0x9e))?;
    out.write(&format!("predictions_{relation}.csv"), predictions_csv(&g, &set))?;
    Ok(set)
}

pub fn cmd_synth(config: &RunConfig, out: &Outputs) -> Result<SynthGraph> {
    let synth = generate(&config.synth)?;
    out.write("graph.tsv", synth.graph.to_text())?;
    out.write("truth.csv", synth.truth_csv())?;
    out.write("synth_config.json", serde_json::to_string_pretty(&config.synth)?)?;
    Ok(synth)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn entry(auc: f64, cooc: u32, proj: u32, idx: usize) -> SweepEntry {
        SweepEntry { cooccurrence_threshold: cooc, projection_threshold: proj, dim: 8, depth: 1, val_auc: auc, grid_index: idx }
    }

    #[test]
    fn leaderboard_tie_break() {
        let mut e = vec![entry(0.7, 3, 1, 0), entry(0.9, 2, 2, 1), entry(0.9, 2, 1, 2), entry(0.9, 1, 5, 3)];
        sort_leaderboard(&mut e);
        let order: Vec<_> = e.iter().map(|x| x.grid_index).collect();
        assert_eq!(order, vec![3, 2, 1, 0]);
        let csv = leaderboard_csv(&e);
        assert!(csv.lines().nth(1).unwrap().starts_with("1,1,5,"));
    }

    #[test]
    fn prediction_order() {
        let mut v = [
            Prediction { source: 2, destination: 1, probability: 0.5 },
            Prediction { source: 1, destination: 3, probability: 0.5 },
            Prediction { source: 9, destination: 9, probability: 0.9 },
        ];
        v.sort();
        assert_eq!(v[0].source, 9);
        assert_eq!((v[1].source, v[2].source), (1, 2));
    }

    #[test]
    fn predict_returns_every_candidate_when_k_is_large() {
        use crate::ontology::EntityType;
        let mut g = KnowledgeGraph::new();
        let cs: Vec<_> = (0..4).map(|i| g.add_entity(EntityType::Company, &format!("c{i}")).unwrap()).collect();
        g.add_triplet(Triplet::new(cs[0], RelationType::BuysFrom, cs[1])).unwrap();
        g.add_triplet(Triplet::new(cs[2], RelationType::BuysFrom, cs[3])).unwrap();
        let params = ModelParams::init(g.entity_count(), 4, 1, 1).unwrap();
        let set = predict(&params, &g, RelationType::BuysFrom, 100, 5, &mut seeded_rng(1, 0)).unwrap();
        assert_eq!(set.predictions.len(), 4 * 3 - 2);
        assert!(set.sampled.is_none());
        for p in &set.predictions {
            assert_ne!(p.source, p.destination);
            assert!(!g.contains(&Triplet::new(p.source, RelationType::BuysFrom, p.destination)));
        }
        assert!(set.predictions.windows(2).all(|w| w[0] <= w[1]));
        assert!(set.predictions.windows(2).all(|w| w[0].probability >= w[1].probability));
        assert!(predict(&params, &g, RelationType::BuysFrom, 0, 5, &mut seeded_rng(1, 0)).is_err());
    }

    #[test]
    fn manifest_records_digest() {
        let dir = tempfile::tempdir().unwrap();
        let out = Outputs::new(dir.path(), "abc").unwrap();
        out.write("a.txt", "hello").unwrap();
        out.write("b.txt", "world").unwrap();
        let m: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
        assert_eq!(m["artifacts"]["a.txt"]["fingerprint"], "abc");
        assert_eq!(
            m["artifacts"]["b.txt"]["sha256"],
            "486ea46224d1bb4fb680f34f7c9ad96a8f24ec88be73ea8e5a6c65260e9cb8a7"
        );
    }
}
