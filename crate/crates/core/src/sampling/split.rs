use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use log::warn;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::seeded_rng;
use crate::error::{Error, Result};
use crate::graph::{KnowledgeGraph, Triplet};
use crate::ontology::RelationType;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SplitSpec {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
    pub seed: u64,
}

impl Default for SplitSpec {
    fn default() -> Self {
        SplitSpec {
            train: 0.7,
            validation: 0.2,
            test: 0.1,
            seed: 0,
        }
    }
}

impl SplitSpec {
    pub fn validate(&self) -> Result<()> {
        let fractions = [self.train, self.validation, self.test];
        if fractions.iter().any(|f| !(f.is_finite() && *f > 0.0)) {
            return Err(Error::Config("split fractions must be positive".into()));
        }
        if (fractions.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Config("split fractions must sum to 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum SplitKind {
    #[serde(rename = "train")]
    Train,
    #[serde(rename = "val")]
    Validation,
    #[serde(rename = "test")]
    Test,
}

impl SplitKind {
    pub const ALL: [SplitKind; 3] = [SplitKind::Train, SplitKind::Validation, SplitKind::Test];

    pub fn as_str(self) -> &'static str {
        match self {
            SplitKind::Train => "train",
            SplitKind::Validation => "val",
            SplitKind::Test => "test",
        }
    }
}

impl FromStr for SplitKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        SplitKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown split {s:?}")))
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TripletSplit {
    pub train: Vec<Triplet>,
    pub validation: Vec<Triplet>,
    pub test: Vec<Triplet>,
}

impl TripletSplit {
    pub fn part(&self, kind: SplitKind) -> &[Triplet] {
        match kind {
            SplitKind::Train => &self.train,
            SplitKind::Validation => &self.validation,
            SplitKind::Test => &self.test,
        }
    }

    fn part_mut(&mut self, kind: SplitKind) -> &mut Vec<Triplet> {
        match kind {
            SplitKind::Train => &mut self.train,
            SplitKind::Validation => &mut self.validation,
            SplitKind::Test => &mut self.test,
        }
    }

    pub fn len(&self) -> usize {
        self.train.len() + self.validation.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Graph holding only the training triplets, used as the message graph.
    pub fn training_graph(&self, full: &KnowledgeGraph) -> Result<KnowledgeGraph> {
        let mut g = full.with_entities_only();
        for &t in &self.train {
            g.add_triplet(t)?;
        }
        Ok(g)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("source_id,relation,dest_id,split\n");
        for kind in SplitKind::ALL {
            for t in self.part(kind) {
                let _ = writeln!(out, "{},{},{},{}", t.source, t.relation, t.destination, kind.as_str());
            }
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    /// Loads a split manifest. Every triplet is checked against `graph`.
    pub fn load(path: impl AsRef<Path>, graph: &KnowledgeGraph) -> Result<TripletSplit> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, "source_id,relation,dest_id,split")) => {}
            _ => return Err(Error::parse(path, 1, "missing split manifest header")),
        }
        let mut split = TripletSplit::default();
        for (i, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let err = |reason: String| Error::parse(path, i + 1, reason);
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(err(format!("expected 4 fields, found {}", fields.len())));
            }
            let source = fields[0].parse().map_err(|_| err(format!("bad id {:?}", fields[0])))?;
            let relation: RelationType = fields[1].parse().map_err(|e: Error| err(e.to_string()))?;
            let destination = fields[2].parse().map_err(|_| err(format!("bad id {:?}", fields[2])))?;
            let kind: SplitKind = fields[3].parse().map_err(|e: Error| err(e.to_string()))?;
            let t = Triplet::new(source, relation, destination);
            if !graph.contains(&t) {
                return Err(err(format!("triplet ({source}, {relation}, {destination}) is not in the graph")));
            }
            split.part_mut(kind).push(t);
        }
        Ok(split)
    }
}

/// Stratified per-relation split. Relations with fewer than three triplets go
/// wholly to training.
pub fn split_triplets(triplets: &[Triplet], spec: &SplitSpec) -> Result<TripletSplit> {
    spec.validate()?;
    if triplets.is_empty() {
        return Err(Error::Empty("cannot split an empty triplet set".into()));
    }
    let mut out = TripletSplit::default();
    for relation in RelationType::ALL {
        let mut group: Vec<Triplet> = triplets.iter().filter(|t| t.relation == relation).copied().collect();
        if group.is_empty() {
            continue;
        }
        group.sort_unstable();
        group.dedup();
        let n = group.len();
        if n < 3 {
            warn!("relation {relation} has only {n} triplet(s); all placed in train");
            out.train.extend(group);
            continue;
        }
        group.shuffle(&mut seeded_rng(spec.seed, relation.index() as u64));
        let n_train = (n as f64 * spec.train).round() as usize;
        let n_val = ((n as f64 * spec.validation).round() as usize).min(n - n_train);
        let mut it = group.into_iter();
        out.train.extend(it.by_ref().take(n_train));
        out.validation.extend(it.by_ref().take(n_val));
        out.test.extend(it);
    }
    for kind in SplitKind::ALL {
        out.part_mut(kind).sort_unstable();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    fn buys(n: u32) -> Vec<Triplet> {
        (0..n).map(|i| Triplet::new(i, RelationType::BuysFrom, i + 1)).collect()
    }

    #[test]
    fn ten_triplets() {
        let s = split_triplets(&buys(10), &SplitSpec::default()).unwrap();
        assert_eq!((s.train.len(), s.validation.len(), s.test.len()), (7, 2, 1));
    }

    #[test]
    fn deterministic_and_partition() {
        let spec = SplitSpec { seed: 9, ..Default::default() };
        let a = split_triplets(&buys(57), &spec).unwrap();
        let b = split_triplets(&buys(57), &spec).unwrap();
        assert_eq!(a, b);
        let all: HashSet<_> = a.train.iter().chain(&a.validation).chain(&a.test).collect();
        assert_eq!(all.len(), 57);
        let c = split_triplets(&buys(57), &SplitSpec { seed: 10, ..Default::default() }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn tiny_relation_goes_to_train() {
        let s = split_triplets(&buys(2), &SplitSpec::default()).unwrap();
        assert_eq!(s.train.len(), 2);
        assert!(s.validation.is_empty() && s.test.is_empty());
    }

    #[test]
    fn spec_validation() {
        let bad = SplitSpec { train: 0.7, validation: 0.2, test: 0.2, seed: 0 };
        assert!(bad.validate().is_err());
        let bad = SplitSpec { train: 1.0, validation: 0.0, test: 0.0, seed: 0 };
        assert!(bad.validate().is_err());
        assert!(split_triplets(&[], &SplitSpec::default()).is_err());
    }
}
