//! In-memory heterogeneous graph with per-relation forward and reverse
//! adjacency, plus the tab-separated graph file format.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::io::Write as _;
use std::ops::Deref;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ontology::{Direction, EntityType, Ontology, RelationType};

pub type EntityId = u32;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entity {
    pub id: EntityId,
    pub etype: EntityType,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Triplet {
    pub source: EntityId,
    pub relation: RelationType,
    pub destination: EntityId,
}

impl Triplet {
    pub fn new(source: EntityId, relation: RelationType, destination: EntityId) -> Self {
        Triplet {
            source,
            relation,
            destination,
        }
    }
}

/// Identity key for an entity: type plus trimmed, case-folded label.
fn identity_key(label: &str) -> String {
    label.trim().to_lowercase()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct KnowledgeGraph {
    entities: Vec<Entity>,
    index: HashMap<(EntityType, String), EntityId>,
    by_type: [Vec<EntityId>; 5],
    forward: [Vec<Vec<EntityId>>; RelationType::COUNT],
    reverse: [Vec<Vec<EntityId>>; RelationType::COUNT],
    counts: [usize; RelationType::COUNT],
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers an entity, returning the existing id when `(etype, label)`
    /// is already known.
    pub fn add_entity(&mut self, etype: EntityType, label: &str) -> Result<EntityId> {
        let trimmed = label.trim();
        if trimmed.is_empty() {
            return Err(Error::EmptyLabel);
        }
        if trimmed.contains(['\t', '\n', '\r']) {
            return Err(Error::InvalidLabel(trimmed.to_string()));
        }
        let key = (etype, identity_key(trimmed));
        if let Some(&id) = self.index.get(&key) {
            return Ok(id);
        }
        let id = self.entities.len() as EntityId;
        self.entities.push(Entity {
            id,
            etype,
            label: trimmed.to_string(),
        });
        self.index.insert(key, id);
        self.by_type[etype.index()].push(id);
        for r in 0..RelationType::COUNT {
            self.forward[r].push(Vec::new());
            self.reverse[r].push(Vec::new());
        }
        Ok(id)
    }

    pub fn lookup(&self, etype: EntityType, label: &str) -> Option<EntityId> {
        self.index.get(&(etype, identity_key(label))).copied()
    }

    /// Inserts a fact. Returns `false` when the triplet was already present.
    pub fn add_triplet(&mut self, t: Triplet) -> Result<bool> {
        let s = self.entity(t.source)?.etype;
        let d = self.entity(t.destination)?.etype;
        Ontology.check(s, t.relation, d)?;
        let r = t.relation.index();
        let fwd = &mut self.forward[r][t.source as usize];
        match fwd.binary_search(&t.destination) {
            Ok(_) => return Ok(false),
            Err(pos) => fwd.insert(pos, t.destination),
        }
        let rev = &mut self.reverse[r][t.destination as usize];
        let pos = rev.binary_search(&t.source).unwrap_err();
        rev.insert(pos, t.source);
        self.counts[r] += 1;
        Ok(true)
    }

    /// Removes a fact, returning whether it was present.
    pub fn remove_triplet(&mut self, t: Triplet) -> bool {
        let r = t.relation.index();
        let (s, d) = (t.source as usize, t.destination as usize);
        if s >= self.entities.len() || d >= self.entities.len() {
            return false;
        }
        let fwd = &mut self.forward[r][s];
        let Ok(pos) = fwd.binary_search(&t.destination) else {
            return false;
        };
        fwd.remove(pos);
        let rev = &mut self.reverse[r][d];
        let pos = rev.binary_search(&t.source).expect("adjacency out of sync");
        rev.remove(pos);
        self.counts[r] -= 1;
        true
    }

    /// Drops every triplet of one relation type.
    pub fn clear_relation(&mut self, relation: RelationType) {
        let r = relation.index();
        self.forward[r].iter_mut().for_each(Vec::clear);
        self.reverse[r].iter_mut().for_each(Vec::clear);
        self.counts[r] = 0;
    }

    pub fn entity(&self, id: EntityId) -> Result<&Entity> {
        self.entities.get(id as usize).ok_or(Error::UnknownEntity(id))
    }

    pub fn entities(&self) -> &[Entity] {
        &self.entities
    }

    pub fn entity_count(&self) -> usize {
        self.entities.len()
    }

    pub fn entity_type(&self, id: EntityId) -> EntityType {
        self.entities[id as usize].etype
    }

    /// Ids of all entities of one type, in ascending order.
    pub fn entities_of(&self, etype: EntityType) -> &[EntityId] {
        &self.by_type[etype.index()]
    }

    /// Sorted, duplicate-free neighbours of `node` along `relation`.
    pub fn neighbors(
        &self,
        node: EntityId,
        relation: RelationType,
        direction: Direction,
    ) -> Result<&[EntityId]> {
        self.entity(node)?;
        Ok(self.adjacent(node, relation, direction))
    }

    /// Unchecked variant of [`neighbors`](Self::neighbors) for hot loops.
    pub(crate) fn adjacent(
        &self,
        node: EntityId,
        relation: RelationType,
        direction: Direction,
    ) -> &[EntityId] {
        let table = match direction {
            Direction::Forward => &self.forward,
            Direction::Reverse => &self.reverse,
        };
        &table[relation.index()][node as usize]
    }

    pub fn contains(&self, t: &Triplet) -> bool {
        self.forward[t.relation.index()]
            .get(t.source as usize)
            .is_some_and(|f| f.binary_search(&t.destination).is_ok())
    }

    pub fn relation_count(&self, relation: RelationType) -> usize {
        self.counts[relation.index()]
    }

    pub fn relation_counts(&self) -> Vec<(RelationType, usize)> {
        RelationType::ALL
            .into_iter()
            .map(|r| (r, self.counts[r.index()]))
            .collect()
    }

    pub fn triplet_count(&self) -> usize {
        self.counts.iter().sum()
    }

    /// Triplets of one relation ordered by (source, destination).
    pub fn triplets_of(&self, relation: RelationType) -> impl Iterator<Item = Triplet> + '_ {
        self.forward[relation.index()]
            .iter()
            .enumerate()
            .flat_map(move |(s, dests)| {
                dests
                    .iter()
                    .map(move |&d| Triplet::new(s as EntityId, relation, d))
            })
    }

    /// All triplets ordered by (relation, source, destination).
    pub fn triplets(&self) -> impl Iterator<Item = Triplet> + '_ {
        RelationType::ALL
            .into_iter()
            .flat_map(move |r| self.triplets_of(r))
    }

    /// Copy of the graph with the same entities and no triplets.
    pub fn with_entities_only(&self) -> KnowledgeGraph {
        let mut g = self.clone();
        for r in RelationType::ALL {
            g.clear_relation(r);
        }
        g
    }

    pub fn freeze(self) -> FrozenGraph {
        FrozenGraph(Arc::new(self))
    }

    pub fn to_text(&self) -> String {
        let mut out = String::from("#entities\n");
        for e in &self.entities {
            let _ = writeln!(out, "{}\t{}\t{}", e.id, e.etype, e.label);
        }
        out.push_str("#triplets\n");
        for t in self.triplets() {
            let _ = writeln!(out, "{}\t{}\t{}", t.source, t.relation, t.destination);
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut f = fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(self.to_text().as_bytes())
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<KnowledgeGraph> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Parses the text format; `origin` is only used in error messages.
    pub fn parse(text: &str, origin: &Path) -> Result<KnowledgeGraph> {
        #[derive(PartialEq)]
        enum Section {
            None,
            Entities,
            Triplets,
        }
        let err = |line: usize, reason: String| Error::parse(origin, line, reason);
        let mut g = KnowledgeGraph::new();
        let mut section = Section::None;
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim_end_matches('\r');
            if line.is_empty() {
                continue;
            }
            match line {
                "#entities" => {
                    section = Section::Entities;
                    continue;
                }
                "#triplets" => {
                    section = Section::Triplets;
                    continue;
                }
                _ => {}
            }
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(err(
                    line_no,
                    format!("expected 3 tab-separated fields, found {}", fields.len()),
                ));
            }
            match section {
                Section::None => {
                    return Err(err(line_no, "record before any section header".into()));
                }
                Section::Entities => {
                    let id: EntityId = fields[0]
                        .parse()
                        .map_err(|_| err(line_no, format!("invalid entity id {:?}", fields[0])))?;
                    let etype: EntityType = fields[1]
                        .parse()
                        .map_err(|e: Error| err(line_no, e.to_string()))?;
                    if id as usize != g.entity_count() {
                        return Err(err(
                            line_no,
                            format!("entity id {id} out of sequence, expected {}", g.entity_count()),
                        ));
                    }
                    let got = g
                        .add_entity(etype, fields[2])
                        .map_err(|e| err(line_no, e.to_string()))?;
                    if got != id {
                        return Err(err(
                            line_no,
                            format!("duplicate entity ({etype}, {:?})", fields[2]),
                        ));
                    }
                }
                Section::Triplets => {
                    let parse_id = |s: &str| -> Result<EntityId> {
                        let id: EntityId = s
                            .parse()
                            .map_err(|_| err(line_no, format!("invalid entity id {s:?}")))?;
                        if id as usize >= g.entity_count() {
                            return Err(err(line_no, format!("undeclared entity id {id}")));
                        }
                        Ok(id)
                    };
                    let source = parse_id(fields[0])?;
                    let relation: RelationType = fields[1]
                        .parse()
                        .map_err(|e: Error| err(line_no, e.to_string()))?;
                    let destination = parse_id(fields[2])?;
                    g.add_triplet(Triplet::new(source, relation, destination))
                        .map_err(|e| err(line_no, e.to_string()))?;
                }
            }
        }
        Ok(g)
    }
}

/// Immutable, cheaply clonable graph handle. Safe to share across threads.
#[derive(Debug, Clone)]
pub struct FrozenGraph(Arc<KnowledgeGraph>);

impl FrozenGraph {
    /// Returns an owned, mutable copy.
    pub fn thaw(&self) -> KnowledgeGraph {
        (*self.0).clone()
    }
}

impl Deref for FrozenGraph {
    type Target = KnowledgeGraph;

    fn deref(&self) -> &KnowledgeGraph {
        &self.0
    }
}

impl PartialEq for FrozenGraph {
    fn eq(&self, other: &Self) -> bool {
        *self.0 == *other.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use EntityType::*;
    use RelationType::*;

    #[test]
    fn add_entity_dense_and_idempotent() {
        let mut g = KnowledgeGraph::new();
        assert_eq!(g.add_entity(Company, "General Motors").unwrap(), 0);
        assert_eq!(g.add_entity(Company, "General Motors").unwrap(), 0);
        assert_eq!(g.add_entity(Country, "Germany").unwrap(), 1);
        assert_eq!(g.add_entity(Company, "  general motors ").unwrap(), 0);
        // Same label, different type: distinct entity.
        assert_eq!(g.add_entity(Product, "General Motors").unwrap(), 2);
        assert!(matches!(g.add_entity(Company, "  "), Err(Error::EmptyLabel)));
        assert!(matches!(g.add_entity(Company, "a\tb"), Err(Error::InvalidLabel(_))));
    }

    #[test]
    fn add_triplet_rules() {
        let mut g = KnowledgeGraph::new();
        let c1 = g.add_entity(Company, "C1").unwrap();
        let c2 = g.add_entity(Company, "C2").unwrap();
        let de = g.add_entity(Country, "DE").unwrap();
        let p = g.add_entity(Product, "P").unwrap();
        assert!(g.add_triplet(Triplet::new(c1, BuysFrom, c2)).unwrap());
        assert!(!g.add_triplet(Triplet::new(c1, BuysFrom, c2)).unwrap());
        assert_eq!(g.relation_count(BuysFrom), 1);
        assert!(matches!(
            g.add_triplet(Triplet::new(de, BuysFrom, p)),
            Err(Error::Conformance { .. })
        ));
        assert!(matches!(
            g.add_triplet(Triplet::new(c1, LocatedIn, c2)),
            Err(Error::Conformance { .. })
        ));
        assert!(matches!(
            g.add_triplet(Triplet::new(c1, BuysFrom, 99)),
            Err(Error::UnknownEntity(99))
        ));
    }

    #[test]
    fn neighbors_both_directions() {
        let mut g = KnowledgeGraph::new();
        let c1 = g.add_entity(Company, "C1").unwrap();
        let c2 = g.add_entity(Company, "C2").unwrap();
        let lone = g.add_entity(Company, "C3").unwrap();
        g.add_triplet(Triplet::new(c1, BuysFrom, c2)).unwrap();
        assert_eq!(g.neighbors(c1, BuysFrom, Direction::Forward).unwrap(), &[c2]);
        assert_eq!(g.neighbors(c2, BuysFrom, Direction::Reverse).unwrap(), &[c1]);
        assert!(g.neighbors(lone, BuysFrom, Direction::Forward).unwrap().is_empty());
        assert!(matches!(
            g.neighbors(42, BuysFrom, Direction::Forward),
            Err(Error::UnknownEntity(42))
        ));
    }

    #[test]
    fn relation_counts_sum() {
        let mut g = KnowledgeGraph::new();
        assert!(g.relation_counts().iter().all(|&(_, n)| n == 0));
        let c1 = g.add_entity(Company, "C1").unwrap();
        let c2 = g.add_entity(Company, "C2").unwrap();
        g.add_triplet(Triplet::new(c1, BuysFrom, c2)).unwrap();
        for (r, n) in g.relation_counts() {
            assert_eq!(n, usize::from(r == BuysFrom));
        }
        assert_eq!(g.triplet_count(), 1);
    }

    #[test]
    fn remove_keeps_adjacency_consistent() {
        let mut g = KnowledgeGraph::new();
        let c1 = g.add_entity(Company, "C1").unwrap();
        let c2 = g.add_entity(Company, "C2").unwrap();
        let t = Triplet::new(c1, BuysFrom, c2);
        g.add_triplet(t).unwrap();
        assert!(g.remove_triplet(t));
        assert!(!g.remove_triplet(t));
        assert!(!g.contains(&t));
        assert!(g.adjacent(c2, BuysFrom, Direction::Reverse).is_empty());
        assert_eq!(g.triplet_count(), 0);
    }

    fn small() -> KnowledgeGraph {
        let mut g = KnowledgeGraph::new();
        let c1 = g.add_entity(Company, "General Motors").unwrap();
        let c2 = g.add_entity(Company, "Bill Forge").unwrap();
        let cap = g.add_entity(Capability, "Forging").unwrap();
        g.add_triplet(Triplet::new(c1, BuysFrom, c2)).unwrap();
        g.add_triplet(Triplet::new(c2, HasCapability, cap)).unwrap();
        g
    }

    #[test]
    fn text_round_trip() {
        let g = small();
        let back = KnowledgeGraph::parse(&g.to_text(), Path::new("mem")).unwrap();
        assert_eq!(back, g);
        assert_eq!(back.to_text(), g.to_text());
    }

    #[test]
    fn parse_errors_name_the_problem() {
        let text = "#entities\n0\tcompany\tA\n1\tcompany\tB\n#triplets\n0\tsells_to\t1\n";
        let e = KnowledgeGraph::parse(text, Path::new("g.tsv")).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("g.tsv:5"), "{msg}");
        assert!(msg.contains("sells_to"), "{msg}");

        let text = "#entities\n0\tcompany\tA\n#triplets\n0\tbuys_from\t7\n";
        let msg = KnowledgeGraph::parse(text, Path::new("g.tsv")).unwrap_err().to_string();
        assert!(msg.contains("undeclared entity id 7"), "{msg}");

        let text = "#entities\n0\tcompany\tA\n1\tcountry\tDE\n#triplets\n1\tlocated_in\t0\n";
        let msg = KnowledgeGraph::parse(text, Path::new("g.tsv")).unwrap_err().to_string();
        assert!(msg.contains("ontology violation"), "{msg}");

        let text = "#entities\n3\tcompany\tA\n";
        assert!(KnowledgeGraph::parse(text, Path::new("g")).is_err());
    }

    #[test]
    fn freeze_shares_reads() {
        let g = small().freeze();
        let g2 = g.clone();
        let h = std::thread::spawn(move || g2.triplet_count());
        assert_eq!(h.join().unwrap(), g.triplet_count());
        let mut thawed = g.thaw();
        thawed.clear_relation(BuysFrom);
        assert_eq!(g.relation_count(BuysFrom), 1);
    }
}
