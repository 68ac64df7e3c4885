//! The fixed supply-chain ontology: five entity types, seven relation types,
//! and the domain/range of every relation.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntityType {
    Company,
    Product,
    Country,
    Capability,
    Certification,
}

impl EntityType {
    pub const ALL: [EntityType; 5] = [
        EntityType::Company,
        EntityType::Product,
        EntityType::Country,
        EntityType::Capability,
        EntityType::Certification,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityType::Company => "company",
            EntityType::Product => "product",
            EntityType::Country => "country",
            EntityType::Capability => "capability",
            EntityType::Certification => "certification",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EntityType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EntityType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::UnknownEntityType(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RelationType {
    CapabilityProduces,
    BuysFrom,
    HasCapability,
    HasCert,
    LocatedIn,
    MakesProduct,
    ComplimentaryProductTo,
}

impl RelationType {
    pub const ALL: [RelationType; 7] = [
        RelationType::CapabilityProduces,
        RelationType::BuysFrom,
        RelationType::HasCapability,
        RelationType::HasCert,
        RelationType::LocatedIn,
        RelationType::MakesProduct,
        RelationType::ComplimentaryProductTo,
    ];

    /// Number of relation types.
    pub const COUNT: usize = 7;

    pub fn as_str(self) -> &'static str {
        match self {
            RelationType::CapabilityProduces => "capability_produces",
            RelationType::BuysFrom => "buys_from",
            RelationType::HasCapability => "has_capability",
            RelationType::HasCert => "has_cert",
            RelationType::LocatedIn => "located_in",
            RelationType::MakesProduct => "makes_product",
            RelationType::ComplimentaryProductTo => "complimentary_product_to",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<RelationType> {
        RelationType::ALL.get(i).copied()
    }

    /// (domain, range) of the relation.
    pub fn signature(self) -> (EntityType, EntityType) {
        use EntityType::*;
        match self {
            RelationType::CapabilityProduces => (Capability, Product),
            RelationType::BuysFrom => (Company, Company),
            RelationType::HasCapability => (Company, Capability),
            RelationType::HasCert => (Company, Certification),
            RelationType::LocatedIn => (Company, Country),
            RelationType::MakesProduct => (Company, Product),
            RelationType::ComplimentaryProductTo => (Product, Product),
        }
    }

    pub fn domain(self) -> EntityType {
        self.signature().0
    }

    pub fn range(self) -> EntityType {
        self.signature().1
    }

    /// Relations that are deduced from other relations rather than read from tables.
    pub fn is_derived(self) -> bool {
        matches!(
            self,
            RelationType::CapabilityProduces | RelationType::ComplimentaryProductTo
        )
    }
}

impl fmt::Display for RelationType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for RelationType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        RelationType::ALL
            .into_iter()
            .find(|r| r.as_str() == s)
            .ok_or_else(|| Error::UnknownRelation(s.to_string()))
    }
}

/// Edge direction relative to a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Direction {
    /// Edges leaving the node (node is the source).
    Forward,
    /// Edges entering the node (node is the destination).
    Reverse,
}

impl Direction {
    pub const BOTH: [Direction; 2] = [Direction::Forward, Direction::Reverse];

    pub fn as_str(self) -> &'static str {
        match self {
            Direction::Forward => "fwd",
            Direction::Reverse => "rev",
        }
    }
}

/// A (relation, direction) pair. The encoder keeps one weight matrix per slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RelationSlot {
    pub relation: RelationType,
    pub direction: Direction,
}

impl RelationSlot {
    pub const COUNT: usize = RelationType::COUNT * 2;

    pub fn all() -> impl Iterator<Item = RelationSlot> {
        RelationType::ALL.into_iter().flat_map(|relation| {
            Direction::BOTH
                .into_iter()
                .map(move |direction| RelationSlot {
                    relation,
                    direction,
                })
        })
    }

    pub fn index(self) -> usize {
        self.relation.index() * 2
            + match self.direction {
                Direction::Forward => 0,
                Direction::Reverse => 1,
            }
    }

    pub fn from_index(i: usize) -> RelationSlot {
        RelationSlot {
            relation: RelationType::ALL[i / 2],
            direction: Direction::BOTH[i % 2],
        }
    }
}

/// The compiled-in ontology.
#[derive(Debug, Clone, Copy, Default)]
pub struct Ontology;

impl Ontology {
    pub fn entity_types(&self) -> &'static [EntityType] {
        &EntityType::ALL
    }

    pub fn relation_types(&self) -> &'static [RelationType] {
        &RelationType::ALL
    }

    /// Relations in which an entity type may take part, as source or destination.
    pub fn relations_for(&self, etype: EntityType) -> Vec<RelationType> {
        RelationType::ALL
            .into_iter()
            .filter(|r| r.domain() == etype || r.range() == etype)
            .collect()
    }

    pub fn allows(&self, source: EntityType, relation: RelationType, destination: EntityType) -> bool {
        relation.signature() == (source, destination)
    }

    pub fn check(
        &self,
        source: EntityType,
        relation: RelationType,
        destination: EntityType,
    ) -> Result<(), Error> {
        if self.allows(source, relation, destination) {
            Ok(())
        } else {
            Err(Error::Conformance {
                source_type: source,
                relation,
                destination_type: destination,
            })
        }
    }
}
