//! Seeded synthetic supply-chain graphs with planted structure.
//!
//! Every capability owns a latent set of products and is paired with one
//! complementary capability. A company's complementary products are the
//! latent products of the partners of its capabilities. `buys_from` grows by
//! preferential attachment (new company picks `m` earlier suppliers with
//! probability proportional to in-degree + 1); with probability `lambda` an
//! edge is instead rewired to a uniformly chosen earlier company whose
//! products intersect the buyer's complementary products.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{EntityId, KnowledgeGraph, Triplet};
use crate::ontology::{EntityType, RelationType};
use crate::sampling::seeded_rng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub companies: usize,
    pub products: usize,
    pub capabilities: usize,
    pub certifications: usize,
    pub countries: usize,
    /// Suppliers attached per new company.
    pub attachment_edges: usize,
    pub capabilities_per_company: f64,
    pub products_per_company: f64,
    /// Probability that a `buys_from` edge follows product complementarity.
    pub lambda: f64,
    pub holdout_fraction: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            companies: 200,
            products: 600,
            capabilities: 12,
            certifications: 5,
            countries: 20,
            attachment_edges: 4,
            capabilities_per_company: 1.0,
            products_per_company: 5.0,
            lambda: 0.9,
            holdout_fraction: 0.1,
            seed: 42,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            self.companies,
            self.products,
            self.capabilities,
            self.certifications,
            self.countries,
            self.attachment_edges,
        ];
        if counts.contains(&0) {
            return Err(Error::Config("synthetic entity counts and m must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&self.lambda) {
            return Err(Error::Config("lambda must lie in [0, 1]".into()));
        }
        if !(self.holdout_fraction > 0.0 && self.holdout_fraction < 1.0) {
            return Err(Error::Config("holdout fraction must lie in (0, 1)".into()));
        }
        if self.capabilities_per_company < 1.0 || self.products_per_company < 1.0 {
            return Err(Error::Config("per-company means must be >= 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SynthGraph {
    pub graph: KnowledgeGraph,
    /// Latent `(capability, product)` production pairs; every product appears once.
    pub truth: Vec<(EntityId, EntityId)>,
    /// Complementary capability pairs `(a, b)` with `a <= b`.
    pub complements: Vec<(EntityId, EntityId)>,
}

impl SynthGraph {
    pub fn truth_csv(&self) -> String {
        let mut out = String::from("capability,product\n");
        for &(c, p) in &self.truth {
            let cap = &self.graph.entities()[c as usize].label;
            let prod = &self.graph.entities()[p as usize].label;
            let _ = writeln!(out, "{cap},{prod}");
        }
        out
    }

    pub fn save_truth(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.truth_csv()).map_err(|e| Error::io(path, e))
    }
}

/// `1 + Binomial(n, p)` with mean `mean`, capped at `n + 1`.
fn count_around<R: Rng + ?Sized>(rng: &mut R, mean: f64, n: usize) -> usize {
    if n == 0 {
        return 1;
    }
    let p = ((mean - 1.0) / n as f64).clamp(0.0, 1.0);
    1 + (0..n).filter(|_| rng.random_bool(p)).count()
}

pub fn generate(config: &SynthConfig) -> Result<SynthGraph> {
    config.validate()?;
    let mut rng = seeded_rng(config.seed, 0x5e);
    let mut g = KnowledgeGraph::new();
    let register = |g: &mut KnowledgeGraph, etype, prefix: &str, n: usize| -> Result<Vec<EntityId>> {
        let width = n.to_string().len();
        (0..n).map(|i| g.add_entity(etype, &format!("{prefix}_{i:0width$}"))).collect()
    };
    let companies = register(&mut g, EntityType::Company, "company", config.companies)?;
    let products = register(&mut g, EntityType::Product, "product", config.products)?;
    let capabilities = register(&mut g, EntityType::Capability, "capability", config.capabilities)?;
    let certifications = register(&mut g, EntityType::Certification, "cert", config.certifications)?;
    let countries = register(&mut g, EntityType::Country, "country", config.countries)?;

    // Latent production sets: shuffled products dealt round-robin.
    let mut dealt = products.clone();
    dealt.shuffle(&mut rng);
    let mut latent: Vec<Vec<EntityId>> = vec![Vec::new(); config.capabilities];
    for (i, &p) in dealt.iter().enumerate() {
        latent[i % config.capabilities].push(p);
    }
    latent.iter_mut().for_each(|s| s.sort_unstable());
    let mut truth: Vec<(EntityId, EntityId)> = latent
        .iter()
        .enumerate()
        .flat_map(|(c, ps)| {
            let cap = capabilities[c];
            ps.iter().map(move |&p| (cap, p))
        })
        .collect();
    truth.sort_unstable();

    // Complementary capability pairing; with an odd count the last one is self-paired.
    let mut order: Vec<usize> = (0..config.capabilities).collect();
    order.shuffle(&mut rng);
    let mut partner = vec![0usize; config.capabilities];
    for pair in order.chunks(2) {
        let (a, b) = (pair[0], *pair.get(1).unwrap_or(&pair[0]));
        partner[a] = b;
        partner[b] = a;
    }
    let mut complements: Vec<(EntityId, EntityId)> = (0..config.capabilities)
        .filter(|&c| c <= partner[c])
        .map(|c| (capabilities[c], capabilities[partner[c]]))
        .collect();
    complements.sort_unstable();

    // Company attributes.
    let mut company_caps: Vec<Vec<usize>> = Vec::with_capacity(config.companies);
    let mut company_products: Vec<BTreeSet<EntityId>> = Vec::with_capacity(config.companies);
    for &c in &companies {
        let k = count_around(&mut rng, config.capabilities_per_company, config.capabilities - 1);
        let mut caps: Vec<usize> = rand::seq::index::sample(&mut rng, config.capabilities, k).into_vec();
        caps.sort_unstable();
        let pool: Vec<EntityId> = caps.iter().flat_map(|&cap| latent[cap].iter().copied()).collect();
        let n_prod = count_around(&mut rng, config.products_per_company, pool.len().saturating_sub(1));
        let made: BTreeSet<EntityId> = pool.choose_multiple(&mut rng, n_prod.min(pool.len())).copied().collect();
        for &cap in &caps {
            g.add_triplet(Triplet::new(c, RelationType::HasCapability, capabilities[cap]))?;
        }
        for &p in &made {
            g.add_triplet(Triplet::new(c, RelationType::MakesProduct, p))?;
        }
        for &cert in &certifications {
            if rng.random_bool(0.3) {
                g.add_triplet(Triplet::new(c, RelationType::HasCert, cert))?;
            }
        }
        let country = countries[rng.random_range(0..countries.len())];
        g.add_triplet(Triplet::new(c, RelationType::LocatedIn, country))?;
        company_caps.push(caps);
        company_products.push(made);
    }

    // Supplier network.
    let mut in_degree = vec![0usize; config.companies];
    for v in 1..config.companies {
        let wanted: BTreeSet<EntityId> = company_caps[v]
            .iter()
            .flat_map(|&cap| latent[partner[cap]].iter().copied())
            .collect();
        let mut chosen: Vec<usize> = Vec::new();
        for _ in 0..config.attachment_edges.min(v) {
            let mut supplier = None;
            if rng.random_bool(config.lambda) {
                let eligible: Vec<usize> = (0..v)
                    .filter(|u| !chosen.contains(u) && !company_products[*u].is_disjoint(&wanted))
                    .collect();
                supplier = eligible.choose(&mut rng).copied();
            }
            let u = match supplier {
                Some(u) => u,
                None => {
                    let total: usize = (0..v).filter(|u| !chosen.contains(u)).map(|u| in_degree[u] + 1).sum();
                    let mut ticket = rng.random_range(0..total);
                    (0..v)
                        .filter(|u| !chosen.contains(u))
                        .find(|&u| {
                            let w = in_degree[u] + 1;
                            if ticket < w {
                                true
                            } else {
                                ticket -= w;
                                false
                            }
                        })
                        .expect("ticket falls inside the total weight")
                }
            };
            chosen.push(u);
            in_degree[u] += 1;
            g.add_triplet(Triplet::new(companies[v], RelationType::BuysFrom, companies[u]))?;
        }
    }

    Ok(SynthGraph {
        graph: g,
        truth,
        complements,
    })
}

/// Removes `fraction` of the `buys_from` edges uniformly at random and
/// returns them as held-out positives.
pub fn holdout<R: Rng + ?Sized>(
    synth: &SynthGraph,
    fraction: f64,
    rng: &mut R,
) -> Result<(KnowledgeGraph, Vec<Triplet>)> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::Config("holdout fraction must lie in (0, 1)".into()));
    }
    let edges: Vec<Triplet> = synth.graph.triplets_of(RelationType::BuysFrom).collect();
    let n = (edges.len() as f64 * fraction).round() as usize;
    let mut held: Vec<Triplet> = edges.choose_multiple(rng, n).copied().collect();
    held.sort_unstable();
    let mut visible = synth.graph.clone();
    for t in &held {
        visible.remove_triplet(*t);
    }
    Ok((visible, held))
}
