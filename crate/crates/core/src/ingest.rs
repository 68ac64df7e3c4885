//! Company table ingestion: one CSV row per company, multi-valued cells
//! separated by `;`.

use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{KnowledgeGraph, Triplet};
use crate::ontology::{EntityType, RelationType};

pub const COMPANY_TABLE_HEADER: [&str; 6] = [
    "company",
    "products",
    "capabilities",
    "certifications",
    "country",
    "suppliers",
];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CompanyRecord {
    pub name: String,
    pub products: Vec<String>,
    pub capabilities: Vec<String>,
    pub certifications: Vec<String>,
    pub country: Option<String>,
    pub suppliers: Vec<String>,
}

fn split_cell(cell: &str) -> Vec<String> {
    cell.split(';')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(str::to_string)
        .collect()
}

pub fn parse_company_table(path: impl AsRef<Path>) -> Result<Vec<CompanyRecord>> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_company_reader(file, path)
}

/// Parses company rows from any reader. `origin` labels error messages.
pub fn parse_company_reader(reader: impl std::io::Read, origin: &Path) -> Result<Vec<CompanyRecord>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();

    let header = match records.next() {
        Some(Ok(h)) => h,
        Some(Err(e)) => return Err(Error::parse(origin, 1, e.to_string())),
        None => return Err(Error::parse(origin, 1, "missing header")),
    };
    if header.iter().ne(COMPANY_TABLE_HEADER.iter().copied()) {
        return Err(Error::parse(
            origin,
            1,
            format!(
                "missing or malformed header, expected `{}`",
                COMPANY_TABLE_HEADER.join(",")
            ),
        ));
    }

    let mut out = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(origin, line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != COMPANY_TABLE_HEADER.len() {
            return Err(Error::parse(
                origin,
                line,
                format!(
                    "expected {} columns, found {}",
                    COMPANY_TABLE_HEADER.len(),
                    rec.len()
                ),
            ));
        }
        let name = rec[0].to_string();
        if name.is_empty() {
            return Err(Error::parse(origin, line, "empty company name"));
        }
        out.push(CompanyRecord {
            name,
            products: split_cell(&rec[1]),
            capabilities: split_cell(&rec[2]),
            certifications: split_cell(&rec[3]),
            country: Some(rec[4].to_string()).filter(|c| !c.is_empty()),
            suppliers: split_cell(&rec[5]),
        });
    }
    Ok(out)
}

/// Emits the five base relations for every record. A row's suppliers yield
/// `(row company, buys_from, supplier)`.
pub fn emit_base_triplets(records: &[CompanyRecord], graph: &mut KnowledgeGraph) -> Result<()> {
    use EntityType::*;
    use RelationType::*;
    for rec in records {
        let company = graph.add_entity(Company, &rec.name)?;
        let link = |graph: &mut KnowledgeGraph, rel: RelationType, etype, label: &str| {
            let other = graph.add_entity(etype, label)?;
            graph.add_triplet(Triplet::new(company, rel, other))
        };
        for p in &rec.products {
            link(graph, MakesProduct, Product, p)?;
        }
        for c in &rec.capabilities {
            link(graph, HasCapability, Capability, c)?;
        }
        for c in &rec.certifications {
            link(graph, HasCert, Certification, c)?;
        }
        if let Some(country) = &rec.country {
            link(graph, LocatedIn, Country, country)?;
        }
        for s in &rec.suppliers {
            link(graph, BuysFrom, Company, s)?;
        }
    }
    Ok(())
}

/// Builds a graph from the base relations of a company table.
pub fn build_graph(records: &[CompanyRecord]) -> Result<KnowledgeGraph> {
    let mut g = KnowledgeGraph::new();
    emit_base_triplets(records, &mut g)?;
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Vec<CompanyRecord>> {
        parse_company_reader(text.as_bytes(), Path::new("t.csv"))
    }

    const HEADER: &str = "company,products,capabilities,certifications,country,suppliers\n";

    #[test]
    fn direct_field_mapping() {
        let recs = parse(&format!("{HEADER}C1,P1;P2,Forging,,DE,C2\n")).unwrap();
        assert_eq!(
            recs,
            vec![CompanyRecord {
                name: "C1".into(),
                products: vec!["P1".into(), "P2".into()],
                capabilities: vec!["Forging".into()],
                certifications: vec![],
                country: Some("DE".into()),
                suppliers: vec!["C2".into()],
            }]
        );
    }

    #[test]
    fn empty_cells_and_whitespace() {
        let recs = parse(&format!("{HEADER} C1 , , P ; ;Q ,,,\n")).unwrap();
        assert!(recs[0].products.is_empty());
        assert_eq!(recs[0].capabilities, vec!["P", "Q"]);
        assert_eq!(recs[0].country, None);
    }

    #[test]
    fn wrong_column_count_reports_row() {
        let e = parse(&format!("{HEADER}C1,P1,Forging,,DE,C2\nC2,P1,X\n")).unwrap_err();
        let msg = e.to_string();
        assert!(msg.contains("t.csv:3"), "{msg}");
        assert!(msg.contains("found 3"), "{msg}");
    }

    #[test]
    fn header_required() {
        assert!(parse("").unwrap_err().to_string().contains("missing header"));
        assert!(parse("C1,P1,Forging,,DE,C2\n").is_err());
    }

    #[test]
    fn base_triplet_bookkeeping() {
        let recs = parse(&format!("{HEADER}C1,P1;P2,Forging,,,C2\n")).unwrap();
        let g = build_graph(&recs).unwrap();
        assert_eq!(g.relation_count(RelationType::MakesProduct), 2);
        assert_eq!(g.relation_count(RelationType::HasCapability), 1);
        assert_eq!(g.relation_count(RelationType::BuysFrom), 1);
        assert_eq!(g.triplet_count(), 4);
        // Supplier referenced but never a row of its own.
        let c2 = g.lookup(EntityType::Company, "C2").unwrap();
        let c1 = g.lookup(EntityType::Company, "C1").unwrap();
        assert!(g.contains(&Triplet::new(c1, RelationType::BuysFrom, c2)));
    }

    #[test]
    fn case_folded_identity() {
        let recs = parse(&format!("{HEADER}C1,Seat Belt;seat belt ,,,,\n")).unwrap();
        let g = build_graph(&recs).unwrap();
        assert_eq!(g.relation_count(RelationType::MakesProduct), 1);
        assert_eq!(g.entities_of(EntityType::Product).len(), 1);
    }
}
