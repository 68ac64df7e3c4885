use std::io::Write;

use supplykg::ingest::{build_graph, parse_company_table, COMPANY_TABLE_HEADER};
use supplykg::ontology::{EntityType, RelationType};
use supplykg::Error;

fn table(rows: &[&str]) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "{}", COMPANY_TABLE_HEADER.join(",")).unwrap();
    for r in rows {
        writeln!(f, "{r}").unwrap();
    }
    f
}

#[test]
fn table_to_graph() {
    let f = table(&[
        "Acme,gear;bolt,machining,ISO9001,Japan,Bolt Co",
        "Bolt Co,bolt,forging,,Germany,",
        " acme ,nut,,,Japan,bolt co",
    ]);
    let records = parse_company_table(f.path()).unwrap();
    let g = build_graph(&records).unwrap();
    assert_eq!(g.entities_of(EntityType::Company).len(), 2);
    assert_eq!(g.entities_of(EntityType::Product).len(), 3);
    assert_eq!(g.relation_count(RelationType::BuysFrom), 1);
    assert_eq!(g.relation_count(RelationType::MakesProduct), 4);
    assert_eq!(g.relation_count(RelationType::HasCert), 1);
    assert_eq!(g.relation_count(RelationType::LocatedIn), 2);
}

#[test]
fn ragged_row_names_its_line() {
    let f = table(&["Acme,gear,machining,,Japan,", "Broken,row"]);
    match parse_company_table(f.path()) {
        Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn wrong_header_is_rejected() {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    writeln!(f, "name,products").unwrap();
    assert!(matches!(parse_company_table(f.path()), Err(Error::Parse { line: 1, .. })));
}
