use proptest::prelude::*;

use vweave_core::mapping::{decode_hole, encode_hole, instantiate_targets, parse_mappings};
use vweave_core::rdf::{Term, Triple};

const MAPPING: &str = r#"
[PrefixDeclaration]
ex: http://example.org/

[MappingDeclaration] @collection [[
mappingId m
target    ex:{id} ex:name {name} ;
          ex:score {score}^^xsd:decimal ;
          ex:link <http://example.org/page/{name}> ;
          ex:pair "{id}-{score}"@en ;
          ex:kind ex:Thing .
source    select id, name, score from (filetable path:x.csv)
]]"#;

fn columns() -> Vec<String> {
    ["tupleID", "id", "name", "score"]
        .map(String::from)
        .to_vec()
}

fn value() -> impl Strategy<Value = Option<String>> {
    prop_oneof![
        4 => "[ a-zA-Z0-9!#%&/?:@é~._-]{0,8}".prop_map(Some),
        1 => Just(None),
    ]
}

proptest! {
    #[test]
    fn hole_encoding_is_injective(a in ".{0,12}", b in ".{0,12}") {
        prop_assume!(a != b);
        prop_assert_ne!(encode_hole(&a), encode_hole(&b));
        prop_assert_eq!(decode_hole(&encode_hole(&a)), Some(a.clone()));
        let iri = format!("http://example.org/{}", encode_hole(&a));
        prop_assert!(Term::iri(iri).is_ok());
    }

    #[test]
    fn one_triple_per_template_unless_null(id in value(), name in value(), score in value()) {
        let axiom = &parse_mappings(MAPPING).unwrap().axioms[0];
        let row = vec![Some("1".to_string()), id.clone(), name.clone(), score.clone()];
        let triples = instantiate_targets(axiom, &columns(), &row).unwrap();
        prop_assert!(triples.len() <= axiom.targets.len());
        let no_nulls = id.is_some() && name.is_some() && score.is_some();
        prop_assert_eq!(triples.len() == axiom.targets.len(), no_nulls);
        // every template needs id; name and score each feed two templates
        let expected = if id.is_none() { 0 } else {
            1 + usize::from(name.is_some()) * 2 + usize::from(score.is_some()) * 2
        };
        prop_assert_eq!(triples.len(), expected);
        let again = instantiate_targets(axiom, &columns(), &row).unwrap();
        prop_assert_eq!(&triples, &again);
        let predicates: Vec<&Term> = triples.iter().map(Triple::predicate).collect();
        let order = ["name", "score", "link", "pair", "kind"];
        let positions: Vec<usize> = predicates
            .iter()
            .map(|p| order.iter().position(|o| p.value().ends_with(o)).unwrap())
            .collect();
        prop_assert!(positions.windows(2).all(|w| w[0] < w[1]));
    }
}

#[test]
fn templates_render_by_hand() {
    let axiom = &parse_mappings(MAPPING).unwrap().axioms[0];
    let row = [None, Some("a b"), Some("Café!"), Some("1.5")].map(|c| c.map(String::from));
    let out: Vec<String> = instantiate_targets(axiom, &columns(), &row)
        .unwrap()
        .iter()
        .map(ToString::to_string)
        .collect();
    assert_eq!(
        out,
        [
            "<http://example.org/a%20b> <http://example.org/name> \"Café!\" .",
            "<http://example.org/a%20b> <http://example.org/score> \"1.5\"^^<http://www.w3.org/2001/XMLSchema#decimal> .",
            "<http://example.org/a%20b> <http://example.org/link> <http://example.org/page/Caf%C3%A9%21> .",
            "<http://example.org/a%20b> <http://example.org/pair> \"a b-1.5\"@en .",
            "<http://example.org/a%20b> <http://example.org/kind> <http://example.org/Thing> .",
        ]
    );
}
