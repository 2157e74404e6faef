//! SPARQL query results in the JSON and CSV layouts.

use serde_json::{json, Map, Value};

use crate::rdf::{SolutionMapping, Term, Variable};

fn term_json(t: &Term) -> Value {
    match t {
        Term::Iri(v) => json!({"type": "uri", "value": v}),
        Term::BlankNode(v) => json!({"type": "bnode", "value": v}),
        Term::Literal(l) => {
            let mut m = Map::new();
            m.insert("type".into(), "literal".into());
            m.insert("value".into(), l.lexical().into());
            if let Some(dt) = l.datatype() {
                m.insert("datatype".into(), dt.into());
            }
            if let Some(tag) = l.language() {
                m.insert("xml:lang".into(), tag.into());
            }
            Value::Object(m)
        }
    }
}

/// `{"head": {"vars": [...]}, "results": {"bindings": [...]}}`; unbound
/// variables are omitted from their binding object.
pub fn to_json(vars: &[Variable], solutions: &[SolutionMapping]) -> Value {
    let bindings: Vec<Value> = solutions
        .iter()
        .map(|mu| {
            let mut m = Map::new();
            for v in vars {
                if let Some(t) = mu.get(v) {
                    m.insert(v.name().to_string(), term_json(t));
                }
            }
            Value::Object(m)
        })
        .collect();
    json!({
        "head": {"vars": vars.iter().map(Variable::name).collect::<Vec<_>>()},
        "results": {"bindings": bindings},
    })
}

pub fn to_json_string(vars: &[Variable], solutions: &[SolutionMapping]) -> String {
    serde_json::to_string_pretty(&to_json(vars, solutions)).expect("JSON values serialize")
}

/// Header row of variable names, then one row per solution with plain term
/// values; unbound cells are empty.
pub fn to_csv(vars: &[Variable], solutions: &[SolutionMapping]) -> String {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::CRLF)
        .from_writer(Vec::new());
    w.write_record(vars.iter().map(Variable::name))
        .expect("in-memory write");
    for mu in solutions {
        w.write_record(vars.iter().map(|v| mu.get(v).map_or("", Term::value)))
            .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("CSV of UTF-8 input")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::{Literal, XSD};

    #[test]
    fn json_layout() {
        let s = Variable::new("s").unwrap();
        let r = Variable::new("r").unwrap();
        let mu = SolutionMapping::from_pairs([
            (s.clone(), Term::iri("http://e/a").unwrap()),
            (
                r.clone(),
                Term::Literal(Literal::typed("4.5", format!("{XSD}decimal")).unwrap()),
            ),
        ]);
        let doc = to_json(&[s.clone(), r.clone()], &[mu, SolutionMapping::new()]);
        assert_eq!(doc["head"]["vars"], json!(["s", "r"]));
        assert_eq!(
            doc["results"]["bindings"][0]["s"],
            json!({"type": "uri", "value": "http://e/a"})
        );
        assert_eq!(
            doc["results"]["bindings"][0]["r"]["datatype"],
            json!(format!("{XSD}decimal"))
        );
        assert_eq!(doc["results"]["bindings"][1], json!({}));
    }

    #[test]
    fn csv_layout() {
        let n = Variable::new("name").unwrap();
        let l = Variable::new("l").unwrap();
        let mu = SolutionMapping::from_pairs([
            (n.clone(), Term::literal("Joe's, \"best\"")),
            (l.clone(), Term::Literal(Literal::lang("x", "en").unwrap())),
        ]);
        let out = to_csv(&[n, l], &[mu]);
        assert_eq!(out, "name,l\r\n\"Joe's, \"\"best\"\"\",x\r\n");
    }
}
