use std::sync::Arc;

use proptest::prelude::*;

use vweave_core::vsql::{eval_vsql, parse_vsql, OperatorInvocation, SourceProvider, VirtualTable};
use vweave_core::vtable::SourceError;

#[derive(Debug)]
struct Fixed(Arc<VirtualTable>);

impl SourceProvider for Fixed {
    fn invoke(&self, _inv: &OperatorInvocation) -> Result<Arc<VirtualTable>, SourceError> {
        Ok(self.0.clone())
    }
}

fn eval(q: &str, t: &Fixed) -> VirtualTable {
    eval_vsql(&parse_vsql(q).unwrap_or_else(|e| panic!("{q}: {e}")), t)
        .unwrap_or_else(|e| panic!("{q}: {e}"))
}

const T: &str = "(statictables name:t)";

/// (nested, hand-flattened)
fn flattening_cases() -> Vec<(String, String)> {
    [
        ("select a from (select a, b from T)", "select a from T"),
        (
            "select x from (select a as x from T)",
            "select a as x from T",
        ),
        ("select a from (select * from T)", "select a from T"),
        (
            "select a from (select a, b from T where b = 'k')",
            "select a from T where b = 'k'",
        ),
        (
            "select a from (select a, b from T) where b = 'k'",
            "select a from T where b = 'k'",
        ),
        (
            "select t from (select a||'-'||b as t from T)",
            "select a||'-'||b as t from T",
        ),
        (
            "select t||'!' as u from (select a||b as t from T)",
            "select a||b||'!' as u from T",
        ),
        (
            "select distinct a from (select a, b from T)",
            "select distinct a from T",
        ),
        (
            "select a, b from (select b, a from T) where a = b",
            "select a, b from T where a = b",
        ),
        (
            "select x from (select y as x from (select a as y from T))",
            "select a as x from T",
        ),
        (
            "select a from (select a from T where a = 'p') where a = 'p'",
            "select a from T where a = 'p'",
        ),
        (
            "select tupleID, c from (select c, a from T)",
            "select c from T",
        ),
        (
            "select \"No. of Reviews\" as n from (select \"No. of Reviews\" from T)",
            "select \"No. of Reviews\" as n from T",
        ),
        (
            "select distinct s from (select a||\" (\"||c||\")\" as s from T where b = 'k')",
            "select distinct a||\" (\"||c||\")\" as s from T where b = 'k'",
        ),
    ]
    .iter()
    .map(|(n, f)| (n.replace('T', T), f.replace('T', T)))
    .collect()
}

fn cell() -> impl Strategy<Value = Option<String>> {
    prop_oneof![
        4 => prop::sample::select(vec!["p", "k", "q", "p q", ""]).prop_map(|s| Some(s.to_string())),
        1 => Just(None),
    ]
}

fn table() -> impl Strategy<Value = Fixed> {
    prop::collection::vec(prop::collection::vec(cell(), 4), 0..30).prop_map(|rows| {
        let columns = ["a", "b", "c", "No. of Reviews"].map(String::from).to_vec();
        Fixed(Arc::new(VirtualTable::from_cells(columns, rows).unwrap()))
    })
}

fn same(l: &VirtualTable, r: &VirtualTable) -> bool {
    l.columns() == r.columns() && l.rows() == r.rows()
}

#[test]
fn at_least_ten_flattening_cases() {
    assert!(flattening_cases().len() >= 10);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn nested_equals_flattened(t in table()) {
        for (nested, flat) in flattening_cases() {
            let (a, b) = (eval(&nested, &t), eval(&flat, &t));
            prop_assert!(same(&a, &b), "{}\n{:?}\n{}\n{:?}", nested, a, flat, b);
        }
    }

    #[test]
    fn distinct_projection_never_grows(t in table()) {
        for cols in ["a", "a, b", "c, a", "b||c as x"] {
            let out = eval(&format!("select distinct {cols} from {T}"), &t);
            prop_assert!(out.len() <= t.0.len());
            let ids: std::collections::HashSet<_> =
                out.rows().iter().map(|r| r[0].clone()).collect();
            prop_assert_eq!(ids.len(), out.len());
        }
    }

    #[test]
    fn tautological_where_keeps_every_row(t in table()) {
        let all = eval(&format!("select * from {T}"), &t);
        let taut = eval(&format!("select * from {T} where 'x' = 'x'"), &t);
        prop_assert!(same(&all, &taut));
        prop_assert_eq!(all.len(), t.0.len());
    }

    #[test]
    fn evaluation_is_deterministic(t in table()) {
        for (q, _) in flattening_cases() {
            prop_assert!(same(&eval(&q, &t), &eval(&q, &t)));
        }
    }
}
