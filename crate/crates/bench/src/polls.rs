//! Synthetic opinion-poll tables. A handful of template rows are repeated
//! with shifted dates and jittered figures until the target size is reached.

use std::fmt::Write as _;
use std::path::Path;

use chrono::{Days, NaiveDate};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::BenchError;

/// Lead cell value the selective query looks for.
pub const PLANTED_LEAD: &str = "1.5";

const FIRMS: [&str; 10] = [
    "SWG",
    "Tecnè",
    "EMG",
    "Ixè",
    "Piepoli",
    "Euromedia",
    "Demopolis",
    "Ipsos",
    "Quorum",
    "Noto",
];

const HEADER: [&str; 7] = [
    "Date",
    "Polling firm",
    "Sample size",
    "M5S",
    "PD",
    "FI",
    "Lead",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SyntheticTableSpec {
    pub template_rows: usize,
    pub target_rows: usize,
    pub planted: usize,
}

impl SyntheticTableSpec {
    pub fn new(target_rows: usize, planted: usize) -> Result<Self, BenchError> {
        Self::with_template(10, target_rows, planted)
    }

    pub fn with_template(
        template_rows: usize,
        target_rows: usize,
        planted: usize,
    ) -> Result<Self, BenchError> {
        if template_rows == 0 {
            return Err(BenchError::EmptyTemplate);
        }
        if planted > target_rows {
            return Err(BenchError::TooManyPlanted {
                planted,
                rows: target_rows,
            });
        }
        Ok(Self {
            template_rows,
            target_rows,
            planted,
        })
    }
}

struct TemplateRow {
    firm: &'static str,
    sample: u32,
    m5s: u32,
    pd: u32,
    fi: u32,
}

fn template(rng: &mut ChaCha8Rng, n: usize) -> Vec<TemplateRow> {
    (0..n)
        .map(|i| TemplateRow {
            firm: FIRMS[i % FIRMS.len()],
            sample: rng.gen_range(800..3000),
            m5s: rng.gen_range(250..340),
            pd: rng.gen_range(170..240),
            fi: rng.gen_range(120..170),
        })
        .collect()
}

fn tenths(v: u32) -> String {
    format!("{}.{}", v / 10, v % 10)
}

/// One HTML page with a single table of `target_rows` body rows. Exactly
/// `planted` rows have lead [`PLANTED_LEAD`]; every other lead is in
/// 2.0..=15.0.
pub fn generate_webtable(spec: &SyntheticTableSpec, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows = template(&mut rng, spec.template_rows);
    let mut planted = vec![false; spec.target_rows];
    for i in sample(&mut rng, spec.target_rows, spec.planted) {
        planted[i] = true;
    }
    let start = NaiveDate::from_ymd_opt(2018, 3, 1).expect("valid date");

    let mut out = String::with_capacity(spec.target_rows * 140 + 512);
    out.push_str("<!DOCTYPE html>\n<html>\n<head><meta charset=\"utf-8\"><title>Opinion polling</title></head>\n<body>\n<table class=\"wikitable\">\n<tr>");
    for h in HEADER {
        let _ = write!(out, "<th>{h}</th>");
    }
    out.push_str("</tr>\n");
    for (i, is_planted) in planted.into_iter().enumerate() {
        let t = &rows[i % rows.len()];
        let date = start
            .checked_sub_days(Days::new((i / rows.len()) as u64))
            .unwrap_or(NaiveDate::MIN);
        let jitter = |rng: &mut ChaCha8Rng, base: u32| base + rng.gen_range(0..20) - 10;
        let m5s = jitter(&mut rng, t.m5s);
        let pd = jitter(&mut rng, t.pd);
        let fi = jitter(&mut rng, t.fi);
        let lead = if is_planted {
            PLANTED_LEAD.to_string()
        } else {
            tenths(rng.gen_range(20..=150))
        };
        let _ = writeln!(
            out,
            "<tr><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td><td>{}</td></tr>",
            date.format("%Y-%m-%d"),
            t.firm,
            t.sample + rng.gen_range(0..100),
            tenths(m5s),
            tenths(pd),
            tenths(fi),
            lead
        );
    }
    out.push_str("</table>\n</body>\n</html>\n");
    out
}

pub fn write_webtable(path: &Path, spec: &SyntheticTableSpec, seed: u64) -> Result<(), BenchError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, generate_webtable(spec, seed))?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_more_planted_than_rows() {
        assert!(matches!(
            SyntheticTableSpec::new(3, 4),
            Err(BenchError::TooManyPlanted { .. })
        ));
        assert!(SyntheticTableSpec::with_template(0, 3, 1).is_err());
    }

    #[test]
    fn same_seed_same_page() {
        let spec = SyntheticTableSpec::new(50, 3).unwrap();
        assert_eq!(generate_webtable(&spec, 7), generate_webtable(&spec, 7));
        assert_ne!(generate_webtable(&spec, 7), generate_webtable(&spec, 8));
    }
}
