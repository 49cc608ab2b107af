//! End-to-end obstruction analysis: catalog of spaces, the kill-checks, the
//! per-base report and the canned reproductions.

pub mod analyze;
pub mod catalog;
pub mod checks;

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::json;

pub use analyze::{
    analyze, analyze_bases, AnalyzeOptions, BaseEntry, FiberEntry, Flag, ObstructionReport, Survivor, Verdict,
    INTEGRAL_FLAG,
};
pub use catalog::{catalog, lookup, table1, CatalogEntry};
pub use checks::{
    build_relative_model_family, check_dimension_formula, check_relative_cohomology, check_wang_bound,
    CheckOutcome, ChoiceRecord, KillCertificate, Mismatch,
};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Target {
    Table1,
    Prop31,
    Prop32,
    Prop41,
    Prop42,
    TheoremA,
    TheoremB,
}

impl Target {
    pub const ALL: [Target; 7] = [
        Target::Table1,
        Target::Prop31,
        Target::Prop32,
        Target::Prop41,
        Target::Prop42,
        Target::TheoremA,
        Target::TheoremB,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Target::Table1 => "table1",
            Target::Prop31 => "prop31",
            Target::Prop32 => "prop32",
            Target::Prop41 => "prop41",
            Target::Prop42 => "prop42",
            Target::TheoremA => "theorem-a",
            Target::TheoremB => "theorem-b",
        }
    }

    pub fn parse(s: &str) -> Option<Target> {
        let s = s.to_ascii_lowercase().replace('_', "-");
        let s = match s.as_str() {
            "theorema" => "theorem-a",
            "theoremb" => "theorem-b",
            other => other,
        };
        Target::ALL.into_iter().find(|t| t.name() == s)
    }
}

/// Output of a reproduction: human-readable text and a structured tree.
#[derive(Clone, Debug, PartialEq)]
pub struct Reproduction {
    pub target: Target,
    pub text: String,
    pub tree: serde_json::Value,
    pub report: Option<ObstructionReport>,
}

fn entry(name: &str) -> Result<CatalogEntry> {
    lookup(name).ok_or_else(|| Error::Malformed(format!("catalog has no entry `{name}`")))
}

/// Runs a canned analysis with the default settings.
pub fn reproduce(target: Target) -> Result<Reproduction> {
    let options = AnalyzeOptions::default();
    let report = match target {
        Target::Table1 => return Ok(reproduce_table()),
        Target::Prop31 => analyze(&entry("eschenburg")?, 6, &options)?,
        Target::TheoremA => analyze(&entry("eschenburg")?, 3, &options)?,
        Target::Prop41 | Target::TheoremB => analyze(&entry("bazaikin")?, 7, &options)?,
        Target::Prop32 => analyze_bases(&entry("eschenburg")?, &[entry("S2")?], 2, &options)?,
        Target::Prop42 => analyze_bases(&entry("bazaikin")?, &[entry("CP2")?], 4, &options)?,
    };
    Ok(Reproduction {
        target,
        text: render_report(&report),
        tree: serde_json::to_value(&report).expect("reports serialize"),
        report: Some(report),
    })
}

#[derive(Serialize)]
struct TableRow<'a> {
    name: &'a str,
    ranks: &'a crate::ellipticity::RankVector,
}

fn reproduce_table() -> Reproduction {
    let mut text = String::new();
    let mut tree = serde_json::Map::new();
    for (n, rows) in catalog::table1_by_dimension() {
        let _ = writeln!(text, "n = {n}");
        for r in &rows {
            let _ = writeln!(text, "  {:<24} {}", r.ranks.to_string(), r.name);
        }
        let list: Vec<TableRow> = rows
            .iter()
            .map(|r| TableRow {
                name: &r.name,
                ranks: &r.ranks,
            })
            .collect();
        tree.insert(n.to_string(), serde_json::to_value(list).expect("rows serialize"));
    }
    Reproduction {
        target: Target::Table1,
        text,
        tree: json!({ "table": tree }),
        report: None,
    }
}

fn render_flags(flags: &[Flag]) -> String {
    flags
        .iter()
        .map(|f| format!(" [{}: {}]", f.kind, f.note))
        .collect()
}

/// Choices grouped by their first three mismatches, with a count and the
/// first choice of each group as an example.
fn render_choices(s: &mut String, choices: &[ChoiceRecord]) {
    let mut groups: Vec<(String, usize, &ChoiceRecord)> = Vec::new();
    for choice in choices {
        let ms: Vec<String> = choice
            .mismatches
            .iter()
            .take(3)
            .map(|m| format!("b_{} = {} (need {})", m.degree, m.computed, m.required))
            .collect();
        let key = ms.join(", ");
        match groups.iter_mut().find(|(k, _, _)| *k == key) {
            Some(g) => g.1 += 1,
            None => groups.push((key, 1, choice)),
        }
    }
    for (key, count, example) in groups {
        let ds: Vec<String> = example
            .differentials
            .iter()
            .map(|d| format!("D({}) = {}", d.generator, d.image))
            .collect();
        let noun = if count == 1 { "choice" } else { "choices" };
        let _ = writeln!(s, "    {count} {noun} with {key}; e.g. {}", ds.join(", "));
    }
}

/// Plain-text rendering of a report.
pub fn render_report(report: &ObstructionReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "total: {} ({}), dimension {}",
        report.total, report.total_ranks, report.total_dim
    );
    let _ = writeln!(s, "bases up to dimension {}", report.max_base_dim);
    for b in &report.bases {
        let _ = writeln!(
            s,
            "\nbase {} ({}), dimension {}: {}",
            b.name,
            b.ranks,
            b.dim,
            if b.survives { "survives" } else { "killed" }
        );
        for f in &b.fibers {
            let _ = write!(s, "  fiber {} (dimension {}): ", f.ranks, f.fiber_dim);
            match (&f.verdict, &f.certificate) {
                (Verdict::Killed, Some(c)) => {
                    let _ = writeln!(s, "killed by {}", c.summary());
                    if let KillCertificate::RelativeModelCohomology { choices, .. } = c {
                        render_choices(&mut s, choices);
                    }
                }
                _ => {
                    let _ = write!(s, "survives rationally");
                    if let Some(w) = &f.witness {
                        let ds: Vec<String> = w.iter().map(|d| format!("D({}) = {}", d.generator, d.image)).collect();
                        let _ = write!(s, " with {}", ds.join(", "));
                    }
                    let _ = writeln!(s, "{}", render_flags(&f.flags));
                }
            }
        }
    }
    let _ = writeln!(s, "\nsurvivors:");
    if report.survivors.is_empty() {
        let _ = writeln!(s, "  none");
    }
    for v in &report.survivors {
        let _ = writeln!(s, "  {} ({}) with fiber {}{}", v.base, v.base_ranks, v.fiber, render_flags(&v.flags));
    }
    s
}
