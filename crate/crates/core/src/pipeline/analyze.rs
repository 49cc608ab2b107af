//! Per-base, per-fiber obstruction analysis of a total space.

use rayon::prelude::*;
use serde::Serialize;

use super::catalog::{lookup, normalize_name, table1, CatalogEntry};
use super::checks::{
    check_dimension_formula, check_relative_cohomology, check_wang_bound, fiber_differentials,
    CheckOutcome, DifferentialEntry, KillCertificate,
};
use crate::ellipticity::{enumerate_candidates, CoeffSet, RankVector, SearchOptions};
use crate::error::{Error, Result};
use crate::fibration::fiber_rank_vectors;

pub const INTEGRAL_FLAG: &str = "integral-obstruction-required";

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Flag {
    pub kind: &'static str,
    pub note: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Killed,
    SurvivesRationally,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiberEntry {
    pub ranks: RankVector,
    pub verdict: Verdict,
    pub certificate: Option<KillCertificate>,
    pub flags: Vec<Flag>,
    pub fiber_dim: i64,
    /// Checks that ran, in order.
    pub checks: Vec<&'static str>,
    /// Fiber differentials of a relative model with the right cohomology.
    pub witness: Option<Vec<DifferentialEntry>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BaseEntry {
    pub name: String,
    pub ranks: RankVector,
    pub dim: u32,
    pub fibers: Vec<FiberEntry>,
    pub survives: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Survivor {
    pub base: String,
    pub base_ranks: RankVector,
    pub fiber: RankVector,
    pub flags: Vec<Flag>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ObstructionReport {
    pub total: String,
    pub total_ranks: RankVector,
    pub total_dim: u32,
    pub max_base_dim: u32,
    pub bases: Vec<BaseEntry>,
    pub survivors: Vec<Survivor>,
}

impl ObstructionReport {
    /// The report restricted to bases of dimension at most `max_base_dim`.
    pub fn restrict(&self, max_base_dim: u32) -> ObstructionReport {
        let bases: Vec<BaseEntry> = self
            .bases
            .iter()
            .filter(|b| b.dim <= max_base_dim)
            .cloned()
            .collect();
        ObstructionReport {
            survivors: survivors(&bases),
            bases,
            max_base_dim,
            ..self.clone()
        }
    }

    pub fn base(&self, name: &str) -> Option<&BaseEntry> {
        self.bases.iter().find(|b| b.name == name)
    }
}

#[derive(Clone, Debug)]
pub struct AnalyzeOptions {
    pub coeffs: CoeffSet,
    /// Degree up to which relative models are compared with the total
    /// space; `None` means the total dimension.
    pub bound: Option<u32>,
    /// Re-derive the base candidates with the enumerator and fail on any
    /// disagreement with the table.
    pub live_table: bool,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            coeffs: CoeffSet::binary(),
            bound: None,
            live_table: false,
        }
    }
}

/// Rank-level (base, fiber) cases that the rational checks cannot exclude
/// and that need integral information instead.
const INTEGRAL_CASES: &[(&str, &str, &str, &str)] = &[
    (
        "eschenburg rational type",
        "2:1,3:1",
        "5:1",
        "rationally consistent; excluding it needs integral homotopy: the pullback over S3 forces pi_4(M) = pi_4(S3) = Z_2",
    ),
    (
        "bazaikin rational type",
        "2:1,5:1",
        "9:1",
        "rationally consistent; excluding it needs integral homotopy: comparing pi_8(M) with pi_8(S5) = Z_24",
    ),
];

/// The total space is matched by catalog name or alias, so a model file
/// declared under another name gets no flag.
fn integral_flags(total: &CatalogEntry, base: &RankVector, fiber: &RankVector) -> Vec<Flag> {
    let Some(known) = lookup(&total.name).filter(|e| e.ranks == total.ranks) else {
        return Vec::new();
    };
    let total_key = normalize_name(&known.name);
    INTEGRAL_CASES
        .iter()
        .filter(|(t, b, f, _)| {
            normalize_name(t) == total_key && b.parse::<RankVector>().ok().as_ref() == Some(base)
                && f.parse::<RankVector>().ok().as_ref() == Some(fiber)
        })
        .map(|(_, _, _, note)| Flag {
            kind: INTEGRAL_FLAG,
            note: note.to_string(),
        })
        .collect()
}

/// Base candidates of dimension `2 ..= max_base_dim`, from the table or
/// audited against the live enumeration.
pub fn base_candidates(max_base_dim: u32, live_table: bool) -> Result<Vec<CatalogEntry>> {
    let rows: Vec<CatalogEntry> = table1()
        .into_iter()
        .filter(|e| (2..=max_base_dim).contains(&e.dim) && e.ranks.is_simply_connected())
        .collect();
    if live_table {
        for n in 2..=max_base_dim {
            let live = enumerate_candidates(n, true, &SearchOptions::default())?;
            let fixture: Vec<RankVector> = rows.iter().filter(|e| e.dim == n).map(|e| e.ranks.clone()).collect();
            if live != fixture {
                let show = |v: &[RankVector]| v.iter().map(|f| f.to_string()).collect::<Vec<_>>().join(" | ");
                return Err(Error::Malformed(format!(
                    "live enumeration in dimension {n} disagrees with the table: live [{}], table [{}]",
                    show(&live),
                    show(&fixture)
                )));
            }
        }
    }
    Ok(rows)
}

pub fn analyze(total: &CatalogEntry, max_base_dim: u32, options: &AnalyzeOptions) -> Result<ObstructionReport> {
    if max_base_dim < 2 || max_base_dim >= total.dim {
        return Err(Error::Precondition(format!(
            "maximal base dimension must lie in 2..{}, got {max_base_dim}",
            total.dim
        )));
    }
    let bases = base_candidates(max_base_dim, options.live_table)?;
    analyze_bases(total, &bases, max_base_dim, options)
}

/// Runs the checks for an explicit list of bases.
pub fn analyze_bases(
    total: &CatalogEntry,
    bases: &[CatalogEntry],
    max_base_dim: u32,
    options: &AnalyzeOptions,
) -> Result<ObstructionReport> {
    if total.model.is_none() {
        return Err(Error::Precondition(format!("total space `{}` has no model", total.name)));
    }
    let bound = options.bound.unwrap_or(total.dim);
    if bound < total.dim {
        return Err(Error::Precondition(format!(
            "bound {bound} is below the total dimension {}",
            total.dim
        )));
    }
    let target = total
        .betti_up_to(bound)
        .ok_or_else(|| Error::Precondition("total space has no Betti numbers".into()))?;

    let jobs: Vec<(usize, RankVector)> = bases
        .iter()
        .enumerate()
        .flat_map(|(i, b)| {
            fiber_rank_vectors(&total.ranks, &b.ranks)
                .into_iter()
                .map(move |f| (i, f))
        })
        .collect();
    let entries: Vec<(usize, FiberEntry)> = jobs
        .into_par_iter()
        .map(|(i, fiber)| {
            let entry = analyze_fiber(total, &bases[i], &fiber, &target, bound, &options.coeffs)?;
            Ok((i, entry))
        })
        .collect::<Result<_>>()?;

    let mut out: Vec<BaseEntry> = bases
        .iter()
        .map(|b| BaseEntry {
            name: b.name.clone(),
            ranks: b.ranks.clone(),
            dim: b.dim,
            fibers: Vec::new(),
            survives: false,
        })
        .collect();
    for (i, e) in entries {
        out[i].fibers.push(e);
    }
    for b in &mut out {
        b.survives = b.fibers.iter().any(|f| f.verdict == Verdict::SurvivesRationally);
    }
    Ok(ObstructionReport {
        total: total.name.clone(),
        total_ranks: total.ranks.clone(),
        total_dim: total.dim,
        max_base_dim,
        survivors: survivors(&out),
        bases: out,
    })
}

fn survivors(bases: &[BaseEntry]) -> Vec<Survivor> {
    bases
        .iter()
        .flat_map(|b| {
            b.fibers
                .iter()
                .filter(|f| f.verdict == Verdict::SurvivesRationally)
                .map(|f| Survivor {
                    base: b.name.clone(),
                    base_ranks: b.ranks.clone(),
                    fiber: f.ranks.clone(),
                    flags: f.flags.clone(),
                })
        })
        .collect()
}

/// Applies the checks in their fixed order: dimension formula, then the
/// sequence over a sphere when the base is a rational sphere, then relative
/// model cohomology.
pub fn analyze_fiber(
    total: &CatalogEntry,
    base: &CatalogEntry,
    fiber: &RankVector,
    target: &crate::cohomology::BettiTable,
    bound: u32,
    coeffs: &CoeffSet,
) -> Result<FiberEntry> {
    let fiber_dim = total.dim as i64 - base.dim as i64;
    let mut entry = FiberEntry {
        ranks: fiber.clone(),
        verdict: Verdict::Killed,
        certificate: None,
        flags: Vec::new(),
        fiber_dim,
        checks: vec!["dimension-formula"],
        witness: None,
    };
    if let CheckOutcome::Kill(c) = check_dimension_formula(fiber, fiber_dim) {
        entry.certificate = Some(c);
        return Ok(entry);
    }
    let fiber_dim = fiber_dim as u32;
    if let Some(n) = base.ranks.sphere_dimension() {
        entry.checks.push("wang-betti-bound");
        if let CheckOutcome::Kill(c) = check_wang_bound(n, target, fiber, fiber_dim)? {
            entry.certificate = Some(c);
            return Ok(entry);
        }
    }
    entry.checks.push("relative-model-cohomology");
    let base_model = base
        .model
        .as_ref()
        .ok_or_else(|| Error::Precondition(format!("base `{}` has no model", base.name)))?;
    match check_relative_cohomology(base_model, fiber, target, coeffs, bound) {
        Ok(check) => match check.outcome {
            CheckOutcome::Kill(c) => {
                entry.certificate = Some(c);
            }
            CheckOutcome::Pass { witness } => {
                entry.verdict = Verdict::SurvivesRationally;
                entry.witness = witness.as_ref().map(fiber_differentials);
                entry.flags = integral_flags(total, &base.ranks, fiber);
            }
        },
        Err(Error::Malformed(_)) => {
            // no admissible relative model at all
            let family = super::checks::build_relative_model_family(base_model, fiber, coeffs, fiber_dim)?;
            entry.certificate = Some(KillCertificate::RelativeModelCohomology {
                degree: None,
                required: None,
                choices: Vec::new(),
                discarded: family.discarded,
            });
        }
        Err(e) => return Err(e),
    }
    Ok(entry)
}
