//! The rational kill-checks applied to a (base, fiber) pair, and the
//! relative-model family they search.

use std::collections::BTreeMap;

use itertools::Itertools;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::cohomology::{betti, BettiTable};
use crate::ellipticity::{formal_dimension, CoeffSet, RankVector};
use crate::error::{Error, Result};
use crate::fibration::{solve_exact_ranks, wang_fiber_betti, wang_fiber_betti_bounded, wang_problem};
use crate::gca::{Element, Generator, Monomial, Origin, Rational, SullivanModel};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub degree: u32,
    pub required: usize,
    pub computed: usize,
}

/// Differential assigned to one fiber generator.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DifferentialEntry {
    pub generator: String,
    pub image: String,
}

/// One member of a relative-model family together with its cohomology.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChoiceRecord {
    pub differentials: Vec<DifferentialEntry>,
    pub betti: BettiTable,
    pub mismatches: Vec<Mismatch>,
}

impl ChoiceRecord {
    pub fn first_mismatch(&self) -> Option<&Mismatch> {
        self.mismatches.first()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum KillCertificate {
    DimensionFormula {
        computed: i64,
        required: i64,
    },
    /// Every admissible relative model has the wrong cohomology. `degree` is
    /// the largest first-mismatch degree over the choices: each choice is
    /// ruled out at or below it. `None` when no admissible model exists.
    RelativeModelCohomology {
        degree: Option<u32>,
        required: Option<usize>,
        choices: Vec<ChoiceRecord>,
        discarded: usize,
    },
    /// The fiber cohomology forced by the sequence over a sphere exceeds
    /// what the fiber's generators allow.
    WangBettiBound {
        degree: Option<u32>,
        required: Option<usize>,
        bound: Option<usize>,
        forced: Vec<BettiTable>,
    },
}

impl KillCertificate {
    pub fn kind(&self) -> &'static str {
        match self {
            KillCertificate::DimensionFormula { .. } => "dimension-formula",
            KillCertificate::RelativeModelCohomology { .. } => "relative-model-cohomology",
            KillCertificate::WangBettiBound { .. } => "wang-betti-bound",
        }
    }

    pub fn summary(&self) -> String {
        match self {
            KillCertificate::DimensionFormula { computed, required } => {
                format!("dimension formula: formal dimension {computed} != {required}")
            }
            KillCertificate::RelativeModelCohomology {
                degree: Some(k),
                required: Some(r),
                choices,
                ..
            } => format!(
                "relative model cohomology: all {} choices fail by degree {k} (required b_{k} = {r})",
                choices.len()
            ),
            KillCertificate::RelativeModelCohomology { discarded, .. } => {
                format!("relative model cohomology: no admissible relative model ({discarded} discarded)")
            }
            KillCertificate::WangBettiBound {
                degree: Some(k),
                required: Some(r),
                bound: Some(b),
                ..
            } => format!("wang sequence: required b_{k}(F) = {r} exceeds monomial bound {b}"),
            KillCertificate::WangBettiBound { .. } => {
                "wang sequence: no fiber cohomology is consistent with the sequence".to_string()
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CheckOutcome {
    Pass { witness: Option<SullivanModel> },
    Kill(KillCertificate),
}

impl CheckOutcome {
    pub fn is_pass(&self) -> bool {
        matches!(self, CheckOutcome::Pass { .. })
    }

    pub fn certificate(&self) -> Option<&KillCertificate> {
        match self {
            CheckOutcome::Kill(c) => Some(c),
            CheckOutcome::Pass { .. } => None,
        }
    }
}

pub fn check_dimension_formula(fiber: &RankVector, required_fiber_dim: i64) -> CheckOutcome {
    let computed = formal_dimension(fiber);
    if computed == required_fiber_dim {
        CheckOutcome::Pass { witness: None }
    } else {
        CheckOutcome::Kill(KillCertificate::DimensionFormula {
            computed,
            required: required_fiber_dim,
        })
    }
}

/// Fiber generator names: `z{d}` for a lone generator in degree `d`,
/// otherwise `z{d}a`, `z{d}b`, ...
pub fn fiber_generators(fiber: &RankVector) -> Vec<Generator> {
    let mut out = Vec::new();
    for (d, r) in fiber.iter() {
        for k in 0..r {
            let name = if r == 1 {
                format!("z{d}")
            } else {
                format!("z{d}{}", (b'a' + (k % 26) as u8) as char)
            };
            out.push(Generator::new(name, d).with_origin(Origin::Fiber));
        }
    }
    out
}

/// Upper bounds `b_i(F) <= dim (ΛV_F)^i` for `i = 1 ..= fiber_dim`.
pub fn monomial_bounds(fiber: &RankVector, fiber_dim: u32) -> Result<BTreeMap<u32, usize>> {
    let free = SullivanModel::new("fiber", fiber_generators(fiber))?;
    Ok((1..=fiber_dim).map(|i| (i, free.basis_of_degree(i).len())).collect())
}

pub fn check_wang_bound(
    sphere_dim: u32,
    total: &BettiTable,
    fiber: &RankVector,
    fiber_dim: u32,
) -> Result<CheckOutcome> {
    let bounds = monomial_bounds(fiber, fiber_dim)?;
    // A single degree-one generator is closed in a minimal model, so it
    // contributes exactly one class.
    let mut known = BTreeMap::new();
    if fiber.get(1) <= 1 {
        known.insert(1, fiber.get(1) as usize);
    }
    if !wang_fiber_betti_bounded(sphere_dim, total, fiber_dim, &known, &bounds)?.is_empty() {
        return Ok(CheckOutcome::Pass { witness: None });
    }
    let forced = wang_fiber_betti(sphere_dim, total, fiber_dim, &known)?;
    let first_violation = |t: &BettiTable| {
        (1..=fiber_dim).find(|&i| t.get(i).unwrap_or(0) > bounds.get(&i).copied().unwrap_or(0))
    };
    let degree = forced.iter().filter_map(first_violation).max();
    let required = degree.and_then(|k| {
        forced
            .iter()
            .filter(|t| first_violation(t) == Some(k))
            .filter_map(|t| t.get(k))
            .min()
    });
    Ok(CheckOutcome::Kill(KillCertificate::WangBettiBound {
        degree,
        required,
        bound: degree.and_then(|k| bounds.get(&k).copied()),
        forced,
    }))
}

/// Members of a relative-model family, plus the number of candidates whose
/// fiber restriction was not an admissible fiber model.
#[derive(Clone, Debug)]
pub struct RelativeFamily {
    pub models: Vec<SullivanModel>,
    pub discarded: usize,
}

/// Relative models `(ΛV_X ⊗ ΛV_F, D)` over `base` with the given fiber
/// ranks.
///
/// Generators are ordered by degree, fiber before base on ties. Base
/// generators keep their differential. A fiber generator's `D` is a
/// combination, with coefficients from `coeffs`, of the degree `deg + 1`
/// monomials in base generators and strictly earlier fiber generators, a lone
/// fiber generator excluded. Members must satisfy `D^2 = 0`, and the fiber
/// model obtained by setting base generators to zero must be a Sullivan
/// model of formal dimension `fiber_dim`; other candidates are counted as
/// discarded.
pub fn build_relative_model_family(
    base: &SullivanModel,
    fiber: &RankVector,
    coeffs: &CoeffSet,
    fiber_dim: u32,
) -> Result<RelativeFamily> {
    if fiber.is_zero() {
        return Ok(RelativeFamily {
            models: vec![base.clone()],
            discarded: 0,
        });
    }
    let fiber_gens = fiber_generators(fiber);
    let base_gens: Vec<Generator> = base
        .generators()
        .iter()
        .cloned()
        .map(|g| g.with_origin(Origin::Base))
        .collect();
    let mut gens: Vec<Generator> = fiber_gens.iter().chain(&base_gens).cloned().collect();
    // stable sort keeps fiber generators first among equal degrees
    gens.sort_by_key(|g| g.degree);
    let name = format!("{} relative {}", base.name(), fiber);
    let mut free = SullivanModel::new(name, gens.clone())?;
    for g in base.generators() {
        let image = base.d_generator(base.index_of(&g.name).expect("own generator"));
        let image = transport(base, image, &free)?;
        free.set_differential(&g.name, image)?;
    }

    let fiber_idx: Vec<usize> = fiber_gens
        .iter()
        .map(|g| free.index_of(&g.name).expect("declared"))
        .collect();
    let is_fiber = |i: usize| gens[i].origin == Origin::Fiber;
    let slots: Vec<Vec<Monomial>> = fiber_idx
        .iter()
        .enumerate()
        .map(|(pos, &gi)| {
            let later: Vec<usize> = fiber_idx[pos..].to_vec();
            free.basis_of_degree(gens[gi].degree + 1)
                .into_iter()
                .filter(|m| later.iter().all(|&j| m.exponent(j) == 0))
                .filter(|m| !(m.factor_count() == 1 && (0..gens.len()).any(|j| is_fiber(j) && m.exponent(j) == 1)))
                .collect()
        })
        .collect();

    let mut partial = vec![free];
    for (pos, &gi) in fiber_idx.iter().enumerate() {
        let choices: Vec<Element> = coefficient_combinations(&slots[pos], coeffs);
        let name = gens[gi].name.clone();
        partial = partial
            .into_par_iter()
            .flat_map_iter(|m| {
                let name = name.clone();
                choices.clone().into_iter().filter_map(move |img| {
                    let mut next = m.clone();
                    next.set_differential(&name, img).ok()?;
                    next.differential_unchecked(next.d_generator(gi))
                        .is_zero()
                        .then_some(next)
                })
            })
            .collect();
    }

    let checked: Vec<bool> = partial
        .par_iter()
        .map(|m| fiber_restriction_is_admissible(m, fiber_dim))
        .collect::<Result<_>>()?;
    let discarded = checked.iter().filter(|ok| !**ok).count();
    let models = partial
        .into_iter()
        .zip(checked)
        .filter_map(|(m, ok)| ok.then_some(m))
        .collect();
    Ok(RelativeFamily { models, discarded })
}

/// Every element `Σ c_i m_i` with `c_i` from the coefficient set, in
/// lexicographic order of the coefficient tuple.
fn coefficient_combinations(monomials: &[Monomial], coeffs: &CoeffSet) -> Vec<Element> {
    if monomials.is_empty() {
        return vec![Element::zero()];
    }
    std::iter::repeat_n(coeffs.values().to_vec(), monomials.len())
        .multi_cartesian_product()
        .map(|cs| {
            let mut e = Element::zero();
            for (m, c) in monomials.iter().zip(cs) {
                e.add_term(m.clone(), c);
            }
            e
        })
        .collect()
}

/// Re-expresses an element of `from` in `to`, matching generators by name.
fn transport(from: &SullivanModel, a: &Element, to: &SullivanModel) -> Result<Element> {
    let map: Vec<usize> = from
        .generators()
        .iter()
        .map(|g| {
            to.index_of(&g.name)
                .ok_or_else(|| Error::ModelMismatch(to.name().to_string()))
        })
        .collect::<Result<_>>()?;
    let mut out = Element::zero();
    for (m, c) in a.terms() {
        let mut exps = vec![0; to.len()];
        for (i, &e) in m.exponents().iter().enumerate() {
            exps[map[i]] = e;
        }
        out.add_term(Monomial::from_exponents(exps), c.clone());
    }
    Ok(out)
}

/// The fiber model of a relative model: fiber generators only, with every
/// term involving a base generator dropped.
pub fn fiber_restriction(model: &SullivanModel) -> Result<SullivanModel> {
    let keep: Vec<usize> = (0..model.len())
        .filter(|&i| model.generator(i).origin == Origin::Fiber)
        .collect();
    let gens = keep.iter().map(|&i| model.generator(i).clone()).collect();
    let mut fiber = SullivanModel::new(format!("{} fiber", model.name()), gens)?;
    for (new_i, &i) in keep.iter().enumerate() {
        let mut image = Element::zero();
        for (m, c) in model.d_generator(i).terms() {
            let only_fiber = (0..model.len()).all(|j| keep.contains(&j) || m.exponent(j) == 0);
            if only_fiber {
                let exps = keep.iter().map(|&j| m.exponent(j)).collect();
                image.add_term(Monomial::from_exponents(exps), c.clone());
            }
        }
        let name = fiber.generator(new_i).name.clone();
        fiber.set_differential(&name, image)?;
    }
    Ok(fiber)
}

/// A fiber restriction is admissible when it is a Sullivan model (`d^2 = 0`)
/// whose formal dimension is the fiber dimension.
fn fiber_restriction_is_admissible(model: &SullivanModel, fiber_dim: u32) -> Result<bool> {
    let fiber = fiber_restriction(model)?;
    let closed = (0..fiber.len()).all(|i| fiber.differential_unchecked(fiber.d_generator(i)).is_zero());
    let ranks = crate::pipeline::catalog::ranks_of(&fiber);
    Ok(closed && formal_dimension(&ranks) == fiber_dim as i64)
}

fn mismatches(computed: &BettiTable, target: &BettiTable, bound: u32) -> Vec<Mismatch> {
    (0..=bound)
        .filter_map(|k| {
            let (c, r) = (computed.get(k).unwrap_or(0), target.get(k).unwrap_or(0));
            (c != r).then_some(Mismatch {
                degree: k,
                required: r,
                computed: c,
            })
        })
        .collect()
}

/// Describes the fiber differentials of a relative model.
pub fn fiber_differentials(model: &SullivanModel) -> Vec<DifferentialEntry> {
    (0..model.len())
        .filter(|&i| model.generator(i).origin == Origin::Fiber)
        .map(|i| DifferentialEntry {
            generator: model.generator(i).name.clone(),
            image: model.format_element(model.d_generator(i)),
        })
        .collect()
}

/// Passing members of a relative-model family, or a certificate that every
/// member has the wrong Betti numbers up to `bound`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RelativeCheck {
    pub outcome: CheckOutcome,
    /// All members whose Betti numbers match the target.
    pub passing: Vec<SullivanModel>,
}

pub fn check_relative_cohomology(
    base: &SullivanModel,
    fiber: &RankVector,
    target: &BettiTable,
    coeffs: &CoeffSet,
    bound: u32,
) -> Result<RelativeCheck> {
    if target.bound() < bound {
        return Err(Error::Precondition(format!(
            "target Betti numbers stop at degree {}, below the bound {bound}",
            target.bound()
        )));
    }
    let total_dim = target.top_degree().unwrap_or(0);
    let base_dim = betti(base, bound).top_degree().unwrap_or(0);
    if bound < total_dim {
        return Err(Error::Precondition(format!(
            "bound {bound} is below the total dimension {total_dim}"
        )));
    }
    let fiber_dim = total_dim.saturating_sub(base_dim);
    let family = build_relative_model_family(base, fiber, coeffs, fiber_dim)?;
    if family.models.is_empty() {
        if target.total() != 0 {
            return Err(Error::Malformed(format!(
                "no admissible relative model over {} with fiber ranks {fiber} ({} discarded)",
                base.name(),
                family.discarded
            )));
        }
        return Ok(RelativeCheck {
            outcome: CheckOutcome::Pass { witness: None },
            passing: Vec::new(),
        });
    }
    Ok(evaluate_family(family, target, bound))
}

pub(crate) fn evaluate_family(family: RelativeFamily, target: &BettiTable, bound: u32) -> RelativeCheck {
    let records: Vec<(SullivanModel, ChoiceRecord)> = family
        .models
        .into_par_iter()
        .map(|m| {
            let table = betti(&m, bound);
            let record = ChoiceRecord {
                differentials: fiber_differentials(&m),
                mismatches: mismatches(&table, target, bound),
                betti: table,
            };
            (m, record)
        })
        .collect();
    let passing: Vec<SullivanModel> = records
        .iter()
        .filter(|(_, r)| r.mismatches.is_empty())
        .map(|(m, _)| m.clone())
        .collect();
    if !passing.is_empty() {
        // Prefer a witness with non-trivial twisting: most non-zero terms,
        // earliest in enumeration order on ties.
        let witness = passing
            .iter()
            .rev()
            .max_by_key(|m| {
                (0..m.len())
                    .filter(|&i| m.generator(i).origin == Origin::Fiber)
                    .map(|i| m.d_generator(i).len())
                    .sum::<usize>()
            })
            .cloned();
        return RelativeCheck {
            outcome: CheckOutcome::Pass { witness },
            passing,
        };
    }
    let degree = records
        .iter()
        .filter_map(|(_, r)| r.first_mismatch().map(|m| m.degree))
        .max();
    let required = degree.and_then(|k| target.get(k));
    RelativeCheck {
        outcome: CheckOutcome::Kill(KillCertificate::RelativeModelCohomology {
            degree,
            required,
            choices: records.into_iter().map(|(_, r)| r).collect(),
            discarded: family.discarded,
        }),
        passing,
    }
}

/// Re-checks a certificate from its stored data.
///
/// Dimension certificates re-evaluate the formula, relative-model
/// certificates rebuild every stored choice over `base` and recompute its
/// Betti numbers, Wang certificates re-solve the exact sequence for every
/// stored fiber table.
pub fn revalidate(
    certificate: &KillCertificate,
    context: &RevalidationContext<'_>,
) -> Result<bool> {
    match certificate {
        KillCertificate::DimensionFormula { computed, required } => Ok(
            formal_dimension(context.fiber) == *computed && computed != required
                && *required == context.required_fiber_dim,
        ),
        KillCertificate::RelativeModelCohomology {
            degree,
            required,
            choices,
            ..
        } => {
            let Some(base) = context.base else {
                return Err(Error::Precondition("relative certificates need the base model".into()));
            };
            let Some(target) = context.target else {
                return Err(Error::Precondition("relative certificates need the target".into()));
            };
            let bound = context.bound;
            let mut firsts = Vec::new();
            for choice in choices {
                let model = rebuild_choice(base, context.fiber, choice)?;
                let table = betti(&model, bound);
                if table != choice.betti || mismatches(&table, target, bound) != choice.mismatches {
                    return Ok(false);
                }
                match choice.first_mismatch() {
                    Some(m) => firsts.push(m.degree),
                    None => return Ok(false),
                }
            }
            Ok(firsts.iter().max().copied() == *degree
                && *required == degree.and_then(|k| target.get(k)))
        }
        KillCertificate::WangBettiBound {
            degree,
            required,
            bound,
            forced,
        } => {
            let (Some(n), Some(total)) = (context.sphere_dim, context.target) else {
                return Err(Error::Precondition("wang certificates need the sphere and total".into()));
            };
            let bounds = monomial_bounds(context.fiber, context.required_fiber_dim as u32)?;
            for t in forced {
                if solve_exact_ranks(&wang_problem(n, total, t)?)?.is_empty() {
                    return Ok(false);
                }
                let fits = (1..=t.bound()).all(|i| t.get(i).unwrap_or(0) <= bounds.get(&i).copied().unwrap_or(0));
                if fits {
                    return Ok(false);
                }
            }
            Ok(match (degree, required, bound) {
                (Some(k), Some(r), Some(b)) => r > b && bounds.get(k) == Some(b),
                _ => forced.is_empty(),
            })
        }
    }
}

/// Data a certificate is checked against.
pub struct RevalidationContext<'a> {
    pub fiber: &'a RankVector,
    pub required_fiber_dim: i64,
    pub base: Option<&'a SullivanModel>,
    pub target: Option<&'a BettiTable>,
    pub sphere_dim: Option<u32>,
    pub bound: u32,
}

/// Rebuilds a stored relative-model choice from the base model, the fiber
/// ranks and the recorded differentials.
pub fn rebuild_choice(base: &SullivanModel, fiber: &RankVector, choice: &ChoiceRecord) -> Result<SullivanModel> {
    let fiber_gens = fiber_generators(fiber);
    let mut gens: Vec<Generator> = fiber_gens
        .iter()
        .cloned()
        .chain(base.generators().iter().cloned().map(|g| g.with_origin(Origin::Base)))
        .collect();
    gens.sort_by_key(|g| g.degree);
    let mut model = SullivanModel::new(format!("{} relative {}", base.name(), fiber), gens)?;
    for g in base.generators() {
        let image = transport(base, base.d_generator(base.index_of(&g.name).expect("own")), &model)?;
        model.set_differential(&g.name, image)?;
    }
    for entry in &choice.differentials {
        let image = if entry.image == "0" {
            Element::zero()
        } else {
            model.parse_element(&entry.image)?
        };
        model.set_differential(&entry.generator, image)?;
    }
    Ok(model)
}

/// Coefficient of `monomial` (written in surface syntax) in `D(generator)`.
pub fn differential_coefficient(model: &SullivanModel, generator: &str, monomial: &str) -> Result<Rational> {
    let i = model
        .index_of(generator)
        .ok_or_else(|| Error::UnknownGenerator {
            name: generator.to_string(),
            position: 0,
        })?;
    let m = model.parse_element(monomial)?;
    let (mono, _) = m
        .terms()
        .next()
        .ok_or_else(|| Error::Malformed("monomial normalizes to zero".into()))?;
    let c = model.d_generator(i).coefficient(mono);
    Ok(if c.is_zero() { Rational::zero() } else { c })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pipeline::catalog::lookup;

    fn rv(s: &str) -> RankVector {
        s.parse().unwrap()
    }

    fn model(name: &str) -> SullivanModel {
        lookup(name).unwrap().model.unwrap()
    }

    #[test]
    fn dimension_formula_examples() {
        for (f, req, computed) in [("2:2,3:1,5:1", 4, 6), ("2:1,3:1,5:1", 5, 7), ("2:1,4:1,5:1,9:1", 8, 10)] {
            assert_eq!(
                check_dimension_formula(&rv(f), req),
                CheckOutcome::Kill(KillCertificate::DimensionFormula { computed, required: req })
            );
        }
        assert!(check_dimension_formula(&rv("5:1"), 5).is_pass());
    }

    #[test]
    fn s3_family_contains_the_stated_models() {
        let fam = build_relative_model_family(&model("S3"), &rv("2:1,5:1"), &CoeffSet::binary(), 4).unwrap();
        for m in &fam.models {
            let names: Vec<&str> = m.generators().iter().map(|g| g.name.as_str()).collect();
            assert_eq!(names, ["z2", "y3", "z5"]);
            assert!(m.d_generator(1).is_zero());
        }
        assert!(!fam.models.is_empty());
    }

    #[test]
    fn empty_fiber_gives_the_base() {
        let base = model("CP2");
        let fam = build_relative_model_family(&base, &RankVector::new(), &CoeffSet::binary(), 0).unwrap();
        assert_eq!(fam.models, vec![base]);
    }

    #[test]
    fn linear_base_terms_are_allowed() {
        let fam = build_relative_model_family(&model("CP2"), &rv("1:1,2:1,9:1"), &CoeffSet::binary(), 9)
            .unwrap();
        assert!(fam
            .models
            .iter()
            .any(|m| m.format_element(m.d_generator(m.index_of("z1").unwrap())) == "x2"));
    }

    #[test]
    fn wang_examples() {
        let total = lookup("eschenburg").unwrap().betti_up_to(7).unwrap();
        match check_wang_bound(2, &total, &rv("1:1,2:1,5:1"), 5).unwrap() {
            CheckOutcome::Kill(KillCertificate::WangBettiBound { degree, required, bound, .. }) => {
                assert_eq!((degree, required, bound), (Some(2), Some(2), Some(1)));
            }
            other => panic!("{other:?}"),
        }
        assert!(check_wang_bound(2, &total, &rv("5:1"), 5).unwrap().is_pass());
    }

    #[test]
    fn fiber_restriction_drops_base_terms() {
        let m = SullivanModel::new(
            "r",
            vec![
                Generator::new("z1", 1).with_origin(Origin::Fiber),
                Generator::new("x2", 2).with_origin(Origin::Base),
                Generator::new("z2", 2).with_origin(Origin::Fiber),
            ],
        )
        .unwrap()
        .with_d("z1", "x2")
        .unwrap()
        .with_d("z2", "z1*x2")
        .unwrap();
        let f = fiber_restriction(&m).unwrap();
        assert_eq!(f.len(), 2);
        assert!(f.d_generator(0).is_zero() && f.d_generator(1).is_zero());
    }
}
