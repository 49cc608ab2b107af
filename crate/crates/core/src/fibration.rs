//! Rank bookkeeping for exact sequences: a generic solver, the long exact
//! homotopy sequence of a fibration, and the cohomology sequence of a
//! fibration over a sphere.

use std::collections::{BTreeMap, BTreeSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::cohomology::BettiTable;
use crate::ellipticity::RankVector;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SequenceSlot {
    pub label: String,
    /// `None` for an unknown dimension.
    pub dimension: Option<usize>,
}

impl SequenceSlot {
    pub fn known(label: impl Into<String>, dimension: usize) -> Self {
        SequenceSlot {
            label: label.into(),
            dimension: Some(dimension),
        }
    }

    pub fn unknown(label: impl Into<String>) -> Self {
        SequenceSlot {
            label: label.into(),
            dimension: None,
        }
    }

    pub fn zero() -> Self {
        SequenceSlot::known("0", 0)
    }
}

/// A chain `V_0 -> V_1 -> ... -> V_m` of vector spaces, exact at every slot,
/// whose end slots are zero.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExactSequenceProblem {
    pub slots: Vec<SequenceSlot>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct RankSolution {
    /// Dimension of every slot, known ones included.
    pub dimensions: Vec<usize>,
    /// `map_ranks[j]` is the rank of the arrow from slot `j` to slot `j + 1`.
    pub map_ranks: Vec<usize>,
}

impl RankSolution {
    /// Dimensions assigned to the problem's unknown slots, in slot order.
    pub fn unknown_dimensions(&self, problem: &ExactSequenceProblem) -> Vec<usize> {
        problem
            .slots
            .iter()
            .zip(&self.dimensions)
            .filter(|(s, _)| s.dimension.is_none())
            .map(|(_, &d)| d)
            .collect()
    }

    pub fn alternating_sum(&self) -> i64 {
        self.dimensions
            .iter()
            .enumerate()
            .map(|(i, &d)| if i % 2 == 0 { d as i64 } else { -(d as i64) })
            .sum()
    }
}

impl ExactSequenceProblem {
    pub fn new(slots: Vec<SequenceSlot>) -> Self {
        ExactSequenceProblem { slots }
    }

    fn check(&self) -> Result<()> {
        let s = &self.slots;
        if s.len() < 3 {
            return Err(Error::Precondition("an exact sequence needs at least three slots".into()));
        }
        for end in [&s[0], &s[s.len() - 1]] {
            if end.dimension != Some(0) {
                return Err(Error::Precondition(format!(
                    "end slot `{}` must be known and zero",
                    end.label
                )));
            }
        }
        for w in s.windows(2) {
            if w[0].dimension.is_none() && w[1].dimension.is_none() {
                return Err(Error::Unbounded {
                    from: w[0].label.clone(),
                    to: w[1].label.clone(),
                });
            }
        }
        Ok(())
    }
}

/// Every assignment of slot dimensions and arrow ranks compatible with
/// exactness, in canonical (lexicographic) order.
///
/// Exactness at slot `j` reads `dim V_j = rank(in) + rank(out)`. Walking left
/// to right, a known slot determines its outgoing rank and an unknown slot's
/// outgoing rank ranges up to the (known) dimension of the next slot.
pub fn solve_exact_ranks(problem: &ExactSequenceProblem) -> Result<Vec<RankSolution>> {
    problem.check()?;
    let slots = &problem.slots;
    let mut out = Vec::new();
    let mut dims = Vec::with_capacity(slots.len());
    let mut ranks = Vec::with_capacity(slots.len());
    search(slots, 0, 0, &mut dims, &mut ranks, &mut out);
    out.sort();
    Ok(out)
}

fn search(
    slots: &[SequenceSlot],
    j: usize,
    incoming: usize,
    dims: &mut Vec<usize>,
    ranks: &mut Vec<usize>,
    out: &mut Vec<RankSolution>,
) {
    let last = slots.len() - 1;
    let choices: Vec<(usize, usize)> = match slots[j].dimension {
        Some(d) => {
            if d < incoming {
                return;
            }
            vec![(d, d - incoming)]
        }
        None => {
            let cap = slots.get(j + 1).and_then(|s| s.dimension).unwrap_or(0);
            (0..=cap).map(|r| (incoming + r, r)).collect()
        }
    };
    for (dim, rank) in choices {
        if j == last {
            if rank == 0 {
                dims.push(dim);
                out.push(RankSolution {
                    dimensions: dims.clone(),
                    map_ranks: ranks.clone(),
                });
                dims.pop();
            }
            continue;
        }
        if let Some(next) = slots[j + 1].dimension {
            if rank > next {
                continue;
            }
        }
        dims.push(dim);
        ranks.push(rank);
        search(slots, j + 1, rank, dims, ranks, out);
        dims.pop();
        ranks.pop();
    }
}

/// The homotopy sequence `... -> π_i F -> π_i M -> π_i X -> π_{i-1} F -> ...`
/// truncated at degree `cap`, with the fiber ranks unknown.
pub fn homotopy_sequence(total: &RankVector, base: &RankVector, cap: u32) -> ExactSequenceProblem {
    let mut slots = vec![SequenceSlot::zero()];
    for i in (1..=cap).rev() {
        slots.push(SequenceSlot::unknown(format!("pi{i}(F)")));
        slots.push(SequenceSlot::known(format!("pi{i}(M)"), total.get(i) as usize));
        slots.push(SequenceSlot::known(format!("pi{i}(X)"), base.get(i) as usize));
    }
    slots.push(SequenceSlot::zero());
    ExactSequenceProblem::new(slots)
}

/// All fiber rank vectors compatible with the rational homotopy sequence of
/// a fibration `F -> M -> X`, in canonical order.
pub fn fiber_rank_vectors(total: &RankVector, base: &RankVector) -> Vec<RankVector> {
    let cap = total.max_degree().unwrap_or(0) + base.max_degree().unwrap_or(0) + 1;
    let problem = homotopy_sequence(total, base, cap);
    let solutions = solve_exact_ranks(&problem).expect("homotopy sequences alternate known slots");
    let vectors: BTreeSet<RankVector> = solutions
        .iter()
        .map(|s| {
            let dims = s.unknown_dimensions(&problem);
            // unknown slots run from degree `cap` down to 1
            let pairs: Vec<(u32, u32)> = dims
                .iter()
                .enumerate()
                .map(|(k, &d)| (cap - k as u32, d as u32))
                .collect();
            RankVector::from_pairs(&pairs)
        })
        .collect();
    vectors.into_iter().collect()
}

/// The cohomology sequence of a fibration `F -> M -> S^n`:
/// `... -> H^k(M) -> H^k(F) -> H^{k-n+1}(F) -> H^{k+1}(M) -> ...`
/// for `k = 0 ..= fiber_dim + n`, with every slot filled in.
pub fn wang_problem(
    sphere_dim: u32,
    total: &BettiTable,
    fiber: &BettiTable,
) -> Result<ExactSequenceProblem> {
    if sphere_dim < 2 {
        return Err(Error::Precondition("the base sphere must have dimension at least 2".into()));
    }
    let top = fiber.bound() + sphere_dim;
    if total.bound() < top {
        return Err(Error::Precondition(format!(
            "total Betti numbers are needed up to degree {top}, got {}",
            total.bound()
        )));
    }
    let f = |k: i64| if k < 0 { 0 } else { fiber.get(k as u32).unwrap_or(0) };
    let shift = sphere_dim as i64 - 1;
    let mut slots = vec![SequenceSlot::zero()];
    for k in 0..=top {
        slots.push(SequenceSlot::known(format!("H{k}(M)"), total.get(k).unwrap_or(0)));
        slots.push(SequenceSlot::known(format!("H{k}(F)"), f(k as i64)));
        let j = k as i64 - shift;
        slots.push(SequenceSlot::known(format!("H{j}(F)"), f(j)));
    }
    slots.push(SequenceSlot::zero());
    Ok(ExactSequenceProblem::new(slots))
}

/// All fiber Betti tables `b_0 ..= b_{fiber_dim}` with `b_0 = b_{fiber_dim} = 1`
/// that make the sequence over `S^n` exact, honouring the `known` values.
pub fn wang_fiber_betti(
    sphere_dim: u32,
    total: &BettiTable,
    fiber_dim: u32,
    known: &BTreeMap<u32, usize>,
) -> Result<Vec<BettiTable>> {
    wang_fiber_betti_bounded(sphere_dim, total, fiber_dim, known, &BTreeMap::new())
}

/// Like [`wang_fiber_betti`], with additional upper bounds on the fiber
/// Betti numbers.
pub fn wang_fiber_betti_bounded(
    sphere_dim: u32,
    total: &BettiTable,
    fiber_dim: u32,
    known: &BTreeMap<u32, usize>,
    upper: &BTreeMap<u32, usize>,
) -> Result<Vec<BettiTable>> {
    if sphere_dim < 2 {
        return Err(Error::Precondition("the base sphere must have dimension at least 2".into()));
    }
    if total.bound() < fiber_dim + sphere_dim {
        return Err(Error::Precondition(format!(
            "total Betti numbers are needed up to degree {}",
            fiber_dim + sphere_dim
        )));
    }
    let allowed = |k: u32, b: usize| {
        known.get(&k).is_none_or(|&v| v == b) && upper.get(&k).is_none_or(|&u| b <= u)
    };
    if !allowed(0, 1) || !allowed(fiber_dim, 1) {
        return Ok(Vec::new());
    }
    let shift = sphere_dim - 1;
    // Exactness of H^k(M) -> H^k(F) -> H^{k-n+1}(F) bounds b_k(F) by
    // b_k(M) + b_{k-n+1}(F).
    let mut tables = vec![vec![1usize]];
    for k in 1..=fiber_dim {
        let mut next = Vec::new();
        for t in &tables {
            let range = if k == fiber_dim {
                1..=1
            } else {
                let prev = if k >= shift { t[(k - shift) as usize] } else { 0 };
                0..=total.get(k).unwrap_or(0) + prev
            };
            for b in range.filter(|&b| allowed(k, b)) {
                let mut t = t.clone();
                t.push(b);
                next.push(t);
            }
        }
        tables = next;
    }
    let consistent: Vec<Option<BettiTable>> = tables
        .into_par_iter()
        .map(|t| {
            let table = BettiTable::new(t);
            let problem = wang_problem(sphere_dim, total, &table)?;
            Ok((!solve_exact_ranks(&problem)?.is_empty()).then_some(table))
        })
        .collect::<Result<_>>()?;
    Ok(consistent.into_iter().flatten().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rv(s: &str) -> RankVector {
        s.parse().unwrap()
    }

    fn problem(dims: &[Option<usize>]) -> ExactSequenceProblem {
        ExactSequenceProblem::new(
            dims.iter()
                .enumerate()
                .map(|(i, d)| SequenceSlot {
                    label: format!("V{i}"),
                    dimension: *d,
                })
                .collect(),
        )
    }

    #[test]
    fn isomorphism_is_forced() {
        let p = problem(&[Some(0), None, Some(1), Some(0)]);
        let s = solve_exact_ranks(&p).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].unknown_dimensions(&p), vec![1]);
    }

    #[test]
    fn middle_of_short_exact_sequence() {
        let p = problem(&[Some(0), Some(1), None, Some(1), Some(0)]);
        let s = solve_exact_ranks(&p).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].unknown_dimensions(&p), vec![2]);
    }

    #[test]
    fn inconsistent_and_unbounded() {
        assert!(solve_exact_ranks(&problem(&[Some(0), Some(1), Some(0)])).unwrap().is_empty());
        assert!(matches!(
            solve_exact_ranks(&problem(&[Some(0), None, None, Some(1), Some(0)])),
            Err(Error::Unbounded { .. })
        ));
        assert!(solve_exact_ranks(&problem(&[Some(0), Some(0)])).is_err());
        assert!(solve_exact_ranks(&problem(&[Some(1), None, Some(0)])).is_err());
    }

    #[test]
    fn fibers_over_s3() {
        let f = fiber_rank_vectors(&rv("2:1,3:1,5:1"), &rv("3:1"));
        assert_eq!(f, vec![rv("2:1,5:1"), rv("2:2,3:1,5:1")]);
    }

    #[test]
    fn fibers_over_s2() {
        let f = fiber_rank_vectors(&rv("2:1,3:1,5:1"), &rv("2:1,3:1"));
        let set: BTreeSet<_> = f.into_iter().collect();
        // The last vector comes from both maps pi_2(M) -> pi_2(X) and
        // pi_3(M) -> pi_3(X) vanishing.
        let expected: BTreeSet<_> = [
            rv("5:1"),
            rv("1:1,2:1,5:1"),
            rv("2:1,3:1,5:1"),
            rv("1:1,2:2,3:1,5:1"),
        ]
        .into();
        assert_eq!(set, expected);
    }

    #[test]
    fn fibers_over_cp2_and_s5() {
        assert_eq!(
            fiber_rank_vectors(&rv("2:1,5:1,9:1"), &rv("2:1,5:1")),
            vec![
                rv("9:1"),
                rv("4:1,5:1,9:1"),
                rv("1:1,2:1,9:1"),
                rv("1:1,2:1,4:1,5:1,9:1")
            ]
        );
        assert!(fiber_rank_vectors(&rv("2:1,5:1,9:1"), &rv("5:1")).contains(&rv("2:1,9:1")));
    }

    fn s2_times_s5() -> BettiTable {
        BettiTable::new(vec![1, 0, 1, 0, 0, 1, 0, 1, 0, 0])
    }

    #[test]
    fn wang_forces_second_betti_two() {
        let known = BTreeMap::from([(1, 1)]);
        let tables = wang_fiber_betti(2, &s2_times_s5(), 5, &known).unwrap();
        assert!(!tables.is_empty());
        assert!(tables.iter().all(|t| t.get(2) == Some(2)));
    }

    #[test]
    fn wang_admits_the_five_sphere() {
        let known = BTreeMap::from([(1, 0)]);
        let tables = wang_fiber_betti(2, &s2_times_s5(), 5, &known).unwrap();
        assert!(tables.contains(&BettiTable::new(vec![1, 0, 0, 0, 0, 1])));
    }

    #[test]
    fn wang_injects_first_cohomology() {
        let total = BettiTable::new(vec![1, 1, 0, 0, 1, 1, 0, 0, 0, 0]);
        let tables = wang_fiber_betti(2, &total, 3, &BTreeMap::new()).unwrap();
        assert!(tables.iter().all(|t| t.get(1).unwrap() >= 1));
    }

    #[test]
    fn wang_needs_enough_total_betti() {
        let short = BettiTable::new(vec![1, 0, 1]);
        assert!(wang_fiber_betti(2, &short, 5, &BTreeMap::new()).is_err());
    }
}
