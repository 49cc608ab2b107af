//! Rank vectors of rational homotopy groups, the formal-dimension formula and
//! the enumeration of low-dimensional elliptic rank vectors.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use num_traits::{Signed, Zero};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::cohomology::Cohomology;
use crate::error::{Error, Result};
use crate::gca::{rational, Element, Generator, Monomial, Rational, SullivanModel};

/// Finitely supported map `degree -> rank`. Zero ranks are never stored.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RankVector(BTreeMap<u32, u32>);

impl RankVector {
    pub fn new() -> Self {
        RankVector::default()
    }

    pub fn from_pairs(pairs: &[(u32, u32)]) -> Self {
        let mut f = RankVector::new();
        for &(d, r) in pairs {
            f.set(d, f.get(d) + r);
        }
        f
    }

    pub fn get(&self, degree: u32) -> u32 {
        self.0.get(&degree).copied().unwrap_or(0)
    }

    pub fn set(&mut self, degree: u32, rank: u32) {
        if rank == 0 {
            self.0.remove(&degree);
        } else {
            self.0.insert(degree, rank);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.0.iter().map(|(&d, &r)| (d, r))
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.0.keys().next_back().copied()
    }

    pub fn is_simply_connected(&self) -> bool {
        self.get(1) == 0
    }

    pub fn total_rank(&self) -> u32 {
        self.0.values().sum()
    }

    /// Rank-wise sum, i.e. the rank vector of a product.
    pub fn sum(&self, other: &RankVector) -> RankVector {
        let mut out = self.clone();
        for (d, r) in other.iter() {
            out.set(d, out.get(d) + r);
        }
        out
    }

    /// `(f_1, f_2, ..., f_top)`.
    pub fn dense(&self) -> Vec<u32> {
        let top = self.max_degree().unwrap_or(0);
        (1..=top).map(|d| self.get(d)).collect()
    }

    /// Rank vector of a rational sphere: `{n:1}` for odd n, `{n:1, 2n-1:1}`
    /// for even n.
    pub fn sphere(n: u32) -> RankVector {
        if n % 2 == 1 {
            RankVector::from_pairs(&[(n, 1)])
        } else {
            RankVector::from_pairs(&[(n, 1), (2 * n - 1, 1)])
        }
    }

    /// The dimension `n` if this is the rank vector of a rational `n`-sphere.
    pub fn sphere_dimension(&self) -> Option<u32> {
        let n = *self.0.keys().next()?;
        (n >= 1 && *self == RankVector::sphere(n)).then_some(n)
    }
}

/// Canonical order: lexicographic on `(f_1, f_2, ...)`.
impl Ord for RankVector {
    fn cmp(&self, other: &Self) -> Ordering {
        let top = self
            .max_degree()
            .unwrap_or(0)
            .max(other.max_degree().unwrap_or(0));
        (1..=top)
            .map(|d| self.get(d).cmp(&other.get(d)))
            .find(|o| o.is_ne())
            .unwrap_or(Ordering::Equal)
    }
}

impl PartialOrd for RankVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for RankVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.iter().map(|(d, r)| format!("{d}:{r}")).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for RankVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "0" || s.is_empty() {
            return Ok(RankVector::new());
        }
        let mut f = RankVector::new();
        for part in s.split(',') {
            let (d, r) = part
                .split_once(':')
                .ok_or_else(|| Error::Malformed(format!("rank entry `{part}` is not `degree:rank`")))?;
            let d: u32 = d
                .trim()
                .parse()
                .map_err(|_| Error::Malformed(format!("bad degree in `{part}`")))?;
            let r: u32 = r
                .trim()
                .parse()
                .map_err(|_| Error::Malformed(format!("bad rank in `{part}`")))?;
            if d == 0 {
                return Err(Error::Malformed("degrees start at 1".into()));
            }
            f.set(d, f.get(d) + r);
        }
        Ok(f)
    }
}

impl Serialize for RankVector {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_map(self.0.iter().map(|(d, r)| (d.to_string(), r)))
    }
}

/// Dimension predicted by the ranks of an elliptic space:
/// `Σ (2i+1) f_{2i+1} − Σ (2i−1) f_{2i}`, i.e. odd degrees count with their
/// degree and even degrees with degree minus one, negatively.
pub fn formal_dimension(f: &RankVector) -> i64 {
    f.iter()
        .map(|(d, r)| {
            let (d, r) = (d as i64, r as i64);
            if d % 2 == 1 {
                d * r
            } else {
                -(d - 1) * r
            }
        })
        .sum()
}

/// Numerical constraints satisfied by the ranks of an elliptic space of
/// formal dimension `n`: the dimension formula, non-positive homotopy Euler
/// characteristic, and the two weighted degree bounds.
pub fn fh_feasible(f: &RankVector, n: i64) -> bool {
    let (mut even, mut odd, mut even_w, mut odd_w) = (0i64, 0i64, 0i64, 0i64);
    for (d, r) in f.iter() {
        let (d, r) = (d as i64, r as i64);
        if d % 2 == 0 {
            even += r;
            even_w += d * r;
        } else {
            odd += r;
            odd_w += d * r;
        }
    }
    formal_dimension(f) == n && even <= odd && odd_w < 2 * n && even_w <= n
}

/// Every non-zero rank vector with support in `[2, 2n-1]`, odd-weighted sum
/// at most `2n-1` and even-weighted sum at most `n`, in canonical order.
pub fn box_vectors(n: u32) -> Vec<RankVector> {
    if n < 1 {
        return Vec::new();
    }
    let degrees: Vec<u32> = (2..2 * n).collect();
    let mut out = Vec::new();
    let mut current = RankVector::new();
    fill_box(&degrees, 0, n, 0, 0, &mut current, &mut out);
    out.retain(|f| !f.is_zero());
    out.sort();
    out
}

fn fill_box(
    degrees: &[u32],
    i: usize,
    n: u32,
    odd_w: u32,
    even_w: u32,
    current: &mut RankVector,
    out: &mut Vec<RankVector>,
) {
    if i == degrees.len() {
        out.push(current.clone());
        return;
    }
    let d = degrees[i];
    let mut r = 0;
    loop {
        let (o, e) = if d % 2 == 1 {
            (odd_w + d * r, even_w)
        } else {
            (odd_w, even_w + d * r)
        };
        if o > 2 * n - 1 || e > n {
            break;
        }
        current.set(d, r);
        fill_box(degrees, i + 1, n, o, e, current, out);
        r += 1;
    }
    current.set(d, 0);
}

/// Finite set of rational coefficients used by differential searches; always
/// contains zero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoeffSet(Vec<Rational>);

impl CoeffSet {
    pub fn new(values: impl IntoIterator<Item = Rational>) -> Result<Self> {
        let mut v: Vec<Rational> = values.into_iter().collect();
        v.sort();
        v.dedup();
        if !v.iter().any(|c| c.is_zero()) {
            return Err(Error::Precondition("coefficient set must contain 0".into()));
        }
        Ok(CoeffSet(v))
    }

    pub fn from_ints(values: &[i64]) -> Self {
        CoeffSet::new(values.iter().map(|&v| rational(v))).expect("coefficient set contains 0")
    }

    /// `{-1, 0, 1}`.
    pub fn signed_unit() -> Self {
        CoeffSet::from_ints(&[-1, 0, 1])
    }

    /// `{0, 1}`.
    pub fn binary() -> Self {
        CoeffSet::from_ints(&[0, 1])
    }

    pub fn values(&self) -> &[Rational] {
        &self.0
    }

    /// Non-zero values, smallest magnitude first and positive before negative.
    pub fn nonzero(&self) -> Vec<Rational> {
        let mut v: Vec<Rational> = self.0.iter().filter(|c| !c.is_zero()).cloned().collect();
        v.sort_by(|a, b| a.abs().cmp(&b.abs()).then(b.cmp(a)));
        v
    }
}

impl fmt::Display for CoeffSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|c| c.to_string()).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for CoeffSet {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().trim_start_matches('{').trim_end_matches('}');
        let mut values = Vec::new();
        for part in s.split(',') {
            let part = part.trim();
            let value = match part.split_once('/') {
                Some((p, q)) => {
                    let p: i64 = p.trim().parse().map_err(|_| Error::Malformed(format!("bad coefficient `{part}`")))?;
                    let q: i64 = q.trim().parse().map_err(|_| Error::Malformed(format!("bad coefficient `{part}`")))?;
                    if q == 0 {
                        return Err(Error::Malformed("zero denominator".into()));
                    }
                    Rational::new(p.into(), q.into())
                }
                None => rational(
                    part.parse()
                        .map_err(|_| Error::Malformed(format!("bad coefficient `{part}`")))?,
                ),
            };
            values.push(value);
        }
        CoeffSet::new(values)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RealizabilityStatus {
    Realizable,
    Unrealizable,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RealizabilityVerdict {
    pub status: RealizabilityStatus,
    pub witness: Option<SullivanModel>,
    pub failure_note: Option<String>,
    pub candidates_examined: usize,
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub coeffs: CoeffSet,
    /// Highest degree inspected for cohomology above the formal dimension;
    /// `None` means `2n + 2`.
    pub audit_bound: Option<u32>,
    /// Maximum number of candidate differentials examined.
    pub budget: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            coeffs: CoeffSet::signed_unit(),
            audit_bound: None,
            budget: 500_000,
        }
    }
}

/// Generator names for a rank vector: `x{d}` for a lone generator in degree
/// `d`, otherwise `a{d}`, `b{d}`, ...
pub fn generators_for(f: &RankVector) -> Vec<Generator> {
    let mut gens = Vec::new();
    for (d, r) in f.iter() {
        if r == 1 {
            gens.push(Generator::new(format!("x{d}"), d));
        } else {
            for k in 0..r {
                let letter = (b'a' + (k % 26) as u8) as char;
                let suffix = if k >= 26 { format!("_{}", k / 26) } else { String::new() };
                gens.push(Generator::new(format!("{letter}{d}{suffix}"), d));
            }
        }
    }
    gens
}

/// Outcome of auditing one candidate model.
enum Audit {
    Pass,
    /// Cohomology persists at `degree` (above the formal dimension), or the
    /// top class is missing when `degree == n`.
    Fail { degree: u32, betti: usize },
}

fn audit(model: &SullivanModel, n: u32, audit_bound: u32) -> Audit {
    let engine = Cohomology::new(model);
    for k in n + 1..=audit_bound {
        let b = engine.betti_number(k);
        if b != 0 {
            return Audit::Fail { degree: k, betti: b };
        }
    }
    match engine.betti_number(n) {
        0 => Audit::Fail { degree: n, betti: 0 },
        _ => Audit::Pass,
    }
}

/// One coefficient slot of the differential search: generator index and a
/// decomposable monomial of degree `deg + 1`.
struct Slot {
    generator: usize,
    monomial: Monomial,
}

/// Searches for a minimal Sullivan model with the given ranks whose
/// cohomology stops at the formal dimension, up to the audit bound.
///
/// Candidates are visited in order of increasing number of non-zero
/// coefficients, so the first witness found is a sparsest one.
pub fn realizable(f: &RankVector, options: &SearchOptions) -> Result<RealizabilityVerdict> {
    let n = formal_dimension(f);
    if n < 0 {
        return Ok(RealizabilityVerdict {
            status: RealizabilityStatus::Unrealizable,
            witness: None,
            failure_note: Some(format!("formal dimension {n} is negative")),
            candidates_examined: 0,
        });
    }
    let n = n as u32;
    let audit_bound = options.audit_bound.unwrap_or(2 * n + 2);
    if audit_bound < 2 * n {
        return Err(Error::Precondition(format!(
            "audit bound {audit_bound} is below twice the formal dimension {n}"
        )));
    }

    let gens = generators_for(f);
    let free = SullivanModel::new(format!("elliptic {f}"), gens.clone())?;
    let width = free.len();
    let mut slots = Vec::new();
    let mut slot_lists: Vec<Vec<Monomial>> = Vec::with_capacity(width);
    for (i, g) in gens.iter().enumerate() {
        let list: Vec<Monomial> = free
            .basis_of_degree(g.degree + 1)
            .into_iter()
            .filter(|m| m.factor_count() >= 2 && m.exponents()[i..].iter().all(|&e| e == 0))
            .collect();
        for m in &list {
            slots.push(Slot {
                generator: i,
                monomial: m.clone(),
            });
        }
        slot_lists.push(list);
    }
    // Same-degree generators with identical slot lists are interchangeable;
    // only candidates whose images are ordered within such a group are kept.
    let groups: Vec<Vec<usize>> = (0..width)
        .chunk_by(|&i| (gens[i].degree, slot_lists[i].clone()))
        .into_iter()
        .map(|(_, g)| g.collect())
        .filter(|g: &Vec<usize>| g.len() > 1)
        .collect();
    let slot_offset: Vec<usize> = slot_lists
        .iter()
        .scan(0, |acc, l| {
            let o = *acc;
            *acc += l.len();
            Some(o)
        })
        .collect();

    let nonzero = options.coeffs.nonzero();
    let coeff_index = |c: &Rational| options.coeffs.values().iter().position(|v| v == c).unwrap();

    let mut examined = 0usize;
    let mut best: Option<(u32, usize)> = None;
    const CHUNK: usize = 2048;

    let build = |choice: &[(usize, Rational)]| -> Option<SullivanModel> {
        // canonical within interchangeable groups
        let mut coeffs = vec![0usize; slots.len()];
        let zero_idx = coeff_index(&Rational::zero());
        coeffs.iter_mut().for_each(|c| *c = zero_idx);
        for (s, c) in choice {
            coeffs[*s] = coeff_index(c);
        }
        for group in &groups {
            for w in group.windows(2) {
                let (a, b) = (w[0], w[1]);
                let len = slot_lists[a].len();
                let ia = &coeffs[slot_offset[a]..slot_offset[a] + len];
                let ib = &coeffs[slot_offset[b]..slot_offset[b] + len];
                if ia > ib {
                    return None;
                }
            }
        }
        let mut model = free.clone();
        let mut images = vec![Element::zero(); width];
        for (s, c) in choice {
            let slot = &slots[*s];
            images[slot.generator].add_term(slot.monomial.clone(), c.clone());
        }
        for (i, img) in images.into_iter().enumerate() {
            if !img.is_zero() {
                let name = gens[i].name.clone();
                model.set_differential(&name, img).ok()?;
            }
        }
        Some(model)
    };

    for size in 0..=slots.len() {
        let mut pending: Vec<Vec<(usize, Rational)>> = Vec::with_capacity(CHUNK);
        let mut combos = (0..slots.len()).combinations(size).flat_map(|positions| {
            let nz = nonzero.clone();
            std::iter::repeat_n(nz, size)
                .multi_cartesian_product()
                .map(move |cs| positions.iter().copied().zip(cs).collect::<Vec<_>>())
                .collect::<Vec<_>>()
        });
        loop {
            pending.clear();
            for c in combos.by_ref() {
                pending.push(c);
                if pending.len() >= CHUNK {
                    break;
                }
            }
            if pending.is_empty() {
                break;
            }
            if examined + pending.len() > options.budget {
                return Ok(RealizabilityVerdict {
                    status: RealizabilityStatus::Inconclusive,
                    witness: None,
                    failure_note: Some(format!(
                        "search budget of {} candidates exhausted",
                        options.budget
                    )),
                    candidates_examined: examined,
                });
            }
            examined += pending.len();
            let results: Vec<Option<(SullivanModel, Audit)>> = pending
                .par_iter()
                .map(|choice| {
                    let model = build(choice)?;
                    let dd_zero = (0..width)
                        .all(|i| model.differential_unchecked(model.d_generator(i)).is_zero());
                    if !dd_zero {
                        return None;
                    }
                    let a = audit(&model, n, audit_bound);
                    Some((model, a))
                })
                .collect();
            for (model, a) in results.into_iter().flatten() {
                match a {
                    Audit::Pass => {
                        return Ok(RealizabilityVerdict {
                            status: RealizabilityStatus::Realizable,
                            witness: Some(model.renamed(format!("witness {f}"))),
                            failure_note: None,
                            candidates_examined: examined,
                        })
                    }
                    Audit::Fail { degree, betti } => {
                        if best.is_none_or(|(d, _)| degree > d) {
                            best = Some((degree, betti));
                        }
                    }
                }
            }
        }
    }
    let note = match best {
        Some((d, _)) if d == n => format!("no candidate has a non-zero class in degree {n}"),
        Some((d, b)) => format!(
            "every candidate differential leaves cohomology above degree {n}; \
             the best candidate still has b_{d} = {b}"
        ),
        None => "no candidate differential satisfies d^2 = 0".to_string(),
    };
    Ok(RealizabilityVerdict {
        status: RealizabilityStatus::Unrealizable,
        witness: None,
        failure_note: Some(note),
        candidates_examined: examined,
    })
}

/// Simply connected rank vectors of formal dimension `n` passing
/// [`fh_feasible`], optionally filtered by [`realizable`]; canonical order.
pub fn enumerate_candidates(n: u32, prune: bool, options: &SearchOptions) -> Result<Vec<RankVector>> {
    Ok(enumerate_with_verdicts(n, prune, options)?
        .into_iter()
        .filter(|(_, v)| {
            v.as_ref()
                .is_none_or(|v| v.status == RealizabilityStatus::Realizable)
        })
        .map(|(f, _)| f)
        .collect())
}

/// Like [`enumerate_candidates`] but keeps every feasible vector together
/// with its realizability verdict (when pruning).
pub fn enumerate_with_verdicts(
    n: u32,
    prune: bool,
    options: &SearchOptions,
) -> Result<Vec<(RankVector, Option<RealizabilityVerdict>)>> {
    let feasible: Vec<RankVector> = box_vectors(n)
        .into_iter()
        .filter(|f| fh_feasible(f, n as i64))
        .collect();
    if !prune {
        return Ok(feasible.into_iter().map(|f| (f, None)).collect());
    }
    feasible
        .into_par_iter()
        .map(|f| {
            let v = realizable(&f, options)?;
            Ok((f, Some(v)))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohomology::betti;

    fn rv(s: &str) -> RankVector {
        s.parse().unwrap()
    }

    #[test]
    fn formal_dimension_examples() {
        assert_eq!(formal_dimension(&rv("2:1,3:1")), 2);
        assert_eq!(formal_dimension(&rv("2:1,3:1,5:1")), 7);
        assert_eq!(formal_dimension(&rv("2:2,3:1,5:1")), 6);
        assert_eq!(formal_dimension(&rv("1:1,2:1,9:1")), 9);
        assert_eq!(formal_dimension(&rv("2:1")), -1);
    }

    #[test]
    fn feasibility_examples() {
        assert!(fh_feasible(&rv("4:1,7:1"), 4));
        assert!(!fh_feasible(&rv("2:1"), 2));
        assert!(fh_feasible(&rv("3:1,4:1,5:1"), 5));
    }

    #[test]
    fn rank_vector_order_and_text() {
        let mut v = [rv("2:2,3:3"), rv("7:1"), rv("2:1,3:1,5:1"), rv("3:1,4:1,7:1")];
        v.sort();
        let s: Vec<String> = v.iter().map(|f| f.to_string()).collect();
        assert_eq!(s, ["7:1", "3:1,4:1,7:1", "2:1,3:1,5:1", "2:2,3:3"]);
        assert!("2-1".parse::<RankVector>().is_err());
        assert_eq!(rv("0"), RankVector::new());
        assert_eq!(rv("3:1,3:1"), rv("3:2"));
    }

    #[test]
    fn sphere_detection() {
        assert_eq!(rv("2:1,3:1").sphere_dimension(), Some(2));
        assert_eq!(rv("5:1").sphere_dimension(), Some(5));
        assert_eq!(rv("2:1,5:1").sphere_dimension(), None);
        assert_eq!(rv("4:1,7:1").sphere_dimension(), Some(4));
    }

    #[test]
    fn coefficient_sets() {
        assert!("1,2".parse::<CoeffSet>().is_err());
        let c: CoeffSet = "{-1, 0, 1/2}".parse().unwrap();
        assert_eq!(c.to_string(), "-1,0,1/2");
    }

    #[test]
    fn unrealizable_when_differentials_are_forced_to_zero() {
        let v = realizable(&rv("3:1,4:1,5:1"), &SearchOptions::default()).unwrap();
        assert_eq!(v.status, RealizabilityStatus::Unrealizable);
        assert_eq!(v.candidates_examined, 1);
        assert!(v.witness.is_none());
    }

    #[test]
    fn cp2_is_realizable() {
        let v = realizable(&rv("2:1,5:1"), &SearchOptions::default()).unwrap();
        assert_eq!(v.status, RealizabilityStatus::Realizable);
        let w = v.witness.unwrap();
        assert_eq!(w.format_element(w.d_generator(1)), "x2^3");
    }

    #[test]
    fn s2_times_cp2_witness() {
        let v = realizable(&rv("2:2,3:1,5:1"), &SearchOptions::default()).unwrap();
        assert_eq!(v.status, RealizabilityStatus::Realizable);
        let w = v.witness.unwrap();
        assert!(w.validate(14).is_valid());
        let b = betti(&w, 14);
        assert_eq!(b.top_degree(), Some(6));
    }

    #[test]
    fn tiny_budget_is_inconclusive() {
        let options = SearchOptions {
            budget: 3,
            ..SearchOptions::default()
        };
        let v = realizable(&rv("2:2,3:2"), &options).unwrap();
        assert_eq!(v.status, RealizabilityStatus::Inconclusive);
    }

    #[test]
    fn audit_bound_precondition() {
        let options = SearchOptions {
            audit_bound: Some(5),
            ..SearchOptions::default()
        };
        assert!(realizable(&rv("2:1,5:1"), &options).is_err());
    }
}
