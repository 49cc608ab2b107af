//! Strategies, oracles and property bodies shared by the property suites and
//! the acceptance target.

#![allow(dead_code)]

use std::collections::BTreeSet;

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use sullivan_core::cohomology::BettiTable;
use sullivan_core::fibration::{solve_exact_ranks, ExactSequenceProblem, RankSolution, SequenceSlot};
use sullivan_core::gca::{rational, Element, Generator, SullivanModel};

pub const CASES: u32 = 1000;

/// Raw material for a random model: generator degrees and a stream of
/// coefficients in `{-1, 0, 1}` consumed while filling in differentials.
#[derive(Clone, Debug)]
pub struct ModelSeed {
    pub degrees: Vec<u32>,
    pub coeffs: Vec<i64>,
}

pub fn model_seed() -> impl Strategy<Value = ModelSeed> {
    (
        prop::collection::vec(1u32..=9, 1..=6),
        prop::collection::vec(-1i64..=1, 48),
    )
        .prop_map(|(mut degrees, coeffs)| {
            degrees.sort_unstable();
            ModelSeed { degrees, coeffs }
        })
}

struct Stream<'a> {
    values: &'a [i64],
    pos: usize,
}

impl Stream<'_> {
    fn next(&mut self) -> i64 {
        let v = self.values[self.pos % self.values.len()];
        self.pos += 1;
        v
    }
}

/// Builds a model whose generator `i` has a differential that is a random
/// combination of decomposable monomials in the earlier generators. The
/// result need not satisfy `d^2 = 0`.
pub fn build_model(seed: &ModelSeed) -> SullivanModel {
    let gens: Vec<Generator> = seed
        .degrees
        .iter()
        .enumerate()
        .map(|(i, &d)| Generator::new(format!("g{i}"), d))
        .collect();
    let mut model = SullivanModel::new("random", gens).expect("distinct names");
    let mut stream = Stream {
        values: &seed.coeffs,
        pos: 0,
    };
    for i in 0..model.len() {
        let target = model.generator(i).degree + 1;
        let mut image = Element::zero();
        for m in model.basis_of_degree(target) {
            let earlier = m.exponents().iter().skip(i).all(|&e| e == 0);
            if earlier && m.factor_count() >= 2 {
                let c = stream.next();
                if c != 0 {
                    image.add_term(m, rational(c));
                }
            }
        }
        let name = model.generator(i).name.clone();
        model.set_differential(&name, image).expect("degrees match");
    }
    model
}

/// A random homogeneous element of degree `k` (possibly zero).
pub fn element(model: &SullivanModel, k: u32, coeffs: &[i64]) -> Element {
    let mut out = Element::zero();
    for (m, c) in model.basis_of_degree(k).into_iter().zip(coeffs.iter().cycle()) {
        if *c != 0 {
            out.add_term(m, rational(*c));
        }
    }
    out
}

fn sign(a: u32, b: u32) -> i64 {
    if a % 2 == 1 && b % 2 == 1 {
        -1
    } else {
        1
    }
}

pub fn graded_commutativity(seed: &ModelSeed, ka: u32, kb: u32, c: &[i64]) -> Result<(), TestCaseError> {
    let model = build_model(seed);
    let a = element(&model, ka, c);
    let b = element(&model, kb, &c[3..]);
    let ab = model.mul(&a, &b).unwrap();
    let ba = model.mul(&b, &a).unwrap();
    prop_assert_eq!(ab, ba.scale(&rational(sign(ka, kb))));
    Ok(())
}

pub fn leibniz(seed: &ModelSeed, ka: u32, kb: u32, c: &[i64]) -> Result<(), TestCaseError> {
    let model = build_model(seed);
    let a = element(&model, ka, c);
    let b = element(&model, kb, &c[5..]);
    let lhs = model.differential(&model.mul(&a, &b).unwrap()).unwrap();
    let left = model.mul(&model.differential(&a).unwrap(), &b).unwrap();
    let right = model.mul(&a, &model.differential(&b).unwrap()).unwrap();
    let rhs = &left + &right.scale(&rational(sign(ka, 1)));
    prop_assert_eq!(lhs, rhs);
    Ok(())
}

/// Validation accepts a model exactly when `d^2` vanishes on every
/// generator, and then `d^2` vanishes on arbitrary elements too.
pub fn d_squared_after_validation(seed: &ModelSeed, k: u32, c: &[i64]) -> Result<(), TestCaseError> {
    let model = build_model(seed);
    let report = model.validate(20);
    let on_generators = (0..model.len()).all(|i| {
        model
            .differential(model.d_generator(i))
            .unwrap()
            .is_zero()
    });
    prop_assert_eq!(report.d_squared_zero, on_generators);
    if report.is_valid() {
        let a = element(&model, k, c);
        let dd = model.differential(&model.differential(&a).unwrap()).unwrap();
        prop_assert!(dd.is_zero());
    }
    Ok(())
}

/// Coefficients of `prod_{even d} 1/(1 - t^d) * prod_{odd d} (1 + t^d)` up to
/// `t^k`.
pub fn basis_series(degrees: &[u32], k: u32) -> Vec<u64> {
    let k = k as usize;
    let mut series = vec![0u64; k + 1];
    series[0] = 1;
    for &d in degrees {
        let d = d as usize;
        if d % 2 == 1 {
            for j in (d..=k).rev() {
                series[j] += series[j - d];
            }
        } else {
            for j in d..=k {
                series[j] += series[j - d];
            }
        }
    }
    series
}

pub fn basis_generating_function(seed: &ModelSeed, k: u32) -> Result<(), TestCaseError> {
    let model = build_model(seed);
    let series = basis_series(&seed.degrees, k);
    for j in 0..=k {
        prop_assert_eq!(model.basis_of_degree(j).len() as u64, series[j as usize], "degree {}", j);
    }
    Ok(())
}

/// A hidden exact sequence built from arrow ranks, with some interior slots
/// hidden (never two adjacent ones).
#[derive(Clone, Debug)]
pub struct HiddenSequence {
    pub ranks: Vec<usize>,
    pub hide: Vec<bool>,
}

pub fn hidden_sequence() -> impl Strategy<Value = HiddenSequence> {
    (1usize..=10).prop_flat_map(|arrows| {
        (
            prop::collection::vec(0usize..=3, arrows),
            prop::collection::vec(any::<bool>(), arrows + 2),
        )
            .prop_map(|(ranks, hide)| HiddenSequence { ranks, hide })
    })
}

impl HiddenSequence {
    /// Slot dimensions: slot `j` sits between arrows `j - 1` and `j`, with
    /// zero end slots added.
    pub fn dimensions(&self) -> Vec<usize> {
        let mut r = vec![0];
        r.extend(&self.ranks);
        r.push(0);
        (0..=r.len())
            .map(|j| if j == 0 { 0 } else { r[j - 1] } + r.get(j).copied().unwrap_or(0))
            .collect()
    }

    pub fn problem(&self) -> ExactSequenceProblem {
        let dims = self.dimensions();
        let last = dims.len() - 1;
        let mut hidden_prev = false;
        let slots = dims
            .iter()
            .enumerate()
            .map(|(j, &d)| {
                let hide = j != 0 && j != last && self.hide[j % self.hide.len()] && !hidden_prev;
                hidden_prev = hide;
                if hide {
                    SequenceSlot::unknown(format!("V{j}"))
                } else {
                    SequenceSlot::known(format!("V{j}"), d)
                }
            })
            .collect();
        ExactSequenceProblem::new(slots)
    }
}

pub fn alternating_sum_vanishes(h: &HiddenSequence) -> Result<(), TestCaseError> {
    let problem = h.problem();
    let solutions = solve_exact_ranks(&problem).unwrap();
    prop_assert!(!solutions.is_empty());
    for s in &solutions {
        prop_assert_eq!(s.alternating_sum(), 0);
    }
    let dims = h.dimensions();
    prop_assert!(solutions.iter().any(|s| s.dimensions == dims));
    Ok(())
}

/// Arbitrary (possibly inconsistent) problems: known interior dimensions in
/// `0..=3`, unknown slots never adjacent, at most twelve slots.
pub fn small_problem() -> impl Strategy<Value = ExactSequenceProblem> {
    (3usize..=12).prop_flat_map(|n| {
        prop::collection::vec(prop::option::weighted(0.7, 0usize..=3), n).prop_map(|raw| {
            let last = raw.len() - 1;
            let mut prev_unknown = false;
            let slots = raw
                .iter()
                .enumerate()
                .map(|(j, d)| {
                    if j == 0 || j == last {
                        prev_unknown = false;
                        return SequenceSlot::known(format!("V{j}"), 0);
                    }
                    match d {
                        None if !prev_unknown => {
                            prev_unknown = true;
                            SequenceSlot::unknown(format!("V{j}"))
                        }
                        _ => {
                            prev_unknown = false;
                            SequenceSlot::known(format!("V{j}"), d.unwrap_or(0))
                        }
                    }
                })
                .collect();
            ExactSequenceProblem::new(slots)
        })
    })
}

/// Every assignment of unknown dimensions in `0..=6` and arrow ranks that
/// is exact at every slot.
pub fn brute_force(problem: &ExactSequenceProblem) -> BTreeSet<RankSolution> {
    fn go(
        problem: &ExactSequenceProblem,
        dims: &mut Vec<usize>,
        out: &mut BTreeSet<RankSolution>,
    ) {
        let j = dims.len();
        if j == problem.slots.len() {
            ranks(dims, &mut Vec::new(), out);
            return;
        }
        let range = match problem.slots[j].dimension {
            Some(d) => d..=d,
            None => 0..=6,
        };
        for d in range {
            dims.push(d);
            go(problem, dims, out);
            dims.pop();
        }
    }
    fn ranks(dims: &[usize], rs: &mut Vec<usize>, out: &mut BTreeSet<RankSolution>) {
        let j = rs.len();
        if j == dims.len() - 1 {
            let exact = (0..dims.len()).all(|i| {
                let incoming = if i == 0 { 0 } else { rs[i - 1] };
                let outgoing = if i == dims.len() - 1 { 0 } else { rs[i] };
                dims[i] == incoming + outgoing
            });
            if exact {
                out.insert(RankSolution {
                    dimensions: dims.to_vec(),
                    map_ranks: rs.clone(),
                });
            }
            return;
        }
        for r in 0..=dims[j].min(dims[j + 1]) {
            rs.push(r);
            ranks(dims, rs, out);
            rs.pop();
        }
    }
    let mut out = BTreeSet::new();
    go(problem, &mut Vec::new(), &mut out);
    out
}

pub fn solver_matches_brute_force(problem: &ExactSequenceProblem) -> Result<(), TestCaseError> {
    let solved = solve_exact_ranks(problem).unwrap();
    let brute: Vec<RankSolution> = brute_force(problem).into_iter().collect();
    prop_assert_eq!(solved, brute);
    Ok(())
}

/// Poincaré polynomial coefficients of a product of spheres and complex
/// projective spaces, up to degree `bound`.
pub fn kunneth(factors: &[Factor], bound: u32) -> BettiTable {
    let mut poly = vec![0usize; bound as usize + 1];
    poly[0] = 1;
    for f in factors {
        let degrees: Vec<usize> = match *f {
            Factor::Sphere(n) => vec![0, n as usize],
            Factor::Projective(n) => (0..=n as usize).map(|i| 2 * i).collect(),
        };
        let mut next = vec![0usize; poly.len()];
        for (i, &c) in poly.iter().enumerate() {
            for &d in &degrees {
                if i + d < next.len() {
                    next[i + d] += c;
                }
            }
        }
        poly = next;
    }
    BettiTable::new(poly)
}

#[derive(Clone, Copy, Debug)]
pub enum Factor {
    Sphere(u32),
    Projective(u32),
}
