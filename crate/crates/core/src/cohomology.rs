//! Cohomology of a Sullivan model, computed degree by degree with exact
//! rational elimination.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gca::{Element, Homogeneity, Monomial, Rational, SullivanModel};
use crate::linalg::{RationalMatrix, Solution};

/// Rational Betti numbers `b_0..=b_bound`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct BettiTable {
    bound: u32,
    values: Vec<usize>,
}

impl BettiTable {
    pub fn new(values: Vec<usize>) -> Self {
        assert!(!values.is_empty(), "a Betti table covers at least degree 0");
        BettiTable {
            bound: values.len() as u32 - 1,
            values,
        }
    }

    pub fn bound(&self) -> u32 {
        self.bound
    }

    /// `None` above the bound.
    pub fn get(&self, k: u32) -> Option<usize> {
        self.values.get(k as usize).copied()
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn truncate(&self, bound: u32) -> BettiTable {
        BettiTable::new(self.values[..=(bound.min(self.bound) as usize)].to_vec())
    }

    pub fn top_degree(&self) -> Option<u32> {
        self.values.iter().rposition(|&b| b != 0).map(|k| k as u32)
    }

    pub fn total(&self) -> usize {
        self.values.iter().sum()
    }
}

impl fmt::Display for BettiTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.values.iter().map(|b| b.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

/// A linear functional on a degree-`k` cochain space that vanishes on all
/// coboundaries; it proves a cocycle is not a coboundary when it does not
/// vanish on it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CokernelFunctional {
    pub degree: u32,
    pub coefficients: Vec<(Monomial, Rational)>,
}

impl CokernelFunctional {
    pub fn evaluate(&self, a: &Element) -> Rational {
        self.coefficients
            .iter()
            .map(|(m, c)| c * a.coefficient(m))
            .sum()
    }

    /// Re-checks the functional against the model: it must vanish on the
    /// image of every degree-`(k-1)` basis monomial.
    pub fn annihilates_coboundaries(&self, model: &SullivanModel) -> bool {
        if self.degree == 0 {
            return true;
        }
        model
            .basis_of_degree(self.degree - 1)
            .iter()
            .all(|m| self.evaluate(&model.d_monomial(m)).is_zero())
    }

    pub fn render(&self, model: &SullivanModel) -> String {
        let mut e = Element::zero();
        for (m, c) in &self.coefficients {
            e.add_term(m.clone(), c.clone());
        }
        model.format_element(&e)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CoboundaryVerdict {
    /// `d(witness) = a`.
    Yes { witness: Element },
    No { certificate: CokernelFunctional },
}

impl CoboundaryVerdict {
    pub fn is_coboundary(&self) -> bool {
        matches!(self, CoboundaryVerdict::Yes { .. })
    }
}

/// Per-model cohomology engine. Bases and coboundary ranks are memoized per
/// degree; the caches sit behind mutexes so one engine can be shared across
/// threads.
pub struct Cohomology<'m> {
    model: &'m SullivanModel,
    bases: Mutex<HashMap<u32, Arc<Vec<Monomial>>>>,
    ranks: Mutex<HashMap<u32, usize>>,
}

impl<'m> Cohomology<'m> {
    pub fn new(model: &'m SullivanModel) -> Self {
        Cohomology {
            model,
            bases: Mutex::new(HashMap::new()),
            ranks: Mutex::new(HashMap::new()),
        }
    }

    pub fn model(&self) -> &SullivanModel {
        self.model
    }

    pub fn basis(&self, k: u32) -> Arc<Vec<Monomial>> {
        if let Some(b) = self.bases.lock().unwrap().get(&k) {
            return b.clone();
        }
        let b = Arc::new(self.model.basis_of_degree(k));
        self.bases.lock().unwrap().entry(k).or_insert(b).clone()
    }

    /// Matrix of `d: (ΛV)^k -> (ΛV)^(k+1)`; column `j` is the image of the
    /// `j`-th degree-`k` basis monomial.
    pub fn coboundary_matrix(&self, k: u32) -> RationalMatrix {
        let source = self.basis(k);
        let target = self.basis(k + 1);
        let index: HashMap<&Monomial, usize> =
            target.iter().enumerate().map(|(i, m)| (m, i)).collect();
        let mut mat = RationalMatrix::zeros(target.len(), source.len());
        for (j, m) in source.iter().enumerate() {
            for (dm, c) in self.model.d_monomial(m).terms() {
                mat.set(index[dm], j, c.clone());
            }
        }
        mat
    }

    /// Rank of the coboundary map out of degree `k`.
    pub fn rank(&self, k: u32) -> usize {
        if let Some(&r) = self.ranks.lock().unwrap().get(&k) {
            return r;
        }
        let r = self.coboundary_matrix(k).rank();
        self.ranks.lock().unwrap().insert(k, r);
        r
    }

    pub fn betti_number(&self, k: u32) -> usize {
        let dim = self.basis(k).len();
        let incoming = if k == 0 { 0 } else { self.rank(k - 1) };
        dim - self.rank(k) - incoming
    }

    pub fn betti(&self, bound: u32) -> BettiTable {
        (0..=bound).into_par_iter().for_each(|k| {
            self.rank(k);
        });
        BettiTable::new((0..=bound).map(|k| self.betti_number(k)).collect())
    }

    pub fn top_nonvanishing_degree(&self, bound: u32) -> Option<u32> {
        self.betti(bound).top_degree()
    }

    /// Decides whether the homogeneous cocycle `a` is a coboundary.
    pub fn is_coboundary(&self, a: &Element) -> Result<CoboundaryVerdict> {
        let model = self.model;
        let da = model.differential(a)?;
        if !da.is_zero() {
            return Err(Error::NotACocycle {
                differential: model.format_element(&da),
            });
        }
        let k = match model.homogeneity(a) {
            Homogeneity::Zero => {
                return Ok(CoboundaryVerdict::Yes {
                    witness: Element::zero(),
                })
            }
            Homogeneity::Degree(k) => k,
            Homogeneity::Mixed => return Err(Error::NotHomogeneous),
        };
        let target = self.basis(k);
        let b: Vec<Rational> = target.iter().map(|m| a.coefficient(m)).collect();
        let (mat, source) = if k == 0 {
            (RationalMatrix::zeros(target.len(), 0), Arc::new(Vec::new()))
        } else {
            (self.coboundary_matrix(k - 1), self.basis(k - 1))
        };
        Ok(match mat.solve(&b) {
            Solution::Solvable(x) => {
                let mut witness = Element::zero();
                for (m, c) in source.iter().zip(x) {
                    witness.add_term(m.clone(), c);
                }
                CoboundaryVerdict::Yes { witness }
            }
            Solution::Inconsistent(y) => CoboundaryVerdict::No {
                certificate: CokernelFunctional {
                    degree: k,
                    coefficients: target
                        .iter()
                        .cloned()
                        .zip(y)
                        .filter(|(_, c)| !c.is_zero())
                        .collect(),
                },
            },
        })
    }
}

pub fn coboundary_matrix(model: &SullivanModel, k: u32) -> RationalMatrix {
    Cohomology::new(model).coboundary_matrix(k)
}

pub fn betti(model: &SullivanModel, bound: u32) -> BettiTable {
    Cohomology::new(model).betti(bound)
}

pub fn is_coboundary(model: &SullivanModel, a: &Element) -> Result<CoboundaryVerdict> {
    Cohomology::new(model).is_coboundary(a)
}

pub fn top_nonvanishing_degree(model: &SullivanModel, bound: u32) -> Option<u32> {
    Cohomology::new(model).top_nonvanishing_degree(bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gca::Generator;

    fn cp2() -> SullivanModel {
        SullivanModel::new("CP2", vec![Generator::new("x2", 2), Generator::new("x5", 5)])
            .unwrap()
            .with_d("x5", "x2^3")
            .unwrap()
    }

    fn relative_42() -> SullivanModel {
        SullivanModel::new(
            "B",
            vec![
                Generator::new("z1", 1),
                Generator::new("z2", 2),
                Generator::new("x2", 2),
                Generator::new("x5", 5),
                Generator::new("z9", 9),
            ],
        )
        .unwrap()
        .with_d("z1", "x2")
        .unwrap()
        .with_d("x5", "x2^3")
        .unwrap()
        .with_d("z9", "z2^5")
        .unwrap()
    }

    #[test]
    fn coboundary_matrix_examples() {
        let m = cp2();
        let mat = coboundary_matrix(&m, 5);
        assert_eq!((mat.rows(), mat.cols()), (1, 1));
        assert_eq!(mat.get(0, 0), crate::gca::rational(1));
        assert!(coboundary_matrix(&m, 2).is_zero());

        let r = relative_42();
        let mat = coboundary_matrix(&r, 5);
        assert_eq!(mat.rank(), 3);
        let engine = Cohomology::new(&r);
        let target = engine.basis(6);
        let mut image: Vec<String> = (0..mat.cols())
            .flat_map(|j| {
                (0..mat.rows())
                    .filter(|&i| !mat.get(i, j).is_zero())
                    .map(|i| r.format_monomial(&target[i]))
                    .collect::<Vec<_>>()
            })
            .collect();
        image.sort();
        image.dedup();
        assert_eq!(image, vec!["x2^3", "z2*x2^2", "z2^2*x2"]);
    }

    #[test]
    fn betti_examples() {
        assert_eq!(betti(&cp2(), 9).to_string(), "1 0 1 0 1 0 0 0 0 0");
        let s5 = SullivanModel::new("S5", vec![Generator::new("x5", 5)]).unwrap();
        assert_eq!(betti(&s5, 7).values(), &[1, 0, 0, 0, 0, 1, 0, 0]);
    }

    #[test]
    fn coboundary_examples() {
        let r = relative_42();
        let z2cubed = r.parse_element("z2^3").unwrap();
        match is_coboundary(&r, &z2cubed).unwrap() {
            CoboundaryVerdict::No { certificate } => {
                assert!(certificate.annihilates_coboundaries(&r));
                assert!(!certificate.evaluate(&z2cubed).is_zero());
            }
            other => panic!("{other:?}"),
        }
        let m = cp2();
        let x2cubed = m.parse_element("x2^3").unwrap();
        match is_coboundary(&m, &x2cubed).unwrap() {
            CoboundaryVerdict::Yes { witness } => {
                assert_eq!(witness, m.gen_element("x5").unwrap())
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(
            is_coboundary(&m, &Element::zero()).unwrap(),
            CoboundaryVerdict::Yes {
                witness: Element::zero()
            }
        );
    }

    #[test]
    fn non_cocycle_is_rejected() {
        let m = cp2();
        let err = is_coboundary(&m, &m.gen_element("x5").unwrap()).unwrap_err();
        assert_eq!(
            err,
            Error::NotACocycle {
                differential: "x2^3".into()
            }
        );
    }

    #[test]
    fn top_degree_examples() {
        assert_eq!(top_nonvanishing_degree(&cp2(), 12), Some(4));
        let free = SullivanModel::new(
            "F",
            vec![
                Generator::new("x3", 3),
                Generator::new("x4", 4),
                Generator::new("x5", 5),
            ],
        )
        .unwrap();
        assert_eq!(top_nonvanishing_degree(&free, 12), Some(12));
        let s2 = SullivanModel::new("S2", vec![Generator::new("y2", 2), Generator::new("y3", 3)])
            .unwrap()
            .with_d("y3", "y2^2")
            .unwrap();
        assert_eq!(top_nonvanishing_degree(&s2, 10), Some(2));
    }
}
