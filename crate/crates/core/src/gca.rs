//! Free graded-commutative algebras over the rationals.
//!
//! A [`SullivanModel`] is an ordered list of generators together with the
//! value of the differential on each generator. Odd generators anticommute
//! and square to zero, even generators commute; every product is brought to
//! canonical order (declaration order of the generators) with the Koszul sign
//! extracted, so stored monomials never carry a sign.

use std::collections::{BTreeMap, HashMap};
use std::fmt::{self, Write as _};
use std::ops::{Add, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rational(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Where a generator comes from in a relative model.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    Base,
    Fiber,
    Plain,
}

impl Origin {
    pub fn keyword(self) -> Option<&'static str> {
        match self {
            Origin::Base => Some("base"),
            Origin::Fiber => Some("fiber"),
            Origin::Plain => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Generator {
    pub name: String,
    pub degree: u32,
    pub origin: Origin,
}

impl Generator {
    pub fn new(name: impl Into<String>, degree: u32) -> Self {
        Generator {
            name: name.into(),
            degree,
            origin: Origin::Plain,
        }
    }

    pub fn with_origin(mut self, origin: Origin) -> Self {
        self.origin = origin;
        self
    }

    pub fn is_odd(&self) -> bool {
        self.degree % 2 == 1
    }
}

/// Exponent vector indexed by generator position. Odd generators have
/// exponent 0 or 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn unit(generators: usize) -> Self {
        Monomial(vec![0; generators])
    }

    pub fn generator(generators: usize, index: usize) -> Self {
        let mut exps = vec![0; generators];
        exps[index] = 1;
        Monomial(exps)
    }

    pub fn from_exponents(exponents: Vec<u32>) -> Self {
        Monomial(exponents)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn exponent(&self, index: usize) -> u32 {
        self.0[index]
    }

    /// Number of generator factors, counted with multiplicity.
    pub fn factor_count(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_unit(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn width(&self) -> usize {
        self.0.len()
    }
}

/// A finite rational linear combination of canonical monomials.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Element {
    terms: BTreeMap<Monomial, Rational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Homogeneity {
    Zero,
    Degree(u32),
    Mixed,
}

impl Element {
    pub fn zero() -> Self {
        Element::default()
    }

    pub fn monomial(m: Monomial) -> Self {
        Element::term(Rational::one(), m)
    }

    pub fn term(coeff: Rational, m: Monomial) -> Self {
        let mut e = Element::zero();
        e.add_term(m, coeff);
        e
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add_term(&mut self, m: Monomial, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(coeff);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Element {
        if c.is_zero() {
            return Element::zero();
        }
        Element {
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), v * c))
                .collect(),
        }
    }
}

impl Add for &Element {
    type Output = Element;
    fn add(self, rhs: &Element) -> Element {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Element {
    type Output = Element;
    fn sub(self, rhs: &Element) -> Element {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Neg for &Element {
    type Output = Element;
    fn neg(self) -> Element {
        self.scale(&-Rational::one())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ViolationKind {
    DSquaredNonzero,
    NotDecomposable,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub generator: String,
    pub kind: ViolationKind,
    pub term: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub d_squared_zero: bool,
    pub minimal: bool,
    pub simply_connected: bool,
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.d_squared_zero
    }
}

/// A free graded-commutative algebra with a differential given on generators.
#[derive(Clone, Debug)]
pub struct SullivanModel {
    name: String,
    generators: Vec<Generator>,
    differential: Vec<Element>,
    index: HashMap<String, usize>,
}

impl PartialEq for SullivanModel {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
            && self.generators == other.generators
            && self.differential == other.differential
    }
}

impl Eq for SullivanModel {}

impl SullivanModel {
    pub fn new(name: impl Into<String>, generators: Vec<Generator>) -> Result<Self> {
        let mut index = HashMap::new();
        for (i, g) in generators.iter().enumerate() {
            if g.degree == 0 {
                return Err(Error::InvalidDegree {
                    name: g.name.clone(),
                    degree: 0,
                });
            }
            if index.insert(g.name.clone(), i).is_some() {
                return Err(Error::DuplicateGenerator(g.name.clone()));
            }
        }
        let n = generators.len();
        Ok(SullivanModel {
            name: name.into(),
            generators,
            differential: vec![Element::zero(); n],
            index,
        })
    }

    /// Assigns `d(generator) = value`. The value must be homogeneous of
    /// degree one more than the generator.
    pub fn set_differential(&mut self, generator: &str, value: Element) -> Result<()> {
        let i = self.index_of(generator).ok_or_else(|| Error::UnknownGenerator {
            name: generator.to_string(),
            position: 0,
        })?;
        self.check_element(&value)?;
        let expected = self.generators[i].degree + 1;
        match self.homogeneity(&value) {
            Homogeneity::Zero => {}
            Homogeneity::Degree(k) if k == expected => {}
            Homogeneity::Degree(k) => {
                return Err(Error::DegreeMismatch {
                    generator: generator.to_string(),
                    expected,
                    found: k.to_string(),
                })
            }
            Homogeneity::Mixed => {
                return Err(Error::DegreeMismatch {
                    generator: generator.to_string(),
                    expected,
                    found: "mixed".to_string(),
                })
            }
        }
        self.differential[i] = value;
        Ok(())
    }

    pub fn with_differential(mut self, generator: &str, value: Element) -> Result<Self> {
        self.set_differential(generator, value)?;
        Ok(self)
    }

    /// Shorthand for building models from expressions in the surface syntax,
    /// e.g. `model.with_d("x5", "x2^3")`.
    pub fn with_d(self, generator: &str, expr: &str) -> Result<Self> {
        let value = self.parse_element(expr)?;
        self.with_differential(generator, value)
    }

    pub fn parse_element(&self, expr: &str) -> Result<Element> {
        crate::dsl::parse_expression(self, expr)
    }

    pub fn renamed(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn generators(&self) -> &[Generator] {
        &self.generators
    }

    pub fn generator(&self, index: usize) -> &Generator {
        &self.generators[index]
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn d_generator(&self, index: usize) -> &Element {
        &self.differential[index]
    }

    pub fn gen_element(&self, name: &str) -> Result<Element> {
        let i = self.index_of(name).ok_or_else(|| Error::UnknownGenerator {
            name: name.to_string(),
            position: 0,
        })?;
        Ok(Element::monomial(Monomial::generator(self.len(), i)))
    }

    pub fn degree(&self, m: &Monomial) -> u32 {
        m.0.iter()
            .zip(&self.generators)
            .map(|(e, g)| e * g.degree)
            .sum()
    }

    pub fn homogeneity(&self, a: &Element) -> Homogeneity {
        let mut degrees = a.terms.keys().map(|m| self.degree(m));
        match degrees.next() {
            None => Homogeneity::Zero,
            Some(k) if degrees.all(|j| j == k) => Homogeneity::Degree(k),
            Some(_) => Homogeneity::Mixed,
        }
    }

    fn check_monomial(&self, m: &Monomial) -> Result<()> {
        let ok = m.width() == self.len()
            && m.0
                .iter()
                .zip(&self.generators)
                .all(|(&e, g)| !g.is_odd() || e <= 1);
        if ok {
            Ok(())
        } else {
            Err(Error::ModelMismatch(self.name.clone()))
        }
    }

    fn check_element(&self, a: &Element) -> Result<()> {
        a.terms.keys().try_for_each(|m| self.check_monomial(m))
    }

    /// Brings an ordered product of generators to canonical form. Returns
    /// `None` when an odd generator repeats; otherwise the Koszul sign
    /// (`true` = negative) and the canonical monomial.
    pub fn normalize_monomial(&self, factors: &[&str]) -> Result<Option<(i8, Monomial)>> {
        let mut idx = Vec::with_capacity(factors.len());
        for (position, name) in factors.iter().enumerate() {
            let i = self.index_of(name).ok_or_else(|| Error::UnknownGenerator {
                name: name.to_string(),
                position,
            })?;
            idx.push(i);
        }
        Ok(self.normalize_indices(&idx))
    }

    pub(crate) fn normalize_indices(&self, idx: &[usize]) -> Option<(i8, Monomial)> {
        let mut exps = vec![0u32; self.len()];
        let mut inversions = 0usize;
        for (p, &i) in idx.iter().enumerate() {
            exps[i] += 1;
            if self.generators[i].is_odd() {
                if exps[i] > 1 {
                    return None;
                }
                inversions += idx[..p]
                    .iter()
                    .filter(|&&j| j > i && self.generators[j].is_odd())
                    .count();
            }
        }
        let sign = if inversions.is_multiple_of(2) { 1 } else { -1 };
        Some((sign, Monomial(exps)))
    }

    /// Product of two canonical monomials: `None` if it vanishes, else
    /// (negative?, canonical product).
    pub fn mul_monomials(&self, a: &Monomial, b: &Monomial) -> Option<(bool, Monomial)> {
        let mut negative = false;
        let mut odd_in_a_after = 0usize;
        // Walk from the last generator down so that, at index j, we know how
        // many odd factors of `a` sit strictly after j.
        for j in (0..self.len()).rev() {
            if self.generators[j].is_odd() {
                if b.0[j] == 1 {
                    if a.0[j] == 1 {
                        return None;
                    }
                    if odd_in_a_after % 2 == 1 {
                        negative = !negative;
                    }
                }
                if a.0[j] == 1 {
                    odd_in_a_after += 1;
                }
            }
        }
        let exps = a.0.iter().zip(&b.0).map(|(x, y)| x + y).collect();
        Some((negative, Monomial(exps)))
    }

    pub fn mul(&self, a: &Element, b: &Element) -> Result<Element> {
        self.check_element(a)?;
        self.check_element(b)?;
        Ok(self.mul_unchecked(a, b))
    }

    pub(crate) fn mul_unchecked(&self, a: &Element, b: &Element) -> Element {
        let mut out = Element::zero();
        for (ma, ca) in &a.terms {
            for (mb, cb) in &b.terms {
                if let Some((negative, m)) = self.mul_monomials(ma, mb) {
                    let c = ca * cb;
                    out.add_term(m, if negative { -c } else { c });
                }
            }
        }
        out
    }

    pub fn differential(&self, a: &Element) -> Result<Element> {
        self.check_element(a)?;
        Ok(self.differential_unchecked(a))
    }

    pub(crate) fn differential_unchecked(&self, a: &Element) -> Element {
        let mut out = Element::zero();
        for (m, c) in &a.terms {
            for (dm, dc) in self.d_monomial(m).terms {
                out.add_term(dm, dc * c);
            }
        }
        out
    }

    /// Leibniz rule on a canonical monomial `prefix * g^e * suffix`:
    /// the `g` term contributes `(-1)^|prefix| e * prefix * g^(e-1) * dg * suffix`.
    pub(crate) fn d_monomial(&self, m: &Monomial) -> Element {
        let n = self.len();
        let mut out = Element::zero();
        let mut prefix_degree = 0u32;
        for i in 0..n {
            let e = m.0[i];
            if e == 0 {
                continue;
            }
            let dg = &self.differential[i];
            if !dg.is_zero() {
                let mut left = m.clone();
                left.0[i] -= 1;
                left.0[i + 1..].iter_mut().for_each(|x| *x = 0);
                let mut right = m.clone();
                right.0[..=i].iter_mut().for_each(|x| *x = 0);
                let mut factor = rational(e as i64);
                if prefix_degree % 2 == 1 {
                    factor = -factor;
                }
                for (dm, dc) in &dg.terms {
                    let Some((s1, lm)) = self.mul_monomials(&left, dm) else {
                        continue;
                    };
                    let Some((s2, full)) = self.mul_monomials(&lm, &right) else {
                        continue;
                    };
                    let c = dc * &factor;
                    out.add_term(full, if s1 ^ s2 { -c } else { c });
                }
            }
            prefix_degree += e * self.generators[i].degree;
        }
        out
    }

    /// All canonical monomials of total degree `k`, in ascending
    /// lexicographic order of exponent vectors.
    pub fn basis_of_degree(&self, k: u32) -> Vec<Monomial> {
        let mut out = Vec::new();
        let mut exps = vec![0u32; self.len()];
        self.fill_basis(0, k, &mut exps, &mut out);
        out
    }

    fn fill_basis(&self, i: usize, remaining: u32, exps: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if i == self.len() {
            if remaining == 0 {
                out.push(Monomial(exps.clone()));
            }
            return;
        }
        let g = &self.generators[i];
        let max = if g.is_odd() {
            1.min(remaining / g.degree)
        } else {
            remaining / g.degree
        };
        for e in 0..=max {
            exps[i] = e;
            self.fill_basis(i + 1, remaining - e * g.degree, exps, out);
        }
        exps[i] = 0;
    }

    /// Checks d∘d = 0 on every generator (exact, since each d(g) is finite)
    /// and on the full basis of every degree up to `max_degree`, and
    /// whether every differential lands in the decomposables.
    pub fn validate(&self, max_degree: u32) -> ValidationReport {
        let mut violations = Vec::new();
        let mut d_squared_zero = true;
        for (i, g) in self.generators.iter().enumerate() {
            let dd = self.differential_unchecked(&self.differential[i]);
            if !dd.is_zero() {
                d_squared_zero = false;
                violations.push(Violation {
                    generator: g.name.clone(),
                    kind: ViolationKind::DSquaredNonzero,
                    term: self.format_element(&dd),
                });
            }
        }
        if d_squared_zero {
            'sweep: for k in 0..=max_degree {
                for m in self.basis_of_degree(k) {
                    let dd = self.differential_unchecked(&self.d_monomial(&m));
                    if !dd.is_zero() {
                        d_squared_zero = false;
                        violations.push(Violation {
                            generator: self.format_monomial(&m),
                            kind: ViolationKind::DSquaredNonzero,
                            term: self.format_element(&dd),
                        });
                        break 'sweep;
                    }
                }
            }
        }
        let mut minimal = true;
        for (i, g) in self.generators.iter().enumerate() {
            for (m, c) in &self.differential[i].terms {
                if m.factor_count() < 2 {
                    minimal = false;
                    violations.push(Violation {
                        generator: g.name.clone(),
                        kind: ViolationKind::NotDecomposable,
                        term: self.format_element(&Element::term(c.clone(), m.clone())),
                    });
                }
            }
        }
        ValidationReport {
            d_squared_zero,
            minimal,
            simply_connected: self.generators.iter().all(|g| g.degree >= 2),
            violations,
        }
    }

    /// Disjoint union of generator sets; the differential of each factor is
    /// kept. Generator names must not collide.
    pub fn tensor(&self, other: &SullivanModel, name: impl Into<String>) -> Result<SullivanModel> {
        let mut gens = self.generators.clone();
        gens.extend(other.generators.iter().cloned());
        let mut out = SullivanModel::new(name, gens)?;
        let n = self.len();
        let total = out.len();
        let widen = |e: &Element, offset: usize| -> Element {
            let mut w = Element::zero();
            for (m, c) in &e.terms {
                let mut exps = vec![0; total];
                exps[offset..offset + m.width()].copy_from_slice(&m.0);
                w.add_term(Monomial(exps), c.clone());
            }
            w
        };
        for i in 0..n {
            out.differential[i] = widen(&self.differential[i], 0);
        }
        for j in 0..other.len() {
            out.differential[n + j] = widen(&other.differential[j], n);
        }
        Ok(out)
    }

    /// Rank vector of the generator space: number of generators per degree.
    pub fn generator_ranks(&self) -> BTreeMap<u32, u32> {
        let mut out = BTreeMap::new();
        for g in &self.generators {
            *out.entry(g.degree).or_insert(0) += 1;
        }
        out
    }

    pub fn format_monomial(&self, m: &Monomial) -> String {
        if m.is_unit() {
            return "1".to_string();
        }
        let mut s = String::new();
        for (i, &e) in m.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !s.is_empty() {
                s.push('*');
            }
            s.push_str(&self.generators[i].name);
            if e > 1 {
                let _ = write!(s, "^{e}");
            }
        }
        s
    }

    /// Renders an element in the surface syntax accepted by the model parser.
    pub fn format_element(&self, a: &Element) -> String {
        if a.is_zero() {
            return "0".to_string();
        }
        let mut s = String::new();
        for (i, (m, c)) in a.terms.iter().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if negative {
                    s.push('-');
                }
            } else {
                s.push_str(if negative { " - " } else { " + " });
            }
            if m.is_unit() {
                let _ = write!(s, "{abs}");
            } else {
                if !abs.is_one() {
                    let _ = write!(s, "{abs} ");
                }
                s.push_str(&self.format_monomial(m));
            }
        }
        s
    }
}

impl fmt::Display for SullivanModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::dsl::print_model(self))
    }
}
