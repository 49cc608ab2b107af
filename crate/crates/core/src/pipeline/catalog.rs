//! Named spaces: the low-dimensional elliptic rank vectors with example
//! models, and the rational types of the Eschenburg and Bazaikin spaces.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::cohomology::{betti, BettiTable};
use crate::ellipticity::{formal_dimension, RankVector};
use crate::error::Result;
use crate::gca::{Element, Generator, Monomial, SullivanModel};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CatalogEntry {
    pub name: String,
    #[serde(skip)]
    pub aliases: Vec<String>,
    pub ranks: RankVector,
    #[serde(skip)]
    pub model: Option<SullivanModel>,
    pub betti: Option<BettiTable>,
    pub dim: u32,
    /// Whether the entry is one of the low-dimensional table rows.
    #[serde(skip)]
    pub table_row: bool,
}

impl CatalogEntry {
    /// Builds an entry from a model; ranks, dimension and Betti numbers (up
    /// to `dim + 2`) are derived from it.
    pub fn from_model(name: impl Into<String>, model: SullivanModel) -> CatalogEntry {
        let ranks = ranks_of(&model);
        let dim = formal_dimension(&ranks).max(0) as u32;
        let table = betti(&model, dim + 2);
        CatalogEntry {
            name: name.into(),
            aliases: Vec::new(),
            ranks,
            model: Some(model),
            betti: Some(table),
            dim,
            table_row: false,
        }
    }

    fn aliased(mut self, aliases: &[&str]) -> Self {
        self.aliases = aliases.iter().map(|a| a.to_string()).collect();
        self
    }

    fn row(mut self) -> Self {
        self.table_row = true;
        self
    }

    /// Betti numbers up to `bound`, recomputed from the model when the
    /// stored table is too short.
    pub fn betti_up_to(&self, bound: u32) -> Option<BettiTable> {
        match &self.betti {
            Some(b) if b.bound() >= bound => Some(b.truncate(bound)),
            _ => self.model.as_ref().map(|m| betti(m, bound)),
        }
    }
}

pub fn ranks_of(model: &SullivanModel) -> RankVector {
    let pairs: Vec<(u32, u32)> = model.generator_ranks().into_iter().collect();
    RankVector::from_pairs(&pairs)
}

/// Building block of a product model.
#[derive(Clone, Copy, Debug)]
enum Factor {
    Sphere(u32),
    Projective(u32),
}

const LETTERS: [&str; 5] = ["y", "u", "v", "w", "t"];

fn factor_model(factor: Factor, taken: &[String]) -> SullivanModel {
    let free = |name: &str| !taken.iter().any(|t| t == name);
    match factor {
        Factor::Sphere(n) => {
            let letter = LETTERS
                .iter()
                .find(|l| free(&format!("{l}{n}")) && (n % 2 == 1 || free(&format!("{l}{}", 2 * n - 1))))
                .expect("enough generator letters");
            if n % 2 == 1 {
                SullivanModel::new(format!("S{n}"), vec![Generator::new(format!("{letter}{n}"), n)])
                    .expect("fresh names")
            } else {
                let top = 2 * n - 1;
                let model = SullivanModel::new(
                    format!("S{n}"),
                    vec![
                        Generator::new(format!("{letter}{n}"), n),
                        Generator::new(format!("{letter}{top}"), top),
                    ],
                )
                .expect("fresh names");
                let square = Element::monomial(Monomial::from_exponents(vec![2, 0]));
                model
                    .with_differential(&format!("{letter}{top}"), square)
                    .expect("degree matches")
            }
        }
        Factor::Projective(n) => {
            let top = 2 * n + 1;
            let model = SullivanModel::new(
                format!("CP{n}"),
                vec![Generator::new("x2", 2), Generator::new(format!("x{top}"), top)],
            )
            .expect("fresh names");
            let power = Element::monomial(Monomial::from_exponents(vec![n + 1, 0]));
            model
                .with_differential(&format!("x{top}"), power)
                .expect("degree matches")
        }
    }
}

fn product(name: &str, factors: &[Factor]) -> SullivanModel {
    let mut model: Option<SullivanModel> = None;
    for &f in factors {
        let taken: Vec<String> = model
            .as_ref()
            .map(|m| m.generators().iter().map(|g| g.name.clone()).collect())
            .unwrap_or_default();
        let next = factor_model(f, &taken);
        model = Some(match model {
            None => next,
            Some(m) => m.tensor(&next, name).expect("factor names are disjoint"),
        });
    }
    model.expect("at least one factor").renamed(name)
}

fn entry(name: &str, factors: &[Factor]) -> CatalogEntry {
    CatalogEntry::from_model(name, product(name, factors))
}

/// The seventeen simply connected elliptic rank vectors of dimension 2 to 7,
/// grouped by dimension and in canonical order within each dimension.
pub fn table1() -> Vec<CatalogEntry> {
    use Factor::{Projective as CP, Sphere as S};
    vec![
        entry("S2", &[S(2)]).row(),
        entry("S3", &[S(3)]).row(),
        entry("S4", &[S(4)]).row(),
        entry("CP2", &[CP(2)]).row(),
        entry("S2xS2 or CP2#CP2", &[S(2), S(2)]).row(),
        entry("S5", &[S(5)]).row(),
        entry("S2xS3", &[S(2), S(3)]).row(),
        entry("S6", &[S(6)]).row(),
        entry("S3xS3", &[S(3), S(3)]).row(),
        entry("CP3", &[CP(3)]).row(),
        entry("S2xS4", &[S(2), S(4)]).row(),
        entry("W6 or S2xCP2", &[S(2), CP(2)]).row(),
        entry("S2xS2xS2", &[S(2), S(2), S(2)]).row(),
        entry("S7", &[S(7)]).row(),
        entry("S3xS4", &[S(3), S(4)]).row(),
        entry("S2xS5", &[S(2), S(5)]).row(),
        entry("S2xS2xS3", &[S(2), S(2), S(3)]).row(),
    ]
}

/// Table rows followed by the named total spaces.
pub fn catalog() -> Vec<CatalogEntry> {
    use Factor::{Projective as CP, Sphere as S};
    let mut out = table1();
    out.push(entry("Eschenburg rational type", &[S(2), S(5)]).aliased(&["eschenburg"]));
    out.push(entry("Bazaikin rational type", &[CP(2), S(9)]).aliased(&["bazaikin", "CP2xS9"]));
    out
}

/// Lower-cased, with superscript digits, `×` and `²`-style glyphs mapped to
/// ASCII and spaces, dashes and underscores removed.
pub fn normalize_name(name: &str) -> String {
    let superscripts = [
        ('⁰', '0'),
        ('¹', '1'),
        ('²', '2'),
        ('³', '3'),
        ('⁴', '4'),
        ('⁵', '5'),
        ('⁶', '6'),
        ('⁷', '7'),
        ('⁸', '8'),
        ('⁹', '9'),
        ('×', 'x'),
        ('♯', '#'),
    ];
    name.chars()
        .map(|c| superscripts.iter().find(|(s, _)| *s == c).map_or(c, |(_, a)| *a))
        .filter(|c| !c.is_whitespace() && *c != '-' && *c != '_')
        .flat_map(char::to_lowercase)
        .collect()
}

fn keys(entry: &CatalogEntry) -> Vec<String> {
    let mut keys = vec![normalize_name(&entry.name)];
    keys.extend(entry.name.split(" or ").map(normalize_name));
    keys.extend(entry.aliases.iter().map(|a| normalize_name(a)));
    keys
}

/// Case-insensitive lookup by name, alternative name or alias.
pub fn lookup(name: &str) -> Option<CatalogEntry> {
    let wanted = normalize_name(name);
    catalog().into_iter().find(|e| keys(e).contains(&wanted))
}

/// Table rows grouped by dimension.
pub fn table1_by_dimension() -> BTreeMap<u32, Vec<CatalogEntry>> {
    let mut out: BTreeMap<u32, Vec<CatalogEntry>> = BTreeMap::new();
    for e in table1() {
        out.entry(e.dim).or_default().push(e);
    }
    out
}

/// Resolves a total-space argument given as a model file already parsed.
pub fn entry_from_model(model: SullivanModel) -> Result<CatalogEntry> {
    let name = model.name().to_string();
    Ok(CatalogEntry::from_model(name, model))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_has_seventeen_rows_with_matching_dimensions() {
        let t = table1();
        assert_eq!(t.len(), 17);
        for e in &t {
            assert_eq!(formal_dimension(&e.ranks), e.dim as i64, "{}", e.name);
            assert_eq!(e.betti.as_ref().unwrap().top_degree(), Some(e.dim), "{}", e.name);
        }
        let per_dim: Vec<usize> = table1_by_dimension().values().map(Vec::len).collect();
        assert_eq!(per_dim, [1, 1, 3, 2, 6, 4]);
    }

    #[test]
    fn named_rows() {
        assert_eq!(lookup("S⁴").unwrap().ranks.to_string(), "4:1,7:1");
        assert_eq!(lookup("W⁶ or S²×CP²").unwrap().ranks.to_string(), "2:2,3:1,5:1");
        let e = lookup("ESCHENBURG").unwrap();
        assert_eq!((e.ranks.to_string(), e.dim), ("2:1,3:1,5:1".into(), 7));
        let b = lookup("cp2xs9").unwrap();
        assert_eq!((b.name.as_str(), b.dim), ("Bazaikin rational type", 13));
        assert_eq!(lookup("CP2#CP2").unwrap().name, "S2xS2 or CP2#CP2");
        assert!(lookup("S11").is_none());
    }

    #[test]
    fn explicit_models() {
        let e = lookup("eschenburg").unwrap();
        let m = e.model.unwrap();
        let names: Vec<&str> = m.generators().iter().map(|g| g.name.as_str()).collect();
        assert_eq!(names, ["y2", "y3", "y5"]);
        assert_eq!(m.format_element(m.d_generator(1)), "y2^2");
        let s222 = lookup("S2xS2xS2").unwrap().model.unwrap();
        assert_eq!(s222.len(), 6);
        assert!(s222.validate(10).is_valid());
    }
}
