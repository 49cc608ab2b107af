//! Surface syntax for Sullivan models.
//!
//! ```text
//! # complex projective plane
//! space CP2 {
//!     generator x2 : 2;
//!     generator x5 : 5;
//!     d x5 = x2^3;
//! }
//! ```
//!
//! Generators may carry a `base` or `fiber` tag after the degree. A
//! differential is a sum of terms `[p/q] [*] g[^k] * h[^l] ...`; generators
//! without a `d` clause have zero differential. Names containing spaces are
//! written as double-quoted strings. `#` starts a line comment.

use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::Result;
use crate::gca::{Element, Generator, Homogeneity, Origin, Rational, SullivanModel};

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub expected: Vec<String>,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}", self.line, self.column, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected one of: {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

/// A parsed model plus notes about normalizations applied while reading it
/// (e.g. terms that vanished because an odd generator was squared).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ParsedModel {
    pub model: SullivanModel,
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(BigInt),
    Str(String),
    Sym(char),
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(n) => format!("integer `{n}`"),
            Tok::Str(s) => format!("string \"{s}\""),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::Eof => "end of input".to_string(),
        }
    }
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

fn lex(text: &str) -> std::result::Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut column) = (1usize, 1usize);
    while let Some(&c) = chars.peek() {
        let (l, col) = (line, column);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next().unwrap();
            if c == '\n' {
                line += 1;
                column = 1;
            } else {
                column += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
        } else if c == '#' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                bump(&mut chars);
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    s.push(bump(&mut chars));
                } else {
                    break;
                }
            }
            out.push(Token { tok: Tok::Ident(s), line: l, column: col });
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_digit() {
                    s.push(bump(&mut chars));
                } else {
                    break;
                }
            }
            out.push(Token { tok: Tok::Int(s.parse().unwrap()), line: l, column: col });
        } else if c == '"' {
            bump(&mut chars);
            let mut s = String::new();
            loop {
                match chars.peek() {
                    Some('"') => {
                        bump(&mut chars);
                        break;
                    }
                    Some('\n') | None => {
                        return Err(ParseError {
                            line: l,
                            column: col,
                            message: "unterminated string".into(),
                            expected: vec!["`\"`".into()],
                        })
                    }
                    Some(_) => s.push(bump(&mut chars)),
                }
            }
            out.push(Token { tok: Tok::Str(s), line: l, column: col });
        } else if "{}:;=+-*/^".contains(c) {
            bump(&mut chars);
            out.push(Token { tok: Tok::Sym(c), line: l, column: col });
        } else {
            return Err(ParseError {
                line: l,
                column: col,
                message: format!("unexpected character `{c}`"),
                expected: vec![],
            });
        }
    }
    out.push(Token { tok: Tok::Eof, line, column });
    Ok(out)
}

struct Parser<'a> {
    tokens: &'a [Token],
    pos: usize,
}

/// A term before resolution against the model: coefficient and factor list
/// with source locations.
struct RawTerm {
    coeff: Rational,
    factors: Vec<(String, u32, usize, usize)>,
    text: String,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> &Token {
        let t = &self.tokens[self.pos];
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        let t = self.peek();
        ParseError {
            line: t.line,
            column: t.column,
            message: format!("unexpected {}", t.tok.describe()),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    fn sym(&mut self, c: char) -> std::result::Result<(), ParseError> {
        if self.peek().tok == Tok::Sym(c) {
            self.next();
            Ok(())
        } else {
            Err(self.error(&[&format!("`{c}`")]))
        }
    }

    fn at_sym(&self, c: char) -> bool {
        self.peek().tok == Tok::Sym(c)
    }

    fn keyword(&mut self, kw: &str) -> std::result::Result<(), ParseError> {
        match &self.peek().tok {
            Tok::Ident(s) if s == kw => {
                self.next();
                Ok(())
            }
            _ => Err(self.error(&[&format!("`{kw}`")])),
        }
    }

    fn ident(&mut self) -> std::result::Result<(String, usize, usize), ParseError> {
        let t = self.peek().clone();
        match t.tok {
            Tok::Ident(s) => {
                self.next();
                Ok((s, t.line, t.column))
            }
            _ => Err(self.error(&["identifier"])),
        }
    }

    fn int(&mut self) -> std::result::Result<BigInt, ParseError> {
        match &self.peek().tok {
            Tok::Int(n) => {
                let n = n.clone();
                self.next();
                Ok(n)
            }
            _ => Err(self.error(&["integer"])),
        }
    }

    fn small_int(&mut self) -> std::result::Result<u32, ParseError> {
        let t = self.peek().clone();
        let n = self.int()?;
        u32::try_from(&n).map_err(|_| ParseError {
            line: t.line,
            column: t.column,
            message: format!("integer {n} out of range"),
            expected: vec![],
        })
    }

    fn rational(&mut self) -> std::result::Result<Rational, ParseError> {
        let num = self.int()?;
        if self.at_sym('/') {
            self.next();
            let t = self.peek().clone();
            let den = self.int()?;
            if den.is_zero() {
                return Err(ParseError {
                    line: t.line,
                    column: t.column,
                    message: "zero denominator".into(),
                    expected: vec![],
                });
            }
            Ok(Rational::new(num, den))
        } else {
            Ok(Rational::from_integer(num))
        }
    }

    fn factor(&mut self) -> std::result::Result<(String, u32, usize, usize), ParseError> {
        let (name, line, column) = self.ident()?;
        let power = if self.at_sym('^') {
            self.next();
            self.small_int()?
        } else {
            1
        };
        Ok((name, power, line, column))
    }

    fn term(&mut self, sign: bool) -> std::result::Result<RawTerm, ParseError> {
        let start = self.pos;
        let mut coeff = Rational::one();
        let mut factors = Vec::new();
        match &self.peek().tok {
            Tok::Int(_) => {
                coeff = self.rational()?;
                if self.at_sym('*') {
                    self.next();
                    factors.push(self.factor()?);
                } else if matches!(self.peek().tok, Tok::Ident(_)) {
                    factors.push(self.factor()?);
                }
            }
            Tok::Ident(_) => factors.push(self.factor()?),
            _ => return Err(self.error(&["rational coefficient", "identifier"])),
        }
        if !factors.is_empty() {
            while self.at_sym('*') {
                self.next();
                factors.push(self.factor()?);
            }
        }
        if sign {
            coeff = -coeff;
        }
        let text = self.tokens[start..self.pos]
            .iter()
            .map(|t| match &t.tok {
                Tok::Ident(s) => s.clone(),
                Tok::Int(n) => n.to_string(),
                Tok::Sym(c) => c.to_string(),
                Tok::Str(s) => s.clone(),
                Tok::Eof => String::new(),
            })
            .collect::<Vec<_>>()
            .join("");
        Ok(RawTerm { coeff, factors, text })
    }

    fn expression(&mut self) -> std::result::Result<Vec<RawTerm>, ParseError> {
        let mut terms = Vec::new();
        let mut negative = false;
        if self.at_sym('-') {
            self.next();
            negative = true;
        } else if self.at_sym('+') {
            self.next();
        }
        terms.push(self.term(negative)?);
        loop {
            if self.at_sym('+') {
                self.next();
                terms.push(self.term(false)?);
            } else if self.at_sym('-') {
                self.next();
                terms.push(self.term(true)?);
            } else {
                return Ok(terms);
            }
        }
    }
}

fn resolve(
    model: &SullivanModel,
    terms: Vec<RawTerm>,
    notes: &mut Vec<String>,
) -> std::result::Result<Element, ParseError> {
    let mut out = Element::zero();
    for term in terms {
        let mut idx = Vec::new();
        for (name, power, line, column) in &term.factors {
            let i = model.index_of(name).ok_or_else(|| ParseError {
                line: *line,
                column: *column,
                message: format!("undeclared generator `{name}`"),
                expected: vec![],
            })?;
            idx.extend(std::iter::repeat_n(i, *power as usize));
        }
        match model.normalize_indices(&idx) {
            Some((sign, m)) => {
                let c = if sign < 0 { -term.coeff } else { term.coeff };
                out.add_term(m, c);
            }
            None => notes.push(format!(
                "term `{}` vanishes: odd generator repeated",
                term.text
            )),
        }
    }
    Ok(out)
}

/// Parses an expression over the generators of `model`.
pub fn parse_expression(model: &SullivanModel, text: &str) -> Result<Element> {
    let tokens = lex(text)?;
    let mut p = Parser { tokens: &tokens, pos: 0 };
    let terms = p.expression()?;
    if p.peek().tok != Tok::Eof {
        return Err(p.error(&["`+`", "`-`", "end of input"]).into());
    }
    let mut notes = Vec::new();
    Ok(resolve(model, terms, &mut notes)?)
}

pub fn parse_model(text: &str) -> std::result::Result<ParsedModel, ParseError> {
    let tokens = lex(text)?;
    let mut p = Parser { tokens: &tokens, pos: 0 };
    p.keyword("space")?;
    let name = match &p.peek().tok {
        Tok::Ident(s) | Tok::Str(s) => {
            let s = s.clone();
            p.next();
            s
        }
        _ => return Err(p.error(&["model name"])),
    };
    p.sym('{')?;

    let mut generators: Vec<(Generator, usize, usize)> = Vec::new();
    let mut clauses: Vec<(String, usize, usize, Vec<RawTerm>)> = Vec::new();
    loop {
        match &p.peek().tok {
            Tok::Sym('}') => {
                p.next();
                break;
            }
            Tok::Ident(kw) if kw == "generator" => {
                p.next();
                let (gname, line, column) = p.ident()?;
                p.sym(':')?;
                let dt = p.peek().clone();
                let degree = p.small_int()?;
                if degree == 0 {
                    return Err(ParseError {
                        line: dt.line,
                        column: dt.column,
                        message: format!("generator `{gname}` must have degree at least 1"),
                        expected: vec![],
                    });
                }
                let origin = match &p.peek().tok {
                    Tok::Ident(s) if s == "base" => {
                        p.next();
                        Origin::Base
                    }
                    Tok::Ident(s) if s == "fiber" => {
                        p.next();
                        Origin::Fiber
                    }
                    Tok::Sym(';') => Origin::Plain,
                    _ => return Err(p.error(&["`base`", "`fiber`", "`;`"])),
                };
                p.sym(';')?;
                if generators.iter().any(|(g, _, _)| g.name == gname) {
                    return Err(ParseError {
                        line,
                        column,
                        message: format!("duplicate generator `{gname}`"),
                        expected: vec![],
                    });
                }
                generators.push((Generator::new(gname, degree).with_origin(origin), line, column));
            }
            Tok::Ident(kw) if kw == "d" => {
                p.next();
                let (gname, line, column) = p.ident()?;
                p.sym('=')?;
                let terms = p.expression()?;
                p.sym(';')?;
                clauses.push((gname, line, column, terms));
            }
            _ => return Err(p.error(&["`generator`", "`d`", "`}`"])),
        }
    }
    if p.peek().tok != Tok::Eof {
        return Err(p.error(&["end of input"]));
    }

    let mut model = SullivanModel::new(name, generators.iter().map(|(g, _, _)| g.clone()).collect())
        .map_err(|e| ParseError {
            line: 1,
            column: 1,
            message: e.to_string(),
            expected: vec![],
        })?;
    let mut notes = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (gname, line, column, terms) in clauses {
        let loc_err = |message: String| ParseError {
            line,
            column,
            message,
            expected: vec![],
        };
        let Some(i) = model.index_of(&gname) else {
            return Err(loc_err(format!("undeclared generator `{gname}`")));
        };
        if !seen.insert(gname.clone()) {
            return Err(loc_err(format!("second differential clause for `{gname}`")));
        }
        let noted = notes.len();
        let value = resolve(&model, terms, &mut notes)?;
        if value.is_zero() && notes.len() > noted {
            notes.push(format!("differential of `{gname}` normalizes to 0"));
        }
        let expected = model.generator(i).degree + 1;
        match model.homogeneity(&value) {
            Homogeneity::Degree(k) if k != expected => {
                return Err(loc_err(format!(
                    "differential of `{gname}` has degree {k}, expected {expected}"
                )))
            }
            Homogeneity::Mixed => {
                return Err(loc_err(format!(
                    "differential of `{gname}` is not homogeneous"
                )))
            }
            _ => {}
        }
        model.set_differential(&gname, value).map_err(|e| loc_err(e.to_string()))?;
    }
    Ok(ParsedModel { model, notes })
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

/// Canonical text form; `parse_model(print_model(m))` rebuilds `m`.
pub fn print_model(model: &SullivanModel) -> String {
    let mut s = String::new();
    if is_ident(model.name()) {
        s.push_str(&format!("space {} {{\n", model.name()));
    } else {
        s.push_str(&format!("space \"{}\" {{\n", model.name()));
    }
    for g in model.generators() {
        match g.origin.keyword() {
            Some(tag) => s.push_str(&format!("    generator {} : {} {};\n", g.name, g.degree, tag)),
            None => s.push_str(&format!("    generator {} : {};\n", g.name, g.degree)),
        }
    }
    for (i, g) in model.generators().iter().enumerate() {
        let d = model.d_generator(i);
        if !d.is_zero() {
            s.push_str(&format!("    d {} = {};\n", g.name, model.format_element(d)));
        }
    }
    s.push_str("}\n");
    s
}
