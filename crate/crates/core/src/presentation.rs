//! Finitely presented groups: parsing, free reduction, and evaluation of
//! words in matrix assignments.
//!
//! Text format:
//!
//! ```text
//! # ℤ² as a one-relator group
//! gens: a b;
//! rels: a b a^-1 b^-1;
//! ```
//!
//! Relators are separated by commas; an empty relator list denotes a free
//! group. `#` starts a comment that runs to the end of the line.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{identity, CMat};
use crate::repvar::RepPoint;
use crate::text::{Lexer, SyntaxError, Tok};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PresentationError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("line {line}, column {col}: undeclared generator `{name}` in relator")]
    UndeclaredGenerator { name: String, line: usize, col: usize },
    #[error("generator `{0}` declared twice")]
    DuplicateGenerator(String),
    #[error("generator index {index} out of range for a point with {available} matrices")]
    MissingGenerator { index: usize, available: usize },
    #[error("dimension mismatch: expected {expected}x{expected}, generator {index} is {rows}x{cols}")]
    DimensionMismatch { expected: usize, index: usize, rows: usize, cols: usize },
}

/// One letter of a word: a generator index and an exponent sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub gen: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn new(gen: usize, inverse: bool) -> Self {
        Letter { gen, inverse }
    }

    pub fn inv(self) -> Self {
        Letter { gen: self.gen, inverse: !self.inverse }
    }
}

/// A word in the generators, one letter per entry.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Word {
    pub letters: Vec<Letter>,
}

impl Word {
    pub fn empty() -> Self {
        Word::default()
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Word { letters }
    }

    /// Word for `g^e`.
    pub fn power(gen: usize, e: i64) -> Self {
        let l = Letter::new(gen, e < 0);
        Word { letters: vec![l; e.unsigned_abs() as usize] }
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn inverse(&self) -> Word {
        Word { letters: self.letters.iter().rev().map(|l| l.inv()).collect() }
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Word { letters }
    }

    /// Commutator `[a, b] = a b a⁻¹ b⁻¹` of two generators.
    pub fn commutator(a: usize, b: usize) -> Word {
        Word {
            letters: vec![Letter::new(a, false), Letter::new(b, false), Letter::new(a, true), Letter::new(b, true)],
        }
    }

    /// Sum of exponents of generator `gen`.
    pub fn exponent_sum(&self, gen: usize) -> i64 {
        self.letters
            .iter()
            .filter(|l| l.gen == gen)
            .map(|l| if l.inverse { -1 } else { 1 })
            .sum()
    }

    pub fn max_generator(&self) -> Option<usize> {
        self.letters.iter().map(|l| l.gen).max()
    }

    pub fn map_generators(&self, f: impl Fn(usize) -> usize) -> Word {
        Word { letters: self.letters.iter().map(|l| Letter::new(f(l.gen), l.inverse)).collect() }
    }

    /// Renders the word with generator names; the empty word renders as `e`.
    pub fn display<'a>(&'a self, names: &'a [String]) -> impl fmt::Display + 'a {
        WordDisplay { word: self, names }
    }
}

struct WordDisplay<'a> {
    word: &'a Word,
    names: &'a [String],
}

impl fmt::Display for WordDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            return write!(f, "e");
        }
        for (i, l) in self.word.letters.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            let name = self.names.get(l.gen).map(String::as_str).unwrap_or("?");
            write!(f, "{name}")?;
            if l.inverse {
                write!(f, "^-1")?;
            }
        }
        Ok(())
    }
}

/// Cancels adjacent inverse pairs until none remain.
pub fn free_reduce(w: &Word) -> Word {
    let mut out: Vec<Letter> = Vec::with_capacity(w.letters.len());
    for &l in &w.letters {
        if out.last() == Some(&l.inv()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    Word { letters: out }
}

/// A finitely presented group `⟨generators | relators⟩`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupPresentation {
    generators: Vec<String>,
    relators: Vec<Word>,
}

impl GroupPresentation {
    /// Builds a presentation, freely reducing relators and dropping those
    /// that reduce to the empty word.
    pub fn new(generators: Vec<String>, relators: Vec<Word>) -> Result<Self, PresentationError> {
        let mut seen = HashMap::new();
        for (i, g) in generators.iter().enumerate() {
            if g.is_empty() || seen.insert(g.clone(), i).is_some() {
                return Err(PresentationError::DuplicateGenerator(g.clone()));
            }
        }
        let n = generators.len();
        let mut rels = Vec::with_capacity(relators.len());
        for r in relators {
            if let Some(m) = r.max_generator() {
                if m >= n {
                    return Err(PresentationError::MissingGenerator { index: m, available: n });
                }
            }
            let r = free_reduce(&r);
            if !r.is_empty() {
                rels.push(r);
            }
        }
        Ok(GroupPresentation { generators, relators: rels })
    }

    pub fn generators(&self) -> &[String] {
        &self.generators
    }

    pub fn relators(&self) -> &[Word] {
        &self.relators
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn generator_index(&self, name: &str) -> Option<usize> {
        self.generators.iter().position(|g| g == name)
    }

    /// Free group on `names`.
    pub fn free(names: &[&str]) -> Self {
        Self::new(names.iter().map(|s| s.to_string()).collect(), vec![]).expect("distinct names")
    }

    /// `ℤⁿ` on generators `e1 … en` with all pairwise commutators.
    pub fn free_abelian(n: usize) -> Self {
        let gens = (1..=n).map(|i| format!("e{i}")).collect();
        let mut rels = Vec::new();
        for i in 0..n {
            for j in i + 1..n {
                rels.push(Word::commutator(i, j));
            }
        }
        Self::new(gens, rels).expect("well-formed")
    }

    /// Closed orientable surface group `⟨a1 b1 … ag bg | Π [ai, bi]⟩`.
    pub fn surface(genus: usize) -> Self {
        let mut gens = Vec::new();
        let mut rel = Word::empty();
        for i in 1..=genus {
            gens.push(format!("a{i}"));
            gens.push(format!("b{i}"));
            rel = rel.concat(&Word::commutator(2 * i - 2, 2 * i - 1));
        }
        Self::new(gens, vec![rel]).expect("well-formed")
    }

    /// Free group `⟨g1 … gm⟩`.
    pub fn free_rank(m: usize) -> Self {
        Self::new((1..=m).map(|i| format!("g{i}")).collect(), vec![]).expect("well-formed")
    }

    /// Direct product: generators of `self` then of `other` (renamed on
    /// collision), both relator sets, and commutators between the factors.
    pub fn direct_product(&self, other: &Self) -> Self {
        let (gens, off) = disjoint_generators(&self.generators, &other.generators);
        let mut rels: Vec<Word> = self.relators.clone();
        rels.extend(other.relators.iter().map(|r| r.map_generators(|g| g + off)));
        for i in 0..off {
            for j in 0..other.rank() {
                rels.push(Word::commutator(i, off + j));
            }
        }
        Self::new(gens, rels).expect("disjoint by construction")
    }

    /// Free product: generators of `self` then of `other` (renamed on
    /// collision) and both relator sets.
    pub fn free_product(&self, other: &Self) -> Self {
        let (gens, off) = disjoint_generators(&self.generators, &other.generators);
        let mut rels: Vec<Word> = self.relators.clone();
        rels.extend(other.relators.iter().map(|r| r.map_generators(|g| g + off)));
        Self::new(gens, rels).expect("disjoint by construction")
    }

    /// Same group with generators renamed positionally.
    pub fn with_generator_names(&self, names: Vec<String>) -> Result<Self, PresentationError> {
        if names.len() != self.rank() {
            return Err(PresentationError::MissingGenerator { index: names.len(), available: self.rank() });
        }
        Self::new(names, self.relators.clone())
    }

    /// Parses a word such as `a b^-1 a` against this presentation's
    /// generators; `e` or an empty string is the identity.
    pub fn parse_word(&self, text: &str) -> Result<Word, PresentationError> {
        let mut lx = Lexer::new(text);
        let mut letters = Vec::new();
        loop {
            match lx.peek()? {
                Tok::Eof => break,
                _ => {
                    let (name, pos) = lx.expect_ident()?;
                    if name == "e" && self.generator_index("e").is_none() {
                        continue;
                    }
                    let gen = self.generator_index(&name).ok_or(PresentationError::UndeclaredGenerator {
                        name,
                        line: pos.line,
                        col: pos.col,
                    })?;
                    push_power(&mut letters, gen, parse_exponent(&mut lx)?);
                }
            }
        }
        Ok(Word { letters })
    }
}

/// Optional `^k` or `^-k` after a generator.
fn parse_exponent(lx: &mut Lexer<'_>) -> Result<i64, SyntaxError> {
    if lx.eat_punct('^')? {
        let (v, pos) = lx.expect_int()?;
        if v == 0 {
            return Err(SyntaxError { pos, message: "exponent 0 is not allowed".into() });
        }
        Ok(v)
    } else {
        Ok(1)
    }
}

fn push_power(letters: &mut Vec<Letter>, gen: usize, e: i64) {
    for _ in 0..e.unsigned_abs() {
        letters.push(Letter::new(gen, e < 0));
    }
}

fn disjoint_generators(left: &[String], right: &[String]) -> (Vec<String>, usize) {
    let mut gens: Vec<String> = left.to_vec();
    for g in right {
        let mut name = g.clone();
        while gens.contains(&name) || (name != *g && right.contains(&name)) {
            name.push_str("_2");
        }
        gens.push(name);
    }
    (gens, left.len())
}

impl fmt::Display for GroupPresentation {
    /// Normalised one-line form that re-parses to an equal presentation.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "gens: {}; rels: ", self.generators.join(" "))?;
        for (i, r) in self.relators.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}", r.display(&self.generators))?;
        }
        write!(f, ";")
    }
}

/// Parses `gens: <id> ... ; rels: <word> , ... ;`.
pub fn parse_presentation(text: &str) -> Result<GroupPresentation, PresentationError> {
    let mut lx = Lexer::new(text);
    let gens = parse_gens_section(&mut lx)?;
    let relators = parse_rels_section(&mut lx, &gens)?;
    lx.expect_eof()?;
    GroupPresentation::new(gens, relators)
}

pub(crate) fn parse_gens_section(lx: &mut Lexer<'_>) -> Result<Vec<String>, PresentationError> {
    lx.expect_keyword("gens")?;
    lx.expect_punct(':')?;
    let mut gens: Vec<String> = Vec::new();
    while let Tok::Ident(_) = lx.peek()? {
        let (name, _) = lx.expect_ident()?;
        if gens.contains(&name) {
            return Err(PresentationError::DuplicateGenerator(name));
        }
        gens.push(name);
    }
    lx.expect_punct(';')?;
    Ok(gens)
}

pub(crate) fn parse_rels_section(lx: &mut Lexer<'_>, gens: &[String]) -> Result<Vec<Word>, PresentationError> {
    lx.expect_keyword("rels")?;
    lx.expect_punct(':')?;
    let mut relators = Vec::new();
    if lx.eat_punct(';')? {
        return Ok(relators);
    }
    loop {
        let mut letters = Vec::new();
        while let Tok::Ident(_) = lx.peek()? {
            let (name, pos) = lx.expect_ident()?;
            let gen = gens.iter().position(|g| *g == name).ok_or(PresentationError::UndeclaredGenerator {
                name,
                line: pos.line,
                col: pos.col,
            })?;
            push_power(&mut letters, gen, parse_exponent(lx)?);
        }
        if letters.is_empty() {
            let pos = lx.pos()?;
            return Err(SyntaxError { pos, message: "expected a relator word".into() }.into());
        }
        relators.push(Word { letters });
        if lx.eat_punct(',')? {
            continue;
        }
        lx.expect_punct(';')?;
        return Ok(relators);
    }
}

/// Evaluates a word on the matrices of a point; the empty word gives the
/// identity of the point's dimension.
pub fn evaluate_word(w: &Word, point: &RepPoint) -> Result<CMat, PresentationError> {
    evaluate_in(w, point.matrices(), point.dim())
}

/// Same as [`evaluate_word`] on a bare slice of matrices of size `dim`.
pub fn evaluate_in(w: &Word, mats: &[CMat], dim: usize) -> Result<CMat, PresentationError> {
    let mut acc = identity(dim);
    for l in &w.letters {
        let m = mats
            .get(l.gen)
            .ok_or(PresentationError::MissingGenerator { index: l.gen, available: mats.len() })?;
        if m.nrows() != dim || m.ncols() != dim {
            return Err(PresentationError::DimensionMismatch {
                expected: dim,
                index: l.gen,
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        if l.inverse {
            acc *= m.adjoint();
        } else {
            acc *= m;
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::phase_diag;
    use num_complex::Complex64;

    fn w(gp: &GroupPresentation, s: &str) -> Word {
        gp.parse_word(s).unwrap()
    }

    #[test]
    fn parses_free_group_of_rank_one() {
        let g = parse_presentation("gens: a; rels: ;").unwrap();
        assert_eq!(g.rank(), 1);
        assert!(g.relators().is_empty());
    }

    #[test]
    fn parses_z2() {
        let g = parse_presentation("gens: a b; rels: a b a^-1 b^-1;").unwrap();
        assert_eq!(g.rank(), 2);
        assert_eq!(g.relators().len(), 1);
        assert_eq!(g.relators()[0], Word::commutator(0, 1));
    }

    #[test]
    fn parses_klein_bottle() {
        let g = parse_presentation("gens: a b; rels: a b a b^-1;").unwrap();
        assert_eq!(g.relators()[0].len(), 4);
    }

    #[test]
    fn comments_multiline_and_multiple_relators() {
        let src = "# genus two\ngens: a1 b1 a2 b2; # four\nrels: a1 b1 a1^-1 b1^-1 a2 b2 a2^-1 b2^-1,\n  a1 a1^-1;";
        let g = parse_presentation(src).unwrap();
        // The second relator reduces to the empty word and is dropped.
        assert_eq!(g.relators().len(), 1);
        assert_eq!(g.relators()[0].len(), 8);
    }

    #[test]
    fn undeclared_generator_reports_position() {
        let err = parse_presentation("gens: a;\nrels: a  c;").unwrap_err();
        assert_eq!(err, PresentationError::UndeclaredGenerator { name: "c".into(), line: 2, col: 10 });
    }

    #[test]
    fn syntax_errors_carry_line_and_column() {
        let err = parse_presentation("gens: a b\nrels: a;").unwrap_err();
        match err {
            // `rels` is read as a generator name; the stray `:` is the error.
            PresentationError::Syntax(e) => assert_eq!((e.pos.line, e.pos.col), (2, 5)),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(parse_presentation("gens: a; rels: a^0;"), Err(PresentationError::Syntax(_))));
        let g = parse_presentation("gens: a b; rels: a^3 b^-2;").unwrap();
        assert_eq!(g.relators()[0].exponent_sum(0), 3);
        assert_eq!(g.relators()[0].exponent_sum(1), -2);
        assert!(matches!(parse_presentation("gens: a a; rels: ;"), Err(PresentationError::DuplicateGenerator(_))));
        assert!(matches!(parse_presentation("gens: a; rels: ; extra"), Err(PresentationError::Syntax(_))));
    }

    #[test]
    fn free_reduction_examples() {
        let g = GroupPresentation::free(&["a", "b"]);
        assert!(free_reduce(&w(&g, "a a^-1")).is_empty());
        assert_eq!(free_reduce(&w(&g, "a b b^-1 a")), w(&g, "a a"));
        assert!(free_reduce(&w(&g, "a a a^-1 a^-1")).is_empty());
        assert_eq!(free_reduce(&w(&g, "a^-1 b a")), w(&g, "a^-1 b a"));
    }

    #[test]
    fn display_round_trips() {
        for src in ["gens: a; rels: ;", "gens: a b; rels: a b a b^-1;", "gens: x y z; rels: x y, z^-1 x;"] {
            let g = parse_presentation(src).unwrap();
            assert_eq!(parse_presentation(&g.to_string()).unwrap(), g);
        }
    }

    #[test]
    fn evaluation_examples() {
        let a = phase_diag(&[0.1, 0.3]);
        let b = phase_diag(&[0.7, 0.2]);
        let p = RepPoint::new(vec![a, b]).unwrap();
        let id = evaluate_word(&Word::empty(), &p).unwrap();
        assert_eq!(id, identity(2));
        let c = evaluate_word(&Word::commutator(0, 1), &p).unwrap();
        assert!((c - identity(2)).norm() < 1e-14);

        let theta = 0.3;
        let u = RepPoint::new(vec![phase_diag(&[theta])]).unwrap();
        let aa = evaluate_word(&Word::power(0, 2), &u).unwrap();
        let expected = Complex64::from_polar(1.0, 4.0 * std::f64::consts::PI * theta);
        assert!((aa[(0, 0)] - expected).norm() < 1e-14);
    }

    #[test]
    fn evaluation_rejects_missing_or_mismatched() {
        let mats = vec![identity(2), identity(3)];
        let err = evaluate_in(&Word::power(1, 1), &mats, 2).unwrap_err();
        assert!(matches!(err, PresentationError::DimensionMismatch { index: 1, .. }));
        let err = evaluate_in(&Word::power(4, 1), &mats, 2).unwrap_err();
        assert!(matches!(err, PresentationError::MissingGenerator { index: 4, .. }));
    }

    #[test]
    fn products_rename_colliding_generators() {
        let z = GroupPresentation::free_abelian(1);
        let p = z.direct_product(&z);
        assert_eq!(p.generators(), &["e1".to_string(), "e1_2".to_string()]);
        assert_eq!(p.relators(), &[Word::commutator(0, 1)]);
        let f = z.free_product(&z);
        assert!(f.relators().is_empty());
        let s = GroupPresentation::surface(2);
        assert_eq!(s.rank(), 4);
        assert_eq!(s.relators()[0].len(), 8);
    }
}
