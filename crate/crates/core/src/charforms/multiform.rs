//! Rational exterior algebra on degree-one generators.
//!
//! Generators come in two kinds: base labels `z1, z2, …` for directions of
//! the classifying space and parameter labels `x1, x2, …` for directions of
//! the parameter space. Monomials are stored sorted, base before parameter
//! and by index within a kind, so `z2 x1 z1` is stored as `−z1 z2 x1`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rational::{fmt_q, parse_q, Q};
use crate::text::{Lexer, SyntaxError, Tok};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormError {
    #[error("label universes differ: {left} vs {right}")]
    UniverseMismatch { left: Universe, right: Universe },
    #[error("label {label} does not fit in universe {universe}")]
    LabelOutOfRange { label: Label, universe: Universe },
    #[error("form still has base labels after contraction")]
    BaseLabelsRemain,
    #[error("bad form record: {0}")]
    BadRecord(String),
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Base(u32),
    Param(u32),
}

impl Label {
    pub fn is_base(self) -> bool {
        matches!(self, Label::Base(_))
    }

    pub fn index(self) -> u32 {
        match self {
            Label::Base(i) | Label::Param(i) => i,
        }
    }

    pub fn parse(s: &str) -> Option<Label> {
        let (kind, rest) = s.split_at(1.min(s.len()));
        let i: u32 = rest.parse().ok()?;
        if i == 0 {
            return None;
        }
        match kind {
            "z" => Some(Label::Base(i - 1)),
            "x" => Some(Label::Param(i - 1)),
            _ => None,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Base(i) => write!(f, "z{}", i + 1),
            Label::Param(i) => write!(f, "x{}", i + 1),
        }
    }
}

/// Number of base and parameter labels a form may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Universe {
    pub base: usize,
    pub param: usize,
}

impl Universe {
    pub fn new(base: usize, param: usize) -> Self {
        Universe { base, param }
    }

    pub fn contains(&self, l: Label) -> bool {
        match l {
            Label::Base(i) => (i as usize) < self.base,
            Label::Param(i) => (i as usize) < self.param,
        }
    }
}

impl fmt::Display for Universe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(base {}, param {})", self.base, self.param)
    }
}

/// Sorts `labels` in place and returns the permutation sign, or `None` if a
/// label repeats (the monomial vanishes).
pub fn sort_with_sign(labels: &mut [Label]) -> Option<i32> {
    let mut sign = 1;
    // insertion sort; monomials are short
    for i in 1..labels.len() {
        let mut j = i;
        while j > 0 && labels[j - 1] > labels[j] {
            labels.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if labels.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(sign)
    }
}

/// Element of the exterior algebra with exact rational coefficients.
/// Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiForm {
    universe: Universe,
    terms: BTreeMap<Vec<Label>, Q>,
}

impl MultiForm {
    pub fn zero(universe: Universe) -> Self {
        MultiForm { universe, terms: BTreeMap::new() }
    }

    pub fn scalar(universe: Universe, c: Q) -> Self {
        let mut f = Self::zero(universe);
        f.add_term(Vec::new(), c);
        f
    }

    pub fn one(universe: Universe) -> Self {
        Self::scalar(universe, Q::one())
    }

    /// `c · l₁ ∧ … ∧ lₖ` in the given (arbitrary) order.
    pub fn monomial(universe: Universe, labels: &[Label], c: Q) -> Result<Self, FormError> {
        for &l in labels {
            if !universe.contains(l) {
                return Err(FormError::LabelOutOfRange { label: l, universe });
            }
        }
        let mut f = Self::zero(universe);
        let mut ls = labels.to_vec();
        if let Some(sign) = sort_with_sign(&mut ls) {
            f.add_term(ls, if sign < 0 { -c } else { c });
        }
        Ok(f)
    }

    pub fn generator(universe: Universe, l: Label) -> Result<Self, FormError> {
        Self::monomial(universe, &[l], Q::one())
    }

    pub fn universe(&self) -> Universe {
        self.universe
    }

    pub fn terms(&self) -> impl Iterator<Item = (&[Label], &Q)> {
        self.terms.iter().map(|(k, v)| (k.as_slice(), v))
    }

    /// Number of nonzero terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Coefficient of the sorted monomial `labels` (zero if absent).
    pub fn coefficient(&self, labels: &[Label]) -> Q {
        let mut ls = labels.to_vec();
        match sort_with_sign(&mut ls) {
            Some(sign) => {
                let c = self.terms.get(&ls).cloned().unwrap_or_else(Q::zero);
                if sign < 0 {
                    -c
                } else {
                    c
                }
            }
            None => Q::zero(),
        }
    }

    /// Constant term.
    pub fn degree_zero(&self) -> Q {
        self.coefficient(&[])
    }

    /// Homogeneous part of total degree `d`.
    pub fn part(&self, d: usize) -> Self {
        MultiForm {
            universe: self.universe,
            terms: self.terms.iter().filter(|(k, _)| k.len() == d).map(|(k, v)| (k.clone(), v.clone())).collect(),
        }
    }

    pub fn max_degree(&self) -> usize {
        self.terms.keys().map(Vec::len).max().unwrap_or(0)
    }

    /// Adds `c` to the coefficient of an already-sorted monomial.
    fn add_term(&mut self, key: Vec<Label>, c: Q) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&key) {
            Some(v) => {
                *v += c;
                if v.is_zero() {
                    self.terms.remove(&key);
                }
            }
            None => {
                self.terms.insert(key, c);
            }
        }
    }

    fn check_same(&self, other: &Self) -> Result<(), FormError> {
        if self.universe != other.universe {
            return Err(FormError::UniverseMismatch { left: self.universe, right: other.universe });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, FormError> {
        self.check_same(other)?;
        let mut out = self.clone();
        for (k, v) in &other.terms {
            out.add_term(k.clone(), v.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, FormError> {
        self.add(&other.scale(&-Q::one()))
    }

    pub fn scale(&self, c: &Q) -> Self {
        let mut out = Self::zero(self.universe);
        for (k, v) in &self.terms {
            out.add_term(k.clone(), v * c);
        }
        out
    }

    /// Graded-commutative product.
    pub fn wedge(&self, other: &Self) -> Result<Self, FormError> {
        self.check_same(other)?;
        let mut out = Self::zero(self.universe);
        for (ka, va) in &self.terms {
            for (kb, vb) in &other.terms {
                let mut ls = ka.clone();
                ls.extend_from_slice(kb);
                if let Some(sign) = sort_with_sign(&mut ls) {
                    let c = va * vb;
                    out.add_term(ls, if sign < 0 { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    /// Moves the form into a larger universe, shifting base labels by
    /// `base_offset` and parameter labels by `param_offset`.
    pub fn embed(&self, target: Universe, base_offset: usize, param_offset: usize) -> Result<Self, FormError> {
        self.relabel(target, |l| match l {
            Label::Base(i) => Label::Base(i + base_offset as u32),
            Label::Param(i) => Label::Param(i + param_offset as u32),
        })
    }

    /// Applies an injective, order-preserving-or-not relabelling; signs from
    /// re-sorting are kept.
    pub fn relabel(&self, target: Universe, f: impl Fn(Label) -> Label) -> Result<Self, FormError> {
        let mut out = Self::zero(target);
        for (k, v) in &self.terms {
            let mut ls: Vec<Label> = k.iter().map(|&l| f(l)).collect();
            for &l in &ls {
                if !target.contains(l) {
                    return Err(FormError::LabelOutOfRange { label: l, universe: target });
                }
            }
            if let Some(sign) = sort_with_sign(&mut ls) {
                out.add_term(ls, if sign < 0 { -v.clone() } else { v.clone() });
            }
        }
        Ok(out)
    }

    /// Ring homomorphism acting on base labels only: base label `j` of
    /// `self` maps to `Σ_i images[j][i] · z_i` in `target`. Parameter labels
    /// are kept.
    pub fn substitute_base(&self, target: Universe, images: &[Vec<Q>]) -> Result<Self, FormError> {
        if images.len() < self.universe.base || target.param < self.universe.param {
            return Err(FormError::UniverseMismatch { left: self.universe, right: target });
        }
        let image_of = |l: Label| -> Result<MultiForm, FormError> {
            match l {
                Label::Base(j) => {
                    let row = &images[j as usize];
                    let mut f = MultiForm::zero(target);
                    for (i, c) in row.iter().enumerate() {
                        if !c.is_zero() {
                            f = f.add(&MultiForm::monomial(target, &[Label::Base(i as u32)], c.clone())?)?;
                        }
                    }
                    Ok(f)
                }
                p => MultiForm::generator(target, p),
            }
        };
        let mut out = Self::zero(target);
        for (k, v) in &self.terms {
            let mut prod = MultiForm::scalar(target, v.clone());
            for &l in k {
                prod = prod.wedge(&image_of(l)?)?;
            }
            out = out.add(&prod)?;
        }
        Ok(out)
    }

    /// Pullback along the inclusion of the coordinate sub-torus spanned by
    /// parameter axes `keep` (others fixed): kept labels are renumbered in
    /// the given order, dropped ones map to zero.
    pub fn restrict_params(&self, keep: &[usize]) -> Result<Self, FormError> {
        let target = Universe::new(self.universe.base, keep.len());
        let mut out = Self::zero(target);
        'terms: for (k, v) in &self.terms {
            let mut ls = Vec::with_capacity(k.len());
            for &l in k {
                match l {
                    Label::Base(_) => ls.push(l),
                    Label::Param(i) => match keep.iter().position(|&a| a == i as usize) {
                        Some(p) => ls.push(Label::Param(p as u32)),
                        None => continue 'terms,
                    },
                }
            }
            if let Some(sign) = sort_with_sign(&mut ls) {
                out.add_term(ls, if sign < 0 { -v.clone() } else { v.clone() });
            }
        }
        Ok(out)
    }

    /// Right contraction against a base cochain given as a list of
    /// `(base monomial, weight)` pairs.
    ///
    /// Only base labels in `support` take part (all base labels when
    /// `None`): a term pairs with a monomial when its base labels inside the
    /// support are exactly that monomial. Those labels are moved to the right
    /// end (collecting the Koszul sign) and removed. The universe is kept.
    pub fn contract(&self, cochain: &[(Vec<u32>, Q)], support: Option<&[u32]>) -> Self {
        let in_support = |i: u32| support.is_none_or(|s| s.contains(&i));
        let mut out = Self::zero(self.universe);
        for (k, v) in &self.terms {
            let selected: Vec<u32> = k
                .iter()
                .filter_map(|l| match *l {
                    Label::Base(i) if in_support(i) => Some(i),
                    _ => None,
                })
                .collect();
            for (mono, w) in cochain {
                let mut m = mono.clone();
                m.sort_unstable();
                if m != selected {
                    continue;
                }
                let mut crossings = 0usize;
                let mut remaining = Vec::with_capacity(k.len());
                for (pos, l) in k.iter().enumerate() {
                    let extracted = matches!(*l, Label::Base(i) if in_support(i));
                    if extracted {
                        crossings += k[pos + 1..]
                            .iter()
                            .filter(|l2| !matches!(**l2, Label::Base(i) if in_support(i)))
                            .count();
                    } else {
                        remaining.push(*l);
                    }
                }
                let c = v * w;
                out.add_term(remaining, if crossings % 2 == 1 { -c } else { c });
            }
        }
        out
    }

    /// Drops the (unused) base labels from the universe.
    pub fn into_param_form(self) -> Result<Self, FormError> {
        if self.terms.keys().any(|k| k.iter().any(|l| l.is_base())) {
            return Err(FormError::BaseLabelsRemain);
        }
        Ok(MultiForm { universe: Universe::new(0, self.universe.param), terms: self.terms })
    }

    /// Serialisable record form.
    pub fn to_record(&self) -> FormRecord {
        FormRecord {
            base: self.universe.base,
            param: self.universe.param,
            terms: self
                .terms
                .iter()
                .map(|(k, v)| TermRecord {
                    labels: k.iter().map(|l| l.to_string()).collect(),
                    num: v.numer().to_string(),
                    den: v.denom().to_string(),
                })
                .collect(),
        }
    }

    pub fn from_record(r: &FormRecord) -> Result<Self, FormError> {
        let u = Universe::new(r.base, r.param);
        let mut f = Self::zero(u);
        for t in &r.terms {
            let labels = t
                .labels
                .iter()
                .map(|s| Label::parse(s).ok_or_else(|| FormError::BadRecord(format!("bad label {s:?}"))))
                .collect::<Result<Vec<_>, _>>()?;
            let c = parse_q(&format!("{}/{}", t.num, t.den))
                .ok_or_else(|| FormError::BadRecord(format!("bad coefficient {}/{}", t.num, t.den)))?;
            f = f.add(&Self::monomial(u, &labels, c)?)?;
        }
        Ok(f)
    }

    /// Parses expressions such as `(1 + z1 x1) * (1 + z2 x2) - 1/2 x1`.
    /// Juxtaposition, `*` and `^` all denote the wedge product. The universe
    /// is the smallest one containing every label used, enlarged to `min`.
    pub fn parse(text: &str, min: Universe) -> Result<Self, FormError> {
        let mut lx = Lexer::new(text);
        let ast = parse_sum(&mut lx)?;
        lx.expect_eof()?;
        let mut u = min;
        ast.visit_labels(&mut |l| match l {
            Label::Base(i) => u.base = u.base.max(i as usize + 1),
            Label::Param(i) => u.param = u.param.max(i as usize + 1),
        });
        ast.eval(u)
    }
}

impl fmt::Display for MultiForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (k, v)) in self.terms.iter().enumerate() {
            let neg = v.is_negative();
            let mag = v.abs();
            match (i, neg) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let show_coeff = k.is_empty() || !mag.is_one();
            if show_coeff {
                write!(f, "{}", fmt_q(&mag))?;
            }
            for (j, l) in k.iter().enumerate() {
                if j > 0 || show_coeff {
                    write!(f, " ")?;
                }
                write!(f, "{l}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermRecord {
    pub labels: Vec<String>,
    pub num: String,
    pub den: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormRecord {
    pub base: usize,
    pub param: usize,
    pub terms: Vec<TermRecord>,
}

impl Serialize for MultiForm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.to_record().serialize(s)
    }
}

impl<'de> Deserialize<'de> for MultiForm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let r = FormRecord::deserialize(d)?;
        MultiForm::from_record(&r).map_err(serde::de::Error::custom)
    }
}

enum Ast {
    Num(Q),
    Gen(Label),
    Sum(Vec<(bool, Ast)>),
    Prod(Vec<Ast>),
}

impl Ast {
    fn visit_labels(&self, f: &mut impl FnMut(Label)) {
        match self {
            Ast::Num(_) => {}
            Ast::Gen(l) => f(*l),
            Ast::Sum(v) => v.iter().for_each(|(_, a)| a.visit_labels(f)),
            Ast::Prod(v) => v.iter().for_each(|a| a.visit_labels(f)),
        }
    }

    fn eval(&self, u: Universe) -> Result<MultiForm, FormError> {
        match self {
            Ast::Num(c) => Ok(MultiForm::scalar(u, c.clone())),
            Ast::Gen(l) => MultiForm::generator(u, *l),
            Ast::Sum(v) => {
                let mut acc = MultiForm::zero(u);
                for (neg, a) in v {
                    let t = a.eval(u)?;
                    acc = if *neg { acc.sub(&t)? } else { acc.add(&t)? };
                }
                Ok(acc)
            }
            Ast::Prod(v) => {
                let mut acc = MultiForm::one(u);
                for a in v {
                    acc = acc.wedge(&a.eval(u)?)?;
                }
                Ok(acc)
            }
        }
    }
}

fn parse_sum(lx: &mut Lexer<'_>) -> Result<Ast, FormError> {
    let mut items = Vec::new();
    let mut neg = lx.eat_punct('-')?;
    if !neg {
        lx.eat_punct('+')?;
    }
    loop {
        items.push((neg, parse_product(lx)?));
        if lx.eat_punct('+')? {
            neg = false;
        } else if lx.eat_punct('-')? {
            neg = true;
        } else {
            break;
        }
    }
    Ok(Ast::Sum(items))
}

fn parse_product(lx: &mut Lexer<'_>) -> Result<Ast, FormError> {
    let mut factors = vec![parse_atom(lx)?];
    loop {
        if lx.eat_punct('*')? || lx.eat_punct('^')? {
            factors.push(parse_atom(lx)?);
            continue;
        }
        match lx.peek()? {
            Tok::Ident(_) | Tok::Int(_) | Tok::Punct('(') => factors.push(parse_atom(lx)?),
            _ => break,
        }
    }
    Ok(Ast::Prod(factors))
}

fn parse_atom(lx: &mut Lexer<'_>) -> Result<Ast, FormError> {
    let (t, pos) = lx.next()?;
    match t {
        Tok::Int(n) => {
            let mut s = n;
            if lx.eat_punct('/')? {
                let (d, _) = lx.expect_uint()?;
                s = format!("{s}/{d}");
            }
            parse_q(&s)
                .map(Ast::Num)
                .ok_or_else(|| FormError::Syntax(SyntaxError { pos, message: format!("bad rational {s}") }))
        }
        Tok::Ident(name) => Label::parse(&name)
            .map(Ast::Gen)
            .ok_or_else(|| FormError::Syntax(SyntaxError { pos, message: format!("unknown label `{name}`") })),
        Tok::Punct('(') => {
            let inner = parse_sum(lx)?;
            lx.expect_punct(')')?;
            Ok(inner)
        }
        other => Err(FormError::Syntax(SyntaxError { pos, message: format!("unexpected {other}") })),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{q, q_frac};

    fn u(b: usize, p: usize) -> Universe {
        Universe::new(b, p)
    }

    fn f(s: &str, b: usize, p: usize) -> MultiForm {
        MultiForm::parse(s, u(b, p)).unwrap()
    }

    #[test]
    fn anticommutativity() {
        let zx = f("z1 x1", 1, 1);
        let xz = f("x1 z1", 1, 1);
        assert_eq!(zx, xz.scale(&q(-1)));
        assert!(f("z1 z1", 1, 0).is_zero());
        let z = f("z1", 1, 0);
        assert!(z.wedge(&z).unwrap().is_zero());
    }

    #[test]
    fn product_of_two_poincare_factors() {
        let a = f("1 + z1 x1", 2, 2);
        let b = f("1 + z2 x2", 2, 2);
        let p = a.wedge(&b).unwrap();
        let expected = f("1 + z1 x1 + z2 x2 + z1 x1 z2 x2", 2, 2);
        assert_eq!(p, expected);
        // stored sorted: z1 x1 z2 x2 = −z1 z2 x1 x2
        assert_eq!(p.coefficient(&[Label::Base(0), Label::Base(1), Label::Param(0), Label::Param(1)]), q(-1));
    }

    #[test]
    fn universe_mismatch_is_an_error() {
        let a = f("z1", 1, 0);
        let b = f("z1", 2, 0);
        assert!(matches!(a.wedge(&b), Err(FormError::UniverseMismatch { .. })));
        assert!(matches!(
            MultiForm::generator(u(1, 1), Label::Param(3)),
            Err(FormError::LabelOutOfRange { .. })
        ));
    }

    #[test]
    fn display_and_parse_agree() {
        let g = f("2 - 1/2 x1 z1 + z1 z2", 2, 1);
        let shown = g.to_string();
        assert_eq!(MultiForm::parse(&shown, g.universe()).unwrap(), g);
        assert_eq!(MultiForm::zero(u(0, 0)).to_string(), "0");
    }

    #[test]
    fn records_round_trip_through_json() {
        let g = f("3 - 2/3 z1 x1 z2 x2", 2, 2);
        let json = serde_json::to_string(&g).unwrap();
        let back: MultiForm = serde_json::from_str(&json).unwrap();
        assert_eq!(back, g);
        assert!(json.contains("\"labels\":[\"z1\",\"z2\",\"x1\",\"x2\"]"));
    }

    #[test]
    fn contraction_examples() {
        let ch = f("1 + z1 x1", 1, 1);
        assert_eq!(ch.contract(&[(vec![], q(1))], None), f("1", 1, 1));
        // right contraction: z1 x1 = −x1 z1 ↦ −x1
        assert_eq!(ch.contract(&[(vec![0], q(1))], None), f("-x1", 1, 1));
        assert!(f("1", 1, 1).contract(&[(vec![0], q(1))], None).is_zero());
    }

    #[test]
    fn partial_contraction_keeps_other_base_labels() {
        let ch = f("z1 z2 x1", 2, 1);
        // z1 z2 x1 with z1 extracted to the right crosses z2 and x1: sign +
        assert_eq!(ch.contract(&[(vec![0], q(1))], Some(&[0])), f("z2 x1", 2, 1));
        // full contraction against [z1] ignores the term: its base part is z1 z2
        assert!(ch.contract(&[(vec![0], q(1))], None).is_zero());
    }

    #[test]
    fn substitution_is_a_ring_map() {
        // z1 ↦ 2 z1, z2 ↦ z1 + z2
        let images = vec![vec![q(2), q(0)], vec![q(1), q(1)]];
        let g = f("1 + z1 z2 x1", 2, 1);
        let s = g.substitute_base(u(2, 1), &images).unwrap();
        assert_eq!(s, f("1 + 2 z1 z2 x1", 2, 1));
    }

    #[test]
    fn restriction_to_sub_torus() {
        let g = f("1 + z1 x1 + z2 x2 + z1 z2 x1 x2", 2, 2);
        let r = g.restrict_params(&[1]).unwrap();
        assert_eq!(r, f("1 + z2 x1", 2, 1));
    }

    #[test]
    fn parse_errors() {
        assert!(MultiForm::parse("1 + y1", u(0, 0)).is_err());
        assert!(MultiForm::parse("(1 + z1", u(0, 0)).is_err());
        assert!(MultiForm::parse("z0", u(0, 0)).is_err());
        assert_eq!(MultiForm::parse("1/2 * 4", u(0, 0)).unwrap().degree_zero(), q(2));
        assert_eq!(MultiForm::parse("-z1", u(0, 0)).unwrap().coefficient(&[Label::Base(0)]), q_frac(-1, 1));
    }
}
