//! Group class descriptors, their presentations and rational homology
//! bases.

use std::fmt;

use num_traits::One;

use crate::families::CrystallographicCover;
use crate::presentation::{parse_presentation, GroupPresentation, Word};
use crate::rational::{fmt_q, Q};
use crate::text::{Lexer, SyntaxError, Tok};

use super::DetectError;

/// Homology data supplied for a finite-index supergroup: the group itself,
/// its rational Betti numbers and a loop word for each degree-one class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperTable {
    pub presentation: GroupPresentation,
    pub betti: Vec<usize>,
    pub loops: Vec<Word>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupClassDescriptor {
    Free(usize),
    FreeAbelian(usize),
    SurfaceClosed(usize),
    FreeProduct(Box<GroupClassDescriptor>, Box<GroupClassDescriptor>),
    DirectProduct(Box<GroupClassDescriptor>, Box<GroupClassDescriptor>),
    FiniteIndexSuper { sub: Box<GroupClassDescriptor>, index: usize, label: String, table: Option<SuperTable> },
}

/// A basis class of `H_q(BΓ; ℚ)`.
///
/// `cochain` is the dual cochain in the exterior-algebra model with one base
/// label per generator, as a list of (sorted base monomial, weight). It is
/// absent for classes of finite-index supergroups, which are only reachable
/// numerically. `loop_word` is set for degree-one classes and names a loop
/// representing the class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomologyClass {
    pub label: String,
    pub degree: usize,
    pub cochain: Option<Vec<(Vec<u32>, Q)>>,
    pub loop_word: Option<Word>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomologyBasis {
    pub classes: Vec<HomologyClass>,
}

impl HomologyBasis {
    pub fn betti(&self) -> Vec<usize> {
        let top = self.classes.iter().map(|c| c.degree).max().unwrap_or(0);
        let mut b = vec![0; top + 1];
        for c in &self.classes {
            b[c.degree] += 1;
        }
        b
    }

    pub fn degree(&self, q: usize) -> impl Iterator<Item = &HomologyClass> {
        self.classes.iter().filter(move |c| c.degree == q)
    }

    pub fn find(&self, label: &str) -> Option<&HomologyClass> {
        self.classes.iter().find(|c| c.label == label)
    }
}

/// Raw class before labels are attached.
#[derive(Clone)]
struct RawClass {
    degree: usize,
    cochain: Vec<(Vec<u32>, Q)>,
}

impl GroupClassDescriptor {
    pub fn validate(&self) -> Result<(), DetectError> {
        match self {
            GroupClassDescriptor::Free(_) | GroupClassDescriptor::FreeAbelian(_) => Ok(()),
            GroupClassDescriptor::SurfaceClosed(g) => {
                if *g == 0 {
                    Err(DetectError::Descriptor("surface genus must be ≥ 1".into()))
                } else {
                    Ok(())
                }
            }
            GroupClassDescriptor::FreeProduct(l, r) | GroupClassDescriptor::DirectProduct(l, r) => {
                l.validate()?;
                r.validate()
            }
            GroupClassDescriptor::FiniteIndexSuper { sub, index, table, .. } => {
                sub.validate()?;
                if *index < 2 {
                    return Err(DetectError::Descriptor("supergroup index must be ≥ 2".into()));
                }
                if let Some(t) = table {
                    if t.betti.first() != Some(&1) {
                        return Err(DetectError::Descriptor("degree-0 Betti number must be 1".into()));
                    }
                    if t.loops.len() != t.betti.get(1).copied().unwrap_or(0) {
                        return Err(DetectError::Descriptor(format!(
                            "{} loop words for first Betti number {}",
                            t.loops.len(),
                            t.betti.get(1).copied().unwrap_or(0)
                        )));
                    }
                }
                Ok(())
            }
        }
    }

    /// The standard presentation of the group.
    pub fn presentation(&self) -> Result<GroupPresentation, DetectError> {
        Ok(match self {
            GroupClassDescriptor::Free(m) => GroupPresentation::free_rank(*m),
            GroupClassDescriptor::FreeAbelian(n) => GroupPresentation::free_abelian(*n),
            GroupClassDescriptor::SurfaceClosed(g) => GroupPresentation::surface(*g),
            GroupClassDescriptor::FreeProduct(l, r) => l.presentation()?.free_product(&r.presentation()?),
            GroupClassDescriptor::DirectProduct(l, r) => l.presentation()?.direct_product(&r.presentation()?),
            GroupClassDescriptor::FiniteIndexSuper { table, label, .. } => match table {
                Some(t) => t.presentation.clone(),
                None => return Err(DetectError::MissingTable(label.clone())),
            },
        })
    }

    fn raw_classes(&self) -> Result<Vec<RawClass>, DetectError> {
        let one = || Q::one();
        let point = RawClass { degree: 0, cochain: vec![(vec![], one())] };
        Ok(match self {
            GroupClassDescriptor::Free(m) => {
                let mut v = vec![point];
                v.extend((0..*m as u32).map(|i| RawClass { degree: 1, cochain: vec![(vec![i], one())] }));
                v
            }
            GroupClassDescriptor::FreeAbelian(n) => {
                let mut v = Vec::new();
                for q in 0..=*n {
                    for s in subsets(*n as u32, q) {
                        v.push(RawClass { degree: q, cochain: vec![(s, one())] });
                    }
                }
                v
            }
            GroupClassDescriptor::SurfaceClosed(g) => {
                let mut v = vec![point];
                v.extend((0..2 * *g as u32).map(|i| RawClass { degree: 1, cochain: vec![(vec![i], one())] }));
                let top = (0..*g as u32).map(|i| (vec![2 * i, 2 * i + 1], one())).collect();
                v.push(RawClass { degree: 2, cochain: top });
                v
            }
            GroupClassDescriptor::FreeProduct(l, r) => {
                let shift = l.presentation()?.rank() as u32;
                let mut v = vec![point];
                v.extend(l.raw_classes()?.into_iter().filter(|c| c.degree > 0));
                v.extend(r.raw_classes()?.into_iter().filter(|c| c.degree > 0).map(|c| offset(c, shift)));
                v
            }
            GroupClassDescriptor::DirectProduct(l, r) => {
                let shift = l.presentation()?.rank() as u32;
                let (lc, rc) = (l.raw_classes()?, r.raw_classes()?);
                let top = lc.iter().map(|c| c.degree).max().unwrap_or(0) + rc.iter().map(|c| c.degree).max().unwrap_or(0);
                let mut v = Vec::new();
                for p in 0..=top {
                    for a in &lc {
                        for b in rc.iter().filter(|b| a.degree + b.degree == p) {
                            let b = offset(b.clone(), shift);
                            let mut cochain = Vec::new();
                            for (ma, wa) in &a.cochain {
                                for (mb, wb) in &b.cochain {
                                    cochain.push((ma.iter().chain(mb).copied().collect(), wa * wb));
                                }
                            }
                            v.push(RawClass { degree: p, cochain });
                        }
                    }
                }
                v
            }
            GroupClassDescriptor::FiniteIndexSuper { label, .. } => {
                return Err(DetectError::Descriptor(format!(
                    "supergroup `{label}` is only supported at the top level of a descriptor"
                )))
            }
        })
    }
}

fn offset(mut c: RawClass, shift: u32) -> RawClass {
    for (m, _) in &mut c.cochain {
        for i in m.iter_mut() {
            *i += shift;
        }
    }
    c
}

/// `q`-element subsets of `0..n` in lexicographic order.
pub(crate) fn subsets(n: u32, q: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(q);
    fn rec(start: u32, n: u32, q: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == q {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            rec(i + 1, n, q, cur, out);
            cur.pop();
        }
    }
    rec(0, n, q, &mut cur, &mut out);
    out
}

fn cochain_label(cochain: &[(Vec<u32>, Q)], names: &[String]) -> String {
    if cochain.len() == 1 && cochain[0].0.is_empty() {
        return "pt".into();
    }
    let terms: Vec<String> = cochain
        .iter()
        .map(|(m, w)| {
            let mono: Vec<&str> = m.iter().map(|&i| names[i as usize].as_str()).collect();
            if w.is_one() {
                mono.join(" ")
            } else {
                format!("{} {}", fmt_q(w), mono.join(" "))
            }
        })
        .collect();
    format!("[{}]", terms.join(" + "))
}

/// Ordered basis of `H_*(BΓ; ℚ)` for the descriptor.
///
/// Degree-zero comes first; products use the Künneth ordering (total
/// degree, then left class, then right class) and free products list the
/// point followed by the reduced classes of each factor.
pub fn rational_homology(d: &GroupClassDescriptor) -> Result<HomologyBasis, DetectError> {
    d.validate()?;
    if let GroupClassDescriptor::FiniteIndexSuper { label, table, .. } = d {
        let t = table.as_ref().ok_or_else(|| DetectError::MissingTable(label.clone()))?;
        let names = t.presentation.generators();
        let mut classes = vec![HomologyClass {
            label: "pt".into(),
            degree: 0,
            cochain: Some(vec![(vec![], Q::one())]),
            loop_word: None,
        }];
        for w in &t.loops {
            classes.push(HomologyClass {
                label: format!("<{}>", w.display(names)),
                degree: 1,
                cochain: None,
                loop_word: Some(w.clone()),
            });
        }
        for (q, &b) in t.betti.iter().enumerate().skip(2) {
            for k in 0..b {
                classes.push(HomologyClass { label: format!("H{q}#{}", k + 1), degree: q, cochain: None, loop_word: None });
            }
        }
        return Ok(HomologyBasis { classes });
    }
    let names = d.presentation()?.generators().to_vec();
    let classes = d
        .raw_classes()?
        .into_iter()
        .map(|c| {
            let loop_word = (c.degree == 1 && c.cochain.len() == 1 && c.cochain[0].1.is_one())
                .then(|| Word::power(c.cochain[0].0[0] as usize, 1));
            HomologyClass { label: cochain_label(&c.cochain, &names), degree: c.degree, cochain: Some(c.cochain), loop_word }
        })
        .collect();
    Ok(HomologyBasis { classes })
}

impl fmt::Display for GroupClassDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupClassDescriptor::Free(m) => write!(f, "free({m})"),
            GroupClassDescriptor::FreeAbelian(n) => write!(f, "zn({n})"),
            GroupClassDescriptor::SurfaceClosed(g) => write!(f, "surface({g})"),
            GroupClassDescriptor::FreeProduct(l, r) => write!(f, "free_product({l}, {r})"),
            GroupClassDescriptor::DirectProduct(l, r) => write!(f, "product({l}, {r})"),
            GroupClassDescriptor::FiniteIndexSuper { sub, index, label, table } => {
                write!(f, "super({sub}, {index}, {label:?}")?;
                if let Some(t) = table {
                    let betti: Vec<String> = t.betti.iter().map(|b| b.to_string()).collect();
                    let loops: Vec<String> =
                        t.loops.iter().map(|w| w.display(t.presentation.generators()).to_string()).collect();
                    write!(f, ", betti=[{}], loops=[{}], group={:?}", betti.join(", "), loops.join(", "), t.presentation.to_string())?;
                }
                write!(f, ")")
            }
        }
    }
}

/// Parses descriptors such as `product(zn(1), surface(2))` or
/// `super(zn(2), 2, "klein", betti=[1,1], loops=[b], group=klein)`.
pub fn parse_descriptor(text: &str) -> Result<GroupClassDescriptor, DetectError> {
    let mut lx = Lexer::new(text);
    let d = parse_descriptor_lx(&mut lx)?;
    lx.expect_eof()?;
    Ok(d)
}

pub(crate) fn parse_descriptor_lx(lx: &mut Lexer<'_>) -> Result<GroupClassDescriptor, DetectError> {
    let (name, pos) = lx.expect_ident()?;
    lx.expect_punct('(')?;
    let uint = |lx: &mut Lexer<'_>| -> Result<usize, DetectError> { Ok(lx.expect_uint()?.0 as usize) };
    let d = match name.as_str() {
        "free" => GroupClassDescriptor::Free(uint(lx)?),
        "zn" => GroupClassDescriptor::FreeAbelian(uint(lx)?),
        "surface" => GroupClassDescriptor::SurfaceClosed(uint(lx)?),
        "free_product" | "product" => {
            let l = parse_descriptor_lx(lx)?;
            lx.expect_punct(',')?;
            let r = parse_descriptor_lx(lx)?;
            if name == "product" {
                GroupClassDescriptor::DirectProduct(Box::new(l), Box::new(r))
            } else {
                GroupClassDescriptor::FreeProduct(Box::new(l), Box::new(r))
            }
        }
        "super" => parse_super(lx)?,
        other => {
            return Err(SyntaxError { pos, message: format!("unknown group class `{other}`") }.into());
        }
    };
    lx.expect_punct(')')?;
    d.validate()?;
    Ok(d)
}

fn parse_super(lx: &mut Lexer<'_>) -> Result<GroupClassDescriptor, DetectError> {
    let sub = parse_descriptor_lx(lx)?;
    lx.expect_punct(',')?;
    let index = lx.expect_uint()?.0 as usize;
    lx.expect_punct(',')?;
    let label = match lx.next()? {
        (Tok::Str(s) | Tok::Ident(s), _) => s,
        (t, pos) => return Err(SyntaxError { pos, message: format!("expected a label, found {t}") }.into()),
    };
    let mut betti = None;
    let mut loops: Option<Vec<String>> = None;
    let mut group = None;
    while lx.eat_punct(',')? {
        let (key, pos) = lx.expect_ident()?;
        lx.expect_punct('=')?;
        match key.as_str() {
            "betti" => {
                lx.expect_punct('[')?;
                let mut v = Vec::new();
                if !lx.eat_punct(']')? {
                    loop {
                        v.push(lx.expect_uint()?.0 as usize);
                        if !lx.eat_punct(',')? {
                            break;
                        }
                    }
                    lx.expect_punct(']')?;
                }
                betti = Some(v);
            }
            "loops" => {
                lx.expect_punct('[')?;
                let mut v = Vec::new();
                let mut cur = String::new();
                loop {
                    let (t, tpos) = lx.next()?;
                    match t {
                        Tok::Punct(']') => break,
                        Tok::Punct(',') => v.push(std::mem::take(&mut cur)),
                        Tok::Ident(s) | Tok::Int(s) => {
                            cur.push(' ');
                            cur.push_str(&s);
                        }
                        Tok::Punct(c @ ('^' | '-')) => cur.push(c),
                        other => {
                            return Err(SyntaxError { pos: tpos, message: format!("unexpected {other} in loop list") }
                                .into())
                        }
                    }
                }
                if !cur.trim().is_empty() {
                    v.push(cur);
                }
                loops = Some(v);
            }
            "group" => {
                group = Some(match lx.next()? {
                    (Tok::Ident(s), _) if s == "klein" => CrystallographicCover::klein().group().clone(),
                    (Tok::Str(s), _) => parse_presentation(&s)?,
                    (t, p) => {
                        return Err(SyntaxError { pos: p, message: format!("expected `klein` or a presentation string, found {t}") }
                            .into())
                    }
                });
            }
            other => return Err(SyntaxError { pos, message: format!("unknown key `{other}`") }.into()),
        }
    }
    let table = match (betti, group) {
        (None, None) if loops.is_none() => None,
        (Some(betti), Some(presentation)) => {
            let loops = loops
                .unwrap_or_default()
                .iter()
                .map(|w| presentation.parse_word(w))
                .collect::<Result<Vec<_>, _>>()?;
            Some(SuperTable { presentation, betti, loops })
        }
        _ => return Err(DetectError::Descriptor("a homology table needs both `betti` and `group`".into())),
    };
    Ok(GroupClassDescriptor::FiniteIndexSuper { sub: Box::new(sub), index, label, table })
}
