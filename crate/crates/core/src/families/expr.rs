//! Text form of family build trees.
//!
//! ```text
//! fam  := char_zn(n, res)
//!       | trivial(GROUP, rank [, SPACE])
//!       | solve(GROUP, dim [, seed])
//!       | tensor(fam, fam) | union(fam, fam) | sum(fam, fam)
//!       | induce(fam, cover=COVER [, cosets=[w, ...]])
//!       | pullback(fam, cover=COVER)
//!       | extend(fam, GROUP [, at=[name, ...]])
//!       | rename(fam, [name, ...])
//!       | restrict(fam, [axis, ...])            # axes counted from 1
//! SPACE := point | points(c) | torus(d, res) | product(SPACE, SPACE) | union(SPACE, SPACE)
//! COVER := circle(k) | sublattice(k, ...) | klein | "path/to/file.cover"
//! ```
//!
//! `GROUP` is a group descriptor such as `free(2)` or `product(zn(1), surface(1))`.
//! Cover paths are resolved against the context's base directory.

use std::path::PathBuf;

use thiserror::Error;

use crate::detect::parse_descriptor_lx;
use crate::presentation::GroupPresentation;
use crate::repvar::SolveConfig;
use crate::text::{Lexer, Pos, SyntaxError, Tok};

use super::{
    character_family_zn, direct_sum, disjoint_union, extend_free_product, induce_family, pullback_family,
    restrict_to_subtorus, solved_family, tensor_families, trivial_family, CrystallographicCover, Family,
    ParameterSpace,
};

#[derive(Debug, Error)]
pub enum ExprError {
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("line {}, column {}: {message}", .pos.line, .pos.col)]
    Build { pos: Pos, message: String },
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

/// Where cover files are looked up and how `solve(...)` runs.
#[derive(Debug, Clone, Default)]
pub struct FamilyContext {
    pub base_dir: PathBuf,
    pub solver: SolveConfig,
}

/// Parses and builds a family expression.
pub fn parse_family_expr(text: &str, ctx: &FamilyContext) -> Result<Family, ExprError> {
    let mut lx = Lexer::new(text);
    let f = parse_fam(&mut lx, ctx)?;
    lx.expect_eof()?;
    Ok(f)
}

fn build<T, E: std::fmt::Display>(pos: Pos, r: Result<T, E>) -> Result<T, ExprError> {
    r.map_err(|e| ExprError::Build { pos, message: e.to_string() })
}

fn uint(lx: &mut Lexer<'_>) -> Result<usize, ExprError> {
    Ok(lx.expect_uint()?.0 as usize)
}

fn group(lx: &mut Lexer<'_>) -> Result<GroupPresentation, ExprError> {
    let pos = lx.pos()?;
    let d = build(pos, parse_descriptor_lx(lx))?;
    build(pos, d.presentation())
}

fn ident_list(lx: &mut Lexer<'_>) -> Result<Vec<String>, ExprError> {
    lx.expect_punct('[')?;
    let mut v = Vec::new();
    if lx.eat_punct(']')? {
        return Ok(v);
    }
    loop {
        v.push(lx.expect_ident()?.0);
        if !lx.eat_punct(',')? {
            break;
        }
    }
    lx.expect_punct(']')?;
    Ok(v)
}

fn keyword_arg(lx: &mut Lexer<'_>, key: &str) -> Result<bool, ExprError> {
    if let Tok::Ident(s) = lx.peek()? {
        if s == key {
            lx.next()?;
            lx.expect_punct('=')?;
            return Ok(true);
        }
    }
    Ok(false)
}

fn parse_space(lx: &mut Lexer<'_>) -> Result<ParameterSpace, ExprError> {
    let (name, pos) = lx.expect_ident()?;
    match name.as_str() {
        "point" => Ok(ParameterSpace::point()),
        "points" => {
            lx.expect_punct('(')?;
            let c = uint(lx)?;
            lx.expect_punct(')')?;
            build(pos, ParameterSpace::points(c))
        }
        "torus" => {
            lx.expect_punct('(')?;
            let d = uint(lx)?;
            lx.expect_punct(',')?;
            let r = uint(lx)?;
            lx.expect_punct(')')?;
            build(pos, ParameterSpace::torus(d, r))
        }
        "product" | "union" => {
            lx.expect_punct('(')?;
            let l = parse_space(lx)?;
            lx.expect_punct(',')?;
            let r = parse_space(lx)?;
            lx.expect_punct(')')?;
            Ok(if name == "product" {
                ParameterSpace::product(l, r)
            } else {
                ParameterSpace::disjoint_union(l, r)
            })
        }
        other => Err(SyntaxError { pos, message: format!("unknown parameter space `{other}`") }.into()),
    }
}

fn parse_cover(lx: &mut Lexer<'_>, ctx: &FamilyContext) -> Result<CrystallographicCover, ExprError> {
    let (t, pos) = lx.next()?;
    match t {
        Tok::Str(path) => {
            let full = ctx.base_dir.join(&path);
            let text = std::fs::read_to_string(&full)
                .map_err(|e| ExprError::Io { path: full.display().to_string(), message: e.to_string() })?;
            build(pos, CrystallographicCover::parse(path, &text))
        }
        Tok::Ident(name) => match name.as_str() {
            "klein" => Ok(CrystallographicCover::klein()),
            "circle" => {
                lx.expect_punct('(')?;
                let k = uint(lx)?;
                lx.expect_punct(')')?;
                build(pos, CrystallographicCover::circle(k))
            }
            "sublattice" => {
                lx.expect_punct('(')?;
                let mut ks = vec![uint(lx)?];
                while lx.eat_punct(',')? {
                    ks.push(uint(lx)?);
                }
                lx.expect_punct(')')?;
                build(pos, CrystallographicCover::sublattice(&ks))
            }
            other => Err(SyntaxError { pos, message: format!("unknown cover `{other}`") }.into()),
        },
        other => Err(SyntaxError { pos, message: format!("expected a cover, found {other}") }.into()),
    }
}

fn parse_fam(lx: &mut Lexer<'_>, ctx: &FamilyContext) -> Result<Family, ExprError> {
    let (name, pos) = lx.expect_ident()?;
    lx.expect_punct('(')?;
    let f = match name.as_str() {
        "char_zn" => {
            let n = uint(lx)?;
            lx.expect_punct(',')?;
            let r = uint(lx)?;
            build(pos, character_family_zn(n, r))?
        }
        "trivial" => {
            let g = group(lx)?;
            lx.expect_punct(',')?;
            let rank = uint(lx)?;
            let space = if lx.eat_punct(',')? { parse_space(lx)? } else { ParameterSpace::point() };
            build(pos, trivial_family(&g, rank, space))?
        }
        "solve" => {
            let g = group(lx)?;
            lx.expect_punct(',')?;
            let n = uint(lx)?;
            let mut cfg = ctx.solver.clone();
            if lx.eat_punct(',')? {
                cfg.seed = lx.expect_uint()?.0;
            }
            build(pos, solved_family(&g, n, &cfg))?
        }
        "tensor" | "union" | "sum" => {
            let a = parse_fam(lx, ctx)?;
            lx.expect_punct(',')?;
            let b = parse_fam(lx, ctx)?;
            match name.as_str() {
                "tensor" => tensor_families(&a, &b),
                "union" => build(pos, disjoint_union(&a, &b))?,
                _ => build(pos, direct_sum(&a, &b))?,
            }
        }
        "induce" | "pullback" => {
            let a = parse_fam(lx, ctx)?;
            lx.expect_punct(',')?;
            let kpos = lx.pos()?;
            if !keyword_arg(lx, "cover")? {
                return Err(SyntaxError { pos: kpos, message: "expected `cover=`".into() }.into());
            }
            let mut cover = parse_cover(lx, ctx)?;
            if name == "induce" && lx.eat_punct(',')? {
                let cpos = lx.pos()?;
                if !keyword_arg(lx, "cosets")? {
                    return Err(SyntaxError { pos: cpos, message: "expected `cosets=`".into() }.into());
                }
                let words = word_list(lx, cover.group())?;
                cover = build(cpos, cover.with_cosets(words))?;
            }
            if name == "induce" {
                build(pos, induce_family(&a, &cover))?
            } else {
                build(pos, pullback_family(&a, &cover))?
            }
        }
        "extend" => {
            let mut a = parse_fam(lx, ctx)?;
            lx.expect_punct(',')?;
            let g = group(lx)?;
            if lx.eat_punct(',')? {
                let apos = lx.pos()?;
                if !keyword_arg(lx, "at")? {
                    return Err(SyntaxError { pos: apos, message: "expected `at=`".into() }.into());
                }
                let names = ident_list(lx)?;
                a = build(apos, a.renamed(names))?;
            }
            build(pos, extend_free_product(&a, &g))?
        }
        "rename" => {
            let a = parse_fam(lx, ctx)?;
            lx.expect_punct(',')?;
            let names = ident_list(lx)?;
            build(pos, a.renamed(names))?
        }
        "restrict" => {
            let a = parse_fam(lx, ctx)?;
            lx.expect_punct(',')?;
            lx.expect_punct('[')?;
            let mut keep = Vec::new();
            loop {
                let (k, kpos) = lx.expect_uint()?;
                if k == 0 {
                    return Err(SyntaxError { pos: kpos, message: "axes are counted from 1".into() }.into());
                }
                keep.push(k as usize - 1);
                if !lx.eat_punct(',')? {
                    break;
                }
            }
            lx.expect_punct(']')?;
            build(pos, restrict_to_subtorus(&a, &keep))?
        }
        other => return Err(SyntaxError { pos, message: format!("unknown combinator `{other}`") }.into()),
    };
    lx.expect_punct(')')?;
    Ok(f)
}

fn word_list(lx: &mut Lexer<'_>, g: &GroupPresentation) -> Result<Vec<crate::presentation::Word>, ExprError> {
    let pos = lx.expect_punct('[')?;
    let mut words = Vec::new();
    let mut cur = String::new();
    loop {
        let (t, tpos) = lx.next()?;
        match t {
            Tok::Punct(']') => break,
            Tok::Punct(',') => words.push(std::mem::take(&mut cur)),
            Tok::Ident(s) | Tok::Int(s) => {
                cur.push(' ');
                cur.push_str(&s);
            }
            Tok::Punct(c @ ('^' | '-')) => cur.push(c),
            other => return Err(SyntaxError { pos: tpos, message: format!("unexpected {other} in word list") }.into()),
        }
    }
    if !cur.trim().is_empty() {
        words.push(cur);
    }
    words.iter().map(|w| build(pos, g.parse_word(w))).collect()
}
