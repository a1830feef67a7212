//! Finite-index subgroups described through a crystallographic action.
//!
//! The group `Γ` acts on `ℚ^d` by affine maps `v ↦ A v + s` with integer
//! `A`, one map per generator. The subgroup `Γ₀` is generated by a list of
//! words that must act as translations spanning a full-rank lattice `L`.
//! An element of `Γ` then lies in `Γ₀` exactly when it acts as a translation
//! by a vector of `L`, and its coordinates in the lattice basis are its
//! exponents in the (abelian) subgroup generators. The action must be
//! faithful for this to be a valid membership test; the built-in covers
//! satisfy that.
//!
//! Cover files extend the presentation syntax:
//!
//! ```text
//! gens: a b;
//! rels: b a b^-1 a;
//! action a: [[1,0],[0,1]] + [0,1];
//! action b: [[1,0],[0,-1]] + [1/2,0];
//! subgroup: a, b^2;
//! cosets: e, b;
//! ```

use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::presentation::{parse_gens_section, parse_rels_section, GroupPresentation, PresentationError, Word};
use crate::rational::{determinant, invert, is_integer, q, q_frac, QMatrix, Q};
use crate::text::{Lexer, SyntaxError, Tok};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoverError {
    #[error(transparent)]
    Presentation(#[from] PresentationError),
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error("{0}")]
    Invalid(String),
    #[error("invalid coset system: {0}")]
    InvalidCosets(String),
}

/// Affine map `v ↦ lin · v + trans` with integer linear part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Affine {
    pub lin: Vec<Vec<i64>>,
    pub trans: Vec<Q>,
}

impl Affine {
    pub fn identity(d: usize) -> Self {
        let lin = (0..d).map(|i| (0..d).map(|j| i64::from(i == j)).collect()).collect();
        Affine { lin, trans: vec![Q::zero(); d] }
    }

    pub fn dim(&self) -> usize {
        self.trans.len()
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Affine) -> Affine {
        let d = self.dim();
        let lin = (0..d).map(|i| (0..d).map(|j| (0..d).map(|k| self.lin[i][k] * other.lin[k][j]).sum()).collect()).collect();
        let trans = (0..d)
            .map(|i| {
                let mut t = self.trans[i].clone();
                for k in 0..d {
                    t += q(self.lin[i][k]) * &other.trans[k];
                }
                t
            })
            .collect();
        Affine { lin, trans }
    }

    /// Inverse, if the linear part is invertible over `ℤ`.
    pub fn inverse(&self) -> Option<Affine> {
        let d = self.dim();
        let m: QMatrix = self.lin.iter().map(|r| r.iter().map(|&x| q(x)).collect()).collect();
        let inv = invert(&m)?;
        let mut lin = vec![vec![0i64; d]; d];
        for i in 0..d {
            for j in 0..d {
                if !is_integer(&inv[i][j]) {
                    return None;
                }
                lin[i][j] = inv[i][j].to_integer().to_i64()?;
            }
        }
        let trans = (0..d)
            .map(|i| {
                let mut t = Q::zero();
                for k in 0..d {
                    t -= &inv[i][k] * &self.trans[k];
                }
                t
            })
            .collect();
        Some(Affine { lin, trans })
    }

    pub fn is_translation(&self) -> bool {
        self.lin.iter().enumerate().all(|(i, r)| r.iter().enumerate().all(|(j, &x)| x == i64::from(i == j)))
    }
}

/// Position of `g · t_j` among the cosets: `t_i⁻¹ g t_j = h ∈ Γ₀` with `h`
/// given by its exponents in the subgroup generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetStep {
    pub target: usize,
    pub exponents: Vec<i64>,
}

#[derive(Debug, Clone)]
pub struct CrystallographicCover {
    name: String,
    group: GroupPresentation,
    actions: Vec<Affine>,
    subgroup: Vec<Word>,
    lattice_inv: QMatrix,
    cosets: Vec<Word>,
    coset_maps: Vec<Affine>,
    steps: Vec<Vec<CosetStep>>,
}

impl CrystallographicCover {
    pub fn new(
        name: impl Into<String>,
        group: GroupPresentation,
        actions: Vec<Affine>,
        subgroup: Vec<Word>,
        cosets: Vec<Word>,
    ) -> Result<Self, CoverError> {
        let invalid = |m: String| Err(CoverError::Invalid(m));
        if actions.len() != group.rank() {
            return invalid(format!("{} actions for {} generators", actions.len(), group.rank()));
        }
        let d = actions.first().map_or(0, Affine::dim);
        if d == 0 {
            return invalid("the action needs dimension ≥ 1".into());
        }
        for (i, a) in actions.iter().enumerate() {
            if a.dim() != d || a.lin.len() != d || a.lin.iter().any(|r| r.len() != d) {
                return invalid(format!("action of `{}` is not {d}-dimensional", group.generators()[i]));
            }
            if a.inverse().is_none() {
                return invalid(format!("linear part of `{}` is not invertible over ℤ", group.generators()[i]));
            }
        }
        let inverses: Vec<Affine> = actions.iter().map(|a| a.inverse().expect("checked")).collect();
        let act = |w: &Word| -> Affine {
            w.letters.iter().fold(Affine::identity(d), |acc, l| {
                acc.compose(if l.inverse { &inverses[l.gen] } else { &actions[l.gen] })
            })
        };
        for r in group.relators() {
            if act(r) != Affine::identity(d) {
                return invalid(format!("relator {} does not act trivially", r.display(group.generators())));
            }
        }
        if subgroup.len() != d {
            return invalid(format!("need {d} subgroup generators, got {}", subgroup.len()));
        }
        let mut lattice: QMatrix = vec![vec![Q::zero(); d]; d];
        for (k, w) in subgroup.iter().enumerate() {
            let a = act(w);
            if !a.is_translation() {
                return invalid(format!("subgroup word {} is not a translation", w.display(group.generators())));
            }
            for i in 0..d {
                lattice[i][k] = a.trans[i].clone();
            }
        }
        let Some(lattice_inv) = invert(&lattice) else {
            return invalid("subgroup translations do not span a full-rank lattice".into());
        };
        if cosets.is_empty() {
            return Err(CoverError::InvalidCosets("no coset representatives".into()));
        }
        let coset_maps: Vec<Affine> = cosets.iter().map(&act).collect();
        let mut cover = CrystallographicCover {
            name: name.into(),
            group,
            actions,
            subgroup,
            lattice_inv,
            cosets,
            coset_maps,
            steps: Vec::new(),
        };
        cover.build_steps()?;
        Ok(cover)
    }

    fn build_steps(&mut self) -> Result<(), CoverError> {
        let n = self.cosets.len();
        let names = self.group.generators().to_vec();
        let show = |w: &Word| w.display(&names).to_string();
        if !(0..n).any(|i| self.member(&self.coset_maps[i]).is_some()) {
            return Err(CoverError::InvalidCosets("no representative lies in the subgroup".into()));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let rel = self.coset_inverse(i).compose(&self.coset_maps[j]);
                if self.member(&rel).is_some() {
                    return Err(CoverError::InvalidCosets(format!(
                        "{} and {} represent the same coset",
                        show(&self.cosets[i]),
                        show(&self.cosets[j])
                    )));
                }
            }
        }
        let mut steps = Vec::with_capacity(self.actions.len());
        for g in 0..self.actions.len() {
            let mut row = Vec::with_capacity(n);
            let mut hit = vec![false; n];
            for j in 0..n {
                let gt = self.actions[g].compose(&self.coset_maps[j]);
                let found = (0..n).find_map(|i| {
                    self.member(&self.coset_inverse(i).compose(&gt)).map(|e| CosetStep { target: i, exponents: e })
                });
                let Some(step) = found else {
                    return Err(CoverError::InvalidCosets(format!(
                        "{} · {} lies in no listed coset",
                        names[g],
                        show(&self.cosets[j])
                    )));
                };
                hit[step.target] = true;
                row.push(step);
            }
            if hit.iter().any(|h| !h) {
                return Err(CoverError::InvalidCosets(format!("generator {} does not permute the cosets", names[g])));
            }
            steps.push(row);
        }
        self.steps = steps;
        Ok(())
    }

    fn coset_inverse(&self, i: usize) -> Affine {
        self.coset_maps[i].inverse().expect("products of invertible maps")
    }

    /// Exponents of `a` in the subgroup generators, if `a` acts as a lattice
    /// translation.
    pub fn member(&self, a: &Affine) -> Option<Vec<i64>> {
        if !a.is_translation() {
            return None;
        }
        let d = self.dim();
        let mut out = Vec::with_capacity(d);
        for k in 0..d {
            let mut c = Q::zero();
            for i in 0..d {
                c += &self.lattice_inv[k][i] * &a.trans[i];
            }
            if !is_integer(&c) {
                return None;
            }
            out.push(c.to_integer().to_i64()?);
        }
        Some(out)
    }

    /// Affine map of a word of `Γ`.
    pub fn act(&self, w: &Word) -> Affine {
        w.letters.iter().fold(Affine::identity(self.dim()), |acc, l| {
            let m = if l.inverse { self.actions[l.gen].inverse().expect("checked") } else { self.actions[l.gen].clone() };
            acc.compose(&m)
        })
    }

    /// Coset index `i` and subgroup exponents with `t_i⁻¹ w t_j ∈ Γ₀`.
    pub fn step_word(&self, w: &Word, j: usize) -> Option<CosetStep> {
        let wt = self.act(w).compose(&self.coset_maps[j]);
        (0..self.index()).find_map(|i| {
            self.member(&self.coset_inverse(i).compose(&wt)).map(|e| CosetStep { target: i, exponents: e })
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn group(&self) -> &GroupPresentation {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.subgroup.len()
    }

    pub fn index(&self) -> usize {
        self.cosets.len()
    }

    pub fn cosets(&self) -> &[Word] {
        &self.cosets
    }

    pub fn subgroup_words(&self) -> &[Word] {
        &self.subgroup
    }

    /// `steps()[g][j]` describes `g · t_j`.
    pub fn steps(&self) -> &[Vec<CosetStep>] {
        &self.steps
    }

    pub fn actions(&self) -> &[Affine] {
        &self.actions
    }

    /// Presentation of `Γ₀` as a free abelian group on the subgroup words,
    /// with generators named `h1, h2, …`.
    pub fn subgroup_presentation(&self) -> GroupPresentation {
        let names = (1..=self.dim()).map(|i| format!("h{i}")).collect();
        GroupPresentation::free_abelian(self.dim()).with_generator_names(names).expect("same rank")
    }

    /// Same cover with a different list of coset representatives.
    pub fn with_cosets(&self, cosets: Vec<Word>) -> Result<Self, CoverError> {
        Self::new(self.name.clone(), self.group.clone(), self.actions.clone(), self.subgroup.clone(), cosets)
    }

    /// When `Γ ≅ ℤ^d` acts by linearly independent translations, the
    /// integer matrix `B` with `B[i][k]` the exponent of generator `i` in
    /// subgroup word `k`. `None` for any other cover.
    pub fn translation_matrix(&self) -> Option<QMatrix> {
        let d = self.dim();
        if self.actions.len() != d || !self.actions.iter().all(Affine::is_translation) {
            return None;
        }
        let gens: QMatrix = (0..d).map(|i| (0..d).map(|g| self.actions[g].trans[i].clone()).collect()).collect();
        if determinant(&gens).is_zero() {
            return None;
        }
        Some((0..d).map(|i| self.subgroup.iter().map(|w| q(w.exponent_sum(i))).collect()).collect())
    }

    /// `k`-fold cover of the circle: `kℤ ≤ ℤ` with cosets `e, t, …, t^{k−1}`.
    pub fn circle(k: usize) -> Result<Self, CoverError> {
        if k == 0 {
            return Err(CoverError::Invalid("cover degree must be ≥ 1".into()));
        }
        let g = GroupPresentation::free(&["t"]);
        let action = Affine { lin: vec![vec![1]], trans: vec![Q::one()] };
        let cosets = (0..k).map(|i| Word::power(0, i as i64)).collect();
        Self::new(format!("circle({k})"), g, vec![action], vec![Word::power(0, k as i64)], cosets)
    }

    /// Sublattice of `ℤ^d` generated by `e_i^{k_i}`, with the product coset
    /// representatives in lexicographic order.
    pub fn sublattice(factors: &[usize]) -> Result<Self, CoverError> {
        let d = factors.len();
        if d == 0 || factors.contains(&0) {
            return Err(CoverError::Invalid("sublattice factors must be positive".into()));
        }
        let g = GroupPresentation::free_abelian(d);
        let actions = (0..d)
            .map(|i| Affine { lin: Affine::identity(d).lin, trans: (0..d).map(|j| q(i64::from(i == j))).collect() })
            .collect();
        let subgroup = factors.iter().enumerate().map(|(i, &k)| Word::power(i, k as i64)).collect();
        let mut cosets = vec![Word::empty()];
        for (i, &k) in factors.iter().enumerate() {
            cosets = cosets.iter().flat_map(|w| (0..k).map(move |p| w.concat(&Word::power(i, p as i64)))).collect();
        }
        let label = factors.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",");
        Self::new(format!("sublattice({label})"), g, actions, subgroup, cosets)
    }

    /// The Klein bottle group `⟨a, b | b a b⁻¹ a⟩` acting on the plane by
    /// `a: (x, y) ↦ (x, y + 1)` and `b: (x, y) ↦ (x + 1/2, −y)`, with the
    /// translation subgroup `⟨a, b²⟩ ≅ ℤ²` and cosets `e, b`.
    pub fn klein() -> Self {
        let g = GroupPresentation::new(
            vec!["a".into(), "b".into()],
            vec![Word::from_letters(vec![
                crate::presentation::Letter::new(1, false),
                crate::presentation::Letter::new(0, false),
                crate::presentation::Letter::new(1, true),
                crate::presentation::Letter::new(0, false),
            ])],
        )
        .expect("valid presentation");
        let a = Affine { lin: vec![vec![1, 0], vec![0, 1]], trans: vec![q(0), q(1)] };
        let b = Affine { lin: vec![vec![1, 0], vec![0, -1]], trans: vec![q_frac(1, 2), q(0)] };
        Self::new("klein", g, vec![a, b], vec![Word::power(0, 1), Word::power(1, 2)], vec![Word::empty(), Word::power(1, 1)])
            .expect("valid cover")
    }

    /// Parses a cover file.
    pub fn parse(name: impl Into<String>, text: &str) -> Result<Self, CoverError> {
        let mut lx = Lexer::new(text);
        let gens = parse_gens_section(&mut lx)?;
        let rels = parse_rels_section(&mut lx, &gens)?;
        let group = GroupPresentation::new(gens, rels)?;
        let mut actions: Vec<Option<Affine>> = vec![None; group.rank()];
        let mut subgroup = None;
        let mut cosets = None;
        loop {
            let (t, pos) = lx.next()?;
            match t {
                Tok::Eof => break,
                Tok::Ident(kw) if kw == "action" => {
                    let (gname, gpos) = lx.expect_ident()?;
                    let g = group.generator_index(&gname).ok_or(PresentationError::UndeclaredGenerator {
                        name: gname.clone(),
                        line: gpos.line,
                        col: gpos.col,
                    })?;
                    lx.expect_punct(':')?;
                    let lin = parse_int_matrix(&mut lx)?;
                    lx.expect_punct('+')?;
                    let trans = parse_q_vector(&mut lx)?;
                    lx.expect_punct(';')?;
                    if actions[g].is_some() {
                        return Err(SyntaxError { pos: gpos, message: format!("duplicate action for `{gname}`") }.into());
                    }
                    actions[g] = Some(Affine { lin, trans });
                }
                Tok::Ident(kw) if kw == "subgroup" || kw == "cosets" => {
                    lx.expect_punct(':')?;
                    let words = parse_word_list(&mut lx, &group)?;
                    let slot = if kw == "subgroup" { &mut subgroup } else { &mut cosets };
                    if slot.is_some() {
                        return Err(SyntaxError { pos, message: format!("duplicate `{kw}` section") }.into());
                    }
                    *slot = Some(words);
                }
                other => {
                    return Err(SyntaxError { pos, message: format!("expected `action`, `subgroup` or `cosets`, found {other}") }
                        .into())
                }
            }
        }
        let actions = actions
            .into_iter()
            .enumerate()
            .map(|(i, a)| a.ok_or_else(|| CoverError::Invalid(format!("missing action for `{}`", group.generators()[i]))))
            .collect::<Result<Vec<_>, _>>()?;
        let subgroup = subgroup.ok_or_else(|| CoverError::Invalid("missing `subgroup` section".into()))?;
        let cosets = cosets.ok_or_else(|| CoverError::Invalid("missing `cosets` section".into()))?;
        Self::new(name, group, actions, subgroup, cosets)
    }
}

fn parse_int_matrix(lx: &mut Lexer<'_>) -> Result<Vec<Vec<i64>>, CoverError> {
    lx.expect_punct('[')?;
    let mut rows = Vec::new();
    loop {
        lx.expect_punct('[')?;
        let mut row = Vec::new();
        loop {
            row.push(lx.expect_int()?.0);
            if !lx.eat_punct(',')? {
                break;
            }
        }
        lx.expect_punct(']')?;
        rows.push(row);
        if !lx.eat_punct(',')? {
            break;
        }
    }
    lx.expect_punct(']')?;
    Ok(rows)
}

fn parse_q_vector(lx: &mut Lexer<'_>) -> Result<Vec<Q>, CoverError> {
    lx.expect_punct('[')?;
    let mut out = Vec::new();
    loop {
        let (n, _) = lx.expect_int()?;
        let mut v = q(n);
        if lx.eat_punct('/')? {
            let (d, pos) = lx.expect_uint()?;
            if d == 0 {
                return Err(SyntaxError { pos, message: "zero denominator".into() }.into());
            }
            v = q_frac(n, d as i64);
        }
        out.push(v);
        if !lx.eat_punct(',')? {
            break;
        }
    }
    lx.expect_punct(']')?;
    Ok(out)
}

/// Comma-separated words ending in `;`. Words may be `e`.
fn parse_word_list(lx: &mut Lexer<'_>, g: &GroupPresentation) -> Result<Vec<Word>, CoverError> {
    let mut words = Vec::new();
    loop {
        let mut text = String::new();
        loop {
            match lx.peek()? {
                Tok::Punct(',') | Tok::Punct(';') | Tok::Eof => break,
                _ => {
                    let (t, _) = lx.next()?;
                    match t {
                        Tok::Ident(s) | Tok::Int(s) => {
                            text.push(' ');
                            text.push_str(&s);
                        }
                        Tok::Punct(c) => text.push(c),
                        Tok::Str(s) => text.push_str(&s),
                        Tok::Eof => unreachable!(),
                    }
                }
            }
        }
        words.push(g.parse_word(&text)?);
        if lx.eat_punct(',')? {
            continue;
        }
        lx.expect_punct(';')?;
        return Ok(words);
    }
}

/// Sign-aware absolute value of a rational, as used for indices.
pub(crate) fn abs_index(x: &Q) -> usize {
    x.abs().to_integer().to_usize().unwrap_or(0)
}
