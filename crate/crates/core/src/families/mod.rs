//! Parameterised families of unitary representations.
//!
//! A [`Family`] assigns to every point of a [`ParameterSpace`] a
//! representation of one fixed group. Families are built from a handful of
//! combinators (characters of `ℤⁿ`, constants, tensor products, induction,
//! pullback along a cover, extension across a free product, disjoint
//! unions, direct sums and restriction to coordinate sub-tori). Each
//! combinator also propagates the exact Chern character of the associated
//! bundle whenever that is determined by the build tree.
//!
//! Chern characters live in the exterior algebra with one base label per
//! group generator (`z_i` for generator `i`) and one parameter label per
//! torus axis of the component.

mod cover;
mod expr;

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::charforms::{FormError, FormRecord, Label, MultiForm, Universe};
use crate::linalg::{direct_sum as block_sum, identity, kron, phase_diag, unitary_pow, CMat};
use crate::presentation::{evaluate_in, GroupPresentation, PresentationError, Word};
use crate::rational::{determinant, invert, q};
use crate::repvar::{relator_defect, solve_representation, RepError, RepPoint, SolveConfig};

pub use cover::{Affine, CosetStep, CoverError, CrystallographicCover};
pub use expr::{parse_family_expr, ExprError, FamilyContext};

/// Relator defect allowed when verifying sampled points.
pub const FAMILY_TOL: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum FamilyError {
    #[error("invalid parameter space: {0}")]
    Space(String),
    #[error("group mismatch: {0}")]
    GroupMismatch(String),
    #[error("parameter spaces differ")]
    SpaceMismatch,
    #[error("{0}")]
    Invalid(String),
    #[error("point (component {component}, coords {coords:?}) is not in the parameter space")]
    PointOutside { component: usize, coords: Vec<f64> },
    #[error("not a homomorphism at component {component}, coords {coords:?}: defect {defect:.3e}")]
    NotHomomorphic { component: usize, coords: Vec<f64>, defect: f64 },
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Rep(#[from] RepError),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    Presentation(#[from] PresentationError),
}

/// Structured parameter spaces. Torus grids sample `[0,1)^d` at `k/N`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParameterSpace {
    TorusGrid { dim: usize, resolution: usize },
    FinitePointSet { count: usize },
    Product(Box<ParameterSpace>, Box<ParameterSpace>),
    DisjointUnion(Box<ParameterSpace>, Box<ParameterSpace>),
}

/// A connected component: a torus with one resolution per axis (no axes
/// for a point).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub resolutions: Vec<usize>,
}

impl Component {
    pub fn axes(&self) -> usize {
        self.resolutions.len()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ParamPoint {
    pub component: usize,
    pub coords: Vec<f64>,
}

impl ParamPoint {
    pub fn new(component: usize, coords: Vec<f64>) -> Self {
        ParamPoint { component, coords }
    }
}

impl ParameterSpace {
    pub fn torus(dim: usize, resolution: usize) -> Result<Self, FamilyError> {
        let s = ParameterSpace::TorusGrid { dim, resolution };
        s.validate()?;
        Ok(s)
    }

    pub fn points(count: usize) -> Result<Self, FamilyError> {
        let s = ParameterSpace::FinitePointSet { count };
        s.validate()?;
        Ok(s)
    }

    pub fn point() -> Self {
        ParameterSpace::FinitePointSet { count: 1 }
    }

    pub fn product(l: ParameterSpace, r: ParameterSpace) -> Self {
        ParameterSpace::Product(Box::new(l), Box::new(r))
    }

    pub fn disjoint_union(l: ParameterSpace, r: ParameterSpace) -> Self {
        ParameterSpace::DisjointUnion(Box::new(l), Box::new(r))
    }

    pub fn validate(&self) -> Result<(), FamilyError> {
        match self {
            ParameterSpace::TorusGrid { dim, resolution } => {
                if *dim == 0 {
                    return Err(FamilyError::Space("torus dimension must be ≥ 1".into()));
                }
                if *resolution < 2 {
                    return Err(FamilyError::Space(format!("resolution {resolution} < 2")));
                }
                Ok(())
            }
            ParameterSpace::FinitePointSet { count } => {
                if *count == 0 {
                    return Err(FamilyError::Space("point set must be non-empty".into()));
                }
                Ok(())
            }
            ParameterSpace::Product(l, r) | ParameterSpace::DisjointUnion(l, r) => {
                l.validate()?;
                r.validate()
            }
        }
    }

    pub fn components(&self) -> Vec<Component> {
        match self {
            ParameterSpace::TorusGrid { dim, resolution } => vec![Component { resolutions: vec![*resolution; *dim] }],
            ParameterSpace::FinitePointSet { count } => vec![Component { resolutions: vec![] }; *count],
            ParameterSpace::Product(l, r) => {
                let rc = r.components();
                l.components()
                    .into_iter()
                    .flat_map(|a| {
                        rc.iter().map(move |b| Component {
                            resolutions: a.resolutions.iter().chain(&b.resolutions).copied().collect(),
                        })
                    })
                    .collect()
            }
            ParameterSpace::DisjointUnion(l, r) => {
                let mut v = l.components();
                v.extend(r.components());
                v
            }
        }
    }

    pub fn component_count(&self) -> usize {
        match self {
            ParameterSpace::TorusGrid { .. } => 1,
            ParameterSpace::FinitePointSet { count } => *count,
            ParameterSpace::Product(l, r) => l.component_count() * r.component_count(),
            ParameterSpace::DisjointUnion(l, r) => l.component_count() + r.component_count(),
        }
    }

    pub fn contains(&self, p: &ParamPoint) -> bool {
        let comps = self.components();
        comps.get(p.component).is_some_and(|c| {
            c.axes() == p.coords.len() && p.coords.iter().all(|x| x.is_finite() && (0.0..=1.0).contains(x))
        })
    }

    /// Every grid node `k/N` (`k < N`) of every component.
    pub fn sample_points(&self) -> Vec<ParamPoint> {
        let mut out = Vec::new();
        for (ci, c) in self.components().iter().enumerate() {
            let total: usize = c.resolutions.iter().product();
            for mut n in 0..total {
                let mut coords = Vec::with_capacity(c.axes());
                for &r in &c.resolutions {
                    coords.push((n % r) as f64 / r as f64);
                    n /= r;
                }
                out.push(ParamPoint::new(ci, coords));
            }
        }
        out
    }

    fn split_product(l: &ParameterSpace, r: &ParameterSpace, p: &ParamPoint) -> (ParamPoint, ParamPoint) {
        let nr = r.component_count();
        let (i, j) = (p.component / nr, p.component % nr);
        let la = l.components()[i].axes();
        (ParamPoint::new(i, p.coords[..la].to_vec()), ParamPoint::new(j, p.coords[la..].to_vec()))
    }
}

impl fmt::Display for ParameterSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParameterSpace::TorusGrid { dim, resolution } => write!(f, "torus({dim}, {resolution})"),
            ParameterSpace::FinitePointSet { count } => write!(f, "points({count})"),
            ParameterSpace::Product(l, r) => write!(f, "product({l}, {r})"),
            ParameterSpace::DisjointUnion(l, r) => write!(f, "union({l}, {r})"),
        }
    }
}

#[derive(Debug)]
enum Node {
    CharZn,
    Constant { point: RepPoint, label: String },
    Tensor(Family, Family),
    Induce(Family, Arc<CrystallographicCover>),
    Pullback(Family, Arc<CrystallographicCover>),
    Extend(Family, Vec<Option<usize>>),
    Union(Family, Family),
    Sum(Family, Family),
    Restrict { inner: Family, keep: Vec<usize>, full: usize },
}

/// A family of representations of `group` over `space`.
#[derive(Debug, Clone)]
pub struct Family {
    group: GroupPresentation,
    space: ParameterSpace,
    ranks: Vec<usize>,
    chern: Option<Vec<MultiForm>>,
    node: Arc<Node>,
}

/// Outcome of [`Family::verify`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyReport {
    pub points: usize,
    pub max_defect: f64,
    pub max_unitarity_deviation: f64,
}

/// Serialisable description of a family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilySummary {
    pub structure: String,
    pub group: String,
    pub space: String,
    pub ranks: Vec<usize>,
    pub chern: Option<Vec<FormRecord>>,
}

impl Family {
    pub fn group(&self) -> &GroupPresentation {
        &self.group
    }

    pub fn space(&self) -> &ParameterSpace {
        &self.space
    }

    /// Fiber dimension per connected component.
    pub fn ranks(&self) -> &[usize] {
        &self.ranks
    }

    /// Exact Chern character per connected component, when known.
    pub fn chern(&self) -> Option<&[MultiForm]> {
        self.chern.as_deref()
    }

    pub fn component_count(&self) -> usize {
        self.ranks.len()
    }

    /// Symbolic build tree.
    pub fn structure(&self) -> String {
        match &*self.node {
            Node::CharZn => format!("char_zn({})", self.group.rank()),
            Node::Constant { label, .. } => label.clone(),
            Node::Tensor(a, b) => format!("tensor({}, {})", a.structure(), b.structure()),
            Node::Induce(a, c) => format!("induce({}, cover={})", a.structure(), c.name()),
            Node::Pullback(a, c) => format!("pullback({}, cover={})", a.structure(), c.name()),
            Node::Extend(a, _) => format!("extend({})", a.structure()),
            Node::Union(a, b) => format!("union({}, {})", a.structure(), b.structure()),
            Node::Sum(a, b) => format!("sum({}, {})", a.structure(), b.structure()),
            Node::Restrict { inner, keep, .. } => {
                let axes: Vec<String> = keep.iter().map(|k| (k + 1).to_string()).collect();
                format!("restrict({}, [{}])", inner.structure(), axes.join(", "))
            }
        }
    }

    /// Whether the degree-zero part of the Chern data equals the rank on
    /// every component (true when there is no Chern data).
    pub fn chern_rank_consistent(&self) -> bool {
        self.chern.as_ref().is_none_or(|ch| ch.iter().zip(&self.ranks).all(|(c, &r)| c.degree_zero() == q(r as i64)))
    }

    pub fn summary(&self) -> FamilySummary {
        FamilySummary {
            structure: self.structure(),
            group: self.group.to_string(),
            space: self.space.to_string(),
            ranks: self.ranks.clone(),
            chern: self.chern.as_ref().map(|v| v.iter().map(MultiForm::to_record).collect()),
        }
    }

    /// Same family with the group's generators renamed positionally.
    pub fn renamed(&self, names: Vec<String>) -> Result<Family, FamilyError> {
        let mut f = self.clone();
        f.group = self.group.with_generator_names(names)?;
        Ok(f)
    }

    /// Representation at `p`.
    pub fn evaluate(&self, p: &ParamPoint) -> Result<RepPoint, FamilyError> {
        if !self.space.contains(p) {
            return Err(FamilyError::PointOutside { component: p.component, coords: p.coords.clone() });
        }
        Ok(self.eval_unchecked(p))
    }

    fn eval_unchecked(&self, p: &ParamPoint) -> RepPoint {
        let mats = match &*self.node {
            Node::CharZn => p.coords.iter().map(|&x| phase_diag(&[x])).collect(),
            Node::Constant { point, .. } => point.matrices().to_vec(),
            Node::Tensor(a, b) => {
                let (pa, pb) = ParameterSpace::split_product(&a.space, &b.space, p);
                let (ra, rb) = (a.eval_unchecked(&pa), b.eval_unchecked(&pb));
                let (ia, ib) = (identity(ra.dim()), identity(rb.dim()));
                ra.matrices().iter().map(|m| kron(m, &ib)).chain(rb.matrices().iter().map(|m| kron(&ia, m))).collect()
            }
            Node::Induce(a, cover) => {
                let inner = a.eval_unchecked(p);
                let k = inner.dim();
                let n = cover.index();
                cover
                    .steps()
                    .iter()
                    .map(|row| {
                        let mut m = CMat::zeros(n * k, n * k);
                        for (j, step) in row.iter().enumerate() {
                            let block = subgroup_element(inner.matrices(), &step.exponents, k);
                            m.view_mut((step.target * k, j * k), (k, k)).copy_from(&block);
                        }
                        m
                    })
                    .collect()
            }
            Node::Pullback(a, cover) => {
                let inner = a.eval_unchecked(p);
                cover
                    .subgroup_words()
                    .iter()
                    .map(|w| evaluate_in(w, inner.matrices(), inner.dim()).expect("word fits the group"))
                    .collect()
            }
            Node::Extend(a, map) => {
                let inner = a.eval_unchecked(p);
                let id = identity(inner.dim());
                map.iter().map(|m| m.map_or_else(|| id.clone(), |i| inner.matrices()[i].clone())).collect()
            }
            Node::Union(a, b) => {
                let na = a.space.component_count();
                if p.component < na {
                    a.eval_unchecked(p).into_matrices()
                } else {
                    b.eval_unchecked(&ParamPoint::new(p.component - na, p.coords.clone())).into_matrices()
                }
            }
            Node::Sum(a, b) => {
                let (ra, rb) = (a.eval_unchecked(p), b.eval_unchecked(p));
                ra.matrices().iter().zip(rb.matrices()).map(|(x, y)| block_sum(x, y)).collect()
            }
            Node::Restrict { inner, keep, full } => {
                let mut coords = vec![0.0; *full];
                for (i, &k) in keep.iter().enumerate() {
                    coords[k] = p.coords[i];
                }
                inner.eval_unchecked(&ParamPoint::new(0, coords)).into_matrices()
            }
        };
        RepPoint::with_dim(self.ranks[p.component], mats).expect("combinators preserve unitarity and shape")
    }

    /// Checks the homomorphism property at up to `max_points` evenly spaced
    /// sample points (all of them when `max_points` is `None`).
    pub fn verify(&self, tol: f64, max_points: Option<usize>) -> Result<VerifyReport, FamilyError> {
        let all = self.space.sample_points();
        let stride = match max_points {
            Some(m) if m > 0 && all.len() > m => all.len().div_ceil(m),
            _ => 1,
        };
        let mut report = VerifyReport { points: 0, max_defect: 0.0, max_unitarity_deviation: 0.0 };
        for p in all.iter().step_by(stride) {
            let r = self.evaluate(p)?;
            if r.dim() != self.ranks[p.component] {
                return Err(FamilyError::Invalid(format!("rank {} at component {}", r.dim(), p.component)));
            }
            let defect = relator_defect(&r, &self.group)?;
            if defect > tol {
                return Err(FamilyError::NotHomomorphic { component: p.component, coords: p.coords.clone(), defect });
            }
            report.points += 1;
            report.max_defect = report.max_defect.max(defect);
            report.max_unitarity_deviation = report.max_unitarity_deviation.max(r.unitarity_deviation());
        }
        Ok(report)
    }

    /// Closed loop `ρ_x(w)` for `x` running along `axis` of `component`,
    /// other coordinates at 0, sampled at `k/n` for `k = 0..=n`. The last
    /// sample is evaluated at coordinate 1.
    pub fn word_loop(&self, w: &Word, component: usize, axis: usize, n: usize) -> Result<Vec<CMat>, FamilyError> {
        let comps = self.space.components();
        let c = comps.get(component).ok_or(FamilyError::PointOutside { component, coords: vec![] })?;
        if axis >= c.axes() || n == 0 {
            return Err(FamilyError::Invalid(format!("component {component} has no axis {axis}")));
        }
        (0..=n)
            .map(|k| {
                let mut coords = vec![0.0; c.axes()];
                coords[axis] = k as f64 / n as f64;
                let r = self.evaluate(&ParamPoint::new(component, coords))?;
                Ok(evaluate_in(w, r.matrices(), r.dim())?)
            })
            .collect()
    }
}

fn subgroup_element(mats: &[CMat], exponents: &[i64], k: usize) -> CMat {
    exponents.iter().zip(mats).fold(identity(k), |acc, (&e, m)| acc * unitary_pow(m, e))
}


fn same_group(a: &GroupPresentation, b: &GroupPresentation) -> bool {
    a.rank() == b.rank() && a.relators() == b.relators()
}

/// Characters of `ℤⁿ` over the `n`-torus: generator `e_j` acts by
/// `e^{2πi x_j}`. The Chern character is `Π_j (1 + z_j x_j)`.
pub fn character_family_zn(n: usize, resolution: usize) -> Result<Family, FamilyError> {
    let space = ParameterSpace::torus(n, resolution)?;
    let u = Universe::new(n, n);
    let mut ch = MultiForm::one(u);
    for j in 0..n as u32 {
        let t = MultiForm::monomial(u, &[Label::Base(j), Label::Param(j)], q(1))?;
        ch = ch.wedge(&MultiForm::one(u).add(&t)?)?;
    }
    Ok(Family {
        group: GroupPresentation::free_abelian(n),
        space,
        ranks: vec![1],
        chern: Some(vec![ch]),
        node: Arc::new(Node::CharZn),
    })
}

/// The same representation at every parameter. Its Chern character is the
/// rank: flat bundles have vanishing rational Chern classes.
pub fn constant_family(
    group: &GroupPresentation,
    point: RepPoint,
    space: ParameterSpace,
    label: impl Into<String>,
) -> Result<Family, FamilyError> {
    space.validate()?;
    if point.generator_count() != group.rank() {
        return Err(RepError::GeneratorCount { got: point.generator_count(), expected: group.rank() }.into());
    }
    let defect = relator_defect(&point, group)?;
    if defect > FAMILY_TOL {
        return Err(FamilyError::NotHomomorphic { component: 0, coords: vec![], defect });
    }
    let comps = space.components();
    let rank = point.dim();
    let chern = comps
        .iter()
        .map(|c| MultiForm::scalar(Universe::new(group.rank(), c.axes()), q(rank as i64)))
        .collect();
    Ok(Family {
        group: group.clone(),
        space,
        ranks: vec![rank; comps.len()],
        chern: Some(chern),
        node: Arc::new(Node::Constant { point, label: label.into() }),
    })
}

/// Trivial representation of dimension `rank`.
pub fn trivial_family(group: &GroupPresentation, rank: usize, space: ParameterSpace) -> Result<Family, FamilyError> {
    if rank == 0 {
        return Err(RepError::ZeroDimension.into());
    }
    constant_family(group, RepPoint::trivial(group.rank(), rank), space, format!("trivial({rank})"))
}

/// Single-point family at a representation found by the solver.
pub fn solved_family(group: &GroupPresentation, n: usize, cfg: &SolveConfig) -> Result<Family, FamilyError> {
    let point = solve_representation(group, n, cfg)?.into_result()?;
    constant_family(group, point, ParameterSpace::point(), format!("solve({n}, seed={})", cfg.seed))
}

/// Pointwise tensor product, a family for the direct product of the groups
/// over the product of the spaces. Kronecker order is left ⊗ right.
pub fn tensor_families(f: &Family, g: &Family) -> Family {
    let group = f.group.direct_product(&g.group);
    let space = ParameterSpace::product(f.space.clone(), g.space.clone());
    let ranks = f.ranks.iter().flat_map(|a| g.ranks.iter().map(move |b| a * b)).collect();
    let chern = match (&f.chern, &g.chern) {
        (Some(cf), Some(cg)) => {
            let (bf, bg) = (f.group.rank(), g.group.rank());
            let mut out = Vec::with_capacity(cf.len() * cg.len());
            for a in cf {
                for b in cg {
                    let (pa, pb) = (a.universe().param, b.universe().param);
                    let u = Universe::new(bf + bg, pa + pb);
                    let ea = a.embed(u, 0, 0).expect("fits");
                    let eb = b.embed(u, bf, pa).expect("fits");
                    out.push(ea.wedge(&eb).expect("same universe"));
                }
            }
            Some(out)
        }
        _ => None,
    };
    Family { group, space, ranks, chern, node: Arc::new(Node::Tensor(f.clone(), g.clone())) }
}

fn check_subgroup_family(f: &Family, cover: &CrystallographicCover) -> Result<(), FamilyError> {
    let sub = cover.subgroup_presentation();
    if !same_group(&f.group, &sub) {
        return Err(FamilyError::GroupMismatch(format!(
            "family group `{}` is not the free abelian subgroup of rank {} of cover {}",
            f.group,
            cover.dim(),
            cover.name()
        )));
    }
    Ok(())
}

/// Pointwise induction from the translation subgroup of `cover` to its
/// group. Block `(i, j)` of a generator `g` is `ρ(t_i⁻¹ g t_j)` when that
/// element lies in the subgroup and zero otherwise.
///
/// Chern data is propagated for covers of tori (via the transfer, which on
/// a torus cover is the index times the inverse of the pullback) and
/// dropped otherwise.
pub fn induce_family(f: &Family, cover: &CrystallographicCover) -> Result<Family, FamilyError> {
    check_subgroup_family(f, cover)?;
    let n = cover.index();
    let chern = match (&f.chern, cover.translation_matrix()) {
        (Some(ch), Some(b)) => {
            let binv = invert(&b).ok_or_else(|| FamilyError::Invalid("singular translation matrix".into()))?;
            let index = cover::abs_index(&determinant(&b));
            if index != n {
                return Err(FamilyError::Invalid(format!("lattice index {index} but {n} cosets")));
            }
            let d = cover.dim();
            let out = ch
                .iter()
                .map(|c| {
                    let u = Universe::new(d, c.universe().param);
                    Ok(c.substitute_base(u, &binv)?.scale(&q(n as i64)))
                })
                .collect::<Result<Vec<_>, FormError>>()?;
            Some(out)
        }
        _ => None,
    };
    let fam = Family {
        group: cover.group().clone(),
        space: f.space.clone(),
        ranks: f.ranks.iter().map(|r| r * n).collect(),
        chern,
        node: Arc::new(Node::Induce(f.clone(), Arc::new(cover.clone()))),
    };
    Ok(fam)
}

/// Restriction of a family for the cover's group to its translation
/// subgroup, with generator `h_k` acting as subgroup word `k`.
pub fn pullback_family(f: &Family, cover: &CrystallographicCover) -> Result<Family, FamilyError> {
    if !same_group(&f.group, cover.group()) {
        return Err(FamilyError::GroupMismatch(format!(
            "family group `{}` differs from cover group `{}`",
            f.group,
            cover.group()
        )));
    }
    let sub = cover.subgroup_presentation();
    let chern = match (&f.chern, cover.translation_matrix()) {
        (Some(ch), Some(b)) => Some(
            ch.iter()
                .map(|c| c.substitute_base(Universe::new(cover.dim(), c.universe().param), &b))
                .collect::<Result<Vec<_>, _>>()?,
        ),
        _ => None,
    };
    Ok(Family {
        group: sub,
        space: f.space.clone(),
        ranks: f.ranks.clone(),
        chern,
        node: Arc::new(Node::Pullback(f.clone(), Arc::new(cover.clone()))),
    })
}

/// Extends a family for `Γ₁` to `Γ = Γ₁ * Γ₂` by letting the generators of
/// `Γ₂` act trivially. Generators are matched by name.
pub fn extend_free_product(f: &Family, g: &GroupPresentation) -> Result<Family, FamilyError> {
    let mut map = vec![None; g.rank()];
    for (i, name) in f.group.generators().iter().enumerate() {
        let j = g
            .generator_index(name)
            .ok_or_else(|| FamilyError::GroupMismatch(format!("generator `{name}` is missing from the target group")))?;
        map[j] = Some(i);
    }
    for r in g.relators() {
        let ins = r.letters.iter().filter(|l| map[l.gen].is_some()).count();
        if ins != 0 && ins != r.len() {
            return Err(FamilyError::GroupMismatch(format!(
                "relator {} mixes the two free factors",
                r.display(g.generators())
            )));
        }
    }
    let to_target: Vec<usize> =
        (0..f.group.rank()).map(|i| map.iter().position(|m| *m == Some(i)).expect("mapped")).collect();
    for r in f.group.relators() {
        let mapped = r.map_generators(|i| to_target[i]);
        if !g.relators().contains(&mapped) {
            return Err(FamilyError::GroupMismatch(format!(
                "relator {} is not a relator of the target group",
                r.display(f.group.generators())
            )));
        }
    }
    let chern = match &f.chern {
        Some(ch) => Some(
            ch.iter()
                .map(|c| {
                    c.relabel(Universe::new(g.rank(), c.universe().param), |l| match l {
                        Label::Base(i) => Label::Base(to_target[i as usize] as u32),
                        p => p,
                    })
                })
                .collect::<Result<Vec<_>, _>>()?,
        ),
        None => None,
    };
    Ok(Family {
        group: g.clone(),
        space: f.space.clone(),
        ranks: f.ranks.clone(),
        chern,
        node: Arc::new(Node::Extend(f.clone(), map)),
    })
}

/// Family over the disjoint union of the two spaces.
pub fn disjoint_union(f: &Family, g: &Family) -> Result<Family, FamilyError> {
    if !same_group(&f.group, &g.group) {
        return Err(FamilyError::GroupMismatch(format!("`{}` vs `{}`", f.group, g.group)));
    }
    let chern = match (&f.chern, &g.chern) {
        (Some(a), Some(b)) => Some(a.iter().chain(b).cloned().collect()),
        _ => None,
    };
    Ok(Family {
        group: f.group.clone(),
        space: ParameterSpace::disjoint_union(f.space.clone(), g.space.clone()),
        ranks: f.ranks.iter().chain(&g.ranks).copied().collect(),
        chern,
        node: Arc::new(Node::Union(f.clone(), g.clone())),
    })
}

/// Blockwise direct sum over a common space.
pub fn direct_sum(f: &Family, g: &Family) -> Result<Family, FamilyError> {
    if !same_group(&f.group, &g.group) {
        return Err(FamilyError::GroupMismatch(format!("`{}` vs `{}`", f.group, g.group)));
    }
    if f.space != g.space {
        return Err(FamilyError::SpaceMismatch);
    }
    let chern = match (&f.chern, &g.chern) {
        (Some(a), Some(b)) => Some(a.iter().zip(b).map(|(x, y)| x.add(y)).collect::<Result<Vec<_>, _>>()?),
        _ => None,
    };
    Ok(Family {
        group: f.group.clone(),
        space: f.space.clone(),
        ranks: f.ranks.iter().zip(&g.ranks).map(|(a, b)| a + b).collect(),
        chern,
        node: Arc::new(Node::Sum(f.clone(), g.clone())),
    })
}

/// Restriction to the coordinate sub-torus spanned by axes `keep` (in that
/// order), the other coordinates fixed at 0. The family must live on a
/// single torus component and the kept axes must share a resolution.
pub fn restrict_to_subtorus(f: &Family, keep: &[usize]) -> Result<Family, FamilyError> {
    let comps = f.space.components();
    if comps.len() != 1 {
        return Err(FamilyError::Space("restriction needs a connected parameter space".into()));
    }
    let c = &comps[0];
    if keep.is_empty() {
        return Err(FamilyError::Space("keep at least one axis".into()));
    }
    let mut seen = vec![false; c.axes()];
    for &k in keep {
        if k >= c.axes() || std::mem::replace(&mut seen[k], true) {
            return Err(FamilyError::Space(format!("bad axis {k} for a {}-torus", c.axes())));
        }
    }
    let res = c.resolutions[keep[0]];
    if keep.iter().any(|&k| c.resolutions[k] != res) {
        return Err(FamilyError::Space("kept axes have different resolutions".into()));
    }
    let chern = match &f.chern {
        Some(ch) => Some(vec![ch[0].restrict_params(keep)?]),
        None => None,
    };
    Ok(Family {
        group: f.group.clone(),
        space: ParameterSpace::torus(keep.len(), res)?,
        ranks: f.ranks.clone(),
        chern,
        node: Arc::new(Node::Restrict { inner: f.clone(), keep: keep.to_vec(), full: c.axes() }),
    })
}
