//! Rational homology of the supported group classes, the detection pairing
//! between homology classes and families, and related arithmetic checks.
//!
//! The pairing of a homology class with a family is the slant product of
//! the family's Chern character with the class. In the exterior-algebra
//! model this is a right contraction against the class's dual cochain,
//! which leaves a form on the parameter space; its coefficients are the
//! entries of the detection matrix.

mod descriptor;

use std::collections::BTreeMap;

use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::charforms::{winding_number, FormError, Label, MultiForm, WindingError};
use crate::families::{
    induce_family, pullback_family, CoverError, CrystallographicCover, Family, FamilyError, FAMILY_TOL,
};
use crate::presentation::PresentationError;
use crate::rational::{fmt_q, q, Q};
use crate::text::SyntaxError;

pub use descriptor::{
    parse_descriptor, rational_homology, GroupClassDescriptor, HomologyBasis, HomologyClass, SuperTable,
};
pub(crate) use descriptor::{parse_descriptor_lx, subsets};

#[derive(Debug, Error)]
pub enum DetectError {
    #[error("invalid group descriptor: {0}")]
    Descriptor(String),
    #[error("supergroup `{0}` needs a supplied homology table (betti=[..], loops=[..], group=..)")]
    MissingTable(String),
    #[error("class `{0}` has no cochain in the exterior-algebra model; use the numeric pairing")]
    NoCochain(String),
    #[error("family {index} has no exact Chern data; use the numeric pairing path instead")]
    NoChernData { index: usize },
    #[error("family {index} is not a family for this group: {reason}")]
    Incompatible { index: usize, reason: String },
    #[error("unsupported cover `{0}`: only covers of tori by sublattices are supported")]
    UnsupportedCover(String),
    #[error("numeric pairing failed: {0}")]
    Winding(#[from] WindingError),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("syntax error at {0}")]
    Syntax(#[from] SyntaxError),
    #[error(transparent)]
    Presentation(#[from] PresentationError),
    #[error(transparent)]
    Family(#[from] FamilyError),
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error(transparent)]
    Form(#[from] FormError),
}

/// Right contraction of a Chern character on base-times-parameter labels
/// against a homology class, giving a form on the parameter labels alone.
pub fn slant_contract(ch: &MultiForm, class: &HomologyClass) -> Result<MultiForm, DetectError> {
    let cochain = class.cochain.as_ref().ok_or_else(|| DetectError::NoCochain(class.label.clone()))?;
    let base = ch.universe().base as u32;
    if cochain.iter().any(|(m, _)| m.iter().any(|&i| i >= base)) {
        return Err(DetectError::Invalid(format!(
            "class `{}` uses base labels outside a universe of {base}",
            class.label
        )));
    }
    Ok(ch.contract(cochain, None).into_param_form()?)
}

/// How the matrix entries were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Method {
    Exact,
    Numeric { resolution: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Verdict {
    /// Every class pairs nontrivially with some column.
    FdCertified,
    /// The listed classes pair to zero with every column.
    Undetected { classes: Vec<String> },
    /// Some classes could not be decided numerically.
    Incomplete { undetermined: Vec<String>, undetected: Vec<String> },
    /// An obstruction rules detection out.
    Obstructed { reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RowReport {
    pub label: String,
    pub degree: usize,
    /// Exact rationals `p` or `p/q`; `null` where the numeric path cannot
    /// decide the entry.
    pub entries: Vec<Option<String>>,
    pub detected: bool,
}

/// Detection matrix with its verdict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub group: String,
    pub families: Vec<String>,
    pub method: Method,
    pub columns: Vec<String>,
    pub rows: Vec<RowReport>,
    pub verdict: Verdict,
    pub sign_conventions: BTreeMap<String, String>,
    pub scope: String,
    #[serde(skip)]
    values: Vec<Vec<Option<Q>>>,
}

pub const SCOPE: &str = "Certification covers only the structured parameter spaces built by this tool \
(torus grids, finite point sets, and their products and disjoint unions); \
it makes no claim about families over general finite CW complexes.";

pub fn sign_conventions() -> BTreeMap<String, String> {
    let mut m = BTreeMap::new();
    m.insert(
        "ordering".into(),
        "base labels z1 < z2 < ... (one per group generator) precede parameter labels x1 < x2 < ...; \
         monomials are stored sorted and reordering signs are kept"
            .into(),
    );
    m.insert("chern_character".into(), "the character e^{2 pi i x} of Z has Chern character 1 + z1 x1".into());
    m.insert(
        "slant".into(),
        "right contraction: the class's base monomial is moved to the right end, so (1 + z1 x1) / [z1] = -x1".into(),
    );
    m.insert(
        "curvature".into(),
        "reported curvature for axes (a, b) is [D_b, D_a]; the Poincare connection has curvature +2 pi i and \
         c1 = (i / 2 pi) tr F integrates to -1"
            .into(),
    );
    m.insert(
        "numeric_degree_one".into(),
        "numeric entries for degree-one classes are minus the winding number of det rho(loop) along the axis, \
         which matches the exact right contraction"
            .into(),
    );
    m
}

impl DetectionReport {
    pub fn values(&self) -> &[Vec<Option<Q>>] {
        &self.values
    }

    /// Marks the report as obstructed.
    pub fn apply_obstruction(&mut self, o: &BmObstruction) {
        if o.excluded {
            self.verdict = Verdict::Obstructed {
                reason: format!(
                    "H_2 of the finite-index subgroup has rank at least {} (g = {}, f = {})",
                    o.h2_lower_bound, o.g, o.f
                ),
            };
        }
    }

    fn assemble(
        d: &GroupClassDescriptor,
        fams: &[Family],
        basis: &HomologyBasis,
        columns: Vec<String>,
        values: Vec<Vec<Option<Q>>>,
        method: Method,
    ) -> Self {
        let mut rows = Vec::with_capacity(values.len());
        let (mut undetected, mut undetermined) = (Vec::new(), Vec::new());
        for (class, vals) in basis.classes.iter().zip(&values) {
            let detected = vals.iter().any(|v| v.as_ref().is_some_and(|x| !x.is_zero()));
            if !detected {
                if vals.iter().any(Option::is_none) {
                    undetermined.push(class.label.clone());
                } else {
                    undetected.push(class.label.clone());
                }
            }
            rows.push(RowReport {
                label: class.label.clone(),
                degree: class.degree,
                entries: vals.iter().map(|v| v.as_ref().map(fmt_q)).collect(),
                detected,
            });
        }
        let verdict = match (undetermined.is_empty(), undetected.is_empty()) {
            (true, true) => Verdict::FdCertified,
            (true, false) => Verdict::Undetected { classes: undetected },
            _ => Verdict::Incomplete { undetermined, undetected },
        };
        DetectionReport {
            group: d.to_string(),
            families: fams.iter().map(Family::structure).collect(),
            method,
            columns,
            rows,
            verdict,
            sign_conventions: sign_conventions(),
            scope: SCOPE.into(),
            values,
        }
    }
}

/// Parameter monomials of a component with `axes` torus axes, by degree
/// then lexicographically.
fn column_monomials(axes: usize) -> Vec<Vec<u32>> {
    (0..=axes).flat_map(|k| subsets(axes as u32, k)).collect()
}

fn monomial_name(m: &[u32]) -> String {
    if m.is_empty() {
        "1".into()
    } else {
        m.iter().map(|i| format!("x{}", i + 1)).collect::<Vec<_>>().join(" ")
    }
}

fn check_group(d: &GroupClassDescriptor, fams: &[Family]) -> Result<(), DetectError> {
    let g = d.presentation()?;
    for (index, f) in fams.iter().enumerate() {
        if f.group().rank() != g.rank() || f.group().relators() != g.relators() {
            return Err(DetectError::Incompatible {
                index,
                reason: format!("family group `{}` vs descriptor group `{g}`", f.group()),
            });
        }
    }
    Ok(())
}

fn columns_for(fams: &[Family]) -> (Vec<String>, Vec<(usize, usize, Vec<u32>)>) {
    let mut names = Vec::new();
    let mut keys = Vec::new();
    for (fi, f) in fams.iter().enumerate() {
        for (ci, c) in f.space().components().iter().enumerate() {
            for m in column_monomials(c.axes()) {
                names.push(format!("F{}/c{}:{}", fi + 1, ci + 1, monomial_name(&m)));
                keys.push((fi, ci, m));
            }
        }
    }
    (names, keys)
}

/// Exact detection matrix from the families' Chern data. Columns run over
/// families, then components, then parameter monomials, so the columns of
/// a disjoint union are the concatenation of the columns of its parts.
pub fn detection_matrix(d: &GroupClassDescriptor, fams: &[Family]) -> Result<DetectionReport, DetectError> {
    let basis = rational_homology(d)?;
    check_group(d, fams)?;
    for (index, f) in fams.iter().enumerate() {
        if f.chern().is_none() {
            return Err(DetectError::NoChernData { index });
        }
    }
    let (names, keys) = columns_for(fams);
    let mut contracted: BTreeMap<(usize, usize, usize), MultiForm> = BTreeMap::new();
    let mut values = Vec::with_capacity(basis.classes.len());
    for (ri, class) in basis.classes.iter().enumerate() {
        let mut row = Vec::with_capacity(keys.len());
        for (fi, ci, m) in &keys {
            let form = match contracted.get(&(ri, *fi, *ci)) {
                Some(f) => f,
                None => {
                    let ch = &fams[*fi].chern().expect("checked")[*ci];
                    let f = slant_contract(ch, class)?;
                    contracted.entry((ri, *fi, *ci)).or_insert(f)
                }
            };
            let labels: Vec<Label> = m.iter().map(|&i| Label::Param(i)).collect();
            row.push(Some(form.coefficient(&labels)));
        }
        values.push(row);
    }
    Ok(DetectionReport::assemble(d, fams, &basis, names, values, Method::Exact))
}

/// Detection matrix computed from the representations alone.
///
/// Entries with odd total degree vanish, as do positive-degree classes
/// against the constant column (flat bundles have no rational Chern
/// classes) and the point class against positive-degree columns (the
/// bundle is trivial on each parameter slice). The point class against the
/// constant column is the rank, and a degree-one class against a single
/// axis `x_j` is minus the winding number of `det ρ_x(loop)` along that
/// axis, sampled with at least `resolution` steps. Every other entry is
/// left undetermined.
pub fn numeric_detection_matrix(
    d: &GroupClassDescriptor,
    fams: &[Family],
    resolution: usize,
) -> Result<DetectionReport, DetectError> {
    let basis = rational_homology(d)?;
    check_group(d, fams)?;
    let (names, keys) = columns_for(fams);
    let comps: Vec<_> = fams.iter().map(|f| f.space().components()).collect();
    let mut values = Vec::with_capacity(basis.classes.len());
    for class in &basis.classes {
        let mut row = Vec::with_capacity(keys.len());
        for (fi, ci, m) in &keys {
            let total = class.degree + m.len();
            let entry = if total % 2 == 1 {
                Some(Q::zero())
            } else if class.degree == 0 {
                Some(if m.is_empty() { q(fams[*fi].ranks()[*ci] as i64) } else { Q::zero() })
            } else if m.is_empty() {
                Some(Q::zero())
            } else if class.degree == 1 && m.len() == 1 {
                match &class.loop_word {
                    Some(w) => {
                        let axis = m[0] as usize;
                        let n = resolution.max(comps[*fi][*ci].resolutions[axis]);
                        let samples = fams[*fi].word_loop(w, *ci, axis, n)?;
                        Some(q(-winding_number(&samples)?))
                    }
                    None => None,
                }
            } else {
                None
            };
            row.push(entry);
        }
        values.push(row);
    }
    Ok(DetectionReport::assemble(d, fams, &basis, names, values, Method::Numeric { resolution }))
}

/// Result of [`transfer_scaling_check`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TransferCheck {
    pub cover: String,
    pub index: usize,
    /// Exact detection matrix of the induced family equals the index times
    /// that of the original family.
    pub scaled_exactly: bool,
    pub ranks_scale: bool,
    pub homomorphism: bool,
    /// The numeric pairing of the induced family is the index times that of
    /// the original family, and both agree with the exact matrices.
    pub numeric_agrees: bool,
    pub passed: bool,
}

/// Pulls `f` (a family for the cover's group) back to the finite-index
/// subgroup, induces it up again and checks that every detection-matrix
/// entry is multiplied by exactly the index.
pub fn transfer_scaling_check(
    f: &Family,
    cover: &CrystallographicCover,
    resolution: usize,
) -> Result<TransferCheck, DetectError> {
    if cover.translation_matrix().is_none() {
        return Err(DetectError::UnsupportedCover(cover.name().into()));
    }
    let d = GroupClassDescriptor::FreeAbelian(cover.dim());
    let index = cover.index();
    let pulled = pullback_family(f, cover)?;
    let induced = induce_family(&pulled, cover)?;
    let scale = q(index as i64);
    let scaled = |a: &DetectionReport, b: &DetectionReport| {
        a.values().len() == b.values().len()
            && a.values().iter().zip(b.values()).all(|(ra, rb)| {
                ra.len() == rb.len()
                    && ra.iter().zip(rb).all(|(x, y)| match (x, y) {
                        (Some(x), Some(y)) => *x == &scale * y,
                        (None, None) => true,
                        _ => false,
                    })
            })
    };
    let agrees = |num: &DetectionReport, exact: &DetectionReport| {
        num.values().iter().zip(exact.values()).all(|(rn, re)| {
            rn.iter().zip(re).all(|(x, y)| match (x, y) {
                (Some(x), Some(y)) => x == y,
                _ => true,
            })
        })
    };
    let exact_f = detection_matrix(&d, std::slice::from_ref(f))?;
    let exact_i = detection_matrix(&d, std::slice::from_ref(&induced))?;
    let num_f = numeric_detection_matrix(&d, std::slice::from_ref(f), resolution)?;
    let num_i = numeric_detection_matrix(&d, std::slice::from_ref(&induced), resolution)?;
    let scaled_exactly = scaled(&exact_i, &exact_f);
    let ranks_scale = induced.ranks().iter().zip(f.ranks()).all(|(a, b)| *a == index * b);
    let homomorphism = induced.verify(FAMILY_TOL, Some(512)).is_ok();
    let numeric_agrees = scaled(&num_i, &num_f) && agrees(&num_f, &exact_f) && agrees(&num_i, &exact_i);
    Ok(TransferCheck {
        cover: cover.name().into(),
        index,
        scaled_exactly,
        ranks_scale,
        homomorphism,
        numeric_agrees,
        passed: scaled_exactly && ranks_scale && homomorphism && numeric_agrees,
    })
}

/// Euler-characteristic bound for a finite-index subgroup `G` of index
/// `index` in a free group of rank `f`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BmObstruction {
    pub f: u64,
    pub index: u64,
    /// Rank of the free group `G`: `index·(f − 1) + 1`.
    pub g: u64,
    /// Lower bound `max(0, g − 2f)` for the kernel of a map `ℚ^g → ℚ^{2f}`.
    pub h2_lower_bound: u64,
    /// Whether the bound is positive. When it is zero the test is
    /// inconclusive.
    pub excluded: bool,
}

pub fn bm_obstruction(f: u64, index: u64) -> Result<BmObstruction, DetectError> {
    if f < 2 || index < 2 {
        return Err(DetectError::Invalid(format!("need f ≥ 2 and index ≥ 2 (got f = {f}, index = {index})")));
    }
    let g = index
        .checked_mul(f - 1)
        .and_then(|x| x.checked_add(1))
        .ok_or_else(|| DetectError::Invalid("g overflows".into()))?;
    let two_f = f.checked_mul(2).ok_or_else(|| DetectError::Invalid("2f overflows".into()))?;
    let h2_lower_bound = g.saturating_sub(two_f);
    Ok(BmObstruction { f, index, g, h2_lower_bound, excluded: h2_lower_bound > 0 })
}

/// Betti-number comparison between `Hom(F_m, U(n)) = U(n)^m` and the wedge
/// of `m` circles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BettiCheck {
    pub m: u32,
    pub n: u32,
    /// Coefficients of the Poincaré polynomial of `U(n)^m`.
    pub poincare: Vec<u128>,
    pub lhs: u128,
    pub rhs: u128,
    pub lhs_even: u128,
    pub lhs_odd: u128,
    pub rhs_even: u128,
    pub rhs_odd: u128,
    pub holds: bool,
}

pub fn betti_inequality_check(m: u32, n: u32) -> Result<BettiCheck, DetectError> {
    if m == 0 || n == 0 {
        return Err(DetectError::Invalid("m and n must be ≥ 1".into()));
    }
    let overflow = || DetectError::Invalid("Betti sum overflows 128 bits".into());
    if u64::from(m) * u64::from(n) >= 127 {
        return Err(overflow());
    }
    let mul = |a: &[u128], b: &[u128]| -> Vec<u128> {
        let mut out = vec![0u128; a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    };
    let mut un = vec![1u128];
    for i in 1..=n as usize {
        let mut f = vec![0u128; 2 * i];
        f[0] = 1;
        f[2 * i - 1] = 1;
        un = mul(&un, &f);
    }
    let mut p = vec![1u128];
    for _ in 0..m {
        p = mul(&p, &un);
    }
    let lhs: u128 = p.iter().sum();
    let lhs_even: u128 = p.iter().step_by(2).sum();
    let rhs = 1 + u128::from(m);
    Ok(BettiCheck {
        m,
        n,
        lhs,
        rhs,
        lhs_even,
        lhs_odd: lhs - lhs_even,
        rhs_even: 1,
        rhs_odd: u128::from(m),
        holds: lhs >= rhs,
        poincare: p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charforms::Universe;
    use crate::families::{
        character_family_zn, disjoint_union, extend_free_product, trivial_family, ParameterSpace,
    };
    use crate::presentation::GroupPresentation;
    use num_traits::Signed;

    fn is_unit(x: &Q) -> bool {
        x.abs() == q(1)
    }

    fn form(s: &str, b: usize, p: usize) -> MultiForm {
        MultiForm::parse(s, Universe::new(b, p)).unwrap()
    }

    fn class(label: &str, degree: usize, cochain: Vec<(Vec<u32>, Q)>) -> HomologyClass {
        HomologyClass { label: label.into(), degree, cochain: Some(cochain), loop_word: None }
    }

    #[test]
    fn slant_examples() {
        let ch = form("1 + z1 x1", 1, 1);
        let pt = class("pt", 0, vec![(vec![], q(1))]);
        let z = class("[z]", 1, vec![(vec![0], q(1))]);
        assert_eq!(slant_contract(&ch, &pt).unwrap(), form("1", 0, 1));
        assert_eq!(slant_contract(&ch, &z).unwrap(), form("-x1", 0, 1));
        assert!(slant_contract(&form("1", 1, 1), &z).unwrap().is_zero());
        let far = class("[z3]", 1, vec![(vec![2], q(1))]);
        assert!(slant_contract(&ch, &far).is_err());
    }

    #[test]
    fn zn_detection_is_a_signed_permutation() {
        for n in 1..=3 {
            let f = character_family_zn(n, 4).unwrap();
            let r = detection_matrix(&GroupClassDescriptor::FreeAbelian(n), &[f]).unwrap();
            assert_eq!(r.verdict, Verdict::FdCertified);
            let v = r.values();
            assert_eq!(v.len(), 1 << n);
            for row in v {
                assert_eq!(row.len(), 1 << n);
                assert_eq!(row.iter().filter(|x| !x.as_ref().unwrap().is_zero()).count(), 1);
                assert!(row.iter().flatten().all(|x| x.is_zero() || is_unit(x)));
            }
        }
    }

    #[test]
    fn free_group_detection() {
        let f2 = GroupPresentation::free_rank(2);
        let c = character_family_zn(1, 8).unwrap();
        let a = extend_free_product(&c.renamed(vec!["g1".into()]).unwrap(), &f2).unwrap();
        let b = extend_free_product(&c.renamed(vec!["g2".into()]).unwrap(), &f2).unwrap();
        let u = disjoint_union(&a, &b).unwrap();
        let d = GroupClassDescriptor::Free(2);
        let r = detection_matrix(&d, std::slice::from_ref(&u)).unwrap();
        assert_eq!(r.verdict, Verdict::FdCertified);
        // columns: c1:1, c1:x1, c2:1, c2:x1
        assert_eq!(r.values()[1], vec![Some(q(0)), Some(q(-1)), Some(q(0)), Some(q(0))]);
        assert_eq!(r.values()[2], vec![Some(q(0)), Some(q(0)), Some(q(0)), Some(q(-1))]);
        let num = numeric_detection_matrix(&d, &[u], 32).unwrap();
        assert_eq!(num.values(), r.values());
    }

    #[test]
    fn trivial_family_detects_only_the_point() {
        let d = GroupClassDescriptor::SurfaceClosed(2);
        let t = trivial_family(&d.presentation().unwrap(), 1, ParameterSpace::point()).unwrap();
        let r = detection_matrix(&d, &[t]).unwrap();
        let detected: Vec<bool> = r.rows.iter().map(|row| row.detected).collect();
        assert_eq!(detected, vec![true, false, false, false, false, false]);
        assert!(matches!(r.verdict, Verdict::Undetected { ref classes } if classes.len() == 5));
    }

    #[test]
    fn incompatible_or_numeric_only_families_are_rejected() {
        let f = character_family_zn(2, 4).unwrap();
        assert!(matches!(
            detection_matrix(&GroupClassDescriptor::Free(2), &[f]),
            Err(DetectError::Incompatible { .. })
        ));
        let klein = CrystallographicCover::klein();
        let g = character_family_zn(2, 4).unwrap();
        let ind = induce_family(&g, &klein).unwrap();
        let d = parse_descriptor("super(zn(2), 2, klein, betti=[1,1], loops=[b], group=klein)").unwrap();
        assert!(matches!(detection_matrix(&d, std::slice::from_ref(&ind)), Err(DetectError::NoChernData { index: 0 })));
        let r = numeric_detection_matrix(&d, &[ind], 32).unwrap();
        assert_eq!(r.verdict, Verdict::FdCertified);
        // the class of b against x2
        assert_eq!(r.values()[1], vec![Some(q(0)), Some(q(0)), Some(q(-1)), Some(q(0))]);
    }

    #[test]
    fn transfer_scaling_on_circle_and_rejects_klein() {
        let f = character_family_zn(1, 16).unwrap();
        for k in [1, 2, 3] {
            let c = CrystallographicCover::circle(k).unwrap();
            let t = transfer_scaling_check(&f, &c, 64).unwrap();
            assert!(t.passed, "{t:?}");
        }
        let g = trivial_family(CrystallographicCover::klein().group(), 1, ParameterSpace::point()).unwrap();
        assert!(matches!(
            transfer_scaling_check(&g, &CrystallographicCover::klein(), 8),
            Err(DetectError::UnsupportedCover(_))
        ));
    }

    #[test]
    fn obstruction_examples() {
        let o = bm_obstruction(2, 10).unwrap();
        assert_eq!((o.g, o.h2_lower_bound, o.excluded), (11, 7, true));
        let o = bm_obstruction(2, 2).unwrap();
        assert_eq!((o.g, o.h2_lower_bound, o.excluded), (3, 0, false));
        let o = bm_obstruction(3, 4).unwrap();
        assert_eq!((o.g, o.h2_lower_bound, o.excluded), (9, 3, true));
        assert!(bm_obstruction(1, 4).is_err());
    }

    #[test]
    fn betti_examples() {
        let b = betti_inequality_check(1, 1).unwrap();
        assert_eq!((b.lhs, b.rhs, b.holds), (2, 2, true));
        let b = betti_inequality_check(2, 1).unwrap();
        assert_eq!((b.lhs, b.rhs), (4, 3));
        assert_eq!(b.poincare, vec![1, 2, 1]);
        let b = betti_inequality_check(2, 2).unwrap();
        assert_eq!((b.lhs, b.rhs, b.lhs_even, b.lhs_odd), (16, 3, 8, 8));
        assert!(betti_inequality_check(0, 1).is_err());
    }

    #[test]
    fn report_serialises_rationals_as_strings() {
        let f = character_family_zn(1, 4).unwrap();
        let r = detection_matrix(&GroupClassDescriptor::FreeAbelian(1), &[f]).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        assert_eq!(json["rows"][1]["entries"][1], "-1");
        assert_eq!(json["verdict"]["kind"], "fd_certified");
        assert_eq!(json["method"]["kind"], "exact");
        assert!(json["scope"].as_str().unwrap().contains("structured parameter spaces"));
    }
}
