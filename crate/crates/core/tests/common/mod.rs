//! Shared helpers for the integration tests: seeded generators of
//! structured families and small independent oracles.
#![allow(dead_code)]

use std::collections::BTreeMap;

use flatrep::families::{
    character_family_zn, direct_sum, disjoint_union, induce_family, pullback_family, tensor_families, trivial_family,
    CrystallographicCover,
};
use flatrep::rational::Q;
use flatrep::{Family, GroupPresentation, Label, MultiForm, ParameterSpace};
use num_traits::Zero;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const RES: usize = 4;

fn random_cover(rng: &mut ChaCha8Rng, n: usize) -> CrystallographicCover {
    let factors: Vec<usize> = (0..n).map(|_| rng.random_range(1..=3)).collect();
    CrystallographicCover::sublattice(&factors).unwrap()
}

/// A family for `ℤⁿ` carrying exact Chern data. Connected families live on
/// a single torus component.
pub fn random_zn_family(rng: &mut ChaCha8Rng, n: usize, connected: bool) -> Family {
    let chi = character_family_zn(n, RES).unwrap();
    let zn = GroupPresentation::free_abelian(n);
    let kinds = if connected { 6 } else { 8 };
    match rng.random_range(0..kinds) {
        0 => chi,
        1 => {
            let t = trivial_family(&zn, rng.random_range(1..=2), ParameterSpace::torus(n, RES).unwrap()).unwrap();
            direct_sum(&chi, &t).unwrap()
        }
        2 => {
            let c = random_cover(rng, n);
            induce_family(&pullback_family(&chi, &c).unwrap(), &c).unwrap()
        }
        3 => {
            let c = random_cover(rng, n);
            pullback_family(&chi, &c).unwrap()
        }
        4 => {
            let c = random_cover(rng, n);
            induce_family(&chi, &c).unwrap()
        }
        5 => {
            if n == 2 {
                let one = character_family_zn(1, RES).unwrap();
                tensor_families(&one, &one)
            } else {
                trivial_family(&zn, rng.random_range(1..=3), ParameterSpace::torus(n, RES).unwrap()).unwrap()
            }
        }
        6 => trivial_family(&zn, rng.random_range(1..=3), ParameterSpace::points(rng.random_range(1..=3)).unwrap())
            .unwrap(),
        _ => {
            let c = random_cover(rng, n);
            disjoint_union(&chi, &induce_family(&chi, &c).unwrap()).unwrap()
        }
    }
}

/// A label as `(is_param, index)` so that the derived order puts base
/// labels first.
pub type Key = Vec<(bool, u32)>;

pub fn key_of(ls: &[Label]) -> Key {
    ls.iter().map(|l| (!l.is_base(), l.index())).collect()
}

pub fn terms_of(f: &MultiForm) -> BTreeMap<Key, Q> {
    f.terms().filter(|(_, c)| !c.is_zero()).map(|(ls, c)| (key_of(ls), c.clone())).collect()
}

/// Sign of the permutation sorting `seq`, by counting inversions; `None`
/// when a label repeats.
pub fn inversion_sign(seq: &[(bool, u32)]) -> Option<i32> {
    let mut inversions = 0;
    for i in 0..seq.len() {
        for j in i + 1..seq.len() {
            if seq[i] == seq[j] {
                return None;
            }
            if seq[i] > seq[j] {
                inversions += 1;
            }
        }
    }
    Some(if inversions % 2 == 0 { 1 } else { -1 })
}

/// External product of two forms by brute-force expansion: labels of `b`
/// are shifted past those of `a`, every pair of terms is concatenated and
/// sorted by inversion counting.
pub fn external_product(a: &MultiForm, b: &MultiForm) -> BTreeMap<Key, Q> {
    let (ba, pa) = (a.universe().base as u32, a.universe().param as u32);
    let mut out: BTreeMap<Key, Q> = BTreeMap::new();
    for (ka, ca) in terms_of(a) {
        for (kb, cb) in terms_of(b) {
            let mut seq = ka.clone();
            seq.extend(kb.iter().map(|&(p, i)| (p, if p { i + pa } else { i + ba })));
            let Some(sign) = inversion_sign(&seq) else { continue };
            seq.sort();
            let c = &ca * &cb;
            *out.entry(seq).or_insert_with(Q::zero) += if sign < 0 { -c } else { c };
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

/// Parameter monomial of a detection-matrix column name such as
/// `F1/c2:x1 x3`.
pub fn column_monomial(name: &str) -> Vec<u32> {
    let m = name.rsplit(':').next().unwrap();
    if m == "1" {
        return vec![];
    }
    m.split(' ').map(|s| s[1..].parse::<u32>().unwrap() - 1).collect()
}

/// Component index (0-based) of a column name.
pub fn column_component(name: &str) -> usize {
    let c = name.split('/').nth(1).unwrap();
    c[1..c.find(':').unwrap()].parse::<usize>().unwrap() - 1
}

/// Winding number of `det u(t)` by accumulating principal argument steps
/// over a fine sampling of `[0, 1]`.
pub fn det_winding_bruteforce(n: usize, u: impl Fn(f64) -> flatrep::CMat) -> i64 {
    let mut total = 0.0;
    let mut prev = u(0.0).determinant();
    for k in 1..=n {
        let d = u(k as f64 / n as f64).determinant();
        total += (d / prev).arg();
        prev = d;
    }
    (total / (2.0 * std::f64::consts::PI)).round() as i64
}
