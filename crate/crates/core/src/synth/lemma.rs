//! Width bounds for `Q` on products of width-1 factors, checked by brute
//! force and by replaying the uniqueness argument line by line.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{oplus, KTables, PStarIndex, SynthesisError};
use crate::algebra::{IndexSet, MTuple, Point, PointFn};
use crate::ideal::{factorial, width, IdealKind, IdealVerdict};

/// One factor per coordinate index and one per `(S,j)` slot.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FactorFamily {
    pub coords: BTreeMap<usize, BTreeSet<Point>>,
    /// Aligned with the slot order of the `PStarIndex`.
    pub slots: Vec<BTreeSet<Point>>,
}

impl FactorFamily {
    pub fn empty(pstar: &PStarIndex) -> Self {
        FactorFamily {
            coords: pstar.coords().iter().map(|i| (i, BTreeSet::new())).collect(),
            slots: vec![BTreeSet::new(); pstar.len()],
        }
    }

    /// The factor for argument index `i` of `Q`.
    pub fn factor(&self, pstar: &PStarIndex, i: usize) -> Option<&BTreeSet<Point>> {
        match pstar.slot_position(i) {
            Some(t) => self.slots.get(t),
            None => self.coords.get(&i),
        }
    }

    pub fn widest(&self) -> usize {
        self.coords
            .values()
            .chain(&self.slots)
            .map(|b| width(b).width)
            .max()
            .unwrap_or(0)
    }

    /// The entries of `Q` whose arguments all lie in their factors.
    pub fn restrict<'a>(
        &'a self,
        pstar: &'a PStarIndex,
        q_big: &'a PointFn,
    ) -> impl Iterator<Item = (&'a MTuple, &'a Point)> + 'a {
        q_big.iter().filter(move |(w, _)| {
            w.iter()
                .all(|(i, p)| self.factor(pstar, i).is_some_and(|b| b.contains(&p)))
        })
    }
}

/// Adds `(0|n)` for every needed line `n` that `b` misses.
pub fn complete_width1(b: &BTreeSet<Point>, lines: &BTreeSet<u64>) -> Result<BTreeSet<Point>, SynthesisError> {
    let found = width(b).width;
    if found > 1 {
        return Err(SynthesisError::FactorWidth { width: found });
    }
    let met: BTreeSet<u64> = b.iter().map(|p| p.line()).collect();
    let mut out = b.clone();
    out.extend(lines.iter().filter(|n| !met.contains(n)).map(|&n| Point::new(0, n)));
    Ok(out)
}

/// Completes slot factors on every line named in a K-table and coordinate
/// factors on every column read off a slot factor.
pub fn complete_family(family: &FactorFamily, k_tables: &KTables) -> Result<FactorFamily, SynthesisError> {
    let k_values: BTreeSet<u64> = k_tables.values().flat_map(|t| t.values().copied()).collect();
    let slots = family
        .slots
        .iter()
        .map(|b| complete_width1(b, &k_values))
        .collect::<Result<Vec<_>, _>>()?;
    let columns: BTreeSet<u64> = slots.iter().flatten().map(|p| p.x).collect();
    let coords = family
        .coords
        .iter()
        .map(|(&i, b)| Ok((i, complete_width1(b, &columns)?)))
        .collect::<Result<BTreeMap<_, _>, SynthesisError>>()?;
    Ok(FactorFamily { coords, slots })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MainLemmaReport {
    pub image_size: usize,
    pub image_width: usize,
    pub bound: usize,
    pub pass: bool,
}

/// Brute-force width of `Q[A]` for a family of width-1 factors.
pub fn verify_main_lemma(
    q_big: &PointFn,
    pstar: &PStarIndex,
    family: &FactorFamily,
) -> Result<MainLemmaReport, SynthesisError> {
    let widest = family.widest();
    if widest > 1 {
        return Err(SynthesisError::FactorWidth { width: widest });
    }
    let image: BTreeSet<Point> = family.restrict(pstar, q_big).map(|(_, v)| *v).collect();
    let image_width = width(&image).width;
    let bound = factorial(pstar.m());
    Ok(MainLemmaReport {
        image_size: image.len(),
        image_width,
        bound,
        pass: image_width <= bound,
    })
}

/// One round of the recursion: `k_j`, `b_j = A_{S_j,π(j)}⟨k_j⟩`,
/// `a_j = A_{π(j)}⟨b_j⟩`, together with the values a qualifying tuple is
/// forced to produce on the way.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainStep {
    pub index: usize,
    pub subset: IndexSet,
    pub k: u64,
    pub b: u64,
    pub a: u64,
    /// `h^{S_j,π(j)}(u) = (0|k⊕b)`, when `b < k`.
    pub h_value: Option<Point>,
    /// `f(h(u)) = v_{S_j,π(j)} = (b|k)`.
    pub f_value: Point,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LemmaCertificate {
    pub line: u64,
    pub permutation: Vec<usize>,
    pub steps: Vec<ChainStep>,
    /// `c^m`, when every step found its K entry.
    pub candidate: Option<MTuple>,
    pub qualifying: usize,
    pub pass: bool,
}

fn select(factor: &BTreeSet<Point>, line: u64, name: String) -> Result<u64, SynthesisError> {
    factor
        .iter()
        .find(|p| p.line() == line)
        .map(|p| p.x)
        .ok_or(SynthesisError::IncompleteLine { factor: name, line })
}

/// Replays the uniqueness argument for line `n` under the ordering `π` of
/// the coordinates, then checks every qualifying entry against the
/// candidate it produces.
pub fn main_lemma_certify(
    q_big: &PointFn,
    pstar: &PStarIndex,
    k_tables: &KTables,
    family: &FactorFamily,
    line: u64,
    permutation: &[usize],
) -> Result<LemmaCertificate, SynthesisError> {
    let mut c = MTuple::empty();
    let mut steps = Vec::new();
    let mut complete = true;
    for (pos, &idx) in permutation.iter().enumerate() {
        let subset: IndexSet = permutation[..pos].iter().copied().collect();
        let Some(k) = k_tables
            .get(&(subset.clone(), c.clone()))
            .and_then(|t| t.get(&line))
            .copied()
        else {
            complete = false;
            break;
        };
        let t = pstar.position(&subset, idx).expect("pair of the enumeration");
        let b = select(&family.slots[t], k, format!("A_{subset},{idx}"))?;
        let a = select(&family.coords[&idx], b, format!("A_{idx}"))?;
        let h_value = (b < k)
            .then(|| oplus(k, b).map(|code| Point::new(0, code)))
            .transpose()?;
        steps.push(ChainStep {
            index: idx,
            subset,
            k,
            b,
            a,
            h_value,
            f_value: Point::new(b, k),
        });
        c = c.union(&MTuple::from_iter([(idx, Point::new(a, b))]))?;
    }
    let candidate = complete.then_some(c);

    let coords = pstar.coords();
    let mut qualifying = 0;
    let mut pass = true;
    for (w, v) in family.restrict(pstar, q_big) {
        if v.line() != line {
            continue;
        }
        let u = w.restrict(coords);
        let ordered = permutation
            .windows(2)
            .all(|p| u.get(p[0]).map(|a| a.y) <= u.get(p[1]).map(|b| b.y));
        if ordered {
            qualifying += 1;
            pass &= candidate.as_ref() == Some(&u);
        }
    }
    Ok(LemmaCertificate {
        line,
        permutation: permutation.to_vec(),
        steps,
        candidate,
        qualifying,
        pass,
    })
}

/// All orderings of `items`, lexicographically.
pub fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

/// Runs [`main_lemma_certify`] for every line met by `Q[A]` and every
/// ordering of the coordinates.
pub fn certify_all_lines(
    q_big: &PointFn,
    pstar: &PStarIndex,
    k_tables: &KTables,
    family: &FactorFamily,
) -> Result<Vec<LemmaCertificate>, SynthesisError> {
    let lines: BTreeSet<u64> = family.restrict(pstar, q_big).map(|(_, v)| v.line()).collect();
    let coords: Vec<usize> = pstar.coords().iter().collect();
    let perms = permutations(&coords);
    let mut out = Vec::with_capacity(lines.len() * perms.len());
    for &n in &lines {
        for pi in &perms {
            out.push(main_lemma_certify(q_big, pstar, k_tables, family, n, pi)?);
        }
    }
    Ok(out)
}

/// Image widths of `Q` on products of factors of width at most `w`,
/// against `w^{|R|}·m!` where `R` ranges over all argument positions of `Q`.
pub fn verify_q_in_ci(q_big: &PointFn, pstar: &PStarIndex, products: &[FactorFamily], w: usize) -> IdealVerdict {
    let positions = (pstar.m() + pstar.len()) as u32;
    let bound = (w.max(1) as u64)
        .saturating_pow(positions)
        .saturating_mul(factorial(pstar.m()) as u64);
    let bound = usize::try_from(bound).unwrap_or(usize::MAX);
    let mut test_family = Vec::with_capacity(products.len());
    let mut image_widths = Vec::with_capacity(products.len());
    let mut pass = true;
    for family in products {
        let entries: Vec<(&MTuple, &Point)> = family.restrict(pstar, q_big).collect();
        let image: Vec<Point> = entries.iter().map(|(_, v)| **v).collect();
        let found = width(&image).width;
        pass &= family.widest() <= w && found <= bound;
        test_family.push((entries.len(), family.widest()));
        image_widths.push(found);
    }
    IdealVerdict {
        kind: IdealKind::CiFragment,
        test_family,
        image_widths,
        bound_claimed: bound,
        pass,
    }
}
