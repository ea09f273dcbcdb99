//! Finite-fragment analogues of width, boundedness, thriftiness and the
//! line-bound table `K_t`.
//!
//! Unboundedness has no finite witness, so every thriftiness judgement is
//! made against an explicit threshold `θ`: a preimage whose least bound `k`
//! exceeds `θ` counts as wasteful. The threshold is recorded in every report.

mod certificate;

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{fibers, AlgebraError, IndexSet, MTuple, PartialFn, Point, PointFn, Value};
use crate::serde_util::pairs;

pub(crate) use certificate::factorial;
pub use certificate::{CertificateFailure, CiCertificate};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IdealError {
    #[error("tuples over mixed index sets: {0} and {1}")]
    MixedIndexSets(IndexSet, IndexSet),
    #[error("not thrifty at θ={theta}: preimage of {value} needs bound {bound}")]
    NotThrifty { value: String, bound: u64, theta: u64 },
    #[error("test tuple {tuple} lies outside the domain")]
    TestSetOutsideDomain { tuple: MTuple },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WidthCertificate {
    pub width: usize,
    /// A line attaining the width; `None` for the empty set.
    pub witness_line: Option<u64>,
    pub per_line_counts: BTreeMap<u64, usize>,
}

/// Width of a finite point set: the largest number of its points on one line.
pub fn width<'a, I>(points: I) -> WidthCertificate
where
    I: IntoIterator<Item = &'a Point>,
{
    let distinct: BTreeSet<&Point> = points.into_iter().collect();
    let mut per_line_counts: BTreeMap<u64, usize> = BTreeMap::new();
    for p in distinct {
        *per_line_counts.entry(p.line()).or_default() += 1;
    }
    let mut best: Option<(u64, usize)> = None;
    for (&line, &count) in &per_line_counts {
        if best.is_none_or(|(_, c)| count > c) {
            best = Some((line, count));
        }
    }
    WidthCertificate {
        width: best.map_or(0, |(_, c)| c),
        witness_line: best.map(|(l, _)| l),
        per_line_counts,
    }
}

fn common_index<'a, I>(tuples: I) -> Result<Option<IndexSet>, IdealError>
where
    I: IntoIterator<Item = &'a MTuple>,
{
    let mut index: Option<IndexSet> = None;
    for u in tuples {
        match &index {
            None => index = Some(u.index_set()),
            Some(i) if !u.has_index_set(i) => return Err(IdealError::MixedIndexSets(i.clone(), u.index_set())),
            Some(_) => {}
        }
    }
    Ok(index)
}

/// Width of a set of tuples: the largest width among its coordinate
/// projections.
pub fn tuple_set_width<'a, I>(tuples: I) -> Result<usize, IdealError>
where
    I: IntoIterator<Item = &'a MTuple> + Clone,
{
    let Some(index) = common_index(tuples.clone())? else {
        return Ok(0);
    };
    Ok(index
        .iter()
        .map(|i| {
            let projection: Vec<Point> = tuples.clone().into_iter().filter_map(|u| u.get(i)).collect();
            width(&projection).width
        })
        .max()
        .unwrap_or(0))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct BoundCertificate {
    /// Least `k` with the set contained in `B^M_k`.
    pub k: u64,
}

/// Bound contributed by one tuple: `1 + min_i u_i^y`. The empty tuple has no
/// component to fall below any bound; it is treated as bounded by 0.
fn tuple_bound(u: &MTuple) -> u64 {
    u.min_y().map_or(0, |y| y + 1)
}

fn bound_unchecked<'a, I>(tuples: I) -> u64
where
    I: IntoIterator<Item = &'a MTuple>,
{
    tuples.into_iter().map(tuple_bound).max().unwrap_or(0)
}

/// Least `k` such that every tuple has a component with y-coordinate `< k`.
pub fn least_bound<'a, I>(tuples: I) -> Result<BoundCertificate, IdealError>
where
    I: IntoIterator<Item = &'a MTuple> + Clone,
{
    common_index(tuples.clone())?;
    Ok(BoundCertificate {
        k: bound_unchecked(tuples),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValueVerdict {
    pub bound: u64,
    pub thrifty: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound(serialize = "V: Value", deserialize = "V: Value"))]
pub struct ThriftyFailure<V> {
    pub subset: IndexSet,
    pub key: MTuple,
    pub value: V,
    pub bound: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound(serialize = "V: Value", deserialize = "V: Value"))]
pub struct FiberReport<V> {
    pub subset: IndexSet,
    pub key: MTuple,
    pub report: ThriftyReport<V>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(bound(serialize = "V: Value", deserialize = "V: Value"))]
pub struct ThriftyReport<V> {
    pub theta: u64,
    #[serde(with = "pairs")]
    pub per_value: BTreeMap<V, ValueVerdict>,
    /// Per-fiber reports, present when hereditary checking was requested.
    pub hereditary: Option<Vec<FiberReport<V>>>,
    pub failure: Option<ThriftyFailure<V>>,
}

impl<V: Value> ThriftyReport<V> {
    pub fn is_thrifty(&self) -> bool {
        self.failure.is_none() && self.per_value.values().all(|v| v.thrifty)
    }

    pub fn wasteful_values(&self) -> impl Iterator<Item = &V> + '_ {
        self.per_value.iter().filter(|(_, v)| !v.thrifty).map(|(d, _)| d)
    }

    /// Splits `p` into `(p↾T_p, p↾W_p)`.
    pub fn split(&self, p: &PartialFn<V>) -> (PartialFn<V>, PartialFn<V>) {
        let thrifty = |v: &V| self.per_value.get(v).is_none_or(|verdict| verdict.thrifty);
        (p.restrict(|_, v| thrifty(v)), p.restrict(|_, v| !thrifty(v)))
    }
}

/// Computes the least bound of every value preimage and classifies it as
/// thrifty (`k ≤ θ`) or wasteful.
pub fn classify_preimages<V: Value>(p: &PartialFn<V>, theta: u64) -> ThriftyReport<V> {
    let per_value = p
        .preimages()
        .into_iter()
        .map(|(v, pre)| {
            let bound = bound_unchecked(pre);
            (
                v.clone(),
                ValueVerdict {
                    bound,
                    thrifty: bound <= theta,
                },
            )
        })
        .collect::<BTreeMap<_, _>>();
    let failure = per_value.iter().find(|(_, v)| !v.thrifty).map(|(d, v)| ThriftyFailure {
        subset: IndexSet::empty(),
        key: MTuple::empty(),
        value: d.clone(),
        bound: v.bound,
    });
    ThriftyReport {
        theta,
        per_value,
        hereditary: None,
        failure,
    }
}

/// The table `n ↦ K_t(n)` over the lines met by `ran(t)`.
pub fn k_table(t: &PointFn, theta: u64) -> Result<BTreeMap<u64, u64>, IdealError> {
    let report = classify_preimages(t, theta);
    if let Some(f) = report.failure {
        return Err(IdealError::NotThrifty {
            value: f.value.to_string(),
            bound: f.bound,
            theta,
        });
    }
    let mut table: BTreeMap<u64, u64> = BTreeMap::new();
    for (u, v) in t.iter() {
        let k = table.entry(v.line()).or_default();
        *k = (*k).max(tuple_bound(u));
    }
    Ok(table)
}

/// Checks thriftiness of every fiber `q_{∪c}` over every `S ⊆ M` and every
/// `c` occurring as an `S`-block of `dom(q)`.
pub fn is_hereditarily_thrifty<V: Value>(q: &PartialFn<V>, theta: u64) -> ThriftyReport<V> {
    let mut top = classify_preimages(q, theta);
    let mut reports = Vec::new();
    let mut failure = None;
    for s in q.arity().subsets() {
        for (c, g) in fibers(q, &s).expect("subsets of the arity") {
            let report = classify_preimages(&g, theta);
            if failure.is_none() {
                if let Some(f) = &report.failure {
                    failure = Some(ThriftyFailure {
                        subset: s.clone(),
                        key: c.clone(),
                        value: f.value.clone(),
                        bound: f.bound,
                    });
                }
            }
            reports.push(FiberReport {
                subset: s.clone(),
                key: c,
                report,
            });
        }
    }
    top.hereditary = Some(reports);
    top.failure = failure;
    top
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdealKind {
    CiFragment,
    CjFragment,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct IdealVerdict {
    pub kind: IdealKind,
    /// `(size, width)` of each test set used.
    pub test_family: Vec<(usize, usize)>,
    pub image_widths: Vec<usize>,
    pub bound_claimed: usize,
    pub pass: bool,
}

/// Fragment check for the small clone: every test set must be mapped to a
/// set of width at most `bound`.
pub fn ci_fragment_check(
    p: &PointFn,
    test_sets: &[BTreeSet<MTuple>],
    bound: usize,
) -> Result<IdealVerdict, IdealError> {
    let mut test_family = Vec::with_capacity(test_sets.len());
    let mut image_widths = Vec::with_capacity(test_sets.len());
    for set in test_sets {
        let mut image = Vec::with_capacity(set.len());
        for u in set {
            let v = p
                .eval(u)?
                .ok_or_else(|| IdealError::TestSetOutsideDomain { tuple: u.clone() })?;
            image.push(*v);
        }
        test_family.push((set.len(), tuple_set_width(set)?));
        image_widths.push(width(&image).width);
    }
    let pass = image_widths.iter().all(|&w| w <= bound);
    Ok(IdealVerdict {
        kind: IdealKind::CiFragment,
        test_family,
        image_widths,
        bound_claimed: bound,
        pass,
    })
}

/// Partitions a tuple set into sets of width at most 1. A tuple goes to the
/// first slice where none of its components shares a line with a component
/// already placed at the same index.
pub fn width_one_slices(tuples: &BTreeSet<MTuple>) -> Vec<BTreeSet<MTuple>> {
    let mut slices: Vec<(BTreeSet<MTuple>, BTreeSet<(usize, u64)>)> = Vec::new();
    'outer: for u in tuples {
        let lines: Vec<(usize, u64)> = u.iter().map(|(i, p)| (i, p.line())).collect();
        for (slice, used) in slices.iter_mut() {
            if lines.iter().all(|l| !used.contains(l)) {
                used.extend(lines.iter().copied());
                slice.insert(u.clone());
                continue 'outer;
            }
        }
        slices.push(([u.clone()].into(), lines.into_iter().collect()));
    }
    slices.into_iter().map(|(s, _)| s).collect()
}
