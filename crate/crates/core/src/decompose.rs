//! Rewriting an operation `g` as `g′∘h`, with `g′ ⊆ g` hereditarily thrifty
//! and `h` a tuple map whose components lie in the small clone.
//!
//! Each stage fixes one block `S ⊆ M`: fibers `g_{∪c}` are split into a
//! thrifty part and a wasteful part, every wasteful value is collapsed onto a
//! single representative tuple, and the representatives across all fibers
//! use pairwise disjoint sets of y-coordinates, so they form a set of width 1.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::algebra::{
    compose, disjoint_union, fibers, hash_fn, shrink_inner, star_fn, AlgebraError, IndexSet, MTuple, Point, PointFn,
    TupleFn,
};
use crate::ideal::{classify_preimages, is_hereditarily_thrifty, least_bound, tuple_set_width, CiCertificate};
use crate::serde_util::pairs;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecompositionError {
    #[error("no representative with fresh y-coordinates below θ for value {value} in fiber {key}")]
    Admissibility { key: MTuple, value: Point },
    #[error("value {value} in fiber {key} is not wasteful at θ")]
    NotWasteful { key: MTuple, value: Point },
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// Hands out representative tuples whose component y-coordinates have not
/// been used by an earlier representative.
///
/// A candidate is eligible when all its y-coordinates are fresh and some
/// component lies below `θ`, so the singleton preimage it forms is thrifty.
/// Among eligible candidates the allocator prefers tuples lying entirely
/// below `θ`, then tuples using fewer distinct y-coordinates, then the larger
/// least y-coordinate, then the smaller tuple.
#[derive(Clone, Debug)]
pub struct YAllocator {
    theta: u64,
    used: BTreeSet<u64>,
}

impl YAllocator {
    pub fn new(theta: u64) -> Self {
        YAllocator {
            theta,
            used: BTreeSet::new(),
        }
    }

    pub fn theta(&self) -> u64 {
        self.theta
    }

    pub fn used(&self) -> &BTreeSet<u64> {
        &self.used
    }

    fn eligible(&self, z: &MTuple) -> bool {
        z.min_y().is_some_and(|y| y < self.theta) && z.points().all(|p| !self.used.contains(&p.y))
    }

    pub fn select<'a, I>(&mut self, candidates: I) -> Option<MTuple>
    where
        I: IntoIterator<Item = &'a MTuple>,
    {
        let best = candidates
            .into_iter()
            .filter(|z| self.eligible(z))
            .min_by_key(|z| {
                let ys: BTreeSet<u64> = z.points().map(|p| p.y).collect();
                let above = z.max_y().is_some_and(|y| y >= self.theta);
                (above, ys.len(), std::cmp::Reverse(z.min_y()), (*z).clone())
            })?
            .clone();
        self.used.extend(best.points().map(|p| p.y));
        Some(best)
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SelectionResult {
    /// The set `A` of chosen representatives; width at most 1.
    pub representatives: BTreeSet<MTuple>,
    /// `(c, d) ↦ u^{c,d}`.
    #[serde(with = "pairs")]
    pub chosen: BTreeMap<(MTuple, Point), MTuple>,
    /// `c ↦ w′_c`, the restriction of `w_c` to its representatives.
    #[serde(with = "pairs")]
    pub g_primes: BTreeMap<MTuple, PointFn>,
    /// `c ↦ h_c`, mapping `dom(w_c)` onto representatives.
    #[serde(with = "pairs")]
    pub h_parts: BTreeMap<MTuple, TupleFn>,
}

/// Chooses one representative per `(c, value)` of a family of wasteful
/// functions, fibers in key order and values line by line.
pub fn countable_selection(
    family: &BTreeMap<MTuple, PointFn>,
    allocator: &mut YAllocator,
) -> Result<SelectionResult, DecompositionError> {
    let mut out = SelectionResult::default();
    for (c, w) in family {
        let mut values: Vec<(&Point, Vec<&MTuple>)> = w.preimages().into_iter().collect();
        values.sort_by_key(|(d, _)| d.line_order_key());
        let mut g_prime = PointFn::new(w.arity().clone());
        let mut representative: BTreeMap<Point, MTuple> = BTreeMap::new();
        for (d, pre) in values {
            let bound = least_bound(pre.iter().copied()).expect("fiber tuples share an index set");
            if bound.k <= allocator.theta() {
                return Err(DecompositionError::NotWasteful {
                    key: c.clone(),
                    value: *d,
                });
            }
            let z = allocator
                .select(pre.iter().copied())
                .ok_or_else(|| DecompositionError::Admissibility {
                    key: c.clone(),
                    value: *d,
                })?;
            g_prime.insert(z.clone(), *d)?;
            out.representatives.insert(z.clone());
            out.chosen.insert((c.clone(), *d), z.clone());
            representative.insert(*d, z);
        }
        let h = TupleFn::from_entries(
            w.arity().clone(),
            w.iter().map(|(u, d)| (u.clone(), representative[d].clone())),
        )?;
        out.g_primes.insert(c.clone(), g_prime);
        out.h_parts.insert(c.clone(), h);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stage {
    pub subset: IndexSet,
    /// `g^i`, fiberwise thrifty over `subset`.
    pub g: PointFn,
    /// `h^i` with `g^{i-1} = g^i ∘ h^i`.
    pub h: TupleFn,
    pub selection: SelectionResult,
    #[serde(with = "pairs")]
    pub certificates: BTreeMap<usize, CiCertificate>,
}

impl Stage {
    /// True when `h^i` fixes every tuple of its domain.
    pub fn is_trivial(&self) -> bool {
        self.h.iter().all(|(u, v)| u == v)
    }
}

/// One stage: makes every fiber `g′_{∪c}`, `c ∈ X^S`, thrifty at `θ`.
pub fn strong_decompose(g: &PointFn, s: &IndexSet, theta: u64) -> Result<Stage, DecompositionError> {
    let m = g.arity().clone();
    let t = m.difference(s);
    let mut thrifty_parts = BTreeMap::new();
    let mut wasteful_parts = BTreeMap::new();
    for (c, g_c) in fibers(g, s)? {
        // 0-ary fibers are taken as thrifty.
        let (t_c, w_c) = if t.is_empty() {
            (g_c, PointFn::new(t.clone()))
        } else {
            classify_preimages(&g_c, theta).split(&g_c)
        };
        thrifty_parts.insert(c.clone(), t_c);
        if !w_c.is_empty() {
            wasteful_parts.insert(c, w_c);
        }
    }

    let mut allocator = YAllocator::new(theta);
    let selection = countable_selection(&wasteful_parts, &mut allocator)?;

    let mut g_blocks = Vec::new();
    let mut h_blocks = Vec::new();
    for (c, t_c) in &thrifty_parts {
        let i_c = TupleFn::identity(t.clone(), t_c.domain())?;
        let (fiber_g, fiber_h) = match (selection.g_primes.get(c), selection.h_parts.get(c)) {
            (Some(w_prime), Some(h_c)) => (disjoint_union(&t, [t_c, w_prime])?, disjoint_union(&t, [&i_c, h_c])?),
            _ => (t_c.clone(), i_c),
        };
        g_blocks.push(star_fn(c, &fiber_g)?);
        h_blocks.push(hash_fn(c, &fiber_h)?);
    }
    let g_prime = disjoint_union(&m, &g_blocks)?;
    let h_prime = disjoint_union(&m, &h_blocks)?;
    let h = shrink_inner(g, &g_prime, &h_prime)?;

    let certificates = m
        .iter()
        .map(|j| {
            let cert = if s.contains(j) || selection.representatives.is_empty() {
                CiCertificate::Projection { index: j }
            } else {
                CiCertificate::ProjectionOrRange { index: j, bound: 1 }
            };
            (j, cert)
        })
        .collect();

    Ok(Stage {
        subset: s.clone(),
        g: g_prime,
        h,
        selection,
        certificates,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionTrace {
    pub theta: u64,
    pub stages: Vec<Stage>,
    /// `h^k ∘ … ∘ h^1`.
    pub composite_h: TupleFn,
    #[serde(with = "pairs")]
    pub composite_certificates: BTreeMap<usize, CiCertificate>,
}

impl DecompositionTrace {
    /// The final, hereditarily thrifty `g′`.
    pub fn g_prime(&self) -> &PointFn {
        &self.stages.last().expect("at least the empty block").g
    }

    pub fn nontrivial_stages(&self) -> usize {
        self.stages.iter().filter(|s| !s.is_trivial()).count()
    }
}

fn composite_certificates(composite: &TupleFn, bound: usize) -> BTreeMap<usize, CiCertificate> {
    composite
        .arity()
        .iter()
        .map(|j| {
            let moved = composite.iter().any(|(u, v)| u.get(j) != v.get(j));
            let cert = if moved {
                CiCertificate::ProjectionOrRange { index: j, bound }
            } else {
                CiCertificate::Projection { index: j }
            };
            (j, cert)
        })
        .collect()
}

/// Applies [`strong_decompose`] once per subset of `M`, by increasing size
/// and then lexicographically.
pub fn hereditary_decompose(g: &PointFn, theta: u64) -> Result<DecompositionTrace, DecompositionError> {
    let mut current = g.clone();
    let mut composite = TupleFn::identity(g.arity().clone(), g.domain())?;
    let mut stages = Vec::new();
    for s in g.arity().subsets() {
        let stage = strong_decompose(&current, &s, theta)?;
        log::debug!(
            "stage {}: {} representatives, {} → {} tuples",
            s,
            stage.selection.representatives.len(),
            current.len(),
            stage.g.len()
        );
        composite = compose(&stage.h, &composite)?;
        current = stage.g.clone();
        stages.push(stage);
    }
    let bound = stages
        .iter()
        .filter(|s| !s.selection.representatives.is_empty())
        .count();
    Ok(DecompositionTrace {
        theta,
        composite_certificates: composite_certificates(&composite, bound),
        stages,
        composite_h: composite,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "failure", rename_all = "snake_case")]
pub enum DecompositionFailure {
    NotRestriction {
        stage: usize,
        tuple: MTuple,
    },
    StageEquality {
        stage: usize,
        tuple: MTuple,
    },
    NonProjection {
        stage: usize,
        index: usize,
        tuple: MTuple,
    },
    Certificate {
        stage: Option<usize>,
        index: usize,
        reason: String,
    },
    SelectionWidth {
        stage: usize,
        width: usize,
    },
    SharedCoordinate {
        stage: usize,
        y: u64,
    },
    NotInjective {
        stage: usize,
        key: MTuple,
    },
    CompositeMismatch {
        tuple: MTuple,
    },
    FinalEquality {
        tuple: MTuple,
    },
    NotHereditarilyThrifty {
        subset: IndexSet,
        key: MTuple,
        value: Point,
        bound: u64,
    },
    Malformed {
        reason: String,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub stages_checked: usize,
    pub failures: Vec<DecompositionFailure>,
    pub passed: bool,
}

/// Points where `outer ∘ inner` and `expected` disagree, in either direction.
fn recomposition_mismatches(expected: &PointFn, outer: &PointFn, inner: &TupleFn) -> Vec<MTuple> {
    let mut bad = BTreeSet::new();
    for (u, v) in expected.iter() {
        let got = inner.get(u).and_then(|w| outer.get(w));
        if got != Some(v) {
            bad.insert(u.clone());
        }
    }
    for (u, w) in inner.iter() {
        if !expected.contains(u) && outer.contains(w) {
            bad.insert(u.clone());
        }
    }
    bad.into_iter().collect()
}

/// Re-checks every invariant of a trace against `g` without trusting any
/// derived data in it.
pub fn verify_decomposition(g: &PointFn, trace: &DecompositionTrace) -> DecompositionReport {
    use DecompositionFailure as F;
    let mut failures = Vec::new();
    let arity = g.arity();
    let mut previous = g.clone();
    let mut chain = match TupleFn::identity(arity.clone(), g.domain()) {
        Ok(id) => id,
        Err(e) => {
            return DecompositionReport {
                stages_checked: 0,
                failures: vec![F::Malformed { reason: e.to_string() }],
                passed: false,
            }
        }
    };

    for (i, stage) in trace.stages.iter().enumerate() {
        if stage.g.arity() != arity || stage.h.arity() != arity {
            failures.push(F::Malformed {
                reason: format!("stage {i} has the wrong arity"),
            });
            continue;
        }
        for (u, v) in stage.g.iter() {
            if previous.get(u) != Some(v) {
                failures.push(F::NotRestriction {
                    stage: i,
                    tuple: u.clone(),
                });
            }
        }
        for tuple in recomposition_mismatches(&previous, &stage.g, &stage.h) {
            failures.push(F::StageEquality { stage: i, tuple });
        }
        for (u, w) in stage.h.iter() {
            if let Some(index) = stage.subset.iter().find(|&j| u.get(j) != w.get(j)) {
                failures.push(F::NonProjection {
                    stage: i,
                    index,
                    tuple: u.clone(),
                });
            }
        }
        for j in arity.iter() {
            match stage.certificates.get(&j) {
                None => failures.push(F::Certificate {
                    stage: Some(i),
                    index: j,
                    reason: "missing".into(),
                }),
                Some(cert) => {
                    if let Err(e) = cert.verify(&stage.h.component(j)) {
                        failures.push(F::Certificate {
                            stage: Some(i),
                            index: j,
                            reason: e.to_string(),
                        });
                    }
                }
            }
        }
        let sel = &stage.selection;
        match tuple_set_width(&sel.representatives) {
            Ok(w) if w <= 1 => {}
            Ok(width) => failures.push(F::SelectionWidth { stage: i, width }),
            Err(e) => failures.push(F::Malformed { reason: e.to_string() }),
        }
        let mut seen_y: BTreeSet<u64> = BTreeSet::new();
        for z in &sel.representatives {
            let ys: BTreeSet<u64> = z.points().map(|p| p.y).collect();
            if let Some(&y) = ys.iter().find(|y| seen_y.contains(y)) {
                failures.push(F::SharedCoordinate { stage: i, y });
            }
            seen_y.extend(ys);
        }
        for (key, w) in &sel.g_primes {
            if !w.is_injective() {
                failures.push(F::NotInjective {
                    stage: i,
                    key: key.clone(),
                });
            }
        }
        chain = match compose(&stage.h, &chain) {
            Ok(c) => c,
            Err(e) => {
                failures.push(F::Malformed { reason: e.to_string() });
                chain
            }
        };
        previous = stage.g.clone();
    }

    if chain != trace.composite_h {
        let tuples: BTreeSet<&MTuple> = chain.domain().chain(trace.composite_h.domain()).collect();
        for u in tuples {
            if chain.get(u) != trace.composite_h.get(u) {
                failures.push(F::CompositeMismatch { tuple: u.clone() });
            }
        }
    }
    for tuple in recomposition_mismatches(g, &previous, &trace.composite_h) {
        failures.push(F::FinalEquality { tuple });
    }
    for j in arity.iter() {
        let verdict = trace
            .composite_certificates
            .get(&j)
            .ok_or_else(|| "missing".to_string())
            .and_then(|c| c.verify(&trace.composite_h.component(j)).map_err(|e| e.to_string()));
        if let Err(reason) = verdict {
            failures.push(F::Certificate {
                stage: None,
                index: j,
                reason,
            });
        }
    }
    let report = is_hereditarily_thrifty(&previous, trace.theta);
    if let Some(f) = report.failure {
        failures.push(F::NotHereditarilyThrifty {
            subset: f.subset,
            key: f.key,
            value: f.value,
            bound: f.bound,
        });
    }

    DecompositionReport {
        stages_checked: trace.stages.len(),
        passed: failures.is_empty(),
        failures,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: u64, y: u64) -> Point {
        Point::new(x, y)
    }

    fn t(points: &[(u64, u64)]) -> MTuple {
        MTuple::positional(&points.iter().map(|&(x, y)| pt(x, y)).collect::<Vec<_>>())
    }

    fn func(m: usize, entries: &[(&[(u64, u64)], (u64, u64))]) -> PointFn {
        PointFn::from_entries(IndexSet::range(m), entries.iter().map(|(u, (x, y))| (t(u), pt(*x, *y)))).unwrap()
    }

    /// Pointwise brute-force check of `g = g′ ∘ h`.
    fn recomposes(g: &PointFn, g_prime: &PointFn, h: &TupleFn) -> bool {
        g.len() == h.len() && g.iter().all(|(u, v)| h.get(u).and_then(|w| g_prime.get(w)) == Some(v))
    }

    #[test]
    fn selection_single_value() {
        // preimage {(0|1),(0|6)}… in two coordinates; θ = 4, the value is
        // wasteful because ⟨(0|5),(0|7)⟩ lies above θ.
        let w = func(
            2,
            &[
                (&[(0, 1), (0, 2)], (9, 9)),
                (&[(0, 5), (0, 7)], (9, 9)),
                (&[(1, 3), (1, 3)], (9, 9)),
            ],
        );
        let family = BTreeMap::from([(MTuple::empty(), w.clone())]);
        let mut alloc = YAllocator::new(4);
        let sel = countable_selection(&family, &mut alloc).unwrap();
        assert_eq!(sel.representatives.len(), 1);
        // ⟨(1|3),(1|3)⟩ uses one y-coordinate and lies below θ.
        assert_eq!(sel.representatives.iter().next().unwrap(), &t(&[(1, 3), (1, 3)]));
        let g_prime = &sel.g_primes[&MTuple::empty()];
        assert_eq!(g_prime.len(), 1);
        let h = &sel.h_parts[&MTuple::empty()];
        assert_eq!(h.range().len(), 1);
        assert_eq!(compose(g_prime, h).unwrap(), w);
    }

    #[test]
    fn selection_empty_family() {
        let sel = countable_selection(&BTreeMap::new(), &mut YAllocator::new(3)).unwrap();
        assert_eq!(sel, SelectionResult::default());
    }

    #[test]
    fn selection_conflict_is_reported() {
        // Two wasteful values whose only eligible candidates share y = 1.
        let w = func(
            1,
            &[
                (&[(0, 1)], (1, 1)),
                (&[(0, 9)], (1, 1)),
                (&[(5, 1)], (2, 2)),
                (&[(5, 9)], (2, 2)),
            ],
        );
        let family = BTreeMap::from([(MTuple::empty(), w)]);
        let err = countable_selection(&family, &mut YAllocator::new(3)).unwrap_err();
        assert_eq!(
            err,
            DecompositionError::Admissibility {
                key: MTuple::empty(),
                value: pt(2, 2)
            }
        );
    }

    #[test]
    fn selection_rejects_thrifty_input() {
        let w = func(1, &[(&[(0, 1)], (1, 1))]);
        let family = BTreeMap::from([(MTuple::empty(), w)]);
        assert!(matches!(
            countable_selection(&family, &mut YAllocator::new(3)),
            Err(DecompositionError::NotWasteful { .. })
        ));
    }

    #[test]
    fn strong_decompose_on_thrifty_input_is_identity() {
        let g = func(2, &[(&[(0, 0), (0, 1)], (1, 1)), (&[(1, 1), (2, 0)], (1, 1))]);
        let stage = strong_decompose(&g, &IndexSet::singleton(1), 3).unwrap();
        assert_eq!(stage.g, g);
        assert!(stage.is_trivial());
        assert_eq!(stage.h.len(), g.len());
    }

    #[test]
    fn strong_decompose_empty_block_makes_plain_thrifty() {
        let g = func(
            1,
            &[
                (&[(0, 0)], (1, 1)),
                (&[(0, 8)], (1, 1)),
                (&[(0, 2)], (3, 3)),
                (&[(4, 9)], (3, 3)),
            ],
        );
        let stage = strong_decompose(&g, &IndexSet::empty(), 4).unwrap();
        assert!(classify_preimages(&stage.g, 4).is_thrifty());
        assert!(stage.g.is_subfunction_of(&g));
        assert!(recomposes(&g, &stage.g, &stage.h));
    }

    #[test]
    fn strong_decompose_two_ary_fibers() {
        // S = {1}; fiber at (0|0) has value (7|7) wasteful via z = (0|6);
        // fiber at (1|1) has value (8|8) wasteful via z = (2|9).
        let g = func(
            2,
            &[
                (&[(0, 0), (0, 6)], (7, 7)),
                (&[(0, 0), (3, 1)], (7, 7)),
                (&[(0, 0), (1, 0)], (5, 5)),
                (&[(1, 1), (2, 9)], (8, 8)),
                (&[(1, 1), (4, 2)], (8, 8)),
                (&[(1, 1), (1, 2)], (8, 8)),
            ],
        );
        let s = IndexSet::singleton(1);
        let stage = strong_decompose(&g, &s, 4).unwrap();
        assert!(recomposes(&g, &stage.g, &stage.h));
        assert!(stage.g.is_subfunction_of(&g));
        for (_, f) in fibers(&stage.g, &s).unwrap() {
            assert!(classify_preimages(&f, 4).is_thrifty());
        }
        assert!(tuple_set_width(&stage.selection.representatives).unwrap() <= 1);
        for (u, w) in stage.h.iter() {
            assert_eq!(u.get(1), w.get(1));
        }
        for (j, cert) in &stage.certificates {
            cert.verify(&stage.h.component(*j)).unwrap();
        }
    }

    #[test]
    fn hereditary_one_ary_trivial() {
        let g = func(1, &[(&[(0, 0)], (1, 1)), (&[(3, 1)], (2, 2))]);
        let trace = hereditary_decompose(&g, 3).unwrap();
        assert_eq!(trace.stages.len(), 2);
        assert_eq!(trace.nontrivial_stages(), 0);
        assert_eq!(trace.g_prime(), &g);
        assert!(verify_decomposition(&g, &trace).passed);
    }

    #[test]
    fn thriftiness_persists_to_final_stage() {
        let g = func(
            2,
            &[
                (&[(0, 7), (0, 7)], (7, 7)),
                (&[(0, 1), (0, 1)], (7, 7)),
                (&[(0, 0), (0, 6)], (8, 8)),
                (&[(0, 0), (0, 2)], (8, 8)),
                (&[(1, 0), (1, 3)], (9, 9)),
            ],
        );
        let trace = hereditary_decompose(&g, 4).unwrap();
        let last = trace.g_prime();
        for stage in &trace.stages {
            if stage.subset.len() < 2 {
                for (_, f) in fibers(last, &stage.subset).unwrap() {
                    assert!(classify_preimages(&f, 4).is_thrifty());
                }
            }
        }
        let report = verify_decomposition(&g, &trace);
        assert!(report.passed, "{:?}", report.failures);
    }

    #[test]
    fn tampered_h_is_localized() {
        let g = func(1, &[(&[(0, 0)], (1, 1)), (&[(0, 8)], (1, 1)), (&[(2, 2)], (4, 4))]);
        let mut trace = hereditary_decompose(&g, 4).unwrap();
        let victim = t(&[(2, 2)]);
        let mut h = TupleFn::new(IndexSet::range(1));
        for (u, w) in trace.stages[0].h.iter() {
            let w = if *u == victim { t(&[(0, 0)]) } else { w.clone() };
            h.insert(u.clone(), w).unwrap();
        }
        trace.stages[0].h = h;
        let report = verify_decomposition(&g, &trace);
        assert!(report.failures.contains(&DecompositionFailure::StageEquality {
            stage: 0,
            tuple: victim
        }));
    }

    #[test]
    fn tampered_selection_width_is_reported() {
        let g = func(1, &[(&[(0, 0)], (1, 1)), (&[(0, 8)], (1, 1))]);
        let mut trace = hereditary_decompose(&g, 4).unwrap();
        trace.stages[0].selection.representatives.insert(t(&[(5, 0)]));
        let report = verify_decomposition(&g, &trace);
        assert!(report
            .failures
            .iter()
            .any(|f| matches!(f, DecompositionFailure::SelectionWidth { stage: 0, width: 2 })));
    }
}
