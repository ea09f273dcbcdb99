//! Strategies, naive reference implementations and the algebra laws, shared
//! by the integration test targets.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use proptest::collection::{btree_map, btree_set, vec};
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use clonecover::algebra::AtomEntry;
use clonecover::algebra::{
    bar_extend, compose, disjoint_union, fiber, fibers, hash_fn, shrink_inner, star_fn, star_set, Expr, IndexSet,
    MTuple, Point, PointFn, Term, TupleFn,
};
use clonecover::ideal::{
    classify_preimages, is_hereditarily_thrifty, k_table, least_bound, tuple_set_width, width, CiCertificate,
};
use clonecover::workbench::{GenParams, Profile};

// ---------------------------------------------------------------------------
// strategies

pub fn point(max: u64) -> impl Strategy<Value = Point> + Clone {
    (0..max, 0..max).prop_map(|(x, y)| Point::new(x, y))
}

pub fn tuple(index: IndexSet, max: u64) -> impl Strategy<Value = MTuple> + Clone {
    vec(point(max), index.len()).prop_map(move |ps| MTuple::over(&index, &ps).expect("one point per index"))
}

pub fn point_fn(index: IndexSet, max: u64, len: usize) -> impl Strategy<Value = PointFn> + Clone {
    btree_map(tuple(index.clone(), max), point(max), 0..len)
        .prop_map(move |m| PointFn::from_entries(index.clone(), m).expect("distinct keys"))
}

pub fn tuple_fn(index: IndexSet, max: u64, len: usize) -> impl Strategy<Value = TupleFn> + Clone {
    btree_map(tuple(index.clone(), max), tuple(index.clone(), max), 0..len)
        .prop_map(move |m| TupleFn::from_entries(index.clone(), m).expect("distinct keys"))
}

/// `(M, S)` with `1 ≤ |M| ≤ 3` and `S ⊆ M`.
pub fn blocks() -> impl Strategy<Value = (IndexSet, IndexSet)> {
    (1..=3usize, any::<u8>()).prop_map(|(m, mask)| {
        let s = (1..=m).filter(|i| mask >> (i - 1) & 1 == 1).collect();
        (IndexSet::range(m), s)
    })
}

/// A point function together with a part label for each domain tuple.
fn labelled(index: IndexSet, max: u64, len: usize, parts: u8) -> impl Strategy<Value = (PointFn, Vec<u8>)> {
    (point_fn(index, max, len), vec(0..parts, len))
}

fn part<V: clonecover::algebra::Value>(
    p: &clonecover::algebra::PartialFn<V>,
    labels: &[u8],
    n: u8,
) -> clonecover::algebra::PartialFn<V> {
    let keep: BTreeSet<MTuple> = p
        .domain()
        .zip(labels)
        .filter(|(_, &l)| l == n)
        .map(|(u, _)| u.clone())
        .collect();
    p.restrict(|u, _| keep.contains(u))
}

/// Runs `test` on `cases` inputs from a fixed-seed runner.
pub fn check<S, F>(cases: u32, strategy: S, test: F) -> Result<(), String>
where
    S: Strategy,
    S::Value: std::fmt::Debug,
    F: Fn(S::Value) -> Result<(), TestCaseError>,
{
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

// ---------------------------------------------------------------------------
// laws

/// `c*(f∘g) = (c*f)∘(c#g)`.
pub fn law_star_compose(cases: u32) -> Result<(), String> {
    let strategy = blocks().prop_flat_map(|(m, s)| {
        let t = m.difference(&s);
        (tuple(s, 5), point_fn(t.clone(), 3, 12), tuple_fn(t, 3, 12))
    });
    check(cases, strategy, |(c, f, g)| {
        let left = star_fn(&c, &compose(&f, &g).unwrap()).unwrap();
        let right = compose(&star_fn(&c, &f).unwrap(), &hash_fn(&c, &g).unwrap()).unwrap();
        prop_assert_eq!(left, right);
        Ok(())
    })
}

/// `(c*g)_{∪c} = g`.
pub fn law_fiber_of_star(cases: u32) -> Result<(), String> {
    let strategy = blocks().prop_flat_map(|(m, s)| {
        let t = m.difference(&s);
        (Just(s.clone()), tuple(s, 5), point_fn(t, 5, 16))
    });
    check(cases, strategy, |(s, c, g)| {
        let starred = star_fn(&c, &g).unwrap();
        prop_assert_eq!(starred.len(), g.len());
        prop_assert_eq!(fiber(&starred, &s, &c).unwrap(), g);
        Ok(())
    })
}

/// `g = ⋃_c c*(g_{∪c})`, and any family with `g = ⋃_c c*g_c` is the fiber
/// family.
pub fn law_reconstruction(cases: u32) -> Result<(), String> {
    let strategy = blocks().prop_flat_map(|(m, s)| {
        let t = m.difference(&s);
        (
            Just((m.clone(), s.clone())),
            point_fn(m, 3, 24),
            btree_map(tuple(s, 3), point_fn(t, 3, 6), 0..5),
        )
    });
    check(cases, strategy, |((m, s), g, family)| {
        let parts: Vec<PointFn> = fibers(&g, &s)
            .unwrap()
            .iter()
            .map(|(c, gc)| star_fn(c, gc).unwrap())
            .collect();
        prop_assert_eq!(&disjoint_union(&m, &parts).unwrap(), &g);

        let starred: Vec<PointFn> = family.iter().map(|(c, gc)| star_fn(c, gc).unwrap()).collect();
        let union = disjoint_union(&m, &starred).unwrap();
        for (c, gc) in &family {
            prop_assert_eq!(&fiber(&union, &s, c).unwrap(), gc);
        }
        Ok(())
    })
}

/// `⋃(f_n∘g_n) ⊆ (⋃f_n)∘(⋃g_n)` for disjoint-domain families; the
/// compositions themselves have disjoint domains.
pub fn law_union_of_compositions(cases: u32) -> Result<(), String> {
    let strategy = (1..=3usize).prop_flat_map(|m| {
        let index = IndexSet::range(m);
        (
            labelled(index.clone(), 3, 20, 4),
            tuple_fn(index, 3, 20),
            vec(0..4u8, 20),
        )
    });
    check(cases, strategy, |((f, f_labels), g, g_labels)| {
        let m = f.arity().clone();
        let pieces: Vec<PointFn> = (0..4)
            .map(|n| compose(&part(&f, &f_labels, n), &part(&g, &g_labels, n)).unwrap())
            .collect();
        let union = disjoint_union(&m, &pieces);
        prop_assert!(union.is_ok(), "compositions overlap: {:?}", union.err());
        let whole = compose(&f, &g).unwrap();
        prop_assert!(union.unwrap().is_subfunction_of(&whole));
        Ok(())
    })
}

/// `g ⊆ g′∘h′` yields `h ⊆ h′` with `g = g′∘h`; a disagreeing `g` is
/// rejected.
pub fn law_shrink_inner(cases: u32) -> Result<(), String> {
    let strategy = (1..=3usize).prop_flat_map(|m| {
        let index = IndexSet::range(m);
        (
            point_fn(index.clone(), 3, 20),
            tuple_fn(index, 3, 20),
            vec(any::<bool>(), 20),
        )
    });
    check(cases, strategy, |(g_prime, h_prime, mask)| {
        let full = compose(&g_prime, &h_prime).unwrap();
        let keep: BTreeSet<MTuple> = full
            .domain()
            .zip(&mask)
            .filter(|(_, &k)| k)
            .map(|(u, _)| u.clone())
            .collect();
        let g = full.restrict(|u, _| keep.contains(u));
        let h = shrink_inner(&g, &g_prime, &h_prime).unwrap();
        prop_assert!(h.is_subfunction_of(&h_prime));
        prop_assert_eq!(h.len(), g.len());
        prop_assert_eq!(compose(&g_prime, &h).unwrap(), g.clone());

        if let Some((u, v)) = g.iter().next() {
            let mut bad = g.restrict(|w, _| w != u);
            bad.insert(u.clone(), Point::new(v.x + 1, v.y)).unwrap();
            prop_assert!(shrink_inner(&bad, &g_prime, &h_prime).is_err());
        }
        Ok(())
    })
}

/// Disjoint unions: least bounds combine by `max`, so the union is thrifty
/// iff both parts are.
pub fn law_finite_unions(cases: u32) -> Result<(), String> {
    let strategy =
        (1..=3usize, 1..8u64).prop_flat_map(|(m, theta)| (labelled(IndexSet::range(m), 8, 24, 2), Just(theta)));
    check(cases, strategy, |((p, labels), theta)| {
        let m = p.arity().clone();
        let p1 = part(&p, &labels, 0);
        let p2 = part(&p, &labels, 1);
        let union = disjoint_union(&m, [&p1, &p2]).unwrap();
        prop_assert_eq!(&union, &p);
        prop_assert_eq!(
            classify_preimages(&union, theta).is_thrifty(),
            classify_preimages(&p1, theta).is_thrifty() && classify_preimages(&p2, theta).is_thrifty()
        );
        let a: Vec<&MTuple> = p1.domain().collect();
        let b: Vec<&MTuple> = p2.domain().collect();
        let k = |s: &[&MTuple]| least_bound(s.iter().copied()).unwrap().k;
        let both: Vec<&MTuple> = a.iter().chain(&b).copied().collect();
        prop_assert_eq!(k(&both), k(&a).max(k(&b)));
        Ok(())
    })
}

/// `split` partitions the domain into a thrifty and a wasteful part.
pub fn law_splitting(cases: u32) -> Result<(), String> {
    let strategy = (1..=3usize, 1..8u64).prop_flat_map(|(m, theta)| (point_fn(IndexSet::range(m), 8, 24), Just(theta)));
    check(cases, strategy, |(p, theta)| {
        let report = classify_preimages(&p, theta);
        let (t, w) = report.split(&p);
        prop_assert_eq!(t.len() + w.len(), p.len());
        prop_assert_eq!(disjoint_union(p.arity(), [&t, &w]).unwrap(), p.clone());
        prop_assert!(classify_preimages(&t, theta).is_thrifty());
        let wasteful = classify_preimages(&w, theta);
        prop_assert!(wasteful.per_value.values().all(|v| !v.thrifty));
        Ok(())
    })
}

/// Restriction never raises a preimage bound and keeps hereditary
/// thriftiness.
pub fn law_monotonicity(cases: u32) -> Result<(), String> {
    let strategy = (1..=3usize, 1..8u64)
        .prop_flat_map(|(m, theta)| (point_fn(IndexSet::range(m), 8, 24), vec(any::<bool>(), 24), Just(theta)));
    check(cases, strategy, |(q, mask, theta)| {
        let keep: BTreeSet<MTuple> = q
            .domain()
            .zip(&mask)
            .filter(|(_, &k)| k)
            .map(|(u, _)| u.clone())
            .collect();
        let sub = q.restrict(|u, _| keep.contains(u));
        let big = classify_preimages(&q, theta);
        for (v, verdict) in classify_preimages(&sub, theta).per_value {
            prop_assert!(verdict.bound <= big.per_value[&v].bound);
        }
        if is_hereditarily_thrifty(&q, theta).is_thrifty() {
            prop_assert!(is_hereditarily_thrifty(&sub, theta).is_thrifty());
        }
        Ok(())
    })
}

/// `p̄` adds exactly the missing tuples, all sent to `(0|0)`.
pub fn law_bar_extend(cases: u32) -> Result<(), String> {
    let strategy = (1..=3usize).prop_flat_map(|m| {
        let index = IndexSet::range(m);
        (point_fn(index.clone(), 4, 16), btree_set(tuple(index, 4), 0..16))
    });
    check(cases, strategy, |(p, extra)| {
        let universe: BTreeSet<MTuple> = p.domain().cloned().chain(extra).collect();
        let ext = bar_extend(&p, &universe).unwrap();
        prop_assert_eq!(ext.len(), universe.len());
        prop_assert!(p.is_subfunction_of(&ext));
        let added = ext.iter().filter(|(u, _)| !p.contains(u)).collect::<Vec<_>>();
        prop_assert_eq!(added.len(), universe.len() - p.len());
        prop_assert!(added.iter().all(|(_, v)| **v == Point::ORIGIN));
        Ok(())
    })
}

/// `c*A` is a bijective image, and `c#id_A = id_{c*A}`.
pub fn law_star_set(cases: u32) -> Result<(), String> {
    let strategy = blocks().prop_flat_map(|(m, s)| {
        let t = m.difference(&s);
        (Just(t.clone()), tuple(s, 4), btree_set(tuple(t, 4), 0..12))
    });
    check(cases, strategy, |(t, c, a)| {
        let starred = star_set(&c, &a).unwrap();
        prop_assert_eq!(starred.len(), a.len());
        let id = TupleFn::identity(t, &a).unwrap();
        let expected = TupleFn::identity(c.index_set().union(id.arity()), &starred).unwrap();
        prop_assert_eq!(hash_fn(&c, &id).unwrap(), expected);
        Ok(())
    })
}

/// A term `outer(inner_1, …, inner_m)` evaluates like `compose`.
pub fn law_term_compose(cases: u32) -> Result<(), String> {
    let strategy = (1..=3usize).prop_flat_map(|m| {
        let index = IndexSet::range(m);
        (
            point_fn(index.clone(), 3, 16),
            tuple_fn(index.clone(), 3, 16),
            btree_set(tuple(index, 3), 0..8),
        )
    });
    check(cases, strategy, |(outer, inner, probes)| {
        let m: Vec<usize> = outer.arity().iter().collect();
        let mut atoms = BTreeMap::new();
        atoms.insert(
            "outer".to_string(),
            AtomEntry::ci(outer.clone(), CiCertificate::LineRelabeling),
        );
        let mut args = Vec::new();
        for &j in &m {
            let name = format!("inner{j}");
            atoms.insert(
                name.clone(),
                AtomEntry::ci(inner.component(j), CiCertificate::Projection { index: j }),
            );
            args.push(Expr::Atom(name));
        }
        let term = Term::new(Expr::compose("outer", args), atoms);
        let expected = compose(&outer, &inner).unwrap();
        for u in inner.domain().chain(&probes) {
            prop_assert_eq!(term.eval(u).unwrap(), expected.get(u).copied());
        }
        Ok(())
    })
}

pub type Law = (&'static str, fn(u32) -> Result<(), String>);

pub const LAWS: &[Law] = &[
    ("star_compose", law_star_compose),
    ("fiber_of_star", law_fiber_of_star),
    ("reconstruction", law_reconstruction),
    ("union_of_compositions", law_union_of_compositions),
    ("shrink_inner", law_shrink_inner),
    ("finite_unions", law_finite_unions),
    ("splitting", law_splitting),
    ("monotonicity", law_monotonicity),
    ("bar_extend", law_bar_extend),
    ("star_set", law_star_set),
    ("term_compose", law_term_compose),
];

// ---------------------------------------------------------------------------
// naive oracles

/// Sort line by line, drop duplicates, count runs.
pub fn naive_width(points: &[Point]) -> usize {
    let mut sorted: Vec<(u64, u64)> = points.iter().map(|p| (p.y, p.x)).collect();
    sorted.sort_unstable();
    sorted.dedup();
    let mut best = 0;
    let mut run = 0;
    let mut line = None;
    for (y, _) in sorted {
        if line == Some(y) {
            run += 1;
        } else {
            line = Some(y);
            run = 1;
        }
        best = best.max(run);
    }
    best
}

/// `A ⊆ B^M_k`: every tuple has a component below line `k`.
pub fn in_bk(tuples: &[MTuple], k: u64) -> bool {
    tuples.iter().all(|u| u.points().any(|p| p.y < k))
}

/// Least `k` with `A ⊆ B^M_k`, by trying `k = 0, 1, 2, …`.
pub fn naive_least_bound(tuples: &[MTuple]) -> u64 {
    (0..)
        .find(|&k| in_bk(tuples, k))
        .expect("some k works for nonempty tuples")
}

pub fn naive_k_table(t: &PointFn) -> BTreeMap<u64, u64> {
    let lines: BTreeSet<u64> = t.range().iter().map(|p| p.y).collect();
    lines
        .into_iter()
        .map(|n| {
            let pre: Vec<MTuple> = t.iter().filter(|(_, v)| v.y == n).map(|(u, _)| u.clone()).collect();
            (n, naive_least_bound(&pre))
        })
        .collect()
}

/// Every fiber over every block, every value preimage bounded by `θ`.
pub fn naive_hereditarily_thrifty(q: &PointFn, theta: u64) -> bool {
    let m: Vec<usize> = q.arity().iter().collect();
    for mask in 0..1u32 << m.len() {
        let s: Vec<usize> = m
            .iter()
            .enumerate()
            .filter(|(b, _)| mask >> b & 1 == 1)
            .map(|(_, &i)| i)
            .collect();
        let block = |u: &MTuple| s.iter().map(|&i| u.get(i).unwrap()).collect::<Vec<_>>();
        let keys: BTreeSet<Vec<Point>> = q.domain().map(block).collect();
        for c in keys {
            let mut preimages: BTreeMap<Point, Vec<MTuple>> = BTreeMap::new();
            for (u, v) in q.iter().filter(|(u, _)| block(u) == c) {
                let rest: MTuple = u.iter().filter(|(i, _)| !s.contains(i)).collect();
                preimages.entry(*v).or_default().push(rest);
            }
            for pre in preimages.values() {
                // The 0-ary fiber of a single tuple: nothing left to bound.
                if pre.iter().all(MTuple::is_empty) {
                    continue;
                }
                if naive_least_bound(pre) > theta {
                    return false;
                }
            }
        }
    }
    true
}

/// Width of `Q[A]`, recomputed from the graph.
pub fn naive_image_width(q_big: &PointFn, factor: impl Fn(usize) -> BTreeSet<Point>) -> usize {
    let arity: Vec<usize> = q_big.arity().iter().collect();
    let factors: BTreeMap<usize, BTreeSet<Point>> = arity.iter().map(|&i| (i, factor(i))).collect();
    let image: Vec<Point> = q_big
        .iter()
        .filter(|(w, _)| w.iter().all(|(i, p)| factors[&i].contains(&p)))
        .map(|(_, v)| *v)
        .collect();
    naive_width(&image)
}

// ---------------------------------------------------------------------------
// random data for the oracle comparisons

pub fn random_points(rng: &mut ChaCha8Rng, max_points: usize) -> Vec<Point> {
    let n = rng.gen_range(0..=max_points);
    let lines = [4u64, 64, 1024, 1 << 20][rng.gen_range(0..4)];
    let columns = [4u64, 64, 1 << 20][rng.gen_range(0..3)];
    (0..n)
        .map(|_| Point::new(rng.gen_range(0..columns), rng.gen_range(0..lines)))
        .collect()
}

/// Up to `max_points` points grouped into distinct `m`-tuples.
pub fn random_tuples(rng: &mut ChaCha8Rng, max_points: usize) -> Vec<MTuple> {
    let m = rng.gen_range(1..=3);
    let n = rng.gen_range(0..=max_points / m);
    let lines = [8u64, 32, 128][rng.gen_range(0..3)];
    let index = IndexSet::range(m);
    let set: BTreeSet<MTuple> = (0..n)
        .map(|_| {
            let ps: Vec<Point> = (0..m)
                .map(|_| Point::new(rng.gen_range(0..64), rng.gen_range(0..lines)))
                .collect();
            MTuple::over(&index, &ps).unwrap()
        })
        .collect();
    set.into_iter().collect()
}

pub fn random_fn(rng: &mut ChaCha8Rng, max_entries: usize) -> PointFn {
    let m = rng.gen_range(1..=3);
    let index = IndexSet::range(m);
    let lines = rng.gen_range(1..=12);
    let n = rng.gen_range(0..=max_entries);
    let mut f = PointFn::new(index.clone());
    for _ in 0..n {
        let ps: Vec<Point> = (0..m)
            .map(|_| Point::new(rng.gen_range(0..32), rng.gen_range(0..48)))
            .collect();
        let u = MTuple::over(&index, &ps).unwrap();
        if !f.contains(&u) {
            f.insert(u, Point::new(rng.gen_range(0..6), rng.gen_range(0..lines)))
                .unwrap();
        }
    }
    f
}

// ---------------------------------------------------------------------------
// differential checks, one random input each

pub fn compare_width(rng: &mut ChaCha8Rng, max_points: usize) -> Result<usize, String> {
    let points = random_points(rng, max_points);
    let cert = width(&points);
    let expected = naive_width(&points);
    if cert.width != expected {
        return Err(format!(
            "width {} on {} points, oracle {expected}",
            cert.width,
            points.len()
        ));
    }
    if let Some(line) = cert.witness_line {
        let on_line: BTreeSet<&Point> = points.iter().filter(|p| p.y == line).collect();
        if on_line.len() != expected {
            return Err(format!(
                "witness line {line} holds {} points, not {expected}",
                on_line.len()
            ));
        }
    }
    Ok(points.len())
}

pub fn compare_least_bound(rng: &mut ChaCha8Rng, max_points: usize) -> Result<usize, String> {
    let tuples = random_tuples(rng, max_points);
    let k = least_bound(&tuples).map_err(|e| e.to_string())?.k;
    let expected = naive_least_bound(&tuples);
    if k != expected {
        return Err(format!("least bound {k} on {} tuples, oracle {expected}", tuples.len()));
    }
    if !in_bk(&tuples, k) || (k > 0 && in_bk(&tuples, k - 1)) {
        return Err(format!("{k} is not the least bound"));
    }
    let m = tuples.first().map_or(0, MTuple::len);
    let expected_width = (1..=m)
        .map(|i| naive_width(&tuples.iter().map(|u| u.get(i).unwrap()).collect::<Vec<_>>()))
        .max()
        .unwrap_or(0);
    let found = tuple_set_width(&tuples).map_err(|e| e.to_string())?;
    if found != expected_width {
        return Err(format!("tuple set width {found}, oracle {expected_width}"));
    }
    Ok(tuples.len() * m)
}

pub fn compare_k_table(rng: &mut ChaCha8Rng, max_entries: usize) -> Result<usize, String> {
    let t = random_fn(rng, max_entries);
    let points = t.len() * t.arity().len();
    let worst = t
        .range()
        .iter()
        .map(|v| naive_least_bound(&t.preimage(v).cloned().collect::<Vec<_>>()))
        .max()
        .unwrap_or(0);
    let theta = worst.max(1);
    let table = k_table(&t, theta).map_err(|e| e.to_string())?;
    let expected = naive_k_table(&t);
    if table != expected {
        return Err(format!("k table {table:?}, oracle {expected:?}"));
    }
    if worst > 1 && k_table(&t, worst - 1).is_ok() {
        return Err(format!("accepted θ = {} below a preimage bound {worst}", worst - 1));
    }
    Ok(points)
}

pub fn compare_hereditary(rng: &mut ChaCha8Rng) -> Result<(), String> {
    let q = random_fn(rng, 24);
    let theta = rng.gen_range(1..48);
    let found = is_hereditarily_thrifty(&q, theta).is_thrifty();
    let expected = naive_hereditarily_thrifty(&q, theta);
    if found != expected {
        return Err(format!(
            "hereditary verdict {found}, oracle {expected} at θ = {theta} on {q}"
        ));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// the normal form behind random relabelings

/// `(0|n²+k) ↦ (k|n)` for `k < n < N`, then the domain, the lines and the
/// columns on each line replaced by random injective relabelings, plus a few
/// extra points on lines of their own.
pub fn scrambled_normal_form(rng: &mut ChaCha8Rng, horizon: u64) -> PointFn {
    use rand::seq::index::sample;

    let ceiling = (horizon * horizon + horizon) as usize;
    let pairs: Vec<(u64, u64)> = (1..horizon).flat_map(|n| (0..n).map(move |k| (n, k))).collect();
    let extra = rng.gen_range(0..=3);
    let domain_ys = sample(rng, 4 * ceiling, pairs.len() + extra).into_vec();
    let lines = sample(rng, ceiling, horizon as usize + extra).into_vec();
    let mut f = PointFn::new(IndexSet::range(1));
    let mut domain = domain_ys
        .iter()
        .map(|&y| Point::new(rng.gen_range(0..horizon), y as u64))
        .collect::<Vec<_>>()
        .into_iter();
    for n in 1..horizon {
        let columns = sample(rng, ceiling, n as usize).into_vec();
        for k in 0..n {
            let d = domain.next().unwrap();
            let v = Point::new(columns[k as usize] as u64, lines[n as usize] as u64);
            f.insert(MTuple::positional(&[d]), v).unwrap();
        }
    }
    for &line in &lines[horizon as usize..] {
        let d = domain.next().unwrap();
        f.insert(
            MTuple::positional(&[d]),
            Point::new(rng.gen_range(0..horizon), line as u64),
        )
        .unwrap();
    }
    f
}

/// `f((0|n²+k)) = (k|n)` for all `k < n < N`.
pub fn normal_form_holds(f_star: &PointFn, horizon: u64) -> Result<(), String> {
    for n in 1..horizon {
        for k in 0..n {
            let arg = MTuple::positional(&[Point::new(0, n * n + k)]);
            let found = f_star.get(&arg).copied();
            if found != Some(Point::new(k, n)) {
                return Err(format!("f*((0|{})) = {found:?}, expected ({k}|{n})", n * n + k));
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// instance grids

pub const HORIZONS: [u64; 5] = [8, 12, 16, 24, 32];

/// Generator parameters for `count` seeds at arity `m`, cycling through the
/// horizons; every fifth instance is all-thrifty.
pub fn grid(m: usize, count: u64) -> Vec<GenParams> {
    (0..count)
        .map(|seed| {
            let mut p = GenParams::new(m, HORIZONS[(seed % 5) as usize], seed);
            if seed % 5 == 4 {
                p.profile = Profile::AllThrifty;
            }
            p
        })
        .collect()
}
