//! The composition calculus of partial functions: composition, disjoint
//! unions, `p̄`, the block operators `c*A`, `c*g`, `c#g`, and fibers `g_{∪c}`.

use std::collections::{BTreeMap, BTreeSet};

use super::{AlgebraError, IndexSet, MTuple, PartialFn, Point, PointFn, TupleFn, Value};

/// `outer ∘ inner`. Defined at `u` iff `inner(u)` is defined and lies in
/// `dom(outer)`.
pub fn compose<V: Value>(outer: &PartialFn<V>, inner: &TupleFn) -> Result<PartialFn<V>, AlgebraError> {
    let mut out = PartialFn::new(inner.arity().clone());
    for (u, w) in inner.iter() {
        if let Some(v) = outer.eval(w)? {
            out.insert_unchecked(u.clone(), v.clone());
        }
    }
    Ok(out)
}

/// Union of functions with pairwise disjoint domains.
pub fn disjoint_union<'a, V, I>(arity: &IndexSet, parts: I) -> Result<PartialFn<V>, AlgebraError>
where
    V: Value + 'a,
    I: IntoIterator<Item = &'a PartialFn<V>>,
{
    let mut out = PartialFn::new(arity.clone());
    for part in parts {
        if part.arity() != arity {
            return Err(AlgebraError::IndexMismatch {
                expected: arity.clone(),
                found: part.arity().clone(),
            });
        }
        for (u, v) in part.iter() {
            if out.contains(u) {
                return Err(AlgebraError::DomainCollision { tuple: u.clone() });
            }
            out.insert_unchecked(u.clone(), v.clone());
        }
    }
    Ok(out)
}

/// Given `g ⊆ g′∘h′`, returns `h = h′↾dom(g)`, so that `g = g′∘h` exactly.
pub fn shrink_inner<V: Value>(
    g: &PartialFn<V>,
    g_prime: &PartialFn<V>,
    h_prime: &TupleFn,
) -> Result<TupleFn, AlgebraError> {
    if g.arity() != h_prime.arity() {
        return Err(AlgebraError::IndexMismatch {
            expected: g.arity().clone(),
            found: h_prime.arity().clone(),
        });
    }
    let mut h = TupleFn::new(g.arity().clone());
    for (u, v) in g.iter() {
        let w = h_prime
            .get(u)
            .ok_or_else(|| AlgebraError::NotContained { tuple: u.clone() })?;
        if g_prime.eval(w)? != Some(v) {
            return Err(AlgebraError::NotContained { tuple: u.clone() });
        }
        h.insert_unchecked(u.clone(), w.clone());
    }
    Ok(h)
}

/// `p̄`: extends `p` to every tuple of `universe`, with value `(0|0)` outside
/// `dom(p)`.
pub fn bar_extend<'a, I>(p: &PointFn, universe: I) -> Result<PointFn, AlgebraError>
where
    I: IntoIterator<Item = &'a MTuple>,
{
    let universe: BTreeSet<&MTuple> = universe.into_iter().collect();
    if let Some(u) = p.domain().find(|u| !universe.contains(u)) {
        return Err(AlgebraError::OutsideUniverse { tuple: u.clone() });
    }
    let mut out = p.clone();
    for u in universe {
        if !out.contains(u) {
            out.insert(u.clone(), Point::ORIGIN)?;
        }
    }
    Ok(out)
}

fn check_disjoint(left: &IndexSet, right: &IndexSet) -> Result<(), AlgebraError> {
    if left.is_disjoint(right) {
        Ok(())
    } else {
        Err(AlgebraError::OverlappingIndices {
            left: left.clone(),
            right: right.clone(),
        })
    }
}

/// `c*A = {c∪z : z ∈ A}`.
pub fn star_set<'a, I>(c: &MTuple, set: I) -> Result<BTreeSet<MTuple>, AlgebraError>
where
    I: IntoIterator<Item = &'a MTuple>,
{
    set.into_iter().map(|z| c.union(z)).collect()
}

/// `c*g`, the function on `c*dom(g)` with `(c*g)(c∪z) = g(z)`.
pub fn star_fn<V: Value>(c: &MTuple, g: &PartialFn<V>) -> Result<PartialFn<V>, AlgebraError> {
    let s = c.index_set();
    check_disjoint(&s, g.arity())?;
    let mut out = PartialFn::new(s.union(g.arity()));
    for (z, v) in g.iter() {
        out.insert_unchecked(c.union(z)?, v.clone());
    }
    Ok(out)
}

/// `c#g` for `g: X^T → X^T`, mapping `c∪z` to `c∪g(z)`.
pub fn hash_fn(c: &MTuple, g: &TupleFn) -> Result<TupleFn, AlgebraError> {
    let s = c.index_set();
    check_disjoint(&s, g.arity())?;
    let mut out = TupleFn::new(s.union(g.arity()));
    for (z, w) in g.iter() {
        if !w.has_index_set(g.arity()) {
            return Err(AlgebraError::IndexMismatch {
                expected: g.arity().clone(),
                found: w.index_set(),
            });
        }
        out.insert_unchecked(c.union(z)?, c.union(w)?);
    }
    Ok(out)
}

/// The fiber `g_{∪c}: X^{M∖S} → Y`, `z ↦ g(z∪c)`.
pub fn fiber<V: Value>(g: &PartialFn<V>, s: &IndexSet, c: &MTuple) -> Result<PartialFn<V>, AlgebraError> {
    check_fiber_args(g, s)?;
    if !c.has_index_set(s) {
        return Err(AlgebraError::IndexMismatch {
            expected: s.clone(),
            found: c.index_set(),
        });
    }
    let t = g.arity().difference(s);
    let mut out = PartialFn::new(t.clone());
    for (u, v) in g.iter() {
        if u.restrict(s) == *c {
            out.insert_unchecked(u.restrict(&t), v.clone());
        }
    }
    Ok(out)
}

/// Every nonempty fiber of `g` over `S`, keyed by the `S`-block `c`.
pub fn fibers<V: Value>(g: &PartialFn<V>, s: &IndexSet) -> Result<BTreeMap<MTuple, PartialFn<V>>, AlgebraError> {
    check_fiber_args(g, s)?;
    let t = g.arity().difference(s);
    let mut out: BTreeMap<MTuple, PartialFn<V>> = BTreeMap::new();
    for (u, v) in g.iter() {
        out.entry(u.restrict(s))
            .or_insert_with(|| PartialFn::new(t.clone()))
            .insert_unchecked(u.restrict(&t), v.clone());
    }
    Ok(out)
}

fn check_fiber_args<V: Value>(g: &PartialFn<V>, s: &IndexSet) -> Result<(), AlgebraError> {
    if s.is_subset(g.arity()) {
        Ok(())
    } else {
        Err(AlgebraError::NotSubset {
            subset: s.clone(),
            of: g.arity().clone(),
        })
    }
}
