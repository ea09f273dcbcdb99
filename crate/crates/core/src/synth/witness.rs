//! Bringing the distinguished operation `f` into the normal form
//! `f((0|n⊕k)) = (k|n)`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{oplus, SynthesisError};
use crate::algebra::{AtomEntry, Expr, IndexSet, MTuple, Point, PointFn, Term};
use crate::ideal::{ci_fragment_check, width, width_one_slices, CiCertificate, IdealVerdict};

/// A unary partial function known to lie in the small clone.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertifiedFn {
    pub name: String,
    pub function: PointFn,
    pub certificate: CiCertificate,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnaryReduction {
    /// Candidate indices fed into `f`, one per argument; empty when `f` was
    /// used as it is.
    pub indices: Vec<usize>,
    /// `x ↦ f(g_1(x),…,g_n(x))` on the points where every piece is defined.
    pub composite: PointFn,
    pub verdict: IdealVerdict,
}

fn unary(p: Point) -> MTuple {
    MTuple::positional(&[p])
}

fn fragment_verdict(composite: &PointFn, threshold: usize) -> Result<IdealVerdict, SynthesisError> {
    let domain: BTreeSet<MTuple> = composite.domain().cloned().collect();
    Ok(ci_fragment_check(composite, &width_one_slices(&domain), threshold)?)
}

fn composite_of(f: &PointFn, pieces: &[&PointFn]) -> Result<PointFn, SynthesisError> {
    let mut out = PointFn::new(IndexSet::range(1));
    let Some(first) = pieces.first() else {
        return Ok(out);
    };
    'points: for x in first.domain() {
        let mut args = Vec::with_capacity(pieces.len());
        for g in pieces {
            match g.get(x) {
                Some(p) => args.push(*p),
                None => continue 'points,
            }
        }
        let w = MTuple::over(f.arity(), &args)?;
        if let Some(v) = f.get(&w) {
            out.insert(x.clone(), *v)?;
        }
    }
    Ok(out)
}

/// Searches candidate tuples in lexicographic order for one whose composite
/// with `f` maps some width-1 slice of its domain onto a set wider than
/// `threshold`.
pub fn reduce_to_unary(
    f: &PointFn,
    candidates: &[CertifiedFn],
    threshold: usize,
) -> Result<UnaryReduction, SynthesisError> {
    let arity = f.arity().len();
    if arity == 1 && candidates.is_empty() {
        let verdict = fragment_verdict(f, threshold)?;
        return if verdict.pass {
            Err(SynthesisError::NoUnaryWitness)
        } else {
            Ok(UnaryReduction {
                indices: Vec::new(),
                composite: f.clone(),
                verdict,
            })
        };
    }
    if candidates.is_empty() || arity == 0 {
        return Err(SynthesisError::NoUnaryWitness);
    }
    let mut indices = vec![0usize; arity];
    loop {
        let pieces: Vec<&PointFn> = indices.iter().map(|&i| &candidates[i].function).collect();
        let composite = composite_of(f, &pieces)?;
        if !composite.is_empty() {
            let verdict = fragment_verdict(&composite, threshold)?;
            if !verdict.pass {
                return Ok(UnaryReduction {
                    indices,
                    composite,
                    verdict,
                });
            }
        }
        // Odometer step, last position fastest.
        let mut pos = arity;
        loop {
            if pos == 0 {
                return Err(SynthesisError::NoUnaryWitness);
            }
            pos -= 1;
            indices[pos] += 1;
            if indices[pos] < candidates.len() {
                break;
            }
            indices[pos] = 0;
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NormalizedWitness {
    pub horizon: u64,
    /// `(0|n⊕k) ↦` the chosen preimage of the `k`-th point on `ℓ_n`, plus
    /// `(0|0) ↦` a default point of the domain.
    pub r: PointFn,
    /// Relabels each chosen point `(x|ℓ_n)` to `(k|n)`.
    pub l: PointFn,
    /// `ℓ_n ↦ n`.
    pub line_map: BTreeMap<u64, u64>,
    /// Per source line `ℓ_n`: chosen column `↦ k`.
    pub row_maps: BTreeMap<u64, BTreeMap<u64, u64>>,
    /// `L̄∘f∘R` on the codes and on `(0|0)`.
    pub f_star: PointFn,
    /// True when no spare domain point was left for `R((0|0))` and it had to
    /// reuse the preimage behind `(0|1⊕0)`.
    pub default_shared: bool,
}

impl NormalizedWitness {
    pub fn default_value(&self) -> Point {
        self.f_star[&unary(Point::ORIGIN)]
    }

    pub fn r_certificate(&self) -> CiCertificate {
        let range: Vec<Point> = self.r.iter().map(|(_, p)| *p).filter(|p| *p != Point::ORIGIN).collect();
        CiCertificate::RangeWidth {
            bound: width(&range).width,
        }
    }
}

/// Chooses lines `ℓ_{N-1}, …, ℓ_1` (largest demand first, each time the
/// unused line with the fewest sufficient points) and relabels them.
pub fn normalize_f(f: &PointFn, horizon: u64) -> Result<NormalizedWitness, SynthesisError> {
    if f.arity().len() != 1 {
        return Err(SynthesisError::NotUnary { arity: f.arity().len() });
    }
    // Per image point, the preimage with the least y-coordinate.
    let mut preimage: BTreeMap<Point, Point> = BTreeMap::new();
    for (u, v) in f.iter() {
        let p = u.points().next().expect("unary");
        preimage
            .entry(*v)
            .and_modify(|q| {
                if p.line_order_key() < q.line_order_key() {
                    *q = p;
                }
            })
            .or_insert(p);
    }
    let mut by_line: BTreeMap<u64, Vec<Point>> = BTreeMap::new();
    for v in preimage.keys() {
        by_line.entry(v.line()).or_default().push(*v);
    }

    let mut r = PointFn::new(IndexSet::range(1));
    let mut l = PointFn::new(IndexSet::range(1));
    let mut line_map = BTreeMap::new();
    let mut row_maps: BTreeMap<u64, BTreeMap<u64, u64>> = BTreeMap::new();
    let mut used = BTreeSet::new();
    for n in (1..horizon).rev() {
        let (&line, points) = by_line
            .iter()
            .filter(|(line, pts)| !line_map.contains_key(*line) && pts.len() as u64 >= n)
            .min_by_key(|(line, pts)| (pts.len(), **line))
            .ok_or(SynthesisError::NoLine { n })?;
        line_map.insert(line, n);
        let rows = row_maps.entry(line).or_default();
        for (k, v) in points.iter().take(n as usize).enumerate() {
            let k = k as u64;
            let pre = preimage[v];
            r.insert(unary(Point::new(0, oplus(n, k)?)), pre)?;
            l.insert(unary(*v), Point::new(k, n))?;
            rows.insert(v.x, k);
            used.insert(pre);
        }
    }

    let origin = unary(Point::ORIGIN);
    let mut default_shared = false;
    let spare = if f.contains(&origin) && !used.contains(&Point::ORIGIN) {
        Some(Point::ORIGIN)
    } else {
        f.domain()
            .filter_map(|u| u.points().next())
            .filter(|p| !used.contains(p))
            .min_by_key(|p| p.line_order_key())
    };
    let a0 = match spare {
        Some(p) => p,
        None => {
            default_shared = true;
            *r.get(&unary(Point::new(0, oplus(1, 0)?)))
                .ok_or(SynthesisError::NoLine { n: 1 })?
        }
    };
    r.insert(origin, a0)?;

    let mut f_star = PointFn::new(IndexSet::range(1));
    for (x, pre) in r.iter() {
        let image = f[&unary(*pre)];
        f_star.insert(x.clone(), l.get(&unary(image)).copied().unwrap_or(Point::ORIGIN))?;
    }

    Ok(NormalizedWitness {
        horizon,
        r,
        l,
        line_map,
        row_maps,
        f_star,
        default_shared,
    })
}

/// First `(n, k)` with `k < n < N` at which `f_star` breaks the normal form.
pub fn normal_form_violation(f_star: &PointFn, horizon: u64) -> Option<(u64, u64)> {
    (1..horizon).flat_map(|n| (0..n).map(move |k| (n, k))).find(|&(n, k)| {
        let code = oplus(n, k).expect("k < n");
        f_star.get(&unary(Point::new(0, code))) != Some(&Point::new(k, n))
    })
}

/// The term `L(f(g_1(R(π_1)),…))` computing `f_star` from the original `f`.
pub fn witness_term(
    f: &PointFn,
    reduction: &UnaryReduction,
    candidates: &[CertifiedFn],
    witness: &NormalizedWitness,
) -> Term {
    let r_arg = Expr::compose("R", vec![Expr::Proj(1)]);
    let mut atoms = BTreeMap::from([
        ("f".to_string(), AtomEntry::witness(f.clone())),
        (
            "R".to_string(),
            AtomEntry::ci(witness.r.clone(), witness.r_certificate()),
        ),
        (
            "L".to_string(),
            AtomEntry::ci(witness.l.clone(), CiCertificate::LineRelabeling),
        ),
    ]);
    let args = if reduction.indices.is_empty() {
        vec![r_arg]
    } else {
        reduction
            .indices
            .iter()
            .map(|&i| {
                let c = &candidates[i];
                let name = format!("g.{}", c.name);
                atoms.insert(name.clone(), AtomEntry::ci(c.function.clone(), c.certificate.clone()));
                Expr::compose(name, vec![r_arg.clone()])
            })
            .collect()
    };
    Term::new(Expr::compose("L", vec![Expr::compose("f", args)]), atoms)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: u64, y: u64) -> Point {
        Point::new(x, y)
    }

    /// The normal form itself on `N`, as a unary graph.
    fn starred(horizon: u64) -> PointFn {
        let mut f = PointFn::new(IndexSet::range(1));
        for n in 1..horizon {
            for k in 0..n {
                f.insert(unary(pt(0, oplus(n, k).unwrap())), pt(k, n)).unwrap();
            }
        }
        f
    }

    #[test]
    fn identity_case() {
        let f = starred(6);
        let w = normalize_f(&f, 6).unwrap();
        assert_eq!(normal_form_violation(&w.f_star, 6), None);
        for (line, n) in &w.line_map {
            assert_eq!(line, n);
        }
        for rows in w.row_maps.values() {
            for (x, k) in rows {
                assert_eq!(x, k);
            }
        }
        for (x, p) in w.r.iter() {
            if x != &unary(Point::ORIGIN) {
                assert_eq!(x, &unary(*p));
            }
        }
    }

    #[test]
    fn worked_code_example() {
        let w = normalize_f(&starred(5), 5).unwrap();
        assert_eq!(w.f_star[&unary(pt(0, oplus(3, 1).unwrap()))], pt(1, 3));
    }

    #[test]
    fn missing_line_is_named() {
        // Lines with 1 and 2 points only; N = 4 needs a line with 3.
        let f = PointFn::from_entries(
            IndexSet::range(1),
            [
                (unary(pt(0, 1)), pt(0, 7)),
                (unary(pt(0, 2)), pt(0, 8)),
                (unary(pt(0, 3)), pt(1, 8)),
            ],
        )
        .unwrap();
        assert_eq!(normalize_f(&f, 4), Err(SynthesisError::NoLine { n: 3 }));
    }

    #[test]
    fn best_fit_keeps_large_lines_for_large_demands() {
        // Line 5 holds 2 points, line 9 holds 1; smallest-index choice for
        // n = 1 would take line 5 and leave nothing for n = 2.
        let f = PointFn::from_entries(
            IndexSet::range(1),
            [
                (unary(pt(0, 1)), pt(0, 5)),
                (unary(pt(0, 2)), pt(1, 5)),
                (unary(pt(0, 3)), pt(4, 9)),
            ],
        )
        .unwrap();
        let w = normalize_f(&f, 3).unwrap();
        assert_eq!(w.line_map, BTreeMap::from([(5, 2), (9, 1)]));
        assert_eq!(normal_form_violation(&w.f_star, 3), None);
        assert!(CiCertificate::LineRelabeling.verify(&w.l).is_ok());
    }

    #[test]
    fn unary_reduction_unchanged() {
        let f = starred(5);
        let red = reduce_to_unary(&f, &[], 3).unwrap();
        assert!(red.indices.is_empty());
        assert_eq!(red.composite, f);
        // The same f passes at a threshold equal to its widest line.
        assert_eq!(reduce_to_unary(&f, &[], 4), Err(SynthesisError::NoUnaryWitness));
    }

    #[test]
    fn binary_reduction_finds_first_failing_pair() {
        let m2 = IndexSet::range(2);
        let domain: Vec<Point> = (1..=4).map(|y| pt(3, y)).collect();
        let ident = PointFn::from_entries(IndexSet::range(1), domain.iter().map(|p| (unary(*p), *p))).unwrap();
        let flat = PointFn::from_entries(IndexSet::range(1), domain.iter().map(|p| (unary(*p), pt(0, p.y)))).unwrap();
        let mut f = PointFn::new(m2);
        for (i, p) in domain.iter().enumerate() {
            f.insert(MTuple::positional(&[*p, pt(0, p.y)]), pt(i as u64, 50))
                .unwrap();
        }
        let cands: Vec<CertifiedFn> = [("id", ident), ("flat", flat)]
            .into_iter()
            .map(|(name, function)| CertifiedFn {
                name: name.into(),
                function,
                certificate: CiCertificate::RangeWidth { bound: 1 },
            })
            .collect();
        let red = reduce_to_unary(&f, &cands, 2).unwrap();
        assert_eq!(red.indices, vec![0, 1]);
        assert_eq!(red.composite.len(), 4);
        assert_eq!(reduce_to_unary(&f, &cands, 4), Err(SynthesisError::NoUnaryWitness));
    }
}
