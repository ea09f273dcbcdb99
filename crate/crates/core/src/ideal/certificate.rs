use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::width;
use crate::algebra::{MTuple, Point, PointFn};

/// Evidence that a finitely supported function belongs to the small clone.
///
/// Certificates are checked on the entries whose value is not `(0|0)`. The
/// remaining entries have range `{(0|0)}`, of width 1, so splitting them off
/// leaves a disjoint union of two members of the clone.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CiCertificate {
    /// Agrees with the projection onto `index`.
    Projection { index: usize },
    /// The range has width at most `bound`.
    RangeWidth { bound: usize },
    /// Agrees with the projection onto `index` except on a set whose image
    /// has width at most `bound`.
    ProjectionOrRange { index: usize, bound: usize },
    /// Unary; maps each line into a single line, distinct lines to distinct
    /// lines, injectively.
    LineRelabeling,
    /// Arguments are `m` coordinates followed by one slot per `(S,j)`; every
    /// product of width-1 factors is mapped to a set of width at most `m!`.
    MainLemma { m: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CertificateFailure {
    #[error("value at {tuple} differs from projection {index}")]
    NotProjection { index: usize, tuple: MTuple },
    #[error("range width {found} exceeds {bound}")]
    RangeTooWide { found: usize, bound: usize },
    #[error("line relabeling violated at {tuple}")]
    NotLineRelabeling { tuple: MTuple },
    #[error("expected arity {expected}, found {found}")]
    Arity { expected: usize, found: usize },
}

pub(crate) fn factorial(m: usize) -> usize {
    (1..=m).product()
}

impl CiCertificate {
    pub fn verify(&self, p: &PointFn) -> Result<(), CertificateFailure> {
        let core: Vec<(&MTuple, &Point)> = p.iter().filter(|(_, v)| **v != Point::ORIGIN).collect();
        match *self {
            CiCertificate::Projection { index } => match core.iter().find(|(u, v)| u.get(index) != Some(**v)) {
                Some((u, _)) => Err(CertificateFailure::NotProjection {
                    index,
                    tuple: (*u).clone(),
                }),
                None => Ok(()),
            },
            CiCertificate::RangeWidth { bound } => check_width(core.iter().map(|(_, v)| *v), bound),
            CiCertificate::ProjectionOrRange { index, bound } => check_width(
                core.iter().filter(|(u, v)| u.get(index) != Some(**v)).map(|(_, v)| *v),
                bound,
            ),
            CiCertificate::LineRelabeling => {
                if p.arity().len() != 1 {
                    return Err(CertificateFailure::Arity {
                        expected: 1,
                        found: p.arity().len(),
                    });
                }
                let mut line_map: BTreeMap<u64, u64> = BTreeMap::new();
                let mut image_lines: BTreeMap<u64, u64> = BTreeMap::new();
                let mut seen: BTreeSet<Point> = BTreeSet::new();
                for (u, v) in &core {
                    let from = u.points().next().expect("unary").line();
                    let ok = *line_map.entry(from).or_insert(v.line()) == v.line()
                        && *image_lines.entry(v.line()).or_insert(from) == from
                        && seen.insert(**v);
                    if !ok {
                        return Err(CertificateFailure::NotLineRelabeling { tuple: (*u).clone() });
                    }
                }
                Ok(())
            }
            CiCertificate::MainLemma { m } => {
                let expected = m + m * (1usize << m.saturating_sub(1));
                if p.arity().len() != expected {
                    return Err(CertificateFailure::Arity {
                        expected,
                        found: p.arity().len(),
                    });
                }
                let bound = factorial(m);
                for family in canonical_families(&core) {
                    let image = core
                        .iter()
                        .filter(|(u, _)| u.iter().all(|(i, pt)| family[&i].get(&pt.line()) == Some(&pt.x)))
                        .map(|(_, v)| *v);
                    check_width(image, bound)?;
                }
                Ok(())
            }
        }
    }
}

fn check_width<'a, I: Iterator<Item = &'a Point>>(points: I, bound: usize) -> Result<(), CertificateFailure> {
    let found = width(points).width;
    if found <= bound {
        Ok(())
    } else {
        Err(CertificateFailure::RangeTooWide { found, bound })
    }
}

/// Two width-1 factor families read off the graph: per argument index and
/// line, the smallest and the largest occurring column.
fn canonical_families(core: &[(&MTuple, &Point)]) -> [BTreeMap<usize, BTreeMap<u64, u64>>; 2] {
    let mut low: BTreeMap<usize, BTreeMap<u64, u64>> = BTreeMap::new();
    let mut high: BTreeMap<usize, BTreeMap<u64, u64>> = BTreeMap::new();
    for (u, _) in core {
        for (i, p) in u.iter() {
            let l = low.entry(i).or_default().entry(p.line()).or_insert(p.x);
            *l = (*l).min(p.x);
            let h = high.entry(i).or_default().entry(p.line()).or_insert(p.x);
            *h = (*h).max(p.x);
        }
    }
    [low, high]
}
