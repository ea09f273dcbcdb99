use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{AlgebraError, IndexSet, Point};

/// A total map from a finite index set to grid points.
///
/// Entries are kept sorted by index, so the derived ordering compares tuples
/// lexicographically index by index.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(from = "BTreeMap<usize, Point>", into = "BTreeMap<usize, Point>")]
pub struct MTuple {
    entries: Vec<(usize, Point)>,
}

impl MTuple {
    /// The empty tuple, the only member of `X^∅`.
    pub fn empty() -> Self {
        MTuple::default()
    }

    /// Tuple indexed by `1..=points.len()`.
    pub fn positional(points: &[Point]) -> Self {
        MTuple {
            entries: points.iter().enumerate().map(|(i, p)| (i + 1, *p)).collect(),
        }
    }

    /// Assigns `points` to the members of `index` in ascending order.
    pub fn over(index: &IndexSet, points: &[Point]) -> Result<Self, AlgebraError> {
        if index.len() != points.len() {
            return Err(AlgebraError::ArgumentCount {
                expected: index.len(),
                found: points.len(),
            });
        }
        Ok(MTuple {
            entries: index.iter().zip(points.iter().copied()).collect(),
        })
    }

    pub fn index_set(&self) -> IndexSet {
        self.entries.iter().map(|(i, _)| *i).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<Point> {
        self.entries
            .binary_search_by_key(&i, |(j, _)| *j)
            .ok()
            .map(|pos| self.entries[pos].1)
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, Point)> + '_ {
        self.entries.iter().copied()
    }

    pub fn points(&self) -> impl Iterator<Item = Point> + '_ {
        self.entries.iter().map(|(_, p)| *p)
    }

    pub fn has_index_set(&self, index: &IndexSet) -> bool {
        self.entries.len() == index.len() && self.entries.iter().zip(index.iter()).all(|((i, _), j)| *i == j)
    }

    /// The restriction to the indices in `index` that this tuple defines.
    pub fn restrict(&self, index: &IndexSet) -> MTuple {
        MTuple {
            entries: self
                .entries
                .iter()
                .filter(|(i, _)| index.contains(*i))
                .copied()
                .collect(),
        }
    }

    /// `self ∪ other` for tuples over disjoint index sets.
    pub fn union(&self, other: &MTuple) -> Result<MTuple, AlgebraError> {
        let mut merged: BTreeMap<usize, Point> = self.entries.iter().copied().collect();
        for (i, p) in other.iter() {
            if merged.insert(i, p).is_some() {
                return Err(AlgebraError::OverlappingIndices {
                    left: self.index_set(),
                    right: other.index_set(),
                });
            }
        }
        Ok(merged.into())
    }

    /// Least y-coordinate among the components; `None` for the empty tuple.
    pub fn min_y(&self) -> Option<u64> {
        self.points().map(|p| p.y).min()
    }

    pub fn max_y(&self) -> Option<u64> {
        self.points().map(|p| p.y).max()
    }
}

impl From<BTreeMap<usize, Point>> for MTuple {
    fn from(map: BTreeMap<usize, Point>) -> Self {
        MTuple {
            entries: map.into_iter().collect(),
        }
    }
}

impl From<MTuple> for BTreeMap<usize, Point> {
    fn from(t: MTuple) -> Self {
        t.entries.into_iter().collect()
    }
}

impl FromIterator<(usize, Point)> for MTuple {
    fn from_iter<I: IntoIterator<Item = (usize, Point)>>(iter: I) -> Self {
        iter.into_iter().collect::<BTreeMap<_, _>>().into()
    }
}

impl fmt::Display for MTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "⟨")?;
        for (pos, (i, p)) in self.iter().enumerate() {
            if pos > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{i}:{p}")?;
        }
        write!(f, "⟩")
    }
}
