use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A finite set of positive argument indices, such as `M = {1,…,m}` or a
/// subset `S ⊆ M`.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexSet(BTreeSet<usize>);

impl IndexSet {
    pub fn empty() -> Self {
        IndexSet(BTreeSet::new())
    }

    /// `{1,…,m}`.
    pub fn range(m: usize) -> Self {
        IndexSet((1..=m).collect())
    }

    pub fn singleton(i: usize) -> Self {
        IndexSet(BTreeSet::from([i]))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.0.contains(&i)
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn is_subset(&self, other: &IndexSet) -> bool {
        self.0.is_subset(&other.0)
    }

    pub fn is_disjoint(&self, other: &IndexSet) -> bool {
        self.0.is_disjoint(&other.0)
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        IndexSet(self.0.union(&other.0).copied().collect())
    }

    pub fn difference(&self, other: &IndexSet) -> IndexSet {
        IndexSet(self.0.difference(&other.0).copied().collect())
    }

    pub fn with(&self, i: usize) -> IndexSet {
        let mut set = self.0.clone();
        set.insert(i);
        IndexSet(set)
    }

    pub fn max(&self) -> Option<usize> {
        self.0.last().copied()
    }

    /// All subsets, ordered by cardinality and then lexicographically.
    pub fn subsets(&self) -> Vec<IndexSet> {
        let elems: Vec<usize> = self.iter().collect();
        let mut out: Vec<IndexSet> = (0u64..(1u64 << elems.len()))
            .map(|mask| {
                IndexSet(
                    elems
                        .iter()
                        .enumerate()
                        .filter(|(bit, _)| mask & (1 << bit) != 0)
                        .map(|(_, &e)| e)
                        .collect(),
                )
            })
            .collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }
}

impl FromIterator<usize> for IndexSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        let set: BTreeSet<usize> = iter.into_iter().collect();
        debug_assert!(!set.contains(&0), "indices are positive");
        IndexSet(set)
    }
}

impl<const N: usize> From<[usize; N]> for IndexSet {
    fn from(items: [usize; N]) -> Self {
        items.into_iter().collect()
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (pos, i) in self.iter().enumerate() {
            if pos > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}
