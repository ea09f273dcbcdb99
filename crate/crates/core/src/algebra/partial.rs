use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{AlgebraError, IndexSet, MTuple, Point};

/// Values a partial function may take: grid points, or tuples when the
/// function maps `X^M` into some `X^T`.
pub trait Value: Clone + Ord + fmt::Debug + fmt::Display + Serialize + DeserializeOwned {}

impl Value for Point {}
impl Value for MTuple {}

/// A finitely supported partial function from tuples over `arity` to `V`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialFn<V> {
    arity: IndexSet,
    graph: BTreeMap<MTuple, V>,
}

pub type PointFn = PartialFn<Point>;
pub type TupleFn = PartialFn<MTuple>;

impl<V: Value> PartialFn<V> {
    /// The empty function over `arity`.
    pub fn new(arity: IndexSet) -> Self {
        PartialFn {
            arity,
            graph: BTreeMap::new(),
        }
    }

    pub fn from_entries<I>(arity: IndexSet, entries: I) -> Result<Self, AlgebraError>
    where
        I: IntoIterator<Item = (MTuple, V)>,
    {
        let mut p = PartialFn::new(arity);
        for (u, v) in entries {
            p.insert(u, v)?;
        }
        Ok(p)
    }

    /// Adds one graph entry. Rejects tuples over the wrong index set and
    /// keys that are already present.
    pub fn insert(&mut self, u: MTuple, v: V) -> Result<(), AlgebraError> {
        self.check_arg(&u)?;
        if self.graph.contains_key(&u) {
            return Err(AlgebraError::DuplicateEntry { tuple: u });
        }
        self.graph.insert(u, v);
        Ok(())
    }

    pub fn arity(&self) -> &IndexSet {
        &self.arity
    }

    pub fn len(&self) -> usize {
        self.graph.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.is_empty()
    }

    pub fn get(&self, u: &MTuple) -> Option<&V> {
        self.graph.get(u)
    }

    pub fn contains(&self, u: &MTuple) -> bool {
        self.graph.contains_key(u)
    }

    /// Evaluates at `u`; `Ok(None)` is the undefined marker.
    pub fn eval(&self, u: &MTuple) -> Result<Option<&V>, AlgebraError> {
        self.check_arg(u)?;
        Ok(self.graph.get(u))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MTuple, &V)> + '_ {
        self.graph.iter()
    }

    pub fn domain(&self) -> impl Iterator<Item = &MTuple> + '_ {
        self.graph.keys()
    }

    pub fn range(&self) -> BTreeSet<V> {
        self.graph.values().cloned().collect()
    }

    /// `p^{-1}[v]`.
    pub fn preimage<'a>(&'a self, v: &'a V) -> impl Iterator<Item = &'a MTuple> + 'a {
        self.graph.iter().filter(move |(_, w)| *w == v).map(|(u, _)| u)
    }

    /// All value preimages at once.
    pub fn preimages(&self) -> BTreeMap<&V, Vec<&MTuple>> {
        let mut out: BTreeMap<&V, Vec<&MTuple>> = BTreeMap::new();
        for (u, v) in &self.graph {
            out.entry(v).or_default().push(u);
        }
        out
    }

    /// The restriction `p↾D` for the tuples of `p`'s domain selected by `keep`.
    pub fn restrict<F>(&self, mut keep: F) -> Self
    where
        F: FnMut(&MTuple, &V) -> bool,
    {
        PartialFn {
            arity: self.arity.clone(),
            graph: self
                .graph
                .iter()
                .filter(|(u, v)| keep(u, v))
                .map(|(u, v)| (u.clone(), v.clone()))
                .collect(),
        }
    }

    /// Graph inclusion `self ⊆ other`.
    pub fn is_subfunction_of(&self, other: &PartialFn<V>) -> bool {
        self.arity == other.arity && self.graph.iter().all(|(u, v)| other.graph.get(u) == Some(v))
    }

    pub fn is_injective(&self) -> bool {
        self.range().len() == self.graph.len()
    }

    pub(crate) fn check_arg(&self, u: &MTuple) -> Result<(), AlgebraError> {
        if u.has_index_set(&self.arity) {
            Ok(())
        } else {
            Err(AlgebraError::IndexMismatch {
                expected: self.arity.clone(),
                found: u.index_set(),
            })
        }
    }

    pub(crate) fn insert_unchecked(&mut self, u: MTuple, v: V) {
        self.graph.insert(u, v);
    }
}

impl TupleFn {
    /// The partial identity on `domain`.
    pub fn identity<'a, I>(arity: IndexSet, domain: I) -> Result<Self, AlgebraError>
    where
        I: IntoIterator<Item = &'a MTuple>,
    {
        PartialFn::from_entries(arity, domain.into_iter().map(|u| (u.clone(), u.clone())))
    }

    /// The component function `π_j ∘ p`.
    pub fn component(&self, j: usize) -> PointFn {
        PartialFn {
            arity: self.arity.clone(),
            graph: self
                .graph
                .iter()
                .filter_map(|(u, v)| v.get(j).map(|p| (u.clone(), p)))
                .collect(),
        }
    }

    /// The index set shared by all values, if the function is nonempty and
    /// consistent.
    pub fn codomain_index(&self) -> Option<IndexSet> {
        let mut sets = self.graph.values().map(MTuple::index_set);
        let first = sets.next()?;
        sets.all(|s| s == first).then_some(first)
    }
}

impl<V: Value> std::ops::Index<&MTuple> for PartialFn<V> {
    type Output = V;

    /// Panics when `u` is outside the domain.
    fn index(&self, u: &MTuple) -> &V {
        self.graph.get(u).unwrap_or_else(|| panic!("{u} is not in the domain"))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PartialFnRepr<V> {
    arity: IndexSet,
    entries: Vec<(MTuple, V)>,
}

impl<V: Value> Serialize for PartialFn<V> {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Borrowed<'a, V> {
            arity: &'a IndexSet,
            entries: Vec<(&'a MTuple, &'a V)>,
        }
        Borrowed {
            arity: &self.arity,
            entries: self.graph.iter().collect(),
        }
        .serialize(serializer)
    }
}

impl<'de, V: Value> Deserialize<'de> for PartialFn<V> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = PartialFnRepr::<V>::deserialize(deserializer)?;
        PartialFn::from_entries(repr.arity, repr.entries).map_err(serde::de::Error::custom)
    }
}

impl<V: Value> fmt::Display for PartialFn<V> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (pos, (u, v)) in self.graph.iter().enumerate() {
            if pos > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{u} ↦ {v}")?;
        }
        write!(f, "}}")
    }
}
