//! Terms over a basis of named atoms, closed under composition.
//!
//! An atom is a finitely supported point-valued function. `Witness` atoms
//! stand for the distinguished operation; `CiAtom`s carry a certificate of
//! membership in the small clone.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{bar_extend, AlgebraError, MTuple, Point, PointFn};
use crate::ideal::CiCertificate;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expr {
    /// `π_k`: the argument with index `k`.
    Proj(usize),
    /// An atom applied directly to the input tuple.
    Atom(String),
    /// `head(args…)`; the arguments fill the head's index set in ascending
    /// order.
    Compose { head: String, args: Vec<Expr> },
}

impl Expr {
    pub fn compose(head: impl Into<String>, args: Vec<Expr>) -> Expr {
        Expr::Compose {
            head: head.into(),
            args,
        }
    }

    /// Replaces every projection `π_k` by `subst(k)`, leaving it in place when
    /// `subst` returns `None`.
    pub fn substitute<F>(&self, subst: &F) -> Expr
    where
        F: Fn(usize) -> Option<Expr>,
    {
        match self {
            Expr::Proj(k) => subst(*k).unwrap_or(Expr::Proj(*k)),
            Expr::Atom(name) => Expr::Atom(name.clone()),
            Expr::Compose { head, args } => Expr::Compose {
                head: head.clone(),
                args: args.iter().map(|a| a.substitute(subst)).collect(),
            },
        }
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        if let Expr::Compose { args, .. } = self {
            for a in args {
                a.visit(f);
            }
        }
    }

    pub fn size(&self) -> usize {
        let mut n = 0;
        self.visit(&mut |_| n += 1);
        n
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Proj(_) | Expr::Atom(_) => 1,
            Expr::Compose { args, .. } => 1 + args.iter().map(Expr::depth).max().unwrap_or(0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum AtomClass {
    Witness,
    CiAtom { certificate: CiCertificate },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomEntry {
    #[serde(flatten)]
    pub class: AtomClass,
    pub function: PointFn,
}

impl AtomEntry {
    pub fn witness(function: PointFn) -> Self {
        AtomEntry {
            class: AtomClass::Witness,
            function,
        }
    }

    pub fn ci(function: PointFn, certificate: CiCertificate) -> Self {
        AtomEntry {
            class: AtomClass::CiAtom { certificate },
            function,
        }
    }

    pub fn is_witness(&self) -> bool {
        matches!(self.class, AtomClass::Witness)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub expr: Expr,
    pub atoms: BTreeMap<String, AtomEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermStats {
    pub size: usize,
    pub depth: usize,
    pub atom_occurrences: BTreeMap<String, usize>,
    pub witness_atoms: usize,
    pub ci_atoms: usize,
}

enum Mode<'a> {
    Strict,
    /// Missing values of `CiAtom`s read as `(0|0)`; the queried tuples are
    /// recorded per atom.
    Extending(&'a mut BTreeMap<String, BTreeSet<MTuple>>),
}

impl Term {
    pub fn new(expr: Expr, atoms: BTreeMap<String, AtomEntry>) -> Self {
        Term { expr, atoms }
    }

    /// Checks that every atom resolves and every composition has as many
    /// arguments as its head has indices.
    pub fn validate(&self) -> Result<(), AlgebraError> {
        let mut result = Ok(());
        self.expr.visit(&mut |e| {
            if result.is_err() {
                return;
            }
            match e {
                Expr::Atom(name) => {
                    if !self.atoms.contains_key(name) {
                        result = Err(AlgebraError::UnresolvedAtom(name.clone()));
                    }
                }
                Expr::Compose { head, args } => match self.atoms.get(head) {
                    None => result = Err(AlgebraError::UnresolvedAtom(head.clone())),
                    Some(entry) if entry.function.arity().len() != args.len() => {
                        result = Err(AlgebraError::ArgumentCount {
                            expected: entry.function.arity().len(),
                            found: args.len(),
                        })
                    }
                    Some(_) => {}
                },
                Expr::Proj(_) => {}
            }
        });
        result
    }

    /// Evaluates at `u`; `Ok(None)` is the undefined marker and propagates
    /// through compositions.
    pub fn eval(&self, u: &MTuple) -> Result<Option<Point>, AlgebraError> {
        self.eval_expr(&self.expr, u, &mut Mode::Strict)
    }

    fn eval_expr(&self, expr: &Expr, u: &MTuple, mode: &mut Mode<'_>) -> Result<Option<Point>, AlgebraError> {
        match expr {
            Expr::Proj(k) => u.get(*k).map(Some).ok_or_else(|| AlgebraError::ProjectionOutOfRange {
                index: *k,
                arity: u.index_set(),
            }),
            Expr::Atom(name) => self.apply(name, u, mode),
            Expr::Compose { head, args } => {
                let entry = self.atom(head)?;
                if entry.function.arity().len() != args.len() {
                    return Err(AlgebraError::ArgumentCount {
                        expected: entry.function.arity().len(),
                        found: args.len(),
                    });
                }
                let mut values = Vec::with_capacity(args.len());
                for a in args {
                    match self.eval_expr(a, u, mode)? {
                        Some(p) => values.push(p),
                        None => return Ok(None),
                    }
                }
                let w = MTuple::over(entry.function.arity(), &values)?;
                self.apply(head, &w, mode)
            }
        }
    }

    fn atom(&self, name: &str) -> Result<&AtomEntry, AlgebraError> {
        self.atoms
            .get(name)
            .ok_or_else(|| AlgebraError::UnresolvedAtom(name.to_string()))
    }

    fn apply(&self, name: &str, w: &MTuple, mode: &mut Mode<'_>) -> Result<Option<Point>, AlgebraError> {
        let entry = self.atom(name)?;
        match entry.function.eval(w)? {
            Some(p) => Ok(Some(*p)),
            None => match mode {
                Mode::Extending(queries) if !entry.is_witness() => {
                    queries.entry(name.to_string()).or_default().insert(w.clone());
                    Ok(Some(Point::ORIGIN))
                }
                _ => Ok(None),
            },
        }
    }

    /// Replaces every `CiAtom` by its `(0|0)`-extension over the tuples at
    /// which evaluating the term on `inputs` queries it.
    pub fn extend_ci_atoms<'a, I>(&self, inputs: I) -> Result<Term, AlgebraError>
    where
        I: IntoIterator<Item = &'a MTuple>,
    {
        let mut queries = BTreeMap::new();
        for u in inputs {
            self.eval_expr(&self.expr, u, &mut Mode::Extending(&mut queries))?;
        }
        let mut out = self.clone();
        for (name, missing) in queries {
            let entry = out.atoms.get_mut(&name).expect("recorded atoms exist");
            let universe: Vec<MTuple> = entry.function.domain().cloned().chain(missing).collect();
            entry.function = bar_extend(&entry.function, &universe)?;
        }
        Ok(out)
    }

    /// Inlines `expansion` for the atom `name`. The expansion's projections
    /// refer to the replaced atom's argument indices.
    pub fn inline_atom(&self, name: &str, expansion: &Term) -> Result<Term, AlgebraError> {
        let arity: Vec<usize> = self.atom(name)?.function.arity().iter().collect();
        let expr = inline_expr(&self.expr, name, &arity, &expansion.expr);
        let mut atoms = self.atoms.clone();
        atoms.remove(name);
        for (other, entry) in &expansion.atoms {
            match atoms.get(other) {
                Some(existing) if existing != entry => return Err(AlgebraError::AtomClash(other.clone())),
                _ => {
                    atoms.insert(other.clone(), entry.clone());
                }
            }
        }
        Ok(Term { expr, atoms })
    }

    pub fn stats(&self) -> TermStats {
        let mut atom_occurrences: BTreeMap<String, usize> = BTreeMap::new();
        self.expr.visit(&mut |e| match e {
            Expr::Atom(name) | Expr::Compose { head: name, .. } => {
                *atom_occurrences.entry(name.clone()).or_default() += 1;
            }
            Expr::Proj(_) => {}
        });
        let witness_atoms = self.atoms.values().filter(|a| a.is_witness()).count();
        TermStats {
            size: self.expr.size(),
            depth: self.expr.depth(),
            atom_occurrences,
            witness_atoms,
            ci_atoms: self.atoms.len() - witness_atoms,
        }
    }
}

fn inline_expr(expr: &Expr, name: &str, arity: &[usize], body: &Expr) -> Expr {
    match expr {
        Expr::Proj(k) => Expr::Proj(*k),
        Expr::Atom(a) if a == name => body.clone(),
        Expr::Atom(a) => Expr::Atom(a.clone()),
        Expr::Compose { head, args } => {
            let args: Vec<Expr> = args.iter().map(|a| inline_expr(a, name, arity, body)).collect();
            if head == name {
                body.substitute(&|k| arity.iter().position(|&i| i == k).map(|pos| args[pos].clone()))
            } else {
                Expr::Compose {
                    head: head.clone(),
                    args,
                }
            }
        }
    }
}
