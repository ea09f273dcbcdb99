//! Writing a hereditarily thrifty `q` as
//! `q(u) = Q(u, (f(h^{S,j}(u)) : (S,j) ∈ P*(M)))` and assembling the whole
//! pipeline into one term over the witness and the small clone.

mod lemma;
mod witness;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use lemma::{
    certify_all_lines, complete_family, complete_width1, main_lemma_certify, permutations, verify_main_lemma,
    verify_q_in_ci, ChainStep, FactorFamily, LemmaCertificate, MainLemmaReport,
};
pub use witness::{
    normal_form_violation, normalize_f, reduce_to_unary, witness_term, CertifiedFn, NormalizedWitness, UnaryReduction,
};

use crate::algebra::{fibers, AlgebraError, AtomEntry, Expr, IndexSet, MTuple, Point, PointFn, Term};
use crate::decompose::{hereditary_decompose, DecompositionError, DecompositionTrace};
use crate::ideal::{k_table, CiCertificate, IdealError};
use crate::serde_util::pairs;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SynthesisError {
    #[error("n⊕k needs k < n, got n={n}, k={k}")]
    OplusDomain { n: u64, k: u64 },
    #[error("no unary witness in candidate set")]
    NoUnaryWitness,
    #[error("expected a unary witness, found arity {arity}")]
    NotUnary { arity: usize },
    #[error("no unused codomain line holds {n} points")]
    NoLine { n: u64 },
    #[error("no K entry for fiber {key} over {subset} at line {line}")]
    MissingK { subset: IndexSet, key: MTuple, line: u64 },
    #[error("normalized witness undefined at {point}")]
    WitnessUndefined { point: Point },
    #[error("factor has width {width}, expected at most 1")]
    FactorWidth { width: usize },
    #[error("factor {factor} misses line {line}; complete it first")]
    IncompleteLine { factor: String, line: u64 },
    #[error(transparent)]
    Ideal(#[from] IdealError),
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
}

/// `n⊕k = n²+k` for `k < n`.
pub fn oplus(n: u64, k: u64) -> Result<u64, SynthesisError> {
    if k < n {
        Ok(n * n + k)
    } else {
        Err(SynthesisError::OplusDomain { n, k })
    }
}

/// The pairs `(S,j)` with `S ⊆ M`, `j ∉ S`; `S` by size then
/// lexicographically, `j` ascending. Slot `t` is argument `max(M)+1+t` of `Q`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PStarIndex {
    coords: IndexSet,
    pairs: Vec<(IndexSet, usize)>,
}

pub fn pstar(m: &IndexSet) -> PStarIndex {
    let pairs = m
        .subsets()
        .into_iter()
        .flat_map(|s| m.difference(&s).iter().map(move |j| (s.clone(), j)).collect::<Vec<_>>())
        .collect();
    PStarIndex {
        coords: m.clone(),
        pairs,
    }
}

impl PStarIndex {
    pub fn m(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &IndexSet {
        &self.coords
    }

    pub fn pairs(&self) -> &[(IndexSet, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn position(&self, s: &IndexSet, j: usize) -> Option<usize> {
        self.pairs.iter().position(|(t, i)| t == s && *i == j)
    }

    fn base(&self) -> usize {
        self.coords.iter().next_back().unwrap_or(0)
    }

    pub fn slot(&self, t: usize) -> usize {
        self.base() + 1 + t
    }

    /// Slot position of argument index `i` of `Q`, if it is a slot.
    pub fn slot_position(&self, i: usize) -> Option<usize> {
        (i > self.base() && i - self.base() - 1 < self.len()).then(|| i - self.base() - 1)
    }

    /// Argument indices of `Q`.
    pub fn q_arity(&self) -> IndexSet {
        self.coords
            .iter()
            .chain((0..self.len()).map(|t| self.slot(t)))
            .collect()
    }

    pub fn atom_name(&self, t: usize) -> String {
        let (s, j) = &self.pairs[t];
        format!("h{s}/{j}")
    }
}

/// `K_{q∪c}` per `(S, c)` with `S ⊊ M` and `c` an `S`-block of `dom(q)`.
pub type KTables = BTreeMap<(IndexSet, MTuple), BTreeMap<u64, u64>>;

pub fn k_tables(q: &PointFn, theta: u64) -> Result<KTables, SynthesisError> {
    let mut out = KTables::new();
    for s in q.arity().subsets() {
        if s.len() == q.arity().len() {
            continue;
        }
        for (c, fiber) in fibers(q, &s)? {
            out.insert((s.clone(), c), k_table(&fiber, theta)?);
        }
    }
    Ok(out)
}

/// `h^{S,j}(c∪z) = (0 | K⊕z_j^y)` with `K = K_{q∪c}(q(u)^y)`, when
/// `z_j^y < K`.
pub fn build_h(q: &PointFn, s: &IndexSet, j: usize, tables: &KTables) -> Result<PointFn, SynthesisError> {
    let mut h = PointFn::new(q.arity().clone());
    for (u, v) in q.iter() {
        let c = u.restrict(s);
        let k = tables
            .get(&(s.clone(), c.clone()))
            .and_then(|t| t.get(&v.line()))
            .copied()
            .ok_or_else(|| SynthesisError::MissingK {
                subset: s.clone(),
                key: c,
                line: v.line(),
            })?;
        let zy = u.get(j).expect("j ∈ M").y;
        if zy < k {
            h.insert(u.clone(), Point::new(0, oplus(k, zy)?))?;
        }
    }
    Ok(h)
}

/// `Q(u, v) = q(u)` for the one `v` the term produces: slot `(S,j)` holds
/// `f*(h^{S,j}(u))`, or `f*((0|0))` where `h^{S,j}(u)` is undefined.
pub fn build_q(
    q: &PointFn,
    pstar: &PStarIndex,
    h_family: &[PointFn],
    f_star: &PointFn,
) -> Result<PointFn, SynthesisError> {
    let unary = |p: Point| MTuple::positional(&[p]);
    let lookup = |p: Point| {
        f_star
            .get(&unary(p))
            .copied()
            .ok_or(SynthesisError::WitnessUndefined { point: p })
    };
    let mut q_big = PointFn::new(pstar.q_arity());
    for (u, value) in q.iter() {
        let mut entries: Vec<(usize, Point)> = u.iter().collect();
        for (t, h) in h_family.iter().enumerate() {
            let input = h.get(u).copied().unwrap_or(Point::ORIGIN);
            entries.push((pstar.slot(t), lookup(input)?));
        }
        q_big.insert(entries.into_iter().collect(), *value)?;
    }
    Ok(q_big)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SynthesisResult {
    pub pstar: PStarIndex,
    #[serde(with = "pairs")]
    pub k_tables: KTables,
    /// Aligned with `pstar`.
    pub h_family: Vec<PointFn>,
    pub q_big: PointFn,
    /// Term for `q` over the normalized witness `f*` and the small clone.
    pub term: Term,
}

/// `Q(π_1,…,π_m, f*(h^{S,j}(π_1,…,π_m))…)` with unextended atoms.
pub fn assemble_term(pstar: &PStarIndex, h_family: &[PointFn], q_big: &PointFn, f_star: &PointFn) -> Term {
    let coords: Vec<Expr> = pstar.coords().iter().map(Expr::Proj).collect();
    let mut atoms = BTreeMap::from([
        (
            "Q".to_string(),
            AtomEntry::ci(q_big.clone(), CiCertificate::MainLemma { m: pstar.m() }),
        ),
        ("f*".to_string(), AtomEntry::witness(f_star.clone())),
    ]);
    let mut args = coords.clone();
    for (t, h) in h_family.iter().enumerate() {
        let name = pstar.atom_name(t);
        atoms.insert(
            name.clone(),
            AtomEntry::ci(h.clone(), CiCertificate::RangeWidth { bound: 1 }),
        );
        args.push(Expr::compose("f*", vec![Expr::compose(name, coords.clone())]));
    }
    Term::new(Expr::compose("Q", args), atoms)
}

/// Builds every part for a hereditarily thrifty `q`; the returned term is
/// extended over `dom(q)`.
pub fn synthesize_q(q: &PointFn, theta: u64, f_star: &PointFn) -> Result<SynthesisResult, SynthesisError> {
    let pstar = pstar(q.arity());
    let tables = k_tables(q, theta)?;
    let h_family = pstar
        .pairs()
        .iter()
        .map(|(s, j)| build_h(q, s, *j, &tables))
        .collect::<Result<Vec<_>, _>>()?;
    let q_big = build_q(q, &pstar, &h_family, f_star)?;
    let term = assemble_term(&pstar, &h_family, &q_big, f_star).extend_ci_atoms(q.domain())?;
    Ok(SynthesisResult {
        pstar,
        k_tables: tables,
        h_family,
        q_big,
        term,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PipelineError {
    #[error("reduce: {0}")]
    Reduce(SynthesisError),
    #[error("normalize: {0}")]
    Normalize(SynthesisError),
    #[error("decompose: {0}")]
    Decompose(DecompositionError),
    #[error("synthesize: {0}")]
    Synthesize(SynthesisError),
    #[error("assemble: {0}")]
    Assemble(AlgebraError),
}

impl PipelineError {
    pub fn stage(&self) -> &'static str {
        match self {
            PipelineError::Reduce(_) => "reduce",
            PipelineError::Normalize(_) => "normalize",
            PipelineError::Decompose(_) => "decompose",
            PipelineError::Synthesize(_) => "synthesize",
            PipelineError::Assemble(_) => "assemble",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Synthesis {
    pub reduction: UnaryReduction,
    pub witness: NormalizedWitness,
    pub decomposition: DecompositionTrace,
    pub synthesis: SynthesisResult,
    /// Term for `g` over `f` and the small clone, extended over `dom(g)`.
    pub term: Term,
}

/// The decomposition map as argument expressions: component `j` is `π_j`
/// where it is certified a projection, and an atom `d{j}` otherwise.
fn decomposition_args(trace: &DecompositionTrace, atoms: &mut BTreeMap<String, AtomEntry>) -> BTreeMap<usize, Expr> {
    trace
        .composite_certificates
        .iter()
        .map(|(&j, cert)| {
            let expr = match cert {
                CiCertificate::Projection { .. } => Expr::Proj(j),
                _ => {
                    let name = format!("d{j}");
                    atoms.insert(
                        name.clone(),
                        AtomEntry::ci(trace.composite_h.component(j), cert.clone()),
                    );
                    Expr::Atom(name)
                }
            };
            (j, expr)
        })
        .collect()
}

/// Runs reduction, normalization, decomposition and synthesis, and returns
/// a term over `f` and the small clone agreeing with `g` on `dom(g)`.
pub fn end_to_end_synthesize(
    g: &PointFn,
    f: &PointFn,
    candidates: &[CertifiedFn],
    theta: u64,
    horizon: u64,
) -> Result<Synthesis, PipelineError> {
    let threshold = horizon.saturating_sub(2) as usize;
    let reduction = reduce_to_unary(f, candidates, threshold).map_err(PipelineError::Reduce)?;
    let witness = normalize_f(&reduction.composite, horizon).map_err(PipelineError::Normalize)?;
    let decomposition = hereditary_decompose(g, theta).map_err(PipelineError::Decompose)?;
    let synthesis = synthesize_q(decomposition.g_prime(), theta, &witness.f_star).map_err(PipelineError::Synthesize)?;

    let unextended = assemble_term(&synthesis.pstar, &synthesis.h_family, &synthesis.q_big, &witness.f_star);
    let mut atoms = unextended.atoms.clone();
    let args = decomposition_args(&decomposition, &mut atoms);
    let expr = unextended.expr.substitute(&|k| args.get(&k).cloned());
    let over_g = Term::new(expr, atoms);
    let expansion = witness_term(f, &reduction, candidates, &witness);
    let term = over_g
        .inline_atom("f*", &expansion)
        .and_then(|t| t.extend_ci_atoms(g.domain()))
        .map_err(PipelineError::Assemble)?;
    log::debug!("term size {}, {} atoms", term.expr.size(), term.atoms.len());

    Ok(Synthesis {
        reduction,
        witness,
        decomposition,
        synthesis,
        term,
    })
}
