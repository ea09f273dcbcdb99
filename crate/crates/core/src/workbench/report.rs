use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{check_admissibility, AdmissibilityReport, Check, Instance, Profile};
use crate::algebra::{AtomClass, MTuple, Point, PointFn, Term, TermStats};
use crate::decompose::{verify_decomposition, DecompositionReport};
use crate::ideal::{width, IdealVerdict};
use crate::synth::{
    certify_all_lines, complete_family, end_to_end_synthesize, normal_form_violation, verify_main_lemma,
    verify_q_in_ci, FactorFamily, KTables, PStarIndex, Synthesis,
};

const MAX_LISTED: usize = 20;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PipelineOptions {
    /// Record wall-clock time per stage. Off by default so reports are
    /// reproducible byte for byte.
    pub timing: bool,
    pub lemma_families: usize,
    pub q_products: usize,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            timing: false,
            lemma_families: 4,
            q_products: 2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageOutcome {
    pub stage: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HCheck {
    pub pair: String,
    pub size: usize,
    pub x_zero: bool,
    pub width: usize,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MainLemmaSummary {
    pub families: usize,
    pub bound: usize,
    pub max_image_width: usize,
    pub certificates: usize,
    pub max_qualifying: usize,
    pub failures: Vec<String>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EqualityCheck {
    pub checked: usize,
    pub mismatch_count: usize,
    /// The first few tuples where the term and `g` disagree.
    pub mismatches: Vec<MTuple>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AtomCheck {
    pub name: String,
    pub witness: bool,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermVerification {
    pub equality: EqualityCheck,
    pub atoms: Vec<AtomCheck>,
    pub witness_atoms: usize,
    pub witness_is_f: bool,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Report {
    pub m: usize,
    pub horizon: u64,
    pub theta: u64,
    pub seed: u64,
    pub profile: Profile,
    pub g_size: usize,
    pub admissibility: AdmissibilityReport,
    pub stages: Vec<StageOutcome>,
    pub decomposition: Option<DecompositionReport>,
    pub nontrivial_stages: Option<usize>,
    pub normal_form: Option<Check>,
    pub h_family: Vec<HCheck>,
    pub main_lemma: Option<MainLemmaSummary>,
    pub q_in_ci: Option<IdealVerdict>,
    pub term: Option<TermVerification>,
    pub term_stats: Option<TermStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<BTreeMap<String, u64>>,
    pub pass: bool,
}

/// Evaluates `term` on all of `dom(g)` and re-checks every atom certificate.
pub fn verify_term(inst: &Instance, term: &Term) -> TermVerification {
    let mut mismatches = Vec::new();
    let valid = term.validate();
    for (u, v) in inst.g.iter() {
        let got = match &valid {
            Ok(()) => term.eval(u).ok().flatten(),
            Err(_) => None,
        };
        if got != Some(*v) {
            mismatches.push(u.clone());
        }
    }
    let mismatch_count = mismatches.len();
    mismatches.truncate(MAX_LISTED);
    let equality = EqualityCheck {
        checked: inst.g.len(),
        mismatch_count,
        mismatches,
        pass: mismatch_count == 0 && valid.is_ok(),
    };

    let atoms: Vec<AtomCheck> = term
        .atoms
        .iter()
        .map(|(name, entry)| {
            let verdict = match &entry.class {
                AtomClass::Witness => Ok(()),
                AtomClass::CiAtom { certificate } => certificate.verify(&entry.function).map_err(|e| e.to_string()),
            };
            AtomCheck {
                name: name.clone(),
                witness: entry.is_witness(),
                pass: verdict.is_ok(),
                failure: verdict.err(),
            }
        })
        .collect();
    let witnesses: Vec<&PointFn> = term
        .atoms
        .values()
        .filter(|a| a.is_witness())
        .map(|a| &a.function)
        .collect();
    let witness_is_f = witnesses.len() == 1 && witnesses[0] == &inst.f;
    TermVerification {
        pass: equality.pass && witness_is_f && atoms.iter().all(|a| a.pass),
        witness_atoms: witnesses.len(),
        witness_is_f,
        equality,
        atoms,
    }
}

/// Random width-1 factor families seeded from entries of `Q`, padded with
/// noise and completed on every line the uniqueness argument reads.
pub fn sample_families(
    q_big: &PointFn,
    pstar: &PStarIndex,
    k_tables: &KTables,
    count: usize,
    noise_span: u64,
    rng: &mut ChaCha8Rng,
) -> Vec<FactorFamily> {
    let entries: Vec<&MTuple> = q_big.domain().collect();
    let arity: Vec<usize> = pstar.q_arity().iter().collect();
    (0..count)
        .map(|_| {
            let mut factors: BTreeMap<usize, BTreeSet<Point>> = arity.iter().map(|&i| (i, BTreeSet::new())).collect();
            let add = |factors: &mut BTreeMap<usize, BTreeSet<Point>>, i: usize, p: Point| {
                let b = factors.get_mut(&i).expect("argument index");
                if b.iter().all(|q| q.line() != p.line()) {
                    b.insert(p);
                }
            };
            if !entries.is_empty() {
                let take = rng.gen_range(1..=entries.len().min(4));
                for pos in index::sample(rng, entries.len(), take) {
                    for (i, p) in entries[pos].iter() {
                        add(&mut factors, i, p);
                    }
                }
            }
            for &i in &arity {
                for _ in 0..rng.gen_range(0..=2) {
                    let p = Point::new(rng.gen_range(0..noise_span), rng.gen_range(0..noise_span));
                    add(&mut factors, i, p);
                }
            }
            let family = FactorFamily {
                slots: (0..pstar.len()).map(|t| factors[&pstar.slot(t)].clone()).collect(),
                coords: pstar.coords().iter().map(|i| (i, factors[&i].clone())).collect(),
            };
            complete_family(&family, k_tables).expect("factors are built with width 1")
        })
        .collect()
}

fn merge(a: &FactorFamily, b: &FactorFamily) -> FactorFamily {
    let join = |x: &BTreeSet<Point>, y: &BTreeSet<Point>| x.union(y).copied().collect();
    FactorFamily {
        coords: a.coords.iter().map(|(i, x)| (*i, join(x, &b.coords[i]))).collect(),
        slots: a.slots.iter().zip(&b.slots).map(|(x, y)| join(x, y)).collect(),
    }
}

fn main_lemma_summary(syn: &Synthesis, families: &[FactorFamily]) -> MainLemmaSummary {
    let s = &syn.synthesis;
    let mut summary = MainLemmaSummary {
        families: families.len(),
        bound: 0,
        max_image_width: 0,
        certificates: 0,
        max_qualifying: 0,
        failures: Vec::new(),
        pass: true,
    };
    for (t, family) in families.iter().enumerate() {
        match verify_main_lemma(&s.q_big, &s.pstar, family) {
            Ok(r) => {
                summary.bound = r.bound;
                summary.max_image_width = summary.max_image_width.max(r.image_width);
                if !r.pass {
                    summary
                        .failures
                        .push(format!("family {t}: width {} > {}", r.image_width, r.bound));
                }
            }
            Err(e) => summary.failures.push(format!("family {t}: {e}")),
        }
        match certify_all_lines(&s.q_big, &s.pstar, &s.k_tables, family) {
            Ok(certs) => {
                summary.certificates += certs.len();
                for c in certs {
                    summary.max_qualifying = summary.max_qualifying.max(c.qualifying);
                    if !c.pass {
                        summary
                            .failures
                            .push(format!("family {t}: line {} under {:?}", c.line, c.permutation));
                    }
                }
            }
            Err(e) => summary.failures.push(format!("family {t}: {e}")),
        }
    }
    summary.pass = summary.failures.is_empty();
    summary
}

fn h_checks(syn: &Synthesis) -> Vec<HCheck> {
    let s = &syn.synthesis;
    s.pstar
        .pairs()
        .iter()
        .zip(&s.h_family)
        .map(|((set, j), h)| {
            let range = h.range();
            let x_zero = range.iter().all(|p| p.x == 0);
            let w = width(&range).width;
            HCheck {
                pair: format!("({set},{j})"),
                size: h.len(),
                x_zero,
                width: w,
                pass: x_zero && w <= 1,
            }
        })
        .collect()
}

/// Runs the admissibility check, the full synthesis and every verifier,
/// returning the report together with the synthesis artifacts.
pub fn run_pipeline_with(inst: &Instance, opts: &PipelineOptions) -> (Report, Option<Synthesis>) {
    let mut timing = BTreeMap::new();
    let mut clock = Instant::now();
    let mut lap = |name: &str, timing: &mut BTreeMap<String, u64>| {
        if opts.timing {
            timing.insert(name.to_string(), clock.elapsed().as_millis() as u64);
            clock = Instant::now();
        }
    };

    let admissibility = check_admissibility(inst);
    lap("admissibility", &mut timing);
    let mut report = Report {
        m: inst.m,
        horizon: inst.horizon,
        theta: inst.theta,
        seed: inst.seed,
        profile: inst.profile,
        g_size: inst.g.len(),
        admissibility,
        stages: Vec::new(),
        decomposition: None,
        nontrivial_stages: None,
        normal_form: None,
        h_family: Vec::new(),
        main_lemma: None,
        q_in_ci: None,
        term: None,
        term_stats: None,
        timing_ms: None,
        pass: false,
    };

    let result = end_to_end_synthesize(&inst.g, &inst.f, &inst.candidates, inst.theta, inst.horizon);
    lap("synthesis", &mut timing);
    let syn = match result {
        Ok(syn) => {
            report.stages.push(StageOutcome {
                stage: "synthesis".into(),
                pass: true,
                error: None,
            });
            syn
        }
        Err(e) => {
            report.stages.push(StageOutcome {
                stage: e.stage().into(),
                pass: false,
                error: Some(e.to_string()),
            });
            report.timing_ms = opts.timing.then_some(timing);
            return (report, None);
        }
    };

    let decomposition = verify_decomposition(&inst.g, &syn.decomposition);
    report.nontrivial_stages = Some(syn.decomposition.nontrivial_stages());
    report.decomposition = Some(decomposition);
    report.normal_form = Some(Check {
        name: "normal_form".into(),
        pass: normal_form_violation(&syn.witness.f_star, inst.horizon).is_none(),
        detail: normal_form_violation(&syn.witness.f_star, inst.horizon).map(|(n, k)| format!("fails at n={n}, k={k}")),
    });
    report.h_family = h_checks(&syn);
    lap("decomposition_checks", &mut timing);

    let mut rng = ChaCha8Rng::seed_from_u64(inst.seed ^ 0x9e37_79b9_7f4a_7c15);
    let s = &syn.synthesis;
    let families = sample_families(
        &s.q_big,
        &s.pstar,
        &s.k_tables,
        opts.lemma_families,
        inst.horizon,
        &mut rng,
    );
    if inst.m <= 3 {
        report.main_lemma = Some(main_lemma_summary(&syn, &families));
    }
    let more = sample_families(&s.q_big, &s.pstar, &s.k_tables, opts.q_products, inst.horizon, &mut rng);
    let products: Vec<FactorFamily> = families.iter().zip(&more).map(|(a, b)| merge(a, b)).collect();
    report.q_in_ci = Some(verify_q_in_ci(&s.q_big, &s.pstar, &products, 2));
    lap("main_lemma", &mut timing);

    report.term = Some(verify_term(inst, &syn.term));
    report.term_stats = Some(syn.term.stats());
    lap("term", &mut timing);

    report.pass = report.admissibility.pass
        && report.stages.iter().all(|s| s.pass)
        && report.decomposition.as_ref().is_some_and(|d| d.passed)
        && report.normal_form.as_ref().is_some_and(|c| c.pass)
        && report.h_family.iter().all(|h| h.pass)
        && report.main_lemma.as_ref().is_none_or(|l| l.pass)
        && report.q_in_ci.as_ref().is_some_and(|v| v.pass)
        && report.term.as_ref().is_some_and(|t| t.pass);
    report.timing_ms = opts.timing.then_some(timing);
    (report, Some(syn))
}

pub fn run_pipeline(inst: &Instance, opts: &PipelineOptions) -> Report {
    run_pipeline_with(inst, opts).0
}
