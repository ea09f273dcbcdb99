use serde::{Deserialize, Serialize};

use super::Instance;
use crate::algebra::{IndexSet, MTuple, Point, PointFn};
use crate::decompose::hereditary_decompose;
use crate::synth::{normal_form_violation, normalize_f, reduce_to_unary};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Check {
    fn new(name: &str, outcome: Result<(), String>) -> Self {
        Check {
            name: name.to_string(),
            pass: outcome.is_ok(),
            detail: outcome.err(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AdmissibilityReport {
    pub checks: Vec<Check>,
    pub pass: bool,
}

fn parameters(inst: &Instance) -> Result<(), String> {
    if inst.m == 0 {
        return Err("m must be positive".into());
    }
    if inst.horizon < 3 {
        return Err(format!("horizon {} is below 3", inst.horizon));
    }
    if inst.theta >= inst.horizon {
        return Err(format!("θ = {} is not below N = {}", inst.theta, inst.horizon));
    }
    if inst.g.arity() != &IndexSet::range(inst.m) {
        return Err(format!(
            "g has arity {}, expected {}",
            inst.g.arity(),
            IndexSet::range(inst.m)
        ));
    }
    if inst
        .candidates
        .iter()
        .any(|c| c.function.arity() != &IndexSet::range(1))
    {
        return Err("candidates must be unary".into());
    }
    Ok(())
}

fn below_ceiling(inst: &Instance) -> Result<(), String> {
    let over = |p: &Point| p.x >= inst.ceiling || p.y >= inst.ceiling;
    let first_over = |f: &PointFn| {
        f.iter()
            .flat_map(|(u, v)| u.points().chain([*v]).collect::<Vec<_>>())
            .find(over)
    };
    let functions = [&inst.g, &inst.f]
        .into_iter()
        .chain(inst.candidates.iter().map(|c| &c.function));
    match functions.filter_map(first_over).next() {
        Some(p) => Err(format!("{p} exceeds the coordinate ceiling {}", inst.ceiling)),
        None => Ok(()),
    }
}

fn unary_witness(inst: &Instance) -> Result<PointFn, String> {
    let threshold = inst.horizon.saturating_sub(2) as usize;
    let reduction = reduce_to_unary(&inst.f, &inst.candidates, threshold).map_err(|e| e.to_string())?;
    if reduction.indices != inst.admissibility.planted_indices {
        return Err(format!(
            "search found candidates {:?}, planted {:?}",
            reduction.indices, inst.admissibility.planted_indices
        ));
    }
    Ok(reduction.composite)
}

fn normal_form(unary: &PointFn, horizon: u64) -> Result<(), String> {
    let w = normalize_f(unary, horizon).map_err(|e| e.to_string())?;
    match normal_form_violation(&w.f_star, horizon) {
        Some((n, k)) => Err(format!("normal form fails at n={n}, k={k}")),
        None if !w.f_star.contains(&MTuple::positional(&[Point::ORIGIN])) => Err("no default point".into()),
        None => Ok(()),
    }
}

/// Runs every check the pipeline's choice steps depend on: the planted
/// unary witness is found, normalizes, and every selection step of the
/// decomposition has fresh representatives.
pub fn check_admissibility(inst: &Instance) -> AdmissibilityReport {
    let mut checks = vec![Check::new("parameters", parameters(inst))];
    if checks[0].pass {
        checks.push(Check::new("coordinate_ceiling", below_ceiling(inst)));
        match unary_witness(inst) {
            Ok(unary) => {
                checks.push(Check::new("unary_witness", Ok(())));
                checks.push(Check::new("normal_form", normal_form(&unary, inst.horizon)));
            }
            Err(e) => checks.push(Check::new("unary_witness", Err(e))),
        }
        checks.push(Check::new(
            "selection",
            hereditary_decompose(&inst.g, inst.theta)
                .map(|_| ())
                .map_err(|e| e.to_string()),
        ));
    }
    AdmissibilityReport {
        pass: checks.iter().all(|c| c.pass),
        checks,
    }
}
