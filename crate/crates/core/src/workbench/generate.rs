use std::collections::BTreeSet;

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    check_admissibility, default_ceiling, Admissibility, GenParams, Instance, PlantedGroup, Profile, WorkbenchError,
};
use crate::algebra::{IndexSet, MTuple, Point, PointFn};
use crate::ideal::CiCertificate;
use crate::synth::CertifiedFn;

const MAX_ATTEMPTS: usize = 200;

struct Builder<'a> {
    rng: &'a mut ChaCha8Rng,
    m: IndexSet,
    horizon: u64,
    theta: u64,
    g: PointFn,
    values: BTreeSet<Point>,
}

impl Builder<'_> {
    fn point(&mut self, ys: std::ops::Range<u64>) -> Point {
        Point::new(self.rng.gen_range(0..self.horizon), self.rng.gen_range(ys))
    }

    fn fresh_value(&mut self) -> Point {
        loop {
            let v = Point::new(self.rng.gen_range(0..self.horizon), self.rng.gen_range(0..self.horizon));
            if self.values.insert(v) {
                return v;
            }
        }
    }

    /// Inserts a tuple drawn by `draw`, redrawing on collisions.
    fn insert_with<F>(&mut self, value: Point, mut draw: F) -> Result<(), WorkbenchError>
    where
        F: FnMut(&mut Self) -> MTuple,
    {
        for _ in 0..MAX_ATTEMPTS {
            let u = draw(self);
            if !self.g.contains(&u) {
                self.g.insert(u, value).expect("index set matches");
                return Ok(());
            }
        }
        Err(WorkbenchError::Unsatisfiable(format!(
            "no room for another tuple with value {value}; raise the horizon"
        )))
    }

    fn thrifty_part(&mut self) -> Result<(), WorkbenchError> {
        let pool: Vec<Point> = (0..self.rng.gen_range(3..=8)).map(|_| self.fresh_value()).collect();
        // Leave most of the low region free for the planted groups.
        let capacity = (self.horizon * self.theta).saturating_pow(self.m.len() as u32) / 4;
        let count = self.rng.gen_range(20..=60).min(capacity);
        let m = self.m.clone();
        let theta = self.theta;
        for _ in 0..count {
            let value = *pool.choose(self.rng).expect("nonempty pool");
            self.insert_with(value, |b| m.iter().map(|i| (i, b.point(0..theta))).collect())?;
        }
        Ok(())
    }

    fn group(&mut self, subset: &IndexSet, reserved_y: u64) -> Result<PlantedGroup, WorkbenchError> {
        let m = self.m.clone();
        let theta = self.theta;
        let high = theta..theta + self.horizon;
        let key: MTuple = subset.iter().map(|i| (i, self.point(0..theta))).collect();
        let value = self.fresh_value();
        let surplus = self.rng.gen_range(0..=2);
        let above = self.rng.gen_range(1..=4);
        let rest = m.difference(subset);
        for _ in 0..=surplus {
            self.insert_with(value, |b| {
                let z: MTuple = rest.iter().map(|i| (i, b.point(reserved_y..reserved_y + 1))).collect();
                key.union(&z).expect("disjoint blocks")
            })?;
        }
        for _ in 0..above {
            self.insert_with(value, |b| {
                let z: MTuple = rest.iter().map(|i| (i, b.point(high.clone()))).collect();
                key.union(&z).expect("disjoint blocks")
            })?;
        }
        Ok(PlantedGroup {
            subset: subset.clone(),
            key,
            value,
            reserved_y,
            surplus,
            above,
        })
    }

    /// Groups for block `subset`, each with its own reserved y-coordinate.
    fn groups(&mut self, subset: &IndexSet, max: usize) -> Result<Vec<PlantedGroup>, WorkbenchError> {
        let limit = max.min(self.theta as usize);
        let low = usize::from(subset.is_empty()).min(limit);
        let count = self.rng.gen_range(low..=limit);
        let reserved = index::sample(self.rng, self.theta as usize, count);
        reserved.into_iter().map(|r| self.group(subset, r as u64)).collect()
    }
}

struct Witness {
    unary: PointFn,
    lines: Vec<u64>,
    rows: Vec<Vec<u64>>,
}

fn unary(p: Point) -> MTuple {
    MTuple::positional(&[p])
}

/// The normal form hidden behind random line, row and domain relabelings:
/// a width-1 domain whose points all have positive x-coordinate, mapped onto
/// `n` points of a line `ℓ_n` for each `n < N`, plus a few spare points on
/// lines of their own.
fn plant_witness(rng: &mut ChaCha8Rng, horizon: u64, ceiling: u64) -> Witness {
    let needed = (horizon * (horizon - 1) / 2) as usize;
    let spare = rng.gen_range(1..=3);
    let ys = index::sample(rng, ceiling as usize, needed + spare);
    let mut domain: Vec<Point> = ys
        .into_iter()
        .map(|y| Point::new(rng.gen_range(1..horizon), y as u64))
        .collect();
    domain.shuffle(rng);
    let line_pool = index::sample(rng, ceiling as usize, horizon as usize - 1 + spare).into_vec();
    let (lines, spare_lines) = line_pool.split_at(horizon as usize - 1);

    let mut f = PointFn::new(IndexSet::range(1));
    let mut rows = Vec::with_capacity(lines.len());
    let mut points = domain.into_iter();
    for (n, &line) in (1..horizon).zip(lines) {
        let columns: Vec<u64> = index::sample(rng, ceiling as usize, n as usize)
            .into_iter()
            .map(|x| x as u64)
            .collect();
        for &x in &columns {
            let d = points.next().expect("enough domain points");
            f.insert(unary(d), Point::new(x, line as u64)).expect("fresh point");
        }
        rows.push(columns);
    }
    for &line in spare_lines {
        let d = points.next().expect("enough domain points");
        let x = rng.gen_range(0..ceiling);
        f.insert(unary(d), Point::new(x, line as u64)).expect("fresh point");
    }
    Witness {
        unary: f,
        lines: lines.iter().map(|&l| l as u64).collect(),
        rows,
    }
}

/// A binary `f` that yields the witness as `f(id, flat)`, with unary
/// candidates `const (0|0)`, `id` and `flat: (x|y) ↦ (0|y)`.
fn binary_witness(rng: &mut ChaCha8Rng, w: &PointFn, ceiling: u64) -> (PointFn, Vec<CertifiedFn>) {
    let mut f = PointFn::new(IndexSet::range(2));
    for (u, v) in w.iter() {
        let d = u.get(1).expect("unary");
        f.insert(MTuple::positional(&[d, Point::new(0, d.y)]), *v)
            .expect("distinct domain");
    }
    let decoy = Point::new(rng.gen_range(0..ceiling), rng.gen_range(0..ceiling));
    f.insert(MTuple::positional(&[Point::ORIGIN, Point::ORIGIN]), decoy)
        .expect("domain points have positive x");

    let build = |name: &str, map: fn(Point) -> Point| CertifiedFn {
        name: name.to_string(),
        function: PointFn::from_entries(
            IndexSet::range(1),
            w.domain().map(|u| (u.clone(), map(u.get(1).expect("unary")))),
        )
        .expect("distinct domain"),
        certificate: CiCertificate::RangeWidth { bound: 1 },
    };
    let candidates = vec![
        build("const", |_| Point::ORIGIN),
        build("id", |p| p),
        build("flat", |p| Point::new(0, p.y)),
    ];
    (f, candidates)
}

pub fn generate_instance(params: &GenParams) -> Result<Instance, WorkbenchError> {
    let GenParams {
        m,
        horizon,
        seed,
        profile,
        ..
    } = *params;
    let theta = params.theta();
    if !(1..=3).contains(&m) {
        return Err(WorkbenchError::InvalidParams(format!(
            "m = {m}; supported arities are 1 to 3"
        )));
    }
    if !(4..=64).contains(&horizon) {
        return Err(WorkbenchError::InvalidParams(format!(
            "horizon {horizon} outside 4..=64"
        )));
    }
    if theta == 0 || theta >= horizon {
        return Err(WorkbenchError::InvalidParams(format!(
            "θ = {theta} must satisfy 0 < θ < N = {horizon}"
        )));
    }
    if let Some(a) = params.f_arity.filter(|a| !(1..=2).contains(a)) {
        return Err(WorkbenchError::InvalidParams(format!(
            "f arity {a}; supported are 1 and 2"
        )));
    }
    let ceiling = default_ceiling(horizon);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let mut builder = Builder {
        rng: &mut rng,
        m: IndexSet::range(m),
        horizon,
        theta,
        g: PointFn::new(IndexSet::range(m)),
        values: BTreeSet::new(),
    };
    builder.thrifty_part()?;
    let mut groups = Vec::new();
    if profile == Profile::Mixed {
        for s in IndexSet::range(m).subsets() {
            if s.len() < m {
                let max = if s.is_empty() { 3 } else { 2 };
                groups.extend(builder.groups(&s, max)?);
            }
        }
    }
    let g = builder.g;

    let witness = plant_witness(&mut rng, horizon, ceiling);
    let binary = params.f_arity.unwrap_or_else(|| rng.gen_range(1..=2)) == 2;
    let (f, candidates, planted_indices) = if binary {
        let (f, c) = binary_witness(&mut rng, &witness.unary, ceiling);
        (f, c, vec![1, 2])
    } else {
        (witness.unary, Vec::new(), Vec::new())
    };

    let instance = Instance {
        m,
        horizon,
        theta,
        ceiling,
        seed,
        profile,
        g,
        f,
        candidates,
        admissibility: Admissibility {
            groups,
            witness_lines: witness.lines,
            witness_rows: witness.rows,
            planted_indices,
        },
    };
    let report = check_admissibility(&instance);
    if !report.pass {
        let failed: Vec<String> = report
            .checks
            .iter()
            .filter(|c| !c.pass)
            .map(|c| format!("{}: {}", c.name, c.detail.as_deref().unwrap_or("failed")))
            .collect();
        return Err(WorkbenchError::NotAdmissible(failed.join("; ")));
    }
    Ok(instance)
}
