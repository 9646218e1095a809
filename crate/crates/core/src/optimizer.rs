//! Simulated-annealing search for packings and near-equiangular families.
//!
//! The state is `m` orthonormal representatives. A move perturbs one of them
//! with Gaussian noise and re-orthonormalizes, so every iterate is feasible.
//! For maximin the annealed energy is a soft-min of the pairwise distances
//! whose sharpness grows over the run; the best family is always judged by the
//! true (hard) objective.
//!
//! Restarts run in parallel, each with its own ChaCha stream derived from
//! `(seed, restart)`, so the result does not depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constructions::{pairs, SubspaceFamily};
use crate::distances::{evaluate, Metric};
use crate::error::{Error, Result};
use crate::grassmann::{gaussian_matrix, Subspace};
use crate::linalg::TolerancePolicy;

pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// Maximize the smallest pairwise distance.
    Maximin,
    /// Minimize `var(d) / mean(d)²` over pairwise distances. The normalization
    /// keeps the collapsed family (all distances zero) from being optimal.
    EquiangularVariance,
}

impl Objective {
    fn better(self, a: f64, b: f64) -> bool {
        match self {
            Objective::Maximin => a > b,
            Objective::EquiangularVariance => a < b,
        }
    }
}

fn default_seed() -> u64 {
    DEFAULT_SEED
}
fn default_restarts() -> usize {
    16
}
fn default_max_iters() -> usize {
    20_000
}
fn default_initial_step() -> f64 {
    0.3
}
fn default_final_step() -> f64 {
    1e-4
}
fn default_initial_temperature() -> f64 {
    1e-2
}
fn default_final_temperature() -> f64 {
    1e-7
}
fn default_initial_sharpness() -> f64 {
    20.0
}
fn default_final_sharpness() -> f64 {
    5_000.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PackingProblem {
    pub k: usize,
    pub n: usize,
    pub m: usize,
    pub metric: Metric,
    pub objective: Objective,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_restarts")]
    pub restarts: usize,
    #[serde(default = "default_max_iters")]
    pub max_iters: usize,
    #[serde(default = "default_initial_step")]
    pub initial_step: f64,
    #[serde(default = "default_final_step")]
    pub final_step: f64,
    #[serde(default = "default_initial_temperature")]
    pub initial_temperature: f64,
    #[serde(default = "default_final_temperature")]
    pub final_temperature: f64,
    /// Soft-min sharpness at the start and end of a run (maximin only).
    #[serde(default = "default_initial_sharpness")]
    pub initial_sharpness: f64,
    #[serde(default = "default_final_sharpness")]
    pub final_sharpness: f64,
}

impl PackingProblem {
    /// Problem with the default schedule.
    pub fn new(k: usize, n: usize, m: usize, metric: Metric, objective: Objective) -> Self {
        Self {
            k,
            n,
            m,
            metric,
            objective,
            seed: default_seed(),
            restarts: default_restarts(),
            max_iters: default_max_iters(),
            initial_step: default_initial_step(),
            final_step: default_final_step(),
            initial_temperature: default_initial_temperature(),
            final_temperature: default_final_temperature(),
            initial_sharpness: default_initial_sharpness(),
            final_sharpness: default_final_sharpness(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidProblem(msg));
        if self.m < 2 {
            return fail(format!("m = {} but at least 2 members are needed", self.m));
        }
        if self.k == 0 || self.k > self.n {
            return fail(format!("need 1 <= k <= n, got k={}, n={}", self.k, self.n));
        }
        if self.objective == Objective::Maximin && self.metric == Metric::Theta1 && 2 * self.k > self.n {
            return fail(format!(
                "theta1 vanishes identically on Gr({},{}) since 2k > n",
                self.k, self.n
            ));
        }
        if self.restarts == 0 || self.max_iters == 0 {
            return fail("restarts and max_iters must be positive".into());
        }
        let schedule = [
            ("initial_step", self.initial_step),
            ("final_step", self.final_step),
            ("initial_temperature", self.initial_temperature),
            ("final_temperature", self.final_temperature),
            ("initial_sharpness", self.initial_sharpness),
            ("final_sharpness", self.final_sharpness),
        ];
        if let Some((name, v)) = schedule.iter().find(|(_, v)| !(v.is_finite() && *v > 0.0)) {
            return fail(format!("{name} = {v} must be positive and finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistoryPoint {
    pub iteration: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PackingResult {
    pub family: SubspaceFamily,
    pub objective_value: f64,
    pub best_restart: usize,
    pub best_iteration: usize,
    /// Best-so-far objective of the winning restart, one point per improvement.
    pub history: Vec<HistoryPoint>,
}

/// Hard objective of a family: min distance (maximin) or normalized variance.
pub fn objective_value(
    family: &SubspaceFamily,
    metric: Metric,
    objective: Objective,
    tol: &TolerancePolicy,
) -> Result<f64> {
    let members = family.members();
    let d = pairs(members.len())
        .map(|(i, j)| evaluate(metric, &members[i], &members[j], tol))
        .collect::<Result<Vec<_>>>()?;
    Ok(hard_objective(&d, objective))
}

fn hard_objective(d: &[f64], objective: Objective) -> f64 {
    match objective {
        Objective::Maximin => d.iter().copied().fold(f64::INFINITY, f64::min),
        Objective::EquiangularVariance => normalized_variance(d),
    }
}

fn normalized_variance(d: &[f64]) -> f64 {
    let mean = d.iter().sum::<f64>() / d.len() as f64;
    if mean <= f64::MIN_POSITIVE {
        return f64::INFINITY;
    }
    let var = d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / d.len() as f64;
    var / (mean * mean)
}

/// Energy to minimize during annealing.
fn energy(d: &[f64], objective: Objective, sharpness: f64) -> f64 {
    match objective {
        Objective::Maximin => {
            let lo = d.iter().copied().fold(f64::INFINITY, f64::min);
            let sum: f64 = d.iter().map(|x| (-sharpness * (x - lo)).exp()).sum();
            -(lo - sum.ln() / sharpness)
        }
        Objective::EquiangularVariance => normalized_variance(d),
    }
}

fn geometric(start: f64, end: f64, frac: f64) -> f64 {
    start * (end / start).powf(frac)
}

struct RestartOutcome {
    members: Vec<Subspace>,
    value: f64,
    iteration: usize,
    history: Vec<HistoryPoint>,
}

/// Symmetric pair storage: index of `(i, j)`, `i < j`.
fn pair_index(m: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    i * m - i * (i + 1) / 2 + (j - i - 1)
}

fn run_restart(p: &PackingProblem, restart: usize, tol: &TolerancePolicy) -> Result<RestartOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    rng.set_stream(restart as u64);

    let mut members = (0..p.m)
        .map(|_| Subspace::random(p.k, p.n, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let mut dist = pairs(p.m)
        .map(|(i, j)| evaluate(p.metric, &members[i], &members[j], tol))
        .collect::<Result<Vec<_>>>()?;

    let mut best_value = hard_objective(&dist, p.objective);
    let mut best_members = members.clone();
    let mut best_iteration = 0;
    let mut history = vec![HistoryPoint {
        iteration: 0,
        value: best_value,
    }];
    let mut candidate = dist.clone();

    for iter in 1..=p.max_iters {
        let frac = iter as f64 / p.max_iters as f64;
        let step = geometric(p.initial_step, p.final_step, frac);
        let temperature = geometric(p.initial_temperature, p.final_temperature, frac);
        let sharpness = geometric(p.initial_sharpness, p.final_sharpness, frac);

        let who = rng.random_range(0..p.m);
        let noise = gaussian_matrix(p.n, p.k, &mut rng).scale(step);
        let proposal = match Subspace::from_spanning(&members[who].rep().add(&noise), tol) {
            Ok(s) => s,
            Err(Error::RankDeficient { .. }) => continue,
            Err(e) => return Err(e),
        };
        candidate.copy_from_slice(&dist);
        for j in (0..p.m).filter(|&j| j != who) {
            candidate[pair_index(p.m, who, j)] = evaluate(p.metric, &proposal, &members[j], tol)?;
        }

        let current = energy(&dist, p.objective, sharpness);
        let next = energy(&candidate, p.objective, sharpness);
        let accept = next <= current || {
            let u: f64 = rng.random();
            u < ((current - next) / temperature).exp()
        };
        if !accept {
            continue;
        }
        members[who] = proposal;
        std::mem::swap(&mut dist, &mut candidate);

        let value = hard_objective(&dist, p.objective);
        if p.objective.better(value, best_value) {
            best_value = value;
            best_members.clone_from(&members);
            best_iteration = iter;
            history.push(HistoryPoint {
                iteration: iter,
                value,
            });
        }
    }
    Ok(RestartOutcome {
        members: best_members,
        value: best_value,
        iteration: best_iteration,
        history,
    })
}

pub fn solve(problem: &PackingProblem, tol: &TolerancePolicy) -> Result<PackingResult> {
    problem.validate()?;
    let outcomes = (0..problem.restarts)
        .into_par_iter()
        .map(|r| run_restart(problem, r, tol))
        .collect::<Result<Vec<_>>>()?;

    let (best_restart, best) = outcomes
        .into_iter()
        .enumerate()
        .reduce(|acc, cur| {
            if problem.objective.better(cur.1.value, acc.1.value) {
                cur
            } else {
                acc
            }
        })
        .expect("at least one restart");

    let mut family = SubspaceFamily::new(
        problem.k,
        problem.n,
        best.members,
        format!("pack({})", problem.metric),
    )?;
    family.metric = Some(problem.metric);
    Ok(PackingResult {
        family,
        objective_value: best.value,
        best_restart,
        best_iteration: best.iteration,
        history: best.history,
    })
}

/// Adds `scale ·` standard Gaussian noise to every representative and
/// re-orthonormalizes. `scale = 0` leaves every span unchanged.
pub fn perturb(
    family: &SubspaceFamily,
    scale: f64,
    seed: u64,
    tol: &TolerancePolicy,
) -> Result<SubspaceFamily> {
    if !(scale.is_finite() && scale >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "perturbation scale must be >= 0, got {scale}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let members = family
        .members()
        .iter()
        .map(|s| {
            let noise = gaussian_matrix(s.ambient_dim(), s.dim(), &mut rng).scale(scale);
            Subspace::from_spanning(&s.rep().add(&noise), tol)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = SubspaceFamily::new(
        family.dim(),
        family.ambient_dim(),
        members,
        format!("perturb({})", family.provenance),
    )?;
    out.metric = family.metric;
    Ok(out)
}
