//! Classical disorder ensembles: static random parameters per realization,
//! independent trajectories, and an order-independent average.
//!
//! Realization `k` draws from ChaCha8 seeded with the master seed on stream
//! `k`, so any realization can be regenerated on its own and the result does
//! not depend on how realizations are scheduled across threads.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate, IntegratorConfig, LindbladSystem, StateSeries};
use crate::error::{Error, Result};
use crate::qops::{DensityMatrix, Operator, C64};

/// Realizations accumulated sequentially before partial sums are combined.
/// Fixed so the floating-point reduction tree is independent of thread count.
const CHUNK: usize = 16;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RandomParam {
    /// Coupling scale: two-qubit g_m, or the joint g of the three-qubit
    /// pattern (each coupling keeps its ratio to the largest one).
    Coupling,
    Eta,
    GammaDown,
    GammaUp,
}

/// Parameters that share a single uniform draw on [lo, hi].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomGroup {
    pub params: Vec<RandomParam>,
    pub lo: f64,
    pub hi: f64,
}

impl RandomGroup {
    pub fn unit(params: &[RandomParam]) -> Self {
        RandomGroup {
            params: params.to_vec(),
            lo: 0.0,
            hi: 1.0,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomSpec {
    pub groups: Vec<RandomGroup>,
}

impl RandomSpec {
    pub fn none() -> Self {
        RandomSpec::default()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.iter().all(|g| g.params.is_empty())
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = Vec::new();
        for g in &self.groups {
            if !(g.lo.is_finite() && g.hi.is_finite() && g.lo <= g.hi) {
                return Err(Error::InvalidParameter(format!(
                    "random range [{}, {}] is invalid",
                    g.lo, g.hi
                )));
            }
            for p in &g.params {
                if seen.contains(p) {
                    return Err(Error::InvalidParameter(format!("{p:?} randomized twice")));
                }
                seen.push(*p);
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleConfig {
    pub realizations: usize,
    pub master_seed: u64,
    /// Worker threads; `None` uses the global pool. Never affects results.
    pub threads: Option<usize>,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        EnsembleConfig {
            realizations: 1,
            master_seed: 0,
            threads: None,
        }
    }
}

/// Concrete draws for one realization.
#[derive(Clone, Debug, PartialEq)]
pub struct Realization {
    pub index: usize,
    pub values: Vec<(RandomParam, f64)>,
}

impl Realization {
    pub fn get(&self, p: RandomParam) -> Option<f64> {
        self.values.iter().find(|(q, _)| *q == p).map(|&(_, v)| v)
    }
}

/// Random stream of realization `k`.
pub fn realization_rng(master_seed: u64, k: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(k as u64);
    rng
}

/// Draws every group of `spec` once for realization `k`.
pub fn sample_realization(
    spec: &RandomSpec,
    k: usize,
    cfg: &EnsembleConfig,
) -> Result<Realization> {
    if k >= cfg.realizations {
        return Err(Error::InvalidParameter(format!(
            "realization {k} out of range (N = {})",
            cfg.realizations
        )));
    }
    let mut rng = realization_rng(cfg.master_seed, k);
    let mut values = Vec::new();
    for g in &spec.groups {
        let u: f64 = rng.random();
        let v = g.lo + (g.hi - g.lo) * u;
        values.extend(g.params.iter().map(|&p| (p, v)));
    }
    Ok(Realization { index: k, values })
}

/// Something that turns a realization's draws into a system and initial state.
pub trait EnsembleModel: Sync {
    fn realize(&self, draw: &Realization) -> Result<(LindbladSystem, DensityMatrix)>;
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnsembleResult {
    pub grid: Vec<f64>,
    pub mean_states: Vec<DensityMatrix>,
    /// Standard error of each basis population, per grid point.
    pub population_stderr: Vec<Vec<f64>>,
    pub realizations: usize,
}

impl StateSeries for EnsembleResult {
    fn grid(&self) -> &[f64] {
        &self.grid
    }
    fn states(&self) -> &[DensityMatrix] {
        &self.mean_states
    }
}

/// Neumaier-compensated running sums over a flat buffer.
#[derive(Clone)]
struct CompensatedSums {
    sum: Vec<f64>,
    comp: Vec<f64>,
}

impl CompensatedSums {
    fn new(len: usize) -> Self {
        CompensatedSums {
            sum: vec![0.0; len],
            comp: vec![0.0; len],
        }
    }

    fn add(&mut self, i: usize, x: f64) {
        let s = self.sum[i];
        let t = s + x;
        if s.abs() >= x.abs() {
            self.comp[i] += (s - t) + x;
        } else {
            self.comp[i] += (x - t) + s;
        }
        self.sum[i] = t;
    }

    fn merge(&mut self, other: &CompensatedSums) {
        for i in 0..self.sum.len() {
            self.add(i, other.sum[i]);
            self.add(i, other.comp[i]);
        }
    }

    fn value(&self, i: usize) -> f64 {
        self.sum[i] + self.comp[i]
    }
}

struct Layout {
    dim: usize,
    points: usize,
}

impl Layout {
    /// Per grid point: dim² complex entries as (re, im), then dim squared
    /// populations.
    fn stride(&self) -> usize {
        2 * self.dim * self.dim + self.dim
    }

    fn len(&self) -> usize {
        self.stride() * self.points
    }
}

fn accumulate(acc: &mut CompensatedSums, layout: &Layout, states: &[DensityMatrix]) {
    let d = layout.dim;
    for (g, s) in states.iter().enumerate() {
        let base = g * layout.stride();
        for (e, z) in s.op().matrix().iter().enumerate() {
            acc.add(base + 2 * e, z.re);
            acc.add(base + 2 * e + 1, z.im);
        }
        for k in 0..d {
            let p = s.get(k, k).re;
            acc.add(base + 2 * d * d + k, p * p);
        }
    }
}

fn run_chunk(
    model: &dyn EnsembleModel,
    spec: &RandomSpec,
    cfg: &EnsembleConfig,
    integrator: &IntegratorConfig,
    layout: &Layout,
    range: std::ops::Range<usize>,
) -> Result<CompensatedSums> {
    let mut acc = CompensatedSums::new(layout.len());
    for k in range {
        let wrap = |e: Error| Error::Realization {
            k,
            source: Box::new(e),
        };
        let draw = sample_realization(spec, k, cfg).map_err(wrap)?;
        let (system, rho0) = model.realize(&draw).map_err(wrap)?;
        if system.dim() != layout.dim {
            return Err(wrap(Error::DimensionMismatch {
                expected: layout.dim,
                found: system.dim(),
            }));
        }
        let traj = integrate(&system, &rho0, integrator).map_err(wrap)?;
        accumulate(&mut acc, layout, &traj.states);
    }
    Ok(acc)
}

/// Integrates every realization and averages the density matrices.
pub fn run_ensemble(
    model: &dyn EnsembleModel,
    spec: &RandomSpec,
    cfg: &EnsembleConfig,
    integrator: &IntegratorConfig,
) -> Result<EnsembleResult> {
    spec.validate()?;
    integrator.validate()?;
    let n = cfg.realizations;
    if n == 0 {
        return Err(Error::InvalidParameter(
            "ensemble needs at least one realization".into(),
        ));
    }
    let (probe, _) = model.realize(&sample_realization(spec, 0, cfg)?)?;
    let layout = Layout {
        dim: probe.dim(),
        points: integrator.grid_points,
    };
    let chunks: Vec<std::ops::Range<usize>> = (0..n)
        .step_by(CHUNK)
        .map(|s| s..(s + CHUNK).min(n))
        .collect();

    let work = || -> Vec<Result<CompensatedSums>> {
        chunks
            .par_iter()
            .map(|r| run_chunk(model, spec, cfg, integrator, &layout, r.clone()))
            .collect()
    };
    let partials = match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    };

    let mut total = CompensatedSums::new(layout.len());
    for p in partials {
        total.merge(&p?);
    }

    let d = layout.dim;
    let nf = n as f64;
    let grid = integrator.grid();
    let mut mean_states = Vec::with_capacity(grid.len());
    let mut stderr = Vec::with_capacity(grid.len());
    for g in 0..layout.points {
        let base = g * layout.stride();
        // flat buffer is column-major, matching nalgebra storage
        let entries: Vec<C64> = (0..d * d)
            .map(|e| C64::new(total.value(base + 2 * e), total.value(base + 2 * e + 1)) / nf)
            .collect();
        let m = DMatrix::from_column_slice(d, d, &entries);
        let se: Vec<f64> = (0..d)
            .map(|k| {
                if n < 2 {
                    return 0.0;
                }
                let mean = m[(k, k)].re;
                let sq = total.value(base + 2 * d * d + k);
                let var = ((sq - nf * mean * mean) / (nf - 1.0)).max(0.0);
                (var / nf).sqrt()
            })
            .collect();
        mean_states.push(DensityMatrix::from_operator_unchecked(
            Operator::from_matrix_unchecked(m),
        ));
        stderr.push(se);
    }
    Ok(EnsembleResult {
        grid,
        mean_states,
        population_stderr: stderr,
        realizations: n,
    })
}
