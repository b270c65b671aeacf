//! Observables on density matrices and event extraction on time series.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::dynamics::{integrate, IntegratorConfig, LindbladSystem, StateSeries};
use crate::error::{Error, Result};
use crate::qops::{basis_state, BasisLabel, DensityMatrix, C64, W_INDICES};

/// Diagonal of ρ.
pub fn populations(rho: &DensityMatrix) -> Vec<f64> {
    rho.op().real_diagonal()
}

/// ⟨W|ρ|W⟩ for the three-qubit W state.
pub fn w_fidelity(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 8 {
        return Err(Error::DimensionMismatch {
            expected: 8,
            found: rho.dim(),
        });
    }
    let mut acc = C64::new(0.0, 0.0);
    for &r in &W_INDICES {
        for &c in &W_INDICES {
            acc += rho.get(r, c);
        }
    }
    Ok(acc.re / 3.0)
}

fn hermitian_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = m.clone().symmetric_eigen();
    let roots = eig.eigenvalues.map(|l| C64::new(l.max(0.0).sqrt(), 0.0));
    let v = &eig.eigenvectors;
    v * DMatrix::from_diagonal(&roots) * v.adjoint()
}

/// Wootters concurrence of a two-qubit state.
pub fn concurrence(rho: &DensityMatrix) -> Result<f64> {
    if rho.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: rho.dim(),
        });
    }
    let r = rho.op().matrix();
    // σ^y ⊗ σ^y is real: antidiagonal (−1, 1, 1, −1)
    let yy = DMatrix::from_fn(4, 4, |i, j| {
        if i + j == 3 {
            C64::new(if i == 0 || i == 3 { -1.0 } else { 1.0 }, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let tilde = &yy * r.map(|z| z.conj()) * &yy;
    let s = hermitian_sqrt(r);
    let m = &s * tilde * &s;
    let m = (&m + m.adjoint()) * C64::new(0.5, 0.0);
    let mut lambdas: Vec<f64> = m
        .symmetric_eigenvalues()
        .iter()
        .map(|&mu| mu.max(0.0).sqrt())
        .collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    Ok((lambdas[0] - lambdas[1] - lambdas[2] - lambdas[3]).max(0.0))
}

/// trace(ρ Σ_j (σ_j^z + I)/2).
pub fn excitation_number(rho: &DensityMatrix) -> f64 {
    populations(rho)
        .iter()
        .enumerate()
        .map(|(k, p)| k.count_ones() as f64 * p)
        .sum()
}

pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.purity()
}

/// min/max of the populations in `sector`; 0 when all are empty.
pub fn population_balance(rho: &DensityMatrix, sector: &[usize]) -> f64 {
    let pops: Vec<f64> = sector.iter().map(|&k| rho.get(k, k).re).collect();
    let max = pops.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = pops.iter().copied().fold(f64::INFINITY, f64::min);
    if max <= 0.0 {
        0.0
    } else {
        min.max(0.0) / max
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    pub gate_time: f64,
    pub peak_probability: f64,
    pub target_state: BasisLabel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureKind {
    Concurrence,
    WFidelity,
    PopulationBalance,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub measure_kind: MeasureKind,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EventOptions {
    /// Events must reach this fraction of the global maximum.
    pub threshold_fraction: f64,
    /// Basis indices compared by the population-balance measure. Defaults to
    /// the single-excitation pair for two qubits and the W support for three.
    pub sector: Option<Vec<usize>>,
}

impl Default for EventOptions {
    fn default() -> Self {
        EventOptions {
            threshold_fraction: 0.9,
            sector: None,
        }
    }
}

fn default_sector(dim: usize) -> Vec<usize> {
    match dim {
        4 => vec![1, 2],
        8 => W_INDICES.to_vec(),
        _ => (0..dim).collect(),
    }
}

/// Evaluates a measure at every grid point.
pub fn measure_series(
    series: &dyn StateSeries,
    kind: MeasureKind,
    sector: Option<&[usize]>,
) -> Result<Vec<f64>> {
    series
        .states()
        .iter()
        .map(|s| match kind {
            MeasureKind::Concurrence => concurrence(s),
            MeasureKind::WFidelity => w_fidelity(s),
            MeasureKind::PopulationBalance => {
                let def;
                let sec = match sector {
                    Some(s) => s,
                    None => {
                        def = default_sector(s.dim());
                        &def
                    }
                };
                Ok(population_balance(s, sec))
            }
        })
        .collect()
}

/// Vertex of the parabola through the samples around `k`, or the sample
/// itself at the ends of the grid or where the data is not concave.
fn refine_peak(grid: &[f64], y: &[f64], k: usize) -> (f64, f64) {
    if k == 0 || k + 1 >= y.len() {
        return (grid[k], y[k]);
    }
    let (a, b, c) = (y[k - 1], y[k], y[k + 1]);
    let denom = a - 2.0 * b + c;
    if denom >= 0.0 {
        return (grid[k], b);
    }
    let delta = (0.5 * (a - c) / denom).clamp(-0.5, 0.5);
    let h = if delta >= 0.0 {
        grid[k + 1] - grid[k]
    } else {
        grid[k] - grid[k - 1]
    };
    (grid[k] + delta * h, b - 0.25 * (a - c) * delta)
}

/// Peaks whose refined heights differ by less than this count as equal.
const PEAK_TIE: f64 = 1e-6;

/// Global maximum of the target population, refined quadratically. Ties go
/// to the earliest peak.
pub fn find_gate_event(series: &dyn StateSeries, target: &BasisLabel) -> Result<GateReport> {
    let states = series.states();
    let grid = series.grid();
    if states.is_empty() {
        return Err(Error::InvalidParameter("empty time series".into()));
    }
    let idx = target.index();
    if idx >= states[0].dim() {
        return Err(Error::DimensionMismatch {
            expected: states[0].qubits(),
            found: target.qubits(),
        });
    }
    let y: Vec<f64> = states.iter().map(|s| s.get(idx, idx).re).collect();
    let n = y.len();
    let peaks: Vec<(f64, f64)> = (0..n)
        .filter(|&k| (k == 0 || y[k] >= y[k - 1]) && (k + 1 == n || y[k] >= y[k + 1]))
        .map(|k| refine_peak(grid, &y, k))
        .collect();
    let top = peaks.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let (t, p) = peaks
        .into_iter()
        .find(|p| p.1 >= top - PEAK_TIE)
        .expect("a maximum exists");
    Ok(GateReport {
        gate_time: t,
        peak_probability: p.clamp(0.0, 1.0),
        target_state: target.clone(),
    })
}

/// Interior local maxima reaching `threshold_fraction` of the global maximum.
pub fn local_maxima(grid: &[f64], y: &[f64], threshold_fraction: f64) -> Vec<(f64, f64)> {
    let global = y.iter().copied().fold(0.0, f64::max);
    if global <= 1e-12 {
        return Vec::new();
    }
    let floor = threshold_fraction * global;
    let mut out = Vec::new();
    let n = y.len();
    for k in 1..n.saturating_sub(1) {
        if y[k] <= y[k - 1] || y[k] < floor {
            continue;
        }
        // walk across a plateau; earliest point represents it
        let next = (k + 1..n).find(|&j| y[j] != y[k]);
        if matches!(next, Some(j) if y[j] < y[k]) {
            out.push(refine_peak(grid, y, k));
        }
    }
    out
}

pub fn find_entanglement_events(
    series: &dyn StateSeries,
    kind: MeasureKind,
    opts: &EventOptions,
) -> Result<EntanglementReport> {
    let y = measure_series(series, kind, opts.sector.as_deref())?;
    let (times, values) = local_maxima(series.grid(), &y, opts.threshold_fraction)
        .into_iter()
        .unzip();
    Ok(EntanglementReport {
        measure_kind: kind,
        times,
        values,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthRow {
    pub input: BasisLabel,
    pub output: BasisLabel,
    pub probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TruthTable {
    pub gate_time: f64,
    pub rows: Vec<TruthRow>,
}

impl TruthTable {
    /// Output index of each input index.
    pub fn permutation(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.output.index()).collect()
    }

    pub fn matches(&self, ideal: &[usize]) -> bool {
        self.permutation() == ideal
    }

    pub fn min_probability(&self) -> f64 {
        self.rows.iter().map(|r| r.probability).fold(1.0, f64::min)
    }
}

/// Ideal SWAP on two qubits: |01⟩ ↔ |10⟩.
pub fn swap_permutation() -> Vec<usize> {
    vec![0, 2, 1, 3]
}

/// Ideal controlled SWAP of qubits `a`, `b` conditioned on `control`
/// (1-based sites on a three-qubit register).
pub fn cswap_permutation(control: usize, a: usize, b: usize) -> Vec<usize> {
    let bit = |site: usize| 1usize << (3 - site);
    (0..8)
        .map(|k| {
            let (ba, bb) = (k & bit(a) != 0, k & bit(b) != 0);
            if k & bit(control) != 0 && ba != bb {
                k ^ bit(a) ^ bit(b)
            } else {
                k
            }
        })
        .collect()
}

/// Evolves every computational basis state to `gate_time` under a
/// noiseless system and records the most probable output.
pub fn truth_table(system: &LindbladSystem, gate_time: f64) -> Result<TruthTable> {
    if !system.channels().is_empty() {
        return Err(Error::InvalidParameter(
            "truth table requires a noiseless system".into(),
        ));
    }
    if !(gate_time.is_finite() && gate_time >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "gate time {gate_time} is invalid"
        )));
    }
    let dim = system.dim();
    let n = dim.trailing_zeros() as usize;
    let cfg = IntegratorConfig {
        t_max: gate_time,
        grid_points: 2,
        ..Default::default()
    };
    let mut rows = Vec::with_capacity(dim);
    for k in 0..dim {
        let input = BasisLabel::from_index(k, n)?;
        let rho0 = basis_state(&input);
        let out = if gate_time == 0.0 {
            rho0
        } else {
            integrate(system, &rho0, &cfg)?
                .states
                .pop()
                .expect("two grid points")
        };
        let pops = populations(&out);
        let mut best = 0;
        for (j, &p) in pops.iter().enumerate() {
            if p > pops[best] {
                best = j;
            }
        }
        rows.push(TruthRow {
            input,
            output: BasisLabel::from_index(best, n)?,
            probability: pops[best],
        });
    }
    Ok(TruthTable { gate_time, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Hamiltonian, Trajectory};
    use crate::model::{build_rwa_two, CouplingModel, TwoQubitParams};
    use crate::qops::{w_amplitudes, w_state, Operator};
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn label(s: &str) -> BasisLabel {
        BasisLabel::parse(s).unwrap()
    }

    fn pure(amps: &[(usize, C64)], dim: usize) -> DensityMatrix {
        let mut v = vec![C64::new(0.0, 0.0); dim];
        for &(k, a) in amps {
            v[k] = a;
        }
        DensityMatrix::from_pure(&v).unwrap()
    }

    fn re(x: f64) -> C64 {
        C64::new(x, 0.0)
    }

    fn series(grid: Vec<f64>, states: Vec<DensityMatrix>) -> Trajectory {
        Trajectory { grid, states }
    }

    fn swap_system(g: f64) -> LindbladSystem {
        let p = TwoQubitParams {
            omega1: 1.0,
            omega2: 1.0,
            coupling: CouplingModel::Constant { g_m: g },
        };
        LindbladSystem::closed(Hamiltonian::Constant(build_rwa_two(&p, g).unwrap()))
    }

    /// Diagonal two-qubit states with ρ_{|10⟩} = f(t).
    fn synthetic(f: impl Fn(f64) -> f64, t_max: f64, points: usize) -> Trajectory {
        let grid: Vec<f64> = (0..points)
            .map(|k| t_max * k as f64 / (points - 1) as f64)
            .collect();
        let states = grid
            .iter()
            .map(|&t| {
                let p = f(t);
                DensityMatrix::new(Operator::from_real_diagonal(&[0.0, 1.0 - p, p, 0.0]).unwrap())
                    .unwrap()
            })
            .collect();
        series(grid, states)
    }

    #[test]
    fn basic_populations() {
        assert_eq!(
            populations(&basis_state(&label("01"))),
            vec![0.0, 1.0, 0.0, 0.0]
        );
        let t = 1.0 / 3.0;
        assert_eq!(
            populations(&w_state(3).unwrap()),
            vec![0.0, 0.0, 0.0, t, 0.0, t, t, 0.0]
        );
    }

    #[test]
    fn w_fidelity_cases() {
        assert!((w_fidelity(&w_state(3).unwrap()).unwrap() - 1.0).abs() < 1e-15);
        assert!((w_fidelity(&basis_state(&label("101"))).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        let mixed = DensityMatrix::maximally_mixed(8).unwrap();
        assert!((w_fidelity(&mixed).unwrap() - 0.125).abs() < 1e-15);
        assert!(w_fidelity(&basis_state(&label("01"))).is_err());
        let w = DensityMatrix::from_pure(&w_amplitudes()).unwrap();
        assert!((w_fidelity(&w).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn concurrence_cases() {
        let h = FRAC_1_SQRT_2;
        let bell = pure(&[(1, re(h)), (2, re(h))], 4);
        assert!((concurrence(&bell).unwrap() - 1.0).abs() < 1e-7);
        assert!(concurrence(&basis_state(&label("01"))).unwrap() < 1e-7);
        let mix = DensityMatrix::new(Operator::from_real_diagonal(&[0.0, 0.5, 0.5, 0.0]).unwrap())
            .unwrap();
        assert!(concurrence(&mix).unwrap() < 1e-7);
        assert!(concurrence(&w_state(3).unwrap()).is_err());
    }

    #[test]
    fn concurrence_bell_family_and_products() {
        let h = FRAC_1_SQRT_2;
        let bells = [
            pure(&[(0, re(h)), (3, re(h))], 4),
            pure(&[(0, re(h)), (3, re(-h))], 4),
            pure(&[(1, re(h)), (2, re(h))], 4),
            pure(&[(1, re(h)), (2, C64::new(0.0, -h))], 4),
        ];
        for b in &bells {
            assert!((concurrence(b).unwrap() - 1.0).abs() < 1e-7);
        }
        for k in 0..4 {
            let s = basis_state(&BasisLabel::from_index(k, 2).unwrap());
            assert!(concurrence(&s).unwrap() < 1e-7);
        }
        // Werner state p|Ψ⁺⟩⟨Ψ⁺| + (1−p)I/4 has C = max(0, (3p−1)/2)
        let p = 0.8;
        let mixed = DensityMatrix::new(
            &bells[2].op().scale_re(p) + &Operator::identity(4).scale_re((1.0 - p) / 4.0),
        )
        .unwrap();
        assert!((concurrence(&mixed).unwrap() - 0.7).abs() < 1e-7);
    }

    #[test]
    fn excitation_numbers() {
        assert_eq!(excitation_number(&basis_state(&label("101"))), 2.0);
        assert_eq!(excitation_number(&basis_state(&label("00"))), 0.0);
        assert!((excitation_number(&w_state(3).unwrap()) - 2.0).abs() < 1e-15);
    }

    #[test]
    fn gate_event_on_sine_squared() {
        for g in [0.5, 1.0, 2.0] {
            let traj = synthetic(|t| (g * t).sin().powi(2), 10.0, 1001);
            let r = find_gate_event(&traj, &label("10")).unwrap();
            assert!(
                (r.gate_time - PI / (2.0 * g)).abs() <= 0.01,
                "g={g}: {}",
                r.gate_time
            );
            assert!((r.peak_probability - 1.0).abs() < 1e-4);
        }
    }

    #[test]
    fn gate_event_constant_series_takes_first_point() {
        let traj = synthetic(|_| 0.4, 10.0, 11);
        let r = find_gate_event(&traj, &label("10")).unwrap();
        assert_eq!(r.gate_time, 0.0);
        assert_eq!(r.peak_probability, 0.4);
    }

    #[test]
    fn events_of_zero_measure_are_empty() {
        let traj = synthetic(|_| 0.0, 10.0, 101);
        let r = find_entanglement_events(&traj, MeasureKind::Concurrence, &EventOptions::default())
            .unwrap();
        assert!(r.times.is_empty());
    }

    #[test]
    fn concurrence_events_of_ideal_swap() {
        let sys = swap_system(1.0);
        let traj = integrate(
            &sys,
            &basis_state(&label("01")),
            &IntegratorConfig::default(),
        )
        .unwrap();
        let r = find_entanglement_events(&traj, MeasureKind::Concurrence, &EventOptions::default())
            .unwrap();
        assert!((r.times[0] - PI / 4.0).abs() < 0.01);
        for w in r.times.windows(2) {
            assert!((w[1] - w[0] - PI / 2.0).abs() < 0.02);
        }
        let bal = find_entanglement_events(
            &traj,
            MeasureKind::PopulationBalance,
            &EventOptions::default(),
        )
        .unwrap();
        assert!((bal.times[0] - PI / 4.0).abs() < 0.01);
    }

    #[test]
    fn swap_truth_table() {
        let tt = truth_table(&swap_system(1.0), PI / 2.0).unwrap();
        assert!(tt.matches(&swap_permutation()));
        assert!((tt.rows[1].probability - 1.0).abs() < 1e-6);
        assert!((tt.rows[2].probability - 1.0).abs() < 1e-6);
        let id = truth_table(&swap_system(0.0), PI / 2.0).unwrap();
        assert!(id.matches(&[0, 1, 2, 3]));
        assert_eq!(id.min_probability(), 1.0);
    }

    #[test]
    fn cswap_permutations() {
        // control 1 swaps qubits 2 and 3: |101⟩ ↔ |110⟩
        assert_eq!(cswap_permutation(1, 2, 3), vec![0, 1, 2, 3, 4, 6, 5, 7]);
        assert_eq!(cswap_permutation(2, 1, 3), vec![0, 1, 2, 6, 4, 5, 3, 7]);
    }

    #[test]
    fn refine_exact_parabola() {
        let grid: Vec<f64> = (0..5).map(|k| k as f64).collect();
        let y: Vec<f64> = grid.iter().map(|t| 1.0 - (t - 2.3f64).powi(2)).collect();
        let (t, v) = refine_peak(&grid, &y, 2);
        assert!((t - 2.3).abs() < 1e-12);
        assert!((v - 1.0).abs() < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn arb_state(dim: usize) -> impl Strategy<Value = DensityMatrix> {
            proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim * dim).prop_map(move |v| {
                let a =
                    DMatrix::from_iterator(dim, dim, v.into_iter().map(|(x, y)| C64::new(x, y)));
                let m = &a * a.adjoint() + DMatrix::<C64>::identity(dim, dim) * C64::new(1e-3, 0.0);
                let tr = m.trace();
                DensityMatrix::new(Operator::new(m / tr).unwrap()).unwrap()
            })
        }

        proptest! {
            #[test]
            fn w_fidelity_is_linear(a in arb_state(8), b in arb_state(8), p in 0.0f64..1.0) {
                let mix = DensityMatrix::new(&a.op().scale_re(p) + &b.op().scale_re(1.0 - p)).unwrap();
                let lhs = w_fidelity(&mix).unwrap();
                let rhs = p * w_fidelity(&a).unwrap() + (1.0 - p) * w_fidelity(&b).unwrap();
                prop_assert!((lhs - rhs).abs() <= 1e-12);
            }

            #[test]
            fn populations_sum_to_trace(a in arb_state(4)) {
                let s: f64 = populations(&a).iter().sum();
                prop_assert!((s - a.trace()).abs() <= 1e-12);
            }

            #[test]
            fn populations_ignore_global_phase(
                amps in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4),
                phase in 0.0f64..std::f64::consts::TAU
            ) {
                let v: Vec<C64> = amps.iter().map(|&(x, y)| C64::new(x, y)).collect();
                let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                prop_assume!(norm > 1e-3);
                let v: Vec<C64> = v.iter().map(|z| z / norm).collect();
                let w: Vec<C64> = v.iter().map(|z| z * C64::from_polar(1.0, phase)).collect();
                let a = populations(&DensityMatrix::from_pure(&v).unwrap());
                let b = populations(&DensityMatrix::from_pure(&w).unwrap());
                for (x, y) in a.iter().zip(&b) {
                    prop_assert!((x - y).abs() <= 1e-12);
                }
            }

            #[test]
            fn concurrence_in_unit_interval(a in arb_state(4)) {
                let c = concurrence(&a).unwrap();
                prop_assert!((0.0..=1.0 + 1e-9).contains(&c));
            }
        }
    }
}
