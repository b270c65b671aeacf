//! End-to-end acceptance checks. Each test prints one PASS/FAIL line.
//!
//! Run with `cargo test -p transmon-lindblad --test acceptance -- --nocapture`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::OnceLock;
use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use transmon_lindblad::disorder::{sample_realization, EnsembleModel};
use transmon_lindblad::dynamics::{
    integrate, propagate_expm, Hamiltonian, IntegratorConfig, LindbladSystem, NoiseRates,
    StateSeries,
};
use transmon_lindblad::measures::{
    excitation_number, find_entanglement_events, populations, EventOptions, MeasureKind,
};
use transmon_lindblad::model::{
    build_rwa_two, rotating_frame_hamiltonian, CouplingModel, TwoQubitParams,
};
use transmon_lindblad::qops::{basis_state, BasisLabel, DensityMatrix};
use transmon_lindblad::runner::{catalog, find_scenario, simulate, write_csv, Simulation};

fn report(n: u32, ok: bool, detail: &str) {
    println!(
        "criterion {n:>2}: {} | {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {n} failed: {detail}");
}

fn cached(name: &str) -> &'static Simulation {
    static CACHE: OnceLock<HashMap<String, OnceLock<Simulation>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| {
        catalog()
            .into_iter()
            .map(|s| (s.name, OnceLock::new()))
            .collect()
    });
    cache[name].get_or_init(|| simulate(&find_scenario(name).unwrap()).unwrap())
}

fn population_series(series: &dyn StateSeries, k: usize) -> Vec<f64> {
    series.states().iter().map(|s| s.get(k, k).re).collect()
}

fn idx(label: &str) -> usize {
    BasisLabel::parse(label).unwrap().index()
}

fn max_entry_diff(a: &DensityMatrix, b: &DensityMatrix) -> f64 {
    (a.op().matrix() - b.op().matrix())
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

fn published() -> Vec<String> {
    catalog()
        .into_iter()
        .filter(|s| s.has_reference_values)
        .map(|s| s.name)
        .collect()
}

#[test]
fn c01_ideal_swap() {
    let start = Instant::now();
    let full = simulate(&find_scenario("fig2a").unwrap()).unwrap();
    let elapsed = start.elapsed().as_secs_f64();

    let mut spec = find_scenario("fig2a").unwrap();
    spec.integrator.t_max = PI / 2.0;
    spec.integrator.grid_points = 3;
    let sim = simulate(&spec).unwrap();
    let mid = &sim.result.mean_states[1];
    let end = &sim.result.mean_states[2];
    let (i01, i10) = (idx("01"), idx("10"));
    let e_gate = (end.get(i10, i10).re - 1.0).abs();
    let e_mid = (mid.get(i01, i01).re - 0.5)
        .abs()
        .max((mid.get(i10, i10).re - 0.5).abs());
    let ok = e_gate <= 1e-6 && e_mid <= 1e-6 && elapsed < 1.0 && full.summary.realizations == 1;
    report(
        1,
        ok,
        &format!(
            "|rho_10(pi/2) - 1| = {e_gate:.2e}, max |rho(pi/4) - 0.5| = {e_mid:.2e}, runtime {elapsed:.3} s"
        ),
    );
}

#[test]
fn c02_random_coupling_ensemble() {
    let start = Instant::now();
    let sim = cached("fig2b");
    let elapsed = start.elapsed().as_secs_f64();
    let y = population_series(&sim.result, idx("10"));
    let worst = sim
        .result
        .grid
        .iter()
        .zip(&y)
        .map(|(&t, &p)| {
            let exact = if t == 0.0 {
                0.0
            } else {
                0.5 - (2.0 * t).sin() / (4.0 * t)
            };
            (p - exact).abs()
        })
        .fold(0.0, f64::max);
    let gate = &sim.summary.gate;
    let ok = sim.summary.realizations == 1500
        && worst <= 0.02
        && (gate.peak_probability - 0.61).abs() <= 0.02
        && (gate.gate_time - 2.25).abs() <= 0.1
        && elapsed < 120.0;
    report(
        2,
        ok,
        &format!(
            "N = {}, max deviation from analytic mean {worst:.4}, peak {:.4} at t = {:.3}, runtime {elapsed:.1} s",
            sim.summary.realizations, gate.peak_probability, gate.gate_time
        ),
    );
}

/// exp(−iHt) on the real symmetric two-excitation block {|011⟩, |101⟩, |110⟩}.
fn block_oracle(h: &DMatrix<f64>, from: usize, to: usize, t: f64) -> f64 {
    let eig = h.clone().symmetric_eigen();
    let mut amp = C64::new(0.0, 0.0);
    for k in 0..h.nrows() {
        let v = &eig.eigenvectors;
        amp += C64::from_polar(1.0, -eig.eigenvalues[k] * t) * v[(to, k)] * v[(from, k)];
    }
    amp.norm_sqr()
}

#[test]
fn c03_ideal_cswap() {
    let sim = cached("fig4a");
    let spec = &sim.spec;
    let sector = [idx("011"), idx("101"), idx("110")];
    let h = spec.base_system().unwrap().hamiltonian().at(0.0);
    let block = DMatrix::from_fn(3, 3, |r, c| h.get(sector[r], sector[c]).re);
    let y = population_series(&sim.result, idx("110"));
    let oracle_err = sim
        .result
        .grid
        .iter()
        .zip(&y)
        .map(|(&t, &p)| (p - block_oracle(&block, 1, 2, t)).abs())
        .fold(0.0, f64::max);
    let gate = &sim.summary.gate;
    let ok =
        gate.peak_probability >= 0.96 && (gate.gate_time - 2.8).abs() <= 0.2 && oracle_err <= 1e-8;
    report(
        3,
        ok,
        &format!(
            "peak rho_110 = {:.4} at t = {:.3} (want >= 0.96 at 2.8 +- 0.2), block-oracle error {oracle_err:.2e}",
            gate.peak_probability, gate.gate_time
        ),
    );
}

#[test]
fn c04_w_events() {
    let sim = cached("fig4a");
    let ev = find_entanglement_events(
        &sim.result,
        MeasureKind::WFidelity,
        &EventOptions::default(),
    )
    .unwrap();
    let w = [idx("011"), idx("101"), idx("110")];
    let mut parts = Vec::new();
    let mut ok = true;
    for (target, tol) in [(0.7, 0.2), (6.4, 0.3)] {
        let hit = ev
            .times
            .iter()
            .copied()
            .find(|&t| (t - target).abs() <= tol);
        match hit {
            Some(t) => {
                let g = &sim.result.grid;
                let k = g.partition_point(|&x| x < t).min(g.len() - 1);
                let p: Vec<f64> = w
                    .iter()
                    .map(|&i| sim.result.mean_states[k].get(i, i).re)
                    .collect();
                let spread = p.iter().copied().fold(f64::MIN, f64::max)
                    - p.iter().copied().fold(f64::MAX, f64::min);
                ok &= spread <= 0.05;
                parts.push(format!(
                    "max near {target}: t = {t:.3}, W-population spread {spread:.3}"
                ));
            }
            None => {
                ok = false;
                parts.push(format!("no maximum within {target} +- {tol}"));
            }
        }
    }
    let found: Vec<String> = ev.times.iter().map(|t| format!("{t:.2}")).collect();
    report(
        4,
        ok,
        &format!("{}; maxima at [{}]", parts.join("; "), found.join(", ")),
    );
}

#[test]
fn c05_noise_limits() {
    let mut worst = Vec::new();
    let mut ok = true;
    for (name, level) in [("fig2f", 0.25), ("fig4f", 0.125)] {
        let sim = cached(name);
        let dev = sim
            .summary
            .final_populations
            .iter()
            .map(|p| (p - level).abs())
            .fold(0.0, f64::max);
        ok &= dev <= 0.03;
        worst.push(format!("{name} max |p - {level}| = {dev:.4}"));
    }
    report(5, ok, &worst.join(", "));
}

fn monotone(y: &[f64]) -> bool {
    y.windows(2).all(|w| w[1] >= w[0] - 1e-12)
}

#[test]
fn c06_channel_signatures() {
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, label) in [("fig2d", "00"), ("fig2e", "11")] {
        let sim = cached(name);
        let k = idx(label);
        let y = population_series(&sim.result, k);
        let finals = &sim.summary.final_populations;
        let largest = finals.iter().all(|&p| p <= finals[k] + 1e-12);
        let mono = monotone(&y);
        ok &= largest && mono;
        parts.push(format!(
            "{name} rho_{label}: monotone {mono}, final {:.3} largest {largest}",
            finals[k]
        ));
    }
    let sim = cached("fig4d");
    let first = &sim.result.mean_states[0];
    let last = sim.result.mean_states.last().unwrap();
    let growth: Vec<f64> = (0..8)
        .map(|k| last.get(k, k).re - first.get(k, k).re)
        .collect();
    let k000 = idx("000");
    let fastest = growth.iter().all(|&g| g <= growth[k000] + 1e-12);
    ok &= fastest;
    parts.push(format!(
        "fig4d rho_000 growth {:.3} fastest {fastest}",
        growth[k000]
    ));
    report(6, ok, &parts.join("; "));
}

/// Nodes and weights of n-point Gauss–Legendre quadrature on [-1, 1].
fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let k = k as f64;
                    let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-15 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

#[test]
fn c07_dephasing_steady_state() {
    let sim = cached("fig2c");
    let spec = &sim.spec;
    let last = sim.result.mean_states.last().unwrap();
    let p = |l: &str| last.get(idx(l), idx(l)).re;
    let (p01, p10, p00, p11) = (p("01"), p("10"), p("00"), p("11"));
    let grid = spec.integrator.grid();

    let h = spec.hamiltonian(&spec.couplings).unwrap();
    let rho0 = spec.initial_state();
    let mut oracle = vec![DMatrix::<C64>::zeros(4, 4); grid.len()];
    for (x, w) in gauss_legendre(24) {
        let eta = 0.5 * (x + 1.0);
        let noise = NoiseRates {
            eta,
            ..NoiseRates::default()
        };
        let sys = LindbladSystem::with_qubit_noise(h.clone(), noise).unwrap();
        let traj = propagate_expm(&sys, &rho0, &grid).unwrap();
        for (acc, s) in oracle.iter_mut().zip(&traj.states) {
            *acc += s.op().matrix() * C64::new(0.5 * w, 0.0);
        }
    }
    let curve_err = sim
        .result
        .mean_states
        .iter()
        .zip(&oracle)
        .map(|(s, o)| {
            (0..4)
                .map(|k| (s.get(k, k).re - o[(k, k)].re).abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);
    let ok = (p01 - 0.5).abs() <= 0.02
        && (p10 - 0.5).abs() <= 0.02
        && p00 <= 0.01
        && p11 <= 0.01
        && curve_err <= 0.01;
    report(
        7,
        ok,
        &format!(
            "t = 10: rho_01 {p01:.4}, rho_10 {p10:.4}, rho_00 {p00:.1e}, rho_11 {p11:.1e}; max deviation from quadrature oracle {curve_err:.4}"
        ),
    );
}

#[test]
fn c08_cptp_properties() {
    let mut worst = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let names = published();
    for name in &names {
        let sim = cached(name);
        let n0 = excitation_number(&sim.result.mean_states[0]);
        for s in &sim.result.mean_states {
            let tr = s.op().trace();
            worst.0 = worst.0.max((tr.re - 1.0).abs().max(tr.im.abs()));
            worst.1 = worst.1.max(s.op().hermiticity_error());
            worst.2 = worst.2.min(s.min_eigenvalue());
            if sim.spec.is_noiseless() {
                worst.3 = worst.3.max((excitation_number(s) - n0).abs());
            }
        }
    }
    let ok = names.len() == 12
        && worst.0 <= 1e-8
        && worst.1 <= 1e-10
        && worst.2 >= -1e-9
        && worst.3 <= 1e-10;
    report(
        8,
        ok,
        &format!(
            "{} scenarios: trace drift {:.1e}, Hermiticity {:.1e}, min eigenvalue {:.1e}, excitation drift {:.1e}",
            names.len(),
            worst.0,
            worst.1,
            worst.2,
            worst.3
        ),
    );
}

#[test]
fn c09_oracle_equivalence() {
    let mut worst = 0.0f64;
    let mut checked = 0;
    for spec in catalog() {
        let grid = spec.integrator.grid();
        let draws = spec.ensemble.realizations.min(3);
        for k in 0..draws {
            let draw = sample_realization(&spec.random, k, &spec.ensemble).unwrap();
            let (sys, rho0) = spec.realize(&draw).unwrap();
            let a = integrate(&sys, &rho0, &spec.integrator).unwrap();
            let b = propagate_expm(&sys, &rho0, &grid).unwrap();
            for (x, y) in a.states.iter().zip(&b.states) {
                worst = worst.max(max_entry_diff(x, y));
            }
            checked += 1;
        }
    }
    report(
        9,
        worst <= 1e-8,
        &format!("{checked} constant-H systems, max entry difference {worst:.2e}"),
    );
}

fn rwa_deviation(scale: f64, cfg: &IntegratorConfig) -> f64 {
    let (w1, w2) = (0.6 * scale, 0.4 * scale);
    let coupling = CouplingModel::Parametric {
        g0: 0.0,
        g_m: 1.0,
        omega_m: (w1 - w2).abs(),
    };
    let g_eff = coupling.rwa_effective_strength().unwrap();
    let full = TwoQubitParams {
        omega1: w1,
        omega2: w2,
        coupling,
    };
    let rho0 = basis_state(&BasisLabel::parse("01").unwrap());
    let exact = integrate(
        &LindbladSystem::closed(rotating_frame_hamiltonian(&full).unwrap()),
        &rho0,
        cfg,
    )
    .unwrap();
    let resonant = TwoQubitParams {
        omega1: 1.0,
        omega2: 1.0,
        coupling: CouplingModel::Constant { g_m: g_eff },
    };
    let h = build_rwa_two(&resonant, g_eff).unwrap();
    let rwa = propagate_expm(
        &LindbladSystem::closed(Hamiltonian::Constant(h)),
        &rho0,
        &cfg.grid(),
    )
    .unwrap();
    exact
        .states
        .iter()
        .zip(&rwa.states)
        .flat_map(|(a, b)| {
            populations(a)
                .into_iter()
                .zip(populations(b))
                .map(|(x, y)| (x - y).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn c10_rwa_validation() {
    let cfg = IntegratorConfig::default();
    let low = rwa_deviation(20.0, &cfg);
    let high = rwa_deviation(100.0, &cfg);
    report(
        10,
        high <= 0.5 * low,
        &format!("max population deviation {low:.4} at w1+w2 = 20 g_m, {high:.4} at 100 g_m, ratio {:.3}", high / low),
    );
}

fn csv_bytes(name: &str, threads: Option<usize>) -> Vec<u8> {
    let mut spec = find_scenario(name).unwrap();
    spec.ensemble.threads = threads;
    let sim = simulate(&spec).unwrap();
    let mut buf = Vec::new();
    write_csv(&mut buf, name, &sim.result).unwrap();
    buf
}

#[test]
fn c11_determinism() {
    let mut ok = true;
    let mut parts = Vec::new();
    for name in ["fig2f", "fig4b"] {
        let a = csv_bytes(name, Some(1));
        let b = csv_bytes(name, Some(1));
        let c = csv_bytes(name, Some(4));
        let d = csv_bytes(name, None);
        let same = a == b && a == c && a == d;
        ok &= same;
        parts.push(format!(
            "{name}: {} bytes, identical across runs and 1/4/default threads: {same}",
            a.len()
        ));
    }
    report(11, ok, &parts.join("; "));
}
