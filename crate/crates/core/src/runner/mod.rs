//! Scenario catalog, configuration, and file output.

mod config;
mod output;
mod scenario;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use config::{parse_config, resolve, Overrides};
pub use output::{render_svg, write_csv};
pub use scenario::{catalog, find_scenario, ScenarioSpec, DEFAULT_SEED};

use crate::disorder::{run_ensemble, EnsembleResult};
use crate::error::Result;
use crate::measures::{
    find_entanglement_events, find_gate_event, populations, EntanglementReport, EventOptions,
    GateReport, MeasureKind,
};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub scenario: String,
    pub seed: u64,
    pub realizations: usize,
    pub gate: GateReport,
    pub entanglement: Vec<EntanglementReport>,
    pub final_populations: Vec<f64>,
    pub runtime_seconds: f64,
    pub has_reference_values: bool,
}

impl RunSummary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

/// Measures reported for a register: concurrence for two qubits, W-state
/// fidelity for three, population balance for both.
pub fn default_measures(qubits: usize) -> Vec<MeasureKind> {
    match qubits {
        2 => vec![MeasureKind::Concurrence, MeasureKind::PopulationBalance],
        _ => vec![MeasureKind::WFidelity, MeasureKind::PopulationBalance],
    }
}

pub struct Simulation {
    pub spec: ScenarioSpec,
    pub result: EnsembleResult,
    pub summary: RunSummary,
}

/// Runs the ensemble and extracts the reports.
pub fn simulate(spec: &ScenarioSpec) -> Result<Simulation> {
    spec.validate()?;
    let start = Instant::now();
    let result = run_ensemble(spec, &spec.random, &spec.ensemble, &spec.integrator)?;
    let gate = find_gate_event(&result, &spec.target)?;
    let entanglement = default_measures(spec.qubit_count)
        .into_iter()
        .map(|k| find_entanglement_events(&result, k, &EventOptions::default()))
        .collect::<Result<Vec<_>>>()?;
    let final_populations = populations(result.mean_states.last().expect("grid has >= 2 points"));
    let summary = RunSummary {
        scenario: spec.name.clone(),
        seed: spec.ensemble.master_seed,
        realizations: spec.ensemble.realizations,
        gate,
        entanglement,
        final_populations,
        runtime_seconds: start.elapsed().as_secs_f64(),
        has_reference_values: spec.has_reference_values,
    };
    Ok(Simulation {
        spec: spec.clone(),
        result,
        summary,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
    Both,
}

#[derive(Clone, Debug)]
pub struct RunOptions {
    pub out_dir: PathBuf,
    pub format: OutputFormat,
    pub plot: bool,
}

/// Files written by [`run`].
#[derive(Clone, Debug, Default)]
pub struct RunOutputs {
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
    pub svg: Option<PathBuf>,
}

pub fn write_outputs(sim: &Simulation, opts: &RunOptions) -> Result<RunOutputs> {
    std::fs::create_dir_all(&opts.out_dir)?;
    let stem = opts.out_dir.join(&sim.spec.name);
    let path = |ext: &str| -> PathBuf { Path::new(&stem).with_extension(ext) };
    let mut out = RunOutputs::default();
    if matches!(opts.format, OutputFormat::Csv | OutputFormat::Both) {
        let p = path("csv");
        let mut w = BufWriter::new(File::create(&p)?);
        write_csv(&mut w, &sim.spec.name, &sim.result)?;
        std::io::Write::flush(&mut w)?;
        out.csv = Some(p);
    }
    if matches!(opts.format, OutputFormat::Json | OutputFormat::Both) {
        let p = path("json");
        std::fs::write(&p, sim.summary.to_json() + "\n")?;
        out.json = Some(p);
    }
    if opts.plot {
        let p = path("svg");
        std::fs::write(&p, render_svg(&sim.spec.name, &sim.result))?;
        out.svg = Some(p);
    }
    Ok(out)
}

/// Simulates `spec` and writes the requested files.
pub fn run(spec: &ScenarioSpec, opts: &RunOptions) -> Result<(RunSummary, RunOutputs)> {
    let sim = simulate(spec)?;
    let files = write_outputs(&sim, opts)?;
    Ok((sim.summary, files))
}
