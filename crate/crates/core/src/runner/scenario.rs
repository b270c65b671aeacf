use serde::{Deserialize, Serialize};

use crate::disorder::{
    EnsembleConfig, EnsembleModel, RandomGroup, RandomParam, RandomSpec, Realization,
};
use crate::dynamics::{Hamiltonian, IntegratorConfig, LindbladSystem, NoiseRates};
use crate::error::{Error, Result};
use crate::model::{build_rwa_two, build_three, CouplingModel, ThreeQubitParams, TwoQubitParams};
use crate::qops::{basis_state, BasisLabel, DensityMatrix};

/// Complete description of one experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    pub qubit_count: usize,
    pub frequencies: Vec<f64>,
    /// `[g_m]` for two qubits, `[g12, g23, g13]` for three.
    pub couplings: Vec<f64>,
    #[serde(default)]
    pub noise: NoiseRates,
    #[serde(default)]
    pub random: RandomSpec,
    pub initial: BasisLabel,
    /// State whose population defines the gate event.
    pub target: BasisLabel,
    #[serde(default)]
    pub integrator: IntegratorConfig,
    #[serde(default)]
    pub ensemble: EnsembleConfig,
    /// False for scenarios without published reference curves.
    #[serde(default = "yes")]
    pub has_reference_values: bool,
}

fn yes() -> bool {
    true
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        let n = self.qubit_count;
        let bad = |msg: String| Err(Error::Config(format!("{}: {msg}", self.name)));
        if n != 2 && n != 3 {
            return bad(format!("qubit_count must be 2 or 3, got {n}"));
        }
        if self.frequencies.len() != n {
            return bad(format!(
                "expected {n} frequencies, got {}",
                self.frequencies.len()
            ));
        }
        if self
            .frequencies
            .iter()
            .any(|w| !(w.is_finite() && *w > 0.0))
        {
            return bad("frequencies must be positive".into());
        }
        let expected = if n == 2 { 1 } else { 3 };
        if self.couplings.len() != expected {
            return bad(format!(
                "expected {expected} couplings, got {}",
                self.couplings.len()
            ));
        }
        if self.couplings.iter().any(|g| !(g.is_finite() && *g >= 0.0)) {
            return bad("couplings must be non-negative".into());
        }
        if self.initial.qubits() != n || self.target.qubits() != n {
            return bad("initial and target labels must have qubit_count digits".into());
        }
        if self.ensemble.realizations == 0 {
            return bad("ensemble.realizations must be >= 1".into());
        }
        self.noise
            .validate()
            .and_then(|_| self.random.validate())
            .and_then(|_| self.integrator.validate())
            .map_err(|e| Error::Config(format!("{}: {e}", self.name)))
    }

    /// True when neither fixed nor random noise is present.
    pub fn is_noiseless(&self) -> bool {
        self.noise.is_zero()
            && !self
                .random
                .groups
                .iter()
                .any(|g| g.params.iter().any(|p| !matches!(p, RandomParam::Coupling)))
    }

    pub fn is_ensemble(&self) -> bool {
        self.ensemble.realizations > 1
    }

    /// Couplings and noise after applying a realization's draws.
    pub fn realized_parameters(&self, draw: &Realization) -> (Vec<f64>, NoiseRates) {
        let mut couplings = self.couplings.clone();
        if let Some(g) = draw.get(RandomParam::Coupling) {
            let max = couplings.iter().copied().fold(0.0, f64::max);
            for c in couplings.iter_mut() {
                *c = if max > 0.0 { g * *c / max } else { g };
            }
        }
        let mut noise = self.noise;
        if let Some(v) = draw.get(RandomParam::Eta) {
            noise.eta = v;
        }
        if let Some(v) = draw.get(RandomParam::GammaDown) {
            noise.gamma_down = v;
        }
        if let Some(v) = draw.get(RandomParam::GammaUp) {
            noise.gamma_up = v;
        }
        (couplings, noise)
    }

    pub fn hamiltonian(&self, couplings: &[f64]) -> Result<Hamiltonian> {
        let w = &self.frequencies;
        let h = match self.qubit_count {
            2 => build_rwa_two(
                &TwoQubitParams {
                    omega1: w[0],
                    omega2: w[1],
                    coupling: CouplingModel::Constant { g_m: couplings[0] },
                },
                couplings[0],
            )?,
            3 => {
                let c = |g: f64| CouplingModel::Constant { g_m: g };
                build_three(
                    &ThreeQubitParams {
                        omega1: w[0],
                        omega2: w[1],
                        omega3: w[2],
                        g12: c(couplings[0]),
                        g23: c(couplings[1]),
                        g13: c(couplings[2]),
                    },
                    [couplings[0], couplings[1], couplings[2]],
                )?
            }
            n => return Err(Error::Config(format!("unsupported qubit count {n}"))),
        };
        Ok(Hamiltonian::Constant(h))
    }

    /// System with the base (unrandomized) parameters.
    pub fn base_system(&self) -> Result<LindbladSystem> {
        LindbladSystem::with_qubit_noise(self.hamiltonian(&self.couplings)?, self.noise)
    }

    /// Base parameters with every noise rate set to zero.
    pub fn noiseless_system(&self) -> Result<LindbladSystem> {
        Ok(LindbladSystem::closed(self.hamiltonian(&self.couplings)?))
    }

    pub fn initial_state(&self) -> DensityMatrix {
        basis_state(&self.initial)
    }
}

impl EnsembleModel for ScenarioSpec {
    fn realize(&self, draw: &Realization) -> Result<(LindbladSystem, DensityMatrix)> {
        let (couplings, noise) = self.realized_parameters(draw);
        let system = LindbladSystem::with_qubit_noise(self.hamiltonian(&couplings)?, noise)?;
        Ok((system, self.initial_state()))
    }
}

/// Master seed of every catalog entry.
pub const DEFAULT_SEED: u64 = 1;

fn label(s: &str) -> BasisLabel {
    BasisLabel::parse(s).expect("catalog labels are valid")
}

fn preset(
    name: &str,
    two_qubits: bool,
    noise: NoiseRates,
    random: &[&[RandomParam]],
    realizations: usize,
) -> ScenarioSpec {
    let (n, frequencies, couplings, initial, target) = if two_qubits {
        (2, vec![1.0, 1.0], vec![1.0], "01", "10")
    } else {
        (3, vec![1.0, 0.5, 1.0], vec![1.0, 1.0, 0.5], "101", "110")
    };
    ScenarioSpec {
        name: name.to_string(),
        qubit_count: n,
        frequencies,
        couplings,
        noise,
        random: RandomSpec {
            groups: random.iter().map(|ps| RandomGroup::unit(ps)).collect(),
        },
        initial: label(initial),
        target: label(target),
        integrator: IntegratorConfig::default(),
        ensemble: EnsembleConfig {
            realizations,
            master_seed: DEFAULT_SEED,
            threads: None,
        },
        has_reference_values: true,
    }
}

/// The named scenarios: one per published panel, plus `fig2g`.
pub fn catalog() -> Vec<ScenarioSpec> {
    use RandomParam::{Coupling, Eta, GammaDown, GammaUp};
    let none = NoiseRates::NONE;
    let all_noise: &[RandomParam] = &[Eta, GammaDown, GammaUp];
    let mut fig2g = preset("fig2g", true, none, &[&[Coupling], all_noise], 1500);
    fig2g.has_reference_values = false;
    vec![
        preset("fig2a", true, none, &[], 1),
        preset("fig2b", true, none, &[&[Coupling]], 1500),
        preset("fig2c", true, none, &[&[Eta]], 1500),
        preset("fig2d", true, none, &[&[GammaDown]], 1500),
        preset("fig2e", true, none, &[&[GammaUp]], 1500),
        preset("fig2f", true, none, &[all_noise], 1500),
        fig2g,
        preset("fig4a", false, none, &[], 1),
        preset("fig4b", false, none, &[&[Coupling]], 150),
        preset("fig4c", false, none, &[&[Eta]], 150),
        preset("fig4d", false, none, &[&[GammaDown]], 150),
        preset("fig4e", false, none, &[&[GammaUp]], 150),
        preset("fig4f", false, none, &[all_noise], 150),
    ]
}

pub fn find_scenario(name: &str) -> Result<ScenarioSpec> {
    catalog()
        .into_iter()
        .find(|s| s.name == name)
        .ok_or_else(|| Error::UnknownScenario(name.to_string()))
}
