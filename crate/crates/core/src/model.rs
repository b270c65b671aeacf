//! Hamiltonians for capacitively coupled transmon qubits, in dimensionless
//! units (energies divided by ħω_c, times in units of 1/ω_c).

use serde::{Deserialize, Serialize};

use crate::dynamics::Hamiltonian;
use crate::error::{Error, Result};
use crate::qops::{embed_kind, Operator, PauliKind, C64, MAX_QUBITS};

/// Time profile of a coupling strength.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CouplingModel {
    Constant {
        g_m: f64,
    },
    /// g(t) = g0 + g_m cos(ω_m t)
    Parametric {
        g0: f64,
        g_m: f64,
        omega_m: f64,
    },
    /// Amplitude drawn once per realization, uniform on [lo, hi].
    UniformRandom {
        lo: f64,
        hi: f64,
    },
}

impl CouplingModel {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            CouplingModel::Constant { g_m } => g_m.is_finite() && g_m >= 0.0,
            CouplingModel::Parametric { g0, g_m, omega_m } => {
                g0.is_finite() && g_m.is_finite() && omega_m.is_finite() && omega_m > 0.0
            }
            CouplingModel::UniformRandom { lo, hi } => lo.is_finite() && hi.is_finite() && lo <= hi,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "invalid coupling model {self:?}"
            )))
        }
    }

    /// Coupling strength at time `t`. Random models must be realized first.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        match *self {
            CouplingModel::Constant { g_m } => Ok(g_m),
            CouplingModel::Parametric { g0, g_m, omega_m } => Ok(g0 + g_m * (omega_m * t).cos()),
            CouplingModel::UniformRandom { .. } => Err(Error::InvalidParameter(
                "random coupling must be realized before evaluation".into(),
            )),
        }
    }

    /// Maps a uniform variate `u ∈ [0, 1)` to a concrete model.
    pub fn realize(&self, u: f64) -> CouplingModel {
        match *self {
            CouplingModel::UniformRandom { lo, hi } => CouplingModel::Constant {
                g_m: lo + (hi - lo) * u,
            },
            ref other => other.clone(),
        }
    }

    /// Strength of the resonant flip-flop term left after the rotating-wave
    /// approximation. Cosine modulation splits g_m into two counter-rotating
    /// halves, only one of which is resonant.
    pub fn rwa_effective_strength(&self) -> Result<f64> {
        match *self {
            CouplingModel::Constant { g_m } => Ok(g_m),
            CouplingModel::Parametric { g0, g_m, .. } => {
                if g0 != 0.0 {
                    return Err(Error::InvalidParameter(
                        "rotating-wave reduction assumes g0 = 0".into(),
                    ));
                }
                Ok(0.5 * g_m)
            }
            CouplingModel::UniformRandom { .. } => self.value_at(0.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoQubitParams {
    pub omega1: f64,
    pub omega2: f64,
    pub coupling: CouplingModel,
}

impl TwoQubitParams {
    pub fn validate(&self) -> Result<()> {
        check_frequencies(&[self.omega1, self.omega2])?;
        self.coupling.validate()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThreeQubitParams {
    pub omega1: f64,
    pub omega2: f64,
    pub omega3: f64,
    pub g12: CouplingModel,
    pub g23: CouplingModel,
    pub g13: CouplingModel,
}

impl ThreeQubitParams {
    pub fn validate(&self) -> Result<()> {
        check_frequencies(&[self.omega1, self.omega2, self.omega3])?;
        for g in [&self.g12, &self.g23, &self.g13] {
            g.validate()?;
        }
        Ok(())
    }
}

fn check_frequencies(omegas: &[f64]) -> Result<()> {
    if omegas.iter().all(|w| w.is_finite() && *w > 0.0) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "qubit frequencies must be positive, got {omegas:?}"
        )))
    }
}

/// Σ_j ½ ω_j σ_j^z.
pub fn build_h0(omegas: &[f64]) -> Result<Operator> {
    let n = omegas.len();
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::InvalidParameter(format!(
            "need 1..={MAX_QUBITS} frequencies, got {n}"
        )));
    }
    let dim = 1 << n;
    let diag: Vec<f64> = (0..dim)
        .map(|k| {
            omegas
                .iter()
                .enumerate()
                .map(|(j, w)| {
                    let excited = (k >> (n - 1 - j)) & 1 == 1;
                    0.5 * w * if excited { 1.0 } else { -1.0 }
                })
                .sum()
        })
        .collect();
    Operator::from_real_diagonal(&diag)
}

/// Lab-frame capacitive coupling g[σ₁ˣσ₂ˣ + σ₁ᶻσ₂ˣ + σ₁ˣσ₂ᶻ + σ₁ᶻσ₂ᶻ].
pub fn build_hint_lab(g: f64) -> Operator {
    use PauliKind::{X, Z};
    let term = |a, b| &embed_kind(a, 1, 2) * &embed_kind(b, 2, 2);
    let sum = &(&term(X, X) + &term(Z, X)) + &(&term(X, Z) + &term(Z, Z));
    sum.scale_re(g)
}

/// g(σ_i⁺σ_j⁻ + σ_i⁻σ_j⁺) on an n-qubit register.
pub fn flip_flop(i: usize, j: usize, n: usize, g: f64) -> Operator {
    use PauliKind::{Minus, Plus};
    let a = &embed_kind(Plus, i, n) * &embed_kind(Minus, j, n);
    let b = &embed_kind(Minus, i, n) * &embed_kind(Plus, j, n);
    (&a + &b).scale_re(g)
}

/// Interaction Hamiltonian in the frame rotating with H0, including both the
/// slow (ω1−ω2) and fast (ω1+ω2) terms.
pub fn build_hrot(t: f64, params: &TwoQubitParams) -> Result<Operator> {
    use PauliKind::{Minus, Plus};
    let g = params.coupling.value_at(t)?;
    let slow = C64::from_polar(1.0, (params.omega1 - params.omega2) * t);
    let fast = C64::from_polar(1.0, (params.omega1 + params.omega2) * t);
    let pm = &embed_kind(Plus, 1, 2) * &embed_kind(Minus, 2, 2);
    let pp = &embed_kind(Plus, 1, 2) * &embed_kind(Plus, 2, 2);
    let h = &(&pm.scale(slow) + &pm.dagger().scale(slow.conj()))
        + &(&pp.scale(fast) + &pp.dagger().scale(fast.conj()));
    Ok(h.scale_re(g))
}

/// Time-dependent rotating-frame Hamiltonian as an integrator callback.
pub fn rotating_frame_hamiltonian(params: &TwoQubitParams) -> Result<Hamiltonian> {
    params.validate()?;
    params.coupling.value_at(0.0)?;
    let params = params.clone();
    Ok(Hamiltonian::time_dependent(4, move |t| {
        build_hrot(t, &params).expect("coupling validated at construction")
    }))
}

/// Two-qubit Hamiltonian after the rotating-wave approximation:
/// H0 + g(σ₁⁺σ₂⁻ + σ₁⁻σ₂⁺).
pub fn build_rwa_two(params: &TwoQubitParams, g_value: f64) -> Result<Operator> {
    check_frequencies(&[params.omega1, params.omega2])?;
    let h0 = build_h0(&[params.omega1, params.omega2])?;
    Ok(&h0 + &flip_flop(1, 2, 2, g_value))
}

/// Three-qubit Hamiltonian with pairwise flip-flop couplings
/// `g_values = [g12, g23, g13]`.
pub fn build_three(params: &ThreeQubitParams, g_values: [f64; 3]) -> Result<Operator> {
    let omegas = [params.omega1, params.omega2, params.omega3];
    check_frequencies(&omegas)?;
    let [g12, g23, g13] = g_values;
    let h = &build_h0(&omegas)? + &flip_flop(1, 2, 3, g12);
    let h = &h + &flip_flop(2, 3, 3, g23);
    Ok(&h + &flip_flop(1, 3, 3, g13))
}

/// Total excitation number Σ_j (σ_j^z + I)/2.
pub fn excitation_operator(n: usize) -> Operator {
    let dim = 1 << n;
    let diag: Vec<f64> = (0..dim).map(|k: usize| k.count_ones() as f64).collect();
    Operator::from_real_diagonal(&diag).expect("valid diagonal")
}

pub const ELECTRON_CHARGE: f64 = 1.602_176_634e-19;
pub const FLUX_QUANTUM: f64 = 2.067_833_848_461_929e-15;
pub const HBAR: f64 = 1.054_571_817e-34;

/// How qubit transition frequencies are specified.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "values", rename_all = "snake_case")]
pub enum QubitSpec {
    /// Josephson inductances L_i in henries.
    Inductances(Vec<f64>),
    /// Josephson energies E_J in joules.
    JosephsonEnergies(Vec<f64>),
    /// Frequencies already in units of ω_c.
    Frequencies(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingCapacitor {
    /// 1-based qubit indices.
    pub i: usize,
    pub j: usize,
    /// Farads.
    pub capacitance: f64,
}

/// SI circuit description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalCircuitParams {
    /// Qubit shunt capacitances C_i in farads.
    pub qubit_capacitances: Vec<f64>,
    pub coupling_capacitances: Vec<CouplingCapacitor>,
    pub qubits: QubitSpec,
    /// Reference frequency ω_c in rad/s.
    pub reference_frequency: f64,
    pub flux_quantum: f64,
    pub electron_charge: f64,
    pub hbar: f64,
}

impl PhysicalCircuitParams {
    pub fn new(
        qubit_capacitances: Vec<f64>,
        coupling_capacitances: Vec<CouplingCapacitor>,
        qubits: QubitSpec,
        reference_frequency: f64,
    ) -> Self {
        PhysicalCircuitParams {
            qubit_capacitances,
            coupling_capacitances,
            qubits,
            reference_frequency,
            flux_quantum: FLUX_QUANTUM,
            electron_charge: ELECTRON_CHARGE,
            hbar: HBAR,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessCircuit {
    pub omegas: Vec<f64>,
    /// (i, j, g_ij) with 1-based indices.
    pub couplings: Vec<(usize, usize, f64)>,
}

/// g_ij = C_ij √(ω_i ω_j) / (2 √(C_i C_j)).
pub fn coupling_strength(c_ij: f64, c_i: f64, c_j: f64, omega_i: f64, omega_j: f64) -> f64 {
    c_ij * (omega_i * omega_j).sqrt() / (2.0 * (c_i * c_j).sqrt())
}

/// Converts SI circuit values to dimensionless frequencies and couplings.
pub fn dimensionless_from_circuit(p: &PhysicalCircuitParams) -> Result<DimensionlessCircuit> {
    let n = p.qubit_capacitances.len();
    let positive = |x: f64| x.is_finite() && x > 0.0;
    if n == 0 || !p.qubit_capacitances.iter().all(|&c| positive(c)) {
        return Err(Error::InvalidParameter(
            "qubit capacitances must be positive".into(),
        ));
    }
    for (name, v) in [
        ("reference_frequency", p.reference_frequency),
        ("flux_quantum", p.flux_quantum),
        ("electron_charge", p.electron_charge),
        ("hbar", p.hbar),
    ] {
        if !positive(v) {
            return Err(Error::InvalidParameter(format!("{name} must be positive")));
        }
    }
    let energy_scale = p.hbar * p.reference_frequency;
    let charging: Vec<f64> = p
        .qubit_capacitances
        .iter()
        .map(|c| p.electron_charge.powi(2) / (2.0 * c))
        .collect();

    let omegas: Vec<f64> = match &p.qubits {
        QubitSpec::Frequencies(w) => {
            if w.len() != n || !w.iter().all(|&x| positive(x)) {
                return Err(Error::InvalidParameter(
                    "need one positive frequency per qubit".into(),
                ));
            }
            w.clone()
        }
        QubitSpec::Inductances(l) | QubitSpec::JosephsonEnergies(l) => {
            if l.len() != n || !l.iter().all(|&x| positive(x)) {
                return Err(Error::InvalidParameter(
                    "need one positive inductance/energy per qubit".into(),
                ));
            }
            let phi = p.flux_quantum / (2.0 * std::f64::consts::PI);
            l.iter()
                .zip(&charging)
                .map(|(&x, &ec)| {
                    let ej = match p.qubits {
                        QubitSpec::Inductances(_) => phi * phi / x,
                        _ => x,
                    };
                    ((8.0 * ec * ej).sqrt() - ec) / energy_scale
                })
                .collect()
        }
    };

    let mut couplings = Vec::with_capacity(p.coupling_capacitances.len());
    for cc in &p.coupling_capacitances {
        if cc.i == 0 || cc.j == 0 || cc.i > n || cc.j > n || cc.i == cc.j {
            return Err(Error::InvalidParameter(format!(
                "coupling capacitor ({}, {}) does not join two distinct qubits",
                cc.i, cc.j
            )));
        }
        if !cc.capacitance.is_finite() || cc.capacitance < 0.0 {
            return Err(Error::InvalidParameter(
                "coupling capacitance must be non-negative".into(),
            ));
        }
        let g = coupling_strength(
            cc.capacitance,
            p.qubit_capacitances[cc.i - 1],
            p.qubit_capacitances[cc.j - 1],
            omegas[cc.i - 1],
            omegas[cc.j - 1],
        );
        couplings.push((cc.i, cc.j, g));
    }
    Ok(DimensionlessCircuit { omegas, couplings })
}
