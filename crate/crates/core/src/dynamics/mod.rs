//! Lindblad master equation: generator, adaptive integration, and a
//! matrix-exponential reference propagator.

mod expm;
mod integrator;

use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use expm::{expm, liouvillian, propagate_expm};
pub use integrator::{integrate, IntegratorConfig, StateSeries, Trajectory};

use crate::error::{Error, Result};
use crate::qops::{embed_kind, DensityMatrix, Operator, PauliKind, C64};

/// Per-qubit noise rates, identical on every qubit.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseRates {
    /// Emission, collapse operator σ⁻.
    pub gamma_down: f64,
    /// Absorption, collapse operator σ⁺.
    pub gamma_up: f64,
    /// Dephasing, collapse operator σ^z.
    pub eta: f64,
}

impl NoiseRates {
    pub const NONE: NoiseRates = NoiseRates {
        gamma_down: 0.0,
        gamma_up: 0.0,
        eta: 0.0,
    };

    pub fn validate(&self) -> Result<()> {
        for (name, r) in [
            ("gamma_down", self.gamma_down),
            ("gamma_up", self.gamma_up),
            ("eta", self.eta),
        ] {
            if !r.is_finite() || r < 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {r} must be >= 0"
                )));
            }
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.gamma_down == 0.0 && self.gamma_up == 0.0 && self.eta == 0.0
    }
}

/// Constant or time-dependent Hamiltonian.
#[derive(Clone)]
pub enum Hamiltonian {
    Constant(Operator),
    TimeDependent {
        dim: usize,
        f: Arc<dyn Fn(f64) -> Operator + Send + Sync>,
    },
}

impl Hamiltonian {
    pub fn time_dependent<F>(dim: usize, f: F) -> Self
    where
        F: Fn(f64) -> Operator + Send + Sync + 'static,
    {
        Hamiltonian::TimeDependent {
            dim,
            f: Arc::new(f),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Hamiltonian::Constant(h) => h.dim(),
            Hamiltonian::TimeDependent { dim, .. } => *dim,
        }
    }

    pub fn at(&self, t: f64) -> Operator {
        match self {
            Hamiltonian::Constant(h) => h.clone(),
            Hamiltonian::TimeDependent { f, .. } => f(t),
        }
    }

    pub fn is_constant(&self) -> bool {
        matches!(self, Hamiltonian::Constant(_))
    }
}

impl fmt::Debug for Hamiltonian {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Hamiltonian::Constant(h) => f.debug_tuple("Constant").field(h).finish(),
            Hamiltonian::TimeDependent { dim, .. } => f
                .debug_struct("TimeDependent")
                .field("dim", dim)
                .finish_non_exhaustive(),
        }
    }
}

/// A collapse operator with its rate. Nonzero entries are cached for the
/// jump term L ρ L†.
#[derive(Clone, Debug)]
pub struct Channel {
    op: Operator,
    rate: f64,
    nonzeros: Vec<(usize, usize, C64)>,
}

impl Channel {
    pub fn new(op: Operator, rate: f64) -> Result<Self> {
        if !rate.is_finite() || rate < 0.0 {
            return Err(Error::InvalidParameter(format!(
                "channel rate {rate} must be >= 0"
            )));
        }
        let n = op.dim();
        let nonzeros = (0..n)
            .flat_map(|r| (0..n).map(move |c| (r, c)))
            .filter_map(|(r, c)| {
                let v = op.get(r, c);
                (v.norm() != 0.0).then_some((r, c, v))
            })
            .collect();
        Ok(Channel { op, rate, nonzeros })
    }

    pub fn op(&self) -> &Operator {
        &self.op
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    /// out += rate · L ρ L†
    fn add_jump(&self, rho: &DMatrix<C64>, out: &mut DMatrix<C64>) {
        for &(a, b, lab) in &self.nonzeros {
            let la = lab * self.rate;
            for &(c, d, lcd) in &self.nonzeros {
                out[(a, c)] += la * rho[(b, d)] * lcd.conj();
            }
        }
    }
}

/// dρ/dt = −i[H(t), ρ] + Σ_j rate_j D[L_j]ρ
#[derive(Clone, Debug)]
pub struct LindbladSystem {
    hamiltonian: Hamiltonian,
    channels: Vec<Channel>,
    /// −½ i Σ rate L†L, folded into an effective non-Hermitian Hamiltonian.
    anti_hermitian: DMatrix<C64>,
    /// H − ½ i Σ rate L†L when H is constant.
    effective: Option<DMatrix<C64>>,
}

impl LindbladSystem {
    pub fn new(hamiltonian: Hamiltonian, channels: Vec<Channel>) -> Result<Self> {
        let dim = hamiltonian.dim();
        let mut anti = DMatrix::<C64>::zeros(dim, dim);
        for ch in &channels {
            if ch.op.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: ch.op.dim(),
                });
            }
            let ldl = ch.op.matrix().adjoint() * ch.op.matrix();
            anti += ldl * C64::new(0.0, -0.5 * ch.rate);
        }
        let effective = match &hamiltonian {
            Hamiltonian::Constant(h) => {
                if h.dim() != dim {
                    unreachable!()
                }
                Some(h.matrix() + &anti)
            }
            Hamiltonian::TimeDependent { .. } => None,
        };
        let channels = channels.into_iter().filter(|c| c.rate > 0.0).collect();
        Ok(LindbladSystem {
            hamiltonian,
            channels,
            anti_hermitian: anti,
            effective,
        })
    }

    /// Closed-system (von Neumann) evolution.
    pub fn closed(hamiltonian: Hamiltonian) -> Self {
        LindbladSystem::new(hamiltonian, Vec::new()).expect("no channels to validate")
    }

    /// Emission, absorption and dephasing on each of the `n` qubits.
    pub fn with_qubit_noise(hamiltonian: Hamiltonian, rates: NoiseRates) -> Result<Self> {
        rates.validate()?;
        let dim = hamiltonian.dim();
        let n = dim.trailing_zeros() as usize;
        let mut channels = Vec::new();
        for j in 1..=n {
            for (kind, rate) in [
                (PauliKind::Minus, rates.gamma_down),
                (PauliKind::Plus, rates.gamma_up),
                (PauliKind::Z, rates.eta),
            ] {
                if rate > 0.0 {
                    channels.push(Channel::new(embed_kind(kind, j, n), rate)?);
                }
            }
        }
        LindbladSystem::new(hamiltonian, channels)
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn is_constant(&self) -> bool {
        self.hamiltonian.is_constant()
    }

    pub(crate) fn derivative(&self, t: f64, rho: &DMatrix<C64>) -> DMatrix<C64> {
        let heff = match &self.effective {
            Some(h) => std::borrow::Cow::Borrowed(h),
            None => {
                std::borrow::Cow::Owned(self.hamiltonian.at(t).into_matrix() + &self.anti_hermitian)
            }
        };
        let mut out = (&*heff * rho - rho * heff.adjoint()) * C64::new(0.0, -1.0);
        for ch in &self.channels {
            ch.add_jump(rho, &mut out);
        }
        out
    }
}

/// D[L]ρ = LρL† − ½(L†Lρ + ρL†L)
pub fn dissipator(l: &Operator, rho: &DensityMatrix) -> Result<Operator> {
    if l.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: l.dim(),
        });
    }
    let l = l.matrix();
    let r = rho.op().matrix();
    let ldl = l.adjoint() * l;
    let out = l * r * l.adjoint() - (&ldl * r + r * &ldl) * C64::new(0.5, 0.0);
    Ok(Operator::from_matrix_unchecked(out))
}

/// Right-hand side of the master equation at time `t`.
pub fn lindblad_rhs(t: f64, rho: &Operator, system: &LindbladSystem) -> Result<Operator> {
    if rho.dim() != system.dim() {
        return Err(Error::DimensionMismatch {
            expected: system.dim(),
            found: rho.dim(),
        });
    }
    Ok(Operator::from_matrix_unchecked(
        system.derivative(t, rho.matrix()),
    ))
}
