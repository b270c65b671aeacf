//! Dormand–Prince 5(4) with Hairer's fourth-order continuous extension,
//! sampled on a uniform output grid.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::LindbladSystem;
use crate::error::{Error, Result};
use crate::qops::{DensityMatrix, Operator, C64};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

const SAFETY: f64 = 0.9;
const FAC_MIN: f64 = 0.2;
const FAC_MAX: f64 = 10.0;

/// Thresholds at which `integrate` aborts: ten times the trajectory
/// invariants (trace 1e-8, Hermiticity 1e-10, positivity −1e-9).
const TRACE_ABORT: f64 = 1e-7;
const HERMITIAN_ABORT: f64 = 1e-9;
const POSITIVITY_ABORT: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub t_max: f64,
    pub grid_points: usize,
    pub max_steps: usize,
    /// Abort when a grid state breaks the density-matrix invariants.
    pub check_invariants: bool,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-9,
            abs_tol: 1e-9,
            t_max: 10.0,
            grid_points: 1001,
            max_steps: 10_000_000,
            check_invariants: true,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::InvalidParameter(
                "tolerances must be positive".into(),
            ));
        }
        if !(self.t_max.is_finite() && self.t_max > 0.0) {
            return Err(Error::InvalidParameter("t_max must be positive".into()));
        }
        if self.grid_points < 2 {
            return Err(Error::InvalidParameter("grid_points must be >= 2".into()));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        uniform_grid(self.t_max, self.grid_points)
    }
}

pub(crate) fn uniform_grid(t_max: f64, points: usize) -> Vec<f64> {
    let last = (points - 1) as f64;
    (0..points).map(|k| t_max * k as f64 / last).collect()
}

/// Density matrices sampled on a time grid.
pub trait StateSeries {
    fn grid(&self) -> &[f64];
    fn states(&self) -> &[DensityMatrix];
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub grid: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

impl StateSeries for Trajectory {
    fn grid(&self) -> &[f64] {
        &self.grid
    }
    fn states(&self) -> &[DensityMatrix] {
        &self.states
    }
}

fn error_norm(
    err: &DMatrix<C64>,
    y0: &DMatrix<C64>,
    y1: &DMatrix<C64>,
    cfg: &IntegratorConfig,
) -> f64 {
    let mut worst: f64 = 0.0;
    for ((e, a), b) in err.iter().zip(y0.iter()).zip(y1.iter()) {
        let sc_re = cfg.abs_tol + cfg.rel_tol * a.re.abs().max(b.re.abs());
        let sc_im = cfg.abs_tol + cfg.rel_tol * a.im.abs().max(b.im.abs());
        worst = worst.max((e.re / sc_re).abs()).max((e.im / sc_im).abs());
    }
    worst
}

fn max_norm(m: &DMatrix<C64>) -> f64 {
    m.iter()
        .map(|z| z.re.abs().max(z.im.abs()))
        .fold(0.0, f64::max)
}

/// Hairer's starting step heuristic for a fifth-order method.
fn initial_step(
    system: &LindbladSystem,
    y0: &DMatrix<C64>,
    f0: &DMatrix<C64>,
    cfg: &IntegratorConfig,
) -> f64 {
    let scale = |y: &DMatrix<C64>, v: &DMatrix<C64>| {
        let mut acc = 0.0;
        for (a, b) in v.iter().zip(y.iter()) {
            let s_re = cfg.abs_tol + cfg.rel_tol * b.re.abs();
            let s_im = cfg.abs_tol + cfg.rel_tol * b.im.abs();
            acc += (a.re / s_re).powi(2) + (a.im / s_im).powi(2);
        }
        (acc / (2 * v.len()) as f64).sqrt()
    };
    let d0 = scale(y0, y0);
    let d1 = scale(y0, f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let h0 = h0.min(cfg.t_max);
    let y1 = y0 + f0 * C64::new(h0, 0.0);
    let f1 = system.derivative(h0, &y1);
    let d2 = scale(y0, &(f1 - f0)) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(1.0 / 5.0)
    };
    (100.0 * h0).min(h1).min(cfg.t_max)
}

fn check_state(t: f64, rho: &DMatrix<C64>) -> Result<()> {
    let op = Operator::from_matrix_unchecked(rho.clone());
    let tr = op.trace();
    if (tr.re - 1.0).abs() > TRACE_ABORT || tr.im.abs() > TRACE_ABORT {
        return Err(Error::InvariantViolation {
            t,
            what: format!("trace drifted to {tr}"),
        });
    }
    let herm = op.hermiticity_error();
    if herm > HERMITIAN_ABORT {
        return Err(Error::InvariantViolation {
            t,
            what: format!("Hermiticity error {herm:e}"),
        });
    }
    let min_ev = op.hermitian_eigenvalues()[0];
    if min_ev < -POSITIVITY_ABORT {
        return Err(Error::InvariantViolation {
            t,
            what: format!("negative eigenvalue {min_ev:e}"),
        });
    }
    Ok(())
}

/// Integrates the master equation from `rho0` and samples it on the uniform
/// grid of `config`. The trace is not renormalized.
pub fn integrate(
    system: &LindbladSystem,
    rho0: &DensityMatrix,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    config.validate()?;
    if rho0.dim() != system.dim() {
        return Err(Error::DimensionMismatch {
            expected: system.dim(),
            found: rho0.dim(),
        });
    }
    let grid = config.grid();
    let t_end = config.t_max;
    let mut states = Vec::with_capacity(grid.len());
    let mut emit = |t: f64, m: DMatrix<C64>| -> Result<()> {
        if config.check_invariants {
            check_state(t, &m)?;
        }
        states.push(DensityMatrix::from_operator_unchecked(
            Operator::from_matrix_unchecked(m),
        ));
        Ok(())
    };

    let mut y = rho0.op().matrix().clone();
    emit(0.0, y.clone())?;
    let mut next = 1;

    let mut t = 0.0;
    let mut k1 = system.derivative(t, &y);
    let mut h = initial_step(system, &y, &k1, config);
    let mut steps = 0usize;
    let c = |x: f64| C64::new(x, 0.0);

    while next < grid.len() {
        steps += 1;
        if steps > config.max_steps {
            return Err(Error::StepSizeUnderflow { t });
        }
        let last = t + h >= t_end || (t_end - (t + h)) < 1e-12 * t_end;
        if last {
            h = t_end - t;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { t });
        }

        let k2 = system.derivative(t + C2 * h, &(&y + &k1 * c(h * A21)));
        let k3 = system.derivative(t + C3 * h, &(&y + (&k1 * c(A31) + &k2 * c(A32)) * c(h)));
        let k4 = system.derivative(
            t + C4 * h,
            &(&y + (&k1 * c(A41) + &k2 * c(A42) + &k3 * c(A43)) * c(h)),
        );
        let k5 = system.derivative(
            t + C5 * h,
            &(&y + (&k1 * c(A51) + &k2 * c(A52) + &k3 * c(A53) + &k4 * c(A54)) * c(h)),
        );
        let k6 = system.derivative(
            t + h,
            &(&y + (&k1 * c(A61) + &k2 * c(A62) + &k3 * c(A63) + &k4 * c(A64) + &k5 * c(A65))
                * c(h)),
        );
        let y_new =
            &y + (&k1 * c(A71) + &k3 * c(A73) + &k4 * c(A74) + &k5 * c(A75) + &k6 * c(A76)) * c(h);
        let t_new = if last { t_end } else { t + h };
        let k7 = system.derivative(t_new, &y_new);
        let err =
            (&k1 * c(E1) + &k3 * c(E3) + &k4 * c(E4) + &k5 * c(E5) + &k6 * c(E6) + &k7 * c(E7))
                * c(h);
        let en = error_norm(&err, &y, &y_new, config);
        if !en.is_finite() {
            h *= FAC_MIN;
            continue;
        }

        if en <= 1.0 {
            // dense output on (t, t_new]
            let ydiff = &y_new - &y;
            let bspl = &k1 * c(h) - &ydiff;
            let r4 = &ydiff - &k7 * c(h) - &bspl;
            let r5 =
                (&k1 * c(D1) + &k3 * c(D3) + &k4 * c(D4) + &k5 * c(D5) + &k6 * c(D6) + &k7 * c(D7))
                    * c(h);
            while next < grid.len() && (grid[next] <= t_new || next == grid.len() - 1 && last) {
                let tg = grid[next];
                let m = if tg >= t_new {
                    y_new.clone()
                } else {
                    let th = (tg - t) / h;
                    let th1 = 1.0 - th;
                    &y + (&ydiff + (&bspl + (&r4 + &r5 * c(th1)) * c(th)) * c(th1)) * c(th)
                };
                emit(tg, m)?;
                next += 1;
            }
            let fac = (SAFETY * en.max(1e-10).powf(-0.2)).clamp(FAC_MIN, FAC_MAX);
            t = t_new;
            y = y_new;
            k1 = k7;
            h *= fac;
            if !(max_norm(&y).is_finite()) {
                return Err(Error::InvariantViolation {
                    t,
                    what: "state diverged".into(),
                });
            }
        } else {
            let fac = (SAFETY * en.powf(-0.2)).clamp(FAC_MIN, 1.0);
            h *= fac;
        }
    }
    Ok(Trajectory { grid, states })
}
