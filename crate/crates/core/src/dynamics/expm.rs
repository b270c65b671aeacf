//! Reference propagation through the exponential of the column-stacked
//! Liouvillian. Shares nothing with the Runge–Kutta path beyond the system
//! description.

use nalgebra::{DMatrix, DVector};

use super::{Hamiltonian, LindbladSystem, StateSeries as _, Trajectory};
use crate::error::{Error, Result};
use crate::qops::{DensityMatrix, Operator, C64};

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.371920351148152;

fn one_norm(a: &DMatrix<C64>) -> f64 {
    a.column_iter()
        .map(|col| col.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant.
pub fn expm(a: &DMatrix<C64>) -> DMatrix<C64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm needs a square matrix");
    let norm = one_norm(a);
    let s = if norm > THETA13 {
        (norm / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let a = a * C64::new(2f64.powi(-s), 0.0);
    let b = |k: usize| C64::new(PADE13[k], 0.0);
    let id = DMatrix::<C64>::identity(n, n);
    let a2 = &a * &a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_inner = &a6 * (&a6 * b(13) + &a4 * b(11) + &a2 * b(9));
    let u = &a * (u_inner + &a6 * b(7) + &a4 * b(5) + &a2 * b(3) + &id * b(1));
    let v = &a6 * (&a6 * b(12) + &a4 * b(10) + &a2 * b(8))
        + &a6 * b(6)
        + &a4 * b(4)
        + &a2 * b(2)
        + &id * b(0);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q
        .lu()
        .solve(&p)
        .expect("Padé denominator is nonsingular for scaled arguments");
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

/// Column-stacked Liouvillian of a time-independent system, acting on
/// vec(ρ):
/// −i(I⊗H − Hᵀ⊗I) + Σ rate (L̄⊗L − ½ I⊗L†L − ½ (L†L)ᵀ⊗I).
pub fn liouvillian(system: &LindbladSystem) -> Result<DMatrix<C64>> {
    let h = match system.hamiltonian() {
        Hamiltonian::Constant(h) => h.matrix(),
        Hamiltonian::TimeDependent { .. } => return Err(Error::NonConstantHamiltonian),
    };
    let n = h.nrows();
    let id = DMatrix::<C64>::identity(n, n);
    let minus_i = C64::new(0.0, -1.0);
    let mut l = (id.kronecker(h) - h.transpose().kronecker(&id)) * minus_i;
    for ch in system.channels() {
        let op = ch.op().matrix();
        let ldl = op.adjoint() * op;
        let rate = C64::new(ch.rate(), 0.0);
        let half = C64::new(0.5, 0.0);
        l += (op.map(|z| z.conj()).kronecker(op)
            - id.kronecker(&ldl) * half
            - ldl.transpose().kronecker(&id) * half)
            * rate;
    }
    Ok(l)
}

/// ρ(t_k) = unvec(exp(t_k L̂) vec(ρ0)) on an increasing grid starting at 0.
/// Consecutive equal spacings reuse the same step propagator.
pub fn propagate_expm(
    system: &LindbladSystem,
    rho0: &DensityMatrix,
    grid: &[f64],
) -> Result<Trajectory> {
    if rho0.dim() != system.dim() {
        return Err(Error::DimensionMismatch {
            expected: system.dim(),
            found: rho0.dim(),
        });
    }
    if grid.is_empty() || grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParameter(
            "grid must be non-empty and increasing".into(),
        ));
    }
    let lv = liouvillian(system)?;
    let n = system.dim();
    let unvec = |v: &DVector<C64>| {
        DensityMatrix::from_operator_unchecked(Operator::from_matrix_unchecked(
            DMatrix::from_column_slice(n, n, v.as_slice()),
        ))
    };

    let mut states = Vec::with_capacity(grid.len());
    let mut v = DVector::from_column_slice(rho0.op().matrix().as_slice());
    let mut t_prev = 0.0;
    let mut cached: Option<(f64, DMatrix<C64>)> = None;
    for &t in grid {
        let dt = t - t_prev;
        if dt != 0.0 {
            let reuse = matches!(&cached, Some((h, _)) if (h - dt).abs() <= 1e-12 * dt.abs());
            if !reuse {
                cached = Some((dt, expm(&(&lv * C64::new(dt, 0.0)))));
            }
            v = &cached.as_ref().expect("just set").1 * &v;
        }
        states.push(unvec(&v));
        t_prev = t;
    }
    let traj = Trajectory {
        grid: grid.to_vec(),
        states,
    };
    debug_assert_eq!(traj.grid().len(), traj.states.len());
    Ok(traj)
}
