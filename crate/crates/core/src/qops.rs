//! Dense operator algebra over small qubit registers.
//!
//! Basis convention: qubit 1 is the most significant bit of the basis index,
//! and the ground state |0⟩ precedes the excited state |1⟩. Under this
//! convention σ^z|1⟩ = +|1⟩, so a free term ½ωσ^z puts the excited state at
//! energy +½ω and σ⁻ lowers |1⟩ to |0⟩.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Largest register this crate handles.
pub const MAX_QUBITS: usize = 3;

/// Tolerances of the [`DensityMatrix`] invariants.
pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-9;

/// A dense complex square matrix over an n-qubit Hilbert space.
#[derive(Clone, PartialEq)]
pub struct Operator(DMatrix<C64>);

impl Operator {
    /// Wraps a matrix, checking that it is square with a power-of-two side and
    /// finite entries.
    pub fn new(m: DMatrix<C64>) -> Result<Self> {
        let dim = m.nrows();
        if m.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: m.ncols(),
            });
        }
        if dim < 2 || !dim.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "operator dimension {dim} is not 2^n with n >= 1"
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidParameter(
                "operator has non-finite entries".into(),
            ));
        }
        Ok(Operator(m))
    }

    pub(crate) fn from_matrix_unchecked(m: DMatrix<C64>) -> Self {
        Operator(m)
    }

    pub fn zeros(dim: usize) -> Self {
        Operator(DMatrix::zeros(dim, dim))
    }

    pub fn identity(dim: usize) -> Self {
        Operator(DMatrix::identity(dim, dim))
    }

    /// Builds an operator from row-major entries.
    pub fn from_rows(dim: usize, entries: &[C64]) -> Result<Self> {
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        Operator::new(DMatrix::from_row_slice(dim, dim, entries))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let d: Vec<C64> = diag.iter().map(|&x| C64::new(x, 0.0)).collect();
        Operator::new(DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d)))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn qubits(&self) -> usize {
        self.dim().trailing_zeros() as usize
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.0
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[(row, col)]
    }

    pub fn dagger(&self) -> Operator {
        Operator(self.0.adjoint())
    }

    pub fn trace(&self) -> C64 {
        self.0.trace()
    }

    pub fn scale(&self, s: C64) -> Operator {
        Operator(&self.0 * s)
    }

    pub fn scale_re(&self, s: f64) -> Operator {
        self.scale(C64::new(s, 0.0))
    }

    pub fn commutator(&self, other: &Operator) -> Operator {
        Operator(&self.0 * &other.0 - &other.0 * &self.0)
    }

    /// Tensor product `self ⊗ other`.
    pub fn kron(&self, other: &Operator) -> Operator {
        Operator(self.0.kronecker(&other.0))
    }

    /// Applies the operator to a state vector.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        let col = nalgebra::DVector::from_column_slice(v);
        Ok((&self.0 * col).as_slice().to_vec())
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Operator) -> f64 {
        self.0
            .iter()
            .zip(other.0.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// ‖A − A†‖ in the max-entry norm.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self.0[(r, c)] - self.0[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        let h = (&self.0 + self.0.adjoint()) * C64::new(0.5, 0.0);
        let mut ev: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }

    /// Real parts of the diagonal.
    pub fn real_diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|k| self.0[(k, k)].re).collect()
    }

    /// Restriction to the given basis indices, in the given order.
    pub fn block(&self, indices: &[usize]) -> DMatrix<C64> {
        DMatrix::from_fn(indices.len(), indices.len(), |r, c| {
            self.0[(indices[r], indices[c])]
        })
    }
}

impl fmt::Debug for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Operator{}", self.0)
    }
}

impl Add for &Operator {
    type Output = Operator;
    fn add(self, rhs: &Operator) -> Operator {
        Operator(&self.0 + &rhs.0)
    }
}

impl Sub for &Operator {
    type Output = Operator;
    fn sub(self, rhs: &Operator) -> Operator {
        Operator(&self.0 - &rhs.0)
    }
}

impl Mul for &Operator {
    type Output = Operator;
    fn mul(self, rhs: &Operator) -> Operator {
        Operator(&self.0 * &rhs.0)
    }
}

impl Neg for &Operator {
    type Output = Operator;
    fn neg(self) -> Operator {
        Operator(-&self.0)
    }
}

/// A Hermitian, unit-trace, positive-semidefinite operator.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(Operator);

impl DensityMatrix {
    /// Validates the density-matrix invariants.
    pub fn new(op: Operator) -> Result<Self> {
        let herm = op.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!(
                "not Hermitian (error {herm:e})"
            )));
        }
        let tr = op.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let min_ev = op.hermitian_eigenvalues()[0];
        if min_ev < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!(
                "not positive semidefinite (min eigenvalue {min_ev:e})"
            )));
        }
        Ok(DensityMatrix(op))
    }

    /// Wraps an operator produced by a trusted evolution; no validation.
    pub(crate) fn from_operator_unchecked(op: Operator) -> Self {
        DensityMatrix(op)
    }

    /// Pure state |ψ⟩⟨ψ| from a normalized amplitude vector.
    pub fn from_pure(amplitudes: &[C64]) -> Result<Self> {
        let dim = amplitudes.len();
        let m = DMatrix::from_fn(dim, dim, |r, c| amplitudes[r] * amplitudes[c].conj());
        DensityMatrix::new(Operator::new(m)?)
    }

    /// I/dim.
    pub fn maximally_mixed(dim: usize) -> Result<Self> {
        DensityMatrix::new(Operator::identity(dim).scale_re(1.0 / dim as f64))
    }

    pub fn op(&self) -> &Operator {
        &self.0
    }

    pub fn into_op(self) -> Operator {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn qubits(&self) -> usize {
        self.0.qubits()
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0.get(row, col)
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// trace(ρ²).
    pub fn purity(&self) -> f64 {
        (self.0.matrix() * self.0.matrix()).trace().re
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.0.hermitian_eigenvalues()[0]
    }
}

/// An ordered list of qubit values, leftmost = qubit 1 = most significant.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BasisLabel(Vec<bool>);

impl BasisLabel {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() || bits.len() > MAX_QUBITS {
            return Err(Error::InvalidParameter(format!(
                "basis label needs 1..={MAX_QUBITS} qubits, got {}",
                bits.len()
            )));
        }
        Ok(BasisLabel(bits))
    }

    /// Parses a string of `0`/`1` digits such as `"101"`.
    pub fn parse(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Error::InvalidParameter(format!(
                    "invalid basis digit `{other}` in `{s}`"
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        BasisLabel::new(bits)
    }

    pub fn from_index(index: usize, qubits: usize) -> Result<Self> {
        if qubits == 0 || qubits > MAX_QUBITS || index >= (1 << qubits) {
            return Err(Error::InvalidParameter(format!(
                "index {index} does not fit in {qubits} qubits"
            )));
        }
        Ok(BasisLabel(
            (0..qubits)
                .map(|j| (index >> (qubits - 1 - j)) & 1 == 1)
                .collect(),
        ))
    }

    pub fn qubits(&self) -> usize {
        self.0.len()
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    /// Binary value of the bits; equals the diagonal index of the state.
    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn excitations(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl Serialize for BasisLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for BasisLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        BasisLabel::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PauliKind {
    X,
    Y,
    Z,
    Plus,
    Minus,
}

/// Single-qubit Pauli and ladder operators in the (|0⟩, |1⟩) basis.
pub fn pauli(kind: PauliKind) -> Operator {
    let m = |a: C64, b: C64, c: C64, d: C64| Operator(DMatrix::from_row_slice(2, 2, &[a, b, c, d]));
    match kind {
        PauliKind::X => m(ZERO, ONE, ONE, ZERO),
        // -i|1⟩⟨0| + i|0⟩⟨1|
        PauliKind::Y => m(ZERO, I, -I, ZERO),
        PauliKind::Z => m(-ONE, ZERO, ZERO, ONE),
        PauliKind::Plus => m(ZERO, ZERO, ONE, ZERO),
        PauliKind::Minus => m(ZERO, ONE, ZERO, ZERO),
    }
}

/// Places a single-qubit operator at `site` (1-based) of an `n`-qubit register.
pub fn embed(op: &Operator, site: usize, n: usize) -> Result<Operator> {
    if op.dim() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: op.dim(),
        });
    }
    if site == 0 || site > n || n > MAX_QUBITS {
        return Err(Error::SiteOutOfRange { site, n });
    }
    let id = Operator::identity(2);
    let mut out: Option<Operator> = None;
    for j in 1..=n {
        let factor = if j == site { op } else { &id };
        out = Some(match out {
            None => factor.clone(),
            Some(acc) => acc.kron(factor),
        });
    }
    Ok(out.expect("n >= 1"))
}

pub(crate) fn embed_kind(kind: PauliKind, site: usize, n: usize) -> Operator {
    embed(&pauli(kind), site, n).expect("site validated by caller")
}

/// Projector onto a computational basis state.
pub fn basis_state(bits: &BasisLabel) -> DensityMatrix {
    let dim = 1 << bits.qubits();
    let k = bits.index();
    let mut m = DMatrix::zeros(dim, dim);
    m[(k, k)] = ONE;
    DensityMatrix(Operator(m))
}

/// Indices of |011⟩, |101⟩, |110⟩.
pub const W_INDICES: [usize; 3] = [3, 5, 6];

/// Amplitudes of (|011⟩ + |101⟩ + |110⟩)/√3.
pub fn w_amplitudes() -> Vec<C64> {
    let a = C64::new(1.0 / 3f64.sqrt(), 0.0);
    (0..8)
        .map(|k| if W_INDICES.contains(&k) { a } else { ZERO })
        .collect()
}

/// Projector onto the three-qubit W state.
pub fn w_state(n: usize) -> Result<DensityMatrix> {
    if n != 3 {
        return Err(Error::InvalidParameter(format!(
            "W state is defined for 3 qubits, got {n}"
        )));
    }
    let mut m = DMatrix::zeros(8, 8);
    for &r in &W_INDICES {
        for &c in &W_INDICES {
            m[(r, c)] = C64::new(1.0 / 3.0, 0.0);
        }
    }
    Ok(DensityMatrix(Operator(m)))
}
