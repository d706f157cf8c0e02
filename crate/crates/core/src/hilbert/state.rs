use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use super::{BasisLabel, Operator, SpaceDescriptor, ATOM_DIM};
use crate::error::{Error, Result};
use crate::C64;

/// Norm tolerance enforced by [`StateVector::new`].
pub const NORM_TOL: f64 = 1e-9;

/// Norm slack accepted by the partial traces.
pub const TRACE_INPUT_TOL: f64 = 1e-6;

/// Pure state. Constructors enforce unit norm; propagators may hand back
/// slightly drifted states and report the drift instead of hiding it.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: DVector<C64>,
}

impl StateVector {
    pub fn new(amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::PreconditionViolation(format!(
                "state norm {norm} is not 1 within {NORM_TOL:e}"
            )));
        }
        Ok(Self { amplitudes })
    }

    pub fn normalized(amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::invalid("cannot normalize a zero or non-finite vector"));
        }
        Ok(Self {
            amplitudes: amplitudes.unscale(norm),
        })
    }

    pub(crate) fn from_propagation(amplitudes: DVector<C64>) -> Self {
        Self { amplitudes }
    }

    pub fn basis(space: &SpaceDescriptor, label: BasisLabel) -> Self {
        let mut amplitudes = DVector::zeros(space.total_dim());
        amplitudes[space.index(label)] = C64::new(1.0, 0.0);
        Self { amplitudes }
    }

    /// `atom ⊗ cavity` for a normalized atomic vector and cavity state.
    pub fn product(space: &SpaceDescriptor, atom: &Vector3<C64>, cavity: &StateVector) -> Result<Self> {
        if cavity.dim() != space.cavity_dim() {
            return Err(Error::invalid(format!(
                "cavity state has dim {} but space cavity dim is {}",
                cavity.dim(),
                space.cavity_dim()
            )));
        }
        let amplitudes = DVector::from_iterator(
            space.total_dim(),
            atom.iter().flat_map(|&a| cavity.amplitudes.iter().map(move |&c| a * c)),
        );
        Self::new(amplitudes)
    }

    /// Atomic state ⊗ |n1, n2⟩.
    pub fn atom_fock(space: &SpaceDescriptor, atom: &Vector3<C64>, n1: usize, n2: usize) -> Result<Self> {
        let mut cavity = DVector::zeros(space.cavity_dim());
        cavity[space.cavity_index(n1, n2)] = C64::new(1.0, 0.0);
        Self::product(space, atom, &StateVector { amplitudes: cavity })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// |‖ψ‖ − 1|
    pub fn norm_error(&self) -> f64 {
        (self.norm() - 1.0).abs()
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::invalid("inner product: dimension mismatch"));
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    /// Multiplies by a global phase e^{iα}.
    pub fn with_global_phase(&self, alpha: f64) -> Self {
        Self {
            amplitudes: &self.amplitudes * C64::from_polar(1.0, alpha),
        }
    }

    /// ⟨ψ|A|ψ⟩
    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        let applied = op.apply(&self.amplitudes)?;
        Ok(self.amplitudes.dotc(&applied))
    }
}

/// ⟨ψ|A|ψ⟩
pub fn expectation(state: &StateVector, op: &Operator) -> Result<C64> {
    state.expectation(op)
}

/// Reduced state of the two cavity modes, on Fock(n1_max) ⊗ Fock(n2_max)
/// with the mode-2 photon number fastest.
#[derive(Clone, Debug)]
pub struct DensityMatrix {
    n1_max: usize,
    n2_max: usize,
    entries: DMatrix<C64>,
}

impl DensityMatrix {
    pub const HERMITIAN_TOL: f64 = 1e-10;
    pub const TRACE_TOL: f64 = 1e-9;

    /// Validates Hermiticity and unit trace.
    pub fn new(n1_max: usize, n2_max: usize, entries: DMatrix<C64>) -> Result<Self> {
        let dim = (n1_max + 1) * (n2_max + 1);
        if entries.nrows() != dim || entries.ncols() != dim {
            return Err(Error::invalid(format!(
                "density matrix must be {dim}x{dim} for cutoffs ({n1_max}, {n2_max})"
            )));
        }
        let herm = (&entries - entries.adjoint())
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max);
        if herm > Self::HERMITIAN_TOL {
            return Err(Error::PreconditionViolation(format!(
                "density matrix not Hermitian ({herm:e})"
            )));
        }
        let trace = entries.trace();
        if (trace - C64::new(1.0, 0.0)).norm() > Self::TRACE_TOL {
            return Err(Error::PreconditionViolation(format!(
                "density matrix trace {trace} is not 1"
            )));
        }
        Ok(Self {
            n1_max,
            n2_max,
            entries,
        })
    }

    /// |ψ⟩⟨ψ| for a normalized cavity state.
    pub fn pure(n1_max: usize, n2_max: usize, psi: &StateVector) -> Result<Self> {
        let v = psi.amplitudes();
        Self::new(n1_max, n2_max, v * v.adjoint())
    }

    pub fn n1_max(&self) -> usize {
        self.n1_max
    }

    pub fn n2_max(&self) -> usize {
        self.n2_max
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn index(&self, n1: usize, n2: usize) -> usize {
        n1 * (self.n2_max + 1) + n2
    }

    pub fn label(&self, index: usize) -> (usize, usize) {
        (index / (self.n2_max + 1), index % (self.n2_max + 1))
    }

    pub fn trace(&self) -> C64 {
        self.entries.trace()
    }

    pub fn eigenvalues(&self) -> DVector<f64> {
        self.entries.clone().symmetric_eigenvalues()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().min()
    }

    /// Tr ρ²
    pub fn purity(&self) -> f64 {
        self.entries.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Tr(ρA) for an operator on the cavity space.
    pub fn expectation(&self, op: &Operator) -> Result<C64> {
        if op.dim() != self.dim() {
            return Err(Error::invalid("density expectation: dimension mismatch"));
        }
        let a = op.to_dense();
        Ok(self.entries.component_mul(&a.transpose()).sum())
    }
}

fn check_trace_input(state: &StateVector, space: &SpaceDescriptor) -> Result<()> {
    if state.dim() != space.total_dim() {
        return Err(Error::invalid(format!(
            "state dim {} does not match space dim {}",
            state.dim(),
            space.total_dim()
        )));
    }
    if state.norm_error() > TRACE_INPUT_TOL {
        return Err(Error::PreconditionViolation(format!(
            "partial trace needs a normalized state, ‖ψ‖ = {}",
            state.norm()
        )));
    }
    Ok(())
}

/// Traces out the atom.
pub fn partial_trace_cavity(state: &StateVector, space: &SpaceDescriptor) -> Result<DensityMatrix> {
    check_trace_input(state, space)?;
    let cav = space.cavity_dim();
    // Row `level` holds the cavity amplitudes conditioned on that level.
    let blocks = DMatrix::from_row_slice(ATOM_DIM, cav, state.amplitudes().as_slice());
    let mut rho = blocks.transpose() * blocks.conjugate();
    // Symmetrize away rounding so downstream checks see an exactly Hermitian matrix.
    rho = (&rho + rho.adjoint()) * C64::new(0.5, 0.0);
    let trace = rho.trace().re;
    // Inputs within TRACE_INPUT_TOL are renormalized; the drift is reported by the propagator.
    rho.unscale_mut(trace);
    DensityMatrix::new(space.n1_max(), space.n2_max(), rho)
}

/// Traces out both cavity modes; bare atomic basis |1⟩, |2⟩, |3⟩.
pub fn partial_trace_atom(state: &StateVector, space: &SpaceDescriptor) -> Result<Matrix3<C64>> {
    check_trace_input(state, space)?;
    let cav = space.cavity_dim();
    let amps = state.amplitudes().as_slice();
    Ok(Matrix3::from_fn(|r, c| {
        let row = &amps[r * cav..(r + 1) * cav];
        let col = &amps[c * cav..(c + 1) * cav];
        row.iter().zip(col).map(|(a, b)| a * b.conj()).sum()
    }))
}
