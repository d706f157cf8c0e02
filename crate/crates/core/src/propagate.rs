//! Unitary propagation.
//!
//! Static Hamiltonians are diagonalized once, block by block: the nonzero
//! pattern of H is split into connected components, each one diagonalized
//! densely, and ψ(t) = V e^{−iΛt} V† ψ(0) evaluated per block. Time-dependent
//! Hamiltonians go through an embedded Dormand–Prince 5(4) integrator. Neither
//! path renormalizes; norm drift is reported in the [`Trajectory`].

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::hilbert::{CsrMatrix, Operator, StateVector};
use crate::model::InteractionHamiltonian;
use crate::C64;

const I: C64 = C64::new(0.0, 1.0);
const ZERO: C64 = C64::new(0.0, 0.0);

/// Time-indexed Hamiltonian.
pub trait HamiltonianSource: Sync {
    fn dim(&self) -> usize;

    /// `y += alpha H(t) x`
    fn apply_acc(&self, t: f64, alpha: C64, x: &[C64], y: &mut [C64]);

    fn operator_at(&self, t: f64) -> Result<Operator>;

    fn is_hermitian(&self) -> bool {
        self.operator_at(0.0)
            .is_ok_and(|h| h.hermiticity_error() <= crate::hilbert::operator::HERMITIAN_TOL)
    }
}

/// A constant Hamiltonian.
pub struct ConstantHamiltonian {
    op: Operator,
    csr: CsrMatrix,
}

impl ConstantHamiltonian {
    pub fn new(op: Operator) -> Self {
        let csr = op.to_csr();
        Self { op, csr }
    }
}

impl HamiltonianSource for ConstantHamiltonian {
    fn dim(&self) -> usize {
        self.op.dim()
    }

    fn apply_acc(&self, _t: f64, alpha: C64, x: &[C64], y: &mut [C64]) {
        self.csr.gemv_acc(alpha, x, y);
    }

    fn operator_at(&self, _t: f64) -> Result<Operator> {
        Ok(self.op.clone())
    }
}

/// e^{iωt}R + e^{−iωt}R†, Hermitian by construction.
pub struct HarmonicHamiltonian {
    raising: CsrMatrix,
    lowering: CsrMatrix,
    frequency: f64,
    source: InteractionHamiltonian,
}

impl From<&InteractionHamiltonian> for HarmonicHamiltonian {
    fn from(h: &InteractionHamiltonian) -> Self {
        Self {
            raising: h.raising().to_csr(),
            lowering: h.lowering().to_csr(),
            frequency: h.frequency(),
            source: h.clone(),
        }
    }
}

impl HamiltonianSource for HarmonicHamiltonian {
    fn dim(&self) -> usize {
        self.raising.dim()
    }

    fn apply_acc(&self, t: f64, alpha: C64, x: &[C64], y: &mut [C64]) {
        let phase = C64::from_polar(1.0, self.frequency * t);
        self.raising.gemv_acc(alpha * phase, x, y);
        self.lowering.gemv_acc(alpha * phase.conj(), x, y);
    }

    fn operator_at(&self, t: f64) -> Result<Operator> {
        self.source.at(t)
    }

    fn is_hermitian(&self) -> bool {
        true
    }
}

/// Sampled propagation record.
#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    /// |‖ψ‖ − 1| at each sample.
    pub norm_errors: Vec<f64>,
    /// Accepted integrator steps (0 for exact propagation).
    pub steps: usize,
    pub rejected_steps: usize,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn push(&mut self, t: f64, state: StateVector) {
        self.norm_errors.push(state.norm_error());
        self.times.push(t);
        self.states.push(state);
    }

    /// max_t |⟨H⟩(t) − ⟨H⟩(t₀)|
    pub fn energy_drift(&self, h: &Operator) -> Result<f64> {
        let first = self
            .states
            .first()
            .ok_or_else(|| Error::invalid("energy drift of an empty trajectory"))?;
        let e0 = first.expectation(h)?.re;
        self.states
            .iter()
            .try_fold(0.0f64, |acc, s| Ok(acc.max((s.expectation(h)?.re - e0).abs())))
    }
}

/// Largest norm error along a trajectory.
pub fn check_unitarity(traj: &Trajectory) -> Result<f64> {
    if traj.is_empty() {
        return Err(Error::invalid("check_unitarity: empty trajectory"));
    }
    Ok(traj.norm_errors.iter().copied().fold(0.0, f64::max))
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::invalid("empty time grid"));
    }
    if times.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid("non-finite sample time"));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("sample times must be strictly increasing"));
    }
    Ok(())
}

/// `samples` equally spaced times on [0, t_final].
pub fn uniform_times(t_final: f64, samples: usize) -> Vec<f64> {
    let n = samples.max(2);
    (0..n).map(|k| t_final * k as f64 / (n - 1) as f64).collect()
}

struct EigenBlock {
    indices: Vec<usize>,
    energies: DVector<f64>,
    vectors: DMatrix<C64>,
}

/// Reusable e^{−iHt} for a constant Hermitian H.
pub struct StaticPropagator {
    dim: usize,
    blocks: Vec<EigenBlock>,
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

/// Connected components of the nonzero pattern, each sorted, ordered by
/// smallest index.
fn components(csr: &CsrMatrix) -> Vec<Vec<usize>> {
    let dim = csr.dim();
    let mut parent: Vec<usize> = (0..dim).collect();
    for (r, c, _) in csr.iter() {
        let (a, b) = (find(&mut parent, r), find(&mut parent, c));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut slot = vec![usize::MAX; dim];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for i in 0..dim {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    groups
}

impl StaticPropagator {
    pub fn new(h: &Operator) -> Result<Self> {
        let herm = h.hermiticity_error();
        if herm > crate::hilbert::operator::HERMITIAN_TOL {
            return Err(Error::invalid(format!(
                "static propagation needs a Hermitian H (error {herm:e})"
            )));
        }
        let csr = h.to_csr();
        let blocks = components(&csr)
            .into_iter()
            .map(|indices| {
                let n = indices.len();
                let mut block = DMatrix::from_fn(n, n, |r, c| csr.get(indices[r], indices[c]));
                block = (&block + block.adjoint()) * C64::new(0.5, 0.0);
                let eig = SymmetricEigen::try_new(block, f64::EPSILON, 0)
                    .ok_or_else(|| Error::Eigen(format!("block of size {n} did not converge")))?;
                Ok(EigenBlock {
                    indices,
                    energies: eig.eigenvalues,
                    vectors: eig.eigenvectors,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { dim: h.dim(), blocks })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.indices.len()).collect()
    }

    /// Eigenvalues of H, ascending.
    pub fn spectrum(&self) -> Vec<f64> {
        let mut e: Vec<f64> = self.blocks.iter().flat_map(|b| b.energies.iter().copied()).collect();
        e.sort_by(f64::total_cmp);
        e
    }

    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        if psi.dim() != self.dim {
            return Err(Error::invalid(format!(
                "state dim {} does not match Hamiltonian dim {}",
                psi.dim(),
                self.dim
            )));
        }
        let amps = psi.amplitudes();
        let mut out = DVector::zeros(self.dim);
        for block in &self.blocks {
            let local = DVector::from_iterator(block.indices.len(), block.indices.iter().map(|&i| amps[i]));
            let mut coeffs = block.vectors.ad_mul(&local);
            for (c, e) in coeffs.iter_mut().zip(block.energies.iter()) {
                *c *= C64::from_polar(1.0, -e * t);
            }
            let evolved = &block.vectors * coeffs;
            for (&i, v) in block.indices.iter().zip(evolved.iter()) {
                out[i] = *v;
            }
        }
        Ok(StateVector::from_propagation(out))
    }

    /// ψ(t) at each of `times` (absolute, from ψ(0) = `psi0`).
    pub fn trajectory(&self, psi0: &StateVector, times: &[f64]) -> Result<Trajectory> {
        check_times(times)?;
        let mut traj = Trajectory::default();
        for &t in times {
            traj.push(t, self.evolve(psi0, t)?);
        }
        Ok(traj)
    }
}

/// e^{−iHt}ψ₀
pub fn evolve_static(h: &Operator, psi0: &StateVector, t: f64) -> Result<StateVector> {
    StaticPropagator::new(h)?.evolve(psi0, t)
}

// Dormand–Prince 5(4) tableau.
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
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Fifth- minus fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

struct Dopri<'a, S: HamiltonianSource + ?Sized> {
    source: &'a S,
    k: [Vec<C64>; 7],
    stage: Vec<C64>,
    y_new: Vec<C64>,
}

impl<'a, S: HamiltonianSource + ?Sized> Dopri<'a, S> {
    fn new(source: &'a S) -> Self {
        let n = source.dim();
        Self {
            source,
            k: std::array::from_fn(|_| vec![ZERO; n]),
            stage: vec![ZERO; n],
            y_new: vec![ZERO; n],
        }
    }

    /// out = −i H(t) y
    fn rhs(source: &S, t: f64, y: &[C64], out: &mut [C64]) {
        out.fill(ZERO);
        source.apply_acc(t, -I, y, out);
    }

    fn combine(stage: &mut [C64], y: &[C64], h: f64, k: &[Vec<C64>; 7], weights: &[(usize, f64)]) {
        for (i, s) in stage.iter_mut().enumerate() {
            let mut acc = ZERO;
            for &(j, w) in weights {
                acc += k[j][i] * w;
            }
            *s = y[i] + acc * h;
        }
    }

    /// One trial step from (t, y) with k[0] = f(t, y) already filled. Leaves
    /// the candidate in `y_new`, f(t+h, y_new) in k[6]; returns the error norm.
    fn try_step(&mut self, t: f64, y: &[C64], h: f64) -> f64 {
        let src = self.source;
        let stages: [(f64, &[(usize, f64)]); 5] = [
            (C2, &[(0, A21)]),
            (C3, &[(0, A31), (1, A32)]),
            (C4, &[(0, A41), (1, A42), (2, A43)]),
            (C5, &[(0, A51), (1, A52), (2, A53), (3, A54)]),
            (1.0, &[(0, A61), (1, A62), (2, A63), (3, A64), (4, A65)]),
        ];
        for (s, (c, weights)) in stages.iter().enumerate() {
            Self::combine(&mut self.stage, y, h, &self.k, weights);
            let (_, rest) = self.k.split_at_mut(s + 1);
            Self::rhs(src, t + c * h, &self.stage, &mut rest[0]);
        }
        Self::combine(
            &mut self.y_new,
            y,
            h,
            &self.k,
            &[(0, B1), (2, B3), (3, B4), (4, B5), (5, B6)],
        );
        let (_, last) = self.k.split_at_mut(6);
        Self::rhs(src, t + h, &self.y_new, &mut last[0]);
        let k = &self.k;
        let err2: f64 = (0..y.len())
            .map(|i| {
                let e = k[0][i] * E1 + k[2][i] * E3 + k[3][i] * E4 + k[4][i] * E5 + k[5][i] * E6 + k[6][i] * E7;
                (e * h).norm_sqr()
            })
            .sum();
        err2.sqrt()
    }
}

/// Adaptive Dormand–Prince 5(4) integration of i dψ/dt = H(t)ψ.
///
/// `psi0` is the state at `times[0]`; the returned trajectory holds ψ at every
/// entry of `times`. Steps are controlled per unit step: an accepted step of
/// length h has estimated local error (2-norm) at most `tol · h / T`, with T
/// the integration span, so every local error is below `tol` and the
/// accumulated error stays of order `tol` regardless of the span.
pub fn evolve_timedep<S: HamiltonianSource + ?Sized>(
    source: &S,
    psi0: &StateVector,
    times: &[f64],
    tol: f64,
) -> Result<Trajectory> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(Error::invalid(format!("tolerance must be positive, got {tol}")));
    }
    check_times(times)?;
    if psi0.dim() != source.dim() {
        return Err(Error::invalid("initial state does not match Hamiltonian dimension"));
    }
    if !source.is_hermitian() {
        return Err(Error::invalid("time-dependent Hamiltonian is not Hermitian"));
    }

    let mut traj = Trajectory::default();
    let mut dp = Dopri::new(source);
    let mut y: Vec<C64> = psi0.amplitudes().iter().copied().collect();
    let mut t = times[0];
    traj.push(t, psi0.clone());
    Dopri::rhs(source, t, &y, &mut dp.k[0]);

    let rate = dp.k[0].iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
    let span = times[times.len() - 1] - t;
    let mut h = if rate > 0.0 {
        0.5 * (tol / span.max(1.0)).powf(0.2) / rate
    } else {
        span
    };
    h = h.min(span);

    for &target in &times[1..] {
        while t < target {
            let remaining = target - t;
            let last = h >= remaining;
            let step = if last { remaining } else { h };
            if step <= 1e-14 * t.abs().max(1.0) && !last {
                return Err(Error::Stiffness {
                    t,
                    step,
                    error_estimate: f64::NAN,
                    tol,
                });
            }
            let err = dp.try_step(t, &y, step);
            if !err.is_finite() {
                return Err(Error::Stiffness {
                    t,
                    step,
                    error_estimate: err,
                    tol,
                });
            }
            let budget = tol * step / span;
            let factor = if err == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * (budget / err).powf(0.25)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            if err <= budget {
                t = if last { target } else { t + step };
                std::mem::swap(&mut y, &mut dp.y_new);
                dp.k.swap(0, 6);
                traj.steps += 1;
                // A step clipped to hit a sample must not shrink the next one.
                h = if last { h.max(step * factor) } else { step * factor };
            } else {
                traj.rejected_steps += 1;
                h = step * factor;
                if h <= 1e-14 * t.abs().max(1.0) {
                    return Err(Error::Stiffness {
                        t,
                        step: h,
                        error_estimate: err,
                        tol,
                    });
                }
            }
        }
        traj.push(target, StateVector::from_propagation(DVector::from_vec(y.clone())));
    }
    Ok(traj)
}
