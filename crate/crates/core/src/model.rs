//! Physical parameters and the three Hamiltonian layers.
//!
//! All frequencies are dimensionless with ħ = 1. The drive-frame Hamiltonian
//! is written in the frame rotating with both (resonant) drives, so the bare
//! atomic levels are degenerate and each cavity mode enters through its
//! detuning δₙ from the second drive.

use nalgebra::{Matrix3, SymmetricEigen, Vector3};

use crate::error::{Error, Result};
use crate::hilbert::operator::atomic_matrix;
use crate::hilbert::{annihilation, atomic_op, number, Operator, Representation, SpaceDescriptor, StateVector};
use crate::{max_modulus, C64};

/// How the detuning of cavity mode 2 is tied to the dressed splitting.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub enum Mode2Detuning {
    /// δ₂ = d − 2Ωₑ: a mode-2 photon is emitted on the |−⟩ → |+⟩ dressed
    /// transition, so pair creation a₁†a₂† is energy conserving and the
    /// secular limit of the drive-frame model is the dressed coupling
    /// (G₁a₁ − G₂*a₂†)σ₊₋e^{idt} + h.c.
    #[default]
    PairResonant,
    /// δ₂ = 2Ωₑ + d. With this choice the a₂†σ₊₋ term rotates at 4Ωₑ + d and
    /// the drive-frame model produces no pair creation.
    AsPrinted,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    /// Rabi frequency Ω₁ of the |1⟩ ↔ |3⟩ drive.
    pub omega1: f64,
    /// Rabi frequency Ω₂ of the |2⟩ ↔ |3⟩ drive.
    pub omega2: f64,
    /// Cavity couplings on |2⟩ ↔ |3⟩.
    pub g1: C64,
    pub g2: C64,
    /// Offset of the cavity modes from the dressed transition, d > 0.
    pub d: f64,
    /// Atomic drive detunings Δ₁, Δ₂. Stored only; the drives are resonant.
    pub delta1_cap: f64,
    pub delta2_cap: f64,
    pub mode2_detuning: Mode2Detuning,
}

impl ModelParams {
    pub fn new(omega1: f64, omega2: f64, g1: C64, g2: C64, d: f64) -> Self {
        Self {
            omega1,
            omega2,
            g1,
            g2,
            d,
            delta1_cap: 0.0,
            delta2_cap: 0.0,
            mode2_detuning: Mode2Detuning::default(),
        }
    }

    pub fn with_mode2_detuning(mut self, mode2_detuning: Mode2Detuning) -> Self {
        self.mode2_detuning = mode2_detuning;
        self
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("omega1", self.omega1), ("omega2", self.omega2)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::invalid(format!("{name} must be finite and ≥ 0, got {v}")));
            }
        }
        if !(self.d.is_finite() && self.d > 0.0) {
            return Err(Error::invalid(format!("d must be finite and > 0, got {}", self.d)));
        }
        if !(self.g1.is_finite() && self.g2.is_finite()) {
            return Err(Error::invalid("cavity couplings must be finite"));
        }
        Ok(())
    }

    /// Ωₑ = √(Ω₁² + Ω₂²)
    pub fn omega_e(&self) -> f64 {
        self.omega1.hypot(self.omega2)
    }

    /// (δ₁, δ₂) with δ₁ = 2Ωₑ − d.
    pub fn cavity_detunings(&self) -> (f64, f64) {
        let oe = self.omega_e();
        let delta2 = match self.mode2_detuning {
            Mode2Detuning::PairResonant => self.d - 2.0 * oe,
            Mode2Detuning::AsPrinted => 2.0 * oe + self.d,
        };
        (2.0 * oe - self.d, delta2)
    }
}

/// Drive Hamiltonian −Σⱼ Ωⱼ(|3⟩⟨j| + |j⟩⟨3|) on the bare atom.
pub fn drive_hamiltonian(params: &ModelParams) -> Matrix3<f64> {
    let (o1, o2) = (params.omega1, params.omega2);
    Matrix3::new(0.0, 0.0, -o1, 0.0, 0.0, -o2, -o1, -o2, 0.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DressedLevel {
    /// Zero-energy dark state, no |3⟩ amplitude.
    Dark,
    /// Energy +Ωₑ.
    Plus,
    /// Energy −Ωₑ.
    Minus,
}

impl DressedLevel {
    fn column(self) -> usize {
        match self {
            DressedLevel::Dark => 0,
            DressedLevel::Plus => 1,
            DressedLevel::Minus => 2,
        }
    }
}

/// Eigensystem of the drive Hamiltonian.
///
/// Phase conventions: |+⟩ and |−⟩ have positive real |3⟩ amplitude, the dark
/// state has non-negative |1⟩ amplitude (positive |2⟩ amplitude when Ω₂ = 0).
/// With these choices the dark state is cos θ|1⟩ − sin θ|2⟩ where
/// sin θ = Ω₁/Ωₑ.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DressedBasis {
    /// Ascending: −Ωₑ, 0, +Ωₑ.
    pub eigenvalues: [f64; 3],
    /// Columns |0⟩, |+⟩, |−⟩ in the bare basis |1⟩, |2⟩, |3⟩.
    pub eigenvectors: Matrix3<C64>,
    pub omega_e: f64,
}

/// Numerically diagonalizes the drive Hamiltonian.
pub fn dressed_basis(params: &ModelParams) -> Result<DressedBasis> {
    let omega_e = params.omega_e();
    if omega_e == 0.0 || !omega_e.is_finite() {
        return Err(Error::DegenerateSpectrum);
    }
    let eig = SymmetricEigen::new(drive_hamiltonian(params));
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let [minus, dark, plus] = order;

    let fix = |col: usize, anchor: usize| -> Vector3<f64> {
        let v: Vector3<f64> = eig.eigenvectors.column(col).into();
        if v[anchor] < 0.0 {
            -v
        } else {
            v
        }
    };
    let v_plus = fix(plus, 2);
    let v_minus = fix(minus, 2);
    let dark_anchor = if eig.eigenvectors[(0, dark)].abs() > 1e-12 {
        0
    } else {
        1
    };
    let mut v_dark = fix(dark, dark_anchor);
    // The dark state carries no excited-state amplitude.
    v_dark[2] = 0.0;
    v_dark.normalize_mut();

    let eigenvectors = Matrix3::from_columns(&[v_dark, v_plus, v_minus]).map(|x| C64::new(x, 0.0));
    Ok(DressedBasis {
        eigenvalues: [eig.eigenvalues[minus], eig.eigenvalues[dark], eig.eigenvalues[plus]],
        eigenvectors,
        omega_e,
    })
}

impl DressedBasis {
    pub fn vector(&self, level: DressedLevel) -> Vector3<C64> {
        self.eigenvectors.column(level.column()).into()
    }

    pub fn energy(&self, level: DressedLevel) -> f64 {
        match level {
            DressedLevel::Minus => self.eigenvalues[0],
            DressedLevel::Dark => self.eigenvalues[1],
            DressedLevel::Plus => self.eigenvalues[2],
        }
    }

    /// sin θ = |⟨2|0⟩|, which equals Ω₁/Ωₑ.
    pub fn sin_theta(&self) -> f64 {
        self.eigenvectors[(1, 0)].norm()
    }

    pub fn theta(&self) -> f64 {
        self.sin_theta().clamp(0.0, 1.0).asin()
    }

    /// |a⟩⟨b| as a bare-basis 3×3 matrix.
    pub fn transition(&self, a: DressedLevel, b: DressedLevel) -> Matrix3<C64> {
        self.vector(a) * self.vector(b).adjoint()
    }

    /// ⟨+|σ₃₂|−⟩, the amplitude with which the bare cavity transition drives
    /// |−⟩ → |+⟩. Equals Ω₂/(2Ωₑ) in this phase convention.
    pub fn cavity_transition_factor(&self) -> C64 {
        let plus = self.vector(DressedLevel::Plus);
        let minus = self.vector(DressedLevel::Minus);
        plus[2].conj() * minus[1]
    }

    /// max |H_Ω V − V Λ| over the three columns.
    pub fn residual(&self, params: &ModelParams) -> f64 {
        let h = drive_hamiltonian(params).map(|x| C64::new(x, 0.0));
        [DressedLevel::Dark, DressedLevel::Plus, DressedLevel::Minus]
            .into_iter()
            .map(|level| {
                let v = self.vector(level);
                max_modulus((h * v - v * C64::new(self.energy(level), 0.0)).iter())
            })
            .fold(0.0, f64::max)
    }
}

/// Builders assemble in sparse storage and convert once at the end.
fn sparse_work(space: &SpaceDescriptor) -> SpaceDescriptor {
    space.with_representation(Representation::Sparse)
}

/// Composite-space operator |a⟩⟨b| ⊗ 1.
pub fn dressed_op(space: &SpaceDescriptor, basis: &DressedBasis, a: DressedLevel, b: DressedLevel) -> Operator {
    atomic_matrix(space, &basis.transition(a, b))
}

/// Drive-frame Hamiltonian
/// H = −Σⱼ Ωⱼ(σ₃ⱼ + σⱼ₃) + Σₙ δₙ aₙ†aₙ + Σₙ (gₙ aₙ σ₃₂ + gₙ* aₙ† σ₂₃).
pub fn build_lab_hamiltonian(params: &ModelParams, target: &SpaceDescriptor) -> Result<Operator> {
    params.validate()?;
    let space = &sparse_work(target);
    let (delta1, delta2) = params.cavity_detunings();
    let s32 = atomic_op(space, 3, 2)?;
    let mut h = Operator::zero(space);
    for (j, omega) in [(1, params.omega1), (2, params.omega2)] {
        let flip = atomic_op(space, 3, j)?;
        h = h.add(&flip.add(&flip.dagger())?.scale(C64::new(-omega, 0.0)))?;
    }
    for (mode, delta, g) in [(1, delta1, params.g1), (2, delta2, params.g2)] {
        h = h.add(&number(space, mode)?.scale(C64::new(delta, 0.0)))?;
        let coupling = annihilation(space, mode)?.mul(&s32)?.scale(g);
        h = h.add(&coupling.add(&coupling.dagger())?)?;
    }
    h.into_representation(target.representation()).mark_hermitian()
}

/// Derived couplings of the dressed and effective models.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveParams {
    /// G₁ = g₁ sin θ / 2
    pub dressed_g1: C64,
    /// G₂ = g₂ sin θ / 2
    pub dressed_g2: C64,
    /// λ = G₁G₂/d
    pub lambda: C64,
    /// λ₊₊ = |G₁|²/d
    pub stark_plus: f64,
    /// λ₋₋ = |G₂|²/d
    pub stark_minus: f64,
    pub d: f64,
    pub basis: DressedBasis,
}

pub fn effective_params(params: &ModelParams) -> Result<EffectiveParams> {
    params.validate()?;
    let basis = dressed_basis(params)?;
    let half_sin = C64::new(basis.sin_theta() / 2.0, 0.0);
    let (g1, g2) = (params.g1 * half_sin, params.g2 * half_sin);
    let d = params.d;
    Ok(EffectiveParams {
        dressed_g1: g1,
        dressed_g2: g2,
        lambda: g1 * g2 / d,
        stark_plus: g1.norm_sqr() / d,
        stark_minus: g2.norm_sqr() / d,
        d,
        basis,
    })
}

impl EffectiveParams {
    /// Parameters whose effective Hamiltonian is the time average of the
    /// dressed coupling (G₁a₁ − G₂*a₂†)σ₊₋e^{idt} + h.c. to second order.
    /// The elimination produces the squeeze term with coefficient −G₁G₂/d, so
    /// only the sign of λ differs; the Stark and photon shifts agree.
    pub fn eliminated(&self) -> EffectiveParams {
        EffectiveParams {
            lambda: -self.lambda,
            ..*self
        }
    }
}

/// Dressed interaction-picture coupling H(t) = e^{idt}R + e^{−idt}R† with
/// R = (G₁a₁ − G₂*a₂†)σ₊₋.
#[derive(Clone, Debug)]
pub struct InteractionHamiltonian {
    raising: Operator,
    lowering: Operator,
    frequency: f64,
}

impl InteractionHamiltonian {
    pub fn new(eff: &EffectiveParams, target: &SpaceDescriptor) -> Result<Self> {
        let space = &sparse_work(target);
        let a1 = annihilation(space, 1)?;
        let a2_dag = annihilation(space, 2)?.dagger();
        let sigma_pm = dressed_op(space, &eff.basis, DressedLevel::Plus, DressedLevel::Minus);
        let photon = a1.scale(eff.dressed_g1).sub(&a2_dag.scale(eff.dressed_g2.conj()))?;
        let raising = photon.mul(&sigma_pm)?.into_representation(target.representation());
        let lowering = raising.dagger();
        Ok(Self {
            raising,
            lowering,
            frequency: eff.d,
        })
    }

    pub fn from_params(params: &ModelParams, space: &SpaceDescriptor) -> Result<Self> {
        Self::new(&effective_params(params)?, space)
    }

    /// Coefficient R of e^{idt}.
    pub fn raising(&self) -> &Operator {
        &self.raising
    }

    pub fn lowering(&self) -> &Operator {
        &self.lowering
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn period(&self) -> f64 {
        std::f64::consts::TAU / self.frequency
    }

    pub fn at(&self, t: f64) -> Result<Operator> {
        let phase = C64::from_polar(1.0, self.frequency * t);
        self.raising
            .scale(phase)
            .add(&self.lowering.scale(phase.conj()))?
            .mark_hermitian()
    }

    /// Second-order time average [R, R†]/d of the oscillating coupling.
    pub fn second_order_average(&self) -> Result<Operator> {
        Ok(self
            .raising
            .commutator(&self.lowering)?
            .scale(C64::new(1.0 / self.frequency, 0.0)))
    }
}

/// Dressed coupling at time `t`.
pub fn build_interaction_hamiltonian(params: &ModelParams, space: &SpaceDescriptor, t: f64) -> Result<Operator> {
    InteractionHamiltonian::from_params(params, space)?.at(t)
}

/// H = (λa₁a₂ + λ*a₁†a₂†)(σ₊₊ − σ₋₋)
///   + [photon shifts] (|G₁|²/d a₁†a₁ + |G₂|²/d a₂†a₂)(σ₊₊ − σ₋₋)
///   + [Stark] λ₊₊σ₊₊ − λ₋₋σ₋₋
pub fn build_effective_hamiltonian(
    eff: &EffectiveParams,
    target: &SpaceDescriptor,
    include_stark: bool,
    include_photon_shifts: bool,
) -> Result<Operator> {
    let space = &sparse_work(target);
    let basis = &eff.basis;
    let p_plus = dressed_op(space, basis, DressedLevel::Plus, DressedLevel::Plus);
    let p_minus = dressed_op(space, basis, DressedLevel::Minus, DressedLevel::Minus);
    let inversion = p_plus.sub(&p_minus)?;

    let pair = annihilation(space, 1)?.mul(&annihilation(space, 2)?)?;
    let squeeze = pair.scale(eff.lambda).add(&pair.dagger().scale(eff.lambda.conj()))?;
    let mut h = squeeze.mul(&inversion)?;
    if include_photon_shifts {
        let shifts = number(space, 1)?
            .scale(C64::new(eff.stark_plus, 0.0))
            .add(&number(space, 2)?.scale(C64::new(eff.stark_minus, 0.0)))?;
        h = h.add(&shifts.mul(&inversion)?)?;
    }
    if include_stark {
        h = h
            .add(&p_plus.scale(C64::new(eff.stark_plus, 0.0)))?
            .sub(&p_minus.scale(C64::new(eff.stark_minus, 0.0)))?;
    }
    h.into_representation(target.representation()).mark_hermitian()
}

/// e^{iH₀t}ψ with H₀ = H_Ω + δ₁a₁†a₁ + δ₂a₂†a₂: maps a drive-frame state to
/// the dressed interaction picture. Local on every factor.
pub fn to_interaction_frame(
    params: &ModelParams,
    basis: &DressedBasis,
    space: &SpaceDescriptor,
    psi: &StateVector,
    t: f64,
) -> Result<StateVector> {
    if psi.dim() != space.total_dim() {
        return Err(Error::invalid("frame transform: dimension mismatch"));
    }
    let (delta1, delta2) = params.cavity_detunings();
    let v = &basis.eigenvectors;
    let energies = [
        basis.energy(DressedLevel::Dark),
        basis.energy(DressedLevel::Plus),
        basis.energy(DressedLevel::Minus),
    ];
    let phases = Matrix3::from_diagonal(&Vector3::from_fn(|k, _| C64::from_polar(1.0, energies[k] * t)));
    let atom = v * phases * v.adjoint();

    let cav = space.cavity_dim();
    let amps = psi.amplitudes();
    let mut out = nalgebra::DVector::zeros(space.total_dim());
    for k in 0..cav {
        let (n1, n2) = space.cavity_label(k);
        let photon_phase = C64::from_polar(1.0, (delta1 * n1 as f64 + delta2 * n2 as f64) * t);
        for r in 0..3 {
            let mut acc = C64::new(0.0, 0.0);
            for c in 0..3 {
                acc += atom[(r, c)] * amps[c * cav + k];
            }
            out[r * cav + k] = acc * photon_phase;
        }
    }
    Ok(StateVector::from_propagation(out))
}
