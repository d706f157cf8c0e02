//! Closed-form two-mode squeezed vacuum.
//!
//! Evolving |0,0⟩ under λa₁a₂ + λ*a₁†a₂† for a time t gives
//! S(ξ)|0,0⟩ with S(ξ) = exp(ξ*a₁a₂ − ξa₁†a₂†) and ξ = iλ*t, whose Schmidt
//! form is
//!
//! ```text
//! Σₙ (−e^{iφ} tanh r)ⁿ / cosh r |n, n⟩,   ξ = r e^{iφ}.
//! ```

use std::f64::consts::FRAC_PI_2;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::hilbert::StateVector;
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TmsvSpec {
    pub lambda: C64,
    pub t: f64,
}

impl TmsvSpec {
    pub fn new(lambda: C64, t: f64) -> Result<Self> {
        if !(t.is_finite() && t >= 0.0) {
            return Err(Error::invalid(format!("squeeze time must be finite and ≥ 0, got {t}")));
        }
        if !lambda.is_finite() {
            return Err(Error::invalid("coupling must be finite"));
        }
        Ok(Self { lambda, t })
    }

    /// Squeeze magnitude r = |λ|t.
    pub fn r(&self) -> f64 {
        self.lambda.norm() * self.t
    }

    /// φ = arg(iλ*) = π/2 − arg λ.
    pub fn squeeze_phase(&self) -> f64 {
        FRAC_PI_2 - self.lambda.arg()
    }

    /// ξ = iλ*t
    pub fn xi(&self) -> C64 {
        C64::new(0.0, 1.0) * self.lambda.conj() * self.t
    }
}

/// Schmidt amplitudes cₙ on |n, n⟩ for n = 0..=n_max. Not renormalized:
/// Σ|cₙ|² = 1 − tanh^{2(n_max+1)} r.
pub fn tmsv_amplitudes(spec: &TmsvSpec, n_max: usize) -> Vec<C64> {
    let r = spec.r();
    let ratio = -C64::from_polar(r.tanh(), spec.squeeze_phase());
    let c0 = C64::new(1.0 / r.cosh(), 0.0);
    std::iter::successors(Some(c0), |c| Some(c * ratio))
        .take(n_max + 1)
        .collect()
}

/// Weight lost by truncating the Schmidt sum at `n_max`.
pub fn truncation_weight(spec: &TmsvSpec, n_max: usize) -> f64 {
    spec.r().tanh().powi(2 * (n_max as i32 + 1))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TmsvMoments {
    /// ⟨a₁†a₁⟩ = ⟨a₂†a₂⟩ = sinh² r
    pub n_mean: f64,
    /// ⟨a₁a₂⟩ = −e^{iφ} sinh r cosh r
    pub a1a2: C64,
    /// Duan sum variance minimized over quadrature phases, 2e^{−2r}.
    pub m_min: f64,
}

pub fn tmsv_moments(spec: &TmsvSpec) -> TmsvMoments {
    let r = spec.r();
    TmsvMoments {
        n_mean: r.sinh().powi(2),
        a1a2: -C64::from_polar(r.sinh() * r.cosh(), spec.squeeze_phase()),
        m_min: 2.0 * (-2.0 * r).exp(),
    }
}

/// Renormalized truncated TMSV on Fock(n1_max) ⊗ Fock(n2_max), mode-2
/// photon number fastest.
pub fn tmsv_state(spec: &TmsvSpec, n1_max: usize, n2_max: usize) -> Result<StateVector> {
    let n = n1_max.min(n2_max);
    let mut amps = DVector::zeros((n1_max + 1) * (n2_max + 1));
    for (k, c) in tmsv_amplitudes(spec, n).into_iter().enumerate() {
        amps[k * (n2_max + 1) + k] = c;
    }
    StateVector::normalized(amps)
}
