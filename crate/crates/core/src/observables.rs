//! Cavity moments, quadratures and the Duan sum-variance witness.
//!
//! With u = x₁(φ₁) + x₂(φ₂) and v = p₁(φ₁) − p₂(φ₂), where
//! x(φ) = (a e^{−iφ} + a† e^{iφ})/√2 and p(φ) = x(φ + π/2), the witness is
//! M = var u + var v and M < 2 certifies entanglement. Everything here works
//! from a handful of normally ordered moments evaluated exactly on the
//! truncated operators, so results agree with explicit operator matrices.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};
use crate::hilbert::{annihilation, creation, DensityMatrix, Mode, Operator, SpaceDescriptor, StateVector, ATOM_DIM};
use crate::C64;

/// Top-Fock-level population above which moments are flagged unreliable.
pub const TRUNCATION_GUARD: f64 = 1e-8;

const TAU: f64 = 2.0 * PI;
const COARSE_GRID: usize = 48;
const REFINE_STOP: f64 = 1e-10;

/// A state whose cavity moments can be read.
#[derive(Clone, Copy, Debug)]
pub enum CavityState<'a> {
    /// Atom ⊗ cavity pure state; cavity operators act as identity on the atom.
    Composite {
        state: &'a StateVector,
        space: &'a SpaceDescriptor,
    },
    /// Pure state on Fock(n1_max) ⊗ Fock(n2_max).
    Pure {
        psi: &'a StateVector,
        n1_max: usize,
        n2_max: usize,
    },
    Mixed(&'a DensityMatrix),
}

impl<'a> CavityState<'a> {
    pub fn composite(state: &'a StateVector, space: &'a SpaceDescriptor) -> Self {
        Self::Composite { state, space }
    }

    pub fn pure(psi: &'a StateVector, n1_max: usize, n2_max: usize) -> Self {
        Self::Pure { psi, n1_max, n2_max }
    }

    fn cutoffs(&self) -> (usize, usize) {
        match *self {
            Self::Composite { space, .. } => (space.n1_max(), space.n2_max()),
            Self::Pure { n1_max, n2_max, .. } => (n1_max, n2_max),
            Self::Mixed(rho) => (rho.n1_max(), rho.n2_max()),
        }
    }

    fn check(&self) -> Result<()> {
        let (dim, expected) = match *self {
            Self::Composite { state, space } => (state.dim(), space.total_dim()),
            Self::Pure { psi, n1_max, n2_max } => (psi.dim(), (n1_max + 1) * (n2_max + 1)),
            Self::Mixed(_) => return Ok(()),
        };
        if dim != expected {
            return Err(Error::invalid(format!(
                "state dim {dim} does not match space dim {expected}"
            )));
        }
        Ok(())
    }

    /// ρ[s, t] of the reduced cavity state, before renormalization.
    fn pair(&self, s: usize, t: usize) -> C64 {
        match *self {
            Self::Composite { state, space } => {
                let cav = space.cavity_dim();
                let a = state.amplitudes();
                (0..ATOM_DIM).map(|l| a[l * cav + s] * a[l * cav + t].conj()).sum()
            }
            Self::Pure { psi, .. } => psi.amplitudes()[s] * psi.amplitudes()[t].conj(),
            Self::Mixed(rho) => rho.entries()[(s, t)],
        }
    }

    pub fn moments(&self) -> Result<Moments> {
        self.check()?;
        Ok(Moments::collect(self))
    }
}

/// Cavity moments on the truncated space. `aad` is ⟨a a†⟩, which differs
/// from 1 + ⟨a†a⟩ by the top-level population times (n_max + 1).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub a: [C64; 2],
    pub n: [f64; 2],
    pub aad: [f64; 2],
    pub aa: [C64; 2],
    /// ⟨a₁a₂⟩
    pub a1a2: C64,
    /// ⟨a₁†a₂⟩
    pub a1d_a2: C64,
    /// Population of the top Fock level of each mode.
    pub top_pop: [f64; 2],
}

impl Moments {
    fn collect(state: &CavityState<'_>) -> Self {
        let (n1_max, n2_max) = state.cutoffs();
        let stride = n2_max + 1;
        let dim = (n1_max + 1) * stride;
        let idx = |n1: usize, n2: usize| n1 * stride + n2;
        let zero = C64::new(0.0, 0.0);
        let mut m = Moments {
            a: [zero; 2],
            n: [0.0; 2],
            aad: [0.0; 2],
            aa: [zero; 2],
            a1a2: zero,
            a1d_a2: zero,
            top_pop: [0.0; 2],
        };
        let mut trace = 0.0;
        // Tr(ρA) = Σ_s coeff·ρ[s, t] for A|s⟩ = coeff|t⟩.
        for s in 0..dim {
            let (n1, n2) = (s / stride, s % stride);
            let (f1, f2) = (n1 as f64, n2 as f64);
            let p = state.pair(s, s).re;
            trace += p;
            m.n[0] += f1 * p;
            m.n[1] += f2 * p;
            if n1 < n1_max {
                m.aad[0] += (f1 + 1.0) * p;
            } else {
                m.top_pop[0] += p;
            }
            if n2 < n2_max {
                m.aad[1] += (f2 + 1.0) * p;
            } else {
                m.top_pop[1] += p;
            }
            if n1 >= 1 {
                m.a[0] += f1.sqrt() * state.pair(s, idx(n1 - 1, n2));
            }
            if n2 >= 1 {
                m.a[1] += f2.sqrt() * state.pair(s, idx(n1, n2 - 1));
            }
            if n1 >= 2 {
                m.aa[0] += (f1 * (f1 - 1.0)).sqrt() * state.pair(s, idx(n1 - 2, n2));
            }
            if n2 >= 2 {
                m.aa[1] += (f2 * (f2 - 1.0)).sqrt() * state.pair(s, idx(n1, n2 - 2));
            }
            if n1 >= 1 && n2 >= 1 {
                m.a1a2 += (f1 * f2).sqrt() * state.pair(s, idx(n1 - 1, n2 - 1));
            }
            if n2 >= 1 && n1 < n1_max {
                m.a1d_a2 += (f2 * (f1 + 1.0)).sqrt() * state.pair(s, idx(n1 + 1, n2 - 1));
            }
        }
        for j in 0..2 {
            m.a[j] /= trace;
            m.n[j] /= trace;
            m.aad[j] /= trace;
            m.aa[j] /= trace;
            m.top_pop[j] /= trace;
        }
        m.a1a2 /= trace;
        m.a1d_a2 /= trace;
        m
    }

    pub fn max_top_pop(&self) -> f64 {
        self.top_pop[0].max(self.top_pop[1])
    }

    pub fn reliable(&self) -> bool {
        self.max_top_pop() <= TRUNCATION_GUARD
    }

    /// (var x(φ), var p(φ)) for one mode.
    pub fn quadrature_variances(&self, mode: Mode, phi: f64) -> (f64, f64) {
        let j = match mode {
            Mode::One => 0,
            Mode::Two => 1,
        };
        let rot = C64::from_polar(1.0, -phi);
        let mean = self.a[j] * rot;
        let sq = (self.aa[j] * rot * rot).re;
        let sym = 0.5 * (self.aad[j] + self.n[j]);
        let (mx, mp) = (2f64.sqrt() * mean.re, 2f64.sqrt() * mean.im);
        (sq + sym - mx * mx, -sq + sym - mp * mp)
    }

    pub fn duan(&self, phase1: f64, phase2: f64) -> DuanReport {
        let r1 = C64::from_polar(1.0, -phase1);
        let r2 = C64::from_polar(1.0, -phase2);
        let b = [self.a[0] * r1, self.a[1] * r2];
        let sq = [(self.aa[0] * r1 * r1).re, (self.aa[1] * r2 * r2).re];
        let sym = [0.5 * (self.aad[0] + self.n[0]), 0.5 * (self.aad[1] + self.n[1])];
        let pair = (self.a1a2 * r1 * r2).re;
        let hop = (self.a1d_a2 * r1.conj() * r2).re;

        let (x1, x2) = (2f64.sqrt() * b[0].re, 2f64.sqrt() * b[1].re);
        let (p1, p2) = (2f64.sqrt() * b[0].im, 2f64.sqrt() * b[1].im);
        let var_u = (sq[0] + sym[0]) + (sq[1] + sym[1]) + 2.0 * (pair + hop) - (x1 + x2).powi(2);
        let var_v = (sym[0] - sq[0]) + (sym[1] - sq[1]) - 2.0 * (hop - pair) - (p1 - p2).powi(2);
        let m = var_u + var_v;
        DuanReport {
            m,
            var_u,
            var_v,
            phase1: phase1.rem_euclid(TAU),
            phase2: phase2.rem_euclid(TAU),
            entangled: m < 2.0,
            top_level_pop: self.max_top_pop(),
        }
    }

    /// Coarse grid over [0, 2π)², then repeated 5×5 zooms around the best
    /// point until the spacing drops below 1e-10.
    pub fn minimize_duan(&self) -> DuanReport {
        let h = TAU / COARSE_GRID as f64;
        let mut best = self.duan(0.0, 0.0);
        for i in 0..COARSE_GRID {
            for k in 0..COARSE_GRID {
                let r = self.duan(i as f64 * h, k as f64 * h);
                if r.m < best.m {
                    best = r;
                }
            }
        }
        let mut step = h;
        while step > REFINE_STOP {
            step *= 0.5;
            let (c1, c2) = (best.phase1, best.phase2);
            for i in -2..=2 {
                for k in -2..=2 {
                    let r = self.duan(c1 + i as f64 * step, c2 + k as f64 * step);
                    if r.m < best.m {
                        best = r;
                    }
                }
            }
        }
        best
    }

    pub fn photon_stats(&self) -> PhotonStats {
        PhotonStats {
            n1: self.n[0],
            n2: self.n[1],
            a1a2: self.a1a2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DuanReport {
    pub m: f64,
    pub var_u: f64,
    pub var_v: f64,
    pub phase1: f64,
    pub phase2: f64,
    pub entangled: bool,
    /// Truncation guard; see [`TRUNCATION_GUARD`].
    pub top_level_pop: f64,
}

impl DuanReport {
    pub fn reliable(&self) -> bool {
        self.top_level_pop <= TRUNCATION_GUARD
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PhotonStats {
    pub n1: f64,
    pub n2: f64,
    pub a1a2: C64,
}

pub fn duan_m(state: CavityState<'_>, phase1: f64, phase2: f64) -> Result<DuanReport> {
    Ok(state.moments()?.duan(phase1, phase2))
}

pub fn minimize_m(state: CavityState<'_>) -> Result<DuanReport> {
    Ok(state.moments()?.minimize_duan())
}

pub fn photon_stats(state: CavityState<'_>) -> Result<PhotonStats> {
    Ok(state.moments()?.photon_stats())
}

/// ⟨ψ|ρ|ψ⟩
pub fn fidelity(rho: &DensityMatrix, psi: &StateVector) -> Result<f64> {
    if rho.dim() != psi.dim() {
        return Err(Error::invalid(format!(
            "fidelity: density dim {} vs state dim {}",
            rho.dim(),
            psi.dim()
        )));
    }
    let v = psi.amplitudes();
    Ok((v.adjoint() * rho.entries() * v)[(0, 0)].re)
}

/// ⟨φ|Tr_atom(|ψ⟩⟨ψ|)|φ⟩ / ⟨ψ|ψ⟩ without forming the reduced density
/// matrix; `target` lives on the cavity space of `space`.
pub fn fidelity_reduced(state: &StateVector, space: &SpaceDescriptor, target: &StateVector) -> Result<f64> {
    let cav = space.cavity_dim();
    if state.dim() != space.total_dim() || target.dim() != cav {
        return Err(Error::invalid("reduced fidelity: dimension mismatch"));
    }
    let amps = state.amplitudes().as_slice();
    let phi = target.amplitudes().as_slice();
    let overlap: f64 = amps
        .chunks(cav)
        .map(|block| block.iter().zip(phi).map(|(a, p)| p.conj() * a).sum::<C64>().norm_sqr())
        .sum();
    Ok(overlap / state.amplitudes().norm_squared())
}

/// Explicit quadrature operators on the composite space.
#[derive(Clone, Debug)]
pub struct QuadratureSet {
    pub phase1: f64,
    pub phase2: f64,
    pub x1: Operator,
    pub p1: Operator,
    pub x2: Operator,
    pub p2: Operator,
}

impl QuadratureSet {
    pub fn new(space: &SpaceDescriptor, phase1: f64, phase2: f64) -> Result<Self> {
        let (x1, p1) = quadrature_pair(space, 1, phase1)?;
        let (x2, p2) = quadrature_pair(space, 2, phase2)?;
        Ok(Self {
            phase1,
            phase2,
            x1,
            p1,
            x2,
            p2,
        })
    }

    /// x₁ + x₂
    pub fn u(&self) -> Result<Operator> {
        self.x1.add(&self.x2)?.mark_hermitian()
    }

    /// p₁ − p₂
    pub fn v(&self) -> Result<Operator> {
        self.p1.sub(&self.p2)?.mark_hermitian()
    }
}

fn quadrature(space: &SpaceDescriptor, mode: usize, phi: f64) -> Result<Operator> {
    let a = annihilation(space, mode)?.scale(C64::from_polar(FRAC_1_SQRT_2, -phi));
    let ad = creation(space, mode)?.scale(C64::from_polar(FRAC_1_SQRT_2, phi));
    a.add(&ad)?.mark_hermitian()
}

fn quadrature_pair(space: &SpaceDescriptor, mode: usize, phi: f64) -> Result<(Operator, Operator)> {
    Ok((quadrature(space, mode, phi)?, quadrature(space, mode, phi + PI / 2.0)?))
}
