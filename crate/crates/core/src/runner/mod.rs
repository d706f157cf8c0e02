//! Scenario orchestration and CSV output.
//!
//! Every scenario starts from |+⟩|0,0⟩ and records cavity observables on a
//! time grid. The `interaction` and `full` scenarios are compared with the
//! TMSV of the eliminated coupling −λ, `oracle` and `effective` with λ.

mod config;

use std::io::Write;

use rayon::prelude::*;

pub use config::{parse_config, Duration, RunConfig, Scenario, SweepParam, SweepSpec};

use crate::error::{Error, Result};
use crate::hilbert::{make_space, SpaceDescriptor, StateVector};
use crate::model::{
    build_effective_hamiltonian, build_lab_hamiltonian, effective_params, to_interaction_frame, DressedLevel,
    EffectiveParams, InteractionHamiltonian,
};
use crate::observables::{fidelity_reduced, CavityState, TRUNCATION_GUARD};
use crate::oracle::{tmsv_state, TmsvSpec};
use crate::propagate::{evolve_timedep, uniform_times, HarmonicHamiltonian, StaticPropagator};

/// Largest norm error accepted by the reliability guard.
pub const NORM_GUARD: f64 = 1e-6;

pub const CSV_COLUMNS: [&str; 12] = [
    "t",
    "n1",
    "n2",
    "re_a1a2",
    "im_a1a2",
    "M_fixed",
    "M_min",
    "phi1_star",
    "phi2_star",
    "norm_err",
    "top_level_pop",
    "fidelity_vs_oracle",
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResultRow {
    pub t: f64,
    pub n1: f64,
    pub n2: f64,
    pub re_a1a2: f64,
    pub im_a1a2: f64,
    /// Duan sum at φ₁ = φ₂ = 0.
    pub m_fixed: f64,
    pub m_min: f64,
    pub phi1_star: f64,
    pub phi2_star: f64,
    pub norm_err: f64,
    pub top_level_pop: f64,
    pub fidelity_vs_oracle: Option<f64>,
}

impl ResultRow {
    fn fields(&self) -> [Option<f64>; 12] {
        [
            Some(self.t),
            Some(self.n1),
            Some(self.n2),
            Some(self.re_a1a2),
            Some(self.im_a1a2),
            Some(self.m_fixed),
            Some(self.m_min),
            Some(self.phi1_star),
            Some(self.phi2_star),
            Some(self.norm_err),
            Some(self.top_level_pop),
            self.fidelity_vs_oracle,
        ]
    }
}

/// Per-point summary of a sweep: largest |M_min − M_min^eff| over the grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub max_mismatch_vs_effective: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub max_delta_m_min: f64,
    pub max_delta_n: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Summary {
    pub max_norm_err: f64,
    pub max_top_level_pop: f64,
    pub min_m_min: f64,
    pub sweep: Vec<SweepPoint>,
    pub convergence: Option<ConvergenceReport>,
}

impl Summary {
    fn from_rows<'a>(rows: impl IntoIterator<Item = &'a ResultRow>) -> Self {
        let mut s = Summary {
            min_m_min: f64::INFINITY,
            ..Default::default()
        };
        for r in rows {
            s.max_norm_err = s.max_norm_err.max(r.norm_err);
            s.max_top_level_pop = s.max_top_level_pop.max(r.top_level_pop);
            s.min_m_min = s.min_m_min.min(r.m_min);
        }
        s
    }

    /// Both guards: norm error ≤ 1e-6 and top-level population ≤ 1e-8.
    pub fn reliable(&self) -> bool {
        self.max_norm_err <= NORM_GUARD && self.max_top_level_pop <= TRUNCATION_GUARD
    }

    pub fn write_to(&self, out: &mut impl Write) -> std::io::Result<()> {
        writeln!(out, "max_norm_err = {:e}", self.max_norm_err)?;
        writeln!(out, "max_top_level_pop = {:e}", self.max_top_level_pop)?;
        writeln!(out, "min_M_min = {:.10}", self.min_m_min)?;
        for p in &self.sweep {
            writeln!(
                out,
                "sweep {} : max |M_min - M_min_eff| = {:e}",
                p.value, p.max_mismatch_vs_effective
            )?;
        }
        if let Some(c) = &self.convergence {
            writeln!(
                out,
                "convergence: max |dM_min| = {:e}, max |dn| = {:e}",
                c.max_delta_m_min, c.max_delta_n
            )?;
        }
        writeln!(out, "reliable = {}", self.reliable())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutput {
    /// Name of the extra leading column used by sweep and convergence runs.
    pub key_column: Option<&'static str>,
    pub rows: Vec<(Option<f64>, ResultRow)>,
    pub summary: Summary,
}

impl RunOutput {
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let header = self.key_column.into_iter().chain(CSV_COLUMNS);
        w.write_record(header)?;
        for (key, row) in &self.rows {
            let lead = self.key_column.map(|_| *key);
            w.write_record(lead.into_iter().chain(row.fields()).map(format_field))?;
        }
        w.flush()?;
        Ok(())
    }
}

/// 17 significant digits; empty when not applicable.
fn format_field(v: Option<f64>) -> String {
    v.map(|v| format!("{v:.16e}")).unwrap_or_default()
}

pub fn run_scenario(config: &RunConfig) -> Result<RunOutput> {
    config.validate()?;
    match config.scenario {
        Scenario::Sweep => run_sweep(config),
        Scenario::Convergence => run_convergence(config),
        base => {
            let rows = run_base(config, base)?;
            let summary = Summary::from_rows(&rows);
            Ok(RunOutput {
                key_column: None,
                rows: rows.into_iter().map(|r| (None, r)).collect(),
                summary,
            })
        }
    }
}

fn run_sweep(config: &RunConfig) -> Result<RunOutput> {
    let spec = config
        .sweep
        .as_ref()
        .ok_or_else(|| Error::ConfigInvalid("sweep axis missing".into()))?;
    let points = spec
        .values
        .par_iter()
        .map(|&value| {
            let point = config.with_param(spec.param, value)?;
            let rows = run_base(&point, point.base_scenario)?;
            let reference = if point.base_scenario == Scenario::Effective {
                rows.clone()
            } else {
                run_base(&point, Scenario::Effective)?
            };
            let mismatch = rows
                .iter()
                .zip(&reference)
                .map(|(a, b)| (a.m_min - b.m_min).abs())
                .fold(0.0, f64::max);
            Ok((value, rows, mismatch))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut summary = Summary::from_rows(points.iter().flat_map(|(_, rows, _)| rows));
    summary.sweep = points
        .iter()
        .map(|&(value, _, mismatch)| SweepPoint {
            value,
            max_mismatch_vs_effective: mismatch,
        })
        .collect();
    let rows = points
        .into_iter()
        .flat_map(|(value, rows, _)| rows.into_iter().map(move |r| (Some(value), r)))
        .collect();
    Ok(RunOutput {
        key_column: Some("sweep_value"),
        rows,
        summary,
    })
}

/// Reruns the base scenario with doubled cutoffs and tol/16 and compares
/// row by row on the shared time grid.
fn run_convergence(config: &RunConfig) -> Result<RunOutput> {
    let base = run_base(config, config.base_scenario)?;
    let mut fine_cfg = config.clone();
    fine_cfg.n1_max *= 2;
    fine_cfg.n2_max *= 2;
    fine_cfg.tol /= 16.0;
    let fine = run_base(&fine_cfg, config.base_scenario)?;
    let report = ConvergenceReport {
        max_delta_m_min: base
            .iter()
            .zip(&fine)
            .map(|(a, b)| (a.m_min - b.m_min).abs())
            .fold(0.0, f64::max),
        max_delta_n: base
            .iter()
            .zip(&fine)
            .map(|(a, b)| (a.n1 - b.n1).abs().max((a.n2 - b.n2).abs()))
            .fold(0.0, f64::max),
    };
    let mut summary = Summary::from_rows(&base);
    summary.convergence = Some(report);
    let rows = base
        .into_iter()
        .map(|r| (Some(0.0), r))
        .chain(fine.into_iter().map(|r| (Some(1.0), r)))
        .collect();
    Ok(RunOutput {
        key_column: Some("refinement"),
        rows,
        summary,
    })
}

/// Sample times: uniform on [0, t_final], or snapped to multiples of 2π/d.
pub fn sample_times(config: &RunConfig, eff: &EffectiveParams) -> Result<Vec<f64>> {
    let t_final = match config.duration {
        Duration::Time(t) => t,
        Duration::Squeeze(r) => {
            let rate = eff.lambda.norm();
            if rate == 0.0 {
                return Err(Error::ConfigInvalid(
                    "r_final needs a nonzero effective coupling λ; use t_final".into(),
                ));
            }
            r / rate
        }
    };
    if !config.stroboscopic {
        return Ok(uniform_times(t_final, config.samples));
    }
    let period = 2.0 * std::f64::consts::PI / config.params.d;
    let periods = (t_final / period).round().max(1.0) as usize;
    let last = config.samples - 1;
    let mut ks: Vec<usize> = (0..=last).map(|i| (i * periods + last / 2) / last).collect();
    ks.dedup();
    Ok(ks.into_iter().map(|k| k as f64 * period).collect())
}

fn run_base(config: &RunConfig, scenario: Scenario) -> Result<Vec<ResultRow>> {
    let params = &config.params;
    let space = make_space(config.n1_max, config.n2_max)?;
    let eff = effective_params(params)?;
    let times = sample_times(config, &eff)?;
    let psi0 = StateVector::atom_fock(&space, &eff.basis.vector(DressedLevel::Plus), 0, 0)?;
    let oracle_lambda = match scenario {
        Scenario::Interaction | Scenario::Full => eff.eliminated().lambda,
        _ => eff.lambda,
    };
    let oracle = |t: f64| tmsv_state(&TmsvSpec::new(oracle_lambda, t)?, config.n1_max, config.n2_max);

    match scenario {
        Scenario::Oracle => {
            let h = build_effective_hamiltonian(&eff, &space, true, config.photon_shifts)?;
            let prop = StaticPropagator::new(&h)?;
            times
                .iter()
                .map(|&t| {
                    let target = oracle(t)?;
                    let numeric = prop.evolve(&psi0, t)?;
                    let fid = fidelity_reduced(&numeric, &space, &target)?;
                    let state = CavityState::pure(&target, config.n1_max, config.n2_max);
                    observe(t, state, target.norm_error(), Some(fid))
                })
                .collect()
        }
        Scenario::Effective | Scenario::Full => {
            let h = if scenario == Scenario::Full {
                build_lab_hamiltonian(params, &space)?
            } else {
                build_effective_hamiltonian(&eff, &space, true, config.photon_shifts)?
            };
            let prop = StaticPropagator::new(&h)?;
            times
                .iter()
                .map(|&t| {
                    let mut psi = prop.evolve(&psi0, t)?;
                    if scenario == Scenario::Full {
                        psi = to_interaction_frame(params, &eff.basis, &space, &psi, t)?;
                    }
                    observe_composite(t, &psi, &space, &oracle(t)?)
                })
                .collect()
        }
        Scenario::Interaction => {
            let source = HarmonicHamiltonian::from(&InteractionHamiltonian::new(&eff, &space)?);
            let traj = evolve_timedep(&source, &psi0, &times, config.tol)?;
            traj.times
                .iter()
                .zip(&traj.states)
                .map(|(&t, psi)| observe_composite(t, psi, &space, &oracle(t)?))
                .collect()
        }
        Scenario::Sweep | Scenario::Convergence => Err(Error::ConfigInvalid(format!(
            "`{scenario}` is not a single-model scenario"
        ))),
    }
}

fn observe_composite(t: f64, psi: &StateVector, space: &SpaceDescriptor, target: &StateVector) -> Result<ResultRow> {
    let fid = fidelity_reduced(psi, space, target)?;
    observe(t, CavityState::composite(psi, space), psi.norm_error(), Some(fid))
}

fn observe(t: f64, state: CavityState<'_>, norm_err: f64, fidelity: Option<f64>) -> Result<ResultRow> {
    let m = state.moments()?;
    let fixed = m.duan(0.0, 0.0);
    let best = m.minimize_duan();
    Ok(ResultRow {
        t,
        n1: m.n[0],
        n2: m.n[1],
        re_a1a2: m.a1a2.re,
        im_a1a2: m.a1a2.im,
        m_fixed: fixed.m,
        m_min: best.m,
        phi1_star: best.phase1,
        phi2_star: best.phase2,
        norm_err,
        top_level_pop: m.max_top_pop(),
        fidelity_vs_oracle: fidelity,
    })
}
