//! Line-oriented `key = value` run configuration.
//!
//! `#` starts a comment. Physical values are decimal floats; `g1` and `g2`
//! are given by their real and imaginary parts. Exactly one of `t_final` and
//! `r_final` (target squeeze |λ|t) fixes the run length.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::model::{Mode2Detuning, ModelParams};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scenario {
    Oracle,
    Effective,
    Interaction,
    Full,
    Sweep,
    Convergence,
}

impl Scenario {
    pub fn name(self) -> &'static str {
        match self {
            Scenario::Oracle => "oracle",
            Scenario::Effective => "effective",
            Scenario::Interaction => "interaction",
            Scenario::Full => "full",
            Scenario::Sweep => "sweep",
            Scenario::Convergence => "convergence",
        }
    }

    /// Scenarios that propagate a single model.
    pub fn is_base(self) -> bool {
        !matches!(self, Scenario::Sweep | Scenario::Convergence)
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scenario {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "oracle" => Scenario::Oracle,
            "effective" => Scenario::Effective,
            "interaction" => Scenario::Interaction,
            "full" => Scenario::Full,
            "sweep" => Scenario::Sweep,
            "convergence" => Scenario::Convergence,
            other => return Err(format!("unknown scenario `{other}`")),
        })
    }
}

/// Sweepable parameter. `DOverG` sets d = value·|G₁| with G₁ from the
/// current drive and coupling.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepParam {
    Omega1,
    Omega2,
    D,
    DOverG,
    G1Re,
    G1Im,
    G2Re,
    G2Im,
    TFinal,
    RFinal,
}

impl FromStr for SweepParam {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Ok(match s {
            "omega1" => SweepParam::Omega1,
            "omega2" => SweepParam::Omega2,
            "d" => SweepParam::D,
            "d_over_g" => SweepParam::DOverG,
            "g1_re" => SweepParam::G1Re,
            "g1_im" => SweepParam::G1Im,
            "g2_re" => SweepParam::G2Re,
            "g2_im" => SweepParam::G2Im,
            "t_final" => SweepParam::TFinal,
            "r_final" => SweepParam::RFinal,
            other => return Err(format!("unknown sweep parameter `{other}`")),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Duration {
    Time(f64),
    /// Target squeeze |λ|t, converted with the effective λ of the model.
    Squeeze(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub values: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub params: ModelParams,
    pub n1_max: usize,
    pub n2_max: usize,
    pub tol: f64,
    pub duration: Duration,
    pub samples: usize,
    /// Snap sample times to multiples of 2π/d.
    pub stroboscopic: bool,
    /// Add the photon-number shifts to the effective model.
    pub photon_shifts: bool,
    pub scenario: Scenario,
    /// Model propagated by sweep and convergence runs.
    pub base_scenario: Scenario,
    pub sweep: Option<SweepSpec>,
    pub output: Option<PathBuf>,
}

impl RunConfig {
    /// Checks cross-field invariants; `parse_config` calls this.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::ConfigInvalid(msg));
        self.params
            .validate()
            .map_err(|e| Error::ConfigInvalid(e.to_string()))?;
        if self.n1_max < 1 || self.n2_max < 1 {
            return bad(format!(
                "n1_max and n2_max must be ≥ 1, got ({}, {})",
                self.n1_max, self.n2_max
            ));
        }
        if self.samples < 2 {
            return bad(format!("samples must be ≥ 2, got {}", self.samples));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad(format!("tol must be positive, got {}", self.tol));
        }
        match self.duration {
            Duration::Time(t) if !(t > 0.0 && t.is_finite()) => return bad(format!("t_final must be > 0, got {t}")),
            Duration::Squeeze(r) if !(r > 0.0 && r.is_finite()) => return bad(format!("r_final must be > 0, got {r}")),
            _ => {}
        }
        if !self.base_scenario.is_base() {
            return bad(format!(
                "base_scenario must be a single-model scenario, got `{}`",
                self.base_scenario
            ));
        }
        match (&self.sweep, self.scenario) {
            (None, Scenario::Sweep) => bad("scenario = sweep needs sweep_param and sweep_values".into()),
            (Some(s), Scenario::Sweep) if s.values.is_empty() => bad("sweep_values is empty".into()),
            (Some(_), other) if other != Scenario::Sweep => {
                bad(format!("sweep_param/sweep_values given but scenario is `{other}`"))
            }
            _ => Ok(()),
        }
    }

    /// Copy with one parameter replaced.
    pub fn with_param(&self, param: SweepParam, value: f64) -> Result<RunConfig> {
        let mut cfg = self.clone();
        let p = &mut cfg.params;
        match param {
            SweepParam::Omega1 => p.omega1 = value,
            SweepParam::Omega2 => p.omega2 = value,
            SweepParam::D => p.d = value,
            SweepParam::DOverG => {
                let eff = crate::model::effective_params(p).map_err(|e| Error::ConfigInvalid(e.to_string()))?;
                p.d = value * eff.dressed_g1.norm();
            }
            SweepParam::G1Re => p.g1.re = value,
            SweepParam::G1Im => p.g1.im = value,
            SweepParam::G2Re => p.g2.re = value,
            SweepParam::G2Im => p.g2.im = value,
            SweepParam::TFinal => cfg.duration = Duration::Time(value),
            SweepParam::RFinal => cfg.duration = Duration::Squeeze(value),
        }
        cfg.scenario = cfg.base_scenario;
        cfg.sweep = None;
        cfg.validate()?;
        Ok(cfg)
    }
}

const KEYS: &[&str] = &[
    "omega1",
    "omega2",
    "g1_re",
    "g1_im",
    "g2_re",
    "g2_im",
    "d",
    "delta1_cap",
    "delta2_cap",
    "mode2_detuning",
    "n1_max",
    "n2_max",
    "tol",
    "t_final",
    "r_final",
    "samples",
    "stroboscopic",
    "photon_shifts",
    "scenario",
    "base_scenario",
    "sweep_param",
    "sweep_values",
    "output",
];

struct Entries(BTreeMap<&'static str, (usize, String)>);

impl Entries {
    fn take<T: FromStr>(&mut self, key: &'static str) -> Result<Option<T>>
    where
        T::Err: fmt::Display,
    {
        match self.0.remove(key) {
            None => Ok(None),
            Some((line, raw)) => raw.parse().map(Some).map_err(|e| Error::ConfigParse {
                line,
                message: format!("{key}: {e}"),
            }),
        }
    }

    fn required<T: FromStr>(&mut self, key: &'static str) -> Result<T>
    where
        T::Err: fmt::Display,
    {
        self.take(key)?
            .ok_or_else(|| Error::ConfigInvalid(format!("missing required key `{key}`")))
    }

    fn list(&mut self, key: &'static str) -> Result<Option<Vec<f64>>> {
        let Some((line, raw)) = self.0.remove(key) else {
            return Ok(None);
        };
        raw.split(',')
            .map(|v| {
                v.trim().parse::<f64>().map_err(|e| Error::ConfigParse {
                    line,
                    message: format!("{key}: `{}`: {e}", v.trim()),
                })
            })
            .collect::<Result<Vec<_>>>()
            .map(Some)
    }
}

struct Detuning(Mode2Detuning);

impl FromStr for Detuning {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "pair_resonant" => Ok(Detuning(Mode2Detuning::PairResonant)),
            "as_printed" => Ok(Detuning(Mode2Detuning::AsPrinted)),
            other => Err(format!("expected pair_resonant or as_printed, got `{other}`")),
        }
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let mut entries = Entries(BTreeMap::new());
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content.split_once('=').ok_or_else(|| Error::ConfigParse {
            line,
            message: format!("expected `key = value`, got `{content}`"),
        })?;
        let key = key.trim();
        let Some(&known) = KEYS.iter().find(|k| **k == key) else {
            return Err(Error::ConfigParse {
                line,
                message: format!("unknown key `{key}`"),
            });
        };
        if entries.0.insert(known, (line, value.trim().to_string())).is_some() {
            return Err(Error::ConfigParse {
                line,
                message: format!("duplicate key `{key}`"),
            });
        }
    }

    let g1 = C64::new(
        entries.take("g1_re")?.unwrap_or(0.0),
        entries.take("g1_im")?.unwrap_or(0.0),
    );
    let g2 = C64::new(
        entries.take("g2_re")?.unwrap_or(0.0),
        entries.take("g2_im")?.unwrap_or(0.0),
    );
    let mut params = ModelParams::new(
        entries.required("omega1")?,
        entries.required("omega2")?,
        g1,
        g2,
        entries.required("d")?,
    );
    params.delta1_cap = entries.take("delta1_cap")?.unwrap_or(0.0);
    params.delta2_cap = entries.take("delta2_cap")?.unwrap_or(0.0);
    if let Some(Detuning(m)) = entries.take("mode2_detuning")? {
        params.mode2_detuning = m;
    }

    let duration = match (entries.take("t_final")?, entries.take("r_final")?) {
        (Some(t), None) => Duration::Time(t),
        (None, Some(r)) => Duration::Squeeze(r),
        (Some(_), Some(_)) => return Err(Error::ConfigInvalid("give either t_final or r_final, not both".into())),
        (None, None) => {
            return Err(Error::ConfigInvalid(
                "missing required key `t_final` (or `r_final`)".into(),
            ))
        }
    };

    let scenario: Scenario = entries.required("scenario")?;
    let sweep_param: Option<SweepParam> = entries.take("sweep_param")?;
    let sweep_values = entries.list("sweep_values")?;
    let sweep = match (sweep_param, sweep_values) {
        (Some(param), Some(values)) => Some(SweepSpec { param, values }),
        (None, None) => None,
        (Some(_), None) => return Err(Error::ConfigInvalid("sweep_param given without sweep_values".into())),
        (None, Some(_)) => return Err(Error::ConfigInvalid("sweep_values given without sweep_param".into())),
    };

    let config = RunConfig {
        params,
        n1_max: entries.take("n1_max")?.unwrap_or(10),
        n2_max: entries.take("n2_max")?.unwrap_or(10),
        tol: entries.take("tol")?.unwrap_or(1e-10),
        duration,
        samples: entries.take("samples")?.unwrap_or(21),
        stroboscopic: entries.take("stroboscopic")?.unwrap_or(false),
        photon_shifts: entries.take("photon_shifts")?.unwrap_or(false),
        scenario,
        base_scenario: entries.take("base_scenario")?.unwrap_or(Scenario::Full),
        sweep,
        output: entries.take::<String>("output")?.map(PathBuf::from),
    };
    debug_assert!(entries.0.is_empty());
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    const BASE: &str =
        "omega1 = 1.0\nomega2 = 1.0\nd = 1.0\ng1_re = 0.1\ng2_im = 0.1\nt_final = 2\nscenario = effective\n";

    #[test]
    fn minimal_config_parses_with_defaults() {
        let cfg = parse_config(BASE).unwrap();
        assert_eq!(cfg.params.g1, C64::new(0.1, 0.0));
        assert_eq!(cfg.params.g2, C64::new(0.0, 0.1));
        assert_eq!((cfg.n1_max, cfg.n2_max, cfg.samples, cfg.tol), (10, 10, 21, 1e-10));
        assert_eq!(cfg.duration, Duration::Time(2.0));
        assert_eq!(cfg.params.mode2_detuning, Mode2Detuning::PairResonant);
        assert!(cfg.output.is_none());
    }

    #[test]
    fn comments_and_blank_lines_are_skipped() {
        let text = format!("# header\n\n{BASE}samples = 5 # trailing\n");
        assert_eq!(parse_config(&text).unwrap().samples, 5);
    }

    #[test]
    fn zero_cutoff_is_invalid() {
        let err = parse_config(&format!("{BASE}n1_max = 0\n")).unwrap_err();
        assert!(matches!(err, Error::ConfigInvalid(_)), "{err}");
    }

    #[test]
    fn sweep_without_axis_is_invalid() {
        let text = BASE.replace("scenario = effective", "scenario = sweep");
        assert!(matches!(parse_config(&text).unwrap_err(), Error::ConfigInvalid(_)));
        let ok = format!("{text}sweep_param = d\nsweep_values = 5, 10, 20\n");
        let cfg = parse_config(&ok).unwrap();
        assert_eq!(cfg.sweep.unwrap().values, vec![5.0, 10.0, 20.0]);
    }

    #[test]
    fn errors_carry_line_numbers() {
        let err = parse_config(&format!("{BASE}bogus = 3\n")).unwrap_err();
        assert!(matches!(err, Error::ConfigParse { line: 8, .. }), "{err}");
        let err = parse_config("omega1 = abc\n").unwrap_err();
        assert!(matches!(err, Error::ConfigParse { line: 1, .. }), "{err}");
        let err = parse_config("omega1 1.0\n").unwrap_err();
        assert!(matches!(err, Error::ConfigParse { line: 1, .. }));
        let err = parse_config(&format!("{BASE}d = 2\n")).unwrap_err();
        assert!(matches!(err, Error::ConfigParse { line: 8, .. }));
    }

    #[test]
    fn missing_and_conflicting_keys() {
        let err = parse_config(&BASE.replace("d = 1.0\n", "")).unwrap_err();
        assert!(err.to_string().contains("`d`"), "{err}");
        assert!(parse_config(&BASE.replace("t_final = 2\n", "")).is_err());
        assert!(parse_config(&format!("{BASE}r_final = 0.3\n")).is_err());
        assert!(parse_config(&format!("{BASE}d = -1\n").replace("d = 1.0\n", "")).is_err());
        assert!(parse_config(&format!("{BASE}samples = 1\n")).is_err());
        assert!(parse_config(&format!("{BASE}base_scenario = sweep\n")).is_err());
        assert!(parse_config(&format!("{BASE}mode2_detuning = sideways\n")).is_err());
    }

    #[test]
    fn sweep_override_applies() {
        let cfg = parse_config(&format!("{BASE}mode2_detuning = as_printed\n")).unwrap();
        assert_eq!(cfg.params.mode2_detuning, Mode2Detuning::AsPrinted);
        let point = cfg.with_param(SweepParam::D, 4.0).unwrap();
        assert_eq!(point.params.d, 4.0);
        assert_eq!(point.scenario, Scenario::Full);
        let point = cfg.with_param(SweepParam::DOverG, 10.0).unwrap();
        // G₁ = 0.1·sin(π/4)/2
        assert!((point.params.d - 10.0 * 0.1 * 0.5f64.sqrt() / 2.0).abs() < 1e-15);
        assert!(cfg.with_param(SweepParam::D, -1.0).is_err());
    }
}
