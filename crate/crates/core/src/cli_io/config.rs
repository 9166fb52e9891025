//! Run configuration: a TOML file with one section per pipeline stage. Every key has a
//! default; unknown keys are rejected with their line number.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::blowup_analysis::GncReport;
use crate::error::{Error, Result};
use crate::problem_model::{expression_def, make_problem, preset_def, DomainBox, PresetId, Problem};
use crate::reference_fv::{Boundary, FluxMode, GridSpec, CFL_MAX, MIN_CELLS};

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    preset: Option<String>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    problem: Option<RawProblem>,
    #[serde(default)]
    gamma: RawGamma,
    #[serde(default)]
    front: RawFront,
    #[serde(default)]
    field: RawField,
    #[serde(default)]
    exponents: RawExponents,
    #[serde(default)]
    fv: RawFv,
}

#[derive(Clone, Debug, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct RawProblem {
    flux_f: String,
    flux_g: String,
    u0: String,
    #[serde(rename = "box")]
    domain: Option<[f64; 4]>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct RawGamma {
    delta: Option<f64>,
    n_y: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct RawFront {
    epsilon: Option<f64>,
    n_beta: Option<usize>,
    n_s: Option<usize>,
    m_bound: Option<f64>,
    picard_tol: Option<f64>,
    noise_floor: Option<f64>,
    n_t_out: Option<usize>,
    n_y_out: Option<usize>,
    n_probe: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct RawField {
    y: Option<f64>,
    t_span: Option<f64>,
    x_span: Option<f64>,
    n_t: Option<usize>,
    n_x: Option<usize>,
    gradient_checks: Option<usize>,
    fd_step: Option<f64>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct RawExponents {
    y: Option<f64>,
    r_max: Option<f64>,
    n: Option<usize>,
    gauge_h: Option<f64>,
    gauge_n: Option<usize>,
}

#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
struct RawFv {
    nx: Option<usize>,
    ny: Option<usize>,
    t_end: Option<f64>,
    #[serde(rename = "box")]
    domain: Option<[f64; 4]>,
    cfl: Option<f64>,
    boundary: Option<String>,
    flux: Option<String>,
    x_half: Option<f64>,
    snapshots: Option<usize>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ProblemSource {
    Preset(PresetId),
    Expressions { flux_f: String, flux_g: String, u0: String },
}

#[derive(Clone, Debug, PartialEq)]
pub struct FrontSettings {
    /// `None` means `0.25·T₀`, resolved once the first blowup time is known.
    pub epsilon: Option<f64>,
    pub n_beta: usize,
    pub n_s: usize,
    pub m_bound: f64,
    pub picard_tol: f64,
    pub noise_floor: f64,
    pub n_t_out: usize,
    pub n_y_out: usize,
    pub n_probe: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldSettings {
    /// `None` means the first-blowup `y`.
    pub y: Option<f64>,
    pub t_span: f64,
    pub x_span: f64,
    pub n_t: usize,
    pub n_x: usize,
    pub gradient_checks: usize,
    pub fd_step: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExponentSettings {
    pub y: Option<f64>,
    pub r_max: f64,
    pub n: usize,
    pub gauge_h: f64,
    pub gauge_n: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FvSettings {
    pub nx: usize,
    pub ny: usize,
    pub t_end: f64,
    pub domain: DomainBox,
    pub cfl: f64,
    pub boundary: Boundary,
    pub flux: FluxMode,
    pub x_half: f64,
    /// Intermediate snapshots, evenly spaced in `(0, t_end)`.
    pub snapshots: usize,
}

impl FvSettings {
    pub fn grid_spec(&self) -> GridSpec {
        GridSpec { nx: self.nx, ny: self.ny, domain: self.domain, cfl: self.cfl, boundary: self.boundary, flux: self.flux }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub problem: ProblemSource,
    pub domain: DomainBox,
    pub delta: f64,
    pub n_y: usize,
    pub front: FrontSettings,
    pub field: FieldSettings,
    pub exponents: ExponentSettings,
    pub fv: FvSettings,
    pub out: PathBuf,
    pub seed: u64,
    /// Source text, kept for line diagnostics raised after loading.
    source: Option<String>,
}

pub const DEFAULT_PRESET_DELTA: f64 = 0.4;
pub const DEFAULT_DELTA_FRACTION: f64 = 0.2;
pub const EPSILON_FRACTION: f64 = 0.25;

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::from_raw(RawConfig::default(), None).expect("defaults are valid")
    }
}

impl RunConfig {
    /// Defaults for a preset.
    pub fn for_preset(id: PresetId) -> Self {
        let raw = RawConfig { preset: Some(id.name().into()), ..RawConfig::default() };
        RunConfig::from_raw(raw, None).expect("defaults are valid")
    }

    fn from_raw(raw: RawConfig, source: Option<String>) -> Result<Self> {
        let src = source.as_deref();
        let invalid = |section: Option<&str>, key: &str, msg: String| {
            let full = match section {
                Some(s) => format!("{s}.{key}"),
                None => key.to_string(),
            };
            Error::ConfigInvalid { line: src.and_then(|t| key_line(t, section, key)), key: full, msg }
        };
        let (problem, preset_box) = match (&raw.preset, &raw.problem) {
            (Some(_), Some(_)) => {
                return Err(invalid(None, "preset", "give either a preset or a [problem] section".into()));
            }
            (Some(name), None) => {
                let id = PresetId::from_name(name)
                    .ok_or_else(|| invalid(None, "preset", format!("unknown preset `{name}`")))?;
                (ProblemSource::Preset(id), Some(preset_def(id).1))
            }
            (None, Some(p)) => (
                ProblemSource::Expressions { flux_f: p.flux_f.clone(), flux_g: p.flux_g.clone(), u0: p.u0.clone() },
                None,
            ),
            (None, None) => (ProblemSource::Preset(PresetId::A), Some(preset_def(PresetId::A).1)),
        };
        let domain = match (raw.problem.as_ref().and_then(|p| p.domain), preset_box) {
            (Some([a, b, c, d]), _) => DomainBox::new(a, b, c, d),
            (None, Some(b)) => b,
            (None, None) => DomainBox::new(-0.5, 0.5, -0.5, 0.5),
        };
        if domain.is_empty() {
            return Err(invalid(Some("problem"), "box", "empty or non-finite box".into()));
        }
        let positive = |section: &str, key: &str, v: f64| -> Result<f64> {
            if v.is_finite() && v > 0.0 {
                Ok(v)
            } else {
                Err(invalid(Some(section), key, format!("must be positive, got {v}")))
            }
        };
        let at_least = |section: &str, key: &str, v: usize, min: usize| -> Result<usize> {
            if v >= min {
                Ok(v)
            } else {
                Err(invalid(Some(section), key, format!("must be at least {min}, got {v}")))
            }
        };
        let half_height = 0.5 * (domain.y_hi - domain.y_lo);
        let delta = match raw.gamma.delta {
            Some(d) => positive("gamma", "delta", d)?,
            None if preset_box.is_some() => DEFAULT_PRESET_DELTA,
            None => DEFAULT_DELTA_FRACTION * domain.half_width(),
        };
        if delta > half_height {
            return Err(invalid(Some("gamma"), "delta", format!("{delta} exceeds the box half-height {half_height}")));
        }
        let n_y = at_least("gamma", "n_y", raw.gamma.n_y.unwrap_or(41), 2)?;

        let rf = &raw.front;
        let epsilon = rf.epsilon.map(|e| positive("front", "epsilon", e)).transpose()?;
        let front = FrontSettings {
            epsilon,
            n_beta: at_least("front", "n_beta", rf.n_beta.unwrap_or(17), 5)?,
            n_s: at_least("front", "n_s", rf.n_s.unwrap_or(33), 5)?,
            m_bound: positive("front", "m_bound", rf.m_bound.unwrap_or(100.0))?,
            picard_tol: positive("front", "picard_tol", rf.picard_tol.unwrap_or(1e-12))?,
            noise_floor: positive("front", "noise_floor", rf.noise_floor.unwrap_or(1e-7))?,
            n_t_out: at_least("front", "n_t_out", rf.n_t_out.unwrap_or(9), 1)?,
            n_y_out: at_least("front", "n_y_out", rf.n_y_out.unwrap_or(9), 1)?,
            n_probe: at_least("front", "n_probe", rf.n_probe.unwrap_or(50), 1)?,
        };

        let fd = &raw.field;
        let field = FieldSettings {
            y: fd.y,
            t_span: positive("field", "t_span", fd.t_span.unwrap_or(0.04))?,
            x_span: positive("field", "x_span", fd.x_span.unwrap_or(0.02))?,
            n_t: at_least("field", "n_t", fd.n_t.unwrap_or(17), 1)?,
            n_x: at_least("field", "n_x", fd.n_x.unwrap_or(17), 1)?,
            gradient_checks: fd.gradient_checks.unwrap_or(16),
            fd_step: positive("field", "fd_step", fd.fd_step.unwrap_or(1e-6))?,
        };

        let ex = &raw.exponents;
        let exponents = ExponentSettings {
            y: ex.y,
            r_max: positive("exponents", "r_max", ex.r_max.unwrap_or(1e-3))?,
            n: at_least("exponents", "n", ex.n.unwrap_or(12), 2)?,
            gauge_h: positive("exponents", "gauge_h", ex.gauge_h.unwrap_or(0.01))?,
            gauge_n: at_least("exponents", "gauge_n", ex.gauge_n.unwrap_or(32), 1)?,
        };

        let rv = &raw.fv;
        let fv_domain = match rv.domain {
            Some([a, b, c, d]) => DomainBox::new(a, b, c, d),
            None => DomainBox::new(2.0 * domain.x_lo, 2.0 * domain.x_hi, domain.y_lo, domain.y_hi),
        };
        if fv_domain.is_empty() {
            return Err(invalid(Some("fv"), "box", "empty or non-finite box".into()));
        }
        let cfl = positive("fv", "cfl", rv.cfl.unwrap_or(CFL_MAX))?;
        if cfl > CFL_MAX {
            return Err(invalid(Some("fv"), "cfl", format!("{cfl} exceeds {CFL_MAX}")));
        }
        let boundary = match rv.boundary.as_deref() {
            None => Boundary::Outflow,
            Some(b) => Boundary::from_name(b)
                .ok_or_else(|| invalid(Some("fv"), "boundary", format!("unknown boundary `{b}`")))?,
        };
        let flux = match rv.flux.as_deref() {
            None | Some("sonic") => FluxMode::Sonic,
            Some("scan") => FluxMode::Scan,
            Some(other) => return Err(invalid(Some("fv"), "flux", format!("unknown flux mode `{other}`"))),
        };
        let fv = FvSettings {
            nx: at_least("fv", "nx", rv.nx.unwrap_or(256), MIN_CELLS)?,
            ny: at_least("fv", "ny", rv.ny.unwrap_or(256), MIN_CELLS)?,
            t_end: positive("fv", "t_end", rv.t_end.unwrap_or(1.2))?,
            domain: fv_domain,
            cfl,
            boundary,
            flux,
            x_half: positive("fv", "x_half", rv.x_half.unwrap_or(domain.x_hi.abs().min(domain.x_lo.abs())))?,
            snapshots: rv.snapshots.unwrap_or(0),
        };

        Ok(RunConfig {
            problem,
            domain,
            delta,
            n_y,
            front,
            field,
            exponents,
            fv,
            out: raw.out.unwrap_or_else(|| PathBuf::from("out")),
            seed: raw.seed.unwrap_or(0),
            source,
        })
    }

    /// Switch the problem to a preset, taking its box.
    pub fn with_preset(mut self, id: PresetId) -> Self {
        if self.problem != ProblemSource::Preset(id) {
            self.problem = ProblemSource::Preset(id);
            self.domain = preset_def(id).1;
        }
        self
    }

    pub fn build_problem(&self) -> Result<Problem> {
        let def = match &self.problem {
            ProblemSource::Preset(id) => preset_def(*id).0,
            ProblemSource::Expressions { flux_f, flux_g, u0 } => expression_def(flux_f, flux_g, u0)?,
        };
        make_problem(def, self.domain)
    }

    /// The front time window, checked against `0.25·T₀`.
    pub fn epsilon(&self, gnc: &GncReport) -> Result<f64> {
        let limit = EPSILON_FRACTION * gnc.t_star0;
        match self.front.epsilon {
            None => Ok(limit),
            Some(e) if e <= limit * (1.0 + 1e-12) => Ok(e),
            Some(e) => Err(Error::ConfigInvalid {
                line: self.source.as_deref().and_then(|t| key_line(t, Some("front"), "epsilon")),
                key: "front.epsilon".into(),
                msg: format!("{e} exceeds 0.25·T0 = {limit}"),
            }),
        }
    }
}

/// Read and validate a configuration file.
pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::ConfigInvalid {
        line: None,
        key: path.display().to_string(),
        msg: e.to_string(),
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<RunConfig> {
    let prepared = quote_bare_words(text);
    let raw: RawConfig = toml::from_str(&prepared).map_err(|e| {
        let line = e.span().map(|s| prepared[..s.start].matches('\n').count() + 1);
        let key = line
            .and_then(|l| prepared.lines().nth(l - 1))
            .and_then(|l| l.split('=').next())
            .map(|k| k.trim().trim_matches(|c| c == '[' || c == ']').to_string())
            .unwrap_or_default();
        Error::ConfigInvalid { line, key, msg: e.message().to_string() }
    })?;
    RunConfig::from_raw(raw, Some(text.to_string()))
}

/// `key = word` with an unquoted identifier-like word is read as a string, so
/// `preset = preset-a` is accepted.
fn quote_bare_words(text: &str) -> String {
    let mut out = String::with_capacity(text.len() + 16);
    for line in text.lines() {
        let converted = line.split_once('=').and_then(|(k, v)| {
            let (val, comment) = match v.find('#') {
                Some(i) => (&v[..i], &v[i..]),
                None => (v, ""),
            };
            let w = val.trim();
            let bare = w.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
                && w.chars().all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_')
                && !matches!(w, "true" | "false" | "inf" | "nan");
            bare.then(|| format!("{}= \"{w}\" {comment}", k))
        });
        out.push_str(converted.as_deref().unwrap_or(line));
        out.push('\n');
    }
    out
}

/// Line (1-based) on which `key` is assigned inside `section` (`None` for top level).
fn key_line(text: &str, section: Option<&str>, key: &str) -> Option<usize> {
    let mut current: Option<String> = None;
    for (i, line) in text.lines().enumerate() {
        let l = line.trim();
        if l.starts_with('[') {
            current = Some(l.trim_matches(|c| c == '[' || c == ']').trim().to_string());
            continue;
        }
        if let Some((k, _)) = l.split_once('=') {
            if k.trim() == key && current.as_deref() == section {
                return Some(i + 1);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_preset_file_fills_defaults() {
        let cfg = parse_config("preset = preset-a\n").unwrap();
        assert_eq!(cfg.problem, ProblemSource::Preset(PresetId::A));
        assert_eq!(cfg.delta, DEFAULT_PRESET_DELTA);
        assert_eq!(cfg.front.n_beta, 17);
        assert_eq!(cfg.fv.domain, DomainBox::new(-1.0, 1.0, -0.5, 0.5));
        assert_eq!(cfg.seed, 0);
        let quoted = parse_config("preset = \"preset-a\"").unwrap();
        assert_eq!(quoted, RunConfig { source: quoted.source.clone(), ..cfg.clone() });
    }

    #[test]
    fn negative_epsilon_is_rejected_with_line() {
        let e = parse_config("preset = preset-b\n\n[front]\nepsilon = -0.1\n").unwrap_err();
        match e {
            Error::ConfigInvalid { line, key, .. } => {
                assert_eq!(line, Some(4));
                assert_eq!(key, "front.epsilon");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn delta_larger_than_box_is_rejected() {
        let e = parse_config("preset = preset-a\n[gamma]\ndelta = 0.8\n").unwrap_err();
        assert!(matches!(e, Error::ConfigInvalid { line: Some(3), .. }), "{e:?}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = parse_config("preset = preset-a\n[fv]\nnx = 128\ncells = 3\n").unwrap_err();
        match e {
            Error::ConfigInvalid { line, key, .. } => assert_eq!((line, key.as_str()), (Some(4), "cells")),
            other => panic!("{other:?}"),
        }
        assert!(parse_config("presetx = 1\n").is_err());
        assert!(parse_config("preset = preset-c\n").is_err());
    }

    #[test]
    fn custom_problem_and_epsilon_limit() {
        let text = "[problem]\nflux_f = \"u^2/2\"\nflux_g = \"0\"\nu0 = \"-x + x^3 + 3*x*y^2\"\nbox = [-0.5, 0.5, -0.5, 0.5]\n[front]\nepsilon = 0.3\n";
        let cfg = parse_config(text).unwrap();
        assert!((cfg.delta - 0.1).abs() < 1e-15);
        let p = cfg.build_problem().unwrap();
        let gnc = crate::blowup_analysis::find_first_blowup(&p).unwrap();
        assert!(matches!(cfg.epsilon(&gnc), Err(Error::ConfigInvalid { line: Some(7), .. })));
    }

    #[test]
    fn fv_limits() {
        assert!(parse_config("[fv]\nnx = 32\n").is_err());
        assert!(parse_config("[fv]\ncfl = 0.9\n").is_err());
        assert!(parse_config("[fv]\nboundary = periodic\n").is_ok());
        assert!(parse_config("[fv]\nboundary = wall\n").is_err());
    }
}
