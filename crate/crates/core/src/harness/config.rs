use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coefficients::{default_eps_grid, BeamMaterial, FamilyRules};
use crate::fractional_kernel::GammaRule;
use crate::time_integration::{AtomSplit, NewmarkParams, PicardOptions};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scenario {
    /// Clamped beam released from a bubble shape.
    FreeVibration,
    /// Mollified point load crossing the beam, one run per speed.
    MovingLoad,
    /// Stepped stiffness hit by a mollified axial impulse.
    AxialImpulse,
    /// The axial-impulse problem over the whole ε grid.
    EpsSweep,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Scenario::FreeVibration => "free_vibration",
            Scenario::MovingLoad => "moving_load",
            Scenario::AxialImpulse => "axial_impulse",
            Scenario::EpsSweep => "eps_sweep",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelChoice {
    /// The singular kernel, integrated by product rules.
    #[default]
    Raw,
    /// `l ∗ ρ⁺_ε` with `kernel_rule`.
    Mollified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    pub alpha: f64,
    pub theta: f64,
    /// Without the foundation `L = 0`.
    pub foundation: bool,
    pub kernel: KernelChoice,
    pub kernel_rule: GammaRule,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            theta: 0.5,
            foundation: true,
            kernel: KernelChoice::Raw,
            kernel_rule: GammaRule::power(1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeConfig {
    pub t_end: f64,
    /// Defaults to `t_end / 2048`.
    pub dt: Option<f64>,
    pub newmark: NewmarkParams,
}

impl Default for TimeConfig {
    fn default() -> Self {
        Self {
            t_end: 1.0,
            dt: None,
            newmark: NewmarkParams::default(),
        }
    }
}

impl TimeConfig {
    pub fn dt(&self) -> f64 {
        self.dt.unwrap_or(self.t_end / 2048.0)
    }

    pub fn n_steps(&self) -> usize {
        (self.t_end / self.dt()).round() as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeshConfig {
    pub n_elems: usize,
}

impl Default for MeshConfig {
    fn default() -> Self {
        Self { n_elems: 64 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RegularizationConfig {
    pub eps: Vec<f64>,
    pub rules: FamilyRules,
}

impl Default for RegularizationConfig {
    fn default() -> Self {
        Self {
            eps: vec![2f64.powi(-6)],
            rules: FamilyRules::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolverMode {
    #[default]
    Direct,
    Picard,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverConfig {
    pub mode: SolverMode,
    pub tol: f64,
    pub max_iter: usize,
    pub split: AtomSplit,
    /// Split the horizon when the contraction factor exceeds `restart_target`.
    pub restart: bool,
    pub restart_target: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let p = PicardOptions::default();
        Self {
            mode: SolverMode::Direct,
            tol: p.tol,
            max_iter: p.max_iter,
            split: p.split,
            restart: true,
            restart_target: 0.9,
        }
    }
}

impl SolverConfig {
    pub fn picard_options(&self) -> PicardOptions {
        PicardOptions {
            tol: self.tol,
            max_iter: self.max_iter,
            split: self.split,
        }
    }
}

/// Initial data `f₁ = amplitude · w`, `f₂ = velocity · w` with the clamped
/// bubble `w = 16 x² (1 − x)²`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct InitialConfig {
    pub amplitude: f64,
    pub velocity: f64,
}

impl Default for InitialConfig {
    fn default() -> Self {
        Self {
            amplitude: 1e-3,
            velocity: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LoadingConfig {
    /// Load speeds for the moving-load scenario; empty means `material.speed`.
    pub speeds: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// Write every `stride`-th step of the trajectory.
    pub stride: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            dir: PathBuf::from("out"),
            stride: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: Scenario,
    #[serde(default)]
    pub model: ModelConfig,
    #[serde(default)]
    pub material: BeamMaterial,
    #[serde(default)]
    pub time: TimeConfig,
    #[serde(default)]
    pub mesh: MeshConfig,
    #[serde(default)]
    pub regularization: RegularizationConfig,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub initial: InitialConfig,
    #[serde(default)]
    pub loading: LoadingConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

impl RunConfig {
    /// Defaults of a scenario before user overrides.
    pub fn preset(scenario: Scenario) -> Self {
        let mut c = Self {
            scenario,
            model: ModelConfig::default(),
            material: BeamMaterial::default(),
            time: TimeConfig::default(),
            mesh: MeshConfig::default(),
            regularization: RegularizationConfig::default(),
            solver: SolverConfig::default(),
            initial: InitialConfig::default(),
            loading: LoadingConfig::default(),
            output: OutputConfig::default(),
        };
        match scenario {
            Scenario::FreeVibration => {
                c.model.foundation = false;
            }
            Scenario::MovingLoad => {
                c.material.h0 = 1.0;
                c.initial.amplitude = 0.0;
                c.loading.speeds = vec![0.5, 1.0];
            }
            Scenario::AxialImpulse => {
                c.material.ei2 = 1.0;
                c.material.p1 = 1.0;
            }
            Scenario::EpsSweep => {
                c.material.ei2 = 1.0;
                c.material.p1 = 1.0;
                c.regularization.eps = default_eps_grid();
            }
        }
        c
    }

    /// Parses TOML text over the preset of its `scenario` and validates.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let user: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        let scenario = user
            .get("scenario")
            .ok_or_else(|| Error::Config("missing key `scenario`".into()))?
            .clone()
            .try_into::<Scenario>()
            .map_err(|e| Error::Config(format!("scenario: {e}")))?;
        let mut base = toml::Table::try_from(Self::preset(scenario)).map_err(|e| Error::Config(e.to_string()))?;
        merge(&mut base, user);
        let mut cfg: RunConfig = toml::Value::Table(base)
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.normalize();
        cfg.validate()?;
        Ok(cfg)
    }

    fn normalize(&mut self) {
        let eps = &mut self.regularization.eps;
        eps.sort_by(|a, b| b.total_cmp(a));
        eps.dedup();
    }

    pub fn validate(&self) -> Result<()> {
        let m = &self.model;
        if !(m.alpha > 0.0 && m.alpha < 1.0) {
            return Err(Error::invalid("alpha", "alpha must lie in (0,1)"));
        }
        if !(m.theta > 0.0 && m.theta <= 1.0) {
            return Err(Error::invalid("theta", "theta must lie in (0,1]"));
        }
        let t = &self.time;
        if !(t.t_end > 0.0 && t.t_end.is_finite()) {
            return Err(Error::invalid("t_end", "t_end must be positive"));
        }
        let dt = t.dt();
        if !(dt > 0.0 && dt < t.t_end) {
            return Err(Error::invalid("dt", format!("dt must lie in (0, t_end), got {dt}")));
        }
        if ((t.t_end / dt).round() * dt - t.t_end).abs() > 1e-9 * t.t_end {
            return Err(Error::invalid("dt", "t_end must be a whole number of steps"));
        }
        t.newmark.validate()?;
        if self.mesh.n_elems < 2 {
            return Err(Error::invalid("n_elems", "need at least two elements"));
        }
        let eps = &self.regularization.eps;
        if eps.is_empty() || eps.iter().any(|e| !(*e > 0.0 && *e <= 1.0)) {
            return Err(Error::invalid("eps", "eps values must lie in (0,1]"));
        }
        if eps.len() > 1 && eps.contains(&1.0) && self.rules_use_log() {
            return Err(Error::invalid("eps", "log-type rules need eps < 1"));
        }
        for rule in [
            &self.regularization.rules.c,
            &self.regularization.rules.b,
            &self.regularization.rules.h,
        ] {
            for e in eps {
                rule.gamma(*e)?;
            }
        }
        let s = &self.solver;
        if !(s.tol > 0.0) || s.max_iter == 0 {
            return Err(Error::invalid("solver", "tol must be positive and max_iter at least 1"));
        }
        if !(s.restart_target > 0.0 && s.restart_target < 1.0) {
            return Err(Error::invalid("restart_target", "restart_target must lie in (0,1)"));
        }
        if self.loading.speeds.iter().any(|v| !(*v > 0.0)) {
            return Err(Error::invalid("speeds", "load speeds must be positive"));
        }
        if self.output.stride == 0 {
            return Err(Error::invalid("stride", "stride must be at least 1"));
        }
        self.material.validate(t.t_end)
    }

    fn rules_use_log(&self) -> bool {
        let r = &self.regularization.rules;
        [r.c, r.b, r.h].iter().any(|g| matches!(g, GammaRule::Log { .. }))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Recursively overlays `over` on `base`.
fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) if !is_tagged(b) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}

/// Tagged enums (`kind = …`) are replaced whole, not merged.
fn is_tagged(t: &toml::Table) -> bool {
    t.contains_key("kind")
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    RunConfig::from_toml_str(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_gets_defaults() {
        let c = RunConfig::from_toml_str("scenario = \"free_vibration\"\n[model]\nalpha = 0.3\ntheta = 0.7\n").unwrap();
        assert_eq!(c.time.t_end, 1.0);
        assert_eq!(c.time.dt(), 1.0 / 2048.0);
        assert_eq!(c.mesh.n_elems, 64);
        assert_eq!((c.model.alpha, c.model.theta), (0.3, 0.7));
        assert!(!c.model.foundation);
    }

    #[test]
    fn theta_out_of_range_is_named() {
        let err = RunConfig::from_toml_str("scenario = \"axial_impulse\"\n[model]\ntheta = 1.5\n").unwrap_err();
        assert!(err.to_string().contains("theta must lie in (0,1]"), "{err}");
    }

    #[test]
    fn eps_list_sorted_descending() {
        let text = "scenario = \"eps_sweep\"\n[regularization]\neps = [0.000244140625, 0.125, 0.015625, 0.125]\n";
        let c = RunConfig::from_toml_str(text).unwrap();
        assert_eq!(c.regularization.eps, vec![0.125, 0.015625, 0.000244140625]);
        let full = RunConfig::from_toml_str("scenario = \"eps_sweep\"\n").unwrap();
        assert_eq!(full.regularization.eps.len(), 10);
        assert_eq!(full.regularization.eps[0], 0.125);
    }

    #[test]
    fn unknown_keys_rejected() {
        let err = RunConfig::from_toml_str("scenario = \"moving_load\"\n[mesh]\nn_elem = 3\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)), "{err}");
        let err = RunConfig::from_toml_str("scenario = \"warp_drive\"\n").unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = RunConfig::from_toml_str("scenario = \"moving_load\"\n[mesh\n").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
    }

    #[test]
    fn rules_replace_whole() {
        let text = "scenario = \"eps_sweep\"\n[regularization.rules.b]\nkind = \"power\"\nexponent = 1.0\n";
        let c = RunConfig::from_toml_str(text).unwrap();
        assert_eq!(c.regularization.rules.b, GammaRule::power(1.0));
    }

    #[test]
    fn round_trips_through_toml() {
        let c = RunConfig::preset(Scenario::MovingLoad);
        let back = RunConfig::from_toml_str(&c.to_toml_string().unwrap()).unwrap();
        assert_eq!(c, back);
    }

    #[test]
    fn dt_must_divide_the_horizon() {
        let err = RunConfig::from_toml_str("scenario = \"free_vibration\"\n[time]\ndt = 0.3\n").unwrap_err();
        assert!(err.to_string().contains("dt"));
        let err = RunConfig::from_toml_str("scenario = \"free_vibration\"\n[time]\ndt = 2.0\n").unwrap_err();
        assert!(err.to_string().contains("dt"));
    }
}
