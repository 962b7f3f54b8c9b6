//! Flat `key = value` run configuration.
//!
//! Blank lines and lines starting with `#` are ignored. Lists are
//! comma-separated. Every key has a default; an unknown key is an error.
//! [`RunConfig::to_text`] writes the fully resolved configuration back in the
//! same format, so a run manifest can be fed to `--config` unchanged.

use std::fmt::Write as _;
use std::str::FromStr;

use bscnoma::mcsim::{BerSetup, Geometry, Mode, SweepVariable};
use bscnoma::optimizer::OptimizerConfig;
use bscnoma::qcldpc::JointLayout;
use bscnoma::sysmodel::{dbm_to_watts, SystemParams};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),
    #[error("key `{key}` given twice")]
    Duplicate { key: String },
    #[error("invalid value `{value}` for `{key}`: {reason}")]
    Value { key: String, value: String, reason: String },
    #[error("invalid configuration: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            _ => Err("expected csv or json".into()),
        }
    }
}

/// Which modes a run covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeSel {
    Wbst,
    Nbst,
    Both,
}

impl ModeSel {
    pub fn name(self) -> &'static str {
        match self {
            ModeSel::Wbst => "wbst",
            ModeSel::Nbst => "nbst",
            ModeSel::Both => "both",
        }
    }

    pub fn modes(self) -> Vec<Mode> {
        match self {
            ModeSel::Wbst => vec![Mode::Wbst],
            ModeSel::Nbst => vec![Mode::Nbst],
            ModeSel::Both => vec![Mode::Wbst, Mode::Nbst],
        }
    }
}

impl FromStr for ModeSel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "wbst" => Ok(ModeSel::Wbst),
            "nbst" => Ok(ModeSel::Nbst),
            "both" => Ok(ModeSel::Both),
            _ => Err("expected wbst, nbst or both".into()),
        }
    }
}

/// Channel used by the single-channel experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelSel {
    /// Every gain at its mean `d^(−α)`.
    Mean,
    /// The seeded Rayleigh draw with index `draw`.
    Draw,
}

impl FromStr for ChannelSel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "mean" => Ok(ChannelSel::Mean),
            "draw" => Ok(ChannelSel::Draw),
            _ => Err("expected mean or draw".into()),
        }
    }
}

/// Every tunable of every experiment, in the units of the configuration file.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub format: Format,
    pub mode: ModeSel,

    pub bandwidth_hz: f64,
    pub noise_dbm: f64,
    pub eta: f64,
    pub psi_i: f64,
    pub psi_j: f64,
    pub p_t_dbm: f64,
    pub p_r_max_dbm: f64,
    pub p_c_w: f64,
    pub r_min_bps: f64,

    pub geometry: Geometry,
    pub optimizer: OptimizerConfig,
    pub channel: ChannelSel,
    pub draw: u64,

    pub sweep_variable: SweepVariable,
    /// `None` selects the default grid of the swept variable.
    pub sweep_grid: Option<Vec<f64>>,
    pub trials: usize,
    pub eta_list: Vec<f64>,

    pub snr_db: Vec<f64>,
    pub iteration_budgets: Vec<usize>,
    pub xi_n: f64,
    pub relay_advantage_db: f64,
    pub relay_iters: usize,
    pub min_bits: u64,
    pub max_frame_errors: Option<u64>,

    pub w: usize,
    pub v: usize,
    /// `None` picks the smallest admissible prime power.
    pub sigma: Option<usize>,
    pub layout: JointLayout,
}

impl Default for RunConfig {
    fn default() -> Self {
        let ber = BerSetup::default();
        Self {
            seed: 1,
            format: Format::Csv,
            mode: ModeSel::Both,
            bandwidth_hz: 1e6,
            noise_dbm: -114.0,
            eta: 0.1,
            psi_i: 0.5,
            psi_j: 0.5,
            p_t_dbm: 30.0,
            p_r_max_dbm: 10.0,
            p_c_w: 1e-3,
            r_min_bps: 5e5,
            geometry: Geometry::default(),
            optimizer: OptimizerConfig::default(),
            channel: ChannelSel::Mean,
            draw: 0,
            sweep_variable: SweepVariable::PT,
            sweep_grid: None,
            trials: 200,
            eta_list: vec![0.1, 0.2, 0.4],
            snr_db: ber.snr_db,
            iteration_budgets: ber.iteration_budgets,
            xi_n: ber.xi_n,
            relay_advantage_db: ber.relay_advantage_db,
            relay_iters: ber.relay_iters,
            min_bits: ber.min_bits,
            max_frame_errors: ber.max_frame_errors,
            w: 5,
            v: 1,
            sigma: None,
            layout: JointLayout::default(),
        }
    }
}

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse::<T>().map_err(|e| ConfigError::Value { key: key.into(), value: value.into(), reason: e.to_string() })
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.split(',').map(|x| parse(key, x.trim())).collect()
}

fn parse_opt<T: FromStr>(key: &str, value: &str, none: &str) -> Result<Option<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    if value == none {
        Ok(None)
    } else {
        parse(key, value).map(Some)
    }
}

fn join<T: std::fmt::Display>(xs: &[T]) -> String {
    xs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
}

/// Default grid of each swept variable.
pub fn default_grid(v: SweepVariable) -> Vec<f64> {
    match v {
        SweepVariable::PT => vec![10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0],
        SweepVariable::PRMax => vec![0.0, 5.0, 10.0, 15.0, 20.0],
        SweepVariable::PC => vec![0.001, 0.002, 0.005, 0.01, 0.02, 0.05, 0.1],
        SweepVariable::Eta => vec![0.1, 0.2, 0.3, 0.4],
    }
}

impl RunConfig {
    /// Parses a configuration document on top of the defaults.
    pub fn parse_text(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut seen = std::collections::HashSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ConfigError::Syntax { line: i + 1 })?;
            let (k, v) = (k.trim(), v.trim());
            if k.is_empty() {
                return Err(ConfigError::Syntax { line: i + 1 });
            }
            if !seen.insert(k.to_string()) {
                return Err(ConfigError::Duplicate { key: k.into() });
            }
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let g = &mut self.geometry;
        let o = &mut self.optimizer;
        match key {
            "seed" => self.seed = parse(key, value)?,
            "format" => self.format = parse(key, value)?,
            "mode" => self.mode = parse(key, value)?,
            "bandwidth_hz" => self.bandwidth_hz = parse(key, value)?,
            "noise_dbm" => self.noise_dbm = parse(key, value)?,
            "eta" => self.eta = parse(key, value)?,
            "psi_i" => self.psi_i = parse(key, value)?,
            "psi_j" => self.psi_j = parse(key, value)?,
            "p_t_dbm" => self.p_t_dbm = parse(key, value)?,
            "p_r_max_dbm" => self.p_r_max_dbm = parse(key, value)?,
            "p_c_w" => self.p_c_w = parse(key, value)?,
            "r_min_bps" => self.r_min_bps = parse(key, value)?,
            "d_sn" => g.d_sn = parse(key, value)?,
            "d_sb" => g.d_sb = parse(key, value)?,
            "d_bn" => g.d_bn = parse(key, value)?,
            "d_bf" => g.d_bf = parse(key, value)?,
            "d_nf" => g.d_nf = parse(key, value)?,
            "d_nb" => g.d_nb = parse(key, value)?,
            "path_loss_exponent" => g.path_loss_exponent = parse(key, value)?,
            "tol_inner" => o.tol_inner = parse(key, value)?,
            "epsilon_d" => o.epsilon_d = parse(key, value)?,
            "max_outer" => o.max_outer = parse(key, value)?,
            "max_inner" => o.max_inner = parse(key, value)?,
            "mu0" => o.mu0 = parse(key, value)?,
            "channel" => self.channel = parse(key, value)?,
            "draw" => self.draw = parse(key, value)?,
            "sweep_variable" => {
                self.sweep_variable = SweepVariable::parse(value).ok_or_else(|| ConfigError::Value {
                    key: key.into(),
                    value: value.into(),
                    reason: "expected p_t, p_r_max, p_c or eta".into(),
                })?
            }
            "sweep_grid" => self.sweep_grid = Some(parse_list(key, value)?),
            "trials" => self.trials = parse(key, value)?,
            "eta_list" => self.eta_list = parse_list(key, value)?,
            "snr_db" => self.snr_db = parse_list(key, value)?,
            "iteration_budgets" => self.iteration_budgets = parse_list(key, value)?,
            "xi_n" => self.xi_n = parse(key, value)?,
            "relay_advantage_db" => self.relay_advantage_db = parse(key, value)?,
            "relay_iters" => self.relay_iters = parse(key, value)?,
            "min_bits" => self.min_bits = parse(key, value)?,
            "max_frame_errors" => self.max_frame_errors = parse_opt(key, value, "none")?,
            "w" => self.w = parse(key, value)?,
            "v" => self.v = parse(key, value)?,
            "sigma" => self.sigma = parse_opt(key, value, "auto")?,
            "lambda_c1" => self.layout.lambda_c1 = parse(key, value)?,
            "lambda_c2" => self.layout.lambda_c2 = parse(key, value)?,
            "lambda_c3" => self.layout.lambda_c3 = parse(key, value)?,
            "mu_r" => self.layout.mu_r = parse(key, value)?,
            _ => return Err(ConfigError::UnknownKey(key.into())),
        }
        Ok(())
    }

    /// Every key with its resolved value, in a fixed order.
    pub fn pairs(&self) -> Vec<(&'static str, String)> {
        let g = &self.geometry;
        let o = &self.optimizer;
        vec![
            ("seed", self.seed.to_string()),
            ("format", self.format.name().into()),
            ("mode", self.mode.name().into()),
            ("bandwidth_hz", self.bandwidth_hz.to_string()),
            ("noise_dbm", self.noise_dbm.to_string()),
            ("eta", self.eta.to_string()),
            ("psi_i", self.psi_i.to_string()),
            ("psi_j", self.psi_j.to_string()),
            ("p_t_dbm", self.p_t_dbm.to_string()),
            ("p_r_max_dbm", self.p_r_max_dbm.to_string()),
            ("p_c_w", self.p_c_w.to_string()),
            ("r_min_bps", self.r_min_bps.to_string()),
            ("d_sn", g.d_sn.to_string()),
            ("d_sb", g.d_sb.to_string()),
            ("d_bn", g.d_bn.to_string()),
            ("d_bf", g.d_bf.to_string()),
            ("d_nf", g.d_nf.to_string()),
            ("d_nb", g.d_nb.to_string()),
            ("path_loss_exponent", g.path_loss_exponent.to_string()),
            ("tol_inner", o.tol_inner.to_string()),
            ("epsilon_d", o.epsilon_d.to_string()),
            ("max_outer", o.max_outer.to_string()),
            ("max_inner", o.max_inner.to_string()),
            ("mu0", o.mu0.to_string()),
            (
                "channel",
                match self.channel {
                    ChannelSel::Mean => "mean".into(),
                    ChannelSel::Draw => "draw".into(),
                },
            ),
            ("draw", self.draw.to_string()),
            ("sweep_variable", self.sweep_variable.name().into()),
            ("sweep_grid", join(&self.grid())),
            ("trials", self.trials.to_string()),
            ("eta_list", join(&self.eta_list)),
            ("snr_db", join(&self.snr_db)),
            ("iteration_budgets", join(&self.iteration_budgets)),
            ("xi_n", self.xi_n.to_string()),
            ("relay_advantage_db", self.relay_advantage_db.to_string()),
            ("relay_iters", self.relay_iters.to_string()),
            ("min_bits", self.min_bits.to_string()),
            ("max_frame_errors", self.max_frame_errors.map_or("none".into(), |x| x.to_string())),
            ("w", self.w.to_string()),
            ("v", self.v.to_string()),
            ("sigma", self.sigma.map_or("auto".into(), |x| x.to_string())),
            ("lambda_c1", self.layout.lambda_c1.to_string()),
            ("lambda_c2", self.layout.lambda_c2.to_string()),
            ("lambda_c3", self.layout.lambda_c3.to_string()),
            ("mu_r", self.layout.mu_r.to_string()),
        ]
    }

    /// The resolved configuration as a document [`RunConfig::parse_text`] accepts.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in self.pairs() {
            let _ = writeln!(out, "{k} = {v}");
        }
        out
    }

    pub fn grid(&self) -> Vec<f64> {
        self.sweep_grid.clone().unwrap_or_else(|| default_grid(self.sweep_variable))
    }

    pub fn system(&self) -> SystemParams {
        SystemParams {
            bandwidth_hz: self.bandwidth_hz,
            noise_power_w: dbm_to_watts(self.noise_dbm),
            eta: self.eta,
            psi_i: self.psi_i,
            psi_j: self.psi_j,
            p_t: dbm_to_watts(self.p_t_dbm),
            p_r_max: dbm_to_watts(self.p_r_max_dbm),
            p_c: self.p_c_w,
            r_min: self.r_min_bps,
        }
    }

    pub fn ber_setup(&self) -> BerSetup {
        BerSetup {
            snr_db: self.snr_db.clone(),
            iteration_budgets: self.iteration_budgets.clone(),
            xi_n: self.xi_n,
            relay_advantage_db: self.relay_advantage_db,
            relay_iters: self.relay_iters,
            min_bits: self.min_bits,
            max_frame_errors: self.max_frame_errors,
            seed: self.seed,
        }
    }

    /// Checks every value before any work starts.
    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: &str| Err(ConfigError::Invalid(m.into()));
        self.system().validate().map_err(|f| ConfigError::Invalid(format!("system parameter `{f}`")))?;
        self.geometry.validate().map_err(|f| ConfigError::Invalid(f.into()))?;
        let o = &self.optimizer;
        if !(o.tol_inner > 0.0 && o.epsilon_d > 0.0 && o.mu0 > 0.0) || o.max_outer == 0 || o.max_inner == 0 {
            return bad("optimizer tolerances, step and iteration caps must be positive");
        }
        let grid = self.grid();
        if grid.is_empty() || grid.iter().any(|x| !x.is_finite()) || grid.windows(2).any(|w| !(w[0] < w[1])) {
            return bad("sweep_grid must be nonempty, finite and strictly ascending");
        }
        match self.sweep_variable {
            SweepVariable::Eta if grid.iter().any(|x| !(0.0..=1.0).contains(x)) => {
                return bad("eta grid must lie in [0, 1]")
            }
            SweepVariable::PC if grid.iter().any(|&x| x < 0.0) => return bad("p_c grid must be nonnegative"),
            _ => {}
        }
        if self.trials == 0 {
            return bad("trials must be positive");
        }
        if self.eta_list.is_empty() || self.eta_list.iter().any(|x| !(0.0..=1.0).contains(x)) {
            return bad("eta_list must be nonempty with values in [0, 1]");
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|x| !x.is_finite()) {
            return bad("snr_db must be nonempty and finite");
        }
        if self.iteration_budgets.is_empty() || self.iteration_budgets.contains(&0) {
            return bad("iteration_budgets must be nonempty and positive");
        }
        if !(self.xi_n > 0.0 && self.xi_n < 1.0) || !self.relay_advantage_db.is_finite() {
            return bad("xi_n must lie in (0, 1) and relay_advantage_db must be finite");
        }
        if self.relay_iters == 0 || self.min_bits == 0 || self.max_frame_errors == Some(0) {
            return bad("relay_iters, min_bits and max_frame_errors must be positive");
        }
        if self.w == 0 || self.v == 0 {
            return bad("w and v must be positive");
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = RunConfig::default();
        assert_eq!(RunConfig::parse_text(&c.to_text()).unwrap().to_text(), c.to_text());
    }

    #[test]
    fn overrides_and_comments() {
        let c = RunConfig::parse_text("# comment\n\np_t_dbm = 20\nsweep_grid = 1, 2,3\nsigma = 37\n").unwrap();
        assert_eq!(c.p_t_dbm, 20.0);
        assert_eq!(c.sweep_grid, Some(vec![1.0, 2.0, 3.0]));
        assert_eq!(c.sigma, Some(37));
    }

    #[test]
    fn unknown_key_rejected() {
        assert_eq!(RunConfig::parse_text("p_t = 3").unwrap_err(), ConfigError::UnknownKey("p_t".into()));
    }

    #[test]
    fn malformed_lines_rejected() {
        assert!(matches!(RunConfig::parse_text("seed 4"), Err(ConfigError::Syntax { line: 1 })));
        assert!(matches!(RunConfig::parse_text("seed = x"), Err(ConfigError::Value { .. })));
        assert!(matches!(RunConfig::parse_text("seed = 1\nseed = 2"), Err(ConfigError::Duplicate { .. })));
    }

    #[test]
    fn validation_catches_bad_values() {
        assert!(RunConfig { eta: 1.5, ..RunConfig::default() }.validate().is_err());
        assert!(RunConfig { sweep_grid: Some(vec![3.0, 1.0]), ..RunConfig::default() }.validate().is_err());
        assert!(RunConfig::default().validate().is_ok());
    }

    #[test]
    fn defaults_match_the_library() {
        let (a, b) = (RunConfig::default().system(), SystemParams::default());
        let pairs = [
            (a.bandwidth_hz, b.bandwidth_hz),
            (a.noise_power_w, b.noise_power_w),
            (a.eta, b.eta),
            (a.psi_i, b.psi_i),
            (a.psi_j, b.psi_j),
            (a.p_t, b.p_t),
            (a.p_r_max, b.p_r_max),
            (a.p_c, b.p_c),
            (a.r_min, b.r_min),
        ];
        for (x, y) in pairs {
            assert!((x - y).abs() <= 1e-12 * y.abs(), "{x} vs {y}");
        }
    }

    #[test]
    fn float_values_survive_the_manifest() {
        let c = RunConfig::parse_text("p_c_w = 0.0012345678901234567\nxi_n = 0.1").unwrap();
        let back = RunConfig::parse_text(&c.to_text()).unwrap();
        assert_eq!(back.p_c_w.to_bits(), c.p_c_w.to_bits());
    }
}
