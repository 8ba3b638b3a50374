use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::eval::NoiseKind;
use crate::velocity::{EdgeParams, ModelParams};
use crate::wave::{BCoeff, WaveParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Model {
    HmcfGac,
    HmcfCv,
    HdrfCv,
    HmcfMultiphaseCv,
    HmcfLpf,
    PmcfCvBaseline,
}

impl Model {
    pub const ALL: [Model; 6] = [
        Model::HmcfGac,
        Model::HmcfCv,
        Model::HdrfCv,
        Model::HmcfMultiphaseCv,
        Model::HmcfLpf,
        Model::PmcfCvBaseline,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Model::HmcfGac => "hmcf-gac",
            Model::HmcfCv => "hmcf-cv",
            Model::HdrfCv => "hdrf-cv",
            Model::HmcfMultiphaseCv => "hmcf-multiphase-cv",
            Model::HmcfLpf => "hmcf-lpf",
            Model::PmcfCvBaseline => "pmcf-cv-baseline",
        }
    }

    /// True for the models integrated with the wave system.
    pub fn is_hyperbolic(&self) -> bool {
        !matches!(self, Model::PmcfCvBaseline)
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Model {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Model::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::invalid(format!("unknown model '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularizationParams {
    pub epsilon: f64,
    pub alpha: f64,
}

impl Default for RegularizationParams {
    fn default() -> Self {
        RegularizationParams {
            epsilon: 1.0,
            alpha: 0.2,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitContour {
    /// Centre and radius in world units.
    Circle { cx: f64, cy: f64, r: f64 },
    /// Image whose bright pixels (> 0.5) mark the initial interior.
    MaskFile(PathBuf),
}

/// Settings of the noise benchmark.
#[derive(Debug, Clone, PartialEq)]
pub struct BenchParams {
    pub size: usize,
    pub gaussian: f64,
    pub salt_pepper: f64,
    pub speckle: f64,
    pub periodic: f64,
    /// Candidate curvature coefficients for the hyperbolic model; the best
    /// Dice per noise kind is reported.
    pub b_list: Vec<f64>,
    /// Candidate length weights for the parabolic baseline.
    pub mu_list: Vec<f64>,
}

impl Default for BenchParams {
    fn default() -> Self {
        BenchParams {
            size: 100,
            gaussian: 0.15,
            salt_pepper: 0.15,
            speckle: 0.3,
            periodic: 0.3,
            b_list: vec![25.0, 50.0, 100.0, 200.0, 400.0],
            mu_list: vec![0.5, 1.0, 2.0, 4.0, 8.0, 16.0],
        }
    }
}

impl BenchParams {
    pub fn strength(&self, kind: NoiseKind) -> f64 {
        match kind {
            NoiseKind::Gaussian => self.gaussian,
            NoiseKind::SaltPepper => self.salt_pepper,
            NoiseKind::Speckle => self.speckle,
            NoiseKind::Periodic => self.periodic,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: Model,
    pub wave: WaveParams,
    pub modelp: ModelParams,
    pub reg: RegularizationParams,
    pub edge: EdgeParams,
    pub reinit_every: usize,
    pub max_iters: usize,
    pub conv_window: usize,
    pub conv_threshold: f64,
    pub init: Option<InitContour>,
    /// Second contour of the coupled two-field model.
    pub init2: Option<InitContour>,
    /// Clamp for `|v0|`; `None` means `10 / tau`.
    pub v_max: Option<f64>,
    /// Treat a vanished contour as a normal outcome rather than an error.
    pub allow_vanish: bool,
    pub seed: u64,
    pub bench: BenchParams,
}

impl RunConfig {
    pub fn new(model: Model) -> Self {
        RunConfig {
            model,
            wave: WaveParams::default(),
            modelp: ModelParams::default(),
            reg: RegularizationParams::default(),
            edge: EdgeParams::default(),
            reinit_every: 1,
            max_iters: 500,
            conv_window: 5,
            conv_threshold: 1e-3,
            init: None,
            init2: None,
            v_max: None,
            allow_vanish: false,
            seed: 0,
            bench: BenchParams::default(),
        }
    }

    /// Scalar curvature coefficient `b`.
    pub fn b(&self) -> f64 {
        match &self.wave.b {
            BCoeff::Scalar(b) => *b,
            BCoeff::Field(f) => f.max(),
        }
    }

    pub fn resolved_v_max(&self) -> f64 {
        self.v_max.unwrap_or(10.0 / self.wave.tau)
    }

    /// Grid-independent checks.
    pub fn validate(&self) -> Result<()> {
        self.modelp.validate()?;
        self.edge.validate()?;
        for (name, v) in [
            ("reg.epsilon", self.reg.epsilon),
            ("reg.alpha", self.reg.alpha),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::invalid(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.wave.tau > 0.0 && self.wave.tau.is_finite()) {
            return Err(Error::invalid(format!(
                "tau must be > 0, got {}",
                self.wave.tau
            )));
        }
        if !(0.5..=1.0).contains(&self.wave.eta) {
            return Err(Error::invalid(format!(
                "eta must lie in [0.5, 1], got {}",
                self.wave.eta
            )));
        }
        for (name, v) in [
            ("reinit_every", self.reinit_every),
            ("max_iters", self.max_iters),
            ("conv_window", self.conv_window),
        ] {
            if v == 0 {
                return Err(Error::invalid(format!("{name} must be >= 1")));
            }
        }
        if !(self.conv_threshold >= 0.0) {
            return Err(Error::invalid("conv_threshold must be >= 0"));
        }
        if let Some(v) = self.v_max {
            if !(v > 0.0) {
                return Err(Error::invalid(format!("v_max must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::new(Model::HmcfCv)
    }
}
