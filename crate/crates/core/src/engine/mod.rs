//! Outer iteration: velocity, wave interval, reinitialization, convergence.

mod config;

pub use config::{BenchParams, InitContour, Model, RegularizationParams, RunConfig};

use std::time::{Duration, Instant};

use crate::error::{Error, Result};
use crate::eval::{modified_hausdorff, ContourPointSet};
use crate::field::{
    curvature, dirac_eps, make_circle_sdf, mask_to_sdf, reinitialize_sdf, zero_level_components,
    Grid2D, LevelSetState, ScalarField,
};
use crate::velocity::{
    cv_means, cv_velocity, distance_regularization, dual_mode_coefficient, edge_stopping_g,
    gac_velocity, lpf_prefit, lpf_velocity, multiphase_means, multiphase_velocities, Image,
    PrefitFunctions,
};
use crate::wave::{evolve_wave, BCoeff, WaveParams};

/// Diagnostics of one outer iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    /// Fraction of cells whose `phi > 0` status flipped.
    pub changed_fraction: f64,
    /// Connected interior components after the step.
    pub components: usize,
    /// Region means used this iteration (empty for models without them).
    pub c_values: Vec<f64>,
    /// A region mean fell back to the global image mean.
    pub degenerate: bool,
    pub max_v0: f64,
    /// Modified Hausdorff distance between the zero sets before and after
    /// the step; `None` once the contour has vanished.
    pub contour_shift: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct SegmentationResult {
    /// Last state with a zero crossing; on vanish this is the state before
    /// the step that removed the contour.
    pub final_phi: LevelSetState,
    pub iterations: usize,
    pub converged: bool,
    pub vanished: bool,
    pub history: Vec<IterationRecord>,
    pub elapsed: Duration,
}

/// True when each of the last `window` changed-cell fractions is below
/// `threshold`.
pub fn convergence_check(fractions: &[f64], window: usize, threshold: f64) -> bool {
    window >= 1
        && fractions.len() >= window
        && fractions[fractions.len() - window..]
            .iter()
            .all(|f| *f < threshold)
}

/// Initial level set for a contour spec on `grid`.
pub fn resolve_init(grid: Grid2D, init: &InitContour) -> Result<LevelSetState> {
    match init {
        InitContour::Circle { cx, cy, r } => make_circle_sdf(grid, *cx, *cy, *r),
        InitContour::MaskFile(path) => {
            let img = crate::io::load_image(path)?;
            grid.ensure_same(img.grid(), "init mask")?;
            let bits: Vec<bool> = img.intensity().values().iter().map(|v| *v > 0.5).collect();
            mask_to_sdf(grid, &bits)
        }
    }
}

fn changed_fraction(old: &ScalarField, new: &ScalarField) -> f64 {
    let flips = old
        .values()
        .iter()
        .zip(new.values())
        .filter(|(a, b)| (**a > 0.0) != (**b > 0.0))
        .count();
    flips as f64 / old.values().len() as f64
}

fn contour_shift(old: &ScalarField, new: &ScalarField) -> Option<f64> {
    let a = ContourPointSet::crossings(old);
    let b = ContourPointSet::crossings(new);
    modified_hausdorff(&a, &b).ok()
}

fn clamp_velocity(v: ScalarField, v_max: f64) -> ScalarField {
    v.map(|x| x.clamp(-v_max, v_max))
}

/// Falls back to the global mean for an empty region.
fn means_or_global<const N: usize>(means: [Option<f64>; N], image: &Image) -> ([f64; N], bool) {
    let global = image.intensity().mean();
    let degenerate = means.iter().any(Option::is_none);
    (means.map(|c| c.unwrap_or(global)), degenerate)
}

/// Per-run precomputations that stay fixed across iterations.
struct ModelSetup<'a> {
    image: &'a Image,
    config: &'a RunConfig,
    edge: Option<ScalarField>,
    prefit: Option<PrefitFunctions>,
    wave: WaveParams,
}

impl<'a> ModelSetup<'a> {
    fn new(image: &'a Image, config: &'a RunConfig) -> Result<Self> {
        config.validate()?;
        let grid = *image.grid();
        let needs_edge = matches!(config.model, Model::HmcfGac | Model::HdrfCv);
        let edge = needs_edge
            .then(|| edge_stopping_g(image, &config.edge))
            .transpose()?;
        let prefit = (config.model == Model::HmcfLpf)
            .then(|| lpf_prefit(image, config.modelp.sigma, config.modelp.resolved_window()))
            .transpose()?;
        let mut wave = config.wave.clone();
        if config.model == Model::HdrfCv {
            let g = edge.as_ref().expect("edge map computed for hdrf");
            wave.b = BCoeff::Field(dual_mode_coefficient(
                config.b(),
                g,
                config.modelp.n_threshold,
                config.reg.alpha,
            )?);
        }
        if config.model.is_hyperbolic() {
            wave.check_stability(&grid)?;
        }
        Ok(ModelSetup {
            image,
            config,
            edge,
            prefit,
            wave,
        })
    }

    /// `v0` for a single-field model, with region means and the
    /// degenerate flag.
    fn velocity(&self, phi: &LevelSetState) -> Result<(ScalarField, Vec<f64>, bool)> {
        let c = self.config;
        let eps = c.reg.epsilon;
        let (mut v, cvals, degenerate) = match c.model {
            Model::HmcfCv | Model::HdrfCv => {
                let ([c1, c2], deg) = means_or_global(cv_means(self.image, phi, eps)?, self.image);
                let v = cv_velocity(self.image, phi, c1, c2, c.modelp.lambda, eps)?;
                (v, vec![c1, c2], deg)
            }
            Model::HmcfGac => {
                let g = self.edge.as_ref().expect("edge map computed for gac");
                (gac_velocity(phi, g, c.modelp.u)?, Vec::new(), false)
            }
            Model::HmcfLpf => {
                let p = self.prefit.as_ref().expect("prefit computed for lpf");
                let v = lpf_velocity(phi, &p.e_s, &p.e_l, eps)?.scale(c.modelp.lambda);
                (v, Vec::new(), false)
            }
            Model::HmcfMultiphaseCv | Model::PmcfCvBaseline => {
                return Err(Error::invalid(format!(
                    "model {} has no single-field velocity",
                    c.model
                )))
            }
        };
        if c.modelp.gamma > 0.0 {
            let r = distance_regularization(phi.phi(), c.modelp.gamma)?;
            v = v.zip_map(&r, |a, b| a + b)?;
        }
        Ok((clamp_velocity(v, c.resolved_v_max()), cvals, degenerate))
    }
}

/// One wave interval followed by the optional reinitialization. Returns the
/// new state and whether the contour vanished.
fn advance(
    phi: &LevelSetState,
    v0: &ScalarField,
    wave: &WaveParams,
    reinit: bool,
) -> Result<(LevelSetState, bool)> {
    let out = evolve_wave(phi, v0, wave)?;
    if !out.phi.is_finite() {
        return Err(Error::invalid("wave step produced non-finite values"));
    }
    let next = LevelSetState::new(out.phi);
    if next.is_vanished() {
        return Ok((next, true));
    }
    if reinit {
        Ok((reinitialize_sdf(&next)?, false))
    } else {
        Ok((next, false))
    }
}

fn record(
    old: &ScalarField,
    new: &LevelSetState,
    vanished: bool,
    c_values: Vec<f64>,
    degenerate: bool,
    max_v0: f64,
) -> IterationRecord {
    IterationRecord {
        changed_fraction: changed_fraction(old, new.phi()),
        components: zero_level_components(new.phi()).count(),
        c_values,
        degenerate,
        max_v0,
        contour_shift: if vanished {
            None
        } else {
            contour_shift(old, new.phi())
        },
    }
}

fn initial_state(image: &Image, init: Option<&InitContour>, which: &str) -> Result<LevelSetState> {
    let init = init.ok_or_else(|| Error::invalid(format!("{which} contour is not configured")))?;
    resolve_init(*image.grid(), init)
}

/// Runs the configured single-field model from `config.init`.
pub fn segment(image: &Image, config: &RunConfig) -> Result<SegmentationResult> {
    let phi0 = initial_state(image, config.init.as_ref(), "init")?;
    segment_from(image, config, phi0)
}

/// Runs the configured single-field model from an explicit initial level set.
pub fn segment_from(
    image: &Image,
    config: &RunConfig,
    phi0: LevelSetState,
) -> Result<SegmentationResult> {
    image.grid().ensure_same(phi0.grid(), "initial level set")?;
    if config.model == Model::PmcfCvBaseline {
        return pmcf_loop(image, config, phi0);
    }
    let start = Instant::now();
    let setup = ModelSetup::new(image, config)?;
    let mut phi = if phi0.is_sdf() {
        phi0
    } else {
        reinitialize_sdf(&phi0)?
    };
    let mut history = Vec::new();
    let mut fractions = Vec::new();
    let (mut converged, mut vanished) = (false, false);

    for k in 0..config.max_iters {
        let (v0, cvals, degenerate) = setup.velocity(&phi)?;
        let max_v0 = v0.max_abs();
        let (next, gone) = advance(&phi, &v0, &setup.wave, k % config.reinit_every == 0)?;
        let rec = record(phi.phi(), &next, gone, cvals, degenerate, max_v0);
        fractions.push(rec.changed_fraction);
        history.push(rec);
        if gone {
            vanished = true;
            break;
        }
        phi = next;
        if convergence_check(&fractions, config.conv_window, config.conv_threshold) {
            converged = true;
            break;
        }
    }
    Ok(SegmentationResult {
        final_phi: phi,
        iterations: history.len(),
        converged,
        vanished,
        history,
        elapsed: start.elapsed(),
    })
}

/// Coupled two-field four-phase model from `config.init` and `config.init2`.
pub fn segment_multiphase(
    image: &Image,
    config: &RunConfig,
) -> Result<(SegmentationResult, SegmentationResult)> {
    let a = initial_state(image, config.init.as_ref(), "init")?;
    let b = initial_state(image, config.init2.as_ref(), "init2")?;
    segment_multiphase_from(image, config, a, b)
}

pub fn segment_multiphase_from(
    image: &Image,
    config: &RunConfig,
    phi1: LevelSetState,
    phi2: LevelSetState,
) -> Result<(SegmentationResult, SegmentationResult)> {
    config.validate()?;
    image.grid().ensure_same(phi1.grid(), "phi1")?;
    image.grid().ensure_same(phi2.grid(), "phi2")?;
    config.wave.check_stability(image.grid())?;
    let start = Instant::now();
    let eps = config.reg.epsilon;
    let lambda = config.modelp.lambda;
    let v_max = config.resolved_v_max();
    let sdf = |p: LevelSetState| {
        if p.is_sdf() {
            Ok(p)
        } else {
            reinitialize_sdf(&p)
        }
    };
    let (mut p1, mut p2) = (sdf(phi1)?, sdf(phi2)?);
    let (mut h1, mut h2) = (Vec::new(), Vec::new());
    let (mut f1, mut f2) = (Vec::new(), Vec::new());
    let (mut converged, mut vanished) = (false, false);

    for k in 0..config.max_iters {
        let (c, degenerate) = means_or_global(multiphase_means(image, &p1, &p2, eps)?, image);
        let (mut v1, mut v2) = multiphase_velocities(image, &p1, &p2, c, lambda, eps)?;
        if config.modelp.gamma > 0.0 {
            let r1 = distance_regularization(p1.phi(), config.modelp.gamma)?;
            let r2 = distance_regularization(p2.phi(), config.modelp.gamma)?;
            v1 = v1.zip_map(&r1, |a, b| a + b)?;
            v2 = v2.zip_map(&r2, |a, b| a + b)?;
        }
        let (v1, v2) = (clamp_velocity(v1, v_max), clamp_velocity(v2, v_max));
        let reinit = k % config.reinit_every == 0;
        let (n1, g1) = advance(&p1, &v1, &config.wave, reinit)?;
        let (n2, g2) = advance(&p2, &v2, &config.wave, reinit)?;
        let r1 = record(p1.phi(), &n1, g1, c.to_vec(), degenerate, v1.max_abs());
        let r2 = record(p2.phi(), &n2, g2, c.to_vec(), degenerate, v2.max_abs());
        f1.push(r1.changed_fraction);
        f2.push(r2.changed_fraction);
        h1.push(r1);
        h2.push(r2);
        if g1 || g2 {
            vanished = true;
            break;
        }
        p1 = n1;
        p2 = n2;
        if convergence_check(&f1, config.conv_window, config.conv_threshold)
            && convergence_check(&f2, config.conv_window, config.conv_threshold)
        {
            converged = true;
            break;
        }
    }
    let elapsed = start.elapsed();
    let wrap = |phi, history: Vec<IterationRecord>| SegmentationResult {
        final_phi: phi,
        iterations: history.len(),
        converged,
        vanished,
        history,
        elapsed,
    };
    Ok((wrap(p1, h1), wrap(p2, h2)))
}

/// Substeps of the explicit parabolic baseline:
/// `tau_p * (mu + gamma) <= 0.25 h^2`.
pub fn pmcf_substeps(config: &RunConfig, grid: &Grid2D) -> usize {
    let h2 = grid.spacing() * grid.spacing();
    let stiff = config.modelp.mu + config.modelp.gamma;
    ((config.wave.tau * stiff / (0.25 * h2)).ceil() as usize).max(1)
}

/// Explicit-Euler gradient descent of the two-phase region model with
/// `mu`-weighted curvature, used as the parabolic reference.
pub fn segment_pmcf_baseline(image: &Image, config: &RunConfig) -> Result<SegmentationResult> {
    let phi0 = initial_state(image, config.init.as_ref(), "init")?;
    pmcf_loop(image, config, phi0)
}

fn pmcf_loop(image: &Image, config: &RunConfig, phi0: LevelSetState) -> Result<SegmentationResult> {
    config.validate()?;
    let start = Instant::now();
    let grid = *image.grid();
    let eps = config.reg.epsilon;
    let (mu, lambda, gamma) = (config.modelp.mu, config.modelp.lambda, config.modelp.gamma);
    let steps = pmcf_substeps(config, &grid);
    let tp = config.wave.tau / steps as f64;
    let img = image.intensity().values();

    let mut phi = if phi0.is_sdf() {
        phi0
    } else {
        reinitialize_sdf(&phi0)?
    };
    let mut history = Vec::new();
    let mut fractions = Vec::new();
    let (mut converged, mut vanished) = (false, false);

    for k in 0..config.max_iters {
        let old = phi.phi().clone();
        let mut cur = phi.clone();
        let (mut cvals, mut degenerate, mut max_rate) = (Vec::new(), false, 0.0f64);
        for _ in 0..steps {
            let ([c1, c2], deg) = means_or_global(cv_means(image, &cur, eps)?, image);
            degenerate |= deg;
            cvals = vec![c1, c2];
            // curvature() is -div(grad phi / |grad phi|).
            let kappa = curvature(cur.phi());
            let delta = dirac_eps(cur.phi(), eps)?;
            let reg = distance_regularization(cur.phi(), gamma)?;
            let mut vals = cur.phi().values().to_vec();
            for (j, p) in vals.iter_mut().enumerate() {
                let i = img[j];
                let data = lambda * ((i - c2) * (i - c2) - (i - c1) * (i - c1));
                let rate = delta.values()[j] * (-mu * kappa.values()[j] + data) + reg.values()[j];
                max_rate = max_rate.max(rate.abs());
                *p += tp * rate;
            }
            cur = LevelSetState::new(ScalarField::new(grid, vals)?);
        }
        let gone = cur.is_vanished();
        let next = if !gone && k % config.reinit_every == 0 {
            reinitialize_sdf(&cur)?
        } else {
            cur
        };
        let rec = record(&old, &next, gone, cvals, degenerate, max_rate);
        fractions.push(rec.changed_fraction);
        history.push(rec);
        if gone {
            vanished = true;
            break;
        }
        phi = next;
        if convergence_check(&fractions, config.conv_window, config.conv_threshold) {
            converged = true;
            break;
        }
    }
    Ok(SegmentationResult {
        final_phi: phi,
        iterations: history.len(),
        converged,
        vanished,
        history,
        elapsed: start.elapsed(),
    })
}

/// Pure curvature-driven evolution (`v0 = 0`) for `iters` intervals.
/// `on_iter` sees the state after every interval; evolution stops early if
/// the contour vanishes.
pub fn curvature_flow(
    phi0: LevelSetState,
    wave: &WaveParams,
    iters: usize,
    reinit_every: usize,
    mut on_iter: impl FnMut(usize, &LevelSetState),
) -> Result<LevelSetState> {
    if reinit_every == 0 {
        return Err(Error::invalid("reinit_every must be >= 1"));
    }
    wave.check_stability(phi0.grid())?;
    let zero = ScalarField::zeros(*phi0.grid());
    let mut phi = if phi0.is_sdf() {
        phi0
    } else {
        reinitialize_sdf(&phi0)?
    };
    for k in 0..iters {
        let (next, gone) = advance(&phi, &zero, wave, k % reinit_every == 0)?;
        phi = next;
        on_iter(k + 1, &phi);
        if gone {
            break;
        }
    }
    Ok(phi)
}
