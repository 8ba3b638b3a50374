use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use super::{
    apply_noise, dice, make_synthetic, modified_hausdorff, BinaryMask, ContourPointSet, NoiseKind,
    NoiseSpec, SyntheticKind,
};
use crate::engine::{
    resolve_init, segment_from, InitContour, Model, RunConfig, SegmentationResult,
};
use crate::error::{Error, Result};
use crate::field::{mask_to_sdf, Grid2D, ScalarField};
use crate::velocity::Image;

pub const CSV_HEADER: [&str; 11] = [
    "experiment",
    "model",
    "noise_kind",
    "noise_strength",
    "b",
    "mu",
    "dice",
    "hausdorff",
    "iterations",
    "converged",
    "runtime_ms",
];

/// Spacing of the contour samples used for the deviation metric.
pub const CONTOUR_STEP: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub experiment: &'static str,
    pub model: Model,
    pub noise_kind: Option<NoiseKind>,
    pub noise_strength: Option<f64>,
    pub b: Option<f64>,
    pub mu: Option<f64>,
    pub dice: f64,
    /// Modified Hausdorff distance to the ground-truth interface; `None` if
    /// the final level set has no zero crossing.
    pub hausdorff: Option<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub runtime_ms: f64,
}

impl ExperimentRow {
    fn fields(&self, timing: bool) -> [String; 11] {
        let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
        [
            self.experiment.to_string(),
            self.model.to_string(),
            self.noise_kind.map(|k| k.to_string()).unwrap_or_default(),
            opt(self.noise_strength),
            opt(self.b),
            opt(self.mu),
            self.dice.to_string(),
            opt(self.hausdorff),
            self.iterations.to_string(),
            self.converged.to_string(),
            if timing {
                format!("{:.3}", self.runtime_ms)
            } else {
                String::new()
            },
        ]
    }
}

/// Writes rows under [`CSV_HEADER`]. Without `timing` the runtime column is
/// left empty so the output is reproducible.
pub fn write_csv<W: Write>(rows: &[ExperimentRow], out: W, timing: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let fail = |e: csv::Error| Error::format("csv", e.to_string());
    w.write_record(CSV_HEADER).map_err(fail)?;
    for r in rows {
        w.write_record(r.fields(timing)).map_err(fail)?;
    }
    w.flush().map_err(|e| Error::format("csv", e.to_string()))
}

pub fn save_csv(rows: &[ExperimentRow], path: impl AsRef<Path>, timing: bool) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv(rows, std::io::BufWriter::new(file), timing)
}

/// Ground truth of a segmentation experiment.
#[derive(Debug, Clone)]
pub struct Truth {
    pub mask: BinaryMask,
    pub contour: ContourPointSet,
}

impl Truth {
    /// Interface taken as the zero set of the mask's signed distance.
    pub fn from_mask(mask: BinaryMask) -> Result<Self> {
        let sdf = mask_to_sdf(*mask.grid(), mask.bits())?;
        let contour = ContourPointSet::dense(sdf.phi(), CONTOUR_STEP)?;
        Ok(Truth { mask, contour })
    }

    /// Analytic circle interface; the mask is kept as given.
    pub fn circle(mask: BinaryMask, cx: f64, cy: f64, r: f64) -> Self {
        let n = ((std::f64::consts::TAU * r / CONTOUR_STEP).ceil() as usize).max(8);
        Truth {
            mask,
            contour: ContourPointSet::circle(cx, cy, r, n),
        }
    }

    /// Truth of a synthetic image, analytic for the disk kinds.
    pub fn synthetic(kind: SyntheticKind, mask: BinaryMask) -> Result<Self> {
        match kind.analytic_circle(mask.grid()) {
            Some((cx, cy, r)) => Ok(Truth::circle(mask, cx, cy, r)),
            None => Truth::from_mask(mask),
        }
    }

    pub fn deviation(&self, phi: &ScalarField) -> Result<Option<f64>> {
        let c = ContourPointSet::dense(phi, CONTOUR_STEP)?;
        if c.is_empty() {
            return Ok(None);
        }
        modified_hausdorff(&c, &self.contour).map(Some)
    }
}

fn default_init(grid: &Grid2D) -> InitContour {
    let h = grid.spacing();
    let (w, ht) = (grid.width() as f64 * h, grid.height() as f64 * h);
    InitContour::Circle {
        cx: w / 2.0,
        cy: ht / 2.0,
        r: 0.3 * w.min(ht),
    }
}

/// Sets the swept parameter: `b` for hyperbolic models, `mu` for the
/// parabolic baseline.
fn with_parameter(config: &RunConfig, model: Model, value: f64) -> RunConfig {
    let mut c = config.clone();
    c.model = model;
    if model.is_hyperbolic() {
        c.wave.b = value.into();
    } else {
        c.modelp.mu = value;
    }
    c
}

fn score(
    experiment: &'static str,
    config: &RunConfig,
    res: &SegmentationResult,
    truth: &Truth,
) -> Result<ExperimentRow> {
    let phi = res.final_phi.phi();
    let mask = BinaryMask::from_phi(phi);
    let hyper = config.model.is_hyperbolic();
    Ok(ExperimentRow {
        experiment,
        model: config.model,
        noise_kind: None,
        noise_strength: None,
        b: hyper.then(|| config.b()),
        mu: (!hyper).then_some(config.modelp.mu),
        dice: dice(&mask, &truth.mask)?,
        hausdorff: truth.deviation(phi)?,
        iterations: res.iterations,
        converged: res.converged,
        runtime_ms: res.elapsed.as_secs_f64() * 1e3,
    })
}

fn run_one(
    experiment: &'static str,
    image: &Image,
    config: &RunConfig,
    truth: &Truth,
) -> Result<ExperimentRow> {
    let init = config
        .init
        .clone()
        .unwrap_or_else(|| default_init(image.grid()));
    let phi0 = resolve_init(*image.grid(), &init)?;
    let res = segment_from(image, config, phi0)?;
    score(experiment, config, &res, truth)
}

/// The models compared by the noise benchmark.
pub const NOISE_MODELS: [Model; 2] = [Model::HmcfCv, Model::PmcfCvBaseline];

/// Clean disk image and its ground truth at the benchmark size.
pub fn noise_benchmark_image(config: &RunConfig) -> Result<(Image, Truth)> {
    let n = config.bench.size;
    let grid = Grid2D::new(n, n)?;
    let (image, mask) = make_synthetic(SyntheticKind::Disk, grid)?;
    Ok((image, Truth::synthetic(SyntheticKind::Disk, mask)?))
}

/// Segments the noisy disk for every noise kind with each model. Every
/// candidate of `bench.b_list` (hyperbolic) or `bench.mu_list` (baseline)
/// is run; the row with the best Dice is kept, the earliest on ties. Rows
/// are ordered by noise kind, then model.
pub fn run_noise_benchmark(config: &RunConfig) -> Result<Vec<ExperimentRow>> {
    config.validate()?;
    let (clean, truth) = noise_benchmark_image(config)?;
    let images: Vec<(NoiseKind, f64, Image)> = NoiseKind::ALL
        .into_iter()
        .map(|kind| {
            let strength = config.bench.strength(kind);
            let spec = NoiseSpec {
                kind,
                strength,
                seed: config.seed,
            };
            Ok((kind, strength, apply_noise(&clean, &spec)?))
        })
        .collect::<Result<_>>()?;

    let mut cells = Vec::new();
    for (ki, _) in images.iter().enumerate() {
        for model in NOISE_MODELS {
            let list = if model.is_hyperbolic() {
                &config.bench.b_list
            } else {
                &config.bench.mu_list
            };
            if list.is_empty() {
                return Err(Error::invalid(format!("no candidate values for {model}")));
            }
            for v in list {
                cells.push((ki, model, *v));
            }
        }
    }
    let rows: Vec<(usize, Model, ExperimentRow)> = cells
        .par_iter()
        .map(|(ki, model, v)| {
            let (kind, strength, image) = &images[*ki];
            let c = with_parameter(config, *model, *v);
            let mut row = run_one("noise", image, &c, &truth)?;
            row.noise_kind = Some(*kind);
            row.noise_strength = Some(*strength);
            Ok((*ki, *model, row))
        })
        .collect::<Result<_>>()?;

    let mut best: Vec<ExperimentRow> = Vec::new();
    for (ki, model, row) in rows {
        let slot = best
            .iter_mut()
            .find(|r| r.model == model && r.noise_kind == Some(images[ki].0));
        match slot {
            Some(r) if row.dice > r.dice => *r = row,
            Some(_) => {}
            None => best.push(row),
        }
    }
    Ok(best)
}

/// One segmentation per value of `values` (curvature coefficient `b`, or
/// `mu` for the parabolic baseline), scored against `truth`. Values must be
/// sorted ascending.
pub fn run_b_sweep(
    image: &Image,
    truth: &Truth,
    values: &[f64],
    config: &RunConfig,
) -> Result<Vec<ExperimentRow>> {
    config.validate()?;
    if values.is_empty() {
        return Err(Error::invalid("sweep list is empty"));
    }
    if values.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(Error::invalid("sweep list must be sorted ascending"));
    }
    image
        .grid()
        .ensure_same(truth.mask.grid(), "ground truth")?;
    if config.model == Model::HmcfMultiphaseCv {
        return Err(Error::invalid(
            "the sweep supports single-field models only",
        ));
    }
    values
        .par_iter()
        .map(|v| {
            let c = with_parameter(config, config.model, *v);
            run_one("sweep-b", image, &c, truth)
        })
        .collect()
}

/// Successive differences of the sweep deviations, with a vanished contour
/// counted as missing.
pub fn deviation_increments(rows: &[ExperimentRow]) -> Option<Vec<f64>> {
    let d: Option<Vec<f64>> = rows.iter().map(|r| r.hausdorff).collect();
    d.map(|d| d.windows(2).map(|w| w[1] - w[0]).collect())
}
