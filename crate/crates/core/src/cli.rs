use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hmcf::engine::{
    curvature_flow, segment, segment_multiphase, IterationRecord, Model, RunConfig,
    SegmentationResult,
};
use hmcf::eval::{
    convex_deficiency, dice, enclosed_area, make_synthetic, run_b_sweep, run_noise_benchmark,
    save_csv, BinaryMask, SyntheticKind, Truth,
};
use hmcf::field::{mask_to_sdf, reinitialize_sdf, zero_level_components, Grid2D, LevelSetState};
use hmcf::io::{load_field, load_image, parse_config, save_field, save_overlay, OverlaySpec};
use hmcf::velocity::Image;
use hmcf::wave::WaveParams;
use hmcf::{Error, Result};

pub const EXIT_USAGE: u8 = 1;
pub const EXIT_DATA: u8 = 2;
pub const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "hmcf",
    version,
    about = "Hyperbolic mean curvature flow segmentation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Segment an image; writes <prefix>_overlay.ppm, <prefix>_phi.txt and
    /// <prefix>_history.csv.
    Segment {
        /// Image file (PGM) or `synthetic:<kind>[:<size>]`.
        image: String,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_prefix: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Print the wall-clock time.
        #[arg(long)]
        timing: bool,
    },
    /// Noise-robustness benchmark on the synthetic disk.
    BenchNoise {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Fill the runtime_ms column.
        #[arg(long)]
        timing: bool,
    },
    /// Deviation from ground truth across curvature coefficients (`mu` for
    /// the parabolic baseline).
    SweepB {
        /// Image file (PGM) or `synthetic:<kind>[:<size>]`.
        image: String,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        b_list: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
        /// Ground-truth mask image; required unless the image is synthetic.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        timing: bool,
    },
    /// Pure curvature evolution of a synthetic shape with periodic snapshots.
    Demo {
        shape: DemoShape,
        #[arg(long)]
        b: f64,
        #[arg(long)]
        out_prefix: String,
        #[arg(long, default_value_t = 0.1)]
        tau: f64,
        #[arg(long, default_value_t = 100)]
        iters: usize,
        /// Snapshot interval in iterations.
        #[arg(long, default_value_t = 20)]
        every: usize,
        #[arg(long, default_value_t = 100)]
        size: usize,
        #[arg(long, default_value_t = 1)]
        reinit_every: usize,
    },
    /// Reinitialize a level-set field file to a signed distance function.
    Reinit {
        field: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DemoShape {
    Spiral,
    Star,
}

/// Exit status for a library error.
pub fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ContourVanished { .. } => EXIT_NUMERICAL,
        _ => EXIT_DATA,
    }
}

pub fn main_with_args(args: impl IntoIterator<Item = String>) -> ExitCode {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn load_config(path: &Path, seed: Option<u64>) -> Result<RunConfig> {
    let mut cfg = parse_config(path)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

/// Image plus the synthetic ground truth when the source is synthetic.
fn load_source(spec: &str) -> Result<(Image, Option<Truth>)> {
    let Some(rest) = spec.strip_prefix("synthetic:") else {
        return Ok((load_image(spec)?, None));
    };
    let (name, size) = match rest.split_once(':') {
        Some((n, s)) => {
            let size = s
                .parse::<usize>()
                .map_err(|_| Error::invalid(format!("bad synthetic size '{s}'")))?;
            (n, size)
        }
        None => (rest, 100),
    };
    let kind: SyntheticKind = name.parse()?;
    let (image, mask) = make_synthetic(kind, Grid2D::new(size, size)?)?;
    Ok((image, Some(Truth::synthetic(kind, mask)?)))
}

fn write_history(history: &[IterationRecord], path: &str) -> Result<()> {
    let fail = |e: csv::Error| Error::format(path, e.to_string());
    let mut w = csv::Writer::from_path(path).map_err(fail)?;
    w.write_record([
        "iteration",
        "changed_fraction",
        "components",
        "max_v0",
        "contour_shift",
        "degenerate",
        "c_values",
    ])
    .map_err(fail)?;
    for (k, r) in history.iter().enumerate() {
        let c: Vec<String> = r.c_values.iter().map(|v| v.to_string()).collect();
        w.write_record([
            (k + 1).to_string(),
            r.changed_fraction.to_string(),
            r.components.to_string(),
            r.max_v0.to_string(),
            r.contour_shift.map(|v| v.to_string()).unwrap_or_default(),
            r.degenerate.to_string(),
            c.join(";"),
        ])
        .map_err(fail)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

fn write_outputs(
    image: &Image,
    res: &SegmentationResult,
    prefix: &str,
    suffix: &str,
    color: [u8; 3],
) -> Result<()> {
    let phi = res.final_phi.phi();
    save_overlay(
        image,
        phi,
        format!("{prefix}_overlay{suffix}.ppm"),
        &OverlaySpec { color },
    )?;
    save_field(phi, format!("{prefix}_phi{suffix}.txt"))?;
    write_history(&res.history, &format!("{prefix}_history{suffix}.csv"))
}

fn report(res: &SegmentationResult, label: &str) {
    println!(
        "{label}iterations={} converged={} vanished={} components={}",
        res.iterations,
        res.converged,
        res.vanished,
        zero_level_components(res.final_phi.phi()).count()
    );
}

fn run_segment(
    image: &str,
    config: &Path,
    prefix: &str,
    seed: Option<u64>,
    timing: bool,
) -> Result<u8> {
    let cfg = load_config(config, seed)?;
    let (image, truth) = load_source(image)?;
    let results = if cfg.model == Model::HmcfMultiphaseCv {
        let (a, b) = segment_multiphase(&image, &cfg)?;
        write_outputs(&image, &a, prefix, "", [255, 0, 0])?;
        write_outputs(&image, &b, prefix, "2", [0, 0, 255])?;
        report(&a, "phi1 ");
        report(&b, "phi2 ");
        vec![a, b]
    } else {
        let res = segment(&image, &cfg)?;
        write_outputs(&image, &res, prefix, "", [255, 0, 0])?;
        report(&res, "");
        if let Some(t) = &truth {
            let mask = BinaryMask::from_phi(res.final_phi.phi());
            println!("dice={:.6}", dice(&mask, &t.mask)?);
        }
        vec![res]
    };
    if timing {
        println!("elapsed_ms={:.3}", results[0].elapsed.as_secs_f64() * 1e3);
    }
    if results.iter().any(|r| r.vanished) && !cfg.allow_vanish {
        eprintln!("error: contour vanished before convergence");
        return Ok(EXIT_NUMERICAL);
    }
    Ok(0)
}

fn run_demo(
    shape: DemoShape,
    b: f64,
    prefix: &str,
    tau: f64,
    iters: usize,
    every: usize,
    size: usize,
    reinit_every: usize,
) -> Result<u8> {
    if every == 0 {
        return Err(Error::invalid("--every must be >= 1"));
    }
    let kind = match shape {
        DemoShape::Spiral => SyntheticKind::Spiral,
        DemoShape::Star => SyntheticKind::Star,
    };
    let (image, mask) = make_synthetic(kind, Grid2D::new(size, size)?)?;
    let phi0 = mask_to_sdf(*mask.grid(), mask.bits())?;
    let wave = WaveParams::new(b, tau);
    let mut rows = Vec::new();
    let mut err = None;
    let mut snap = |k: usize, phi: &LevelSetState| {
        let idx = rows.len();
        let comps = zero_level_components(phi.phi()).count();
        let area = enclosed_area(phi.phi());
        let def = convex_deficiency(phi.phi());
        println!(
            "snapshot={idx:03} iteration={k} components={comps} area={area:.4} deficiency={def:.6}"
        );
        rows.push(format!("{idx},{k},{comps},{area},{def}"));
        let path = format!("{prefix}_{idx:03}.ppm");
        if let Err(e) = save_overlay(&image, phi.phi(), path, &OverlaySpec::default()) {
            err.get_or_insert(e);
        }
    };
    snap(0, &phi0);
    let mut last = 0;
    curvature_flow(phi0, &wave, iters, reinit_every, |k, phi| {
        if k % every == 0 || phi.is_vanished() {
            snap(k, phi);
            last = k;
        }
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    let path = format!("{prefix}_snapshots.csv");
    let text = format!(
        "snapshot,iteration,components,area,convex_deficiency\n{}\n",
        rows.join("\n")
    );
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    if last < iters && rows.len() > 1 {
        println!("contour vanished at iteration {last}");
    }
    Ok(0)
}

fn run(cmd: Command) -> Result<u8> {
    match cmd {
        Command::Segment {
            image,
            config,
            out_prefix,
            seed,
            timing,
        } => run_segment(&image, &config, &out_prefix, seed, timing),
        Command::BenchNoise {
            config,
            out,
            seed,
            timing,
        } => {
            let cfg = load_config(&config, seed)?;
            let rows = run_noise_benchmark(&cfg)?;
            for r in &rows {
                println!(
                    "{:<12} {:<17} dice={:.4}",
                    r.noise_kind.map(|k| k.to_string()).unwrap_or_default(),
                    r.model.as_str(),
                    r.dice
                );
            }
            save_csv(&rows, &out, timing)?;
            Ok(0)
        }
        Command::SweepB {
            image,
            config,
            b_list,
            out,
            truth,
            seed,
            timing,
        } => {
            let cfg = load_config(&config, seed)?;
            let (image, synthetic) = load_source(&image)?;
            let truth = match (synthetic, truth) {
                (_, Some(path)) => {
                    let t = load_image(&path)?;
                    Truth::from_mask(BinaryMask::new(
                        *t.grid(),
                        t.intensity().values().iter().map(|v| *v > 0.5).collect(),
                    )?)?
                }
                (Some(t), None) => t,
                (None, None) => {
                    return Err(Error::invalid(
                        "sweep-b needs ground truth: pass --truth <mask> or a synthetic image",
                    ))
                }
            };
            let rows = run_b_sweep(&image, &truth, &b_list, &cfg)?;
            for r in &rows {
                let v = r.b.or(r.mu).unwrap_or(f64::NAN);
                match r.hausdorff {
                    Some(d) => println!("{v} deviation={d:.6}"),
                    None => println!("{v} deviation=none"),
                }
            }
            save_csv(&rows, &out, timing)?;
            Ok(0)
        }
        Command::Demo {
            shape,
            b,
            out_prefix,
            tau,
            iters,
            every,
            size,
            reinit_every,
        } => run_demo(shape, b, &out_prefix, tau, iters, every, size, reinit_every),
        Command::Reinit { field, out } => {
            let phi = load_field(&field)?;
            let sdf = reinitialize_sdf(&LevelSetState::new(phi))?;
            save_field(sdf.phi(), &out)?;
            Ok(0)
        }
    }
}
