use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::engine::{InitContour, RunConfig};
use crate::error::{Error, Result};
use crate::wave::BCoeff;

/// Every key accepted in a config file.
pub const CONFIG_KEYS: &[&str] = &[
    "model",
    "wave.b",
    "wave.tau",
    "wave.eta",
    "wave.substeps",
    "modelp.lambda",
    "modelp.mu",
    "modelp.gamma",
    "modelp.u",
    "modelp.sigma",
    "modelp.n_threshold",
    "modelp.window",
    "reg.epsilon",
    "reg.alpha",
    "edge.sigma_g",
    "edge.amplitude",
    "edge.exponent",
    "reinit_every",
    "max_iters",
    "conv_window",
    "conv_threshold",
    "init.circle",
    "init.mask",
    "init2.circle",
    "init2.mask",
    "v_max",
    "allow_vanish",
    "seed",
    "bench.size",
    "bench.gaussian",
    "bench.salt_pepper",
    "bench.speckle",
    "bench.periodic",
    "bench.b_list",
    "bench.mu_list",
];

fn err(line: usize, message: impl Into<String>) -> Error {
    Error::Config {
        line,
        message: message.into(),
    }
}

fn real(line: usize, key: &str, v: &str) -> Result<f64> {
    let x: f64 = v
        .parse()
        .map_err(|_| err(line, format!("{key}: '{v}' is not a number")))?;
    if !x.is_finite() {
        return Err(err(line, format!("{key}: value must be finite")));
    }
    Ok(x)
}

fn positive(line: usize, key: &str, v: &str) -> Result<f64> {
    let x = real(line, key, v)?;
    if x <= 0.0 {
        return Err(err(line, format!("{key}: must be > 0, got {x}")));
    }
    Ok(x)
}

fn non_negative(line: usize, key: &str, v: &str) -> Result<f64> {
    let x = real(line, key, v)?;
    if x < 0.0 {
        return Err(err(line, format!("{key}: must be >= 0, got {x}")));
    }
    Ok(x)
}

fn count(line: usize, key: &str, v: &str) -> Result<usize> {
    let n: usize = v
        .parse()
        .map_err(|_| err(line, format!("{key}: '{v}' is not a non-negative integer")))?;
    if n == 0 {
        return Err(err(line, format!("{key}: must be >= 1")));
    }
    Ok(n)
}

fn list(line: usize, key: &str, v: &str) -> Result<Vec<f64>> {
    let xs = v
        .split(',')
        .map(|t| positive(line, key, t.trim()))
        .collect::<Result<Vec<_>>>()?;
    if xs.windows(2).any(|w| w[1] < w[0]) {
        return Err(err(line, format!("{key}: list must be sorted ascending")));
    }
    Ok(xs)
}

fn circle(line: usize, key: &str, v: &str) -> Result<InitContour> {
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(err(line, format!("{key}: expected cx,cy,r")));
    }
    Ok(InitContour::Circle {
        cx: real(line, key, parts[0])?,
        cy: real(line, key, parts[1])?,
        r: positive(line, key, parts[2])?,
    })
}

fn auto_or<T>(v: &str, f: impl FnOnce(&str) -> Result<T>) -> Result<Option<T>> {
    if v == "auto" {
        Ok(None)
    } else {
        f(v).map(Some)
    }
}

fn apply(cfg: &mut RunConfig, line: usize, key: &str, v: &str) -> Result<()> {
    match key {
        "model" => cfg.model = v.parse().map_err(|e: Error| err(line, e.to_string()))?,
        "wave.b" => cfg.wave.b = BCoeff::Scalar(positive(line, key, v)?),
        "wave.tau" => cfg.wave.tau = positive(line, key, v)?,
        "wave.eta" => {
            let eta = real(line, key, v)?;
            if !(0.5..=1.0).contains(&eta) {
                return Err(err(line, format!("wave.eta: {eta} outside [0.5, 1]")));
            }
            cfg.wave.eta = eta;
        }
        "wave.substeps" => cfg.wave.substeps = auto_or(v, |s| count(line, key, s))?,
        "modelp.lambda" => cfg.modelp.lambda = positive(line, key, v)?,
        "modelp.mu" => cfg.modelp.mu = non_negative(line, key, v)?,
        "modelp.gamma" => cfg.modelp.gamma = non_negative(line, key, v)?,
        "modelp.u" => cfg.modelp.u = non_negative(line, key, v)?,
        "modelp.sigma" => cfg.modelp.sigma = positive(line, key, v)?,
        "modelp.n_threshold" => {
            let n = real(line, key, v)?;
            if !(n > 0.0 && n < 1.0) {
                return Err(err(line, format!("modelp.n_threshold: {n} outside (0, 1)")));
            }
            cfg.modelp.n_threshold = n;
        }
        "modelp.window" => {
            cfg.modelp.window = auto_or(v, |s| {
                let w = count(line, key, s)?;
                if w < 3 || w % 2 == 0 {
                    return Err(err(
                        line,
                        format!("modelp.window: {w} must be odd and >= 3"),
                    ));
                }
                Ok(w)
            })?
        }
        "reg.epsilon" => cfg.reg.epsilon = positive(line, key, v)?,
        "reg.alpha" => cfg.reg.alpha = positive(line, key, v)?,
        "edge.sigma_g" => cfg.edge.sigma_g = positive(line, key, v)?,
        "edge.amplitude" => cfg.edge.amplitude = positive(line, key, v)?,
        "edge.exponent" => cfg.edge.exponent = positive(line, key, v)?,
        "reinit_every" => cfg.reinit_every = count(line, key, v)?,
        "max_iters" => cfg.max_iters = count(line, key, v)?,
        "conv_window" => cfg.conv_window = count(line, key, v)?,
        "conv_threshold" => cfg.conv_threshold = non_negative(line, key, v)?,
        "init.circle" => cfg.init = Some(circle(line, key, v)?),
        "init.mask" => cfg.init = Some(InitContour::MaskFile(PathBuf::from(v))),
        "init2.circle" => cfg.init2 = Some(circle(line, key, v)?),
        "init2.mask" => cfg.init2 = Some(InitContour::MaskFile(PathBuf::from(v))),
        "v_max" => cfg.v_max = auto_or(v, |s| positive(line, key, s))?,
        "allow_vanish" => {
            cfg.allow_vanish = match v {
                "true" => true,
                "false" => false,
                _ => {
                    return Err(err(
                        line,
                        format!("allow_vanish: expected true or false, got '{v}'"),
                    ))
                }
            }
        }
        "seed" => {
            cfg.seed = v
                .parse()
                .map_err(|_| err(line, format!("seed: '{v}' is not an unsigned integer")))?
        }
        "bench.size" => cfg.bench.size = count(line, key, v)?,
        "bench.gaussian" => cfg.bench.gaussian = non_negative(line, key, v)?,
        "bench.salt_pepper" => {
            let d = non_negative(line, key, v)?;
            if d > 1.0 {
                return Err(err(line, "bench.salt_pepper: density must be <= 1"));
            }
            cfg.bench.salt_pepper = d;
        }
        "bench.speckle" => cfg.bench.speckle = non_negative(line, key, v)?,
        "bench.periodic" => cfg.bench.periodic = non_negative(line, key, v)?,
        "bench.b_list" => cfg.bench.b_list = list(line, key, v)?,
        "bench.mu_list" => cfg.bench.mu_list = list(line, key, v)?,
        _ => return Err(err(line, format!("unknown key '{key}'"))),
    }
    Ok(())
}

/// Parses the `key = value` grammar. Lines are numbered from 1; a missing
/// `model` key is reported at line 0.
pub fn parse_config_str(text: &str) -> Result<RunConfig> {
    let mut cfg = RunConfig::default();
    let mut seen = HashSet::new();
    let mut model_seen = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| err(line, format!("expected 'key = value', got '{content}'")))?;
        let (key, value) = (key.trim(), value.trim());
        if value.is_empty() {
            return Err(err(line, format!("{key}: missing value")));
        }
        if !CONFIG_KEYS.contains(&key) {
            return Err(err(line, format!("unknown key '{key}'")));
        }
        // init.circle and init.mask set the same contour.
        let slot = key
            .replace(".circle", ".contour")
            .replace(".mask", ".contour");
        if !seen.insert(slot) {
            return Err(err(line, format!("duplicate key '{key}'")));
        }
        apply(&mut cfg, line, key, value)?;
        model_seen |= key == "model";
    }
    if !model_seen {
        return Err(err(0, "missing required key 'model'"));
    }
    cfg.validate().map_err(|e| err(0, e.to_string()))?;
    Ok(cfg)
}

/// Reads a config file. Relative `init.mask` paths are resolved against the
/// file's directory.
pub fn parse_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut cfg = parse_config_str(&text)?;
    let base = path.parent().unwrap_or(Path::new(""));
    for init in [&mut cfg.init, &mut cfg.init2] {
        if let Some(InitContour::MaskFile(p)) = init {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
    }
    Ok(cfg)
}

fn join(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn contour_line(out: &mut String, prefix: &str, c: &Option<InitContour>) {
    match c {
        Some(InitContour::Circle { cx, cy, r }) => {
            let _ = writeln!(out, "{prefix}.circle = {cx},{cy},{r}");
        }
        Some(InitContour::MaskFile(p)) => {
            let _ = writeln!(out, "{prefix}.mask = {}", p.display());
        }
        None => {}
    }
}

/// Writes every setting in the config grammar. A per-cell `b` is written as
/// its maximum.
pub fn serialize_config(cfg: &RunConfig) -> String {
    let mut s = String::new();
    let opt = |v: Option<String>| v.unwrap_or_else(|| "auto".into());
    let _ = writeln!(s, "model = {}", cfg.model);
    let _ = writeln!(s, "wave.b = {}", cfg.b());
    let _ = writeln!(s, "wave.tau = {}", cfg.wave.tau);
    let _ = writeln!(s, "wave.eta = {}", cfg.wave.eta);
    let _ = writeln!(
        s,
        "wave.substeps = {}",
        opt(cfg.wave.substeps.map(|n| n.to_string()))
    );
    let m = &cfg.modelp;
    let _ = writeln!(s, "modelp.lambda = {}", m.lambda);
    let _ = writeln!(s, "modelp.mu = {}", m.mu);
    let _ = writeln!(s, "modelp.gamma = {}", m.gamma);
    let _ = writeln!(s, "modelp.u = {}", m.u);
    let _ = writeln!(s, "modelp.sigma = {}", m.sigma);
    let _ = writeln!(s, "modelp.n_threshold = {}", m.n_threshold);
    let _ = writeln!(
        s,
        "modelp.window = {}",
        opt(m.window.map(|n| n.to_string()))
    );
    let _ = writeln!(s, "reg.epsilon = {}", cfg.reg.epsilon);
    let _ = writeln!(s, "reg.alpha = {}", cfg.reg.alpha);
    let _ = writeln!(s, "edge.sigma_g = {}", cfg.edge.sigma_g);
    let _ = writeln!(s, "edge.amplitude = {}", cfg.edge.amplitude);
    let _ = writeln!(s, "edge.exponent = {}", cfg.edge.exponent);
    let _ = writeln!(s, "reinit_every = {}", cfg.reinit_every);
    let _ = writeln!(s, "max_iters = {}", cfg.max_iters);
    let _ = writeln!(s, "conv_window = {}", cfg.conv_window);
    let _ = writeln!(s, "conv_threshold = {}", cfg.conv_threshold);
    contour_line(&mut s, "init", &cfg.init);
    contour_line(&mut s, "init2", &cfg.init2);
    let _ = writeln!(s, "v_max = {}", opt(cfg.v_max.map(|v| v.to_string())));
    let _ = writeln!(s, "allow_vanish = {}", cfg.allow_vanish);
    let _ = writeln!(s, "seed = {}", cfg.seed);
    let b = &cfg.bench;
    let _ = writeln!(s, "bench.size = {}", b.size);
    let _ = writeln!(s, "bench.gaussian = {}", b.gaussian);
    let _ = writeln!(s, "bench.salt_pepper = {}", b.salt_pepper);
    let _ = writeln!(s, "bench.speckle = {}", b.speckle);
    let _ = writeln!(s, "bench.periodic = {}", b.periodic);
    let _ = writeln!(s, "bench.b_list = {}", join(&b.b_list));
    let _ = writeln!(s, "bench.mu_list = {}", join(&b.mu_list));
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::Model;

    #[test]
    fn minimal_config_fills_defaults() {
        let cfg =
            parse_config_str("model = hmcf-cv\nwave.b = 50\ninit.circle = 50,50,30\n").unwrap();
        assert_eq!(cfg.model, Model::HmcfCv);
        assert_eq!(cfg.b(), 50.0);
        assert_eq!(cfg.wave.tau, 0.1);
        assert_eq!(cfg.wave.eta, 0.7);
        assert_eq!(cfg.reg.epsilon, 1.0);
        assert_eq!(cfg.reg.alpha, 0.2);
        assert_eq!(
            cfg.init,
            Some(InitContour::Circle {
                cx: 50.0,
                cy: 50.0,
                r: 30.0
            })
        );
    }

    fn line_of(text: &str) -> usize {
        match parse_config_str(text) {
            Err(Error::Config { line, .. }) => line,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn errors_carry_line_numbers() {
        assert_eq!(line_of("model = hmcf-cv\n# c\nwave.eta = 1.5\n"), 3);
        assert_eq!(
            line_of("model = hmcf-cv\nwave.tau = 0.1\nwave.tau = 0.2\n"),
            3
        );
        assert_eq!(line_of("model = hmcf-cv\nwave.bogus = 1\n"), 2);
        assert_eq!(line_of("model = hmcf-cv\nwave.b = fifty\n"), 2);
        assert_eq!(line_of("wave.b = 50\n"), 0);
        assert_eq!(
            line_of("model = hmcf-cv\ninit.circle = 1,2,3\ninit.mask = m.pgm\n"),
            3
        );
        assert_eq!(line_of("model = nope\n"), 1);
        assert_eq!(line_of("model hmcf-cv\n"), 1);
    }

    #[test]
    fn comments_and_blank_lines() {
        let cfg =
            parse_config_str("\n# header\nmodel = hdrf-cv   # trailing\n\nseed = 7\n").unwrap();
        assert_eq!(cfg.model, Model::HdrfCv);
        assert_eq!(cfg.seed, 7);
    }

    #[test]
    fn serialize_round_trips() {
        let mut cfg = RunConfig::new(Model::HmcfLpf);
        cfg.wave.b = BCoeff::Scalar(12.5);
        cfg.wave.substeps = Some(6);
        cfg.modelp.window = Some(9);
        cfg.v_max = Some(3.25);
        cfg.init = Some(InitContour::MaskFile("a/b.pgm".into()));
        cfg.init2 = Some(InitContour::Circle {
            cx: 1.5,
            cy: 2.0,
            r: 0.1 + 0.2,
        });
        cfg.bench.b_list = vec![0.1, 1.0 / 3.0];
        let back = parse_config_str(&serialize_config(&cfg)).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(
            parse_config_str(&serialize_config(&RunConfig::default())).unwrap(),
            RunConfig::default()
        );
    }
}
