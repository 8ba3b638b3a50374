use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{Grid2D, ScalarField};

/// Plain-text matrix: `width height` on the first line, then one row per
/// line. Values are written with 17 significant digits, which round-trips
/// every `f64` exactly.
pub fn format_field(field: &ScalarField) -> String {
    let g = field.grid();
    let mut s = String::with_capacity(g.len() * 24 + 16);
    let _ = writeln!(s, "{} {}", g.width(), g.height());
    for row in field.values().chunks(g.width()) {
        let line: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    s
}

pub fn parse_field(text: &str, context: &str) -> Result<ScalarField> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines
        .next()
        .ok_or_else(|| Error::format(context, "empty field file"))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(Error::format(context, format!("bad header '{header}'")));
    }
    let parse_dim = |t: &str| {
        t.parse::<usize>()
            .map_err(|_| Error::format(context, format!("bad dimension '{t}'")))
    };
    let (w, h) = (parse_dim(dims[0])?, parse_dim(dims[1])?);
    let grid = Grid2D::new(w, h).map_err(|e| Error::format(context, e.to_string()))?;
    let mut values = Vec::with_capacity(grid.len());
    let mut rows = 0;
    for (r, line) in lines.enumerate() {
        let row: Vec<f64> = line
            .split_whitespace()
            .map(|t| {
                t.parse::<f64>()
                    .map_err(|_| Error::format(context, format!("bad value '{t}' in row {r}")))
            })
            .collect::<Result<_>>()?;
        if row.len() != w {
            return Err(Error::format(
                context,
                format!("row {r} has {} values, expected {w}", row.len()),
            ));
        }
        values.extend(row);
        rows += 1;
    }
    if rows != h {
        return Err(Error::format(
            context,
            format!("found {rows} rows, expected {h}"),
        ));
    }
    ScalarField::new(grid, values).map_err(|e| Error::format(context, e.to_string()))
}

pub fn save_field(field: &ScalarField, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, format_field(field)).map_err(|e| Error::io(path, e))
}

pub fn load_field(path: impl AsRef<Path>) -> Result<ScalarField> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_field(&text, &path.display().to_string())
}
