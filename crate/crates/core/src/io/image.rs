use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::{Grid2D, ScalarField};
use crate::velocity::Image;

/// Contour colour used by [`save_overlay`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OverlaySpec {
    pub color: [u8; 3],
}

impl Default for OverlaySpec {
    fn default() -> Self {
        OverlaySpec { color: [255, 0, 0] }
    }
}

/// Whitespace-separated header tokens of a netpbm file, skipping `#`
/// comments. Returns the tokens and the offset just past the single
/// whitespace byte that ends the last one.
fn netpbm_header(bytes: &[u8], count: usize, context: &str) -> Result<(Vec<String>, usize)> {
    let mut tokens = Vec::new();
    let mut i = 0;
    while tokens.len() < count {
        while i < bytes.len() && bytes[i].is_ascii_whitespace() {
            i += 1;
        }
        if i < bytes.len() && bytes[i] == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        while i < bytes.len() && !bytes[i].is_ascii_whitespace() && bytes[i] != b'#' {
            i += 1;
        }
        if start == i {
            return Err(Error::format(context, "truncated header"));
        }
        tokens.push(String::from_utf8_lossy(&bytes[start..i]).into_owned());
    }
    if (i >= bytes.len() || !bytes[i].is_ascii_whitespace())
        && (tokens[0] == "P5" || tokens[0] == "P6")
    {
        return Err(Error::format(context, "missing whitespace after header"));
    }
    Ok((tokens, (i + 1).min(bytes.len())))
}

fn header_number(tok: &str, what: &str, context: &str) -> Result<usize> {
    tok.parse::<usize>()
        .map_err(|_| Error::format(context, format!("bad {what} '{tok}' in header")))
}

fn describe_magic(bytes: &[u8]) -> String {
    let head: Vec<String> = bytes.iter().take(4).map(|b| format!("{b:02x}")).collect();
    format!(
        "unsupported image format (leading bytes {})",
        head.join(" ")
    )
}

/// Parses PGM (P2 or P5, maxval up to 65535) into intensities in `[0, 1]`.
pub fn decode_pgm(bytes: &[u8], context: &str) -> Result<Image> {
    if !(bytes.starts_with(b"P2") || bytes.starts_with(b"P5")) {
        return Err(Error::format(context, describe_magic(bytes)));
    }
    let (tok, offset) = netpbm_header(bytes, 4, context)?;
    let magic = tok[0].as_str();
    let w = header_number(&tok[1], "width", context)?;
    let h = header_number(&tok[2], "height", context)?;
    let maxval = header_number(&tok[3], "maxval", context)?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::format(
            context,
            format!("maxval {maxval} out of range"),
        ));
    }
    let grid = Grid2D::new(w, h).map_err(|e| Error::format(context, e.to_string()))?;
    let n = grid.len();
    let raw: Vec<usize> = if magic == "P2" {
        let text = String::from_utf8_lossy(&bytes[offset.min(bytes.len())..]);
        let vals: Vec<usize> = text
            .split(|c: char| c.is_ascii_whitespace())
            .filter(|t| !t.is_empty())
            .take(n)
            .map(|t| header_number(t, "sample", context))
            .collect::<Result<_>>()?;
        if vals.len() < n {
            return Err(Error::format(
                context,
                format!("expected {n} samples, found {}", vals.len()),
            ));
        }
        vals
    } else {
        let width = if maxval < 256 { 1 } else { 2 };
        let data = &bytes[offset..];
        if data.len() < n * width {
            return Err(Error::format(
                context,
                format!(
                    "truncated raster: need {} bytes, have {}",
                    n * width,
                    data.len()
                ),
            ));
        }
        if width == 1 {
            data[..n].iter().map(|b| *b as usize).collect()
        } else {
            data[..2 * n]
                .chunks_exact(2)
                .map(|c| u16::from_be_bytes([c[0], c[1]]) as usize)
                .collect()
        }
    };
    if let Some(v) = raw.iter().find(|v| **v > maxval) {
        return Err(Error::format(
            context,
            format!("sample {v} exceeds maxval {maxval}"),
        ));
    }
    let m = maxval as f64;
    Image::new(ScalarField::new(
        grid,
        raw.into_iter().map(|v| v as f64 / m).collect(),
    )?)
}

#[cfg(feature = "png")]
fn decode_png(bytes: &[u8], context: &str) -> Result<Image> {
    let decoder = png::Decoder::new(std::io::Cursor::new(bytes));
    let mut reader = decoder
        .read_info()
        .map_err(|e| Error::format(context, e.to_string()))?;
    let mut buf = vec![0; reader.output_buffer_size().unwrap_or(0)];
    let info = reader
        .next_frame(&mut buf)
        .map_err(|e| Error::format(context, e.to_string()))?;
    if info.color_type != png::ColorType::Grayscale || info.bit_depth != png::BitDepth::Eight {
        return Err(Error::format(
            context,
            format!(
                "only 8-bit grayscale PNG is supported, got {:?} {:?}",
                info.color_type, info.bit_depth
            ),
        ));
    }
    let grid = Grid2D::new(info.width as usize, info.height as usize)
        .map_err(|e| Error::format(context, e.to_string()))?;
    let vals = buf[..grid.len()]
        .iter()
        .map(|b| *b as f64 / 255.0)
        .collect();
    Image::new(ScalarField::new(grid, vals)?)
}

/// Loads a grayscale image (PGM, or 8-bit PNG with the `png` feature).
pub fn load_image(path: impl AsRef<Path>) -> Result<Image> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let context = path.display().to_string();
    if bytes.starts_with(b"P2") || bytes.starts_with(b"P5") {
        return decode_pgm(&bytes, &context);
    }
    #[cfg(feature = "png")]
    if bytes.starts_with(b"\x89PNG") {
        return decode_png(&bytes, &context);
    }
    Err(Error::format(context, describe_magic(&bytes)))
}

fn to_byte(v: f64) -> u8 {
    (v.clamp(0.0, 1.0) * 255.0).round() as u8
}

/// Writes an 8-bit binary PGM.
pub fn save_pgm(image: &Image, path: impl AsRef<Path>) -> Result<()> {
    let g = image.grid();
    let mut out = format!("P5\n{} {}\n255\n", g.width(), g.height()).into_bytes();
    out.extend(image.intensity().values().iter().map(|v| to_byte(*v)));
    let path = path.as_ref();
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Cells with a 4-neighbour on the other side of the zero level set.
pub fn contour_cells(phi: &ScalarField) -> Vec<bool> {
    let g = phi.grid();
    let (w, h) = (g.width(), g.height());
    let v = phi.values();
    let mut out = vec![false; g.len()];
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            let s = v[i] > 0.0;
            let differs = |j: usize| (v[j] > 0.0) != s;
            out[i] = (x > 0 && differs(i - 1))
                || (x + 1 < w && differs(i + 1))
                || (y > 0 && differs(i - w))
                || (y + 1 < h && differs(i + w));
        }
    }
    out
}

/// Writes a P6 PPM: the image in gray with contour cells painted.
pub fn save_overlay(
    image: &Image,
    phi: &ScalarField,
    path: impl AsRef<Path>,
    spec: &OverlaySpec,
) -> Result<()> {
    image.grid().ensure_same(phi.grid(), "overlay")?;
    let g = image.grid();
    let mut out = format!("P6\n{} {}\n255\n", g.width(), g.height()).into_bytes();
    for (v, painted) in image.intensity().values().iter().zip(contour_cells(phi)) {
        if painted {
            out.extend_from_slice(&spec.color);
        } else {
            let b = to_byte(*v);
            out.extend_from_slice(&[b, b, b]);
        }
    }
    let path = path.as_ref();
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Reads a P6 PPM with maxval 255; returns width, height and RGB triples.
pub fn load_ppm(path: impl AsRef<Path>) -> Result<(usize, usize, Vec<[u8; 3]>)> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let context = path.display().to_string();
    if !bytes.starts_with(b"P6") {
        return Err(Error::format(context, describe_magic(&bytes)));
    }
    let (tok, offset) = netpbm_header(&bytes, 4, &context)?;
    let w = header_number(&tok[1], "width", &context)?;
    let h = header_number(&tok[2], "height", &context)?;
    if tok[3] != "255" {
        return Err(Error::format(
            context,
            format!("unsupported maxval {}", tok[3]),
        ));
    }
    let data = &bytes[offset..];
    if data.len() < 3 * w * h {
        return Err(Error::format(context, "truncated raster"));
    }
    let px = data[..3 * w * h]
        .chunks_exact(3)
        .map(|c| [c[0], c[1], c[2]])
        .collect();
    Ok((w, h, px))
}
