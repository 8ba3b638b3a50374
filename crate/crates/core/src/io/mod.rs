//! File formats: PGM/PNG input, PPM overlays, plain-text fields and the
//! run configuration grammar.

mod config;
mod field;
mod image;

pub use config::{parse_config, parse_config_str, serialize_config, CONFIG_KEYS};
pub use field::{format_field, load_field, parse_field, save_field};
pub use image::{
    contour_cells, decode_pgm, load_image, load_ppm, save_overlay, save_pgm, OverlaySpec,
};
