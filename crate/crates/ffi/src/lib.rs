//! C ABI for the `hmcf` segmentation library.
//!
//! Objects are opaque handles created by `*_new`/`*_load`/`*_parse` and
//! released with the matching `*_free`. Every fallible call returns an
//! [`HmcfStatus`]; on failure [`hmcf_last_error`] describes the cause for
//! the calling thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use hmcf::engine::{segment, InitContour, Model, RunConfig, SegmentationResult};
use hmcf::eval::{dice, BinaryMask};
use hmcf::field::{reinitialize_sdf, Grid2D, LevelSetState, ScalarField};
use hmcf::io::{load_image, parse_config, parse_config_str};
use hmcf::velocity::Image;
use hmcf::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HmcfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    GridMismatch = 3,
    ContourVanished = 4,
    Stability = 5,
    Format = 6,
    Config = 7,
    Io = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

impl From<&Error> for HmcfStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidParameter(_) => HmcfStatus::InvalidArgument,
            Error::GridMismatch { .. } => HmcfStatus::GridMismatch,
            Error::ContourVanished { .. } => HmcfStatus::ContourVanished,
            Error::Stability { .. } => HmcfStatus::Stability,
            Error::Format { .. } => HmcfStatus::Format,
            Error::Config { .. } => HmcfStatus::Config,
            Error::Io { .. } => HmcfStatus::Io,
        }
    }
}

/// Grayscale image with intensities in `[0, 1]`.
pub struct HmcfImage(Image);

/// Run configuration.
pub struct HmcfConfig(RunConfig);

/// Outcome of a segmentation run.
pub struct HmcfResult(SegmentationResult);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(e: Error) -> HmcfStatus {
    let status = HmcfStatus::from(&e);
    set_error(e.to_string());
    status
}

fn guard(f: impl FnOnce() -> HmcfStatus) -> HmcfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(s) => s,
        Err(_) => {
            set_error("internal panic");
            HmcfStatus::Panic
        }
    }
}

fn null(what: &str) -> HmcfStatus {
    set_error(format!("{what} is null"));
    HmcfStatus::NullPointer
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, HmcfStatus> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| {
        set_error(format!("{what} is not valid UTF-8"));
        HmcfStatus::InvalidArgument
    })
}

fn boxed<T>(out: *mut *mut T, value: T) -> HmcfStatus {
    unsafe { *out = Box::into_raw(Box::new(value)) };
    HmcfStatus::Ok
}

macro_rules! try_status {
    ($e:expr) => {
        match $e {
            Ok(v) => v,
            Err(s) => return s,
        }
    };
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn hmcf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn hmcf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies `width * height` row-major intensities into a new image.
///
/// # Safety
/// `data` must point to `width * height` readable doubles and `out` must be
/// writable.
#[no_mangle]
pub unsafe extern "C" fn hmcf_image_new(
    width: usize,
    height: usize,
    data: *const f64,
    out: *mut *mut HmcfImage,
) -> HmcfStatus {
    guard(|| {
        if data.is_null() {
            return null("data");
        }
        if out.is_null() {
            return null("out");
        }
        let grid = try_status!(Grid2D::new(width, height).map_err(fail));
        let vals = std::slice::from_raw_parts(data, grid.len()).to_vec();
        let field = try_status!(ScalarField::new(grid, vals).map_err(fail));
        let img = try_status!(Image::new(field).map_err(fail));
        boxed(out, HmcfImage(img))
    })
}

/// Loads a PGM image.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hmcf_image_load(
    path: *const c_char,
    out: *mut *mut HmcfImage,
) -> HmcfStatus {
    guard(|| {
        let path = try_status!(str_arg(path, "path"));
        if out.is_null() {
            return null("out");
        }
        let img = try_status!(load_image(path).map_err(fail));
        boxed(out, HmcfImage(img))
    })
}

/// # Safety
/// `image` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hmcf_image_free(image: *mut HmcfImage) {
    if !image.is_null() {
        drop(Box::from_raw(image));
    }
}

/// Default configuration for a model name such as `"hmcf-cv"`.
///
/// # Safety
/// `model` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hmcf_config_new(
    model: *const c_char,
    out: *mut *mut HmcfConfig,
) -> HmcfStatus {
    guard(|| {
        let name = try_status!(str_arg(model, "model"));
        if out.is_null() {
            return null("out");
        }
        let model: Model = try_status!(name.parse().map_err(fail));
        boxed(out, HmcfConfig(RunConfig::new(model)))
    })
}

/// Parses configuration text in the `key = value` grammar.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hmcf_config_parse(
    text: *const c_char,
    out: *mut *mut HmcfConfig,
) -> HmcfStatus {
    guard(|| {
        let text = try_status!(str_arg(text, "text"));
        if out.is_null() {
            return null("out");
        }
        let cfg = try_status!(parse_config_str(text).map_err(fail));
        boxed(out, HmcfConfig(cfg))
    })
}

/// Reads a configuration file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hmcf_config_load(
    path: *const c_char,
    out: *mut *mut HmcfConfig,
) -> HmcfStatus {
    guard(|| {
        let path = try_status!(str_arg(path, "path"));
        if out.is_null() {
            return null("out");
        }
        let cfg = try_status!(parse_config(path).map_err(fail));
        boxed(out, HmcfConfig(cfg))
    })
}

/// Sets the initial contour to a circle in world units.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hmcf_config_set_init_circle(
    config: *mut HmcfConfig,
    cx: f64,
    cy: f64,
    r: f64,
) -> HmcfStatus {
    guard(|| {
        let Some(cfg) = config.as_mut() else {
            return null("config");
        };
        if !(r > 0.0 && cx.is_finite() && cy.is_finite() && r.is_finite()) {
            set_error(format!("invalid circle {cx},{cy},{r}"));
            return HmcfStatus::InvalidArgument;
        }
        cfg.0.init = Some(InitContour::Circle { cx, cy, r });
        HmcfStatus::Ok
    })
}

/// Sets the scalar curvature coefficient `b`.
///
/// # Safety
/// `config` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hmcf_config_set_b(config: *mut HmcfConfig, b: f64) -> HmcfStatus {
    guard(|| {
        let Some(cfg) = config.as_mut() else {
            return null("config");
        };
        if !(b > 0.0 && b.is_finite()) {
            set_error(format!("b must be > 0, got {b}"));
            return HmcfStatus::InvalidArgument;
        }
        cfg.0.wave.b = b.into();
        HmcfStatus::Ok
    })
}

/// # Safety
/// `config` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hmcf_config_free(config: *mut HmcfConfig) {
    if !config.is_null() {
        drop(Box::from_raw(config));
    }
}

/// Runs a single-field model. A vanished contour is reported through
/// [`hmcf_result_vanished`], not as an error.
///
/// # Safety
/// `image` and `config` must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hmcf_segment(
    image: *const HmcfImage,
    config: *const HmcfConfig,
    out: *mut *mut HmcfResult,
) -> HmcfStatus {
    guard(|| {
        let Some(img) = image.as_ref() else {
            return null("image");
        };
        let Some(cfg) = config.as_ref() else {
            return null("config");
        };
        if out.is_null() {
            return null("out");
        }
        if cfg.0.model == Model::HmcfMultiphaseCv {
            set_error("the two-field model is not available through this call");
            return HmcfStatus::InvalidArgument;
        }
        let res = try_status!(segment(&img.0, &cfg.0).map_err(fail));
        boxed(out, HmcfResult(res))
    })
}

/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hmcf_result_iterations(result: *const HmcfResult) -> usize {
    result.as_ref().map_or(0, |r| r.0.iterations)
}

/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hmcf_result_converged(result: *const HmcfResult) -> bool {
    result.as_ref().is_some_and(|r| r.0.converged)
}

/// # Safety
/// `result` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn hmcf_result_vanished(result: *const HmcfResult) -> bool {
    result.as_ref().is_some_and(|r| r.0.vanished)
}

/// Copies the final level set (row-major) into `buf` of `len` doubles.
///
/// # Safety
/// `result` must be a live handle and `buf` writable for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn hmcf_result_copy_phi(
    result: *const HmcfResult,
    buf: *mut f64,
    len: usize,
) -> HmcfStatus {
    guard(|| {
        let Some(res) = result.as_ref() else {
            return null("result");
        };
        if buf.is_null() {
            return null("buf");
        }
        let vals = res.0.final_phi.phi().values();
        if len < vals.len() {
            set_error(format!("buffer holds {len} values, need {}", vals.len()));
            return HmcfStatus::BufferTooSmall;
        }
        ptr::copy_nonoverlapping(vals.as_ptr(), buf, vals.len());
        HmcfStatus::Ok
    })
}

/// # Safety
/// `result` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn hmcf_result_free(result: *mut HmcfResult) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// Replaces a level-set function with the signed distance to its zero set.
/// `input` and `output` hold `width * height` doubles and may alias.
///
/// # Safety
/// Both pointers must be valid for `width * height` doubles.
#[no_mangle]
pub unsafe extern "C" fn hmcf_reinitialize(
    width: usize,
    height: usize,
    input: *const f64,
    output: *mut f64,
) -> HmcfStatus {
    guard(|| {
        if input.is_null() {
            return null("input");
        }
        if output.is_null() {
            return null("output");
        }
        let grid = try_status!(Grid2D::new(width, height).map_err(fail));
        let vals = std::slice::from_raw_parts(input, grid.len()).to_vec();
        let phi = try_status!(ScalarField::new(grid, vals).map_err(fail));
        let sdf = try_status!(reinitialize_sdf(&LevelSetState::new(phi)).map_err(fail));
        ptr::copy_nonoverlapping(sdf.phi().values().as_ptr(), output, grid.len());
        HmcfStatus::Ok
    })
}

/// Dice coefficient of two masks given as `width * height` bytes, non-zero
/// meaning inside.
///
/// # Safety
/// `a` and `b` must be valid for `width * height` bytes and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn hmcf_dice(
    width: usize,
    height: usize,
    a: *const u8,
    b: *const u8,
    out: *mut f64,
) -> HmcfStatus {
    guard(|| {
        if a.is_null() || b.is_null() {
            return null("mask");
        }
        if out.is_null() {
            return null("out");
        }
        let grid = try_status!(Grid2D::new(width, height).map_err(fail));
        let mask = |p: *const u8| {
            let bits = std::slice::from_raw_parts(p, grid.len())
                .iter()
                .map(|v| *v != 0)
                .collect();
            BinaryMask::new(grid, bits)
        };
        let (ma, mb) = (
            try_status!(mask(a).map_err(fail)),
            try_status!(mask(b).map_err(fail)),
        );
        *out = try_status!(dice(&ma, &mb).map_err(fail));
        HmcfStatus::Ok
    })
}
