//! Segmentation metrics, noise models, synthetic test images and the
//! experiment harnesses built on them.

mod bench;
mod metrics;
mod noise;
mod synthetic;

pub use bench::{
    deviation_increments, noise_benchmark_image, run_b_sweep, run_noise_benchmark, save_csv,
    write_csv, ExperimentRow, Truth, CONTOUR_STEP, CSV_HEADER, NOISE_MODELS,
};
pub use metrics::{
    convex_deficiency, convex_hull_area, dice, enclosed_area, modified_hausdorff, BinaryMask,
    ContourPointSet,
};
pub use noise::{apply_noise, NoiseKind, NoiseSpec, PERIODIC_FREQUENCY};
pub use synthetic::{make_synthetic, SyntheticKind, SOFT_EDGE_SIGMA};
