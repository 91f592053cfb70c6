//! Pectoral-muscle boundary reconstruction for MLO mammograms.
//!
//! Two edge-probability maps (a fine one, `OUT1`, and a coarse one, `OUT2`)
//! go in; a pixel path separating the pectoral muscle from the breast, and
//! the matching masks, come out. See the `examples/` directory for one
//! runnable walkthrough per capability.

pub mod cli;
pub mod error;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod morphology;
pub mod orientation;
pub mod phantom;
pub mod pipeline;
pub mod raster;

pub use error::{Error, Result};
pub use graph::{shortest_path, GraphConfig, PixelPath};
pub use metrics::{evaluate_masks, MetricsReport};
pub use orientation::Orientation;
pub use phantom::{generate, PhantomSpec, Scenario};
pub use pipeline::{segment, FusionSource, PipelineConfig, SegmentationResult, StageError};
pub use raster::{BinaryMask, EdgeProbMap, GrayImage, Pixel, Raster};
