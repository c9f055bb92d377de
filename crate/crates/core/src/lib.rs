//! Simulation and inference pipeline for a color-coded optical tactile
//! sensor: three colored light sources and nine camera-facing fibers embedded
//! in a silicone slab.
//!
//! The pipeline stages are:
//!
//! 1. [`geometry`]: slab layout, the 5×5 contact grid and depth levels.
//! 2. [`mechanics`]: linear-elastic force law and hysteresis.
//! 3. [`optics`]: Gaussian-beam forward model, noise, and frame rendering.
//! 4. [`descriptor`]: the 27-value ROI-mean feature vector.
//! 5. [`dataset`]: seeded calibration sweeps and CSV persistence.
//! 6. [`classify`]: LDA, QDA, linear SVM, k-NN and the two-stage
//!    location-then-depth classifier.
//!
//! ```
//! use colortouch::{geometry, mechanics::MechanicsParams};
//!
//! let depth = geometry::depth_of_level(5).unwrap();
//! let force = MechanicsParams::default().force_from_depth(depth).unwrap();
//! assert!((force - 18.0).abs() < 1e-9);
//! ```

pub mod classify;
pub mod config;
pub mod dataset;
pub mod descriptor;
pub mod error;
pub mod geometry;
pub mod mechanics;
pub mod optics;

pub use config::{Config, Sensor};
pub use error::{Error, Result};
