//! Receive-beamforming toolkit for ultrasound B-mode imaging.
//!
//! Implements the standard delay-and-sum beamformer (DAS) alongside the
//! convolutional beamformer (COBA) and its two sparse-array variants (SCOBA,
//! SCOBAR), which trade receive channels against the sum co-array: pairwise
//! products of the delayed, amplitude-compressed channel signals synthesize a
//! virtual aperture of pairwise position sums, so a thinned physical array
//! can match or exceed the full array's beam pattern.
//!
//! The crate is organized by pipeline stage:
//!
//! * [`geometry`] — position-set algebra, sum co-arrays, intrinsic
//!   apodization, the SCOBA/SCOBAR constructions and minimal-element /
//!   minimal-aperture optimizers;
//! * [`beampattern`] — analytic far-field patterns and lobe metrics;
//! * [`beamform`] — dynamic receive focusing, the co-array convolution
//!   (direct and FFT paths), co-array weighting, FIR band-pass filtering and
//!   the four per-line pipelines, plus channel-data file I/O;
//! * [`simulate`] — a desk-scale point-scatterer / cyst phantom channel-data
//!   generator;
//! * [`imaging`] — envelope detection, log compression, B-mode image
//!   assembly, contrast ratio and FWHM metrics.

pub mod beamform;
pub mod beampattern;
pub mod error;
pub mod geometry;
pub mod hilbert;
pub mod imaging;
pub mod simulate;

pub use error::{Error, Result};
