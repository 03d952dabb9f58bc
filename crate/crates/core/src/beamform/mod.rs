//! Receive beamforming pipelines on sampled RF channel data.
//!
//! DAS delays, weights and sums the element traces. The convolutional
//! methods (COBA on the full array, SCOBA/SCOBAR on sparse designs) delay,
//! amplitude-compress (`u = z/√|z|` on the analytic signal), laterally
//! self-convolve onto the sum co-array, apply modified co-array weights and
//! band-pass filter around the `2f₀` product harmonic.

mod channel_data;
mod coarray;
mod delay;
mod filter;

pub use channel_data::ChannelData;
pub use coarray::{
    coarray_convolve_direct, coarray_convolve_fft, modified_weights, u_map, u_transform,
    weighted_coarray_sum, ApertureSignals, CoArraySignals, ConvPath, DIRECT_PATH_MAX_ELEMENTS,
};
pub use delay::{apply_dynamic_delays, compute_delays};
pub use filter::{
    apply_fir_compensated, design_filter, gain_at, FilterBand, FilterSpec, WindowKind,
};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{make_ula, sumset, ApodizationVector, DesignVariant, PositionSet, SparseDesign};

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Acquisition and scan geometry. Angles are radians, distances meters,
/// frequencies hertz; the full receive array has `2N-1` elements where
/// `N = element_half_count`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImagingConfig {
    pub speed_of_sound_mps: f64,
    pub center_frequency_hz: f64,
    pub sampling_frequency_hz: f64,
    pub pitch_m: f64,
    pub element_half_count: u32,
    pub scan_angles_rad: Vec<f64>,
    pub depth_range_m: (f64, f64),
    pub dynamic_range_db: f64,
}

impl ImagingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.speed_of_sound_mps <= 0.0 {
            return Err(Error::invalid("speed of sound must be positive"));
        }
        if self.center_frequency_hz <= 0.0 || self.pitch_m <= 0.0 {
            return Err(Error::invalid("center frequency and pitch must be positive"));
        }
        // The product harmonic at 2f0 must be representable.
        if self.sampling_frequency_hz <= 4.0 * self.center_frequency_hz {
            return Err(Error::invalid(
                "sampling frequency must exceed 4x the center frequency to carry the 2f0 harmonic",
            ));
        }
        if self.element_half_count < 2 {
            return Err(Error::invalid("element_half_count must be >= 2"));
        }
        let (lo, hi) = self.depth_range_m;
        if !(lo > 0.0 && hi > lo) {
            return Err(Error::invalid("depth range must satisfy 0 < min < max"));
        }
        if self.dynamic_range_db <= 0.0 {
            return Err(Error::invalid("dynamic range must be positive"));
        }
        Ok(())
    }

    pub fn wavelength_m(&self) -> f64 {
        self.speed_of_sound_mps / self.center_frequency_hz
    }

    /// The full uniform array `{-(N-1), ..., N-1}` with this pitch attached.
    pub fn full_array(&self) -> Result<PositionSet> {
        Ok(make_ula(self.element_half_count)?.with_pitch(self.pitch_m))
    }
}

// ---------------------------------------------------------------------------
// Methods and apodization choices
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Das,
    Coba,
    Scoba,
    Scobar,
}

impl Method {
    pub fn is_sparse(self) -> bool {
        matches!(self, Method::Scoba | Method::Scobar)
    }

    pub fn is_convolutional(self) -> bool {
        self != Method::Das
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Method::Das => "das",
            Method::Coba => "coba",
            Method::Scoba => "scoba",
            Method::Scobar => "scobar",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "das" => Ok(Method::Das),
            "coba" => Ok(Method::Coba),
            "scoba" => Ok(Method::Scoba),
            "scobar" => Ok(Method::Scobar),
            other => Err(Error::invalid(format!("unknown method '{other}'"))),
        }
    }
}

/// Named desired-apodization presets resolved against a concrete geometry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ApodizationChoice {
    /// Unity weight on every element (DAS) or on every reachable co-array
    /// position (convolutional methods).
    Unity,
    /// Convolutional methods: unity on the full-array range `[-(N-1), N-1]`
    /// and zero beyond, so the realized pattern equals unweighted DAS on the
    /// full array. Same as `Unity` for DAS itself.
    DasMatch,
    /// The full array's triangular intrinsic apodization `(2N-1)-|n|` over
    /// the co-array (the natural weighting of full-array convolutional
    /// beamforming); a Bartlett taper `N-|n|` for DAS.
    Triangle,
}

impl std::str::FromStr for ApodizationChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "unity" => Ok(ApodizationChoice::Unity),
            "das_match" | "das-match" => Ok(ApodizationChoice::DasMatch),
            "triangle" => Ok(ApodizationChoice::Triangle),
            other => Err(Error::invalid(format!("unknown apodization '{other}'"))),
        }
    }
}

/// Resolve a preset into a concrete desired-weight vector for `method` run
/// on the array `elements` (element weights for DAS, co-array weights for
/// the convolutional methods).
pub fn resolve_apodization(
    method: Method,
    choice: ApodizationChoice,
    element_half_count: u32,
    elements: &PositionSet,
) -> Result<ApodizationVector> {
    if elements.is_empty() {
        return Err(Error::invalid("resolve_apodization: empty array"));
    }
    let n = i64::from(element_half_count);
    if method == Method::Das {
        return Ok(match choice {
            ApodizationChoice::Unity | ApodizationChoice::DasMatch => {
                ApodizationVector::unity_on(elements)
            }
            ApodizationChoice::Triangle => {
                let lo = elements.min().unwrap();
                let mut values = vec![0.0; elements.span() as usize + 1];
                for &p in elements.positions() {
                    values[(p - lo) as usize] = (n - p.abs()).max(0) as f64;
                }
                ApodizationVector::new(lo, values)
            }
        });
    }
    let co = sumset(elements)?;
    let lo = co.sumset.min().unwrap();
    let len = co.sumset.span() as usize + 1;
    let mut values = vec![0.0; len];
    match choice {
        ApodizationChoice::Unity => {
            for &p in co.sumset.positions() {
                values[(p - lo) as usize] = 1.0;
            }
        }
        ApodizationChoice::DasMatch => {
            for p in -(n - 1)..n {
                let k = p - lo;
                if k < 0 || k as usize >= len {
                    return Err(Error::UnreachablePosition { position: p });
                }
                values[k as usize] = 1.0;
            }
        }
        ApodizationChoice::Triangle => {
            for (k, v) in values.iter_mut().enumerate() {
                let p = lo + k as i64;
                *v = ((2 * n - 1) - p.abs()).max(0) as f64;
            }
        }
    }
    Ok(ApodizationVector::new(lo, values))
}

// ---------------------------------------------------------------------------
// Pipelines
// ---------------------------------------------------------------------------

/// Select the rows of `data` belonging to `subset` (order of `subset`).
/// Errors when the data does not cover a requested element.
pub fn restrict_channels(data: &ChannelData, subset: &PositionSet) -> Result<ChannelData> {
    let mut samples = Vec::with_capacity(subset.len());
    for &p in subset.positions() {
        let idx = data
            .element_positions
            .positions()
            .binary_search(&p)
            .map_err(|_| Error::invalid(format!("channel data has no element at position {p}")))?;
        samples.push(data.samples[idx].clone());
    }
    Ok(ChannelData {
        samples,
        element_positions: subset.clone(),
        t0_s: data.t0_s,
        config: data.config.clone(),
    })
}

fn conv_array(
    data: &ChannelData,
    method: Method,
    design: Option<&SparseDesign>,
) -> Result<PositionSet> {
    match method {
        Method::Das => unreachable!("conv_array is only called for convolutional methods"),
        Method::Coba => data.config.full_array(),
        Method::Scoba | Method::Scobar => {
            let d = design.ok_or_else(|| {
                Error::invalid(format!("method '{method}' requires a sparse design"))
            })?;
            let want = if method == Method::Scoba {
                DesignVariant::Scoba
            } else {
                DesignVariant::Scobar
            };
            if d.variant != want {
                return Err(Error::invalid(format!(
                    "method '{method}' given a {} design",
                    d.variant
                )));
            }
            if d.n != data.config.element_half_count {
                return Err(Error::invalid(format!(
                    "design N={} does not match config N={}",
                    d.n, data.config.element_half_count
                )));
            }
            Ok(d.elements.clone())
        }
    }
}

/// Beamform one scan line.
///
/// DAS: dynamic delays, element weighting, sum. Convolutional methods:
/// dynamic delays, u-transform, lateral co-array convolution (FFT path above
/// [`DIRECT_PATH_MAX_ELEMENTS`] elements), modified co-array weighting, then
/// the band-pass filter with its group delay compensated. The sparse methods
/// read only the channels listed in the design.
pub fn beamform_line(
    data: &ChannelData,
    method: Method,
    design: Option<&SparseDesign>,
    desired: &ApodizationVector,
    filter: &FilterSpec,
    scan_angle_rad: f64,
) -> Result<Vec<f64>> {
    data.validate()?;
    if method == Method::Das {
        let delayed = apply_dynamic_delays(data, scan_angle_rad);
        let positions = delayed.element_positions.positions();
        let lo = desired.offset();
        let hi = lo + desired.len() as i64 - 1;
        if positions.iter().any(|p| *p < lo || *p > hi) {
            return Err(Error::invalid("DAS weights do not cover the array"));
        }
        let weights: Vec<f64> = positions.iter().map(|p| desired.at(*p)).collect();
        let nsamp = delayed.sample_count();
        let mut line = vec![0.0; nsamp];
        for (row, w) in delayed.samples.iter().zip(&weights) {
            if *w == 0.0 {
                continue;
            }
            for (acc, v) in line.iter_mut().zip(row) {
                *acc += w * v;
            }
        }
        return Ok(line);
    }

    let array = conv_array(data, method, design)?;
    let sub = restrict_channels(data, &array)?;
    let delayed = apply_dynamic_delays(&sub, scan_angle_rad);
    let u = u_transform(&delayed);
    let s = if array.len() <= DIRECT_PATH_MAX_ELEMENTS {
        coarray_convolve_direct(&u, &array)?
    } else {
        coarray_convolve_fft(&u, &array)?
    };
    let modified = modified_weights(desired, &s.sumset.multiplicity)?;
    let ybar = weighted_coarray_sum(&s, &modified)?;
    let real: Vec<f64> = ybar.iter().map(|z| z.re).collect();
    let taps = design_filter(filter, data.config.sampling_frequency_hz)?;
    Ok(apply_fir_compensated(&real, &taps))
}

/// Beamform all scan angles of the config. Lines are independent and run in
/// parallel; the output order (and every sample) is deterministic.
pub fn beamform_lines(
    data: &ChannelData,
    method: Method,
    design: Option<&SparseDesign>,
    desired: &ApodizationVector,
    filter: &FilterSpec,
) -> Result<Vec<Vec<f64>>> {
    data.config
        .scan_angles_rad
        .par_iter()
        .map(|angle| beamform_line(data, method, design, desired, filter, *angle))
        .collect()
}
