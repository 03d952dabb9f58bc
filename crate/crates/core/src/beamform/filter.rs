//! Windowed linear-phase FIR filters for isolating the 2f₀ product harmonic.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WindowKind {
    Hanning,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum FilterBand {
    Bandpass { low_hz: f64, high_hz: f64 },
    Highpass { cutoff_hz: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FilterSpec {
    #[serde(flatten)]
    pub band: FilterBand,
    pub taps: usize,
    pub window: WindowKind,
}

impl FilterSpec {
    /// Default band for a transducer center frequency `f0`: pass
    /// `[1.2 f0, 2.8 f0]`, i.e. the 2f₀ harmonic ± 0.8 f0. The pairwise
    /// products of a short pulse carry twice the pulse envelope bandwidth,
    /// so the band is kept wide enough not to smear the axial envelope.
    pub fn default_bandpass(center_frequency_hz: f64) -> Self {
        FilterSpec {
            band: FilterBand::Bandpass {
                low_hz: 1.2 * center_frequency_hz,
                high_hz: 2.8 * center_frequency_hz,
            },
            taps: 101,
            window: WindowKind::Hanning,
        }
    }
}

fn hann(taps: usize) -> Vec<f64> {
    (0..taps)
        .map(|k| {
            let x = k as f64 / (taps - 1) as f64;
            0.5 - 0.5 * (2.0 * std::f64::consts::PI * x).cos()
        })
        .collect()
}

/// Design the FIR taps: ideal band response times the window. Tap count must
/// be odd so the group delay `(taps-1)/2` is a whole number of samples.
pub fn design_filter(spec: &FilterSpec, sampling_frequency_hz: f64) -> Result<Vec<f64>> {
    let fs = sampling_frequency_hz;
    if fs <= 0.0 {
        return Err(Error::invalid("design_filter: sampling frequency must be positive"));
    }
    if spec.taps < 3 || spec.taps.is_multiple_of(2) {
        return Err(Error::invalid("design_filter: taps must be odd and >= 3"));
    }
    let nyquist = fs / 2.0;
    let window = hann(spec.taps);
    let mid = (spec.taps / 2) as f64;
    let pi = std::f64::consts::PI;
    let taps = match spec.band {
        FilterBand::Bandpass { low_hz, high_hz } => {
            if !(low_hz > 0.0 && high_hz > low_hz && high_hz < nyquist) {
                return Err(Error::invalid(format!(
                    "design_filter: band [{low_hz}, {high_hz}] outside (0, {nyquist})"
                )));
            }
            let (wl, wh) = (2.0 * pi * low_hz / fs, 2.0 * pi * high_hz / fs);
            window
                .iter()
                .enumerate()
                .map(|(k, w)| {
                    let x = k as f64 - mid;
                    let ideal = if x == 0.0 {
                        (wh - wl) / pi
                    } else {
                        ((wh * x).sin() - (wl * x).sin()) / (pi * x)
                    };
                    w * ideal
                })
                .collect()
        }
        FilterBand::Highpass { cutoff_hz } => {
            if !(cutoff_hz > 0.0 && cutoff_hz < nyquist) {
                return Err(Error::invalid(format!(
                    "design_filter: cutoff {cutoff_hz} outside (0, {nyquist})"
                )));
            }
            let wc = 2.0 * pi * cutoff_hz / fs;
            window
                .iter()
                .enumerate()
                .map(|(k, w)| {
                    let x = k as f64 - mid;
                    let ideal = if x == 0.0 { 1.0 - wc / pi } else { -(wc * x).sin() / (pi * x) };
                    w * ideal
                })
                .collect()
        }
    };
    Ok(taps)
}

/// Filter magnitude response at frequency `f`.
pub fn gain_at(taps: &[f64], f_hz: f64, sampling_frequency_hz: f64) -> f64 {
    let w = 2.0 * std::f64::consts::PI * f_hz / sampling_frequency_hz;
    let (mut re, mut im) = (0.0, 0.0);
    for (k, h) in taps.iter().enumerate() {
        re += h * (w * k as f64).cos();
        im -= h * (w * k as f64).sin();
    }
    re.hypot(im)
}

/// Convolve and shift back by the filter's group delay `(taps-1)/2`, keeping
/// the input length.
pub fn apply_fir_compensated(x: &[f64], taps: &[f64]) -> Vec<f64> {
    let gd = (taps.len() - 1) / 2;
    let mut out = vec![0.0; x.len()];
    for (k, o) in out.iter_mut().enumerate() {
        let n = k + gd; // index into the full convolution
        let m_lo = n.saturating_sub(x.len() - 1);
        let m_hi = n.min(taps.len() - 1);
        let mut acc = 0.0;
        for m in m_lo..=m_hi {
            acc += taps[m] * x[n - m];
        }
        *o = acc;
    }
    out
}
