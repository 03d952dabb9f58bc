//! Desk-scale synthetic channel-data generator: windowed pulses and
//! point-scatterer / anechoic-cyst phantoms propagated with the near-field
//! round-trip delay model.
//!
//! Transmission is modeled as ideally focused (every scatterer is insonified
//! at its one-way travel time `r/c` with unit gain), so the generated data
//! isolates receive-side behavior. There is no element directivity or
//! frequency-dependent attenuation; optional `1/r` amplitude spreading.

use rayon::prelude::*;

use crate::beamform::{ChannelData, ImagingConfig, WindowKind};
use crate::error::{Error, Result};

// ---------------------------------------------------------------------------
// Pulse synthesis
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec {
    pub cycles: u32,
    pub center_frequency_hz: f64,
    pub window: WindowKind,
    pub sampling_frequency_hz: f64,
}

/// Windowed sinusoidal burst: `p(t) = w(t)·sin(2π f0 t)` over
/// `cycles / f0` seconds, `floor(cycles/f0 · fs) + 1` samples.
pub fn synth_pulse(spec: &PulseSpec) -> Result<Vec<f64>> {
    if spec.cycles == 0 {
        return Err(Error::invalid("synth_pulse: cycles must be >= 1"));
    }
    if spec.center_frequency_hz <= 0.0 || spec.sampling_frequency_hz <= 0.0 {
        return Err(Error::invalid("synth_pulse: frequencies must be positive"));
    }
    let n = (f64::from(spec.cycles) / spec.center_frequency_hz * spec.sampling_frequency_hz)
        .floor() as usize
        + 1;
    if n < 3 {
        return Err(Error::invalid("synth_pulse: pulse is undersampled"));
    }
    let WindowKind::Hanning = spec.window;
    Ok((0..n)
        .map(|k| {
            let x = k as f64 / (n - 1) as f64;
            let w = 0.5 - 0.5 * (2.0 * std::f64::consts::PI * x).cos();
            let t = k as f64 / spec.sampling_frequency_hz;
            w * (2.0 * std::f64::consts::PI * spec.center_frequency_hz * t).sin()
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Phantoms
// ---------------------------------------------------------------------------

/// A point reflector at polar position `(range, angle)` from the array
/// center with a (signed) reflection amplitude.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scatterer {
    pub range_m: f64,
    pub angle_rad: f64,
    pub amplitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Phantom {
    pub scatterers: Vec<Scatterer>,
    pub seed: u64,
}

impl Phantom {
    pub fn points(scatterers: Vec<Scatterer>) -> Self {
        Phantom { scatterers, seed: 0 }
    }
}

// Deterministic generator, fixed across platforms: splitmix64
// (state += 0x9E3779B97F4A7C15; xor-shift-multiply finalizer) with doubles
// taken from the top 53 bits and normals via the Box-Muller cosine branch.
#[derive(Debug, Clone)]
struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    fn new(seed: u64) -> Self {
        Self { state: seed }
    }

    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
        z ^ (z >> 31)
    }

    /// Uniform in [0, 1).
    fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal via Box-Muller (cosine branch).
    fn next_normal(&mut self) -> f64 {
        let mut u1 = self.next_f64();
        while u1 <= 0.0 {
            u1 = self.next_f64();
        }
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

/// Speckle background with an anechoic disc cut out.
///
/// Scatterers are laid down area-uniformly over the scanned sector (padded
/// by 2 degrees on each side) across the configured depth range, with
/// standard-normal amplitudes; any draw landing inside the cyst disc is
/// dropped. `center_m` is Cartesian `(lateral x, depth z)`.
pub fn make_cyst_phantom(
    config: &ImagingConfig,
    center_m: (f64, f64),
    radius_m: f64,
    density_per_mm2: f64,
    seed: u64,
) -> Result<Phantom> {
    config.validate()?;
    if radius_m <= 0.0 {
        return Err(Error::invalid("make_cyst_phantom: radius must be positive"));
    }
    if density_per_mm2 < 0.0 {
        return Err(Error::invalid("make_cyst_phantom: density must be >= 0"));
    }
    let pad = 2.0_f64.to_radians();
    let (lo, hi) = config
        .scan_angles_rad
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), a| (lo.min(*a), hi.max(*a)));
    let (theta_lo, theta_hi) = if lo.is_finite() { (lo - pad, hi + pad) } else { (-pad, pad) };
    let span = theta_hi - theta_lo;
    let (r1, r2) = config.depth_range_m;
    let area_mm2 = span * (r2 * r2 - r1 * r1) / 2.0 * 1e6;
    let count = (area_mm2 * density_per_mm2).floor() as usize;

    let mut rng = SplitMix64::new(seed);
    let mut scatterers = Vec::with_capacity(count);
    for _ in 0..count {
        let r = (r1 * r1 + (r2 * r2 - r1 * r1) * rng.next_f64()).sqrt();
        let theta = theta_lo + span * rng.next_f64();
        let amplitude = rng.next_normal();
        let (x, z) = (r * theta.sin(), r * theta.cos());
        let (dx, dz) = (x - center_m.0, z - center_m.1);
        if dx * dx + dz * dz <= radius_m * radius_m {
            continue;
        }
        scatterers.push(Scatterer { range_m: r, angle_rad: theta, amplitude });
    }
    Ok(Phantom { scatterers, seed })
}

// ---------------------------------------------------------------------------
// Channel-data generation
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct SimulatedData {
    pub data: ChannelData,
    /// Scatterers dropped because their range fell outside the configured
    /// depth range.
    pub skipped_scatterers: usize,
}

/// Synthesize receive traces for the full `2N-1` element array.
///
/// Each in-range scatterer contributes, on element `n`,
/// `amp · p(t - r/c - dist_n/c)` with `dist_n` the element-to-scatterer
/// distance and the pulse placed by linear interpolation; contributions add
/// linearly. `tx_focus` is the transmit focal point `(range, angle)`; under
/// the ideal-focusing transmit model it only needs a positive range.
pub fn generate_channel_data(
    config: &ImagingConfig,
    phantom: &Phantom,
    pulse: &[f64],
    tx_focus: (f64, f64),
    spreading_1_over_r: bool,
) -> Result<SimulatedData> {
    config.validate()?;
    if pulse.is_empty() {
        return Err(Error::invalid("generate_channel_data: empty pulse"));
    }
    if tx_focus.0 <= 0.0 {
        return Err(Error::invalid("generate_channel_data: transmit focal range must be positive"));
    }
    let c = config.speed_of_sound_mps;
    let fs = config.sampling_frequency_hz;
    let (depth_lo, depth_hi) = config.depth_range_m;
    let pulse_duration = (pulse.len() - 1) as f64 / fs;
    let t0 = (2.0 * depth_lo / c - pulse_duration).max(0.0);
    let t_end = 2.0 * depth_hi / c + pulse_duration;
    // Round the trace length up to a multiple of 16 so downstream FFTs stay
    // on friendly sizes.
    let nsamp = {
        let raw = ((t_end - t0) * fs).ceil() as usize + 1;
        raw.div_ceil(16) * 16
    };

    let elements = config.full_array()?;
    let in_range: Vec<&Scatterer> = phantom
        .scatterers
        .iter()
        .filter(|s| s.range_m >= depth_lo && s.range_m <= depth_hi)
        .collect();
    let skipped = phantom.scatterers.len() - in_range.len();

    let samples: Vec<Vec<f64>> = elements
        .positions()
        .par_iter()
        .map(|p| {
            let x = *p as f64 * config.pitch_m;
            let mut trace = vec![0.0; nsamp];
            for s in &in_range {
                let r = s.range_m;
                let dist =
                    (r * r - 2.0 * x * r * s.angle_rad.sin() + x * x).max(0.0).sqrt();
                let t_arrival = r / c + dist / c;
                let g = (t_arrival - t0) * fs;
                let amp = s.amplitude * if spreading_1_over_r { 1.0 / r } else { 1.0 };
                let start = g.ceil().max(0.0) as usize;
                let stop = (start + pulse.len()).min(nsamp);
                for (m, o) in trace.iter_mut().enumerate().take(stop).skip(start) {
                    let q = m as f64 - g;
                    let j = q.floor() as usize;
                    if j + 1 < pulse.len() {
                        let frac = q - j as f64;
                        *o += amp * (pulse[j] * (1.0 - frac) + pulse[j + 1] * frac);
                    }
                }
            }
            trace
        })
        .collect();

    Ok(SimulatedData {
        data: ChannelData {
            samples,
            element_positions: elements,
            t0_s: t0,
            config: config.clone(),
        },
        skipped_scatterers: skipped,
    })
}
