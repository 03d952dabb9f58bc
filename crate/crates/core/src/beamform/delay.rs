//! Near-field receive delays and per-sample dynamic focusing.

use super::{ChannelData, ImagingConfig};
use crate::error::{Error, Result};

/// Round-trip time for a focus at range `r` (meters) and steering angle
/// `theta` seen by the element at grid index `n`: one way out to the focus
/// plus the eikonal return path `sqrt(r² - 2 n d r sinθ + (nd)²) / c`.
pub fn compute_delays(config: &ImagingConfig, element_index: i64, focus: (f64, f64)) -> Result<f64> {
    let (r, theta) = focus;
    if r <= 0.0 {
        return Err(Error::invalid("compute_delays: focus range must be positive"));
    }
    let x = element_index as f64 * config.pitch_m;
    let c = config.speed_of_sound_mps;
    Ok((r + (r * r - 2.0 * x * r * theta.sin() + x * x).sqrt()) / c)
}

/// Dynamically focused resampling of every element trace along one scan
/// line. Output sample `m` corresponds to depth `r = c t / 2` with
/// `t = t0 + m / fs`; each element trace is read at its own round-trip time
/// `τ_n(r, θ)` with linear interpolation, zero outside the recording.
pub fn apply_dynamic_delays(data: &ChannelData, scan_angle_rad: f64) -> ChannelData {
    let config = &data.config;
    let c = config.speed_of_sound_mps;
    let fs = config.sampling_frequency_hz;
    let t0 = data.t0_s;
    let nsamp = data.sample_count();
    let sin_t = scan_angle_rad.sin();

    let samples = data
        .element_positions
        .positions()
        .iter()
        .zip(&data.samples)
        .map(|(p, trace)| {
            let x = *p as f64 * config.pitch_m;
            let mut out = vec![0.0; nsamp];
            for (m, o) in out.iter_mut().enumerate() {
                let t = t0 + m as f64 / fs;
                let r = c * t / 2.0;
                if r <= 0.0 {
                    continue;
                }
                let arg = r * r - 2.0 * x * r * sin_t + x * x;
                let tau = (r + arg.max(0.0).sqrt()) / c;
                let q = (tau - t0) * fs;
                let j = q.floor();
                if j < 0.0 || j as usize + 1 >= nsamp {
                    continue;
                }
                let j = j as usize;
                let frac = q - j as f64;
                *o = trace[j] * (1.0 - frac) + trace[j + 1] * frac;
            }
            out
        })
        .collect();

    ChannelData {
        samples,
        element_positions: data.element_positions.clone(),
        t0_s: data.t0_s,
        config: data.config.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::PositionSet;

    fn config() -> ImagingConfig {
        ImagingConfig {
            speed_of_sound_mps: 1540.0,
            center_frequency_hz: 3.5e6,
            sampling_frequency_hz: 100e6,
            pitch_m: 220e-6,
            element_half_count: 33,
            scan_angles_rad: vec![0.0],
            depth_range_m: (0.02, 0.08),
            dynamic_range_db: 60.0,
        }
    }

    #[test]
    fn center_element_sees_round_trip() {
        // r = 50 mm, c = 1540 m/s: 2r/c = 64.935 us for any angle.
        let c = config();
        for theta in [0.0, 0.2, -0.4] {
            let tau = compute_delays(&c, 0, (0.05, theta)).unwrap();
            assert!((tau - 64.935e-6).abs() < 1e-9);
        }
        assert!(compute_delays(&c, 0, (0.0, 0.0)).is_err());
    }

    #[test]
    fn broadside_reduces_to_pythagoras() {
        let c = config();
        let r = 0.04;
        let tau = compute_delays(&c, 5, (r, 0.0)).unwrap();
        let x = 5.0 * c.pitch_m;
        assert!((tau - (r + (r * r + x * x).sqrt()) / c.speed_of_sound_mps).abs() < 1e-15);
    }

    #[test]
    fn far_field_limit_approaches_linear_phase_delay() {
        // tau_n - tau_0 -> (n d sin theta) / c for r >> N d.
        let c = config();
        let theta = 0.3f64;
        let n = 32i64;
        let r = 1e4 * (c.element_half_count as f64) * c.pitch_m;
        let delta = compute_delays(&c, n, (r, theta)).unwrap()
            - compute_delays(&c, 0, (r, theta)).unwrap();
        let linear = -(n as f64) * c.pitch_m * theta.sin() / c.speed_of_sound_mps;
        assert!(
            ((delta - linear) / linear).abs() < 0.01,
            "delta {delta}, linear {linear}"
        );
    }

    #[test]
    fn delay_is_monotone_in_element_offset_at_broadside() {
        let c = config();
        let taus: Vec<f64> = (0..=32)
            .map(|n| compute_delays(&c, n, (0.05, 0.0)).unwrap())
            .collect();
        assert!(taus.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn center_element_delay_is_identity_resampling() {
        // For the n = 0 element tau(r) = 2r/c = t, so the resampler reads
        // each sample at its own position.
        let c = config();
        let trace: Vec<f64> = (0..512).map(|k| (k as f64 * 0.37).sin()).collect();
        let data = ChannelData {
            samples: vec![trace.clone()],
            element_positions: PositionSet::new(vec![0]),
            t0_s: 2.0 * 0.02 / 1540.0,
            config: c,
        };
        let out = apply_dynamic_delays(&data, 0.0);
        for (a, b) in trace.iter().zip(&out.samples[0]).take(500) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_in_zero_out() {
        let c = config();
        let data = ChannelData {
            samples: vec![vec![0.0; 128]; 3],
            element_positions: PositionSet::new(vec![-1, 0, 1]),
            t0_s: 1e-5,
            config: c,
        };
        let out = apply_dynamic_delays(&data, 0.1);
        assert!(out.samples.iter().flatten().all(|v| *v == 0.0));
    }
}
