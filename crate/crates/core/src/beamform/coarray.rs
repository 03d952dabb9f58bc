//! The u-transform and the lateral co-array convolution (direct and FFT
//! paths), plus co-array weighting.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::ChannelData;
use crate::error::{Error, Result};
use crate::geometry::{sumset, ApodizationVector, PositionSet, SumCoArray};
use crate::hilbert::analytic_signal;

/// Amplitude-compressing map `u = exp(j∠z)·√|z| = z/√|z|` (0 at 0). Keeps
/// the phase and halves the dynamic range so pairwise products stay on the
/// order of the original signal. For a real input the map reduces to
/// `sign(y)·√|y|`.
pub fn u_map(z: Complex64) -> Complex64 {
    let mag = z.norm();
    if mag == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        z / mag.sqrt()
    }
}

/// Delayed, u-transformed element signals (complex: the transform is applied
/// to the analytic signal of each trace so the phase is the instantaneous
/// phase rather than a bare sign).
#[derive(Debug, Clone)]
pub struct ApertureSignals {
    pub u: Vec<Vec<Complex64>>,
}

/// Apply the u-transform to every (already delayed) element trace.
pub fn u_transform(data: &ChannelData) -> ApertureSignals {
    let u = data
        .samples
        .iter()
        .map(|trace| analytic_signal(trace).into_iter().map(u_map).collect())
        .collect();
    ApertureSignals { u }
}

/// Per-time-sample products accumulated onto the sum co-array: row `n` holds
/// `s_n(t) = Σ_{i+j=n} u_i(t) u_j(t)` over ordered pairs (self-products and
/// both orders included).
#[derive(Debug, Clone)]
pub struct CoArraySignals {
    pub s: Vec<Vec<Complex64>>,
    pub sumset: SumCoArray,
}

/// Largest array for which the O(|J|²) direct product path is the default;
/// beyond this the FFT path wins.
pub const DIRECT_PATH_MAX_ELEMENTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConvPath {
    Direct,
    Fft,
}

fn check_shape(u: &ApertureSignals, positions: &PositionSet) -> Result<usize> {
    if u.u.len() != positions.len() {
        return Err(Error::invalid(format!(
            "co-array convolution: {} signal rows for {} positions",
            u.u.len(),
            positions.len()
        )));
    }
    if positions.is_empty() {
        return Err(Error::invalid("co-array convolution: empty array"));
    }
    let nsamp = u.u[0].len();
    if u.u.iter().any(|row| row.len() != nsamp) {
        return Err(Error::invalid("co-array convolution: ragged signal rows"));
    }
    Ok(nsamp)
}

/// Direct-path co-array convolution: accumulate all ordered pair products.
pub fn coarray_convolve_direct(
    u: &ApertureSignals,
    positions: &PositionSet,
) -> Result<CoArraySignals> {
    let nsamp = check_shape(u, positions)?;
    let co = sumset(positions)?;
    let lo = co.sumset.min().unwrap();
    // position -> row index lookup over the dense co-array span
    let mut row_of = vec![usize::MAX; co.sumset.span() as usize + 1];
    for (row, &p) in co.sumset.positions().iter().enumerate() {
        row_of[(p - lo) as usize] = row;
    }
    let mut s = vec![vec![Complex64::new(0.0, 0.0); nsamp]; co.sumset.len()];
    let pos = positions.positions();
    for i in 0..pos.len() {
        // self product once, cross products carry both orders
        let row = row_of[(2 * pos[i] - lo) as usize];
        let (ui, si) = (&u.u[i], &mut s[row]);
        for (acc, a) in si.iter_mut().zip(ui) {
            *acc += a * a;
        }
        for j in i + 1..pos.len() {
            let row = row_of[(pos[i] + pos[j] - lo) as usize];
            let (ui, uj) = (&u.u[i], &u.u[j]);
            let sj = &mut s[row];
            for ((acc, a), b) in sj.iter_mut().zip(ui).zip(uj) {
                *acc += 2.0 * a * b;
            }
        }
    }
    Ok(CoArraySignals { s, sumset: co })
}

/// FFT-path co-array convolution: embed the signals into a dense
/// indicator-aligned vector over the aperture span, zero-pad to the next
/// power of two covering the linear self-convolution, square in the
/// frequency domain and read the co-array rows back off.
pub fn coarray_convolve_fft(
    u: &ApertureSignals,
    positions: &PositionSet,
) -> Result<CoArraySignals> {
    let nsamp = check_shape(u, positions)?;
    let co = sumset(positions)?;
    let lo = positions.min().unwrap();
    let dense_len = positions.span() as usize + 1;
    let nfft = (2 * dense_len - 1).next_power_of_two();

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(nfft);
    let ifft = planner.plan_fft_inverse(nfft);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let mut iscratch = vec![Complex64::new(0.0, 0.0); ifft.get_inplace_scratch_len()];

    let dense_index: Vec<usize> = positions
        .positions()
        .iter()
        .map(|p| (p - lo) as usize)
        .collect();
    let co_lo = co.sumset.min().unwrap();
    let read_index: Vec<usize> = co
        .sumset
        .positions()
        .iter()
        .map(|p| (p - 2 * lo) as usize)
        .collect();
    debug_assert_eq!(co_lo, 2 * lo);

    let mut s = vec![vec![Complex64::new(0.0, 0.0); nsamp]; co.sumset.len()];
    let mut buf = vec![Complex64::new(0.0, 0.0); nfft];
    let scale = 1.0 / nfft as f64;
    // one lateral FFT per time sample; t indexes both u rows and s rows
    #[allow(clippy::needless_range_loop)]
    for t in 0..nsamp {
        buf.fill(Complex64::new(0.0, 0.0));
        for (row, &k) in dense_index.iter().enumerate() {
            buf[k] = u.u[row][t];
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for v in buf.iter_mut() {
            *v = *v * *v;
        }
        ifft.process_with_scratch(&mut buf, &mut iscratch);
        for (row, &k) in read_index.iter().enumerate() {
            s[row][t] = buf[k] * scale;
        }
    }
    Ok(CoArraySignals { s, sumset: co })
}

/// Divide a desired co-array apodization by the intrinsic apodization:
/// `w̃_n = w_n / a_n`. Positions where both are zero yield zero; a desired
/// nonzero weight on a position the co-array never reaches is an error.
pub fn modified_weights(
    desired: &ApodizationVector,
    intrinsic: &ApodizationVector,
) -> Result<ApodizationVector> {
    // desired weight outside the intrinsic span is realizable only if zero
    for (p, w) in desired.iter() {
        if w != 0.0 && intrinsic.at(p) == 0.0 {
            return Err(Error::UnreachablePosition { position: p });
        }
    }
    let values = (0..intrinsic.len())
        .map(|k| {
            let p = intrinsic.offset() + k as i64;
            let a = intrinsic.values()[k];
            if a == 0.0 {
                0.0
            } else {
                desired.at(p) / a
            }
        })
        .collect();
    Ok(ApodizationVector::new(intrinsic.offset(), values))
}

/// Weighted sum over the co-array rows: `ȳ(t) = Σ_n w̃_n s_n(t)`.
pub fn weighted_coarray_sum(
    s: &CoArraySignals,
    weights: &ApodizationVector,
) -> Result<Vec<Complex64>> {
    let lo = weights.offset();
    let hi = lo + weights.len() as i64 - 1;
    for &p in s.sumset.sumset.positions() {
        if p < lo || p > hi {
            return Err(Error::invalid(format!(
                "co-array weights do not cover position {p}"
            )));
        }
    }
    let nsamp = s.s.first().map_or(0, Vec::len);
    let mut out = vec![Complex64::new(0.0, 0.0); nsamp];
    for (row, &p) in s.s.iter().zip(s.sumset.sumset.positions()) {
        let w = weights.at(p);
        if w == 0.0 {
            continue;
        }
        for (acc, v) in out.iter_mut().zip(row) {
            *acc += w * v;
        }
    }
    Ok(out)
}
