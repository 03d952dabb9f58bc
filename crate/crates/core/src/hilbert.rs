//! Discrete analytic signal via one-sided spectrum doubling.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// Analytic signal of a real sequence: FFT, zero the negative frequencies,
/// double the positive ones (DC and, for even lengths, Nyquist stay single),
/// inverse FFT. The real part reproduces the input; the magnitude is the
/// envelope.
pub fn analytic_signal(x: &[f64]) -> Vec<Complex64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    if n == 1 {
        return vec![Complex64::new(x[0], 0.0)];
    }
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(n);
    let ifft = planner.plan_fft_inverse(n);

    let mut buf: Vec<Complex64> = x.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    fft.process(&mut buf);

    let half = n / 2;
    if n.is_multiple_of(2) {
        for v in &mut buf[1..half] {
            *v *= 2.0;
        }
        for v in &mut buf[half + 1..] {
            *v = Complex64::new(0.0, 0.0);
        }
    } else {
        for v in &mut buf[1..=half] {
            *v *= 2.0;
        }
        for v in &mut buf[half + 1..] {
            *v = Complex64::new(0.0, 0.0);
        }
    }

    ifft.process(&mut buf);
    let scale = 1.0 / n as f64;
    for v in &mut buf {
        *v *= scale;
    }
    buf
}
