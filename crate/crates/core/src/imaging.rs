//! Envelope detection, log compression, B-mode image assembly and image
//! quality metrics (contrast ratio, FWHM cross-sections), plus PGM / raw
//! image export.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hilbert::analytic_signal;

/// Envelope of an RF line: magnitude of the discrete analytic signal.
pub fn envelope(line: &[f64]) -> Vec<f64> {
    analytic_signal(line).into_iter().map(|z| z.norm()).collect()
}

/// Log-compress an intensity matrix to dB relative to its maximum, clipped
/// to `[-dynamic_range_db, 0]`.
pub fn log_compress(intensity: &[Vec<f64>], dynamic_range_db: f64) -> Result<Vec<Vec<f64>>> {
    if dynamic_range_db <= 0.0 {
        return Err(Error::invalid("log_compress: dynamic range must be positive"));
    }
    let max = intensity
        .iter()
        .flatten()
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    if max.is_nan() || max <= 0.0 {
        return Err(Error::invalid("log_compress: image has no positive intensity"));
    }
    Ok(intensity
        .iter()
        .map(|row| {
            row.iter()
                .map(|v| (20.0 * (v / max).log10()).max(-dynamic_range_db).min(0.0))
                .collect()
        })
        .collect())
}

/// A log-compressed B-mode image in polar (depth × scan line) layout with
/// the pre-compression envelope kept for quantitative metrics.
#[derive(Debug, Clone)]
pub struct BModeImage {
    /// Pre-compression envelope intensity, `[depth][line]`.
    pub intensity: Vec<Vec<f64>>,
    /// `20·log10(intensity/max)` clipped to `[-dynamic_range_db, 0]`.
    pub log_image: Vec<Vec<f64>>,
    pub line_angles_rad: Vec<f64>,
    pub depth_axis_m: Vec<f64>,
    pub dynamic_range_db: f64,
}

impl BModeImage {
    /// Assemble an image from beamformed RF lines (one per scan angle):
    /// envelope-detect each line, transpose to depth-major order and
    /// log-compress. `t0_s`/`fs`/`c` define the depth axis `r = c·t/2`.
    pub fn from_lines(
        lines: &[Vec<f64>],
        angles_rad: &[f64],
        t0_s: f64,
        sampling_frequency_hz: f64,
        speed_of_sound_mps: f64,
        dynamic_range_db: f64,
    ) -> Result<Self> {
        if lines.is_empty() || lines.len() != angles_rad.len() {
            return Err(Error::invalid(format!(
                "BModeImage: {} lines for {} angles",
                lines.len(),
                angles_rad.len()
            )));
        }
        let nsamp = lines[0].len();
        if nsamp == 0 || lines.iter().any(|l| l.len() != nsamp) {
            return Err(Error::invalid("BModeImage: ragged or empty lines"));
        }
        let envelopes: Vec<Vec<f64>> = lines.par_iter().map(|l| envelope(l)).collect();
        let mut intensity = vec![vec![0.0; lines.len()]; nsamp];
        for (j, env) in envelopes.iter().enumerate() {
            for (i, v) in env.iter().enumerate() {
                intensity[i][j] = *v;
            }
        }
        let log_image = log_compress(&intensity, dynamic_range_db)?;
        let depth_axis_m = (0..nsamp)
            .map(|i| speed_of_sound_mps * (t0_s + i as f64 / sampling_frequency_hz) / 2.0)
            .collect();
        Ok(BModeImage {
            intensity,
            log_image,
            line_angles_rad: angles_rad.to_vec(),
            depth_axis_m,
            dynamic_range_db,
        })
    }

    pub fn rows(&self) -> usize {
        self.intensity.len()
    }

    pub fn cols(&self) -> usize {
        self.intensity.first().map_or(0, Vec::len)
    }

    fn nearest_depth_row(&self, depth_m: f64) -> Result<usize> {
        let first = *self.depth_axis_m.first().unwrap();
        let last = *self.depth_axis_m.last().unwrap();
        if depth_m < first || depth_m > last {
            return Err(Error::invalid(format!(
                "depth {depth_m} m outside the image range [{first}, {last}]"
            )));
        }
        Ok(self
            .depth_axis_m
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - depth_m).abs().total_cmp(&(b.1 - depth_m).abs()))
            .unwrap()
            .0)
    }
}

/// A circular analysis region in (lateral, depth) coordinates, meters.
/// A pixel at depth `r` on the line at angle `θ` sits at lateral `r·sin θ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleRegion {
    pub center_lateral_m: f64,
    pub center_depth_m: f64,
    pub radius_m: f64,
}

fn region_mean(img: &BModeImage, region: &CircleRegion) -> Result<f64> {
    let mut acc = 0.0;
    let mut count = 0usize;
    let r2 = region.radius_m * region.radius_m;
    for (i, &depth) in img.depth_axis_m.iter().enumerate() {
        let dz = depth - region.center_depth_m;
        if dz.abs() > region.radius_m {
            continue;
        }
        for (j, &angle) in img.line_angles_rad.iter().enumerate() {
            let dx = depth * angle.sin() - region.center_lateral_m;
            if dx * dx + dz * dz <= r2 {
                acc += img.intensity[i][j];
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(Error::invalid(format!(
            "region at ({}, {}) r={} contains no pixels",
            region.center_lateral_m, region.center_depth_m, region.radius_m
        )));
    }
    Ok(acc / count as f64)
}

/// Contrast ratio `CR = 20·log10(μ_cyst / μ_bck)` of mean pre-compression
/// intensities over the two regions.
pub fn contrast_ratio(img: &BModeImage, cyst: &CircleRegion, bck: &CircleRegion) -> Result<f64> {
    let mu_cyst = region_mean(img, cyst)?;
    let mu_bck = region_mean(img, bck)?;
    if mu_bck <= 0.0 {
        return Err(Error::invalid("contrast_ratio: background mean is zero"));
    }
    Ok(20.0 * (mu_cyst / mu_bck).log10())
}

/// Pre-compression intensity row nearest to `depth_m`.
pub fn lateral_cross_section(img: &BModeImage, depth_m: f64) -> Result<Vec<f64>> {
    let row = img.nearest_depth_row(depth_m)?;
    Ok(img.intensity[row].clone())
}

/// Full width at -6 dB of the section peak, linearly interpolated between
/// samples; `coords` carries the section's axis (consistent units in,
/// consistent units out). Errors when the peak touches the section edge.
pub fn fwhm_from_section(section: &[f64], coords: &[f64]) -> Result<f64> {
    if section.len() != coords.len() || section.len() < 3 {
        return Err(Error::invalid("fwhm_from_section: need matching axes of >= 3 samples"));
    }
    let (peak_idx, peak) = section
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, v)| (i, *v))
        .unwrap();
    if peak.is_nan() || peak <= 0.0 {
        return Err(Error::invalid("fwhm_from_section: no positive peak"));
    }
    let threshold = peak * 10f64.powf(-6.0 / 20.0);
    let right = (peak_idx..section.len())
        .find(|k| section[*k] < threshold)
        .ok_or_else(|| Error::NotFound("fwhm_from_section: peak at section edge".into()))?;
    let left = (0..=peak_idx)
        .rev()
        .find(|k| section[*k] < threshold)
        .ok_or_else(|| Error::NotFound("fwhm_from_section: peak at section edge".into()))?;
    let cross = |a: usize, b: usize| {
        coords[a] + (threshold - section[a]) * (coords[b] - coords[a]) / (section[b] - section[a])
    };
    Ok(cross(right - 1, right) - cross(left + 1, left))
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

/// 8-bit PGM (P5) of the log-compressed image, `[-DR, 0]` dB mapped to
/// `[0, 255]`.
pub fn write_pgm(img: &BModeImage, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write!(w, "P5\n{} {}\n255\n", img.cols(), img.rows())?;
    let dr = img.dynamic_range_db;
    for row in &img.log_image {
        let bytes: Vec<u8> = row
            .iter()
            .map(|db| (((db + dr) / dr * 255.0).round().clamp(0.0, 255.0)) as u8)
            .collect();
        w.write_all(&bytes)?;
    }
    w.flush()?;
    Ok(())
}

/// Sidecar metadata for the raw f32 intensity dump.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ImageSidecar {
    pub rows: usize,
    pub cols: usize,
    pub depth_axis_m: Vec<f64>,
    pub line_angles_rad: Vec<f64>,
    pub dr_db: f64,
}

/// Write the pre-compression intensity as little-endian f32 row-major to
/// `<base>.f32` and the sidecar JSON to `<base>.json`.
pub fn write_raw_with_sidecar(img: &BModeImage, base: &Path) -> Result<()> {
    let raw_path = base.with_extension("f32");
    let mut w = BufWriter::new(File::create(&raw_path)?);
    for row in &img.intensity {
        for &v in row {
            w.write_f32::<LittleEndian>(v as f32)?;
        }
    }
    w.flush()?;
    let sidecar = ImageSidecar {
        rows: img.rows(),
        cols: img.cols(),
        depth_axis_m: img.depth_axis_m.clone(),
        line_angles_rad: img.line_angles_rad.clone(),
        dr_db: img.dynamic_range_db,
    };
    let json_path = base.with_extension("json");
    let f = File::create(&json_path)?;
    serde_json::to_writer_pretty(BufWriter::new(f), &sidecar)
        .map_err(|e| Error::Format(format!("sidecar: {e}")))?;
    Ok(())
}

/// Load an image written by [`write_raw_with_sidecar`]; the log image is
/// recomputed from the stored intensity.
pub fn read_raw_with_sidecar(base: &Path) -> Result<BModeImage> {
    let json_path = base.with_extension("json");
    let sidecar: ImageSidecar =
        serde_json::from_reader(BufReader::new(File::open(&json_path)?))
            .map_err(|e| Error::Format(format!("{}: {e}", json_path.display())))?;
    let raw_path = base.with_extension("f32");
    let mut r = BufReader::new(File::open(&raw_path)?);
    let mut intensity = Vec::with_capacity(sidecar.rows);
    for _ in 0..sidecar.rows {
        let mut row = Vec::with_capacity(sidecar.cols);
        for _ in 0..sidecar.cols {
            row.push(f64::from(r.read_f32::<LittleEndian>()?));
        }
        intensity.push(row);
    }
    let mut tail = [0u8; 1];
    if r.read(&mut tail)? != 0 {
        return Err(Error::Format(format!(
            "{}: trailing bytes beyond {}x{} image",
            raw_path.display(),
            sidecar.rows,
            sidecar.cols
        )));
    }
    let log_image = log_compress(&intensity, sidecar.dr_db)?;
    Ok(BModeImage {
        intensity,
        log_image,
        line_angles_rad: sidecar.line_angles_rad,
        depth_axis_m: sidecar.depth_axis_m,
        dynamic_range_db: sidecar.dr_db,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_of_tone_is_near_unity_inside() {
        let n = 2000;
        let x: Vec<f64> = (0..n).map(|k| (0.44 * k as f64).sin()).collect();
        let env = envelope(&x);
        for v in &env[100..n - 100] {
            assert!((v - 1.0).abs() < 0.02, "envelope {v}");
        }
        assert!(envelope(&vec![0.0; 64]).iter().all(|v| *v == 0.0));
    }

    #[test]
    fn envelope_bounds_signal_for_narrowband_input() {
        let n = 1500;
        let x: Vec<f64> = (0..n)
            .map(|k| {
                let t = k as f64;
                (1.0 + 0.3 * (0.01 * t).sin()) * (0.5 * t).sin()
            })
            .collect();
        let env = envelope(&x);
        for (e, v) in env.iter().zip(&x).skip(50).take(n - 100) {
            assert!(*e >= v.abs() - 0.02);
        }
    }

    #[test]
    fn envelope_recovers_slow_amplitude_modulation() {
        let n = 4000;
        let x: Vec<f64> = (0..n)
            .map(|k| {
                let t = k as f64;
                let a = 1.0 + 0.5 * (2.0 * std::f64::consts::PI * t / 2000.0).cos();
                a * (0.9 * t).sin()
            })
            .collect();
        let env = envelope(&x);
        for k in (200..n - 200).step_by(37) {
            let t = k as f64;
            let a = 1.0 + 0.5 * (2.0 * std::f64::consts::PI * t / 2000.0).cos();
            assert!((env[k] - a).abs() < 0.03 * a, "k={k} env={} a={a}", env[k]);
        }
    }

    #[test]
    fn log_compression_basics() {
        let img = vec![vec![5.0, 5.0], vec![5.0, 5.0]];
        let db = log_compress(&img, 40.0).unwrap();
        assert!(db.iter().flatten().all(|v| *v == 0.0));

        let img = vec![vec![10.0, 1.0, 1e-9]];
        let db = log_compress(&img, 40.0).unwrap();
        assert_eq!(db[0][0], 0.0);
        assert!((db[0][1] - -20.0).abs() < 1e-12);
        assert_eq!(db[0][2], -40.0); // clipped

        assert!(log_compress(&[vec![0.0, 0.0]], 40.0).is_err());
    }

    #[test]
    fn log_compression_is_monotone() {
        let img = vec![vec![0.1, 0.5, 0.2, 0.9, 0.9001]];
        let db = log_compress(&img, 60.0).unwrap();
        let mut pairs: Vec<(f64, f64)> =
            img[0].iter().cloned().zip(db[0].iter().cloned()).collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert!(pairs.windows(2).all(|w| w[0].1 <= w[1].1));
    }

    fn flat_image(rows: usize, cols: usize, fill: impl Fn(usize, usize) -> f64) -> BModeImage {
        let intensity: Vec<Vec<f64>> =
            (0..rows).map(|i| (0..cols).map(|j| fill(i, j)).collect()).collect();
        let log_image = log_compress(&intensity, 60.0).unwrap();
        BModeImage {
            intensity,
            log_image,
            line_angles_rad: (0..cols).map(|j| (j as f64 - cols as f64 / 2.0) * 0.004).collect(),
            depth_axis_m: (0..rows).map(|i| 0.03 + i as f64 * 1e-4).collect(),
            dynamic_range_db: 60.0,
        }
    }

    #[test]
    fn contrast_ratio_cases() {
        let img = flat_image(200, 64, |_, _| 2.0);
        let cyst = CircleRegion { center_lateral_m: 0.0, center_depth_m: 0.04, radius_m: 0.002 };
        let bck = CircleRegion { center_lateral_m: 0.004, center_depth_m: 0.04, radius_m: 0.002 };
        assert!(contrast_ratio(&img, &cyst, &bck).unwrap().abs() < 1e-12);

        // cyst at one tenth the intensity: -20 dB, invariant to global scale
        for scale in [1.0, 37.5] {
            let img = flat_image(200, 64, |i, j| {
                let depth = 0.03 + i as f64 * 1e-4;
                let lateral = depth * ((j as f64 - 32.0) * 0.004).sin();
                let d2 = lateral * lateral + (depth - 0.04) * (depth - 0.04);
                if d2 <= 0.002 * 0.002 {
                    0.1 * scale
                } else {
                    scale
                }
            });
            let cr = contrast_ratio(&img, &cyst, &bck).unwrap();
            assert!((cr - -20.0).abs() < 0.5, "cr {cr}");
        }

        // empty region: radius far smaller than the pixel spacing, centered
        // between pixels
        let tiny =
            CircleRegion { center_lateral_m: 1.7e-5, center_depth_m: 0.040043, radius_m: 1e-9 };
        assert!(contrast_ratio(&img, &tiny, &bck).is_err());
    }

    #[test]
    fn gaussian_section_fwhm_matches_closed_form() {
        let sigma = 3.7;
        let coords: Vec<f64> = (0..2001).map(|k| (k as f64 - 1000.0) * 0.03).collect();
        let section: Vec<f64> =
            coords.iter().map(|x| (-x * x / (2.0 * sigma * sigma)).exp()).collect();
        let fwhm = fwhm_from_section(&section, &coords).unwrap();
        let expected = 2.0 * sigma * (2.0 * (10f64.powf(0.3)).ln()).sqrt();
        assert!((fwhm - expected).abs() < 1e-3, "fwhm {fwhm} vs {expected}");
    }

    #[test]
    fn delta_section_and_edge_peak() {
        let coords: Vec<f64> = (0..11).map(|k| k as f64).collect();
        let mut section = vec![0.0; 11];
        section[5] = 1.0;
        let w = fwhm_from_section(&section, &coords).unwrap();
        assert!(w > 0.0 && w <= 2.0, "delta-like width {w}");
        // symmetric: centered on the peak
        let mut edged = vec![0.0; 11];
        edged[0] = 1.0;
        assert!(matches!(
            fwhm_from_section(&edged, &coords),
            Err(Error::NotFound(_))
        ));
    }

    #[test]
    fn lateral_section_picks_nearest_row() {
        let img = flat_image(100, 8, |i, _| i as f64 + 1.0);
        let sec = lateral_cross_section(&img, 0.0312).unwrap();
        // depth axis starts at 0.03 with 0.1 mm steps; 31.2 mm -> row 12
        assert!(sec.iter().all(|v| *v == 13.0));
        assert!(lateral_cross_section(&img, 0.5).is_err());
    }

    #[test]
    fn image_assembly_and_raw_roundtrip() {
        let lines: Vec<Vec<f64>> = (0..5)
            .map(|j| (0..64).map(|k| ((k + j) as f64 * 0.3).sin()).collect())
            .collect();
        let angles: Vec<f64> = (0..5).map(|j| j as f64 * 0.01 - 0.02).collect();
        let img = BModeImage::from_lines(&lines, &angles, 1e-5, 100e6, 1540.0, 50.0).unwrap();
        assert_eq!(img.rows(), 64);
        assert_eq!(img.cols(), 5);
        assert_eq!(img.log_image.iter().flatten().cloned().fold(f64::MIN, f64::max), 0.0);

        let dir = std::env::temp_dir().join("cobeam-imaging-test");
        std::fs::create_dir_all(&dir).unwrap();
        let base = dir.join("img");
        write_raw_with_sidecar(&img, &base).unwrap();
        let back = read_raw_with_sidecar(&base).unwrap();
        assert_eq!(back.rows(), img.rows());
        assert_eq!(back.cols(), img.cols());
        for (a, b) in back.intensity.iter().flatten().zip(img.intensity.iter().flatten()) {
            assert!((a - b).abs() <= f32::EPSILON as f64 * b.abs().max(1.0));
        }
        write_pgm(&img, &dir.join("img.pgm")).unwrap();
        let pgm = std::fs::read(dir.join("img.pgm")).unwrap();
        assert!(pgm.starts_with(b"P5\n5 64\n255\n"));
        assert_eq!(pgm.len(), 12 + 5 * 64);
        std::fs::remove_dir_all(&dir).ok();
    }
}
