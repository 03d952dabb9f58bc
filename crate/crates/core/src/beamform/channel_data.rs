//! Per-element RF traces and their binary file format.
//!
//! Layout (little-endian): magic `CBK1`, `u32` element count, `u32` sample
//! count, `f64` sampling frequency, `f64` center frequency, `f64` speed of
//! sound, `f64` pitch, `f64` t0, the `i32` element positions, then `f32`
//! samples row-major `[element][time]`.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use super::ImagingConfig;
use crate::error::{Error, Result};
use crate::geometry::PositionSet;

const MAGIC: &[u8; 4] = b"CBK1";

/// Sampled RF traces for one acquisition, one row per element.
#[derive(Debug, Clone)]
pub struct ChannelData {
    pub samples: Vec<Vec<f64>>,
    pub element_positions: PositionSet,
    /// Time of the first sample, seconds after transmit.
    pub t0_s: f64,
    pub config: ImagingConfig,
}

impl ChannelData {
    pub fn sample_count(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn validate(&self) -> Result<()> {
        if self.samples.len() != self.element_positions.len() {
            return Err(Error::invalid(format!(
                "channel data has {} rows for {} element positions",
                self.samples.len(),
                self.element_positions.len()
            )));
        }
        let nsamp = self.sample_count();
        if self.samples.iter().any(|r| r.len() != nsamp) {
            return Err(Error::invalid("channel data rows have unequal lengths"));
        }
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        self.validate()?;
        let mut w = BufWriter::new(File::create(path)?);
        w.write_all(MAGIC)?;
        w.write_u32::<LittleEndian>(self.element_positions.len() as u32)?;
        w.write_u32::<LittleEndian>(self.sample_count() as u32)?;
        w.write_f64::<LittleEndian>(self.config.sampling_frequency_hz)?;
        w.write_f64::<LittleEndian>(self.config.center_frequency_hz)?;
        w.write_f64::<LittleEndian>(self.config.speed_of_sound_mps)?;
        w.write_f64::<LittleEndian>(self.config.pitch_m)?;
        w.write_f64::<LittleEndian>(self.t0_s)?;
        for &p in self.element_positions.positions() {
            let p = i32::try_from(p)
                .map_err(|_| Error::invalid(format!("position {p} exceeds the i32 file format")))?;
            w.write_i32::<LittleEndian>(p)?;
        }
        for row in &self.samples {
            for &v in row {
                w.write_f32::<LittleEndian>(v as f32)?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Read a file written by [`ChannelData::write`]. The acquisition fields
    /// in the header must agree with `config` (which also supplies the scan
    /// geometry the file does not carry).
    pub fn read(path: &Path, config: &ImagingConfig) -> Result<Self> {
        let mut r = BufReader::new(File::open(path)?);
        let mut magic = [0u8; 4];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format(format!(
                "{}: bad magic {magic:?}",
                path.display()
            )));
        }
        let elements = r.read_u32::<LittleEndian>()? as usize;
        let nsamp = r.read_u32::<LittleEndian>()? as usize;
        let fs = r.read_f64::<LittleEndian>()?;
        let f0 = r.read_f64::<LittleEndian>()?;
        let c = r.read_f64::<LittleEndian>()?;
        let pitch = r.read_f64::<LittleEndian>()?;
        let t0 = r.read_f64::<LittleEndian>()?;

        let close = |a: f64, b: f64| (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0);
        for (name, file_v, cfg_v) in [
            ("sampling frequency", fs, config.sampling_frequency_hz),
            ("center frequency", f0, config.center_frequency_hz),
            ("speed of sound", c, config.speed_of_sound_mps),
            ("pitch", pitch, config.pitch_m),
        ] {
            if !close(file_v, cfg_v) {
                return Err(Error::Format(format!(
                    "{}: {name} in file ({file_v}) disagrees with config ({cfg_v})",
                    path.display()
                )));
            }
        }

        let mut positions = Vec::with_capacity(elements);
        for _ in 0..elements {
            positions.push(i64::from(r.read_i32::<LittleEndian>()?));
        }
        let element_positions = PositionSet::new(positions.clone());
        if element_positions.len() != elements {
            return Err(Error::Format(format!(
                "{}: duplicate element positions",
                path.display()
            )));
        }
        // rows are stored in position order
        if positions != element_positions.positions() {
            return Err(Error::Format(format!(
                "{}: element positions not sorted",
                path.display()
            )));
        }

        let mut samples = Vec::with_capacity(elements);
        for _ in 0..elements {
            let mut row = Vec::with_capacity(nsamp);
            for _ in 0..nsamp {
                row.push(f64::from(r.read_f32::<LittleEndian>()?));
            }
            samples.push(row);
        }
        Ok(ChannelData {
            samples,
            element_positions: element_positions.with_pitch(pitch),
            t0_s: t0,
            config: config.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::make_ula;

    fn config() -> ImagingConfig {
        ImagingConfig {
            speed_of_sound_mps: 1540.0,
            center_frequency_hz: 3.5e6,
            sampling_frequency_hz: 100e6,
            pitch_m: 220e-6,
            element_half_count: 3,
            scan_angles_rad: vec![-0.1, 0.0, 0.1],
            depth_range_m: (0.02, 0.05),
            dynamic_range_db: 60.0,
        }
    }

    #[test]
    fn roundtrip_preserves_f32_samples() {
        let cfg = config();
        let arr = make_ula(3).unwrap();
        let samples: Vec<Vec<f64>> = (0..5)
            .map(|e| (0..17).map(|k| f64::from((e * 31 + k) as f32) * 0.125 - 3.0).collect())
            .collect();
        let data = ChannelData {
            samples: samples.clone(),
            element_positions: arr,
            t0_s: 1.25e-5,
            config: cfg.clone(),
        };
        let dir = std::env::temp_dir().join("cobeam-chan-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("roundtrip.cbk");
        data.write(&path).unwrap();
        let back = ChannelData::read(&path, &cfg).unwrap();
        assert_eq!(back.sample_count(), 17);
        assert_eq!(back.t0_s, 1.25e-5);
        assert_eq!(back.element_positions.positions(), &[-2, -1, 0, 1, 2]);
        // The chosen values are exactly representable in f32.
        assert_eq!(back.samples, samples);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn header_mismatch_is_reported() {
        let cfg = config();
        let arr = make_ula(3).unwrap();
        let data = ChannelData {
            samples: vec![vec![0.0; 4]; 5],
            element_positions: arr,
            t0_s: 0.0,
            config: cfg.clone(),
        };
        let dir = std::env::temp_dir().join("cobeam-chan-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("mismatch.cbk");
        data.write(&path).unwrap();
        let mut other = cfg;
        other.pitch_m = 300e-6;
        let err = ChannelData::read(&path, &other).unwrap_err();
        assert!(matches!(err, Error::Format(_)));
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn bad_magic_is_rejected() {
        let dir = std::env::temp_dir().join("cobeam-chan-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("garbage.cbk");
        std::fs::write(&path, b"NOPE").unwrap();
        assert!(matches!(
            ChannelData::read(&path, &config()),
            Err(Error::Format(_))
        ));
        std::fs::remove_file(&path).ok();
    }
}
