//! `cobeam beamform`: form B-mode images from channel data, one per method,
//! with default quality metrics when the config describes the phantom.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Result};
use clap::Args;
use serde::Serialize;

use cobeam::beamform::{beamform_lines, resolve_apodization, ChannelData, Method};
use cobeam::imaging::{
    contrast_ratio, fwhm_from_section, write_pgm, write_raw_with_sidecar, BModeImage,
    CircleRegion,
};

use crate::config::{config_err, RunConfig};
use crate::manifest::{produce_atomic, sha256_hex, write_atomic, Manifest};

#[derive(Debug, Args)]
pub struct BeamformArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Channel-data file from `cobeam simulate` (or compatible hardware dump).
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out_dir: PathBuf,
    /// Run DAS, COBA, SCOBA and SCOBAR side by side on the same data.
    #[arg(long)]
    pub all_methods: bool,
}

#[derive(Debug, Serialize)]
struct MethodMetrics {
    #[serde(skip_serializing_if = "Option::is_none")]
    lateral_fwhm_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    axial_fwhm_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    contrast_ratio_db: Option<f64>,
}

fn lateral_fwhm_at(img: &BModeImage, depth_m: f64) -> Option<f64> {
    let rows: Vec<usize> = img
        .depth_axis_m
        .iter()
        .enumerate()
        .filter(|(_, d)| (**d - depth_m).abs() < 0.5e-3)
        .map(|(i, _)| i)
        .collect();
    let best = rows.into_iter().max_by(|a, b| {
        let ma = img.intensity[*a].iter().cloned().fold(0.0, f64::max);
        let mb = img.intensity[*b].iter().cloned().fold(0.0, f64::max);
        ma.total_cmp(&mb)
    })?;
    let depth = img.depth_axis_m[best];
    let lat_mm: Vec<f64> = img.line_angles_rad.iter().map(|a| depth * a.sin() * 1e3).collect();
    fwhm_from_section(&img.intensity[best], &lat_mm).ok()
}

fn axial_fwhm_at(img: &BModeImage, depth_m: f64) -> Option<f64> {
    let center = img.cols() / 2;
    let keep: Vec<usize> = img
        .depth_axis_m
        .iter()
        .enumerate()
        .filter(|(_, d)| (**d - depth_m).abs() < 3e-3)
        .map(|(i, _)| i)
        .collect();
    if keep.len() < 3 {
        return None;
    }
    let section: Vec<f64> = keep.iter().map(|i| img.intensity[*i][center]).collect();
    let coords: Vec<f64> = keep.iter().map(|i| img.depth_axis_m[*i] * 1e3).collect();
    fwhm_from_section(&section, &coords).ok()
}

fn default_metrics(config: &RunConfig, img: &BModeImage) -> MethodMetrics {
    let mut out =
        MethodMetrics { lateral_fwhm_mm: None, axial_fwhm_mm: None, contrast_ratio_db: None };
    let (focus_r, _) = config.transmit_focus_si();
    let section = config.phantom.clone().unwrap_or_default();
    if !section.scatterers.is_empty() {
        out.lateral_fwhm_mm = lateral_fwhm_at(img, focus_r);
        out.axial_fwhm_mm = axial_fwhm_at(img, focus_r);
    }
    if let Some(cyst) = &section.cyst {
        // inner circle of half the cyst radius; background circle of the
        // same size at the same depth, offset laterally by three radii
        let inner_r = cyst.radius_mm / 2.0 * 1e-3;
        let (cx, cz) = (cyst.center_mm[0] * 1e-3, cyst.center_mm[1] * 1e-3);
        let cyst_region =
            CircleRegion { center_lateral_m: cx, center_depth_m: cz, radius_m: inner_r };
        let bck_region = CircleRegion {
            center_lateral_m: cx + 3.0 * inner_r,
            center_depth_m: cz,
            radius_m: inner_r,
        };
        out.contrast_ratio_db = contrast_ratio(img, &cyst_region, &bck_region).ok();
    }
    out
}

fn write_lines_f32(path: &Path, lines: &[Vec<f64>]) -> Result<()> {
    let mut bytes = Vec::with_capacity(lines.len() * lines.first().map_or(0, Vec::len) * 4);
    for line in lines {
        for v in line {
            bytes.extend_from_slice(&(*v as f32).to_le_bytes());
        }
    }
    write_atomic(path, &bytes)?;
    Ok(())
}

pub fn run(args: &BeamformArgs, argv: Vec<String>) -> Result<()> {
    let (config, config_bytes) = RunConfig::load(&args.config)?;
    let imaging = config.imaging_config()?;
    let data = ChannelData::read(&args.data, &imaging)?;

    let methods: Vec<Method> = if args.all_methods {
        vec![Method::Das, Method::Coba, Method::Scoba, Method::Scobar]
    } else {
        match config.method {
            Some(m) => vec![m],
            None => bail!(config_err("config has no 'method' and --all-methods not given")),
        }
    };

    std::fs::create_dir_all(&args.out_dir)?;
    let mut manifest = Manifest::new(argv);
    manifest.config_sha256 = Some(sha256_hex(&config_bytes));
    manifest.record_input(&args.config)?;
    manifest.record_input(&args.data)?;
    if let Some(section) = &config.phantom {
        manifest.seeds.push(section.seed);
        if let Some(cyst) = &section.cyst {
            manifest.seeds.push(cyst.seed);
        }
    }

    let mut metrics: BTreeMap<String, MethodMetrics> = BTreeMap::new();
    for method in methods {
        let design = config.design_for(method)?;
        let geometry = match &design {
            Some(d) => d.elements.clone(),
            None => imaging.full_array()?,
        };
        let desired = resolve_apodization(
            method,
            config.apodization_for(method),
            imaging.element_half_count,
            &geometry,
        )?;
        let filter = config.filter_spec();
        let lines = beamform_lines(&data, method, design.as_ref(), &desired, &filter)?;
        let img = BModeImage::from_lines(
            &lines,
            &imaging.scan_angles_rad,
            data.t0_s,
            imaging.sampling_frequency_hz,
            imaging.speed_of_sound_mps,
            imaging.dynamic_range_db,
        )?;

        let lines_path = args.out_dir.join(format!("{method}_lines.f32"));
        write_lines_f32(&lines_path, &lines)?;
        manifest.record_output(&lines_path)?;

        let pgm_path = args.out_dir.join(format!("{method}.pgm"));
        produce_atomic(&pgm_path, |tmp| Ok(write_pgm(&img, tmp)?))?;
        manifest.record_output(&pgm_path)?;

        // raw intensity + sidecar (two files sharing a basename)
        let base = args.out_dir.join(method.to_string());
        let tmp_base = args.out_dir.join(format!(".tmp-{method}"));
        write_raw_with_sidecar(&img, &tmp_base)?;
        for ext in ["f32", "json"] {
            std::fs::rename(tmp_base.with_extension(ext), base.with_extension(ext))?;
        }
        manifest.record_output(&base.with_extension("f32"))?;
        manifest.record_output(&base.with_extension("json"))?;

        let m = default_metrics(&config, &img);
        println!(
            "{method}: {} lines x {} samples -> {}",
            img.cols(),
            img.rows(),
            pgm_path.display()
        );
        metrics.insert(method.to_string(), m);
    }

    let metrics_path = args.out_dir.join("metrics.json");
    write_atomic(&metrics_path, &serde_json::to_vec_pretty(&metrics)?)?;
    manifest.record_output(&metrics_path)?;
    manifest.write(&args.out_dir)?;
    println!("metrics -> {}", metrics_path.display());
    Ok(())
}
