//! `cobeam metrics`: quality metrics on a previously written image.

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;
use serde::Serialize;

use cobeam::imaging::{contrast_ratio, fwhm_from_section, read_raw_with_sidecar, CircleRegion};

use crate::config::config_err;
use crate::manifest::write_atomic;

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Image basename as written by `beamform` (reads <image>.f32 + <image>.json).
    #[arg(long)]
    pub image: PathBuf,
    /// Cyst region center, lateral mm.
    #[arg(long, requires_all = ["cyst_depth_mm", "cyst_radius_mm", "bck_lateral_mm", "bck_depth_mm"])]
    pub cyst_lateral_mm: Option<f64>,
    #[arg(long)]
    pub cyst_depth_mm: Option<f64>,
    #[arg(long)]
    pub cyst_radius_mm: Option<f64>,
    /// Background region center, lateral mm (radius defaults to the cyst's).
    #[arg(long)]
    pub bck_lateral_mm: Option<f64>,
    #[arg(long)]
    pub bck_depth_mm: Option<f64>,
    #[arg(long)]
    pub bck_radius_mm: Option<f64>,
    /// Depth of a lateral cross-section for FWHM, mm.
    #[arg(long)]
    pub section_depth_mm: Option<f64>,
    /// Write the metrics JSON here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct MetricsReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    contrast_ratio_db: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lateral_fwhm_mm: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    section_depth_mm: Option<f64>,
}

pub fn run(args: &MetricsArgs) -> Result<()> {
    let img = read_raw_with_sidecar(&args.image)?;
    let mut report = MetricsReport {
        contrast_ratio_db: None,
        lateral_fwhm_mm: None,
        section_depth_mm: args.section_depth_mm,
    };

    if let (Some(cx), Some(cz), Some(cr)) =
        (args.cyst_lateral_mm, args.cyst_depth_mm, args.cyst_radius_mm)
    {
        let (bx, bz) = match (args.bck_lateral_mm, args.bck_depth_mm) {
            (Some(bx), Some(bz)) => (bx, bz),
            _ => bail!(config_err("contrast ratio needs --bck-lateral-mm and --bck-depth-mm")),
        };
        let br = args.bck_radius_mm.unwrap_or(cr);
        let cyst = CircleRegion {
            center_lateral_m: cx * 1e-3,
            center_depth_m: cz * 1e-3,
            radius_m: cr * 1e-3,
        };
        let bck = CircleRegion {
            center_lateral_m: bx * 1e-3,
            center_depth_m: bz * 1e-3,
            radius_m: br * 1e-3,
        };
        report.contrast_ratio_db = Some(contrast_ratio(&img, &cyst, &bck)?);
    }

    if let Some(depth_mm) = args.section_depth_mm {
        let section = cobeam::imaging::lateral_cross_section(&img, depth_mm * 1e-3)?;
        let row = img
            .depth_axis_m
            .iter()
            .enumerate()
            .min_by(|a, b| {
                (a.1 - depth_mm * 1e-3).abs().total_cmp(&(b.1 - depth_mm * 1e-3).abs())
            })
            .map(|(i, _)| i)
            .unwrap();
        let depth = img.depth_axis_m[row];
        let lat_mm: Vec<f64> =
            img.line_angles_rad.iter().map(|a| depth * a.sin() * 1e3).collect();
        report.lateral_fwhm_mm = Some(fwhm_from_section(&section, &lat_mm)?);
    }

    let json = serde_json::to_vec_pretty(&report)?;
    match &args.out {
        Some(path) => {
            write_atomic(path, &json)?;
            println!("metrics -> {}", path.display());
        }
        None => println!("{}", String::from_utf8_lossy(&json)),
    }
    Ok(())
}
