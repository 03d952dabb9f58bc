//! `cobeam beampattern`: analytic patterns and lobe metrics per method.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;
use serde::Serialize;

use cobeam::beamform::{resolve_apodization, Method};
use cobeam::beampattern::{
    bp_weighted, coarray_pattern, first_zero, lobe_metrics, AngularGrid, BeamPattern,
    DEFAULT_GRID_POINTS,
};

use crate::config::{config_err, RunConfig};
use crate::manifest::{write_atomic, Manifest};

#[derive(Debug, Args)]
pub struct BeampatternArgs {
    /// Run configuration (imaging geometry, design, apodization).
    #[arg(long)]
    pub config: PathBuf,
    /// Comma-separated methods (default: das,coba plus the sparse methods
    /// when the config carries a design).
    #[arg(long, value_delimiter = ',')]
    pub methods: Vec<Method>,
    /// Grid points over sin(theta) in [-1, 1].
    #[arg(long, default_value_t = DEFAULT_GRID_POINTS)]
    pub grid: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Serialize)]
struct PatternMetrics {
    fwhm_sin_theta: f64,
    psl_db: f64,
    first_zero_sin_theta: Option<f64>,
}

fn pattern_csv(bp: &BeamPattern) -> String {
    let db = bp.magnitude_db_normalized();
    let mut out = String::from("sin_theta,magnitude_db,real,imag\n");
    for ((u, v), d) in bp.grid.values().iter().zip(&bp.values).zip(&db) {
        let _ = writeln!(out, "{u},{d},{},{}", v.re, v.im);
    }
    out
}

pub fn run(args: &BeampatternArgs, argv: Vec<String>) -> Result<()> {
    let (config, config_bytes) = RunConfig::load(&args.config)?;
    let imaging = config.imaging_config()?;
    let n = imaging.element_half_count;
    let wavelength = imaging.wavelength_m();
    let grid = AngularGrid::uniform(args.grid)?;

    let methods: Vec<Method> = if args.methods.is_empty() {
        let mut m = vec![Method::Das, Method::Coba];
        if config.design.is_some() {
            m.push(Method::Scoba);
            m.push(Method::Scobar);
        }
        m
    } else {
        args.methods.clone()
    };

    std::fs::create_dir_all(&args.out_dir)?;
    let mut manifest = Manifest::new(argv);
    manifest.config_sha256 = Some(crate::manifest::sha256_hex(&config_bytes));
    manifest.record_input(&args.config)?;

    let mut metrics: BTreeMap<String, PatternMetrics> = BTreeMap::new();
    for method in methods {
        let bp = match method {
            Method::Das => {
                let full = imaging.full_array()?;
                let weights = resolve_apodization(
                    method,
                    config.apodization_for(method),
                    n,
                    &full,
                )?;
                bp_weighted(&full, &weights, &grid, wavelength, imaging.pitch_m)?
            }
            Method::Coba => {
                let full = imaging.full_array()?;
                let desired = resolve_apodization(
                    method,
                    config.apodization_for(method),
                    n,
                    &full,
                )?;
                coarray_pattern(&full, &desired, &grid, wavelength, imaging.pitch_m)?
            }
            Method::Scoba | Method::Scobar => {
                let design = config
                    .design_for(method)?
                    .ok_or_else(|| config_err(format!("method '{method}' needs a design")))?;
                let desired = resolve_apodization(
                    method,
                    config.apodization_for(method),
                    n,
                    &design.elements,
                )?;
                coarray_pattern(&design.elements, &desired, &grid, wavelength, imaging.pitch_m)?
            }
        };
        let lobes = lobe_metrics(&bp)?;
        let zero = match first_zero(&bp) {
            Ok(z) => Some(z),
            Err(cobeam::Error::NotFound(_)) => None,
            Err(e) => bail!(e),
        };
        metrics.insert(
            method.to_string(),
            PatternMetrics {
                fwhm_sin_theta: lobes.fwhm_sin_theta,
                psl_db: lobes.psl_db,
                first_zero_sin_theta: zero,
            },
        );
        let path = args.out_dir.join(format!("{method}_pattern.csv"));
        write_atomic(&path, pattern_csv(&bp).as_bytes())?;
        manifest.record_output(&path)?;
        println!(
            "{method}: fwhm {:.5} sin(theta), psl {:.2} dB, first zero {} -> {}",
            lobes.fwhm_sin_theta,
            lobes.psl_db,
            zero.map_or("none".to_string(), |z| format!("{z:.5}")),
            path.display()
        );
    }

    let metrics_path = args.out_dir.join("pattern_metrics.json");
    write_atomic(&metrics_path, &serde_json::to_vec_pretty(&metrics)?)?;
    manifest.record_output(&metrics_path)?;
    manifest.write(&args.out_dir)?;
    Ok(())
}
