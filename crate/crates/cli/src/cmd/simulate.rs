//! `cobeam simulate`: synthesize channel data from the config's phantom.

use std::path::PathBuf;

use anyhow::Result;
use clap::Args;

use cobeam::simulate::generate_channel_data;

use crate::config::RunConfig;
use crate::manifest::{produce_atomic, sha256_hex, Manifest};

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Output channel-data file.
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &SimulateArgs, argv: Vec<String>) -> Result<()> {
    let (config, config_bytes) = RunConfig::load(&args.config)?;
    let imaging = config.imaging_config()?;
    let phantom = config.phantom(&imaging)?;
    let pulse = config.pulse_samples()?;
    let focus = config.transmit_focus_si();
    let sim = generate_channel_data(
        &imaging,
        &phantom,
        &pulse,
        focus,
        config.spreading_1_over_r,
    )?;
    if sim.skipped_scatterers > 0 {
        eprintln!(
            "warning: {} scatterer(s) outside the depth range were skipped",
            sim.skipped_scatterers
        );
    }
    if let Some(dir) = args.out.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir)?;
        }
    }
    produce_atomic(&args.out, |tmp| Ok(sim.data.write(tmp)?))?;

    let mut manifest = Manifest::new(argv);
    manifest.config_sha256 = Some(sha256_hex(&config_bytes));
    manifest.record_input(&args.config)?;
    manifest.record_output(&args.out)?;
    manifest.seeds.push(phantom.seed);
    if let Some(section) = &config.phantom {
        if let Some(cyst) = &section.cyst {
            manifest.seeds.push(cyst.seed);
        }
    }
    let dir = args.out.parent().map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
    manifest.write(&dir)?;

    println!(
        "simulated {} elements x {} samples ({} scatterers) -> {}",
        sim.data.samples.len(),
        sim.data.sample_count(),
        phantom.scatterers.len(),
        args.out.display()
    );
    Ok(())
}
