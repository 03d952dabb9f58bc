//! `cobeam design`: build or optimize a sparse array design.

use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;

use cobeam::geometry::{
    minimize_aperture, optimize_scoba, optimize_scobar, DesignVariant, SparseDesign,
};

use crate::config::config_err;
use crate::manifest::write_atomic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum OptimizeTarget {
    Elements,
    Aperture,
}

#[derive(Debug, Args)]
pub struct DesignArgs {
    /// Half element count N; the reference full array has 2N-1 elements.
    pub n: u32,
    /// Sparse design family.
    #[arg(value_parser = parse_variant)]
    pub variant: DesignVariant,
    /// Inner block parameter (requires --b; A*B must equal N).
    #[arg(long, requires = "b", conflicts_with = "optimize")]
    pub a: Option<u32>,
    /// Outer block parameter.
    #[arg(long, requires = "a", conflicts_with = "optimize")]
    pub b: Option<u32>,
    /// Pick A and B by minimizing element count or physical aperture.
    #[arg(long, value_enum)]
    pub optimize: Option<OptimizeTarget>,
    /// Where to write the design JSON (default: <variant>_n<N>_a<A>_b<B>.json).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_variant(s: &str) -> Result<DesignVariant, String> {
    match s.to_ascii_lowercase().as_str() {
        "scoba" => Ok(DesignVariant::Scoba),
        "scobar" => Ok(DesignVariant::Scobar),
        other => Err(format!("unknown variant '{other}' (expected scoba or scobar)")),
    }
}

pub fn run(args: &DesignArgs) -> Result<()> {
    let (a, b) = match (args.a, args.b, args.optimize) {
        (Some(a), Some(b), None) => (a, b),
        (None, None, Some(OptimizeTarget::Elements)) => {
            let optimum = match args.variant {
                DesignVariant::Scoba => optimize_scoba(args.n)?,
                DesignVariant::Scobar => optimize_scobar(args.n)?,
            };
            if optimum.degenerate {
                println!(
                    "note: N = {} is prime; the only factorization is the fully populated \
                     array (A, B) = {:?}",
                    args.n, optimum.pairs[0]
                );
            } else if optimum.pairs.len() > 1 {
                println!("optimal (A, B) pairs: {:?}; using the canonical first", optimum.pairs);
            }
            optimum.pairs[0]
        }
        (None, None, Some(OptimizeTarget::Aperture)) => match minimize_aperture(args.n) {
            Ok(pair) => pair,
            Err(e) => bail!(config_err(format!(
                "{e}: aperture minimization needs a composite N; \
                 a prime N admits only the fully populated array"
            ))),
        },
        _ => bail!(config_err("give either --a A --b B or --optimize")),
    };

    let design = SparseDesign::build(args.variant, args.n, a, b)?;
    let full = 2 * args.n as usize - 1;
    let doc = design.to_document();
    println!("{} design for a {}-element reference array (N = {})", design.variant, full, args.n);
    println!("  A = {a}, B = {b}");
    println!(
        "  elements: {} of {} ({:.0}% of the full array)",
        design.element_count,
        full,
        design.element_count as f64 / full as f64 * 100.0
    );
    println!("  positions: {:?}", design.elements.positions());
    println!(
        "  aperture index span: {} (full array: {})",
        design.elements.span(),
        2 * (args.n as i64 - 1)
    );
    println!(
        "  sum co-array: {} positions spanning [{}, {}]",
        doc.sumset.len(),
        doc.sumset.first().unwrap(),
        doc.sumset.last().unwrap()
    );

    let out = args.out.clone().unwrap_or_else(|| {
        PathBuf::from(format!("{}_n{}_a{}_b{}.json", design.variant, args.n, a, b))
    });
    write_atomic(&out, &serde_json::to_vec_pretty(&doc)?)?;
    println!("  wrote {}", out.display());
    Ok(())
}
