//! QBER and key rate against mean photon number, written to CSV.
//!
//!     cargo run --example qber_vs_mu -- [out.csv]

use std::path::PathBuf;

use lm05::experiments::{emit_csv, scan_mu, ExperimentConfig, ScanRange};

fn main() -> lm05::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from);
    let cfg = ExperimentConfig {
        mu_range: ScanRange::new(0.05, 1.7, 0.05)?,
        ..ExperimentConfig::default()
    };
    println!("{}", cfg.dark_count_summary());
    let pts = scan_mu(&cfg)?;
    println!("{:>6} {:>9} {:>9} {:>12}", "mu", "E_All", "beta", "R_PNS bit/s");
    for p in &pts {
        println!("{:>6.2} {:>9.5} {:>9.4} {:>12.3}", p.x, p.e_all, p.beta, p.r_pns_per_s);
    }
    if let Some(path) = out {
        emit_csv(&pts, &path)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
