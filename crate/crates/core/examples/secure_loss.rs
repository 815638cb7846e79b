//! Maximum tolerable channel loss, and the rate curve that leads up to it.

use lm05::experiments::{report_max_secure_loss, scan_loss_at, ExperimentConfig};
use lm05::link::Preset;

fn main() -> lm05::Result<()> {
    for preset in Preset::ALL {
        let cfg = ExperimentConfig {
            params: preset.params(),
            ..ExperimentConfig::default()
        };
        let r = report_max_secure_loss(&cfg)?;
        println!(
            "{preset}: secure up to {:.3} dB at mu = {} (E_All {:.4}, beta {:.3})",
            r.max_secure_loss_db, r.mu, r.e_all, r.beta
        );
        let grid: Vec<f64> = (0..=8).map(f64::from).collect();
        for p in scan_loss_at(&cfg, &grid)? {
            println!("  {:>4.1} dB  raw {:>9.1} bit/s  PNS-secure {:>8.2} bit/s", p.x, p.r_raw_per_s, p.r_pns_per_s);
        }
    }
    Ok(())
}
