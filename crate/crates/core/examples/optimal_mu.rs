//! Rate-maximizing mean photon number versus channel loss.

use lm05::experiments::{report_optimal_mu, ExperimentConfig};

fn main() -> lm05::Result<()> {
    let cfg = ExperimentConfig::default();
    for l_c in [0.0, 1.14, 2.0, 3.0, 4.0, 5.0, 5.68, 6.0] {
        let r = report_optimal_mu(&cfg, l_c)?;
        match r.mu {
            Some(mu) => println!("l_C = {l_c:>4.2} dB  mu* = {mu:.3}  R = {:.2} bit/s", r.r_pns_per_s),
            None => println!("l_C = {l_c:>4.2} dB  no secure mu"),
        }
    }
    Ok(())
}
