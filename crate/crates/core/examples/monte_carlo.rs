//! Photon-level simulation next to the analytic prediction.
//!
//!     cargo run --release --example monte_carlo -- [trials] [seed]

use lm05::link::{ChannelSpec, SystemParams};
use lm05::rate::{p_all, qber_all, OperatingPoint};
use lm05::sim::{run_simulation, SimConfig};

fn main() -> lm05::Result<()> {
    let mut args = std::env::args().skip(1);
    let trials = args.next().and_then(|s| s.parse().ok()).unwrap_or(2_000_000);
    let seed = args.next().and_then(|s| s.parse().ok()).unwrap_or(1);
    let params = SystemParams::paper_defaults();

    for (mu, l_c) in [(0.15, 1.14), (0.5, 1.14), (0.15, 5.68)] {
        let channel = ChannelSpec::new(l_c)?;
        let res = run_simulation(&SimConfig::new(mu, trials, seed, params, channel))?;
        let op = OperatingPoint::new(mu, params, channel)?;
        println!("mu = {mu}, l_C = {l_c} dB, {trials} pulses");
        println!(
            "  P_All  {:.4e} ± {:.1e}   model {:.4e}",
            res.empirical_p_all.value,
            res.empirical_p_all.stderr,
            p_all(&op)
        );
        println!(
            "  QBER   {:.5} ± {:.5}   model {:.5}   ({} errors / {} bits, {} double clicks)",
            res.empirical_qber.value,
            res.empirical_qber.stderr,
            qber_all(&op)?,
            res.errors,
            res.detected,
            res.double_clicks
        );
    }
    Ok(())
}
