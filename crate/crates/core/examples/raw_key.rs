//! Sift a raw key from per-trial records and compare both parties' copies.

use lm05::link::{ChannelSpec, SystemParams};
use lm05::sim::{extract_raw_key, hamming_distance, SimConfig, Simulator};

fn main() -> lm05::Result<()> {
    let cfg = SimConfig::new(0.15, 200_000, 42, SystemParams::paper_defaults(), ChannelSpec::new(1.14)?);
    let sim = Simulator::new(cfg)?;
    let records = sim.records();
    let (bob, alice) = extract_raw_key(&records);
    let errors = hamming_distance(&bob, &alice);

    let bits = |k: &[u8]| k.iter().take(48).map(|b| char::from(b'0' + b)).collect::<String>();
    println!("{} pulses -> {} raw key bits, {} disagree", records.len(), bob.len(), errors);
    println!("bob   {}", bits(&bob));
    println!("alice {}", bits(&alice));
    if let Some(first) = records.iter().find(|r| r.is_error()) {
        println!("first error: {first:?}");
    }
    Ok(())
}
