//! Overall detection efficiency as a function of one-way channel loss.

use lm05::link::{channel_transmission, eta_bob, eta_overall, ChannelSpec, Preset};

fn main() -> lm05::Result<()> {
    for preset in Preset::ALL {
        let p = preset.params();
        println!("{preset}: l_A = {} dB, l_B = {} dB, eta_bob = {:.5}", p.l_a, p.l_b, eta_bob(&p));
        for l_c in [0.0, 1.14, 3.0, 5.68, 8.0] {
            let c = ChannelSpec::new(l_c)?;
            println!(
                "  l_C = {l_c:>5.2} dB  round trip {:.5}  eta = {:.6}",
                channel_transmission(&c),
                eta_overall(&p, &c)
            );
        }
    }
    Ok(())
}
