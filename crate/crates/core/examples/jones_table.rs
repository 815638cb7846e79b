//! Print where every source / PC1 / flipper setting ends up.

use lm05::optics::{trace_state, Source};

fn main() {
    println!("{:<5} {:<4} {:<8} {:>8} {:>8}  detector", "src", "pc1", "flipper", "sent", "back");
    for src in [Source::Src1, Source::Src2] {
        for pc1 in [false, true] {
            for flip in [false, true] {
                let t = trace_state(src, pc1, flip);
                println!(
                    "{:<5} {:<4} {:<8} {:>8} {:>8}  {:?}",
                    format!("{src:?}"),
                    if pc1 { "on" } else { "off" },
                    if flip { "on" } else { "off" },
                    t.prepared.to_string(),
                    t.returned.to_string(),
                    t.detector
                );
            }
        }
    }
}
