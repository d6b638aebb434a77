//! Enumerates small straight-line programs and checks every swap of two
//! adjacent reads.
//!
//!     cargo run --release --example read_swap_sweep -- [threads] [events] [locations]

use std::time::Instant;

use memtrans::analysis::{check_sound_rr, sweep_programs, SweepBound};
use memtrans::models::builtin_model;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let arg = |k: usize, d: usize| std::env::args().nth(k).and_then(|s| s.parse().ok()).unwrap_or(d);
    let bound = SweepBound { threads: arg(1, 2), events: arg(2, 5), locations: arg(3, 2) };
    println!("{bound}: {} programs", sweep_programs(bound).len());
    for m in ["sc_rr", "sc"] {
        let t = Instant::now();
        let v = check_sound_rr(&builtin_model(m)?, bound)?;
        println!("{m}: {} counterexamples in {} effects ({:.1?})", v.counterexample_count, v.checked, t.elapsed());
        if let Some(f) = v.counterexamples.first() {
            println!("  first: {} / {}", f.subject, f.detail);
        }
    }
    Ok(())
}
