//! Minion cost as the attacker grows: it levels off below θ·H.
//!
//! Usage: cargo run --release --example plateau [seed]

use popkit::sybilsim::plateau_curve;

fn main() -> popkit::Result<()> {
    let seed = std::env::args()
        .nth(1)
        .map_or(popkit::cli::DEFAULT_SEED, |s| s.parse().expect("seed"));
    let h = 2000;
    let points = plateau_curve(h, 0.5, 2, &[200, 1000, 2000, 6000, 20_000], seed)?;
    println!(
        "{:>8} {:>10} {:>8} {:>10}",
        "sybils", "minions", "stderr", "exposed"
    );
    for p in &points {
        println!(
            "{:>8} {:>10.2} {:>8.2} {:>10.1}",
            p.sybils, p.minions, p.minions_stderr, p.exposed
        );
    }
    println!("ceiling θ·H = {}", points[0].ceiling);
    Ok(())
}
