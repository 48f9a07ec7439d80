//! Attack economics against pairwise threshold verification.
//!
//! Usage: cargo run --release --example sybil_economics [group_size] [seed]

use popkit::sybilsim::{run_scenario, SybilScenario};

fn main() -> popkit::Result<()> {
    let mut args = std::env::args().skip(1);
    let g = args.next().map_or(2, |s| s.parse().expect("group size"));
    let seed = args.next().map_or(20_200_101, |s| s.parse().expect("seed"));
    let sc = SybilScenario {
        group_size: g,
        ..SybilScenario::baseline()
    };
    let start = std::time::Instant::now();
    let r = run_scenario(&sc, seed)?;
    let s = &r.summary;
    println!(
        "H={} S={} g={} theta={} W={}",
        sc.n_honest, sc.n_sybil, sc.group_size, sc.threshold, sc.window
    );
    println!(
        "advantage      {:.4} ± {:.4}",
        s.mean_advantage, s.advantage_stderr
    );
    println!(
        "minions/cycle  {:.2} ± {:.2}",
        s.mean_minions, s.minions_stderr
    );
    println!(
        "lucky fraction {:.6} ± {:.6} (exact {:.6})",
        s.mean_lucky_fraction, s.lucky_fraction_stderr, s.lucky_fraction_exact
    );
    for n in &s.notes {
        println!("note: {n}");
    }
    println!("elapsed {:.2?}", start.elapsed());
    Ok(())
}
