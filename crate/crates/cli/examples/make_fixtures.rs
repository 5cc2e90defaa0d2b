//! Regenerates the synthetic fixtures in `fixtures/`.
//!
//! `cargo run -p cpseg --example make_fixtures`

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// A short binary win/loss record with one stretch of elevated success.
fn streakiness() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(1996);
    let plan = [(34, 0.12), (38, 0.45), (28, 0.18)];
    let mut out = String::new();
    for (len, prob) in plan {
        for _ in 0..len {
            writeln!(out, "{}", u8::from(rng.random_bool(prob))).unwrap();
        }
    }
    out
}

/// A long piecewise-constant series with shifts of several noise standard
/// deviations, at the level and noise scale of nuclear-magnetic-response logs.
fn well_log() -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(4050);
    let sigma = 2330.0;
    let noise = Normal::new(0.0, sigma).unwrap();
    let n = 4050;
    let mut out = String::new();
    let mut level: f64 = 115_000.0;
    let mut written = 0;
    while written < n {
        let len = rng.random_range(90..260).min(n - written);
        for _ in 0..len {
            writeln!(out, "{:.1}", level + noise.sample(&mut rng)).unwrap();
        }
        written += len;
        let jump = rng.random_range(4.0..8.0) * sigma;
        level += if level > 125_000.0 || (level > 105_000.0 && rng.random_bool(0.5)) {
            -jump
        } else {
            jump
        };
    }
    out
}

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    std::fs::write(dir.join("streakiness_synthetic.txt"), streakiness()).unwrap();
    std::fs::write(dir.join("well_log_synthetic.txt"), well_log()).unwrap();
}
