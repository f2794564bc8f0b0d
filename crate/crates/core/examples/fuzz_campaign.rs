//! Generates random programs and classifies each one. Takes an optional
//! count, seed and dyn bias on the command line.

use gsp::harness::{fuzz, generate_program, GenConfig, DEFAULT_BUDGET};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let count = args.first().map_or(2000, |s| s.parse().expect("count"));
    let seed = args.get(1).map_or(1, |s| s.parse().expect("seed"));
    let bias = args.get(2).map_or(0.5, |s| s.parse().expect("bias"));

    println!("sample program for seed {seed}:\n{}", generate_program(&GenConfig::new(seed, bias)));
    let report = fuzz(count, seed, bias, DEFAULT_BUDGET);
    print!("{report}");
}
