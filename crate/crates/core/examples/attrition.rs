//! Prints the per-phase attrition of the default pipeline over a few seeds.

use qkdrand_core::qkd::{run_pipeline, ChannelConfig, PipelineConfig};

fn main() {
    let flip: f64 = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0.03);
    let seeds: u64 = std::env::args().nth(2).and_then(|s| s.parse().ok()).unwrap_or(20);
    let mut ratio_sum = 0.0;
    let mut clean = 0;
    for seed in 0..seeds {
        let cfg = PipelineConfig {
            channel: ChannelConfig { flip_prob: flip, ..Default::default() },
            master_seed: seed,
            ..Default::default()
        };
        let report = run_pipeline(&cfg).expect("valid config");
        let r = &report.rounds[0];
        let ratio = r.counts.after_pa as f64 / r.counts.pumped as f64;
        ratio_sum += ratio;
        clean += (r.residual_mismatches == 0 && !r.aborted) as u32;
        println!(
            "seed {seed:>3}: {:?} leaked {} corrected {} residual {} ratio {ratio:.4}",
            r.counts.as_array(),
            r.leaked_bits,
            r.corrected_errors,
            r.residual_mismatches
        );
    }
    println!("mean after_pa/pumped = {:.4}, clean rounds {clean}/{seeds}", ratio_sum / seeds as f64);
}
