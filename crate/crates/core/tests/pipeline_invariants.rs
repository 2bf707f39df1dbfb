use qkdrand_core::qkd::{ChannelConfig, Eavesdropper, RoundCounts};
use qkdrand_core::{run_pipeline, PipelineConfig};

fn config(seed: u64) -> PipelineConfig {
    PipelineConfig { rounds: 3, photons_per_round: 100_000, master_seed: seed, ..Default::default() }
}

#[test]
fn same_seed_same_report() {
    let a = run_pipeline(&config(7)).unwrap();
    let b = run_pipeline(&config(7)).unwrap();
    for (x, y) in a.rounds.iter().zip(&b.rounds) {
        assert_eq!(x.counts, y.counts);
        assert_eq!(x.alice_key, y.alice_key);
        assert_eq!(x.leaked_bits, y.leaked_bits);
    }
    let c = run_pipeline(&config(8)).unwrap();
    assert_ne!(a.rounds[0].alice_key, c.rounds[0].alice_key);
}

#[test]
fn counts_shrink_and_keys_agree() {
    let mut residual_rounds = 0;
    for seed in 0..5 {
        let report = run_pipeline(&config(seed)).unwrap();
        assert_eq!(report.rounds.len(), 3);
        for (i, r) in report.rounds.iter().enumerate() {
            assert_eq!(r.round, i + 1);
            assert!(r.counts.is_monotone(), "{:?}", r.counts);
            assert_eq!(r.counts.as_array().len(), RoundCounts::PHASES.len());
            assert!(!r.aborted);
            // Cascade leaves an occasional undetected even-weight error pattern
            if r.residual_mismatches == 0 {
                assert_eq!(r.alice_key, r.bob_key);
            } else {
                residual_rounds += 1;
            }
            assert_eq!(r.alice_key.len(), r.counts.after_pa);
            // output length rule: L − M − s
            assert_eq!(r.counts.after_pa, r.counts.after_reconciliation - r.leaked_bits - 64);
        }
    }
    assert!(residual_rounds <= 2, "{residual_rounds} of 15 rounds kept errors");
}

#[test]
fn lossy_channel_reduces_received() {
    let mut cfg = config(3);
    cfg.channel = ChannelConfig { loss_prob: 0.5, ..Default::default() };
    let report = run_pipeline(&cfg).unwrap();
    for r in &report.rounds {
        let frac = r.counts.received as f64 / r.counts.pumped as f64;
        assert!((frac - 0.5).abs() < 0.01, "{frac}");
    }
}

#[test]
fn full_intercept_aborts() {
    let mut cfg = config(11);
    cfg.channel = ChannelConfig { flip_prob: 0.0, loss_prob: 0.0, eve: Eavesdropper::InterceptResend(1.0) };
    let report = run_pipeline(&cfg).unwrap();
    for r in &report.rounds {
        assert!(r.aborted);
        let q = r.qber.as_ref().unwrap();
        assert!((q.error_rate - 0.25).abs() < 0.03, "{}", q.error_rate);
        assert_eq!(r.counts.after_pa, 0);
        assert!(r.alice_key.is_empty());
    }
}

#[test]
fn invalid_config_is_rejected() {
    let mut cfg = config(0);
    cfg.channel.flip_prob = 1.5;
    assert!(run_pipeline(&cfg).is_err());
}
