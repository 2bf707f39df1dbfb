use serde::{Deserialize, Serialize};

use super::{
    derive_seed, estimate_qber, generate_photons, privacy_amplify, reconcile, sift, transmit_and_measure, Basis,
    ChannelConfig, PaParams, QberEstimate, QkdError, ReconConfig,
};
use crate::bitstream::BitSequence;
use crate::qkd::estimate::MIN_ESTIMATION_BITS;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub rounds: usize,
    pub photons_per_round: usize,
    pub channel: ChannelConfig,
    pub recon: ReconConfig,
    pub e_max: f64,
    pub sample_fraction: f64,
    pub security_param: usize,
    pub master_seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            rounds: 1,
            photons_per_round: 100_000,
            channel: ChannelConfig::default(),
            recon: ReconConfig::default(),
            e_max: 0.11,
            sample_fraction: 0.1,
            security_param: 64,
            master_seed: 0,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), QkdError> {
        self.channel.validate()?;
        self.recon.validate()?;
        if !(0.0..=1.0).contains(&self.e_max) {
            return Err(QkdError::InvalidConfig(format!("e_max = {} is not in [0, 1]", self.e_max)));
        }
        if !(self.sample_fraction > 0.0 && self.sample_fraction < 1.0) {
            return Err(QkdError::InvalidConfig(format!(
                "sample_fraction = {} is not in (0, 1)",
                self.sample_fraction
            )));
        }
        Ok(())
    }
}

/// Bits surviving each phase of one round.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundCounts {
    pub pumped: usize,
    pub received: usize,
    pub sifted: usize,
    pub after_estimation: usize,
    pub after_reconciliation: usize,
    pub after_pa: usize,
}

impl RoundCounts {
    pub const PHASES: [&'static str; 6] =
        ["pumped", "received", "sifted", "after_estimation", "after_reconciliation", "after_pa"];

    pub fn as_array(&self) -> [usize; 6] {
        [self.pumped, self.received, self.sifted, self.after_estimation, self.after_reconciliation, self.after_pa]
    }

    pub fn is_monotone(&self) -> bool {
        self.as_array().windows(2).all(|w| w[0] >= w[1])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundSeeds {
    pub photons: u64,
    pub receiver: u64,
    pub estimation: u64,
    pub reconciliation: u64,
    pub privacy: u64,
}

impl RoundSeeds {
    pub fn derive(master: u64, round: usize) -> Self {
        let r = round as u64;
        RoundSeeds {
            photons: derive_seed(master, &[r, 1]),
            receiver: derive_seed(master, &[r, 2]),
            estimation: derive_seed(master, &[r, 3]),
            reconciliation: derive_seed(master, &[r, 4]),
            privacy: derive_seed(master, &[r, 5]),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    /// 1-based round index.
    pub round: usize,
    pub counts: RoundCounts,
    pub qber: Option<QberEstimate>,
    pub corrected_errors: usize,
    pub leaked_bits: usize,
    /// `M` in the output-length rule.
    pub eve_known_bits: usize,
    pub aborted: bool,
    pub abort_reason: Option<String>,
    /// Positions where the two final keys still differ.
    pub residual_mismatches: usize,
    pub seeds: RoundSeeds,
    #[serde(skip)]
    pub alice_key: BitSequence,
    #[serde(skip)]
    pub bob_key: BitSequence,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineReport {
    pub master_seed: u64,
    pub rounds: Vec<RoundRecord>,
}

impl PipelineReport {
    pub fn total_pumped(&self) -> usize {
        self.rounds.iter().map(|r| r.counts.pumped).sum()
    }

    pub fn total_final(&self) -> usize {
        self.rounds.iter().map(|r| r.counts.after_pa).sum()
    }
}

/// Runs every phase for each round. A round whose QBER exceeds `e_max`, or
/// whose key becomes too short for a phase, ends with empty keys and is
/// flagged as aborted.
pub fn run_pipeline(cfg: &PipelineConfig) -> Result<PipelineReport, QkdError> {
    cfg.validate()?;
    let rounds = (0..cfg.rounds).map(|r| run_round(cfg, r)).collect::<Result<Vec<_>, _>>()?;
    Ok(PipelineReport { master_seed: cfg.master_seed, rounds })
}

fn run_round(cfg: &PipelineConfig, index: usize) -> Result<RoundRecord, QkdError> {
    let seeds = RoundSeeds::derive(cfg.master_seed, index);
    let mut rec = RoundRecord {
        round: index + 1,
        counts: RoundCounts { pumped: cfg.photons_per_round, ..Default::default() },
        qber: None,
        corrected_errors: 0,
        leaked_bits: 0,
        eve_known_bits: 0,
        aborted: false,
        abort_reason: None,
        residual_mismatches: 0,
        seeds,
        alice_key: BitSequence::new(),
        bob_key: BitSequence::new(),
    };

    let photons = generate_photons(cfg.photons_per_round, seeds.photons);
    let measured = transmit_and_measure(&photons, &cfg.channel, seeds.receiver)?;
    rec.counts.received = measured.received();

    let prep: Vec<Basis> = photons.iter().map(|p| p.prep_basis).collect();
    let sent: BitSequence = photons.iter().map(|p| p.bit).collect();
    let (alice_raw, bob_raw) =
        sift(&prep, &measured.receiver_bases, &sent, &measured.receiver_bits, &measured.received_mask)?;
    rec.counts.sifted = alice_raw.len();

    if alice_raw.len() < MIN_ESTIMATION_BITS {
        return Ok(abort(rec, format!("sifted key of {} bits is too short to estimate errors", alice_raw.len())));
    }
    let est = estimate_qber(&alice_raw, &bob_raw, cfg.sample_fraction, cfg.e_max, seeds.estimation)?;
    rec.qber = Some(est.estimate);
    rec.counts.after_estimation = est.alice_remaining.len();
    if est.estimate.abort {
        return Ok(abort(
            rec,
            format!("estimated QBER {:.6} exceeds threshold {:.6}", est.estimate.error_rate, est.estimate.e_max),
        ));
    }

    let (alice_rec, bob_rec) =
        reconcile(&est.alice_remaining, &est.bob_remaining, &cfg.recon, seeds.reconciliation)?;
    rec.corrected_errors = bob_rec.corrected_errors;
    rec.leaked_bits = bob_rec.leaked_bits;
    rec.counts.after_reconciliation = bob_rec.key.len();

    let params = PaParams { l: alice_rec.key.len(), m: alice_rec.leaked_bits, s: cfg.security_param };
    rec.eve_known_bits = params.m;
    let out_len = match params.output_len() {
        Ok(n) => n,
        Err(e) => return Ok(abort(rec, e.to_string())),
    };
    let alice_final = privacy_amplify(&alice_rec.key, params, seeds.privacy)?;
    let bob_final = privacy_amplify(&bob_rec.key, params, seeds.privacy)?;
    debug_assert_eq!(alice_final.len(), out_len);
    rec.counts.after_pa = out_len;
    rec.residual_mismatches = alice_final.hamming_distance(&bob_final).unwrap_or(out_len);
    rec.alice_key = alice_final;
    rec.bob_key = bob_final;
    Ok(rec)
}

fn abort(mut rec: RoundRecord, reason: String) -> RoundRecord {
    rec.aborted = true;
    rec.abort_reason = Some(reason);
    rec.counts.after_reconciliation = 0;
    rec.counts.after_pa = 0;
    rec.alice_key = BitSequence::new();
    rec.bob_key = BitSequence::new();
    rec
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qkd::Eavesdropper;

    fn small(seed: u64) -> PipelineConfig {
        PipelineConfig { photons_per_round: 20_000, rounds: 2, master_seed: seed, ..Default::default() }
    }

    #[test]
    fn total_loss_empties_everything() {
        let cfg = PipelineConfig {
            channel: ChannelConfig { loss_prob: 1.0, ..Default::default() },
            ..small(1)
        };
        let report = run_pipeline(&cfg).unwrap();
        for r in &report.rounds {
            assert_eq!(r.counts.pumped, 20_000);
            assert_eq!(&r.counts.as_array()[1..], &[0; 5]);
            assert!(r.aborted);
            assert!(r.alice_key.is_empty());
        }
    }

    #[test]
    fn zero_photons() {
        let cfg = PipelineConfig { photons_per_round: 0, ..small(1) };
        let report = run_pipeline(&cfg).unwrap();
        assert!(report.rounds.iter().all(|r| r.counts.as_array() == [0; 6]));
    }

    #[test]
    fn deterministic() {
        assert_eq!(run_pipeline(&small(42)).unwrap(), run_pipeline(&small(42)).unwrap());
        assert_ne!(run_pipeline(&small(42)).unwrap(), run_pipeline(&small(43)).unwrap());
    }

    #[test]
    fn monotone_and_consistent() {
        for seed in 0..4 {
            let report = run_pipeline(&small(seed)).unwrap();
            for r in &report.rounds {
                assert!(r.counts.is_monotone(), "{:?}", r.counts);
                assert!(!r.aborted);
                assert_eq!(r.alice_key.len(), r.counts.after_pa);
                assert_eq!(
                    r.counts.after_pa,
                    r.counts.after_reconciliation - r.eve_known_bits - cfg_s()
                );
                assert_eq!(r.residual_mismatches, 0);
                assert_eq!(r.alice_key, r.bob_key);
            }
        }
    }

    fn cfg_s() -> usize {
        PipelineConfig::default().security_param
    }

    #[test]
    fn eavesdropper_aborts() {
        let cfg = PipelineConfig {
            channel: ChannelConfig { flip_prob: 0.0, loss_prob: 0.0, eve: Eavesdropper::InterceptResend(1.0) },
            ..small(5)
        };
        let report = run_pipeline(&cfg).unwrap();
        for r in &report.rounds {
            let q = r.qber.unwrap();
            assert!((q.error_rate - 0.25).abs() < 0.03);
            assert!(r.aborted && q.abort);
            assert_eq!(r.counts.after_pa, 0);
            assert!(r.counts.is_monotone());
        }
    }

    #[test]
    fn rounds_use_distinct_seeds() {
        let report = run_pipeline(&small(9)).unwrap();
        assert_ne!(report.rounds[0].seeds, report.rounds[1].seeds);
        assert_ne!(report.rounds[0].alice_key, report.rounds[1].alice_key);
    }

    #[test]
    fn invalid_config_rejected() {
        let cfg = PipelineConfig { sample_fraction: 1.0, ..small(1) };
        assert!(run_pipeline(&cfg).is_err());
        let cfg = PipelineConfig { e_max: 2.0, ..small(1) };
        assert!(run_pipeline(&cfg).is_err());
    }
}
