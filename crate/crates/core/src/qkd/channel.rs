use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Basis, ChannelConfig, Eavesdropper, PhotonRecord, QkdError};
use crate::bitstream::{BitBuilder, BitSequence};

/// Sender side: `n` photons with uniform bits and preparation bases.
pub fn generate_photons(n: usize, seed: u64) -> Vec<PhotonRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| PhotonRecord {
            bit: rng.random(),
            prep_basis: Basis::from_bit(rng.random()),
            lost: false,
            eve_measured_basis: None,
        })
        .collect()
}

/// Receiver-side view of one transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    /// Photons annotated with loss and interception events.
    pub photons: Vec<PhotonRecord>,
    /// One bit per pumped photon; lost positions read 0.
    pub receiver_bits: BitSequence,
    pub receiver_bases: Vec<Basis>,
    pub received_mask: Vec<bool>,
}

impl Measurement {
    pub fn received(&self) -> usize {
        self.received_mask.iter().filter(|r| **r).count()
    }
}

/// Sends `photons` through `channel`; the receiver picks a uniform basis per
/// photon.
pub fn transmit_and_measure(
    photons: &[PhotonRecord],
    channel: &ChannelConfig,
    receiver_seed: u64,
) -> Result<Measurement, QkdError> {
    let mut rng = ChaCha8Rng::seed_from_u64(receiver_seed);
    let bases: Vec<Basis> = photons.iter().map(|_| Basis::from_bit(rng.random())).collect();
    let channel_seed = rng.random();
    transmit_and_measure_with(photons, channel, &bases, channel_seed)
}

/// As [`transmit_and_measure`] with caller-chosen receiver bases.
///
/// Per photon: loss, then (optionally) intercept-resend, then measurement.
/// A matched-basis measurement returns the arriving bit XOR a
/// `flip_prob` Bernoulli; a mismatched one returns a uniform bit.
pub fn transmit_and_measure_with(
    photons: &[PhotonRecord],
    channel: &ChannelConfig,
    receiver_bases: &[Basis],
    seed: u64,
) -> Result<Measurement, QkdError> {
    channel.validate()?;
    if receiver_bases.len() != photons.len() {
        return Err(QkdError::LengthMismatch(format!(
            "{} photons but {} receiver bases",
            photons.len(),
            receiver_bases.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(photons.len());
    let mut bits = BitBuilder::with_capacity(photons.len());
    let mut mask = Vec::with_capacity(photons.len());

    for (p, &rx_basis) in photons.iter().zip(receiver_bases) {
        let mut rec = *p;
        rec.lost = rng.random_bool(channel.loss_prob);
        if rec.lost {
            rec.eve_measured_basis = None;
            out.push(rec);
            bits.push(false);
            mask.push(false);
            continue;
        }

        let (mut bit, mut basis) = (p.bit, p.prep_basis);
        if let Eavesdropper::InterceptResend(fraction) = channel.eve {
            if rng.random_bool(fraction) {
                let eve_basis = Basis::from_bit(rng.random());
                let eve_bit = if eve_basis == basis { bit } else { rng.random() };
                rec.eve_measured_basis = Some(eve_basis);
                bit = eve_bit;
                basis = eve_basis;
            }
        }

        let measured = if rx_basis == basis { bit ^ rng.random_bool(channel.flip_prob) } else { rng.random() };
        out.push(rec);
        bits.push(measured);
        mask.push(true);
    }

    Ok(Measurement {
        photons: out,
        receiver_bits: bits.finish(),
        receiver_bases: receiver_bases.to_vec(),
        received_mask: mask,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qkd::sift;

    #[test]
    fn empty_and_deterministic() {
        assert!(generate_photons(0, 1).is_empty());
        assert_eq!(generate_photons(500, 9), generate_photons(500, 9));
        assert_ne!(generate_photons(500, 9), generate_photons(500, 10));
    }

    #[test]
    fn diagonal_fraction() {
        let photons = generate_photons(100_000, 2024);
        let diag = photons.iter().filter(|p| p.prep_basis == Basis::Diagonal).count() as f64;
        assert!((diag / 100_000.0 - 0.5).abs() < 0.01);
    }

    #[test]
    fn noiseless_matched_bases_copy_bits() {
        let photons = generate_photons(2_000, 4);
        let bases: Vec<Basis> = photons.iter().map(|p| p.prep_basis).collect();
        let cfg = ChannelConfig { flip_prob: 0.0, loss_prob: 0.0, eve: Eavesdropper::None };
        let m = transmit_and_measure_with(&photons, &cfg, &bases, 77).unwrap();
        let sent: BitSequence = photons.iter().map(|p| p.bit).collect();
        assert_eq!(m.receiver_bits, sent);
        assert!(m.received_mask.iter().all(|r| *r));
    }

    #[test]
    fn total_loss() {
        let photons = generate_photons(1_000, 4);
        let cfg = ChannelConfig { flip_prob: 0.0, loss_prob: 1.0, eve: Eavesdropper::None };
        let m = transmit_and_measure(&photons, &cfg, 5).unwrap();
        assert!(m.received_mask.iter().all(|r| !*r));
        assert!(m.photons.iter().all(|p| p.lost && p.eve_measured_basis.is_none()));
    }

    #[test]
    fn eve_flag_only_when_intercepted() {
        let photons = generate_photons(5_000, 4);
        let none = ChannelConfig { flip_prob: 0.0, loss_prob: 0.0, eve: Eavesdropper::None };
        let m = transmit_and_measure(&photons, &none, 5).unwrap();
        assert!(m.photons.iter().all(|p| p.eve_measured_basis.is_none()));

        let full = ChannelConfig { eve: Eavesdropper::InterceptResend(1.0), ..none };
        let m = transmit_and_measure(&photons, &full, 5).unwrap();
        assert!(m.photons.iter().all(|p| p.eve_measured_basis.is_some()));
    }

    #[test]
    fn intercept_resend_quarter_qber() {
        let cfg = ChannelConfig { flip_prob: 0.0, loss_prob: 0.0, eve: Eavesdropper::InterceptResend(1.0) };
        let photons = generate_photons(100_000, 8);
        let m = transmit_and_measure(&photons, &cfg, 9).unwrap();
        let prep: Vec<Basis> = photons.iter().map(|p| p.prep_basis).collect();
        let sent: BitSequence = photons.iter().map(|p| p.bit).collect();
        let (a, b) = sift(&prep, &m.receiver_bases, &sent, &m.receiver_bits, &m.received_mask).unwrap();
        let qber = a.hamming_distance(&b).unwrap() as f64 / a.len() as f64;
        assert!((qber - 0.25).abs() < 0.01, "qber {qber}");
    }

    #[test]
    fn rejects_bad_config() {
        let photons = generate_photons(10, 1);
        let cfg = ChannelConfig { flip_prob: 1.5, loss_prob: 0.0, eve: Eavesdropper::None };
        assert!(matches!(transmit_and_measure(&photons, &cfg, 1), Err(QkdError::InvalidConfig(_))));
        let cfg = ChannelConfig { flip_prob: 0.0, loss_prob: 0.0, eve: Eavesdropper::InterceptResend(-0.1) };
        assert!(transmit_and_measure(&photons, &cfg, 1).is_err());
        let ok = ChannelConfig::default();
        assert!(transmit_and_measure_with(&photons, &ok, &[Basis::Diagonal], 1).is_err());
    }
}
