//! Monte Carlo reference for the parking-lot statistic.
//!
//! Usage: calibrate_parking_lot [trials] [seed]

use qkdrand_core::battery::{parking_lot, ParkingLotCalibration};
use qkdrand_core::BitSequence;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut args = std::env::args().skip(1);
    let trials: usize = args.next().map_or(10_000, |a| a.parse().expect("trials"));
    let seed: u64 = args.next().map_or(0x7061_726b, |a| a.parse().expect("seed"));
    let calib = ParkingLotCalibration::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = Vec::with_capacity(trials);
    for _ in 0..trials {
        let mut bytes = vec![0u8; calib.attempts * 8];
        rng.fill_bytes(&mut bytes);
        let seq = BitSequence::from_packed(bytes, calib.attempts * 64).expect("exact length");
        let r = parking_lot(&seq, &calib).expect("enough bits");
        counts.push(r.statistic("k").expect("k"));
    }
    let n = counts.len() as f64;
    let mean = counts.iter().sum::<f64>() / n;
    let var = counts.iter().map(|k| (k - mean).powi(2)).sum::<f64>() / (n - 1.0);
    println!("trials {trials} seed {seed}");
    println!("mean {mean:.3}");
    println!("sigma {:.3}", var.sqrt());
}
