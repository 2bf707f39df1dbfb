//! Dense matrices over GF(2).

use crate::bitstream::BitSequence;

/// Row-major bit-packed matrix over GF(2). Column `j` of a row lives in bit
/// `j % 64` of limb `j / 64`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Gf2Matrix {
    rows: usize,
    cols: usize,
    limbs_per_row: usize,
    data: Vec<u64>,
}

impl Gf2Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let limbs_per_row = cols.div_ceil(64);
        Gf2Matrix { rows, cols, limbs_per_row, data: vec![0; rows * limbs_per_row] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Fills `rows × cols` entries row by row from `seq`, starting at bit
    /// `offset`.
    pub fn from_bits(seq: &BitSequence, offset: usize, rows: usize, cols: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                if seq.get(offset + r * cols + c) {
                    m.set(r, c, true);
                }
            }
        }
        m
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut m = Self::zeros(rows.len(), cols);
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged rows");
            for (c, &v) in row.iter().enumerate() {
                m.set(r, c, v);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.data[r * self.limbs_per_row + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let limb = &mut self.data[r * self.limbs_per_row + c / 64];
        if v {
            *limb |= 1 << (c % 64);
        } else {
            *limb &= !(1 << (c % 64));
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    /// Rank by forward elimination on a scratch copy.
    pub fn rank(&self) -> usize {
        let w = self.limbs_per_row;
        let mut data = self.data.clone();
        let mut rank = 0;
        for col in 0..self.cols {
            if rank == self.rows {
                break;
            }
            let (limb, mask) = (col / 64, 1u64 << (col % 64));
            let Some(pivot) = (rank..self.rows).find(|&r| data[r * w + limb] & mask != 0) else {
                continue;
            };
            if pivot != rank {
                for k in 0..w {
                    data.swap(pivot * w + k, rank * w + k);
                }
            }
            for r in rank + 1..self.rows {
                if data[r * w + limb] & mask != 0 {
                    for k in limb..w {
                        data[r * w + k] ^= data[rank * w + k];
                    }
                }
            }
            rank += 1;
        }
        rank
    }
}

pub fn gf2_rank(m: &Gf2Matrix) -> usize {
    m.rank()
}

/// Probability that a uniformly random `rows × cols` GF(2) matrix has rank
/// exactly `r`.
pub fn rank_probability(rows: usize, cols: usize, r: usize) -> f64 {
    if r > rows.min(cols) {
        return 0.0;
    }
    let (m, q) = (rows as i32, cols as i32);
    let r_i = r as i32;
    let mut log2p = (r_i * (m + q - r_i) - m * q) as f64;
    for i in 0..r_i {
        let num = (1.0 - 2f64.powi(i - q)) * (1.0 - 2f64.powi(i - m));
        let den = 1.0 - 2f64.powi(i - r_i);
        log2p += (num / den).log2();
    }
    log2p.exp2()
}
