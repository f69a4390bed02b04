//! Linear-kernel Gram matrices.
//!
//! Stump feature rows are ±1 vectors, so `<a, b> = T − 2·hamming(a, b)`;
//! rows are packed into bit words and compared with popcount.

use crate::matrix::{dot, Matrix};

/// Dense symmetric `n × n` Gram matrix `K[i][j] = <z_i, z_j>`.
#[derive(Clone, Debug)]
pub struct Gram {
    n: usize,
    data: Vec<f64>,
}

impl Gram {
    pub fn new(z: &Matrix) -> Self {
        if is_sign_matrix(z) {
            Self::from_signs(z)
        } else {
            Self::dense(z)
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    fn dense(z: &Matrix) -> Self {
        let n = z.rows();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = dot(z.row(i), z.row(j));
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self { n, data }
    }

    fn from_signs(z: &Matrix) -> Self {
        let n = z.rows();
        let t = z.cols();
        let words = t.div_ceil(64).max(1);
        let mut bits = vec![0u64; n * words];
        for i in 0..n {
            for (j, &v) in z.row(i).iter().enumerate() {
                if v > 0.0 {
                    bits[i * words + j / 64] |= 1 << (j % 64);
                }
            }
        }
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            let a = &bits[i * words..(i + 1) * words];
            for j in i..n {
                let b = &bits[j * words..(j + 1) * words];
                let hamming: u32 = a.iter().zip(b).map(|(x, y)| (x ^ y).count_ones()).sum();
                let v = t as f64 - 2.0 * f64::from(hamming);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self { n, data }
    }
}

fn is_sign_matrix(z: &Matrix) -> bool {
    z.cols() > 0 && z.as_slice().iter().all(|&v| v == 1.0 || v == -1.0)
}
