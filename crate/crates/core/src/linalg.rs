//! Dense vector/matrix kernels and the SplitMix64 generator.
//!
//! Vectors are plain `&[f64]` slices. [`Matrix`] is row-major.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_dims(expected: usize, actual: usize) -> Result<()> {
    if expected != actual {
        return Err(Error::DimMismatch { expected, actual });
    }
    Ok(())
}

pub fn dot(x: &[f64], y: &[f64]) -> Result<f64> {
    check_dims(x.len(), y.len())?;
    Ok(x.iter().zip(y).map(|(a, b)| a * b).sum())
}

pub fn l2_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Cosine similarity, clamped to `[-1, 1]`.
///
/// A zero-norm operand is an error rather than a similarity of 0.
pub fn cosine(x: &[f64], y: &[f64]) -> Result<f64> {
    let d = dot(x, y)?;
    let nx = l2_norm(x);
    let ny = l2_norm(y);
    if nx == 0.0 || ny == 0.0 {
        return Err(Error::UndefinedSimilarity);
    }
    Ok((d / (nx * ny)).clamp(-1.0, 1.0))
}

/// Scales `x` to unit norm.
pub fn normalize(x: &[f64]) -> Result<Vec<f64>> {
    let n = l2_norm(x);
    if n == 0.0 {
        return Err(Error::UndefinedSimilarity);
    }
    Ok(x.iter().map(|v| v / n).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{rows}x{cols} matrix needs {} values, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `M x`
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dims(self.cols, x.len())?;
        Ok(self
            .data
            .chunks_exact(self.cols)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `Mᵀ y`
    pub fn matvec_transposed(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_dims(self.rows, y.len())?;
        let mut out = vec![0.0; self.cols];
        for (row, &yr) in self.data.chunks_exact(self.cols).zip(y) {
            if yr == 0.0 {
                continue;
            }
            for (o, &m) in out.iter_mut().zip(row) {
                *o += m * yr;
            }
        }
        Ok(out)
    }

    /// `self += u vᵀ`
    pub fn add_outer(&mut self, u: &[f64], v: &[f64]) -> Result<()> {
        check_dims(self.rows, u.len())?;
        check_dims(self.cols, v.len())?;
        for (row, &ur) in self.data.chunks_exact_mut(self.cols).zip(u) {
            if ur == 0.0 {
                continue;
            }
            for (m, &vc) in row.iter_mut().zip(v) {
                *m += ur * vc;
            }
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }
}

pub fn outer(u: &[f64], v: &[f64]) -> Matrix {
    let data = u
        .iter()
        .flat_map(|&a| v.iter().map(move |&b| a * b))
        .collect();
    Matrix {
        rows: u.len(),
        cols: v.len(),
        data,
    }
}

/// SplitMix64 (Steele, Lea & Flood). Identical seeds give identical streams
/// on every platform.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `[0, 1)` with 53 bits of precision.
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in `[lo, hi)`. Requires `lo < hi`.
    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        debug_assert!(lo < hi);
        let v = lo + (hi - lo) * self.next_f64();
        // rounding can land exactly on `hi` when the interval is tiny
        v.min(hi.next_down()).max(lo)
    }

    /// Standard normal via Box-Muller.
    pub fn gaussian(&mut self) -> f64 {
        let u1 = 1.0 - self.next_f64();
        let u2 = self.next_f64();
        (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
    }

    /// Uniform index in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        ((self.next_u64() as u128 * n as u128) >> 64) as usize
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            let j = self.below(i + 1);
            items.swap(i, j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn dot_examples() {
        assert_eq!(dot(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        assert_eq!(dot(&[1.0, 2.0], &[3.0, 4.0]).unwrap(), 11.0);
        assert_eq!(dot(&[5.0, -3.0, 2.0], &[0.0; 3]).unwrap(), 0.0);
        assert!(matches!(
            dot(&[1.0], &[1.0, 2.0]),
            Err(Error::DimMismatch { .. })
        ));
    }

    #[test]
    fn norm_examples() {
        assert_eq!(l2_norm(&[3.0, 4.0]), 5.0);
        assert_eq!(l2_norm(&[0.0, 0.0, 0.0]), 0.0);
        assert_eq!(l2_norm(&[1.0]), 1.0);
    }

    #[test]
    fn cosine_examples() {
        let x = [0.3, -1.2, 4.0];
        assert!((cosine(&x, &x).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        // dot = 4, norms sqrt(5) * sqrt(5)
        assert!((cosine(&[1.0, 2.0], &[2.0, 1.0]).unwrap() - 0.8).abs() < 1e-12);
        assert!(matches!(
            cosine(&[0.0, 0.0], &[1.0, 0.0]),
            Err(Error::UndefinedSimilarity)
        ));
    }

    #[test]
    fn matvec_and_outer() {
        let x = [1.5, -2.0, 0.25];
        assert_eq!(Matrix::identity(3).matvec(&x).unwrap(), x.to_vec());
        assert_eq!(Matrix::zeros(2, 3).matvec(&x).unwrap(), vec![0.0, 0.0]);
        let o = outer(&[1.0, 2.0], &[3.0, 4.0]);
        assert_eq!(o.as_slice(), &[3.0, 4.0, 6.0, 8.0]);
        assert!(Matrix::zeros(2, 2).matvec(&x).is_err());
    }

    #[test]
    fn rng_is_deterministic_and_in_range() {
        let mut a = SplitMix64::new(42);
        let mut b = SplitMix64::new(42);
        for _ in 0..100 {
            assert_eq!(a.next_u64(), b.next_u64());
        }
        // reference values of the SplitMix64 stream for seed 0
        let mut z = SplitMix64::new(0);
        assert_eq!(z.next_u64(), 0xE220_A839_7B1D_CDAF);
        assert_eq!(z.next_u64(), 0x6E78_9E6A_A1B9_65F4);

        let mut r = SplitMix64::new(7);
        for _ in 0..10_000 {
            let v = r.uniform(-0.5, 2.0);
            assert!((-0.5..2.0).contains(&v));
        }
        let hi = 1.0;
        let lo = hi - f64::EPSILON;
        for _ in 0..1000 {
            let v = r.uniform(lo, hi);
            assert!(v >= lo && v < hi);
        }
    }

    fn vec_strategy(n: usize) -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, n)
    }

    proptest! {
        #[test]
        fn cosine_symmetric_and_scale_invariant(
            x in vec_strategy(6), y in vec_strategy(6), alpha in 0.01f64..100.0
        ) {
            prop_assume!(l2_norm(&x) > 1e-6 && l2_norm(&y) > 1e-6);
            let c = cosine(&x, &y).unwrap();
            prop_assert_eq!(c, cosine(&y, &x).unwrap());
            let scaled: Vec<f64> = x.iter().map(|v| v * alpha).collect();
            prop_assert!((cosine(&scaled, &y).unwrap() - c).abs() < 1e-12);
            prop_assert!(c.abs() <= 1.0);
        }

        #[test]
        fn outer_matvec_identity(
            u in vec_strategy(3), v in vec_strategy(4), w in vec_strategy(4)
        ) {
            let lhs = outer(&u, &v).matvec(&w).unwrap();
            let d = dot(&v, &w).unwrap();
            for (l, ui) in lhs.iter().zip(&u) {
                prop_assert!((l - ui * d).abs() <= 1e-9 * (1.0 + (ui * d).abs()));
            }
        }
    }
}
