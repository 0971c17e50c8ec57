//! Three-layer feedforward embedding enhancer:
//! `z = W3·ReLU(W2·ReLU(W1·x + b1) + b2) + b3`, with reverse-mode gradients.
//!
//! The final layer is linear; there is no output activation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{Matrix, SplitMix64};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnhancerDims {
    pub d_in: usize,
    pub d_h1: usize,
    pub d_h2: usize,
    pub d_out: usize,
}

impl Default for EnhancerDims {
    fn default() -> Self {
        EnhancerDims {
            d_in: 1024,
            d_h1: 256,
            d_h2: 512,
            d_out: 1024,
        }
    }
}

impl EnhancerDims {
    pub fn new(d_in: usize, d_h1: usize, d_h2: usize, d_out: usize) -> Result<Self> {
        let dims = EnhancerDims {
            d_in,
            d_h1,
            d_h2,
            d_out,
        };
        dims.validate()?;
        Ok(dims)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d_in == 0 || self.d_h1 == 0 || self.d_h2 == 0 || self.d_out == 0 {
            return Err(Error::Config(format!(
                "enhancer dimensions must be positive, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        self.d_h1 * self.d_in
            + self.d_h1
            + self.d_h2 * self.d_h1
            + self.d_h2
            + self.d_out * self.d_h2
            + self.d_out
    }
}

/// Weights and biases of the three linear layers. Also used as the gradient
/// container, since gradients have exactly the same shapes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnhancerParams {
    pub w1: Matrix,
    pub b1: Vec<f64>,
    pub w2: Matrix,
    pub b2: Vec<f64>,
    pub w3: Matrix,
    pub b3: Vec<f64>,
}

/// Intermediates of one forward pass.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub x: Vec<f64>,
    pub a1: Vec<f64>,
    pub h1: Vec<f64>,
    pub a2: Vec<f64>,
    pub h2: Vec<f64>,
    pub z: Vec<f64>,
}

fn relu(a: &[f64]) -> Vec<f64> {
    a.iter().map(|&v| if v > 0.0 { v } else { 0.0 }).collect()
}

fn add_bias(mut a: Vec<f64>, b: &[f64]) -> Vec<f64> {
    for (v, bi) in a.iter_mut().zip(b) {
        *v += bi;
    }
    a
}

/// Backprop through ReLU; the subgradient at exactly 0 is 0.
fn relu_backward(grad: &mut [f64], pre: &[f64]) {
    for (g, &a) in grad.iter_mut().zip(pre) {
        if a <= 0.0 {
            *g = 0.0;
        }
    }
}

impl EnhancerParams {
    pub fn zeros(dims: EnhancerDims) -> Self {
        EnhancerParams {
            w1: Matrix::zeros(dims.d_h1, dims.d_in),
            b1: vec![0.0; dims.d_h1],
            w2: Matrix::zeros(dims.d_h2, dims.d_h1),
            b2: vec![0.0; dims.d_h2],
            w3: Matrix::zeros(dims.d_out, dims.d_h2),
            b3: vec![0.0; dims.d_out],
        }
    }

    /// Kaiming-uniform weights, `U(-sqrt(6/fan_in), sqrt(6/fan_in))`, zero biases.
    pub fn init(seed: u64, dims: EnhancerDims) -> Result<Self> {
        dims.validate()?;
        let mut rng = SplitMix64::new(seed);
        let mut p = EnhancerParams::zeros(dims);
        for w in [&mut p.w1, &mut p.w2, &mut p.w3] {
            let bound = (6.0 / w.cols() as f64).sqrt();
            for v in w.as_mut_slice() {
                *v = rng.uniform(-bound, bound);
            }
        }
        Ok(p)
    }

    /// An enhancer that reproduces its input exactly for any `x`:
    /// dims `(d, 2d, 2d, d)` computing `ReLU(x) - ReLU(-x)`.
    pub fn identity(d: usize) -> Self {
        let dims = EnhancerDims {
            d_in: d,
            d_h1: 2 * d,
            d_h2: 2 * d,
            d_out: d,
        };
        let mut p = EnhancerParams::zeros(dims);
        for i in 0..d {
            p.w1.set(i, i, 1.0);
            p.w1.set(d + i, i, -1.0);
            p.w3.set(i, i, 1.0);
            p.w3.set(i, d + i, -1.0);
        }
        p.w2 = Matrix::identity(2 * d);
        p
    }

    pub fn dims(&self) -> EnhancerDims {
        EnhancerDims {
            d_in: self.w1.cols(),
            d_h1: self.w1.rows(),
            d_h2: self.w2.rows(),
            d_out: self.w3.rows(),
        }
    }

    /// Checks that every tensor has the shape implied by `W1`, `W2`, `W3`.
    pub fn validate(&self) -> Result<()> {
        let d = self.dims();
        d.validate()?;
        let ok = self.b1.len() == d.d_h1
            && self.w2.cols() == d.d_h1
            && self.b2.len() == d.d_h2
            && self.w3.cols() == d.d_h2
            && self.b3.len() == d.d_out;
        if !ok {
            return Err(Error::Shape("inconsistent enhancer tensor shapes".into()));
        }
        if !self.is_finite() {
            return Err(Error::NonFinite("enhancer parameters".into()));
        }
        Ok(())
    }

    /// Tensors in checkpoint order, each flagged `true` if it is a bias.
    pub fn tensors(&self) -> [(&[f64], bool); 6] {
        [
            (self.w1.as_slice(), false),
            (&self.b1, true),
            (self.w2.as_slice(), false),
            (&self.b2, true),
            (self.w3.as_slice(), false),
            (&self.b3, true),
        ]
    }

    pub fn tensors_mut(&mut self) -> [(&mut [f64], bool); 6] {
        [
            (self.w1.as_mut_slice(), false),
            (&mut self.b1, true),
            (self.w2.as_mut_slice(), false),
            (&mut self.b2, true),
            (self.w3.as_mut_slice(), false),
            (&mut self.b3, true),
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|(t, _)| t.iter().all(|v| v.is_finite()))
    }

    pub fn same_shape(&self, other: &EnhancerParams) -> bool {
        self.tensors()
            .iter()
            .zip(other.tensors().iter())
            .all(|((a, _), (b, _))| a.len() == b.len())
            && self.dims() == other.dims()
    }

    /// `self += other`, elementwise.
    pub fn accumulate(&mut self, other: &EnhancerParams) -> Result<()> {
        if !self.same_shape(other) {
            return Err(Error::Shape("gradient accumulation".into()));
        }
        for ((dst, _), (src, _)) in self.tensors_mut().into_iter().zip(other.tensors()) {
            for (d, s) in dst.iter_mut().zip(src) {
                *d += s;
            }
        }
        Ok(())
    }

    pub fn forward(&self, x: &[f64]) -> Result<ForwardCache> {
        if x.len() != self.w1.cols() {
            return Err(Error::DimMismatch {
                expected: self.w1.cols(),
                actual: x.len(),
            });
        }
        let a1 = add_bias(self.w1.matvec(x)?, &self.b1);
        let h1 = relu(&a1);
        let a2 = add_bias(self.w2.matvec(&h1)?, &self.b2);
        let h2 = relu(&a2);
        let z = add_bias(self.w3.matvec(&h2)?, &self.b3);
        Ok(ForwardCache {
            x: x.to_vec(),
            a1,
            h1,
            a2,
            h2,
            z,
        })
    }

    /// Enhanced embedding of `x`.
    pub fn enhance(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(x)?.z)
    }

    /// Gradients of `<grad_z, z>` with respect to every parameter and to `x`.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        grad_z: &[f64],
    ) -> Result<(EnhancerParams, Vec<f64>)> {
        let mut grads = EnhancerParams::zeros(self.dims());
        let grad_x = self.backward_into(cache, grad_z, &mut grads)?;
        Ok((grads, grad_x))
    }

    /// Like [`backward`](Self::backward) but accumulates into `grads`.
    pub fn backward_into(
        &self,
        cache: &ForwardCache,
        grad_z: &[f64],
        grads: &mut EnhancerParams,
    ) -> Result<Vec<f64>> {
        if grad_z.len() != self.w3.rows() {
            return Err(Error::DimMismatch {
                expected: self.w3.rows(),
                actual: grad_z.len(),
            });
        }
        grads.w3.add_outer(grad_z, &cache.h2)?;
        add_into(&mut grads.b3, grad_z);

        let mut g_a2 = self.w3.matvec_transposed(grad_z)?;
        relu_backward(&mut g_a2, &cache.a2);
        grads.w2.add_outer(&g_a2, &cache.h1)?;
        add_into(&mut grads.b2, &g_a2);

        let mut g_a1 = self.w2.matvec_transposed(&g_a2)?;
        relu_backward(&mut g_a1, &cache.a1);
        grads.w1.add_outer(&g_a1, &cache.x)?;
        add_into(&mut grads.b1, &g_a1);

        self.w1.matvec_transposed(&g_a1)
    }
}

fn add_into(dst: &mut [f64], src: &[f64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d += s;
    }
}

const ENHANCER_MAGIC: &[u8; 8] = b"JETRENH\0";
const ENHANCER_VERSION: u32 = 1;

/// Serializes parameters: magic, version, four `u64` dims, then every value
/// as little-endian `f64` in the order W1, b1, W2, b2, W3, b3.
pub fn save_params(params: &EnhancerParams) -> Vec<u8> {
    let d = params.dims();
    let mut out = Vec::with_capacity(8 + 4 + 32 + 8 * d.param_count());
    out.extend_from_slice(ENHANCER_MAGIC);
    out.extend_from_slice(&ENHANCER_VERSION.to_le_bytes());
    for v in [d.d_in, d.d_h1, d.d_h2, d.d_out] {
        out.extend_from_slice(&(v as u64).to_le_bytes());
    }
    for (t, _) in params.tensors() {
        for v in t {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    out
}

pub(crate) struct ByteReader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> ByteReader<'a> {
    pub(crate) fn new(buf: &'a [u8]) -> Self {
        ByteReader { buf, pos: 0 }
    }

    pub(crate) fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| {
                Error::CorruptCheckpoint(format!(
                    "truncated at byte {} (wanted {n} more)",
                    self.pos
                ))
            })?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    pub(crate) fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub(crate) fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub(crate) fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let bytes = self.take(
            n.checked_mul(8)
                .ok_or_else(|| Error::CorruptCheckpoint("tensor length overflow".into()))?,
        )?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }

    pub(crate) fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }
}

pub(crate) fn read_params(r: &mut ByteReader<'_>) -> Result<EnhancerParams> {
    if r.take(8)? != ENHANCER_MAGIC {
        return Err(Error::CorruptCheckpoint("bad enhancer magic".into()));
    }
    let version = r.u32()?;
    if version != ENHANCER_VERSION {
        return Err(Error::CorruptCheckpoint(format!(
            "unsupported enhancer version {version}"
        )));
    }
    let mut d = [0usize; 4];
    for v in &mut d {
        *v = usize::try_from(r.u64()?)
            .map_err(|_| Error::CorruptCheckpoint("dimension overflow".into()))?;
    }
    let dims = EnhancerDims {
        d_in: d[0],
        d_h1: d[1],
        d_h2: d[2],
        d_out: d[3],
    };
    dims.validate()?;
    // reject absurd headers before allocating
    let needed = dims
        .d_h1
        .checked_mul(dims.d_in)
        .zip(dims.d_h2.checked_mul(dims.d_h1))
        .and_then(|(a, b)| dims.d_out.checked_mul(dims.d_h2).map(|c| a + b + c))
        .ok_or_else(|| Error::CorruptCheckpoint("dimension overflow".into()))?;
    if needed.saturating_mul(8) > r.remaining() {
        return Err(Error::CorruptCheckpoint(format!(
            "truncated: header declares {dims:?}"
        )));
    }
    let w1 = Matrix::from_row_major(dims.d_h1, dims.d_in, r.f64s(dims.d_h1 * dims.d_in)?)?;
    let b1 = r.f64s(dims.d_h1)?;
    let w2 = Matrix::from_row_major(dims.d_h2, dims.d_h1, r.f64s(dims.d_h2 * dims.d_h1)?)?;
    let b2 = r.f64s(dims.d_h2)?;
    let w3 = Matrix::from_row_major(dims.d_out, dims.d_h2, r.f64s(dims.d_out * dims.d_h2)?)?;
    let b3 = r.f64s(dims.d_out)?;
    let p = EnhancerParams {
        w1,
        b1,
        w2,
        b2,
        w3,
        b3,
    };
    if !p.is_finite() {
        return Err(Error::CorruptCheckpoint("non-finite parameter".into()));
    }
    Ok(p)
}

pub fn load_params(bytes: &[u8]) -> Result<EnhancerParams> {
    let mut r = ByteReader::new(bytes);
    let p = read_params(&mut r)?;
    if r.remaining() != 0 {
        return Err(Error::CorruptCheckpoint(format!(
            "{} trailing bytes",
            r.remaining()
        )));
    }
    Ok(p)
}
