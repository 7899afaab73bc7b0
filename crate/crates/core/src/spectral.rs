//! Power-of-two DFTs (1-D and square 2-D) and convolution primitives.
//!
//! Forward transforms are unnormalized; inverse transforms scale by `1/N`
//! (`1/N^2` in 2-D), so `inverse(forward(x)) == x` up to round-off.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

fn check_len(len: usize) -> Result<()> {
    if len < 2 || !len.is_power_of_two() {
        return Err(Error::TransformLength(len));
    }
    Ok(())
}

/// Transform-domain values of a power-of-two sequence or square matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    side: usize,
    dims: usize,
    values: Vec<Complex64>,
}

impl Spectrum {
    /// Length of the sequence, or side of the square matrix.
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// Values in row-major order for 2-D spectra.
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

/// Cached complex transforms of one length.
#[derive(Clone)]
pub struct FftPlan {
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for FftPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FftPlan").field("len", &self.len).finish()
    }
}

impl FftPlan {
    pub fn new(len: usize) -> Result<Self> {
        check_len(len)?;
        let mut planner = FftPlanner::new();
        Ok(Self {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// In-place forward transform of every `len`-chunk of `data`.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.forward.process(data);
    }

    /// In-place normalized inverse of every `len`-chunk of `data`.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.inverse.process(data);
        let scale = 1.0 / self.len as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }

    /// Forward 2-D transform of a row-major `len x len` matrix.
    pub fn forward_2d(&self, data: &mut [Complex64]) {
        self.forward.process(data);
        transpose(data, self.len);
        self.forward.process(data);
        transpose(data, self.len);
    }

    /// Normalized inverse 2-D transform of a row-major `len x len` matrix.
    pub fn inverse_2d(&self, data: &mut [Complex64]) {
        self.inverse.process(data);
        transpose(data, self.len);
        self.inverse.process(data);
        transpose(data, self.len);
        let scale = 1.0 / (self.len * self.len) as f64;
        for v in data.iter_mut() {
            *v *= scale;
        }
    }
}

fn transpose(data: &mut [Complex64], side: usize) {
    for r in 0..side {
        for c in r + 1..side {
            data.swap(r * side + c, c * side + r);
        }
    }
}

/// Cached real-input transforms of one length; spectra hold `len/2 + 1` bins.
#[derive(Clone)]
pub struct RealFftPlan {
    len: usize,
    forward: Arc<dyn RealToComplex<f64>>,
    inverse: Arc<dyn ComplexToReal<f64>>,
}

impl fmt::Debug for RealFftPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RealFftPlan").field("len", &self.len).finish()
    }
}

impl RealFftPlan {
    pub fn new(len: usize) -> Result<Self> {
        check_len(len)?;
        let mut planner = RealFftPlanner::new();
        Ok(Self {
            len,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        })
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn bins(&self) -> usize {
        self.len / 2 + 1
    }

    /// Scratch length accepted by the `*_with_scratch` methods.
    pub fn scratch_len(&self) -> usize {
        self.forward.get_scratch_len().max(self.inverse.get_scratch_len())
    }

    /// Forward transform; `input` is used as scratch and left unspecified.
    pub fn forward(&self, input: &mut [f64], output: &mut [Complex64]) {
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.scratch_len()];
        self.forward_with_scratch(input, output, &mut scratch);
    }

    pub fn forward_with_scratch(&self, input: &mut [f64], output: &mut [Complex64], scratch: &mut [Complex64]) {
        self.forward
            .process_with_scratch(input, output, scratch)
            .expect("buffer lengths match the plan");
    }

    /// Normalized inverse; `input` is used as scratch and left unspecified.
    pub fn inverse(&self, input: &mut [Complex64], output: &mut [f64]) {
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.scratch_len()];
        self.inverse_with_scratch(input, output, &mut scratch);
    }

    pub fn inverse_with_scratch(&self, input: &mut [Complex64], output: &mut [f64], scratch: &mut [Complex64]) {
        // a real signal's DC and Nyquist bins are real
        input[0].im = 0.0;
        input[self.len / 2].im = 0.0;
        self.inverse
            .process_with_scratch(input, output, scratch)
            .expect("buffer lengths match the plan");
        let scale = 1.0 / self.len as f64;
        for v in output.iter_mut() {
            *v *= scale;
        }
    }
}

pub fn dft_forward(seq: &[Complex64]) -> Result<Spectrum> {
    let plan = FftPlan::new(seq.len())?;
    let mut values = seq.to_vec();
    plan.forward(&mut values);
    Ok(Spectrum {
        side: seq.len(),
        dims: 1,
        values,
    })
}

pub fn dft_inverse(sp: &Spectrum) -> Result<Vec<Complex64>> {
    let plan = FftPlan::new(sp.side)?;
    let mut values = sp.values.clone();
    if sp.dims == 1 {
        plan.inverse(&mut values);
    } else {
        plan.inverse_2d(&mut values);
    }
    Ok(values)
}

/// 2-D transform of a row-major `side x side` matrix.
pub fn dft2_forward(matrix: &[Complex64], side: usize) -> Result<Spectrum> {
    if matrix.len() != side * side {
        return Err(Error::Dimension(format!(
            "matrix of {} values is not {side}x{side}",
            matrix.len()
        )));
    }
    let plan = FftPlan::new(side)?;
    let mut values = matrix.to_vec();
    plan.forward_2d(&mut values);
    Ok(Spectrum { side, dims: 2, values })
}

pub fn dft2_inverse(sp: &Spectrum) -> Result<Vec<Complex64>> {
    dft_inverse(sp)
}

/// Circular convolution through the transform domain.
pub fn circular_convolve(a: &[Complex64], b: &[Complex64]) -> Result<Vec<Complex64>> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!(
            "circular convolution needs equal lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    let plan = FftPlan::new(a.len())?;
    let mut fa = a.to_vec();
    let mut fb = b.to_vec();
    plan.forward(&mut fa);
    plan.forward(&mut fb);
    for (x, y) in fa.iter_mut().zip(&fb) {
        *x *= y;
    }
    plan.inverse(&mut fa);
    Ok(fa)
}

/// Direct `O(len(a) * len(b))` linear convolution.
pub fn linear_convolve_direct(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

/// Smallest power of two `>= n` (and `>= 2`).
pub fn next_pow2(n: usize) -> usize {
    n.max(2).next_power_of_two()
}
