//! Bit mapping, codeword superposition and complex AWGN.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::codebook::Codebook;
use crate::error::{Error, Result};

/// Largest tolerated `eta(nWid) / eta(0)`.
pub const TAIL_RATIO: f64 = 1e-12;

pub const DEFAULT_NOISE_WIDTH: f64 = 5.0;

/// Complex white Gaussian noise `CN(0, N0)` truncated at `nWid` for
/// discretized detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    n0: f64,
    nwid: f64,
}

impl NoiseModel {
    pub fn new(n0: f64, nwid: f64) -> Result<Self> {
        if !(n0.is_finite() && n0 > 0.0) {
            return Err(Error::InvalidParameter(format!("N0 must be positive, got {n0}")));
        }
        if !(nwid.is_finite() && nwid > 0.0) {
            return Err(Error::InvalidParameter(format!("nWid must be positive, got {nwid}")));
        }
        // exp(-nWid^2 / N0) is the tail ratio in both the real and complex densities
        if (-nwid * nwid / n0).exp() >= TAIL_RATIO {
            return Err(Error::InvalidParameter(format!(
                "noise density is not negligible at nWid={nwid} for N0={n0}"
            )));
        }
        Ok(Self { n0, nwid })
    }

    /// Noise model with the default truncation width of 5.
    pub fn with_n0(n0: f64) -> Result<Self> {
        Self::new(n0, DEFAULT_NOISE_WIDTH)
    }

    /// Complex noise variance `N0`.
    pub fn n0(&self) -> f64 {
        self.n0
    }

    /// Per-dimension variance `N0 / 2`.
    pub fn sigma2(&self) -> f64 {
        self.n0 / 2.0
    }

    pub fn nwid(&self) -> f64 {
        self.nwid
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReceivedSignal(pub Vec<Complex64>);

impl ReceivedSignal {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn real(&self) -> Vec<f64> {
        self.0.iter().map(|c| c.re).collect()
    }

    pub fn imag(&self) -> Vec<f64> {
        self.0.iter().map(|c| c.im).collect()
    }
}

/// Ground truth for one transmission.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmitRecord {
    pub indices: Vec<usize>,
    pub y: ReceivedSignal,
}

/// Maps `J * log2(M)` bits to per-layer codeword indices, most significant
/// bit first.
pub fn encode(bits: &[bool], cb: &Codebook) -> Result<Vec<usize>> {
    let per = cb.bits_per_codeword();
    if bits.len() != cb.layers() * per {
        return Err(Error::Dimension(format!(
            "expected {} bits for {} layers of {per} bits, got {}",
            cb.layers() * per,
            cb.layers(),
            bits.len()
        )));
    }
    Ok(bits
        .chunks_exact(per)
        .map(|group| group.iter().fold(0usize, |acc, &b| (acc << 1) | b as usize))
        .collect())
}

/// Noise-free `sum_j x_{j, m_j}`.
pub fn superpose(indices: &[usize], cb: &Codebook) -> Result<Vec<Complex64>> {
    if indices.len() != cb.layers() {
        return Err(Error::Dimension(format!(
            "expected {} codeword indices, got {}",
            cb.layers(),
            indices.len()
        )));
    }
    let mut y = vec![Complex64::new(0.0, 0.0); cb.resources()];
    for (layer, &m) in indices.iter().enumerate() {
        if m >= cb.codewords() {
            return Err(Error::InvalidParameter(format!(
                "codeword index {m} out of range for layer {layer}"
            )));
        }
        for (acc, x) in y.iter_mut().zip(cb.codeword(layer, m)) {
            *acc += x;
        }
    }
    Ok(y)
}

/// Superposes the selected codewords of an effective codebook and adds
/// `CN(0, N0)` noise.
pub fn transmit(indices: &[usize], cb: &Codebook, noise: &NoiseModel, rng: &mut impl Rng) -> Result<ReceivedSignal> {
    let mut y = superpose(indices, cb)?;
    let sd = noise.sigma2().sqrt();
    for v in &mut y {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        *v += Complex64::new(sd * re, sd * im);
    }
    Ok(ReceivedSignal(y))
}

/// Independent stream for one Monte Carlo trial.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

pub fn random_bits(count: usize, rng: &mut impl Rng) -> Vec<bool> {
    (0..count).map(|_| rng.random_bool(0.5)).collect()
}
