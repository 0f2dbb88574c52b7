//! Rayleigh block-fading channels, AWGN and reproducible random streams.
//!
//! Complex Gaussian quantities of "variance σ²" have real and imaginary parts
//! each drawn from N(0, σ²/2).

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, Scalar};

/// Independent random stream keyed by `(seed, stream_id)`.
///
/// The stream is a ChaCha8 keystream with the seed as key and the stream id
/// as nonce, so distinct ids never share state and replaying the same pair
/// reproduces the same draws.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        Self {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Child stream for a sub-purpose, independent of how far `self` has
    /// been consumed.
    pub fn derive(&self, label: u64) -> Self {
        Self::new(self.seed, mix(self.stream_id ^ mix(label)))
    }

    /// Stream for a position in a multi-level counter, e.g.
    /// `(snr point, packet)`.
    pub fn keyed(seed: u64, counters: &[u64]) -> Self {
        let id = counters
            .iter()
            .fold(0x6a09_e667_f3bc_c908_u64, |acc, &c| mix(acc ^ mix(c)));
        Self::new(seed, id)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Uniform draw on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn bit(&mut self) -> u8 {
        self.rng.random::<bool>() as u8
    }

    /// Circularly-symmetric complex Gaussian with the given total variance.
    pub fn complex_gaussian<T: Scalar>(&mut self, variance: f64) -> Complex<T> {
        let sd = (variance / 2.0).sqrt();
        let re = self.standard_normal() * sd;
        let im = self.standard_normal() * sd;
        Complex::new(T::of(re), T::of(im))
    }
}

// splitmix64 finalizer
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Noise variances at the relays and at the destination.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec<T> {
    pub sigma2_r: T,
    pub sigma2_d: T,
}

impl<T: Scalar> NoiseSpec<T> {
    pub fn new(sigma2_r: T, sigma2_d: T) -> Result<Self> {
        if !(sigma2_r > T::zero() && sigma2_d > T::zero()) {
            return Err(Error::Parameter(format!(
                "noise variances must be positive, got sigma2_r={sigma2_r}, sigma2_d={sigma2_d}"
            )));
        }
        Ok(Self { sigma2_r, sigma2_d })
    }
}

/// Source-relay and relay-destination channels of every relay for one slot.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelRealization<T> {
    /// `f[k]`: N x N channel from the source to relay `k`.
    pub f: Vec<ComplexMatrix<T>>,
    /// `g[k]`: N x N channel from relay `k` to the destination.
    pub g: Vec<ComplexMatrix<T>>,
    pub slot_index: usize,
}

fn gaussian_matrix<T: Scalar>(
    rows: usize,
    cols: usize,
    variance: f64,
    rng: &mut RngStream,
) -> ComplexMatrix<T> {
    let data = (0..rows * cols)
        .map(|_| rng.complex_gaussian(variance))
        .collect();
    ComplexMatrix::from_vec(rows, cols, data).expect("positive dimensions")
}

/// Draws a fresh Rayleigh realization with unit-variance entries for `nr`
/// relays with `n_antennas` antennas at every node.
pub fn draw_channel<T: Scalar>(
    nr: usize,
    n_antennas: usize,
    slot_index: usize,
    rng: &mut RngStream,
) -> ChannelRealization<T> {
    assert!(nr >= 1 && n_antennas >= 1, "need at least one relay and antenna");
    let f = (0..nr)
        .map(|_| gaussian_matrix(n_antennas, n_antennas, 1.0, rng))
        .collect();
    let g = (0..nr)
        .map(|_| gaussian_matrix(n_antennas, n_antennas, 1.0, rng))
        .collect();
    ChannelRealization { f, g, slot_index }
}

/// i.i.d. circularly-symmetric complex Gaussian noise.
pub fn draw_awgn<T: Scalar>(
    rows: usize,
    cols: usize,
    variance: T,
    rng: &mut RngStream,
) -> Result<ComplexMatrix<T>> {
    if !(variance > T::zero()) || !variance.is_finite() {
        return Err(Error::Parameter(format!(
            "noise variance must be positive and finite, got {variance}"
        )));
    }
    if rows == 0 || cols == 0 {
        return Err(Error::Parameter(format!(
            "noise dimensions must be positive, got {rows}x{cols}"
        )));
    }
    Ok(gaussian_matrix(rows, cols, variance.as_f64(), rng))
}
