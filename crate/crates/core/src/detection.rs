//! BPSK mapping and exhaustive maximum-likelihood detection.

use num_complex::Complex;

use crate::engine::PowerConfig;
use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, Scalar};
use crate::stc::EquivalentModel;

#[derive(Clone, Debug, PartialEq)]
pub struct Constellation<T> {
    pub points: Vec<Complex<T>>,
    pub bits_per_symbol: usize,
}

impl<T: Scalar> Constellation<T> {
    /// `{+1, -1}`, indexed by the bit they carry.
    pub fn bpsk() -> Self {
        Self {
            points: vec![Complex::new(T::one(), T::zero()), Complex::new(-T::one(), T::zero())],
            bits_per_symbol: 1,
        }
    }

    pub fn mean_energy(&self) -> T {
        let total = self.points.iter().fold(T::zero(), |acc, p| acc + p.norm_sqr());
        total / T::of(self.points.len() as f64)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectionResult<T> {
    /// Detected `N x 1` symbol group.
    pub s_hat: ComplexMatrix<T>,
    /// Squared residual at the argmin.
    pub metric: T,
}

/// Bit 0 maps to +1, bit 1 to -1.
pub fn modulate<T: Scalar>(bits: &[u8]) -> Vec<Complex<T>> {
    bits.iter()
        .map(|&b| {
            let x = if b == 0 { T::one() } else { -T::one() };
            Complex::new(x, T::zero())
        })
        .collect()
}

/// Hard decision on the real part; `Re >= 0` (ties included) gives bit 0.
pub fn demodulate<T: Scalar>(symbols: &[Complex<T>]) -> Vec<u8> {
    symbols
        .iter()
        .map(|z| if z.re >= T::zero() { 0 } else { 1 })
        .collect()
}

/// Candidate symbol group number `index` in lexicographic order over
/// constellation indices, first antenna most significant.
pub fn candidate<T: Scalar>(constellation: &Constellation<T>, n: usize, index: usize) -> ComplexMatrix<T> {
    let m = constellation.points.len();
    let mut digits = vec![0; n];
    let mut rest = index;
    for d in digits.iter_mut().rev() {
        *d = rest % m;
        rest /= m;
    }
    let entries: Vec<_> = digits.iter().map(|&d| constellation.points[d]).collect();
    ComplexMatrix::column(&entries)
}

/// `||r - sqrt(P_R P_S / N) V_eq H s||^2`.
pub fn ml_metric<T: Scalar>(
    r: &ComplexMatrix<T>,
    model: &EquivalentModel<T>,
    s: &ComplexMatrix<T>,
    powers: &PowerConfig<T>,
) -> Result<T> {
    let scale = powers.model_gain(model.n_antennas());
    Ok(r.sub(&model.received_mean(s, scale)?)?.frobenius_norm_sqr())
}

/// Exhaustive search over all `|constellation|^N` symbol groups with the
/// code matrix held fixed. Ties keep the earliest candidate.
pub fn ml_detect<T: Scalar>(
    r: &ComplexMatrix<T>,
    model: &EquivalentModel<T>,
    constellation: &Constellation<T>,
    powers: &PowerConfig<T>,
) -> Result<DetectionResult<T>> {
    let n = model.n_antennas();
    let expected = (n * model.t_slots(), 1);
    if r.shape() != expected {
        return Err(Error::Dimension {
            op: "ml_detect",
            left: r.shape(),
            right: expected,
        });
    }
    if constellation.points.is_empty() {
        return Err(Error::Parameter("empty constellation".into()));
    }
    let count = constellation.points.len().pow(n as u32);
    let mut best: Option<DetectionResult<T>> = None;
    for idx in 0..count {
        let s = candidate(constellation, n, idx);
        let metric = ml_metric(r, model, &s, powers)?;
        if best.as_ref().is_none_or(|b| metric < b.metric) {
            best = Some(DetectionResult { s_hat: s, metric });
        }
    }
    Ok(best.expect("at least one candidate"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_awgn, NoiseSpec, RngStream};
    use crate::stc::{build_equivalent, draw_random_code_vector};

    type M = ComplexMatrix<f64>;

    fn random_model(rng: &mut RngStream) -> EquivalentModel<f64> {
        let v = draw_random_code_vector(2, rng, 1.0).unwrap();
        let f = draw_awgn(2, 2, 1.0, rng).unwrap();
        let g = draw_awgn(2, 2, 1.0, rng).unwrap();
        build_equivalent(&v, &f, &g, 2, NoiseSpec::new(0.5, 0.5).unwrap()).unwrap()
    }

    #[test]
    fn bpsk_mapping() {
        let s: Vec<Complex<f64>> = modulate(&[0, 1, 1, 0]);
        let re: Vec<f64> = s.iter().map(|z| z.re).collect();
        assert_eq!(re, vec![1.0, -1.0, -1.0, 1.0]);
        assert!(modulate::<f64>(&[]).is_empty());
        assert_eq!(Constellation::<f64>::bpsk().mean_energy(), 1.0);
    }

    #[test]
    fn hard_decisions() {
        assert_eq!(demodulate(&[Complex::new(0.3, 0.9)]), vec![0]);
        assert_eq!(demodulate(&[Complex::new(-0.01, 0.0)]), vec![1]);
        assert_eq!(demodulate(&[Complex::new(0.0, -2.0)]), vec![0]);
        let mut rng = RngStream::new(4, 4);
        let bits: Vec<u8> = (0..257).map(|_| rng.bit()).collect();
        assert_eq!(demodulate(&modulate::<f64>(&bits)), bits);
    }

    #[test]
    fn candidate_order_is_lexicographic() {
        let bpsk = Constellation::<f64>::bpsk();
        let re = |i| -> Vec<f64> { candidate(&bpsk, 2, i).as_slice().iter().map(|z| z.re).collect() };
        assert_eq!(re(0), vec![1.0, 1.0]);
        assert_eq!(re(1), vec![1.0, -1.0]);
        assert_eq!(re(2), vec![-1.0, 1.0]);
        assert_eq!(re(3), vec![-1.0, -1.0]);
    }

    #[test]
    fn noise_free_detection_is_exact() {
        let mut rng = RngStream::new(10, 0);
        let powers = PowerConfig::default();
        let bpsk = Constellation::bpsk();
        for trial in 0..200 {
            let model = random_model(&mut rng);
            let s = candidate(&bpsk, 2, trial % 4);
            let r = model.received_mean(&s, powers.model_gain(2)).unwrap();
            let det = ml_detect(&r, &model, &bpsk, &powers).unwrap();
            assert_eq!(det.s_hat, s);
            assert!(det.metric < 1e-24);
        }
    }

    #[test]
    fn zero_observation_tie_keeps_first_candidate() {
        let mut rng = RngStream::new(12, 0);
        let model = random_model(&mut rng);
        let powers = PowerConfig::default();
        let bpsk = Constellation::bpsk();
        let det = ml_detect(&M::zeros(4, 1), &model, &bpsk, &powers).unwrap();
        let s0 = candidate(&bpsk, 2, 0);
        let s3 = candidate(&bpsk, 2, 3);
        assert_eq!(ml_metric(&M::zeros(4, 1), &model, &s0, &powers).unwrap(),
                   ml_metric(&M::zeros(4, 1), &model, &s3, &powers).unwrap());
        // s and -s tie; the earlier of the pair wins
        let s1 = candidate(&bpsk, 2, 1);
        assert!(det.s_hat == s0 || det.s_hat == s1);
    }

    #[test]
    fn detection_rejects_bad_input() {
        let mut rng = RngStream::new(13, 0);
        let model = random_model(&mut rng);
        let powers = PowerConfig::default();
        assert!(ml_detect(&M::zeros(2, 1), &model, &Constellation::bpsk(), &powers).is_err());
        let empty = Constellation { points: vec![], bits_per_symbol: 1 };
        assert!(ml_detect(&M::zeros(4, 1), &model, &empty, &powers).is_err());
    }

    #[test]
    fn matches_brute_force_oracle() {
        let mut rng = RngStream::new(14, 0);
        let powers = PowerConfig::default();
        let bpsk = Constellation::bpsk();
        let gain = (0.5f64).sqrt();
        for _ in 0..500 {
            let model = random_model(&mut rng);
            let s = candidate(&bpsk, 2, (rng.uniform() * 4.0) as usize);
            let r = model
                .received_mean(&s, gain)
                .unwrap()
                .add(&draw_awgn(4, 1, 0.8, &mut rng).unwrap())
                .unwrap();
            // oracle: explicit V_eq * H_eq product on real symbols, separate argmin
            let heq = model.v_eq.matmul(&model.h_eq()).unwrap();
            let metrics: Vec<f64> = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
                .iter()
                .map(|&(a, b)| {
                    let mut acc = 0.0;
                    for i in 0..4 {
                        let y = (heq[(i, 0)] * a + heq[(i, 1)] * b) * gain;
                        acc += (r[(i, 0)] - y).norm_sqr();
                    }
                    acc
                })
                .collect();
            let mut best = 0;
            for (i, &m) in metrics.iter().enumerate() {
                if m < metrics[best] {
                    best = i;
                }
            }
            let det = ml_detect(&r, &model, &bpsk, &powers).unwrap();
            assert_eq!(det.s_hat, candidate(&bpsk, 2, best));
            assert!((det.metric - metrics[best]).abs() < 1e-10 * metrics[best].max(1.0));
            for &m in &metrics {
                assert!(det.metric <= m + 1e-12);
            }
            // argmin invariant under common positive scaling of r and the model
            let scaled = PowerConfig { p_s: 4.0, ..powers };
            let r2 = r.scale_real(2.0);
            assert_eq!(ml_detect(&r2, &model, &bpsk, &scaled).unwrap().s_hat, det.s_hat);
        }
    }
}
