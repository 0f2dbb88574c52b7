//! Alamouti space-time coding with an adjustable diagonal code vector, and
//! the stacked linear model the destination detects against.
//!
//! Conventions used everywhere in the crate:
//!
//! * a received `N x T` block is vectorized slot by slot (column-major), so
//!   the stacked vector is `TN x 1`;
//! * `V_eq = blockdiag(V, .., V)` with `T` copies and `G_lift` likewise;
//! * the code vector weights the per-antenna streams of the block seen
//!   through `G`, giving the received signal `sqrt(P_R/N) V G C(r)` for the
//!   Alamouti block `C(r)` of a stored relay vector `r`. Stacked, that is
//!   exactly `sqrt(P_R P_S / N) V_eq H s` with the `TN x N` map `H` held by
//!   [`EquivalentModel`].

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::channel::{NoiseSpec, RngStream};
use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, Scalar};

/// Number of transmission slots of the Alamouti block.
pub const ALAMOUTI_SLOTS: usize = 2;

/// Diagonal code matrix `V` together with its Frobenius power budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CodeVector<T> {
    v: ComplexMatrix<T>,
    power_budget: T,
}

impl<T: Scalar> CodeVector<T> {
    /// Wraps the diagonal entries as-is; no normalization is applied.
    pub fn from_diagonal(entries: &[Complex<T>], power_budget: T) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Parameter("code vector needs at least one entry".into()));
        }
        if !(power_budget > T::zero()) || !power_budget.is_finite() {
            return Err(Error::Parameter(format!(
                "power budget must be positive, got {power_budget}"
            )));
        }
        Ok(Self {
            v: ComplexMatrix::diag(entries),
            power_budget,
        })
    }

    /// Wraps an `N x N` matrix, rejecting anything with off-diagonal mass.
    pub fn from_matrix(v: ComplexMatrix<T>, power_budget: T) -> Result<Self> {
        if v.rows() != v.cols() {
            return Err(Error::Dimension {
                op: "code vector",
                left: v.shape(),
                right: (v.rows(), v.rows()),
            });
        }
        if !v.is_diagonal() {
            return Err(Error::Parameter("code matrix must be diagonal".into()));
        }
        Self::from_diagonal(&v.diagonal(), power_budget)
    }

    /// Identity direction scaled so that `||V||_F == power_budget`.
    pub fn identity(n: usize, power_budget: T) -> Result<Self> {
        let scale = power_budget / T::of(n as f64).sqrt();
        Self::from_diagonal(&vec![Complex::new(scale, T::zero()); n], power_budget)
    }

    pub fn matrix(&self) -> &ComplexMatrix<T> {
        &self.v
    }

    pub fn diagonal(&self) -> Vec<Complex<T>> {
        self.v.diagonal()
    }

    pub fn power_budget(&self) -> T {
        self.power_budget
    }

    pub fn len(&self) -> usize {
        self.v.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.v.rows() == 0
    }

    pub fn frobenius_norm(&self) -> T {
        self.v.frobenius_norm()
    }

    /// `V_eq`: `t_slots` copies of `V` on the diagonal.
    pub fn lift(&self, t_slots: usize) -> ComplexMatrix<T> {
        self.v.block_repeat(t_slots)
    }

    /// Same budget, every entry multiplied by `alpha`.
    pub fn scaled(&self, alpha: Complex<T>) -> Self {
        Self {
            v: self.v.scale(alpha),
            power_budget: self.power_budget,
        }
    }
}

/// Space-time codeword: `N` antennas by `t_slots` slots.
#[derive(Clone, Debug, PartialEq)]
pub struct StcBlock<T> {
    pub c: ComplexMatrix<T>,
    pub t_slots: usize,
}

/// `[[s1, -conj(s2)], [s2, conj(s1)]]`.
pub fn alamouti_encode<T: Scalar>(s1: Complex<T>, s2: Complex<T>) -> StcBlock<T> {
    StcBlock {
        c: ComplexMatrix::from_rows(&[vec![s1, -s2.conj()], vec![s2, s1.conj()]]),
        t_slots: ALAMOUTI_SLOTS,
    }
}

/// `C_rand = V C`: row `k` of the codeword scaled by `v_k`.
pub fn randomize_codeword<T: Scalar>(v: &CodeVector<T>, c: &StcBlock<T>) -> Result<StcBlock<T>> {
    Ok(StcBlock {
        c: v.matrix().matmul(&c.c)?,
        t_slots: c.t_slots,
    })
}

/// Phase-only random code vector: uniform phases, equal magnitudes,
/// `||V||_F == budget`.
pub fn draw_random_code_vector<T: Scalar>(
    n: usize,
    rng: &mut RngStream,
    budget: T,
) -> Result<CodeVector<T>> {
    let magnitude = budget.as_f64() / (n as f64).sqrt();
    let entries: Vec<Complex<T>> = (0..n)
        .map(|_| {
            let phase = std::f64::consts::TAU * rng.uniform();
            let z = Complex::from_polar(magnitude, phase);
            Complex::new(T::of(z.re), T::of(z.im))
        })
        .collect();
    CodeVector::from_diagonal(&entries, budget)
}

/// Stacked linear model of one relay-to-destination Alamouti transmission.
#[derive(Clone, Debug)]
pub struct EquivalentModel<T> {
    /// `TN x TN` block-diagonal code matrix.
    pub v_eq: ComplexMatrix<T>,
    /// End-to-end `G F` of the two hops.
    pub h: ComplexMatrix<T>,
    /// `TN x TN` block-diagonal lift of `G`.
    pub g_lift: ComplexMatrix<T>,
    /// `sigma2_d + ||V_eq G_lift||_F^2 sigma2_r`, the covariance scale
    /// without the relay amplification factor.
    pub noise_cov_scale: T,
    /// Part of the `TN x N` equivalent channel acting on `s`.
    h_direct: ComplexMatrix<T>,
    /// Part acting on `conj(s)`; the Alamouti second slot carries conjugates.
    h_conj: ComplexMatrix<T>,
    noise: NoiseSpec<T>,
    n: usize,
    t_slots: usize,
}

/// `J` with `J r* = (-conj(r2), conj(r1))`, the second Alamouti column.
fn alamouti_swap<T: Scalar>() -> ComplexMatrix<T> {
    let (zero, one) = (Complex::new(T::zero(), T::zero()), Complex::new(T::one(), T::zero()));
    ComplexMatrix::from_rows(&[vec![zero, -one], vec![one, zero]])
}

pub fn build_equivalent<T: Scalar>(
    v: &CodeVector<T>,
    f: &ComplexMatrix<T>,
    g: &ComplexMatrix<T>,
    t_slots: usize,
    noise: NoiseSpec<T>,
) -> Result<EquivalentModel<T>> {
    let n = v.len();
    for (op, m) in [("equivalent model: F", f), ("equivalent model: G", g)] {
        if m.shape() != (n, n) {
            return Err(Error::Dimension {
                op,
                left: m.shape(),
                right: (n, n),
            });
        }
    }
    if n != 2 || t_slots != ALAMOUTI_SLOTS {
        return Err(Error::Parameter(format!(
            "Alamouti model needs N = T = 2, got N = {n}, T = {t_slots}"
        )));
    }

    let v_eq = v.lift(t_slots);
    let g_lift = g.block_repeat(t_slots);
    let h = g.matmul(f)?;

    // r = sqrt(P_S/N) F s is relayed as [G r, G J conj(r)] scaled by
    // sqrt(P_R/N); the extra 1/sqrt(N) moves the product of both factors to
    // the sqrt(P_R P_S / N) constant of the model.
    let inv_sqrt_n = T::one() / T::of(n as f64).sqrt();
    let zero = ComplexMatrix::zeros(n, n);
    let second = g.matmul(&alamouti_swap())?.matmul(&f.conj())?;
    let h_direct = ComplexMatrix::vstack(&[&h, &zero])?.scale_real(inv_sqrt_n);
    let h_conj = ComplexMatrix::vstack(&[&zero, &second])?.scale_real(inv_sqrt_n);

    let noise_cov_scale =
        noise.sigma2_d + v_eq.matmul(&g_lift)?.frobenius_norm_sqr() * noise.sigma2_r;

    Ok(EquivalentModel {
        v_eq,
        h,
        g_lift,
        noise_cov_scale,
        h_direct,
        h_conj,
        noise,
        n,
        t_slots,
    })
}

impl<T: Scalar> EquivalentModel<T> {
    pub fn n_antennas(&self) -> usize {
        self.n
    }

    pub fn t_slots(&self) -> usize {
        self.t_slots
    }

    /// `TN x N` equivalent channel for real-valued symbol vectors (BPSK).
    pub fn h_eq(&self) -> ComplexMatrix<T> {
        self.h_direct.add(&self.h_conj).expect("same shape")
    }

    /// `H s` for an `N x 1` symbol group, honouring the conjugated slot so
    /// the result is exact for complex symbols too.
    pub fn channel_output(&self, s: &ComplexMatrix<T>) -> Result<ComplexMatrix<T>> {
        self.h_direct.matmul(s)?.add(&self.h_conj.matmul(&s.conj())?)
    }

    /// Noiseless received vector `scale * V_eq H s`.
    pub fn received_mean(&self, s: &ComplexMatrix<T>, scale: T) -> Result<ComplexMatrix<T>> {
        Ok(self.v_eq.matmul(&self.channel_output(s)?)?.scale_real(scale))
    }

    /// Covariance scale with the relay amplification `P_R / N` applied to the
    /// forwarded relay noise.
    pub fn amplified_noise_cov_scale(&self, p_r: T) -> T {
        let relayed = self.v_eq.matmul(&self.g_lift).expect("square").frobenius_norm_sqr();
        self.noise.sigma2_d + p_r / T::of(self.n as f64) * relayed * self.noise.sigma2_r
    }

    /// Average per-entry variance of the stacked noise actually present at
    /// the destination.
    pub fn mean_noise_variance(&self, p_r: T) -> T {
        let dims = T::of((self.n * self.t_slots) as f64);
        let relayed = self.v_eq.matmul(&self.g_lift).expect("square").frobenius_norm_sqr();
        self.noise.sigma2_d + p_r / T::of(self.n as f64) * relayed * self.noise.sigma2_r / dims
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type M = ComplexMatrix<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn unit_noise() -> NoiseSpec<f64> {
        NoiseSpec::new(1.0, 1.0).unwrap()
    }

    fn arb_complex() -> impl Strategy<Value = Complex<f64>> {
        (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(re, im)| c(re, im))
    }

    #[test]
    fn alamouti_examples() {
        let b = alamouti_encode(c(1.0, 0.0), c(-1.0, 0.0));
        assert_eq!(b.c, M::from_rows(&[vec![c(1.0, 0.0), c(1.0, 0.0)], vec![c(-1.0, 0.0), c(1.0, 0.0)]]));
        let b = alamouti_encode(c(0.0, 1.0), c(0.0, 1.0));
        assert_eq!(b.c, M::from_rows(&[vec![c(0.0, 1.0), c(0.0, 1.0)], vec![c(0.0, 1.0), c(0.0, -1.0)]]));
        assert_eq!(b.t_slots, 2);
    }

    #[test]
    fn randomized_codeword_examples() {
        let block = alamouti_encode(c(0.3, -1.0), c(2.0, 0.5));
        let id = CodeVector::from_diagonal(&[c(1.0, 0.0), c(1.0, 0.0)], 1.0).unwrap();
        assert_eq!(randomize_codeword(&id, &block).unwrap(), block);

        let (v1, v2, r1, r2) = (c(0.6, 0.2), c(-0.1, 0.9), c(0.3, -1.0), c(2.0, 0.5));
        let v = CodeVector::from_diagonal(&[v1, v2], 1.0).unwrap();
        let out = randomize_codeword(&v, &alamouti_encode(r1, r2)).unwrap();
        let expected = M::from_rows(&[
            vec![v1 * r1, -v1 * r2.conj()],
            vec![v2 * r2, v2 * r1.conj()],
        ]);
        assert!(out.c.max_abs_diff(&expected).unwrap() < 1e-15);

        let kill = CodeVector::from_diagonal(&[c(0.0, 0.0), c(1.0, 0.0)], 1.0).unwrap();
        let out = randomize_codeword(&kill, &block).unwrap();
        assert_eq!(out.c[(0, 0)], c(0.0, 0.0));
        assert_eq!(out.c[(0, 1)], c(0.0, 0.0));
    }

    #[test]
    fn random_code_vector_contract() {
        let mut rng = RngStream::new(1, 2);
        let budget = 1.7;
        let mut phase_sum = c(0.0, 0.0);
        let draws = 10_000;
        for _ in 0..draws {
            let v: CodeVector<f64> = draw_random_code_vector(2, &mut rng, budget).unwrap();
            assert!((v.frobenius_norm() - budget).abs() < 1e-12);
            assert!(v.matrix().is_diagonal());
            let d = v.diagonal();
            assert!((d[0].norm() - d[1].norm()).abs() < 1e-12);
            phase_sum += d[0] / d[0].norm();
        }
        assert!((phase_sum / draws as f64).norm() < 0.02);
    }

    #[test]
    fn code_vector_rejects_bad_input() {
        assert!(CodeVector::from_diagonal(&[c(1.0, 0.0)], 0.0).is_err());
        assert!(CodeVector::<f64>::from_diagonal(&[], 1.0).is_err());
        let full = M::from_rows(&[vec![c(1.0, 0.0), c(0.1, 0.0)], vec![c(0.0, 0.0), c(1.0, 0.0)]]);
        assert!(CodeVector::from_matrix(full, 1.0).is_err());
        let id = CodeVector::<f64>::identity(2, 1.0).unwrap();
        assert!((id.frobenius_norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn identity_channel_equivalent() {
        let v = CodeVector::from_diagonal(&[c(1.0, 0.0), c(1.0, 0.0)], 2f64.sqrt()).unwrap();
        let model = build_equivalent(&v, &M::identity(2), &M::identity(2), 2, unit_noise()).unwrap();
        assert_eq!(model.h, M::identity(2));
        assert!((model.noise_cov_scale - 5.0).abs() < 1e-15);
        assert_eq!(model.v_eq, M::identity(4));

        let zero = CodeVector::from_diagonal(&[c(0.0, 0.0), c(0.0, 0.0)], 1.0).unwrap();
        let noise = NoiseSpec::new(0.3, 0.7).unwrap();
        let model = build_equivalent(&zero, &M::identity(2), &M::identity(2), 2, noise).unwrap();
        assert_eq!(model.noise_cov_scale, 0.7);
    }

    #[test]
    fn equivalent_rejects_bad_shapes() {
        let v = CodeVector::<f64>::identity(2, 1.0).unwrap();
        let bad = M::identity(3);
        assert!(build_equivalent(&v, &bad, &M::identity(2), 2, unit_noise()).is_err());
        assert!(build_equivalent(&v, &M::identity(2), &M::identity(2), 3, unit_noise()).is_err());
    }

    #[test]
    fn equivalent_noise_matches_monte_carlo() {
        // Simulate the forwarded noise sqrt(P_R/N) V [G n, G J conj(n)] + n_d
        // slot by slot and compare its mean per-entry variance to the model.
        let mut rng = RngStream::new(77, 0);
        let noise = NoiseSpec::new(0.4, 0.25).unwrap();
        let p_r = 1.3;
        let v: CodeVector<f64> = CodeVector::from_diagonal(&[c(0.8, -0.3), c(0.1, 0.5)], 1.0).unwrap();
        let f = crate::channel::draw_awgn(2, 2, 1.0, &mut rng).unwrap();
        let g = crate::channel::draw_awgn(2, 2, 1.0, &mut rng).unwrap();
        let model = build_equivalent(&v, &f, &g, 2, noise).unwrap();
        let amp = (p_r / 2.0f64).sqrt();
        let trials = 100_000;
        let mut energy = 0.0;
        for _ in 0..trials {
            let n_r = crate::channel::draw_awgn(2, 1, noise.sigma2_r, &mut rng).unwrap();
            let n_d = crate::channel::draw_awgn(2, 2, noise.sigma2_d, &mut rng).unwrap();
            let block = alamouti_encode(n_r[(0, 0)], n_r[(1, 0)]);
            let rx = v
                .matrix()
                .matmul(&g.matmul(&block.c).unwrap())
                .unwrap()
                .scale_real(amp)
                .add(&n_d)
                .unwrap();
            energy += rx.frobenius_norm_sqr();
        }
        let measured = energy / (trials as f64 * 4.0);
        let predicted = model.mean_noise_variance(p_r);
        assert!((measured / predicted - 1.0).abs() < 0.03, "{measured} vs {predicted}");
        assert!(model.amplified_noise_cov_scale(p_r) >= noise.sigma2_d);
        assert!(model.noise_cov_scale >= noise.sigma2_d);
    }

    proptest! {
        #[test]
        fn alamouti_columns_are_orthogonal(s1 in arb_complex(), s2 in arb_complex()) {
            let b = alamouti_encode(s1, s2);
            let gram = b.c.hermitian().matmul(&b.c).unwrap();
            let e = s1.norm_sqr() + s2.norm_sqr();
            let expected = M::diag(&[c(e, 0.0), c(e, 0.0)]);
            prop_assert!(gram.max_abs_diff(&expected).unwrap() < 1e-12);
            prop_assert_eq!(b.c[(0, 1)], -s2.conj());
            prop_assert_eq!(b.c[(1, 1)], s1.conj());
        }

        #[test]
        fn randomize_is_scaling_equivariant(
            v1 in arb_complex(), v2 in arb_complex(), s1 in arb_complex(), s2 in arb_complex(), a in arb_complex()
        ) {
            let v = CodeVector::from_diagonal(&[v1, v2], 1.0).unwrap();
            let block = alamouti_encode(s1, s2);
            let lhs = randomize_codeword(&v.scaled(a), &block).unwrap().c;
            let rhs = randomize_codeword(&v, &block).unwrap().c.scale(a);
            prop_assert!(lhs.max_abs_diff(&rhs).unwrap() < 1e-12);
        }

        #[test]
        fn lifted_code_is_block_diagonal(v1 in arb_complex(), v2 in arb_complex()) {
            let v = CodeVector::from_diagonal(&[v1, v2], 1.0).unwrap();
            let lift = v.lift(2);
            prop_assert!(lift.is_diagonal());
            prop_assert_eq!(lift.diagonal(), vec![v1, v2, v1, v2]);
        }
    }
}
