//! Decision-directed stochastic-gradient adaptation of the code vector.
//!
//! Each update takes one gradient step on the full `TN x TN` code matrix
//! `V_eq`, projects the result back onto the replicated-diagonal structure
//! (the average of the `T` copies of each diagonal entry) and rescales to
//! the power budget.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::engine::PowerConfig;
use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, Scalar};
use crate::stc::{CodeVector, EquivalentModel};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdaptState<T> {
    pub v: CodeVector<T>,
    /// Step size.
    pub mu: T,
    /// Frobenius budget enforced after every step.
    pub p_v: T,
    /// Use `sqrt(P_R P_S / N)` for the residual inside the update instead of
    /// the default bare `sqrt(P_R)`.
    pub consistent_constants: bool,
}

impl<T: Scalar> AdaptState<T> {
    pub fn new(v: CodeVector<T>, mu: T, consistent_constants: bool) -> Result<Self> {
        if !(mu >= T::zero()) || !mu.is_finite() {
            return Err(Error::Parameter(format!("step size must be nonnegative, got {mu}")));
        }
        let p_v = v.power_budget();
        Ok(Self {
            v: normalize(&v)?,
            mu,
            p_v,
            consistent_constants,
        })
    }

    /// Constant multiplying `V_eq H s` inside the update's residual.
    pub fn inner_gain(&self, powers: &PowerConfig<T>, n: usize) -> T {
        if self.consistent_constants {
            powers.model_gain(n)
        } else {
            powers.p_r.sqrt()
        }
    }
}

/// Data term `||r - sqrt(P_R P_S / N) V_eq H s||^2` at the model's own `V_eq`.
pub fn instantaneous_cost<T: Scalar>(
    r: &ComplexMatrix<T>,
    model: &EquivalentModel<T>,
    s_hat: &ComplexMatrix<T>,
    powers: &PowerConfig<T>,
) -> Result<T> {
    crate::detection::ml_metric(r, model, s_hat, powers)
}

/// `||r - gain * V_eq H s||^2` for an arbitrary code vector.
pub fn data_term<T: Scalar>(
    r: &ComplexMatrix<T>,
    model: &EquivalentModel<T>,
    v: &CodeVector<T>,
    s_hat: &ComplexMatrix<T>,
    gain: T,
) -> Result<T> {
    let x = model.channel_output(s_hat)?;
    let y = v.lift(model.t_slots()).matmul(&x)?.scale_real(gain);
    Ok(r.sub(&y)?.frobenius_norm_sqr())
}

/// Step direction on `V_eq`:
/// `sqrt(P_R P_S / N) (r - inner V_eq H s) (H s)^H`.
///
/// When `inner == sqrt(P_R P_S / N)` this is the negative gradient of the
/// data term with respect to `conj(V_eq)`.
pub fn sg_direction<T: Scalar>(
    state: &AdaptState<T>,
    r: &ComplexMatrix<T>,
    model: &EquivalentModel<T>,
    s_hat: &ComplexMatrix<T>,
    powers: &PowerConfig<T>,
) -> Result<ComplexMatrix<T>> {
    let n = model.n_antennas();
    let expected = (n * model.t_slots(), 1);
    if r.shape() != expected {
        return Err(Error::Dimension {
            op: "sg_update",
            left: r.shape(),
            right: expected,
        });
    }
    if state.v.len() != n {
        return Err(Error::Dimension {
            op: "sg_update",
            left: (state.v.len(), state.v.len()),
            right: (n, n),
        });
    }
    let x = model.channel_output(s_hat)?;
    let v_eq = state.v.lift(model.t_slots());
    let residual = r.sub(&v_eq.matmul(&x)?.scale_real(state.inner_gain(powers, n)))?;
    Ok(residual
        .matmul(&x.hermitian())?
        .scale_real(powers.model_gain(n)))
}

/// Euclidean projection of a `TN x TN` matrix onto `blockdiag(V, .., V)`
/// with diagonal `V`: each `v_k` is the mean of its `T` diagonal copies.
pub fn project_to_code_vector<T: Scalar>(
    v_eq: &ComplexMatrix<T>,
    n: usize,
    t_slots: usize,
) -> Vec<Complex<T>> {
    let inv_t = T::one() / T::of(t_slots as f64);
    (0..n)
        .map(|k| {
            let sum = (0..t_slots).fold(Complex::new(T::zero(), T::zero()), |acc, t| {
                acc + v_eq[(t * n + k, t * n + k)]
            });
            sum * inv_t
        })
        .collect()
}

/// Gradient step followed by structure projection, before normalization.
pub fn sg_step<T: Scalar>(
    state: &AdaptState<T>,
    r: &ComplexMatrix<T>,
    model: &EquivalentModel<T>,
    s_hat: &ComplexMatrix<T>,
    powers: &PowerConfig<T>,
) -> Result<CodeVector<T>> {
    let direction = sg_direction(state, r, model, s_hat, powers)?;
    let t_slots = model.t_slots();
    let updated = state.v.lift(t_slots).add(&direction.scale_real(state.mu))?;
    let diag = project_to_code_vector(&updated, state.v.len(), t_slots);
    CodeVector::from_diagonal(&diag, state.p_v)
}

/// One adaptation cycle: gradient step, projection, normalization.
pub fn sg_update<T: Scalar>(
    state: &AdaptState<T>,
    r: &ComplexMatrix<T>,
    model: &EquivalentModel<T>,
    s_hat: &ComplexMatrix<T>,
    powers: &PowerConfig<T>,
) -> Result<AdaptState<T>> {
    let stepped = sg_step(state, r, model, s_hat, powers)?;
    Ok(AdaptState {
        v: normalize(&stepped)?,
        ..state.clone()
    })
}

/// `V * P_V / ||V||_F`.
pub fn normalize<T: Scalar>(v: &CodeVector<T>) -> Result<CodeVector<T>> {
    let norm = v.frobenius_norm();
    if !(norm > T::zero()) || !norm.is_finite() {
        return Err(Error::Degenerate("cannot normalize a zero or non-finite code vector"));
    }
    let scale = v.power_budget() / norm;
    let diag: Vec<_> = v.diagonal().into_iter().map(|z| z * scale).collect();
    CodeVector::from_diagonal(&diag, v.power_budget())
}
