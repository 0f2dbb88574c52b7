//! Instantaneous link SNRs and max-link selection with buffer guards.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, Scalar};
use crate::relaying::BufferStatus;
use crate::stc::CodeVector;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LinkKind {
    SourceRelay,
    RelayDestination,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinkSnr<T> {
    pub kind: LinkKind,
    pub relay: usize,
    pub value: T,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    SourceToRelay(usize),
    RelayToDestination(usize),
    Idle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SkipReason {
    BufferFull,
    BufferEmpty,
    SourceExhausted,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelectionDecision<T> {
    pub action: Action,
    /// Ineligible links, strongest first.
    pub skipped: Vec<(LinkSnr<T>, SkipReason)>,
}

fn check_variance<T: Scalar>(sigma2: T) -> Result<()> {
    if sigma2 > T::zero() && sigma2.is_finite() {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "noise variance must be positive, got {sigma2}"
        )))
    }
}

/// `sqrt(||F||_F^2) / sigma2_r`: a norm over a variance.
pub fn snr_sr<T: Scalar>(f: &ComplexMatrix<T>, sigma2_r: T) -> Result<T> {
    check_variance(sigma2_r)?;
    Ok(f.frobenius_norm() / sigma2_r)
}

/// `sqrt(||V_eq G_lift||_F^2) / sigma2_d` with `t_slots` copies of `V` and `G`.
pub fn snr_rd<T: Scalar>(
    v: &CodeVector<T>,
    g: &ComplexMatrix<T>,
    sigma2_d: T,
    t_slots: usize,
) -> Result<T> {
    check_variance(sigma2_d)?;
    // blockdiag(V G, .., V G) has T times the squared norm of V G
    let vg = v.matrix().matmul(g)?;
    Ok((vg.frobenius_norm_sqr() * T::of(t_slots as f64)).sqrt() / sigma2_d)
}

/// Strongest first; equal values prefer the lower relay index, then the
/// source-relay link.
fn rank<T: Scalar>(a: &LinkSnr<T>, b: &LinkSnr<T>) -> Ordering {
    b.value
        .partial_cmp(&a.value)
        .unwrap_or(Ordering::Equal)
        .then(a.relay.cmp(&b.relay))
        .then(a.kind.cmp(&b.kind))
}

fn ineligibility(
    link_kind: LinkKind,
    status: BufferStatus,
    source_exhausted: bool,
) -> Option<SkipReason> {
    match link_kind {
        LinkKind::SourceRelay if source_exhausted => Some(SkipReason::SourceExhausted),
        LinkKind::SourceRelay if status.full => Some(SkipReason::BufferFull),
        LinkKind::RelayDestination if status.empty => Some(SkipReason::BufferEmpty),
        _ => None,
    }
}

/// Picks the strongest eligible link. A source-relay link needs room in its
/// relay's buffer and data left at the source; a relay-destination link
/// needs a non-empty buffer. Returns `Idle` when nothing is eligible.
pub fn select<T: Scalar>(
    snrs: &[LinkSnr<T>],
    buffers: &[BufferStatus],
    source_exhausted: bool,
) -> SelectionDecision<T> {
    let mut ranked = snrs.to_vec();
    ranked.sort_by(rank);
    let mut action = Action::Idle;
    let mut skipped = Vec::new();
    for link in ranked {
        match ineligibility(link.kind, buffers[link.relay], source_exhausted) {
            Some(reason) => skipped.push((link, reason)),
            None if action == Action::Idle => {
                action = match link.kind {
                    LinkKind::SourceRelay => Action::SourceToRelay(link.relay),
                    LinkKind::RelayDestination => Action::RelayToDestination(link.relay),
                }
            }
            None => {}
        }
    }
    SelectionDecision { action, skipped }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{draw_awgn, RngStream};
    use num_complex::Complex;

    type M = ComplexMatrix<f64>;

    fn link(kind: LinkKind, relay: usize, value: f64) -> LinkSnr<f64> {
        LinkSnr { kind, relay, value }
    }

    const OPEN: BufferStatus = BufferStatus { full: false, empty: false };

    fn example_snrs() -> Vec<LinkSnr<f64>> {
        vec![
            link(LinkKind::SourceRelay, 0, 0.5),
            link(LinkKind::SourceRelay, 1, 1.2),
            link(LinkKind::RelayDestination, 0, 0.9),
            link(LinkKind::RelayDestination, 1, 0.1),
        ]
    }

    #[test]
    fn snr_examples() {
        assert!((snr_sr(&M::identity(2), 1.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(snr_sr(&M::zeros(2, 2), 1.0).unwrap(), 0.0);
        assert!(snr_sr(&M::identity(2), 0.0).is_err());

        let mut rng = RngStream::new(3, 3);
        let f: M = draw_awgn(2, 2, 1.0, &mut rng).unwrap();
        let base = snr_sr(&f, 0.7).unwrap();
        assert!((snr_sr(&f.scale_real(3.0), 0.7).unwrap() - 3.0 * base).abs() < 1e-12);

        let id = CodeVector::from_diagonal(&[Complex::new(1.0, 0.0); 2], 1.0).unwrap();
        assert!((snr_rd(&id, &M::identity(2), 1.0, 2).unwrap() - 2.0).abs() < 1e-15);
        let zero = CodeVector::from_diagonal(&[Complex::new(0.0, 0.0); 2], 1.0).unwrap();
        assert_eq!(snr_rd(&zero, &f, 1.0, 2).unwrap(), 0.0);
        let v = CodeVector::from_diagonal(&[Complex::new(0.3, 0.1), Complex::new(-0.2, 0.5)], 1.0).unwrap();
        let one = snr_rd(&v, &f, 0.4, 2).unwrap();
        let two = snr_rd(&v.scaled(Complex::new(2.0, 0.0)), &f, 0.4, 2).unwrap();
        assert!((two - 2.0 * one).abs() < 1e-12);
        // matches the explicit block-diagonal product
        let explicit = v.lift(2).matmul(&f.block_repeat(2)).unwrap().frobenius_norm() / 0.4;
        assert!((one - explicit).abs() < 1e-12);
        assert!(snr_rd(&v, &M::identity(3), 1.0, 2).is_err());
    }

    #[test]
    fn plain_argmax() {
        let d = select(&example_snrs(), &[OPEN, OPEN], false);
        assert_eq!(d.action, Action::SourceToRelay(1));
        assert!(d.skipped.is_empty());
    }

    #[test]
    fn full_buffer_is_skipped() {
        let full = BufferStatus { full: true, empty: false };
        let d = select(&example_snrs(), &[OPEN, full], false);
        assert_eq!(d.action, Action::RelayToDestination(0));
        assert_eq!(d.skipped, vec![(link(LinkKind::SourceRelay, 1, 1.2), SkipReason::BufferFull)]);
    }

    #[test]
    fn exhausted_source_and_idle() {
        let empty = BufferStatus { full: false, empty: true };
        let d = select(&example_snrs(), &[empty, OPEN], true);
        assert_eq!(d.action, Action::RelayToDestination(1));
        assert_eq!(d.skipped.len(), 3);
        assert!(d.skipped.windows(2).all(|w| w[0].0.value >= w[1].0.value));
        let d = select(&example_snrs(), &[empty, empty], true);
        assert_eq!(d.action, Action::Idle);
    }

    #[test]
    fn ties_prefer_low_index_then_source_link() {
        let snrs = vec![
            link(LinkKind::RelayDestination, 1, 1.0),
            link(LinkKind::SourceRelay, 1, 1.0),
            link(LinkKind::RelayDestination, 0, 1.0),
        ];
        assert_eq!(select(&snrs, &[OPEN, OPEN], false).action, Action::RelayToDestination(0));
        let snrs = vec![link(LinkKind::RelayDestination, 0, 1.0), link(LinkKind::SourceRelay, 0, 1.0)];
        assert_eq!(select(&snrs, &[OPEN, OPEN], false).action, Action::SourceToRelay(0));
    }

    #[test]
    fn monotone_transform_keeps_action() {
        let mut rng = RngStream::new(21, 0);
        let statuses = [
            BufferStatus { full: false, empty: true },
            OPEN,
            BufferStatus { full: true, empty: false },
        ];
        for _ in 0..2000 {
            let snrs: Vec<_> = (0..4)
                .map(|i| {
                    let kind = if i < 2 { LinkKind::SourceRelay } else { LinkKind::RelayDestination };
                    link(kind, i % 2, rng.uniform() * 5.0)
                })
                .collect();
            let buffers = [statuses[(rng.uniform() * 3.0) as usize], statuses[(rng.uniform() * 3.0) as usize]];
            let squared: Vec<_> = snrs.iter().map(|l| LinkSnr { value: l.value * l.value + 1.0, ..*l }).collect();
            assert_eq!(select(&snrs, &buffers, false).action, select(&squared, &buffers, false).action);
        }
    }
}
