//! Buffer-aided amplify-and-forward relay nodes.

use std::collections::VecDeque;

use crate::engine::PowerConfig;
use crate::error::{Error, Result};
use crate::numerics::{ComplexMatrix, Scalar};
use crate::stc::{alamouti_encode, CodeVector};

/// One stored symbol group.
#[derive(Clone, Debug, PartialEq)]
pub struct BufferEntry<T> {
    /// `N x 1` vector received from the source.
    pub received: ComplexMatrix<T>,
    /// Source-relay channel at reception time.
    pub f_snapshot: ComplexMatrix<T>,
    /// Position of the group within the source packet.
    pub group_index: usize,
}

/// Occupancy summary used by link selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BufferStatus {
    pub full: bool,
    pub empty: bool,
}

/// FIFO of symbol groups with a hard capacity.
#[derive(Clone, Debug)]
pub struct RelayBuffer<T> {
    capacity: usize,
    queue: VecDeque<BufferEntry<T>>,
}

impl<T: Scalar> RelayBuffer<T> {
    pub fn new(capacity: usize) -> Self {
        Self {
            capacity,
            queue: VecDeque::with_capacity(capacity),
        }
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn len(&self) -> usize {
        self.queue.len()
    }

    pub fn is_empty(&self) -> bool {
        self.queue.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.queue.len() >= self.capacity
    }

    pub fn status(&self) -> BufferStatus {
        BufferStatus {
            full: self.is_full(),
            empty: self.is_empty(),
        }
    }

    pub fn push(&mut self, entry: BufferEntry<T>) -> Result<()> {
        if self.is_full() {
            return Err(Error::BufferFull {
                capacity: self.capacity,
            });
        }
        self.queue.push_back(entry);
        Ok(())
    }

    /// Removes the oldest entry.
    pub fn pop(&mut self) -> Result<BufferEntry<T>> {
        self.queue.pop_front().ok_or(Error::BufferEmpty)
    }

    pub fn iter(&self) -> impl Iterator<Item = &BufferEntry<T>> {
        self.queue.iter()
    }
}

/// Source-to-relay reception: `sqrt(P_S / N) F s + n`.
pub fn af_receive<T: Scalar>(
    f: &ComplexMatrix<T>,
    s_group: &ComplexMatrix<T>,
    noise: &ComplexMatrix<T>,
    powers: &PowerConfig<T>,
) -> Result<ComplexMatrix<T>> {
    let gain = powers.source_gain(f.rows());
    f.matmul(s_group)?.scale_real(gain).add(noise)
}

/// Relay-to-destination Alamouti transmission of a stored vector `r`:
/// `sqrt(P_R / N) V G C(r) + noise`, returned as the `N x T` received block.
pub fn af_forward<T: Scalar>(
    v: &CodeVector<T>,
    g: &ComplexMatrix<T>,
    stored: &ComplexMatrix<T>,
    noise: &ComplexMatrix<T>,
    powers: &PowerConfig<T>,
) -> Result<ComplexMatrix<T>> {
    if stored.shape() != (2, 1) {
        return Err(Error::Dimension {
            op: "af_forward",
            left: stored.shape(),
            right: (2, 1),
        });
    }
    let block = alamouti_encode(stored[(0, 0)], stored[(1, 0)]);
    let gain = powers.relay_gain(g.rows());
    v.matrix()
        .matmul(&g.matmul(&block.c)?)?
        .scale_real(gain)
        .add(noise)
}
