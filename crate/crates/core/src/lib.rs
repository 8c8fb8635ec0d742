//! Quantum noise spectra of the vacuum polarization transmitted through a
//! pumped multilevel atomic vapor.

// `!(x < tol)` is used on purpose so that NaN fails every check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod angular;
pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod noisespec;
pub mod oracle;
pub mod sweep;

pub use error::{Error, Result};

/// Ordered map, parallel when the `parallel` feature is on.
pub(crate) fn map_maybe_parallel<T: Sync, R: Send>(
    items: &[T],
    f: impl Fn(&T) -> R + Sync + Send,
) -> Vec<R> {
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        items.par_iter().map(f).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        items.iter().map(f).collect()
    }
}
