//! Approximation schemes for power assignment in wireless networks.
//!
//! Three problems share the α-power energy model `|pq|^α`:
//!
//! * [`disk_cover`]: at most `k` senders whose ranges cover every station
//!   (optionally all but `c` outliers), via a grid coreset of size
//!   independent of `n` and an exact search over it.
//! * [`multicast`]: a range assignment reaching `c` receivers from a source
//!   within `k` hops, via a grid coreset of size `O((kc/ε)²)`.
//! * [`energy_tsp`]: tours under α-power edge weights, with a
//!   `2·3^{α−1}` guarantee from recursively built MST paths.
//!
//! [`oracles`] holds brute-force reference solvers for small instances.

pub mod disk_cover;
pub mod energy_tsp;
pub mod error;
pub mod geometry;
pub mod multicast;
pub mod oracles;
pub mod pointfile;

mod cover_search;

pub use disk_cover::{Coreset, CoverConfig, CoverOutcome, DiskCover};
pub use energy_tsp::{HamPath, RootedTree, Tour};
pub use error::{Error, Result};
pub use geometry::{Ball, GridSpec, Point, PointSet};
pub use multicast::{MulticastCoreset, MulticastInstance, MulticastOutcome, RangeAssignment};
pub use oracles::OracleBudget;

/// Runs `f` on a dedicated pool of `threads` workers. Solver results do not
/// depend on the thread count.
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.max(1))
        .build()
        .expect("thread pool")
        .install(f)
}
