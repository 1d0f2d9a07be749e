//! Operating-system side of the pkgilp toolkit: wall clock, external solver
//! processes, instance generation, benchmarking and the end-to-end solve
//! pipeline used by the `pkgilp` binary.

pub mod bench;
pub mod external;
pub mod generate;
pub mod pipeline;

pub use pkgilp_core;

use std::time::{Duration, Instant};

use pkgilp_core::solver::Clock;

/// Monotonic wall clock measured from its creation.
#[derive(Debug, Clone, Copy)]
pub struct StdClock {
    origin: Instant,
}

impl StdClock {
    pub fn new() -> Self {
        StdClock { origin: Instant::now() }
    }
}

impl Default for StdClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for StdClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }
}
