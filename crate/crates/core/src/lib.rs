//! Multi-agent hybrid scenario verification.
//!
//! Agents run decision logic written in a small indentation-sensitive
//! language, follow tracks on a map, and are composed into a hybrid
//! automaton. The engine builds branching simulations and over-approximate
//! reachtubes, checks assertions on them, and can reuse earlier results
//! through guard and flow caches.

pub mod agent;
pub mod dsl;
pub mod extract;
pub mod geometry;
pub mod incremental;
pub mod map;
pub mod numeric;
pub mod reach;
pub mod scalar;
pub mod scenario;
pub mod sensor;

pub use scalar::Scalar;

pub type Interval = geometry::Interval<f64>;
pub type HyperRect = geometry::HyperRect<f64>;
pub type TimedRect = geometry::TimedRect<f64>;
