//! Communication-efficient convex agreement: committee compression via
//! extractor graphs, Reed-Solomon/Merkle supersending, safe-area decision
//! rules, and a deterministic synchronous-network simulator with per-bit
//! communication accounting.

pub mod bits;
pub mod convexity;
pub mod erasure;
pub mod extractor;
pub mod util;

pub mod ba;
pub mod protocol;
pub mod simnet;
pub mod supersend;

pub mod harness;
