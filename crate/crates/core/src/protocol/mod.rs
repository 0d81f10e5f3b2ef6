//! The convex-agreement stack: committee CA among supernodes, supernode
//! reduction, the fixed-length protocol loop, and the unknown-length
//! mechanism.

pub mod fixed_l;
pub mod supernodes_ca;
pub mod unknown_l;

pub use fixed_l::{fixed_l_round_bound, FixedLParty};
pub use supernodes_ca::{supernodes_ca_duration, SupernodesCa, SupernodesCaLayout};
pub use unknown_l::{
    exp_search_duration, high_cost_ca_duration, unknown_l_round_bound, ExponentialSearch,
    HighCostCa, UnknownLParty,
};

use crate::bits::Bits;
use crate::convexity::{dilated_decode, dilated_encode, ConvexSpace, Element, SafeArea};
use crate::extractor::Rat;

/// Run parameters common to the whole stack. The unauthenticated regime is
/// the only one implemented: fixed-L runs need t < n / max(3, omega + eps),
/// unknown-L runs t < n / (omega + 1 + eps).
#[derive(Debug, Clone)]
pub struct ProtocolConfig {
    pub n: usize,
    pub t: usize,
    pub space: ConvexSpace,
    pub epsilon: Rat,
    /// Input bit cap; None for unknown-length runs.
    pub l: Option<u64>,
    pub kappa: usize,
    /// Use the lean constant-degree assignment profile; reserved for
    /// corruption-free scaling measurements.
    pub lean_assignments: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum ProtocolError {
    #[error("resilience violated: {0}")]
    Resilience(String),
    #[error("configuration: {0}")]
    Config(String),
}

impl ProtocolConfig {
    pub fn omega(&self) -> u32 {
        self.space.helly()
    }

    pub fn delta(&self) -> u32 {
        self.space.dilation()
    }

    /// sigma = 2 when the dilation factor is 1, max(2, floor(log2 log2 n))
    /// otherwise.
    pub fn sigma(&self) -> usize {
        if self.delta() == 1 {
            2
        } else {
            let lg = (self.n as f64).log2().log2().floor() as usize;
            lg.max(2)
        }
    }

    pub fn validate_fixed_l(&self) -> Result<(), ProtocolError> {
        let omega = Rat::new(self.omega() as i64, 1);
        let bound = (omega + self.epsilon).max(Rat::new(3, 1));
        if Rat::new(self.t as i64, 1) * bound >= Rat::new(self.n as i64, 1) {
            return Err(ProtocolError::Resilience(format!(
                "need t < n / max(3, omega + eps): t={} n={}",
                self.t, self.n
            )));
        }
        if self.l.is_none() {
            return Err(ProtocolError::Config("fixed-L run without L".into()));
        }
        Ok(())
    }

    pub fn validate_unknown_l(&self) -> Result<(), ProtocolError> {
        let omega = Rat::new(self.omega() as i64, 1);
        let bound = omega + Rat::new(1, 1) + self.epsilon;
        if Rat::new(self.t as i64, 1) * bound >= Rat::new(self.n as i64, 1) {
            return Err(ProtocolError::Resilience(format!(
                "need t < n / (omega + 1 + eps): t={} n={}",
                self.t, self.n
            )));
        }
        Ok(())
    }
}

/// Virtual-party role numbers, packed so every party derives the same layout
/// with no coordination: (stage, group, slot, flavor).
pub fn role(stage: u32, group: u32, slot: u32, flavor: u32) -> u32 {
    debug_assert!(group < 1 << 9 && slot < 1 << 9 && flavor < 1 << 2);
    stage << 20 | group << 11 | slot << 2 | flavor
}

pub const FLAVOR_CA_A: u32 = 0;
pub const FLAVOR_CA_B: u32 = 1;
pub const FLAVOR_DELIVER_B: u32 = 2;

/// Value transport: finite spaces carry the canonical encoding unchanged
/// (dilation 1); Euclidean spaces carry the extension encoding, using the
/// safe-area witness's hyperplane description when it is shorter.
pub fn transport_encode(space: &ConvexSpace, value: TransportValue<'_>) -> Option<Bits> {
    match value {
        TransportValue::Element(e) => {
            if space.is_finite() {
                Some(e.encoding().clone())
            } else {
                dilated_encode(space, e, None).ok()
            }
        }
        TransportValue::Witness(area) => {
            let w = area.witness()?;
            if space.is_finite() {
                Some(w.encoding().clone())
            } else {
                let plain = dilated_encode(space, w, None).ok()?;
                match area
                    .witness_form()
                    .and_then(|f| dilated_encode(space, w, Some(f)).ok())
                {
                    Some(described) if described < plain => Some(described),
                    _ => Some(plain),
                }
            }
        }
    }
}

pub enum TransportValue<'a> {
    Element(&'a Element),
    Witness(&'a SafeArea),
}

pub fn transport_decode(space: &ConvexSpace, bits: &Bits) -> Option<Element> {
    if space.is_finite() {
        space.element_from_bits(bits.clone()).ok()
    } else {
        dilated_decode(space, bits).ok()
    }
}

/// Per-iteration length cap: L grows by the dilation factor each iteration,
/// plus the one-bit extension flag on Euclidean transports.
pub fn transport_cap(space: &ConvexSpace, l: u64, iterations: u32) -> u64 {
    let delta = space.dilation() as u64;
    let base = l.saturating_mul(delta.saturating_pow(iterations));
    if space.is_finite() {
        base
    } else {
        base + 1
    }
}
