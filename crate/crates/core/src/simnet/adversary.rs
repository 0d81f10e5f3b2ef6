//! Adaptive adversary framework and the bundled strategy library.
//!
//! Corrupted parties' machines keep running in shadow; the adversary sees
//! their intended sends (plus all honest round sends, i.e. rushing) and emits
//! whatever it wants in their place. Strategies that need protocol structure
//! read the `AdvMeta` attached to intended messages; honest machines and
//! accounting never look at it.

use super::{Dest, Inbox, OutMsg, Payload, RunInfo};
use crate::bits::Bits;
use crate::erasure::{make_bundles, RsConfig};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use std::sync::Arc;

/// Structured message description for adversary transforms.
#[derive(Debug, Clone)]
pub enum AdvMeta {
    /// A supersend share distribution: the carried message, coding
    /// parameters, and the receiver's share index, so split-root strategies
    /// can fabricate valid alternatives.
    SendShares {
        message: Arc<Bits>,
        n_shares: u16,
        index: u16,
    },
}

pub struct AdvView<'a> {
    pub round: u32,
    pub n_parties: u32,
    pub corrupt: &'a [bool],
    pub honest_sends: &'a [OutMsg],
    pub inboxes: &'a [Inbox],
    pub info: &'a RunInfo,
}

pub trait Adversary {
    /// Corruptions applied before round 0.
    fn initial_corruptions(&mut self, _n: u32, _seed: u64) -> Vec<u32> {
        Vec::new()
    }

    /// Additional corruptions, effective at the next round boundary.
    fn adapt(&mut self, _view: &AdvView<'_>) -> Vec<u32> {
        Vec::new()
    }

    /// Emits round messages for corrupted parties given their intended sends.
    fn emit(&mut self, view: &AdvView<'_>, intended: &[(u32, Vec<OutMsg>)], out: &mut Vec<OutMsg>);
}

/// No corruptions at all.
pub struct NullAdversary;

impl Adversary for NullAdversary {
    fn emit(
        &mut self,
        _view: &AdvView<'_>,
        _intended: &[(u32, Vec<OutMsg>)],
        _out: &mut Vec<OutMsg>,
    ) {
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdversaryKind {
    /// Corrupted parties follow the protocol, then fall silent at a seeded
    /// round.
    Crash,
    /// Send different (valid) share bundles to different receivers within a
    /// supersend; other messages get per-receiver bit flips.
    Equivocate,
    /// Two Merkle roots, one to each half of the receiver group.
    RootSplit,
    /// Follow the protocol correctly with inputs of the adversary's choice
    /// (the inputs are substituted when the run is built).
    Follower,
    /// Replace every payload with uniform random bits of the same length.
    RandomBits,
    /// Corrupt members of the largest supernode once iteration structure is
    /// published, staying within budget.
    AdaptiveLargestSupernode,
}

impl AdversaryKind {
    pub fn parse(name: &str) -> Option<AdversaryKind> {
        Some(match name {
            "crash" => AdversaryKind::Crash,
            "equivocate" | "equivocate-in-supersend" => AdversaryKind::Equivocate,
            "root-split" => AdversaryKind::RootSplit,
            "follower" | "protocol-follower" => AdversaryKind::Follower,
            "random-bits" => AdversaryKind::RandomBits,
            "adaptive-largest-supernode" => AdversaryKind::AdaptiveLargestSupernode,
            _ => return None,
        })
    }

    pub fn all() -> [AdversaryKind; 6] {
        [
            AdversaryKind::Crash,
            AdversaryKind::Equivocate,
            AdversaryKind::RootSplit,
            AdversaryKind::Follower,
            AdversaryKind::RandomBits,
            AdversaryKind::AdaptiveLargestSupernode,
        ]
    }

    pub fn name(&self) -> &'static str {
        match self {
            AdversaryKind::Crash => "crash",
            AdversaryKind::Equivocate => "equivocate-in-supersend",
            AdversaryKind::RootSplit => "root-split",
            AdversaryKind::Follower => "protocol-follower",
            AdversaryKind::RandomBits => "random-bits",
            AdversaryKind::AdaptiveLargestSupernode => "adaptive-largest-supernode",
        }
    }
}

/// The shipped adversary library behind one corruption budget.
pub struct StandardAdversary {
    pub kind: AdversaryKind,
    pub budget: u32,
    rng: ChaCha8Rng,
    crash_round: u32,
    adapted: bool,
    alt_bundles: HashMap<(u64, u16), Arc<Vec<crate::erasure::ShareBundle>>>,
}

impl StandardAdversary {
    pub fn new(kind: AdversaryKind, budget: u32, seed: u64) -> StandardAdversary {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xAD5E_55A1);
        let crash_round = rng.gen_range(1..12);
        StandardAdversary {
            kind,
            budget,
            rng,
            crash_round,
            adapted: false,
            alt_bundles: HashMap::new(),
        }
    }

    fn alt_bundle_for(
        &mut self,
        message: &Bits,
        n_shares: u16,
        index: u16,
    ) -> Option<crate::erasure::ShareBundle> {
        if message.is_empty() {
            return None;
        }
        let key = (super::hash_bits(message), n_shares);
        let bundles = self
            .alt_bundles
            .entry(key)
            .or_insert_with(|| {
                // same length, different content: flip the first bit
                let mut alt = Bits::new();
                for (i, b) in message.iter().enumerate() {
                    alt.push(if i == 0 { !b } else { b });
                }
                Arc::new(make_bundles(&alt, RsConfig::new(n_shares)).1)
            })
            .clone();
        bundles.get(index as usize - 1).cloned()
    }

    fn targets_of(dest: &Dest) -> Vec<super::VirtualId> {
        match dest {
            Dest::One(v) => vec![*v],
            Dest::Many(vs) => vs.as_ref().clone(),
        }
    }

    fn random_payload(&mut self, bit_len: u64) -> Payload {
        let nbytes = (bit_len as usize).div_ceil(8);
        let mut data = vec![0u8; nbytes];
        self.rng.fill(&mut data[..]);
        let b = Bits::from_bytes_len(data, bit_len as usize);
        Payload::from_bits(&b)
    }
}

impl Adversary for StandardAdversary {
    fn initial_corruptions(&mut self, n: u32, seed: u64) -> Vec<u32> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xC0_44_BB);
        let mut ids: Vec<u32> = (0..n).collect();
        ids.shuffle(&mut rng);
        let initial = match self.kind {
            // keep half the budget for the adaptive move
            AdversaryKind::AdaptiveLargestSupernode => (self.budget / 2) as usize,
            _ => self.budget as usize,
        };
        ids.truncate(initial.min(n as usize));
        ids
    }

    fn adapt(&mut self, view: &AdvView<'_>) -> Vec<u32> {
        if self.kind != AdversaryKind::AdaptiveLargestSupernode || self.adapted {
            return Vec::new();
        }
        let Some(snapshot) = view.info.iterations.last() else {
            return Vec::new();
        };
        self.adapted = true;
        let corrupt_now = view.corrupt.iter().filter(|&&c| c).count() as u32;
        let mut room = self.budget.saturating_sub(corrupt_now) as usize;
        let largest = snapshot
            .supernode_members
            .iter()
            .max_by_key(|m| m.len())
            .cloned()
            .unwrap_or_default();
        let mut picks = Vec::new();
        for p in largest {
            if room == 0 {
                break;
            }
            if !view.corrupt[p as usize] {
                picks.push(p);
                room -= 1;
            }
        }
        picks
    }

    fn emit(&mut self, view: &AdvView<'_>, intended: &[(u32, Vec<OutMsg>)], out: &mut Vec<OutMsg>) {
        for (_, msgs) in intended {
            for msg in msgs {
                match self.kind {
                    AdversaryKind::Follower => out.push(msg.clone()),
                    AdversaryKind::Crash => {
                        if view.round < self.crash_round {
                            out.push(msg.clone());
                        }
                    }
                    AdversaryKind::RandomBits => {
                        let payload = self.random_payload(msg.payload.bit_len);
                        out.push(OutMsg { payload, ..msg.clone() });
                    }
                    AdversaryKind::Equivocate | AdversaryKind::RootSplit => {
                        if let Some(AdvMeta::SendShares { message, n_shares, index }) = &msg.meta {
                            // split decision by share index: halves for
                            // root-split, parity for equivocation
                            let split = match self.kind {
                                AdversaryKind::RootSplit => *index as u32 * 2 > *n_shares as u32,
                                _ => index % 2 == 1,
                            };
                            let (message, n_shares, index) = (message.clone(), *n_shares, *index);
                            let payload = if split {
                                match self.alt_bundle_for(&message, n_shares, index) {
                                    Some(b) => Payload::from_bytes(b.encode()),
                                    None => msg.payload.clone(),
                                }
                            } else {
                                msg.payload.clone()
                            };
                            out.push(OutMsg { payload, meta: None, ..msg.clone() });
                        } else {
                            // per-receiver bit flips on half the targets
                            for (pos, to) in Self::targets_of(&msg.dest).into_iter().enumerate() {
                                let payload = if pos % 2 == 1 && msg.payload.bit_len > 0 {
                                    let orig = msg.payload.to_bits();
                                    let mut flipped = Bits::new();
                                    for (i, b) in orig.iter().enumerate() {
                                        flipped.push(if i == 0 { !b } else { b });
                                    }
                                    Payload::from_bits(&flipped)
                                } else {
                                    msg.payload.clone()
                                };
                                out.push(OutMsg {
                                    dest: Dest::One(to),
                                    payload,
                                    meta: None,
                                    ..msg.clone()
                                });
                            }
                        }
                    }
                    AdversaryKind::AdaptiveLargestSupernode => out.push(msg.clone()),
                }
            }
        }
    }
}
