//! Post-run classification audits and end-to-end contract checks.
//!
//! Classification is harness-side metadata, never protocol-visible: a
//! supernode is byzantine when its corrupted-member count reaches the
//! 1/(omega + eps/2) fraction, confused when its honest members disagree or
//! hold an invalid value, good otherwise. The per-iteration audit asserts the
//! bad fraction stays within 1/(omega + eps).

use crate::bits::Bits;
use crate::convexity::{hull_contains, Element, ValueMultiset};
use crate::extractor::Rat;
use crate::protocol::{transport_decode, ProtocolConfig};
use crate::simnet::RunTranscript;
use serde::Serialize;
use std::collections::BTreeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    Good,
    Confused,
    Byzantine,
}

#[derive(Debug, Clone, Serialize)]
pub struct IterationAudit {
    pub label: String,
    pub n_supernodes: usize,
    pub byzantine: usize,
    pub confused: usize,
    /// bad fraction <= 1 / (omega + eps)
    pub bad_fraction_ok: bool,
    /// every held value within delta^i * L bits
    pub value_lengths_ok: bool,
    pub max_value_bits: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunOutcome {
    pub terminated: bool,
    pub agreement: bool,
    pub convex_validity: bool,
    pub audits: Vec<IterationAudit>,
    pub audits_ok: bool,
    pub honest_bits: u64,
    pub rounds: u32,
    pub default_path_taken: bool,
    pub output: Option<Vec<u8>>,
}

fn corrupt_at(transcript: &RunTranscript, round: u32) -> BTreeSet<u32> {
    transcript
        .corruption_events
        .iter()
        .filter(|(r, _)| *r <= round)
        .map(|(_, p)| *p)
        .collect()
}

fn corrupt_final(transcript: &RunTranscript) -> BTreeSet<u32> {
    transcript
        .corruption_events
        .iter()
        .map(|(_, p)| *p)
        .collect()
}

/// Classifies every supernode of one published snapshot.
pub fn classify_iteration(
    cfg: &ProtocolConfig,
    transcript: &RunTranscript,
    snapshot_index: usize,
    honest_inputs: &ValueMultiset,
) -> Vec<Classification> {
    let snap = &transcript.iterations[snapshot_index];
    let corrupt = corrupt_at(transcript, snap.round);
    let omega = cfg.omega() as i64;
    // member-fraction threshold: 1 / (omega + eps/2)
    let frac = (Rat::new(omega, 1) + cfg.epsilon / Rat::new(2, 1)).recip();
    snap.supernode_members
        .iter()
        .enumerate()
        .map(|(g, members)| {
            let n_s = members.len() as i64;
            let byz = members.iter().filter(|p| corrupt.contains(p)).count() as i64;
            let threshold = (frac * Rat::new(n_s, 1)).ceil().to_integer().max(1);
            if byz >= threshold {
                return Classification::Byzantine;
            }
            // honest members of a non-byzantine supernode must agree
            let honest_values: Vec<Option<&Vec<u8>>> = members
                .iter()
                .filter(|p| !corrupt.contains(p))
                .map(|p| {
                    snap.held_values
                        .get(&(g as u32, *p))
                        .and_then(|v| v.as_ref())
                })
                .collect();
            if honest_values.windows(2).any(|w| w[0] != w[1]) {
                return Classification::Confused;
            }
            let Some(first) = honest_values.first() else {
                return Classification::Confused;
            };
            let Some(bytes) = *first else {
                return Classification::Confused; // holds bot
            };
            // valid = decodes and lies in the honest inputs' hull
            let first_member = members
                .iter()
                .find(|p| !corrupt.contains(p))
                .expect("non-byzantine supernode has an honest member");
            let bit_len = snap
                .value_bit_len
                .get(&(g as u32, *first_member))
                .copied()
                .unwrap_or(bytes.len() as u64 * 8);
            let bits = Bits::from_bytes_len(bytes.clone(), bit_len as usize);
            match transport_decode(&cfg.space, &bits) {
                Some(e) => match hull_contains(&cfg.space, honest_inputs, &e) {
                    Ok(true) => Classification::Good,
                    _ => Classification::Confused,
                },
                None => Classification::Confused,
            }
        })
        .collect()
}

/// Full per-iteration audit suite over a transcript.
pub fn audit_iterations(
    cfg: &ProtocolConfig,
    transcript: &RunTranscript,
    honest_inputs: &ValueMultiset,
) -> Vec<IterationAudit> {
    let omega = cfg.omega() as i64;
    let bad_bound = (Rat::new(omega, 1) + cfg.epsilon).recip();
    let l0 = cfg.l.unwrap_or(0);
    transcript
        .iterations
        .iter()
        .enumerate()
        .map(|(i, snap)| {
            let classes = classify_iteration(cfg, transcript, i, honest_inputs);
            let byzantine = classes.iter().filter(|c| **c == Classification::Byzantine).count();
            let confused = classes.iter().filter(|c| **c == Classification::Confused).count();
            let n_supernodes = classes.len();
            let bad = byzantine + confused;
            let bad_fraction_ok =
                Rat::new(bad as i64, n_supernodes.max(1) as i64) <= bad_bound;
            let cap = crate::protocol::transport_cap(&cfg.space, l0, i as u32);
            let corrupt = corrupt_at(transcript, snap.round);
            let max_value_bits = snap
                .value_bit_len
                .iter()
                .filter(|((_, p), _)| !corrupt.contains(p))
                .map(|(_, &l)| l)
                .max()
                .unwrap_or(0);
            IterationAudit {
                label: snap.label.clone(),
                n_supernodes,
                byzantine,
                confused,
                bad_fraction_ok,
                value_lengths_ok: max_value_bits <= cap,
                max_value_bits,
            }
        })
        .collect()
}

/// Termination, Agreement, Convex Validity plus the iteration audits for a
/// finished run.
pub fn check_outcome(
    cfg: &ProtocolConfig,
    transcript: &RunTranscript,
    honest_inputs: &ValueMultiset,
) -> RunOutcome {
    let corrupt = corrupt_final(transcript);
    let honest: Vec<usize> = (0..cfg.n)
        .filter(|i| !corrupt.contains(&(*i as u32)))
        .collect();
    let terminated = !transcript.failed
        && honest.iter().all(|&i| transcript.outputs[i].is_some());
    let agreement;
    let convex_validity;
    let mut output = None;
    if terminated {
        let decoded: Vec<Option<Element>> = honest
            .iter()
            .map(|&i| {
                let bytes = transcript.outputs[i].clone().unwrap();
                let bits = Bits::from_bytes_len(
                    bytes,
                    transcript.output_bit_lens[i].unwrap() as usize,
                );
                transport_decode(&cfg.space, &bits)
            })
            .collect();
        agreement = decoded.windows(2).all(|w| w[0] == w[1]) && decoded[0].is_some();
        match decoded.first() {
            Some(Some(e)) => {
                convex_validity =
                    matches!(hull_contains(&cfg.space, honest_inputs, e), Ok(true));
                output = Some(e.encoding().as_bytes().to_vec());
            }
            _ => convex_validity = false,
        }
    } else {
        agreement = false;
        convex_validity = false;
    }
    let audits = audit_iterations(cfg, transcript, honest_inputs);
    let audits_ok = audits.iter().all(|a| a.bad_fraction_ok && a.value_lengths_ok);
    RunOutcome {
        terminated,
        agreement,
        convex_validity,
        audits,
        audits_ok,
        honest_bits: transcript.honest_bits_total,
        rounds: transcript.rounds,
        default_path_taken: !transcript.default_path.is_empty(),
        output,
    }
}
