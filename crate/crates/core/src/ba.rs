//! Unauthenticated Byzantine agreement for virtual-party groups.
//!
//! Multivalued agreement is a two-round value reduction in front of a binary
//! phase-king core: parties exchange values, then proposals backed by n - t
//! receptions, derive a unique candidate (any value with t + 1 proposal
//! backing), and agree on a single accept bit with phase-king over
//! floor((g-1)/3) + 1 phases of three rounds. The message schedule is a pure
//! function of (roster, L) fixed before round one: every round has a per-party
//! byte budget, oversized or off-schedule messages are dropped at ingress,
//! and honest parties complete the full schedule no matter how many group
//! members are byzantine. Voters whose vote is unchanged from the previous
//! phase stay silent; receivers replay the cached vote, which preserves
//! honest semantics exactly and keeps measured bits low in stable phases.

use crate::bits::Bits;
use crate::simnet::{vid, Ctx, Dest, Inbox, OutMsg, Payload, VirtualId, ENVELOPE_BITS};
use std::collections::HashMap;
use std::sync::Arc;

/// Group-wide parameters of one agreement instance; the schedule derives
/// from these alone.
#[derive(Debug, Clone)]
pub struct BaConfig {
    pub instance: u64,
    pub roster: Arc<Vec<VirtualId>>,
    /// My index in the roster.
    pub me: usize,
    /// Input/output value bit cap.
    pub l_max: u64,
    pub tag: &'static str,
}

impl BaConfig {
    pub fn group_size(&self) -> usize {
        self.roster.len()
    }
}

/// Rounds a group of size g occupies: two value rounds, 3(t+1) phase-king
/// rounds, one decision round.
pub fn ba_duration(g: usize) -> u32 {
    if g <= 1 {
        return 0;
    }
    let t = (g - 1) / 3;
    (2 + 3 * (t + 1) + 1) as u32
}

/// Declared honest-bit cap for one instance: the exact worst-case schedule
/// sum over all members and rounds.
pub fn ba_declared_bit_cap(g: usize, l_max: u64) -> u64 {
    if g <= 1 {
        return 0;
    }
    let g64 = g as u64;
    let t = (g as u64 - 1) / 3;
    let peers = g64 - 1;
    let value_round = peers * (l_max + 1 + ENVELOPE_BITS);
    let vote_round = peers * (2 + ENVELOPE_BITS);
    let king_round = peers * (1 + ENVELOPE_BITS);
    // two value rounds for every member, then per phase: two vote rounds for
    // every member plus one king broadcast
    g64 * 2 * value_round + (t + 1) * (g64 * 2 * vote_round + king_round)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Tri {
    Zero,
    One,
    Bot,
}

#[derive(Debug)]
enum Stage {
    Values,
    Props,
    Binary,
    Done,
}

/// One virtual party's state machine for one agreement instance.
pub struct BaInstance {
    cfg: BaConfig,
    roster_index: HashMap<VirtualId, usize>,
    free_targets: u32,
    local_round: u32,
    stage: Stage,
    input: Option<Bits>,
    /// unique proposal candidate from the reduction
    z_weak: Option<Bits>,
    /// binary phase-king state
    bit: bool,
    candidate: Tri,
    vote_count: usize,
    vote_bit: bool,
    /// per-sender vote caches for silent rounds, with running counts
    r1_cache: Vec<Option<bool>>,
    r1_counts: [usize; 2],
    r2_cache: Vec<Option<Tri>>,
    r2_counts: [usize; 2],
    last_sent_r1: Option<bool>,
    last_sent_r2: Option<Tri>,
    output: Option<Option<Bits>>,
}

fn encode_value_vote(v: &Option<Bits>) -> Payload {
    let mut b = Bits::new();
    match v {
        Some(val) => {
            b.push(true);
            b.extend(val);
        }
        None => b.push(false),
    }
    Payload::from_bits(&b)
}

fn decode_value_vote(p: &Payload, l_max: u64) -> Option<Option<Bits>> {
    if p.bit_len == 0 || p.bit_len > l_max + 1 {
        return None;
    }
    let bits = p.to_bits();
    if !bits.get(0) {
        return if bits.len() == 1 { Some(None) } else { None };
    }
    let mut v = Bits::with_capacity(bits.len() - 1);
    for i in 1..bits.len() {
        v.push(bits.get(i));
    }
    Some(Some(v))
}

impl BaInstance {
    pub fn new(cfg: BaConfig, input: Option<Bits>) -> BaInstance {
        let roster_index = cfg
            .roster
            .iter()
            .enumerate()
            .map(|(i, &v)| (v, i))
            .collect();
        let g = cfg.group_size();
        let input = match input {
            Some(v) if v.len() as u64 <= cfg.l_max => Some(v),
            _ => None,
        };
        let me_party = cfg.roster[cfg.me].party;
        let free_targets = cfg
            .roster
            .iter()
            .filter(|v| v.party == me_party)
            .count() as u32
            - 1;
        BaInstance {
            roster_index,
            free_targets,
            local_round: 0,
            stage: Stage::Values,
            input,
            z_weak: None,
            bit: false,
            candidate: Tri::Bot,
            vote_count: 0,
            vote_bit: false,
            r1_cache: vec![None; g],
            r1_counts: [0, 0],
            r2_cache: vec![None; g],
            r2_counts: [0, 0],
            last_sent_r1: None,
            last_sent_r2: None,
            output: None,
            cfg,
        }
    }

    pub fn done(&self) -> bool {
        matches!(self.stage, Stage::Done)
    }

    /// Final value, once done: None is the incoherence default.
    pub fn output(&self) -> Option<&Option<Bits>> {
        if self.done() {
            self.output.as_ref()
        } else {
            None
        }
    }

    fn me_vid(&self) -> VirtualId {
        self.cfg.roster[self.cfg.me]
    }

    fn others(&self) -> Arc<Vec<VirtualId>> {
        Arc::new(
            self.cfg
                .roster
                .iter()
                .copied()
                .filter(|&v| v != self.me_vid())
                .collect(),
        )
    }

    fn broadcast(&self, ctx: &mut Ctx<'_>, payload: Payload) {
        ctx.send(OutMsg {
            instance: self.cfg.instance,
            from: self.me_vid(),
            dest: Dest::Many(self.others()),
            payload,
            tag: self.cfg.tag,
            free_targets: self.free_targets,
            meta: None,
        });
    }

    /// First message per roster sender this round, size-capped.
    fn take_votes(&self, inbox: &Inbox, max_bits: u64) -> Vec<(usize, Payload)> {
        if !inbox.has_messages(self.cfg.instance, self.me_vid().role) {
            return Vec::new();
        }
        let mut seen = vec![false; self.cfg.group_size()];
        let mut out = Vec::new();
        for (from, payload) in inbox.get(self.cfg.instance, self.me_vid().role) {
            let Some(&idx) = self.roster_index.get(&from) else {
                continue; // not a member: off-schedule, dropped
            };
            if seen[idx] || payload.bit_len > max_bits {
                continue;
            }
            seen[idx] = true;
            out.push((idx, payload.clone()));
        }
        out
    }

    fn g(&self) -> usize {
        self.cfg.group_size()
    }

    fn t(&self) -> usize {
        (self.g() - 1) / 3
    }

    fn phases(&self) -> usize {
        self.t() + 1
    }

    /// Advance one synchronous round. Callers must invoke this exactly once
    /// per round from the instance's start until `done`.
    pub fn on_round(&mut self, ctx: &mut Ctx<'_>, inbox: &Inbox) {
        let g = self.g();
        if g <= 1 {
            if !self.done() {
                self.output = Some(self.input.clone());
                self.stage = Stage::Done;
            }
            return;
        }
        let r = self.local_round;
        self.local_round += 1;
        match r {
            0 => {
                // value exchange
                self.broadcast(ctx, encode_value_vote(&self.input));
            }
            1 => {
                // tally values; propose a value backed by >= g - t receptions
                let mut counts: HashMap<Option<Bits>, usize> = HashMap::new();
                let mut mine_counted = false;
                let votes = self.take_votes(inbox, self.cfg.l_max + 1);
                for (idx, p) in votes {
                    if idx == self.cfg.me {
                        mine_counted = true;
                    }
                    if let Some(v) = decode_value_vote(&p, self.cfg.l_max) {
                        *counts.entry(v).or_insert(0) += 1;
                    }
                }
                if !mine_counted {
                    *counts.entry(self.input.clone()).or_insert(0) += 1;
                }
                let quorum = g - self.t();
                let prop = counts
                    .iter()
                    .filter(|(v, c)| **c >= quorum && v.is_some())
                    .map(|(v, _)| v.clone().unwrap())
                    .min(); // at most one value can reach quorum
                self.broadcast(ctx, encode_value_vote(&prop));
                self.z_weak = prop; // provisional until proposals are tallied
                self.stage = Stage::Props;
            }
            2 => {
                // tally proposals; derive the unique candidate and accept bit
                let mut counts: HashMap<Bits, usize> = HashMap::new();
                let mut mine_counted = false;
                for (idx, p) in self.take_votes(inbox, self.cfg.l_max + 1) {
                    if idx == self.cfg.me {
                        mine_counted = true;
                    }
                    if let Some(Some(val)) = decode_value_vote(&p, self.cfg.l_max) {
                        *counts.entry(val).or_insert(0) += 1;
                    }
                }
                if !mine_counted {
                    if let Some(p) = &self.z_weak {
                        *counts.entry(p.clone()).or_insert(0) += 1;
                    }
                }
                let strong = g - self.t();
                let weak = self.t() + 1;
                self.bit = counts.values().any(|c| *c >= strong);
                self.z_weak = counts
                    .iter()
                    .filter(|(_, c)| **c >= weak)
                    .map(|(v, _)| v.clone())
                    .min();
                // binary phase-king round 1 of phase 0
                self.stage = Stage::Binary;
                self.send_r1(ctx, true);
            }
            r => {
                // binary phase-king: phase p occupies local rounds 2 + 3p
                // (R1 send) .. 5 + 3p (king applied)
                let bb = r - 3;
                let p = (bb / 3) as usize;
                match bb % 3 {
                    0 => {
                        // receive R1 of phase p, send candidate
                        self.tally_r1(inbox);
                        self.send_r2(ctx, p == 0);
                    }
                    1 => {
                        // receive candidates; the phase king broadcasts its
                        // plurality bit
                        self.tally_r2(inbox);
                        if self.cfg.roster[p % g] == self.me_vid() {
                            let mut b = Bits::new();
                            b.push(self.vote_bit);
                            self.broadcast(ctx, Payload::from_bits(&b));
                        }
                    }
                    _ => {
                        // receive the king bit, decide phase p
                        self.apply_king(inbox, p);
                        if p + 1 < self.phases() {
                            self.send_r1(ctx, false);
                        } else {
                            self.finish();
                        }
                    }
                }
            }
        }
    }

    fn send_r1(&mut self, ctx: &mut Ctx<'_>, force: bool) {
        if force || self.last_sent_r1 != Some(self.bit) {
            let mut b = Bits::new();
            b.push(self.bit);
            self.broadcast(ctx, Payload::from_bits(&b));
            self.last_sent_r1 = Some(self.bit);
        }
    }

    fn send_r2(&mut self, ctx: &mut Ctx<'_>, force: bool) {
        if force || self.last_sent_r2 != Some(self.candidate) {
            let mut b = Bits::new();
            match self.candidate {
                Tri::Zero => {
                    b.push(false);
                    b.push(false);
                }
                Tri::One => {
                    b.push(false);
                    b.push(true);
                }
                Tri::Bot => {
                    b.push(true);
                    b.push(false);
                }
            }
            self.broadcast(ctx, Payload::from_bits(&b));
            self.last_sent_r2 = Some(self.candidate);
        }
    }

    fn set_r1(&mut self, idx: usize, bit: bool) {
        if let Some(old) = self.r1_cache[idx] {
            if old == bit {
                return;
            }
            self.r1_counts[old as usize] -= 1;
        }
        self.r1_cache[idx] = Some(bit);
        self.r1_counts[bit as usize] += 1;
    }

    fn tally_r1(&mut self, inbox: &Inbox) {
        for (idx, p) in self.take_votes(inbox, 1) {
            if p.bit_len == 1 {
                let bit = p.to_bits().get(0);
                self.set_r1(idx, bit);
            }
        }
        let my_bit = self.bit;
        self.set_r1(self.cfg.me, my_bit);
        let g = self.g();
        let t = self.t();
        let ones = self.r1_counts[1];
        let zeros = self.r1_counts[0];
        self.candidate = if ones >= g - t {
            Tri::One
        } else if zeros >= g - t {
            Tri::Zero
        } else {
            Tri::Bot
        };
    }

    fn set_r2(&mut self, idx: usize, tri: Tri) {
        if let Some(old) = self.r2_cache[idx] {
            if old == tri {
                return;
            }
            match old {
                Tri::Zero => self.r2_counts[0] -= 1,
                Tri::One => self.r2_counts[1] -= 1,
                Tri::Bot => {}
            }
        }
        self.r2_cache[idx] = Some(tri);
        match tri {
            Tri::Zero => self.r2_counts[0] += 1,
            Tri::One => self.r2_counts[1] += 1,
            Tri::Bot => {}
        }
    }

    fn tally_r2(&mut self, inbox: &Inbox) {
        for (idx, p) in self.take_votes(inbox, 2) {
            if p.bit_len == 2 {
                let bits = p.to_bits();
                let tri = match (bits.get(0), bits.get(1)) {
                    (false, false) => Tri::Zero,
                    (false, true) => Tri::One,
                    (true, false) => Tri::Bot,
                    _ => continue,
                };
                self.set_r2(idx, tri);
            }
        }
        let mine = self.candidate;
        self.set_r2(self.cfg.me, mine);
        let ones = self.r2_counts[1];
        let zeros = self.r2_counts[0];
        if ones == 0 && zeros == 0 {
            self.vote_bit = false;
            self.vote_count = 0;
        } else if ones >= zeros {
            self.vote_bit = true;
            self.vote_count = ones;
        } else {
            self.vote_bit = false;
            self.vote_count = zeros;
        }
    }

    fn apply_king(&mut self, inbox: &Inbox, p: usize) {
        let g = self.g();
        let t = self.t();
        let king = self.cfg.roster[p % g];
        let mut king_bit = false; // default on invalid or missing king value
        for (from, payload) in inbox.get(self.cfg.instance, self.me_vid().role) {
            if from == king && payload.bit_len == 1 {
                king_bit = payload.to_bits().get(0);
                break;
            }
        }
        if self.vote_count >= g - t {
            self.bit = self.vote_bit;
        } else {
            self.bit = king_bit;
        }
    }

    fn finish(&mut self) {
        let out = if self.bit { self.z_weak.clone() } else { None };
        self.output = Some(out);
        self.stage = Stage::Done;
    }
}

/// Standalone party machine hosting one or more virtual members of a single
/// agreement group; used by the verification suites.
pub struct BaTestParty {
    pub instances: Vec<BaInstance>,
}

impl BaTestParty {
    pub fn new(instances: Vec<BaInstance>) -> BaTestParty {
        BaTestParty { instances }
    }
}

impl crate::simnet::PartyMachine for BaTestParty {
    fn on_round(&mut self, ctx: &mut Ctx<'_>, inbox: &Inbox) {
        ctx.set_phase("ba");
        for inst in self.instances.iter_mut() {
            if !inst.done() {
                inst.on_round(ctx, inbox);
            }
        }
    }

    fn done(&self) -> bool {
        self.instances.iter().all(|i| i.done())
    }

    fn output(&self) -> Option<Bits> {
        let out = self.instances.first()?.output()?;
        Some(match out {
            Some(v) => {
                let mut b = Bits::new();
                b.push(true);
                b.extend(v);
                b
            }
            None => {
                let mut b = Bits::new();
                b.push(false);
                b
            }
        })
    }
}

/// Helper for building a one-virtual-per-party test group.
pub fn test_group(n: u32, role: u32) -> Arc<Vec<VirtualId>> {
    Arc::new((0..n).map(|p| vid(p, role)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simnet::{run, AdversaryKind, NullAdversary, RunConfig, StandardAdversary};

    fn mk_bits(bytes: &[u8]) -> Bits {
        Bits::from_bytes(bytes.to_vec())
    }

    fn run_ba(
        n: u32,
        inputs: Vec<Option<Bits>>,
        adversary: Option<(AdversaryKind, u32)>,
        seed: u64,
    ) -> crate::simnet::RunTranscript {
        let roster = test_group(n, 0);
        let machines: Vec<BaTestParty> = (0..n as usize)
            .map(|i| {
                let cfg = BaConfig {
                    instance: 42,
                    roster: roster.clone(),
                    me: i,
                    l_max: 64,
                    tag: "ba",
                };
                BaTestParty::new(vec![BaInstance::new(cfg, inputs[i].clone())])
            })
            .collect();
        let cfg = RunConfig {
            n_parties: n,
            seed,
            round_bound: ba_duration(n as usize) + 2,
            log_envelopes: false,
        };
        match adversary {
            None => run(&cfg, machines, &mut NullAdversary),
            Some((kind, t)) => {
                let mut adv = StandardAdversary::new(kind, t, seed);
                run(&cfg, machines, &mut adv)
            }
        }
    }

    fn decode_out(bytes: &[u8], bit_len: u64) -> Option<Vec<u8>> {
        let b = Bits::from_bytes_len(bytes.to_vec(), bit_len as usize);
        if b.get(0) {
            let mut v = Bits::new();
            for i in 1..b.len() {
                v.push(b.get(i));
            }
            Some(v.into_bytes())
        } else {
            None
        }
    }

    #[test]
    fn unanimous_inputs_decide_that_value() {
        for n in [1u32, 2, 4, 7] {
            let v = mk_bits(b"agree");
            let t = run_ba(n, vec![Some(v.clone()); n as usize], None, 5);
            for (i, out) in t.outputs.iter().enumerate() {
                let got = decode_out(out.as_ref().unwrap(), t.output_bit_lens[i].unwrap());
                assert_eq!(got.as_deref(), Some(&b"agree"[..]), "n={n} party={i}");
            }
        }
    }

    #[test]
    fn split_inputs_still_agree() {
        let n = 7u32;
        let inputs: Vec<Option<Bits>> = (0..n)
            .map(|i| Some(mk_bits(&[i as u8 % 2])))
            .collect();
        let t = run_ba(n, inputs, None, 9);
        let outs: Vec<_> = (0..n as usize)
            .map(|i| decode_out(t.outputs[i].as_ref().unwrap(), t.output_bit_lens[i].unwrap()))
            .collect();
        assert!(outs.windows(2).all(|w| w[0] == w[1]), "{outs:?}");
    }

    #[test]
    fn byzantine_minority_cannot_break_agreement() {
        for seed in 0..30u64 {
            for kind in AdversaryKind::all() {
                let n = 7u32;
                let inputs: Vec<Option<Bits>> =
                    (0..n).map(|i| Some(mk_bits(&[i as u8 / 4]))).collect();
                let t = run_ba(n, inputs, Some((kind, 2)), seed);
                assert!(!t.failed);
                let honest: Vec<usize> = (0..n as usize)
                    .filter(|i| !t.corruption_events.iter().any(|(_, p)| *p == *i as u32))
                    .collect();
                let outs: Vec<_> = honest
                    .iter()
                    .map(|&i| {
                        decode_out(t.outputs[i].as_ref().unwrap(), t.output_bit_lens[i].unwrap())
                    })
                    .collect();
                assert!(
                    outs.windows(2).all(|w| w[0] == w[1]),
                    "kind={kind:?} seed={seed} outs={outs:?}"
                );
            }
        }
    }

    #[test]
    fn extra_corruptions_still_terminate_within_schedule() {
        // 2 of 4 byzantine: beyond n/3, termination and the bit cap must hold
        let n = 4u32;
        let inputs: Vec<Option<Bits>> = (0..n).map(|i| Some(mk_bits(&[i as u8]))).collect();
        let t = run_ba(n, inputs, Some((AdversaryKind::RandomBits, 2)), 3);
        assert!(!t.failed);
        assert!(t.rounds <= ba_duration(4));
        assert!(t.honest_bits_total <= ba_declared_bit_cap(4, 64));
    }

    #[test]
    fn measured_bits_within_declared_cap() {
        for n in [4u32, 7, 10] {
            let inputs: Vec<Option<Bits>> = (0..n).map(|i| Some(mk_bits(&[i as u8 / 3]))).collect();
            let t = run_ba(n, inputs, None, 11);
            assert!(
                t.honest_bits_total <= ba_declared_bit_cap(n as usize, 64),
                "n={n}: {} > {}",
                t.honest_bits_total,
                ba_declared_bit_cap(n as usize, 64)
            );
        }
    }

    #[test]
    fn multi_participation_one_party_simulates_several_virtuals() {
        // 6 virtuals over 3 parties, all honest, split inputs
        let roster: Arc<Vec<VirtualId>> =
            Arc::new((0..6u32).map(|i| vid(i % 3, i / 3)).collect());
        let machines: Vec<BaTestParty> = (0..3u32)
            .map(|party| {
                let insts = (0..6usize)
                    .filter(|&i| roster[i].party == party)
                    .map(|i| {
                        BaInstance::new(
                            BaConfig {
                                instance: 1,
                                roster: roster.clone(),
                                me: i,
                                l_max: 16,
                                tag: "ba",
                            },
                            Some(mk_bits(&[(i % 2) as u8])),
                        )
                    })
                    .collect();
                BaTestParty::new(insts)
            })
            .collect();
        let t = run(
            &RunConfig { n_parties: 3, seed: 7, round_bound: ba_duration(6) + 2, log_envelopes: false },
            machines,
            &mut NullAdversary,
        );
        assert!(!t.failed);
        let outs: Vec<_> = t.outputs.iter().flatten().collect();
        assert_eq!(outs.len(), 3);
        assert!(outs.windows(2).all(|w| w[0] == w[1]));
    }
}
