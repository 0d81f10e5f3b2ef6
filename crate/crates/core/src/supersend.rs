//! Group-to-group message transfer: share distribution, reconstruction, and
//! the composed supersend.
//!
//! A sender group A moves a message m to a receiver group B as n_B
//! Reed-Solomon shares under a Merkle root. B agrees on the root to
//! reconstruct (one agreement instance), rebroadcasts matching shares,
//! decodes, agrees on whether anyone succeeded (a second, binary instance),
//! and if so re-shards the reconstructed message so every member ends with
//! it (a third instance inside the second reconstruction). The schedule is a
//! pure function of (n_A, n_B, L); parties that resolve bot early stay on
//! schedule silently.

use crate::ba::{ba_declared_bit_cap, ba_duration, BaConfig, BaInstance};
use crate::bits::Bits;
use crate::erasure::{bundle_size_cap, Digest, RsConfig, ShareBundle, DIGEST_LEN};
use crate::simnet::{AdvMeta, Ctx, Dest, IdGen, Inbox, OutMsg, Payload, VirtualId, ENVELOPE_BITS};
use std::collections::HashMap;
use std::sync::Arc;

/// Sender-group / receiver-group rosters with the public length cap.
#[derive(Debug, Clone)]
pub struct GroupChannel {
    pub group_a: Arc<Vec<VirtualId>>,
    pub group_b: Arc<Vec<VirtualId>>,
    pub length_cap: u64,
}

impl GroupChannel {
    pub fn new(
        group_a: Arc<Vec<VirtualId>>,
        group_b: Arc<Vec<VirtualId>>,
        length_cap: u64,
    ) -> GroupChannel {
        debug_assert!(group_a.iter().all(|a| !group_b.contains(a)));
        GroupChannel { group_a, group_b, length_cap }
    }

    pub fn rs_config(&self) -> RsConfig {
        RsConfig::new(self.group_b.len() as u16)
    }
}

/// Instance ids for one supersend invocation, allocated identically by every
/// party.
#[derive(Debug, Clone)]
pub struct SupersendIds {
    pub send1: u64,
    pub recon1_ba: u64,
    pub recon1_shares: u64,
    pub accept_ba: u64,
    pub send2: u64,
    pub recon2_ba: u64,
    pub recon2_shares: u64,
}

impl SupersendIds {
    pub fn fresh(ids: &mut IdGen) -> SupersendIds {
        SupersendIds {
            send1: ids.fresh(),
            recon1_ba: ids.fresh(),
            recon1_shares: ids.fresh(),
            accept_ba: ids.fresh(),
            send2: ids.fresh(),
            recon2_ba: ids.fresh(),
            recon2_shares: ids.fresh(),
        }
    }
}

/// Parent rounds one supersend occupies.
pub fn supersend_duration(n_b: usize) -> u32 {
    3 * ba_duration(n_b).max(1) + 2
}

/// Declared honest-bit cap: every share round at full size plus the embedded
/// agreement schedules.
pub fn supersend_declared_cap(n_a: usize, n_b: usize, l: u64) -> u64 {
    let bundle_bits = bundle_size_cap(RsConfig::new(n_b as u16), l) as u64 * 8 + ENVELOPE_BITS;
    let send1 = n_a as u64 * n_b as u64 * bundle_bits;
    let rebroadcast = (n_b as u64) * (n_b as u64) * bundle_bits;
    let send2 = (n_b as u64) * (n_b as u64) * bundle_bits;
    let root_ba = ba_declared_bit_cap(n_b, DIGEST_LEN as u64 * 8);
    let bit_ba = ba_declared_bit_cap(n_b, 1);
    send1 + send2 + 2 * rebroadcast + 2 * root_ba + bit_ba
}

fn zero_root_bits() -> Bits {
    Bits::from_bytes(vec![0u8; DIGEST_LEN])
}

fn root_to_bits(root: &Digest) -> Bits {
    Bits::from_bytes(root.to_vec())
}

fn bits_to_root(b: &Bits) -> Option<Digest> {
    if b.len() != DIGEST_LEN * 8 {
        return None;
    }
    let mut d = [0u8; DIGEST_LEN];
    d.copy_from_slice(b.as_bytes());
    Some(d)
}

/// Sends one bundle per receiver; the spec's one-round share distribution.
pub fn send_shares(
    ctx: &mut Ctx<'_>,
    instance: u64,
    from: VirtualId,
    group_b: &[VirtualId],
    message: &Bits,
    tag: &'static str,
) {
    let n_b = group_b.len() as u16;
    let payloads = ctx.memo.bundle_payloads_for(message, n_b);
    let message = Arc::new(message.clone());
    for (i, to) in group_b.iter().enumerate() {
        ctx.send(OutMsg {
            instance,
            from,
            dest: Dest::One(*to),
            payload: payloads[i].clone(),
            tag,
            free_targets: 0,
            meta: Some(AdvMeta::SendShares {
                message: message.clone(),
                n_shares: n_b,
                index: (i + 1) as u16,
            }),
        });
    }
}

/// Collects the valid tuples addressed to receiver `index` (1-based): size
/// cap enforced, inclusion proof checked, one tuple per sender.
pub fn collect_bundles(
    ctx: &mut Ctx<'_>,
    inbox: &Inbox,
    instance: u64,
    me: VirtualId,
    index: u16,
    cfg: RsConfig,
    length_cap: u64,
) -> Vec<(VirtualId, ShareBundle)> {
    let cap_bytes = bundle_size_cap(cfg, length_cap);
    let mut seen: HashMap<VirtualId, ()> = HashMap::new();
    let mut out = Vec::new();
    for (from, payload) in inbox.get(instance, me.role) {
        if payload.bit_len > cap_bytes as u64 * 8 || seen.contains_key(&from) {
            continue;
        }
        let Some(bundle) = ShareBundle::decode(&payload.data) else {
            continue;
        };
        if bundle.index != index || !ctx.memo.bundle_valid(&bundle, &payload.data, cfg) {
            continue; // invalid or misdirected: silently filtered
        }
        seen.insert(from, ());
        out.push((from, bundle));
    }
    out
}

/// One reconstruction phase for one receiver: plurality tuple, agreement on
/// the root, share rebroadcast, filtered decode.
struct ReconPhase {
    ba: BaInstance,
    shares_instance: u64,
    me: VirtualId,
    group_b: Arc<Vec<VirtualId>>,
    cfg: RsConfig,
    length_cap: u64,
    tag: &'static str,
    selected: Option<ShareBundle>,
    z_star: Option<Digest>,
    local: u32,
    output: Option<Option<Bits>>,
}

impl ReconPhase {
    /// Selection happens at construction; the caller must drive `on_round`
    /// starting the same parent round.
    #[allow(clippy::too_many_arguments)]
    fn new(
        ba_instance: u64,
        shares_instance: u64,
        me_index: usize,
        group_b: Arc<Vec<VirtualId>>,
        tuples: &[(VirtualId, ShareBundle)],
        cfg: RsConfig,
        length_cap: u64,
        tag: &'static str,
    ) -> ReconPhase {
        // most frequent tuple, ties by lexicographically least root
        let mut counts: HashMap<Vec<u8>, (usize, ShareBundle)> = HashMap::new();
        for (_, b) in tuples {
            counts.entry(b.encode()).or_insert((0, b.clone())).0 += 1;
        }
        let selected = counts
            .values()
            .max_by(|(ca, a), (cb, b)| ca.cmp(cb).then_with(|| b.root.cmp(&a.root)))
            .map(|(_, b)| b.clone());
        let input = selected
            .as_ref()
            .map(|b| root_to_bits(&b.root))
            .unwrap_or_else(zero_root_bits);
        let me = group_b[me_index];
        let ba = BaInstance::new(
            BaConfig {
                instance: ba_instance,
                roster: group_b.clone(),
                me: me_index,
                l_max: DIGEST_LEN as u64 * 8,
                tag,
            },
            Some(input),
        );
        ReconPhase {
            ba,
            shares_instance,
            me,
            group_b,
            cfg,
            length_cap,
            tag,
            selected,
            z_star: None,
            local: 0,
            output: None,
        }
    }

    pub(crate) fn duration(n_b: usize) -> u32 {
        ba_duration(n_b).max(1) + 1
    }

    fn done(&self) -> bool {
        self.output.is_some()
    }

    fn on_round(&mut self, ctx: &mut Ctx<'_>, inbox: &Inbox) {
        let n_b = self.group_b.len();
        let d_ba = ba_duration(n_b).max(1);
        let r = self.local;
        self.local += 1;
        if r < d_ba {
            if !self.ba.done() {
                self.ba.on_round(ctx, inbox);
            }
            if self.ba.done() && r == d_ba - 1 {
                // agreement concluded: rebroadcast my share if it matches
                let z = self
                    .ba
                    .output()
                    .and_then(|o| o.as_ref())
                    .and_then(bits_to_root)
                    .unwrap_or([0u8; DIGEST_LEN]);
                self.z_star = Some(z);
                if let Some(sel) = &self.selected {
                    if sel.root == z {
                        let others: Vec<VirtualId> = self
                            .group_b
                            .iter()
                            .copied()
                            .filter(|&v| v != self.me)
                            .collect();
                        let free = others
                            .iter()
                            .filter(|v| v.party == self.me.party)
                            .count() as u32;
                        ctx.send(OutMsg {
                            instance: self.shares_instance,
                            from: self.me,
                            dest: Dest::Many(Arc::new(others)),
                            payload: Payload::from_bytes(sel.encode()),
                            tag: self.tag,
                            free_targets: free,
                            meta: None,
                        });
                    }
                }
            }
        } else if r == d_ba {
            // collect rebroadcast shares valid for z*, decode
            let z = self.z_star.unwrap_or([0u8; DIGEST_LEN]);
            let cap_bytes = bundle_size_cap(self.cfg, self.length_cap);
            let mut by_index: HashMap<u16, ShareBundle> = HashMap::new();
            if let Some(sel) = &self.selected {
                if sel.root == z {
                    by_index.insert(sel.index, sel.clone());
                }
            }
            for (_, payload) in inbox.get(self.shares_instance, self.me.role) {
                if payload.bit_len > cap_bytes as u64 * 8 {
                    continue;
                }
                let Some(b) = ShareBundle::decode(&payload.data) else {
                    continue;
                };
                if b.root == z && ctx.memo.bundle_valid(&b, &payload.data, self.cfg) {
                    by_index.entry(b.index).or_insert(b);
                }
            }
            let out = if by_index.len() * 2 <= n_b {
                None
            } else {
                let mut shares: Vec<(u16, crate::erasure::Share)> = by_index
                    .into_iter()
                    .map(|(i, b)| (i, b.share))
                    .collect();
                shares.sort_by_key(|(i, _)| *i);
                ctx.memo.decode_for(&z, &shares, self.cfg, self.length_cap)
            };
            self.output = Some(out);
        }
    }
}

/// One virtual sender's side of a supersend: distribute shares in round
/// zero, done.
pub struct SupersendSender {
    ids: SupersendIds,
    me: VirtualId,
    channel: GroupChannel,
    input: Option<Bits>,
    tag: &'static str,
    local: u32,
}

impl SupersendSender {
    pub fn new(
        ids: SupersendIds,
        me: VirtualId,
        channel: GroupChannel,
        input: Option<Bits>,
        tag: &'static str,
    ) -> SupersendSender {
        let input = input.filter(|b| b.len() as u64 <= channel.length_cap);
        SupersendSender { ids, me, channel, input, tag, local: 0 }
    }

    pub fn on_round(&mut self, ctx: &mut Ctx<'_>) {
        if self.local == 0 {
            if let Some(m) = &self.input {
                send_shares(ctx, self.ids.send1, self.me, &self.channel.group_b, m, self.tag);
            }
        }
        self.local += 1;
    }
}

enum RecvStage {
    Collect,
    Recon1(ReconPhase),
    AcceptBa(BaInstance, Option<Bits>),
    Recon2 {
        waiting: bool,
        phase: Option<ReconPhase>,
    },
    Finished,
}

/// One virtual receiver's side of a supersend.
pub struct SupersendReceiver {
    ids: SupersendIds,
    me_index: usize,
    channel: GroupChannel,
    tag: &'static str,
    local: u32,
    stage: RecvStage,
    output: Option<Option<Bits>>,
}

impl SupersendReceiver {
    pub fn new(
        ids: SupersendIds,
        me_index: usize,
        channel: GroupChannel,
        tag: &'static str,
    ) -> SupersendReceiver {
        SupersendReceiver {
            ids,
            me_index,
            channel,
            tag,
            local: 0,
            stage: RecvStage::Collect,
            output: None,
        }
    }

    pub fn me(&self) -> VirtualId {
        self.channel.group_b[self.me_index]
    }

    pub fn done(&self) -> bool {
        matches!(self.stage, RecvStage::Finished)
            || self.local >= supersend_duration(self.channel.group_b.len())
    }

    /// Common output after the schedule completes: the message or bot.
    pub fn output(&self) -> Option<&Option<Bits>> {
        if self.done() {
            Some(self.output.as_ref().unwrap_or(&None))
        } else {
            None
        }
    }

    pub fn on_round(&mut self, ctx: &mut Ctx<'_>, inbox: &Inbox) {
        let cfg = self.channel.rs_config();
        let me = self.channel.group_b[self.me_index];
        let share_index = (self.me_index + 1) as u16;
        let r = self.local;
        self.local += 1;
        match &mut self.stage {
            RecvStage::Collect => {
                if r == 0 {
                    return; // senders transmit this round
                }
                // r == 1: tuples arrive; select and start agreement
                let tuples = collect_bundles(
                    ctx,
                    inbox,
                    self.ids.send1,
                    me,
                    share_index,
                    cfg,
                    self.channel.length_cap,
                );
                let mut phase = ReconPhase::new(
                    self.ids.recon1_ba,
                    self.ids.recon1_shares,
                    self.me_index,
                    self.channel.group_b.clone(),
                    &tuples,
                    cfg,
                    self.channel.length_cap,
                    self.tag,
                );
                phase.on_round(ctx, inbox);
                self.stage = RecvStage::Recon1(phase);
            }
            RecvStage::Recon1(phase) => {
                phase.on_round(ctx, inbox);
                if phase.done() {
                    let m1 = phase.output.clone().flatten();
                    // binary agreement on whether reconstruction succeeded
                    let mut bit = Bits::new();
                    bit.push(m1.is_some());
                    let mut ba = BaInstance::new(
                        BaConfig {
                            instance: self.ids.accept_ba,
                            roster: self.channel.group_b.clone(),
                            me: self.me_index,
                            l_max: 1,
                            tag: self.tag,
                        },
                        Some(bit),
                    );
                    ba.on_round(ctx, inbox);
                    self.stage = RecvStage::AcceptBa(ba, m1);
                }
            }
            RecvStage::AcceptBa(ba, m1) => {
                if !ba.done() {
                    ba.on_round(ctx, inbox);
                }
                if ba.done() {
                    let accepted = ba
                        .output()
                        .and_then(|o| o.as_ref())
                        .map(|b| b.len() == 1 && b.get(0))
                        .unwrap_or(false);
                    let m1 = m1.clone();
                    if !accepted {
                        self.output = Some(None);
                        self.stage = RecvStage::Finished;
                        return;
                    }
                    // holders re-shard the reconstructed message
                    if let Some(m) = &m1 {
                        send_shares(ctx, self.ids.send2, me, &self.channel.group_b, m, self.tag);
                    }
                    self.stage = RecvStage::Recon2 { waiting: true, phase: None };
                }
            }
            RecvStage::Recon2 { waiting, phase } => {
                if *waiting {
                    *waiting = false;
                    let tuples = collect_bundles(
                        ctx,
                        inbox,
                        self.ids.send2,
                        me,
                        share_index,
                        cfg,
                        self.channel.length_cap,
                    );
                    let mut p = ReconPhase::new(
                        self.ids.recon2_ba,
                        self.ids.recon2_shares,
                        self.me_index,
                        self.channel.group_b.clone(),
                        &tuples,
                        cfg,
                        self.channel.length_cap,
                        self.tag,
                    );
                    p.on_round(ctx, inbox);
                    *phase = Some(p);
                } else if let Some(p) = phase {
                    p.on_round(ctx, inbox);
                    if p.done() {
                        self.output = Some(p.output.clone().flatten());
                        self.stage = RecvStage::Finished;
                    }
                }
            }
            RecvStage::Finished => {}
        }
    }
}
