//! CA among supernodes: every supernode supersends its value to the group of
//! all supernodes, and each virtual party applies the safe-area decision rule
//! to the common view.
//!
//! The same machinery runs the bot-tolerant committee variant: singleton
//! supernodes with the min(k, t) safe-area rule.

use crate::bits::Bits;
use crate::convexity::{pick_canonical, safe_area, ConvexSpace, Element, ValueMultiset};
use crate::simnet::{vid, Ctx, IdGen, Inbox, VirtualId};
use crate::supersend::{
    supersend_duration, GroupChannel, SupersendIds, SupersendReceiver, SupersendSender,
};
use std::sync::Arc;

use super::{
    role, transport_decode, transport_encode, TransportValue, FLAVOR_CA_A, FLAVOR_CA_B,
};

/// How the common multiset turns into a decision.
#[derive(Debug, Clone, Copy)]
pub enum DecisionRule {
    /// t_N = ceil(N / omega) - 1, k = |M| - (N - t_N), area safe_k.
    Supernode { omega: u32 },
    /// t = ceil(N / (omega + 1)) - 1, k = |M| - (N - 2t), area safe_min(k, t);
    /// tolerates t missing inputs on top of t byzantine ones.
    BotFriendly { omega: u32 },
}

/// Static layout of one instance, derived identically by every party.
#[derive(Debug, Clone)]
pub struct SupernodesCaLayout {
    pub stage: u32,
    pub group: u32,
    /// ordinal -> sorted member parties
    pub supernodes: Arc<Vec<Vec<u32>>>,
    pub b_roster: Arc<Vec<VirtualId>>,
    /// b slot -> (supernode ordinal, party)
    pub b_slots: Arc<Vec<(u32, u32)>>,
    pub space: ConvexSpace,
    pub l_cap: u64,
    pub rule: DecisionRule,
    pub ids: Vec<SupersendIds>,
    pub tag: &'static str,
}

impl SupernodesCaLayout {
    pub fn build(
        stage: u32,
        group: u32,
        supernodes: Vec<Vec<u32>>,
        space: ConvexSpace,
        l_cap: u64,
        rule: DecisionRule,
        tag: &'static str,
        ids: &mut IdGen,
    ) -> SupernodesCaLayout {
        let mut b_roster = Vec::new();
        let mut b_slots = Vec::new();
        for (j, members) in supernodes.iter().enumerate() {
            for &p in members {
                b_roster.push(vid(p, role(stage, group, j as u32, FLAVOR_CA_B)));
                b_slots.push((j as u32, p));
            }
        }
        let ss_ids = (0..supernodes.len())
            .map(|_| SupersendIds::fresh(ids))
            .collect();
        SupernodesCaLayout {
            stage,
            group,
            supernodes: Arc::new(supernodes),
            b_roster: Arc::new(b_roster),
            b_slots: Arc::new(b_slots),
            space,
            l_cap,
            rule,
            ids: ss_ids,
            tag,
        }
    }

    pub fn n_supernodes(&self) -> usize {
        self.supernodes.len()
    }

    pub fn a_roster(&self, k: usize) -> Arc<Vec<VirtualId>> {
        Arc::new(
            self.supernodes[k]
                .iter()
                .map(|&p| vid(p, role(self.stage, self.group, k as u32, FLAVOR_CA_A)))
                .collect(),
        )
    }

    pub fn channel(&self, k: usize) -> GroupChannel {
        GroupChannel::new(self.a_roster(k), self.b_roster.clone(), self.l_cap)
    }

    pub fn duration(&self) -> u32 {
        supersend_duration(self.b_roster.len())
    }
}

pub fn supernodes_ca_duration(b_len: usize) -> u32 {
    supersend_duration(b_len)
}

/// One party's machines for one instance: a sender per owned supernode
/// membership, a receiver per (owned B slot, supersend).
pub struct SupernodesCa {
    pub layout: Arc<SupernodesCaLayout>,
    senders: Vec<SupersendSender>,
    /// (my b slot, receiver) per supersend
    receivers: Vec<(usize, SupersendReceiver)>,
    my_slots: Vec<usize>,
    local: u32,
    decisions: Option<Vec<(usize, Option<Bits>)>>,
}

impl SupernodesCa {
    /// `my_inputs[j]` = the value this party holds for supernode ordinal j
    /// (only ordinals whose member list contains the party are read).
    pub fn new(
        layout: Arc<SupernodesCaLayout>,
        me: u32,
        my_inputs: &dyn Fn(usize) -> Option<Bits>,
    ) -> SupernodesCa {
        let mut senders = Vec::new();
        for (k, members) in layout.supernodes.iter().enumerate() {
            if members.contains(&me) {
                senders.push(SupersendSender::new(
                    layout.ids[k].clone(),
                    vid(me, role(layout.stage, layout.group, k as u32, FLAVOR_CA_A)),
                    layout.channel(k),
                    my_inputs(k),
                    layout.tag,
                ));
            }
        }
        let my_slots: Vec<usize> = layout
            .b_slots
            .iter()
            .enumerate()
            .filter(|(_, (_, p))| *p == me)
            .map(|(s, _)| s)
            .collect();
        let mut receivers = Vec::new();
        for &slot in &my_slots {
            for k in 0..layout.n_supernodes() {
                receivers.push((
                    slot,
                    SupersendReceiver::new(layout.ids[k].clone(), slot, layout.channel(k), layout.tag),
                ));
            }
        }
        SupernodesCa {
            layout,
            senders,
            receivers,
            my_slots,
            local: 0,
            decisions: None,
        }
    }

    pub fn done(&self) -> bool {
        self.decisions.is_some()
    }

    /// (b slot, transport-encoded value or bot), once done.
    pub fn decisions(&self) -> Option<&[(usize, Option<Bits>)]> {
        self.decisions.as_deref()
    }

    /// The slots this party owns in the B roster.
    pub fn my_slots(&self) -> &[usize] {
        &self.my_slots
    }

    pub fn on_round(&mut self, ctx: &mut Ctx<'_>, inbox: &Inbox) {
        if self.done() {
            return;
        }
        self.local += 1;
        for s in self.senders.iter_mut() {
            s.on_round(ctx);
        }
        let mut all_done = true;
        for (_, r) in self.receivers.iter_mut() {
            if !r.done() {
                r.on_round(ctx, inbox);
            }
            all_done &= r.done();
        }
        if all_done && self.local >= 2 {
            self.decide();
        }
    }

    fn decide(&mut self) {
        let n = self.layout.n_supernodes();
        let mut decisions = Vec::with_capacity(self.my_slots.len());
        for &slot in &self.my_slots {
            // this virtual's view: one output per supersend
            let mut m_items: Vec<Element> = Vec::new();
            for (s, r) in &self.receivers {
                if *s != slot {
                    continue;
                }
                if let Some(Some(bits)) = r.output() {
                    if let Some(e) = transport_decode(&self.layout.space, bits) {
                        m_items.push(e);
                    }
                }
            }
            decisions.push((slot, decide_from_view(
                &self.layout.space,
                m_items,
                n,
                self.layout.rule,
            )));
        }
        self.decisions = Some(decisions);
    }
}

/// The safe-area decision applied to a common view; bot whenever the view is
/// too small or the area is empty.
pub fn decide_from_view(
    space: &ConvexSpace,
    m_items: Vec<Element>,
    n: usize,
    rule: DecisionRule,
) -> Option<Bits> {
    let m_len = m_items.len();
    let k = match rule {
        DecisionRule::Supernode { omega } => {
            let t_n = n.div_ceil(omega as usize) - 1;
            let need = n - t_n;
            if m_len < need {
                return None;
            }
            m_len - need
        }
        DecisionRule::BotFriendly { omega } => {
            let t = n.div_ceil(omega as usize + 1) - 1;
            let need = n.saturating_sub(2 * t);
            if m_len < need {
                return None;
            }
            (m_len - need).min(t)
        }
    };
    let multiset = ValueMultiset::new(m_items);
    let area = safe_area(space, &multiset, k).ok()?;
    if area.is_empty() {
        return None;
    }
    pick_canonical(&area)?;
    transport_encode(space, TransportValue::Witness(&area))
}
