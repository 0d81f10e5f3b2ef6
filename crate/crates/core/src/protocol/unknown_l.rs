//! The unknown-length mechanism: estimate a common cap on the honest input
//! lengths, truncate long inputs to bot, rebuild a valid input for every
//! party through bot-tolerant committees, then run the fixed-length protocol.

use crate::ba::{ba_duration, BaConfig, BaInstance};
use crate::bits::Bits;
use crate::convexity::{ConvexSpace, Element, Value};
use crate::extractor::assign_parties_to_committees_unknown_l;
use crate::simnet::{vid, Ctx, Dest, IdGen, Inbox, OutMsg, Payload, PartyMachine, VirtualId};
use crate::supersend::supersend_duration;
use std::collections::HashMap;
use std::sync::Arc;

use super::fixed_l::{fixed_l_round_bound, FixedLParty};
use super::supernodes_ca::{DecisionRule, SupernodesCa, SupernodesCaLayout};
use super::{transport_cap, ProtocolConfig};

const ROLE_MAIN: u32 = 0xF000;
const STAGE_COMMITTEE: u32 = 800;

fn nat_space() -> ConvexSpace {
    ConvexSpace::grid_1d(1 << 62)
}

fn nat_bits(v: u64) -> Bits {
    nat_space()
        .element(Value::Grid(v.min((1 << 62) - 1)))
        .unwrap()
        .encoding()
        .clone()
}

fn bits_nat(b: &Bits) -> Option<u64> {
    match nat_space().decode(b).ok()? {
        Value::Grid(v) => Some(v),
        _ => None,
    }
}

/// ceil(log2 n^2) + 1 parallel bit instances; the output is 2^j for the
/// lowest accepting instance.
pub struct ExponentialSearch {
    bas: Vec<BaInstance>,
    output: Option<u64>,
}

pub fn exp_search_duration(n: usize) -> u32 {
    ba_duration(n)
}

fn ceil_log2(x: u64) -> u32 {
    64 - (x - 1).leading_zeros()
}

impl ExponentialSearch {
    /// `l_in` must lie in 1..=n^2 for honest parties.
    pub fn new(n: u32, me: usize, l_in: u64, ids: &mut IdGen) -> ExponentialSearch {
        let roster: Arc<Vec<VirtualId>> = Arc::new((0..n).map(|p| vid(p, ROLE_MAIN)).collect());
        let top = ceil_log2((n as u64) * (n as u64));
        let bas = (0..=top)
            .map(|i| {
                let mut bit = Bits::new();
                bit.push(l_in <= 1u64 << i);
                BaInstance::new(
                    BaConfig {
                        instance: ids.fresh(),
                        roster: roster.clone(),
                        me,
                        l_max: 1,
                        tag: "exp-search",
                    },
                    Some(bit),
                )
            })
            .collect();
        ExponentialSearch { bas, output: None }
    }

    pub fn done(&self) -> bool {
        self.output.is_some()
    }

    pub fn output(&self) -> Option<u64> {
        self.output
    }

    pub fn on_round(&mut self, ctx: &mut Ctx<'_>, inbox: &Inbox) {
        let mut all_done = true;
        for ba in self.bas.iter_mut() {
            if !ba.done() {
                ba.on_round(ctx, inbox);
            }
            all_done &= ba.done();
        }
        if all_done && self.output.is_none() {
            let accept = |ba: &BaInstance| -> bool {
                ba.output()
                    .and_then(|o| o.as_ref())
                    .map(|b| b.len() == 1 && b.get(0))
                    .unwrap_or(false)
            };
            let j = self
                .bas
                .iter()
                .position(accept)
                .unwrap_or(self.bas.len() - 1);
            self.output = Some(1u64 << j);
        }
    }
}

/// CA on naturals with the simple high-cost structure: every party's value
/// is disseminated by one agreement instance per sender, then the safe-area
/// order statistic decides.
pub struct HighCostCa {
    n: u32,
    me: usize,
    input: u64,
    instance_send: u64,
    ba_ids: Vec<u64>,
    roster: Arc<Vec<VirtualId>>,
    bas: Vec<BaInstance>,
    local: u32,
    output: Option<u64>,
}

pub fn high_cost_ca_duration(n: usize) -> u32 {
    1 + ba_duration(n)
}

impl HighCostCa {
    pub fn new(n: u32, me: usize, input: u64, ids: &mut IdGen) -> HighCostCa {
        let roster: Arc<Vec<VirtualId>> = Arc::new((0..n).map(|p| vid(p, ROLE_MAIN)).collect());
        HighCostCa {
            n,
            me,
            input,
            instance_send: ids.fresh(),
            ba_ids: (0..n).map(|_| ids.fresh()).collect(),
            roster,
            bas: Vec::new(),
            local: 0,
            output: None,
        }
    }

    pub fn done(&self) -> bool {
        self.output.is_some()
    }

    pub fn output(&self) -> Option<u64> {
        self.output
    }

    pub fn on_round(&mut self, ctx: &mut Ctx<'_>, inbox: &Inbox) {
        let r = self.local;
        self.local += 1;
        let me_vid = self.roster[self.me];
        if r == 0 {
            let others: Vec<VirtualId> = self
                .roster
                .iter()
                .copied()
                .filter(|v| *v != me_vid)
                .collect();
            ctx.send(OutMsg {
                instance: self.instance_send,
                from: me_vid,
                dest: Dest::Many(Arc::new(others)),
                payload: Payload::from_bits(&nat_bits(self.input)),
                tag: "high-cost-ca",
                free_targets: 0,
                meta: None,
            });
            return;
        }
        if r == 1 {
            // one agreement per sender on the value it disseminated
            let mut received: HashMap<u32, Bits> = HashMap::new();
            for (from, payload) in inbox.get(self.instance_send, me_vid.role) {
                if payload.bit_len <= 63 {
                    received.entry(from.party).or_insert_with(|| payload.to_bits());
                }
            }
            received.insert(me_vid.party, nat_bits(self.input));
            self.bas = (0..self.n as usize)
                .map(|sender| {
                    let input = received
                        .get(&(sender as u32))
                        .and_then(|b| bits_nat(b).map(|_| b.clone()));
                    BaInstance::new(
                        BaConfig {
                            instance: self.ba_ids[sender],
                            roster: self.roster.clone(),
                            me: self.me,
                            l_max: 63,
                            tag: "high-cost-ca",
                        },
                        input,
                    )
                })
                .collect();
        }
        let mut all_done = true;
        for ba in self.bas.iter_mut() {
            if !ba.done() {
                ba.on_round(ctx, inbox);
            }
            all_done &= ba.done();
        }
        if all_done && !self.bas.is_empty() && self.output.is_none() {
            let mut m: Vec<u64> = self
                .bas
                .iter()
                .filter_map(|ba| ba.output().and_then(|o| o.as_ref()).and_then(bits_nat))
                .collect();
            m.sort_unstable();
            let t = (self.n as usize - 1) / 3;
            // safe_t on the interval space: the (t+1)-th smallest, guarded
            // against degenerate views
            let out = if m.is_empty() {
                0
            } else {
                m[t.min(m.len() - 1)]
            };
            self.output = Some(out);
        }
    }
}

enum Stage {
    LengthExchange,
    AcceptBa {
        ba: BaInstance,
        l_prime: u64,
    },
    HighCost(HighCostCa),
    ExpSearch(ExponentialSearch),
    Committees {
        l_tilde: u64,
        cas: Vec<(usize, SupernodesCa)>,
        rounds: u32,
        elapsed: u32,
        committee_count: usize,
    },
    Deliver {
        l_tilde: u64,
    },
    FixedL(Box<FixedLParty>),
    Done,
}

/// One party's unknown-length protocol machine.
pub struct UnknownLParty {
    cfg: ProtocolConfig,
    me: u32,
    input: Option<Element>,
    ids: IdGen,
    stage: Stage,
    length_instance: u64,
    deliver_instance: u64,
    output: Option<Bits>,
}

impl UnknownLParty {
    pub fn new(cfg: ProtocolConfig, me: u32, input: Option<Element>) -> UnknownLParty {
        let mut ids = IdGen::new();
        let length_instance = ids.fresh();
        let deliver_instance = ids.fresh();
        UnknownLParty {
            cfg,
            me,
            input,
            ids,
            stage: Stage::LengthExchange,
            length_instance,
            deliver_instance,
            output: None,
        }
    }

    fn me_vid(&self) -> VirtualId {
        vid(self.me, ROLE_MAIN)
    }

    fn everyone_else(&self) -> Arc<Vec<VirtualId>> {
        Arc::new(
            (0..self.cfg.n as u32)
                .filter(|&p| p != self.me)
                .map(|p| vid(p, ROLE_MAIN))
                .collect(),
        )
    }

    fn enter_committees(&mut self, ctx: &mut Ctx<'_>, inbox: &Inbox, l_tilde: u64) {
        // drop inputs longer than the agreed cap
        let input = self
            .input
            .clone()
            .filter(|e| e.bit_length() as u64 <= l_tilde);
        let assignment =
            assign_parties_to_committees_unknown_l(self.cfg.n, self.cfg.omega(), self.cfg.epsilon)
                .expect("committee assignment");
        let l_cap = transport_cap(&self.cfg.space, l_tilde, 0);
        let mut cas = Vec::new();
        let mut max_rounds = 0;
        for c in 0..assignment.group_count {
            let members = assignment.distinct_members(c);
            let layout = Arc::new(SupernodesCaLayout::build(
                STAGE_COMMITTEE,
                c as u32,
                members.iter().map(|&p| vec![p]).collect(),
                self.cfg.space.clone(),
                l_cap,
                DecisionRule::BotFriendly { omega: self.cfg.omega() },
                "ca-bot",
                &mut self.ids,
            ));
            max_rounds = max_rounds.max(layout.duration());
            if members.contains(&self.me) {
                let my_input = input
                    .as_ref()
                    .and_then(|e| {
                        super::transport_encode(
                            &self.cfg.space,
                            super::TransportValue::Element(e),
                        )
                    });
                let me = self.me;
                let members_owned = members.clone();
                let ca = SupernodesCa::new(layout, me, &move |ordinal| {
                    if members_owned[ordinal] == me {
                        my_input.clone()
                    } else {
                        None
                    }
                });
                cas.push((c, ca));
            }
        }
        let committee_count = assignment.group_count;
        let mut stage = Stage::Committees {
            l_tilde,
            cas,
            rounds: max_rounds,
            elapsed: 0,
            committee_count,
        };
        // the committees start this very round
        if let Stage::Committees { cas, elapsed, .. } = &mut stage {
            for (_, ca) in cas.iter_mut() {
                ca.on_round(ctx, inbox);
            }
            *elapsed = 1;
        }
        self.stage = stage;
    }
}

impl PartyMachine for UnknownLParty {
    fn on_round(&mut self, ctx: &mut Ctx<'_>, inbox: &Inbox) {
        let n = self.cfg.n;
        let t = self.cfg.t;
        match &mut self.stage {
            Stage::LengthExchange => {
                if ctx.round == 0 {
                    ctx.set_phase("length-exchange");
                    // fixed 64-bit length field
                    let mut b = Bits::new();
                    b.push_uint(
                        self.input.as_ref().map(|e| e.bit_length() as u64).unwrap_or(0),
                        64,
                    );
                    ctx.send(OutMsg {
                        instance: self.length_instance,
                        from: self.me_vid(),
                        dest: Dest::Many(self.everyone_else()),
                        payload: Payload::from_bits(&b),
                        tag: "length-exchange",
                        free_targets: 0,
                        meta: None,
                    });
                    return;
                }
                // round 1: tally lengths, take the (n - t)-th largest
                ctx.set_phase("l-estimation");
                let mut lengths = vec![0u64; n];
                for (from, payload) in inbox.get(self.length_instance, ROLE_MAIN) {
                    if payload.bit_len == 64 {
                        let bits = payload.to_bits();
                        let mut r = crate::bits::BitReader::new(&bits);
                        lengths[from.party as usize] = r.read_uint(64).unwrap_or(0);
                    }
                }
                lengths[self.me as usize] =
                    self.input.as_ref().map(|e| e.bit_length() as u64).unwrap_or(0);
                lengths.sort_unstable_by(|a, b| b.cmp(a));
                let l_prime = lengths[n - t - 1];
                let mut bit = Bits::new();
                bit.push(l_prime > (n as u64) * (n as u64));
                let mut ba = BaInstance::new(
                    BaConfig {
                        instance: self.ids.fresh(),
                        roster: Arc::new((0..n as u32).map(|p| vid(p, ROLE_MAIN)).collect()),
                        me: self.me as usize,
                        l_max: 1,
                        tag: "l-estimation",
                    },
                    Some(bit),
                );
                ba.on_round(ctx, inbox);
                self.stage = Stage::AcceptBa { ba, l_prime };
            }
            Stage::AcceptBa { ba, l_prime } => {
                if !ba.done() {
                    ba.on_round(ctx, inbox);
                }
                if ba.done() {
                    let long = ba
                        .output()
                        .and_then(|o| o.as_ref())
                        .map(|b| b.len() == 1 && b.get(0))
                        .unwrap_or(false);
                    let l_prime = *l_prime;
                    let n2 = (n as u64) * (n as u64);
                    if long {
                        let mut hc = HighCostCa::new(
                            n as u32,
                            self.me as usize,
                            l_prime.div_ceil(n2),
                            &mut self.ids,
                        );
                        hc.on_round(ctx, inbox);
                        self.stage = Stage::HighCost(hc);
                    } else {
                        let mut es = ExponentialSearch::new(
                            n as u32,
                            self.me as usize,
                            l_prime.clamp(1, n2),
                            &mut self.ids,
                        );
                        es.on_round(ctx, inbox);
                        self.stage = Stage::ExpSearch(es);
                    }
                }
            }
            Stage::HighCost(hc) => {
                if !hc.done() {
                    hc.on_round(ctx, inbox);
                }
                if let Some(v) = hc.output() {
                    let l_tilde = v.saturating_mul((n as u64) * (n as u64)).max(1);
                    self.enter_committees(ctx, inbox, l_tilde);
                }
            }
            Stage::ExpSearch(es) => {
                if !es.done() {
                    es.on_round(ctx, inbox);
                }
                if let Some(l_tilde) = es.output() {
                    self.enter_committees(ctx, inbox, l_tilde);
                }
            }
            Stage::Committees { l_tilde, cas, rounds, elapsed, committee_count } => {
                ctx.set_phase("committees");
                if *elapsed < *rounds {
                    *elapsed += 1;
                    for (_, ca) in cas.iter_mut() {
                        ca.on_round(ctx, inbox);
                    }
                    if *elapsed < *rounds {
                        return;
                    }
                }
                // committee members report their value to the committee's
                // target party
                let l_tilde = *l_tilde;
                let _ = committee_count;
                for (c, ca) in cas.iter() {
                    if let Some(decisions) = ca.decisions() {
                        for (slot, value) in decisions {
                            let payload = match value {
                                Some(v) => {
                                    let mut b = Bits::new();
                                    b.push(true);
                                    b.extend(v);
                                    Payload::from_bits(&b)
                                }
                                None => {
                                    let mut b = Bits::new();
                                    b.push(false);
                                    Payload::from_bits(&b)
                                }
                            };
                            ctx.send(OutMsg {
                                instance: self.deliver_instance,
                                from: ca.layout.b_roster[*slot],
                                dest: Dest::One(vid(*c as u32, ROLE_MAIN)),
                                payload,
                                tag: "committee-deliver",
                                free_targets: 0,
                                meta: None,
                            });
                        }
                    }
                }
                self.stage = Stage::Deliver { l_tilde };
            }
            Stage::Deliver { l_tilde } => {
                ctx.set_phase("committee-deliver");
                // plurality of the values my committee reported, ties by
                // canonical order
                let cap = transport_cap(&self.cfg.space, *l_tilde, 0);
                let mut counts: HashMap<Vec<u8>, (usize, Option<Bits>)> = HashMap::new();
                let mut seen: HashMap<VirtualId, ()> = HashMap::new();
                for (from, payload) in inbox.get(self.deliver_instance, ROLE_MAIN) {
                    if seen.contains_key(&from) || payload.bit_len == 0 || payload.bit_len > cap + 1
                    {
                        continue;
                    }
                    seen.insert(from, ());
                    let bits = payload.to_bits();
                    let v = if bits.get(0) {
                        let mut inner = Bits::new();
                        for i in 1..bits.len() {
                            inner.push(bits.get(i));
                        }
                        Some(inner)
                    } else {
                        None
                    };
                    counts
                        .entry(payload.data.as_ref().clone())
                        .or_insert((0, v))
                        .0 += 1;
                }
                let plurality: Option<Bits> = counts
                    .values()
                    .max_by(|(ca, va), (cb, vb)| {
                        ca.cmp(cb).then_with(|| {
                            // prefer the canonically smaller value on ties
                            match (va, vb) {
                                (Some(a), Some(b)) => b.cmp(a),
                                (Some(_), None) => std::cmp::Ordering::Greater,
                                (None, Some(_)) => std::cmp::Ordering::Less,
                                (None, None) => std::cmp::Ordering::Equal,
                            }
                        })
                    })
                    .and_then(|(_, v)| v.clone());
                let delta = self.cfg.delta() as u64;
                let sub_cfg = ProtocolConfig {
                    l: Some(l_tilde.saturating_mul(delta)),
                    ..self.cfg.clone()
                };
                let mut fixed = Box::new(FixedLParty::new(sub_cfg, self.me, plurality));
                ctx.set_phase("fixed-l");
                fixed.on_round(ctx, inbox);
                self.stage = Stage::FixedL(fixed);
            }
            Stage::FixedL(fixed) => {
                if !fixed.done() {
                    fixed.on_round(ctx, inbox);
                }
                if fixed.done() {
                    self.output = fixed.output();
                    self.stage = Stage::Done;
                }
            }
            Stage::Done => {}
        }
    }

    fn done(&self) -> bool {
        matches!(self.stage, Stage::Done)
    }

    fn output(&self) -> Option<Bits> {
        self.output.clone()
    }
}

/// Declared round bound for unknown-length runs: both estimation branches
/// plus committees, delivery, and the embedded fixed-length schedule at the
/// largest cap the mechanism can emit.
pub fn unknown_l_round_bound(cfg: &ProtocolConfig) -> u32 {
    let n = cfg.n;
    let est = 2 + ba_duration(n) + high_cost_ca_duration(n).max(exp_search_duration(n));
    let committees = supersend_duration(n) + 2;
    let fixed = fixed_l_round_bound(&ProtocolConfig { l: Some(1), ..cfg.clone() });
    est + committees + fixed + 4
}
