//! The fixed-length protocol: iterate supernode reduction while N >= sigma,
//! then run CA among the remaining supernodes.
//!
//! Each iteration assigns the current supernodes to committees, runs CA
//! inside every committee in parallel, regroups the parties into floor(N /
//! sigma) new supernodes, and supersends each committee's value to its new
//! supernode. All assignments are deterministic, so every party derives the
//! same layout and the same round offsets without coordination.

use crate::bits::Bits;
use crate::convexity::ConvexSpace;
use crate::extractor::{
    assign_parties_to_supernodes, assign_supernodes_to_committees, Assignment,
};
use crate::simnet::{vid, Ctx, IdGen, Inbox, IterationSnapshot, PartyMachine, VirtualId};
use crate::supersend::{
    supersend_duration, GroupChannel, SupersendIds, SupersendReceiver, SupersendSender,
};
use std::collections::BTreeMap;
use std::sync::Arc;

use super::supernodes_ca::{DecisionRule, SupernodesCa, SupernodesCaLayout};
use super::{role, transport_cap, ProtocolConfig, FLAVOR_DELIVER_B};

const FINAL_STAGE: u32 = 900;

/// Committee layouts plus delivery rosters for one reduction iteration;
/// a pure function of (config, current supernode members, iteration).
struct IterationLayout {
    committees: Vec<Arc<SupernodesCaLayout>>,
    /// committee ordinal -> member supernode ordinals
    committee_supernodes: Vec<Vec<u32>>,
    new_members: Vec<Vec<u32>>,
    deliver_ids: Vec<SupersendIds>,
    deliver_rosters: Vec<Arc<Vec<VirtualId>>>,
    ca_rounds: u32,
    deliver_rounds: u32,
}

fn distinct_groups(assignment: &Assignment) -> Vec<Vec<u32>> {
    (0..assignment.group_count)
        .map(|g| assignment.distinct_members(g).iter().map(|&u| u).collect())
        .collect()
}

fn build_iteration(
    cfg: &ProtocolConfig,
    stage: u32,
    members: &[Vec<u32>],
    l_cap: u64,
    ids: &mut IdGen,
) -> IterationLayout {
    let n_super = members.len();
    let sigma = cfg.sigma();
    let committees_assignment =
        assign_supernodes_to_committees(n_super, sigma, cfg.omega(), cfg.epsilon, cfg.lean_assignments)
            .expect("committee assignment");
    let committee_supernodes = distinct_groups(&committees_assignment);
    let mut committees = Vec::with_capacity(committee_supernodes.len());
    for (c, supernode_ids) in committee_supernodes.iter().enumerate() {
        let committee_members: Vec<Vec<u32>> = supernode_ids
            .iter()
            .map(|&j| members[j as usize].clone())
            .collect();
        committees.push(Arc::new(SupernodesCaLayout::build(
            stage,
            c as u32,
            committee_members,
            cfg.space.clone(),
            l_cap,
            DecisionRule::Supernode { omega: cfg.omega() },
            "supernodes-ca",
            ids,
        )));
    }
    let new_assignment = assign_parties_to_supernodes(
        cfg.n,
        committee_supernodes.len(),
        cfg.omega(),
        cfg.epsilon,
        cfg.lean_assignments,
    )
    .expect("supernode assignment");
    let new_members = distinct_groups(&new_assignment);
    let deliver_ids: Vec<SupersendIds> = (0..new_members.len())
        .map(|_| SupersendIds::fresh(ids))
        .collect();
    let deliver_rosters: Vec<Arc<Vec<VirtualId>>> = new_members
        .iter()
        .enumerate()
        .map(|(c, ms)| {
            Arc::new(
                ms.iter()
                    .map(|&p| vid(p, role(stage, c as u32, 0, FLAVOR_DELIVER_B)))
                    .collect(),
            )
        })
        .collect();
    let ca_rounds = committees.iter().map(|l| l.duration()).max().unwrap_or(0);
    let deliver_rounds = deliver_rosters
        .iter()
        .map(|r| supersend_duration(r.len()))
        .max()
        .unwrap_or(0);
    IterationLayout {
        committees,
        committee_supernodes,
        new_members,
        deliver_ids,
        deliver_rosters,
        ca_rounds,
        deliver_rounds,
    }
}

struct ReduceState {
    layout: IterationLayout,
    cas: Vec<(usize, SupernodesCa)>,
    deliver_senders: Vec<SupersendSender>,
    deliver_receivers: Vec<(usize, SupersendReceiver)>,
    local: u32,
}

enum Stage {
    Reduce(ReduceState),
    Final(SupernodesCa),
    Done,
}

/// One party's fixed-length protocol machine.
pub struct FixedLParty {
    cfg: ProtocolConfig,
    me: u32,
    iter: u32,
    members: Vec<Vec<u32>>,
    /// supernode ordinal -> my held transport value (ordinals I belong to)
    my_values: BTreeMap<u32, Option<Bits>>,
    ids: IdGen,
    stage: Stage,
    output: Option<Bits>,
    started: bool,
}

impl FixedLParty {
    pub fn new(cfg: ProtocolConfig, me: u32, input: Option<Bits>) -> FixedLParty {
        let members: Vec<Vec<u32>> = (0..cfg.n as u32).map(|p| vec![p]).collect();
        let mut my_values = BTreeMap::new();
        my_values.insert(me, input);
        FixedLParty {
            cfg,
            me,
            iter: 0,
            members,
            my_values,
            ids: IdGen::new(),
            stage: Stage::Done, // replaced on first round
            output: None,
            started: false,
        }
    }

    fn l_cap_now(&self) -> u64 {
        transport_cap(&self.cfg.space, self.cfg.l.unwrap_or(0), self.iter)
    }

    fn enter_next_stage(&mut self) {
        let n_super = self.members.len();
        if n_super >= self.cfg.sigma() {
            let layout = build_iteration(
                &self.cfg,
                1 + self.iter,
                &self.members,
                self.l_cap_now(),
                &mut self.ids,
            );
            let mut cas = Vec::new();
            for (c, committee) in layout.committees.iter().enumerate() {
                let involved = committee
                    .supernodes
                    .iter()
                    .any(|ms| ms.contains(&self.me));
                if involved {
                    let supernode_ids = layout.committee_supernodes[c].clone();
                    let values = &self.my_values;
                    let ca = SupernodesCa::new(committee.clone(), self.me, &|ordinal| {
                        let global = supernode_ids[ordinal];
                        values.get(&global).cloned().flatten()
                    });
                    cas.push((c, ca));
                }
            }
            self.stage = Stage::Reduce(ReduceState {
                layout,
                cas,
                deliver_senders: Vec::new(),
                deliver_receivers: Vec::new(),
                local: 0,
            });
        } else {
            // final CA over the remaining supernodes
            let layout = Arc::new(SupernodesCaLayout::build(
                FINAL_STAGE,
                0,
                self.members.clone(),
                self.cfg.space.clone(),
                self.l_cap_now(),
                DecisionRule::Supernode { omega: self.cfg.omega() },
                "supernodes-ca",
                &mut self.ids,
            ));
            let values = &self.my_values;
            let ca = SupernodesCa::new(layout, self.me, &|ordinal| {
                values.get(&(ordinal as u32)).cloned().flatten()
            });
            self.stage = Stage::Final(ca);
        }
    }

    fn publish_snapshot(&self, ctx: &mut Ctx<'_>) {
        let label = format!("iter-{}", self.iter);
        let info = &mut *ctx.info;
        let snap = match info.iterations.iter_mut().find(|s| s.label == label) {
            Some(s) => s,
            None => {
                info.iterations.push(IterationSnapshot {
                    label: label.clone(),
                    round: ctx.round,
                    supernode_members: self.members.clone(),
                    held_values: BTreeMap::new(),
                    value_bit_len: BTreeMap::new(),
                });
                info.iterations.last_mut().unwrap()
            }
        };
        for (&g, v) in &self.my_values {
            let key = (g, self.me);
            snap.held_values
                .insert(key, v.as_ref().map(|b| b.as_bytes().to_vec()));
            snap.value_bit_len
                .insert(key, v.as_ref().map(|b| b.len() as u64).unwrap_or(0));
        }
    }
}

impl PartyMachine for FixedLParty {
    fn on_round(&mut self, ctx: &mut Ctx<'_>, inbox: &Inbox) {
        if !self.started {
            self.started = true;
            self.publish_snapshot(ctx);
            self.enter_next_stage();
        }
        ctx.set_phase(&match &self.stage {
            Stage::Reduce(_) => format!("iter-{}", self.iter + 1),
            Stage::Final(_) => "final-ca".to_string(),
            Stage::Done => "done".to_string(),
        });
        match &mut self.stage {
            Stage::Reduce(rs) => {
                let r = rs.local;
                rs.local += 1;
                if r < rs.layout.ca_rounds {
                    for (_, ca) in rs.cas.iter_mut() {
                        ca.on_round(ctx, inbox);
                    }
                    if r + 1 == rs.layout.ca_rounds {
                        // committee values computed; committee members
                        // supersend them to the new supernodes next round
                        let mut senders = Vec::new();
                        for (c, ca) in rs.cas.iter() {
                            let committee = &rs.layout.committees[*c];
                            let channel = GroupChannel::new(
                                committee.b_roster.clone(),
                                rs.layout.deliver_rosters[*c].clone(),
                                committee.l_cap,
                            );
                            if let Some(decisions) = ca.decisions() {
                                for (slot, value) in decisions {
                                    senders.push(SupersendSender::new(
                                        rs.layout.deliver_ids[*c].clone(),
                                        committee.b_roster[*slot],
                                        channel.clone(),
                                        value.clone(),
                                        "reduce-deliver",
                                    ));
                                }
                            }
                        }
                        rs.deliver_senders = senders;
                        let mut receivers = Vec::new();
                        for (g, roster) in rs.layout.deliver_rosters.iter().enumerate() {
                            if let Some(pos) =
                                roster.iter().position(|v| v.party == self.me)
                            {
                                let committee = &rs.layout.committees[g];
                                let channel = GroupChannel::new(
                                    committee.b_roster.clone(),
                                    roster.clone(),
                                    committee.l_cap,
                                );
                                receivers.push((
                                    g,
                                    SupersendReceiver::new(
                                        rs.layout.deliver_ids[g].clone(),
                                        pos,
                                        channel,
                                        "reduce-deliver",
                                    ),
                                ));
                            }
                        }
                        rs.deliver_receivers = receivers;
                    }
                } else {
                    for s in rs.deliver_senders.iter_mut() {
                        s.on_round(ctx);
                    }
                    for (_, r) in rs.deliver_receivers.iter_mut() {
                        if !r.done() {
                            r.on_round(ctx, inbox);
                        }
                    }
                    if r + 1 >= rs.layout.ca_rounds + rs.layout.deliver_rounds {
                        // iteration complete: regroup
                        let mut my_values = BTreeMap::new();
                        for (g, recv) in rs.deliver_receivers.iter() {
                            let v = recv.output().cloned().flatten();
                            my_values.insert(*g as u32, v);
                        }
                        self.members = rs.layout.new_members.clone();
                        self.my_values = my_values;
                        self.iter += 1;
                        self.publish_snapshot(ctx);
                        self.enter_next_stage();
                    }
                }
            }
            Stage::Final(ca) => {
                ca.on_round(ctx, inbox);
                if ca.done() {
                    let decision = ca
                        .decisions()
                        .and_then(|d| d.first())
                        .and_then(|(_, v)| v.clone());
                    self.output = Some(match decision {
                        Some(v) => v,
                        None => {
                            // total-function default: the space's minimum
                            // element, flagged in the transcript
                            ctx.info.default_path.push(self.me);
                            let min = self.cfg.space.min_element();
                            super::transport_encode(
                                &self.cfg.space,
                                super::TransportValue::Element(&min),
                            )
                            .expect("minimum element encodes")
                        }
                    });
                    self.stage = Stage::Done;
                }
            }
            Stage::Done => {}
        }
    }

    fn done(&self) -> bool {
        matches!(self.stage, Stage::Done) && self.output.is_some()
    }

    fn output(&self) -> Option<Bits> {
        self.output.clone()
    }
}

/// Declared round bound for a fixed-length run: replays the structural
/// schedule (assignments and group sizes evolve independently of values).
pub fn fixed_l_round_bound(cfg: &ProtocolConfig) -> u32 {
    let sigma = cfg.sigma();
    let mut sizes: Vec<usize> = vec![1; cfg.n];
    let mut rounds = 2u32;
    while sizes.len() >= sigma {
        let committees = assign_supernodes_to_committees(
            sizes.len(),
            sigma,
            cfg.omega(),
            cfg.epsilon,
            cfg.lean_assignments,
        )
        .expect("committee assignment");
        let max_b = (0..committees.group_count)
            .map(|c| {
                committees
                    .distinct_members(c)
                    .iter()
                    .map(|&j| sizes[j as usize])
                    .sum::<usize>()
            })
            .max()
            .unwrap_or(1);
        let new_assignment = assign_parties_to_supernodes(
            cfg.n,
            committees.group_count,
            cfg.omega(),
            cfg.epsilon,
            cfg.lean_assignments,
        )
        .expect("supernode assignment");
        let new_sizes: Vec<usize> = (0..new_assignment.group_count)
            .map(|g| new_assignment.distinct_members(g).len())
            .collect();
        rounds += supersend_duration(max_b)
            + new_sizes
                .iter()
                .map(|&s| supersend_duration(s))
                .max()
                .unwrap_or(0)
            + 2;
        sizes = new_sizes;
    }
    rounds += supersend_duration(sizes.iter().sum::<usize>().max(1)) + 2;
    rounds
}

/// Convexity-space element inputs, transport-encoded for the protocol.
pub fn encode_input(space: &ConvexSpace, e: &crate::convexity::Element) -> Bits {
    super::transport_encode(space, super::TransportValue::Element(e)).expect("element encodes")
}
