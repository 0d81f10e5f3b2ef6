//! Oracle-backed verification suites, shared by the CLI `verify` subcommand
//! and the acceptance tests.
//!
//! Every suite checks the implementation against an independent route:
//! safe areas against brute-force subset intersection, extractor graphs
//! against the raw definition inequality, erasure coding against exhaustive
//! subset reconstruction and bit-tamper trials, agreement and supersend
//! against the full adversary library.

use crate::ba::{ba_declared_bit_cap, ba_duration, BaConfig, BaInstance, BaTestParty};
use crate::bits::Bits;
use crate::convexity::{
    hull_contains, pick_canonical, safe_area, ConvexSpace, Element, Value, ValueMultiset,
};
use crate::erasure::{make_bundles, mt_build, mt_verify, rs_decode, RsConfig};
use crate::extractor::{build_extractor, rat, Rat};
use crate::simnet::{
    run, vid, AdversaryKind, Ctx, Inbox, NullAdversary, PartyMachine, RunConfig,
    StandardAdversary, VirtualId,
};
use crate::supersend::{
    supersend_declared_cap, supersend_duration, GroupChannel, SupersendIds, SupersendReceiver,
    SupersendSender,
};
use crate::util::for_each_combination;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

type VerifyResult = Result<String, String>;

/// Enumerates all multisets of size m over 0..size.
fn for_each_multiset(size: u64, m: usize, mut f: impl FnMut(&[u64]) -> Result<(), String>) -> Result<(), String> {
    let mut cur = vec![0u64; m];
    loop {
        f(&cur)?;
        // next non-decreasing tuple
        let mut i = m;
        loop {
            if i == 0 {
                return Ok(());
            }
            i -= 1;
            if cur[i] + 1 < size {
                let v = cur[i] + 1;
                for c in cur.iter_mut().skip(i) {
                    *c = v;
                }
                break;
            }
            if i == 0 {
                return Ok(());
            }
        }
    }
}

fn oracle_members(sp: &ConvexSpace, items: &[Element], k: usize) -> Vec<Element> {
    let all = sp.enumerate().expect("finite space");
    if k >= items.len() {
        return Vec::new();
    }
    all.into_iter()
        .filter(|cand| {
            let mut inside = true;
            for_each_combination(items.len(), items.len() - k, |idx| {
                let sub: ValueMultiset = idx.iter().map(|&i| items[i].clone()).collect();
                if !hull_contains(sp, &sub, cand).unwrap() {
                    inside = false;
                }
                inside
            });
            inside
        })
        .collect()
}

/// Safe-area oracle equivalence on 1D grids (sizes <= grid_max) and the 4x4
/// box, all multisets |M| <= m_max with every valid k, plus the two
/// nonemptiness lemmas at the stated thresholds.
pub fn verify_safe_area(grid_max: u64, m_max: usize) -> VerifyResult {
    let mut checked = 0u64;
    for size in 2..=grid_max {
        let sp = ConvexSpace::grid_1d(size);
        for m in 1..=m_max {
            for_each_multiset(size, m, |vals| {
                let items: Vec<Element> = vals
                    .iter()
                    .map(|&v| sp.element(Value::Grid(v)).unwrap())
                    .collect();
                for k in 0..=m {
                    let area = safe_area(&sp, &ValueMultiset::new(items.clone()), k)
                        .map_err(|e| format!("safe_area failed: {e}"))?;
                    let expect = oracle_members(&sp, &items, k);
                    for e in sp.enumerate().unwrap() {
                        if area.contains(&e) != expect.contains(&e) {
                            return Err(format!(
                                "grid{size} M={vals:?} k={k}: membership mismatch at {:?}",
                                e.value()
                            ));
                        }
                    }
                    if pick_canonical(&area) != expect.iter().min().cloned() {
                        return Err(format!("grid{size} M={vals:?} k={k}: witness mismatch"));
                    }
                    checked += 1;
                }
                Ok(())
            })?;
        }
    }
    // 4x4 box: sample the multiset space exhaustively in flattened form
    let sp = ConvexSpace::grid_box(vec![4, 4]);
    for m in 1..=m_max.min(5) {
        for_each_multiset(16, m, |flat| {
            let items: Vec<Element> = flat
                .iter()
                .map(|&v| sp.element(Value::Box(vec![v / 4, v % 4])).unwrap())
                .collect();
            for k in [0, 1, m.saturating_sub(1)] {
                if k > m {
                    continue;
                }
                let area = safe_area(&sp, &ValueMultiset::new(items.clone()), k)
                    .map_err(|e| format!("safe_area failed: {e}"))?;
                let expect = oracle_members(&sp, &items, k);
                for e in sp.enumerate().unwrap() {
                    if area.contains(&e) != expect.contains(&e) {
                        return Err(format!("box M={flat:?} k={k}: membership mismatch"));
                    }
                }
                if pick_canonical(&area) != expect.iter().min().cloned() {
                    return Err(format!("box M={flat:?} k={k}: witness mismatch"));
                }
                checked += 1;
            }
            Ok(())
        })?;
    }
    // nonemptiness whenever t < n / omega (omega = 2 on grids)
    for n in 2..=7usize {
        let sp = ConvexSpace::grid_1d(grid_max.min(8));
        for t in 0..(n as u64).div_ceil(2) as usize {
            if 2 * t >= n {
                continue;
            }
            for k in 0..=t {
                let m = n - t + k;
                for_each_multiset(grid_max.min(8), m, |vals| {
                    let items: Vec<Element> = vals
                        .iter()
                        .map(|&v| sp.element(Value::Grid(v)).unwrap())
                        .collect();
                    let area = safe_area(&sp, &ValueMultiset::new(items), k).unwrap();
                    if area.is_empty() {
                        return Err(format!(
                            "safe_{k} empty for |M|={m}, n={n}, t={t}: {vals:?}"
                        ));
                    }
                    // min(k, t) variant at t < n / (omega + 1)
                    Ok(())
                })?;
            }
        }
        for t in 0..n.div_ceil(3) {
            if 3 * t >= n {
                continue;
            }
            for k in 0..=2 * t {
                let m = n - 2 * t + k;
                if m == 0 || m > n {
                    continue;
                }
                for_each_multiset(grid_max.min(8), m, |vals| {
                    let items: Vec<Element> = vals
                        .iter()
                        .map(|&v| sp.element(Value::Grid(v)).unwrap())
                        .collect();
                    let area = safe_area(&sp, &ValueMultiset::new(items), k.min(t)).unwrap();
                    if area.is_empty() {
                        return Err(format!(
                            "safe_min(k,t) empty for |M|={m}, n={n}, t={t}, k={k}"
                        ));
                    }
                    Ok(())
                })?;
            }
        }
    }
    Ok(format!("safe-area: {checked} multiset/k cases match the brute-force oracle"))
}

/// Spectral certificates plus the raw definition inequality on small graphs.
pub fn verify_extractor(max_n: usize) -> VerifyResult {
    let cases: Vec<(usize, usize, Rat)> = vec![
        (8, 2, rat(1, 3)),
        (12, 3, rat(1, 4)),
        (14, 4, rat(1, 3)),
        (32, 8, rat(1, 4)),
        (64, 16, rat(1, 8)),
    ];
    let mut lines = Vec::new();
    for (n, k, eps) in cases.into_iter().filter(|(n, _, _)| *n <= max_n.max(14)) {
        let g = build_extractor(n, k, eps).map_err(|e| e.to_string())?;
        let alpha = k as f64 / n as f64;
        let bound = (*eps.numer() as f64 / *eps.denom() as f64) * (2.0 * alpha).sqrt();
        if g.lambda > bound {
            return Err(format!(
                "n={n}: lambda {} exceeds bound {bound}",
                g.lambda
            ));
        }
        // degree accounting
        let left: usize = g.adjacency.iter().map(|a| a.len()).sum();
        if left != g.left_degree * n || g.right_degrees().iter().sum::<usize>() != left {
            return Err(format!("n={n}: degree accounting broken"));
        }
        if n <= 14 {
            // raw definition over all S of size exactly k and sampled T
            let mut rng = ChaCha8Rng::seed_from_u64(0xDEF);
            let mut violations = 0usize;
            for_each_combination(n, k, |s| {
                for _ in 0..100 {
                    let t_mask: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.5)).collect();
                    if !g.definition_holds(s, &t_mask) {
                        violations += 1;
                    }
                }
                true
            });
            if violations > 0 {
                return Err(format!("n={n}: {violations} definition violations"));
            }
        }
        lines.push(format!("n={n} D={} lambda={:.3e}", g.left_degree, g.lambda));
    }
    Ok(format!("extractor: certified {{{}}}", lines.join("; ")))
}

/// RS round-trips (exhaustive threshold subsets at n_B <= 9), Merkle tamper
/// rejection, and the share-size cap.
pub fn verify_erasure(trials: usize) -> VerifyResult {
    let mut rng = ChaCha8Rng::seed_from_u64(0xE4A);
    for trial in 0..trials {
        let n_b = rng.gen_range(1..=9u16);
        let cfg = RsConfig::new(n_b);
        let len = rng.gen_range(1..600usize);
        let mut m = Bits::with_capacity(len);
        for _ in 0..len {
            m.push(rng.gen_bool(0.5));
        }
        let shares = crate::erasure::rs_encode(&m, cfg);
        let t = cfg.threshold() as usize;
        let mut fail: Option<String> = None;
        for_each_combination(n_b as usize, t, |idx| {
            let subset: Vec<(u16, Vec<u16>)> = idx
                .iter()
                .map(|&i| ((i + 1) as u16, shares[i].clone()))
                .collect();
            match rs_decode(&subset, cfg, len as u64) {
                Ok(out) if out == m => true,
                other => {
                    fail = Some(format!("trial {trial}: subset {idx:?} gave {other:?}"));
                    false
                }
            }
        });
        if let Some(f) = fail {
            return Err(f);
        }
    }
    // Merkle tamper suite
    let mut rejected = 0usize;
    for trial in 0..1000 {
        let n = rng.gen_range(1..=32usize);
        let leaves: Vec<Vec<u8>> = (0..n)
            .map(|_| (0..rng.gen_range(1..32)).map(|_| rng.gen()).collect())
            .collect();
        let (root, wits) = mt_build(&leaves);
        let i = rng.gen_range(0..n);
        if !mt_verify(&root, n, i + 1, &leaves[i], &wits[i]) {
            return Err(format!("trial {trial}: honest witness rejected"));
        }
        let mut bad_leaf = leaves[i].clone();
        let pos = rng.gen_range(0..bad_leaf.len() * 8);
        bad_leaf[pos / 8] ^= 1 << (pos % 8);
        if mt_verify(&root, n, i + 1, &bad_leaf, &wits[i]) {
            return Err(format!("trial {trial}: tampered leaf accepted"));
        }
        rejected += 1;
    }
    // share size cap for L in {2^10, 2^16}
    for l in [1u64 << 10, 1 << 16] {
        for n_b in [4u16, 16, 64] {
            let cfg = RsConfig::new(n_b);
            let share_bits = cfg.share_symbols(l) as u64 * 16;
            let cap = 2 * l / n_b as u64 + 160 + 2 * 16;
            if share_bits > cap {
                return Err(format!("share size {share_bits} over cap {cap} at L={l} n_B={n_b}"));
            }
        }
    }
    Ok(format!(
        "erasure: {trials} RS round-trip trials, {rejected} tamper rejections, size caps hold"
    ))
}

fn decode_ba_output(bytes: &[u8], bit_len: u64) -> Option<Vec<u8>> {
    let b = Bits::from_bytes_len(bytes.to_vec(), bit_len as usize);
    if b.len() >= 1 && b.get(0) {
        let mut v = Bits::new();
        for i in 1..b.len() {
            v.push(b.get(i));
        }
        Some(v.into_bytes())
    } else {
        None
    }
}

/// Agreement + Validity under the threshold, termination + bit caps beyond
/// it, across the full adversary library.
pub fn verify_ba(groups: &[u32], seeds_per_case: u64) -> VerifyResult {
    let l_max = 64;
    let mut cases = 0u64;
    for &g in groups {
        for kind in AdversaryKind::all() {
            for seed in 0..seeds_per_case {
                let t_byz = (g - 1) / 3; // within threshold
                let roster: Arc<Vec<VirtualId>> =
                    Arc::new((0..g).map(|p| vid(p, 0)).collect());
                let machines: Vec<BaTestParty> = (0..g as usize)
                    .map(|i| {
                        let mut input = Bits::new();
                        input.push_uint((i as u64) % 3, 8);
                        BaTestParty::new(vec![BaInstance::new(
                            BaConfig {
                                instance: 9,
                                roster: roster.clone(),
                                me: i,
                                l_max,
                                tag: "ba",
                            },
                            Some(input),
                        )])
                    })
                    .collect();
                let rc = RunConfig {
                    n_parties: g,
                    seed,
                    round_bound: ba_duration(g as usize) + 2,
                    log_envelopes: false,
                };
                let mut adv = StandardAdversary::new(kind, t_byz, seed);
                let t = run(&rc, machines, &mut adv);
                if t.failed {
                    return Err(format!("g={g} {kind:?} seed={seed}: guard fired"));
                }
                if t.rounds > ba_duration(g as usize) {
                    return Err(format!("g={g} {kind:?} seed={seed}: over round cap"));
                }
                if t.honest_bits_total > ba_declared_bit_cap(g as usize, l_max) {
                    return Err(format!("g={g} {kind:?} seed={seed}: over bit cap"));
                }
                let corrupt: Vec<u32> = t.corruption_events.iter().map(|(_, p)| *p).collect();
                let honest_outs: Vec<_> = (0..g as usize)
                    .filter(|i| !corrupt.contains(&(*i as u32)))
                    .map(|i| {
                        decode_ba_output(
                            t.outputs[i].as_ref().expect("honest output"),
                            t.output_bit_lens[i].unwrap(),
                        )
                    })
                    .collect();
                if honest_outs.windows(2).any(|w| w[0] != w[1]) {
                    return Err(format!("g={g} {kind:?} seed={seed}: agreement broken"));
                }
                cases += 1;
            }
        }
        // extra corruptions: byzantine count at or beyond g/3
        for seed in 0..seeds_per_case.min(50) {
            let t_byz = g / 2;
            let roster: Arc<Vec<VirtualId>> = Arc::new((0..g).map(|p| vid(p, 0)).collect());
            let machines: Vec<BaTestParty> = (0..g as usize)
                .map(|i| {
                    let mut input = Bits::new();
                    input.push_uint(i as u64, 8);
                    BaTestParty::new(vec![BaInstance::new(
                        BaConfig {
                            instance: 9,
                            roster: roster.clone(),
                            me: i,
                            l_max,
                            tag: "ba",
                        },
                        Some(input),
                    )])
                })
                .collect();
            let rc = RunConfig {
                n_parties: g,
                seed,
                round_bound: ba_duration(g as usize) + 2,
                log_envelopes: false,
            };
            let mut adv = StandardAdversary::new(AdversaryKind::RandomBits, t_byz, seed);
            let t = run(&rc, machines, &mut adv);
            if t.failed || t.rounds > ba_duration(g as usize) {
                return Err(format!("extra-corruption g={g} seed={seed}: over schedule"));
            }
            if t.honest_bits_total > ba_declared_bit_cap(g as usize, l_max) {
                return Err(format!("extra-corruption g={g} seed={seed}: over bit cap"));
            }
            cases += 1;
        }
    }
    // validity: unanimous inputs decide that value
    for &g in groups {
        let roster: Arc<Vec<VirtualId>> = Arc::new((0..g).map(|p| vid(p, 0)).collect());
        let v = Bits::from_bytes(vec![0x5a; 4]);
        let machines: Vec<BaTestParty> = (0..g as usize)
            .map(|i| {
                BaTestParty::new(vec![BaInstance::new(
                    BaConfig {
                        instance: 3,
                        roster: roster.clone(),
                        me: i,
                        l_max,
                        tag: "ba",
                    },
                    Some(v.clone()),
                )])
            })
            .collect();
        let rc = RunConfig {
            n_parties: g,
            seed: 0,
            round_bound: ba_duration(g as usize) + 2,
            log_envelopes: false,
        };
        let t = run(&rc, machines, &mut NullAdversary);
        for i in 0..g as usize {
            let out = decode_ba_output(
                t.outputs[i].as_ref().unwrap(),
                t.output_bit_lens[i].unwrap(),
            );
            if out.as_deref() != Some(&[0x5a; 4][..]) {
                return Err(format!("validity broken at g={g} party={i}"));
            }
        }
    }
    Ok(format!("ba: {cases} adversarial cases hold agreement, caps, and schedules"))
}

/// Supersend harness party: hosts one A virtual (first n_a parties) and one
/// B virtual.
pub struct SupersendParty {
    pub sender: Option<SupersendSender>,
    pub receiver: SupersendReceiver,
}

impl PartyMachine for SupersendParty {
    fn on_round(&mut self, ctx: &mut Ctx<'_>, inbox: &Inbox) {
        ctx.set_phase("supersend");
        if let Some(s) = &mut self.sender {
            s.on_round(ctx);
        }
        if !self.receiver.done() {
            self.receiver.on_round(ctx, inbox);
        }
    }

    fn done(&self) -> bool {
        self.receiver.done()
    }

    fn output(&self) -> Option<Bits> {
        self.receiver.output().map(|o| match o {
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

pub fn build_supersend_party(
    n: u32,
    n_a: u32,
    p: u32,
    ids: &SupersendIds,
    input: Option<Bits>,
    l: u64,
) -> SupersendParty {
    let group_a: Arc<Vec<VirtualId>> = Arc::new((0..n_a).map(|q| vid(q, 100)).collect());
    let group_b: Arc<Vec<VirtualId>> = Arc::new((0..n).map(|q| vid(q, 200)).collect());
    let channel = GroupChannel::new(group_a, group_b, l);
    SupersendParty {
        sender: (p < n_a).then(|| {
            SupersendSender::new(ids.clone(), vid(p, 100), channel.clone(), input, "supersend")
        }),
        receiver: SupersendReceiver::new(ids.clone(), p as usize, channel, "supersend"),
    }
}

/// Delivery under honest-majority senders, agreement in {m', bot} under
/// byzantine majorities, and bit caps in every run.
pub fn verify_supersend(seeds: u64) -> VerifyResult {
    let mut cases = 0u64;
    let mut rng = ChaCha8Rng::seed_from_u64(0x55E);
    for seed in 0..seeds {
        let n = rng.gen_range(4..=9u32);
        let n_a = rng.gen_range(1..=n);
        let l = 256u64;
        let mlen = rng.gen_range(1..=l as usize);
        let mut m = Bits::with_capacity(mlen);
        for _ in 0..mlen {
            m.push(rng.gen_bool(0.5));
        }
        let kind = AdversaryKind::all()[(seed % 6) as usize];
        // corrupt strictly less than half of A and a third of B
        let budget = ((n_a.saturating_sub(1)) / 2).min((n - 1) / 3);
        let mut ids = crate::simnet::IdGen::new();
        let ss_ids = SupersendIds::fresh(&mut ids);
        let machines: Vec<SupersendParty> = (0..n)
            .map(|p| build_supersend_party(n, n_a, p, &ss_ids, Some(m.clone()), l))
            .collect();
        let rc = RunConfig {
            n_parties: n,
            seed,
            round_bound: supersend_duration(n as usize) + 2,
            log_envelopes: false,
        };
        let mut adv = StandardAdversary::new(kind, budget, seed);
        let t = run(&rc, machines, &mut adv);
        if t.failed {
            return Err(format!("seed={seed}: guard fired"));
        }
        if t.honest_bits_total > supersend_declared_cap(n_a as usize, n as usize, l) {
            return Err(format!("seed={seed}: over supersend bit cap"));
        }
        let corrupt: Vec<u32> = t.corruption_events.iter().map(|(_, p)| *p).collect();
        let outs: Vec<Option<Vec<u8>>> = (0..n as usize)
            .filter(|i| !corrupt.contains(&(*i as u32)))
            .map(|i| {
                decode_ba_output(t.outputs[i].as_ref().unwrap(), t.output_bit_lens[i].unwrap())
            })
            .collect();
        if outs.windows(2).any(|w| w[0] != w[1]) {
            return Err(format!("seed={seed} kind={kind:?}: honest outputs disagree"));
        }
        // honest-majority senders must deliver m itself
        let corrupt_in_a = corrupt.iter().filter(|p| **p < n_a).count();
        if 2 * (n_a as usize - corrupt_in_a) > n_a as usize
            && 3 * corrupt.len() < n as usize
        {
            let want = m.as_bytes().to_vec();
            if outs[0].as_ref() != Some(&want) {
                return Err(format!(
                    "seed={seed} kind={kind:?}: honest-majority delivery failed"
                ));
            }
        }
        cases += 1;
    }
    // corrupted-witness filter: verify a bundle with a flipped digest fails
    let m = Bits::from_bytes(vec![0x77; 32]);
    let (_, bundles) = make_bundles(&m, RsConfig::new(5));
    let mut bad = bundles[2].clone();
    if !bad.witness.digests.is_empty() {
        bad.witness.digests[0][0] ^= 1;
        if bad.verify(RsConfig::new(5)) {
            return Err("tampered witness accepted".into());
        }
    }
    Ok(format!("supersend: {cases} adversarial runs hold delivery, agreement, caps"))
}
