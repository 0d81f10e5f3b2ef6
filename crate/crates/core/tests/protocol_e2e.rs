//! End-to-end protocol runs at small scale: termination, agreement, convex
//! validity, iteration audits, and the unknown-length mechanism.

use convex_agreement::convexity::{ConvexSpace, Value};
use convex_agreement::extractor::rat;
use convex_agreement::harness::{
    check_outcome, generate_inputs, honest_inputs, run_fixed_l, run_unknown_l, InputSpec,
};
use convex_agreement::protocol::ProtocolConfig;
use convex_agreement::simnet::{AdversaryKind, StandardAdversary};

fn grid_cfg(n: usize, t: usize, size: u64, l: u64) -> ProtocolConfig {
    ProtocolConfig {
        n,
        t,
        space: ConvexSpace::grid_1d(size),
        epsilon: rat(1, 1),
        l: Some(l),
        kappa: 256,
        lean_assignments: false,
    }
}

#[test]
fn unanimous_no_adversary_outputs_that_value() {
    let cfg = grid_cfg(4, 0, 256, 8);
    let space = cfg.space.clone();
    let v = space.element(Value::Grid(97)).unwrap();
    let inputs: Vec<_> = (0..4).map(|_| Some(v.clone())).collect();
    let t = run_fixed_l(&cfg, &inputs, None, 7, false);
    assert!(!t.failed, "round guard fired");
    let honest = honest_inputs(&t, &vec![v.clone(); 4]);
    let outcome = check_outcome(&cfg, &t, &honest);
    assert!(outcome.terminated, "not terminated");
    assert!(outcome.agreement, "no agreement");
    assert!(outcome.convex_validity, "validity broken");
    // unanimous input must come back exactly
    let out = outcome.output.expect("output");
    assert_eq!(out, v.encoding().as_bytes().to_vec(), "wrong output value");
}

#[test]
fn spread_inputs_with_crash_adversary_agree_and_stay_valid() {
    let cfg = grid_cfg(9, 2, 64, 6);
    for seed in 0..5 {
        let elems = generate_inputs(&cfg.space, &InputSpec::Spread, cfg.n, seed).unwrap();
        let inputs: Vec<_> = elems.iter().cloned().map(Some).collect();
        let mut adv = StandardAdversary::new(AdversaryKind::Crash, 2, seed);
        let t = run_fixed_l(&cfg, &inputs, Some(&mut adv), seed, false);
        assert!(!t.failed, "seed {seed}: guard fired");
        let honest = honest_inputs(&t, &elems);
        let outcome = check_outcome(&cfg, &t, &honest);
        assert!(outcome.terminated, "seed {seed}: not terminated");
        assert!(outcome.agreement, "seed {seed}: no agreement");
        assert!(outcome.convex_validity, "seed {seed}: validity broken");
        assert!(outcome.audits_ok, "seed {seed}: audits failed: {:?}", outcome.audits);
    }
}

#[test]
fn unknown_l_short_inputs_round_trip() {
    let cfg = ProtocolConfig {
        n: 10,
        t: 2,
        space: ConvexSpace::grid_1d(4096),
        epsilon: rat(1, 1),
        l: None,
        kappa: 256,
        lean_assignments: false,
    };
    let elems = generate_inputs(&cfg.space, &InputSpec::Spread, cfg.n, 3).unwrap();
    let inputs: Vec<_> = elems.iter().cloned().map(Some).collect();
    let mut adv = StandardAdversary::new(AdversaryKind::Follower, 2, 3);
    let t = run_unknown_l(&cfg, &inputs, Some(&mut adv), 3, false);
    assert!(!t.failed, "guard fired");
    let honest = honest_inputs(&t, &elems);
    let outcome = check_outcome(&cfg, &t, &honest);
    assert!(outcome.terminated, "not terminated");
    assert!(outcome.agreement, "no agreement");
    assert!(outcome.convex_validity, "validity broken");
}
