//! Manual scale probe (ignored by default): timings, rounds, and bits at the
//! acceptance-suite scales.

use convex_agreement::convexity::ConvexSpace;
use convex_agreement::extractor::rat;
use convex_agreement::harness::measure_fixed_l;
use convex_agreement::protocol::ProtocolConfig;
use convex_agreement::simnet::AdversaryKind;
use std::time::Instant;

#[test]
#[ignore]
fn probe_scales() {
    for (n, l) in [(8usize, 1u64 << 12), (9, 256), (16, 1 << 12), (18, 256), (27, 256)] {
        let t = (n - 1) / 3;
        let cfg = ProtocolConfig {
            n,
            t,
            space: ConvexSpace::grid_1d(1 << 62),
            epsilon: rat(1, 1),
            l: Some(l),
            kappa: 256,
        lean_assignments: false,
        };
        let start = Instant::now();
        let (point, transcript) = measure_fixed_l(&cfg, 1, Some(AdversaryKind::Crash));
        let dt = start.elapsed();
        println!(
            "n={n} L={l}: bits={} rounds={} msgs={} failed={} wall={:?}",
            point.bits, point.rounds, transcript.honest_msgs_total, transcript.failed, dt
        );
    }
}
