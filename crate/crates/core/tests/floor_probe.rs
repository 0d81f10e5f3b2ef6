use convex_agreement::extractor::{committee_graph_with_floor, rat};

#[test]
#[ignore]
fn probe_worst_per_degree() {
    // per-degree worst_q: raise the floor step by step and watch which D is picked
    for (n, m, beta) in [
        (27usize, 13usize, rat(2, 5)),
        (32, 16, rat(2, 5)),
        (64, 32, rat(2, 5)),
        (27, 13, rat(1, 2)),
        (32, 16, rat(1, 2)),
        (64, 32, rat(1, 2)),
        (18, 9, rat(2, 5)),
        (18, 9, rat(1, 2)),
        (10, 10, rat(1, 3)),
        (32, 32, rat(1, 3)),
        (48, 48, rat(1, 3)),
    ] {
        let mut seen = Vec::new();
        let mut last_d = usize::MAX;
        for floor in 1..=m {
            let a = committee_graph_with_floor(n, m, rat(1, 3), beta, rat(1, 1000), floor).unwrap();
            if a.degree != last_d {
                last_d = a.degree;
                seen.push(format!("floor {floor} -> D={} ({:?})", a.degree, a.certificate));
            }
            if a.degree <= 4 {
                break;
            }
        }
        println!("n={n} m={m} beta={beta}: {}", seen.join(" | "));
    }
}
