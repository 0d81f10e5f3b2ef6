use convex_agreement::extractor::{
    assign_parties_to_supernodes, assign_supernodes_to_committees, rat,
};

#[test]
#[ignore]
fn probe_assignments() {
    for n in [9usize, 13, 16, 18, 27, 32, 48, 64] {
        let a = assign_supernodes_to_committees(n, 2, 2, rat(1, 1)).unwrap();
        let max_committee: usize = (0..a.group_count)
            .map(|g| a.distinct_members(g).len())
            .max()
            .unwrap();
        println!(
            "committees n={n}: m={} D={} cert={:?} max_committee={}",
            a.group_count, a.degree, a.certificate, max_committee
        );
        let b = assign_parties_to_supernodes(n, n / 2, 2, rat(1, 1)).unwrap();
        let max_super: usize = (0..b.group_count)
            .map(|g| b.distinct_members(g).len())
            .max()
            .unwrap();
        println!(
            "supernodes n={n}->m={}: D={} cert={:?} max_supernode={}",
            b.group_count, b.degree, b.certificate, max_super
        );
    }
}
