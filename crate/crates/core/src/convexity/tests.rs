use super::rational2::{point2_int, Point2};
use super::*;
use num_traits::Zero;
use proptest::prelude::*;

fn grid_elem(sp: &ConvexSpace, v: u64) -> Element {
    sp.element(Value::Grid(v)).unwrap()
}

fn rat_elem(sp: &ConvexSpace, p: &Point2) -> Element {
    sp.element(Value::point(p.to_vec())).unwrap()
}

/// Carathéodory-style oracle for planar hull membership: a point is in the
/// hull iff some subset of at most 3 generators admits an exact barycentric
/// representation with nonnegative coordinates. Independent of the
/// orientation-based membership used by the implementation.
fn barycentric_in_hull(gens: &[Point2], p: &Point2) -> bool {
    // singletons
    if gens.iter().any(|g| g == p) {
        return true;
    }
    // segments: p = a + t (b - a), 0 <= t <= 1, exact
    for (i, a) in gens.iter().enumerate() {
        for b in &gens[i + 1..] {
            let d = [&b[0] - &a[0], &b[1] - &a[1]];
            let r = [&p[0] - &a[0], &p[1] - &a[1]];
            let cross = &d[0] * &r[1] - &d[1] * &r[0];
            if !cross.is_zero() {
                continue;
            }
            let dot = &r[0] * &d[0] + &r[1] * &d[1];
            let len2 = &d[0] * &d[0] + &d[1] * &d[1];
            if !len2.is_zero() && dot >= BigRational::zero() && dot <= len2 {
                return true;
            }
        }
    }
    // triangles: Cramer solve for barycentric coordinates
    for (i, a) in gens.iter().enumerate() {
        for (j, b) in gens.iter().enumerate().skip(i + 1) {
            for c in &gens[j + 1..] {
                let det = (&b[0] - &a[0]) * (&c[1] - &a[1]) - (&c[0] - &a[0]) * (&b[1] - &a[1]);
                if det.is_zero() {
                    continue;
                }
                let l1 = ((&p[0] - &a[0]) * (&c[1] - &a[1]) - (&c[0] - &a[0]) * (&p[1] - &a[1]))
                    / &det;
                let l2 = ((&b[0] - &a[0]) * (&p[1] - &a[1]) - (&p[0] - &a[0]) * (&b[1] - &a[1]))
                    / &det;
                let l0 = BigRational::from_integer(1.into()) - &l1 - &l2;
                if l0 >= BigRational::zero()
                    && l1 >= BigRational::zero()
                    && l2 >= BigRational::zero()
                {
                    return true;
                }
            }
        }
    }
    false
}

#[test]
fn hull_contains_1d_interval() {
    let sp = ConvexSpace::grid_1d(8);
    let gens: ValueMultiset = [1u64, 5].iter().map(|&v| grid_elem(&sp, v)).collect();
    assert!(hull_contains(&sp, &gens, &grid_elem(&sp, 3)).unwrap());
    assert!(hull_contains(&sp, &gens, &grid_elem(&sp, 1)).unwrap());
    assert!(!hull_contains(&sp, &gens, &grid_elem(&sp, 6)).unwrap());
}

#[test]
fn hull_contains_2d_box() {
    let sp = ConvexSpace::grid_box(vec![5, 5]);
    let gens: ValueMultiset = [(0u64, 0u64), (4, 4)]
        .iter()
        .map(|&(x, y)| sp.element(Value::Box(vec![x, y])).unwrap())
        .collect();
    // box convexity admits the corner (0, 4)
    let corner = sp.element(Value::Box(vec![0, 4])).unwrap();
    assert!(hull_contains(&sp, &gens, &corner).unwrap());
}

#[test]
fn hull_contains_rational_matches_barycentric_oracle() {
    let sp = ConvexSpace::euclidean_rational(2);
    let tri = [point2_int(0, 0), point2_int(2, 0), point2_int(0, 2)];
    let gens: ValueMultiset = tri.iter().map(|p| rat_elem(&sp, p)).collect();
    let inside = rat_elem(&sp, &point2_int(1, 1));
    let outside = rat_elem(&sp, &point2_int(2, 2));
    assert!(hull_contains(&sp, &gens, &inside).unwrap());
    assert!(!hull_contains(&sp, &gens, &outside).unwrap());
    assert!(barycentric_in_hull(&tri, &point2_int(1, 1)));
    assert!(!barycentric_in_hull(&tri, &point2_int(2, 2)));
}

#[test]
fn hull_contains_space_mismatch_is_typed_error() {
    let sp = ConvexSpace::grid_1d(8);
    let other = ConvexSpace::grid_box(vec![2, 2]);
    let gens: ValueMultiset = [1u64, 5].iter().map(|&v| grid_elem(&sp, v)).collect();
    let bad = other.element(Value::Box(vec![1, 1])).unwrap();
    assert!(matches!(
        hull_contains(&sp, &gens, &bad),
        Err(ConvexityError::SpaceMismatch(_))
    ));
}

#[test]
fn helly_numbers_per_kind() {
    assert_eq!(helly_number(&ConvexSpace::grid_1d(4)), 2);
    assert_eq!(helly_number(&ConvexSpace::grid_box(vec![3, 3, 3])), 2);
    assert_eq!(helly_number(&ConvexSpace::euclidean_rational(2)), 3);
    let prod = product_space(vec![ConvexSpace::grid_1d(4), ConvexSpace::grid_1d(4)]).unwrap();
    assert_eq!(helly_number(&prod), 2);
}

#[test]
fn product_hull_is_cartesian_product_of_hulls() {
    let f = ConvexSpace::grid_1d(2);
    let prod = product_space(vec![f.clone(), f]).unwrap();
    let gens: ValueMultiset = [(0u64, 0u64), (1, 1)]
        .iter()
        .map(|&(a, b)| {
            prod.element(Value::Tuple(vec![Value::Grid(a), Value::Grid(b)]))
                .unwrap()
        })
        .collect();
    // hull({(0,0), (1,1)}) = {0,1} x {0,1}
    for a in 0..2u64 {
        for b in 0..2u64 {
            let e = prod
                .element(Value::Tuple(vec![Value::Grid(a), Value::Grid(b)]))
                .unwrap();
            assert!(hull_contains(&prod, &gens, &e).unwrap(), "({a},{b})");
        }
    }
}

#[test]
fn single_factor_product_matches_factor_hulls() {
    let f = ConvexSpace::grid_1d(6);
    let prod = product_space(vec![f.clone()]).unwrap();
    let gens_f: ValueMultiset = [1u64, 4].iter().map(|&v| grid_elem(&f, v)).collect();
    let gens_p: ValueMultiset = [1u64, 4]
        .iter()
        .map(|&v| prod.element(Value::Tuple(vec![Value::Grid(v)])).unwrap())
        .collect();
    for v in 0..6u64 {
        let in_f = hull_contains(&f, &gens_f, &grid_elem(&f, v)).unwrap();
        let e = prod.element(Value::Tuple(vec![Value::Grid(v)])).unwrap();
        let in_p = hull_contains(&prod, &gens_p, &e).unwrap();
        assert_eq!(in_f, in_p, "v={v}");
    }
}

#[test]
fn product_rejects_infinite_factor() {
    assert!(matches!(
        product_space(vec![ConvexSpace::euclidean_rational(1)]),
        Err(ConvexityError::NonFiniteFactor)
    ));
}

/// Brute-force safe-area oracle on finite spaces: an element is in
/// safe_k(M) iff it lies in the hull of every (|M|-k)-subset.
fn oracle_safe_members(sp: &ConvexSpace, items: &[Element], k: usize) -> Vec<Element> {
    let all = sp.enumerate().unwrap();
    let m = items.len();
    if k >= m {
        // the empty subset's hull is empty
        return Vec::new();
    }
    all.into_iter()
        .filter(|cand| {
            let mut inside = true;
            crate::util::for_each_combination(m, m - k, |idx| {
                let sub: ValueMultiset =
                    idx.iter().map(|&i| items[i].clone()).collect();
                if !hull_contains(sp, &sub, cand).unwrap() {
                    inside = false;
                }
                inside
            });
            inside
        })
        .collect()
}

#[test]
fn safe_area_matches_oracle_on_small_grid() {
    let sp = ConvexSpace::grid_1d(6);
    let sets: [&[u64]; 4] = [&[0, 2, 4], &[1, 1, 3, 5], &[2, 2, 2], &[0, 5, 5, 0]];
    for vals in sets {
        let items: Vec<Element> = vals.iter().map(|&v| grid_elem(&sp, v)).collect();
        for k in 0..=vals.len() {
            let area = safe_area(&sp, &ValueMultiset::new(items.clone()), k).unwrap();
            let expect = oracle_safe_members(&sp, &items, k);
            for e in sp.enumerate().unwrap() {
                assert_eq!(
                    area.contains(&e),
                    expect.contains(&e),
                    "vals={vals:?} k={k} e={:?}",
                    e.value()
                );
            }
            assert_eq!(
                pick_canonical(&area),
                expect.iter().min().cloned(),
                "vals={vals:?} k={k}"
            );
        }
    }
}

#[test]
fn safe_area_on_product_matches_per_factor_product() {
    let f = ConvexSpace::grid_1d(4);
    let prod = product_space(vec![f.clone(), f.clone()]).unwrap();
    let tuples = [(0u64, 3u64), (1, 2), (3, 0), (2, 2)];
    let items: Vec<Element> = tuples
        .iter()
        .map(|&(a, b)| {
            prod.element(Value::Tuple(vec![Value::Grid(a), Value::Grid(b)]))
                .unwrap()
        })
        .collect();
    for k in 0..=2usize {
        let area = safe_area(&prod, &ValueMultiset::new(items.clone()), k).unwrap();
        let expect = oracle_safe_members(&prod, &items, k);
        for e in prod.enumerate().unwrap() {
            assert_eq!(area.contains(&e), expect.contains(&e), "k={k}");
        }
    }
}

#[test]
fn pick_canonical_is_permutation_invariant() {
    let sp = ConvexSpace::grid_1d(8);
    let vals = [3u64, 1, 7, 1, 5];
    let base: Vec<Element> = vals.iter().map(|&v| grid_elem(&sp, v)).collect();
    let a = safe_area(&sp, &ValueMultiset::new(base.clone()), 2).unwrap();
    let mut rev = base.clone();
    rev.reverse();
    let b = safe_area(&sp, &ValueMultiset::new(rev), 2).unwrap();
    assert_eq!(pick_canonical(&a), pick_canonical(&b));
}

#[test]
fn dilated_encode_plain_path_adds_one_bit() {
    let sp = ConvexSpace::grid_1d(64);
    let e = grid_elem(&sp, 37);
    let enc = dilated_encode(&sp, &e, None).unwrap();
    assert_eq!(enc.len(), e.bit_length() + 1);
    assert!(!enc.get(0));
    let back = dilated_decode(&sp, &enc).unwrap();
    assert_eq!(&back, &e);
}

#[test]
fn dilated_form_rejected_on_dilation_one_space() {
    let sp = ConvexSpace::grid_1d(4);
    let e = grid_elem(&sp, 1);
    let form = HyperplaneForm { hyperplanes: vec![] };
    assert!(dilated_encode(&sp, &e, Some(&form)).is_err());
}

#[test]
fn dilated_hyperplane_roundtrip() {
    let sp = ConvexSpace::euclidean_rational(2);
    // vertex (1,1) as the meet of x+y=2 (through (2,0),(0,2)) and y=x
    // (through (0,0),(3,3))
    let v = rat_elem(&sp, &point2_int(1, 1));
    let form = HyperplaneForm {
        hyperplanes: vec![
            vec![point2_int(2, 0).to_vec(), point2_int(0, 2).to_vec()],
            vec![point2_int(0, 0).to_vec(), point2_int(3, 3).to_vec()],
        ],
    };
    let enc = dilated_encode(&sp, &v, Some(&form)).unwrap();
    assert!(enc.get(0));
    let back = dilated_decode(&sp, &enc).unwrap();
    assert_eq!(&back, &v);
}

#[test]
fn dilated_rejects_inconsistent_witness() {
    let sp = ConvexSpace::euclidean_rational(2);
    let v = rat_elem(&sp, &point2_int(5, 5));
    let form = HyperplaneForm {
        hyperplanes: vec![
            vec![point2_int(2, 0).to_vec(), point2_int(0, 2).to_vec()],
            vec![point2_int(0, 0).to_vec(), point2_int(3, 3).to_vec()],
        ],
    };
    assert!(matches!(
        dilated_encode(&sp, &v, Some(&form)),
        Err(ConvexityError::BadHyperplaneWitness(_))
    ));
}

#[test]
fn hull_is_monotone_and_idempotent_on_finite_spaces() {
    let sp = ConvexSpace::grid_box(vec![4, 4]);
    let all = sp.enumerate().unwrap();
    let s: ValueMultiset = vec![all[1].clone(), all[6].clone()].into_iter().collect();
    let t: ValueMultiset = vec![all[1].clone(), all[6].clone(), all[11].clone()]
        .into_iter()
        .collect();
    let hull_members = |gens: &ValueMultiset| -> Vec<Element> {
        all.iter()
            .filter(|e| hull_contains(&sp, gens, e).unwrap())
            .cloned()
            .collect()
    };
    let hs = hull_members(&s);
    let ht = hull_members(&t);
    for e in &hs {
        assert!(ht.contains(e), "S subset T must give hull(S) subset hull(T)");
    }
    // idempotence: hull(hull-members(S)) = hull(S)
    let hhs = hull_members(&ValueMultiset::new(hs.clone()));
    assert_eq!(hs, hhs);
}

proptest! {
    #[test]
    fn grid_codec_roundtrip_and_total_order(a in 0u64..100_000, b in 0u64..100_000) {
        let sp = ConvexSpace::grid_1d(100_000);
        let ea = grid_elem(&sp, a);
        let eb = grid_elem(&sp, b);
        prop_assert_eq!(sp.decode(ea.encoding()).unwrap(), Value::Grid(a));
        // order is total and matches numeric order
        prop_assert_eq!(ea.cmp(&eb), a.cmp(&b));
        if a != b {
            prop_assert_ne!(ea.encoding(), eb.encoding());
        }
    }

    #[test]
    fn rational_codec_roundtrip(n1 in -50i64..50, d1 in 1i64..20, n2 in -50i64..50, d2 in 1i64..20) {
        let sp = ConvexSpace::euclidean_rational(2);
        let p = [
            BigRational::new(n1.into(), d1.into()),
            BigRational::new(n2.into(), d2.into()),
        ];
        let e = sp.element(Value::point(p.to_vec())).unwrap();
        let v = sp.decode(e.encoding()).unwrap();
        prop_assert_eq!(v.as_point().unwrap(), p.to_vec());
    }

    #[test]
    fn safe_area_witness_always_member(vals in proptest::collection::vec(0u64..8, 1..7), k in 0usize..7) {
        let sp = ConvexSpace::grid_1d(8);
        let items: Vec<Element> = vals.iter().map(|&v| grid_elem(&sp, v)).collect();
        if k <= items.len() {
            let area = safe_area(&sp, &ValueMultiset::new(items), k).unwrap();
            if let Some(w) = pick_canonical(&area) {
                prop_assert!(area.contains(&w));
            }
        }
    }
}
