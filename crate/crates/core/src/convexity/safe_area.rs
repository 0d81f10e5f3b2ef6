//! Safe areas: intersections of subset hulls.
//!
//! `safe_k(M)` intersects the hulls of all (|M|-k)-subsets of M. Interval,
//! box, and product spaces admit an exact order-statistic shortcut (the
//! intersection of per-coordinate intervals is again a per-coordinate
//! interval), which protocol call sites rely on when |M| reaches committee
//! size. Explicit and rational spaces enumerate subsets directly; their call
//! sites keep |M| small and a guard rejects infeasible enumerations.

use super::rational2::{line_intersection, ConvexPolygon, Point2};
use super::{
    dilated_encode, ConvexSpace, ConvexityError, Element, HyperplaneForm, Value, ValueMultiset,
};
use crate::bits::Bits;
use crate::util::{binomial, for_each_combination};
use num_rational::BigRational;

const MAX_SUBSET_ENUMERATION: u128 = 200_000;

#[derive(Debug, Clone)]
pub struct SafeArea {
    space: ConvexSpace,
    repr: AreaRepr,
    witness: Option<Element>,
    witness_form: Option<HyperplaneForm>,
}

#[derive(Debug, Clone)]
enum AreaRepr {
    Empty,
    Interval { lo: u64, hi: u64 },
    BoxArea { lo: Vec<u64>, hi: Vec<u64> },
    RatInterval { lo: BigRational, hi: BigRational },
    Explicit { members: u64 },
    ProductArea { factors: Vec<SafeArea> },
    Rational2 { hulls: Vec<ConvexPolygon> },
}

impl SafeArea {
    pub fn space(&self) -> &ConvexSpace {
        &self.space
    }

    pub fn is_empty(&self) -> bool {
        matches!(self.repr, AreaRepr::Empty)
    }

    pub fn witness(&self) -> Option<&Element> {
        self.witness.as_ref()
    }

    /// Hyperplane description of the witness vertex, present on rational
    /// spaces when the short form exists.
    pub fn witness_form(&self) -> Option<&HyperplaneForm> {
        self.witness_form.as_ref()
    }

    /// Exact membership test.
    pub fn contains(&self, e: &Element) -> bool {
        if self.space.check_value(e.value()).is_err() {
            return false;
        }
        Self::repr_contains(&self.repr, e.value())
    }

    fn repr_contains(repr: &AreaRepr, v: &Value) -> bool {
        match (repr, v) {
            (AreaRepr::Empty, _) => false,
            (AreaRepr::Interval { lo, hi }, Value::Grid(x)) => lo <= x && x <= hi,
            (AreaRepr::BoxArea { lo, hi }, Value::Box(xs)) => xs
                .iter()
                .enumerate()
                .all(|(i, x)| lo[i] <= *x && *x <= hi[i]),
            (AreaRepr::RatInterval { lo, hi }, Value::Point(_)) => {
                let c = v.as_point().expect("checked");
                lo <= &c[0] && &c[0] <= hi
            }
            (AreaRepr::Explicit { members }, Value::Label(i)) => members >> i & 1 == 1,
            (AreaRepr::ProductArea { factors }, Value::Tuple(vs)) => factors
                .iter()
                .zip(vs.iter())
                .all(|(f, v)| Self::repr_contains(&f.repr, v)),
            (AreaRepr::Rational2 { hulls }, Value::Point(_)) => {
                let c = v.as_point().expect("checked");
                let p: Point2 = [c[0].clone(), c[1].clone()];
                hulls.iter().all(|h| h.contains(&p))
            }
            _ => false,
        }
    }
}

/// Intersection of the hulls of all (|M|-k)-subsets of M, with a canonical
/// witness when nonempty.
pub fn safe_area(
    space: &ConvexSpace,
    m: &ValueMultiset,
    k: usize,
) -> Result<SafeArea, ConvexityError> {
    if k > m.len() {
        return Err(ConvexityError::KOutOfRange { k, size: m.len() });
    }
    for e in m.items() {
        space.check_value(e.value())?;
    }
    if m.len() == 0 || k == m.len() {
        // hull of the empty subset is empty
        return Ok(SafeArea {
            space: space.clone(),
            repr: AreaRepr::Empty,
            witness: None,
            witness_form: None,
        });
    }
    let repr = compute_repr(space, m.items(), k)?;
    finish(space, repr)
}

fn finish(space: &ConvexSpace, repr: AreaRepr) -> Result<SafeArea, ConvexityError> {
    let (witness, witness_form) = compute_witness(space, &repr)?;
    Ok(SafeArea {
        space: space.clone(),
        repr,
        witness,
        witness_form,
    })
}

fn compute_repr(
    space: &ConvexSpace,
    items: &[Element],
    k: usize,
) -> Result<AreaRepr, ConvexityError> {
    let m = items.len();
    match space {
        ConvexSpace::GridInterval1D { .. } => {
            let mut vals: Vec<u64> = items
                .iter()
                .map(|e| match e.value() {
                    Value::Grid(x) => *x,
                    _ => unreachable!(),
                })
                .collect();
            vals.sort_unstable();
            let (lo, hi) = (vals[k], vals[m - 1 - k]);
            Ok(if lo <= hi {
                AreaRepr::Interval { lo, hi }
            } else {
                AreaRepr::Empty
            })
        }
        ConvexSpace::GridBox { dims } => {
            let mut lo = Vec::with_capacity(dims.len());
            let mut hi = Vec::with_capacity(dims.len());
            for i in 0..dims.len() {
                let mut vals: Vec<u64> = items
                    .iter()
                    .map(|e| match e.value() {
                        Value::Box(xs) => xs[i],
                        _ => unreachable!(),
                    })
                    .collect();
                vals.sort_unstable();
                if vals[k] > vals[m - 1 - k] {
                    return Ok(AreaRepr::Empty);
                }
                lo.push(vals[k]);
                hi.push(vals[m - 1 - k]);
            }
            Ok(AreaRepr::BoxArea { lo, hi })
        }
        ConvexSpace::EuclideanRational { dim: 1 } => {
            let mut vals: Vec<BigRational> = items
                .iter()
                .map(|e| e.value().as_point().expect("checked")[0].clone())
                .collect();
            vals.sort();
            if vals[k] > vals[m - 1 - k] {
                Ok(AreaRepr::Empty)
            } else {
                Ok(AreaRepr::RatInterval {
                    lo: vals[k].clone(),
                    hi: vals[m - 1 - k].clone(),
                })
            }
        }
        ConvexSpace::EuclideanRational { .. } => {
            if binomial(m, k) > MAX_SUBSET_ENUMERATION {
                return Err(ConvexityError::EnumerationTooLarge { m, k });
            }
            let pts: Vec<Point2> = items
                .iter()
                .map(|e| {
                    let c = e.value().as_point().expect("checked");
                    [c[0].clone(), c[1].clone()]
                })
                .collect();
            let mut hulls: Vec<ConvexPolygon> = Vec::new();
            for_each_combination(m, m - k, |idx| {
                let sub: Vec<Point2> = idx.iter().map(|&i| pts[i].clone()).collect();
                let h = ConvexPolygon::hull_of(&sub);
                if !hulls.contains(&h) {
                    hulls.push(h);
                }
                true
            });
            // emptiness is decided by the witness search over candidate vertices
            Ok(AreaRepr::Rational2 { hulls })
        }
        ConvexSpace::FiniteExplicit(sp) => {
            if binomial(m, k) > MAX_SUBSET_ENUMERATION {
                return Err(ConvexityError::EnumerationTooLarge { m, k });
            }
            let masks: Vec<u64> = items
                .iter()
                .map(|e| match e.value() {
                    Value::Label(i) => 1u64 << i,
                    _ => unreachable!(),
                })
                .collect();
            let mut members = sp.full_mask();
            for_each_combination(m, m - k, |idx| {
                let gens = idx.iter().fold(0u64, |a, &i| a | masks[i]);
                members &= sp.hull_mask(gens);
                members != 0
            });
            Ok(if members == 0 {
                AreaRepr::Empty
            } else {
                AreaRepr::Explicit { members }
            })
        }
        ConvexSpace::Product(factors) => {
            let mut out = Vec::with_capacity(factors.len());
            for (i, f) in factors.iter().enumerate() {
                let proj: Vec<Element> = items
                    .iter()
                    .map(|e| match e.value() {
                        Value::Tuple(vs) => f.element(vs[i].clone()).expect("valid projection"),
                        _ => unreachable!(),
                    })
                    .collect();
                let repr = compute_repr(f, &proj, k)?;
                if matches!(repr, AreaRepr::Empty) {
                    return Ok(AreaRepr::Empty);
                }
                out.push(finish(f, repr)?);
            }
            Ok(AreaRepr::ProductArea { factors: out })
        }
    }
}

fn compute_witness(
    space: &ConvexSpace,
    repr: &AreaRepr,
) -> Result<(Option<Element>, Option<HyperplaneForm>), ConvexityError> {
    match repr {
        AreaRepr::Empty => Ok((None, None)),
        AreaRepr::Interval { lo, .. } => {
            Ok((Some(space.element(Value::Grid(*lo))?), None))
        }
        AreaRepr::BoxArea { lo, .. } => {
            Ok((Some(space.element(Value::Box(lo.clone()))?), None))
        }
        AreaRepr::RatInterval { lo, .. } => {
            let w = space.element(Value::point(vec![lo.clone()]))?;
            let form = HyperplaneForm {
                hyperplanes: vec![vec![vec![lo.clone()]]],
            };
            Ok((Some(w), Some(form)))
        }
        AreaRepr::Explicit { members } => {
            let i = members.trailing_zeros() as usize;
            Ok((Some(space.element(Value::Label(i))?), None))
        }
        AreaRepr::ProductArea { factors } => {
            let vs: Option<Vec<Value>> = factors
                .iter()
                .map(|f| f.witness().map(|w| w.value().clone()))
                .collect();
            match vs {
                Some(vs) => Ok((Some(space.element(Value::Tuple(vs))?), None)),
                None => Ok((None, None)),
            }
        }
        AreaRepr::Rational2 { hulls } => rational2_witness(space, hulls),
    }
}

/// Enumerates candidate vertices of the hull intersection (polygon corners
/// and pairwise edge-line meets), keeps those inside every hull, and returns
/// the minimum under the dilated-encoding (length, lex) order.
fn rational2_witness(
    space: &ConvexSpace,
    hulls: &[ConvexPolygon],
) -> Result<(Option<Element>, Option<HyperplaneForm>), ConvexityError> {
    let contains_all = |p: &Point2| hulls.iter().all(|h| h.contains(p));

    // (vertex, hyperplane form)
    let mut candidates: Vec<(Point2, HyperplaneForm)> = Vec::new();
    for h in hulls {
        for v in &h.vertices {
            candidates.push((
                v.clone(),
                HyperplaneForm {
                    hyperplanes: vec![vec![v.to_vec()], vec![v.to_vec()]],
                },
            ));
        }
    }
    let edges: Vec<(Point2, Point2)> = hulls.iter().flat_map(|h| h.edges()).collect();
    for (i, e1) in edges.iter().enumerate() {
        for e2 in &edges[i + 1..] {
            if let Some(p) = line_intersection(&e1.0, &e1.1, &e2.0, &e2.1) {
                let form = HyperplaneForm {
                    hyperplanes: vec![
                        vec![e1.0.to_vec(), e1.1.to_vec()],
                        vec![e2.0.to_vec(), e2.1.to_vec()],
                    ],
                };
                candidates.push((p, form));
            }
        }
    }

    let mut best: Option<(Bits, Element, HyperplaneForm)> = None;
    for (p, form) in candidates {
        if !contains_all(&p) {
            continue;
        }
        let elem = space.element(Value::point(p.to_vec()))?;
        let plain = dilated_encode(space, &elem, None)?;
        let described = dilated_encode(space, &elem, Some(&form))?;
        let enc = if described < plain { described } else { plain };
        let better = match &best {
            None => true,
            Some((cur, _, _)) => enc < *cur,
        };
        if better {
            best = Some((enc, elem, form));
        }
    }
    Ok(match best {
        Some((_, elem, form)) => (Some(elem), Some(form)),
        None => (None, None),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convexity::pick_canonical;

    fn grid(size: u64) -> ConvexSpace {
        ConvexSpace::grid_1d(size)
    }

    fn ms(space: &ConvexSpace, vals: &[u64]) -> ValueMultiset {
        vals.iter()
            .map(|&v| space.element(Value::Grid(v)).unwrap())
            .collect()
    }

    #[test]
    fn interval_order_statistics() {
        // spec example: {1, 2, 3, 100}, k = 1 -> [2, 3], witness 2
        let sp = grid(128);
        let area = safe_area(&sp, &ms(&sp, &[1, 2, 3, 100]), 1).unwrap();
        assert!(!area.is_empty());
        assert!(area.contains(&sp.element(Value::Grid(2)).unwrap()));
        assert!(area.contains(&sp.element(Value::Grid(3)).unwrap()));
        assert!(!area.contains(&sp.element(Value::Grid(1)).unwrap()));
        assert!(!area.contains(&sp.element(Value::Grid(4)).unwrap()));
        assert_eq!(
            pick_canonical(&area).unwrap().value(),
            &Value::Grid(2)
        );
    }

    #[test]
    fn identical_values_survive_any_k() {
        let sp = grid(16);
        let area = safe_area(&sp, &ms(&sp, &[7, 7, 7]), 1).unwrap();
        assert_eq!(pick_canonical(&area).unwrap().value(), &Value::Grid(7));
        assert!(!area.contains(&sp.element(Value::Grid(6)).unwrap()));
    }

    #[test]
    fn k_out_of_range_is_error() {
        let sp = grid(4);
        assert!(safe_area(&sp, &ms(&sp, &[1]), 2).is_err());
    }

    #[test]
    fn k_equals_size_is_empty() {
        let sp = grid(4);
        let area = safe_area(&sp, &ms(&sp, &[1, 2]), 2).unwrap();
        assert!(area.is_empty());
        assert!(pick_canonical(&area).is_none());
    }

    #[test]
    fn box_safe_area_is_per_coordinate() {
        // spec example: {(0,0), (1,1), (9,9)} with k = 1 -> [1,1] x [1,1]
        let sp = ConvexSpace::grid_box(vec![10, 10]);
        let items: ValueMultiset = [(0u64, 0u64), (1, 1), (9, 9)]
            .iter()
            .map(|&(x, y)| sp.element(Value::Box(vec![x, y])).unwrap())
            .collect();
        let area = safe_area(&sp, &items, 1).unwrap();
        assert_eq!(
            pick_canonical(&area).unwrap().value(),
            &Value::Box(vec![1, 1])
        );
        assert!(!area.contains(&sp.element(Value::Box(vec![0, 1])).unwrap()));
        assert!(!area.contains(&sp.element(Value::Box(vec![2, 1])).unwrap()));
    }

    #[test]
    fn rational2_triangle_k0_witness() {
        use crate::convexity::rational2::point2_int;
        let sp = ConvexSpace::euclidean_rational(2);
        let items: ValueMultiset = [point2_int(0, 0), point2_int(2, 0), point2_int(0, 2)]
            .iter()
            .map(|p| sp.element(Value::point(p.to_vec())).unwrap())
            .collect();
        let area = safe_area(&sp, &items, 0).unwrap();
        assert!(!area.is_empty());
        let one_one = sp
            .element(Value::point(point2_int(1, 1).to_vec()))
            .unwrap();
        assert!(area.contains(&one_one));
        let two_two = sp
            .element(Value::point(point2_int(2, 2).to_vec()))
            .unwrap();
        assert!(!area.contains(&two_two));
        // witness is the origin: shortest encoding among hull members
        assert_eq!(
            pick_canonical(&area).unwrap().value().as_point().unwrap(),
            point2_int(0, 0).to_vec()
        );
    }
}
