//! Finite convexity spaces given by an explicit hull-closure table.
//!
//! File format: JSON object `{"elements": [label, ...], "hulls": [[[gen
//! indices], [member indices]], ...]}`. The convex family is taken to be the
//! listed member sets plus the empty set and the full space; a file is
//! rejected unless that family is closed under intersection and consistent
//! with the listed generator entries.

use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use super::ConvexityError;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExplicitSpaceFile {
    pub elements: Vec<String>,
    pub hulls: Vec<(Vec<usize>, Vec<usize>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExplicitSpace {
    pub labels: Vec<String>,
    /// Convex family as element-index bitmasks, sorted. Always contains 0
    /// (empty set) and the full mask.
    pub family: Vec<u64>,
    pub helly: u32,
}

impl ExplicitSpace {
    pub fn from_file(file: &ExplicitSpaceFile) -> Result<ExplicitSpace, ConvexityError> {
        let n = file.elements.len();
        if n == 0 || n > 63 {
            return Err(ConvexityError::BadExplicitSpace(format!(
                "element count {n} out of range 1..=63"
            )));
        }
        let full: u64 = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
        let to_mask = |ixs: &[usize]| -> Result<u64, ConvexityError> {
            let mut m = 0u64;
            for &i in ixs {
                if i >= n {
                    return Err(ConvexityError::BadExplicitSpace(format!(
                        "index {i} out of range"
                    )));
                }
                m |= 1u64 << i;
            }
            Ok(m)
        };

        let mut family: BTreeSet<u64> = BTreeSet::new();
        family.insert(0);
        family.insert(full);
        let mut listed: Vec<(u64, u64)> = Vec::new();
        for (gens, members) in &file.hulls {
            let g = to_mask(gens)?;
            let m = to_mask(members)?;
            if g & m != g {
                return Err(ConvexityError::BadExplicitSpace(format!(
                    "generators {g:b} not contained in members {m:b}"
                )));
            }
            family.insert(m);
            listed.push((g, m));
        }

        // Intersection closure.
        let sets: Vec<u64> = family.iter().copied().collect();
        for (i, &a) in sets.iter().enumerate() {
            for &b in &sets[i + 1..] {
                if !family.contains(&(a & b)) {
                    return Err(ConvexityError::BadExplicitSpace(format!(
                        "family not intersection-closed: {a:b} & {b:b} missing"
                    )));
                }
            }
        }

        let space = ExplicitSpace {
            labels: file.elements.clone(),
            family: family.into_iter().collect(),
            helly: 2,
        };

        // Listed entries must agree with hulls computed from the family.
        for (g, m) in listed {
            let h = space.hull_mask(g);
            if h != m {
                return Err(ConvexityError::BadExplicitSpace(format!(
                    "hull entry mismatch: listed {m:b}, closure gives {h:b}"
                )));
            }
        }

        let helly = space.compute_helly();
        Ok(ExplicitSpace { helly, ..space })
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn full_mask(&self) -> u64 {
        if self.labels.len() == 64 {
            u64::MAX
        } else {
            (1u64 << self.labels.len()) - 1
        }
    }

    /// Hull of an element set: intersection of all family sets containing it.
    pub fn hull_mask(&self, gens: u64) -> u64 {
        let mut h = self.full_mask();
        for &k in &self.family {
            if k & gens == gens {
                h &= k;
            }
        }
        h
    }

    /// Smallest h >= 2 such that every (h+1)-subfamily whose h-subfamilies all
    /// intersect has a common element. Checking families of size h+1 suffices
    /// in an intersection-closed family by the standard induction.
    fn compute_helly(&self) -> u32 {
        let nonempty: Vec<u64> = self.family.iter().copied().filter(|&m| m != 0).collect();
        for h in 2..=(self.labels.len().max(2) as u32) {
            let k = h as usize + 1;
            let mut counterexample_found = false;
            crate::util::for_each_combination(nonempty.len(), k, |idx| {
                let sets: Vec<u64> = idx.iter().map(|&i| nonempty[i]).collect();
                let all: u64 = sets.iter().fold(u64::MAX, |a, &b| a & b);
                if all == 0 {
                    let every_h_intersects = (0..k).all(|skip| {
                        sets.iter()
                            .enumerate()
                            .filter(|(j, _)| *j != skip)
                            .fold(u64::MAX, |a, (_, &b)| a & b)
                            != 0
                    });
                    if every_h_intersects {
                        counterexample_found = true;
                        return false;
                    }
                }
                true
            });
            if !counterexample_found {
                return h;
            }
        }
        self.labels.len().max(2) as u32
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid_file(n: usize) -> ExplicitSpaceFile {
        // Path convexity on 0..n: convex sets = integer intervals.
        let elements: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let mut hulls = Vec::new();
        for a in 0..n {
            for b in a..n {
                hulls.push((vec![a, b], (a..=b).collect::<Vec<_>>()));
            }
        }
        ExplicitSpaceFile { elements, hulls }
    }

    #[test]
    fn interval_space_loads_with_helly_2() {
        let sp = ExplicitSpace::from_file(&grid_file(5)).unwrap();
        assert_eq!(sp.helly, 2);
        assert_eq!(sp.hull_mask(0b10001), 0b11111);
        assert_eq!(sp.hull_mask(0b00110), 0b00110);
    }

    #[test]
    fn rejects_non_closed_family() {
        // {a,b} and {b,c} listed but {b} missing.
        let file = ExplicitSpaceFile {
            elements: vec!["a".into(), "b".into(), "c".into()],
            hulls: vec![(vec![0, 1], vec![0, 1]), (vec![1, 2], vec![1, 2])],
        };
        assert!(ExplicitSpace::from_file(&file).is_err());
    }

    #[test]
    fn rejects_inconsistent_hull_entry() {
        let mut file = grid_file(4);
        file.hulls.push((vec![0, 3], vec![0, 1, 3])); // hull(0,3) is 0..3
        assert!(ExplicitSpace::from_file(&file).is_err());
    }

    #[test]
    fn free_space_has_helly_n() {
        // All subsets convex: the complements of singletons pairwise (and
        // (n-1)-wise) intersect without a common point, so the Helly number
        // is the element count.
        let n = 4;
        let elements: Vec<String> = (0..n).map(|i| format!("e{i}")).collect();
        let mut hulls = Vec::new();
        for m in 1u64..(1 << n) {
            let ixs: Vec<usize> = (0..n).filter(|&i| m >> i & 1 == 1).collect();
            hulls.push((ixs.clone(), ixs));
        }
        let sp = ExplicitSpace::from_file(&ExplicitSpaceFile { elements, hulls }).unwrap();
        assert_eq!(sp.helly, 4);
    }
}
