//! Convexity spaces, canonical element encodings, safe areas, dilated
//! encodings, and product composition.
//!
//! All hull decisions are exact: grid spaces use integer comparisons,
//! Euclidean spaces use arbitrary-precision rationals. There is no floating
//! point anywhere in this module.

pub mod codec;
pub mod explicit;
pub mod rational2;
mod safe_area;

pub use explicit::{ExplicitSpace, ExplicitSpaceFile};
pub use safe_area::{safe_area, SafeArea};

use crate::bits::{BitReader, Bits};
use num_bigint::BigInt;
use num_rational::BigRational;
use rational2::Point2;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConvexityError {
    #[error("element does not match space: {0}")]
    SpaceMismatch(String),
    #[error("k = {k} exceeds multiset size {size}")]
    KOutOfRange { k: usize, size: usize },
    #[error("product factors must be finite spaces")]
    NonFiniteFactor,
    #[error("empty generator set")]
    EmptyGenerators,
    #[error("bad explicit space: {0}")]
    BadExplicitSpace(String),
    #[error("encoding error: {0}")]
    Encoding(String),
    #[error("bad hyperplane witness: {0}")]
    BadHyperplaneWitness(String),
    #[error("safe-area enumeration too large: C({m}, {k}) subsets")]
    EnumerationTooLarge { m: usize, k: usize },
}

/// A convexity-space descriptor. Cheap to clone; immutable after construction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConvexSpace {
    /// Integer points 0..size with interval convexity.
    GridInterval1D { size: u64 },
    /// Integer boxes: coordinate i ranges over 0..dims[i], box convexity.
    GridBox { dims: Arc<Vec<u64>> },
    /// Rational points in R^d with straight-line convexity, d in {1, 2}.
    EuclideanRational { dim: usize },
    /// Finite space given by an explicit hull-closure table.
    FiniteExplicit(Arc<ExplicitSpace>),
    /// Cartesian product of finite spaces.
    Product(Arc<Vec<ConvexSpace>>),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Value {
    Grid(u64),
    Box(Vec<u64>),
    Point(Vec<(String, String)>),
    Label(usize),
    Tuple(Vec<Value>),
}

impl Value {
    pub fn point(coords: Vec<BigRational>) -> Value {
        Value::Point(
            coords
                .iter()
                .map(|c| (c.numer().to_string(), c.denom().to_string()))
                .collect(),
        )
    }

    pub fn as_point(&self) -> Option<Vec<BigRational>> {
        match self {
            Value::Point(cs) => cs
                .iter()
                .map(|(n, d)| {
                    let num: BigInt = n.parse().ok()?;
                    let den: BigInt = d.parse().ok()?;
                    Some(BigRational::new(num, den))
                })
                .collect(),
            _ => None,
        }
    }
}

/// An element of a space together with its canonical encoding. Ordered by
/// (bit length, lexicographic on encoding); the codec is a bijection, so the
/// encoding determines the value.
#[derive(Debug, Clone)]
pub struct Element {
    bits: Bits,
    value: Value,
}

impl PartialEq for Element {
    fn eq(&self, other: &Self) -> bool {
        self.bits == other.bits
    }
}

impl Eq for Element {}

impl PartialOrd for Element {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Element {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.bits.cmp(&other.bits)
    }
}

impl std::hash::Hash for Element {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.bits.hash(state);
    }
}

impl Element {
    pub fn bit_length(&self) -> usize {
        self.bits.len()
    }

    pub fn encoding(&self) -> &Bits {
        &self.bits
    }

    pub fn value(&self) -> &Value {
        &self.value
    }
}

/// Multiset of elements; equality is order-insensitive.
#[derive(Debug, Clone)]
pub struct ValueMultiset {
    items: Vec<Element>,
}

impl ValueMultiset {
    pub fn new(items: Vec<Element>) -> Self {
        ValueMultiset { items }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[Element] {
        &self.items
    }

    pub fn push(&mut self, e: Element) {
        self.items.push(e);
    }
}

impl PartialEq for ValueMultiset {
    fn eq(&self, other: &Self) -> bool {
        let mut a = self.items.clone();
        let mut b = other.items.clone();
        a.sort();
        b.sort();
        a == b
    }
}

impl Eq for ValueMultiset {}

impl FromIterator<Element> for ValueMultiset {
    fn from_iter<T: IntoIterator<Item = Element>>(iter: T) -> Self {
        ValueMultiset { items: iter.into_iter().collect() }
    }
}

impl ConvexSpace {
    pub fn grid_1d(size: u64) -> ConvexSpace {
        assert!(size >= 1);
        ConvexSpace::GridInterval1D { size }
    }

    pub fn grid_box(dims: Vec<u64>) -> ConvexSpace {
        assert!(!dims.is_empty() && dims.iter().all(|&d| d >= 1));
        ConvexSpace::GridBox { dims: Arc::new(dims) }
    }

    pub fn euclidean_rational(dim: usize) -> ConvexSpace {
        assert!(dim == 1 || dim == 2, "euclidean-rational supports d in {{1, 2}}");
        ConvexSpace::EuclideanRational { dim }
    }

    pub fn finite_explicit(file: &ExplicitSpaceFile) -> Result<ConvexSpace, ConvexityError> {
        Ok(ConvexSpace::FiniteExplicit(Arc::new(ExplicitSpace::from_file(file)?)))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ConvexSpace::GridInterval1D { .. } => "grid-interval-1D",
            ConvexSpace::GridBox { .. } => "grid-box-d",
            ConvexSpace::EuclideanRational { .. } => "euclidean-rational-d",
            ConvexSpace::FiniteExplicit(_) => "finite-explicit",
            ConvexSpace::Product(_) => "product",
        }
    }

    pub fn is_finite(&self) -> bool {
        !matches!(self, ConvexSpace::EuclideanRational { .. })
    }

    /// Encoding-growth bound for safe-area representatives.
    pub fn dilation(&self) -> u32 {
        match self {
            ConvexSpace::EuclideanRational { dim } => (*dim as u32) * (*dim as u32 + 1),
            _ => 1,
        }
    }

    pub fn helly(&self) -> u32 {
        helly_number(self)
    }

    /// Validates that a value belongs to this space.
    pub fn check_value(&self, v: &Value) -> Result<(), ConvexityError> {
        match (self, v) {
            (ConvexSpace::GridInterval1D { size }, Value::Grid(x)) if x < size => Ok(()),
            (ConvexSpace::GridBox { dims }, Value::Box(xs))
                if xs.len() == dims.len() && xs.iter().zip(dims.iter()).all(|(x, d)| x < d) =>
            {
                Ok(())
            }
            (ConvexSpace::EuclideanRational { dim }, Value::Point(_)) => {
                let coords = v
                    .as_point()
                    .ok_or_else(|| ConvexityError::SpaceMismatch("unparsable point".into()))?;
                if coords.len() == *dim {
                    Ok(())
                } else {
                    Err(ConvexityError::SpaceMismatch(format!(
                        "point dimension {} vs space dimension {dim}",
                        coords.len()
                    )))
                }
            }
            (ConvexSpace::FiniteExplicit(sp), Value::Label(i)) if *i < sp.len() => Ok(()),
            (ConvexSpace::Product(factors), Value::Tuple(vs)) if vs.len() == factors.len() => {
                for (f, v) in factors.iter().zip(vs.iter()) {
                    f.check_value(v)?;
                }
                Ok(())
            }
            _ => Err(ConvexityError::SpaceMismatch(format!(
                "value {v:?} does not belong to {}",
                self.kind()
            ))),
        }
    }

    pub fn encode(&self, v: &Value) -> Result<Bits, ConvexityError> {
        self.check_value(v)?;
        let mut out = Bits::new();
        self.encode_into(v, &mut out);
        Ok(out)
    }

    fn encode_into(&self, v: &Value, out: &mut Bits) {
        match (self, v) {
            (ConvexSpace::GridInterval1D { .. }, Value::Grid(x)) => {
                codec::encode_bijective(*x, out);
            }
            (ConvexSpace::GridBox { dims }, Value::Box(xs)) => {
                for (x, d) in xs.iter().zip(dims.iter()) {
                    out.push_uint(*x, codec::fixed_width(*d));
                }
            }
            (ConvexSpace::EuclideanRational { .. }, Value::Point(_)) => {
                for c in v.as_point().expect("checked") {
                    codec::encode_rational(&c, out);
                }
            }
            (ConvexSpace::FiniteExplicit(sp), Value::Label(i)) => {
                out.push_uint(*i as u64, codec::fixed_width(sp.len() as u64));
            }
            (ConvexSpace::Product(factors), Value::Tuple(vs)) => {
                for (f, v) in factors.iter().zip(vs.iter()) {
                    out.push_uint_value(f, v);
                }
            }
            _ => unreachable!("checked by encode()"),
        }
    }

    /// Fixed encoding width for finite spaces (used in product composition).
    pub fn fixed_width(&self) -> usize {
        match self {
            ConvexSpace::GridInterval1D { size } => codec::fixed_width(*size),
            ConvexSpace::GridBox { dims } => {
                dims.iter().map(|&d| codec::fixed_width(d)).sum()
            }
            ConvexSpace::FiniteExplicit(sp) => codec::fixed_width(sp.len() as u64),
            ConvexSpace::Product(factors) => factors.iter().map(|f| f.fixed_width()).sum(),
            ConvexSpace::EuclideanRational { .. } => {
                unreachable!("infinite spaces have no fixed width")
            }
        }
    }

    pub fn decode(&self, bits: &Bits) -> Result<Value, ConvexityError> {
        let mut r = BitReader::new(bits);
        let v = self.decode_from(&mut r, bits.len())?;
        if r.remaining() != 0 {
            return Err(ConvexityError::Encoding(format!(
                "{} trailing bits after decode",
                r.remaining()
            )));
        }
        self.check_value(&v)?;
        Ok(v)
    }

    fn decode_from(&self, r: &mut BitReader<'_>, total_len: usize) -> Result<Value, ConvexityError> {
        let under = || ConvexityError::Encoding("underrun".into());
        match self {
            ConvexSpace::GridInterval1D { .. } => {
                // bijective code: the whole remaining string is the value
                let len = total_len - r.pos();
                if len > 62 {
                    return Err(ConvexityError::Encoding("grid value too wide".into()));
                }
                Ok(Value::Grid(codec::decode_bijective(r, len).ok_or_else(under)?))
            }
            ConvexSpace::GridBox { dims } => {
                let mut xs = Vec::with_capacity(dims.len());
                for &d in dims.iter() {
                    xs.push(r.read_uint(codec::fixed_width(d)).ok_or_else(under)?);
                }
                Ok(Value::Box(xs))
            }
            ConvexSpace::EuclideanRational { dim } => {
                let mut coords = Vec::with_capacity(*dim);
                for _ in 0..*dim {
                    coords.push(codec::decode_rational(r).ok_or_else(under)?);
                }
                Ok(Value::point(coords))
            }
            ConvexSpace::FiniteExplicit(sp) => {
                let i = r
                    .read_uint(codec::fixed_width(sp.len() as u64))
                    .ok_or_else(under)?;
                Ok(Value::Label(i as usize))
            }
            ConvexSpace::Product(factors) => {
                let mut vs = Vec::with_capacity(factors.len());
                for f in factors.iter() {
                    vs.push(f.decode_fixed(r)?);
                }
                Ok(Value::Tuple(vs))
            }
        }
    }

    /// Decodes a fixed-width factor encoding (product components).
    fn decode_fixed(&self, r: &mut BitReader<'_>) -> Result<Value, ConvexityError> {
        let under = || ConvexityError::Encoding("underrun".into());
        match self {
            ConvexSpace::GridInterval1D { size } => {
                let x = r.read_uint(codec::fixed_width(*size)).ok_or_else(under)?;
                Ok(Value::Grid(x))
            }
            ConvexSpace::GridBox { dims } => {
                let mut xs = Vec::with_capacity(dims.len());
                for &d in dims.iter() {
                    xs.push(r.read_uint(codec::fixed_width(d)).ok_or_else(under)?);
                }
                Ok(Value::Box(xs))
            }
            ConvexSpace::FiniteExplicit(sp) => {
                let i = r
                    .read_uint(codec::fixed_width(sp.len() as u64))
                    .ok_or_else(under)?;
                Ok(Value::Label(i as usize))
            }
            ConvexSpace::Product(factors) => {
                let mut vs = Vec::with_capacity(factors.len());
                for f in factors.iter() {
                    vs.push(f.decode_fixed(r)?);
                }
                Ok(Value::Tuple(vs))
            }
            ConvexSpace::EuclideanRational { .. } => {
                Err(ConvexityError::Encoding("infinite factor".into()))
            }
        }
    }

    pub fn element(&self, v: Value) -> Result<Element, ConvexityError> {
        let bits = self.encode(&v)?;
        Ok(Element { bits, value: v })
    }

    pub fn element_from_bits(&self, bits: Bits) -> Result<Element, ConvexityError> {
        let value = self.decode(&bits)?;
        Ok(Element { bits, value })
    }

    /// The minimum element under the canonical (length, lex) order; used as
    /// the protocol's default value.
    pub fn min_element(&self) -> Element {
        let v = match self {
            ConvexSpace::GridInterval1D { .. } => Value::Grid(0),
            ConvexSpace::GridBox { dims } => Value::Box(vec![0; dims.len()]),
            ConvexSpace::EuclideanRational { dim } => {
                Value::point(vec![BigRational::from(BigInt::from(0)); *dim])
            }
            ConvexSpace::FiniteExplicit(_) => Value::Label(0),
            ConvexSpace::Product(factors) => {
                Value::Tuple(factors.iter().map(|f| f.min_element().value).collect())
            }
        };
        self.element(v).expect("minimum element is always valid")
    }

    /// Iterates every element of a finite space (None for infinite ones).
    pub fn enumerate(&self) -> Option<Vec<Element>> {
        match self {
            ConvexSpace::GridInterval1D { size } => Some(
                (0..*size)
                    .map(|x| self.element(Value::Grid(x)).unwrap())
                    .collect(),
            ),
            ConvexSpace::GridBox { dims } => {
                let mut out = Vec::new();
                let mut cur = vec![0u64; dims.len()];
                loop {
                    out.push(self.element(Value::Box(cur.clone())).unwrap());
                    let mut i = dims.len();
                    loop {
                        if i == 0 {
                            return Some(out);
                        }
                        i -= 1;
                        cur[i] += 1;
                        if cur[i] < dims[i] {
                            break;
                        }
                        cur[i] = 0;
                        if i == 0 {
                            return Some(out);
                        }
                    }
                }
            }
            ConvexSpace::FiniteExplicit(sp) => Some(
                (0..sp.len())
                    .map(|i| self.element(Value::Label(i)).unwrap())
                    .collect(),
            ),
            ConvexSpace::Product(factors) => {
                let per: Option<Vec<Vec<Element>>> =
                    factors.iter().map(|f| f.enumerate()).collect();
                let per = per?;
                let mut out: Vec<Vec<Value>> = vec![Vec::new()];
                for fac in &per {
                    let mut next = Vec::with_capacity(out.len() * fac.len());
                    for prefix in &out {
                        for e in fac {
                            let mut p = prefix.clone();
                            p.push(e.value.clone());
                            next.push(p);
                        }
                    }
                    out = next;
                }
                Some(
                    out.into_iter()
                        .map(|vs| self.element(Value::Tuple(vs)).unwrap())
                        .collect(),
                )
            }
            ConvexSpace::EuclideanRational { .. } => None,
        }
    }
}

trait PushValue {
    fn push_uint_value(&mut self, space: &ConvexSpace, v: &Value);
}

impl PushValue for Bits {
    /// Fixed-width encoding of a finite-space value (product components).
    fn push_uint_value(&mut self, space: &ConvexSpace, v: &Value) {
        match (space, v) {
            (ConvexSpace::GridInterval1D { size }, Value::Grid(x)) => {
                self.push_uint(*x, codec::fixed_width(*size));
            }
            (ConvexSpace::GridBox { dims }, Value::Box(xs)) => {
                for (x, d) in xs.iter().zip(dims.iter()) {
                    self.push_uint(*x, codec::fixed_width(*d));
                }
            }
            (ConvexSpace::FiniteExplicit(sp), Value::Label(i)) => {
                self.push_uint(*i as u64, codec::fixed_width(sp.len() as u64));
            }
            (ConvexSpace::Product(factors), Value::Tuple(vs)) => {
                for (f, v) in factors.iter().zip(vs.iter()) {
                    self.push_uint_value(f, v);
                }
            }
            _ => panic!("space/value mismatch in product encoding"),
        }
    }
}

/// Is `candidate` in the convex hull of `generators`?
pub fn hull_contains(
    space: &ConvexSpace,
    generators: &ValueMultiset,
    candidate: &Element,
) -> Result<bool, ConvexityError> {
    if generators.is_empty() {
        return Err(ConvexityError::EmptyGenerators);
    }
    space.check_value(candidate.value())?;
    for g in generators.items() {
        space.check_value(g.value())?;
    }
    Ok(hull_contains_unchecked(space, generators.items(), candidate.value()))
}

pub(crate) fn hull_contains_unchecked(
    space: &ConvexSpace,
    generators: &[Element],
    candidate: &Value,
) -> bool {
    match space {
        ConvexSpace::GridInterval1D { .. } => {
            let c = match candidate {
                Value::Grid(x) => *x,
                _ => unreachable!(),
            };
            let mut lo = u64::MAX;
            let mut hi = 0u64;
            for g in generators {
                if let Value::Grid(x) = g.value() {
                    lo = lo.min(*x);
                    hi = hi.max(*x);
                }
            }
            lo <= c && c <= hi
        }
        ConvexSpace::GridBox { dims } => {
            let cs = match candidate {
                Value::Box(xs) => xs,
                _ => unreachable!(),
            };
            (0..dims.len()).all(|i| {
                let (mut lo, mut hi) = (u64::MAX, 0u64);
                for g in generators {
                    if let Value::Box(xs) = g.value() {
                        lo = lo.min(xs[i]);
                        hi = hi.max(xs[i]);
                    }
                }
                lo <= cs[i] && cs[i] <= hi
            })
        }
        ConvexSpace::EuclideanRational { dim } => {
            let c = candidate.as_point().expect("checked");
            let pts: Vec<Vec<BigRational>> = generators
                .iter()
                .map(|g| g.value().as_point().expect("checked"))
                .collect();
            if *dim == 1 {
                let lo = pts.iter().map(|p| &p[0]).min().unwrap();
                let hi = pts.iter().map(|p| &p[0]).max().unwrap();
                lo <= &c[0] && &c[0] <= hi
            } else {
                let pts2: Vec<Point2> = pts
                    .into_iter()
                    .map(|p| [p[0].clone(), p[1].clone()])
                    .collect();
                rational2::in_hull(&pts2, &[c[0].clone(), c[1].clone()])
            }
        }
        ConvexSpace::FiniteExplicit(sp) => {
            let c = match candidate {
                Value::Label(i) => *i,
                _ => unreachable!(),
            };
            let mut gens = 0u64;
            for g in generators {
                if let Value::Label(i) = g.value() {
                    gens |= 1u64 << i;
                }
            }
            sp.hull_mask(gens) >> c & 1 == 1
        }
        ConvexSpace::Product(factors) => factors.iter().enumerate().all(|(i, f)| {
            let proj: Vec<Element> = generators
                .iter()
                .map(|g| match g.value() {
                    Value::Tuple(vs) => f.element(vs[i].clone()).expect("valid projection"),
                    _ => unreachable!(),
                })
                .collect();
            let cv = match candidate {
                Value::Tuple(vs) => &vs[i],
                _ => unreachable!(),
            };
            hull_contains_unchecked(f, &proj, cv)
        }),
    }
}

/// Deterministic minimum of a safe area's membership set, or None when empty.
pub fn pick_canonical(area: &SafeArea) -> Option<Element> {
    area.witness().cloned()
}

/// Helly number of a space.
pub fn helly_number(space: &ConvexSpace) -> u32 {
    match space {
        ConvexSpace::GridInterval1D { .. } | ConvexSpace::GridBox { .. } => 2,
        ConvexSpace::EuclideanRational { dim } => *dim as u32 + 1,
        ConvexSpace::FiniteExplicit(sp) => sp.helly,
        ConvexSpace::Product(factors) => {
            factors.iter().map(helly_number).max().unwrap_or(2)
        }
    }
}

/// Cartesian product of finite spaces: hulls are products of factor hulls,
/// encodings are concatenated fixed-width factor encodings, and the Helly
/// number is the maximum factor Helly number.
pub fn product_space(factors: Vec<ConvexSpace>) -> Result<ConvexSpace, ConvexityError> {
    if factors.is_empty() {
        return Err(ConvexityError::NonFiniteFactor);
    }
    if factors.iter().any(|f| !f.is_finite()) {
        return Err(ConvexityError::NonFiniteFactor);
    }
    Ok(ConvexSpace::Product(Arc::new(factors)))
}

/// A safe-area witness vertex description for R^d: d hyperplanes, each given
/// by up to d points of the original input set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HyperplaneForm {
    pub hyperplanes: Vec<Vec<Vec<BigRational>>>,
}

/// Extension encoding enc*: a leading flag bit selects between the plain
/// canonical encoding (0) and a hyperplane-intersection description (1).
pub fn dilated_encode(
    space: &ConvexSpace,
    v: &Element,
    form: Option<&HyperplaneForm>,
) -> Result<Bits, ConvexityError> {
    match (space, form) {
        (_, None) => {
            let mut out = Bits::new();
            out.push(false);
            out.extend(v.encoding());
            Ok(out)
        }
        (ConvexSpace::EuclideanRational { dim }, Some(f)) => {
            let d = *dim;
            if f.hyperplanes.len() != d {
                return Err(ConvexityError::BadHyperplaneWitness(format!(
                    "expected {d} hyperplanes, got {}",
                    f.hyperplanes.len()
                )));
            }
            for h in &f.hyperplanes {
                if h.is_empty() || h.len() > d {
                    return Err(ConvexityError::BadHyperplaneWitness(
                        "hyperplane point count out of range".into(),
                    ));
                }
                for p in h {
                    if p.len() != d {
                        return Err(ConvexityError::BadHyperplaneWitness(
                            "hyperplane point dimension mismatch".into(),
                        ));
                    }
                }
            }
            let target = v.value().as_point().expect("rational element");
            let meet = intersect_hyperplanes(d, &f.hyperplanes)?;
            if meet != target {
                return Err(ConvexityError::BadHyperplaneWitness(
                    "hyperplanes do not meet at the encoded value".into(),
                ));
            }
            let mut out = Bits::new();
            out.push(true);
            for h in &f.hyperplanes {
                out.push_uint(h.len() as u64, 2);
                for p in h {
                    // depth-1 recursion: points use the 0-flag path of enc*
                    out.push(false);
                    for c in p {
                        codec::encode_rational(c, &mut out);
                    }
                }
            }
            Ok(out)
        }
        (_, Some(_)) => Err(ConvexityError::BadHyperplaneWitness(format!(
            "space {} has dilation 1; only the plain path is allowed",
            space.kind()
        ))),
    }
}

pub fn dilated_decode(space: &ConvexSpace, bits: &Bits) -> Result<Element, ConvexityError> {
    let mut r = BitReader::new(bits);
    let flag = r
        .read()
        .ok_or_else(|| ConvexityError::Encoding("empty dilated encoding".into()))?;
    if !flag {
        let mut rest = Bits::with_capacity(bits.len() - 1);
        for i in 1..bits.len() {
            rest.push(bits.get(i));
        }
        return space.element_from_bits(rest);
    }
    let d = match space {
        ConvexSpace::EuclideanRational { dim } => *dim,
        _ => {
            return Err(ConvexityError::Encoding(
                "1-flag path on a dilation-1 space".into(),
            ))
        }
    };
    let mut hyperplanes = Vec::with_capacity(d);
    for _ in 0..d {
        let count = r
            .read_uint(2)
            .ok_or_else(|| ConvexityError::Encoding("underrun".into()))? as usize;
        if count == 0 || count > d {
            return Err(ConvexityError::BadHyperplaneWitness(
                "hyperplane point count out of range".into(),
            ));
        }
        let mut pts = Vec::with_capacity(count);
        for _ in 0..count {
            let inner = r
                .read()
                .ok_or_else(|| ConvexityError::Encoding("underrun".into()))?;
            if inner {
                // decoder enforces recursion depth 1
                return Err(ConvexityError::BadHyperplaneWitness(
                    "nested hyperplane encodings are not accepted".into(),
                ));
            }
            let mut coords = Vec::with_capacity(d);
            for _ in 0..d {
                coords.push(
                    codec::decode_rational(&mut r)
                        .ok_or_else(|| ConvexityError::Encoding("bad rational".into()))?,
                );
            }
            pts.push(coords);
        }
        hyperplanes.push(pts);
    }
    if r.remaining() != 0 {
        return Err(ConvexityError::Encoding("trailing bits".into()));
    }
    let coords = intersect_hyperplanes(d, &hyperplanes)?;
    space.element(Value::point(coords))
}

/// Meet of d hyperplanes in R^d, each described by 1..=d points. A
/// description with fewer than d points pins the meet to a point directly.
fn intersect_hyperplanes(
    d: usize,
    hyperplanes: &[Vec<Vec<BigRational>>],
) -> Result<Vec<BigRational>, ConvexityError> {
    let bad = |m: &str| ConvexityError::BadHyperplaneWitness(m.into());
    match d {
        1 => {
            let p = &hyperplanes[0];
            Ok(vec![p[0][0].clone()])
        }
        2 => {
            let to2 = |p: &Vec<BigRational>| -> Point2 { [p[0].clone(), p[1].clone()] };
            let pinned: Vec<Point2> = hyperplanes
                .iter()
                .filter(|h| h.len() == 1)
                .map(|h| to2(&h[0]))
                .collect();
            match pinned.len() {
                2 => {
                    if pinned[0] == pinned[1] {
                        Ok(pinned[0].to_vec())
                    } else {
                        Err(bad("pinned points disagree"))
                    }
                }
                1 => {
                    let p = &pinned[0];
                    let line = hyperplanes.iter().find(|h| h.len() == 2).unwrap();
                    let (a, b) = (to2(&line[0]), to2(&line[1]));
                    if rational2::orient(&a, &b, p) == std::cmp::Ordering::Equal {
                        Ok(p.to_vec())
                    } else {
                        Err(bad("line does not pass through pinned point"))
                    }
                }
                0 => {
                    let l0 = &hyperplanes[0];
                    let l1 = &hyperplanes[1];
                    let p = rational2::line_intersection(
                        &to2(&l0[0]),
                        &to2(&l0[1]),
                        &to2(&l1[0]),
                        &to2(&l1[1]),
                    )
                    .ok_or_else(|| bad("hyperplanes are parallel or degenerate"))?;
                    Ok(p.to_vec())
                }
                _ => unreachable!(),
            }
        }
        _ => Err(bad("unsupported dimension")),
    }
}

#[cfg(test)]
mod tests;
