//! Abelian semigroups `P` inside their ambient groups `G = P - P`.
//!
//! Everything in this module is exact: integer and rational coordinates,
//! canonical forms without stored zeros, and deterministic factorizations.
//! Group operations are written additively throughout, so the identity is
//! called the unit and `g = g₊ - g₋` is the positive/negative split.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;

use num_rational::Rational64;
use num_traits::{Signed, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Errors raised by semigroup algebra.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SemigroupError {
    #[error("gap set contains 0, the semigroup would not be unital")]
    NonUnitalGaps,
    #[error("malformed descriptor: {0}")]
    Malformed(String),
    #[error("incompatible coordinates: {0}")]
    Incompatible(String),
    #[error("{op} requires a lattice-ordered semigroup, but {descriptor} is not lattice ordered")]
    NotLattice { op: &'static str, descriptor: String },
    #[error("{element} is not an element of {descriptor}")]
    NotMember { element: String, descriptor: String },
    #[error("{0} is not finitely generated")]
    NotFinitelyGenerated(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("arithmetic overflow")]
    Overflow,
}

pub type Result<T> = std::result::Result<T, SemigroupError>;

/// The structural kind of an abelian semigroup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SemigroupKind {
    /// `ℕ^k` inside `ℤ^k`.
    FreeAbelian(usize),
    /// `ℕ` minus a finite gap set, inside `ℤ`.
    Numerical(BTreeSet<u64>),
    /// Non-negative rationals inside `ℚ`; stands in for `ℝ₊`.
    TotallyOrderedRationals,
    /// Direct product of the listed semigroups.
    Product(Vec<SemigroupDescriptor>),
    /// Finitely supported sequences over a base semigroup (`P^∞`).
    InfinitePower(Box<SemigroupDescriptor>),
}

/// Finitely supported map `copy index -> element`, with no unit entries stored.
///
/// Houses elements `Σ pᵢ ⊗ δᵢ` of an infinite power.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Support(BTreeMap<u64, GroupElement>);

impl Support {
    pub fn new(entries: impl IntoIterator<Item = (u64, GroupElement)>) -> Self {
        Support(entries.into_iter().filter(|(_, g)| !g.is_zero()).collect())
    }

    pub fn single(index: u64, element: GroupElement) -> Self {
        Self::new([(index, element)])
    }

    pub fn get(&self, index: u64) -> Option<&GroupElement> {
        self.0.get(&index)
    }

    pub fn iter(&self) -> impl Iterator<Item = (u64, &GroupElement)> {
        self.0.iter().map(|(k, v)| (*k, v))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn indices_with<'a>(&'a self, other: &'a Support) -> BTreeSet<u64> {
        self.0.keys().chain(other.0.keys()).copied().collect()
    }
}

/// An element of the ambient group, in the descriptor's coordinates.
///
/// The derived ordering is structural (for use as a map key), not the
/// semigroup order; use [`SemigroupDescriptor::leq`] for the latter.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum GroupElement {
    /// Integer coordinates: length `k` for `ℕ^k`, length 1 for numerical semigroups.
    Int(Vec<i64>),
    Rational(Rational64),
    Tuple(Vec<GroupElement>),
    Power(Support),
}

impl GroupElement {
    pub fn int(n: i64) -> Self {
        GroupElement::Int(vec![n])
    }

    pub fn ints(v: &[i64]) -> Self {
        GroupElement::Int(v.to_vec())
    }

    pub fn rational(numer: i64, denom: i64) -> Self {
        GroupElement::Rational(Rational64::new(numer, denom))
    }

    pub fn is_zero(&self) -> bool {
        match self {
            GroupElement::Int(v) => v.iter().all(|x| *x == 0),
            GroupElement::Rational(r) => r.is_zero(),
            GroupElement::Tuple(parts) => parts.iter().all(GroupElement::is_zero),
            GroupElement::Power(s) => s.is_empty(),
        }
    }

    fn shape_error(a: &GroupElement, b: &GroupElement) -> SemigroupError {
        SemigroupError::Incompatible(format!("cannot combine {a} with {b}"))
    }

    pub fn checked_add(&self, other: &GroupElement) -> Result<GroupElement> {
        use GroupElement::*;
        match (self, other) {
            (Int(a), Int(b)) if a.len() == b.len() => a
                .iter()
                .zip(b)
                .map(|(x, y)| x.checked_add(*y).ok_or(SemigroupError::Overflow))
                .collect::<Result<Vec<_>>>()
                .map(Int),
            (Rational(a), Rational(b)) => num_traits::CheckedAdd::checked_add(a, b)
                .map(Rational)
                .ok_or(SemigroupError::Overflow),
            (Tuple(a), Tuple(b)) if a.len() == b.len() => a
                .iter()
                .zip(b)
                .map(|(x, y)| x.checked_add(y))
                .collect::<Result<Vec<_>>>()
                .map(Tuple),
            (Power(a), Power(b)) => {
                let mut out = Vec::new();
                for i in a.indices_with(b) {
                    let sum = match (a.get(i), b.get(i)) {
                        (Some(x), Some(y)) => x.checked_add(y)?,
                        (Some(x), None) | (None, Some(x)) => x.clone(),
                        (None, None) => unreachable!(),
                    };
                    out.push((i, sum));
                }
                Ok(Power(Support::new(out)))
            }
            _ => Err(Self::shape_error(self, other)),
        }
    }

    pub fn checked_neg(&self) -> Result<GroupElement> {
        use GroupElement::*;
        match self {
            Int(a) => a
                .iter()
                .map(|x| x.checked_neg().ok_or(SemigroupError::Overflow))
                .collect::<Result<Vec<_>>>()
                .map(Int),
            Rational(r) => Ok(Rational(-r)),
            Tuple(parts) => parts
                .iter()
                .map(GroupElement::checked_neg)
                .collect::<Result<Vec<_>>>()
                .map(Tuple),
            Power(s) => s
                .iter()
                .map(|(i, g)| g.checked_neg().map(|n| (i, n)))
                .collect::<Result<Vec<_>>>()
                .map(|v| Power(Support::new(v))),
        }
    }

    pub fn checked_sub(&self, other: &GroupElement) -> Result<GroupElement> {
        self.checked_add(&other.checked_neg()?)
    }

    /// Adds `count` copies of `self`.
    pub fn checked_times(&self, count: u64) -> Result<GroupElement> {
        use GroupElement::*;
        let c = i64::try_from(count).map_err(|_| SemigroupError::Overflow)?;
        match self {
            Int(a) => a
                .iter()
                .map(|x| x.checked_mul(c).ok_or(SemigroupError::Overflow))
                .collect::<Result<Vec<_>>>()
                .map(Int),
            Rational(r) => num_traits::CheckedMul::checked_mul(r, &Rational64::from_integer(c))
                .map(Rational)
                .ok_or(SemigroupError::Overflow),
            Tuple(parts) => parts
                .iter()
                .map(|p| p.checked_times(count))
                .collect::<Result<Vec<_>>>()
                .map(Tuple),
            Power(s) => s
                .iter()
                .map(|(i, g)| g.checked_times(count).map(|n| (i, n)))
                .collect::<Result<Vec<_>>>()
                .map(|v| Power(Support::new(v))),
        }
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupElement::Int(v) if v.len() == 1 => write!(f, "{}", v[0]),
            GroupElement::Int(v) => {
                write!(f, "(")?;
                for (i, x) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            GroupElement::Rational(r) => write!(f, "{r}"),
            GroupElement::Tuple(parts) => {
                write!(f, "<")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ">")
            }
            GroupElement::Power(s) if s.is_empty() => write!(f, "0"),
            GroupElement::Power(s) => {
                for (n, (i, g)) in s.iter().enumerate() {
                    if n > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{g}⊗δ{i}")?;
                }
                Ok(())
            }
        }
    }
}

/// A factorization as a multiset of generator indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Factorization {
    terms: BTreeMap<usize, u64>,
}

impl Factorization {
    pub fn new(terms: impl IntoIterator<Item = (usize, u64)>) -> Self {
        let mut map = BTreeMap::new();
        for (g, m) in terms {
            if m > 0 {
                *map.entry(g).or_insert(0) += m;
            }
        }
        Factorization { terms: map }
    }

    pub fn terms(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.terms.iter().map(|(g, m)| (*g, *m))
    }

    pub fn multiplicity(&self, generator: usize) -> u64 {
        self.terms.get(&generator).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Reconstructs `Σ multiplicity · generator` in `d`.
    pub fn element(&self, d: &SemigroupDescriptor) -> Result<GroupElement> {
        let mut acc = d.unit();
        for (g, m) in self.terms() {
            let generator = d.generators.get(g).ok_or_else(|| {
                SemigroupError::IndexOutOfRange(format!(
                    "generator index {g} (descriptor has {})",
                    d.generators.len()
                ))
            })?;
            acc = acc.checked_add(&generator.checked_times(m)?)?;
        }
        Ok(acc)
    }
}

/// Addresses a coordinate of `ℕ^k` or of `ℕ^{k×∞}`, 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Coordinate {
    /// `e_i` in `ℕ^k`.
    Flat(usize),
    /// `e_generator ⊗ δ_copy` in the infinite power of `ℕ^k`.
    Copy { generator: usize, copy: u64 },
}

impl Coordinate {
    /// Zero-based generator index this coordinate refers to.
    pub fn generator_index(&self) -> usize {
        match self {
            Coordinate::Flat(i) => i - 1,
            Coordinate::Copy { generator, .. } => generator - 1,
        }
    }
}

impl fmt::Display for Coordinate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coordinate::Flat(i) => write!(f, "{i}"),
            Coordinate::Copy { generator, copy } => write!(f, "{generator}:{copy}"),
        }
    }
}

/// Two incomparable maximal lower bounds of a pair, proving that the pair has no meet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonLatticeWitness {
    pub pair: (GroupElement, GroupElement),
    pub maximal_lower_bounds: (GroupElement, GroupElement),
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescriptorVerdict {
    pub unital: bool,
    pub closure_samples: usize,
    pub closure_failure: Option<(GroupElement, GroupElement)>,
    pub lattice_ordered: bool,
    pub lattice_samples: usize,
    pub lattice_failure: Option<String>,
    pub non_lattice_witness: Option<NonLatticeWitness>,
}

impl DescriptorVerdict {
    pub fn is_valid(&self) -> bool {
        self.unital && self.closure_failure.is_none() && self.lattice_failure.is_none()
    }
}

/// An abelian semigroup with its ambient group and generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SemigroupDescriptor {
    kind: SemigroupKind,
    generators: Vec<GroupElement>,
    lattice_ordered: bool,
}

impl SemigroupDescriptor {
    pub fn new(kind: SemigroupKind) -> Result<Self> {
        let (generators, lattice_ordered) = match &kind {
            SemigroupKind::FreeAbelian(k) => {
                let gens = (0..*k)
                    .map(|i| {
                        let mut v = vec![0; *k];
                        v[i] = 1;
                        GroupElement::Int(v)
                    })
                    .collect();
                (gens, true)
            }
            SemigroupKind::Numerical(gaps) => {
                check_gaps(gaps)?;
                let gens = numerical_generators(gaps)
                    .into_iter()
                    .map(|g| GroupElement::int(g as i64))
                    .collect();
                (gens, gaps.is_empty())
            }
            SemigroupKind::TotallyOrderedRationals => (Vec::new(), true),
            SemigroupKind::Product(parts) => {
                if parts.is_empty() {
                    return Err(SemigroupError::Malformed("empty product".into()));
                }
                let units: Vec<_> = parts.iter().map(SemigroupDescriptor::unit).collect();
                let mut gens = Vec::new();
                for (j, part) in parts.iter().enumerate() {
                    for g in &part.generators {
                        let mut t = units.clone();
                        t[j] = g.clone();
                        gens.push(GroupElement::Tuple(t));
                    }
                }
                (gens, parts.iter().all(|p| p.lattice_ordered))
            }
            SemigroupKind::InfinitePower(base) => (Vec::new(), base.lattice_ordered),
        };
        Ok(SemigroupDescriptor {
            kind,
            generators,
            lattice_ordered,
        })
    }

    pub fn free_abelian(k: usize) -> Self {
        Self::new(SemigroupKind::FreeAbelian(k)).expect("free abelian descriptors are always valid")
    }

    pub fn numerical(gaps: impl IntoIterator<Item = u64>) -> Result<Self> {
        Self::new(SemigroupKind::Numerical(gaps.into_iter().collect()))
    }

    pub fn rationals() -> Self {
        Self::new(SemigroupKind::TotallyOrderedRationals).expect("always valid")
    }

    pub fn product(parts: Vec<SemigroupDescriptor>) -> Result<Self> {
        Self::new(SemigroupKind::Product(parts))
    }

    pub fn infinite_power(base: SemigroupDescriptor) -> Self {
        Self::new(SemigroupKind::InfinitePower(Box::new(base))).expect("always valid")
    }

    pub fn kind(&self) -> &SemigroupKind {
        &self.kind
    }

    pub fn generators(&self) -> &[GroupElement] {
        &self.generators
    }

    pub fn is_lattice_ordered(&self) -> bool {
        self.lattice_ordered
    }

    pub fn is_finitely_generated(&self) -> bool {
        match &self.kind {
            SemigroupKind::FreeAbelian(_) | SemigroupKind::Numerical(_) => true,
            SemigroupKind::TotallyOrderedRationals | SemigroupKind::InfinitePower(_) => false,
            SemigroupKind::Product(parts) => parts.iter().all(|p| p.is_finitely_generated()),
        }
    }

    /// Label used to address generator `i` in input files: the generator's value
    /// for numerical semigroups, the 1-based coordinate for `ℕ^k`, and
    /// `factor.label` for products.
    pub fn generator_label(&self, i: usize) -> Option<String> {
        match &self.kind {
            SemigroupKind::FreeAbelian(k) => (i < *k).then(|| (i + 1).to_string()),
            SemigroupKind::Numerical(_) => self.generators.get(i).map(|g| g.to_string()),
            SemigroupKind::Product(parts) => {
                let mut offset = 0;
                for (j, part) in parts.iter().enumerate() {
                    let n = part.generators.len();
                    if i < offset + n {
                        return part
                            .generator_label(i - offset)
                            .map(|l| format!("{}.{l}", j + 1));
                    }
                    offset += n;
                }
                None
            }
            _ => None,
        }
    }

    pub fn generator_index(&self, label: &str) -> Option<usize> {
        (0..self.generators.len()).find(|&i| self.generator_label(i).as_deref() == Some(label))
    }

    pub fn unit(&self) -> GroupElement {
        match &self.kind {
            SemigroupKind::FreeAbelian(k) => GroupElement::Int(vec![0; *k]),
            SemigroupKind::Numerical(_) => GroupElement::int(0),
            SemigroupKind::TotallyOrderedRationals => GroupElement::Rational(Rational64::zero()),
            SemigroupKind::Product(parts) => {
                GroupElement::Tuple(parts.iter().map(SemigroupDescriptor::unit).collect())
            }
            SemigroupKind::InfinitePower(_) => GroupElement::Power(Support::default()),
        }
    }

    /// Checks that `g` has the coordinate shape of this descriptor's group.
    pub fn check_compatible(&self, g: &GroupElement) -> Result<()> {
        let ok = match (&self.kind, g) {
            (SemigroupKind::FreeAbelian(k), GroupElement::Int(v)) => v.len() == *k,
            (SemigroupKind::Numerical(_), GroupElement::Int(v)) => v.len() == 1,
            (SemigroupKind::TotallyOrderedRationals, GroupElement::Rational(_)) => true,
            (SemigroupKind::Product(parts), GroupElement::Tuple(t)) => {
                if t.len() != parts.len() {
                    false
                } else {
                    for (p, x) in parts.iter().zip(t) {
                        p.check_compatible(x)?;
                    }
                    true
                }
            }
            (SemigroupKind::InfinitePower(base), GroupElement::Power(s)) => {
                for (i, x) in s.iter() {
                    if i == 0 {
                        return Err(SemigroupError::Incompatible(
                            "copy indices start at 1".into(),
                        ));
                    }
                    base.check_compatible(x)?;
                }
                true
            }
            _ => false,
        };
        if ok {
            Ok(())
        } else {
            Err(SemigroupError::Incompatible(format!(
                "{g} is not an element of the group of {self}"
            )))
        }
    }

    /// Membership `g ∈ P`.
    pub fn contains(&self, g: &GroupElement) -> Result<bool> {
        self.check_compatible(g)?;
        Ok(self.contains_unchecked(g))
    }

    fn contains_unchecked(&self, g: &GroupElement) -> bool {
        match (&self.kind, g) {
            (SemigroupKind::FreeAbelian(_), GroupElement::Int(v)) => v.iter().all(|x| *x >= 0),
            (SemigroupKind::Numerical(gaps), GroupElement::Int(v)) => {
                v[0] >= 0 && !gaps.contains(&(v[0] as u64))
            }
            (SemigroupKind::TotallyOrderedRationals, GroupElement::Rational(r)) => !r.is_negative(),
            (SemigroupKind::Product(parts), GroupElement::Tuple(t)) => {
                parts.iter().zip(t).all(|(p, x)| p.contains_unchecked(x))
            }
            (SemigroupKind::InfinitePower(base), GroupElement::Power(s)) => {
                s.iter().all(|(_, x)| base.contains_unchecked(x))
            }
            _ => false,
        }
    }

    /// The semigroup order: `g ≤ h` iff `h - g ∈ P`.
    pub fn leq(&self, g: &GroupElement, h: &GroupElement) -> Result<bool> {
        self.check_compatible(g)?;
        self.check_compatible(h)?;
        Ok(self.contains_unchecked(&h.checked_sub(g)?))
    }

    fn require_lattice(&self, op: &'static str) -> Result<()> {
        if self.lattice_ordered {
            Ok(())
        } else {
            Err(SemigroupError::NotLattice {
                op,
                descriptor: self.to_string(),
            })
        }
    }

    /// Returns `(g ∧ h, g ∨ h)`.
    pub fn meet_join(
        &self,
        g: &GroupElement,
        h: &GroupElement,
    ) -> Result<(GroupElement, GroupElement)> {
        self.require_lattice("meet/join")?;
        self.check_compatible(g)?;
        self.check_compatible(h)?;
        Ok(self.meet_join_unchecked(g, h))
    }

    fn meet_join_unchecked(&self, g: &GroupElement, h: &GroupElement) -> (GroupElement, GroupElement) {
        use GroupElement::*;
        match (&self.kind, g, h) {
            (_, Int(a), Int(b)) => (
                Int(a.iter().zip(b).map(|(x, y)| *x.min(y)).collect()),
                Int(a.iter().zip(b).map(|(x, y)| *x.max(y)).collect()),
            ),
            (_, Rational(a), Rational(b)) => (Rational(*a.min(b)), Rational(*a.max(b))),
            (SemigroupKind::Product(parts), Tuple(a), Tuple(b)) => {
                let (meets, joins) = parts
                    .iter()
                    .zip(a.iter().zip(b))
                    .map(|(p, (x, y))| p.meet_join_unchecked(x, y))
                    .unzip();
                (Tuple(meets), Tuple(joins))
            }
            (SemigroupKind::InfinitePower(base), Power(a), Power(b)) => {
                let unit = base.unit();
                let mut meets = Vec::new();
                let mut joins = Vec::new();
                for i in a.indices_with(b) {
                    let x = a.get(i).unwrap_or(&unit);
                    let y = b.get(i).unwrap_or(&unit);
                    let (m, j) = base.meet_join_unchecked(x, y);
                    meets.push((i, m));
                    joins.push((i, j));
                }
                (Power(Support::new(meets)), Power(Support::new(joins)))
            }
            _ => unreachable!("shapes are checked before dispatch"),
        }
    }

    /// Returns `(g₊, g₋)` with `g = g₊ - g₋` and `g₊ ∧ g₋ = unit`.
    pub fn pos_neg_parts(&self, g: &GroupElement) -> Result<(GroupElement, GroupElement)> {
        self.require_lattice("positive/negative parts")?;
        self.check_compatible(g)?;
        let unit = self.unit();
        let (meet, join) = self.meet_join_unchecked(g, &unit);
        Ok((join, meet.checked_neg()?))
    }

    /// Deterministic factorization of `p` into generators.
    ///
    /// Numerical semigroups use smallest-generator-first with backtracking:
    /// take as many copies of the smallest generator as possible, recurse on the
    /// remainder, and back off one copy at a time on failure.
    pub fn factorize(&self, p: &GroupElement) -> Result<Factorization> {
        if !self.is_finitely_generated() {
            return Err(SemigroupError::NotFinitelyGenerated(self.to_string()));
        }
        if !self.contains(p)? {
            return Err(SemigroupError::NotMember {
                element: p.to_string(),
                descriptor: self.to_string(),
            });
        }
        Ok(self.factorize_member(p))
    }

    fn factorize_member(&self, p: &GroupElement) -> Factorization {
        match (&self.kind, p) {
            (SemigroupKind::FreeAbelian(_), GroupElement::Int(v)) => {
                Factorization::new(v.iter().enumerate().map(|(i, m)| (i, *m as u64)))
            }
            (SemigroupKind::Numerical(_), GroupElement::Int(v)) => {
                let gens: Vec<u64> = self
                    .generators
                    .iter()
                    .map(|g| match g {
                        GroupElement::Int(x) => x[0] as u64,
                        _ => unreachable!(),
                    })
                    .collect();
                let counts = factor_numerical(&gens, v[0] as u64)
                    .expect("members of a numerical semigroup always factor");
                Factorization::new(counts.into_iter().enumerate())
            }
            (SemigroupKind::Product(parts), GroupElement::Tuple(t)) => {
                let mut offset = 0;
                let mut terms = Vec::new();
                for (part, x) in parts.iter().zip(t) {
                    terms.extend(part.factorize_member(x).terms().map(|(g, m)| (g + offset, m)));
                    offset += part.generators.len();
                }
                Factorization::new(terms)
            }
            _ => unreachable!("only called on finitely generated kinds"),
        }
    }

    /// The indicator element `e_V`.
    pub fn indicator(&self, v: &BTreeSet<Coordinate>) -> Result<GroupElement> {
        match &self.kind {
            SemigroupKind::FreeAbelian(k) => {
                let mut coords = vec![0; *k];
                for c in v {
                    match c {
                        Coordinate::Flat(i) if (1..=*k).contains(i) => coords[i - 1] = 1,
                        other => {
                            return Err(SemigroupError::IndexOutOfRange(format!(
                                "coordinate {other} in ℕ^{k}"
                            )))
                        }
                    }
                }
                Ok(GroupElement::Int(coords))
            }
            SemigroupKind::InfinitePower(base) => {
                let SemigroupKind::FreeAbelian(k) = base.kind else {
                    return Err(SemigroupError::Malformed(format!(
                        "indicators need ℕ^k or its infinite power, got {self}"
                    )));
                };
                let mut per_copy: BTreeMap<u64, Vec<i64>> = BTreeMap::new();
                for c in v {
                    match c {
                        Coordinate::Copy { generator, copy }
                            if (1..=k).contains(generator) && *copy >= 1 =>
                        {
                            per_copy.entry(*copy).or_insert_with(|| vec![0; k])[generator - 1] = 1;
                        }
                        other => {
                            return Err(SemigroupError::IndexOutOfRange(format!(
                                "coordinate {other} in ℕ^({k}×∞)"
                            )))
                        }
                    }
                }
                Ok(GroupElement::Power(Support::new(
                    per_copy.into_iter().map(|(i, c)| (i, GroupElement::Int(c))),
                )))
            }
            _ => Err(SemigroupError::Malformed(format!(
                "indicators need ℕ^k or its infinite power, got {self}"
            ))),
        }
    }

    /// A random element of the ambient group, from a small window.
    pub fn sample_element<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupElement {
        match &self.kind {
            SemigroupKind::FreeAbelian(k) => {
                GroupElement::Int((0..*k).map(|_| rng.random_range(-6..=6)).collect())
            }
            SemigroupKind::Numerical(_) => GroupElement::int(rng.random_range(-12..=30)),
            SemigroupKind::TotallyOrderedRationals => {
                GroupElement::rational(rng.random_range(-24..=24), rng.random_range(1..=8))
            }
            SemigroupKind::Product(parts) => {
                GroupElement::Tuple(parts.iter().map(|p| p.sample_element(rng)).collect())
            }
            SemigroupKind::InfinitePower(base) => {
                let n = rng.random_range(0..=3);
                GroupElement::Power(Support::new(
                    (0..n).map(|_| (rng.random_range(1..=5), base.sample_element(rng))),
                ))
            }
        }
    }

    /// A random element of `P`, from a small window.
    pub fn sample_positive<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupElement {
        match &self.kind {
            SemigroupKind::FreeAbelian(k) => {
                GroupElement::Int((0..*k).map(|_| rng.random_range(0..=6)).collect())
            }
            SemigroupKind::Numerical(gaps) => loop {
                let n: u64 = rng.random_range(0..=30);
                if !gaps.contains(&n) {
                    break GroupElement::int(n as i64);
                }
            },
            SemigroupKind::TotallyOrderedRationals => {
                GroupElement::rational(rng.random_range(0..=24), rng.random_range(1..=8))
            }
            SemigroupKind::Product(parts) => {
                GroupElement::Tuple(parts.iter().map(|p| p.sample_positive(rng)).collect())
            }
            SemigroupKind::InfinitePower(base) => {
                let n = rng.random_range(0..=3);
                GroupElement::Power(Support::new(
                    (0..n).map(|_| (rng.random_range(1..=5), base.sample_positive(rng))),
                ))
            }
        }
    }

    /// Searches for a pair without a meet. Only numerical semigroups with gaps
    /// (and products or powers containing one) fail to be lattice ordered.
    pub fn non_lattice_witness(&self) -> Option<NonLatticeWitness> {
        match &self.kind {
            SemigroupKind::Numerical(gaps) if !gaps.is_empty() => {
                let frobenius = *gaps.iter().next_back().unwrap() as i64;
                let gens: Vec<i64> = self
                    .generators
                    .iter()
                    .map(|g| match g {
                        GroupElement::Int(v) => v[0],
                        _ => unreachable!(),
                    })
                    .collect();
                let window = 2 * (frobenius + gens[0]) + 2;
                let mut pairs: Vec<(i64, i64)> = Vec::new();
                for (i, a) in gens.iter().enumerate() {
                    for b in &gens[i + 1..] {
                        pairs.push((*a, *b));
                    }
                }
                for a in 0..=frobenius + gens[0] {
                    for b in a + 1..=frobenius + gens[0] {
                        pairs.push((a, b));
                    }
                }
                pairs.into_iter().find_map(|(a, b)| {
                    let bounds = numerical_maximal_lower_bounds(gaps, a, b, window);
                    (bounds.len() >= 2).then(|| NonLatticeWitness {
                        pair: (GroupElement::int(a), GroupElement::int(b)),
                        maximal_lower_bounds: (
                            GroupElement::int(bounds[0]),
                            GroupElement::int(bounds[1]),
                        ),
                    })
                })
            }
            SemigroupKind::Product(parts) => {
                let units: Vec<_> = parts.iter().map(SemigroupDescriptor::unit).collect();
                parts.iter().enumerate().find_map(|(j, p)| {
                    let w = p.non_lattice_witness()?;
                    let embed = |x: GroupElement| {
                        let mut t = units.clone();
                        t[j] = x;
                        GroupElement::Tuple(t)
                    };
                    Some(NonLatticeWitness {
                        pair: (embed(w.pair.0), embed(w.pair.1)),
                        maximal_lower_bounds: (
                            embed(w.maximal_lower_bounds.0),
                            embed(w.maximal_lower_bounds.1),
                        ),
                    })
                })
            }
            SemigroupKind::InfinitePower(base) => {
                let w = base.non_lattice_witness()?;
                let embed = |x: GroupElement| GroupElement::Power(Support::single(1, x));
                Some(NonLatticeWitness {
                    pair: (embed(w.pair.0), embed(w.pair.1)),
                    maximal_lower_bounds: (
                        embed(w.maximal_lower_bounds.0),
                        embed(w.maximal_lower_bounds.1),
                    ),
                })
            }
            _ => None,
        }
    }
}

impl fmt::Display for SemigroupDescriptor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SemigroupKind::FreeAbelian(k) => write!(f, "ℕ^{k}"),
            SemigroupKind::Numerical(gaps) if gaps.is_empty() => write!(f, "ℕ"),
            SemigroupKind::Numerical(gaps) => {
                write!(f, "ℕ\\{{")?;
                for (i, g) in gaps.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{g}")?;
                }
                write!(f, "}}")
            }
            SemigroupKind::TotallyOrderedRationals => write!(f, "ℚ₊"),
            SemigroupKind::Product(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, "×")?;
                    }
                    write!(f, "({p})")?;
                }
                Ok(())
            }
            SemigroupKind::InfinitePower(base) => write!(f, "({base})^∞"),
        }
    }
}

/// Checks the descriptor on a seeded sample of `sample_budget` pairs/triples.
pub fn validate_descriptor(
    d: &SemigroupDescriptor,
    sample_budget: usize,
    seed: u64,
) -> Result<DescriptorVerdict> {
    if let SemigroupKind::Numerical(gaps) = &d.kind {
        check_gaps(gaps)?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = d.unit();
    let mut unital = d.contains(&unit)?;
    let mut closure_failure = None;
    for _ in 0..sample_budget {
        let a = d.sample_positive(&mut rng);
        let b = d.sample_positive(&mut rng);
        if a.checked_add(&unit)? != a {
            unital = false;
        }
        if closure_failure.is_none() && !d.contains(&a.checked_add(&b)?)? {
            closure_failure = Some((a, b));
        }
    }

    let mut lattice_failure = None;
    let mut lattice_samples = 0;
    let mut non_lattice_witness = None;
    if d.lattice_ordered {
        for _ in 0..sample_budget {
            let g = d.sample_element(&mut rng);
            let h = d.sample_element(&mut rng);
            let k = d.sample_element(&mut rng);
            lattice_samples += 1;
            if let Some(msg) = lattice_axiom_violation(d, &g, &h, &k)? {
                lattice_failure = Some(msg);
                break;
            }
        }
    } else {
        non_lattice_witness = d.non_lattice_witness();
    }

    Ok(DescriptorVerdict {
        unital,
        closure_samples: sample_budget,
        closure_failure,
        lattice_ordered: d.lattice_ordered,
        lattice_samples,
        lattice_failure,
        non_lattice_witness,
    })
}

fn lattice_axiom_violation(
    d: &SemigroupDescriptor,
    g: &GroupElement,
    h: &GroupElement,
    k: &GroupElement,
) -> Result<Option<String>> {
    let (gh_meet, gh_join) = d.meet_join(g, h)?;
    let (hg_meet, hg_join) = d.meet_join(h, g)?;
    if gh_meet != hg_meet || gh_join != hg_join {
        return Ok(Some(format!("commutativity fails for {g}, {h}")));
    }
    let (hk_meet, hk_join) = d.meet_join(h, k)?;
    if d.meet_join(&gh_meet, k)?.0 != d.meet_join(g, &hk_meet)?.0
        || d.meet_join(&gh_join, k)?.1 != d.meet_join(g, &hk_join)?.1
    {
        return Ok(Some(format!("associativity fails for {g}, {h}, {k}")));
    }
    if d.meet_join(g, &gh_join)?.0 != *g || d.meet_join(g, &gh_meet)?.1 != *g {
        return Ok(Some(format!("absorption fails for {g}, {h}")));
    }
    if !(d.leq(&gh_meet, g)? && d.leq(&gh_meet, h)? && d.leq(g, &gh_join)? && d.leq(h, &gh_join)?)
    {
        return Ok(Some(format!("bounds fail for {g}, {h}")));
    }
    // k as a comparator: any common lower bound lies below the meet.
    if d.leq(k, g)? && d.leq(k, h)? && !d.leq(k, &gh_meet)? {
        return Ok(Some(format!("{k} is a lower bound of {g}, {h} above the meet")));
    }
    let (pos, neg) = d.pos_neg_parts(g)?;
    if pos.checked_sub(&neg)? != *g || !d.meet_join(&pos, &neg)?.0.is_zero() {
        return Ok(Some(format!("positive/negative parts of {g} are inconsistent")));
    }
    Ok(None)
}

fn check_gaps(gaps: &BTreeSet<u64>) -> Result<()> {
    if gaps.contains(&0) {
        return Err(SemigroupError::NonUnitalGaps);
    }
    let Some(&frobenius) = gaps.iter().next_back() else {
        return Ok(());
    };
    for a in 1..=frobenius {
        if gaps.contains(&a) {
            continue;
        }
        for b in a..=frobenius - a {
            if !gaps.contains(&b) && gaps.contains(&(a + b)) {
                return Err(SemigroupError::Malformed(format!(
                    "complement of the gap set is not closed: {a} + {b} = {} is a gap",
                    a + b
                )));
            }
        }
    }
    Ok(())
}

/// Minimal generators of `ℕ \ gaps`: non-gaps that are not a sum of two
/// non-zero non-gaps. All of them lie below `frobenius + multiplicity`.
fn numerical_generators(gaps: &BTreeSet<u64>) -> Vec<u64> {
    let Some(&frobenius) = gaps.iter().next_back() else {
        return vec![1];
    };
    let multiplicity = (1..).find(|n| !gaps.contains(n)).unwrap();
    let member = |n: u64| !gaps.contains(&n);
    (1..=frobenius + multiplicity)
        .filter(|&n| member(n))
        .filter(|&n| !(1..n).any(|a| member(a) && member(n - a)))
        .collect()
}

fn factor_numerical(gens: &[u64], target: u64) -> Option<Vec<u64>> {
    fn go(
        gens: &[u64],
        idx: usize,
        rem: u64,
        counts: &mut [u64],
        dead: &mut HashSet<(usize, u64)>,
    ) -> bool {
        if rem == 0 {
            return true;
        }
        if idx == gens.len() || dead.contains(&(idx, rem)) {
            return false;
        }
        let g = gens[idx];
        for c in (0..=rem / g).rev() {
            counts[idx] = c;
            if go(gens, idx + 1, rem - c * g, counts, dead) {
                return true;
            }
        }
        counts[idx] = 0;
        dead.insert((idx, rem));
        false
    }
    let mut counts = vec![0; gens.len()];
    go(gens, 0, target, &mut counts, &mut HashSet::new()).then_some(counts)
}

/// Maximal lower bounds of `{a, b}` in `ℤ` ordered by `ℕ \ gaps`, searched in
/// `[min(a,b) - window, min(a,b)]`, in descending order.
fn numerical_maximal_lower_bounds(gaps: &BTreeSet<u64>, a: i64, b: i64, window: i64) -> Vec<i64> {
    let member = |n: i64| n >= 0 && !gaps.contains(&(n as u64));
    let top = a.min(b);
    let bounds: Vec<i64> = (top - window..=top)
        .filter(|&x| member(a - x) && member(b - x))
        .collect();
    let mut maximal: Vec<i64> = bounds
        .iter()
        .copied()
        .filter(|&x| !bounds.iter().any(|&y| y != x && member(y - x)))
        .collect();
    maximal.sort_unstable_by(|x, y| y.cmp(x));
    maximal
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn neil() -> SemigroupDescriptor {
        SemigroupDescriptor::numerical([1]).unwrap()
    }

    #[test]
    fn neil_generators_are_two_and_three() {
        assert_eq!(neil().generators(), &[GroupElement::int(2), GroupElement::int(3)]);
        let d = SemigroupDescriptor::numerical([1, 2, 3, 5, 6, 9]).unwrap();
        let gens: Vec<_> = d.generators().iter().map(|g| g.to_string()).collect();
        assert_eq!(gens, ["4", "7", "10", "13"]);
    }

    #[test]
    fn zero_gap_is_rejected() {
        assert_eq!(
            SemigroupDescriptor::numerical([0, 1]).unwrap_err(),
            SemigroupError::NonUnitalGaps
        );
        assert!(matches!(
            SemigroupDescriptor::numerical([2]),
            Err(SemigroupError::Malformed(_))
        ));
    }

    #[test]
    fn membership_examples() {
        let d = neil();
        assert!(!d.contains(&GroupElement::int(1)).unwrap());
        assert!(d.contains(&GroupElement::int(7)).unwrap());
        assert!(!d.contains(&GroupElement::int(-2)).unwrap());
        let z2 = SemigroupDescriptor::free_abelian(2);
        assert!(z2.contains(&GroupElement::ints(&[0, 0])).unwrap());
        assert!(matches!(
            z2.contains(&GroupElement::int(1)),
            Err(SemigroupError::Incompatible(_))
        ));
    }

    #[test]
    fn seven_is_a_sum_of_generators_by_brute_force() {
        let found = (0..=3).any(|i| (0..=2).any(|j| 2 * i + 3 * j == 7));
        assert!(found);
    }

    #[test]
    fn meet_join_examples() {
        let z2 = SemigroupDescriptor::free_abelian(2);
        let (m, j) = z2
            .meet_join(&GroupElement::ints(&[2, 1]), &GroupElement::ints(&[1, 3]))
            .unwrap();
        assert_eq!((m, j), (GroupElement::ints(&[1, 1]), GroupElement::ints(&[2, 3])));

        let q = SemigroupDescriptor::rationals();
        let (m, j) = q
            .meet_join(&GroupElement::rational(1, 2), &GroupElement::rational(3, 1))
            .unwrap();
        assert_eq!((m, j), (GroupElement::rational(1, 2), GroupElement::rational(3, 1)));

        let pinf = SemigroupDescriptor::infinite_power(SemigroupDescriptor::numerical([]).unwrap());
        let a = GroupElement::Power(Support::single(1, GroupElement::int(2)));
        let b = GroupElement::Power(Support::single(2, GroupElement::int(3)));
        let (m, j) = pinf.meet_join(&a, &b).unwrap();
        assert_eq!(m, pinf.unit());
        assert_eq!(
            j,
            GroupElement::Power(Support::new([(1, GroupElement::int(2)), (2, GroupElement::int(3))]))
        );
    }

    #[test]
    fn lattice_ops_reject_numerical_with_gaps() {
        let d = neil();
        assert!(matches!(
            d.meet_join(&GroupElement::int(2), &GroupElement::int(3)),
            Err(SemigroupError::NotLattice { .. })
        ));
        assert!(matches!(
            d.pos_neg_parts(&GroupElement::int(2)),
            Err(SemigroupError::NotLattice { .. })
        ));
    }

    #[test]
    fn positive_negative_examples() {
        let z2 = SemigroupDescriptor::free_abelian(2);
        assert_eq!(
            z2.pos_neg_parts(&GroupElement::ints(&[2, -3])).unwrap(),
            (GroupElement::ints(&[2, 0]), GroupElement::ints(&[0, 3]))
        );
        assert_eq!(
            z2.pos_neg_parts(&GroupElement::ints(&[4, 1])).unwrap(),
            (GroupElement::ints(&[4, 1]), z2.unit())
        );
        let q = SemigroupDescriptor::rationals();
        assert_eq!(
            q.pos_neg_parts(&GroupElement::rational(-5, 2)).unwrap(),
            (q.unit(), GroupElement::rational(5, 2))
        );
    }

    #[test]
    fn factorize_examples() {
        let d = neil();
        let f7 = d.factorize(&GroupElement::int(7)).unwrap();
        assert_eq!(f7, Factorization::new([(0, 2), (1, 1)]));
        let f6 = d.factorize(&GroupElement::int(6)).unwrap();
        assert_eq!(f6, Factorization::new([(0, 3)]));
        let z2 = SemigroupDescriptor::free_abelian(2);
        assert_eq!(
            z2.factorize(&GroupElement::ints(&[1, 2])).unwrap(),
            Factorization::new([(0, 1), (1, 2)])
        );
        assert!(matches!(
            d.factorize(&GroupElement::int(1)),
            Err(SemigroupError::NotMember { .. })
        ));
        assert!(matches!(
            SemigroupDescriptor::rationals().factorize(&GroupElement::rational(1, 2)),
            Err(SemigroupError::NotFinitelyGenerated(_))
        ));
    }

    /// Brute force over multiplicity vectors; the policy prefers the most
    /// copies of the smallest generator.
    fn brute_force_policy(gens: &[u64], n: u64) -> Option<Vec<u64>> {
        let mut best: Option<Vec<u64>> = None;
        fn rec(gens: &[u64], idx: usize, rem: u64, cur: &mut Vec<u64>, best: &mut Option<Vec<u64>>) {
            if idx == gens.len() {
                if rem == 0 && best.as_ref().is_none_or(|b| **cur > **b) {
                    *best = Some(cur.clone());
                }
                return;
            }
            for c in 0..=rem / gens[idx] {
                cur.push(c);
                rec(gens, idx + 1, rem - c * gens[idx], cur, best);
                cur.pop();
            }
        }
        rec(gens, 0, n, &mut Vec::new(), &mut best);
        best
    }

    #[test]
    fn factorization_matches_brute_force_and_membership() {
        for gaps in [vec![1], vec![1, 2, 3, 5, 6, 9], vec![1, 2, 4, 5, 7, 8, 11]] {
            let d = SemigroupDescriptor::numerical(gaps).unwrap();
            let gens: Vec<u64> = d.generators().iter().map(|g| g.to_string().parse().unwrap()).collect();
            for n in 0..=50i64 {
                let p = GroupElement::int(n);
                let member = d.contains(&p).unwrap();
                let f = d.factorize(&p);
                assert_eq!(member, f.is_ok(), "n = {n}");
                if let Ok(f) = f {
                    assert_eq!(f.element(&d).unwrap(), p);
                    let counts: Vec<u64> = (0..gens.len()).map(|i| f.multiplicity(i)).collect();
                    assert_eq!(Some(counts), brute_force_policy(&gens, n as u64), "n = {n}");
                }
            }
        }
    }

    #[test]
    fn indicator_examples() {
        let n5 = SemigroupDescriptor::free_abelian(5);
        let v: BTreeSet<_> = [Coordinate::Flat(1), Coordinate::Flat(3)].into();
        assert_eq!(n5.indicator(&v).unwrap(), GroupElement::ints(&[1, 0, 1, 0, 0]));
        assert_eq!(n5.indicator(&BTreeSet::new()).unwrap(), n5.unit());
        assert!(n5.indicator(&[Coordinate::Flat(6)].into()).is_err());

        let pinf = SemigroupDescriptor::infinite_power(SemigroupDescriptor::free_abelian(2));
        let e = pinf
            .indicator(&[Coordinate::Copy { generator: 1, copy: 2 }].into())
            .unwrap();
        assert_eq!(
            e,
            GroupElement::Power(Support::single(2, GroupElement::ints(&[1, 0])))
        );
    }

    #[test]
    fn validate_examples() {
        let v = validate_descriptor(&SemigroupDescriptor::free_abelian(2), 200, 1).unwrap();
        assert!(v.is_valid() && v.lattice_ordered);

        let v = validate_descriptor(&SemigroupDescriptor::rationals(), 200, 1).unwrap();
        assert!(v.is_valid() && v.lattice_ordered);

        let v = validate_descriptor(&neil(), 200, 1).unwrap();
        assert!(v.is_valid() && !v.lattice_ordered);
        let w = v.non_lattice_witness.unwrap();
        assert_eq!(w.pair, (GroupElement::int(2), GroupElement::int(3)));
        assert_eq!(w.maximal_lower_bounds, (GroupElement::int(0), GroupElement::int(-1)));
    }

    /// Independent enumeration in the window [-20, 3].
    #[test]
    fn neil_lower_bounds_of_two_and_three_by_enumeration() {
        let member = |n: i64| n == 0 || n >= 2;
        let lower: Vec<i64> = (-20..=3).filter(|x| member(2 - x) && member(3 - x)).collect();
        let maximal: Vec<i64> = lower
            .iter()
            .copied()
            .filter(|&x| !lower.iter().any(|&y| y != x && member(y - x)))
            .collect();
        assert_eq!(maximal, [-1, 0]);
        assert!(!member(1) && !member(-1));
    }

    #[test]
    fn product_and_power_validate() {
        let d = SemigroupDescriptor::product(vec![
            SemigroupDescriptor::free_abelian(1),
            SemigroupDescriptor::rationals(),
        ])
        .unwrap();
        let v = validate_descriptor(&d, 200, 3).unwrap();
        assert!(v.is_valid() && v.lattice_ordered);

        let d = SemigroupDescriptor::product(vec![SemigroupDescriptor::free_abelian(1), neil()]).unwrap();
        assert_eq!(d.generator_label(2).as_deref(), Some("2.3"));
        assert_eq!(d.generator_index("1.1"), Some(0));
        let v = validate_descriptor(&d, 100, 3).unwrap();
        assert!(!v.lattice_ordered && v.non_lattice_witness.is_some());

        let d = SemigroupDescriptor::infinite_power(SemigroupDescriptor::free_abelian(2));
        let v = validate_descriptor(&d, 200, 3).unwrap();
        assert!(v.is_valid() && v.lattice_ordered);
    }

    fn z3_element() -> impl Strategy<Value = GroupElement> {
        prop::collection::vec(-20i64..20, 3).prop_map(GroupElement::Int)
    }

    fn power_element() -> impl Strategy<Value = GroupElement> {
        prop::collection::btree_map(1u64..6, -9i64..9, 0..4).prop_map(|m| {
            GroupElement::Power(Support::new(m.into_iter().map(|(i, v)| (i, GroupElement::int(v)))))
        })
    }

    proptest! {
        #[test]
        fn pos_neg_reconstructs(g in z3_element()) {
            let d = SemigroupDescriptor::free_abelian(3);
            let (p, n) = d.pos_neg_parts(&g).unwrap();
            prop_assert_eq!(p.checked_sub(&n).unwrap(), g);
            prop_assert!(d.contains(&p).unwrap() && d.contains(&n).unwrap());
            prop_assert!(d.meet_join(&p, &n).unwrap().0.is_zero());
        }

        #[test]
        fn meet_is_greatest_lower_bound(g in z3_element(), h in z3_element(), x in z3_element()) {
            let d = SemigroupDescriptor::free_abelian(3);
            let (m, j) = d.meet_join(&g, &h).unwrap();
            prop_assert!(d.leq(&m, &g).unwrap() && d.leq(&m, &h).unwrap());
            prop_assert!(d.leq(&g, &j).unwrap() && d.leq(&h, &j).unwrap());
            if d.leq(&x, &g).unwrap() && d.leq(&x, &h).unwrap() {
                prop_assert!(d.leq(&x, &m).unwrap());
            }
            if d.leq(&g, &x).unwrap() && d.leq(&h, &x).unwrap() {
                prop_assert!(d.leq(&j, &x).unwrap());
            }
        }

        #[test]
        fn power_meet_join_is_componentwise(a in power_element(), b in power_element()) {
            let base = SemigroupDescriptor::numerical([]).unwrap();
            let d = SemigroupDescriptor::infinite_power(base.clone());
            let (m, j) = d.meet_join(&a, &b).unwrap();
            let (GroupElement::Power(sa), GroupElement::Power(sb), GroupElement::Power(sm), GroupElement::Power(sj)) = (&a, &b, &m, &j) else { unreachable!() };
            for i in 1..6 {
                let zero = base.unit();
                let x = sa.get(i).unwrap_or(&zero);
                let y = sb.get(i).unwrap_or(&zero);
                let (bm, bj) = base.meet_join(x, y).unwrap();
                prop_assert_eq!(sm.get(i).unwrap_or(&zero), &bm);
                prop_assert_eq!(sj.get(i).unwrap_or(&zero), &bj);
            }
            let (p, n) = d.pos_neg_parts(&a).unwrap();
            prop_assert_eq!(p.checked_sub(&n).unwrap(), a);
        }

        #[test]
        fn disjoint_indicators_add(bits in prop::collection::vec(0u8..3, 6)) {
            let d = SemigroupDescriptor::free_abelian(6);
            let v: BTreeSet<_> = (0..6).filter(|i| bits[*i] == 1).map(|i| Coordinate::Flat(i + 1)).collect();
            let w: BTreeSet<_> = (0..6).filter(|i| bits[*i] == 2).map(|i| Coordinate::Flat(i + 1)).collect();
            let union: BTreeSet<_> = v.union(&w).copied().collect();
            prop_assert_eq!(
                d.indicator(&v).unwrap().checked_add(&d.indicator(&w).unwrap()).unwrap(),
                d.indicator(&union).unwrap()
            );
        }
    }
}
