//! Finite multisets over totally ordered elements.
//!
//! A [`Multiset`] maps each element to a positive multiplicity; elements with
//! a zero count are never stored. Because the backing map is ordered, every
//! multiset has a single canonical form, so equality, ordering and hashing are
//! all structural.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

/// Default bound on the number of sub-multisets [`Multiset::power_multiset`]
/// is willing to enumerate.
pub const DEFAULT_POWER_CAP: u64 = 1 << 20;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MultisetError {
    #[error("power multiset would contain {required} sub-multisets, cap is {cap}")]
    CapExceeded { required: u128, cap: u64 },
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Multiset<T: Ord> {
    entries: BTreeMap<T, u64>,
}

impl<T: Ord> Default for Multiset<T> {
    fn default() -> Self {
        Self {
            entries: BTreeMap::new(),
        }
    }
}

impl<T: Ord + fmt::Debug> fmt::Debug for Multiset<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_map().entries(self.entries.iter()).finish()
    }
}

/// Canonical text form: `element:count` pairs in element order, comma separated.
impl<T: Ord + fmt::Display> fmt::Display for Multiset<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, n)) in self.entries.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}:{n}")?;
        }
        Ok(())
    }
}

impl<T: Ord> FromIterator<T> for Multiset<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut m = Multiset::new();
        for x in iter {
            m.insert(x, 1);
        }
        m
    }
}

impl<T: Ord> FromIterator<(T, u64)> for Multiset<T> {
    fn from_iter<I: IntoIterator<Item = (T, u64)>>(iter: I) -> Self {
        let mut m = Multiset::new();
        for (x, n) in iter {
            m.insert(x, n);
        }
        m
    }
}

impl<T: Ord> Multiset<T> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds `n` copies of `x`. Adding zero copies is a no-op.
    pub fn insert(&mut self, x: T, n: u64) {
        if n > 0 {
            *self.entries.entry(x).or_insert(0) += n;
        }
    }

    /// Removes up to `n` copies of `x`, returning how many were removed.
    pub fn remove(&mut self, x: &T, n: u64) -> u64 {
        let Some(count) = self.entries.get_mut(x) else {
            return 0;
        };
        let removed = n.min(*count);
        *count -= removed;
        if *count == 0 {
            self.entries.remove(x);
        }
        removed
    }

    pub fn count(&self, x: &T) -> u64 {
        self.entries.get(x).copied().unwrap_or(0)
    }

    pub fn contains(&self, x: &T) -> bool {
        self.entries.contains_key(x)
    }

    /// `|M|`: the sum of all multiplicities.
    pub fn size(&self) -> u64 {
        self.entries.values().sum()
    }

    /// Number of distinct elements.
    pub fn distinct(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Iterates `(element, multiplicity)` pairs in canonical order.
    pub fn iter(&self) -> impl Iterator<Item = (&T, u64)> + '_ {
        self.entries.iter().map(|(x, &n)| (x, n))
    }

    /// Iterates the distinct elements in canonical order.
    pub fn elements(&self) -> impl Iterator<Item = &T> + '_ {
        self.entries.keys()
    }

    /// `a ⊆ b`: every element of `self` occurs in `other` at least as often.
    pub fn is_subset(&self, other: &Self) -> bool {
        self.entries.len() <= other.entries.len()
            && self.entries.iter().all(|(x, &n)| other.count(x) >= n)
    }

    /// Sub-multiset that is not equal.
    pub fn is_proper_subset(&self, other: &Self) -> bool {
        self.size() < other.size() && self.is_subset(other)
    }

    /// Equality defined as mutual inclusion; agrees with `==`.
    pub fn is_equal(&self, other: &Self) -> bool {
        self.is_subset(other) && other.is_subset(self)
    }

    /// True when the two multisets share at least one element.
    pub fn intersects(&self, other: &Self) -> bool {
        let (small, large) = if self.entries.len() <= other.entries.len() {
            (self, other)
        } else {
            (other, self)
        };
        small.entries.keys().any(|x| large.entries.contains_key(x))
    }
}

impl<T: Ord + Clone> Multiset<T> {
    /// `a ⊎ b`: multiplicities add.
    pub fn join(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (x, &n) in &other.entries {
            out.insert(x.clone(), n);
        }
        out
    }

    /// `a ∩ b`: elementwise minimum over the common elements.
    pub fn intersection(&self, other: &Self) -> Self {
        self.entries
            .iter()
            .filter_map(|(x, &n)| {
                let m = other.count(x);
                (m > 0).then(|| (x.clone(), n.min(m)))
            })
            .collect()
    }

    /// `a \ b`: multiplicities subtract, saturating at zero.
    pub fn difference(&self, other: &Self) -> Self {
        self.entries
            .iter()
            .filter_map(|(x, &n)| {
                let left = n.saturating_sub(other.count(x));
                (left > 0).then(|| (x.clone(), left))
            })
            .collect()
    }

    /// `M × W`: each pair `(x, w)` carries the multiplicity of `x`.
    pub fn cartesian<W: Ord + Clone>(&self, range: &BTreeSet<W>) -> Multiset<(T, W)> {
        let mut out = Multiset::new();
        for (x, &n) in &self.entries {
            for w in range {
                out.insert((x.clone(), w.clone()), n);
            }
        }
        out
    }

    /// Number of sub-multisets: `Π (multiplicity + 1)`.
    pub fn power_count(&self) -> u128 {
        self.entries
            .values()
            .fold(1u128, |acc, &n| acc.saturating_mul(n as u128 + 1))
    }

    /// Enumerates every sub-multiset exactly once, the empty one first.
    pub fn power_multiset(&self, cap: u64) -> Result<PowerMultiset<'_, T>, MultisetError> {
        let required = self.power_count();
        if required > cap as u128 {
            return Err(MultisetError::CapExceeded { required, cap });
        }
        Ok(PowerMultiset {
            base: self.entries.iter().map(|(x, &n)| (x, n)).collect(),
            counter: vec![0; self.entries.len()],
            done: false,
        })
    }
}

/// Mixed-radix enumeration of sub-multisets; digit `i` ranges over
/// `0..=multiplicity_i`.
pub struct PowerMultiset<'a, T: Ord> {
    base: Vec<(&'a T, u64)>,
    counter: Vec<u64>,
    done: bool,
}

impl<T: Ord + Clone> Iterator for PowerMultiset<'_, T> {
    type Item = Multiset<T>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let current: Multiset<T> = self
            .base
            .iter()
            .zip(&self.counter)
            .map(|(&(x, _), &k)| (x.clone(), k))
            .collect();
        // advance the odometer
        self.done = true;
        for (digit, &(_, max)) in self.counter.iter_mut().zip(&self.base) {
            if *digit < max {
                *digit += 1;
                self.done = false;
                break;
            }
            *digit = 0;
        }
        Some(current)
    }
}

/// A function on a multiset domain: each copy of a domain element must be
/// paired with its own range value.
#[derive(Debug, Clone)]
pub struct MultisetFunction<T: Ord, V: Ord> {
    pub domain: Multiset<T>,
    pub pairs: BTreeSet<(T, V)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FunctionCheck {
    pub valid: bool,
    pub injective: bool,
}

impl<T: Ord + Clone, V: Ord + Clone> MultisetFunction<T, V> {
    pub fn new(domain: Multiset<T>, pairs: impl IntoIterator<Item = (T, V)>) -> Self {
        Self {
            domain,
            pairs: pairs.into_iter().collect(),
        }
    }

    /// Valid iff every domain element `x` has exactly `M(x)` distinct
    /// partners and no pair mentions an element outside the domain.
    /// Injective iff no range value is used twice.
    pub fn validate(&self) -> FunctionCheck {
        let mut partners: BTreeMap<&T, u64> = BTreeMap::new();
        for (x, _) in &self.pairs {
            *partners.entry(x).or_insert(0) += 1;
        }
        let valid = partners.len() == self.domain.distinct()
            && partners.iter().all(|(x, &k)| self.domain.count(x) == k);
        let range: BTreeSet<&V> = self.pairs.iter().map(|(_, v)| v).collect();
        FunctionCheck {
            valid,
            injective: range.len() == self.pairs.len(),
        }
    }
}
