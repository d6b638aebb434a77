use std::fmt;

use super::RelError;

/// Largest universe a [`Relation`] can range over; rows are single `u64` words.
pub const MAX_EVENTS: usize = 64;

/// A set of event indices, one bit per event.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EventSet(pub u64);

impl EventSet {
    pub const EMPTY: EventSet = EventSet(0);

    pub fn full(size: usize) -> Self {
        if size == 64 {
            EventSet(u64::MAX)
        } else {
            EventSet((1u64 << size) - 1)
        }
    }

    pub fn singleton(i: usize) -> Self {
        EventSet(1u64 << i)
    }

    pub fn contains(self, i: usize) -> bool {
        self.0 >> i & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        self.0 |= 1u64 << i;
    }

    pub fn remove(&mut self, i: usize) {
        self.0 &= !(1u64 << i);
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn union(self, other: EventSet) -> EventSet {
        EventSet(self.0 | other.0)
    }

    pub fn intersection(self, other: EventSet) -> EventSet {
        EventSet(self.0 & other.0)
    }

    pub fn minus(self, other: EventSet) -> EventSet {
        EventSet(self.0 & !other.0)
    }

    pub fn is_subset(self, other: EventSet) -> bool {
        self.0 & !other.0 == 0
    }

    /// Indices in ascending order.
    pub fn iter(self) -> impl Iterator<Item = usize> {
        let mut bits = self.0;
        std::iter::from_fn(move || {
            if bits == 0 {
                None
            } else {
                let i = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i)
            }
        })
    }
}

impl FromIterator<usize> for EventSet {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        let mut s = EventSet::EMPTY;
        for i in iter {
            s.insert(i);
        }
        s
    }
}

impl fmt::Debug for EventSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A binary relation over events `0..size`, stored as a bit matrix.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Relation {
    size: usize,
    rows: Vec<u64>,
}

impl Relation {
    pub fn empty(size: usize) -> Self {
        assert!(size <= MAX_EVENTS, "relation universe too large: {size}");
        Relation { size, rows: vec![0; size] }
    }

    pub fn identity(size: usize) -> Self {
        Self::identity_on(size, EventSet::full(size))
    }

    /// `[S]`: the identity restricted to `set`.
    pub fn identity_on(size: usize, set: EventSet) -> Self {
        let mut r = Self::empty(size);
        for i in set.intersection(EventSet::full(size)).iter() {
            r.rows[i] = 1u64 << i;
        }
        r
    }

    /// `A × B`.
    pub fn product(size: usize, a: EventSet, b: EventSet) -> Self {
        let mut r = Self::empty(size);
        let b = b.intersection(EventSet::full(size));
        for i in a.intersection(EventSet::full(size)).iter() {
            r.rows[i] = b.0;
        }
        r
    }

    pub fn from_pairs(size: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut r = Self::empty(size);
        for (a, b) in pairs {
            r.insert(a, b);
        }
        r
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn contains(&self, a: usize, b: usize) -> bool {
        a < self.size && b < self.size && self.rows[a] >> b & 1 == 1
    }

    pub fn insert(&mut self, a: usize, b: usize) {
        assert!(a < self.size && b < self.size, "pair ({a},{b}) outside universe {}", self.size);
        self.rows[a] |= 1u64 << b;
    }

    pub fn remove(&mut self, a: usize, b: usize) {
        if a < self.size && b < self.size {
            self.rows[a] &= !(1u64 << b);
        }
    }

    /// Successors of `a`.
    pub fn row(&self, a: usize) -> EventSet {
        EventSet(self.rows[a])
    }

    /// Predecessors of `b`.
    pub fn column(&self, b: usize) -> EventSet {
        (0..self.size).filter(|&a| self.contains(a, b)).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(|&r| r == 0)
    }

    pub fn len(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones() as usize).sum()
    }

    /// Pairs in ascending lexicographic order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(a, &row)| EventSet(row).iter().map(move |b| (a, b)))
    }

    pub fn domain(&self) -> EventSet {
        (0..self.size).filter(|&a| self.rows[a] != 0).collect()
    }

    pub fn range(&self) -> EventSet {
        EventSet(self.rows.iter().fold(0, |acc, r| acc | r))
    }

    fn check_same(&self, other: &Relation) -> Result<(), RelError> {
        if self.size != other.size {
            Err(RelError::UniverseMismatch(self.size, other.size))
        } else {
            Ok(())
        }
    }

    pub fn union(&self, other: &Relation) -> Result<Relation, RelError> {
        self.check_same(other)?;
        let rows = self.rows.iter().zip(&other.rows).map(|(a, b)| a | b).collect();
        Ok(Relation { size: self.size, rows })
    }

    pub fn intersection(&self, other: &Relation) -> Result<Relation, RelError> {
        self.check_same(other)?;
        let rows = self.rows.iter().zip(&other.rows).map(|(a, b)| a & b).collect();
        Ok(Relation { size: self.size, rows })
    }

    pub fn difference(&self, other: &Relation) -> Result<Relation, RelError> {
        self.check_same(other)?;
        let rows = self.rows.iter().zip(&other.rows).map(|(a, b)| a & !b).collect();
        Ok(Relation { size: self.size, rows })
    }

    /// `self ; other`
    pub fn compose(&self, other: &Relation) -> Result<Relation, RelError> {
        self.check_same(other)?;
        let rows = self
            .rows
            .iter()
            .map(|&row| EventSet(row).iter().fold(0, |acc, k| acc | other.rows[k]))
            .collect();
        Ok(Relation { size: self.size, rows })
    }

    pub fn inverse(&self) -> Relation {
        let mut r = Relation::empty(self.size);
        for (a, b) in self.pairs() {
            r.rows[b] |= 1u64 << a;
        }
        r
    }

    /// `self ∪ id`
    pub fn reflexive(&self) -> Relation {
        let mut r = self.clone();
        for i in 0..self.size {
            r.rows[i] |= 1u64 << i;
        }
        r
    }

    /// `self⁺`, by Warshall's algorithm.
    pub fn transitive_closure(&self) -> Relation {
        let mut r = self.clone();
        for k in 0..self.size {
            let rk = r.rows[k];
            let bit = 1u64 << k;
            for i in 0..self.size {
                if r.rows[i] & bit != 0 {
                    r.rows[i] |= rk;
                }
            }
        }
        r
    }

    /// `[dom] ; self ; [codom]`
    pub fn restrict(&self, dom: EventSet, codom: EventSet) -> Relation {
        let mut r = self.clone();
        for (i, row) in r.rows.iter_mut().enumerate() {
            *row = if dom.contains(i) { *row & codom.0 } else { 0 };
        }
        r
    }

    /// Keeps only pairs `(a, b)` with `keep(a, b)`.
    pub fn filter(&self, mut keep: impl FnMut(usize, usize) -> bool) -> Relation {
        let mut r = Relation::empty(self.size);
        for (a, b) in self.pairs() {
            if keep(a, b) {
                r.insert(a, b);
            }
        }
        r
    }

    /// Events `e` with `(e, e)` in the relation.
    pub fn reflexive_points(&self) -> EventSet {
        (0..self.size).filter(|&i| self.rows[i] >> i & 1 == 1).collect()
    }

    pub fn is_irreflexive(&self) -> bool {
        self.reflexive_points().is_empty()
    }

    pub fn is_transitive(&self) -> bool {
        self.compose(self).expect("same universe").is_subset(self)
    }

    pub fn is_acyclic(&self) -> bool {
        self.transitive_closure().is_irreflexive()
    }

    pub fn is_subset(&self, other: &Relation) -> bool {
        self.size == other.size && self.rows.iter().zip(&other.rows).all(|(a, b)| a & !b == 0)
    }

    /// Strict total order on exactly `domain`: irreflexive, transitive, total on
    /// distinct members of `domain`, and no pairs leaving `domain`.
    pub fn is_strict_total_order(&self, domain: EventSet) -> bool {
        if !self.is_irreflexive() || !self.is_transitive() {
            return false;
        }
        for a in 0..self.size {
            if !domain.contains(a) {
                if self.rows[a] != 0 {
                    return false;
                }
                continue;
            }
            if !EventSet(self.rows[a]).is_subset(domain) {
                return false;
            }
            for b in domain.iter().filter(|&b| b > a) {
                if self.contains(a, b) == self.contains(b, a) {
                    return false;
                }
            }
        }
        true
    }

    /// First pair of distinct `domain` members ordered in neither direction.
    pub fn missing_pair(&self, domain: EventSet) -> Option<(usize, usize)> {
        for a in domain.iter() {
            for b in domain.iter().filter(|&b| b > a) {
                if !self.contains(a, b) && !self.contains(b, a) {
                    return Some((a, b));
                }
            }
        }
        None
    }

    /// Covering pairs: `self \ (self ; self)` for a transitive relation.
    pub fn transitive_reduction(&self) -> Relation {
        let closed = self.transitive_closure();
        let two = closed.compose(&closed).expect("same universe");
        self.difference(&two).expect("same universe")
    }

    /// Relabels the universe: pair `(a, b)` becomes `(map[a], map[b])`; unmapped
    /// events are dropped.
    pub fn remap(&self, new_size: usize, map: &[Option<usize>]) -> Relation {
        let mut r = Relation::empty(new_size);
        for (a, b) in self.pairs() {
            if let (Some(x), Some(y)) = (map[a], map[b]) {
                r.insert(x, y);
            }
        }
        r
    }
}

impl fmt::Debug for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Relation[{}]", self.size)?;
        f.debug_set().entries(self.pairs()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(n: usize) -> Relation {
        Relation::from_pairs(n, (1..n).map(|i| (i - 1, i)))
    }

    #[test]
    fn closure_of_chain_is_total() {
        let c = chain(5).transitive_closure();
        assert!(c.is_strict_total_order(EventSet::full(5)));
        assert_eq!(c.len(), 10);
    }

    #[test]
    fn closure_detects_cycles() {
        let mut r = chain(3);
        r.insert(2, 0);
        assert!(r.is_irreflexive());
        assert!(!r.is_acyclic());
        assert_eq!(r.transitive_closure().reflexive_points(), EventSet::full(3));
    }

    #[test]
    fn compose_and_inverse() {
        let a = Relation::from_pairs(3, [(0, 1)]);
        let b = Relation::from_pairs(3, [(1, 2)]);
        assert_eq!(a.compose(&b).unwrap(), Relation::from_pairs(3, [(0, 2)]));
        assert_eq!(a.inverse(), Relation::from_pairs(3, [(1, 0)]));
    }

    #[test]
    fn mismatched_universes_are_rejected() {
        let a = Relation::empty(3);
        let b = Relation::empty(4);
        assert_eq!(a.union(&b), Err(RelError::UniverseMismatch(3, 4)));
    }

    #[test]
    fn total_order_requires_domain() {
        let c = chain(3).transitive_closure();
        assert!(!c.is_strict_total_order(EventSet::from_iter([0, 1])));
        assert!(c.restrict(EventSet::from_iter([0, 1]), EventSet::from_iter([0, 1]))
            .is_strict_total_order(EventSet::from_iter([0, 1])));
        let partial = Relation::from_pairs(3, [(0, 1)]);
        assert_eq!(partial.missing_pair(EventSet::full(3)), Some((0, 2)));
    }

    #[test]
    fn reduction_of_closed_chain() {
        assert_eq!(chain(4).transitive_closure().transitive_reduction(), chain(4));
    }
}
