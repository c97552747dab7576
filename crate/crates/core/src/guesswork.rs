//! Noise-pattern generators.
//!
//! A pattern is the ascending list of flipped bit positions. Every source
//! starts with the empty (all-zeros) pattern, never repeats a pattern, and
//! reaches all `2^n` patterns if driven to exhaustion. Within equal weight,
//! patterns come out in lexicographic order of their position tuples.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::str::FromStr;

use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// A stateful, single-consumer stream of noise patterns.
pub trait PatternSource {
    /// Moves to the next pattern; `false` once every pattern was produced.
    fn advance(&mut self) -> bool;

    /// The pattern produced by the last successful `advance`.
    fn current(&self) -> &[usize];

    /// Pattern length in bits.
    fn len(&self) -> usize;

    fn next_pattern(&mut self) -> Option<&[usize]> {
        if self.advance() {
            Some(self.current())
        } else {
            None
        }
    }

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SourceKind {
    Hamming,
    Orbgrand,
    Sgrand,
}

impl FromStr for SourceKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hamming" => Ok(SourceKind::Hamming),
            "orbgrand" => Ok(SourceKind::Orbgrand),
            "sgrand" => Ok(SourceKind::Sgrand),
            other => Err(Error::Config(format!("unknown pattern source {other:?}"))),
        }
    }
}

impl SourceKind {
    pub fn name(self) -> &'static str {
        match self {
            SourceKind::Hamming => "hamming",
            SourceKind::Orbgrand => "orbgrand",
            SourceKind::Sgrand => "sgrand",
        }
    }
}

/// Positions sorted by increasing magnitude; ties keep index order.
pub fn reliability_order<T: Real>(magnitudes: &[T]) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..magnitudes.len()).collect();
    perm.sort_by(|&a, &b| {
        magnitudes[a]
            .partial_cmp(&magnitudes[b])
            .unwrap_or(Ordering::Equal)
    });
    perm
}

/// Patterns by nondecreasing Hamming weight, lexicographic within a weight.
#[derive(Debug, Clone)]
pub struct HammingSource {
    n: usize,
    combo: Vec<usize>,
    started: bool,
}

pub fn hamming_source(n: usize) -> HammingSource {
    HammingSource {
        n,
        combo: Vec::new(),
        started: false,
    }
}

impl HammingSource {
    fn step(&mut self) -> bool {
        let n = self.n;
        let w = self.combo.len();
        // rightmost index that can still move right
        if let Some(i) = (0..w).rev().find(|&i| self.combo[i] < n - w + i) {
            self.combo[i] += 1;
            for j in i + 1..w {
                self.combo[j] = self.combo[j - 1] + 1;
            }
            return true;
        }
        if w == n {
            return false;
        }
        self.combo = (0..w + 1).collect();
        true
    }
}

impl PatternSource for HammingSource {
    fn advance(&mut self) -> bool {
        if !self.started {
            self.started = true;
            return true;
        }
        self.step()
    }

    fn current(&self) -> &[usize] {
        &self.combo
    }

    fn len(&self) -> usize {
        self.n
    }
}

/// Ordered-reliability patterns by nondecreasing logistic weight, the sum of
/// the 1-based reliability ranks of the flipped bits.
#[derive(Debug, Clone)]
pub struct OrbSource {
    /// rank - 1 -> position
    perm: Vec<usize>,
    weight: usize,
    max_weight: usize,
    /// patterns of the current weight class, flattened
    flat: Vec<usize>,
    spans: Vec<(usize, usize)>,
    cursor: usize,
    current: Vec<usize>,
}

pub fn orb_source<T: Real>(magnitudes: &[T]) -> OrbSource {
    let n = magnitudes.len();
    OrbSource {
        perm: reliability_order(magnitudes),
        weight: 0,
        max_weight: n * (n + 1) / 2,
        flat: Vec::new(),
        spans: vec![(0, 0)],
        cursor: 0,
        current: Vec::new(),
    }
}

/// Calls `emit` with each partition of `total` into distinct parts drawn
/// from `1..=max_part`, parts in decreasing order.
pub fn distinct_partitions(total: usize, max_part: usize, emit: &mut impl FnMut(&[usize])) {
    fn rec(rest: usize, max_part: usize, parts: &mut Vec<usize>, emit: &mut impl FnMut(&[usize])) {
        if rest == 0 {
            emit(parts);
            return;
        }
        // the remaining parts are distinct and at most `p`, so sum <= p(p+1)/2
        let mut p = max_part.min(rest);
        while p >= 1 && p * (p + 1) / 2 >= rest {
            parts.push(p);
            rec(rest - p, p - 1, parts, emit);
            parts.pop();
            p -= 1;
        }
    }
    rec(total, max_part, &mut Vec::new(), emit);
}

impl OrbSource {
    pub fn logistic_weight(&self) -> usize {
        self.weight
    }

    /// Loads the next nonempty weight class.
    fn load_next_class(&mut self) -> bool {
        let n = self.perm.len();
        while self.weight < self.max_weight {
            self.weight += 1;
            self.flat.clear();
            self.spans.clear();
            let (perm, flat, spans) = (&self.perm, &mut self.flat, &mut self.spans);
            distinct_partitions(self.weight, n, &mut |parts| {
                let start = flat.len();
                flat.extend(parts.iter().map(|&r| perm[r - 1]));
                flat[start..].sort_unstable();
                spans.push((start, flat.len()));
            });
            if !self.spans.is_empty() {
                let flat = &self.flat;
                self.spans
                    .sort_by(|a, b| flat[a.0..a.1].cmp(&flat[b.0..b.1]));
                self.cursor = 0;
                return true;
            }
        }
        false
    }
}

impl PatternSource for OrbSource {
    fn advance(&mut self) -> bool {
        if self.cursor >= self.spans.len() && !self.load_next_class() {
            return false;
        }
        let (a, b) = self.spans[self.cursor];
        self.cursor += 1;
        self.current.clear();
        self.current.extend_from_slice(&self.flat[a..b]);
        true
    }

    fn current(&self) -> &[usize] {
        &self.current
    }

    fn len(&self) -> usize {
        self.perm.len()
    }
}

#[derive(Debug, Clone)]
struct Node<T> {
    weight: T,
    /// sorted ascending; the last entry is the largest rank
    ranks: SmallVec<[u16; 8]>,
    positions: SmallVec<[u16; 8]>,
}

impl<T: Real> Node<T> {
    /// Priority key: weight, then Hamming weight, then position tuple.
    fn key_cmp(&self, other: &Self) -> Ordering {
        self.weight
            .partial_cmp(&other.weight)
            .unwrap_or(Ordering::Equal)
            .then(self.ranks.len().cmp(&other.ranks.len()))
            .then_with(|| self.positions.cmp(&other.positions))
    }
}

impl<T: Real> PartialEq for Node<T> {
    fn eq(&self, other: &Self) -> bool {
        self.key_cmp(other) == Ordering::Equal
    }
}

impl<T: Real> Eq for Node<T> {}

impl<T: Real> PartialOrd for Node<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Real> Ord for Node<T> {
    // reversed so the std max-heap pops the smallest key
    fn cmp(&self, other: &Self) -> Ordering {
        other.key_cmp(self)
    }
}

/// Soft patterns in exactly nondecreasing `sum |lambda|` over flipped bits.
///
/// Each pattern, viewed as a sorted set of reliability ranks, has two
/// children: append the next rank, or bump its largest rank by one. Every
/// child's key exceeds its parent's, so a best-first walk from the empty
/// pattern visits all patterns in key order, each exactly once.
#[derive(Debug, Clone)]
pub struct SgrandSource<T> {
    inner: SgrandInner<T>,
}

#[derive(Debug, Clone)]
enum SgrandInner<T> {
    /// All magnitudes equal: the key order is plain Hamming order.
    Uniform(HammingSource),
    Heap {
        sorted_mags: Vec<T>,
        perm: Vec<usize>,
        heap: BinaryHeap<Node<T>>,
        current: Vec<usize>,
    },
}

pub fn sgrand_source<T: Real>(magnitudes: &[T]) -> SgrandSource<T> {
    sgrand_source_with_capacity(magnitudes, 0)
}

/// As [`sgrand_source`], reserving frontier room for `capacity` entries.
pub fn sgrand_source_with_capacity<T: Real>(magnitudes: &[T], capacity: usize) -> SgrandSource<T> {
    let n = magnitudes.len();
    assert!(n <= u16::MAX as usize, "pattern length {n} too large");
    let uniform = magnitudes.windows(2).all(|w| w[0] == w[1]);
    if uniform {
        return SgrandSource {
            inner: SgrandInner::Uniform(hamming_source(n)),
        };
    }
    sgrand_heap(magnitudes, capacity)
}

fn sgrand_heap<T: Real>(magnitudes: &[T], capacity: usize) -> SgrandSource<T> {
    let perm = reliability_order(magnitudes);
    let sorted_mags = perm.iter().map(|&p| magnitudes[p]).collect();
    let mut heap = BinaryHeap::with_capacity(capacity);
    heap.push(Node {
        weight: T::zero(),
        ranks: SmallVec::new(),
        positions: SmallVec::new(),
    });
    SgrandSource {
        inner: SgrandInner::Heap {
            sorted_mags,
            perm,
            heap,
            current: Vec::new(),
        },
    }
}

fn make_node<T: Real>(ranks: SmallVec<[u16; 8]>, sorted_mags: &[T], perm: &[usize]) -> Node<T> {
    let mut weight = T::zero();
    for &r in &ranks {
        weight += sorted_mags[r as usize];
    }
    let mut positions: SmallVec<[u16; 8]> =
        ranks.iter().map(|&r| perm[r as usize] as u16).collect();
    positions.sort_unstable();
    Node {
        weight,
        ranks,
        positions,
    }
}

impl<T: Real> PatternSource for SgrandSource<T> {
    fn advance(&mut self) -> bool {
        match &mut self.inner {
            SgrandInner::Uniform(h) => h.advance(),
            SgrandInner::Heap {
                sorted_mags,
                perm,
                heap,
                current,
            } => {
                let Some(node) = heap.pop() else {
                    return false;
                };
                let n = perm.len() as u16;
                let next = node.ranks.last().map_or(0, |&r| r + 1);
                if next < n {
                    let mut extended = node.ranks.clone();
                    extended.push(next);
                    heap.push(make_node(extended, sorted_mags, perm));
                    if let Some(last) = node.ranks.last() {
                        let mut bumped = node.ranks.clone();
                        *bumped.last_mut().unwrap() = last + 1;
                        heap.push(make_node(bumped, sorted_mags, perm));
                    }
                }
                current.clear();
                current.extend(node.positions.iter().map(|&p| p as usize));
                true
            }
        }
    }

    fn current(&self) -> &[usize] {
        match &self.inner {
            SgrandInner::Uniform(h) => h.current(),
            SgrandInner::Heap { current, .. } => current,
        }
    }

    fn len(&self) -> usize {
        match &self.inner {
            SgrandInner::Uniform(h) => h.len(),
            SgrandInner::Heap { perm, .. } => perm.len(),
        }
    }
}

/// Filters a source down to patterns that leave `frozen` positions alone.
#[derive(Debug, Clone)]
pub struct Masked<S> {
    inner: S,
    frozen: Vec<bool>,
}

pub fn masked<S: PatternSource>(inner: S, frozen_positions: &[usize]) -> Masked<S> {
    let mut frozen = vec![false; inner.len()];
    for &p in frozen_positions {
        frozen[p] = true;
    }
    Masked { inner, frozen }
}

impl<S: PatternSource> PatternSource for Masked<S> {
    fn advance(&mut self) -> bool {
        while self.inner.advance() {
            if !self.inner.current().iter().any(|&i| self.frozen[i]) {
                return true;
            }
        }
        false
    }

    fn current(&self) -> &[usize] {
        self.inner.current()
    }

    fn len(&self) -> usize {
        self.inner.len()
    }
}

/// Any of the three sources, optionally masked, for static dispatch.
#[derive(Debug, Clone)]
pub enum AnySource<T> {
    Hamming(HammingSource),
    Orb(OrbSource),
    Sgrand(SgrandSource<T>),
}

impl<T: Real> AnySource<T> {
    /// Builds the source of the given kind from reliability magnitudes.
    pub fn build(kind: SourceKind, magnitudes: &[T], frontier_capacity: usize) -> Self {
        match kind {
            SourceKind::Hamming => AnySource::Hamming(hamming_source(magnitudes.len())),
            SourceKind::Orbgrand => AnySource::Orb(orb_source(magnitudes)),
            SourceKind::Sgrand => {
                AnySource::Sgrand(sgrand_source_with_capacity(magnitudes, frontier_capacity))
            }
        }
    }
}

impl<T: Real> PatternSource for AnySource<T> {
    fn advance(&mut self) -> bool {
        match self {
            AnySource::Hamming(s) => s.advance(),
            AnySource::Orb(s) => s.advance(),
            AnySource::Sgrand(s) => s.advance(),
        }
    }

    fn current(&self) -> &[usize] {
        match self {
            AnySource::Hamming(s) => s.current(),
            AnySource::Orb(s) => s.current(),
            AnySource::Sgrand(s) => s.current(),
        }
    }

    fn len(&self) -> usize {
        match self {
            AnySource::Hamming(s) => s.len(),
            AnySource::Orb(s) => s.len(),
            AnySource::Sgrand(s) => s.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn drain<S: PatternSource>(mut s: S, limit: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        while out.len() < limit {
            match s.next_pattern() {
                Some(p) => out.push(p.to_vec()),
                None => break,
            }
        }
        out
    }

    #[test]
    fn hamming_order() {
        let pats = drain(hamming_source(5), 100);
        assert_eq!(pats.len(), 32);
        assert!(pats[0].is_empty());
        for i in 0..5 {
            assert_eq!(pats[1 + i], vec![i]);
        }
        assert_eq!(pats.iter().filter(|p| p.len() == 2).count(), 10);
        assert_eq!(pats[6], vec![0, 1]);
        assert_eq!(pats[7], vec![0, 2]);
        assert_eq!(pats[31], vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn orb_weight_four_class() {
        let mags = [0.9, 0.1, 0.5, 0.3, 2.0];
        // ranks: pos1 -> 1, pos3 -> 2, pos2 -> 3, pos0 -> 4, pos4 -> 5
        let mut s = orb_source(&mags);
        let mut seen = Vec::new();
        while let Some(p) = s.next_pattern() {
            let p = p.to_vec();
            seen.push((s.logistic_weight(), p));
        }
        assert_eq!(seen.len(), 32);
        assert_eq!(seen[1], (1, vec![1]));
        let four: Vec<_> = seen
            .iter()
            .filter(|(w, _)| *w == 4)
            .map(|(_, p)| p.clone())
            .collect();
        // {4} -> pos0, {1,3} -> pos1 + pos2, sorted lexicographically
        assert_eq!(four, vec![vec![0], vec![1, 2]]);
    }

    #[test]
    fn distinct_partition_counts() {
        // OEIS A000009: 1, 1, 1, 2, 2, 3, 4, 5, 6, 8, 10
        let expected = [1, 1, 1, 2, 2, 3, 4, 5, 6, 8, 10];
        for (w, &e) in expected.iter().enumerate() {
            let mut count = 0;
            distinct_partitions(w, 100, &mut |_| count += 1);
            assert_eq!(count, e, "weight {w}");
        }
        let mut count = 0;
        distinct_partitions(6, 3, &mut |p| {
            assert_eq!(p, &[3, 2, 1]);
            count += 1;
        });
        assert_eq!(count, 1);
    }

    #[test]
    fn sgrand_small_example_matches_sorted_enumeration() {
        let mags = [0.1, 0.7, 0.9, 1.5];
        let pats = drain(sgrand_source(&mags), 100);
        let mut all: Vec<(f64, Vec<usize>)> = (0u32..16)
            .map(|m| {
                let p: Vec<usize> = (0..4).filter(|i| m >> i & 1 == 1).collect();
                (p.iter().map(|&i| mags[i]).sum(), p)
            })
            .collect();
        // 0.1 + 1.5 and 0.7 + 0.9 tie exactly; the declared tie-break puts
        // fewer flips first, then the smaller position tuple
        assert_eq!(0.1f64 + 1.5, 0.7 + 0.9);
        all.sort_by(|a, b| {
            a.0.partial_cmp(&b.0)
                .unwrap()
                .then(a.1.len().cmp(&b.1.len()))
                .then_with(|| a.1.cmp(&b.1))
        });
        let expected: Vec<Vec<usize>> = all.into_iter().map(|(_, p)| p).collect();
        assert_eq!(pats, expected);
    }

    #[test]
    fn sgrand_equal_magnitudes_follow_hamming_order() {
        let via_heap = drain(sgrand_heap(&[0.4f64; 6], 0), 1000);
        let hamming = drain(hamming_source(6), 1000);
        assert_eq!(via_heap, hamming);
        let zeros = drain(sgrand_source(&[0.0f64; 6]), 1000);
        assert_eq!(zeros, hamming);
    }

    #[test]
    fn masked_sources() {
        let plain = drain(hamming_source(4), 100);
        assert_eq!(drain(masked(hamming_source(4), &[]), 100), plain);
        assert_eq!(
            drain(masked(hamming_source(4), &[0, 1, 2, 3]), 100),
            vec![Vec::<usize>::new()]
        );
        let m = drain(masked(orb_source(&[1.0, 0.5, 0.2, 3.0]), &[2]), 100);
        assert_eq!(m.len(), 8);
        assert!(m.iter().all(|p| !p.contains(&2)));
    }
}
