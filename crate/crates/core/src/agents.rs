use std::cmp::Ordering;
use std::fmt;

use smallvec::SmallVec;

use crate::error::{Error, Result};

type Words = SmallVec<[u64; 2]>;

/// A subset of the agents `{0, .., n-1}`, stored as a bitset.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AgentSet {
    n: usize,
    words: Words,
}

fn word_count(n: usize) -> usize {
    n.div_ceil(64).max(1)
}

impl AgentSet {
    pub fn empty(n: usize) -> Self {
        AgentSet {
            n,
            words: smallvec::smallvec![0; word_count(n)],
        }
    }

    pub fn full(n: usize) -> Self {
        let mut set = Self::empty(n);
        for i in 0..n {
            set.insert(i);
        }
        set
    }

    pub fn singleton(n: usize, i: usize) -> Self {
        let mut set = Self::empty(n);
        set.insert(i);
        set
    }

    /// Builds a set from member indices, rejecting indices outside `0..n`.
    pub fn from_indices<I: IntoIterator<Item = usize>>(n: usize, members: I) -> Result<Self> {
        let mut set = Self::empty(n);
        for i in members {
            if i >= n {
                return Err(Error::MalformedInput(format!(
                    "agent index {i} out of range for n = {n}"
                )));
            }
            set.insert(i);
        }
        Ok(set)
    }

    /// The set whose members are the one-bits of `mask`; requires `n <= 64`.
    pub fn from_mask(n: usize, mask: u64) -> Self {
        debug_assert!(n <= 64 && (n == 64 || mask >> n == 0));
        let mut set = Self::empty(n);
        set.words[0] = mask;
        set
    }

    pub fn to_mask(&self) -> Option<u64> {
        (self.n <= 64).then(|| self.words[0])
    }

    /// Size of the ground set this subset lives in.
    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn contains(&self, i: usize) -> bool {
        i < self.n && self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn insert(&mut self, i: usize) {
        assert!(i < self.n, "agent {i} outside ground set of size {}", self.n);
        self.words[i / 64] |= 1 << (i % 64);
    }

    pub fn remove(&mut self, i: usize) {
        if i < self.n {
            self.words[i / 64] &= !(1 << (i % 64));
        }
    }

    pub fn with(&self, i: usize) -> Self {
        let mut set = self.clone();
        set.insert(i);
        set
    }

    pub fn without(&self, i: usize) -> Self {
        let mut set = self.clone();
        set.remove(i);
        set
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(k, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let bit = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(k * 64 + bit)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    pub fn is_subset(&self, other: &AgentSet) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .all(|(a, b)| a & !b == 0)
    }

    pub fn is_disjoint(&self, other: &AgentSet) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .all(|(a, b)| a & b == 0)
    }

    pub fn union(&self, other: &AgentSet) -> AgentSet {
        self.zip_with(other, |a, b| a | b)
    }

    pub fn intersection(&self, other: &AgentSet) -> AgentSet {
        self.zip_with(other, |a, b| a & b)
    }

    pub fn difference(&self, other: &AgentSet) -> AgentSet {
        self.zip_with(other, |a, b| a & !b)
    }

    pub fn complement(&self) -> AgentSet {
        self.zip_with(&AgentSet::full(self.n), |a, full| !a & full)
    }

    fn zip_with(&self, other: &AgentSet, op: impl Fn(u64, u64) -> u64) -> AgentSet {
        assert_eq!(self.n, other.n, "agent sets over different ground sets");
        AgentSet {
            n: self.n,
            words: self
                .words
                .iter()
                .zip(other.words.iter())
                .map(|(&a, &b)| op(a, b))
                .collect(),
        }
    }

    /// The global demand tie order: smaller cardinality first, then the
    /// lexicographically smaller sorted member list.
    pub fn tie_cmp(&self, other: &AgentSet) -> Ordering {
        self.len().cmp(&other.len()).then_with(|| {
            // Equal cardinality: the owner of the smallest differing agent is smaller.
            for (a, b) in self.words.iter().zip(other.words.iter()) {
                let diff = a ^ b;
                if diff != 0 {
                    let low = diff & diff.wrapping_neg();
                    return if a & low != 0 {
                        Ordering::Less
                    } else {
                        Ordering::Greater
                    };
                }
            }
            Ordering::Equal
        })
    }
}

impl fmt::Display for AgentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{i}")?;
        }
        write!(f, "}}")
    }
}

impl fmt::Debug for AgentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AgentSet{self}")
    }
}

/// Iterates the `k`-subsets of `0..n` in lexicographic order of member lists.
pub struct Combinations {
    n: usize,
    current: Option<Vec<usize>>,
}

impl Combinations {
    pub fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            current: (k <= n).then(|| (0..k).collect()),
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let out = self.current.clone()?;
        let cur = self.current.as_mut().unwrap();
        let k = cur.len();
        let mut pos = k;
        while pos > 0 && cur[pos - 1] == self.n - k + pos - 1 {
            pos -= 1;
        }
        if pos == 0 {
            self.current = None;
        } else {
            cur[pos - 1] += 1;
            for j in pos..k {
                cur[j] = cur[j - 1] + 1;
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(n: usize, m: &[usize]) -> AgentSet {
        AgentSet::from_indices(n, m.iter().copied()).unwrap()
    }

    #[test]
    fn membership_across_word_boundary() {
        let mut s = AgentSet::empty(130);
        s.insert(0);
        s.insert(64);
        s.insert(129);
        assert_eq!(s.len(), 3);
        assert_eq!(s.to_vec(), vec![0, 64, 129]);
        assert!(s.contains(129) && !s.contains(128));
        assert_eq!(s.complement().len(), 127);
        assert!(AgentSet::from_indices(5, [5]).is_err());
    }

    #[test]
    fn tie_order_is_cardinality_then_lex() {
        let n = 70;
        assert_eq!(set(n, &[5]).tie_cmp(&set(n, &[0, 1])), Ordering::Less);
        assert_eq!(set(n, &[0, 9]).tie_cmp(&set(n, &[1, 2])), Ordering::Less);
        assert_eq!(set(n, &[0, 2, 3]).tie_cmp(&set(n, &[0, 1, 9])), Ordering::Greater);
        assert_eq!(set(n, &[1, 65]).tie_cmp(&set(n, &[1, 66])), Ordering::Less);
        assert_eq!(set(n, &[3]).tie_cmp(&set(n, &[3])), Ordering::Equal);
    }

    #[test]
    fn tie_order_matches_sorted_list_comparison() {
        let n = 6;
        for a in 0u64..64 {
            for b in 0u64..64 {
                let (sa, sb) = (AgentSet::from_mask(n, a), AgentSet::from_mask(n, b));
                let expect = sa
                    .len()
                    .cmp(&sb.len())
                    .then_with(|| sa.to_vec().cmp(&sb.to_vec()));
                assert_eq!(sa.tie_cmp(&sb), expect, "{sa} vs {sb}");
            }
        }
    }

    #[test]
    fn combinations_in_lex_order() {
        let all: Vec<_> = Combinations::new(4, 2).collect();
        assert_eq!(
            all,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(Combinations::new(3, 0).count(), 1);
        assert_eq!(Combinations::new(3, 4).count(), 0);
    }
}
