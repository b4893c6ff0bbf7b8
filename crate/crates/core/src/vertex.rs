//! Finite sets of naturals: the vertices of the subset graph.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A finite set of naturals stored as a strictly increasing sequence.
///
/// The derived order on the element sequence is lexicographic with proper
/// prefixes first, which is the canonical vertex order used for tie-breaking.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vertex(Vec<u64>);

impl Vertex {
    pub fn empty() -> Self {
        Vertex(Vec::new())
    }

    pub fn from_elements(elements: impl IntoIterator<Item = u64>) -> Self {
        let mut v: Vec<u64> = elements.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        Vertex(v)
    }

    pub fn elements(&self) -> &[u64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, n: u64) -> bool {
        self.0.binary_search(&n).is_ok()
    }

    /// Adds `n`; returns false when it was already present.
    pub fn insert(&mut self, n: u64) -> bool {
        match self.0.binary_search(&n) {
            Ok(_) => false,
            Err(pos) => {
                self.0.insert(pos, n);
                true
            }
        }
    }

    pub fn is_subset(&self, other: &Vertex) -> bool {
        if self.0.len() > other.0.len() {
            return false;
        }
        let mut rest = other.0.iter();
        'outer: for x in &self.0 {
            for y in rest.by_ref() {
                match y.cmp(x) {
                    Ordering::Less => continue,
                    Ordering::Equal => continue 'outer,
                    Ordering::Greater => return false,
                }
            }
            return false;
        }
        true
    }

    pub fn union(&self, other: &Vertex) -> Vertex {
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    out.push(a[i]);
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Vertex(out)
    }

    /// Elements of `self` missing from `other`, ascending.
    pub fn difference<'a>(&'a self, other: &'a Vertex) -> impl Iterator<Item = u64> + 'a {
        self.0.iter().copied().filter(move |x| !other.contains(*x))
    }
}

impl Ord for Vertex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.cmp(&other.0)
    }
}

impl PartialOrd for Vertex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl FromIterator<u64> for Vertex {
    fn from_iter<I: IntoIterator<Item = u64>>(iter: I) -> Self {
        Vertex::from_elements(iter)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        f.write_str("}")
    }
}
