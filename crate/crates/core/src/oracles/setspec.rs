use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::vertex::Vertex;

/// Periodic tail `{n >= threshold : n mod modulus in residues}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tail {
    pub modulus: u64,
    pub residues: BTreeSet<u64>,
    pub threshold: u64,
}

/// A set of naturals: a finite base plus an optional periodic tail.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SetSpec {
    pub base: Vertex,
    pub tail: Option<Tail>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid set specification {0:?}")]
pub struct SetSpecError(pub String);

impl SetSpec {
    pub fn finite(base: Vertex) -> SetSpec {
        SetSpec { base, tail: None }
    }

    pub fn with_tail(base: Vertex, modulus: u64, residues: BTreeSet<u64>, threshold: u64) -> Result<SetSpec, SetSpecError> {
        if modulus == 0 || residues.iter().any(|r| *r >= modulus) {
            return Err(SetSpecError(format!("mod {modulus} residues {residues:?}")));
        }
        Ok(SetSpec {
            base,
            tail: Some(Tail {
                modulus,
                residues,
                threshold,
            }),
        })
    }

    /// Finite iff there is no tail or the tail has no residues.
    pub fn is_finite(&self) -> bool {
        self.tail.as_ref().is_none_or(|t| t.residues.is_empty())
    }

    /// The set as a vertex, when finite.
    pub fn as_vertex(&self) -> Option<&Vertex> {
        self.is_finite().then_some(&self.base)
    }

    pub fn contains(&self, n: u64) -> bool {
        self.base.contains(n)
            || self
                .tail
                .as_ref()
                .is_some_and(|t| n >= t.threshold && t.residues.contains(&(n % t.modulus)))
    }

    /// Whether every element of `x` belongs to the set.
    pub fn contains_all(&self, x: &Vertex) -> bool {
        x.elements().iter().all(|n| self.contains(*n))
    }

    /// Whether `x` is exactly this set.
    pub fn equals(&self, x: &Vertex) -> bool {
        self.as_vertex() == Some(x)
    }
}

impl fmt::Display for SetSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.base)?;
        if let Some(t) = &self.tail {
            let residues: Vec<String> = t.residues.iter().map(u64::to_string).collect();
            write!(
                f,
                "+{{n>={} : n mod {} in {{{}}}}}",
                t.threshold,
                t.modulus,
                residues.join(",")
            )?;
        }
        Ok(())
    }
}

/// Parses a comma-separated list of naturals, optionally wrapped in braces.
pub fn parse_list(s: &str) -> Result<Vec<u64>, SetSpecError> {
    let inner = s.trim().trim_start_matches('{').trim_end_matches('}').trim();
    if inner.is_empty() || inner == "∅" {
        return Ok(Vec::new());
    }
    inner
        .split(',')
        .map(|p| p.trim().parse::<u64>().map_err(|_| SetSpecError(s.to_string())))
        .collect()
}

impl FromStr for SetSpec {
    type Err = SetSpecError;

    /// Accepts `{1,2}` or `1,2`; a tail is written `{1,2}+{n>=3 : n mod 3 in {0}}`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SetSpecError(s.to_string());
        let s = s.trim();
        let Some((base, tail)) = s.split_once("+{") else {
            return Ok(SetSpec::finite(Vertex::from_elements(parse_list(s)?)));
        };
        let base = Vertex::from_elements(parse_list(base)?);
        let tail = tail.strip_suffix('}').ok_or_else(bad)?;
        let (cond, residues) = tail.split_once(" in ").ok_or_else(bad)?;
        let (threshold, modulus) = cond.split_once(':').ok_or_else(bad)?;
        let threshold = threshold
            .trim()
            .strip_prefix("n>=")
            .ok_or_else(bad)?
            .trim()
            .parse()
            .map_err(|_| bad())?;
        let modulus = modulus
            .trim()
            .strip_prefix("n mod")
            .ok_or_else(bad)?
            .trim()
            .parse()
            .map_err(|_| bad())?;
        let residues = parse_list(residues)?.into_iter().collect();
        SetSpec::with_tail(base, modulus, residues, threshold)
    }
}
