//! Integer partitions as ramification profiles and conjugacy-class labels.
//!
//! A [`Partition`] is always stored in canonical, weakly decreasing form, so
//! two partitions are equal exactly when they have the same multiset of
//! parts. Enumeration is in descending lexicographic order, which keeps memo
//! keys and exported tables reproducible.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Largest degree accepted anywhere in the crate.
pub const MAX_DEGREE: u32 = 20;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct Partition {
    parts: Vec<u32>,
}

fn check_degree(d: u32) -> Result<()> {
    if d == 0 || d > MAX_DEGREE {
        return Err(Error::DegreeOutOfRange {
            d,
            min: 1,
            max: MAX_DEGREE,
        });
    }
    Ok(())
}

impl Partition {
    /// Builds a partition from parts in any order.
    pub fn new(mut parts: Vec<u32>) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::PartitionParse {
                input: String::new(),
                reason: "empty partition".into(),
            });
        }
        if parts.contains(&0) {
            return Err(Error::PartitionParse {
                input: format!("{parts:?}"),
                reason: "parts must be positive".into(),
            });
        }
        let d: u64 = parts.iter().map(|&p| p as u64).sum();
        check_degree(d.min(u32::MAX as u64) as u32)?;
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(Partition { parts })
    }

    /// The trivial profile `(1^d)`.
    pub fn ones(d: u32) -> Result<Self> {
        check_degree(d)?;
        Ok(Partition {
            parts: vec![1; d as usize],
        })
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    /// `d`, the number being partitioned.
    pub fn degree(&self) -> u32 {
        self.parts.iter().sum()
    }

    /// `ℓ(m)`, the number of parts.
    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.parts.iter().all(|&p| p == 1)
    }

    /// `|m|`, the product of the parts.
    pub fn weight(&self) -> u64 {
        self.parts.iter().map(|&p| p as u64).product()
    }

    /// `m! = |Aut(m)|`, the product of factorials of the part multiplicities.
    pub fn aut_order(&self) -> u64 {
        self.multiplicities()
            .iter()
            .map(|&(_, r)| factorial(r))
            .product()
    }

    /// `z_m = |m|·m!`, the centralizer order of a permutation of this cycle type.
    pub fn centralizer_order(&self) -> u64 {
        self.weight() * self.aut_order()
    }

    /// Odd means every part is odd, equivalently `|m|` is odd.
    pub fn is_odd(&self) -> bool {
        self.weight() % 2 == 1
    }

    /// `(part, multiplicity)` pairs, largest part first.
    pub fn multiplicities(&self) -> Vec<(u32, u32)> {
        let mut out: Vec<(u32, u32)> = Vec::new();
        for &p in &self.parts {
            match out.last_mut() {
                Some((q, r)) if *q == p => *r += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    /// `|M_m^e| = d!·m!/|m|`, the number of rational-component covers with
    /// a single profile `m`. Always a positive integer.
    pub fn rational_component_count(&self) -> Rational {
        let d = self.degree();
        let value = Rational::new(
            BigInt::from(factorial(d)) * BigInt::from(self.aut_order()),
            BigInt::from(self.weight()),
        );
        assert!(
            crate::rational::is_positive_integer(&value),
            "rational component count of {self} is not integral"
        );
        value
    }

    /// Compact label such as `(31)` or `(1^4)`, used in trace output.
    pub fn label(&self) -> String {
        let wide = self.parts.iter().any(|&p| p >= 10);
        let mut s = String::from("(");
        for (i, (p, r)) in self.multiplicities().into_iter().enumerate() {
            if wide && i > 0 {
                s.push(',');
            }
            s.push_str(&p.to_string());
            if r > 1 && (r > 2 || p == 1) {
                s.push('^');
                s.push_str(&r.to_string());
            } else if r == 2 {
                if wide {
                    s.push(',');
                }
                s.push_str(&p.to_string());
            }
        }
        s.push(')');
        s
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.parts.iter().map(u32::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

impl FromStr for Partition {
    type Err = Error;

    /// Accepts `"3,1"`, `"3 1"`, `"1^4"`, `"3,1^2"`, with optional parentheses.
    fn from_str(s: &str) -> Result<Self> {
        let err = |reason: &str| Error::PartitionParse {
            input: s.to_string(),
            reason: reason.to_string(),
        };
        let body = s.trim().trim_start_matches('(').trim_end_matches(')');
        let mut parts = Vec::new();
        for token in body.split(|c: char| c == ',' || c.is_whitespace()) {
            if token.is_empty() {
                continue;
            }
            let (part, reps) = match token.split_once('^') {
                Some((p, r)) => (p, r.parse::<u32>().map_err(|_| err("bad exponent"))?),
                None => (token, 1),
            };
            let part: u32 = part.parse().map_err(|_| err("bad part"))?;
            if reps > MAX_DEGREE {
                return Err(err("exponent too large"));
            }
            parts.extend(std::iter::repeat_n(part, reps as usize));
        }
        if parts.is_empty() {
            return Err(err("empty partition"));
        }
        Partition::new(parts).map_err(|e| match e {
            Error::PartitionParse { reason, .. } => err(&reason),
            other => other,
        })
    }
}

impl TryFrom<Vec<u32>> for Partition {
    type Error = Error;
    fn try_from(parts: Vec<u32>) -> Result<Self> {
        Partition::new(parts)
    }
}

impl From<Partition> for Vec<u32> {
    fn from(p: Partition) -> Self {
        p.parts
    }
}

pub fn factorial(n: u32) -> u64 {
    (1..=n as u64).product()
}

/// All partitions of `d` in descending lexicographic order.
pub fn partitions_of(d: u32) -> Result<Vec<Partition>> {
    check_degree(d)?;
    let mut out = Vec::new();
    let mut current = Vec::new();
    fill(d, d, &mut current, &mut out);
    Ok(out)
}

fn fill(remaining: u32, max_part: u32, current: &mut Vec<u32>, out: &mut Vec<Partition>) {
    if remaining == 0 {
        out.push(Partition {
            parts: current.clone(),
        });
        return;
    }
    for part in (1..=max_part.min(remaining)).rev() {
        current.push(part);
        fill(remaining - part, part, current, out);
        current.pop();
    }
}

/// Partitions of `d` with every part odd, in the same order as [`partitions_of`].
pub fn odd_partitions_of(d: u32) -> Result<Vec<Partition>> {
    Ok(partitions_of(d)?.into_iter().filter(Partition::is_odd).collect())
}

/// Parses a `;`-separated list of profiles. Blank input is the empty list.
pub fn parse_profiles(s: &str) -> Result<Vec<Partition>> {
    s.split(';')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::parse)
        .collect()
}

pub fn format_profiles(profiles: &[Partition]) -> String {
    profiles
        .iter()
        .map(Partition::to_string)
        .collect::<Vec<_>>()
        .join(";")
}

pub fn check_profiles(d: u32, profiles: &[Partition]) -> Result<()> {
    for m in profiles {
        if m.degree() != d {
            return Err(Error::ProfileDegreeMismatch {
                profile: m.to_string(),
                expected: d,
                actual: m.degree(),
            });
        }
    }
    Ok(())
}

/// Euler characteristic of the domain of a degree-`d` cover of a genus-`h`
/// target with the given branch profiles (Riemann–Hurwitz):
/// `χ = 2d(1−h) + Σ (ℓ(m^i) − d)`.
pub fn euler_characteristic(d: u32, h: u32, profiles: &[Partition]) -> Result<i64> {
    check_degree(d)?;
    check_profiles(d, profiles)?;
    let d = d as i64;
    let branch: i64 = profiles.iter().map(|m| m.len() as i64 - d).sum();
    Ok(2 * d * (1 - h as i64) + branch)
}
