//! Classical (possibly disconnected) Hurwitz numbers.
//!
//! [`classical_hurwitz`] evaluates the Frobenius character sum;
//! [`brute_force_hurwitz`] counts permutation tuples directly and shares no
//! code path with it beyond the partition type.

use std::collections::HashMap;
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::partitions::{check_profiles, factorial, Partition, MAX_DEGREE};
use crate::rational::{self, Rational};
use crate::symgroup::{self, all_perms, class_size, compose, cycle_type, CharacterTable};

pub const MAX_BRUTE_FORCE_DEGREE: u32 = 6;
pub const DEFAULT_ORACLE_BUDGET: u128 = 100_000_000;

/// `H^h_{m¹,…,m^k}` for degree-`d` covers of a genus-`h` target.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ClassicalQuery {
    pub h: u32,
    pub d: u32,
    pub profiles: Vec<Partition>,
}

impl ClassicalQuery {
    pub fn new(h: u32, d: u32, profiles: Vec<Partition>) -> Result<Self> {
        if d == 0 || d > MAX_DEGREE {
            return Err(Error::DegreeOutOfRange {
                d,
                min: 1,
                max: MAX_DEGREE,
            });
        }
        check_profiles(d, &profiles)?;
        Ok(ClassicalQuery { h, d, profiles })
    }
}

pub fn classical_hurwitz(q: &ClassicalQuery) -> Result<Rational> {
    classical_hurwitz_cached(q, None)
}

pub fn classical_hurwitz_cached(q: &ClassicalQuery, cache_dir: Option<&Path>) -> Result<Rational> {
    let table = symgroup::shared_table(q.d, cache_dir)?;
    classical_hurwitz_with_table(q, &table)
}

/// `Σ_λ (d!/dim λ)^{2h−2} · Π_i |C_{m^i}|·χ_λ(m^i)/dim λ`.
pub fn classical_hurwitz_with_table(q: &ClassicalQuery, table: &CharacterTable) -> Result<Rational> {
    check_profiles(q.d, &q.profiles)?;
    if table.degree() != q.d {
        return Err(Error::InvalidArgument(format!(
            "character table has degree {}, query has degree {}",
            table.degree(),
            q.d
        )));
    }
    let order = rational::from_u128(factorial(q.d) as u128);
    let columns: Vec<(usize, Rational)> = q
        .profiles
        .iter()
        .map(|m| {
            let col = table.class_position(m).expect("profile is a partition of d");
            (col, rational::from_u128(class_size(q.d, m).expect("degree checked") as u128))
        })
        .collect();

    let mut total = rational::zero();
    for irrep in 0..table.irreps().len() {
        let dim = rational::int(table.dim_at(irrep));
        let mut term = rational::pow(&(&order / &dim), 2 * q.h as i64 - 2);
        for (col, size) in &columns {
            term *= size * rational::int(table.chi_at(irrep, *col)) / &dim;
        }
        total += term;
    }
    Ok(total)
}

/// Rough number of group compositions the oracle performs for `q`.
pub fn brute_force_cost(q: &ClassicalQuery) -> u128 {
    let n = factorial(q.d) as u128;
    let classes: u128 = q
        .profiles
        .iter()
        .map(|m| class_size(q.d, m).unwrap_or(0) as u128)
        .sum();
    n * n * (1 + q.h as u128) + n * classes
}

/// `(1/d!)·#{(a₁,b₁,…,a_h,b_h,s₁,…,s_k) : Π[a_i,b_i]·Π s_j = id, s_j ∈ C_{m^j}}`.
///
/// Tuples are counted by pushing a distribution over group elements through
/// one factor at a time: a handle contributes the distribution of
/// commutators, a profile contributes its conjugacy class, and the last
/// profile is solved for instead of enumerated.
pub fn brute_force_hurwitz(q: &ClassicalQuery, budget: u128) -> Result<Rational> {
    check_profiles(q.d, &q.profiles)?;
    if q.d > MAX_BRUTE_FORCE_DEGREE {
        return Err(Error::DegreeOutOfRange {
            d: q.d,
            min: 1,
            max: MAX_BRUTE_FORCE_DEGREE,
        });
    }
    let needed = brute_force_cost(q);
    if needed > budget {
        return Err(Error::OracleBudgetExceeded { needed, budget });
    }

    let group = Group::shared(q.d)?;
    let n = group.order();
    let mut dist = vec![0u128; n];
    dist[group.identity] = 1;

    for _ in 0..q.h {
        dist = group.convolve(&dist, group.commutators());
    }

    let (last, leading) = match q.profiles.split_last() {
        Some((last, leading)) => (Some(last), leading),
        None => (None, &[][..]),
    };
    for m in leading {
        let members = group.class_members(m);
        let mut next = vec![0u128; n];
        for (g, &count) in dist.iter().enumerate() {
            if count == 0 {
                continue;
            }
            for &x in &members {
                next[group.mul(g, x)] += count;
            }
        }
        dist = next;
    }

    let count: u128 = match last {
        None => dist[group.identity],
        Some(m) => dist
            .iter()
            .enumerate()
            .filter(|&(g, &c)| c > 0 && &group.cycle_types[group.inv[g]] == m)
            .map(|(_, &c)| c)
            .sum(),
    };
    Ok(Rational::new(BigInt::from(count), BigInt::from(n as u64)))
}

/// `S_d` with elements numbered and products tabulated.
struct Group {
    n: usize,
    table: Vec<u16>,
    inv: Vec<usize>,
    identity: usize,
    cycle_types: Vec<Partition>,
    /// `commutators[g] = #{(a, b) : [a, b] = g}`, filled on first use.
    commutators: OnceLock<Vec<u128>>,
}

impl Group {
    fn shared(d: u32) -> Result<Arc<Group>> {
        static GROUPS: OnceLock<Mutex<HashMap<u32, Arc<Group>>>> = OnceLock::new();
        let groups = GROUPS.get_or_init(Default::default);
        if let Some(g) = groups.lock().unwrap().get(&d) {
            return Ok(Arc::clone(g));
        }
        let group = Arc::new(Group::new(d)?);
        Ok(Arc::clone(groups.lock().unwrap().entry(d).or_insert(group)))
    }

    fn commutators(&self) -> &[u128] {
        self.commutators.get_or_init(|| {
            let n = self.n;
            let mut counts = vec![0u128; n];
            for a in 0..n {
                for b in 0..n {
                    counts[self.mul(self.mul(a, b), self.mul(self.inv[a], self.inv[b]))] += 1;
                }
            }
            counts
        })
    }

    fn new(d: u32) -> Result<Self> {
        let perms = all_perms(d)?;
        let n = perms.len();
        let index: HashMap<_, usize> = perms.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let mut table = vec![0u16; n * n];
        for (a, pa) in perms.iter().enumerate() {
            for (b, pb) in perms.iter().enumerate() {
                table[a * n + b] = index[&compose(pa, pb)] as u16;
            }
        }
        let inv = perms.iter().map(|p| index[&p.inverse()]).collect();
        let identity = perms.iter().position(|p| p.is_identity()).expect("identity");
        let cycle_types = perms.iter().map(cycle_type).collect();
        Ok(Group {
            n,
            table,
            inv,
            identity,
            cycle_types,
            commutators: OnceLock::new(),
        })
    }

    fn order(&self) -> usize {
        self.n
    }

    fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a * self.n + b] as usize
    }

    fn class_members(&self, m: &Partition) -> Vec<usize> {
        (0..self.n).filter(|&g| &self.cycle_types[g] == m).collect()
    }

    fn convolve(&self, left: &[u128], right: &[u128]) -> Vec<u128> {
        let mut out = vec![0u128; self.n];
        for (a, &x) in left.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (b, &y) in right.iter().enumerate() {
                if y != 0 {
                    out[self.mul(a, b)] += x * y;
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    fn q(h: u32, d: u32, profiles: &[&str]) -> ClassicalQuery {
        ClassicalQuery::new(h, d, profiles.iter().map(|s| p(s)).collect()).unwrap()
    }

    #[test]
    fn frobenius_examples() {
        assert_eq!(classical_hurwitz(&q(0, 3, &["3", "3", "3"])).unwrap(), frac(1, 3));
        assert_eq!(
            classical_hurwitz(&q(0, 4, &["3,1", "3,1", "3,1"])).unwrap(),
            frac(4, 3)
        );
        assert_eq!(classical_hurwitz(&q(0, 4, &[])).unwrap(), frac(1, 24));
    }

    #[test]
    fn brute_force_examples() {
        let budget = DEFAULT_ORACLE_BUDGET;
        assert_eq!(brute_force_hurwitz(&q(0, 2, &["2", "2"]), budget).unwrap(), frac(1, 2));
        assert_eq!(brute_force_hurwitz(&q(1, 2, &[]), budget).unwrap(), frac(2, 1));
        assert_eq!(
            brute_force_hurwitz(&q(0, 3, &["3", "3", "3"]), budget).unwrap(),
            frac(1, 3)
        );
        assert_eq!(
            brute_force_hurwitz(&q(0, 4, &["3,1", "3,1", "3,1"]), budget).unwrap(),
            frac(4, 3)
        );
    }

    #[test]
    fn empty_genus_zero_is_inverse_factorial() {
        for d in 1..=8 {
            let expected = Rational::new(1.into(), BigInt::from(factorial(d)));
            assert_eq!(classical_hurwitz(&q(0, d, &[])).unwrap(), expected);
        }
    }

    #[test]
    fn errors() {
        assert!(matches!(
            ClassicalQuery::new(0, 4, vec![p("3")]),
            Err(Error::ProfileDegreeMismatch { .. })
        ));
        assert!(matches!(
            classical_hurwitz(&q(0, 13, &[])),
            Err(Error::DegreeOutOfRange { .. })
        ));
        assert!(matches!(
            brute_force_hurwitz(&q(0, 7, &[]), u128::MAX),
            Err(Error::DegreeOutOfRange { .. })
        ));
        assert!(matches!(
            brute_force_hurwitz(&q(2, 5, &[]), 1_000),
            Err(Error::OracleBudgetExceeded { .. })
        ));
    }

    #[test]
    fn genus_zero_spin_count_decomposition() {
        let plain = classical_hurwitz(&q(0, 4, &["3,1", "3,1", "3,1"])).unwrap();
        let degree_one = classical_hurwitz(&q(0, 1, &["1", "1", "1"])).unwrap();
        let degree_three = classical_hurwitz(&q(0, 3, &["3", "3", "3"])).unwrap();
        assert_eq!(plain - rational::int(2) * degree_one * degree_three, frac(2, 3));
    }
}
