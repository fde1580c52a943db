//! Spin Hurwitz numbers `H^{h,p}_{m¹,…,m^k}`.
//!
//! Values are computed by repeated handle removal
//!
//! ```text
//! H^{h,p}_{m¹…m^k} = Σ_{m odd ⊢ d} |m|·m! · H^{h−1,p}_{m,m,m¹…m^k}   (h ≥ 2 or (h,p) = (1,even))
//! ```
//!
//! until the genus drops to 0 (even parity) or 1 (odd parity), where a
//! [`BaseProvider`] must answer. The built-in provider covers every degree
//! up to 4. The genus-splitting identity is exposed as
//! [`SpinEngine::split_spin_hurwitz`] so it can be checked against the
//! direct value, and the local GT invariants are evaluated as chains of
//! genus-1 odd-parity numbers in [`SpinEngine::gt_local`].

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::{Arc, OnceLock, RwLock};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::partitions::{check_profiles, odd_partitions_of, Partition, MAX_DEGREE};
use crate::rational::{self, frac, int, pow_int, Rational};

/// Parity of a theta characteristic: even is the `+` sign, odd the `−` sign.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub const BOTH: [Parity; 2] = [Parity::Even, Parity::Odd];

    pub fn from_bit(bit: u32) -> Parity {
        if bit.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn bit(self) -> u32 {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }

    /// `(−1)^bit`.
    pub fn sign(self) -> i64 {
        match self {
            Parity::Even => 1,
            Parity::Odd => -1,
        }
    }

    /// Parity of a glued curve: bits add mod 2.
    pub fn combine(self, other: Parity) -> Parity {
        Parity::from_bit(self.bit() + other.bit())
    }

    pub fn symbol(self) -> char {
        match self {
            Parity::Even => '+',
            Parity::Odd => '-',
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

impl FromStr for Parity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "even" | "+" | "0" => Ok(Parity::Even),
            "odd" | "-" | "1" => Ok(Parity::Odd),
            other => Err(Error::InvalidArgument(format!(
                "parity must be even|odd (or +|-), got {other:?}"
            ))),
        }
    }
}

/// Argument of `H^{h,p}_{m¹,…,m^k}`: genus, parity, degree, odd profiles.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpinQuery {
    h: u32,
    parity: Parity,
    d: u32,
    profiles: Vec<Partition>,
}

impl SpinQuery {
    pub fn new(h: u32, parity: Parity, d: u32, profiles: Vec<Partition>) -> Result<Self> {
        if d == 0 || d > MAX_DEGREE {
            return Err(Error::DegreeOutOfRange {
                d,
                min: 1,
                max: MAX_DEGREE,
            });
        }
        check_profiles(d, &profiles)?;
        if let Some(m) = profiles.iter().find(|m| !m.is_odd()) {
            return Err(Error::NotOddProfile(m.to_string()));
        }
        if h == 0 && parity == Parity::Odd {
            return Err(Error::UnrealizableSpinStructure);
        }
        Ok(SpinQuery {
            h,
            parity,
            d,
            profiles,
        })
    }

    /// Etale query `H^{h,p}_d` (no branch points).
    pub fn etale(h: u32, parity: Parity, d: u32) -> Result<Self> {
        SpinQuery::new(h, parity, d, Vec::new())
    }

    pub fn genus(&self) -> u32 {
        self.h
    }

    pub fn parity(&self) -> Parity {
        self.parity
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    pub fn profiles(&self) -> &[Partition] {
        &self.profiles
    }

    /// Drops trivial profiles `(1^d)` and sorts the rest (largest first).
    /// Inserting or removing trivial profiles never changes the value.
    pub fn normalize(&self) -> SpinQuery {
        let mut profiles: Vec<Partition> = self
            .profiles
            .iter()
            .filter(|m| !m.is_trivial())
            .cloned()
            .collect();
        profiles.sort_unstable_by(|a, b| b.cmp(a));
        SpinQuery {
            profiles,
            ..self.clone()
        }
    }

    pub fn is_normalized(&self) -> bool {
        *self == self.normalize()
    }

    fn with_profiles(&self, h: u32, parity: Parity, profiles: Vec<Partition>) -> Result<SpinQuery> {
        SpinQuery::new(h, parity, self.d, profiles).map(|q| q.normalize())
    }
}

impl fmt::Display for SpinQuery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "H^{{{},{}}}_{{d={}}}[", self.h, self.parity.symbol(), self.d)?;
        for (i, m) in self.profiles.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            f.write_str(&m.label())?;
        }
        f.write_str("]")
    }
}

/// Source of base values for genus 0 (even) and genus 1 (odd) queries.
///
/// Engines consult providers in registration order and only ever pass
/// valid, normalized queries.
pub trait BaseProvider: Send + Sync {
    fn name(&self) -> &str;
    fn lookup(&self, q: &SpinQuery) -> Option<Rational>;
}

/// Base values for degrees 1 through 4.
///
/// Degrees 3 and 4 have exactly one nontrivial odd partition, `(3)` and
/// `(3,1)`, so a normalized query there is determined by its insertion
/// count `k`.
#[derive(Clone, Copy, Debug, Default)]
pub struct BuiltinBaseTable;

impl BaseProvider for BuiltinBaseTable {
    fn name(&self) -> &str {
        "builtin"
    }

    fn lookup(&self, q: &SpinQuery) -> Option<Rational> {
        let nontrivial = match q.d {
            3 => Some(Partition::new(vec![3]).ok()?),
            4 => Some(Partition::new(vec![3, 1]).ok()?),
            _ => None,
        };
        if q.profiles.iter().any(|m| Some(m) != nontrivial.as_ref()) {
            return None;
        }
        let k = q.profiles.len() as i64;
        let alt = |base: i64, exp: i64| int(if k % 2 == 0 { 1 } else { -1 }) * pow_int(base, exp);
        use Parity::{Even, Odd};
        let value = match (q.d, q.h, q.parity) {
            (1, 0, Even) => int(1),
            (1, 1, p) => int(p.sign()),
            // (−1)^p·2^{h−1}
            (2, 0, Even) => frac(1, 2),
            (2, 1, p) => int(p.sign()),
            // 3^{−2}[(−1)^k 2^{k−1} + 1]
            (3, 0, Even) => pow_int(3, -2) * (alt(2, k - 1) + int(1)),
            // (−1)^k 2^k − 1
            (3, 1, Odd) => alt(2, k) - int(1),
            (4, 0, Even) if k == 0 => frac(1, 24),
            // −(1/18)[(−1)^{k−1} 2^{k−1} − 4^{k−1}]
            (4, 0, Even) => -frac(1, 18) * (-alt(2, k - 1) - pow_int(4, k - 1)),
            // (−1)^k 2^k − 4^k
            (4, 1, Odd) => alt(2, k) - pow_int(4, k),
            _ => return None,
        };
        Some(value)
    }
}

/// One node of a derivation trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Derivation {
    pub rule: String,
    pub query: String,
    pub value: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub terms: Vec<DerivationTerm>,
}

/// A summand `z_m · H(...)` of a handle-removal step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DerivationTerm {
    pub inserted: String,
    pub coefficient: u64,
    pub derivation: Derivation,
}

/// Recursion engine with an ordered provider list and an optional memo.
pub struct SpinEngine {
    providers: Vec<Arc<dyn BaseProvider>>,
    memo: Option<RwLock<HashMap<SpinQuery, Rational>>>,
}

impl Default for SpinEngine {
    fn default() -> Self {
        SpinEngine::new()
    }
}

impl SpinEngine {
    /// Engine with the built-in degree ≤ 4 table and memoization on.
    pub fn new() -> Self {
        SpinEngine {
            providers: vec![Arc::new(BuiltinBaseTable)],
            memo: Some(RwLock::new(HashMap::new())),
        }
    }

    /// Same providers, no memo.
    pub fn without_memo() -> Self {
        SpinEngine {
            memo: None,
            ..SpinEngine::new()
        }
    }

    /// Engine with no providers at all; every query bottoms out in
    /// `BaseCaseUnavailable` until one is registered.
    pub fn empty() -> Self {
        SpinEngine {
            providers: Vec::new(),
            memo: Some(RwLock::new(HashMap::new())),
        }
    }

    /// Appends a provider; it is consulted after the ones already present.
    pub fn register(&mut self, provider: Arc<dyn BaseProvider>) {
        self.providers.push(provider);
        if let Some(memo) = &self.memo {
            memo.write().unwrap().clear();
        }
    }

    pub fn provider_names(&self) -> Vec<String> {
        self.providers.iter().map(|p| p.name().to_string()).collect()
    }

    pub fn spin_hurwitz(&self, q: &SpinQuery) -> Result<Rational> {
        self.eval(&q.normalize())
    }

    fn eval(&self, q: &SpinQuery) -> Result<Rational> {
        if let Some(memo) = &self.memo {
            if let Some(v) = memo.read().unwrap().get(q) {
                return Ok(v.clone());
            }
        }
        let value = match self.base_value(q) {
            Some((_, v)) => v,
            None => {
                let mut total = rational::zero();
                for (m, subquery) in self.handle_removal_terms(q)? {
                    total += int(m.centralizer_order() as i64) * self.eval(&subquery)?;
                }
                total
            }
        };
        if let Some(memo) = &self.memo {
            memo.write().unwrap().entry(q.clone()).or_insert_with(|| value.clone());
        }
        Ok(value)
    }

    fn base_value(&self, q: &SpinQuery) -> Option<(&str, Rational)> {
        self.providers
            .iter()
            .find_map(|p| p.lookup(q).map(|v| (p.name(), v)))
    }

    /// Subqueries of one handle-removal step, or `BaseCaseUnavailable` when
    /// the step does not apply.
    fn handle_removal_terms(&self, q: &SpinQuery) -> Result<Vec<(Partition, SpinQuery)>> {
        let applies = q.h >= 2 || (q.h == 1 && q.parity == Parity::Even);
        if !applies {
            return Err(Error::BaseCaseUnavailable(q.to_string()));
        }
        odd_partitions_of(q.d)?
            .into_iter()
            .map(|m| {
                let mut profiles = vec![m.clone(), m.clone()];
                profiles.extend(q.profiles.iter().cloned());
                Ok((m, q.with_profiles(q.h - 1, q.parity, profiles)?))
            })
            .collect()
    }

    /// Value plus the full derivation tree. The memo is not consulted, so
    /// the tree does not depend on earlier calls.
    pub fn explain(&self, q: &SpinQuery) -> Result<(Rational, Derivation)> {
        self.explain_normalized(&q.normalize())
    }

    fn explain_normalized(&self, q: &SpinQuery) -> Result<(Rational, Derivation)> {
        if let Some((name, v)) = self.base_value(q) {
            let node = Derivation {
                rule: format!("base:{name}"),
                query: q.to_string(),
                value: rational::to_ratio_string(&v),
                terms: Vec::new(),
            };
            return Ok((v, node));
        }
        let mut total = rational::zero();
        let mut terms = Vec::new();
        for (m, subquery) in self.handle_removal_terms(q)? {
            let z = m.centralizer_order();
            let (v, child) = self.explain_normalized(&subquery)?;
            total += int(z as i64) * v;
            terms.push(DerivationTerm {
                inserted: m.label(),
                coefficient: z,
                derivation: child,
            });
        }
        let node = Derivation {
            rule: "handle-removal".into(),
            query: q.to_string(),
            value: rational::to_ratio_string(&total),
            terms,
        };
        Ok((total, node))
    }

    /// Genus-splitting evaluation
    /// `Σ_m |m|·m! · H^{h1,p1}_{m¹…m^{k0},m} · H^{h2,p2}_{m,m^{k0+1}…m^k}`,
    /// with the profiles of `q` taken in normalized order.
    pub fn split_spin_hurwitz(&self, q: &SpinQuery, split: Split) -> Result<Rational> {
        let q = q.normalize();
        split.validate(&q)?;
        let (left, right) = q.profiles.split_at(split.k0);
        let mut total = rational::zero();
        for m in odd_partitions_of(q.d)? {
            let mut left_profiles = left.to_vec();
            left_profiles.push(m.clone());
            let mut right_profiles = vec![m.clone()];
            right_profiles.extend(right.iter().cloned());
            let a = self.eval(&q.with_profiles(split.h1, split.p1, left_profiles)?)?;
            let b = self.eval(&q.with_profiles(split.h2, split.p2, right_profiles)?)?;
            total += int(m.centralizer_order() as i64) * a * b;
        }
        Ok(total)
    }

    /// Local GT invariant `GT^{loc,h,p}_d`, evaluated as a chain of genus-1
    /// odd-parity numbers. When `h ≢ p (mod 2)` one handle is removed first
    /// and the chain runs at genus `h − 1` with the two new insertions at
    /// its top end.
    pub fn gt_local(&self, h: u32, parity: Parity, d: u32) -> Result<Rational> {
        if h < 2 {
            return Err(Error::InvalidArgument(format!(
                "local GT chains need genus at least 2, got {h}"
            )));
        }
        SpinQuery::etale(h, parity, d)?;
        if h % 2 == parity.bit() {
            return self.odd_chain(h, d, Vec::new());
        }
        let mut total = rational::zero();
        for m in odd_partitions_of(d)? {
            let z = int(m.centralizer_order() as i64);
            total += z * self.odd_chain(h - 1, d, vec![m.clone(), m])?;
        }
        Ok(total)
    }

    /// `Σ Π z_{m^i} · H_{top,m^{g−1}} · H_{m^{g−1},m^{g−2}} ⋯ H_{m²,m¹} · H_{m¹}`
    /// with `H = H^{1,odd}`; a chain of `g` genus-1 pieces.
    fn odd_chain(&self, g: u32, d: u32, top: Vec<Partition>) -> Result<Rational> {
        let genus_one = |profiles: Vec<Partition>| -> Result<Rational> {
            self.spin_hurwitz(&SpinQuery::new(1, Parity::Odd, d, profiles)?)
        };
        if g == 1 {
            return genus_one(top);
        }
        let odd = odd_partitions_of(d)?;
        let weights: Vec<Rational> = odd.iter().map(|m| int(m.centralizer_order() as i64)).collect();
        // chain[j]: value of the partial chain ending in odd[j] (not yet weighted)
        let mut chain = odd
            .iter()
            .map(|m| genus_one(vec![m.clone()]))
            .collect::<Result<Vec<_>>>()?;
        for _ in 0..g - 2 {
            let mut next = Vec::with_capacity(odd.len());
            for upper in &odd {
                let mut acc = rational::zero();
                for (j, lower) in odd.iter().enumerate() {
                    acc += &weights[j] * genus_one(vec![upper.clone(), lower.clone()])? * &chain[j];
                }
                next.push(acc);
            }
            chain = next;
        }
        let mut total = rational::zero();
        for (j, m) in odd.iter().enumerate() {
            let mut profiles = top.clone();
            profiles.push(m.clone());
            total += &weights[j] * genus_one(profiles)? * &chain[j];
        }
        Ok(total)
    }
}

/// A genus/parity decomposition `h = h1 + h2`, `p = p1 + p2`, with the
/// first `k0` insertions on the `(h1, p1)` side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Split {
    pub h1: u32,
    pub p1: Parity,
    pub h2: u32,
    pub p2: Parity,
    pub k0: usize,
}

impl Split {
    fn validate(&self, q: &SpinQuery) -> Result<()> {
        if self.h1 + self.h2 != q.h {
            return Err(Error::InvalidSplit(format!(
                "genera {} + {} do not add up to {}",
                self.h1, self.h2, q.h
            )));
        }
        if self.p1.combine(self.p2) != q.parity {
            return Err(Error::InvalidSplit(format!(
                "parities {} + {} do not combine to {}",
                self.p1, self.p2, q.parity
            )));
        }
        if (self.h1 == 0 && self.p1 == Parity::Odd) || (self.h2 == 0 && self.p2 == Parity::Odd) {
            return Err(Error::InvalidSplit("a genus-0 piece must have even parity".into()));
        }
        if self.k0 > q.profiles.len() {
            return Err(Error::InvalidSplit(format!(
                "k0 = {} exceeds the {} nontrivial insertions",
                self.k0,
                q.profiles.len()
            )));
        }
        Ok(())
    }

    /// Every admissible split of a normalized query.
    pub fn all_for(q: &SpinQuery) -> Vec<Split> {
        let q = q.normalize();
        let mut out = Vec::new();
        for h1 in 0..=q.h {
            for p1 in Parity::BOTH {
                let split = Split {
                    h1,
                    p1,
                    h2: q.h - h1,
                    p2: Parity::from_bit(q.parity.bit() + p1.bit()),
                    k0: 0,
                };
                for k0 in 0..=q.profiles.len() {
                    let s = Split { k0, ..split };
                    if s.validate(&q).is_ok() {
                        out.push(s);
                    }
                }
            }
        }
        out
    }
}

fn default_engine() -> &'static SpinEngine {
    static ENGINE: OnceLock<SpinEngine> = OnceLock::new();
    ENGINE.get_or_init(SpinEngine::new)
}

/// [`SpinEngine::spin_hurwitz`] on a shared process-wide engine.
pub fn spin_hurwitz(q: &SpinQuery) -> Result<Rational> {
    default_engine().spin_hurwitz(q)
}

pub fn split_spin_hurwitz(q: &SpinQuery, split: Split) -> Result<Rational> {
    default_engine().split_spin_hurwitz(q, split)
}

pub fn gt_local(h: u32, parity: Parity, d: u32) -> Result<Rational> {
    default_engine().gt_local(h, parity, d)
}

pub fn normalize(q: &SpinQuery) -> SpinQuery {
    q.normalize()
}

/// Central-character values `f_(3)` at the two odd degree-4 partitions,
/// plus the shifted power sums it is built from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CentralCharacterData {
    pub f3_at_31: i64,
    pub f3_at_4: i64,
}

impl Default for CentralCharacterData {
    fn default() -> Self {
        CentralCharacterData {
            f3_at_31: -4,
            f3_at_4: 8,
        }
    }
}

impl CentralCharacterData {
    /// `p₁(m) = d − 1/24`.
    pub fn p1(m: &Partition) -> Rational {
        int(m.degree() as i64) - frac(1, 24)
    }

    /// `p₃(m) = Σ m_j³ − 1/240`.
    pub fn p3(m: &Partition) -> Rational {
        let cubes: i64 = m.parts().iter().map(|&x| (x as i64).pow(3)).sum();
        int(cubes) - frac(1, 240)
    }

    /// `2^{−k}(f(31)^k − f(4)^k) = (−1)^k 2^k − 4^k`, checked exactly.
    pub fn identity_holds(&self, k: u32) -> bool {
        let lhs = eop_genus1(k, self);
        let sign = if k.is_multiple_of(2) { 1 } else { -1 };
        lhs == int(sign) * pow_int(2, k as i64) - pow_int(4, k as i64)
    }
}

/// `H^{1,odd}_{(31)^k} = 2^{−k}[f_(3)(31)^k − f_(3)(4)^k]`.
pub fn eop_genus1(k: u32, data: &CentralCharacterData) -> Rational {
    let k = k as i64;
    pow_int(2, -k) * (pow_int(data.f3_at_31, k) - pow_int(data.f3_at_4, k))
}
