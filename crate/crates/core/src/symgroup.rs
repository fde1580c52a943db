//! Symmetric-group data: irreducible characters by Murnaghan–Nakayama,
//! conjugacy classes, and explicit permutations for the brute-force oracle.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::partitions::{factorial, partitions_of, Partition};

pub const MAX_TABLE_DEGREE: u32 = 12;
pub const MAX_ENUMERATION_DEGREE: u32 = 8;
pub const CACHE_FORMAT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CharacterTable {
    d: u32,
    irreps: Vec<Partition>,
    classes: Vec<Partition>,
    /// Row-major: `entries[i * classes.len() + j] = χ_{irreps[i]}(classes[j])`.
    entries: Vec<i64>,
    dims: Vec<i64>,
    irrep_index: HashMap<Partition, usize>,
    class_index: HashMap<Partition, usize>,
}

impl CharacterTable {
    fn from_entries(d: u32, irreps: Vec<Partition>, classes: Vec<Partition>, entries: Vec<i64>) -> Self {
        let identity = classes
            .iter()
            .position(Partition::is_trivial)
            .expect("identity class present");
        let n = classes.len();
        let dims = (0..irreps.len()).map(|i| entries[i * n + identity]).collect();
        let irrep_index = irreps.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        let class_index = classes.iter().cloned().enumerate().map(|(i, p)| (p, i)).collect();
        CharacterTable {
            d,
            irreps,
            classes,
            entries,
            dims,
            irrep_index,
            class_index,
        }
    }

    pub fn degree(&self) -> u32 {
        self.d
    }

    pub fn irreps(&self) -> &[Partition] {
        &self.irreps
    }

    pub fn classes(&self) -> &[Partition] {
        &self.classes
    }

    pub fn entries(&self) -> &[i64] {
        &self.entries
    }

    /// `χ_λ(μ)`; panics if either label is not a partition of `d`.
    pub fn chi(&self, irrep: &Partition, class: &Partition) -> i64 {
        self.chi_at(self.irrep_index[irrep], self.class_index[class])
    }

    pub fn chi_at(&self, irrep: usize, class: usize) -> i64 {
        self.entries[irrep * self.classes.len() + class]
    }

    pub fn dim(&self, irrep: &Partition) -> i64 {
        self.dims[self.irrep_index[irrep]]
    }

    pub fn dim_at(&self, irrep: usize) -> i64 {
        self.dims[irrep]
    }

    pub fn class_position(&self, class: &Partition) -> Option<usize> {
        self.class_index.get(class).copied()
    }
}

fn check_table_degree(d: u32, max: u32) -> Result<()> {
    if d == 0 || d > max {
        return Err(Error::DegreeOutOfRange { d, min: 1, max });
    }
    Ok(())
}

/// Builds the full character table of `S_d`, rows and columns in descending
/// lexicographic order.
pub fn character_table(d: u32) -> Result<CharacterTable> {
    check_table_degree(d, MAX_TABLE_DEGREE)?;
    let labels = partitions_of(d)?;
    let mut memo = MnMemo::default();
    let mut entries = Vec::with_capacity(labels.len() * labels.len());
    for irrep in &labels {
        for class in &labels {
            entries.push(memo.character(irrep.parts(), class.parts()));
        }
    }
    Ok(CharacterTable::from_entries(d, labels.clone(), labels, entries))
}

/// Memoized Murnaghan–Nakayama on (shape, remaining cycle lengths).
#[derive(Default)]
struct MnMemo {
    cache: HashMap<(Vec<u32>, Vec<u32>), i64>,
}

impl MnMemo {
    fn character(&mut self, shape: &[u32], cycles: &[u32]) -> i64 {
        if cycles.is_empty() {
            return if shape.is_empty() { 1 } else { 0 };
        }
        let key = (shape.to_vec(), cycles.to_vec());
        if let Some(&v) = self.cache.get(&key) {
            return v;
        }
        let (&r, rest) = cycles.split_first().expect("non-empty");
        let mut total = 0;
        for (sign, smaller) in remove_rim_hooks(shape, r) {
            total += sign * self.character(&smaller, rest);
        }
        self.cache.insert(key, total);
        total
    }
}

/// All shapes obtained by removing a rim hook of length `r`, with the
/// hook's sign `(−1)^{height}`. Works on the beta-set (first-column hook
/// lengths): removing a rim hook of length `r` moves one bead from `b` to
/// `b − r`, and the height is the number of beads strictly in between.
fn remove_rim_hooks(shape: &[u32], r: u32) -> Vec<(i64, Vec<u32>)> {
    let len = shape.len() as u32;
    let beta: Vec<u32> = shape
        .iter()
        .enumerate()
        .map(|(i, &part)| part + (len - 1 - i as u32))
        .collect();
    let mut out = Vec::new();
    for (i, &b) in beta.iter().enumerate() {
        if b < r || beta.contains(&(b - r)) {
            continue;
        }
        let target = b - r;
        let height = beta.iter().filter(|&&x| x > target && x < b).count();
        let mut moved = beta.clone();
        moved[i] = target;
        moved.sort_unstable_by(|a, b| b.cmp(a));
        let shape: Vec<u32> = moved
            .iter()
            .enumerate()
            .map(|(j, &x)| x - (len - 1 - j as u32))
            .filter(|&p| p > 0)
            .collect();
        let sign = if height % 2 == 0 { 1 } else { -1 };
        out.push((sign, shape));
    }
    out
}

/// `|C_μ| = d!/z_μ`.
pub fn class_size(d: u32, class: &Partition) -> Result<u64> {
    if class.degree() != d {
        return Err(Error::ProfileDegreeMismatch {
            profile: class.to_string(),
            expected: d,
            actual: class.degree(),
        });
    }
    Ok(factorial(d) / class.centralizer_order())
}

// ---------------------------------------------------------------------------
// Process-wide and on-disk caching

fn memory_cache() -> &'static Mutex<HashMap<u32, Arc<CharacterTable>>> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<CharacterTable>>>> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Shared table for `d`, built at most once per process. When `cache_dir`
/// is given, a valid on-disk table is loaded instead of recomputing, and a
/// freshly built one is written back.
pub fn shared_table(d: u32, cache_dir: Option<&Path>) -> Result<Arc<CharacterTable>> {
    check_table_degree(d, MAX_TABLE_DEGREE)?;
    if let Some(t) = memory_cache().lock().unwrap().get(&d) {
        return Ok(Arc::clone(t));
    }
    let table = match cache_dir {
        Some(dir) => match load_cached_table(dir, d) {
            Some(t) => t,
            None => {
                let t = character_table(d)?;
                // an unwritable cache directory only costs a recomputation later
                let _ = store_cached_table(dir, &t);
                t
            }
        },
        None => character_table(d)?,
    };
    let table = Arc::new(table);
    memory_cache()
        .lock()
        .unwrap()
        .entry(d)
        .or_insert_with(|| Arc::clone(&table));
    Ok(table)
}

#[derive(Serialize, Deserialize)]
pub struct CacheFile {
    pub version: u32,
    pub d: u32,
    pub irreps: Vec<Partition>,
    pub classes: Vec<Partition>,
    pub entries: Vec<i64>,
}

pub fn cache_path(dir: &Path, d: u32) -> std::path::PathBuf {
    dir.join(format!("chartab-v{CACHE_FORMAT_VERSION}-d{d}.json"))
}

/// Reads a cached table; anything missing, stale or malformed yields `None`.
pub fn load_cached_table(dir: &Path, d: u32) -> Option<CharacterTable> {
    let text = fs::read_to_string(cache_path(dir, d)).ok()?;
    let file: CacheFile = serde_json::from_str(&text).ok()?;
    let labels = partitions_of(d).ok()?;
    if file.version != CACHE_FORMAT_VERSION
        || file.d != d
        || file.irreps != labels
        || file.classes != labels
        || file.entries.len() != labels.len() * labels.len()
    {
        return None;
    }
    let table = CharacterTable::from_entries(d, file.irreps, file.classes, file.entries);
    table_invariants_hold(&table).then_some(table)
}

/// Dimension sum, row orthogonality and column orthogonality, all exact.
pub fn table_invariants_hold(table: &CharacterTable) -> bool {
    let d = table.d;
    let order = factorial(d) as i128;
    let n = table.classes.len();
    let dim_square_sum: i128 = table.dims.iter().map(|&x| (x as i128).pow(2)).sum();
    if dim_square_sum != order {
        return false;
    }
    let sizes: Vec<i128> = table
        .classes
        .iter()
        .map(|mu| order / mu.centralizer_order() as i128)
        .collect();
    for a in 0..n {
        for b in a..n {
            let rows: i128 = (0..n)
                .map(|j| sizes[j] * table.chi_at(a, j) as i128 * table.chi_at(b, j) as i128)
                .sum();
            if rows != if a == b { order } else { 0 } {
                return false;
            }
            let cols: i128 = (0..n)
                .map(|i| table.chi_at(i, a) as i128 * table.chi_at(i, b) as i128)
                .sum();
            let z = table.classes[a].centralizer_order() as i128;
            if cols != if a == b { z } else { 0 } {
                return false;
            }
        }
    }
    true
}

/// Writes via a temporary file in the same directory and an atomic rename.
pub fn store_cached_table(dir: &Path, table: &CharacterTable) -> Result<()> {
    let io = |e: std::io::Error| Error::Cache(e.to_string());
    fs::create_dir_all(dir).map_err(io)?;
    let file = CacheFile {
        version: CACHE_FORMAT_VERSION,
        d: table.d,
        irreps: table.irreps.clone(),
        classes: table.classes.clone(),
        entries: table.entries.clone(),
    };
    let json = serde_json::to_string(&file).map_err(|e| Error::Cache(e.to_string()))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(json.as_bytes()).map_err(io)?;
    tmp.persist(cache_path(dir, table.d))
        .map_err(|e| Error::Cache(e.to_string()))?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Permutations

/// A permutation of `{0, …, d−1}` given by its images.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm {
    images: Vec<u8>,
}

impl Perm {
    pub fn new(images: Vec<u8>) -> Result<Self> {
        let mut seen = vec![false; images.len()];
        for &x in &images {
            let slot = seen
                .get_mut(x as usize)
                .ok_or_else(|| Error::InvalidArgument(format!("{images:?} is not a bijection")))?;
            if *slot {
                return Err(Error::InvalidArgument(format!("{images:?} is not a bijection")));
            }
            *slot = true;
        }
        Ok(Perm { images })
    }

    pub fn identity(d: usize) -> Self {
        Perm {
            images: (0..d as u8).collect(),
        }
    }

    pub fn images(&self) -> &[u8] {
        &self.images
    }

    pub fn degree(&self) -> usize {
        self.images.len()
    }

    pub fn apply(&self, i: usize) -> usize {
        self.images[i] as usize
    }

    pub fn inverse(&self) -> Perm {
        let mut images = vec![0; self.images.len()];
        for (i, &x) in self.images.iter().enumerate() {
            images[x as usize] = i as u8;
        }
        Perm { images }
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i == x as usize)
    }
}

/// `(a∘b)(i) = a(b(i))`.
pub fn compose(a: &Perm, b: &Perm) -> Perm {
    assert_eq!(a.degree(), b.degree(), "degree mismatch");
    Perm {
        images: b.images.iter().map(|&x| a.images[x as usize]).collect(),
    }
}

/// `[a, b] = a b a⁻¹ b⁻¹`.
pub fn commutator(a: &Perm, b: &Perm) -> Perm {
    compose(&compose(a, b), &compose(&a.inverse(), &b.inverse()))
}

pub fn cycle_type(p: &Perm) -> Partition {
    let d = p.degree();
    let mut seen = vec![false; d];
    let mut lengths = Vec::new();
    for start in 0..d {
        if seen[start] {
            continue;
        }
        let mut len = 0;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = p.apply(i);
            len += 1;
        }
        lengths.push(len);
    }
    Partition::new(lengths).expect("cycle lengths form a partition")
}

/// All permutations of `d` letters in lexicographic order of images.
pub fn all_perms(d: u32) -> Result<Vec<Perm>> {
    check_table_degree(d, MAX_ENUMERATION_DEGREE)?;
    let mut current: Vec<u8> = (0..d as u8).collect();
    let mut out = Vec::with_capacity(factorial(d) as usize);
    loop {
        out.push(Perm {
            images: current.clone(),
        });
        if !next_permutation(&mut current) {
            break;
        }
    }
    Ok(out)
}

fn next_permutation(v: &mut [u8]) -> bool {
    let Some(i) = v.windows(2).rposition(|w| w[0] < w[1]) else {
        return false;
    };
    let j = v.iter().rposition(|&x| x > v[i]).expect("successor exists");
    v.swap(i, j);
    v[i + 1..].reverse();
    true
}

/// Every permutation of cycle type `class`, refusing classes larger than `budget`.
pub fn enumerate_class(d: u32, class: &Partition, budget: u128) -> Result<Vec<Perm>> {
    check_table_degree(d, MAX_ENUMERATION_DEGREE)?;
    let size = class_size(d, class)? as u128;
    if size > budget {
        return Err(Error::OracleBudgetExceeded {
            needed: size,
            budget,
        });
    }
    Ok(all_perms(d)?
        .into_iter()
        .filter(|p| &cycle_type(p) == class)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Partition {
        s.parse().unwrap()
    }

    #[test]
    fn s3_and_s4_entries() {
        let t3 = character_table(3).unwrap();
        assert_eq!(t3.chi(&p("2,1"), &p("3")), -1);
        for mu in t3.classes() {
            assert_eq!(t3.chi(&p("3"), mu), 1);
        }
        let t4 = character_table(4).unwrap();
        assert_eq!(t4.chi(&p("2,2"), &p("3,1")), -1);
        assert_eq!(t4.dim(&p("2,2")), 2);
        assert_eq!(t4.dim(&p("3,1")), 3);
        // sign representation
        for mu in t4.classes() {
            let sign = if (4 - mu.len()) % 2 == 0 { 1 } else { -1 };
            assert_eq!(t4.chi(&p("1^4"), mu), sign);
        }
    }

    #[test]
    fn degree_guard() {
        assert!(matches!(character_table(0), Err(Error::DegreeOutOfRange { .. })));
        assert!(matches!(character_table(13), Err(Error::DegreeOutOfRange { .. })));
        assert!(matches!(all_perms(9), Err(Error::DegreeOutOfRange { .. })));
    }

    #[test]
    fn dimensions_square_sum_up_to_twelve() {
        for d in 1..=12 {
            let t = character_table(d).unwrap();
            let s: i64 = (0..t.irreps().len()).map(|i| t.dim_at(i).pow(2)).sum();
            assert_eq!(s as u64, factorial(d), "d={d}");
        }
    }

    #[test]
    fn orthogonality_up_to_ten() {
        for d in 1..=10 {
            assert!(table_invariants_hold(&character_table(d).unwrap()), "d={d}");
        }
    }

    #[test]
    fn class_sizes() {
        assert_eq!(class_size(4, &p("3,1")).unwrap(), 8);
        assert_eq!(class_size(4, &p("1^4")).unwrap(), 1);
        assert_eq!(class_size(4, &p("2,2")).unwrap(), 3);
        assert!(class_size(4, &p("3")).is_err());
    }

    #[test]
    fn permutation_basics() {
        assert_eq!(cycle_type(&Perm::identity(4)), p("1^4"));
        let threes = enumerate_class(3, &p("3"), 1_000).unwrap();
        assert_eq!(threes.len(), 2);
        let square = compose(&threes[0], &threes[0]);
        assert_eq!(cycle_type(&square), p("3"));
        assert_eq!(square, threes[1]);
        assert!(compose(&threes[0], &threes[1]).is_identity());
        for q in all_perms(4).unwrap() {
            assert!(compose(&q, &q.inverse()).is_identity());
        }
        assert!(Perm::new(vec![0, 0]).is_err());
        assert!(Perm::new(vec![0, 2]).is_err());
    }

    #[test]
    fn commutator_of_commuting_pair_is_identity() {
        let a = Perm::new(vec![1, 0, 3, 2]).unwrap();
        let b = Perm::new(vec![2, 3, 0, 1]).unwrap();
        assert!(commutator(&a, &b).is_identity());
        let c = Perm::new(vec![1, 2, 0, 3]).unwrap();
        assert!(!commutator(&a, &c).is_identity());
    }

    #[test]
    fn class_enumeration_matches_sizes() {
        for d in 1..=6 {
            for mu in partitions_of(d).unwrap() {
                let members = enumerate_class(d, &mu, u128::MAX).unwrap();
                assert_eq!(members.len() as u64, class_size(d, &mu).unwrap(), "{mu}");
            }
        }
        assert!(matches!(
            enumerate_class(5, &p("5"), 10),
            Err(Error::OracleBudgetExceeded { needed: 24, budget: 10 })
        ));
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let t = character_table(5).unwrap();
        store_cached_table(dir.path(), &t).unwrap();
        assert_eq!(load_cached_table(dir.path(), 5).unwrap(), t);
        assert!(load_cached_table(dir.path(), 6).is_none());
        fs::write(cache_path(dir.path(), 5), "{\"version\":1}").unwrap();
        assert!(load_cached_table(dir.path(), 5).is_none());
    }

    #[test]
    fn corrupt_cache_entries_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let mut t = character_table(4).unwrap();
        // χ_(4)((3,1)): dimensions stay valid, orthogonality breaks
        t.entries[1] = 2;
        store_cached_table(dir.path(), &t).unwrap();
        assert!(load_cached_table(dir.path(), 4).is_none());
    }
}
