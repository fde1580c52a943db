//! Property suites run by `shw verify` and by the acceptance tests.
//!
//! Each suite returns a [`SuiteReport`] listing how many exact (or
//! tolerance-bounded) comparisons it made and which ones failed. Closed
//! forms used as references here are written out independently of the base
//! table in [`crate::spin`].

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::hurwitz::{brute_force_hurwitz, brute_force_cost, classical_hurwitz, ClassicalQuery};
use crate::partitions::{factorial, odd_partitions_of, partitions_of, Partition};
use crate::rational::{self, frac, int, pow_int, Rational};
use crate::spin::{self, CentralCharacterData, Parity, SpinEngine, SpinQuery, Split};
use crate::symgroup::{character_table, class_size, enumerate_class, table_invariants_hold};
use crate::trflow::{self, BlockKind};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Partitions,
    Characters,
    Frobenius,
    Split,
    Handle,
    Gt,
    Trflow,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Partitions,
        Suite::Characters,
        Suite::Frobenius,
        Suite::Split,
        Suite::Handle,
        Suite::Gt,
        Suite::Trflow,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Partitions => "partitions",
            Suite::Characters => "characters",
            Suite::Frobenius => "frobenius",
            Suite::Split => "split",
            Suite::Handle => "handle",
            Suite::Gt => "gt",
            Suite::Trflow => "trflow",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|suite| suite.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown suite {s:?}")))
    }
}

#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub degree_max: u32,
    pub genus_max: u32,
    pub oracle_budget: u128,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            degree_max: 4,
            genus_max: 5,
            oracle_budget: crate::hurwitz::DEFAULT_ORACLE_BUDGET,
        }
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub checks: usize,
    pub failures: Vec<String>,
}

impl SuiteReport {
    fn new(suite: Suite) -> Self {
        SuiteReport {
            suite: suite.name().to_string(),
            ..Default::default()
        }
    }

    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }

    fn check(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(describe());
        }
    }

    fn check_eq(&mut self, what: impl fmt::Display, got: Result<Rational>, want: Result<Rational>) {
        self.checks += 1;
        match (got, want) {
            (Ok(g), Ok(w)) if g == w => {}
            (Ok(g), Ok(w)) => self.failures.push(format!(
                "{what}: got {}, expected {}",
                rational::to_ratio_string(&g),
                rational::to_ratio_string(&w)
            )),
            (Err(e), _) | (_, Err(e)) => self.failures.push(format!("{what}: {e}")),
        }
    }
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> SuiteReport {
    match suite {
        Suite::Partitions => partitions_suite(),
        Suite::Characters => characters_suite(),
        Suite::Frobenius => frobenius_suite(opts),
        Suite::Split => split_suite(opts),
        Suite::Handle => handle_suite(opts),
        Suite::Gt => gt_suite(opts),
        Suite::Trflow => trflow_suite(),
    }
}

// ---------------------------------------------------------------------------
// Reference closed forms

/// `3^{2h−2}[(−1)^k 2^{k+h−1} ± 1]`.
pub fn degree3_closed_form(h: u32, parity: Parity, k: u32) -> Rational {
    let (h, k) = (h as i64, k as i64);
    pow_int(3, 2 * h - 2) * (int(alt(k)) * pow_int(2, k + h - 1) + int(parity.sign()))
}

/// `(3!)^{2h−2}·2^k[±2^{k+h−1} + (−1)^k]`.
pub fn degree4_closed_form(h: u32, parity: Parity, k: u32) -> Rational {
    let (h, k) = (h as i64, k as i64);
    pow_int(6, 2 * h - 2) * pow_int(2, k) * (int(parity.sign()) * pow_int(2, k + h - 1) + int(alt(k)))
}

/// `(−1)^p` in degree 1 and `(−1)^p 2^{h−1}` in degree 2.
pub fn low_degree_closed_form(d: u32, h: u32, parity: Parity) -> Rational {
    match d {
        1 => int(parity.sign()),
        2 => int(parity.sign()) * pow_int(2, h as i64 - 1),
        _ => panic!("no low-degree closed form for d = {d}"),
    }
}

fn alt(k: i64) -> i64 {
    if k % 2 == 0 {
        1
    } else {
        -1
    }
}

fn nontrivial_odd(d: u32) -> Partition {
    match d {
        3 => Partition::new(vec![3]).unwrap(),
        4 => Partition::new(vec![3, 1]).unwrap(),
        _ => panic!("degree {d} has no single nontrivial odd partition"),
    }
}

fn repeated(d: u32, k: u32) -> Vec<Partition> {
    vec![nontrivial_odd(d); k as usize]
}

fn spin_at(engine: &SpinEngine, h: u32, parity: Parity, d: u32, profiles: Vec<Partition>) -> Result<Rational> {
    engine.spin_hurwitz(&SpinQuery::new(h, parity, d, profiles)?)
}

fn admissible(h: u32, parity: Parity) -> bool {
    !(h == 0 && parity == Parity::Odd)
}

// ---------------------------------------------------------------------------
// Suites

fn partitions_suite() -> SuiteReport {
    let mut report = SuiteReport::new(Suite::Partitions);
    for d in 1..=10 {
        let all = partitions_of(d).expect("d in range");
        let class_sum: Rational = all
            .iter()
            .map(|m| frac(1, m.centralizer_order() as i64))
            .sum();
        report.check(class_sum == int(1), || format!("class equation fails for d = {d}"));
        for m in &all {
            let by_multiplicity: u64 = m
                .multiplicities()
                .iter()
                .map(|&(k, r)| (k as u64).pow(r) * factorial(r))
                .product();
            report.check(by_multiplicity == m.centralizer_order(), || {
                format!("z_m disagrees for {m}")
            });
            report.check(m.rational_component_count().is_integer(), || {
                format!("|M_m| not integral for {m}")
            });
        }
        for m in odd_partitions_of(d).expect("d in range") {
            report.check(m.is_odd() && all.contains(&m), || format!("bad odd partition {m}"));
        }
    }
    report
}

fn characters_suite() -> SuiteReport {
    let mut report = SuiteReport::new(Suite::Characters);
    for d in 1..=8 {
        match character_table(d) {
            Ok(t) => report.check(table_invariants_hold(&t), || {
                format!("character table invariants fail for d = {d}")
            }),
            Err(e) => report.check(false, || format!("d = {d}: {e}")),
        }
    }
    for d in 1..=6 {
        for mu in partitions_of(d).expect("d in range") {
            let size = class_size(d, &mu).expect("same degree");
            let members = enumerate_class(d, &mu, u128::MAX).map(|v| v.len() as u64);
            report.check(members == Ok(size), || format!("class {mu} of S_{d} has wrong size"));
        }
    }
    report
}

/// All multisets of size `k` drawn from `items`, as sorted index lists.
fn multisets<T: Clone>(items: &[T], k: usize) -> Vec<Vec<T>> {
    fn go<T: Clone>(items: &[T], k: usize, start: usize, cur: &mut Vec<T>, out: &mut Vec<Vec<T>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..items.len() {
            cur.push(items[i].clone());
            go(items, k, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(items, k, 0, &mut Vec::new(), &mut out);
    out
}

fn frobenius_suite(opts: &VerifyOptions) -> SuiteReport {
    let mut report = SuiteReport::new(Suite::Frobenius);
    let mut skipped = 0usize;
    for d in 1..=5 {
        let all = partitions_of(d).expect("d in range");
        for h in 0..=2 {
            for k in 0..=4 {
                for profiles in multisets(&all, k) {
                    let q = ClassicalQuery::new(h, d, profiles).expect("valid query");
                    if brute_force_cost(&q) > opts.oracle_budget {
                        skipped += 1;
                        continue;
                    }
                    let label = format!("H^{h}_d={d}[{}]", crate::partitions::format_profiles(&q.profiles));
                    report.check_eq(&label, classical_hurwitz(&q), brute_force_hurwitz(&q, opts.oracle_budget));

                    let mut padded = q.clone();
                    padded.profiles.push(Partition::ones(d).expect("d in range"));
                    report.check_eq(format!("{label} + trivial"), classical_hurwitz(&padded), classical_hurwitz(&q));
                }
            }
        }
    }
    report.check(skipped == 0 || opts.oracle_budget < crate::hurwitz::DEFAULT_ORACLE_BUDGET, || {
        format!("{skipped} oracle comparisons skipped at the default budget")
    });
    for d in 1..=8 {
        let q = ClassicalQuery::new(0, d, vec![]).expect("valid");
        report.check_eq(
            format!("H^0_d={d}[]"),
            classical_hurwitz(&q),
            Ok(Rational::new(1.into(), factorial(d).into())),
        );
    }
    let p = |s: &str| s.parse::<Partition>().expect("literal");
    let h = |d: u32, profiles: Vec<Partition>| classical_hurwitz(&ClassicalQuery::new(0, d, profiles)?);
    let plain = h(4, vec![p("3,1"); 3]);
    report.check_eq("H^0_(31)^3", plain.clone(), Ok(frac(4, 3)));
    report.check_eq("H^0_(3)^3", h(3, vec![p("3"); 3]), Ok(frac(1, 3)));
    let decomposition = (|| Ok(plain? - int(2) * h(1, vec![p("1"); 3])? * h(3, vec![p("3"); 3])?))();
    report.check_eq("spin decomposition of H^{0,+}_(31)^3", decomposition.clone(), Ok(frac(2, 3)));
    report.check_eq(
        "decomposition vs spin engine",
        decomposition,
        spin::spin_hurwitz(&SpinQuery::new(0, Parity::Even, 4, vec![p("3,1"); 3]).expect("valid")),
    );
    report
}

fn split_suite(opts: &VerifyOptions) -> SuiteReport {
    let mut report = SuiteReport::new(Suite::Split);
    let engine = SpinEngine::new();
    for d in [3, 4].into_iter().filter(|&d| d <= opts.degree_max) {
        for h in 0..=opts.genus_max.min(4) {
            for parity in Parity::BOTH.into_iter().filter(|&p| admissible(h, p)) {
                for k in 0..=3 {
                    let q = SpinQuery::new(h, parity, d, repeated(d, k)).expect("valid");
                    let direct = engine.spin_hurwitz(&q);
                    for split in Split::all_for(&q) {
                        report.check_eq(
                            format!("{q} split {split:?}"),
                            engine.split_spin_hurwitz(&q, split),
                            direct.clone(),
                        );
                    }
                }
            }
        }
    }
    report
}

fn handle_suite(opts: &VerifyOptions) -> SuiteReport {
    let mut report = SuiteReport::new(Suite::Handle);
    let engine = SpinEngine::new();
    let bare = SpinEngine::without_memo();
    let genus_max = opts.genus_max;

    for d in [1, 2].into_iter().filter(|&d| d <= opts.degree_max) {
        for h in 0..=genus_max {
            for parity in Parity::BOTH.into_iter().filter(|&p| admissible(h, p)) {
                report.check_eq(
                    format!("d={d} h={h} {parity}"),
                    spin_at(&engine, h, parity, d, vec![]),
                    Ok(low_degree_closed_form(d, h, parity)),
                );
            }
        }
    }

    for d in [3, 4].into_iter().filter(|&d| d <= opts.degree_max) {
        for h in 0..=genus_max {
            for parity in Parity::BOTH.into_iter().filter(|&p| admissible(h, p)) {
                for k in 0..=8 {
                    let want = if d == 3 {
                        degree3_closed_form(h, parity, k)
                    } else {
                        degree4_closed_form(h, parity, k)
                    };
                    let value = spin_at(&engine, h, parity, d, repeated(d, k));
                    report.check_eq(format!("d={d} h={h} {parity} k={k}"), value.clone(), Ok(want));
                    if k <= 3 {
                        let mut padded = repeated(d, k);
                        padded.insert(0, Partition::ones(d).expect("d in range"));
                        report.check_eq(
                            format!("d={d} h={h} {parity} k={k} + trivial"),
                            spin_at(&engine, h, parity, d, padded),
                            value.clone(),
                        );
                    }
                    if h <= 4 && k <= 4 {
                        report.check_eq(
                            format!("d={d} h={h} {parity} k={k} without memo"),
                            spin_at(&bare, h, parity, d, repeated(d, k)),
                            value,
                        );
                    }
                }
            }
        }
    }

    if opts.degree_max >= 4 {
        let data = CentralCharacterData::default();
        for k in 0..=8 {
            report.check_eq(
                format!("EOP genus-1 k={k}"),
                Ok(spin::eop_genus1(k, &data)),
                spin_at(&engine, 1, Parity::Odd, 4, repeated(4, k)),
            );
        }
        for h in 2..=genus_max {
            for parity in Parity::BOTH {
                for k in 0..=6 {
                    report.check_eq(
                        format!("degree-4 matrix recursion h={h} {parity} k={k}"),
                        degree4_matrix_value(&engine, h, parity, k),
                        spin_at(&engine, h, parity, 4, repeated(4, k)),
                    );
                }
            }
        }
    }

    if opts.degree_max >= 2 {
        for h in 0..=genus_max {
            for parity in Parity::BOTH.into_iter().filter(|&p| admissible(h, p)) {
                let q = SpinQuery::etale(h, parity, 2).expect("valid");
                let direct = engine.spin_hurwitz(&q);
                for split in Split::all_for(&q) {
                    report.check_eq(
                        format!("degree-2 consistency {q} {split:?}"),
                        engine.split_spin_hurwitz(&q, split),
                        direct.clone(),
                    );
                }
            }
        }
    }
    report
}

/// First component of `M_k · B^{h−2} · (H^{1,p}_{(31)^0}, H^{1,p}_{(31)^1})`
/// where `M_k = [[4!·H^{1,+}_k, 3·H^{1,+}_{k+1}], [4!·H^{1,+}_{k+1}, 3·H^{1,+}_{k+2}]]`
/// and `B = M_0`.
pub fn degree4_matrix_value(engine: &SpinEngine, h: u32, parity: Parity, k: u32) -> Result<Rational> {
    assert!(h >= 2);
    let even = |j: u32| spin_at(engine, 1, Parity::Even, 4, repeated(4, j));
    let m = |j: u32| -> Result<[[Rational; 2]; 2]> {
        Ok([
            [int(24) * even(j)?, int(3) * even(j + 1)?],
            [int(24) * even(j + 1)?, int(3) * even(j + 2)?],
        ])
    };
    let apply = |a: &[[Rational; 2]; 2], v: &[Rational; 2]| -> [Rational; 2] {
        [
            &a[0][0] * &v[0] + &a[0][1] * &v[1],
            &a[1][0] * &v[0] + &a[1][1] * &v[1],
        ]
    };
    let mut v = [
        spin_at(engine, 1, parity, 4, vec![])?,
        spin_at(engine, 1, parity, 4, repeated(4, 1))?,
    ];
    let base = m(0)?;
    for _ in 0..h - 2 {
        v = apply(&base, &v);
    }
    let [first, _] = apply(&m(k)?, &v);
    Ok(first)
}

fn gt_suite(opts: &VerifyOptions) -> SuiteReport {
    let mut report = SuiteReport::new(Suite::Gt);
    let engine = SpinEngine::new();
    for d in [3, 4].into_iter().filter(|&d| d <= opts.degree_max) {
        for h in 2..=opts.genus_max.clamp(2, 4) {
            for parity in Parity::BOTH {
                report.check_eq(
                    format!("GT d={d} h={h} {parity}"),
                    engine.gt_local(h, parity, d),
                    spin_at(&engine, h, parity, d, vec![]),
                );
            }
        }
    }
    if opts.degree_max >= 4 {
        for (h, parity, want) in [(2, Parity::Even, 108), (3, Parity::Odd, -3888), (3, Parity::Even, 6480)] {
            report.check_eq(
                format!("GT anchor d=4 h={h} {parity}"),
                engine.gt_local(h, parity, 4),
                Ok(int(want)),
            );
        }
    }
    report
}

/// Every block list with total complex dimension at most `n_max`.
pub fn block_specs(n_max: usize) -> Vec<Vec<BlockKind>> {
    let mut out = Vec::new();
    let mut frontier: Vec<(Vec<BlockKind>, usize)> = vec![(Vec::new(), 0)];
    while let Some((blocks, n)) = frontier.pop() {
        for kind in [BlockKind::Kernel, BlockKind::Invertible] {
            let m = n + kind.complex_dim();
            if m <= n_max {
                let mut next = blocks.clone();
                next.push(kind);
                out.push(next.clone());
                frontier.push((next, m));
            }
        }
    }
    out.sort_by_key(|b| (b.iter().map(|k| k.complex_dim()).sum::<usize>(), format!("{b:?}")));
    out
}

pub fn expected_sign(blocks: &[BlockKind]) -> i8 {
    let kernels = blocks.iter().filter(|&&b| b == BlockKind::Kernel).count();
    if kernels % 2 == 0 {
        1
    } else {
        -1
    }
}

pub const TRFLOW_T_MAX: f64 = 10.0;
pub const TRFLOW_RANDOM_CONJUGATIONS: u64 = 200;

fn trflow_suite() -> SuiteReport {
    let mut report = SuiteReport::new(Suite::Trflow);
    let specs = block_specs(8);
    let ts: Vec<f64> = (0..11).map(|i| -5.0 + i as f64).collect();

    let check_family = |report: &mut SuiteReport, blocks: &[BlockKind], seed: Option<u64>| {
        let label = format!("{blocks:?} seed {seed:?}");
        let f = match trflow::make_block_family(blocks, 1.0, seed) {
            Ok(f) => f,
            Err(e) => return report.check(false, || format!("{label}: {e}")),
        };
        let want = expected_sign(blocks);
        let det = trflow::sf_by_determinant(&f, TRFLOW_T_MAX, 5).map(|r| r.sign);
        let ker = trflow::sf_by_kernel(&f).map(|r| r.sign);
        report.check(det == Ok(want), || format!("{label}: sf_by_determinant {det:?}, want {want}"));
        report.check(ker == Ok(want), || format!("{label}: sf_by_kernel {ker:?}, want {want}"));
        let tr = f.tr_invariance_residual(&ts);
        report.check(tr <= trflow::STRUCTURE_TOLERANCE, || format!("{label}: TR residual {tr:e}"));
        report.check(f.is_geometric(), || format!("{label}: not geometric"));
        let v = trflow::vanishing_check(&f, &[-2.0, -0.5, 0.5, 2.0], 25, seed.unwrap_or(0));
        report.check(v.bound_holds && v.invertible_away_from_zero, || {
            format!("{label}: vanishing bound fails")
        });
        report.check(v.max_identity_residual <= trflow::IDENTITY_TOLERANCE, || {
            format!("{label}: identity residual {:e}", v.max_identity_residual)
        });
    };

    for blocks in &specs {
        check_family(&mut report, blocks, None);
    }
    for seed in 0..TRFLOW_RANDOM_CONJUGATIONS {
        let blocks = &specs[(seed as usize * 7919) % specs.len()];
        check_family(&mut report, blocks, Some(seed));
    }

    // multiplicativity over direct sums
    for (i, a) in specs.iter().filter(|b| b.len() <= 2).enumerate() {
        for b in specs.iter().filter(|b| b.len() <= 2).skip(i) {
            let pair = (|| {
                let fa = trflow::make_block_family(a, 1.0, Some(1))?;
                let fb = trflow::make_block_family(b, 2.0, Some(2))?;
                let sum = fa.direct_sum(&fb)?;
                let signs = (
                    trflow::sf_by_determinant(&fa, TRFLOW_T_MAX, 3)?.sign,
                    trflow::sf_by_determinant(&fb, TRFLOW_T_MAX, 3)?.sign,
                    trflow::sf_by_determinant(&sum, TRFLOW_T_MAX, 3)?.sign,
                );
                Ok::<_, Error>(signs)
            })();
            report.check(matches!(pair, Ok((x, y, z)) if x * y == z), || {
                format!("SF not multiplicative for {a:?} ⊕ {b:?}: {pair:?}")
            });
        }
    }

    // deformation invariance along R-scale interpolation
    for (i, blocks) in specs.iter().enumerate().filter(|(i, _)| i % 5 == 0) {
        match trflow::deformation_signs(blocks, 0.5, 3.0, 8, Some(i as u64), TRFLOW_T_MAX) {
            Ok(signs) => {
                let want = expected_sign(blocks);
                report.check(signs.iter().all(|&(a, b)| a == want && b == want), || {
                    format!("{blocks:?}: SF changes along deformation {signs:?}")
                });
            }
            Err(e) => report.check(false, || format!("{blocks:?}: {e}")),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms_hit_anchor_values() {
        assert_eq!(degree4_closed_form(0, Parity::Even, 0), frac(1, 24));
        assert_eq!(degree4_closed_form(0, Parity::Even, 3), frac(2, 3));
        assert_eq!(degree4_closed_form(1, Parity::Odd, 1), int(-6));
        assert_eq!(degree4_closed_form(2, Parity::Even, 0), int(108));
        assert_eq!(degree4_closed_form(2, Parity::Odd, 0), int(-36));
        assert_eq!(degree3_closed_form(0, Parity::Even, 0), frac(1, 6));
        assert_eq!(low_degree_closed_form(2, 0, Parity::Even), frac(1, 2));
    }

    #[test]
    fn block_spec_count() {
        // compositions of n ≤ 8 into parts 1 and 2: Σ F(n+1) = 87
        assert_eq!(block_specs(8).len(), 87);
        assert_eq!(block_specs(2).len(), 3);
    }

    #[test]
    fn multiset_counts() {
        assert_eq!(multisets(&[1, 2, 3], 2).len(), 6);
        assert_eq!(multisets(&[1, 2], 0), vec![Vec::<i32>::new()]);
    }

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
    }
}
