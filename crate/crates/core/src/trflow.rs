//! Finite-dimensional model of a time-reversal invariant path of operators.
//!
//! A [`TRFamily`] is `A(t) = D + t·R` on `ℂⁿ`, stored as real `2n × 2n`
//! matrices in the basis `(x₁, y₁, x₂, y₂, …)` with the standard complex
//! structure `J` (multiplication by `i`). `D` commutes with `J` and `R`
//! anticommutes with it, so `A(−t) = J·A(t)·J⁻¹`.
//!
//! The spectral-flow sign is computed two ways: from the sign of
//! `det A(t)` past the last singular parameter, and as
//! `(−1)^{dim_ℂ ker A(0)}` when `R` maps the kernel of `A(0)` onto its
//! cokernel. The real determinant of a complex-linear invertible map is
//! positive, which fixes the orientation.
//!
//! This is the only module that uses floating point.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};

/// Singular values below this count as zero.
pub const ZERO_THRESHOLD: f64 = 1e-9;
/// Required ratio between the smallest nonzero and the zero threshold.
pub const SPECTRAL_GAP_FACTOR: f64 = 1e3;
/// Tolerance for the structural identities (`J² = −I`, commutation, TR invariance).
pub const STRUCTURE_TOLERANCE: f64 = 1e-12;
/// Tolerance for `|A(t)x|² = |Dx|² + t²|Rx|²` on unit vectors.
pub const IDENTITY_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum BlockKind {
    /// `ℂ²` with `D = diag(1, −1)`, `R(z₁, z₂) = a(z̄₂, z̄₁)`.
    Invertible,
    /// `ℂ¹` with `D = 0`, `R(z) = a·z̄`.
    Kernel,
}

impl BlockKind {
    pub fn complex_dim(self) -> usize {
        match self {
            BlockKind::Invertible => 2,
            BlockKind::Kernel => 1,
        }
    }
}

impl fmt::Display for BlockKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BlockKind::Invertible => "invertible",
            BlockKind::Kernel => "kernel",
        })
    }
}

impl FromStr for BlockKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "invertible" => Ok(BlockKind::Invertible),
            "kernel" => Ok(BlockKind::Kernel),
            other => Err(Error::InvalidArgument(format!(
                "block must be kernel|invertible, got {other:?}"
            ))),
        }
    }
}

/// Parses `"kernel,invertible,…"`.
pub fn parse_blocks(s: &str) -> Result<Vec<BlockKind>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(str::parse)
        .collect()
}

#[derive(Clone, Debug)]
pub struct TRFamily {
    n: usize,
    j: DMatrix<f64>,
    d: DMatrix<f64>,
    r: DMatrix<f64>,
    geometric: bool,
}

/// Largest absolute entry.
fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

fn standard_j(n: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        j[(2 * k + 1, 2 * k)] = 1.0;
        j[(2 * k, 2 * k + 1)] = -1.0;
    }
    j
}

impl TRFamily {
    /// Checks the structural constraints and records whether the family is
    /// geometric (`DᵀR + RᵀD = 0`, `RᵀR = c·I`, `c > 0`).
    pub fn new(j: DMatrix<f64>, d: DMatrix<f64>, r: DMatrix<f64>) -> Result<Self> {
        let size = j.nrows();
        if !size.is_multiple_of(2) || [j.ncols(), d.nrows(), d.ncols(), r.nrows(), r.ncols()] != [size; 5] {
            return Err(Error::InvalidArgument(
                "J, D, R must be square matrices of the same even size".into(),
            ));
        }
        let identity = DMatrix::<f64>::identity(size, size);
        let scale = 1.0 + max_abs(&d).max(max_abs(&r));
        let tol = STRUCTURE_TOLERANCE * scale * size as f64;
        if max_abs(&(&j * &j + &identity)) > tol {
            return Err(Error::InvalidArgument("J² ≠ −I".into()));
        }
        if max_abs(&(&j * &d - &d * &j)) > tol {
            return Err(Error::InvalidArgument("D is not complex-linear".into()));
        }
        if max_abs(&(&j * &r + &r * &j)) > tol {
            return Err(Error::InvalidArgument("R is not conjugate-linear".into()));
        }
        let mut family = TRFamily {
            n: size / 2,
            j,
            d,
            r,
            geometric: false,
        };
        family.geometric = family.geometric_residual().is_some_and(|res| res <= tol);
        Ok(family)
    }

    /// Complex dimension.
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn j(&self) -> &DMatrix<f64> {
        &self.j
    }

    pub fn complex_part(&self) -> &DMatrix<f64> {
        &self.d
    }

    pub fn conjugate_part(&self) -> &DMatrix<f64> {
        &self.r
    }

    pub fn is_geometric(&self) -> bool {
        self.geometric
    }

    /// `A(t) = D + t·R`.
    pub fn at(&self, t: f64) -> DMatrix<f64> {
        &self.d + &self.r * t
    }

    /// `c` in `RᵀR = c·I`, as the mean diagonal entry of `RᵀR`.
    pub fn r_norm_constant(&self) -> f64 {
        let rtr = self.r.transpose() * &self.r;
        rtr.trace() / rtr.nrows() as f64
    }

    /// Max of `|DᵀR + RᵀD|` and `|RᵀR − c·I|`; `None` when `c` is not positive.
    fn geometric_residual(&self) -> Option<f64> {
        let cross = self.d.transpose() * &self.r + self.r.transpose() * &self.d;
        let c = self.r_norm_constant();
        if c <= 0.0 {
            return None;
        }
        let size = self.r.nrows();
        let norm = self.r.transpose() * &self.r - DMatrix::<f64>::identity(size, size) * c;
        Some(max_abs(&cross).max(max_abs(&norm)))
    }

    /// `max_t |A(−t) − J·A(t)·J⁻¹|` with `J⁻¹ = −J`.
    pub fn tr_invariance_residual(&self, ts: &[f64]) -> f64 {
        let j_inv = -&self.j;
        ts.iter()
            .map(|&t| max_abs(&(self.at(-t) - &self.j * self.at(t) * &j_inv)))
            .fold(0.0, f64::max)
    }

    /// Conjugates every matrix by the orthogonal `q`: `M ↦ q·M·qᵀ`.
    pub fn conjugated(&self, q: &DMatrix<f64>) -> Result<TRFamily> {
        let qt = q.transpose();
        TRFamily::new(q * &self.j * &qt, q * &self.d * &qt, q * &self.r * &qt)
    }

    /// Block-diagonal sum of two families.
    pub fn direct_sum(&self, other: &TRFamily) -> Result<TRFamily> {
        let stack = |a: &DMatrix<f64>, b: &DMatrix<f64>| {
            let (na, nb) = (a.nrows(), b.nrows());
            let mut m = DMatrix::zeros(na + nb, na + nb);
            m.view_mut((0, 0), (na, na)).copy_from(a);
            m.view_mut((na, na), (nb, nb)).copy_from(b);
            m
        };
        TRFamily::new(
            stack(&self.j, &other.j),
            stack(&self.d, &other.d),
            stack(&self.r, &other.r),
        )
    }

    /// Same `J` and `D`, conjugate part `(1 − s)·R + s·R'`.
    pub fn interpolate_conjugate_part(&self, other: &TRFamily, s: f64) -> Result<TRFamily> {
        if self.n != other.n
            || max_abs(&(&self.j - &other.j)) > STRUCTURE_TOLERANCE
            || max_abs(&(&self.d - &other.d)) > STRUCTURE_TOLERANCE
        {
            return Err(Error::InvalidArgument(
                "interpolation needs families with the same J and D".into(),
            ));
        }
        let r = &self.r * (1.0 - s) + &other.r * s;
        TRFamily::new(self.j.clone(), self.d.clone(), r)
    }
}

/// Direct sum of the requested blocks with conjugate-part scale `a`,
/// optionally conjugated by a random orthogonal matrix drawn from `seed`.
pub fn make_block_family(blocks: &[BlockKind], scale: f64, seed: Option<u64>) -> Result<TRFamily> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidArgument(format!("scale must be positive, got {scale}")));
    }
    if blocks.is_empty() {
        return Err(Error::InvalidArgument("at least one block is required".into()));
    }
    let n: usize = blocks.iter().map(|b| b.complex_dim()).sum();
    let mut d = DMatrix::zeros(2 * n, 2 * n);
    let mut r = DMatrix::zeros(2 * n, 2 * n);
    let mut k = 0;
    let conj = |m: &mut DMatrix<f64>, row: usize, col: usize| {
        m[(2 * row, 2 * col)] = scale;
        m[(2 * row + 1, 2 * col + 1)] = -scale;
    };
    for block in blocks {
        match block {
            BlockKind::Invertible => {
                for (i, sign) in [(0, 1.0), (1, -1.0)] {
                    d[(2 * (k + i), 2 * (k + i))] = sign;
                    d[(2 * (k + i) + 1, 2 * (k + i) + 1)] = sign;
                }
                conj(&mut r, k, k + 1);
                conj(&mut r, k + 1, k);
            }
            BlockKind::Kernel => conj(&mut r, k, k),
        }
        k += block.complex_dim();
    }
    let family = TRFamily::new(standard_j(n), d, r)?;
    match seed {
        Some(seed) => family.conjugated(&random_orthogonal(2 * n, seed)),
        None => Ok(family),
    }
}

/// Haar-distributed orthogonal matrix from the QR factorization of a
/// Gaussian matrix, with column signs fixed by `diag(R) > 0`.
pub fn random_orthogonal(size: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::<f64>::from_fn(size, size, |_, _| StandardNormal.sample(&mut rng));
    let qr = g.qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..size {
        if r[(c, c)] < 0.0 {
            q.column_mut(c).neg_mut();
        }
    }
    q
}

fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    m.clone().singular_values().iter().copied().collect()
}

fn min_singular_value(m: &DMatrix<f64>) -> f64 {
    singular_values(m).into_iter().fold(f64::INFINITY, f64::min)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SfMethod {
    ByDeterminant,
    ByKernel,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SFResult {
    pub sign: i8,
    pub kernel_dim_complex: Option<usize>,
    pub min_singular_value_along_path: f64,
    pub method: SfMethod,
}

/// Sign of `det A(t_max)`, after checking that `A(t)` stays invertible on
/// `[t_max, 2·t_max]` at `samples` evenly spaced points.
pub fn sf_by_determinant(f: &TRFamily, t_max: f64, samples: usize) -> Result<SFResult> {
    if !(t_max > 0.0 && t_max.is_finite()) || samples == 0 {
        return Err(Error::InvalidArgument(
            "t_max must be positive and samples at least 1".into(),
        ));
    }
    let mut min_sv = f64::INFINITY;
    for i in 0..samples {
        let t = if samples == 1 {
            t_max
        } else {
            t_max * (1.0 + i as f64 / (samples - 1) as f64)
        };
        let sv = min_singular_value(&f.at(t));
        if sv < ZERO_THRESHOLD {
            return Err(Error::SingularAtEvaluation { t, min_sv: sv });
        }
        min_sv = min_sv.min(sv);
    }
    let det = f.at(t_max).determinant();
    Ok(SFResult {
        sign: if det > 0.0 { 1 } else { -1 },
        kernel_dim_complex: None,
        min_singular_value_along_path: min_sv,
        method: SfMethod::ByDeterminant,
    })
}

/// `(−1)^{dim_ℂ ker A(0)}`, provided `R` restricted to `ker A(0)` is an
/// isomorphism onto `coker A(0)`.
///
/// The reported singular value is the least one the verdict depends on:
/// that of `R|ker → coker` when the kernel is nontrivial, otherwise that of
/// `A(0)` itself.
pub fn sf_by_kernel(f: &TRFamily) -> Result<SFResult> {
    let a0 = f.at(0.0);
    let svd = a0.svd(true, true);
    let u = svd.u.as_ref().expect("requested U");
    let v_t = svd.v_t.as_ref().expect("requested Vᵀ");
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();

    let kernel: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] < ZERO_THRESHOLD).collect();
    let smallest_nonzero = (0..sv.len())
        .filter(|&i| sv[i] >= ZERO_THRESHOLD)
        .map(|i| sv[i])
        .fold(f64::INFINITY, f64::min);
    if smallest_nonzero < ZERO_THRESHOLD * SPECTRAL_GAP_FACTOR {
        return Err(Error::HypothesisFailed(format!(
            "no clean spectral gap: smallest nonzero singular value {smallest_nonzero:e}"
        )));
    }
    if !kernel.len().is_multiple_of(2) {
        return Err(Error::OddRealKernel(kernel.len()));
    }
    let verdict_sv = if kernel.is_empty() {
        smallest_nonzero
    } else {
        let kernel_basis = DMatrix::from_fn(sv.len(), kernel.len(), |row, c| v_t[(kernel[c], row)]);
        let cokernel_basis = DMatrix::from_fn(sv.len(), kernel.len(), |row, c| u[(row, kernel[c])]);
        let restricted = cokernel_basis.transpose() * f.conjugate_part() * kernel_basis;
        let least = min_singular_value(&restricted);
        if least <= ZERO_THRESHOLD {
            return Err(Error::HypothesisFailed(format!(
                "R does not map ker A(0) isomorphically onto coker A(0) (least singular value {least:e})"
            )));
        }
        least
    };
    let complex_dim = kernel.len() / 2;
    Ok(SFResult {
        sign: if complex_dim.is_multiple_of(2) { 1 } else { -1 },
        kernel_dim_complex: Some(complex_dim),
        min_singular_value_along_path: verdict_sv,
        method: SfMethod::ByKernel,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VanishingReport {
    pub geometric: bool,
    /// `√c` with `RᵀR = c·I`: `A(t)` has least singular value at least `√c·|t|`.
    pub bound_constant: f64,
    /// `(t, least singular value of A(t))` for each grid point.
    pub min_singular_values: Vec<(f64, f64)>,
    pub bound_holds: bool,
    pub invertible_away_from_zero: bool,
    pub max_identity_residual: f64,
}

/// Checks `|A(t)x|² = |Dx|² + t²|Rx|²` on `samples` random unit vectors per
/// grid point and the resulting lower bound on singular values.
pub fn vanishing_check(f: &TRFamily, t_grid: &[f64], samples: usize, seed: u64) -> VanishingReport {
    let bound_constant = f.r_norm_constant().max(0.0).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let size = 2 * f.dim();
    let mut min_singular_values = Vec::with_capacity(t_grid.len());
    let mut bound_holds = true;
    let mut invertible_away_from_zero = true;
    let mut max_identity_residual: f64 = 0.0;
    for &t in t_grid {
        let a = f.at(t);
        let sv = min_singular_value(&a);
        min_singular_values.push((t, sv));
        let bound = bound_constant * t.abs();
        if sv < bound * (1.0 - 1e-9) - STRUCTURE_TOLERANCE {
            bound_holds = false;
        }
        if t != 0.0 && sv < ZERO_THRESHOLD {
            invertible_away_from_zero = false;
        }
        for _ in 0..samples {
            let x = nalgebra::DVector::<f64>::from_fn(size, |_, _| StandardNormal.sample(&mut rng));
            let x = &x / x.norm();
            let lhs = (&a * &x).norm_squared();
            let rhs = (f.complex_part() * &x).norm_squared() + t * t * (f.conjugate_part() * &x).norm_squared();
            max_identity_residual = max_identity_residual.max((lhs - rhs).abs());
        }
    }
    VanishingReport {
        geometric: f.is_geometric(),
        bound_constant,
        min_singular_values,
        bound_holds,
        invertible_away_from_zero,
        max_identity_residual,
    }
}

/// SF along `R_s = (1 − s)·R(a₀) + s·R(a₁)` at `steps + 1` points; both
/// endpoints share `blocks` and `seed`, so every `R_s` is a positive
/// multiple of `R(a₀)`.
pub fn deformation_signs(
    blocks: &[BlockKind],
    a0: f64,
    a1: f64,
    steps: usize,
    seed: Option<u64>,
    t_max: f64,
) -> Result<Vec<(i8, i8)>> {
    let start = make_block_family(blocks, a0, seed)?;
    let end = make_block_family(blocks, a1, seed)?;
    (0..=steps)
        .map(|i| {
            let s = i as f64 / steps.max(1) as f64;
            let f = start.interpolate_conjugate_part(&end, s)?;
            Ok((sf_by_determinant(&f, t_max, 5)?.sign, sf_by_kernel(&f)?.sign))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use BlockKind::{Invertible, Kernel};

    #[test]
    fn kernel_block_determinant() {
        let f = make_block_family(&[Kernel], 1.0, None).unwrap();
        for t in [-2.0, 0.5, 3.0] {
            assert!((f.at(t).determinant() + t * t).abs() < 1e-12);
        }
        assert!(f.is_geometric());
    }

    #[test]
    fn invertible_block_has_positive_determinant() {
        let f = make_block_family(&[Invertible], 1.0, None).unwrap();
        for i in -40..=40 {
            let t = i as f64 * 0.25;
            assert!(f.at(t).determinant() > 0.0, "t={t}");
        }
        assert_eq!(sf_by_kernel(&f).unwrap().kernel_dim_complex, Some(0));
        assert!(f.is_geometric());
    }

    #[test]
    fn kernel_dimension_counts_blocks() {
        let f = make_block_family(&[Kernel, Kernel, Invertible], 1.0, None).unwrap();
        let sf = sf_by_kernel(&f).unwrap();
        assert_eq!(sf.kernel_dim_complex, Some(2));
        assert_eq!(sf.sign, 1);
    }

    #[test]
    fn signs_by_both_routes() {
        for (blocks, expected) in [
            (vec![Kernel], -1),
            (vec![Invertible], 1),
            (vec![Kernel, Kernel], 1),
            (vec![Kernel, Invertible, Kernel, Kernel], -1),
        ] {
            let f = make_block_family(&blocks, 1.0, None).unwrap();
            assert_eq!(sf_by_determinant(&f, 10.0, 5).unwrap().sign, expected, "{blocks:?}");
            assert_eq!(sf_by_kernel(&f).unwrap().sign, expected, "{blocks:?}");
        }
    }

    #[test]
    fn determinant_route_rejects_singular_window() {
        let f = make_block_family(&[Kernel], 1.0, None).unwrap();
        assert!(matches!(
            sf_by_determinant(&f, 1e-12, 3),
            Err(Error::SingularAtEvaluation { .. })
        ));
    }

    #[test]
    fn kernel_route_needs_isomorphism() {
        // D = 0 and R = 0 on one complex line: kernel, but R kills it
        let j = standard_j(1);
        let zero = DMatrix::zeros(2, 2);
        let f = TRFamily::new(j, zero.clone(), zero).unwrap();
        assert!(matches!(sf_by_kernel(&f), Err(Error::HypothesisFailed(_))));
        assert!(!f.is_geometric());
    }

    #[test]
    fn rejects_non_conjugate_linear_r() {
        let j = standard_j(1);
        let d = DMatrix::zeros(2, 2);
        let r = DMatrix::identity(2, 2);
        assert!(TRFamily::new(j, d, r).is_err());
    }

    #[test]
    fn conjugation_preserves_structure() {
        let f = make_block_family(&[Kernel, Invertible], 2.0, Some(7)).unwrap();
        assert!(f.is_geometric());
        let ts: Vec<f64> = (0..11).map(|i| -5.0 + i as f64).collect();
        assert!(f.tr_invariance_residual(&ts) <= STRUCTURE_TOLERANCE * 10.0);
        assert_eq!(sf_by_kernel(&f).unwrap().sign, -1);
        assert_eq!(sf_by_determinant(&f, 10.0, 5).unwrap().sign, -1);
    }

    #[test]
    fn vanishing_report() {
        let f = make_block_family(&[Kernel, Invertible], 1.5, Some(3)).unwrap();
        let report = vanishing_check(&f, &[-2.0, -1.0, 0.0, 1.0, 2.0], 100, 11);
        assert!(report.geometric);
        assert!(report.bound_holds);
        assert!(report.invertible_away_from_zero);
        assert!(report.max_identity_residual <= IDENTITY_TOLERANCE);
        assert!((report.bound_constant - 1.5).abs() < 1e-12);
        let at_zero = report.min_singular_values[2].1;
        assert!(at_zero < ZERO_THRESHOLD);
    }

    #[test]
    fn block_parsing() {
        assert_eq!(parse_blocks("kernel, invertible").unwrap(), vec![Kernel, Invertible]);
        assert!(parse_blocks("kernel,foo").is_err());
        assert!(make_block_family(&[], 1.0, None).is_err());
        assert!(make_block_family(&[Kernel], 0.0, None).is_err());
    }

    #[test]
    fn direct_sum_matches_block_list() {
        let a = make_block_family(&[Kernel], 1.0, None).unwrap();
        let b = make_block_family(&[Invertible], 1.0, None).unwrap();
        let sum = a.direct_sum(&b).unwrap();
        let listed = make_block_family(&[Kernel, Invertible], 1.0, None).unwrap();
        assert_eq!(sum.at(0.7), listed.at(0.7));
        assert_eq!(sum.j(), listed.j());
    }
}
