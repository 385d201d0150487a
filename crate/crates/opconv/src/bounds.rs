//! Quantitative bounds and randomized scans: the block quadratic-form
//! bound, the diagonal-block norm bound, the chord-based operator
//! inequality, and the seeded scan relating compression defects of f to
//! commutator size.

use crate::convexity::{chord_normalize, ScalarFunction};
use crate::error::{Error, Result};
use crate::mat::Mat;
use crate::rng::{random_orthonormal_basis, random_symmetric_with_spectrum, SplitMix64};
use crate::spectral::{
    commutator_norm, compress, eig_sym, matrix_function, spectral_projection, ClosedSet,
    SubspaceProjection, SymMatrix,
};

/// Number of threshold points in the empirical modulus curve.
pub const MODULUS_POINTS: usize = 32;
/// Threshold range of the empirical modulus curve (log-spaced).
pub const MODULUS_EPS_RANGE: (f64, f64) = (1e-4, 1.0);

/// Contiguous partition of coordinates 0..dim into blocks.
#[derive(Clone, Debug)]
pub struct BlockStructure {
    sizes: Vec<usize>,
}

impl BlockStructure {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() || sizes.contains(&0) {
            return Err(Error::BadRange {
                msg: "block sizes must be non-empty and positive".into(),
            });
        }
        Ok(BlockStructure { sizes })
    }

    pub fn dim(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn count(&self) -> usize {
        self.sizes.len()
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    fn offsets(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.sizes.len() + 1);
        let mut acc = 0;
        out.push(0);
        for s in &self.sizes {
            acc += s;
            out.push(acc);
        }
        out
    }
}

fn block_of(m: &Mat, r0: usize, r1: usize, c0: usize, c1: usize) -> Mat {
    Mat::from_fn(r1 - r0, c1 - c0, |i, j| m.get(r0 + i, c0 + j))
}

/// Largest singular value of a rectangular block, via the smaller Gram
/// matrix. Exactly zero blocks short-circuit to 0.
fn rect_norm(b: &Mat) -> Result<f64> {
    if b.data().iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let gram = if b.rows() <= b.cols() {
        b.matmul(&b.transpose())
    } else {
        b.transpose().matmul(b)
    };
    let top = eig_sym(&SymMatrix::symmetrized(gram)?)?
        .eigenvalues()
        .last()
        .copied()
        .unwrap_or(0.0)
        .max(0.0);
    Ok(top.sqrt())
}

fn require_psd(h: &SymMatrix) -> Result<()> {
    let d = eig_sym(h)?;
    let scale = 1.0_f64.max(d.max_abs_eigenvalue());
    let min_eig = d.min_eigenvalue();
    if min_eig < -crate::spectral::PSD_TOL * scale {
        return Err(Error::NotPsd { min_eig });
    }
    Ok(())
}

/// Outcome of the block quadratic-form bound
/// <Hx, x> <= sum_ij ||H_ij|| ||x_i|| ||x_j|| for positive semidefinite H.
#[derive(Clone, Copy, Debug)]
pub struct HadamardBound {
    pub quad_form: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn hadamard_vector_bound(
    h: &SymMatrix,
    blocks: &BlockStructure,
    x: &[f64],
) -> Result<HadamardBound> {
    if blocks.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            left: blocks.dim(),
            right: h.dim(),
        });
    }
    if x.len() != h.dim() {
        return Err(Error::DimensionMismatch {
            left: x.len(),
            right: h.dim(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite);
    }
    require_psd(h)?;

    let hx = h.mat().matvec(x);
    let quad_form: f64 = hx.iter().zip(x).map(|(a, b)| a * b).sum();

    let off = blocks.offsets();
    let k = blocks.count();
    let part_norms: Vec<f64> = (0..k)
        .map(|i| x[off[i]..off[i + 1]].iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    let mut bound = 0.0;
    for i in 0..k {
        for j in 0..k {
            if part_norms[i] == 0.0 || part_norms[j] == 0.0 {
                continue;
            }
            let bij = block_of(h.mat(), off[i], off[i + 1], off[j], off[j + 1]);
            bound += rect_norm(&bij)? * part_norms[i] * part_norms[j];
        }
    }
    let holds = quad_form <= bound + 1e-9 * 1.0_f64.max(bound.abs());
    Ok(HadamardBound {
        quad_form,
        bound,
        holds,
    })
}

/// Outcome of ||H|| <= sum_i ||H_ii|| for positive semidefinite H.
#[derive(Clone, Copy, Debug)]
pub struct NormBound {
    pub norm: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn block_norm_bound(h: &SymMatrix, blocks: &BlockStructure) -> Result<NormBound> {
    if blocks.dim() != h.dim() {
        return Err(Error::DimensionMismatch {
            left: blocks.dim(),
            right: h.dim(),
        });
    }
    require_psd(h)?;
    let norm = eig_sym(h)?.max_abs_eigenvalue();
    let off = blocks.offsets();
    let mut bound = 0.0;
    for i in 0..blocks.count() {
        let bii = block_of(h.mat(), off[i], off[i + 1], off[i], off[i + 1]);
        bound += rect_norm(&bii)?;
    }
    let holds = norm <= bound + 1e-9 * 1.0_f64.max(bound.abs());
    Ok(NormBound { norm, bound, holds })
}

/// Spectral-calculus consequences of one chord normalization, checked on a
/// concrete matrix: the gap depth gamma, the tail coefficient beta,
/// their ratio against (x - a)/(y - x), the vanishing of the sandwiched
/// projection chi_[a,x] chi_[y,inf) chi_[a,x], and semidefiniteness of
/// g(H) + gamma I - beta chi_[y,inf)(H).
#[derive(Clone, Copy, Debug)]
pub struct ChordBoundReport {
    pub a: f64,
    pub x: f64,
    pub y: f64,
    pub gamma: f64,
    pub beta: f64,
    pub ratio: f64,
    pub ratio_bound: f64,
    pub ratio_ok: bool,
    pub sandwich_norm: f64,
    pub sandwich_ok: bool,
    pub operator_min_eig: f64,
    pub operator_ok: bool,
}

impl ChordBoundReport {
    pub fn all_ok(&self) -> bool {
        self.ratio_ok && self.sandwich_ok && self.operator_ok
    }
}

pub fn chord_operator_bound(
    f: &ScalarFunction,
    h: &SymMatrix,
    a: f64,
    x: f64,
    y: f64,
) -> Result<ChordBoundReport> {
    if !(y > x) {
        return Err(Error::BadRange {
            msg: format!("need y > x, got x = {x}, y = {y}"),
        });
    }
    let norm = chord_normalize(f, a, x)?;
    let beta = norm.beta(y)?;
    let gamma = norm.gamma;
    let ratio = gamma / beta;
    let ratio_bound = (x - a) / (y - x);
    let ratio_ok = ratio <= ratio_bound + 1e-9;

    let e_chord = spectral_projection(h, &ClosedSet::interval(a, x)?)?;
    let e_tail = spectral_projection(h, &ClosedSet::at_least(y)?)?;
    let sandwich = SymMatrix::symmetrized(
        e_chord
            .mat()
            .matmul(e_tail.mat())
            .matmul(e_chord.mat()),
    )?;
    let sandwich_norm = eig_sym(&sandwich)?.max_abs_eigenvalue();
    let sandwich_ok = sandwich_norm <= 1e-9;

    let fa = f.eval(norm.a);
    let slope = (f.eval(norm.x) - fa) / (norm.x - norm.a);
    let (na, gamma_c) = (norm.a, gamma);
    let f_inner = f.clone();
    let g_fn = ScalarFunction::from_closure("chord-gap", *f.interval(), move |s| {
        f_inner.eval(s) - (fa + slope * (s - na))
    });
    let g_h = matrix_function(h, &g_fn)?;
    let assembled = g_h
        .add(&SymMatrix::identity(h.dim()).scale(gamma_c))?
        .sub(&e_tail.scale(beta))?;
    let d = eig_sym(&assembled)?;
    let operator_min_eig = d.min_eigenvalue();
    let scale = 1.0_f64.max(d.max_abs_eigenvalue());
    let operator_ok = operator_min_eig >= -1e-9 * scale;

    Ok(ChordBoundReport {
        a: norm.a,
        x: norm.x,
        y,
        gamma,
        beta,
        ratio,
        ratio_bound,
        ratio_ok,
        sandwich_norm,
        sandwich_ok,
        operator_min_eig,
        operator_ok,
    })
}

/// One sample of the compression scan.
#[derive(Clone, Copy, Debug)]
pub struct ScanRecord {
    pub trial: u64,
    /// ||f(pr H) - pr f(H)|| for the sampled subspace.
    pub jensen_defect: f64,
    /// ||P H - H P|| for the same subspace.
    pub commutator: f64,
}

/// Defect/commutator pair for one matrix and one subspace.
pub fn compression_defect_pair(
    f: &ScalarFunction,
    h: &SymMatrix,
    subspace: &SubspaceProjection,
) -> Result<(f64, f64)> {
    let pr_h = compress(h, subspace)?;
    let f_pr = matrix_function(&pr_h, f)?;
    let pr_f = compress(&matrix_function(h, f)?, subspace)?;
    let defect = eig_sym(&f_pr.sub(&pr_f)?)?.max_abs_eigenvalue();
    let comm = commutator_norm(h, subspace)?;
    Ok((defect, comm))
}

/// Scan configuration: ambient dimension, compression rank, trial count,
/// and the base seed. Each trial's randomness is keyed independently from
/// (seed, trial index), so prefixes of a longer scan reproduce a shorter
/// one exactly.
#[derive(Clone, Copy, Debug)]
pub struct ScanConfig {
    pub dim: usize,
    pub m: usize,
    pub trials: usize,
    pub seed: u64,
}

pub fn jensen_commutator_scan(f: &ScalarFunction, cfg: &ScanConfig) -> Result<Vec<ScanRecord>> {
    if cfg.dim < 2 {
        return Err(Error::BadRange {
            msg: format!("scan needs dim >= 2, got {}", cfg.dim),
        });
    }
    if cfg.m == 0 || cfg.m >= cfg.dim {
        return Err(Error::BadRange {
            msg: format!("scan needs 1 <= m < dim, got m = {}, dim = {}", cfg.m, cfg.dim),
        });
    }
    if cfg.trials == 0 {
        return Err(Error::BadRange {
            msg: "scan needs at least one trial".into(),
        });
    }
    // Sample spectra from the function's domain clipped to [-1, 1].
    let (ilo, ihi) = f.interval().finite_bracket(-1.0, 1.0);
    let lo = ilo.max(-1.0);
    let hi = ihi.min(1.0);
    if !(lo < hi) {
        return Err(Error::BadRange {
            msg: format!("function domain clipped to [-1, 1] is empty: [{lo}, {hi}]"),
        });
    }
    let mut records = Vec::with_capacity(cfg.trials);
    for trial in 0..cfg.trials as u64 {
        let mut rng = SplitMix64::stream(cfg.seed, trial);
        let (h, _) = random_symmetric_with_spectrum(cfg.dim, lo, hi, &mut rng);
        let subspace = random_orthonormal_basis(cfg.dim, cfg.m, &mut rng);
        let (jensen_defect, commutator) = compression_defect_pair(f, &h, &subspace)?;
        records.push(ScanRecord {
            trial,
            jensen_defect,
            commutator,
        });
    }
    Ok(records)
}

/// One point of the empirical modulus curve: the smallest observed defect
/// among samples whose commutator is at least eps (None when no sample
/// qualifies).
#[derive(Clone, Copy, Debug)]
pub struct ModulusPoint {
    pub eps: f64,
    pub delta_hat: Option<f64>,
}

/// Empirical lower-modulus curve on `MODULUS_POINTS` log-spaced thresholds.
/// Restricting to larger commutators can only raise the minimum, so the
/// curve is nondecreasing where defined.
pub fn empirical_modulus(records: &[ScanRecord]) -> Vec<ModulusPoint> {
    let (lo, hi) = MODULUS_EPS_RANGE;
    let (llo, lhi) = (lo.ln(), hi.ln());
    (0..MODULUS_POINTS)
        .map(|k| {
            let frac = k as f64 / (MODULUS_POINTS - 1) as f64;
            let eps = (llo + frac * (lhi - llo)).exp();
            let delta_hat = records
                .iter()
                .filter(|r| r.commutator >= eps)
                .map(|r| r.jensen_defect)
                .fold(None, |acc: Option<f64>, v| {
                    Some(acc.map_or(v, |a| a.min(v)))
                });
            ModulusPoint { eps, delta_hat }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convexity::{find_affine_chord, CHORD_GRID, CHORD_TOL};
    use crate::lab::counterexample_2x2;
    use proptest::prelude::*;

    fn ones(dim: usize) -> SymMatrix {
        SymMatrix::from_mat(Mat::from_fn(dim, dim, |_, _| 1.0)).unwrap()
    }

    #[test]
    fn hadamard_bound_is_tight_on_ones() {
        let h = ones(6);
        let blocks = BlockStructure::new(vec![2, 3, 1]).unwrap();
        let x = vec![1.0; 6];
        let r = hadamard_vector_bound(&h, &blocks, &x).unwrap();
        assert!(r.holds);
        assert!(
            (r.quad_form - r.bound).abs() <= 1e-12 * r.bound,
            "quad {} vs bound {}",
            r.quad_form,
            r.bound
        );
        assert!((r.quad_form - 36.0).abs() <= 1e-12);
    }

    #[test]
    fn hadamard_bound_rejects_indefinite_input() {
        let h = SymMatrix::diag(&[1.0, -1.0]);
        let blocks = BlockStructure::new(vec![1, 1]).unwrap();
        let r = hadamard_vector_bound(&h, &blocks, &[1.0, 1.0]);
        assert!(matches!(r, Err(Error::NotPsd { .. })));
    }

    #[test]
    fn hadamard_bound_random_psd_trials() {
        for t in 0..200u64 {
            let mut rng = SplitMix64::stream(2024, t);
            let dim = 2 + rng.below(7);
            let (h, _) = random_symmetric_with_spectrum(dim, 0.0, 2.0, &mut rng);
            let mut sizes = Vec::new();
            let mut left = dim;
            while left > 0 {
                let s = 1 + rng.below(left).min(left - 1);
                sizes.push(s);
                left -= s;
            }
            let blocks = BlockStructure::new(sizes).unwrap();
            let x: Vec<f64> = (0..dim).map(|_| rng.uniform(-1.0, 1.0)).collect();
            let r = hadamard_vector_bound(&h, &blocks, &x).unwrap();
            assert!(r.holds, "trial {t}: quad {} > bound {}", r.quad_form, r.bound);
        }
    }

    #[test]
    fn norm_bound_is_tight_on_ones() {
        let h = ones(6);
        let blocks = BlockStructure::new(vec![2, 3, 1]).unwrap();
        let r = block_norm_bound(&h, &blocks).unwrap();
        assert!(r.holds);
        assert!((r.norm - 6.0).abs() <= 1e-10);
        assert!((r.bound - 6.0).abs() <= 1e-10);
    }

    #[test]
    fn norm_bound_random_psd_trials() {
        for t in 0..200u64 {
            let mut rng = SplitMix64::stream(4048, t);
            let dim = 2 + rng.below(7);
            let (h, _) = random_symmetric_with_spectrum(dim, 0.0, 1.5, &mut rng);
            let blocks = BlockStructure::new(vec![1; dim]).unwrap();
            let r = block_norm_bound(&h, &blocks).unwrap();
            assert!(r.holds, "trial {t}: norm {} > bound {}", r.norm, r.bound);
        }
    }

    #[test]
    fn zero_blocks_contribute_nothing() {
        // Block-diagonal PSD matrix: off-diagonal blocks are exactly zero.
        let h = SymMatrix::diag(&[1.0, 2.0, 3.0, 4.0]);
        let blocks = BlockStructure::new(vec![2, 2]).unwrap();
        let x = vec![0.5, 0.5, 0.5, 0.5];
        let r = hadamard_vector_bound(&h, &blocks, &x).unwrap();
        assert!(r.holds);
        let nb = block_norm_bound(&h, &blocks).unwrap();
        assert!((nb.bound - (2.0 + 4.0)).abs() <= 1e-10);
    }

    #[test]
    fn chord_bound_on_square_matches_closed_forms() {
        let f = ScalarFunction::square();
        let mut rng = SplitMix64::new(7);
        let (h, _) = random_symmetric_with_spectrum(6, -0.5, 3.0, &mut rng);
        let r = chord_operator_bound(&f, &h, 0.0, 1.0, 2.0).unwrap();
        assert!((r.gamma - 0.25).abs() <= 1e-10);
        // g(2) = 4 - 2 = 2, so beta = 2.25 and the ratio is 1/9.
        assert!((r.beta - 2.25).abs() <= 1e-9);
        assert!(r.ratio_ok && r.sandwich_ok && r.operator_ok, "{r:?}");
        assert!(r.ratio <= r.ratio_bound);
    }

    #[test]
    fn chord_bound_holds_for_builtins_on_random_matrices() {
        for (spec, a, x, y) in [
            ("square", -0.25, 0.75, 1.5),
            ("exp", 0.0, 1.0, 2.0),
            ("abspow:1.5", 0.1, 0.9, 1.75),
        ] {
            let f = ScalarFunction::parse(spec).unwrap();
            for t in 0..50u64 {
                let mut rng = SplitMix64::stream(99, t);
                let (h, _) = random_symmetric_with_spectrum(5, -1.0, 3.0, &mut rng);
                let r = chord_operator_bound(&f, &h, a, x, y).unwrap();
                assert!(r.all_ok(), "{spec} trial {t}: {r:?}");
            }
        }
    }

    #[test]
    fn chord_bound_rejects_affine_pair() {
        let f = ScalarFunction::abs();
        let h = SymMatrix::diag(&[0.5, 2.0]);
        let r = chord_operator_bound(&f, &h, 0.0, 1.0, 2.0);
        assert!(matches!(r, Err(Error::NotConvexDetected { .. })));
    }

    #[test]
    fn scan_is_prefix_stable_and_deterministic() {
        let f = ScalarFunction::square();
        let cfg5 = ScanConfig { dim: 6, m: 2, trials: 5, seed: 31 };
        let cfg3 = ScanConfig { trials: 3, ..cfg5 };
        let a = jensen_commutator_scan(&f, &cfg5).unwrap();
        let b = jensen_commutator_scan(&f, &cfg3).unwrap();
        for (ra, rb) in a.iter().zip(&b) {
            assert_eq!(ra.jensen_defect.to_bits(), rb.jensen_defect.to_bits());
            assert_eq!(ra.commutator.to_bits(), rb.commutator.to_bits());
        }
        let c = jensen_commutator_scan(&f, &cfg5).unwrap();
        for (ra, rc) in a.iter().zip(&c) {
            assert_eq!(ra.jensen_defect.to_bits(), rc.jensen_defect.to_bits());
        }
    }

    #[test]
    fn scan_respects_polyline_domain() {
        let f = ScalarFunction::parse("polyline:0,0;0.5,0.2;1,1").unwrap();
        let cfg = ScanConfig { dim: 5, m: 2, trials: 20, seed: 8 };
        let records = jensen_commutator_scan(&f, &cfg).unwrap();
        assert_eq!(records.len(), 20);
        for r in records {
            assert!(r.jensen_defect.is_finite() && r.commutator >= 0.0);
        }
    }

    #[test]
    fn counterexample_pair_sits_in_the_scan_plane() {
        let f = ScalarFunction::abs();
        let w = find_affine_chord(&f, -1.0, 1.0, CHORD_GRID, CHORD_TOL)
            .unwrap()
            .unwrap();
        let seed = counterexample_2x2(&f, &w).unwrap();
        let e0 = SubspaceProjection::standard(2, 1).unwrap();
        let (defect, comm) = compression_defect_pair(&f, &seed.h0, &e0).unwrap();
        assert!(defect <= 1e-10);
        assert!((comm - 0.5).abs() <= 1e-10);
    }

    #[test]
    fn modulus_handles_empty_and_full_sets() {
        let empty = empirical_modulus(&[]);
        assert_eq!(empty.len(), MODULUS_POINTS);
        assert!(empty.iter().all(|p| p.delta_hat.is_none()));

        let records = vec![
            ScanRecord { trial: 0, jensen_defect: 0.3, commutator: 0.5 },
            ScanRecord { trial: 1, jensen_defect: 0.1, commutator: 0.01 },
        ];
        let curve = empirical_modulus(&records);
        assert!((curve[0].eps - 1e-4).abs() <= 1e-16);
        assert!((curve.last().unwrap().eps - 1.0).abs() <= 1e-12);
        assert_eq!(curve[0].delta_hat, Some(0.1));
        assert_eq!(curve.last().unwrap().delta_hat, None);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn modulus_curve_is_nondecreasing(
            defects in proptest::collection::vec(0.0f64..1.0, 0..40),
            comms in proptest::collection::vec(0.0f64..1.5, 0..40),
        ) {
            let records: Vec<ScanRecord> = defects
                .iter()
                .zip(&comms)
                .enumerate()
                .map(|(i, (&d, &c))| ScanRecord { trial: i as u64, jensen_defect: d, commutator: c })
                .collect();
            let curve = empirical_modulus(&records);
            let mut last: Option<f64> = None;
            for p in &curve {
                if let (Some(prev), Some(cur)) = (last, p.delta_hat) {
                    prop_assert!(cur >= prev - 1e-15);
                }
                if p.delta_hat.is_some() {
                    last = p.delta_hat;
                }
            }
        }

        #[test]
        fn defect_vanishes_when_subspace_reduces(seed in 0u64..5000) {
            // Block-diagonal H commutes with the span of its leading block,
            // so both commutator and defect vanish.
            let mut rng = SplitMix64::new(seed);
            let d1 = 2 + rng.below(3);
            let d2 = 2 + rng.below(3);
            let (h1, _) = random_symmetric_with_spectrum(d1, -1.0, 1.0, &mut rng);
            let (h2, _) = random_symmetric_with_spectrum(d2, -1.0, 1.0, &mut rng);
            let dim = d1 + d2;
            let h = SymMatrix::from_mat(Mat::from_fn(dim, dim, |i, j| {
                if i < d1 && j < d1 {
                    h1.get(i, j)
                } else if i >= d1 && j >= d1 {
                    h2.get(i - d1, j - d1)
                } else {
                    0.0
                }
            })).unwrap();
            let sub = SubspaceProjection::standard(dim, d1).unwrap();
            let (defect, comm) = compression_defect_pair(
                &ScalarFunction::exp(), &h, &sub,
            ).unwrap();
            prop_assert!(comm <= 1e-10, "commutator {comm}");
            prop_assert!(defect <= 1e-8, "defect {defect}");
        }
    }
}
