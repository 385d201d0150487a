//! Named self-checks: a deterministic battery covering the spectral core,
//! the convexity toolkit, the experiment layer, and the bounds module. The
//! battery is seeded, uses no wall clock, and emits one pass/fail record
//! per check, so two runs with the same options produce identical output
//! byte for byte.

use crate::bounds::{
    block_norm_bound, chord_operator_bound, compression_defect_pair, empirical_modulus,
    hadamard_vector_bound, jensen_commutator_scan, BlockStructure, ScanConfig, ScanRecord,
};
use crate::convexity::{
    chord_normalize, epsilon_partition, find_affine_chord, linspace, strictness_margin,
    verify_partition, ScalarFunction, CHORD_GRID, CHORD_TOL,
};
use crate::error::Error;
use crate::lab::{
    bounded_transform_demo, convergence_experiment, corner_sequence_instance, counterexample_2x2,
    interpolation_family, lifted_counterexample, multiplier_classify, rotation_family,
    shift_construction, MultiplierClass, TestVectorSet, Thresholds,
};
use crate::mat::Mat;
use crate::rng::{random_symmetric_with_spectrum, SplitMix64};
use crate::spectral::{
    commutator_norm, eig_sym, matrix_function, spectral_projection, ClosedSet,
    SubspaceProjection, SymMatrix,
};

/// Outcome of one named check.
#[derive(Clone, Debug)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Comma-free, single-line summary of what was measured.
    pub detail: String,
}

/// Options of a verify run.
#[derive(Clone, Debug)]
pub struct VerifyOptions {
    pub seed: u64,
    /// Trial budget for the randomized checks.
    pub trials: usize,
    /// Extra function put through the chord/scan pipeline as a bonus check.
    pub custom_f: Option<ScalarFunction>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            seed: 1,
            trials: 10_000,
            custom_f: None,
        }
    }
}

pub fn all_passed(results: &[CheckResult]) -> bool {
    results.iter().all(|r| r.passed)
}

fn clean(s: &str) -> String {
    s.replace(',', ";").replace('\n', " ")
}

type CheckBody = std::result::Result<String, String>;

fn ck(name: &str, body: impl FnOnce() -> CheckBody) -> CheckResult {
    match body() {
        Ok(detail) => CheckResult {
            name: name.into(),
            passed: true,
            detail: clean(&detail),
        },
        Err(detail) => CheckResult {
            name: name.into(),
            passed: false,
            detail: clean(&detail),
        },
    }
}

fn lib<T>(r: crate::error::Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

/// Runs the full battery in a fixed order.
pub fn run_all(opts: &VerifyOptions) -> Vec<CheckResult> {
    let mut out = vec![
        spectral_reconstruction(opts),
        spectral_polynomial_calculus(opts),
        spectral_projection_additivity(opts),
        spectral_invariant_compression(opts),
        spectral_determinism(opts),
        convexity_affine_chord(),
        convexity_chord_exactness(),
        convexity_chord_ratio(),
        convexity_partition_gaps(),
        convexity_nonconvex_rejected(),
        lab_residual_order(opts),
        lab_shift_identity(opts),
        lab_counterexample_shift(),
        lab_bounded_transform(),
        lab_positive_convergence(opts),
        lab_multiplier_monotone(opts),
        lab_corner_instance(),
        bounds_vector_bound(opts),
        bounds_norm_bound(opts),
        bounds_chord_operator(opts),
        bounds_scan_modulus(opts),
    ];
    if let Some(f) = &opts.custom_f {
        out.push(custom_function(opts, f));
    }
    out
}

fn spectral_reconstruction(opts: &VerifyOptions) -> CheckResult {
    ck("spectral.reconstruction", || {
        let mut worst_recon = 0.0_f64;
        let mut worst_ortho = 0.0_f64;
        for (k, dim) in [1usize, 2, 3, 4, 6, 8, 12, 16].into_iter().enumerate() {
            let mut rng = SplitMix64::stream(opts.seed, 100 + k as u64);
            let (h, _) = random_symmetric_with_spectrum(dim, -2.0, 2.0, &mut rng);
            let d = lib(eig_sym(&h))?;
            let scale = 1.0_f64.max(h.frobenius_norm());
            let recon = lib(d.reconstruct().sub(&h))?.frobenius_norm() / (dim as f64 * scale);
            let vtv = d.vectors().transpose().matmul(d.vectors());
            let ortho = vtv.sub(&Mat::identity(dim)).frobenius_norm() / dim as f64;
            worst_recon = worst_recon.max(recon);
            worst_ortho = worst_ortho.max(ortho);
            for w in d.eigenvalues().windows(2) {
                if w[0] > w[1] {
                    return Err(format!("eigenvalues not ascending at dim {dim}"));
                }
            }
        }
        if worst_recon > 1e-10 || worst_ortho > 1e-10 {
            return Err(format!(
                "reconstruction {worst_recon:.2e} or orthonormality {worst_ortho:.2e} above 1e-10"
            ));
        }
        Ok(format!(
            "recon {worst_recon:.2e}; ortho {worst_ortho:.2e}; dims up to 16"
        ))
    })
}

fn spectral_polynomial_calculus(opts: &VerifyOptions) -> CheckResult {
    ck("spectral.polynomial_calculus", || {
        let mut worst = 0.0_f64;
        for k in 0..24u64 {
            let mut rng = SplitMix64::stream(opts.seed, 200 + k);
            let dim = 1 + rng.below(16);
            let (h, _) = random_symmetric_with_spectrum(dim, -1.0, 1.0, &mut rng);
            let c = [
                rng.uniform(-1.0, 1.0),
                rng.uniform(-1.0, 1.0),
                rng.uniform(-1.0, 1.0),
            ];
            let f = ScalarFunction::polynomial(&c);
            let via = lib(matrix_function(&h, &f))?;
            let h2 = lib(SymMatrix::symmetrized(h.mat().matmul(h.mat())))?;
            let direct = lib(lib(SymMatrix::identity(dim).scale(c[0]).add(&h.scale(c[1])))?
                .add(&h2.scale(c[2])))?;
            let scale = 1.0_f64.max(direct.frobenius_norm());
            worst = worst.max(lib(via.sub(&direct))?.frobenius_norm() / scale);
        }
        if worst > 1e-8 {
            return Err(format!("worst homomorphism error {worst:.2e} above 1e-8"));
        }
        Ok(format!("worst quadratic-calculus error {worst:.2e}"))
    })
}

fn spectral_projection_additivity(opts: &VerifyOptions) -> CheckResult {
    ck("spectral.projection_additivity", || {
        let mut worst = 0.0_f64;
        for k in 0..16u64 {
            let mut rng = SplitMix64::stream(opts.seed, 300 + k);
            let dim = 2 + rng.below(10);
            let (h, _) = random_symmetric_with_spectrum(dim, -1.0, 1.0, &mut rng);
            let lambda = lib(eig_sym(&h))?.eigenvalues().to_vec();
            // Cuts at spectral gaps so membership is unambiguous.
            let cut = |a: f64, b: f64| 0.5 * (a + b);
            let c1 = if dim > 1 { cut(lambda[0], lambda[1]) } else { lambda[0] + 1.0 };
            let c2 = if dim > 2 {
                cut(lambda[dim / 2 - 1], lambda[dim / 2])
            } else {
                c1 + 1.0
            };
            let (c1, c2) = (c1.min(c2), c1.max(c2) + 1e-6);
            let sets = [
                lib(ClosedSet::at_most(c1))?,
                lib(ClosedSet::interval(c1, c2))?,
                lib(ClosedSet::at_least(c2))?,
            ];
            if lambda
                .iter()
                .any(|l| (l - c1).abs() <= 1e-6 || (l - c2).abs() <= 1e-6)
            {
                continue;
            }
            let mut sum = SymMatrix::zeros(dim);
            for s in &sets {
                sum = lib(sum.add(&lib(spectral_projection(&h, s))?))?;
            }
            worst = worst.max(lib(sum.sub(&SymMatrix::identity(dim)))?.frobenius_norm());
        }
        if worst > 1e-9 {
            return Err(format!("partition-of-identity error {worst:.2e} above 1e-9"));
        }
        Ok(format!("worst partition-of-identity error {worst:.2e}"))
    })
}

fn spectral_invariant_compression(opts: &VerifyOptions) -> CheckResult {
    ck("spectral.invariant_compression", || {
        let f = ScalarFunction::exp();
        let mut worst_comm = 0.0_f64;
        let mut worst_defect = 0.0_f64;
        for k in 0..12u64 {
            let mut rng = SplitMix64::stream(opts.seed, 400 + k);
            let d1 = 2 + rng.below(4);
            let d2 = 2 + rng.below(4);
            let (h1, _) = random_symmetric_with_spectrum(d1, -1.0, 1.0, &mut rng);
            let (h2, _) = random_symmetric_with_spectrum(d2, -1.0, 1.0, &mut rng);
            let dim = d1 + d2;
            let h = lib(SymMatrix::from_mat(Mat::from_fn(dim, dim, |i, j| {
                if i < d1 && j < d1 {
                    h1.get(i, j)
                } else if i >= d1 && j >= d1 {
                    h2.get(i - d1, j - d1)
                } else {
                    0.0
                }
            })))?;
            let sub = lib(SubspaceProjection::standard(dim, d1))?;
            worst_comm = worst_comm.max(lib(commutator_norm(&h, &sub))?);
            let (defect, _) = lib(compression_defect_pair(&f, &h, &sub))?;
            worst_defect = worst_defect.max(defect);
        }
        if worst_comm > 1e-10 || worst_defect > 1e-8 {
            return Err(format!(
                "block-invariant subspace: commutator {worst_comm:.2e} or defect {worst_defect:.2e} too large"
            ));
        }
        Ok(format!(
            "commutator {worst_comm:.2e}; calculus defect {worst_defect:.2e}"
        ))
    })
}

fn spectral_determinism(opts: &VerifyOptions) -> CheckResult {
    ck("spectral.determinism", || {
        let mut rng = SplitMix64::stream(opts.seed, 500);
        let (h, _) = random_symmetric_with_spectrum(12, -2.0, 2.0, &mut rng);
        let a = lib(eig_sym(&h))?;
        let b = lib(eig_sym(&h))?;
        for (x, y) in a.eigenvalues().iter().zip(b.eigenvalues()) {
            if x.to_bits() != y.to_bits() {
                return Err("eigenvalues differ between identical runs".into());
            }
        }
        for (x, y) in a.vectors().data().iter().zip(b.vectors().data()) {
            if x.to_bits() != y.to_bits() {
                return Err("eigenvectors differ between identical runs".into());
            }
        }
        Ok("repeated decompositions are bit-identical".into())
    })
}

fn convexity_affine_chord() -> CheckResult {
    ck("convexity.affine_chord", || {
        let abs = ScalarFunction::abs();
        let w = lib(find_affine_chord(&abs, -1.0, 1.0, CHORD_GRID, CHORD_TOL))?
            .ok_or("abs: no affine chord found")?;
        if w.x != 0.0 || w.y != 1.0 || w.t != 0.5 {
            return Err(format!("abs witness ({} {} {}) != (0 1 0.5)", w.x, w.y, w.t));
        }
        let square = ScalarFunction::square();
        if lib(find_affine_chord(&square, -1.0, 1.0, CHORD_GRID, CHORD_TOL))?.is_some() {
            return Err("square: spurious affine chord".into());
        }
        let hinge = lib(ScalarFunction::hinge_splice(0.25))?;
        let wh = lib(find_affine_chord(&hinge, -1.0, 1.0, CHORD_GRID, CHORD_TOL))?
            .ok_or("hinge: flat segment not found")?;
        if wh.x < -0.25 - 1e-12 || wh.y > 0.25 + 1e-12 {
            return Err(format!("hinge witness [{} {}] outside flat segment", wh.x, wh.y));
        }
        let pow = lib(ScalarFunction::abspow(1.5))?;
        if lib(find_affine_chord(&pow, -1.0, 1.0, CHORD_GRID, CHORD_TOL))?.is_some() {
            return Err("abspow:1.5: spurious affine chord".into());
        }
        Ok("abs witness (0 1 0.5); square and abspow strict; hinge flat found".into())
    })
}

fn convexity_chord_exactness() -> CheckResult {
    ck("convexity.chord_exactness", || {
        let n = lib(chord_normalize(&ScalarFunction::square(), 0.0, 1.0))?;
        if (n.c - 0.5).abs() > 1e-10 || (n.gamma - 0.25).abs() > 1e-12 {
            return Err(format!("square chord: c = {} gamma = {}", n.c, n.gamma));
        }
        let b = lib(n.beta(2.0))?;
        if (b - 2.25).abs() > 1e-9 {
            return Err(format!("square beta(2) = {b} != 2.25"));
        }
        let m = lib(chord_normalize(&ScalarFunction::exp(), 0.0, 1.0))?;
        let e1 = std::f64::consts::E - 1.0;
        let c_want = e1.ln();
        let g_want = e1 * (e1.ln() - 1.0) + 1.0;
        // Argmin localization is sqrt(eps)-limited for smooth valleys; the
        // depth is exact.
        if (m.c - c_want).abs() > 1e-7 || (m.gamma - g_want).abs() > 1e-12 {
            return Err(format!("exp chord: c = {} gamma = {}", m.c, m.gamma));
        }
        let margin = lib(strictness_margin(&ScalarFunction::square(), &linspace(0.0, 1.0, 11)))?;
        if (margin - 0.0025).abs() > 1e-15 {
            return Err(format!("square margin {margin} != 0.0025"));
        }
        Ok("square and exp chord normalizations match closed forms".into())
    })
}

fn convexity_chord_ratio() -> CheckResult {
    ck("convexity.chord_ratio", || {
        let fns = [
            ScalarFunction::square(),
            ScalarFunction::exp(),
            lib(ScalarFunction::abspow(1.5))?,
        ];
        let mut checked = 0usize;
        let mut worst_slack = f64::NEG_INFINITY;
        for f in &fns {
            for &a in linspace(-1.0, 0.0, 10).iter() {
                for &dx in linspace(0.2, 1.2, 10).iter() {
                    for &dy in linspace(0.2, 2.0, 10).iter() {
                        let x = a + dx;
                        let y = x + dy;
                        let n = lib(chord_normalize(f, a, x))?;
                        let beta = lib(n.beta(y))?;
                        let ratio = n.gamma / beta;
                        let bound = (x - a) / (y - x);
                        worst_slack = worst_slack.max(ratio - bound);
                        if ratio > bound + 1e-9 {
                            return Err(format!(
                                "{}: ratio {ratio:.6e} exceeds bound {bound:.6e} at a={a} x={x} y={y}",
                                f.name()
                            ));
                        }
                        checked += 1;
                    }
                }
            }
        }
        Ok(format!(
            "{checked} chord triples; worst ratio-bound slack {worst_slack:.2e}"
        ))
    })
}

fn convexity_partition_gaps() -> CheckResult {
    ck("convexity.partition_gaps", || {
        let sq = ScalarFunction::square();
        let p = lib(epsilon_partition(&sq, 0.0, 1.0, 0.5))?;
        if p.points.len() != 6 {
            return Err(format!("square partition has {} points; expected 6", p.points.len()));
        }
        let recs = lib(verify_partition(&sq, &p))?;
        if !recs.iter().all(|r| r.ok) {
            return Err("square partition failed verification".into());
        }
        let abs = ScalarFunction::abs();
        let pa = lib(epsilon_partition(&abs, -1.0, 1.0, 0.5))?;
        if pa.points != vec![-1.0, 0.0, 1.0] {
            return Err(format!("abs partition points {:?}", pa.points));
        }
        if !lib(verify_partition(&abs, &pa))?.iter().all(|r| r.ok) {
            return Err("abs partition failed verification".into());
        }
        let poly = lib(ScalarFunction::parse("polyline:0,0;0.3,0;1,0.7"))?;
        let pp = lib(epsilon_partition(&poly, 0.0, 1.0, 0.5))?;
        let has_bracket = pp
            .points
            .windows(2)
            .any(|w| w[0] <= 0.3 && 0.3 <= w[1] && w[1] - w[0] <= pp.degenerate_width());
        if !has_bracket {
            return Err("polyline kink at 0.3 not bracketed by a degenerate piece".into());
        }
        if !lib(verify_partition(&poly, &pp))?.iter().all(|r| r.ok) {
            return Err("polyline partition failed verification".into());
        }
        let hinge = lib(ScalarFunction::hinge_splice(0.25))?;
        let ph = lib(epsilon_partition(&hinge, -1.0, 1.0, 0.1))?;
        if !ph.kinks.is_empty() {
            return Err("hinge splice reported spurious kinks".into());
        }
        if !lib(verify_partition(&hinge, &ph))?.iter().all(|r| r.ok) {
            return Err("hinge partition failed verification".into());
        }
        Ok(format!(
            "square 6 points; abs kink isolated; 0.3-kink bracketed; hinge {} pieces",
            ph.piece_count()
        ))
    })
}

fn convexity_nonconvex_rejected() -> CheckResult {
    ck("convexity.nonconvex_rejected", || {
        let f = lib(ScalarFunction::parse("polyline:0,0;0.25,1;0.75,-1;1,0"))?;
        match chord_normalize(&f, 0.0, 1.0) {
            Err(Error::NotConvexDetected { .. }) => {
                Ok("non-convex polyline rejected with the dedicated error".into())
            }
            Err(e) => Err(format!("wrong error class: {e}")),
            Ok(_) => Err("non-convex polyline was accepted".into()),
        }
    })
}

fn lab_residual_order(opts: &VerifyOptions) -> CheckResult {
    ck("lab.residual_order", || {
        let mut rng = SplitMix64::stream(opts.seed, 600);
        let (h, _) = random_symmetric_with_spectrum(6, -1.0, 1.0, &mut rng);
        let (g, _) = random_symmetric_with_spectrum(6, -1.0, 1.0, &mut rng);
        let seq = lib(interpolation_family(&h, &g, 10, 0.5, 0.5))?;
        let tvs = lib(TestVectorSet::default_for(6, opts.seed))?;
        let th = lib(Thresholds::new(1e-6, 1e-3))?;
        let rep = lib(convergence_experiment(&seq, &ScalarFunction::square(), &tvs, &th, false))?;
        for (i, (fw, st)) in rep.f_weak.iter().zip(&rep.strong).enumerate() {
            if fw > &(st + 1e-12) {
                return Err(format!("index {i}: weak residual {fw} above strong {st}"));
            }
        }
        Ok("pairing residuals never exceed vector residuals".into())
    })
}

fn lab_shift_identity(opts: &VerifyOptions) -> CheckResult {
    ck("lab.shift_identity", || {
        let mut rng = SplitMix64::stream(opts.seed, 700);
        let (seed_m, _) = random_symmetric_with_spectrum(3, -1.0, 1.0, &mut rng);
        let x0 = lib(eig_sym(&seed_m))?.eigenvalues()[0];
        let seq = lib(shift_construction(&seed_m, 1, x0, 16, 8))?;
        let f = ScalarFunction::exp();
        // Every term is a permutation conjugate of seed (+) x0 I, so its
        // calculus must agree with the target's outside the pinned block
        // and the moving block.
        let mut worst = 0.0_f64;
        let f_seed = lib(matrix_function(&seed_m, &f))?;
        for (idx, term) in seq.terms().iter().enumerate() {
            let n = idx + 1;
            let got = lib(matrix_function(term, &f))?;
            // Rebuild the expected embedding directly.
            let place = |k: usize| if k < 1 { k } else { k + n };
            let mut want = Mat::zeros(16, 16);
            for p in 0..16 {
                want.set(p, p, f.eval(x0));
            }
            for i in 0..3 {
                for j in 0..3 {
                    want.set(place(i), place(j), f_seed.get(i, j));
                }
            }
            let want = lib(SymMatrix::from_mat(want))?;
            let err = lib(got.sub(&want))?.frobenius_norm()
                / 1.0_f64.max(want.frobenius_norm());
            worst = worst.max(err);
        }
        if worst > 1e-9 {
            return Err(format!("shift calculus identity error {worst:.2e} above 1e-9"));
        }
        Ok(format!("shift calculus identity error {worst:.2e}"))
    })
}

fn lab_counterexample_shift() -> CheckResult {
    ck("lab.counterexample_shift", || {
        let abs = ScalarFunction::abs();
        let w = lib(find_affine_chord(&abs, -1.0, 1.0, CHORD_GRID, CHORD_TOL))?
            .ok_or("abs witness missing")?;
        let seed = lib(counterexample_2x2(&abs, &w))?;
        if seed.jensen_defect > 1e-10 || (seed.commutator - 0.5).abs() > 1e-10 {
            return Err(format!(
                "seed defect {} or commutator {} off",
                seed.jensen_defect, seed.commutator
            ));
        }
        let steps = 20;
        let seq = lib(lifted_counterexample(&seed, 64, steps))?;
        let tvs = lib(TestVectorSet::basis(64, 16))?;
        let th = lib(Thresholds::new(1e-6, 1e-6))?;
        let rep = lib(convergence_experiment(&seq, &abs, &tvs, &th, false))?;
        for n in 15..=steps {
            // The raw pairing residual vanishes identically once the block
            // clears the basis; the f-image residual only to eigensolver
            // roundoff.
            if rep.weak[n - 1] != 0.0 || rep.f_weak[n - 1] > 1e-14 {
                return Err(format!("weak residuals not clean at step {n}"));
            }
        }
        for n in 1..=steps {
            // sqrt(0.5) while the moving block overlaps the basis columns,
            // exactly 0.5 once only the pinned column sees it.
            let want = if n <= 14 { 0.5_f64.sqrt() } else { 0.5 };
            if (rep.strong[n - 1] - want).abs() > 1e-12 {
                return Err(format!(
                    "strong residual at step {n} is {} want {want}",
                    rep.strong[n - 1]
                ));
            }
        }
        if !rep.verdicts.violation {
            return Err("violation flag not raised".into());
        }
        let sq_rep = lib(convergence_experiment(
            &seq,
            &ScalarFunction::square(),
            &tvs,
            &th,
            false,
        ))?;
        for n in 15..=steps {
            if (sq_rep.f_weak[n - 1] - 0.25).abs() > 1e-12 {
                return Err(format!("square reference lost its 0.25 plateau at step {n}"));
            }
        }
        if sq_rep.verdicts.violation {
            return Err("square reference must not flag a violation".into());
        }
        Ok("abs violation raised; square reference tail plateau 0.25 kept".into())
    })
}

fn lab_bounded_transform() -> CheckResult {
    ck("lab.bounded_transform", || {
        let abs = ScalarFunction::abs();
        let w = lib(find_affine_chord(&abs, -1.0, 1.0, CHORD_GRID, CHORD_TOL))?
            .ok_or("abs witness missing")?;
        let seed = lib(counterexample_2x2(&abs, &w))?;
        let steps = 20;
        let seq = lib(lifted_counterexample(&seed, 64, steps))?;
        let tvs = lib(TestVectorSet::basis(64, 16))?;
        let th = lib(Thresholds::new(1e-6, 1e-6))?;
        let demo = lib(bounded_transform_demo(&seq, &tvs, &th))?;
        for n in 1..=steps {
            let want = if n <= 14 { 0.125_f64.sqrt() } else { 0.085_f64.sqrt() };
            if (demo.phi_strong[n - 1] - want).abs() > 1e-12 {
                return Err(format!(
                    "bounded-transform residual at step {n} is {} want {want}",
                    demo.phi_strong[n - 1]
                ));
            }
        }
        if demo.min_phi_strong < 0.1 {
            return Err(format!("min residual {} fell below 0.1", demo.min_phi_strong));
        }
        Ok(format!(
            "residuals pinned at sqrt(0.125) then sqrt(0.085); min {:.4}",
            demo.min_phi_strong
        ))
    })
}

fn lab_positive_convergence(opts: &VerifyOptions) -> CheckResult {
    ck("lab.positive_convergence", || {
        let families = (opts.trials / 250).max(10);
        let fns = [
            ScalarFunction::square(),
            lib(ScalarFunction::abspow(1.5))?,
            ScalarFunction::exp(),
        ];
        let th = lib(Thresholds::new(1e-6, 1e-3))?;
        let mut ran = 0usize;
        for k in 0..families as u64 {
            let mut rng = SplitMix64::stream(opts.seed, 800 + k);
            let dim = 4 + rng.below(21);
            let (h, _) = random_symmetric_with_spectrum(dim, -1.0, 1.0, &mut rng);
            let seq = if k % 2 == 0 {
                let (g, _) = random_symmetric_with_spectrum(dim, -1.0, 1.0, &mut rng);
                lib(interpolation_family(&h, &g, 12, 1e-2, 0.2))?
            } else {
                lib(rotation_family(&h, 12, 0.2, 0.2, opts.seed ^ k))?
            };
            let tvs = lib(TestVectorSet::default_for(dim, opts.seed.wrapping_add(k)))?;
            for f in &fns {
                let rep = lib(convergence_experiment(&seq, f, &tvs, &th, false))?;
                if !(rep.verdicts.weak_ok && rep.verdicts.f_weak_ok) {
                    return Err(format!(
                        "family {k} under {} failed its weak tails",
                        f.name()
                    ));
                }
                if !rep.verdicts.strong_ok {
                    return Err(format!(
                        "family {k} under {}: weak tails passed but strong tail failed",
                        f.name()
                    ));
                }
                if rep.verdicts.violation {
                    return Err(format!("family {k} under {}: spurious violation", f.name()));
                }
                ran += 1;
            }
        }
        Ok(format!("{ran} decaying experiments all converged strongly"))
    })
}

fn lab_multiplier_monotone(opts: &VerifyOptions) -> CheckResult {
    ck("lab.multiplier_monotone", || {
        for k in 0..200u64 {
            let mut rng = SplitMix64::stream(opts.seed, 900 + k);
            let n = 1 + rng.below(16);
            let weak: Vec<f64> = (0..n).map(|_| rng.uniform(0.0, 1.0)).collect();
            let strong: Vec<f64> = (0..n).map(|_| rng.uniform(0.0, 1.0)).collect();
            let (w1, w2) = (rng.uniform(1e-6, 1.0), rng.uniform(1e-6, 1.0));
            let (s1, s2) = (rng.uniform(1e-6, 1.0), rng.uniform(1e-6, 1.0));
            let tight = lib(Thresholds::new(w1.min(w2), s1.min(s2)))?;
            let loose = lib(Thresholds::new(w1.max(w2), s1.max(s2)))?;
            let a = multiplier_classify(&weak, &strong, &tight);
            let b = multiplier_classify(&weak, &strong, &loose);
            if a.rank() > b.rank() {
                return Err(format!(
                    "tightening promoted {} to {} at trial {k}",
                    b.label(),
                    a.label()
                ));
            }
        }
        Ok("classification is monotone under threshold tightening (200 trials)".into())
    })
}

fn lab_corner_instance() -> CheckResult {
    ck("lab.corner_instance", || {
        let th = lib(Thresholds::new(1e-6, 1e-6))?;
        let inst = lib(corner_sequence_instance(&ScalarFunction::abs(), 0.5, 8, &th))?;
        if !(inst.h_in_corner && inst.f_in_corner) {
            return Err("term or its image left the corner".into());
        }
        if lib(inst.chi_term.sub(&SymMatrix::diag(&[1.0, 0.0])))?.frobenius_norm() > 1e-12 {
            return Err("term projection is not the corner unit".into());
        }
        if inst.chi_limit.frobenius_norm() != 0.0 {
            return Err("ambient projection at alpha should vanish".into());
        }
        if (inst.mismatch_norm - 1.0).abs() > 1e-12 {
            return Err(format!("mismatch norm {} != 1", inst.mismatch_norm));
        }
        if inst.corner_weak.iter().any(|&v| v > 1e-12)
            || inst.corner_f_weak.iter().any(|&v| v > 1e-12)
        {
            return Err("corner residuals should vanish identically".into());
        }
        if inst.chi_class != MultiplierClass::Neither {
            return Err(format!(
                "projection sequence classified {} instead of neither",
                inst.chi_class.label()
            ));
        }
        let general = lib(corner_sequence_instance(&ScalarFunction::abs(), 0.3, 4, &th))?;
        if (general.mismatch_norm - 1.0).abs() > 1e-12 {
            return Err("alpha = 0.3 instance lost the unit mismatch".into());
        }
        Ok("corner unit vs vanishing ambient projection; mismatch norm 1".into())
    })
}

fn bounds_vector_bound(opts: &VerifyOptions) -> CheckResult {
    ck("bounds.vector_bound", || {
        // Tightness witness first.
        let ones = lib(SymMatrix::from_mat(Mat::from_fn(6, 6, |_, _| 1.0)))?;
        let blocks = lib(BlockStructure::new(vec![2, 3, 1]))?;
        let r = lib(hadamard_vector_bound(&ones, &blocks, &[1.0; 6]))?;
        if !r.holds || (r.quad_form - r.bound).abs() > 1e-12 * r.bound {
            return Err(format!("ones case: quad {} bound {}", r.quad_form, r.bound));
        }
        let mut worst_margin = f64::INFINITY;
        for t in 0..opts.trials as u64 {
            let mut rng = SplitMix64::stream(opts.seed, (1u64 << 32) | t);
            let dim = 2 + rng.below(7);
            let (h, _) = random_symmetric_with_spectrum(dim, 0.0, 2.0, &mut rng);
            let mut sizes = Vec::new();
            let mut left = dim;
            while left > 0 {
                let s = 1 + rng.below(left).min(left - 1);
                sizes.push(s);
                left -= s;
            }
            let blocks = lib(BlockStructure::new(sizes))?;
            let x: Vec<f64> = (0..dim).map(|_| rng.uniform(-1.0, 1.0)).collect();
            let r = lib(hadamard_vector_bound(&h, &blocks, &x))?;
            if !r.holds {
                return Err(format!(
                    "trial {t}: quadratic form {} exceeded bound {}",
                    r.quad_form, r.bound
                ));
            }
            worst_margin = worst_margin.min(r.bound - r.quad_form);
        }
        Ok(format!(
            "{} trials; ones case tight; smallest margin {worst_margin:.2e}",
            opts.trials
        ))
    })
}

fn bounds_norm_bound(opts: &VerifyOptions) -> CheckResult {
    ck("bounds.norm_bound", || {
        let ones = lib(SymMatrix::from_mat(Mat::from_fn(6, 6, |_, _| 1.0)))?;
        let blocks = lib(BlockStructure::new(vec![2, 3, 1]))?;
        let r = lib(block_norm_bound(&ones, &blocks))?;
        if !r.holds || (r.norm - 6.0).abs() > 1e-10 || (r.bound - 6.0).abs() > 1e-10 {
            return Err(format!("ones case: norm {} bound {}", r.norm, r.bound));
        }
        for t in 0..opts.trials as u64 {
            let mut rng = SplitMix64::stream(opts.seed, (2u64 << 32) | t);
            let dim = 2 + rng.below(7);
            let (h, _) = random_symmetric_with_spectrum(dim, 0.0, 1.5, &mut rng);
            let mut sizes = Vec::new();
            let mut left = dim;
            while left > 0 {
                let s = 1 + rng.below(left).min(left - 1);
                sizes.push(s);
                left -= s;
            }
            let blocks = lib(BlockStructure::new(sizes))?;
            let r = lib(block_norm_bound(&h, &blocks))?;
            if !r.holds {
                return Err(format!("trial {t}: norm {} exceeded bound {}", r.norm, r.bound));
            }
        }
        Ok(format!("{} trials; ones case tight", opts.trials))
    })
}

fn bounds_chord_operator(opts: &VerifyOptions) -> CheckResult {
    ck("bounds.chord_operator", || {
        // Scalar ratio bound on a parameter grid.
        let fns = [
            ScalarFunction::square(),
            ScalarFunction::exp(),
            lib(ScalarFunction::abspow(1.5))?,
        ];
        let mut scalar_checked = 0usize;
        for f in &fns {
            for &a in linspace(-1.0, 0.0, 7).iter() {
                for &dx in linspace(0.25, 1.0, 7).iter() {
                    for &dy in linspace(0.25, 1.75, 7).iter() {
                        let n = lib(chord_normalize(f, a, a + dx))?;
                        let beta = lib(n.beta(a + dx + dy))?;
                        if n.gamma / beta > dx / dy + 1e-9 {
                            return Err(format!(
                                "{}: scalar ratio bound failed at a={a} dx={dx} dy={dy}",
                                f.name()
                            ));
                        }
                        scalar_checked += 1;
                    }
                }
            }
        }
        // Full operator checks on random matrices.
        let trials = (opts.trials / 10).max(50);
        let params = [(-0.25, 0.75, 1.5), (0.0, 1.0, 2.0), (0.1, 0.9, 1.75)];
        for t in 0..trials as u64 {
            let mut rng = SplitMix64::stream(opts.seed, (3u64 << 32) | t);
            let (h, _) = random_symmetric_with_spectrum(5, -1.0, 3.0, &mut rng);
            let f = &fns[(t % 3) as usize];
            let (a, x, y) = params[(t as usize / 3) % 3];
            let r = lib(chord_operator_bound(f, &h, a, x, y))?;
            if !r.all_ok() {
                return Err(format!(
                    "trial {t} ({}): ratio_ok={} sandwich={:.2e} min_eig={:.2e}",
                    f.name(),
                    r.ratio_ok,
                    r.sandwich_norm,
                    r.operator_min_eig
                ));
            }
        }
        Ok(format!(
            "{scalar_checked} scalar triples and {trials} operator trials hold"
        ))
    })
}

fn bounds_scan_modulus(opts: &VerifyOptions) -> CheckResult {
    ck("bounds.scan_modulus", || {
        let cfg = ScanConfig {
            dim: 8,
            m: 4,
            trials: opts.trials,
            seed: opts.seed,
        };
        let square_records = lib(jensen_commutator_scan(&ScalarFunction::square(), &cfg))?;
        for r in &square_records {
            if r.jensen_defect <= 1e-10 && r.commutator >= 0.1 {
                return Err(format!(
                    "square trial {}: defect {} with commutator {}",
                    r.trial, r.jensen_defect, r.commutator
                ));
            }
        }
        // The strict-convexity witness pair for abs joins the sample as a
        // deterministic probe, and the modulus curve must see it.
        let abs = ScalarFunction::abs();
        let w = lib(find_affine_chord(&abs, -1.0, 1.0, CHORD_GRID, CHORD_TOL))?
            .ok_or("abs witness missing")?;
        let seed_m = lib(counterexample_2x2(&abs, &w))?;
        let e0 = lib(SubspaceProjection::standard(2, 1))?;
        let (defect, comm) = lib(compression_defect_pair(&abs, &seed_m.h0, &e0))?;
        if defect > 1e-10 || comm < 0.1 {
            return Err(format!("witness probe off: defect {defect} commutator {comm}"));
        }
        let scan_small = ScanConfig {
            dim: cfg.dim,
            m: cfg.m,
            trials: (opts.trials / 10).max(100),
            seed: cfg.seed,
        };
        let mut abs_records = lib(jensen_commutator_scan(&abs, &scan_small))?;
        abs_records.push(ScanRecord {
            trial: abs_records.len() as u64,
            jensen_defect: defect,
            commutator: comm,
        });
        let curve = empirical_modulus(&abs_records);
        let mut last: Option<f64> = None;
        for p in &curve {
            if let (Some(prev), Some(cur)) = (last, p.delta_hat) {
                if cur < prev - 1e-15 {
                    return Err(format!("modulus curve decreased at eps {}", p.eps));
                }
            }
            if p.delta_hat.is_some() {
                last = p.delta_hat;
            }
        }
        let near = curve
            .iter()
            .filter(|p| p.eps <= comm)
            .filter_map(|p| p.delta_hat)
            .fold(f64::INFINITY, f64::min);
        if near > 1e-10 {
            return Err(format!("witness probe invisible in modulus curve: {near:.2e}"));
        }
        let square_curve = empirical_modulus(&square_records);
        let s01 = square_curve
            .iter()
            .filter(|p| p.eps >= 0.1)
            .filter_map(|p| p.delta_hat)
            .fold(f64::INFINITY, f64::min);
        if s01 <= 1e-10 {
            return Err("square modulus collapsed at eps 0.1".into());
        }
        Ok(format!(
            "{} square trials keep positive defect above eps 0.1; abs witness visible",
            opts.trials
        ))
    })
}

fn custom_function(opts: &VerifyOptions, f: &ScalarFunction) -> CheckResult {
    ck("custom.function", || {
        let (lo, hi) = f.interval().finite_bracket(-1.0, 1.0);
        let witness = lib(find_affine_chord(f, lo, hi, CHORD_GRID, CHORD_TOL))?;
        let detail = match witness {
            Some(w) => {
                let seed = lib(counterexample_2x2(f, &w))?;
                if seed.jensen_defect > 1e-8 {
                    return Err(format!(
                        "witness found but seed defect {} is not small",
                        seed.jensen_defect
                    ));
                }
                format!(
                    "affine chord at ({} {} {}); seed defect {:.2e} commutator {:.2e}",
                    w.x, w.y, w.t, seed.jensen_defect, seed.commutator
                )
            }
            None => {
                let cfg = ScanConfig {
                    dim: 6,
                    m: 3,
                    trials: (opts.trials / 10).max(100),
                    seed: opts.seed,
                };
                let records = lib(jensen_commutator_scan(f, &cfg))?;
                for r in &records {
                    if r.jensen_defect <= 1e-10 && r.commutator >= 0.1 {
                        return Err(format!(
                            "strict on mesh yet trial {} has defect {} at commutator {}",
                            r.trial, r.jensen_defect, r.commutator
                        ));
                    }
                }
                format!(
                    "strict on mesh; {} scan trials keep positive defect",
                    records.len()
                )
            }
        };
        Ok(detail)
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick_opts() -> VerifyOptions {
        VerifyOptions {
            seed: 1,
            trials: 300,
            custom_f: None,
        }
    }

    #[test]
    fn battery_passes_and_is_deterministic() {
        let opts = quick_opts();
        let a = run_all(&opts);
        assert!(a.len() >= 21);
        for r in &a {
            assert!(r.passed, "check {} failed: {}", r.name, r.detail);
            assert!(!r.detail.contains(','), "detail has a comma: {}", r.detail);
            assert!(!r.name.contains(','), "name has a comma: {}", r.name);
        }
        let b = run_all(&opts);
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.name, y.name);
            assert_eq!(x.passed, y.passed);
            assert_eq!(x.detail, y.detail, "check {} detail drifted", x.name);
        }
    }

    #[test]
    fn custom_function_check_runs_both_branches(){
        let mut opts = quick_opts();
        opts.custom_f = Some(ScalarFunction::abs());
        let results = run_all(&opts);
        let custom = results.iter().find(|r| r.name == "custom.function").unwrap();
        assert!(custom.passed, "{}", custom.detail);
        assert!(custom.detail.contains("affine chord"));

        opts.custom_f = Some(ScalarFunction::square());
        let results = run_all(&opts);
        let custom = results.iter().find(|r| r.name == "custom.function").unwrap();
        assert!(custom.passed, "{}", custom.detail);
        assert!(custom.detail.contains("strict on mesh"));
    }
}
