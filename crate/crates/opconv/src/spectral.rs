//! Spectral calculus for real symmetric matrices: validated symmetric
//! containers, a cyclic Jacobi eigensolver, functional calculus f(H),
//! spectral projections, compressions to subspaces, and the norms the
//! experiment layer keeps asking for.
//!
//! The eigensolver is deterministic: a fixed sweep order, rotations until the
//! off-diagonal Frobenius norm falls below 1e-12 times the input Frobenius
//! norm, at most 100 sweeps, eigenvalues sorted ascending with ties broken by
//! original index. Identical input bits give identical output bits.

use crate::convexity::ScalarFunction;
use crate::error::{Error, Result};
use crate::mat::{dot, Mat};

/// Relative symmetry tolerance for constructing a [`SymMatrix`].
pub const SYMMETRY_TOL: f64 = 1e-12;
/// Off-diagonal reduction target for the Jacobi sweep, relative to the input
/// Frobenius norm.
pub const EIG_OFF_TARGET: f64 = 1e-12;
/// Hard sweep cap for the Jacobi iteration.
pub const MAX_SWEEPS: usize = 100;
/// Boundary tolerance for spectral-set membership and domain checks.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
/// Relative tolerance for the positive-semidefiniteness verdict.
pub const PSD_TOL: f64 = 1e-9;
/// Per-entry orthonormality tolerance for subspace bases.
pub const ORTHO_TOL: f64 = 1e-10;

/// Validated real symmetric matrix.
///
/// Construction checks that every entry is finite and that
/// |a[i][j] - a[j][i]| <= 1e-12 * max(1, max|entry|). Stored entries are the
/// ones supplied; no silent symmetrization happens on input paths.
#[derive(Clone, Debug, PartialEq)]
pub struct SymMatrix {
    mat: Mat,
}

impl SymMatrix {
    pub fn from_mat(mat: Mat) -> Result<Self> {
        if mat.rows() != mat.cols() {
            return Err(Error::DimensionMismatch {
                left: mat.rows(),
                right: mat.cols(),
            });
        }
        if !mat.all_finite() {
            return Err(Error::NonFinite);
        }
        let tol = SYMMETRY_TOL * 1.0_f64.max(mat.max_abs());
        for i in 0..mat.rows() {
            for j in (i + 1)..mat.cols() {
                let delta = (mat.get(i, j) - mat.get(j, i)).abs();
                if delta > tol {
                    return Err(Error::NotSymmetric { i, j, delta });
                }
            }
        }
        Ok(SymMatrix { mat })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let mat = Mat::from_rows(rows).ok_or(Error::BadMatrixJson {
            msg: "rows must be non-empty and rectangular".into(),
        })?;
        SymMatrix::from_mat(mat)
    }

    /// Averages a numerically near-symmetric product into an exactly
    /// symmetric matrix. Used for products like B^T H B whose asymmetry is
    /// pure roundoff.
    pub fn symmetrized(mat: Mat) -> Result<Self> {
        if mat.rows() != mat.cols() {
            return Err(Error::DimensionMismatch {
                left: mat.rows(),
                right: mat.cols(),
            });
        }
        if !mat.all_finite() {
            return Err(Error::NonFinite);
        }
        let n = mat.rows();
        let sym = Mat::from_fn(n, n, |i, j| 0.5 * (mat.get(i, j) + mat.get(j, i)));
        Ok(SymMatrix { mat: sym })
    }

    pub fn zeros(dim: usize) -> Self {
        SymMatrix {
            mat: Mat::zeros(dim, dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        SymMatrix {
            mat: Mat::identity(dim),
        }
    }

    pub fn diag(entries: &[f64]) -> Self {
        let mut mat = Mat::zeros(entries.len(), entries.len());
        for (i, v) in entries.iter().enumerate() {
            mat.set(i, i, *v);
        }
        SymMatrix { mat }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.mat.rows()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.mat.get(i, j)
    }

    pub fn mat(&self) -> &Mat {
        &self.mat
    }

    pub fn sub(&self, rhs: &SymMatrix) -> Result<SymMatrix> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: rhs.dim(),
            });
        }
        Ok(SymMatrix {
            mat: self.mat.sub(&rhs.mat),
        })
    }

    pub fn add(&self, rhs: &SymMatrix) -> Result<SymMatrix> {
        if self.dim() != rhs.dim() {
            return Err(Error::DimensionMismatch {
                left: self.dim(),
                right: rhs.dim(),
            });
        }
        Ok(SymMatrix {
            mat: self.mat.add(&rhs.mat),
        })
    }

    pub fn scale(&self, c: f64) -> SymMatrix {
        SymMatrix {
            mat: self.mat.scale(c),
        }
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.frobenius_norm()
    }

    pub fn max_abs(&self) -> f64 {
        self.mat.max_abs()
    }
}

/// Orthonormal basis of a subspace, stored as a dim x m column matrix.
#[derive(Clone, Debug)]
pub struct SubspaceProjection {
    basis: Mat,
}

impl SubspaceProjection {
    pub fn new(basis: Mat) -> Result<Self> {
        let (dim, m) = (basis.rows(), basis.cols());
        if m == 0 || m > dim {
            return Err(Error::BadRange {
                msg: format!("subspace rank {m} must satisfy 1 <= m <= dim = {dim}"),
            });
        }
        if !basis.all_finite() {
            return Err(Error::NonFinite);
        }
        let mut deviation = 0.0_f64;
        for a in 0..m {
            let ca = basis.col(a);
            for b in a..m {
                let cb = basis.col(b);
                let want = if a == b { 1.0 } else { 0.0 };
                deviation = deviation.max((dot(&ca, &cb) - want).abs());
            }
        }
        if deviation > ORTHO_TOL {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(SubspaceProjection { basis })
    }

    /// Span of the first `m` coordinate vectors.
    pub fn standard(dim: usize, m: usize) -> Result<Self> {
        SubspaceProjection::new(Mat::from_fn(dim, m, |i, j| if i == j { 1.0 } else { 0.0 }))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.basis.rows()
    }

    #[inline]
    pub fn rank(&self) -> usize {
        self.basis.cols()
    }

    pub fn basis(&self) -> &Mat {
        &self.basis
    }

    /// The orthogonal projection B B^T onto the subspace.
    pub fn projection_matrix(&self) -> SymMatrix {
        let p = self.basis.matmul(&self.basis.transpose());
        SymMatrix::symmetrized(p).expect("projection entries are finite")
    }
}

/// Finite union of closed intervals; sides may be unbounded.
/// Membership checks widen every interval by the given tolerance.
#[derive(Clone, Debug)]
pub struct ClosedSet {
    intervals: Vec<(f64, f64)>,
}

impl ClosedSet {
    pub fn interval(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo > hi {
            return Err(Error::BadRange {
                msg: format!("closed interval needs lo <= hi, got [{lo}, {hi}]"),
            });
        }
        Ok(ClosedSet {
            intervals: vec![(lo, hi)],
        })
    }

    pub fn point(x: f64) -> Result<Self> {
        ClosedSet::interval(x, x)
    }

    pub fn at_least(lo: f64) -> Result<Self> {
        ClosedSet::interval(lo, f64::INFINITY)
    }

    pub fn at_most(hi: f64) -> Result<Self> {
        ClosedSet::interval(f64::NEG_INFINITY, hi)
    }

    pub fn union(sets: &[ClosedSet]) -> Self {
        let mut intervals = Vec::new();
        for s in sets {
            intervals.extend_from_slice(&s.intervals);
        }
        ClosedSet { intervals }
    }

    pub fn contains(&self, x: f64, tol: f64) -> bool {
        self.intervals
            .iter()
            .any(|(lo, hi)| x >= lo - tol && x <= hi + tol)
    }
}

/// Result of `eig_sym`: eigenvalues ascending (ties broken by original
/// position in the Jacobi output) and the matching orthonormal eigenvector
/// columns.
#[derive(Clone, Debug)]
pub struct EigenDecomposition {
    eigenvalues: Vec<f64>,
    vectors: Mat,
}

impl EigenDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn vectors(&self) -> &Mat {
        &self.vectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn max_abs_eigenvalue(&self) -> f64 {
        self.eigenvalues
            .iter()
            .fold(0.0_f64, |m, l| m.max(l.abs()))
    }

    /// V diag(g(lambda)) V^T for an arbitrary per-eigenvalue map. No domain
    /// checks; callers that take a [`ScalarFunction`] check first.
    fn assemble(&self, values: &[f64]) -> SymMatrix {
        let n = self.dim();
        let v = &self.vectors;
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let mut s = 0.0;
                for (k, gk) in values.iter().enumerate() {
                    s += gk * v.get(i, k) * v.get(j, k);
                }
                m.set(i, j, s);
                m.set(j, i, s);
            }
        }
        SymMatrix { mat: m }
    }

    pub fn reconstruct(&self) -> SymMatrix {
        self.assemble(&self.eigenvalues)
    }

    fn check_domain(&self, f: &ScalarFunction) -> Result<()> {
        for &l in &self.eigenvalues {
            if !f.interval().contains(l, MEMBERSHIP_TOL) {
                return Err(Error::SpectrumOutOfDomain {
                    eigenvalue: l,
                    lo: f.interval().lo(),
                    hi: f.interval().hi(),
                });
            }
        }
        Ok(())
    }

    /// f(H) from this decomposition.
    pub fn matrix_function(&self, f: &ScalarFunction) -> Result<SymMatrix> {
        self.check_domain(f)?;
        let values: Vec<f64> = self.eigenvalues.iter().map(|&l| f.eval(l)).collect();
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(self.assemble(&values))
    }

    /// f(H) applied to a block of column vectors: V diag(f(lambda)) V^T cols.
    /// Costs O(dim^2 * k) instead of the O(dim^3) full assembly.
    pub fn apply_function(&self, f: &ScalarFunction, cols: &Mat) -> Result<Mat> {
        if cols.rows() != self.dim() {
            return Err(Error::DimensionMismatch {
                left: cols.rows(),
                right: self.dim(),
            });
        }
        self.check_domain(f)?;
        let mut w = self.vectors.transpose().matmul(cols);
        for (k, &l) in self.eigenvalues.iter().enumerate() {
            let fl = f.eval(l);
            if !fl.is_finite() {
                return Err(Error::NonFinite);
            }
            for j in 0..w.cols() {
                w.set(k, j, fl * w.get(k, j));
            }
        }
        Ok(self.vectors.matmul(&w))
    }

    /// Orthogonal projection onto the span of eigenvectors whose eigenvalues
    /// lie in `set` (membership widened by the boundary tolerance).
    pub fn spectral_projection(&self, set: &ClosedSet) -> SymMatrix {
        let ind: Vec<f64> = self
            .eigenvalues
            .iter()
            .map(|&l| if set.contains(l, MEMBERSHIP_TOL) { 1.0 } else { 0.0 })
            .collect();
        self.assemble(&ind)
    }
}

fn off_diagonal_frobenius(a: &Mat) -> f64 {
    let n = a.rows();
    let mut s = 0.0;
    for p in 0..n {
        for q in (p + 1)..n {
            let v = a.get(p, q);
            s += 2.0 * v * v;
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi eigensolver.
///
/// Sweeps the strict upper triangle in row-major order, rotating away each
/// nonzero entry; stops when the off-diagonal Frobenius norm is at most
/// 1e-12 * ||H||_F, errors with `ConvergenceFailure` after 100 sweeps.
pub fn eig_sym(h: &SymMatrix) -> Result<EigenDecomposition> {
    let n = h.dim();
    let mut a = h.mat().clone();
    let mut v = Mat::identity(n);
    let target = EIG_OFF_TARGET * h.frobenius_norm();

    let mut converged = false;
    for _sweep in 0..=MAX_SWEEPS {
        if off_diagonal_frobenius(&a) <= target {
            converged = true;
            break;
        }
        if _sweep == MAX_SWEEPS {
            break;
        }
        for p in 0..n.saturating_sub(1) {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == 0.0 {
                    continue;
                }
                let app = a.get(p, p);
                let aqq = a.get(q, q);
                let theta = (aqq - app) / (2.0 * apq);
                // Stable tangent of the rotation angle; the sign choice keeps
                // |t| <= 1 and degrades to t -> 0 as theta -> +-inf.
                let t = if theta >= 0.0 {
                    1.0 / (theta + (1.0 + theta * theta).sqrt())
                } else {
                    1.0 / (theta - (1.0 + theta * theta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let tau = s / (1.0 + c);

                a.set(p, p, app - t * apq);
                a.set(q, q, aqq + t * apq);
                a.set(p, q, 0.0);
                a.set(q, p, 0.0);
                for j in 0..n {
                    if j == p || j == q {
                        continue;
                    }
                    let ajp = a.get(j, p);
                    let ajq = a.get(j, q);
                    let njp = ajp - s * (ajq + tau * ajp);
                    let njq = ajq + s * (ajp - tau * ajq);
                    a.set(j, p, njp);
                    a.set(p, j, njp);
                    a.set(j, q, njq);
                    a.set(q, j, njq);
                }
                for j in 0..n {
                    let vjp = v.get(j, p);
                    let vjq = v.get(j, q);
                    v.set(j, p, vjp - s * (vjq + tau * vjp));
                    v.set(j, q, vjq + s * (vjp - tau * vjq));
                }
            }
        }
    }
    if !converged {
        return Err(Error::ConvergenceFailure { sweeps: MAX_SWEEPS });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a.get(i, i)
            .partial_cmp(&a.get(j, j))
            .expect("eigenvalues are finite")
            .then(i.cmp(&j))
    });
    let eigenvalues: Vec<f64> = order.iter().map(|&k| a.get(k, k)).collect();
    let vectors = Mat::from_fn(n, n, |i, j| v.get(i, order[j]));
    Ok(EigenDecomposition {
        eigenvalues,
        vectors,
    })
}

/// f(H) = V diag(f(lambda)) V^T. Errors if some eigenvalue leaves the domain
/// of `f` by more than the boundary tolerance.
pub fn matrix_function(h: &SymMatrix, f: &ScalarFunction) -> Result<SymMatrix> {
    eig_sym(h)?.matrix_function(f)
}

/// Spectral projection chi_E(H) for a finite union of closed intervals.
pub fn spectral_projection(h: &SymMatrix, set: &ClosedSet) -> Result<SymMatrix> {
    Ok(eig_sym(h)?.spectral_projection(set))
}

/// Compression B^T H B of H to the subspace spanned by the columns of B.
pub fn compress(h: &SymMatrix, subspace: &SubspaceProjection) -> Result<SymMatrix> {
    if h.dim() != subspace.dim() {
        return Err(Error::DimensionMismatch {
            left: h.dim(),
            right: subspace.dim(),
        });
    }
    let b = subspace.basis();
    let prod = b.transpose().matmul(h.mat()).matmul(b);
    SymMatrix::symmetrized(prod)
}

/// Operator (spectral) norm: max |eigenvalue|.
pub fn operator_norm(h: &SymMatrix) -> Result<f64> {
    Ok(eig_sym(h)?.max_abs_eigenvalue())
}

/// ||P H - H P|| for the orthogonal projection P onto the subspace, computed
/// as the largest singular value of the (skew-symmetric) commutator.
pub fn commutator_norm(h: &SymMatrix, subspace: &SubspaceProjection) -> Result<f64> {
    if h.dim() != subspace.dim() {
        return Err(Error::DimensionMismatch {
            left: h.dim(),
            right: subspace.dim(),
        });
    }
    let p = subspace.projection_matrix();
    let c = p.mat().matmul(h.mat()).sub(&h.mat().matmul(p.mat()));
    let gram = SymMatrix::symmetrized(c.transpose().matmul(&c))?;
    let top = eig_sym(&gram)?
        .eigenvalues()
        .last()
        .copied()
        .unwrap_or(0.0)
        .max(0.0);
    Ok(top.sqrt())
}

/// Positive-semidefiniteness up to the relative tolerance
/// min eigenvalue >= -1e-9 * max(1, ||H||).
pub fn is_psd(h: &SymMatrix) -> Result<bool> {
    let d = eig_sym(h)?;
    let scale = 1.0_f64.max(d.max_abs_eigenvalue());
    Ok(d.min_eigenvalue() >= -PSD_TOL * scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convexity::ScalarFunction;
    use crate::rng::{random_symmetric_with_spectrum, SplitMix64};
    use proptest::prelude::*;

    fn half_projection() -> SymMatrix {
        SymMatrix::from_rows(&[vec![0.5, -0.5], vec![-0.5, 0.5]]).unwrap()
    }

    #[test]
    fn rejects_asymmetry_beyond_tolerance() {
        let r = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0 + 1e-6, 1.0]]);
        assert!(matches!(r, Err(Error::NotSymmetric { .. })));
    }

    #[test]
    fn accepts_asymmetry_within_tolerance() {
        let r = SymMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0 + 1e-13, 1.0]]);
        assert!(r.is_ok());
    }

    #[test]
    fn rejects_non_finite() {
        let r = SymMatrix::from_rows(&[vec![f64::NAN, 0.0], vec![0.0, 1.0]]);
        assert!(matches!(r, Err(Error::NonFinite)));
    }

    #[test]
    fn eig_diagonal_sorts_ascending() {
        let d = eig_sym(&SymMatrix::diag(&[2.0, 1.0])).unwrap();
        assert_eq!(d.eigenvalues(), &[1.0, 2.0]);
    }

    #[test]
    fn eig_of_half_projection_is_zero_one() {
        let d = eig_sym(&half_projection()).unwrap();
        assert!(d.eigenvalues()[0].abs() <= 1e-12);
        assert!((d.eigenvalues()[1] - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn eig_zero_matrix() {
        let d = eig_sym(&SymMatrix::zeros(3)).unwrap();
        assert_eq!(d.eigenvalues(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn eig_one_by_one() {
        let d = eig_sym(&SymMatrix::diag(&[-4.5])).unwrap();
        assert_eq!(d.eigenvalues(), &[-4.5]);
        assert_eq!(d.vectors().get(0, 0), 1.0);
    }

    #[test]
    fn eig_is_bitwise_deterministic() {
        let mut rng = SplitMix64::new(77);
        let (h, _) = random_symmetric_with_spectrum(9, -2.0, 2.0, &mut rng);
        let a = eig_sym(&h).unwrap();
        let b = eig_sym(&h).unwrap();
        for (x, y) in a.eigenvalues().iter().zip(b.eigenvalues()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        for (x, y) in a.vectors().data().iter().zip(b.vectors().data()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }

    #[test]
    fn reconstruction_and_orthonormality_bounds() {
        let mut rng = SplitMix64::new(5);
        for dim in [1usize, 2, 3, 5, 8, 13, 16] {
            let (h, _) = random_symmetric_with_spectrum(dim, -3.0, 3.0, &mut rng);
            let d = eig_sym(&h).unwrap();
            let recon_err = d.reconstruct().sub(&h).unwrap().frobenius_norm();
            let scale = 1.0_f64.max(h.frobenius_norm());
            assert!(
                recon_err <= 1e-10 * dim as f64 * scale,
                "dim {dim}: reconstruction error {recon_err}"
            );
            let vtv = d.vectors().transpose().matmul(d.vectors());
            let ortho = vtv.sub(&Mat::identity(dim)).frobenius_norm();
            assert!(ortho <= 1e-10 * dim as f64, "dim {dim}: orthonormality {ortho}");
        }
    }

    #[test]
    fn matrix_function_identity_returns_input() {
        let mut rng = SplitMix64::new(8);
        let (h, _) = random_symmetric_with_spectrum(6, -1.0, 1.0, &mut rng);
        let f = ScalarFunction::identity();
        let g = matrix_function(&h, &f).unwrap();
        let err = g.sub(&h).unwrap().frobenius_norm();
        assert!(err <= 1e-10 * 1.0_f64.max(h.frobenius_norm()));
    }

    #[test]
    fn matrix_function_square_on_diagonal() {
        let h = SymMatrix::diag(&[1.0, -2.0, 0.5]);
        let g = matrix_function(&h, &ScalarFunction::square()).unwrap();
        let want = SymMatrix::diag(&[1.0, 4.0, 0.25]);
        assert!(g.sub(&want).unwrap().frobenius_norm() <= 1e-12);
    }

    #[test]
    fn matrix_function_domain_violation() {
        let h = SymMatrix::diag(&[2.0]);
        let f = ScalarFunction::polyline(&[(0.0, 0.0), (1.0, 1.0)]).unwrap();
        assert!(matches!(
            matrix_function(&h, &f),
            Err(Error::SpectrumOutOfDomain { .. })
        ));
    }

    #[test]
    fn abs_fixes_projections() {
        let h = half_projection();
        let g = matrix_function(&h, &ScalarFunction::abs()).unwrap();
        assert!(g.sub(&h).unwrap().frobenius_norm() <= 1e-12);
    }

    #[test]
    fn matrix_function_commutes_with_input() {
        let mut rng = SplitMix64::new(21);
        let (h, _) = random_symmetric_with_spectrum(7, -2.0, 2.0, &mut rng);
        let f = ScalarFunction::exp();
        let fh = matrix_function(&h, &f).unwrap();
        let comm = fh
            .mat()
            .matmul(h.mat())
            .sub(&h.mat().matmul(fh.mat()))
            .frobenius_norm();
        let bound = 1e-8 * operator_norm(&h).unwrap() * operator_norm(&fh).unwrap();
        assert!(comm <= bound.max(1e-12), "commutator {comm} vs bound {bound}");
    }

    #[test]
    fn spectral_projection_point_set() {
        let h = half_projection();
        let p = spectral_projection(&h, &ClosedSet::point(1.0).unwrap()).unwrap();
        // Rank-one projection onto (1,-1)/sqrt(2).
        assert!(p.sub(&h).unwrap().frobenius_norm() <= 1e-12);
        let idem = p.mat().matmul(p.mat()).sub(p.mat()).frobenius_norm();
        assert!(idem <= 1e-9);
    }

    #[test]
    fn spectral_projection_half_line() {
        let h = SymMatrix::diag(&[-1.0, 1.0]);
        let p = spectral_projection(&h, &ClosedSet::at_least(0.0).unwrap()).unwrap();
        let want = SymMatrix::diag(&[0.0, 1.0]);
        assert!(p.sub(&want).unwrap().frobenius_norm() <= 1e-12);
    }

    #[test]
    fn spectral_projection_full_set_is_identity() {
        let mut rng = SplitMix64::new(30);
        let (h, _) = random_symmetric_with_spectrum(5, -1.0, 1.0, &mut rng);
        let p = spectral_projection(&h, &ClosedSet::interval(-2.0, 2.0).unwrap()).unwrap();
        let err = p.sub(&SymMatrix::identity(5)).unwrap().frobenius_norm();
        assert!(err <= 1e-9);
    }

    #[test]
    fn projection_additivity_over_partition() {
        let mut rng = SplitMix64::new(31);
        let (h, _) = random_symmetric_with_spectrum(8, -1.0, 1.0, &mut rng);
        let cuts = [-0.5, 0.1, 0.4];
        let sets = [
            ClosedSet::at_most(cuts[0]).unwrap(),
            ClosedSet::interval(cuts[0], cuts[1]).unwrap(),
            ClosedSet::interval(cuts[1], cuts[2]).unwrap(),
            ClosedSet::at_least(cuts[2]).unwrap(),
        ];
        // Guard: stay away from cut points so the pieces are disjoint on the
        // spectrum and the indicators sum to one.
        let d = eig_sym(&h).unwrap();
        if d.eigenvalues()
            .iter()
            .any(|l| cuts.iter().any(|c| (l - c).abs() <= 2.0 * MEMBERSHIP_TOL))
        {
            return;
        }
        let mut sum = SymMatrix::zeros(8);
        for s in &sets {
            sum = sum.add(&spectral_projection(&h, s).unwrap()).unwrap();
        }
        let err = sum.sub(&SymMatrix::identity(8)).unwrap().frobenius_norm();
        assert!(err <= 1e-9, "partition additivity error {err}");
    }

    #[test]
    fn compress_examples() {
        let h = SymMatrix::diag(&[1.0, 2.0, 3.0]);
        let m = SubspaceProjection::standard(3, 2).unwrap();
        let c = compress(&h, &m).unwrap();
        assert!(c.sub(&SymMatrix::diag(&[1.0, 2.0])).unwrap().frobenius_norm() <= 1e-15);

        let e1 = SubspaceProjection::standard(2, 1).unwrap();
        let c = compress(&half_projection(), &e1).unwrap();
        assert_eq!(c.dim(), 1);
        assert!((c.get(0, 0) - 0.5).abs() <= 1e-15);

        let full = SubspaceProjection::standard(3, 3).unwrap();
        let c = compress(&h, &full).unwrap();
        assert!(c.sub(&h).unwrap().frobenius_norm() <= 1e-15);
    }

    #[test]
    fn operator_norm_examples() {
        assert!((operator_norm(&SymMatrix::diag(&[-3.0, 2.0])).unwrap() - 3.0).abs() <= 1e-12);
        let ones = SymMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!((operator_norm(&ones).unwrap() - 2.0).abs() <= 1e-12);
        assert_eq!(operator_norm(&SymMatrix::zeros(4)).unwrap(), 0.0);
    }

    #[test]
    fn commutator_norm_examples() {
        let e1 = SubspaceProjection::standard(2, 1).unwrap();
        let c = commutator_norm(&half_projection(), &e1).unwrap();
        assert!((c - 0.5).abs() <= 1e-10, "commutator {c}");

        // Block-diagonal matrix commutes with the span of its leading block.
        let h = SymMatrix::diag(&[1.0, 2.0, 5.0]);
        let m = SubspaceProjection::standard(3, 2).unwrap();
        assert!(commutator_norm(&h, &m).unwrap() <= 1e-12);

        // Full space: P = I commutes with everything.
        let mut rng = SplitMix64::new(40);
        let (h, _) = random_symmetric_with_spectrum(4, -1.0, 1.0, &mut rng);
        let full = SubspaceProjection::standard(4, 4).unwrap();
        assert!(commutator_norm(&h, &full).unwrap() <= 1e-12);
    }

    #[test]
    fn is_psd_examples() {
        let ones = SymMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert!(is_psd(&ones).unwrap());
        assert!(!is_psd(&SymMatrix::diag(&[1.0, -1.0])).unwrap());
        assert!(is_psd(&SymMatrix::zeros(3)).unwrap());
    }

    #[test]
    fn compression_commutes_with_calculus_when_commutator_vanishes() {
        // H block-diagonal, M the span of the first block: pr(f(H)) = f(pr(H)).
        let h = SymMatrix::from_rows(&[
            vec![0.3, 0.2, 0.0, 0.0],
            vec![0.2, -0.4, 0.0, 0.0],
            vec![0.0, 0.0, 0.9, 0.1],
            vec![0.0, 0.0, 0.1, 0.2],
        ])
        .unwrap();
        let m = SubspaceProjection::standard(4, 2).unwrap();
        assert!(commutator_norm(&h, &m).unwrap() <= 1e-12);
        let f = ScalarFunction::exp();
        let lhs = compress(&matrix_function(&h, &f).unwrap(), &m).unwrap();
        let rhs = matrix_function(&compress(&h, &m).unwrap(), &f).unwrap();
        let err = lhs.sub(&rhs).unwrap().frobenius_norm();
        assert!(err <= 1e-8, "compression calculus error {err}");
    }

    #[test]
    fn apply_function_matches_full_assembly() {
        let mut rng = SplitMix64::new(55);
        let (h, _) = random_symmetric_with_spectrum(6, -1.5, 1.5, &mut rng);
        let d = eig_sym(&h).unwrap();
        let f = ScalarFunction::exp();
        let full = d.matrix_function(&f).unwrap();
        let cols = Mat::from_fn(6, 3, |i, j| if i == j { 1.0 } else { 0.25 * (i + j) as f64 / 6.0 });
        let fast = d.apply_function(&f, &cols).unwrap();
        let slow = full.mat().matmul(&cols);
        assert!(fast.sub(&slow).frobenius_norm() <= 1e-10);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn polynomial_calculus_is_a_homomorphism(
            seed in 0u64..1_000_000,
            dim in 1usize..10,
            c0 in -1.0f64..1.0,
            c1 in -1.0f64..1.0,
            c2 in -1.0f64..1.0,
        ) {
            let mut rng = SplitMix64::new(seed);
            let (h, _) = random_symmetric_with_spectrum(dim, -1.0, 1.0, &mut rng);
            let f = ScalarFunction::polynomial(&[c0, c1, c2]);
            let via_calculus = matrix_function(&h, &f).unwrap();
            let h2 = SymMatrix::symmetrized(h.mat().matmul(h.mat())).unwrap();
            let direct = SymMatrix::identity(dim)
                .scale(c0)
                .add(&h.scale(c1)).unwrap()
                .add(&h2.scale(c2)).unwrap();
            let scale = 1.0_f64.max(direct.frobenius_norm());
            let err = via_calculus.sub(&direct).unwrap().frobenius_norm();
            prop_assert!(err <= 1e-8 * scale, "homomorphism error {}", err);
        }

        #[test]
        fn eigen_reconstruction_random(seed in 0u64..1_000_000, dim in 1usize..9) {
            let mut rng = SplitMix64::new(seed);
            let (h, _) = random_symmetric_with_spectrum(dim, -2.0, 2.0, &mut rng);
            let d = eig_sym(&h).unwrap();
            for w in d.eigenvalues().windows(2) {
                prop_assert!(w[0] <= w[1]);
            }
            let err = d.reconstruct().sub(&h).unwrap().frobenius_norm();
            prop_assert!(err <= 1e-10 * dim as f64 * 1.0_f64.max(h.frobenius_norm()));
        }
    }
}
