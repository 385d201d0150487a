//! Seeded 64-bit splittable generator plus the random-matrix samplers used by
//! the experiment and scan layers. Pure integer state machine: identical
//! seeds give identical streams on every platform, which the report
//! byte-determinism contract relies on.

use crate::mat::{norm2, Mat};
use crate::spectral::{SubspaceProjection, SymMatrix};

const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64. `split` derives an independent child stream, and
/// `stream(seed, index)` keys a stream by (seed, trial index) so trials are
/// order-independent pure computations.
#[derive(Clone, Debug)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    /// Independent stream for trial `index` under `seed`.
    pub fn stream(seed: u64, index: u64) -> Self {
        let mut r = SplitMix64::new(seed ^ index.wrapping_mul(GAMMA));
        // One warm-up step decorrelates neighbouring indices.
        r.next_u64();
        r
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn split(&mut self) -> SplitMix64 {
        SplitMix64::new(self.next_u64())
    }

    /// Uniform in [0, 1).
    pub fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_f64()
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }
}

/// Orthogonal matrix built as a composition of `dim * dim` seeded Givens
/// rotations applied to the identity.
pub fn random_orthogonal(dim: usize, rng: &mut SplitMix64) -> Mat {
    let mut q = Mat::identity(dim);
    if dim < 2 {
        return q;
    }
    for _ in 0..dim * dim {
        let i = rng.below(dim);
        let mut j = rng.below(dim - 1);
        if j >= i {
            j += 1;
        }
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        let theta = rng.uniform(0.0, std::f64::consts::TAU);
        let (s, c) = theta.sin_cos();
        for r in 0..dim {
            let a = q.get(r, i);
            let b = q.get(r, j);
            q.set(r, i, c * a + s * b);
            q.set(r, j, -s * a + c * b);
        }
    }
    q
}

/// Symmetric matrix with eigenvalues drawn uniformly from [lo, hi] and a
/// random orthogonal eigenbasis. Returns the matrix and the drawn spectrum
/// (unsorted).
pub fn random_symmetric_with_spectrum(
    dim: usize,
    lo: f64,
    hi: f64,
    rng: &mut SplitMix64,
) -> (SymMatrix, Vec<f64>) {
    let lambda: Vec<f64> = (0..dim).map(|_| rng.uniform(lo, hi)).collect();
    let q = random_orthogonal(dim, rng);
    // Fill the upper triangle and mirror so the result is bitwise symmetric.
    let mut m = Mat::zeros(dim, dim);
    for i in 0..dim {
        for j in i..dim {
            let mut s = 0.0;
            for (k, lk) in lambda.iter().enumerate() {
                s += lk * q.get(i, k) * q.get(j, k);
            }
            m.set(i, j, s);
            m.set(j, i, s);
        }
    }
    let h = SymMatrix::from_mat(m).expect("construction is symmetric and finite");
    (h, lambda)
}

/// First `m` columns of a random orthogonal matrix.
pub fn random_orthonormal_basis(
    dim: usize,
    m: usize,
    rng: &mut SplitMix64,
) -> SubspaceProjection {
    let q = random_orthogonal(dim, rng);
    let basis = Mat::from_fn(dim, m, |i, j| q.get(i, j));
    SubspaceProjection::new(basis).expect("columns of an orthogonal matrix are orthonormal")
}

/// Unit vector with direction drawn from uniform cube samples.
pub fn random_unit_vector(dim: usize, rng: &mut SplitMix64) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.uniform(-1.0, 1.0)).collect();
        let n = norm2(&v);
        if n > 1e-3 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}
