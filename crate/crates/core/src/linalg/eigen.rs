//! Hermitian eigendecomposition by cyclic complex Jacobi rotations.
//!
//! Dimensions in this crate stay below a few dozen, where Jacobi is both
//! accurate (eigenvectors orthonormal to working precision) and fast enough.

use super::matrix::{ComplexMatrix, C64};
use crate::error::{Error, Result};

/// Accepted deviation from Hermiticity for an input to [`herm_eig`].
pub const HERMITIAN_INPUT_TOL: f64 = 1e-10;
/// Accepted deviation from Hermiticity for a user-supplied observable.
pub const OBSERVABLE_TOL: f64 = 1e-12;
/// Eigenvalues closer than this are treated as one degenerate cluster.
pub const DEGENERACY_GAP: f64 = 1e-9;

const MAX_SWEEPS: usize = 100;

/// Hermitian matrix together with its spectral decomposition.
///
/// Eigenvalues are ascending; eigenvector `k` is column `k` of
/// [`eigenvectors`](Self::eigenvectors).
#[derive(Clone, Debug)]
pub struct HermitianObservable {
    matrix: ComplexMatrix,
    eigenvalues: Vec<f64>,
    eigenvectors: ComplexMatrix,
}

impl HermitianObservable {
    /// Validates Hermiticity at the observable tolerance and decomposes.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let deviation = matrix.hermiticity_defect();
        if deviation > OBSERVABLE_TOL {
            return Err(Error::NotHermitian { deviation });
        }
        herm_eig(&matrix)
    }

    pub fn from_real_diagonal(values: &[f64]) -> Self {
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let dim = values.len();
        let eigenvectors =
            ComplexMatrix::from_fn(dim, |i, k| if order[k] == i { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) });
        Self {
            matrix: ComplexMatrix::from_real_diagonal(values),
            eigenvalues: order.iter().map(|&i| values[i]).collect(),
            eigenvectors,
        }
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, k: usize) -> Vec<C64> {
        (0..self.dim()).map(|i| self.eigenvectors.get(i, k)).collect()
    }

    /// Groups eigenvalue indices into degenerate clusters (consecutive gaps below [`DEGENERACY_GAP`]).
    pub fn clusters(&self) -> Vec<SpectralCluster> {
        let mut out: Vec<SpectralCluster> = Vec::new();
        for (k, &value) in self.eigenvalues.iter().enumerate() {
            match out.last_mut() {
                Some(cluster) if value - self.eigenvalues[*cluster.indices.last().unwrap()] < DEGENERACY_GAP => {
                    cluster.indices.push(k);
                }
                _ => out.push(SpectralCluster { value, indices: vec![k] }),
            }
        }
        for cluster in &mut out {
            cluster.value =
                cluster.indices.iter().map(|&k| self.eigenvalues[k]).sum::<f64>() / cluster.indices.len() as f64;
        }
        out
    }

    /// Orthogonal projector onto the span of the given eigenvectors.
    pub fn projector(&self, indices: &[usize]) -> ComplexMatrix {
        let n = self.dim();
        let mut p = ComplexMatrix::zeros(n);
        for &k in indices {
            p = &p + &ComplexMatrix::outer(&self.eigenvector(k));
        }
        p
    }

    /// Reassembles `V diag(lambda) V^dagger`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.dim();
        ComplexMatrix::from_fn(n, |i, j| {
            (0..n)
                .map(|k| self.eigenvectors.get(i, k) * self.eigenvalues[k] * self.eigenvectors.get(j, k).conj())
                .sum()
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpectralCluster {
    /// Mean of the eigenvalues in the cluster.
    pub value: f64,
    pub indices: Vec<usize>,
}

/// Decomposes a Hermitian matrix (within [`HERMITIAN_INPUT_TOL`]).
///
/// The input is symmetrized before decomposition so the stored matrix is
/// exactly Hermitian.
pub fn herm_eig(a: &ComplexMatrix) -> Result<HermitianObservable> {
    let deviation = a.hermiticity_defect();
    if deviation > HERMITIAN_INPUT_TOL {
        return Err(Error::NotHermitian { deviation });
    }
    let matrix = a.hermitian_part();
    let (values, vectors) = jacobi(&matrix);

    let n = matrix.dim();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| values[x].total_cmp(&values[y]).then(x.cmp(&y)));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| values[k]).collect();
    let mut columns: Vec<Vec<C64>> =
        order.iter().map(|&k| (0..n).map(|i| vectors.get(i, k)).collect()).collect();

    // Degenerate clusters are re-orthonormalized as a block.
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eigenvalues[end] - eigenvalues[end - 1] < DEGENERACY_GAP {
            end += 1;
        }
        if end - start > 1 {
            gram_schmidt(&mut columns[start..end]);
        }
        start = end;
    }

    let eigenvectors = ComplexMatrix::from_fn(n, |i, k| columns[k][i]);
    Ok(HermitianObservable { matrix, eigenvalues, eigenvectors })
}

fn gram_schmidt(columns: &mut [Vec<C64>]) {
    for k in 0..columns.len() {
        for j in 0..k {
            let (done, rest) = columns.split_at_mut(k);
            let proj: C64 = done[j].iter().zip(&rest[0]).map(|(a, b)| a.conj() * b).sum();
            for (x, q) in rest[0].iter_mut().zip(&done[j]) {
                *x -= proj * q;
            }
        }
        let norm = columns[k].iter().map(C64::norm_sqr).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in &mut columns[k] {
                *x /= norm;
            }
        }
    }
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a.get(i, j).norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi on an exactly Hermitian matrix. Returns unsorted eigenvalues
/// and the accumulated unitary whose columns are eigenvectors.
fn jacobi(matrix: &ComplexMatrix) -> (Vec<f64>, ComplexMatrix) {
    let n = matrix.dim();
    let mut a = matrix.clone();
    let mut v = ComplexMatrix::identity(n);
    let scale = matrix.max_norm().max(f64::MIN_POSITIVE);

    for _ in 0..MAX_SWEEPS {
        if off_diagonal_norm(&a) <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                let app = a.get(p, p).re;
                let aqq = a.get(q, q).re;
                // Phase e^{-i alpha} makes the (p, q) entry real and positive.
                let phase = apq.conj() / r;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;

                // G = W R with W = diag(1, phase) on (p, q) and the real rotation R.
                let g_pp = C64::new(c, 0.0);
                let g_pq = C64::new(s, 0.0);
                let g_qp = phase * (-s);
                let g_qq = phase * c;

                for k in 0..n {
                    let akp = a.get(k, p);
                    let akq = a.get(k, q);
                    a.set(k, p, akp * g_pp + akq * g_qp);
                    a.set(k, q, akp * g_pq + akq * g_qq);
                    let vkp = v.get(k, p);
                    let vkq = v.get(k, q);
                    v.set(k, p, vkp * g_pp + vkq * g_qp);
                    v.set(k, q, vkp * g_pq + vkq * g_qq);
                }
                for k in 0..n {
                    let apk = a.get(p, k);
                    let aqk = a.get(q, k);
                    a.set(p, k, g_pp.conj() * apk + g_qp.conj() * aqk);
                    a.set(q, k, g_pq.conj() * apk + g_qq.conj() * aqk);
                }
                a.set(p, q, C64::new(0.0, 0.0));
                a.set(q, p, C64::new(0.0, 0.0));
                a.set(p, p, C64::new(app - t * r, 0.0));
                a.set(q, q, C64::new(aqq + t * r, 0.0));
            }
        }
    }
    ((0..n).map(|i| a.get(i, i).re).collect(), v)
}

/// Maps the spectrum of `a` through `f`, keeping the eigenvectors.
pub fn apply_spectral(f: impl Fn(f64) -> f64, a: &HermitianObservable) -> Result<HermitianObservable> {
    let n = a.dim();
    let mapped: Vec<f64> = a.eigenvalues.iter().map(|&x| f(x)).collect();
    if mapped.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite { what: "spectral function value" });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| mapped[x].total_cmp(&mapped[y]).then(x.cmp(&y)));
    let eigenvectors = ComplexMatrix::from_fn(n, |i, k| a.eigenvectors.get(i, order[k]));
    let eigenvalues: Vec<f64> = order.iter().map(|&k| mapped[k]).collect();
    let matrix = ComplexMatrix::from_fn(n, |i, j| {
        (0..n)
            .map(|k| eigenvectors.get(i, k) * eigenvalues[k] * eigenvectors.get(j, k).conj())
            .sum()
    })
    .hermitian_part();
    Ok(HermitianObservable { matrix, eigenvalues, eigenvectors })
}

/// Largest singular value.
pub fn spectral_norm(a: &ComplexMatrix) -> f64 {
    let gram = (&a.adjoint() * a).hermitian_part();
    let top = herm_eig(&gram).map(|e| e.eigenvalues.last().copied().unwrap_or(0.0)).unwrap_or(f64::NAN);
    top.max(0.0).sqrt()
}
