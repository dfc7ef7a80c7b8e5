//! Thin wrappers over faer for the dense kernels used throughout.

use crate::error::{Error, Result};
use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{Mat, Side};
use num_complex::Complex64 as C64;

/// Environment variable holding the worker count for dense kernels.
pub const WORKERS_ENV: &str = "SBSCATTER_WORKERS";

static WORKERS: std::sync::Once = std::sync::Once::new();

/// Fix the dense-kernel parallelism once per process from [`WORKERS_ENV`], defaulting to
/// the available parallelism. One worker runs every kernel on the calling thread; idle pool
/// threads on a single core otherwise slow unrelated scalar work considerably.
pub fn ensure_workers() {
    WORKERS.call_once(|| {
        let n = std::env::var(WORKERS_ENV)
            .ok()
            .and_then(|v| v.trim().parse::<usize>().ok())
            .filter(|&n| n > 0)
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
        faer::set_global_parallelism(if n == 1 { faer::Par::Seq } else { faer::Par::rayon(n) });
    });
}

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Hermitian inner product ⟨a, b⟩, antilinear in `a`.
pub fn vdot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Bilinear product aᵀb.
pub fn dotu(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[C64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn scale(a: &[C64], s: C64) -> Vec<C64> {
    a.iter().map(|x| x * s).collect()
}

pub fn axpy(y: &mut [C64], a: C64, x: &[C64]) {
    for (y, x) in y.iter_mut().zip(x) {
        *y += a * x;
    }
}

pub fn unit(n: usize, i: usize) -> Vec<C64> {
    let mut v = vec![ZERO; n];
    v[i] = ONE;
    v
}

pub fn col_to_vec(m: &Mat<C64>, j: usize) -> Vec<C64> {
    m.col(j).iter().copied().collect()
}

pub fn matvec(m: &Mat<C64>, v: &[C64]) -> Vec<C64> {
    let mut out = vec![ZERO; m.nrows()];
    for (j, &vj) in v.iter().enumerate() {
        if vj == ZERO {
            continue;
        }
        for (o, a) in out.iter_mut().zip(m.col(j).iter()) {
            *o += a * vj;
        }
    }
    out
}

/// Full eigendecomposition of a general complex matrix; columns of the
/// returned matrix are unit-norm right eigenvectors.
pub fn eigen(m: &Mat<C64>) -> Result<(Vec<C64>, Mat<C64>)> {
    ensure_workers();
    let e = m.eigen().map_err(|e| Error::Solver(format!("dense eigensolve: {e:?}")))?;
    let vals: Vec<C64> = e.S().column_vector().iter().copied().collect();
    let mut vecs = e.U().to_owned();
    for j in 0..vecs.ncols() {
        let n = vecs.col(j).norm_l2();
        if n > 0.0 {
            for i in 0..vecs.nrows() {
                vecs[(i, j)] /= n;
            }
        }
    }
    Ok((vals, vecs))
}

/// Eigendecomposition of a real symmetric matrix, eigenvalues ascending.
pub fn symmetric_eigen(m: &Mat<f64>) -> Result<(Vec<f64>, Mat<f64>)> {
    ensure_workers();
    let e = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Solver(format!("symmetric eigensolve: {e:?}")))?;
    Ok((e.S().column_vector().iter().copied().collect(), e.U().to_owned()))
}

/// Eigendecomposition of a complex Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(m: &Mat<C64>) -> Result<(Vec<f64>, Mat<C64>)> {
    ensure_workers();
    let e = m
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Solver(format!("hermitian eigensolve: {e:?}")))?;
    Ok((e.S().column_vector().iter().map(|z| z.re).collect(), e.U().to_owned()))
}

/// Largest singular value.
pub fn spectral_norm(m: &Mat<C64>) -> Result<f64> {
    ensure_workers();
    let s = m.singular_values().map_err(|e| Error::Solver(format!("svd: {e:?}")))?;
    Ok(s.into_iter().fold(0.0, f64::max))
}

/// Smallest singular value.
pub fn min_singular_value(m: &Mat<C64>) -> Result<f64> {
    ensure_workers();
    let s = m.singular_values().map_err(|e| Error::Solver(format!("svd: {e:?}")))?;
    Ok(s.into_iter().fold(f64::INFINITY, f64::min))
}

/// LU factorization of A - zI.
pub struct ShiftedLu {
    lu: PartialPivLu<C64>,
    n: usize,
}

impl ShiftedLu {
    pub fn new(a: &Mat<C64>, z: C64) -> Self {
        let n = a.nrows();
        let mut m = a.to_owned();
        for i in 0..n {
            m[(i, i)] -= z;
        }
        ensure_workers();
        Self { lu: m.partial_piv_lu(), n }
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let rhs = Mat::from_fn(self.n, 1, |i, _| b[i]);
        let x = self.lu.solve(&rhs);
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }

    pub fn solve_mat(&self, b: &Mat<C64>) -> Mat<C64> {
        self.lu.solve(b)
    }
}

/// Unitary reduction A = Q Hs Q† to upper Hessenberg form, for repeated shifted solves
/// at O(n²) each.
pub struct HessenbergForm {
    q: Mat<C64>,
    /// Row-major upper Hessenberg factor.
    h: Vec<C64>,
    n: usize,
}

impl HessenbergForm {
    pub fn new(a: &Mat<C64>) -> Self {
        use faer::dyn_stack::{MemBuffer, MemStack};
        use faer::linalg::{evd::hessenberg, householder, qr::no_pivoting::factor::recommended_block_size};
        ensure_workers();
        let n = a.nrows();
        let mut hs = a.clone();
        let mut q = Mat::<C64>::identity(n, n);
        if n > 1 {
            let bs = recommended_block_size::<C64>(n - 1, n - 1);
            let mut coeffs = Mat::<C64>::zeros(bs, n - 1);
            let par = faer::Par::Seq;
            let req = hessenberg::hessenberg_in_place_scratch::<C64>(n, bs, par, Default::default()).or(
                householder::apply_block_householder_sequence_on_the_right_in_place_scratch::<C64>(n - 1, bs, n - 1),
            );
            let mut buf = MemBuffer::new(req);
            hessenberg::hessenberg_in_place(hs.as_mut(), coeffs.as_mut(), par, MemStack::new(&mut buf), Default::default());
            householder::apply_block_householder_sequence_on_the_right_in_place_with_conj(
                hs.as_ref().submatrix(1, 0, n - 1, n - 1),
                coeffs.as_ref(),
                faer::Conj::No,
                q.as_mut().submatrix_mut(1, 1, n - 1, n - 1),
                par,
                MemStack::new(&mut buf),
            );
        }
        let h = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| if i > j + 1 { ZERO } else { hs[(i, j)] })
            .collect();
        Self { q, h, n }
    }

    pub fn q(&self) -> &Mat<C64> {
        &self.q
    }

    pub fn hessenberg(&self) -> Mat<C64> {
        Mat::from_fn(self.n, self.n, |i, j| self.h[i * self.n + j])
    }

    /// Q† b: coordinates in which the Hessenberg factor acts.
    pub fn to_reduced(&self, b: &[C64]) -> Vec<C64> {
        (0..self.n).map(|i| vdot(&col_to_vec(&self.q, i), b)).collect()
    }

    /// (A - z)⁻¹ b.
    pub fn solve_shifted(&self, z: C64, b: &[C64]) -> Vec<C64> {
        matvec(&self.q, &self.solve_reduced(z, self.to_reduced(b)))
    }

    /// (Hs - z)⁻¹ y by Gaussian elimination with adjacent-row pivoting.
    pub fn solve_reduced(&self, z: C64, mut y: Vec<C64>) -> Vec<C64> {
        let n = self.n;
        let mut m = self.h.clone();
        for i in 0..n {
            m[i * n + i] -= z;
        }
        for k in 0..n.saturating_sub(1) {
            let (top, bottom) = m.split_at_mut((k + 1) * n);
            let (row_k, row_next) = (&mut top[k * n..], &mut bottom[..n]);
            if row_next[k].norm_sqr() > row_k[k].norm_sqr() {
                row_k[k..].swap_with_slice(&mut row_next[k..]);
                y.swap(k, k + 1);
            }
            let l = row_next[k] / row_k[k];
            for (a, b) in row_next[k..].iter_mut().zip(&row_k[k..]) {
                *a -= l * b;
            }
            let yk = y[k];
            y[k + 1] -= l * yk;
        }
        for i in (0..n).rev() {
            let row = &m[i * n..(i + 1) * n];
            let acc: C64 = row[i + 1..].iter().zip(&y[i + 1..]).map(|(a, b)| a * b).sum();
            y[i] = (y[i] - acc) / row[i];
        }
        y
    }
}

/// exp(-itA) for diagonalizable A, via its eigendecomposition.
pub fn exp_minus_it(a: &Mat<C64>, t: f64) -> Result<Mat<C64>> {
    let (vals, vecs) = eigen(a)?;
    let inv = vecs.partial_piv_lu().solve(Mat::<C64>::identity(a.nrows(), a.ncols()));
    let n = a.nrows();
    let mut scaled = vecs.clone();
    for (j, l) in vals.iter().enumerate() {
        let ph = (C64::new(0.0, -t) * l).exp();
        for i in 0..n {
            scaled[(i, j)] *= ph;
        }
    }
    Ok(&scaled * &inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_of_diagonal() {
        let m = Mat::from_fn(3, 3, |i, j| if i == j { C64::new(i as f64, -0.5) } else { ZERO });
        let (vals, vecs) = eigen(&m).unwrap();
        for (j, v) in vals.iter().enumerate() {
            let k = (0..3).find(|&i| vecs[(i, j)].norm() > 0.5).unwrap();
            assert!((v - m[(k, k)]).norm() < 1e-14);
        }
    }

    #[test]
    fn shifted_solve() {
        let a = Mat::from_fn(4, 4, |i, j| C64::new((i + 2 * j) as f64 * 0.1, (i as f64 - j as f64) * 0.05));
        let z = C64::new(0.3, 0.7);
        let lu = ShiftedLu::new(&a, z);
        let b: Vec<C64> = (0..4).map(|i| C64::new(i as f64, 1.0)).collect();
        let x = lu.solve(&b);
        let mut r = matvec(&a, &x);
        axpy(&mut r, -z, &x);
        axpy(&mut r, -ONE, &b);
        assert!(norm(&r) < 1e-13);
    }

    #[test]
    fn exponential_of_normal_matrix_is_unitary() {
        let a = Mat::from_fn(5, 5, |i, j| C64::new(((i * j) % 3) as f64 + (i + j) as f64, 0.0));
        let u = exp_minus_it(&a, 0.7).unwrap();
        let g = u.adjoint() * &u;
        for i in 0..5 {
            for j in 0..5 {
                let e = if i == j { ONE } else { ZERO };
                assert!((g[(i, j)] - e).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn hessenberg_solve_matches_lu() {
        let a = Mat::from_fn(7, 7, |i, j| C64::new(((3 * i + j) % 5) as f64 - 1.5, (i as f64 - 2.0 * j as f64) * 0.1));
        let hf = HessenbergForm::new(&a);
        let back = hf.q() * hf.hessenberg() * hf.q().adjoint();
        let diff = (0..7).flat_map(|i| (0..7).map(move |j| (i, j))).map(|(i, j)| (back[(i, j)] - a[(i, j)]).norm()).fold(0.0, f64::max);
        assert!(diff < 1e-13, "{diff}");
        let b: Vec<C64> = (0..7).map(|i| C64::new(i as f64, 1.0)).collect();
        let z = C64::new(0.3, -0.7);
        let x = hf.solve_shifted(z, &b);
        let y = ShiftedLu::new(&a, z).solve(&b);
        assert!(x.iter().zip(&y).all(|(p, q)| (p - q).norm() < 1e-12));
    }
}
