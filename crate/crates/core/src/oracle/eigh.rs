use nalgebra::{DMatrix, Vector4};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::CMat4;

const MAX_DIM: usize = 8;
const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_THRESHOLD: f64 = 1e-14;
const HERMITIAN_TOLERANCE: f64 = 1e-10;

/// Eigenvalues in `[-PSD_SLACK, 0)` are treated as numerical zeros.
pub const PSD_SLACK: f64 = 1e-9;

/// Spectral decomposition of a Hermitian matrix: eigenvalues ascending, the
/// matching orthonormal eigenvectors stored as columns.
#[derive(Clone, Debug)]
pub struct Eigh {
    pub values: Vec<f64>,
    pub vectors: DMatrix<Complex64>,
}

impl Eigh {
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let n = self.values.len();
        let mut out = DMatrix::zeros(n, n);
        for (k, &lambda) in self.values.iter().enumerate() {
            let col = self.vectors.column(k);
            out += (&col * col.adjoint()) * Complex64::from(lambda);
        }
        out
    }
}

fn off_diagonal_norm(a: &DMatrix<Complex64>) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for p in 0..n {
        for q in 0..n {
            if p != q {
                acc += a[(p, q)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Cyclic complex Jacobi eigensolver for small Hermitian matrices.
///
/// Each rotation first removes the phase of the pivot `a_pq` and then applies
/// a real Givens rotation, so the accumulated transform stays unitary.
pub fn eigh(h: &DMatrix<Complex64>) -> Result<Eigh> {
    let n = h.nrows();
    if n == 0 || n != h.ncols() || n > MAX_DIM {
        return Err(Error::Dimension(n.max(h.ncols())));
    }
    let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
    let mut asym = 0.0_f64;
    for i in 0..n {
        for j in 0..n {
            asym = asym.max((h[(i, j)] - h[(j, i)].conj()).norm());
        }
    }
    if asym > HERMITIAN_TOLERANCE * scale {
        return Err(Error::NotHermitian(asym));
    }

    // symmetrise so rounding noise in the input cannot bias the rotations
    let mut a = DMatrix::from_fn(n, n, |i, j| (h[(i, j)] + h[(j, i)].conj()) * 0.5);
    let mut v = DMatrix::<Complex64>::identity(n, n);
    let frob = a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();

    let mut converged = off_diagonal_norm(&a) <= OFF_DIAGONAL_THRESHOLD * frob;
    let mut sweeps = 0;
    while !converged {
        if sweeps == MAX_SWEEPS {
            return Err(Error::NoConvergence(MAX_SWEEPS));
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        converged = off_diagonal_norm(&a) <= OFF_DIAGONAL_THRESHOLD * frob;
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    Ok(Eigh { values, vectors })
}

fn rotate(a: &mut DMatrix<Complex64>, v: &mut DMatrix<Complex64>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // pivot already negligible against both diagonal entries
    if mag < f64::EPSILON * 1e-3 * (app.abs() + aqq.abs()) {
        a[(p, q)] = Complex64::new(0.0, 0.0);
        a[(q, p)] = Complex64::new(0.0, 0.0);
        return;
    }
    let phase = apq / mag;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 { 1.0 / (tau + (1.0 + tau * tau).sqrt()) } else { -1.0 / (-tau + (1.0 + tau * tau).sqrt()) };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // U = diag(1, conj(phase)) on (p, q) followed by the real rotation
    let upp = Complex64::from(c);
    let upq = Complex64::from(s);
    let uqp = -phase.conj() * s;
    let uqq = phase.conj() * c;

    let n = a.nrows();
    for r in 0..n {
        let arp = a[(r, p)];
        let arq = a[(r, q)];
        a[(r, p)] = arp * upp + arq * uqp;
        a[(r, q)] = arp * upq + arq * uqq;
    }
    for r in 0..n {
        let apr = a[(p, r)];
        let aqr = a[(q, r)];
        a[(p, r)] = upp.conj() * apr + uqp.conj() * aqr;
        a[(q, r)] = upq.conj() * apr + uqq.conj() * aqr;
    }
    a[(p, q)] = Complex64::new(0.0, 0.0);
    a[(q, p)] = Complex64::new(0.0, 0.0);
    a[(p, p)] = Complex64::from(a[(p, p)].re);
    a[(q, q)] = Complex64::from(a[(q, q)].re);

    for r in 0..n {
        let vrp = v[(r, p)];
        let vrq = v[(r, q)];
        v[(r, p)] = vrp * upp + vrq * uqp;
        v[(r, q)] = vrp * upq + vrq * uqq;
    }
}

/// [`eigh`] specialised to 4×4 matrices.
pub fn eigh4(h: &CMat4) -> Result<(Vector4<f64>, CMat4)> {
    let dyn_h = DMatrix::from_iterator(4, 4, h.iter().copied());
    let eig = eigh(&dyn_h)?;
    let values = Vector4::from_iterator(eig.values.iter().copied());
    let vectors = CMat4::from_iterator(eig.vectors.iter().copied());
    Ok((values, vectors))
}

/// Eigenvalues below this fraction of the largest one are roundoff and are
/// treated as zero by [`sqrtm_psd`].
pub const ROUNDOFF_FLOOR: f64 = 1e-14;

/// Principal square root of a positive-semidefinite Hermitian matrix.
pub fn sqrtm_psd(m: &DMatrix<Complex64>) -> Result<DMatrix<Complex64>> {
    let eig = eigh(m)?;
    let min = eig.values.iter().copied().fold(f64::INFINITY, f64::min);
    if min < -PSD_SLACK {
        return Err(Error::NotPositive(min));
    }
    let n = eig.values.len();
    let floor = ROUNDOFF_FLOOR * eig.values.iter().copied().fold(0.0, f64::max);
    let mut out = DMatrix::zeros(n, n);
    for (k, &lambda) in eig.values.iter().enumerate() {
        let root = if lambda > floor { lambda.sqrt() } else { 0.0 };
        if root == 0.0 {
            continue;
        }
        let col = eig.vectors.column(k);
        out += (&col * col.adjoint()) * Complex64::from(root);
    }
    Ok(out)
}

pub fn sqrtm_psd4(m: &CMat4) -> Result<CMat4> {
    let dyn_m = DMatrix::from_iterator(4, 4, m.iter().copied());
    let root = sqrtm_psd(&dyn_m)?;
    Ok(CMat4::from_iterator(root.iter().copied()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> DMatrix<Complex64> {
        let g = DMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
        (&g + g.adjoint()) * c(0.5, 0.0)
    }

    fn max_abs(m: &DMatrix<Complex64>) -> f64 {
        m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn diagonal_input_is_returned_sorted() {
        let h = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(3.0, 0.0), c(-1.0, 0.0), c(2.0, 0.0)]));
        let eig = eigh(&h).unwrap();
        assert_eq!(eig.values, vec![-1.0, 2.0, 3.0]);
        assert!((eig.vectors[(1, 0)].norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn random_hermitian_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=8 {
            for _ in 0..20 {
                let h = random_hermitian(&mut rng, n);
                let eig = eigh(&h).unwrap();
                assert!(max_abs(&(eig.reconstruct() - &h)) < 1e-10);
                let gram = eig.vectors.adjoint() * &eig.vectors;
                assert!(max_abs(&(gram - DMatrix::identity(n, n))) < 1e-10);
                assert!(eig.values.windows(2).all(|w| w[0] <= w[1]));
            }
        }
    }

    #[test]
    fn degenerate_spectrum() {
        let mut h = DMatrix::<Complex64>::identity(4, 4);
        h[(0, 3)] = c(0.0, 1e-3);
        h[(3, 0)] = c(0.0, -1e-3);
        let eig = eigh(&h).unwrap();
        assert!((eig.values[0] - (1.0 - 1e-3)).abs() < 1e-14);
        assert!((eig.values[3] - (1.0 + 1e-3)).abs() < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian_and_oversized() {
        let mut h = DMatrix::<Complex64>::identity(3, 3);
        h[(0, 1)] = c(1.0, 0.0);
        assert!(matches!(eigh(&h), Err(Error::NotHermitian(_))));
        let big = DMatrix::<Complex64>::identity(9, 9);
        assert_eq!(eigh(&big).unwrap_err(), Error::Dimension(9));
    }

    #[test]
    fn sqrtm_examples() {
        let id = DMatrix::<Complex64>::identity(4, 4);
        assert!(max_abs(&(sqrtm_psd(&id).unwrap() - &id)) < 1e-15);

        let d = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(0.8, 0.0),
            c(0.2, 0.0),
            c(0.0, 0.0),
            c(0.0, 0.0),
        ]));
        let root = sqrtm_psd(&d).unwrap();
        let s5 = 5f64.sqrt();
        assert!((root[(0, 0)].re - 2.0 / s5).abs() < 1e-15);
        assert!((root[(1, 1)].re - 1.0 / s5).abs() < 1e-15);
        assert!(root[(2, 2)].norm() < 1e-15);
    }

    #[test]
    fn sqrtm_squares_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let g = DMatrix::from_fn(4, 2, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            let m = &g * g.adjoint();
            let root = sqrtm_psd(&m).unwrap();
            assert!(max_abs(&(&root * &root - &m)) < 1e-9);
        }
    }

    #[test]
    fn sqrtm_rejects_negative() {
        let mut d = DMatrix::<Complex64>::identity(2, 2);
        d[(1, 1)] = c(-1e-6, 0.0);
        assert!(matches!(sqrtm_psd(&d), Err(Error::NotPositive(_))));
    }
}
