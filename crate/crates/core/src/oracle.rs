//! Brute-force reference computations used to cross-check the closed-form
//! paths. Everything here is deliberately independent of the code it checks:
//! the phase quotient is minimized over an explicit grid and trace norms come
//! from a dense Jacobi eigendecomposition of the rank-two difference matrix.

use num_complex::Complex;

use crate::error::Result;
use crate::scalar::{real, real_usize, Real};
use crate::signal::ComplexSignal;

/// Minimum of ||x - e^{i theta} y|| over `grid_points` equispaced phases
/// theta = 2 pi k / grid_points, k = 0, ..., grid_points - 1. The grid always
/// contains theta = 0. Panics if `grid_points` is 0.
pub fn d2_phase_grid<T: Real>(
    x: &ComplexSignal<T>,
    y: &ComplexSignal<T>,
    grid_points: usize,
) -> Result<T> {
    assert!(grid_points >= 1, "phase grid needs at least one point");
    if x.len() != y.len() {
        return Err(crate::error::Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let tau = T::TAU();
    let n = real_usize::<T>(grid_points);
    let mut best = T::infinity();
    for k in 0..grid_points {
        let u = Complex::cis(tau * real_usize::<T>(k) / n);
        let mut acc = T::zero();
        for (a, b) in x.entries().iter().zip(y.entries()) {
            acc += (a - b * u).norm_sqr();
        }
        best = best.min(acc);
    }
    Ok(best.sqrt())
}

/// The Hermitian difference x x* - y y* as a dense matrix.
pub fn outer_difference<T: Real>(
    x: &ComplexSignal<T>,
    y: &ComplexSignal<T>,
) -> Result<Vec<Vec<Complex<T>>>> {
    if x.len() != y.len() {
        return Err(crate::error::Error::LengthMismatch {
            left: x.len(),
            right: y.len(),
        });
    }
    let d = x.len();
    let mut m = vec![vec![Complex::new(T::zero(), T::zero()); d]; d];
    for i in 0..d {
        for j in 0..d {
            m[i][j] = x.entries()[i] * x.entries()[j].conj()
                - y.entries()[i] * y.entries()[j].conj();
        }
    }
    Ok(m)
}

/// Eigenvalues of a Hermitian matrix by cyclic Jacobi rotations, sorted in
/// decreasing order. Only the lower/upper consistency implied by Hermitian
/// symmetry is assumed; the strictly upper part drives the rotations.
///
/// Panics if the matrix is empty or not square.
pub fn hermitian_eigenvalues<T: Real>(mut a: Vec<Vec<Complex<T>>>) -> Vec<T> {
    let d = a.len();
    assert!(d >= 1, "matrix must be nonempty");
    for row in &a {
        assert_eq!(row.len(), d, "matrix must be square");
    }
    if d == 1 {
        return vec![a[0][0].re];
    }

    let frob = {
        let mut s = T::zero();
        for row in &a {
            for z in row {
                s += z.norm_sqr();
            }
        }
        s.sqrt()
    };
    let tol = real::<T>(100.0) * T::epsilon() * frob.max(T::one());

    for _sweep in 0..60 {
        let mut off = T::zero();
        for i in 0..d {
            for j in (i + 1)..d {
                off += a[i][j].norm_sqr();
            }
        }
        if (off + off).sqrt() <= tol {
            break;
        }
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[p][q];
                let r = apq.norm();
                if r <= T::epsilon() * frob {
                    continue;
                }
                // Phase-split rotation: with a_pq = r e^{i alpha}, the real
                // Jacobi angle for off-diagonal r zeroes the pivot.
                let phase = apq / r;
                let tau_j = (a[q][q].re - a[p][p].re) / ((r + r).max(T::min_positive_value()));
                let t = if tau_j >= T::zero() {
                    T::one() / (tau_j + (T::one() + tau_j * tau_j).sqrt())
                } else {
                    -T::one() / (-tau_j + (T::one() + tau_j * tau_j).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = phase * (t * c);

                // Column update: A <- A G with G = I except
                // G[p][p] = c, G[p][q] = s, G[q][p] = -conj(s), G[q][q] = c.
                for i in 0..d {
                    let aip = a[i][p];
                    let aiq = a[i][q];
                    a[i][p] = aip * c - aiq * s.conj();
                    a[i][q] = aip * s + aiq * c;
                }
                // Row update: A <- G^H A.
                for j in 0..d {
                    let apj = a[p][j];
                    let aqj = a[q][j];
                    a[p][j] = apj * c - aqj * s;
                    a[q][j] = apj * s.conj() + aqj * c;
                }
            }
        }
    }

    let mut eig: Vec<T> = (0..d).map(|i| a[i][i].re).collect();
    eig.sort_by(|u, v| v.partial_cmp(u).expect("finite eigenvalues"));
    eig
}

/// Singular values of x x* - y y*, sorted in decreasing order. The matrix is
/// Hermitian, so these are the absolute eigenvalues.
pub fn singular_values<T: Real>(x: &ComplexSignal<T>, y: &ComplexSignal<T>) -> Result<Vec<T>> {
    let mut sv: Vec<T> = hermitian_eigenvalues(outer_difference(x, y)?)
        .into_iter()
        .map(|l| l.abs())
        .collect();
    sv.sort_by(|u, v| v.partial_cmp(u).expect("finite singular values"));
    Ok(sv)
}

/// Trace norm of x x* - y y*: the sum of all singular values.
pub fn d1_trace_norm<T: Real>(x: &ComplexSignal<T>, y: &ComplexSignal<T>) -> Result<T> {
    Ok(singular_values(x, y)?.into_iter().sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn random_signal(rng: &mut ChaCha8Rng, d: usize) -> ComplexSignal<f64> {
        ComplexSignal::new(
            (0..d)
                .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn eigenvalues_of_diagonal_matrix() {
        let m = vec![
            vec![c(3.0, 0.0), c(0.0, 0.0)],
            vec![c(0.0, 0.0), c(-1.0, 0.0)],
        ];
        let eig = hermitian_eigenvalues(m);
        assert!((eig[0] - 3.0).abs() < 1e-14);
        assert!((eig[1] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn eigenvalues_of_two_by_two_with_complex_pivot() {
        // [[2, i], [-i, 2]] has eigenvalues 3 and 1.
        let m = vec![vec![c(2.0, 0.0), c(0.0, 1.0)], vec![c(0.0, -1.0), c(2.0, 0.0)]];
        let eig = hermitian_eigenvalues(m);
        assert!((eig[0] - 3.0).abs() < 1e-13);
        assert!((eig[1] - 1.0).abs() < 1e-13);
    }

    #[test]
    fn eigenvalues_preserve_trace_and_frobenius_norm() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &d in &[2usize, 3, 5, 8, 16] {
            // random Hermitian: (B + B^H) / 2
            let mut m = vec![vec![c(0.0, 0.0); d]; d];
            for i in 0..d {
                for j in 0..d {
                    m[i][j] = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                }
            }
            let mut h = vec![vec![c(0.0, 0.0); d]; d];
            let mut trace = 0.0;
            let mut frob_sq = 0.0;
            for i in 0..d {
                for j in 0..d {
                    h[i][j] = (m[i][j] + m[j][i].conj()) * 0.5;
                    frob_sq += h[i][j].norm_sqr();
                }
                trace += h[i][i].re;
            }
            let eig = hermitian_eigenvalues(h);
            let eig_trace: f64 = eig.iter().sum();
            let eig_frob_sq: f64 = eig.iter().map(|l| l * l).sum();
            assert!((eig_trace - trace).abs() <= 1e-10 * (1.0 + trace.abs()));
            assert!((eig_frob_sq - frob_sq).abs() <= 1e-9 * (1.0 + frob_sq));
        }
    }

    #[test]
    fn outer_difference_is_rank_two_for_generic_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let x = random_signal(&mut rng, 6);
        let y = random_signal(&mut rng, 6);
        let sv = singular_values(&x, &y).unwrap();
        assert!(sv[1] > 1e-8, "generic pair should have two nonzero singular values");
        assert!(sv[2] <= 1e-12 * sv[0], "third singular value should vanish");
    }

    #[test]
    fn phase_grid_contains_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let x = random_signal(&mut rng, 5);
        // identical pair: minimum is at theta = 0, which the grid must hit exactly
        let dist = d2_phase_grid(&x, &x, 7).unwrap();
        assert!(dist <= 1e-14 * x.norm());
    }

    #[test]
    fn d1_closed_form_matches_trace_norm_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        for _ in 0..100 {
            let d = rng.random_range(2..16usize);
            let x = random_signal(&mut rng, d);
            let y = random_signal(&mut rng, d);
            let oracle = d1_trace_norm(&x, &y).unwrap();
            let closed = crate::signal::metric_d1(&x, &y).unwrap();
            assert!(
                (oracle - closed).abs() <= 1e-10 * oracle.max(1e-12),
                "closed {closed} vs oracle {oracle} at d={d}"
            );
        }
    }

    #[test]
    fn phase_grid_matches_closed_form_to_grid_resolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for _ in 0..20 {
            let d = rng.random_range(2..12usize);
            let x = random_signal(&mut rng, d);
            let y = random_signal(&mut rng, d);
            let grid = d2_phase_grid(&x, &y, 100_000).unwrap();
            let closed = crate::signal::metric_d2(&x, &y).unwrap();
            // grid minimum is an upper bound, accurate to O(grid step)
            assert!(grid >= closed - 1e-12);
            assert!(grid - closed <= 1e-4 * (x.norm() + y.norm()));
        }
    }
}
