//! Complex signal container and the elementary operators on C^d: circular
//! shift, modulation, reflection, circular convolution, DFT, Hadamard product,
//! and the two quotient metrics that mod out a global phase.
//!
//! Positions are 1-based in every documented contract, matching the index
//! ranges used throughout the crate; storage is a plain 0-based vector.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::{real, real_usize, Real};

/// A fixed-length vector in C^d with d >= 1 and all entries finite.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSignal<T> {
    entries: Vec<Complex<T>>,
}

impl<T: Real> ComplexSignal<T> {
    /// Wraps a coefficient vector, rejecting empty input and non-finite entries.
    pub fn new(entries: Vec<Complex<T>>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptySignal);
        }
        for (i, z) in entries.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFiniteEntry { position: i + 1 });
            }
        }
        Ok(Self { entries })
    }

    /// Builds a signal from real parts only.
    pub fn from_reals(values: &[T]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex::new(v, T::zero())).collect())
    }

    /// The all-zero signal of length `d`. Panics if `d` is 0.
    pub fn zeros(d: usize) -> Self {
        assert!(d >= 1, "signal length must be at least 1");
        Self {
            entries: vec![Complex::new(T::zero(), T::zero()); d],
        }
    }

    /// The standard basis vector e_n (1-based). Panics if `n` is out of range.
    pub fn standard_basis(d: usize, n: usize) -> Self {
        assert!(n >= 1 && n <= d, "basis index {n} outside 1..={d}");
        let mut s = Self::zeros(d);
        s.entries[n - 1] = Complex::new(T::one(), T::zero());
        s
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entry at 1-based position `n`. Panics if `n` is out of range.
    pub fn entry(&self, n: usize) -> Complex<T> {
        assert!(n >= 1 && n <= self.len(), "position {n} outside 1..={}", self.len());
        self.entries[n - 1]
    }

    pub fn entries(&self) -> &[Complex<T>] {
        &self.entries
    }

    /// Circular shift moving the support of the signal by `shift` positions
    /// toward higher indices: position n of the result holds the input's
    /// position n - shift (indices mod d). Negative shifts move it back;
    /// shifting by a multiple of d is the identity.
    pub fn cyclic_shift(&self, shift: i64) -> Self {
        let d = self.len() as i64;
        let entries = (0..d)
            .map(|i| self.entries[(i - shift).rem_euclid(d) as usize])
            .collect();
        Self { entries }
    }

    /// Pointwise modulation by the frequency-`omega` character
    /// (1-based, 1 <= omega <= d): position n is multiplied by
    /// e^{2 pi i (n-1)(omega-1)/d}, so omega = 1 is the identity.
    pub fn modulate(&self, omega: usize) -> Result<Self> {
        let d = self.len();
        if omega < 1 || omega > d {
            return Err(Error::FrequencyOutOfRange { omega, d });
        }
        let tau = T::TAU();
        let dn = real_usize::<T>(d);
        let entries = self
            .entries
            .iter()
            .enumerate()
            .map(|(i, &z)| {
                // reduce the index product mod d before forming the angle
                let t = (i * (omega - 1)) % d;
                z * Complex::cis(tau * real_usize::<T>(t) / dn)
            })
            .collect();
        Ok(Self { entries })
    }

    /// Index reversal about position 1: position n of the result holds the
    /// input's position at -(n-1) mod d, so position 1 is fixed.
    pub fn reflect(&self) -> Self {
        let d = self.len();
        let entries = (0..d).map(|i| self.entries[(d - i) % d]).collect();
        Self { entries }
    }

    /// Entrywise complex conjugate.
    pub fn conj(&self) -> Self {
        Self {
            entries: self.entries.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Multiplies every entry by `factor`.
    pub fn scale(&self, factor: Complex<T>) -> Self {
        Self {
            entries: self.entries.iter().map(|&z| z * factor).collect(),
        }
    }

    /// Circular convolution: position m of the result is
    /// sum_n x(n) y(m - n + 1) with indices mod d. Direct O(d^2) evaluation.
    pub fn circular_convolve(&self, other: &Self) -> Result<Self> {
        let d = self.check_same_len(other)?;
        let entries = (0..d)
            .map(|m| {
                let mut acc = Complex::new(T::zero(), T::zero());
                for n in 0..d {
                    acc += self.entries[n] * other.entries[(m + d - n) % d];
                }
                acc
            })
            .collect();
        Ok(Self { entries })
    }

    /// Unnormalized discrete Fourier transform:
    /// X(j) = sum_k x(k) e^{-2 pi i (j-1)(k-1)/d}. Direct O(d^2) evaluation
    /// from a precomputed twiddle table.
    pub fn dft(&self) -> Self {
        self.fourier(true)
    }

    /// Inverse of `dft`: conjugate kernel with the 1/d normalization.
    pub fn idft(&self) -> Self {
        self.fourier(false)
    }

    fn fourier(&self, forward: bool) -> Self {
        let d = self.len();
        let sign = if forward { -T::one() } else { T::one() };
        let tau = T::TAU();
        let dn = real_usize::<T>(d);
        let table: Vec<Complex<T>> = (0..d)
            .map(|t| Complex::cis(sign * tau * real_usize::<T>(t) / dn))
            .collect();
        let mut entries: Vec<Complex<T>> = (0..d)
            .map(|j| {
                let mut acc = Complex::new(T::zero(), T::zero());
                for k in 0..d {
                    acc += self.entries[k] * table[(j * k) % d];
                }
                acc
            })
            .collect();
        if !forward {
            let inv = Complex::new(T::one() / dn, T::zero());
            for z in &mut entries {
                *z *= inv;
            }
        }
        Self { entries }
    }

    /// Entrywise (Hadamard) product.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        let d = self.check_same_len(other)?;
        let entries = (0..d).map(|i| self.entries[i] * other.entries[i]).collect();
        Ok(Self { entries })
    }

    /// Inner product sum_n x(n) conj(y(n)), conjugate-linear in `other`.
    pub fn inner(&self, other: &Self) -> Result<Complex<T>> {
        let d = self.check_same_len(other)?;
        let mut acc = Complex::new(T::zero(), T::zero());
        for i in 0..d {
            acc += self.entries[i] * other.entries[i].conj();
        }
        Ok(acc)
    }

    /// Squared Euclidean norm.
    pub fn norm_sq(&self) -> T {
        self.entries.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Euclidean norm.
    pub fn norm(&self) -> T {
        self.norm_sq().sqrt()
    }

    /// Largest entry magnitude.
    pub fn sup_norm(&self) -> T {
        self.entries
            .iter()
            .map(|z| z.norm())
            .fold(T::zero(), |a, b| a.max(b))
    }

    /// Sum of entry magnitudes.
    pub fn one_norm(&self) -> T {
        self.entries.iter().map(|z| z.norm()).sum()
    }

    fn check_same_len(&self, other: &Self) -> Result<usize> {
        if self.len() != other.len() {
            return Err(Error::LengthMismatch {
                left: self.len(),
                right: other.len(),
            });
        }
        Ok(self.len())
    }
}

/// Both quotient metrics of a pair, computed in one pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuotientDistances<T> {
    /// Euclidean distance modulo a global phase.
    pub d2: T,
    /// Trace-norm distance of the rank-one outer products.
    pub d1: T,
}

/// Euclidean distance modulo a global phase:
/// min over unimodular u of ||x - u y||, which closes to
/// sqrt(||x||^2 + ||y||^2 - 2 |<x, y>|).
///
/// Evaluated as the explicit difference at the minimizing phase
/// u* = <x, y> / |<x, y>|; the closed form as written cancels
/// catastrophically for phase-equivalent inputs.
pub fn metric_d2<T: Real>(x: &ComplexSignal<T>, y: &ComplexSignal<T>) -> Result<T> {
    Ok(aligned_difference_norm_sq(x, y)?.sqrt())
}

/// Trace-norm distance of the rank-one outer products:
/// || x x* - y y* ||_1 = sqrt((||x||^2 + ||y||^2)^2 - 4 |<x, y>|^2),
/// the difference having rank at most 2.
///
/// Factored as sqrt(t (s + 2g)) with s = ||x||^2 + ||y||^2, g = |<x, y>|,
/// and t = s - 2g evaluated stably as the aligned difference of `metric_d2`.
pub fn metric_d1<T: Real>(x: &ComplexSignal<T>, y: &ComplexSignal<T>) -> Result<T> {
    let t = aligned_difference_norm_sq(x, y)?;
    let s = x.norm_sq() + y.norm_sq();
    let g = x.inner(y)?.norm();
    let two = real::<T>(2.0);
    Ok((t * (s + two * g)).max(T::zero()).sqrt())
}

/// Both metrics at once.
pub fn quotient_distances<T: Real>(
    x: &ComplexSignal<T>,
    y: &ComplexSignal<T>,
) -> Result<QuotientDistances<T>> {
    Ok(QuotientDistances {
        d2: metric_d2(x, y)?,
        d1: metric_d1(x, y)?,
    })
}

/// ||x - u* y||^2 at the phase u* aligning y with x. Nonnegative by
/// construction, equal to ||x||^2 + ||y||^2 - 2 |<x, y>| exactly.
fn aligned_difference_norm_sq<T: Real>(x: &ComplexSignal<T>, y: &ComplexSignal<T>) -> Result<T> {
    let ip = x.inner(y)?;
    let g = ip.norm();
    let u = if g > T::zero() {
        ip / g
    } else {
        Complex::new(T::one(), T::zero())
    };
    let mut acc = T::zero();
    for (a, b) in x.entries().iter().zip(y.entries()) {
        acc += (a - b * u).norm_sqr();
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    type S = ComplexSignal<f64>;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn random_signal(rng: &mut ChaCha8Rng, d: usize) -> S {
        S::new(
            (0..d)
                .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect(),
        )
        .unwrap()
    }

    fn assert_close(a: f64, b: f64, tol: f64) {
        assert!((a - b).abs() <= tol, "expected {a} ~ {b} within {tol}");
    }

    #[test]
    fn new_rejects_empty_and_non_finite() {
        assert!(matches!(S::new(vec![]), Err(Error::EmptySignal)));
        let bad = S::new(vec![c(1.0, 0.0), c(f64::NAN, 0.0)]);
        assert!(matches!(bad, Err(Error::NonFiniteEntry { position: 2 })));
    }

    #[test]
    fn shift_moves_support_forward() {
        let x = S::from_reals(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let y = x.cyclic_shift(1);
        let got: Vec<f64> = y.entries().iter().map(|z| z.re).collect();
        assert_eq!(got, vec![4.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn shift_group_law_and_inverse() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..100 {
            let d = rng.random_range(1..24usize);
            let x = random_signal(&mut rng, d);
            let r = rng.random_range(-30i64..30);
            let s = rng.random_range(-30i64..30);
            assert_eq!(x.cyclic_shift(r).cyclic_shift(s), x.cyclic_shift(r + s));
            assert_eq!(x.cyclic_shift(r).cyclic_shift(-r), x);
            assert_eq!(x.cyclic_shift(d as i64), x);
        }
    }

    #[test]
    fn modulate_frequency_one_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = random_signal(&mut rng, 9);
        assert_eq!(x.modulate(1).unwrap(), x);
        assert!(matches!(
            x.modulate(10),
            Err(Error::FrequencyOutOfRange { omega: 10, d: 9 })
        ));
        assert!(matches!(x.modulate(0), Err(Error::FrequencyOutOfRange { .. })));
    }

    #[test]
    fn modulate_applies_character() {
        let x = S::from_reals(&[1.0, 1.0, 1.0, 1.0]).unwrap();
        let y = x.modulate(2).unwrap();
        let i = c(0.0, 1.0);
        for (n, &z) in y.entries().iter().enumerate() {
            let expect = i.powu(n as u32);
            assert!((z - expect).norm() < 1e-15);
        }
    }

    #[test]
    fn reflect_fixes_position_one() {
        let x = S::from_reals(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        let got: Vec<f64> = x.reflect().entries().iter().map(|z| z.re).collect();
        assert_eq!(got, vec![1.0, 4.0, 3.0, 2.0]);
        assert_eq!(x.reflect().reflect(), x);
    }

    #[test]
    fn convolution_with_shifted_impulse_shifts() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = random_signal(&mut rng, 8);
        let e2 = S::standard_basis(8, 2);
        let y = x.circular_convolve(&e2).unwrap();
        assert_eq!(y, x.cyclic_shift(1));
    }

    #[test]
    fn dft_idft_round_trip_and_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for &d in &[1usize, 2, 5, 16, 64] {
            let x = random_signal(&mut rng, d);
            let xf = x.dft();
            let back = xf.idft();
            let err: f64 = x
                .entries()
                .iter()
                .zip(back.entries())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err <= 1e-12 * x.norm().max(1.0), "round trip err {err} at d={d}");
            // Parseval with the unnormalized kernel: ||X||^2 = d ||x||^2
            assert_close(xf.norm_sq(), d as f64 * x.norm_sq(), 1e-10 * d as f64);
        }
    }

    #[test]
    fn dft_of_impulse_is_flat() {
        let e1 = S::standard_basis(6, 1);
        for z in e1.dft().entries() {
            assert!((z - c(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn convolution_theorem() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for &d in &[4usize, 9, 16] {
            let x = random_signal(&mut rng, d);
            let y = random_signal(&mut rng, d);
            let lhs = x.circular_convolve(&y).unwrap().dft();
            let rhs = x.dft().hadamard(&y.dft()).unwrap();
            let scale = lhs.norm().max(1.0);
            for (a, b) in lhs.entries().iter().zip(rhs.entries()) {
                assert!((a - b).norm() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn inner_is_conjugate_linear_in_second_argument() {
        let x = S::new(vec![c(1.0, 2.0), c(0.0, -1.0)]).unwrap();
        let y = S::new(vec![c(3.0, 0.0), c(1.0, 1.0)]).unwrap();
        let ip = x.inner(&y).unwrap();
        // (1+2i)*3 + (-i)*(1-i) = 3+6i + (-1-i) = 2+5i
        assert!((ip - c(2.0, 5.0)).norm() < 1e-15);
        let scaled = y.scale(c(0.0, 1.0));
        let ip2 = x.inner(&scaled).unwrap();
        assert!((ip2 - ip * c(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn length_mismatch_is_reported() {
        let x = S::zeros(3);
        let y = S::zeros(4);
        assert!(matches!(x.inner(&y), Err(Error::LengthMismatch { left: 3, right: 4 })));
        assert!(matches!(x.hadamard(&y), Err(Error::LengthMismatch { .. })));
        assert!(matches!(x.circular_convolve(&y), Err(Error::LengthMismatch { .. })));
        assert!(matches!(metric_d2(&x, &y), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn metrics_on_orthogonal_basis_vectors() {
        let e1 = S::standard_basis(4, 1);
        let e2 = S::standard_basis(4, 2);
        assert_close(metric_d2(&e1, &e2).unwrap(), f64::sqrt(2.0), 1e-15);
        assert_close(metric_d1(&e1, &e2).unwrap(), 2.0, 1e-15);
    }

    #[test]
    fn metrics_vanish_on_phase_orbits() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..100 {
            let d = rng.random_range(1..32usize);
            let x = random_signal(&mut rng, d);
            let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            let y = x.scale(Complex::cis(theta));
            let tol = 1e-10 * x.norm();
            assert!(metric_d2(&x, &y).unwrap() <= tol);
            assert!(metric_d1(&x, &y).unwrap() <= tol);
            assert!(metric_d2(&x, &x).unwrap() <= tol);
        }
    }

    #[test]
    fn metrics_are_symmetric_and_triangular() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let d = rng.random_range(1..16usize);
            let x = random_signal(&mut rng, d);
            let y = random_signal(&mut rng, d);
            let z = random_signal(&mut rng, d);
            let slack = 1e-12 * (x.norm() + y.norm() + z.norm()).max(1.0);
            for m in [metric_d2, metric_d1] {
                let xy = m(&x, &y).unwrap();
                let yx = m(&y, &x).unwrap();
                assert!((xy - yx).abs() <= slack);
                assert!(xy <= m(&x, &z).unwrap() + m(&z, &y).unwrap() + slack);
            }
        }
    }

    #[test]
    fn metric_values_match_direct_formulas_on_generic_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..50 {
            let d = rng.random_range(2..24usize);
            let x = random_signal(&mut rng, d);
            let y = random_signal(&mut rng, d);
            let s = x.norm_sq() + y.norm_sq();
            let g = x.inner(&y).unwrap().norm();
            let d2_raw = (s - 2.0 * g).max(0.0).sqrt();
            let d1_raw = (s * s - 4.0 * g * g).max(0.0).sqrt();
            assert_close(metric_d2(&x, &y).unwrap(), d2_raw, 1e-9 * s.max(1.0));
            assert_close(metric_d1(&x, &y).unwrap(), d1_raw, 1e-9 * s.max(1.0));
        }
    }

    #[test]
    fn f32_instantiation_works() {
        let x = ComplexSignal::<f32>::from_reals(&[1.0, 0.0, 0.0, 0.0]).unwrap();
        let y = ComplexSignal::<f32>::standard_basis(4, 2);
        let dist = metric_d2(&x, &y).unwrap();
        assert!((dist - f32::sqrt(2.0)).abs() < 1e-6);
    }
}
