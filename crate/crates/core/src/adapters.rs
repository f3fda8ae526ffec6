//! Adapters that realize two classical measurement setups as locally
//! supported mask families.
//!
//! Short-time Fourier measurements |<x, W_omega S_sigma w>| with a window w
//! supported on 1..=delta are, up to a unimodular factor, measurements of x by
//! the masks m_k = W_{omega_k} w, so the family inherits the window's support.
//!
//! Fourier measurements |F(w_k . x)| of pointwise-masked signals sampled on
//! the shift grid match measurements of the DFT of x by masks derived from
//! the spectra of the w_k: m_k = (1/d) conj(reflect(dft(w_k))). When each
//! dft(w_k) is supported on bin 1 and the top delta - 1 bins, those masks are
//! supported on 1..=delta.

use num_complex::Complex;
use rand::Rng;

use crate::error::{Error, Result};
use crate::measurement::{
    measure, FamilyGenerator, FamilyTag, MapKind, MaskFamily, MeasurementGeometry,
};
use crate::scalar::{lossy_f64, real, real_usize, Real};
use crate::signal::ComplexSignal;

/// Window and modulation frequencies of a short-time Fourier ensemble.
#[derive(Debug, Clone)]
pub struct StftSpec<T> {
    window: ComplexSignal<T>,
    delta: usize,
    frequencies: Vec<usize>,
}

impl<T: Real> StftSpec<T> {
    /// Validates a full-length window supported on 1..=delta (exact zeros
    /// elsewhere) and a nonempty list of distinct frequencies in 1..=d.
    pub fn new(window: ComplexSignal<T>, delta: usize, frequencies: Vec<usize>) -> Result<Self> {
        let d = window.len();
        if delta < 1 || delta > d {
            return Err(Error::SupportOutOfRange { delta, d });
        }
        for n in (delta + 1)..=d {
            let z = window.entry(n);
            if z.re != T::zero() || z.im != T::zero() {
                return Err(Error::SupportViolation {
                    index: 1,
                    position: n,
                    delta,
                });
            }
        }
        if frequencies.is_empty() {
            return Err(Error::NoFrequencies);
        }
        let mut seen = vec![false; d + 1];
        for &omega in &frequencies {
            if omega < 1 || omega > d {
                return Err(Error::FrequencyOutOfRange { omega, d });
            }
            if seen[omega] {
                return Err(Error::DuplicateFrequency { omega });
            }
            seen[omega] = true;
        }
        Ok(Self {
            window,
            delta,
            frequencies,
        })
    }

    /// A random spec: window entries uniform on the complex square over
    /// 1..=delta, `count` distinct frequencies drawn from 1..=d.
    pub fn random(d: usize, delta: usize, count: usize, rng: &mut impl Rng) -> Result<Self> {
        if delta < 1 || delta > d {
            return Err(Error::SupportOutOfRange { delta, d });
        }
        if count == 0 || count > d {
            return Err(Error::NoFrequencies);
        }
        let mut entries = vec![Complex::new(T::zero(), T::zero()); d];
        for e in entries.iter_mut().take(delta) {
            *e = Complex::new(
                real::<T>(rng.random_range(-1.0..1.0)),
                real::<T>(rng.random_range(-1.0..1.0)),
            );
        }
        let mut pool: Vec<usize> = (1..=d).collect();
        let mut frequencies = Vec::with_capacity(count);
        for _ in 0..count {
            let idx = rng.random_range(0..pool.len());
            frequencies.push(pool.swap_remove(idx));
        }
        Self::new(ComplexSignal::new(entries)?, delta, frequencies)
    }

    pub fn window(&self) -> &ComplexSignal<T> {
        &self.window
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn frequencies(&self) -> &[usize] {
        &self.frequencies
    }

    pub fn d(&self) -> usize {
        self.window.len()
    }
}

/// The mask family m_k = W_{omega_k} w. Modulation preserves support, so the
/// family is supported on 1..=delta like the window.
pub fn stft_family<T: Real>(spec: &StftSpec<T>) -> Result<MaskFamily<T>> {
    let masks = spec
        .frequencies
        .iter()
        .map(|&omega| spec.window.modulate(omega))
        .collect::<Result<Vec<_>>>()?;
    Ok(
        MaskFamily::new(spec.d(), spec.delta, FamilyTag::Stft, masks)?.with_generator(
            FamilyGenerator::Stft {
                window: spec.window.clone(),
                frequencies: spec.frequencies.clone(),
            },
        ),
    )
}

/// Largest absolute deviation between measuring `x` through `stft_family` and
/// evaluating |<x, W_{omega_k} S_{l a} w>| directly, over all masks and
/// shifts. Exact arithmetic makes the two equal: shifting a modulated window
/// only changes a unimodular factor.
pub fn verify_stft_identity<T: Real>(
    spec: &StftSpec<T>,
    geometry: &MeasurementGeometry,
    x: &ComplexSignal<T>,
) -> Result<T> {
    let family = stft_family(spec)?;
    let measured = measure(&family, geometry, x, MapKind::Z)?;
    let a = geometry.stride();
    let mut worst = T::zero();
    for (k, &omega) in spec.frequencies.iter().enumerate() {
        for l in 1..=geometry.shift_count() {
            let shifted = spec.window.cyclic_shift((l * a) as i64);
            let direct = x.inner(&shifted.modulate(omega)?)?.norm();
            worst = worst.max((measured.entry(k + 1, l) - direct).abs());
        }
    }
    Ok(worst)
}

/// Bandlimited vectors whose masked Fourier magnitudes the adapter reproduces.
#[derive(Debug, Clone)]
pub struct MaskedFourierSpec<T> {
    vectors: Vec<ComplexSignal<T>>,
    delta: usize,
}

impl<T: Real> MaskedFourierSpec<T> {
    /// Validates that every vector's spectrum lives on bin 1 and the top
    /// delta - 1 bins: |dft(w)(n)| <= 1e-12 ||w|| on all other bins.
    pub fn new(vectors: Vec<ComplexSignal<T>>, delta: usize) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::EmptyFamily);
        }
        let d = vectors[0].len();
        if delta < 1 || delta > d {
            return Err(Error::SupportOutOfRange { delta, d });
        }
        for (k, w) in vectors.iter().enumerate() {
            if w.len() != d {
                return Err(Error::LengthMismatch {
                    left: d,
                    right: w.len(),
                });
            }
            let spectrum = w.dft();
            let tolerance = real::<T>(1e-12) * w.norm();
            for (i, z) in spectrum.entries().iter().enumerate() {
                let allowed = i == 0 || i + delta >= d + 1;
                if !allowed && z.norm() > tolerance {
                    return Err(Error::BandlimitViolation {
                        index: k + 1,
                        position: i + 1,
                        mass: lossy_f64(z.norm()),
                        tolerance: lossy_f64(tolerance),
                    });
                }
            }
        }
        Ok(Self { vectors, delta })
    }

    /// Random admissible vectors: spectra drawn uniformly on the allowed bins,
    /// transformed back to the signal domain.
    pub fn random(d: usize, delta: usize, count: usize, rng: &mut impl Rng) -> Result<Self> {
        if delta < 1 || delta > d {
            return Err(Error::SupportOutOfRange { delta, d });
        }
        if count == 0 {
            return Err(Error::EmptyFamily);
        }
        let vectors = (0..count)
            .map(|_| {
                let mut spectrum = vec![Complex::new(T::zero(), T::zero()); d];
                for (i, e) in spectrum.iter_mut().enumerate() {
                    if i == 0 || i + delta >= d + 1 {
                        *e = Complex::new(
                            real::<T>(rng.random_range(-1.0..1.0)),
                            real::<T>(rng.random_range(-1.0..1.0)),
                        );
                    }
                }
                Ok(ComplexSignal::new(spectrum)?.idft())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(vectors, delta)
    }

    pub fn vectors(&self) -> &[ComplexSignal<T>] {
        &self.vectors
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn d(&self) -> usize {
        self.vectors[0].len()
    }
}

/// The mask family m_k = (1/d) conj(reflect(dft(w_k))), clamped to exact
/// zeros outside 1..=delta. The clamp removes only the spectral mass the
/// bandlimit validation already bounded by 1e-12 ||w_k||.
pub fn masked_fourier_family<T: Real>(spec: &MaskedFourierSpec<T>) -> Result<MaskFamily<T>> {
    let d = spec.d();
    let inv_d = Complex::new(T::one() / real_usize::<T>(d), T::zero());
    let masks = spec
        .vectors
        .iter()
        .map(|w| {
            let raw = w.dft().reflect().conj().scale(inv_d);
            let mut entries = raw.entries().to_vec();
            for e in entries.iter_mut().skip(spec.delta) {
                *e = Complex::new(T::zero(), T::zero());
            }
            ComplexSignal::new(entries)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(
        MaskFamily::new(d, spec.delta, FamilyTag::MaskedFourier, masks)?.with_generator(
            FamilyGenerator::MaskedFourier {
                vectors: spec.vectors.clone(),
            },
        ),
    )
}

/// Largest absolute deviation between measuring dft(x) through
/// `masked_fourier_family` and sampling |dft(w_k . x)| at the bins l a mod d,
/// over all vectors and shifts.
pub fn verify_masked_fourier_identity<T: Real>(
    spec: &MaskedFourierSpec<T>,
    geometry: &MeasurementGeometry,
    x: &ComplexSignal<T>,
) -> Result<T> {
    let family = masked_fourier_family(spec)?;
    let transformed = x.dft();
    let measured = measure(&family, geometry, &transformed, MapKind::Z)?;
    let d = geometry.d();
    let a = geometry.stride();
    let mut worst = T::zero();
    for (k, w) in spec.vectors.iter().enumerate() {
        let sampled = w.hadamard(x)?.dft();
        for l in 1..=geometry.shift_count() {
            let direct = sampled.entries()[(l * a) % d].norm();
            worst = worst.max((measured.entry(k + 1, l) - direct).abs());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_signal(rng: &mut ChaCha8Rng, d: usize) -> ComplexSignal<f64> {
        ComplexSignal::new(
            (0..d)
                .map(|_| {
                    Complex::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn stft_spec_validation() {
        let mut entries = vec![Complex::new(0.0, 0.0); 8];
        entries[0] = Complex::new(1.0, 0.0);
        entries[4] = Complex::new(0.5, 0.0);
        let window = ComplexSignal::new(entries).unwrap();
        assert!(matches!(
            StftSpec::new(window.clone(), 2, vec![1]),
            Err(Error::SupportViolation { position: 5, .. })
        ));
        let ok = StftSpec::new(window.clone(), 5, vec![1, 3]);
        assert!(ok.is_ok());
        assert!(matches!(
            StftSpec::new(window.clone(), 5, vec![]),
            Err(Error::NoFrequencies)
        ));
        assert!(matches!(
            StftSpec::new(window.clone(), 5, vec![1, 1]),
            Err(Error::DuplicateFrequency { omega: 1 })
        ));
        assert!(matches!(
            StftSpec::new(window, 5, vec![9]),
            Err(Error::FrequencyOutOfRange { omega: 9, d: 8 })
        ));
    }

    #[test]
    fn stft_identity_holds_for_random_specs() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for &d in &[8usize, 16, 64] {
            let delta = d / 4;
            let geometry = MeasurementGeometry::new(d, d, delta).unwrap();
            for _ in 0..10 {
                let spec = StftSpec::<f64>::random(d, delta, 3, &mut rng).unwrap();
                let x = random_signal(&mut rng, d);
                let dev = verify_stft_identity(&spec, &geometry, &x).unwrap();
                let bound = 1e-10 * x.norm() * spec.window().one_norm();
                assert!(dev <= bound, "stft deviation {dev} above {bound} at d={d}");
            }
        }
    }

    #[test]
    fn masked_fourier_spec_rejects_full_band_vectors() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let dense = random_signal(&mut rng, 16);
        assert!(matches!(
            MaskedFourierSpec::new(vec![dense], 4),
            Err(Error::BandlimitViolation { .. })
        ));
    }

    #[test]
    fn masked_fourier_masks_have_local_support() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let spec = MaskedFourierSpec::<f64>::random(16, 4, 3, &mut rng).unwrap();
        let family = masked_fourier_family(&spec).unwrap();
        assert_eq!(family.delta(), 4);
        assert_eq!(family.mask_count(), 3);
        for mask in family.masks() {
            for n in 5..=16 {
                assert_eq!(mask.entry(n), Complex::new(0.0, 0.0));
            }
        }
    }

    #[test]
    fn masked_fourier_identity_holds_for_random_specs() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        for &d in &[8usize, 16, 64] {
            let delta = d / 4;
            let geometry = MeasurementGeometry::new(d, d, delta).unwrap();
            for _ in 0..10 {
                let spec = MaskedFourierSpec::<f64>::random(d, delta, 3, &mut rng).unwrap();
                let x = random_signal(&mut rng, d);
                let dev = verify_masked_fourier_identity(&spec, &geometry, &x).unwrap();
                let sup = spec
                    .vectors()
                    .iter()
                    .map(|w| w.sup_norm())
                    .fold(0.0f64, f64::max);
                let bound = 1e-9 * d as f64 * x.norm() * sup;
                assert!(dev <= bound, "deviation {dev} above {bound} at d={d}");
            }
        }
    }

    #[test]
    fn masked_fourier_identity_requires_matching_shift_orientation() {
        // sampling at the negated bins -l a mod d must NOT match for a
        // generic spec: the identity pins the orientation
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        let d = 16;
        let delta = 4;
        let geometry = MeasurementGeometry::new(d, d, delta).unwrap();
        let spec = MaskedFourierSpec::<f64>::random(d, delta, 2, &mut rng).unwrap();
        let family = masked_fourier_family(&spec).unwrap();
        let x = random_signal(&mut rng, d);
        let measured = measure(&family, &geometry, &x.dft(), MapKind::Z).unwrap();
        let mut negated_worst = 0.0f64;
        for (k, w) in spec.vectors().iter().enumerate() {
            let sampled = w.hadamard(&x).unwrap().dft();
            for l in 1..=d {
                let direct = sampled.entries()[(d - l % d) % d].norm();
                negated_worst = negated_worst.max((measured.entry(k + 1, l) - direct).abs());
            }
        }
        assert!(
            negated_worst > 1e-6,
            "negated-bin sampling should not reproduce the measurements"
        );
    }
}
