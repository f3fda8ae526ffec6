//! Measurement geometries, locally supported mask families, and the phaseless
//! measurement maps built from them.
//!
//! A geometry fixes a signal length d, a number of shifts L with stride
//! a = d / L, and a mask support length delta with a < delta <= d / 4. A mask
//! family holds K masks supported on positions 1..=delta. Measuring a signal x
//! produces the K x L matrix of magnitudes |<S_{l a} m_k, x>| (map Z) or their
//! squares (map Y), where S is the circular shift moving support forward.

use num_complex::Complex;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{lossy_f64, real, real_usize, Real};
use crate::signal::ComplexSignal;

/// Shift-grid parameters of a measurement ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MeasurementGeometry {
    d: usize,
    shift_count: usize,
    stride: usize,
    delta: usize,
}

impl MeasurementGeometry {
    /// Validates and builds a geometry. Requires d, L, delta >= 1, L | d,
    /// stride a = d / L < delta, and delta <= d / 4.
    pub fn new(d: usize, shift_count: usize, delta: usize) -> Result<Self> {
        if d == 0 || shift_count == 0 || delta == 0 {
            return Err(Error::NonPositiveGeometry);
        }
        if !d.is_multiple_of(shift_count) {
            return Err(Error::ShiftCountDoesNotDivide { shift_count, d });
        }
        let stride = d / shift_count;
        if stride >= delta {
            return Err(Error::StrideNotBelowSupport { stride, delta });
        }
        if 4 * delta > d {
            return Err(Error::SupportTooLarge {
                delta,
                d,
                max: d / 4,
            });
        }
        Ok(Self {
            d,
            shift_count,
            stride,
            delta,
        })
    }

    /// Signal length d.
    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of shifts L.
    pub fn shift_count(&self) -> usize {
        self.shift_count
    }

    /// Shift stride a = d / L.
    pub fn stride(&self) -> usize {
        self.stride
    }

    /// Mask support length delta.
    pub fn delta(&self) -> usize {
        self.delta
    }
}

/// Which magnitude map a measurement evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MapKind {
    /// Squared magnitudes |<S_{l a} m_k, x>|^2.
    Y,
    /// Plain magnitudes |<S_{l a} m_k, x>|.
    Z,
}

impl MapKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            MapKind::Y => "Y",
            MapKind::Z => "Z",
        }
    }
}

impl std::fmt::Display for MapKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for MapKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "Y" | "y" => Ok(MapKind::Y),
            "Z" | "z" => Ok(MapKind::Z),
            other => Err(format!("unknown map kind {other:?}, expected Y or Z")),
        }
    }
}

/// How a family was constructed. Determines which certified bound applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyTag {
    TwoShot,
    WindowedFourier,
    Stft,
    MaskedFourier,
    Custom,
}

impl FamilyTag {
    pub fn as_str(&self) -> &'static str {
        match self {
            FamilyTag::TwoShot => "two-shot",
            FamilyTag::WindowedFourier => "windowed-fourier",
            FamilyTag::Stft => "stft",
            FamilyTag::MaskedFourier => "masked-fourier",
            FamilyTag::Custom => "custom",
        }
    }
}

impl std::fmt::Display for FamilyTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for FamilyTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "two-shot" => Ok(FamilyTag::TwoShot),
            "windowed-fourier" => Ok(FamilyTag::WindowedFourier),
            "stft" => Ok(FamilyTag::Stft),
            "masked-fourier" => Ok(FamilyTag::MaskedFourier),
            "custom" => Ok(FamilyTag::Custom),
            other => Err(format!(
                "unknown family {other:?}, expected two-shot, windowed-fourier, stft, masked-fourier, or custom"
            )),
        }
    }
}

/// Generating data a structured family was derived from, kept so that files
/// round-trip the construction and not just the resulting masks.
#[derive(Debug, Clone)]
pub enum FamilyGenerator<T> {
    /// Window plus modulation frequencies of a short-time Fourier family.
    Stft {
        window: ComplexSignal<T>,
        frequencies: Vec<usize>,
    },
    /// Bandlimited vectors whose Fourier-domain measurements the family mirrors.
    MaskedFourier { vectors: Vec<ComplexSignal<T>> },
}

/// K masks of length d, each supported on positions 1..=delta.
#[derive(Debug, Clone)]
pub struct MaskFamily<T> {
    d: usize,
    delta: usize,
    tag: FamilyTag,
    masks: Vec<ComplexSignal<T>>,
    decay: Option<T>,
    generator: Option<FamilyGenerator<T>>,
}

impl<T: Real> MaskFamily<T> {
    /// Validates and builds a family: masks must be nonempty, all of length d,
    /// finite, exactly zero outside 1..=delta, and tags that fix the mask
    /// count (two-shot, windowed-Fourier) must hold exactly 2 delta - 1 masks.
    pub fn new(
        d: usize,
        delta: usize,
        tag: FamilyTag,
        masks: Vec<ComplexSignal<T>>,
    ) -> Result<Self> {
        if delta < 1 || delta > d {
            return Err(Error::SupportOutOfRange { delta, d });
        }
        if masks.is_empty() {
            return Err(Error::EmptyFamily);
        }
        for (k, mask) in masks.iter().enumerate() {
            if mask.len() != d {
                return Err(Error::DimensionMismatch {
                    context: format!("mask {} has length {}, family needs {}", k + 1, mask.len(), d),
                });
            }
            for n in (delta + 1)..=d {
                let z = mask.entry(n);
                if z.re != T::zero() || z.im != T::zero() {
                    return Err(Error::SupportViolation {
                        index: k + 1,
                        position: n,
                        delta,
                    });
                }
            }
        }
        if matches!(tag, FamilyTag::TwoShot | FamilyTag::WindowedFourier) {
            let expected = 2 * delta - 1;
            if masks.len() != expected {
                return Err(Error::WrongMaskCount {
                    tag: tag.as_str().to_owned(),
                    count: masks.len(),
                    expected,
                });
            }
        }
        Ok(Self {
            d,
            delta,
            tag,
            masks,
            decay: None,
            generator: None,
        })
    }

    pub(crate) fn with_decay(mut self, b: T) -> Self {
        self.decay = Some(b);
        self
    }

    pub(crate) fn with_generator(mut self, generator: FamilyGenerator<T>) -> Self {
        self.generator = Some(generator);
        self
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn tag(&self) -> FamilyTag {
        self.tag
    }

    /// Number of masks K.
    pub fn mask_count(&self) -> usize {
        self.masks.len()
    }

    pub fn masks(&self) -> &[ComplexSignal<T>] {
        &self.masks
    }

    /// Decay parameter b of a windowed-Fourier family, if any.
    pub fn decay(&self) -> Option<T> {
        self.decay
    }

    pub fn generator(&self) -> Option<&FamilyGenerator<T>> {
        self.generator.as_ref()
    }

    /// Largest entry magnitude over all masks.
    pub fn sup_norm(&self) -> T {
        self.masks
            .iter()
            .map(|m| m.sup_norm())
            .fold(T::zero(), |a, b| a.max(b))
    }
}

/// A K x L matrix of magnitude measurements.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementMatrix<T> {
    kind: MapKind,
    mask_count: usize,
    shift_count: usize,
    values: Vec<T>,
}

impl<T: Real> MeasurementMatrix<T> {
    pub fn kind(&self) -> MapKind {
        self.kind
    }

    /// Number of mask rows K.
    pub fn mask_count(&self) -> usize {
        self.mask_count
    }

    /// Number of shift columns L.
    pub fn shift_count(&self) -> usize {
        self.shift_count
    }

    /// Entry for mask k and shift l, both 1-based. Panics if out of range.
    pub fn entry(&self, k: usize, l: usize) -> T {
        assert!(k >= 1 && k <= self.mask_count, "mask index {k} outside 1..={}", self.mask_count);
        assert!(l >= 1 && l <= self.shift_count, "shift index {l} outside 1..={}", self.shift_count);
        self.values[(k - 1) * self.shift_count + (l - 1)]
    }

    /// Row-major values, mask index outer and shift index inner.
    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Frobenius distance to another matrix of the same shape and kind.
    pub fn frobenius_distance(&self, other: &Self) -> Result<T> {
        self.check_same_shape(other)?;
        let mut acc = T::zero();
        for (a, b) in self.values.iter().zip(&other.values) {
            let diff = *a - *b;
            acc += diff * diff;
        }
        Ok(acc.sqrt())
    }

    /// Largest absolute entry difference to another matrix of the same shape.
    pub fn max_abs_difference(&self, other: &Self) -> Result<T> {
        self.check_same_shape(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), |m, v| m.max(v)))
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.kind != other.kind
            || self.mask_count != other.mask_count
            || self.shift_count != other.shift_count
        {
            return Err(Error::DimensionMismatch {
                context: format!(
                    "measurement matrices differ: {} {}x{} vs {} {}x{}",
                    self.kind, self.mask_count, self.shift_count,
                    other.kind, other.mask_count, other.shift_count
                ),
            });
        }
        Ok(())
    }
}

/// Evaluates the measurement map of `kind` for every mask and shift.
///
/// Exploits the mask support: each entry sums delta products, so the full
/// matrix costs O(K L delta). The family support must fit the geometry
/// (family delta <= geometry delta) and all lengths must agree.
pub fn measure<T: Real>(
    family: &MaskFamily<T>,
    geometry: &MeasurementGeometry,
    x: &ComplexSignal<T>,
    kind: MapKind,
) -> Result<MeasurementMatrix<T>> {
    if family.d() != geometry.d() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "family length {} vs geometry length {}",
                family.d(),
                geometry.d()
            ),
        });
    }
    if x.len() != geometry.d() {
        return Err(Error::DimensionMismatch {
            context: format!("signal length {} vs geometry length {}", x.len(), geometry.d()),
        });
    }
    if family.delta() > geometry.delta() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "family support {} exceeds geometry support {}",
                family.delta(),
                geometry.delta()
            ),
        });
    }

    let d = geometry.d();
    let ell_max = geometry.shift_count();
    let a = geometry.stride();
    let delta = family.delta();
    let xs = x.entries();

    let mut values = Vec::with_capacity(family.mask_count() * ell_max);
    for mask in family.masks() {
        let ms = mask.entries();
        for ell in 1..=ell_max {
            let offset = (ell * a) % d;
            let mut acc = Complex::new(T::zero(), T::zero());
            for t in 0..delta {
                // <S_{l a} m, x> = sum_t m(t) conj(x(t + l a)), indices mod d
                acc += ms[t] * xs[(t + offset) % d].conj();
            }
            let v = match kind {
                MapKind::Y => acc.norm_sqr(),
                MapKind::Z => acc.norm_sqr().sqrt(),
            };
            values.push(v);
        }
    }
    Ok(MeasurementMatrix {
        kind,
        mask_count: family.mask_count(),
        shift_count: ell_max,
        values,
    })
}

/// The holographic two-shot family: m_1 = e_1 and, for j = 1, ..., delta - 1,
/// m_{2j} = e_1 + e_{j+1} and m_{2j+1} = e_1 + i e_{j+1}. K = 2 delta - 1.
/// Requires 2 <= delta <= d.
pub fn two_shot_family<T: Real>(d: usize, delta: usize) -> Result<MaskFamily<T>> {
    if delta < 2 {
        return Err(Error::SupportTooSmall { delta });
    }
    if delta > d {
        return Err(Error::SupportOutOfRange { delta, d });
    }
    let one = Complex::new(T::one(), T::zero());
    let i = Complex::new(T::zero(), T::one());
    let mut masks = Vec::with_capacity(2 * delta - 1);
    masks.push(ComplexSignal::standard_basis(d, 1));
    for j in 1..delta {
        for unit in [one, i] {
            let mut entries = vec![Complex::new(T::zero(), T::zero()); d];
            entries[0] = one;
            entries[j] = unit;
            masks.push(ComplexSignal::new(entries).expect("finite two-shot mask"));
        }
    }
    MaskFamily::new(d, delta, FamilyTag::TwoShot, masks)
}

/// The exponentially windowed Fourier family:
/// m_k(n) = e^{-n/b} (2 delta - 1)^{-1/4} e^{2 pi i (k-1)(n-1)/(2 delta - 1)}
/// for n = 1, ..., delta and k = 1, ..., 2 delta - 1. Requires delta >= 2 and
/// b > 0; decay parameters b <= 4 fall outside the regime the certified
/// constants are tuned for and are only warned about.
pub fn windowed_fourier_family<T: Real>(d: usize, delta: usize, b: T) -> Result<MaskFamily<T>> {
    if delta < 2 {
        return Err(Error::SupportTooSmall { delta });
    }
    if delta > d {
        return Err(Error::SupportOutOfRange { delta, d });
    }
    if !(b > T::zero()) || !b.is_finite() {
        return Err(Error::NonPositiveDecay { b: lossy_f64(b) });
    }
    if b <= real::<T>(4.0) {
        log::warn!(
            "windowed-Fourier decay b = {} is at or below 4; the certified constants degrade \
             as b approaches 0",
            lossy_f64(b)
        );
    }
    let k_count = 2 * delta - 1;
    let tau = T::TAU();
    let kn = real_usize::<T>(k_count);
    let root = kn.powf(real::<T>(-0.25));
    let mut masks = Vec::with_capacity(k_count);
    for k in 0..k_count {
        let mut entries = vec![Complex::new(T::zero(), T::zero()); d];
        for n in 0..delta {
            let amplitude = (-real_usize::<T>(n + 1) / b).exp() * root;
            let t = (k * n) % k_count;
            entries[n] = Complex::cis(tau * real_usize::<T>(t) / kn) * amplitude;
        }
        masks.push(ComplexSignal::new(entries).expect("finite windowed-Fourier mask"));
    }
    Ok(MaskFamily::new(d, delta, FamilyTag::WindowedFourier, masks)?.with_decay(b))
}

/// A family of `mask_count` random masks supported on 1..=delta, entries drawn
/// uniformly from the complex square [-1, 1] x [-1, 1]. Tagged custom.
pub fn random_family<T: Real>(
    d: usize,
    delta: usize,
    mask_count: usize,
    rng: &mut impl Rng,
) -> Result<MaskFamily<T>> {
    if delta < 1 || delta > d {
        return Err(Error::SupportOutOfRange { delta, d });
    }
    if mask_count == 0 {
        return Err(Error::EmptyFamily);
    }
    let masks = (0..mask_count)
        .map(|_| {
            let mut entries = vec![Complex::new(T::zero(), T::zero()); d];
            for e in entries.iter_mut().take(delta) {
                *e = Complex::new(
                    real::<T>(rng.random_range(-1.0..1.0)),
                    real::<T>(rng.random_range(-1.0..1.0)),
                );
            }
            ComplexSignal::new(entries).expect("finite random mask")
        })
        .collect();
    MaskFamily::new(d, delta, FamilyTag::Custom, masks)
}
