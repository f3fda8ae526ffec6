//! Certified lower-bound formulas, scaling-law fits, and the noise floor an
//! adversarial pair implies for noisy inversion.
//!
//! Each formula gives the constant-free right-hand side of a lower Lipschitz
//! bound: signal distance <= C * rhs * measurement distance for a universal
//! C > 0, so rhs is the quantity certificates divide out. Every formula comes
//! in two algebraically equal parameterizations, one in the shift stride a and
//! one in the shift count L = d / a.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{measure, FamilyTag, MapKind, MaskFamily, MeasurementGeometry};
use crate::scalar::{lossy_f64, real, real_usize, Real};
use crate::signal::{metric_d1, metric_d2};
use crate::witness::WitnessPair;

/// Identifies one of the six certified bound formulas.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundId {
    /// General family, magnitude map.
    ThmZ,
    /// General family, squared-magnitude map.
    ThmY,
    /// Exponentially windowed Fourier family, magnitude map.
    CorFourierZ,
    /// Exponentially windowed Fourier family, squared-magnitude map.
    CorFourierY,
    /// Two-shot family, magnitude map.
    CorTwoShotZ,
    /// Two-shot family, squared-magnitude map.
    CorTwoShotY,
}

impl BoundId {
    pub fn as_str(&self) -> &'static str {
        match self {
            BoundId::ThmZ => "thmZ",
            BoundId::ThmY => "thmY",
            BoundId::CorFourierZ => "corFourierZ",
            BoundId::CorFourierY => "corFourierY",
            BoundId::CorTwoShotZ => "corTwoShotZ",
            BoundId::CorTwoShotY => "corTwoShotY",
        }
    }

    /// The sharpest formula available for a family tag and map kind. Families
    /// without a dedicated corollary fall back to the general theorem.
    pub fn for_family(tag: FamilyTag, kind: MapKind) -> BoundId {
        match (tag, kind) {
            (FamilyTag::TwoShot, MapKind::Z) => BoundId::CorTwoShotZ,
            (FamilyTag::TwoShot, MapKind::Y) => BoundId::CorTwoShotY,
            (FamilyTag::WindowedFourier, MapKind::Z) => BoundId::CorFourierZ,
            (FamilyTag::WindowedFourier, MapKind::Y) => BoundId::CorFourierY,
            (_, MapKind::Z) => BoundId::ThmZ,
            (_, MapKind::Y) => BoundId::ThmY,
        }
    }
}

impl std::fmt::Display for BoundId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for BoundId {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "thmZ" => Ok(BoundId::ThmZ),
            "thmY" => Ok(BoundId::ThmY),
            "corFourierZ" => Ok(BoundId::CorFourierZ),
            "corFourierY" => Ok(BoundId::CorFourierY),
            "corTwoShotZ" => Ok(BoundId::CorTwoShotZ),
            "corTwoShotY" => Ok(BoundId::CorTwoShotY),
            other => Err(format!("unknown bound id {other:?}")),
        }
    }
}

/// Everything a bound formula may consume. The theorem formulas need the mask
/// count and sup norm; the windowed-Fourier corollaries need the decay b.
#[derive(Debug, Clone, Copy)]
pub struct BoundInputs<T> {
    pub d: usize,
    pub delta: usize,
    pub stride: usize,
    pub p: T,
    pub q: T,
    pub mask_count: Option<usize>,
    pub mask_sup_norm: Option<T>,
    pub decay: Option<T>,
}

/// The window-decay constant e^{1/b} - 1 entering the windowed-Fourier
/// corollaries. Requires b > 0.
pub fn k_b<T: Real>(b: T) -> Result<T> {
    if !(b > T::zero()) || !b.is_finite() {
        return Err(Error::NonPositiveDecay { b: lossy_f64(b) });
    }
    Ok((T::one() / b).exp_m1())
}

/// Constant-free right-hand side in the stride parameterization.
pub fn rhs<T: Real>(id: BoundId, inputs: &BoundInputs<T>) -> Result<T> {
    evaluate(id, inputs, Parameterization::Stride)
}

/// Constant-free right-hand side in the shift-count parameterization
/// L = d / a. Requires the stride to divide d.
pub fn rhs_shift_count_form<T: Real>(id: BoundId, inputs: &BoundInputs<T>) -> Result<T> {
    evaluate(id, inputs, Parameterization::ShiftCount)
}

enum Parameterization {
    Stride,
    ShiftCount,
}

fn evaluate<T: Real>(id: BoundId, inputs: &BoundInputs<T>, form: Parameterization) -> Result<T> {
    let BoundInputs {
        d,
        delta,
        stride,
        p,
        q,
        ..
    } = *inputs;
    if d == 0 || delta == 0 || stride == 0 {
        return Err(Error::NonPositiveGeometry);
    }
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
    if !(p > T::zero()) || !(q >= p) || !p.is_finite() || !q.is_finite() {
        return Err(Error::InvalidMagnitudes {
            p: lossy_f64(p),
            q: lossy_f64(q),
        });
    }

    let dn = real_usize::<T>(d);
    let deltan = real_usize::<T>(delta);
    // root_da = sqrt(d a) in the stride form, d / sqrt(L) in the shift-count
    // form; equal whenever a | d. The Y formulas need d sqrt(a), which is
    // root_da * sqrt(d) in both forms.
    let root_da = match form {
        Parameterization::Stride => (dn * real_usize::<T>(stride)).sqrt(),
        Parameterization::ShiftCount => {
            if d % stride != 0 {
                return Err(Error::ShiftCountDoesNotDivide {
                    shift_count: d / stride,
                    d,
                });
            }
            dn / real_usize::<T>(d / stride).sqrt()
        }
    };

    let theorem_core = |power: f64| -> Result<T> {
        let k = inputs.mask_count.ok_or_else(|| Error::MissingBoundInput {
            id: id.as_str().to_owned(),
            input: "mask_count".to_owned(),
        })?;
        if k == 0 {
            return Err(Error::EmptyFamily);
        }
        let sup = inputs.mask_sup_norm.ok_or_else(|| Error::MissingBoundInput {
            id: id.as_str().to_owned(),
            input: "mask_sup_norm".to_owned(),
        })?;
        if !(sup > T::zero()) {
            return Err(Error::MissingBoundInput {
                id: id.as_str().to_owned(),
                input: "positive mask_sup_norm".to_owned(),
            });
        }
        Ok(real_usize::<T>(k).sqrt() * sup.powf(real::<T>(power)))
    };
    let fourier_kb = || -> Result<T> {
        let b = inputs.decay.ok_or_else(|| Error::MissingBoundInput {
            id: id.as_str().to_owned(),
            input: "decay".to_owned(),
        })?;
        k_b(b)
    };

    let d_root_a = root_da * dn.sqrt();
    let value = match id {
        BoundId::ThmZ => {
            q * root_da / (p * theorem_core(1.0)? * deltan.powf(real::<T>(1.5)))
        }
        BoundId::ThmY => {
            q * d_root_a / (p * theorem_core(2.0)? * deltan.powf(real::<T>(2.5)))
        }
        BoundId::CorFourierZ => {
            let kb = fourier_kb()?;
            kb * q * root_da
                / (p * real_usize::<T>(2 * delta - 1).powf(real::<T>(0.25)) * deltan.sqrt())
        }
        BoundId::CorFourierY => {
            let kb = fourier_kb()?;
            kb * kb * q * d_root_a / (p * deltan.sqrt())
        }
        BoundId::CorTwoShotZ => q * root_da / (p * deltan),
        BoundId::CorTwoShotY => q * d_root_a / (p * deltan),
    };
    Ok(value)
}

/// Least-squares power-law fit ratio ~ amplitude * x^exponent in log-log
/// coordinates. Needs at least 3 points with strictly positive coordinates
/// and at least two distinct abscissas.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingFit<T> {
    /// Which parameter was varied, e.g. "d" or "delta".
    pub axis: String,
    /// The fitted (x, ratio) points.
    pub points: Vec<[T; 2]>,
    pub exponent: T,
    pub amplitude: T,
    pub r_squared: T,
}

/// Fits a power law through `points` = (parameter, ratio) pairs.
pub fn fit_scaling<T: Real>(axis: &str, points: &[(T, T)]) -> Result<ScalingFit<T>> {
    if points.len() < 3 {
        return Err(Error::TooFewFitPoints { count: points.len() });
    }
    for &(x, y) in points {
        if !(x > T::zero()) || !(y > T::zero()) || !x.is_finite() || !y.is_finite() {
            return Err(Error::NonPositiveFitPoint);
        }
    }
    let n = real_usize::<T>(points.len());
    let logs: Vec<(T, T)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let mean_x = logs.iter().map(|&(x, _)| x).sum::<T>() / n;
    let mean_y = logs.iter().map(|&(_, y)| y).sum::<T>() / n;
    let mut sxx = T::zero();
    let mut sxy = T::zero();
    let mut syy = T::zero();
    for &(x, y) in &logs {
        let dx = x - mean_x;
        let dy = y - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if sxx <= T::zero() {
        return Err(Error::DegenerateFit);
    }
    let exponent = sxy / sxx;
    let amplitude = (mean_y - exponent * mean_x).exp();
    let r_squared = if syy > T::zero() {
        (sxy * sxy) / (sxx * syy)
    } else {
        T::one()
    };
    Ok(ScalingFit {
        axis: axis.to_owned(),
        points: points.iter().map(|&(x, y)| [x, y]).collect(),
        exponent,
        amplitude,
        r_squared,
    })
}

/// Largest signal distance that noise of size `epsilon` on the measurements
/// can hide for this pair: half the pair's signal distance when the pair's
/// measurement distance is at most 2 epsilon, zero otherwise. The signal
/// distance is the metric matching `kind`.
pub fn noise_floor<T: Real>(
    pair: &WitnessPair<T>,
    family: &MaskFamily<T>,
    geometry: &MeasurementGeometry,
    kind: MapKind,
    epsilon: T,
) -> Result<T> {
    let a = measure(family, geometry, pair.x_plus(), kind)?;
    let b = measure(family, geometry, pair.x_minus(), kind)?;
    let meas = a.frobenius_distance(&b)?;
    let sig = match kind {
        MapKind::Z => metric_d2(pair.x_plus(), pair.x_minus())?,
        MapKind::Y => metric_d1(pair.x_plus(), pair.x_minus())?,
    };
    let two = real::<T>(2.0);
    if meas <= two * epsilon {
        Ok(sig / two)
    } else {
        Ok(T::zero())
    }
}
