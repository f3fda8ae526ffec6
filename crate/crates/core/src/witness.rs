//! Adversarial witness pairs and numerical certificates.
//!
//! A witness pair is two signals that agree in magnitude everywhere and agree
//! in sign on half the circle: blocks of height q on [1, eta] and
//! (d/2, d/2 + eta], blocks of height p on the remaining two arcs, with the
//! second q-block negated in one of the signals (eta = d/2 - delta). Locally
//! supported measurements see the sign flip only through the few windows that
//! straddle a block boundary, which is what makes the pairs adversarial: the
//! signal distance stays of order q sqrt(d) while the measurement distance is
//! controlled by p and delta alone.

use num_complex::Complex;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{rhs, BoundId, BoundInputs};
use crate::error::{Error, Result};
use crate::measurement::{measure, MapKind, MaskFamily, MeasurementGeometry};
use crate::scalar::{lossy_f64, real, real_usize, Real};
use crate::signal::{metric_d1, metric_d2, ComplexSignal, QuotientDistances};

/// A pair of signals x+ and x- with blockwise magnitudes p and q.
///
/// Both signals have even length d, block parameter delta <= d / 4, and
/// eta = d / 2 - delta. Entries of constructed pairs are real: q on the two
/// outer arcs (with the second one negated in x-), p on the two inner arcs.
#[derive(Debug, Clone)]
pub struct WitnessPair<T> {
    x_plus: ComplexSignal<T>,
    x_minus: ComplexSignal<T>,
    p: T,
    q: T,
    delta: usize,
}

impl<T: Real> WitnessPair<T> {
    /// The blockwise pair with inner magnitude `p` and outer magnitude `q`.
    /// Requires even d, 1 <= delta <= d / 4, 0 <= p <= q, and q > 0. With
    /// p = 0 the pair is an exact collision for every family supported on
    /// 1..=delta.
    pub fn atoll(d: usize, delta: usize, p: T, q: T) -> Result<Self> {
        if !d.is_multiple_of(2) {
            return Err(Error::OddLength { d });
        }
        if delta == 0 || 4 * delta > d {
            return Err(Error::SupportTooLarge {
                delta,
                d,
                max: d / 4,
            });
        }
        if !(q > T::zero()) || !(p >= T::zero()) || !(p <= q) || !p.is_finite() || !q.is_finite() {
            return Err(Error::InvalidMagnitudes {
                p: lossy_f64(p),
                q: lossy_f64(q),
            });
        }
        let eta = d / 2 - delta;
        let zero = T::zero();
        let mut plus = Vec::with_capacity(d);
        let mut minus = Vec::with_capacity(d);
        for i in 0..d {
            let (vp, vm) = if i < eta {
                (q, q)
            } else if i < d / 2 {
                (p, p)
            } else if i < d / 2 + eta {
                (q, -q)
            } else {
                (p, p)
            };
            plus.push(Complex::new(vp, zero));
            minus.push(Complex::new(vm, zero));
        }
        Ok(Self {
            x_plus: ComplexSignal::new(plus).expect("finite atoll entries"),
            x_minus: ComplexSignal::new(minus).expect("finite atoll entries"),
            p,
            q,
            delta,
        })
    }

    /// The collision pair: p = 0, q = 1.
    pub fn atoll_unit(d: usize, delta: usize) -> Result<Self> {
        Self::atoll(d, delta, T::zero(), T::one())
    }

    /// A non-collision pair; requires p > 0.
    pub fn atoll_pq(d: usize, delta: usize, p: T, q: T) -> Result<Self> {
        if !(p > T::zero()) {
            return Err(Error::InvalidMagnitudes {
                p: lossy_f64(p),
                q: lossy_f64(q),
            });
        }
        Self::atoll(d, delta, p, q)
    }

    /// Rebuilds a pair from stored signals, revalidating the contract: equal
    /// even lengths, delta <= d / 4, entry magnitudes within [p, q] up to a
    /// 1e-9 q slack, and the two signals not phase-equivalent.
    pub fn from_signals(
        x_plus: ComplexSignal<T>,
        x_minus: ComplexSignal<T>,
        p: T,
        q: T,
        delta: usize,
    ) -> Result<Self> {
        if x_plus.len() != x_minus.len() {
            return Err(Error::LengthMismatch {
                left: x_plus.len(),
                right: x_minus.len(),
            });
        }
        let d = x_plus.len();
        if !d.is_multiple_of(2) {
            return Err(Error::OddLength { d });
        }
        if delta == 0 || 4 * delta > d {
            return Err(Error::SupportTooLarge {
                delta,
                d,
                max: d / 4,
            });
        }
        if !(q > T::zero()) || !(p >= T::zero()) || !(p <= q) || !p.is_finite() || !q.is_finite() {
            return Err(Error::InvalidMagnitudes {
                p: lossy_f64(p),
                q: lossy_f64(q),
            });
        }
        let slack = real::<T>(1e-9) * q;
        for (which, signal) in [&x_plus, &x_minus].into_iter().enumerate() {
            for (i, z) in signal.entries().iter().enumerate() {
                let magnitude = z.norm();
                if magnitude < p - slack || magnitude > q + slack {
                    return Err(Error::MagnitudeOutOfBand {
                        position: which * d + i + 1,
                        magnitude: lossy_f64(magnitude),
                        p: lossy_f64(p),
                        q: lossy_f64(q),
                    });
                }
            }
        }
        let distance = metric_d2(&x_plus, &x_minus)?;
        let threshold = real::<T>(crate::DEFAULT_RELATIVE_TOLERANCE) * x_plus.norm().max(T::one());
        if distance <= threshold {
            return Err(Error::PhaseEquivalentPair {
                distance: lossy_f64(distance),
            });
        }
        Ok(Self {
            x_plus,
            x_minus,
            p,
            q,
            delta,
        })
    }

    pub fn x_plus(&self) -> &ComplexSignal<T> {
        &self.x_plus
    }

    pub fn x_minus(&self) -> &ComplexSignal<T> {
        &self.x_minus
    }

    pub fn p(&self) -> T {
        self.p
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn d(&self) -> usize {
        self.x_plus.len()
    }

    pub fn delta(&self) -> usize {
        self.delta
    }

    /// Arc length eta = d / 2 - delta of the q-blocks.
    pub fn eta(&self) -> usize {
        self.d() / 2 - self.delta
    }

    /// True when p = 0, the exact-collision regime.
    pub fn is_collision_class(&self) -> bool {
        self.p == T::zero()
    }

    /// Both quotient distances of the pair.
    pub fn distances(&self) -> QuotientDistances<T> {
        QuotientDistances {
            d2: metric_d2(&self.x_plus, &self.x_minus).expect("equal lengths"),
            d1: metric_d1(&self.x_plus, &self.x_minus).expect("equal lengths"),
        }
    }
}

/// Closed form of the Euclidean quotient distance of an atoll pair:
/// q sqrt(2 d - 4 delta). At delta = d / 4 this degenerates to q sqrt(d),
/// the general lower bound for the pair's distance.
pub fn atoll_d2_closed_form<T: Real>(d: usize, delta: usize, q: T) -> T {
    q * real_usize::<T>(2 * d - 4 * delta).sqrt()
}

/// Closed form of the trace-norm quotient distance of an atoll pair:
/// 4 q sqrt(eta^2 q^2 + 2 eta delta p^2) with eta = d / 2 - delta. The outer
/// difference has rank two with both singular values equal.
pub fn atoll_d1_closed_form<T: Real>(d: usize, delta: usize, p: T, q: T) -> T {
    let eta = real_usize::<T>(d / 2 - delta);
    let deltan = real_usize::<T>(delta);
    let two = real::<T>(2.0);
    let four = real::<T>(4.0);
    four * q * (eta * eta * q * q + two * eta * deltan * p * p).sqrt()
}

/// The two sign boundaries of an atoll pair that a shifted window can cross.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AtollBoundary {
    /// Position d / 2, where the first p-arc meets the negated q-arc.
    Midpoint,
    /// Position d - delta, where the negated q-arc meets the second p-arc.
    UpperEdge,
}

impl AtollBoundary {
    /// 1-based position of the boundary: windows containing positions on both
    /// sides of it see entries whose relative sign differs between x+ and x-.
    pub fn position(&self, d: usize, delta: usize) -> usize {
        match self {
            AtollBoundary::Midpoint => d / 2,
            AtollBoundary::UpperEdge => d - delta,
        }
    }
}

impl std::fmt::Display for AtollBoundary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AtollBoundary::Midpoint => f.write_str("d/2"),
            AtollBoundary::UpperEdge => f.write_str("d-delta"),
        }
    }
}

/// One shift whose window straddles a sign boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Crossing {
    /// Shift index l in 1..=L.
    pub shift_index: usize,
    pub boundary: AtollBoundary,
    /// Number of window positions on the p-valued side of the boundary.
    pub small_overlap: usize,
}

/// All shifts whose window [1 + l a, delta_w + l a] straddles a sign boundary
/// of the atoll with block parameter `delta` (delta_w is the geometry's
/// support length; the two coincide in every certified setting). Each shift
/// crosses at most one boundary because the boundaries are at least
/// d / 2 - delta >= delta positions apart.
pub fn crossing_indices(geometry: &MeasurementGeometry, delta: usize) -> Vec<Crossing> {
    let d = geometry.d();
    let a = geometry.stride();
    let window = geometry.delta();
    let mut crossings = Vec::new();
    for shift_index in 1..=geometry.shift_count() {
        let la = shift_index * a;
        let mut hit = None;
        for boundary in [AtollBoundary::Midpoint, AtollBoundary::UpperEdge] {
            let b = boundary.position(d, delta);
            // window start 1 + la, end window + la; strict at the far side
            if 1 + la <= b && b < window + la {
                let small_overlap = match boundary {
                    AtollBoundary::Midpoint => b - la,
                    AtollBoundary::UpperEdge => la + window - b,
                };
                debug_assert!(hit.is_none(), "window crosses two boundaries");
                hit = Some(Crossing {
                    shift_index,
                    boundary,
                    small_overlap,
                });
            }
        }
        if let Some(c) = hit {
            crossings.push(c);
        }
    }
    crossings
}

/// Number of shifts for which the two-entry support {1, 1 + separation} of a
/// two-shot mask straddles the given boundary. At stride 1 this equals the
/// separation itself; in general it is at most ceil(separation / stride).
pub fn two_shot_crossing_count(
    geometry: &MeasurementGeometry,
    delta: usize,
    separation: usize,
    boundary: AtollBoundary,
) -> usize {
    let b = boundary.position(geometry.d(), delta);
    let a = geometry.stride();
    (1..=geometry.shift_count())
        .filter(|l| {
            let la = l * a;
            1 + la <= b && b < 1 + separation + la
        })
        .count()
}

/// Outcome of measuring a witness pair through a family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Certificate<T> {
    pub kind: MapKind,
    /// Quotient distance of the pair in the metric matching `kind`.
    pub signal_distance: T,
    /// Frobenius distance of the two measurement matrices.
    pub measurement_distance: T,
    /// signal_distance / measurement_distance; None when the measurements
    /// collide exactly, i.e. the ratio is infinite.
    pub ratio: Option<T>,
    /// Constant-free right-hand side of the certified bound matching the
    /// family; None for collision-class pairs (p = 0).
    pub rhs_no_const: Option<T>,
    /// ratio / rhs_no_const, the constant the certificate exhibits.
    pub empirical_const: Option<T>,
    /// True when the pair was built with p = 0.
    pub collision_class: bool,
}

impl<T: Real> std::fmt::Display for Certificate<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "map:                  {}", self.kind)?;
        writeln!(f, "signal distance:      {:e}", lossy_f64(self.signal_distance))?;
        writeln!(
            f,
            "measurement distance: {:e}",
            lossy_f64(self.measurement_distance)
        )?;
        match self.ratio {
            Some(r) => writeln!(f, "ratio:                {:e}", lossy_f64(r))?,
            None => writeln!(f, "ratio:                infinite (measurements collide)")?,
        }
        match self.rhs_no_const {
            Some(r) => writeln!(f, "rhs (no constant):    {:e}", lossy_f64(r))?,
            None => writeln!(f, "rhs (no constant):    undefined for p = 0")?,
        }
        match self.empirical_const {
            Some(c) => writeln!(f, "empirical constant:   {:e}", lossy_f64(c))?,
            None => writeln!(f, "empirical constant:   undefined")?,
        }
        if self.collision_class {
            writeln!(
                f,
                "collision class: the measurements cannot distinguish the pair, \
                 so no lower Lipschitz bound holds on this class"
            )?;
        }
        Ok(())
    }
}

/// Measures both signals of `pair` through `family` and assembles the
/// distances, their ratio, and the matching certified bound.
pub fn certify<T: Real>(
    family: &MaskFamily<T>,
    geometry: &MeasurementGeometry,
    pair: &WitnessPair<T>,
    kind: MapKind,
) -> Result<Certificate<T>> {
    let (signal_distance, measurement_distance, ratio) =
        distances_and_ratio(family, geometry, pair, kind)?;
    let collision_class = pair.is_collision_class();
    let rhs_no_const = if collision_class {
        None
    } else {
        let inputs = BoundInputs {
            d: geometry.d(),
            delta: geometry.delta(),
            stride: geometry.stride(),
            p: pair.p(),
            q: pair.q(),
            mask_count: Some(family.mask_count()),
            mask_sup_norm: Some(family.sup_norm()),
            decay: family.decay(),
        };
        Some(rhs(BoundId::for_family(family.tag(), kind), &inputs)?)
    };
    let empirical_const = match (ratio, rhs_no_const) {
        (Some(r), Some(b)) if b > T::zero() => Some(r / b),
        _ => None,
    };
    Ok(Certificate {
        kind,
        signal_distance,
        measurement_distance,
        ratio,
        rhs_no_const,
        empirical_const,
        collision_class,
    })
}

fn distances_and_ratio<T: Real>(
    family: &MaskFamily<T>,
    geometry: &MeasurementGeometry,
    pair: &WitnessPair<T>,
    kind: MapKind,
) -> Result<(T, T, Option<T>)> {
    let m_plus = measure(family, geometry, &pair.x_plus, kind)?;
    let m_minus = measure(family, geometry, &pair.x_minus, kind)?;
    let measurement_distance = m_plus.frobenius_distance(&m_minus)?;
    let signal_distance = match kind {
        MapKind::Z => metric_d2(&pair.x_plus, &pair.x_minus)?,
        MapKind::Y => metric_d1(&pair.x_plus, &pair.x_minus)?,
    };
    let ratio = if measurement_distance > T::zero() {
        Some(signal_distance / measurement_distance)
    } else {
        None
    };
    Ok((signal_distance, measurement_distance, ratio))
}

/// Largest violation of the per-entry crossing bound over all masks and
/// shifts: max over entries of |Z+(k, l) - Z-(k, l)| minus the bound
/// 2 j p ||m||_inf for shifts crossing a boundary with p-side overlap j, and
/// minus zero for non-crossing shifts. Exact arithmetic keeps the result
/// nonpositive for atoll pairs; positive values are genuine violations.
pub fn entrywise_bound_check<T: Real>(
    family: &MaskFamily<T>,
    geometry: &MeasurementGeometry,
    pair: &WitnessPair<T>,
) -> Result<T> {
    let z_plus = measure(family, geometry, &pair.x_plus, MapKind::Z)?;
    let z_minus = measure(family, geometry, &pair.x_minus, MapKind::Z)?;
    let crossings = crossing_indices(geometry, pair.delta());
    let sup = family.sup_norm();
    let two = real::<T>(2.0);
    let mut bounds = vec![T::zero(); geometry.shift_count() + 1];
    for c in &crossings {
        bounds[c.shift_index] = two * real_usize::<T>(c.small_overlap) * pair.p() * sup;
    }
    let mut worst = T::neg_infinity();
    for k in 1..=family.mask_count() {
        for l in 1..=geometry.shift_count() {
            let dev = (z_plus.entry(k, l) - z_minus.entry(k, l)).abs();
            worst = worst.max(dev - bounds[l]);
        }
    }
    Ok(worst)
}

/// Random local search for a pair with a larger distance ratio. Perturbs
/// entry magnitudes within [p, q] and entry phases, with step sizes annealed
/// geometrically over the budget, keeping the best candidate. Deterministic
/// in (budget, seed); the returned pair's ratio is never below the input's.
/// Pairs whose measurements already collide are returned unchanged.
pub fn improve_witness<T: Real>(
    family: &MaskFamily<T>,
    geometry: &MeasurementGeometry,
    pair: &WitnessPair<T>,
    kind: MapKind,
    budget: usize,
    seed: u64,
) -> Result<WitnessPair<T>> {
    let (_, _, base) = distances_and_ratio(family, geometry, pair, kind)?;
    let Some(mut best_ratio) = base else {
        return Ok(pair.clone());
    };
    if budget == 0 {
        return Ok(pair.clone());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = pair.clone();
    let span = pair.q - pair.p;
    for step in 0..budget {
        // anneal from a quarter of the feasible span down to a hundredth
        let frac = step as f64 / budget as f64;
        let scale = real::<T>(0.25 * (0.01f64 / 0.25).powf(frac));
        let candidate = perturbed(&best, &mut rng, scale * span, scale * T::PI());
        let (_, _, ratio) = distances_and_ratio(family, geometry, &candidate, kind)?;
        match ratio {
            // an exact collision is an infinite ratio: cannot be beaten
            None => return Ok(candidate),
            Some(r) if r > best_ratio => {
                best_ratio = r;
                best = candidate;
            }
            _ => {}
        }
    }
    Ok(best)
}

fn perturbed<T: Real>(
    pair: &WitnessPair<T>,
    rng: &mut ChaCha8Rng,
    magnitude_step: T,
    phase_step: T,
) -> WitnessPair<T> {
    let jitter = |signal: &ComplexSignal<T>, rng: &mut ChaCha8Rng| {
        let entries = signal
            .entries()
            .iter()
            .map(|z| {
                let (r, theta) = z.to_polar();
                let u = real::<T>(rng.random_range(-1.0..1.0));
                let v = real::<T>(rng.random_range(-1.0..1.0));
                let r2 = (r + magnitude_step * u).max(pair.p).min(pair.q);
                Complex::from_polar(r2, theta + phase_step * v)
            })
            .collect();
        ComplexSignal::new(entries).expect("perturbation keeps entries finite")
    };
    WitnessPair {
        x_plus: jitter(&pair.x_plus, rng),
        x_minus: jitter(&pair.x_minus, rng),
        p: pair.p,
        q: pair.q,
        delta: pair.delta,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measurement::two_shot_family;

    #[test]
    fn atoll_unit_matches_block_layout() {
        let pair = WitnessPair::<f64>::atoll_unit(8, 2).unwrap();
        let plus: Vec<f64> = pair.x_plus().entries().iter().map(|z| z.re).collect();
        let minus: Vec<f64> = pair.x_minus().entries().iter().map(|z| z.re).collect();
        assert_eq!(plus, vec![1.0, 1.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
        assert_eq!(minus, vec![1.0, 1.0, 0.0, 0.0, -1.0, -1.0, 0.0, 0.0]);
        assert_eq!(pair.eta(), 2);
        assert!(pair.is_collision_class());
    }

    #[test]
    fn atoll_validation() {
        assert!(matches!(
            WitnessPair::<f64>::atoll(7, 1, 0.0, 1.0),
            Err(Error::OddLength { d: 7 })
        ));
        assert!(matches!(
            WitnessPair::<f64>::atoll(8, 3, 0.0, 1.0),
            Err(Error::SupportTooLarge { delta: 3, d: 8, .. })
        ));
        assert!(matches!(
            WitnessPair::<f64>::atoll(8, 2, 2.0, 1.0),
            Err(Error::InvalidMagnitudes { .. })
        ));
        assert!(matches!(
            WitnessPair::<f64>::atoll_pq(8, 2, 0.0, 1.0),
            Err(Error::InvalidMagnitudes { .. })
        ));
        assert!(WitnessPair::<f64>::atoll_pq(8, 2, 1.0, 1.0).is_ok());
    }

    #[test]
    fn closed_form_distances_match_frozen_values() {
        // d = 8, delta = 2, q = 2: q sqrt(2d - 4 delta) = 2 sqrt(8)
        let d2 = atoll_d2_closed_form::<f64>(8, 2, 2.0);
        assert!((d2 - 5.656854249492381).abs() < 1e-14);
        // d = 8, delta = 2, p = 1, q = 2: 4q sqrt(eta^2 q^2 + 2 eta delta p^2)
        // = 8 sqrt(16 + 8) = 8 sqrt(24)
        let d1 = atoll_d1_closed_form::<f64>(8, 2, 1.0, 2.0);
        assert!((d1 - 39.19183588453085).abs() < 1e-13);
    }

    #[test]
    fn measured_distances_match_closed_forms() {
        for &(d, delta) in &[(8usize, 2usize), (16, 2), (16, 4), (64, 8)] {
            for &(p, q) in &[(0.0, 1.0), (1.0, 1.0), (1.0, 2.0), (0.5, 3.0)] {
                let pair = WitnessPair::<f64>::atoll(d, delta, p, q).unwrap();
                let dist = pair.distances();
                let d2_expect = atoll_d2_closed_form(d, delta, q);
                let d1_expect = atoll_d1_closed_form(d, delta, p, q);
                assert!(
                    (dist.d2 - d2_expect).abs() <= 1e-12 * d2_expect,
                    "d2 {} vs {}",
                    dist.d2,
                    d2_expect
                );
                assert!(
                    (dist.d1 - d1_expect).abs() <= 1e-12 * d1_expect,
                    "d1 {} vs {}",
                    dist.d1,
                    d1_expect
                );
            }
        }
    }

    #[test]
    fn crossings_for_small_geometry() {
        // d = 8, delta = 2, a = 1: midpoint 4 is crossed by l = 3 (j = 1),
        // upper edge 6 by l = 5 (j = 1)
        let geometry = MeasurementGeometry::new(8, 8, 2).unwrap();
        let crossings = crossing_indices(&geometry, 2);
        assert_eq!(crossings.len(), 2);
        assert_eq!(crossings[0].shift_index, 3);
        assert_eq!(crossings[0].boundary, AtollBoundary::Midpoint);
        assert_eq!(crossings[0].small_overlap, 1);
        assert_eq!(crossings[1].shift_index, 5);
        assert_eq!(crossings[1].boundary, AtollBoundary::UpperEdge);
        assert_eq!(crossings[1].small_overlap, 1);
    }

    #[test]
    fn crossing_overlaps_cover_both_sides() {
        // d = 32, delta = 8, a = 1: midpoint 16 crossed by l in 9..=15 with
        // j = 16 - l; upper edge 24 by l in 17..=23 with j = l - 16
        let geometry = MeasurementGeometry::new(32, 32, 8).unwrap();
        let crossings = crossing_indices(&geometry, 8);
        assert_eq!(crossings.len(), 14);
        for c in &crossings {
            match c.boundary {
                AtollBoundary::Midpoint => {
                    assert!((9..=15).contains(&c.shift_index));
                    assert_eq!(c.small_overlap, 16 - c.shift_index);
                }
                AtollBoundary::UpperEdge => {
                    assert!((17..=23).contains(&c.shift_index));
                    assert_eq!(c.small_overlap, c.shift_index - 16);
                }
            }
            assert!(c.small_overlap >= 1 && c.small_overlap <= 7);
        }
    }

    #[test]
    fn wrapped_windows_never_cross() {
        // shifts near d wrap around position d; the wrapped window sees only
        // blocks whose relative sign agrees, so it must not be listed
        let geometry = MeasurementGeometry::new(16, 16, 4).unwrap();
        let crossings = crossing_indices(&geometry, 4);
        for c in &crossings {
            assert!(c.shift_index + geometry.delta() <= geometry.d());
        }
    }

    #[test]
    fn two_shot_crossing_count_is_exact_at_stride_one() {
        let geometry = MeasurementGeometry::new(32, 32, 8).unwrap();
        for sep in 1..8 {
            for boundary in [AtollBoundary::Midpoint, AtollBoundary::UpperEdge] {
                assert_eq!(two_shot_crossing_count(&geometry, 8, sep, boundary), sep);
            }
        }
    }

    #[test]
    fn two_shot_crossing_count_bounded_by_ceil_at_larger_strides() {
        for &(d, l, delta) in &[(20usize, 10usize, 3usize), (64, 32, 8), (96, 32, 12)] {
            let geometry = MeasurementGeometry::new(d, l, delta).unwrap();
            let a = geometry.stride();
            for sep in 1..delta {
                for boundary in [AtollBoundary::Midpoint, AtollBoundary::UpperEdge] {
                    let count = two_shot_crossing_count(&geometry, delta, sep, boundary);
                    assert!(count <= sep.div_ceil(a), "count {count} at sep {sep}, a {a}");
                }
            }
        }
    }

    #[test]
    fn certify_two_shot_worked_example() {
        let geometry = MeasurementGeometry::new(8, 8, 2).unwrap();
        let family = two_shot_family::<f64>(8, 2).unwrap();
        let pair = WitnessPair::atoll_pq(8, 2, 1.0, 2.0).unwrap();

        let z = certify(&family, &geometry, &pair, MapKind::Z).unwrap();
        assert!((z.signal_distance - 5.656854249492381).abs() < 1e-12);
        assert!((z.measurement_distance - 2.8284271247461903).abs() < 1e-12);
        assert!((z.ratio.unwrap() - 2.0).abs() < 1e-12);

        let y = certify(&family, &geometry, &pair, MapKind::Y).unwrap();
        assert!((y.signal_distance - 39.19183588453085).abs() < 1e-12);
        // ||dY|| = 4 p q sqrt(delta (delta - 1)) = 8 sqrt(2)
        assert!((y.measurement_distance - 11.313708498984761).abs() < 1e-12);
        // ratio = sqrt(12)
        assert!((y.ratio.unwrap() - 3.4641016151377544).abs() < 1e-12);
    }

    #[test]
    fn certify_collision_pair_has_infinite_ratio() {
        let geometry = MeasurementGeometry::new(8, 8, 2).unwrap();
        let family = two_shot_family::<f64>(8, 2).unwrap();
        let pair = WitnessPair::atoll_unit(8, 2).unwrap();
        for kind in [MapKind::Y, MapKind::Z] {
            let cert = certify(&family, &geometry, &pair, kind).unwrap();
            assert_eq!(cert.measurement_distance, 0.0);
            assert!(cert.ratio.is_none());
            assert!(cert.rhs_no_const.is_none());
            assert!(cert.collision_class);
            assert!(cert.signal_distance > 0.0);
        }
    }

    #[test]
    fn entrywise_bound_holds_for_two_shot() {
        for &(d, delta) in &[(8usize, 2usize), (32, 8), (64, 16)] {
            let geometry = MeasurementGeometry::new(d, d, delta).unwrap();
            let family = two_shot_family::<f64>(d, delta).unwrap();
            let pair = WitnessPair::atoll_pq(d, delta, 1.0, 2.0).unwrap();
            let worst = entrywise_bound_check(&family, &geometry, &pair).unwrap();
            assert!(worst <= 1e-12 * (2.0 * delta as f64), "violation {worst}");
        }
    }

    #[test]
    fn improve_witness_is_monotone_and_deterministic() {
        let geometry = MeasurementGeometry::new(8, 8, 2).unwrap();
        let family = two_shot_family::<f64>(8, 2).unwrap();
        let pair = WitnessPair::atoll_pq(8, 2, 1.0, 2.0).unwrap();
        let base = certify(&family, &geometry, &pair, MapKind::Z)
            .unwrap()
            .ratio
            .unwrap();
        let improved = improve_witness(&family, &geometry, &pair, MapKind::Z, 40, 7).unwrap();
        let better = certify(&family, &geometry, &improved, MapKind::Z)
            .unwrap()
            .ratio
            .unwrap();
        assert!(better >= base);
        let again = improve_witness(&family, &geometry, &pair, MapKind::Z, 40, 7).unwrap();
        assert_eq!(improved.x_plus().entries(), again.x_plus().entries());
        assert_eq!(improved.x_minus().entries(), again.x_minus().entries());
    }

    #[test]
    fn improve_witness_returns_collision_pairs_unchanged() {
        let geometry = MeasurementGeometry::new(8, 8, 2).unwrap();
        let family = two_shot_family::<f64>(8, 2).unwrap();
        let pair = WitnessPair::atoll_unit(8, 2).unwrap();
        let out = improve_witness(&family, &geometry, &pair, MapKind::Z, 25, 3).unwrap();
        assert_eq!(out.x_plus().entries(), pair.x_plus().entries());
        assert_eq!(out.x_minus().entries(), pair.x_minus().entries());
    }

    #[test]
    fn from_signals_validates_band_and_distinctness() {
        let pair = WitnessPair::<f64>::atoll_pq(8, 2, 1.0, 2.0).unwrap();
        let rebuilt = WitnessPair::from_signals(
            pair.x_plus().clone(),
            pair.x_minus().clone(),
            1.0,
            2.0,
            2,
        )
        .unwrap();
        assert_eq!(rebuilt.d(), 8);
        // magnitude 1 entries violate a [1.5, 2] band
        assert!(matches!(
            WitnessPair::from_signals(pair.x_plus().clone(), pair.x_minus().clone(), 1.5, 2.0, 2),
            Err(Error::MagnitudeOutOfBand { .. })
        ));
        // a pair against itself is phase-equivalent
        assert!(matches!(
            WitnessPair::from_signals(pair.x_plus().clone(), pair.x_plus().clone(), 1.0, 2.0, 2),
            Err(Error::PhaseEquivalentPair { .. })
        ));
    }
}
