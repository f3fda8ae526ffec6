//! JSON container for mask families and witness pairs.
//!
//! One format covers both: `d`, `delta`, a `tag`, a `params` object, and a
//! list of complex vectors under `masks` (entries as [re, im] pairs, exact
//! zeros outside the support). Structured families carry their generating
//! data so files round-trip the construction, not just the masks: windowed
//! Fourier stores b in params, stft stores the window and frequencies, and
//! masked-fourier stores the bandlimited vectors. Witness pairs use the tag
//! "witness" with the two signals in the masks slot and p, q in params.

use std::fs;
use std::path::Path;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::adapters::{MaskedFourierSpec, StftSpec};
use crate::error::{Error, Result};
use crate::measurement::{FamilyGenerator, FamilyTag, MaskFamily};
use crate::signal::ComplexSignal;
use crate::witness::WitnessPair;

#[derive(Debug, Serialize, Deserialize)]
struct Container {
    d: usize,
    delta: usize,
    tag: String,
    params: Params,
    masks: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    window: Option<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frequencies: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vectors: Option<Vec<Vec<[f64; 2]>>>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
struct Params {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    q: Option<f64>,
}

fn pack(signal: &ComplexSignal<f64>) -> Vec<[f64; 2]> {
    signal.entries().iter().map(|z| [z.re, z.im]).collect()
}

fn unpack(raw: &[[f64; 2]]) -> Result<ComplexSignal<f64>> {
    ComplexSignal::new(raw.iter().map(|&[re, im]| Complex::new(re, im)).collect())
}

fn write_container(container: &Container, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(container)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn read_container(path: &Path) -> Result<Container> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Writes a family to `path`, including generator data for structured tags.
pub fn save_family(family: &MaskFamily<f64>, path: &Path) -> Result<()> {
    let mut container = Container {
        d: family.d(),
        delta: family.delta(),
        tag: family.tag().as_str().to_owned(),
        params: Params {
            b: family.decay(),
            ..Params::default()
        },
        masks: family.masks().iter().map(pack).collect(),
        window: None,
        frequencies: None,
        vectors: None,
    };
    match family.generator() {
        Some(FamilyGenerator::Stft { window, frequencies }) => {
            container.window = Some(pack(window));
            container.frequencies = Some(frequencies.clone());
        }
        Some(FamilyGenerator::MaskedFourier { vectors }) => {
            container.vectors = Some(vectors.iter().map(pack).collect());
        }
        None => {}
    }
    write_container(&container, path)
}

/// Reads a family from `path`, revalidating the support contract and, for
/// structured tags, the generator data.
pub fn load_family(path: &Path) -> Result<MaskFamily<f64>> {
    let container = read_container(path)?;
    let tag: FamilyTag = container
        .tag
        .parse()
        .map_err(|e: String| Error::MaskFile(format!("{}: {e}", path.display())))?;
    let masks = container
        .masks
        .iter()
        .map(|raw| unpack(raw))
        .collect::<Result<Vec<_>>>()?;
    let family = MaskFamily::new(container.d, container.delta, tag, masks)?;
    let family = match container.params.b {
        Some(b) => {
            if !(b > 0.0) {
                return Err(Error::NonPositiveDecay { b });
            }
            family.with_decay(b)
        }
        None => {
            if tag == FamilyTag::WindowedFourier {
                return Err(Error::MaskFile(format!(
                    "{}: windowed-fourier family lacks params.b",
                    path.display()
                )));
            }
            family
        }
    };
    let family = match (tag, &container.window, &container.frequencies, &container.vectors) {
        (FamilyTag::Stft, Some(window), Some(frequencies), _) => {
            let spec = StftSpec::new(unpack(window)?, container.delta, frequencies.clone())?;
            if spec.frequencies().len() != family.mask_count() {
                return Err(Error::MaskFile(format!(
                    "{}: {} frequencies for {} masks",
                    path.display(),
                    spec.frequencies().len(),
                    family.mask_count()
                )));
            }
            family.with_generator(FamilyGenerator::Stft {
                window: spec.window().clone(),
                frequencies: spec.frequencies().to_vec(),
            })
        }
        (FamilyTag::MaskedFourier, _, _, Some(vectors)) => {
            let unpacked = vectors
                .iter()
                .map(|raw| unpack(raw))
                .collect::<Result<Vec<_>>>()?;
            let spec = MaskedFourierSpec::new(unpacked, container.delta)?;
            if spec.vectors().len() != family.mask_count() {
                return Err(Error::MaskFile(format!(
                    "{}: {} vectors for {} masks",
                    path.display(),
                    spec.vectors().len(),
                    family.mask_count()
                )));
            }
            family.with_generator(FamilyGenerator::MaskedFourier {
                vectors: spec.vectors().to_vec(),
            })
        }
        _ => family,
    };
    Ok(family)
}

/// Writes a witness pair to `path` under the tag "witness": the two signals
/// occupy the masks slot and p, q sit in params.
pub fn save_witness(pair: &WitnessPair<f64>, path: &Path) -> Result<()> {
    let container = Container {
        d: pair.d(),
        delta: pair.delta(),
        tag: "witness".to_owned(),
        params: Params {
            p: Some(pair.p()),
            q: Some(pair.q()),
            ..Params::default()
        },
        masks: vec![pack(pair.x_plus()), pack(pair.x_minus())],
        window: None,
        frequencies: None,
        vectors: None,
    };
    write_container(&container, path)
}

/// Reads a witness pair from `path`, revalidating the pair contract.
pub fn load_witness(path: &Path) -> Result<WitnessPair<f64>> {
    let container = read_container(path)?;
    if container.tag != "witness" {
        return Err(Error::MaskFile(format!(
            "{}: expected tag \"witness\", found {:?}",
            path.display(),
            container.tag
        )));
    }
    if container.masks.len() != 2 {
        return Err(Error::MaskFile(format!(
            "{}: witness file must hold exactly 2 signals, found {}",
            path.display(),
            container.masks.len()
        )));
    }
    let (Some(p), Some(q)) = (container.params.p, container.params.q) else {
        return Err(Error::MaskFile(format!(
            "{}: witness file lacks params.p or params.q",
            path.display()
        )));
    };
    WitnessPair::from_signals(
        unpack(&container.masks[0])?,
        unpack(&container.masks[1])?,
        p,
        q,
        container.delta,
    )
}
