//! JSON wire formats.
//!
//! Matrices are `{"d", "re", "im"}` with row-major nested arrays; the other
//! formats embed them. Wire values are `f64`; conversions go through
//! [`Real::lit`] and [`Real::as_f64`].

use std::collections::BTreeMap;

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::discrimination::{Channel, ChannelEnsemble, ChannelKind, OutputState};
use crate::error::{Error, Result};
use crate::freesets::{ConvexFreeSet, ConvexKind, FreeSet};
use crate::qcore::gellmann::{state_from_bloch, BlochVector};
use crate::qcore::matrix::{DensityMatrix, HermitianMatrix, Matrix};
use crate::robustness::RobustnessCertificate;
use crate::scalar::Real;
use crate::witness::ShiftedWitnessFamily;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub d: usize,
    pub re: Vec<Vec<f64>>,
    pub im: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochJson {
    pub d: usize,
    pub x: Vec<f64>,
}

/// Either accepted state encoding.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateJson {
    Matrix(MatrixJson),
    Bloch(BlochJson),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SubsetJson {
    pub label: String,
    pub kind: String,
    #[serde(default)]
    pub vertices: Option<Vec<MatrixJson>>,
    #[serde(default)]
    pub basis: Option<MatrixJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FreeSetJson {
    pub d: usize,
    pub subsets: Vec<SubsetJson>,
}

/// A finite float or the string `"inf"`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueJson {
    Finite(f64),
    Text(String),
}

impl ValueJson {
    pub fn from_f64(x: f64) -> Self {
        if x.is_finite() {
            ValueJson::Finite(x)
        } else {
            ValueJson::Text(if x > 0.0 { "inf" } else { "-inf" }.into())
        }
    }

    pub fn to_f64(&self) -> Result<f64> {
        match self {
            ValueJson::Finite(x) => Ok(*x),
            ValueJson::Text(t) if t == "inf" => Ok(f64::INFINITY),
            ValueJson::Text(t) if t == "-inf" => Ok(f64::NEG_INFINITY),
            ValueJson::Text(t) => Err(Error::Parse(format!("value: expected a number or \"inf\", got {t:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateJson {
    pub value: ValueJson,
    pub sigma: MatrixJson,
    pub tau: Option<MatrixJson>,
    #[serde(rename = "dual_X")]
    pub dual_x: MatrixJson,
    pub subset: String,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WitnessJson {
    pub s: f64,
    #[serde(rename = "C")]
    pub c: f64,
    pub deltas: BTreeMap<usize, f64>,
    pub members: BTreeMap<usize, MatrixJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChannelJson {
    pub kind: String,
    #[serde(default)]
    pub effects: Option<Vec<MatrixJson>>,
    #[serde(default)]
    pub outputs: Option<Vec<MatrixJson>>,
    #[serde(default)]
    pub output: Option<MatrixJson>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleJson {
    pub priors: Vec<f64>,
    pub channels: Vec<ChannelJson>,
}

fn parse_err(what: &str, e: impl std::fmt::Display) -> Error {
    Error::Parse(format!("{what}: {e}"))
}

fn at(path: &str, e: Error) -> Error {
    match e {
        Error::Parse(m) => Error::Parse(format!("{path}: {m}")),
        other => Error::Parse(format!("{path}: {other}")),
    }
}

pub fn matrix_to_json<T: Real>(m: &Matrix<T>) -> MatrixJson {
    let d = m.dim();
    MatrixJson {
        d,
        re: (0..d).map(|i| (0..d).map(|j| m[(i, j)].re.as_f64()).collect()).collect(),
        im: (0..d).map(|i| (0..d).map(|j| m[(i, j)].im.as_f64()).collect()).collect(),
    }
}

pub fn hermitian_to_json<T: Real>(h: &HermitianMatrix<T>) -> MatrixJson {
    matrix_to_json(h.matrix())
}

pub fn matrix_from_json<T: Real>(j: &MatrixJson) -> Result<Matrix<T>> {
    let d = j.d;
    if j.re.len() != d || j.im.len() != d {
        return Err(Error::Parse(format!("expected {d} rows in \"re\" and \"im\"")));
    }
    let mut data = Vec::with_capacity(d * d);
    for (r, (re, im)) in j.re.iter().zip(&j.im).enumerate() {
        if re.len() != d || im.len() != d {
            return Err(Error::Parse(format!("row {r}: expected {d} columns")));
        }
        data.extend(re.iter().zip(im).map(|(&a, &b)| Complex::new(T::lit(a), T::lit(b))));
    }
    Matrix::from_vec(d, data)
}

pub fn hermitian_from_json<T: Real>(j: &MatrixJson) -> Result<HermitianMatrix<T>> {
    HermitianMatrix::new(matrix_from_json(j)?)
}

pub fn density_from_json<T: Real>(j: &MatrixJson) -> Result<DensityMatrix<T>> {
    DensityMatrix::new(hermitian_from_json(j)?)
}

pub fn bloch_to_json<T: Real>(x: &BlochVector<T>) -> BlochJson {
    BlochJson {
        d: x.dim,
        x: x.coords.iter().map(|v| v.as_f64()).collect(),
    }
}

pub fn bloch_from_json<T: Real>(j: &BlochJson) -> Result<BlochVector<T>> {
    BlochVector::new(j.d, j.x.iter().map(|&v| T::lit(v)).collect())
}

/// Reads a state given either as a matrix or as a Bloch vector.
pub fn parse_state<T: Real>(text: &str) -> Result<DensityMatrix<T>> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| parse_err("state", e))?;
    let j = if v.get("x").is_some() {
        StateJson::Bloch(serde_json::from_value(v).map_err(|e| parse_err("state (Bloch vector)", e))?)
    } else {
        StateJson::Matrix(serde_json::from_value(v).map_err(|e| parse_err("state (matrix)", e))?)
    };
    match j {
        StateJson::Matrix(m) => density_from_json(&m).map_err(|e| at("state", e)),
        StateJson::Bloch(b) => {
            let x = bloch_from_json::<T>(&b).map_err(|e| at("state", e))?;
            DensityMatrix::new(state_from_bloch(&x)).map_err(|e| at("state.x", e))
        }
    }
}

pub fn freeset_to_json<T: Real>(f: &FreeSet<T>) -> FreeSetJson {
    FreeSetJson {
        d: f.dim(),
        subsets: f
            .subsets()
            .iter()
            .map(|k| match k.kind() {
                ConvexKind::Polytope { vertices } => SubsetJson {
                    label: k.label().to_string(),
                    kind: "polytope".into(),
                    vertices: Some(vertices.iter().map(|v| hermitian_to_json(v.as_hermitian())).collect()),
                    basis: None,
                },
                ConvexKind::IncoherentInBasis { basis } => SubsetJson {
                    label: k.label().to_string(),
                    kind: "incoherent".into(),
                    vertices: None,
                    basis: Some(matrix_to_json(basis)),
                },
            })
            .collect(),
    }
}

pub fn freeset_from_json<T: Real>(j: &FreeSetJson) -> Result<FreeSet<T>> {
    let mut subsets = Vec::with_capacity(j.subsets.len());
    for (i, s) in j.subsets.iter().enumerate() {
        let path = format!("subsets[{i}]");
        let k = match s.kind.as_str() {
            "polytope" => {
                let vs = s
                    .vertices
                    .as_ref()
                    .ok_or_else(|| Error::Parse(format!("{path}: polytope needs \"vertices\"")))?;
                let vertices = vs
                    .iter()
                    .enumerate()
                    .map(|(v, m)| density_from_json(m).map_err(|e| at(&format!("{path}.vertices[{v}]"), e)))
                    .collect::<Result<Vec<_>>>()?;
                ConvexFreeSet::polytope(s.label.clone(), vertices).map_err(|e| at(&path, e))?
            }
            "incoherent" => {
                let b = s
                    .basis
                    .as_ref()
                    .ok_or_else(|| Error::Parse(format!("{path}: incoherent needs \"basis\"")))?;
                let basis = matrix_from_json(b).map_err(|e| at(&format!("{path}.basis"), e))?;
                ConvexFreeSet::incoherent(s.label.clone(), basis).map_err(|e| at(&path, e))?
            }
            other => return Err(Error::Parse(format!("{path}.kind: unknown kind {other:?}"))),
        };
        if k.dim() != j.d {
            return Err(Error::Parse(format!("{path}: dimension {} differs from d = {}", k.dim(), j.d)));
        }
        subsets.push(k);
    }
    FreeSet::new(subsets).map_err(|e| at("subsets", e))
}

pub fn parse_freeset<T: Real>(text: &str) -> Result<FreeSet<T>> {
    let j: FreeSetJson = serde_json::from_str(text).map_err(|e| parse_err("free set", e))?;
    freeset_from_json(&j)
}

pub fn certificate_to_json<T: Real>(c: &RobustnessCertificate<T>) -> CertificateJson {
    CertificateJson {
        value: ValueJson::from_f64(c.value.as_f64()),
        sigma: hermitian_to_json(c.sigma.as_hermitian()),
        tau: c.tau.as_ref().map(|t| hermitian_to_json(t.as_hermitian())),
        dual_x: hermitian_to_json(&c.dual_x),
        subset: c.subset_label.clone(),
        gap: c.gap.as_f64(),
    }
}

pub fn certificate_from_json<T: Real>(j: &CertificateJson) -> Result<RobustnessCertificate<T>> {
    Ok(RobustnessCertificate {
        value: T::lit(j.value.to_f64()?),
        sigma: density_from_json(&j.sigma).map_err(|e| at("sigma", e))?,
        tau: j.tau.as_ref().map(density_from_json).transpose().map_err(|e| at("tau", e))?,
        dual_x: hermitian_from_json(&j.dual_x).map_err(|e| at("dual_X", e))?,
        subset_label: j.subset.clone(),
        gap: T::lit(j.gap),
    })
}

pub fn witness_to_json<T: Real>(w: &ShiftedWitnessFamily<T>) -> WitnessJson {
    WitnessJson {
        s: w.base.s.as_f64(),
        c: w.c.as_f64(),
        deltas: w.deltas.iter().map(|(&m, v)| (m, v.as_f64())).collect(),
        members: w.members.iter().map(|(&m, h)| (m, hermitian_to_json(h))).collect(),
    }
}

/// Operators of a serialized family, keyed by copy number.
pub fn witness_members_from_json<T: Real>(j: &WitnessJson) -> Result<BTreeMap<usize, HermitianMatrix<T>>> {
    j.members
        .iter()
        .map(|(&m, h)| hermitian_from_json(h).map(|h| (m, h)).map_err(|e| at(&format!("members.{m}"), e)))
        .collect()
}

fn output_to_json<T: Real>(o: &OutputState<T>) -> Result<MatrixJson> {
    Ok(hermitian_to_json(&o.as_output().to_dense()?))
}

/// Flag outputs are written as diagonal matrices, so this fails for flag
/// spaces beyond the dense limit.
pub fn ensemble_to_json<T: Real>(e: &ChannelEnsemble<T>) -> Result<EnsembleJson> {
    let channels = e
        .channels()
        .iter()
        .map(|c| {
            Ok(match c.kind() {
                ChannelKind::MeasurePrepare { effects, outputs } => ChannelJson {
                    kind: "mp".into(),
                    effects: Some(effects.iter().map(hermitian_to_json).collect()),
                    outputs: Some(outputs.iter().map(output_to_json).collect::<Result<_>>()?),
                    output: None,
                },
                ChannelKind::Constant { output } => ChannelJson {
                    kind: "const".into(),
                    effects: None,
                    outputs: None,
                    output: Some(output_to_json(output)?),
                },
            })
        })
        .collect::<Result<_>>()?;
    Ok(EnsembleJson {
        priors: e.priors().iter().map(|p| p.as_f64()).collect(),
        channels,
    })
}

/// Constant channels need the input dimension, which the format does not
/// carry; it is taken from the first measure-and-prepare channel or `in_dim`.
pub fn ensemble_from_json<T: Real>(j: &EnsembleJson, in_dim: Option<usize>) -> Result<ChannelEnsemble<T>> {
    let dense = |m: &MatrixJson, path: String| density_from_json::<T>(m).map(OutputState::Dense).map_err(|e| at(&path, e));
    let din = j
        .channels
        .iter()
        .find_map(|c| c.effects.as_ref().and_then(|e| e.first()).map(|m| m.d))
        .or(in_dim)
        .ok_or_else(|| Error::Parse("channels: input dimension unknown".into()))?;
    let mut channels = Vec::with_capacity(j.channels.len());
    for (i, c) in j.channels.iter().enumerate() {
        let path = format!("channels[{i}]");
        let ch = match c.kind.as_str() {
            "mp" => {
                let effects = c
                    .effects
                    .as_ref()
                    .ok_or_else(|| Error::Parse(format!("{path}: \"mp\" needs \"effects\"")))?
                    .iter()
                    .enumerate()
                    .map(|(k, m)| hermitian_from_json::<T>(m).map_err(|e| at(&format!("{path}.effects[{k}]"), e)))
                    .collect::<Result<Vec<_>>>()?;
                let outputs = c
                    .outputs
                    .as_ref()
                    .ok_or_else(|| Error::Parse(format!("{path}: \"mp\" needs \"outputs\"")))?
                    .iter()
                    .enumerate()
                    .map(|(k, m)| dense(m, format!("{path}.outputs[{k}]")))
                    .collect::<Result<Vec<_>>>()?;
                Channel::measure_prepare(effects, outputs).map_err(|e| at(&path, e))?
            }
            "const" => {
                let o = c
                    .output
                    .as_ref()
                    .ok_or_else(|| Error::Parse(format!("{path}: \"const\" needs \"output\"")))?;
                Channel::constant(din, dense(o, format!("{path}.output"))?).map_err(|e| at(&path, e))?
            }
            other => return Err(Error::Parse(format!("{path}.kind: unknown kind {other:?}"))),
        };
        channels.push(ch);
    }
    ChannelEnsemble::new(j.priors.iter().map(|&p| T::lit(p)).collect(), channels).map_err(|e| at("ensemble", e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qcore::random::{random_state, seeded_rng};

    #[test]
    fn matrix_round_trip() {
        let rho = random_state::<f64, _>(&mut seeded_rng(1), 3);
        let text = serde_json::to_string(&hermitian_to_json(rho.as_hermitian())).unwrap();
        let back: DensityMatrix<f64> = parse_state(&text).unwrap();
        assert!(back.as_hermitian().max_abs_diff(rho.as_hermitian()) < 1e-15);
    }

    #[test]
    fn bloch_state_is_accepted() {
        let rho: DensityMatrix<f64> = parse_state(r#"{"d": 2, "x": [0.0, 0.0, 1.0]}"#).unwrap();
        assert!((rho.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!(parse_state::<f64>(r#"{"d": 2, "x": [0.0, 0.0, 2.0]}"#).is_err());
    }

    #[test]
    fn freeset_round_trip() {
        let f = FreeSet::new(vec![
            ConvexFreeSet::<f64>::incoherent_computational("z", 2).unwrap(),
            ConvexFreeSet::qubit_axis("x", 0).unwrap(),
        ])
        .unwrap();
        let text = serde_json::to_string(&freeset_to_json(&f)).unwrap();
        let back: FreeSet<f64> = parse_freeset(&text).unwrap();
        assert_eq!(back.subsets().len(), 2);
        assert_eq!(back.subsets()[1].label(), "x");
    }

    #[test]
    fn infinite_value_is_a_string() {
        let v = serde_json::to_string(&ValueJson::from_f64(f64::INFINITY)).unwrap();
        assert_eq!(v, "\"inf\"");
        let back: ValueJson = serde_json::from_str(&v).unwrap();
        assert_eq!(back.to_f64().unwrap(), f64::INFINITY);
    }

    #[test]
    fn malformed_input_names_the_field() {
        let err = parse_freeset::<f64>(r#"{"d": 2, "subsets": [{"label": "a", "kind": "cone"}]}"#).unwrap_err();
        assert!(err.to_string().contains("subsets[0].kind"), "{err}");
        let err = parse_state::<f64>("{\"d\": 2,\n \"re\": [[1.0]]").unwrap_err();
        assert!(err.to_string().contains("line 2"), "{err}");
        let err = parse_state::<f64>(r#"{"d": 2, "re": [[1.0, 0.0], [0.0, 0.0]]}"#).unwrap_err();
        assert!(err.to_string().contains("im"), "{err}");
    }
}
