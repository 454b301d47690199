//! JSON wire formats for matrices and maps.
//!
//! Matrices serialize as `{"dim": n, "entries": [[[re, im], ...], ...]}` in
//! row-major order; rectangular matrices (Kraus operators) carry explicit
//! `rows`/`cols` instead of `dim`. Maps serialize as a tagged union mirroring
//! the representation enum. Deserialization always re-validates the type
//! invariants, so a parsed value is as trustworthy as a constructed one.

use num_complex::Complex64;
use serde::de::Error as DeError;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::hermitian::{CMatrix, DensityMatrix, HermitianMatrix, PositiveDefiniteMatrix};
use crate::maps::PositiveMapRep;

#[derive(Serialize, Deserialize)]
struct MatrixDto {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    dim: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    rows: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    cols: Option<usize>,
    entries: Vec<Vec<[f64; 2]>>,
}

impl MatrixDto {
    fn from_matrix(m: &CMatrix) -> Self {
        let entries = (0..m.nrows())
            .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
            .collect();
        if m.nrows() == m.ncols() {
            Self {
                dim: Some(m.nrows()),
                rows: None,
                cols: None,
                entries,
            }
        } else {
            Self {
                dim: None,
                rows: Some(m.nrows()),
                cols: Some(m.ncols()),
                entries,
            }
        }
    }

    fn into_matrix(self) -> Result<CMatrix, String> {
        let (rows, cols) = match (self.dim, self.rows, self.cols) {
            (Some(d), None, None) => (d, d),
            (None, Some(r), Some(c)) => (r, c),
            _ => return Err("matrix needs either dim or rows+cols".to_string()),
        };
        if self.entries.len() != rows {
            return Err(format!(
                "expected {rows} rows, got {}",
                self.entries.len()
            ));
        }
        let mut m = CMatrix::zeros(rows, cols);
        for (i, row) in self.entries.iter().enumerate() {
            if row.len() != cols {
                return Err(format!("row {i} has {} entries, expected {cols}", row.len()));
            }
            for (j, &[re, im]) in row.iter().enumerate() {
                m[(i, j)] = Complex64::new(re, im);
            }
        }
        Ok(m)
    }
}

impl Serialize for HermitianMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MatrixDto::from_matrix(self.matrix()).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for HermitianMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let m = MatrixDto::deserialize(deserializer)?
            .into_matrix()
            .map_err(D::Error::custom)?;
        HermitianMatrix::new(m).map_err(|e| D::Error::custom(e.to_string()))
    }
}

impl Serialize for PositiveDefiniteMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MatrixDto::from_matrix(self.matrix()).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PositiveDefiniteMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let h = HermitianMatrix::deserialize(deserializer)?;
        PositiveDefiniteMatrix::new(h).map_err(|e| D::Error::custom(e.to_string()))
    }
}

impl Serialize for DensityMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MatrixDto::from_matrix(self.matrix()).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for DensityMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let pd = PositiveDefiniteMatrix::deserialize(deserializer)?;
        DensityMatrix::new(pd).map_err(|e| D::Error::custom(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
enum MapDto {
    KrausCp {
        kraus: Vec<MatrixDto>,
    },
    Transpose {
        dim: usize,
    },
    ConvexMixture {
        weights: Vec<f64>,
        parts: Vec<MapDto>,
    },
    Composition {
        outer: Box<MapDto>,
        inner: Box<MapDto>,
    },
    BlockEmbed {
        dim: usize,
        copies: usize,
    },
}

impl MapDto {
    fn from_map(map: &PositiveMapRep) -> Self {
        match map {
            PositiveMapRep::KrausCp { kraus } => Self::KrausCp {
                kraus: kraus.iter().map(MatrixDto::from_matrix).collect(),
            },
            PositiveMapRep::Transpose { dim } => Self::Transpose { dim: *dim },
            PositiveMapRep::ConvexMixture { weights, parts } => Self::ConvexMixture {
                weights: weights.clone(),
                parts: parts.iter().map(Self::from_map).collect(),
            },
            PositiveMapRep::Composition { outer, inner } => Self::Composition {
                outer: Box::new(Self::from_map(outer)),
                inner: Box::new(Self::from_map(inner)),
            },
            PositiveMapRep::BlockEmbed { dim, copies } => Self::BlockEmbed {
                dim: *dim,
                copies: *copies,
            },
        }
    }

    fn into_map(self) -> Result<PositiveMapRep, String> {
        let err = |e: crate::error::Error| e.to_string();
        match self {
            Self::KrausCp { kraus } => {
                let kraus = kraus
                    .into_iter()
                    .map(MatrixDto::into_matrix)
                    .collect::<Result<Vec<_>, _>>()?;
                PositiveMapRep::kraus_cp(kraus).map_err(err)
            }
            Self::Transpose { dim } => Ok(PositiveMapRep::transpose(dim)),
            Self::ConvexMixture { weights, parts } => {
                let parts = parts
                    .into_iter()
                    .map(Self::into_map)
                    .collect::<Result<Vec<_>, _>>()?;
                PositiveMapRep::convex_mixture(weights, parts).map_err(err)
            }
            Self::Composition { outer, inner } => {
                PositiveMapRep::composition(outer.into_map()?, inner.into_map()?).map_err(err)
            }
            Self::BlockEmbed { dim, copies } => {
                PositiveMapRep::block_embed_map(dim, copies).map_err(err)
            }
        }
    }
}

impl Serialize for PositiveMapRep {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        MapDto::from_map(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for PositiveMapRep {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        MapDto::deserialize(deserializer)?
            .into_map()
            .map_err(D::Error::custom)
    }
}
