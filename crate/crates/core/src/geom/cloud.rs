use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};

/// `n` points in `R^D`, stored row-major, with a declared intrinsic dimension `d`.
///
/// Indices are stable: every result in this crate refers to points by their
/// position in the cloud.
#[derive(Clone, Debug, PartialEq)]
pub struct PointCloud {
    coords: Vec<f64>,
    ambient_dim: usize,
    intrinsic_dim: usize,
}

impl PointCloud {
    pub fn new(points: Vec<Vec<f64>>, intrinsic_dim: usize) -> Result<Self> {
        let ambient_dim = points.first().map(|p| p.len()).ok_or(Error::EmptyCloud)?;
        let mut coords = Vec::with_capacity(points.len() * ambient_dim);
        for p in &points {
            if p.len() != ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: ambient_dim,
                    found: p.len(),
                });
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(coords, ambient_dim, intrinsic_dim)
    }

    pub fn from_flat(coords: Vec<f64>, ambient_dim: usize, intrinsic_dim: usize) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::InvalidCloud("ambient dimension must be positive".into()));
        }
        if coords.is_empty() {
            return Err(Error::EmptyCloud);
        }
        if coords.len() % ambient_dim != 0 {
            return Err(Error::InvalidCloud(format!(
                "{} coordinates is not a multiple of D = {ambient_dim}",
                coords.len()
            )));
        }
        if intrinsic_dim == 0 || intrinsic_dim > ambient_dim {
            return Err(Error::InvalidCloud(format!(
                "intrinsic dimension {intrinsic_dim} must lie in 1..={ambient_dim}"
            )));
        }
        if let Some(pos) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidCloud(format!(
                "non-finite coordinate in point {}",
                pos / ambient_dim
            )));
        }
        Ok(Self {
            coords,
            ambient_dim,
            intrinsic_dim,
        })
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.ambient_dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn intrinsic_dim(&self) -> usize {
        self.intrinsic_dim
    }

    #[inline]
    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.ambient_dim..(i + 1) * self.ambient_dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.ambient_dim)
    }

    pub fn to_vecs(&self) -> Vec<Vec<f64>> {
        self.points().map(<[f64]>::to_vec).collect()
    }

    pub fn as_flat(&self) -> &[f64] {
        &self.coords
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i < self.len() {
            Ok(())
        } else {
            Err(Error::IndexOutOfRange {
                index: i,
                len: self.len(),
            })
        }
    }

    /// Applies `f` to every point, keeping dimensions.
    pub fn map_points(&self, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Result<Self> {
        let mut coords = Vec::with_capacity(self.coords.len());
        for p in self.points() {
            let q = f(p);
            if q.len() != self.ambient_dim {
                return Err(Error::DimensionMismatch {
                    expected: self.ambient_dim,
                    found: q.len(),
                });
            }
            coords.extend(q);
        }
        Self::from_flat(coords, self.ambient_dim, self.intrinsic_dim)
    }

    /// Writes the cloud as CSV with header `x0,...,x{D-1}`.
    ///
    /// Coordinates use the shortest decimal form that parses back to the same `f64`.
    pub fn write_csv<W: Write>(&self, writer: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let header: Vec<String> = (0..self.ambient_dim).map(|k| format!("x{k}")).collect();
        w.write_record(&header)?;
        for p in self.points() {
            w.write_record(p.iter().map(|c| c.to_string()))?;
        }
        w.flush()
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let io_err = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let file = File::create(path).map_err(io_err)?;
        self.write_csv(std::io::BufWriter::new(file)).map_err(io_err)
    }

    /// Reads a CSV cloud; `D` is inferred from the header.
    pub fn read_csv<R: Read>(reader: R, intrinsic_dim: usize) -> std::result::Result<Self, String> {
        let mut r = csv::Reader::from_reader(reader);
        let header = r.headers().map_err(|e| e.to_string())?.clone();
        for (k, name) in header.iter().enumerate() {
            if name.trim() != format!("x{k}") {
                return Err(format!("unexpected header column {k}: {name:?}"));
            }
        }
        let dim = header.len();
        let mut coords = Vec::new();
        for (row, record) in r.records().enumerate() {
            let record = record.map_err(|e| e.to_string())?;
            if record.len() != dim {
                return Err(format!("row {row}: {} fields, expected {dim}", record.len()));
            }
            for field in record.iter() {
                let v: f64 = field
                    .trim()
                    .parse()
                    .map_err(|e| format!("row {row}: {field:?}: {e}"))?;
                coords.push(v);
            }
        }
        Self::from_flat(coords, dim, intrinsic_dim).map_err(|e| e.to_string())
    }

    pub fn load_csv(path: &Path, intrinsic_dim: usize) -> Result<Self> {
        let file = File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::read_csv(std::io::BufReader::new(file), intrinsic_dim).map_err(|message| {
            Error::Format {
                path: path.to_path_buf(),
                message,
            }
        })
    }
}
