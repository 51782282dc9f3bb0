//! Field import/export: one CSV row per node plus a JSON sidecar header.
//!
//! Radial fields are written as `r,value`, planar fields as `x,y,value` in
//! row-major node order. The sidecar sits next to the CSV with the extension
//! replaced by `.json`.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::grid::{Grid2D, ScalarField2D, Shape};
use super::radial::{RadialField, RadialMesh};
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeshMeta {
    Radial { inner: f64, outer: f64, nodes: usize },
    Grid { shape: Shape, resolution: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub schema_version: u32,
    pub name: String,
    pub mesh: MeshMeta,
}

#[derive(Clone, Debug, PartialEq)]
pub enum AnyField {
    Radial(RadialField),
    Grid(ScalarField2D),
}

impl AnyField {
    pub fn meta(&self, name: &str) -> FieldMeta {
        let mesh = match self {
            AnyField::Radial(f) => MeshMeta::Radial {
                inner: f.mesh().inner_radius(),
                outer: f.mesh().outer_radius(),
                nodes: f.mesh().len(),
            },
            AnyField::Grid(f) => MeshMeta::Grid {
                shape: f.grid().shape(),
                resolution: f.grid().resolution(),
            },
        };
        FieldMeta {
            schema_version: SCHEMA_VERSION,
            name: name.to_string(),
            mesh,
        }
    }

    pub fn as_radial(&self) -> Option<&RadialField> {
        match self {
            AnyField::Radial(f) => Some(f),
            AnyField::Grid(_) => None,
        }
    }

    pub fn as_grid(&self) -> Option<&ScalarField2D> {
        match self {
            AnyField::Grid(f) => Some(f),
            AnyField::Radial(_) => None,
        }
    }
}

pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn write_radial_csv(field: &RadialField, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["r", "value"])?;
    for (r, v) in field.nodes().iter().zip(field.values()) {
        w.serialize((r, v))?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_grid_csv(field: &ScalarField2D, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x", "y", "value"])?;
    let g = field.grid();
    for (k, v) in field.values().iter().enumerate() {
        let (x, y) = g.position(k);
        w.serialize((x, y, v))?;
    }
    w.flush()?;
    Ok(())
}

/// Write the CSV and its JSON sidecar.
pub fn save_field(field: &AnyField, name: &str, path: &Path) -> Result<()> {
    match field {
        AnyField::Radial(f) => write_radial_csv(f, path)?,
        AnyField::Grid(f) => write_grid_csv(f, path)?,
    }
    std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&field.meta(name))?)?;
    Ok(())
}

fn read_rows(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut rdr = csv::Reader::from_path(path)?;
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let mut rows = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let row = rec
            .iter()
            .enumerate()
            .map(|(col, s)| {
                s.trim().parse::<f64>().map_err(|e| {
                    Error::Parse(format!(
                        "{}: line {}, column {}: {e}",
                        path.display(),
                        line + 2,
                        headers.get(col).map(String::as_str).unwrap_or("?")
                    ))
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if row.len() != headers.len() {
            return Err(Error::Parse(format!(
                "{}: line {} has {} columns, expected {}",
                path.display(),
                line + 2,
                row.len(),
                headers.len()
            )));
        }
        rows.push(row);
    }
    Ok((headers, rows))
}

pub fn read_meta(csv: &Path) -> Result<Option<FieldMeta>> {
    let p = sidecar_path(csv);
    if !p.exists() {
        return Ok(None);
    }
    let meta: FieldMeta = serde_json::from_str(&std::fs::read_to_string(p)?)?;
    if meta.schema_version != SCHEMA_VERSION {
        return Err(Error::Parse(format!(
            "unsupported schema version {} (expected {SCHEMA_VERSION})",
            meta.schema_version
        )));
    }
    Ok(Some(meta))
}

/// Read a field written by [`save_field`]. Without a sidecar, `r,value` files
/// become radial fields and `x,y,value` files become disc grids whose radius
/// is the largest coordinate.
pub fn load_field(path: &Path) -> Result<AnyField> {
    let meta = read_meta(path)?;
    let (headers, rows) = read_rows(path)?;
    let cols: Vec<&str> = headers.iter().map(String::as_str).collect();
    match cols.as_slice() {
        ["r", "value"] => {
            let nodes: Vec<f64> = rows.iter().map(|r| r[0]).collect();
            let values = rows.iter().map(|r| r[1]).collect();
            let mesh = Arc::new(RadialMesh::new(nodes)?);
            Ok(AnyField::Radial(RadialField::new(mesh, values)?))
        }
        ["x", "y", "value"] => {
            let n = (rows.len() as f64).sqrt().round() as usize;
            if n * n != rows.len() {
                return Err(Error::Parse(format!(
                    "{} rows do not form a square grid",
                    rows.len()
                )));
            }
            let shape = match meta.map(|m| m.mesh) {
                Some(MeshMeta::Grid { shape, resolution }) => {
                    if resolution != n {
                        return Err(Error::Parse(format!(
                            "header resolution {resolution} but file has {n}² rows"
                        )));
                    }
                    shape
                }
                _ => Shape::Disc {
                    radius: rows.iter().map(|r| r[0].abs()).fold(0.0, f64::max),
                },
            };
            let grid = Arc::new(Grid2D::new(shape, n)?);
            for (k, row) in rows.iter().enumerate() {
                let (x, y) = grid.position(k);
                let tol = 1e-9 * shape.outer();
                if (x - row[0]).abs() > tol || (y - row[1]).abs() > tol {
                    return Err(Error::Parse(format!(
                        "line {}: node ({}, {}) does not match grid position ({x}, {y})",
                        k + 2,
                        row[0],
                        row[1]
                    )));
                }
            }
            let values = rows.iter().map(|r| r[2]).collect();
            Ok(AnyField::Grid(ScalarField2D::new(grid, values)?))
        }
        other => Err(Error::Parse(format!(
            "unrecognised CSV header {other:?}; expected r,value or x,y,value"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radial_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        let m = Arc::new(RadialMesh::uniform(0.0, 2.0, 40).unwrap());
        let f = RadialField::from_fn(m, |r| r.sin()).unwrap();
        save_field(&AnyField::Radial(f.clone()), "psi", &p).unwrap();
        let back = load_field(&p).unwrap();
        assert_eq!(back.as_radial().unwrap().values(), f.values());
        assert_eq!(read_meta(&p).unwrap().unwrap().name, "psi");
    }

    #[test]
    fn grid_round_trip_keeps_annulus() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("g.csv");
        let g = Arc::new(Grid2D::annulus(0.5, 1.0, 21).unwrap());
        let f = ScalarField2D::from_fn(g, |x, y| x - 2.0 * y).unwrap();
        save_field(&AnyField::Grid(f.clone()), "u", &p).unwrap();
        let back = load_field(&p).unwrap();
        assert_eq!(back, AnyField::Grid(f));
    }

    #[test]
    fn malformed_rows_report_location() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("bad.csv");
        std::fs::write(&p, "r,value\n0,1\n0.5,abc\n").unwrap();
        let err = load_field(&p).unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
        std::fs::write(&p, "a,b\n0,1\n").unwrap();
        assert!(load_field(&p).is_err());
    }
}
