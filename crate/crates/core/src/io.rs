//! File formats: XYZ/CSV/PLY point clouds in, legacy-VTK fields, OBJ
//! meshes/polylines and CSV energy traces out.
//!
//! Scalars are printed with Rust's shortest round-trip formatting, so a
//! write/read cycle reproduces fields bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::cloud::PointCloud;
use crate::error::{Error, Result};
use crate::extract::{LineSet, TriangleMesh, ZeroSet};
use crate::grid::{Grid, ScalarField};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CloudFormat {
    Xyz,
    Csv,
    PlyAscii,
}

impl CloudFormat {
    pub fn from_extension(path: &Path) -> Option<CloudFormat> {
        match path
            .extension()
            .and_then(|e| e.to_str())
            .map(|e| e.to_ascii_lowercase())
            .as_deref()
        {
            Some("xyz") | Some("txt") => Some(CloudFormat::Xyz),
            Some("csv") => Some(CloudFormat::Csv),
            Some("ply") => Some(CloudFormat::PlyAscii),
            _ => None,
        }
    }
}

impl std::str::FromStr for CloudFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "xyz" => Ok(CloudFormat::Xyz),
            "csv" => Ok(CloudFormat::Csv),
            "ply" | "ply_ascii" => Ok(CloudFormat::PlyAscii),
            other => Err(Error::invalid(format!("unknown cloud format {other:?}"))),
        }
    }
}

fn parse_row(path: &Path, line_no: usize, fields: &[&str]) -> Result<Vec<f64>> {
    fields
        .iter()
        .map(|f| {
            f.parse::<f64>().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message: format!("not a number: {f:?}"),
            })
        })
        .collect()
}

fn rows_to_cloud(path: &Path, rows: Vec<(usize, Vec<f64>)>) -> Result<PointCloud> {
    let dim = match rows.first() {
        Some((_, r)) => r.len(),
        None => {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 0,
                message: "no points in file".into(),
            })
        }
    };
    if dim < 2 || dim > 3 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: rows[0].0,
            message: format!("points must have 2 or 3 coordinates, got {dim}"),
        });
    }
    let mut coords = Vec::with_capacity(rows.len() * dim);
    for (line_no, row) in rows {
        if row.len() != dim {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: line_no,
                message: format!("expected {dim} coordinates, got {}", row.len()),
            });
        }
        coords.extend(row);
    }
    PointCloud::new(dim, coords)
}

/// Reads a point cloud. XYZ is whitespace-separated coordinates, CSV is
/// comma-separated with an optional non-numeric header row, PLY reads the
/// vertex element of an ASCII file.
pub fn read_point_cloud(path: &Path, format: CloudFormat) -> Result<PointCloud> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    match format {
        CloudFormat::Xyz => read_separated(path, reader, None),
        CloudFormat::Csv => read_separated(path, reader, Some(',')),
        CloudFormat::PlyAscii => read_ply_ascii(path, reader),
    }
}

fn read_separated(
    path: &Path,
    reader: impl BufRead,
    separator: Option<char>,
) -> Result<PointCloud> {
    let mut rows = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = match separator {
            Some(sep) => trimmed.split(sep).map(str::trim).collect(),
            None => trimmed.split_whitespace().collect(),
        };
        match parse_row(path, line_no, &fields) {
            Ok(row) => rows.push((line_no, row)),
            Err(e) => {
                // A non-numeric first row in CSV is a header; skip it.
                if rows.is_empty() && separator == Some(',') && line_no == 1 {
                    continue;
                }
                return Err(e);
            }
        }
    }
    rows_to_cloud(path, rows)
}

fn read_ply_ascii(path: &Path, reader: impl BufRead) -> Result<PointCloud> {
    let mut lines = reader.lines().enumerate();
    let mut vertex_count: Option<usize> = None;
    let mut coord_columns: Vec<usize> = Vec::new();
    let mut property_index = 0usize;
    let mut in_vertex_element = false;

    // Header.
    loop {
        let (idx, line) = match lines.next() {
            Some((i, l)) => (i + 1, l.map_err(|e| Error::io(path, e))?),
            None => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: 0,
                    message: "unexpected end of PLY header".into(),
                })
            }
        };
        let words: Vec<&str> = line.split_whitespace().collect();
        match words.as_slice() {
            ["ply"] | ["comment", ..] | ["format", "ascii", ..] => {}
            ["format", other, ..] => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: idx,
                    message: format!("only ascii PLY is supported, got {other:?}"),
                })
            }
            ["element", "vertex", n] => {
                vertex_count = Some(n.parse().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line: idx,
                    message: format!("bad vertex count {n:?}"),
                })?);
                in_vertex_element = true;
                property_index = 0;
            }
            ["element", ..] => in_vertex_element = false,
            ["property", _ty, name] if in_vertex_element => {
                if matches!(*name, "x" | "y" | "z") {
                    coord_columns.push(property_index);
                }
                property_index += 1;
            }
            ["end_header"] => break,
            _ => {}
        }
    }

    let count = vertex_count.ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: "PLY header has no vertex element".into(),
    })?;
    if coord_columns.len() < 2 {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: "PLY vertex element has no x/y coordinates".into(),
        });
    }

    let mut rows = Vec::with_capacity(count);
    while rows.len() < count {
        let (idx, line) = match lines.next() {
            Some((i, l)) => (i + 1, l.map_err(|e| Error::io(path, e))?),
            None => {
                return Err(Error::Parse {
                    path: path.to_path_buf(),
                    line: 0,
                    message: format!("expected {count} vertices, found {}", rows.len()),
                })
            }
        };
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let all = parse_row(path, idx, &fields)?;
        let row: Vec<f64> = coord_columns
            .iter()
            .map(|&c| {
                all.get(c).copied().ok_or_else(|| Error::Parse {
                    path: path.to_path_buf(),
                    line: idx,
                    message: "vertex row shorter than header promised".into(),
                })
            })
            .collect::<Result<_>>()?;
        rows.push((idx, row));
    }
    rows_to_cloud(path, rows)
}

/// Writes a cloud as whitespace-separated XYZ text.
pub fn write_point_cloud(cloud: &PointCloud, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for p in cloud.iter() {
        let row: Vec<String> = p.iter().map(|c| format!("{c}")).collect();
        writeln!(w, "{}", row.join(" ")).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

/// Writes a scalar field as a legacy-VTK structured-points ASCII file
/// (unit spacing, origin 0, one `double` attribute). 2-D fields are
/// written as a single z slice.
pub fn write_field(field: &ScalarField, name: &str, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let dims = field.grid().dims();
    let (nx, ny, nz) = (
        dims[0],
        dims[1],
        if dims.len() == 3 { dims[2] } else { 1 },
    );
    let io = |e| Error::io(path, e);

    writeln!(w, "# vtk DataFile Version 3.0").map_err(io)?;
    writeln!(w, "{name}").map_err(io)?;
    writeln!(w, "ASCII").map_err(io)?;
    writeln!(w, "DATASET STRUCTURED_POINTS").map_err(io)?;
    writeln!(w, "DIMENSIONS {nx} {ny} {nz}").map_err(io)?;
    writeln!(w, "ORIGIN 0 0 0").map_err(io)?;
    writeln!(w, "SPACING 1 1 1").map_err(io)?;
    writeln!(w, "POINT_DATA {}", nx * ny * nz).map_err(io)?;
    writeln!(w, "SCALARS {name} double 1").map_err(io)?;
    writeln!(w, "LOOKUP_TABLE default").map_err(io)?;

    // VTK streams x fastest; our axis 0 is x.
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let v = if dims.len() == 3 {
                    field.at(&[i, j, k])
                } else {
                    field.at(&[i, j])
                };
                writeln!(w, "{v}").map_err(io)?;
            }
        }
    }
    Ok(())
}

/// Reads back a field written by [`write_field`].
pub fn read_field(path: &Path) -> Result<ScalarField> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut dims: Option<Vec<usize>> = None;
    let mut values: Vec<f64> = Vec::new();
    let mut in_data = false;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        let words: Vec<&str> = line.split_whitespace().collect();
        if words.is_empty() {
            continue;
        }
        if in_data {
            for wd in words {
                values.push(wd.parse().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line: line_no,
                    message: format!("bad scalar {wd:?}"),
                })?);
            }
            continue;
        }
        match words.as_slice() {
            ["DIMENSIONS", nx, ny, nz] => {
                let parse = |s: &str| {
                    s.parse::<usize>().map_err(|_| Error::Parse {
                        path: path.to_path_buf(),
                        line: line_no,
                        message: format!("bad dimension {s:?}"),
                    })
                };
                dims = Some(vec![parse(nx)?, parse(ny)?, parse(nz)?]);
            }
            ["LOOKUP_TABLE", ..] => in_data = true,
            _ => {}
        }
    }

    let dims = dims.ok_or_else(|| Error::Parse {
        path: path.to_path_buf(),
        line: 0,
        message: "missing DIMENSIONS".into(),
    })?;
    let grid_dims: Vec<usize> = if dims[2] == 1 {
        vec![dims[0], dims[1]]
    } else {
        dims.clone()
    };
    let grid = Grid::new(&grid_dims)?;
    if values.len() != dims.iter().product::<usize>() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            message: format!(
                "expected {} scalars, found {}",
                dims.iter().product::<usize>(),
                values.len()
            ),
        });
    }

    // Undo the x-fastest streaming order.
    let mut field = ScalarField::zeros(&grid);
    let (nx, ny, nz) = (dims[0], dims[1], dims[2]);
    let mut cursor = 0;
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                let v = values[cursor];
                cursor += 1;
                if grid_dims.len() == 3 {
                    field.set(&[i, j, k], v);
                } else {
                    field.set(&[i, j], v);
                }
            }
        }
    }
    Ok(field)
}

fn write_obj_lines(curve: &LineSet, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for v in &curve.vertices {
        writeln!(w, "v {} {} 0", v[0], v[1]).map_err(|e| Error::io(path, e))?;
    }
    for s in &curve.segments {
        writeln!(w, "l {} {}", s[0] + 1, s[1] + 1).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

fn write_obj_mesh(mesh: &TriangleMesh, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    for v in &mesh.vertices {
        writeln!(w, "v {} {} {}", v[0], v[1], v[2]).map_err(|e| Error::io(path, e))?;
    }
    for t in &mesh.triangles {
        writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}

/// Writes a zero set as OBJ: `v`/`l` polylines in 2-D, `v`/`f` triangles
/// in 3-D.
pub fn write_zero_set_obj(zero_set: &ZeroSet, path: &Path) -> Result<()> {
    match zero_set {
        ZeroSet::Curve(c) => write_obj_lines(c, path),
        ZeroSet::Surface(s) => write_obj_mesh(s, path),
    }
}

/// Writes the per-iteration energy trace as CSV.
pub fn write_energy_csv(history: &[f64], path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    writeln!(w, "iteration,energy").map_err(|e| Error::io(path, e))?;
    for (i, e) in history.iter().enumerate() {
        writeln!(w, "{},{}", i + 1, e).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}
