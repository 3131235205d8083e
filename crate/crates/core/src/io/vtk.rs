//! Legacy ASCII VTK unstructured grids.

use std::collections::BTreeMap;
use std::fmt::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::mesh::Mesh2D;

/// Nodal data attached to the mesh vertices.
#[derive(Clone, Debug)]
pub enum VtkField {
    Scalar(String, Vec<f64>),
    /// Written as 3-vectors with zero `z`.
    Vector(String, Vec<[f64; 2]>),
}

impl VtkField {
    fn name(&self) -> &str {
        match self {
            VtkField::Scalar(n, _) | VtkField::Vector(n, _) => n,
        }
    }

    fn len(&self) -> usize {
        match self {
            VtkField::Scalar(_, v) => v.len(),
            VtkField::Vector(_, v) => v.len(),
        }
    }
}

/// Writes the mesh (triangles as cell type 5) with point data.
pub fn write_vtk(mesh: &Mesh2D, fields: &[VtkField], path: impl AsRef<Path>) -> Result<()> {
    let nv = mesh.num_vertices();
    let nt = mesh.num_triangles();
    for f in fields {
        if f.len() != nv {
            return Err(Error::Argument(format!(
                "field '{}' has {} values for {nv} vertices",
                f.name(),
                f.len()
            )));
        }
        if f.name().is_empty() || f.name().contains(char::is_whitespace) {
            return Err(Error::Argument(format!("invalid field name '{}'", f.name())));
        }
    }
    let mut s = String::with_capacity(64 * (nv + nt));
    s.push_str("# vtk DataFile Version 3.0\nporostokes\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {nv} double");
    for v in mesh.vertices() {
        let _ = writeln!(s, "{:.12e} {:.12e} 0", v[0], v[1]);
    }
    let _ = writeln!(s, "CELLS {nt} {}", 4 * nt);
    for t in mesh.triangles() {
        let _ = writeln!(s, "3 {} {} {}", t[0], t[1], t[2]);
    }
    let _ = writeln!(s, "CELL_TYPES {nt}");
    for _ in 0..nt {
        s.push_str("5\n");
    }
    if !fields.is_empty() {
        let _ = writeln!(s, "POINT_DATA {nv}");
    }
    for f in fields {
        match f {
            VtkField::Scalar(name, v) => {
                let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
                for x in v {
                    let _ = writeln!(s, "{x:.12e}");
                }
            }
            VtkField::Vector(name, v) => {
                let _ = writeln!(s, "VECTORS {name} double");
                for x in v {
                    let _ = writeln!(s, "{:.12e} {:.12e} 0", x[0], x[1]);
                }
            }
        }
    }
    super::write_atomic(path.as_ref(), s.as_bytes())
}

/// Contents of a legacy VTK file as read back by [`read_vtk_point_data`].
#[derive(Clone, Debug, Default)]
pub struct VtkContents {
    pub points: Vec<[f64; 3]>,
    pub cell_types: Vec<u32>,
    /// Flattened values per field (3 per point for vectors).
    pub point_data: BTreeMap<String, Vec<f64>>,
}

/// Minimal reader for files produced by [`write_vtk`].
pub fn read_vtk_point_data(path: impl AsRef<Path>) -> Result<VtkContents> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut tok = text.lines().skip(4).flat_map(str::split_whitespace).peekable();
    let bad = |w: &str| Error::Format(format!("unexpected token '{w}' in {}", path.display()));
    let mut out = VtkContents::default();
    let num = |tok: &mut dyn Iterator<Item = &str>| -> Result<f64> {
        let w = tok.next().ok_or_else(|| Error::Format("truncated vtk file".into()))?;
        w.parse::<f64>().map_err(|_| bad(w))
    };
    let mut npoint = 0;
    while let Some(w) = tok.next() {
        match w {
            "POINTS" => {
                npoint = num(&mut tok)? as usize;
                tok.next();
                for _ in 0..npoint {
                    out.points.push([num(&mut tok)?, num(&mut tok)?, num(&mut tok)?]);
                }
            }
            "CELLS" => {
                let n = num(&mut tok)? as usize;
                let size = num(&mut tok)? as usize;
                let _ = n;
                for _ in 0..size {
                    num(&mut tok)?;
                }
            }
            "CELL_TYPES" => {
                let n = num(&mut tok)? as usize;
                for _ in 0..n {
                    out.cell_types.push(num(&mut tok)? as u32);
                }
            }
            "POINT_DATA" => {
                num(&mut tok)?;
            }
            "SCALARS" | "VECTORS" => {
                let name = tok.next().ok_or_else(|| bad(w))?.to_string();
                tok.next();
                let width = if w == "SCALARS" {
                    tok.next();
                    if tok.peek() == Some(&"LOOKUP_TABLE") {
                        tok.next();
                        tok.next();
                    }
                    1
                } else {
                    3
                };
                let mut v = Vec::with_capacity(width * npoint);
                for _ in 0..width * npoint {
                    v.push(num(&mut tok)?);
                }
                out.point_data.insert(name, v);
            }
            other => return Err(bad(other)),
        }
    }
    Ok(out)
}
