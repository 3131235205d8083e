//! Two-subdomain triangle meshes with boundary markers and an explicit
//! Stokes/porous interface.

use std::collections::HashMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Subdomain {
    Stokes,
    Porous,
}

impl Subdomain {
    pub fn name(self) -> &'static str {
        match self {
            Subdomain::Stokes => "STOKES",
            Subdomain::Porous => "POROUS",
        }
    }
}

/// Boundary edge label. `Custom` carries an integer id `>= 100`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Marker {
    Inlet,
    Outlet,
    WallLeft,
    WallRight,
    WallTop,
    WallBottom,
    Interface,
    Custom(u32),
}

impl Marker {
    pub fn parse(s: &str) -> Result<Marker> {
        Ok(match s {
            "INLET" => Marker::Inlet,
            "OUTLET" => Marker::Outlet,
            "WALL_LEFT" => Marker::WallLeft,
            "WALL_RIGHT" => Marker::WallRight,
            "WALL_TOP" => Marker::WallTop,
            "WALL_BOTTOM" => Marker::WallBottom,
            "INTERFACE" => Marker::Interface,
            other => {
                let digits = other.strip_prefix("CUSTOM").unwrap_or(other);
                let digits = digits.trim_start_matches(['(', '_']).trim_end_matches(')');
                match digits.parse::<u32>() {
                    Ok(k) if k >= 100 => Marker::Custom(k),
                    _ => return Err(Error::Format(format!("unknown boundary marker '{s}'"))),
                }
            }
        })
    }
}

impl fmt::Display for Marker {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Marker::Inlet => f.write_str("INLET"),
            Marker::Outlet => f.write_str("OUTLET"),
            Marker::WallLeft => f.write_str("WALL_LEFT"),
            Marker::WallRight => f.write_str("WALL_RIGHT"),
            Marker::WallTop => f.write_str("WALL_TOP"),
            Marker::WallBottom => f.write_str("WALL_BOTTOM"),
            Marker::Interface => f.write_str("INTERFACE"),
            Marker::Custom(k) => write!(f, "{k}"),
        }
    }
}

impl Serialize for Marker {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Marker {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Marker::parse(&s).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryEdge {
    pub vertices: [usize; 2],
    pub marker: Marker,
}

/// Axis-aligned rectangle `[x0, x1] × [y0, y1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect { x0, y0, x1, y1 }
    }

    pub fn area(&self) -> f64 {
        (self.x1 - self.x0) * (self.y1 - self.y0)
    }

    fn contains(&self, p: [f64; 2]) -> bool {
        p[0] > self.x0 && p[0] < self.x1 && p[1] > self.y0 && p[1] < self.y1
    }
}

/// Conforming triangulation of the two subdomains.
///
/// Local edge `k` of a triangle is the edge opposite local vertex `k`.
#[derive(Clone, Debug)]
pub struct Mesh2D {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    cell_tags: Vec<Subdomain>,
    boundary_edges: Vec<BoundaryEdge>,
    edges: Vec<[usize; 2]>,
    tri_edges: Vec<[usize; 3]>,
    edge_tris: Vec<Vec<usize>>,
    edge_lookup: HashMap<[usize; 2], usize>,
}

fn key(a: usize, b: usize) -> [usize; 2] {
    if a < b {
        [a, b]
    } else {
        [b, a]
    }
}

fn signed_area(p: [f64; 2], q: [f64; 2], r: [f64; 2]) -> f64 {
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

impl Mesh2D {
    /// Validates the input and builds the edge topology.
    pub fn new(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        cell_tags: Vec<Subdomain>,
        boundary_edges: Vec<BoundaryEdge>,
    ) -> Result<Mesh2D> {
        if cell_tags.len() != triangles.len() {
            return Err(Error::MeshInvalid(format!(
                "{} cell tags for {} triangles",
                cell_tags.len(),
                triangles.len()
            )));
        }
        if triangles.is_empty() {
            return Err(Error::MeshInvalid("mesh has no triangles".into()));
        }
        let nv = vertices.len();
        for (i, v) in vertices.iter().enumerate() {
            if !(v[0].is_finite() && v[1].is_finite()) {
                return Err(Error::MeshInvalid(format!("vertex {i} is not finite")));
            }
        }
        let mut edges = Vec::new();
        let mut edge_lookup = HashMap::new();
        let mut edge_tris: Vec<Vec<usize>> = Vec::new();
        let mut tri_edges = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&v| v >= nv) {
                return Err(Error::MeshInvalid(format!("triangle {t} references a missing vertex")));
            }
            let a = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if a <= 0.0 {
                return Err(Error::MeshInvalid(format!(
                    "triangle {t} has nonpositive signed area {a:e} (clockwise or degenerate)"
                )));
            }
            let mut te = [0; 3];
            for k in 0..3 {
                let kk = key(tri[(k + 1) % 3], tri[(k + 2) % 3]);
                let id = *edge_lookup.entry(kk).or_insert_with(|| {
                    edges.push(kk);
                    edge_tris.push(Vec::new());
                    edges.len() - 1
                });
                edge_tris[id].push(t);
                te[k] = id;
            }
            tri_edges.push(te);
        }
        for (e, ts) in edge_tris.iter().enumerate() {
            if ts.len() > 2 {
                return Err(Error::MeshInvalid(format!(
                    "edge {:?} is shared by {} triangles",
                    edges[e],
                    ts.len()
                )));
            }
        }
        let mut seen = HashMap::new();
        for (i, be) in boundary_edges.iter().enumerate() {
            let kk = key(be.vertices[0], be.vertices[1]);
            let Some(&e) = edge_lookup.get(&kk) else {
                return Err(Error::MeshInvalid(format!(
                    "boundary edge {i} {:?} is not an edge of the mesh",
                    be.vertices
                )));
            };
            if seen.insert(kk, i).is_some() {
                return Err(Error::MeshInvalid(format!("boundary edge {:?} listed twice", be.vertices)));
            }
            let ts = &edge_tris[e];
            if be.marker == Marker::Interface {
                let ok = ts.len() == 2 && cell_tags[ts[0]] != cell_tags[ts[1]];
                if !ok {
                    return Err(Error::MeshInvalid(format!(
                        "interface edge {:?} is not shared by one STOKES and one POROUS triangle",
                        be.vertices
                    )));
                }
            } else if ts.len() != 1 {
                return Err(Error::MeshInvalid(format!(
                    "edge {:?} marked {} is interior",
                    be.vertices, be.marker
                )));
            }
        }
        for (e, ts) in edge_tris.iter().enumerate() {
            if ts.len() == 2 && cell_tags[ts[0]] != cell_tags[ts[1]] && !seen.contains_key(&edges[e]) {
                return Err(Error::MeshInvalid(format!(
                    "edge {:?} separates the subdomains but is not marked INTERFACE",
                    edges[e]
                )));
            }
        }
        Ok(Mesh2D {
            vertices,
            triangles,
            cell_tags,
            boundary_edges,
            edges,
            tri_edges,
            edge_tris,
            edge_lookup,
        })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn cell_tags(&self) -> &[Subdomain] {
        &self.cell_tags
    }

    pub fn boundary_edges(&self) -> &[BoundaryEdge] {
        &self.boundary_edges
    }

    /// Unique edges as sorted vertex pairs.
    pub fn edges(&self) -> &[[usize; 2]] {
        &self.edges
    }

    /// Global edge ids of each triangle, ordered by opposite local vertex.
    pub fn triangle_edges(&self, t: usize) -> [usize; 3] {
        self.tri_edges[t]
    }

    pub fn edge_triangles(&self, e: usize) -> &[usize] {
        &self.edge_tris[e]
    }

    pub fn edge_id(&self, a: usize, b: usize) -> Option<usize> {
        self.edge_lookup.get(&key(a, b)).copied()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn triangle_coords(&self, t: usize) -> [[f64; 2]; 3] {
        self.triangles[t].map(|v| self.vertices[v])
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_coords(t);
        signed_area(a, b, c)
    }

    pub fn area(&self, sub: Option<Subdomain>) -> f64 {
        (0..self.num_triangles())
            .filter(|&t| sub.is_none_or(|s| self.cell_tags[t] == s))
            .map(|t| self.triangle_area(t))
            .sum()
    }

    pub fn boundary_length(&self) -> f64 {
        self.edge_tris
            .iter()
            .enumerate()
            .filter(|(_, ts)| ts.len() == 1)
            .map(|(e, _)| dist(self.vertices[self.edges[e][0]], self.vertices[self.edges[e][1]]))
            .sum()
    }

    /// Maximal element circumdiameter.
    pub fn h(&self) -> f64 {
        (0..self.num_triangles())
            .map(|t| {
                let [p, q, r] = self.triangle_coords(t);
                dist(p, q) * dist(q, r) * dist(r, p) / (2.0 * self.triangle_area(t))
            })
            .fold(0.0, f64::max)
    }

    pub fn max_edge_length(&self) -> f64 {
        self.edges
            .iter()
            .map(|e| dist(self.vertices[e[0]], self.vertices[e[1]]))
            .fold(0.0, f64::max)
    }

    pub fn triangles_in(&self, sub: Subdomain) -> impl Iterator<Item = usize> + '_ {
        (0..self.num_triangles()).filter(move |&t| self.cell_tags[t] == sub)
    }

    /// Per-vertex flag: the vertex belongs to a triangle of `sub`.
    pub fn vertex_in(&self, sub: Subdomain) -> Vec<bool> {
        let mut f = vec![false; self.num_vertices()];
        for t in self.triangles_in(sub) {
            for v in self.triangles[t] {
                f[v] = true;
            }
        }
        f
    }

    pub fn has_marker(&self, m: Marker) -> bool {
        self.boundary_edges.iter().any(|b| b.marker == m)
    }

    pub fn markers(&self) -> Vec<Marker> {
        let mut m: Vec<_> = self.boundary_edges.iter().map(|b| b.marker).collect();
        m.sort();
        m.dedup();
        m
    }

    /// Mesh edge ids carrying marker `m`.
    pub fn marked_edges(&self, m: Marker) -> Vec<usize> {
        self.boundary_edges
            .iter()
            .filter(|b| b.marker == m)
            .map(|b| self.edge_lookup[&key(b.vertices[0], b.vertices[1])])
            .collect()
    }

    /// Triangle containing `p` and its barycentric coordinates.
    pub fn locate(&self, p: [f64; 2]) -> Option<(usize, [f64; 3])> {
        let eps = 1e-12;
        (0..self.num_triangles()).find_map(|t| {
            let [a, b, c] = self.triangle_coords(t);
            let area = signed_area(a, b, c);
            let l = [
                signed_area(p, b, c) / area,
                signed_area(a, p, c) / area,
                signed_area(a, b, p) / area,
            ];
            l.iter().all(|&x| x >= -eps).then_some((t, l))
        })
    }

    /// Interface geometry. Empty when the mesh has no interface edges.
    pub fn interface(&self) -> InterfaceMap {
        InterfaceMap::build(self)
    }

    /// Splits each triangle into four at its edge midpoints.
    pub fn refine_uniform(&self) -> Mesh2D {
        let nv = self.num_vertices();
        let mut vertices = self.vertices.clone();
        for e in &self.edges {
            let (a, b) = (self.vertices[e[0]], self.vertices[e[1]]);
            vertices.push([0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]);
        }
        let mut triangles = Vec::with_capacity(4 * self.num_triangles());
        let mut tags = Vec::with_capacity(4 * self.num_triangles());
        for (t, &[a, b, c]) in self.triangles.iter().enumerate() {
            let [m0, m1, m2] = self.tri_edges[t].map(|e| nv + e);
            triangles.extend([[a, m2, m1], [m2, b, m0], [m1, m0, c], [m0, m1, m2]]);
            tags.extend([self.cell_tags[t]; 4]);
        }
        let mut bnd = Vec::with_capacity(2 * self.boundary_edges.len());
        for be in &self.boundary_edges {
            let [p, q] = be.vertices;
            let m = nv + self.edge_lookup[&key(p, q)];
            bnd.push(BoundaryEdge { vertices: [p, m], marker: be.marker });
            bnd.push(BoundaryEdge { vertices: [m, q], marker: be.marker });
        }
        Mesh2D::new(vertices, triangles, tags, bnd).expect("refinement preserves validity")
    }

    /// Moves vertices by `displacement` (one entry per vertex). Vertices that
    /// touch no Stokes triangle must have zero displacement.
    pub fn move_nodes(&self, displacement: &[[f64; 2]]) -> Result<Mesh2D> {
        if displacement.len() != self.num_vertices() {
            return Err(Error::Argument(format!(
                "displacement has {} entries for {} vertices",
                displacement.len(),
                self.num_vertices()
            )));
        }
        let fluid = self.vertex_in(Subdomain::Stokes);
        for (v, d) in displacement.iter().enumerate() {
            if !fluid[v] && (d[0] != 0.0 || d[1] != 0.0) {
                return Err(Error::Argument(format!(
                    "vertex {v} is not a Stokes vertex but has nonzero displacement"
                )));
            }
            if !(d[0].is_finite() && d[1].is_finite()) {
                return Err(Error::Numeric(format!("displacement at vertex {v} is not finite")));
            }
        }
        let vertices: Vec<_> = self
            .vertices
            .iter()
            .zip(displacement)
            .map(|(x, d)| [x[0] + d[0], x[1] + d[1]])
            .collect();
        for (t, tri) in self.triangles.iter().enumerate() {
            let a = signed_area(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if a <= 0.0 {
                return Err(Error::MeshTangled(format!(
                    "triangle {t} ({}) has area {a:e} after motion",
                    self.cell_tags[t].name()
                )));
            }
        }
        let mut m = self.clone();
        m.vertices = vertices;
        Ok(m)
    }

    /// True when both meshes have identical connectivity, tags and markers.
    pub fn same_topology(&self, other: &Mesh2D) -> bool {
        self.triangles == other.triangles
            && self.cell_tags == other.cell_tags
            && self.boundary_edges == other.boundary_edges
    }

    /// Writes the plain-text `mesh2d 1` format.
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        use std::fmt::Write;
        let mut s = String::from("mesh2d 1\n");
        let _ = writeln!(s, "vertices {}", self.vertices.len());
        for v in &self.vertices {
            let _ = writeln!(s, "{:?} {:?}", v[0], v[1]);
        }
        let _ = writeln!(s, "triangles {}", self.triangles.len());
        for (t, tag) in self.triangles.iter().zip(&self.cell_tags) {
            let _ = writeln!(s, "{} {} {} {}", t[0], t[1], t[2], tag.name());
        }
        let _ = writeln!(s, "boundary_edges {}", self.boundary_edges.len());
        for b in &self.boundary_edges {
            let _ = writeln!(s, "{} {} {}", b.vertices[0], b.vertices[1], b.marker);
        }
        crate::io::write_atomic(path.as_ref(), s.as_bytes())
    }
}

/// Reads a mesh in the `mesh2d 1` text format.
pub fn load_mesh(path: impl AsRef<Path>) -> Result<Mesh2D> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_mesh(&text)
}

/// Parses the `mesh2d 1` text format.
pub fn parse_mesh(text: &str) -> Result<Mesh2D> {
    let mut lines = text
        .lines()
        .map(str::trim)
        .enumerate()
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| Error::Format(format!("unexpected end of file, expected {what}")))
    };
    let (_, header) = next("header")?;
    if header.split_whitespace().collect::<Vec<_>>() != ["mesh2d", "1"] {
        return Err(Error::Format(format!("bad header '{header}'")));
    }
    let count = |line: (usize, &str), name: &str| -> Result<usize> {
        let mut it = line.1.split_whitespace();
        match (it.next(), it.next().map(str::parse::<usize>), it.next()) {
            (Some(n), Some(Ok(k)), None) if n == name => Ok(k),
            _ => Err(Error::Format(format!("line {}: expected '{name} <count>'", line.0 + 1))),
        }
    };
    fn fields<'a>(line: (usize, &'a str), n: usize) -> Result<Vec<&'a str>> {
        let f: Vec<_> = line.1.split_whitespace().collect();
        if f.len() != n {
            return Err(Error::Format(format!(
                "line {}: expected {n} fields, found {}",
                line.0 + 1,
                f.len()
            )));
        }
        Ok(f)
    }
    fn num<T: std::str::FromStr>(s: &str, line: usize) -> Result<T> {
        s.parse()
            .map_err(|_| Error::Format(format!("line {}: cannot parse '{s}'", line + 1)))
    }
    let nv = count(next("vertices")?, "vertices")?;
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let l = next("vertex")?;
        let f = fields(l, 2)?;
        vertices.push([num(f[0], l.0)?, num(f[1], l.0)?]);
    }
    let nt = count(next("triangles")?, "triangles")?;
    let mut triangles = Vec::with_capacity(nt);
    let mut tags = Vec::with_capacity(nt);
    for _ in 0..nt {
        let l = next("triangle")?;
        let f = fields(l, 4)?;
        triangles.push([num(f[0], l.0)?, num(f[1], l.0)?, num(f[2], l.0)?]);
        tags.push(match f[3] {
            "STOKES" | "0" => Subdomain::Stokes,
            "POROUS" | "1" => Subdomain::Porous,
            s => return Err(Error::Format(format!("line {}: unknown tag '{s}'", l.0 + 1))),
        });
    }
    let nb = count(next("boundary_edges")?, "boundary_edges")?;
    let mut bnd = Vec::with_capacity(nb);
    for _ in 0..nb {
        let l = next("boundary edge")?;
        let f = fields(l, 3)?;
        bnd.push(BoundaryEdge {
            vertices: [num(f[0], l.0)?, num(f[1], l.0)?],
            marker: Marker::parse(f[2])?,
        });
    }
    Mesh2D::new(vertices, triangles, tags, bnd)
}

fn grid_mesh(
    xs: &[f64],
    ys: &[f64],
    tag: impl Fn([f64; 2]) -> Subdomain,
    outer: impl Fn(Side, [f64; 2], Subdomain) -> Marker,
) -> Result<Mesh2D> {
    let (nx, ny) = (xs.len() - 1, ys.len() - 1);
    let vid = |i: usize, j: usize| j * (nx + 1) + i;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for &y in ys {
        for &x in xs {
            vertices.push([x, y]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    let mut tags = Vec::with_capacity(2 * nx * ny);
    let mut cell_tag = vec![Subdomain::Stokes; nx * ny];
    for j in 0..ny {
        for i in 0..nx {
            let c = [0.5 * (xs[i] + xs[i + 1]), 0.5 * (ys[j] + ys[j + 1])];
            let tg = tag(c);
            cell_tag[j * nx + i] = tg;
            let (a, b, cc, d) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
            triangles.push([a, b, cc]);
            triangles.push([a, cc, d]);
            tags.extend([tg, tg]);
        }
    }
    let mut bnd = Vec::new();
    for i in 0..nx {
        let mid = |j: usize| [0.5 * (xs[i] + xs[i + 1]), ys[j]];
        bnd.push(BoundaryEdge {
            vertices: [vid(i, 0), vid(i + 1, 0)],
            marker: outer(Side::Bottom, mid(0), cell_tag[i]),
        });
        bnd.push(BoundaryEdge {
            vertices: [vid(i + 1, ny), vid(i, ny)],
            marker: outer(Side::Top, mid(ny), cell_tag[(ny - 1) * nx + i]),
        });
    }
    for j in 0..ny {
        let mid = |i: usize| [xs[i], 0.5 * (ys[j] + ys[j + 1])];
        bnd.push(BoundaryEdge {
            vertices: [vid(0, j + 1), vid(0, j)],
            marker: outer(Side::Left, mid(0), cell_tag[j * nx]),
        });
        bnd.push(BoundaryEdge {
            vertices: [vid(nx, j), vid(nx, j + 1)],
            marker: outer(Side::Right, mid(nx), cell_tag[j * nx + nx - 1]),
        });
    }
    // interface: grid edges between cells of different tags
    for j in 0..ny {
        for i in 0..nx {
            let t = cell_tag[j * nx + i];
            if i + 1 < nx && cell_tag[j * nx + i + 1] != t {
                bnd.push(BoundaryEdge {
                    vertices: [vid(i + 1, j), vid(i + 1, j + 1)],
                    marker: Marker::Interface,
                });
            }
            if j + 1 < ny && cell_tag[(j + 1) * nx + i] != t {
                bnd.push(BoundaryEdge {
                    vertices: [vid(i, j + 1), vid(i + 1, j + 1)],
                    marker: Marker::Interface,
                });
            }
        }
    }
    Mesh2D::new(vertices, triangles, tags, bnd)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Side {
    Left,
    Right,
    Bottom,
    Top,
}

fn side_marker(s: Side) -> Marker {
    match s {
        Side::Left => Marker::WallLeft,
        Side::Right => Marker::WallRight,
        Side::Bottom => Marker::WallBottom,
        Side::Top => Marker::WallTop,
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..=n).map(|i| a + (b - a) * i as f64 / n as f64).collect()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs()))
}

/// Structured mesh of two rectangles sharing one full edge. Each box gets
/// `nx × ny` cells, each cell cut by its `/` diagonal. Outer edges are marked
/// by side, shared sub-edges `INTERFACE`.
pub fn build_two_block_mesh(stokes: Rect, porous: Rect, nx: usize, ny: usize) -> Result<Mesh2D> {
    if nx == 0 || ny == 0 {
        return Err(Error::Argument(format!("cell counts must be positive, got {nx}×{ny}")));
    }
    for r in [stokes, porous] {
        if !(r.x1 > r.x0 && r.y1 > r.y0) {
            return Err(Error::Geometry(format!("degenerate box {r:?}")));
        }
    }
    let same_x = close(stokes.x0, porous.x0) && close(stokes.x1, porous.x1);
    let same_y = close(stokes.y0, porous.y0) && close(stokes.y1, porous.y1);
    let (xs, ys) = if same_x && close(stokes.y1, porous.y0) {
        let mut ys = linspace(stokes.y0, stokes.y1, ny);
        ys.extend(&linspace(porous.y0, porous.y1, ny)[1..]);
        (linspace(stokes.x0, stokes.x1, nx), ys)
    } else if same_x && close(porous.y1, stokes.y0) {
        let mut ys = linspace(porous.y0, porous.y1, ny);
        ys.extend(&linspace(stokes.y0, stokes.y1, ny)[1..]);
        (linspace(stokes.x0, stokes.x1, nx), ys)
    } else if same_y && close(stokes.x1, porous.x0) {
        let mut xs = linspace(stokes.x0, stokes.x1, nx);
        xs.extend(&linspace(porous.x0, porous.x1, nx)[1..]);
        (xs, linspace(stokes.y0, stokes.y1, ny))
    } else if same_y && close(porous.x1, stokes.x0) {
        let mut xs = linspace(porous.x0, porous.x1, nx);
        xs.extend(&linspace(stokes.x0, stokes.x1, nx)[1..]);
        (xs, linspace(stokes.y0, stokes.y1, ny))
    } else {
        return Err(Error::Geometry(format!(
            "boxes {stokes:?} and {porous:?} do not share a full edge"
        )));
    };
    grid_mesh(
        &xs,
        &ys,
        |c| if stokes.contains(c) { Subdomain::Stokes } else { Subdomain::Porous },
        |s, _, _| side_marker(s),
    )
}

/// Structured `nx × ny` mesh of `domain` whose cells inside `channel` are
/// tagged Stokes. The channel must lie on grid lines. Outer edges of channel
/// cells are marked `INLET`; other outer edges are marked by side.
pub fn build_embedded_channel_mesh(domain: Rect, channel: Rect, nx: usize, ny: usize) -> Result<Mesh2D> {
    if nx == 0 || ny == 0 {
        return Err(Error::Argument(format!("cell counts must be positive, got {nx}×{ny}")));
    }
    let xs = linspace(domain.x0, domain.x1, nx);
    let ys = linspace(domain.y0, domain.y1, ny);
    let on_grid = |v: f64, g: &[f64]| g.iter().any(|&x| close(x, v));
    if !(on_grid(channel.x0, &xs) && on_grid(channel.x1, &xs) && on_grid(channel.y0, &ys) && on_grid(channel.y1, &ys))
        || channel.x0 < domain.x0 - 1e-12
        || channel.x1 > domain.x1 + 1e-12
        || channel.y0 < domain.y0 - 1e-12
        || channel.y1 > domain.y1 + 1e-12
        || !(channel.x1 > channel.x0 && channel.y1 > channel.y0)
    {
        return Err(Error::Geometry(format!(
            "channel {channel:?} is not aligned with the {nx}×{ny} grid of {domain:?}"
        )));
    }
    grid_mesh(
        &xs,
        &ys,
        |c| if channel.contains(c) { Subdomain::Stokes } else { Subdomain::Porous },
        |s, _, tag| if tag == Subdomain::Stokes { Marker::Inlet } else { side_marker(s) },
    )
}

/// One edge of the interface Σ.
#[derive(Clone, Debug)]
pub struct InterfaceEdge {
    /// Mesh edge id.
    pub edge: usize,
    /// Endpoints ordered along `tangent`.
    pub vertices: [usize; 2],
    pub stokes_triangle: usize,
    pub porous_triangle: usize,
    /// Unit normal pointing out of the porous region.
    pub normal_porous: [f64; 2],
    /// Unit tangent, the porous normal rotated by +90°.
    pub tangent: [f64; 2],
    pub length: f64,
}

impl InterfaceEdge {
    pub fn normal_stokes(&self) -> [f64; 2] {
        [-self.normal_porous[0], -self.normal_porous[1]]
    }
}

/// Geometry of Σ.
#[derive(Clone, Debug, Default)]
pub struct InterfaceMap {
    pub edges: Vec<InterfaceEdge>,
    /// Interface vertices ordered along each connected piece of Σ.
    pub trace_vertices: Vec<usize>,
}

impl InterfaceMap {
    fn build(mesh: &Mesh2D) -> InterfaceMap {
        let mut edges = Vec::new();
        for e in mesh.marked_edges(Marker::Interface) {
            let ts = mesh.edge_triangles(e);
            let (s, p) = if mesh.cell_tags[ts[0]] == Subdomain::Stokes {
                (ts[0], ts[1])
            } else {
                (ts[1], ts[0])
            };
            let k = (0..3).find(|&k| mesh.tri_edges[p][k] == e).unwrap();
            let tri = mesh.triangles[p];
            // counter-clockwise traversal of the porous triangle
            let (a, b) = (tri[(k + 1) % 3], tri[(k + 2) % 3]);
            let (pa, pb) = (mesh.vertices[a], mesh.vertices[b]);
            let len = dist(pa, pb);
            let n = [(pb[1] - pa[1]) / len, -(pb[0] - pa[0]) / len];
            let tau = [-n[1], n[0]];
            edges.push(InterfaceEdge {
                edge: e,
                vertices: [a, b],
                stokes_triangle: s,
                porous_triangle: p,
                normal_porous: n,
                tangent: tau,
                length: len,
            });
        }
        let trace_vertices = chain(&edges);
        InterfaceMap { edges, trace_vertices }
    }

    pub fn length(&self) -> f64 {
        self.edges.iter().map(|e| e.length).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }
}

fn chain(edges: &[InterfaceEdge]) -> Vec<usize> {
    let mut next: HashMap<usize, usize> = HashMap::new();
    let mut has_prev: HashMap<usize, bool> = HashMap::new();
    for e in edges {
        next.insert(e.vertices[0], e.vertices[1]);
        has_prev.insert(e.vertices[1], true);
        has_prev.entry(e.vertices[0]).or_insert(false);
    }
    let mut starts: Vec<usize> = has_prev.iter().filter(|(_, &p)| !p).map(|(&v, _)| v).collect();
    starts.sort_unstable();
    let mut out = Vec::new();
    let mut visited = std::collections::HashSet::new();
    let mut walk = |s: usize, out: &mut Vec<usize>| {
        let mut v = s;
        while visited.insert(v) {
            out.push(v);
            match next.get(&v) {
                Some(&w) => v = w,
                None => break,
            }
        }
    };
    for s in starts {
        walk(s, &mut out);
    }
    // closed loops
    let mut rest: Vec<usize> = next.keys().copied().collect();
    rest.sort_unstable();
    for s in rest {
        walk(s, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn squares(n: usize) -> Mesh2D {
        build_two_block_mesh(Rect::new(0., 0., 1., 1.), Rect::new(0., 1., 1., 2.), n, n).unwrap()
    }

    #[test]
    fn smallest_stacked_mesh() {
        let m = squares(1);
        assert_eq!(m.num_triangles(), 4);
        let i = m.interface();
        assert_eq!(i.edges.len(), 1);
        let e = &i.edges[0];
        assert_eq!(e.normal_porous, [0.0, -1.0]);
        assert_eq!(e.tangent, [1.0, 0.0]);
        assert_eq!(i.trace_vertices.len(), 2);
    }

    #[test]
    fn refinement_counts_and_h() {
        let m = squares(1).refine_uniform();
        assert_eq!(m.num_triangles(), 16);
        assert_eq!(m.interface().edges.len(), 2);
        let base = build_two_block_mesh(Rect::new(0., 0., 1., 1.), Rect::new(0., 1., 1., 2.), 8, 4).unwrap();
        assert!((base.h() - 0.2795).abs() < 5e-5);
        let r2 = base.refine_uniform().refine_uniform();
        assert!((r2.h() - 0.0699).abs() < 5e-5);
        assert!((r2.area(None) - 2.0).abs() < 1e-13);
    }

    #[test]
    fn non_adjacent_boxes_fail() {
        let r = build_two_block_mesh(Rect::new(0., 0., 1., 1.), Rect::new(0., 2., 1., 3.), 2, 2);
        assert!(matches!(r, Err(Error::Geometry(_))));
        let r = build_two_block_mesh(Rect::new(0., 0., 1., 1.), Rect::new(0., 1., 1., 2.), 0, 2);
        assert!(matches!(r, Err(Error::Argument(_))));
    }

    #[test]
    fn side_by_side_boxes() {
        let m = build_two_block_mesh(Rect::new(0., 0., 1., 1.), Rect::new(1., 0., 2., 1.), 2, 3).unwrap();
        let i = m.interface();
        assert_eq!(i.edges.len(), 3);
        for e in &i.edges {
            assert_eq!(e.normal_porous, [-1.0, 0.0]);
        }
    }

    #[test]
    fn marker_names_round_trip() {
        for m in [Marker::Inlet, Marker::WallBottom, Marker::Interface, Marker::Custom(123)] {
            assert_eq!(Marker::parse(&m.to_string()).unwrap(), m);
        }
        assert!(Marker::parse("CUSTOM(7)").is_err());
        assert_eq!(Marker::parse("CUSTOM(101)").unwrap(), Marker::Custom(101));
    }
}
