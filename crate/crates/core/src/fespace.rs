//! Continuous Lagrange P1/P2 spaces on a subdomain, the P1 multiplier space on
//! the interface, nodal interpolation and Dirichlet data.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{Marker, Mesh2D, Subdomain};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    P1,
    P2,
}

impl Family {
    pub fn local_nodes(self) -> usize {
        match self {
            Family::P1 => 3,
            Family::P2 => 6,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    Stokes,
    Porous,
    Interface,
}

impl From<Subdomain> for Region {
    fn from(s: Subdomain) -> Self {
        match s {
            Subdomain::Stokes => Region::Stokes,
            Subdomain::Porous => Region::Porous,
        }
    }
}

/// Where a node sits in the mesh.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NodeKind {
    Vertex(usize),
    EdgeMidpoint(usize),
}

/// Physical gradients of the barycentric coordinates of a triangle.
pub fn barycentric_gradients(x: &[[f64; 2]; 3]) -> ([[f64; 2]; 3], f64) {
    let two_a = (x[1][0] - x[0][0]) * (x[2][1] - x[0][1]) - (x[2][0] - x[0][0]) * (x[1][1] - x[0][1]);
    let mut g = [[0.0; 2]; 3];
    for i in 0..3 {
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        g[i] = [(x[j][1] - x[k][1]) / two_a, (x[k][0] - x[j][0]) / two_a];
    }
    (g, 0.5 * two_a)
}

/// Shape function values at barycentric point `l`. Local node order: vertices,
/// then midpoints of the edges opposite vertices 0, 1, 2.
#[inline]
pub fn shape_values(family: Family, l: [f64; 3], out: &mut [f64]) {
    match family {
        Family::P1 => out[..3].copy_from_slice(&l),
        Family::P2 => {
            for i in 0..3 {
                out[i] = l[i] * (2.0 * l[i] - 1.0);
                out[3 + i] = 4.0 * l[(i + 1) % 3] * l[(i + 2) % 3];
            }
        }
    }
}

/// Physical shape function gradients given barycentric gradients `gl`.
#[inline]
pub fn shape_gradients(family: Family, l: [f64; 3], gl: &[[f64; 2]; 3], out: &mut [[f64; 2]]) {
    match family {
        Family::P1 => out[..3].copy_from_slice(gl),
        Family::P2 => {
            for i in 0..3 {
                let s = 4.0 * l[i] - 1.0;
                out[i] = [s * gl[i][0], s * gl[i][1]];
                let (j, k) = ((i + 1) % 3, (i + 2) % 3);
                out[3 + i] = [
                    4.0 * (l[k] * gl[j][0] + l[j] * gl[k][0]),
                    4.0 * (l[k] * gl[j][1] + l[j] * gl[k][1]),
                ];
            }
        }
    }
}

/// Lagrange finite element space.
///
/// Degrees of freedom are node-major: `dof = components * node + component`.
/// For the interface space the cells are the interface edges in the order of
/// [`InterfaceMap::edges`] and the local nodes are the edge endpoints ordered
/// along the tangent.
#[derive(Clone, Debug)]
pub struct FunctionSpace {
    mesh: Arc<Mesh2D>,
    region: Region,
    family: Family,
    components: usize,
    cells: Vec<usize>,
    cell_nodes: Vec<usize>,
    nodes: Vec<NodeKind>,
    node_coords: Vec<[f64; 2]>,
    vertex_node: Vec<usize>,
    edge_node: Vec<usize>,
    triangle_cell: Vec<usize>,
}

const NONE: usize = usize::MAX;

impl FunctionSpace {
    pub fn new(mesh: Arc<Mesh2D>, region: Region, family: Family, components: usize) -> Result<Self> {
        if !(components == 1 || components == 2) {
            return Err(Error::Argument(format!("components must be 1 or 2, got {components}")));
        }
        if region == Region::Interface {
            if components != 1 {
                return Err(Error::Argument("the interface multiplier space is scalar".into()));
            }
            if family != Family::P1 {
                return Err(Error::Argument("the interface multiplier space is P1".into()));
            }
            return Ok(Self::interface(mesh));
        }
        let sub = match region {
            Region::Stokes => Subdomain::Stokes,
            _ => Subdomain::Porous,
        };
        let cells: Vec<usize> = mesh.triangles_in(sub).collect();
        let mut vertex_node = vec![NONE; mesh.num_vertices()];
        let mut edge_node = vec![NONE; mesh.edges().len()];
        let mut triangle_cell = vec![NONE; mesh.num_triangles()];
        for &t in &cells {
            for v in mesh.triangles()[t] {
                vertex_node[v] = 0;
            }
            if family == Family::P2 {
                for e in mesh.triangle_edges(t) {
                    edge_node[e] = 0;
                }
            }
        }
        let mut nodes = Vec::new();
        let mut node_coords = Vec::new();
        for (v, n) in vertex_node.iter_mut().enumerate() {
            if *n == 0 {
                *n = nodes.len();
                nodes.push(NodeKind::Vertex(v));
                node_coords.push(mesh.vertices()[v]);
            }
        }
        for (e, n) in edge_node.iter_mut().enumerate() {
            if *n == 0 {
                *n = nodes.len();
                nodes.push(NodeKind::EdgeMidpoint(e));
                let [a, b] = mesh.edges()[e];
                let (pa, pb) = (mesh.vertices()[a], mesh.vertices()[b]);
                node_coords.push([0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])]);
            }
        }
        let nloc = family.local_nodes();
        let mut cell_nodes = Vec::with_capacity(nloc * cells.len());
        for (c, &t) in cells.iter().enumerate() {
            triangle_cell[t] = c;
            for v in mesh.triangles()[t] {
                cell_nodes.push(vertex_node[v]);
            }
            if family == Family::P2 {
                for e in mesh.triangle_edges(t) {
                    cell_nodes.push(edge_node[e]);
                }
            }
        }
        Ok(FunctionSpace {
            mesh,
            region,
            family,
            components,
            cells,
            cell_nodes,
            nodes,
            node_coords,
            vertex_node,
            edge_node,
            triangle_cell,
        })
    }

    fn interface(mesh: Arc<Mesh2D>) -> Self {
        let imap = mesh.interface();
        let mut vertex_node = vec![NONE; mesh.num_vertices()];
        let mut nodes = Vec::new();
        let mut node_coords = Vec::new();
        for &v in &imap.trace_vertices {
            vertex_node[v] = nodes.len();
            nodes.push(NodeKind::Vertex(v));
            node_coords.push(mesh.vertices()[v]);
        }
        let cells: Vec<usize> = imap.edges.iter().map(|e| e.edge).collect();
        let cell_nodes = imap
            .edges
            .iter()
            .flat_map(|e| e.vertices.map(|v| vertex_node[v]))
            .collect();
        let ne = mesh.edges().len();
        let nt = mesh.num_triangles();
        FunctionSpace {
            mesh,
            region: Region::Interface,
            family: Family::P1,
            components: 1,
            cells,
            cell_nodes,
            nodes,
            node_coords,
            vertex_node,
            edge_node: vec![NONE; ne],
            triangle_cell: vec![NONE; nt],
        }
    }

    pub fn mesh(&self) -> &Arc<Mesh2D> {
        &self.mesh
    }

    pub fn region(&self) -> Region {
        self.region
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn components(&self) -> usize {
        self.components
    }

    pub fn dim(&self) -> usize {
        self.components * self.nodes.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[NodeKind] {
        &self.nodes
    }

    pub fn node_coords(&self) -> &[[f64; 2]] {
        &self.node_coords
    }

    /// Mesh entities carrying the cells: triangles, or edges for the interface.
    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn local_nodes(&self) -> usize {
        if self.region == Region::Interface {
            2
        } else {
            self.family.local_nodes()
        }
    }

    pub fn cell_nodes(&self, c: usize) -> &[usize] {
        let n = self.local_nodes();
        &self.cell_nodes[n * c..n * (c + 1)]
    }

    /// Cell index of mesh triangle `t`, if the triangle belongs to this space.
    pub fn cell_of_triangle(&self, t: usize) -> Option<usize> {
        let c = self.triangle_cell[t];
        (c != NONE).then_some(c)
    }

    pub fn vertex_node(&self, v: usize) -> Option<usize> {
        let n = self.vertex_node[v];
        (n != NONE).then_some(n)
    }

    pub fn edge_node(&self, e: usize) -> Option<usize> {
        let n = self.edge_node[e];
        (n != NONE).then_some(n)
    }

    #[inline]
    pub fn dof(&self, node: usize, comp: usize) -> usize {
        self.components * node + comp
    }

    /// Same space on a mesh with identical topology and moved vertices.
    pub fn with_mesh(&self, mesh: Arc<Mesh2D>) -> Result<Self> {
        if !mesh.same_topology(&self.mesh) {
            return Err(Error::Argument("new mesh has a different topology".into()));
        }
        FunctionSpace::new(mesh, self.region, self.family, self.components)
    }

    /// Nodal interpolant of `f(x, t)`; component `c` of the result uses `f(..)[c]`.
    pub fn interpolate(&self, f: &dyn Fn([f64; 2], f64) -> [f64; 2], t: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim()];
        for (n, &x) in self.node_coords.iter().enumerate() {
            let v = f(x, t);
            for c in 0..self.components {
                if !v[c].is_finite() {
                    return Err(Error::Numeric(format!("non-finite value at node {n} {x:?}")));
                }
                out[self.dof(n, c)] = v[c];
            }
        }
        Ok(out)
    }

    /// Value of a discrete function at barycentric point `l` of cell `c`.
    pub fn eval_cell(&self, coeffs: &[f64], c: usize, l: [f64; 3]) -> [f64; 2] {
        let mut phi = [0.0; 6];
        shape_values(self.family, l, &mut phi);
        let mut out = [0.0; 2];
        for (k, &n) in self.cell_nodes(c).iter().enumerate() {
            for (comp, o) in out.iter_mut().enumerate().take(self.components) {
                *o += phi[k] * coeffs[self.dof(n, comp)];
            }
        }
        out
    }

    /// Gradient of component `comp` on cell `c`.
    pub fn grad_cell(&self, coeffs: &[f64], c: usize, l: [f64; 3], comp: usize) -> [f64; 2] {
        let t = self.cells[c];
        let (gl, _) = barycentric_gradients(&self.mesh.triangle_coords(t));
        let mut g = [[0.0; 2]; 6];
        shape_gradients(self.family, l, &gl, &mut g);
        let mut out = [0.0; 2];
        for (k, &n) in self.cell_nodes(c).iter().enumerate() {
            let u = coeffs[self.dof(n, comp)];
            out[0] += u * g[k][0];
            out[1] += u * g[k][1];
        }
        out
    }

    /// Value at an arbitrary point of the subdomain.
    pub fn evaluate(&self, coeffs: &[f64], x: [f64; 2]) -> Option<[f64; 2]> {
        if self.region == Region::Interface {
            let imap = self.mesh.interface();
            for (c, e) in imap.edges.iter().enumerate() {
                let [a, b] = e.vertices.map(|v| self.mesh.vertices()[v]);
                let d = [b[0] - a[0], b[1] - a[1]];
                let s = ((x[0] - a[0]) * d[0] + (x[1] - a[1]) * d[1]) / (e.length * e.length);
                let off = (x[0] - a[0]) * d[1] - (x[1] - a[1]) * d[0];
                if (-1e-12..=1.0 + 1e-12).contains(&s) && off.abs() < 1e-12 * e.length {
                    let n = self.cell_nodes(c);
                    return Some([(1.0 - s) * coeffs[n[0]] + s * coeffs[n[1]], 0.0]);
                }
            }
            return None;
        }
        let tris = self.mesh.triangles();
        for &t in &self.cells {
            let [a, b, c] = tris[t].map(|v| self.mesh.vertices()[v]);
            let area = (b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]);
            let l1 = ((x[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (x[1] - a[1])) / area;
            let l2 = ((b[0] - a[0]) * (x[1] - a[1]) - (x[0] - a[0]) * (b[1] - a[1])) / area;
            let l = [1.0 - l1 - l2, l1, l2];
            if l.iter().all(|&v| v >= -1e-12) {
                return Some(self.eval_cell(coeffs, self.triangle_cell[t], l));
            }
        }
        None
    }

    /// Nodes lying on edges marked with any of `markers`, restricted to edges
    /// that bound a cell of this space.
    pub fn boundary_nodes(&self, markers: &[Marker]) -> Result<Vec<usize>> {
        for m in markers {
            if !self.mesh.has_marker(*m) {
                return Err(Error::Argument(format!("marker {m} not found in mesh")));
            }
        }
        let mut out = std::collections::BTreeSet::new();
        for m in markers {
            for e in self.mesh.marked_edges(*m) {
                let touches = match self.region {
                    Region::Interface => self.cells.contains(&e),
                    _ => self
                        .mesh
                        .edge_triangles(e)
                        .iter()
                        .any(|&t| self.triangle_cell[t] != NONE),
                };
                if !touches {
                    continue;
                }
                for v in self.mesh.edges()[e] {
                    out.insert(self.vertex_node[v]);
                }
                if self.edge_node[e] != NONE {
                    out.insert(self.edge_node[e]);
                }
            }
        }
        Ok(out.into_iter().collect())
    }

    /// Essential data `g(x, t)` on the nodes of the marked edges. `components`
    /// selects which vector components are constrained (`None`: all).
    pub fn dirichlet_bcs(
        &self,
        markers: &[Marker],
        components: Option<&[usize]>,
        g: &dyn Fn([f64; 2], f64) -> [f64; 2],
        t: f64,
    ) -> Result<BcSet> {
        let all: Vec<usize> = (0..self.components).collect();
        let comps = components.unwrap_or(&all);
        if let Some(&c) = comps.iter().find(|&&c| c >= self.components) {
            return Err(Error::Argument(format!("component {c} out of range")));
        }
        let mut entries = BTreeMap::new();
        for n in self.boundary_nodes(markers)? {
            let v = g(self.node_coords[n], t);
            for &c in comps {
                if !v[c].is_finite() {
                    return Err(Error::Numeric(format!("non-finite boundary value at node {n}")));
                }
                entries.insert(self.dof(n, c), v[c]);
            }
        }
        Ok(BcSet {
            entries: entries.into_iter().collect(),
        })
    }

    /// Vertex values of a discrete function (P2 functions are sampled at the
    /// vertices). Entries for vertices outside the space are zero.
    pub fn vertex_values(&self, coeffs: &[f64]) -> Vec<[f64; 2]> {
        let mut out = vec![[0.0; 2]; self.mesh.num_vertices()];
        for (v, &n) in self.vertex_node.iter().enumerate() {
            if n != NONE {
                for c in 0..self.components {
                    out[v][c] = coeffs[self.dof(n, c)];
                }
            }
        }
        out
    }
}

/// Prescribed values for a set of dofs of one space, sorted by dof.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct BcSet {
    pub entries: Vec<(usize, f64)>,
}

impl BcSet {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn dofs(&self) -> impl Iterator<Item = usize> + '_ {
        self.entries.iter().map(|e| e.0)
    }

    /// Union of two sets; equal values on shared dofs are allowed.
    pub fn merge(&self, other: &BcSet) -> Result<BcSet> {
        let mut m: BTreeMap<usize, f64> = self.entries.iter().copied().collect();
        for &(d, v) in &other.entries {
            if let Some(&old) = m.get(&d) {
                if old != v {
                    return Err(Error::BcConflict { dof: d, first: old, second: v });
                }
            }
            m.insert(d, v);
        }
        Ok(BcSet {
            entries: m.into_iter().collect(),
        })
    }
}
