//! SPE10 model 2 porosity/permeability ingestion and the material laws built
//! on it.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assembly::assemble_weighted_mass;
use crate::error::{Error, Result};
use crate::fespace::{barycentric_gradients, shape_values, Family, FunctionSpace, Region};
use crate::field::ScalarField;
use crate::mesh::{Mesh2D, Rect, Subdomain};
use crate::quadrature::triangle_rule;
use crate::system::Factorization;

pub const SPE10_NX: usize = 60;
pub const SPE10_NY: usize = 220;
pub const SPE10_NZ: usize = 85;
const CELLS: usize = SPE10_NX * SPE10_NY * SPE10_NZ;

/// Millidarcy in m².
pub const MILLIDARCY: f64 = 9.869233e-16;

/// Porosity bound after ingestion: `φ ∈ [PHI_CLAMP, 1 − PHI_CLAMP]`.
pub const PHI_CLAMP: f64 = 0.01;

/// `E(φ) = scale · max(1 − 2φ, floor)^exponent`
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct YoungsLaw {
    pub scale: f64,
    pub exponent: f64,
    pub floor: f64,
}

impl Default for YoungsLaw {
    fn default() -> Self {
        YoungsLaw {
            scale: 1e7,
            exponent: 2.1,
            floor: 1e-3,
        }
    }
}

impl YoungsLaw {
    pub fn eval(&self, phi: f64) -> f64 {
        self.scale * (1.0 - 2.0 * phi).max(self.floor).powf(self.exponent)
    }
}

/// How one layer is turned into material fields.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spe10Options {
    /// 1-based layer index.
    pub layer: usize,
    /// Poisson ratio.
    pub nu: f64,
    /// Affine target range for the layer's porosity values.
    #[serde(default)]
    pub phi_range: Option<[f64; 2]>,
    /// Affine target range for the layer's permeability after conversion
    /// from mD to m².
    #[serde(default)]
    pub kappa_range: Option<[f64; 2]>,
    #[serde(default)]
    pub youngs: YoungsLaw,
    /// Box the 60×220 slab is stretched over; defaults to the bounding box
    /// of the porous region.
    #[serde(default, rename = "box")]
    pub target_box: Option<Rect>,
}

impl Spe10Options {
    pub fn new(layer: usize, nu: f64) -> Self {
        Spe10Options {
            layer,
            nu,
            phi_range: None,
            kappa_range: None,
            youngs: YoungsLaw::default(),
            target_box: None,
        }
    }
}

/// Porous material data as P1 fields on mesh vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct HeterogeneousFields {
    pub phi: Vec<f64>,
    pub kappa: Vec<f64>,
    pub youngs: Vec<f64>,
    pub lambda_p: Vec<f64>,
    pub mu_p: Vec<f64>,
    pub nu: f64,
}

/// `(λ_p, μ_p)` from Young's modulus and Poisson ratio.
pub fn lame_from_youngs(e: f64, nu: f64) -> (f64, f64) {
    (e * nu / ((1.0 + nu) * (1.0 - 2.0 * nu)), e / (2.0 * (1.0 + nu)))
}

impl HeterogeneousFields {
    /// Fields from nodal porosity and permeability; `E` and the Lamé
    /// parameters follow from `law` and `nu`.
    pub fn from_phi_kappa(phi: Vec<f64>, kappa: Vec<f64>, law: &YoungsLaw, nu: f64) -> Result<Self> {
        if phi.len() != kappa.len() {
            return Err(Error::Argument("porosity and permeability lengths differ".into()));
        }
        if !(nu > -1.0 && nu < 0.5) {
            return Err(Error::Argument(format!("Poisson ratio {nu} outside (-1, 0.5)")));
        }
        let youngs: Vec<f64> = phi.iter().map(|&p| law.eval(p)).collect();
        let (lambda_p, mu_p) = youngs.iter().map(|&e| lame_from_youngs(e, nu)).unzip();
        let f = HeterogeneousFields {
            phi,
            kappa,
            youngs,
            lambda_p,
            mu_p,
            nu,
        };
        f.check()?;
        Ok(f)
    }

    /// Porosity bounds, positivity of `κ` and `E`, and the Lamé relations.
    pub fn check(&self) -> Result<()> {
        let n = self.phi.len();
        if [self.kappa.len(), self.youngs.len(), self.lambda_p.len(), self.mu_p.len()]
            .iter()
            .any(|&m| m != n)
        {
            return Err(Error::Argument("field lengths differ".into()));
        }
        for i in 0..n {
            let p = self.phi[i];
            if !(p >= PHI_CLAMP && p <= 1.0 - PHI_CLAMP) {
                return Err(Error::Argument(format!("porosity {p} at vertex {i} out of bounds")));
            }
            if !(self.kappa[i] > 0.0 && self.kappa[i].is_finite()) {
                return Err(Error::Argument(format!("permeability {} at vertex {i}", self.kappa[i])));
            }
            if !(self.youngs[i] > 0.0 && self.youngs[i].is_finite()) {
                return Err(Error::Argument(format!("Young's modulus {} at vertex {i}", self.youngs[i])));
            }
            let (l, m) = lame_from_youngs(self.youngs[i], self.nu);
            let tol = 1e-12 * self.youngs[i].max(1.0);
            if (l - self.lambda_p[i]).abs() > tol || (m - self.mu_p[i]).abs() > tol {
                return Err(Error::Argument(format!("Lamé parameters inconsistent at vertex {i}")));
            }
        }
        Ok(())
    }

    pub fn phi_field(&self) -> ScalarField {
        ScalarField::nodal(self.phi.clone())
    }

    pub fn kappa_field(&self) -> ScalarField {
        ScalarField::nodal(self.kappa.clone())
    }

    pub fn lambda_field(&self) -> ScalarField {
        ScalarField::nodal(self.lambda_p.clone())
    }

    pub fn mu_field(&self) -> ScalarField {
        ScalarField::nodal(self.mu_p.clone())
    }
}

fn read_values(path: &Path, needed: usize) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::with_capacity(needed);
    for tok in text.split_ascii_whitespace().take(needed) {
        let v: f64 = tok
            .parse()
            .map_err(|_| Error::Format(format!("{}: '{tok}' is not a number", path.display())))?;
        out.push(v);
    }
    if out.len() < needed {
        return Err(Error::Format(format!(
            "{}: expected at least {needed} values, found {}",
            path.display(),
            out.len()
        )));
    }
    Ok(out)
}

/// Porosity and `k_x` (mD) of one layer, `60 × 220` values with `x` fastest.
pub fn read_spe10_layer(phi_file: &Path, perm_file: &Path, layer: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(1..=SPE10_NZ).contains(&layer) {
        return Err(Error::Argument(format!("layer {layer} outside 1..={SPE10_NZ}")));
    }
    let slab = SPE10_NX * SPE10_NY;
    let (lo, hi) = ((layer - 1) * slab, layer * slab);
    let phi = read_values(phi_file, hi)?;
    let kx = read_values(perm_file, hi)?;
    Ok((phi[lo..hi].to_vec(), kx[lo..hi].to_vec()))
}

fn affine(v: &mut [f64], to: [f64; 2]) {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    for x in v.iter_mut() {
        *x = if hi > lo {
            to[0] + (*x - lo) * (to[1] - to[0]) / (hi - lo)
        } else {
            0.5 * (to[0] + to[1])
        };
    }
}

fn porous_box(mesh: &Mesh2D) -> Rect {
    let mut r = Rect::new(f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
    let inside = mesh.vertex_in(Subdomain::Porous);
    for (_, x) in mesh.vertices().iter().enumerate().filter(|(v, _)| inside[*v]) {
        r.x0 = r.x0.min(x[0]);
        r.y0 = r.y0.min(x[1]);
        r.x1 = r.x1.max(x[0]);
        r.y1 = r.y1.max(x[1]);
    }
    r
}

/// `L²` projection of cell data (nearest slab cell) onto P1 on the porous
/// region; one value per mesh vertex, non-porous vertices get the mean.
fn project(mesh: &std::sync::Arc<Mesh2D>, slab: &[f64], target: Rect) -> Result<Vec<f64>> {
    let space = FunctionSpace::new(mesh.clone(), Region::Porous, Family::P1, 1)?;
    let mass = assemble_weighted_mass(&space, &space, &ScalarField::Constant(1.0))?;
    let rule = triangle_rule(4)?;
    let lookup = |p: [f64; 2]| {
        let fx = ((p[0] - target.x0) / (target.x1 - target.x0) * SPE10_NX as f64).floor();
        let fy = ((p[1] - target.y0) / (target.y1 - target.y0) * SPE10_NY as f64).floor();
        let i = (fx.max(0.0) as usize).min(SPE10_NX - 1);
        let j = (fy.max(0.0) as usize).min(SPE10_NY - 1);
        slab[i + SPE10_NX * j]
    };
    let mut rhs = vec![0.0; space.dim()];
    let mut phi = [0.0; 6];
    for c in 0..space.cells().len() {
        let x = mesh.triangle_coords(space.cells()[c]);
        let (_, area) = barycentric_gradients(&x);
        for q in 0..rule.len() {
            let l = rule.points[q];
            let p = [
                l[0] * x[0][0] + l[1] * x[1][0] + l[2] * x[2][0],
                l[0] * x[0][1] + l[1] * x[1][1] + l[2] * x[2][1],
            ];
            let f = lookup(p);
            shape_values(Family::P1, l, &mut phi);
            for (k, &n) in space.cell_nodes(c).iter().enumerate() {
                rhs[n] += 2.0 * area * rule.weights[q] * phi[k] * f;
            }
        }
    }
    let c = Factorization::new(&mass)?.solve(&rhs)?;
    let mean = c.iter().sum::<f64>() / c.len().max(1) as f64;
    Ok((0..mesh.num_vertices())
        .map(|v| space.vertex_node(v).map_or(mean, |n| c[n]))
        .collect())
}

/// Material fields from a porosity slab and a `k_x` slab (mD) of
/// `60 × 220` values.
pub fn fields_from_slab(
    mesh: &std::sync::Arc<Mesh2D>,
    mut phi_slab: Vec<f64>,
    perm_slab: Vec<f64>,
    opts: &Spe10Options,
) -> Result<HeterogeneousFields> {
    let slab = SPE10_NX * SPE10_NY;
    if phi_slab.len() != slab || perm_slab.len() != slab {
        return Err(Error::Argument(format!("slabs must hold {slab} values")));
    }
    if phi_slab.iter().chain(&perm_slab).any(|v| !v.is_finite()) {
        return Err(Error::Format("non-finite value in SPE10 data".into()));
    }
    if let Some(r) = opts.phi_range {
        affine(&mut phi_slab, r);
    }
    let mut kappa_slab: Vec<f64> = perm_slab.iter().map(|k| k * MILLIDARCY).collect();
    if let Some(r) = opts.kappa_range {
        if !(r[0] > 0.0 && r[1] >= r[0]) {
            return Err(Error::Argument(format!("permeability range {r:?} must be positive")));
        }
        affine(&mut kappa_slab, r);
    }
    let k_pos = kappa_slab.iter().cloned().filter(|&k| k > 0.0);
    let k_min = k_pos.clone().fold(f64::INFINITY, f64::min);
    let k_max = k_pos.fold(0.0, f64::max);
    if !k_min.is_finite() {
        return Err(Error::Argument("layer has no positive permeability".into()));
    }
    let target = opts.target_box.unwrap_or_else(|| porous_box(mesh));
    let phi = project(mesh, &phi_slab, target)?
        .into_iter()
        .map(|p| p.clamp(PHI_CLAMP, 1.0 - PHI_CLAMP))
        .collect();
    let kappa = project(mesh, &kappa_slab, target)?
        .into_iter()
        .map(|k| k.clamp(k_min, k_max))
        .collect();
    HeterogeneousFields::from_phi_kappa(phi, kappa, &opts.youngs, opts.nu)
}

/// Reads one layer from SPE10-format files and projects it onto the porous
/// region of `mesh`.
pub fn load_spe10_layer(
    phi_file: impl AsRef<Path>,
    perm_file: impl AsRef<Path>,
    opts: &Spe10Options,
    mesh: &std::sync::Arc<Mesh2D>,
) -> Result<HeterogeneousFields> {
    let (phi, kx) = read_spe10_layer(phi_file.as_ref(), perm_file.as_ref(), opts.layer)?;
    fields_from_slab(mesh, phi, kx, opts)
}

/// Synthetic data in SPE10 layout: meandering high-porosity channels over a
/// noisy background, permeability log-linear in porosity. Returns the
/// porosity (one value per cell) and permeability (`k_x`, `k_y`, `k_z`
/// blocks, mD).
pub fn synthetic_spe10(seed: u64) -> (Vec<f64>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut phi = Vec::with_capacity(CELLS);
    let waves: Vec<(f64, f64, f64)> = (0..SPE10_NZ)
        .map(|_| (rng.gen_range(10.0..50.0), rng.gen_range(0.0..6.3), rng.gen_range(3.0..8.0)))
        .collect();
    for &(centre, shift, width) in &waves {
        for j in 0..SPE10_NY {
            let c = centre + 8.0 * (j as f64 / 25.0 + shift).sin();
            for i in 0..SPE10_NX {
                let d = (i as f64 - c).abs() / width;
                let chan = (-d * d).exp();
                let noise: f64 = rng.gen_range(-0.03..0.03);
                phi.push((0.05 + 0.25 * chan + noise).clamp(0.0, 0.5));
            }
        }
    }
    let kx: Vec<f64> = phi.iter().map(|p| 10f64.powf(-1.0 + 14.0 * p)).collect();
    let mut perm = kx.clone();
    perm.extend_from_slice(&kx);
    perm.extend(kx.iter().map(|k| 0.1 * k));
    (phi, perm)
}

fn write_values(path: &Path, v: &[f64]) -> Result<()> {
    let mut s = String::with_capacity(v.len() * 12);
    for (i, x) in v.iter().enumerate() {
        let _ = write!(s, "{x:.6e}");
        s.push(if i % 6 == 5 { '\n' } else { ' ' });
    }
    s.push('\n');
    crate::io::write_atomic(path, s.as_bytes())
}

/// Writes SPE10-format porosity and permeability files.
pub fn write_spe10_files(phi: &[f64], perm: &[f64], phi_file: impl AsRef<Path>, perm_file: impl AsRef<Path>) -> Result<()> {
    if phi.len() != CELLS || perm.len() != 3 * CELLS {
        return Err(Error::Argument(format!(
            "expected {CELLS} porosity and {} permeability values",
            3 * CELLS
        )));
    }
    write_values(phi_file.as_ref(), phi)?;
    write_values(perm_file.as_ref(), perm)
}
