//! Discrete energy
//! `½[ρ_s(1−φ)‖u_s‖² + (1−φ)²/K‖p_P‖² + 2μ_p‖ε(y_s)‖² + λ_p‖∇·y_s‖² + ρ_f φ‖u_s + u_r‖²]`.

use crate::assembly::{CoupledSystem, Unknown};

/// Evaluates the energy of `x` from the assembled blocks: `ρ_s(1−φ) + ρ_f φ = ρ_p`
/// lets the two solid-velocity terms combine into the `ρ_p` mass.
pub fn discrete_energy(system: &CoupledSystem, x: &[f64]) -> f64 {
    use Unknown::*;
    let sp = &system.spaces;
    let part = |u: Unknown| &x[sp.range(u)];
    let (us, ur, ys, pp) = (part(SolidVelocity), part(RelativeVelocity), part(Displacement), part(PorePressure));
    let quad = |m: Option<&crate::sparse::CsrMatrix>, a: &[f64], b: &[f64]| m.map_or(0.0, |m| m.bilinear(a, b));
    let e = &system.e;
    let h = &system.h;
    let v = quad(h.get(SolidVelocity, SolidVelocity), us, us)
        + quad(e.get(PorePressure, PorePressure), pp, pp)
        + quad(h.get(Displacement, Displacement), ys, ys)
        + quad(e.get(RelativeVelocity, RelativeVelocity), ur, ur)
        + 2.0 * quad(e.get(RelativeVelocity, SolidVelocity), ur, us);
    0.5 * v.max(0.0)
}
