//! Gauss-type quadrature on the reference triangle `(0,0),(1,0),(0,1)` and the
//! reference edge `[0,1]`.

use crate::error::{Error, Result};

/// Points and positive weights. Triangle points are barycentric
/// `[1-x-y, x, y]`; edge points are stored as `[s, 0, 0]` with `s ∈ [0,1]`.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
    pub order: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// Reference coordinates `(x, y)` of triangle point `q`.
    pub fn xy(&self, q: usize) -> [f64; 2] {
        [self.points[q][1], self.points[q][2]]
    }

    /// Reference coordinate of edge point `q`.
    pub fn s(&self, q: usize) -> f64 {
        self.points[q][0]
    }
}

// Symmetric orbits: (a, a, 1-2a) permutations and (a, b, c) permutations.
fn orbit3(a: f64, w: f64, pts: &mut Vec<[f64; 3]>, wts: &mut Vec<f64>) {
    let c = 1.0 - 2.0 * a;
    for p in [[c, a, a], [a, c, a], [a, a, c]] {
        pts.push(p);
        wts.push(w);
    }
}

fn orbit6(a: f64, b: f64, w: f64, pts: &mut Vec<[f64; 3]>, wts: &mut Vec<f64>) {
    let c = 1.0 - a - b;
    for p in [[a, b, c], [a, c, b], [b, a, c], [b, c, a], [c, a, b], [c, b, a]] {
        pts.push(p);
        wts.push(w);
    }
}

/// Dunavant-type symmetric rule exact for total degree `order` (1..=6).
pub fn triangle_rule(order: usize) -> Result<QuadratureRule> {
    let mut p = Vec::new();
    let mut w = Vec::new();
    match order {
        1 => {
            p.push([1.0 / 3.0; 3]);
            w.push(1.0);
        }
        2 => orbit3(1.0 / 6.0, 1.0 / 3.0, &mut p, &mut w),
        // the 4-point degree-3 rule has a negative weight; use the degree-4 rule
        3 | 4 => {
            orbit3(0.445948490915965, 0.223381589678011, &mut p, &mut w);
            orbit3(0.091576213509771, 0.109951743655322, &mut p, &mut w);
        }
        5 => {
            p.push([1.0 / 3.0; 3]);
            w.push(0.225);
            orbit3(0.470142064105115, 0.132394152788506, &mut p, &mut w);
            orbit3(0.101286507323456, 0.125939180544827, &mut p, &mut w);
        }
        6 => {
            orbit3(0.249286745170910, 0.116786275726379, &mut p, &mut w);
            orbit3(0.063089014491502, 0.050844906370207, &mut p, &mut w);
            orbit6(
                0.053145049844817,
                0.310352451033784,
                0.082851075618374,
                &mut p,
                &mut w,
            );
        }
        _ => {
            return Err(Error::Argument(format!(
                "triangle rule order {order} outside 1..=6"
            )))
        }
    }
    // tabulated weights carry 15 digits; renormalize so the sum is exact
    let s: f64 = w.iter().sum();
    let weights = w.iter().map(|x| 0.5 * x / s).collect();
    Ok(QuadratureRule {
        points: p,
        weights,
        order,
    })
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    (x, w)
}

/// Gauss rule on `[0, 1]` exact for polynomials of degree `order` (1..=8).
pub fn edge_rule(order: usize) -> Result<QuadratureRule> {
    if !(1..=8).contains(&order) {
        return Err(Error::Argument(format!("edge rule order {order} outside 1..=8")));
    }
    let n = order / 2 + 1;
    let (x, w) = gauss_legendre(n);
    let mut pts: Vec<_> = x.iter().map(|z| [0.5 * (z + 1.0), 0.0, 0.0]).collect();
    let mut wts: Vec<_> = w.iter().map(|v| 0.5 * v).collect();
    // ascending order along the edge
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| pts[a][0].total_cmp(&pts[b][0]));
    pts = idx.iter().map(|&i| pts[i]).collect();
    wts = idx.iter().map(|&i| wts[i]).collect();
    Ok(QuadratureRule {
        points: pts,
        weights: wts,
        order,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn factorial(n: u32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    // ∫_T x^a y^b = a! b! / (a+b+2)!
    fn exact(a: u32, b: u32) -> f64 {
        factorial(a) * factorial(b) / factorial(a + b + 2)
    }

    #[test]
    fn triangle_rules_are_exact_to_their_order() {
        for order in 1..=6 {
            let r = triangle_rule(order).unwrap();
            assert!(r.weights.iter().all(|&w| w > 0.0));
            assert!((r.weights.iter().sum::<f64>() - 0.5).abs() < 1e-14);
            for a in 0..=order as u32 {
                for b in 0..=(order as u32 - a) {
                    let q: f64 = (0..r.len())
                        .map(|k| {
                            let [x, y] = r.xy(k);
                            r.weights[k] * x.powi(a as i32) * y.powi(b as i32)
                        })
                        .sum();
                    assert!(
                        (q - exact(a, b)).abs() < 1e-13,
                        "order {order} monomial x^{a} y^{b}: {q} vs {}",
                        exact(a, b)
                    );
                }
            }
        }
    }

    #[test]
    fn edge_rules_are_exact_to_their_order() {
        for order in 1..=8 {
            let r = edge_rule(order).unwrap();
            assert!(r.weights.iter().all(|&w| w > 0.0));
            assert!((r.weights.iter().sum::<f64>() - 1.0).abs() < 1e-14);
            for k in 0..=order as i32 {
                let q: f64 = (0..r.len()).map(|i| r.weights[i] * r.s(i).powi(k)).sum();
                assert!((q - 1.0 / (k as f64 + 1.0)).abs() < 1e-14);
            }
        }
        assert_eq!(edge_rule(1).unwrap().points[0][0], 0.5);
        assert_eq!(edge_rule(3).unwrap().len(), 2);
        assert_eq!(edge_rule(5).unwrap().len(), 3);
    }

    #[test]
    fn out_of_range_orders_are_rejected() {
        assert!(triangle_rule(0).is_err());
        assert!(triangle_rule(7).is_err());
        assert!(edge_rule(9).is_err());
    }
}
