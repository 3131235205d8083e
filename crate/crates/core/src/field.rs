//! Scalar coefficient fields: constants, P1 nodal data on mesh vertices, and
//! pointwise combinations of those.

use std::fmt;
use std::sync::Arc;

type Expr = dyn Fn([usize; 3], [f64; 3]) -> f64 + Send + Sync;

#[derive(Clone)]
pub enum ScalarField {
    Constant(f64),
    /// One value per mesh vertex, linear on each triangle.
    Nodal(Arc<[f64]>),
    /// Pointwise expression of the triangle's vertex ids and barycentric point.
    Composite(Arc<Expr>),
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Constant(c) => write!(f, "Constant({c})"),
            ScalarField::Nodal(v) => write!(f, "Nodal({} values)", v.len()),
            ScalarField::Composite(_) => f.write_str("Composite"),
        }
    }
}

impl From<f64> for ScalarField {
    fn from(c: f64) -> Self {
        ScalarField::Constant(c)
    }
}

impl ScalarField {
    pub fn nodal(values: Vec<f64>) -> Self {
        ScalarField::Nodal(values.into())
    }

    pub fn constant(&self) -> Option<f64> {
        match self {
            ScalarField::Constant(c) => Some(*c),
            _ => None,
        }
    }

    /// Value at barycentric point `l` of the triangle with vertices `tri`.
    #[inline]
    pub fn at(&self, tri: [usize; 3], l: [f64; 3]) -> f64 {
        match self {
            ScalarField::Constant(c) => *c,
            ScalarField::Nodal(v) => l[0] * v[tri[0]] + l[1] * v[tri[1]] + l[2] * v[tri[2]],
            ScalarField::Composite(f) => f(tri, l),
        }
    }

    /// Gradient on a triangle given the physical gradients of its barycentric
    /// coordinates. `None` for composite fields.
    pub fn grad(&self, tri: [usize; 3], gl: &[[f64; 2]; 3]) -> Option<[f64; 2]> {
        match self {
            ScalarField::Constant(_) => Some([0.0, 0.0]),
            ScalarField::Nodal(v) => {
                let mut g = [0.0; 2];
                for k in 0..3 {
                    g[0] += v[tri[k]] * gl[k][0];
                    g[1] += v[tri[k]] * gl[k][1];
                }
                Some(g)
            }
            ScalarField::Composite(_) => None,
        }
    }

    /// Pointwise `f(self)`.
    pub fn map(&self, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> ScalarField {
        match self {
            ScalarField::Constant(c) => ScalarField::Constant(f(*c)),
            other => {
                let a = other.clone();
                ScalarField::Composite(Arc::new(move |t, l| f(a.at(t, l))))
            }
        }
    }

    /// Pointwise `f(self, other)`.
    pub fn zip(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> ScalarField {
        match (self, other) {
            (ScalarField::Constant(a), ScalarField::Constant(b)) => ScalarField::Constant(f(*a, *b)),
            _ => {
                let (a, b) = (self.clone(), other.clone());
                ScalarField::Composite(Arc::new(move |t, l| f(a.at(t, l), b.at(t, l))))
            }
        }
    }

    pub fn scale(&self, s: f64) -> ScalarField {
        self.map(move |v| s * v)
    }

    /// Value at a mesh vertex.
    pub fn at_vertex(&self, v: usize) -> f64 {
        match self {
            ScalarField::Constant(c) => *c,
            ScalarField::Nodal(x) => x[v],
            ScalarField::Composite(f) => f([v, v, v], [1.0, 0.0, 0.0]),
        }
    }
}
