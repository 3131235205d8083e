//! Symmetric elimination of essential boundary conditions.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::fespace::BcSet;
use crate::sparse::CsrMatrix;

use super::{Spaces, Unknown};

/// Prescribed values on global dofs, sorted by dof.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct DirichletData {
    pub entries: Vec<(usize, f64)>,
}

impl DirichletData {
    /// Merges per-space sets into global numbering. Two sets prescribing
    /// different values on one dof raise `BcConflict`.
    pub fn from_sets(spaces: &Spaces, sets: &[(Unknown, BcSet)]) -> Result<Self> {
        let off = spaces.offsets();
        let mut m: BTreeMap<usize, f64> = BTreeMap::new();
        for (u, set) in sets {
            let o = off[u.index()];
            let n = spaces.get(*u).dim();
            for &(d, v) in &set.entries {
                if d >= n {
                    return Err(Error::Argument(format!("dof {d} out of range for {}", u.name())));
                }
                if let Some(&old) = m.get(&(o + d)) {
                    if old != v {
                        return Err(Error::BcConflict { dof: o + d, first: old, second: v });
                    }
                }
                m.insert(o + d, v);
            }
        }
        Ok(DirichletData {
            entries: m.into_iter().collect(),
        })
    }

    pub fn dofs(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.0).collect()
    }
}

/// Matrix with constrained rows and columns replaced by the identity, and the
/// removed columns kept to lift the right-hand side.
#[derive(Clone, Debug)]
pub struct ConstrainedMatrix {
    pub matrix: CsrMatrix,
    lift: CsrMatrix,
    dofs: Vec<usize>,
    mask: Vec<bool>,
}

/// Zeroes constrained rows and columns of `a` and puts 1 on their diagonal.
pub fn apply_dirichlet(a: &CsrMatrix, dofs: &[usize]) -> Result<ConstrainedMatrix> {
    let n = a.nrows();
    let mut mask = vec![false; n];
    for &d in dofs {
        if d >= n {
            return Err(Error::Argument(format!("constrained dof {d} out of range {n}")));
        }
        mask[d] = true;
    }
    let mut kept = Vec::with_capacity(a.nnz() + dofs.len());
    let mut lift = Vec::new();
    for (i, j, v) in a.triplets() {
        if mask[i] {
            continue;
        }
        if mask[j] {
            lift.push((i, j, v));
        } else {
            kept.push((i, j, v));
        }
    }
    kept.extend(dofs.iter().map(|&d| (d, d, 1.0)));
    let mut sorted = dofs.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    Ok(ConstrainedMatrix {
        matrix: CsrMatrix::from_triplets(n, n, &kept),
        lift: CsrMatrix::from_triplets(n, n, &lift),
        dofs: sorted,
        mask,
    })
}

impl ConstrainedMatrix {
    pub fn is_constrained(&self, i: usize) -> bool {
        self.mask[i]
    }

    pub fn constrained_dofs(&self) -> &[usize] {
        &self.dofs
    }

    /// `rhs_i -= Σ_c A_ic g_c` on free rows and `rhs_c = g_c` on constrained
    /// rows. The data must constrain exactly the dofs the matrix was built for.
    pub fn constrain_rhs(&self, rhs: &mut [f64], bc: &DirichletData) -> Result<()> {
        if bc.entries.len() != self.dofs.len() || bc.entries.iter().zip(&self.dofs).any(|(e, &d)| e.0 != d) {
            return Err(Error::Argument("boundary data does not match the constrained dofs".into()));
        }
        let mut g = vec![0.0; rhs.len()];
        for &(d, v) in &bc.entries {
            g[d] = v;
        }
        self.lift.mul_vec_add(-1.0, &g, rhs);
        for &(d, v) in &bc.entries {
            rhs[d] = v;
        }
        Ok(())
    }
}
