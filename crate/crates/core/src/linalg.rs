//! Sparse symmetric matrices and preconditioned conjugate gradients.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fields::WirtingerStencil;
use crate::geometry::Mesh;

/// Compressed sparse row matrix.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<f64>,
}

impl CsrMatrix {
    /// Sums duplicate entries; rows and columns come out sorted.
    pub fn from_triplets(n: usize, triplets: impl IntoIterator<Item = (usize, usize, f64)>) -> CsrMatrix {
        let mut rows: Vec<BTreeMap<usize, f64>> = vec![BTreeMap::new(); n];
        for (i, j, v) in triplets {
            *rows[i].entry(j).or_insert(0.0) += v;
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for row in rows {
            for (j, v) in row {
                cols.push(j);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        CsrMatrix { n, row_ptr, cols, vals }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn mul(&self, x: &[f64], out: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.vals[k] * x[self.cols[k]];
            }
            out[i] = s;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| (self.row_ptr[i]..self.row_ptr[i + 1]).find(|&k| self.cols[k] == i).map_or(0.0, |k| self.vals[k])).collect()
    }

    /// Entry `(i, j)`, zero when not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()].binary_search(&j).map_or(0.0, |k| self.vals[range.start + k])
    }

    /// Jacobi-preconditioned CG for symmetric positive definite systems.
    pub fn solve_cg(&self, b: &[f64], tol: f64, max_iter: usize) -> Result<Vec<f64>> {
        let n = self.n;
        let diag = self.diagonal();
        if diag.iter().any(|d| !(*d > 0.0)) {
            return Err(Error::Internal("matrix has a non-positive diagonal".into()));
        }
        let mut x = vec![0.0; n];
        let mut r = b.to_vec();
        let b_norm = dot(b, b).sqrt();
        if b_norm == 0.0 {
            return Ok(x);
        }
        let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut ap = vec![0.0; n];
        for _ in 0..max_iter {
            self.mul(&p, &mut ap);
            let alpha = rz / dot(&p, &ap);
            for i in 0..n {
                x[i] += alpha * p[i];
                r[i] -= alpha * ap[i];
            }
            if dot(&r, &r).sqrt() <= tol * b_norm {
                return Ok(x);
            }
            for i in 0..n {
                z[i] = r[i] / diag[i];
            }
            let rz_new = dot(&r, &z);
            let beta = rz_new / rz;
            rz = rz_new;
            for i in 0..n {
                p[i] = z[i] + beta * p[i];
            }
        }
        Err(Error::Internal(format!("conjugate gradients did not reach {tol:e} in {max_iter} iterations")))
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// P1 stiffness matrix `K_ij = int grad phi_i . grad phi_j`.
pub fn stiffness_matrix(mesh: &Mesh) -> CsrMatrix {
    let mut triplets = Vec::with_capacity(9 * mesh.triangle_count());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let st = WirtingerStencil::new(mesh, t);
        let area = mesh.areas()[t];
        for i in 0..3 {
            for j in 0..3 {
                // |grad u|^2 = 4 |u_z|^2 for real u
                let v = 4.0 * area * (st.dz[i] * st.dz[j].conj()).re;
                triplets.push((tri[i], tri[j], v));
            }
        }
    }
    CsrMatrix::from_triplets(mesh.node_count(), triplets)
}

/// The stiffness matrix restricted to interior nodes, with the index maps.
#[derive(Debug, Clone)]
pub struct InteriorSystem {
    pub matrix: CsrMatrix,
    /// Interior node of each reduced row.
    pub interior: Vec<usize>,
    /// Reduced row of each node, `None` on the boundary.
    pub position: Vec<Option<usize>>,
}

impl InteriorSystem {
    pub fn new(mesh: &Mesh) -> InteriorSystem {
        let full = stiffness_matrix(mesh);
        let interior: Vec<usize> = (0..mesh.node_count()).filter(|&v| !mesh.is_boundary(v)).collect();
        let mut position = vec![None; mesh.node_count()];
        for (k, &v) in interior.iter().enumerate() {
            position[v] = Some(k);
        }
        let mut triplets = Vec::new();
        for (k, &v) in interior.iter().enumerate() {
            for idx in full.row_ptr[v]..full.row_ptr[v + 1] {
                if let Some(m) = position[full.cols[idx]] {
                    triplets.push((k, m, full.vals[idx]));
                }
            }
        }
        InteriorSystem { matrix: CsrMatrix::from_triplets(interior.len(), triplets), interior, position }
    }

    /// Solves `K_II x = rhs` for a complex right-hand side, one real solve per component.
    pub fn solve_complex(&self, rhs: &[Complex64]) -> Result<Vec<Complex64>> {
        let re: Vec<f64> = rhs.iter().map(|c| c.re).collect();
        let im: Vec<f64> = rhs.iter().map(|c| c.im).collect();
        let max_iter = 10 * self.matrix.dim() + 100;
        let xr = self.matrix.solve_cg(&re, 1e-12, max_iter)?;
        let xi = self.matrix.solve_cg(&im, 1e-12, max_iter)?;
        Ok(xr.into_iter().zip(xi).map(|(r, i)| Complex64::new(r, i)).collect())
    }
}

/// Discrete harmonic extension of the boundary values already stored in `values`.
pub fn harmonic_extension(mesh: &Mesh, values: &mut [Complex64]) -> Result<()> {
    let full = stiffness_matrix(mesh);
    let system = InteriorSystem::new(mesh);
    if system.interior.is_empty() {
        return Ok(());
    }
    let rhs: Vec<Complex64> = system
        .interior
        .iter()
        .map(|&v| {
            let mut s = Complex64::new(0.0, 0.0);
            for idx in full.row_ptr[v]..full.row_ptr[v + 1] {
                let u = full.cols[idx];
                if mesh.is_boundary(u) {
                    s -= full.vals[idx] * values[u];
                }
            }
            s
        })
        .collect();
    let x = system.solve_complex(&rhs)?;
    for (k, &v) in system.interior.iter().enumerate() {
        values[v] = x[k];
    }
    Ok(())
}
