//! Hopf and Ahlfors-Hopf differentials and a local holomorphy test.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, domain, Result};
use crate::fields::{fmt_f64, DerivedField};
use crate::functionals::truncated_exp;
use crate::geometry::Mesh;
use crate::sum::pairwise_sum;

/// `1 / (1 - |z|^2)^2`, defined on the open unit disk.
pub fn hyperbolic_weight(z: Complex64) -> Result<f64> {
    let r2 = z.norm_sqr();
    if !(r2 < 1.0) {
        return domain(format!("hyperbolic weight undefined at |z| = {}", r2.sqrt()));
    }
    Ok(1.0 / ((1.0 - r2) * (1.0 - r2)))
}

/// Like [`hyperbolic_weight`] but infinite outside the disk.
pub fn hyperbolic_weight_or_inf(z: Complex64) -> f64 {
    hyperbolic_weight(z).unwrap_or(f64::INFINITY)
}

/// Number of terms kept in the exponential series.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    Finite(u32),
    /// The full exponential.
    Infinite,
}

impl Truncation {
    fn order(&self) -> Option<u32> {
        match self {
            Truncation::Finite(n) => Some(*n),
            Truncation::Infinite => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HopfWeight {
    #[default]
    None,
    /// `1 / (1 - |h|^2)^2` at the image of the element centroid.
    Hyperbolic,
}

/// A per-triangle complex coefficient; triangles with `J <= 0` are flagged and hold 0.
#[derive(Debug, Clone)]
pub struct HopfField {
    mesh: Arc<Mesh>,
    pub values: Vec<Complex64>,
    pub flagged: Vec<bool>,
}

impl HopfField {
    pub fn new(mesh: Arc<Mesh>, values: Vec<Complex64>, flagged: Vec<bool>) -> Result<HopfField> {
        let n = mesh.triangle_count();
        if values.len() != n || flagged.len() != n {
            return config(format!("hopf field needs {n} values, got {} and {} flags", values.len(), flagged.len()));
        }
        Ok(HopfField { mesh, values, flagged })
    }

    /// Samples `f` at element centroids.
    pub fn from_fn(mesh: Arc<Mesh>, f: impl Fn(Complex64) -> Complex64) -> HopfField {
        let values = (0..mesh.triangle_count()).map(|t| f(mesh.centroid(t))).collect();
        let flagged = vec![false; mesh.triangle_count()];
        HopfField { mesh, values, flagged }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn flagged_count(&self) -> usize {
        self.flagged.iter().filter(|&&f| f).count()
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["tri_id", "re", "im", "area"])?;
        for (t, v) in self.values.iter().enumerate() {
            let row = if self.flagged[t] { [f64::NAN, f64::NAN] } else { [v.re, v.im] };
            w.write_record([t.to_string(), fmt_f64(row[0]), fmt_f64(row[1]), fmt_f64(self.mesh.areas()[t])])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

fn element_field(derived: &DerivedField, coefficient: impl Fn(usize) -> Result<f64>) -> Result<HopfField> {
    let n = derived.len();
    let mut values = Vec::with_capacity(n);
    let mut flagged = Vec::with_capacity(n);
    for t in 0..n {
        if derived.jacobian[t] > 0.0 {
            values.push(coefficient(t)? * derived.fz[t] * derived.fzbar[t].conj());
            flagged.push(false);
        } else {
            values.push(Complex64::new(0.0, 0.0));
            flagged.push(true);
        }
    }
    HopfField::new(derived.mesh().clone(), values, flagged)
}

/// `K^(p-1) h_w conj(h_wbar)` per triangle of the map `h` described by `derived`.
pub fn hopf_differential(derived: &DerivedField, p: f64) -> HopfField {
    element_field(derived, |t| Ok(derived.hs_distortion[t].powf(p - 1.0))).expect("sizes match by construction")
}

/// `S_N(p K) h_w conj(h_wbar) eta(h)` per triangle; `Truncation::Infinite` uses `exp(p K)`.
pub fn ahlfors_hopf(derived: &DerivedField, p: f64, truncation: Truncation, weight: HopfWeight) -> Result<HopfField> {
    if !(p > 0.0) {
        return config(format!("p must be positive, got {p}"));
    }
    element_field(derived, |t| {
        let eta = match weight {
            HopfWeight::None => 1.0,
            HopfWeight::Hyperbolic => hyperbolic_weight(derived.image_centroids[t])?,
        };
        Ok(truncated_exp(p * derived.hs_distortion[t], truncation.order()) * eta)
    })
}

/// Area-weighted aggregates of the local anti-holomorphic coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HolomorphyResidual {
    pub l1: f64,
    pub l2: f64,
    /// Interior vertices that were fitted.
    pub fitted: usize,
    /// Vertices skipped: on the boundary or with fewer than 3 usable triangles.
    pub skipped: usize,
}

/// Fits `c0 + c1 w + c2 conj(w)` to the centroid values around every interior
/// vertex and aggregates `|c2|` with weight one third of the star area.
pub fn holomorphy_residual(field: &HopfField) -> HolomorphyResidual {
    let mesh = field.mesh();
    let stars = mesh.node_stars();
    let fit = |v: usize| -> Option<(f64, f64)> {
        if mesh.is_boundary(v) {
            return None;
        }
        let star: Vec<usize> = stars[v].iter().copied().filter(|&t| !field.flagged[t]).collect();
        if star.len() < 3 {
            return None;
        }
        let origin = mesh.nodes()[v];
        let scale = star.iter().map(|&t| (mesh.centroid(t) - origin).norm()).fold(0.0, f64::max);
        let rows: Vec<([Complex64; 3], Complex64)> = star
            .iter()
            .map(|&t| {
                let w = (mesh.centroid(t) - origin) / scale;
                ([Complex64::new(1.0, 0.0), w, w.conj()], field.values[t])
            })
            .collect();
        let c2 = least_squares_3(&rows)?[2] / scale;
        let area: f64 = star.iter().map(|&t| mesh.areas()[t]).sum::<f64>() / 3.0;
        Some((c2.norm(), area))
    };
    let fits: Vec<Option<(f64, f64)>> = if mesh.node_count() >= 2048 {
        (0..mesh.node_count()).into_par_iter().map(fit).collect()
    } else {
        (0..mesh.node_count()).map(fit).collect()
    };
    let l1: Vec<f64> = fits.iter().flatten().map(|(r, a)| r * a).collect();
    let l2: Vec<f64> = fits.iter().flatten().map(|(r, a)| r * r * a).collect();
    let fitted = l1.len();
    HolomorphyResidual { l1: pairwise_sum(&l1), l2: pairwise_sum(&l2).sqrt(), fitted, skipped: mesh.node_count() - fitted }
}

/// Complex least squares for three unknowns via the normal equations.
fn least_squares_3(rows: &[([Complex64; 3], Complex64)]) -> Option<[Complex64; 3]> {
    let zero = Complex64::new(0.0, 0.0);
    let mut m = [[zero; 4]; 3];
    for (a, v) in rows {
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += a[i].conj() * a[j];
            }
            m[i][3] += a[i].conj() * v;
        }
    }
    for col in 0..3 {
        let pivot = (col..3).max_by(|&a, &b| m[a][col].norm().total_cmp(&m[b][col].norm()))?;
        if m[pivot][col].norm() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        for r in 0..3 {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..4 {
                    let sub = f * m[col][c];
                    m[r][c] -= sub;
                }
            }
        }
    }
    Some([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}

/// `max |a - b|` over the given triangles; flagged triangles count as infinite.
pub fn sup_gap(a: &HopfField, b: &HopfField, triangles: &[usize]) -> f64 {
    triangles
        .iter()
        .map(|&t| if a.flagged[t] || b.flagged[t] { f64::INFINITY } else { (a.values[t] - b.values[t]).norm() })
        .fold(0.0, f64::max)
}

/// `sum |Psi| |T|` over unflagged triangles.
pub fn l1_norm(field: &HopfField) -> f64 {
    let terms: Vec<f64> =
        (0..field.values.len()).map(|t| if field.flagged[t] { 0.0 } else { field.values[t].norm() * field.mesh.areas()[t] }).collect();
    pairwise_sum(&terms)
}

/// Triangles with no vertex on the boundary.
pub fn interior_triangles(mesh: &Mesh) -> Vec<usize> {
    mesh.interior_triangles()
}
