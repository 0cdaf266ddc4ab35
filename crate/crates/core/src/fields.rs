//! Discrete mappings and their per-element differential quantities.
//!
//! A [`MappingField`] is a continuous piecewise-affine map given by its nodal
//! values. On each triangle it is `f(z) = a z + b conj(z) + c`, so the
//! Wirtinger derivatives `f_z = a`, `f_zbar = b` are element constants and every
//! pointwise quantity derived from them (Jacobian, distortions, Beltrami
//! coefficient) is exact per element.

use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::geometry::Mesh;
use crate::sequences::AnalyticMap;
use crate::sum::pairwise_sum_by;

/// Below this many triangles element loops stay on the calling thread.
pub(crate) const PAR_THRESHOLD: usize = 4096;

/// Nodal values of a piecewise-affine map on a mesh.
#[derive(Debug, Clone)]
pub struct MappingField {
    mesh: Arc<Mesh>,
    values: Vec<Complex64>,
}

impl MappingField {
    pub fn new(mesh: Arc<Mesh>, values: Vec<Complex64>) -> Result<MappingField> {
        if values.len() != mesh.node_count() {
            return config(format!("mapping has {} values for a mesh with {} nodes", values.len(), mesh.node_count()));
        }
        if let Some(i) = values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::Domain(format!("non-finite mapping value at node {i}")));
        }
        Ok(MappingField { mesh, values })
    }

    /// Evaluate `f` at every node.
    pub fn from_fn(mesh: Arc<Mesh>, f: impl Fn(Complex64) -> Complex64) -> Result<MappingField> {
        let values = mesh.nodes().iter().map(|&z| f(z)).collect();
        MappingField::new(mesh, values)
    }

    pub fn identity(mesh: Arc<Mesh>) -> MappingField {
        let values = mesh.nodes().to_vec();
        MappingField { mesh, values }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Same mesh, new values.
    pub fn with_values(&self, values: Vec<Complex64>) -> Result<MappingField> {
        MappingField::new(self.mesh.clone(), values)
    }

    pub fn scaled(&self, c: Complex64) -> MappingField {
        MappingField { mesh: self.mesh.clone(), values: self.values.iter().map(|v| c * v).collect() }
    }

    /// Largest nodal distance to another field on the same mesh.
    pub fn max_distance(&self, other: &MappingField) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Image of the centroid of triangle `t` under the affine element map.
    pub fn image_centroid(&self, t: usize) -> Complex64 {
        let [a, b, c] = self.mesh.triangles()[t];
        (self.values[a] + self.values[b] + self.values[c]) / 3.0
    }
}

/// Coefficients turning nodal values into element Wirtinger derivatives:
/// `f_z = sum_k dz[k] w_k` and `f_zbar = sum_k dzbar[k] w_k`.
#[derive(Debug, Clone, Copy)]
pub struct WirtingerStencil {
    pub dz: [Complex64; 3],
    pub dzbar: [Complex64; 3],
}

impl WirtingerStencil {
    pub fn new(mesh: &Mesh, t: usize) -> WirtingerStencil {
        let [i0, i1, i2] = mesh.triangles()[t];
        let nodes = mesh.nodes();
        let e1 = nodes[i1] - nodes[i0];
        let e2 = nodes[i2] - nodes[i0];
        // e1 conj(e2) - e2 conj(e1) = -4i * area
        let det = e1 * e2.conj() - e2 * e1.conj();
        let a1 = e2.conj() / det;
        let a2 = -e1.conj() / det;
        let b1 = -e2 / det;
        let b2 = e1 / det;
        WirtingerStencil { dz: [-(a1 + a2), a1, a2], dzbar: [-(b1 + b2), b1, b2] }
    }

    pub fn apply(&self, w: [Complex64; 3]) -> (Complex64, Complex64) {
        let fz = self.dz[0] * w[0] + self.dz[1] * w[1] + self.dz[2] * w[2];
        let fzbar = self.dzbar[0] * w[0] + self.dzbar[1] * w[1] + self.dzbar[2] * w[2];
        (fz, fzbar)
    }
}

/// Per-element differential data of a [`MappingField`].
#[derive(Debug, Clone)]
pub struct DerivedField {
    mesh: Arc<Mesh>,
    pub fz: Vec<Complex64>,
    pub fzbar: Vec<Complex64>,
    /// `|f_z|^2 - |f_zbar|^2`
    pub jacobian: Vec<f64>,
    /// `2(|f_z|^2 + |f_zbar|^2) / J`, infinite where `J <= 0`.
    pub hs_distortion: Vec<f64>,
    /// `(|f_z| + |f_zbar|)^2 / J`, infinite where `J <= 0`.
    pub op_distortion: Vec<f64>,
    /// `f_zbar / f_z`; `None` where `f_z = 0`.
    pub beltrami: Vec<Option<Complex64>>,
    /// Image of each element centroid.
    pub image_centroids: Vec<Complex64>,
}

/// Quantities at one element, from its Wirtinger derivatives.
#[derive(Debug, Clone, Copy)]
pub struct ElementQuantities {
    pub jacobian: f64,
    pub hs_distortion: f64,
    pub op_distortion: f64,
    pub beltrami: Option<Complex64>,
}

impl ElementQuantities {
    pub fn from_wirtinger(fz: Complex64, fzbar: Complex64) -> ElementQuantities {
        let (a2, b2) = (fz.norm_sqr(), fzbar.norm_sqr());
        let jacobian = a2 - b2;
        let (hs_distortion, op_distortion) = if jacobian > 0.0 {
            let op = fz.norm() + fzbar.norm();
            (2.0 * (a2 + b2) / jacobian, op * op / jacobian)
        } else {
            (f64::INFINITY, f64::INFINITY)
        };
        // |f_z| at rounding level relative to |f_zbar| counts as zero
        let beltrami = if fz.norm() <= 1e-14 * fzbar.norm() || fz == Complex64::new(0.0, 0.0) { None } else { Some(fzbar / fz) };
        ElementQuantities { jacobian, hs_distortion, op_distortion, beltrami }
    }
}

/// Wirtinger derivatives and everything derived from them, per triangle.
pub fn wirtinger_derivatives(mapping: &MappingField) -> DerivedField {
    let mesh = mapping.mesh().clone();
    let values = mapping.values();
    let element = |t: usize| {
        let [i0, i1, i2] = mesh.triangles()[t];
        let (fz, fzbar) = WirtingerStencil::new(&mesh, t).apply([values[i0], values[i1], values[i2]]);
        (fz, fzbar, ElementQuantities::from_wirtinger(fz, fzbar), mapping.image_centroid(t))
    };
    let n = mesh.triangle_count();
    let rows: Vec<_> = if n >= PAR_THRESHOLD { (0..n).into_par_iter().map(element).collect() } else { (0..n).map(element).collect() };
    let mut out = DerivedField {
        mesh: mesh.clone(),
        fz: Vec::with_capacity(n),
        fzbar: Vec::with_capacity(n),
        jacobian: Vec::with_capacity(n),
        hs_distortion: Vec::with_capacity(n),
        op_distortion: Vec::with_capacity(n),
        beltrami: Vec::with_capacity(n),
        image_centroids: Vec::with_capacity(n),
    };
    for (fz, fzbar, q, c) in rows {
        out.fz.push(fz);
        out.fzbar.push(fzbar);
        out.jacobian.push(q.jacobian);
        out.hs_distortion.push(q.hs_distortion);
        out.op_distortion.push(q.op_distortion);
        out.beltrami.push(q.beltrami);
        out.image_centroids.push(c);
    }
    out
}

impl DerivedField {
    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn len(&self) -> usize {
        self.fz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fz.is_empty()
    }

    pub fn areas(&self) -> &[f64] {
        self.mesh.areas()
    }

    pub fn min_jacobian(&self) -> (usize, f64) {
        self.jacobian.iter().copied().enumerate().fold((0, f64::INFINITY), |best, (t, j)| if j < best.1 { (t, j) } else { best })
    }

    /// Write one CSV row per triangle.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["tri_id", "re_fz", "im_fz", "re_fzbar", "im_fzbar", "J", "K_hs", "K_op", "re_mu", "im_mu", "area"])?;
        for t in 0..self.len() {
            let mu = self.beltrami[t].unwrap_or(Complex64::new(f64::NAN, f64::NAN));
            let row = [
                self.fz[t].re,
                self.fz[t].im,
                self.fzbar[t].re,
                self.fzbar[t].im,
                self.jacobian[t],
                self.hs_distortion[t],
                self.op_distortion[t],
                mu.re,
                mu.im,
                self.areas()[t],
            ];
            let mut rec = vec![t.to_string()];
            rec.extend(row.iter().map(|v| fmt_f64(*v)));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_csv_file(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Floats in text outputs carry 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.16e}")
    }
}

/// Summary of orientation and distortion over a mesh.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FiniteDistortionReport {
    /// Triangles with `J <= 0`.
    pub degenerate_count: usize,
    pub degenerate_area: f64,
    pub total_area: f64,
    /// Max of the operator distortion over triangles with `J > 0`.
    pub ess_sup_distortion: f64,
    /// Area-weighted mean of the Hilbert-Schmidt distortion over `J > 0`.
    pub mean_hs_distortion: f64,
    pub mean_jacobian: f64,
    pub has_finite_distortion: bool,
}

pub fn finite_distortion_report(derived: &DerivedField) -> FiniteDistortionReport {
    let areas = derived.areas();
    let n = derived.len();
    let good = |t: usize| derived.jacobian[t] > 0.0;
    let degenerate_count = (0..n).filter(|&t| !good(t)).count();
    let degenerate_area = pairwise_sum_by(n, &|t| if good(t) { 0.0 } else { areas[t] });
    let total_area = pairwise_sum_by(n, &|t| areas[t]);
    let good_area = total_area - degenerate_area;
    let ess_sup_distortion = (0..n).filter(|&t| good(t)).map(|t| derived.op_distortion[t]).fold(f64::NEG_INFINITY, f64::max);
    let mean_hs_distortion = if good_area > 0.0 {
        pairwise_sum_by(n, &|t| if good(t) { derived.hs_distortion[t] * areas[t] } else { 0.0 }) / good_area
    } else {
        f64::NAN
    };
    let mean_jacobian = pairwise_sum_by(n, &|t| derived.jacobian[t] * areas[t]) / total_area;
    FiniteDistortionReport {
        degenerate_count,
        degenerate_area,
        total_area,
        ess_sup_distortion,
        mean_hs_distortion,
        mean_jacobian,
        has_finite_distortion: degenerate_area == 0.0,
    }
}

/// Sample a closed-form map at the mesh nodes.
pub fn sample_analytic(mesh: Arc<Mesh>, map: &AnalyticMap) -> Result<MappingField> {
    map.validate()?;
    let values: Vec<Complex64> = if mesh.node_count() >= PAR_THRESHOLD {
        mesh.nodes().par_iter().map(|&z| map.eval(z)).collect()
    } else {
        mesh.nodes().iter().map(|&z| map.eval(z)).collect()
    };
    MappingField::new(mesh, values)
}
