//! Triangle meshes of planar domains: the unit disk and axis-aligned rectangles.
//!
//! Meshes are immutable once built. Refinement quadrisects every triangle; on
//! the disk, midpoints of boundary edges are pushed radially onto the unit
//! circle so boundary node sets of coarser levels are contained in finer ones.

use std::collections::HashMap;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{config, Error, Result};
use crate::sum::pairwise_sum;

/// Largest refinement level accepted by the constructors.
pub const MAX_LEVEL: u32 = 10;

/// Tolerance used to identify boundary nodes of rectangles.
const BOUNDARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Domain {
    /// The open unit disk.
    Disk,
    /// The rectangle `[lo.re, hi.re] x [lo.im, hi.im]`.
    Rect { lo: [f64; 2], hi: [f64; 2] },
}

impl Domain {
    /// Exact measure of the continuous domain.
    pub fn area(&self) -> f64 {
        match *self {
            Domain::Disk => std::f64::consts::PI,
            Domain::Rect { lo, hi } => (hi[0] - lo[0]) * (hi[1] - lo[1]),
        }
    }

    /// Affine map of the bounding box onto `[-1, 1]^2`.
    pub fn to_reference_box(&self, z: Complex64) -> (f64, f64) {
        match *self {
            Domain::Disk => (z.re, z.im),
            Domain::Rect { lo, hi } => (2.0 * (z.re - lo[0]) / (hi[0] - lo[0]) - 1.0, 2.0 * (z.im - lo[1]) / (hi[1] - lo[1]) - 1.0),
        }
    }

    /// A smooth cutoff that vanishes on the boundary and is positive inside.
    pub fn cutoff(&self, z: Complex64) -> f64 {
        match *self {
            Domain::Disk => (1.0 - z.norm_sqr()).max(0.0),
            Domain::Rect { .. } => {
                let (x, y) = self.to_reference_box(z);
                ((1.0 - x * x) * (1.0 - y * y)).max(0.0)
            }
        }
    }
}

/// A conforming triangulation with positively oriented triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    domain: Domain,
    nodes: Vec<Complex64>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<usize>,
    is_boundary: Vec<bool>,
    areas: Vec<f64>,
    level: u32,
}

fn signed_area(a: Complex64, b: Complex64, c: Complex64) -> f64 {
    let e1 = b - a;
    let e2 = c - a;
    0.5 * (e1.re * e2.im - e1.im * e2.re)
}

impl Mesh {
    fn assemble(domain: Domain, nodes: Vec<Complex64>, triangles: Vec<[usize; 3]>, mut boundary: Vec<usize>, level: u32) -> Result<Mesh> {
        boundary.sort_unstable();
        boundary.dedup();
        let mut is_boundary = vec![false; nodes.len()];
        for &b in &boundary {
            if b >= nodes.len() {
                return config(format!("boundary index {b} out of range"));
            }
            is_boundary[b] = true;
        }
        let mut areas = Vec::with_capacity(triangles.len());
        for (t, tri) in triangles.iter().enumerate() {
            if tri.iter().any(|&i| i >= nodes.len()) {
                return config(format!("triangle {t} references a missing node"));
            }
            let a = signed_area(nodes[tri[0]], nodes[tri[1]], nodes[tri[2]]);
            if !(a > 0.0) {
                return Err(Error::Internal(format!("triangle {t} is not positively oriented (signed area {a:e})")));
            }
            areas.push(a);
        }
        Ok(Mesh { domain, nodes, triangles, boundary, is_boundary, areas, level })
    }

    /// Hexagon fan on the unit circle, refined `level` times.
    pub fn disk(level: u32) -> Result<Mesh> {
        if level > MAX_LEVEL {
            return config(format!("refinement level {level} exceeds {MAX_LEVEL}"));
        }
        let mut nodes = vec![Complex64::new(0.0, 0.0)];
        for k in 0..6 {
            let theta = k as f64 * std::f64::consts::PI / 3.0;
            nodes.push(Complex64::new(theta.cos(), theta.sin()));
        }
        let triangles = (0..6).map(|k| [0, 1 + k, 1 + (k + 1) % 6]).collect();
        let mut mesh = Mesh::assemble(Domain::Disk, nodes, triangles, (1..7).collect(), 0)?;
        for _ in 0..level {
            mesh = mesh.refine()?;
        }
        Ok(mesh)
    }

    /// Structured `nx` by `ny` grid on a rectangle, every cell split along the
    /// same diagonal.
    pub fn rect(nx: usize, ny: usize, lo: Complex64, hi: Complex64) -> Result<Mesh> {
        if nx == 0 || ny == 0 {
            return config("rectangle mesh needs nx >= 1 and ny >= 1");
        }
        if !(hi.re > lo.re && hi.im > lo.im) || !(lo.re.is_finite() && hi.re.is_finite()) {
            return config(format!("degenerate rectangle {lo} .. {hi}"));
        }
        let dx = (hi.re - lo.re) / nx as f64;
        let dy = (hi.im - lo.im) / ny as f64;
        let idx = |i: usize, j: usize| j * (nx + 1) + i;
        let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
        let mut boundary = Vec::new();
        for j in 0..=ny {
            for i in 0..=nx {
                // Pin the last row/column to the exact corner coordinates.
                let x = if i == nx { hi.re } else { lo.re + i as f64 * dx };
                let y = if j == ny { hi.im } else { lo.im + j as f64 * dy };
                if i == 0 || j == 0 || i == nx || j == ny {
                    boundary.push(idx(i, j));
                }
                nodes.push(Complex64::new(x, y));
            }
        }
        let mut triangles = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let (v00, v10, v01, v11) = (idx(i, j), idx(i + 1, j), idx(i, j + 1), idx(i + 1, j + 1));
                triangles.push([v00, v10, v11]);
                triangles.push([v00, v11, v01]);
            }
        }
        let domain = Domain::Rect { lo: [lo.re, lo.im], hi: [hi.re, hi.im] };
        Mesh::assemble(domain, nodes, triangles, boundary, 0)
    }

    /// Unit square `[0,1]^2`.
    pub fn unit_square(nx: usize, ny: usize) -> Result<Mesh> {
        Mesh::rect(nx, ny, Complex64::new(0.0, 0.0), Complex64::new(1.0, 1.0))
    }

    /// Quadrisect every triangle.
    pub fn refine(&self) -> Result<Mesh> {
        if self.level >= MAX_LEVEL {
            return config(format!("refinement level {} exceeds {MAX_LEVEL}", self.level + 1));
        }
        let boundary_edges = self.boundary_edges();
        let mut nodes = self.nodes.clone();
        let mut boundary = self.boundary.clone();
        let mut midpoints: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, nodes: &mut Vec<Complex64>| -> usize {
            let key = (a.min(b), a.max(b));
            if let Some(&m) = midpoints.get(&key) {
                return m;
            }
            let mut z = 0.5 * (nodes[a] + nodes[b]);
            let on_boundary = boundary_edges.contains_key(&key);
            if on_boundary {
                if self.domain == Domain::Disk {
                    z /= z.norm();
                }
                boundary.push(nodes.len());
            }
            nodes.push(z);
            midpoints.insert(key, nodes.len() - 1);
            nodes.len() - 1
        };
        let mut triangles = Vec::with_capacity(4 * self.triangles.len());
        for &[a, b, c] in &self.triangles {
            let ab = midpoint(a, b, &mut nodes);
            let bc = midpoint(b, c, &mut nodes);
            let ca = midpoint(c, a, &mut nodes);
            triangles.push([a, ab, ca]);
            triangles.push([ab, b, bc]);
            triangles.push([ca, bc, c]);
            triangles.push([ab, bc, ca]);
        }
        Mesh::assemble(self.domain, nodes, triangles, boundary, self.level + 1)
    }

    /// Refine `levels` times.
    pub fn refined(&self, levels: u32) -> Result<Mesh> {
        let mut mesh = self.clone();
        for _ in 0..levels {
            mesh = mesh.refine()?;
        }
        Ok(mesh)
    }

    /// Edges that belong to exactly one triangle, keyed by sorted node pair.
    fn boundary_edges(&self) -> HashMap<(usize, usize), usize> {
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                *count.entry((a.min(b), a.max(b))).or_default() += 1;
            }
        }
        count.retain(|_, c| *c == 1);
        count
    }

    pub fn domain(&self) -> Domain {
        self.domain
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    /// Sorted indices of boundary nodes.
    pub fn boundary_nodes(&self) -> &[usize] {
        &self.boundary
    }

    pub fn is_boundary(&self, node: usize) -> bool {
        self.is_boundary[node]
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn triangle_count(&self) -> usize {
        self.triangles.len()
    }

    /// Element areas, computed once at construction.
    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    pub fn total_area(&self) -> f64 {
        pairwise_sum(&self.areas)
    }

    pub fn centroid(&self, t: usize) -> Complex64 {
        let [a, b, c] = self.triangles[t];
        (self.nodes[a] + self.nodes[b] + self.nodes[c]) / 3.0
    }

    pub fn centroids(&self) -> Vec<Complex64> {
        (0..self.triangles.len()).map(|t| self.centroid(t)).collect()
    }

    /// Longest edge over all triangles.
    pub fn mesh_size(&self) -> f64 {
        self.triangles
            .iter()
            .flat_map(|t| (0..3).map(move |k| (t[k], t[(k + 1) % 3])))
            .map(|(a, b)| (self.nodes[a] - self.nodes[b]).norm())
            .fold(0.0, f64::max)
    }

    /// Lumped (one third of each incident triangle) area per node.
    pub fn lumped_node_areas(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.nodes.len()];
        for (tri, &a) in self.triangles.iter().zip(&self.areas) {
            for &v in tri {
                out[v] += a / 3.0;
            }
        }
        out
    }

    /// Triangles incident to each node, in increasing triangle order.
    pub fn node_stars(&self) -> Vec<Vec<usize>> {
        let mut stars = vec![Vec::new(); self.nodes.len()];
        for (t, tri) in self.triangles.iter().enumerate() {
            for &v in tri {
                stars[v].push(t);
            }
        }
        stars
    }

    /// Indices of all triangles, the default "whole domain" subset.
    pub fn all_triangles(&self) -> Vec<usize> {
        (0..self.triangles.len()).collect()
    }

    /// Triangles whose centroid lies at distance at least `radius` from `center`.
    pub fn triangles_outside(&self, center: Complex64, radius: f64) -> Vec<usize> {
        (0..self.triangles.len()).filter(|&t| (self.centroid(t) - center).norm() >= radius).collect()
    }

    /// Triangles none of whose vertices is a boundary node.
    pub fn interior_triangles(&self) -> Vec<usize> {
        (0..self.triangles.len()).filter(|&t| self.triangles[t].iter().all(|&v| !self.is_boundary[v])).collect()
    }

    pub fn to_json(&self) -> MeshJson {
        MeshJson {
            nodes: self.nodes.iter().map(|z| [z.re, z.im]).collect(),
            triangles: self.triangles.clone(),
            boundary: self.boundary.clone(),
            level: self.level,
            domain: Some(self.domain),
        }
    }

    pub fn from_json(doc: MeshJson) -> Result<Mesh> {
        let domain = doc.domain.unwrap_or_else(|| infer_domain(&doc.nodes, &doc.boundary));
        let nodes = doc.nodes.iter().map(|p| Complex64::new(p[0], p[1])).collect();
        Mesh::assemble(domain, nodes, doc.triangles, doc.boundary, doc.level)
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer(file, &self.to_json())?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Mesh> {
        let file = std::io::BufReader::new(std::fs::File::open(path)?);
        Mesh::from_json(serde_json::from_reader(file)?)
    }
}

fn infer_domain(nodes: &[[f64; 2]], boundary: &[usize]) -> Domain {
    let on_circle = |p: &[f64; 2]| ((p[0] * p[0] + p[1] * p[1]).sqrt() - 1.0).abs() < BOUNDARY_TOL;
    if boundary.len() >= 6 && boundary.iter().all(|&v| nodes.get(v).is_some_and(on_circle)) {
        return Domain::Disk;
    }
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in nodes {
        for k in 0..2 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    Domain::Rect { lo, hi }
}

/// On-disk representation: node coordinate pairs, 0-based triangles,
/// boundary node indices and refinement level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshJson {
    pub nodes: Vec<[f64; 2]>,
    pub triangles: Vec<[usize; 3]>,
    pub boundary: Vec<usize>,
    pub level: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<Domain>,
}
