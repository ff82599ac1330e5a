use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// P1 triangulation with cached areas and shape-function gradients.
#[derive(Clone, Debug)]
pub struct Mesh {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<bool>,
    areas: Vec<f64>,
    grads: Vec<[[f64; 2]; 3]>,
}

impl Mesh {
    /// Builds a mesh, flipping clockwise triangles and flagging boundary vertices from
    /// edges that belong to a single triangle.
    pub fn from_triangles(vertices: Vec<[f64; 2]>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        let boundary = boundary_flags(vertices.len(), &triangles);
        Self::new(vertices, triangles, boundary)
    }

    pub fn new(vertices: Vec<[f64; 2]>, mut triangles: Vec<[usize; 3]>, boundary: Vec<bool>) -> Result<Self> {
        if boundary.len() != vertices.len() {
            return Err(Error::Mesh(format!(
                "{} boundary flags for {} vertices",
                boundary.len(),
                vertices.len()
            )));
        }
        if let Some(v) = vertices.iter().position(|v| !(v[0].is_finite() && v[1].is_finite())) {
            return Err(Error::Mesh(format!("vertex {v} has non-finite coordinates")));
        }
        let mut areas = Vec::with_capacity(triangles.len());
        let mut grads = Vec::with_capacity(triangles.len());
        for (k, tri) in triangles.iter_mut().enumerate() {
            if tri.iter().any(|&i| i >= vertices.len()) {
                return Err(Error::Mesh(format!("triangle {k} references a missing vertex: {tri:?}")));
            }
            let mut signed = signed_area(&vertices, *tri);
            if signed < 0.0 {
                tri.swap(1, 2);
                signed = -signed;
            }
            if signed <= 0.0 {
                return Err(Error::Mesh(format!("triangle {k} is degenerate: {tri:?}")));
            }
            areas.push(signed);
            grads.push(shape_gradients(&vertices, *tri, signed));
        }
        Ok(Self { vertices, triangles, boundary, areas, grads })
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary_flags(&self) -> &[bool] {
        &self.boundary
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.boundary[v]
    }

    pub fn areas(&self) -> &[f64] {
        &self.areas
    }

    /// Gradients of the three barycentric shape functions of triangle `t`.
    pub fn gradients(&self, t: usize) -> &[[f64; 2]; 3] {
        &self.grads[t]
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn n_triangles(&self) -> usize {
        self.triangles.len()
    }

    pub fn total_area(&self) -> f64 {
        self.areas.iter().sum()
    }

    pub fn centroid(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t];
        let (p, q, r) = (self.vertices[a], self.vertices[b], self.vertices[c]);
        [(p[0] + q[0] + r[0]) / 3.0, (p[1] + q[1] + r[1]) / 3.0]
    }

    /// Constant gradient of the P1 interpolant of `u` on triangle `t`.
    pub fn grad_of(&self, t: usize, u: &[f64]) -> [f64; 2] {
        let tri = self.triangles[t];
        let g = &self.grads[t];
        let mut out = [0.0; 2];
        for k in 0..3 {
            out[0] += u[tri[k]] * g[k][0];
            out[1] += u[tri[k]] * g[k][1];
        }
        out
    }

    pub fn max_edge(&self) -> f64 {
        self.edges().map(|(a, b)| dist(self.vertices[a], self.vertices[b])).fold(0.0, f64::max)
    }

    /// Each undirected edge once, as `(min, max)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let mut seen = std::collections::BTreeSet::new();
        for tri in &self.triangles {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                seen.insert((a.min(b), a.max(b)));
            }
        }
        seen.into_iter()
    }

    /// Edges that belong to exactly one triangle.
    pub fn boundary_edges(&self) -> Vec<(usize, usize)> {
        edge_counts(&self.triangles)
            .into_iter()
            .filter(|(_, c)| *c == 1)
            .map(|(e, _)| e)
            .collect()
    }

    /// Lumped mass: one third of every adjacent triangle area.
    pub fn lumped_mass(&self) -> Vec<f64> {
        let mut m = vec![0.0; self.vertices.len()];
        for (tri, area) in self.triangles.iter().zip(&self.areas) {
            for &i in tri {
                m[i] += area / 3.0;
            }
        }
        m
    }

    /// Sorted vertex neighbour lists, including the vertex itself.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj: Vec<Vec<usize>> = (0..self.vertices.len()).map(|i| vec![i]).collect();
        for tri in &self.triangles {
            for &a in tri {
                for &b in tri {
                    adj[a].push(b);
                }
            }
        }
        for row in &mut adj {
            row.sort_unstable();
            row.dedup();
        }
        adj
    }

    pub fn translated(&self, shift: [f64; 2]) -> Self {
        let mut out = self.clone();
        for v in &mut out.vertices {
            v[0] += shift[0];
            v[1] += shift[1];
        }
        out
    }

    /// Writes `<stem>.node` (`x y flag` per line) and `<stem>.ele` (`i j k` per line).
    pub fn write(&self, stem: &Path) -> Result<()> {
        let mut node = fs::File::create(stem.with_extension("node"))?;
        for (v, b) in self.vertices.iter().zip(&self.boundary) {
            writeln!(node, "{:.17e} {:.17e} {}", v[0], v[1], u8::from(*b))?;
        }
        let mut ele = fs::File::create(stem.with_extension("ele"))?;
        for t in &self.triangles {
            writeln!(ele, "{} {} {}", t[0], t[1], t[2])?;
        }
        Ok(())
    }

    pub fn read(stem: &Path) -> Result<Self> {
        let node_path = stem.with_extension("node");
        let text = fs::read_to_string(&node_path)?;
        let mut vertices = Vec::new();
        let mut boundary = Vec::new();
        for (line_no, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let bad = || Error::Mesh(format!("{}:{}: expected `x y flag`", node_path.display(), line_no + 1));
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.len() != 3 {
                return Err(bad());
            }
            let x: f64 = parts[0].parse().map_err(|_| bad())?;
            let y: f64 = parts[1].parse().map_err(|_| bad())?;
            let flag: u8 = parts[2].parse().map_err(|_| bad())?;
            vertices.push([x, y]);
            boundary.push(flag != 0);
        }
        let ele_path = stem.with_extension("ele");
        let text = fs::read_to_string(&ele_path)?;
        let mut triangles = Vec::new();
        for (line_no, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let bad = || Error::Mesh(format!("{}:{}: expected `i j k`", ele_path.display(), line_no + 1));
            let idx: Vec<usize> = line
                .split_whitespace()
                .map(|p| p.parse().map_err(|_| bad()))
                .collect::<Result<_>>()?;
            if idx.len() != 3 {
                return Err(bad());
            }
            triangles.push([idx[0], idx[1], idx[2]]);
        }
        Self::new(vertices, triangles, boundary)
    }
}

fn signed_area(v: &[[f64; 2]], t: [usize; 3]) -> f64 {
    let (p, q, r) = (v[t[0]], v[t[1]], v[t[2]]);
    0.5 * ((q[0] - p[0]) * (r[1] - p[1]) - (r[0] - p[0]) * (q[1] - p[1]))
}

fn shape_gradients(v: &[[f64; 2]], t: [usize; 3], area: f64) -> [[f64; 2]; 3] {
    let mut g = [[0.0; 2]; 3];
    for k in 0..3 {
        let (q, r) = (v[t[(k + 1) % 3]], v[t[(k + 2) % 3]]);
        g[k] = [(q[1] - r[1]) / (2.0 * area), (r[0] - q[0]) / (2.0 * area)];
    }
    g
}

fn edge_counts(triangles: &[[usize; 3]]) -> Vec<((usize, usize), usize)> {
    let mut counts: HashMap<(usize, usize), usize> = HashMap::new();
    for tri in triangles {
        for k in 0..3 {
            let (a, b) = (tri[k], tri[(k + 1) % 3]);
            *counts.entry((a.min(b), a.max(b))).or_default() += 1;
        }
    }
    let mut out: Vec<_> = counts.into_iter().collect();
    out.sort_unstable();
    out
}

fn boundary_flags(n: usize, triangles: &[[usize; 3]]) -> Vec<bool> {
    let mut flags = vec![false; n];
    for ((a, b), c) in edge_counts(triangles) {
        if c == 1 {
            flags[a] = true;
            flags[b] = true;
        }
    }
    flags
}

fn dist(p: [f64; 2], q: [f64; 2]) -> f64 {
    (p[0] - q[0]).hypot(p[1] - q[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_triangles() -> Mesh {
        Mesh::from_triangles(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]], vec![[0, 1, 2], [0, 3, 2]]).unwrap()
    }

    #[test]
    fn orientation_is_fixed_and_gradients_sum_to_zero() {
        let m = two_triangles();
        assert_eq!(m.triangles()[1], [0, 2, 3]);
        for t in 0..2 {
            let g = m.gradients(t);
            assert!((g[0][0] + g[1][0] + g[2][0]).abs() < 1e-15);
            assert!((g[0][1] + g[1][1] + g[2][1]).abs() < 1e-15);
        }
        assert_eq!(m.total_area(), 1.0);
        let u: Vec<f64> = m.vertices().iter().map(|v| 2.0 * v[0] - v[1]).collect();
        assert_eq!(m.grad_of(0, &u), [2.0, -1.0]);
    }

    #[test]
    fn degenerate_triangle_is_rejected() {
        let r = Mesh::from_triangles(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]], vec![[0, 1, 2]]);
        assert!(matches!(r, Err(Error::Mesh(_))));
    }

    #[test]
    fn round_trip_through_text_files() {
        let dir = tempfile::tempdir().unwrap();
        let m = two_triangles();
        let stem = dir.path().join("sq");
        m.write(&stem).unwrap();
        let back = Mesh::read(&stem).unwrap();
        assert_eq!(back.vertices(), m.vertices());
        assert_eq!(back.triangles(), m.triangles());
        assert_eq!(back.boundary_flags(), m.boundary_flags());
        fs::write(stem.with_extension("ele"), "0 1\n").unwrap();
        assert!(matches!(Mesh::read(&stem), Err(Error::Mesh(_))));
    }
}
