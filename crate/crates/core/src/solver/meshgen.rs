use std::collections::HashMap;
use std::f64::consts::PI;

use super::mesh::Mesh;
use crate::error::{Error, Result};
use crate::geometry::Domain2D;

const ARC_TABLE: usize = 8192;

/// Quasi-uniform P1 mesh of `dom` with edges no longer than about `h`.
///
/// Axis-aligned rectangles get a structured grid, other polygons a lattice on the
/// fan triangles from the vertex centroid, and smooth domains concentric scaled
/// copies of the boundary joined ring by ring.
pub fn generate_mesh(dom: &Domain2D, h: f64) -> Result<Mesh> {
    if !(h > 0.0 && h < dom.diameter() / 4.0) {
        return Err(Error::InvalidInput(format!(
            "mesh size must lie in (0, d/4) = (0, {}), got {h}",
            dom.diameter() / 4.0
        )));
    }
    match dom.polygon_vertices() {
        Some(v) if is_axis_rectangle(v) => rectangle_grid(v, h),
        Some(v) => polygon_lattice(v, h),
        None => ring_mesh(dom, h),
    }
}

fn is_axis_rectangle(v: &[[f64; 2]]) -> bool {
    v.len() == 4
        && (0..4).all(|i| {
            let (p, q) = (v[i], v[(i + 1) % 4]);
            p[0] == q[0] || p[1] == q[1]
        })
}

fn rectangle_grid(v: &[[f64; 2]], h: f64) -> Result<Mesh> {
    let (x0, x1) = (v.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min), v.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max));
    let (y0, y1) = (v.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min), v.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max));
    let nx = ((x1 - x0) / h - 1e-9).ceil().max(1.0) as usize;
    let ny = ((y1 - y0) / h - 1e-9).ceil().max(1.0) as usize;
    let mut vertices = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            vertices.push([x0 + (x1 - x0) * i as f64 / nx as f64, y0 + (y1 - y0) * j as f64 / ny as f64]);
        }
    }
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut triangles = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            triangles.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    Mesh::from_triangles(vertices, triangles)
}

fn polygon_lattice(v: &[[f64; 2]], h: f64) -> Result<Mesh> {
    let k = v.len();
    let c = [v.iter().map(|p| p[0]).sum::<f64>() / k as f64, v.iter().map(|p| p[1]).sum::<f64>() / k as f64];
    let mut longest: f64 = 0.0;
    for i in 0..k {
        let (p, q) = (v[i], v[(i + 1) % k]);
        if (p[0] - c[0]) * (q[1] - c[1]) - (p[1] - c[1]) * (q[0] - c[0]) <= 0.0 {
            return Err(Error::Mesh(format!("polygon is not star-shaped about its vertex centroid (edge {i})")));
        }
        longest = longest.max(dist(p, q)).max(dist(p, c));
    }
    let m = (longest / h - 1e-9).ceil().max(1.0) as usize;
    let mut vertices = Vec::new();
    let mut index: HashMap<(i64, i64), usize> = HashMap::new();
    let mut triangles = Vec::new();
    let scale = 1e9 / longest;
    for i in 0..k {
        let (p, q) = (v[i], v[(i + 1) % k]);
        let mut ids = vec![vec![0usize; m + 1]; m + 1];
        for a in 0..=m {
            for b in 0..=(m - a) {
                let (s, t) = (a as f64 / m as f64, b as f64 / m as f64);
                let x = [c[0] + s * (p[0] - c[0]) + t * (q[0] - c[0]), c[1] + s * (p[1] - c[1]) + t * (q[1] - c[1])];
                let key = ((x[0] * scale).round() as i64, (x[1] * scale).round() as i64);
                ids[a][b] = *index.entry(key).or_insert_with(|| {
                    vertices.push(x);
                    vertices.len() - 1
                });
            }
        }
        for a in 0..m {
            for b in 0..(m - a) {
                triangles.push([ids[a][b], ids[a + 1][b], ids[a][b + 1]]);
                if a + b + 1 < m {
                    triangles.push([ids[a + 1][b], ids[a + 1][b + 1], ids[a][b + 1]]);
                }
            }
        }
    }
    Mesh::from_triangles(vertices, triangles)
}

/// Parameters of `count` points equally spaced in arc length along the boundary.
struct ArcInverse {
    params: Vec<f64>,
    cumulative: Vec<f64>,
}

impl ArcInverse {
    fn new(dom: &Domain2D) -> Self {
        let params: Vec<f64> = (0..=ARC_TABLE).map(|k| 2.0 * PI * k as f64 / ARC_TABLE as f64).collect();
        let mut cumulative = vec![0.0];
        for k in 0..ARC_TABLE {
            cumulative.push(cumulative[k] + dist(dom.point(params[k]), dom.point(params[k + 1])));
        }
        Self { params, cumulative }
    }

    fn param_at(&self, fraction: f64) -> f64 {
        let target = fraction * self.cumulative[ARC_TABLE];
        let k = self.cumulative.partition_point(|&s| s <= target).clamp(1, ARC_TABLE) - 1;
        let w = (target - self.cumulative[k]) / (self.cumulative[k + 1] - self.cumulative[k]);
        self.params[k] + w * (self.params[k + 1] - self.params[k])
    }

    fn length(&self) -> f64 {
        self.cumulative[ARC_TABLE]
    }
}

fn ring_mesh(dom: &Domain2D, h: f64) -> Result<Mesh> {
    let arc = ArcInverse::new(dom);
    let rings = (dom.outer_radius() / h - 1e-9).ceil().max(1.0) as usize;
    let mut vertices = vec![[0.0, 0.0]];
    // ring k: (first vertex index, arc fractions)
    let mut layout: Vec<(usize, Vec<f64>)> = vec![(0, vec![0.0])];
    for k in 1..=rings {
        let rho = k as f64 / rings as f64;
        let n = ((rho * arc.length() / h - 1e-9).ceil() as usize).max(6);
        let first = vertices.len();
        let fractions: Vec<f64> = (0..n).map(|i| i as f64 / n as f64).collect();
        for &f in &fractions {
            let p = dom.point(arc.param_at(f));
            vertices.push([rho * p[0], rho * p[1]]);
        }
        layout.push((first, fractions));
    }
    let mut triangles = Vec::new();
    let (first1, frac1) = &layout[1];
    for i in 0..frac1.len() {
        triangles.push([0, first1 + i, first1 + (i + 1) % frac1.len()]);
    }
    for k in 1..rings {
        zipper(&vertices, &layout[k], &layout[k + 1], &mut triangles);
    }
    let mut boundary = vec![false; vertices.len()];
    for b in boundary.iter_mut().skip(layout[rings].0) {
        *b = true;
    }
    Mesh::new(vertices, triangles, boundary)
}

/// Triangulates the strip between two closed rings, always taking the shorter diagonal.
fn zipper(vertices: &[[f64; 2]], inner: &(usize, Vec<f64>), outer: &(usize, Vec<f64>), out: &mut Vec<[usize; 3]>) {
    let (fa, na) = (inner.0, inner.1.len());
    let (fb, nb) = (outer.0, outer.1.len());
    let a = |i: usize| fa + i % na;
    let b = |j: usize| fb + j % nb;
    let (mut i, mut j) = (0, 0);
    while i < na || j < nb {
        let advance_inner = j == nb
            || (i < na && dist(vertices[a(i + 1)], vertices[b(j)]) <= dist(vertices[a(i)], vertices[b(j + 1)]));
        if advance_inner {
            out.push([a(i), a(i + 1), b(j)]);
            i += 1;
        } else {
            out.push([a(i), b(j + 1), b(j)]);
            j += 1;
        }
    }
}

fn dist(p: [f64; 2], q: [f64; 2]) -> f64 {
    (p[0] - q[0]).hypot(p[1] - q[1])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_vertex_count_and_area() {
        let dom = Domain2D::disk(1.0).unwrap();
        let m = generate_mesh(&dom, 0.1).unwrap();
        assert!((250..=450).contains(&m.n_vertices()), "{}", m.n_vertices());
        assert!((m.total_area() - PI).abs() < 0.01 * PI);
        assert!(m.max_edge() <= 0.15);
        for (v, &b) in m.vertices().iter().zip(m.boundary_flags()) {
            if b {
                assert!((v[0].hypot(v[1]) - 1.0).abs() < 1e-12);
            }
        }
        // topology agrees with the ring flags
        let topo = Mesh::from_triangles(m.vertices().to_vec(), m.triangles().to_vec()).unwrap();
        assert_eq!(topo.boundary_flags(), m.boundary_flags());
    }

    #[test]
    fn square_is_a_structured_grid() {
        let m = generate_mesh(&Domain2D::square(2.0).unwrap(), 0.25).unwrap();
        assert_eq!(m.n_vertices(), 81);
        assert_eq!(m.n_triangles(), 128);
        assert_eq!(m.total_area(), 4.0);
    }

    #[test]
    fn hexagon_lattice_partitions_area() {
        let dom = Domain2D::regular_polygon(6, 1.0).unwrap();
        let m = generate_mesh(&dom, 0.1).unwrap();
        assert!((m.total_area() - dom.area()).abs() < 1e-12);
        assert!(m.max_edge() <= 0.1 + 1e-12);
        let boundary = m.boundary_flags().iter().filter(|&&b| b).count();
        assert_eq!(boundary, 60);
    }

    #[test]
    fn curved_domains_mesh_within_one_percent() {
        for dom in [Domain2D::ellipse(2.0, 1.0).unwrap(), Domain2D::superellipse(1.0, 1.0, 4).unwrap()] {
            let m = generate_mesh(&dom, 0.08).unwrap();
            assert!((m.total_area() - dom.area()).abs() < 0.01 * dom.area(), "{}", dom.label());
            assert!(m.max_edge() <= 1.5 * 0.08, "{}: {}", dom.label(), m.max_edge());
        }
    }

    #[test]
    fn oversized_h_is_rejected() {
        assert!(matches!(generate_mesh(&Domain2D::disk(1.0).unwrap(), 0.6), Err(Error::InvalidInput(_))));
    }
}
