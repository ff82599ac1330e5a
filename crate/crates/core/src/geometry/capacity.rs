use std::f64::consts::PI;

use rayon::prelude::*;

use super::boundary::{check_radius, BoundaryWeightSamples, LipschitzCharacteristic, DEFAULT_BOUNDARY_SAMPLES};
use super::domain::{dist, Domain2D};
use crate::error::{Error, Result};
use crate::norms::AnisotropicNorm;
use crate::solver::linalg::{pcg, SparseSym};
use crate::solver::mesh::Mesh;
use crate::solver::meshgen::generate_mesh;

pub const K_CENTERS: usize = 64;
/// Cap radii as fractions of `r`.
pub const CAP_FRACTIONS: [f64; 4] = [0.125, 0.25, 0.5, 0.75];
/// Mesh nodes within this multiple of `h` from a boundary arc represent the arc.
const BAND: f64 = 0.6;
const CG_TOL: f64 = 1e-12;

/// `int |grad v|^2` minimized over P1 fields equal to 1 on `e_nodes` and 0 on the mesh boundary.
pub fn capacity(mesh: &Mesh, e_nodes: &[usize]) -> Result<f64> {
    if e_nodes.is_empty() {
        return Err(Error::InvalidInput("the condenser set E is empty".into()));
    }
    if let Some(&i) = e_nodes.iter().find(|&&i| i >= mesh.n_vertices()) {
        return Err(Error::InvalidInput(format!("node {i} is not in the mesh")));
    }
    if let Some(&i) = e_nodes.iter().find(|&&i| mesh.is_boundary(i)) {
        return Err(Error::Degenerate(format!("E touches the outer boundary at node {i}")));
    }
    let mut fixed = vec![false; mesh.n_vertices()];
    let mut v = vec![0.0; mesh.n_vertices()];
    for &i in e_nodes {
        fixed[i] = true;
        v[i] = 1.0;
    }
    let stiffness = laplace_stiffness(mesh);
    let free: Vec<usize> = (0..mesh.n_vertices()).filter(|&i| !fixed[i] && !mesh.is_boundary(i)).collect();
    if !free.is_empty() {
        let k = stiffness.restrict(&free);
        let rhs: Vec<f64> = free
            .iter()
            .map(|&i| -stiffness.row(i).filter(|(j, _)| fixed[*j]).map(|(_, a)| a).sum::<f64>())
            .collect();
        let sol = pcg(&k, &rhs, vec![0.0; free.len()], CG_TOL, 20 * free.len() + 100)?;
        for (&i, x) in free.iter().zip(sol.x) {
            v[i] = x;
        }
    }
    Ok(dirichlet_energy(mesh, &v))
}

pub fn laplace_stiffness(mesh: &Mesh) -> SparseSym {
    let mut k = SparseSym::with_pattern(&mesh.adjacency());
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let g = mesh.gradients(t);
        let a = mesh.areas()[t];
        for i in 0..3 {
            for j in 0..3 {
                k.add(tri[i], tri[j], a * (g[i][0] * g[j][0] + g[i][1] * g[j][1]));
            }
        }
    }
    k
}

/// `int |grad v|^2` of the P1 interpolant.
pub fn dirichlet_energy(mesh: &Mesh, v: &[f64]) -> f64 {
    (0..mesh.n_triangles())
        .map(|t| {
            let g = mesh.grad_of(t, v);
            mesh.areas()[t] * (g[0] * g[0] + g[1] * g[1])
        })
        .sum()
}

/// Capacities of the boundary caps `E_j = dOmega ∩ closed B_{rho_j}(x)` in `B_r(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct CapFamily {
    pub center_index: usize,
    pub center: [f64; 2],
    pub radii: [f64; 4],
    pub capacities: [f64; 4],
}

/// Cap families for `centers` boundary points equally spaced in the parameter.
pub fn cap_families(dom: &Domain2D, r: f64, mesh_h: f64, centers: usize) -> Result<Vec<CapFamily>> {
    check_radius(dom, r)?;
    if !(mesh_h > 0.0 && mesh_h <= r / 4.0) {
        return Err(Error::InvalidInput(format!("capacity mesh size must lie in (0, r/4], got {mesh_h}")));
    }
    let ball = generate_mesh(&Domain2D::disk(r)?, mesh_h)?;
    let arc_samples = ((dom.perimeter() / (0.25 * mesh_h)).ceil() as usize).max(DEFAULT_BOUNDARY_SAMPLES);
    let arc: Vec<[f64; 2]> = (0..arc_samples).map(|k| dom.point(2.0 * PI * k as f64 / arc_samples as f64)).collect();
    (0..centers)
        .into_par_iter()
        .map(|c| {
            let x = dom.point(2.0 * PI * c as f64 / centers as f64);
            let mesh = ball.translated(x);
            let mut radii = [0.0; 4];
            let mut capacities = [0.0; 4];
            for (j, frac) in CAP_FRACTIONS.iter().enumerate() {
                let rho = frac * r;
                let cap_arc: Vec<[f64; 2]> = arc.iter().copied().filter(|p| dist(*p, x) <= rho).collect();
                let e: Vec<usize> = (0..mesh.n_vertices())
                    .filter(|&i| {
                        let v = mesh.vertices()[i];
                        dist(v, x) <= rho + mesh_h && cap_arc.iter().any(|p| dist(*p, v) <= BAND * mesh_h)
                    })
                    .collect();
                radii[j] = rho;
                capacities[j] = capacity(&mesh, &e)?;
            }
            Ok(CapFamily { center_index: c, center: x, radii, capacities })
        })
        .collect()
}

/// Per-center `max_j (int_{E_j} rho dH^1) / cap(E_j, B_r(x))`.
pub fn isocapacitary_profile(families: &[CapFamily], weight: &BoundaryWeightSamples) -> Vec<f64> {
    families
        .iter()
        .map(|f| {
            (0..4)
                .map(|j| weight.restrict_to_ball(f.center, f.radii[j], true).total() / f.capacities[j])
                .fold(0.0, f64::max)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct IsocapacitaryValues {
    /// Lower estimate of `K_Omega(r)` with weight `|kappa|`.
    pub plain: f64,
    /// Lower estimate of `K^H_Omega(r)` with weight `|B^H|`.
    pub anisotropic: f64,
    pub plain_profile: Vec<f64>,
    pub anisotropic_profile: Vec<f64>,
}

/// Cap-family lower estimates of the curvature isocapacitary functions at scale `r`.
pub fn isocapacitary_k(dom: &Domain2D, norm: &AnisotropicNorm, r: f64, mesh_h: f64) -> Result<IsocapacitaryValues> {
    let families = cap_families(dom, r, mesh_h, K_CENTERS)?;
    let plain_w = BoundaryWeightSamples::curvature(dom, DEFAULT_BOUNDARY_SAMPLES)?;
    let aniso_w = BoundaryWeightSamples::anisotropic_curvature(norm, dom, DEFAULT_BOUNDARY_SAMPLES)?;
    let plain_profile = isocapacitary_profile(&families, &plain_w);
    let anisotropic_profile = isocapacitary_profile(&families, &aniso_w);
    Ok(IsocapacitaryValues {
        plain: plain_profile.iter().copied().fold(0.0, f64::max),
        anisotropic: anisotropic_profile.iter().copied().fold(0.0, f64::max),
        plain_profile,
        anisotropic_profile,
    })
}

/// Cap-family lower estimate of `K_{Omega, rho}(r)` for an arbitrary boundary weight.
pub fn isocapacitary_weighted(dom: &Domain2D, weight: &BoundaryWeightSamples, r: f64, mesh_h: f64) -> Result<f64> {
    let families = cap_families(dom, r, mesh_h, K_CENTERS)?;
    Ok(isocapacitary_profile(&families, weight).into_iter().fold(0.0, f64::max))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TraceCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
    pub gradient_energy: f64,
    /// `(1 + L)^12 R log(1 + 1/R) ||rho||_inf int |grad v|^2`, the bounded-weight bound with unit constant.
    pub bounded_weight_bound: f64,
}

/// `int_{dOmega ∩ B_R(x0)} v^2 rho` against `32 (1 + L)^4 K_{Omega,rho}(R) int |grad v|^2`.
///
/// `v` is a P1 field on `mesh` (a mesh of the domain) vanishing outside `B_R(x0)`; `lip`
/// and `k_value` are the Lipschitz characteristic and the isocapacitary value at `R`.
#[allow(clippy::too_many_arguments)]
pub fn trace_inequality_check(
    weight: &BoundaryWeightSamples,
    mesh: &Mesh,
    v: &[f64],
    r: f64,
    x0: [f64; 2],
    lip: &LipschitzCharacteristic,
    k_value: f64,
) -> Result<TraceCheck> {
    if v.len() != mesh.n_vertices() {
        return Err(Error::InvalidInput("field length does not match the mesh".into()));
    }
    if let Some(i) = (0..mesh.n_vertices()).find(|&i| dist(mesh.vertices()[i], x0) >= r * (1.0 - 1e-12) && v[i].abs() > 1e-12) {
        return Err(Error::InvalidInput(format!("field does not vanish outside B_R(x0): v = {} at vertex {i}", v[i])));
    }
    let trace = BoundaryTrace::new(mesh);
    let local = weight.restrict_to_ball(x0, r, false);
    let lhs: f64 = local
        .points
        .iter()
        .zip(local.weights())
        .map(|(p, w)| {
            let val = trace.eval(*p, v);
            w * val * val
        })
        .sum();
    let energy = dirichlet_energy(mesh, v);
    let l1 = 1.0 + lip.l_omega;
    let rhs = 32.0 * l1.powi(4) * k_value * energy;
    let bounded_weight_bound = l1.powi(12) * r * (1.0 + 1.0 / r).ln() * weight.max_density() * energy;
    Ok(TraceCheck { lhs, rhs, holds: lhs <= rhs + 1e-9, gradient_energy: energy, bounded_weight_bound })
}

/// Evaluates a P1 field at points near the mesh boundary by projecting onto the closest boundary edge.
pub struct BoundaryTrace {
    edges: Vec<(usize, usize, [f64; 2], [f64; 2])>,
}

impl BoundaryTrace {
    pub fn new(mesh: &Mesh) -> Self {
        let edges = mesh
            .boundary_edges()
            .into_iter()
            .map(|(a, b)| (a, b, mesh.vertices()[a], mesh.vertices()[b]))
            .collect();
        Self { edges }
    }

    pub fn eval(&self, p: [f64; 2], v: &[f64]) -> f64 {
        let mut best = (f64::INFINITY, 0.0);
        for &(a, b, pa, pb) in &self.edges {
            let d = [pb[0] - pa[0], pb[1] - pa[1]];
            let s = (((p[0] - pa[0]) * d[0] + (p[1] - pa[1]) * d[1]) / (d[0] * d[0] + d[1] * d[1])).clamp(0.0, 1.0);
            let q = [pa[0] + s * d[0], pa[1] + s * d[1]];
            let dd = dist(p, q);
            if dd < best.0 {
                best = (dd, (1.0 - s) * v[a] + s * v[b]);
            }
        }
        best.1
    }
}
