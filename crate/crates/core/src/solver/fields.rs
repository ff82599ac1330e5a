use std::io::Write;
use std::path::Path;

use super::mesh::Mesh;
use crate::error::{Error, Result};
use crate::operator::StressOperator;

/// Per-triangle `A(grad u)`; pass the unregularized operator for the stress under study.
pub fn stress_field(op: &StressOperator, mesh: &Mesh, u: &[f64]) -> Vec<[f64; 2]> {
    (0..mesh.n_triangles()).map(|t| op.stress2(mesh.grad_of(t, u))).collect()
}

/// Per-triangle gradient of `u`.
pub fn gradient_field(mesh: &Mesh, u: &[f64]) -> Vec<[f64; 2]> {
    (0..mesh.n_triangles()).map(|t| mesh.grad_of(t, u)).collect()
}

/// `L2` distance between two piecewise-constant vector fields.
pub fn l2_distance_cells(mesh: &Mesh, a: &[[f64; 2]], b: &[[f64; 2]]) -> f64 {
    a.iter()
        .zip(b)
        .zip(mesh.areas())
        .map(|((p, q), w)| w * ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)))
        .sum::<f64>()
        .sqrt()
}

/// Area-weighted average of the adjacent cell values at each vertex.
pub fn recover_nodal(mesh: &Mesh, cells: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let mut sum = vec![[0.0; 2]; mesh.n_vertices()];
    let mut weight = vec![0.0; mesh.n_vertices()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let a = mesh.areas()[t];
        for &i in tri {
            sum[i][0] += a * cells[t][0];
            sum[i][1] += a * cells[t][1];
            weight[i] += a;
        }
    }
    sum.iter().zip(&weight).map(|(s, w)| if *w > 0.0 { [s[0] / w, s[1] / w] } else { [0.0; 2] }).collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SobolevNorms {
    pub l2: f64,
    pub h1_semi: f64,
}

/// `L2` norm with centroid values and the `H1` seminorm of the P1 interpolant of `v`.
pub fn sobolev_norms(mesh: &Mesh, v: &[[f64; 2]]) -> SobolevNorms {
    sobolev_norms_on(mesh, v, |_| true)
}

/// As [`sobolev_norms`], restricted to triangles whose centroid passes `keep`.
pub fn sobolev_norms_on(mesh: &Mesh, v: &[[f64; 2]], keep: impl Fn([f64; 2]) -> bool) -> SobolevNorms {
    let (mut l2, mut h1) = (0.0, 0.0);
    for (t, tri) in mesh.triangles().iter().enumerate() {
        if !keep(mesh.centroid(t)) {
            continue;
        }
        let a = mesh.areas()[t];
        let g = mesh.gradients(t);
        let mut c = [0.0; 2];
        let mut grad = [[0.0; 2]; 2];
        for k in 0..3 {
            let val = v[tri[k]];
            for comp in 0..2 {
                c[comp] += val[comp] / 3.0;
                grad[comp][0] += val[comp] * g[k][0];
                grad[comp][1] += val[comp] * g[k][1];
            }
        }
        l2 += a * (c[0] * c[0] + c[1] * c[1]);
        h1 += a * grad.iter().flatten().map(|x| x * x).sum::<f64>();
    }
    SobolevNorms { l2: l2.sqrt(), h1_semi: h1.sqrt() }
}

/// Writes `vertex_index,x,y,u`.
pub fn write_solution_csv(path: &Path, mesh: &Mesh, u: &[f64]) -> Result<()> {
    if u.len() != mesh.n_vertices() {
        return Err(Error::InvalidInput("solution length does not match the mesh".into()));
    }
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(out, "vertex_index,x,y,u")?;
    for (i, (v, val)) in mesh.vertices().iter().zip(u).enumerate() {
        writeln!(out, "{i},{},{},{}", v[0], v[1], val)?;
    }
    Ok(())
}
