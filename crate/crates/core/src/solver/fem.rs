use std::fmt;
use std::sync::Arc;

use super::fields::{l2_distance_cells, stress_field};
use super::linalg::{dot, EnvelopeCholesky, SparseSym};
use super::mesh::Mesh;
use crate::error::{Error, Result};
use crate::geometry::Domain2D;
use crate::operator::StressOperator;

pub type SourceFn = Arc<dyn Fn([f64; 2]) -> f64 + Send + Sync>;

pub const DEFAULT_LADDER: [f64; 5] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5];
/// The ladder stops once the unregularized stress moves less than this between rungs.
pub const EARLY_STOP: f64 = 1e-8;
const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;

#[derive(Clone)]
pub enum Source {
    Constant(f64),
    /// `amplitude * exp(-width |x|^2)`.
    Bump { amplitude: f64, width: f64 },
    Function { name: String, f: SourceFn },
    /// One value per mesh vertex.
    Nodal(Vec<f64>),
}

impl fmt::Debug for Source {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

impl Source {
    /// The centred Gaussian bump `4 exp(-8 |x|^2)`.
    pub fn gaussian_bump() -> Self {
        Source::Bump { amplitude: 4.0, width: 8.0 }
    }

    pub fn function(name: &str, f: impl Fn([f64; 2]) -> f64 + Send + Sync + 'static) -> Self {
        Source::Function { name: name.to_string(), f: Arc::new(f) }
    }

    pub fn label(&self) -> String {
        match self {
            Source::Constant(c) => format!("const({c})"),
            Source::Bump { amplitude, width } => format!("bump({amplitude};{width})"),
            Source::Function { name, .. } => name.clone(),
            Source::Nodal(v) => format!("nodal({})", v.len()),
        }
    }

    /// Pointwise value; `None` for nodal data.
    pub fn at(&self, x: [f64; 2]) -> Option<f64> {
        match self {
            Source::Constant(c) => Some(*c),
            Source::Bump { amplitude, width } => Some(amplitude * (-width * (x[0] * x[0] + x[1] * x[1])).exp()),
            Source::Function { f, .. } => Some(f(x)),
            Source::Nodal(_) => None,
        }
    }

    /// Scales the source by `t`.
    pub fn scaled(&self, t: f64) -> Self {
        match self {
            Source::Constant(c) => Source::Constant(t * c),
            Source::Bump { amplitude, width } => Source::Bump { amplitude: t * amplitude, width: *width },
            Source::Function { name, f } => {
                let f = f.clone();
                Source::Function { name: format!("{t}*{name}"), f: Arc::new(move |x| t * f(x)) }
            }
            Source::Nodal(v) => Source::Nodal(v.iter().map(|x| t * x).collect()),
        }
    }

    /// Value at the centroid of triangle `t`.
    pub fn on_triangle(&self, mesh: &Mesh, t: usize) -> f64 {
        match self {
            Source::Nodal(v) => mesh.triangles()[t].iter().map(|&i| v[i]).sum::<f64>() / 3.0,
            _ => self.at(mesh.centroid(t)).unwrap(),
        }
    }

    /// `(int f, int |f|, (int f^2)^(1/2))` on the domain.
    ///
    /// Pointwise sources use the domain quadrature; nodal data uses centroid values on `mesh`.
    pub fn integrals(&self, dom: &Domain2D, mesh: Option<&Mesh>) -> Result<(f64, f64, f64)> {
        let pts: Vec<(f64, f64)> = match (self, mesh) {
            (Source::Nodal(v), Some(m)) => {
                if v.len() != m.n_vertices() {
                    return Err(Error::InvalidInput(format!(
                        "nodal source has {} values for {} vertices",
                        v.len(),
                        m.n_vertices()
                    )));
                }
                (0..m.n_triangles()).map(|t| (self.on_triangle(m, t), m.areas()[t])).collect()
            }
            (Source::Nodal(_), None) => return Err(Error::InvalidInput("nodal source needs a mesh".into())),
            _ => dom.area_quadrature(128).into_iter().map(|(x, w)| (self.at(x).unwrap(), w)).collect(),
        };
        let total = pts.iter().map(|(f, w)| f * w).sum();
        let l1 = pts.iter().map(|(f, w)| f.abs() * w).sum();
        let l2 = pts.iter().map(|(f, w)| f * f * w).sum::<f64>().sqrt();
        Ok((total, l1, l2))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}

#[derive(Clone, Debug)]
pub struct ProblemSpec {
    /// Unregularized operator; each rung regularizes it.
    pub op: StressOperator,
    pub domain: Domain2D,
    pub source: Source,
    pub bc: BoundaryCondition,
    pub epsilon_ladder: Vec<f64>,
    pub newton_tol: f64,
    pub max_iter: usize,
}

impl ProblemSpec {
    pub fn new(op: StressOperator, domain: Domain2D, source: Source, bc: BoundaryCondition) -> Result<Self> {
        let spec = Self {
            op: op.unregularized(),
            domain,
            source,
            bc,
            epsilon_ladder: DEFAULT_LADDER.to_vec(),
            newton_tol: 1e-10,
            max_iter: 100,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_ladder(mut self, ladder: Vec<f64>) -> Result<Self> {
        self.epsilon_ladder = ladder;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.op.norm().dim() != 2 {
            return Err(Error::InvalidInput("the solver works in two dimensions only".into()));
        }
        if self.epsilon_ladder.is_empty() {
            return Err(Error::InvalidInput("epsilon ladder is empty".into()));
        }
        if self.epsilon_ladder.iter().any(|&e| !(e > 0.0 && e < 1.0)) {
            return Err(Error::InvalidInput(format!("ladder entries must lie in (0, 1): {:?}", self.epsilon_ladder)));
        }
        if self.epsilon_ladder.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::InvalidInput(format!("ladder must be strictly decreasing: {:?}", self.epsilon_ladder)));
        }
        if !(self.newton_tol > 0.0) || self.max_iter == 0 {
            return Err(Error::InvalidInput("newton_tol and max_iter must be positive".into()));
        }
        if self.bc == BoundaryCondition::Neumann && !matches!(self.source, Source::Nodal(_)) {
            check_compatibility(&self.source, &self.domain, None)?;
        }
        Ok(())
    }
}

fn check_compatibility(source: &Source, dom: &Domain2D, mesh: Option<&Mesh>) -> Result<()> {
    let (total, l1, _) = source.integrals(dom, mesh)?;
    if total.abs() > 1e-10 * l1 {
        return Err(Error::Precondition(format!(
            "Neumann data must have zero mean: |int f| = {:e} exceeds 1e-10 * {l1:e}",
            total.abs()
        )));
    }
    Ok(())
}

/// Discrete energy `sum_T |T| B_eps(H(grad u_T)) - F . u` with its gradient and Hessian.
#[derive(Clone, Debug)]
pub struct EnergyEval {
    pub value: f64,
    pub gradient: Vec<f64>,
    pub hessian: SparseSym,
}

/// Lumped load `F_i = sum_T |T| f(c_T) / 3`.
pub fn load_vector(spec: &ProblemSpec, mesh: &Mesh) -> Result<Vec<f64>> {
    if let Source::Nodal(v) = &spec.source {
        if v.len() != mesh.n_vertices() {
            return Err(Error::InvalidInput(format!("nodal source has {} values for {} vertices", v.len(), mesh.n_vertices())));
        }
    }
    let mut f = vec![0.0; mesh.n_vertices()];
    for (t, tri) in mesh.triangles().iter().enumerate() {
        let share = mesh.areas()[t] * spec.source.on_triangle(mesh, t) / 3.0;
        for &i in tri {
            f[i] += share;
        }
    }
    Ok(f)
}

fn check_field(mesh: &Mesh, u: &[f64]) -> Result<()> {
    if u.len() != mesh.n_vertices() {
        return Err(Error::InvalidInput(format!("field has {} values for {} vertices", u.len(), mesh.n_vertices())));
    }
    if u.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("field has non-finite entries".into()));
    }
    Ok(())
}

fn regularized(spec: &ProblemSpec, epsilon: f64) -> Result<StressOperator> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidInput(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    // with_epsilon excludes 1; the regularized family itself is defined there.
    spec.op.with_epsilon(epsilon.min(1.0 - f64::EPSILON))
}

fn energy_value(op: &StressOperator, mesh: &Mesh, load: &[f64], u: &[f64]) -> f64 {
    let bulk: f64 = (0..mesh.n_triangles()).map(|t| mesh.areas()[t] * op.energy_density(&mesh.grad_of(t, u))).sum();
    bulk - dot(load, u)
}

/// Jacobian of `A_eps`, taken along a fixed direction at tiny gradients where it is
/// only defined as a directional limit.
fn jacobian_at(op: &StressOperator, xi: [f64; 2]) -> Result<[[f64; 2]; 2]> {
    let xi = if xi[0].hypot(xi[1]) < 1e-8 { [1e-3, 0.0] } else { xi };
    let j = op.stress_jacobian(&xi)?;
    Ok([[j[(0, 0)], j[(0, 1)]], [j[(1, 0)], j[(1, 1)]]])
}

fn assemble(op: &StressOperator, mesh: &Mesh, pattern: &SparseSym, load: &[f64], u: &[f64], hessian: bool) -> Result<EnergyEval> {
    let mut gradient: Vec<f64> = load.iter().map(|f| -f).collect();
    let mut h = pattern.clone();
    let mut value = -dot(load, u);
    for t in 0..mesh.n_triangles() {
        let tri = mesh.triangles()[t];
        let g = mesh.gradients(t);
        let area = mesh.areas()[t];
        let xi = mesh.grad_of(t, u);
        value += area * op.energy_density(&xi);
        let s = op.stress2(xi);
        for a in 0..3 {
            gradient[tri[a]] += area * (s[0] * g[a][0] + s[1] * g[a][1]);
        }
        if hessian {
            let j = jacobian_at(op, xi)?;
            for a in 0..3 {
                let ja = [j[0][0] * g[a][0] + j[1][0] * g[a][1], j[0][1] * g[a][0] + j[1][1] * g[a][1]];
                for b in 0..3 {
                    h.add(tri[a], tri[b], area * (ja[0] * g[b][0] + ja[1] * g[b][1]));
                }
            }
        }
    }
    Ok(EnergyEval { value, gradient, hessian: h })
}

pub fn energy_eval(spec: &ProblemSpec, mesh: &Mesh, u: &[f64], epsilon: f64) -> Result<EnergyEval> {
    check_field(mesh, u)?;
    let op = regularized(spec, epsilon)?;
    let load = load_vector(spec, mesh)?;
    let pattern = SparseSym::with_pattern(&mesh.adjacency());
    assemble(&op, mesh, &pattern, &load, u, true)
}

#[derive(Clone, Debug)]
pub struct NewtonReport {
    pub u: Vec<f64>,
    pub epsilon: f64,
    pub iterations: usize,
    /// Constrained gradient infinity-norm at every iterate.
    pub residuals: Vec<f64>,
    /// Energy at every accepted iterate.
    pub energies: Vec<f64>,
    pub gradient_steps: usize,
}

/// Free unknowns and, for Neumann problems, the pinned vertex.
fn free_dofs(spec: &ProblemSpec, mesh: &Mesh) -> (Vec<usize>, Option<usize>) {
    match spec.bc {
        BoundaryCondition::Dirichlet => ((0..mesh.n_vertices()).filter(|&i| !mesh.is_boundary(i)).collect(), None),
        BoundaryCondition::Neumann => {
            let pin = (0..mesh.n_vertices()).find(|&i| !mesh.is_boundary(i)).unwrap_or(0);
            ((0..mesh.n_vertices()).filter(|&i| i != pin).collect(), Some(pin))
        }
    }
}

/// Lumped-mass mean of `u`.
pub fn mean_value(mesh: &Mesh, u: &[f64]) -> f64 {
    let m = mesh.lumped_mass();
    dot(&m, u) / m.iter().sum::<f64>()
}

/// Newton iteration with Armijo backtracking for the rung `epsilon`, started from `u0`.
pub fn solve_regularized(spec: &ProblemSpec, mesh: &Mesh, epsilon: f64, u0: &[f64]) -> Result<NewtonReport> {
    check_field(mesh, u0)?;
    let op = regularized(spec, epsilon)?;
    let mut load = load_vector(spec, mesh)?;
    let (free, pin) = free_dofs(spec, mesh);
    let mut u = u0.to_vec();
    match spec.bc {
        BoundaryCondition::Dirichlet => {
            if let Some(i) = (0..mesh.n_vertices()).find(|&i| mesh.is_boundary(i) && u[i].abs() > 1e-12) {
                return Err(Error::Precondition(format!("initial guess is {} on boundary vertex {i}", u[i])));
            }
        }
        BoundaryCondition::Neumann => {
            if let Source::Nodal(_) = spec.source {
                check_compatibility(&spec.source, &spec.domain, Some(mesh))?;
            }
            // Project the lumped load onto discrete compatibility so constants stay in the kernel.
            let mass = mesh.lumped_mass();
            let shift = load.iter().sum::<f64>() / mass.iter().sum::<f64>();
            for (f, m) in load.iter_mut().zip(&mass) {
                *f -= shift * m;
            }
            let p = pin.unwrap();
            let base = u[p];
            for v in &mut u {
                *v -= base;
            }
        }
    }
    let pattern = SparseSym::with_pattern(&mesh.adjacency());
    let energy_scale = |u: &[f64]| {
        let bulk: f64 = (0..mesh.n_triangles()).map(|t| mesh.areas()[t] * op.energy_density(&mesh.grad_of(t, u))).sum();
        bulk + dot(&load, u).abs()
    };
    let mut residuals = Vec::new();
    let mut energies = Vec::new();
    let mut gradient_steps = 0;
    for iteration in 0..=spec.max_iter {
        let eval = assemble(&op, mesh, &pattern, &load, &u, true)?;
        let g_free: Vec<f64> = free.iter().map(|&i| eval.gradient[i]).collect();
        let res = g_free.iter().fold(0.0_f64, |m, g| m.max(g.abs()));
        residuals.push(res);
        energies.push(eval.value);
        if res <= spec.newton_tol {
            if pin.is_some() {
                let mean = mean_value(mesh, &u);
                for v in &mut u {
                    *v -= mean;
                }
            }
            return Ok(NewtonReport { u, epsilon, iterations: iteration, residuals, energies, gradient_steps });
        }
        if iteration == spec.max_iter {
            break;
        }
        let h_free = eval.hessian.restrict(&free);
        let newton = EnvelopeCholesky::factor(&h_free).ok().map(|c| {
            let rhs: Vec<f64> = g_free.iter().map(|g| -g).collect();
            c.solve(&rhs)
        });
        let slack = 64.0 * f64::EPSILON * energy_scale(&u);
        let mut accepted = None;
        if let Some(d) = newton.filter(|d| dot(d, &g_free) < 0.0 && d.iter().all(|v| v.is_finite())) {
            accepted = line_search(&op, mesh, &load, &u, &free, &d, &g_free, eval.value, slack);
        }
        if accepted.is_none() {
            gradient_steps += 1;
            let diag = h_free.diagonal();
            let d: Vec<f64> = g_free.iter().zip(&diag).map(|(g, h)| -g / h.max(f64::MIN_POSITIVE)).collect();
            accepted = line_search(&op, mesh, &load, &u, &free, &d, &g_free, eval.value, slack);
        }
        match accepted {
            Some(next) => u = next,
            None => break,
        }
    }
    Err(Error::Convergence {
        epsilon,
        iterations: residuals.len().saturating_sub(1),
        last: residuals.last().copied().unwrap_or(f64::NAN),
        residuals,
    })
}

#[allow(clippy::too_many_arguments)]
fn line_search(
    op: &StressOperator,
    mesh: &Mesh,
    load: &[f64],
    u: &[f64],
    free: &[usize],
    d: &[f64],
    g: &[f64],
    e0: f64,
    slack: f64,
) -> Option<Vec<f64>> {
    let slope = dot(d, g);
    let mut alpha = 1.0;
    for _ in 0..MAX_HALVINGS {
        let mut trial = u.to_vec();
        for (k, &i) in free.iter().enumerate() {
            trial[i] += alpha * d[k];
        }
        let e = energy_value(op, mesh, load, &trial);
        if e <= e0 + ARMIJO * alpha * slope + slack {
            return Some(trial);
        }
        alpha *= 0.5;
    }
    None
}

#[derive(Clone, Debug)]
pub struct RungReport {
    pub epsilon: f64,
    pub iterations: usize,
    pub residual: f64,
    pub energy: f64,
    /// `|| A_eps(grad u_eps) - A_eps'(grad u_eps') ||_L2` against the previous rung.
    pub delta: Option<f64>,
    /// Same distance for the unregularized stress, used for the early stop.
    pub stress_change: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct ContinuationReport {
    pub u: Vec<f64>,
    pub rungs: Vec<RungReport>,
    /// Nodal solution after each rung, aligned with `rungs`.
    pub rung_solutions: Vec<Vec<f64>>,
    pub stopped_early: bool,
}

impl ContinuationReport {
    pub fn final_epsilon(&self) -> f64 {
        self.rungs.last().map_or(f64::NAN, |r| r.epsilon)
    }
}

/// Warm-started sweep down the epsilon ladder.
pub fn solve_continuation(spec: &ProblemSpec, mesh: &Mesh) -> Result<ContinuationReport> {
    spec.validate()?;
    let mut u = vec![0.0; mesh.n_vertices()];
    let mut rungs: Vec<RungReport> = Vec::new();
    let mut previous: Option<(Vec<[f64; 2]>, Vec<[f64; 2]>)> = None;
    let mut rung_solutions = Vec::new();
    let mut stopped_early = false;
    for &eps in &spec.epsilon_ladder {
        let report = solve_regularized(spec, mesh, eps, &u)?;
        u = report.u;
        let op = regularized(spec, eps)?;
        let reg_stress = stress_field(&op, mesh, &u);
        let plain_stress = stress_field(&spec.op, mesh, &u);
        let (delta, change) = match &previous {
            Some((reg, plain)) => (
                Some(l2_distance_cells(mesh, reg, &reg_stress)),
                Some(l2_distance_cells(mesh, plain, &plain_stress)),
            ),
            None => (None, None),
        };
        rungs.push(RungReport {
            epsilon: eps,
            iterations: report.iterations,
            residual: *report.residuals.last().unwrap(),
            energy: *report.energies.last().unwrap(),
            delta,
            stress_change: change,
        });
        rung_solutions.push(u.clone());
        previous = Some((reg_stress, plain_stress));
        if change.is_some_and(|c| c < EARLY_STOP) {
            stopped_early = eps != *spec.epsilon_ladder.last().unwrap();
            break;
        }
    }
    Ok(ContinuationReport { u, rungs, rung_solutions, stopped_early })
}
