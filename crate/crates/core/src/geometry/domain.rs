use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_on;

/// Samples used for convexity and diameter checks.
const SHAPE_SAMPLES: usize = 4096;

#[derive(Clone, Debug, PartialEq)]
pub enum DomainKind {
    Disk { radius: f64 },
    Ellipse { a: f64, b: f64 },
    /// `|x/a|^m + |y/b|^m = 1`, `m` even.
    Superellipse { a: f64, b: f64, m: u32 },
    /// Counterclockwise vertices.
    Polygon { vertices: Vec<[f64; 2]> },
}

/// A planar domain centred at the origin with boundary `gamma: [0, 2 pi) -> R^2`.
///
/// Smooth kinds are star-shaped about the origin; `gamma(t) = r(t) (cos t, sin t)`
/// for the superellipse and the usual trigonometric form for disks and ellipses.
/// Polygons are parameterized proportionally to arc length.
#[derive(Clone, Debug)]
pub struct Domain2D {
    kind: DomainKind,
    convex: bool,
    diameter: f64,
    perimeter: f64,
    /// Cumulative perimeter at each polygon vertex.
    cumulative: Vec<f64>,
}

impl Domain2D {
    pub fn disk(radius: f64) -> Result<Self> {
        positive("radius", radius)?;
        Self::build(DomainKind::Disk { radius })
    }

    pub fn ellipse(a: f64, b: f64) -> Result<Self> {
        positive("a", a)?;
        positive("b", b)?;
        Self::build(DomainKind::Ellipse { a, b })
    }

    pub fn superellipse(a: f64, b: f64, m: u32) -> Result<Self> {
        positive("a", a)?;
        positive("b", b)?;
        if m < 2 || m % 2 != 0 {
            return Err(Error::InvalidInput(format!("superellipse exponent must be even and >= 2, got {m}")));
        }
        Self::build(DomainKind::Superellipse { a, b, m })
    }

    pub fn polygon(vertices: Vec<[f64; 2]>) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::InvalidInput("a polygon needs at least three vertices".into()));
        }
        let area = shoelace(&vertices);
        if area <= 0.0 {
            return Err(Error::InvalidInput("polygon vertices must be listed counterclockwise".into()));
        }
        Self::build(DomainKind::Polygon { vertices })
    }

    /// Axis-aligned square `[-side/2, side/2]^2`.
    pub fn square(side: f64) -> Result<Self> {
        positive("side", side)?;
        let s = 0.5 * side;
        Self::polygon(vec![[-s, -s], [s, -s], [s, s], [-s, s]])
    }

    /// Regular polygon with `k` vertices on the circle of radius `circumradius`, first vertex on the x-axis.
    pub fn regular_polygon(k: usize, circumradius: f64) -> Result<Self> {
        positive("circumradius", circumradius)?;
        if k < 3 {
            return Err(Error::InvalidInput("a regular polygon needs k >= 3".into()));
        }
        let vertices = (0..k)
            .map(|i| {
                let t = 2.0 * PI * i as f64 / k as f64;
                [circumradius * t.cos(), circumradius * t.sin()]
            })
            .collect();
        Self::polygon(vertices)
    }

    fn build(kind: DomainKind) -> Result<Self> {
        let mut dom = Self { kind, convex: false, diameter: 0.0, perimeter: 0.0, cumulative: Vec::new() };
        if let DomainKind::Polygon { vertices } = &dom.kind {
            let mut acc = vec![0.0];
            for i in 0..vertices.len() {
                let (p, q) = (vertices[i], vertices[(i + 1) % vertices.len()]);
                acc.push(acc[i] + dist(p, q));
            }
            dom.perimeter = *acc.last().unwrap();
            dom.cumulative = acc;
            dom.convex = polygon_convex(vertices);
            dom.diameter = vertices
                .iter()
                .flat_map(|p| vertices.iter().map(move |q| dist(*p, *q)))
                .fold(0.0, f64::max);
        } else {
            let dt = 2.0 * PI / SHAPE_SAMPLES as f64;
            let mut perimeter = 0.0;
            let mut convex = true;
            let mut diameter: f64 = 0.0;
            for k in 0..SHAPE_SAMPLES {
                let t = k as f64 * dt;
                perimeter += dom.speed(t) * dt;
                if dom.curvature(t)? < -1e-12 {
                    convex = false;
                }
                // every smooth kind is centrally symmetric
                diameter = diameter.max(2.0 * norm(dom.point(t)));
            }
            dom.perimeter = perimeter;
            dom.convex = convex;
            dom.diameter = diameter;
        }
        Ok(dom)
    }

    pub fn kind(&self) -> &DomainKind {
        &self.kind
    }

    pub fn is_convex(&self) -> bool {
        self.convex
    }

    pub fn is_polygon(&self) -> bool {
        matches!(self.kind, DomainKind::Polygon { .. })
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn perimeter(&self) -> f64 {
        self.perimeter
    }

    pub fn label(&self) -> String {
        match &self.kind {
            DomainKind::Disk { radius } => format!("disk({radius})"),
            DomainKind::Ellipse { a, b } => format!("ellipse({a};{b})"),
            DomainKind::Superellipse { a, b, m } => format!("superellipse({a};{b};{m})"),
            DomainKind::Polygon { vertices } => format!("polygon({})", vertices.len()),
        }
    }

    pub fn polygon_vertices(&self) -> Option<&[[f64; 2]]> {
        match &self.kind {
            DomainKind::Polygon { vertices } => Some(vertices),
            _ => None,
        }
    }

    /// `gamma(t)`.
    pub fn point(&self, t: f64) -> [f64; 2] {
        self.derivs(t).0
    }

    /// `gamma'(t)`.
    pub fn tangent(&self, t: f64) -> [f64; 2] {
        self.derivs(t).1
    }

    /// `|gamma'(t)|`.
    pub fn speed(&self, t: f64) -> f64 {
        norm(self.tangent(t))
    }

    /// Outward unit normal: the unit tangent rotated by -90 degrees.
    pub fn normal(&self, t: f64) -> [f64; 2] {
        let d = self.tangent(t);
        let s = norm(d);
        [d[1] / s, -d[0] / s]
    }

    pub fn unit_tangent(&self, t: f64) -> [f64; 2] {
        let d = self.tangent(t);
        let s = norm(d);
        [d[0] / s, d[1] / s]
    }

    /// Signed curvature, positive where the domain is locally convex.
    pub fn curvature(&self, t: f64) -> Result<f64> {
        if self.is_polygon() {
            return Err(Error::UnsupportedKind("curvature is not defined on polygon boundaries".into()));
        }
        let (_, d1, d2) = self.derivs(t);
        Ok((d1[0] * d2[1] - d1[1] * d2[0]) / norm(d1).powi(3))
    }

    /// Point, first and second derivative of `gamma` at `t`.
    pub fn derivs(&self, t: f64) -> ([f64; 2], [f64; 2], [f64; 2]) {
        let t = t.rem_euclid(2.0 * PI);
        let (c, s) = (t.cos(), t.sin());
        match &self.kind {
            DomainKind::Disk { radius: r } => ([r * c, r * s], [-r * s, r * c], [-r * c, -r * s]),
            DomainKind::Ellipse { a, b } => ([a * c, b * s], [-a * s, b * c], [-a * c, -b * s]),
            DomainKind::Superellipse { a, b, m } => {
                let (r, r1, r2) = superellipse_radius(*a, *b, *m as i32, t);
                (
                    [r * c, r * s],
                    [r1 * c - r * s, r1 * s + r * c],
                    [r2 * c - 2.0 * r1 * s - r * c, r2 * s + 2.0 * r1 * c - r * s],
                )
            }
            DomainKind::Polygon { vertices } => {
                let arc = t / (2.0 * PI) * self.perimeter;
                let n = vertices.len();
                let i = match self.cumulative.binary_search_by(|v| v.partial_cmp(&arc).unwrap()) {
                    Ok(i) => i.min(n - 1),
                    Err(i) => (i - 1).min(n - 1),
                };
                let (p, q) = (vertices[i], vertices[(i + 1) % n]);
                let len = self.cumulative[i + 1] - self.cumulative[i];
                let frac = (arc - self.cumulative[i]) / len;
                let scale = self.perimeter / (2.0 * PI);
                (
                    [p[0] + frac * (q[0] - p[0]), p[1] + frac * (q[1] - p[1])],
                    [(q[0] - p[0]) / len * scale, (q[1] - p[1]) / len * scale],
                    [0.0, 0.0],
                )
            }
        }
    }

    /// Parameter of polygon vertex `i`.
    pub fn vertex_parameter(&self, i: usize) -> Option<f64> {
        if !self.is_polygon() {
            return None;
        }
        Some(2.0 * PI * self.cumulative[i] / self.perimeter)
    }

    /// Radial extent `max |gamma|`.
    pub fn outer_radius(&self) -> f64 {
        match &self.kind {
            DomainKind::Polygon { vertices } => vertices.iter().map(|v| norm(*v)).fold(0.0, f64::max),
            _ => 0.5 * self.diameter,
        }
    }

    /// Area by the shoelace formula on the polygon or on a fine boundary sampling.
    pub fn area(&self) -> f64 {
        match &self.kind {
            DomainKind::Disk { radius } => PI * radius * radius,
            DomainKind::Ellipse { a, b } => PI * a * b,
            DomainKind::Polygon { vertices } => shoelace(vertices),
            DomainKind::Superellipse { .. } => {
                let n = SHAPE_SAMPLES;
                let dt = 2.0 * PI / n as f64;
                (0..n)
                    .map(|k| {
                        let (p, d, _) = self.derivs(k as f64 * dt);
                        0.5 * (p[0] * d[1] - p[1] * d[0]) * dt
                    })
                    .sum()
            }
        }
    }

    /// Distance from `x` to the boundary, estimated on a dense sampling.
    pub fn distance_to_boundary(&self, x: [f64; 2]) -> f64 {
        let n = SHAPE_SAMPLES;
        let mut best = f64::INFINITY;
        let mut best_t = 0.0;
        for k in 0..n {
            let t = 2.0 * PI * k as f64 / n as f64;
            let d = dist(self.point(t), x);
            if d < best {
                best = d;
                best_t = t;
            }
        }
        let step = 2.0 * PI / n as f64;
        let (_, refined) = crate::quadrature::golden_max(|t| -dist(self.point(t), x), best_t - step, best_t + step, 1e-12);
        best.min(-refined)
    }

    /// Tensor-product quadrature on the domain.
    ///
    /// Smooth kinds use the star map `(rho, t) -> rho gamma(t)` with `n` Gauss
    /// points in `rho` and `n` trapezoid points in `t`. Polygons use a Gauss
    /// product rule on the collapsed fan triangles from the origin.
    pub fn area_quadrature(&self, n: usize) -> Vec<([f64; 2], f64)> {
        let (rho, rw) = gauss_legendre_on(n, 0.0, 1.0);
        let mut out = Vec::with_capacity(n * n);
        match &self.kind {
            DomainKind::Polygon { vertices } => {
                let k = vertices.len();
                let per_edge = (n / k).max(2);
                let (sv, sw) = gauss_legendre_on(per_edge.max(n / 2), 0.0, 1.0);
                for i in 0..k {
                    let (p, q) = (vertices[i], vertices[(i + 1) % k]);
                    let jac = (p[0] * q[1] - p[1] * q[0]).abs();
                    for (r, wr) in rho.iter().zip(&rw) {
                        for (s, ws) in sv.iter().zip(&sw) {
                            let e = [p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])];
                            out.push(([r * e[0], r * e[1]], wr * ws * r * jac));
                        }
                    }
                }
            }
            _ => {
                let dt = 2.0 * PI / n as f64;
                for j in 0..n {
                    let t = (j as f64 + 0.5) * dt;
                    let (g, d, _) = self.derivs(t);
                    let cross = g[0] * d[1] - g[1] * d[0];
                    for (r, wr) in rho.iter().zip(&rw) {
                        out.push(([r * g[0], r * g[1]], wr * r * cross * dt));
                    }
                }
            }
        }
        out
    }

    /// Whether `x` lies in the closed domain (star-shaped test against the boundary radius).
    pub fn contains(&self, x: [f64; 2]) -> bool {
        match &self.kind {
            DomainKind::Disk { radius } => norm(x) <= radius * (1.0 + 1e-12),
            DomainKind::Ellipse { a, b } => (x[0] / a).powi(2) + (x[1] / b).powi(2) <= 1.0 + 1e-12,
            DomainKind::Superellipse { a, b, m } => {
                (x[0] / a).abs().powi(*m as i32) + (x[1] / b).abs().powi(*m as i32) <= 1.0 + 1e-12
            }
            DomainKind::Polygon { vertices } => {
                let k = vertices.len();
                (0..k).all(|i| {
                    let (p, q) = (vertices[i], vertices[(i + 1) % k]);
                    (q[0] - p[0]) * (x[1] - p[1]) - (q[1] - p[1]) * (x[0] - p[0]) >= -1e-12
                })
            }
        }
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::InvalidInput(format!("{name} must be positive and finite, got {v}")));
    }
    Ok(())
}

pub(crate) fn norm(v: [f64; 2]) -> f64 {
    v[0].hypot(v[1])
}

pub(crate) fn dist(p: [f64; 2], q: [f64; 2]) -> f64 {
    (p[0] - q[0]).hypot(p[1] - q[1])
}

fn shoelace(v: &[[f64; 2]]) -> f64 {
    let n = v.len();
    0.5 * (0..n).map(|i| v[i][0] * v[(i + 1) % n][1] - v[(i + 1) % n][0] * v[i][1]).sum::<f64>()
}

fn polygon_convex(v: &[[f64; 2]]) -> bool {
    let n = v.len();
    (0..n).all(|i| {
        let (a, b, c) = (v[i], v[(i + 1) % n], v[(i + 2) % n]);
        (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]) >= -1e-12
    })
}

/// `r(t) = F(t)^(-1/m)` with `F = (cos t / a)^m + (sin t / b)^m`, and its first two derivatives.
fn superellipse_radius(a: f64, b: f64, m: i32, t: f64) -> (f64, f64, f64) {
    let (c, s) = (t.cos(), t.sin());
    let (u, v) = (c / a, s / b);
    let (du, dv) = (-s / a, c / b);
    let mf = m as f64;
    let f = u.powi(m) + v.powi(m);
    let f1 = mf * (u.powi(m - 1) * du + v.powi(m - 1) * dv);
    // d/dt of u^(m-1) du = (m-1) u^(m-2) du^2 + u^(m-1) (-u)
    let f2 = mf * ((mf - 1.0) * (u.powi(m - 2) * du * du + v.powi(m - 2) * dv * dv) - u.powi(m) - v.powi(m));
    let e = -1.0 / mf;
    let r = f.powf(e);
    let r1 = e * f.powf(e - 1.0) * f1;
    let r2 = e * ((e - 1.0) * f.powf(e - 2.0) * f1 * f1 + f.powf(e - 1.0) * f2);
    (r, r1, r2)
}
