//! Discrete evaluation of the continuous approximate entropy inequality
//!
//! ```text
//! ∫∫ η_k(u) ξ_t + (Φ_k(u) - ∇_𝒪 η_{φ(k)}(φ(u)))·∇ξ + ∫ η_k(u₀) ξ(0) + ∫∫_{∂Ω} |f(k)·n| ξ
//! ```
//!
//! for separable test functions `ξ(t, x) = θ(t) ζ(x)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{FaceKind, Mesh, Point};
use crate::problem::Problem;
use crate::solver::Trajectory;

use super::entropy::sign;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TimeWeight {
    Constant,
    /// `e^{-rate·t}`
    Decay { rate: f64 },
    /// `(1 - t/end)⁺`
    Linear { end: f64 },
}

impl TimeWeight {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            TimeWeight::Constant => 1.0,
            TimeWeight::Decay { rate } => (-rate * t).exp(),
            TimeWeight::Linear { end } => (1.0 - t / end).max(0.0),
        }
    }

    /// `∫₀^t θ`.
    pub fn integral(&self, t: f64) -> f64 {
        match *self {
            TimeWeight::Constant => t,
            TimeWeight::Decay { rate: 0.0 } => t,
            TimeWeight::Decay { rate } => (1.0 - (-rate * t).exp()) / rate,
            TimeWeight::Linear { end } => {
                let s = t.min(end);
                s - 0.5 * s * s / end
            }
        }
    }

    fn check(&self) -> Result<()> {
        let ok = match *self {
            TimeWeight::Constant => true,
            TimeWeight::Decay { rate } => rate.is_finite(),
            TimeWeight::Linear { end } => end > 0.0 && end.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidTestFunction(format!("bad time weight {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SpaceWeight {
    Constant,
    /// `exp(-|x - center|² / width²)`
    Gaussian { center: Point, width: f64 },
    /// `1 + amplitude·cos(wavenumber·π·(x₁ - a)/(b - a))` on the domain box.
    Cosine { amplitude: f64, wavenumber: f64 },
}

impl SpaceWeight {
    pub fn eval(&self, x: Point, bounds: (Point, Point)) -> f64 {
        match *self {
            SpaceWeight::Constant => 1.0,
            SpaceWeight::Gaussian { center, width } => {
                let r2 = (x[0] - center[0]).powi(2) + (x[1] - center[1]).powi(2);
                (-r2 / (width * width)).exp()
            }
            SpaceWeight::Cosine { amplitude, wavenumber } => {
                let (lo, hi) = bounds;
                1.0 + amplitude * (wavenumber * std::f64::consts::PI * (x[0] - lo[0]) / (hi[0] - lo[0])).cos()
            }
        }
    }

    pub fn gradient(&self, x: Point, bounds: (Point, Point)) -> Point {
        match *self {
            SpaceWeight::Constant => [0.0, 0.0],
            SpaceWeight::Gaussian { center, width } => {
                let z = self.eval(x, bounds);
                let w2 = width * width;
                [-2.0 * (x[0] - center[0]) / w2 * z, -2.0 * (x[1] - center[1]) / w2 * z]
            }
            SpaceWeight::Cosine { amplitude, wavenumber } => {
                let (lo, hi) = bounds;
                let k = wavenumber * std::f64::consts::PI / (hi[0] - lo[0]);
                [-amplitude * k * (k * (x[0] - lo[0])).sin(), 0.0]
            }
        }
    }

    fn check(&self) -> Result<()> {
        let ok = match *self {
            SpaceWeight::Constant => true,
            SpaceWeight::Gaussian { center, width } => width > 0.0 && center.iter().all(|c| c.is_finite()),
            SpaceWeight::Cosine { amplitude, wavenumber } => amplitude.is_finite() && wavenumber.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidTestFunction(format!("bad space weight {self:?}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TestFunction {
    pub theta: TimeWeight,
    pub zeta: SpaceWeight,
}

impl TestFunction {
    /// Three fixed test functions adapted to the domain box and horizon.
    pub fn defaults(bounds: (Point, Point), horizon: f64) -> Vec<TestFunction> {
        let (lo, hi) = bounds;
        let mid = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
        let width = 0.25 * (hi[0] - lo[0]);
        vec![
            TestFunction { theta: TimeWeight::Constant, zeta: SpaceWeight::Gaussian { center: mid, width } },
            TestFunction { theta: TimeWeight::Decay { rate: 1.0 }, zeta: SpaceWeight::Cosine { amplitude: 0.5, wavenumber: 2.0 } },
            TestFunction { theta: TimeWeight::Linear { end: horizon }, zeta: SpaceWeight::Constant },
        ]
    }
}

const GAUSS3: [(f64, f64); 3] = [(-0.774_596_669_241_483_4, 5.0 / 9.0), (0.0, 8.0 / 9.0), (0.774_596_669_241_483_4, 5.0 / 9.0)];

/// `∫_σ ζ` over a boundary face (a point in 1D, a segment in 2D).
fn face_integral(mesh: &Mesh, f: usize, zeta: &SpaceWeight, bounds: (Point, Point), check: &mut dyn FnMut(f64) -> Result<()>) -> Result<f64> {
    let face = mesh.face(f);
    if mesh.dimension() == 1 {
        let z = zeta.eval(face.center, bounds);
        check(z)?;
        return Ok(face.measure * z);
    }
    let tangent = [-face.normal[1], face.normal[0]];
    let mut acc = 0.0;
    for (s, w) in GAUSS3 {
        let off = 0.5 * face.measure * s;
        let x = [face.center[0] + off * tangent[0], face.center[1] + off * tangent[1]];
        let z = zeta.eval(x, bounds);
        check(z)?;
        acc += 0.5 * face.measure * w * z;
    }
    Ok(acc)
}

/// Value of the left-hand side for entropy level `k` and test function `ξ = θ ζ`.
pub fn continuous_entropy_functional(traj: &Trajectory, problem: &Problem, k: f64, test: &TestFunction) -> Result<f64> {
    test.theta.check()?;
    test.zeta.check()?;
    let mesh = &*traj.mesh;
    let bounds = mesh.bounds();
    let dim = mesh.dimension() as f64;
    let mut check = |v: f64| -> Result<()> {
        if v < 0.0 || !v.is_finite() {
            Err(Error::InvalidTestFunction(format!("negative or non-finite value {v} at a quadrature point")))
        } else {
            Ok(())
        }
    };

    let zeta_cells: Vec<f64> = mesh.cells().iter().map(|c| test.zeta.eval(c.center, bounds)).collect();
    for &z in &zeta_cells {
        check(z)?;
    }
    let grad_cells: Vec<Point> = mesh.cells().iter().map(|c| test.zeta.gradient(c.center, bounds)).collect();
    let diamonds: Vec<(usize, usize, usize, f64, Point)> = mesh
        .interior_faces()
        .map(|face| {
            let FaceKind::Interior { left, right } = face.kind else { unreachable!() };
            let centroid = mesh.diamond_centroid(face.id).unwrap();
            check(test.zeta.eval(centroid, bounds))?;
            let g = test.zeta.gradient(centroid, bounds);
            let md = face.center_distance * face.measure / dim;
            Ok((face.id, left, right, md, g))
        })
        .collect::<Result<_>>()?;

    let eta = |u: f64| (u - k).abs();
    let fk = problem.flux_vector(k);
    let phi_k = problem.phi(k);
    let mut total = 0.0;

    for n in 0..traj.steps() {
        let (t0, t1) = (n as f64 * traj.dt, (n + 1) as f64 * traj.dt);
        let (th0, th1, thm) = (test.theta.eval(t0), test.theta.eval(t1), test.theta.eval(0.5 * (t0 + t1)));
        check(th0)?;
        check(th1)?;
        check(thm)?;
        let u = &traj.fields[n + 1].values;
        for c in mesh.cells() {
            let v = u[c.id];
            total += c.measure * eta(v) * zeta_cells[c.id] * (th1 - th0);
            let fu = problem.flux_vector(v);
            let s = sign(v - k);
            let flux = [s * (fu[0] - fk[0]), s * (fu[1] - fk[1])];
            let g = grad_cells[c.id];
            total += thm * traj.dt * c.measure * (flux[0] * g[0] + flux[1] * g[1]);
        }
        for &(f, left, right, md, g) in &diamonds {
            let face = mesh.face(f);
            let (wl, wr) = ((problem.phi(u[left]) - phi_k).abs(), (problem.phi(u[right]) - phi_k).abs());
            let s = dim * (wr - wl) / face.center_distance;
            let grad = [s * face.normal[0], s * face.normal[1]];
            total -= thm * traj.dt * md * (grad[0] * g[0] + grad[1] * g[1]);
        }
    }

    let th0 = test.theta.eval(0.0);
    check(th0)?;
    let u0 = &traj.fields[0].values;
    for c in mesh.cells() {
        total += c.measure * eta(u0[c.id]) * th0 * zeta_cells[c.id];
    }

    let theta_int = test.theta.integral(traj.final_time());
    for face in mesh.boundary_faces() {
        let fkn = (fk[0] * face.normal[0] + fk[1] * face.normal[1]).abs();
        let zi = face_integral(mesh, face.id, &test.zeta, bounds, &mut check)?;
        total += theta_int * fkn * zi;
    }
    Ok(total)
}
