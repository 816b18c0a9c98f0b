//! Two-point monotone convection fluxes `F_{K,σ}(a, b)` and the associated
//! numerical entropy fluxes.

use std::borrow::Cow;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::Point;
use crate::problem::Problem;

/// Tolerance on flux arguments outside `[0, u_max]`.
pub const DOMAIN_SLACK: f64 = 1e-12;
const GRID_POINTS: usize = 4096;
const SPEED_INFLATION: f64 = 1.01;

/// The geometric part of a face as seen from one cell: `m(σ)` and the unit
/// normal pointing out of that cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FaceGeometry {
    pub measure: f64,
    pub normal: Point,
}

impl FaceGeometry {
    pub fn new(measure: f64, normal: Point) -> Self {
        FaceGeometry { measure, normal }
    }

    /// The same face seen from the other side.
    pub fn flipped(self) -> Self {
        FaceGeometry { measure: self.measure, normal: [-self.normal[0], -self.normal[1]] }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum FluxKind {
    Godunov,
    Rusanov { lambda: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntropyKind {
    /// `Φ⁺ = F(a⊤k, b⊤k) - F(k, k)`
    Plus,
    /// `Φ⁻ = F(k, k) - F(a⊥k, b⊥k)`
    Minus,
    /// `Φ = F(a⊤k, b⊤k) - F(a⊥k, b⊥k)`
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FluxScheme {
    kind: FluxKind,
    problem: Problem,
    lipschitz: f64,
    /// `f·n` coefficients for the normals `+e₁, -e₁, +e₂, -e₂`.
    axis_polys: [Vec<f64>; 4],
}

impl FluxScheme {
    fn build(problem: &Problem, kind: FluxKind, lipschitz: f64) -> FluxScheme {
        let axis_polys = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]].map(|n| unit_poly(problem, n));
        FluxScheme { kind, problem: problem.clone(), lipschitz, axis_polys }
    }

    pub fn godunov(problem: &Problem) -> FluxScheme {
        FluxScheme::build(problem, FluxKind::Godunov, problem.flux_lipschitz)
    }

    /// Rusanov flux with speed `lambda`, or `1.01·sup|f'|` sampled on 4096
    /// points when `None`.
    pub fn rusanov(problem: &Problem, lambda: Option<f64>) -> FluxScheme {
        let lambda = lambda.unwrap_or_else(|| default_speed(problem));
        let m = problem.flux_lipschitz;
        // ∂F/∂a and ∂F/∂b are bounded by (M + λ)/2 per unit measure.
        FluxScheme::build(problem, FluxKind::Rusanov { lambda }, m.max(0.5 * (m + lambda.abs())))
    }

    pub fn from_kind(problem: &Problem, kind: FluxKind) -> FluxScheme {
        match kind {
            FluxKind::Godunov => FluxScheme::godunov(problem),
            FluxKind::Rusanov { lambda } => FluxScheme::rusanov(problem, Some(lambda)),
        }
    }

    pub fn kind(&self) -> FluxKind {
        self.kind
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            FluxKind::Godunov => "godunov",
            FluxKind::Rusanov { .. } => "rusanov",
        }
    }

    pub fn problem(&self) -> &Problem {
        &self.problem
    }

    /// Lipschitz constant of the scheme per unit face measure.
    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    fn check(&self, v: f64) -> Result<()> {
        if v >= -DOMAIN_SLACK && v <= self.problem.u_max + DOMAIN_SLACK {
            Ok(())
        } else {
            Err(Error::Domain { value: v, u_max: self.problem.u_max })
        }
    }

    /// `F_{K,σ}(a, b)`.
    pub fn face_flux(&self, geom: FaceGeometry, a: f64, b: f64) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.eval(&self.normal_poly(geom), geom, a, b))
    }

    /// Coefficients of `f(s)·n`.
    fn normal_poly(&self, geom: FaceGeometry) -> Cow<'_, [f64]> {
        match geom.normal {
            [1.0, 0.0] => Cow::Borrowed(&self.axis_polys[0]),
            [-1.0, 0.0] => Cow::Borrowed(&self.axis_polys[1]),
            [0.0, 1.0] => Cow::Borrowed(&self.axis_polys[2]),
            [0.0, -1.0] => Cow::Borrowed(&self.axis_polys[3]),
            n => Cow::Owned(unit_poly(&self.problem, n)),
        }
    }

    /// `m(σ)·F_unit(a, b)` where `g` holds the coefficients of `f·n`.
    fn eval(&self, g: &[f64], geom: FaceGeometry, a: f64, b: f64) -> f64 {
        let unit = match self.kind {
            FluxKind::Godunov => {
                if a <= b {
                    extremum(g, a, b, false)
                } else {
                    extremum(g, b, a, true)
                }
            }
            FluxKind::Rusanov { lambda } => 0.5 * (horner(g, a) + horner(g, b)) + 0.5 * lambda * (a - b),
        };
        geom.measure * unit
    }

    /// Evaluator for repeated fluxes across one face.
    pub fn prepare(&self, geom: FaceGeometry) -> PreparedFace<'_> {
        PreparedFace { scheme: self, geom, g: self.normal_poly(geom) }
    }

    /// `(∂F/∂a, ∂F/∂b)`: exact for Rusanov, one-sided differences with step
    /// `1e-7·u_max` for Godunov (backward near the top of the range).
    pub fn face_flux_partials(&self, geom: FaceGeometry, a: f64, b: f64) -> Result<(f64, f64)> {
        self.check(a)?;
        self.check(b)?;
        let g = self.normal_poly(geom);
        match self.kind {
            FluxKind::Rusanov { lambda } => {
                let m = geom.measure;
                Ok((0.5 * m * (horner_derivative(&g, a) + lambda), 0.5 * m * (horner_derivative(&g, b) - lambda)))
            }
            FluxKind::Godunov => {
                let u_max = self.problem.u_max;
                let step = 1e-7 * u_max;
                let f0 = self.eval(&g, geom, a, b);
                let da = if a + step <= u_max { step } else { -step };
                let db = if b + step <= u_max { step } else { -step };
                let fa = self.eval(&g, geom, a + da, b);
                let fb = self.eval(&g, geom, a, b + db);
                Ok(((fa - f0) / da, (fb - f0) / db))
            }
        }
    }

    pub fn entropy_face_flux(&self, geom: FaceGeometry, a: f64, b: f64, k: f64, kind: EntropyKind) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        self.check(k)?;
        let g = self.normal_poly(geom);
        let f = |x: f64, y: f64| self.eval(&g, geom, x, y);
        Ok(match kind {
            EntropyKind::Plus => f(a.max(k), b.max(k)) - f(k, k),
            EntropyKind::Minus => f(k, k) - f(a.min(k), b.min(k)),
            EntropyKind::Full => f(a.max(k), b.max(k)) - f(a.min(k), b.min(k)),
        })
    }

    /// Sampled verification of monotonicity, conservativity, consistency,
    /// the Lipschitz bound and the sup bound on a `samples × samples` grid.
    pub fn check_flux_axioms(&self, samples: usize) -> FluxAxiomReport {
        let samples = samples.max(8);
        let u_max = self.problem.u_max;
        let grid: Vec<f64> = (0..samples).map(|i| u_max * i as f64 / (samples - 1) as f64).collect();
        let mut normals = vec![[1.0, 0.0], [-1.0, 0.0]];
        if self.problem.flux.len() > 1 {
            normals.extend([[0.0, 1.0], [0.0, -1.0]]);
        }
        let mut monotonicity: f64 = 0.0;
        let mut conservativity: f64 = 0.0;
        let mut consistency: f64 = 0.0;
        let mut lipschitz: f64 = 0.0;
        let mut bound: f64 = 0.0;
        let n = samples;
        for &measure in &[1.0, 0.5] {
            for &normal in &normals {
                let geom = FaceGeometry::new(measure, normal);
                let g = self.normal_poly(geom);
                let back = self.normal_poly(geom.flipped());
                let table: Vec<f64> =
                    (0..n * n).map(|ij| self.eval(&g, geom, grid[ij / n], grid[ij % n])).collect();
                let at = |i: usize, j: usize| table[i * n + j];
                let lip = measure * self.lipschitz;
                let cap = (self.problem.flux_sup + self.lipschitz * u_max) * measure;
                for i in 0..n {
                    for j in 0..n {
                        let v = at(i, j);
                        let reverse = self.eval(&back, geom.flipped(), grid[j], grid[i]);
                        conservativity = conservativity.max((v + reverse).abs());
                        bound = bound.max(v.abs() - cap);
                        if i + 1 < n {
                            let w = at(i + 1, j);
                            monotonicity = monotonicity.max(v - w);
                            lipschitz = lipschitz.max((w - v).abs() / (grid[i + 1] - grid[i]) - lip);
                        }
                        if j + 1 < n {
                            let w = at(i, j + 1);
                            monotonicity = monotonicity.max(w - v);
                            lipschitz = lipschitz.max((w - v).abs() / (grid[j + 1] - grid[j]) - lip);
                        }
                    }
                    let s = grid[i];
                    let exact = measure * self.problem.flux_normal(s, normal);
                    consistency = consistency.max((at(i, i) - exact).abs());
                }
            }
        }
        let check = |worst: f64, tolerance: f64| AxiomCheck { worst: worst.max(0.0), tolerance, pass: worst <= tolerance };
        let monotonicity = check(monotonicity, AXIOM_TOL);
        let conservativity = check(conservativity, 0.0);
        let consistency = check(consistency, 1e-12);
        let lipschitz = check(lipschitz, AXIOM_TOL * self.lipschitz.max(1.0));
        let bound = check(bound, AXIOM_TOL);
        FluxAxiomReport {
            scheme: self.name().to_string(),
            samples,
            lipschitz_constant: self.lipschitz,
            pass: monotonicity.pass && conservativity.pass && consistency.pass && lipschitz.pass && bound.pass,
            monotonicity,
            conservativity,
            consistency,
            lipschitz,
            bound,
        }
    }
}

/// A scheme bound to one face geometry.
#[derive(Debug, Clone)]
pub struct PreparedFace<'a> {
    scheme: &'a FluxScheme,
    geom: FaceGeometry,
    g: Cow<'a, [f64]>,
}

impl PreparedFace<'_> {
    pub fn flux(&self, a: f64, b: f64) -> Result<f64> {
        self.scheme.check(a)?;
        self.scheme.check(b)?;
        Ok(self.scheme.eval(&self.g, self.geom, a, b))
    }
}

const AXIOM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AxiomCheck {
    /// Largest excess over the axiom's bound (0 when satisfied).
    pub worst: f64,
    pub tolerance: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FluxAxiomReport {
    pub scheme: String,
    pub samples: usize,
    pub lipschitz_constant: f64,
    pub monotonicity: AxiomCheck,
    pub conservativity: AxiomCheck,
    pub consistency: AxiomCheck,
    pub lipschitz: AxiomCheck,
    pub bound: AxiomCheck,
    pub pass: bool,
}

fn unit_poly(problem: &Problem, normal: Point) -> Vec<f64> {
    let len = problem.flux.iter().map(|p| p.0.len()).max().unwrap_or(0);
    let mut g = vec![0.0; len];
    for (p, &n) in problem.flux.iter().zip(&normal) {
        if n == 0.0 {
            continue;
        }
        for (gj, &c) in g.iter_mut().zip(&p.0) {
            *gj += n * c;
        }
    }
    g
}

fn default_speed(problem: &Problem) -> f64 {
    let mut sup: f64 = 0.0;
    for i in 0..GRID_POINTS {
        let u = problem.u_max * i as f64 / (GRID_POINTS - 1) as f64;
        let d = problem.flux_derivative(u);
        sup = sup.max((d[0] * d[0] + d[1] * d[1]).sqrt());
    }
    SPEED_INFLATION * sup
}

fn horner(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &cj| acc * x + cj)
}

fn horner_derivative(c: &[f64], x: f64) -> f64 {
    c.iter().enumerate().skip(1).rev().fold(0.0, |acc, (j, &cj)| acc * x + j as f64 * cj)
}

/// Min (or max) of the polynomial `c` over `[lo, hi]`.
fn extremum(c: &[f64], lo: f64, hi: f64, max: bool) -> f64 {
    let pick = |x: f64, y: f64| if max { x.max(y) } else { x.min(y) };
    let mut best = pick(horner(c, lo), horner(c, hi));
    if lo == hi {
        return best;
    }
    let degree = c.iter().rposition(|&v| v != 0.0).unwrap_or(0);
    match degree {
        0 | 1 => {}
        2 => {
            let s = -c[1] / (2.0 * c[2]);
            if s > lo && s < hi {
                best = pick(best, horner(c, s));
            }
        }
        3 => {
            // g' = 3 c3 s² + 2 c2 s + c1
            let (qa, qb, qc) = (3.0 * c[3], 2.0 * c[2], c[1]);
            let disc = qb * qb - 4.0 * qa * qc;
            if disc >= 0.0 {
                let r = disc.sqrt();
                for s in [(-qb + r) / (2.0 * qa), (-qb - r) / (2.0 * qa)] {
                    if s > lo && s < hi {
                        best = pick(best, horner(c, s));
                    }
                }
            }
        }
        _ => {
            let w = (hi - lo) / GRID_POINTS as f64;
            let mut arg = lo;
            for i in 0..=GRID_POINTS {
                let s = lo + w * i as f64;
                let v = horner(c, s);
                if pick(best, v) != best {
                    best = v;
                    arg = s;
                }
            }
            let (a, b) = ((arg - w).max(lo), (arg + w).min(hi));
            let w2 = (b - a) / GRID_POINTS as f64;
            for i in 0..=GRID_POINTS {
                best = pick(best, horner(c, a + w2 * i as f64));
            }
        }
    }
    best
}
