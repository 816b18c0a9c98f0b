//! Model data: convective flux `f`, diffusion `φ`, the invariant interval
//! `[0, u_max]`, the initial datum and the time horizon.
//!
//! Fluxes are polynomials per space component and the diffusion belongs to
//! the family `φ(u) = c·((u - u_c)⁺)^p`, so every problem has an exact,
//! serializable description. `φ(0) = 0` holds for every member.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::mesh::{Cell, Point};

/// Grid size used to estimate declared constants of user-supplied problems.
const CONSTANT_SAMPLES: usize = 8193;
/// Inflation applied to sampled suprema, which can only undershoot.
const SAMPLED_INFLATION: f64 = 1.01;

/// Polynomial with ascending coefficients: `c[0] + c[1] u + c[2] u² + …`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Polynomial(pub Vec<f64>);

impl Polynomial {
    pub fn eval(&self, u: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * u + c)
    }

    pub fn derivative_at(&self, u: f64) -> f64 {
        self.0
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (j, &c)| acc * u + j as f64 * c)
    }

    pub fn coeff(&self, j: usize) -> f64 {
        self.0.get(j).copied().unwrap_or(0.0)
    }

    /// Degree ignoring trailing zero coefficients (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.0.iter().rposition(|&c| c != 0.0).unwrap_or(0)
    }
}

/// `φ(u) = c·((u - u_c)⁺)^p` with `p ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Diffusion {
    pub c: f64,
    pub p: f64,
    pub u_c: f64,
}

impl Diffusion {
    pub fn eval(&self, u: f64) -> f64 {
        let x = u - self.u_c;
        if x <= 0.0 || self.c == 0.0 {
            return 0.0;
        }
        self.c * pow(x, self.p)
    }

    /// One-sided right derivative; the only kink is at `u_c`.
    pub fn right_derivative(&self, u: f64) -> f64 {
        let x = u - self.u_c;
        if x < 0.0 || self.c == 0.0 {
            return 0.0;
        }
        if self.p == 1.0 {
            self.c
        } else {
            self.c * self.p * pow(x, self.p - 1.0)
        }
    }

    /// Lipschitz constant on `[0, u_max]`.
    pub fn lipschitz(&self, u_max: f64) -> f64 {
        if u_max <= self.u_c {
            return 0.0;
        }
        self.c.abs() * self.p * pow(u_max - self.u_c, self.p - 1.0)
    }
}

fn pow(x: f64, p: f64) -> f64 {
    if p == 1.0 {
        x
    } else if p == 2.0 {
        x * x
    } else if p == 0.0 {
        1.0
    } else {
        x.powf(p)
    }
}

/// Initial data. Step and cosine profiles vary along the first coordinate;
/// tables are piecewise constant on a uniform grid over the domain box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialDatum {
    Constant { value: f64 },
    /// `left` for `x < at`, `right` for `x > at`.
    Step { left: f64, right: f64, at: f64 },
    /// `mean + amplitude·cos(modes·π·(x - a)/(b - a))` on the domain `(a, b)`.
    Cosine { mean: f64, amplitude: f64, modes: f64 },
    /// Rows are indexed by `y` (one row in 1D), columns by `x`.
    Table { values: Vec<Vec<f64>> },
}

impl InitialDatum {
    pub fn eval(&self, x: Point, bounds: (Point, Point)) -> f64 {
        let (lo, hi) = bounds;
        match self {
            InitialDatum::Constant { value } => *value,
            InitialDatum::Step { left, right, at } => {
                if x[0] < *at {
                    *left
                } else {
                    *right
                }
            }
            InitialDatum::Cosine { mean, amplitude, modes } => {
                let xi = (x[0] - lo[0]) / (hi[0] - lo[0]);
                mean + amplitude * (modes * std::f64::consts::PI * xi).cos()
            }
            InitialDatum::Table { values } => {
                let rows = values.len();
                let cols = values[0].len();
                let ix = table_index(x[0], lo[0], hi[0], cols);
                let iy = if hi[1] > lo[1] { table_index(x[1], lo[1], hi[1], rows) } else { 0 };
                values[iy][ix]
            }
        }
    }

    /// Exact mean of the datum over `cell`.
    pub fn cell_average(&self, cell: &Cell, bounds: (Point, Point)) -> f64 {
        let (lo, hi) = bounds;
        let (x0, x1) = (cell.lo[0], cell.hi[0]);
        let width = x1 - x0;
        match self {
            InitialDatum::Constant { value } => *value,
            InitialDatum::Step { left, right, at } => {
                let left_len = (at.min(x1) - x0).clamp(0.0, width);
                (left * left_len + right * (width - left_len)) / width
            }
            InitialDatum::Cosine { mean, amplitude, modes } => {
                if *modes == 0.0 {
                    return mean + amplitude;
                }
                let k = modes * std::f64::consts::PI / (hi[0] - lo[0]);
                let s = ((k * (x1 - lo[0])).sin() - (k * (x0 - lo[0])).sin()) / (k * width);
                mean + amplitude * s
            }
            InitialDatum::Table { values } => {
                let rows = values.len();
                let cols = values[0].len();
                let two_d = hi[1] > lo[1] && cell.hi[1] > cell.lo[1];
                let mut acc = 0.0;
                for (iy, row) in values.iter().enumerate() {
                    let wy = if two_d {
                        let (t0, t1) = table_cell(lo[1], hi[1], rows, iy);
                        overlap(cell.lo[1], cell.hi[1], t0, t1) / (cell.hi[1] - cell.lo[1])
                    } else if iy == 0 {
                        1.0
                    } else {
                        0.0
                    };
                    if wy == 0.0 {
                        continue;
                    }
                    for (ix, v) in row.iter().enumerate() {
                        let (t0, t1) = table_cell(lo[0], hi[0], cols, ix);
                        acc += wy * v * overlap(x0, x1, t0, t1) / width;
                    }
                }
                acc
            }
        }
    }

    /// Lower and upper bounds of the datum's values.
    pub fn range(&self) -> (f64, f64) {
        match self {
            InitialDatum::Constant { value } => (*value, *value),
            InitialDatum::Step { left, right, .. } => (left.min(*right), left.max(*right)),
            InitialDatum::Cosine { mean, amplitude, .. } => (mean - amplitude.abs(), mean + amplitude.abs()),
            InitialDatum::Table { values } => values.iter().flatten().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
                (a.min(v), b.max(v))
            }),
        }
    }

    fn check(&self) -> Result<()> {
        let ok = match self {
            InitialDatum::Table { values } => {
                !values.is_empty()
                    && !values[0].is_empty()
                    && values.iter().all(|r| r.len() == values[0].len())
            }
            _ => true,
        };
        let (a, b) = self.range();
        if !ok || !a.is_finite() || !b.is_finite() {
            return Err(invalid("initial datum must be finite (tables rectangular and non-empty)"));
        }
        Ok(())
    }
}

fn table_index(x: f64, lo: f64, hi: f64, n: usize) -> usize {
    let t = ((x - lo) / (hi - lo) * n as f64).floor();
    (t.max(0.0) as usize).min(n - 1)
}

fn table_cell(lo: f64, hi: f64, n: usize, i: usize) -> (f64, f64) {
    let w = (hi - lo) / n as f64;
    (lo + w * i as f64, if i + 1 == n { hi } else { lo + w * (i + 1) as f64 })
}

fn overlap(a0: f64, a1: f64, b0: f64, b1: f64) -> f64 {
    (a1.min(b1) - a0.max(b0)).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    Heat,
    BurgersHyperbolic,
    BurgersDegenerate,
    PorousMedium,
}

impl Preset {
    pub const ALL: [Preset; 4] = [Preset::Heat, Preset::BurgersHyperbolic, Preset::BurgersDegenerate, Preset::PorousMedium];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Heat => "heat",
            Preset::BurgersHyperbolic => "burgers_hyperbolic",
            Preset::BurgersDegenerate => "burgers_degenerate",
            Preset::PorousMedium => "porous_medium",
        }
    }
}

impl fmt::Display for Preset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Preset {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Preset> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| invalid(format!("unknown preset '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Problem {
    pub name: String,
    /// One polynomial per space component; missing components are zero.
    pub flux: Vec<Polynomial>,
    pub diffusion: Diffusion,
    pub u_max: f64,
    pub initial: InitialDatum,
    pub horizon: f64,
    /// Lipschitz bound M of `f` (per unit face measure).
    pub flux_lipschitz: f64,
    /// `sup |f|` on `[0, u_max]`.
    pub flux_sup: f64,
    pub phi_lipschitz: f64,
}

impl Problem {
    /// Builds a problem, estimating `M` and `‖f‖_∞` by sampling when they are
    /// not declared.
    pub fn new(
        name: impl Into<String>,
        flux: Vec<Polynomial>,
        diffusion: Diffusion,
        u_max: f64,
        initial: InitialDatum,
        horizon: f64,
    ) -> Result<Problem> {
        if !(u_max > 0.0) || !u_max.is_finite() {
            return Err(invalid(format!("u_max must be positive, got {u_max}")));
        }
        if !(0.0..=u_max).contains(&diffusion.u_c) {
            return Err(invalid(format!("u_c = {} outside [0, u_max]", diffusion.u_c)));
        }
        if !(diffusion.p >= 1.0) || !diffusion.c.is_finite() || !diffusion.p.is_finite() {
            return Err(invalid("diffusion needs finite c and p >= 1"));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(invalid(format!("horizon T must be positive, got {horizon}")));
        }
        if flux.len() > 2 || flux.iter().flat_map(|p| &p.0).any(|c| !c.is_finite()) {
            return Err(invalid("flux needs at most two components with finite coefficients"));
        }
        initial.check()?;

        let mut problem = Problem {
            name: name.into(),
            flux,
            diffusion,
            u_max,
            initial,
            horizon,
            flux_lipschitz: 0.0,
            flux_sup: 0.0,
            phi_lipschitz: diffusion.lipschitz(u_max),
        };
        let (mut lip, mut sup) = (0.0f64, 0.0f64);
        for i in 0..CONSTANT_SAMPLES {
            let u = u_max * i as f64 / (CONSTANT_SAMPLES - 1) as f64;
            let d = problem.flux_derivative(u);
            let f = problem.flux_vector(u);
            lip = lip.max((d[0] * d[0] + d[1] * d[1]).sqrt());
            sup = sup.max((f[0] * f[0] + f[1] * f[1]).sqrt());
        }
        problem.flux_lipschitz = SAMPLED_INFLATION * lip;
        problem.flux_sup = SAMPLED_INFLATION * sup;
        Ok(problem)
    }

    /// Overrides the declared flux constants.
    pub fn with_flux_constants(mut self, lipschitz: f64, sup: f64) -> Self {
        self.flux_lipschitz = lipschitz;
        self.flux_sup = sup;
        self
    }

    pub fn with_initial(mut self, initial: InitialDatum) -> Self {
        self.initial = initial;
        self
    }

    pub fn with_horizon(mut self, horizon: f64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn preset(preset: Preset) -> Problem {
        let burgers = || vec![Polynomial(vec![0.0, 1.0, -1.0])];
        let (flux, diffusion, initial, horizon, m, sup) = match preset {
            Preset::Heat => (
                vec![],
                Diffusion { c: 1.0, p: 1.0, u_c: 0.0 },
                InitialDatum::Cosine { mean: 0.5, amplitude: 0.4, modes: 1.0 },
                0.1,
                0.0,
                0.0,
            ),
            Preset::BurgersHyperbolic => (
                burgers(),
                Diffusion { c: 0.0, p: 1.0, u_c: 1.0 },
                InitialDatum::Step { left: 0.1, right: 0.8, at: 0.5 },
                0.5,
                1.0,
                0.25,
            ),
            Preset::BurgersDegenerate => (
                burgers(),
                Diffusion { c: 1.0, p: 2.0, u_c: 0.5 },
                InitialDatum::Step { left: 0.2, right: 0.9, at: 0.5 },
                0.5,
                1.0,
                0.25,
            ),
            Preset::PorousMedium => (
                vec![],
                Diffusion { c: 1.0, p: 2.0, u_c: 0.0 },
                InitialDatum::Step { left: 0.8, right: 0.0, at: 0.5 },
                0.5,
                0.0,
                0.0,
            ),
        };
        Problem::new(preset.name(), flux, diffusion, 1.0, initial, horizon)
            .expect("preset data is valid")
            .with_flux_constants(m, sup)
    }

    pub fn from_name(name: &str) -> Result<Problem> {
        Ok(Problem::preset(name.parse()?))
    }

    pub fn u_c(&self) -> f64 {
        self.diffusion.u_c
    }

    pub fn phi(&self, u: f64) -> f64 {
        self.diffusion.eval(u)
    }

    pub fn flux_vector(&self, u: f64) -> Point {
        let mut f = [0.0; 2];
        for (i, p) in self.flux.iter().enumerate() {
            f[i] = p.eval(u);
        }
        f
    }

    pub fn flux_derivative(&self, u: f64) -> Point {
        let mut f = [0.0; 2];
        for (i, p) in self.flux.iter().enumerate() {
            f[i] = p.derivative_at(u);
        }
        f
    }

    /// `f(u)·n`.
    pub fn flux_normal(&self, u: f64, n: Point) -> f64 {
        self.flux.iter().zip(n).map(|(p, ni)| if ni == 0.0 { 0.0 } else { ni * p.eval(u) }).sum()
    }

    pub fn check_dimension(&self, dim: usize) -> Result<()> {
        if self.flux.len() > dim {
            return Err(invalid(format!(
                "flux has {} components but the mesh is {dim}-dimensional",
                self.flux.len()
            )));
        }
        Ok(())
    }

    /// Sampled check of the structural hypotheses on `(f, φ, u₀)`.
    pub fn validate(&self, samples: usize) -> ValidationReport {
        let samples = samples.max(2);
        let grid: Vec<f64> = (0..samples).map(|i| self.u_max * i as f64 / (samples - 1) as f64).collect();

        let endpoint = |u: f64| -> f64 {
            self.flux.iter().map(|p| p.eval(u).abs()).fold(0.0, f64::max)
        };
        let h1_residual = endpoint(0.0).max(endpoint(self.u_max));
        let scale = self
            .flux
            .iter()
            .map(|p| p.0.iter().enumerate().map(|(j, c)| c.abs() * self.u_max.powi(j as i32)).sum::<f64>())
            .fold(1.0, f64::max);

        let u_c = self.u_c();
        let mut monotone_violation: f64 = 0.0;
        let mut flat_violation: f64 = 0.0;
        let mut strict_ok = true;
        let mut lip: f64 = 0.0;
        for w in grid.windows(2) {
            let (a, b) = (w[0], w[1]);
            let (pa, pb) = (self.phi(a), self.phi(b));
            monotone_violation = monotone_violation.max(pa - pb);
            if a >= u_c && !(pb > pa) {
                strict_ok = false;
            }
            let (fa, fb) = (self.flux_vector(a), self.flux_vector(b));
            let df = ((fb[0] - fa[0]).powi(2) + (fb[1] - fa[1]).powi(2)).sqrt();
            lip = lip.max(df / (b - a));
        }
        for &u in grid.iter().filter(|&&u| u <= u_c) {
            flat_violation = flat_violation.max((self.phi(u) - self.phi(0.0)).abs());
        }
        let (lo, hi) = self.initial.range();

        let h1 = h1_residual <= 1e-14 * scale;
        let phi_monotone = monotone_violation <= 0.0 && strict_ok;
        let phi_flat = flat_violation == 0.0 && self.phi(0.0) == 0.0;
        let flux_lipschitz = lip <= self.flux_lipschitz * (1.0 + 1e-9);
        let initial_in_range = lo >= 0.0 && hi <= self.u_max;
        ValidationReport {
            h1,
            h1_residual,
            phi_monotone,
            phi_monotone_violation: monotone_violation,
            phi_flat_below_threshold: phi_flat,
            flux_lipschitz,
            flux_lipschitz_estimate: lip,
            declared_flux_lipschitz: self.flux_lipschitz,
            initial_in_range,
            pass: h1 && phi_monotone && phi_flat && flux_lipschitz && initial_in_range,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    /// `f(0) = f(u_max) = 0`.
    pub h1: bool,
    pub h1_residual: f64,
    /// Nondecreasing everywhere and strictly increasing above `u_c`.
    pub phi_monotone: bool,
    pub phi_monotone_violation: f64,
    pub phi_flat_below_threshold: bool,
    pub flux_lipschitz: bool,
    pub flux_lipschitz_estimate: f64,
    pub declared_flux_lipschitz: f64,
    pub initial_in_range: bool,
    pub pass: bool,
}

/// Serializable problem description: a preset (optionally with overrides)
/// or an inline definition.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flux_poly: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<Diffusion>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u_max: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub u0: Option<InitialDatum>,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flux_lipschitz: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flux_sup: Option<f64>,
}

impl ProblemSpec {
    pub fn preset(p: Preset) -> ProblemSpec {
        ProblemSpec { preset: Some(p), ..Default::default() }
    }

    pub fn build(&self) -> Result<Problem> {
        let mut problem = match self.preset {
            Some(p) => {
                if self.flux_poly.is_some() || self.phi.is_some() || self.u_max.is_some() {
                    return Err(invalid("a preset cannot be combined with flux_poly, phi or u_max"));
                }
                Problem::preset(p)
            }
            None => {
                let (Some(flux), Some(phi), Some(u_max)) = (&self.flux_poly, self.phi, self.u_max) else {
                    return Err(invalid("inline problems need flux_poly, phi and u_max"));
                };
                let u0 = self.u0.clone().ok_or_else(|| invalid("inline problems need u0"))?;
                let t = self.horizon.ok_or_else(|| invalid("inline problems need T"))?;
                let flux = flux.iter().cloned().map(Polynomial).collect();
                Problem::new("custom", flux, phi, u_max, u0, t)?
            }
        };
        if let Some(u0) = &self.u0 {
            u0.check()?;
            problem.initial = u0.clone();
        }
        if let Some(t) = self.horizon {
            if !(t > 0.0) {
                return Err(invalid(format!("horizon T must be positive, got {t}")));
            }
            problem.horizon = t;
        }
        if let Some(m) = self.flux_lipschitz {
            problem.flux_lipschitz = m;
        }
        if let Some(s) = self.flux_sup {
            problem.flux_sup = s;
        }
        Ok(problem)
    }
}
