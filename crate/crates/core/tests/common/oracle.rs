//! Straight-line re-summations of every diagnostic on a three-cell uniform
//! mesh of (0, 1), Burgers flux `u(1-u)` with Godunov fluxes and
//! `φ(u) = ((u - 1/2)⁺)²`. Written from the formulas without using the
//! library beyond building the inputs.

#![allow(dead_code, clippy::needless_range_loop)]

use std::sync::Arc;

use degen_fv::diagnostics::{self, EntropyInequality, SpaceWeight, TestFunction, TimeWeight};
use degen_fv::{FluxScheme, Mesh, Preset, Problem, Trajectory};

pub const H: f64 = 1.0 / 3.0;
pub const DT: f64 = 0.1;
pub const LEVELS: [[f64; 3]; 3] = [[0.2, 0.9, 0.5], [0.3, 0.7, 0.6], [0.45, 0.55, 0.65]];

fn f(u: f64) -> f64 {
    u * (1.0 - u)
}

fn phi(u: f64) -> f64 {
    let x = u - 0.5;
    if x > 0.0 {
        x * x
    } else {
        0.0
    }
}

/// Godunov flux for normal +1 with concave `f` maximized at 1/2.
fn godunov(a: f64, b: f64) -> f64 {
    if a <= b {
        f(a).min(f(b))
    } else if b <= 0.5 && 0.5 <= a {
        0.25
    } else {
        f(a).max(f(b))
    }
}

/// Flux out of a cell through a point face with outward normal `n = ±1`.
fn flux(a: f64, b: f64, n: f64) -> f64 {
    if n > 0.0 {
        godunov(a, b)
    } else {
        -godunov(b, a)
    }
}

fn center(k: usize) -> f64 {
    (k as f64 + 0.5) * H
}

fn cell_of(x: f64) -> usize {
    ((x / H).floor() as usize).min(2)
}

pub fn setup() -> (Trajectory, FluxScheme) {
    let mesh = Arc::new(Mesh::interval(0.0, 1.0, 3, 1.0).unwrap());
    let traj = Trajectory::from_levels(mesh, DT, LEVELS.iter().map(|l| l.to_vec()).collect()).unwrap();
    (traj, FluxScheme::godunov(&Problem::preset(Preset::BurgersDegenerate)))
}

pub fn mass_drift() -> f64 {
    let m: Vec<f64> = LEVELS.iter().map(|l| H * (l[0] + l[1] + l[2])).collect();
    m.iter().map(|x| (x - m[0]).abs()).fold(0.0, f64::max)
}

pub fn linf() -> (f64, f64) {
    let all = LEVELS.iter().flatten();
    (all.clone().cloned().fold(f64::INFINITY, f64::min), all.cloned().fold(f64::NEG_INFINITY, f64::max))
}

pub fn l2h1() -> f64 {
    let tau = 1.0 / H;
    let mut s = 0.0;
    for u in &LEVELS[1..] {
        for k in 0..3usize {
            for l in [k.wrapping_sub(1), k + 1] {
                if l < 3 {
                    s += tau * (phi(u[k]) - phi(u[l])).powi(2);
                }
            }
        }
    }
    0.5 * DT * s
}

pub fn weak_bv() -> f64 {
    let mut s = 0.0;
    for u in &LEVELS[1..] {
        for (left, right) in [(0, 1), (1, 2)] {
            let (k, l, n) = if u[left] >= u[right] { (left, right, 1.0) } else { (right, left, -1.0) };
            let (hi, lo) = (u[k], u[l]);
            if hi == lo {
                continue;
            }
            let grid: Vec<f64> = (0..64).map(|i| lo + (hi - lo) * i as f64 / 63.0).collect();
            let (mut t1, mut t2) = (0.0f64, 0.0f64);
            for i in 0..64 {
                for j in i..64 {
                    let (c, d) = (grid[i], grid[j]);
                    t1 = t1.max(flux(d, c, n) - flux(d, d, n));
                    t2 = t2.max(flux(d, c, n) - flux(c, c, n));
                }
            }
            s += DT * (t1 + t2);
        }
    }
    s
}

type Eta = Box<dyn Fn(f64, f64) -> f64>;
type Slope = Box<dyn Fn(f64) -> f64>;

fn entropy_parts(kind: EntropyInequality, k: f64) -> (Eta, Slope) {
    match kind {
        EntropyInequality::Sub => (Box::new(|u: f64, k: f64| (u - k).max(0.0)), Box::new(move |u: f64| if u > k { 1.0 } else { 0.0 })),
        EntropyInequality::Super => (Box::new(|u: f64, k: f64| (k - u).max(0.0)), Box::new(move |u: f64| if u < k { -1.0 } else { 0.0 })),
        EntropyInequality::Full => (
            Box::new(|u: f64, k: f64| (u - k).abs()),
            Box::new(move |u: f64| if u > k { 1.0 } else if u < k { -1.0 } else { 0.0 }),
        ),
    }
}

fn entropy_flux(kind: EntropyInequality, a: f64, b: f64, k: f64, n: f64) -> f64 {
    match kind {
        EntropyInequality::Sub => flux(a.max(k), b.max(k), n) - flux(k, k, n),
        EntropyInequality::Super => flux(k, k, n) - flux(a.min(k), b.min(k), n),
        EntropyInequality::Full => flux(a.max(k), b.max(k), n) - flux(a.min(k), b.min(k), n),
    }
}

pub fn entropy_residual(k: f64, kind: EntropyInequality) -> f64 {
    let (eta, slope) = entropy_parts(kind, k);
    let mut worst = 0.0f64;
    for n in 0..2 {
        let (old, new) = (LEVELS[n], LEVELS[n + 1]);
        for c in 0..3usize {
            let mut lhs = H * (eta(new[c], k) - eta(old[c], k)) / DT;
            for (l, nrm) in [(c.wrapping_sub(1), -1.0), (c + 1, 1.0)] {
                if l < 3 {
                    lhs += entropy_flux(kind, new[c], new[l], k, nrm);
                    lhs -= (1.0 / H) * (eta(phi(new[l]), phi(k)) - eta(phi(new[c]), phi(k)));
                }
            }
            let mut rhs = 0.0;
            if c == 0 {
                rhs -= slope(new[c]) * f(k);
            }
            if c == 2 {
                rhs += slope(new[c]) * f(k);
            }
            worst = worst.max(lhs - rhs);
        }
    }
    worst
}

/// Integrates `g` over `[lo, hi]` for a function piecewise constant between
/// the given breakpoints.
fn piecewise(mut breaks: Vec<f64>, lo: f64, hi: f64, g: impl Fn(f64) -> f64) -> f64 {
    breaks.retain(|&b| b > lo && b < hi);
    breaks.push(lo);
    breaks.push(hi);
    breaks.sort_by(f64::total_cmp);
    breaks.windows(2).map(|w| (w[1] - w[0]) * g(0.5 * (w[0] + w[1]))).sum()
}

pub fn space_translate(eta: f64) -> f64 {
    let edges = vec![0.0, H, 2.0 * H, 1.0];
    let mut breaks = edges.clone();
    breaks.extend(edges.iter().map(|e| e - eta));
    let mut s = 0.0;
    for u in &LEVELS[1..] {
        s += DT * piecewise(breaks.clone(), 0.0, 1.0 - eta, |x| (phi(u[cell_of(x + eta)]) - phi(u[cell_of(x)])).powi(2));
    }
    s
}

pub fn time_translate(tau: f64) -> f64 {
    let t_end = 2.0 * DT;
    let level = |t: f64| ((t / DT).ceil() as usize).clamp(1, 2);
    let mut breaks = vec![DT, 2.0 * DT];
    breaks.extend([DT - tau, 2.0 * DT - tau]);
    piecewise(breaks, 0.0, t_end - tau, |t| {
        let (a, b) = (LEVELS[level(t + tau)], LEVELS[level(t)]);
        (0..3).map(|c| H * (phi(a[c]) - phi(b[c])).powi(2)).sum()
    })
}

/// θ ≡ 1, ζ(x) = exp(-(x - 1/2)²/w²).
pub fn continuous(k: f64, w: f64) -> f64 {
    let zeta = |x: f64| (-(x - 0.5).powi(2) / (w * w)).exp();
    let dzeta = |x: f64| -2.0 * (x - 0.5) / (w * w) * zeta(x);
    let mut s = 0.0;
    // ξ_t term vanishes for constant θ
    for u in &LEVELS[1..] {
        for c in 0..3 {
            let v = u[c];
            let sg = if v > k { 1.0 } else if v < k { -1.0 } else { 0.0 };
            s += DT * H * sg * (f(v) - f(k)) * dzeta(center(c));
        }
        for c in 0..2 {
            // diamond of the face between c and c+1: measure d·m(σ)/1, centroid at
            // the face center (equal cone distances)
            let grad = ((phi(u[c + 1]) - phi(k)).abs() - (phi(u[c]) - phi(k)).abs()) / H;
            s -= DT * H * grad * dzeta((c + 1) as f64 * H);
        }
    }
    for c in 0..3 {
        s += H * (LEVELS[0][c] - k).abs() * zeta(center(c));
    }
    s += 2.0 * DT * f(k).abs() * (zeta(0.0) + zeta(1.0));
    s
}

/// Library values next to oracle values, labelled.
pub fn comparisons() -> Vec<(String, f64, f64)> {
    let (traj, scheme) = setup();
    let p = scheme.problem();
    let mut out = Vec::new();
    let (lo, hi) = diagnostics::linf_bounds(&traj);
    let (olo, ohi) = linf();
    out.push(("linf_min".into(), lo, olo));
    out.push(("linf_max".into(), hi, ohi));
    out.push(("mass_drift".into(), diagnostics::mass_drift(&traj), mass_drift()));
    out.push(("l2h1".into(), diagnostics::l2h1_functional(&traj, p), l2h1()));
    out.push(("weak_bv".into(), diagnostics::weak_bv_functional(&traj, &scheme).unwrap(), weak_bv()));
    for k in [0.0, 0.25, 0.5, 0.62, 0.8, 1.0] {
        for kind in [EntropyInequality::Sub, EntropyInequality::Super, EntropyInequality::Full] {
            out.push((
                format!("entropy {kind:?} k={k}"),
                diagnostics::entropy_residual(&traj, &scheme, k, kind).unwrap(),
                entropy_residual(k, kind),
            ));
        }
    }
    for eta in [0.05, 0.2, H, 0.5] {
        out.push((
            format!("space_translate η={eta:.4}"),
            diagnostics::space_translate_functional(&traj, p, [eta, 0.0]).unwrap(),
            space_translate(eta),
        ));
    }
    for tau in [0.03, 0.1, 0.15] {
        out.push((
            format!("time_translate τ={tau}"),
            diagnostics::time_translate_functional(&traj, p, tau).unwrap(),
            time_translate(tau),
        ));
    }
    for k in [0.1, 0.3, 0.7] {
        let t = TestFunction { theta: TimeWeight::Constant, zeta: SpaceWeight::Gaussian { center: [0.5, 0.0], width: 0.25 } };
        out.push((
            format!("continuous k={k}"),
            diagnostics::continuous_entropy_functional(&traj, p, k, &t).unwrap(),
            continuous(k, 0.25),
        ));
    }
    out
}

/// Residual of the two-cell heat system solved by hand: (2/3, 1/3).
pub fn heat_two_cell_solution() -> [f64; 2] {
    // 4u₁ - 2u₂ = 2, -2u₁ + 4u₂ = 0
    let det = 4.0 * 4.0 - 2.0 * 2.0;
    [(2.0 * 4.0) / det, (2.0 * 2.0) / det]
}
