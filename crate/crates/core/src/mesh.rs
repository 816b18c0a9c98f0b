//! Admissible tensor-product meshes in one and two space dimensions.
//!
//! Every cell is an axis-aligned box whose center is its centroid, so the
//! segment joining two neighbouring centers is orthogonal to their common
//! face. Faces are stored once; interior faces carry a normal oriented from
//! their `left` cell to their `right` cell, boundary faces an outward normal.
//! In one dimension a face is a point and is given measure 1.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// A point or vector of the plane; in 1D only the first component is used.
pub type Point = [f64; 2];

pub(crate) fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1]
}

pub(crate) fn norm(a: Point) -> f64 {
    dot(a, a).sqrt()
}

pub(crate) fn sub(a: Point, b: Point) -> Point {
    [a[0] - b[0], a[1] - b[1]]
}

/// Cosine tolerance used for the orthogonality condition.
pub const ORTHOGONALITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FaceKind {
    Interior { left: usize, right: usize },
    Boundary { cell: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub id: usize,
    pub center: Point,
    pub measure: f64,
    /// Lower and upper corners of the box.
    pub lo: Point,
    pub hi: Point,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Face {
    pub id: usize,
    pub kind: FaceKind,
    pub measure: f64,
    /// Unit normal, left to right for interior faces, outward on the boundary.
    pub normal: Point,
    /// Center of gravity of the face.
    pub center: Point,
    /// Distance between the two cell centers (zero on the boundary).
    pub center_distance: f64,
    /// Distance from the left (or only) cell center to the face.
    pub left_distance: f64,
    /// Distance from the right cell center to the face (zero on the boundary).
    pub right_distance: f64,
}

impl Face {
    pub fn is_interior(&self) -> bool {
        matches!(self.kind, FaceKind::Interior { .. })
    }

    /// `(left, right)` for an interior face.
    pub fn neighbours(&self) -> Option<(usize, usize)> {
        match self.kind {
            FaceKind::Interior { left, right } => Some((left, right)),
            FaceKind::Boundary { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub alpha_best: f64,
    pub orthogonality_max_angle_error: f64,
    /// Worst `|d_{K,L} - d_{K,σ} - d_{L,σ}|` over interior faces.
    pub distance_split_error: f64,
    /// Worst `|Σ_σ m(σ) n_{K,σ}|` over cells.
    pub closure_error: f64,
    /// `m(Ω) / α · h^{-ℓ}`, an upper bound on the number of cells.
    pub cell_count_bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeshSummary {
    pub dimension: usize,
    pub cell_count: usize,
    pub h: f64,
    pub alpha_best: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mesh {
    dim: usize,
    cells: Vec<Cell>,
    faces: Vec<Face>,
    interior_of: Vec<Vec<usize>>,
    exterior_of: Vec<Vec<usize>>,
    /// Cell edges along each axis; the second axis is `[0, 0]` in 1D.
    edges: [Vec<f64>; 2],
    h: f64,
}

impl Mesh {
    /// Partition of `(a, b)` into `n` cells whose widths grow geometrically
    /// with ratio `grading` (1 gives a uniform mesh).
    pub fn interval(a: f64, b: f64, n: usize, grading: f64) -> Result<Mesh> {
        if n == 0 {
            return Err(invalid("interval mesh needs at least one cell"));
        }
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(invalid(format!("interval bounds must satisfy a < b, got ({a}, {b})")));
        }
        if !(grading >= 1.0) || !grading.is_finite() {
            return Err(invalid(format!("grading must be >= 1, got {grading}")));
        }
        let weights: Vec<f64> = (0..n).map(|i| grading.powi(i as i32)).collect();
        let total: f64 = weights.iter().sum();
        let mut xs = Vec::with_capacity(n + 1);
        xs.push(a);
        let mut acc = 0.0;
        for w in &weights[..n - 1] {
            acc += w;
            xs.push(a + (b - a) * acc / total);
        }
        xs.push(b);
        Ok(Self::tensor(1, xs, vec![0.0, 0.0]))
    }

    /// `nx × ny` uniform rectangles covering `(0, lx) × (0, ly)`.
    pub fn rectangle(lx: f64, ly: f64, nx: usize, ny: usize) -> Result<Mesh> {
        if nx == 0 || ny == 0 {
            return Err(invalid("rectangle mesh needs nx, ny >= 1"));
        }
        if !(lx > 0.0 && ly > 0.0) || !lx.is_finite() || !ly.is_finite() {
            return Err(invalid(format!("rectangle sides must be positive, got ({lx}, {ly})")));
        }
        let xs = (0..=nx).map(|i| lx * i as f64 / nx as f64).collect();
        let ys = (0..=ny).map(|j| ly * j as f64 / ny as f64).collect();
        Ok(Self::tensor(2, xs, ys))
    }

    fn tensor(dim: usize, xs: Vec<f64>, ys: Vec<f64>) -> Mesh {
        let nx = xs.len() - 1;
        let ny = if dim == 1 { 1 } else { ys.len() - 1 };
        let index = |i: usize, j: usize| i + nx * j;

        let mut cells = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let (lo, hi) = if dim == 1 {
                    ([xs[i], 0.0], [xs[i + 1], 0.0])
                } else {
                    ([xs[i], ys[j]], [xs[i + 1], ys[j + 1]])
                };
                let measure = if dim == 1 { hi[0] - lo[0] } else { (hi[0] - lo[0]) * (hi[1] - lo[1]) };
                cells.push(Cell {
                    id: index(i, j),
                    center: [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])],
                    measure,
                    lo,
                    hi,
                });
            }
        }

        let mut faces: Vec<Face> = Vec::new();
        let push_interior = |faces: &mut Vec<Face>, l: usize, r: usize, axis: usize, measure: f64, center: Point| {
            let cl = cells[l].center[axis];
            let cr = cells[r].center[axis];
            let mut normal = [0.0; 2];
            normal[axis] = 1.0;
            faces.push(Face {
                id: faces.len(),
                kind: FaceKind::Interior { left: l, right: r },
                measure,
                normal,
                center,
                center_distance: cr - cl,
                left_distance: center[axis] - cl,
                right_distance: cr - center[axis],
            });
        };
        for j in 0..ny {
            for i in 0..nx.saturating_sub(1) {
                let (l, r) = (index(i, j), index(i + 1, j));
                let (m, c) = if dim == 1 {
                    (1.0, [xs[i + 1], 0.0])
                } else {
                    (ys[j + 1] - ys[j], [xs[i + 1], 0.5 * (ys[j] + ys[j + 1])])
                };
                push_interior(&mut faces, l, r, 0, m, c);
            }
        }
        if dim == 2 {
            for j in 0..ny - 1 {
                for i in 0..nx {
                    let (l, r) = (index(i, j), index(i, j + 1));
                    let c = [0.5 * (xs[i] + xs[i + 1]), ys[j + 1]];
                    push_interior(&mut faces, l, r, 1, xs[i + 1] - xs[i], c);
                }
            }
        }

        let push_boundary = |faces: &mut Vec<Face>, cell: usize, normal: Point, measure: f64, center: Point| {
            let d = dot(sub(center, cells[cell].center), normal).abs();
            faces.push(Face {
                id: faces.len(),
                kind: FaceKind::Boundary { cell },
                measure,
                normal,
                center,
                center_distance: 0.0,
                left_distance: d,
                right_distance: 0.0,
            });
        };
        for j in 0..ny {
            let (m, yc) = if dim == 1 { (1.0, 0.0) } else { (ys[j + 1] - ys[j], 0.5 * (ys[j] + ys[j + 1])) };
            push_boundary(&mut faces, index(0, j), [-1.0, 0.0], m, [xs[0], yc]);
            push_boundary(&mut faces, index(nx - 1, j), [1.0, 0.0], m, [xs[nx], yc]);
        }
        if dim == 2 {
            for i in 0..nx {
                let (m, xc) = (xs[i + 1] - xs[i], 0.5 * (xs[i] + xs[i + 1]));
                push_boundary(&mut faces, index(i, 0), [0.0, -1.0], m, [xc, ys[0]]);
                push_boundary(&mut faces, index(i, ny - 1), [0.0, 1.0], m, [xc, ys[ny]]);
            }
        }

        let mut interior_of = vec![Vec::new(); cells.len()];
        let mut exterior_of = vec![Vec::new(); cells.len()];
        for f in &faces {
            match f.kind {
                FaceKind::Interior { left, right } => {
                    interior_of[left].push(f.id);
                    interior_of[right].push(f.id);
                }
                FaceKind::Boundary { cell } => exterior_of[cell].push(f.id),
            }
        }

        let mut mesh = Mesh { dim, cells, faces, interior_of, exterior_of, edges: [xs, ys], h: 0.0 };
        mesh.h = (0..mesh.cells.len()).map(|k| mesh.cell_diameter(k)).fold(0.0, f64::max);
        mesh
    }

    pub fn dimension(&self) -> usize {
        self.dim
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn faces(&self) -> &[Face] {
        &self.faces
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn cell(&self, k: usize) -> &Cell {
        &self.cells[k]
    }

    pub fn face(&self, f: usize) -> &Face {
        &self.faces[f]
    }

    pub fn interior_faces(&self) -> impl Iterator<Item = &Face> + '_ {
        self.faces.iter().filter(|f| f.is_interior())
    }

    pub fn boundary_faces(&self) -> impl Iterator<Item = &Face> + '_ {
        self.faces.iter().filter(|f| !f.is_interior())
    }

    /// Interior faces of cell `k` (the set ε_K).
    pub fn cell_interior_faces(&self, k: usize) -> &[usize] {
        &self.interior_of[k]
    }

    /// Boundary faces of cell `k` (the set ε_K^ext).
    pub fn cell_boundary_faces(&self, k: usize) -> &[usize] {
        &self.exterior_of[k]
    }

    /// Mesh size: the largest cell diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn cell_diameter(&self, k: usize) -> f64 {
        let c = &self.cells[k];
        norm(sub(c.hi, c.lo))
    }

    pub fn domain_measure(&self) -> f64 {
        self.cells.iter().map(|c| c.measure).sum()
    }

    /// Lower and upper corners of the domain bounding box.
    pub fn bounds(&self) -> (Point, Point) {
        let [xs, ys] = &self.edges;
        ([xs[0], ys[0]], [*xs.last().unwrap(), *ys.last().unwrap()])
    }

    pub fn domain_diameter(&self) -> f64 {
        let (lo, hi) = self.bounds();
        norm(sub(hi, lo))
    }

    /// Cell edges along `axis`.
    pub fn edges(&self, axis: usize) -> &[f64] {
        &self.edges[axis]
    }

    /// Normal of face `f` pointing out of cell `k`.
    pub fn outward_normal(&self, f: usize, k: usize) -> Point {
        let face = &self.faces[f];
        match face.kind {
            FaceKind::Interior { right, .. } if right == k => [-face.normal[0], -face.normal[1]],
            _ => face.normal,
        }
    }

    /// Distance from the center of cell `k` to face `f`.
    pub fn cell_face_distance(&self, f: usize, k: usize) -> f64 {
        let face = &self.faces[f];
        match face.kind {
            FaceKind::Interior { right, .. } if right == k => face.right_distance,
            _ => face.left_distance,
        }
    }

    /// Neighbour of `k` across interior face `f`.
    pub fn neighbour(&self, f: usize, k: usize) -> Option<usize> {
        self.faces[f].neighbours().map(|(l, r)| if l == k { r } else { l })
    }

    fn interior(&self, f: usize) -> Result<(&Face, usize, usize)> {
        let face = self.faces.get(f).ok_or_else(|| invalid(format!("face {f} out of range")))?;
        match face.kind {
            FaceKind::Interior { left, right } => Ok((face, left, right)),
            FaceKind::Boundary { .. } => Err(invalid(format!("face {f} is a boundary face"))),
        }
    }

    /// τ_{K|L} = m(σ) / d_{K,L}.
    pub fn transmissibility(&self, f: usize) -> Result<f64> {
        let (face, ..) = self.interior(f)?;
        Ok(face.measure / face.center_distance)
    }

    /// Measure of the diamond spanned by the face and its two cell centers.
    pub fn diamond_measure(&self, f: usize) -> Result<f64> {
        let (face, ..) = self.interior(f)?;
        Ok(face.center_distance * face.measure / self.dim as f64)
    }

    /// Center of gravity of the diamond of interior face `f`.
    pub fn diamond_centroid(&self, f: usize) -> Result<Point> {
        let (face, l, r) = self.interior(f)?;
        // Each half is a cone of apex x_K over σ; its centroid sits at
        // ℓ/(ℓ+1) of the way from apex to face center.
        let w = self.dim as f64 / (self.dim as f64 + 1.0);
        let cone = |k: usize| {
            let x = self.cells[k].center;
            [x[0] + w * (face.center[0] - x[0]), x[1] + w * (face.center[1] - x[1])]
        };
        let (cl, cr) = (cone(l), cone(r));
        let (dl, dr) = (face.left_distance, face.right_distance);
        let s = dl + dr;
        Ok([(dl * cl[0] + dr * cr[0]) / s, (dl * cl[1] + dr * cr[1]) / s])
    }

    /// Diamond-constant discrete gradient `ℓ (w_L - w_K) / d_{K,L} · n_{K,L}`.
    pub fn discrete_gradient(&self, values: &[f64], f: usize) -> Result<Point> {
        let (face, l, r) = self.interior(f)?;
        if values.len() != self.cells.len() {
            return Err(invalid("field length does not match cell count"));
        }
        let s = self.dim as f64 * (values[r] - values[l]) / face.center_distance;
        Ok([s * face.normal[0], s * face.normal[1]])
    }

    /// Discrete H¹ seminorm squared, summed over ordered neighbour pairs so
    /// that every interior face contributes twice.
    pub fn h1_seminorm_sq(&self, values: &[f64]) -> f64 {
        let mut total = 0.0;
        for k in 0..self.cells.len() {
            for &f in &self.interior_of[k] {
                let face = &self.faces[f];
                let l = self.neighbour(f, k).unwrap();
                let d = values[l] - values[k];
                total += face.measure / face.center_distance * d * d;
            }
        }
        self.dim as f64 * total
    }

    /// `|m(K) V - Σ_σ m(σ) (V·n_{K,σ}) (x_σ - x_K)|` over all faces of `k`.
    pub fn geometric_identity_residual(&self, k: usize, v: Point) -> f64 {
        let cell = &self.cells[k];
        let mut acc = [cell.measure * v[0], cell.measure * v[1]];
        for &f in self.interior_of[k].iter().chain(&self.exterior_of[k]) {
            let face = &self.faces[f];
            let n = self.outward_normal(f, k);
            let s = face.measure * dot(v, n);
            let arm = sub(face.center, cell.center);
            acc[0] -= s * arm[0];
            acc[1] -= s * arm[1];
        }
        norm(acc)
    }

    pub fn check_admissibility(&self) -> AdmissibilityReport {
        let l = self.dim as i32;
        let mut alpha = f64::INFINITY;
        let mut closure: f64 = 0.0;
        for k in 0..self.cells.len() {
            let boundary_measure: f64 = self.interior_of[k]
                .iter()
                .chain(&self.exterior_of[k])
                .map(|&f| self.faces[f].measure)
                .sum();
            alpha = alpha
                .min(self.cells[k].measure / self.h.powi(l))
                .min(self.h.powi(l - 1) / boundary_measure);
            let mut s = [0.0; 2];
            for &f in self.interior_of[k].iter().chain(&self.exterior_of[k]) {
                let n = self.outward_normal(f, k);
                s[0] += self.faces[f].measure * n[0];
                s[1] += self.faces[f].measure * n[1];
            }
            closure = closure.max(norm(s));
        }

        let mut angle: f64 = 0.0;
        let mut split: f64 = 0.0;
        for face in self.interior_faces() {
            let (lc, rc) = face.neighbours().unwrap();
            let d = sub(self.cells[rc].center, self.cells[lc].center);
            let len = norm(d);
            let along = dot(d, face.normal);
            // Component of x_L - x_K tangent to the face, i.e. the cosine of the
            // angle between the center segment and the face.
            let tangent = norm([d[0] - along * face.normal[0], d[1] - along * face.normal[1]]);
            let err = if along > 0.0 { tangent / len } else { 1.0 };
            angle = angle.max(err);
            split = split
                .max((face.center_distance - face.left_distance - face.right_distance).abs())
                .max((face.center_distance - len).abs());
        }

        let bound = self.domain_measure() / alpha * self.h.powi(-l);
        AdmissibilityReport {
            alpha_best: alpha,
            orthogonality_max_angle_error: angle,
            distance_split_error: split,
            closure_error: closure,
            cell_count_bound: bound,
            pass: alpha > 0.0 && angle <= ORTHOGONALITY_TOL,
        }
    }

    /// Cell containing `p` (closed boxes; a point on an interior edge goes to the
    /// cell above it).
    pub fn locate(&self, p: Point) -> Option<usize> {
        let nx = self.edges[0].len() - 1;
        let i = locate_axis(&self.edges[0], p[0])?;
        if self.dim == 1 {
            return Some(i);
        }
        let j = locate_axis(&self.edges[1], p[1])?;
        Some(i + nx * j)
    }

    /// Interior face whose diamond contains `p`, or `None` when `p` lies in
    /// the cone of a boundary face (outside every diamond) or outside Ω.
    pub fn locate_diamond(&self, p: Point) -> Option<usize> {
        let k = self.locate(p)?;
        let cell = &self.cells[k];
        let rel = [
            (p[0] - cell.center[0]) / (cell.hi[0] - cell.lo[0]),
            if self.dim == 1 { 0.0 } else { (p[1] - cell.center[1]) / (cell.hi[1] - cell.lo[1]) },
        ];
        // The box splits into cones over its faces; in normalized coordinates
        // the cone is selected by the dominant axis and its sign.
        let axis = if self.dim == 2 && rel[1].abs() > rel[0].abs() { 1 } else { 0 };
        let mut dir = [0.0; 2];
        dir[axis] = if rel[axis] < 0.0 { -1.0 } else { 1.0 };
        self.interior_of[k]
            .iter()
            .copied()
            .find(|&f| self.outward_normal(f, k) == dir)
    }

    pub fn summary(&self) -> MeshSummary {
        MeshSummary {
            dimension: self.dim,
            cell_count: self.cells.len(),
            h: self.h,
            alpha_best: self.check_admissibility().alpha_best,
        }
    }

    /// CSV rows `id,x[,y],measure` with round-trip precision.
    pub fn write_geometry_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        if self.dim == 1 {
            writeln!(w, "id,x,measure")?;
        } else {
            writeln!(w, "id,x,y,measure")?;
        }
        for c in &self.cells {
            if self.dim == 1 {
                writeln!(w, "{},{:.16e},{:.16e}", c.id, c.center[0], c.measure)?;
            } else {
                writeln!(w, "{},{:.16e},{:.16e},{:.16e}", c.id, c.center[0], c.center[1], c.measure)?;
            }
        }
        Ok(())
    }
}

fn locate_axis(edges: &[f64], x: f64) -> Option<usize> {
    let n = edges.len() - 1;
    if x < edges[0] || x > edges[n] {
        return None;
    }
    // First edge strictly greater than x, minus one.
    let i = edges.partition_point(|&e| e <= x);
    Some(i.saturating_sub(1).min(n - 1))
}

/// One value per cell at a given time level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellField {
    pub values: Vec<f64>,
    pub level: usize,
    pub time: f64,
}

impl CellField {
    pub fn new(mesh: &Mesh, values: Vec<f64>, level: usize, time: f64) -> Result<CellField> {
        if values.len() != mesh.n_cells() {
            return Err(invalid(format!(
                "field has {} values for {} cells",
                values.len(),
                mesh.n_cells()
            )));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite value in cell {i}")));
        }
        Ok(CellField { values, level, time })
    }

    pub fn constant(mesh: &Mesh, c: f64) -> CellField {
        CellField { values: vec![c; mesh.n_cells()], level: 0, time: 0.0 }
    }
}
