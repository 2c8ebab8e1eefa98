//! Decision variables, constraints and compilation to standard conic form.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::linalg::{max_abs, min_eig, Mat};
use crate::lmi::expr::AffineMatrix;
use crate::lmi::svec::{svec_indices, svec_len};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VarShape {
    Scalar,
    Symmetric(usize),
    Matrix(usize, usize),
}

impl VarShape {
    pub fn coordinates(&self) -> usize {
        match *self {
            VarShape::Scalar => 1,
            VarShape::Symmetric(s) => svec_len(s),
            VarShape::Matrix(r, c) => r * c,
        }
    }
}

/// Handle to a declared variable. Cheap to clone.
///
/// Symmetric variables use the entries of the upper triangle as coordinates
/// (basis `E_ij + E_ji` off the diagonal), rectangular ones their entries in
/// column-major order.
#[derive(Clone, Debug)]
pub struct Var {
    pub name: String,
    pub shape: VarShape,
    offset: usize,
}

impl Var {
    pub fn offset(&self) -> usize {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.shape.coordinates()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// The variable as an affine expression.
    pub fn expr(&self) -> AffineMatrix {
        match self.shape {
            VarShape::Scalar => AffineMatrix::term(self.offset, Mat::from_element(1, 1, 1.0)),
            VarShape::Symmetric(s) => {
                let mut e = AffineMatrix::zeros(s, s);
                for (k, (i, j)) in svec_indices(s).enumerate() {
                    let mut g = Mat::zeros(s, s);
                    g[(i, j)] = 1.0;
                    g[(j, i)] = 1.0;
                    e.add_term(self.offset + k, &g);
                }
                e
            }
            VarShape::Matrix(r, c) => {
                let mut e = AffineMatrix::zeros(r, c);
                for j in 0..c {
                    for i in 0..r {
                        let mut g = Mat::zeros(r, c);
                        g[(i, j)] = 1.0;
                        e.add_term(self.offset + j * r + i, &g);
                    }
                }
                e
            }
        }
    }

    /// Reads the variable back from a flat coordinate vector.
    pub fn value(&self, y: &[f64]) -> Mat {
        let v = &y[self.offset..self.offset + self.len()];
        match self.shape {
            VarShape::Scalar => Mat::from_element(1, 1, v[0]),
            VarShape::Symmetric(s) => {
                let mut m = Mat::zeros(s, s);
                for (k, (i, j)) in svec_indices(s).enumerate() {
                    m[(i, j)] = v[k];
                    m[(j, i)] = v[k];
                }
                m
            }
            VarShape::Matrix(r, c) => Mat::from_column_slice(r, c, v),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintKind {
    /// `F ⪰ 0`, or `F ⪰ εI` after scaling when strict.
    Psd { strict: bool },
    /// `F = 0` entrywise.
    Zero,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub label: String,
    pub kind: ConstraintKind,
    pub expr: AffineMatrix,
}

impl Constraint {
    /// Positive factor applied to the block before it is handed to the solver.
    pub fn scale(&self) -> f64 {
        let (c, t) = self.expr.magnitude();
        let m = if c > 0.0 { c } else { t };
        if m > 0.0 {
            1.0 / m
        } else {
            1.0
        }
    }

    /// Violation of the unshifted constraint at `y`, relative to the size of
    /// the scaled constant term.
    pub fn residual(&self, y: &[f64]) -> f64 {
        let s = self.scale();
        let f = self.expr.eval(y) * s;
        let denom = 1.0 + max_abs(self.expr.constant_part()) * s;
        match self.kind {
            ConstraintKind::Psd { .. } => (-min_eig(&f)).max(0.0) / denom,
            ConstraintKind::Zero => max_abs(&f) / denom,
        }
    }
}

impl Constraint {
    /// For a strict block, the smallest eigenvalue of `±F(y)` (the side
    /// that must be positive) relative to the size of the terms active at
    /// `y`, `max|F₀| + Σ |y_k| max|F_k|`.
    pub fn strict_margin(&self, y: &[f64]) -> Option<f64> {
        let ConstraintKind::Psd { strict: true } = self.kind else {
            return None;
        };
        let active = max_abs(self.expr.constant_part())
            + self.expr.terms().map(|(k, f)| y[k].abs() * max_abs(f)).sum::<f64>();
        if active == 0.0 {
            return Some(0.0);
        }
        Some(min_eig(&self.expr.eval(y)) / active)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Minimize,
    Maximize,
}

#[derive(Clone, Debug)]
pub struct Objective {
    pub sense: Sense,
    pub expr: AffineMatrix,
}

/// A linear objective over affine matrix inequalities and equalities.
#[derive(Clone, Debug, Default)]
pub struct Problem {
    vars: Vec<Var>,
    n: usize,
    constraints: Vec<Constraint>,
    objective: Option<Objective>,
}

/// Cone blocks in row order of the standard form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Cone {
    Zero(usize),
    Nonnegative(usize),
    Psd(usize),
}

impl Cone {
    pub fn rows(&self) -> usize {
        match *self {
            Cone::Zero(k) | Cone::Nonnegative(k) => k,
            Cone::Psd(s) => svec_len(s),
        }
    }
}

/// `min qᵀx  s.t.  Ax + s = b, s ∈ K`, with `A` stored as triplets.
#[derive(Clone, Debug)]
pub struct StandardForm {
    pub n: usize,
    pub m: usize,
    /// Objective direction, normalized to unit max-norm.
    pub q: Vec<f64>,
    pub objective_offset: f64,
    pub a: Vec<(usize, usize, f64)>,
    pub b: Vec<f64>,
    pub cones: Vec<Cone>,
    /// Standard-form column of each original coordinate, `None` if unused.
    pub column_of: Vec<Option<usize>>,
    /// Objective sign: `+1` when minimizing, `-1` when maximizing.
    pub sign: f64,
}

impl StandardForm {
    /// Maps a standard-form solution back to the original coordinates.
    pub fn extract(&self, x: &[f64]) -> Vec<f64> {
        self.column_of.iter().map(|c| c.map_or(0.0, |j| x[j])).collect()
    }

    /// Plain-text sparse dump: a header, cone list, then `q`, `A` and `b`
    /// triplets with zero-based indices.
    pub fn to_triplet_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# conic problem: min q'x s.t. Ax + s = b, s in K");
        let _ = writeln!(out, "dims {} {}", self.m, self.n);
        for c in &self.cones {
            let _ = match c {
                Cone::Zero(k) => writeln!(out, "cone zero {k}"),
                Cone::Nonnegative(k) => writeln!(out, "cone nonneg {k}"),
                Cone::Psd(s) => writeln!(out, "cone psd {s}"),
            };
        }
        for (j, v) in self.q.iter().enumerate() {
            if *v != 0.0 {
                let _ = writeln!(out, "q {j} {v:e}");
            }
        }
        for (i, j, v) in &self.a {
            let _ = writeln!(out, "A {i} {j} {v:e}");
        }
        for (i, v) in self.b.iter().enumerate() {
            if *v != 0.0 {
                let _ = writeln!(out, "b {i} {v:e}");
            }
        }
        out
    }
}

impl Problem {
    pub fn new() -> Self {
        Self::default()
    }

    fn declare(&mut self, name: &str, shape: VarShape) -> Var {
        let v = Var {
            name: name.to_string(),
            shape,
            offset: self.n,
        };
        self.n += shape.coordinates();
        self.vars.push(v.clone());
        v
    }

    pub fn scalar(&mut self, name: &str) -> Var {
        self.declare(name, VarShape::Scalar)
    }

    /// Scalar with `x ≥ 0`.
    pub fn nonneg(&mut self, name: &str) -> Var {
        let v = self.scalar(name);
        self.psd(format!("{name} >= 0"), v.expr());
        v
    }

    pub fn symmetric(&mut self, name: &str, s: usize) -> Var {
        self.declare(name, VarShape::Symmetric(s))
    }

    /// Symmetric variable constrained to be positive semidefinite.
    pub fn psd_var(&mut self, name: &str, s: usize) -> Var {
        let v = self.symmetric(name, s);
        if s > 0 {
            self.psd(format!("{name} psd"), v.expr());
        }
        v
    }

    pub fn matrix(&mut self, name: &str, r: usize, c: usize) -> Var {
        self.declare(name, VarShape::Matrix(r, c))
    }

    pub fn num_coordinates(&self) -> usize {
        self.n
    }

    pub fn variables(&self) -> &[Var] {
        &self.vars
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    fn push(&mut self, label: impl Into<String>, kind: ConstraintKind, expr: AffineMatrix) {
        if expr.nrows() == 0 || expr.ncols() == 0 {
            return;
        }
        self.constraints.push(Constraint {
            label: label.into(),
            kind,
            expr,
        });
    }

    pub fn psd(&mut self, label: impl Into<String>, f: AffineMatrix) {
        self.push(label, ConstraintKind::Psd { strict: false }, f);
    }

    pub fn strictly_psd(&mut self, label: impl Into<String>, f: AffineMatrix) {
        self.push(label, ConstraintKind::Psd { strict: true }, f);
    }

    pub fn nsd(&mut self, label: impl Into<String>, f: AffineMatrix) {
        self.psd(label, -f);
    }

    pub fn strictly_nsd(&mut self, label: impl Into<String>, f: AffineMatrix) {
        self.strictly_psd(label, -f);
    }

    pub fn equal(&mut self, label: impl Into<String>, f: AffineMatrix) {
        self.push(label, ConstraintKind::Zero, f);
    }

    pub fn minimize(&mut self, f: AffineMatrix) {
        self.objective = Some(Objective {
            sense: Sense::Minimize,
            expr: f,
        });
    }

    pub fn maximize(&mut self, f: AffineMatrix) {
        self.objective = Some(Objective {
            sense: Sense::Maximize,
            expr: f,
        });
    }

    pub fn clear_objective(&mut self) {
        self.objective = None;
    }

    pub fn objective(&self) -> Option<&Objective> {
        self.objective.as_ref()
    }

    /// Value of the objective at `y` in the caller's sense.
    pub fn objective_value(&self, y: &[f64]) -> Option<f64> {
        self.objective.as_ref().map(|o| o.expr.eval(y)[(0, 0)])
    }

    /// Worst relative constraint violation at `y` over all constraints.
    pub fn max_residual(&self, y: &[f64]) -> f64 {
        self.constraints.iter().map(|c| c.residual(y)).fold(0.0, f64::max)
    }

    /// Smallest relative margin over the strict blocks, `None` without any.
    pub fn min_strict_margin(&self, y: &[f64]) -> Option<f64> {
        self.constraints.iter().filter_map(|c| c.strict_margin(y)).reduce(f64::min)
    }

    fn validate(&self) -> Result<()> {
        let check = |e: &AffineMatrix| match e.max_index() {
            Some(k) if k >= self.n => Err(Error::UnreferencedVariable(k)),
            _ => Ok(()),
        };
        for c in &self.constraints {
            check(&c.expr)?;
            if let ConstraintKind::Psd { .. } = c.kind {
                if !c.expr.is_symmetric(1e-9) {
                    return Err(Error::NotSymmetric(c.label.clone()));
                }
            }
        }
        if let Some(o) = &self.objective {
            check(&o.expr)?;
            if o.expr.shape() != (1, 1) {
                return Err(Error::InvalidArgument("objective must be scalar".into()));
            }
        }
        Ok(())
    }

    /// Builds the standard form. Strict blocks are shifted by `strict_eps`
    /// after each block is scaled by the inverse of its largest constant entry.
    pub fn compile(&self, strict_eps: f64) -> Result<StandardForm> {
        self.validate()?;

        let mut used = vec![false; self.n];
        for c in &self.constraints {
            for (k, _) in c.expr.terms() {
                used[k] = true;
            }
        }
        if let Some(o) = &self.objective {
            for (k, _) in o.expr.terms() {
                used[k] = true;
            }
        }
        let mut column_of = vec![None; self.n];
        let mut n = 0;
        for (k, u) in used.iter().enumerate() {
            if *u {
                column_of[k] = Some(n);
                n += 1;
            }
        }

        let (sign, mut q, offset) = match &self.objective {
            None => (1.0, vec![0.0; n], 0.0),
            Some(o) => {
                let sign = if o.sense == Sense::Minimize { 1.0 } else { -1.0 };
                let (c, coeffs) = o.expr.scalar_coefficients();
                let mut q = vec![0.0; n];
                for (k, v) in coeffs {
                    q[column_of[k].expect("objective coordinate is used")] += sign * v;
                }
                (sign, q, sign * c)
            }
        };
        // the solver only sees a rescaled direction; objective values are
        // recomputed from the original expression
        let qmax = q.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
        if qmax > 0.0 {
            q.iter_mut().for_each(|v| *v /= qmax);
        }

        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut cones: Vec<Cone> = Vec::new();
        let push_cone = |cones: &mut Vec<Cone>, c: Cone| match (cones.last_mut(), c) {
            (Some(Cone::Zero(k)), Cone::Zero(j)) => *k += j,
            (Some(Cone::Nonnegative(k)), Cone::Nonnegative(j)) => *k += j,
            _ => cones.push(c),
        };

        for c in &self.constraints {
            let s = c.scale();
            let row0 = b.len();
            let (r, cc) = c.expr.shape();
            match c.kind {
                ConstraintKind::Zero => {
                    // symmetric equalities only need one triangle
                    let entries: Vec<(usize, usize)> = if r == cc && c.expr.is_symmetric(1e-12) {
                        svec_indices(r).collect()
                    } else {
                        (0..cc).flat_map(|j| (0..r).map(move |i| (i, j))).collect()
                    };
                    for (idx, &(i, j)) in entries.iter().enumerate() {
                        b.push(s * c.expr.constant_part()[(i, j)]);
                        for (k, m) in c.expr.terms() {
                            let v = m[(i, j)];
                            if v != 0.0 {
                                a.push((row0 + idx, column_of[k].unwrap(), -s * v));
                            }
                        }
                    }
                    push_cone(&mut cones, Cone::Zero(entries.len()));
                }
                ConstraintKind::Psd { strict } => {
                    let eps = if strict { strict_eps } else { 0.0 };
                    if r == 1 {
                        b.push(s * c.expr.constant_part()[(0, 0)] - eps);
                        for (k, m) in c.expr.terms() {
                            if m[(0, 0)] != 0.0 {
                                a.push((row0, column_of[k].unwrap(), -s * m[(0, 0)]));
                            }
                        }
                        push_cone(&mut cones, Cone::Nonnegative(1));
                    } else {
                        let r2 = std::f64::consts::SQRT_2;
                        let w = |i: usize, j: usize| if i == j { 1.0 } else { r2 };
                        let f0 = c.expr.constant_part();
                        for (idx, (i, j)) in svec_indices(r).enumerate() {
                            let shift = if i == j { eps } else { 0.0 };
                            b.push(w(i, j) * s * f0[(i, j)] - shift);
                            for (k, m) in c.expr.terms() {
                                let v = m[(i, j)];
                                if v != 0.0 {
                                    a.push((row0 + idx, column_of[k].unwrap(), -w(i, j) * s * v));
                                }
                            }
                        }
                        push_cone(&mut cones, Cone::Psd(r));
                    }
                }
            }
        }

        Ok(StandardForm {
            n,
            m: b.len(),
            q,
            objective_offset: offset,
            a,
            b,
            cones,
            column_of,
            sign,
        })
    }
}
