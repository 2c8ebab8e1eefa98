use std::ops::Range;

use crate::error::{Error, Result};
use crate::linalg::{is_symmetric, min_eig, Mat};
use crate::lmi::{AffineMatrix, Problem, Var};

/// `Σ_k θ_k F_k ⪰ 0` over the coordinates of one class. A 1×1 constraint is
/// a sign condition.
#[derive(Clone, Debug)]
pub struct ParamLmi {
    pub size: usize,
    pub terms: Vec<(usize, Mat)>,
}

impl ParamLmi {
    pub fn nonneg(k: usize) -> Self {
        Self {
            size: 1,
            terms: vec![(k, Mat::from_element(1, 1, 1.0))],
        }
    }

    pub fn eval(&self, theta: &[f64]) -> Mat {
        let mut out = Mat::zeros(self.size, self.size);
        for (k, f) in &self.terms {
            out += f * theta[*k];
        }
        out
    }

    fn shifted(&self, by: usize) -> Self {
        Self {
            size: self.size,
            terms: self.terms.iter().map(|(k, f)| (k + by, f.clone())).collect(),
        }
    }
}

/// How the coordinates of a summand are constrained; used to pick a
/// membership procedure.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ComponentKind {
    /// Every coordinate is a nonnegative scalar and nothing else is imposed.
    Scalars,
    /// The coordinates form one PSD matrix of the given size.
    Psd(usize),
    /// Anything else.
    General,
}

#[derive(Clone, Debug)]
pub struct Component {
    pub label: String,
    pub coords: Range<usize>,
    pub kind: ComponentKind,
}

/// A cone `{P(θ) = Σ_k θ_k G_k : θ feasible}` of symmetric matrices, where
/// feasibility is a list of homogeneous LMIs and linear equalities.
///
/// `split` is the size of the upper-left block, the one that multiplies the
/// uncertainty in `[Δᵀ; I]ᵀ P [Δᵀ; I]`.
#[derive(Clone, Debug)]
pub struct MultiplierClass {
    pub dim: usize,
    pub split: usize,
    pub generators: Vec<Mat>,
    pub constraints: Vec<ParamLmi>,
    /// Each row `Σ c_k θ_k = 0`.
    pub equalities: Vec<Vec<(usize, f64)>>,
    pub components: Vec<Component>,
}

/// A realized multiplier.
#[derive(Clone, Debug)]
pub struct MultiplierValue {
    pub theta: Vec<f64>,
    pub p: Mat,
}

/// A class placed inside an LMI problem.
#[derive(Clone, Debug)]
pub struct MultiplierVar {
    pub theta: Option<Var>,
    pub p: AffineMatrix,
}

impl MultiplierVar {
    pub fn value(&self, y: &[f64], class: &MultiplierClass) -> MultiplierValue {
        let theta = match &self.theta {
            Some(v) => v.value(y).as_slice().to_vec(),
            None => Vec::new(),
        };
        let p = class.eval(&theta);
        MultiplierValue { theta, p }
    }
}

impl MultiplierClass {
    /// The class containing only the zero matrix.
    pub fn zero(dim: usize, split: usize) -> Self {
        Self {
            dim,
            split,
            generators: Vec::new(),
            constraints: Vec::new(),
            equalities: Vec::new(),
            components: Vec::new(),
        }
    }

    /// Conic hull of the given generators, one nonnegative weight each.
    pub fn from_generators(label: &str, split: usize, generators: Vec<Mat>) -> Result<Self> {
        let dim = generators.first().map_or(split, |g| g.nrows());
        for g in &generators {
            if g.nrows() != dim || !is_symmetric(g, 1e-10) {
                return Err(Error::NotSymmetric(format!("generator of {label}")));
            }
        }
        let k = generators.len();
        Ok(Self {
            dim,
            split,
            constraints: (0..k).map(ParamLmi::nonneg).collect(),
            equalities: Vec::new(),
            components: vec![Component {
                label: label.to_string(),
                coords: 0..k,
                kind: ComponentKind::Scalars,
            }],
            generators,
        })
    }

    pub fn num_params(&self) -> usize {
        self.generators.len()
    }

    pub fn eval(&self, theta: &[f64]) -> Mat {
        let mut p = Mat::zeros(self.dim, self.dim);
        for (g, t) in self.generators.iter().zip(theta) {
            if *t != 0.0 {
                p += g * *t;
            }
        }
        p
    }

    pub fn is_feasible(&self, theta: &[f64], tol: f64) -> bool {
        self.constraints.iter().all(|c| min_eig(&c.eval(theta)) >= -tol)
            && self
                .equalities
                .iter()
                .all(|row| row.iter().map(|(k, c)| c * theta[*k]).sum::<f64>().abs() <= tol)
    }

    /// `Tᵀ P T` applied to every generator.
    pub fn congruence(&self, t: &Mat, split: usize) -> Result<Self> {
        if t.nrows() != self.dim {
            return Err(Error::dims(format!(
                "congruence factor has {} rows, class has dimension {}",
                t.nrows(),
                self.dim
            )));
        }
        let tt = t.transpose();
        Ok(Self {
            dim: t.ncols(),
            split,
            generators: self.generators.iter().map(|g| &tt * g * t).collect(),
            constraints: self.constraints.clone(),
            equalities: self.equalities.clone(),
            components: self.components.clone(),
        })
    }

    /// `[Δᵀ; I]ᵀ P(θ) [Δᵀ; I]` for each generator, with `Δ` of size
    /// `(dim − split) × split`.
    pub fn quadratic_forms(&self, delta: &Mat) -> Result<Vec<Mat>> {
        let nout = self.dim - self.split;
        if delta.shape() != (nout, self.split) {
            return Err(Error::dims(format!(
                "uncertainty is {}x{}, class expects {nout}x{}",
                delta.nrows(),
                delta.ncols(),
                self.split
            )));
        }
        let w = crate::linalg::vstack(&[&delta.transpose(), &Mat::identity(nout, nout)]);
        let wt = w.transpose();
        Ok(self.generators.iter().map(|g| &wt * g * &w).collect())
    }

    /// Declares `θ` in `prob`, adds the parameter constraints and returns
    /// the affine expression for `P(θ)`.
    pub fn instantiate(&self, prob: &mut Problem, name: &str) -> MultiplierVar {
        if self.generators.is_empty() {
            return MultiplierVar {
                theta: None,
                p: AffineMatrix::zeros(self.dim, self.dim),
            };
        }
        let theta = prob.matrix(name, self.num_params(), 1);
        let off = theta.offset();
        let mut p = AffineMatrix::zeros(self.dim, self.dim);
        for (k, g) in self.generators.iter().enumerate() {
            p.add_term(off + k, g);
        }
        for (i, c) in self.constraints.iter().enumerate() {
            let mut e = AffineMatrix::zeros(c.size, c.size);
            for (k, f) in &c.terms {
                e.add_term(off + k, f);
            }
            prob.psd(format!("{name} constraint {i}"), e);
        }
        for (i, row) in self.equalities.iter().enumerate() {
            let mut e = AffineMatrix::zeros(1, 1);
            for (k, c) in row {
                e.add_term(off + k, &Mat::from_element(1, 1, *c));
            }
            prob.equal(format!("{name} equality {i}"), e);
        }
        MultiplierVar { theta: Some(theta), p }
    }

    /// Coordinates of one summand as a standalone class.
    pub fn component_class(&self, idx: usize) -> MultiplierClass {
        let comp = &self.components[idx];
        let r = comp.coords.clone();
        let inside = |k: usize| r.contains(&k);
        MultiplierClass {
            dim: self.dim,
            split: self.split,
            generators: self.generators[r.clone()].to_vec(),
            constraints: self
                .constraints
                .iter()
                .filter(|c| c.terms.iter().all(|(k, _)| inside(*k)) && !c.terms.is_empty())
                .map(|c| ParamLmi {
                    size: c.size,
                    terms: c.terms.iter().map(|(k, f)| (k - r.start, f.clone())).collect(),
                })
                .collect(),
            equalities: self
                .equalities
                .iter()
                .filter(|row| row.iter().all(|(k, _)| inside(*k)))
                .map(|row| row.iter().map(|(k, c)| (k - r.start, *c)).collect())
                .collect(),
            components: vec![Component {
                label: comp.label.clone(),
                coords: 0..r.len(),
                kind: comp.kind,
            }],
        }
    }

    pub(crate) fn append(&mut self, other: &MultiplierClass) {
        let by = self.generators.len();
        self.generators.extend(other.generators.iter().cloned());
        self.constraints.extend(other.constraints.iter().map(|c| c.shifted(by)));
        self.equalities.extend(
            other
                .equalities
                .iter()
                .map(|row| row.iter().map(|(k, c)| (k + by, *c)).collect()),
        );
        self.components.extend(other.components.iter().map(|c| Component {
            label: c.label.clone(),
            coords: c.coords.start + by..c.coords.end + by,
            kind: c.kind,
        }));
    }
}

/// The Minkowski sum of classes of equal dimension.
pub fn sum_classes(classes: &[&MultiplierClass]) -> Result<MultiplierClass> {
    let first = classes
        .first()
        .ok_or_else(|| Error::InvalidArgument("sum of no classes".into()))?;
    let mut out = MultiplierClass::zero(first.dim, first.split);
    for c in classes {
        if c.dim != first.dim || c.split != first.split {
            return Err(Error::dims(format!(
                "cannot add classes of dimension {} and {}",
                first.dim, c.dim
            )));
        }
        out.append(c);
    }
    Ok(out)
}
