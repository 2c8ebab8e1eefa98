use crate::error::{Error, Result};
use crate::lft::plant::LftPlant;
use crate::linalg::Mat;

/// A recorded input-state trajectory.
#[derive(Clone, Debug)]
pub struct Trajectory {
    /// `n × (N+1)` states.
    pub x: Mat,
    /// `m × N` inputs.
    pub u: Mat,
    /// `n_w′ × N` samples of the nonlinear channel output, if present.
    pub w_nl: Option<Mat>,
    /// Disturbance actually applied, when known (simulation only).
    pub d: Option<Mat>,
    pub seed: Option<u64>,
    pub description: String,
}

impl Trajectory {
    pub fn new(x: Mat, u: Mat) -> Result<Self> {
        if x.ncols() != u.ncols() + 1 {
            return Err(Error::dims(format!(
                "X has {} columns, U has {}; X needs exactly one more",
                x.ncols(),
                u.ncols()
            )));
        }
        Ok(Self {
            x,
            u,
            w_nl: None,
            d: None,
            seed: None,
            description: String::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.u.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `X` without the final state.
    pub fn x_past(&self) -> Mat {
        self.x.columns(0, self.len()).into_owned()
    }

    /// `X₊`: states shifted by one.
    pub fn x_next(&self) -> Mat {
        self.x.columns(1, self.len()).into_owned()
    }

    /// The first `n` samples.
    pub fn truncate(&self, n: usize) -> Trajectory {
        Trajectory {
            x: self.x.columns(0, n + 1).into_owned(),
            u: self.u.columns(0, n).into_owned(),
            w_nl: self.w_nl.as_ref().map(|w| w.columns(0, n).into_owned()),
            d: self.d.as_ref().map(|d| d.columns(0, n).into_owned()),
            seed: self.seed,
            description: self.description.clone(),
        }
    }
}

/// `M = X₊ − AX − BU` and `Z = C_z X + D_z U`, adjusted for the nonlinear
/// channel when present.
#[derive(Clone, Debug)]
pub struct DataMatrices {
    pub m: Mat,
    pub z: Mat,
    pub provenance: String,
}

impl DataMatrices {
    pub fn len(&self) -> usize {
        self.m.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Column-wise concatenation of several data sets.
    pub fn stack(parts: &[DataMatrices]) -> Result<DataMatrices> {
        let first = parts.first().ok_or_else(|| Error::InvalidArgument("no data to stack".into()))?;
        let (n, nz) = (first.m.nrows(), first.z.nrows());
        if parts.iter().any(|p| p.m.nrows() != n || p.z.nrows() != nz) {
            return Err(Error::dims("stacked data sets disagree in row count"));
        }
        let ms: Vec<&Mat> = parts.iter().map(|p| &p.m).collect();
        let zs: Vec<&Mat> = parts.iter().map(|p| &p.z).collect();
        Ok(DataMatrices {
            m: crate::linalg::hstack(&ms),
            z: crate::linalg::hstack(&zs),
            provenance: parts.iter().map(|p| p.provenance.as_str()).collect::<Vec<_>>().join("+"),
        })
    }
}

pub fn assemble_data_matrices(plant: &LftPlant, traj: &Trajectory) -> Result<DataMatrices> {
    let (n, m) = (plant.n(), plant.m());
    if traj.x.nrows() != n || traj.u.nrows() != m {
        return Err(Error::dims(format!(
            "trajectory has {} states and {} inputs, plant has {n} and {m}",
            traj.x.nrows(),
            traj.u.nrows()
        )));
    }
    let xp = traj.x_past();
    let mut mm = traj.x_next() - &plant.a * &xp - &plant.b * &traj.u;
    let mut z = &plant.c_z * &xp + &plant.d_z * &traj.u;
    if let Some(nl) = &plant.nonlinear {
        let w = traj
            .w_nl
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("plant has a nonlinear channel but the trajectory has no W'".into()))?;
        if w.shape() != (nl.b_w.ncols(), traj.len()) {
            return Err(Error::dims("W' has the wrong shape"));
        }
        mm -= &nl.b_w * w;
        z += &nl.d_zw * w;
    }
    Ok(DataMatrices {
        m: mm,
        z,
        provenance: if traj.description.is_empty() {
            format!("trajectory of length {}", traj.len())
        } else {
            traj.description.clone()
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{eye, from_rows, row};

    #[test]
    fn pure_data_special_case() {
        let x = from_rows(&[&[1.0, 2.0, 3.0], &[0.0, 1.0, -1.0]]);
        let u = row(&[0.5, -0.5]);
        let plant = LftPlant::nominal(Mat::zeros(2, 2), Mat::zeros(2, 1)).with_uncertainty(
            eye(2),
            crate::linalg::vstack(&[&eye(2), &Mat::zeros(1, 2)]),
            crate::linalg::vstack(&[&Mat::zeros(2, 1), &eye(1)]),
        );
        let dm = assemble_data_matrices(&plant, &Trajectory::new(x.clone(), u.clone()).unwrap()).unwrap();
        assert_eq!(dm.m, x.columns(1, 2).into_owned());
        assert_eq!(dm.z, crate::linalg::vstack(&[&x.columns(0, 2).into_owned(), &u]));
    }

    #[test]
    fn scalar_recursion() {
        // x₊ = 3x from x = 1
        let plant = LftPlant::nominal(Mat::zeros(1, 1), Mat::zeros(1, 1)).with_uncertainty(eye(1), eye(1), Mat::zeros(1, 1));
        let t = Trajectory::new(row(&[1.0, 2.0, 6.0]), row(&[0.0, 0.0])).unwrap();
        let dm = assemble_data_matrices(&plant, &t).unwrap();
        assert_eq!(dm.m, row(&[2.0, 6.0]));
        assert_eq!(dm.z, row(&[1.0, 2.0]));
    }

    #[test]
    fn exact_model_gives_zero_residual() {
        let a = from_rows(&[&[0.5, 0.1], &[0.0, 0.3]]);
        let b = from_rows(&[&[0.0], &[1.0]]);
        let u = row(&[1.0, -1.0, 0.5]);
        let mut x = Mat::zeros(2, 4);
        for k in 0..3 {
            let next = &a * x.column(k) + &b * u.column(k);
            x.set_column(k + 1, &next);
        }
        let plant = LftPlant::nominal(a, b);
        let dm = assemble_data_matrices(&plant, &Trajectory::new(x, u).unwrap()).unwrap();
        assert!(dm.m.norm() < 1e-15);
    }

    #[test]
    fn column_mismatch_rejected() {
        assert!(Trajectory::new(Mat::zeros(1, 3), Mat::zeros(1, 3)).is_err());
    }
}
