use crate::error::{Error, Result};
use crate::lft::structure::UncertaintyStructure;
use crate::linalg::{rank, Mat};

/// Extra channel `w′ = Δ′(x) z′` entering the state and the main `z`.
#[derive(Clone, Debug)]
pub struct NonlinearChannel {
    pub b_w: Mat,
    pub d_zw: Mat,
    pub c_z: Mat,
    pub d_z: Mat,
}

/// Known matrices of
///
/// ```text
/// x₊ = A x + B u + B_d d + B_w w (+ B_w′ w′)
/// e  = C_e x + D_eu u + D_ed d
/// z  = C_z x + D_z u (+ D_zw′ w′)
/// z′ = C_z′ x + D_z′ u
/// w  = Δ z
/// ```
#[derive(Clone, Debug)]
pub struct LftPlant {
    pub a: Mat,
    pub b: Mat,
    pub b_d: Mat,
    pub b_w: Mat,
    pub c_e: Mat,
    pub d_eu: Mat,
    pub d_ed: Mat,
    pub c_z: Mat,
    pub d_z: Mat,
    pub nonlinear: Option<NonlinearChannel>,
}

impl LftPlant {
    /// A plant without uncertainty or performance channels.
    pub fn nominal(a: Mat, b: Mat) -> Self {
        let (n, m) = (a.nrows(), b.ncols());
        Self {
            a,
            b,
            b_d: Mat::zeros(n, 0),
            b_w: Mat::zeros(n, 0),
            c_e: Mat::zeros(0, n),
            d_eu: Mat::zeros(0, m),
            d_ed: Mat::zeros(0, 0),
            c_z: Mat::zeros(0, n),
            d_z: Mat::zeros(0, m),
            nonlinear: None,
        }
    }

    pub fn with_disturbance(mut self, b_d: Mat) -> Self {
        let ne = self.c_e.nrows();
        self.d_ed = Mat::zeros(ne, b_d.ncols());
        self.b_d = b_d;
        self
    }

    pub fn with_performance(mut self, c_e: Mat, d_eu: Mat) -> Self {
        self.d_ed = Mat::zeros(c_e.nrows(), self.b_d.ncols());
        self.c_e = c_e;
        self.d_eu = d_eu;
        self
    }

    pub fn with_uncertainty(mut self, b_w: Mat, c_z: Mat, d_z: Mat) -> Self {
        self.b_w = b_w;
        self.c_z = c_z;
        self.d_z = d_z;
        self
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }
    pub fn m(&self) -> usize {
        self.b.ncols()
    }
    pub fn n_d(&self) -> usize {
        self.b_d.ncols()
    }
    pub fn n_w(&self) -> usize {
        self.b_w.ncols()
    }
    pub fn n_z(&self) -> usize {
        self.c_z.nrows()
    }
    pub fn n_e(&self) -> usize {
        self.c_e.nrows()
    }

    /// `A + B_w Δ C_z` and `B + B_w Δ D_z`: the plant with the channel closed.
    pub fn close_uncertainty(&self, delta: &Mat) -> (Mat, Mat) {
        (&self.a + &self.b_w * delta * &self.c_z, &self.b + &self.b_w * delta * &self.d_z)
    }

    /// The known plant at a fixed `Δ`, without an uncertainty channel.
    pub fn closed_at(&self, delta: &Mat) -> LftPlant {
        let (a, b) = self.close_uncertainty(delta);
        LftPlant {
            a,
            b,
            b_w: Mat::zeros(self.n(), 0),
            c_z: Mat::zeros(0, self.n()),
            d_z: Mat::zeros(0, self.m()),
            nonlinear: None,
            ..self.clone()
        }
    }

    /// Checks that all shapes agree.
    pub fn check_dimensions(&self) -> Result<()> {
        let (n, m, nd, nw, nz, ne) = (self.n(), self.m(), self.n_d(), self.n_w(), self.n_z(), self.n_e());
        let expect = |name: &str, mat: &Mat, r: usize, c: usize| -> Result<()> {
            if mat.shape() != (r, c) {
                Err(Error::dims(format!("{name} is {}x{}, expected {r}x{c}", mat.nrows(), mat.ncols())))
            } else {
                Ok(())
            }
        };
        expect("A", &self.a, n, n)?;
        expect("B", &self.b, n, m)?;
        expect("B_d", &self.b_d, n, nd)?;
        expect("B_w", &self.b_w, n, nw)?;
        expect("C_e", &self.c_e, ne, n)?;
        expect("D_eu", &self.d_eu, ne, m)?;
        expect("D_ed", &self.d_ed, ne, nd)?;
        expect("C_z", &self.c_z, nz, n)?;
        expect("D_z", &self.d_z, nz, m)?;
        if let Some(nl) = &self.nonlinear {
            let (nwp, nzp) = (nl.b_w.ncols(), nl.c_z.nrows());
            expect("B_w'", &nl.b_w, n, nwp)?;
            expect("D_zw'", &nl.d_zw, nz, nwp)?;
            expect("C_z'", &nl.c_z, nzp, n)?;
            expect("D_z'", &nl.d_z, nzp, m)?;
        }
        Ok(())
    }
}

/// A plant checked against its uncertainty structure, with the block
/// input matrices `B_j = B_w R_j` cached.
#[derive(Clone, Debug)]
pub struct ValidatedPlant {
    pub plant: LftPlant,
    pub structure: UncertaintyStructure,
    pub b_blocks: Vec<Mat>,
}

/// Rank tolerance relative to the largest singular value.
pub const RANK_TOL: f64 = 1e-9;

pub fn validate_plant(plant: LftPlant, structure: UncertaintyStructure, tol: f64) -> Result<ValidatedPlant> {
    plant.check_dimensions()?;
    structure.check()?;
    if structure.n_w() != plant.n_w() || structure.n_z() != plant.n_z() {
        return Err(Error::dims(format!(
            "structure is {}x{} but plant channel is {}x{}",
            structure.n_w(),
            structure.n_z(),
            plant.n_w(),
            plant.n_z()
        )));
    }
    let rd = rank(&plant.b_d, tol);
    if rd < plant.n_d() {
        return Err(Error::RankDeficient {
            what: "B_d".into(),
            rank: rd,
            expected: plant.n_d(),
        });
    }
    let mut b_blocks = Vec::with_capacity(structure.blocks.len());
    for j in 0..structure.blocks.len() {
        let bj = &plant.b_w * structure.r(j);
        let r = rank(&bj, tol);
        if r < bj.ncols() {
            return Err(Error::RankDeficient {
                what: format!("B_{}", j + 1),
                rank: r,
                expected: bj.ncols(),
            });
        }
        b_blocks.push(bj);
    }
    Ok(ValidatedPlant {
        plant,
        structure,
        b_blocks,
    })
}
