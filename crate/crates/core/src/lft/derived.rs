use crate::error::{Error, Result};
use crate::lft::plant::LftPlant;
use crate::lft::structure::UncertaintyStructure;
use crate::linalg::{eye, hstack, vstack, Mat};

/// State-space model of an ARX system on the extended state
/// `ξ = (u_{k−n}, …, u_{k−1}, y_{k−n}, …, y_{k−1})` with the unknown
/// coefficients `Δ = [B_n … B₁ A_n … A₁ B₀]` as a single full block.
///
/// The returned plant has no performance channel; callers attach one.
pub fn build_extended_state_plant(n: usize, m: usize, p: usize, b_d0: &Mat) -> Result<(LftPlant, UncertaintyStructure)> {
    if n == 0 || m == 0 || p == 0 {
        return Err(Error::InvalidArgument("order and channel sizes must be positive".into()));
    }
    if b_d0.nrows() != p {
        return Err(Error::dims(format!("B_d0 has {} rows, expected {p}", b_d0.nrows())));
    }
    let nu = n * m;
    let dim = n * (m + p);
    let mut a = Mat::zeros(dim, dim);
    for i in 0..n - 1 {
        a.view_mut((i * m, (i + 1) * m), (m, m)).copy_from(&eye(m));
        a.view_mut((nu + i * p, nu + (i + 1) * p), (p, p)).copy_from(&eye(p));
    }
    let mut b = Mat::zeros(dim, m);
    b.view_mut(((n - 1) * m, 0), (m, m)).copy_from(&eye(m));
    let mut b_w = Mat::zeros(dim, p);
    b_w.view_mut((nu + (n - 1) * p, 0), (p, p)).copy_from(&eye(p));
    let b_d = &b_w * b_d0;
    let c_z = vstack(&[&eye(dim), &Mat::zeros(m, dim)]);
    let d_z = vstack(&[&Mat::zeros(dim, m), &eye(m)]);
    let plant = LftPlant::nominal(a, b)
        .with_disturbance(b_d)
        .with_uncertainty(b_w, c_z, d_z);
    Ok((plant, UncertaintyStructure::single_full(p, dim + m)))
}

/// `[B_n … B₁ A_n … A₁ B₀]` from `a = [A₁, …, A_n]` and `b = [B₀, …, B_n]`.
pub fn arx_uncertainty(a: &[Mat], b: &[Mat]) -> Mat {
    let n = a.len();
    let mut parts: Vec<&Mat> = Vec::with_capacity(2 * n + 1);
    parts.extend(b[1..=n].iter().rev());
    parts.extend(a.iter().rev());
    parts.push(&b[0]);
    hstack(&parts)
}

/// Dynamic output-feedback law `u_k = Σ K_iᵘ u_{k−i} + Σ K_iʸ y_{k−i}`;
/// index `i−1` holds the coefficient for lag `i`.
#[derive(Clone, Debug)]
pub struct OutputFeedbackGains {
    pub k_u: Vec<Mat>,
    pub k_y: Vec<Mat>,
}

/// Splits `K = [K_nᵘ … K₁ᵘ K_nʸ … K₁ʸ]`.
pub fn partition_gain(k: &Mat, n: usize, m: usize, p: usize) -> Result<OutputFeedbackGains> {
    if k.shape() != (m, n * (m + p)) {
        return Err(Error::dims(format!("gain is {}x{}, expected {m}x{}", k.nrows(), k.ncols(), n * (m + p))));
    }
    let nu = n * m;
    let k_u = (1..=n).map(|i| k.columns((n - i) * m, m).into_owned()).collect();
    let k_y = (1..=n).map(|i| k.columns(nu + (n - i) * p, p).into_owned()).collect();
    Ok(OutputFeedbackGains { k_u, k_y })
}

/// The input matrices and output maps of an LFT, continuous or discrete.
#[derive(Clone, Debug)]
pub struct LftMatrices {
    pub a: Mat,
    pub b: Mat,
    pub b_w: Mat,
    pub b_d: Mat,
    pub c_z: Mat,
    pub d_z: Mat,
}

/// Zero-order-hold discretization applied to every input channel.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // rejects NaN too
pub fn discretize_zoh(c: &LftMatrices, h: f64) -> Result<LftMatrices> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("sampling time must be positive, got {h}")));
    }
    let (ad, gamma) = zoh_factors(&c.a, h);
    Ok(LftMatrices {
        a: ad,
        b: &gamma * &c.b,
        b_w: &gamma * &c.b_w,
        b_d: &gamma * &c.b_d,
        c_z: c.c_z.clone(),
        d_z: c.d_z.clone(),
    })
}

/// `(exp(A h), ∫₀ʰ exp(A τ) dτ)` from one exponential of `[[A, I], [0, 0]] h`.
pub fn zoh_factors(a: &Mat, h: f64) -> (Mat, Mat) {
    let n = a.nrows();
    let mut big = Mat::zeros(2 * n, 2 * n);
    big.view_mut((0, 0), (n, n)).copy_from(&(a * h));
    big.view_mut((0, n), (n, n)).copy_from(&(eye(n) * h));
    let e = big.exp();
    (e.view((0, 0), (n, n)).into_owned(), e.view((0, n), (n, n)).into_owned())
}
