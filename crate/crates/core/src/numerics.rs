//! Small dense complex matrices, closed-form 2x2 unitary exponentials,
//! Hermitian eigen-decomposition and cumulative quadrature.
//!
//! Everything in this module is pure value arithmetic over owned data; all
//! functions are reentrant and safe to evaluate concurrently over grid points.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Largest matrix dimension the crate supports.
pub const MAX_DIM: usize = 8;

/// Default tolerance for unitarity checks, max entry of |U†U - I|.
pub const UNITARITY_TOL: f64 = 1e-12;
/// Default tolerance for Hermiticity checks, max entry of |H - H†|.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Default tolerance for the i*(Hermitian) shape check in [`mat_exp_su2`].
pub const DECOMPOSE_TOL: f64 = 1e-12;
/// Default oracle-comparison tolerance used by tests and diagnostics.
pub const ORACLE_TOL: f64 = 1e-10;
/// Default relative spectral-gap tolerance below which eigen-decomposition
/// refuses to label levels.
pub const GAP_TOL_REL: f64 = 1e-9;

/// Dense complex square matrix, row-major, `dim <= 8`.
#[derive(Debug, Clone, PartialEq)]
pub struct CMat {
    dim: usize,
    data: Vec<C64>,
}

impl CMat {
    pub fn zeros(dim: usize) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "dim must be in 1..={MAX_DIM}");
        CMat {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = CMat::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = CMat::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    /// Build a 2x2 matrix from its rows.
    pub fn two_by_two(a: C64, b: C64, c: C64, d: C64) -> Self {
        let mut m = CMat::zeros(2);
        m[(0, 0)] = a;
        m[(0, 1)] = b;
        m[(1, 0)] = c;
        m[(1, 1)] = d;
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn dagger(&self) -> CMat {
        CMat::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, z: C64) -> CMat {
        CMat {
            dim: self.dim,
            data: self.data.iter().map(|e| e * z).collect(),
        }
    }

    pub fn scale_re(&self, x: f64) -> CMat {
        self.scale(C64::new(x, 0.0))
    }

    /// Largest entry magnitude (sup-entry norm).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|e| e.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Spectral norm (largest singular value), via the Hermitian
    /// eigen-decomposition of A†A.
    pub fn spectral_norm(&self) -> f64 {
        let ata = &self.dagger() * self;
        let (vals, _) = eigh(&ata).expect("A†A is Hermitian by construction");
        vals.last().copied().unwrap_or(0.0).max(0.0).sqrt()
    }

    /// Sup-entry distance to another matrix.
    pub fn max_abs_diff(&self, other: &CMat) -> f64 {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max entry of |U†U - I|.
    pub fn unitarity_defect(&self) -> f64 {
        let prod = &self.dagger() * self;
        prod.max_abs_diff(&CMat::identity(self.dim))
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    /// Max entry of |H - H†|.
    pub fn hermiticity_defect(&self) -> f64 {
        self.max_abs_diff(&self.dagger())
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn col(&self, j: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn set_col(&mut self, j: usize, v: &[C64]) {
        assert_eq!(v.len(), self.dim);
        for i in 0..self.dim {
            self[(i, j)] = v[i];
        }
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

impl std::ops::Add for &CMat {
    type Output = CMat;
    fn add(self, rhs: &CMat) -> CMat {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        CMat {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }
}

impl std::ops::Sub for &CMat {
    type Output = CMat;
    fn sub(self, rhs: &CMat) -> CMat {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        CMat {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }
}

impl std::ops::Mul for &CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        CMat::from_fn(n, |i, j| (0..n).map(|k| self[(i, k)] * rhs[(k, j)]).sum())
    }
}

/// Inner product ⟨a|b⟩ = a† · b.
pub fn vec_inner(a: &[C64], b: &[C64]) -> C64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Outer product |a⟩⟨b|.
pub fn vec_outer(a: &[C64], b: &[C64]) -> CMat {
    assert_eq!(a.len(), b.len());
    CMat::from_fn(a.len(), |i, j| a[i] * b[j].conj())
}

/// Uniform time grid over `[t0, t1]` with `steps` intervals, `steps + 1` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t0: f64, t1: f64, steps: usize) -> Result<Self> {
        if !t0.is_finite() || !t1.is_finite() {
            return Err(Error::invalid_param("grid", "t0 and t1 must be finite"));
        }
        if t1 <= t0 {
            return Err(Error::invalid_param("grid", format!("t1 = {t1} must exceed t0 = {t0}")));
        }
        if steps < 1 {
            return Err(Error::invalid_param("grid", "steps must be >= 1"));
        }
        Ok(TimeGrid { t0, t1, steps })
    }

    pub fn dt(&self) -> f64 {
        (self.t1 - self.t0) / self.steps as f64
    }

    pub fn span(&self) -> f64 {
        self.t1 - self.t0
    }

    /// Number of grid points, `steps + 1`.
    pub fn len(&self) -> usize {
        self.steps + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn point(&self, k: usize) -> f64 {
        self.t0 + k as f64 * self.dt()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.point(k)).collect()
    }

    /// Index of the grid point matching `t` to within 1e-9 of the spacing.
    pub fn index_of(&self, t: f64) -> Result<usize> {
        let dt = self.dt();
        let k = ((t - self.t0) / dt).round();
        let err = Error::NotOnGrid {
            t,
            t0: self.t0,
            t1: self.t1,
            steps: self.steps,
        };
        if !(0.0..=(self.steps as f64)).contains(&k) {
            return Err(err);
        }
        let k = k as usize;
        if (self.point(k) - t).abs() > 1e-9 * dt.max(1.0) {
            return Err(err);
        }
        Ok(k)
    }

    /// Same span, twice the step count.
    pub fn refined(&self) -> TimeGrid {
        TimeGrid {
            t0: self.t0,
            t1: self.t1,
            steps: self.steps * 2,
        }
    }
}

/// Pauli coefficients `(c0, cx, cy, cz)` of `M = c0*I + cx*sx + cy*sy + cz*sz`.
pub fn pauli_decompose(m: &CMat) -> (C64, C64, C64, C64) {
    assert_eq!(m.dim(), 2, "Pauli decomposition is 2x2 only");
    let c0 = (m[(0, 0)] + m[(1, 1)]) * 0.5;
    let cz = (m[(0, 0)] - m[(1, 1)]) * 0.5;
    let cx = (m[(0, 1)] + m[(1, 0)]) * 0.5;
    let cy = (m[(0, 1)] - m[(1, 0)]) * C64::new(0.0, 0.5);
    (c0, cx, cy, cz)
}

/// Closed-form exponential of `A = i*(a0*I + a.sigma)` with real `a0`, `a`:
/// `exp(A) = e^{i a0} (cos|a| I + i sin|a| (a/|a|).sigma)`.
///
/// Refuses (NonDecomposable) when `-iA` is not Hermitian within `tol`,
/// relative to the entry scale.
pub fn mat_exp_su2_with_tol(a: &CMat, tol: f64) -> Result<CMat> {
    if a.dim() != 2 {
        return Err(Error::NonDecomposable {
            defect: f64::INFINITY,
            tol,
        });
    }
    // -iA must be Hermitian.
    let h = a.scale(C64::new(0.0, -1.0));
    let defect = h.hermiticity_defect();
    let scale = a.max_abs().max(1.0);
    if defect > tol * scale {
        return Err(Error::NonDecomposable { defect, tol });
    }
    let (c0, cx, cy, cz) = pauli_decompose(&h);
    let a0 = c0.re;
    let (ax, ay, az) = (cx.re, cy.re, cz.re);
    let r = (ax * ax + ay * ay + az * az).sqrt();
    let phase = C64::new(0.0, a0).exp();
    // sin(r)/r, stable at r -> 0.
    let sinc = if r < 1e-6 {
        1.0 - r * r / 6.0
    } else {
        r.sin() / r
    };
    let cos_r = r.cos();
    let i_sinc = C64::new(0.0, sinc);
    let m = CMat::two_by_two(
        C64::new(cos_r, 0.0) + i_sinc * az,
        i_sinc * C64::new(ax, -ay),
        i_sinc * C64::new(ax, ay),
        C64::new(cos_r, 0.0) - i_sinc * az,
    );
    Ok(m.scale(phase))
}

/// [`mat_exp_su2_with_tol`] at the default decomposition tolerance.
pub fn mat_exp_su2(a: &CMat) -> Result<CMat> {
    mat_exp_su2_with_tol(a, DECOMPOSE_TOL)
}

/// Scaled-and-squared Taylor exponential for dims above 2 (anti-Hermitian
/// generators at modest norm; the stepper keeps `|A| <~ 0.1`).
pub fn mat_exp_taylor(a: &CMat) -> CMat {
    let norm = a.max_abs() * a.dim() as f64;
    let s = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a.scale_re(0.5f64.powi(s as i32));
    let mut term = CMat::identity(a.dim());
    let mut sum = CMat::identity(a.dim());
    for k in 1..=16 {
        term = &term * &scaled;
        term = term.scale_re(1.0 / k as f64);
        sum = &sum + &term;
    }
    let mut out = sum;
    for _ in 0..s {
        out = &out * &out;
    }
    out
}

trait QuadElem: Clone {
    fn zero_like(&self) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn scale(&self, x: f64) -> Self;
}

impl QuadElem for f64 {
    fn zero_like(&self) -> f64 {
        0.0
    }
    fn add(&self, other: &f64) -> f64 {
        self + other
    }
    fn scale(&self, x: f64) -> f64 {
        self * x
    }
}

impl QuadElem for CMat {
    fn zero_like(&self) -> CMat {
        CMat::zeros(self.dim())
    }
    fn add(&self, other: &CMat) -> CMat {
        self + other
    }
    fn scale(&self, x: f64) -> CMat {
        self.scale_re(x)
    }
}

/// Cumulative integral on a uniform grid: composite Simpson at even indices,
/// trapezoid fallback on the odd tail. `out[0]` is zero.
fn cumulative_quadrature_impl<T: QuadElem>(samples: &[T], dt: f64) -> Result<Vec<T>> {
    if samples.len() < 3 {
        return Err(Error::GridTooCoarse { got: samples.len() });
    }
    let n = samples.len();
    let mut out = Vec::with_capacity(n);
    out.push(samples[0].zero_like());
    for k in 1..n {
        if k % 2 == 0 {
            // Simpson pair over [k-2, k].
            let inc = samples[k - 2]
                .add(&samples[k - 1].scale(4.0))
                .add(&samples[k])
                .scale(dt / 3.0);
            out.push(out[k - 2].add(&inc));
        } else {
            // Trapezoid tail over [k-1, k]; superseded once k+1 lands.
            let inc = samples[k - 1].add(&samples[k]).scale(dt / 2.0);
            out.push(out[k - 1].add(&inc));
        }
    }
    Ok(out)
}

/// Cumulative quadrature of a matrix-valued path sampled on a uniform grid
/// with spacing `dt`. Returns the running integral at every grid point;
/// `result[0]` is the zero matrix.
pub fn cumulative_quadrature(samples: &[CMat], dt: f64) -> Result<Vec<CMat>> {
    cumulative_quadrature_impl(samples, dt)
}

/// Scalar counterpart of [`cumulative_quadrature`].
pub fn cumulative_quadrature_real(samples: &[f64], dt: f64) -> Result<Vec<f64>> {
    cumulative_quadrature_impl(samples, dt)
}

/// Max entry of |U†U - I|; zero for exactly unitary input.
pub fn unitarity_defect(u: &CMat) -> f64 {
    u.unitarity_defect()
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and
/// orthonormal eigenvectors as columns. 2x2 uses the closed-form Pauli
/// solver; larger dims use cyclic Jacobi rotations.
pub fn eigh(h: &CMat) -> Result<(Vec<f64>, CMat)> {
    let scale = h.max_abs().max(1.0);
    if h.hermiticity_defect() > HERMITICITY_TOL * scale * 100.0 {
        return Err(Error::invalid_param(
            "matrix",
            format!("not Hermitian: defect {:.3e}", h.hermiticity_defect()),
        ));
    }
    match h.dim() {
        1 => Ok((vec![h[(0, 0)].re], CMat::identity(1))),
        2 => Ok(eigh_2x2(h)),
        _ => eigh_jacobi(h),
    }
}

fn eigh_2x2(h: &CMat) -> (Vec<f64>, CMat) {
    let (c0, cx, cy, cz) = pauli_decompose(h);
    let (c0, cx, cy, cz) = (c0.re, cx.re, cy.re, cz.re);
    let r = (cx * cx + cy * cy + cz * cz).sqrt();
    let vals = vec![c0 - r, c0 + r];
    if r == 0.0 {
        return (vals, CMat::identity(2));
    }
    // Eigenvector for c0 - r, picking the better-conditioned null-space formula.
    let v0 = if cz >= 0.0 {
        [C64::new(cx, -cy), C64::new(-(cz + r), 0.0)]
    } else {
        [C64::new(r - cz, 0.0), C64::new(-cx, -cy)]
    };
    let norm = (v0[0].norm_sqr() + v0[1].norm_sqr()).sqrt();
    let v0 = [v0[0] / norm, v0[1] / norm];
    // Orthogonal complement is the other eigenvector.
    let v1 = [-v0[1].conj(), v0[0].conj()];
    let mut vecs = CMat::zeros(2);
    vecs.set_col(0, &v0);
    vecs.set_col(1, &v1);
    (vals, vecs)
}

fn eigh_jacobi(h: &CMat) -> Result<(Vec<f64>, CMat)> {
    let n = h.dim();
    let mut a = h.clone();
    let mut v = CMat::identity(n);
    let scale = h.max_abs().max(f64::MIN_POSITIVE);
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].norm());
            }
        }
        if off <= 1e-14 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= 1e-300 {
                    continue;
                }
                let phase = apq / mag;
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                let tau = (aqq - app) / (2.0 * mag);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // Plane rotation R: R[p][p]=c, R[p][q]=s*phase, R[q][p]=-s*conj(phase), R[q][q]=c.
                let mut r = CMat::identity(n);
                r[(p, p)] = C64::new(c, 0.0);
                r[(p, q)] = phase * s;
                r[(q, p)] = -phase.conj() * s;
                r[(q, q)] = C64::new(c, 0.0);
                a = &(&r.dagger() * &a) * &r;
                v = &v * &r;
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let vals: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    idx.sort_by(|&i, &j| vals[i].partial_cmp(&vals[j]).expect("finite eigenvalues"));
    let sorted_vals: Vec<f64> = idx.iter().map(|&i| vals[i]).collect();
    let mut sorted_vecs = CMat::zeros(n);
    for (newj, &oldj) in idx.iter().enumerate() {
        sorted_vecs.set_col(newj, &v.col(oldj));
    }
    Ok((sorted_vals, sorted_vecs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    fn random_hermitian(rng: &mut StdRng, dim: usize) -> CMat {
        let mut m = CMat::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(rng.random_range(-2.0..2.0), 0.0);
            for j in (i + 1)..dim {
                let z = C64::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    /// Independent brute-force oracle: 12th-order Taylor with scaling and
    /// squaring, written without reference to the production exponentials.
    fn taylor_exp_oracle(a: &CMat) -> CMat {
        let mut scaled = a.clone();
        let mut squarings = 0u32;
        while scaled.max_abs() > 0.25 {
            scaled = scaled.scale_re(0.5);
            squarings += 1;
        }
        let mut sum = CMat::identity(a.dim());
        let mut term = CMat::identity(a.dim());
        for k in 1..=12 {
            term = &term * &scaled;
            term = term.scale_re(1.0 / k as f64);
            sum = &sum + &term;
        }
        for _ in 0..squarings {
            sum = &sum * &sum;
        }
        sum
    }

    fn sigma_x() -> CMat {
        CMat::two_by_two(
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
        )
    }

    fn sigma_z() -> CMat {
        CMat::two_by_two(
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(-1.0, 0.0),
        )
    }

    #[test]
    fn mat_exp_su2_identity_case() {
        let zero = CMat::zeros(2);
        let e = mat_exp_su2(&zero).unwrap();
        assert_abs_diff_eq!(e.max_abs_diff(&CMat::identity(2)), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn mat_exp_su2_quarter_turn_is_i_sigma_x() {
        // exp(i pi/2 sx) = i sx.
        let a = sigma_x().scale(C64::new(0.0, PI / 2.0));
        let e = mat_exp_su2(&a).unwrap();
        let expected = sigma_x().scale(C64::new(0.0, 1.0));
        assert!(e.max_abs_diff(&expected) <= 1e-14);
    }

    #[test]
    fn mat_exp_su2_matches_taylor_oracle() {
        let theta = 0.7;
        let a = sigma_z().scale(C64::new(0.0, theta / 2.0));
        let e = mat_exp_su2(&a).unwrap();
        let oracle = taylor_exp_oracle(&a);
        assert!(e.max_abs_diff(&oracle) <= 1e-13);
    }

    #[test]
    fn mat_exp_su2_rejects_non_decomposable() {
        // A with -iA non-Hermitian beyond tolerance.
        let a = CMat::two_by_two(
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
        );
        assert!(matches!(
            mat_exp_su2(&a),
            Err(Error::NonDecomposable { .. })
        ));
    }

    #[test]
    fn mat_exp_su2_inverse_identity_randomized() {
        let mut rng = StdRng::seed_from_u64(0x5eed_0001);
        for _ in 0..1000 {
            let a0 = rng.random_range(-3.0..3.0);
            let ax = rng.random_range(-3.0..3.0);
            let ay = rng.random_range(-3.0..3.0);
            let az = rng.random_range(-3.0..3.0);
            let h = CMat::two_by_two(
                C64::new(a0 + az, 0.0),
                C64::new(ax, -ay),
                C64::new(ax, ay),
                C64::new(a0 - az, 0.0),
            );
            let a = h.scale(C64::new(0.0, 1.0));
            let e_plus = mat_exp_su2(&a).unwrap();
            let e_minus = mat_exp_su2(&a.scale_re(-1.0)).unwrap();
            let prod = &e_plus * &e_minus;
            assert!(
                prod.max_abs_diff(&CMat::identity(2)) <= 1e-13,
                "exp(A)exp(-A) != I"
            );
            assert!(e_plus.unitarity_defect() <= 1e-14);
        }
    }

    #[test]
    fn quadrature_constant_integrand() {
        let grid = TimeGrid::new(0.0, 1.0, 100).unwrap();
        let samples: Vec<CMat> = (0..grid.len()).map(|_| CMat::identity(2)).collect();
        let cum = cumulative_quadrature(&samples, grid.dt()).unwrap();
        assert_abs_diff_eq!(cum[0].max_abs(), 0.0, epsilon = 1e-15);
        assert!(cum[100].max_abs_diff(&CMat::identity(2)) <= 1e-12);
    }

    #[test]
    fn quadrature_polynomial_exactness() {
        // f(t) = 2t * I integrates to t^2 * I; Simpson is exact on quadratics.
        let grid = TimeGrid::new(0.0, 1.0, 100).unwrap();
        let samples: Vec<CMat> = grid
            .points()
            .iter()
            .map(|&t| CMat::identity(2).scale_re(2.0 * t))
            .collect();
        let cum = cumulative_quadrature(&samples, grid.dt()).unwrap();
        for (k, &t) in grid.points().iter().enumerate() {
            let expected = CMat::identity(2).scale_re(t * t);
            assert!(
                cum[k].max_abs_diff(&expected) <= 1e-10,
                "t = {t}: err {}",
                cum[k].max_abs_diff(&expected)
            );
        }
    }

    #[test]
    fn quadrature_oscillatory_vs_analytic() {
        // f(t) = e^{it} I over [0, 2pi]; integral (e^{it} - 1)/i.
        let grid = TimeGrid::new(0.0, 2.0 * PI, 2000).unwrap();
        let samples: Vec<CMat> = grid
            .points()
            .iter()
            .map(|&t| CMat::identity(2).scale(C64::new(0.0, t).exp()))
            .collect();
        let cum = cumulative_quadrature(&samples, grid.dt()).unwrap();
        let t = grid.t1;
        let analytic = (C64::new(0.0, t).exp() - 1.0) / C64::new(0.0, 1.0);
        let expected = CMat::identity(2).scale(analytic);
        assert!(cum[grid.steps].max_abs_diff(&expected) <= 1e-9);
    }

    #[test]
    fn quadrature_self_convergence_is_fourth_order() {
        // Halving the step must reduce the endpoint error by at least 8x.
        // The span is deliberately not a whole period, where the error would
        // cancel superconvergently.
        let err_at = |steps: usize| -> f64 {
            let grid = TimeGrid::new(0.0, 4.0, steps).unwrap();
            let samples: Vec<CMat> = grid
                .points()
                .iter()
                .map(|&t| CMat::identity(1).scale(C64::new(0.0, t).exp()))
                .collect();
            let cum = cumulative_quadrature(&samples, grid.dt()).unwrap();
            let analytic = (C64::new(0.0, grid.t1).exp() - 1.0) / C64::new(0.0, 1.0);
            (cum[steps][(0, 0)] - analytic).norm()
        };
        let coarse = err_at(200);
        let fine = err_at(400);
        assert!(
            coarse / fine >= 8.0,
            "convergence ratio {} below 8",
            coarse / fine
        );
    }

    #[test]
    fn quadrature_linearity() {
        let grid = TimeGrid::new(0.0, 3.0, 64).unwrap();
        let f: Vec<CMat> = grid
            .points()
            .iter()
            .map(|&t| sigma_x().scale(C64::new(t.cos(), t.sin())))
            .collect();
        let g: Vec<CMat> = grid
            .points()
            .iter()
            .map(|&t| sigma_z().scale(C64::new(t * t, -t)))
            .collect();
        let (alpha, beta) = (C64::new(0.7, -0.3), C64::new(-1.1, 0.2));
        let combo: Vec<CMat> = f
            .iter()
            .zip(&g)
            .map(|(a, b)| &a.scale(alpha) + &b.scale(beta))
            .collect();
        let qf = cumulative_quadrature(&f, grid.dt()).unwrap();
        let qg = cumulative_quadrature(&g, grid.dt()).unwrap();
        let qc = cumulative_quadrature(&combo, grid.dt()).unwrap();
        for k in 0..grid.len() {
            let lhs = &qf[k].scale(alpha) + &qg[k].scale(beta);
            assert!(qc[k].max_abs_diff(&lhs) <= 1e-12);
        }
    }

    #[test]
    fn quadrature_rejects_short_input() {
        let samples = vec![CMat::identity(2), CMat::identity(2)];
        assert!(matches!(
            cumulative_quadrature(&samples, 0.1),
            Err(Error::GridTooCoarse { got: 2 })
        ));
    }

    #[test]
    fn unitarity_defect_examples() {
        assert_eq!(unitarity_defect(&CMat::identity(2)), 0.0);
        let two_i = CMat::identity(2).scale_re(2.0);
        assert_abs_diff_eq!(unitarity_defect(&two_i), 3.0, epsilon = 1e-14);
    }

    #[test]
    fn eigh_diagonal_is_trivial() {
        let h = CMat::two_by_two(
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(2.0, 0.0),
        );
        let (vals, vecs) = eigh(&h).unwrap();
        assert_abs_diff_eq!(vals[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(vals[1], 2.0, epsilon = 1e-14);
        assert!(vecs.max_abs_diff(&CMat::identity(2)) <= 1e-14);
    }

    #[test]
    fn eigh_randomized_residuals() {
        let mut rng = StdRng::seed_from_u64(0x5eed_0002);
        for _ in 0..200 {
            let dim = rng.random_range(2..=4usize);
            let h = random_hermitian(&mut rng, dim);
            let (vals, vecs) = eigh(&h).unwrap();
            // Ascending.
            for w in vals.windows(2) {
                assert!(w[0] <= w[1] + 1e-12);
            }
            // Residual H v = E v and orthonormality.
            for n in 0..dim {
                let v = vecs.col(n);
                let hv = h.apply(&v);
                for i in 0..dim {
                    assert!(
                        (hv[i] - v[i] * vals[n]).norm() <= 1e-10 * h.max_abs().max(1.0),
                        "eigen residual too large"
                    );
                }
                for m in 0..dim {
                    let overlap = vec_inner(&vecs.col(m), &v);
                    let expected = if m == n { 1.0 } else { 0.0 };
                    assert!((overlap - expected).norm() <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn spectral_norm_of_pauli_combination() {
        // |a.sigma|_2 = |a|.
        let m = &sigma_x().scale_re(3.0) + &sigma_z().scale_re(4.0);
        assert_abs_diff_eq!(m.spectral_norm(), 5.0, epsilon = 1e-10);
    }

    #[test]
    fn grid_points_are_uniform_and_increasing() {
        let grid = TimeGrid::new(-1.0, 2.0, 7).unwrap();
        let pts = grid.points();
        assert_eq!(pts.len(), 8);
        let dt = grid.dt();
        for w in pts.windows(2) {
            assert!(w[1] > w[0]);
            assert_abs_diff_eq!(w[1] - w[0], dt, epsilon = 1e-15);
        }
        assert!(TimeGrid::new(1.0, 1.0, 4).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 0).is_err());
    }

    #[test]
    fn grid_index_of_matches_points() {
        let grid = TimeGrid::new(0.0, 10.0, 1000).unwrap();
        assert_eq!(grid.index_of(grid.point(317)).unwrap(), 317);
        assert!(grid.index_of(0.0050001).is_err());
    }
}
