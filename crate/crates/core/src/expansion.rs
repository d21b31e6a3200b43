//! The two dual series engines.
//!
//! * [`dyson_expand`]: the weak-coupling time-ordered series for
//!   `i hbar dU/dt = lambda H(t) U`, orders `D_j(t) = -(i/hbar) lambda
//!   int_0^t H(s) D_{j-1}(s) ds`, `D_0 = I`.
//! * [`dual_dyson_expand`]: the adiabatic series `U = U0 * Texp(-(i/hbar)
//!   int H')`, built from the leading-order propagator [`adiabatic_u0`] and
//!   the correction Hamiltonian [`correction_hamiltonian`], with orders
//!   `W_j(t) = -(i/hbar) int_0^t H'(s) W_{j-1}(s) ds` and `U_j = U0 W_j`.
//!
//! Time ordering puts the latest time on the left, so the running integrand
//! multiplies `H` (or `H'`) from the left. Series terms come from recursive
//! cumulative quadrature, O(K * steps) instead of nested multi-dimensional
//! integrals with identical content.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::models::HamiltonianModel;
use crate::numerics::{cumulative_quadrature, vec_outer, CMat, TimeGrid};
use crate::spectral::{dynamical_phases, frame_path, geometric_phases, FramePath};

/// Practical order cap; beyond this quadrature noise dominates at double
/// precision on the catalog models.
pub const MAX_SERIES_ORDER: usize = 4;

/// Relative change threshold for the grid-refinement self check.
pub const SELF_CHECK_REL_TOL: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesKind {
    Dyson,
    DualDyson,
}

/// Per-order propagator corrections sampled on a time grid.
#[derive(Debug, Clone)]
pub struct SeriesPropagator {
    pub kind: SeriesKind,
    /// Expansion parameter: the formal scaling for the weak-coupling series,
    /// the model's strong-coupling parameter (when defined) for the dual one.
    pub lambda: f64,
    pub grid: TimeGrid,
    orders: Vec<Vec<CMat>>,
}

impl SeriesPropagator {
    pub fn max_order(&self) -> usize {
        self.orders.len() - 1
    }

    pub fn order_path(&self, j: usize) -> Result<&[CMat]> {
        self.orders.get(j).map(|v| v.as_slice()).ok_or(Error::OrderOutOfRange {
            requested: j,
            max: self.max_order(),
        })
    }

    /// Partial sum of orders `0..=k` at grid index `idx`.
    pub fn partial_sum_at(&self, k: usize, idx: usize) -> Result<CMat> {
        if k > self.max_order() {
            return Err(Error::OrderOutOfRange {
                requested: k,
                max: self.max_order(),
            });
        }
        let mut sum = self.orders[0][idx].clone();
        for j in 1..=k {
            sum = &sum + &self.orders[j][idx];
        }
        Ok(sum)
    }

    /// Partial sum of orders `0..=k` at a grid time `t`.
    pub fn partial_sum(&self, k: usize, t: f64) -> Result<CMat> {
        let idx = self.grid.index_of(t)?;
        self.partial_sum_at(k, idx)
    }

    /// Sup over the grid of the sup-entry norm of order `j`.
    pub fn sup_abs_of_order(&self, j: usize) -> Result<f64> {
        Ok(self
            .order_path(j)?
            .iter()
            .map(|m| m.max_abs())
            .fold(0.0, f64::max))
    }

    /// Sup over the grid of the Frobenius norm of order `j` (unitary
    /// invariant, so dual-series orders inherit the norm of the ordered
    /// integrals exactly).
    pub fn sup_frobenius_of_order(&self, j: usize) -> Result<f64> {
        Ok(self
            .order_path(j)?
            .iter()
            .map(|m| m.frobenius_norm())
            .fold(0.0, f64::max))
    }
}

/// Free-function form of [`SeriesPropagator::partial_sum`].
pub fn partial_sum(series: &SeriesPropagator, k: usize, t: f64) -> Result<CMat> {
    series.partial_sum(k, t)
}

/// Phase and frame data shared by the adiabatic assembly.
struct AdiabaticIngredients {
    path: FramePath,
    /// `gamma_n(t_k) - (1/hbar) int E_n`, per level.
    phases: Vec<Vec<f64>>,
}

fn adiabatic_ingredients(model: &HamiltonianModel, grid: &TimeGrid) -> Result<AdiabaticIngredients> {
    let path = frame_path(model, grid)?;
    let gammas = geometric_phases(&path);
    let dim = path.dim();
    let mut phases = Vec::with_capacity(dim);
    for n in 0..dim {
        let dyn_phase = dynamical_phases(&path, n);
        phases.push(
            gammas[n]
                .iter()
                .zip(&dyn_phase)
                .map(|(g, d)| g - d)
                .collect(),
        );
    }
    Ok(AdiabaticIngredients { path, phases })
}

fn assemble_u0(ing: &AdiabaticIngredients) -> Vec<CMat> {
    let dim = ing.path.dim();
    let frames = &ing.path.frames;
    let mut u0 = Vec::with_capacity(frames.len());
    u0.push(CMat::identity(dim));
    for k in 1..frames.len() {
        let mut u = CMat::zeros(dim);
        for n in 0..dim {
            let phase = C64::new(0.0, ing.phases[n][k]).exp();
            let dyad = vec_outer(&frames[k].vectors.col(n), &frames[0].vectors.col(n));
            u = &u + &dyad.scale(phase);
        }
        u0.push(u);
    }
    u0
}

/// Frozen-basis coefficient matrices of the correction Hamiltonian:
/// `C[m][n] = -e^{i(gamma_n - gamma_m)} e^{-(i/hbar) int (E_n - E_m)}
/// <m;t| i hbar d/dt |n;t>` for `m != n`; the diagonal never enters the sum
/// and is exactly zero.
fn hprime_frozen(ing: &AdiabaticIngredients) -> Vec<CMat> {
    let path = &ing.path;
    let frames = &path.frames;
    let dim = path.dim();
    let nf = frames.len();
    let dt = path.grid.dt();
    let hbar = path.hbar;

    // d/dt of each eigenvector column: central differences inside, one-sided
    // O(dt^2) stencils at the ends.
    let col_derivative = |k: usize, n: usize| -> Vec<C64> {
        let scale = 1.0 / (2.0 * dt);
        if k == 0 {
            let v0 = frames[0].vectors.col(n);
            let v1 = frames[1].vectors.col(n);
            let v2 = frames[2].vectors.col(n);
            (0..dim)
                .map(|i| (-3.0 * v0[i] + 4.0 * v1[i] - v2[i]) * scale)
                .collect()
        } else if k == nf - 1 {
            let v0 = frames[nf - 1].vectors.col(n);
            let v1 = frames[nf - 2].vectors.col(n);
            let v2 = frames[nf - 3].vectors.col(n);
            (0..dim)
                .map(|i| (3.0 * v0[i] - 4.0 * v1[i] + v2[i]) * scale)
                .collect()
        } else {
            let vp = frames[k + 1].vectors.col(n);
            let vm = frames[k - 1].vectors.col(n);
            (0..dim).map(|i| (vp[i] - vm[i]) * scale).collect()
        }
    };

    let mut out = Vec::with_capacity(nf);
    for k in 0..nf {
        let mut c = CMat::zeros(dim);
        for n in 0..dim {
            let dv = col_derivative(k, n);
            for m in 0..dim {
                if m == n {
                    continue;
                }
                let coupling = crate::numerics::vec_inner(&frames[k].vectors.col(m), &dv)
                    * C64::new(0.0, hbar);
                let rel_phase = ing.phases[n][k] - ing.phases[m][k];
                c[(m, n)] = -C64::new(0.0, rel_phase).exp() * coupling;
            }
        }
        out.push(c);
    }
    out
}

fn frozen_to_operator(ing: &AdiabaticIngredients, frozen: &[CMat]) -> Vec<CMat> {
    let v0 = &ing.path.frames[0].vectors;
    let v0d = v0.dagger();
    frozen.iter().map(|c| &(v0 * c) * &v0d).collect()
}

/// Leading-order adiabatic propagator `U0(t_k)` on every grid point:
/// `sum_n e^{i gamma_n(t)} e^{-(i/hbar) int E_n} |n;t><n;0|`. `U0(t0) = I`
/// exactly.
pub fn adiabatic_u0(model: &HamiltonianModel, grid: &TimeGrid) -> Result<Vec<CMat>> {
    let ing = adiabatic_ingredients(model, grid)?;
    Ok(assemble_u0(&ing))
}

/// Correction Hamiltonian `H'(t_k)` as an operator matrix (computational
/// basis). Its frozen-eigenbasis diagonal vanishes identically; see
/// [`correction_hamiltonian_frozen`] for the raw coefficient matrices.
pub fn correction_hamiltonian(model: &HamiltonianModel, grid: &TimeGrid) -> Result<Vec<CMat>> {
    let ing = adiabatic_ingredients(model, grid)?;
    let frozen = hprime_frozen(&ing);
    Ok(frozen_to_operator(&ing, &frozen))
}

/// Frozen-basis coefficient matrices of `H'`; the diagonal is exactly zero
/// by construction.
pub fn correction_hamiltonian_frozen(
    model: &HamiltonianModel,
    grid: &TimeGrid,
) -> Result<Vec<CMat>> {
    let ing = adiabatic_ingredients(model, grid)?;
    Ok(hprime_frozen(&ing))
}

fn check_order(max_order: usize) -> Result<()> {
    if max_order > MAX_SERIES_ORDER {
        return Err(Error::invalid_param(
            "max_order",
            format!("must be <= {MAX_SERIES_ORDER}, got {max_order}"),
        ));
    }
    Ok(())
}

/// Adiabatic (dual) series to `max_order`: orders `U_0 .. U_K` on the grid,
/// with `U_j = U0 * W_j` and `W_j` the j-fold ordered integral of
/// `-(i/hbar) H'`. Order 0 is exactly the [`adiabatic_u0`] path.
pub fn dual_dyson_expand(
    model: &HamiltonianModel,
    grid: &TimeGrid,
    max_order: usize,
) -> Result<SeriesPropagator> {
    check_order(max_order)?;
    let ing = adiabatic_ingredients(model, grid)?;
    let u0 = assemble_u0(&ing);
    let hprime = frozen_to_operator(&ing, &hprime_frozen(&ing));
    let dt = grid.dt();
    let hbar = model.hbar;
    let minus_i_over_hbar = C64::new(0.0, -1.0 / hbar);

    let dim = model.dim();
    let mut orders = Vec::with_capacity(max_order + 1);
    orders.push(u0.clone());
    let mut w_prev: Vec<CMat> = vec![CMat::identity(dim); grid.len()];
    for _j in 1..=max_order {
        let integrand: Vec<CMat> = hprime
            .iter()
            .zip(&w_prev)
            .map(|(h, w)| (h * w).scale(minus_i_over_hbar))
            .collect();
        let w_j = cumulative_quadrature(&integrand, dt)?;
        orders.push(u0.iter().zip(&w_j).map(|(u, w)| u * w).collect());
        w_prev = w_j;
    }
    Ok(SeriesPropagator {
        kind: SeriesKind::DualDyson,
        lambda: model.expansion_parameter().unwrap_or(f64::NAN),
        grid: *grid,
        orders,
    })
}

/// Weak-coupling time-ordered series for `i hbar dU/dt = lambda H(t) U`:
/// orders `I, -(i/hbar) lambda int H, ...` on the grid.
pub fn dyson_expand(
    model: &HamiltonianModel,
    grid: &TimeGrid,
    max_order: usize,
    lambda: f64,
) -> Result<SeriesPropagator> {
    check_order(max_order)?;
    if !lambda.is_finite() {
        return Err(Error::invalid_param("lambda", "must be finite"));
    }
    let dt = grid.dt();
    let hbar = model.hbar;
    let scale = C64::new(0.0, -lambda / hbar);
    let h_samples: Vec<CMat> = grid.points().iter().map(|&t| model.eval(t)).collect();

    let dim = model.dim();
    let mut orders = Vec::with_capacity(max_order + 1);
    orders.push(vec![CMat::identity(dim); grid.len()]);
    let mut d_prev: Vec<CMat> = orders[0].clone();
    for _j in 1..=max_order {
        let integrand: Vec<CMat> = h_samples
            .iter()
            .zip(&d_prev)
            .map(|(h, d)| (h * d).scale(scale))
            .collect();
        let d_j = cumulative_quadrature(&integrand, dt)?;
        orders.push(d_j.clone());
        d_prev = d_j;
    }
    Ok(SeriesPropagator {
        kind: SeriesKind::Dyson,
        lambda,
        grid: *grid,
        orders,
    })
}

/// Relative sup-norm change of the top order between a grid and its
/// refinement, evaluated at the shared (coarse) points.
fn refinement_change(coarse: &SeriesPropagator, fine: &SeriesPropagator) -> Result<f64> {
    let k = coarse.max_order();
    let a = coarse.order_path(k)?;
    let b = fine.order_path(k)?;
    let scale = coarse.sup_frobenius_of_order(k)?.max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for (idx, m) in a.iter().enumerate() {
        let diff = (m - &b[2 * idx]).frobenius_norm();
        worst = worst.max(diff / scale);
    }
    Ok(worst)
}

/// [`dual_dyson_expand`] plus a grid-refinement self check: errors with
/// `QuadratureUnderResolved` when doubling the step count changes the
/// top-order term by more than 1%.
pub fn dual_dyson_expand_checked(
    model: &HamiltonianModel,
    grid: &TimeGrid,
    max_order: usize,
) -> Result<SeriesPropagator> {
    let coarse = dual_dyson_expand(model, grid, max_order)?;
    let fine = dual_dyson_expand(model, &grid.refined(), max_order)?;
    let rel_change = refinement_change(&coarse, &fine)?;
    if rel_change > SELF_CHECK_REL_TOL {
        return Err(Error::QuadratureUnderResolved {
            order: max_order,
            rel_change,
        });
    }
    Ok(coarse)
}

/// [`dyson_expand`] plus the same grid-refinement self check.
pub fn dyson_expand_checked(
    model: &HamiltonianModel,
    grid: &TimeGrid,
    max_order: usize,
    lambda: f64,
) -> Result<SeriesPropagator> {
    let coarse = dyson_expand(model, grid, max_order, lambda)?;
    let fine = dyson_expand(model, &grid.refined(), max_order, lambda)?;
    let rel_change = refinement_change(&coarse, &fine)?;
    if rel_change > SELF_CHECK_REL_TOL {
        return Err(Error::QuadratureUnderResolved {
            order: max_order,
            rel_change,
        });
    }
    Ok(coarse)
}
