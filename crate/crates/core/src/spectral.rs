//! Instantaneous eigen-decomposition with smooth gauge continuation,
//! geometric-phase rates and dynamical phases.
//!
//! Eigensolvers return arbitrary per-level phases; [`gauge_continue`] repairs
//! them into a differentiable path by discrete parallel transport (successive
//! overlaps made real and positive), after matching level branches between
//! neighbouring frames by maximal overlap so that smooth crossings keep their
//! identity. Geometric-phase rates are central differences on whatever path
//! they are given; on a parallel-transported path they vanish by construction,
//! while analytic-gauge paths reproduce the textbook constants. The assembled
//! propagators downstream are gauge invariant either way.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::models::HamiltonianModel;
use crate::numerics::{
    cumulative_quadrature_real, eigh, vec_inner, CMat, TimeGrid, GAP_TOL_REL,
};

/// Eigen-data of one Hamiltonian sample.
#[derive(Debug, Clone)]
pub struct SpectralFrame {
    pub t: f64,
    /// Instantaneous eigenvalues; ascending as constructed, branch-ordered
    /// after continuation through a crossing.
    pub energies: Vec<f64>,
    /// Orthonormal eigenvectors as columns, aligned with `energies`.
    pub vectors: CMat,
    /// Geometric-phase rates per level; `None` until computed on a path.
    pub gamma_rates: Option<Vec<f64>>,
}

impl SpectralFrame {
    pub fn new(t: f64, energies: Vec<f64>, vectors: CMat) -> Self {
        assert_eq!(energies.len(), vectors.dim());
        SpectralFrame {
            t,
            energies,
            vectors,
            gamma_rates: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.vectors.dim()
    }
}

/// Gauge-continuous sequence of frames on a uniform grid.
#[derive(Debug, Clone)]
pub struct FramePath {
    pub grid: TimeGrid,
    pub frames: Vec<SpectralFrame>,
    pub hbar: f64,
}

impl FramePath {
    /// Wrap frames that are already gauge-smooth (e.g. sampled from analytic
    /// formulas). No continuation is applied.
    pub fn from_frames(grid: TimeGrid, frames: Vec<SpectralFrame>, hbar: f64) -> Self {
        assert_eq!(frames.len(), grid.len());
        FramePath { grid, frames, hbar }
    }

    pub fn dim(&self) -> usize {
        self.frames[0].dim()
    }

    pub fn energies_of_level(&self, n: usize) -> Vec<f64> {
        self.frames.iter().map(|f| f.energies[n]).collect()
    }

    /// Compute geometric-phase rates and store them on every frame.
    pub fn with_gamma_rates(mut self) -> Self {
        let rates = geometric_phase_rates(&self);
        for (frame, r) in self.frames.iter_mut().zip(rates) {
            frame.gamma_rates = Some(r);
        }
        self
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SpectralOptions {
    /// Degeneracy refusal threshold relative to the matrix sup-entry norm.
    pub gap_tol_rel: f64,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        SpectralOptions {
            gap_tol_rel: GAP_TOL_REL,
        }
    }
}

/// Solve `H(t) |n;t> = E_n(t) |n;t>` at one time point. Eigenvalues ascend;
/// eigenvector phases are whatever the solver produced; `gamma_rates` unset.
///
/// Refuses with `DegenerateSpectrum` when the smallest gap falls below
/// `gap_tol_rel * |H|_max`; the adiabatic machinery requires a gap.
pub fn instantaneous_eigensystem(model: &HamiltonianModel, t: f64) -> Result<SpectralFrame> {
    instantaneous_eigensystem_with(model, t, &SpectralOptions::default())
}

pub fn instantaneous_eigensystem_with(
    model: &HamiltonianModel,
    t: f64,
    opts: &SpectralOptions,
) -> Result<SpectralFrame> {
    let h = model.eval(t);
    let (vals, vecs) = eigh(&h)?;
    let tol = opts.gap_tol_rel * h.max_abs();
    if vals.len() > 1 {
        let min_gap = vals
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min);
        if min_gap < tol || min_gap == 0.0 {
            return Err(Error::DegenerateSpectrum {
                t,
                gap: min_gap,
                tol,
            });
        }
    }
    Ok(SpectralFrame::new(t, vals, vecs))
}

/// Greedy maximal-overlap assignment of new columns to previous levels.
/// Returns `perm` with `perm[level] = column index in the new frame`.
fn match_branches(prev: &CMat, next: &CMat) -> (Vec<usize>, f64) {
    let n = prev.dim();
    let mut overlap = vec![vec![0.0f64; n]; n];
    for m in 0..n {
        let pm = prev.col(m);
        for j in 0..n {
            overlap[m][j] = vec_inner(&pm, &next.col(j)).norm();
        }
    }
    let mut perm = vec![usize::MAX; n];
    let mut used_level = vec![false; n];
    let mut used_col = vec![false; n];
    let mut worst = f64::INFINITY;
    for _ in 0..n {
        let (mut best, mut bm, mut bj) = (-1.0, 0, 0);
        for m in 0..n {
            if used_level[m] {
                continue;
            }
            for j in 0..n {
                if used_col[j] {
                    continue;
                }
                if overlap[m][j] > best {
                    best = overlap[m][j];
                    bm = m;
                    bj = j;
                }
            }
        }
        perm[bm] = bj;
        used_level[bm] = true;
        used_col[bj] = true;
        worst = worst.min(best);
    }
    (perm, worst)
}

/// Anchor a frame's phases: make the largest-magnitude component of each
/// column real and positive.
fn anchor_frame(frame: &mut SpectralFrame) {
    let n = frame.dim();
    for j in 0..n {
        let col = frame.vectors.col(j);
        let mut best = 0usize;
        for i in 1..n {
            if col[i].norm() > col[best].norm() {
                best = i;
            }
        }
        let c = col[best];
        if c.norm() > 0.0 {
            let phase = c.conj() / c.norm();
            let fixed: Vec<C64> = col.iter().map(|z| z * phase).collect();
            frame.vectors.set_col(j, &fixed);
        }
    }
}

/// Continue raw frames into a smooth path: branch-match each frame against
/// the previous one, then fix phases by discrete parallel transport so that
/// `<n;t_k | n;t_{k+1}>` is real and positive. The first frame is anchored by
/// making the largest-magnitude component of each vector real positive.
///
/// Errors with `BranchSwapDetected` when the best assignment leaves a
/// consecutive overlap magnitude below 0.5, or when it has to relabel levels
/// (a crossing) on evidence weaker than overlap 0.9 — either way the grid is
/// too coarse for the dynamics.
pub fn gauge_continue(raw: Vec<SpectralFrame>, grid: &TimeGrid) -> Result<FramePath> {
    assert!(raw.len() >= 2, "gauge continuation needs at least 2 frames");
    assert_eq!(raw.len(), grid.len(), "frames must cover the grid");
    let mut frames = raw;
    anchor_frame(&mut frames[0]);
    for k in 1..frames.len() {
        let (perm, worst) = match_branches(&frames[k - 1].vectors, &frames[k].vectors);
        let is_relabel = perm.iter().enumerate().any(|(level, &j)| level != j);
        let threshold = if is_relabel { 0.9 } else { 0.5 };
        if worst < threshold {
            return Err(Error::BranchSwapDetected {
                t_prev: frames[k - 1].t,
                t: frames[k].t,
                overlap: worst,
            });
        }
        // Apply the branch permutation to energies and columns.
        let src = frames[k].clone();
        let n = src.dim();
        let mut energies = vec![0.0; n];
        let mut vectors = CMat::zeros(n);
        for level in 0..n {
            energies[level] = src.energies[perm[level]];
            vectors.set_col(level, &src.vectors.col(perm[level]));
        }
        // Parallel transport: rotate each column so the overlap with the
        // previous frame is real positive.
        for level in 0..n {
            let z = vec_inner(&frames[k - 1].vectors.col(level), &vectors.col(level));
            let phase = z.conj() / z.norm();
            let fixed: Vec<C64> = vectors.col(level).iter().map(|c| c * phase).collect();
            vectors.set_col(level, &fixed);
        }
        frames[k] = SpectralFrame {
            t: src.t,
            energies,
            vectors,
            gamma_rates: None,
        };
    }
    Ok(FramePath {
        grid: *grid,
        frames,
        hbar: 1.0,
    })
}

/// Geometric-phase rates `gamma_dot_n(t_k) = Re <n;t_k| i d/dt |n;t_k>` by
/// central differences on the path's vectors; one-sided O(dt^2) stencils at
/// the endpoints. Returned as `[frame][level]`.
pub fn geometric_phase_rates(path: &FramePath) -> Vec<Vec<f64>> {
    let nf = path.frames.len();
    assert!(nf >= 3, "central differences need at least 3 frames");
    let dim = path.dim();
    let dt = path.grid.dt();
    let mut rates = vec![vec![0.0; dim]; nf];
    let overlap = |a: usize, b: usize, n: usize| -> C64 {
        vec_inner(&path.frames[a].vectors.col(n), &path.frames[b].vectors.col(n))
    };
    for n in 0..dim {
        // gamma_dot = Re[ i <v_k | dv/dt> ] = -Im <v_k | dv/dt>.
        rates[0][n] = -(4.0 * overlap(0, 1, n).im - overlap(0, 2, n).im) / (2.0 * dt);
        for k in 1..nf - 1 {
            rates[k][n] = -(overlap(k, k + 1, n).im - overlap(k, k - 1, n).im) / (2.0 * dt);
        }
        rates[nf - 1][n] = -(-4.0 * overlap(nf - 1, nf - 2, n).im
            + overlap(nf - 1, nf - 3, n).im)
            / (2.0 * dt);
    }
    rates
}

/// Accumulated geometric phases per level: `gamma_n(t_k) = int_0^{t_k} gamma_dot_n`.
pub fn geometric_phases(path: &FramePath) -> Vec<Vec<f64>> {
    let rates = geometric_phase_rates(path);
    let dim = path.dim();
    let dt = path.grid.dt();
    let mut phases = vec![Vec::new(); dim];
    for (n, out) in phases.iter_mut().enumerate() {
        let series: Vec<f64> = rates.iter().map(|r| r[n]).collect();
        *out = cumulative_quadrature_real(&series, dt).expect("path has >= 3 frames");
    }
    phases
}

/// Dynamical-phase path `(1/hbar) int_0^{t_k} E_n(t') dt'` for one level.
pub fn dynamical_phases(path: &FramePath, n: usize) -> Vec<f64> {
    let energies = path.energies_of_level(n);
    let cum = cumulative_quadrature_real(&energies, path.grid.dt()).expect("path has >= 3 frames");
    cum.into_iter().map(|x| x / path.hbar).collect()
}

/// Dynamical phase `(1/hbar) int_0^t E_n(t') dt'` at a grid point `t`.
pub fn dynamical_phase(path: &FramePath, n: usize, t: f64) -> Result<f64> {
    let k = path.grid.index_of(t)?;
    Ok(dynamical_phases(path, n)[k])
}

/// Eigen-decompose the model over the whole grid and continue the gauge.
/// Geometric-phase rates are attached; `hbar` is taken from the model.
pub fn frame_path(model: &HamiltonianModel, grid: &TimeGrid) -> Result<FramePath> {
    frame_path_with(model, grid, &SpectralOptions::default())
}

pub fn frame_path_with(
    model: &HamiltonianModel,
    grid: &TimeGrid,
    opts: &SpectralOptions,
) -> Result<FramePath> {
    let mut raw = Vec::with_capacity(grid.len());
    for t in grid.points() {
        raw.push(instantaneous_eigensystem_with(model, t, opts)?);
    }
    let mut path = gauge_continue(raw, grid)?;
    path.hbar = model.hbar;
    Ok(path.with_gamma_rates())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{
        make_driven_tls, make_generic_sampled, make_jaynes_cummings, make_schwinger_spin, Picture,
    };
    use approx::assert_abs_diff_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};
    use std::f64::consts::PI;

    /// Textbook-gauge Schwinger eigenvectors.
    fn schwinger_analytic_frame(omega0: f64, omega: f64, theta: f64, t: f64) -> SpectralFrame {
        let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
        let em = C64::new(0.0, -omega * t / 2.0).exp();
        let ep = C64::new(0.0, omega * t / 2.0).exp();
        let mut vectors = CMat::zeros(2);
        vectors.set_col(0, &[em * c, ep * s]);
        vectors.set_col(1, &[em * s, -(ep * c)]);
        SpectralFrame::new(t, vec![-omega0 / 2.0, omega0 / 2.0], vectors)
    }

    fn schwinger_analytic_path(
        omega0: f64,
        omega: f64,
        theta: f64,
        grid: &TimeGrid,
    ) -> FramePath {
        let frames = grid
            .points()
            .iter()
            .map(|&t| schwinger_analytic_frame(omega0, omega, theta, t))
            .collect();
        FramePath::from_frames(*grid, frames, 1.0)
    }

    #[test]
    fn schwinger_eigensystem_matches_analytic_projectors() {
        let (omega0, omega, theta) = (1.0, 0.2, 1.0);
        let model = make_schwinger_spin(omega0, omega, theta).unwrap();
        for &t in &[0.0, 0.7, 2.9] {
            let frame = instantaneous_eigensystem(&model, t).unwrap();
            assert_abs_diff_eq!(frame.energies[0], -0.5, epsilon = 1e-12);
            assert_abs_diff_eq!(frame.energies[1], 0.5, epsilon = 1e-12);
            let reference = schwinger_analytic_frame(omega0, omega, theta, t);
            for n in 0..2 {
                // Projectors are phase-free.
                let p_num = crate::numerics::vec_outer(&frame.vectors.col(n), &frame.vectors.col(n));
                let p_ref = crate::numerics::vec_outer(
                    &reference.vectors.col(n),
                    &reference.vectors.col(n),
                );
                assert!(p_num.max_abs_diff(&p_ref) <= 1e-12);
            }
        }
    }

    #[test]
    fn jc_eigensystem_yields_dressed_states() {
        let model = make_jaynes_cummings(1.0, 0.4, 2).unwrap();
        let gs = 1.0 * 3.0f64.sqrt();
        for &t in &[0.0, 1.3] {
            let frame = instantaneous_eigensystem(&model, t).unwrap();
            assert_abs_diff_eq!(frame.energies[0], -gs, epsilon = 1e-12);
            assert_abs_diff_eq!(frame.energies[1], gs, epsilon = 1e-12);
            // Dressed state |a> = (e^{-i Delta t}, 1)/sqrt(2) for the upper level.
            let up = [
                C64::new(0.0, -0.4 * t).exp() / 2.0f64.sqrt(),
                C64::new(1.0 / 2.0f64.sqrt(), 0.0),
            ];
            let p_num =
                crate::numerics::vec_outer(&frame.vectors.col(1), &frame.vectors.col(1));
            let p_ref = crate::numerics::vec_outer(&up, &up);
            assert!(p_num.max_abs_diff(&p_ref) <= 1e-12);
        }
    }

    #[test]
    fn diagonal_hamiltonian_eigensystem_is_identity() {
        let grid = TimeGrid::new(0.0, 1.0, 2).unwrap();
        let h = CMat::two_by_two(
            C64::new(1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(2.0, 0.0),
        );
        let model = make_generic_sampled(grid, vec![h.clone(), h.clone(), h]).unwrap();
        let frame = instantaneous_eigensystem(&model, 0.5).unwrap();
        assert_eq!(frame.energies, vec![1.0, 2.0]);
        assert!(frame.vectors.max_abs_diff(&CMat::identity(2)) <= 1e-14);
    }

    #[test]
    fn degenerate_spectrum_is_refused() {
        let grid = TimeGrid::new(0.0, 1.0, 2).unwrap();
        let h = CMat::identity(2);
        let model = make_generic_sampled(grid, vec![h.clone(), h.clone(), h]).unwrap();
        assert!(matches!(
            instantaneous_eigensystem(&model, 0.0),
            Err(Error::DegenerateSpectrum { .. })
        ));
    }

    #[test]
    fn constant_hamiltonian_continues_to_identical_frames() {
        let grid = TimeGrid::new(0.0, 1.0, 16).unwrap();
        let h = CMat::two_by_two(
            C64::new(0.3, 0.0),
            C64::new(0.2, 0.1),
            C64::new(0.2, -0.1),
            C64::new(-0.3, 0.0),
        );
        let samples = vec![h; grid.len()];
        let model = make_generic_sampled(grid, samples).unwrap();
        let path = frame_path(&model, &grid).unwrap();
        for frame in &path.frames {
            assert!(frame.vectors.max_abs_diff(&path.frames[0].vectors) <= 1e-13);
        }
    }

    #[test]
    fn continuation_matches_parallel_transported_analytic_path() {
        let (omega0, omega, theta) = (1.0, 0.2, 1.0);
        let grid = TimeGrid::new(0.0, 2.0 * PI / omega, 2000).unwrap();
        let model = make_schwinger_spin(omega0, omega, theta).unwrap();
        let numeric = frame_path(&model, &grid).unwrap();
        let analytic_raw = schwinger_analytic_path(omega0, omega, theta, &grid).frames;
        let analytic_pt = gauge_continue(analytic_raw, &grid).unwrap();
        for (f_num, f_ref) in numeric.frames.iter().zip(&analytic_pt.frames) {
            assert!(f_num.vectors.max_abs_diff(&f_ref.vectors) <= 1e-10);
        }
    }

    #[test]
    fn continuation_is_idempotent_and_phase_insensitive() {
        let (omega0, omega, theta) = (1.0, 0.3, 0.8);
        let grid = TimeGrid::new(0.0, 8.0, 400).unwrap();
        let base = schwinger_analytic_path(omega0, omega, theta, &grid);
        let once = gauge_continue(base.frames.clone(), &grid).unwrap();
        let twice = gauge_continue(once.frames.clone(), &grid).unwrap();
        for (a, b) in once.frames.iter().zip(&twice.frames) {
            assert!(a.vectors.max_abs_diff(&b.vectors) <= 1e-14);
        }
        // Random per-frame phases continue to the same path.
        let mut rng = StdRng::seed_from_u64(0x5eed_0004);
        let rephased: Vec<SpectralFrame> = base
            .frames
            .iter()
            .map(|f| {
                let mut vectors = f.vectors.clone();
                for j in 0..f.dim() {
                    let phi = rng.random_range(0.0..2.0 * PI);
                    let phase = C64::new(0.0, phi).exp();
                    let col: Vec<C64> = vectors.col(j).iter().map(|c| c * phase).collect();
                    vectors.set_col(j, &col);
                }
                SpectralFrame::new(f.t, f.energies.clone(), vectors)
            })
            .collect();
        let re_continued = gauge_continue(rephased, &grid).unwrap();
        for (a, b) in once.frames.iter().zip(&re_continued.frames) {
            assert!(a.vectors.max_abs_diff(&b.vectors) <= 1e-12);
        }
    }

    #[test]
    fn continued_overlaps_stay_close_to_unity() {
        let model = make_driven_tls(0.1, 5.0, 1.0, Picture::Interaction).unwrap();
        let grid = TimeGrid::new(0.0, 20.0, 4000).unwrap();
        let path = frame_path(&model, &grid).unwrap();
        for k in 1..path.frames.len() {
            for n in 0..2 {
                let ov = vec_inner(
                    &path.frames[k - 1].vectors.col(n),
                    &path.frames[k].vectors.col(n),
                )
                .norm();
                assert!(ov >= 0.9, "overlap {ov} at step {k}");
            }
        }
    }

    #[test]
    fn branch_swap_detected_on_hopelessly_coarse_grid() {
        // eps * dt = 2.16: the straight pairing overlap |cos(eps dt/2)| is
        // 0.47 and the relabel pairing |sin(eps dt/2)| = 0.88 falls short of
        // the relabel confidence gate, so continuation must refuse.
        let model = make_driven_tls(10.0, 1.0, 1.0, Picture::Interaction).unwrap();
        let grid = TimeGrid::new(0.0, 0.432, 2).unwrap();
        let raw: Vec<SpectralFrame> = grid
            .points()
            .iter()
            .map(|&t| instantaneous_eigensystem(&model, t).unwrap())
            .collect();
        assert!(matches!(
            gauge_continue(raw, &grid),
            Err(Error::BranchSwapDetected { .. })
        ));
    }

    #[test]
    fn schwinger_rates_on_analytic_gauge_match_textbook_constants() {
        let (omega0, omega, theta) = (1.0, 0.4, 1.1);
        let grid = TimeGrid::new(0.0, 10.0, 2000).unwrap();
        let path = schwinger_analytic_path(omega0, omega, theta, &grid);
        let rates = geometric_phase_rates(&path);
        let expected = omega / 2.0 * theta.cos();
        for r in &rates {
            assert_abs_diff_eq!(r[0], expected, epsilon = 1e-6);
            assert_abs_diff_eq!(r[1], -expected, epsilon = 1e-6);
        }
    }

    #[test]
    fn jc_dressed_rates_on_analytic_gauge() {
        let delta = 0.7;
        let grid = TimeGrid::new(0.0, 12.0, 12000).unwrap();
        let frames: Vec<SpectralFrame> = grid
            .points()
            .iter()
            .map(|&t| {
                let rt2 = 2.0f64.sqrt();
                let mut vectors = CMat::zeros(2);
                // Lower level b = (1, -e^{i Delta t})/sqrt(2), upper a = (e^{-i Delta t}, 1)/sqrt(2).
                vectors.set_col(
                    0,
                    &[
                        C64::new(1.0 / rt2, 0.0),
                        -C64::new(0.0, delta * t).exp() / rt2,
                    ],
                );
                vectors.set_col(
                    1,
                    &[
                        C64::new(0.0, -delta * t).exp() / rt2,
                        C64::new(1.0 / rt2, 0.0),
                    ],
                );
                SpectralFrame::new(t, vec![-1.0, 1.0], vectors)
            })
            .collect();
        let path = FramePath::from_frames(grid, frames, 1.0);
        let rates = geometric_phase_rates(&path);
        for r in &rates {
            assert_abs_diff_eq!(r[0], -delta / 2.0, epsilon = 1e-7);
            assert_abs_diff_eq!(r[1], delta / 2.0, epsilon = 1e-7);
        }
    }

    #[test]
    fn driven_tls_interaction_rates_on_analytic_gauge() {
        let eps = 0.6;
        let grid = TimeGrid::new(0.0, 10.0, 10000).unwrap();
        let frames: Vec<SpectralFrame> = grid
            .points()
            .iter()
            .map(|&t| {
                let rt2 = 2.0f64.sqrt();
                let mut vectors = CMat::zeros(2);
                vectors.set_col(
                    0,
                    &[
                        C64::new(1.0 / rt2, 0.0),
                        -C64::new(0.0, eps * t).exp() / rt2,
                    ],
                );
                vectors.set_col(
                    1,
                    &[
                        C64::new(0.0, -eps * t).exp() / rt2,
                        C64::new(1.0 / rt2, 0.0),
                    ],
                );
                SpectralFrame::new(t, vec![1.0, -1.0], vectors)
            })
            .collect();
        let path = FramePath::from_frames(grid, frames, 1.0);
        let rates = geometric_phase_rates(&path);
        for r in &rates {
            assert_abs_diff_eq!(r[0], -eps / 2.0, epsilon = 1e-7);
            assert_abs_diff_eq!(r[1], eps / 2.0, epsilon = 1e-7);
        }
    }

    #[test]
    fn rates_vanish_on_parallel_transported_paths() {
        let model = make_schwinger_spin(1.0, 0.3, 0.9).unwrap();
        let grid = TimeGrid::new(0.0, 10.0, 1000).unwrap();
        let path = frame_path(&model, &grid).unwrap();
        let rates = geometric_phase_rates(&path);
        for r in rates.iter().take(rates.len() - 1).skip(1) {
            assert!(r[0].abs() <= 1e-10 && r[1].abs() <= 1e-10);
        }
    }

    #[test]
    fn central_difference_rates_converge_quadratically() {
        let (omega0, omega, theta): (f64, f64, f64) = (1.0, 0.5, 0.9);
        let expected = omega / 2.0 * theta.cos();
        let rate_err = |steps: usize| -> f64 {
            let grid = TimeGrid::new(0.0, 5.0, steps).unwrap();
            let path = schwinger_analytic_path(omega0, omega, theta, &grid);
            let rates = geometric_phase_rates(&path);
            let mid = steps / 2;
            (rates[mid][0] - expected).abs()
        };
        let coarse = rate_err(50);
        let fine = rate_err(100);
        assert!(
            coarse / fine >= 3.5,
            "rate error ratio {} below 3.5",
            coarse / fine
        );
    }

    #[test]
    fn gamma_rate_realness_and_sum_rule() {
        let (omega0, omega, theta) = (1.0, 0.4, 1.1);
        let grid = TimeGrid::new(0.0, 6.0, 1200).unwrap();
        let path = schwinger_analytic_path(omega0, omega, theta, &grid);
        let dt = grid.dt();
        for k in 1..grid.len() - 1 {
            let mut sum_rate = 0.0;
            let mut tr = C64::new(0.0, 0.0);
            for n in 0..2 {
                let vk = path.frames[k].vectors.col(n);
                let dv: Vec<C64> = path.frames[k + 1]
                    .vectors
                    .col(n)
                    .iter()
                    .zip(path.frames[k - 1].vectors.col(n))
                    .map(|(a, b)| (a - b) / (2.0 * dt))
                    .collect();
                let complex_rate = C64::new(0.0, 1.0) * vec_inner(&vk, &dv);
                // gamma_dot is real for normalized states.
                assert!(complex_rate.im.abs() <= 1e-10);
                sum_rate += complex_rate.re;
                tr += vec_inner(&vk, &dv);
            }
            // Sum rule: sum_n gamma_dot_n = -Im tr(V^dag dV/dt).
            assert_abs_diff_eq!(sum_rate, -tr.im, epsilon = 1e-10);
        }
    }

    #[test]
    fn dynamical_phase_constant_energy() {
        let model = make_schwinger_spin(1.0, 0.2, 0.7).unwrap();
        let grid = TimeGrid::new(0.0, 4.0, 200).unwrap();
        let path = frame_path(&model, &grid).unwrap();
        let t = grid.point(150);
        assert_abs_diff_eq!(
            dynamical_phase(&path, 0, t).unwrap(),
            -0.5 * t,
            epsilon = 1e-12
        );
        assert!(dynamical_phase(&path, 0, 0.123456).is_err());
    }

    #[test]
    fn dynamical_phase_follows_branches_through_crossings() {
        // Interaction-picture drive: the branch starting at +V integrates to
        // +(V/omega0) sin(omega0 t) through the sign changes of cos.
        let (eps, v, omega0) = (0.1, 1.5, 1.0);
        let model = make_driven_tls(eps, v, omega0, Picture::Interaction).unwrap();
        let grid = TimeGrid::new(0.0, 4.0 * PI / omega0, 8000).unwrap();
        let path = frame_path(&model, &grid).unwrap();
        for &k in &[1000, 3000, 5000, 7999] {
            let t = grid.point(k);
            let expected = v / omega0 * (omega0 * t).sin();
            assert_abs_diff_eq!(
                dynamical_phase(&path, 1, t).unwrap(),
                expected,
                epsilon = 1e-6
            );
            assert_abs_diff_eq!(
                dynamical_phase(&path, 0, t).unwrap(),
                -expected,
                epsilon = 1e-6
            );
        }
    }
}
