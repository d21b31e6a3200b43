//! Catalog of time-dependent Hamiltonians behind one evaluation interface.
//!
//! Three closed-form models plus a generic sampled form:
//!
//! * Jaynes-Cummings in the interaction picture, restricted to the closed
//!   two-dimensional block `{|1,n+1>, |2,n>}` at fixed photon number `n`:
//!   off-diagonals `hbar*g*sqrt(n+1)*exp(-+i*Delta*t)`, zero diagonal.
//! * Schwinger spin in a rotating field:
//!   `H = -(hbar*omega0/2)(sx sin(theta)cos(omega t) + sy sin(theta)sin(omega t) + sz cos(theta))`.
//! * Driven two-level system `H = -(eps/2) sz - V cos(omega0 t) sx`, in either
//!   the Schroedinger picture or the interaction picture with respect to the
//!   static `-(eps/2) sz` part.
//! * A generic Hermitian path sampled on a grid, evaluated by piecewise-linear
//!   interpolation (clamped outside the sample span).
//!
//! Models are immutable after construction; evaluation is pure and reentrant.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::numerics::{CMat, TimeGrid, HERMITICITY_TOL, MAX_DIM};

/// Representation picture for the driven two-level model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Picture {
    Schroedinger,
    Interaction,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JaynesCummingsParams {
    /// Atom-field coupling, rad/time.
    pub g: f64,
    /// Detuning Delta = omega0 - omega, rad/time.
    pub delta: f64,
    /// Photon number of the block, n >= 0.
    pub photon_n: u32,
}

impl JaynesCummingsParams {
    /// Rabi frequency R_n = 2 g sqrt(n+1).
    pub fn rabi(&self) -> f64 {
        2.0 * self.g * ((self.photon_n as f64) + 1.0).sqrt()
    }

    /// Generalized Rabi frequency Omega_n = sqrt(Delta^2 + R_n^2).
    pub fn omega_n(&self) -> f64 {
        (self.delta * self.delta + self.rabi() * self.rabi()).sqrt()
    }

    /// Coupling-to-detuning ratio lambda = R_n / Delta (infinite on resonance).
    pub fn lambda(&self) -> f64 {
        self.rabi() / self.delta
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchwingerParams {
    /// Level splitting, rad/time, > 0.
    pub omega0: f64,
    /// Field rotation frequency, rad/time.
    pub omega: f64,
    /// Cone angle, rad.
    pub theta: f64,
}

impl SchwingerParams {
    /// omega_tilde = omega0 + omega cos(theta).
    pub fn omega_tilde(&self) -> f64 {
        self.omega0 + self.omega * self.theta.cos()
    }

    /// omega_bar = sqrt(omega0^2 + omega^2 + 2 omega0 omega cos(theta)).
    pub fn omega_bar(&self) -> f64 {
        (self.omega0 * self.omega0
            + self.omega * self.omega
            + 2.0 * self.omega0 * self.omega * self.theta.cos())
        .sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DrivenTlsParams {
    /// Static splitting, energy units.
    pub epsilon: f64,
    /// Drive amplitude, energy units, >= 0.
    pub v: f64,
    /// Drive frequency, rad/time.
    pub omega0: f64,
}

/// Generic Hermitian Hamiltonian given by samples on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledHamiltonian {
    grid: TimeGrid,
    samples: Vec<CMat>,
}

impl SampledHamiltonian {
    fn eval(&self, t: f64) -> CMat {
        let dt = self.grid.dt();
        let x = (t - self.grid.t0) / dt;
        if x <= 0.0 {
            return self.samples[0].clone();
        }
        if x >= self.grid.steps as f64 {
            return self.samples[self.grid.steps].clone();
        }
        let k = x.floor() as usize;
        let frac = x - k as f64;
        &self.samples[k].scale_re(1.0 - frac) + &self.samples[k + 1].scale_re(frac)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    JaynesCummings(JaynesCummingsParams),
    SchwingerSpin(SchwingerParams),
    DrivenTls(DrivenTlsParams),
    DrivenTlsInteraction(DrivenTlsParams),
    GenericSampled(SampledHamiltonian),
}

/// Immutable descriptor of a time-dependent Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianModel {
    pub kind: ModelKind,
    /// Action unit; defaults to 1 and is carried explicitly so formulas with
    /// hbar stay dimensionally checkable.
    pub hbar: f64,
}

impl HamiltonianModel {
    pub fn with_hbar(mut self, hbar: f64) -> Result<Self> {
        if !hbar.is_finite() || hbar <= 0.0 {
            return Err(Error::invalid_param("hbar", "must be > 0"));
        }
        self.hbar = hbar;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        match &self.kind {
            ModelKind::GenericSampled(s) => s.samples[0].dim(),
            _ => 2,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match &self.kind {
            ModelKind::JaynesCummings(_) => "jaynes_cummings",
            ModelKind::SchwingerSpin(_) => "schwinger",
            ModelKind::DrivenTls(_) => "driven_tls",
            ModelKind::DrivenTlsInteraction(_) => "driven_tls_interaction",
            ModelKind::GenericSampled(_) => "generic_sampled",
        }
    }

    /// The model's dimensionless strong-coupling parameter, where one is
    /// defined: R_n/Delta for Jaynes-Cummings, omega_tilde/(omega sin theta)
    /// for the Schwinger spin, V/(hbar omega0) for the driven two-level
    /// system. The ordered correction series shrinks as this grows.
    pub fn expansion_parameter(&self) -> Option<f64> {
        match &self.kind {
            ModelKind::JaynesCummings(p) => {
                if p.delta == 0.0 {
                    None
                } else {
                    Some(p.lambda().abs())
                }
            }
            ModelKind::SchwingerSpin(p) => {
                let denom = p.omega * p.theta.sin();
                if denom == 0.0 {
                    None
                } else {
                    Some((p.omega_tilde() / denom).abs())
                }
            }
            ModelKind::DrivenTls(p) | ModelKind::DrivenTlsInteraction(p) => {
                if p.omega0 == 0.0 {
                    None
                } else {
                    Some((p.v / (self.hbar * p.omega0)).abs())
                }
            }
            ModelKind::GenericSampled(_) => None,
        }
    }

    pub fn eval(&self, t: f64) -> CMat {
        eval_hamiltonian(self, t)
    }
}

pub fn make_jaynes_cummings(g: f64, delta: f64, photon_n: u32) -> Result<HamiltonianModel> {
    if !g.is_finite() || g < 0.0 {
        return Err(Error::invalid_param("g", format!("must be finite and >= 0, got {g}")));
    }
    if !delta.is_finite() {
        return Err(Error::invalid_param("delta", "must be finite"));
    }
    Ok(HamiltonianModel {
        kind: ModelKind::JaynesCummings(JaynesCummingsParams { g, delta, photon_n }),
        hbar: 1.0,
    })
}

pub fn make_schwinger_spin(omega0: f64, omega: f64, theta: f64) -> Result<HamiltonianModel> {
    if !omega0.is_finite() || omega0 <= 0.0 {
        return Err(Error::invalid_param("omega0", format!("must be > 0, got {omega0}")));
    }
    if !omega.is_finite() || !theta.is_finite() {
        return Err(Error::invalid_param("omega/theta", "must be finite"));
    }
    Ok(HamiltonianModel {
        kind: ModelKind::SchwingerSpin(SchwingerParams { omega0, omega, theta }),
        hbar: 1.0,
    })
}

pub fn make_driven_tls(
    epsilon: f64,
    v: f64,
    omega0: f64,
    picture: Picture,
) -> Result<HamiltonianModel> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::invalid_param("v", format!("must be finite and >= 0, got {v}")));
    }
    if !epsilon.is_finite() || !omega0.is_finite() {
        return Err(Error::invalid_param("epsilon/omega0", "must be finite"));
    }
    let params = DrivenTlsParams { epsilon, v, omega0 };
    Ok(HamiltonianModel {
        kind: match picture {
            Picture::Schroedinger => ModelKind::DrivenTls(params),
            Picture::Interaction => ModelKind::DrivenTlsInteraction(params),
        },
        hbar: 1.0,
    })
}

/// Wrap Hermitian samples on a uniform grid as a model; evaluation
/// interpolates linearly between nodes.
pub fn make_generic_sampled(grid: TimeGrid, samples: Vec<CMat>) -> Result<HamiltonianModel> {
    if samples.len() != grid.len() {
        return Err(Error::invalid_param(
            "samples",
            format!("expected {} samples, got {}", grid.len(), samples.len()),
        ));
    }
    let dim = samples[0].dim();
    if dim > MAX_DIM {
        return Err(Error::invalid_param("samples", "dim exceeds 8"));
    }
    for (k, s) in samples.iter().enumerate() {
        if s.dim() != dim {
            return Err(Error::invalid_param("samples", "inconsistent dimensions"));
        }
        let scale = s.max_abs().max(1.0);
        if s.hermiticity_defect() > HERMITICITY_TOL * scale {
            return Err(Error::invalid_param(
                "samples",
                format!("sample {k} is not Hermitian"),
            ));
        }
    }
    Ok(HamiltonianModel {
        kind: ModelKind::GenericSampled(SampledHamiltonian { grid, samples }),
        hbar: 1.0,
    })
}

/// Evaluate the model Hamiltonian at time `t`. Hermitian by construction for
/// the catalog models and by validation for sampled ones.
pub fn eval_hamiltonian(model: &HamiltonianModel, t: f64) -> CMat {
    let hbar = model.hbar;
    match &model.kind {
        ModelKind::JaynesCummings(p) => {
            let amp = hbar * p.g * ((p.photon_n as f64) + 1.0).sqrt();
            let phase = C64::new(0.0, -p.delta * t).exp();
            CMat::two_by_two(
                C64::new(0.0, 0.0),
                phase * amp,
                phase.conj() * amp,
                C64::new(0.0, 0.0),
            )
        }
        ModelKind::SchwingerSpin(p) => {
            let a = -hbar * p.omega0 / 2.0;
            let (st, ct) = (p.theta.sin(), p.theta.cos());
            let (sw, cw) = ((p.omega * t).sin(), (p.omega * t).cos());
            // a*(n.sigma) with n = (st*cw, st*sw, ct).
            let nx = st * cw;
            let ny = st * sw;
            let nz = ct;
            CMat::two_by_two(
                C64::new(a * nz, 0.0),
                C64::new(a * nx, -a * ny),
                C64::new(a * nx, a * ny),
                C64::new(-a * nz, 0.0),
            )
        }
        ModelKind::DrivenTls(p) => {
            let drive = -p.v * (p.omega0 * t).cos();
            CMat::two_by_two(
                C64::new(-p.epsilon / 2.0, 0.0),
                C64::new(drive, 0.0),
                C64::new(drive, 0.0),
                C64::new(p.epsilon / 2.0, 0.0),
            )
        }
        ModelKind::DrivenTlsInteraction(p) => {
            // -V cos(omega0 t) sx e^{i (eps/hbar) sz t}: off-diagonals
            // -V cos(omega0 t) e^{-+ i eps t / hbar}, zero diagonal.
            let drive = -p.v * (p.omega0 * t).cos();
            let phase = C64::new(0.0, -p.epsilon * t / hbar).exp();
            CMat::two_by_two(
                C64::new(0.0, 0.0),
                phase * drive,
                phase.conj() * drive,
                C64::new(0.0, 0.0),
            )
        }
        ModelKind::GenericSampled(s) => s.eval(t),
    }
}
