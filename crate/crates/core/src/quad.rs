//! Sector inner products, finite-difference Hamiltonian application, and the
//! Schrödinger/eigen residual oracles.
//!
//! Two quadrature routes are provided: tensor Gauss-Legendre on a truncated
//! box intersected with the sector (N <= 3), and Monte Carlo importance
//! sampling with a Gaussian matched to the coherent-state envelope (N <= 6).
//! Monte Carlo runs in fixed-size chunks with per-chunk RNG streams derived
//! from the seed and a deterministic ordered reduction, so results are
//! bit-reproducible independent of worker count.

use crate::classical::{Frame, Trajectory};
use crate::error::{Error, Result};
use crate::model::{potential, sector_contains, ModelSpec};
use crate::schedule::Schedule;
use crate::wavefn::CoherentState;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Tensor,
    #[serde(rename = "montecarlo")]
    MonteCarlo,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSpec {
    pub method: Method,
    #[serde(default = "default_points_per_dim")]
    pub points_per_dim: usize,
    #[serde(default = "default_samples")]
    pub samples: usize,
    pub seed: u64,
    #[serde(default = "default_eps_guard")]
    pub eps_guard: f64,
    /// Spatial finite-difference step; defaults to 1e-4 sqrt(hbar).
    #[serde(default)]
    pub fd_step_x: Option<f64>,
    /// Temporal finite-difference step; defaults to tau'/8192.
    #[serde(default)]
    pub fd_step_t: Option<f64>,
    /// Simpson intervals for the phase-pipeline time integrals.
    #[serde(default)]
    pub time_intervals: Option<usize>,
    /// Promote quadrature-truncation warnings to errors (runtime flag, not
    /// part of the scenario format).
    #[serde(skip)]
    pub strict: bool,
}

fn default_points_per_dim() -> usize {
    64
}

fn default_samples() -> usize {
    200_000
}

fn default_eps_guard() -> f64 {
    1e-6
}

impl QuadratureSpec {
    pub fn fd_x(&self, hbar: f64) -> f64 {
        self.fd_step_x.unwrap_or(1e-4 * hbar.sqrt())
    }

    pub fn fd_t(&self, tau_prime: f64) -> f64 {
        self.fd_step_t.unwrap_or(tau_prime / 8192.0)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        match self.method {
            Method::Tensor if n > 3 => Err(Error::Config(format!(
                "tensor quadrature supports N <= 3, got N = {n}"
            ))),
            Method::MonteCarlo if n > 6 => Err(Error::Config(format!(
                "Monte Carlo quadrature supports N <= 6, got N = {n}"
            ))),
            _ => {
                if self.points_per_dim < 4 {
                    return Err(Error::Config("points_per_dim must be at least 4".into()));
                }
                if self.samples < 100 {
                    return Err(Error::Config("samples must be at least 100".into()));
                }
                if !(self.eps_guard > 0.0) {
                    return Err(Error::Config("eps_guard must be positive".into()));
                }
                Ok(())
            }
        }
    }
}

/// Gaussian envelope data steering both quadrature routes: importance mean
/// and variance, and the truncation half-width of the tensor box.
#[derive(Debug, Clone, Copy)]
pub struct Envelope {
    pub center: f64,
    pub sigma2: f64,
    pub half_width: f64,
}

/// Padding, in energy quanta, of the Gaussian tail bound that sets the box.
const BOX_PADDING_QUANTA: f64 = 20.0;

impl Envelope {
    /// Envelope of a stationary eigenstate (rho² = Omega, u_f = 0).
    pub fn stationary(hbar: f64, energy: f64) -> Envelope {
        Envelope {
            center: 0.0,
            sigma2: hbar,
            half_width: (2.0 * hbar * (energy / hbar + BOX_PADDING_QUANTA)).sqrt(),
        }
    }

    /// Envelope of a coherent state at one frame. The Gaussian tail bound is
    /// applied with the frame's own width, so narrow-envelope frames get a
    /// proportionally tighter box; the displacement maximum keeps the moving
    /// center covered at every node.
    pub fn on_trajectory(hbar: f64, energy: f64, traj: &Trajectory, frame: &Frame) -> Envelope {
        let mut uf_max: f64 = 0.0;
        for i in 0..traj.len() {
            uf_max = uf_max.max(traj.uf[i].abs());
        }
        Envelope {
            center: frame.uf,
            sigma2: frame.rho * frame.rho * hbar / frame.omega,
            half_width: uf_max
                + frame.rho
                    * (2.0 * hbar * (energy / hbar + BOX_PADDING_QUANTA) / traj.omega).sqrt(),
        }
    }
}

/// How points outside the ordered sector are treated.
///
/// `Indicator` integrates over the box and keeps only in-sector points, the
/// correct route for arbitrary integrand pairs. `Symmetrized` maps every
/// point to its sector representative (sorting, plus sign-folding for the
/// B variant) and is valid exactly when every integrand is invariant under
/// that folding, as all expectation ratios here are; it avoids the indicator
/// discontinuity, which otherwise dominates the tensor-rule error.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SectorTreatment {
    Indicator,
    Symmetrized,
}

pub struct Integrator<'a> {
    pub spec: &'a ModelSpec,
    pub quad: &'a QuadratureSpec,
    pub env: Envelope,
    /// Sector margin applied by the indicator.
    pub guard: f64,
    pub strict: bool,
    pub treatment: SectorTreatment,
}

const MC_CHUNK: usize = 4096;

impl<'a> Integrator<'a> {
    pub fn new(spec: &'a ModelSpec, quad: &'a QuadratureSpec, env: Envelope) -> Result<Self> {
        quad.validate(spec.n)?;
        Ok(Integrator {
            spec,
            quad,
            env,
            guard: quad.eps_guard,
            strict: quad.strict,
            treatment: SectorTreatment::Indicator,
        })
    }

    pub fn with_guard(mut self, guard: f64) -> Self {
        self.guard = guard.max(self.quad.eps_guard);
        self
    }

    pub fn strict(mut self, strict: bool) -> Self {
        self.strict = strict;
        self
    }

    pub fn symmetrized(mut self) -> Self {
        self.treatment = SectorTreatment::Symmetrized;
        self
    }

    /// Maps a point to its sector representative, or None when the mapped
    /// point falls inside the guard strip (where the integrands vanish).
    fn fold(&self, x: &[f64]) -> Option<Vec<f64>> {
        let mut y = x.to_vec();
        match self.treatment {
            SectorTreatment::Indicator => {
                if sector_contains(self.spec, &y, self.guard) {
                    Some(y)
                } else {
                    None
                }
            }
            SectorTreatment::Symmetrized => {
                if self.spec.variant == crate::model::Variant::B {
                    for v in y.iter_mut() {
                        *v = v.abs();
                    }
                }
                y.sort_by(|a, b| a.partial_cmp(b).unwrap());
                if sector_contains(self.spec, &y, self.guard) {
                    Some(y)
                } else {
                    None
                }
            }
        }
    }

    /// Integrates K complex-valued integrands over the sector in one sweep.
    pub fn integrate<const K: usize>(
        &self,
        f: &(dyn Fn(&[f64]) -> Result<[Complex64; K]> + Sync),
    ) -> Result<[Complex64; K]> {
        match self.quad.method {
            Method::Tensor => self.tensor_integrate(self.quad.points_per_dim, f),
            Method::MonteCarlo => Ok(self.mc_integrate(f)?.0),
        }
    }

    fn tensor_integrate<const K: usize>(
        &self,
        points: usize,
        f: &(dyn Fn(&[f64]) -> Result<[Complex64; K]> + Sync),
    ) -> Result<[Complex64; K]> {
        let n = self.spec.n;
        let l = self.env.half_width;
        // Cubic node stretch s(u) = u (a + (1-a) u²): same box [-L, L], but
        // nodes concentrated where the Gaussian envelope carries its mass.
        // The padded tail bound makes L several envelope widths, so the
        // unstretched rule under-resolves the integrand core.
        const STRETCH: f64 = 0.25;
        let (u_nodes, u_weights) = gauss_legendre(points);
        let mut nodes = Vec::with_capacity(points);
        let mut weights = Vec::with_capacity(points);
        for (u, w) in u_nodes.iter().zip(&u_weights) {
            nodes.push(self.env.center + l * u * (STRETCH + (1.0 - STRETCH) * u * u));
            weights.push(l * w * (STRETCH + 3.0 * (1.0 - STRETCH) * u * u));
        }

        // outermost coordinate parallelized; fixed slab order keeps the
        // reduction deterministic
        let slabs: Result<Vec<([Complex64; K], f64, f64)>> = (0..points)
            .into_par_iter()
            .map(|i0| {
                let mut acc = [Complex64::new(0.0, 0.0); K];
                let mut abs_acc = 0.0f64;
                let mut boundary_max: f64 = 0.0;
                let mut x = vec![0.0; n];
                let mut idx = vec![0usize; n];
                x[0] = nodes[i0];
                idx[0] = i0;
                self.tensor_recurse(
                    1,
                    &nodes,
                    &weights,
                    &mut x,
                    &mut idx,
                    weights[i0],
                    f,
                    &mut acc,
                    &mut abs_acc,
                    &mut boundary_max,
                )?;
                Ok((acc, abs_acc, boundary_max))
            })
            .collect();
        let slabs = slabs?;
        let mut total = [Complex64::new(0.0, 0.0); K];
        let mut abs_total = 0.0f64;
        let mut boundary_max: f64 = 0.0;
        for (acc, ab, bm) in slabs {
            for k in 0..K {
                total[k] += acc[k];
            }
            abs_total += ab;
            boundary_max = boundary_max.max(bm);
        }
        if self.strict {
            // scale against the accumulated absolute mass: the signed
            // integral itself may cancel to zero for orthogonal pairs
            let scale = abs_total.max(f64::MIN_POSITIVE);
            let mass = boundary_max * (2.0 * l).powi(n as i32);
            if mass > 1e-10 * scale {
                return Err(Error::Truncation { mass: mass / scale });
            }
        }
        Ok(total)
    }

    #[allow(clippy::too_many_arguments)]
    fn tensor_recurse<const K: usize>(
        &self,
        dim: usize,
        nodes: &[f64],
        weights: &[f64],
        x: &mut Vec<f64>,
        idx: &mut Vec<usize>,
        w_acc: f64,
        f: &(dyn Fn(&[f64]) -> Result<[Complex64; K]> + Sync),
        acc: &mut [Complex64; K],
        abs_acc: &mut f64,
        boundary_max: &mut f64,
    ) -> Result<()> {
        let n = self.spec.n;
        if dim == n {
            if let Some(y) = self.fold(x) {
                let vals = f(&y)?;
                let m = vals.iter().map(|v| v.norm()).fold(0.0f64, f64::max);
                for k in 0..K {
                    acc[k] += w_acc * vals[k];
                }
                *abs_acc += w_acc.abs() * m;
                if idx.iter().any(|&i| i == 0 || i == nodes.len() - 1) {
                    *boundary_max = boundary_max.max(m);
                }
            }
            return Ok(());
        }
        for i in 0..nodes.len() {
            x[dim] = nodes[i];
            idx[dim] = i;
            self.tensor_recurse(
                dim + 1,
                nodes,
                weights,
                x,
                idx,
                w_acc * weights[i],
                f,
                acc,
                abs_acc,
                boundary_max,
            )?;
        }
        Ok(())
    }

    /// Returns (means, componentwise standard errors).
    fn mc_integrate<const K: usize>(
        &self,
        f: &(dyn Fn(&[f64]) -> Result<[Complex64; K]> + Sync),
    ) -> Result<([Complex64; K], [f64; K])> {
        let n = self.spec.n;
        let total = self.quad.samples;
        let chunks = total.div_ceil(MC_CHUNK);
        let sigma = self.env.sigma2.sqrt();
        let center = self.env.center;
        let log_norm = -(n as f64) * 0.5 * (2.0 * std::f64::consts::PI * self.env.sigma2).ln();

        let partials: Result<Vec<([Complex64; K], [f64; K], [f64; K])>> = (0..chunks)
            .into_par_iter()
            .map(|chunk| {
                let mut rng = ChaCha8Rng::seed_from_u64(self.quad.seed);
                rng.set_stream(chunk as u64 + 1);
                let count = MC_CHUNK.min(total - chunk * MC_CHUNK);
                let mut sum = [Complex64::new(0.0, 0.0); K];
                let mut sum_re2 = [0.0f64; K];
                let mut sum_im2 = [0.0f64; K];
                let mut x = vec![0.0; n];
                for _ in 0..count {
                    let mut log_p = log_norm;
                    let mut j = 0;
                    while j < n {
                        let (a, b) = gaussian_pair(&mut rng);
                        x[j] = center + sigma * a;
                        log_p += -0.5 * a * a;
                        j += 1;
                        if j < n {
                            x[j] = center + sigma * b;
                            log_p += -0.5 * b * b;
                            j += 1;
                        }
                    }
                    let Some(y) = self.fold(&x) else {
                        continue;
                    };
                    let weight = (-log_p).exp();
                    let vals = f(&y)?;
                    for k in 0..K {
                        let v = vals[k] * weight;
                        sum[k] += v;
                        sum_re2[k] += v.re * v.re;
                        sum_im2[k] += v.im * v.im;
                    }
                }
                Ok((sum, sum_re2, sum_im2))
            })
            .collect();
        let partials = partials?;
        let nf = total as f64;
        let mut mean = [Complex64::new(0.0, 0.0); K];
        let mut re2 = [0.0f64; K];
        let mut im2 = [0.0f64; K];
        for (s, r2, i2) in partials {
            for k in 0..K {
                mean[k] += s[k];
                re2[k] += r2[k];
                im2[k] += i2[k];
            }
        }
        let mut stderr = [0.0f64; K];
        for k in 0..K {
            mean[k] /= nf;
            let var_re = (re2[k] / nf - mean[k].re * mean[k].re).max(0.0);
            let var_im = (im2[k] / nf - mean[k].im * mean[k].im).max(0.0);
            stderr[k] = ((var_re + var_im) / nf).sqrt();
        }
        Ok((mean, stderr))
    }
}

fn gaussian_pair(rng: &mut ChaCha8Rng) -> (f64, f64) {
    // Box-Muller; u1 in (0, 1]
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let phi = std::f64::consts::TAU * u2;
    (r * phi.cos(), r * phi.sin())
}

/// Legendre nodes and weights on [-1, 1] by Newton iteration on the
/// three-term recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 1..n {
                let kf = k as f64;
                let p2 = ((2.0 * kf + 1.0) * x * p1 - kf * p0) / (kf + 1.0);
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[derive(Debug, Clone, Copy)]
pub struct OverlapResult {
    pub value: Complex64,
    pub stderr: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct OverlapReport {
    pub value_re: f64,
    pub value_im: f64,
    pub stderr: f64,
    pub method: String,
    pub samples: u64,
}

impl OverlapResult {
    pub fn report(&self, quad: &QuadratureSpec, n: usize) -> OverlapReport {
        let (method, samples) = match quad.method {
            Method::Tensor => (
                "tensor".to_string(),
                (quad.points_per_dim as u64).pow(n as u32),
            ),
            Method::MonteCarlo => ("montecarlo".to_string(), quad.samples as u64),
        };
        OverlapReport {
            value_re: self.value.re,
            value_im: self.value.im,
            stderr: self.stderr,
            method,
            samples,
        }
    }
}

/// Sector inner product <f | g> = int conj(f) g. The error field is the
/// Monte Carlo standard error, or the delta against a coarser node count for
/// the tensor rule.
pub fn inner_product(
    integrator: &Integrator,
    f: &(dyn Fn(&[f64]) -> Result<Complex64> + Sync),
    g: &(dyn Fn(&[f64]) -> Result<Complex64> + Sync),
) -> Result<OverlapResult> {
    let integrand = |x: &[f64]| -> Result<[Complex64; 1]> { Ok([f(x)?.conj() * g(x)?]) };
    match integrator.quad.method {
        Method::MonteCarlo => {
            let (mean, err) = integrator.mc_integrate(&integrand)?;
            Ok(OverlapResult {
                value: mean[0],
                stderr: err[0],
            })
        }
        Method::Tensor => {
            let hi = integrator.tensor_integrate(integrator.quad.points_per_dim, &integrand)?[0];
            let lo_points = (integrator.quad.points_per_dim * 3 / 4).max(4);
            let lo = integrator.tensor_integrate(lo_points, &integrand)?[0];
            Ok(OverlapResult {
                value: hi,
                stderr: (hi - lo).norm(),
            })
        }
    }
}

/// Applies the Hamiltonian at schedule values (M, w²) by central second
/// differences of step `fd_step` plus the potential term.
pub fn apply_hamiltonian(
    spec: &ModelSpec,
    m_t: f64,
    w2_t: f64,
    psi: &dyn Fn(&[f64]) -> Result<Complex64>,
    x: &[f64],
    fd_step: f64,
) -> Result<Complex64> {
    let h2 = fd_step * fd_step;
    let center = psi(x)?;
    let mut lap = Complex64::new(0.0, 0.0);
    let mut probe = x.to_vec();
    for i in 0..x.len() {
        probe[i] = x[i] + fd_step;
        let plus = psi(&probe)?;
        probe[i] = x[i] - fd_step;
        let minus = psi(&probe)?;
        probe[i] = x[i];
        lap += (plus + minus - 2.0 * center) / h2;
    }
    let v = potential(spec, m_t, w2_t, x)?;
    Ok(-spec.hbar * spec.hbar / (2.0 * m_t) * lap + v * center)
}

/// Relative eigen-residual ||H phi - E phi|| / ||phi|| over the quadrature
/// measure, with the stationary Hamiltonian (M = 1, w² = 1).
pub fn eigen_residual(
    spec: &ModelSpec,
    state: &(dyn Fn(&[f64]) -> Result<Complex64> + Sync),
    energy: f64,
    quad: &QuadratureSpec,
    fd_step: Option<f64>,
) -> Result<f64> {
    let fd = fd_step.unwrap_or_else(|| quad.fd_x(spec.hbar));
    let env = Envelope::stationary(spec.hbar, energy);
    let integrator = Integrator::new(spec, quad, env)?
        .with_guard(3.0 * fd)
        .symmetrized();
    let integrand = |x: &[f64]| -> Result<[Complex64; 2]> {
        let hpsi = apply_hamiltonian(spec, 1.0, 1.0, state, x, fd)?;
        let psi = state(x)?;
        let r = hpsi - energy * psi;
        Ok([
            Complex64::new(r.norm_sqr(), 0.0),
            Complex64::new(psi.norm_sqr(), 0.0),
        ])
    };
    let out = integrator.integrate(&integrand)?;
    Ok((out[0].re / out[1].re).sqrt())
}

fn time_stencil(traj: &Trajectory, t: f64, dt: f64) -> Result<[Frame; 5]> {
    if t - 2.0 * dt < 0.0 || t + 2.0 * dt > traj.tau_prime {
        return Err(Error::Domain(format!(
            "time {t} too close to the trajectory boundary for the stencil"
        )));
    }
    Ok([
        traj.frame(t - 2.0 * dt)?,
        traj.frame(t - dt)?,
        traj.frame(t)?,
        traj.frame(t + dt)?,
        traj.frame(t + 2.0 * dt)?,
    ])
}

/// Fourth-order central time derivative of the state at fixed x.
fn dpsi_dt(state: &CoherentState, frames: &[Frame; 5], dt: f64, x: &[f64]) -> Result<Complex64> {
    let fm2 = state.eval_at(&frames[0], x)?;
    let fm1 = state.eval_at(&frames[1], x)?;
    let fp1 = state.eval_at(&frames[3], x)?;
    let fp2 = state.eval_at(&frames[4], x)?;
    Ok((-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * dt))
}

/// Relative Schrödinger residual ||i hbar dpsi/dt - H psi|| / ||psi|| at time
/// t over the quadrature measure.
pub fn schrodinger_residual(
    spec: &ModelSpec,
    schedule: &Schedule,
    state: &CoherentState,
    t: f64,
    quad: &QuadratureSpec,
    fd_step_x: Option<f64>,
) -> Result<f64> {
    let fd_x = fd_step_x.unwrap_or_else(|| quad.fd_x(spec.hbar));
    let dt = quad.fd_t(state.traj.tau_prime);
    let frames = time_stencil(state.traj, t, dt)?;
    let frame = frames[2];
    let m_t = schedule.mass(t)?;
    let w2_t = schedule.freq_sq(t)?;
    let env = Envelope::on_trajectory(spec.hbar, state.energy(), state.traj, &frame);
    let integrator = Integrator::new(spec, quad, env)?
        .with_guard(3.0 * fd_x)
        .symmetrized();
    let integrand = |x: &[f64]| -> Result<[Complex64; 2]> {
        let at_t = |y: &[f64]| state.eval_at(&frame, y);
        let hpsi = apply_hamiltonian(spec, m_t, w2_t, &at_t, x, fd_x)?;
        let dpsi = dpsi_dt(state, &frames, dt, x)?;
        let psi = state.eval_at(&frame, x)?;
        let r = Complex64::i() * spec.hbar * dpsi - hpsi;
        Ok([
            Complex64::new(r.norm_sqr(), 0.0),
            Complex64::new(psi.norm_sqr(), 0.0),
        ])
    };
    let out = integrator.integrate(&integrand)?;
    Ok((out[0].re / out[1].re).sqrt())
}

/// Normalization-free ratio <psi | dpsi/dt> / <psi | psi> at time t.
pub fn time_derivative_overlap(
    spec: &ModelSpec,
    state: &CoherentState,
    t: f64,
    quad: &QuadratureSpec,
) -> Result<Complex64> {
    let dt = quad.fd_t(state.traj.tau_prime);
    let frames = time_stencil(state.traj, t, dt)?;
    let frame = frames[2];
    let env = Envelope::on_trajectory(spec.hbar, state.energy(), state.traj, &frame);
    let integrator = Integrator::new(spec, quad, env)?.symmetrized();
    let integrand = |x: &[f64]| -> Result<[Complex64; 2]> {
        let psi = state.eval_at(&frame, x)?;
        let dpsi = dpsi_dt(state, &frames, dt, x)?;
        Ok([psi.conj() * dpsi, Complex64::new(psi.norm_sqr(), 0.0)])
    };
    let out = integrator.integrate(&integrand)?;
    Ok(out[0] / out[1].re)
}

/// One time node of the phase pipeline: the normalized expectation
/// <psi|H|psi>/<psi|psi> and the overlap ratio <psi|dpsi/dt>/<psi|psi>,
/// computed from a single shared sweep.
pub fn expectation_pair(
    spec: &ModelSpec,
    schedule: &Schedule,
    state: &CoherentState,
    t: f64,
    quad: &QuadratureSpec,
) -> Result<(Complex64, Complex64)> {
    let fd_x = quad.fd_x(spec.hbar);
    let dt = quad.fd_t(state.traj.tau_prime);
    let frames = time_stencil(state.traj, t, dt)?;
    let frame = frames[2];
    let m_t = schedule.mass(t)?;
    let w2_t = schedule.freq_sq(t)?;
    let env = Envelope::on_trajectory(spec.hbar, state.energy(), state.traj, &frame);
    let integrator = Integrator::new(spec, quad, env)?
        .with_guard(3.0 * fd_x)
        .symmetrized();
    let integrand = |x: &[f64]| -> Result<[Complex64; 3]> {
        let at_t = |y: &[f64]| state.eval_at(&frame, y);
        let psi = state.eval_at(&frame, x)?;
        let hpsi = apply_hamiltonian(spec, m_t, w2_t, &at_t, x, fd_x)?;
        let dpsi = dpsi_dt(state, &frames, dt, x)?;
        Ok([
            psi.conj() * hpsi,
            psi.conj() * dpsi,
            Complex64::new(psi.norm_sqr(), 0.0),
        ])
    };
    let out = integrator.integrate(&integrand)?;
    Ok((out[0] / out[2].re, out[1] / out[2].re))
}

/// Boundary-aware time derivative of the state at the trajectory endpoints,
/// used by phase integrals whose Simpson nodes include t = 0 and t = tau'.
/// One-sided fourth-order stencils keep every evaluation inside [0, tau'].
pub fn expectation_pair_boundary(
    spec: &ModelSpec,
    schedule: &Schedule,
    state: &CoherentState,
    t: f64,
    quad: &QuadratureSpec,
) -> Result<(Complex64, Complex64)> {
    let tau = state.traj.tau_prime;
    let dt = quad.fd_t(tau);
    if t - 2.0 * dt >= 0.0 && t + 2.0 * dt <= tau {
        return expectation_pair(spec, schedule, state, t, quad);
    }
    let forward = t < 2.0 * dt;
    let sign = if forward { 1.0 } else { -1.0 };
    let frames: Vec<Frame> = (0..5)
        .map(|k| state.traj.frame(t + sign * k as f64 * dt))
        .collect::<Result<_>>()?;
    let frame = frames[0];
    let fd_x = quad.fd_x(spec.hbar);
    let m_t = schedule.mass(t)?;
    let w2_t = schedule.freq_sq(t)?;
    let env = Envelope::on_trajectory(spec.hbar, state.energy(), state.traj, &frame);
    let integrator = Integrator::new(spec, quad, env)?
        .with_guard(3.0 * fd_x)
        .symmetrized();
    let integrand = |x: &[f64]| -> Result<[Complex64; 3]> {
        let at_t = |y: &[f64]| state.eval_at(&frame, y);
        let psi = state.eval_at(&frame, x)?;
        let hpsi = apply_hamiltonian(spec, m_t, w2_t, &at_t, x, fd_x)?;
        let f: Vec<Complex64> = frames
            .iter()
            .map(|fr| state.eval_at(fr, x))
            .collect::<Result<_>>()?;
        // one-sided 4th-order first derivative
        let d = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4])
            / (12.0 * dt)
            * sign;
        Ok([
            psi.conj() * hpsi,
            psi.conj() * d,
            Complex64::new(psi.norm_sqr(), 0.0),
        ])
    };
    let out = integrator.integrate(&integrand)?;
    Ok((out[0] / out[2].re, out[1] / out[2].re))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_nodes_integrate_polynomials() {
        let (nodes, weights) = gauss_legendre(8);
        let int_x2: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w * x * x)
            .sum();
        assert_relative_eq!(int_x2, 2.0 / 3.0, epsilon = 1e-14);
        let int_x14: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| w * x.powi(14))
            .sum();
        assert_relative_eq!(int_x14, 2.0 / 15.0, epsilon = 1e-13);
        let total: f64 = weights.iter().sum();
        assert_relative_eq!(total, 2.0, epsilon = 1e-14);
    }

    #[test]
    fn legendre_gaussian_integral() {
        let (nodes, weights) = gauss_legendre(48);
        let l = 8.0;
        let int: f64 = nodes
            .iter()
            .zip(&weights)
            .map(|(x, w)| l * w * (-(l * x) * (l * x) / 2.0).exp())
            .sum();
        assert_relative_eq!(int, (2.0 * std::f64::consts::PI).sqrt(), epsilon = 1e-12);
    }
}
