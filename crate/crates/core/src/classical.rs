//! Classical envelope machinery: the equation of motion d(M x')/dt + M w² x = 0
//! integrated by fixed-step RK4 in the (x, M x') phase-space variables, the
//! period-map (monodromy) analysis, the periodic-envelope construction from
//! the Floquet eigensolution, and the displacement solution u_f with its
//! accumulated phase delta_f.

use crate::error::{Error, Result};
use crate::schedule::Schedule;

/// Default number of RK4 steps per schedule period.
pub const DEFAULT_STEPS_PER_TAU: usize = 4096;

/// Tolerance window around |trace| = 2 treated as marginal (parabolic).
pub const MARGINAL_TRACE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
struct State {
    x: f64,
    p: f64, // p = M x'
}

fn deriv(schedule: &Schedule, t: f64, s: State) -> Result<State> {
    let m = schedule.mass(t)?;
    let w2 = schedule.freq_sq(t)?;
    Ok(State {
        x: s.p / m,
        p: -m * w2 * s.x,
    })
}

fn rk4_step(schedule: &Schedule, t: f64, h: f64, s: State) -> Result<State> {
    let k1 = deriv(schedule, t, s)?;
    let k2 = deriv(
        schedule,
        t + 0.5 * h,
        State {
            x: s.x + 0.5 * h * k1.x,
            p: s.p + 0.5 * h * k1.p,
        },
    )?;
    let k3 = deriv(
        schedule,
        t + 0.5 * h,
        State {
            x: s.x + 0.5 * h * k2.x,
            p: s.p + 0.5 * h * k2.p,
        },
    )?;
    let k4 = deriv(
        schedule,
        t + h,
        State {
            x: s.x + h * k3.x,
            p: s.p + h * k3.p,
        },
    )?;
    Ok(State {
        x: s.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
        p: s.p + h / 6.0 * (k1.p + 2.0 * k2.p + 2.0 * k3.p + k4.p),
    })
}

/// Integrates the equation of motion from (x0, xdot0) and samples (x, x') on
/// the provided grid. One RK4 step is taken per grid interval, so the grid
/// spacing is the step size; results are deterministic for a fixed grid.
pub fn integrate_eom(
    schedule: &Schedule,
    x0: f64,
    xdot0: f64,
    grid: &[f64],
) -> Result<Vec<(f64, f64)>> {
    if grid.is_empty() {
        return Ok(Vec::new());
    }
    let span = 2.0 * schedule.tau;
    if grid[0] < -1e-12 || *grid.last().unwrap() > span * (1.0 + 1e-12) {
        return Err(Error::Domain(format!(
            "grid must lie within [0, 2 tau] = [0, {span}]"
        )));
    }
    for w in grid.windows(2) {
        if !(w[1] > w[0]) {
            return Err(Error::Domain("grid must be strictly increasing".into()));
        }
    }
    let m0 = schedule.mass(grid[0])?;
    let mut s = State {
        x: x0,
        p: m0 * xdot0,
    };
    let mut out = Vec::with_capacity(grid.len());
    out.push((s.x, s.p / m0));
    for w in grid.windows(2) {
        s = rk4_step(schedule, w[0], w[1] - w[0], s)?;
        out.push((s.x, s.p / schedule.mass(w[1])?));
    }
    Ok(out)
}

fn uniform_grid(end: f64, steps: usize) -> Vec<f64> {
    (0..=steps).map(|i| end * i as f64 / steps as f64).collect()
}

/// Raw integration in (x, p) over a uniform grid, returning both components.
fn integrate_xp(
    schedule: &Schedule,
    x0: f64,
    p0: f64,
    end: f64,
    steps: usize,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let grid = uniform_grid(end, steps);
    let mut xs = Vec::with_capacity(steps + 1);
    let mut ps = Vec::with_capacity(steps + 1);
    let mut s = State { x: x0, p: p0 };
    xs.push(s.x);
    ps.push(s.p);
    for w in grid.windows(2) {
        s = rk4_step(schedule, w[0], w[1] - w[0], s)?;
        xs.push(s.x);
        ps.push(s.p);
    }
    Ok((xs, ps))
}

/// The 2x2 period map acting on (x, M x') over one period tau.
#[derive(Debug, Clone, Copy)]
pub struct Monodromy {
    /// Column-major images of the unit initial conditions.
    pub mat: [[f64; 2]; 2],
}

impl Monodromy {
    pub fn trace(&self) -> f64 {
        self.mat[0][0] + self.mat[1][1]
    }

    pub fn det(&self) -> f64 {
        self.mat[0][0] * self.mat[1][1] - self.mat[0][1] * self.mat[1][0]
    }

    pub fn stable(&self) -> bool {
        self.trace().abs() < 2.0
    }
}

pub fn monodromy(schedule: &Schedule, steps_per_tau: usize) -> Result<Monodromy> {
    let mut mat = [[0.0; 2]; 2];
    for (col, (x0, p0)) in [(1.0, 0.0), (0.0, 1.0)].iter().enumerate() {
        let (xs, ps) = integrate_xp(schedule, *x0, *p0, schedule.tau, steps_per_tau)?;
        mat[0][col] = *xs.last().unwrap();
        mat[1][col] = *ps.last().unwrap();
    }
    Ok(Monodromy { mat })
}

/// How the two envelope solutions u, v are chosen.
#[derive(Debug, Clone, Copy)]
pub enum TrajectoryInit {
    /// Real and imaginary parts of the Floquet eigensolution, rescaled so the
    /// wronskian constant is 1; u_f = 0.
    Floquet,
    /// User-supplied initial data for u, v and the displacement solution.
    Explicit {
        u0: f64,
        udot0: f64,
        v0: f64,
        vdot0: f64,
        uf0: f64,
        ufdot0: f64,
    },
}

/// Interpolated trajectory data at one instant; everything wavefunction
/// evaluation needs at time t.
#[derive(Debug, Clone, Copy)]
pub struct Frame {
    pub t: f64,
    pub m: f64,
    pub w2: f64,
    pub u: f64,
    pub u_dot: f64,
    pub v: f64,
    pub v_dot: f64,
    pub rho: f64,
    pub rho_dot: f64,
    pub uf: f64,
    pub uf_dot: f64,
    pub delta_f: f64,
    /// Continuous argument of u + iv along the trajectory (the branch used by
    /// all non-integer complex powers), anchored to the principal value at
    /// t = 0.
    pub theta: f64,
    pub omega: f64,
}

/// Sampled classical trajectory over [0, tau'] with the branch-tracked
/// argument and displacement data. All fields are immutable after
/// construction; the struct is safe to share across threads.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub schedule: Schedule,
    pub grid: Vec<f64>,
    pub u: Vec<f64>,
    pub pu: Vec<f64>,
    pub v: Vec<f64>,
    pub pv: Vec<f64>,
    pub uf: Vec<f64>,
    pub puf: Vec<f64>,
    pub delta_f: Vec<f64>,
    pub theta: Vec<f64>,
    pub m: Vec<f64>,
    pub w2: Vec<f64>,
    pub omega: f64,
    pub tau_prime: f64,
    /// max_i |Omega_i - Omega| / |Omega| over [0, 2 tau'].
    pub wronskian_defect: f64,
    /// max_t |rho(t + tau') - rho(t)| over one shifted period.
    pub rho_shift_defect: f64,
    /// (|rho(tau') - rho(0)|, |rhodot(tau') - rhodot(0)|).
    pub rho_endpoint_defect: (f64, f64),
    /// Whether u_f passed the tau'-periodicity check (vacuously true for
    /// u_f = 0).
    pub uf_periodic: bool,
    pub has_displacement: bool,
}

impl Trajectory {
    pub fn explicit(
        schedule: Schedule,
        init: TrajectoryInit,
        steps_per_tau: usize,
        tau_prime_factor: usize,
    ) -> Result<Self> {
        match init {
            TrajectoryInit::Floquet => Self::floquet(schedule, steps_per_tau, tau_prime_factor),
            TrajectoryInit::Explicit {
                u0,
                udot0,
                v0,
                vdot0,
                uf0,
                ufdot0,
            } => {
                let m0 = schedule.mass(0.0)?;
                Self::build(
                    schedule,
                    (u0, m0 * udot0),
                    (v0, m0 * vdot0),
                    (uf0, m0 * ufdot0),
                    steps_per_tau,
                    tau_prime_factor,
                )
            }
        }
    }

    /// Constructs the periodic envelope from the monodromy eigensolution.
    ///
    /// In the elliptic case |trace| < 2 the complex Floquet solution obeys
    /// xi(t + tau) = e^{i theta} xi(t), so rho² = |xi|² is automatically
    /// tau-periodic; u = Re xi, v = Im xi rescaled so the wronskian constant
    /// is positive (normalized to 1).
    pub fn floquet(
        schedule: Schedule,
        steps_per_tau: usize,
        tau_prime_factor: usize,
    ) -> Result<Self> {
        let mon = monodromy(&schedule, steps_per_tau)?;
        let tr = mon.trace();
        if (tr.abs() - 2.0).abs() < MARGINAL_TRACE_TOL {
            return Err(Error::MarginalStability {
                margin: (tr.abs() - 2.0).abs(),
            });
        }
        if tr.abs() >= 2.0 {
            return Err(Error::Instability { trace_abs: tr.abs() });
        }
        let c = 0.5 * tr;
        let disc = (mon.det() - c * c).max(0.0);
        let s = disc.sqrt();
        // eigenvector of the period map for eigenvalue c + i s; a real matrix
        // with complex eigenvalues has both off-diagonal entries nonzero
        let (re, mut im) = if mon.mat[0][1].abs() >= mon.mat[1][0].abs() {
            ((mon.mat[0][1], c - mon.mat[0][0]), (0.0, s))
        } else {
            ((c - mon.mat[1][1], mon.mat[1][0]), (s, 0.0))
        };
        // orient and rescale the eigenvector so the wronskian constant is +1
        let mut om = re.0 * im.1 - im.0 * re.1;
        if om < 0.0 {
            im = (-im.0, -im.1);
            om = -om;
        }
        if !(om > 0.0) {
            return Err(Error::Domain("degenerate Floquet eigenvector".into()));
        }
        let scale = 1.0 / om.sqrt();
        Self::build(
            schedule,
            (re.0 * scale, re.1 * scale),
            (im.0 * scale, im.1 * scale),
            (0.0, 0.0),
            steps_per_tau,
            tau_prime_factor,
        )
    }

    fn build(
        schedule: Schedule,
        u_init: (f64, f64),
        v_init: (f64, f64),
        uf_init: (f64, f64),
        steps_per_tau: usize,
        tau_prime_factor: usize,
    ) -> Result<Self> {
        if tau_prime_factor != 1 && tau_prime_factor != 2 {
            return Err(Error::Config(format!(
                "tau' factor must be 1 or 2, got {tau_prime_factor}"
            )));
        }
        if steps_per_tau < 16 {
            return Err(Error::Config("steps_per_tau must be at least 16".into()));
        }
        let tau_prime = schedule.tau * tau_prime_factor as f64;
        let steps = steps_per_tau * tau_prime_factor;
        // integrate over two tau'-periods: the second half only feeds the
        // periodicity and wronskian diagnostics
        let (u2, pu2) = integrate_xp(&schedule, u_init.0, u_init.1, 2.0 * tau_prime, 2 * steps)?;
        let (v2, pv2) = integrate_xp(&schedule, v_init.0, v_init.1, 2.0 * tau_prime, 2 * steps)?;
        let (uf2, puf2) =
            integrate_xp(&schedule, uf_init.0, uf_init.1, 2.0 * tau_prime, 2 * steps)?;

        let mut omega = u2[0] * pv2[0] - v2[0] * pu2[0];
        let flip = omega < 0.0;
        if flip {
            omega = -omega;
        }
        if !(omega > 0.0) {
            return Err(Error::Domain(
                "u and v must be independent solutions with nonzero wronskian".into(),
            ));
        }
        let sign = if flip { -1.0 } else { 1.0 };
        let v2: Vec<f64> = v2.iter().map(|x| sign * x).collect();
        let pv2: Vec<f64> = pv2.iter().map(|x| sign * x).collect();

        let mut wronskian_defect: f64 = 0.0;
        for i in 0..u2.len() {
            let w = u2[i] * pv2[i] - v2[i] * pu2[i];
            wronskian_defect = wronskian_defect.max((w - omega).abs() / omega.abs());
        }

        let grid = uniform_grid(tau_prime, steps);
        let mut m = Vec::with_capacity(steps + 1);
        let mut w2s = Vec::with_capacity(steps + 1);
        for &t in &grid {
            m.push(schedule.mass(t)?);
            w2s.push(schedule.freq_sq(t)?);
        }

        let rho_at = |i: usize| -> f64 { u2[i].hypot(v2[i]) };
        for i in 0..=2 * steps {
            if !(rho_at(i) > 0.0) {
                return Err(Error::Domain("rho must stay positive along the trajectory".into()));
            }
        }
        let mut rho_shift_defect: f64 = 0.0;
        for i in 0..=steps {
            rho_shift_defect = rho_shift_defect.max((rho_at(i + steps) - rho_at(i)).abs());
        }
        let rho_dot_at = |i: usize, mi: f64| -> f64 {
            (u2[i] * pu2[i] / mi + v2[i] * pv2[i] / mi) / rho_at(i)
        };
        let rho_endpoint_defect = (
            (rho_at(steps) - rho_at(0)).abs(),
            (rho_dot_at(steps, m[steps]) - rho_dot_at(0, m[0])).abs(),
        );

        // continuous argument of u + iv; theta' = Omega / (M rho²) > 0
        let mut theta = Vec::with_capacity(steps + 1);
        let mut prev_raw = f64::atan2(v2[0], u2[0]);
        let mut acc = prev_raw;
        theta.push(acc);
        for i in 1..=steps {
            let raw = f64::atan2(v2[i], u2[i]);
            let mut d = raw - prev_raw;
            while d > std::f64::consts::PI {
                d -= std::f64::consts::TAU;
            }
            while d <= -std::f64::consts::PI {
                d += std::f64::consts::TAU;
            }
            if d.abs() >= std::f64::consts::PI * (1.0 - 1e-9) {
                return Err(Error::Branch { step: d.abs() });
            }
            acc += d;
            theta.push(acc);
            prev_raw = raw;
        }

        // displacement phase by trapezoidal accumulation on the RK grid
        let uf: Vec<f64> = uf2[..=steps].to_vec();
        let puf: Vec<f64> = puf2[..=steps].to_vec();
        let mut delta_f = Vec::with_capacity(steps + 1);
        let rate = |i: usize| -> f64 {
            let ud = puf[i] / m[i];
            0.5 * m[i] * (w2s[i] * uf[i] * uf[i] - ud * ud)
        };
        let mut df = 0.0;
        delta_f.push(0.0);
        for i in 1..=steps {
            let h = grid[i] - grid[i - 1];
            df += 0.5 * h * (rate(i - 1) + rate(i));
            delta_f.push(df);
        }

        let has_displacement = uf.iter().any(|x| x.abs() > 0.0) || puf.iter().any(|x| x.abs() > 0.0);
        let uf_periodic = if has_displacement {
            let scale = uf
                .iter()
                .zip(&puf)
                .map(|(a, b)| a.abs().max(b.abs()))
                .fold(0.0f64, f64::max)
                .max(1e-300);
            (uf[steps] - uf[0]).abs() <= 1e-8 * scale && (puf[steps] - puf[0]).abs() <= 1e-8 * scale
        } else {
            true
        };

        Ok(Trajectory {
            schedule,
            grid,
            u: u2[..=steps].to_vec(),
            pu: pu2[..=steps].to_vec(),
            v: v2[..=steps].to_vec(),
            pv: pv2[..=steps].to_vec(),
            uf,
            puf,
            delta_f,
            theta,
            m,
            w2: w2s,
            omega,
            tau_prime,
            wronskian_defect,
            rho_shift_defect,
            rho_endpoint_defect,
            uf_periodic,
            has_displacement,
        })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn rho(&self, i: usize) -> f64 {
        self.u[i].hypot(self.v[i])
    }

    pub fn rho_dot(&self, i: usize) -> f64 {
        (self.u[i] * self.pu[i] + self.v[i] * self.pv[i]) / (self.m[i] * self.rho(i))
    }

    /// Whether the trajectory supports quasi-periodic evolution over tau':
    /// periodic rho and (if present) periodic u_f.
    pub fn is_periodic(&self, tol: f64) -> bool {
        let scale = self.u.iter().map(|x| x.abs()).fold(0.0f64, f64::max).max(1.0);
        self.rho_shift_defect <= tol * scale
            && self.rho_endpoint_defect.0 <= tol * scale
            && self.rho_endpoint_defect.1 <= tol * scale
            && (!self.has_displacement || self.uf_periodic)
    }

    pub fn node(&self, i: usize) -> Frame {
        let m = self.m[i];
        Frame {
            t: self.grid[i],
            m,
            w2: self.w2[i],
            u: self.u[i],
            u_dot: self.pu[i] / m,
            v: self.v[i],
            v_dot: self.pv[i] / m,
            rho: self.rho(i),
            rho_dot: self.rho_dot(i),
            uf: self.uf[i],
            uf_dot: self.puf[i] / m,
            delta_f: self.delta_f[i],
            theta: self.theta[i],
            omega: self.omega,
        }
    }

    /// Trajectory data at an arbitrary time in [0, tau'], cubic-Hermite
    /// interpolated between grid nodes using the stored derivatives.
    pub fn frame(&self, t: f64) -> Result<Frame> {
        let n = self.grid.len() - 1;
        let h = self.tau_prime / n as f64;
        if t < -1e-9 * self.tau_prime || t > self.tau_prime * (1.0 + 1e-9) {
            return Err(Error::Domain(format!(
                "time {t} outside trajectory range [0, {}]",
                self.tau_prime
            )));
        }
        let tc = t.clamp(0.0, self.tau_prime);
        let idx = ((tc / h) as usize).min(n - 1);
        let s = (tc - self.grid[idx]) / h;
        if s.abs() < 1e-12 {
            return Ok(self.node(idx));
        }
        if (s - 1.0).abs() < 1e-12 {
            return Ok(self.node(idx + 1));
        }

        let (i0, i1) = (idx, idx + 1);
        let m_t = self.schedule.mass(tc)?;
        let w2_t = self.schedule.freq_sq(tc)?;

        let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
        let h10 = s * (1.0 - s) * (1.0 - s);
        let h01 = s * s * (3.0 - 2.0 * s);
        let h11 = s * s * (s - 1.0);
        let interp = |f0: f64, d0: f64, f1: f64, d1: f64| -> f64 {
            h00 * f0 + h10 * h * d0 + h01 * f1 + h11 * h * d1
        };

        let du = |i: usize| self.pu[i] / self.m[i];
        let dv = |i: usize| self.pv[i] / self.m[i];
        let duf = |i: usize| self.puf[i] / self.m[i];
        let dpu = |i: usize| -self.m[i] * self.w2[i] * self.u[i];
        let dpv = |i: usize| -self.m[i] * self.w2[i] * self.v[i];
        let dpuf = |i: usize| -self.m[i] * self.w2[i] * self.uf[i];

        let u = interp(self.u[i0], du(i0), self.u[i1], du(i1));
        let pu = interp(self.pu[i0], dpu(i0), self.pu[i1], dpu(i1));
        let v = interp(self.v[i0], dv(i0), self.v[i1], dv(i1));
        let pv = interp(self.pv[i0], dpv(i0), self.pv[i1], dpv(i1));
        let uf = interp(self.uf[i0], duf(i0), self.uf[i1], duf(i1));
        let puf = interp(self.puf[i0], dpuf(i0), self.puf[i1], dpuf(i1));

        let ddelta = |i: usize| {
            let ud = self.puf[i] / self.m[i];
            0.5 * self.m[i] * (self.w2[i] * self.uf[i] * self.uf[i] - ud * ud)
        };
        let delta_f = interp(self.delta_f[i0], ddelta(i0), self.delta_f[i1], ddelta(i1));

        let dtheta = |i: usize| self.omega / (self.m[i] * self.rho(i) * self.rho(i));
        let theta = interp(self.theta[i0], dtheta(i0), self.theta[i1], dtheta(i1));

        let rho = u.hypot(v);
        let rho_dot = (u * pu / m_t + v * pv / m_t) / rho;
        Ok(Frame {
            t: tc,
            m: m_t,
            w2: w2_t,
            u,
            u_dot: pu / m_t,
            v,
            v_dot: pv / m_t,
            rho,
            rho_dot,
            uf,
            uf_dot: puf / m_t,
            delta_f,
            theta,
            omega: self.omega,
        })
    }
}

/// Standalone displacement solve: u_f from the given initial data together
/// with delta_f(t) = int_0^t M(w² u_f² - u_f'²)/2 and a tau'-periodicity
/// status, so callers can decide to zero a non-periodic displacement.
pub struct DisplacementSolution {
    pub grid: Vec<f64>,
    pub uf: Vec<f64>,
    pub uf_dot: Vec<f64>,
    pub delta_f: Vec<f64>,
    pub periodic: bool,
}

pub fn displacement_solution(
    schedule: &Schedule,
    uf0: f64,
    ufdot0: f64,
    steps_per_tau: usize,
    tau_prime_factor: usize,
) -> Result<DisplacementSolution> {
    let traj = Trajectory::explicit(
        schedule.clone(),
        TrajectoryInit::Explicit {
            u0: 1.0,
            udot0: 0.0,
            v0: 0.0,
            vdot0: 1.0,
            uf0,
            ufdot0,
        },
        steps_per_tau,
        tau_prime_factor,
    )?;
    let uf_dot = traj
        .puf
        .iter()
        .zip(&traj.m)
        .map(|(p, m)| p / m)
        .collect();
    Ok(DisplacementSolution {
        grid: traj.grid,
        uf: traj.uf,
        uf_dot,
        delta_f: traj.delta_f,
        periodic: traj.uf_periodic,
    })
}
