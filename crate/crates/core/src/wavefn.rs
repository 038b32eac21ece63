//! Unnormalized eigenstates and coherent states of the three model variants
//! as pointwise evaluators, together with the squeeze- and displacement-type
//! unitary transforms realized as functional combinators.
//!
//! All non-integer complex powers are computed as exp(power * (ln|z| + i arg))
//! with the argument taken from the trajectory's continuous branch, anchored
//! to the principal value at t = 0. Global phases are meaningless otherwise.

use crate::classical::{Frame, Trajectory};
use crate::error::{Error, Result};
use crate::model::{self, coordinates, sector_contains, Label, ModelSpec, Variant};
use crate::poly::SymmetricPolynomial;
use crate::specfun::{hermite, laguerre};
use num_complex::Complex64;

/// Which normalization the dressing prefactor carries. `SqrtOmega` is the
/// form consistent with the unitary-transform composition; `OmegaLiteral`
/// divides the base by Omega instead and differs by the constant Omega^{k/2}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DressingNorm {
    #[default]
    SqrtOmega,
    OmegaLiteral,
}

fn jastrow_a(x: &[f64], lambda: f64) -> f64 {
    let mut j = 1.0;
    for i in 0..x.len() {
        for k in 0..i {
            j *= (x[i] - x[k]).powf(lambda);
        }
    }
    j
}

fn jastrow_b(x: &[f64], lambda: f64, alpha: f64) -> f64 {
    let mut j = 1.0;
    for i in 0..x.len() {
        for k in 0..i {
            j *= (x[i] * x[i] - x[k] * x[k]).powf(lambda);
        }
        j *= x[i].powf(alpha);
    }
    j
}

/// (prod_i w_i)^alpha with sign handling: the product may be negative inside
/// the sector, which only admits integer alpha.
fn w_product_pow(w: &[f64], alpha: f64) -> Result<f64> {
    let p: f64 = w.iter().product();
    if alpha.fract() == 0.0 && alpha.abs() < 64.0 {
        return Ok(p.powi(alpha as i32));
    }
    if p > 0.0 {
        Ok(p.powf(alpha))
    } else {
        Err(Error::Domain(format!(
            "non-integer alpha = {alpha} with negative product of w coordinates"
        )))
    }
}

fn check_poly<'a>(
    spec: &ModelSpec,
    label: &Label,
    poly: Option<&'a SymmetricPolynomial>,
) -> Result<()> {
    match (label, poly) {
        (Label::A { k, .. }, Some(p)) => {
            if spec.variant != Variant::A {
                return Err(Error::Domain(
                    "dressing polynomials are supported for variant A only".into(),
                ));
            }
            if p.nvars() != spec.n {
                return Err(Error::Domain(format!(
                    "polynomial has {} variables, model has {}",
                    p.nvars(),
                    spec.n
                )));
            }
            if p.degree() != *k {
                return Err(Error::Domain(format!(
                    "polynomial degree {} does not match label k = {k}",
                    p.degree()
                )));
            }
            Ok(())
        }
        (Label::A { k, .. }, None) if *k > 0 => Err(Error::Domain(
            "label with k > 0 requires a dressing polynomial".into(),
        )),
        (_, Some(_)) => Err(Error::Domain(
            "dressing polynomials are supported for variant A only".into(),
        )),
        _ => Ok(()),
    }
}

/// Stationary eigenstate evaluator (the constant-parameter Hamiltonian).
pub struct EigenState<'a> {
    pub spec: &'a ModelSpec,
    pub label: Label,
    pub poly: Option<&'a SymmetricPolynomial>,
}

impl<'a> EigenState<'a> {
    pub fn new(
        spec: &'a ModelSpec,
        label: Label,
        poly: Option<&'a SymmetricPolynomial>,
    ) -> Result<Self> {
        label.validate(spec)?;
        check_poly(spec, &label, poly)?;
        Ok(EigenState { spec, label, poly })
    }

    pub fn energy(&self) -> f64 {
        model::energy(self.spec, &self.label).expect("label validated at construction")
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if !sector_contains(self.spec, x, 0.0) {
            return Err(Error::Sector);
        }
        let spec = self.spec;
        let hbar = spec.hbar;
        let c = coordinates(x);
        Ok(match self.label {
            Label::A { m, n, .. } => {
                let b = model::laguerre_order_a(spec);
                let mut val = jastrow_a(x, spec.lambda)
                    * (-c.r2 / (2.0 * hbar)).exp()
                    * hermite(m, c.y_n / hbar.sqrt())?
                    * laguerre(n, b, (c.r2 - c.y_n * c.y_n) / hbar)?;
                if let Some(p) = self.poly {
                    val *= p.eval(x);
                }
                val
            }
            Label::W { level } => {
                let ground = jastrow_a(x, spec.lambda)
                    * w_product_pow(&c.w, spec.alpha())?
                    * (-c.r2 / (2.0 * hbar)).exp();
                if level == 0 {
                    ground
                } else {
                    let e0 = model::energy(spec, &Label::W { level: 0 })? / hbar;
                    (c.r2 - e0 * hbar) * ground
                }
            }
            Label::B { n } => {
                let btil = model::laguerre_order_b(spec);
                jastrow_b(x, spec.lambda, spec.alpha())
                    * (-c.r2 / (2.0 * hbar)).exp()
                    * laguerre(n, btil, c.r2 / hbar)?
            }
        })
    }
}

/// The W-variant first radial excitation with a free constant: (r² - c hbar)
/// times the ground state. The eigenstate value of c is E_0/hbar, confirmed
/// by residual minimization over this family.
pub fn w_excited_family(spec: &ModelSpec, c: f64, x: &[f64]) -> Result<f64> {
    if spec.variant != Variant::W {
        return Err(Error::Domain("family defined for variant W".into()));
    }
    let ground = EigenState::new(spec, Label::W { level: 0 }, None)?;
    let r2: f64 = x.iter().map(|v| v * v).sum();
    Ok((r2 - c * spec.hbar) * ground.eval(x)?)
}

/// The alternative A-variant eigenstate whose radial factor depends on r²
/// alone, with Laguerre order b + 1/2.
pub fn radial_eigenstate(spec: &ModelSpec, n: u32, x: &[f64]) -> Result<f64> {
    if spec.variant != Variant::A {
        return Err(Error::Domain("radial eigenstate defined for variant A".into()));
    }
    if !sector_contains(spec, x, 0.0) {
        return Err(Error::Sector);
    }
    let c = coordinates(x);
    let b = model::laguerre_order_a(spec);
    Ok(jastrow_a(x, spec.lambda)
        * (-c.r2 / (2.0 * spec.hbar)).exp()
        * laguerre(n, b + 0.5, c.r2 / spec.hbar)?)
}

fn superposition_coeff(l: u32) -> f64 {
    let mut fact = 1.0;
    for i in 1..=l {
        fact *= i as f64;
    }
    let sign = if l % 2 == 0 { 1.0 } else { -1.0 };
    sign / (4.0f64.powi(l as i32) * fact)
}

/// The finite sum of (m, n)-eigenstates that reproduces the radial
/// eigenstate: sum_l (-1)^l / (2^{2l} l!) phi_{2l, n-l}.
pub fn radial_superposition_sum(spec: &ModelSpec, n: u32, x: &[f64]) -> Result<f64> {
    let mut acc = 0.0;
    for l in 0..=n {
        let state = EigenState::new(
            spec,
            Label::A {
                m: 2 * l,
                n: n - l,
                k: 0,
            },
            None,
        )?;
        acc += superposition_coeff(l) * state.eval(x)?;
    }
    Ok(acc)
}

/// Coherent counterpart of the radial eigenstate on a squeeze-only
/// trajectory: the closed form with Laguerre order b + 1/2 and the scaled
/// radial argument.
pub fn coherent_radial_closed(
    spec: &ModelSpec,
    n: u32,
    traj: &Trajectory,
    t: f64,
    x: &[f64],
) -> Result<Complex64> {
    if spec.variant != Variant::A {
        return Err(Error::Domain("radial coherent state defined for variant A".into()));
    }
    if traj.has_displacement {
        return Err(Error::Domain(
            "radial coherent state requires a squeeze-only trajectory".into(),
        ));
    }
    if !sector_contains(spec, x, 0.0) {
        return Err(Error::Sector);
    }
    let f = traj.frame(t)?;
    let hbar = spec.hbar;
    let nf = spec.n as f64;
    let c = coordinates(x);
    let s_half = 0.5 * (nf + spec.lambda * nf * (nf - 1.0));
    let b = model::laguerre_order_a(spec);
    let rho = f.rho;
    let sq = Complex64::new(f.omega / (rho * rho), -f.m * f.rho_dot / rho);
    Ok(
        Complex64::from_polar(
            (rho / f.omega.sqrt()).powf(-s_half),
            -(2.0 * n as f64 + s_half) * f.theta,
        ) * (-sq * c.r2 / (2.0 * hbar)).exp()
            * (jastrow_a(x, spec.lambda)
                * laguerre(n, b + 0.5, f.omega * c.r2 / (hbar * rho * rho))?),
    )
}

/// The matching finite sum of coherent states, sum_l (-1)^l/(2^{2l} l!)
/// psi_{2l, n-l}.
pub fn coherent_radial_sum(
    spec: &ModelSpec,
    n: u32,
    traj: &Trajectory,
    t: f64,
    x: &[f64],
) -> Result<Complex64> {
    let mut acc = Complex64::new(0.0, 0.0);
    for l in 0..=n {
        let state = CoherentState::new(
            spec,
            Label::A {
                m: 2 * l,
                n: n - l,
                k: 0,
            },
            traj,
            None,
            DressingNorm::SqrtOmega,
        )?;
        acc += superposition_coeff(l) * state.eval(t, x)?;
    }
    Ok(acc)
}

/// Non-stationary coherent-state evaluator on a classical trajectory.
pub struct CoherentState<'a> {
    pub spec: &'a ModelSpec,
    pub label: Label,
    pub traj: &'a Trajectory,
    pub poly: Option<&'a SymmetricPolynomial>,
    pub dressing_norm: DressingNorm,
}

impl<'a> CoherentState<'a> {
    pub fn new(
        spec: &'a ModelSpec,
        label: Label,
        traj: &'a Trajectory,
        poly: Option<&'a SymmetricPolynomial>,
        dressing_norm: DressingNorm,
    ) -> Result<Self> {
        label.validate(spec)?;
        check_poly(spec, &label, poly)?;
        if spec.variant != Variant::A && traj.has_displacement {
            return Err(Error::Domain(
                "displacement solutions apply to variant A only (squeeze-only elsewhere)".into(),
            ));
        }
        Ok(CoherentState {
            spec,
            label,
            traj,
            poly,
            dressing_norm,
        })
    }

    pub fn energy(&self) -> f64 {
        model::energy(self.spec, &self.label).expect("label validated at construction")
    }

    pub fn eval(&self, t: f64, x: &[f64]) -> Result<Complex64> {
        let frame = self.traj.frame(t)?;
        self.eval_at(&frame, x)
    }

    pub fn eval_at(&self, f: &Frame, x: &[f64]) -> Result<Complex64> {
        if !sector_contains(self.spec, x, 0.0) {
            return Err(Error::Sector);
        }
        let spec = self.spec;
        let hbar = spec.hbar;
        let nf = spec.n as f64;
        let c = coordinates(x);
        let omega = f.omega;
        let rho = f.rho;
        let sq = Complex64::new(omega / (rho * rho), -f.m * f.rho_dot / rho);

        Ok(match self.label {
            Label::A { m, n, k } => {
                let b = model::laguerre_order_a(spec);
                let s_half = 0.5 * (nf + spec.lambda * nf * (nf - 1.0));
                let sqrt_n = nf.sqrt();
                let r2_shift = c.r2 - 2.0 * sqrt_n * c.y_n * f.uf + nf * f.uf * f.uf;
                let mut phase = (nf * f.delta_f + f.m * f.uf_dot * sqrt_n * c.y_n) / hbar
                    - ((m + 2 * n) as f64 + s_half) * f.theta;
                let mut modulus = (rho / omega.sqrt()).powf(-s_half);
                if k > 0 {
                    phase -= k as f64 * f.theta;
                    modulus *= match self.dressing_norm {
                        DressingNorm::SqrtOmega => (rho / omega.sqrt()).powf(-(k as f64)),
                        DressingNorm::OmegaLiteral => (rho / omega).powf(-(k as f64)),
                    };
                }
                let herm = hermite(m, (omega / hbar).sqrt() * (c.y_n - sqrt_n * f.uf) / rho)?;
                let lag = laguerre(n, b, omega * (c.r2 - c.y_n * c.y_n) / (hbar * rho * rho))?;
                let poly = self.poly.map(|p| p.eval(x)).unwrap_or(1.0);
                Complex64::from_polar(modulus, phase)
                    * (-sq * r2_shift / (2.0 * hbar)).exp()
                    * (jastrow_a(x, spec.lambda) * herm * lag * poly)
            }
            Label::W { level } => {
                let e0 = model::energy(spec, &Label::W { level: 0 })? / hbar;
                let base = Complex64::from_polar((rho / omega.sqrt()).powf(-e0), -e0 * f.theta)
                    * (-sq * c.r2 / (2.0 * hbar)).exp()
                    * (jastrow_a(x, spec.lambda) * w_product_pow(&c.w, spec.alpha())?);
                if level == 0 {
                    base
                } else {
                    Complex64::from_polar(1.0, -2.0 * f.theta)
                        * (omega * c.r2 / (rho * rho) - e0 * hbar)
                        * base
                }
            }
            Label::B { n } => {
                let e0 = model::energy(spec, &Label::B { n: 0 })? / hbar;
                let btil = model::laguerre_order_b(spec);
                let lag = laguerre(n, btil, omega * c.r2 / (hbar * rho * rho))?;
                Complex64::from_polar(
                    (rho / omega.sqrt()).powf(-e0),
                    -(e0 + 2.0 * n as f64) * f.theta,
                ) * (-sq * c.r2 / (2.0 * hbar)).exp()
                    * (jastrow_b(x, spec.lambda, spec.alpha()) * lag)
            }
        })
    }
}

/// ((u - iv)/rho)^{E/hbar} along the continuous branch: the phase factor that
/// carries an eigenstate through the unitary transforms.
pub fn evolution_prefactor(energy_over_hbar: f64, frame: &Frame) -> Complex64 {
    Complex64::from_polar(1.0, -energy_over_hbar * frame.theta)
}

/// The squeeze-type transform: (U phi)(x) = (Omega/rho²)^{N/4}
/// exp[(i/2hbar) M (rhodot/rho) sum x_i²] phi(sqrt(Omega) x / rho).
pub fn squeeze_transform<'a>(
    phi: impl Fn(&[f64]) -> Result<Complex64> + 'a,
    frame: Frame,
    hbar: f64,
) -> impl Fn(&[f64]) -> Result<Complex64> + 'a {
    move |x: &[f64]| {
        let n = x.len() as f64;
        let rho = frame.rho;
        let scale = frame.omega.sqrt() / rho;
        let scaled: Vec<f64> = x.iter().map(|xi| scale * xi).collect();
        let r2: f64 = x.iter().map(|xi| xi * xi).sum();
        let amp = (frame.omega / (rho * rho)).powf(n / 4.0);
        let phase = 0.5 * frame.m * frame.rho_dot / rho * r2 / hbar;
        Ok(Complex64::from_polar(amp, phase) * phi(&scaled)?)
    }
}

/// The displacement-type transform: (U phi)(x) = e^{i N delta_f / hbar}
/// exp[(i/hbar) M uf_dot sum x_i] phi(x - u_f).
pub fn displacement_transform<'a>(
    phi: impl Fn(&[f64]) -> Result<Complex64> + 'a,
    frame: Frame,
    hbar: f64,
) -> impl Fn(&[f64]) -> Result<Complex64> + 'a {
    move |x: &[f64]| {
        let n = x.len() as f64;
        let shifted: Vec<f64> = x.iter().map(|xi| xi - frame.uf).collect();
        let sum: f64 = x.iter().sum();
        let phase = (n * frame.delta_f + frame.m * frame.uf_dot * sum) / hbar;
        Ok(Complex64::from_polar(1.0, phase) * phi(&shifted)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classical::{Trajectory, TrajectoryInit, DEFAULT_STEPS_PER_TAU};
    use crate::schedule::Schedule;
    use approx::assert_relative_eq;
    use std::f64::consts::{PI, TAU};

    fn spec_a(n: usize, lambda: f64) -> ModelSpec {
        ModelSpec::new(Variant::A, n, lambda, None, 1.0).unwrap()
    }

    fn squeezed_traj(tau_prime_factor: usize) -> Trajectory {
        Trajectory::explicit(
            Schedule::constant(1.0, PI).unwrap(),
            TrajectoryInit::Explicit {
                u0: 1.0,
                udot0: 0.0,
                v0: 0.0,
                vdot0: 2.0,
                uf0: 0.0,
                ufdot0: 0.0,
            },
            DEFAULT_STEPS_PER_TAU,
            tau_prime_factor,
        )
        .unwrap()
    }

    fn canonical_traj() -> Trajectory {
        Trajectory::explicit(
            Schedule::constant(1.0, TAU).unwrap(),
            TrajectoryInit::Explicit {
                u0: 1.0,
                udot0: 0.0,
                v0: 0.0,
                vdot0: 1.0,
                uf0: 0.0,
                ufdot0: 0.0,
            },
            DEFAULT_STEPS_PER_TAU,
            1,
        )
        .unwrap()
    }

    #[test]
    fn ground_state_value() {
        let spec = spec_a(2, 1.0);
        let st = EigenState::new(&spec, Label::A { m: 0, n: 0, k: 0 }, None).unwrap();
        assert_relative_eq!(st.eval(&[0.0, 1.0]).unwrap(), (-0.5f64).exp(), epsilon = 1e-14);
    }

    #[test]
    fn laguerre_order_for_three_particles() {
        let spec = spec_a(3, 2.0);
        assert_relative_eq!(model::laguerre_order_a(&spec), 6.0);
    }

    #[test]
    fn out_of_sector_eval_errors() {
        let spec = spec_a(2, 1.0);
        let st = EigenState::new(&spec, Label::A { m: 0, n: 0, k: 0 }, None).unwrap();
        assert!(matches!(st.eval(&[1.0, 0.0]), Err(Error::Sector)));
    }

    #[test]
    fn coherent_reduces_to_eigenstate_on_canonical_trajectory() {
        // u = cos, v = sin at t = 0: all prefactors are 1
        let spec = spec_a(2, 1.0);
        let traj = canonical_traj();
        for (m, n) in [(0, 0), (1, 0), (0, 1), (2, 1)] {
            let eig = EigenState::new(&spec, Label::A { m, n, k: 0 }, None).unwrap();
            let coh =
                CoherentState::new(&spec, Label::A { m, n, k: 0 }, &traj, None, DressingNorm::SqrtOmega)
                    .unwrap();
            let x = [-0.7, 0.45];
            let cv = coh.eval(0.0, &x).unwrap();
            assert_relative_eq!(cv.re, eig.eval(&x).unwrap(), epsilon = 1e-12);
            assert!(cv.im.abs() < 1e-12);
        }
    }

    #[test]
    fn modulus_depends_only_on_envelope() {
        // t and t + pi have equal (rho, rhodot) on the squeezed trajectory,
        // and u_f = 0, so |psi| agrees
        let spec = spec_a(2, 1.0);
        let traj = squeezed_traj(2); // cover [0, 2 pi]
        let coh =
            CoherentState::new(&spec, Label::A { m: 1, n: 1, k: 0 }, &traj, None, DressingNorm::SqrtOmega)
                .unwrap();
        let x = [-0.3, 0.9];
        for &t in &[0.3, 1.1, 2.0] {
            let a = coh.eval(t, &x).unwrap().norm();
            let b = coh.eval(t + PI, &x).unwrap().norm();
            assert_relative_eq!(a, b, max_relative = 1e-12);
        }
    }

    #[test]
    fn w_excited_family_reduces_to_level1_at_e0() {
        let spec = ModelSpec::new(Variant::W, 3, 1.0, Some(1.0), 1.0).unwrap();
        let x = [-1.0, 0.2, 0.5];
        let st1 = EigenState::new(&spec, Label::W { level: 1 }, None).unwrap();
        let fam = w_excited_family(&spec, 7.5, &x).unwrap();
        assert_relative_eq!(st1.eval(&x).unwrap(), fam, epsilon = 1e-13);
    }

    #[test]
    fn b_phase_advances_with_branch_argument() {
        // fixed x: arg psi(t) - arg psi(0) = -(E_0/hbar) (theta(t) - theta(0))
        let spec = ModelSpec::new(Variant::B, 2, 1.0, Some(1.0), 1.0).unwrap();
        let traj = squeezed_traj(1);
        let coh = CoherentState::new(&spec, Label::B { n: 0 }, &traj, None, DressingNorm::SqrtOmega)
            .unwrap();
        let x = [0.4, 1.2];
        let e0 = 5.0;
        let mut prev_arg = coh.eval(0.0, &x).unwrap().arg();
        let mut acc = 0.0;
        let steps = 400;
        for i in 1..=steps {
            let t = PI * i as f64 / steps as f64;
            let a = coh.eval(t, &x).unwrap().arg();
            let mut d = a - prev_arg;
            while d > PI {
                d -= TAU;
            }
            while d <= -PI {
                d += TAU;
            }
            acc += d;
            prev_arg = a;
        }
        let frame_end = traj.frame(PI).unwrap();
        let frame_0 = traj.frame(0.0).unwrap();
        let expected = -e0 * (frame_end.theta - frame_0.theta);
        // the gaussian factor is periodic over tau' = pi, so the whole phase
        // advance is the prefactor's
        assert_relative_eq!(acc, expected, max_relative = 1e-9);
    }

    #[test]
    fn radial_superposition_matches_closed_form() {
        let mut seeds = 99991u64;
        let mut next = move || {
            seeds = seeds.wrapping_mul(6364136223846793005).wrapping_add(1);
            (seeds >> 11) as f64 / (1u64 << 53) as f64 * 3.0 - 1.5
        };
        for (n, nn, lam) in [(0u32, 2usize, 1.0), (1, 3, 2.0), (3, 2, 1.0), (4, 3, 1.0)] {
            let spec = spec_a(nn, lam);
            for _ in 0..5 {
                let mut x: Vec<f64> = (0..nn).map(|_| next()).collect();
                x.sort_by(|a, b| a.partial_cmp(b).unwrap());
                for i in 1..nn {
                    if x[i] - x[i - 1] < 0.15 {
                        x[i] = x[i - 1] + 0.15;
                    }
                }
                let closed = radial_eigenstate(&spec, n, &x).unwrap();
                let summed = radial_superposition_sum(&spec, n, &x).unwrap();
                assert_relative_eq!(closed, summed, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn squeeze_transform_is_identity_at_unit_envelope() {
        // rho² = Omega and rhodot = 0 make the transform trivial
        let traj = canonical_traj();
        let frame = traj.frame(0.0).unwrap();
        let phi = |x: &[f64]| Ok(Complex64::new((-x[0] * x[0] - x[1] * x[1]).exp(), 0.0));
        let tr = squeeze_transform(phi, frame, 1.0);
        let x = [0.3, -0.2];
        let got = tr(&x).unwrap();
        assert_relative_eq!(got.re, (-0.13f64).exp(), epsilon = 1e-12);
        assert!(got.im.abs() < 1e-14);
    }

    #[test]
    fn squeeze_transform_of_gaussian() {
        let traj = squeezed_traj(1);
        let frame = traj.frame(0.9).unwrap();
        let hbar = 1.0;
        let phi = move |x: &[f64]| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            Ok(Complex64::new((-r2 / (2.0 * hbar)).exp(), 0.0))
        };
        let tr = squeeze_transform(phi, frame, hbar);
        let x = [0.5, -0.1];
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let expected = Complex64::new(frame.omega / (frame.rho * frame.rho), 0.0)
            .powf(0.5)
            * (-Complex64::new(
                frame.omega / (frame.rho * frame.rho),
                -frame.m * frame.rho_dot / frame.rho,
            ) * r2
                / (2.0 * hbar))
                .exp();
        let got = tr(&x).unwrap();
        assert_relative_eq!(got.re, expected.re, max_relative = 1e-12);
        assert_relative_eq!(got.im, expected.im, max_relative = 1e-12);
    }

    #[test]
    fn displacement_transform_identity_and_phase() {
        let traj = squeezed_traj(1);
        let frame = traj.frame(1.3).unwrap(); // u_f = 0 on this trajectory
        let phi = |x: &[f64]| Ok(Complex64::new(x[0] + 2.0 * x[1], 0.0));
        let tr = displacement_transform(phi, frame, 1.0);
        let x = [0.2, 0.7];
        let got = tr(&x).unwrap();
        assert_relative_eq!(got.re, 1.6, epsilon = 1e-12);
        assert!(got.im.abs() < 1e-14);

        // with displacement: constant input picks up a pure phase and the
        // modulus of any input is |phi(x - u_f)|
        let traj = Trajectory::explicit(
            Schedule::constant(1.0, TAU).unwrap(),
            TrajectoryInit::Explicit {
                u0: 1.0,
                udot0: 0.0,
                v0: 0.0,
                vdot0: 1.0,
                uf0: 0.4,
                ufdot0: 0.0,
            },
            DEFAULT_STEPS_PER_TAU,
            1,
        )
        .unwrap();
        let frame = traj.frame(0.8).unwrap();
        let n = 2.0;
        let ones = displacement_transform(|_| Ok(Complex64::new(1.0, 0.0)), frame, 1.0);
        let got = ones(&x).unwrap();
        let expected_phase = (n * frame.delta_f + frame.m * frame.uf_dot * (x[0] + x[1])) / 1.0;
        assert_relative_eq!(got.arg(), expected_phase, max_relative = 1e-10);
        assert_relative_eq!(got.norm(), 1.0, epsilon = 1e-12);

        let gauss = displacement_transform(
            |y: &[f64]| Ok(Complex64::new((-y.iter().map(|v| v * v).sum::<f64>()).exp(), 0.0)),
            frame,
            1.0,
        );
        let got = gauss(&x).unwrap();
        let shifted: f64 = x.iter().map(|v| (v - frame.uf).powi(2)).sum();
        assert_relative_eq!(got.norm(), (-shifted).exp(), max_relative = 1e-12);
    }

    #[test]
    fn dressing_requires_matching_degree() {
        let spec = spec_a(3, 2.0);
        let p = crate::poly::centered_power_sum(3, 3).unwrap();
        assert!(EigenState::new(&spec, Label::A { m: 0, n: 0, k: 2 }, Some(&p)).is_err());
        assert!(EigenState::new(&spec, Label::A { m: 0, n: 0, k: 3 }, Some(&p)).is_ok());
        assert!(EigenState::new(&spec, Label::A { m: 0, n: 0, k: 3 }, None).is_err());
    }
}
