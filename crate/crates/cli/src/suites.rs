//! Validation suites: each case checks one oracle against its tolerance and
//! lands as a row of the validation report.

use calogero::phase::{
    default_probes, derivative_identity_defect_w, overlap_derivative_closed_a, simpson,
};
use calogero::poly::centered_power_sum;
use calogero::quad::{
    eigen_residual, inner_product, schrodinger_residual, time_derivative_overlap, Envelope,
    Integrator,
};
use calogero::wavefn::{
    coherent_radial_closed, coherent_radial_sum, displacement_transform, evolution_prefactor,
    radial_eigenstate, radial_superposition_sum, squeeze_transform, CoherentState, DressingNorm,
    EigenState,
};
use calogero::{energy, Error, Label, ModelSpec, Scenario, Trajectory, Variant};
use num_complex::Complex64;
#[derive(Debug, Clone, serde::Serialize)]
pub struct CaseResult {
    pub suite: String,
    pub case: String,
    pub metric: String,
    pub value: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Raw overlap values accumulated by the orthogonality suite, emitted in the
/// wire format of the integration layer.
#[derive(Debug, Clone, serde::Serialize)]
pub struct NamedOverlap {
    pub pair: String,
    #[serde(flatten)]
    pub report: calogero::quad::OverlapReport,
}

impl CaseResult {
    fn below(suite: &str, case: String, metric: &str, value: f64, tolerance: f64) -> Self {
        CaseResult {
            suite: suite.into(),
            case,
            metric: metric.into(),
            value,
            tolerance,
            pass: value < tolerance,
        }
    }
}

fn state_labels(spec: &ModelSpec) -> Vec<Label> {
    match spec.variant {
        Variant::A => {
            let mut v = Vec::new();
            for m in 0..=2 {
                for n in 0..=2 {
                    v.push(Label::A { m, n, k: 0 });
                }
            }
            v
        }
        Variant::W => vec![Label::W { level: 0 }, Label::W { level: 1 }],
        Variant::B => (0..=2).map(|n| Label::B { n }).collect(),
    }
}

fn label_name(label: &Label) -> String {
    match label {
        Label::A { m, n, k: 0 } => format!("m{m}_n{n}"),
        Label::A { m, n, k } => format!("m{m}_n{n}_k{k}"),
        Label::W { level } => format!("level{level}"),
        Label::B { n } => format!("n{n}"),
    }
}

pub fn run_suites(
    scenario: &Scenario,
) -> calogero::Result<(Vec<CaseResult>, Vec<NamedOverlap>)> {
    let spec = scenario.model_spec()?;
    let schedule = scenario.schedule()?;
    let traj = scenario.trajectory()?;
    let mut out = Vec::new();
    let mut overlaps = Vec::new();
    if scenario.suites.is_empty() {
        return Err(Error::Config("no suites requested".into()));
    }
    for suite in &scenario.suites {
        match suite.as_str() {
            "eigen" => suite_eigen(scenario, &spec, &mut out)?,
            "schrodinger" => suite_schrodinger(scenario, &spec, &schedule, &traj, &mut out)?,
            "unitary" => suite_unitary(scenario, &spec, &traj, &mut out)?,
            "orthogonality" => {
                suite_orthogonality(scenario, &spec, &traj, &mut out, &mut overlaps)?
            }
            "superposition" => suite_superposition(scenario, &spec, &traj, &mut out)?,
            "derivative" => suite_derivative(scenario, &spec, &traj, &mut out)?,
            other => return Err(Error::Config(format!("unknown suite `{other}`"))),
        }
    }
    Ok((out, overlaps))
}

fn eigen_fn<'a>(
    state: &'a EigenState<'a>,
) -> impl Fn(&[f64]) -> calogero::Result<Complex64> + Sync + 'a {
    move |x: &[f64]| Ok(Complex64::new(state.eval(x)?, 0.0))
}

fn suite_eigen(
    scenario: &Scenario,
    spec: &ModelSpec,
    out: &mut Vec<CaseResult>,
) -> calogero::Result<()> {
    let tol = scenario.tolerance("eigen_residual");
    for label in state_labels(spec) {
        let state = EigenState::new(spec, label, None)?;
        let f = eigen_fn(&state);
        let r = eigen_residual(spec, &f, state.energy(), &scenario.quadrature, None)?;
        out.push(CaseResult::below(
            "eigen",
            format!("residual_{}", label_name(&label)),
            "eigen_residual",
            r,
            tol,
        ));
    }
    // finite-difference convergence order measured in the
    // truncation-dominated step regime
    let label = state_labels(spec)[0];
    let state = EigenState::new(spec, label, None)?;
    let f = eigen_fn(&state);
    let coarse = eigen_residual(spec, &f, state.energy(), &scenario.quadrature, Some(4e-2))?;
    let fine = eigen_residual(spec, &f, state.energy(), &scenario.quadrature, Some(2e-2))?;
    let order = (coarse / fine).log2();
    out.push(CaseResult::below(
        "eigen",
        "convergence_order".into(),
        "order_deviation",
        (order - 2.0).abs(),
        0.2,
    ));
    Ok(())
}

fn suite_schrodinger(
    scenario: &Scenario,
    spec: &ModelSpec,
    schedule: &calogero::Schedule,
    traj: &Trajectory,
    out: &mut Vec<CaseResult>,
) -> calogero::Result<()> {
    let tol = scenario.tolerance("schrodinger_residual");
    let t = 0.45 * traj.tau_prime;
    for label in state_labels(spec) {
        let state = CoherentState::new(spec, label, traj, None, DressingNorm::SqrtOmega)?;
        let r = schrodinger_residual(spec, schedule, &state, t, &scenario.quadrature, None)?;
        out.push(CaseResult::below(
            "schrodinger",
            format!("residual_{}", label_name(&label)),
            "schrodinger_residual",
            r,
            tol,
        ));
    }
    if spec.variant == Variant::A && spec.n >= 3 {
        dressing_cases(scenario, spec, traj, out)?;
    }
    Ok(())
}

/// The two dressing-prefactor normalizations differ by the time-constant
/// Omega^{k/2}, so both satisfy the equation of motion and the residual
/// cannot separate them; agreement with the residual-passing transform
/// composition does.
fn dressing_cases(
    scenario: &Scenario,
    spec: &ModelSpec,
    traj: &Trajectory,
    out: &mut Vec<CaseResult>,
) -> calogero::Result<()> {
    let owned;
    let poly = match scenario.polynomial()? {
        Some(p) => {
            owned = p;
            &owned
        }
        None => {
            owned = centered_power_sum(spec.n, 3)?;
            &owned
        }
    };
    let label = Label::A {
        m: 0,
        n: 0,
        k: poly.degree(),
    };
    let e_over = energy(spec, &label)? / spec.hbar;
    let t = 0.35 * traj.tau_prime;
    let frame = traj.frame(t)?;
    let eig = EigenState::new(spec, label, Some(poly))?;
    let hbar = spec.hbar;
    let squeezed = squeeze_transform(
        move |x: &[f64]| Ok(Complex64::new(eig.eval(x)?, 0.0)),
        frame,
        hbar,
    );
    let composed = displacement_transform(squeezed, frame, hbar);
    let probes = default_probes(spec, 8, scenario.quadrature.seed ^ 0xd1);
    let mut defects = [0.0f64; 2];
    for (slot, norm) in [DressingNorm::SqrtOmega, DressingNorm::OmegaLiteral]
        .iter()
        .enumerate()
    {
        let state = CoherentState::new(spec, label, traj, Some(poly), *norm)?;
        for x in &probes {
            let lhs = evolution_prefactor(e_over, &frame) * composed(x)?;
            let rhs = state.eval_at(&frame, x)?;
            defects[slot] = defects[slot].max((lhs - rhs).norm() / rhs.norm());
        }
    }
    let tol = scenario.tolerance("composition_defect");
    out.push(CaseResult::below(
        "schrodinger",
        "dressing_sqrt_omega".into(),
        "composition_defect",
        defects[0],
        tol,
    ));
    // here the gap must EXCEED the threshold: only one normalization can
    // agree with the evolution route
    out.push(CaseResult {
        suite: "schrodinger".into(),
        case: "dressing_literal_separation".into(),
        metric: "composition_defect_gap".into(),
        value: defects[1] - defects[0],
        tolerance: 1e-3,
        pass: defects[1] - defects[0] > 1e-3,
    });
    Ok(())
}

fn suite_unitary(
    scenario: &Scenario,
    spec: &ModelSpec,
    traj: &Trajectory,
    out: &mut Vec<CaseResult>,
) -> calogero::Result<()> {
    let tol = scenario.tolerance("composition_defect");
    let probes = default_probes(spec, 6, scenario.quadrature.seed ^ 0xa7);
    for label in state_labels(spec) {
        let coh = CoherentState::new(spec, label, traj, None, DressingNorm::SqrtOmega)?;
        let e_over = coh.energy() / spec.hbar;
        let mut worst: f64 = 0.0;
        for ti in 0..4 {
            let t = traj.tau_prime * (ti as f64 + 0.4) / 4.5;
            let frame = traj.frame(t)?;
            let eig = EigenState::new(spec, label, None)?;
            let hbar = spec.hbar;
            let squeezed = squeeze_transform(
                move |x: &[f64]| Ok(Complex64::new(eig.eval(x)?, 0.0)),
                frame,
                hbar,
            );
            let composed = displacement_transform(squeezed, frame, hbar);
            for x in &probes {
                let lhs = evolution_prefactor(e_over, &frame) * composed(x)?;
                let rhs = coh.eval_at(&frame, x)?;
                worst = worst.max((lhs - rhs).norm() / rhs.norm());
            }
        }
        out.push(CaseResult::below(
            "unitary",
            format!("composition_{}", label_name(&label)),
            "composition_defect",
            worst,
            tol,
        ));
    }
    Ok(())
}

fn overlap(
    scenario: &Scenario,
    spec: &ModelSpec,
    traj: &Trajectory,
    a: &Label,
    b: &Label,
    t: f64,
    method: Option<calogero::Method>,
) -> calogero::Result<calogero::OverlapResult> {
    let sa = CoherentState::new(spec, *a, traj, None, DressingNorm::SqrtOmega)?;
    let sb = CoherentState::new(spec, *b, traj, None, DressingNorm::SqrtOmega)?;
    let frame = traj.frame(t)?;
    let e = energy(spec, a)?.max(energy(spec, b)?);
    let env = Envelope::on_trajectory(spec.hbar, e, traj, &frame);
    let mut quad = scenario.quadrature.clone();
    if let Some(m) = method {
        quad.method = m;
    }
    let integrator = Integrator::new(spec, &quad, env)?;
    inner_product(
        &integrator,
        &|x: &[f64]| sa.eval_at(&frame, x),
        &|x: &[f64]| sb.eval_at(&frame, x),
    )
}

fn suite_orthogonality(
    scenario: &Scenario,
    spec: &ModelSpec,
    traj: &Trajectory,
    out: &mut Vec<CaseResult>,
    overlaps: &mut Vec<NamedOverlap>,
) -> calogero::Result<()> {
    let tol = scenario.tolerance("orthogonality");
    let t = 0.3 * traj.tau_prime;
    let labels: Vec<Label> = match spec.variant {
        Variant::A => [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
            .iter()
            .map(|(m, n)| Label::A { m: *m, n: *n, k: 0 })
            .collect(),
        Variant::W => vec![Label::W { level: 0 }, Label::W { level: 1 }],
        Variant::B => (0..=2).map(|n| Label::B { n }).collect(),
    };
    // the gram tolerance is a tensor-rule contract: Monte Carlo noise floors
    // orders of magnitude above it
    if spec.n > 3 {
        return Err(Error::Config(
            "orthogonality gram check needs the tensor rule (N <= 3)".into(),
        ));
    }
    let gram_method = Some(calogero::Method::Tensor);
    let mut norms = vec![0.0; labels.len()];
    let mut max_imag: f64 = 0.0;
    for (i, l) in labels.iter().enumerate() {
        let ov = overlap(scenario, spec, traj, l, l, t, gram_method)?;
        norms[i] = ov.value.re;
        max_imag = max_imag.max(ov.value.im.abs() / ov.value.re.abs());
    }
    out.push(CaseResult::below(
        "orthogonality",
        "self_overlap_imaginary".into(),
        "relative_imaginary_part",
        max_imag,
        1e-12,
    ));
    let mut tensor_quad = scenario.quadrature.clone();
    tensor_quad.method = calogero::Method::Tensor;
    let mut max_off: f64 = 0.0;
    for i in 0..labels.len() {
        for j in 0..i {
            let ov = overlap(scenario, spec, traj, &labels[i], &labels[j], t, gram_method)?;
            max_off = max_off.max(ov.value.norm() / (norms[i] * norms[j]).sqrt());
            overlaps.push(NamedOverlap {
                pair: format!("{}|{}", label_name(&labels[j]), label_name(&labels[i])),
                report: ov.report(&tensor_quad, spec.n),
            });
        }
    }
    out.push(CaseResult::below(
        "orthogonality",
        "gram_off_diagonal".into(),
        "relative_mass",
        max_off,
        tol,
    ));
    // cross-method agreement on one pair, within combined three-sigma bars
    if spec.n <= 3 {
        let (a, b) = (&labels[0], &labels[1]);
        let tv = overlap(scenario, spec, traj, a, b, t, Some(calogero::Method::Tensor))?;
        let mv = overlap(scenario, spec, traj, a, b, t, Some(calogero::Method::MonteCarlo))?;
        let scale = 3.0 * (mv.stderr + tv.stderr) + 1e-12;
        out.push(CaseResult::below(
            "orthogonality",
            "tensor_vs_montecarlo".into(),
            "three_sigma_ratio",
            (tv.value - mv.value).norm() / scale,
            1.0,
        ));
        let mut mc_quad = scenario.quadrature.clone();
        mc_quad.method = calogero::Method::MonteCarlo;
        overlaps.push(NamedOverlap {
            pair: format!(
                "{}|{} (montecarlo)",
                label_name(&labels[0]),
                label_name(&labels[2])
            ),
            report: mv.report(&mc_quad, spec.n),
        });
    }
    Ok(())
}

fn suite_superposition(
    scenario: &Scenario,
    spec: &ModelSpec,
    traj: &Trajectory,
    out: &mut Vec<CaseResult>,
) -> calogero::Result<()> {
    if spec.variant != Variant::A {
        return Err(Error::Config(
            "superposition suite applies to variant A".into(),
        ));
    }
    let tol = scenario.tolerance("superposition");
    for n in 0..=4u32 {
        let probes = default_probes(spec, 20, scenario.quadrature.seed ^ (0xb0 + n as u64));
        let mut ratios = Vec::with_capacity(probes.len());
        for x in &probes {
            ratios.push(radial_eigenstate(spec, n, x)? / radial_superposition_sum(spec, n, x)?);
        }
        let spread = ratios
            .iter()
            .map(|r| (r - ratios[0]).abs())
            .fold(0.0f64, f64::max)
            / ratios[0].abs();
        out.push(CaseResult::below(
            "superposition",
            format!("eigen_ratio_spread_n{n}"),
            "ratio_spread",
            spread,
            tol,
        ));
        out.push(CaseResult {
            suite: "superposition".into(),
            case: format!("recorded_constant_n{n}"),
            metric: "ratio".into(),
            value: ratios[0],
            tolerance: 1.0,
            pass: (ratios[0] - 1.0).abs() <= 1.0,
        });
    }
    if !traj.has_displacement {
        let t = 0.45 * traj.tau_prime;
        for n in 0..=2u32 {
            let probes = default_probes(spec, 8, scenario.quadrature.seed ^ (0xc0 + n as u64));
            let mut ratios = Vec::with_capacity(probes.len());
            for x in &probes {
                let closed = coherent_radial_closed(spec, n, traj, t, x)?;
                let summed = coherent_radial_sum(spec, n, traj, t, x)?;
                ratios.push(closed / summed);
            }
            let spread = ratios
                .iter()
                .map(|r| (r - ratios[0]).norm())
                .fold(0.0f64, f64::max)
                / ratios[0].norm();
            out.push(CaseResult::below(
                "superposition",
                format!("coherent_ratio_spread_n{n}"),
                "ratio_spread",
                spread,
                tol,
            ));
        }
    }
    Ok(())
}

fn suite_derivative(
    scenario: &Scenario,
    spec: &ModelSpec,
    traj: &Trajectory,
    out: &mut Vec<CaseResult>,
) -> calogero::Result<()> {
    let tol = scenario.tolerance("derivative");
    let t = 0.45 * traj.tau_prime;
    match spec.variant {
        Variant::A => {
            let label = Label::A { m: 1, n: 0, k: 0 };
            let state = CoherentState::new(spec, label, traj, None, DressingNorm::SqrtOmega)?;
            let lhs =
                time_derivative_overlap(spec, &state, t, &scenario.quadrature)? / Complex64::i();
            let rhs = overlap_derivative_closed_a(spec, &label, traj, t)?;
            out.push(CaseResult::below(
                "derivative",
                "overlap_identity_m1_n0".into(),
                "defect",
                (lhs - rhs).norm(),
                tol,
            ));
            // the imaginary part of the closed identity integrates to zero
            // over the period (unit-norm evolution)
            let nodes = 512;
            let h = traj.tau_prime / nodes as f64;
            let vals: Vec<f64> = (0..=nodes)
                .map(|i| {
                    overlap_derivative_closed_a(spec, &label, traj, i as f64 * h).map(|v| v.im)
                })
                .collect::<calogero::Result<_>>()?;
            out.push(CaseResult::below(
                "derivative",
                "imaginary_period_integral".into(),
                "integral",
                simpson(&vals, h).abs(),
                tol,
            ));
        }
        Variant::W => {
            let probes = default_probes(spec, 10, scenario.quadrature.seed ^ 0xe1);
            let d = derivative_identity_defect_w(spec, traj, t, &probes, &scenario.quadrature)?;
            out.push(CaseResult::below(
                "derivative",
                "level_relation_pointwise".into(),
                "defect",
                d,
                tol,
            ));
        }
        Variant::B => {
            return Err(Error::Config(
                "derivative suite applies to variants A and W".into(),
            ))
        }
    }
    Ok(())
}
