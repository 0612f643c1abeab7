//! Scenario-specific comparisons against closed forms and identities.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::Matrix2;
use num_complex::Complex64 as C64;

use qcomm::channels::{Channel, ChannelKind, GainChannel, LossChannel};
use qcomm::fock::{number_state, operator_sqrt, Quadrature, QuadratureBasis, SqueezedKets};
use qcomm::info::{capacity_sweep, information_bound, mutual_information, uniform_prior};
use qcomm::povm::{
    gaussian_position_element, gaussian_position_measurement, quadrature_measurement, MeasurementElement, OutcomeLabel,
    SequentialComposition,
};
use qcomm::spin::{
    correlation_operator, direction_scheme, entangled_states, overlap_probability, pauli, sigma_dot,
    singlet_joint_probability, spin_component, spin_state, total_spin_squared, BellState, Direction,
};
use qcomm::wigner::{overlap, squeezed_loss_probability, wigner_of_density, wigner_of_measurement};
use qcomm::{DensityOperator, FockSpace};

use crate::report::Check;
use crate::run::Context;
use crate::scenario::{AnalysisSpec, MeasurementSpec, StateSpec};

pub fn run_analysis(spec: &AnalysisSpec, ctx: &Context) -> Vec<Check> {
    let (name, result) = match spec {
        AnalysisSpec::RelocatedProfile { m, p, peak, half_max } => {
            ("relocated-profile", relocated_profile(ctx.space, *m, *p, *peak, *half_max))
        }
        AnalysisSpec::HeterodyneNoise { tolerance } => ("heterodyne-noise", heterodyne_noise(ctx, *tolerance)),
        AnalysisSpec::GainPhotons { numbers, gains, tolerance, thermal_tolerance } => {
            ("gain-photons", gain_photons(ctx.space, numbers, gains, *tolerance, *thermal_tolerance))
        }
        AnalysisSpec::SqueezedLoss { tolerance, wigner_samples, grid } => {
            ("squeezed-loss", squeezed_loss(ctx, *tolerance, *wigner_samples, grid))
        }
        AnalysisSpec::SequentialSqueezed { etas, work_dim, q_points, p_max, completeness_grid, tolerance } => (
            "sequential-squeezed",
            sequential_squeezed(ctx.space, etas, *work_dim, q_points, *p_max, completeness_grid, *tolerance),
        ),
        AnalysisSpec::SpinIdentities { directions, tolerance } => ("spin", spin_identities(ctx, directions, *tolerance)),
        AnalysisSpec::SingletCorrelations { tolerance } => ("singlet", singlet_correlations(ctx, *tolerance)),
        AnalysisSpec::Information { expect_bits, grid_steps, tolerance } => {
            ("information", information(ctx, *expect_bits, *grid_steps, *tolerance))
        }
        AnalysisSpec::DirectionSweep { sets, tolerance } => ("direction-sweep", direction_sweep(sets, *tolerance)),
    };
    result.unwrap_or_else(|e| vec![Check::failed(format!("{name}:error"), e)])
}

type Checks = qcomm::Result<Vec<Check>>;

fn bad(msg: impl Into<String>) -> qcomm::Error {
    qcomm::Error::Domain(msg.into())
}

/// Index of the value nearest `target` among `idx`.
fn nearest(values: &[f64], idx: impl Iterator<Item = usize>, target: f64) -> Option<usize> {
    idx.min_by(|&a, &b| (values[a] - target).abs().total_cmp(&(values[b] - target).abs()))
}

fn relocated_profile(space: FockSpace, m: usize, p: f64, peak: [usize; 2], half_max: [usize; 2]) -> Checks {
    let fam = qcomm::povm::number_measurement(space);
    let elem = fam.elements().get(m).ok_or(qcomm::Error::OutOfRange { level: m, dim: space.dim() })?;
    let moved = LossChannel::new(p)?.relocate_element(elem)?;
    let f: Vec<f64> = (0..space.dim()).map(|n| moved.op().get(n, n).re).collect();
    let top = f.iter().cloned().fold(0.0, f64::max);
    let mut order: Vec<usize> = (0..f.len()).collect();
    order.sort_by(|&a, &b| f[b].total_cmp(&f[a]).then(a.cmp(&b)));
    let (a, b) = (order[0].min(order[1]), order[0].max(order[1]));
    let tie = (f[a] - f[b]).abs() / top;
    let left = nearest(&f, 0..a, top / 2.0);
    let right = nearest(&f, b + 1..f.len(), top / 2.0);
    // C(n, m) p^m (1−p)^(n−m) summed in logs
    let ln_binom = |n: usize| -> f64 {
        let lf = |k: usize| (1..=k).map(|i| (i as f64).ln()).sum::<f64>();
        lf(n) - lf(m) - lf(n - m) + m as f64 * p.ln() + (n - m) as f64 * (1.0 - p).ln()
    };
    let oracle = (0..f.len()).map(|n| if n < m { 0.0 } else { ln_binom(n).exp() });
    let err = f.iter().zip(oracle).fold(0.0f64, |e, (x, y)| e.max((x - y).abs()));
    Ok(vec![
        Check::within("profile:binomial", err, 1e-12),
        Check::flag("profile:peak", [a, b] == peak && tie < 1e-12, format!("top two at {a} and {b}, relative gap {tie:.2e}")),
        Check::flag(
            "profile:half-max",
            [left, right] == [Some(half_max[0]), Some(half_max[1])],
            format!("nearest half-maximum levels {left:?} and {right:?}"),
        ),
    ])
}

fn coherent_amplitudes(states: &[StateSpec]) -> qcomm::Result<Vec<C64>> {
    states
        .iter()
        .map(|s| match s {
            StateSpec::Coherent { re, im } => Ok(C64::new(*re, *im)),
            other => Err(bad(format!("expected coherent states, found {other:?}"))),
        })
        .collect()
}

fn beta_of(label: &OutcomeLabel) -> qcomm::Result<C64> {
    match label {
        OutcomeLabel::Pair(re, im) => Ok(C64::new(*re, *im)),
        other => Err(bad(format!("expected an amplitude outcome, found {other}"))),
    }
}

fn heterodyne_noise(ctx: &Context, tol: f64) -> Checks {
    let alphas = coherent_amplitudes(&ctx.scenario.states)?;
    let mut checks = Vec::new();
    for t in &ctx.tables {
        let nbar = match &ctx.channels[t.channel_index] {
            None => 0.0,
            Some((spec, _)) if spec.kind == ChannelKind::Noise => spec.param,
            Some(_) => return Err(bad("heterodyne-noise expects noise channels")),
        };
        let v = nbar + 1.0;
        let mut worst = 0.0f64;
        for (alpha, row) in alphas.iter().zip(&t.table.probs) {
            for ((p, w), label) in row.iter().zip(&t.table.outcome_weights).zip(&t.table.outcomes) {
                let beta = beta_of(label)?;
                let expected = (-(beta - alpha).norm_sqr() / v).exp() / (PI * v);
                worst = worst.max((p / w - expected).abs());
            }
        }
        checks.push(Check::within(format!("heterodyne-noise:{}:cut={}", t.channel, t.cut), worst, tol));
    }
    Ok(checks)
}

fn gain_photons(space: FockSpace, numbers: &[usize], gains: &[f64], tol: f64, thermal_tol: f64) -> Checks {
    let mut checks = Vec::new();
    for &g in gains {
        let ch = GainChannel::new(g)?;
        let mut worst = 0.0f64;
        for &n in numbers {
            let rho = DensityOperator::pure(&number_state(space, n)?, n.to_string())?;
            let out = ch.apply(&rho)?;
            worst = worst.max((out.mean_number() - (g * n as f64 + g - 1.0)).abs());
        }
        checks.push(Check::within(format!("gain-photons:G={g}"), worst, tol));
        let vac = DensityOperator::pure(&number_state(space, 0)?, "0")?;
        let out = ch.apply(&vac)?;
        let nbar = g - 1.0;
        let thermal = |n: i32| nbar.powi(n) / (1.0 + nbar).powi(n + 1);
        let err = out.populations().iter().enumerate().fold(0.0f64, |e, (n, p)| e.max((p - thermal(n as i32)).abs()));
        let coherence = (0..space.dim())
            .flat_map(|i| (0..space.dim()).filter(move |&j| j != i).map(move |j| (i, j)))
            .fold(0.0f64, |e, (i, j)| e.max(out.op().get(i, j).norm()));
        checks.push(Check::within(format!("gain-thermal:G={g}"), err.max(coherence), thermal_tol));
    }
    Ok(checks)
}

/// Outcomes whose phase-space overlaps are checked, in this order.
const SAMPLE_BETAS: [(f64, f64); 6] = [(0.0, 0.0), (0.6, 0.3), (-0.9, 0.6), (0.3, -1.2), (1.5, 0.0), (-0.6, -0.6)];

fn squeezed_loss(ctx: &Context, tol: f64, samples: usize, grid: &qcomm::wigner::PhaseSpaceGrid) -> Checks {
    let etas: Vec<f64> = ctx
        .scenario
        .states
        .iter()
        .map(|s| match s {
            StateSpec::Squeezed { eta, q, p } if *q == 0.0 && *p == 0.0 => Ok(*eta),
            other => Err(bad(format!("expected squeezed vacua, found {other:?}"))),
        })
        .collect::<qcomm::Result<_>>()?;
    let fam = ctx.family.as_ref().ok_or_else(|| bad("squeezed-loss needs a measurement"))?;
    if !matches!(ctx.scenario.measurement, Some(MeasurementSpec::Heterodyne { .. })) {
        return Err(bad("squeezed-loss needs a heterodyne measurement"));
    }
    let attenuation = |ci: usize| match &ctx.channels[ci] {
        None => Ok(1.0),
        Some((spec, _)) if spec.kind == ChannelKind::Loss => Ok(1.0 / spec.param),
        Some(_) => Err(bad("squeezed-loss expects loss channels")),
    };
    let mut checks = Vec::new();
    // cell / weight is the density per d²β = dq dp / 2
    for t in &ctx.tables {
        let l = attenuation(t.channel_index)?;
        let mut worst = 0.0f64;
        for (eta, row) in etas.iter().zip(&t.table.probs) {
            for ((p, w), label) in row.iter().zip(&t.table.outcome_weights).zip(&t.table.outcomes) {
                let beta = beta_of(label)?;
                let expected = squeezed_loss_probability(SQRT_2 * beta.im, SQRT_2 * beta.re, *eta, l);
                worst = worst.max((p / w / 2.0 - expected).abs());
            }
        }
        checks.push(Check::within(format!("squeezed-loss:{}:cut={}", t.channel, t.cut), worst, tol));
    }
    let picks: Vec<&MeasurementElement> = SAMPLE_BETAS
        .iter()
        .take(samples)
        .filter_map(|&(re, im)| {
            let target = C64::new(re, im);
            fam.elements().iter().min_by(|a, b| {
                let d = |e: &MeasurementElement| beta_of(e.outcome()).map_or(f64::INFINITY, |x| (x - target).norm());
                d(a).total_cmp(&d(b))
            })
        })
        .collect();
    let sigma_w: Vec<_> = picks.iter().map(|e| wigner_of_measurement(e, grid)).collect::<qcomm::Result<_>>()?;
    for (ci, ch) in ctx.channels.iter().enumerate() {
        let l = attenuation(ci)?;
        let mut worst = 0.0f64;
        for (rho, eta) in ctx.states.iter().zip(&etas) {
            let out = match ch {
                Some((_, c)) => c.apply(rho)?,
                None => rho.clone(),
            };
            let w_rho = wigner_of_density(&out, grid)?;
            for (e, w_sigma) in picks.iter().zip(&sigma_w) {
                let trace = e.probability_density(&out)?;
                let beta = beta_of(e.outcome())?;
                let closed = 2.0 * squeezed_loss_probability(SQRT_2 * beta.im, SQRT_2 * beta.re, *eta, l);
                let ov = overlap(w_sigma, &w_rho)?;
                worst = worst.max((ov - trace).abs()).max((trace - closed).abs());
            }
        }
        let name = ch.as_ref().map_or("none".into(), |(_, c)| c.name());
        checks.push(Check::within(format!("squeezed-loss-wigner:{name}"), worst, tol));
    }
    Ok(checks)
}

fn sequential_squeezed(
    space: FockSpace,
    etas: &[f64],
    work_dim: usize,
    q_points: &qcomm::povm::RealGrid,
    p_max: f64,
    completeness_grid: &qcomm::povm::RealGrid,
    tol: f64,
) -> Checks {
    if work_dim < space.dim() {
        return Err(bad("work_dim must not be below the scenario dimension"));
    }
    let d = space.dim();
    let work = FockSpace::with_dim(work_dim)?;
    let position = QuadratureBasis::new(work, Quadrature::Position);
    let momentum = QuadratureBasis::new(work, Quadrature::Momentum);
    let certified = (d / 2).max(1);
    let mut checks = Vec::new();
    for &eta in etas {
        // roots of the inexact position elements applied to momentum kets
        // on a padded space, then cut to the scenario's levels
        let reach = q_points.nodes().iter().fold(p_max, |m, q| m.max(q.abs()));
        let kets = SqueezedKets::new(space, eta, reach)?;
        let mut worst = 0.0f64;
        let mut compared = 0usize;
        for q_r in q_points.nodes() {
            let root = operator_sqrt(gaussian_position_element(&position, eta, q_r, 1.0).op())?;
            for (k, p_r) in momentum.nodes().iter().enumerate() {
                if p_r.abs() > p_max {
                    continue;
                }
                let v = root.apply(&momentum.kets()[k])?;
                let s = kets.ket(*p_r, q_r);
                for a in 0..d {
                    for b in 0..d {
                        let composed = v.amplitude(a) * v.amplitude(b).conj();
                        let squeezed = s.amplitude(a) * s.amplitude(b).conj() / (2.0 * PI);
                        worst = worst.max((composed - squeezed).norm());
                    }
                }
                compared += 1;
            }
        }
        checks.push(
            Check::within(format!("sequential-squeezed:eta={eta}"), worst, tol)
                .with_detail(format!("{compared} elements on {d} levels from a {work_dim}-level work space")),
        );
        let first = gaussian_position_measurement(space, eta, completeness_grid)?;
        let seq = SequentialComposition::new(first, quadrature_measurement(space, Quadrature::Momentum))?;
        checks.push(
            Check::within(
                format!("sequential-completeness:eta={eta}"),
                seq.completeness_defect(certified),
                qcomm::tolerance::COMPLETENESS_TOL,
            )
            .with_detail(format!("certified on {certified} levels")),
        );
    }
    Ok(checks)
}

fn mat_defect(a: &Matrix2<C64>, b: &Matrix2<C64>) -> f64 {
    (a - b).iter().fold(0.0f64, |m, z| m.max(z.norm()))
}

fn spin_identities(ctx: &Context, dirs: &[Direction], tol: f64) -> Checks {
    let id = Matrix2::<C64>::identity();
    let s = pauli();
    let i = C64::new(0.0, 1.0);
    let mut algebra = 0.0f64;
    for k in 0..3 {
        let (a, b, c) = (s[k], s[(k + 1) % 3], s[(k + 2) % 3]);
        algebra = algebra.max(mat_defect(&(a * a), &id)).max(mat_defect(&(a * b), &(c * i)));
    }
    let mut checks = vec![Check::within("spin:pauli-algebra", algebra, tol)];
    let (mut routes, mut square, mut complete, mut eigen, mut mean) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for r in dirs {
        for r2 in dirs {
            routes = routes.max(overlap_probability(r, r2).discrepancy());
        }
        let sr = spin_component(r);
        square = square.max(mat_defect(&(sr * sr), &(id * C64::new(0.25, 0.0))));
        let (up, down) = (spin_state(r), spin_state(&r.antipode()));
        complete = complete.max(mat_defect(&(up.projector() + down.projector()), &id));
        eigen = eigen.max((sr * up.amplitudes() - up.amplitudes() * C64::new(0.5, 0.0)).norm());
        let m = up.mean_spin();
        let c = r.cartesian();
        mean = mean.max((0..3).fold(0.0f64, |e, k| e.max((m[k] - 0.5 * c[k]).abs())));
    }
    checks.push(Check::within("spin:overlap-routes", routes, tol));
    checks.push(Check::within("spin:component-squared", square, tol));
    checks.push(Check::within("spin:antipodal-completeness", complete, tol));
    checks.push(Check::within("spin:eigenstate", eigen, tol));
    checks.push(Check::within("spin:mean-spin", mean, tol));
    if let (Some(MeasurementSpec::Directions { set }), Some(t)) = (&ctx.scenario.measurement, ctx.tables.first()) {
        let sent: Vec<Direction> = ctx
            .scenario
            .states
            .iter()
            .flat_map(|s| match s {
                StateSpec::Direction { direction } => vec![*direction],
                StateSpec::Directions { set } => set.directions(),
                _ => Vec::new(),
            })
            .collect();
        let read = set.directions();
        let n = read.len() as f64;
        let mut worst = 0.0f64;
        for (r, row) in sent.iter().zip(&t.table.probs) {
            for (r2, p) in read.iter().zip(row) {
                worst = worst.max((p - (1.0 + r2.dot(r)) / n).abs());
            }
        }
        checks.push(Check::within("spin:scheme-table", worst, tol));
    }
    Ok(checks)
}

fn singlet_correlations(ctx: &Context, tol: f64) -> Checks {
    let states = entangled_states();
    let mut signs = 0.0f64;
    for (b, psi) in &states {
        for axis in 0..3 {
            let lambda = psi.eigenvalue(&correlation_operator(axis), tol).map_or(f64::INFINITY, |l| l);
            signs = signs.max((lambda - b.correlation_signs()[axis]).abs());
        }
    }
    let eig = |b: BellState, op| states[&b].eigenvalue(&op, tol).map_or(f64::INFINITY, |l| l);
    let dot = (eig(BellState::PsiMinus, sigma_dot()) + 3.0).abs().max((eig(BellState::PsiPlus, sigma_dot()) - 1.0).abs());
    let mut total = eig(BellState::PsiMinus, total_spin_squared()).abs();
    for b in [BellState::PsiPlus, BellState::PsiS, BellState::PsiD] {
        total = total.max((eig(b, total_spin_squared()) - 2.0).abs());
    }
    let z = Direction::z();
    let probes = [(z, z), (z, z.antipode()), (z, Direction::x()), (Direction::y(), Direction::new(1.0, 2.0)?)];
    let mut joint = 0.0f64;
    for (r, r2) in &probes {
        joint = joint.max((singlet_joint_probability(r, r2) - (1.0 - r.dot(r2)) / 4.0).abs());
    }
    let edge = singlet_joint_probability(&z, &z).abs().max((singlet_joint_probability(&z, &z.antipode()) - 0.5).abs());
    let mut checks = vec![
        Check::within("singlet:sign-table", signs, tol),
        Check::within("singlet:sigma-dot", dot, tol),
        Check::within("singlet:total-spin", total, tol),
        Check::within("singlet:joint-formula", joint, tol),
        Check::within("singlet:parallel-antiparallel", edge, tol),
    ];
    if let (Some(MeasurementSpec::PairDirections { a, b }), Some(t)) = (&ctx.scenario.measurement, ctx.tables.first()) {
        let c = a.dot(b);
        let expected = [(1.0 - c) / 4.0, (1.0 + c) / 4.0, (1.0 + c) / 4.0, (1.0 - c) / 4.0];
        if let Some(row) = t.table.settings.iter().position(|s| s == BellState::PsiMinus.name()) {
            let worst = t.table.probs[row].iter().zip(expected).fold(0.0f64, |m, (p, e)| m.max((p - e).abs()));
            checks.push(Check::within("singlet:table-row", worst, tol));
        }
    }
    Ok(checks)
}

fn information(ctx: &Context, expect: Option<f64>, grid_steps: Option<usize>, tol: f64) -> Checks {
    let mut checks = Vec::new();
    for t in ctx.tables.iter().filter(|t| t.cut_index == 0) {
        let tag = format!("{}:cut={}", t.channel, t.cut);
        let prior = uniform_prior(t.table.n_settings());
        let bits = mutual_information(&t.table, &prior)?;
        let bound = information_bound(&t.table);
        checks.push(Check::flag(format!("information-bounds:{tag}"), (-tol..=bound + tol).contains(&bits), format!("{bits} bits, bound {bound}")));
        if let Some(e) = expect {
            checks.push(Check::within(format!("information:{tag}"), (bits - e).abs(), tol).with_detail(format!("{bits} bits")));
        }
        let cap = capacity_sweep(&t.table, grid_steps)?;
        checks.push(Check::flag(
            format!("capacity-converged:{tag}"),
            cap.ascent.converged && cap.ascent.capacity >= bits - tol && cap.ascent.capacity <= bound + tol,
            format!("{} bits after {} iterations", cap.ascent.capacity, cap.ascent.iterations),
        ));
        if let Some(d) = cap.disagreement {
            checks.push(Check::within(format!("capacity-grid:{tag}"), d, 1e-6));
        }
    }
    Ok(checks)
}

fn direction_sweep(sets: &[crate::scenario::DirectionSet], tol: f64) -> Checks {
    let mut checks = Vec::new();
    let mut best = 0.0f64;
    for set in sets {
        let dirs = set.directions();
        let scheme = direction_scheme(&dirs)?;
        let table = qcomm::info::build_table(&scheme.states, &scheme.measurement)?;
        let bits = mutual_information(&table, &uniform_prior(dirs.len()))?;
        best = best.max(bits);
        let name = match set {
            crate::scenario::DirectionSet::Tetrahedron => "direction-sweep:tetrahedron".to_string(),
            _ => format!("direction-sweep:N={}", dirs.len()),
        };
        let check = if dirs.len() == 2 {
            Check::within(name, (bits - 1.0).abs(), tol)
        } else {
            Check::flag(name, bits < 1.0 - tol, format!("{bits} bits"))
        };
        checks.push(check.with_detail(format!("{bits} bits")));
    }
    checks.push(Check::within("direction-sweep:maximum", (best - 1.0).abs(), tol));
    Ok(checks)
}
