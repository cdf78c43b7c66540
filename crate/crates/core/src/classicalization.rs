//! Classicality threshold, classicalization times and the experiments that
//! probe the arrow of time, frame consistency and robustness.

use serde::Serialize;

use crate::density::DensityOperator;
use crate::diagnostics::{arrow_functional, coherence_u, coherence_umax, cohesion_index, population_entropy, DiagnosticOptions};
use crate::dynamics::{
    check_doubly_stochastic, dephasing_rates, evolve_analytic, evolve_numeric, mix_populations,
    perturbed_generator, GkslGenerator, RateMatrix, Trajectory, DEFAULT_SELECTIVITY_TOL,
};
use crate::error::{Error, Result};
use crate::io::{fmt_opt, fmt_sig};
use crate::irb::{construct_irb, to_irb, BlockPartition};
use crate::matrix::{CMatrix, RMatrix};
use crate::scalar::{lit, to_f64, tol, Real};

fn check_epsilon<T: Real>(epsilon: T) -> Result<()> {
    if epsilon > T::zero() && epsilon < T::one() {
        Ok(())
    } else {
        Err(Error::BadEpsilon { epsilon: to_f64(epsilon) })
    }
}

/// `(1 / 2Γ_min) ln(U(0) / (ε² U_max(0)))`, or `0` when the state is already
/// below threshold.
///
/// Under pure dephasing this is the exact crossing time when a single rate
/// is active, and the latest possible crossing time otherwise.
pub fn tcl_bound<T: Real>(u0: T, umax0: T, gamma_min: T, epsilon: T) -> Result<T> {
    check_epsilon(epsilon)?;
    if !(gamma_min > T::zero()) {
        return Err(Error::ZeroRate);
    }
    if !(umax0 > T::zero()) {
        return Err(Error::UmaxDegenerate { umax: to_f64(umax0) });
    }
    let floor = epsilon * epsilon * umax0;
    if u0 <= floor {
        return Ok(T::zero());
    }
    Ok((u0 / floor).ln() / (lit::<T>(2.0) * gamma_min))
}

/// Crossing time of a qubit with coherence `n0` and population `a` under
/// projector dephasing with rates `γ₁, γ₂`:
/// `t_cl = (2 / (γ₁ + γ₂)) ln(|n0| / (ε √(a(1 − a))))`.
pub fn tcl_qubit<T: Real>(n0: T, a: T, gamma1: T, gamma2: T, epsilon: T) -> Result<T> {
    check_epsilon(epsilon)?;
    if !(a > T::zero() && a < T::one()) {
        return Err(Error::InvalidArgument(format!("population must lie in (0, 1), got {a}")));
    }
    let total = gamma1 + gamma2;
    if !(total > T::zero()) {
        return Err(Error::ZeroRate);
    }
    let threshold = epsilon * (a * (T::one() - a)).sqrt();
    if n0.abs() <= threshold {
        return Err(Error::AlreadyClassical);
    }
    Ok(lit::<T>(2.0) / total * (n0.abs() / threshold).ln())
}

/// Measured and predicted crossing of `P_c ≤ ε`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ClassicalityVerdict<T> {
    pub epsilon: T,
    /// Time after the first sample at which `P_c` reaches `ε`; `None` if
    /// never reached on the trajectory.
    pub t_cl_measured: Option<T>,
    /// Closed-form bound from the initial sample, when `Γ_min` is known.
    pub t_cl_bound: Option<T>,
    /// `Γ_min` used for the bound.
    pub gamma_min: Option<T>,
}

/// First time `P_c(t) ≤ ε`, interpolated linearly in `ln P_c` between the
/// bracketing samples.
pub fn detect_threshold_crossing<T: Real>(traj: &Trajectory<T>, epsilon: T) -> Result<ClassicalityVerdict<T>> {
    check_epsilon(epsilon)?;
    if traj.is_empty() {
        return Err(Error::InvalidArgument("empty trajectory".into()));
    }
    let pcs = traj
        .reports
        .iter()
        .enumerate()
        .map(|(index, r)| r.p_c.ok_or(Error::UndefinedPc { index }))
        .collect::<Result<Vec<T>>>()?;
    let t0 = traj.times[0];
    let measured = pcs.iter().position(|&p| p <= epsilon).map(|k| {
        if k == 0 {
            return T::zero();
        }
        let (t1, t2) = (traj.times[k - 1], traj.times[k]);
        let (p1, p2) = (pcs[k - 1], pcs[k]);
        let frac = if p2 > T::zero() {
            (p1.ln() - epsilon.ln()) / (p1.ln() - p2.ln())
        } else {
            (p1 - epsilon) / (p1 - p2)
        };
        t1 + frac * (t2 - t1) - t0
    });
    let first = &traj.reports[0];
    let bound = traj.gamma_min.and_then(|g| tcl_bound(first.u, first.u_max, g, epsilon).ok());
    Ok(ClassicalityVerdict { epsilon, t_cl_measured: measured, t_cl_bound: bound, gamma_min: traj.gamma_min })
}

/// Crossing times over a list of thresholds.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpsilonScan<T> {
    pub rows: Vec<ClassicalityVerdict<T>>,
    /// Least-squares slope of `t_cl` against `ln(1/ε)` over the rows that
    /// crossed; needs at least two of them.
    pub slope: Option<T>,
}

impl<T: Real> EpsilonScan<T> {
    pub const CSV_HEADER: &'static str = "epsilon,t_cl_measured,t_cl_bound,slope";

    /// One row per threshold; the fitted slope is repeated on every row.
    pub fn to_csv(&self) -> String {
        let mut out = format!("{}\n", Self::CSV_HEADER);
        for r in &self.rows {
            let measured = r.t_cl_measured.map_or_else(|| "not reached".to_string(), |t| fmt_sig(to_f64(t)));
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt_sig(to_f64(r.epsilon)),
                measured,
                fmt_opt(r.t_cl_bound),
                fmt_opt(self.slope)
            ));
        }
        out
    }
}

/// Ordinary least-squares slope of `ys` against `xs`.
pub fn least_squares_slope<T: Real>(xs: &[T], ys: &[T]) -> Option<T> {
    if xs.len() < 2 || xs.len() != ys.len() {
        return None;
    }
    let n = lit::<T>(xs.len() as f64);
    let mx = xs.iter().copied().sum::<T>() / n;
    let my = ys.iter().copied().sum::<T>() / n;
    let sxy: T = xs.iter().zip(ys).map(|(&x, &y)| (x - mx) * (y - my)).sum();
    let sxx: T = xs.iter().map(|&x| (x - mx) * (x - mx)).sum();
    (sxx > T::zero()).then(|| sxy / sxx)
}

/// [`detect_threshold_crossing`] for each of a strictly decreasing list of
/// thresholds, with the fitted `ln(1/ε)` slope.
pub fn epsilon_scan<T: Real>(traj: &Trajectory<T>, epsilons: &[T]) -> Result<EpsilonScan<T>> {
    if epsilons.is_empty() {
        return Err(Error::InvalidArgument("at least one threshold is required".into()));
    }
    if epsilons.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidArgument("thresholds must be strictly decreasing".into()));
    }
    let rows = epsilons.iter().map(|&e| detect_threshold_crossing(traj, e)).collect::<Result<Vec<_>>>()?;
    let (xs, ys): (Vec<T>, Vec<T>) =
        rows.iter().filter_map(|r| r.t_cl_measured.map(|t| (-r.epsilon.ln(), t))).unzip();
    Ok(EpsilonScan { slope: least_squares_slope(&xs, &ys), rows })
}

/// Outcome of propagating a state in its own initial IRB frame and checking
/// how far the real part drifts away from zero.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FrameConsistencyReport<T> {
    /// `max (|S_ij(t)| − |N_ij(0)| e^{−Γ_ij t})` over samples and active
    /// pairs, clipped below at zero.
    pub max_bound_violation: T,
    /// Smallest gap between active populations.
    pub population_gap: Option<T>,
    /// True when the gap is below `1e-9`; the angle bound is then taken
    /// between degenerate blocks only.
    pub degenerate: bool,
    pub blocks: BlockPartition,
    /// Gap between distinct blocks used for the angle bound.
    pub block_gap: Option<T>,
    /// `max_ij |S_ij(t)| / g` per sample over damped inter-block pairs.
    pub angle_bounds: Vec<T>,
    /// `max_ij |ρ_ij(t)| / g` per sample over the same pairs; dominates the
    /// angle bound without its phase oscillation.
    pub angle_envelope: Vec<T>,
    pub max_angle_bound: Option<T>,
    /// Excess of the angle bound over `(max |N_ij(0)| / g) e^{−Γ_min t}`.
    pub max_decay_violation: T,
    /// Minus the least-squares slope of `ln` of the envelope.
    pub envelope_decay_rate: Option<T>,
    pub gamma_min: Option<T>,
}

impl<T: Real> FrameConsistencyReport<T> {
    /// Fails with [`Error::DegenerateGap`] when no per-vector angle bound
    /// exists for this state.
    pub fn require_nondegenerate(&self) -> Result<()> {
        match self.population_gap {
            Some(g) if self.degenerate => Err(Error::DegenerateGap { gap: to_f64(g) }),
            _ => Ok(()),
        }
    }
}

const GAP_FLOOR: f64 = 1e-9;

/// Evolves `rho0` under `gen` in the fixed IRB frame of `rho0` and checks
/// `|Re ρ_ij(t)| ≤ |N_ij(0)| e^{−Γ_ij t}` on `samples` points of `[0, horizon]`.
pub fn frame_consistency_experiment<T: Real>(
    rho0: &DensityOperator<T>,
    gen: &GkslGenerator<T>,
    horizon: T,
    samples: usize,
) -> Result<FrameConsistencyReport<T>> {
    if samples < 2 || !(horizon > T::zero()) {
        return Err(Error::InvalidArgument("need a positive horizon and at least two samples".into()));
    }
    let opts = DiagnosticOptions::default();
    let frame = construct_irb(rho0, opts.delta_support, opts.delta_degen)?;
    let gen_o = gen.to_frame(&frame)?;
    let sel_tol = lit::<T>(DEFAULT_SELECTIVITY_TOL) * gen_o.norm().max(T::one());
    let rates = dephasing_rates(&gen_o, sel_tol)?;
    let rho0_o = to_irb(rho0, &frame)?;
    let times: Vec<T> = (0..samples).map(|k| horizon * lit(k as f64 / (samples - 1) as f64)).collect();
    let traj = evolve_analytic(&rho0_o, &rates, &times, &opts)?;

    let pairs = frame.active_pairs();
    let mut max_violation = T::zero();
    for (t, s) in times.iter().zip(&traj.states) {
        for &(i, j) in &pairs {
            let bound = rho0_o.entry(i, j).im.abs() * (-rates.gamma[(i, j)] * *t).exp();
            max_violation = max_violation.max(s.entry(i, j).re.abs() - bound);
        }
    }

    let population_gap = frame.population_gap();
    let degenerate = population_gap.is_some_and(|g| g < lit(GAP_FLOOR));
    let floor = lit::<T>(crate::dynamics::RATE_FLOOR);
    let angle_pairs: Vec<(usize, usize)> = pairs
        .iter()
        .copied()
        .filter(|&(i, j)| !frame.blocks.same_block(i, j) && rates.gamma[(i, j)] > floor)
        .collect();
    let block_gap = angle_pairs
        .iter()
        .map(|&(i, j)| (frame.populations[i] - frame.populations[j]).abs())
        .reduce(T::min)
        .filter(|&g| g >= lit(GAP_FLOOR));

    let (mut angle_bounds, mut angle_envelope) = (Vec::new(), Vec::new());
    let mut max_decay_violation = T::zero();
    let mut envelope_decay_rate = None;
    if let (Some(g), Some(gmin)) = (block_gap, rates.gamma_min_active) {
        let n0_max = angle_pairs.iter().map(|&(i, j)| rho0_o.entry(i, j).norm()).fold(T::zero(), T::max);
        for (t, s) in times.iter().zip(&traj.states) {
            let re = angle_pairs.iter().map(|&(i, j)| s.entry(i, j).re.abs()).fold(T::zero(), T::max) / g;
            let env = angle_pairs.iter().map(|&(i, j)| s.entry(i, j).norm()).fold(T::zero(), T::max) / g;
            max_decay_violation = max_decay_violation.max(re - n0_max / g * (-gmin * *t).exp());
            angle_bounds.push(re);
            angle_envelope.push(env);
        }
        if angle_envelope.iter().all(|&e| e > T::zero()) {
            let logs: Vec<T> = angle_envelope.iter().map(|e| e.ln()).collect();
            envelope_decay_rate = least_squares_slope(&times, &logs).map(|s| -s);
        }
    }
    let max_angle_bound = angle_bounds.iter().copied().reduce(T::max);
    Ok(FrameConsistencyReport {
        max_bound_violation: max_violation.max(T::zero()),
        population_gap,
        degenerate,
        blocks: frame.blocks,
        block_gap,
        angle_bounds,
        angle_envelope,
        max_angle_bound,
        max_decay_violation: max_decay_violation.max(T::zero()),
        envelope_decay_rate,
        gamma_min: rates.gamma_min_active,
    })
}

/// `A_λ` along an operator-split mixing + dephasing run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ArrowReport<T> {
    /// `A_λ(t_k)` for `k = 0..=steps`.
    pub a_lambda: Vec<T>,
    /// Per step: `|ΔU_max| ≤ 2 Γ_min dt U_max`.
    pub hypothesis_ok: Vec<bool>,
    /// Number of steps where `A_λ` dropped by more than `1e-10`.
    pub decreases: usize,
    /// Largest drop of `A_λ` between consecutive samples (zero if none).
    pub max_decrease: T,
}

impl<T: Real> ArrowReport<T> {
    pub fn hypothesis_holds(&self) -> bool {
        self.hypothesis_ok.iter().all(|&b| b)
    }
}

/// Alternates `a ← M a` with `n_ij ← n_ij e^{−Γ_ij dt}` and records
/// `A_λ = S_p + λ(1 − P_c²)` after every step.
pub fn arrow_monotonicity_experiment<T: Real>(
    a0: &[T],
    n0: &RMatrix<T>,
    m: &RMatrix<T>,
    rates: &RateMatrix<T>,
    steps: usize,
    dt: T,
    lambda: T,
) -> Result<ArrowReport<T>> {
    let d = a0.len();
    for found in [n0.rows(), m.rows(), rates.dim()] {
        if found != d {
            return Err(Error::DimMismatch { expected: d, found });
        }
    }
    check_doubly_stochastic(m)?;
    if !(dt > T::zero()) {
        return Err(Error::InvalidArgument(format!("dt must be positive, got {dt}")));
    }
    let gmin = rates.gamma_min_active.unwrap_or(T::zero());
    let evaluate = |a: &[T], n: &RMatrix<T>, index: usize| -> Result<(T, T)> {
        let umax = coherence_umax(a)?;
        let pc = cohesion_index(coherence_u(n)?, umax).map_err(|_| Error::UndefinedPc { index })?;
        Ok((arrow_functional(population_entropy(a)?, pc, lambda)?, umax))
    };
    let mut a = a0.to_vec();
    let mut n = n0.clone();
    let (first, mut umax) = evaluate(&a, &n, 0)?;
    let mut a_lambda = vec![first];
    let mut hypothesis_ok = Vec::with_capacity(steps);
    for k in 1..=steps {
        a = mix_populations(&a, m)?;
        n = RMatrix::from_fn(d, d, |i, j| n[(i, j)] * (-rates.gamma[(i, j)] * dt).exp());
        let (value, next_umax) = evaluate(&a, &n, k)?;
        hypothesis_ok.push((next_umax - umax).abs() <= lit::<T>(2.0) * gmin * dt * umax);
        umax = next_umax;
        a_lambda.push(value);
    }
    let drops: Vec<T> = a_lambda.windows(2).map(|w| w[0] - w[1]).collect();
    Ok(ArrowReport {
        decreases: drops.iter().filter(|&&x| x > lit(1e-10)).count(),
        max_decrease: drops.into_iter().fold(T::zero(), T::max),
        a_lambda,
        hypothesis_ok,
    })
}

/// Shift of the classicalization time when every channel is perturbed off
/// the diagonal.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RobustnessReport<T> {
    pub perturbation: T,
    pub t_cl_unperturbed: T,
    pub t_cl_perturbed: T,
    /// `|Δt_cl| / t_cl`.
    pub relative_shift: T,
    /// `ε Σ_α γ_α ‖M_α‖ / Γ_min²`.
    pub predicted_shift: T,
    /// Largest increase of `U` between consecutive samples of the
    /// perturbed run (zero when monotone).
    pub max_u_increase: T,
}

impl<T: Real> RobustnessReport<T> {
    /// Whether the shift lies within a factor `band` of the prediction.
    pub fn within_band(&self, band: T) -> bool {
        self.relative_shift >= self.predicted_shift / band && self.relative_shift <= self.predicted_shift * band
    }
}

/// Runs the unperturbed and perturbed generators with the same integrator
/// on `samples` points of `[0, horizon]` and compares the crossing of
/// `P_c ≤ threshold`.
#[allow(clippy::too_many_arguments)]
pub fn robustness_experiment<T: Real>(
    rho0_o: &DensityOperator<T>,
    gen_diag: &GkslGenerator<T>,
    perturbations: &[CMatrix<T>],
    perturbation: T,
    threshold: T,
    horizon: T,
    samples: usize,
    step: T,
) -> Result<RobustnessReport<T>> {
    let rates = dephasing_rates(gen_diag, tol(DEFAULT_SELECTIVITY_TOL))?;
    let gmin = rates.gamma_min_active.ok_or(Error::ZeroRate)?;
    let perturbed = perturbed_generator(gen_diag, perturbations, perturbation)?;
    if samples < 2 {
        return Err(Error::InvalidArgument("need at least two samples".into()));
    }
    let times: Vec<T> = (0..samples).map(|k| horizon * lit(k as f64 / (samples - 1) as f64)).collect();
    let opts = DiagnosticOptions::default();
    let crossing = |gen: &GkslGenerator<T>| -> Result<(T, Trajectory<T>)> {
        let traj = evolve_numeric(rho0_o, gen, &times, step, &opts)?;
        let t = detect_threshold_crossing(&traj, threshold)?
            .t_cl_measured
            .ok_or_else(|| Error::InvalidArgument("threshold not reached within the horizon".into()))?;
        Ok((t, traj))
    };
    let (t_ref, _) = crossing(gen_diag)?;
    let (t_pert, traj) = crossing(&perturbed)?;
    let total: T = gen_diag.channels().iter().map(|c| c.gamma).sum();
    let max_u_increase = traj.reports.windows(2).map(|w| w[1].u - w[0].u).fold(T::zero(), T::max);
    Ok(RobustnessReport {
        perturbation,
        t_cl_unperturbed: t_ref,
        t_cl_perturbed: t_pert,
        relative_shift: (t_pert - t_ref).abs() / t_ref,
        predicted_shift: perturbation * total / (gmin * gmin),
        max_u_increase,
    })
}
