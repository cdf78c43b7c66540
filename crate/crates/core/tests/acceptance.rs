//! Acceptance suite: one line per criterion, nonzero exit on any failure.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use irb_core::classicalization::{
    arrow_monotonicity_experiment, detect_threshold_crossing, epsilon_scan, frame_consistency_experiment,
    robustness_experiment,
};
use irb_core::density::{random_density, random_rotation, trace_distance};
use irb_core::diagnostics::{diagnose, visibility, DiagnosticOptions};
use irb_core::dynamics::{
    dephasing_rates, evolve_analytic, evolve_numeric, minimal_dephasing, random_selective_generator,
};
use irb_core::irb::{construct_irb_default, dephase_irb, to_irb};
use irb_core::{CMatrix, Cx, DensityOperator, GkslGenerator, HermitianObservable, RMatrix, Trajectory};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion<'a> = (&'static str, Box<dyn Fn() -> Outcome + 'a>);

fn opts() -> DiagnosticOptions<f64> {
    DiagnosticOptions::default()
}

fn grid(t1: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| t1 * k as f64 / (n - 1) as f64).collect()
}

fn qubit(a: f64, n: f64) -> DensityOperator<f64> {
    let c = Cx::new;
    DensityOperator::new(CMatrix::from_rows(&[vec![c(a, 0.), c(0., n)], vec![c(0., -n), c(1. - a, 0.)]]).unwrap())
        .unwrap()
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn balanced_qubit_trajectory(pc0: f64, gamma_min: f64, horizon: f64, samples: usize) -> Trajectory<f64> {
    let rates = dephasing_rates(&minimal_dephasing(&[gamma_min, gamma_min], 2).unwrap(), 1e-12).unwrap();
    evolve_analytic(&qubit(0.5, pc0 / 2.0), &rates, &grid(horizon, samples), &opts()).unwrap()
}

fn fig2_crossings() -> Outcome {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for pc0 in [0.9, 0.5, 0.2] {
        let traj = balanced_qubit_trajectory(pc0, 1.0, 5.0, 1001);
        let t = detect_threshold_crossing(&traj, 0.05).map_err(|e| e.to_string())?.t_cl_measured;
        let t = t.ok_or_else(|| format!("P_c(0) = {pc0}: threshold not reached"))?;
        let oracle = (pc0 / 0.05f64).ln();
        let rel = (t - oracle).abs() / oracle;
        worst = worst.max(rel);
        ensure(rel <= 1e-3, || format!("P_c(0) = {pc0}: t_cl = {t}, expected {oracle}"))?;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < Duration::from_secs(1), || format!("took {elapsed:?}"))?;
    Ok(format!("max relative error {worst:.2e}"))
}

fn log_law() -> Outcome {
    let eps = [0.1, 0.05, 0.01, 0.005, 0.001];
    let mut worst: f64 = 0.0;
    for gamma_min in [0.5, 1.0, 2.0] {
        let traj = balanced_qubit_trajectory(0.5, gamma_min, 8.0 / gamma_min, 2001);
        let scan = epsilon_scan(&traj, &eps).map_err(|e| e.to_string())?;
        let slope = scan.slope.ok_or("no slope")?;
        let rel = (slope * gamma_min - 1.0).abs();
        worst = worst.max(rel);
        ensure(rel <= 1e-3, || format!("Γ_min = {gamma_min}: slope {slope}, expected {}", 1.0 / gamma_min))?;
    }
    Ok(format!("max relative slope error {worst:.2e}"))
}

fn positivity_bound() -> Outcome {
    let start = Instant::now();
    let mut violations = 0usize;
    for seed in 0..1000u64 {
        let dim = 2 + (seed % 7) as usize;
        let rho = random_density::<f64>(dim, seed).map_err(|e| e.to_string())?;
        let f = construct_irb_default(&rho).map_err(|e| e.to_string())?;
        for (i, j) in f.active_pairs() {
            let n = f.coherence(i, j);
            if n * n > f.populations[i] * f.populations[j] + 1e-10 {
                violations += 1;
            }
        }
        let (_, rep) = diagnose(&rho, &opts()).map_err(|e| e.to_string())?;
        if rep.u > rep.u_max + 1e-10 {
            violations += 1;
        }
    }
    let elapsed = start.elapsed();
    ensure(violations == 0, || format!("{violations} violations"))?;
    ensure(elapsed < Duration::from_secs(10), || format!("took {elapsed:?}"))?;
    Ok("0 violations over 1000 states".into())
}

/// Random state, generator selective in its IRB but written in the input
/// basis, and the analytic trajectory over `[0, 5/Γ_min]`.
fn selective_ensemble() -> Vec<(f64, Trajectory<f64>)> {
    (0..50u64)
        .map(|seed| {
            let dim = 2 + (seed % 5) as usize;
            let rho = random_density::<f64>(dim, 7000 + seed).unwrap();
            let frame = construct_irb_default(&rho).unwrap();
            let gen = random_selective_generator::<f64>(dim, 1 + (seed % 3) as usize, seed).unwrap();
            let gen_in = gen.from_frame(&frame).unwrap();
            let rates = dephasing_rates(&gen_in.to_frame(&frame).unwrap(), 1e-10).unwrap();
            let gmin = rates.gamma_min_active.unwrap();
            let rho_o = to_irb(&rho, &frame).unwrap();
            (gmin, evolve_analytic(&rho_o, &rates, &grid(5.0 / gmin, 100), &opts()).unwrap())
        })
        .collect()
}

fn lyapunov(ensemble: &[(f64, Trajectory<f64>)]) -> Outcome {
    let (mut worst_step, mut worst_env): (f64, f64) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (k, (gmin, traj)) in ensemble.iter().enumerate() {
        let u0 = traj.reports[0].u;
        for w in traj.reports.windows(2) {
            worst_step = worst_step.max(w[1].u - w[0].u);
        }
        for (t, r) in traj.times.iter().zip(&traj.reports) {
            worst_env = worst_env.max(r.u - u0 * (-2.0 * gmin * t).exp());
        }
        ensure(worst_step <= 1e-10, || format!("case {k}: U increased by {worst_step:e}"))?;
        ensure(worst_env <= 1e-8, || format!("case {k}: U exceeds envelope by {worst_env:e}"))?;
    }
    Ok(format!("max ΔU {worst_step:.1e}, max envelope excess {worst_env:.1e}"))
}

fn oracle_equivalence() -> Outcome {
    let mut cases: Vec<(String, DensityOperator<f64>, GkslGenerator<f64>)> = vec![
        ("qubit projectors".into(), qubit(0.5, 0.25), minimal_dephasing(&[1.0, 1.0], 2).unwrap()),
        (
            "qubit with H".into(),
            qubit(0.7, 0.2),
            GkslGenerator::new(
                HermitianObservable::from_real_diagonal(&[2.5, -2.5]),
                minimal_dephasing(&[0.4, 1.3], 2).unwrap().channels().to_vec(),
            )
            .unwrap(),
        ),
    ];
    let rho = random_density::<f64>(3, 17).unwrap();
    let frame = construct_irb_default(&rho).unwrap();
    let gen = minimal_dephasing(&[2.0, 0.0, 0.0], 3).unwrap().from_frame(&frame).unwrap();
    cases.push(("partly undamped".into(), rho, gen));
    for dim in 2..=6 {
        for rep in 0..2u64 {
            let seed = 300 + 10 * dim as u64 + rep;
            let rho = random_density::<f64>(dim, seed).unwrap();
            let frame = construct_irb_default(&rho).unwrap();
            let gen = random_selective_generator::<f64>(dim, 2, seed).unwrap().from_frame(&frame).unwrap();
            cases.push((format!("random dim {dim} #{rep}"), rho, gen));
        }
    }
    let mut worst: f64 = 0.0;
    for (name, rho, gen) in &cases {
        let frame = construct_irb_default(rho).map_err(|e| e.to_string())?;
        let rates = dephasing_rates(&gen.to_frame(&frame).unwrap(), 1e-10).map_err(|e| format!("{name}: {e}"))?;
        let gmin = rates.gamma_min_active.ok_or_else(|| format!("{name}: no damped pair"))?;
        let times = grid(5.0 / gmin, 26);
        let exact = evolve_analytic(&to_irb(rho, &frame).unwrap(), &rates, &times, &opts()).map_err(|e| e.to_string())?;
        let step = 0.005f64.min(0.02 / gen.norm());
        let num = evolve_numeric(rho, gen, &times, step, &opts()).map_err(|e| format!("{name}: {e}"))?;
        for (a, b) in exact.states.iter().zip(&num.states) {
            let back = a.matrix().congruence_by_transpose(&frame.q);
            let err = (&back - b.matrix()).max_modulus();
            worst = worst.max(err);
            ensure(err <= 1e-8, || format!("{name}: elementwise difference {err:e}"))?;
        }
    }
    Ok(format!("{} generators, max elementwise difference {worst:.1e}", cases.len()))
}

fn frame_consistency() -> Outcome {
    let (mut worst_violation, mut worst_rate): (f64, f64) = (0.0, f64::INFINITY);
    let mut done = 0;
    let mut seed = 0u64;
    while done < 200 {
        seed += 1;
        let dim = 2 + (seed % 5) as usize;
        let rho = random_density::<f64>(dim, 9000 + seed).unwrap();
        let frame = construct_irb_default(&rho).unwrap();
        if frame.population_gap().is_none_or(|g| g < 1e-6) {
            continue;
        }
        let gen_o = random_selective_generator::<f64>(dim, 2, seed).unwrap();
        let gmin = dephasing_rates(&gen_o, 1e-12).unwrap().gamma_min_active.unwrap();
        let gen = gen_o.from_frame(&frame).unwrap();
        let rep = frame_consistency_experiment(&rho, &gen, 5.0 / gmin, 201).map_err(|e| format!("seed {seed}: {e}"))?;
        worst_violation = worst_violation.max(rep.max_bound_violation).max(rep.max_decay_violation);
        ensure(worst_violation <= 1e-10, || format!("seed {seed}: violation {worst_violation:e}"))?;
        let rate = rep.envelope_decay_rate.ok_or_else(|| format!("seed {seed}: no angle bound"))?;
        worst_rate = worst_rate.min(rate / gmin);
        ensure(rate >= gmin * (1.0 - 1e-2), || format!("seed {seed}: angle decay rate {rate} < Γ_min {gmin}"))?;
        done += 1;
    }
    Ok(format!("max violation {worst_violation:.1e}, min decay rate / Γ_min {worst_rate:.4}"))
}

fn balanced_qubit() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut worst_v, mut worst_d): (f64, f64) = (0.0, 0.0);
    for _ in 0..100 {
        let n: f64 = rng.gen_range(-0.5..0.5);
        let r: RMatrix<f64> = random_rotation(2, rng.gen());
        let rho = DensityOperator::new(qubit(0.5, n).matrix().congruence_by_transpose(&r)).unwrap();
        let (frame, rep) = diagnose(&rho, &opts()).map_err(|e| e.to_string())?;
        let rho_o = to_irb(&rho, &frame).unwrap();
        let v = visibility(&rho_o, 0, 1).map_err(|e| e.to_string())?;
        let pc = rep.p_c.ok_or("P_c undefined")?;
        worst_v = worst_v.max((pc - v).abs());
        let d = trace_distance(&rho_o, &dephase_irb(&rho_o)).unwrap();
        worst_d = worst_d.max((d - n.abs()).abs());
    }
    ensure(worst_v <= 1e-12, || format!("|P_c − V| = {worst_v:e}"))?;
    ensure(worst_d <= 1e-10, || format!("|D_tr − |n|| = {worst_d:e}"))?;
    Ok(format!("max |P_c − V| {worst_v:.1e}, max |D_tr − |n|| {worst_d:.1e}"))
}

fn trace_distance_bound() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for seed in 0..500u64 {
        let dim = 2 + (seed % 7) as usize;
        let rho = random_density::<f64>(dim, 20_000 + seed).unwrap();
        let (frame, rep) = diagnose(&rho, &opts()).map_err(|e| e.to_string())?;
        let rho_o = to_irb(&rho, &frame).unwrap();
        let d = trace_distance(&rho_o, &dephase_irb(&rho_o)).unwrap();
        worst = worst.max(d - rep.trace_dist_bound);
        ensure(d <= rep.trace_dist_bound + 1e-10, || format!("seed {seed}: D_tr {d} > bound {}", rep.trace_dist_bound))?;
    }
    Ok(format!("0 violations over 500 states, max D_tr − bound {worst:.2e}"))
}

fn coherence_monotones(ensemble: &[(f64, Trajectory<f64>)]) -> Outcome {
    let (mut worst_c, mut worst_p): (f64, f64) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (k, (_, traj)) in ensemble.iter().enumerate() {
        for w in traj.reports.windows(2) {
            worst_c = worst_c.max(w[1].c_rel - w[0].c_rel);
            let (p0, p1) = (w[0].p_c.ok_or("P_c undefined")?, w[1].p_c.ok_or("P_c undefined")?);
            worst_p = worst_p.max(p1 - p0);
        }
        ensure(worst_c <= 1e-10, || format!("case {k}: C_rel increased by {worst_c:e}"))?;
        ensure(worst_p <= 1e-10, || format!("case {k}: P_c increased by {worst_p:e}"))?;
    }
    Ok(format!("max ΔC_rel {worst_c:.1e}, max ΔP_c {worst_p:.1e}"))
}

fn random_doubly_stochastic(dim: usize, rng: &mut ChaCha8Rng) -> RMatrix<f64> {
    let stay: f64 = rng.gen_range(0.0..0.3);
    let mut m = RMatrix::identity(dim).scale(1.0 - stay);
    let parts = 3;
    for _ in 0..parts {
        let mut perm: Vec<usize> = (0..dim).collect();
        perm.shuffle(rng);
        for (i, &j) in perm.iter().enumerate() {
            m[(i, j)] += stay / parts as f64;
        }
    }
    m
}

fn arrow_of_time() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut hypothesis_steps, mut total_steps, mut decreases) = (0usize, 0usize, 0usize);
    for k in 0..50u64 {
        let dim = 2 + (k % 5) as usize;
        let mut a: Vec<f64> = (0..dim).map(|_| rng.gen_range(0.05..1.0)).collect();
        let sum: f64 = a.iter().sum();
        a.iter_mut().for_each(|x| *x /= sum);
        a.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let n0 = RMatrix::from_fn(dim, dim, |i, j| {
            let s = (a[i] * a[j]).sqrt() / dim as f64;
            match i.cmp(&j) {
                std::cmp::Ordering::Less => s,
                std::cmp::Ordering::Greater => -s,
                std::cmp::Ordering::Equal => 0.0,
            }
        });
        let n0 = RMatrix::from_fn(dim, dim, |i, j| n0[(i, j)] * if (i + j) % 2 == 0 { 1.0 } else { 0.5 });
        let m = random_doubly_stochastic(dim, &mut rng);
        let rates = dephasing_rates(&random_selective_generator::<f64>(dim, 2, 40 + k).unwrap(), 1e-12).unwrap();
        let rep = arrow_monotonicity_experiment(&a, &n0, &m, &rates, 50, 0.1, 1.0).map_err(|e| format!("case {k}: {e}"))?;
        for (step, ok) in rep.hypothesis_ok.iter().enumerate() {
            total_steps += 1;
            let drop = rep.a_lambda[step] - rep.a_lambda[step + 1];
            if *ok {
                hypothesis_steps += 1;
                ensure(drop <= 1e-10, || format!("case {k} step {step}: A_λ dropped by {drop:e}"))?;
            }
        }
        decreases += rep.decreases;
    }
    ensure(hypothesis_steps > 0, || "stationarity hypothesis never held".into())?;
    Ok(format!("hypothesis held on {hypothesis_steps}/{total_steps} steps, {decreases} decreases overall"))
}

fn robustness() -> Outcome {
    let c = Cx::new;
    let base = minimal_dephasing(&[1.5, 0.5], 2).unwrap();
    let minus_sy = CMatrix::from_rows(&[vec![c(0., 0.), c(0., 1.)], vec![c(0., -1.), c(0., 0.)]]).unwrap();
    let ms = [minus_sy.clone(), minus_sy];
    let mut lines = Vec::new();
    for eps in [1e-3, 1e-2] {
        let rep = robustness_experiment(&qubit(0.7, 0.2), &base, &ms, eps, 0.05, 5.0, 1001, 0.005)
            .map_err(|e| e.to_string())?;
        ensure(rep.max_u_increase <= 1e-10, || format!("ε = {eps}: U increased by {:e}", rep.max_u_increase))?;
        ensure(rep.within_band(10.0), || {
            format!("ε = {eps}: shift {:e} outside 10x band of {:e}", rep.relative_shift, rep.predicted_shift)
        })?;
        lines.push(format!("ε={eps:.0e}: shift/pred {:.2}", rep.relative_shift / rep.predicted_shift));
    }
    Ok(lines.join(", "))
}

fn gauge_invariance() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..200u64 {
        let dim = 2 + (seed % 7) as usize;
        let rho = random_density::<f64>(dim, 40_000 + seed).unwrap();
        let r: RMatrix<f64> = random_rotation(dim, 50_000 + seed);
        let rotated = DensityOperator::new(rho.matrix().congruence_by_transpose(&r)).unwrap();
        let (f1, r1) = diagnose(&rho, &opts()).map_err(|e| e.to_string())?;
        let (f2, r2) = diagnose(&rotated, &opts()).map_err(|e| e.to_string())?;
        ensure(f1.blocks == f2.blocks, || format!("seed {seed}: block structure differs"))?;
        for (x, y) in f1.populations.iter().zip(&f2.populations) {
            worst = worst.max((x - y).abs());
        }
        worst = worst.max((r1.u - r2.u).abs()).max((r1.u_max - r2.u_max).abs());
        worst = worst.max((r1.p_c.unwrap() - r2.p_c.unwrap()).abs());
        ensure(worst <= 1e-10, || format!("seed {seed}: difference {worst:e}"))?;
    }
    Ok(format!("max difference {worst:.1e}"))
}

fn main() -> ExitCode {
    let ensemble = selective_ensemble();
    let criteria: Vec<Criterion> = vec![
        ("fig2 crossing times", Box::new(fig2_crossings)),
        ("log-law slope", Box::new(log_law)),
        ("positivity bound", Box::new(positivity_bound)),
        ("lyapunov contraction", Box::new(|| lyapunov(&ensemble))),
        ("numeric vs analytic", Box::new(oracle_equivalence)),
        ("frame consistency", Box::new(frame_consistency)),
        ("balanced qubit identity", Box::new(balanced_qubit)),
        ("trace distance bound", Box::new(trace_distance_bound)),
        ("coherence monotones", Box::new(|| coherence_monotones(&ensemble))),
        ("arrow monotonicity", Box::new(arrow_of_time)),
        ("perturbation robustness", Box::new(robustness)),
        ("gauge invariance", Box::new(gauge_invariance)),
    ];
    let mut failures = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(std::panic::AssertUnwindSafe(run))
            .unwrap_or_else(|_| Err("panicked".to_string()));
        let ms = start.elapsed().as_secs_f64() * 1e3;
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} ({ms:.0} ms)", k + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {:>2} {name}: {detail} ({ms:.0} ms)", k + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
