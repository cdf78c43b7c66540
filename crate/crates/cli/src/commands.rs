use std::fmt::Write as _;
use std::path::Path;

use irb_core::classicalization::{detect_threshold_crossing, least_squares_slope, tcl_bound};
use irb_core::density::random_density;
use irb_core::diagnostics::diagnose;
use irb_core::dynamics::{check_selectivity, dephasing_rates, evolve_analytic, evolve_numeric, minimal_dephasing};
use irb_core::io::{fmt_sig, state_to_json};
use irb_core::irb::{construct_irb, to_irb};
use irb_core::{
    CMatrix, Cx, DensityOperatorF64, EpsilonScan, GkslGeneratorF64, IrbFrameF64, RateMatrixF64, TrajectoryF64,
};
use rayon::prelude::*;
use serde_json::json;

use crate::error::{CliError, CliResult, EXIT_NEGATIVE};
use crate::files::{emit, read_generator, read_state, write_atomic};
use crate::{Engine, TimeGrid, Tolerances};

const MAX_RANDOM_DIM: usize = 64;
const FIG2_EPSILON: f64 = 0.05;
const FIG2_INITIAL: [f64; 3] = [0.9, 0.5, 0.2];
const FIG2_HORIZON: f64 = 5.0;
const FIG2_SAMPLES: usize = 1001;

fn thread_pool() -> CliResult<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var("IRB_NUM_THREADS") {
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| CliError::Usage(format!("IRB_NUM_THREADS must be a positive integer, got {raw:?}")))?;
        builder = builder.num_threads(n);
    }
    builder.build().map_err(|e| CliError::Usage(e.to_string()))
}

fn time_grid(t0: f64, t1: f64, samples: usize) -> CliResult<Vec<f64>> {
    if samples < 2 {
        return Err(CliError::Usage(format!("need at least two samples, got {samples}")));
    }
    if !t0.is_finite() || !t1.is_finite() || t1 <= t0 {
        return Err(CliError::Usage(format!("time grid [{t0}, {t1}] is empty")));
    }
    Ok((0..samples).map(|k| t0 + (t1 - t0) * k as f64 / (samples - 1) as f64).collect())
}

fn frame_of(rho: &DensityOperatorF64, tol: &Tolerances) -> CliResult<IrbFrameF64> {
    Ok(construct_irb(rho, tol.delta_support, tol.delta_degen)?)
}

/// Rates in the frame, or the failed certificate on stderr and `NotSelective`.
fn certified_rates(gen: &GkslGeneratorF64, frame: &IrbFrameF64, tol: &Tolerances) -> CliResult<RateMatrixF64> {
    let gen_o = gen.to_frame(frame)?;
    dephasing_rates(&gen_o, tol.sel_tol).map_err(|e| {
        if let Ok(cert) = check_selectivity(gen, frame, tol.sel_tol) {
            eprintln!("{}", serde_json::to_string_pretty(&cert).unwrap_or_default());
        }
        e.into()
    })
}

/// Trajectory of `rho` written in its initial IRB.
fn trajectory(
    rho: &DensityOperatorF64,
    gen: &GkslGeneratorF64,
    frame: &IrbFrameF64,
    times: &[f64],
    grid: &TimeGrid,
    tol: &Tolerances,
) -> CliResult<TrajectoryF64> {
    let rho_o = to_irb(rho, frame)?;
    let opts = tol.options();
    let traj = match grid.engine {
        Engine::Analytic => evolve_analytic(&rho_o, &certified_rates(gen, frame, tol)?, times, &opts)?,
        Engine::Numeric => {
            let rel: Vec<f64> = times.iter().map(|t| t - times[0]).collect();
            let mut traj = evolve_numeric(&rho_o, &gen.to_frame(frame)?, &rel, grid.step, &opts)?;
            traj.times = times.to_vec();
            traj
        }
    };
    Ok(traj)
}

pub fn decompose(state: &Path, out: Option<&Path>, tol: &Tolerances) -> CliResult<u8> {
    let rho = read_state(state)?;
    let (frame, report) = diagnose(&rho, &tol.options())?;
    let report = if tol.bits { report.in_bits() } else { report };
    let coherences: Vec<_> = frame
        .active_pairs()
        .into_iter()
        .filter(|&(i, j)| frame.coherence(i, j) != 0.0)
        .map(|(i, j)| (i, j, frame.coherence(i, j), frame.blocks.same_block(i, j)))
        .collect();

    let mut summary = String::new();
    let fmt_list = |xs: &[f64]| xs.iter().map(|&x| fmt_sig(x)).collect::<Vec<_>>().join(" ");
    let _ = writeln!(summary, "dimension {}, active support {}", frame.dim(), frame.d_act());
    let _ = writeln!(summary, "populations: {}", fmt_list(&frame.populations));
    let blocks: Vec<String> = frame.blocks.clusters.iter().map(|c| format!("{c:?}")).collect();
    let _ = writeln!(summary, "blocks: {}", blocks.join(" "));
    let _ = writeln!(summary, "P_c: {}", report.p_c.map_or_else(|| "n/a".to_string(), fmt_sig));
    let _ = writeln!(summary, "coherences: {}", if coherences.is_empty() { "none" } else { "" });
    for &(i, j, n, intra) in &coherences {
        let _ = writeln!(summary, "  n_{i}_{j} = {}{}", fmt_sig(n), if intra { " *" } else { "" });
    }
    if coherences.iter().any(|c| c.3) {
        let _ = writeln!(summary, "* inside a degenerate block: gauge-dependent, only block-level quantities are invariant");
    }

    let doc = json!({
        "frame": frame,
        "report": report,
        "coherences": coherences
            .iter()
            .map(|&(i, j, n, intra)| json!({ "i": i, "j": j, "n": n, "intra_block": intra }))
            .collect::<Vec<_>>(),
        "units": if tol.bits { "bits" } else { "nats" },
    });
    let text = format!("{}\n", serde_json::to_string_pretty(&doc).expect("report serialization is infallible"));
    match out {
        Some(path) => {
            write_atomic(path, &text)?;
            print!("{summary}");
        }
        None => {
            eprint!("{summary}");
            print!("{text}");
        }
    }
    Ok(0)
}

pub fn evolve(state: &Path, gen: &Path, grid: &TimeGrid, out: Option<&Path>, tol: &Tolerances) -> CliResult<u8> {
    let rho = read_state(state)?;
    let gen = read_generator(gen)?;
    let frame = frame_of(&rho, tol)?;
    let t1 = grid.t1.ok_or_else(|| CliError::Usage("--t1 is required".into()))?;
    let times = time_grid(grid.t0, t1, grid.samples)?;
    let mut traj = trajectory(&rho, &gen, &frame, &times, grid, tol)?;
    if tol.bits {
        traj.reports = traj.reports.iter().map(|r| r.in_bits()).collect();
    }
    emit(out, &traj.to_csv(&frame.active_pairs()))?;
    Ok(0)
}

pub fn certify(state: &Path, gen: &Path, out: Option<&Path>, tol: &Tolerances) -> CliResult<u8> {
    let rho = read_state(state)?;
    let gen = read_generator(gen)?;
    let frame = frame_of(&rho, tol)?;
    let cert = check_selectivity(&gen, &frame, tol.sel_tol)?;
    let text = format!("{}\n", serde_json::to_string_pretty(&cert).expect("certificate serialization is infallible"));
    emit(out, &text)?;
    Ok(if cert.is_selective { 0 } else { EXIT_NEGATIVE })
}

/// End of a scan grid long enough for every threshold to be crossed when
/// the rates are known.
fn scan_horizon(rho_o: &DensityOperatorF64, rates: Option<&RateMatrixF64>, eps_min: f64, tol: &Tolerances) -> f64 {
    let frame = irb_core::IrbFrame::of_fixed_frame_state(rho_o, tol.delta_support, tol.delta_degen);
    let gamma_min = rates.and_then(|r| r.gamma_min_active);
    let u0: f64 = frame.active_pairs().iter().map(|&(i, j)| frame.coherence(i, j).powi(2)).sum();
    let umax0: f64 = frame.active_pairs().iter().map(|&(i, j)| frame.populations[i] * frame.populations[j]).sum();
    match gamma_min.map(|g| (g, tcl_bound(u0, umax0, g, eps_min))) {
        Some((g, Ok(bound))) => 1.2 * bound + 1.0 / g,
        _ => 10.0,
    }
}

pub fn tcl_scan(
    state: &Path,
    gen: &Path,
    eps: &[f64],
    grid: &TimeGrid,
    out: Option<&Path>,
    tol: &Tolerances,
) -> CliResult<u8> {
    let rho = read_state(state)?;
    let gen = read_generator(gen)?;
    let frame = frame_of(&rho, tol)?;
    let mut eps = eps.to_vec();
    eps.sort_by(|a, b| b.total_cmp(a));
    eps.dedup();
    if let Some(&bad) = eps.iter().find(|&&e| !(e > 0.0 && e < 1.0)) {
        return Err(irb_core::Error::BadEpsilon { epsilon: bad }.into());
    }
    let t1 = match grid.t1 {
        Some(t1) => t1,
        None => {
            let rates = dephasing_rates(&gen.to_frame(&frame)?, tol.sel_tol).ok();
            grid.t0 + scan_horizon(&to_irb(&rho, &frame)?, rates.as_ref(), eps[eps.len() - 1], tol)
        }
    };
    let times = time_grid(grid.t0, t1, grid.samples)?;
    let traj = trajectory(&rho, &gen, &frame, &times, grid, tol)?;
    let rows = thread_pool()?.install(|| {
        eps.par_iter().map(|&e| detect_threshold_crossing(&traj, e)).collect::<Result<Vec<_>, _>>()
    })?;
    let (xs, ys): (Vec<f64>, Vec<f64>) =
        rows.iter().filter_map(|r| r.t_cl_measured.map(|t| (-r.epsilon.ln(), t))).unzip();
    let scan = EpsilonScan { slope: least_squares_slope(&xs, &ys), rows };
    emit(out, &scan.to_csv())?;
    Ok(0)
}

fn balanced_qubit(pc0: f64) -> CliResult<DensityOperatorF64> {
    let c = Cx::new;
    let n = pc0 / 2.0;
    let m = CMatrix::from_rows(&[vec![c(0.5, 0.0), c(0.0, n)], vec![c(0.0, -n), c(0.5, 0.0)]])?;
    Ok(DensityOperatorF64::new(m)?)
}

pub fn fig2(out: &Path) -> CliResult<u8> {
    let rates = dephasing_rates(&minimal_dephasing(&[1.0, 1.0], 2)?, 1e-12)?;
    let times = time_grid(0.0, FIG2_HORIZON, FIG2_SAMPLES)?;
    let curves = thread_pool()?.install(|| {
        FIG2_INITIAL
            .par_iter()
            .map(|&pc0| -> CliResult<_> {
                let traj = evolve_analytic(&balanced_qubit(pc0)?, &rates, &times, &Default::default())?;
                let verdict = detect_threshold_crossing(&traj, FIG2_EPSILON)?;
                Ok((traj, verdict))
            })
            .collect::<CliResult<Vec<_>>>()
    })?;

    let mut panel_a = String::from("t");
    for pc0 in FIG2_INITIAL {
        let _ = write!(panel_a, ",Pc_{pc0}");
    }
    panel_a.push('\n');
    for (k, t) in times.iter().enumerate() {
        panel_a.push_str(&fmt_sig(*t));
        for (traj, _) in &curves {
            panel_a.push(',');
            panel_a.push_str(&traj.reports[k].p_c.map_or_else(|| "n/a".to_string(), fmt_sig));
        }
        panel_a.push('\n');
    }

    let mut panel_b = String::from("Pc0,gamma_t_cl,closed_form\n");
    for (pc0, (_, verdict)) in FIG2_INITIAL.iter().zip(&curves) {
        let measured = verdict.t_cl_measured.map_or_else(|| "not reached".to_string(), fmt_sig);
        let _ = writeln!(panel_b, "{},{},{}", fmt_sig(*pc0), measured, fmt_sig((pc0 / FIG2_EPSILON).ln()));
    }

    std::fs::create_dir_all(out).map_err(|source| CliError::Write { path: out.to_path_buf(), source })?;
    write_atomic(&out.join("fig2_panel_a.csv"), &panel_a)?;
    write_atomic(&out.join("fig2_panel_b.csv"), &panel_b)?;
    Ok(0)
}

pub fn random(dim: usize, seed: u64, out: Option<&Path>) -> CliResult<u8> {
    if !(1..=MAX_RANDOM_DIM).contains(&dim) {
        return Err(CliError::BadDim(dim));
    }
    let rho: DensityOperatorF64 = random_density(dim, seed)?;
    emit(out, &format!("{}\n", state_to_json(&rho)))?;
    Ok(0)
}
