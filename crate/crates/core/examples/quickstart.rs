use irb_core::classicalization::detect_threshold_crossing;
use irb_core::density::random_density;
use irb_core::diagnostics::{diagnose, DiagnosticOptions};
use irb_core::dynamics::{dephasing_rates, evolve_analytic, minimal_dephasing};
use irb_core::irb::to_irb;

fn main() -> Result<(), irb_core::Error> {
    let rho = random_density::<f64>(4, 7)?;
    let opts = DiagnosticOptions::default();
    let (frame, report) = diagnose(&rho, &opts)?;
    println!("P_c = {:?}", report.p_c);

    let rates = dephasing_rates(&minimal_dephasing(&[1.0, 0.5, 0.8, 1.2], 4)?, 1e-12)?;
    let times: Vec<f64> = (0..=1000).map(|k| k as f64 * 0.01).collect();
    let traj = evolve_analytic(&to_irb(&rho, &frame)?, &rates, &times, &opts)?;
    let verdict = detect_threshold_crossing(&traj, 0.05)?;
    println!("t_cl = {:?} (bound {:?})", verdict.t_cl_measured, verdict.t_cl_bound);
    Ok(())
}
