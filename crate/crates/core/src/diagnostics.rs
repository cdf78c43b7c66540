//! Scalar functionals of an IRB-decomposed state.
//!
//! All entropies are in nats. The cohesion index `P_c` and the quantities
//! built on it are `None` when `U_max < 1e-12`, i.e. when the populations
//! live in a single sector.

use serde::ser::{Serialize, SerializeStruct, Serializer};

use crate::density::{entropy_of_spectrum, von_neumann_entropy, DensityOperator};
use crate::error::{Error, Result};
use crate::io::{fmt_opt, fmt_sig};
use crate::irb::{construct_irb, to_irb, IrbFrame, DEFAULT_DELTA_DEGEN, DEFAULT_DELTA_SUPPORT};
use crate::matrix::RMatrix;
use crate::scalar::{lit, to_f64, tol, Cx, Real};

pub const DEFAULT_LAMBDA: f64 = 1.0;
/// `U_max` below this leaves `P_c` undefined.
pub const UMAX_FLOOR: f64 = 1e-12;

/// CSV header matching [`DiagnosticsReport::csv_row`].
pub const CSV_HEADER: &str = "t,Sp,U,Umax,Pc,Dcoh,Crel,hs,trbound,Alambda";

fn check_probability<T: Real>(a: &[T]) -> Result<()> {
    if let Some((index, &value)) = a.iter().enumerate().find(|(_, &x)| x < -tol::<T>(1e-12)) {
        return Err(Error::NegativeProbability { index, value: to_f64(value) });
    }
    let sum: T = a.iter().copied().sum();
    if (sum - T::one()).abs() > tol(1e-10) {
        return Err(Error::NotNormalized { sum: to_f64(sum) });
    }
    Ok(())
}

/// `S_p = -Σ a ln a` with `0 ln 0 = 0`.
pub fn population_entropy<T: Real>(a: &[T]) -> Result<T> {
    check_probability(a)?;
    Ok(entropy_of_spectrum(a))
}

/// `U = Σ_{i<j} n_ij²`.
pub fn coherence_u<T: Real>(n: &RMatrix<T>) -> Result<T> {
    if !n.is_square() {
        return Err(Error::NotSquare { rows: n.rows(), cols: n.cols() });
    }
    let defect = n.antisymmetry_defect();
    if defect > tol(1e-12) {
        return Err(Error::NotAntisymmetric { defect: to_f64(defect) });
    }
    let d = n.rows();
    let mut u = T::zero();
    for i in 0..d {
        for j in (i + 1)..d {
            u += n[(i, j)] * n[(i, j)];
        }
    }
    Ok(u)
}

/// `U_max = Σ_{i<j} a_i a_j`.
pub fn coherence_umax<T: Real>(a: &[T]) -> Result<T> {
    check_probability(a)?;
    Ok(pair_product_sum(a))
}

fn pair_product_sum<T: Real>(a: &[T]) -> T {
    let mut acc = T::zero();
    let mut prefix = T::zero();
    for &x in a {
        acc += prefix * x;
        prefix += x;
    }
    acc
}

/// `P_c = √(U / U_max)`, clamped to `[0, 1]`.
pub fn cohesion_index<T: Real>(u: T, umax: T) -> Result<T> {
    if u < T::zero() {
        return Err(Error::InvalidArgument(format!("U must be non-negative, got {u}")));
    }
    if umax < lit(UMAX_FLOOR) {
        return Err(Error::UmaxDegenerate { umax: to_f64(umax) });
    }
    Ok((u / umax).sqrt().min(T::one()))
}

/// `‖ρ_O − Δ[ρ_O]‖₂ = √(2U)`.
pub fn hs_distance_to_diagonal<T: Real>(u: T) -> T {
    (lit::<T>(2.0) * u.max(T::zero())).sqrt()
}

/// Upper bound `√(d_act / 2) √U` on the trace distance to the dephased state.
pub fn trace_distance_bound<T: Real>(u: T, d_act: usize) -> T {
    (lit::<T>(d_act as f64) * lit(0.5)).sqrt() * u.max(T::zero()).sqrt()
}

/// `C_rel = S(Δ[ρ_O]) − S(ρ_O)`.
pub fn rel_entropy_coherence<T: Real>(rho_o: &DensityOperator<T>) -> T {
    entropy_of_spectrum(&rho_o.populations()) - von_neumann_entropy(rho_o)
}

/// `A_λ = S_p + λ (1 − P_c²)`.
pub fn arrow_functional<T: Real>(sp: T, pc: T, lambda: T) -> Result<T> {
    check_lambda(lambda)?;
    if !(pc >= T::zero() && pc <= T::one()) {
        return Err(Error::InvalidArgument(format!("P_c must lie in [0, 1], got {pc}")));
    }
    Ok(sp + lambda * (T::one() - pc * pc))
}

fn check_lambda<T: Real>(lambda: T) -> Result<()> {
    if lambda > T::zero() && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::BadLambda { lambda: to_f64(lambda) })
    }
}

fn check_pair(dim: usize, i: usize, j: usize) -> Result<()> {
    if i >= j || j >= dim {
        return Err(Error::IndexOutOfRange { i, j, dim });
    }
    Ok(())
}

/// Balanced two-path readout `(ρ_ii + ρ_jj)/2 + Re(ρ_ij e^{iφ})`.
pub fn interferogram<T: Real>(rho_o: &DensityOperator<T>, i: usize, j: usize, phi: T) -> Result<T> {
    check_pair(rho_o.dim(), i, j)?;
    let mean = (rho_o.entry(i, i).re + rho_o.entry(j, j).re) * lit(0.5);
    Ok(mean + (rho_o.entry(i, j) * Cx::from_polar(T::one(), phi)).re)
}

/// Fringe visibility `2|ρ_ij| / (ρ_ii + ρ_jj)`.
pub fn visibility<T: Real>(rho_o: &DensityOperator<T>, i: usize, j: usize) -> Result<T> {
    check_pair(rho_o.dim(), i, j)?;
    let weight = rho_o.entry(i, i).re + rho_o.entry(j, j).re;
    if weight <= lit(1e-12) {
        return Err(Error::EmptySector { i, j, weight: to_f64(weight) });
    }
    Ok(lit::<T>(2.0) * rho_o.entry(i, j).norm() / weight)
}

/// Tunables for [`diagnose`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiagnosticOptions<T> {
    pub lambda: T,
    pub delta_support: T,
    pub delta_degen: T,
}

impl<T: Real> Default for DiagnosticOptions<T> {
    fn default() -> Self {
        Self {
            lambda: lit(DEFAULT_LAMBDA),
            delta_support: lit(DEFAULT_DELTA_SUPPORT),
            delta_degen: lit(DEFAULT_DELTA_DEGEN),
        }
    }
}

/// Every diagnostic of one state.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsReport<T> {
    pub s_p: T,
    pub u: T,
    pub u_max: T,
    pub p_c: Option<T>,
    pub delta_coh: Option<T>,
    pub c_rel: T,
    pub hs_dist: T,
    pub trace_dist_bound: T,
    pub a_lambda: Option<T>,
    pub lambda: T,
}

impl<T: Real> DiagnosticsReport<T> {
    fn assemble(populations: &[T], u: T, d_act: usize, c_rel: T, lambda: T) -> Result<Self> {
        check_lambda(lambda)?;
        let s_p = population_entropy(populations)?;
        let u_max = coherence_umax(populations)?;
        let p_c = cohesion_index(u, u_max).ok();
        let delta_coh = p_c.map(|p| T::one() - p * p);
        let a_lambda = delta_coh.map(|d| s_p + lambda * d);
        Ok(Self {
            s_p,
            u,
            u_max,
            p_c,
            delta_coh,
            c_rel,
            hs_dist: hs_distance_to_diagonal(u),
            trace_dist_bound: trace_distance_bound(u, d_act),
            a_lambda,
            lambda,
        })
    }

    /// One CSV line in the order of [`CSV_HEADER`].
    pub fn csv_row(&self, t: T) -> String {
        [
            fmt_sig(to_f64(t)),
            fmt_sig(to_f64(self.s_p)),
            fmt_sig(to_f64(self.u)),
            fmt_sig(to_f64(self.u_max)),
            fmt_opt(self.p_c),
            fmt_opt(self.delta_coh),
            fmt_sig(to_f64(self.c_rel)),
            fmt_sig(to_f64(self.hs_dist)),
            fmt_sig(to_f64(self.trace_dist_bound)),
            fmt_opt(self.a_lambda),
        ]
        .join(",")
    }

    /// Copy with `S_p` and `C_rel` in bits; `A_λ` is rebuilt from the
    /// converted `S_p`.
    pub fn in_bits(&self) -> Self {
        let ln2 = T::LN_2();
        let s_p = self.s_p / ln2;
        Self {
            s_p,
            c_rel: self.c_rel / ln2,
            a_lambda: self.delta_coh.map(|d| s_p + self.lambda * d),
            ..self.clone()
        }
    }
}

impl<T: Real> Serialize for DiagnosticsReport<T> {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let opt = |x: Option<T>| x.map(to_f64);
        let mut st = s.serialize_struct("DiagnosticsReport", 10)?;
        st.serialize_field("S_p", &to_f64(self.s_p))?;
        st.serialize_field("U", &to_f64(self.u))?;
        st.serialize_field("U_max", &to_f64(self.u_max))?;
        st.serialize_field("P_c", &opt(self.p_c))?;
        st.serialize_field("Delta_coh", &opt(self.delta_coh))?;
        st.serialize_field("C_rel", &to_f64(self.c_rel))?;
        st.serialize_field("hs_dist", &to_f64(self.hs_dist))?;
        st.serialize_field("trace_dist_bound", &to_f64(self.trace_dist_bound))?;
        st.serialize_field("A_lambda", &opt(self.a_lambda))?;
        st.serialize_field("lambda", &to_f64(self.lambda))?;
        st.end()
    }
}

/// Builds the IRB of `rho` and evaluates every diagnostic in it.
pub fn diagnose<T: Real>(
    rho: &DensityOperator<T>,
    opts: &DiagnosticOptions<T>,
) -> Result<(IrbFrame<T>, DiagnosticsReport<T>)> {
    let frame = construct_irb(rho, opts.delta_support, opts.delta_degen)?;
    let rho_o = to_irb(rho, &frame)?;
    let u = coherence_u(&frame.coherences)?;
    let populations: Vec<T> = frame.populations.iter().map(|&a| a.max(T::zero())).collect();
    let report =
        DiagnosticsReport::assemble(&populations, u, frame.d_act(), rel_entropy_coherence(&rho_o), opts.lambda)?;
    Ok((frame, report))
}

/// Diagnostics of a state already written in a fixed IRB (for instance a
/// trajectory sample propagated in the initial frame).
///
/// Populations are the diagonal and `U = Σ_{i<j} |ρ_ij|²`, which reduces to
/// `Σ n_ij²` while the off-diagonal part stays purely imaginary.
pub fn diagnose_in_frame<T: Real>(rho_o: &DensityOperator<T>, opts: &DiagnosticOptions<T>) -> Result<DiagnosticsReport<T>> {
    let populations: Vec<T> = rho_o.populations().into_iter().map(|a| a.max(T::zero())).collect();
    let d = rho_o.dim();
    let mut u = T::zero();
    for i in 0..d {
        for j in (i + 1)..d {
            u += rho_o.entry(i, j).norm_sqr();
        }
    }
    let d_act = populations.iter().filter(|&&a| a > opts.delta_support).count();
    DiagnosticsReport::assemble(&populations, u, d_act, rel_entropy_coherence(rho_o), opts.lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::density::{random_density, trace_distance};
    use crate::irb::dephase_irb;
    use crate::matrix::CMatrix;

    fn c(re: f64, im: f64) -> Cx<f64> {
        Cx::new(re, im)
    }

    fn qubit(a: f64, n: f64) -> DensityOperator<f64> {
        DensityOperator::new(
            CMatrix::from_rows(&[vec![c(a, 0.), c(0., n)], vec![c(0., -n), c(1. - a, 0.)]]).unwrap(),
        )
        .unwrap()
    }

    fn close(x: f64, y: f64, eps: f64) -> bool {
        (x - y).abs() <= eps
    }

    #[test]
    fn entropy_examples() {
        assert_eq!(population_entropy(&[1.0, 0.0]).unwrap(), 0.0);
        assert!(close(population_entropy(&[0.5, 0.5]).unwrap(), 2f64.ln(), 1e-15));
        let oracle = -(0.8f64 * 0.8f64.ln() + 0.2 * 0.2f64.ln());
        assert!(close(population_entropy(&[0.8, 0.2]).unwrap(), oracle, 1e-15));
        assert!(close(oracle, 0.500402, 1e-6));
        assert!(matches!(population_entropy(&[0.5, 0.4]), Err(Error::NotNormalized { .. })));
    }

    #[test]
    fn coherence_examples() {
        assert_eq!(coherence_u(&RMatrix::<f64>::zeros(3, 3)).unwrap(), 0.0);
        let n2 = RMatrix::from_rows(&[vec![0.0, 0.25], vec![-0.25, 0.0]]).unwrap();
        assert_eq!(coherence_u(&n2).unwrap(), 0.0625);
        let n3 = RMatrix::from_rows(&[vec![0.0, 0.1, 0.2], vec![-0.1, 0.0, 0.0], vec![-0.2, 0.0, 0.0]]).unwrap();
        let u = coherence_u(&n3).unwrap();
        assert!(close(u, 0.05, 1e-15));
        assert!(close(u, 0.5 * n3.frobenius_norm().powi(2), 1e-12));
        let sym = RMatrix::from_rows(&[vec![0.0, 0.1], vec![0.1, 0.0]]).unwrap();
        assert!(matches!(coherence_u(&sym), Err(Error::NotAntisymmetric { .. })));
    }

    #[test]
    fn umax_examples_and_closed_form() {
        assert_eq!(coherence_umax(&[1.0, 0.0]).unwrap(), 0.0);
        assert_eq!(coherence_umax(&[0.5, 0.5]).unwrap(), 0.25);
        let a = [0.5, 0.3, 0.2];
        let um = coherence_umax(&a).unwrap();
        assert!(close(um, 0.15 + 0.10 + 0.06, 1e-15));
        let alt = 0.5 * (1.0 - a.iter().map(|x| x * x).sum::<f64>());
        assert!(close(um, alt, 1e-12));
    }

    #[test]
    fn cohesion_examples() {
        assert!(close(cohesion_index(0.0625, 0.25).unwrap(), 0.5, 1e-15));
        assert_eq!(cohesion_index(0.21, 0.21).unwrap(), 1.0);
        assert_eq!(cohesion_index(0.0, 0.25).unwrap(), 0.0);
        assert!(matches!(cohesion_index(0.0, 0.0), Err(Error::UmaxDegenerate { .. })));
    }

    #[test]
    fn distance_examples() {
        assert_eq!(hs_distance_to_diagonal(0.0), 0.0);
        assert!(close(hs_distance_to_diagonal(0.0625), 0.125f64.sqrt(), 1e-15));
        assert!(close(hs_distance_to_diagonal(0.0625), 0.353553, 1e-6));
        assert_eq!(trace_distance_bound(0.0, 3), 0.0);
        let rho = qubit(0.7, 0.2);
        let bound = trace_distance_bound(0.04, 2);
        let exact = trace_distance(&rho, &dephase_irb(&rho)).unwrap();
        assert!(close(bound, exact, 1e-12));
    }

    #[test]
    fn relative_entropy_examples() {
        assert!(rel_entropy_coherence(&DensityOperator::<f64>::diagonal(&[0.6, 0.4]).unwrap()).abs() < 1e-14);
        assert!(close(rel_entropy_coherence(&qubit(0.5, 0.5)), 2f64.ln(), 1e-12));
        let oracle = 2f64.ln() + 0.75 * 0.75f64.ln() + 0.25 * 0.25f64.ln();
        assert!(close(rel_entropy_coherence(&qubit(0.5, 0.25)), oracle, 1e-12));
        assert!(close(oracle, 0.130812, 1e-6));
    }

    #[test]
    fn arrow_examples() {
        let ln2 = 2f64.ln();
        assert!(close(arrow_functional(ln2, 0.5, 1.0).unwrap(), ln2 + 0.75, 1e-15));
        assert!(close(arrow_functional(ln2, 0.5, 1.0).unwrap(), 1.443147, 1e-6));
        assert_eq!(arrow_functional(0.3, 1.0, 1.0).unwrap(), 0.3);
        assert_eq!(arrow_functional(0.3, 0.0, 2.0).unwrap(), 2.3);
        assert!(matches!(arrow_functional(0.3, 0.5, 0.0), Err(Error::BadLambda { .. })));
        assert!(matches!(arrow_functional(0.3, 0.5, -1.0), Err(Error::BadLambda { .. })));
    }

    #[test]
    fn interferogram_examples() {
        let rho = qubit(0.5, 0.25);
        for k in 0..64 {
            let phi = k as f64 * 0.1;
            assert!(close(interferogram(&rho, 0, 1, phi).unwrap(), 0.5 - 0.25 * phi.sin(), 1e-15));
        }
        let diag = DensityOperator::diagonal(&[0.7, 0.3]).unwrap();
        assert!(close(interferogram(&diag, 0, 1, 1.3).unwrap(), 0.5, 1e-15));
        let real = DensityOperator::new(
            CMatrix::from_rows(&[vec![c(0.5, 0.), c(0.3, 0.)], vec![c(0.3, 0.), c(0.5, 0.)]]).unwrap(),
        )
        .unwrap();
        assert!(close(interferogram(&real, 0, 1, 0.0).unwrap(), 0.8, 1e-15));
        assert!(matches!(interferogram(&rho, 1, 0, 0.0), Err(Error::IndexOutOfRange { .. })));
        assert!(matches!(interferogram(&rho, 0, 2, 0.0), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn visibility_examples() {
        let v = visibility(&qubit(0.5, 0.25), 0, 1).unwrap();
        assert!(close(v, 0.5, 1e-15));
        let (_, rep) = diagnose(&qubit(0.5, 0.25), &DiagnosticOptions::default()).unwrap();
        assert!(close(v, rep.p_c.unwrap(), 1e-12));
        assert_eq!(visibility(&DensityOperator::diagonal(&[0.7, 0.3]).unwrap(), 0, 1).unwrap(), 0.0);
        assert!(close(visibility(&qubit(0.7, 0.21), 0, 1).unwrap(), 0.42, 1e-15));
        let sparse = DensityOperator::diagonal(&[1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(visibility(&sparse, 1, 2), Err(Error::EmptySector { .. })));
    }

    fn swept_visibility(rho: &DensityOperator<f64>, i: usize, j: usize) -> f64 {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for k in 0..10_000 {
            let phi = std::f64::consts::TAU * k as f64 / 10_000.0;
            let p = interferogram(rho, i, j, phi).unwrap();
            lo = lo.min(p);
            hi = hi.max(p);
        }
        (hi - lo) / (hi + lo)
    }

    #[test]
    fn sweep_matches_closed_form_visibility() {
        for seed in 0..20 {
            let rho = random_density::<f64>(2 + (seed % 4) as usize, seed).unwrap();
            let (frame, _) = diagnose(&rho, &DiagnosticOptions::default()).unwrap();
            let rho_o = to_irb(&rho, &frame).unwrap();
            for (i, j) in frame.active_pairs() {
                let v = visibility(&rho_o, i, j).unwrap();
                assert!(close(v, swept_visibility(&rho_o, i, j), 1e-6), "seed {seed} pair ({i},{j})");
            }
        }
    }

    #[test]
    fn random_state_invariants() {
        let opts = DiagnosticOptions::default();
        for seed in 0..1000u64 {
            let rho = random_density::<f64>(2 + (seed % 5) as usize, seed).unwrap();
            let (frame, rep) = diagnose(&rho, &opts).unwrap();
            let pc = rep.p_c.unwrap();
            assert!((0.0..=1.0).contains(&pc));
            assert!(rep.u <= rep.u_max + 1e-10);
            assert!(close(pc * pc, rep.u / rep.u_max, 1e-12));
            assert!(close(rep.delta_coh.unwrap(), 1.0 - pc * pc, 1e-15));
            assert!(rep.c_rel >= -1e-10);
            let rho_o = to_irb(&rho, &frame).unwrap();
            let dephased = dephase_irb(&rho_o);
            let direct = (rho_o.matrix() - dephased.matrix()).hs_norm();
            assert!(close(rep.hs_dist, direct, 1e-10));
            assert!(trace_distance(&rho_o, &dephased).unwrap() <= rep.trace_dist_bound + 1e-10);
        }
    }

    #[test]
    fn balanced_qubit_cohesion_equals_visibility() {
        for k in 0..=50 {
            let rho = qubit(0.5, 0.01 * k as f64);
            let (frame, rep) = diagnose(&rho, &DiagnosticOptions::default()).unwrap();
            let rho_o = to_irb(&rho, &frame).unwrap();
            assert!(close(rep.p_c.unwrap(), visibility(&rho_o, 0, 1).unwrap(), 1e-12));
        }
    }

    #[test]
    fn relative_entropy_scales_quadratically() {
        for seed in 0..10u64 {
            let base = random_density::<f64>(3, seed).unwrap();
            let (frame, _) = diagnose(&base, &DiagnosticOptions::default()).unwrap();
            let rho_o = to_irb(&base, &frame).unwrap();
            let shrink = |t: f64| {
                let m = rho_o.matrix();
                let scaled =
                    CMatrix::from_fn(3, 3, |i, j| if i == j { m[(i, j)] } else { m[(i, j)].scale(t) });
                rel_entropy_coherence(&DensityOperator::new(scaled).unwrap())
            };
            let (r2, r3) = (shrink(1e-2) / 1e-4, shrink(1e-3) / 1e-6);
            assert!((r2 / r3 - 1.0).abs() < 0.05, "seed {seed}: {r2} vs {r3}");
        }
    }

    #[test]
    fn single_sector_state_has_undefined_cohesion() {
        let rep = diagnose(&DensityOperator::diagonal(&[1.0, 0.0]).unwrap(), &DiagnosticOptions::default())
            .unwrap()
            .1;
        assert_eq!(rep.p_c, None);
        assert_eq!(rep.a_lambda, None);
        assert!(rep.csv_row(0.0).ends_with("n/a"));
        let v: serde_json::Value = serde_json::to_value(&rep).unwrap();
        assert!(v["P_c"].is_null());
    }

    #[test]
    fn report_serialization() {
        let rep = diagnose(&qubit(0.5, 0.25), &DiagnosticOptions::default()).unwrap().1;
        assert_eq!(CSV_HEADER.split(',').count(), rep.csv_row(1.0).split(',').count());
        let v: serde_json::Value = serde_json::to_value(&rep).unwrap();
        assert!(close(v["P_c"].as_f64().unwrap(), 0.5, 1e-12));
        assert!(close(v["A_lambda"].as_f64().unwrap(), 2f64.ln() + 0.75, 1e-12));
        let bits = rep.in_bits();
        assert!(close(bits.s_p, 1.0, 1e-12));
    }

    #[test]
    fn fixed_frame_diagnostics_agree_with_irb() {
        for seed in 0..50u64 {
            let rho = random_density::<f64>(4, seed).unwrap();
            let opts = DiagnosticOptions::default();
            let (frame, rep) = diagnose(&rho, &opts).unwrap();
            let fixed = diagnose_in_frame(&to_irb(&rho, &frame).unwrap(), &opts).unwrap();
            assert!(close(rep.u, fixed.u, 1e-12));
            assert!(close(rep.p_c.unwrap(), fixed.p_c.unwrap(), 1e-10));
            assert!(close(rep.s_p, fixed.s_p, 1e-12));
        }
    }

    #[test]
    fn single_precision_report() {
        let rho = DensityOperator::<f32>::new(
            CMatrix::from_rows(&[
                vec![Cx::new(0.5f32, 0.), Cx::new(0., 0.25)],
                vec![Cx::new(0., -0.25), Cx::new(0.5, 0.)],
            ])
            .unwrap(),
        )
        .unwrap();
        let rep = diagnose(&rho, &DiagnosticOptions::default()).unwrap().1;
        assert!((rep.p_c.unwrap() - 0.5).abs() < 1e-5);
    }
}
