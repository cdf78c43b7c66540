//! GKSL generators, IRB-selectivity certification, dephasing rates and time
//! evolution.
//!
//! States evolve as `dρ/dt = −i[H, ρ] + Σ_α γ_α (L_α ρ L_α† − ½{L_α† L_α, ρ})`.
//! When every `L_α` and `H` are diagonal in the frame, each off-diagonal
//! entry evolves independently as `ρ_ij(t) = ρ_ij(t₀) e^{−(Γ_ij + iω_ij)(t − t₀)}`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::density::{DensityOperator, HermitianObservable};
use crate::diagnostics::{diagnose_in_frame, DiagnosticOptions, DiagnosticsReport, CSV_HEADER};
use crate::error::{Error, Result};
use crate::io::fmt_sig;
use crate::irb::IrbFrame;
use crate::matrix::{CMatrix, RMatrix};
use crate::scalar::{lit, to_f64, tol, Cx, Real};

/// Default tolerance on commutator norms for selectivity certification.
pub const DEFAULT_SELECTIVITY_TOL: f64 = 1e-12;
/// Rates at or below this count as vanishing.
pub const RATE_FLOOR: f64 = 1e-12;
/// Largest per-step trace drift that is silently renormalized.
const TRACE_DRIFT_LIMIT: f64 = 1e-9;

/// One dissipative channel `γ (L ρ L† − ½{L†L, ρ})`.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel<T> {
    pub gamma: T,
    pub l: CMatrix<T>,
}

/// Markovian generator: Hamiltonian plus jump channels.
#[derive(Clone, Debug, PartialEq)]
pub struct GkslGenerator<T> {
    h: HermitianObservable<T>,
    channels: Vec<Channel<T>>,
}

impl<T: Real> GkslGenerator<T> {
    /// Checks rates are non-negative and all operators share one dimension.
    pub fn new(h: HermitianObservable<T>, channels: Vec<Channel<T>>) -> Result<Self> {
        let d = h.dim();
        for (index, ch) in channels.iter().enumerate() {
            if !(ch.gamma >= T::zero()) {
                return Err(Error::NegativeRate { index, gamma: to_f64(ch.gamma) });
            }
            if !ch.l.is_square() {
                return Err(Error::NotSquare { rows: ch.l.rows(), cols: ch.l.cols() });
            }
            if ch.l.rows() != d {
                return Err(Error::DimMismatch { expected: d, found: ch.l.rows() });
            }
        }
        Ok(Self { h, channels })
    }

    /// `H = 0`, no channels.
    pub fn zero(dim: usize) -> Self {
        Self { h: HermitianObservable::zero(dim), channels: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.h.dim()
    }

    pub fn hamiltonian(&self) -> &HermitianObservable<T> {
        &self.h
    }

    pub fn channels(&self) -> &[Channel<T>] {
        &self.channels
    }

    /// Generator expressed in `frame`: every operator `X` becomes `Qᵀ X Q`.
    pub fn to_frame(&self, frame: &IrbFrame<T>) -> Result<Self> {
        self.rotated(&frame.q, false)
    }

    /// Inverse of [`to_frame`](Self::to_frame): `X ↦ Q X Qᵀ`.
    pub fn from_frame(&self, frame: &IrbFrame<T>) -> Result<Self> {
        self.rotated(&frame.q, true)
    }

    fn rotated(&self, q: &RMatrix<T>, inverse: bool) -> Result<Self> {
        if q.rows() != self.dim() {
            return Err(Error::DimMismatch { expected: self.dim(), found: q.rows() });
        }
        let rot = |m: &CMatrix<T>| if inverse { m.congruence_by_transpose(q) } else { m.congruence_by(q) };
        Ok(Self {
            h: HermitianObservable::new(rot(self.h.matrix()))?,
            channels: self.channels.iter().map(|c| Channel { gamma: c.gamma, l: rot(&c.l) }).collect(),
        })
    }

    /// `‖H‖ + Σ γ ‖L‖²` in spectral norm.
    pub fn norm(&self) -> T {
        self.h.matrix().spectral_norm()
            + self.channels.iter().map(|c| c.gamma * c.l.spectral_norm().powi(2)).sum::<T>()
    }
}

/// Minimal selective dissipator: one projector channel `(γ_i, Π_i)` per
/// index and `H = 0`.
pub fn minimal_dephasing<T: Real>(gammas: &[T], dim: usize) -> Result<GkslGenerator<T>> {
    if gammas.len() != dim {
        return Err(Error::DimMismatch { expected: dim, found: gammas.len() });
    }
    let channels = gammas
        .iter()
        .enumerate()
        .map(|(i, &gamma)| Channel { gamma, l: projector(dim, i) })
        .collect();
    GkslGenerator::new(HermitianObservable::zero(dim), channels)
}

fn projector<T: Real>(dim: usize, i: usize) -> CMatrix<T> {
    CMatrix::from_fn(dim, dim, |r, c| if r == i && c == i { Cx::new(T::one(), T::zero()) } else { Cx::new(T::zero(), T::zero()) })
}

/// Random generator that is diagonal in the basis it is written in: complex
/// Gaussian channel diagonals, rates uniform in `[0.2, 2]`, Gaussian diagonal
/// Hamiltonian. Deterministic per seed.
pub fn random_selective_generator<T: Real>(dim: usize, channels: usize, seed: u64) -> Result<GkslGenerator<T>> {
    if dim == 0 {
        return Err(Error::InvalidArgument("dimension must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut normal = || -> f64 { rng.sample(StandardNormal) };
    let h: Vec<T> = (0..dim).map(|_| lit(normal())).collect();
    let mut chans = Vec::with_capacity(channels);
    for _ in 0..channels {
        let diag: Vec<Cx<T>> = (0..dim).map(|_| Cx::new(lit(normal()), lit(normal()))).collect();
        chans.push(Channel { gamma: T::zero(), l: CMatrix::from_diagonal(&diag) });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    for ch in &mut chans {
        ch.gamma = lit(rng.gen_range(0.2..2.0));
    }
    GkslGenerator::new(HermitianObservable::from_real_diagonal(&h), chans)
}

/// Replaces each `L_α` by `L_α + ε M_α`. Every `M_α` must have unit
/// spectral norm.
pub fn perturbed_generator<T: Real>(
    gen_diag: &GkslGenerator<T>,
    perturbations: &[CMatrix<T>],
    epsilon: T,
) -> Result<GkslGenerator<T>> {
    if perturbations.len() != gen_diag.channels.len() {
        return Err(Error::DimMismatch { expected: gen_diag.channels.len(), found: perturbations.len() });
    }
    let mut channels = gen_diag.channels.clone();
    for (ch, m) in channels.iter_mut().zip(perturbations) {
        if !m.is_square() || m.rows() != gen_diag.dim() {
            return Err(Error::DimMismatch { expected: gen_diag.dim(), found: m.rows() });
        }
        let norm = m.spectral_norm();
        if (norm - T::one()).abs() > tol(1e-9) {
            return Err(Error::InvalidArgument(format!("perturbation must have unit spectral norm, got {norm}")));
        }
        ch.l = &ch.l + &m.scale(Cx::new(epsilon, T::zero()));
    }
    GkslGenerator::new(gen_diag.h.clone(), channels)
}

/// Pairwise dephasing rates `Γ` and frequencies `ω` of a selective generator.
#[derive(Clone, Debug, PartialEq)]
pub struct RateMatrix<T> {
    /// Symmetric, non-negative, zero diagonal.
    pub gamma: RMatrix<T>,
    /// Antisymmetric.
    pub omega: RMatrix<T>,
    /// Smallest rate over pairs with `Γ_ij > 1e-12`.
    pub gamma_min_active: Option<T>,
}

impl<T: Real> RateMatrix<T> {
    /// `Γ_ij = ½ Σ_α γ_α |ℓ_αi − ℓ_αj|²` and
    /// `ω_ij = h_i − h_j + Σ_α γ_α Im(conj(ℓ_αi) ℓ_αj)`, where the last term
    /// is the frequency shift carried by complex channel diagonals.
    pub fn from_diagonals(gammas: &[T], ells: &[Vec<Cx<T>>], h_diag: &[T]) -> Result<Self> {
        if gammas.len() != ells.len() {
            return Err(Error::DimMismatch { expected: gammas.len(), found: ells.len() });
        }
        let d = h_diag.len();
        if let Some(bad) = ells.iter().find(|l| l.len() != d) {
            return Err(Error::DimMismatch { expected: d, found: bad.len() });
        }
        if let Some((index, &g)) = gammas.iter().enumerate().find(|(_, &g)| !(g >= T::zero())) {
            return Err(Error::NegativeRate { index, gamma: to_f64(g) });
        }
        let half = lit::<T>(0.5);
        let mut gamma = RMatrix::zeros(d, d);
        let mut omega = RMatrix::zeros(d, d);
        for i in 0..d {
            for j in (i + 1)..d {
                let mut g = T::zero();
                let mut w = h_diag[i] - h_diag[j];
                for (&ga, l) in gammas.iter().zip(ells) {
                    g += ga * (l[i] - l[j]).norm_sqr() * half;
                    w += ga * (l[i].conj() * l[j]).im;
                }
                gamma[(i, j)] = g;
                gamma[(j, i)] = g;
                omega[(i, j)] = w;
                omega[(j, i)] = -w;
            }
        }
        let gamma_min_active = upper_pairs(d)
            .map(|(i, j)| gamma[(i, j)])
            .filter(|&g| g > lit(RATE_FLOOR))
            .reduce(T::min);
        Ok(Self { gamma, omega, gamma_min_active })
    }

    pub fn dim(&self) -> usize {
        self.gamma.rows()
    }

    /// Pairs `(i, j)`, `i < j`, with `Γ_ij ≤ 1e-12`.
    pub fn undamped_pairs(&self) -> Vec<(usize, usize)> {
        upper_pairs(self.dim()).filter(|&(i, j)| self.gamma[(i, j)] <= lit(RATE_FLOOR)).collect()
    }

    /// Every rate multiplied by `s`, frequencies untouched.
    pub fn scaled(&self, s: T) -> Self {
        Self {
            gamma: self.gamma.map(|g| g * s),
            omega: self.omega.clone(),
            gamma_min_active: self.gamma_min_active.map(|g| g * s),
        }
    }
}

fn upper_pairs(d: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..d).flat_map(move |i| ((i + 1)..d).map(move |j| (i, j)))
}

/// Outcome of testing `[L_α, Π_i] = 0` in a frame.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SelectivityCertificate<T> {
    pub is_selective: bool,
    /// `max_{α,i} ‖[L_α, Π_i]‖` in spectral norm.
    pub max_commutator_norm: T,
    /// Per channel, `max_i ‖[L_α, Π_i]‖`.
    pub per_channel_deviation: Vec<T>,
    /// `max_i ‖[H, Π_i]‖`. Not part of the verdict; the analytic propagator
    /// additionally needs it to vanish.
    pub hamiltonian_deviation: T,
    /// Off-diagonal over diagonal Frobenius mass of the `L_α`.
    pub epsilon_estimate: T,
    /// Advisory: `epsilon_estimate < 0.1 Γ_min / Σγ`.
    pub near_selective: bool,
    pub tol: T,
}

impl<T: Real> SelectivityCertificate<T> {
    fn into_error(self) -> Error {
        Error::NotSelective {
            max_commutator_norm: to_f64(self.max_commutator_norm),
            tol: to_f64(self.tol),
            per_channel_deviation: self.per_channel_deviation.into_iter().map(to_f64).collect(),
            hamiltonian_deviation: to_f64(self.hamiltonian_deviation),
            epsilon_estimate: to_f64(self.epsilon_estimate),
        }
    }
}

fn max_projector_commutator<T: Real>(m: &CMatrix<T>) -> T {
    let d = m.rows();
    (0..d).map(|i| m.commutator(&projector(d, i)).spectral_norm()).fold(T::zero(), T::max)
}

fn certify_in_basis<T: Real>(gen: &GkslGenerator<T>, tol_: T) -> SelectivityCertificate<T> {
    let per_channel: Vec<T> = gen.channels.iter().map(|c| max_projector_commutator(&c.l)).collect();
    let max_norm = per_channel.iter().copied().fold(T::zero(), T::max);
    let (mut off, mut diag) = (T::zero(), T::zero());
    for c in &gen.channels {
        off += c.l.off_diagonal_part().hs_norm().powi(2);
        diag += c.l.diagonal_part().hs_norm().powi(2);
    }
    let epsilon_estimate = if off == T::zero() {
        T::zero()
    } else if diag == T::zero() {
        T::infinity()
    } else {
        (off / diag).sqrt()
    };
    let rates = diagonal_rates(gen).ok();
    let total_gamma: T = gen.channels.iter().map(|c| c.gamma).sum();
    let near_selective = match rates.and_then(|r| r.gamma_min_active) {
        Some(gmin) if total_gamma > T::zero() => epsilon_estimate < lit::<T>(0.1) * gmin / total_gamma,
        _ => false,
    };
    SelectivityCertificate {
        is_selective: max_norm <= tol_,
        max_commutator_norm: max_norm,
        per_channel_deviation: per_channel,
        hamiltonian_deviation: max_projector_commutator(gen.h.matrix()),
        epsilon_estimate,
        near_selective,
        tol: tol_,
    }
}

/// Certifies IRB-selectivity of `gen` after rotating it into `frame`.
pub fn check_selectivity<T: Real>(
    gen: &GkslGenerator<T>,
    frame: &IrbFrame<T>,
    tol_: T,
) -> Result<SelectivityCertificate<T>> {
    Ok(certify_in_basis(&gen.to_frame(frame)?, tol_))
}

/// Rates from the diagonals of the operators, ignoring any off-diagonal part.
fn diagonal_rates<T: Real>(gen: &GkslGenerator<T>) -> Result<RateMatrix<T>> {
    let gammas: Vec<T> = gen.channels.iter().map(|c| c.gamma).collect();
    let ells: Vec<Vec<Cx<T>>> = gen.channels.iter().map(|c| c.l.diagonal()).collect();
    let h: Vec<T> = gen.h.matrix().diagonal().into_iter().map(|z| z.re).collect();
    RateMatrix::from_diagonals(&gammas, &ells, &h)
}

/// Rate matrix of a generator already written in the frame. Fails with
/// [`Error::NotSelective`] unless every `L_α` and `H` are diagonal to `tol`.
pub fn dephasing_rates<T: Real>(gen: &GkslGenerator<T>, tol_: T) -> Result<RateMatrix<T>> {
    let cert = certify_in_basis(gen, tol_);
    if !cert.is_selective || cert.hamiltonian_deviation > tol_ {
        return Err(cert.into_error());
    }
    diagonal_rates(gen)
}

/// Sampled states with their diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub states: Vec<DensityOperator<T>>,
    pub reports: Vec<DiagnosticsReport<T>>,
    /// `Γ_min_active` of the generator, when known.
    pub gamma_min: Option<T>,
}

impl<T: Real> Trajectory<T> {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// `|ρ_ij(t)|` at every sample.
    pub fn coherence_modulus(&self, i: usize, j: usize) -> Vec<T> {
        self.states.iter().map(|s| s.entry(i, j).norm()).collect()
    }

    /// CSV with one diagnostics row per sample, followed by `|ρ_ij|`
    /// columns for the given pairs.
    pub fn to_csv(&self, pairs: &[(usize, usize)]) -> String {
        let mut out = String::from(CSV_HEADER);
        for (i, j) in pairs {
            out.push_str(&format!(",abs_n_{i}_{j}"));
        }
        out.push('\n');
        for ((t, s), r) in self.times.iter().zip(&self.states).zip(&self.reports) {
            out.push_str(&r.csv_row(*t));
            for &(i, j) in pairs {
                out.push(',');
                out.push_str(&fmt_sig(to_f64(s.entry(i, j).norm())));
            }
            out.push('\n');
        }
        out
    }
}

fn check_times<T: Real>(times: &[T]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidArgument("at least one sample time is required".into()));
    }
    if let Some(k) = (1..times.len()).find(|&k| !(times[k] > times[k - 1])) {
        return Err(Error::NonMonotoneTimes { index: k });
    }
    Ok(())
}

/// Exact propagation of a state written in the frame where `rates` were
/// computed. Populations are constant.
pub fn evolve_analytic<T: Real>(
    rho0_o: &DensityOperator<T>,
    rates: &RateMatrix<T>,
    times: &[T],
    opts: &DiagnosticOptions<T>,
) -> Result<Trajectory<T>> {
    check_times(times)?;
    let d = rho0_o.dim();
    if rates.dim() != d {
        return Err(Error::DimMismatch { expected: d, found: rates.dim() });
    }
    let t0 = times[0];
    let m0 = rho0_o.matrix();
    let mut states = Vec::with_capacity(times.len());
    let mut reports = Vec::with_capacity(times.len());
    for &t in times {
        let tau = t - t0;
        let m = CMatrix::from_fn(d, d, |i, j| {
            if i == j {
                m0[(i, i)]
            } else {
                let rate = Cx::new(-rates.gamma[(i, j)] * tau, -rates.omega[(i, j)] * tau);
                m0[(i, j)] * rate.exp()
            }
        });
        let state = DensityOperator::new(m)?;
        reports.push(diagnose_in_frame(&state, opts)?);
        states.push(state);
    }
    Ok(Trajectory { times: times.to_vec(), states, reports, gamma_min: rates.gamma_min_active })
}

/// Right-hand side `−i(H_eff ρ − ρ H_eff†) + Σ γ L ρ L†` with
/// `H_eff = H − (i/2) Σ γ L†L`.
struct Lindbladian<T> {
    h_eff: CMatrix<T>,
    h_eff_adj: CMatrix<T>,
    jumps: Vec<(CMatrix<T>, CMatrix<T>)>,
}

impl<T: Real> Lindbladian<T> {
    fn new(gen: &GkslGenerator<T>) -> Self {
        let mut h_eff = gen.h.matrix().clone();
        let mut jumps = Vec::new();
        for c in &gen.channels {
            if c.gamma == T::zero() {
                continue;
            }
            let l_adj = c.l.adjoint();
            let k = (&l_adj * &c.l).scale(Cx::new(T::zero(), -c.gamma * lit(0.5)));
            h_eff = &h_eff + &k;
            jumps.push((c.l.scale(Cx::new(c.gamma, T::zero())), l_adj));
        }
        let h_eff_adj = h_eff.adjoint();
        Self { h_eff, h_eff_adj, jumps }
    }

    fn apply(&self, rho: &CMatrix<T>) -> CMatrix<T> {
        let minus_i = Cx::new(T::zero(), -T::one());
        let mut out = (&(&self.h_eff * rho) - &(rho * &self.h_eff_adj)).scale(minus_i);
        for (gl, l_adj) in &self.jumps {
            out = &out + &(&(gl * rho) * l_adj);
        }
        out
    }

    fn rk4(&self, rho: &CMatrix<T>, h: T) -> CMatrix<T> {
        let half = Cx::new(h * lit(0.5), T::zero());
        let full = Cx::new(h, T::zero());
        let sixth = Cx::new(h / lit(6.0), T::zero());
        let two = Cx::new(lit(2.0), T::zero());
        let k1 = self.apply(rho);
        let k2 = self.apply(&(rho + &k1.scale(half)));
        let k3 = self.apply(&(rho + &k2.scale(half)));
        let k4 = self.apply(&(rho + &k3.scale(full)));
        let sum = &(&k1 + &(&k2 + &k3).scale(two)) + &k4;
        rho + &sum.scale(sixth)
    }
}

fn renormalize<T: Real>(m: CMatrix<T>) -> Result<CMatrix<T>> {
    let m = m.hermitian_part();
    let tr = m.trace().re;
    let drift = (tr - T::one()).abs();
    if drift > tol(TRACE_DRIFT_LIMIT) || !drift.is_finite() {
        return Err(Error::StepTooCoarse(format!("trace drifted by {:e} in one step", to_f64(drift))));
    }
    Ok(m.scale(Cx::new(T::one() / tr, T::zero())))
}

/// Classical RK4 integration of the full master equation. The internal step
/// is `min(step, 0.1 / ‖gen‖)`, shortened to land on every sample time.
/// Diagnostics are evaluated in the basis the state is written in.
pub fn evolve_numeric<T: Real>(
    rho0: &DensityOperator<T>,
    gen: &GkslGenerator<T>,
    times: &[T],
    step: T,
    opts: &DiagnosticOptions<T>,
) -> Result<Trajectory<T>> {
    check_times(times)?;
    if !(step > T::zero()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    if gen.dim() != rho0.dim() {
        return Err(Error::DimMismatch { expected: rho0.dim(), found: gen.dim() });
    }
    let norm = gen.norm();
    let h_max = if norm > T::zero() { step.min(lit::<T>(0.1) / norm) } else { step };
    let lindblad = Lindbladian::new(gen);
    let mut rho = rho0.matrix().clone();
    let mut states = Vec::with_capacity(times.len());
    let mut reports = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        if k > 0 {
            let span = t - times[k - 1];
            let n = (span / h_max).ceil().to_usize().unwrap_or(1).max(1);
            let h = span / lit(n as f64);
            for _ in 0..n {
                rho = renormalize(lindblad.rk4(&rho, h))?;
            }
        }
        let state = DensityOperator::new(rho.clone())?;
        reports.push(diagnose_in_frame(&state, opts)?);
        states.push(state);
    }
    let gamma_min = dephasing_rates(gen, lit(DEFAULT_SELECTIVITY_TOL)).ok().and_then(|r| r.gamma_min_active);
    Ok(Trajectory { times: times.to_vec(), states, reports, gamma_min })
}

/// Checks rows and columns of `m` sum to one and entries are non-negative.
pub fn check_doubly_stochastic<T: Real>(m: &RMatrix<T>) -> Result<()> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
    }
    let d = m.rows();
    let mut deviation = T::zero();
    for i in 0..d {
        let row: T = (0..d).map(|j| m[(i, j)]).sum();
        let col: T = (0..d).map(|j| m[(j, i)]).sum();
        deviation = deviation.max((row - T::one()).abs()).max((col - T::one()).abs());
        for j in 0..d {
            deviation = deviation.max(-m[(i, j)]);
        }
    }
    if deviation > tol(1e-10) {
        return Err(Error::NotDoublyStochastic { deviation: to_f64(deviation) });
    }
    Ok(())
}

/// `M a` without reordering.
pub(crate) fn mix_populations<T: Real>(a: &[T], m: &RMatrix<T>) -> Result<Vec<T>> {
    check_doubly_stochastic(m)?;
    if m.rows() != a.len() {
        return Err(Error::DimMismatch { expected: a.len(), found: m.rows() });
    }
    Ok((0..a.len()).map(|i| (0..a.len()).map(|j| m[(i, j)] * a[j]).sum()).collect())
}

/// One doubly stochastic mixing step `a' = M a`, re-sorted descending.
pub fn classical_mixing_step<T: Real>(a: &[T], m: &RMatrix<T>) -> Result<Vec<T>> {
    let mut out = mix_populations(a, m)?;
    out.sort_by(|x, y| y.partial_cmp(x).unwrap_or(std::cmp::Ordering::Equal));
    Ok(out)
}
