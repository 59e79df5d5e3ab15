//! Finite-size Monte Carlo: Rayleigh channels, zero-forcing, user
//! selection strategies, convex CVP and the order-statistics oracle of the
//! decoupled selection problem.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;
use log::debug;
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::seq::index::sample as sample_indices;

use crate::charfn::SchemeSpec;
use crate::error::{domain, Error, Result};
use crate::special::{sample_complex_gaussian, RngStream};

/// Relative zero-forcing residual accepted on every solve.
pub const ZF_RESIDUAL_TOL: f64 = 1e-10;
pub const CVP_MAX_ITERATIONS: usize = 10_000;
pub const CVP_DEFAULT_TOL: f64 = 1e-9;
const POWER_ITERATIONS: usize = 50;

type CMatrix = DMatrix<Complex64>;
type CVector = DVector<Complex64>;

#[derive(Debug, Clone)]
pub struct SimConfig {
    pub n: usize,
    pub k: usize,
    pub k_tilde: usize,
    pub t: usize,
    pub scheme: SchemeSpec,
    pub trials: usize,
    pub rng: RngStream,
}

impl SimConfig {
    pub fn new(n: usize, k: usize, k_tilde: usize, t: usize, scheme: SchemeSpec, trials: usize, seed: u64) -> Result<Self> {
        let cfg = Self {
            n,
            k,
            k_tilde,
            t,
            scheme,
            trials,
            rng: RngStream::new(seed, 0),
        };
        let bad = cfg.violations();
        if bad.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::InvalidParams(bad))
        }
    }

    /// K̃ = round(κK).
    pub fn from_kappa(n: usize, k: usize, kappa: f64, t: usize, scheme: SchemeSpec, trials: usize, seed: u64) -> Result<Self> {
        Self::new(n, k, (kappa * k as f64).round() as usize, t, scheme, trials, seed)
    }

    pub fn violations(&self) -> Vec<String> {
        let mut bad = Vec::new();
        if self.n == 0 {
            bad.push("N must be >= 1".into());
        }
        if self.k == 0 {
            bad.push("K must be >= 1".into());
        }
        if self.k_tilde == 0 {
            bad.push("K̃ must be >= 1".into());
        }
        if self.k_tilde > self.k.min(self.n) {
            bad.push(format!("K̃ <= min(K, N) required (K̃={}, K={}, N={})", self.k_tilde, self.k, self.n));
        }
        if self.t == 0 {
            bad.push("T must be >= 1".into());
        }
        if self.trials == 0 {
            bad.push("trials must be >= 1".into());
        }
        bad
    }
}

/// K×N channel, rows h_k.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    pub entries: CMatrix,
}

impl ChannelMatrix {
    pub fn users(&self) -> usize {
        self.entries.nrows()
    }

    pub fn antennas(&self) -> usize {
        self.entries.ncols()
    }

    pub fn rows(&self, users: &[usize]) -> ChannelMatrix {
        ChannelMatrix {
            entries: self.entries.select_rows(users.iter()),
        }
    }

    /// H Hᴴ.
    pub fn gram(&self) -> CMatrix {
        &self.entries * self.entries.adjoint()
    }
}

/// I.i.d. CN(0, 1/N) entries.
pub fn sample_channel(n: usize, k: usize, rng: &mut RngStream) -> ChannelMatrix {
    let var = 1.0 / n as f64;
    let mut m = CMatrix::zeros(k, n);
    for i in 0..k {
        for j in 0..n {
            m[(i, j)] = sample_complex_gaussian(rng, var);
        }
    }
    ChannelMatrix { entries: m }
}

/// T×K data symbols with unit average power: CN(0,1) for the Gaussian
/// scheme, (±1 ± i)/√2 otherwise.
pub fn sample_symbols(scheme: SchemeSpec, t: usize, k: usize, rng: &mut RngStream) -> CMatrix {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut x = CMatrix::zeros(t, k);
    for i in 0..t {
        for j in 0..k {
            x[(i, j)] = if scheme.is_qpsk() {
                let re = if rng.uniform() < 0.5 { h } else { -h };
                let im = if rng.uniform() < 0.5 { h } else { -h };
                Complex64::new(re, im)
            } else {
                sample_complex_gaussian(rng, 1.0)
            };
        }
    }
    x
}

/// Cholesky factor of the Gram matrix of the selected rows.
pub struct ZfSolver {
    h: CMatrix,
    chol: nalgebra::Cholesky<Complex64, nalgebra::Dyn>,
}

impl ZfSolver {
    pub fn new(h_k: &ChannelMatrix) -> Result<Self> {
        let gram = h_k.gram();
        let chol = gram
            .cholesky()
            .ok_or_else(|| Error::SingularChannel(format!("Gram matrix of {} users is not positive definite", h_k.users())))?;
        let l = chol.l_dirty();
        let (lo, hi) = (0..l.nrows()).fold((f64::INFINITY, 0.0f64), |(a, b), i| {
            let d = l[(i, i)].re;
            (a.min(d), b.max(d))
        });
        if lo <= 1e-7 * hi {
            return Err(Error::SingularChannel(format!(
                "Gram matrix of {} users is numerically singular (pivot ratio {:.3e})",
                h_k.users(),
                lo / hi
            )));
        }
        Ok(Self {
            h: h_k.entries.clone(),
            chol,
        })
    }

    /// u = Hᴴ(HHᴴ)⁻¹x̃, with the zero-forcing residual checked.
    pub fn precode(&self, x: &CVector) -> Result<CVector> {
        let u = self.h.adjoint() * self.chol.solve(x);
        let res = (&self.h * &u - x).norm();
        let scale = x.norm().max(f64::MIN_POSITIVE);
        if res > ZF_RESIDUAL_TOL * scale {
            return Err(Error::SingularChannel(format!(
                "zero-forcing residual {res:.3e} exceeds {ZF_RESIDUAL_TOL:e}·‖x̃‖"
            )));
        }
        Ok(u)
    }

    /// x̃ᴴ(HHᴴ)⁻¹x̃.
    pub fn quadratic_form(&self, x: &CVector) -> f64 {
        x.dotc(&self.chol.solve(x)).re
    }

    /// (HHᴴ)⁻¹ as a dense matrix.
    pub fn inverse_gram(&self) -> CMatrix {
        self.chol.inverse()
    }
}

pub fn zfbf_vector(h_k: &ChannelMatrix, x: &[Complex64]) -> Result<CVector> {
    if x.len() != h_k.users() {
        return Err(domain(format!("expected {} symbols, got {}", h_k.users(), x.len())));
    }
    ZfSolver::new(h_k)?.precode(&CVector::from_column_slice(x))
}

/// (1/T) Σ_t ‖u_t‖² for a T×K̃ block of (modified) symbols.
pub fn energy_penalty_block(h_k: &ChannelMatrix, symbols: &CMatrix) -> Result<f64> {
    if symbols.ncols() != h_k.users() {
        return Err(domain(format!(
            "symbol block has {} columns, expected {}",
            symbols.ncols(),
            h_k.users()
        )));
    }
    let zf = ZfSolver::new(h_k)?;
    let t = symbols.nrows();
    let mut acc = 0.0;
    for i in 0..t {
        let x = symbols.row(i).transpose();
        acc += zf.precode(&x)?.norm_squared();
    }
    Ok(acc / t as f64)
}

/// Uniform K̃-subset of 0..K, sorted.
pub fn random_user_selection(k: usize, k_tilde: usize, rng: &mut RngStream) -> Result<Vec<usize>> {
    if k_tilde > k {
        return Err(domain(format!("cannot select {k_tilde} of {k} users")));
    }
    let mut v = sample_indices(rng.rng(), k, k_tilde).into_vec();
    v.sort_unstable();
    Ok(v)
}

fn columns(symbols: &CMatrix, users: &[usize]) -> CMatrix {
    symbols.select_columns(users.iter())
}

/// Forward greedy DD-US: repeatedly add the user whose inclusion raises the
/// block penalty least.
///
/// With r_k the component of h_k orthogonal to the selected rows and u_t the
/// current minimum-norm precoders, adding k gives
/// u_t' = u_t + (x_{k,t} − h_k u_t) r_kᴴ/‖r_k‖², so the penalty grows by
/// (1/T) Σ_t |x_{k,t} − h_k u_t|²/‖r_k‖².  Residuals and the products h_k u_t
/// are updated in place; ties go to the lowest index.
pub fn greedy_dd_us(h: &ChannelMatrix, symbols: &CMatrix, k_tilde: usize) -> Result<(Vec<usize>, f64)> {
    let (k, n) = (h.users(), h.antennas());
    let t = symbols.nrows();
    if symbols.ncols() != k {
        return Err(domain(format!("symbol block has {} columns, expected {k}", symbols.ncols())));
    }
    if k_tilde == 0 || k_tilde > k.min(n) {
        return Err(domain(format!("K̃ must lie in 1..=min(K, N), got {k_tilde}")));
    }
    let mut resid = h.entries.clone();
    let row_norm: Vec<f64> = (0..k).map(|i| h.entries.row(i).norm_squared()).collect();
    // hu[(t, k)] = h_k u_t for the current selection
    let mut hu = CMatrix::zeros(t, k);
    let mut chosen = Vec::with_capacity(k_tilde);
    let mut free = vec![true; k];
    let mut total = 0.0;
    for _ in 0..k_tilde {
        let mut best: Option<(usize, f64)> = None;
        for j in (0..k).filter(|&j| free[j]) {
            let rn = resid.row(j).norm_squared();
            if rn <= 1e-12 * row_norm[j] {
                continue;
            }
            let mut d = 0.0;
            for s in 0..t {
                d += (symbols[(s, j)] - hu[(s, j)]).norm_sqr();
            }
            let d = d / (t as f64 * rn);
            if best.is_none_or(|(_, b)| d < b) {
                best = Some((j, d));
            }
        }
        let (j, d) = best.ok_or_else(|| Error::SingularChannel("no user keeps the selected rows independent".into()))?;
        total += d;
        let r = resid.row(j).into_owned();
        let rn = r.norm_squared();
        // g_i = h_i r_jᴴ = r_i r_jᴴ for every user i
        let g: Vec<Complex64> = (0..k).map(|i| resid.row(i).dotc(&r).conj()).collect();
        for s in 0..t {
            let c = (symbols[(s, j)] - hu[(s, j)]) / rn;
            for i in 0..k {
                hu[(s, i)] += c * g[i];
            }
        }
        for i in (0..k).filter(|&i| free[i] && i != j) {
            let coef = g[i] / rn;
            for c in 0..n {
                let v = r[c];
                resid[(i, c)] -= coef * v;
            }
        }
        free[j] = false;
        chosen.push(j);
    }
    let mut sorted = chosen.clone();
    sorted.sort_unstable();
    let exact = energy_penalty_block(&h.rows(&sorted), &columns(symbols, &sorted))?;
    debug!("greedy penalty {total:.6e} (incremental) vs {exact:.6e} (direct)");
    Ok((sorted, exact))
}

/// Minimum block penalty over all K̃-subsets, by enumeration.
pub fn exhaustive_min_penalty(h: &ChannelMatrix, symbols: &CMatrix, k_tilde: usize) -> Result<(Vec<usize>, f64)> {
    let mut best: Option<(Vec<usize>, f64)> = None;
    for s in (0..h.users()).combinations(k_tilde) {
        let p = energy_penalty_block(&h.rows(&s), &columns(symbols, &s))?;
        if best.as_ref().is_none_or(|(_, b)| p < *b) {
            best = Some((s, p));
        }
    }
    best.ok_or_else(|| domain("no subsets to enumerate"))
}

/// Subset minimizing Tr((H_S H_Sᴴ)⁻¹), the data-independent criterion that
/// the block penalty tends to as T → ∞.
pub fn trace_criterion_subset(h: &ChannelMatrix, k_tilde: usize) -> Result<Vec<usize>> {
    let mut best: Option<(Vec<usize>, f64)> = None;
    for s in (0..h.users()).combinations(k_tilde) {
        let tr = ZfSolver::new(&h.rows(&s))?.inverse_gram().trace().re;
        if best.as_ref().is_none_or(|(_, b)| tr < *b) {
            best = Some((s, tr));
        }
    }
    best.map(|(s, _)| s).ok_or_else(|| domain("no subsets to enumerate"))
}

/// Convex vector precoding for QPSK: minimize x̃ᴴ A x̃, A = (H_K H_Kᴴ)⁻¹,
/// with each real and imaginary part of x̃ on the half-line that starts at
/// the corresponding component of x and points away from zero.
///
/// Projected gradient descent with step 1/L, L = 2λ_max(A) from power
/// iteration (inflated 5% so the estimate, a lower bound, cannot make the
/// step too long).  Stops when the projected-gradient norm is ≤ `tol`.
pub fn cvp_solve(h_k: &ChannelMatrix, x: &[Complex64], tol: f64) -> Result<Vec<Complex64>> {
    cvp_solve_traced(h_k, x, tol, |_| {})
}

/// As [`cvp_solve`], reporting the objective after every iteration.
pub fn cvp_solve_traced(h_k: &ChannelMatrix, x: &[Complex64], tol: f64, mut trace: impl FnMut(f64)) -> Result<Vec<Complex64>> {
    let kt = h_k.users();
    if x.len() != kt {
        return Err(domain(format!("expected {kt} symbols, got {}", x.len())));
    }
    if !(tol > 0.0) {
        return Err(domain("tol must be > 0"));
    }
    let a = ZfSolver::new(h_k)?.inverse_gram();
    let a = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let mut v = CVector::from_element(kt, Complex64::new(1.0, 0.0));
    let mut lam = 0.0;
    for _ in 0..POWER_ITERATIONS {
        let w = &a * &v;
        lam = v.dotc(&w).re / v.norm_squared();
        let nw = w.norm();
        if nw == 0.0 {
            break;
        }
        v = w / Complex64::new(nw, 0.0);
    }
    let step = 1.0 / (2.0 * lam * 1.05);
    let project = |z: Complex64, corner: Complex64| {
        let re = if corner.re > 0.0 { z.re.max(corner.re) } else { z.re.min(corner.re) };
        let im = if corner.im > 0.0 { z.im.max(corner.im) } else { z.im.min(corner.im) };
        Complex64::new(re, im)
    };
    let corner = CVector::from_column_slice(x);
    let mut cur = corner.clone();
    let objective = |z: &CVector| z.dotc(&(&a * z)).re;
    let mut best = (objective(&cur), cur.clone());
    let mut resid = f64::INFINITY;
    for it in 0..CVP_MAX_ITERATIONS {
        let grad = (&a * &cur) * Complex64::new(2.0, 0.0);
        let next = CVector::from_iterator(
            kt,
            cur.iter()
                .zip(grad.iter())
                .zip(corner.iter())
                .map(|((&c, &g), &b)| project(c - g * step, b)),
        );
        resid = (&cur - &next).norm() / step;
        cur = next;
        let f = objective(&cur);
        trace(f);
        if f <= best.0 {
            best = (f, cur.clone());
        }
        if resid <= tol {
            debug!("cvp converged after {} iterations", it + 1);
            return Ok(cur.iter().copied().collect());
        }
    }
    Err(Error::NotConverged {
        iterations: CVP_MAX_ITERATIONS,
        residual: resid,
        best: best.1.iter().copied().collect(),
    })
}

/// User-selection / precoding strategy for [`empirical_penalty`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Strategy {
    ZfbfFull,
    ZfbfRus,
    CvpRus,
    GreedyDdUs,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Self::ZfbfFull, Self::ZfbfRus, Self::CvpRus, Self::GreedyDdUs];

    pub fn name(self) -> &'static str {
        match self {
            Self::ZfbfFull => "zfbf-full",
            Self::ZfbfRus => "zfbf-rus",
            Self::CvpRus => "cvp-rus",
            Self::GreedyDdUs => "greedy-dd-us",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|x| x.name() == s.trim().to_ascii_lowercase())
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown strategy '{s}' (expected zfbf-full, zfbf-rus, cvp-rus or greedy-dd-us)"
                ))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimReport {
    /// Mean per-selected-user penalty.
    pub mean: f64,
    pub std_error: f64,
    /// Successful trials.
    pub trials: usize,
    pub failed: usize,
    pub seed: u64,
    pub stream_id: u64,
}

/// Mean and standard error of a sample.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (m, f64::NAN);
    }
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

/// Per-selected-user penalty of one trial.
pub fn trial_penalty(cfg: &SimConfig, strategy: Strategy, rng: &mut RngStream) -> Result<f64> {
    let h = sample_channel(cfg.n, cfg.k, rng);
    let x = sample_symbols(cfg.scheme, cfg.t, cfg.k, rng);
    match strategy {
        Strategy::ZfbfFull => {
            if cfg.k > cfg.n {
                return Err(domain(format!("full ZFBF needs K <= N (K={}, N={})", cfg.k, cfg.n)));
            }
            Ok(energy_penalty_block(&h, &x)? / cfg.k as f64)
        }
        Strategy::ZfbfRus => {
            let s = random_user_selection(cfg.k, cfg.k_tilde, rng)?;
            Ok(energy_penalty_block(&h.rows(&s), &columns(&x, &s))? / cfg.k_tilde as f64)
        }
        Strategy::CvpRus => {
            if !cfg.scheme.is_qpsk() {
                return Err(domain("CVP needs QPSK symbols"));
            }
            let s = random_user_selection(cfg.k, cfg.k_tilde, rng)?;
            let hs = h.rows(&s);
            let xs = columns(&x, &s);
            let zf = ZfSolver::new(&hs)?;
            let mut acc = 0.0;
            for i in 0..cfg.t {
                let row: Vec<Complex64> = xs.row(i).iter().copied().collect();
                let xt = cvp_solve(&hs, &row, CVP_DEFAULT_TOL)?;
                acc += zf.quadratic_form(&CVector::from_vec(xt));
            }
            Ok(acc / (cfg.t * cfg.k_tilde) as f64)
        }
        Strategy::GreedyDdUs => {
            let (_, p) = greedy_dd_us(&h, &x, cfg.k_tilde)?;
            Ok(p / cfg.k_tilde as f64)
        }
    }
}

/// Monte-Carlo per-selected-user penalty; trial i uses the stream
/// `cfg.rng.derive(i)`, so results do not depend on evaluation order.
pub fn empirical_penalty(cfg: &SimConfig, strategy: Strategy) -> Result<SimReport> {
    let bad = cfg.violations();
    if !bad.is_empty() {
        return Err(Error::InvalidParams(bad));
    }
    let mut vals = Vec::with_capacity(cfg.trials);
    let mut failed = 0;
    let mut last_err = None;
    for i in 0..cfg.trials {
        let mut rng = cfg.rng.derive(i as u64);
        match trial_penalty(cfg, strategy, &mut rng) {
            Ok(v) => vals.push(v),
            Err(e) => {
                debug!("trial {i} failed: {e}");
                failed += 1;
                last_err = Some(e);
            }
        }
    }
    if vals.is_empty() {
        return Err(last_err.unwrap_or_else(|| domain("no trials ran")));
    }
    let (mean, se) = mean_and_se(&vals);
    Ok(SimReport {
        mean,
        std_error: se,
        trials: vals.len(),
        failed,
        seed: cfg.rng.seed(),
        stream_id: cfg.rng.stream_id(),
    })
}

/// A Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

impl Estimate {
    /// |value − target| in standard errors.
    pub fn z_score(&self, target: f64) -> f64 {
        (self.value - target).abs() / self.std_error
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderStatReport {
    /// Mean of the trimmed sum (1/K) Σ_{k ≤ K̃} E_(k).
    pub mean: Estimate,
    /// K · Var of the trimmed sum.
    pub k_variance: Estimate,
    /// K̃-th order statistic E_(K̃).
    pub quantile: Estimate,
    pub k_tilde: usize,
}

/// One draw of the decoupled energy E_k(q) with the inner minimization in
/// closed form.
pub fn sample_energy(scheme: SchemeSpec, q: f64, t: usize, rng: &mut RngStream) -> f64 {
    let sq = q.sqrt();
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut acc = 0.0;
    for _ in 0..t {
        match scheme {
            SchemeSpec::DdUsGaussian => {
                let x = sample_complex_gaussian(rng, 1.0);
                let z = sample_complex_gaussian(rng, 1.0);
                acc += (x - sq * z).norm_sqr();
            }
            SchemeSpec::DdUsQpsk => {
                let x = Complex64::new(
                    if rng.uniform() < 0.5 { h } else { -h },
                    if rng.uniform() < 0.5 { h } else { -h },
                );
                let z = sample_complex_gaussian(rng, 1.0);
                acc += (x - sq * z).norm_sqr();
            }
            SchemeSpec::UsCvpQpsk => {
                // by symmetry take every corner at +1/√2; the half-line
                // [1/√2, ∞) absorbs noisy points above the corner
                let z = sample_complex_gaussian(rng, 1.0);
                for w in [sq * z.re, sq * z.im] {
                    if w < h {
                        acc += (h - w).powi(2);
                    }
                }
            }
        }
    }
    acc / t as f64
}

/// Sample variance and its standard error, sqrt((m₄ − s⁴ (n−3)/(n−1))/n).
fn variance_estimate(xs: &[f64]) -> Estimate {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let s2 = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    let m4 = xs.iter().map(|x| (x - m).powi(4)).sum::<f64>() / n;
    let var_s2 = ((m4 - s2 * s2 * (n - 3.0) / (n - 1.0)) / n).max(0.0);
    Estimate {
        value: s2,
        std_error: var_s2.sqrt(),
    }
}

/// Directly simulates the trimmed sum of K i.i.d. energies: per trial, sort,
/// keep the K̃ = round(κK) smallest, record (1/K) Σ, and E_(K̃).
pub fn order_stat_oracle(
    scheme: SchemeSpec,
    q: f64,
    kappa: f64,
    t: usize,
    k: usize,
    trials: usize,
    rng: &RngStream,
) -> Result<OrderStatReport> {
    if !(kappa > 0.0 && kappa <= 1.0) {
        return Err(domain(format!("kappa must lie in (0, 1], got {kappa}")));
    }
    if trials < 2 || k == 0 || t == 0 || !(q >= 0.0) {
        return Err(domain("order-statistics oracle needs trials >= 2, K >= 1, T >= 1, q >= 0"));
    }
    let k_tilde = ((kappa * k as f64).round() as usize).clamp(1, k);
    let mut sums = Vec::with_capacity(trials);
    let mut quants = Vec::with_capacity(trials);
    let mut e = vec![0.0; k];
    for i in 0..trials {
        let mut r = rng.derive(i as u64);
        for v in e.iter_mut() {
            *v = sample_energy(scheme, q, t, &mut r);
        }
        e.select_nth_unstable_by(k_tilde - 1, |a, b| a.total_cmp(b));
        quants.push(e[k_tilde - 1]);
        sums.push(e[..k_tilde].iter().sum::<f64>() / k as f64);
    }
    let (m, m_se) = mean_and_se(&sums);
    let (qv, q_se) = mean_and_se(&quants);
    let var = variance_estimate(&sums);
    let kf = k as f64;
    Ok(OrderStatReport {
        mean: Estimate { value: m, std_error: m_se },
        k_variance: Estimate {
            value: kf * var.value,
            std_error: kf * var.std_error,
        },
        quantile: Estimate { value: qv, std_error: q_se },
        k_tilde,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charfn::EnergyCdf;
    use crate::special::Quadrature;

    fn rng(seed: u64) -> RngStream {
        RngStream::new(seed, 7)
    }

    fn qpsk_vec(k: usize, r: &mut RngStream) -> Vec<Complex64> {
        let m = sample_symbols(SchemeSpec::DdUsQpsk, 1, k, r);
        m.row(0).iter().copied().collect()
    }

    #[test]
    fn channel_shape_variance_and_replay() {
        let h = sample_channel(4, 2, &mut rng(1));
        assert_eq!((h.users(), h.antennas()), (2, 4));
        assert_eq!(h, sample_channel(4, 2, &mut rng(1)));
        let big = sample_channel(50, 20_000, &mut rng(2));
        let v = big.entries.iter().map(|z| z.norm_sqr()).sum::<f64>() / 1e6;
        assert!((v * 50.0 - 1.0).abs() < 0.01, "{v}");
    }

    #[test]
    fn zf_single_user_closed_form() {
        let h = sample_channel(6, 1, &mut rng(3));
        let x = [Complex64::new(0.3, -1.2)];
        let u = zfbf_vector(&h, &x).unwrap();
        let hn = h.entries.row(0).norm_squared();
        assert!((u.norm_squared() - x[0].norm_sqr() / hn).abs() < 1e-12);
    }

    #[test]
    fn zf_residual_and_energy_identity() {
        let mut r = rng(4);
        for _ in 0..20 {
            let h = sample_channel(12, 8, &mut r);
            let x: Vec<Complex64> = (0..8).map(|_| sample_complex_gaussian(&mut r, 1.0)).collect();
            let u = zfbf_vector(&h, &x).unwrap();
            let xv = CVector::from_column_slice(&x);
            assert!((&h.entries * &u - &xv).norm() <= 1e-10 * xv.norm());
            let direct = xv.dotc(&(h.gram().try_inverse().unwrap() * &xv)).re;
            assert!((u.norm_squared() - direct).abs() < 1e-10 * direct);
        }
    }

    #[test]
    fn singular_gram_is_reported() {
        let mut h = sample_channel(4, 2, &mut rng(5));
        let row = h.entries.row(0).into_owned();
        h.entries.set_row(1, &row);
        for x in [[Complex64::new(1.0, 0.0); 2], [Complex64::new(1.0, 0.0), Complex64::new(-1.0, 0.0)]] {
            assert!(matches!(zfbf_vector(&h, &x), Err(Error::SingularChannel(_))));
        }
    }

    #[test]
    fn identity_gram_penalty_is_symbol_energy() {
        let n = 5;
        let mut h = CMatrix::zeros(3, n);
        for i in 0..3 {
            h[(i, i)] = Complex64::new(1.0, 0.0);
        }
        let h = ChannelMatrix { entries: h };
        let x = sample_symbols(SchemeSpec::DdUsGaussian, 4, 3, &mut rng(6));
        let want = x.norm_squared() / 4.0;
        assert!((energy_penalty_block(&h, &x).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn random_selection_frequencies() {
        let mut r = rng(8);
        assert_eq!(random_user_selection(5, 5, &mut r).unwrap(), vec![0, 1, 2, 3, 4]);
        let trials = 100_000;
        let hits = (0..trials)
            .filter(|_| random_user_selection(10, 3, &mut r).unwrap().contains(&1))
            .count() as f64;
        let p = 0.3;
        let se = (p * (1.0 - p) / trials as f64).sqrt();
        assert!((hits / trials as f64 - p).abs() < 3.0 * se);
        assert!(random_user_selection(3, 4, &mut r).is_err());
    }

    #[test]
    fn greedy_single_pick_and_full_set() {
        let mut r = rng(9);
        for _ in 0..20 {
            let h = sample_channel(4, 2, &mut r);
            let x = sample_symbols(SchemeSpec::DdUsGaussian, 3, 2, &mut r);
            let score = |k: usize| (0..3).map(|s| x[(s, k)].norm_sqr()).sum::<f64>() / 3.0 / h.entries.row(k).norm_squared();
            let want = if score(0) <= score(1) { 0 } else { 1 };
            let (sel, p) = greedy_dd_us(&h, &x, 1).unwrap();
            assert_eq!(sel, vec![want]);
            assert!((p - score(want)).abs() < 1e-12);
            let (all, pf) = greedy_dd_us(&h, &x, 2).unwrap();
            assert_eq!(all, vec![0, 1]);
            assert!((pf - energy_penalty_block(&h, &x).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn greedy_incremental_energy_matches_direct() {
        let mut r = rng(10);
        let h = sample_channel(16, 24, &mut r);
        let x = sample_symbols(SchemeSpec::DdUsGaussian, 5, 24, &mut r);
        let (sel, p) = greedy_dd_us(&h, &x, 10).unwrap();
        assert_eq!(sel.len(), 10);
        let direct = energy_penalty_block(&h.rows(&sel), &columns(&x, &sel)).unwrap();
        assert!((p - direct).abs() < 1e-10 * direct);
    }

    #[test]
    fn greedy_bounded_by_exhaustive_and_remark_one() {
        let mut r = rng(11);
        for _ in 0..10 {
            let h = sample_channel(8, 8, &mut r);
            let x = sample_symbols(SchemeSpec::DdUsGaussian, 2, 8, &mut r);
            let (_, g) = greedy_dd_us(&h, &x, 4).unwrap();
            let (_, best) = exhaustive_min_penalty(&h, &x, 4).unwrap();
            assert!(g >= best - 1e-12);
            let s = trace_criterion_subset(&h, 4).unwrap();
            let at_trace = energy_penalty_block(&h.rows(&s), &columns(&x, &s)).unwrap();
            assert!(best <= at_trace + 1e-12);
        }
    }

    #[test]
    fn cvp_identity_gram_and_single_user() {
        let mut r = rng(12);
        let mut h = CMatrix::zeros(3, 3);
        for i in 0..3 {
            h[(i, i)] = Complex64::new(1.0, 0.0);
        }
        let h = ChannelMatrix { entries: h };
        let x = qpsk_vec(3, &mut r);
        let xt = cvp_solve(&h, &x, 1e-10).unwrap();
        for (a, b) in xt.iter().zip(&x) {
            assert!((a - b).norm() < 1e-12);
        }
        let h1 = sample_channel(4, 1, &mut r);
        let x1 = qpsk_vec(1, &mut r);
        let xt1 = cvp_solve(&h1, &x1, 1e-10).unwrap();
        assert!((xt1[0] - x1[0]).norm() < 1e-12);
    }

    #[test]
    fn cvp_descends_and_beats_corner() {
        let mut r = rng(13);
        for _ in 0..10 {
            let h = sample_channel(10, 6, &mut r);
            let x = qpsk_vec(6, &mut r);
            let zf = ZfSolver::new(&h).unwrap();
            let start = zf.quadratic_form(&CVector::from_column_slice(&x));
            let mut prev = start;
            let mut monotone = true;
            let xt = cvp_solve_traced(&h, &x, 1e-9, |f| {
                monotone &= f <= prev * (1.0 + 1e-12);
                prev = f;
            })
            .unwrap();
            assert!(monotone);
            let end = zf.quadratic_form(&CVector::from_vec(xt.clone()));
            assert!(end <= start + 1e-12);
            for (a, b) in xt.iter().zip(&x) {
                assert!(a.re * b.re.signum() >= b.re.abs() - 1e-12);
                assert!(a.im * b.im.signum() >= b.im.abs() - 1e-12);
            }
        }
    }

    #[test]
    fn zfbf_full_load_matches_wishart_limit() {
        let cfg = SimConfig::new(200, 100, 100, 1, SchemeSpec::DdUsGaussian, 20, 1).unwrap();
        let rep = empirical_penalty(&cfg, Strategy::ZfbfFull).unwrap();
        assert!((rep.mean / 2.0 - 1.0).abs() < 0.05, "{rep:?}");
        let again = empirical_penalty(&cfg, Strategy::ZfbfFull).unwrap();
        assert_eq!(rep, again);
    }

    #[test]
    fn config_violations_listed_together() {
        match SimConfig::new(4, 2, 3, 0, SchemeSpec::DdUsQpsk, 0, 1) {
            Err(Error::InvalidParams(v)) => assert_eq!(v.len(), 3, "{v:?}"),
            other => panic!("{other:?}"),
        }
        assert!(SimConfig::new(4, 2, 0, 1, SchemeSpec::DdUsQpsk, 1, 1).is_err());
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
        assert!("best".parse::<Strategy>().is_err());
    }

    #[test]
    fn sampled_energy_means() {
        let mut r = rng(14);
        let n = 200_000;
        for scheme in SchemeSpec::ALL {
            let q = 0.7;
            let m = EnergyCdf::new(scheme, 4, q, Quadrature::default()).unwrap().mean();
            let xs: Vec<f64> = (0..n).map(|_| sample_energy(scheme, q, 4, &mut r)).collect();
            let (mean, se) = mean_and_se(&xs);
            assert!((mean - m).abs() < 4.0 * se, "{scheme}: {mean} {m} {se}");
        }
    }

    #[test]
    fn order_stat_oracle_small_run() {
        let q = 0.5;
        let cdf = EnergyCdf::new(SchemeSpec::DdUsGaussian, 8, q, Quadrature::default()).unwrap();
        let o = cdf.order_stats(0.5).unwrap();
        let rep = order_stat_oracle(SchemeSpec::DdUsGaussian, q, 0.5, 8, 500, 100, &rng(15)).unwrap();
        assert_eq!(rep.k_tilde, 250);
        assert!(rep.mean.z_score(o.mean) < 4.0, "{rep:?} {o:?}");
        assert!(rep.quantile.z_score(o.xi) < 4.0, "{rep:?} {o:?}");
        assert!(rep.k_variance.z_score(o.variance) < 4.0, "{rep:?} {o:?}");
    }
}
