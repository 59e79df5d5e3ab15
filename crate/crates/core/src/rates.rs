//! Mutual information of the equivalent per-user channel and the DD-US
//! sum-rate upper bound α{H(κ)/T + κ I(x; y | s = 1)}.  Rates are in bits;
//! N₀ = 1 throughout, so `snr` is P/N₀.

use std::f64::consts::{E, LN_2, PI};
use std::sync::OnceLock;

use log::{debug, warn};

use crate::charfn::SchemeSpec;
use crate::error::{domain, Error, Result};
use crate::replica::{solve, solve_rs_t_inf, Assumption, SolverOptions, SystemParams};
use crate::selection::{output_entropy_gaussian, OutputDensityTable, SelectionModel, OUTPUT_TABLE_POINTS};
use crate::special::{gauss_hermite, sample_complex_gaussian, Quadrature, RngStream};

/// Default ακ interval searched by the κ optimizer.
pub const AK_MIN: f64 = 0.01;
pub const AK_MAX: f64 = 0.99;

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// −κ log₂κ − (1−κ) log₂(1−κ), with 0 log 0 = 0.
pub fn binary_entropy(kappa: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&kappa) {
        return Err(domain(format!("binary entropy needs 0 <= kappa <= 1, got {kappa}")));
    }
    let h = |p: f64| if p > 0.0 { -p * p.log2() } else { 0.0 };
    Ok(h(kappa) + h(1.0 - kappa))
}

fn hermite64() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_hermite(64))
}

/// log₂(1 + eᵗ) without overflow.
fn softplus2(t: f64) -> f64 {
    (t.max(0.0) + (-t.abs()).exp().ln_1p()) / LN_2
}

/// Binary-input AWGN mutual information at SNR γ = A²/σ²:
/// 1 − E[log₂(1 + exp(−2γ − 2√γ Z))], Z ~ N(0,1).
pub fn bi_awgn_mi(gamma: f64) -> f64 {
    if gamma <= 0.0 {
        return 0.0;
    }
    let (x, w) = hermite64();
    let s = gamma.sqrt();
    let mut acc = 0.0;
    for (xi, wi) in x.iter().zip(w) {
        let z = std::f64::consts::SQRT_2 * xi;
        acc += wi * softplus2(-2.0 * gamma - 2.0 * s * z);
    }
    (1.0 - acc / PI.sqrt()).clamp(0.0, 1.0)
}

/// QPSK over y = √γ x + n, n ~ CN(0,1): two independent binary-input real
/// channels at SNR γ each.
pub fn qpsk_mi(snr_eff: f64) -> f64 {
    2.0 * bi_awgn_mi(snr_eff)
}

/// Parameters of a rate evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateParams {
    pub sys: SystemParams,
    /// P/N₀, linear.
    pub snr: f64,
    pub assumption: Assumption,
}

impl RateParams {
    pub fn new(sys: SystemParams, snr: f64, assumption: Assumption) -> Result<Self> {
        let mut bad = sys.violations();
        if !(snr > 0.0 && snr.is_finite()) {
            bad.push(format!("snr must be finite and > 0 (got {snr})"));
        }
        if !bad.is_empty() {
            return Err(Error::InvalidParams(bad));
        }
        Ok(Self { sys, snr, assumption })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateResult {
    /// I(x; y | s = 1), bits per slot.
    pub mi_selected: f64,
    /// Bits per transmit antenna.
    pub bound: f64,
    pub kappa_used: f64,
    pub q_used: f64,
}

/// I(x; y | s = 1) for DD-US with QPSK: selection is independent of the
/// symbols, so this is plain QPSK at effective SNR P/q.
pub fn qpsk_mi_selected(rp: &RateParams, q: f64) -> Result<f64> {
    if rp.sys.scheme != SchemeSpec::DdUsQpsk {
        return Err(domain(format!("QPSK MI needs scheme dd-us-qpsk, got {}", rp.sys.scheme)));
    }
    if !(q > 0.0) {
        return Err(domain(format!("q must be > 0, got {q}")));
    }
    Ok(qpsk_mi(rp.snr / q))
}

/// Monte-Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MiEstimate {
    pub bits: f64,
    pub std_error: f64,
    /// Selected slots used.
    pub samples: usize,
    /// Set when the standard error exceeds the requested tolerance.
    pub imprecise: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McOptions {
    /// Selected slots to draw (rounded up to whole blocks).
    pub samples: usize,
    pub seed: u64,
    pub max_std_error: Option<f64>,
}

impl Default for McOptions {
    fn default() -> Self {
        Self {
            samples: 1_000_000,
            seed: 0,
            max_std_error: None,
        }
    }
}

fn check_gaussian(rp: &RateParams, sel: &SelectionModel) -> Result<()> {
    if rp.sys.scheme != SchemeSpec::DdUsGaussian || sel.scheme() != SchemeSpec::DdUsGaussian {
        return Err(domain("Gaussian-signaling MI needs scheme dd-us-gaussian"));
    }
    if !(sel.q() > 0.0) {
        return Err(domain("Gaussian-signaling MI needs q > 0"));
    }
    Ok(())
}

/// I(x; y | s = 1) for Gaussian DD-US by sampling selected blocks.
///
/// Blocks (x_t, z_t) are drawn from the prior and kept when
/// E = (1/T) Σ |x_t − √q z_t|² ≤ ξ, which is the law of a selected user's
/// symbols in the large-system limit.  Each slot contributes
/// log₂ p(y | x) − log₂ p(y | s = 1) with y = √(P/q) x + n; the standard
/// error is taken over block means since slots of one block are dependent.
pub fn gaussian_mi_selected(rp: &RateParams, sel: &SelectionModel, opts: &McOptions) -> Result<MiEstimate> {
    check_gaussian(rp, sel)?;
    if opts.samples == 0 {
        return Err(domain("sample count must be >= 1"));
    }
    let t = sel.t();
    let q = sel.q();
    let gain = (rp.snr / q).sqrt();
    let xi = sel.xi();
    let table = if xi.is_infinite() {
        None
    } else {
        Some(OutputDensityTable::build(sel, rp.snr, OUTPUT_TABLE_POINTS)?)
    };
    let var_y = rp.snr / q + 1.0;
    let ln_p_y = |u: f64| match &table {
        Some(tab) => tab.ln_pdf(u),
        None => -u / var_y - (PI * var_y).ln(),
    };
    let blocks = opts.samples.div_ceil(t);
    let mut rng = RngStream::new(opts.seed, 0x6d69);
    let sq = q.sqrt();
    let mut x = vec![Default::default(); t];
    let (mut sum, mut sum2) = (0.0, 0.0);
    let mut accepted = 0usize;
    while accepted < blocks {
        let mut e = 0.0;
        for xt in x.iter_mut() {
            *xt = sample_complex_gaussian(&mut rng, 1.0);
            let z = sample_complex_gaussian(&mut rng, 1.0);
            e += (*xt - sq * z).norm_sqr();
        }
        if e / t as f64 > xi {
            continue;
        }
        let mut block = 0.0;
        for xt in &x {
            let n = sample_complex_gaussian(&mut rng, 1.0);
            let y = gain * xt + n;
            let ln_cond = -n.norm_sqr() - PI.ln();
            block += (ln_cond - ln_p_y(y.norm_sqr())) / LN_2;
        }
        block /= t as f64;
        sum += block;
        sum2 += block * block;
        accepted += 1;
    }
    let nb = accepted as f64;
    let mean = sum / nb;
    let var = ((sum2 / nb - mean * mean) * nb / (nb - 1.0).max(1.0)).max(0.0);
    let se = (var / nb).sqrt();
    let imprecise = opts.max_std_error.is_some_and(|tol| se > tol);
    if imprecise {
        warn!("Gaussian MI standard error {se:.3e} exceeds the requested tolerance");
    }
    Ok(MiEstimate {
        bits: mean,
        std_error: se,
        samples: accepted * t,
        imprecise,
    })
}

/// Same quantity computed deterministically as h(y | s = 1) − h(n), with the
/// output entropy from a radial quadrature of p(y | s = 1).
pub fn gaussian_mi_selected_quadrature(rp: &RateParams, sel: &SelectionModel) -> Result<f64> {
    check_gaussian(rp, sel)?;
    let h_y = output_entropy_gaussian(sel, rp.snr)?;
    Ok(((h_y - (PI * E).ln()) / LN_2).max(0.0))
}

/// Order parameter q for `sys` under `assumption`.
pub fn order_parameter(sys: &SystemParams, assumption: Assumption, opts: &SolverOptions) -> Result<f64> {
    Ok(solve(sys, assumption, crate::replica::DEFAULT_TOL, opts)?.q())
}

/// I(x; y | s = 1) for a DD-US selection model (deterministic for both
/// alphabets).
pub fn mi_selected(sel: &SelectionModel, snr: f64) -> Result<f64> {
    match sel.scheme() {
        SchemeSpec::DdUsQpsk => Ok(qpsk_mi(snr / sel.q())),
        SchemeSpec::DdUsGaussian => {
            let sys = SystemParams {
                alpha: 1.0,
                kappa: sel.kappa(),
                t: sel.t(),
                scheme: SchemeSpec::DdUsGaussian,
            };
            let rp = RateParams {
                sys,
                snr,
                assumption: Assumption::Rs,
            };
            gaussian_mi_selected_quadrature(&rp, sel)
        }
        SchemeSpec::UsCvpQpsk => Err(domain("the sum-rate bound is only available for DD-US")),
    }
}

fn bound_value(alpha: f64, kappa: f64, t: usize, mi: f64) -> f64 {
    let h = binary_entropy(kappa).unwrap_or(0.0);
    alpha * (h / t as f64 + kappa * mi)
}

/// α{H(κ)/T + κ I(x; y | s = 1)} at the replica order parameter.
pub fn sum_rate_bound_dd_us(rp: &RateParams) -> Result<RateResult> {
    sum_rate_bound_dd_us_with(rp, &SolverOptions::default())
}

pub fn sum_rate_bound_dd_us_with(rp: &RateParams, opts: &SolverOptions) -> Result<RateResult> {
    if !rp.sys.scheme.is_dd_us() {
        return Err(domain(format!("the sum-rate bound is only available for DD-US, got {}", rp.sys.scheme)));
    }
    let q = order_parameter(&rp.sys, rp.assumption, opts)?;
    let sel = SelectionModel::from_params(rp.sys.scheme, rp.sys.t, q, rp.sys.kappa, opts.quad)?;
    let mi = mi_selected(&sel, rp.snr)?;
    Ok(RateResult {
        mi_selected: mi,
        bound: bound_value(rp.sys.alpha, rp.sys.kappa, rp.sys.t, mi),
        kappa_used: rp.sys.kappa,
        q_used: q,
    })
}

/// Bound as a function of SNR at fixed (α, κ, T): the order parameter and
/// the selection law do not depend on SNR, so they are solved once.
#[derive(Debug, Clone)]
pub struct BoundCurve {
    alpha: f64,
    sel: SelectionModel,
}

impl BoundCurve {
    pub fn new(sys: &SystemParams, assumption: Assumption, opts: &SolverOptions) -> Result<Self> {
        if !sys.scheme.is_dd_us() {
            return Err(domain(format!("the sum-rate bound is only available for DD-US, got {}", sys.scheme)));
        }
        let q = order_parameter(sys, assumption, opts)?;
        Self::from_order_parameter(sys, q, &opts.quad)
    }

    /// Curve at a given order parameter q.
    pub fn from_order_parameter(sys: &SystemParams, q: f64, quad: &Quadrature) -> Result<Self> {
        if !sys.scheme.is_dd_us() {
            return Err(domain(format!("the sum-rate bound is only available for DD-US, got {}", sys.scheme)));
        }
        let sel = SelectionModel::from_params(sys.scheme, sys.t, q, sys.kappa, *quad)?;
        Ok(Self { alpha: sys.alpha, sel })
    }

    pub fn kappa(&self) -> f64 {
        self.sel.kappa()
    }

    pub fn q(&self) -> f64 {
        self.sel.q()
    }

    pub fn at(&self, snr: f64) -> Result<RateResult> {
        let mi = mi_selected(&self.sel, snr)?;
        Ok(RateResult {
            mi_selected: mi,
            bound: bound_value(self.alpha, self.sel.kappa(), self.sel.t(), mi),
            kappa_used: self.sel.kappa(),
            q_used: self.sel.q(),
        })
    }
}

/// Maximize `f` over ακ: a uniform grid of `grid_size` points on
/// [AK_MIN, AK_MAX] followed by golden-section refinement inside the cell
/// pair around the best grid point.  Points where `f` fails are skipped.
/// Returns (ακ, value) of the best evaluated point.
pub fn maximize_over_alpha_kappa(
    grid_size: usize,
    mut f: impl FnMut(f64) -> Result<f64>,
) -> Result<(f64, f64)> {
    if grid_size < 2 {
        return Err(domain("grid_size must be >= 2"));
    }
    let step = (AK_MAX - AK_MIN) / (grid_size - 1) as f64;
    let mut best: Option<(f64, f64)> = None;
    let mut eval = |ak: f64, best: &mut Option<(f64, f64)>| -> Option<f64> {
        match f(ak) {
            Ok(v) if v.is_finite() => {
                if best.is_none_or(|(_, b)| v > b) {
                    *best = Some((ak, v));
                }
                Some(v)
            }
            Ok(_) => None,
            Err(e) => {
                debug!("ακ = {ak}: skipped ({e})");
                None
            }
        }
    };
    for i in 0..grid_size {
        eval(AK_MIN + step * i as f64, &mut best);
    }
    let Some((ak0, _)) = best else {
        return Err(Error::NoRoot { lo: AK_MIN, hi: AK_MAX });
    };
    let (mut a, mut b) = ((ak0 - step).max(AK_MIN), (ak0 + step).min(AK_MAX));
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - gr * (b - a);
    let mut x2 = a + gr * (b - a);
    let mut f1 = eval(x1, &mut best).unwrap_or(f64::NEG_INFINITY);
    let mut f2 = eval(x2, &mut best).unwrap_or(f64::NEG_INFINITY);
    while b - a > 1e-4 {
        if f1 >= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = eval(x1, &mut best).unwrap_or(f64::NEG_INFINITY);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = eval(x2, &mut best).unwrap_or(f64::NEG_INFINITY);
        }
    }
    Ok(best.expect("grid produced a best point"))
}

/// Bound maximized over κ for fixed (α, T, scheme, snr).
pub fn optimize_kappa(
    alpha: f64,
    t: usize,
    scheme: SchemeSpec,
    snr: f64,
    assumption: Assumption,
    grid_size: usize,
) -> Result<RateResult> {
    optimize_kappa_with(alpha, t, scheme, snr, assumption, grid_size, &SolverOptions::default())
}

pub fn optimize_kappa_with(
    alpha: f64,
    t: usize,
    scheme: SchemeSpec,
    snr: f64,
    assumption: Assumption,
    grid_size: usize,
    opts: &SolverOptions,
) -> Result<RateResult> {
    if grid_size < 16 {
        return Err(domain(format!("grid_size must be >= 16, got {grid_size}")));
    }
    let mut results: Vec<(f64, RateResult)> = Vec::new();
    let (ak, _) = maximize_over_alpha_kappa(grid_size, |ak| {
        let sys = SystemParams::new(alpha, ak / alpha, t, scheme)?;
        let rp = RateParams::new(sys, snr, assumption)?;
        let r = sum_rate_bound_dd_us_with(&rp, opts)?;
        results.push((ak, r));
        Ok(r.bound)
    })?;
    Ok(results
        .into_iter()
        .find(|(a, _)| *a == ak)
        .map(|(_, r)| r)
        .expect("best point was evaluated"))
}

/// CVP with random user selection: the T → ∞ US-CVP order parameter
/// (equal to CVP-RUS in the large-system limit) and QPSK at effective SNR
/// P/q, rate ακ I per antenna.
pub fn cvp_rus_rate(alpha: f64, kappa: f64, snr: f64) -> Result<RateResult> {
    let q = solve_rs_t_inf(SchemeSpec::UsCvpQpsk, alpha, kappa, crate::replica::DEFAULT_TOL)?.q0;
    let mi = qpsk_mi(snr / q);
    Ok(RateResult {
        mi_selected: mi,
        bound: alpha * kappa * mi,
        kappa_used: kappa,
        q_used: q,
    })
}

/// Per-κ order parameters of the CVP-RUS reference, SNR independent.
#[derive(Debug, Clone)]
pub struct CvpRusCurve {
    alpha: f64,
    points: Vec<(f64, f64)>,
}

impl CvpRusCurve {
    pub fn new(alpha: f64, grid_size: usize) -> Result<Self> {
        if grid_size < 2 {
            return Err(domain("grid_size must be >= 2"));
        }
        let step = (AK_MAX - AK_MIN) / (grid_size - 1) as f64;
        let mut points = Vec::with_capacity(grid_size);
        for i in 0..grid_size {
            let ak = AK_MIN + step * i as f64;
            match solve_rs_t_inf(SchemeSpec::UsCvpQpsk, alpha, ak / alpha, crate::replica::DEFAULT_TOL) {
                Ok(s) => points.push((ak, s.q0)),
                Err(e) => debug!("CVP-RUS ακ = {ak}: skipped ({e})"),
            }
        }
        if points.is_empty() {
            return Err(Error::NoRoot { lo: AK_MIN, hi: AK_MAX });
        }
        Ok(Self { alpha, points })
    }

    /// Best rate over the κ grid at `snr`.
    pub fn best(&self, snr: f64) -> RateResult {
        self.points
            .iter()
            .map(|&(ak, q)| {
                let mi = qpsk_mi(snr / q);
                RateResult {
                    mi_selected: mi,
                    bound: ak * mi,
                    kappa_used: ak / self.alpha,
                    q_used: q,
                }
            })
            .fold(None, |acc: Option<RateResult>, r| match acc {
                Some(a) if a.bound >= r.bound => Some(a),
                _ => Some(r),
            })
            .expect("nonempty curve")
    }
}

/// Optimized DD-US bound as a function of SNR, with the per-κ selection
/// laws solved once.
#[derive(Debug, Clone)]
pub struct OptimizedBound {
    curves: Vec<BoundCurve>,
}

impl OptimizedBound {
    pub fn new(alpha: f64, t: usize, scheme: SchemeSpec, assumption: Assumption, grid_size: usize, opts: &SolverOptions) -> Result<Self> {
        if grid_size < 2 {
            return Err(domain("grid_size must be >= 2"));
        }
        let step = (AK_MAX - AK_MIN) / (grid_size - 1) as f64;
        let mut curves = Vec::with_capacity(grid_size);
        for i in 0..grid_size {
            let ak = AK_MIN + step * i as f64;
            let c = SystemParams::new(alpha, ak / alpha, t, scheme)
                .and_then(|sys| BoundCurve::new(&sys, assumption, opts));
            match c {
                Ok(c) => curves.push(c),
                Err(e) => debug!("ακ = {ak}: skipped ({e})"),
            }
        }
        if curves.is_empty() {
            return Err(Error::NoRoot { lo: AK_MIN, hi: AK_MAX });
        }
        Ok(Self { curves })
    }

    pub fn best(&self, snr: f64) -> Result<RateResult> {
        let mut best: Option<RateResult> = None;
        for c in &self.curves {
            let r = c.at(snr)?;
            if best.is_none_or(|b| r.bound > b.bound) {
                best = Some(r);
            }
        }
        Ok(best.expect("nonempty"))
    }
}

/// SNR in dB at which a nondecreasing rate curve reaches `target`, by
/// bisection on [lo_db, hi_db].
pub fn snr_db_for_rate(mut rate: impl FnMut(f64) -> Result<f64>, target: f64, lo_db: f64, hi_db: f64, tol_db: f64) -> Result<f64> {
    let (mut lo, mut hi) = (lo_db, hi_db);
    if rate(db_to_linear(lo))? >= target || rate(db_to_linear(hi))? < target {
        return Err(Error::NoRoot { lo: lo_db, hi: hi_db });
    }
    while hi - lo > tol_db {
        let mid = 0.5 * (lo + hi);
        if rate(db_to_linear(mid))? >= target {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// SNRs at which the optimized DD-US bound and the CVP-RUS reference reach
/// `target` bits per antenna.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrGap {
    pub target_bits: f64,
    pub dd_us_snr_db: f64,
    pub cvp_rus_snr_db: f64,
}

impl SnrGap {
    pub fn gap_db(&self) -> f64 {
        self.cvp_rus_snr_db - self.dd_us_snr_db
    }
}

pub fn snr_gap(dd_us: &OptimizedBound, cvp: &CvpRusCurve, target_bits: f64) -> Result<SnrGap> {
    let dd = snr_db_for_rate(|s| Ok(dd_us.best(s)?.bound), target_bits, -30.0, 40.0, 1e-3)?;
    let cv = snr_db_for_rate(|s| Ok(cvp.best(s).bound), target_bits, -30.0, 40.0, 1e-3)?;
    Ok(SnrGap {
        target_bits,
        dd_us_snr_db: dd,
        cvp_rus_snr_db: cv,
    })
}
