//! Replica fixed points of the selection problem and the resulting energy
//! penalty per selected user.
//!
//! RS: q0 = α μ_{κ,T}(q0), smallest root.
//!
//! 1RSB: (q1, χ) solving
//!   ln(1 + q1/χ)   = (α/χ)(μ − Tσ²/(2χ))
//!   q1/(χ + q1)    = (α/χ)(μ − Tσ²/χ)
//! with μ, σ² evaluated at q1.  Eliminating σ² gives
//!   2χ ln(1 + q1/χ) − χ q1/(χ + q1) = α μ(q1),
//! whose left side is q1·φ(χ/q1) with φ increasing from 0 to 1.  So for each
//! q with αμ(q) < q the ratio c = χ/q is unique, and the second equation
//! becomes a scalar residual in q that is scanned for its first zero.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::charfn::{asymptotic_selected_mean, EnergyCdf, SchemeSpec};
use crate::error::{domain, Error, Result};
use crate::special::{first_root_on_grid, log_grid, smallest_positive_root, Quadrature};

pub const DEFAULT_GRID_POINTS: usize = 512;
pub const DEFAULT_TOL: f64 = 1e-8;
const Q_MIN: f64 = 1e-6;
const BISECT_TOL: f64 = 1e-13;

/// Replica assumption used to pick the order parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Assumption {
    Rs,
    OneRsb,
}

impl Assumption {
    pub fn name(self) -> &'static str {
        match self {
            Self::Rs => "rs",
            Self::OneRsb => "1rsb",
        }
    }
}

impl fmt::Display for Assumption {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Assumption {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rs" => Ok(Self::Rs),
            "1rsb" | "one-rsb" | "onersb" => Ok(Self::OneRsb),
            other => Err(Error::Config(format!(
                "unknown assumption '{other}' (expected rs or 1rsb)"
            ))),
        }
    }
}

/// α = K/N, κ = K̃/K, block length T and scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub alpha: f64,
    pub kappa: f64,
    pub t: usize,
    pub scheme: SchemeSpec,
}

impl SystemParams {
    pub fn new(alpha: f64, kappa: f64, t: usize, scheme: SchemeSpec) -> Result<Self> {
        let p = Self {
            alpha,
            kappa,
            t,
            scheme,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn violations(&self) -> Vec<String> {
        let mut bad = Vec::new();
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            bad.push(format!("alpha must be > 0 (got {})", self.alpha));
        }
        if !(self.kappa > 0.0 && self.kappa <= 1.0) {
            bad.push(format!("kappa must lie in (0, 1] (got {})", self.kappa));
        }
        if self.t == 0 {
            bad.push("T must be >= 1".to_string());
        }
        if !(self.alpha * self.kappa < 1.0) {
            bad.push(format!(
                "ακ < 1 required (got {})",
                self.alpha * self.kappa
            ));
        }
        bad
    }

    pub fn validate(&self) -> Result<()> {
        let bad = self.violations();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidParams(bad))
        }
    }

    pub fn alpha_kappa(&self) -> f64 {
        self.alpha * self.kappa
    }

    /// Default scan ceiling 50ακ/(1−ακ).
    pub fn default_q_max(&self) -> f64 {
        let ak = self.alpha_kappa();
        50.0 * ak / (1.0 - ak)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RsSolution {
    pub q0: f64,
    pub penalty_per_user: f64,
    /// |q0 − αμ(q0)|.
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneRsbSolution {
    pub q1: f64,
    pub chi: f64,
    pub penalty_per_user: f64,
    /// Residuals of the two coupled equations at (q1, χ).
    pub residual_42: f64,
    pub residual_43: f64,
}

/// Either kind of solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReplicaSolution {
    Rs(RsSolution),
    OneRsb(OneRsbSolution),
}

impl ReplicaSolution {
    pub fn q(&self) -> f64 {
        match self {
            Self::Rs(s) => s.q0,
            Self::OneRsb(s) => s.q1,
        }
    }

    pub fn penalty_per_user(&self) -> f64 {
        match self {
            Self::Rs(s) => s.penalty_per_user,
            Self::OneRsb(s) => s.penalty_per_user,
        }
    }

    pub fn residual(&self) -> f64 {
        match self {
            Self::Rs(s) => s.residual,
            Self::OneRsb(s) => s.residual_42.abs().max(s.residual_43.abs()),
        }
    }
}

/// Solver controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub quad: Quadrature,
    pub grid_points: usize,
    /// Number of times q_max may be doubled before giving up.
    pub max_doublings: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            quad: Quadrature::default(),
            grid_points: DEFAULT_GRID_POINTS,
            max_doublings: 3,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Stats {
    mu: f64,
    sigma2: Option<f64>,
}

/// Per-invocation cache of μ(q) and σ²(q), keyed on q quantized to 1e-10.
struct StatsMemo {
    p: SystemParams,
    quad: Quadrature,
    map: HashMap<i64, Stats>,
}

impl StatsMemo {
    fn new(p: SystemParams, quad: Quadrature) -> Self {
        Self {
            p,
            quad,
            map: HashMap::new(),
        }
    }

    fn key(q: f64) -> i64 {
        (q / 1e-10).round() as i64
    }

    fn get(&mut self, q: f64, need_sigma: bool) -> Result<Stats> {
        let k = Self::key(q);
        if let Some(s) = self.map.get(&k) {
            if !need_sigma || s.sigma2.is_some() {
                return Ok(*s);
            }
        }
        let m = EnergyCdf::new(self.p.scheme, self.p.t, q, self.quad)?;
        let s = if self.p.kappa >= 1.0 {
            let o = m.order_stats(1.0)?;
            Stats {
                mu: o.mean,
                sigma2: Some(o.variance),
            }
        } else if need_sigma {
            let o = m.order_stats(self.p.kappa)?;
            Stats {
                mu: o.mean,
                sigma2: Some(o.variance),
            }
        } else {
            Stats {
                mu: m.truncated_mean(self.p.kappa)?,
                sigma2: None,
            }
        };
        self.map.insert(k, s);
        Ok(s)
    }
}

fn scan_ceilings(p: &SystemParams, opts: &SolverOptions) -> Vec<f64> {
    let base = p.default_q_max();
    (0..=opts.max_doublings)
        .map(|i| base * 2f64.powi(i as i32))
        .collect()
}

/// RS fixed point with default solver options.
pub fn solve_rs(p: &SystemParams, tol: f64) -> Result<RsSolution> {
    solve_rs_with(p, tol, &SolverOptions::default())
}

pub fn solve_rs_with(p: &SystemParams, tol: f64, opts: &SolverOptions) -> Result<RsSolution> {
    p.validate()?;
    if !(tol > 0.0) {
        return Err(domain("tol must be > 0"));
    }
    let mut memo = StatsMemo::new(*p, opts.quad);
    let q0 = rs_root(p, tol, opts, &mut memo)?;
    let mu = memo.get(q0, false)?.mu;
    Ok(RsSolution {
        q0,
        penalty_per_user: q0 / p.alpha_kappa(),
        residual: (q0 - p.alpha * mu).abs(),
    })
}

fn rs_root(p: &SystemParams, tol: f64, opts: &SolverOptions, memo: &mut StatsMemo) -> Result<f64> {
    let alpha = p.alpha;
    let mut last_hi = 0.0;
    for q_max in scan_ceilings(p, opts) {
        last_hi = q_max;
        let grid = log_grid(Q_MIN.min(q_max), q_max, opts.grid_points.max(2));
        let root = first_root_on_grid(&grid, BISECT_TOL.min(tol), |q| {
            memo.get(q, false).map(|s| Some(q - alpha * s.mu))
        })?;
        if let Some(q0) = root {
            return Ok(q0);
        }
    }
    Err(Error::NoRoot {
        lo: Q_MIN,
        hi: last_hi,
    })
}

/// 1 − φ(c), φ(c) = 2c ln(1 + 1/c) − c/(c + 1).
pub(crate) fn one_minus_phi(c: f64) -> f64 {
    if c > 20.0 {
        let x = 1.0 / c;
        let mut p = x * x;
        let mut s = 0.0;
        for m in 2..40 {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            s += sign * (m as f64 - 1.0) / (m as f64 + 1.0) * p;
            p *= x;
        }
        s
    } else {
        1.0 - (2.0 * c * (1.0 / c).ln_1p() - c / (c + 1.0))
    }
}

/// Inverse of 1 − φ on (0, 1): the unique c > 0 with 1 − φ(c) = d.
fn solve_ratio(d: f64) -> f64 {
    // 1 − φ decreases from 1 (c → 0) to 0 (c → ∞)
    let (mut lo, mut hi) = (1e-300_f64.ln(), 1e300_f64.ln());
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if one_minus_phi(mid.exp()) > d {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    (0.5 * (lo + hi)).exp()
}

/// Left side of the reduced equation, 2χ ln(1 + q/χ) − χq/(χ + q).
pub fn reduced_lhs(q: f64, chi: f64) -> f64 {
    q * (1.0 - one_minus_phi(chi / q))
}

fn one_rsb_residuals(p: &SystemParams, q: f64, chi: f64, mu: f64, sigma2: f64) -> (f64, f64) {
    let a = p.alpha;
    let tf = p.t as f64;
    let r42 = (q / chi).ln_1p() - a / chi * (mu - tf * sigma2 / (2.0 * chi));
    let r43 = q / (chi + q) - a / chi * (mu - tf * sigma2 / chi);
    (r42, r43)
}

/// 1RSB fixed point with default solver options.
pub fn solve_1rsb(p: &SystemParams, tol: f64) -> Result<OneRsbSolution> {
    solve_1rsb_with(p, tol, &SolverOptions::default())
}

pub fn solve_1rsb_with(p: &SystemParams, tol: f64, opts: &SolverOptions) -> Result<OneRsbSolution> {
    p.validate()?;
    if !(tol > 0.0) {
        return Err(domain("tol must be > 0"));
    }
    let mut memo = StatsMemo::new(*p, opts.quad);
    let alpha = p.alpha;
    let tf = p.t as f64;
    // No solution below the RS root; the 1RSB root can sit within a fraction
    // of a percent above it, so the scan runs on relative offsets from q0.
    let q0 = rs_root(p, tol, opts, &mut memo)?;
    let mut last_hi = 0.0;
    for q_max in scan_ceilings(p, opts) {
        if q_max <= q0 {
            continue;
        }
        last_hi = q_max;
        let offsets = log_grid(1e-8, q_max / q0 - 1.0, opts.grid_points.max(2));
        let grid: Vec<f64> = offsets.iter().map(|e| q0 * (1.0 + e)).collect();
        let root = first_root_on_grid(&grid, BISECT_TOL.min(tol), |q| {
            let s = memo.get(q, true)?;
            let d = 1.0 - alpha * s.mu / q;
            if !(d > 0.0 && d < 1.0) {
                return Ok(None);
            }
            let c = solve_ratio(d);
            let sigma2 = s.sigma2.unwrap_or(0.0);
            Ok(Some(c * d - c / (c + 1.0) + alpha * tf * sigma2 / (q * q)))
        })?;
        if let Some(q1) = root {
            let s = memo.get(q1, true)?;
            let d = 1.0 - alpha * s.mu / q1;
            let chi = solve_ratio(d) * q1;
            let (r42, r43) = one_rsb_residuals(p, q1, chi, s.mu, s.sigma2.unwrap_or(0.0));
            return Ok(OneRsbSolution {
                q1,
                chi,
                penalty_per_user: q1 / p.alpha_kappa(),
                residual_42: r42,
                residual_43: r43,
            });
        }
    }
    Err(Error::NoRoot {
        lo: q0,
        hi: last_hi,
    })
}

/// T σ²(q0) / (α μ(q0)²) at the RS root.  The reduced 1RSB residual tends
/// to this value minus one as q ↓ q0, so below one a finite-χ solution
/// branches off the RS root; at or above one there is typically none and
/// the 1RSB saddle collapses onto RS (χ → ∞).
pub fn one_rsb_onset_ratio(p: &SystemParams, tol: f64, opts: &SolverOptions) -> Result<f64> {
    p.validate()?;
    let mut memo = StatsMemo::new(*p, opts.quad);
    let q0 = rs_root(p, tol, opts, &mut memo)?;
    let s = memo.get(q0, true)?;
    Ok(p.t as f64 * s.sigma2.unwrap_or(0.0) / (p.alpha * s.mu * s.mu))
}

/// Solve under the named assumption.
pub fn solve(
    p: &SystemParams,
    assumption: Assumption,
    tol: f64,
    opts: &SolverOptions,
) -> Result<ReplicaSolution> {
    match assumption {
        Assumption::Rs => solve_rs_with(p, tol, opts).map(ReplicaSolution::Rs),
        Assumption::OneRsb => solve_1rsb_with(p, tol, opts).map(ReplicaSolution::OneRsb),
    }
}

/// RS fixed point in the T → ∞ limit: q = ακ·E[min |x̃ − √q z|²].
pub fn solve_rs_t_inf(scheme: SchemeSpec, alpha: f64, kappa: f64, tol: f64) -> Result<RsSolution> {
    let ak = alpha * kappa;
    if !(ak > 0.0 && ak < 1.0) {
        return Err(Error::InvalidParams(vec![format!(
            "ακ < 1 required (got {ak})"
        )]));
    }
    if scheme.is_dd_us() {
        let q0 = ak / (1.0 - ak);
        return Ok(RsSolution {
            q0,
            penalty_per_user: 1.0 / (1.0 - ak),
            residual: (q0 - ak * (1.0 + q0)).abs(),
        });
    }
    let g = |q: f64| q - ak * asymptotic_selected_mean(scheme, q);
    let base = 50.0 * ak / (1.0 - ak);
    for i in 0..4 {
        let q_max = base * 2f64.powi(i);
        if let Ok(q0) = smallest_positive_root(g, q_max, DEFAULT_GRID_POINTS, BISECT_TOL.min(tol)) {
            return Ok(RsSolution {
                q0,
                penalty_per_user: q0 / ak,
                residual: g(q0).abs(),
            });
        }
    }
    Err(Error::NoRoot {
        lo: Q_MIN,
        hi: base * 8.0,
    })
}

/// Per-user ZFBF penalty 1/(1 − α) of the full-load Wishart limit.
pub fn zfbf_asymptotic_penalty(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(domain(format!(
            "ZFBF penalty needs 0 < alpha < 1 (diverges at alpha >= 1), got {alpha}"
        )));
    }
    Ok(1.0 / (1.0 - alpha))
}
