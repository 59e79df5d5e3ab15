//! Law of the per-user energy of the solvable selection problem.
//!
//! For a fixed interference level `q` the energy of one user,
//! E = (1/T) Σ_t min_{x̃} |x̃_t − √q z_t|², is an average of 2T i.i.d.
//! per-real-dimension terms W, so its characteristic function is
//! G_T(ω) = G(ω/2T)^{2T} where G is the per-dimension characteristic function.
//!
//! The cdf is recovered from G_T with the odd-harmonic (square-wave) form of
//! the Gil-Pelaez inversion:
//!
//! F(x) = ½ − (2/π) Σ_k Im[G_T(ω_k) e^{−iω_k x}] / (2k+1),  ω_k = (2k+1)π/L,
//!
//! which is exact for 0 < x < L up to the mass of E beyond L.  L is taken from
//! a Chernoff bound so that mass is below 1e-14.  The same coefficients give
//! ∫₀^y F through the triangle-wave series.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use errorfunctions::{ComplexErrorFunctions, RealErrorFunctions};
use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::special::{gauss_legendre, normal_cdf, normal_pdf, q_function, Quadrature};

/// Below this, `q` is treated as exactly zero.
pub const Q_ZERO: f64 = 1e-12;
/// Upper-tail mass allowed beyond the inversion period.
pub(crate) const ALIAS_MASS: f64 = 1e-14;
const BLOCK: usize = 64;
const CACHE_POINTS: usize = 1024;

/// Data prior plus relaxed alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SchemeSpec {
    /// Data-dependent selection, QPSK symbols, no relaxation.
    DdUsQpsk,
    /// Data-dependent selection, CN(0,1) symbols, no relaxation.
    DdUsGaussian,
    /// Selection with convex (half-line) relaxation of QPSK.
    UsCvpQpsk,
}

impl SchemeSpec {
    pub const ALL: [SchemeSpec; 3] = [Self::DdUsQpsk, Self::DdUsGaussian, Self::UsCvpQpsk];

    pub fn name(self) -> &'static str {
        match self {
            Self::DdUsQpsk => "dd-us-qpsk",
            Self::DdUsGaussian => "dd-us-gaussian",
            Self::UsCvpQpsk => "us-cvp",
        }
    }

    pub fn is_dd_us(self) -> bool {
        !matches!(self, Self::UsCvpQpsk)
    }

    pub fn is_qpsk(self) -> bool {
        !matches!(self, Self::DdUsGaussian)
    }
}

impl fmt::Display for SchemeSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dd-us-qpsk" => Ok(Self::DdUsQpsk),
            "dd-us-gaussian" => Ok(Self::DdUsGaussian),
            "us-cvp" | "us-cvp-qpsk" => Ok(Self::UsCvpQpsk),
            other => Err(Error::Config(format!(
                "unknown scheme '{other}' (expected dd-us-gaussian, dd-us-qpsk or us-cvp)"
            ))),
        }
    }
}

/// Per-real-dimension characteristic function G(ω) = E[e^{iωW}].
pub fn charfn_slot(scheme: SchemeSpec, omega: f64, q: f64) -> Complex64 {
    let i = Complex64::i();
    match scheme {
        SchemeSpec::DdUsGaussian => (1.0 - 2.0 * i * (1.0 + q) * omega).powf(-0.5),
        SchemeSpec::DdUsQpsk => {
            let a = 1.0 - 2.0 * i * q * omega;
            a.powf(-0.5) * (i * omega / a).exp()
        }
        SchemeSpec::UsCvpQpsk => {
            if q <= Q_ZERO {
                return (i * omega).exp();
            }
            let a = 1.0 - 2.0 * i * q * omega;
            let sa = a.sqrt();
            let arg = -1.0 / ((2.0 * q).sqrt() * sa);
            (i * omega / a).exp() / sa * (0.5 * arg.erfc()) + q_function(1.0 / q.sqrt())
        }
    }
}

/// G_T(ω) = G(ω/2T)^{2T}, the characteristic function of E.
pub fn charfn_energy(scheme: SchemeSpec, omega: f64, q: f64, t: usize) -> Complex64 {
    let tf = t as f64;
    let u = omega / (2.0 * tf);
    let i = Complex64::i();
    match scheme {
        SchemeSpec::DdUsGaussian => (-tf * (1.0 - 2.0 * i * (1.0 + q) * u).ln()).exp(),
        SchemeSpec::DdUsQpsk => {
            let a = 1.0 - 2.0 * i * q * u;
            (-tf * a.ln() + 2.0 * tf * i * u / a).exp()
        }
        SchemeSpec::UsCvpQpsk => {
            let g = charfn_slot(scheme, u, q);
            if g.norm_sqr() == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                (2.0 * tf * g.ln()).exp()
            }
        }
    }
}

/// ln E[e^{uW}] for real u, `None` outside the region of convergence.
fn log_mgf_slot(scheme: SchemeSpec, u: f64, q: f64) -> Option<f64> {
    match scheme {
        SchemeSpec::DdUsGaussian => {
            let a = 1.0 - 2.0 * (1.0 + q) * u;
            (a > 0.0).then(|| -0.5 * a.ln())
        }
        SchemeSpec::DdUsQpsk => {
            let a = 1.0 - 2.0 * q * u;
            (a > 0.0).then(|| -0.5 * a.ln() + u / a)
        }
        SchemeSpec::UsCvpQpsk => {
            if q <= Q_ZERO {
                return Some(u);
            }
            let a = 1.0 - 2.0 * q * u;
            if a <= 0.0 {
                return None;
            }
            let main = (-0.5 * a.ln() + u / a).exp() * 0.5 * RealErrorFunctions::erfc(-1.0 / (2.0 * q * a).sqrt());
            Some((main + q_function(1.0 / q.sqrt())).ln())
        }
    }
}

fn mgf_radius_slot(scheme: SchemeSpec, q: f64) -> f64 {
    match scheme {
        SchemeSpec::DdUsGaussian => 0.5 / (1.0 + q),
        _ if q <= Q_ZERO => f64::INFINITY,
        _ => 0.5 / q,
    }
}

/// Smallest L with P(E > L) ≤ `eps` guaranteed by the Chernoff bound
/// P(E > L) ≤ exp(Λ(s) − sL), where Λ is the cumulant generating function of
/// E, finite on (0, s_max).
pub(crate) fn chernoff_upper(mut cgf: impl FnMut(f64) -> Option<f64>, s_max: f64, eps: f64) -> f64 {
    let c = -eps.ln();
    let mut bound = |s: f64| match cgf(s) {
        Some(k) if k.is_finite() => (k + c) / s,
        _ => f64::INFINITY,
    };
    let hi_s = if s_max.is_finite() { s_max * (1.0 - 1e-9) } else { 1e6 };
    let (mut a, mut b) = ((hi_s * 1e-10).ln(), hi_s.ln());
    let gr = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - gr * (b - a);
    let mut x2 = a + gr * (b - a);
    let mut f1 = bound(x1.exp());
    let mut f2 = bound(x2.exp());
    for _ in 0..120 {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - gr * (b - a);
            f1 = bound(x1.exp());
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + gr * (b - a);
            f2 = bound(x2.exp());
        }
    }
    f1.min(f2)
}

/// Odd-harmonic inversion table of a nonnegative (sub-)probability law,
/// with the atom at zero kept apart.
#[derive(Debug, Clone)]
pub(crate) struct Spectral {
    pub half_period: f64,
    pub step: f64,
    pub atom: f64,
    /// Mass of the part represented by the coefficients.
    pub mass: f64,
    /// Characteristic function of that part at ω_k = (k + ½)·step.
    pub coeffs: Vec<Complex64>,
    tri0: f64,
}

impl Spectral {
    pub fn build(
        mut charfn: impl FnMut(f64) -> Complex64,
        half_period: f64,
        atom: f64,
        mass: f64,
        quad: &Quadrature,
    ) -> Result<Self> {
        quad.validate()?;
        let step = 2.0 * PI / half_period;
        let mut coeffs = Vec::with_capacity(4 * BLOCK);
        let mut quiet = 0;
        let max_blocks = quad.max_subdivisions;
        let mut env = f64::INFINITY;
        for block in 0..max_blocks {
            env = 0.0;
            for j in 0..BLOCK {
                let k = block * BLOCK + j;
                let w = (k as f64 + 0.5) * step;
                let g = charfn(w);
                env = env.max(g.norm() / (2 * k + 1) as f64);
                coeffs.push(g);
            }
            if env < quad.truncation_threshold {
                quiet += 1;
                if quiet == 3 {
                    let mut s = Self {
                        half_period,
                        step,
                        atom,
                        mass,
                        coeffs,
                        tri0: 0.0,
                    };
                    s.tri0 = s.triangle_sum(0.0);
                    return Ok(s);
                }
            } else {
                quiet = 0;
            }
        }
        Err(Error::NonConvergence {
            max_subdivisions: max_blocks,
            envelope: env,
        })
    }

    pub fn node(&self, k: usize) -> f64 {
        (k as f64 + 0.5) * self.step
    }

    /// Σ_k term(k, e^{−iω_k x}) with the phase advanced by recurrence.
    fn phase_sum(&self, x: f64, mut term: impl FnMut(usize, Complex64) -> f64) -> f64 {
        let rot = Complex64::from_polar(1.0, -self.step * x);
        let mut ph = Complex64::from_polar(1.0, -0.5 * self.step * x);
        let mut acc = 0.0;
        for k in 0..self.coeffs.len() {
            if k % 256 == 0 && k > 0 {
                ph = Complex64::from_polar(1.0, -self.node(k) * x);
            }
            acc += term(k, ph);
            ph *= rot;
        }
        acc
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        if x == 0.0 {
            return self.atom;
        }
        if x >= self.half_period {
            return self.atom + self.mass;
        }
        let s = self.phase_sum(x, |k, ph| (self.coeffs[k] * ph).im / (2 * k + 1) as f64);
        self.atom + 0.5 * self.mass - 2.0 / PI * s
    }

    fn triangle_sum(&self, y: f64) -> f64 {
        self.phase_sum(y, |k, ph| {
            let o = (2 * k + 1) as f64;
            (self.coeffs[k] * ph).re / (o * o)
        })
    }

    /// ∫ e dF over the represented part (the atom contributes nothing).
    pub fn mean(&self) -> f64 {
        let l = self.half_period;
        self.mass * l / 2.0 - 4.0 * l / (PI * PI) * self.tri0
    }

    /// ∫₀^y F = E[(y − E)⁺] restricted to this part and the atom.
    pub fn partial_expectation(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        if y >= self.half_period {
            return (self.atom + self.mass) * y - self.mean();
        }
        let l = self.half_period;
        let d = self.triangle_sum(y) - self.tri0;
        (self.atom * y + 0.5 * (self.mass * y - 4.0 * l / (PI * PI) * d)).max(0.0)
    }
}

/// Components of the relaxed-QPSK energy in which exactly one or two of the
/// 2T real dimensions are off their alphabet corner.  Their densities are
/// singular at zero, so they are integrated directly instead of inverted.
///
/// Per dimension v = 1 − √q u ~ N(1, q) and W = v² 1{v > 0}.
#[derive(Debug, Clone, Copy)]
struct CvpLowOrder {
    two_t: f64,
    sigma: f64,
    /// P(v ≤ 0).
    p: f64,
    w1: f64,
    w2: f64,
}

impl CvpLowOrder {
    fn new(t: usize, q: f64) -> Self {
        let n = 2.0 * t as f64;
        let p = q_function(1.0 / q.sqrt());
        let w1 = n * p.powf(n - 1.0) * (1.0 - p);
        let w2 = 0.5 * n * (n - 1.0) * p.powf(n - 2.0) * (1.0 - p) * (1.0 - p);
        // negligible components stay in the inverted remainder
        let keep = |w: f64| if w > 1e-16 { w } else { 0.0 };
        Self {
            two_t: n,
            sigma: q.sqrt(),
            p,
            w1: keep(w1),
            w2: keep(w2),
        }
    }

    /// P(0 < v ≤ r).
    fn prob_upto(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        let z0 = -1.0 / self.sigma;
        let z1 = (r - 1.0) / self.sigma;
        if z1 < 0.0 {
            normal_cdf(z1) - normal_cdf(z0)
        } else {
            (1.0 - self.p) - q_function(z1)
        }
    }

    /// ∫_0^{√a} (a − v²) φ_v(v) dv.
    fn partial_square(&self, a: f64) -> f64 {
        if a <= 0.0 {
            return 0.0;
        }
        let s = self.sigma;
        let z0 = -1.0 / s;
        let z1 = (a.sqrt() - 1.0) / s;
        let m0 = self.prob_upto(a.sqrt());
        let (p0, p1) = (normal_pdf(z0), normal_pdf(z1));
        let m1 = p0 - p1;
        let m2 = m0 + z0 * p0 - z1 * p1;
        ((a - 1.0) * m0 - 2.0 * s * m1 - s * s * m2).max(0.0)
    }

    fn density_v(&self, v: f64) -> f64 {
        normal_pdf((v - 1.0) / self.sigma) / self.sigma
    }

    /// ∫_0^{√a} φ_v(v₁) h(a − v₁²) dv₁ via v₁ = √a sin θ.
    fn shell_integral(&self, a: f64, h: impl Fn(f64) -> f64) -> f64 {
        if a <= 0.0 {
            return 0.0;
        }
        let ra = a.sqrt();
        let v_lo = (1.0 - 12.0 * self.sigma).max(0.0);
        let v_hi = (1.0 + 12.0 * self.sigma).min(ra);
        if v_hi <= v_lo {
            return 0.0;
        }
        let th_lo = (v_lo / ra).min(1.0).asin();
        let th_hi = (v_hi / ra).min(1.0).asin();
        let (x, w) = gl20();
        let panels = 8;
        let h_th = (th_hi - th_lo) / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let a0 = th_lo + h_th * p as f64;
            for (xi, wi) in x.iter().zip(w) {
                let th = a0 + 0.5 * h_th * (xi + 1.0);
                let (sn, cs) = th.sin_cos();
                let v1 = ra * sn;
                acc += wi * 0.5 * h_th * self.density_v(v1) * h(a - v1 * v1) * ra * cs;
            }
        }
        acc
    }

    fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let a = self.two_t * x;
        let c = 1.0 - self.p;
        let mut f = 0.0;
        if self.w1 > 0.0 {
            f += self.w1 * self.prob_upto(a.sqrt()) / c;
        }
        if self.w2 > 0.0 {
            f += self.w2 * self.shell_integral(a, |b| self.prob_upto(b.max(0.0).sqrt())) / (c * c);
        }
        f
    }

    fn partial_expectation(&self, y: f64) -> f64 {
        if y <= 0.0 {
            return 0.0;
        }
        let a = self.two_t * y;
        let c = 1.0 - self.p;
        let mut acc = 0.0;
        if self.w1 > 0.0 {
            acc += self.w1 * self.partial_square(a) / c;
        }
        if self.w2 > 0.0 {
            acc += self.w2 * self.shell_integral(a, |b| self.partial_square(b)) / (c * c);
        }
        acc / self.two_t
    }

    fn mean(&self) -> f64 {
        // E[v² 1{v>0}] / P(v>0) per off-corner dimension
        let s = self.sigma;
        let z0 = -1.0 / s;
        let c = 1.0 - self.p;
        let m1 = normal_pdf(z0);
        let m2 = c + z0 * m1;
        let ev2 = (c + 2.0 * s * m1 + s * s * m2) / c;
        (self.w1 + 2.0 * self.w2) * ev2 / self.two_t
    }

    fn mass(&self) -> f64 {
        self.w1 + self.w2
    }

    /// Characteristic function of the two components at ω (energy scale).
    fn charfn(&self, g_slot: Complex64) -> Complex64 {
        let gc = (g_slot - self.p) / (1.0 - self.p);
        gc * self.w1 + gc * gc * self.w2
    }
}

#[derive(Debug, Clone)]
enum Law {
    /// All mass at one point.
    Point(f64),
    Series {
        spec: Spectral,
        low: Option<CvpLowOrder>,
    },
}

/// Quantile, truncated mean and truncated variance at one κ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderStatSummary {
    pub kappa: f64,
    pub xi: f64,
    pub mean: f64,
    pub variance: f64,
}

/// The law F_T(x; q) of E for fixed scheme, T and q.
#[derive(Debug)]
pub struct EnergyCdf {
    scheme: SchemeSpec,
    t: usize,
    q: f64,
    quad: Quadrature,
    law: Law,
    cache: OnceLock<Vec<(f64, f64)>>,
}

impl Clone for EnergyCdf {
    fn clone(&self) -> Self {
        Self {
            scheme: self.scheme,
            t: self.t,
            q: self.q,
            quad: self.quad,
            law: self.law.clone(),
            cache: OnceLock::new(),
        }
    }
}

impl EnergyCdf {
    pub fn new(scheme: SchemeSpec, t: usize, q: f64, quad: Quadrature) -> Result<Self> {
        if t == 0 {
            return Err(domain("T must be >= 1"));
        }
        if !(q >= 0.0) || !q.is_finite() {
            return Err(domain(format!("q must be finite and >= 0, got {q}")));
        }
        quad.validate()?;
        let q_eff = if q <= Q_ZERO { 0.0 } else { q };
        let law = if q_eff == 0.0 && scheme.is_qpsk() {
            Law::Point(1.0)
        } else {
            let two_t = 2.0 * t as f64;
            let radius = mgf_radius_slot(scheme, q_eff);
            let l = chernoff_upper(
                |s| log_mgf_slot(scheme, s / two_t, q_eff).map(|v| two_t * v),
                two_t * radius,
                ALIAS_MASS,
            );
            if scheme == SchemeSpec::UsCvpQpsk {
                let low = CvpLowOrder::new(t, q_eff);
                let atom = low.p.powi(2 * t as i32);
                let mass = (1.0 - atom - low.mass()).max(0.0);
                let spec = Spectral::build(
                    |w| {
                        let g = charfn_slot(scheme, w / two_t, q_eff);
                        let full = if g.norm_sqr() == 0.0 {
                            Complex64::new(0.0, 0.0)
                        } else {
                            (two_t * g.ln()).exp()
                        };
                        full - atom - low.charfn(g)
                    },
                    l,
                    atom,
                    mass,
                    &quad,
                )?;
                Law::Series {
                    spec,
                    low: Some(low),
                }
            } else {
                let spec = Spectral::build(
                    |w| charfn_energy(scheme, w, q_eff, t),
                    l,
                    0.0,
                    1.0,
                    &quad,
                )?;
                Law::Series { spec, low: None }
            }
        };
        Ok(Self {
            scheme,
            t,
            q,
            quad,
            law,
            cache: OnceLock::new(),
        })
    }

    pub fn scheme(&self) -> SchemeSpec {
        self.scheme
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn quadrature(&self) -> &Quadrature {
        &self.quad
    }

    /// Point beyond which F is 1 to within 1e-14.
    pub fn upper_support(&self) -> f64 {
        match &self.law {
            Law::Point(p) => *p,
            Law::Series { spec, .. } => spec.half_period,
        }
    }

    /// Number of inversion nodes (0 for point masses).
    pub fn nodes(&self) -> usize {
        self.spectral().map_or(0, |s| s.coeffs.len())
    }

    /// Probability mass at E = 0.
    pub fn atom_at_zero(&self) -> f64 {
        match &self.law {
            Law::Point(_) => 0.0,
            Law::Series { spec, .. } => spec.atom,
        }
    }

    pub(crate) fn spectral(&self) -> Option<&Spectral> {
        match &self.law {
            Law::Series { spec, .. } => Some(spec),
            Law::Point(_) => None,
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match &self.law {
            Law::Point(p) => {
                if x >= *p {
                    1.0
                } else {
                    0.0
                }
            }
            Law::Series { spec, low } => {
                let extra = low.map_or(0.0, |l| l.cdf(x));
                (spec.cdf(x) + extra).clamp(0.0, 1.0)
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match &self.law {
            Law::Point(p) => *p,
            Law::Series { spec, low } => spec.mean() + low.map_or(0.0, |l| l.mean()),
        }
    }

    /// ∫₀^y F(x) dx.
    pub fn partial_expectation(&self, y: f64) -> f64 {
        match &self.law {
            Law::Point(p) => (y - p).max(0.0),
            Law::Series { spec, low } => {
                spec.partial_expectation(y) + low.map_or(0.0, |l| l.partial_expectation(y))
            }
        }
    }

    /// 1024-point (x, F) table on [0, upper_support], built on first use.
    pub fn cache(&self) -> &[(f64, f64)] {
        self.cache.get_or_init(|| {
            let hi = self.upper_support();
            (0..CACHE_POINTS)
                .map(|i| {
                    let x = hi * i as f64 / (CACHE_POINTS - 1) as f64;
                    (x, self.cdf(x))
                })
                .collect()
        })
    }

    /// κ-quantile ξ with F(ξ) = κ.
    pub fn quantile(&self, kappa: f64) -> Result<f64> {
        if !(kappa > 0.0 && kappa < 1.0) {
            return Err(domain(format!("quantile needs 0 < kappa < 1, got {kappa}")));
        }
        if let Law::Point(p) = &self.law {
            return Ok(*p);
        }
        if kappa <= self.atom_at_zero() {
            return Ok(0.0);
        }
        let mut hi = self.upper_support();
        for _ in 0..60 {
            if self.cdf(hi) >= kappa {
                break;
            }
            hi *= 2.0;
        }
        Ok(crate::special::brent(
            |x| self.cdf(x) - kappa,
            0.0,
            hi,
            1e-15 * hi,
            1e-13,
        ))
    }

    /// μ_{κ,T}(q) = κξ − ∫₀^ξ F.
    pub fn truncated_mean(&self, kappa: f64) -> Result<f64> {
        let xi = self.quantile(kappa)?;
        Ok((kappa * xi - self.partial_expectation(xi)).max(0.0))
    }

    /// σ²_{κ,T}(q) = 2 ∫₀^ξ (1 − F(y)) ∫₀^y F dy.
    pub fn truncated_variance(&self, kappa: f64) -> Result<f64> {
        let xi = self.quantile(kappa)?;
        Ok(self.variance_up_to(xi))
    }

    fn variance_up_to(&self, xi: f64) -> f64 {
        if matches!(self.law, Law::Point(_)) {
            return 0.0;
        }
        let lo = self.negligible_lower(xi);
        if xi <= lo {
            return 0.0;
        }
        let (x, w) = gl20();
        let panels = 8;
        let h = (xi - lo) / panels as f64;
        let mut acc = 0.0;
        for p in 0..panels {
            let a = lo + h * p as f64;
            for (xi_, wi) in x.iter().zip(w) {
                let y = a + 0.5 * h * (xi_ + 1.0);
                acc += wi * 0.5 * h * (1.0 - self.cdf(y)) * self.partial_expectation(y);
            }
        }
        (2.0 * acc).max(0.0)
    }

    /// Largest y below which F ≤ 1e-12, so ∫₀^y F is negligible; found by
    /// bisection on [0, xi].
    fn negligible_lower(&self, xi: f64) -> f64 {
        const TINY: f64 = 1e-12;
        if self.cdf(0.0) > TINY {
            return 0.0;
        }
        if self.cdf(xi) <= TINY {
            return xi;
        }
        let (mut a, mut b) = (0.0, xi);
        for _ in 0..40 {
            let m = 0.5 * (a + b);
            if self.cdf(m) <= TINY {
                a = m;
            } else {
                b = m;
            }
            if b - a < 1e-3 * xi {
                break;
            }
        }
        a
    }

    /// ξ, μ and σ² together; κ = 1 gives ξ = ∞, the mean and the variance.
    pub fn order_stats(&self, kappa: f64) -> Result<OrderStatSummary> {
        if kappa == 1.0 {
            let mut hi = self.upper_support();
            if matches!(self.law, Law::Series { low: Some(_), .. }) {
                while self.cdf(hi) < 1.0 - 1e-14 && hi < 1e300 {
                    hi *= 2.0;
                }
            }
            return Ok(OrderStatSummary {
                kappa,
                xi: f64::INFINITY,
                mean: self.mean(),
                variance: self.variance_up_to(hi),
            });
        }
        let xi = self.quantile(kappa)?;
        Ok(OrderStatSummary {
            kappa,
            xi,
            mean: (kappa * xi - self.partial_expectation(xi)).max(0.0),
            variance: self.variance_up_to(xi),
        })
    }
}

pub(crate) fn gl20() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(20))
}

/// E[min_{x̃} |x̃ − √q z|²], the selected-energy mean as T → ∞.
pub fn asymptotic_selected_mean(scheme: SchemeSpec, q: f64) -> f64 {
    match scheme {
        SchemeSpec::DdUsQpsk | SchemeSpec::DdUsGaussian => 1.0 + q,
        SchemeSpec::UsCvpQpsk => {
            if q <= Q_ZERO {
                return 1.0;
            }
            // per real component: E[(b − g)² 1{g < b}], g ~ N(0, q/2), b = 1/√2
            let b = std::f64::consts::FRAC_1_SQRT_2;
            let s = (0.5 * q).sqrt();
            let c = b / s;
            2.0 * ((b * b + s * s) * normal_cdf(c) + b * s * normal_pdf(c))
        }
    }
}
