//! Large-system law of the selection indicator and of the symbols of
//! selected users.
//!
//! A user is selected when its surrogate energy E = (1/T) Σ_t |x̃_t − √q z_t|²
//! falls below the κ-quantile ξ.  For DD-US x̃ = x, so conditionally on the
//! data the energy is a scaled noncentral chi-square whose characteristic
//! function is Π_t (1 − iqν)⁻¹ exp(iν|x_t|²/(1 − iqν)), ν = ω/T.  Every
//! conditional probability below is inverted with its own odd-harmonic
//! series on a Chernoff-bounded support.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::charfn::{charfn_energy, chernoff_upper, gl20, EnergyCdf, SchemeSpec, Spectral, ALIAS_MASS, Q_ZERO};
use crate::error::{domain, Result};
use crate::special::{regularized_lower_gamma, Quadrature};

/// Radial points of the tabulated output density.
pub const OUTPUT_TABLE_POINTS: usize = 512;

/// Selection law at a fixed order parameter q.
#[derive(Debug, Clone)]
pub struct SelectionModel {
    scheme: SchemeSpec,
    q: f64,
    kappa: f64,
    t: usize,
    xi: f64,
    model: EnergyCdf,
}

impl SelectionModel {
    /// κ ∈ (0, 1]; κ = 1 makes selection vacuous (ξ = ∞).
    pub fn new(model: EnergyCdf, kappa: f64) -> Result<Self> {
        if !(kappa > 0.0 && kappa <= 1.0) {
            return Err(domain(format!("kappa must lie in (0, 1], got {kappa}")));
        }
        let xi = if kappa == 1.0 {
            f64::INFINITY
        } else {
            model.quantile(kappa)?
        };
        Ok(Self {
            scheme: model.scheme(),
            q: model.q(),
            kappa,
            t: model.t(),
            xi,
            model,
        })
    }

    pub fn from_params(scheme: SchemeSpec, t: usize, q: f64, kappa: f64, quad: Quadrature) -> Result<Self> {
        Self::new(EnergyCdf::new(scheme, t, q, quad)?, kappa)
    }

    pub fn scheme(&self) -> SchemeSpec {
        self.scheme
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn t(&self) -> usize {
        self.t
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn model(&self) -> &EnergyCdf {
        &self.model
    }

    fn quad(&self) -> &Quadrature {
        self.model.quadrature()
    }

    fn require(&self, scheme_ok: bool, what: &str) -> Result<()> {
        if scheme_ok {
            Ok(())
        } else {
            Err(domain(format!("{what} is not defined for scheme {}", self.scheme)))
        }
    }
}

/// Pr(s = 1) = F_T(ξ; q).
pub fn marginal_selection_probability(m: &SelectionModel) -> f64 {
    if m.xi.is_infinite() {
        1.0
    } else {
        m.model.cdf(m.xi)
    }
}

/// P(X ≤ x) for a nonnegative law given its characteristic function and
/// cumulant generating function (finite on (0, s_max)).
fn cdf_from_transform(
    charfn: impl FnMut(f64) -> Complex64,
    cgf: impl FnMut(f64) -> Option<f64>,
    s_max: f64,
    x: f64,
    quad: &Quadrature,
) -> Result<f64> {
    let l = chernoff_upper(cgf, s_max, ALIAS_MASS);
    if x >= l {
        return Ok(1.0);
    }
    let spec = Spectral::build(charfn, l, 0.0, 1.0, quad)?;
    Ok(spec.cdf(x).clamp(0.0, 1.0))
}

/// ln of Π_t (1 − iqν)⁻¹ exp(iν|x_t|²/(1 − iqν)) over `slots` slots whose
/// powers sum to `power`.
fn ln_conditional_slots(nu: Complex64, q: f64, slots: f64, power: f64) -> Complex64 {
    let a = 1.0 - q * nu * Complex64::i();
    -slots * a.ln() + Complex64::i() * nu * power / a
}

/// Pr(s = 1 | X) for DD-US.  The answer depends on X only through Σ_t |x_t|².
pub fn dd_us_selection_given_symbols(m: &SelectionModel, symbols: &[Complex64]) -> Result<f64> {
    m.require(m.scheme.is_dd_us(), "selection given symbols")?;
    if symbols.len() != m.t {
        return Err(domain(format!(
            "expected {} symbols (one per slot), got {}",
            m.t,
            symbols.len()
        )));
    }
    let power: f64 = symbols.iter().map(|x| x.norm_sqr()).sum();
    selection_given_power_sum(m, power)
}

/// Pr(s = 1 | Σ_t |x_t|² = `power`) for DD-US.
pub fn selection_given_power_sum(m: &SelectionModel, power: f64) -> Result<f64> {
    m.require(m.scheme.is_dd_us(), "selection given symbols")?;
    if !(power >= 0.0) {
        return Err(domain(format!("symbol power must be >= 0, got {power}")));
    }
    if m.xi.is_infinite() {
        return Ok(1.0);
    }
    let tf = m.t as f64;
    if m.q <= Q_ZERO {
        return Ok(if power / tf <= m.xi { 1.0 } else { 0.0 });
    }
    let q = m.q;
    cdf_from_transform(
        |w| ln_conditional_slots(Complex64::new(w / tf, 0.0), q, tf, power).exp(),
        |s| {
            let nu = s / tf;
            let a = 1.0 - q * nu;
            (a > 0.0).then(|| -tf * a.ln() + nu * power / a)
        },
        tf / q,
        m.xi,
        m.quad(),
    )
}

/// Pr(s = 1 | |x_0|² = v) for Gaussian DD-US, the other T − 1 slots drawn
/// from the prior.
pub fn selection_given_slot_power(m: &SelectionModel, v: f64) -> Result<f64> {
    m.require(m.scheme == SchemeSpec::DdUsGaussian, "selection given one slot power")?;
    if !(v >= 0.0) {
        return Err(domain(format!("slot power must be >= 0, got {v}")));
    }
    if m.xi.is_infinite() {
        return Ok(1.0);
    }
    let tf = m.t as f64;
    let rest = tf - 1.0;
    if m.q <= Q_ZERO {
        // T·E = v + Gamma(T − 1, 1)
        let room = tf * m.xi - v;
        if room <= 0.0 {
            return Ok(0.0);
        }
        return if m.t == 1 {
            Ok(1.0)
        } else {
            regularized_lower_gamma(rest, room)
        };
    }
    let q = m.q;
    cdf_from_transform(
        |w| {
            let nu = Complex64::new(w / tf, 0.0);
            let b = 1.0 - (1.0 + q) * nu * Complex64::i();
            (ln_conditional_slots(nu, q, 1.0, v) - rest * b.ln()).exp()
        },
        |s| {
            let nu = s / tf;
            let a = 1.0 - q * nu;
            let b = 1.0 - (1.0 + q) * nu;
            (a > 0.0 && b > 0.0).then(|| -a.ln() + nu * v / a - rest * b.ln())
        },
        tf / (1.0 + q),
        m.xi,
        m.quad(),
    )
}

/// Density of |x̃|² = v for a selected Gaussian DD-US user:
/// e^{−v} Pr(s = 1 | |x|² = v) / κ.
pub fn modified_power_pdf_given_selected(m: &SelectionModel, power_grid: &[f64]) -> Result<Vec<f64>> {
    m.require(m.scheme == SchemeSpec::DdUsGaussian, "modified power pdf")?;
    power_grid
        .iter()
        .map(|&v| {
            if v < 0.0 {
                return Ok(0.0);
            }
            Ok((-v).exp() * selection_given_slot_power(m, v)? / m.kappa)
        })
        .collect()
}

/// Circularly symmetric complex Gaussian density at |y|² = `r2` with
/// (possibly complex) variance.
fn complex_gaussian_pdf(r2: f64, variance: Complex64) -> Complex64 {
    (-r2 / variance).exp() / (PI * variance)
}

/// p(y | s = 1) at |y| = `y_magnitude` for Gaussian DD-US over the equivalent
/// channel y = √(P/q) x̃ + n with N₀ = 1 and P = `snr`.
pub fn conditional_output_pdf_gaussian(m: &SelectionModel, snr: f64, y_magnitude: f64) -> Result<f64> {
    m.require(m.scheme == SchemeSpec::DdUsGaussian, "conditional output pdf")?;
    if !(snr > 0.0) || !snr.is_finite() {
        return Err(domain(format!("snr must be finite and > 0, got {snr}")));
    }
    if m.q <= Q_ZERO {
        return Err(domain("output pdf needs q > 0 (the effective SNR P/q is infinite)"));
    }
    if !(y_magnitude >= 0.0) {
        return Err(domain(format!("|y| must be >= 0, got {y_magnitude}")));
    }
    let gain2 = snr / m.q;
    let r2 = y_magnitude * y_magnitude;
    let p0 = complex_gaussian_pdf(r2, Complex64::new(gain2 + 1.0, 0.0)).re;
    if m.xi.is_infinite() {
        return Ok(p0);
    }
    // Joint law of (E, y) normalized by p0: a probability law in E whose
    // characteristic function is G_T(ω) p_CG(y; (P/q)σ²(ω/T) + N₀) / p0,
    // σ²(ν) = (1 − iqν)/(1 − i(1+q)ν).
    let (q, t) = (m.q, m.t);
    let tf = t as f64;
    let ln_p0 = p0.ln();
    let fw = cdf_from_transform(
        |w| {
            let nu = Complex64::new(w / tf, 0.0) * Complex64::i();
            let s2 = (1.0 - q * nu) / (1.0 - (1.0 + q) * nu);
            charfn_energy(SchemeSpec::DdUsGaussian, w, q, t) * complex_gaussian_pdf(r2, gain2 * s2 + 1.0) / p0
        },
        |s| {
            let nu = s / tf;
            let b = 1.0 - (1.0 + q) * nu;
            if b <= 0.0 {
                return None;
            }
            let var = gain2 * (1.0 - q * nu) / b + 1.0;
            Some(-tf * b.ln() - r2 / var - (PI * var).ln() - ln_p0)
        },
        tf / (1.0 + q),
        m.xi,
        m.quad(),
    )?;
    Ok((p0 * fw / m.kappa).max(0.0))
}

/// ln p(y | s = 1) tabulated against u = |y|² on the radial grid
/// [0, 6√(P/q + N₀)], linear in u between nodes and beyond the last one.
#[derive(Debug, Clone)]
pub struct OutputDensityTable {
    u: Vec<f64>,
    ln_p: Vec<f64>,
}

impl OutputDensityTable {
    pub fn build(m: &SelectionModel, snr: f64, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(domain("output table needs at least 2 points"));
        }
        if m.q <= Q_ZERO {
            return Err(domain("output pdf needs q > 0 (the effective SNR P/q is infinite)"));
        }
        let r_max = 6.0 * (snr / m.q + 1.0).sqrt();
        let mut u = Vec::with_capacity(points);
        let mut ln_p = Vec::with_capacity(points);
        for i in 0..points {
            let r = r_max * i as f64 / (points - 1) as f64;
            let p = conditional_output_pdf_gaussian(m, snr, r)?;
            u.push(r * r);
            ln_p.push(p.max(f64::MIN_POSITIVE).ln());
        }
        Ok(Self { u, ln_p })
    }

    pub fn ln_pdf(&self, u: f64) -> f64 {
        let n = self.u.len();
        let i = match self.u.partition_point(|&x| x <= u) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        };
        let (u0, u1) = (self.u[i], self.u[i + 1]);
        let w = (u - u0) / (u1 - u0);
        self.ln_p[i] + w * (self.ln_p[i + 1] - self.ln_p[i])
    }

    pub fn nodes(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.u.iter().copied().zip(self.ln_p.iter().copied())
    }
}

/// Differential entropy h(y | s = 1) in nats, −π ∫₀^∞ p(u) ln p(u) du with
/// u = |y|², by Gauss-Legendre panels on [0, 40(P/q + N₀)].
pub fn output_entropy_gaussian(m: &SelectionModel, snr: f64) -> Result<f64> {
    let u_max = 40.0 * (snr / m.q.max(Q_ZERO) + 1.0);
    let (x, w) = gl20();
    let panels = 16;
    let h = u_max / panels as f64;
    let mut acc = 0.0;
    for p in 0..panels {
        let a = h * p as f64;
        for (xi, wi) in x.iter().zip(w) {
            let u = a + 0.5 * h * (xi + 1.0);
            let d = conditional_output_pdf_gaussian(m, snr, u.sqrt())?;
            if d > 0.0 {
                acc -= wi * 0.5 * h * d * d.ln();
            }
        }
    }
    Ok(PI * acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::{ln_gamma, RngStream};

    fn model(scheme: SchemeSpec, t: usize, q: f64, kappa: f64) -> SelectionModel {
        SelectionModel::from_params(scheme, t, q, kappa, Quadrature::default()).unwrap()
    }

    /// P(E ≤ ξ | Σ|x|² = S): T·E/q is half a noncentral chi-square with 2T
    /// degrees of freedom and noncentrality 2S/q, i.e. a Poisson(S/q)
    /// mixture of Gamma(T + j, 1).
    fn noncentral_oracle(t: usize, q: f64, power: f64, xi: f64) -> f64 {
        let lam = power / q;
        let x = t as f64 * xi / q;
        let mut acc = 0.0;
        for j in 0..4000 {
            let lw = -lam + j as f64 * lam.max(1e-300).ln() - ln_gamma(j as f64 + 1.0);
            let w = if lam == 0.0 { if j == 0 { 1.0 } else { 0.0 } } else { lw.exp() };
            acc += w * regularized_lower_gamma(t as f64 + j as f64, x).unwrap();
            if j as f64 > lam + 50.0 * lam.sqrt() + 50.0 {
                break;
            }
        }
        acc
    }

    /// ln I₀(z) by its power series, summed in log space.
    fn ln_bessel_i0(z: f64) -> f64 {
        if z == 0.0 {
            return 0.0;
        }
        let lz = (0.5 * z).ln();
        let mut m = f64::NEG_INFINITY;
        let terms: Vec<f64> = (0..(4.0 * z + 60.0) as usize)
            .map(|k| 2.0 * k as f64 * lz - 2.0 * ln_gamma(k as f64 + 1.0))
            .inspect(|&l| m = m.max(l))
            .collect();
        m + terms.iter().map(|l| (l - m).exp()).sum::<f64>().ln()
    }

    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
        let h = (b - a) / n as f64;
        let mut s = f(a) + f(b);
        for i in 1..n {
            s += f(a + h * i as f64) * if i % 2 == 1 { 4.0 } else { 2.0 };
        }
        s * h / 3.0
    }

    #[test]
    fn marginal_probability_equals_kappa() {
        for &scheme in &SchemeSpec::ALL {
            for &(t, q) in &[(8usize, 0.5), (64, 2.0)] {
                for &kappa in &[0.25, 0.5] {
                    let m = model(scheme, t, q, kappa);
                    let p = marginal_selection_probability(&m);
                    assert!((p - kappa).abs() < 1e-9, "{scheme} {t} {q} {kappa}: {p}");
                }
            }
        }
        assert_eq!(marginal_selection_probability(&model(SchemeSpec::DdUsGaussian, 8, 1.0, 1.0)), 1.0);
    }

    #[test]
    fn selection_given_symbols_matches_noncentral_oracle() {
        let m = model(SchemeSpec::DdUsGaussian, 8, 0.7, 0.3);
        let mut rng = RngStream::new(3, 0);
        for _ in 0..10 {
            let x: Vec<Complex64> = (0..8).map(|_| crate::special::sample_complex_gaussian(&mut rng, 1.0)).collect();
            let s: f64 = x.iter().map(|v| v.norm_sqr()).sum();
            let got = dd_us_selection_given_symbols(&m, &x).unwrap();
            let want = noncentral_oracle(8, 0.7, s, m.xi());
            assert!((got - want).abs() < 1e-9, "{got} {want}");
        }
    }

    #[test]
    fn qpsk_selection_is_symbol_independent_and_equals_kappa() {
        let m = model(SchemeSpec::DdUsQpsk, 16, 0.8, 0.4);
        let mut rng = RngStream::new(11, 2);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut vals = Vec::new();
        for _ in 0..20 {
            let x: Vec<Complex64> = (0..16)
                .map(|_| {
                    let re = if rng.uniform() < 0.5 { h } else { -h };
                    let im = if rng.uniform() < 0.5 { h } else { -h };
                    Complex64::new(re, im)
                })
                .collect();
            vals.push(dd_us_selection_given_symbols(&m, &x).unwrap());
        }
        let (lo, hi) = vals.iter().fold((1.0f64, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        assert!(hi - lo <= 1e-9);
        assert!((vals[0] - 0.4).abs() < 1e-9, "{}", vals[0]);
    }

    #[test]
    fn high_power_symbols_are_deselected() {
        let m = model(SchemeSpec::DdUsGaussian, 8, 0.5, 0.5);
        let x = vec![Complex64::new(10.0, 0.0); 8];
        assert!(dd_us_selection_given_symbols(&m, &x).unwrap() < 0.05);
        assert!(dd_us_selection_given_symbols(&m, &x[..3]).is_err());
        let q = model(SchemeSpec::UsCvpQpsk, 8, 0.5, 0.5);
        assert!(dd_us_selection_given_symbols(&q, &x).is_err());
    }

    #[test]
    fn slot_power_selection_matches_convolution_oracle() {
        // T·E = A + B, A = |x − √q z|² given |x|² = v, B ~ Gamma(T − 1, 1 + q)
        let (t, q, kappa) = (4usize, 0.6, 0.35);
        let m = model(SchemeSpec::DdUsGaussian, t, q, kappa);
        let c = t as f64 * m.xi();
        for &v in &[0.0, 0.3, 1.0, 2.5] {
            let dens_a = |a: f64| {
                (-(a.max(0.0) + v) / q + ln_bessel_i0(2.0 * (a.max(0.0) * v).sqrt() / q)).exp() / q
            };
            let oracle = simpson(
                |a| dens_a(a) * regularized_lower_gamma(t as f64 - 1.0, (c - a) / (1.0 + q)).unwrap_or(0.0),
                0.0,
                c,
                4000,
            );
            let got = selection_given_slot_power(&m, v).unwrap();
            assert!((got - oracle).abs() < 1e-7, "v={v}: {got} {oracle}");
        }
    }

    #[test]
    fn modified_power_pdf_normalizes_and_has_light_tail() {
        let m = model(SchemeSpec::DdUsGaussian, 16, 0.8, 0.3);
        let n = 2001;
        let grid: Vec<f64> = (0..n).map(|i| 40.0 * i as f64 / (n - 1) as f64).collect();
        let pdf = modified_power_pdf_given_selected(&m, &grid).unwrap();
        let h = grid[1];
        let total: f64 = pdf.windows(2).map(|w| 0.5 * h * (w[0] + w[1])).sum();
        assert!((total - 1.0).abs() < 1e-3, "{total}");
        let tail: f64 = pdf
            .windows(2)
            .zip(grid.windows(2))
            .filter(|(_, g)| g[0] >= 4.0)
            .map(|(w, _)| 0.5 * h * (w[0] + w[1]))
            .sum();
        assert!(tail < (-4.0f64).exp(), "{tail}");
    }

    #[test]
    fn output_pdf_normalizes() {
        let m = model(SchemeSpec::DdUsGaussian, 16, 0.6, 0.3);
        let snr = 3.0;
        let rmax = 6.0 * (snr / m.q() + 1.0).sqrt();
        let total = 2.0 * PI * simpson(|r| r * conditional_output_pdf_gaussian(&m, snr, r).unwrap(), 0.0, rmax, 400);
        assert!((total - 1.0).abs() < 1e-3, "{total}");
    }

    #[test]
    fn output_pdf_matches_direct_power_integral() {
        // p(r) = (1/κ) ∫ e^{−v} P_sel(v) (1/π) e^{−(r² + g v)} I₀(2 r √(g v)) dv
        let (t, q, kappa, snr) = (8usize, 0.5, 0.4, 2.0);
        let m = model(SchemeSpec::DdUsGaussian, t, q, kappa);
        let g = snr / q;
        let (n, vmax) = (1500usize, 15.0);
        let psel: Vec<(f64, f64)> = (0..=n)
            .map(|i| {
                let v = vmax * i as f64 / n as f64;
                (v, selection_given_slot_power(&m, v).unwrap())
            })
            .collect();
        for &r in &[0.0, 0.7, 1.5, 3.0] {
            let f = |i: usize| {
                let (v, ps) = psel[i];
                (-v - r * r - g * v + ln_bessel_i0(2.0 * r * (g * v).sqrt())).exp() * ps / PI
            };
            let h = vmax / n as f64;
            let mut s = f(0) + f(n);
            for i in 1..n {
                s += f(i) * if i % 2 == 1 { 4.0 } else { 2.0 };
            }
            let direct = s * h / 3.0 / kappa;
            let got = conditional_output_pdf_gaussian(&m, snr, r).unwrap();
            assert!((got / direct - 1.0).abs() < 1e-5, "r={r}: {got} {direct}");
        }
    }

    #[test]
    fn output_pdf_without_selection_is_gaussian() {
        let m = model(SchemeSpec::DdUsGaussian, 8, 0.5, 1.0);
        let snr = 4.0;
        let v = snr / 0.5 + 1.0;
        for &r in &[0.0f64, 1.0, 2.5] {
            let want = (-r * r / v).exp() / (PI * v);
            assert!((conditional_output_pdf_gaussian(&m, snr, r).unwrap() - want).abs() < 1e-15);
        }
        // κ close to 1: the correction term is nearly gone
        let m = model(SchemeSpec::DdUsGaussian, 8, 0.5, 0.999999);
        for &r in &[0.0f64, 1.0, 2.5] {
            let want = (-r * r / v).exp() / (PI * v);
            let got = conditional_output_pdf_gaussian(&m, snr, r).unwrap();
            assert!((got / want - 1.0).abs() < 1e-4, "{got} {want}");
        }
    }

    #[test]
    fn output_entropy_below_unselected_gaussian() {
        let m = model(SchemeSpec::DdUsGaussian, 16, 0.6, 0.3);
        let snr = 3.0;
        let h = output_entropy_gaussian(&m, snr).unwrap();
        let h_gauss = (PI * std::f64::consts::E * (snr / 0.6 + 1.0)).ln();
        assert!(h < h_gauss && h > (PI * std::f64::consts::E).ln());
        let full = model(SchemeSpec::DdUsGaussian, 16, 0.6, 1.0);
        assert!((output_entropy_gaussian(&full, snr).unwrap() - h_gauss).abs() < 1e-8);
    }

    #[test]
    fn table_interpolates_density() {
        let m = model(SchemeSpec::DdUsGaussian, 16, 0.6, 0.3);
        let tab = OutputDensityTable::build(&m, 3.0, 128).unwrap();
        for &r in &[0.3, 1.1, 2.9] {
            let exact = conditional_output_pdf_gaussian(&m, 3.0, r).unwrap().ln();
            assert!((tab.ln_pdf(r * r) - exact).abs() < 1e-3);
        }
    }
}
