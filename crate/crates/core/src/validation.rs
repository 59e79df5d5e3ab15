//! Oracle suites behind `usvp validate`.  Each acceptance check is a
//! function returning a [`Check`] with its measured values; tolerances are
//! the constants at the top of each function.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use itertools::Itertools;
use num_complex::Complex64;

use crate::charfn::{EnergyCdf, SchemeSpec};
use crate::error::{Error, Result};
use crate::rates::{
    db_to_linear, gaussian_mi_selected, qpsk_mi, snr_gap, CvpRusCurve, McOptions, OptimizedBound, RateParams,
};
use crate::replica::{one_rsb_onset_ratio, solve_1rsb_with, solve_rs_t_inf, solve_rs_with, Assumption, SolverOptions, SystemParams, DEFAULT_TOL};
use crate::selection::{dd_us_selection_given_symbols, marginal_selection_probability, SelectionModel};
use crate::sim::{
    empirical_penalty, energy_penalty_block, exhaustive_min_penalty, greedy_dd_us, mean_and_se, order_stat_oracle,
    random_user_selection, sample_channel, sample_symbols, SimConfig, Strategy,
};
use crate::special::{gauss_hermite, ln_gamma, q_function, regularized_lower_gamma, Quadrature, RngStream};
use crate::sweep::{run_sweep, Command, SweepConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Math,
    Cdf,
    Replica,
    Selection,
    Rates,
    Sim,
    All,
}

impl Suite {
    pub const NAMES: [&'static str; 7] = ["math", "cdf", "replica", "selection", "rates", "sim", "all"];

    pub fn name(self) -> &'static str {
        match self {
            Self::Math => "math",
            Self::Cdf => "cdf",
            Self::Replica => "replica",
            Self::Selection => "selection",
            Self::Rates => "rates",
            Self::Sim => "sim",
            Self::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [Self::Math, Self::Cdf, Self::Replica, Self::Selection, Self::Rates, Self::Sim, Self::All]
            .into_iter()
            .find(|x| x.name() == s.trim())
            .ok_or_else(|| Error::Config(format!("unknown suite '{s}' (expected one of {})", Self::NAMES.join(", "))))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    /// Outside tolerance on a best-effort check.
    Warn,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub id: String,
    pub outcome: Outcome,
    pub detail: String,
    pub seconds: f64,
}

impl Check {
    pub fn passed(&self) -> bool {
        self.outcome != Outcome::Fail
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.outcome {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Warn => "WARN",
        };
        write!(f, "{tag} {} ({:.1} s): {}", self.id, self.seconds, self.detail)
    }
}

fn timed(id: &str, limit_s: f64, f: impl FnOnce() -> Result<(bool, String)>) -> Check {
    let start = Instant::now();
    let r = f();
    let seconds = start.elapsed().as_secs_f64();
    let (ok, mut detail) = match r {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    let in_time = seconds < limit_s;
    if !in_time {
        detail.push_str(&format!("; runtime over the {limit_s} s budget"));
    }
    Check {
        id: id.into(),
        outcome: if ok && in_time { Outcome::Pass } else { Outcome::Fail },
        detail,
        seconds,
    }
}

/// DD-US T → ∞ penalty 1/(1 − ακ).
pub fn criterion_1() -> Check {
    const TOL: f64 = 1e-6;
    timed("criterion 1: DD-US T→∞ closed form", 1.0, || {
        let mut worst: f64 = 0.0;
        for scheme in [SchemeSpec::DdUsGaussian, SchemeSpec::DdUsQpsk] {
            for i in 1..=9 {
                let ak = i as f64 / 10.0;
                let s = solve_rs_t_inf(scheme, 1.0, ak, DEFAULT_TOL)?;
                worst = worst.max((s.penalty_per_user - 1.0 / (1.0 - ak)).abs());
            }
        }
        Ok((worst <= TOL, format!("max |penalty − 1/(1−ακ)| = {worst:.2e} (tol {TOL:e})")))
    })
}

/// Fourier-inverted Gaussian DD-US cdf against γ(T, Tx/(1+q)).
pub fn criterion_2() -> Check {
    const TOL: f64 = 1e-6;
    const POINTS: usize = 50;
    timed("criterion 2: Fourier vs closed-form cdf", 30.0, || {
        let mut worst: f64 = 0.0;
        let mut at = String::new();
        for t in [1usize, 8, 64] {
            for q in [0.5, 1.0, 5.0] {
                let m = EnergyCdf::new(SchemeSpec::DdUsGaussian, t, q, Quadrature::default())?;
                let scale = 1.0 + q;
                for i in 0..POINTS {
                    let x = scale * 3.0 * (i as f64 + 0.5) / POINTS as f64;
                    let want = regularized_lower_gamma(t as f64, t as f64 * x / scale)?;
                    let err = (m.cdf(x) - want).abs();
                    if err > worst {
                        worst = err;
                        at = format!("T={t}, q={q}, x={x:.3}");
                    }
                }
            }
        }
        Ok((worst <= TOL, format!("max error {worst:.2e} at {at} (tol {TOL:e})")))
    })
}

/// Grid points of the q1 > q0 check.
pub fn criterion_3_grid() -> Vec<SystemParams> {
    let mut v = Vec::new();
    for scheme in [SchemeSpec::DdUsGaussian, SchemeSpec::UsCvpQpsk] {
        for t in [8usize, 64] {
            for alpha in [2.0, 4.0] {
                for i in 1..=9 {
                    let ak = i as f64 / 10.0;
                    v.push(SystemParams {
                        alpha,
                        kappa: ak / alpha,
                        t,
                        scheme,
                    });
                }
            }
        }
    }
    v
}

/// 1RSB order parameter exceeds the RS one on every grid point.
pub fn criterion_3() -> Check {
    timed("criterion 3: q1 > q0 (1RSB vs RS)", 600.0, || {
        let opts = SolverOptions::default();
        let grid = criterion_3_grid();
        let mut failures = Vec::new();
        for p in &grid {
            let label = format!("{} α={} ακ={:.1} T={}", p.scheme, p.alpha, p.alpha_kappa(), p.t);
            let rs = solve_rs_with(p, DEFAULT_TOL, &opts);
            let one = solve_1rsb_with(p, DEFAULT_TOL, &opts);
            match (rs, one) {
                (Ok(rs), Ok(one)) if one.q1 > rs.q0 => {}
                (Ok(rs), Ok(one)) => failures.push(format!("{label}: q1={} <= q0={}", one.q1, rs.q0)),
                (Ok(_), Err(e)) => {
                    let ratio = one_rsb_onset_ratio(p, DEFAULT_TOL, &opts).map(|r| format!("{r:.3}")).unwrap_or_else(|_| "?".into());
                    failures.push(format!("{label}: 1RSB {e} (onset ratio {ratio})"));
                }
                (Err(e), _) => failures.push(format!("{label}: RS {e}")),
            }
        }
        let detail = if failures.is_empty() {
            format!("{} of {} points satisfy q1 > q0", grid.len(), grid.len())
        } else {
            format!(
                "{} of {} points satisfy q1 > q0; failing: {}",
                grid.len() - failures.len(),
                grid.len(),
                failures.join(" | ")
            )
        };
        Ok((failures.is_empty(), detail))
    })
}

/// Simulated trimmed sum against μ, σ² and ξ.
pub fn criterion_4() -> Check {
    const Z_MAX: f64 = 3.0;
    const K: usize = 2000;
    const TRIALS: usize = 200;
    const SEED: u64 = 2024;
    timed("criterion 4: order-statistics oracle", 300.0, || {
        let mut worst: f64 = 0.0;
        let mut worst_at = String::new();
        let mut bad = 0;
        let mut idx = 0u64;
        for scheme in [SchemeSpec::DdUsGaussian, SchemeSpec::DdUsQpsk] {
            for q in [0.5, 2.0] {
                for kappa in [0.25, 0.5] {
                    for t in [8usize, 64] {
                        let o = EnergyCdf::new(scheme, t, q, Quadrature::default())?.order_stats(kappa)?;
                        let rep = order_stat_oracle(scheme, q, kappa, t, K, TRIALS, &RngStream::new(SEED, idx))?;
                        idx += 1;
                        for (name, z) in [
                            ("mean", rep.mean.z_score(o.mean)),
                            ("K·var", rep.k_variance.z_score(o.variance)),
                            ("quantile", rep.quantile.z_score(o.xi)),
                        ] {
                            if z >= Z_MAX {
                                bad += 1;
                            }
                            if z > worst {
                                worst = z;
                                worst_at = format!("{scheme} q={q} κ={kappa} T={t} {name}");
                            }
                        }
                    }
                }
            }
        }
        Ok((
            bad == 0,
            format!("{bad} of 48 comparisons at >= {Z_MAX} s.e.; largest z = {worst:.2} ({worst_at})"),
        ))
    })
}

/// Per-user ZFBF penalty 1/(1 − ακ) = 2 at finite size.
pub fn criterion_5() -> Check {
    const REL_TOL: f64 = 0.05;
    timed("criterion 5: finite-size ZFBF", 120.0, || {
        let full = SimConfig::new(200, 100, 100, 1, SchemeSpec::DdUsGaussian, 50, 5)?;
        let a = empirical_penalty(&full, Strategy::ZfbfFull)?;
        let rus = SimConfig::new(128, 512, 64, 1, SchemeSpec::DdUsGaussian, 50, 6)?;
        let b = empirical_penalty(&rus, Strategy::ZfbfRus)?;
        let ea = (a.mean / 2.0 - 1.0).abs();
        let eb = (b.mean / 2.0 - 1.0).abs();
        Ok((
            ea <= REL_TOL && eb <= REL_TOL,
            format!(
                "full N=200 K=100: {:.4} ± {:.4}; RUS N=128 K=512 K̃=64: {:.4} ± {:.4} (target 2, tol {}%)",
                a.mean,
                a.std_error,
                b.mean,
                b.std_error,
                REL_TOL * 100.0
            ),
        ))
    })
}

/// Greedy DD-US against exhaustive search and paired random subsets.
pub fn criterion_6() -> Check {
    const INSTANCES: usize = 100;
    const Z: f64 = 3.0;
    timed("criterion 6: greedy vs brute force", 60.0, || {
        let (n, k, kt, t) = (8usize, 8usize, 4usize, 2usize);
        let base = RngStream::new(6, 0);
        let mut below_min = 0;
        let mut above_avg = 0;
        let mut diffs = Vec::with_capacity(INSTANCES);
        for i in 0..INSTANCES {
            let mut rng = base.derive(i as u64);
            let h = sample_channel(n, k, &mut rng);
            let x = sample_symbols(SchemeSpec::DdUsGaussian, t, k, &mut rng);
            let (_, g) = greedy_dd_us(&h, &x, kt)?;
            let (_, best) = exhaustive_min_penalty(&h, &x, kt)?;
            if g < best * (1.0 - 1e-12) {
                below_min += 1;
            }
            let all: Vec<f64> = (0..k)
                .combinations(kt)
                .map(|s| energy_penalty_block(&h.rows(&s), &x.select_columns(s.iter())))
                .collect::<Result<_>>()?;
            if g > all.iter().sum::<f64>() / all.len() as f64 {
                above_avg += 1;
            }
            let s = random_user_selection(k, kt, &mut rng)?;
            let r = energy_penalty_block(&h.rows(&s), &x.select_columns(s.iter()))?;
            diffs.push(g - r);
        }
        let (md, se) = mean_and_se(&diffs);
        let ok = below_min == 0 && md + Z * se < 0.0 && above_avg * 100 <= INSTANCES;
        Ok((
            ok,
            format!(
                "greedy below exhaustive minimum: {below_min}/{INSTANCES}; mean(greedy − random) = {md:.4} ± {se:.4}; greedy above subset average: {above_avg}/{INSTANCES}"
            ),
        ))
    })
}

/// QPSK MI limits and Gaussian MI without selection.
pub fn criterion_7() -> Check {
    const QPSK_TOL: f64 = 1e-3;
    const Z: f64 = 3.0;
    timed("criterion 7: MI sanity", 180.0, || {
        let hi = qpsk_mi(db_to_linear(60.0));
        let lo = qpsk_mi(db_to_linear(-60.0));
        let (q, snr, t) = (1.0, 10.0, 64);
        let sel = SelectionModel::from_params(SchemeSpec::DdUsGaussian, t, q, 1.0, Quadrature::default())?;
        let rp = RateParams::new(SystemParams::new(0.5, 1.0, t, SchemeSpec::DdUsGaussian)?, snr, Assumption::Rs)?;
        let est = gaussian_mi_selected(
            &rp,
            &sel,
            &McOptions {
                samples: 1_000_000,
                seed: 7,
                max_std_error: None,
            },
        )?;
        let want = (1.0 + snr / q).log2();
        let z = (est.bits - want).abs() / est.std_error;
        let ok = (hi - 2.0).abs() <= QPSK_TOL && lo <= QPSK_TOL && z < Z;
        Ok((
            ok,
            format!(
                "QPSK @60 dB {hi:.6}, @−60 dB {lo:.2e}; Gaussian κ=1 MI {:.5} ± {:.5} vs {want:.5} (z = {z:.2})",
                est.bits, est.std_error
            ),
        ))
    })
}

/// Marginal selection probability κ and QPSK symbol independence.
pub fn criterion_8() -> Check {
    const TOL: f64 = 1e-9;
    timed("criterion 8: selection probability", 60.0, || {
        let mut worst: f64 = 0.0;
        let mut combos = 0;
        for scheme in SchemeSpec::ALL {
            for (t, q) in [(8usize, 0.5), (64, 2.0)] {
                for kappa in [0.25, 0.5] {
                    let m = SelectionModel::from_params(scheme, t, q, kappa, Quadrature::default())?;
                    worst = worst.max((marginal_selection_probability(&m) - kappa).abs());
                    combos += 1;
                }
            }
        }
        let m = SelectionModel::from_params(SchemeSpec::DdUsQpsk, 16, 0.8, 0.4, Quadrature::default())?;
        let mut rng = RngStream::new(8, 0);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let mut vals = Vec::with_capacity(100);
        for _ in 0..100 {
            let x: Vec<Complex64> = (0..16)
                .map(|_| Complex64::new(if rng.uniform() < 0.5 { h } else { -h }, if rng.uniform() < 0.5 { h } else { -h }))
                .collect();
            vals.push(dd_us_selection_given_symbols(&m, &x)?);
        }
        let spread = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max) - vals.iter().copied().fold(f64::INFINITY, f64::min);
        Ok((
            worst <= TOL && spread <= TOL,
            format!("max |Pr(s=1) − κ| over {combos} combinations = {worst:.2e}; QPSK spread over 100 vectors = {spread:.2e} (tol {TOL:e})"),
        ))
    })
}

/// SNR gap of the optimized Gaussian DD-US bound to CVP-RUS (best effort).
pub fn criterion_9() -> Check {
    const TARGETS: [(f64, f64); 2] = [(0.5, 1.2), (1.0, 1.4)];
    const TOL_DB: f64 = 0.3;
    const GRID: usize = 64;
    let mut c = timed("criterion 9: SNR gain vs CVP-RUS (best effort)", f64::INFINITY, || {
        let opts = SolverOptions::default();
        let dd = OptimizedBound::new(4.0, 64, SchemeSpec::DdUsGaussian, Assumption::Rs, GRID, &opts)?;
        let cvp = CvpRusCurve::new(4.0, GRID)?;
        let mut ok = true;
        let mut parts = Vec::new();
        for (bits, want) in TARGETS {
            let g = snr_gap(&dd, &cvp, bits)?;
            ok &= (g.gap_db() - want).abs() <= TOL_DB;
            parts.push(format!(
                "{bits} bits: DD-US {:.3} dB, CVP-RUS {:.3} dB, gap {:.3} dB (expected {want} ± {TOL_DB})",
                g.dd_us_snr_db,
                g.cvp_rus_snr_db,
                g.gap_db()
            ));
        }
        Ok((ok, parts.join("; ")))
    });
    if c.outcome == Outcome::Fail && !c.detail.starts_with("error") {
        c.outcome = Outcome::Warn;
    }
    c
}

fn pairs(kv: &[(&str, &str)]) -> Vec<(String, String)> {
    kv.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

/// `simulate` and `rate-sweep` reruns are byte-identical.
pub fn criterion_10() -> Check {
    timed("criterion 10: determinism", 120.0, || {
        let sim = SweepConfig::from_pairs(
            Command::Simulate,
            &pairs(&[
                ("scheme", "dd-us-qpsk"),
                ("N", "16"),
                ("K", "32"),
                ("T", "4"),
                ("trials", "20"),
                ("alphakappa-grid", "0.25,0.5"),
                ("strategy", "cvp-rus"),
                ("seed", "10"),
            ]),
        )?;
        let rate = SweepConfig::from_pairs(
            Command::RateSweep,
            &pairs(&[("T", "8"), ("alpha", "2"), ("alphakappa-grid", "0.3,0.6"), ("snr-db-grid", "0:10:3"), ("seed", "10")]),
        )?;
        let mut same = true;
        let mut sizes = Vec::new();
        for cfg in [&sim, &rate] {
            let a = run_sweep(cfg)?.to_csv_string()?;
            let b = run_sweep(cfg)?.to_csv_string()?;
            same &= a == b;
            sizes.push(format!("{} {} bytes", cfg.command, a.len()));
        }
        Ok((same, format!("reruns identical: {same} ({})", sizes.join(", "))))
    })
}

/// Closed-form checks of the special functions.
pub fn math_checks() -> Check {
    timed("math: special functions", 10.0, || {
        let mut worst: f64 = 0.0;
        worst = worst.max((q_function(0.0) - 0.5).abs());
        worst = worst.max((q_function(1.0) - 0.158_655_253_931_457_05).abs());
        worst = worst.max((ln_gamma(5.0) - 24f64.ln()).abs());
        worst = worst.max((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs());
        for x in [0.1, 1.0, 7.5] {
            worst = worst.max((regularized_lower_gamma(1.0, x)? - (1.0 - (-x).exp())).abs());
            worst = worst.max((regularized_lower_gamma(2.0, x)? - (1.0 - (1.0 + x) * (-x).exp())).abs());
        }
        let (nodes, w) = gauss_hermite(64);
        let m2: f64 = nodes.iter().zip(&w).map(|(x, w)| w * x * x).sum();
        worst = worst.max((m2 - std::f64::consts::PI.sqrt() / 2.0).abs());
        Ok((worst < 1e-12, format!("max deviation from closed forms {worst:.2e} (tol 1e-12)")))
    })
}

pub fn run_suite(suite: Suite) -> Vec<Check> {
    type Job = fn() -> Check;
    let jobs: Vec<Job> = match suite {
        Suite::Math => vec![math_checks],
        Suite::Cdf => vec![criterion_2],
        Suite::Replica => vec![criterion_1, criterion_3],
        Suite::Selection => vec![criterion_8],
        Suite::Rates => vec![criterion_7, criterion_9],
        Suite::Sim => vec![criterion_4, criterion_5, criterion_6, criterion_10],
        Suite::All => vec![
            math_checks,
            criterion_1,
            criterion_2,
            criterion_3,
            criterion_4,
            criterion_5,
            criterion_6,
            criterion_7,
            criterion_8,
            criterion_9,
            criterion_10,
        ],
    };
    jobs.into_iter()
        .map(|j| {
            let c = j();
            log::info!("{c}");
            c
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_parse() {
        for n in Suite::NAMES {
            assert_eq!(n.parse::<Suite>().unwrap().name(), n);
        }
        assert!(matches!("everything".parse::<Suite>(), Err(Error::Config(_))));
    }

    #[test]
    fn fast_suites_pass() {
        for c in run_suite(Suite::Math).into_iter().chain([criterion_1(), criterion_8()]) {
            assert_eq!(c.outcome, Outcome::Pass, "{c}");
        }
    }

    #[test]
    fn criterion_3_grid_has_72_points() {
        let g = criterion_3_grid();
        assert_eq!(g.len(), 72);
        assert!(g.iter().all(|p| p.validate().is_ok()));
    }
}
