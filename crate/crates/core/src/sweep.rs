//! Sweep configuration and grid drivers behind the `usvp` binary.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::path::PathBuf;
use std::str::FromStr;

use log::{info, warn};

use crate::charfn::SchemeSpec;
use crate::error::{Error, Result};
use crate::rates::{cvp_rus_rate, db_to_linear, BoundCurve};
use crate::replica::{solve, solve_rs_t_inf, Assumption, SolverOptions, SystemParams, DEFAULT_TOL};
use crate::sim::{empirical_penalty, SimConfig, Strategy};
use crate::special::RngStream;
use crate::validation::Suite;

pub const DEFAULT_ALPHA: f64 = 4.0;
pub const DEFAULT_T: usize = 64;
pub const DEFAULT_ALPHAKAPPA_GRID: &str = "0.1:0.9:9";
pub const DEFAULT_SNR_DB_GRID: &str = "5";
pub const DEFAULT_N: usize = 32;
pub const DEFAULT_K: usize = 128;
pub const DEFAULT_TRIALS: usize = 100;
pub const DEFAULT_SEED: u64 = 1;

/// Keys accepted in config files, identical to the long flag names.
pub const KEYS: [&str; 13] = [
    "scheme",
    "assumption",
    "alpha",
    "alphakappa-grid",
    "T",
    "snr-db-grid",
    "N",
    "K",
    "trials",
    "seed",
    "out",
    "strategy",
    "suite",
];

pub const PENALTY_COLUMNS: [&str; 10] = [
    "scheme",
    "assumption",
    "alpha",
    "kappa",
    "alphakappa",
    "T",
    "q",
    "penalty_per_user",
    "residual",
    "status",
];
pub const RATE_EXTRA_COLUMNS: [&str; 4] = ["snr_db", "mi_bits", "bound_bits", "kappa_opt"];
pub const SIM_EXTRA_COLUMNS: [&str; 8] = ["N", "K", "Ktilde", "trials", "mean", "std_err", "seed", "strategy"];

pub const CSV_SCHEMA_HELP: &str = "\
CSV output (header row, UTF-8, LF, numbers with 12 significant digits):
  penalty-sweep: scheme,assumption,alpha,kappa,alphakappa,T,q,penalty_per_user,residual,status
  rate-sweep:    penalty-sweep columns + snr_db,mi_bits,bound_bits,kappa_opt
  simulate:      penalty-sweep columns + N,K,Ktilde,trials,mean,std_err,seed,strategy
                 (q, penalty_per_user, residual and assumption are left empty;
                 alpha = K/N and Ktilde = round(alphakappa * N))
status is 'ok', 'skipped: <reason>' or 'error: <message>'.
Grids: 'a:b:n' (n points from a to b inclusive), 'x,y,z' or a single value.";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    PenaltySweep,
    RateSweep,
    Simulate,
    Validate,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::PenaltySweep => "penalty-sweep",
            Self::RateSweep => "rate-sweep",
            Self::Simulate => "simulate",
            Self::Validate => "validate",
        }
    }
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Command {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        [Self::PenaltySweep, Self::RateSweep, Self::Simulate, Self::Validate]
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown command '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub command: Command,
    pub scheme: SchemeSpec,
    pub assumptions: Vec<Assumption>,
    pub alphas: Vec<f64>,
    pub alphakappa: Vec<f64>,
    pub ts: Vec<usize>,
    pub snr_db: Vec<f64>,
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub seed: u64,
    pub strategy: Strategy,
    pub suite: Suite,
    pub out: Option<PathBuf>,
}

/// Reads a flat `key = value` file (`#` starts a comment).
pub fn parse_config_text(text: &str) -> Result<Vec<(String, String)>> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected 'key = value', got '{line}'", i + 1)))?;
        let (k, v) = (k.trim().trim_start_matches("--"), v.trim());
        if !KEYS.contains(&k) {
            return Err(Error::Config(format!("line {}: unknown key '{k}'", i + 1)));
        }
        pairs.push((k.to_string(), v.to_string()));
    }
    Ok(pairs)
}

/// `a:b:n`, a comma list, or one value.
pub fn parse_grid(s: &str) -> std::result::Result<Vec<f64>, String> {
    let s = s.trim();
    if let Some((a, rest)) = s.split_once(':') {
        let (b, n) = rest.split_once(':').ok_or_else(|| format!("grid '{s}' must be a:b:n"))?;
        let a: f64 = a.trim().parse().map_err(|_| format!("bad grid start in '{s}'"))?;
        let b: f64 = b.trim().parse().map_err(|_| format!("bad grid end in '{s}'"))?;
        let n: usize = n.trim().parse().map_err(|_| format!("bad grid count in '{s}'"))?;
        return match n {
            0 => Err(format!("grid '{s}' is empty")),
            1 => Ok(vec![a]),
            _ => Ok((0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()),
        };
    }
    let v: std::result::Result<Vec<f64>, _> = s.split(',').map(|x| x.trim().parse::<f64>()).collect();
    match v {
        Ok(v) if !v.is_empty() && v.iter().all(|x| x.is_finite()) => Ok(v),
        _ => Err(format!("cannot parse grid '{s}'")),
    }
}

fn parse_list<T: FromStr>(s: &str) -> std::result::Result<Vec<T>, String> {
    s.split(',')
        .map(|x| x.trim().parse::<T>().map_err(|_| format!("cannot parse '{}' in '{s}'", x.trim())))
        .collect()
}

impl SweepConfig {
    /// Builds a config from key/value pairs; later pairs override earlier
    /// ones, so flags are passed after file entries.  Every problem is
    /// reported in one error.
    pub fn from_pairs(command: Command, pairs: &[(String, String)]) -> Result<Self> {
        let mut map: BTreeMap<&str, &str> = BTreeMap::new();
        let mut bad = Vec::new();
        for (k, v) in pairs {
            match KEYS.iter().find(|&&x| x == k) {
                Some(key) => {
                    map.insert(key, v.as_str());
                }
                None => bad.push(format!("unknown key '{k}'")),
            }
        }
        let get = |k: &str, d: &'static str| -> String { map.get(k).map(|s| s.to_string()).unwrap_or_else(|| d.to_string()) };
        let mut note = |r: std::result::Result<(), String>| {
            if let Err(e) = r {
                bad.push(e);
            }
        };

        let mut scheme = SchemeSpec::DdUsGaussian;
        note(get("scheme", "dd-us-gaussian").parse().map(|s| scheme = s).map_err(|e: Error| e.to_string()));
        let mut assumptions = vec![Assumption::Rs];
        let a = get("assumption", "rs");
        note(if a.trim().eq_ignore_ascii_case("both") {
            assumptions = vec![Assumption::Rs, Assumption::OneRsb];
            Ok(())
        } else {
            a.parse().map(|x| assumptions = vec![x]).map_err(|e: Error| e.to_string())
        });
        let mut alphas = vec![DEFAULT_ALPHA];
        note(parse_grid(&get("alpha", "4")).map(|v| alphas = v).map_err(|e| format!("alpha: {e}")));
        let mut alphakappa = Vec::new();
        note(parse_grid(&get("alphakappa-grid", DEFAULT_ALPHAKAPPA_GRID))
            .map(|v| alphakappa = v)
            .map_err(|e| format!("alphakappa-grid: {e}")));
        let mut ts = vec![DEFAULT_T];
        note(parse_list::<usize>(&get("T", "64")).map(|v| ts = v).map_err(|e| format!("T: {e}")));
        let mut snr_db = Vec::new();
        note(parse_grid(&get("snr-db-grid", DEFAULT_SNR_DB_GRID)).map(|v| snr_db = v).map_err(|e| format!("snr-db-grid: {e}")));
        let mut int = |k: &str, d: &'static str| -> u64 {
            match get(k, d).trim().parse::<u64>() {
                Ok(v) => v,
                Err(_) => {
                    bad.push(format!("{k}: expected a nonnegative integer, got '{}'", get(k, d)));
                    0
                }
            }
        };
        let n = int("N", "32") as usize;
        let k = int("K", "128") as usize;
        let trials = int("trials", "100") as usize;
        let seed = int("seed", "1");
        let mut strategy = Strategy::GreedyDdUs;
        match get("strategy", "greedy-dd-us").parse() {
            Ok(s) => strategy = s,
            Err(e) => bad.push(e.to_string()),
        }
        let mut suite = Suite::All;
        match get("suite", "all").parse() {
            Ok(s) => suite = s,
            Err(e) => bad.push(e.to_string()),
        }
        let out = map.get("out").map(PathBuf::from);

        if ts.contains(&0) {
            bad.push("T must be >= 1".into());
        }
        if alphas.iter().any(|&a| !(a > 0.0)) {
            bad.push("alpha must be > 0".into());
        }
        if command == Command::Simulate {
            if n == 0 || k == 0 {
                bad.push("N and K must be >= 1".into());
            }
            if trials == 0 {
                bad.push("trials must be >= 1".into());
            }
        }
        if bad.is_empty() {
            Ok(Self {
                command,
                scheme,
                assumptions,
                alphas,
                alphakappa,
                ts,
                snr_db,
                n,
                k,
                trials,
                seed,
                strategy,
                suite,
                out,
            })
        } else {
            Err(Error::InvalidParams(bad))
        }
    }
}

/// 12 significant digits, `%.12g` style.
pub fn fmt_num(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mant, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let trim = |s: String| {
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    };
    if (-5..12).contains(&exp) {
        trim(format!("{:.*}", (11 - exp) as usize, x))
    } else {
        format!("{}e{}{:02}", trim(mant.to_string()), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

/// Header and rows of one sweep, in grid order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutput {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub ok: usize,
    pub failed: usize,
}

impl SweepOutput {
    fn new(header: Vec<&str>) -> Self {
        Self {
            header: header.into_iter().map(String::from).collect(),
            rows: Vec::new(),
            ok: 0,
            failed: 0,
        }
    }

    fn push(&mut self, row: Vec<String>, ok: bool) {
        if ok {
            self.ok += 1;
        } else {
            self.failed += 1;
        }
        self.rows.push(row);
    }

    /// Nonzero only when there were points and none succeeded.
    pub fn exit_code(&self) -> i32 {
        if self.ok == 0 && self.failed > 0 {
            1
        } else {
            0
        }
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(w);
        let io = |e: csv::Error| Error::Config(format!("cannot write CSV: {e}"));
        wr.write_record(&self.header).map_err(io)?;
        for r in &self.rows {
            wr.write_record(r).map_err(io)?;
        }
        wr.flush().map_err(|e| Error::Config(format!("cannot write CSV: {e}")))
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("CSV is UTF-8"))
    }
}

fn status_of(e: &Error) -> String {
    match e {
        Error::InvalidParams(v) => format!("skipped: {}", v.join("; ")),
        other => format!("error: {other}"),
    }
}

fn base_row(scheme: SchemeSpec, assumption: &str, alpha: f64, ak: f64, t: usize) -> Vec<String> {
    vec![
        scheme.name().into(),
        assumption.into(),
        fmt_num(alpha),
        fmt_num(ak / alpha),
        fmt_num(ak),
        t.to_string(),
    ]
}

/// Replica order parameter and penalty at every (T, assumption, α, ακ).
pub fn penalty_sweep(cfg: &SweepConfig, opts: &SolverOptions) -> SweepOutput {
    let mut out = SweepOutput::new(PENALTY_COLUMNS.to_vec());
    for &t in &cfg.ts {
        for &assumption in &cfg.assumptions {
            for &alpha in &cfg.alphas {
                for &ak in &cfg.alphakappa {
                    let mut row = base_row(cfg.scheme, assumption.name(), alpha, ak, t);
                    let res = SystemParams::new(alpha, ak / alpha, t, cfg.scheme).and_then(|p| solve(&p, assumption, DEFAULT_TOL, opts));
                    info!("{} {assumption} α={alpha} ακ={ak} T={t}: {res:?}", cfg.scheme);
                    let ok = res.is_ok();
                    match res {
                        Ok(s) => {
                            row.extend([fmt_num(s.q()), fmt_num(s.penalty_per_user()), fmt_num(s.residual()), "ok".into()]);
                        }
                        Err(e) => row.extend([String::new(), String::new(), String::new(), status_of(&e)]),
                    }
                    out.push(row, ok);
                }
            }
        }
    }
    out
}

struct RatePoint {
    q: f64,
    residual: f64,
    penalty: f64,
    curve: Option<BoundCurve>,
}

fn rate_point(cfg: &SweepConfig, alpha: f64, ak: f64, t: usize, assumption: Assumption, opts: &SolverOptions) -> Result<RatePoint> {
    let sys = SystemParams::new(alpha, ak / alpha, t, cfg.scheme)?;
    if !cfg.scheme.is_dd_us() {
        if assumption != Assumption::Rs {
            return Err(Error::Domain("the CVP-RUS reference is evaluated under RS only".into()));
        }
        let s = solve_rs_t_inf(cfg.scheme, alpha, sys.kappa, DEFAULT_TOL)?;
        return Ok(RatePoint {
            q: s.q0,
            residual: s.residual,
            penalty: s.penalty_per_user,
            curve: None,
        });
    }
    let s = solve(&sys, assumption, DEFAULT_TOL, opts)?;
    Ok(RatePoint {
        q: s.q(),
        residual: s.residual(),
        penalty: s.penalty_per_user(),
        curve: Some(BoundCurve::from_order_parameter(&sys, s.q(), &opts.quad)?),
    })
}

/// Sum-rate bound (DD-US) or CVP-RUS reference rate (us-cvp) at every
/// (T, assumption, α, SNR, ακ); `kappa_opt` is the best κ on the ακ grid at
/// that SNR.
pub fn rate_sweep(cfg: &SweepConfig, opts: &SolverOptions) -> SweepOutput {
    let mut cols = PENALTY_COLUMNS.to_vec();
    cols.extend(RATE_EXTRA_COLUMNS);
    let mut out = SweepOutput::new(cols);
    for &t in &cfg.ts {
        for &assumption in &cfg.assumptions {
            for &alpha in &cfg.alphas {
                let points: Vec<Result<RatePoint>> = cfg
                    .alphakappa
                    .iter()
                    .map(|&ak| rate_point(cfg, alpha, ak, t, assumption, opts))
                    .collect();
                for &db in &cfg.snr_db {
                    let snr = db_to_linear(db);
                    let vals: Vec<Result<(f64, f64)>> = points
                        .iter()
                        .zip(&cfg.alphakappa)
                        .map(|(p, &ak)| match p {
                            Err(e) => Err(e.clone()),
                            Ok(p) => match &p.curve {
                                Some(c) => c.at(snr).map(|r| (r.mi_selected, r.bound)),
                                None => cvp_rus_rate(alpha, ak / alpha, snr).map(|r| (r.mi_selected, r.bound)),
                            },
                        })
                        .collect();
                    let kappa_opt = vals
                        .iter()
                        .zip(&cfg.alphakappa)
                        .filter_map(|(v, &ak)| v.as_ref().ok().map(|&(_, b)| (ak / alpha, b)))
                        .fold(None, |acc: Option<(f64, f64)>, (k, b)| match acc {
                            Some(a) if a.1 >= b => Some(a),
                            _ => Some((k, b)),
                        })
                        .map(|(k, _)| k);
                    for ((p, v), &ak) in points.iter().zip(&vals).zip(&cfg.alphakappa) {
                        let mut row = base_row(cfg.scheme, assumption.name(), alpha, ak, t);
                        match (p, v) {
                            (Ok(p), Ok((mi, b))) => {
                                row.extend([fmt_num(p.q), fmt_num(p.penalty), fmt_num(p.residual), "ok".into()]);
                                row.extend([fmt_num(db), fmt_num(*mi), fmt_num(*b), kappa_opt.map(fmt_num).unwrap_or_default()]);
                                out.push(row, true);
                            }
                            (_, Err(e)) => {
                                row.extend([String::new(), String::new(), String::new(), status_of(e)]);
                                row.extend([fmt_num(db), String::new(), String::new(), kappa_opt.map(fmt_num).unwrap_or_default()]);
                                out.push(row, false);
                            }
                            (Err(_), Ok(_)) => unreachable!("values come from points"),
                        }
                    }
                }
            }
        }
    }
    out
}

/// Monte-Carlo penalties over (T, ακ) with N and K fixed; grid point i uses
/// stream i of the configured seed.
pub fn simulate(cfg: &SweepConfig) -> SweepOutput {
    let mut cols = PENALTY_COLUMNS.to_vec();
    cols.extend(SIM_EXTRA_COLUMNS);
    let mut out = SweepOutput::new(cols);
    let alpha = cfg.k as f64 / cfg.n as f64;
    let mut index = 0u64;
    for &t in &cfg.ts {
        for &ak in &cfg.alphakappa {
            let k_tilde = (ak * cfg.n as f64).round().max(0.0) as usize;
            let mut row = base_row(cfg.scheme, "", alpha, ak, t);
            let mut sim = SimConfig {
                n: cfg.n,
                k: cfg.k,
                k_tilde,
                t,
                scheme: cfg.scheme,
                trials: cfg.trials,
                rng: RngStream::new(cfg.seed, index),
            };
            if cfg.strategy == Strategy::ZfbfFull {
                sim.k_tilde = cfg.k.min(cfg.n);
            }
            index += 1;
            let res = empirical_penalty(&sim, cfg.strategy);
            info!("simulate {} ακ={ak} T={t}: {res:?}", cfg.strategy);
            let (status, tail, ok) = match res {
                Ok(r) => {
                    let status = if r.failed == 0 {
                        "ok".to_string()
                    } else {
                        warn!("{} of {} trials failed", r.failed, cfg.trials);
                        format!("ok ({} failed trials)", r.failed)
                    };
                    (status, [r.trials.to_string(), fmt_num(r.mean), fmt_num(r.std_error)], true)
                }
                Err(e) => (status_of(&e), [String::new(), String::new(), String::new()], false),
            };
            row.extend([String::new(), String::new(), String::new(), status]);
            row.extend([cfg.n.to_string(), cfg.k.to_string(), sim.k_tilde.to_string()]);
            row.extend(tail);
            row.extend([cfg.seed.to_string(), cfg.strategy.name().into()]);
            out.push(row, ok);
        }
    }
    out
}

/// Runs a sweep command; `validate` is handled by [`crate::validation`].
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutput> {
    let opts = SolverOptions::default();
    match cfg.command {
        Command::PenaltySweep => Ok(penalty_sweep(cfg, &opts)),
        Command::RateSweep => Ok(rate_sweep(cfg, &opts)),
        Command::Simulate => Ok(simulate(cfg)),
        Command::Validate => Err(Error::Config("validate does not produce a sweep".into())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(kv: &[(&str, &str)]) -> Vec<(String, String)> {
        kv.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn defaults_follow_figure_regime() {
        let c = SweepConfig::from_pairs(Command::PenaltySweep, &pairs(&[("scheme", "dd-us-qpsk"), ("alphakappa-grid", "0.5")])).unwrap();
        assert_eq!(c.alphas, vec![4.0]);
        assert_eq!(c.ts, vec![64]);
        assert_eq!(c.assumptions, vec![Assumption::Rs]);
        assert_eq!(c.scheme, SchemeSpec::DdUsQpsk);
    }

    #[test]
    fn later_pairs_override_and_errors_collect() {
        let c = SweepConfig::from_pairs(Command::PenaltySweep, &pairs(&[("T", "8"), ("T", "16,32"), ("assumption", "both")])).unwrap();
        assert_eq!(c.ts, vec![16, 32]);
        assert_eq!(c.assumptions.len(), 2);
        match SweepConfig::from_pairs(Command::Simulate, &pairs(&[("T", "x"), ("scheme", "bpsk"), ("trials", "0"), ("bogus", "1")])) {
            Err(Error::InvalidParams(v)) => {
                assert_eq!(v.len(), 4, "{v:?}");
                assert!(v.iter().any(|m| m.contains("bogus")));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn config_file_unknown_key_names_key_and_line() {
        let err = parse_config_text("# sweep\nscheme = us-cvp\n\nfrobnicate = 2\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("frobnicate") && msg.contains("line 4"), "{msg}");
        let ok = parse_config_text("alpha = 2 # comment\n--T=8\n").unwrap();
        assert_eq!(ok, pairs(&[("alpha", "2"), ("T", "8")]));
        assert!(parse_config_text("alpha 2").is_err());
    }

    #[test]
    fn grids() {
        assert_eq!(parse_grid("0.1:0.9:9").unwrap().len(), 9);
        assert_eq!(parse_grid("1,2, 3").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(parse_grid("5").unwrap(), vec![5.0]);
        assert!(parse_grid("1:2").is_err());
        assert!(parse_grid("0:1:0").is_err());
        assert!(parse_grid("a").is_err());
    }

    #[test]
    fn number_format() {
        assert_eq!(fmt_num(0.30000000000000004), "0.3");
        assert_eq!(fmt_num(2.0), "2");
        assert_eq!(fmt_num(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt_num(123456789012345.0), "1.23456789012e+14");
        assert_eq!(fmt_num(1.5e-7), "1.5e-07");
        assert_eq!(fmt_num(-42.125), "-42.125");
        assert_eq!(fmt_num(0.0), "0");
    }

    #[test]
    fn penalty_sweep_rows_and_skip_reason() {
        let c = SweepConfig::from_pairs(
            Command::PenaltySweep,
            &pairs(&[("alphakappa-grid", "0.2,1.0"), ("T", "8"), ("alpha", "2")]),
        )
        .unwrap();
        let out = run_sweep(&c).unwrap();
        assert_eq!(out.rows.len(), 2);
        assert_eq!(out.header, PENALTY_COLUMNS);
        assert_eq!(out.rows[0][9], "ok");
        assert!(out.rows[1][9].starts_with("skipped") && out.rows[1][9].contains("ακ < 1 required"));
        assert_eq!(out.exit_code(), 0);
        let csv = out.to_csv_string().unwrap();
        assert!(csv.starts_with("scheme,assumption,alpha,kappa,alphakappa,T,q,penalty_per_user,residual,status\n"));
        assert!(!csv.contains('\r'));
    }

    #[test]
    fn all_points_failing_exits_nonzero() {
        let c = SweepConfig::from_pairs(Command::PenaltySweep, &pairs(&[("alphakappa-grid", "1.0,1.5")])).unwrap();
        assert_eq!(run_sweep(&c).unwrap().exit_code(), 1);
    }

    #[test]
    fn simulate_is_byte_identical_on_rerun() {
        let c = SweepConfig::from_pairs(
            Command::Simulate,
            &pairs(&[
                ("N", "8"),
                ("K", "16"),
                ("T", "2"),
                ("trials", "5"),
                ("alphakappa-grid", "0.25,0.5"),
                ("seed", "9"),
            ]),
        )
        .unwrap();
        let a = run_sweep(&c).unwrap().to_csv_string().unwrap();
        let b = run_sweep(&c).unwrap().to_csv_string().unwrap();
        assert_eq!(a, b);
        assert_eq!(a.lines().count(), 3);
        assert!(a.lines().nth(1).unwrap().ends_with(",9,greedy-dd-us"));
    }
}
