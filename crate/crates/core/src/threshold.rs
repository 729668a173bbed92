//! Monte Carlo threshold sweeps and crossing estimates.

use std::io::{Read, Write};
use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::code::build_code;
use crate::decoder::{Decoder, GraphTemplate, Weighting};
use crate::error::{Error, Result};
use crate::noisesim::{build_schedule, simulate_shot, ErrorParams, RandomFaults};

/// Number of noisy rounds per shot.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RoundsPolicy {
    /// `R = d`.
    #[default]
    Distance,
    Fixed(usize),
}

impl RoundsPolicy {
    pub fn rounds(&self, d: usize) -> usize {
        match *self {
            RoundsPolicy::Distance => d,
            RoundsPolicy::Fixed(r) => r,
        }
    }
}

impl std::str::FromStr for RoundsPolicy {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        if s == "d" || s == "distance" {
            return Ok(Self::Distance);
        }
        s.parse::<usize>()
            .map(Self::Fixed)
            .map_err(|_| format!("rounds must be 'd' or a positive integer, got '{s}'"))
    }
}

fn default_shots() -> u64 {
    10_000
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub d_list: Vec<usize>,
    /// Per-primitive fault rates `ε`; the reported abscissa is `5ε`.
    pub eps_list: Vec<f64>,
    #[serde(default = "default_shots")]
    pub shots: u64,
    #[serde(default)]
    pub rounds: RoundsPolicy,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub weighting: Weighting,
    #[serde(default)]
    pub out: Option<PathBuf>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            d_list: vec![5, 9, 13],
            eps_list: [0.004, 0.006, 0.008, 0.010, 0.012].iter().map(|pp| pp / 5.0).collect(),
            shots: default_shots(),
            rounds: RoundsPolicy::Distance,
            seed: 0,
            weighting: Weighting::Probability,
            out: None,
        }
    }
}

impl SweepConfig {
    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d_list.is_empty() || self.eps_list.is_empty() {
            return Err(Error::Config("d_list and eps_list must not be empty".into()));
        }
        for &d in &self.d_list {
            build_code(d).map_err(|e| Error::Config(e.to_string()))?;
        }
        // ε = 0 is allowed as a noiseless sanity run.
        if let Some(e) = self.eps_list.iter().find(|e| !(0.0..=0.04).contains(*e)) {
            return Err(Error::Config(format!("epsilon {e} outside [0, 0.04]")));
        }
        if self.shots == 0 {
            return Err(Error::Config("shots must be at least 1".into()));
        }
        if self.rounds == RoundsPolicy::Fixed(0) {
            return Err(Error::Config("rounds must be at least 1".into()));
        }
        Ok(())
    }
}

/// One `(d, ε)` point. Field names are the CSV header.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdRecord {
    pub d: usize,
    pub epsilon: f64,
    pub pp_rate: f64,
    pub rounds: usize,
    pub shots: u64,
    pub failures: u64,
    pub rate_per_round: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Seed of this point's shot streams.
    pub seed: u64,
}

pub const CSV_HEADER: &str = "d,epsilon,pp_rate,rounds,shots,failures,rate_per_round,ci_low,ci_high,seed";

impl ThresholdRecord {
    pub fn new(d: usize, epsilon: f64, rounds: usize, shots: u64, failures: u64, seed: u64) -> Self {
        let (lo, hi) = wilson_interval(failures, shots, 1.96);
        let r = rounds as f64;
        Self {
            d,
            epsilon,
            pp_rate: 5.0 * epsilon,
            rounds,
            shots,
            failures,
            rate_per_round: failures as f64 / (shots as f64 * r),
            ci_low: lo / r,
            ci_high: hi / r,
            seed,
        }
    }
}

/// Per-round rate `p` for which `R` independent rounds, each flipping the
/// logical with probability `p`, give an odd number of flips with
/// probability `P`: `p = (1 − (1 − 2P)^{1/R}) / 2`. Unlike `P/R` this does not
/// saturate as `P` approaches ½, where it is undefined (NaN).
pub fn compounded_rate(p_shot: f64, rounds: usize) -> f64 {
    if p_shot >= 0.5 {
        return f64::NAN;
    }
    (1.0 - (1.0 - 2.0 * p_shot).powf(1.0 / rounds as f64)) / 2.0
}

/// `records` with rates and intervals re-expressed through
/// [`compounded_rate`]. Fit weights still come from the failure counts.
pub fn compounded(records: &[ThresholdRecord]) -> Vec<ThresholdRecord> {
    records
        .iter()
        .map(|r| {
            let rr = r.rounds as f64;
            ThresholdRecord {
                rate_per_round: compounded_rate(r.failures as f64 / r.shots as f64, r.rounds),
                ci_low: compounded_rate(r.ci_low * rr, r.rounds),
                ci_high: compounded_rate(r.ci_high * rr, r.rounds),
                ..r.clone()
            }
        })
        .collect()
}

/// Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: u64, n: u64, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((center - half).max(0.0).min(p), (center + half).min(1.0).max(p))
}

/// Seed for the shots of point `(d, k)`, derived from the master seed.
pub fn point_seed(master: u64, d: usize, k: usize) -> u64 {
    // SplitMix64 finaliser over a simple combination.
    let mut z = master ^ ((d as u64) << 32) ^ (k as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Failures over `shots` shots; shot `i` uses stream `i` of `seed`.
pub fn count_failures(decoder: &Decoder<'_>, eps: f64, rounds: usize, shots: u64, seed: u64) -> Result<u64> {
    let sched = build_schedule(decoder.layout());
    let matcher = decoder.matcher();
    (0..shots)
        .into_par_iter()
        .map(|i| {
            let mut src = RandomFaults::new(eps, seed, i);
            let h = simulate_shot(&sched, rounds, &mut src);
            decoder.decode_with(&matcher, &h).map(|o| u64::from(o.logical_failure))
        })
        .try_reduce(|| 0, |a, b| Ok(a + b))
}

pub fn run_threshold(cfg: &SweepConfig) -> Result<Vec<ThresholdRecord>> {
    run_threshold_with(cfg, |_| {})
}

/// Like [`run_threshold`], calling `progress` after each point.
pub fn run_threshold_with(cfg: &SweepConfig, mut progress: impl FnMut(&ThresholdRecord)) -> Result<Vec<ThresholdRecord>> {
    cfg.validate()?;
    let mut ds = cfg.d_list.clone();
    ds.sort_unstable();
    ds.dedup();
    let mut eps: Vec<(usize, f64)> = cfg.eps_list.iter().copied().enumerate().collect();
    eps.sort_by(|a, b| a.1.total_cmp(&b.1));

    let mut out = Vec::new();
    for d in ds {
        let layout = build_code(d)?;
        let template = GraphTemplate::new(&layout);
        let rounds = cfg.rounds.rounds(d);
        for &(k, e) in &eps {
            let params = ErrorParams::new(e)?;
            // Weights need a positive rate; ε = 0 produces no events anyway.
            let weight_params = if e > 0.0 { params } else { ErrorParams::new(1e-3)? };
            let decoder = Decoder::from_template(&layout, &template, rounds, &weight_params, cfg.weighting);
            let seed = point_seed(cfg.seed, d, k);
            let failures = count_failures(&decoder, e, rounds, cfg.shots, seed)?;
            let rec = ThresholdRecord::new(d, e, rounds, cfg.shots, failures, seed);
            progress(&rec);
            out.push(rec);
        }
    }
    Ok(out)
}

pub fn write_csv<W: Write>(w: W, records: &[ThresholdRecord]) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in records {
        wr.serialize(r).map_err(|e| Error::Format(e.to_string()))?;
    }
    if records.is_empty() {
        wr.write_record(CSV_HEADER.split(',')).map_err(|e| Error::Format(e.to_string()))?;
    }
    wr.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(r: R) -> Result<Vec<ThresholdRecord>> {
    let mut rd = csv::Reader::from_reader(r);
    let header = rd.headers().map_err(|e| Error::Format(e.to_string()))?.iter().collect::<Vec<_>>().join(",");
    if header != CSV_HEADER {
        return Err(Error::Format(format!("unexpected header '{header}'")));
    }
    rd.deserialize().map(|r| r.map_err(|e| Error::Format(e.to_string()))).collect()
}

/// Weighted least-squares line `ln(rate) = a + b ln(5ε)` for one distance.
#[derive(Clone, Debug, Serialize)]
pub struct LogFit {
    pub d: usize,
    pub intercept: f64,
    pub slope: f64,
    /// Covariance of `(intercept, slope)`.
    pub cov: [[f64; 2]; 2],
    pub x_range: (f64, f64),
    pub points: usize,
}

impl LogFit {
    pub fn at(&self, pp: f64) -> f64 {
        (self.intercept + self.slope * pp.ln()).exp()
    }
}

/// Fit per-distance lines; points without failures are skipped.
pub fn fit_curves(records: &[ThresholdRecord]) -> Vec<LogFit> {
    let mut ds: Vec<usize> = records.iter().map(|r| r.d).collect();
    ds.sort_unstable();
    ds.dedup();
    ds.into_iter()
        .filter_map(|d| {
            let pts: Vec<(f64, f64, f64)> = records
                .iter()
                .filter(|r| r.d == d && r.failures > 0 && r.failures < r.shots && r.pp_rate > 0.0 && r.rate_per_round.is_finite())
                .map(|r| {
                    let p_shot = r.failures as f64 / r.shots as f64;
                    // Var(ln k) ≈ (1 − p)/k for binomial k.
                    let var = (1.0 - p_shot) / r.failures as f64;
                    (r.pp_rate.ln(), r.rate_per_round.ln(), 1.0 / var.max(1e-12))
                })
                .collect();
            if pts.len() < 2 {
                return None;
            }
            let (mut s, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for &(x, y, w) in &pts {
                s += w;
                sx += w * x;
                sy += w * y;
                sxx += w * x * x;
                sxy += w * x * y;
            }
            let det = s * sxx - sx * sx;
            if det.abs() < 1e-300 {
                return None;
            }
            let slope = (s * sxy - sx * sy) / det;
            let intercept = (sxx * sy - sx * sxy) / det;
            // Scale the covariance by the reduced chi-square when there are
            // spare degrees of freedom.
            let chi2: f64 = pts.iter().map(|&(x, y, w)| w * (y - intercept - slope * x).powi(2)).sum();
            let dof = pts.len().saturating_sub(2);
            let scale = if dof > 0 { (chi2 / dof as f64).max(1.0) } else { 1.0 };
            let cov = [[scale * sxx / det, -scale * sx / det], [-scale * sx / det, scale * s / det]];
            let xs = pts.iter().map(|p| p.0);
            let lo = xs.clone().fold(f64::INFINITY, f64::min);
            let hi = xs.fold(f64::NEG_INFINITY, f64::max);
            Some(LogFit { d, intercept, slope, cov, x_range: (lo, hi), points: pts.len() })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Crossing {
    /// Crossing abscissa in `5ε`, with its one-sigma uncertainty.
    At { pp: f64, sigma: f64 },
    NoCrossing,
}

#[derive(Clone, Debug, Serialize)]
pub struct PairCrossing {
    pub d_small: usize,
    pub d_large: usize,
    pub crossing: Crossing,
}

#[derive(Clone, Debug, Serialize)]
pub struct ThresholdEstimate {
    pub fits: Vec<LogFit>,
    /// Crossings of consecutive distances.
    pub pairs: Vec<PairCrossing>,
    /// Inverse-variance mean of the pairwise crossings, if any.
    pub combined: Crossing,
}

fn crossing(a: &LogFit, b: &LogFit) -> Crossing {
    let db = a.slope - b.slope;
    if db.abs() < 1e-12 {
        return Crossing::NoCrossing;
    }
    let x = (b.intercept - a.intercept) / db;
    let lo = a.x_range.0.max(b.x_range.0);
    let hi = a.x_range.1.min(b.x_range.1);
    if !(lo..=hi).contains(&x) {
        return Crossing::NoCrossing;
    }
    let ga = [-1.0 / db, -x / db];
    let gb = [1.0 / db, x / db];
    let quad = |g: [f64; 2], c: [[f64; 2]; 2]| {
        g[0] * (c[0][0] * g[0] + c[0][1] * g[1]) + g[1] * (c[1][0] * g[0] + c[1][1] * g[1])
    };
    let var_x = quad(ga, a.cov) + quad(gb, b.cov);
    let pp = x.exp();
    Crossing::At { pp, sigma: pp * var_x.max(0.0).sqrt() }
}

pub fn estimate_threshold(records: &[ThresholdRecord]) -> Result<ThresholdEstimate> {
    let fits = fit_curves(records);
    if fits.len() < 2 {
        return Err(Error::Config("need fits for at least two distances".into()));
    }
    let pairs: Vec<PairCrossing> = fits
        .windows(2)
        .map(|w| PairCrossing { d_small: w[0].d, d_large: w[1].d, crossing: crossing(&w[0], &w[1]) })
        .collect();
    let (mut wsum, mut xsum) = (0.0, 0.0);
    for p in &pairs {
        if let Crossing::At { pp, sigma } = p.crossing {
            let w = 1.0 / sigma.max(1e-12).powi(2);
            wsum += w;
            xsum += w * pp;
        }
    }
    let combined = if wsum > 0.0 { Crossing::At { pp: xsum / wsum, sigma: wsum.sqrt().recip() } } else { Crossing::NoCrossing };
    Ok(ThresholdEstimate { fits, pairs, combined })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(pth: f64, pps: &[f64]) -> Vec<ThresholdRecord> {
        let shots = 1_000_000_000u64;
        let mut v = Vec::new();
        for d in [5usize, 9, 13] {
            for &pp in pps {
                let rate = 0.01 * (pp / pth).powf((d + 1) as f64 / 2.0);
                let failures = (rate * shots as f64 * d as f64).round() as u64;
                v.push(ThresholdRecord::new(d, pp / 5.0, d, shots, failures, 0));
            }
        }
        v
    }

    #[test]
    fn recovers_synthetic_threshold() {
        let recs = synthetic(0.008, &[0.004, 0.006, 0.008, 0.010, 0.012]);
        let est = estimate_threshold(&recs).unwrap();
        assert_eq!(est.pairs.len(), 2);
        for p in est.pairs.iter().map(|p| &p.crossing).chain([&est.combined]) {
            let Crossing::At { pp, sigma } = *p else { panic!("no crossing") };
            assert!((pp - 0.008).abs() < 1e-4 + 3.0 * sigma, "{pp} ± {sigma}");
        }
    }

    #[test]
    fn no_crossing_below_threshold() {
        let recs = synthetic(0.05, &[0.004, 0.006, 0.008]);
        let est = estimate_threshold(&recs).unwrap();
        assert!(est.pairs.iter().all(|p| p.crossing == Crossing::NoCrossing));
        assert_eq!(est.combined, Crossing::NoCrossing);
    }

    #[test]
    fn compounded_rate_inverts_repeated_flips() {
        for (p, r) in [(0.01f64, 5usize), (0.03, 13), (0.2, 9)] {
            // Probability of an odd number of flips in r rounds.
            let odd = (1.0 - (1.0 - 2.0 * p).powi(r as i32)) / 2.0;
            assert!((compounded_rate(odd, r) - p).abs() < 1e-12);
        }
        assert!(compounded_rate(0.5, 3).is_nan());
        let recs = compounded(&[ThresholdRecord::new(9, 0.002, 9, 1000, 300, 0)]);
        assert!(recs[0].rate_per_round > 300.0 / 9000.0);
        assert!(recs[0].ci_low <= recs[0].rate_per_round && recs[0].rate_per_round <= recs[0].ci_high);
    }

    #[test]
    fn wilson_brackets_estimate() {
        for (k, n) in [(0, 10), (3, 10), (10, 10), (500, 100000)] {
            let (lo, hi) = wilson_interval(k, n, 1.96);
            let p = k as f64 / n as f64;
            assert!(lo <= p && p <= hi && lo >= 0.0 && hi <= 1.0);
        }
        let r = ThresholdRecord::new(5, 0.001, 5, 1000, 7, 0);
        assert!(r.ci_low <= r.rate_per_round && r.rate_per_round <= r.ci_high);
    }

    #[test]
    fn csv_roundtrip_and_header() {
        let recs = synthetic(0.008, &[0.004, 0.008]);
        let mut buf = Vec::new();
        write_csv(&mut buf, &recs).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(read_csv(&buf[..]).unwrap(), recs);
    }

    #[test]
    fn config_validation() {
        let mut c = SweepConfig::default();
        assert!(c.validate().is_ok());
        c.d_list = vec![7];
        assert!(c.validate().is_err());
        let c = SweepConfig { eps_list: vec![0.05], ..Default::default() };
        assert!(c.validate().is_err());
        let c = SweepConfig { shots: 0, ..Default::default() };
        assert!(c.validate().is_err());
        let c = SweepConfig::from_json(r#"{"d_list":[5],"eps_list":[0.001],"rounds":{"fixed":3},"weighting":"unit"}"#).unwrap();
        assert_eq!(c.rounds, RoundsPolicy::Fixed(3));
        assert_eq!(c.weighting, Weighting::Unit);
        assert_eq!(c.shots, 10_000);
    }

    #[test]
    fn noiseless_sweep_has_no_failures_and_is_deterministic() {
        let c = SweepConfig { d_list: vec![5], eps_list: vec![0.0, 0.002], shots: 200, seed: 9, ..Default::default() };
        let a = run_threshold(&c).unwrap();
        assert_eq!(a[0].failures, 0);
        assert_eq!(a, run_threshold(&c).unwrap());
    }
}
