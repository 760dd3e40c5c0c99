//! Configuration, orchestration, and the `verify-core` battery.
//!
//! Exit-status contract of the binary: 0 when every declared tolerance
//! passes, 1 on a tolerance failure, 2 on a configuration error, 3 when a
//! NaN shows up in the numbers.

use std::f64::consts::PI;
use std::path::PathBuf;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

use crate::analysis::{brezis_merle_check, driving_estimate_check, entire_mass, select_bubble};
use crate::closed_form::{
    bubble_local, bubble_nonlocal, entire_density_mass, kelvin, lambda_of, rescale, BubbleParams,
};
use crate::error::{Error, Result};
use crate::experiments::{
    run_interaction_decay, run_multibubble, run_quantization, run_rigged, ExperimentReport,
    GridSpec,
};
use crate::grid::{integrate, make_grid, Point, PowerTail, RegionMask, ScalarField};
use crate::potential::{riesz_direct, riesz_fft, RieszConfig};
use crate::report::OutputFormat;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentId {
    Quantization,
    Multibubble,
    Rigged,
    VerifyCore,
}

impl std::str::FromStr for ExperimentId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "quantization" => Ok(ExperimentId::Quantization),
            "multibubble" => Ok(ExperimentId::Multibubble),
            "rigged" => Ok(ExperimentId::Rigged),
            "verify-core" => Ok(ExperimentId::VerifyCore),
            other => Err(Error::Config(format!(
                "unknown experiment '{other}' (expected quantization, multibubble, rigged, or verify-core)"
            ))),
        }
    }
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub experiment: ExperimentId,
    pub mu: f64,
    pub n: usize,
    pub half_width: f64,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
    pub seed: u64,
    pub deltas: Vec<f64>,
    pub ks: Vec<u32>,
    pub centers: Vec<Point>,
    pub separations: Vec<f64>,
    pub r_ball: f64,
    /// self-test hooks
    pub inject_kernel_fault: bool,
    pub inject_nan: bool,
}

impl RunConfig {
    /// Per-experiment defaults at desk-scale resolutions.
    pub fn defaults(experiment: ExperimentId) -> Self {
        let (n, half_width) = match experiment {
            ExperimentId::Quantization => (512, 1.0),
            ExperimentId::Multibubble => (512, 1.0),
            ExperimentId::Rigged => (512, 2.5),
            ExperimentId::VerifyCore => (256, 1.0),
        };
        RunConfig {
            experiment,
            mu: 1.0,
            n,
            half_width,
            out: None,
            format: OutputFormat::Csv,
            seed: 7,
            deltas: match experiment {
                ExperimentId::Multibubble => vec![64.0, 64.0],
                _ => vec![4.0, 8.0, 16.0, 32.0],
            },
            ks: vec![4, 8, 16, 32],
            centers: vec![Point::new(-0.45, 0.0), Point::new(0.45, 0.0)],
            separations: vec![1.0, 2.0, 4.0, 8.0],
            r_ball: 1.0,
            inject_kernel_fault: false,
            inject_nan: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu > 0.0 && self.mu < 2.0) {
            return Err(Error::Config(format!(
                "mu must lie in (0, 2), got {}",
                self.mu
            )));
        }
        if !self.n.is_power_of_two() || !(64..=2048).contains(&self.n) {
            return Err(Error::Config(format!(
                "n must be a power of two between 64 and 2048, got {}",
                self.n
            )));
        }
        if !(self.half_width > 0.0) {
            return Err(Error::Config("half-width must be positive".into()));
        }
        Ok(())
    }
}

/// Parse a comma-separated list of reals.
pub fn parse_f64_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad number '{t}': {e}")))
        })
        .collect()
}

/// Parse a comma-separated list of positive integers.
pub fn parse_u32_list(s: &str) -> Result<Vec<u32>> {
    s.split(',')
        .map(|t| {
            t.trim()
                .parse::<u32>()
                .map_err(|e| Error::Config(format!("bad integer '{t}': {e}")))
        })
        .collect()
}

/// Parse semicolon-separated points, each "x,y".
pub fn parse_centers(s: &str) -> Result<Vec<Point>> {
    s.split(';')
        .map(|pair| {
            let parts: Vec<&str> = pair.split(',').map(str::trim).collect();
            if parts.len() != 2 {
                return Err(Error::Config(format!("bad center '{pair}', expected x,y")));
            }
            let x = parts[0]
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad coordinate '{}': {e}", parts[0])))?;
            let y = parts[1]
                .parse::<f64>()
                .map_err(|e| Error::Config(format!("bad coordinate '{}': {e}", parts[1])))?;
            Ok(Point::new(x, y))
        })
        .collect()
}

/// Apply one key=value setting (the config-file and C-API vocabulary).
pub fn apply_key_value(config: &mut RunConfig, key: &str, value: &str) -> Result<()> {
    match key {
        "experiment" => config.experiment = value.parse()?,
        "mu" => {
            config.mu = value
                .parse()
                .map_err(|e| Error::Config(format!("bad mu: {e}")))?
        }
        "n" => {
            config.n = value
                .parse()
                .map_err(|e| Error::Config(format!("bad n: {e}")))?
        }
        "half-width" => {
            config.half_width = value
                .parse()
                .map_err(|e| Error::Config(format!("bad half-width: {e}")))?
        }
        "seed" => {
            config.seed = value
                .parse()
                .map_err(|e| Error::Config(format!("bad seed: {e}")))?
        }
        "format" => config.format = value.parse()?,
        "deltas" => config.deltas = parse_f64_list(value)?,
        "ks" => config.ks = parse_u32_list(value)?,
        "centers" => config.centers = parse_centers(value)?,
        "separations" => config.separations = parse_f64_list(value)?,
        "r-ball" => {
            config.r_ball = value
                .parse()
                .map_err(|e| Error::Config(format!("bad r-ball: {e}")))?
        }
        "out" => config.out = Some(PathBuf::from(value)),
        "inject-kernel-fault" => config.inject_kernel_fault = value == "true",
        "inject-nan" => config.inject_nan = value == "true",
        other => return Err(Error::Config(format!("unknown config key '{other}'"))),
    }
    Ok(())
}

/// Build a configuration from flat key=value text ('#' comments allowed).
/// The `experiment` key is mandatory and is applied first so that later keys
/// override the experiment defaults.
pub fn config_from_text(text: &str) -> Result<RunConfig> {
    let mut entries = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Config(format!(
                "config line {} is not key=value: '{line}'",
                lineno + 1
            ))
        })?;
        entries.push((key.trim().to_string(), value.trim().to_string()));
    }
    let experiment: ExperimentId = entries
        .iter()
        .find(|(k, _)| k == "experiment")
        .ok_or_else(|| Error::Config("missing 'experiment' key".into()))?
        .1
        .parse()?;
    let mut config = RunConfig::defaults(experiment);
    for (key, value) in &entries {
        apply_key_value(&mut config, key, value)?;
    }
    Ok(config)
}

/// Run the configured experiment and return its report.
pub fn execute(config: &RunConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let spec = GridSpec {
        half_width: config.half_width,
        n: config.n,
    };
    let mut report = match config.experiment {
        ExperimentId::Quantization => run_quantization(
            config.mu,
            &config.deltas,
            config.r_ball.min(config.half_width),
            &spec,
        )?,
        ExperimentId::Multibubble => {
            let mut r = run_multibubble(
                config.mu,
                &config.centers,
                &config.deltas,
                config.r_ball.min(config.half_width),
                &spec,
            )?;
            // the separation sweep runs on its own per-distance grids
            let decay = run_interaction_decay(
                config.mu,
                40.0,
                0.25,
                &config.separations,
                (config.n / 2).max(64),
            )?;
            r.merge(decay);
            r
        }
        ExperimentId::Rigged => run_rigged(config.mu, &config.ks, &spec)?,
        ExperimentId::VerifyCore => verify_core(config)?,
    };
    if config.inject_nan {
        report.push("selftest", 0.0, "injected_nan", f64::NAN, 0.0, 1.0);
    }
    Ok(report)
}

/// The condensed verification battery: oracle equivalence, the closed-form
/// energies, transform identities, the selection inequalities on random
/// fields, the driving estimate, and the exponential-integrability bound.
pub fn verify_core(config: &RunConfig) -> Result<ExperimentReport> {
    let mut report = ExperimentReport::new("verify-core");
    let mu = config.mu;
    let lambda = lambda_of(mu);

    // oracle equivalence of the two Riesz routes on the disk indicator
    {
        let g = make_grid(Point::ORIGIN, 2.0, 128)?;
        let disk = RegionMask::disk(&g, Point::ORIGIN, 1.0)?;
        let density = ScalarField::constant(&g, 1.0);
        let mut cfg = RieszConfig::new(mu)?;
        if config.inject_kernel_fault {
            cfg.kernel_fault_scale = 1.1;
        }
        let fast = riesz_fft(&density.masked(&disk)?, &cfg)?;
        let n = g.n();
        let targets: Vec<(usize, usize)> = (1..n - 1)
            .flat_map(|i| (1..n - 1).map(move |j| (i, j)))
            .collect();
        let points: Vec<Point> = targets.iter().map(|&(i, j)| g.node(i, j)).collect();
        let oracle = riesz_direct(&density, &disk, &RieszConfig::new(mu)?, &points)?;
        let mut dev: f64 = 0.0;
        for (k, &(i, j)) in targets.iter().enumerate() {
            if oracle[k].abs() > 0.0 {
                dev = dev.max((fast.at(i, j) - oracle[k]).abs() / oracle[k].abs());
            }
        }
        report.push("n", 128.0, "oracle_dev", dev, 0.0, 1e-4);
    }

    // closed-form energies; the wide grid needs n = 1024 to keep the
    // midpoint deficit of the slowly decaying density below the 0.5% budget
    {
        let g = make_grid(Point::ORIGIN, 200.0, 1024)?;
        let u0 = bubble_local(Point::ORIGIN, 1.0)?;
        let density = u0.sample_exp(1.0, &g)?;
        let t = u0.exp_tail().unwrap();
        let tail = PowerTail {
            center: t.center,
            coefficient: t.coefficient,
            exponent: t.exponent,
            start_radius: 200.0,
        };
        let mass = integrate(&density, &g.inscribed_disk_mask(), Some(&tail))?;
        report.push(
            "half_width",
            200.0,
            "energy_local",
            mass,
            8.0 * PI,
            0.005 * 8.0 * PI,
        );
    }
    {
        let g = make_grid(Point::ORIGIN, 12.0, 512)?;
        let u = bubble_nonlocal(BubbleParams::new(mu, Point::ORIGIN, 1.0)?);
        let density = u.sample_exp(1.0, &g)?;
        let t = u.exp_tail().unwrap();
        let tail = PowerTail {
            center: t.center,
            coefficient: t.coefficient,
            exponent: t.exponent,
            start_radius: 12.0,
        };
        let target = entire_density_mass(mu);
        let mass = integrate(&density, &g.inscribed_disk_mask(), Some(&tail))?;
        report.push("mu", mu, "energy_density", mass, target, 0.01 * target);
        let nonlocal = entire_mass(&u, 1.0, mu, &g)?;
        report.push("mu", mu, "energy_mass", nonlocal, 8.0 * PI, 0.01 * 8.0 * PI);
    }

    // symmetry transforms: inversion involution, fixed profiles, group law
    {
        let mut rng = StdRng::seed_from_u64(config.seed);
        let u = bubble_nonlocal(BubbleParams::new(mu, Point::new(0.2, -0.3), 1.7)?);
        let x0 = Point::new(-0.4, 0.1);
        let twice = kelvin(&kelvin(&u, x0, 1.2)?, x0, 1.2)?;
        let fixed = kelvin(
            &bubble_nonlocal(BubbleParams::new(mu, Point::ORIGIN, 1.0)?),
            Point::ORIGIN,
            1.0,
        )?;
        let base = bubble_nonlocal(BubbleParams::new(mu, Point::ORIGIN, 1.0)?);
        let b6 = bubble_nonlocal(BubbleParams::new(mu, Point::ORIGIN, 6.0)?);
        let b2to6 = rescale(
            &bubble_nonlocal(BubbleParams::new(mu, Point::ORIGIN, 2.0)?),
            Point::ORIGIN,
            3.0,
        )?;
        let mut dev: f64 = 0.0;
        for _ in 0..20 {
            let p = Point::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));
            if p.dist(x0) > 1e-3 && p.norm() > 1e-3 {
                dev = dev.max((twice.eval(p) - u.eval(p)).abs());
                dev = dev.max((fixed.eval(p) - base.eval(p)).abs());
                dev = dev.max((b2to6.eval(p) - b6.eval(p)).abs());
            }
        }
        report.push("seed", config.seed as f64, "transform_dev", dev, 0.0, 1e-12);
    }

    // selection inequalities on seeded random positive fields
    {
        let g = make_grid(Point::ORIGIN, 2.0, 64)?;
        let mut rng = StdRng::seed_from_u64(config.seed ^ 0x5e1ec7);
        let mut failures = 0u32;
        for _ in 0..100 {
            let vals: Vec<f64> = (0..g.n() * g.n())
                .map(|_| rng.gen_range(0.05..3.0))
                .collect();
            let phi = ScalarField::from_values(&g, vals)?;
            let x_tilde = Point::new(rng.gen_range(-0.3..0.3), rng.gen_range(-0.3..0.3));
            if select_bubble(&phi, x_tilde, 1.0, 2.0).is_err() {
                failures += 1;
            }
        }
        report.push(
            "trials",
            100.0,
            "selection_failures",
            failures as f64,
            0.0,
            0.0,
        );
    }

    // driving estimate across scale ratios
    {
        let g = make_grid(Point::ORIGIN, 4.2, 256)?;
        let omega = RegionMask::disk(&g, Point::ORIGIN, 4.0)?;
        let mut min_slack = f64::INFINITY;
        for delta in [1.0, 4.0] {
            let u = bubble_nonlocal(BubbleParams::new(mu, Point::ORIGIN, delta)?);
            let f = ScalarField::from_fn(&g, |p| {
                let d = 1.0 + delta * delta * (p.x * p.x + p.y * p.y);
                8.0 * delta * delta / (d * d)
            })?;
            for ratio in [2.0, 4.0, 8.0, 16.0] {
                let rho: f64 = 2.0;
                let (lhs, rhs) =
                    driving_estimate_check(&u, &f, Point::ORIGIN, rho, rho / ratio, &omega)?;
                min_slack = min_slack.min(lhs - rhs);
            }
        }
        report.push("mu", mu, "driving_slack", min_slack, 0.0, 1e-6);
        let _ = lambda;
    }

    // exponential integrability: constant source and seeded random bumps
    {
        let g = make_grid(Point::ORIGIN, 1.0, 96)?;
        let disk = RegionMask::disk(&g, Point::ORIGIN, 1.0)?;
        let mut rng = StdRng::seed_from_u64(config.seed ^ 0xb4e215);
        let mut sources = vec![ScalarField::constant(&g, 1.0)];
        for _ in 0..3 {
            sources.push(random_bump_field(&g, &mut rng)?);
        }
        for (idx, f) in sources.iter().enumerate() {
            for delta in [2.0 * PI, PI] {
                let (lhs, bound) = brezis_merle_check(f, &disk, delta)?;
                report.push("source_index", idx as f64, "bm_lhs", lhs, bound, 0.0);
            }
        }
    }

    Ok(report)
}

/// Smooth nonnegative random field: a few Gaussian bumps plus a floor.
pub fn random_bump_field(grid: &crate::grid::Grid2D, rng: &mut StdRng) -> Result<ScalarField> {
    let bumps: Vec<(Point, f64, f64)> = (0..6)
        .map(|_| {
            (
                Point::new(rng.gen_range(-0.8..0.8), rng.gen_range(-0.8..0.8)),
                rng.gen_range(0.15..0.5),
                rng.gen_range(0.2..2.0),
            )
        })
        .collect();
    ScalarField::from_fn(grid, |p| {
        let mut v = 0.05;
        for &(c, sigma, amp) in &bumps {
            let d2 = (p.x - c.x) * (p.x - c.x) + (p.y - c.y) * (p.y - c.y);
            v += amp * (-d2 / (2.0 * sigma * sigma)).exp();
        }
        v
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::to_csv;

    #[test]
    fn config_validation() {
        let mut c = RunConfig::defaults(ExperimentId::Quantization);
        assert!(c.validate().is_ok());
        c.mu = 2.5;
        assert!(c.validate().is_err());
        c.mu = 1.0;
        c.n = 100;
        assert!(c.validate().is_err());
        c.n = 4096;
        assert!(c.validate().is_err());
    }

    #[test]
    fn experiment_ids_parse() {
        assert!("quantization".parse::<ExperimentId>().is_ok());
        assert!("verify-core".parse::<ExperimentId>().is_ok());
        assert!("unknown".parse::<ExperimentId>().is_err());
    }

    #[test]
    fn verify_core_passes_and_fault_injection_fails() {
        let mut config = RunConfig::defaults(ExperimentId::VerifyCore);
        config.seed = 11;
        let report = verify_core(&config).unwrap();
        assert!(
            report.passed(),
            "failing rows: {:?}",
            report.rows.iter().filter(|r| !r.pass).collect::<Vec<_>>()
        );
        config.inject_kernel_fault = true;
        let broken = verify_core(&config).unwrap();
        assert!(!broken.passed());
        let dev = broken
            .rows
            .iter()
            .find(|r| r.quantity == "oracle_dev")
            .unwrap();
        assert!(!dev.pass);
    }

    #[test]
    fn injected_nan_is_detected() {
        let mut config = RunConfig::defaults(ExperimentId::Quantization);
        config.n = 256;
        config.deltas = vec![4.0, 8.0];
        config.inject_nan = true;
        let report = execute(&config).unwrap();
        assert!(report.has_nan());
    }

    #[test]
    fn determinism_same_seed_same_bytes() {
        let mut config = RunConfig::defaults(ExperimentId::VerifyCore);
        config.seed = 3;
        let a = to_csv(&verify_core(&config).unwrap());
        let b = to_csv(&verify_core(&config).unwrap());
        assert_eq!(a, b);
    }
}
