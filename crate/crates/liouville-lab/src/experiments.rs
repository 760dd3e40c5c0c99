//! Scripted end-to-end reproductions: the single-bubble quantization sweep,
//! multi-bubble superpositions with interaction and neck bookkeeping, the
//! interaction-decay sweep, and the rigged coefficient family.
//!
//! Every experiment returns an [`ExperimentReport`] whose rows carry
//! (value, target, tolerance, pass); pass is recomputable from the stored
//! numbers alone through [`row_pass`].

use std::f64::consts::PI;

use crate::analysis::{interaction_mass_of_density, region_mass, Coefficient};
use crate::closed_form::{
    amplitude, bubble_nonlocal, lambda_of, rigged_family, BubbleParams, ClosedFormField,
};
use crate::error::{Error, Result};
use crate::grid::{integrate, make_grid, Grid2D, Point, PowerTail, RegionMask, ScalarField};
use crate::potential::{log_potential, riesz_direct, riesz_fft, riesz_tail_profile, RieszConfig};
use crate::quadrature::gauss_legendre;

/// Grid half-width and resolution for an experiment.
#[derive(Debug, Clone, Copy)]
pub struct GridSpec {
    pub half_width: f64,
    pub n: usize,
}

/// One measured quantity of an experiment.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ReportRow {
    pub experiment: String,
    pub param_name: String,
    pub param_value: f64,
    pub quantity: String,
    pub value: f64,
    pub target: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// Pass rule keyed on the quantity name. Most quantities are two-sided
/// (|value - target| <= tolerance); named exceptions are one-sided bounds.
pub fn row_pass(quantity: &str, value: f64, target: f64, tolerance: f64) -> bool {
    if value.is_nan() || target.is_nan() || tolerance.is_nan() {
        return false;
    }
    // lower bounds: value >= target - tolerance
    const LOWER: &[&str] = &["vk_min", "driving_slack", "fit_quality"];
    // upper bounds: value <= target + tolerance
    const UPPER: &[&str] = &[
        "vk_max",
        "bm_lhs",
        "interaction_exponent",
        "interaction_mass",
        "neck_mass",
        "closure_gap",
        "oracle_dev",
        "transform_dev",
        "selection_failures",
        "phi_stddev",
        "gamma_dev",
        "residual_ratio",
    ];
    if LOWER.contains(&quantity) {
        value >= target - tolerance
    } else if UPPER.contains(&quantity) {
        value <= target + tolerance
    } else {
        (value - target).abs() <= tolerance
    }
}

/// Self-contained experiment output; pass/fail is derivable from the rows.
#[derive(Debug, Clone)]
pub struct ExperimentReport {
    pub id: String,
    pub rows: Vec<ReportRow>,
    pub notes: Vec<String>,
}

impl ExperimentReport {
    pub fn new(id: impl Into<String>) -> Self {
        ExperimentReport {
            id: id.into(),
            rows: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn push(
        &mut self,
        param_name: &str,
        param_value: f64,
        quantity: &str,
        value: f64,
        target: f64,
        tolerance: f64,
    ) {
        self.rows.push(ReportRow {
            experiment: self.id.clone(),
            param_name: param_name.into(),
            param_value,
            quantity: quantity.into(),
            value,
            target,
            tolerance,
            pass: row_pass(quantity, value, target, tolerance),
        });
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn has_nan(&self) -> bool {
        self.rows
            .iter()
            .any(|r| r.value.is_nan() || r.target.is_nan() || r.tolerance.is_nan())
    }

    pub fn merge(&mut self, other: ExperimentReport) {
        self.rows.extend(other.rows);
        self.notes.extend(other.notes);
    }
}

/// Least-squares exponent of the power law y ~ C x^s on log-log axes,
/// together with the coefficient of determination of the fit.
pub fn fit_power_law(xs: &[f64], ys: &[f64]) -> Result<(f64, f64)> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::InvalidParameter(
            "power-law fit needs at least 3 matched samples".into(),
        ));
    }
    if xs.iter().chain(ys.iter()).any(|&v| !(v > 0.0)) {
        return Err(Error::InvalidParameter(
            "power-law fit needs positive data".into(),
        ));
    }
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = lx
        .iter()
        .zip(ly.iter())
        .map(|(x, y)| (x - mx) * (y - my))
        .sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter(
            "power-law fit needs distinct abscissae".into(),
        ));
    }
    let slope = sxy / sxx;
    let ss_tot: f64 = ly.iter().map(|y| (y - my) * (y - my)).sum();
    let ss_res: f64 = lx
        .iter()
        .zip(ly.iter())
        .map(|(x, y)| {
            let fit = my + slope * (x - mx);
            (y - fit) * (y - fit)
        })
        .sum();
    let quality = if ss_tot <= 1e-30 {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok((slope, quality))
}

/// Integral of a radial profile g(|x|) over a ball whose center sits at
/// distance `center_dist` from the origin, via arc-length slices
/// 2 theta(r) r g(r) dr. An independent 1-D route used as an oracle for the
/// grid quadrature.
pub fn radial_integral_over_offset_ball(g: impl Fn(f64) -> f64, center_dist: f64, rho: f64) -> f64 {
    if center_dist <= rho {
        // ball contains the origin: full-circle core plus the outer shell
        let core = {
            let (xs, ws) = gauss_legendre(256);
            let b = rho - center_dist;
            let mut acc = 0.0;
            for (x, w) in xs.iter().zip(ws.iter()) {
                let r = 0.5 * b * (x + 1.0);
                acc += w * 2.0 * PI * r * g(r);
            }
            acc * 0.5 * b
        };
        if center_dist == 0.0 {
            return core;
        }
        return core + arc_integral(&g, center_dist, rho, rho - center_dist, rho + center_dist);
    }
    arc_integral(&g, center_dist, rho, center_dist - rho, center_dist + rho)
}

fn arc_integral(g: &impl Fn(f64) -> f64, c: f64, rho: f64, lo: f64, hi: f64) -> f64 {
    let (xs, ws) = gauss_legendre(256);
    let mut acc = 0.0;
    for (x, w) in xs.iter().zip(ws.iter()) {
        let r = 0.5 * (hi - lo) * x + 0.5 * (hi + lo);
        let cosv = ((r * r + c * c - rho * rho) / (2.0 * r * c)).clamp(-1.0, 1.0);
        acc += w * 2.0 * cosv.acos() * r * g(r);
    }
    acc * 0.5 * (hi - lo)
}

fn eight_pi() -> f64 {
    8.0 * PI
}

/// Density e^{lambda u} of the superposition u = log(sum_i e^{u_i}) of
/// bubbles, sampled stably; e^u is exactly the sum of the bubble densities,
/// so ball masses decompose additively.
pub fn superposition_density(
    grid: &Grid2D,
    mu: f64,
    centers: &[Point],
    deltas: &[f64],
) -> Result<ScalarField> {
    if centers.is_empty() || centers.len() != deltas.len() {
        return Err(Error::InvalidParameter(
            "superposition needs matching nonempty centers and deltas".into(),
        ));
    }
    let lambda = lambda_of(mu);
    let bubbles: Vec<ClosedFormField> = centers
        .iter()
        .zip(deltas.iter())
        .map(|(&c, &d)| Ok(bubble_nonlocal(BubbleParams::new(mu, c, d)?)))
        .collect::<Result<_>>()?;
    ScalarField::from_fn(grid, |p| {
        let vals: Vec<f64> = bubbles.iter().map(|b| b.eval(p)).collect();
        let m = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = vals.iter().map(|v| (v - m).exp()).sum();
        (lambda * (m + sum.ln())).exp()
    })
}

/// Single-bubble mass quantization sweep: for each concentration scale the
/// mass over B_R is measured with the source restricted to the ball and with
/// the source extended to the plane via the analytic tail, then the limit is
/// extrapolated in 1/delta^2 and compared against 8 pi within 3%.
pub fn run_quantization(
    mu: f64,
    deltas: &[f64],
    r_ball: f64,
    spec: &GridSpec,
) -> Result<ExperimentReport> {
    if deltas.is_empty() {
        return Err(Error::InvalidParameter("empty concentration sweep".into()));
    }
    if deltas.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "concentration sweep must be increasing".into(),
        ));
    }
    if deltas[0] < 4.0 {
        return Err(Error::InvalidParameter(
            "concentration scales must be >= 4".into(),
        ));
    }
    if !(r_ball > 0.0 && r_ball <= spec.half_width) {
        return Err(Error::InvalidParameter(
            "measuring ball must fit inside the grid".into(),
        ));
    }
    let grid = make_grid(Point::ORIGIN, spec.half_width, spec.n)?;
    let h = grid.spacing();
    let delta_max = *deltas.last().unwrap();
    if h > 1.0 / (4.0 * delta_max) {
        return Err(Error::Config(format!(
            "grid too coarse for the sharpest bubble: h = {h:.5} > 1/(4 delta_max) = {:.5}; \
             raise n to at least {} or drop delta_max",
            1.0 / (4.0 * delta_max),
            (8.0 * spec.half_width * delta_max).ceil() as usize
        )));
    }

    let mut report = ExperimentReport::new("quantization");
    let target_disk = RegionMask::disk(&grid, Point::ORIGIN, r_ball)?;
    let src_plane = grid.inscribed_disk_mask();
    let v = Coefficient::Const(1.0);
    let mut plane_masses = Vec::new();
    for &delta in deltas {
        let u = bubble_nonlocal(BubbleParams::new(mu, Point::ORIGIN, delta)?);
        let m_plane = region_mass(&u, &v, &src_plane, &target_disk, mu, true)?;
        let m_ball = region_mass(&u, &v, &target_disk, &target_disk, mu, false)?;
        plane_masses.push(m_plane);
        // both rows target the quantized limit 8 pi; the tolerance carries
        // the a-priori finite-scale allowance (the mass missing outside B_R
        // is 8 pi / (1 + (delta R)^2) exactly, and the ball-sourced variant
        // additionally misses the density tail) plus a 1% quadrature budget
        let dr2 = (delta * r_ball) * (delta * r_ball);
        let truncation = 1.0 / (1.0 + dr2);
        report.push(
            "delta",
            delta,
            "mass_BR",
            m_plane,
            eight_pi(),
            (truncation + 0.01) * eight_pi(),
        );
        report.push(
            "delta",
            delta,
            "mass_BR_src_ball",
            m_ball,
            eight_pi(),
            (truncation + 2.0 / dr2 + 0.01) * eight_pi(),
        );
    }

    // mass flows into B_R monotonically as concentration sharpens (0.5% jitter)
    let jitter = 0.005 * eight_pi();
    let monotone = plane_masses.windows(2).all(|w| w[1] >= w[0] - jitter);
    report.push(
        "delta",
        delta_max,
        "mass_monotone",
        monotone as u8 as f64,
        1.0,
        0.0,
    );

    if deltas.len() >= 2 {
        let m1 = plane_masses[plane_masses.len() - 2];
        let m2 = plane_masses[plane_masses.len() - 1];
        let x1 = deltas[deltas.len() - 2].powi(-2);
        let x2 = deltas[deltas.len() - 1].powi(-2);
        let extrapolated = m2 + (m2 - m1) * x2 / (x1 - x2);
        report.push(
            "delta",
            delta_max,
            "mass_extrapolated",
            extrapolated,
            eight_pi(),
            0.03 * eight_pi(),
        );
    } else {
        report
            .notes
            .push("single-point sweep: no extrapolation, result inconclusive".into());
    }
    Ok(report)
}

/// Multi-bubble superposition: per-bubble ball masses, pairwise interaction
/// masses, neck (complement) mass, and the total over B_R, all from one
/// quadrature so the bookkeeping closes exactly.
pub fn run_multibubble(
    mu: f64,
    centers: &[Point],
    deltas: &[f64],
    r_big: f64,
    spec: &GridSpec,
) -> Result<ExperimentReport> {
    if centers.is_empty() || centers.len() != deltas.len() {
        return Err(Error::InvalidParameter(
            "need matching nonempty centers and deltas".into(),
        ));
    }
    for (i, c) in centers.iter().enumerate() {
        if c.norm() > r_big / 2.0 {
            return Err(Error::InvalidParameter(format!(
                "bubble center {i} lies outside B_(R/2)"
            )));
        }
        for c2 in &centers[i + 1..] {
            if c.dist(*c2) == 0.0 {
                return Err(Error::InvalidParameter(
                    "bubble centers must be distinct".into(),
                ));
            }
        }
    }
    if !(r_big > 0.0 && r_big <= spec.half_width) {
        return Err(Error::InvalidParameter(
            "B_R must fit inside the grid".into(),
        ));
    }
    let grid = make_grid(Point::ORIGIN, spec.half_width, spec.n)?;
    let h = grid.spacing();
    let delta_max = deltas.iter().cloned().fold(0.0, f64::max);
    if h > 1.0 / (4.0 * delta_max) {
        return Err(Error::Config(format!(
            "grid too coarse for the sharpest bubble: h = {h:.5}; raise n to {}",
            (8.0 * spec.half_width * delta_max).ceil() as usize
        )));
    }

    // per-bubble measuring balls at a fixed fraction of the minimum separation
    let min_sep = if centers.len() == 1 {
        r_big
    } else {
        let mut m = f64::INFINITY;
        for (i, c) in centers.iter().enumerate() {
            for c2 in &centers[i + 1..] {
                m = m.min(c.dist(*c2));
            }
        }
        m
    };
    let mut r_bubble = 0.42 * min_sep;
    for c in centers {
        r_bubble = r_bubble.min(0.9 * (r_big - c.norm()));
    }
    for &d in deltas {
        if r_bubble * d < 4.0 {
            return Err(Error::InvalidParameter(format!(
                "bubble balls overlap or are too small at these scales: r = {r_bubble:.4}, delta = {d}"
            )));
        }
    }

    let density = superposition_density(&grid, mu, centers, deltas)?;
    let cfg = RieszConfig::new(mu)?;
    let big = RegionMask::disk(&grid, Point::ORIGIN, r_big)?;
    let balls: Vec<RegionMask> = centers
        .iter()
        .map(|&c| RegionMask::disk(&grid, c, r_bubble))
        .collect::<Result<_>>()?;
    for (i, b) in balls.iter().enumerate() {
        for b2 in &balls[i + 1..] {
            if !b.disjoint_from(b2) {
                return Err(Error::InvalidParameter(
                    "bubble balls overlap at the given scales".into(),
                ));
            }
        }
    }

    // one masked convolution per region; by linearity the neck field is the
    // difference, so every bookkeeping entry shares the same kernel weights
    let pot_big = riesz_fft(&density.masked(&big)?, &cfg)?;
    let pot_balls: Vec<ScalarField> = balls
        .iter()
        .map(|b| riesz_fft(&density.masked(b)?, &cfg))
        .collect::<Result<_>>()?;
    let mut pot_neck = pot_big.clone();
    for pb in &pot_balls {
        pot_neck = pot_neck.zip_with(pb, |a, b| a - b)?;
    }
    let neck_mask = {
        let mut m = big.clone();
        for b in &balls {
            m = m.subtract(b)?;
        }
        m
    };

    let mass_of = |pot: &ScalarField, target: &RegionMask| -> Result<f64> {
        let integrand = pot.zip_with(&density, |a, b| a * b)?;
        integrate(&integrand, target, None)
    };

    let mut report = ExperimentReport::new("multibubble");
    let n_bubbles = centers.len();
    let mut component_sum = 0.0;
    for (i, ball) in balls.iter().enumerate() {
        let self_mass = mass_of(&pot_balls[i], ball)?;
        component_sum += self_mass;
        report.push(
            "center_index",
            i as f64,
            "bubble_mass",
            self_mass,
            eight_pi(),
            0.05 * eight_pi(),
        );
    }
    for i in 0..n_bubbles {
        for j in 0..n_bubbles {
            if i == j {
                continue;
            }
            let inter = mass_of(&pot_balls[j], &balls[i])?;
            component_sum += inter;
            let d = centers[i].dist(centers[j]);
            // declared decay: the close-range interaction bound C (r/d)^{mu/2}
            let declared = eight_pi() * (r_bubble / d).powf(mu / 2.0);
            report.push("separation", d, "interaction_mass", inter, 0.0, declared);
        }
    }
    // everything touching the neck region
    let neck_mass = {
        let from_neck = mass_of(&pot_big, &neck_mask)?;
        let mut into_neck = 0.0;
        for b in &balls {
            into_neck += mass_of(&pot_neck, b)?;
        }
        from_neck + into_neck
    };
    component_sum += neck_mass;
    let total = mass_of(&pot_big, &big)?;
    report.push(
        "n_bubbles",
        n_bubbles as f64,
        "neck_mass",
        neck_mass,
        0.0,
        0.05 * eight_pi() * n_bubbles as f64,
    );
    report.push(
        "n_bubbles",
        n_bubbles as f64,
        "total_mass",
        total,
        eight_pi() * n_bubbles as f64,
        0.05 * eight_pi() * n_bubbles as f64,
    );
    report.push(
        "n_bubbles",
        n_bubbles as f64,
        "closure_gap",
        (total - component_sum).abs(),
        0.0,
        0.01 * total.abs().max(1e-12),
    );
    Ok(report)
}

/// Pairwise interaction mass against bubble separation, with the fitted
/// decay exponent checked one-sidedly against the close-range bound
/// exponent mu/2: the measured interaction must decay at least that fast.
/// (The bound is an upper envelope; the superposition's actual decay is the
/// steeper kernel rate, exponent mu.)
pub fn run_interaction_decay(
    mu: f64,
    delta: f64,
    r_ball: f64,
    separations: &[f64],
    n: usize,
) -> Result<ExperimentReport> {
    if separations.len() < 3 {
        return Err(Error::InvalidParameter(
            "decay sweep needs >= 3 separations".into(),
        ));
    }
    if separations.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter(
            "separations must be increasing".into(),
        ));
    }
    if !(r_ball > 0.0) || 2.0 * r_ball >= separations[0] {
        return Err(Error::InvalidParameter(
            "measuring balls must be disjoint at the smallest separation".into(),
        ));
    }
    let mut report = ExperimentReport::new("multibubble");
    let mut masses = Vec::new();
    for &d in separations {
        let half_width = d / 2.0 + (2.0 * r_ball).max(1.0);
        let grid = make_grid(Point::ORIGIN, half_width, n)?;
        let c1 = Point::new(-d / 2.0, 0.0);
        let c2 = Point::new(d / 2.0, 0.0);
        let density = superposition_density(&grid, mu, &[c1, c2], &[delta, delta])?;
        let b1 = RegionMask::disk(&grid, c1, r_ball)?;
        let b2 = RegionMask::disk(&grid, c2, r_ball)?;
        let m = interaction_mass_of_density(&density, &Coefficient::Const(1.0), &b2, &b1, mu)?;
        masses.push(m);
        let declared = eight_pi() * (r_ball / d).powf(mu / 2.0);
        report.push("separation", d, "interaction_mass", m, 0.0, declared);
    }
    let (slope, quality) = fit_power_law(separations, &masses)?;
    // one-sided: decay at least as fast as the bound's exponent, 20% slack
    report.push(
        "separation",
        *separations.last().unwrap(),
        "interaction_exponent",
        slope,
        -mu / 2.0,
        0.2 * (mu / 2.0),
    );
    report.push(
        "separation",
        *separations.last().unwrap(),
        "fit_quality",
        quality,
        1.0,
        0.1,
    );
    Ok(report)
}

/// The rigged coefficient family: probes the coefficient ratio
/// V_k = I_mu[e^{lambda u_k}] / I_mu[e^{lambda u_k} chi_B2] on B_{7/4},
/// the k^-2 decay of the driving field's mass on an off-center ball, and
/// the constancy u_k - (log potential of F_k) = 2 log A - 2 log k.
pub fn run_rigged(mu: f64, ks: &[u32], spec: &GridSpec) -> Result<ExperimentReport> {
    if ks.len() < 2 {
        return Err(Error::InvalidParameter(
            "rigged sweep needs at least two k values".into(),
        ));
    }
    if ks.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("k sweep must be increasing".into()));
    }
    if ks[0] < 2 {
        return Err(Error::InvalidParameter("rigged sweep needs k >= 2".into()));
    }
    if spec.half_width < 2.0 {
        return Err(Error::Config(
            "rigged experiment needs the grid to cover the source disk of radius 2".into(),
        ));
    }
    let grid = make_grid(Point::ORIGIN, spec.half_width, spec.n)?;
    let lambda = lambda_of(mu);
    let cfg = RieszConfig::new(mu)?;
    let e1 = Point::new(1.0, 0.0);
    let b2_mask = RegionMask::disk(&grid, Point::ORIGIN, 2.0)?;
    let full_mask = grid.inscribed_disk_mask();
    let small_ball = RegionMask::disk(&grid, e1, 0.75)?;
    let half_ball = RegionMask::disk(&grid, e1, 0.5)?;

    // probe lattice over B_{7/4}
    let probes: Vec<Point> = {
        let mut v = Vec::new();
        for a in 0..17 {
            for b in 0..17 {
                let p = Point::new(-1.75 + 3.5 * a as f64 / 16.0, -1.75 + 3.5 * b as f64 / 16.0);
                if p.norm() <= 1.75 {
                    v.push(p);
                }
            }
        }
        v
    };

    let mut report = ExperimentReport::new("rigged");
    let amp = amplitude(mu);
    let mut l1_norms = Vec::new();
    for &k in ks {
        let (u_k, f_k, _) = rigged_family(k, mu)?;
        let kf = k as f64;

        // coefficient probes: the numerator carries the density's analytic tail
        let density = u_k.sample_exp(lambda, &grid)?;
        let tail_spec = u_k
            .exp_lambda_tail(lambda)
            .expect("rigged profile has a tail");
        let tail = PowerTail {
            center: tail_spec.center,
            coefficient: tail_spec.coefficient,
            exponent: tail_spec.exponent,
            start_radius: grid.half_width(),
        };
        let profile = riesz_tail_profile(&tail, mu, 1.76)?;
        let num = riesz_direct(&density, &full_mask, &cfg, &probes)?;
        let den = riesz_direct(&density, &b2_mask, &cfg, &probes)?;
        let mut vmin = f64::INFINITY;
        let mut vmax = f64::NEG_INFINITY;
        for ((p, n_c), d) in probes.iter().zip(num.iter()).zip(den.iter()) {
            let v = (n_c + profile.eval(p.norm())) / d;
            vmin = vmin.min(v);
            vmax = vmax.max(v);
        }
        report.push("k", kf, "vk_min", vmin, 1.0, 1e-3);
        // the uniform bound; the constant itself is a recorded baseline
        report.push("k", kf, "vk_max", vmax, 3.0, 0.0);

        // mass of the driving field on the off-center ball, vs the 1-D oracle
        let f_sampled = f_k.sample(&grid)?;
        let l1 = integrate(&f_sampled, &small_ball, None)?;
        let oracle = radial_integral_over_offset_ball(
            |r| {
                let den = 1.0 + kf * kf * r * r;
                8.0 * kf * kf / (den * den)
            },
            1.0,
            0.75,
        );
        l1_norms.push(l1);
        report.push("k", kf, "fk_l1", l1, oracle, 0.02 * oracle);

        // constancy of u_k minus the log potential of F_k
        let f_tail_spec = f_k.field_tail().expect("driving field has a tail");
        let f_tail = PowerTail {
            center: f_tail_spec.center,
            coefficient: f_tail_spec.coefficient,
            exponent: f_tail_spec.exponent,
            start_radius: grid.half_width(),
        };
        let gamma = log_potential(&f_sampled, &full_mask, Some(&f_tail))?;
        let u_sampled = u_k.sample(&grid)?;
        let phi = u_sampled.zip_with(&gamma, |a, b| a - b)?;
        let (mean, std) = phi.mean_std_over(&half_ball)?;
        let target_const = 2.0 * amp.ln() - 2.0 * kf.ln();
        report.push(
            "k",
            kf,
            "phi_mean",
            mean,
            target_const,
            0.02 * target_const.abs(),
        );
        report.push("k", kf, "phi_stddev", std, 0.0, 1e-2);

        // cross-check the numeric potential against its closed form
        let mut gamma_dev: f64 = 0.0;
        for (i, j) in half_ball.covered_cells() {
            let r2 = {
                let p = grid.node(i, j);
                p.x * p.x + p.y * p.y
            };
            let cf = 4.0 * kf.ln() - 2.0 * (1.0 + kf * kf * r2).ln();
            gamma_dev = gamma_dev.max((gamma.at(i, j) - cf).abs());
        }
        report.push("k", kf, "gamma_dev", gamma_dev, 0.0, 0.01);
    }

    // decay exponent of the driving field's off-center mass: the raw
    // least-squares slope is pre-asymptotic at small k (the power law only
    // sets in once k^2 r^2 >> 1 at the ball's inner rim), so the criterion
    // quantity is the segment slope extrapolated in 1/k^2
    let xs: Vec<f64> = ks.iter().map(|&k| k as f64).collect();
    let (raw_slope, quality) = fit_power_law(&xs, &l1_norms)?;
    report.push(
        "k",
        *xs.last().unwrap(),
        "fk_l1_slope_raw",
        raw_slope,
        -2.0,
        0.6,
    );
    report.push("k", *xs.last().unwrap(), "fit_quality", quality, 1.0, 0.1);
    let m = l1_norms.len();
    let seg = |i: usize| (l1_norms[i + 1] / l1_norms[i]).ln() / (xs[i + 1] / xs[i]).ln();
    let extrapolated = if m >= 3 {
        let s_last = seg(m - 2);
        let s_prev = seg(m - 3);
        let ratio2 = (xs[m - 2] / xs[m - 3]).powi(2);
        s_last + (s_last - s_prev) / (ratio2 - 1.0)
    } else {
        seg(m - 2)
    };
    report.push(
        "k",
        *xs.last().unwrap(),
        "fk_l1_slope",
        extrapolated,
        -2.0,
        0.2,
    );
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn power_law_fit_examples() {
        let (s, q) = fit_power_law(&[1.0, 2.0, 4.0], &[1.0, 0.25, 0.0625]).unwrap();
        assert_relative_eq!(s, -2.0, epsilon = 1e-12);
        assert_relative_eq!(q, 1.0, epsilon = 1e-12);

        let (s, q) = fit_power_law(&[1.0, 2.0, 4.0], &[3.0, 3.0, 3.0]).unwrap();
        assert_eq!(s, 0.0);
        assert_eq!(q, 1.0);

        assert!(fit_power_law(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(fit_power_law(&[1.0, 2.0, 3.0], &[1.0, -2.0, 3.0]).is_err());
    }

    #[test]
    fn power_law_fit_with_noise() {
        let mut rng = StdRng::seed_from_u64(7);
        let xs: Vec<f64> = (1..=8).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs
            .iter()
            .map(|x| x.powf(-0.5) * (1.0 + 0.01 * rng.gen_range(-1.0..1.0)))
            .collect();
        let (s, _) = fit_power_law(&xs, &ys).unwrap();
        assert!((-0.6..=-0.4).contains(&s), "slope {s}");
    }

    #[test]
    fn offset_ball_integral_matches_area_and_centered_case() {
        // the arc angle has square-root ends, so the rule is ~1e-8 accurate
        let area = radial_integral_over_offset_ball(|_| 1.0, 1.0, 0.75);
        assert_relative_eq!(area, PI * 0.75 * 0.75, max_relative = 1e-6);
        // centered ball reduces to the plain polar integral
        let v = radial_integral_over_offset_ball(|r| (-r * r).exp(), 0.0, 2.0);
        assert_relative_eq!(v, PI * (1.0 - (-4.0f64).exp()), max_relative = 1e-9);
    }

    #[test]
    fn quantization_defaults_pass() {
        let spec = GridSpec {
            half_width: 1.0,
            n: 512,
        };
        let report = run_quantization(1.0, &[4.0, 8.0, 16.0, 32.0], 1.0, &spec).unwrap();
        assert!(
            report.passed(),
            "failing rows: {:?}",
            report.rows.iter().filter(|r| !r.pass).collect::<Vec<_>>()
        );
        let ext = report
            .rows
            .iter()
            .find(|r| r.quantity == "mass_extrapolated")
            .unwrap();
        assert!((ext.value - eight_pi()).abs() <= 0.03 * eight_pi());
    }

    #[test]
    fn quantization_limit_is_mu_independent() {
        let spec = GridSpec {
            half_width: 1.0,
            n: 256,
        };
        let report = run_quantization(0.5, &[4.0, 8.0, 16.0], 1.0, &spec).unwrap();
        let ext = report
            .rows
            .iter()
            .find(|r| r.quantity == "mass_extrapolated")
            .unwrap();
        assert!(
            (ext.value - eight_pi()).abs() <= 0.03 * eight_pi(),
            "{}",
            ext.value
        );
    }

    #[test]
    fn quantization_guards() {
        let spec = GridSpec {
            half_width: 1.0,
            n: 256,
        };
        // h = 2/256 > 1/(4*128)
        assert!(matches!(
            run_quantization(1.0, &[4.0, 128.0], 1.0, &spec),
            Err(Error::Config(_))
        ));
        assert!(run_quantization(1.0, &[8.0, 4.0], 1.0, &spec).is_err());
        assert!(run_quantization(1.0, &[2.0, 8.0], 1.0, &spec).is_err());
    }

    #[test]
    fn quantization_single_point_is_inconclusive() {
        let spec = GridSpec {
            half_width: 1.0,
            n: 256,
        };
        let report = run_quantization(1.0, &[8.0], 1.0, &spec).unwrap();
        assert!(report
            .rows
            .iter()
            .all(|r| r.quantity != "mass_extrapolated"));
        assert!(!report.notes.is_empty());
    }

    #[test]
    fn multibubble_two_bubbles_quantize_to_16pi() {
        let spec = GridSpec {
            half_width: 1.0,
            n: 512,
        };
        let centers = [Point::new(-0.45, 0.0), Point::new(0.45, 0.0)];
        let report = run_multibubble(1.0, &centers, &[64.0, 64.0], 1.0, &spec).unwrap();
        assert!(
            report.passed(),
            "failing rows: {:?}",
            report.rows.iter().filter(|r| !r.pass).collect::<Vec<_>>()
        );
        let total = report
            .rows
            .iter()
            .find(|r| r.quantity == "total_mass")
            .unwrap();
        assert!(
            (total.value - 16.0 * PI).abs() <= 0.05 * 16.0 * PI,
            "{}",
            total.value
        );
    }

    #[test]
    fn multibubble_single_center_matches_quantization() {
        let spec = GridSpec {
            half_width: 1.0,
            n: 512,
        };
        let report = run_multibubble(1.0, &[Point::ORIGIN], &[32.0], 1.0, &spec).unwrap();
        let total = report
            .rows
            .iter()
            .find(|r| r.quantity == "total_mass")
            .unwrap();
        let q = run_quantization(1.0, &[16.0, 32.0], 1.0, &spec).unwrap();
        let m = q
            .rows
            .iter()
            .find(|r| r.quantity == "mass_BR_src_ball" && r.param_value == 32.0)
            .unwrap();
        assert_relative_eq!(total.value, m.value, max_relative = 0.01);
    }

    #[test]
    fn multibubble_rejects_overlapping_balls() {
        let spec = GridSpec {
            half_width: 1.0,
            n: 256,
        };
        let centers = [Point::new(-0.02, 0.0), Point::new(0.02, 0.0)];
        assert!(run_multibubble(1.0, &centers, &[60.0, 60.0], 1.0, &spec).is_err());
    }

    #[test]
    fn interaction_decay_is_bound_consistent() {
        let report = run_interaction_decay(1.0, 40.0, 0.25, &[1.0, 2.0, 4.0, 8.0], 256).unwrap();
        assert!(
            report.passed(),
            "failing rows: {:?}",
            report.rows.iter().filter(|r| !r.pass).collect::<Vec<_>>()
        );
        let slope = report
            .rows
            .iter()
            .find(|r| r.quantity == "interaction_exponent")
            .unwrap();
        // the superposition decays at the kernel rate, exponent ~ mu
        assert!(
            (-1.2..=-0.8).contains(&slope.value),
            "slope {}",
            slope.value
        );
    }

    #[test]
    fn rigged_family_report_passes() {
        let spec = GridSpec {
            half_width: 2.5,
            n: 512,
        };
        let report = run_rigged(1.0, &[4, 8, 16, 32], &spec).unwrap();
        assert!(
            report.passed(),
            "failing rows: {:?}",
            report.rows.iter().filter(|r| !r.pass).collect::<Vec<_>>()
        );
        let slope = report
            .rows
            .iter()
            .find(|r| r.quantity == "fk_l1_slope")
            .unwrap();
        assert!((slope.value + 2.0).abs() <= 0.2, "slope {}", slope.value);
        let mean8 = report
            .rows
            .iter()
            .find(|r| r.quantity == "phi_mean" && r.param_value == 8.0)
            .unwrap();
        assert_relative_eq!(mean8.value, mean8.target, max_relative = 0.02);
    }

    #[test]
    fn rigged_guards() {
        let spec = GridSpec {
            half_width: 2.5,
            n: 128,
        };
        assert!(run_rigged(1.0, &[4], &spec).is_err());
        assert!(run_rigged(1.0, &[8, 4], &spec).is_err());
        assert!(run_rigged(1.0, &[1, 4], &spec).is_err());
        let narrow = GridSpec {
            half_width: 1.5,
            n: 128,
        };
        assert!(run_rigged(1.0, &[4, 8], &narrow).is_err());
    }

    #[test]
    fn report_pass_recomputable_from_rows() {
        let spec = GridSpec {
            half_width: 1.0,
            n: 256,
        };
        let report = run_quantization(1.0, &[4.0, 8.0, 16.0], 1.0, &spec).unwrap();
        for r in &report.rows {
            assert_eq!(
                r.pass,
                row_pass(&r.quantity, r.value, r.target, r.tolerance)
            );
        }
    }
}
