//! Closed-form profiles and their symmetries: the local and nonlocal bubble
//! solutions, the rescaling and logarithmic Kelvin transforms, exponent
//! algebra, and the rigged coefficient family used as a counter-example.
//!
//! Fields are symbolic descriptors evaluated exactly at arbitrary points, so
//! residual and tail checks never pay interpolation error.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grid::{Grid2D, Point, ScalarField};

/// Maximum depth of composite transform chains.
const MAX_COMPOSITE_DEPTH: usize = 8;

/// Coupling exponent lambda = (4 - mu)/4 in (1/2, 1).
pub fn lambda_of(mu: f64) -> f64 {
    (4.0 - mu) / 4.0
}

/// The amplitude constant A(mu) = (4(2 - mu)/pi)^{1/(4 - mu)}.
pub fn amplitude(mu: f64) -> f64 {
    (4.0 * (2.0 - mu) / PI).powf(1.0 / (4.0 - mu))
}

/// e^{U(0)} for the entire profile, equal to A(mu)^2.
pub fn peak_density(mu: f64) -> f64 {
    amplitude(mu) * amplitude(mu)
}

/// Value of the entire-profile density integral over the plane,
/// (4(2 - mu))^{2/(4 - mu)} pi^{(2 - mu)/(4 - mu)}.
pub fn entire_density_mass(mu: f64) -> f64 {
    (4.0 * (2.0 - mu)).powf(2.0 / (4.0 - mu)) * PI.powf((2.0 - mu) / (4.0 - mu))
}

fn check_mu(mu: f64) -> Result<()> {
    if !(mu > 0.0 && mu < 2.0) {
        return Err(Error::InvalidParameter(format!(
            "mu must lie in (0, 2), got {mu}"
        )));
    }
    Ok(())
}

/// The exponent bookkeeping tying the kernel order mu, the coupling lambda,
/// the coefficient integrability p, and the density integrability q through
/// 1/q + 1/(2p) = lambda. `p` may be `f64::INFINITY`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentRelations {
    pub mu: f64,
    pub lambda: f64,
    pub p: f64,
    pub q: f64,
    pub p_conjugate: f64,
}

/// Resolve the admissible exponents for a given (mu, p) pair.
pub fn exponents(mu: f64, p: f64) -> Result<ExponentRelations> {
    check_mu(mu)?;
    if !(p > 2.0 / mu) {
        return Err(Error::InvalidParameter(format!(
            "p must exceed 2/mu = {}, got {p}",
            2.0 / mu
        )));
    }
    let lambda = lambda_of(mu);
    let q = if p.is_infinite() {
        1.0 / lambda
    } else {
        1.0 / (lambda - 1.0 / (2.0 * p))
    };
    let p_conjugate = if p.is_infinite() { 1.0 } else { p / (p - 1.0) };
    Ok(ExponentRelations {
        mu,
        lambda,
        p,
        q,
        p_conjugate,
    })
}

/// Center and concentration scale of a bubble profile.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BubbleParams {
    pub mu: f64,
    pub x0: Point,
    pub delta: f64,
}

impl BubbleParams {
    pub fn new(mu: f64, x0: Point, delta: f64) -> Result<Self> {
        check_mu(mu)?;
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "delta must be positive, got {delta}"
            )));
        }
        Ok(BubbleParams { mu, x0, delta })
    }
}

/// Far-field power law c * |x - center|^{-exponent}, together with what it
/// describes: the field itself or the exponential of the field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TailSpec {
    pub center: Point,
    pub coefficient: f64,
    pub exponent: f64,
    /// true when the power law describes e^{field} rather than the field
    pub of_exponential: bool,
}

/// Symbolic descriptor of an analytically known profile.
#[derive(Debug, Clone, PartialEq)]
pub enum ClosedFormField {
    /// U_0(delta (x - x0)) + 2 log delta with U_0(x) = log 8/(1+|x|^2)^2;
    /// solves -lap u = e^u with total density 8 pi.
    LocalBubble {
        x0: Point,
        delta: f64,
    },
    /// U(delta (x - x0)) + 2 log delta with
    /// U(x) = -2 log(1+|x|^2) + (2/(4-mu)) log(4(2-mu)/pi).
    NonlocalBubble(BubbleParams),
    /// u_k(x) = 2 log(A k / (1 + k^2 |x|^2)).
    RiggedU {
        k: u32,
        mu: f64,
    },
    /// F_k(x) = 8 k^2 / (1 + k^2 |x|^2)^2 = -lap u_k.
    RiggedF {
        k: u32,
    },
    /// c * |x - center|^exponent (exponent may be negative).
    RadialPower {
        center: Point,
        coefficient: f64,
        exponent: f64,
    },
    Constant(f64),
    /// x -> inner(delta (x - x0)) + 2 log delta
    Rescaled {
        inner: Box<ClosedFormField>,
        x0: Point,
        delta: f64,
    },
    /// x -> inner(x^{x0,sigma}) + 4 log(sigma / |x - x0|)
    KelvinTransformed {
        inner: Box<ClosedFormField>,
        x0: Point,
        sigma: f64,
    },
}

impl ClosedFormField {
    /// Evaluate at a point. Returns NaN where the expression is undefined
    /// (Kelvin transform at its center, negative-exponent power at its
    /// center); `sample` turns that into an error.
    pub fn eval(&self, p: Point) -> f64 {
        match self {
            ClosedFormField::LocalBubble { x0, delta } => {
                let r2 = scaled_r2(p, *x0, *delta);
                8.0_f64.ln() - 2.0 * r2.ln_1p() + 2.0 * delta.ln()
            }
            ClosedFormField::NonlocalBubble(b) => {
                let r2 = scaled_r2(p, b.x0, b.delta);
                -2.0 * r2.ln_1p()
                    + (2.0 / (4.0 - b.mu)) * (4.0 * (2.0 - b.mu) / PI).ln()
                    + 2.0 * b.delta.ln()
            }
            ClosedFormField::RiggedU { k, mu } => {
                let kf = *k as f64;
                let r2 = p.x * p.x + p.y * p.y;
                2.0 * (amplitude(*mu) * kf).ln() - 2.0 * (kf * kf * r2).ln_1p()
            }
            ClosedFormField::RiggedF { k } => {
                let kf = *k as f64;
                let d = 1.0 + kf * kf * (p.x * p.x + p.y * p.y);
                8.0 * kf * kf / (d * d)
            }
            ClosedFormField::RadialPower {
                center,
                coefficient,
                exponent,
            } => {
                let r = p.dist(*center);
                if r == 0.0 && *exponent < 0.0 {
                    f64::NAN
                } else {
                    coefficient * r.powf(*exponent)
                }
            }
            ClosedFormField::Constant(c) => *c,
            ClosedFormField::Rescaled { inner, x0, delta } => {
                let q = Point::new(delta * (p.x - x0.x), delta * (p.y - x0.y));
                inner.eval(q) + 2.0 * delta.ln()
            }
            ClosedFormField::KelvinTransformed { inner, x0, sigma } => {
                let dx = p.x - x0.x;
                let dy = p.y - x0.y;
                let d2 = dx * dx + dy * dy;
                if d2 == 0.0 {
                    return f64::NAN;
                }
                let s2 = sigma * sigma;
                let q = Point::new(x0.x + s2 * dx / d2, x0.y + s2 * dy / d2);
                inner.eval(q) + 4.0 * (sigma / d2.sqrt()).ln()
            }
        }
    }

    /// Depth of the transform chain.
    pub fn depth(&self) -> usize {
        match self {
            ClosedFormField::Rescaled { inner, .. }
            | ClosedFormField::KelvinTransformed { inner, .. } => 1 + inner.depth(),
            _ => 0,
        }
    }

    /// Far-field descriptor of e^{field}, when a power law is known.
    pub fn exp_tail(&self) -> Option<TailSpec> {
        match self {
            ClosedFormField::LocalBubble { x0, delta } => Some(TailSpec {
                center: *x0,
                coefficient: 8.0 / (delta * delta),
                exponent: 4.0,
                of_exponential: true,
            }),
            ClosedFormField::NonlocalBubble(b) => Some(TailSpec {
                center: b.x0,
                coefficient: peak_density(b.mu) / (b.delta * b.delta),
                exponent: 4.0,
                of_exponential: true,
            }),
            ClosedFormField::RiggedU { k, mu } => Some(TailSpec {
                center: Point::ORIGIN,
                coefficient: peak_density(*mu) / (*k as f64 * *k as f64),
                exponent: 4.0,
                of_exponential: true,
            }),
            _ => None,
        }
    }

    /// Far-field descriptor of the field itself, when a power law is known.
    pub fn field_tail(&self) -> Option<TailSpec> {
        match self {
            ClosedFormField::RiggedF { k } => Some(TailSpec {
                center: Point::ORIGIN,
                coefficient: 8.0 / (*k as f64 * *k as f64),
                exponent: 4.0,
                of_exponential: false,
            }),
            ClosedFormField::RadialPower {
                center,
                coefficient,
                exponent,
            } => Some(TailSpec {
                center: *center,
                coefficient: *coefficient,
                exponent: -exponent,
                of_exponential: false,
            }),
            _ => None,
        }
    }

    /// Far-field power law of e^{lambda * field}: (c r^-a)^lambda.
    pub fn exp_lambda_tail(&self, lambda: f64) -> Option<TailSpec> {
        self.exp_tail().map(|t| TailSpec {
            center: t.center,
            coefficient: t.coefficient.powf(lambda),
            exponent: t.exponent * lambda,
            of_exponential: true,
        })
    }

    /// Sample onto a grid; errors on non-finite values.
    pub fn sample(&self, grid: &Grid2D) -> Result<ScalarField> {
        ScalarField::from_fn(grid, |p| self.eval(p))
    }

    /// Sample e^{lambda * field} onto a grid.
    pub fn sample_exp(&self, lambda: f64, grid: &Grid2D) -> Result<ScalarField> {
        ScalarField::from_fn(grid, |p| (lambda * self.eval(p)).exp())
    }
}

fn scaled_r2(p: Point, x0: Point, delta: f64) -> f64 {
    let dx = delta * (p.x - x0.x);
    let dy = delta * (p.y - x0.y);
    dx * dx + dy * dy
}

/// The local entire profile U_0 rescaled to center x0 and scale delta.
pub fn bubble_local(x0: Point, delta: f64) -> Result<ClosedFormField> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "delta must be positive, got {delta}"
        )));
    }
    Ok(ClosedFormField::LocalBubble { x0, delta })
}

/// The entire profile of the nonlocal problem, rescaled.
pub fn bubble_nonlocal(params: BubbleParams) -> ClosedFormField {
    ClosedFormField::NonlocalBubble(params)
}

/// Apply the rescaling u -> u(delta (. - x0)) + 2 log delta. Bubble kinds and
/// nested rescalings normalize so the chain depth stays bounded.
pub fn rescale(u: &ClosedFormField, x0: Point, delta: f64) -> Result<ClosedFormField> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "delta must be positive, got {delta}"
        )));
    }
    let composed = match u {
        ClosedFormField::LocalBubble { x0: c, delta: d } => ClosedFormField::LocalBubble {
            x0: Point::new(x0.x + c.x / delta, x0.y + c.y / delta),
            delta: d * delta,
        },
        ClosedFormField::NonlocalBubble(b) => ClosedFormField::NonlocalBubble(BubbleParams {
            mu: b.mu,
            x0: Point::new(x0.x + b.x0.x / delta, x0.y + b.x0.y / delta),
            delta: b.delta * delta,
        }),
        // u_k is the nonlocal bubble at scale k; rescaling leaves the family
        ClosedFormField::RiggedU { k, mu } => ClosedFormField::NonlocalBubble(BubbleParams {
            mu: *mu,
            x0,
            delta: *k as f64 * delta,
        }),
        ClosedFormField::Rescaled {
            inner,
            x0: c,
            delta: d,
        } => ClosedFormField::Rescaled {
            inner: inner.clone(),
            x0: Point::new(x0.x + c.x / delta, x0.y + c.y / delta),
            delta: d * delta,
        },
        other => ClosedFormField::Rescaled {
            inner: Box::new(other.clone()),
            x0,
            delta,
        },
    };
    if composed.depth() > MAX_COMPOSITE_DEPTH {
        return Err(Error::InvalidParameter(format!(
            "transform chain exceeds depth {MAX_COMPOSITE_DEPTH}"
        )));
    }
    Ok(composed)
}

/// Apply the logarithmic Kelvin transform
/// u -> u(x^{x0,sigma}) + 4 log(sigma / |x - x0|), the inversion through the
/// circle of radius sigma about x0. Applying the same transform twice is the
/// identity, and consecutive identical transforms cancel structurally.
pub fn kelvin(u: &ClosedFormField, x0: Point, sigma: f64) -> Result<ClosedFormField> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    let composed = match u {
        ClosedFormField::KelvinTransformed {
            inner,
            x0: c,
            sigma: s,
        } if *c == x0 && *s == sigma => (**inner).clone(),
        other => ClosedFormField::KelvinTransformed {
            inner: Box::new(other.clone()),
            x0,
            sigma,
        },
    };
    if composed.depth() > MAX_COMPOSITE_DEPTH {
        return Err(Error::InvalidParameter(format!(
            "transform chain exceeds depth {MAX_COMPOSITE_DEPTH}"
        )));
    }
    Ok(composed)
}

/// The rigged family: the profile u_k, its exact driving field
/// F_k = -lap u_k = 8 k^2/(1 + k^2 |x|^2)^2, and the amplitude A(mu).
pub fn rigged_family(k: u32, mu: f64) -> Result<(ClosedFormField, ClosedFormField, f64)> {
    check_mu(mu)?;
    if k == 0 {
        return Err(Error::InvalidParameter(
            "rigged family index k must be >= 1".into(),
        ));
    }
    Ok((
        ClosedFormField::RiggedU { k, mu },
        ClosedFormField::RiggedF { k },
        amplitude(mu),
    ))
}

/// Convenience wrapper mirroring the sampling operation of the field module.
pub fn sample(f: &ClosedFormField, grid: &Grid2D) -> Result<ScalarField> {
    f.sample(grid)
}
