//! Exact-ish building blocks for singular-kernel quadrature: Gauss-Legendre
//! rules, cell integrals of |y|^-mu and log|y| over axis-aligned rectangles,
//! and circle/cell overlap areas for exact-area boundary weights.

use std::f64::consts::PI;
use std::sync::OnceLock;

/// Gauss-Legendre nodes and weights on [-1, 1], computed by Newton iteration.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-like initial guess
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            // evaluate P_n and P_n' by recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        // recompute derivative at the converged node for the weight
        let mut p0 = 1.0;
        let mut p1 = x;
        for k in 2..=n {
            let kf = k as f64;
            let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn gl48() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(48))
}

/// Integrate a smooth scalar function over [a, b] with the cached 48-point rule.
fn gl_integrate(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let (nodes, weights) = gl48();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights.iter()) {
        acc += w * f(mid + half * x);
    }
    acc * half
}

/// Radially symmetric kernels whose cell integrals we need in closed-ish form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RadialKernel {
    /// |y|^-mu with 0 < mu < 2
    Riesz { mu: f64 },
    /// log|y|
    Log,
}

impl RadialKernel {
    /// Evaluate the kernel at distance r > 0.
    pub fn eval(&self, r: f64) -> f64 {
        match *self {
            RadialKernel::Riesz { mu } => (r * r).powf(-0.5 * mu),
            RadialKernel::Log => r.ln(),
        }
    }

    /// Primitive Q(R) = int_0^R k(r) r dr, finite for both kernels.
    fn radial_primitive(&self, r: f64) -> f64 {
        match *self {
            RadialKernel::Riesz { mu } => r.powf(2.0 - mu) / (2.0 - mu),
            RadialKernel::Log => 0.5 * r * r * (r.ln() - 0.5),
        }
    }

    /// Integral over the corner rectangle [0,a] x [0,b], a, b >= 0,
    /// containing the kernel singularity at the corner.
    fn corner_integral(&self, a: f64, b: f64) -> f64 {
        if a <= 0.0 || b <= 0.0 {
            return 0.0;
        }
        // polar split along the diagonal; both integrands are smooth in theta
        let phi_ab = b.atan2(a);
        let phi_ba = a.atan2(b);
        let i1 = gl_integrate(0.0, phi_ab, |t| self.radial_primitive(a / t.cos()));
        let i2 = gl_integrate(0.0, phi_ba, |t| self.radial_primitive(b / t.cos()));
        i1 + i2
    }

    /// Integral of the kernel over an arbitrary axis-aligned rectangle
    /// [x1,x2] x [y1,y2]; the singularity at the origin is allowed anywhere
    /// relative to the rectangle.
    pub fn rect_integral(&self, x1: f64, x2: f64, y1: f64, y2: f64) -> f64 {
        let g = |x: f64, y: f64| x.signum() * y.signum() * self.corner_integral(x.abs(), y.abs());
        g(x2, y2) - g(x1, y2) - g(x2, y1) + g(x1, y1)
    }
}

fn circle_quarter_area(a: f64, b: f64, r: f64) -> f64 {
    // area of [0,a] x [0,b] intersected with the disk of radius r at the origin
    if a <= 0.0 || b <= 0.0 || r <= 0.0 {
        return 0.0;
    }
    if a * a + b * b <= r * r {
        return a * b;
    }
    let a = a.min(r);
    let b = b.min(r);
    let c = (r * r - b * b).max(0.0).sqrt();
    if a <= c {
        return a * b;
    }
    let h = |x: f64| {
        0.5 * (x * (r * r - x * x).max(0.0).sqrt() + r * r * (x / r).clamp(-1.0, 1.0).asin())
    };
    b * c + h(a) - h(c)
}

/// Area of the intersection of the disk B(center, r) with the rectangle
/// [x1,x2] x [y1,y2]. Exact up to floating-point rounding.
pub fn circle_rect_overlap(cx: f64, cy: f64, r: f64, x1: f64, x2: f64, y1: f64, y2: f64) -> f64 {
    let g = |x: f64, y: f64| x.signum() * y.signum() * circle_quarter_area(x.abs(), y.abs(), r);
    let (x1, x2, y1, y2) = (x1 - cx, x2 - cx, y1 - cy, y2 - cy);
    (g(x2, y2) - g(x1, y2) - g(x2, y1) + g(x1, y1)).max(0.0)
}
