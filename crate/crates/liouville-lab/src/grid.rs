//! Uniform cell-centered grids, sampled scalar fields, region masks with
//! exact-area boundary weights, midpoint quadrature with analytic far-field
//! tails, and the 5-point Laplacian.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quadrature::circle_rect_overlap;

/// A point in the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn dist(&self, other: Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }
}

/// Uniform cell-centered square grid covering
/// [cx - L, cx + L] x [cy - L, cy + L] with n cells per axis.
///
/// Node (i, j) sits at center + ((i + 1/2) h - L, (j + 1/2) h - L) with
/// h = 2L/n, so no node ever coincides with the grid center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    center: Point,
    half_width: f64,
    n: usize,
}

impl Grid2D {
    pub fn new(center: Point, half_width: f64, n: usize) -> Result<Self> {
        if !(half_width > 0.0) || !half_width.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "half_width must be positive and finite, got {half_width}"
            )));
        }
        if n < 4 {
            return Err(Error::InvalidGrid(format!(
                "need n >= 4 cells per axis, got {n}"
            )));
        }
        if !center.x.is_finite() || !center.y.is_finite() {
            return Err(Error::InvalidGrid("non-finite grid center".into()));
        }
        Ok(Grid2D {
            center,
            half_width,
            n,
        })
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Cell spacing h = 2L/n.
    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    /// Coordinates of node (i, j).
    pub fn node(&self, i: usize, j: usize) -> Point {
        let h = self.spacing();
        Point::new(
            self.center.x + (i as f64 + 0.5) * h - self.half_width,
            self.center.y + (j as f64 + 0.5) * h - self.half_width,
        )
    }

    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.n + j
    }

    /// Lower-left corner of cell (i, j).
    pub fn cell_corner(&self, i: usize, j: usize) -> Point {
        let h = self.spacing();
        Point::new(
            self.center.x + i as f64 * h - self.half_width,
            self.center.y + j as f64 * h - self.half_width,
        )
    }

    /// Cell indices containing the point, if it lies inside the grid extent.
    pub fn cell_of(&self, p: Point) -> Option<(usize, usize)> {
        let h = self.spacing();
        let fx = (p.x - self.center.x + self.half_width) / h;
        let fy = (p.y - self.center.y + self.half_width) / h;
        if fx < 0.0 || fy < 0.0 {
            return None;
        }
        let i = fx.floor() as usize;
        let j = fy.floor() as usize;
        if i >= self.n || j >= self.n {
            return None;
        }
        Some((i, j))
    }

    /// If `p` coincides with a grid node (to a tight tolerance), its indices.
    pub fn node_at(&self, p: Point) -> Option<(usize, usize)> {
        let h = self.spacing();
        let fx = (p.x - self.center.x + self.half_width) / h - 0.5;
        let fy = (p.y - self.center.y + self.half_width) / h - 0.5;
        let i = fx.round();
        let j = fy.round();
        if (fx - i).abs() < 1e-9 && (fy - j).abs() < 1e-9 && i >= 0.0 && j >= 0.0 {
            let (i, j) = (i as usize, j as usize);
            if i < self.n && j < self.n {
                return Some((i, j));
            }
        }
        None
    }

    /// Mask of the largest disk centered on the grid that fits inside it.
    pub fn inscribed_disk_mask(&self) -> RegionMask {
        RegionMask::disk(self, self.center, self.half_width).expect("inscribed disk is valid")
    }

    /// Mask of the interior nodes (everything except the outermost ring),
    /// where the 5-point Laplacian is defined.
    pub fn interior_mask(&self) -> RegionMask {
        let mut weights = vec![0.0; self.n * self.n];
        for i in 1..self.n - 1 {
            for j in 1..self.n - 1 {
                weights[self.idx(i, j)] = 1.0;
            }
        }
        RegionMask {
            grid: *self,
            weights,
            geometry: None,
            empty_warning: false,
        }
    }
}

/// Construct a grid; see [`Grid2D::new`].
pub fn make_grid(center: Point, half_width: f64, n: usize) -> Result<Grid2D> {
    Grid2D::new(center, half_width, n)
}

/// Sampled values of a function at the nodes of a [`Grid2D`], row-major in i.
#[derive(Debug, Clone)]
pub struct ScalarField {
    grid: Grid2D,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn constant(grid: &Grid2D, value: f64) -> Self {
        ScalarField {
            grid: *grid,
            values: vec![value; grid.n() * grid.n()],
        }
    }

    /// Sample an arbitrary function at every node. Errors if any sampled
    /// value is non-finite.
    pub fn from_fn(grid: &Grid2D, f: impl Fn(Point) -> f64) -> Result<Self> {
        let n = grid.n();
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let v = f(grid.node(i, j));
                if !v.is_finite() {
                    return Err(Error::NonFinite(format!(
                        "field value at node ({i}, {j}) = {v}"
                    )));
                }
                values[grid.idx(i, j)] = v;
            }
        }
        Ok(ScalarField {
            grid: *grid,
            values,
        })
    }

    pub fn from_values(grid: &Grid2D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() * grid.n() {
            return Err(Error::InvalidGrid(
                "value buffer does not match grid size".into(),
            ));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(
                "field buffer contains a non-finite value".into(),
            ));
        }
        Ok(ScalarField {
            grid: *grid,
            values,
        })
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[self.grid.idx(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        let idx = self.grid.idx(i, j);
        self.values[idx] = v;
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise combination of two fields on the same grid.
    pub fn zip_with(&self, other: &ScalarField, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::MismatchedGrids);
        }
        Ok(ScalarField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(other.values.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Field multiplied by the mask's cell weights.
    pub fn masked(&self, mask: &RegionMask) -> Result<Self> {
        if self.grid != mask.grid {
            return Err(Error::MismatchedGrids);
        }
        Ok(ScalarField {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(mask.weights.iter())
                .map(|(&v, &w)| v * w)
                .collect(),
        })
    }

    pub fn max_over(&self, mask: &RegionMask) -> Result<f64> {
        self.fold_over(mask, f64::NEG_INFINITY, f64::max)
    }

    pub fn min_over(&self, mask: &RegionMask) -> Result<f64> {
        self.fold_over(mask, f64::INFINITY, f64::min)
    }

    pub fn sup_abs_over(&self, mask: &RegionMask) -> Result<f64> {
        self.fold_over(mask, 0.0, |a, b| a.max(b.abs()))
    }

    fn fold_over(&self, mask: &RegionMask, init: f64, f: impl Fn(f64, f64) -> f64) -> Result<f64> {
        if self.grid != mask.grid {
            return Err(Error::MismatchedGrids);
        }
        if mask.is_empty() {
            return Err(Error::InvalidGeometry("fold over an empty mask".into()));
        }
        let mut acc = init;
        for (v, w) in self.values.iter().zip(mask.weights.iter()) {
            if *w > 0.0 {
                acc = f(acc, *v);
            }
        }
        Ok(acc)
    }

    /// Mean and standard deviation over the covered nodes (unweighted).
    pub fn mean_std_over(&self, mask: &RegionMask) -> Result<(f64, f64)> {
        if self.grid != mask.grid {
            return Err(Error::MismatchedGrids);
        }
        let mut count = 0usize;
        let mut mean = 0.0;
        for (v, w) in self.values.iter().zip(mask.weights.iter()) {
            if *w > 0.0 {
                count += 1;
                mean += *v;
            }
        }
        if count == 0 {
            return Err(Error::InvalidGeometry(
                "statistics over an empty mask".into(),
            ));
        }
        mean /= count as f64;
        let mut var = 0.0;
        for (v, w) in self.values.iter().zip(mask.weights.iter()) {
            if *w > 0.0 {
                var += (*v - mean) * (*v - mean);
            }
        }
        Ok((mean, (var / count as f64).sqrt()))
    }

    pub fn has_nan(&self) -> bool {
        self.values.iter().any(|v| v.is_nan())
    }
}

/// Exact geometric descriptor used to weight boundary cells of a mask.
#[derive(Debug, Clone, PartialEq)]
pub enum MaskGeometry {
    Disk {
        center: Point,
        radius: f64,
    },
    Annulus {
        center: Point,
        r_in: f64,
        r_out: f64,
    },
    Rect {
        x1: f64,
        x2: f64,
        y1: f64,
        y2: f64,
    },
    Complement(Box<MaskGeometry>),
}

/// Cell subset of a grid. Each cell carries a coverage weight in [0, 1];
/// cells crossed by an exact disk/annulus boundary get the exact covered
/// area fraction, everything else is 0 or 1.
#[derive(Debug, Clone)]
pub struct RegionMask {
    grid: Grid2D,
    weights: Vec<f64>,
    geometry: Option<MaskGeometry>,
    empty_warning: bool,
}

impl RegionMask {
    /// Build a mask from a geometric descriptor.
    pub fn from_geometry(grid: &Grid2D, geometry: MaskGeometry) -> Result<Self> {
        validate_geometry(&geometry)?;
        let n = grid.n();
        let h = grid.spacing();
        let mut weights = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                let c = grid.cell_corner(i, j);
                weights[grid.idx(i, j)] =
                    geometry_cell_weight(&geometry, c.x, c.x + h, c.y, c.y + h);
            }
        }
        let covered: f64 = weights.iter().sum();
        Ok(RegionMask {
            grid: *grid,
            weights,
            geometry: Some(geometry),
            empty_warning: covered == 0.0,
        })
    }

    pub fn disk(grid: &Grid2D, center: Point, radius: f64) -> Result<Self> {
        Self::from_geometry(grid, MaskGeometry::Disk { center, radius })
    }

    pub fn annulus(grid: &Grid2D, center: Point, r_in: f64, r_out: f64) -> Result<Self> {
        Self::from_geometry(
            grid,
            MaskGeometry::Annulus {
                center,
                r_in,
                r_out,
            },
        )
    }

    /// Mask from explicit per-cell weights in [0, 1], without geometry.
    pub fn from_weights(grid: &Grid2D, weights: Vec<f64>) -> Self {
        assert_eq!(weights.len(), grid.n() * grid.n(), "weight buffer size");
        let empty = weights.iter().all(|&w| w == 0.0);
        RegionMask {
            grid: *grid,
            weights,
            geometry: None,
            empty_warning: empty,
        }
    }

    pub fn full(grid: &Grid2D) -> Self {
        RegionMask {
            grid: *grid,
            weights: vec![1.0; grid.n() * grid.n()],
            geometry: Some(MaskGeometry::Rect {
                x1: grid.center().x - grid.half_width(),
                x2: grid.center().x + grid.half_width(),
                y1: grid.center().y - grid.half_width(),
                y2: grid.center().y + grid.half_width(),
            }),
            empty_warning: false,
        }
    }

    pub fn grid(&self) -> &Grid2D {
        &self.grid
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[self.grid.idx(i, j)]
    }

    pub fn covers(&self, i: usize, j: usize) -> bool {
        self.weight(i, j) > 0.0
    }

    pub fn geometry(&self) -> Option<&MaskGeometry> {
        self.geometry.as_ref()
    }

    /// Set when the requested geometry does not intersect the grid extent.
    pub fn empty_warning(&self) -> bool {
        self.empty_warning
    }

    pub fn is_empty(&self) -> bool {
        self.weights.iter().all(|&w| w == 0.0)
    }

    /// Covered area, honoring fractional boundary weights.
    pub fn area(&self) -> f64 {
        let h2 = self.grid.spacing() * self.grid.spacing();
        self.weights.iter().sum::<f64>() * h2
    }

    /// Weight-level set difference (self minus other), exact per cell.
    pub fn subtract(&self, other: &RegionMask) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::MismatchedGrids);
        }
        let weights: Vec<f64> = self
            .weights
            .iter()
            .zip(other.weights.iter())
            .map(|(&a, &b)| (a - b).max(0.0))
            .collect();
        let empty = weights.iter().all(|&w| w == 0.0);
        Ok(RegionMask {
            grid: self.grid,
            weights,
            geometry: None,
            empty_warning: empty,
        })
    }

    /// Pointwise minimum of coverage weights.
    pub fn intersect(&self, other: &RegionMask) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::MismatchedGrids);
        }
        let weights: Vec<f64> = self
            .weights
            .iter()
            .zip(other.weights.iter())
            .map(|(&a, &b)| a.min(b))
            .collect();
        let empty = weights.iter().all(|&w| w == 0.0);
        Ok(RegionMask {
            grid: self.grid,
            weights,
            geometry: None,
            empty_warning: empty,
        })
    }

    /// True when no cell is covered by both masks.
    pub fn disjoint_from(&self, other: &RegionMask) -> bool {
        self.grid == other.grid
            && self
                .weights
                .iter()
                .zip(other.weights.iter())
                .all(|(&a, &b)| a.min(b) == 0.0)
    }

    /// Indices of covered cells.
    pub fn covered_cells(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.grid.n();
        self.weights
            .iter()
            .enumerate()
            .filter(|(_, &w)| w > 0.0)
            .map(move |(idx, _)| (idx / n, idx % n))
    }
}

fn validate_geometry(geometry: &MaskGeometry) -> Result<()> {
    match geometry {
        MaskGeometry::Disk { radius, .. } => {
            if !(*radius > 0.0) {
                return Err(Error::InvalidGeometry(format!(
                    "disk radius must be positive, got {radius}"
                )));
            }
        }
        MaskGeometry::Annulus { r_in, r_out, .. } => {
            if !(*r_in >= 0.0) || !(*r_out > *r_in) {
                return Err(Error::InvalidGeometry(format!(
                    "annulus requires 0 <= r_in < r_out, got r_in = {r_in}, r_out = {r_out}"
                )));
            }
        }
        MaskGeometry::Rect { x1, x2, y1, y2 } => {
            if !(x2 > x1) || !(y2 > y1) {
                return Err(Error::InvalidGeometry("degenerate rectangle".into()));
            }
        }
        MaskGeometry::Complement(inner) => validate_geometry(inner)?,
    }
    Ok(())
}

fn geometry_cell_weight(geometry: &MaskGeometry, x1: f64, x2: f64, y1: f64, y2: f64) -> f64 {
    let w = geometry_cell_weight_raw(geometry, x1, x2, y1, y2);
    // snap floating-point slivers so "covered" means geometrically covered
    if w < 1e-10 {
        0.0
    } else if w > 1.0 - 1e-10 {
        1.0
    } else {
        w
    }
}

fn geometry_cell_weight_raw(geometry: &MaskGeometry, x1: f64, x2: f64, y1: f64, y2: f64) -> f64 {
    let cell_area = (x2 - x1) * (y2 - y1);
    match geometry {
        MaskGeometry::Disk { center, radius } => {
            circle_rect_overlap(center.x, center.y, *radius, x1, x2, y1, y2) / cell_area
        }
        MaskGeometry::Annulus {
            center,
            r_in,
            r_out,
        } => {
            let outer = circle_rect_overlap(center.x, center.y, *r_out, x1, x2, y1, y2);
            let inner = circle_rect_overlap(center.x, center.y, *r_in, x1, x2, y1, y2);
            ((outer - inner) / cell_area).clamp(0.0, 1.0)
        }
        MaskGeometry::Rect {
            x1: a1,
            x2: a2,
            y1: b1,
            y2: b2,
        } => {
            let w = (x2.min(*a2) - x1.max(*a1)).max(0.0);
            let h = (y2.min(*b2) - y1.max(*b1)).max(0.0);
            w * h / cell_area
        }
        MaskGeometry::Complement(inner) => 1.0 - geometry_cell_weight_raw(inner, x1, x2, y1, y2),
    }
}

/// Build a region mask from a geometric descriptor; see [`RegionMask`].
pub fn region_mask(grid: &Grid2D, geometry: MaskGeometry) -> Result<RegionMask> {
    RegionMask::from_geometry(grid, geometry)
}

/// Analytic radial power-law tail c * |x - center|^{-exponent} used to extend
/// quadrature and potentials beyond the grid, starting at `start_radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerTail {
    pub center: Point,
    pub coefficient: f64,
    pub exponent: f64,
    pub start_radius: f64,
}

impl PowerTail {
    /// Integral of the tail over {|x - center| > start_radius}; requires
    /// exponent > 2 for integrability.
    pub fn integral(&self) -> Result<f64> {
        if self.exponent <= 2.0 {
            return Err(Error::InvalidParameter(format!(
                "tail exponent must exceed 2 for an integrable tail, got {}",
                self.exponent
            )));
        }
        if !(self.start_radius > 0.0) {
            return Err(Error::InvalidParameter(
                "tail start radius must be positive".into(),
            ));
        }
        Ok(
            2.0 * PI * self.coefficient * self.start_radius.powf(2.0 - self.exponent)
                / (self.exponent - 2.0),
        )
    }
}

/// Midpoint quadrature of `f` over the masked cells, with exact-area weights
/// on boundary cells of an exact geometry and an optional analytic tail.
pub fn integrate(f: &ScalarField, region: &RegionMask, tail: Option<&PowerTail>) -> Result<f64> {
    if f.grid() != region.grid() {
        return Err(Error::MismatchedGrids);
    }
    let h2 = f.grid().spacing() * f.grid().spacing();
    let bulk: f64 = f
        .values()
        .iter()
        .zip(region.weights().iter())
        .map(|(&v, &w)| v * w)
        .sum::<f64>()
        * h2;
    match tail {
        Some(t) => Ok(bulk + t.integral()?),
        None => Ok(bulk),
    }
}

/// 5-point Laplacian (u_E + u_W + u_N + u_S - 4u)/h^2 on interior nodes.
/// The outermost ring of the result is set to zero and must be excluded from
/// norms; combine with [`Grid2D::interior_mask`].
pub fn fd_laplacian(u: &ScalarField) -> ScalarField {
    let grid = *u.grid();
    let n = grid.n();
    let h2 = grid.spacing() * grid.spacing();
    let mut out = vec![0.0; n * n];
    for i in 1..n - 1 {
        for j in 1..n - 1 {
            let c = u.at(i, j);
            out[grid.idx(i, j)] =
                (u.at(i + 1, j) + u.at(i - 1, j) + u.at(i, j + 1) + u.at(i, j - 1) - 4.0 * c) / h2;
        }
    }
    ScalarField { grid, values: out }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn node_formula_matches_examples() {
        let g = make_grid(Point::ORIGIN, 1.0, 4).unwrap();
        assert_relative_eq!(g.spacing(), 0.5);
        let p = g.node(0, 0);
        assert_relative_eq!(p.x, -0.75);
        assert_relative_eq!(p.y, -0.75);

        let g = make_grid(Point::new(1.0, 0.0), 2.0, 8).unwrap();
        assert_relative_eq!(g.spacing(), 0.5);
        let p = g.node(7, 7);
        assert_relative_eq!(p.x, 2.75);
        assert_relative_eq!(p.y, 1.75);
    }

    #[test]
    fn grid_preconditions_rejected() {
        assert!(make_grid(Point::ORIGIN, 1.0, 3).is_err());
        assert!(make_grid(Point::ORIGIN, 0.0, 64).is_err());
        assert!(make_grid(Point::ORIGIN, -2.0, 64).is_err());
    }

    #[test]
    fn disk_mask_area_converges_to_pi() {
        let g = make_grid(Point::ORIGIN, 1.0, 64).unwrap();
        let m = RegionMask::disk(&g, Point::ORIGIN, 1.0).unwrap();
        // exact-area weights make this much tighter than the 4h bound
        assert!((m.area() - PI).abs() < 1e-10, "area = {}", m.area());
    }

    #[test]
    fn annulus_precondition_rejected() {
        let g = make_grid(Point::ORIGIN, 1.0, 16).unwrap();
        assert!(RegionMask::annulus(&g, Point::ORIGIN, 1.0, 0.5).is_err());
        assert!(RegionMask::disk(&g, Point::ORIGIN, -1.0).is_err());
    }

    #[test]
    fn disjoint_disk_sets_warning() {
        let g = make_grid(Point::ORIGIN, 1.0, 16).unwrap();
        let m = RegionMask::disk(&g, Point::new(10.0, 10.0), 0.5).unwrap();
        assert!(m.is_empty());
        assert!(m.empty_warning());
    }

    #[test]
    fn unit_disk_integral_of_one() {
        let g = make_grid(Point::ORIGIN, 1.5, 96).unwrap();
        let f = ScalarField::constant(&g, 1.0);
        let m = RegionMask::disk(&g, Point::ORIGIN, 1.0).unwrap();
        let v = integrate(&f, &m, None).unwrap();
        assert!((v - PI).abs() < 2.0 * g.spacing(), "v = {v}");
        assert!((v - PI).abs() < 1e-10);
    }

    #[test]
    fn quadrature_additive_over_disjoint_masks() {
        let g = make_grid(Point::ORIGIN, 1.0, 32).unwrap();
        let f = ScalarField::from_fn(&g, |p| (p.x + 2.0 * p.y).sin() + 1.5).unwrap();
        let a = RegionMask::disk(&g, Point::new(-0.4, 0.0), 0.3).unwrap();
        let b = RegionMask::disk(&g, Point::new(0.4, 0.0), 0.3).unwrap();
        assert!(a.disjoint_from(&b));
        let whole = {
            // union via weight sum: reuse subtract/intersect algebra
            let mut w = a.clone();
            for (wa, wb) in w.weights.iter_mut().zip(b.weights.iter()) {
                *wa += *wb;
            }
            w
        };
        let ia = integrate(&f, &a, None).unwrap();
        let ib = integrate(&f, &b, None).unwrap();
        let iw = integrate(&f, &whole, None).unwrap();
        assert_relative_eq!(ia + ib, iw, epsilon = 1e-14);
    }

    #[test]
    fn quadrature_refinement_order_at_least_1_8() {
        // smooth integrand with known integral over the unit disk:
        // int e^{U_0} over B_1 = 4 pi with U_0 = log 8/(1+r^2)^2
        let exact = 4.0 * PI;
        let mut errs = Vec::new();
        for n in [64usize, 128, 256] {
            let g = make_grid(Point::ORIGIN, 1.2, n).unwrap();
            let f = ScalarField::from_fn(&g, |p| {
                let r2 = p.x * p.x + p.y * p.y;
                8.0 / ((1.0 + r2) * (1.0 + r2))
            })
            .unwrap();
            let m = RegionMask::disk(&g, Point::ORIGIN, 1.0).unwrap();
            errs.push((integrate(&f, &m, None).unwrap() - exact).abs());
        }
        let order1 = (errs[0] / errs[1]).log2();
        let order2 = (errs[1] / errs[2]).log2();
        let fitted = 0.5 * (order1 + order2);
        assert!(fitted >= 1.8, "fitted order {fitted}, errors {errs:?}");
    }

    #[test]
    fn tail_integral_closed_form() {
        // c r^{-4} beyond radius 5: 2 pi c / (2 * 25)
        let t = PowerTail {
            center: Point::ORIGIN,
            coefficient: 8.0,
            exponent: 4.0,
            start_radius: 5.0,
        };
        assert_relative_eq!(
            t.integral().unwrap(),
            2.0 * PI * 8.0 / (2.0 * 25.0),
            epsilon = 1e-14
        );
        let bad = PowerTail { exponent: 2.0, ..t };
        assert!(bad.integral().is_err());
    }

    #[test]
    fn laplacian_exact_on_quadratics() {
        let g = make_grid(Point::ORIGIN, 1.0, 32).unwrap();
        let u = ScalarField::from_fn(&g, |p| p.x * p.x + p.y * p.y).unwrap();
        let lap = fd_laplacian(&u);
        for i in 1..31 {
            for j in 1..31 {
                assert_relative_eq!(lap.at(i, j), 4.0, epsilon = 1e-9);
            }
        }
        // boundary ring flagged invalid (zeroed)
        assert_eq!(lap.at(0, 5), 0.0);
    }

    #[test]
    fn laplacian_zero_on_constants() {
        let g = make_grid(Point::ORIGIN, 2.0, 16).unwrap();
        let u = ScalarField::constant(&g, 3.7);
        let lap = fd_laplacian(&u);
        let interior = g.interior_mask();
        assert!(lap.sup_abs_over(&interior).unwrap() < 1e-12);
    }

    #[test]
    fn laplacian_linearity() {
        let g = make_grid(Point::ORIGIN, 1.0, 24).unwrap();
        let u = ScalarField::from_fn(&g, |p| (3.0 * p.x).cos() * p.y).unwrap();
        let v = ScalarField::from_fn(&g, |p| p.x.exp() + p.y * p.y * p.y).unwrap();
        let (a, b) = (2.5, -1.25);
        let combo = u.zip_with(&v, |x, y| a * x + b * y).unwrap();
        let lhs = fd_laplacian(&combo);
        let rhs = fd_laplacian(&u)
            .zip_with(&fd_laplacian(&v), |x, y| a * x + b * y)
            .unwrap();
        let diff = lhs.zip_with(&rhs, |x, y| x - y).unwrap();
        assert!(diff.sup_abs_over(&g.interior_mask()).unwrap() < 1e-9);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(40))]
        #[test]
        fn quadrature_additive_for_random_disjoint_disks(
            cx in -0.5f64..0.0,
            cy in -0.4f64..0.4,
            r1 in 0.05f64..0.35,
            r2 in 0.05f64..0.35,
            phase in 0.0f64..core::f64::consts::TAU,
        ) {
            let g = make_grid(Point::ORIGIN, 1.0, 48).unwrap();
            let c1 = Point::new(cx, cy);
            // place the second disk tangentially separated from the first
            let d = r1 + r2 + 0.12;
            let c2 = Point::new(cx + d * phase.cos(), cy + d * phase.sin());
            let a = RegionMask::disk(&g, c1, r1).unwrap();
            let b = RegionMask::disk(&g, c2, r2).unwrap();
            proptest::prop_assume!(a.disjoint_from(&b));
            let f = ScalarField::from_fn(&g, |p| (3.0 * p.x - p.y).cos() + 2.0).unwrap();
            let union = RegionMask::from_weights(
                &g,
                a.weights().iter().zip(b.weights().iter()).map(|(&x, &y)| x + y).collect(),
            );
            let lhs = integrate(&f, &union, None).unwrap();
            let rhs = integrate(&f, &a, None).unwrap() + integrate(&f, &b, None).unwrap();
            proptest::prop_assert!((lhs - rhs).abs() <= 1e-13 * lhs.abs().max(1.0));
        }
    }

    #[test]
    fn mismatched_grids_rejected() {
        let g1 = make_grid(Point::ORIGIN, 1.0, 16).unwrap();
        let g2 = make_grid(Point::ORIGIN, 1.0, 32).unwrap();
        let f = ScalarField::constant(&g1, 1.0);
        let m = RegionMask::disk(&g2, Point::ORIGIN, 0.5).unwrap();
        assert!(matches!(
            integrate(&f, &m, None),
            Err(Error::MismatchedGrids)
        ));
    }
}
