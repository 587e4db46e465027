//! Radial profiles, the Liouville bubble family, disc masses, boundary
//! weights and the Gauss–Bonnet flux check.
//!
//! Everything here is a pure function of immutable inputs. Closed-form
//! fields (bubbles, constants, closures) implement [`RadialField`] directly
//! so quadrature never goes through interpolation for them; sampled data
//! lives in [`RadialProfile`] and is evaluated with monotone cubic Hermite
//! interpolation.

use std::f64::consts::PI;
use std::fmt;
use std::io::{BufRead, Write};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::quadrature::Quadrature;

pub const FOUR_PI: f64 = 4.0 * PI;
pub const EIGHT_PI: f64 = 8.0 * PI;

/// Minimum node count for a [`RadialGrid`].
pub const MIN_GRID_NODES: usize = 16;

/// A scalar function of the radius on a disc (or the whole plane).
pub trait RadialField: Send + Sync {
    fn value(&self, r: f64) -> f64;

    /// Radial derivative. The default is a central difference of `value`.
    fn derivative(&self, r: f64) -> f64 {
        let h = 1e-5 * r.abs().max(1.0);
        if r < h {
            return (self.value(r + h) - self.value(r)) / h;
        }
        (self.value(r + h) - self.value(r - h)) / (2.0 * h)
    }

    /// `p'' + p'/r`, with the limit `2 p''(0)` at the origin.
    fn laplacian(&self, r: f64) -> f64 {
        let h = 1e-4 * r.abs().max(1.0);
        if r < h {
            let d2 = (self.derivative(r + h) - self.derivative(r)) / h;
            return 2.0 * d2;
        }
        let d2 = (self.derivative(r + h) - self.derivative(r - h)) / (2.0 * h);
        d2 + self.derivative(r) / r
    }

    /// Whether `derivative` comes from actual derivative data.
    fn has_derivative(&self) -> bool {
        true
    }

    /// Largest radius at which the field is defined.
    fn max_radius(&self) -> f64 {
        f64::INFINITY
    }

    /// Interior points in `(a, b)` where the field is only piecewise smooth;
    /// used to seed quadrature panels.
    fn breakpoints(&self, _a: f64, _b: f64) -> Vec<f64> {
        Vec::new()
    }
}

// ---------------------------------------------------------------------------
// grids and sampled profiles

/// Strictly increasing radii starting at exactly zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    nodes: Vec<f64>,
}

impl RadialGrid {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < MIN_GRID_NODES {
            return Err(Error::Resolution {
                nodes: nodes.len(),
                required: MIN_GRID_NODES,
            });
        }
        if nodes[0] != 0.0 {
            return Err(Error::Contract(format!(
                "grid must start at r = 0, starts at {}",
                nodes[0]
            )));
        }
        if let Some(w) = nodes.windows(2).find(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::Contract(format!(
                "grid nodes must be finite and strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
        Ok(RadialGrid { nodes })
    }

    /// `count` equally spaced nodes on `[0, r_max]`.
    pub fn uniform(r_max: f64, count: usize) -> Result<Self> {
        if !(r_max > 0.0) {
            return Err(Error::Parameter(format!("grid radius must be positive, got {r_max}")));
        }
        let n = count.max(2) - 1;
        let nodes = (0..=n).map(|i| r_max * i as f64 / n as f64).collect();
        Self::new(nodes)
    }

    /// Geometric spacing `r_i = R (2^{i/n} - 1)`, `i = 0..=n`, which puts
    /// nodes densely near the origin and still reaches `R`.
    pub fn geometric(r_max: f64, n: usize) -> Result<Self> {
        if !(r_max > 0.0) {
            return Err(Error::Parameter(format!("grid radius must be positive, got {r_max}")));
        }
        let nodes = (0..=n)
            .map(|i| r_max * ((i as f64 / n as f64).exp2() - 1.0))
            .collect();
        Self::new(nodes)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn outer_radius(&self) -> f64 {
        *self.nodes.last().expect("grid is never empty")
    }

    /// Index `i` with `nodes[i] <= r < nodes[i + 1]` (clamped to the last
    /// interval).
    fn interval(&self, r: f64) -> usize {
        let i = self.nodes.partition_point(|&x| x <= r);
        i.saturating_sub(1).min(self.nodes.len() - 2)
    }
}

/// Samples of a radial function on a grid, with optional derivative data.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    grid: RadialGrid,
    values: Vec<f64>,
    derivatives: Option<Vec<f64>>,
    /// Hermite slopes: the derivative data when present, otherwise
    /// Fritsch–Carlson slopes from the values.
    slopes: Vec<f64>,
    laplacian_cache: OnceLock<Vec<f64>>,
}

impl PartialEq for RadialProfile {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid
            && self.values == other.values
            && self.derivatives == other.derivatives
    }
}

impl RadialProfile {
    pub fn new(grid: RadialGrid, values: Vec<f64>, derivatives: Option<Vec<f64>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Contract(format!(
                "{} values for {} grid nodes",
                values.len(),
                grid.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Contract(format!("profile value {v} is not finite")));
        }
        if let Some(d) = &derivatives {
            if d.len() != grid.len() {
                return Err(Error::Contract(format!(
                    "{} derivatives for {} grid nodes",
                    d.len(),
                    grid.len()
                )));
            }
            if d.iter().any(|v| !v.is_finite()) {
                return Err(Error::Contract("profile derivative is not finite".into()));
            }
        }
        let slopes = match &derivatives {
            Some(d) => d.clone(),
            None => pchip_slopes(grid.nodes(), &values),
        };
        Ok(RadialProfile {
            grid,
            values,
            derivatives,
            slopes,
            laplacian_cache: OnceLock::new(),
        })
    }

    /// Sample a field (value and derivative) on a grid.
    pub fn sample(field: &dyn RadialField, grid: &RadialGrid) -> Result<Self> {
        let values = grid.nodes().iter().map(|&r| field.value(r)).collect();
        let derivs = field
            .has_derivative()
            .then(|| grid.nodes().iter().map(|&r| field.derivative(r)).collect());
        Self::new(grid.clone(), values, derivs)
    }

    /// Constant profile on a grid, with zero derivative data.
    pub fn constant(grid: &RadialGrid, c: f64) -> Result<Self> {
        Self::new(grid.clone(), vec![c; grid.len()], Some(vec![0.0; grid.len()]))
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn derivatives(&self) -> Option<&[f64]> {
        self.derivatives.as_deref()
    }

    /// Fill in derivative data by fourth-order finite differences.
    pub fn with_synthesized_derivatives(mut self) -> Self {
        if self.derivatives.is_none() {
            let d = fd_derivative(self.grid.nodes(), &self.values);
            self.slopes = d.clone();
            self.derivatives = Some(d);
            self.laplacian_cache = OnceLock::new();
        }
        self
    }

    /// True when the values strictly decrease node to node.
    pub fn is_strictly_decreasing(&self) -> bool {
        self.values.windows(2).all(|w| w[1] < w[0])
    }

    /// Laplacian at every node, from fourth-order differences of the
    /// derivative data.
    pub fn nodal_laplacian(&self) -> &[f64] {
        self.laplacian_cache.get_or_init(|| self.compute_laplacian())
    }

    fn compute_laplacian(&self) -> Vec<f64> {
        let r = self.grid.nodes();
        let d2 = fd_derivative(r, &self.slopes);
        r.iter()
            .zip(&d2)
            .zip(&self.slopes)
            .map(|((&r, &d2), &d1)| if r == 0.0 { 2.0 * d2 } else { d2 + d1 / r })
            .collect()
    }

    fn hermite(&self, r: f64) -> (f64, f64) {
        let x = self.grid.nodes();
        let i = self.grid.interval(r);
        let (x0, x1) = (x[i], x[i + 1]);
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let h = x1 - x0;
        let (m0, m1) = monotone_slopes(y0, y1, h, self.slopes[i], self.slopes[i + 1]);
        let t = (r - x0) / h;
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        let v = h00 * y0 + h10 * h * m0 + h01 * y1 + h11 * h * m1;
        let d00 = (6.0 * t2 - 6.0 * t) / h;
        let d10 = 3.0 * t2 - 4.0 * t + 1.0;
        let d01 = (-6.0 * t2 + 6.0 * t) / h;
        let d11 = 3.0 * t2 - 2.0 * t;
        let d = d00 * y0 + d10 * m0 + d01 * y1 + d11 * m1;
        (v, d)
    }

    /// Serialize as CSV with header `r,value,derivative`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "r,value,derivative")?;
        for (i, (&r, &v)) in self.grid.nodes().iter().zip(&self.values).enumerate() {
            match &self.derivatives {
                Some(d) => writeln!(out, "{r:e},{v:e},{:e}", d[i])?,
                None => writeln!(out, "{r:e},{v:e},")?,
            }
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }

    /// Parse the CSV written by [`write_csv`](Self::write_csv). An empty
    /// derivative column means no derivative data.
    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty profile CSV".into()))?
            .map_err(|e| Error::Parse(e.to_string()))?;
        let cols: Vec<&str> = header.trim().split(',').map(str::trim).collect();
        if cols.len() < 2 || cols[0] != "r" || cols[1] != "value" {
            return Err(Error::Parse(format!("unexpected profile header `{header}`")));
        }
        let (mut r, mut v, mut d) = (Vec::new(), Vec::new(), Vec::new());
        let mut all_d = true;
        for (lineno, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e} (`{s}`)", lineno + 2)))
            };
            r.push(num(f[0])?);
            v.push(num(f.get(1).copied().unwrap_or(""))?);
            match f.get(2).copied().filter(|s| !s.is_empty()) {
                Some(s) => d.push(num(s)?),
                None => all_d = false,
            }
        }
        let grid = RadialGrid::new(r)?;
        Self::new(grid, v, all_d.then_some(d))
    }
}

impl RadialField for RadialProfile {
    fn value(&self, r: f64) -> f64 {
        self.hermite(r).0
    }

    fn derivative(&self, r: f64) -> f64 {
        self.hermite(r).1
    }

    fn laplacian(&self, r: f64) -> f64 {
        let lap = self.nodal_laplacian();
        let x = self.grid.nodes();
        let i = self.grid.interval(r);
        let t = ((r - x[i]) / (x[i + 1] - x[i])).clamp(0.0, 1.0);
        lap[i] * (1.0 - t) + lap[i + 1] * t
    }

    fn has_derivative(&self) -> bool {
        self.derivatives.is_some()
    }

    fn max_radius(&self) -> f64 {
        self.grid.outer_radius()
    }

    fn breakpoints(&self, a: f64, b: f64) -> Vec<f64> {
        self.grid
            .nodes()
            .iter()
            .copied()
            .filter(|&x| x > a && x < b)
            .collect()
    }
}

/// Fritsch–Carlson limiting of the two end slopes of one Hermite interval so
/// the cubic stays monotone when the data are.
fn monotone_slopes(y0: f64, y1: f64, h: f64, m0: f64, m1: f64) -> (f64, f64) {
    let delta = (y1 - y0) / h;
    if delta == 0.0 {
        return (0.0, 0.0);
    }
    let mut a = m0 / delta;
    let mut b = m1 / delta;
    if a < 0.0 {
        a = 0.0;
    }
    if b < 0.0 {
        b = 0.0;
    }
    let s = a * a + b * b;
    if s > 9.0 {
        let tau = 3.0 / s.sqrt();
        a *= tau;
        b *= tau;
    }
    (a * delta, b * delta)
}

fn pchip_slopes(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
    let d: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
    let mut m = vec![0.0; n];
    for i in 1..n - 1 {
        if d[i - 1] * d[i] > 0.0 {
            let w1 = 2.0 * h[i] + h[i - 1];
            let w2 = h[i] + 2.0 * h[i - 1];
            m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
        }
    }
    m[0] = d[0];
    m[n - 1] = d[n - 2];
    m
}

/// Fourth-order derivative on an arbitrary grid: derivative of the Lagrange
/// polynomial through the five nearest nodes (centred in the interior,
/// one-sided at the ends).
pub fn fd_derivative(x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let width = 5.min(n);
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(width / 2).min(n - width);
            let xs = &x[start..start + width];
            let ys = &y[start..start + width];
            lagrange_derivative(xs, ys, x[i])
        })
        .collect()
}

fn lagrange_derivative(xs: &[f64], ys: &[f64], at: f64) -> f64 {
    let m = xs.len();
    let mut total = 0.0;
    for j in 0..m {
        // d/dx of the j-th basis polynomial
        let mut denom = 1.0;
        for k in 0..m {
            if k != j {
                denom *= xs[j] - xs[k];
            }
        }
        let mut num = 0.0;
        for skip in 0..m {
            if skip == j {
                continue;
            }
            let mut term = 1.0;
            for k in 0..m {
                if k != j && k != skip {
                    term *= at - xs[k];
                }
            }
            num += term;
        }
        total += ys[j] * num / denom;
    }
    total
}

// ---------------------------------------------------------------------------
// closed-form fields

/// `U_λ(r) = -2 ln(1 + λ²r²/8) + 2 ln λ`, the radial solutions of
/// `Δu + e^u = 0` with total mass `8π`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LiouvilleBubble {
    lambda: f64,
}

impl LiouvilleBubble {
    pub fn new(lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::Parameter(format!("bubble needs lambda > 0, got {lambda}")));
        }
        Ok(LiouvilleBubble { lambda })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    fn s(&self, r: f64) -> f64 {
        self.lambda * self.lambda * r * r / 8.0
    }

    /// `V_λ = (U_λ - ln 2) / 2`, the solution of `Δv + e^{2v} = 0`.
    pub fn half_scaled_value(&self, r: f64) -> f64 {
        0.5 * (self.value(r) - std::f64::consts::LN_2)
    }

    /// `e^{U_λ(r)}` without going through logarithms.
    pub fn density(&self, r: f64) -> f64 {
        let q = 1.0 + self.s(r);
        self.lambda * self.lambda / (q * q)
    }

    /// Radius at which the disc mass equals `m` (`0 <= m < 8π`).
    pub fn radius_for_mass(&self, m: f64) -> Result<f64> {
        if !(0.0..EIGHT_PI).contains(&m) {
            return Err(Error::Infeasible { mass: m });
        }
        // 8π s / (1 + s) = m
        let s = m / (EIGHT_PI - m);
        Ok((8.0 * s).sqrt() / self.lambda)
    }
}

impl RadialField for LiouvilleBubble {
    fn value(&self, r: f64) -> f64 {
        bubble_value(self, r)
    }

    fn derivative(&self, r: f64) -> f64 {
        let l2 = self.lambda * self.lambda;
        -(l2 * r / 2.0) / (1.0 + self.s(r))
    }

    fn laplacian(&self, r: f64) -> f64 {
        -self.density(r)
    }
}

/// A radial constant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantField(pub f64);

impl RadialField for ConstantField {
    fn value(&self, _r: f64) -> f64 {
        self.0
    }
    fn derivative(&self, _r: f64) -> f64 {
        0.0
    }
    fn laplacian(&self, _r: f64) -> f64 {
        0.0
    }
}

type ScalarFn = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// A field given by closures. Derivative and Laplacian fall back to finite
/// differences when not supplied.
pub struct RadialFn {
    value: ScalarFn,
    derivative: Option<ScalarFn>,
    laplacian: Option<ScalarFn>,
}

impl fmt::Debug for RadialFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RadialFn")
            .field("derivative", &self.derivative.is_some())
            .field("laplacian", &self.laplacian.is_some())
            .finish()
    }
}

impl RadialFn {
    pub fn new(value: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        RadialFn {
            value: Box::new(value),
            derivative: None,
            laplacian: None,
        }
    }

    pub fn with_derivative(mut self, d: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.derivative = Some(Box::new(d));
        self
    }

    pub fn with_laplacian(mut self, l: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        self.laplacian = Some(Box::new(l));
        self
    }
}

impl RadialField for RadialFn {
    fn value(&self, r: f64) -> f64 {
        (self.value)(r)
    }

    fn derivative(&self, r: f64) -> f64 {
        match &self.derivative {
            Some(d) => d(r),
            None => {
                let h = 1e-5 * r.abs().max(1.0);
                if r < h {
                    return ((self.value)(r + h) - (self.value)(r)) / h;
                }
                ((self.value)(r + h) - (self.value)(r - h)) / (2.0 * h)
            }
        }
    }

    fn laplacian(&self, r: f64) -> f64 {
        match &self.laplacian {
            Some(l) => l(r),
            None => {
                let h = 1e-4 * r.abs().max(1.0);
                if r < h {
                    return 2.0 * (self.derivative(r + h) - self.derivative(r)) / h;
                }
                (self.derivative(r + h) - self.derivative(r - h)) / (2.0 * h)
                    + self.derivative(r) / r
            }
        }
    }
}

/// `a + c·b` for two fields on a common domain.
pub struct Combination<'a> {
    a: &'a dyn RadialField,
    b: &'a dyn RadialField,
    c: f64,
}

impl<'a> Combination<'a> {
    pub fn sum(a: &'a dyn RadialField, b: &'a dyn RadialField) -> Self {
        Combination { a, b, c: 1.0 }
    }

    pub fn difference(a: &'a dyn RadialField, b: &'a dyn RadialField) -> Self {
        Combination { a, b, c: -1.0 }
    }
}

impl RadialField for Combination<'_> {
    fn value(&self, r: f64) -> f64 {
        self.a.value(r) + self.c * self.b.value(r)
    }
    fn derivative(&self, r: f64) -> f64 {
        self.a.derivative(r) + self.c * self.b.derivative(r)
    }
    fn laplacian(&self, r: f64) -> f64 {
        self.a.laplacian(r) + self.c * self.b.laplacian(r)
    }
    fn has_derivative(&self) -> bool {
        self.a.has_derivative() && self.b.has_derivative()
    }
    fn max_radius(&self) -> f64 {
        self.a.max_radius().min(self.b.max_radius())
    }
    fn breakpoints(&self, lo: f64, hi: f64) -> Vec<f64> {
        let mut p = self.a.breakpoints(lo, hi);
        p.extend(self.b.breakpoints(lo, hi));
        p.sort_by(f64::total_cmp);
        p.dedup();
        p
    }
}

// ---------------------------------------------------------------------------
// operations

pub fn bubble_value(b: &LiouvilleBubble, r: f64) -> f64 {
    -2.0 * b.s(r).ln_1p() + 2.0 * b.lambda.ln()
}

/// `∫_{B_r} e^{U_λ} = 8πλ²r² / (8 + λ²r²)`.
pub fn bubble_mass(b: &LiouvilleBubble, r: f64) -> f64 {
    let x = b.lambda * b.lambda * r * r;
    if x.is_infinite() {
        return EIGHT_PI;
    }
    EIGHT_PI * x / (8.0 + x)
}

/// `∫_{B_r} k e^p dy = 2π ∫_0^r k(s) e^{p(s)} s ds` by adaptive quadrature.
pub fn profile_mass(
    p: &dyn RadialField,
    r: f64,
    k: &KernelSpec,
    quad: &Quadrature,
) -> Result<f64> {
    annulus_mass(p, 0.0, r, k, quad)
}

/// Same integrand over the annulus `a <= |y| <= b`.
pub fn annulus_mass(
    p: &dyn RadialField,
    a: f64,
    b: f64,
    k: &KernelSpec,
    quad: &Quadrature,
) -> Result<f64> {
    let max = p.max_radius();
    for x in [a, b] {
        if !(x >= 0.0) || x > max * (1.0 + 1e-12) {
            return Err(Error::Domain { radius: x, max });
        }
    }
    let b = b.min(max);
    let a = a.min(b);
    if b == a {
        return Ok(0.0);
    }
    let f = |s: f64| 2.0 * PI * s * (k.ln_k(s) + p.value(s)).exp();
    let mut breaks = vec![a];
    breaks.extend(p.breakpoints(a, b));
    breaks.push(b);
    Ok(quad.integrate_with_breaks(&f, &breaks).value)
}

/// Cumulative masses `∫_{B_{r_i}} k e^p` at every grid node, summed
/// interval by interval in a fixed order.
pub fn cumulative_mass(
    p: &dyn RadialField,
    grid: &RadialGrid,
    k: &KernelSpec,
    quad: &Quadrature,
) -> Result<Vec<f64>> {
    let r = grid.nodes();
    let mut out = Vec::with_capacity(r.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in r.windows(2) {
        acc += annulus_mass(p, w[0], w[1], k, quad)?;
        out.push(acc);
    }
    Ok(out)
}

/// `∫_{∂B_r} e^{p/2} ds = 2πr e^{p(r)/2}`; zero at `r = 0`.
pub fn boundary_weight(p: &dyn RadialField, r: f64) -> f64 {
    if r == 0.0 {
        return 0.0;
    }
    2.0 * PI * r * (0.5 * p.value(r)).exp()
}

/// Gauss–Bonnet flux data for a disc.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussBonnetReport {
    /// `∫_{B_r} e^p`.
    pub area: f64,
    /// `-∫_{∂B_r} ∂p/∂r ds = -2πr p'(r)`.
    pub flux: f64,
    /// Total geodesic curvature of the boundary of the curvature-one surface
    /// `(B_r, e^p/2 dy)`, i.e. `2π` minus that surface's area `area / 2`.
    pub geodesic_total: f64,
    pub defect: f64,
}

/// Compare the mass of `e^p` on `B_r` with the boundary flux of `p`. For
/// solutions of `Δp + e^p = 0` the two agree.
pub fn gauss_bonnet_check(p: &dyn RadialField, r: f64, quad: &Quadrature) -> Result<GaussBonnetReport> {
    if !p.has_derivative() {
        return Err(Error::Contract(
            "Gauss-Bonnet check needs derivative data".into(),
        ));
    }
    let area = profile_mass(p, r, &KernelSpec::UNIT, quad)?;
    let flux = -2.0 * PI * r * p.derivative(r);
    Ok(GaussBonnetReport {
        area,
        flux,
        geodesic_total: 2.0 * PI - 0.5 * area,
        defect: (area - flux).abs(),
    })
}
