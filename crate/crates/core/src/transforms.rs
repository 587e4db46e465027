//! Stereographic projection, the Kelvin transform, and the three
//! sphere-to-plane changes of variables used for mean field equations.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{
    onsager_laplacian_log_kernel, onsager_laplacian_log_kernel_cubed_variant, KernelSpec,
};
use crate::quadrature::Quadrature;
use crate::radial_core::{RadialField, RadialGrid, RadialProfile};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpherePoint {
    pub x1: f64,
    pub x2: f64,
    pub x3: f64,
}

impl SpherePoint {
    pub fn new(x1: f64, x2: f64, x3: f64) -> Result<Self> {
        let n = x1 * x1 + x2 * x2 + x3 * x3;
        if !((n - 1.0).abs() <= 1e-12) {
            return Err(Error::Parameter(format!("|x|² = {n} is not 1")));
        }
        Ok(SpherePoint { x1, x2, x3 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlanePoint {
    pub y1: f64,
    pub y2: f64,
}

impl PlanePoint {
    pub fn norm(&self) -> f64 {
        self.y1.hypot(self.y2)
    }
}

/// Projection from the north pole `(0, 0, 1)`.
pub fn stereo_project(x: &SpherePoint) -> Result<PlanePoint> {
    let d = 1.0 - x.x3;
    if !(d > 0.0) {
        return Err(Error::Pole { x3: x.x3 });
    }
    Ok(PlanePoint {
        y1: x.x1 / d,
        y2: x.x2 / d,
    })
}

pub fn inverse_stereo(y: &PlanePoint) -> SpherePoint {
    let r2 = y.y1 * y.y1 + y.y2 * y.y2;
    let q = 1.0 + r2;
    SpherePoint {
        x1: 2.0 * y.y1 / q,
        x2: 2.0 * y.y2 / q,
        x3: (r2 - 1.0) / q,
    }
}

/// `z = y / |y|²`.
pub fn kelvin(y: &PlanePoint) -> Result<PlanePoint> {
    let r2 = y.y1 * y.y1 + y.y2 * y.y2;
    if r2 == 0.0 {
        return Err(Error::Singularity);
    }
    Ok(PlanePoint {
        y1: y.y1 / r2,
        y2: y.y2 / r2,
    })
}

/// Height `x₃` of the sphere point over radius `r`.
pub fn height_of_radius(r: f64) -> f64 {
    let r2 = r * r;
    (r2 - 1.0) / (r2 + 1.0)
}

/// Conformal factor `J = 2/(1 + r²)` of the round metric in the plane.
pub fn conformal_factor(r: f64) -> f64 {
    2.0 / (1.0 + r * r)
}

/// An axially symmetric function on `S²`, given as `g(x₃)` on `[−1, 1]`.
pub trait AxisymmetricProfile: Send + Sync {
    fn value(&self, x: f64) -> f64;

    fn derivative(&self, x: f64) -> f64 {
        let h = 1e-5;
        let (a, b) = ((x - h).max(-1.0), (x + h).min(1.0));
        (self.value(b) - self.value(a)) / (b - a)
    }

    fn second_derivative(&self, x: f64) -> f64 {
        let h = 1e-4;
        let (a, b) = ((x - h).max(-1.0), (x + h).min(1.0));
        (self.derivative(b) - self.derivative(a)) / (b - a)
    }

    /// Laplace–Beltrami operator `(1 − x²) g'' − 2x g'`.
    fn sphere_laplacian(&self, x: f64) -> f64 {
        (1.0 - x * x) * self.second_derivative(x) - 2.0 * x * self.derivative(x)
    }
}

/// A constant on the sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantSphere(pub f64);

impl AxisymmetricProfile for ConstantSphere {
    fn value(&self, _x: f64) -> f64 {
        self.0
    }
    fn derivative(&self, _x: f64) -> f64 {
        0.0
    }
    fn second_derivative(&self, _x: f64) -> f64 {
        0.0
    }
}

type SphereFnBox = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// Closure-backed axisymmetric profile with optional exact derivatives.
pub struct SphereFn {
    value: SphereFnBox,
    derivative: Option<SphereFnBox>,
    second: Option<SphereFnBox>,
}

impl SphereFn {
    pub fn new(value: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        SphereFn {
            value: Box::new(value),
            derivative: None,
            second: None,
        }
    }

    pub fn with_derivatives(
        mut self,
        d1: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.derivative = Some(Box::new(d1));
        self.second = Some(Box::new(d2));
        self
    }
}

impl AxisymmetricProfile for SphereFn {
    fn value(&self, x: f64) -> f64 {
        (self.value)(x)
    }
    fn derivative(&self, x: f64) -> f64 {
        match &self.derivative {
            Some(d) => d(x),
            None => {
                let h = 1e-5;
                let (a, b) = ((x - h).max(-1.0), (x + h).min(1.0));
                ((self.value)(b) - (self.value)(a)) / (b - a)
            }
        }
    }
    fn second_derivative(&self, x: f64) -> f64 {
        match &self.second {
            Some(d) => d(x),
            None => {
                let h = 1e-4;
                let (a, b) = ((x - h).max(-1.0), (x + h).min(1.0));
                (self.derivative(b) - self.derivative(a)) / (b - a)
            }
        }
    }
}

/// `ū(r) = g(x₃(r))` and its first two radial derivatives and Laplacian.
fn pullback(u: &dyn AxisymmetricProfile, r: f64) -> (f64, f64, f64) {
    let x = height_of_radius(r);
    let q = 1.0 + r * r;
    let dxdr = 4.0 * r / (q * q);
    let j = conformal_factor(r);
    (
        u.value(x),
        u.derivative(x) * dxdr,
        j * j * u.sphere_laplacian(x),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransformReport {
    pub residual_sup: f64,
    pub mass: f64,
    pub expected_mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransformOptions {
    /// Outer radius of the check and output grid.
    pub r_max: f64,
    /// The grid is `r_i = R (2^{i/n} − 1)`, `i = 0..=n`.
    pub intervals: usize,
    pub quadrature: Quadrature,
}

impl Default for TransformOptions {
    fn default() -> Self {
        TransformOptions {
            r_max: 100.0,
            intervals: 256,
            quadrature: Quadrature::default(),
        }
    }
}

/// A planar field with value, derivative and Laplacian in closed form.
struct Transformed<F: Fn(f64) -> (f64, f64, f64)>(F);

fn sample_and_check<F>(
    field: &Transformed<F>,
    kernel: &dyn Fn(f64) -> f64,
    opts: &TransformOptions,
) -> Result<(RadialProfile, f64)>
where
    F: Fn(f64) -> (f64, f64, f64),
{
    let grid = RadialGrid::geometric(opts.r_max, opts.intervals)?;
    let mut values = Vec::with_capacity(grid.len());
    let mut derivs = Vec::with_capacity(grid.len());
    let mut residual = 0.0f64;
    for &r in grid.nodes() {
        let (v, dv, lap) = (field.0)(r);
        values.push(v);
        derivs.push(dv);
        residual = residual.max((lap + kernel(r) * v.exp()).abs());
    }
    Ok((RadialProfile::new(grid, values, Some(derivs))?, residual))
}

fn plane_mass<F: Fn(f64) -> f64>(quad: &Quadrature, density: F) -> f64 {
    quad.integrate_half_line(&|r: f64| 2.0 * PI * r * density(r), 0.0).value
}

/// `v = ū − (2/α) ln(1 + r²) + ln(8/α)` for `(α/2)Δu + e^u − 1 = 0` on the
/// sphere; `v` should solve `Δv + (1 + r²)^{2(1/α − 1)} e^v = 0`.
pub fn mt_transform(
    u: &dyn AxisymmetricProfile,
    alpha: f64,
    opts: &TransformOptions,
) -> Result<(RadialProfile, TransformReport)> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Parameter(format!("alpha must be positive, got {alpha}")));
    }
    let field = Transformed(|r: f64| {
        let (ub, dub, lap) = pullback(u, r);
        let q = 1.0 + r * r;
        (
            ub - (2.0 / alpha) * q.ln() + (8.0 / alpha).ln(),
            dub - (2.0 / alpha) * 2.0 * r / q,
            lap - (2.0 / alpha) * 4.0 / (q * q),
        )
    });
    let power = 2.0 * (1.0 / alpha - 1.0);
    let kernel = |r: f64| (1.0 + r * r).powf(power);
    let (profile, residual_sup) = sample_and_check(&field, &kernel, opts)?;
    let mass = plane_mass(&opts.quadrature, |r| {
        (power * (r * r).ln_1p() + (field.0)(r).0).exp()
    });
    Ok((
        profile,
        TransformReport {
            residual_sup,
            mass,
            expected_mass: 8.0 * PI / alpha,
        },
    ))
}

/// `v = ū − ln ∫e^u dω + ln(16π(3 + α)) − 3 ln(1 + r²)` (standard area
/// measure); `v` should solve `Δv + (1 + r²) e^v = 0` with mass
/// `4π(α + 3)`.
pub fn singular_mf_transform(
    u: &dyn AxisymmetricProfile,
    alpha: f64,
    opts: &TransformOptions,
) -> Result<(RadialProfile, TransformReport)> {
    if !(alpha > -1.0 && alpha < 1.0) {
        return Err(Error::Parameter(format!("alpha must lie in (-1, 1), got {alpha}")));
    }
    let z = 2.0 * PI * opts.quadrature.integrate(&|x: f64| u.value(x).exp(), -1.0, 1.0).value;
    let shift = (16.0 * PI * (3.0 + alpha)).ln() - z.ln();
    let field = Transformed(|r: f64| {
        let (ub, dub, lap) = pullback(u, r);
        let q = 1.0 + r * r;
        (
            ub + shift - 3.0 * q.ln(),
            dub - 6.0 * r / q,
            lap - 12.0 / (q * q),
        )
    });
    let kernel = |r: f64| 1.0 + r * r;
    let (profile, residual_sup) = sample_and_check(&field, &kernel, opts)?;
    let mass = plane_mass(&opts.quadrature, |r| ((r * r).ln_1p() + (field.0)(r).0).exp());
    Ok((
        profile,
        TransformReport {
            residual_sup,
            mass,
            expected_mass: 4.0 * PI * (alpha + 3.0),
        },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OnsagerTransform {
    pub report: TransformReport,
    pub kernel: KernelSpec,
    /// Coefficient of `v − ln(1 + r²)/4π` in `w`.
    pub coefficient: f64,
    /// Additive constant `c = ln(2α/Z) − γ`.
    pub constant: f64,
    /// `Z = ∫ J² e^{αv − γψ} dy`.
    pub normalization: f64,
    /// `min_r Δ ln K` from the re-derived closed form.
    pub min_laplacian_log_kernel: f64,
    /// The same minimum with the first denominator cubed.
    pub min_laplacian_log_kernel_cubed_variant: f64,
    /// `γ` at which `min_r Δ ln K` changes sign, found numerically.
    pub gamma_threshold: f64,
}

/// Default tolerance on the Onsager PDE residual.
pub const ONSAGER_TOL: f64 = 1e-8;

/// Map a plane solution `v` of the projected Onsager equation
/// `Δv + J² e^{αv − γψ}/Z − J²/4π = 0` (`ψ = 1 − J`) to
/// `w = α(v − ln(1 + r²)/4π) + c`, which solves `Δw + K e^w = 0` with
/// `K = 2(1 + r²)^{α/4π − 2} e^{γJ}` and `∫K e^w = α`.
pub fn onsager_transform(
    v: &dyn RadialField,
    alpha: f64,
    gamma: f64,
    tol: f64,
    opts: &TransformOptions,
) -> Result<(RadialProfile, OnsagerTransform)> {
    let kernel = KernelSpec::Onsager { alpha, gamma };
    kernel.validate()?;
    let outer = v.max_radius();
    let quad = &opts.quadrature;
    let plane_integral = |f: &dyn Fn(f64) -> f64| {
        let g = |r: f64| 2.0 * PI * r * f(r);
        if outer.is_finite() {
            let mut br = vec![0.0];
            br.extend(v.breakpoints(0.0, outer));
            br.push(outer);
            quad.integrate_with_breaks(&g, &br).value
        } else {
            quad.integrate_half_line(&g, 0.0).value
        }
    };
    let psi = |r: f64| 1.0 - conformal_factor(r);
    let z = plane_integral(&|r| {
        let j = conformal_factor(r);
        j * j * (alpha * v.value(r) - gamma * psi(r)).exp()
    });
    let c = (2.0 * alpha / z).ln() - gamma;
    let w = |r: f64| alpha * (v.value(r) - (r * r).ln_1p() / (4.0 * PI)) + c;

    let r_max = opts.r_max.min(outer);
    let grid = RadialGrid::geometric(r_max, opts.intervals)?;
    let mut values = Vec::with_capacity(grid.len());
    let mut derivs = Vec::with_capacity(grid.len());
    let mut residual_sup = 0.0f64;
    for &r in grid.nodes() {
        let j = conformal_factor(r);
        let lap_w = alpha * (v.laplacian(r) - j * j / (4.0 * PI));
        let wr = w(r);
        residual_sup = residual_sup.max((lap_w + (kernel.ln_k(r) + wr).exp()).abs());
        values.push(wr);
        derivs.push(alpha * (v.derivative(r) - 2.0 * r / ((1.0 + r * r) * 4.0 * PI)));
    }
    let mass = plane_integral(&|r| (kernel.ln_k(r) + w(r)).exp());
    let profile = RadialProfile::new(grid, values, Some(derivs))?;

    let report = OnsagerTransform {
        report: TransformReport {
            residual_sup,
            mass,
            expected_mass: alpha,
        },
        kernel,
        coefficient: alpha,
        constant: c,
        normalization: z,
        min_laplacian_log_kernel: min_over_radius(|r| onsager_laplacian_log_kernel(alpha, gamma, r)),
        min_laplacian_log_kernel_cubed_variant: min_over_radius(|r| {
            onsager_laplacian_log_kernel_cubed_variant(alpha, gamma, r)
        }),
        gamma_threshold: onsager_gamma_threshold(alpha),
    };
    if !(residual_sup <= tol) {
        return Err(Error::Inconsistency {
            residual: residual_sup,
            tolerance: tol,
            diagnostics: format!(
                "alpha = {alpha}, gamma = {gamma}, Z = {z:e}, c = {c}, mass = {mass} (expected {alpha})"
            ),
        });
    }
    Ok((profile, report))
}

/// `min_{r ≥ 0} f(r)` for the smooth, rational `Δ ln K` profiles: a
/// geometric scan followed by golden-section refinement. The value at
/// infinity (zero) is included.
pub fn min_over_radius<F: Fn(f64) -> f64>(f: F) -> f64 {
    let n = 400;
    let rs: Vec<f64> = (0..=n).map(|i| 1e3 * ((i as f64 / n as f64 * 20.0).exp2() - 1.0) / (2f64.powi(20) - 1.0)).collect();
    let (mut best_i, mut best) = (0, f(rs[0]));
    for (i, &r) in rs.iter().enumerate() {
        let v = f(r);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    let (mut a, mut b) = (rs[best_i.saturating_sub(1)], rs[(best_i + 1).min(n)]);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if f(c) < f(d) {
            b = d;
        } else {
            a = c;
        }
    }
    best.min(f(0.5 * (a + b)))
}

/// Largest `γ ≥ 0` with `min_r Δ ln K ≥ 0`, by bisection on the sign of
/// the numerical minimum. Returns `NaN` when no `γ ≥ 0` qualifies.
pub fn onsager_gamma_threshold(alpha: f64) -> f64 {
    let ok = |g: f64| min_over_radius(|r| onsager_laplacian_log_kernel(alpha, g, r)) >= 0.0;
    if !ok(0.0) {
        return f64::NAN;
    }
    let mut hi = 1.0;
    while ok(hi) {
        hi *= 2.0;
        if hi > 1e12 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ok(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial_core::ConstantField;
    use approx::assert_relative_eq;

    #[test]
    fn stereo_examples() {
        let s = SpherePoint::new(0.0, 0.0, -1.0).unwrap();
        assert_eq!(stereo_project(&s).unwrap(), PlanePoint { y1: 0.0, y2: 0.0 });
        let e = SpherePoint::new(1.0, 0.0, 0.0).unwrap();
        assert_eq!(stereo_project(&e).unwrap(), PlanePoint { y1: 1.0, y2: 0.0 });
        let n = SpherePoint::new(0.0, 1.0, 0.0).unwrap();
        assert_eq!(stereo_project(&n).unwrap(), PlanePoint { y1: 0.0, y2: 1.0 });
        let pole = SpherePoint::new(0.0, 0.0, 1.0).unwrap();
        assert!(matches!(stereo_project(&pole), Err(Error::Pole { .. })));
    }

    #[test]
    fn kelvin_examples() {
        let k = |a, b| kelvin(&PlanePoint { y1: a, y2: b }).unwrap();
        assert_eq!(k(1.0, 0.0), PlanePoint { y1: 1.0, y2: 0.0 });
        assert_eq!(k(2.0, 0.0), PlanePoint { y1: 0.5, y2: 0.0 });
        let z = k(0.0, 1.0 / 3.0);
        assert_relative_eq!(z.y2, 3.0, max_relative = 1e-15);
        assert!(matches!(
            kelvin(&PlanePoint { y1: 0.0, y2: 0.0 }),
            Err(Error::Singularity)
        ));
    }

    #[test]
    fn mt_transform_of_constant() {
        let opts = TransformOptions::default();
        for alpha in [1.0, 0.5, 2.0] {
            let (v, rep) = mt_transform(&ConstantSphere(0.0), alpha, &opts).unwrap();
            assert!(rep.residual_sup < 1e-12, "{}", rep.residual_sup);
            assert_relative_eq!(rep.mass, 8.0 * PI / alpha, max_relative = 1e-9);
            assert_eq!(rep.expected_mass, 8.0 * PI / alpha);
            if alpha == 1.0 {
                for (&r, &val) in v.grid().nodes().iter().zip(v.values()).step_by(37) {
                    let exact = -2.0 * (1.0f64 + r * r).ln() + 8f64.ln();
                    assert_relative_eq!(val, exact, max_relative = 1e-12, epsilon = 1e-14);
                }
            }
        }
    }

    #[test]
    fn singular_targets() {
        let opts = TransformOptions::default();
        for (alpha, target) in [(0.0, 12.0 * PI), (-0.5, 10.0 * PI), (0.999, 4.0 * PI * 3.999)] {
            let (_, rep) = singular_mf_transform(&ConstantSphere(0.3), alpha, &opts).unwrap();
            assert_relative_eq!(rep.expected_mass, target, max_relative = 1e-15);
            assert_relative_eq!(rep.mass, target, max_relative = 1e-9);
        }
        let (_, rep) = singular_mf_transform(&ConstantSphere(0.0), 0.0, &opts).unwrap();
        assert!(rep.residual_sup < 1e-12);
        assert!(singular_mf_transform(&ConstantSphere(0.0), 1.0, &opts).is_err());
    }

    #[test]
    fn onsager_trivial_solution() {
        let opts = TransformOptions::default();
        for alpha in [8.0 * PI, 12.0 * PI, 3.0] {
            let (w, rep) = onsager_transform(&ConstantField(0.0), alpha, 0.0, ONSAGER_TOL, &opts)
                .unwrap();
            assert!(rep.report.residual_sup <= 1e-8);
            assert_relative_eq!(rep.report.mass, alpha, max_relative = 1e-9);
            // K e^w ∝ (1 + r²)^{-2}
            let ratios: Vec<f64> = w.grid().nodes().iter().zip(w.values())
                .map(|(&r, &wr)| (rep.kernel.ln_k(r) + wr).exp() * (1.0 + r * r).powi(2))
                .collect();
            for q in &ratios {
                assert_relative_eq!(*q, ratios[0], max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn onsager_inconsistent_input_reported() {
        let opts = TransformOptions::default();
        let err = onsager_transform(&ConstantField(0.0), 8.0 * PI, 0.5, ONSAGER_TOL, &opts)
            .unwrap_err();
        assert!(matches!(err, Error::Inconsistency { .. }));
    }

    #[test]
    fn gamma_threshold_matches_closed_form() {
        for alpha in [8.0 * PI, 12.0 * PI, 16.0 * PI, 40.0] {
            let got = onsager_gamma_threshold(alpha);
            assert!((got - (alpha / (8.0 * PI) - 1.0)).abs() < 1e-9, "{alpha}: {got}");
        }
        assert!(onsager_gamma_threshold(4.0 * PI).is_nan());
    }
}
