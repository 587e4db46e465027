//! Boundary-matched bubble pairs, the mass dichotomy, and the radial
//! verification pipeline for the sphere covering inequality
//! `∫(e^{w₁} + e^{w₂}) ≥ 8π`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bol::radial_hypothesis_check;
use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::quadrature::Quadrature;
use crate::radial_core::{
    boundary_weight, bubble_mass, profile_mass, Combination, LiouvilleBubble, RadialField, RadialFn,
    RadialGrid, EIGHT_PI, FOUR_PI,
};
use crate::rearrange::{gradient_comparison, rearrange_radial, RearrangeOptions};

/// Two bubbles agreeing on `∂B_R`: `λ₁λ₂ = 8/R²`, `λ₁ < λ₂`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BubblePair {
    pub lambda1: f64,
    pub lambda2: f64,
    #[serde(rename = "R")]
    pub r: f64,
    /// Common boundary value of `λ/(1 + λ²R²/8)`.
    pub kappa: f64,
}

impl BubblePair {
    pub fn bubbles(&self) -> (LiouvilleBubble, LiouvilleBubble) {
        (
            LiouvilleBubble::new(self.lambda1).expect("pair parameters are positive"),
            LiouvilleBubble::new(self.lambda2).expect("pair parameters are positive"),
        )
    }

    /// `β = (∫_{∂B_R} e^{U/2})²`, the same for both bubbles.
    pub fn boundary_beta(&self) -> f64 {
        let (u1, _) = self.bubbles();
        boundary_weight(&u1, self.r).powi(2)
    }
}

pub fn make_pair(lambda1: f64, radius: f64) -> Result<BubblePair> {
    if !(lambda1 > 0.0 && lambda1.is_finite()) || !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::Parameter(format!(
            "pair needs lambda1 > 0 and R > 0, got ({lambda1}, {radius})"
        )));
    }
    let critical = 8f64.sqrt() / radius;
    if ((lambda1 - critical) / critical).abs() <= 1e-12 {
        return Err(Error::DegeneratePair { lambda: lambda1 });
    }
    let other = 8.0 / (lambda1 * radius * radius);
    let (l1, l2) = if lambda1 < other { (lambda1, other) } else { (other, lambda1) };
    let kappa = l1 / (1.0 + l1 * l1 * radius * radius / 8.0);
    // real roots of R²λ² − (8/κ)λ + 8 = 0
    if kappa > 2f64.sqrt() / radius * (1.0 + 1e-12) {
        return Err(Error::Parameter(format!(
            "kappa = {kappa} exceeds sqrt(2)/R = {}",
            2f64.sqrt() / radius
        )));
    }
    Ok(BubblePair {
        lambda1: l1,
        lambda2: l2,
        r: radius,
        kappa,
    })
}

/// `∫_{B_R} e^{U_{λ₁}} + e^{U_{λ₂}}` in closed form.
pub fn pair_total_mass(pair: &BubblePair) -> f64 {
    let (u1, u2) = pair.bubbles();
    bubble_mass(&u1, pair.r) + bubble_mass(&u2, pair.r)
}

/// Heights `z_i = 1 − 2κ/λ_i` of the two complementary spherical caps.
pub fn cap_heights(pair: &BubblePair) -> (f64, f64) {
    (
        1.0 - 2.0 * pair.kappa / pair.lambda1,
        1.0 - 2.0 * pair.kappa / pair.lambda2,
    )
}

/// Roots of `x² − 8πx + 2β = 0`, smaller first.
pub fn quadratic_mass_roots(beta: f64) -> Result<(f64, f64)> {
    if !(beta >= 0.0) {
        return Err(Error::Parameter(format!("beta must be nonnegative, got {beta}")));
    }
    let disc = 16.0 * PI * PI - 2.0 * beta;
    if disc < -1e-12 * 16.0 * PI * PI {
        return Err(Error::ComplexRoots { beta });
    }
    let s = disc.max(0.0).sqrt();
    Ok((FOUR_PI - s, FOUR_PI + s))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Lower,
    Upper,
    Violation,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DichotomyOptions {
    /// Mass tolerance for the verdict, relative to `max(1, m)`.
    pub tol: f64,
    /// Boundary matching tolerance, relative to `max(1, |U(R)|)`.
    pub boundary_tol: f64,
    pub quadrature: Quadrature,
}

impl Default for DichotomyOptions {
    fn default() -> Self {
        DichotomyOptions {
            tol: 1e-6,
            boundary_tol: 1e-6,
            quadrature: Quadrature::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyReport {
    pub m: f64,
    pub m1: f64,
    pub m2: f64,
    pub beta_b: f64,
    /// Roots of `x² − 8πx + 2β_b`; they reproduce `(m1, m2)`.
    pub roots: (f64, f64),
    pub verdict: Verdict,
    /// Whether the flux-versus-mass hypothesis held at every node.
    pub hypothesis_passed: bool,
    pub hypothesis_violations: usize,
}

/// Which side of the mass gap `(m1, m2)` a profile matching the pair on
/// `∂B_R` falls on.
pub fn dichotomy_check(
    psi: &dyn RadialField,
    grid: &RadialGrid,
    pair: &BubblePair,
    opts: &DichotomyOptions,
) -> Result<DichotomyReport> {
    let radius = pair.r;
    if ((grid.outer_radius() - radius) / radius).abs() > 1e-10 {
        return Err(Error::Contract(format!(
            "profile grid ends at {} but the pair matches at R = {radius}",
            grid.outer_radius()
        )));
    }
    let (u1, u2) = pair.bubbles();
    let target = u1.value(radius);
    let got = psi.value(radius);
    if (got - target).abs() > opts.boundary_tol * target.abs().max(1.0) {
        return Err(Error::Contract(format!(
            "boundary mismatch: psi(R) = {got}, U(R) = {target}"
        )));
    }
    let m = profile_mass(psi, radius, &KernelSpec::UNIT, &opts.quadrature)?;
    let (m1, m2) = (bubble_mass(&u1, radius), bubble_mass(&u2, radius));
    let beta_b = boundary_weight(psi, radius).powi(2);
    let roots = quadratic_mass_roots(beta_b)?;
    let (hypothesis_passed, hypothesis_violations) =
        match radial_hypothesis_check(psi, grid, &opts.quadrature) {
            Ok(rep) => (rep.passed(), rep.violations),
            Err(Error::Hypothesis { .. }) => (false, 0),
            Err(e) => return Err(e),
        };
    let tol = opts.tol * m.max(1.0);
    let verdict = if m <= m1 + tol {
        Verdict::Lower
    } else if m >= m2 - tol {
        Verdict::Upper
    } else {
        Verdict::Violation
    };
    Ok(DichotomyReport {
        m,
        m1,
        m2,
        beta_b,
        roots,
        verdict,
        hypothesis_passed,
        hypothesis_violations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SciOptions {
    /// Tolerance on the sign conditions `f₂ ≥ f₁ ≥ 0`, `w₂ ≥ w₁`, and the
    /// boundary match.
    pub order_tol: f64,
    /// Tolerance on `|Δw_i + e^{w_i} − f_i|`, relative to
    /// `max(1, e^{w_i}, |f_i|)`.
    pub pde_tol: f64,
    pub quadrature: Quadrature,
    pub dichotomy: DichotomyOptions,
    pub min_levels: usize,
}

impl Default for SciOptions {
    fn default() -> Self {
        SciOptions {
            order_tol: 1e-9,
            pde_tol: 1e-6,
            quadrature: Quadrature::default(),
            dichotomy: DichotomyOptions::default(),
            min_levels: 128,
        }
    }
}

/// Diagnostics of the rearrangement step.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineDiagnostics {
    /// Bubble scale with `∫_{B₁} e^{U_λ} = ∫ e^{w₁}`.
    pub lambda1: f64,
    pub pair: BubblePair,
    pub equimeasurability_residual: f64,
    pub min_gradient_difference: f64,
    pub dichotomy: DichotomyReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SciReport {
    pub mass_w1: f64,
    pub mass_w2: f64,
    pub total_mass: f64,
    pub bound: f64,
    pub slack: f64,
    /// Set when `∫e^{w₁} ≥ 4π`, where the bound follows from `w₂ ≥ w₁`
    /// alone and no rearrangement is needed.
    pub trivial: bool,
    pub pipeline: Option<PipelineDiagnostics>,
}

impl SciReport {
    /// Masses in the `Δv + e^{2v} = 0` normalization, where the bound is
    /// `4π`: `∫e^{2v} = ½∫e^u`.
    pub fn v_normalized(&self) -> (f64, f64) {
        (u_to_v_mass(self.total_mass), u_to_v_mass(self.bound))
    }
}

/// `u = 2v + ln 2` halves every mass.
pub fn u_to_v_mass(mass: f64) -> f64 {
    0.5 * mass
}

fn check_hypotheses(
    w1: &dyn RadialField,
    w2: &dyn RadialField,
    f1: &dyn RadialField,
    f2: &dyn RadialField,
    grid: &RadialGrid,
    opts: &SciOptions,
) -> Result<()> {
    let tol = opts.order_tol;
    for &r in grid.nodes() {
        let (a, b) = (f1.value(r), f2.value(r));
        if a < -tol || b < a - tol {
            return Err(Error::hypothesis(
                "f2 >= f1 >= 0",
                format!("at r = {r}: f1 = {a:e}, f2 = {b:e}"),
            ));
        }
        let (v1, v2) = (w1.value(r), w2.value(r));
        if v2 < v1 - tol * v1.abs().max(1.0) {
            return Err(Error::hypothesis(
                "w2 >= w1",
                format!("at r = {r}: w1 = {v1}, w2 = {v2}"),
            ));
        }
        for (name, w, f) in [("w1", w1, f1), ("w2", w2, f2)] {
            let fv = f.value(r);
            let e = w.value(r).exp();
            let res = w.laplacian(r) + e - fv;
            if res.abs() > opts.pde_tol * e.max(fv.abs()).max(1.0) {
                return Err(Error::hypothesis(
                    format!("laplacian({name}) + e^{name} = f"),
                    format!("residual {res:e} at r = {r}"),
                ));
            }
        }
    }
    let outer = grid.outer_radius();
    let (b1, b2) = (w1.value(outer), w2.value(outer));
    if (b1 - b2).abs() > tol * b1.abs().max(1.0) {
        return Err(Error::hypothesis(
            "w1 = w2 on the boundary",
            format!("w1(R) = {b1}, w2(R) = {b2}"),
        ));
    }
    Ok(())
}

/// Run the covering-inequality pipeline on radial data over `B_R`, with
/// `R` the outer grid radius: normalize `w₁`'s mass onto a bubble over
/// `B₁`, rearrange `φ = w₂ − w₁`, form `ψ = U_{λ₁} + φ*`, and locate `ψ`
/// in the dichotomy of the matched pair.
pub fn sci_verify_radial(
    w1: &dyn RadialField,
    w2: &dyn RadialField,
    f1: &dyn RadialField,
    f2: &dyn RadialField,
    grid: &RadialGrid,
    opts: &SciOptions,
) -> Result<SciReport> {
    check_hypotheses(w1, w2, f1, f2, grid, opts)?;
    let radius = grid.outer_radius();
    let quad = &opts.quadrature;
    let mass_w1 = profile_mass(w1, radius, &KernelSpec::UNIT, quad)?;
    let mass_w2 = profile_mass(w2, radius, &KernelSpec::UNIT, quad)?;
    let total_mass = mass_w1 + mass_w2;
    let mut report = SciReport {
        mass_w1,
        mass_w2,
        total_mass,
        bound: EIGHT_PI,
        slack: total_mass - EIGHT_PI,
        trivial: false,
        pipeline: None,
    };
    // near 4π the matched pair degenerates; the bound is then immediate
    if mass_w1 >= FOUR_PI * (1.0 - 1e-9) {
        report.trivial = true;
        return Ok(report);
    }

    let lambda1 = (8.0 * mass_w1 / (EIGHT_PI - mass_w1)).sqrt();
    let phi = Combination::difference(w2, w1);
    let ropts = RearrangeOptions {
        min_levels: opts.min_levels,
        target_radius: Some(1.0),
        ..Default::default()
    };
    let star = rearrange_radial(&phi, w1, grid, lambda1, &ropts)?;
    let grad = gradient_comparison(&phi, w1, grid, &star, quad)?;
    let bubble = LiouvilleBubble::new(lambda1)?;
    let psi = Combination::sum(&bubble, &star.profile);
    let pair = make_pair(lambda1, 1.0)?;
    let dichotomy = dichotomy_check(&psi, star.profile.grid(), &pair, &opts.dichotomy)?;
    report.pipeline = Some(PipelineDiagnostics {
        lambda1,
        pair,
        equimeasurability_residual: star.equimeasurability_residual,
        min_gradient_difference: grad.min_difference,
        dichotomy,
    });
    Ok(report)
}

/// `U_λ + ε (z(R) − z(r))` with `z = (s − 1)/(s + 1)`, `s = λ²r²/8`, the
/// height function of the bubble's sphere. Since `Δz + e^{U_λ} z = 0`, the
/// source `Δw + e^w` is `e^{U_λ}(e^x − 1 − x + ε z(R))` with
/// `x = ε (z(R) − z(r))`, and it is positive when `ε > 0` and `λ²R² > 8`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeightPerturbedBubble {
    pub bubble: LiouvilleBubble,
    pub eps: f64,
    pub radius: f64,
}

impl HeightPerturbedBubble {
    pub fn new(bubble: LiouvilleBubble, eps: f64, radius: f64) -> Self {
        HeightPerturbedBubble { bubble, eps, radius }
    }

    fn s(&self, r: f64) -> f64 {
        let l = self.bubble.lambda();
        l * l * r * r / 8.0
    }

    fn height(&self, r: f64) -> f64 {
        let s = self.s(r);
        (s - 1.0) / (s + 1.0)
    }

    fn height_slope(&self, r: f64) -> f64 {
        let l = self.bubble.lambda();
        let q = 1.0 + self.s(r);
        (l * l * r / 2.0) / (q * q)
    }

    /// `Δw + e^w`.
    pub fn source(&self, r: f64) -> f64 {
        let x = self.eps * (self.height(self.radius) - self.height(r));
        let density = self.bubble.density(r);
        density * (x.exp_m1() - x + self.eps * self.height(self.radius))
    }

    pub fn source_field(&self) -> RadialFn {
        let me = *self;
        RadialFn::new(move |r| me.source(r))
    }
}

impl RadialField for HeightPerturbedBubble {
    fn value(&self, r: f64) -> f64 {
        self.bubble.value(r) + self.eps * (self.height(self.radius) - self.height(r))
    }

    fn derivative(&self, r: f64) -> f64 {
        self.bubble.derivative(r) - self.eps * self.height_slope(r)
    }

    fn laplacian(&self, r: f64) -> f64 {
        let d = self.bubble.density(r);
        -d + self.eps * d * self.height(r)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial_core::{ConstantField, RadialProfile};
    use approx::assert_relative_eq;

    #[test]
    fn pair_examples() {
        let p = make_pair(4.0 - 2.0 * 2f64.sqrt(), 1.0).unwrap();
        assert_relative_eq!(p.lambda2, 4.0 + 2.0 * 2f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(p.kappa, 1.0, max_relative = 1e-14);
        let (z1, z2) = cap_heights(&p);
        assert_relative_eq!(z2, 0.5 * 2f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(z1, -0.5 * 2f64.sqrt(), max_relative = 1e-14);

        let p = make_pair(1.0, 1.0).unwrap();
        assert_relative_eq!(p.lambda2, 8.0, max_relative = 1e-15);
        let (z1, z2) = cap_heights(&p);
        assert_relative_eq!(z1, -7.0 / 9.0, max_relative = 1e-14);
        assert_relative_eq!(z2, 7.0 / 9.0, max_relative = 1e-14);

        let p = make_pair(1.0, 2.0).unwrap();
        assert_relative_eq!(p.lambda2, 2.0, max_relative = 1e-15);
        assert_relative_eq!(p.kappa, 2.0 / 3.0, max_relative = 1e-14);
        let other = p.lambda2 / (1.0 + p.lambda2.powi(2) * 4.0 / 8.0);
        assert_relative_eq!(other, p.kappa, max_relative = 1e-14);
    }

    #[test]
    fn labels_are_ordered() {
        let p = make_pair(8.0, 1.0).unwrap();
        assert_eq!((p.lambda1, p.lambda2), (1.0, 8.0));
    }

    #[test]
    fn degenerate_pair_rejected() {
        assert!(matches!(
            make_pair(8f64.sqrt(), 1.0),
            Err(Error::DegeneratePair { .. })
        ));
    }

    #[test]
    fn degenerate_limit_has_equatorial_caps() {
        let p = make_pair(8f64.sqrt() * (1.0 + 1e-9), 1.0).unwrap();
        let (z1, z2) = cap_heights(&p);
        assert!(z1.abs() < 1e-8 && z2.abs() < 1e-8);
        assert_relative_eq!(pair_total_mass(&p), EIGHT_PI, max_relative = 1e-14);
    }

    #[test]
    fn roots_examples() {
        let (a, b) = quadratic_mass_roots(8.0 * PI * PI).unwrap();
        assert_relative_eq!(a, FOUR_PI, max_relative = 1e-12);
        assert_relative_eq!(b, FOUR_PI, max_relative = 1e-12);
        let (a, b) = quadratic_mass_roots(6.0 * PI * PI).unwrap();
        assert_relative_eq!(a, 2.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(b, 6.0 * PI, max_relative = 1e-14);
        assert_eq!(quadratic_mass_roots(0.0).unwrap(), (0.0, EIGHT_PI));
        assert!(matches!(
            quadratic_mass_roots(9.0 * PI * PI),
            Err(Error::ComplexRoots { .. })
        ));
    }

    #[test]
    fn quadrature_pair_mass() {
        let p = make_pair(1.0, 1.0).unwrap();
        let (u1, u2) = p.bubbles();
        let q = Quadrature::default();
        let m = profile_mass(&u1, 1.0, &KernelSpec::UNIT, &q).unwrap()
            + profile_mass(&u2, 1.0, &KernelSpec::UNIT, &q).unwrap();
        assert_relative_eq!(m, EIGHT_PI, max_relative = 1e-9);
    }

    #[test]
    fn dichotomy_on_pair_bubbles() {
        let p = make_pair(1.0, 1.0).unwrap();
        let (u1, u2) = p.bubbles();
        let grid = RadialGrid::uniform(1.0, 801).unwrap();
        let opts = DichotomyOptions::default();
        let lo = dichotomy_check(&RadialProfile::sample(&u1, &grid).unwrap(), &grid, &p, &opts)
            .unwrap();
        assert_eq!(lo.verdict, Verdict::Lower);
        assert!((lo.m - lo.m1).abs() < 1e-8);
        let hi = dichotomy_check(&RadialProfile::sample(&u2, &grid).unwrap(), &grid, &p, &opts)
            .unwrap();
        assert_eq!(hi.verdict, Verdict::Upper);
        assert!((hi.m - hi.m2).abs() < 1e-8, "{}", hi.m - hi.m2);
        assert!((hi.roots.0 - hi.m1).abs() < 1e-10);
        assert!((hi.roots.1 - hi.m2).abs() < 1e-10);
        assert!(hi.hypothesis_passed);
    }

    #[test]
    fn dichotomy_boundary_mismatch() {
        let p = make_pair(1.0, 1.0).unwrap();
        let grid = RadialGrid::uniform(1.0, 64).unwrap();
        let err = dichotomy_check(&ConstantField(3.0), &grid, &p, &DichotomyOptions::default())
            .unwrap_err();
        assert!(matches!(err, Error::Contract(_)));
    }

    #[test]
    fn height_perturbation_formulas() {
        let b = LiouvilleBubble::new(5.0).unwrap();
        let w = HeightPerturbedBubble::new(b, 0.3, 1.0);
        let fd = RadialFn::new(move |r| w.value(r));
        for r in [0.1, 0.4, 0.9] {
            assert_relative_eq!(w.derivative(r), fd.derivative(r), max_relative = 1e-7);
            assert_relative_eq!(w.laplacian(r), fd.laplacian(r), max_relative = 1e-4);
            assert_relative_eq!(
                w.source(r),
                w.laplacian(r) + w.value(r).exp(),
                max_relative = 1e-10
            );
            assert!(w.source(r) > 0.0);
        }
        assert_eq!(w.value(1.0), b.value(1.0));
    }

    #[test]
    fn equality_case_pipeline() {
        let p = make_pair(1.3, 1.4).unwrap();
        let (ua, ub) = p.bubbles();
        let grid = RadialGrid::uniform(1.4, 401).unwrap();
        let zero = ConstantField(0.0);
        let rep = sci_verify_radial(&ua, &ub, &zero, &zero, &grid, &SciOptions::default()).unwrap();
        assert!(rep.slack.abs() < 1e-8);
        let pipe = rep.pipeline.unwrap();
        assert_relative_eq!(pipe.lambda1, 1.3 * 1.4, max_relative = 1e-12);
        assert_eq!(pipe.dichotomy.verdict, Verdict::Upper);
        assert!(pipe.min_gradient_difference > -1e-8);
    }

    #[test]
    fn strict_case_pipeline() {
        let p = make_pair(0.9, 1.0).unwrap();
        let (ua, ub) = p.bubbles();
        let w2 = HeightPerturbedBubble::new(ub, 0.2, 1.0);
        let f2 = w2.source_field();
        let grid = RadialGrid::uniform(1.0, 401).unwrap();
        let rep = sci_verify_radial(&ua, &w2, &ConstantField(0.0), &f2, &grid, &SciOptions::default())
            .unwrap();
        assert!(rep.slack > 0.0);
        assert_eq!(rep.pipeline.unwrap().dichotomy.verdict, Verdict::Upper);
    }

    #[test]
    fn negative_source_rejected() {
        let p = make_pair(1.0, 1.0).unwrap();
        let (ua, ub) = p.bubbles();
        let grid = RadialGrid::uniform(1.0, 64).unwrap();
        let err = sci_verify_radial(
            &ua,
            &ub,
            &ConstantField(0.0),
            &ConstantField(-0.1),
            &grid,
            &SciOptions::default(),
        )
        .unwrap_err();
        match err {
            Error::Hypothesis { clause, .. } => assert_eq!(clause, "f2 >= f1 >= 0"),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn normalizations_differ_by_two() {
        let r = SciReport {
            mass_w1: 1.0,
            mass_w2: 2.0,
            total_mass: 3.0,
            bound: EIGHT_PI,
            slack: 3.0 - EIGHT_PI,
            trivial: false,
            pipeline: None,
        };
        assert_eq!(r.v_normalized(), (1.5, FOUR_PI));
    }
}
