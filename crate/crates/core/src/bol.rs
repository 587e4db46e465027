//! Bol's isoperimetric deficit on discs, the radial supersolution check,
//! superlevel-set functions, and the first weighted Dirichlet eigenvalue.

use std::f64::consts::PI;
use std::io::Write;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::quadrature::Quadrature;
use crate::radial_core::{
    boundary_weight, bubble_mass, cumulative_mass, profile_mass, LiouvilleBubble, RadialField,
    RadialGrid, EIGHT_PI,
};
use crate::tridiag::smallest_eigenvalue;

/// Relative tolerance used when flagging flux-versus-mass violations.
pub const HYPOTHESIS_TOL: f64 = 1e-8;

/// `(∫_{∂B_r} e^{p/2})² − ½ m (8π − m)` with `m = ∫_{B_r} e^p`, the mass
/// computed by quadrature.
pub fn bol_deficit(p: &dyn RadialField, r: f64, quad: &Quadrature) -> Result<f64> {
    let m = profile_mass(p, r, &KernelSpec::UNIT, quad)?;
    Ok(deficit_from(boundary_weight(p, r), m))
}

/// The same deficit for a bubble, with the mass in closed form.
pub fn bubble_bol_deficit(b: &LiouvilleBubble, r: f64) -> f64 {
    deficit_from(boundary_weight(b, r), bubble_mass(b, r))
}

fn deficit_from(length: f64, m: f64) -> f64 {
    length * length - 0.5 * m * (EIGHT_PI - m)
}

fn check_nonincreasing(values: &[f64], nodes: &[f64], strict: bool) -> Result<()> {
    for (i, w) in values.windows(2).enumerate() {
        let bad = if strict { w[1] >= w[0] } else { w[1] > w[0] };
        if bad {
            return Err(Error::hypothesis(
                if strict { "strictly decreasing" } else { "radially nonincreasing" },
                format!(
                    "p({}) = {} but p({}) = {}",
                    nodes[i],
                    w[0],
                    nodes[i + 1],
                    w[1]
                ),
            ));
        }
    }
    Ok(())
}

/// Flux versus mass at one node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeCheck {
    pub r: f64,
    /// `∫_{∂B_r} |∇p| = 2πr |p'(r)|`.
    pub flux: f64,
    /// `∫_{B_r} e^p`.
    pub mass: f64,
    /// `flux − mass`; the supersolution condition asks for `≤ 0`.
    pub slack: f64,
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub nodes: Vec<NodeCheck>,
    pub violations: usize,
    /// Nodes where the inequality holds with room to spare.
    pub strict_nodes: usize,
    pub total_mass: f64,
    pub mass_within_8pi: bool,
}

impl HypothesisReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.mass_within_8pi
    }
}

/// Check `∫_{∂B_r} |∇p| ≤ ∫_{B_r} e^p` at every grid node, and the total
/// mass against `8π`.
pub fn radial_hypothesis_check(
    p: &dyn RadialField,
    grid: &RadialGrid,
    quad: &Quadrature,
) -> Result<HypothesisReport> {
    if !p.has_derivative() {
        return Err(Error::Contract("hypothesis check needs derivative data".into()));
    }
    let r = grid.nodes();
    let values: Vec<f64> = r.iter().map(|&x| p.value(x)).collect();
    check_nonincreasing(&values, r, false)?;
    let masses = cumulative_mass(p, grid, &KernelSpec::UNIT, quad)?;
    let mut nodes = Vec::with_capacity(r.len());
    let (mut violations, mut strict_nodes) = (0, 0);
    for (&x, &m) in r.iter().zip(&masses) {
        let flux = 2.0 * PI * x * p.derivative(x).abs();
        let slack = flux - m;
        let tol = HYPOTHESIS_TOL * m.max(1.0);
        let violated = slack > tol;
        violations += violated as usize;
        strict_nodes += (slack < -tol) as usize;
        nodes.push(NodeCheck {
            r: x,
            flux,
            mass: m,
            slack,
            violated,
        });
    }
    let total_mass = *masses.last().expect("grid is non-empty");
    Ok(HypothesisReport {
        nodes,
        violations,
        strict_nodes,
        total_mass,
        mass_within_8pi: total_mass <= EIGHT_PI * (1.0 + HYPOTHESIS_TOL),
    })
}

/// One threshold of the superlevel-set functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevelSample {
    pub t: f64,
    /// `k(t) = ∫_{p>t} e^p`.
    pub k: f64,
    /// `μ(t) = |{p > t}|`.
    pub mu: f64,
    /// `e^t μ(t) − k(t) + k(t)²/8π`.
    pub monotone_q: f64,
}

impl LevelSample {
    fn new(t: f64, k: f64, radius: f64) -> Self {
        let mu = PI * radius * radius;
        LevelSample {
            t,
            k,
            mu,
            monotone_q: t.exp() * mu - k + k * k / EIGHT_PI,
        }
    }
}

/// Superlevel-set functions sampled at decreasing thresholds, from the
/// maximum of the profile down to its boundary value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelFunctions {
    pub samples: Vec<LevelSample>,
}

impl LevelFunctions {
    /// Boundary value, the lowest sampled threshold.
    pub fn boundary_threshold(&self) -> f64 {
        self.samples.last().map_or(f64::NAN, |s| s.t)
    }

    /// `q` should not decrease as `t` decreases (it vanishes on bubbles).
    pub fn q_is_monotone(&self, tol: f64) -> bool {
        self.samples
            .windows(2)
            .all(|w| w[1].monotone_q >= w[0].monotone_q - tol * w[1].k.max(1.0))
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,k,mu,monotone_q")?;
        for s in &self.samples {
            writeln!(out, "{:e},{:e},{:e},{:e}", s.t, s.k, s.mu, s.monotone_q)?;
        }
        Ok(())
    }
}

/// `k`, `μ` and `q` at the profile's node values. Superlevel sets of a
/// decreasing radial profile are the discs `B_{r_i}`.
pub fn level_functions(
    p: &dyn RadialField,
    grid: &RadialGrid,
    quad: &Quadrature,
) -> Result<LevelFunctions> {
    let r = grid.nodes();
    let values: Vec<f64> = r.iter().map(|&x| p.value(x)).collect();
    check_nonincreasing(&values, r, true)?;
    let masses = cumulative_mass(p, grid, &KernelSpec::UNIT, quad)?;
    let samples = values
        .iter()
        .zip(&masses)
        .zip(r)
        .map(|((&t, &k), &x)| LevelSample::new(t, k, x))
        .collect();
    Ok(LevelFunctions { samples })
}

/// Level functions at an arbitrary threshold `t`, inverting the decreasing
/// profile on `[0, r_max]` by bisection.
pub fn level_sample(p: &dyn RadialField, t: f64, r_max: f64, quad: &Quadrature) -> Result<LevelSample> {
    let radius = if t >= p.value(0.0) {
        0.0
    } else if t <= p.value(r_max) {
        r_max
    } else {
        let (mut lo, mut hi) = (0.0, r_max);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if p.value(mid) > t {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * r_max {
                break;
            }
        }
        0.5 * (lo + hi)
    };
    let k = profile_mass(p, radius, &KernelSpec::UNIT, quad)?;
    Ok(LevelSample::new(t, k, radius))
}

/// Minimum node count for each eigen grid.
pub const MIN_EIGEN_NODES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenReport {
    /// `λ_{1,w} = μ₁ − 1`, where `μ₁` is the first eigenvalue of
    /// `−Δφ = μ e^w φ` with Dirichlet data; `λ_{1,w} ≤ 0` exactly when the
    /// quadratic form `∫|∇φ|² − ∫φ²e^w` is not positive.
    pub lambda1w: f64,
    pub mu1: f64,
    /// Minimum of `∫|∇φ|² − ∫φ²e^w` over `∫φ² = 1`.
    pub l2_normalized: f64,
    pub mass: f64,
    pub grid_size: usize,
    /// Eigenfunctions are restricted to radial ones; for radial `w` on a
    /// disc the ground state is radial.
    pub radial_ground_state: bool,
}

/// Richardson-extrapolated first eigenvalue with coarse grid `nodes` and
/// fine grid `2 nodes − 1` (interval count doubled).
pub fn first_eigenvalue(
    w: &dyn RadialField,
    radius: f64,
    nodes: usize,
    quad: &Quadrature,
) -> Result<EigenReport> {
    if nodes < MIN_EIGEN_NODES {
        return Err(Error::Resolution {
            nodes,
            required: MIN_EIGEN_NODES,
        });
    }
    if !(radius > 0.0) || radius > w.max_radius() * (1.0 + 1e-12) {
        return Err(Error::Domain {
            radius,
            max: w.max_radius(),
        });
    }
    let radius = radius.min(w.max_radius());
    let intervals = nodes - 1;
    let (mu_c, l2_c) = discrete_eigen(w, radius, intervals);
    let (mu_f, l2_f) = discrete_eigen(w, radius, 2 * intervals);
    let mu1 = (4.0 * mu_f - mu_c) / 3.0;
    let l2 = (4.0 * l2_f - l2_c) / 3.0;
    let mut lambda1w = mu1 - 1.0;
    if !lambda1w.is_finite() {
        warn!("weight e^w vanishes numerically; reporting lambda1w = f64::MAX");
        lambda1w = f64::MAX;
    }
    Ok(EigenReport {
        lambda1w,
        mu1,
        l2_normalized: l2,
        mass: profile_mass(w, radius, &KernelSpec::UNIT, quad)?,
        grid_size: 2 * intervals + 1,
        radial_ground_state: true,
    })
}

/// Finite-volume discretization on `r_i = i h`, `i < n` (the outer node is
/// the Dirichlet boundary). Returns the generalized eigenvalue `μ₁` and the
/// `L²`-normalized form minimum.
fn discrete_eigen(w: &dyn RadialField, radius: f64, n: usize) -> (f64, f64) {
    let h = radius / n as f64;
    let wv: Vec<f64> = (0..n).map(|i| w.value(i as f64 * h)).collect();
    let wmax = wv.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    // cell areas / 2π, and the stiffness matrix (also divided by 2π)
    let vol: Vec<f64> = (0..n)
        .map(|i| if i == 0 { h * h / 8.0 } else { i as f64 * h * h })
        .collect();
    let a_diag: Vec<f64> = (0..n).map(|i| if i == 0 { 0.5 } else { 2.0 * i as f64 }).collect();
    let a_off: Vec<f64> = (0..n - 1).map(|i| -(i as f64 + 0.5)).collect();

    let floor = f64::MIN_POSITIVE * 1e10;
    let b: Vec<f64> = wv
        .iter()
        .zip(&vol)
        .map(|(&wi, &v)| ((wi - wmax).exp() * v).max(floor))
        .collect();
    let c_diag: Vec<f64> = a_diag.iter().zip(&b).map(|(a, b)| a / b).collect();
    let c_off: Vec<f64> = (0..n - 1)
        .map(|i| a_off[i] / (b[i] * b[i + 1]).sqrt())
        .collect();
    let mu = smallest_eigenvalue(&c_diag, &c_off) * (-wmax).exp();

    let d_diag: Vec<f64> = (0..n)
        .map(|i| (a_diag[i] - wv[i].exp() * vol[i]) / vol[i])
        .collect();
    let d_off: Vec<f64> = (0..n - 1)
        .map(|i| a_off[i] / (vol[i] * vol[i + 1]).sqrt())
        .collect();
    let l2 = smallest_eigenvalue(&d_diag, &d_off);
    (mu, l2)
}
