//! Radial shooting for `Δv + k(r) e^v = 0`, total mass `β`, the Pohozaev
//! identity, existence-range sweeps, and the Moser–Trudinger functional on
//! axisymmetric profiles.
//!
//! The radial ODE is integrated in `s = ln r` with state
//! `(v, p = r v', M, P)`, where `M = ∫ k e^v r dr` and
//! `P = ∫ (2k + k' r) e^v r dr`. In these variables every component is
//! smooth and `p = −M` holds identically.

use std::f64::consts::PI;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use crate::kernel::{KernelProps, KernelSpec};

use crate::error::{Error, Result};
use crate::ode::{self, OdeOptions, Stop};
use crate::quadrature::gauss_legendre;
use crate::radial_core::{RadialGrid, RadialProfile};
use crate::transforms::{AxisymmetricProfile, SphereFn};

/// `(k, k', Δ ln k)` at radius `r`.
pub fn kernel_props(k: &KernelSpec, r: f64) -> KernelProps {
    k.props(r.abs())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootOptions {
    /// Radius up to which the profile is stored; the ODE continues past it
    /// until the remaining mass is negligible.
    pub r_max: f64,
    /// Relative tolerance of the Runge–Kutta stepper.
    pub tol: f64,
    /// Start radius of the series expansion at the origin.
    pub r0: f64,
    /// Stop once the estimated mass beyond the current radius is below
    /// `tail_tol · M`.
    pub tail_tol: f64,
    /// Hard limit on `ln r`.
    pub s_limit: f64,
    /// Largest step in `ln r`.
    pub max_step: f64,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions {
            r_max: 1e3,
            tol: 1e-10,
            r0: 1e-6,
            tail_tol: 1e-13,
            // r² must stay finite inside the kernels
            s_limit: 300.0,
            // keeps the cubic Hermite profile accurate to ~1e-8
            max_step: 0.02,
        }
    }
}

/// One accepted integration point, in `s = ln r`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Node {
    s: f64,
    v: f64,
    p: f64,
    q: f64,
    m: f64,
    pz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShootResult {
    pub kernel: KernelSpec,
    pub a0: f64,
    #[serde(skip)]
    pub profile: Option<RadialProfile>,
    /// `−lim r v'`, including the estimated tail past the last step.
    pub beta: f64,
    /// `(1/2π)∫ k e^v` by independent quadrature of the trajectory.
    pub beta_mass: f64,
    /// `|∫(2k + k' r) e^v − πβ²|`.
    pub pohozaev_residual: f64,
    /// Whether `β > 2l + 2`, so that the identity is expected to hold.
    pub pohozaev_applicable: bool,
    /// Least-squares coefficient of `−ln r` over the last decade below
    /// `r_max`.
    pub tail_slope: f64,
    /// Radius where integration stopped.
    pub r_end: f64,
    /// False when the tail criterion was not met before the radius limit.
    pub converged: bool,
    pub warnings: Vec<String>,
    #[serde(skip)]
    nodes: Vec<Node>,
}

impl ShootResult {
    pub fn profile(&self) -> &RadialProfile {
        self.profile.as_ref().expect("shoot always stores a profile")
    }

    /// `(r, v, v')` rows of the stored profile.
    pub fn rows(&self) -> Vec<(f64, f64, f64)> {
        let p = self.profile();
        let d = p.derivatives().expect("shoot stores derivatives");
        p.grid()
            .nodes()
            .iter()
            .zip(p.values())
            .zip(d)
            .map(|((&r, &v), &dv)| (r, v, dv))
            .collect()
    }

    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "r,v,dv")?;
        for (r, v, dv) in self.rows() {
            writeln!(out, "{r:e},{v:e},{dv:e}")?;
        }
        Ok(())
    }
}

fn rhs(k: &KernelSpec, s: f64, y: &[f64; 4]) -> [f64; 4] {
    let r = s.exp();
    let q = (2.0 * s + k.ln_k(r) + y[0]).exp();
    [y[1], -q, q, q * (2.0 + k.log_slope(r))]
}

/// Decay rate of `q = k e^v r²` in `s`, i.e. `−d ln q / ds`.
fn decay_rate(k: &KernelSpec, n: &Node) -> f64 {
    -(2.0 + k.log_slope(n.s.exp()) + n.p)
}

/// Mass still to come past `n`. With the kernel's log slope frozen at
/// its limit `2l`, `q + ρ²/2` is conserved along the flow (`ρ` the decay
/// rate), so the remaining mass is `√(ρ² + 2q) − ρ`.
fn tail_mass(k: &KernelSpec, n: &Node) -> f64 {
    let rho = decay_rate(k, n);
    let root = (rho * rho + 2.0 * n.q).sqrt();
    if rho > 0.0 {
        2.0 * n.q / (root + rho)
    } else {
        root - rho
    }
}

fn to_node(k: &KernelSpec, s: f64, y: &[f64; 4]) -> Node {
    let q = rhs(k, s, y)[2];
    Node {
        s,
        v: y[0],
        p: y[1],
        q,
        m: y[2],
        pz: y[3],
    }
}

/// Solve `v'' + v'/r + k e^v = 0`, `v(0) = a0`, `v'(0) = 0`.
pub fn shoot(k: &KernelSpec, a0: f64, opts: &ShootOptions) -> Result<ShootResult> {
    k.validate()?;
    if !a0.is_finite() {
        return Err(Error::Parameter(format!("center value must be finite, got {a0}")));
    }
    if !(opts.tol > 0.0) || !(opts.r_max > opts.r0) || !(opts.r0 > 0.0) {
        return Err(Error::Parameter(format!(
            "need tol > 0 and 0 < r0 < r_max, got tol = {}, r0 = {}, r_max = {}",
            opts.tol, opts.r0, opts.r_max
        )));
    }
    let r0 = opts.r0;
    let c0 = k.k(0.0) * a0.exp() * r0 * r0;
    let y0 = [a0 - c0 / 4.0, -c0 / 2.0, c0 / 2.0, c0];
    let s0 = r0.ln();
    let s_max = opts.r_max.ln();
    let ode_opts = OdeOptions {
        rel_tol: opts.tol,
        abs_tol: opts.tol * 1e-2,
        max_step: opts.max_step,
        ..OdeOptions::default()
    };
    let f = |s: f64, y: &[f64; 4]| rhs(k, s, y);

    let check = |stop: Stop, last: f64| -> Result<()> {
        let reason = match stop {
            Stop::NonFinite => "state became non-finite",
            Stop::StepCollapse => "step size collapsed",
            Stop::StepLimit => "step limit reached",
            Stop::End | Stop::Requested => return Ok(()),
        };
        Err(Error::Divergence {
            radius: last.exp(),
            reason: reason.to_string(),
        })
    };

    let inner = ode::integrate(f, s0, y0, s_max, &ode_opts, |_| false);
    let last = inner.samples.last().expect("trajectory has a start point");
    check(inner.stop, last.t)?;
    let mut nodes: Vec<Node> = inner.samples.iter().map(|x| to_node(k, x.t, &x.y)).collect();

    let limit_slope = k.asymptotic_exponent();
    // stop when the tail is negligible, or when the kernel has reached its
    // limiting log slope so that the tail closure is exact
    let tail_small = |n: &Node| {
        if decay_rate(k, n) <= 0.0 {
            return false;
        }
        let asymptotic = n.s >= s_max + 3.0 * std::f64::consts::LN_10
            && (k.log_slope(n.s.exp()) - limit_slope).abs() <= 1e-13;
        asymptotic || tail_mass(k, n) <= opts.tail_tol * n.m
    };
    let mut converged = tail_small(nodes.last().unwrap());
    if !converged {
        let outer = ode::integrate(f, s_max, last.y, opts.s_limit, &ode_opts, |x| {
            tail_small(&to_node(k, x.t, &x.y))
        });
        let end = outer.samples.last().unwrap();
        check(outer.stop, end.t)?;
        converged = outer.stop == Stop::Requested;
        nodes.extend(outer.samples.iter().skip(1).map(|x| to_node(k, x.t, &x.y)));
    }
    let end = *nodes.last().unwrap();
    let tail = tail_mass(k, &end);
    let beta = -end.p + tail;

    let mut warnings = Vec::new();
    if !converged {
        let msg = format!(
            "mass tail not resolved by r = {:e} (remaining estimate {:e})",
            end.s.exp(),
            tail
        );
        warn!("{msg}");
        warnings.push(msg);
    }

    // stored profile: origin plus every step inside r_max
    let mut rs = vec![0.0];
    let mut vs = vec![a0];
    let mut ds = vec![0.0];
    for n in nodes.iter().filter(|n| n.s <= s_max + 1e-12) {
        let r = n.s.exp();
        if r > *rs.last().unwrap() {
            rs.push(r);
            vs.push(n.v);
            ds.push(n.p / r);
        }
    }
    let profile = RadialProfile::new(RadialGrid::new(rs)?, vs, Some(ds))?;

    let tail_slope = fit_tail_slope(&nodes, s_max);
    let mut res = ShootResult {
        kernel: *k,
        a0,
        profile: Some(profile),
        beta,
        beta_mass: f64::NAN,
        pohozaev_residual: f64::NAN,
        pohozaev_applicable: beta > 2.0 * k.l() + 2.0,
        tail_slope,
        r_end: end.s.exp(),
        converged,
        warnings,
        nodes,
    };
    let (mass, pz) = requadrature(&res);
    res.beta_mass = mass;
    res.pohozaev_residual = (2.0 * PI * pz - PI * beta * beta).abs();
    if !res.pohozaev_applicable {
        res.warnings.push(format!(
            "beta = {beta} <= 2l + 2 = {}: Pohozaev identity not applicable",
            2.0 * k.l() + 2.0
        ));
    }
    if (mass - beta).abs() > 1e-6 * beta {
        let msg = format!("beta estimators disagree: {beta} vs mass {mass}");
        warn!("{msg}");
        res.warnings.push(msg);
    }
    Ok(res)
}

fn fit_tail_slope(nodes: &[Node], s_max: f64) -> f64 {
    let lo = s_max - std::f64::consts::LN_10;
    let pts: Vec<(f64, f64)> = nodes
        .iter()
        .filter(|n| n.s >= lo && n.s <= s_max + 1e-12)
        .map(|n| (n.s, n.v))
        .collect();
    if pts.len() < 2 {
        return nodes.last().map_or(f64::NAN, |n| -n.p);
    }
    let nf = pts.len() as f64;
    let sx = pts.iter().map(|p| p.0).sum::<f64>() / nf;
    let sy = pts.iter().map(|p| p.1).sum::<f64>() / nf;
    let (mut num, mut den) = (0.0, 0.0);
    for &(x, y) in &pts {
        num += (x - sx) * (y - sy);
        den += (x - sx) * (x - sx);
    }
    -num / den
}

/// Re-integrate `∫ k e^v r dr` and `∫ (2k + k'r) e^v r dr` by Gauss–Legendre
/// over a quintic Hermite reconstruction of `v(s)` on each step, plus the
/// closed-form tail past the last step.
fn requadrature(res: &ShootResult) -> (f64, f64) {
    let k = &res.kernel;
    let (x, w) = gauss_legendre(8);
    let nodes = &res.nodes;
    let first = nodes[0];
    let mut mass = first.m;
    let mut pz = first.pz;
    for pair in nodes.windows(2) {
        let (a, b) = (pair[0], pair[1]);
        let h = b.s - a.s;
        for (&xi, &wi) in x.iter().zip(&w) {
            let t = 0.5 * (xi + 1.0);
            let t2 = t * t;
            let t3 = t2 * t;
            let t4 = t3 * t;
            let t5 = t4 * t;
            let h0 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
            let h1 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
            let h2 = 0.5 * (t2 - 3.0 * t3 + 3.0 * t4 - t5);
            let h3 = 0.5 * (t3 - 2.0 * t4 + t5);
            let h4 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
            let h5 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
            let v = h0 * a.v
                + h1 * h * a.p
                + h2 * h * h * (-a.q)
                + h3 * h * h * (-b.q)
                + h4 * h * b.p
                + h5 * b.v;
            let s = a.s + t * h;
            let r = s.exp();
            let q = (2.0 * s + k.ln_k(r) + v).exp();
            let wt = 0.5 * h * wi;
            mass += wt * q;
            pz += wt * q * (2.0 + k.log_slope(r));
        }
    }
    let end = nodes.last().unwrap();
    {
        let tail = tail_mass(k, end);
        mass += tail;
        pz += tail * (2.0 + k.log_slope(end.s.exp()));
    }
    (mass, pz)
}

/// Pohozaev residual `|∫(2k + k'r) e^v dy − πβ²|` of a converged solve.
pub fn pohozaev_residual(res: &ShootResult, k: &KernelSpec) -> Result<f64> {
    if *k != res.kernel {
        return Err(Error::Contract(format!(
            "result was computed for {:?}, not {:?}",
            res.kernel, k
        )));
    }
    let threshold = 2.0 * k.l() + 2.0;
    if !(res.beta > threshold) {
        return Err(Error::IdentityNotApplicable {
            beta: res.beta,
            threshold,
        });
    }
    let (_, pz) = requadrature(res);
    Ok((2.0 * PI * pz - PI * res.beta * res.beta).abs())
}

/// Center-value bracket and tolerances for [`target_beta`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetOptions {
    pub a0_min: f64,
    pub a0_max: f64,
    pub beta_tol: f64,
    pub max_iter: usize,
}

impl Default for TargetOptions {
    fn default() -> Self {
        TargetOptions {
            a0_min: -20.0,
            a0_max: 20.0,
            beta_tol: 1e-8,
            max_iter: 200,
        }
    }
}

/// Bisection on `a0` for a solution with total mass `β = target`, relying
/// on `β` decreasing in `a0` across the bracket.
pub fn target_beta(
    k: &KernelSpec,
    target: f64,
    shoot_opts: &ShootOptions,
    opts: &TargetOptions,
) -> Result<ShootResult> {
    let mut lo = shoot(k, opts.a0_min, shoot_opts)?;
    let mut hi = shoot(k, opts.a0_max, shoot_opts)?;
    if !(lo.beta >= target && target >= hi.beta) {
        return Err(Error::Parameter(format!(
            "beta = {target} not bracketed: beta({}) = {}, beta({}) = {}",
            opts.a0_min, lo.beta, opts.a0_max, hi.beta
        )));
    }
    for _ in 0..opts.max_iter {
        let best = if (lo.beta - target).abs() < (hi.beta - target).abs() {
            &lo
        } else {
            &hi
        };
        if (best.beta - target).abs() < opts.beta_tol || hi.a0 - lo.a0 < 1e-13 {
            break;
        }
        let mid = shoot(k, 0.5 * (lo.a0 + hi.a0), shoot_opts)?;
        if mid.beta >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(if (lo.beta - target).abs() < (hi.beta - target).abs() {
        lo
    } else {
        hi
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub a0: f64,
    pub beta: f64,
    pub pohozaev_residual: f64,
    pub tail_slope: f64,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub kernel: KernelSpec,
    pub rows: Vec<SweepRow>,
    pub min_beta: f64,
    pub max_beta: f64,
    /// Open interval of `β` expected for radial solutions of this kernel.
    pub interval: Option<(f64, f64)>,
    pub all_within: bool,
    /// `β` nonincreasing along the sweep (an observation).
    pub monotone: bool,
    /// Solves with `β > 2l + 2`.
    pub above_decay_threshold: usize,
    pub failures: usize,
}

impl SweepReport {
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "a0,beta,pohozaev_residual,tail_slope")?;
        for r in &self.rows {
            writeln!(out, "{:e},{:e},{:e},{:e}", r.a0, r.beta, r.pohozaev_residual, r.tail_slope)?;
        }
        Ok(())
    }
}

/// `n` evenly spaced center values on `[a, b]`.
pub fn a0_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// `β(a0)` over the grid; solves run in parallel, rows keep grid order, and
/// failed solves are recorded rather than aborting the sweep.
pub fn beta_sweep(k: &KernelSpec, a0s: &[f64], opts: &ShootOptions) -> Result<SweepReport> {
    k.validate()?;
    let rows: Vec<SweepRow> = a0s
        .par_iter()
        .map(|&a0| match shoot(k, a0, opts) {
            Ok(res) => SweepRow {
                a0,
                beta: res.beta,
                pohozaev_residual: res.pohozaev_residual,
                tail_slope: res.tail_slope,
                error: None,
            },
            Err(e) => SweepRow {
                a0,
                beta: f64::NAN,
                pohozaev_residual: f64::NAN,
                tail_slope: f64::NAN,
                error: Some(e.to_string()),
            },
        })
        .collect();
    let ok: Vec<&SweepRow> = rows.iter().filter(|r| r.error.is_none()).collect();
    let min_beta = ok.iter().map(|r| r.beta).fold(f64::INFINITY, f64::min);
    let max_beta = ok.iter().map(|r| r.beta).fold(f64::NEG_INFINITY, f64::max);
    let interval = k.radial_beta_interval();
    let all_within = match interval {
        Some((a, b)) if a < b => ok.iter().all(|r| r.beta > a && r.beta < b),
        // degenerate interval: the exact value
        Some((a, _)) => ok.iter().all(|r| (r.beta - a).abs() <= 1e-6 * a),
        None => true,
    };
    let monotone = ok.windows(2).all(|w| w[1].beta <= w[0].beta + 1e-9);
    let threshold = 2.0 * k.l() + 2.0;
    Ok(SweepReport {
        kernel: *k,
        min_beta,
        max_beta,
        interval,
        all_within,
        monotone,
        above_decay_threshold: ok.iter().filter(|r| r.beta > threshold).count(),
        failures: rows.len() - ok.len(),
        rows,
    })
}

/// Arguments of the Moser–Trudinger functional.
pub struct JalphaInput<'a> {
    pub alpha: f64,
    pub g: &'a dyn AxisymmetricProfile,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JalphaReport {
    pub alpha: f64,
    /// `J_α(u)` with the normalized area measure.
    pub value: f64,
    /// `∫ |∇u|² dω`.
    pub dirichlet: f64,
    /// `∫ u dω`.
    pub mean: f64,
    /// `log ∫ e^u dω`.
    pub log_mean_exp: f64,
    /// `∫ e^u x_i dω`; the first two vanish by symmetry.
    pub constraint: [f64; 3],
}

/// Fixed composite Gauss–Legendre rule used by [`jalpha_eval`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JalphaOptions {
    pub panels: usize,
    pub order: usize,
}

impl Default for JalphaOptions {
    fn default() -> Self {
        JalphaOptions {
            panels: 32,
            order: 16,
        }
    }
}

/// `J_α(u) = (α/4)∫|∇u|² dω + ∫u dω − log ∫e^u dω` for `u = g(x₃)`, with
/// `dω = dx/2` on `[−1, 1]` and `|∇u|² = (1 − x²) g'²`.
///
/// The functional is invariant under adding constants, so it is evaluated on
/// `g − g(0)` and with weights normalized to sum to one; constants then give
/// exactly zero.
pub fn jalpha_eval(input: &JalphaInput, opts: &JalphaOptions) -> Result<JalphaReport> {
    let (gx, gw) = gauss_legendre(opts.order.max(2));
    // right half only; each node is paired with its exact mirror image so
    // that odd integrands of even profiles cancel exactly
    let panels = opts.panels.div_ceil(2).max(1);
    let width = 1.0 / panels as f64;
    let mut xs = Vec::with_capacity(panels * gx.len());
    let mut ws = Vec::with_capacity(panels * gx.len());
    for p in 0..panels {
        let a = p as f64 * width;
        for (&x, &w) in gx.iter().zip(&gw) {
            xs.push(a + 0.5 * width * (x + 1.0));
            ws.push(0.5 * width * w);
        }
    }
    let total: f64 = 2.0 * ws.iter().sum::<f64>();
    let g = input.g;
    let shift = g.value(0.0);
    let (mut dir, mut mean, mut z, mut c3) = (0.0, 0.0, 0.0, 0.0);
    for (&x, &w) in xs.iter().zip(&ws) {
        let (hp, hm) = (g.value(x) - shift, g.value(-x) - shift);
        let (dp, dm) = (g.derivative(x), g.derivative(-x));
        // ∫ f dω with dω normalized: ∫_{-1}^{1} f dx / 2 = Σ w f / Σ w
        let wt = w / total;
        dir += wt * (1.0 - x * x) * (dp * dp + dm * dm);
        mean += wt * (hp + hm);
        z += wt * (hp.exp() + hm.exp());
        c3 += wt * (hp.exp() - hm.exp()) * x;
    }
    if ![dir, mean, z, c3].iter().all(|v| v.is_finite()) || !(z > 0.0) {
        return Err(Error::Contract("non-finite integral in J_alpha".into()));
    }
    let log_z = z.ln();
    Ok(JalphaReport {
        alpha: input.alpha,
        value: input.alpha / 4.0 * dir + mean - log_z,
        dirichlet: dir,
        mean: mean + shift,
        log_mean_exp: log_z + shift,
        // undo the shift on e^u
        constraint: [0.0, 0.0, c3 * shift.exp()],
    })
}

/// Shape of the constrained perturbation family, `q(t) = t² + t³/4`.
fn family_shape(t: f64) -> (f64, f64, f64) {
    (t * t + 0.25 * t * t * t, 2.0 * t + 0.75 * t * t, 2.0 + 1.5 * t)
}

/// `g = ε q(x − x̄)` with `x̄` chosen so that `∫ e^g x₃ dω = 0`, i.e. the
/// profile lies in the constraint set. Returns `x̄` and the profile.
pub fn constrained_perturbation(eps: f64, opts: &JalphaOptions) -> Result<(f64, SphereFn)> {
    let make = move |xbar: f64| {
        SphereFn::new(move |x| eps * family_shape(x - xbar).0).with_derivatives(
            move |x| eps * family_shape(x - xbar).1,
            move |x| eps * family_shape(x - xbar).2,
        )
    };
    if eps == 0.0 {
        return Ok((0.0, make(0.0)));
    }
    let c = |xbar: f64| -> Result<f64> {
        let g = make(xbar);
        Ok(jalpha_eval(&JalphaInput { alpha: 0.5, g: &g }, opts)?.constraint[2])
    };
    let (mut lo, mut hi) = (-1.0, 1.0);
    let (flo, fhi) = (c(lo)?, c(hi)?);
    if flo.signum() == fhi.signum() {
        return Err(Error::Parameter(format!(
            "no shift in [-1, 1] satisfies the constraint for eps = {eps}"
        )));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let fm = c(mid)?;
        if fm == 0.0 {
            lo = mid;
            hi = mid;
            break;
        }
        if fm.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let xbar = 0.5 * (lo + hi);
    Ok((xbar, make(xbar)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::radial_core::{LiouvilleBubble, RadialField};
    use crate::transforms::ConstantSphere;
    use approx::assert_relative_eq;

    #[test]
    fn kernel_props_examples() {
        let p = kernel_props(&KernelSpec::PolyOnePlusR2 { l: 1.0 }, 0.0);
        assert_eq!((p.k, p.dk, p.laplacian_log_k), (1.0, 0.0, 4.0));
        assert_eq!(kernel_props(&KernelSpec::UNIT, 2.0).laplacian_log_k, 0.0);
        let o = KernelSpec::Onsager { alpha: 8.0 * PI, gamma: 0.0 };
        for r in [0.0, 0.5, 3.0] {
            assert!(kernel_props(&o, r).laplacian_log_k.abs() < 1e-15);
        }
    }

    #[test]
    fn constant_kernel_recovers_bubble() {
        let res = shoot(&KernelSpec::UNIT, 0.0, &ShootOptions::default()).unwrap();
        assert!((res.beta - 4.0).abs() < 1e-7, "{}", res.beta);
        assert!((res.beta_mass - 4.0).abs() < 1e-7, "{}", res.beta_mass);
        assert!(res.converged);
        assert!(res.pohozaev_residual <= 1e-6 * PI * 16.0, "{}", res.pohozaev_residual);
        assert!((res.tail_slope - 4.0).abs() < 4e-2);
        let b = LiouvilleBubble::new(1.0).unwrap();
        for r in [0.0, 0.3, 1.0, 7.0, 100.0] {
            assert_relative_eq!(res.profile().value(r), b.value(r), epsilon = 1e-7);
        }
    }

    #[test]
    fn pohozaev_guard() {
        let res = shoot(&KernelSpec::UNIT, 0.0, &ShootOptions::default()).unwrap();
        assert!(pohozaev_residual(&res, &KernelSpec::UNIT).unwrap() < 1e-5);
        // β = 4 is not above 2l + 2 = 4 + 2 for l = 2
        let k = KernelSpec::PolyOnePlusR2 { l: 2.0 };
        let r2 = shoot(&k, 0.0, &ShootOptions::default()).unwrap();
        if r2.beta <= 6.0 {
            assert!(matches!(
                pohozaev_residual(&r2, &k),
                Err(Error::IdentityNotApplicable { .. })
            ));
            assert!(!r2.pohozaev_applicable);
        }
        assert!(matches!(
            pohozaev_residual(&res, &k),
            Err(Error::Contract(_))
        ));
    }

    #[test]
    fn poly_one_targets_six() {
        let k = KernelSpec::PolyOnePlusR2 { l: 1.0 };
        let res = target_beta(&k, 6.0, &ShootOptions::default(), &TargetOptions::default())
            .unwrap();
        assert!((res.beta - 6.0).abs() < 1e-7);
        assert!(res.pohozaev_residual <= 1e-4 * PI * 36.0);
    }

    #[test]
    fn ring_power_pohozaev() {
        let k = KernelSpec::RingPower { l: 0.5 };
        for a0 in [-3.0, 0.0, 3.0] {
            let res = shoot(&k, a0, &ShootOptions::default()).unwrap();
            assert!(res.beta > 4.0 && res.beta < 6.0, "{}", res.beta);
            assert!(res.pohozaev_residual <= 1e-4 * PI * res.beta * res.beta);
        }
    }

    #[test]
    fn sweep_constant_is_flat() {
        let rep = beta_sweep(&KernelSpec::UNIT, &a0_grid(-4.0, 4.0, 5), &ShootOptions::default())
            .unwrap();
        assert!(rep.all_within);
        assert_eq!(rep.failures, 0);
        assert!((rep.max_beta - rep.min_beta) < 1e-6);
    }

    #[test]
    fn jalpha_constants_vanish() {
        for c in [0.0, 1.7, -3.0] {
            let g = ConstantSphere(c);
            let rep = jalpha_eval(&JalphaInput { alpha: 0.5, g: &g }, &JalphaOptions::default())
                .unwrap();
            assert_eq!(rep.value, 0.0);
            assert_eq!(rep.constraint[0], 0.0);
        }
        let rep = jalpha_eval(
            &JalphaInput { alpha: 0.5, g: &ConstantSphere(0.0) },
            &JalphaOptions::default(),
        )
        .unwrap();
        assert_eq!(rep.constraint, [0.0; 3]);
    }

    #[test]
    fn jalpha_linear_profile_closed_form() {
        // g = x: ∫|∇u|² dω = ∫(1 − x²)/2 = 2/3, ∫u = 0, ∫e^x dx/2 = sinh 1
        let g = SphereFn::new(|x| x).with_derivatives(|_| 1.0, |_| 0.0);
        let rep = jalpha_eval(&JalphaInput { alpha: 1.0, g: &g }, &JalphaOptions::default())
            .unwrap();
        assert_relative_eq!(rep.dirichlet, 2.0 / 3.0, max_relative = 1e-13);
        assert_relative_eq!(rep.value, 1.0 / 6.0 - 1f64.sinh().ln(), max_relative = 1e-12);
        // ∫ e^x x dx / 2 = e^{-1}
        assert_relative_eq!(rep.constraint[2], (-1f64).exp(), max_relative = 1e-12);
    }

    #[test]
    fn constrained_family_meets_constraint() {
        let opts = JalphaOptions::default();
        for eps in [-1.0, 0.05, 0.5] {
            let (xbar, g) = constrained_perturbation(eps, &opts).unwrap();
            assert!(xbar.abs() < 1.0);
            let rep = jalpha_eval(&JalphaInput { alpha: 0.5, g: &g }, &opts).unwrap();
            assert!(rep.constraint[2].abs() < 1e-12, "{}", rep.constraint[2]);
            assert!(rep.value >= -1e-6, "{eps}: {}", rep.value);
        }
    }
}
