//! Equimeasurable rearrangement of a radial function with respect to the
//! measures `e^w dy` (source) and `e^{U_λ} dy` (target).
//!
//! For each threshold `t` the superlevel set `{φ > t}` of the source is
//! measured with `e^w`, and the target disc `B_{ρ(t)}` is chosen with the
//! same `e^{U_λ}` mass. The rearranged profile is the graph `ρ(t) ↦ t`.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::KernelSpec;
use crate::quadrature::Quadrature;
use crate::radial_core::{
    annulus_mass, bubble_mass, cumulative_mass, LiouvilleBubble, RadialField, RadialGrid,
    RadialProfile, EIGHT_PI, MIN_GRID_NODES,
};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RearrangeOptions {
    /// Minimum number of threshold levels.
    pub min_levels: usize,
    pub quadrature: Quadrature,
    /// Radius the target disc is expected to have; the outer node is snapped
    /// to it when the computed radius agrees to `1e-8` relative.
    pub target_radius: Option<f64>,
}

impl Default for RearrangeOptions {
    fn default() -> Self {
        RearrangeOptions {
            min_levels: 128,
            quadrature: Quadrature::with_rel_tol(1e-13),
            target_radius: None,
        }
    }
}

/// `a(t) = ∫_{φ>t} e^w dy` at decreasing thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassDistribution {
    pub thresholds: Vec<f64>,
    pub a_of_t: Vec<f64>,
}

/// Per-threshold data of a rearrangement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub t: f64,
    pub a: f64,
    /// Radius of the target disc carrying bubble mass `a`.
    pub rho: f64,
    /// Radii where the source profile crosses `t`.
    pub crossings: Vec<f64>,
    /// `φ*'(ρ)`, from differentiating the mass balance in `t`.
    pub rearranged_slope: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RearrangedProfile {
    /// `φ*` on the target disc.
    pub profile: RadialProfile,
    pub lambda: f64,
    /// Value of `φ` on the boundary of its domain.
    pub boundary_constant: f64,
    pub target_radius: f64,
    pub levels: Vec<Level>,
    /// `max_t |∫_{φ*>t} e^{U_λ} − a(t)|`, with `{φ* > t}` located on the
    /// interpolated profile.
    pub equimeasurability_residual: f64,
}

/// JSON sidecar for a rearranged profile CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RearrangeSummary {
    pub lambda: f64,
    pub boundary_constant: f64,
    pub target_radius: f64,
    pub levels: usize,
    pub equimeasurability_residual: f64,
}

impl RearrangedProfile {
    pub fn distribution(&self) -> MassDistribution {
        MassDistribution {
            thresholds: self.levels.iter().map(|l| l.t).collect(),
            a_of_t: self.levels.iter().map(|l| l.a).collect(),
        }
    }

    pub fn summary(&self) -> RearrangeSummary {
        RearrangeSummary {
            lambda: self.lambda,
            boundary_constant: self.boundary_constant,
            target_radius: self.target_radius,
            levels: self.levels.len(),
            equimeasurability_residual: self.equimeasurability_residual,
        }
    }
}

/// Source data shared by all thresholds.
struct Source<'a> {
    phi: &'a dyn RadialField,
    w: &'a dyn RadialField,
    nodes: &'a [f64],
    values: Vec<f64>,
    cumulative: Vec<f64>,
    quad: Quadrature,
}

impl Source<'_> {
    /// Root of `φ = t` inside node interval `i`, where `φ` changes side.
    fn crossing(&self, i: usize, t: f64) -> f64 {
        let (mut lo, mut hi) = (self.nodes[i], self.nodes[i + 1]);
        let lo_above = self.values[i] > t;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if (self.phi.value(mid) > t) == lo_above {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Superlevel set `{φ > t}` as disjoint radial intervals, plus the
    /// crossing radii. `φ` is taken monotone between nodes.
    fn superlevel(&self, t: f64) -> (Vec<(f64, f64)>, Vec<f64>) {
        let mut parts: Vec<(f64, f64)> = Vec::new();
        let mut crossings = Vec::new();
        let mut push = |lo: f64, hi: f64| match parts.last_mut() {
            Some(last) if last.1 == lo => last.1 = hi,
            _ => parts.push((lo, hi)),
        };
        for i in 0..self.nodes.len() - 1 {
            let (a, b) = (self.values[i] > t, self.values[i + 1] > t);
            let (r0, r1) = (self.nodes[i], self.nodes[i + 1]);
            match (a, b) {
                (true, true) => push(r0, r1),
                (false, false) => {}
                (true, false) => {
                    let c = if self.values[i + 1] == t { r1 } else { self.crossing(i, t) };
                    crossings.push(c);
                    push(r0, c);
                }
                (false, true) => {
                    let c = if self.values[i] == t { r0 } else { self.crossing(i, t) };
                    crossings.push(c);
                    push(c, r1);
                }
            }
        }
        for (i, &v) in self.values.iter().enumerate() {
            if v == t && !crossings.contains(&self.nodes[i]) {
                crossings.push(self.nodes[i]);
            }
        }
        crossings.sort_by(f64::total_cmp);
        crossings.dedup();
        (parts, crossings)
    }

    fn mass_above(&self, parts: &[(f64, f64)]) -> Result<f64> {
        let mut total = 0.0;
        for &(lo, hi) in parts {
            // whole node intervals come from the cumulative table
            let i0 = self.nodes.partition_point(|&x| x < lo);
            let i1 = self.nodes.partition_point(|&x| x <= hi).saturating_sub(1);
            if i0 <= i1 && self.nodes[i0] <= self.nodes[i1] {
                total += annulus_mass(self.w, lo, self.nodes[i0], &KernelSpec::UNIT, &self.quad)?;
                total += self.cumulative[i1] - self.cumulative[i0];
                total += annulus_mass(self.w, self.nodes[i1], hi, &KernelSpec::UNIT, &self.quad)?;
            } else {
                total += annulus_mass(self.w, lo, hi, &KernelSpec::UNIT, &self.quad)?;
            }
        }
        Ok(total)
    }

    /// `Σ_crossings r e^{w(r)} / |φ'(r)|`, i.e. `−a'(t) / 2π`.
    fn coarea_weight(&self, crossings: &[f64]) -> f64 {
        crossings
            .iter()
            .map(|&c| {
                if c == 0.0 {
                    return 0.0;
                }
                let d = self.phi.derivative(c).abs();
                c * self.w.value(c).exp() / d
            })
            .sum()
    }
}

fn threshold_levels(values: &[f64], min_levels: usize) -> Vec<f64> {
    let mut t: Vec<f64> = values.to_vec();
    t.sort_by(|a, b| b.total_cmp(a));
    t.dedup();
    let mut first = true;
    while t.len() > 1 && (first || t.len() < min_levels) {
        first = false;
        let mut refined = Vec::with_capacity(2 * t.len());
        for w in t.windows(2) {
            refined.push(w[0]);
            let mid = 0.5 * (w[0] + w[1]);
            if mid < w[0] && mid > w[1] {
                refined.push(mid);
            }
        }
        refined.push(t[t.len() - 1]);
        if refined.len() == t.len() {
            break;
        }
        t = refined;
    }
    t
}

/// Rearrange `phi` (sampled on `grid`) from `e^w dy` onto `e^{U_λ} dy`.
pub fn rearrange_radial(
    phi: &dyn RadialField,
    w: &dyn RadialField,
    grid: &RadialGrid,
    lambda: f64,
    opts: &RearrangeOptions,
) -> Result<RearrangedProfile> {
    let bubble = LiouvilleBubble::new(lambda)?;
    let nodes = grid.nodes();
    let outer = grid.outer_radius();
    for f in [phi.max_radius(), w.max_radius()] {
        if f < outer * (1.0 - 1e-12) {
            return Err(Error::Domain { radius: outer, max: f });
        }
    }
    let values: Vec<f64> = nodes.iter().map(|&r| phi.value(r)).collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Contract("rearranged function is not finite".into()));
    }
    let cumulative = cumulative_mass(w, grid, &KernelSpec::UNIT, &opts.quadrature)?;
    let total = *cumulative.last().expect("grid is non-empty");
    if total >= EIGHT_PI {
        return Err(Error::Infeasible { mass: total });
    }
    let src = Source {
        phi,
        w,
        nodes,
        values,
        cumulative,
        quad: opts.quadrature,
    };
    let max_phi = src.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min_phi = src.values.iter().copied().fold(f64::INFINITY, f64::min);

    let mut target_radius = bubble.radius_for_mass(total)?;
    if let Some(r) = opts.target_radius {
        if ((target_radius - r) / r).abs() > 1e-8 {
            return Err(Error::Contract(format!(
                "target disc radius {target_radius} does not match requested {r}"
            )));
        }
        target_radius = r;
    }

    let thresholds = threshold_levels(&src.values, opts.min_levels);
    let levels: Vec<Level> = thresholds
        .par_iter()
        .map(|&t| -> Result<Level> {
            let (parts, crossings) = src.superlevel(t);
            let a = src.mass_above(&parts)?;
            let rho = bubble.radius_for_mass(a)?.min(target_radius);
            let s = src.coarea_weight(&crossings);
            let rearranged_slope = if rho == 0.0 || !(s > 0.0) {
                0.0
            } else {
                -rho * bubble.density(rho) / s
            };
            Ok(Level {
                t,
                a,
                rho,
                crossings,
                rearranged_slope,
            })
        })
        .collect::<Result<_>>()?;

    let profile = build_profile(&levels, max_phi, min_phi, target_radius)?;
    let residual = levels
        .par_iter()
        .map(|l| {
            let r = superlevel_radius(&profile, l.t, target_radius);
            (bubble_mass(&bubble, r) - l.a).abs()
        })
        .collect::<Vec<f64>>()
        .into_iter()
        .fold(0.0, f64::max);

    Ok(RearrangedProfile {
        profile,
        lambda,
        boundary_constant: phi.value(outer),
        target_radius,
        levels,
        equimeasurability_residual: residual,
    })
}

/// The graph points `(ρ_j, t_j)`, sorted by radius, with coincident radii
/// collapsed to the largest threshold and the endpoints `(0, max φ)` and
/// `(R*, min φ)` present.
fn build_profile(
    levels: &[Level],
    max_phi: f64,
    min_phi: f64,
    target_radius: f64,
) -> Result<RadialProfile> {
    // levels run with decreasing t; a source that is flat to rounding level
    // can give radii that jitter, so take the monotone envelope
    let mut envelope = 0.0f64;
    let mut pts: Vec<(f64, f64, f64)> = levels
        .iter()
        .map(|l| {
            envelope = envelope.max(l.rho);
            (envelope, l.t, l.rearranged_slope)
        })
        .collect();
    pts.push((0.0, max_phi, 0.0));
    pts.push((target_radius, min_phi, 0.0));
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(b.1.total_cmp(&a.1)));
    let gap = 1e-14 * target_radius;
    let mut merged: Vec<(f64, f64, f64)> = Vec::with_capacity(pts.len());
    for p in pts {
        match merged.last() {
            Some(last) if p.0 - last.0 <= gap => {
                // keep the larger threshold, but let the outer endpoint sit
                // exactly at the target radius
                if p.0 == target_radius {
                    let keep = *last;
                    let n = merged.len();
                    merged[n - 1] = (target_radius, keep.1, keep.2);
                }
            }
            _ => merged.push(p),
        }
    }
    if merged.len() == 1 {
        // every threshold sits at the origin: degenerate target disc
        return Err(Error::Contract("rearrangement target disc has zero radius".into()));
    }
    // too few distinct radii (e.g. constant φ): fill the largest gaps linearly
    while merged.len() < MIN_GRID_NODES {
        let (i, _) = merged
            .windows(2)
            .enumerate()
            .map(|(i, w)| (i, w[1].0 - w[0].0))
            .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        let (a, b) = (merged[i], merged[i + 1]);
        let slope = (b.1 - a.1) / (b.0 - a.0);
        merged.insert(i + 1, (0.5 * (a.0 + b.0), 0.5 * (a.1 + b.1), slope));
    }
    let grid = RadialGrid::new(merged.iter().map(|p| p.0).collect())?;
    RadialProfile::new(
        grid,
        merged.iter().map(|p| p.1).collect(),
        Some(merged.iter().map(|p| p.2).collect()),
    )
}

/// `sup {ρ ≤ R : φ*(ρ) > t}` on a nonincreasing profile.
fn superlevel_radius(profile: &RadialProfile, t: f64, outer: f64) -> f64 {
    if profile.value(0.0) <= t {
        return 0.0;
    }
    if profile.value(outer) > t {
        return outer;
    }
    let (mut lo, mut hi) = (0.0, outer);
    // start from the bracketing node interval
    let nodes = profile.grid().nodes();
    let vals = profile.values();
    if let Some(i) = vals.iter().position(|&v| v <= t) {
        lo = nodes[i.saturating_sub(1)];
        hi = nodes[i];
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if profile.value(mid) > t {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// Boundary gradient integrals at one level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientRow {
    pub t: f64,
    /// `∫_{φ=t} |∇φ| ds`.
    pub original: f64,
    /// `∫_{φ*=t} |∇φ*| ds`.
    pub rearranged: f64,
    /// `original − rearranged`, nonnegative under the hypotheses.
    pub difference: f64,
}

/// Superlevel integrals `J(t) = ∫_{φ>t}|∇φ|`, `j(t) = ∫_{φ>t}|∇φ|²` and
/// their rearranged counterparts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperlevelIntegrals {
    pub t: f64,
    pub j: f64,
    pub j_star: f64,
    pub big_j: f64,
    pub big_j_star: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GradientReport {
    pub rows: Vec<GradientRow>,
    pub min_difference: f64,
    pub integrals: Vec<SuperlevelIntegrals>,
    /// `j*` and `J*` do not increase with `t`.
    pub starred_monotone: bool,
}

/// Compare `∫_{φ*=t}|∇φ*|` with `∫_{φ=t}|∇φ|` at every level of a
/// rearrangement produced from `(phi, w)` on `grid`.
pub fn gradient_comparison(
    phi: &dyn RadialField,
    w: &dyn RadialField,
    grid: &RadialGrid,
    rearranged: &RearrangedProfile,
    quad: &Quadrature,
) -> Result<GradientReport> {
    let nodes = grid.nodes();
    let src = Source {
        phi,
        w,
        nodes,
        values: nodes.iter().map(|&r| phi.value(r)).collect(),
        cumulative: Vec::new(),
        quad: *quad,
    };
    let rows: Vec<GradientRow> = rearranged
        .levels
        .iter()
        .map(|l| {
            let original: f64 = l
                .crossings
                .iter()
                .map(|&c| 2.0 * PI * c * phi.derivative(c).abs())
                .sum();
            let rearranged = 2.0 * PI * l.rho * l.rearranged_slope.abs();
            GradientRow {
                t: l.t,
                original,
                rearranged,
                difference: original - rearranged,
            }
        })
        .collect();
    let min_difference = rows.iter().map(|r| r.difference).fold(f64::INFINITY, f64::min);

    let star = &rearranged.profile;
    let integrals: Vec<SuperlevelIntegrals> = rearranged
        .levels
        .par_iter()
        .map(|l| {
            let (parts, _) = src.superlevel(l.t);
            let (mut j, mut big_j) = (0.0, 0.0);
            for (lo, hi) in parts {
                let mut br = vec![lo];
                br.extend(phi.breakpoints(lo, hi));
                br.push(hi);
                j += quad
                    .integrate_with_breaks(&|r: f64| 2.0 * PI * r * phi.derivative(r).powi(2), &br)
                    .value;
                big_j += quad
                    .integrate_with_breaks(&|r: f64| 2.0 * PI * r * phi.derivative(r).abs(), &br)
                    .value;
            }
            let rho = superlevel_radius(star, l.t, rearranged.target_radius);
            let mut br = vec![0.0];
            br.extend(star.breakpoints(0.0, rho));
            br.push(rho);
            let j_star = quad
                .integrate_with_breaks(&|r: f64| 2.0 * PI * r * star.derivative(r).powi(2), &br)
                .value;
            let big_j_star = quad
                .integrate_with_breaks(&|r: f64| 2.0 * PI * r * star.derivative(r).abs(), &br)
                .value;
            SuperlevelIntegrals {
                t: l.t,
                j,
                j_star,
                big_j,
                big_j_star,
            }
        })
        .collect();
    // thresholds decrease along the list, so starred integrals must grow
    let starred_monotone = integrals.windows(2).all(|w| {
        let slack = 1e-12 * w[1].big_j_star.max(w[1].j_star).max(1.0);
        w[1].j_star >= w[0].j_star - slack && w[1].big_j_star >= w[0].big_j_star - slack
    });
    Ok(GradientReport {
        rows,
        min_difference,
        integrals,
        starred_monotone,
    })
}
