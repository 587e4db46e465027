//! Adaptive composite Gauss–Legendre quadrature.
//!
//! The integrator keeps a heap of panels keyed by their local error estimate
//! (difference between the panel rule and the rule on its two halves) and
//! bisects the worst panel until the summed estimate is below
//! `max(abs_tol, rel_tol * |I|)`. Panels are summed in left-to-right order so
//! results are bitwise reproducible.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

/// Gauss–Legendre nodes and weights on `[-1, 1]`, computed by Newton
/// iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

const PANEL_ORDER: usize = 10;

fn panel_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(PANEL_ORDER))
}

fn fixed<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> f64 {
    let (x, w) = panel_rule();
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut s = 0.0;
    for (xi, wi) in x.iter().zip(w) {
        s += wi * f(mid + half * xi);
    }
    s * half
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error
            .total_cmp(&other.error)
            .then_with(|| other.a.total_cmp(&self.a))
    }
}

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub error_estimate: f64,
    pub panels: usize,
    pub converged: bool,
}

/// Adaptive integrator settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            rel_tol: 1e-10,
            abs_tol: 1e-15,
            max_panels: 20_000,
        }
    }
}

impl Quadrature {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Quadrature {
            rel_tol,
            ..Default::default()
        }
    }

    fn estimate<F: Fn(f64) -> f64 + ?Sized>(f: &F, a: f64, b: f64) -> Panel {
        let m = 0.5 * (a + b);
        let whole = fixed(f, a, b);
        let halves = fixed(f, a, m) + fixed(f, m, b);
        Panel {
            a,
            b,
            value: halves,
            error: (whole - halves).abs(),
        }
    }

    /// Integrate `f` over `[a, b]`. Reversed limits flip the sign.
    pub fn integrate<F: Fn(f64) -> f64 + ?Sized>(&self, f: &F, a: f64, b: f64) -> QuadResult {
        self.integrate_with_breaks(f, &[a, b])
    }

    /// Integrate over consecutive segments `breaks[0]..breaks[1]..`, starting
    /// with one panel per segment. Use breaks to mark kinks or scale changes.
    pub fn integrate_with_breaks<F: Fn(f64) -> f64 + ?Sized>(
        &self,
        f: &F,
        breaks: &[f64],
    ) -> QuadResult {
        assert!(breaks.len() >= 2, "need at least two break points");
        let (lo, hi) = (breaks[0], breaks[breaks.len() - 1]);
        if lo == hi {
            return QuadResult {
                value: 0.0,
                error_estimate: 0.0,
                panels: 0,
                converged: true,
            };
        }
        if lo > hi {
            let rev: Vec<f64> = breaks.iter().rev().copied().collect();
            let mut r = self.integrate_with_breaks(f, &rev);
            r.value = -r.value;
            return r;
        }
        let mut heap = BinaryHeap::new();
        let (mut total, mut err) = (0.0, 0.0);
        for w in breaks.windows(2) {
            if w[1] > w[0] {
                let p = Self::estimate(f, w[0], w[1]);
                total += p.value;
                err += p.error;
                heap.push(p);
            }
        }
        let mut converged = false;
        loop {
            if err <= self.abs_tol.max(self.rel_tol * total.abs()) {
                converged = true;
                break;
            }
            if heap.len() >= self.max_panels {
                break;
            }
            let worst = heap.pop().expect("heap is non-empty");
            let m = 0.5 * (worst.a + worst.b);
            if m <= worst.a || m >= worst.b {
                // panel cannot be split further in f64
                err -= worst.error;
                heap.push(Panel { error: 0.0, ..worst });
                continue;
            }
            let left = Self::estimate(f, worst.a, m);
            let right = Self::estimate(f, m, worst.b);
            total += left.value + right.value - worst.value;
            err += left.error + right.error - worst.error;
            heap.push(left);
            heap.push(right);
            if heap.len() % 256 == 0 {
                // resync running sums against drift
                total = heap.iter().map(|p| p.value).sum();
                err = heap.iter().map(|p| p.error).sum();
            }
        }
        let mut panels = heap.into_vec();
        panels.sort_by(|p, q| p.a.total_cmp(&q.a));
        let value = panels.iter().map(|p| p.value).sum();
        let error_estimate = panels.iter().map(|p| p.error).sum();
        QuadResult {
            value,
            error_estimate,
            panels: panels.len(),
            converged,
        }
    }

    /// Integrate `f` over `[a, ∞)` through the map `x = a + t / (1 - t)`.
    pub fn integrate_half_line<F: Fn(f64) -> f64 + ?Sized>(&self, f: &F, a: f64) -> QuadResult {
        let g = |t: f64| {
            if t >= 1.0 {
                return 0.0;
            }
            let s = 1.0 - t;
            let v = f(a + t / s) / (s * s);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        };
        self.integrate_with_breaks(&g, &[0.0, 0.5, 0.9, 0.99, 1.0])
    }
}
