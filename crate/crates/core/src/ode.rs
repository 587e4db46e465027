//! Dormand–Prince 5(4) embedded Runge–Kutta integrator with PI step control.

/// Step-size controller settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub first_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        OdeOptions {
            rel_tol: 1e-10,
            abs_tol: 1e-12,
            first_step: 1e-3,
            max_step: 0.25,
            min_step: 1e-12,
            max_steps: 500_000,
        }
    }
}

/// Why the integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stop {
    /// Reached the requested end point.
    End,
    /// The caller's predicate asked to stop after an accepted step.
    Requested,
    /// Step size collapsed below `min_step`.
    StepCollapse,
    /// The state or its derivative became non-finite.
    NonFinite,
    /// Hit `max_steps`.
    StepLimit,
}

/// One accepted point of the trajectory together with its derivative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample<const N: usize> {
    pub t: f64,
    pub y: [f64; N],
    pub dy: [f64; N],
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<const N: usize> {
    pub samples: Vec<Sample<N>>,
    pub stop: Stop,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// difference between the 5th- and 4th-order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// Integrate `dy/dt = f(t, y)` from `t0` to `t1`.
///
/// `stop` is consulted after each accepted step; returning `true` ends the
/// integration with [`Stop::Requested`].
pub fn integrate<const N: usize, F, S>(
    f: F,
    t0: f64,
    y0: [f64; N],
    t1: f64,
    opts: &OdeOptions,
    mut stop: S,
) -> Trajectory<N>
where
    F: Fn(f64, &[f64; N]) -> [f64; N],
    S: FnMut(&Sample<N>) -> bool,
{
    let mut t = t0;
    let mut y = y0;
    let mut k1 = f(t, &y);
    let mut samples = vec![Sample { t, y, dy: k1 }];
    let mut h = opts.first_step.min(t1 - t0);
    let mut prev_err: f64 = 1e-4;
    let mut steps = 0;
    let outcome = loop {
        if t >= t1 {
            break Stop::End;
        }
        if steps >= opts.max_steps {
            break Stop::StepLimit;
        }
        if h < opts.min_step {
            break Stop::StepCollapse;
        }
        h = h.min(t1 - t).min(opts.max_step);
        let k2 = f(t + C2 * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = f(t + C3 * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = f(t + C4 * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            t + C5 * h,
            &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + h,
            &axpy(
                &y,
                h,
                &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
            ),
        );
        let y_new = axpy(
            &y,
            h,
            &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)],
        );
        let k7 = f(t + h, &y_new);
        if !y_new.iter().chain(k7.iter()).all(|v| v.is_finite()) {
            h *= 0.25;
            if h < opts.min_step {
                break Stop::NonFinite;
            }
            continue;
        }
        let mut err = 0.0;
        for i in 0..N {
            let e = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.abs_tol + opts.rel_tol * y[i].abs().max(y_new[i].abs());
            err += (e / sc).powi(2);
        }
        let err = (err / N as f64).sqrt();
        steps += 1;
        if err <= 1.0 {
            t += h;
            y = y_new;
            k1 = k7;
            let sample = Sample { t, y, dy: k1 };
            samples.push(sample);
            // PI controller (Hairer–Wanner constants)
            let fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.7 / 5.0) * prev_err.powf(0.4 / 5.0)).clamp(0.2, 5.0)
            };
            prev_err = err.max(1e-4);
            h *= fac;
            if stop(&sample) {
                break Stop::Requested;
            }
        } else {
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 1.0);
        }
    };
    Trajectory {
        samples,
        stop: outcome,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harmonic_oscillator_period() {
        let opts = OdeOptions::default();
        let tr = integrate(
            |_t, y: &[f64; 2]| [y[1], -y[0]],
            0.0,
            [1.0, 0.0],
            2.0 * std::f64::consts::PI,
            &opts,
            |_| false,
        );
        assert_eq!(tr.stop, Stop::End);
        let last = tr.samples.last().unwrap();
        assert!((last.y[0] - 1.0).abs() < 1e-8);
        assert!(last.y[1].abs() < 1e-8);
    }

    #[test]
    fn exponential_growth() {
        let opts = OdeOptions::default();
        let tr = integrate(|_t, y: &[f64; 1]| [y[0]], 0.0, [1.0], 3.0, &opts, |_| false);
        let last = tr.samples.last().unwrap();
        assert!((last.y[0] / 3f64.exp() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn stop_predicate_ends_early() {
        let opts = OdeOptions::default();
        let tr = integrate(
            |_t, _y: &[f64; 1]| [1.0],
            0.0,
            [0.0],
            10.0,
            &opts,
            |s| s.y[0] > 1.0,
        );
        assert_eq!(tr.stop, Stop::Requested);
        assert!(tr.samples.last().unwrap().t < 10.0);
    }
}
