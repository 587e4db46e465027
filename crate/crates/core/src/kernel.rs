//! Radial weights `k(|y|)` for `Δv + k e^v = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The weight families: constant, `(1 + r²)^l`, `1 + r^{2l}`, and the
/// projected Onsager vortex weight `2 (1 + r²)^{α/4π - 2} e^{γ J(r)}` with
/// `J(r) = 2 / (1 + r²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "snake_case")]
pub enum KernelSpec {
    Constant { c: f64 },
    PolyOnePlusR2 { l: f64 },
    RingPower { l: f64 },
    Onsager { alpha: f64, gamma: f64 },
}

/// Pointwise kernel data.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelProps {
    pub k: f64,
    pub dk: f64,
    pub laplacian_log_k: f64,
}

impl KernelSpec {
    pub const UNIT: KernelSpec = KernelSpec::Constant { c: 1.0 };

    pub fn validate(&self) -> Result<()> {
        match *self {
            KernelSpec::Constant { c } if !(c > 0.0 && c.is_finite()) => {
                Err(Error::Parameter(format!("constant kernel needs c > 0, got {c}")))
            }
            KernelSpec::PolyOnePlusR2 { l } | KernelSpec::RingPower { l }
                if !(l > 0.0 && l.is_finite()) =>
            {
                Err(Error::Parameter(format!("kernel exponent needs l > 0, got {l}")))
            }
            KernelSpec::Onsager { alpha, gamma } if !(alpha > 0.0 && gamma >= 0.0) => {
                Err(Error::Parameter(format!(
                    "Onsager kernel needs alpha > 0 and gamma >= 0, got ({alpha}, {gamma})"
                )))
            }
            _ => Ok(()),
        }
    }

    /// Exponent of the Onsager power factor, `α/4π - 2`.
    fn onsager_power(alpha: f64) -> f64 {
        alpha / (4.0 * std::f64::consts::PI) - 2.0
    }

    pub fn k(&self, r: f64) -> f64 {
        match *self {
            KernelSpec::Constant { c } => c,
            KernelSpec::PolyOnePlusR2 { l } => (1.0 + r * r).powf(l),
            KernelSpec::RingPower { l } => 1.0 + r.powf(2.0 * l),
            KernelSpec::Onsager { .. } => self.ln_k(r).exp(),
        }
    }

    /// `ln k(r)`, evaluated without overflow for large radii.
    pub fn ln_k(&self, r: f64) -> f64 {
        match *self {
            KernelSpec::Constant { c } => c.ln(),
            KernelSpec::PolyOnePlusR2 { l } => l * (r * r).ln_1p(),
            KernelSpec::RingPower { l } => {
                let lr = 2.0 * l * r.ln();
                if lr > 0.0 {
                    lr + (-lr).exp().ln_1p()
                } else {
                    lr.exp().ln_1p()
                }
            }
            KernelSpec::Onsager { alpha, gamma } => {
                let q = 1.0 + r * r;
                std::f64::consts::LN_2 + Self::onsager_power(alpha) * q.ln() + gamma * 2.0 / q
            }
        }
    }

    /// `r k'(r) / k(r)`; its limit at infinity is the asymptotic exponent `2l`.
    pub fn log_slope(&self, r: f64) -> f64 {
        match *self {
            KernelSpec::Constant { .. } => 0.0,
            KernelSpec::PolyOnePlusR2 { l } => 2.0 * l * r * r / (1.0 + r * r),
            KernelSpec::RingPower { l } => {
                if r == 0.0 {
                    return 0.0;
                }
                let lr = 2.0 * l * r.ln();
                // r^{2l} / (1 + r^{2l}) as a logistic in ln r
                2.0 * l / (1.0 + (-lr).exp())
            }
            KernelSpec::Onsager { alpha, gamma } => {
                let q = 1.0 + r * r;
                2.0 * Self::onsager_power(alpha) * r * r / q - 4.0 * gamma * r * r / (q * q)
            }
        }
    }

    pub fn dk(&self, r: f64) -> f64 {
        match *self {
            KernelSpec::Constant { .. } => 0.0,
            KernelSpec::PolyOnePlusR2 { l } => 2.0 * l * r * (1.0 + r * r).powf(l - 1.0),
            KernelSpec::RingPower { l } => {
                if r == 0.0 {
                    return match l {
                        l if l < 0.5 => f64::INFINITY,
                        l if l == 0.5 => 1.0,
                        _ => 0.0,
                    };
                }
                2.0 * l * r.powf(2.0 * l - 1.0)
            }
            KernelSpec::Onsager { alpha, gamma } => {
                let q = 1.0 + r * r;
                self.k(r) * (2.0 * Self::onsager_power(alpha) * r / q - 4.0 * gamma * r / (q * q))
            }
        }
    }

    /// `Δ ln k` in closed form.
    pub fn laplacian_log_k(&self, r: f64) -> f64 {
        match *self {
            KernelSpec::Constant { .. } => 0.0,
            KernelSpec::PolyOnePlusR2 { l } => 4.0 * l / (1.0 + r * r).powi(2),
            KernelSpec::RingPower { l } => {
                if r == 0.0 {
                    return match l {
                        l if l < 1.0 => f64::INFINITY,
                        l if l == 1.0 => 4.0,
                        _ => 0.0,
                    };
                }
                let p = r.powf(2.0 * l);
                4.0 * l * l * r.powf(2.0 * l - 2.0) / ((1.0 + p) * (1.0 + p))
            }
            KernelSpec::Onsager { alpha, gamma } => {
                onsager_laplacian_log_kernel(alpha, gamma, r)
            }
        }
    }

    pub fn props(&self, r: f64) -> KernelProps {
        KernelProps {
            k: self.k(r),
            dk: self.dk(r),
            laplacian_log_k: self.laplacian_log_k(r),
        }
    }

    /// `2l = lim r k'/k`.
    pub fn asymptotic_exponent(&self) -> f64 {
        match *self {
            KernelSpec::Constant { .. } => 0.0,
            KernelSpec::PolyOnePlusR2 { l } | KernelSpec::RingPower { l } => 2.0 * l,
            KernelSpec::Onsager { alpha, .. } => 2.0 * Self::onsager_power(alpha),
        }
    }

    /// The decay exponent `l` (half the asymptotic exponent).
    pub fn l(&self) -> f64 {
        0.5 * self.asymptotic_exponent()
    }

    /// Known open interval of β for radial solutions, where one is known.
    pub fn radial_beta_interval(&self) -> Option<(f64, f64)> {
        match *self {
            KernelSpec::Constant { .. } => Some((4.0, 4.0)),
            KernelSpec::PolyOnePlusR2 { l } if l <= 1.0 => Some((4.0, 4.0 * l + 4.0)),
            KernelSpec::PolyOnePlusR2 { l } => Some((4.0 * l, 4.0 * l + 4.0)),
            KernelSpec::RingPower { l } => Some((4.0 * l.max(1.0), 4.0 * (l + 1.0))),
            KernelSpec::Onsager { .. } => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            KernelSpec::Constant { .. } => "const",
            KernelSpec::PolyOnePlusR2 { .. } => "poly",
            KernelSpec::RingPower { .. } => "ring",
            KernelSpec::Onsager { .. } => "onsager",
        }
    }
}

/// `Δ ln K` for the Onsager weight, re-derived:
/// `4A/(1+r²)² + 8γ(r²-1)/(1+r²)³` with `A = α/4π - 2`.
pub fn onsager_laplacian_log_kernel(alpha: f64, gamma: f64, r: f64) -> f64 {
    let a = alpha / (4.0 * std::f64::consts::PI) - 2.0;
    let q = 1.0 + r * r;
    4.0 * a / (q * q) + 8.0 * gamma * (r * r - 1.0) / (q * q * q)
}

/// The same quantity with the first denominator cubed, as it is sometimes
/// printed. Kept only for side-by-side reporting.
pub fn onsager_laplacian_log_kernel_cubed_variant(alpha: f64, gamma: f64, r: f64) -> f64 {
    let a = alpha / (4.0 * std::f64::consts::PI) - 2.0;
    let q = 1.0 + r * r;
    4.0 * a / (q * q * q) + 8.0 * gamma * (r * r - 1.0) / (q * q * q)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn fd_laplacian_log(k: &KernelSpec, r: f64) -> f64 {
        let h = 1e-4 * r.max(1.0);
        let f = |x: f64| k.ln_k(x);
        let d2 = (f(r + h) - 2.0 * f(r) + f(r - h)) / (h * h);
        let d1 = (f(r + h) - f(r - h)) / (2.0 * h);
        d2 + d1 / r
    }

    #[test]
    fn poly_at_origin() {
        let p = KernelSpec::PolyOnePlusR2 { l: 1.0 }.props(0.0);
        assert_eq!(p.k, 1.0);
        assert_eq!(p.dk, 0.0);
        assert_eq!(p.laplacian_log_k, 4.0);
    }

    #[test]
    fn constant_has_flat_log() {
        assert_eq!(KernelSpec::Constant { c: 3.0 }.laplacian_log_k(2.0), 0.0);
    }

    #[test]
    fn onsager_critical_mass_is_log_harmonic() {
        let k = KernelSpec::Onsager {
            alpha: 8.0 * PI,
            gamma: 0.0,
        };
        for r in [0.0, 0.3, 1.0, 7.0] {
            assert!(k.laplacian_log_k(r).abs() < 1e-15);
        }
    }

    #[test]
    fn closed_forms_match_finite_differences() {
        let kernels = [
            KernelSpec::PolyOnePlusR2 { l: 0.5 },
            KernelSpec::PolyOnePlusR2 { l: 2.0 },
            KernelSpec::RingPower { l: 0.5 },
            KernelSpec::RingPower { l: 1.5 },
            KernelSpec::Onsager {
                alpha: 12.0 * PI,
                gamma: 0.3,
            },
        ];
        for k in kernels {
            for r in [0.2, 0.9, 2.5] {
                assert_relative_eq!(
                    k.laplacian_log_k(r),
                    fd_laplacian_log(&k, r),
                    max_relative = 1e-5
                );
                let h = 1e-6;
                let dk = (k.k(r + h) - k.k(r - h)) / (2.0 * h);
                assert_relative_eq!(k.dk(r), dk, max_relative = 1e-6);
                assert_relative_eq!(k.log_slope(r), r * k.dk(r) / k.k(r), max_relative = 1e-12);
                assert_relative_eq!(k.ln_k(r), k.k(r).ln(), max_relative = 1e-12);
            }
        }
    }

    #[test]
    fn asymptotic_exponent_is_limit_of_log_slope() {
        for k in [
            KernelSpec::PolyOnePlusR2 { l: 0.75 },
            KernelSpec::RingPower { l: 0.5 },
        ] {
            assert_relative_eq!(k.log_slope(1e8), k.asymptotic_exponent(), max_relative = 1e-6);
        }
    }

    #[test]
    fn invalid_parameters_rejected() {
        assert!(KernelSpec::Constant { c: 0.0 }.validate().is_err());
        assert!(KernelSpec::PolyOnePlusR2 { l: -1.0 }.validate().is_err());
        assert!(KernelSpec::Onsager { alpha: 1.0, gamma: -0.1 }.validate().is_err());
        assert!(KernelSpec::RingPower { l: 0.5 }.validate().is_ok());
    }
}
