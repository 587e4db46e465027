//! Subcommands. Each returns a JSON payload and, where the result is
//! tabular, CSV text.

use std::f64::consts::PI;
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use clap::{Args, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use liouville_lab::bol::{
    bol_deficit, bubble_bol_deficit, first_eigenvalue, level_functions, radial_hypothesis_check,
};
use liouville_lab::meanfield::{
    a0_grid, beta_sweep, constrained_perturbation, jalpha_eval, shoot, target_beta,
    JalphaInput, JalphaOptions, ShootOptions, TargetOptions,
};
use liouville_lab::radial_core::{
    bubble_mass, gauss_bonnet_check, profile_mass, ConstantField,
};
use liouville_lab::rearrange::{gradient_comparison, rearrange_radial, RearrangeOptions};
use liouville_lab::sci::{
    cap_heights, dichotomy_check, make_pair, pair_total_mass, quadratic_mass_roots,
    sci_verify_radial, DichotomyOptions, HeightPerturbedBubble, SciOptions,
};
use liouville_lab::transforms::{
    mt_transform, onsager_transform, singular_mf_transform, ConstantSphere, TransformOptions,
    ONSAGER_TOL,
};
use liouville_lab::{
    Error, KernelSpec, LiouvilleBubble, Quadrature, RadialField, RadialGrid, RadialProfile,
    EIGHT_PI, FOUR_PI,
};

use crate::config::{ConfigError, Format, RunConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("i/o: {0}")]
    Io(String),
}

impl CliError {
    /// 64 usage, 2 violated hypothesis or contract, 1 anything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) | CliError::Config(_) => 64,
            CliError::Core(e) if e.is_hypothesis() => 2,
            CliError::Core(_) | CliError::Io(_) => 1,
        }
    }
}

type Res<T> = Result<T, CliError>;

pub struct Outcome {
    pub payload: Value,
    pub csv: Option<String>,
}

fn sym(symbol: &str, value: f64) -> Value {
    json!({ "symbol": symbol, "value": value })
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

fn read_profile(path: &Path) -> Res<RadialProfile> {
    let f = File::open(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(RadialProfile::read_csv(BufReader::new(f))?)
}

fn csv_of(write: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> String {
    let mut buf = Vec::new();
    write(&mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("CSV is UTF-8")
}

fn quad(cfg: &RunConfig) -> Quadrature {
    Quadrature::with_rel_tol(cfg.quadrature_tol)
}

fn shoot_opts(cfg: &RunConfig) -> ShootOptions {
    ShootOptions {
        r_max: cfg.r_max,
        tol: cfg.ode_tol,
        ..ShootOptions::default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelKind {
    Const,
    Poly,
    Ring,
    Onsager,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct KernelArgs {
    /// Weight family: const (c), poly ((1+r²)^l), ring (1+r^{2l}), onsager.
    #[arg(long, value_enum, default_value = "const")]
    pub kernel: KernelKind,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long)]
    pub l: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub gamma: f64,
}

impl KernelArgs {
    fn spec(&self) -> Res<KernelSpec> {
        let need = |v: Option<f64>, flag: &str| {
            v.ok_or_else(|| CliError::Usage(format!("--kernel {:?} needs --{flag}", self.kernel)))
        };
        let k = match self.kernel {
            KernelKind::Const => KernelSpec::Constant { c: self.c },
            KernelKind::Poly => KernelSpec::PolyOnePlusR2 { l: need(self.l, "l")? },
            KernelKind::Ring => KernelSpec::RingPower { l: need(self.l, "l")? },
            KernelKind::Onsager => KernelSpec::Onsager {
                alpha: need(self.alpha, "alpha")?,
                gamma: self.gamma,
            },
        };
        k.validate()?;
        Ok(k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Normalization {
    /// `Δu + e^u = f`, bound `8π`.
    U,
    /// `Δv + 2e^v = f`, bound `4π`.
    V,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TransformKind {
    Mt,
    Singular,
    Onsager,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum Command {
    /// Liouville bubble U_λ on B_R: value, mass, flux and Bol data.
    Bubble {
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long = "R", alias = "radius", default_value_t = 1.0)]
        #[serde(rename = "R")]
        r: f64,
    },
    /// Bol deficit, radial hypothesis and level functions of a profile.
    Bol {
        /// Profile CSV (`r,value,derivative`); otherwise U_λ + shift.
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long, default_value_t = 0.0)]
        shift: f64,
        /// Disc radius; defaults to the profile's outer radius or 1.
        #[arg(long = "R", alias = "radius")]
        #[serde(rename = "R")]
        r: Option<f64>,
    },
    /// Rearrange φ from e^w dy onto the bubble measure e^{U_λ} dy.
    Rearrange {
        #[arg(long)]
        phi: PathBuf,
        /// Weight profile CSV; otherwise U_μ + shift with μ = --w-bubble.
        #[arg(long)]
        w: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        w_bubble: f64,
        #[arg(long, default_value_t = 0.0)]
        w_shift: f64,
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
    },
    /// Matched bubble pair over B_R.
    Pair {
        #[arg(long)]
        lambda1: f64,
        #[arg(long = "R", alias = "radius")]
        #[serde(rename = "R")]
        r: f64,
    },
    /// Sphere covering inequality on radial data.
    SciVerify {
        #[arg(long, requires = "w2")]
        w1: Option<PathBuf>,
        #[arg(long, requires = "w1")]
        w2: Option<PathBuf>,
        #[arg(long)]
        f1: Option<PathBuf>,
        #[arg(long)]
        f2: Option<PathBuf>,
        /// Without profile CSVs: the pair built from λ₁ and R.
        #[arg(long, default_value_t = 1.0)]
        lambda1: f64,
        #[arg(long = "R", alias = "radius", default_value_t = 1.0)]
        #[serde(rename = "R")]
        r: f64,
        /// Height perturbation of the second bubble (0 is the equality case).
        #[arg(long, default_value_t = 0.0)]
        eps: f64,
        #[arg(long, value_enum, default_value = "u")]
        normalization: Normalization,
    },
    /// Which side of the pair's mass gap a profile falls on.
    Dichotomy {
        #[arg(long)]
        lambda1: f64,
        #[arg(long = "R", alias = "radius")]
        #[serde(rename = "R")]
        r: f64,
        /// Profile CSV on [0, R]; otherwise a sample of the pair bubble.
        #[arg(long)]
        psi: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        branch: u8,
    },
    /// First eigenvalue of -Δ - e^w on B_R with Dirichlet data.
    Eigen {
        #[arg(long, default_value_t = 1.0)]
        lambda: f64,
        #[arg(long = "R", alias = "radius", conflicts_with = "mass")]
        #[serde(rename = "R")]
        r: Option<f64>,
        /// Truncate the bubble where its mass reaches this value.
        #[arg(long)]
        mass: Option<f64>,
        #[arg(long, default_value_t = 257)]
        nodes: usize,
    },
    /// Radial solve of Δv + k e^v = 0 from v(0) = a0.
    Shoot {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        a0: f64,
        /// Find a0 such that β equals this value instead.
        #[arg(long)]
        target_beta: Option<f64>,
        #[arg(long, default_value_t = -20.0, allow_hyphen_values = true)]
        a0_min: f64,
        #[arg(long, default_value_t = 20.0, allow_hyphen_values = true)]
        a0_max: f64,
    },
    /// β over an evenly spaced grid of center values.
    Sweep {
        #[command(flatten)]
        kernel: KernelArgs,
        #[arg(long, default_value_t = -8.0, allow_hyphen_values = true)]
        a0_min: f64,
        #[arg(long, default_value_t = 8.0, allow_hyphen_values = true)]
        a0_max: f64,
        #[arg(long, default_value_t = 65)]
        steps: usize,
    },
    /// Sphere-to-plane transform of a constant solution.
    Transform {
        #[arg(long, value_enum)]
        kind: TransformKind,
        #[arg(long, allow_hyphen_values = true)]
        alpha: f64,
        #[arg(long, default_value_t = 0.0)]
        gamma: f64,
        /// Constant value of the input function.
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        value: f64,
    },
    /// Moser–Trudinger functional on an axisymmetric profile.
    Jalpha {
        #[arg(long, default_value_t = 0.5)]
        alpha: f64,
        /// Constrained perturbation ε q(x − x̄).
        #[arg(long, allow_hyphen_values = true, conflicts_with = "constant")]
        eps: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        constant: Option<f64>,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Bubble { .. } => "bubble",
            Command::Bol { .. } => "bol",
            Command::Rearrange { .. } => "rearrange",
            Command::Pair { .. } => "pair",
            Command::SciVerify { .. } => "sci-verify",
            Command::Dichotomy { .. } => "dichotomy",
            Command::Eigen { .. } => "eigen",
            Command::Shoot { .. } => "shoot",
            Command::Sweep { .. } => "sweep",
            Command::Transform { .. } => "transform",
            Command::Jalpha { .. } => "jalpha",
        }
    }

    pub fn default_format(&self) -> Format {
        match self {
            Command::Sweep { .. } => Format::Csv,
            _ => Format::Json,
        }
    }

    pub fn execute(&self, cfg: &RunConfig) -> Res<Outcome> {
        let q = quad(cfg);
        match *self {
            Command::Bubble { lambda, r } => {
                let b = LiouvilleBubble::new(lambda)?;
                let grid = RadialGrid::uniform(r, cfg.grid_nodes)?;
                let profile = RadialProfile::sample(&b, &grid)?;
                Ok(Outcome {
                    payload: json!({
                        "bubble": b,
                        "R": r,
                        "value": b.value(r),
                        "mass": bubble_mass(&b, r),
                        "mass_quadrature": profile_mass(&b, r, &KernelSpec::UNIT, &q)?,
                        "total_mass": sym("8*pi", EIGHT_PI),
                        "bol_deficit": bubble_bol_deficit(&b, r),
                        "gauss_bonnet": gauss_bonnet_check(&b, r, &q)?,
                    }),
                    csv: Some(profile.to_csv_string()),
                })
            }
            Command::Bol { ref profile, lambda, shift, r } => {
                let bubble = LiouvilleBubble::new(lambda)?;
                let shifted;
                let loaded;
                let (field, outer): (&dyn RadialField, f64) = match profile {
                    Some(path) => {
                        loaded = read_profile(path)?;
                        let o = loaded.grid().outer_radius();
                        (&loaded, o)
                    }
                    None => {
                        shifted = ShiftedBubble { bubble, shift };
                        (&shifted, r.unwrap_or(1.0))
                    }
                };
                let radius = r.unwrap_or(outer);
                let grid = RadialGrid::uniform(radius, cfg.grid_nodes)?;
                let deficit = bol_deficit(field, radius, &q)?;
                let hyp = radial_hypothesis_check(field, &grid, &q)?;
                let levels = level_functions(field, &grid, &q).ok();
                let closed = (profile.is_none() && shift == 0.0)
                    .then(|| bubble_bol_deficit(&bubble, radius));
                Ok(Outcome {
                    payload: json!({
                        "R": radius,
                        "bol_deficit": deficit,
                        "bol_deficit_closed_form": closed,
                        "hypothesis": {
                            "passed": hyp.passed(),
                            "violations": hyp.violations,
                            "strict_nodes": hyp.strict_nodes,
                            "total_mass": hyp.total_mass,
                            "mass_within_8pi": hyp.mass_within_8pi,
                            "bound": sym("8*pi", EIGHT_PI),
                        },
                        "levels": levels.as_ref().map(|l| json!({
                            "boundary_threshold": l.boundary_threshold(),
                            "q_monotone": l.q_is_monotone(1e-8),
                            "samples": l.samples.len(),
                        })),
                    }),
                    csv: levels.map(|l| csv_of(|b| l.write_csv(b))),
                })
            }
            Command::Rearrange { ref phi, ref w, w_bubble, w_shift, lambda } => {
                let phi = read_profile(phi)?;
                let grid = phi.grid().clone();
                let shifted;
                let loaded;
                let weight: &dyn RadialField = match w {
                    Some(p) => {
                        loaded = read_profile(p)?;
                        &loaded
                    }
                    None => {
                        shifted = ShiftedBubble {
                            bubble: LiouvilleBubble::new(w_bubble)?,
                            shift: w_shift,
                        };
                        &shifted
                    }
                };
                let opts = RearrangeOptions {
                    quadrature: q,
                    ..RearrangeOptions::default()
                };
                let out = rearrange_radial(&phi, weight, &grid, lambda, &opts)?;
                let grad = gradient_comparison(&phi, weight, &grid, &out, &q)?;
                Ok(Outcome {
                    payload: json!({
                        "summary": out.summary(),
                        "min_gradient_difference": grad.min_difference,
                        "starred_monotone": grad.starred_monotone,
                        "levels": out.levels.len(),
                    }),
                    csv: Some(out.profile.to_csv_string()),
                })
            }
            Command::Pair { lambda1, r } => {
                let p = make_pair(lambda1, r)?;
                let (u1, u2) = p.bubbles();
                let beta = p.boundary_beta();
                let (z1, z2) = cap_heights(&p);
                Ok(Outcome {
                    payload: json!({
                        "pair": p,
                        "masses": [bubble_mass(&u1, r), bubble_mass(&u2, r)],
                        "total_mass": pair_total_mass(&p),
                        "expected_total": sym("8*pi", EIGHT_PI),
                        "cap_heights": [z1, z2],
                        "boundary_beta": beta,
                        "mass_roots": quadratic_mass_roots(beta)?,
                        "kappa_bound": sym("sqrt(2)/R", 2f64.sqrt() / r),
                    }),
                    csv: None,
                })
            }
            Command::SciVerify { ref w1, ref w2, ref f1, ref f2, lambda1, r, eps, normalization } => {
                let opts = SciOptions {
                    quadrature: q,
                    ..SciOptions::default()
                };
                let zero = ConstantField(0.0);
                let report = match (w1, w2) {
                    (Some(a), Some(b)) => {
                        let (a, b) = (read_profile(a)?, read_profile(b)?);
                        let fa = f1.as_deref().map(read_profile).transpose()?;
                        let fb = f2.as_deref().map(read_profile).transpose()?;
                        let fa: &dyn RadialField = fa.as_ref().map_or(&zero, |p| p as _);
                        let fb: &dyn RadialField = fb.as_ref().map_or(&zero, |p| p as _);
                        sci_verify_radial(&a, &b, fa, fb, a.grid(), &opts)?
                    }
                    _ => {
                        let p = make_pair(lambda1, r)?;
                        let (ua, ub) = p.bubbles();
                        let grid = RadialGrid::uniform(r, cfg.grid_nodes)?;
                        let w2 = HeightPerturbedBubble::new(ub, eps, r);
                        let src = w2.source_field();
                        sci_verify_radial(&ua, &w2, &zero, &src, &grid, &opts)?
                    }
                };
                let (scale, bound) = match normalization {
                    Normalization::U => (1.0, sym("8*pi", EIGHT_PI)),
                    Normalization::V => (0.5, sym("4*pi", FOUR_PI)),
                };
                let mut raw = to_json(&report);
                raw["bound"] = sym("8*pi", EIGHT_PI);
                Ok(Outcome {
                    payload: json!({
                        "normalization": normalization,
                        "mass_w1": report.mass_w1 * scale,
                        "mass_w2": report.mass_w2 * scale,
                        "total_mass": report.total_mass * scale,
                        "bound": bound,
                        "slack": report.slack * scale,
                        "trivial": report.trivial,
                        "report": raw,
                    }),
                    csv: None,
                })
            }
            Command::Dichotomy { lambda1, r, ref psi, branch } => {
                let p = make_pair(lambda1, r)?;
                let profile = match psi {
                    Some(path) => read_profile(path)?,
                    None => {
                        let (u1, u2) = p.bubbles();
                        let u = match branch {
                            1 => u1,
                            2 => u2,
                            _ => return Err(CliError::Usage("--branch must be 1 or 2".into())),
                        };
                        RadialProfile::sample(&u, &RadialGrid::uniform(r, cfg.grid_nodes)?)?
                    }
                };
                let opts = DichotomyOptions {
                    quadrature: q,
                    ..DichotomyOptions::default()
                };
                let rep = dichotomy_check(&profile, profile.grid(), &p, &opts)?;
                Ok(Outcome {
                    payload: json!({ "pair": p, "report": rep }),
                    csv: None,
                })
            }
            Command::Eigen { lambda, r, mass, nodes } => {
                let b = LiouvilleBubble::new(lambda)?;
                let radius = match (r, mass) {
                    (Some(r), _) => r,
                    (None, Some(m)) => b.radius_for_mass(m)?,
                    (None, None) => b.radius_for_mass(FOUR_PI)?,
                };
                let rep = first_eigenvalue(&b, radius, nodes, &q)?;
                Ok(Outcome {
                    payload: json!({
                        "bubble": b,
                        "R": radius,
                        "report": rep,
                        "critical_mass": sym("4*pi", FOUR_PI),
                    }),
                    csv: None,
                })
            }
            Command::Shoot { ref kernel, a0, target_beta: target, a0_min, a0_max } => {
                let k = kernel.spec()?;
                let so = shoot_opts(cfg);
                let res = match target {
                    Some(t) => target_beta(
                        &k,
                        t,
                        &so,
                        &TargetOptions {
                            a0_min,
                            a0_max,
                            ..TargetOptions::default()
                        },
                    )?,
                    None => shoot(&k, a0, &so)?,
                };
                let threshold = 2.0 * k.l() + 2.0;
                Ok(Outcome {
                    payload: json!({
                        "summary": res,
                        "pohozaev_relative": res.pohozaev_residual / (PI * res.beta * res.beta),
                        "decay_threshold": threshold,
                        "beta_interval": k.radial_beta_interval(),
                    }),
                    csv: Some(csv_of(|b| res.write_csv(b))),
                })
            }
            Command::Sweep { ref kernel, a0_min, a0_max, steps } => {
                let k = kernel.spec()?;
                if steps == 0 {
                    return Err(CliError::Usage("--steps must be positive".into()));
                }
                let rep = beta_sweep(&k, &a0_grid(a0_min, a0_max, steps), &shoot_opts(cfg))?;
                Ok(Outcome {
                    csv: Some(csv_of(|b| rep.write_csv(b))),
                    payload: to_json(&rep),
                })
            }
            Command::Transform { kind, alpha, gamma, value } => {
                let opts = TransformOptions {
                    r_max: cfg.r_max,
                    quadrature: q,
                    ..TransformOptions::default()
                };
                let (profile, payload) = match kind {
                    TransformKind::Mt => {
                        let (p, rep) = mt_transform(&ConstantSphere(value), alpha, &opts)?;
                        (p, json!({ "report": rep, "expected_mass_symbol": "8*pi/alpha" }))
                    }
                    TransformKind::Singular => {
                        let (p, rep) = singular_mf_transform(&ConstantSphere(value), alpha, &opts)?;
                        (p, json!({ "report": rep, "expected_mass_symbol": "4*pi*(alpha+3)" }))
                    }
                    TransformKind::Onsager => {
                        let (p, rep) = onsager_transform(
                            &ConstantField(value),
                            alpha,
                            gamma,
                            ONSAGER_TOL,
                            &opts,
                        )?;
                        (
                            p,
                            json!({
                                "report": rep,
                                "gamma_threshold_symbol": "alpha/(8*pi) - 1",
                            }),
                        )
                    }
                };
                Ok(Outcome {
                    payload,
                    csv: Some(profile.to_csv_string()),
                })
            }
            Command::Jalpha { alpha, eps, constant } => {
                let opts = JalphaOptions::default();
                let (rep, xbar) = match eps {
                    Some(e) => {
                        let (xbar, g) = constrained_perturbation(e, &opts)?;
                        (jalpha_eval(&JalphaInput { alpha, g: &g }, &opts)?, Some(xbar))
                    }
                    None => {
                        let g = ConstantSphere(constant.unwrap_or(0.0));
                        (jalpha_eval(&JalphaInput { alpha, g: &g }, &opts)?, None)
                    }
                };
                Ok(Outcome {
                    payload: json!({ "report": rep, "shift": xbar }),
                    csv: None,
                })
            }
        }
    }
}

/// `U_λ + c`, with exact derivatives.
struct ShiftedBubble {
    bubble: LiouvilleBubble,
    shift: f64,
}

impl RadialField for ShiftedBubble {
    fn value(&self, r: f64) -> f64 {
        self.bubble.value(r) + self.shift
    }
    fn derivative(&self, r: f64) -> f64 {
        self.bubble.derivative(r)
    }
    fn laplacian(&self, r: f64) -> f64 {
        self.bubble.laplacian(r)
    }
    fn has_derivative(&self) -> bool {
        true
    }
}
