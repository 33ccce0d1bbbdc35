//! Command-line front end. Every command reads JSON, writes one JSON document
//! that echoes the resolved configuration and the convention constants, and
//! exits 0 on success, 1 on a domain error and 2 on a usage error.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::balance::{
    balance_residual_points, solve_cy_balance, solve_point_balance, CySolverOptions,
    PointEmbedding, SectionScaling,
};
use crate::closed_form::{documented_minimal_cases, reduce_discrepancy, LinearPointParams};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::grassmann::{AlgebraContext, Complex, Multivector, OddElement, Parity};
use crate::integrate::{
    berezin_point_integrate, plane_quadrature, ChartDensity, PointWeight, QuadratureSpec,
    CY_CONTRACTION, EPSILON_12,
};
use crate::projective::{veronese_map, ProjectivePoint};
use crate::random::{random_complex, random_homogeneous, random_invertible_even, random_multivector};
use crate::supermatrix::{is_unitary, u11_element, SuperMatrix};

#[derive(Parser, Debug)]
#[command(name = "superbalance", version, about = "Grassmann algebra, supermatrix and balanced-embedding calculator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone)]
struct Io {
    /// Input JSON file
    #[arg(short = 'i', long = "input")]
    input: Option<PathBuf>,
    /// Output file (stdout when absent)
    #[arg(short = 'o', long = "output")]
    output: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct Quad {
    #[arg(long, default_value_t = 64)]
    radial: usize,
    #[arg(long, default_value_t = 64)]
    angular: usize,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

impl Quad {
    fn spec(&self) -> QuadratureSpec {
        QuadratureSpec {
            radial: self.radial,
            angular: self.angular,
            tol: self.tol,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum WeightArg {
    None,
    Exp,
}

impl From<WeightArg> for PointWeight {
    fn from(w: WeightArg) -> Self {
        match w {
            WeightArg::None => PointWeight::None,
            WeightArg::Exp => PointWeight::Exp,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DensityArg {
    Flat,
    AbsZSquared,
}

impl From<DensityArg> for ChartDensity {
    fn from(d: DensityArg) -> Self {
        match d {
            DensityArg::Flat => ChartDensity::Flat,
            DensityArg::AbsZSquared => ChartDensity::AbsZSquared,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Builtin {
    /// 1/(1+|z|²)²
    FsArea,
    /// |z|²/(1+|z|²)³
    SecondMoment,
    /// z/(1+|z|²)³
    Phase,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Grassmann product of {"a", "b"}
    Mul(Io),
    /// Berezinian of a supermatrix
    Berezinian(Io),
    /// Residual of g†g − 𝕀
    UnitaryCheck {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Affine coordinates of a point, optionally moved to another chart
    Chart {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 0)]
        chart: usize,
        #[arg(long)]
        to: Option<usize>,
    },
    /// Super-norm Σ|z|² + iΣθθ̄ of a point
    Norm(Io),
    /// Image of a P^{1|2} point under the degree-m sections
    Veronese {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 2)]
        m: usize,
    },
    /// Point Berezin integral of {"integrand", "theta"} or a built-in plane integral
    Integrate {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_enum, default_value = "none")]
        weight: WeightArg,
        #[arg(long, value_enum)]
        integrand: Option<Builtin>,
        #[command(flatten)]
        quad: Quad,
    },
    /// Summed moment matrices of one embedding or a list of embeddings
    BalancePoint {
        #[command(flatten)]
        io: Io,
        #[arg(long, value_enum, default_value = "none")]
        weight: WeightArg,
    },
    /// Balance the point [1:0] for a given σ
    BalancePointSolve {
        #[command(flatten)]
        io: Io,
        /// identity, zero, or four entries "s11,s12,s21,s22" (use re+imi for complex)
        #[arg(long, default_value = "identity")]
        sigma: String,
    },
    /// Balance the degree-m section embedding of P^{1|2}
    BalanceCy {
        #[command(flatten)]
        io: Io,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, value_enum, default_value = "flat")]
        density: DensityArg,
        #[arg(long, default_value_t = 500)]
        max_iterations: usize,
        #[arg(long, default_value_t = 1e-6)]
        balance_tol: f64,
        #[command(flatten)]
        quad: Quad,
    },
    /// Run the invariant suite
    Selftest {
        #[command(flatten)]
        io: Io,
    },
}

impl Command {
    fn io(&self) -> &Io {
        match self {
            Command::Mul(io) | Command::Berezinian(io) | Command::Norm(io) => io,
            Command::UnitaryCheck { io, .. }
            | Command::Chart { io, .. }
            | Command::Veronese { io, .. }
            | Command::Integrate { io, .. }
            | Command::BalancePoint { io, .. }
            | Command::BalancePointSolve { io, .. }
            | Command::BalanceCy { io, .. }
            | Command::Selftest { io } => io,
        }
    }
}

/// Convention constants echoed with every result.
pub fn conventions() -> Value {
    json!({
        "point_berezin_order": "eta1, etabar1, eta2, etabar2, ...",
        "cy_berezin_order": "theta1, theta2, thetabar1, thetabar2",
        "epsilon_12": EPSILON_12,
        "cy_contraction": CY_CONTRACTION,
        "conjugation": "antilinear homomorphism, no reversal",
        "odd_norm_term": "i * sum theta thetabar",
        "area_element": "dA = dx dy",
        "complex_encoding": "[re, im]",
    })
}

fn read_input<T: for<'de> Deserialize<'de>>(path: Option<&Path>) -> Result<T> {
    let path = path.ok_or_else(|| Error::InvalidInput("this command needs -i <file>".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
}

fn parse_complex(s: &str) -> Result<Complex> {
    s.trim()
        .parse::<Complex>()
        .map_err(|_| Error::InvalidInput(format!("not a complex number: {s}")))
}

fn parse_sigma(s: &str) -> Result<Vec<Vec<Complex>>> {
    let one = Complex::new(1.0, 0.0);
    let zero = Complex::new(0.0, 0.0);
    match s {
        "identity" => Ok(vec![vec![one, zero], vec![zero, one]]),
        "zero" => Ok(vec![vec![zero; 2]; 2]),
        _ => {
            let v: Vec<Complex> = s.split(',').map(parse_complex).collect::<Result<_>>()?;
            if v.len() != 4 {
                return Err(Error::InvalidInput(format!(
                    "σ needs 4 entries, got {}",
                    v.len()
                )));
            }
            Ok(vec![vec![v[0], v[1]], vec![v[2], v[3]]])
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MulInput {
    a: Multivector,
    b: Multivector,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct PointIntegrand {
    integrand: Multivector,
    #[serde(default)]
    theta: Vec<Multivector>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Embeddings {
    One(PointEmbedding),
    Many(Vec<PointEmbedding>),
}

fn quad_config(spec: &QuadratureSpec) -> Value {
    serde_json::to_value(spec).expect("plain struct")
}

fn execute(cmd: &Command) -> Result<(Value, Value)> {
    let input = cmd.io().input.as_deref();
    let exec = Execution::default();
    match cmd {
        Command::Mul(_) => {
            let m: MulInput = read_input(input)?;
            Ok((json!({}), json!({ "product": m.a.checked_mul(&m.b)? })))
        }
        Command::Berezinian(_) => {
            let g: SuperMatrix = read_input(input)?;
            let b = g.berezinian()?;
            Ok((
                json!({}),
                json!({ "berezinian": *b, "body_re": b.body().re, "body_im": b.body().im }),
            ))
        }
        Command::UnitaryCheck { tol, .. } => {
            let g: SuperMatrix = read_input(input)?;
            Ok((json!({ "tol": tol }), serde_json::to_value(is_unitary(&g, *tol)?).expect("report")))
        }
        Command::Chart { chart, to, .. } => {
            let pt: ProjectivePoint = read_input(input)?;
            let a = pt.normalize(*chart)?;
            let a = match to {
                Some(j) => a.change_chart(*j)?,
                None => a,
            };
            Ok((
                json!({ "chart": chart, "to": to }),
                json!({ "chart": a.chart(), "xi": a.xi(), "theta": a.theta() }),
            ))
        }
        Command::Norm(_) => {
            let pt: ProjectivePoint = read_input(input)?;
            Ok((json!({}), json!({ "super_norm": pt.super_norm() })))
        }
        Command::Veronese { m, .. } => {
            let pt: ProjectivePoint = read_input(input)?;
            Ok((json!({ "m": m }), json!({ "image": veronese_map(*m, &pt)? })))
        }
        Command::Integrate {
            weight,
            integrand,
            quad,
            ..
        } => {
            if let Some(b) = integrand {
                let spec = quad.spec();
                let f = match b {
                    Builtin::FsArea => |z: Complex| Complex::new((1.0 + z.norm_sqr()).powi(-2), 0.0),
                    Builtin::SecondMoment => {
                        |z: Complex| Complex::new(z.norm_sqr() * (1.0 + z.norm_sqr()).powi(-3), 0.0)
                    }
                    Builtin::Phase => |z: Complex| z * (1.0 + z.norm_sqr()).powi(-3),
                };
                let r = plane_quadrature(f, &spec, exec)?;
                Ok((
                    json!({ "integrand": format!("{b:?}"), "quadrature": quad_config(&spec) }),
                    serde_json::to_value(r).expect("result"),
                ))
            } else {
                let p: PointIntegrand = read_input(input)?;
                let w = PointWeight::from(*weight);
                let v = berezin_point_integrate(&p.integrand, w, &p.theta)?;
                Ok((json!({ "weight": w }), json!({ "value": v })))
            }
        }
        Command::BalancePoint { weight, .. } => {
            let es = match read_input::<Embeddings>(input)? {
                Embeddings::One(e) => vec![e],
                Embeddings::Many(v) => v,
            };
            let w = PointWeight::from(*weight);
            let r = balance_residual_points(&es, w, exec)?;
            Ok((json!({ "weight": w, "points": es.len() }), serde_json::to_value(r).expect("report")))
        }
        Command::BalancePointSolve { sigma, .. } => {
            let s = parse_sigma(sigma)?;
            let sol = solve_point_balance(&s)?;
            Ok((
                json!({ "sigma": s, "point": [1.0, 0.0] }),
                json!({
                    "alpha_tilde_0": sol.alpha_tilde[0].re,
                    "alpha_tilde_1": sol.alpha_tilde[1].re,
                    "lambda": sol.report.lambda,
                    "eta": sol.report.eta,
                    "residual": sol.report.even_residual,
                    "verified": sol.verified,
                    "embedding": sol.embedding,
                    "solution": sol,
                }),
            ))
        }
        Command::BalanceCy {
            m,
            density,
            max_iterations,
            balance_tol,
            quad,
            ..
        } => {
            let spec = quad.spec();
            let opts = CySolverOptions {
                tol: *balance_tol,
                max_iterations: *max_iterations,
                density: (*density).into(),
            };
            let initial = match input {
                Some(p) => read_input::<SectionScaling>(Some(p))?,
                None => SectionScaling::unit(*m)?,
            };
            let out = solve_cy_balance(&initial, &spec, &opts, exec)?;
            Ok((
                json!({
                    "m": initial.m,
                    "density": opts.density,
                    "max_iterations": opts.max_iterations,
                    "balance_tol": opts.tol,
                    "quadrature": quad_config(&spec),
                }),
                serde_json::to_value(out).expect("outcome"),
            ))
        }
        Command::Selftest { .. } => {
            let checks = selftest();
            let passed = checks.iter().all(|c| c.passed);
            let v = json!({ "passed": passed, "checks": checks });
            if passed {
                Ok((json!({ "seed": SELFTEST_SEED }), v))
            } else {
                Err(Error::InvalidInput(format!("selftest failed: {v}")))
            }
        }
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Mul(_) => "mul",
        Command::Berezinian(_) => "berezinian",
        Command::UnitaryCheck { .. } => "unitary-check",
        Command::Chart { .. } => "chart",
        Command::Norm(_) => "norm",
        Command::Veronese { .. } => "veronese",
        Command::Integrate { .. } => "integrate",
        Command::BalancePoint { .. } => "balance-point",
        Command::BalancePointSolve { .. } => "balance-point-solve",
        Command::BalanceCy { .. } => "balance-cy",
        Command::Selftest { .. } => "selftest",
    }
}

fn emit(path: Option<&Path>, v: &Value) -> std::io::Result<()> {
    let text = serde_json::to_string_pretty(v).expect("json value") + "\n";
    match path {
        Some(p) => std::fs::write(p, text),
        None => std::io::stdout().write_all(text.as_bytes()),
    }
}

/// Parses `args` (program name first), runs the command and returns the exit
/// status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return code;
        }
    };
    let out = cli.command.io().output.clone();
    let (doc, status) = match execute(&cli.command) {
        Ok((config, result)) => (
            json!({
                "command": command_name(&cli.command),
                "config": config,
                "conventions": conventions(),
                "result": result,
            }),
            0,
        ),
        Err(e) => (json!({ "error": e.code(), "detail": e.to_string() }), 1),
    };
    match emit(out.as_deref(), &doc) {
        Ok(()) => status,
        Err(e) => {
            eprintln!("cannot write output: {e}");
            1
        }
    }
}

pub const SELFTEST_SEED: u64 = 0x5eed;

#[derive(Debug, Clone, serde::Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub worst: f64,
}

fn check(name: &'static str, worst: f64, limit: f64) -> Check {
    Check {
        name,
        passed: worst <= limit,
        worst,
    }
}

/// Seeded invariant suite shared by the `selftest` command.
pub fn selftest() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(SELFTEST_SEED);
    let ctx = AlgebraContext::new(2).expect("two pairs");
    let mut out = Vec::new();

    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let (a, b, c) = (
            random_multivector(&ctx, &mut rng, 0.6),
            random_multivector(&ctx, &mut rng, 0.6),
            random_multivector(&ctx, &mut rng, 0.6),
        );
        worst = worst.max((&(&a * &b) * &c).distance(&(&a * &(&b * &c))));
    }
    out.push(check("associativity", worst, 1e-12));

    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let pa = if rng.gen_bool(0.5) { Parity::Even } else { Parity::Odd };
        let pb = if rng.gen_bool(0.5) { Parity::Even } else { Parity::Odd };
        let a = random_homogeneous(&ctx, &mut rng, pa, 0.6);
        let b = random_homogeneous(&ctx, &mut rng, pb, 0.6);
        let sign = if pa == Parity::Odd && pb == Parity::Odd { -1.0 } else { 1.0 };
        worst = worst.max((&a * &b).distance(&(&b * &a).scale(sign)));
    }
    out.push(check("supercommutativity", worst, 1e-12));

    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let a = random_invertible_even(&ctx, &mut rng);
        let inv = a.invert().expect("invertible body");
        worst = worst
            .max((&a * &inv).distance(&ctx.one()))
            .max((&inv * &a).distance(&ctx.one()));
        let x = random_multivector(&ctx, &mut rng, 0.7);
        worst = worst.max(x.conjugate().conjugate().distance(&x));
    }
    out.push(check("inverse_and_conjugation", worst, 1e-12));

    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let g = |rng: &mut ChaCha8Rng| {
            let e = vec![
                vec![
                    random_invertible_even(&ctx, rng),
                    random_homogeneous(&ctx, rng, Parity::Odd, 0.8),
                ],
                vec![
                    random_homogeneous(&ctx, rng, Parity::Odd, 0.8),
                    random_invertible_even(&ctx, rng),
                ],
            ];
            SuperMatrix::new(ctx, 1, 1, e).expect("shape")
        };
        let (a, b) = (g(&mut rng), g(&mut rng));
        let lhs = a.matmul(&b).and_then(|p| p.berezinian());
        let rhs = a.berezinian().and_then(|x| Ok(&*x * &*b.berezinian()?));
        worst = match (lhs, rhs) {
            (Ok(l), Ok(r)) => worst.max(l.distance(&r)),
            _ => f64::INFINITY,
        };
    }
    out.push(check("berezinian_multiplicative", worst, 1e-12));

    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let psi = rng.gen_range(0.0..std::f64::consts::TAU);
        let gamma = OddElement::new(random_homogeneous(&ctx, &mut rng, Parity::Odd, 0.8))
            .expect("odd by construction");
        worst = worst.max(
            is_unitary(&u11_element(psi, &gamma), 1e-13)
                .map(|r| r.residual)
                .unwrap_or(f64::INFINITY),
        );
    }
    out.push(check("u11_unitary", worst, 1e-13));

    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let pt = ProjectivePoint::new(
            (0..3).map(|_| random_invertible_even(&ctx, &mut rng)).collect(),
            (0..2)
                .map(|_| random_homogeneous(&ctx, &mut rng, Parity::Odd, 0.8))
                .collect(),
        )
        .expect("valid point");
        for i in 0..3 {
            let a = pt.normalize(i).expect("invertible pivot");
            for j in 0..3 {
                for k in 0..3 {
                    let back = a
                        .change_chart(j)
                        .and_then(|b| b.change_chart(k))
                        .and_then(|b| b.change_chart(i));
                    worst = worst.max(back.map(|b| b.distance(&a)).unwrap_or(f64::INFINITY));
                }
            }
        }
    }
    out.push(check("chart_cocycles", worst, 1e-12));

    let spec = QuadratureSpec::default();
    let pi = std::f64::consts::PI;
    let q = |f: fn(Complex) -> Complex, want: Complex| {
        plane_quadrature(f, &spec, Execution::default())
            .map(|r| (r.value - want).norm())
            .unwrap_or(f64::INFINITY)
    };
    let worst = q(|z| Complex::new((1.0 + z.norm_sqr()).powi(-2), 0.0), Complex::new(pi, 0.0)).max(q(
        |z| Complex::new(z.norm_sqr() * (1.0 + z.norm_sqr()).powi(-3), 0.0),
        Complex::new(pi / 2.0, 0.0),
    ));
    out.push(check("quadrature_calibration", worst, 1e-8));
    let worst = q(|z| z * z * z.conj() / (1.0 + z.norm_sqr()).powi(5), Complex::new(0.0, 0.0));
    out.push(check("angular_selection", worst, 1e-12));

    let one = Complex::new(1.0, 0.0);
    let zero = Complex::new(0.0, 0.0);
    let worst = solve_point_balance(&[vec![one, zero], vec![zero, one]])
        .map(|s| s.report.even_residual)
        .unwrap_or(f64::INFINITY);
    out.push(check("point_balance_identity", worst, 1e-10));

    let mut worst: f64 = 0.0;
    let documented = documented_minimal_cases();
    for _ in 0..20 {
        let mut r = || random_complex(&mut rng);
        let p = LinearPointParams {
            alpha: [r(), r()],
            alpha_tilde: [r(), r()],
            sigma: [[r(), r()], [r(), r()]],
        };
        match reduce_discrepancy(&p) {
            Ok(None) => {}
            Ok(Some(case)) if documented.contains(&case.params) => {}
            _ => worst = f64::INFINITY,
        }
    }
    out.push(check("closed_form_errata_documented", worst, 0.0));
    out
}
