//! Command-line harness: instance validation, cocycle and L-function
//! evaluation, and the named verification suites.
//!
//! Output is line-delimited JSON records on stdout (or `--out`); progress
//! and errors go to stderr. The exit code is 0 iff every check passed.

use clap::{Args, Parser, Subcommand};
use eisenstein::checks::{self, RunConfig};
use eisenstein::cocycle::Tuple;
use eisenstein::eisenstein::{eval_psi_sum_multi, TruncationParams};
use eisenstein::extension::KElem;
use eisenstein::field::FElem;
use eisenstein::hecke::{
    coset_of_instance, eval_ekl, full_l, partial_l, AssemblyClass, HeckeCharData,
};
use eisenstein::homology::build_cycle;
use eisenstein::instance::FieldInstance;
use eisenstein::num::Complex;
use eisenstein::poly::{norm_form_poly, NormFormVariant};
use eisenstein::report::Report;
use serde::Deserialize;
use serde_json::json;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "eisenstein", version, about = "Eisenstein cocycles over imaginary quadratic fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Instance file(s)
    #[arg(long = "instance", value_name = "FILE")]
    instances: Vec<PathBuf>,
    /// s values, e.g. "2.5" or "3+2i" (repeatable)
    #[arg(long = "s", value_name = "COMPLEX")]
    s: Vec<String>,
    /// Truncation radii for lattice sums (repeatable)
    #[arg(long = "radius", value_name = "R")]
    radius: Vec<f64>,
    /// Norm bounds for L-function sums (repeatable)
    #[arg(long = "norm-bound", value_name = "B")]
    norm_bound: Vec<u64>,
    /// Working precision in bits
    #[arg(long, default_value_t = 128)]
    precision: u32,
    /// Seed for randomized property checks
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Trials for randomized property checks
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// Convergence-factor exponent k
    #[arg(long, default_value_t = 0)]
    k: i64,
    /// Character exponent l
    #[arg(long, default_value_t = 4)]
    l: u32,
    /// Write records to this file instead of stdout
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Validate instance files and report each invariant
    Validate(CommonArgs),
    /// Evaluate ψ on the instance's cycle tuple at an exact point
    #[command(name = "eval-psi")]
    EvalPsi {
        #[command(flatten)]
        common: CommonArgs,
        /// exact point, coordinates "a,b" (meaning a + b√−D) separated by ';'
        #[arg(long = "x", value_name = "COORDS")]
        x: String,
    },
    /// Evaluate the truncated Eisenstein cocycle paired with the unit cycle
    #[command(name = "eval-Psi", alias = "eval-psi-sum")]
    EvalPsiSum(CommonArgs),
    /// Evaluate the partial Hecke L-function by direct summation
    #[command(name = "eval-partial-L", alias = "eval-partial-l")]
    EvalPartialL(CommonArgs),
    /// Evaluate the assembled L-function from an assembly file
    #[command(name = "eval-L", alias = "eval-l")]
    EvalL {
        #[command(flatten)]
        common: CommonArgs,
        /// assembly file listing ideal classes and residues
        #[arg(long, value_name = "FILE")]
        assembly: Option<PathBuf>,
    },
    /// Evaluate the rank-2 elliptic sum E_k^l(u, Λ, s)
    #[command(name = "eval-Ekl", alias = "eval-ekl")]
    EvalEkl {
        #[command(flatten)]
        common: CommonArgs,
        /// offset u as "re,im"
        #[arg(long, default_value = "0,0")]
        u: String,
        /// lattice basis "re,im;re,im"
        #[arg(long, default_value = "1,0;0,1")]
        lattice: String,
        /// numerator exponent in w^l
        #[arg(long = "l-pow", default_value_t = 4)]
        l_pow: i64,
    },
    /// Run the cocycle-relation and homogeneity/factor suites
    CheckCocycle(CommonArgs),
    /// Run the two-sided parametrization suite
    CheckParametrization(CommonArgs),
    /// Run every registered verification suite
    RunAll(CommonArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

struct Emitter {
    out: Box<dyn Write>,
}

impl Emitter {
    fn new(path: &Option<PathBuf>) -> Result<Self, String> {
        let out: Box<dyn Write> = match path {
            Some(p) => Box::new(std::fs::File::create(p).map_err(|e| e.to_string())?),
            None => Box::new(std::io::stdout()),
        };
        Ok(Emitter { out })
    }

    fn emit(&mut self, v: serde_json::Value) -> Result<(), String> {
        serde_json::to_writer(&mut self.out, &v).map_err(|e| e.to_string())?;
        self.out.write_all(b"\n").map_err(|e| e.to_string())
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    match cli.command {
        Command::Validate(c) => {
            let cfg = build_config(&c)?;
            let mut em = Emitter::new(&c.out)?;
            let report = checks::run_suites(Some(&["field-validation".to_string()]), &cfg);
            emit_report(&mut em, &report)?;
            Ok(exit_for(&report))
        }
        Command::EvalPsi { common, x } => cmd_eval_psi(&common, &x),
        Command::EvalPsiSum(c) => cmd_eval_psi_sum(&c),
        Command::EvalPartialL(c) => cmd_eval_partial_l(&c),
        Command::EvalL { common, assembly } => cmd_eval_l(&common, assembly.as_deref()),
        Command::EvalEkl {
            common,
            u,
            lattice,
            l_pow,
        } => cmd_eval_ekl(&common, &u, &lattice, l_pow),
        Command::CheckCocycle(c) => run_named_suites(
            &c,
            &[
                "cocycle-relations".to_string(),
                "homogeneity-factor".to_string(),
                "differentiation-oracle".to_string(),
            ],
        ),
        Command::CheckParametrization(c) => {
            run_named_suites(&c, &["parametrization".to_string()])
        }
        Command::RunAll(c) => {
            let cfg = build_config(&c)?;
            let mut em = Emitter::new(&c.out)?;
            let report = checks::run_suites(None, &cfg);
            emit_report(&mut em, &report)?;
            Ok(exit_for(&report))
        }
    }
}

fn run_named_suites(c: &CommonArgs, names: &[String]) -> Result<ExitCode, String> {
    let cfg = build_config(c)?;
    let mut em = Emitter::new(&c.out)?;
    let report = checks::run_suites(Some(names), &cfg);
    emit_report(&mut em, &report)?;
    Ok(exit_for(&report))
}

fn exit_for(report: &Report) -> ExitCode {
    if report.all_passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

fn emit_report(em: &mut Emitter, report: &Report) -> Result<(), String> {
    em.emit(json!({
        "record": "env",
        "precision": report.env.precision,
        "seed": report.env.seed,
        "version": report.env.version,
        "status": report.status,
    }))?;
    for c in &report.checks {
        em.emit(serde_json::to_value(c).map_err(|e| e.to_string())?)?;
    }
    Ok(())
}

fn build_config(c: &CommonArgs) -> Result<RunConfig, String> {
    let mut instances = Vec::new();
    for p in &c.instances {
        let inst = FieldInstance::load(p).map_err(|e| format!("{}: {e}", p.display()))?;
        instances.push(inst);
    }
    let s_grid = if c.s.is_empty() {
        vec![(2.5, 0.0), (3.0, 0.0), (3.0, 2.0)]
    } else {
        c.s.iter()
            .map(|t| parse_complex(t))
            .collect::<Result<Vec<_>, _>>()?
    };
    let radius_grid = if c.radius.is_empty() {
        vec![10.0, 20.0, 40.0]
    } else {
        c.radius.clone()
    };
    let bound_grid = if c.norm_bound.is_empty() {
        vec![100, 1000, 10000]
    } else {
        c.norm_bound.clone()
    };
    let cfg = RunConfig {
        instances,
        s_grid,
        radius_grid,
        bound_grid,
        precision: c.precision,
        seed: c.seed,
        trials: c.trials,
        k: c.k,
        l: c.l,
    };
    cfg.validate()?;
    Ok(cfg)
}

/// "2.5", "3+2i", "1-0.5i", "2i"
fn parse_complex(text: &str) -> Result<(f64, f64), String> {
    let t = text.trim().replace(' ', "");
    if let Some(stripped) = t.strip_suffix('i') {
        // split into real and imaginary at the last +/- that is not leading
        let chars: Vec<char> = stripped.chars().collect();
        let mut split = None;
        for i in (1..chars.len()).rev() {
            if (chars[i] == '+' || chars[i] == '-') && chars[i - 1] != 'e' && chars[i - 1] != 'E' {
                split = Some(i);
                break;
            }
        }
        match split {
            Some(i) => {
                let re: f64 = chars[..i]
                    .iter()
                    .collect::<String>()
                    .parse()
                    .map_err(|_| format!("bad complex {text:?}"))?;
                let im_str: String = chars[i..].iter().collect();
                let im: f64 = if im_str == "+" {
                    1.0
                } else if im_str == "-" {
                    -1.0
                } else {
                    im_str.parse().map_err(|_| format!("bad complex {text:?}"))?
                };
                Ok((re, im))
            }
            None => {
                let im: f64 = if stripped.is_empty() {
                    1.0
                } else {
                    stripped
                        .parse()
                        .map_err(|_| format!("bad complex {text:?}"))?
                };
                Ok((0.0, im))
            }
        }
    } else {
        let re: f64 = t.parse().map_err(|_| format!("bad complex {text:?}"))?;
        Ok((re, 0.0))
    }
}

fn parse_exact_point(text: &str, n: usize) -> Result<Vec<FElem>, String> {
    let coords: Vec<&str> = text.split(';').collect();
    if coords.len() != n {
        return Err(format!("expected {n} coordinates separated by ';'"));
    }
    coords
        .iter()
        .map(|c| {
            let parts: Vec<&str> = c.split(',').collect();
            if parts.len() != 2 {
                return Err(format!("coordinate {c:?} must be \"a,b\""));
            }
            FElem::parse(parts[0], parts[1])
        })
        .collect()
}

fn single_instance(c: &CommonArgs) -> Result<FieldInstance, String> {
    match c.instances.len() {
        1 => FieldInstance::load(&c.instances[0])
            .map_err(|e| format!("{}: {e}", c.instances[0].display())),
        0 => Err("an --instance file is required".into()),
        _ => Err("exactly one --instance file is required here".into()),
    }
}

fn cmd_eval_psi(c: &CommonArgs, x_text: &str) -> Result<ExitCode, String> {
    let inst = single_instance(c)?;
    let prep = inst.prepare(c.precision).map_err(|e| e.to_string())?;
    let x = parse_exact_point(x_text, inst.n())?;
    let chain = build_cycle(&inst, &prep, &inst.units).map_err(|e| e.to_string())?;
    let poly = norm_form_poly(&prep.m_matrix, NormFormVariant::P, c.l - 1)
        .map_err(|e| e.to_string())?;
    let f = &inst.alg.field;
    let mut em = Emitter::new(&c.out)?;
    let value = eisenstein::homology::pair(&chain, c.precision, |t: &Tuple| {
        eisenstein::cocycle::eval_psi(f, t, &poly, &x, c.precision)
    })
    .map_err(|e| e.to_string())?;
    em.emit(json!({
        "record": "eval-psi",
        "instance": inst.name,
        "x": x_text,
        "l": c.l,
        "value_re": value.re.to_string(),
        "value_im": value.im.to_string(),
        "precision": c.precision,
    }))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_eval_psi_sum(c: &CommonArgs) -> Result<ExitCode, String> {
    let inst = single_instance(c)?;
    let cfg = build_config(c)?;
    let prep = inst.prepare(c.precision).map_err(|e| e.to_string())?;
    let chain = build_cycle(&inst, &prep, &inst.units).map_err(|e| e.to_string())?;
    let poly = norm_form_poly(&prep.m_matrix, NormFormVariant::P, c.l - 1)
        .map_err(|e| e.to_string())?;
    let f = &inst.alg.field;
    let coset = coset_of_instance(&inst);
    let tuples: Vec<Tuple> = chain.terms.iter().map(|(_, t)| t.clone()).collect();
    let coeffs: Vec<i64> = chain.terms.iter().map(|(cf, _)| *cf).collect();
    let s_values: Vec<Complex> = cfg
        .s_grid
        .iter()
        .map(|(re, im)| Complex::from_f64(c.precision, *re, *im))
        .collect();
    let mut em = Emitter::new(&c.out)?;
    for radius in &cfg.radius_grid {
        let t = TruncationParams::new(*radius, c.precision);
        let vals = eval_psi_sum_multi(
            f,
            &coset,
            &prep.m_matrix,
            &tuples,
            &poly,
            &s_values,
            c.k,
            &t,
        )
        .map_err(|e| e.to_string())?;
        for (si, s) in cfg.s_grid.iter().enumerate() {
            let mut acc = Complex::zero(c.precision);
            let mut tail = 0.0f64;
            let mut terms = 0u64;
            let mut converged = true;
            let mut warn = false;
            for (ti, cf) in coeffs.iter().enumerate() {
                let pv = &vals[ti][si];
                let cff = rug::Float::with_val(c.precision, *cf);
                acc.add_assign(&pv.value.mul_float(&cff));
                tail += pv.tail_estimate * cf.unsigned_abs() as f64;
                terms = terms.max(pv.terms_summed);
                converged &= pv.converged;
                warn |= pv.domain_warning;
            }
            em.emit(json!({
                "record": "eval-Psi",
                "instance": inst.name,
                "s": format!("{}{:+}i", s.0, s.1),
                "k": c.k,
                "l": c.l,
                "R": radius,
                "value_re": acc.re.to_string(),
                "value_im": acc.im.to_string(),
                "terms": terms,
                "tail_estimate": tail,
                "converged": converged,
                "domain_warning": warn,
                "precision": c.precision,
            }))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_eval_partial_l(c: &CommonArgs) -> Result<ExitCode, String> {
    let inst = single_instance(c)?;
    let cfg = build_config(c)?;
    let prep = inst.prepare(c.precision).map_err(|e| e.to_string())?;
    let chi = HeckeCharData::new(&inst, c.k, c.l).map_err(|e| e.to_string())?;
    let mut em = Emitter::new(&c.out)?;
    for bound in &cfg.bound_grid {
        for (re, im) in &cfg.s_grid {
            let s = Complex::from_f64(c.precision, *re, *im);
            let lv = partial_l(&inst, &prep, &chi, &s, *bound).map_err(|e| e.to_string())?;
            em.emit(json!({
                "record": "eval-partial-L",
                "instance": inst.name,
                "s": format!("{re}{im:+}i"),
                "k": c.k,
                "l": c.l,
                "B": bound,
                "value_re": lv.value.re.to_string(),
                "value_im": lv.value.im.to_string(),
                "terms": lv.terms,
                "tail_estimate": lv.tail_estimate,
                "domain_warning": lv.domain_warning,
                "precision": c.precision,
            }))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

#[derive(Deserialize)]
struct RawAssembly {
    classes: Vec<RawClass>,
}

#[derive(Deserialize)]
struct RawClass {
    instance: String,
    chi: [String; 2],
    norm: u64,
    residues: Vec<RawResidue>,
}

#[derive(Deserialize)]
struct RawResidue {
    r: Vec<[String; 2]>,
    phi_turns: String,
}

fn load_assembly(path: &Path) -> Result<Vec<AssemblyClass>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
    let raw: RawAssembly = toml::from_str(&text).map_err(|e| e.to_string())?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let mut out = Vec::new();
    for rc in raw.classes {
        let inst_path = base.join(&rc.instance);
        let instance = FieldInstance::load(&inst_path)
            .map_err(|e| format!("{}: {e}", inst_path.display()))?;
        let chi_re: rug::Rational = rc.chi[0]
            .parse()
            .map_err(|e| format!("chi re: {e}"))?;
        let chi_im: rug::Rational = rc.chi[1]
            .parse()
            .map_err(|e| format!("chi im: {e}"))?;
        let mut residues = Vec::new();
        for rr in &rc.residues {
            let coords = rr
                .r
                .iter()
                .map(|p| FElem::parse(&p[0], &p[1]))
                .collect::<Result<Vec<_>, _>>()?;
            let r = KElem { coords };
            let turns: rug::Rational = rr
                .phi_turns
                .parse()
                .map_err(|e| format!("phi turns: {e}"))?;
            residues.push((r, turns));
        }
        out.push(AssemblyClass {
            instance,
            chi_b: (chi_re, chi_im),
            norm_b: rc.norm,
            residues,
        });
    }
    Ok(out)
}

fn cmd_eval_l(c: &CommonArgs, assembly: Option<&Path>) -> Result<ExitCode, String> {
    let classes = match assembly {
        Some(path) => load_assembly(path)?,
        None => {
            // class-number-one shortcut: single class b = (1), trivial φ
            let inst = single_instance(c)?;
            vec![AssemblyClass {
                chi_b: (rug::Rational::from(1), rug::Rational::new()),
                norm_b: 1,
                residues: vec![(inst.alg.zero(), rug::Rational::new())],
                instance: inst,
            }]
        }
    };
    let cfg = build_config(c)?;
    let mut em = Emitter::new(&c.out)?;
    for bound in &cfg.bound_grid {
        for (re, im) in &cfg.s_grid {
            let s = Complex::from_f64(c.precision, *re, *im);
            let lv = full_l(&classes, c.k, c.l, &s, *bound, c.precision)
                .map_err(|e| e.to_string())?;
            em.emit(json!({
                "record": "eval-L",
                "s": format!("{re}{im:+}i"),
                "k": c.k,
                "l": c.l,
                "B": bound,
                "value_re": lv.value.re.to_string(),
                "value_im": lv.value.im.to_string(),
                "terms": lv.terms,
                "tail_estimate": lv.tail_estimate,
                "domain_warning": lv.domain_warning,
                "precision": c.precision,
            }))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_eval_ekl(
    c: &CommonArgs,
    u_text: &str,
    lattice_text: &str,
    l_pow: i64,
) -> Result<ExitCode, String> {
    let parse_c = |t: &str| -> Result<Complex, String> {
        let parts: Vec<&str> = t.split(',').collect();
        if parts.len() != 2 {
            return Err(format!("expected \"re,im\", got {t:?}"));
        }
        let re: f64 = parts[0].trim().parse().map_err(|_| "bad re".to_string())?;
        let im: f64 = parts[1].trim().parse().map_err(|_| "bad im".to_string())?;
        Ok(Complex::from_f64(c.precision, re, im))
    };
    let u = parse_c(u_text)?;
    let lat_parts: Vec<&str> = lattice_text.split(';').collect();
    if lat_parts.len() != 2 {
        return Err("lattice must be \"re,im;re,im\"".into());
    }
    let lattice = [parse_c(lat_parts[0])?, parse_c(lat_parts[1])?];
    let cfg = build_config(c)?;
    let mut em = Emitter::new(&c.out)?;
    for radius in &cfg.radius_grid {
        for (re, im) in &cfg.s_grid {
            let s = Complex::from_f64(c.precision, *re, *im);
            let (value, terms, tail) =
                eval_ekl(&u, &lattice, c.k, l_pow, &s, *radius, c.precision)
                    .map_err(|e| e.to_string())?;
            em.emit(json!({
                "record": "eval-Ekl",
                "u": u_text,
                "lattice": lattice_text,
                "k": c.k,
                "l": l_pow,
                "s": format!("{re}{im:+}i"),
                "R": radius,
                "value_re": value.re.to_string(),
                "value_im": value.im.to_string(),
                "terms": terms,
                "tail_estimate": tail,
                "precision": c.precision,
            }))?;
        }
    }
    Ok(ExitCode::SUCCESS)
}
