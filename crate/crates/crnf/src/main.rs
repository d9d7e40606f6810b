use clap::{Parser, Subcommand, ValueEnum};
use crnf::flatten::flatten_test;
use crnf::io::{self, AutoParamsDocument, ManifoldDocument};
use crnf::moser::{run_iteration, IterationConfig, IterationReport};
use crnf::oracle::oracle_solve;
use crnf::pseudo_normal::{check_map_normalization, check_phi_normalization, normal_form, solve_linearized, Manifold};
use crnf::quadric_auto::{make_auto, quadric_residual, random_params, Family};
use crnf::series::coeff;
use rand::SeedableRng;
use serde_json::{json, Value};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "crnf", version, about = "Pseudo-normal forms of w = |z|² + E(z, z̄) in exact arithmetic")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(clap::Args)]
struct Common {
    /// Manifold document (JSON).
    #[arg(long)]
    input: String,
    /// Truncation degree; overrides the document's and truncates its terms.
    #[arg(long)]
    degree: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Pseudo-normal form: map H, remainder phi, order s, violations.
    Normalize(Common),
    /// Flattening verdict with witness.
    Flatten(Common),
    /// Rapid iteration report.
    Iterate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        steps: u32,
        #[arg(long, default_value_t = 64)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Threshold of the monitored smallness predicate, "p/q".
        #[arg(long)]
        delta: Option<String>,
    },
    /// Checks automorphism parameters against the quadric residual; without
    /// --input, checks a seeded suite of both families.
    VerifyAuto {
        #[arg(long)]
        input: Option<String>,
        #[arg(long, default_value_t = 6)]
        degree: u32,
        #[arg(long, default_value_t = 2)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 20)]
        count: usize,
    },
    /// Dense linear solve of the linearized equation for Gamma = E, compared
    /// with the closed-form solver.
    Oracle(Common),
}

enum Failure {
    Domain(String),
    Input(String),
}

impl From<crnf::Error> for Failure {
    fn from(e: crnf::Error) -> Self {
        match e {
            crnf::Error::Parse(_) => Failure::Input(e.to_string()),
            _ => Failure::Domain(e.to_string()),
        }
    }
}

/// A successful run whose verdict is negative still exits 1.
struct Outcome {
    report: Value,
    text: String,
    ok: bool,
}

fn load(c: &Common) -> Result<Manifold, Failure> {
    let text = std::fs::read_to_string(&c.input).map_err(|e| Failure::Input(format!("{}: {e}", c.input)))?;
    let mut doc: ManifoldDocument = serde_json::from_str(&text).map_err(|e| Failure::Input(e.to_string()))?;
    if let Some(d) = c.degree {
        doc.degree = d;
        doc.terms.retain(|t| t.i.iter().chain(&t.j).sum::<u32>() + 2 * t.m <= d);
    }
    Ok(io::parse_manifold(&doc)?)
}

fn normalize(c: &Common) -> Result<Outcome, Failure> {
    let m = load(c)?;
    let r = normal_form(&m)?;
    let map_v = check_map_normalization(&r.map);
    let phi_v = check_phi_normalization(&r.phi)?;
    let violations: Vec<String> = map_v.iter().chain(&phi_v).map(|v| v.to_string()).collect();
    let text = format!(
        "cap {}\nmap identity: {}\nphi: {} terms\ns = {}\nviolations: {}\n",
        m.cap(),
        r.map.is_identity(),
        r.phi.len(),
        r.s,
        if violations.is_empty() { "none".into() } else { violations.join("; ") }
    );
    Ok(Outcome {
        report: json!({
            "cap": m.cap(),
            "map": io::emit_map(&r.map),
            "phi": io::emit_series(&r.phi),
            "s": r.s,
            "violations": violations,
        }),
        ok: violations.is_empty(),
        text,
    })
}

fn flatten(c: &Common) -> Result<Outcome, Failure> {
    let m = load(c)?;
    let v = flatten_test(&m)?;
    let verdict = if v.flat {
        format!("flat through degree {}", v.cap)
    } else {
        format!("not flat (decided within degree {})", v.cap)
    };
    let witness = v.witness.as_ref().map(|w| {
        json!({
            "i": w.i, "j": w.j,
            "coeff": [w.coeff.real.to_string(), w.coeff.imaginary.to_string()],
            "conj_partner_coeff": [w.conj_coeff.real.to_string(), w.conj_coeff.imaginary.to_string()],
        })
    });
    let mut text = format!("{verdict}\n");
    if let Some(w) = &v.witness {
        text += &format!("witness: z^{:?} zbar^{:?} has {} but its partner has {}\n", w.i, w.j, fmt_c(&w.coeff), fmt_c(&w.conj_coeff));
    }
    Ok(Outcome {
        report: json!({"cap": v.cap, "flat": v.flat, "verdict": verdict, "witness": witness, "phi": io::emit_series(&v.phi)}),
        text,
        ok: true,
    })
}

fn fmt_c(c: &coeff::C) -> String {
    format!("{} + {}i", c.real, c.imaginary)
}

fn iterate_text(r: &IterationReport) -> String {
    let d: Vec<String> = r.d_sequence.iter().map(|v| v.to_string()).collect();
    let mut s = format!("cap {}  n {}\nd-sequence: {}\n", r.cap, r.dim, d.join(", "));
    s += "nu,d,r,rho,majorant_E,sup_next,C_d,C~_d,hypothesis,bounds_ok,decay_term\n";
    for x in &r.records {
        let bounds = x.estimates.iter().all(|b| b.pass) && x.gradient.pass && x.coefficient_bounds.failures.is_empty() && x.contraction.pass;
        s += &format!(
            "{},{},{},{},{:.6e},{:.6e},{:.6e},{:.6e},{},{},{:.6}\n",
            x.nu,
            x.d,
            x.radii.r,
            x.radii.rho,
            coeff::to_f64(&x.majorant_e),
            x.contraction.lhs,
            x.c_d,
            x.c_tilde_d,
            x.hypothesis_holds,
            bounds,
            x.decay_term
        );
    }
    if let Some(k) = r.stall {
        s += &format!("stall: normal form has a nonzero term of degree s = {k}\n");
    }
    if r.stationary {
        s += "stationary: E = 0\n";
    }
    if let Some(c) = &r.cap_exhausted {
        s += &format!("stopped: {c}\n");
    }
    s
}

fn iterate(c: &Common, steps: u32, samples: usize, seed: u64, delta: &Option<String>) -> Result<Outcome, Failure> {
    let m = load(c)?;
    let delta = match delta {
        Some(s) => Some(coeff::parse_rational(s).ok_or_else(|| Failure::Input(format!("malformed delta {s:?}")))?),
        None => None,
    };
    let cfg = IterationConfig { samples, seed, delta, ..Default::default() };
    let r = run_iteration(&m, steps, &cfg)?;
    Ok(Outcome {
        text: iterate_text(&r),
        ok: r.all_checks_pass(),
        report: serde_json::to_value(&r).expect("report serializes"),
    })
}

fn verify_auto(input: &Option<String>, degree: u32, dim: usize, seed: u64, count: usize) -> Result<Outcome, Failure> {
    let mut cases = Vec::new();
    match input {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{path}: {e}")))?;
            let doc: AutoParamsDocument = serde_json::from_str(&text).map_err(|e| Failure::Input(e.to_string()))?;
            cases.push(io::parse_auto_params(&doc)?);
        }
        None => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            for family in [Family::Linear, Family::Full] {
                for _ in 0..count {
                    cases.push((random_params(&mut rng, dim, degree, family), family));
                }
            }
        }
    }
    let mut rows = Vec::new();
    let mut ok = true;
    for (k, (p, family)) in cases.iter().enumerate() {
        let res = quadric_residual(&make_auto(p, *family)?)?;
        ok &= res.is_zero();
        rows.push(json!({
            "case": k,
            "family": if *family == Family::Linear { "linear" } else { "full" },
            "cap": p.cap(),
            "residual_zero": res.is_zero(),
            "residual": io::emit_series(&res),
        }));
    }
    let zero = rows.iter().filter(|r| r["residual_zero"] == true).count();
    Ok(Outcome {
        text: format!("{zero}/{} parameter sets preserve the quadric through the cap\n", rows.len()),
        report: json!({"cases": rows, "all_zero": ok}),
        ok,
    })
}

fn oracle(c: &Common) -> Result<Outcome, Failure> {
    let m = load(c)?;
    let dense = oracle_solve(m.e())?;
    let closed = solve_linearized(m.e())?;
    let agree = dense == closed;
    Ok(Outcome {
        text: format!("closed form and dense solve {}\n", if agree { "agree" } else { "DISAGREE" }),
        report: json!({
            "agree": agree,
            "f": dense.f.iter().map(io::emit_series).collect::<Vec<_>>(),
            "g": io::emit_series(&dense.g),
            "phi": io::emit_series(&dense.phi),
        }),
        ok: agree,
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Normalize(c) => normalize(c),
        Command::Flatten(c) => flatten(c),
        Command::Iterate { common, steps, samples, seed, delta } => iterate(common, *steps, *samples, *seed, delta),
        Command::VerifyAuto { input, degree, dim, seed, count } => verify_auto(input, *degree, *dim, *seed, *count),
        Command::Oracle(c) => oracle(c),
    };
    match result {
        Ok(out) => {
            match cli.format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&out.report).expect("json")),
                Format::Text => print!("{}", out.text),
            }
            if out.ok {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(f) => {
            let (kind, msg, code) = match f {
                Failure::Domain(m) => ("domain", m, 1),
                Failure::Input(m) => ("input", m, 2),
            };
            match cli.format {
                Format::Json => println!("{}", json!({"error": {"kind": kind, "message": msg, "exit_code": code}})),
                Format::Text => eprintln!("error ({kind}): {msg}"),
            }
            ExitCode::from(code)
        }
    }
}
