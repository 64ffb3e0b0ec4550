use clap::{Parser, Subcommand, ValueEnum};
use quasi_units::forms::{self, Form};
use quasi_units::io;
use quasi_units::parallel::{parallel_diff, parallel_sum, parallel_sum_closed_form};
use quasi_units::quasi::{self, InfimumWitness};
use quasi_units::short::{self, generalized_short};
use quasi_units::suites::{self, RunConfig};
use quasi_units::{CMatrix, Error, PolarityPair, PsdMatrix, Tolerances};
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "qunit", version, about = "Parallel sums, generalized shorts and quasi-units of PSD matrices")]
struct Cli {
    /// Print machine-readable JSON instead of a text report
    #[arg(long, global = true)]
    json: bool,
    /// Write the result matrix here instead of printing it
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = Tolerances::default().tol_sym)]
    tol_sym: f64,
    #[arg(long, global = true, default_value_t = Tolerances::default().tol_psd)]
    tol_psd: f64,
    #[arg(long, global = true, default_value_t = Tolerances::default().tol_rank)]
    tol_rank: f64,
    #[arg(long, global = true, default_value_t = Tolerances::default().tol_order)]
    tol_order: f64,
    #[arg(long, global = true, default_value_t = Tolerances::default().tol_conv)]
    tol_conv: f64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Aux,
    Schur,
    Iter,
    All,
}

#[derive(Clone, Copy, ValueEnum)]
enum LatticeOp {
    Meet,
    Join,
}

#[derive(Clone, Copy, ValueEnum)]
enum GaloisCheck {
    Adjunction,
    Closure,
    Closed,
}

#[derive(Subcommand)]
enum Command {
    /// Parallel sum A:B
    Parsum { a: PathBuf, b: PathBuf },
    /// Parallel difference S÷T
    Pardiff { s: PathBuf, t: PathBuf },
    /// Generalized short [A]B
    Short {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, value_enum, default_value = "all")]
        method: Method,
    },
    /// Lebesgue decomposition of B with respect to A
    Lebesgue {
        a: PathBuf,
        b: PathBuf,
        /// Where to write the singular part
        #[arg(long)]
        singular_out: Option<PathBuf>,
    },
    /// Quasi-unit certificate for A in [0, B]
    Quasiunit { a: PathBuf, b: PathBuf },
    /// Infimum of A and B in the Loewner order
    Infimum { a: PathBuf, b: PathBuf },
    /// Meet or join of two quasi-units S, T of B
    Lattice {
        #[arg(long, value_enum)]
        op: LatticeOp,
        s: PathBuf,
        t: PathBuf,
        b: PathBuf,
    },
    /// Galois connection induced by the parallel sum with a reference form
    Galois {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long, value_enum)]
        check: GaloisCheck,
        /// The form t (closure, closed) or u (adjunction)
        t: PathBuf,
        /// The form v for the adjunction check
        u: Option<PathBuf>,
    },
    /// Operator Φ_t(w) on the quotient space of t
    Phi { t: PathBuf, w: PathBuf },
    /// Run the property suites
    Selftest {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Dimension range, e.g. 2..6
        #[arg(long, default_value = "2..6", value_parser = parse_dims)]
        dims: (usize, usize),
        /// Comma-separated suite names (default: all)
        #[arg(long, value_delimiter = ',')]
        suites: Vec<String>,
        /// Write matrices of failing trials into this directory
        #[arg(long)]
        failures_dir: Option<PathBuf>,
        /// List suite names and exit
        #[arg(long)]
        list: bool,
    },
}

fn parse_dims(s: &str) -> Result<(usize, usize), String> {
    let (lo, hi) = s.split_once("..").ok_or("expected a range like 2..6")?;
    let lo = lo.trim().parse().map_err(|e| format!("bad lower bound: {e}"))?;
    let hi = hi.trim().trim_start_matches('=').parse().map_err(|e| format!("bad upper bound: {e}"))?;
    Ok((lo, hi))
}

/// What a command produced: a report, an optional primary matrix, and whether
/// the checked property held.
struct Outcome {
    text: String,
    json: Value,
    matrix: Option<CMatrix>,
    ok: bool,
}

impl Outcome {
    fn new(text: String, json: Value, matrix: Option<CMatrix>) -> Self {
        Outcome { text, json, matrix, ok: true }
    }
}

fn gap_line(name: &str, gap: f64) -> String {
    format!("{name}: {gap:.3e}\n")
}

fn matrix_text(m: &CMatrix) -> String {
    let mut out = String::new();
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| {
                let z = m[(i, j)];
                if z.im == 0.0 {
                    format!("{:>12.6}", z.re)
                } else {
                    format!("{:>12.6}{:+.6}i", z.re, z.im)
                }
            })
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

fn load(path: &Path, tol: &Tolerances) -> quasi_units::Result<PsdMatrix> {
    io::read_psd(path, tol)
}

fn load_form(path: &Path, tol: &Tolerances) -> quasi_units::Result<Form> {
    io::read_form(path, tol)
}

fn run(cli: &Cli, tol: &Tolerances) -> quasi_units::Result<Outcome> {
    match &cli.command {
        Command::Parsum { a, b } => {
            let (a, b) = (load(a, tol)?, load(b, tol)?);
            let r = parallel_sum(&a, &b, tol)?;
            let gap = r.distance(&parallel_sum_closed_form(&a, &b, tol)?);
            let text = format!("A:B (rank {})\n{}", r.rank(), gap_line("gap to A(A+B)⁺B", gap));
            Ok(Outcome::new(text, json!({"rank": r.rank(), "closed_form_gap": gap}), Some(r.matrix().clone())))
        }
        Command::Pardiff { s, t } => {
            let (s, t) = (load(s, tol)?, load(t, tol)?);
            let r = parallel_diff(&s, &t, tol)?;
            let text = format!("S÷T (rank {})\n", r.rank());
            Ok(Outcome::new(text, json!({"rank": r.rank()}), Some(r.matrix().clone())))
        }
        Command::Short { a, b, method } => {
            let (a, b) = (load(a, tol)?, load(b, tol)?);
            let (r, extra) = match method {
                Method::Aux => (short::short_aux(&a, &b, tol)?, json!({})),
                Method::Schur => (short::short_schur(&a, &b, tol)?, json!({})),
                Method::Iter => (short::short_iterative(&a, &b, tol)?, json!({})),
                Method::All => {
                    let (_, _, _, g) = short::short_all(&a, &b, tol)?;
                    (generalized_short(&a, &b, tol)?, serde_json::to_value(g).expect("plain numbers"))
                }
            };
            let mut text = format!("[A]B (rank {})\n", r.rank());
            if let Some(obj) = extra.as_object() {
                for (k, v) in obj {
                    text.push_str(&gap_line(k, v.as_f64().unwrap_or(f64::NAN)));
                }
            }
            Ok(Outcome::new(text, json!({"rank": r.rank(), "agreement": extra}), Some(r.matrix().clone())))
        }
        Command::Lebesgue { a, b, singular_out } => {
            let (a, b) = (load(a, tol)?, load(b, tol)?);
            let d = short::lebesgue_decompose(&a, &b, tol)?;
            if let Some(p) = singular_out {
                io::write_matrix(p, d.singular_part.matrix())?;
            }
            let text = format!(
                "regular part rank {}, singular part rank {}\nunique: {}\nalpha_min: {}\nsingular part:\n{}",
                d.regular.rank(),
                d.singular_part.rank(),
                d.unique,
                d.alpha_min.map_or("-".into(), |a| format!("{a:.6e}")),
                matrix_text(d.singular_part.matrix())
            );
            let json = json!({
                "unique": d.unique,
                "alpha_min": d.alpha_min,
                "singular_part": io::matrix_to_json(d.singular_part.matrix()),
            });
            Ok(Outcome::new(text, json, Some(d.regular.matrix().clone())))
        }
        Command::Quasiunit { a, b } => {
            let (a, b) = (load(a, tol)?, load(b, tol)?);
            let cert = quasi::is_quasi_unit(&a, &b, tol)?;
            let json = serde_json::to_value(&cert).expect("plain fields");
            Ok(Outcome::new(cert.report() + "\n", json, cert.recovered_projection.clone()))
        }
        Command::Infimum { a, b } => {
            let (a, b) = (load(a, tol)?, load(b, tol)?);
            let r = quasi::ando_infimum(&a, &b, tol)?;
            let witness = match r.witness {
                InfimumWitness::LeftBelow => "[A]B ≤ [B]A",
                InfimumWitness::RightBelow => "[B]A ≤ [A]B",
                InfimumWitness::Both => "[A]B = [B]A",
                InfimumWitness::Incomparable => "[A]B and [B]A incomparable",
            };
            let text = format!("exists: {}\nwitness: {witness}\nlower bounds checked: {}\n", r.exists, r.samples_checked);
            let json = json!({"exists": r.exists, "witness": r.witness, "samples_checked": r.samples_checked});
            Ok(Outcome::new(text, json, r.value.map(|v| v.matrix().clone())))
        }
        Command::Lattice { op, s, t, b } => {
            let (s, t, b) = (load(s, tol)?, load(t, tol)?, load(b, tol)?);
            let (name, r) = match op {
                LatticeOp::Meet => ("S ⋏ T", quasi::quasi_meet(&s, &t, &b, tol)?),
                LatticeOp::Join => ("S ⋎ T", quasi::quasi_join(&s, &t, &b, tol)?),
            };
            Ok(Outcome::new(format!("{name} (rank {})\n", r.rank()), json!({"rank": r.rank()}), Some(r.matrix().clone())))
        }
        Command::Galois { reference, check, t, u } => {
            let pair = PolarityPair::new(load_form(reference, tol)?, *tol);
            let first = load_form(t, tol)?;
            match check {
                GaloisCheck::Closure => {
                    let c = pair.closure(&first)?;
                    let json = io::form_to_json(&c);
                    Ok(Outcome::new(format!("closure (rank {})\n", c.gram().rank()), json, Some(c.gram().matrix().clone())))
                }
                GaloisCheck::Closed => {
                    let closed = pair.is_closed_element(&first)?;
                    Ok(Outcome::new(format!("closed: {closed}\n"), json!({"closed": closed}), None))
                }
                GaloisCheck::Adjunction => {
                    let second = u.as_ref().ok_or_else(|| Error::InvalidArgument("adjunction needs the form v".into()))?;
                    let v = load_form(second, tol)?;
                    let (left, right) = pair.adjunction_sides(&first, &v)?;
                    let text = format!("v ≤ α(u): {left}\nβ(v) ≤ u: {right}\nbiconditional holds: {}\n", left == right);
                    let mut out = Outcome::new(text, json!({"left": left, "right": right, "holds": left == right}), None);
                    out.ok = left == right;
                    Ok(out)
                }
            }
        }
        Command::Phi { t, w } => {
            let (t, w) = (load_form(t, tol)?, load_form(w, tol)?);
            let p = forms::phi(&t, &w, tol)?;
            Ok(Outcome::new(format!("Φ_t(w) on H_t (dimension {})\n", p.dim()), json!({"dim": p.dim()}), Some(p.matrix().clone())))
        }
        Command::Selftest { seed, trials, dims, suites: names, failures_dir, list } => {
            if *list {
                let names = suites::suite_names();
                return Ok(Outcome::new(names.join("\n") + "\n", json!(names), None));
            }
            let mut cfg = RunConfig { seed: *seed, trials: *trials, dim_range: *dims, tolerances: *tol, ..RunConfig::default() };
            if !names.is_empty() {
                cfg.suites = names.clone();
            }
            let reports = suites::run_suites(&cfg)?;
            let mut text = String::new();
            let mut ok = true;
            for r in &reports {
                let status = if r.failed == 0 { "PASS" } else { "FAIL" };
                ok &= r.failed == 0;
                text.push_str(&format!(
                    "{status} {:<28} {:>4}/{:<4} worst gap {:.3e}  {:.2}s\n",
                    r.suite,
                    r.passed,
                    r.trials(),
                    r.worst_gap,
                    r.wall_time
                ));
                for f in &r.failures {
                    text.push_str(&format!("     trial {} seed {} dim {}: {}\n", f.trial, f.seed, f.dim, f.message));
                }
            }
            if let Some(dir) = failures_dir {
                std::fs::create_dir_all(dir)?;
                for r in &reports {
                    for f in &r.failures {
                        for m in &f.matrices {
                            let file = dir.join(format!("{}-seed{}-{}.json", r.suite, f.seed, sanitize(&m.name)));
                            std::fs::write(file, serde_json::to_string_pretty(&m.matrix).expect("json value"))?;
                        }
                    }
                }
            }
            let json = serde_json::to_value(&reports).expect("serializable reports");
            let mut out = Outcome::new(text, json, None);
            out.ok = ok;
            Ok(out)
        }
    }
}

fn sanitize(name: &str) -> String {
    name.chars().map(|c| if c.is_ascii_alphanumeric() { c } else { '_' }).collect()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let tol = Tolerances {
        tol_sym: cli.tol_sym,
        tol_psd: cli.tol_psd,
        tol_rank: cli.tol_rank,
        tol_order: cli.tol_order,
        tol_conv: cli.tol_conv,
    };
    if let Err(e) = tol.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    let outcome = match run(&cli, &tol) {
        Ok(o) => o,
        Err(e) => {
            if cli.json {
                println!("{}", json!({"error": e.to_string()}));
            } else {
                eprintln!("error: {e}");
            }
            return ExitCode::from(2);
        }
    };
    let mut json = outcome.json;
    if let Some(m) = &outcome.matrix {
        match &cli.out {
            Some(path) => {
                if let Err(e) = io::write_matrix(path, m) {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            }
            None if cli.json => json["result"] = io::matrix_to_json(m),
            None => {}
        }
    }
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&json).expect("json value"));
    } else {
        print!("{}", outcome.text);
        if let (Some(m), None) = (&outcome.matrix, &cli.out) {
            print!("{}", matrix_text(m));
        }
    }
    if outcome.ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}
