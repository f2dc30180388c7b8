use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use torcon_core::arith::fmt_rational;
use torcon_core::classifier::{build_report, classify, ContractionReport};
use torcon_core::discrepancy::{
    is_canonical_pair_toric, toric_log_discrepancy_minus_one, Canonicity, DiscrepancyResult, MonomialDivisorSpec,
};
use torcon_core::quotient::verify_terminal_lemma;
use torcon_core::verify::run_all;
use torcon_core::{ContractionType, Error, GermSpec};

#[derive(Parser, Debug)]
#[command(name = "torcon", version, about = "Divisorial contractions to terminal toric 3-fold germs")]
struct Cli {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Output::Text, global = true)]
    output: Output,
    /// Worker threads for sweeps (defaults to all cores).
    #[arg(long, env = "TORCON_WORKERS", global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Output {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the non-toric contraction types over a germ.
    Classify {
        /// smooth, cyclic:R,Q or odp
        #[arg(long)]
        germ: GermSpec,
        /// Caps n for A_n and E_n, k for the D families, b2 over the double point.
        #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
        bound: u64,
        /// Also print the germ fan.
        #[arg(long)]
        dump_fan: bool,
    },
    /// Full report for one type: An:a2,a3,d1, D:n, E6, E7, E8 or odpA:b2,b3,b4 (append :special for x1x2^2+x3^2).
    Example {
        #[arg(long = "type")]
        ty: ContractionType,
        /// Also print the blown-up fan.
        #[arg(long)]
        dump_fan: bool,
    },
    /// Canonicity and log canonicity of a monomial boundary on a germ.
    CheckPair {
        #[arg(long)]
        germ: GermSpec,
        /// One branch per line: `coeff; monomial+monomial+...`.
        #[arg(long)]
        boundary: PathBuf,
        /// Also report a(E, D) for the weighted blow-up with these weights.
        #[arg(long, value_delimiter = ',')]
        weights: Option<Vec<u64>>,
        /// Treat branches as Newton nondegenerate.
        #[arg(long)]
        nondegenerate: bool,
    },
    /// Recompute every published number and table, printing a pass/fail line per check.
    VerifyPaper,
    /// Exhaustive check that terminal cyclic quotients are exactly 1/r(1,-q,q).
    TerminalLemma {
        #[arg(long, value_parser = clap::value_parser!(u64).range(2..))]
        rmax: u64,
    },
}

enum Failure {
    Usage(String),
    Check(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::InvalidParameters(_) | Error::InadmissibleWeights(_) | Error::Shape(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Check(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if n == 0 {
            eprintln!("error: TORCON_WORKERS must be positive");
            return ExitCode::from(2);
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Check(m)) => {
            eprintln!("check failed: {m}");
            ExitCode::from(1)
        }
    }
}

fn print_json(v: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(v).expect("serializable"));
}

fn run(cli: &Cli) -> Result<bool, Failure> {
    let json = cli.output == Output::Json;
    match &cli.command {
        Command::Classify { germ, bound, dump_fan } => {
            let c = classify(germ, *bound)?;
            if json {
                let mut v = serde_json::to_value(&c).expect("serializable");
                if *dump_fan {
                    v["fan"] = serde_json::to_value(germ.fan()).expect("serializable");
                }
                print_json(&v);
            } else {
                println!("germ: {germ}, bound {bound}");
                if c.types.is_empty() {
                    println!("types: []");
                }
                for t in &c.types {
                    println!("  {t}  {}  weights {:?}  phi = {}", t.family_name(), t.weights(), t.phi().label());
                }
                if let Some(w) = &c.obstruction {
                    println!("no non-toric contractions: {}", witness_text(w));
                }
                if *dump_fan {
                    println!("fan: {}", serde_json::to_string(&germ.fan()).expect("serializable"));
                }
            }
            Ok(true)
        }
        Command::Example { ty, dump_fan } => {
            let r = build_report(ty)?;
            if json {
                if *dump_fan {
                    let mut v = serde_json::to_value(&r).expect("serializable");
                    v["fan"] = serde_json::to_value(blown_up_fan(ty)?).expect("serializable");
                    print_json(&v);
                } else {
                    print_json(&r);
                }
            } else {
                print_report(&r);
                if *dump_fan {
                    println!("fan: {}", serde_json::to_string(&blown_up_fan(ty)?).expect("serializable"));
                }
            }
            Ok(true)
        }
        Command::CheckPair { germ, boundary, weights, nondegenerate } => {
            let text = std::fs::read_to_string(boundary)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", boundary.display())))?;
            let spec = MonomialDivisorSpec::parse_lines(&text, germ.coordinate_count())?;
            let canon = is_canonical_pair_toric(germ, &spec, *nondegenerate)?;
            let at = match weights {
                Some(w) => Some(toric_log_discrepancy_minus_one(germ, w, &spec)?),
                None => None,
            };
            if json {
                print_json(&json!({ "germ": germ, "canonicity": canon, "discrepancy": at }));
            } else {
                println!("germ: {germ}");
                match &canon.verdict {
                    Canonicity::Canonical => println!("canonical: yes"),
                    Canonicity::NotCanonical { witness } => println!("canonical: no ({})", witness_text(witness)),
                }
                println!("certified: {}", if canon.certified { "yes" } else { "no (degenerate branches)" });
                println!("log canonical: {}", if canon.log_canonical { "yes" } else { "no" });
                if let Some(d) = &at {
                    println!("a(E, D) at weights {:?}: {}", weights.as_deref().unwrap_or(&[]), fmt_rational(&d.value));
                }
            }
            Ok(true)
        }
        Command::VerifyPaper => {
            let results = run_all();
            let ok = results.iter().all(|r| r.passed);
            if json {
                print_json(&json!({ "passed": ok, "checks": results }));
            } else {
                let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
                for r in &results {
                    let tag = if r.passed { "PASS" } else { "FAIL" };
                    println!("{tag}  {:width$}  {:>7} ms  {}", r.name, r.elapsed_ms, r.detail);
                }
                println!("{} of {} checks passed", results.iter().filter(|r| r.passed).count(), results.len());
            }
            for r in results.iter().filter(|r| !r.passed) {
                eprintln!("check failed: {}", r.name);
            }
            Ok(ok)
        }
        Command::TerminalLemma { rmax } => {
            let r = verify_terminal_lemma(*rmax)?;
            let ok = r.counterexamples.is_empty();
            if json {
                print_json(&r);
            } else {
                for (order, forms) in &r.terminal_forms {
                    let list: Vec<String> = forms.iter().map(|f| f.to_string()).collect();
                    println!("r = {order}: {}", list.join(", "));
                }
                println!("{} types checked", r.types_checked);
                println!("{} counterexamples", r.counterexamples.len());
                for c in &r.counterexamples {
                    println!("  {c}");
                }
            }
            Ok(ok)
        }
    }
}

fn blown_up_fan(t: &ContractionType) -> Result<torcon_core::Fan, Failure> {
    let g = t.germ();
    let w = g.blowup_ray(&t.weights())?;
    Ok(g.fan().star_subdivide(&w)?)
}

fn witness_text(w: &DiscrepancyResult) -> String {
    let v: Vec<String> = w.valuation.coords().iter().map(|c| c.to_string()).collect();
    format!(
        "a = {} at valuation ({}), log discrepancy {}, multiplicity {}",
        fmt_rational(&w.value),
        v.join(","),
        fmt_rational(&w.log_discrepancy),
        fmt_rational(&w.multiplicity)
    )
}

fn print_report(r: &ContractionReport) {
    let params: Vec<String> = r.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
    println!("type: {} ({})  {}", r.contraction_type, r.family, params.join(" "));
    println!("weights: {:?}", r.weights);
    println!("phi: {}", r.phi);
    println!("surface S: {}", r.surface.kind);
    for d in &r.surface.diff {
        println!("  Diff: {} {}", d.coeff, d.curve);
    }
    println!("Gamma ~ {}", r.gamma_class);
    println!("Gamma~^2 = {}", r.gamma_tilde_sq);
    println!("{}", r.crepant_certificate);
    println!("singularities of the blow-up along the exceptional divisor:");
    for s in &r.singularities {
        let rt = s.reid_tai.map(|x| format!(" [{x}]")).unwrap_or_default();
        println!("  {}  at {} ({}){rt}", s.kind, s.location, s.source);
    }
    println!("charts:");
    for c in &r.charts {
        println!(
            "  {} x{}: e4 = {}, outside {}, on S~ {}, fiber index {}, labels near {} far {}",
            c.location,
            c.count,
            serde_json::to_string(&c.e4).expect("serializable"),
            c.outside,
            c.on_gamma,
            c.fiber_index,
            c.near_label,
            c.far_label
        );
    }
    println!("diagram:");
    for n in &r.diagram.nodes {
        println!("  [{}] {} {}", n.id, n.kind, n.label);
    }
    let edges: Vec<String> = r.diagram.edges.iter().map(|[a, b]| format!("{a}-{b}")).collect();
    println!("  edges: {}", edges.join(" "));
    println!(
        "flags: log_surface_toric={} plt_blowup={} non_normal_E={} special_phi={}",
        r.flags.log_surface_toric, r.flags.plt_blowup, r.flags.non_normal_e, r.flags.special_phi
    );
    for f in &r.fixtures {
        println!("fixture: {} = {} ({})", f.item, f.value, f.source);
    }
    for a in &r.assumptions {
        println!("note: {a}");
    }
}
