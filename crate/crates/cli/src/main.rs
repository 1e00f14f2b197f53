//! `kp2`: command-line front end for the local P² engine.

use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use kp2_core::anomaly::{verify_lift, verify_ss56, verify_ttt, HaeReport};
use kp2_core::graphs::{decorate, enumerate_graphs};
use kp2_core::localization::{default_kmax, insertions, Engine};
use kp2_core::lring::RingElem;
use kp2_core::mgn::hodge_psi_integral;
use kp2_core::mirror::{verify_pf, MirrorData};
use kp2_core::rseries::{extract_r_rows, required_qmax, verify_lemma_r};
use kp2_core::scalars::rational_to_string;
use kp2_core::series::QSeries;
use serde_json::{json, Value};

const THREADS_VAR: &str = "KP2_THREADS";

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] kp2_core::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Core(kp2_core::Error::Unstable { .. } | kp2_core::Error::GenusScope(_)) => 2,
            _ => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Debug, Parser)]
#[command(name = "kp2", version, about = "Exact stable quotient invariants of local P2")]
struct Cli {
    #[arg(long, value_enum, default_value = "json", global = true)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Free energy F_g as a polynomial in L, X.
    Fg {
        #[arg(long)]
        genus: usize,
        #[arg(long)]
        qmax: Option<usize>,
        #[arg(long)]
        kmax: Option<usize>,
        /// Include every graph and decoration.
        #[arg(long)]
        per_graph: bool,
    },
    /// Correlator <1^a H^b (H^2)^c (psi H)^delta>_g.
    Correlator {
        #[arg(long)]
        genus: usize,
        #[arg(long, default_value_t = 0)]
        a: usize,
        #[arg(long, default_value_t = 0)]
        b: usize,
        #[arg(long, default_value_t = 0)]
        c: usize,
        #[arg(long, default_value_t = 0)]
        delta: usize,
        #[arg(long)]
        qmax: Option<usize>,
        #[arg(long)]
        kmax: Option<usize>,
        #[arg(long)]
        per_graph: bool,
    },
    /// Stable graphs of genus g with labeled legs.
    Graphs {
        #[arg(long)]
        genus: usize,
        #[arg(long, default_value_t = 0)]
        legs: usize,
    },
    /// Asymptotic rows R_{m,k} as ring elements.
    Rseries {
        #[arg(long)]
        row: Option<usize>,
        #[arg(long, default_value_t = 2)]
        kmax: usize,
    },
    /// Normalization series and the mirror map.
    Mirror {
        #[arg(long, default_value_t = 12)]
        qmax: usize,
    },
    /// A single Hodge integral of psi and lambda classes.
    Mgn {
        #[arg(long)]
        g: usize,
        /// Comma-separated psi exponents, one per marking.
        #[arg(long)]
        psi: String,
        /// Comma-separated lambda indices.
        #[arg(long, default_value = "")]
        lambda: String,
    },
    /// Exact identity checks; exit code 1 if a residual is nonzero.
    Verify {
        #[command(subcommand)]
        check: Check,
    },
}

#[derive(Debug, Subcommand)]
enum Check {
    /// Picard-Fuchs equation at all three fixed points.
    Pf {
        #[arg(long, default_value_t = 12)]
        qmax: usize,
        #[arg(long, default_value_t = 8)]
        zmax: usize,
    },
    /// Anomaly equation for F_g.
    Hae {
        #[arg(long, default_value_t = 2)]
        genus: usize,
        #[arg(long)]
        kmax: Option<usize>,
    },
    /// <H>_{g,1} and <H,H>_{g-1,2} against T-derivatives.
    Lift {
        #[arg(long, default_value_t = 2)]
        genus: usize,
        #[arg(long)]
        kmax: Option<usize>,
    },
    /// Anomaly equation with insertions and the descendent term.
    Ss56 {
        #[arg(long)]
        genus: usize,
        #[arg(long, default_value_t = 0)]
        a: usize,
        #[arg(long, default_value_t = 0)]
        b: usize,
        #[arg(long, default_value_t = 0)]
        c: usize,
        #[arg(long)]
        kmax: Option<usize>,
    },
    /// Recursions between the three asymptotic rows.
    #[command(name = "lemmaR")]
    LemmaR {
        #[arg(long, default_value_t = 6)]
        kmax: usize,
    },
}

/// Result of one command: a JSON document, its text rendering and pass/fail.
struct Output {
    json: Value,
    text: String,
    pass: bool,
}

impl Output {
    fn ok(json: Value, text: String) -> Self {
        Output { json, text, pass: true }
    }
}

fn parse_list(s: &str, what: &str) -> Result<Vec<u32>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| CliError::Usage(format!("bad {what} entry {t:?}"))))
        .collect()
}

fn series_json(f: &QSeries) -> Value {
    Value::Array(f.coeffs().iter().map(|c| Value::String(c.to_string())).collect())
}

fn ring_json(f: &RingElem) -> Result<Value, CliError> {
    Ok(serde_json::to_value(f)?)
}

fn engine(kmax: usize, qmax: Option<usize>) -> Result<Engine, CliError> {
    Ok(Engine::with_qmax(kmax, qmax.unwrap_or(0).max(required_qmax(kmax)))?)
}

fn report_json(r: &HaeReport) -> Result<Value, CliError> {
    Ok(serde_json::to_value(r)?)
}

fn report_text(r: &HaeReport) -> String {
    format!(
        "{}: {}\n  lhs = {}\n  rhs = {}\n  residual = {}",
        r.label,
        if r.pass { "pass" } else { "FAIL" },
        r.lhs.to_text(),
        r.rhs.to_text(),
        r.residual.to_text()
    )
}

fn correlator_output(engine: &Engine, g: usize, ins: &[kp2_core::localization::Insertion], per_graph: bool) -> Result<Output, CliError> {
    let cor = engine.correlator(g, ins)?;
    let mut text = format!("F = {}", cor.total.to_text());
    let json = if per_graph {
        for gt in &cor.graphs {
            text.push_str(&format!("\n{}: {}", gt.signature, gt.total.to_text()));
        }
        let mut v = serde_json::to_value(&cor)?;
        v["kmax"] = json!(engine.kmax);
        v
    } else {
        json!({
            "genus": cor.genus,
            "insertions": cor.insertions,
            "kmax": engine.kmax,
            "total": ring_json(&cor.total)?,
        })
    };
    Ok(Output::ok(json, text))
}

fn run(cli: &Cli) -> Result<Output, CliError> {
    match &cli.command {
        Command::Fg { genus, qmax, kmax, per_graph } => {
            let engine = engine(kmax.unwrap_or(default_kmax(*genus, 0)), *qmax)?;
            correlator_output(&engine, *genus, &[], *per_graph)
        }
        Command::Correlator { genus, a, b, c, delta, qmax, kmax, per_graph } => {
            if *delta > 1 {
                return Err(CliError::Usage("at most one descendent insertion".into()));
            }
            let ins = insertions(*a, *b, *c, *delta);
            let engine = engine(kmax.unwrap_or(default_kmax(*genus, ins.len())), *qmax)?;
            correlator_output(&engine, *genus, &ins, *per_graph)
        }
        Command::Graphs { genus, legs } => {
            let graphs = enumerate_graphs(*genus, *legs)?;
            let mut list = Vec::new();
            let mut text = Vec::new();
            for gr in &graphs {
                let decorations = decorate(gr).len();
                text.push(format!("{gr}  aut={} decorations={decorations}", gr.aut_order()));
                list.push(json!({"signature": gr.signature(), "graph": gr, "aut_order": gr.aut_order(), "decorations": decorations}));
            }
            text.push(format!("{} graphs", graphs.len()));
            Ok(Output::ok(json!({"genus": genus, "legs": legs, "count": graphs.len(), "graphs": list}), text.join("\n")))
        }
        Command::Rseries { row, kmax } => {
            let mirror = MirrorData::new(required_qmax(*kmax))?;
            let data = extract_r_rows(&mirror, *kmax)?;
            let rows: Vec<usize> = match row {
                Some(m) if *m < 3 => vec![*m],
                Some(m) => return Err(CliError::Usage(format!("row {m} out of range 0..=2"))),
                None => vec![0, 1, 2],
            };
            let mut entries = Vec::new();
            let mut text = Vec::new();
            for &m in &rows {
                for k in 0..=*kmax {
                    let r = data.r(m, k);
                    text.push(format!("R[{m},{k}] = {}", r.to_text()));
                    entries.push(json!({"m": m, "k": k, "value": ring_json(r)?}));
                }
            }
            Ok(Output::ok(json!({"kmax": kmax, "rows": entries}), text.join("\n")))
        }
        Command::Mirror { qmax } => {
            let m = MirrorData::new(*qmax)?;
            let b = &m.birkhoff;
            let fields = [
                ("C0", &b.c0),
                ("C1", &b.c1),
                ("C2", &b.c2),
                ("T_minus_log_q", &m.t_minus_log_q),
                ("Q_over_q", &m.q_of_q),
                ("L", &m.generators.l),
                ("X", &m.generators.x),
            ];
            let mut obj = serde_json::Map::new();
            obj.insert("qmax".into(), json!(qmax));
            let mut text = Vec::new();
            for (name, f) in fields {
                obj.insert(name.into(), series_json(f));
                let cs: Vec<String> = f.coeffs().iter().map(ToString::to_string).collect();
                text.push(format!("{name}: [{}]", cs.join(", ")));
            }
            Ok(Output::ok(Value::Object(obj), text.join("\n")))
        }
        Command::Mgn { g, psi, lambda } => {
            let exps = parse_list(psi, "psi")?;
            let lams = parse_list(lambda, "lambda")?;
            let v = hodge_psi_integral(*g, &exps, &lams)?;
            let s = rational_to_string(&v);
            Ok(Output::ok(json!({"g": g, "psi": exps, "lambda": lams, "value": s}), s))
        }
        Command::Verify { check } => verify(check),
    }
}

fn verify(check: &Check) -> Result<Output, CliError> {
    match check {
        Check::Pf { qmax, zmax } => {
            let mut pts = Vec::new();
            let mut text = Vec::new();
            let mut pass = true;
            for i in 0..3 {
                let res = verify_pf(i, *qmax, *zmax)?;
                let nonzero = res.entries().len();
                pass &= nonzero == 0;
                text.push(format!("fixed point {i}: {} nonzero residual terms", nonzero));
                pts.push(json!({"fixed_point": i, "nonzero_terms": nonzero, "pass": nonzero == 0}));
            }
            Ok(Output { json: json!({"check": "pf", "qmax": qmax, "zmax": zmax, "fixed_points": pts, "pass": pass}), text: text.join("\n"), pass })
        }
        Check::Hae { genus, kmax } => {
            let engine = engine(kmax.unwrap_or(default_kmax(*genus, 0)), None)?;
            let r = verify_ttt(&engine, *genus)?;
            Ok(Output { json: report_json(&r)?, text: report_text(&r), pass: r.pass })
        }
        Check::Lift { genus, kmax } => {
            let engine = engine(kmax.unwrap_or(default_kmax(*genus, 1)), None)?;
            let reports = verify_lift(&engine, *genus)?;
            let pass = reports.iter().all(|r| r.pass);
            let json = json!({"check": "lift", "genus": genus, "reports": reports, "pass": pass});
            let text = reports.iter().map(report_text).collect::<Vec<_>>().join("\n");
            Ok(Output { json, text, pass })
        }
        Check::Ss56 { genus, a, b, c, kmax } => {
            let engine = engine(kmax.unwrap_or(default_kmax(*genus, a + b + c + 1)), None)?;
            let r = verify_ss56(&engine, *genus, *a, *b, *c)?;
            Ok(Output { json: report_json(&r)?, text: report_text(&r), pass: r.pass })
        }
        Check::LemmaR { kmax } => {
            let mirror = MirrorData::new(required_qmax(*kmax))?;
            let data = extract_r_rows(&mirror, *kmax)?;
            let rep = verify_lemma_r(&data)?;
            let pass = rep.pass();
            let mut list = Vec::new();
            let mut text = Vec::new();
            for (label, p, res) in &rep.residuals {
                text.push(format!("{label} p={p}: {}", if res.is_zero() { "0".into() } else { res.to_text() }));
                list.push(json!({"relation": label, "p": p, "residual": ring_json(res)?}));
            }
            text.push(format!("drule: {}", if rep.drule_residual.is_zero() { "0".into() } else { rep.drule_residual.to_text() }));
            let json = json!({"check": "lemmaR", "kmax": kmax, "residuals": list, "drule_residual": ring_json(&rep.drule_residual)?, "pass": pass});
            Ok(Output { json, text: text.join("\n"), pass })
        }
    }
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = v.trim().parse().map_err(|_| CliError::Usage(format!("{THREADS_VAR} must be a positive integer, got {v:?}")))?;
    if n == 0 {
        return Err(CliError::Usage(format!("{THREADS_VAR} must be positive")));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))
}

/// Writes to stdout; a closed pipe is not an error.
fn emit(s: &str) {
    use std::io::Write;
    let _ = writeln!(std::io::stdout().lock(), "{s}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = configure_threads().and_then(|()| run(&cli));
    match result {
        Ok(out) => {
            match cli.format {
                Format::Json => match serde_json::to_string_pretty(&out.json) {
                    Ok(s) => emit(&s),
                    Err(e) => {
                        eprintln!("kp2: json: {e}");
                        return ExitCode::from(3);
                    }
                },
                Format::Text => emit(&out.text),
            }
            if out.pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("kp2: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
