//! Command-line front end: `adjust`, `simulate` and `combine`.
//!
//! Exit codes: 0 success, 2 input or config error, 3 usage error.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::calib::{self, Calibrator};
use crate::constructors::{
    fit_gamma, fit_limma_hyperparameters, moderated_t, moderated_t_evalue, shift_evalue,
    ModeratedTModel,
};
use crate::procedures::{Procedure, ProcedureConfig};
use crate::sim::{run_campaign, SimulationConfig};
use crate::values::{check_e, check_p, format_real, validate_inputs, EValue, HypothesisRecord, PValue};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

const LIMMA_HEADER: [&str; 5] = ["id", "beta_hat", "s_sq", "v", "nu"];

#[derive(Debug, Parser)]
#[command(name = "epbh", version, about = "Multiple testing with p-values and e-values")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a multiple testing procedure on a CSV of `id,p[,e]`.
    Adjust {
        input: PathBuf,
        #[arg(long)]
        procedure: String,
        #[arg(long)]
        alpha: f64,
        #[arg(long, default_value_t = 0.5)]
        tau: f64,
        #[arg(long, default_value = "sqrt")]
        calibrator: String,
        /// Replace each e-value by `lambda + (1 - lambda) e` first.
        #[arg(long, default_value_t = 0.0)]
        lambda_shift: f64,
        /// CSV destination; the JSON summary goes next to it with a `.json` extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte-Carlo campaign described by a TOML file.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        reps: Option<usize>,
        /// Overrides the seed of every scenario.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        parallelism: Option<usize>,
        /// CSV destination; the JSON manifest goes next to it with a `.json` extension.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Merge each p-value with its e-value, or build moderated-t e-values
    /// from an `id,beta_hat,s_sq,v,nu` file.
    Combine {
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<Mode>,
        #[arg(long)]
        calibrator: Option<String>,
        #[arg(long, default_value_t = 0.5)]
        lambda: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    Quotient,
    Product,
    Mean,
    Bonferroni,
}

/// A failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn input_err(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.into(),
    }
}

fn usage_err(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: message.into(),
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Adjust {
            input,
            procedure,
            alpha,
            tau,
            calibrator,
            lambda_shift,
            out,
        } => cmd_adjust(&input, &procedure, alpha, tau, &calibrator, lambda_shift, out.as_deref()),
        Command::Simulate {
            config,
            reps,
            seed,
            parallelism,
            out,
        } => cmd_simulate(&config, reps, seed, parallelism, out.as_deref()),
        Command::Combine {
            input,
            mode,
            calibrator,
            lambda,
            out,
        } => cmd_combine(&input, mode, calibrator.as_deref(), lambda, out.as_deref()),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn parse_real(cell: &str) -> Option<f64> {
    match cell.trim() {
        "inf" | "+inf" | "Inf" | "infinity" => Some(f64::INFINITY),
        s => s.parse().ok(),
    }
}

struct Table {
    header: Vec<String>,
    /// `(line number, cells)`
    rows: Vec<(u64, Vec<String>)>,
}

fn read_table(path: &Path) -> CliResult<Table> {
    let text = fs::read_to_string(path).map_err(|e| input_err(format!("{}: {e}", path.display())))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header: Vec<String> = reader
        .headers()
        .map_err(|e| input_err(format!("line 1: {e}")))?
        .iter()
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            input_err(format!("line {line}: {e}"))
        })?;
        let line = rec.position().map(|p| p.line()).unwrap_or(0);
        if rec.len() != header.len() {
            return Err(input_err(format!(
                "line {line}: expected {} fields, found {}",
                header.len(),
                rec.len()
            )));
        }
        rows.push((line, rec.iter().map(str::to_string).collect()));
    }
    if rows.is_empty() {
        return Err(input_err(format!("{}: no data rows", path.display())));
    }
    Ok(Table { header, rows })
}

fn optional_cell(line: u64, name: &str, cell: &str) -> CliResult<Option<f64>> {
    if cell.is_empty() {
        return Ok(None);
    }
    parse_real(cell)
        .map(Some)
        .ok_or_else(|| input_err(format!("line {line}: cannot parse {name} `{cell}`")))
}

/// Reads `id,p[,e]` with source line numbers; empty cells are missing values.
fn read_records(path: &Path) -> CliResult<(Vec<u64>, Vec<HypothesisRecord>)> {
    let table = read_table(path)?;
    let h: Vec<&str> = table.header.iter().map(String::as_str).collect();
    if h != ["id", "p"] && h != ["id", "p", "e"] {
        return Err(input_err(format!("line 1: expected header `id,p,e` or `id,p`, found `{}`", h.join(","))));
    }
    let mut out = Vec::with_capacity(table.rows.len());
    let lines = table.rows.iter().map(|(l, _)| *l).collect();
    for (line, cells) in &table.rows {
        let p = optional_cell(*line, "p", &cells[1])?;
        let e = match cells.get(2) {
            Some(c) => optional_cell(*line, "e", c)?,
            None => None,
        };
        let rec = HypothesisRecord::new(cells[0].clone(), p, e);
        if rec.p.is_none() && rec.e.is_none() {
            return Err(input_err(format!("line {line}: neither p nor e is present")));
        }
        if let Some(p) = p {
            check_p(&rec.id, p).map_err(|e| input_err(format!("line {line}: {e}")))?;
        }
        if let Some(e) = e {
            check_e(&rec.id, e).map_err(|e| input_err(format!("line {line}: {e}")))?;
        }
        out.push(rec);
    }
    Ok((lines, out))
}

fn open_out(out: Option<&Path>) -> CliResult<Box<dyn Write>> {
    match out {
        Some(path) => fs::File::create(path)
            .map(|f| Box::new(io::BufWriter::new(f)) as Box<dyn Write>)
            .map_err(|e| input_err(format!("{}: {e}", path.display()))),
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn write_rows(out: Option<&Path>, header: &[&str], rows: &[Vec<String>]) -> CliResult<()> {
    let io_err = |e: csv::Error| input_err(format!("writing output: {e}"));
    let mut w = csv::Writer::from_writer(open_out(out)?);
    w.write_record(header).map_err(io_err)?;
    for r in rows {
        w.write_record(r).map_err(io_err)?;
    }
    w.flush().map_err(|e| input_err(format!("writing output: {e}")))
}

/// Writes a JSON sidecar next to `out`, or to stderr when output goes to stdout.
fn write_sidecar(out: Option<&Path>, value: &serde_json::Value) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("json values serialize");
    match out {
        Some(path) => {
            let side = path.with_extension("json");
            fs::write(&side, text + "\n").map_err(|e| input_err(format!("{}: {e}", side.display())))
        }
        None => {
            eprintln!("{text}");
            Ok(())
        }
    }
}

fn cmd_adjust(
    input: &Path,
    procedure: &str,
    alpha: f64,
    tau: f64,
    calibrator: &str,
    lambda_shift: f64,
    out: Option<&Path>,
) -> CliResult<()> {
    let proc: Procedure = procedure.parse().map_err(|e| usage_err(format!("--procedure: {e}")))?;
    let h: Calibrator = calibrator.parse().map_err(|e| usage_err(format!("--calibrator: {e}")))?;
    let cfg = ProcedureConfig::new(alpha)
        .map_err(|e| usage_err(format!("--alpha: {e}")))?
        .with_tau(tau)
        .map_err(|e| usage_err(format!("--tau: {e}")))?
        .with_calibrator(h);
    if !(0.0..=1.0).contains(&lambda_shift) {
        return Err(usage_err(format!("--lambda-shift: must lie in [0, 1], got {lambda_shift}")));
    }

    let (lines, records) = read_records(input)?;
    let inputs = validate_inputs(&records).map_err(|e| input_err(e.to_string()))?;
    let e: Vec<f64> = inputs
        .e
        .iter()
        .map(|&x| shift_evalue(EValue::new(x).expect("validated"), lambda_shift).map(EValue::get))
        .collect::<crate::Result<_>>()
        .map_err(|e| usage_err(format!("--lambda-shift: {e}")))?;
    let p = if proc.needs_p() {
        match inputs.p.iter().position(Option::is_none) {
            Some(i) => {
                return Err(input_err(format!(
                    "line {}: `{}` requires a p-value for every hypothesis",
                    lines[i],
                    proc.name()
                )))
            }
            None => Some(inputs.p_values().map_err(|e| input_err(e.to_string()))?),
        }
    } else {
        None
    };
    let result = proc
        .run(p.as_deref(), &e, &cfg)
        .map_err(|e| input_err(e.to_string()))?;

    let rows: Vec<Vec<String>> = (0..inputs.len())
        .map(|i| {
            vec![
                inputs.ids[i].clone(),
                inputs.p[i].map(format_real).unwrap_or_default(),
                format_real(e[i]),
                format_real(result.adjusted[i]),
                result.is_rejected(i).to_string(),
            ]
        })
        .collect();
    write_rows(out, &["id", "p", "e", "adjusted", "rejected"], &rows)?;
    write_sidecar(
        out,
        &serde_json::json!({
            "procedure": proc.name(),
            "alpha": alpha,
            "k_star": result.threshold_index,
            "n_rejected": result.len(),
        }),
    )
}

fn cmd_simulate(
    config: &Path,
    reps: Option<usize>,
    seed: Option<u64>,
    parallelism: Option<usize>,
    out: Option<&Path>,
) -> CliResult<()> {
    if reps == Some(0) {
        return Err(usage_err("--reps: must be at least 1"));
    }
    if parallelism == Some(0) {
        return Err(usage_err("--parallelism: must be at least 1"));
    }
    let text = fs::read_to_string(config).map_err(|e| input_err(format!("{}: {e}", config.display())))?;
    let mut sim = SimulationConfig::from_toml(&text)
        .map_err(|e| input_err(format!("{}: {e}", config.display())))?;
    if let Some(s) = seed {
        for scn in &mut sim.scenarios {
            scn.set_seed(s);
        }
    }
    let reps = reps.or(sim.replicates).unwrap_or(100);
    let threads = parallelism.unwrap_or_else(|| {
        std::thread::available_parallelism()
            .map(|n| n.get())
            .unwrap_or(1)
    });
    let result = run_campaign(&sim.scenarios, &sim.procedures, &sim.procedure_config, reps, threads)
        .map_err(|e| input_err(e.to_string()))?;
    let mut w = open_out(out)?;
    result
        .write_csv(&mut w)
        .map_err(|e| input_err(e.to_string()))?;
    w.flush().map_err(|e| input_err(format!("writing output: {e}")))?;
    drop(w);
    write_sidecar(out, &result.manifest(threads))
}

fn cmd_combine(
    input: &Path,
    mode: Option<Mode>,
    calibrator: Option<&str>,
    lambda: f64,
    out: Option<&Path>,
) -> CliResult<()> {
    let table = read_table(input)?;
    if table.header.iter().map(String::as_str).eq(LIMMA_HEADER) {
        return combine_limma(&table, out);
    }
    let mode = mode.ok_or_else(|| usage_err("--mode is required for `id,p,e` input"))?;
    let h = match (mode, calibrator) {
        (Mode::Product | Mode::Mean, None) => {
            return Err(usage_err(format!("--mode {mode:?} requires --calibrator").to_lowercase()))
        }
        (_, Some(c)) => Some(c.parse::<Calibrator>().map_err(|e| usage_err(format!("--calibrator: {e}")))?),
        (_, None) => None,
    };
    if mode == Mode::Mean && !(lambda > 0.0 && lambda < 1.0) {
        return Err(usage_err(format!("--lambda: must lie in (0, 1), got {lambda}")));
    }
    let (lines, records) = read_records(input)?;
    let mut rows = Vec::with_capacity(records.len());
    for (&line, r) in lines.iter().zip(&records) {
        let (Some(p), Some(e)) = (r.p, r.e) else {
            return Err(input_err(format!("line {line}: combine needs both p and e")));
        };
        let p = PValue::new(p).expect("validated");
        let e = EValue::new(e).expect("validated");
        let v = match mode {
            Mode::Quotient => calib::combine_quotient(p, e).get(),
            Mode::Bonferroni => calib::combine_bonferroni(p, e).get(),
            Mode::Product => calib::combine_product(h.expect("checked"), p, e).get(),
            Mode::Mean => calib::combine_mean(h.expect("checked"), lambda, p, e)
                .map_err(|e| usage_err(e.to_string()))?
                .get(),
        };
        rows.push(vec![r.id.clone(), format_real(v)]);
    }
    write_rows(out, &["id", "combined"], &rows)
}

fn combine_limma(table: &Table, out: Option<&Path>) -> CliResult<()> {
    let n = table.rows.len();
    let mut ids = Vec::with_capacity(n);
    let mut beta = Vec::with_capacity(n);
    let mut s_sq = Vec::with_capacity(n);
    let mut v = Vec::with_capacity(n);
    let mut nu = Vec::with_capacity(n);
    for (line, cells) in &table.rows {
        let get = |j: usize| {
            parse_real(&cells[j])
                .filter(|x| x.is_finite())
                .ok_or_else(|| input_err(format!("line {line}: cannot parse {} `{}`", LIMMA_HEADER[j], cells[j])))
        };
        let (b, s, vv, d) = (get(1)?, get(2)?, get(3)?, get(4)?);
        if s < 0.0 {
            return Err(input_err(format!("line {line}: s_sq must be >= 0, got {s}")));
        }
        if vv <= 0.0 || d <= 0.0 {
            return Err(input_err(format!("line {line}: v and nu must be > 0")));
        }
        ids.push(cells[0].clone());
        beta.push(b);
        s_sq.push(s);
        v.push(vv);
        nu.push(d);
    }
    let prior = fit_limma_hyperparameters(&s_sq, &nu).map_err(|e| input_err(e.to_string()))?;
    let base: Vec<ModeratedTModel> = v
        .iter()
        .zip(&nu)
        .map(|(&vv, &d)| ModeratedTModel::new(vv, d, prior.nu0, prior.s0_sq, 0.0))
        .collect::<crate::Result<_>>()
        .map_err(|e| input_err(e.to_string()))?;
    let mt: Vec<_> = (0..n)
        .map(|i| moderated_t(beta[i], s_sq[i], &base[i]))
        .collect::<crate::Result<_>>()
        .map_err(|e| input_err(e.to_string()))?;
    let t: Vec<f64> = mt.iter().map(|m| m.t_tilde).collect();
    let gamma = fit_gamma(&t, &base).map_err(|e| input_err(e.to_string()))?;
    let rows: Vec<Vec<String>> = (0..n)
        .map(|i| {
            let e = moderated_t_evalue(t[i], &base[i].with_gamma(gamma));
            vec![
                ids[i].clone(),
                format_real(t[i]),
                format_real(mt[i].p.get()),
                format_real(e.get()),
            ]
        })
        .collect();
    log::info!("fitted nu0 = {}, s0_sq = {}, gamma = {gamma}", prior.nu0, prior.s0_sq);
    write_rows(out, &["id", "t_tilde", "p", "e"], &rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_cells() {
        assert_eq!(parse_real("inf"), Some(f64::INFINITY));
        assert_eq!(parse_real(" 0.25 "), Some(0.25));
        assert_eq!(parse_real("abc"), None);
        assert_eq!(format_real(2.0), "2.0000000000000000e0");
        assert_eq!(format_real(f64::INFINITY), "inf");
    }

    #[test]
    fn usage_errors_exit_three() {
        assert_eq!(run(["epbh", "adjust"]), EXIT_USAGE);
        assert_eq!(run(["epbh", "frobnicate"]), EXIT_USAGE);
        assert_eq!(run(["epbh", "--help"]), EXIT_OK);
    }
}
