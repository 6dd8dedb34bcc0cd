use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::{replicate_rng, ReplicateData, Scenario};
use crate::error::{Error, Result};
use crate::metrics::{outcome, ErrorMetrics, MetricsAccumulator, MomentSum, ReplicateOutcome};
use crate::procedures::{Procedure, ProcedureConfig};
use crate::values::format_real;

const AUDIT_BINS: usize = 1000;

/// Everything one replicate contributes to a campaign.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateRecord {
    /// One outcome per procedure, in the order requested.
    pub outcomes: Vec<ReplicateOutcome>,
    pub null_e: MomentSum,
    /// Counts of null p-values in `[i / B, (i + 1) / B)`, last bin closed.
    pub null_p_hist: Vec<u64>,
}

/// Null-coordinate sanity checks for one scenario.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NullAudit {
    pub scenario: usize,
    pub null_count: usize,
    pub null_e_mean: f64,
    pub null_e_se: f64,
    /// `max_u (F_n(u) - u)` over the histogram edges; positive values mean
    /// null p-values are smaller than uniform.
    pub ks_excess: f64,
    pub ks_critical: f64,
    pub e_ok: bool,
    pub p_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignRow {
    pub scenario: usize,
    pub procedure: Procedure,
    pub metrics: ErrorMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CampaignResult {
    pub scenarios: Vec<Scenario>,
    pub config: ProcedureConfig,
    pub rows: Vec<CampaignRow>,
    pub audits: Vec<NullAudit>,
    pub replicates: usize,
    pub wall_clock_seconds: f64,
}

fn record(data: &ReplicateData, procedures: &[Procedure], cfg: &ProcedureConfig) -> Result<ReplicateRecord> {
    let outcomes = procedures
        .iter()
        .map(|proc| {
            let r = proc.run(Some(&data.p), &data.e, cfg)?;
            outcome(&r.rejected, &data.is_null)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut null_e = MomentSum::default();
    let mut null_p_hist = vec![0u64; AUDIT_BINS];
    for ((&p, &e), _) in data.p.iter().zip(&data.e).zip(&data.is_null).filter(|(_, &n)| n) {
        null_e.push(e);
        let bin = ((p * AUDIT_BINS as f64) as usize).min(AUDIT_BINS - 1);
        null_p_hist[bin] += 1;
    }
    Ok(ReplicateRecord {
        outcomes,
        null_e,
        null_p_hist,
    })
}

/// Runs replicate `replicate` of `scenario`, which sits at `scenario_index` in its campaign.
pub fn run_replicate(
    scenario: &Scenario,
    scenario_index: usize,
    replicate: usize,
    procedures: &[Procedure],
    cfg: &ProcedureConfig,
) -> Result<ReplicateRecord> {
    let mut rng = replicate_rng(scenario.seed(), scenario_index as u64, replicate as u64);
    let data = scenario.generate(&mut rng)?;
    record(&data, procedures, cfg)
}

fn audit(scenario: usize, records: &[ReplicateRecord]) -> NullAudit {
    let mut e = MomentSum::default();
    let mut hist = vec![0u64; AUDIT_BINS];
    for r in records {
        e.merge(&r.null_e);
        for (h, c) in hist.iter_mut().zip(&r.null_p_hist) {
            *h += c;
        }
    }
    let n = e.n;
    let mut cum = 0u64;
    let mut ks_excess: f64 = 0.0;
    for (i, c) in hist.iter().enumerate() {
        cum += c;
        if n > 0 {
            let edge = (i + 1) as f64 / AUDIT_BINS as f64;
            ks_excess = ks_excess.max(cum as f64 / n as f64 - edge);
        }
    }
    // one-sided Kolmogorov-Smirnov at level 1e-4: sqrt(ln(1e4) / (2n))
    let ks_critical = if n > 0 {
        ((1e4f64).ln() / (2.0 * n as f64)).sqrt()
    } else {
        f64::INFINITY
    };
    let (mean, se) = (e.mean(), e.se());
    NullAudit {
        scenario,
        null_count: n,
        null_e_mean: mean,
        null_e_se: se,
        ks_excess,
        ks_critical,
        e_ok: mean <= 1.0 + 4.0 * se,
        p_ok: ks_excess <= ks_critical,
    }
}

/// Runs every `(scenario, replicate)` pair on a pool of `parallelism` threads.
///
/// Metrics are reduced in replicate order, so the result does not depend on
/// `parallelism` except for `wall_clock_seconds`.
pub fn run_campaign(
    scenarios: &[Scenario],
    procedures: &[Procedure],
    cfg: &ProcedureConfig,
    replicates: usize,
    parallelism: usize,
) -> Result<CampaignResult> {
    if replicates == 0 {
        return Err(Error::NoReplicates);
    }
    if scenarios.is_empty() {
        return Err(Error::InvalidScenario("no scenarios given".into()));
    }
    if procedures.is_empty() {
        return Err(Error::param("procedures", "at least one procedure is required"));
    }
    cfg.validate()?;
    for s in scenarios {
        s.validate()?;
    }
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(parallelism.max(1))
        .build()
        .map_err(|e| Error::param("parallelism", e.to_string()))?;
    let jobs: Vec<(usize, usize)> = (0..scenarios.len())
        .flat_map(|s| (0..replicates).map(move |r| (s, r)))
        .collect();
    let results: Vec<Result<ReplicateRecord>> = pool.install(|| {
        jobs.par_iter()
            .map(|&(s, r)| {
                run_replicate(&scenarios[s], s, r, procedures, cfg).map_err(|e| Error::Replicate {
                    index: r,
                    source: Box::new(e),
                })
            })
            .collect()
    });
    let records = results.into_iter().collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    let mut audits = Vec::new();
    for (s, chunk) in records.chunks(replicates).enumerate() {
        for (j, &proc) in procedures.iter().enumerate() {
            let mut acc = MetricsAccumulator::default();
            for r in chunk {
                acc.push(&r.outcomes[j]);
            }
            rows.push(CampaignRow {
                scenario: s,
                procedure: proc,
                metrics: acc.finish(),
            });
        }
        let a = audit(s, chunk);
        if !(a.e_ok && a.p_ok) {
            log::warn!(
                "null audit failed for scenario {s}: e mean {:.4} (se {:.4}), KS excess {:.4} (critical {:.4})",
                a.null_e_mean,
                a.null_e_se,
                a.ks_excess,
                a.ks_critical
            );
        }
        audits.push(a);
    }
    Ok(CampaignResult {
        scenarios: scenarios.to_vec(),
        config: *cfg,
        rows,
        audits,
        replicates,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
    })
}

pub const CSV_HEADER: [&str; 19] = [
    "scenario",
    "kind",
    "k",
    "null_fraction",
    "xi",
    "seed",
    "procedure",
    "alpha",
    "fdr",
    "se_fdr",
    "power",
    "se_power",
    "fwer",
    "se_fwer",
    "pfer",
    "se_pfer",
    "mean_discoveries",
    "replicates",
    "tau",
];

impl CampaignResult {
    pub fn metrics(&self, scenario: usize, procedure: Procedure) -> Option<&ErrorMetrics> {
        self.rows
            .iter()
            .find(|r| r.scenario == scenario && r.procedure == procedure)
            .map(|r| &r.metrics)
    }

    /// One row per `(scenario, procedure)`; never includes timing.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let io = |e: csv::Error| Error::param("output", e.to_string());
        let mut w = csv::Writer::from_writer(out);
        w.write_record(CSV_HEADER).map_err(io)?;
        for row in &self.rows {
            let s = &self.scenarios[row.scenario];
            let m = &row.metrics;
            w.write_record([
                row.scenario.to_string(),
                s.kind().to_string(),
                s.k().to_string(),
                format_real(s.null_fraction()),
                format_real(s.xi()),
                s.seed().to_string(),
                row.procedure.name().to_string(),
                format_real(self.config.alpha),
                format_real(m.fdr),
                format_real(m.se_fdr),
                format_real(m.power),
                format_real(m.se_power),
                format_real(m.fwer),
                format_real(m.se_fwer),
                format_real(m.pfer),
                format_real(m.se_pfer),
                format_real(m.mean_discoveries),
                m.replicates.to_string(),
                format_real(self.config.tau),
            ])
            .map_err(io)?;
        }
        w.flush().map_err(|e| Error::param("output", e.to_string()))?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is ASCII"))
    }

    /// Seeds, scenario parameters, audits, versions and wall-clock time.
    pub fn manifest(&self, parallelism: usize) -> serde_json::Value {
        serde_json::json!({
            "package": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "seed_scheme": "splitmix64 avalanche of (scenario seed, scenario index, replicate index); ChaCha8 per replicate",
            "replicates": self.replicates,
            "parallelism": parallelism,
            "wall_clock_seconds": self.wall_clock_seconds,
            "config": self.config,
            "scenarios": self.scenarios,
            "procedures": self.rows.iter().filter(|r| r.scenario == 0).map(|r| r.procedure.name()).collect::<Vec<_>>(),
            "null_audits": self.audits,
        })
    }
}
