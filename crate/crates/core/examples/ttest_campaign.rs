//! A reproducible simulation campaign over signal strengths, with FDR and power per procedure.

use epbh::procedures::{Procedure, ProcedureConfig};
use epbh::sim::{run_campaign, Scenario, TTestScenario};

fn main() -> epbh::Result<()> {
    let scenarios: Vec<Scenario> = [1.5, 2.0, 2.5]
        .into_iter()
        .map(|xi| TTestScenario { xi, seed: 42, ..TTestScenario::default() }.into())
        .collect();
    let procs = [Procedure::PBh, Procedure::WbhNormalized, Procedure::EpBh, Procedure::EpStorey];
    let res = run_campaign(&scenarios, &procs, &ProcedureConfig::new(0.1)?, 100, 0)?;

    for row in &res.rows {
        let m = &row.metrics;
        println!(
            "xi = {:<4} {:<16} FDR {:.4} +- {:.4}  power {:.4} +- {:.4}",
            scenarios[row.scenario].xi(),
            row.procedure.name(),
            m.fdr,
            m.se_fdr,
            m.power,
            m.se_power
        );
    }
    for a in &res.audits {
        println!("scenario {}: null e mean {:.4} +- {:.4}, p uniform: {}", a.scenario, a.null_e_mean, a.null_e_se, a.p_ok);
    }
    Ok(())
}
