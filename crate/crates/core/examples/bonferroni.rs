//! ep-Bonferroni: reject when p/e <= alpha/K. Controls the expected number of false rejections.

use epbh::procedures::{ep_bonferroni, Procedure, ProcedureConfig};
use epbh::sim::{run_campaign, Scenario, TTestScenario};

fn main() -> epbh::Result<()> {
    let p = [1e-5, 0.0004, 0.002, 0.3];
    let e = [1.0, 10.0, 0.5, 50.0];
    println!("rejected: {:?}", ep_bonferroni(&p, &e, 0.05)?.rejected);

    let null: Scenario = TTestScenario {
        k: 500,
        null_fraction: 1.0,
        xi: 0.0,
        ..TTestScenario::default()
    }
    .into();
    let res = run_campaign(&[null], &[Procedure::EpBonferroni], &ProcedureConfig::new(0.1)?, 2000, 0)?;
    let m = res.metrics(0, Procedure::EpBonferroni).unwrap();
    println!("full null: PFER {:.4} +- {:.4}, FWER {:.4}", m.pfer, m.se_pfer, m.fwer);
    Ok(())
}
