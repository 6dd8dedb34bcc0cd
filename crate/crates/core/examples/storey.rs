//! Null-proportion estimation and the ep-Storey procedure.

use epbh::procedures::{ep_bh, ep_storey, storey_bh, storey_pi0};
use epbh::sim::{replicate_rng, TTestScenario};

fn main() -> epbh::Result<()> {
    let scn = TTestScenario {
        k: 2000,
        null_fraction: 0.8,
        xi: 2.5,
        ..TTestScenario::default()
    };
    let data = epbh::sim::generate_ttest_replicate(&scn, &mut replicate_rng(7, 0, 0))?;
    let (alpha, tau) = (0.1, 0.5);

    println!("true pi0 = {}, estimate = {:.3}", scn.null_fraction, storey_pi0(&data.p, tau)?);
    println!("Storey-BH rejects {}", storey_bh(&data.p, alpha, tau)?.len());
    println!("ep-BH     rejects {}", ep_bh(&data.p, &data.e, alpha)?.len());
    println!("ep-Storey rejects {}", ep_storey(&data.p, &data.e, alpha, tau)?.len());
    Ok(())
}
