//! p-BH, e-BH, ep-BH and pe-BH on the same ten hypotheses.

use epbh::calib::Calibrator;
use epbh::procedures::{e_bh, ep_bh, p_bh, pe_bh, wbh_normalized};

fn main() -> epbh::Result<()> {
    let p = [0.001, 0.004, 0.012, 0.019, 0.03, 0.041, 0.2, 0.35, 0.6, 0.9];
    let e = [4.0, 0.5, 6.0, 3.0, 2.5, 1.0, 0.2, 0.8, 1.0, 0.0];
    let alpha = 0.05;

    let show = |name: &str, rejected: &[usize]| println!("{name:<16} {rejected:?}");
    show("p-BH", &p_bh(&p, alpha, false)?.rejected);
    show("p-BY", &p_bh(&p, alpha, true)?.rejected);
    show("e-BH", &e_bh(&e, alpha)?.rejected);
    show("wBH (normalized)", &wbh_normalized(&p, &e, alpha)?.rejected);
    let ep = ep_bh(&p, &e, alpha)?;
    show("ep-BH", &ep.rejected);
    for h in [Calibrator::SqrtMinusOne, Calibrator::power(0.5)?] {
        let pe = pe_bh(&p, &e, h, alpha)?;
        show(&format!("pe-BH {h}"), &pe.rejected);
        assert!(ep.contains(&pe));
    }
    println!("ep-BH cutoff on p/e: {:?}", ep.cutoff());
    Ok(())
}
