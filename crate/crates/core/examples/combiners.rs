//! Merging one p-value and one independent e-value into a single statistic.

use epbh::calib::{calibrate_e_to_p, calibrate_p_to_e, combine_bonferroni, combine_mean, combine_product, combine_quotient, Calibrator};
use epbh::constructors::shift_evalue;
use epbh::values::{EValue, PValue};

fn main() -> epbh::Result<()> {
    let h = Calibrator::SqrtMinusOne;
    println!("{:>8} {:>8} {:>10} {:>10} {:>10} {:>10}", "p", "e", "p/e", "h(p)e", "mean", "bonf");
    for (p, e) in [(0.01, 1.0), (0.01, 8.0), (0.2, 8.0), (0.2, 0.3), (0.5, 20.0)] {
        let (pv, ev) = (PValue::new(p)?, EValue::new(e)?);
        println!(
            "{p:>8} {e:>8} {:>10.4} {:>10.4} {:>10.4} {:>10.4}",
            combine_quotient(pv, ev).get(),
            combine_product(h, pv, ev).get(),
            combine_mean(h, 0.5, pv, ev)?.get(),
            combine_bonferroni(pv, ev).get(),
        );
    }

    let p = PValue::new(0.003)?;
    println!("h(0.003) = {:.4}", calibrate_p_to_e(h, p).get());
    println!("p from e = 40: {:.4}", calibrate_e_to_p(EValue::new(40.0)?).get());
    // guards against e-values near zero
    println!("shift(0.01, 0.2) = {:.4}", shift_evalue(EValue::new(0.01)?, 0.2)?.get());
    Ok(())
}
