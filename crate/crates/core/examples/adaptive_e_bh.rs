//! Adaptive e-BH: a global-null gate followed by e-BH at K alpha / (K - 1).

use epbh::procedures::{adaptive_e_bh, e_bh, Merging};

fn main() -> epbh::Result<()> {
    let alpha = 0.1;
    let e = [75.0, 30.0, 2.0, 1.5, 1.0, 0.8, 0.5, 0.2];
    println!("e-BH          {:?}", e_bh(&e, alpha)?.rejected);
    for m in [Merging::ArithmeticMean, Merging::SimesMax] {
        println!(
            "adaptive {m:<5?} M(e) = {:.3}, rejects {:?}",
            m.merge(&e),
            adaptive_e_bh(&e, alpha, m)?.rejected
        );
    }
    Ok(())
}
