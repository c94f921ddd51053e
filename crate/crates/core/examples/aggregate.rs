//! Mixing two types: a population hazard can fall even though each type's
//! own hazard rises.

use qh_stopping::identification::aggregate_mixture;

fn main() -> qh_stopping::Result<()> {
    let eager = vec![1.0, 1.0, 1.0];
    let late = vec![0.0, 0.0, 1.0];
    let agg = aggregate_mixture(&[(0.3, eager), (0.7, late)])?;
    println!("completion masses {:?}, never {}", agg.q, agg.residual);
    println!("population hazard {:?}", agg.p);
    Ok(())
}
