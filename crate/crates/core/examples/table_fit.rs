//! Fits β under three moment-matched families to the uniform agent's
//! stopping probabilities, by distance and by likelihood.

use qh_stopping::estimation::{estimate_beta, presets, Criterion};

fn main() -> qh_stopping::Result<()> {
    let data = presets::UNIFORM_DATA;
    let by_distance = presets::table_specs(Criterion::SquaredDistance);
    let by_likelihood = presets::table_specs(Criterion::Likelihood);
    println!("{:<28} {:>8} {:>12} {:>8} {:>12}", "model", "beta", "distance", "beta", "cross-ent");
    for (d, l) in by_distance.iter().zip(&by_likelihood) {
        let a = estimate_beta(d, &data)?;
        let b = estimate_beta(l, &data)?;
        println!(
            "{:<28} {:>8.4} {:>12.8} {:>8.4} {:>12.6}",
            d.label(),
            a.beta_hat,
            a.reported_value,
            b.beta_hat,
            b.reported_value
        );
    }
    Ok(())
}
