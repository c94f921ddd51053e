//! Payoff laws with the same mean and spread but different shapes, and what
//! they imply for tail expectations and dominance.

use qh_stopping::distributions::fosd_geq;
use qh_stopping::{Distribution, Family};

fn main() -> qh_stopping::Result<()> {
    for family in [Family::Uniform, Family::Normal, Family::Logistic, Family::ExtremeValue] {
        let law = Distribution::from_mean_sd(family, 0.0, 0.577)?;
        let (m, var) = law.moment_stats();
        println!(
            "{:<14} mean {m:>7.4} sd {:>6.4}  P(y > 0.5) {:.4}  E[y; y > 0] {:.5}",
            family.name(),
            var.sqrt(),
            law.sf(0.5),
            law.partial_expectation(0.0)
        );
    }
    let lognormal = Distribution::from_mean_sd(Family::LognormalNegated, -2.0, 0.5)?;
    println!("negated lognormal support {:?}", lognormal.support());
    let low = Distribution::uniform(-1.0, 0.0);
    let high = Distribution::uniform(0.0, 1.0);
    println!("U[0,1] dominates U[-1,0]: {}", fosd_geq(&high, &low, None));
    println!("U[-1,1] vs U[-0.5,0.5] ordered: {}", fosd_geq(&Distribution::uniform(-1.0, 1.0), &Distribution::uniform(-0.5, 0.5), None));
    Ok(())
}
