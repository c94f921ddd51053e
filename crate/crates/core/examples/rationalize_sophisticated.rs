//! Builds a discrete payoff law under which a sophisticate reproduces
//! given stopping probabilities, then re-solves to check.

use qh_stopping::rationalize::{rationalize_sophisticated, StoppingData};
use qh_stopping::{solve_equilibrium, Distribution, Preferences};

fn main() -> qh_stopping::Result<()> {
    let data = StoppingData::new(vec![0.1, 0.2, 0.35, 0.6])?;
    let prefs = Preferences::sophisticated(0.6, 0.95)?;
    let result = rationalize_sophisticated(&data, &prefs, -2.0, None)?;
    if let Distribution::Discrete(d) = &result.distribution {
        for (x, f) in d.points().iter().zip(d.weights()) {
            println!("atom {x:>12.6}  weight {f:.6}");
        }
    }
    let again = solve_equilibrium(&result.problem()?, &prefs)?;
    println!("target p     {:?}", data.p);
    println!("re-solved p  {:?}", again.p);
    Ok(())
}
