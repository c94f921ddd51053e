//! With no discounting and no bias any mean and spread can be imposed on a
//! rationalizing law without changing behaviour.

use qh_stopping::rationalize::{moment_renormalize, rationalize_sophisticated, StoppingData};
use qh_stopping::{solve_equilibrium, Preferences};

fn main() -> qh_stopping::Result<()> {
    let data = StoppingData::new(vec![0.2, 0.25, 0.4, 0.7, 0.9])?;
    let prefs = Preferences::new(1.0, 1.0, 1.0)?;
    let base = rationalize_sophisticated(&data, &prefs, -1.0, None)?;
    for (mean, sd) in [(0.0, 1.0), (-3.0, 0.25), (10.0, 5.0)] {
        let moved = moment_renormalize(&base, mean, sd)?;
        let (m, var) = moved.distribution.moment_stats();
        let p = solve_equilibrium(&moved.problem()?, &prefs)?.p;
        println!("mean {m:>7.3} sd {:>6.3} terminal {:>8.4}  p {p:?}", var.sqrt(), moved.terminal_value.value());
    }
    Ok(())
}
