//! Solves the five-period uniform problem with a mandatory deadline for a
//! time-consistent agent, a sophisticate and a naif.

use qh_stopping::{solve_equilibrium, Distribution, Preferences, StoppingProblem, TerminalValue};

fn main() -> qh_stopping::Result<()> {
    let problem = StoppingProblem::stationary(Distribution::uniform(-1.0, 1.0), 5, TerminalValue::Mandatory)?;
    for (name, prefs) in [
        ("exponential", Preferences::new(1.0, 1.0, 1.0)?),
        ("sophisticate", Preferences::sophisticated(0.7, 1.0)?),
        ("naif", Preferences::naive(0.7, 1.0)?),
    ] {
        let prof = solve_equilibrium(&problem, &prefs)?;
        println!("{name}");
        println!("  {:>2} {:>10} {:>10} {:>8}", "t", "v_t", "c_t", "p_t");
        for t in 0..problem.horizon() {
            println!("  {:>2} {:>10.6} {:>10.6} {:>8.5}", t + 1, prof.v[t], prof.c[t], prof.p[t]);
        }
    }
    Ok(())
}
