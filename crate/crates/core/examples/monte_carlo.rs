//! Simulates agents drawing payoffs and stopping at their cutoffs, and
//! compares the frequencies with the solved probabilities.

use qh_stopping::simulate::simulate;
use qh_stopping::{solve_equilibrium, Distribution, Preferences, StoppingProblem, TerminalValue};

fn main() -> qh_stopping::Result<()> {
    let problem = StoppingProblem::stationary(Distribution::normal(0.0, 1.0), 6, TerminalValue::Finite(-2.0))?;
    let prefs = Preferences::naive(0.7, 0.97)?;
    let prof = solve_equilibrium(&problem, &prefs)?;
    let sim = simulate(&problem, &prof, 1_000_000, 42);
    let freq = sim.frequencies();
    let se = sim.standard_errors(&prof.p);
    println!("{:>2} {:>9} {:>9} {:>8}", "t", "model", "sim", "se");
    for t in 0..prof.p.len() {
        println!("{:>2} {:>9.5} {:>9.5} {:>8.5}", t + 1, prof.p[t], freq[t], se[t]);
    }
    println!("max |z| = {:.2}", sim.max_z(&prof.p));
    Ok(())
}
