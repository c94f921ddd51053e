//! Collapses a continuous law onto one atom per band between continuation
//! values. The reduced law leads to the same behaviour.

use qh_stopping::identification::{interleaved, reduce_to_mass_points, RichData};
use qh_stopping::{solve_equilibrium, Distribution, Preferences, StoppingProblem, TerminalValue};

fn main() -> qh_stopping::Result<()> {
    let prefs = Preferences::sophisticated(0.8, 0.95)?;
    let law = Distribution::normal(0.2, 1.0);
    let problem = StoppingProblem::stationary(law.clone(), 6, TerminalValue::Finite(-1.0))?;
    let prof = solve_equilibrium(&problem, &prefs)?;
    let data = RichData::from_profile(&prof);
    let reduced = reduce_to_mass_points(&data, &law)?;
    println!("cutoffs  {:?}", data.v);
    println!("atoms    {:?}", reduced.atoms);
    println!("weights  {:?}", reduced.weights);
    println!("interleaved: {}", interleaved(&reduced.atoms, &data.v));
    let again = solve_equilibrium(&StoppingProblem::stationary(reduced.distribution, 6, TerminalValue::Finite(-1.0))?, &prefs)?;
    println!("p original {:?}", prof.p);
    println!("p reduced  {:?}", again.p);
    Ok(())
}
