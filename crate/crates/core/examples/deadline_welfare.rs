//! A three-day chore with falling payoffs and a hard deadline. The
//! sophisticate waits until the last day, which long-run welfare counts
//! as a loss.

use qh_stopping::{evaluate_welfare, solve_equilibrium, Distribution, Preferences, StoppingProblem, TerminalValue};

fn main() -> qh_stopping::Result<()> {
    let laws = [-0.9, -1.0, -1.5].iter().map(|&x| Distribution::point_mass(x)).collect::<Result<_, _>>()?;
    let problem = StoppingProblem::per_period(laws, TerminalValue::Mandatory)?;
    for beta in [1.0, 0.5] {
        let prefs = Preferences::sophisticated(beta, 1.0)?;
        let prof = solve_equilibrium(&problem, &prefs)?;
        let w = evaluate_welfare(&problem, &prefs, &prof)?;
        println!("beta = {beta}");
        println!("  p            {:?}", prof.p);
        println!("  welfare W_t  {:?}", w.self_values);
        println!("  self 1 value {}", w.self1_value_beta);
    }
    Ok(())
}
