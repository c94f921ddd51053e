//! A flat tax on the payoff can raise welfare: it makes waiting less
//! attractive to a strongly present-biased agent.

use qh_stopping::{evaluate_welfare, solve_equilibrium, Distribution, Preferences, StoppingProblem, TerminalValue};

fn main() -> qh_stopping::Result<()> {
    let prefs = Preferences::sophisticated(0.125, 1.0)?;
    for (label, tax) in [("no tax", 0.0), ("tax 1/8", 0.125)] {
        let law = Distribution::discrete(vec![0.25 - tax, 1.5 - tax], vec![0.25, 0.75])?;
        let problem = StoppingProblem::stationary(law, 3, TerminalValue::Finite(0.0))?;
        let prof = solve_equilibrium(&problem, &prefs)?;
        let w = evaluate_welfare(&problem, &prefs, &prof)?;
        println!("{label:<8} v = {:?}  p = {:?}  W_1 = {}", prof.v, prof.p, w.self_values[0]);
    }
    Ok(())
}
