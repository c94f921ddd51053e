//! Which (β, δ) pairs can explain observed continuation values and stopping
//! probabilities? Longer panels pin β down much harder.

use qh_stopping::identification::{check_plausible, identified_set, Grid, RichData};
use qh_stopping::{solve_equilibrium, Distribution, Preferences, StoppingProblem, TerminalValue};

fn main() -> qh_stopping::Result<()> {
    let truth = Preferences::new(1.0, 1.0, 1.0)?;
    for horizon in [5, 20] {
        let problem = StoppingProblem::stationary(Distribution::uniform(-1.0, 1.0), horizon, TerminalValue::Mandatory)?;
        let data = RichData::from_profile(&solve_equilibrium(&problem, &truth)?);
        assert!(check_plausible(&data)?.plausible);
        let set = identified_set(&data, &Grid::default_beta(), &Grid::default_delta())?;
        println!("T = {horizon}: {} consistent cells", set.count());
        if let Some((lo, hi)) = set.beta_interval(1.0) {
            println!("  beta at delta = 1 lies in [{lo:.3}, {hi:.3}]");
        }
        if let Some(w) = &set.witness {
            println!("  witness law built at beta = {}, delta = {}", w.beta, w.delta);
        }
    }
    Ok(())
}
