//! The same data rationalized for a fully naive agent by iterating the
//! piecewise-uniform construction to a fixed point.

use qh_stopping::rationalize::{rationalize_naive, NaiveOptions, StoppingData};
use qh_stopping::{solve_equilibrium, Distribution, Preferences};

fn main() -> qh_stopping::Result<()> {
    let data = StoppingData::new(vec![0.1, 0.2, 0.35, 0.6])?;
    let prefs = Preferences::naive(0.6, 0.95)?;
    let result = rationalize_naive(&data, &prefs, -2.0, &NaiveOptions::default())?;
    if let Distribution::PiecewiseUniform(pw) = &result.distribution {
        for s in pw.segments() {
            println!("[{:>10.5}, {:>10.5})  weight {:.5}", s.lo, s.hi, s.weight);
        }
    }
    println!("{:?}", result.construction_log);
    let again = solve_equilibrium(&result.problem()?, &prefs)?;
    println!("re-solved p  {:?}", again.p);
    Ok(())
}
