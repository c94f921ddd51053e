//! Ten days to pay a parking fine. A time-consistent agent and a biased
//! sophisticate with different cost laws give nearly the same completion
//! histogram, so timing alone cannot reveal the bias.

use qh_stopping::estimation::completion_histogram;
use qh_stopping::estimation::presets::{parking_agents, PenaltyReading, SpreadReading};

fn main() -> qh_stopping::Result<()> {
    for spread in [SpreadReading::Variance, SpreadReading::Sd] {
        let (red, blue) = parking_agents(spread, PenaltyReading::Raw)?;
        let a = completion_histogram(&red.problem, &red.prefs)?;
        let b = completion_histogram(&blue.problem, &blue.prefs)?;
        println!("{spread:?}");
        println!("  {:>3} {:>8} {:>8}", "day", "red", "blue");
        for t in 0..a.q.len() {
            println!("  {:>3} {:>8.4} {:>8.4}", t + 1, a.q[t], b.q[t]);
        }
    }
    Ok(())
}
