//! Property tests for the model invariants. Each case draws a seed and builds
//! its random problem from it with the shared generators.

mod common;

use common::*;
use proptest::prelude::*;
use qh_stopping::distributions::{fosd_geq, Discrete, Distribution};
use qh_stopping::estimation::{self, presets, Criterion, DistanceSpace};
use qh_stopping::exact::{self, ExactPreferences};
use qh_stopping::hazard;
use qh_stopping::identification::{self, Grid, RichData};
use qh_stopping::model::{g_eval, solve_equilibrium, PayoffLaws, Preferences, StoppingProblem, TerminalValue};
use qh_stopping::rationalize::{
    moment_renormalize, naive_operator, rationalize_naive, rationalize_sophisticated, NaiveOptions, StoppingData,
};
use rand::Rng;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

fn upper_end(law: &Distribution) -> f64 {
    let (_, hi) = law.support();
    if hi.is_finite() {
        hi
    } else {
        law.mean() + 40.0 * law.variance().sqrt()
    }
}

proptest! {
    #![proptest_config(config(256))]

    #[test]
    fn values_fall_and_hazards_rise(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = r.random_range(1..=10);
        let problem = random_problem(&mut r, t);
        let prefs = random_prefs(&mut r);
        let prof = solve_equilibrium(&problem, &prefs).unwrap();
        for w in prof.v.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12, "v rises: {:?}", prof.v);
        }
        for w in prof.p.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12, "p falls: {:?}", prof.p);
        }
    }

    #[test]
    fn naive_values_fall_strictly(seed in any::<u64>()) {
        let mut r = rng(seed);
        let law = random_law(&mut r);
        let y = -r.random_range(0.05..3.0);
        prop_assume!(law.cdf(y) >= 0.05);
        let t = r.random_range(2..=6);
        let prefs = Preferences::naive(unit_param(&mut r, 0.2), r.random_range(0.5..0.99)).unwrap();
        let problem = StoppingProblem::stationary(law, t, TerminalValue::Finite(y)).unwrap();
        let v = solve_equilibrium(&problem, &prefs).unwrap().v;
        for w in v.windows(2) {
            prop_assert!(w[1] < w[0], "not strictly decreasing: {:?}", v);
        }
    }

    #[test]
    fn g_function_shape(seed in any::<u64>()) {
        let mut r = rng(seed);
        let law = random_law(&mut r);
        let prefs = Preferences::new(unit_param(&mut r, 0.2), unit_param(&mut r, 0.2), r.random_range(0.3..0.99)).unwrap();
        let (a, b): (f64, f64) = (r.random_range(0.0..5.0), r.random_range(0.0..5.0));
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(g_eval(&law, &prefs, lo).unwrap() <= g_eval(&law, &prefs, hi).unwrap() + 1e-12);
        let w = -r.random_range(1e-3..6.0);
        prop_assert!(g_eval(&law, &prefs, w).unwrap() > w);
        let far = upper_end(&law).max(0.0) + 1.0;
        prop_assert!(g_eval(&law, &prefs, far).unwrap() < far);
    }

    #[test]
    fn better_laws_help_believers_in_consistency(seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_law(&mut r);
        let f = g.clone().affine(r.random_range(0.0..1.0), 1.0).unwrap();
        prop_assert!(fosd_geq(&f, &g, None));
        let t = r.random_range(1..=8);
        let terminal = random_terminal(&mut r);
        let prefs = Preferences::naive(unit_param(&mut r, 0.2), unit_param(&mut r, 0.5)).unwrap();
        let vf = solve_equilibrium(&StoppingProblem::stationary(f, t, terminal).unwrap(), &prefs).unwrap().v;
        let vg = solve_equilibrium(&StoppingProblem::stationary(g, t, terminal).unwrap(), &prefs).unwrap().v;
        for (a, b) in vf.iter().zip(&vg) {
            prop_assert!(a >= b || b - a <= 1e-12, "{:?} vs {:?}", vf, vg);
        }
    }

    #[test]
    fn mass_on_a_cutoff_waits(seed in any::<u64>()) {
        let mut r = rng(seed);
        let Distribution::Discrete(d) = random_discrete(&mut r) else { unreachable!() };
        let t_max = r.random_range(2..=6);
        let terminal = random_terminal(&mut r);
        let prefs = random_prefs(&mut r);
        let law = Distribution::Discrete(d.clone());
        let base = StoppingProblem::stationary(law.clone(), t_max, terminal).unwrap();
        let prof = solve_equilibrium(&base, &prefs).unwrap();
        // period t's law only feeds p_t and earlier values
        let t = r.random_range(0..t_max - 1);
        let cut = prof.v[t];
        let below: Vec<usize> = (0..d.points().len()).filter(|&i| d.points()[i] < cut).collect();
        prop_assume!(!below.is_empty());
        let i = below[r.random_range(0..below.len())];
        let mut points = d.points().to_vec();
        points[i] = cut;
        let moved = Distribution::Discrete(Discrete::from_pairs(points.into_iter().zip(d.weights().iter().copied()).collect()).unwrap());
        let mut laws = vec![law; t_max];
        laws[t] = moved;
        let again = solve_equilibrium(&StoppingProblem::per_period(laws, terminal).unwrap(), &prefs).unwrap();
        prop_assert_eq!(again.p[t], prof.p[t]);
        prop_assert_eq!(again.v[t], prof.v[t]);
    }

    #[test]
    fn perceived_cutoffs_scale_values(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = r.random_range(1..=8);
        let problem = random_problem(&mut r, t);
        let prefs = random_prefs(&mut r);
        let prof = solve_equilibrium(&problem, &prefs).unwrap();
        let ratio = prefs.beta_hat / prefs.beta;
        for (c, v) in prof.c.iter().zip(&prof.v) {
            if v.is_finite() {
                prop_assert!((c - ratio * v).abs() <= 1e-12 * v.abs().max(1.0));
            } else {
                prop_assert_eq!(*c, *v);
            }
        }
    }

    #[test]
    fn partial_expectation_shape(seed in any::<u64>()) {
        let mut r = rng(seed);
        let law = random_law(&mut r);
        let (a, b): (f64, f64) = (r.random_range(-6.0..6.0), r.random_range(-6.0..6.0));
        // dPE/dw = -w f(w): falling on w >= 0, rising on w <= 0
        let (lo, hi) = (a.min(b), a.max(b));
        let (pl, ph) = (law.partial_expectation(lo), law.partial_expectation(hi));
        let tol = 1e-12 * pl.abs().max(ph.abs()).max(1.0);
        if lo >= 0.0 {
            prop_assert!(ph <= pl + tol, "PE rises on [{}, {}]: {} -> {}", lo, hi, pl, ph);
        } else if hi <= 0.0 {
            prop_assert!(ph >= pl - tol, "PE falls on [{}, {}]: {} -> {}", lo, hi, pl, ph);
        }
        let w = r.random_range(0.0..6.0);
        prop_assert!(law.partial_expectation(w) >= w * law.sf(w) - 1e-12);
    }

    #[test]
    fn affine_moves_moments(seed in any::<u64>()) {
        let mut r = rng(seed);
        let law = random_law(&mut r);
        let (shift, scale) = (r.random_range(-3.0..3.0), r.random_range(0.2..3.0));
        let (m, v) = (law.mean(), law.variance());
        let moved = law.affine(shift, scale).unwrap();
        prop_assert!((moved.mean() - (scale * m + shift)).abs() <= 1e-9 * (m.abs() + shift.abs()).max(1.0));
        prop_assert!((moved.variance() - scale * scale * v).abs() <= 1e-9 * (scale * scale * v).max(1.0));
    }

    #[test]
    fn json_round_trips(seed in any::<u64>()) {
        let mut r = rng(seed);
        let law = random_law(&mut r);
        let back: Distribution = serde_json::from_str(&serde_json::to_string(&law).unwrap()).unwrap();
        prop_assert_eq!(&back, &law);
        let t = r.random_range(1..=6);
        let problem = if r.random_bool(0.5) {
            random_problem(&mut r, t)
        } else {
            let laws = (0..t).map(|_| random_law(&mut r)).collect();
            StoppingProblem::per_period(laws, random_terminal(&mut r)).unwrap()
        };
        let back: StoppingProblem = serde_json::from_str(&serde_json::to_string(&problem).unwrap()).unwrap();
        prop_assert_eq!(back, problem);
    }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn sophisticated_atoms_sit_on_values(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = r.random_range(1..=8);
        let p = random_plausible_p(&mut r, t);
        let prefs = Preferences::sophisticated(unit_param(&mut r, 0.2), unit_param(&mut r, 0.3)).unwrap();
        let y = r.random_range(-10.0..10.0);
        let res = rationalize_sophisticated(&StoppingData::new(p.clone()).unwrap(), &prefs, y, None).unwrap();
        let law = res.construction_log.exact_law().unwrap().unwrap();
        prop_assert!(law.points.windows(2).all(|w| w[0] < w[1]));
        let ep = exact::solve_stationary(&law, t, Some(&exact::rational(y).unwrap()), &ExactPreferences::from_f64(&prefs).unwrap()).unwrap();
        prop_assert_eq!(ep.p_f64(), p.clone());
        // atom k sits on v_{T-k+1} for k = 1..T
        for k in 1..=t {
            prop_assert_eq!(Some(&law.points[k]), ep.v[t - k].as_ref());
        }
    }

    #[test]
    fn naive_round_trip(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = r.random_range(1..=8);
        let p = random_plausible_p(&mut r, t);
        let prefs = Preferences::naive(unit_param(&mut r, 0.2), r.random_range(0.5..0.99)).unwrap();
        let y = -r.random_range(0.01..10.0);
        let opts = NaiveOptions::default();
        let res = rationalize_naive(&StoppingData::new(p.clone()).unwrap(), &prefs, y, &opts).unwrap();
        let again = solve_equilibrium(&res.problem().unwrap(), &prefs).unwrap();
        prop_assert!(sup_gap(&again.p, &p) <= 10.0 * opts.tol);
    }

    #[test]
    fn naive_operator_is_monotone_on_the_lattice(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = r.random_range(2..=8);
        let data = StoppingData::new(random_plausible_p(&mut r, t)).unwrap();
        let delta = r.random_range(0.5..0.99);
        let prefs = Preferences::naive(unit_param(&mut r, 0.2), delta).unwrap();
        let y = -r.random_range(0.01..5.0);
        let (c1, c2) = (1.0, 1.0);
        let top = delta * c2 / (1.0 - delta);
        let draw = |r: &mut rand_chacha::ChaCha8Rng| {
            let mut v: Vec<f64> = (0..t - 1).map(|_| r.random_range(y..top)).collect();
            v.sort_by(|a, b| b.total_cmp(a));
            v
        };
        let low = draw(&mut r);
        let high: Vec<f64> = low.iter().enumerate().map(|(i, x)| {
            // raise while keeping the vector non-increasing and inside the lattice
            let room = if i == 0 { top - x } else { low[i - 1] - x };
            x + r.random_range(0.0..=1.0) * room
        }).collect();
        let l_low = naive_operator(&data, &prefs, y, c1, c2, &low).unwrap();
        let l_high = naive_operator(&data, &prefs, y, c1, c2, &high).unwrap();
        for (a, b) in l_high.iter().zip(&l_low) {
            prop_assert!(a >= b || b - a <= 1e-12);
        }
        for w in [&l_low, &l_high] {
            prop_assert!(w.iter().all(|x| *x >= y - 1e-12 && *x <= top + 1e-12));
            prop_assert!(w.windows(2).all(|p| p[1] <= p[0] + 1e-12));
        }
    }

    #[test]
    fn renormalizing_keeps_p(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = r.random_range(1..=8);
        let p = random_plausible_p(&mut r, t);
        let prefs = Preferences::new(1.0, 1.0, 1.0).unwrap();
        let base = rationalize_sophisticated(&StoppingData::new(p.clone()).unwrap(), &prefs, r.random_range(-5.0..5.0), None).unwrap();
        let moved = moment_renormalize(&base, r.random_range(-5.0..5.0), r.random_range(0.05..5.0)).unwrap();
        prop_assert_eq!(&moved.profile.p, &p);
        let again = solve_equilibrium(&moved.problem().unwrap(), &prefs).unwrap();
        prop_assert!(sup_gap(&again.p, &p) <= 1e-10);
    }

    #[test]
    fn truth_is_consistent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = r.random_range(3..=10);
        let problem = random_problem(&mut r, t);
        let prefs = Preferences::sophisticated(unit_param(&mut r, 0.2), unit_param(&mut r, 0.5)).unwrap();
        let data = RichData::from_profile(&solve_equilibrium(&problem, &prefs).unwrap());
        prop_assume!(data.p[0] > 0.0);
        prop_assert!(identification::check_consistent(&data, prefs.beta, prefs.delta).unwrap());
    }

    #[test]
    fn reduction_reproduces_data(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = r.random_range(1..=8);
        let problem = random_problem(&mut r, t);
        let prefs = Preferences::sophisticated(unit_param(&mut r, 0.2), unit_param(&mut r, 0.5)).unwrap();
        let data = RichData::from_profile(&solve_equilibrium(&problem, &prefs).unwrap());
        let PayoffLaws::Stationary(law) = problem.payoff_laws() else { unreachable!() };
        let reduced = identification::reduce_to_mass_points(&data, law).unwrap();
        let again = StoppingProblem::stationary(reduced.distribution, t, problem.terminal_value()).unwrap();
        let prof = solve_equilibrium(&again, &prefs).unwrap();
        let scale = data.v.iter().filter(|x| x.is_finite()).fold(1.0f64, |m, x| m.max(x.abs()));
        prop_assert!(sup_gap(&prof.v, &data.v) <= 1e-9 * scale, "{:?} vs {:?}", prof.v, data.v);
        prop_assert!(sup_gap(&prof.p, &data.p) <= 1e-9);
    }

    #[test]
    fn aggregate_inverts(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = r.random_range(1..=8);
        let n = r.random_range(1..=4);
        let weights = random_weights(&mut r, n);
        let types: Vec<(f64, Vec<f64>)> = weights.into_iter().map(|w| {
            let mut p: Vec<f64> = (0..t).map(|_| r.random_range(0.0..=1.0)).collect();
            if r.random_bool(0.3) { p[t - 1] = 1.0; }
            (w, p)
        }).collect();
        let agg = identification::aggregate_mixture(&types).unwrap();
        let p = hazard::conditional(&agg.q, agg.residual).unwrap();
        prop_assert!(sup_gap(&p, &agg.p) <= 1e-12);
        let (q, residual) = hazard::unconditional(&agg.p);
        prop_assert!(sup_gap(&q, &agg.q) <= 1e-12);
        prop_assert!((residual - agg.residual).abs() <= 1e-12);
    }

    #[test]
    fn hazard_conversion_round_trips(seed in any::<u64>()) {
        let mut r = rng(seed);
        let t = r.random_range(1..=10);
        let mut p: Vec<f64> = (0..t).map(|_| r.random_range(0.01..=1.0)).collect();
        p[t - 1] = 1.0;
        let (q, residual) = hazard::unconditional(&p);
        prop_assert_eq!(residual, 0.0);
        prop_assert!(sup_gap(&hazard::conditional(&q, residual).unwrap(), &p) <= 1e-12);
    }

    #[test]
    fn fitted_profiles_have_rising_hazards(seed in any::<u64>(), row in 0usize..6) {
        let mut r = rng(seed);
        let spec = &presets::table_specs(Criterion::SquaredDistance)[row];
        let beta = r.random_range(0.3..=1.0);
        let p = estimation::model_profile(spec, beta).unwrap().p;
        prop_assert!(p.windows(2).all(|w| w[1] >= w[0] - 1e-12), "{:?}", p);
    }
}

#[test]
fn nested_prefixes_loosen_the_set() {
    let uniform = Distribution::uniform(-1.0, 1.0);
    let problem = StoppingProblem::stationary(uniform, 12, TerminalValue::Mandatory).unwrap();
    let full = RichData::from_profile(&solve_equilibrium(&problem, &Preferences::new(1.0, 1.0, 1.0).unwrap()).unwrap());
    let (bg, dg) = (Grid::new(0.3, 1.5, 0.01).unwrap(), Grid::new(0.8, 1.0, 0.005).unwrap());
    let mut previous = identification::identified_set(&full, &bg, &dg).unwrap();
    for h in (3..12).rev() {
        let set = identification::identified_set(&full.prefix(h).unwrap(), &bg, &dg).unwrap();
        for ((a, b, inner), (_, _, outer)) in previous.cells().zip(set.cells()) {
            assert!(!inner || outer, "cell ({a}, {b}) consistent for a longer prefix only");
        }
        assert!(set.count() >= previous.count());
        previous = set;
    }
}

#[test]
fn finer_grid_keeps_the_argmin() {
    let data = presets::UNIFORM_DATA;
    for mut spec in presets::table_specs(Criterion::SquaredDistance).into_iter().step_by(2) {
        spec.beta_grid = Grid::new(0.3, 1.0, 0.005).unwrap();
        let coarse = estimation::estimate_beta(&spec, &data).unwrap().beta_hat;
        spec.beta_grid = Grid::new(0.3, 1.0, 0.0005).unwrap();
        let fine = estimation::estimate_beta(&spec, &data).unwrap().beta_hat;
        assert!((coarse - fine).abs() <= 0.005 + 1e-12, "{}: {coarse} vs {fine}", spec.label());
    }
}

#[test]
fn criterion_vanishes_at_the_truth() {
    let mut spec = presets::table_specs(Criterion::SquaredDistance)[0].clone();
    spec.family = qh_stopping::Family::Uniform;
    spec.sd = presets::UNIFORM_SD;
    let truth = estimation::model_profile(&spec, 1.0).unwrap().p;
    for space in [DistanceSpace::Conditional, DistanceSpace::Unconditional] {
        let d = estimation::criterion_value(&truth, &truth, Criterion::SquaredDistance, space).unwrap();
        assert_eq!(d, 0.0);
    }
    let ll = estimation::criterion_value(&truth, &truth, Criterion::Likelihood, DistanceSpace::Unconditional).unwrap();
    assert!((ll - estimation::data_entropy(&truth)).abs() < 1e-12);
}
