//! Battery MILP against an exact dynamic-programming oracle on a 0.001 kWh
//! state-of-charge grid, plus the independent feasibility audit.
//!
//! Instances are drawn so every LP vertex lands exactly on the DP lattice:
//! bounds and profiles are multiples of 0.002 kWh and the efficiency /
//! interval combinations keep `P dt` and `P dt / eff` lattice-closed. The DP
//! tracks (SOC, cumulative charged energy) so the one-cycle limit is exact.

use nemcast_core::battery::{
    build_milp, check_plan_feasibility, ground_truth_cost, solve_milp, BatteryParams, BbLimits,
    ProsumerDay, SolveStatus,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

const GRID: f64 = 0.001;

struct Instance {
    params: BatteryParams,
    day: ProsumerDay,
    prices: Vec<f64>,
}

fn random_instance(seed: u64) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // Six of twenty instances exercise a fractional efficiency on pure
    // arbitrage; the rest mix household load with eff in {0.5, 1.0}.
    let arbitrage_only = seed % 10 < 3;
    let eff = if arbitrage_only {
        0.8
    } else if rng.random_range(0..2) == 0 {
        0.5
    } else {
        1.0
    };
    let t = 12;
    let lattice = |rng: &mut ChaCha8Rng, max_units: i64| -> f64 {
        rng.random_range(0..=max_units) as f64 * 0.002
    };
    let e_max = 0.1 + lattice(&mut rng, 50); // 0.1 .. 0.2
    let e_init = lattice(&mut rng, 25).min(e_max);
    let (demand, generation): (Vec<f64>, Vec<f64>) = if arbitrage_only {
        (vec![0.0; t], vec![0.0; t])
    } else {
        (
            (0..t).map(|_| lattice(&mut rng, 25)).collect(),
            (0..t).map(|_| lattice(&mut rng, 25)).collect(),
        )
    };
    let prices: Vec<f64> = (0..t).map(|_| rng.random_range(-0.06..0.15)).collect();
    Instance {
        params: BatteryParams {
            round_trip_eff: eff,
            e_min_kwh: 0.0,
            e_max_kwh: e_max,
            e_init_kwh: e_init,
            p_max_kw: 0.2,
            dt_hours: 0.5,
            network_charge: if seed % 2 == 0 { 0.02 } else { 0.0 },
        },
        day: ProsumerDay {
            demand_kwh: demand,
            generation_kwh: generation,
        },
        prices,
    }
}

/// Exact DP over (interval, SOC grid, cumulative-charge grid).
fn dp_oracle(inst: &Instance) -> f64 {
    let p = &inst.params;
    let t_count = inst.day.horizon();
    let to_units = |x: f64| -> usize { libm::round(x / GRID) as usize };
    let e_units = to_units(p.e_max_kwh);
    let c_units = e_units; // cycle budget equals e_max
    let charge_max = to_units(p.p_max_kw * p.dt_hours);
    let discharge_max = to_units(p.p_max_kw * p.dt_hours / p.round_trip_eff);

    let inf = f64::INFINITY;
    let layer = (e_units + 1) * (c_units + 1);
    let mut cost = vec![inf; layer];
    cost[to_units(p.e_init_kwh) * (c_units + 1)] = 0.0;
    let mut next = vec![inf; layer];

    for t in 0..t_count {
        next.iter_mut().for_each(|v| *v = inf);
        let price = inst.prices[t];
        let net_base = inst.day.demand_kwh[t] - inst.day.generation_kwh[t];
        for e in 0..=e_units {
            for c in 0..=c_units {
                let here = cost[e * (c_units + 1) + c];
                if !here.is_finite() {
                    continue;
                }
                let max_up = charge_max.min(e_units - e).min(c_units - c);
                let max_down = discharge_max.min(e);
                for delta in -(max_down as i64)..=(max_up as i64) {
                    let de = delta as f64 * GRID;
                    // Meter flow for this SOC move.
                    let meter = if delta >= 0 {
                        net_base + de
                    } else {
                        net_base + de * p.round_trip_eff
                    };
                    let step_cost =
                        price * meter + p.network_charge * meter.max(0.0);
                    let e2 = (e as i64 + delta) as usize;
                    let c2 = if delta > 0 { c + delta as usize } else { c };
                    let slot = e2 * (c_units + 1) + c2;
                    let candidate = here + step_cost;
                    if candidate < next[slot] {
                        next[slot] = candidate;
                    }
                }
            }
        }
        std::mem::swap(&mut cost, &mut next);
    }
    cost.iter().copied().fold(inf, f64::min)
}

#[test]
fn twenty_instances_match_dp_oracle_within_1e6() {
    let start = Instant::now();
    for seed in 0..20u64 {
        let inst = random_instance(seed);
        let milp = build_milp(&inst.params, &inst.day, &inst.prices).unwrap();
        let plan = solve_milp(&milp, 1e-9, BbLimits::default()).unwrap();
        assert_eq!(plan.status, SolveStatus::Optimal, "seed {seed}");

        let violations = check_plan_feasibility(&plan, &inst.params, &inst.day, 1e-6);
        assert!(violations.is_empty(), "seed {seed}: {violations:?}");

        let oracle = dp_oracle(&inst);
        assert!(
            (plan.objective - oracle).abs() <= 1e-6,
            "seed {seed}: milp {} vs dp {oracle}",
            plan.objective
        );
    }
    let elapsed = start.elapsed();
    assert!(
        elapsed.as_secs() < 60,
        "oracle comparison took {elapsed:?}"
    );
}

#[test]
fn perfect_information_lower_bound() {
    // Re-pricing any forecast-driven plan at the true prices can never beat
    // the plan optimised on the true prices themselves.
    for seed in 0..6u64 {
        let inst = random_instance(seed);
        let truth_plan = {
            let m = build_milp(&inst.params, &inst.day, &inst.prices).unwrap();
            solve_milp(&m, 1e-9, BbLimits::default()).unwrap()
        };
        let truth_cost =
            ground_truth_cost(&truth_plan, &inst.prices, inst.params.network_charge).unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xABCD);
        let noisy: Vec<f64> = inst
            .prices
            .iter()
            .map(|p| p + rng.random_range(-0.03..0.03))
            .collect();
        let forecast_plan = {
            let m = build_milp(&inst.params, &inst.day, &noisy).unwrap();
            solve_milp(&m, 1e-9, BbLimits::default()).unwrap()
        };
        let repriced =
            ground_truth_cost(&forecast_plan, &inst.prices, inst.params.network_charge).unwrap();
        assert!(
            truth_cost <= repriced + 1e-7,
            "seed {seed}: {truth_cost} vs {repriced}"
        );
    }
}

#[test]
fn no_simultaneous_flows_in_any_plan() {
    for seed in 0..10u64 {
        let inst = random_instance(seed);
        let m = build_milp(&inst.params, &inst.day, &inst.prices).unwrap();
        let plan = solve_milp(&m, 1e-9, BbLimits::default()).unwrap();
        for t in 0..inst.day.horizon() {
            assert!(plan.charge_kw[t].min(plan.discharge_kw[t]) <= 1e-6);
            assert!(plan.import_kwh[t].min(plan.export_kwh[t]) <= 1e-6);
        }
        let charged: f64 = plan.charge_kw.iter().sum::<f64>() * inst.params.dt_hours;
        assert!(charged <= inst.params.e_max_kwh + 1e-6);
    }
}
