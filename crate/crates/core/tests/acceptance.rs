//! One line per acceptance criterion; exits nonzero if any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use omnirelay::binning::{build_binning, round_trip_failures, verify_binning_property};
use omnirelay::mac_region::{
    decodable_subset, mac_feasible, peel_decodable_subset, two_block_feasible, MacInstance, Subset, TwoBlockInstance,
};
use omnirelay::protocol_sim::{interference_accounting, run_distance_regulated};
use omnirelay::rate_analysis::{allcast_rate_bound, max_achievable_rate, theorem1_conditions, verify_theorem2};
use omnirelay::topology::{k_hop_neighbors, line_one_hop, GainFunction, Topology};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const EPS: f64 = 1e-9;

type Check = fn() -> Outcome;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let elapsed = start.elapsed();
    o.detail = format!("{} [{:.2}s]", o.detail, elapsed.as_secs_f64());
    if let Some(limit) = limit {
        if elapsed > limit {
            o.pass = false;
            o.detail = format!("{} exceeds {}s limit", o.detail, limit.as_secs());
        }
    }
    o
}

fn below(lhs: f64, rhs: f64) -> bool {
    lhs <= 0.0 || lhs < rhs - EPS
}

fn log2p(x: f64) -> f64 {
    (1.0 + x).log2()
}

/// Brute-force self-decodability: every nonempty submask of `s` meets its
/// constraint with the power outside `s` as extra noise.
fn oracle_self_decodable(rates: &[f64], powers: &[f64], noise: f64, s: u64) -> bool {
    let m = rates.len();
    let outside: f64 = (0..m).filter(|i| s >> i & 1 == 0).map(|i| powers[i]).sum();
    let mut t = s;
    while t != 0 {
        let r: f64 = (0..m).filter(|i| t >> i & 1 == 1).map(|i| rates[i]).sum();
        let p: f64 = (0..m).filter(|i| t >> i & 1 == 1).map(|i| powers[i]).sum();
        if !below(r, log2p(p / (noise + outside))) {
            return false;
        }
        t = (t - 1) & s;
    }
    true
}

fn oracle_max_size(rates: &[f64], powers: &[f64], noise: f64) -> u32 {
    (1..1u64 << rates.len())
        .filter(|&s| oracle_self_decodable(rates, powers, noise, s))
        .map(u64::count_ones)
        .max()
        .unwrap_or(0)
}

fn random_mac(rng: &mut ChaCha8Rng, max_m: usize) -> (Vec<f64>, Vec<f64>) {
    let m = rng.random_range(1..=max_m);
    let rates = (0..m).map(|_| rng.random_range(0.0..2.0)).collect();
    let (lo, hi) = (0.1f64.ln(), 10f64.ln());
    let powers = (0..m).map(|_| rng.random_range(lo..hi).exp()).collect();
    (rates, powers)
}

fn ac1() -> Outcome {
    let mut tuples = 0;
    let mut failures = 0;
    let mut bad_property = 0;
    for k in 1..=3u32 {
        for code in 0..6u64.pow(k) {
            let sizes: Vec<u64> = (0..k).map(|p| code / 6u64.pow(p) % 6 + 1).collect();
            let bins = build_binning(&sizes).expect("sizes are positive");
            failures += round_trip_failures(&bins).expect("small alphabet");
            if !verify_binning_property(&bins).expect("small alphabet") {
                bad_property += 1;
            }
            tuples += 1;
        }
    }
    outcome(
        failures == 0 && bad_property == 0 && tuples == 6 + 36 + 216,
        format!("{tuples} size tuples, {failures} round-trip failures, {bad_property} property violations"),
    )
}

fn ac2() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA2);
    let trials = 1200;
    let (mut guaranteed, mut discrepancies) = (0, 0);
    for _ in 0..trials {
        let (rates, powers) = random_mac(&mut rng, 10);
        let inst = MacInstance::new(rates.clone(), powers.clone(), 1.0).expect("valid instance");
        let exact = decodable_subset(&inst).expect("m <= 16");
        let peeled = peel_decodable_subset(&inst);
        let sum_ok = below(rates.iter().sum(), log2p(powers.iter().sum()));
        if sum_ok {
            guaranteed += 1;
            if exact.is_empty() || peeled.is_empty() {
                discrepancies += 1;
            }
        }
        for s in [exact, peeled] {
            if !s.is_empty() && !oracle_self_decodable(&rates, &powers, 1.0, s.bits()) {
                discrepancies += 1;
            }
        }
        if exact.len() as u32 != oracle_max_size(&rates, &powers, 1.0) {
            discrepancies += 1;
        }
    }
    outcome(
        discrepancies == 0,
        format!("{trials} instances ({guaranteed} meeting the sum-rate condition), {discrepancies} discrepancies"),
    )
}

fn ac3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA3);
    let trials = 600;
    let (mut mismatches, mut with_violation, mut identity_failures) = (0, 0, 0);
    for _ in 0..trials {
        let (rates, powers) = random_mac(&mut rng, 8);
        let m = rates.len();
        let inst = MacInstance::new(rates, powers, 1.0).expect("valid instance");
        let expected = mac_feasible(&inst).expect("m <= 24");
        let none = vec![Subset::empty(); m];
        for m1 in [Subset::empty(), inst.sources()] {
            let tb = TwoBlockInstance::new(inst.clone(), m1, none.clone()).expect("valid partition");
            if two_block_feasible(&tb).expect("m <= 20") != expected {
                mismatches += 1;
            }
        }

        let m1 = Subset::from_bits(rng.random_range(0..1u64 << m));
        let helps: Vec<Subset> = (0..m)
            .map(|i| {
                if m1.contains(i) {
                    Subset::empty()
                } else {
                    Subset::from_bits(rng.random::<u64>()).intersection(m1)
                }
            })
            .collect();
        let tb = TwoBlockInstance::new(inst.clone(), m1, helps).expect("valid helper sets");
        let violating = tb.violating_subsets();
        if !violating.is_empty() {
            with_violation += 1;
        }
        let full_holds = tb.constraint_holds(inst.sources());
        for a in violating {
            let d = tb.difference_check(a);
            let mut ok = d.identity_residual().abs() <= EPS;
            if full_holds && a != inst.sources() {
                ok &= d.complement_lhs < d.complement_rhs && d.reduced_lhs <= d.complement_lhs + EPS;
            }
            if !ok {
                identity_failures += 1;
            }
        }
    }
    outcome(
        mismatches == 0 && identity_failures == 0,
        format!(
            "{trials} instances, {mismatches} reduction mismatches, {with_violation} with a violating set, {identity_failures} difference-step failures"
        ),
    )
}

fn gains() -> Vec<(&'static str, GainFunction)> {
    vec![
        ("d^-1", GainFunction::power_law(2.0).unwrap()),
        ("d^-2", GainFunction::power_law(4.0).unwrap()),
        ("e^-d", GainFunction::exponential(1.0).unwrap()),
        ("const", GainFunction::Constant),
    ]
}

fn regular_grid(max_n: usize) -> Vec<(usize, &'static str, f64, Topology)> {
    let mut grid = Vec::new();
    for n in 2..=max_n {
        for (label, gain) in gains() {
            for snr in [1.0, 10.0, 100.0] {
                let topo = Topology::regular_line(n, 1.0, gain.clone(), snr, 1.0).unwrap();
                grid.push((n, label, snr, topo));
            }
        }
    }
    grid
}

fn ac4() -> Outcome {
    let grid = regular_grid(12);
    let mut failed = Vec::new();
    let mut rates = 0;
    for (n, label, snr, topo) in &grid {
        let report = verify_theorem2(topo, 100, *n as u64).expect("regular line");
        rates += report.rates.len();
        if !report.holds || !report.witnesses.is_empty() {
            failed.push(format!("n={n} {label} P/N={snr}: {:?}", report.witnesses.first()));
        }
    }
    outcome(
        failed.is_empty(),
        format!(
            "{} configurations, {rates} rates checked, failures: {failed:?}",
            grid.len()
        ),
    )
}

fn ac5() -> Outcome {
    let grid = regular_grid(8);
    let mut problems = Vec::new();
    for (n, label, snr, topo) in &grid {
        let one_hop = line_one_hop(&(0..*n).collect::<Vec<_>>());
        let horizons = k_hop_neighbors(&one_hop);
        let bound = allcast_rate_bound(topo).expect("valid line");
        let tag = format!("n={n} {label} P/N={snr}");

        let trace = run_distance_regulated(topo, &one_hop, 0.999 * bound, 2 * n).expect("valid run");
        if !trace.all_succeeded() {
            problems.push(format!("{tag}: failed decodes {:?}", trace.failures()));
        }
        for i in 0..*n {
            match trace.completion_block(i) {
                Some(b) if b <= horizons.horizon(i) + 1 => {}
                other => problems.push(format!("{tag}: node {} completes at {other:?}", i + 1)),
            }
        }
        if interference_accounting(&trace).iter().any(|r| !r.undecoded.is_empty()) {
            problems.push(format!("{tag}: residual interference"));
        }

        let above = run_distance_regulated(topo, &one_hop, 1.001 * bound, 2 * n).expect("valid run");
        if above.sum_rate_conditions().iter().all(|&ok| ok) {
            problems.push(format!("{tag}: no sum-rate failure above the bound"));
        }
    }
    outcome(
        problems.is_empty(),
        format!("{} configurations, problems: {problems:?}", grid.len()),
    )
}

fn ac6() -> Outcome {
    let mut worst: f64 = 0.0;
    let grid = regular_grid(12);
    for (_, _, _, topo) in &grid {
        let max = max_achievable_rate(topo, 1e-6).expect("line-ordered");
        worst = worst.max((max.rate - allcast_rate_bound(topo).unwrap()).abs());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0xA6);
    let mut worst_pair: f64 = 0.0;
    for _ in 0..50 {
        let d = rng.random_range(0.2..5.0);
        let snr = rng.random_range(0.5..200.0);
        let topo = Topology::line(vec![0.0, d], GainFunction::power_law(2.0).unwrap(), snr, 1.0).unwrap();
        let pm = topo.power_matrix().unwrap();
        let expected = log2p(pm.get(0, 1).min(pm.get(1, 0)));
        let max = max_achievable_rate(&topo, 1e-6).expect("pair");
        worst_pair = worst_pair.max((max.rate - expected).abs());
    }
    outcome(
        worst <= 1e-5 && worst_pair <= 1e-5,
        format!(
            "{} regular lines, max deviation {worst:.2e}; 50 pairs, max deviation {worst_pair:.2e}",
            grid.len()
        ),
    )
}

fn ac7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xA7);
    let (mut held, mut violations) = (0, 0);
    for _ in 0..100 {
        let n = rng.random_range(2..=8);
        let mut xs = vec![0.0];
        for _ in 1..n {
            let gap = rng.random_range(0.05..5.0);
            xs.push(xs.last().unwrap() + gap);
        }
        let gain = gains().swap_remove(rng.random_range(0..4)).1;
        let topo = Topology::line(xs, gain, rng.random_range(1.0..100.0), 1.0).unwrap();
        let bound = allcast_rate_bound(&topo).unwrap();
        let rate = rng.random_range(0.0..1.2) * bound;
        if theorem1_conditions(&topo, rate).unwrap().verdict {
            held += 1;
            if !theorem1_conditions(&topo, 0.5 * rate).unwrap().verdict {
                violations += 1;
            }
        }
    }
    outcome(
        violations == 0 && held > 0,
        format!("100 random lines, {held} verdicts true at R, {violations} false at R/2"),
    )
}

fn ac8() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let configs: Vec<Vec<&str>> = vec![
        vec![
            "analyze", "--preset", "line", "--n", "7", "--seed", "3", "--format", "json",
        ],
        vec![
            "simulate",
            "--preset",
            "line",
            "--n",
            "5",
            "--seed",
            "3",
            "--payload-size",
            "3",
        ],
        vec![
            "sweep",
            "--n-list",
            "2,5,9",
            "--gain-list",
            "pl:2;exp:0.5;const",
            "--format",
            "json",
        ],
        vec!["bin-demo", "--k-max", "2", "--size-max", "5"],
    ];
    let mut differing = Vec::new();
    for (k, args) in configs.iter().enumerate() {
        let mut outputs = Vec::new();
        for run in 0..2 {
            let out_path = dir.path().join(format!("out-{k}-{run}"));
            let trace_path = dir.path().join(format!("trace-{k}-{run}"));
            let mut full: Vec<String> = args.iter().map(|s| s.to_string()).collect();
            full.extend(["--out".into(), out_path.display().to_string()]);
            if args[0] == "simulate" {
                full.extend(["--trace".into(), trace_path.display().to_string()]);
            }
            let status = Command::new(env!("CARGO_BIN_EXE_omnirelay"))
                .args(&full)
                .status()
                .expect("binary runs");
            let mut bytes = std::fs::read(&out_path).unwrap_or_default();
            bytes.extend(std::fs::read(&trace_path).unwrap_or_default());
            outputs.push((status.success(), bytes));
        }
        if !outputs[0].0 || outputs[0] != outputs[1] || outputs[0].1.is_empty() {
            differing.push(args.join(" "));
        }
    }
    outcome(
        differing.is_empty(),
        format!(
            "{} configurations run twice, differing or failing: {differing:?}",
            configs.len()
        ),
    )
}

fn main() -> ExitCode {
    let criteria: Vec<(&str, Option<u64>, Check)> = vec![
        ("binning round trip", Some(10), ac1),
        ("decodable subset oracle", Some(60), ac2),
        ("two-block identities", None, ac3),
        ("regular-line conditions", Some(60), ac4),
        ("end-to-end achievability", None, ac5),
        ("bisection consistency", None, ac6),
        ("verdict monotonicity", None, ac7),
        ("determinism", None, ac8),
    ];
    let mut all = true;
    for (k, (name, limit, check)) in criteria.into_iter().enumerate() {
        let o = timed(limit.map(Duration::from_secs), check);
        all &= o.pass;
        println!(
            "AC{} {}: {name}: {}",
            k + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
