//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with
//! a failure status if any criterion fails.

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use dfrelay::montecarlo::{effectiveness_row, estimate_rate, estimate_sum_rate_multiuser};
use dfrelay_core::analytic::{
    adhoc_coefficient_sum, block_coefficient_sum, closed_form_condition, factored,
    hop_coefficient_sum, quadrature_rate, rate_adhoc, rate_block, rate_from_survival, rate_hop,
    rate_optimal_dp, rate_optimal_indep, rate_sliding, sum_rate_multiuser, RateMethod, RateValue,
    CONDITION_LIMIT,
};
use dfrelay_core::expsum::{
    survival_adhoc, survival_block, survival_dp, survival_hop, survival_optimal_indep,
    survival_sliding, ExpPoly,
};
use dfrelay_core::model::{path_bottleneck, NetworkConfig, SnrTrellis};
use dfrelay_core::special::exp_scaled_e1;
use dfrelay_core::strategies::{select_brute_force, select_optimal};
use dfrelay_core::Strategy;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn config(l: usize, m: usize, scale: f64) -> NetworkConfig {
    NetworkConfig::new(l, m, scale).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn optimal_matches_brute_force() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for k in 0..500usize {
        let m = 1 + k % 3;
        let l = 2 + (k / 3) % 4;
        let t = SnrTrellis::sample(&config(l, m, 1.0), &mut rng);
        let opt = path_bottleneck(&t, &select_optimal(&t)).unwrap();
        let brute =
            path_bottleneck(&t, &select_brute_force(&t).map_err(|e| e.to_string())?).unwrap();
        if opt != brute {
            return Err(format!("instance {k} (M={m}, L={l}): {opt} vs {brute}"));
        }
    }
    let secs = start.elapsed().as_secs_f64();
    if secs >= 10.0 {
        return Err(format!("500 instances took {secs:.2} s"));
    }
    Ok(format!("500 instances equal, {secs:.3} s"))
}

fn within_se(mean: f64, stderr: f64, target: f64, k: f64) -> bool {
    (mean - target).abs() <= k * stderr
}

fn exact_rates_match_simulation() -> Outcome {
    let mut notes = Vec::new();
    let mut failures = Vec::new();
    for scale in [1.0, 10.0] {
        let cases = [
            (Strategy::HopByHop, 6, rate_hop(2, 6, scale).unwrap().rate),
            (Strategy::AdHoc, 6, rate_adhoc(2, 6, scale).unwrap().rate),
            (Strategy::Block(2), 4, rate_block(2, 4, scale).unwrap().rate),
        ];
        for (strategy, l, analytic) in cases {
            let start = Instant::now();
            let est = estimate_rate(&config(l, 2, scale), strategy, 100_000, 11).unwrap();
            let z = (est.mean - analytic) / est.stderr;
            let note = format!("{}(L={l},σ²={scale}) z={z:+.2}", strategy.name());
            if !within_se(est.mean, est.stderr, analytic, 4.0) || start.elapsed().as_secs() >= 60 {
                failures.push(note.clone());
            }
            notes.push(note);
        }
    }
    if failures.is_empty() {
        Ok(notes.join(", "))
    } else {
        Err(failures.join(", "))
    }
}

fn dual_paths_agree() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for m in 1..=3 {
        for l in 2..=6 {
            for scale in [0.1, 1.0, 10.0, 100.0] {
                let mut pairs = vec![
                    (
                        "hop",
                        hop_coefficient_sum(m, l, scale),
                        rate_hop(m, l, scale).map(|v| v.rate),
                    ),
                    (
                        "adhoc",
                        adhoc_coefficient_sum(m, l, scale),
                        rate_adhoc(m, l, scale).map(|v| v.rate),
                    ),
                ];
                if l % 2 == 0 {
                    pairs.push((
                        "block",
                        block_coefficient_sum(m, l, scale),
                        rate_block(m, l, scale).map(|v| v.rate),
                    ));
                }
                for (name, direct, pipeline) in pairs {
                    let (direct, pipeline) = (
                        direct.map_err(|e| e.to_string())?,
                        pipeline.map_err(|e| e.to_string())?,
                    );
                    let r = rel(direct, pipeline);
                    if r > 1e-9 {
                        return Err(format!(
                            "{name} M={m} L={l} σ²={scale}: relative gap {r:.2e}"
                        ));
                    }
                    worst = worst.max(r);
                    count += 1;
                }
            }
        }
    }
    Ok(format!("{count} pairs, worst relative gap {worst:.2e}"))
}

fn dp_beats_indep() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for l in [3, 6] {
        let mc = estimate_rate(&config(l, 2, 10.0), Strategy::Optimal, 100_000, 21)
            .unwrap()
            .mean;
        let dp = (rate_optimal_dp(2, l, 10.0).unwrap().rate - mc).abs();
        let indep = (rate_optimal_indep(2, l, 10.0).unwrap().rate - mc).abs();
        ok &= dp <= indep;
        notes.push(format!("L={l}: |dp−MC|={dp:.4} |indep−MC|={indep:.4}"));
    }
    let text = notes.join(", ");
    if ok {
        Ok(text)
    } else {
        Err(text)
    }
}

fn table_rows_reproduce() -> Outcome {
    const SNR_DB: f64 = 10.0;
    let rows: [(usize, usize, &[f64]); 2] = [
        (2, 6, &[80.50, 96.24, 99.17, 99.80, 99.97, 100.0]),
        (2, 3, &[85.81, 98.20, 100.0]),
    ];
    let mut notes = Vec::new();
    for (m, l, table) in rows {
        let c = NetworkConfig::from_db(l, m, SNR_DB).unwrap();
        let windows: Vec<usize> = (1..=l).collect();
        let got = effectiveness_row(&c, &windows, 5000, 7).unwrap();
        let shown: Vec<String> = got.iter().map(|v| format!("{v:.2}")).collect();
        if got[l - 1] != 100.0 {
            return Err(format!("M={m} L={l}: w=L gives {}", got[l - 1]));
        }
        if got.windows(2).any(|p| p[1] < p[0]) {
            return Err(format!("M={m} L={l}: not monotone: {}", shown.join(" ")));
        }
        if let Some(k) = (0..l).find(|&k| (got[k] - table[k]).abs() > 1.5) {
            return Err(format!(
                "M={m} L={l}: w={} gives {} (table {})",
                k + 1,
                shown[k],
                table[k]
            ));
        }
        notes.push(format!("M={m},L={l}: {}", shown.join(" ")));
    }
    for m in 1..=7 {
        let c = NetworkConfig::from_db(6, m, SNR_DB).unwrap();
        let w3 = effectiveness_row(&c, &[3], 5000, 7).unwrap()[0];
        if w3 < 97.0 {
            return Err(format!("M={m} L=6: w=3 gives {w3:.2} < 97"));
        }
    }
    notes.push("w=3 ≥ 97 for M ≤ 7 at L=6".into());
    Ok(format!("at {SNR_DB} dB: {}", notes.join("; ")))
}

fn sliding_error_grows_with_hops() -> Outcome {
    let gap = |l: usize| {
        let mc = estimate_rate(&config(l, 2, 10.0), Strategy::Sliding(2), 100_000, 31)
            .unwrap()
            .mean;
        (rate_sliding(2, l, 10.0).unwrap().rate - mc).abs()
    };
    let (short, long) = (gap(3), gap(5));
    let text = format!("|err| L=3: {short:.4}, L=5: {long:.4}");
    if short < long {
        Ok(text)
    } else {
        Err(text)
    }
}

fn multiuser_sum_rate() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for scale in [1.0, 10.0] {
        for strategy in [Strategy::HopByHop, Strategy::AdHoc] {
            let base = match strategy {
                Strategy::HopByHop => rate_hop(10, 6, scale),
                _ => rate_adhoc(10, 6, scale),
            }
            .unwrap();
            let analytic = sum_rate_multiuser(2, base).unwrap().rate;
            let est = estimate_sum_rate_multiuser(&config(6, 10, scale), 2, strategy, 10_000, 41)
                .unwrap();
            ok &= within_se(est.mean, est.stderr, analytic, 4.0);
            notes.push(format!(
                "{}(σ²={scale}) z={:+.2}",
                strategy.name(),
                (est.mean - analytic) / est.stderr
            ));
        }
    }
    let text = notes.join(", ");
    if ok {
        Ok(text)
    } else {
        Err(text)
    }
}

type Factored = Box<dyn Fn(f64) -> f64>;
type Public = Box<dyn Fn(f64) -> dfrelay_core::Result<RateValue>>;

/// Every survival expansion the rate functions build for M ≤ 3, L ≤ 6, with
/// an independent factored form and the public rate function using it.
fn generated_survivals() -> Vec<(String, ExpPoly, Factored, Public)> {
    let mut out: Vec<(String, ExpPoly, Factored, Public)> = Vec::new();
    for m in 1..=3usize {
        for l in 2..=6usize {
            let tag = |name: &str| format!("{name}(M={m},L={l})");
            out.push((
                tag("hop"),
                survival_hop(m, l).unwrap(),
                Box::new(move |u| factored::hop(m, l, u)),
                Box::new(move |s| rate_hop(m, l, s)),
            ));
            out.push((
                tag("adhoc"),
                survival_adhoc(m, l).unwrap(),
                Box::new(move |u| factored::adhoc(m, l, u)),
                Box::new(move |s| rate_adhoc(m, l, s)),
            ));
            out.push((
                tag("dp"),
                survival_dp(m, l).unwrap(),
                Box::new(move |u| factored::dp(m, l, u)),
                Box::new(move |s| rate_optimal_dp(m, l, s)),
            ));
            out.push((
                tag("indep"),
                survival_optimal_indep(m, l).unwrap(),
                Box::new(move |u| factored::indep(m, l, u)),
                Box::new(move |s| rate_optimal_indep(m, l, s)),
            ));
            if l % 2 == 0 {
                out.push((
                    tag("block"),
                    survival_block(m, l).unwrap(),
                    Box::new(move |u| factored::block(m, l, u)),
                    Box::new(move |s| rate_block(m, l, s)),
                ));
            }
            let sliding = survival_sliding(m, l).unwrap();
            let copy = sliding.clone();
            out.push((
                tag("sliding"),
                sliding,
                Box::new(move |u| copy.eval(u)),
                Box::new(move |s| rate_sliding(m, l, s)),
            ));
        }
    }
    out
}

fn numerical_kernel() -> Outcome {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/e1_reference.csv");
    let text = fs::read_to_string(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut worst_e1: f64 = 0.0;
    let mut points = 0;
    for line in text.lines().skip(1) {
        let (y, g) = line.split_once(',').ok_or("malformed reference line")?;
        let (y, g): (f64, f64) = (y.parse().unwrap(), g.parse().unwrap());
        let r = rel(exp_scaled_e1(y).unwrap(), g);
        worst_e1 = worst_e1.max(r);
        if r > 1e-10 {
            return Err(format!("g({y:e}) relative error {r:.2e}"));
        }
        points += 1;
    }
    if points != 10_000 {
        return Err(format!("expected 10000 reference points, read {points}"));
    }
    // Well-conditioned expansions must match quadrature in closed form; the
    // rest must be routed to quadrature by the public rate functions.
    let mut worst: f64 = 0.0;
    let (mut closed, mut routed) = (0, 0);
    for (name, poly, exact, public) in generated_survivals() {
        for scale in [0.1, 1.0, 10.0, 100.0] {
            let quad = quadrature_rate(&*exact, scale).map_err(|e| format!("{name}: {e}"))?;
            let condition =
                closed_form_condition(&poly, scale).map_err(|e| format!("{name}: {e}"))?;
            let (value, what) = if condition.is_some_and(|c| c <= CONDITION_LIMIT) {
                closed += 1;
                (
                    rate_from_survival(&poly, scale).map_err(|e| format!("{name}: {e}"))?,
                    "closed form",
                )
            } else {
                let v = public(scale).map_err(|e| format!("{name}: {e}"))?;
                if v.method != RateMethod::Quadrature {
                    return Err(format!(
                        "{name} σ²={scale}: ill-conditioned expansion used as {}",
                        v.method
                    ));
                }
                routed += 1;
                (v.rate, "routed rate")
            };
            let r = rel(value, quad);
            if r > 1e-8 {
                return Err(format!(
                    "{name} σ²={scale}: {what} {value} vs quadrature {quad}"
                ));
            }
            worst = worst.max(r);
        }
    }
    Ok(format!(
        "E1 worst {worst_e1:.2e} over {points} points; {closed} closed-form and {routed} quadrature-routed survival rates, worst {worst:.2e}"
    ))
}

fn run_cli(args: &[&str]) -> Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_dfrelay"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    Ok(out.stdout)
}

fn thread_count_invariance() -> Outcome {
    let invocations: [&[&str]; 4] = [
        &[
            "simulate", "--relays", "3", "--hops", "5", "--snr-db", "0:20:10", "--trials", "3000",
            "--seed", "42",
        ],
        &[
            "simulate",
            "--strategy",
            "sliding,optimal,brute",
            "--window",
            "3",
            "--hops",
            "4",
            "--users",
            "2",
            "--trials",
            "2000",
            "--seed",
            "5",
            "--format",
            "json",
        ],
        &[
            "effectiveness",
            "--relays",
            "2,3",
            "--hops",
            "6",
            "--trials",
            "2000",
            "--seed",
            "7",
        ],
        &[
            "compare", "--relays", "2", "--hops", "4", "--snr-db", "10", "--trials", "2000",
            "--seed", "9",
        ],
    ];
    for args in invocations {
        let mut outputs = Vec::new();
        for threads in ["1", "4", "8"] {
            let mut full = args.to_vec();
            full.extend(["--threads", threads]);
            outputs.push(run_cli(&full)?);
        }
        if outputs.iter().any(|o| *o != outputs[0]) {
            return Err(format!("`{}` differs across thread counts", args.join(" ")));
        }
        // A repeated run must also be identical.
        let mut again = args.to_vec();
        again.extend(["--threads", "4"]);
        if run_cli(&again)? != outputs[0] {
            return Err(format!(
                "`{}` differs between repeated runs",
                args.join(" ")
            ));
        }
    }
    Ok(format!(
        "{} invocations byte-identical at 1, 4 and 8 threads",
        invocations.len()
    ))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        (
            "optimal selection equals exhaustive search",
            optimal_matches_brute_force,
        ),
        (
            "exact rates agree with Monte Carlo",
            exact_rates_match_simulation,
        ),
        (
            "coefficient sums agree with survival pipeline",
            dual_paths_agree,
        ),
        ("dp approximation beats independent-path", dp_beats_indep),
        ("effectiveness tables reproduce", table_rows_reproduce),
        (
            "sliding approximation error grows with L",
            sliding_error_grows_with_hops,
        ),
        ("multi-user sum rate", multiuser_sum_rate),
        ("numerical kernel", numerical_kernel),
        ("determinism across thread counts", thread_count_invariance),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = check();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {}: PASS  {name} [{secs:.1} s] {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL  {name} [{secs:.1} s] {detail}", k + 1);
            }
        }
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
