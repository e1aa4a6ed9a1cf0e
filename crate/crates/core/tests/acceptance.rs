use std::process::ExitCode;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use umet_core::adversary::{dyadic_floor, perturbation_trial};
use umet_core::lemmas::{dynamics_suite, lemma_suite, SuiteConfig};
use umet_core::rational::q;
use umet_core::{
    family_entropy_profile, openness_margin, run_adversary, strong_mixing_deviation, uniform_l1_deviation,
    weak_mixing_deviation, zero_entropy_certificate, ConjugatedOdometer, MemberId, PiecewiseMap, Rational, SetFamily,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn zero_entropy_convergence() -> Outcome {
    let t = PiecewiseMap::odometer(10);
    let f = SetFamily::dyadic_intervals(8);
    let mut sups = Vec::new();
    for n in [16, 64, 256, 1024] {
        let report = uniform_l1_deviation(&t, &f, n).map_err(|e| e.to_string())?;
        sups.push(report.sup);
    }
    ensure(sups.windows(2).all(|w| w[1] <= w[0]), || format!("not monotone: {sups:?}"))?;
    ensure(sups[3].is_zero(), || format!("sup at n=1024 is {}", sups[3]))?;
    Ok(format!("{} members, sups {}", f.horizon(), sups.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(", ")))
}

fn positive_entropy_detection() -> Outcome {
    let f = SetFamily::digit_sets(16);
    let profile = family_entropy_profile(&f, 12).map_err(|e| e.to_string())?;
    for p in &profile {
        let v = p.lower_bound;
        ensure(v.error_bound <= 1e-9 && (v.value - 1.0).abs() <= v.error_bound, || {
            format!("n={}: {} ± {}", p.n, v.value, v.error_bound)
        })?;
    }
    ensure(zero_entropy_certificate(&f, 0.5, 10).is_none(), || "certificate found at delta 1/2".into())?;
    Ok(format!("lower bound 1 bit at n = 1..={}, no certificate up to level 10", profile.len()))
}

fn adversary_and_margin() -> (Outcome, Outcome) {
    let run = match run_adversary(&PiecewiseMap::identity(), &SetFamily::digit_sets(16), &q(1, 4), 1, None) {
        Ok(run) => run,
        Err(e) => return (Err(e.to_string()), Err("no certificate".into())),
    };
    let claims = (|| {
        ensure(run.claim1.holds, || format!("claim 1 fails at {:?}", run.claim1.witness))?;
        ensure(run.conjugacy.holds, || format!("conjugacy identity fails at {:?}", run.conjugacy.witness))?;
        let d = &run.claim2.distance;
        ensure(run.claim2.all_hold() && d.upper() < q(1, 4), || format!("weak distance {} + {}", d.value, d.tail_bound))?;
        let t = &run.trace;
        ensure(t.bad_average > t.delta && t.delta == &t.delta1 * &t.delta1 * &t.delta1 / q(64, 1), || {
            format!("bad average {} vs {}", t.bad_average, t.delta)
        })?;
        ensure(t.accepted && t.all_required_hold(), || {
            format!("failed: {:?}", t.failed().map(|c| c.to_string()).collect::<Vec<_>>())
        })?;
        Ok(format!(
            "R={} n={} distance {} bad average {} > delta {:.3e} ({} checks)",
            run.plan.resolution,
            run.plan.n,
            d.upper(),
            t.bad_average,
            t.delta.to_f64(),
            t.checks.len()
        ))
    })();
    let margin = (|| {
        let plan = &run.plan;
        let h = plan.height();
        let t = ConjugatedOdometer::new(plan.resolution, run.new_phi.clone()).map_err(|e| e.to_string())?;
        let c = &run.bad_set.set;
        let m = openness_margin(&t, c, h, &plan.delta).map_err(|e| e.to_string())?;
        ensure(m.epsilon.is_positive(), || format!("margin {}", m.epsilon))?;
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for i in 0..5 {
            let trial = perturbation_trial(&mut rng, &run.new_phi, plan.resolution, c, h, &plan.delta, &m.epsilon)
                .map_err(|e| e.to_string())?;
            ensure(trial.holds(), || format!("trial {i}: {trial:?}"))?;
        }
        Ok(format!(
            "margin above 2^-{}, 5 perturbations keep deviation above {:.3e}",
            dyadic_floor(&m.epsilon).dyadic_exponent().unwrap_or_default(),
            plan.delta.to_f64()
        ))
    })();
    (claims, margin)
}

fn uniform_mixing() -> Outcome {
    let doubling = PiecewiseMap::doubling();
    let dyadic = SetFamily::dyadic_intervals(4);
    for n in 4..=12 {
        let sup = strong_mixing_deviation(&doubling, &dyadic, n).sup;
        ensure(sup.is_zero(), || format!("dyadic_intervals(4) at n={n}: sup {sup}"))?;
    }
    let digits = SetFamily::digit_sets(16);
    for n in [4, 8] {
        let report = strong_mixing_deviation(&doubling, &digits, n);
        ensure(report.sup == q(1, 4), || format!("digit sets at n={n}: sup {}", report.sup))?;
        ensure(matches!(report.argmax, MemberId::Pair(a, _) if a >= n), || format!("argmax {}", report.argmax))?;
    }
    let weak = weak_mixing_deviation(&doubling, &SetFamily::dyadic_intervals(2), 16).map_err(|e| e.to_string())?;
    let bound: Rational = q(2, 16) * q(1, 4) * q(2, 1);
    ensure(weak.sup <= bound, || format!("weak sup {} > {}", weak.sup, bound))?;
    Ok(format!("strong sup 0 for n in 4..=12, digit sets stay at 1/4, weak sup {} <= {}", weak.sup, bound))
}

fn lemma_properties() -> Outcome {
    let report = lemma_suite(&SuiteConfig::default()).map_err(|e| e.to_string())?;
    let counts = [
        ("mixed_mass_exceeds_delta", 200),
        ("union_approximation_within_epsilon", 200),
        ("conditional_subadditivity", 200),
        ("chain_rule", 100),
    ];
    for (name, expected) in counts {
        ensure(report.count(name) == expected, || format!("{name}: {} instances", report.count(name)))?;
    }
    let failed: Vec<_> = report.checks.iter().filter(|c| !c.holds).collect();
    ensure(failed.is_empty(), || format!("{} failures, first {:?}", failed.len(), failed.first()))?;
    Ok(format!("{} checks hold ({} draws rejected)", report.checks.len(), report.rejected))
}

fn dynamics_exactness() -> Outcome {
    let checks = dynamics_suite(7, 100, 16).map_err(|e| e.to_string())?;
    let failed: Vec<_> = checks.iter().filter(|c| !c.holds).collect();
    ensure(failed.is_empty(), || format!("{} failures, first {:?}", failed.len(), failed.first()))?;
    Ok(format!("{} exact identities on 100 random interval exchanges", checks.len()))
}

fn main() -> ExitCode {
    let mut ok = true;
    let mut report = |id: u32, title: &str, started: Instant, outcome: Outcome| {
        let secs = started.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {id} {title} ({secs:.1}s): {detail}"),
            Err(detail) => {
                ok = false;
                println!("FAIL {id} {title} ({secs:.1}s): {detail}");
            }
        }
    };
    let s = Instant::now();
    report(1, "zero-entropy uniform convergence", s, zero_entropy_convergence());
    let s = Instant::now();
    report(2, "positive-entropy detection", s, positive_entropy_detection());
    let s = Instant::now();
    let (claims, margin) = adversary_and_margin();
    report(3, "adversary certificate", s, claims);
    report(4, "openness margin", s, margin);
    let s = Instant::now();
    report(5, "uniform mixing on zero-entropy families", s, uniform_mixing());
    let s = Instant::now();
    report(6, "entropy lemma suite", s, lemma_properties());
    let s = Instant::now();
    report(7, "dynamics exactness", s, dynamics_exactness());
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
