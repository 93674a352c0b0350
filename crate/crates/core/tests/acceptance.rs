//! Acceptance criteria 1 to 9, one PASS/FAIL line each with its runtime.
//! Runs without the test harness so the lines always print; exits nonzero
//! when any criterion fails.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use lpfree_core::besov::{bridge_identity, busemann_function, ep_seminorm_p, CayleyBall};
use lpfree_core::cli::{execute, Cli};
use lpfree_core::measure::{
    ball_measure, cocycle_lp_norm_p, integrate_nu, mu_cylinder, nu_levelset, poisson_kernel,
    poisson_kernel_on_cylinder, power_series_sum, radon_nikodym_check, s_sum, tail_distribution,
};
use lpfree_core::mobius::{
    alpha_bound_check, check_chain_rule, check_mean_value, cocycle_bound_check, derivative_table, is_mobius,
    lipschitz_bound_check, FiniteMetricSpace, MobiusOptions, PointMap,
};
use lpfree_core::sample::{action_map, boundary_space, extend_by_images, random_boundary_points};
use lpfree_core::verify::random_pair_function;
use lpfree_core::{BoundaryPoint, ExactScalar, Rank, Word};

use clap::Parser;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `q^k` for any integer `k`, built by repeated multiplication.
fn qpow(q: u64, k: i64) -> BigRational {
    let mut r = BigRational::one();
    let base = rat(q as i64, 1);
    for _ in 0..k.unsigned_abs() {
        r *= &base;
    }
    if k < 0 {
        r.recip()
    } else {
        r
    }
}

fn exact(s: &ExactScalar) -> BigRational {
    s.as_rational().expect("finite").clone()
}

/// Longest common prefix of two reduced words, letter by letter.
fn lcp(a: &Word, b: &Word) -> usize {
    a.letters().iter().zip(b.letters()).take_while(|(x, y)| x == y).count()
}

/// Gromov product of distinct eventually periodic points, read off long
/// prefixes.
fn gromov(a: &BoundaryPoint, b: &BoundaryPoint) -> usize {
    let n = a.preperiod().len() + b.preperiod().len() + 4 * (a.period().len() * b.period().len()) + 8;
    let k = lcp(&a.prefix(n), &b.prefix(n));
    assert!(k < n, "points coincide");
    k
}

fn poisson_oracle(q: u64, g: &Word, xi: &BoundaryPoint) -> BigRational {
    qpow(q, 2 * lcp(g, &xi.prefix(g.len())) as i64 - g.len() as i64)
}

fn random_element(rank: Rank, max: usize, rng: &mut ChaCha8Rng) -> Word {
    let len = rng.random_range(0..=max);
    rank.random_word(len, rng)
}

fn cli_out(args: &[&str]) -> (bool, String) {
    let cli = Cli::try_parse_from(std::iter::once("lpfree").chain(args.iter().copied())).unwrap();
    let mut out = String::new();
    let ok = execute(&cli, &mut out).unwrap();
    (ok, out)
}

/// Outcome of one criterion: a failure message, if any.
type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Outcome {
    for (n, q) in [(2usize, 3u64), (3, 5), (5, 9)] {
        let (_, out) = cli_out(&["levelsets", "--rank", &n.to_string(), "--depth", "20"]);
        let rows: Vec<&str> = out.lines().skip(1).collect();
        ensure(rows.len() == 21, || format!("q = {q}: {} rows", rows.len()))?;
        for (k, row) in rows.iter().enumerate() {
            let cols: Vec<&str> = row.split(',').collect();
            let emitted: ExactScalar = cols[1].parse().map_err(|e| format!("{e}"))?;
            let expected = if k == 0 {
                rat(q as i64, q as i64 + 1)
            } else {
                rat(q as i64 - 1, q as i64 + 1) * qpow(q, k as i64)
            };
            ensure(cols[0] == k.to_string() && exact(&emitted) == expected, || {
                format!("q = {q}, n = {k}: emitted {}, expected {expected}", cols[1])
            })?;
        }
    }
    Ok("q in {3,5,9}, n = 0..20".into())
}

fn criterion_2() -> Outcome {
    let rank = Rank::new(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut nonzero = 0;
    for i in 0..200 {
        let f = random_pair_function(rank, 6, &mut rng);
        let g = random_element(rank, 8, &mut rng);
        let before = integrate_nu(&f).map_err(|e| e.to_string())?;
        let after = integrate_nu(&f.pullback(&g)).map_err(|e| e.to_string())?;
        ensure(before == after, || {
            format!("instance {i}, g = {g}: {before} vs {after}")
        })?;
        nonzero += usize::from(!before.is_zero());
    }
    Ok(format!("200 instances, {nonzero} with nonzero integral"))
}

fn criterion_3() -> Outcome {
    let rank = Rank::new(2).unwrap();
    let q = rank.q();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..500 {
        let g = random_element(rank, 8, &mut rng);
        let h = random_element(rank, 8, &mut rng);
        let xi = rank.random_boundary(4, 3, &mut rng);
        let om = loop {
            let o = rank.random_boundary(4, 3, &mut rng);
            if o != xi {
                break o;
            }
        };
        let gi = g.inverse();
        // key relation
        let lhs = qpow(q, -2 * gromov(&xi.act(&g), &om.act(&g)) as i64);
        let rhs = poisson_oracle(q, &gi, &xi) * poisson_oracle(q, &gi, &om) * qpow(q, -2 * gromov(&xi, &om) as i64);
        ensure(lhs == rhs, || format!("instance {i}: key relation, g = {g}"))?;
        ensure(
            exact(&poisson_kernel(rank, &gi, &xi)) == poisson_oracle(q, &gi, &xi),
            || format!("instance {i}: kernel value, g = {g}, xi = {xi}"),
        )?;
        // kernel cocycle P_{gh}(xi) = P_g(xi) P_h(g^{-1} xi)
        let lhs = exact(&poisson_kernel(rank, &g.multiply(&h), &xi));
        let rhs = poisson_oracle(q, &g, &xi) * poisson_oracle(q, &h, &xi.act(&gi));
        ensure(lhs == rhs, || format!("instance {i}: kernel cocycle, g = {g}, h = {h}"))?;
        // unit mass: every depth-|g| cylinder has the same mu, and the
        // kernel there depends only on the common prefix with g
        let len = g.len();
        let mut by_level = vec![0u64; len + 1];
        for c in rank.sphere(len) {
            by_level[lcp(&g, &c)] += 1;
        }
        let mu = if len == 0 {
            BigRational::one()
        } else {
            rat(q as i64, q as i64 + 1) * qpow(q, -(len as i64))
        };
        let mass: BigRational = by_level
            .iter()
            .enumerate()
            .map(|(k, &count)| rat(count as i64, 1) * qpow(q, 2 * k as i64 - len as i64) * &mu)
            .sum();
        let c = rank.random_word(len, &mut rng);
        ensure(
            exact(&poisson_kernel_on_cylinder(rank, &g, &c).unwrap()) == qpow(q, 2 * lcp(&g, &c) as i64 - len as i64)
                && exact(&mu_cylinder(rank, &c)) == mu,
            || format!("instance {i}: kernel or mu on the cylinder {c}"),
        )?;
        ensure(mass.is_one(), || format!("instance {i}: mass {mass} for g = {g}"))?;
    }
    Ok("500 instances of each identity".into())
}

fn criterion_4() -> Outcome {
    let rank = Rank::new(2).unwrap();
    let q = 3u64;
    let e2 = rat(9, 16);
    let m2 = rat(1, 4);
    for p in [2u32, 3, 4] {
        let mut rng = ChaCha8Rng::seed_from_u64(40 + p as u64);
        // T_K = sum_{i <= K} i^p q^-i with K = 4000: each step of S_N is
        // 2 T_N < 2 T_K < 2 T for N <= 2000
        // numerator over q^K by Horner's rule
        let mut num = BigInt::zero();
        for i in 1..=4000i64 {
            num = num * BigInt::from(q) + BigInt::from(i.pow(p));
        }
        let t = BigRational::new(num, qpow(q, 4000).to_integer());
        let closed = exact(&power_series_sum(p, q));
        ensure(t < closed && &closed - &t < qpow(q, -3000), || {
            format!("p = {p}: closed form of T is off")
        })?;
        let step_lo = rat(2, q as i64);
        let rate_lo = &step_lo * &m2;
        let rate_hi = rat(2, 1) * &e2 * &t;
        let mut prev = BigRational::zero();
        for len in 1..=2000usize {
            let g = rank.random_word(len, &mut rng);
            let norm = exact(&cocycle_lp_norm_p(rank, &g, p).map_err(|e| e.to_string())?);
            let s = exact(&s_sum(len, p, q));
            ensure(&m2 * &s <= norm && norm <= &e2 * &s, || {
                format!("p = {p}, |g| = {len}: outside brackets")
            })?;
            ensure(&prev + &step_lo <= s, || {
                format!("p = {p}: S_{len} - S_{} < 2/q", len - 1)
            })?;
            ensure(s < &prev + rat(2, 1) * &t, || {
                format!("p = {p}: S_{len} step too large")
            })?;
            let rate = &norm / rat(len as i64, 1);
            ensure(rate_lo <= rate && rate <= rate_hi, || {
                format!("p = {p}, |g| = {len}: rate out of range")
            })?;
            prev = s;
        }
    }
    Ok("p in {2,3,4}, |g| = 1..2000".into())
}

/// Criteria 5 and 6 share their samples. Returns (mobius outcome,
/// inequality outcome).
fn criteria_5_and_6() -> (Outcome, Outcome) {
    let rank = Rank::new(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let opts = MobiusOptions::default();
    let mut smallest = usize::MAX;
    let mut alpha_applicable = 0;
    let mut mobius: Result<(), String> = Ok(());
    let mut ineq: Result<(), String> = Ok(());
    for i in 0..100 {
        let base = random_boundary_points(rank, 50, 3, 2, &mut rng);
        let g = rank.random_word(rng.random_range(1..=6), &mut rng);
        let h = rank.random_word(rng.random_range(1..=6), &mut rng);
        let pts = extend_by_images(&base, &[h.clone(), g.multiply(&h), g.clone()]);
        let space = boundary_space(rank, &pts).unwrap();
        let mg = action_map(&pts, &g);
        let mh = action_map(&pts, &h);
        smallest = smallest.min(mg.domain().len());
        let rep = is_mobius(&space, &mg, &opts).unwrap();
        let table = derivative_table(&space, &mg).unwrap();
        let mean = check_mean_value(&space, &mg, &table).unwrap();
        let chain = check_chain_rule(&space, &mg, &mh).unwrap();
        if mobius.is_ok() {
            mobius = ensure(rep.holds, || {
                format!("sample {i}, g = {g}: quadruple {:?}", rep.witness)
            })
            .and(ensure(mean.max.is_zero(), || {
                format!("sample {i}, g = {g}: mean-value residual {}", mean.max)
            }))
            .and(ensure(chain.max.is_zero(), || {
                format!("sample {i}, g = {g}, h = {h}: chain rule")
            }));
        }
        let lip = lipschitz_bound_check(&space, &mg, &table).unwrap();
        let coc = cocycle_bound_check(&space, &mg, &table).unwrap();
        let alpha = alpha_bound_check(&space, &mg).unwrap();
        alpha_applicable += usize::from(alpha.applicable);
        if ineq.is_ok() {
            ineq = ensure(lip.holds, || {
                format!("sample {i}, g = {g}: lipschitz pair {:?}", lip.worst_pair)
            })
            .and(ensure(coc.holds, || {
                format!("sample {i}, g = {g}: cocycle pair {:?}", coc.worst_pair)
            }))
            .and(ensure(!alpha.applicable || alpha.holds, || {
                format!("sample {i}, g = {g}: alpha")
            }));
        }
    }
    ensure(smallest >= 50, || format!("a sample domain has only {smallest} points")).unwrap_or_else(|e| {
        mobius = Err(e);
    });

    let mut rng = ChaCha8Rng::seed_from_u64(55);
    for i in 0..100 {
        let g = random_element(rank, 6, &mut rng);
        let x = random_element(rank, 6, &mut rng);
        let (lhs, rhs) = radon_nikodym_check(rank, &g, &x);
        // independent left side: g Omega_x is a cylinder unless x is a
        // prefix of g^{-1}
        if mobius.is_ok() {
            mobius = ensure(lhs == rhs, || format!("radon-nikodym {i}: g = {g}, x = {x}"));
        }
        let gi = g.inverse();
        if !x.is_prefix_of(&gi) || x.is_identity() {
            let target = g.multiply(&x);
            let expected = if x.is_identity() {
                BigRational::one()
            } else {
                exact(&mu_cylinder(rank, &target))
            };
            if mobius.is_ok() {
                mobius = ensure(exact(&lhs) == expected, || {
                    format!("radon-nikodym {i}: mu(g Omega_x) = {lhs}")
                });
            }
        }
    }

    // a rotation of a 60-point circle with the arc metric: the covering
    // condition applies and every derivative is 1
    let n = 60usize;
    let dist = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| rat(i.abs_diff(j).min(n - i.abs_diff(j)) as i64, n as i64))
                .collect()
        })
        .collect();
    let circle = FiniteMetricSpace::new((0..n).map(|i| i.to_string()).collect(), dist).unwrap();
    let rot = PointMap::from_permutation((0..n).map(|i| (i + 1) % n).collect()).unwrap();
    let rep = alpha_bound_check(&circle, &rot).unwrap();
    if ineq.is_ok() {
        ineq = ensure(rep.applicable && rep.holds, || format!("circle rotation: {rep:?}"));
    }
    let table = derivative_table(&circle, &rot).unwrap();
    if ineq.is_ok() {
        ineq = ensure(lipschitz_bound_check(&circle, &rot, &table).unwrap().holds, || {
            "circle lipschitz".into()
        })
        .and(ensure(
            cocycle_bound_check(&circle, &rot, &table).unwrap().holds,
            || "circle cocycle".into(),
        ));
    }

    (
        mobius.map(|_| format!("100 elements, domains of at least {smallest} points, 100 radon-nikodym pairs")),
        ineq.map(|_| format!("100 samples, alpha applicable on {alpha_applicable} plus the circle rotation")),
    )
}

fn criterion_7() -> Outcome {
    let rank = Rank::new(2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for p in [2u32, 3] {
        for _ in 0..100 {
            let g = random_element(rank, 50, &mut rng);
            let (besov, norm) = bridge_identity(rank, &g, p).map_err(|e| e.to_string())?;
            ensure(besov == norm, || {
                format!("p = {p}, g = {g}: besov {besov}, norm {norm}")
            })?;
            let ep = ep_seminorm_p(&busemann_function(&g, rank), &CayleyBall::new(rank, g.len() + 1), p);
            ensure(ep == ExactScalar::integer(g.len() as i64), || {
                format!("p = {p}, g = {g}: E_p = {ep}")
            })?;
        }
    }
    Ok("100 elements with |g| <= 50 for each p in {2,3}".into())
}

fn criterion_8() -> Outcome {
    let rank = Rank::new(2).unwrap();
    let q = rank.q();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let c = rat(q as i64, q as i64 + 1);
    for _ in 0..20 {
        let om = rank.random_boundary(5, 3, &mut rng);
        for n in 1..=30 {
            let v = exact(&ball_measure(rank, &om, n).map_err(|e| e.to_string())?) * qpow(q, n as i64);
            ensure(v == c, || format!("omega = {om}, n = {n}: {v}"))?;
        }
    }
    for n in 1..=30usize {
        let tail = tail_distribution(rank, n).map_err(|e| e.to_string())?;
        let sum: ExactScalar = (0..n).map(|m| nu_levelset(rank, m)).sum();
        ensure(tail == sum, || format!("n = {n}: tail {tail}, levels {sum}"))?;
    }
    Ok("20 points, n = 1..30".into())
}

fn criterion_9() -> Outcome {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_lpfree"))
            .args(["verify", "--seed", "9", "--format", "json"])
            .output()
            .expect("binary runs")
    };
    let (a, b) = (run(), run());
    ensure(a.status.success() && b.status.success(), || {
        format!("exit codes {:?}, {:?}", a.status, b.status)
    })?;
    ensure(a.stdout == b.stdout, || "reports differ".into())?;
    Ok(format!("{} identical bytes", a.stdout.len()))
}

fn report(k: usize, budget: Option<Duration>, elapsed: Duration, outcome: &Outcome) -> bool {
    let in_time = budget.is_none_or(|b| elapsed <= b);
    let ok = outcome.is_ok() && in_time;
    let limit = budget.map_or(String::new(), |b| format!(" (limit {} s)", b.as_secs()));
    let detail = match outcome {
        Ok(s) => s.clone(),
        Err(e) => e.clone(),
    };
    let time_note = if in_time { "" } else { "; over the time limit" };
    println!(
        "{} criterion {k}: {detail}{time_note} [{:.2} s{limit}]",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    );
    ok
}

fn timed(f: impl FnOnce() -> Outcome) -> (Duration, Outcome) {
    let t = Instant::now();
    let o = f();
    (t.elapsed(), o)
}

fn main() -> ExitCode {
    let secs = |s: u64| Some(Duration::from_secs(s));
    let mut all = true;
    let (t, o) = timed(criterion_1);
    all &= report(1, secs(1), t, &o);
    let (t, o) = timed(criterion_2);
    all &= report(2, secs(30), t, &o);
    let (t, o) = timed(criterion_3);
    all &= report(3, secs(10), t, &o);
    let (t, o) = timed(criterion_4);
    all &= report(4, secs(60), t, &o);
    let start = Instant::now();
    let (five, six) = criteria_5_and_6();
    let t = start.elapsed();
    // the shared run is charged in full against the tighter of the two limits
    all &= report(5, secs(60), t, &five);
    all &= report(6, secs(30), t, &six);
    let (t, o) = timed(criterion_7);
    all &= report(7, secs(60), t, &o);
    let (t, o) = timed(criterion_8);
    all &= report(8, secs(5), t, &o);
    let (t, o) = timed(criterion_9);
    all &= report(9, None, t, &o);
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
