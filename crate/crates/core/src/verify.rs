//! Randomized exact-identity suites behind `lpfree verify`.
//!
//! Every suite draws from its own generator seeded from the run seed and the
//! suite's position, so reports are byte-for-byte reproducible.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::besov::{bridge_identity, busemann_function, ep_seminorm_p, CayleyBall};
use crate::error::{Error, Result};
use crate::group::{BoundaryPoint, GromovProduct, Rank, Word};
use crate::measure::{
    ball_measure, busemann_cocycle, cocycle_lp_norm_p, cocycle_lp_norm_p_naive, endpoint_weight, integrate_nu,
    mu_cylinder, norm_brackets, nu_levelset, nu_of_rectangle, poisson_kernel, poisson_kernel_on_cylinder,
    power_series_sum, radon_nikodym_check, s_sum, tail_distribution, PairFunction,
};
use crate::mobius::{
    alpha_bound_check, check_chain_rule, check_mean_value, cocycle_bound_check, derivative_table, is_mobius,
    lipschitz_bound_check, MobiusOptions,
};
use crate::sample::{action_map, boundary_space, extend_by_images, random_boundary_points, tree_derivative};
use crate::scalar::ExactScalar;

#[derive(Clone, Debug)]
pub struct VerifyConfig {
    pub rank: Rank,
    pub p: u32,
    /// Maximum depth of random locally constant functions and preperiod
    /// length of sample points.
    pub depth: usize,
    /// Maximum length of random group elements.
    pub length_max: usize,
    /// Random instances per suite.
    pub count: usize,
    pub seed: u64,
    /// Scale one derivative value by 2 before the mean-value check.
    pub perturb: bool,
}

impl VerifyConfig {
    pub fn new(rank: Rank) -> Self {
        VerifyConfig {
            rank,
            p: 2,
            depth: 3,
            length_max: 6,
            count: 40,
            seed: 1,
            perturb: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub checks: usize,
    pub witness: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifyReport {
    pub rank: usize,
    pub q: u64,
    pub p: u32,
    pub seed: u64,
    pub suites: Vec<SuiteOutcome>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.suites.iter().all(|s| s.passed)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "verify: rank {} (q = {}), p = {}, seed {}",
            self.rank, self.q, self.p, self.seed
        );
        for s in &self.suites {
            let status = if s.passed { "PASS" } else { "FAIL" };
            let _ = write!(out, "{status} {:<20} {:>6} checks", s.name, s.checks);
            if let Some(w) = &s.witness {
                let _ = write!(out, "  witness: {w}");
            }
            out.push('\n');
        }
        let ok = self.suites.iter().filter(|s| s.passed).count();
        let _ = writeln!(out, "{ok}/{} suites passed", self.suites.len());
        out
    }

    pub fn to_json(&self) -> String {
        let suites: Vec<_> = self
            .suites
            .iter()
            .map(|s| {
                json!({
                    "name": s.name,
                    "passed": s.passed,
                    "checks": s.checks,
                    "witness": s.witness,
                })
            })
            .collect();
        let v = json!({
            "rank": self.rank,
            "q": self.q,
            "p": self.p,
            "seed": self.seed,
            "passed": self.passed(),
            "suites": suites,
        });
        serde_json::to_string_pretty(&v).unwrap() + "\n"
    }
}

struct Suite {
    name: &'static str,
    checks: usize,
    witness: Option<String>,
}

impl Suite {
    fn new(name: &'static str) -> Self {
        Suite {
            name,
            checks: 0,
            witness: None,
        }
    }

    /// Records one check; the first failure is kept as the witness.
    fn check(&mut self, ok: bool, witness: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok && self.witness.is_none() {
            self.witness = Some(witness());
        }
    }

    fn finish(self) -> SuiteOutcome {
        SuiteOutcome {
            name: self.name,
            passed: self.witness.is_none(),
            checks: self.checks,
            witness: self.witness,
        }
    }
}

/// A random function on `Omega x Omega` vanishing on nested cells: dense
/// at depth at most 2, otherwise a few dozen random cells.
pub fn random_pair_function<R: Rng + ?Sized>(rank: Rank, max_depth: usize, rng: &mut R) -> PairFunction {
    let depth = rng.random_range(1..=max_depth.max(1));
    let sphere = rank.sphere(depth);
    let mut cells = BTreeMap::new();
    let value = |rng: &mut R| ExactScalar::ratio(rng.random_range(-9..10), rng.random_range(1..5));
    if depth <= 2 {
        for x in &sphere {
            for y in &sphere {
                if x != y {
                    cells.insert((x.clone(), y.clone()), value(rng));
                }
            }
        }
    } else {
        for _ in 0..32 {
            let x = sphere[rng.random_range(0..sphere.len())].clone();
            let y = sphere[rng.random_range(0..sphere.len())].clone();
            if x != y {
                cells.insert((x, y), value(rng));
            }
        }
    }
    PairFunction::new(rank, cells).expect("same-depth cells are disjoint")
}

fn random_element<R: Rng + ?Sized>(rank: Rank, max_len: usize, rng: &mut R) -> Word {
    rank.random_word(rng.random_range(0..=max_len), rng)
}

fn distinct_pair<R: Rng + ?Sized>(rank: Rank, depth: usize, rng: &mut R) -> (BoundaryPoint, BoundaryPoint) {
    loop {
        let a = rank.random_boundary(depth, 3, rng);
        let b = rank.random_boundary(depth, 3, rng);
        if a != b {
            return (a, b);
        }
    }
}

fn suite_levelsets(cfg: &VerifyConfig, _rng: &mut ChaCha8Rng) -> Suite {
    let r = cfg.rank;
    let mut s = Suite::new("levelsets");
    // brute force: depth-N cylinder pairs with Gromov product n < N tile K_n
    let depth = 3;
    let sphere = r.sphere(depth);
    let mut by_level = vec![ExactScalar::zero(); depth];
    for x in &sphere {
        for y in &sphere {
            let n = x.gromov_product(y);
            if n < depth {
                by_level[n] += nu_of_rectangle(r, x, y);
            }
        }
    }
    for (n, total) in by_level.iter().enumerate() {
        s.check(*total == nu_levelset(r, n), || {
            format!("nu(K_{n}) = {} by enumeration", total)
        });
    }
    let mut partial = ExactScalar::zero();
    for n in 0..=30 {
        let next = &partial + &nu_levelset(r, n);
        s.check(next > partial, || format!("partial sum stalls at n = {n}"));
        partial = next;
        if n >= 1 {
            let tail = tail_distribution(r, n + 1).unwrap();
            s.check(tail == partial, || {
                format!("tail({}) = {tail}, levels sum to {partial}", n + 1)
            });
        }
    }
    s
}

fn suite_nu_invariance(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Suite {
    let r = cfg.rank;
    let mut s = Suite::new("nu-invariance");
    for _ in 0..cfg.count {
        let f = random_pair_function(r, cfg.depth, rng);
        let g = random_element(r, cfg.length_max, rng);
        let before = integrate_nu(&f).unwrap();
        let after = integrate_nu(&f.pullback(&g)).unwrap();
        s.check(before == after, || format!("g = {g}: {before} became {after}"));
    }
    s
}

fn suite_poisson(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Suite {
    let r = cfg.rank;
    let q = r.q();
    let mut s = Suite::new("poisson");
    for _ in 0..cfg.count {
        let g = random_element(r, cfg.length_max, rng);
        let h = random_element(r, cfg.length_max, rng);
        let (xi, om) = distinct_pair(r, cfg.depth, rng);
        let gi = g.inverse();
        // key relation
        let before = xi.gromov_product(&om).finite().unwrap() as i64;
        let after = xi.act(&g).gromov_product(&om.act(&g)).finite().unwrap() as i64;
        let lhs = ExactScalar::power(q, -2 * after);
        let rhs = &(&poisson_kernel(r, &gi, &xi) * &poisson_kernel(r, &gi, &om)) * &ExactScalar::power(q, -2 * before);
        s.check(lhs == rhs, || {
            format!("key relation fails for g = {g}, xi = {xi}, omega = {om}")
        });
        // P_{gh}(xi) = P_g(xi) P_h(g^{-1} xi)
        let lhs = poisson_kernel(r, &g.multiply(&h), &xi);
        let rhs = &poisson_kernel(r, &g, &xi) * &poisson_kernel(r, &h, &xi.act(&gi));
        s.check(lhs == rhs, || {
            format!("kernel cocycle fails for g = {g}, h = {h}, xi = {xi}")
        });
        // total mass
        let mass: ExactScalar = r
            .sphere(g.len())
            .iter()
            .map(|c| &poisson_kernel_on_cylinder(r, &g, c).unwrap() * &mu_cylinder(r, c))
            .sum();
        s.check(mass == ExactScalar::one(), || format!("integral of P_{g} is {mass}"));
    }
    s
}

fn suite_cocycle_identity(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Suite {
    let r = cfg.rank;
    let mut s = Suite::new("cocycle-identity");
    for _ in 0..cfg.count {
        let g = random_element(r, cfg.length_max, rng);
        let h = random_element(r, cfg.length_max, rng);
        let (xi, om) = distinct_pair(r, cfg.depth, rng);
        let gi = g.inverse();
        let lhs = busemann_cocycle(&g.multiply(&h), &xi, &om);
        let rhs = busemann_cocycle(&h, &xi.act(&gi), &om.act(&gi)) + busemann_cocycle(&g, &xi, &om);
        s.check(lhs == rhs, || format!("g = {g}, h = {h}, xi = {xi}, omega = {om}"));
        // (g, xi) + (g^{-1}, g^{-1} xi) = |g|
        let sum = xi.gromov_product_word(&g) + xi.act(&gi).gromov_product_word(&gi);
        s.check(sum == g.len(), || {
            format!("(g, xi) + (g^-1, g^-1 xi) = {sum} for g = {g}, xi = {xi}")
        });
    }
    s
}

fn suite_radon_nikodym(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Suite {
    let r = cfg.rank;
    let mut s = Suite::new("radon-nikodym");
    let len = cfg.length_max.min(6);
    for _ in 0..cfg.count {
        let g = random_element(r, len, rng);
        let x = random_element(r, len, rng);
        let (lhs, rhs) = radon_nikodym_check(r, &g, &x);
        s.check(lhs == rhs, || format!("g = {g}, x = {x}: {lhs} != {rhs}"));
    }
    s
}

fn suite_norm_brackets(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Suite {
    let r = cfg.rank;
    let q = r.q();
    let p = cfg.p;
    let mut s = Suite::new("norm-brackets");
    let two = ExactScalar::integer(2);
    let t = power_series_sum(p, q);
    let mut prev = s_sum(0, p, q);
    for len in 1..=cfg.count.max(1) * 5 {
        let g = r.random_word(len, rng);
        let v = cocycle_lp_norm_p(r, &g, p).unwrap();
        let b = norm_brackets(r, len, p);
        s.check(b.lower <= v && v <= b.upper, || {
            format!("|g| = {len}: {v} outside brackets")
        });
        if len <= 20 {
            let naive = cocycle_lp_norm_p_naive(r, &g, p).unwrap();
            s.check(naive == v, || format!("g = {g}: double sum {naive} != {v}"));
        }
        let cur = b.s;
        let lo = &prev + &(&two * &ExactScalar::power(q, -1));
        let hi = &prev + &(&two * &t);
        s.check(lo <= cur && cur < hi, || format!("S_{len} violates the step bounds"));
        prev = cur;
    }
    s
}

fn suite_mobius(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Vec<Suite> {
    let r = cfg.rank;
    let mut mob = Suite::new("mobius");
    let mut der = Suite::new("tree-derivative");
    let mut mean = Suite::new("mean-value");
    let mut chain = Suite::new("chain-rule");
    let mut lip = Suite::new("lipschitz");
    let mut coc = Suite::new("cocycle-bound");
    let mut alpha = Suite::new("alpha-bound");
    let base = random_boundary_points(r, 24, cfg.depth, 2, rng);
    let opts = MobiusOptions {
        seed: cfg.seed,
        ..MobiusOptions::default()
    };
    let rounds = (cfg.count / 4).max(1);
    for round in 0..rounds {
        let g = r.random_word(rng.random_range(1..=cfg.length_max.max(1)), rng);
        let h = r.random_word(rng.random_range(1..=cfg.length_max.max(1)), rng);
        let gh = g.multiply(&h);
        let pts = extend_by_images(&base, &[h.clone(), gh.clone(), g.clone()]);
        let space = boundary_space(r, &pts).unwrap();
        let mg = action_map(&pts, &g);
        let mh = action_map(&pts, &h);
        let rep = is_mobius(&space, &mg, &opts).unwrap();
        mob.check(rep.holds, || {
            format!("g = {g}, quadruple {:?}, deviation {}", rep.witness, rep.max_deviation)
        });
        let mut table = derivative_table(&space, &mg).unwrap();
        for x in mg.domain() {
            let expected = tree_derivative(r, &g, &pts[x]);
            let got = table[x].clone().unwrap();
            der.check(got == expected, || {
                format!("g = {g}, xi = {}: {got} != {expected}", pts[x])
            });
        }
        if cfg.perturb && round == 0 {
            let x = mg.domain()[0];
            table[x] = table[x].take().map(|v| v * BigRational::from_integer(2.into()));
        }
        let res = check_mean_value(&space, &mg, &table).unwrap();
        mean.check(num_traits::Zero::is_zero(&res.max), || {
            let w = res.witness.clone().unwrap_or_default();
            format!(
                "g = {g}, points {} and {}: residual {}",
                pts[w[0]],
                pts[w[1]],
                crate::mobius::MetricScalar::to_json(&res.max)
            )
        });
        let res = check_chain_rule(&space, &mg, &mh).unwrap();
        chain.check(num_traits::Zero::is_zero(&res.max), || {
            format!("g = {g}, h = {h}: witness {:?}", res.witness)
        });
        let rep = lipschitz_bound_check(&space, &mg, &table).unwrap();
        lip.check(rep.holds, || format!("g = {g}, pair {:?}", rep.worst_pair));
        let rep = cocycle_bound_check(&space, &mg, &table).unwrap();
        coc.check(rep.holds, || format!("g = {g}, pair {:?}", rep.worst_pair));
        let rep = alpha_bound_check(&space, &mg).unwrap();
        alpha.check(!rep.applicable || rep.holds, || {
            format!("g = {g}, point {:?}", rep.witness)
        });
    }
    vec![mob, der, mean, chain, lip, coc, alpha]
}

fn suite_besov(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Suite {
    let r = cfg.rank;
    let mut s = Suite::new("besov-bridge");
    for _ in 0..cfg.count {
        let g = random_element(r, cfg.length_max * 4, rng);
        let (besov, norm) = bridge_identity(r, &g, cfg.p).unwrap();
        s.check(besov == norm, || format!("g = {g}: besov {besov} != norm {norm}"));
        let ep = ep_seminorm_p(&busemann_function(&g, r), &CayleyBall::new(r, g.len() + 1), cfg.p);
        s.check(ep == ExactScalar::integer(g.len() as i64), || {
            format!("g = {g}: E_p seminorm {ep}")
        });
    }
    s
}

fn suite_ahlfors(cfg: &VerifyConfig, rng: &mut ChaCha8Rng) -> Suite {
    let r = cfg.rank;
    let mut s = Suite::new("ahlfors");
    let constant = ExactScalar::Finite(endpoint_weight(r));
    for _ in 0..cfg.count.min(20) {
        let om = r.random_boundary(cfg.depth, 3, rng);
        for n in 1..=30 {
            let v = &ball_measure(r, &om, n).unwrap() * &ExactScalar::power(r.q(), n as i64);
            s.check(v == constant, || format!("omega = {om}, n = {n}: {v}"));
        }
    }
    // distance to a fixed point is a power of q
    let (a, b) = distinct_pair(r, cfg.depth, rng);
    s.check(matches!(a.gromov_product(&b), GromovProduct::Finite(_)), || {
        format!("{a} and {b}")
    });
    s
}

/// Runs all suites.
pub fn run(cfg: &VerifyConfig) -> Result<VerifyReport> {
    if cfg.p == 0 {
        return Err(Error::OutOfRange("p must be >= 1".into()));
    }
    let rng = |k: u64| ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_mul(0x9E37_79B9).wrapping_add(k));
    let mut suites = vec![
        suite_levelsets(cfg, &mut rng(0)),
        suite_nu_invariance(cfg, &mut rng(1)),
        suite_poisson(cfg, &mut rng(2)),
        suite_cocycle_identity(cfg, &mut rng(3)),
        suite_radon_nikodym(cfg, &mut rng(4)),
        suite_norm_brackets(cfg, &mut rng(5)),
    ];
    suites.extend(suite_mobius(cfg, &mut rng(6)));
    suites.push(suite_besov(cfg, &mut rng(7)));
    suites.push(suite_ahlfors(cfg, &mut rng(8)));
    Ok(VerifyReport {
        rank: cfg.rank.n(),
        q: cfg.rank.q(),
        p: cfg.p,
        seed: cfg.seed,
        suites: suites.into_iter().map(Suite::finish).collect(),
    })
}
