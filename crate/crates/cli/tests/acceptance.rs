//! Acceptance gate: one test per acceptance criterion, each ending in a
//! single `ACCEPTANCE <id>: PASS/FAIL` line (visible with
//! `cargo test --test acceptance -- --nocapture`).
//!
//! Two criteria are implemented exactly as stated and fail honestly:
//!
//! * 4a expects the power-sum norm at exponent 4 on S^2 to converge, but
//!   4 is precisely the summability threshold `2 + 2/(n-2)` there, the
//!   summand envelope is harmonic (`m_k |phi_k|^4 ~ 2/k`), and the
//!   implementation correctly refuses with a divergence error. The
//!   partial sums, printed in the failure line, grow by ~0.93 per decade
//!   of truncation — the unmistakable signature of a log-divergent sum.
//! * 5 asks for a Holder fit of the operator-difference norm at the same
//!   unattainable exponent and fails for the same reason; the companion
//!   test `criterion_05s` runs the full certificate, including grid
//!   doubling, at the nearest feasible exponents.
//!
//! Everything else passes at the stated tolerances and runtime budgets.

// `!(x >= c)`-style guards reject NaN as well as out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::time::Instant;

use hirank_core::{
    bm_small, cayley_build, dense_eigenpairs, dense_sphere_oracle, eigenvalue_clusters,
    enumerate_group, epsilon_decay, expander_report, halfmass_check, holder_fit,
    john_check_l1_ball, kak2_forward, kak2_solve, mu_operator_norm, multiplicity, phi,
    poincare_check, random_lipschitz_embedding, raw_power_sum, schatten_norm, shrink_to_half,
    sl_order, sphere_basis_dim, telescoped_sum, CayleyGraph, Error, GeneratingSet,
    GeneratorMeasure, HolderConstants, SchattenResult, SpectralOperator, SphereDim, SplitMix64,
    VertexEmbedding, MAX_SQUARINGS,
};

fn pass(id: &str, detail: &str) {
    println!("ACCEPTANCE {id}: PASS — {detail}");
}

fn fail(id: &str, detail: &str) -> ! {
    println!("ACCEPTANCE {id}: FAIL — {detail}");
    panic!("ACCEPTANCE {id}: FAIL — {detail}");
}

fn within_budget(id: &str, started: Instant, budget_seconds: f64) {
    let elapsed = started.elapsed().as_secs_f64();
    if elapsed > budget_seconds {
        fail(
            id,
            &format!("runtime {elapsed:.2}s exceeded the {budget_seconds}s budget"),
        );
    }
}

fn dim(n: u32) -> SphereDim {
    SphereDim::new(n).expect("n >= 3 in all acceptance parameters")
}

fn equispaced(count: usize, lo: f64, hi: f64) -> Vec<f64> {
    let step = (hi - lo) / (count - 1) as f64;
    (0..count).map(|i| lo + step * i as f64).collect()
}

fn elementary_cayley(n: usize, q: u32) -> CayleyGraph {
    let gens = GeneratingSet::elementary(n, q).unwrap();
    let table = enumerate_group(&gens, None).unwrap();
    cayley_build(&table, &gens).unwrap()
}

// ---------------------------------------------------------------------------
// 1. multiplicity vs. harmonic-dimension oracle

/// Exact binomial coefficient, stepwise product so every division is exact.
fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * u128::from(n - i) / u128::from(i + 1);
    }
    r
}

/// Dimension of the degree-k harmonic subspace on S^{n-1}:
/// C(n+k-1, k) - C(n+k-3, k-2).
fn harmonic_dimension(n: u64, k: u64) -> u128 {
    let full = binomial(n + k - 1, k);
    if k >= 2 {
        full - binomial(n + k - 3, k - 2)
    } else {
        full
    }
}

#[test]
fn criterion_01_multiplicity_matches_harmonic_dimension_oracle() {
    let started = Instant::now();
    for n in 3..=6u32 {
        for k in 0..=20u32 {
            let got = multiplicity(dim(n), k).unwrap();
            let expected = harmonic_dimension(u64::from(n), u64::from(k));
            if u128::from(got) != expected {
                fail(
                    "1",
                    &format!("multiplicity({n},{k}) = {got}, oracle says {expected}"),
                );
            }
        }
    }
    within_budget("1", started, 1.0);
    pass(
        "1",
        "84 multiplicities equal the binomial-difference oracle exactly",
    );
}

// ---------------------------------------------------------------------------
// 2. Legendre specialization on S^2

/// Independent three-term Legendre recurrence, P_0..P_kmax at x.
fn legendre_column(k_max: u32, x: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(k_max as usize + 1);
    let (mut prev, mut curr) = (1.0f64, x);
    out.push(prev);
    if k_max >= 1 {
        out.push(curr);
    }
    for k in 1..k_max {
        let kf = f64::from(k);
        let next = ((2.0 * kf + 1.0) * x * curr - kf * prev) / (kf + 1.0);
        prev = curr;
        curr = next;
        out.push(curr);
    }
    out
}

#[test]
fn criterion_02_degree_three_specializes_to_legendre() {
    let started = Instant::now();
    let grid = equispaced(50, -1.0, 1.0);
    let mut worst = 0.0f64;
    for &x in &grid {
        let reference = legendre_column(30, x);
        for k in 0..=30u32 {
            let got = phi(dim(3), k, x).unwrap().value;
            worst = worst.max((got - reference[k as usize]).abs());
        }
    }
    if worst > 1e-10 {
        fail(
            "2",
            &format!("max |phi_k(x) - P_k(x)| = {worst:e} exceeds 1e-10"),
        );
    }
    within_budget("2", started, 1.0);
    pass(
        "2",
        &format!("max deviation from the Legendre recurrence is {worst:.2e}"),
    );
}

// ---------------------------------------------------------------------------
// 3. dense diagonalization oracle

#[test]
fn criterion_03_dense_circle_average_diagonalizes_on_legendre_clusters() {
    let started = Instant::now();
    let band_limit = 8u32;
    let delta = 0.5;
    let eigs = dense_sphere_oracle(dim(3), band_limit, delta, 2 * band_limit + 2).unwrap();
    if eigs.len() != sphere_basis_dim(band_limit) {
        fail(
            "3",
            &format!(
                "expected {} eigenvalues, got {}",
                sphere_basis_dim(band_limit),
                eigs.len()
            ),
        );
    }
    let clusters = eigenvalue_clusters(&eigs, 1e-6);
    let reference = legendre_column(band_limit, delta);
    for k in 0..=band_limit {
        let expected_value = reference[k as usize];
        let expected_mult = 2 * k as usize + 1;
        let hit = clusters
            .iter()
            .find(|(v, _)| (v - expected_value).abs() <= 1e-6);
        match hit {
            Some((v, m)) if *m == expected_mult => {
                let _ = v;
            }
            Some((v, m)) => fail(
                "3",
                &format!("cluster at {v} (for degree {k}) has multiplicity {m}, expected {expected_mult}"),
            ),
            None => fail(
                "3",
                &format!("no eigenvalue cluster within 1e-6 of P_{k}(0.5) = {expected_value}"),
            ),
        }
    }
    within_budget("3", started, 30.0);
    pass(
        "3",
        "all 9 clusters sit at Legendre values with multiplicities 2k+1",
    );
}

// ---------------------------------------------------------------------------
// 4. power-sum convergence and divergence at the threshold

#[test]
fn criterion_04a_power_sum_certifies_at_exponent_four() {
    let started = Instant::now();
    let op = SpectralOperator::new(dim(3), 0.0).unwrap();
    match schatten_norm(op, 4.0, 1e-8) {
        // `tail_bound` is reported on the norm scale; the tolerance gates
        // the p-power tail, so compare `tail_bound^p` against it.
        Ok(SchattenResult {
            tail_bound,
            partial,
            ..
        }) if tail_bound.powf(4.0) < 1e-8 => {
            within_budget("4a", started, 10.0);
            pass(
                "4a",
                &format!(
                    "norm {partial} certified with power tail {:e}",
                    tail_bound.powf(4.0)
                ),
            );
        }
        Ok(r) => fail(
            "4a",
            &format!(
                "sum computed but the power tail {:e} misses 1e-8",
                r.tail_bound.powf(4.0)
            ),
        ),
        Err(e) => {
            let sums: Vec<f64> = [100u32, 1_000, 10_000, 100_000]
                .iter()
                .map(|&k| raw_power_sum(dim(3), 0.0, 4.0, k).unwrap())
                .collect();
            fail(
                "4a",
                &format!(
                    "exponent 4 on S^2 is the exact summability threshold 2 + 2/(n-2), and the \
                     strict inequality excludes it: the summand envelope m_k |phi_k(0)|^4 ~ \
                     (2k+1) (2/(pi k))^2 ~ 8/(pi^2 k) is harmonic, so the sum diverges \
                     logarithmically. Partial sums at K = 10^2..10^5: {s0:.3}, {s1:.3}, \
                     {s2:.3}, {s3:.3} — growing ~{slope:.3} per decade without bound. The \
                     implementation refuses honestly with: {e}",
                    s0 = sums[0],
                    s1 = sums[1],
                    s2 = sums[2],
                    s3 = sums[3],
                    slope = (sums[3] - sums[0]) / 3.0,
                ),
            );
        }
    }
}

#[test]
fn criterion_04b_divergence_flagged_at_exponent_three() {
    let started = Instant::now();
    let op = SpectralOperator::new(dim(3), 0.0).unwrap();
    match schatten_norm(op, 3.0, 1e-8) {
        Err(Error::Divergence(msg)) => {
            within_budget("4b", started, 10.0);
            pass("4b", &format!("exponent 3 is refused as divergent: {msg}"));
        }
        Err(e) => fail("4b", &format!("expected a divergence error, got: {e}")),
        Ok(r) => fail(
            "4b",
            &format!("expected a divergence error, got a value {}", r.partial),
        ),
    }
}

#[test]
fn criterion_04c_raw_partial_sums_exceed_ten_at_exponent_three() {
    let started = Instant::now();
    let sum = raw_power_sum(dim(3), 0.0, 3.0, 100_000).unwrap();
    if sum <= 10.0 {
        fail(
            "4c",
            &format!("partial sum at K = 1e5 is only {sum}, expected > 10"),
        );
    }
    within_budget("4c", started, 10.0);
    pass("4c", &format!("partial sum reaches {sum:.1} by K = 1e5"));
}

// ---------------------------------------------------------------------------
// 5. Holder certificate

#[test]
fn criterion_05_holder_certificate_at_exponent_four() {
    let started = Instant::now();
    let grid = equispaced(25, -0.5, 0.5);
    match holder_fit(dim(3), 4.0, &grid) {
        Ok(fit) => {
            if !(fit.alpha_p > 0.0 && fit.alpha_p < 1.0) {
                fail("5", &format!("exponent {} outside (0,1)", fit.alpha_p));
            }
            if !(fit.c_p >= 2.0) {
                fail("5", &format!("constant {} below 2", fit.c_p));
            }
            if fit.max_violation > 0.0 {
                fail("5", &format!("bound violated by {}", fit.max_violation));
            }
            let doubled = holder_fit(dim(3), 4.0, &equispaced(50, -0.5, 0.5)).unwrap();
            let drift = ((doubled.alpha_p - fit.alpha_p) / fit.alpha_p).abs();
            if drift > 0.05 {
                fail(
                    "5",
                    &format!("exponent drifts {drift:.3} under grid doubling"),
                );
            }
            within_budget("5", started, 20.0);
            pass("5", &format!("C = {}, alpha = {}", fit.c_p, fit.alpha_p));
        }
        Err(e) => fail(
            "5",
            &format!(
                "the fit needs the operator-difference norms at exponent 4 on S^2, but 4 is \
                 the exact summability threshold there (see criterion 4a) and every norm \
                 evaluation refuses with: {e}. The certificate itself is demonstrated at the \
                 nearest feasible exponents by the companion test criterion_05s."
            ),
        ),
    }
}

/// Companion: the full certificate at feasible parameters — on S^2 at
/// exponent 6 (the fit at exponent 5 is valid but sits so close to the
/// threshold that its exponent estimate moves 5.2% when the grid range
/// extends), and at the stated exponent 4 one dimension up, where the
/// threshold is 3.
#[test]
fn criterion_05s_holder_certificate_at_feasible_exponents() {
    let started = Instant::now();
    for (n, p) in [(3u32, 6.0f64), (4, 4.0)] {
        let fit = holder_fit(dim(n), p, &equispaced(25, -0.5, 0.5)).unwrap();
        if !(fit.alpha_p > 0.0 && fit.alpha_p < 1.0) {
            fail(
                "5s",
                &format!("n={n}, p={p}: exponent {} outside (0,1)", fit.alpha_p),
            );
        }
        if !(fit.c_p >= 2.0) {
            fail("5s", &format!("n={n}, p={p}: constant {} below 2", fit.c_p));
        }
        if fit.max_violation > 0.0 {
            fail(
                "5s",
                &format!("n={n}, p={p}: bound violated by {}", fit.max_violation),
            );
        }
        let doubled = holder_fit(dim(n), p, &equispaced(50, -0.5, 0.5)).unwrap();
        let alpha_drift = ((doubled.alpha_p - fit.alpha_p) / fit.alpha_p).abs();
        let c_drift = ((doubled.c_p - fit.c_p) / fit.c_p).abs();
        if alpha_drift > 0.05 || c_drift > 0.05 {
            fail(
                "5s",
                &format!(
                    "n={n}, p={p}: constants drift ({alpha_drift:.3}, {c_drift:.3}) under \
                     grid doubling"
                ),
            );
        }
    }
    within_budget("5s", started, 20.0);
    pass(
        "5s",
        "certificates at (n,p) = (3,6) and (4,4) are valid and grid-stable",
    );
}

// ---------------------------------------------------------------------------
// 6. rotation-diagonal-rotation round trip

#[test]
fn criterion_06_rotation_diagonal_round_trip_certificate() {
    let started = Instant::now();
    let mut rng = SplitMix64::new(0xACCE);
    let mut max_round_trip = 0.0f64;
    let mut max_excess = f64::NEG_INFINITY;
    for _ in 0..10_000 {
        let t = rng.uniform(-3.0, 3.0);
        let s = t + rng.uniform(1e-6, 6.0);
        let u = t + rng.uniform(0.0, 1.0) * 0.5 * (s - t);
        let v = s + t - u;
        let theta = kak2_solve(v, u, s, t).unwrap();
        let (x, y) = kak2_forward(s, t, theta).unwrap();
        max_round_trip = max_round_trip.max((x - v).abs()).max((y - u).abs());
        max_excess = max_excess.max(theta.cos().abs() - (t - u).exp());
    }
    if max_round_trip > 1e-9 {
        fail(
            "6",
            &format!("round-trip error {max_round_trip:e} exceeds 1e-9"),
        );
    }
    if max_excess > 1e-12 {
        fail(
            "6",
            &format!("|cos theta| exceeds e^(t-u) by {max_excess:e}"),
        );
    }
    within_budget("6", started, 5.0);
    pass(
        "6",
        &format!(
            "10^4 round trips: max error {max_round_trip:.1e}, cosine bound slack {max_excess:.1e}"
        ),
    );
}

// ---------------------------------------------------------------------------
// 7. telescoped schedule sums under the closed-form decay

#[test]
fn criterion_07_telescoped_sums_below_closed_form_decay() {
    let started = Instant::now();
    for n in [3u32, 4, 5] {
        let holder = HolderConstants::from_parts(dim(n), 4.0, 2.5, 0.3).unwrap();
        let mut prev = f64::INFINITY;
        for i in 0..=38 {
            let t = 1.0 + 0.5 * f64::from(i);
            let closed = epsilon_decay(n, &holder, t).unwrap();
            for s in [2.0 * t, t + 8.0, 50.0] {
                let raw = telescoped_sum(n, &holder, t, s).unwrap();
                if raw > closed * (1.0 + 1e-12) {
                    fail(
                        "7",
                        &format!("n={n}, t={t}, s={s}: raw {raw} above closed form {closed}"),
                    );
                }
            }
            if t >= 2.0 && closed >= prev {
                fail(
                    "7",
                    &format!("n={n}: decay not monotone at t={t} ({closed} vs {prev})"),
                );
            }
            prev = closed;
        }
        let limit = epsilon_decay(n, &holder, 400.0).unwrap();
        if limit > 1e-20 {
            fail(
                "7",
                &format!("n={n}: decay at t=400 is {limit:e}, not tending to zero"),
            );
        }
    }
    within_budget("7", started, 1.0);
    pass(
        "7",
        "raw sums stay below the closed form; the bound decays monotonically to 0",
    );
}

// ---------------------------------------------------------------------------
// 8. group orders by enumeration

#[test]
fn criterion_08_group_orders_by_enumeration() {
    let started = Instant::now();
    for q in [2u32, 3, 5, 7, 11, 13] {
        let gens = GeneratingSet::elementary(2, q).unwrap();
        let table = enumerate_group(&gens, None).unwrap();
        let formula = sl_order(2, q).unwrap().to_string();
        if table.len().to_string() != formula {
            fail(
                "8",
                &format!(
                    "|SL(2,Z/{q}Z)| enumerated {} vs formula {formula}",
                    table.len()
                ),
            );
        }
    }
    let gens = GeneratingSet::elementary(3, 3).unwrap();
    let table = enumerate_group(&gens, None).unwrap();
    if table.len() != 5616 {
        fail(
            "8",
            &format!("|SL(3,Z/3Z)| enumerated {} vs 5616", table.len()),
        );
    }
    if sl_order(3, 3).unwrap().to_string() != "5616" {
        fail("8", "order formula for SL(3, Z/3Z) disagrees with 5616");
    }
    within_budget("8", started, 60.0);
    pass(
        "8",
        "six SL(2) orders and |SL(3,Z/3Z)| = 5616 confirmed by enumeration",
    );
}

// ---------------------------------------------------------------------------
// 9. uniform spectral gap across the congruence family

#[test]
fn criterion_09_uniform_spectral_gap_across_the_family() {
    let started = Instant::now();
    let graphs: Vec<CayleyGraph> = [3u32, 5, 7, 11, 13]
        .iter()
        .map(|&q| elementary_cayley(2, q))
        .collect();
    let family = expander_report(&graphs, 0.05, 1e-9).unwrap();
    if !family.uniform_above_epsilon {
        fail(
            "9",
            &format!("minimum gap {} below 0.05", family.min_spectral_gap),
        );
    }
    if !family.sizes_strictly_increasing {
        fail("9", "family sizes are not strictly increasing");
    }
    for report in &family.reports {
        if report.lambda2_residual > 1e-8 {
            fail(
                "9",
                &format!(
                    "{}: eigenpair residual {:e} exceeds 1e-8",
                    report.graph_id, report.lambda2_residual
                ),
            );
        }
        if report.n_vertices <= 24 {
            match report.h_exact {
                Some(h) => {
                    if !(report.cheeger_lower <= h && h <= report.cheeger_upper) {
                        fail(
                            "9",
                            &format!(
                                "{}: exact constant {h} outside the sandwich [{}, {}]",
                                report.graph_id, report.cheeger_lower, report.cheeger_upper
                            ),
                        );
                    }
                }
                None => fail(
                    "9",
                    &format!("{}: exact constant missing at 24 vertices", report.graph_id),
                ),
            }
        }
    }
    within_budget("9", started, 300.0);
    pass(
        "9",
        &format!(
            "gaps over q=3..13 all >= {:.4}; residuals <= 1e-8; sandwich verified at 24 vertices",
            family.min_spectral_gap
        ),
    );
}

// ---------------------------------------------------------------------------
// 10. Poincare and half-mass bounds on random Lipschitz embeddings

#[test]
fn criterion_10_poincare_and_half_mass_on_random_embeddings() {
    let started = Instant::now();
    let graph = elementary_cayley(2, 7);
    let uniform = GeneratorMeasure::uniform(graph.degree()).unwrap();
    let mu = shrink_to_half(&graph, &uniform, MAX_SQUARINGS).unwrap();
    let norm = mu_operator_norm(&graph, &mu).unwrap();
    if norm > 0.5 {
        fail(
            "10",
            &format!("measure norm {norm} above 1/2 after shrinking"),
        );
    }
    for seed in 0..100u64 {
        let f = random_lipschitz_embedding(&graph, 8, 0x10_0000 + seed).unwrap();
        let pc = poincare_check(&graph, &f, &mu).unwrap();
        if !pc.holds {
            fail(
                "10",
                &format!(
                    "seed {seed}: inequality fails, lhs {} rhs {}",
                    pc.lhs, pc.rhs
                ),
            );
        }
        let hm = halfmass_check(&graph, &f, &mu, None).unwrap();
        if hm.fraction < 0.5 {
            fail(
                "10",
                &format!(
                    "seed {seed}: only {} of mass below 2 sqrt(2) K",
                    hm.fraction
                ),
            );
        }
    }
    within_budget("10", started, 120.0);
    pass(
        "10",
        &format!("norm {norm:.3} <= 1/2; 100/100 embeddings satisfy both bounds"),
    );
}

// ---------------------------------------------------------------------------
// 11. eigenvector closed form for the inequality ratio

#[test]
fn criterion_11_eigenvector_ratio_closed_form() {
    let started = Instant::now();
    let graph = elementary_cayley(2, 3);
    let mu = GeneratorMeasure::uniform(graph.degree()).unwrap();
    let mut checked = 0usize;
    for (lambda, vector) in dense_eigenpairs(&graph).unwrap() {
        if (lambda - 1.0).abs() < 1e-9 {
            continue; // the constant eigenvector is not mean-zero
        }
        let f = VertexEmbedding::new(graph.graph_id(), 2.0, graph.n_vertices(), 1, vector).unwrap();
        let chk = poincare_check(&graph, &f, &mu).unwrap();
        let expected = 1.0 / (4.0 * (1.0 - lambda) * (1.0 - lambda));
        let got = chk.lhs / chk.rhs;
        if (got - expected).abs() > 1e-9 {
            fail(
                "11",
                &format!("lambda = {lambda}: ratio {got} vs closed form {expected}"),
            );
        }
        checked += 1;
    }
    if checked == 0 {
        fail("11", "no non-constant eigenvectors were produced");
    }
    within_budget("11", started, 10.0);
    pass(
        "11",
        &format!("ratio matches 1/(4(1-lambda)^2) on all {checked} eigenvectors"),
    );
}

// ---------------------------------------------------------------------------
// 12. distance from l^1_2 to the Euclidean plane

#[test]
fn criterion_12_l1_to_euclidean_distance_with_john_certificate() {
    let started = Instant::now();
    let distance = bm_small(2).unwrap();
    let target = std::f64::consts::SQRT_2;
    if (distance - target).abs() > 1e-9 {
        fail(
            "12",
            &format!("distance {distance} differs from sqrt(2) beyond 1e-9"),
        );
    }
    let check = john_check_l1_ball(2, 1e-12).unwrap();
    if (check.circumscribed_radius - 1.0).abs() > 1e-9 {
        fail(
            "12",
            &format!(
                "circumscribed radius {} is not 1",
                check.circumscribed_radius
            ),
        );
    }
    if (check.inscribed_radius - 1.0 / target).abs() > 1e-9 {
        fail(
            "12",
            &format!(
                "inscribed radius {} is not 1/sqrt(2)",
                check.inscribed_radius
            ),
        );
    }
    if (check.ratio - target).abs() > 1e-9 {
        fail(
            "12",
            &format!("radius ratio {} is not sqrt(2)", check.ratio),
        );
    }
    within_budget("12", started, 1.0);
    pass(
        "12",
        &format!("distance {distance} with John radii (1, 1/sqrt(2)) verified"),
    );
}

// ---------------------------------------------------------------------------
// 13. byte-identical reruns of the command-line driver

#[test]
fn criterion_13_byte_identical_reruns() {
    let bin = env!("CARGO_BIN_EXE_hirank");
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let runs: &[(&str, &[&str])] = &[
        (
            "phi.csv",
            &["phi", "--n", "3", "--kmax", "8", "--grid", "7"],
        ),
        ("kak.json", &["kak", "--batch", "500", "--seed", "9"]),
        (
            "spectrum.csv",
            &["spectrum", "--n", "2", "--q", "5", "--k", "3"],
        ),
        (
            "poincare.csv",
            &[
                "poincare",
                "--n",
                "2",
                "--q",
                "3",
                "--dim",
                "4",
                "--samples",
                "5",
                "--seed",
                "3",
            ],
        ),
        (
            "embed.json",
            &[
                "embed", "--n", "2", "--q", "3", "--dim", "3", "--iters", "50", "--seed", "11",
                "--coords",
            ],
        ),
        (
            "expander.csv",
            &["expander-report", "--n", "2", "--q", "3,5"],
        ),
    ];
    for (name, args) in runs {
        let mut outputs = Vec::new();
        for attempt in 0..2 {
            let path = dir.path().join(format!("{attempt}-{name}"));
            let status = std::process::Command::new(bin)
                .args(*args)
                .arg("--out")
                .arg(&path)
                .env("HIRANK_CACHE_DIR", &cache)
                .status()
                .unwrap();
            if !status.success() {
                fail("13", &format!("{name}: run {attempt} exited with {status}"));
            }
            outputs.push(std::fs::read(&path).unwrap());
        }
        if outputs[0] != outputs[1] {
            fail(
                "13",
                &format!(
                    "{name}: reruns differ ({} vs {} bytes)",
                    outputs[0].len(),
                    outputs[1].len()
                ),
            );
        }
        if outputs[0].is_empty() {
            fail("13", &format!("{name}: output is empty"));
        }
    }
    pass(
        "13",
        "six command reruns (cold and warm cache) are byte-identical",
    );
}
