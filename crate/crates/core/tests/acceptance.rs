//! Acceptance gate: one test per contracted behavior, each printing a single
//! pass/fail line (visible with `--nocapture`; failures always show it).
//!
//! The rate checks are cross-validated against a naive oracle frozen in this
//! file: the full double sum over all n! photon-to-port assignments with no
//! support pruning and plain accumulation. Test 03 includes one closed-form
//! sub-claim that the exact enumeration contradicts (it violates two-photon
//! suppression in the bunching limit); that sub-check is left failing
//! deliberately and the line documents the discrepancy.

use mcphase::designer::canonical_cycle_sequence;
use mcphase::engine::DEFAULT_ENUMERATION_CAP;
use mcphase::{
    all_rates, build_sparse_unitary, carlen_bound, classify, coincidence_rate, conjecture_statistic,
    conjecture_sweep, connectivity_graph, distinguishable_oracle, enhanced_graph, estimate,
    fourier_matrix, genuine_check, indistinguishable_oracle, minor_graph, overlap_r,
    pattern_unitarity_defect, pure_cycle_check, rate_from_overlaps, rates_from_counts,
    ryser_permanent, sample_counts, GramMatrix, InputConfig, OutputConfig, Parity, Permutation,
    ScatteringMatrix,
};
use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

fn report(idx: u32, name: &str, failures: &[String], detail: &str, t0: Instant) {
    let verdict = if failures.is_empty() { "PASS" } else { "FAIL" };
    println!(
        "acceptance {idx:02} {verdict} ({:.2} s) {name}: {detail}",
        t0.elapsed().as_secs_f64()
    );
    assert!(failures.is_empty(), "{}", failures.join("; "));
}

fn eta(ports: &[usize]) -> OutputConfig {
    OutputConfig::new(ports.to_vec()).unwrap()
}

/// All permutations of 0..n as image tables.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(n: usize, cur: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for j in 0..n {
            if !used[j] {
                used[j] = true;
                cur.push(j);
                rec(n, cur, used, out);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(n, &mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// Naive oracle: full double permutation sum, no pruning, no compensation.
/// `overlaps[(b, c)]` stands for `<p_{b+1}, p_{c+1}>`.
fn naive_rate(
    u: &ScatteringMatrix,
    overlaps: &DMatrix<C64>,
    v: &InputConfig,
    out: &OutputConfig,
) -> C64 {
    let n = v.n();
    let perms = permutations(n);
    let amp = |tau: &[usize]| -> C64 {
        let mut a = C64::new(1.0, 0.0);
        for slot in 0..n {
            a *= u.entry(out.port(slot + 1), v.port_of(tau[slot] + 1));
        }
        a
    };
    let mut total = C64::new(0.0, 0.0);
    for tau in &perms {
        for tau2 in &perms {
            let mut g = C64::new(1.0, 0.0);
            for slot in 0..n {
                g *= overlaps[(tau2[slot], tau[slot])];
            }
            total += amp(tau).conj() * amp(tau2) * g;
        }
    }
    total
}

/// All n-subsets of 1..=m in lexicographic order.
fn combinations(m: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(m: usize, n: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for p in start..=m {
            cur.push(p);
            rec(m, n, p + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, n, 1, &mut Vec::new(), &mut out);
    out
}

#[test]
fn criterion_01_three_mode_interference_coefficients() {
    let t0 = Instant::now();
    let mut failures = Vec::new();
    let u = fourier_matrix(3);
    let v = InputConfig::new(vec![1, 2, 3]).unwrap();
    let out = eta(&[1, 2, 3]);
    let tol = 1e-12;

    // Probe overlap matrices isolate one relative-permutation weight each:
    // the identity weight, the three pair-swap weights, and the two directed
    // three-cycle weights.
    let ident = DMatrix::<C64>::identity(3, 3);
    let mut max_dev = 0.0f64;
    let mut check = |name: &str, probe: &DMatrix<C64>, expect: f64| {
        let engine = rate_from_overlaps(&u, probe, &v, &out).unwrap();
        let naive = naive_rate(&u, probe, &v, &out);
        let dev = (engine.re - expect).abs().max(engine.im.abs());
        max_dev = max_dev.max(dev).max((engine - naive).norm());
        if dev > tol {
            failures.push(format!("{name}: engine {engine} vs expected {expect}"));
        }
        if (engine - naive).norm() > tol {
            failures.push(format!("{name}: engine {engine} vs naive oracle {naive}"));
        }
    };

    check("identity weight", &ident, 2.0 / 9.0);
    for (a, b) in [(0usize, 1usize), (0, 2), (1, 2)] {
        let mut probe = ident.clone();
        probe[(a, b)] = C64::new(1.0, 0.0);
        probe[(b, a)] = C64::new(1.0, 0.0);
        // Activates identity + one pair swap; subtracting 2/9 leaves -1/9.
        check(&format!("pair swap ({},{})", a + 1, b + 1), &probe, 2.0 / 9.0 - 1.0 / 9.0);
    }
    for cycle in [[(1usize, 0usize), (2, 1), (0, 2)], [(0, 1), (1, 2), (2, 0)]] {
        let mut probe = ident.clone();
        for (r, c) in cycle {
            probe[(r, c)] = C64::new(1.0, 0.0);
        }
        // Activates identity + one directed three-cycle: 2/9 + 2/9.
        check(&format!("directed cycle {cycle:?}"), &probe, 4.0 / 9.0);
    }

    report(
        1,
        "three-mode interference coefficients",
        &failures,
        &format!("six probe weights 2/9, -1/9 x3, 2/9 x2 at 1e-12; max deviation {max_dev:.2e}"),
        t0,
    );
}

#[test]
fn criterion_02_two_photon_dip() {
    let t0 = Instant::now();
    let mut failures = Vec::new();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let m = DMatrix::from_row_slice(
        2,
        2,
        &[C64::new(s, 0.0), C64::new(s, 0.0), C64::new(s, 0.0), C64::new(-s, 0.0)],
    );
    let u = ScatteringMatrix::new(m).unwrap();
    let v = InputConfig::new(vec![1, 2]).unwrap();
    let out = eta(&[1, 2]);
    let tol = 1e-14;

    let same = coincidence_rate(&u, &GramMatrix::all_ones(2), &v, &out).unwrap();
    let diff = coincidence_rate(&u, &GramMatrix::identity(2), &v, &out).unwrap();
    if same.abs() > tol {
        failures.push(format!("identical photons: coincidence {same:.3e}, expected 0"));
    }
    if (diff - 0.5).abs() > tol {
        failures.push(format!("distinguishable photons: coincidence {diff}, expected 1/2"));
    }
    // Permanent-based oracles agree with both limits.
    let perm_same = indistinguishable_oracle(&u, &v, &out).unwrap();
    let perm_diff = distinguishable_oracle(&u, &v, &out).unwrap();
    if (perm_same - same).abs() > tol || (perm_diff - diff).abs() > tol {
        failures.push(format!(
            "permanent oracles disagree: {perm_same:.3e}/{perm_diff} vs {same:.3e}/{diff}"
        ));
    }

    report(
        2,
        "two-photon dip",
        &failures,
        &format!("identical -> {same:.1e}, distinguishable -> {diff} at 1e-14"),
        t0,
    );
}

#[test]
fn criterion_03_four_photon_closed_forms() {
    let t0 = Instant::now();
    let mut failures = Vec::new();
    let design = build_sparse_unitary(4).unwrap();
    let u = design.unitary();
    let v = design.input();
    let tol = 1e-12;
    let scale = 1.0 / 128.0;

    let rest = eta(&[1, 2, 7, 8]);
    let pair_member = eta(&[1, 2, 3, 5]);
    let xi_even = eta(&[1, 3, 5, 7]);
    let xi_odd = eta(&[1, 3, 5, 8]);

    let mut claimed_dev = 0.0f64; // (2 - a - b + ab) / 128 for ports (1,2,7,8)
    let mut product_dev = 0.0f64; // (1 - a)(1 - b) / 64, the enumeration's value
    let mut other_dev = 0.0f64;
    let mut oracle_dev = 0.0f64;

    for seed in 0..100u64 {
        let g = GramMatrix::random(4, 4, seed);
        let a = g.overlap(1, 2).norm_sqr();
        let b = g.overlap(3, 4).norm_sqr();
        let r12 = g.overlap(1, 2).norm_sqr();
        let r_sigma = overlap_r(&g, design.sigma()).unwrap();

        let rate_rest = coincidence_rate(u, &g, v, &rest).unwrap();
        claimed_dev = claimed_dev.max((rate_rest - scale * (2.0 - a - b + a * b)).abs());
        product_dev = product_dev.max((rate_rest - (1.0 - a) * (1.0 - b) / 64.0).abs());

        let rate_pair = coincidence_rate(u, &g, v, &pair_member).unwrap();
        other_dev = other_dev.max((rate_pair - scale * (1.0 - r12)).abs());

        let rate_even = coincidence_rate(u, &g, v, &xi_even).unwrap();
        let rate_odd = coincidence_rate(u, &g, v, &xi_odd).unwrap();
        other_dev = other_dev.max((rate_even - scale * (1.0 + r_sigma.re)).abs());
        other_dev = other_dev.max((rate_odd - scale * (1.0 - r_sigma.re)).abs());

        if seed < 5 {
            for cfg in [&rest, &pair_member, &xi_even, &xi_odd] {
                let engine = coincidence_rate(u, &g, v, cfg).unwrap();
                let naive = naive_rate(u, g.matrix(), v, cfg);
                oracle_dev = oracle_dev.max((engine - naive.re).abs().max(naive.im.abs()));
            }
        }
    }

    if other_dev > tol {
        failures.push(format!("pair-class or phase-class closed form off by {other_dev:.3e}"));
    }
    if oracle_dev > 1e-13 {
        failures.push(format!("engine vs naive oracle off by {oracle_dev:.3e}"));
    }
    if claimed_dev > tol {
        failures.push(format!(
            "claimed closed form (2-a-b+ab)/128 for ports (1,2,7,8) is off by up to \
             {claimed_dev:.3e}; the exact enumeration follows (1-a)(1-b)/64 (deviation \
             {product_dev:.3e}) and satisfies two-photon suppression in the bunching limit, \
             which the claimed form does not; left failing deliberately"
        ));
    }

    report(
        3,
        "four-photon closed forms",
        &failures,
        &format!(
            "pair/phase classes at 1e-12 over 100 random overlap matrices (max dev \
             {other_dev:.2e}); claimed (2-a-b+ab)/128 form deviates {claimed_dev:.2e}, exact \
             (1-a)(1-b)/64 deviates {product_dev:.2e}"
        ),
        t0,
    );
}

#[test]
fn criterion_04_partition_cardinalities_and_forbidden_rates() {
    let t0 = Instant::now();
    let mut failures = Vec::new();

    for n in 3..=6usize {
        let design = build_sparse_unitary(n).unwrap();
        let o_sets = design.output_sets();
        let cls = classify(&design);

        // Independent brute-force scan over all collision-free configurations.
        let mut xi_count = 0usize;
        let mut chi_counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for combo in combinations(2 * n, n) {
            let count_in = |set: &BTreeSet<usize>| combo.iter().filter(|p| set.contains(p)).count();
            let uncovered = (1..=n).any(|photon| {
                o_sets
                    .iter()
                    .filter(|(&(a, b), _)| a == photon || b == photon)
                    .all(|(_, set)| count_in(set) == 0)
            });
            if uncovered {
                continue;
            }
            let doubled: Vec<(usize, usize)> =
                o_sets.iter().filter(|(_, set)| count_in(set) == 2).map(|(&k, _)| k).collect();
            if doubled.is_empty() {
                xi_count += 1;
            } else if doubled.len() == 1 {
                *chi_counts.entry(doubled[0]).or_insert(0) += 1;
            }
        }

        if xi_count != 1 << n || cls.xi.len() != 1 << n {
            failures.push(format!(
                "n={n}: phase-bearing count {} (scan {xi_count}), expected {}",
                cls.xi.len(),
                1 << n
            ));
        }
        let expect_chi = (n - 1) * (1 << (n - 2));
        for (&pair, members) in &cls.chi_subsets {
            let scanned = chi_counts.get(&pair).copied().unwrap_or(0);
            if members.len() != expect_chi || scanned != expect_chi {
                failures.push(format!(
                    "n={n} pair {pair:?}: class size {} (scan {scanned}), expected {expect_chi}",
                    members.len()
                ));
            }
        }

        // Every forbidden configuration has exact rate zero.
        let g = GramMatrix::random(n, n, 7 + n as u64);
        for member in &cls.zeta {
            let rate = coincidence_rate(design.unitary(), &g, design.input(), member).unwrap();
            if rate > 1e-12 {
                failures.push(format!("n={n}: forbidden {member} has rate {rate:.3e}"));
            }
        }
    }

    let design = build_sparse_unitary(4).unwrap();
    let cls = classify(&design);
    if cls.chi_subsets[&(1, 2)].len() != 12 {
        failures.push(format!("pair (1,2) class size {}, expected 12", cls.chi_subsets[&(1, 2)].len()));
    }
    if cls.xi.len() != 16 {
        failures.push(format!("four-photon phase-bearing size {}, expected 16", cls.xi.len()));
    }

    report(
        4,
        "partition cardinalities and forbidden rates",
        &failures,
        "pair classes (n-1)*2^(n-2) and phase class 2^n for n=3..6 by brute force; forbidden rates <= 1e-12",
        t0,
    );
}

#[test]
fn criterion_05_exact_round_trip() {
    let t0 = Instant::now();
    let mut failures = Vec::new();
    let mut max_r_dev = 0.0f64;
    let mut max_psi_dev = 0.0f64;

    for n in 3..=5usize {
        let design = build_sparse_unitary(n).unwrap();
        let cls = classify(&design);
        for seed in 0..100u64 {
            let g = GramMatrix::random(n, n, seed + 1000 * n as u64);
            let rates = all_rates(design.unitary(), &g, design.input()).unwrap();
            let est = match estimate(&rates, &cls) {
                Ok(e) => e,
                Err(e) => {
                    failures.push(format!("n={n} seed {seed}: estimate failed: {e}"));
                    continue;
                }
            };
            for (&(a, b), &r_hat) in &est.pairwise {
                let truth = g.overlap(a, b).norm_sqr();
                let dev = (r_hat - truth).abs();
                max_r_dev = max_r_dev.max(dev);
                if dev > 1e-10 {
                    failures.push(format!(
                        "n={n} seed {seed} pair ({a},{b}): recovered {r_hat} vs {truth}"
                    ));
                }
            }
            let truth_psi = overlap_r(&g, design.sigma()).unwrap().arg().abs();
            match est.phase_abs {
                Some(psi_hat) => {
                    let dev = (psi_hat - truth_psi).abs();
                    max_psi_dev = max_psi_dev.max(dev);
                    if dev > 1e-8 {
                        failures.push(format!(
                            "n={n} seed {seed}: recovered |phase| {psi_hat} vs {truth_psi}"
                        ));
                    }
                }
                None => failures.push(format!(
                    "n={n} seed {seed}: no phase (amplitude {:.3e})",
                    est.amplitude
                )),
            }
        }
    }

    report(
        5,
        "exact estimator round trip",
        &failures,
        &format!(
            "n=3,4,5 x 100 random overlap matrices: pairwise within 1e-10 (max {max_r_dev:.2e}), \
             |phase| within 1e-8 (max {max_psi_dev:.2e})"
        ),
        t0,
    );
}

#[test]
fn criterion_06_sampled_round_trip_coverage() {
    let t0 = Instant::now();
    let mut failures = Vec::new();
    let design = build_sparse_unitary(4).unwrap();
    let cls = classify(&design);
    let g = GramMatrix::from_cycle_overlaps(
        4,
        design.cycle_sequence(),
        &[
            C64::from_polar(0.5, 0.9),
            C64::from_polar(0.45, 0.7),
            C64::new(0.45, 0.0),
            C64::new(0.4, 0.0),
        ],
    )
    .unwrap();
    let exact = all_rates(design.unitary(), &g, design.input()).unwrap();
    let truth_psi = estimate(&exact, &cls).unwrap().phase_abs.unwrap();

    let shots = 10_000_000u64;
    let mut covered = 0usize;
    for seed in 0..100u64 {
        let counts = sample_counts(&exact, shots, seed).unwrap();
        let empirical = rates_from_counts(&counts).unwrap();
        match estimate(&empirical, &cls) {
            Ok(est) => match (est.phase_abs, est.phase_stderr) {
                (Some(psi_hat), Some(se)) if (psi_hat - truth_psi).abs() <= 4.0 * se => {
                    covered += 1
                }
                (Some(psi_hat), Some(se)) => failures.push(format!(
                    "seed {seed}: |{psi_hat} - {truth_psi}| > 4 x {se:.2e}"
                )),
                _ => failures.push(format!("seed {seed}: phase or stderr missing")),
            },
            Err(e) => failures.push(format!("seed {seed}: estimate failed: {e}")),
        }
    }
    let detail = format!("{covered}/100 seeds within 4 standard errors at 10^7 shots");
    if covered >= 95 {
        failures.clear();
    } else {
        failures.insert(0, detail.clone());
        failures.truncate(6);
    }

    report(6, "sampled round trip coverage", &failures, &detail, t0);
}

#[test]
fn criterion_07_trace_out_flatness() {
    let t0 = Instant::now();
    let mut failures = Vec::new();
    let design = build_sparse_unitary(4).unwrap();
    let cls = classify(&design);
    let o_sets = design.output_sets();
    let expected = 1.0 / 64.0;

    let mut sweep: Vec<BTreeMap<(usize, usize), Vec<f64>>> = Vec::new();
    for k in 0..8 {
        let psi = 2.0 * std::f64::consts::PI * k as f64 / 8.0;
        let g = GramMatrix::from_cycle_overlaps(
            4,
            design.cycle_sequence(),
            &[
                C64::from_polar(0.4, psi),
                C64::new(0.35, 0.0),
                C64::new(0.3, 0.0),
                C64::new(0.45, 0.0),
            ],
        )
        .unwrap();
        let rates = all_rates(design.unitary(), &g, design.input()).unwrap();
        let rep = genuine_check(&rates, o_sets, &cls, 1e-12);
        if !rep.ok || (rep.expected - expected).abs() > 1e-15 || rep.max_deviation > 1e-12 {
            failures.push(format!(
                "phase {psi:.3}: max marginal deviation {:.3e}, violations {:?}",
                rep.max_deviation, rep.violations
            ));
        }
        sweep.push(rep.marginals);
    }
    // Marginals are identical across the phase sweep.
    let mut max_var = 0.0f64;
    for rep in &sweep[1..] {
        for (pair, sums) in rep {
            for (j, &s) in sums.iter().enumerate() {
                max_var = max_var.max((s - sweep[0][pair][j]).abs());
            }
        }
    }
    if max_var > 1e-12 {
        failures.push(format!("marginals vary by {max_var:.3e} across the phase sweep"));
    }

    report(
        7,
        "trace-out flatness",
        &failures,
        &format!("marginals equal 1/64 and vary {max_var:.2e} over 8 phase values"),
        t0,
    );
}

#[test]
fn criterion_08_designer_family() {
    let t0 = Instant::now();
    let mut failures = Vec::new();

    // Reference four-photon matrix, frozen by hand (x 1/2).
    let expect: [[f64; 8]; 8] = [
        [1.0, -1.0, -1.0, 1.0, 0.0, 0.0, 0.0, 0.0],
        [1.0, -1.0, 1.0, -1.0, 0.0, 0.0, 0.0, 0.0],
        [1.0, 1.0, 0.0, 0.0, -1.0, 1.0, 0.0, 0.0],
        [1.0, 1.0, 0.0, 0.0, 1.0, -1.0, 0.0, 0.0],
        [0.0, 0.0, 1.0, 1.0, 0.0, 0.0, -1.0, 1.0],
        [0.0, 0.0, 1.0, 1.0, 0.0, 0.0, 1.0, -1.0],
        [0.0, 0.0, 0.0, 0.0, 1.0, 1.0, -1.0, -1.0],
        [0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 1.0],
    ];
    let design4 = build_sparse_unitary(4).unwrap();
    for i in 0..8 {
        for j in 0..8 {
            let got = design4.unitary().entry(i + 1, j + 1);
            if got != C64::new(expect[i][j] / 2.0, 0.0) {
                failures.push(format!("entry ({},{}) = {got}, expected {}", i + 1, j + 1, expect[i][j] / 2.0));
            }
        }
    }

    let mut max_defect = 0.0f64;
    for n in 3..=16usize {
        let d = build_sparse_unitary(n).unwrap();
        max_defect = max_defect.max(d.unitary().defect());
    }
    if max_defect > 1e-12 {
        failures.push(format!("unitarity defect up to {max_defect:.3e} for n=3..16"));
    }

    for n in 3..=10usize {
        let d = build_sparse_unitary(n).unwrap();
        let gc = connectivity_graph(d.unitary(), 1e-12).unwrap();
        let ge = enhanced_graph(&minor_graph(&gc), d.input()).unwrap();
        let verdict = pure_cycle_check(&ge);
        let canonical = canonical_cycle_sequence(n).unwrap();
        if !verdict.is_pure_cycle || verdict.cycle.as_deref() != Some(&canonical[..]) {
            failures.push(format!(
                "n={n}: photon graph cycle {:?}, expected {canonical:?}",
                verdict.cycle
            ));
        }
    }

    // No fully nonzero two-band wraparound matrix is unitary: neighboring
    // columns always share exactly one row.
    let mut min_band_defect = f64::INFINITY;
    let mut rng = ChaCha8Rng::seed_from_u64(808);
    for n in 3..=8usize {
        for _ in 0..1000 {
            let mut w = DMatrix::<C64>::zeros(n, n);
            for i in 0..n {
                for j in [i, (i + 1) % n] {
                    let mag = 0.25 + 0.75 * rng.gen::<f64>();
                    let phase = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
                    w[(i, j)] = C64::from_polar(mag, phase);
                }
            }
            min_band_defect = min_band_defect.min(pattern_unitarity_defect(&w).unwrap());
        }
    }
    if min_band_defect <= 1e-6 {
        failures.push(format!("a banded matrix reached defect {min_band_defect:.3e}"));
    }

    report(
        8,
        "designer family",
        &failures,
        &format!(
            "reference matrix exact; defect <= {max_defect:.2e} for n=3..16; canonical cycles \
             n=3..10; 6000 banded matrices defect >= {min_band_defect:.2e}"
        ),
        t0,
    );
}

#[test]
fn criterion_09_interference_bound_sweeps() {
    let t0 = Instant::now();
    let mut failures = Vec::new();

    let expected = [
        (3usize, 2.0 / 9.0),
        (4, 0.09375),
        (5, 0.0384),
        (6, 720.0 / 46656.0),
    ];
    let mut max_fourier_dev = 0.0f64;
    for (n, value) in expected {
        let sigma = Permutation::from_cycle_sequence(n, &(1..=n).collect::<Vec<_>>()).unwrap();
        let stat = conjecture_statistic(&fourier_matrix(n), &sigma).unwrap();
        let fact: f64 = (1..=n).map(|k| k as f64).product();
        let dev = (stat - value).abs().max((stat - fact / (n as f64).powi(n as i32)).abs());
        max_fourier_dev = max_fourier_dev.max(dev);
        if dev > 1e-12 {
            failures.push(format!("n={n}: Fourier statistic {stat} vs {value}"));
        }
    }

    // Product bound dominates the permanent magnitude on random matrices.
    let mut rng = ChaCha8Rng::seed_from_u64(909);
    let mut min_margin = f64::INFINITY;
    for k in 0..10_000usize {
        let n = 2 + k % 5; // sizes 2..=6
        let a = DMatrix::from_fn(n, n, |_, _| {
            C64::new(rng.gen::<f64>() * 2.0 - 1.0, rng.gen::<f64>() * 2.0 - 1.0)
        });
        let bound = carlen_bound(&a).unwrap();
        let perm = ryser_permanent(&a).unwrap().norm();
        min_margin = min_margin.min(bound - perm);
        if perm > bound + 1e-12 {
            failures.push(format!("sample {k} (n={n}): |perm| {perm} exceeds bound {bound}"));
        }
    }

    let mut sweep_detail = String::new();
    for n in 3..=5usize {
        let sweep = conjecture_sweep(n, 1000, 4040 + n as u64).unwrap();
        if !sweep.violations.is_empty() {
            failures.push(format!("n={n}: {} bound violations", sweep.violations.len()));
        }
        if (sweep.fourier_value - sweep.bound).abs() > 1e-12 {
            failures.push(format!(
                "n={n}: Fourier value {} vs bound {}",
                sweep.fourier_value, sweep.bound
            ));
        }
        sweep_detail.push_str(&format!(
            " n={n} max random {:.4} <= bound {:.4};",
            sweep.max_random_value, sweep.bound
        ));
    }

    report(
        9,
        "interference bound sweeps",
        &failures,
        &format!(
            "Fourier statistic n!/n^n at 1e-12 (max dev {max_fourier_dev:.2e}); product bound \
             dominates 10^4 permanents (min margin {min_margin:.2e});{sweep_detail}"
        ),
        t0,
    );
}

#[test]
fn criterion_10_eight_photon_scaling() {
    let t0 = Instant::now();
    let mut failures = Vec::new();
    let n = 8usize;
    assert!(n <= DEFAULT_ENUMERATION_CAP);

    let design = build_sparse_unitary(n).unwrap();
    let gc = connectivity_graph(design.unitary(), 1e-12).unwrap();
    let ge = enhanced_graph(&minor_graph(&gc), design.input()).unwrap();
    if !pure_cycle_check(&ge).is_pure_cycle {
        failures.push("photon graph is not a pure cycle".into());
    }

    let g = GramMatrix::random(n, n, 2024);
    let rates = all_rates(design.unitary(), &g, design.input()).unwrap();
    let configs = rates.rates.len();
    if configs != 12870 {
        failures.push(format!("enumerated {configs} configurations, expected 12870"));
    }
    let total = rates.total_rate() + rates.discard_mass;
    if (total - 1.0).abs() > 1e-9 {
        failures.push(format!("rates + discard = {total}, expected 1 within 1e-9"));
    }

    let cls = classify(&design);
    if cls.xi.len() != 1 << n {
        failures.push(format!("phase class size {}, expected {}", cls.xi.len(), 1 << n));
    }
    let even = cls.xi_with_parity(Parity::Even).len();
    if even != 1 << (n - 1) {
        failures.push(format!("even half size {even}, expected {}", 1 << (n - 1)));
    }

    match estimate(&rates, &cls) {
        Ok(est) => {
            for (&(a, b), &r_hat) in &est.pairwise {
                let truth = g.overlap(a, b).norm_sqr();
                if (r_hat - truth).abs() > 1e-9 {
                    failures.push(format!("pair ({a},{b}): {r_hat} vs {truth}"));
                }
            }
            if est.phase_abs.is_none() && est.amplitude >= 1e-6 {
                failures.push(format!("no phase despite amplitude {:.3e}", est.amplitude));
            }
        }
        Err(e) => failures.push(format!("exact estimate failed: {e}")),
    }

    let counts = sample_counts(&rates, 1_000_000, 1).unwrap();
    if counts.counts.values().sum::<u64>() + counts.discard != 1_000_000 {
        failures.push("sampled counts do not conserve shots".into());
    }
    let empirical = rates_from_counts(&counts).unwrap();
    if let Err(e) = estimate(&empirical, &cls) {
        failures.push(format!("sampled estimate failed: {e}"));
    }

    report(
        10,
        "eight-photon scaling",
        &failures,
        &format!(
            "12870 configurations, normalization within 1e-9, classify + estimate + sample \
             completed in {:.1} s",
            t0.elapsed().as_secs_f64()
        ),
        t0,
    );
}
