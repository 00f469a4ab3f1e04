//! Acceptance suite: every verification target of the project, each with
//! its tolerance pinned in code and a hard runtime budget. One test per
//! criterion; the test name carries the criterion number and the body
//! prints a pass line with the measured figures.
//!
//! The tests serialize on a global lock so the runtime budgets are
//! measured with the whole machine available.

use std::process::Command;
use std::sync::{Mutex, MutexGuard, OnceLock};
use std::time::{Duration, Instant};
use trisigma::certifier::{self, Axis, GridSpec};
use trisigma::kernel;
use trisigma::spectrum::{
    self, assemble, canonical_key, scaling_study, smallest_eigenvalues, DensityOracle, PairCache,
};
use trisigma::threshold;

fn lock() -> MutexGuard<'static, ()> {
    static LOCK: OnceLock<Mutex<()>> = OnceLock::new();
    LOCK.get_or_init(|| Mutex::new(())).lock().unwrap_or_else(|e| e.into_inner())
}

fn budget(name: &str, elapsed: Duration, limit: Duration) {
    println!("{name}: {:.1} s (budget {:.0} s)", elapsed.as_secs_f64(), limit.as_secs_f64());
    assert!(elapsed <= limit, "{name} exceeded its runtime budget: {elapsed:?} > {limit:?}");
}

#[test]
fn criterion_01_kernel_cross_validation() {
    let _guard = lock();
    let start = Instant::now();
    let (lo, hi, n) = (0.05f64, 2.95f64, 200);
    let mut checked = 0;
    let mut worst_rel: f64 = 0.0;
    for i in 0..n {
        let r = lo * (hi / lo).powf(i as f64 / (n - 1) as f64);
        if (r - 1.0).abs() <= 1e-3 {
            continue;
        }
        let q = kernel::rho_quadrature(r).unwrap();
        let e = kernel::rho_elliptic(r).unwrap();
        let rel = ((q.value - e.value) / e.value).abs();
        worst_rel = worst_rel.max(rel);
        checked += 1;
        assert!(rel <= 1e-8, "criterion 1: rel diff {rel:.3e} at r = {r}");
    }
    println!("criterion 1: PASS - {checked} radii, worst relative gap {worst_rel:.3e}");
    budget("criterion 1", start.elapsed(), Duration::from_secs(10));
}

#[test]
fn criterion_02_kernel_asymptotics_certified() {
    let _guard = lock();
    let start = Instant::now();
    // 5000 log-spaced distances, both sides of the singularity: 10^4 points
    let report =
        certifier::certify_rho_asymptotics(&certifier::rho_asymptotics_grid(5000), 1.0).unwrap();
    assert!(report.passed && report.worst_margin > 0.0, "margin {}", report.worst_margin);
    assert_eq!(report.skipped, 0, "criterion 2: no skipped points allowed");
    println!(
        "criterion 2: PASS - 10^4 points, worst margin {:.3e} at |r-1| = {:.3e}",
        report.worst_margin, report.worst_point[0]
    );
    budget("criterion 2", start.elapsed(), Duration::from_secs(30));
}

#[test]
fn criterion_03_trig_log_sharp_bound() {
    let _guard = lock();
    let start = Instant::now();
    let report = certifier::certify_trig_log(&certifier::trig_log_grid(100_000), 1.0).unwrap();
    // max <= 3 log 3 + 1e-12
    assert!(report.worst_margin >= -1e-12, "criterion 3 upper: margin {}", report.worst_margin);
    // equality neighborhood attained: max >= 3 log 3 - 1e-6
    assert!(report.worst_margin <= 1e-6, "criterion 3 equality: margin {}", report.worst_margin);
    println!(
        "criterion 3: PASS - 10^5 angles, max = 3 log 3 - ({:.3e}) at alpha = {:.6}",
        report.worst_margin, report.worst_point[0]
    );
    budget("criterion 3", start.elapsed(), Duration::from_secs(5));
}

#[test]
fn criterion_04_multiplier_floor() {
    let _guard = lock();
    let start = Instant::now();
    let report =
        certifier::certify_multiplier_lower(&certifier::multiplier_grid(0.05, 100, 400), 1.0)
            .unwrap();
    assert!(report.passed, "criterion 4 hard floor violated: {}", report.worst_margin);
    let min_ratio = report.worst_margin + 30.0;
    assert!(min_ratio >= 30.0, "hard floor 30");
    assert!(min_ratio >= 34.9, "expected floor 34.9, got {min_ratio}");
    println!(
        "criterion 4: PASS - min m/s^2 = {min_ratio:.4} at (s, alpha) = ({:.4}, {:.4})",
        report.worst_point[0], report.worst_point[1]
    );
    budget("criterion 4", start.elapsed(), Duration::from_secs(60));
}

#[test]
fn criterion_05_cauchy_schwarz_factor() {
    let _guard = lock();
    let start = Instant::now();
    let report =
        certifier::certify_cauchy_schwarz_factor(&certifier::cauchy_schwarz_grid(0.05, 100, 400), 1.0)
            .unwrap();
    assert!(report.passed, "criterion 5: sup exceeded 101/200");
    let worst_factor = 101.0 / 200.0 - report.worst_margin;
    assert!(
        worst_factor <= 198.0 / 395.0 + 1e-12,
        "criterion 5: worst factor {worst_factor} above 198/395"
    );
    println!("criterion 5: PASS - sup factor {worst_factor:.9} <= 198/395 = {:.9}", 198.0 / 395.0);
    budget("criterion 5", start.elapsed(), Duration::from_secs(60));
}

#[test]
fn criterion_06_threshold_location() {
    let _guard = lock();
    let start = Instant::now();
    let grid = threshold::default_grid();
    let eps_star = threshold::max_epsilon(1e-3, &grid).unwrap();
    assert!((eps_star - 0.104).abs() <= 0.005, "criterion 6: threshold {eps_star}");
    let arc = threshold::eps_prime_of(eps_star);
    assert!((arc - 0.063).abs() <= 0.003, "criterion 6: arc half-width {arc}");

    // doubling the grid moves the crossing by less than 2e-3
    let doubled = GridSpec::new(vec![Axis::log(1e-2, 1.0, 800), Axis::periodic(1440)]);
    let eps_doubled = threshold::max_epsilon(1e-3, &doubled).unwrap();
    assert!(
        (eps_star - eps_doubled).abs() < 2e-3,
        "criterion 6: grid sensitivity {} vs {}",
        eps_star,
        eps_doubled
    );

    // the 1/20 regime keeps a strictly positive margin
    let margin = threshold::lhs_inf(0.05, &grid).unwrap() - threshold::rhs_sup(0.05, &grid).unwrap();
    assert!(margin > 0.0, "criterion 6: margin at 1/20 is {margin}");

    println!(
        "criterion 6: PASS - threshold {eps_star:.4} (doubled grid {eps_doubled:.4}), arc {arc:.4}, margin at 1/20 = {margin:.3}"
    );
    budget("criterion 6", start.elapsed(), Duration::from_secs(300));
}

#[test]
fn criterion_07_localized_support_inequality() {
    let _guard = lock();
    let start = Instant::now();
    for eps_prime in [0.03, 0.061] {
        let report =
            certifier::certify_step5(eps_prime, &certifier::step5_grid(21), 1.0).unwrap();
        assert!(
            report.passed,
            "criterion 7: failed at eps' = {eps_prime}, margin {}",
            report.worst_margin
        );
        println!(
            "criterion 7: PASS at eps' = {eps_prime} - margin {:.4e}",
            report.worst_margin
        );
    }
    budget("criterion 7", start.elapsed(), Duration::from_secs(120));
}

#[test]
fn criterion_08_spectrum_end_to_end() {
    let _guard = lock();
    let start = Instant::now();
    let cache = PairCache::new(2 * 24 + 1);

    // (a) constant mode in the kernel, (b) positivity, at N in {4,8,12,16}
    for n in [4i64, 8, 12, 16] {
        let m = assemble(&cache, n, 0).unwrap();
        let pos = m.mode_position([0, 0, 0]).unwrap();
        let mut e0 = vec![0.0; m.dim()];
        e0[pos] = 1.0;
        let image = m.matvec(&e0);
        let image_norm = image.iter().map(|x| x * x).sum::<f64>().sqrt();
        assert!(
            image_norm <= 1e-6 * m.frobenius_norm(),
            "criterion 8a at N = {n}: |M e0| = {image_norm:.3e}"
        );

        let eigenvalues = smallest_eigenvalues(&m, m.dim());
        let scale = eigenvalues.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!(
            eigenvalues[0] >= -1e-8 * scale,
            "criterion 8b at N = {n}: lambda_min = {:.3e}",
            eigenvalues[0]
        );
        println!(
            "criterion 8ab: PASS at N = {n} - |M e0|/|M|_F = {:.2e}, lambda_min = {:+.2e}",
            image_norm / m.frobenius_norm(),
            eigenvalues[0]
        );
    }

    // (c) monotone lambda_min over nested truncations and (d) decay fit
    let study = scaling_study(&cache, &[8, 12, 16, 20, 24]).unwrap();
    for w in study.rows.windows(2) {
        assert!(
            w[1].lambda_min <= w[0].lambda_min + 1e-12,
            "criterion 8c: lambda_min grew from N = {} to {}",
            w[0].n_max,
            w[1].n_max
        );
    }
    // The raw log-log slope is still preasymptotic at desk scale (the
    // prefactor of the N^-2 log N law keeps drifting); the power-law part
    // of lambda = c N^p log N is the exponent the model speaks about.
    let p = study.log_adjusted_exponent;
    assert!(
        (-2.5..=-1.5).contains(&p),
        "criterion 8d: log-adjusted exponent {p} outside [-2.5, -1.5]"
    );
    println!(
        "criterion 8cd: PASS - lambda_min(8..24) = {:?}, exponent {p:.3} (raw slope {:.3}, R^2 {:.4})",
        study.rows.iter().map(|r| r.lambda_min).collect::<Vec<_>>(),
        study.fitted_exponent,
        study.r_squared
    );
    budget("criterion 8", start.elapsed(), Duration::from_secs(1200));
}

#[test]
fn criterion_09_pairing_oracle() {
    let _guard = lock();
    let start = Instant::now();
    let cache = PairCache::new(2);
    let oracle = DensityOracle::new();

    // every integer pair of triples with max |index| <= 2 and equal sums,
    // deduplicated by the canonical order multiset and the common sum
    let mut classes: std::collections::BTreeMap<([usize; 6], i64), ([i64; 3], [i64; 3])> =
        std::collections::BTreeMap::new();
    let range: Vec<i64> = (-2..=2).collect();
    let mut total_pairs = 0usize;
    for &k1 in &range {
        for &k2 in &range {
            for &k3 in &range {
                for &l1 in &range {
                    for &l2 in &range {
                        for &l3 in &range {
                            let k = [k1, k2, k3];
                            let l = [l1, l2, l3];
                            if k.iter().sum::<i64>() != l.iter().sum::<i64>() {
                                continue;
                            }
                            total_pairs += 1;
                            let (key, _) = canonical_key(&k, &l);
                            classes.entry((key, k.iter().sum())).or_insert((k, l));
                        }
                    }
                }
            }
        }
    }

    let mut worst_rel: f64 = 0.0;
    for ((_, _), (k, l)) in &classes {
        let fast = cache.pair_integral(*k, *l).unwrap().value;
        let slow = oracle.pair(*k, *l).unwrap();
        // relative comparison floored at 1e-3: below that scale both
        // routes run into their own quadrature floors (~1e-7 absolute)
        let denom = slow.abs().max(1e-3);
        let rel = (fast - slow).abs() / denom;
        worst_rel = worst_rel.max(rel);
        assert!(
            rel <= 1e-4,
            "criterion 9: {k:?} vs {l:?}: radial {fast:.9e}, oracle {slow:.9e}"
        );
    }
    println!(
        "criterion 9: PASS - {} pairings in {} classes, worst relative gap {worst_rel:.3e}",
        total_pairs,
        classes.len()
    );
    budget("criterion 9", start.elapsed(), Duration::from_secs(600));
}

#[test]
fn criterion_10_falsification_sanity() {
    let _guard = lock();
    let start = Instant::now();
    // library level: every certifier must detect a 100x tightened bound
    let eps = 0.05;
    let eps_prime = threshold::eps_prime_of(eps);
    let reports = vec![
        certifier::certify_rho_asymptotics(&certifier::rho_asymptotics_grid(400), 100.0).unwrap(),
        certifier::certify_aux_integrals(
            &GridSpec::new(vec![
                Axis::log(1e-5, 2.0, 30),
                Axis::log(1e-3, 0.9, 12),
                Axis::log(1e-3, 0.9, 12),
            ]),
            100.0,
        )
        .unwrap(),
        certifier::certify_psi_bounds(&certifier::psi_bounds_grid(eps, 40, 60), 100.0).unwrap(),
        certifier::certify_expansion_error(&certifier::expansion_error_grid(40, 60), 100.0)
            .unwrap(),
        certifier::certify_trig_log(&certifier::trig_log_grid(2000), 100.0).unwrap(),
        certifier::certify_multiplier_lower(&certifier::multiplier_grid(eps, 40, 60), 100.0)
            .unwrap(),
        certifier::certify_cauchy_schwarz_factor(
            &certifier::cauchy_schwarz_grid(eps, 40, 60),
            100.0,
        )
        .unwrap(),
        certifier::certify_step5(eps_prime, &certifier::step5_grid(9), 100.0).unwrap(),
    ];
    for report in &reports {
        assert!(
            !report.passed,
            "criterion 10: {} still passed under 100x tightening",
            report.lemma_id
        );
    }

    // CLI level: the tightened run exits with code 1
    let out = Command::new(env!("CARGO_BIN_EXE_trisigma"))
        .args([
            "certify", "--all", "--tighten", "100", "--grid-s", "30", "--grid-alpha", "40",
        ])
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(1), "criterion 10: tightened CLI run must exit 1");
    println!("criterion 10: PASS - all {} certifiers fail under 100x tightening, exit code 1", reports.len());
    budget("criterion 10", start.elapsed(), Duration::from_secs(300));
}

/// The concentration structure that accompanies criterion 8: at N = 24
/// at least 90% of the off-diagonal mass sits inside the union of the
/// near-diagonal region and the equal-radius band, and the multiplier
/// part alone decays at least like |k-l|^{-3} with under 5% of its mass
/// beyond |k-l| = 8. (The full matrix keeps substantial far mass inside
/// the band - pairs of equal radius and distant indices - so the 5%
/// far-field gate applies to the multiplier part, which is where the
/// cubic decay lives.)
#[test]
fn criterion_08_supplement_concentration() {
    let _guard = lock();
    let start = Instant::now();
    let cache = PairCache::new(2 * 24 + 1);
    for n in [16i64, 24] {
        let report = spectrum::concentration_report(&cache, n).unwrap();
        assert!(
            report.union_fraction >= 0.90,
            "union fraction {} at N = {n}",
            report.union_fraction
        );
        assert!(
            report.multiplier_far_fraction < 0.05,
            "multiplier far-field fraction {} at N = {n}",
            report.multiplier_far_fraction
        );
        assert!(
            report.multiplier_tail_exponent <= -3.0,
            "multiplier tail exponent {} at N = {n}",
            report.multiplier_tail_exponent
        );
        println!(
            "criterion 8 supplement: PASS at N = {n} - union {:.4}, multiplier far {:.4}, tail exponent {:.2}, full-matrix far-vs-Frobenius {:.3}",
            report.union_fraction,
            report.multiplier_far_fraction,
            report.multiplier_tail_exponent,
            report.far_to_frobenius
        );
    }
    budget("criterion 8 supplement", start.elapsed(), Duration::from_secs(600));
}
