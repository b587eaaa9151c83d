//! Property-based checks against independent brute-force oracles.

use blockgaps::estimation::estimate_parameters;
use blockgaps::evaluation::{align_labels, dinf_distance, invert_permutation};
use blockgaps::experiments::{design_parameters, Design};
use blockgaps::lg::{build_gap_profile, cluster_1d, largest_gaps_fit};
use blockgaps::model::compute_key_parameters;
use blockgaps::bounds::{theorem1_bound, BoundInputs};
use blockgaps::{BinaryMatrix, LBMParameters, LabelAssignment};
use proptest::prelude::*;

/// Independent 1d clustering oracle: an element's class is the number of
/// sorted-adjacent pairs with spread above the threshold lying entirely at
/// or below it. Equal values always share a class (their gap is zero), so
/// labeling by value alone is exact.
fn oracle_cluster(values: &[f64], threshold: f64) -> (usize, Vec<usize>) {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let cut_uppers: Vec<f64> = sorted
        .windows(2)
        .filter(|w| w[1] - w[0] > threshold)
        .map(|w| w[1])
        .collect();
    let labels = values
        .iter()
        .map(|&v| cut_uppers.iter().filter(|&&u| u <= v).count())
        .collect();
    (cut_uppers.len() + 1, labels)
}

/// Quadruple-loop block-average oracle for parameter estimation.
fn oracle_estimate(
    x: &BinaryMatrix,
    z: &LabelAssignment,
    w: &LabelAssignment,
) -> LBMParameters {
    let g = z.class_count;
    let m = w.class_count;
    let mut alpha = vec![vec![0.0f64; m]; g];
    for k in 0..g {
        for l in 0..m {
            let mut sum = 0.0;
            let mut cells = 0.0;
            for i in 0..x.n() {
                for j in 0..x.d() {
                    if z.labels[i] == k && w.labels[j] == l {
                        sum += x.get(i, j) as f64;
                        cells += 1.0;
                    }
                }
            }
            alpha[k][l] = sum / cells;
        }
    }
    let pi = (0..g)
        .map(|k| z.labels.iter().filter(|&&c| c == k).count() as f64 / x.n() as f64)
        .collect();
    let rho = (0..m)
        .map(|l| w.labels.iter().filter(|&&c| c == l).count() as f64 / x.d() as f64)
        .collect();
    LBMParameters { g, m, pi, rho, alpha }
}

/// Renumbers labels by first appearance so every class is occupied.
fn compact(labels: &[usize]) -> LabelAssignment {
    let mut map = std::collections::HashMap::new();
    let mut out = Vec::with_capacity(labels.len());
    for &l in labels {
        let next = map.len();
        out.push(*map.entry(l).or_insert(next));
    }
    LabelAssignment::new(out, map.len()).unwrap()
}

fn values_and_threshold() -> impl Strategy<Value = (Vec<f64>, f64)> {
    (
        prop::collection::vec(0.0f64..1.0, 1..60),
        0.01f64..0.8,
    )
}

fn small_matrix() -> impl Strategy<Value = BinaryMatrix> {
    (1usize..=10, 1usize..=10).prop_flat_map(|(n, d)| {
        prop::collection::vec(0u8..=1, n * d)
            .prop_map(move |entries| BinaryMatrix::new(n, d, entries).unwrap())
    })
}

fn permutation(len: usize) -> impl Strategy<Value = Vec<usize>> {
    Just((0..len).collect::<Vec<_>>()).prop_shuffle()
}

proptest! {
    #[test]
    fn cluster_matches_brute_force((values, threshold) in values_and_threshold()) {
        let got = cluster_1d(&values, threshold).unwrap();
        let (count, labels) = oracle_cluster(&values, threshold);
        prop_assert_eq!(got.count, count);
        prop_assert_eq!(got.labels.labels, labels);
    }

    #[test]
    fn gaps_sum_to_range((values, _) in values_and_threshold()) {
        let profile = build_gap_profile(&values).unwrap();
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = profile.gaps.iter().sum();
        prop_assert!((sum - (max - min)).abs() <= 1e-12);
    }

    #[test]
    fn class_count_below_inverse_threshold((values, threshold) in values_and_threshold()) {
        // Values live in [0, 1], so at most 1/S gaps can exceed S.
        let got = cluster_1d(&values, threshold).unwrap();
        prop_assert!((got.count as f64) < 1.0 / threshold + 1.0);
    }

    #[test]
    fn indicator_roundtrip(raw in prop::collection::vec(0usize..5, 1..40)) {
        let labels = compact(&raw);
        let indicator = labels.to_indicator();
        let back = LabelAssignment::from_indicator(&indicator, labels.class_count).unwrap();
        prop_assert_eq!(back.labels, labels.labels);
        prop_assert_eq!(back.class_count, labels.class_count);
    }

    #[test]
    fn estimation_matches_quadruple_loop(
        x in small_matrix(),
        z_raw in prop::collection::vec(0usize..3, 10),
        w_raw in prop::collection::vec(0usize..3, 10),
    ) {
        let z = compact(&z_raw[..x.n()]);
        let w = compact(&w_raw[..x.d()]);
        let got = estimate_parameters(&x, &z, &w).unwrap();
        let want = oracle_estimate(&x, &z, &w);
        prop_assert_eq!(got.pi, want.pi);
        prop_assert_eq!(got.rho, want.rho);
        prop_assert_eq!(got.alpha, want.alpha);
    }

    #[test]
    fn estimation_is_relabeling_equivariant(
        x in small_matrix(),
        z_raw in prop::collection::vec(0usize..3, 10),
        w_raw in prop::collection::vec(0usize..3, 10),
        seed in any::<u64>(),
    ) {
        let z = compact(&z_raw[..x.n()]);
        let w = compact(&w_raw[..x.d()]);
        let base = estimate_parameters(&x, &z, &w).unwrap();

        // Relabel both axes by fixed bijections derived from the seed.
        let s: Vec<usize> = {
            let mut p: Vec<usize> = (0..z.class_count).collect();
            p.rotate_left((seed as usize) % z.class_count.max(1));
            p
        };
        let t: Vec<usize> = {
            let mut p: Vec<usize> = (0..w.class_count).collect();
            p.rotate_left((seed as usize / 7) % w.class_count.max(1));
            p
        };
        let z2 = LabelAssignment::new(
            z.labels.iter().map(|&k| s[k]).collect(),
            z.class_count,
        ).unwrap();
        let w2 = LabelAssignment::new(
            w.labels.iter().map(|&l| t[l]).collect(),
            w.class_count,
        ).unwrap();
        let relabeled = estimate_parameters(&x, &z2, &w2).unwrap();

        // Class s[k] of the relabeled fit is class k of the base fit.
        for k in 0..z.class_count {
            prop_assert_eq!(relabeled.pi[s[k]], base.pi[k]);
            for l in 0..w.class_count {
                prop_assert_eq!(relabeled.alpha[s[k]][t[l]], base.alpha[k][l]);
            }
        }
        for l in 0..w.class_count {
            prop_assert_eq!(relabeled.rho[t[l]], base.rho[l]);
        }
    }

    #[test]
    fn alignment_recovers_common_permutation(
        raw in prop::collection::vec(0usize..4, 4..40),
    ) {
        let truth = compact(&raw);
        let c = truth.class_count;
        for rot in 0..c {
            let mut s: Vec<usize> = (0..c).collect();
            s.rotate_left(rot);
            let est = LabelAssignment::new(
                truth.labels.iter().map(|&k| s[k]).collect(),
                c,
            ).unwrap();
            let result = align_labels(&est, &truth).unwrap();
            prop_assert!(result.equivalent);
            prop_assert_eq!(result.agreement, 1.0);
            // The alignment must undo s: estimated class s[k] maps back to k.
            let perm = result.permutation.unwrap();
            prop_assert_eq!(invert_permutation(&perm), s);
        }
    }

    #[test]
    fn dinf_is_zero_under_matching_permutation(
        pi_raw in prop::collection::vec(0.05f64..1.0, 2..5),
        rho_raw in prop::collection::vec(0.05f64..1.0, 2..5),
        alpha_raw in prop::collection::vec(0.0f64..=1.0, 16),
        s in permutation(4),
        t in permutation(4),
    ) {
        let g = pi_raw.len();
        let m = rho_raw.len();
        let pi_sum: f64 = pi_raw.iter().sum();
        let rho_sum: f64 = rho_raw.iter().sum();
        let pi: Vec<f64> = pi_raw.iter().map(|p| p / pi_sum).collect();
        let rho: Vec<f64> = rho_raw.iter().map(|p| p / rho_sum).collect();
        let alpha: Vec<Vec<f64>> = (0..g)
            .map(|k| alpha_raw[k * m..(k + 1) * m].to_vec())
            .collect();
        let theta = LBMParameters { g, m, pi, rho, alpha };
        let s = &s[..g];
        let t = &t[..m];
        let s = compact(s).labels;
        let t = compact(t).labels;

        let permuted = LBMParameters {
            g,
            m,
            pi: s.iter().map(|&k| theta.pi[k]).collect(),
            rho: t.iter().map(|&l| theta.rho[l]).collect(),
            alpha: s.iter()
                .map(|&k| t.iter().map(|&l| theta.alpha[k][l]).collect())
                .collect(),
        };
        let dist = dinf_distance(&theta, &permuted, Some(&s), Some(&t)).unwrap();
        prop_assert_eq!(dist, 0.0);
    }

    #[test]
    fn fit_commutes_with_transpose(x in small_matrix()) {
        let (s_g, s_m) = (0.3, 0.2);
        let direct = largest_gaps_fit(&x, s_g, s_m).unwrap();
        let swapped = largest_gaps_fit(&x.transpose(), s_m, s_g).unwrap();
        prop_assert_eq!(direct.g_hat, swapped.m_hat);
        prop_assert_eq!(direct.m_hat, swapped.g_hat);
        prop_assert_eq!(&direct.z_hat.labels, &swapped.w_hat.labels);
        prop_assert_eq!(&direct.w_hat.labels, &swapped.z_hat.labels);
        prop_assert_eq!(&direct.theta_hat.pi, &swapped.theta_hat.rho);
        for k in 0..direct.g_hat {
            for l in 0..direct.m_hat {
                prop_assert_eq!(
                    direct.theta_hat.alpha[k][l],
                    swapped.theta_hat.alpha[l][k]
                );
            }
        }
    }

    #[test]
    fn fit_is_row_permutation_equivariant(
        x in small_matrix(),
        seed in any::<u64>(),
    ) {
        let n = x.n();
        let shift = (seed as usize) % n;
        let perm: Vec<usize> = (0..n).map(|i| (i + shift) % n).collect();
        let entries: Vec<u8> = perm.iter().flat_map(|&i| x.row(i).to_vec()).collect();
        let shuffled = BinaryMatrix::new(n, x.d(), entries).unwrap();

        let (s_g, s_m) = (0.3, 0.2);
        let a = largest_gaps_fit(&x, s_g, s_m).unwrap();
        let b = largest_gaps_fit(&shuffled, s_g, s_m).unwrap();
        prop_assert_eq!(a.g_hat, b.g_hat);
        prop_assert_eq!(a.m_hat, b.m_hat);
        // Classes are numbered by segment mean, so labels transport
        // through the row permutation unchanged.
        for (pos, &orig) in perm.iter().enumerate() {
            prop_assert_eq!(b.z_hat.labels[pos], a.z_hat.labels[orig]);
        }
        prop_assert_eq!(&a.w_hat.labels, &b.w_hat.labels);
        prop_assert_eq!(&a.theta_hat.alpha, &b.theta_hat.alpha);
    }

    #[test]
    fn theorem_bound_monotone_in_t(
        t1 in 0.01f64..0.3,
        scale in 1.1f64..4.0,
    ) {
        let params = design_parameters(Design::Balanced, 0.05).unwrap();
        let key = compute_key_parameters(&params);
        let mk = |t: f64| BoundInputs {
            key: key.clone(),
            g_star: 5,
            m_star: 4,
            n: 900,
            d: 900,
            s_g: key.delta_pi / 2.0,
            s_m: key.delta_rho / 2.0,
            t,
        };
        let lo = theorem1_bound(&mk(t1)).unwrap();
        let hi = theorem1_bound(&mk(t1 * scale)).unwrap();
        prop_assert!(hi.raw_total <= lo.raw_total);
    }

    #[test]
    fn theorem_bound_shrinks_when_both_sizes_double(
        base in 600usize..1500,
    ) {
        // Monotone only jointly: the row deviation term 4n exp(-c d) grows
        // in n at fixed d, but doubling both sizes past the exponential
        // turnover always shrinks the total.
        let params = design_parameters(Design::Balanced, 0.05).unwrap();
        let key = compute_key_parameters(&params);
        let mk = |s: usize| BoundInputs {
            key: key.clone(),
            g_star: 5,
            m_star: 4,
            n: s,
            d: s,
            s_g: key.delta_pi / 2.0,
            s_m: key.delta_rho / 2.0,
            t: 0.1,
        };
        let small = theorem1_bound(&mk(base)).unwrap();
        let large = theorem1_bound(&mk(base * 2)).unwrap();
        prop_assert!(large.raw_total <= small.raw_total);
    }
}
