mod common;

use common::*;
use dmimo::combining::{
    compute_alpha_table, dmmse_combiner, dmmse_combiner_ls_form, dmmse_sigma_matrices,
    mmse_combiner_global, mr_combiner, obe_combiner, obe_combiner_from_estimates,
    obe_matrices_explicit, whiten_estimates, AlphaVariant, SchemeContext, SchemeRegistry,
};
use dmimo::estimation::{LinkStatistics, Pilot};
use dmimo::harness::check::{random_covariance_set, random_link};
use dmimo::rng::{self, Domain};
use dmimo::se::instantaneous_sinr;
use dmimo::{CVec, Error};
use proptest::prelude::*;
use rand::Rng;

fn link(seed: u64) -> LinkStatistics {
    random_link(&mut rng::stream(seed, Domain::Check, &[]), 8).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn dmmse_uses_the_statistical_weight(seed in any::<u64>()) {
        let stats = link(seed);
        let cov = stats.covariances();
        let (rho, rho_tr) = (stats.pilot().data_snr, stats.pilot().pilot_snr());
        let (_, beta) = coefficient_sums(cov, rho, rho_tr);
        let ctx = SchemeContext::new(stats.clone()).unwrap();
        let block = stats.draw_block(|n| rng::stream(seed, Domain::Channel, &[n as u64]));
        let whitened = whiten_estimates(&stats, &block.estimates);
        let bank = dmmse_combiner(&whitened, &ctx.beta).unwrap();
        let m = cov.antennas() as f64;
        for k in 0..2 {
            let o = 1 - k;
            let weight = beta[(k, o)] / (c(1.0 / m) + beta[(o, o)]);
            let expected: Vec<CVec> = (0..cov.num_bs())
                .map(|n| {
                    let (_, _, z) = stat_matrices(cov, n, rho, rho_tr);
                    inv(&z) * (&block.estimates[k][n] - &block.estimates[o][n] * weight)
                })
                .collect();
            let (got, want) = (stack(bank.ue(k)), stack(&expected));
            prop_assert!((&got - &want).norm() <= 1e-9 * want.norm());
        }
    }

    #[test]
    fn ls_forms_agree_with_estimate_forms(seed in any::<u64>()) {
        let stats = link(seed);
        let ctx = SchemeContext::new(stats.clone()).unwrap();
        let block = stats.draw_block(|n| rng::stream(seed, Domain::Channel, &[n as u64]));
        let whitened = whiten_estimates(&stats, &block.estimates);

        let direct = dmmse_combiner(&whitened, &ctx.beta).unwrap();
        let sigma = dmmse_sigma_matrices(&stats, &ctx.beta).unwrap();
        let via_ls = dmmse_combiner_ls_form(&sigma, &block.ls);
        let alpha = compute_alpha_table(stats.covariances(), stats.stat(), AlphaVariant::PilotAndData).unwrap();
        for k in 0..2 {
            let (a, b) = (stack(direct.ue(k)), stack(via_ls.ue(k)));
            prop_assert!((&a - &b).norm() <= 1e-9 * a.norm());

            let w = obe_matrices_explicit(&stats, &alpha, k).unwrap();
            let a = stack(&obe_combiner(&w, &block.ls));
            let b = stack(&obe_combiner_from_estimates(&stats, &block.estimates, &alpha, k));
            prop_assert!((&a - &b).norm() <= 1e-9 * a.norm());
        }
    }

    #[test]
    fn mmse_dominates_every_other_combiner(seed in any::<u64>()) {
        let stats = link(seed);
        let ctx = SchemeContext::new(stats.clone()).unwrap();
        let alpha = compute_alpha_table(stats.covariances(), stats.stat(), AlphaVariant::PilotAndData).unwrap();
        let z = &stats.stat().z;
        for b in 0..5u64 {
            let block = stats.draw_block(|n| rng::stream(seed, Domain::Channel, &[b, n as u64]));
            let whitened = whiten_estimates(&stats, &block.estimates);
            let mmse = mmse_combiner_global(&block.estimates, &whitened);
            let mr = mr_combiner(&block.estimates);
            let dmmse = dmmse_combiner(&whitened, &ctx.beta).unwrap();
            for k in 0..2 {
                let best = instantaneous_sinr(mmse.ue(k), &block.estimates, z, k).unwrap();
                let obe = obe_combiner_from_estimates(&stats, &block.estimates, &alpha, k);
                for v in [mr.ue(k), dmmse.ue(k), &obe[..]] {
                    let g = instantaneous_sinr(v, &block.estimates, z, k).unwrap();
                    prop_assert!(g <= best * (1.0 + 1e-10), "{g} > {best}");
                }
            }
        }
    }

    #[test]
    fn mmse_matches_the_dense_solve_for_three_ues(seed in any::<u64>()) {
        let mut rng = rng::stream(seed, Domain::Check, &[]);
        let n = rng.random_range(1..=3);
        let m = rng.random_range(2..=6);
        let cov = random_covariance_set(&mut rng, 3, n, m).unwrap();
        let stats = LinkStatistics::new(cov, Pilot::new(2, 1.5).unwrap()).unwrap();
        let block = stats.draw_block(|n| rng::stream(seed, Domain::Channel, &[n as u64]));
        let whitened = whiten_estimates(&stats, &block.estimates);
        let bank = mmse_combiner_global(&block.estimates, &whitened);
        let z = block_diag(&stats.stat().z);
        let h: Vec<CVec> = block.estimates.iter().map(|row| stack(row)).collect();
        for k in 0..3 {
            let mut a = z.clone();
            for (i, hi) in h.iter().enumerate() {
                if i != k {
                    a += hi * hi.adjoint();
                }
            }
            let expected = inv(&a) * &h[k];
            let got = stack(bank.ue(k));
            prop_assert!((&got - &expected).norm() <= 1e-9 * expected.norm());
        }
    }
}

#[test]
fn registry_lookup_is_case_insensitive() {
    let registry = SchemeRegistry::builtin();
    assert_eq!(
        registry.names(),
        ["MR", "MMSE", "DMMSE", "OBE_EQ6", "OBE_UATF"]
    );
    assert_eq!(registry.get("obe_uatf").unwrap().name(), "OBE_UATF");
    let err = registry.get("ZF").err().unwrap();
    assert!(matches!(err, Error::UnknownScheme(_)));
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn pair_only_schemes_refuse_three_ues() {
    let mut rng = rng::stream(3, Domain::Check, &[]);
    let cov = random_covariance_set(&mut rng, 3, 2, 4).unwrap();
    let ctx =
        SchemeContext::new(LinkStatistics::new(cov, Pilot::new(2, 1.0).unwrap()).unwrap()).unwrap();
    let registry = SchemeRegistry::builtin();
    for name in ["MR", "MMSE", "DMMSE"] {
        assert!(
            registry.get(name).unwrap().prepare(&ctx, 2).is_ok(),
            "{name}"
        );
    }
    for name in ["OBE_EQ6", "OBE_UATF"] {
        let err = registry.get(name).unwrap().prepare(&ctx, 0).err().unwrap();
        assert!(
            matches!(err, Error::UnsupportedUeCount { num_ue: 3, .. }),
            "{name}: {err}"
        );
    }
}
