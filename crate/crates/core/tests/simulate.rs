use shardprice::{
    empirical_cdf, ks_distance, rlnc_innovation_rate, ArrivalModel, RankExperimentConfig,
    RankMode, SimModel, TurboModel,
};

const KS_TRIALS: usize = 100_000;

fn ks_to_closed_form(model: SimModel, seed: u64) -> f64 {
    let emp = empirical_cdf(&model, KS_TRIALS, seed);
    ks_distance(&emp, |t| model.cdf(t).unwrap())
}

#[test]
fn rateless_single_shard_is_exponential() {
    let model: SimModel = ArrivalModel::rateless(1, 4.0).unwrap().into();
    let emp = empirical_cdf(&model, KS_TRIALS, 1);
    // Exp(4): mean 0.25, sd 0.25.
    let se = 0.25 / (KS_TRIALS as f64).sqrt();
    assert!((emp.mean() - 0.25).abs() < 3.0 * se, "mean {}", emp.mean());
}

#[test]
fn uncoded_empirical_quantile_matches_inversion() {
    let model = ArrivalModel::uncoded(32, 32.0).unwrap();
    let emp = empirical_cdf(&model.into(), KS_TRIALS, 2);
    let q = model.quantile(0.95).unwrap();
    let e = emp.quantile(0.95).unwrap();
    assert!((e - q).abs() / q < 0.01, "{e} vs {q}");
}

#[test]
fn every_sampler_matches_its_closed_form() {
    let models: Vec<SimModel> = vec![
        ArrivalModel::unsharded(32, 32.0).unwrap().into(),
        ArrivalModel::uncoded(32, 32.0).unwrap().into(),
        ArrivalModel::fixed_rate(32, 64, 32.0).unwrap().into(),
        ArrivalModel::rateless(32, 32.0).unwrap().into(),
        TurboModel::new(ArrivalModel::uncoded(32, 32.0).unwrap(), 32.0).unwrap().into(),
        TurboModel::new(ArrivalModel::unsharded(32, 32.0).unwrap(), 32.0).unwrap().into(),
        TurboModel::new(ArrivalModel::fixed_rate(32, 64, 32.0).unwrap(), 16.0).unwrap().into(),
    ];
    for (i, m) in models.into_iter().enumerate() {
        let d = ks_to_closed_form(m, 100 + i as u64);
        assert!(d < 0.01, "model {m:?}: KS {d}");
    }
}

#[test]
fn ks_separates_different_models() {
    let rateless: SimModel = ArrivalModel::rateless(32, 32.0).unwrap().into();
    let uncoded = ArrivalModel::uncoded(32, 32.0).unwrap();
    let emp = empirical_cdf(&rateless, KS_TRIALS, 7);
    let d = ks_distance(&emp, |t| uncoded.cdf(t).unwrap());
    assert!(d > 0.5, "KS {d}");
}

#[test]
fn ks_critical_value_holds_across_seeds() {
    // 1.63 / sqrt(n) is the 1% critical value; allow at most one exceedance in 20 runs.
    let model: SimModel = ArrivalModel::rateless(8, 2.0).unwrap().into();
    let n = 5_000;
    let crit = 1.63 / (n as f64).sqrt();
    let exceed = (0..20)
        .filter(|&seed| {
            let emp = empirical_cdf(&model, n, seed);
            ks_distance(&emp, |t| model.cdf(t).unwrap()) >= crit
        })
        .count();
    assert!(exceed <= 1, "{exceed} exceedances");
}

#[test]
fn empirical_cdf_is_deterministic() {
    let model: SimModel =
        TurboModel::new(ArrivalModel::fixed_rate(8, 16, 4.0).unwrap(), 2.0).unwrap().into();
    let a = empirical_cdf(&model, 1000, 99);
    let b = empirical_cdf(&model, 1000, 99);
    assert_eq!(a, b);
    let one = empirical_cdf(&model, 1, 99);
    assert_eq!(one.count(), 1);
    assert!(one.samples().windows(2).all(|w| w[0] <= w[1]));
}

fn fraction(k: usize, q: u32, trials: usize, mode: RankMode) -> (f64, f64) {
    let cfg = RankExperimentConfig::new(k, q, trials, mode).unwrap();
    let r = rlnc_innovation_rate(&cfg, 42);
    (r.fraction(), r.std_error())
}

#[test]
fn innovation_negligible_over_wide_field() {
    let (f, _) = fraction(32, 1 << 16, 10_000, RankMode::FastLaneOnly);
    assert!(f <= 1e-3, "fraction {f}");
}

#[test]
fn binary_field_is_visibly_lossy() {
    let (f2, _) = fraction(32, 2, 10_000, RankMode::FastLaneOnly);
    // Expected extra receptions over GF(2) approach sum_i 1/(2^i - 1) ~ 1.61 per 33.6.
    assert!(f2 > 0.03 && f2 < 0.07, "fraction {f2}");
}

#[test]
fn innovation_nonincreasing_in_field_size() {
    let fs: Vec<(f64, f64)> = [2u32, 256, 65536]
        .iter()
        .map(|&q| fraction(16, q, 5_000, RankMode::FastLaneOnly))
        .collect();
    for w in fs.windows(2) {
        let (a, sa) = w[0];
        let (b, sb) = w[1];
        assert!(b <= a + 3.0 * (sa * sa + sb * sb).sqrt(), "{fs:?}");
    }
}

#[test]
fn rank_one_fraction_is_zero_vector_rate() {
    for q in [2u32, 256] {
        let (f, se) = fraction(1, q, 20_000, RankMode::FastLaneOnly);
        let want = 1.0 / q as f64;
        assert!((f - want).abs() < 4.0 * se.max(1e-4), "q={q}: {f} vs {want}");
    }
}

#[test]
fn mixed_mode_reaches_full_rank() {
    let cfg = RankExperimentConfig::new(32, 256, 2_000, RankMode::MixedWithUnitVectors).unwrap();
    let r = rlnc_innovation_rate(&cfg, 5);
    assert_eq!(r.trials, 2_000);
    assert!(r.receptions - r.non_innovative == 32 * 2_000);
    assert!(r.coded_receptions < r.receptions);
    assert!(r.fraction() < 0.02);
}
