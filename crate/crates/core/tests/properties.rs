use greenedge_core::fab::{self, DeviceParams, DeviceSpec, LcaStudy};
use greenedge_core::grid::{compute_mix, CarbonIntensity, EmissionFactorTable, RegionProfile};
use greenedge_core::operational::{efficiency_per_watt, Phase, Throughput, WorkloadRecord};
use greenedge_core::tradeoff::{
    breakeven_time, indifference_time, render_surface_csv, sweep, AnalysisMode, ComparisonInput, ComparisonMode,
    EmbodiedBasis, Preference, SystemConfig, TimeResult,
};
use greenedge_core::units::{Joules, Watts};
use greenedge_core::usage::{average_power, PowerProfile, StandbyFractions, UsageScenario};
use proptest::prelude::*;

fn rel_eq(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn factor_table(factors: &[f64]) -> EmissionFactorTable {
    EmissionFactorTable::new(factors.iter().enumerate().map(|(i, f)| (format!("src{i}"), *f))).unwrap()
}

proptest! {
    #[test]
    fn mix_is_linear_over_disjoint_profiles(
        factors in prop::collection::vec(0.0..1000.0f64, 8),
        shares in prop::collection::vec(0.0..1.0f64, 8),
        split in 0usize..8,
    ) {
        let table = factor_table(&factors);
        let named: Vec<(String, f64)> = shares.iter().enumerate().map(|(i, s)| (format!("src{i}"), *s)).collect();
        let whole = compute_mix(&RegionProfile::new("w", named.clone()), &table).unwrap().g_per_kwh();
        let left = compute_mix(&RegionProfile::new("l", named[..split].to_vec()), &table).unwrap().g_per_kwh();
        let right = compute_mix(&RegionProfile::new("r", named[split..].to_vec()), &table).unwrap().g_per_kwh();
        prop_assert!(rel_eq(whole, left + right, 1e-12) || (whole - left - right).abs() < 1e-9);
    }

    #[test]
    fn mix_scales_with_shares(
        factors in prop::collection::vec(0.0..1000.0f64, 5),
        shares in prop::collection::vec(0.0..0.2f64, 5),
        k in 0.0..5.0f64,
    ) {
        let table = factor_table(&factors);
        let named = |scale: f64| -> Vec<(String, f64)> {
            shares.iter().enumerate().map(|(i, s)| (format!("src{i}"), s * scale)).collect()
        };
        let base = compute_mix(&RegionProfile::new("x", named(1.0)), &table).unwrap().g_per_kwh();
        let scaled = compute_mix(&RegionProfile::new("x", named(k)), &table).unwrap().g_per_kwh();
        prop_assert!((scaled - k * base).abs() <= 1e-9 * (1.0 + k * base));
    }

    #[test]
    fn zero_factors_give_zero_mix(shares in prop::collection::vec(0.0..1.0f64, 6)) {
        let table = factor_table(&[0.0; 6]);
        let named: Vec<(String, f64)> = shares.iter().enumerate().map(|(i, s)| (format!("src{i}"), *s)).collect();
        prop_assert_eq!(compute_mix(&RegionProfile::new("x", named), &table).unwrap().g_per_kwh(), 0.0);
    }
}

fn studies() -> Vec<LcaStudy> {
    vec![LcaStudy::new("s", 1, 1000).unwrap()]
}

fn arb_device() -> impl Strategy<Value = DeviceSpec> {
    (1.0..400.0f64, 1.0..5000.0f64, 0.01..1.0f64).prop_map(|(die, pe, fill)| {
        let max = fab::estimate_dies_per_wafer(die, 300.0).unwrap().max(1);
        let dies = ((f64::from(max) * fill) as u32).max(1);
        DeviceSpec::new(DeviceParams::new("d", 10, "s", die, dies, pe), &studies()).unwrap()
    })
}

proptest! {
    #[test]
    fn embodied_mj_is_3_6_times_kwh(device in arb_device()) {
        let mj = fab::embodied_energy_per_die(&device).megajoules();
        prop_assert!(rel_eq(mj, 3.6 * device.energy_per_die_kwh().value(), 1e-15));
    }

    #[test]
    fn more_dies_means_less_energy_per_die(pe in 1.0..5000.0f64, dies in 1u32..1000) {
        let s = studies();
        let a = DeviceSpec::new(DeviceParams::new("a", 10, "s", 1.0, dies, pe), &s).unwrap();
        let b = DeviceSpec::new(DeviceParams::new("b", 10, "s", 1.0, dies + 1, pe), &s).unwrap();
        prop_assert!(fab::embodied_energy_per_die(&b) < fab::embodied_energy_per_die(&a));
    }

    #[test]
    fn carbon_and_energy_share_a_kwh_base(device in arb_device(), g in 1.0..1000.0f64) {
        let mix = CarbonIntensity::new("r", g).unwrap();
        let carbon = fab::embodied_carbon_per_die(&device, &mix).value();
        let energy = fab::embodied_energy_per_die(&device).megajoules();
        prop_assert!(rel_eq(carbon / g, energy / 3.6, 1e-12));
    }

    #[test]
    fn module_is_exact_multiple(device in arb_device(), n in 1u32..64) {
        let s = studies();
        let d = DeviceSpec::new(
            DeviceParams::new("m", 10, "s", device.die_mm2(), device.dies_per_wafer(), device.wafer_energy().value())
                .dies_per_module(n),
            &s,
        ).unwrap();
        let fp = fab::embodied_footprint(&d, &[CarbonIntensity::new("r", 300.0).unwrap()]).unwrap();
        prop_assert_eq!(fp.energy_per_module, fp.energy_per_die * f64::from(n));
        prop_assert_eq!(fp.carbon_per_module[0].grams, fp.carbon_per_die[0].grams * f64::from(n));
    }
}

fn arb_profile() -> impl Strategy<Value = PowerProfile> {
    (0.0..50.0f64, 0.0..=1.0f64, 0.0..=1.0f64)
        .prop_map(|(active, i, s)| PowerProfile::new(active, active * i, active * i * s).unwrap())
}

proptest! {
    #[test]
    fn average_power_is_bounded_and_monotone(
        profile in arb_profile(),
        a1 in 0.001..=1.0f64, a2 in 0.001..=1.0f64,
        s1 in 0.0..=1.0f64, s2 in 0.0..=1.0f64,
    ) {
        let p = |a: f64, s: f64| average_power(&profile, &UsageScenario::new(a, s).unwrap()).value();
        let eps = 1e-12 * profile.active().value().max(1.0);
        let (lo_a, hi_a) = if a1 <= a2 { (a1, a2) } else { (a2, a1) };
        let (lo_s, hi_s) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        prop_assert!(p(lo_a, s1) <= p(hi_a, s1) + eps);
        prop_assert!(p(a1, hi_s) <= p(a1, lo_s) + eps);
        let v = p(a1, s1);
        prop_assert!(profile.sleep().value() - eps <= v && v <= profile.active().value() + eps);
    }

    #[test]
    fn full_activity_and_deep_sleep_limits(profile in arb_profile(), s in 0.0..=1.0f64) {
        prop_assert_eq!(average_power(&profile, &UsageScenario::new(1.0, s).unwrap()), profile.active());
        let near_zero = average_power(&profile, &UsageScenario::new(1e-12, 1.0).unwrap()).value();
        prop_assert!((near_zero - profile.sleep().value()).abs() <= 1e-10 * profile.active().value().max(1.0));
    }

    #[test]
    fn average_power_is_affine_in_activity(profile in arb_profile(), s in 0.0..=1.0f64, a in 0.01..0.49f64, h in 0.01..0.25f64) {
        let p = |a: f64| average_power(&profile, &UsageScenario::new(a, s).unwrap()).value();
        let d1 = p(a + h) - p(a);
        let d2 = p(a + 2.0 * h) - p(a + h);
        prop_assert!((d1 - d2).abs() <= 1e-12 * profile.active().value().max(1.0));
    }

    #[test]
    fn per_watt_round_trips(t in 0.01..5000.0f64, w in 0.01..100.0f64) {
        let r = WorkloadRecord::new("b", "d", Phase::Training, Throughput::gflops(t), Watts(w)).unwrap();
        prop_assert!(rel_eq(efficiency_per_watt(&r) * w, t, 1e-14));
    }
}

fn term() -> impl Strategy<Value = f64> {
    // discrete values make ties common enough to exercise every branch
    prop_oneof![0.0..100.0f64, (0u32..4).prop_map(f64::from)]
}

/// Independent four-way split on the signs of the embodied and power deltas.
fn expected_preference(m0: f64, m1: f64, p0: f64, p1: f64) -> Preference {
    use std::cmp::Ordering::*;
    let dm = m1.partial_cmp(&m0).unwrap();
    let dp = p1.partial_cmp(&p0).unwrap();
    match (dm, dp) {
        (Equal, Equal) => Preference::Either,
        (Less | Equal, Less | Equal) => Preference::Candidate,
        (Greater | Equal, Greater | Equal) => Preference::Incumbent,
        _ => Preference::DependsOnServiceTime,
    }
}

proptest! {
    #[test]
    fn breakeven_is_indifference_with_sunk_incumbent(m0 in term(), m1 in term(), p0 in term(), p1 in term()) {
        let input = ComparisonInput::new(Joules(m0), Joules(m1), Watts(p0), Watts(p1)).unwrap();
        let sunk = ComparisonInput::new(Joules(0.0), Joules(m1), Watts(p0), Watts(p1)).unwrap();
        prop_assert_eq!(breakeven_time(&input), indifference_time(&sunk));
    }

    #[test]
    fn swapping_roles_keeps_time_and_flips_verdict(m0 in term(), m1 in term(), p0 in term(), p1 in term()) {
        let input = ComparisonInput::new(Joules(m0), Joules(m1), Watts(p0), Watts(p1)).unwrap();
        let fwd = indifference_time(&input);
        let back = indifference_time(&input.swapped());
        match (fwd.preference(), back.preference()) {
            (Preference::DependsOnServiceTime, Preference::DependsOnServiceTime) => prop_assert_eq!(fwd, back),
            (Preference::Either, Preference::Either)
            | (Preference::Candidate, Preference::Incumbent)
            | (Preference::Incumbent, Preference::Candidate) => {}
            other => prop_assert!(false, "unexpected pair {:?} for {:?}", other, input),
        }
    }

    #[test]
    fn joint_scaling_keeps_time(m0 in term(), m1 in term(), p0 in term(), p1 in term(), k in 1e-3..1e3f64) {
        let a = ComparisonInput::new(Joules(m0), Joules(m1), Watts(p0), Watts(p1)).unwrap();
        let b = ComparisonInput::new(Joules(m0 * k), Joules(m1 * k), Watts(p0 * k), Watts(p1 * k)).unwrap();
        match (indifference_time(&a), indifference_time(&b)) {
            (TimeResult::Finite(x), TimeResult::Finite(y)) => prop_assert!(rel_eq(x.value(), y.value(), 1e-12)),
            (x, y) => prop_assert_eq!(x.preference(), y.preference()),
        }
    }

    #[test]
    fn classification_matches_sign_split(m0 in term(), m1 in term(), p0 in term(), p1 in term()) {
        let input = ComparisonInput::new(Joules(m0), Joules(m1), Watts(p0), Watts(p1)).unwrap();
        let t = indifference_time(&input);
        prop_assert_eq!(t.preference(), expected_preference(m0, m1, p0, p1));
        if let TimeResult::Finite(s) = t {
            prop_assert!(s.value() > 0.0);
            prop_assert_eq!(s.value(), (m1 - m0) / (p0 - p1));
        }
        if m1 > m0 && p1 >= p0 {
            prop_assert_eq!(t, TimeResult::Never);
        }
    }
}

fn fixture_system(name: &str, pe: f64, active: f64, standby: StandbyFractions) -> SystemConfig {
    let device = DeviceSpec::new(DeviceParams::new(name, 10, "s", 10.0, 100, pe), &studies()).unwrap();
    let workload = WorkloadRecord::new("b", name, Phase::Inference, Throughput::fps(10.0), Watts(active)).unwrap();
    let profile = workload.power_profile(standby).unwrap();
    SystemConfig::new(device, workload, profile).unwrap()
}

/// The candidate only saves power while active: both systems share the same
/// idle and sleep draw.
#[test]
fn breakeven_grows_as_activity_falls() {
    let incumbent = fixture_system("inc", 100.0, 4.0, StandbyFractions::new(0.125, 0.025).unwrap());
    let candidate = fixture_system("cand", 400.0, 1.0, StandbyFractions::new(0.5, 0.1).unwrap());
    let activity = vec![0.2, 0.4, 0.6, 0.8, 1.0];
    let sleep = vec![0.0, 0.25, 0.5, 0.75, 1.0];
    let surface = sweep(
        incumbent.clone(),
        candidate.clone(),
        activity.clone(),
        sleep.clone(),
        AnalysisMode::Breakeven,
        EmbodiedBasis::Die,
        ComparisonMode::IsoPower,
        false,
    )
    .unwrap();

    // brute force: evaluate every cell from the raw formula
    let m1 = 400.0 / 100.0 * 3.6e6;
    for (i, &a) in activity.iter().enumerate() {
        for (j, &s) in sleep.iter().enumerate() {
            let standby0 = s * 0.1 + (1.0 - s) * 0.5;
            let p0 = a * 4.0 + (1.0 - a) * standby0;
            let p1 = a * 1.0 + (1.0 - a) * standby0;
            let expected = m1 / (p0 - p1);
            let TimeResult::Finite(t) = surface.get(i, j) else { panic!("cell {i},{j}") };
            assert!(rel_eq(t.value(), expected, 1e-12), "cell {i},{j}: {} vs {expected}", t.value());
            if i > 0 {
                let prev = surface.get(i - 1, j).seconds().unwrap();
                assert!(prev >= t, "t_B must not shrink as activity falls");
            }
        }
    }

    // rendered rows run from high activity down, so columns grow downward
    let csv = render_surface_csv(&surface);
    let rows: Vec<Vec<f64>> =
        csv.lines().skip(1).map(|l| l.split(',').skip(1).map(|c| c.parse().unwrap()).collect()).collect();
    for j in 0..sleep.len() {
        for i in 1..rows.len() {
            assert!(rows[i][j] >= rows[i - 1][j]);
        }
    }
}

#[test]
fn system_against_itself_is_equivalent_everywhere() {
    let sys = fixture_system("x", 100.0, 2.0, StandbyFractions::CMOS);
    for analysis in [AnalysisMode::Breakeven, AnalysisMode::Indifference] {
        let surface = sweep(
            sys.clone(),
            sys.clone(),
            vec![0.5, 1.0],
            vec![0.0, 1.0],
            analysis,
            EmbodiedBasis::Module,
            ComparisonMode::IsoWork { demand: None },
            false,
        )
        .unwrap();
        for cell in surface.cells() {
            match analysis {
                AnalysisMode::Indifference => {
                    assert_eq!(*cell, TimeResult::DominatedByCandidate { equivalent: true })
                }
                // the incumbent's embodied energy is sunk, equal power never repays it
                AnalysisMode::Breakeven => assert_eq!(*cell, TimeResult::Never),
            }
        }
    }
}
