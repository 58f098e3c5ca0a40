use routine_sentinel::audit::{
    check_battery, check_cadence, check_completeness, check_grounded, check_motion, check_privacy, check_seeks,
    check_windows, Violation,
};
use routine_sentinel::engine::EngineConfig;
use routine_sentinel::homesim::{simulate, BatteryModel, Mode, SimConfig};
use routine_sentinel::perception::ErrorModel;
use routine_sentinel::testkit::{random_instance, Instance, Limits};

fn run(inst: &Instance, seed: u64, mode: Mode, errors: ErrorModel) -> routine_sentinel::homesim::EventLog {
    let cfg = SimConfig { seed, days: inst.days, mode, errors, ..SimConfig::default() };
    simulate(&inst.plan, &inst.map, &inst.trace, &cfg).unwrap()
}

fn assert_clean(seed: u64, what: &str, v: Vec<Violation>) {
    assert!(v.is_empty(), "seed {seed} {what}: {} violations, first: {}", v.len(), v[0]);
}

#[test]
fn omniscient_logs_pass_every_audit() {
    for seed in 0..300 {
        let inst = random_instance(seed, &Limits::default());
        let log = run(&inst, seed, Mode::Omniscient, ErrorModel::ZERO);
        assert_clean(seed, "windows", check_windows(&inst.plan, &log));
        assert_clean(seed, "cadence", check_cadence(&inst.plan, &log));
        assert_clean(seed, "privacy", check_privacy(&log));
        assert_clean(seed, "grounded", check_grounded(&inst.plan, &inst.trace, &log));
        assert_clean(seed, "completeness", check_completeness(&inst.plan, &log, inst.days));
        assert_clean(seed, "seeks", check_seeks(&log, EngineConfig::default().seek_timeout));
    }
}

#[test]
fn realistic_logs_pass_every_audit() {
    let noisy = ErrorModel { p_person_swap: 0.1, p_activity_fp: 0.1, p_activity_fn: 0.1, p_object_flip: 0.1 };
    for seed in 0..300 {
        let inst = random_instance(seed, &Limits::realistic());
        for errors in [ErrorModel::ZERO, noisy] {
            let log = run(&inst, seed, Mode::Realistic, errors);
            assert_clean(seed, "windows", check_windows(&inst.plan, &log));
            assert_clean(seed, "cadence", check_cadence(&inst.plan, &log));
            assert_clean(seed, "privacy", check_privacy(&log));
            assert_clean(seed, "battery", check_battery(&log, BatteryModel::default().capacity));
            assert_clean(seed, "motion", check_motion(&inst.map, &log));
            assert_clean(seed, "seeks", check_seeks(&log, EngineConfig::default().seek_timeout));
            if errors.is_zero() {
                assert_clean(seed, "grounded", check_grounded(&inst.plan, &inst.trace, &log));
            }
        }
    }
}

#[test]
fn failing_hardware_still_passes_audits() {
    let battery = BatteryModel { capacity: 60, drain_moving: 2, drain_idle: 1, charge_rate: 4 };
    let mut offline = 0;
    for seed in 0..300 {
        let inst = random_instance(seed, &Limits::realistic());
        let cfg = SimConfig { seed, days: inst.days, battery, p_dock: 0.5, ..SimConfig::default() };
        let log = simulate(&inst.plan, &inst.map, &inst.trace, &cfg).unwrap();
        offline += log.iter().filter(|r| r.kind.name() == "offline").count();
        assert_clean(seed, "battery", check_battery(&log, 60));
        assert_clean(seed, "motion", check_motion(&inst.map, &log));
        assert_clean(seed, "privacy", check_privacy(&log));
        assert_clean(seed, "cadence", check_cadence(&inst.plan, &log));
        assert_clean(seed, "grounded", check_grounded(&inst.plan, &inst.trace, &log));
    }
    assert!(offline > 50, "only {offline} offline events");
}
