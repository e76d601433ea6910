//! Every example under `examples/` runs to completion.

mod theory_curve {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/theory_curve.rs"));
}

#[test]
fn theory_curve_runs() {
    theory_curve::run_example().expect("theory_curve example should run");
}

mod channel_model {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/channel_model.rs"));
}

#[test]
fn channel_model_runs() {
    channel_model::run_example().expect("channel_model example should run");
}

mod deceiving_channel {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/deceiving_channel.rs"));
}

#[test]
fn deceiving_channel_runs() {
    deceiving_channel::run_example().expect("deceiving_channel example should run");
}

mod phase_optimization {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/phase_optimization.rs"));
}

#[test]
fn phase_optimization_runs() {
    phase_optimization::run_example().expect("phase_optimization example should run");
}

mod key_generation {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/key_generation.rs"));
}

#[test]
fn key_generation_runs() {
    key_generation::run_example().expect("key_generation example should run");
}

mod sparse_sensing {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/sparse_sensing.rs"));
}

#[test]
fn sparse_sensing_runs() {
    sparse_sensing::run_example().expect("sparse_sensing example should run");
}

mod baseline_attackers {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/baseline_attackers.rs"));
}

#[test]
fn baseline_attackers_runs() {
    baseline_attackers::run_example().expect("baseline_attackers example should run");
}

mod attack_point {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/attack_point.rs"));
}

#[test]
fn attack_point_runs() {
    attack_point::run_example().expect("attack_point example should run");
}

mod twoway_attack {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/twoway_attack.rs"));
}

#[test]
fn twoway_attack_runs() {
    twoway_attack::run_example().expect("twoway_attack example should run");
}

mod figure_sweep {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/figure_sweep.rs"));
}

#[test]
fn figure_sweep_runs() {
    figure_sweep::run_example().expect("figure_sweep example should run");
}

mod scenario_file {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenario_file.rs"));
}

#[test]
fn scenario_file_runs() {
    scenario_file::run_example().expect("scenario_file example should run");
}

mod self_check {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/self_check.rs"));
}

#[test]
fn self_check_runs() {
    self_check::run_example().expect("self_check example should run");
}
