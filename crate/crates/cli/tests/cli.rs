use std::process::Command;

use bienayme::dist::load_spec;
use bienayme::SamplerTag;
use bienayme_lab::{load_dist, simulate, ExperimentConfig};

fn lab() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bienayme-lab"))
}

fn csv_for(seed: u64, threads: usize) -> String {
    let cfg = ExperimentConfig::new(
        load_dist("geometric").unwrap(),
        vec![10, 50],
        30,
        SamplerTag::Exact,
        seed,
    )
    .unwrap();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .unwrap();
    pool.install(|| simulate::to_csv(&simulate::run(&cfg).unwrap()).unwrap())
}

#[test]
fn simulate_is_deterministic_across_thread_counts() {
    let one = csv_for(11, 1);
    assert_eq!(one, csv_for(11, 4));
    assert_ne!(one, csv_for(12, 4));
}

#[test]
fn binary_writes_the_same_csv_twice() {
    let run = || {
        let out = lab()
            .args([
                "simulate",
                "--dist",
                "geometric",
                "--n",
                "20",
                "--reps",
                "5",
                "--seed",
                "3",
            ])
            .output()
            .unwrap();
        assert!(out.status.success());
        out.stdout
    };
    let a = run();
    assert_eq!(a, run());
    assert!(String::from_utf8(a)
        .unwrap()
        .starts_with("# bienayme-lab v1\n"));
}

#[test]
fn config_errors_exit_with_two() {
    for args in [
        vec!["simulate", "--dist", "nonsense"],
        vec!["simulate", "--n", "1.5"],
        vec!["simulate", "--sampler", "fast"],
        vec!["verify", "no-such-suite"],
        vec!["construct", "--preset", "cubic"],
        vec!["stochorder", "--d", "1,1", "--d2", "0"],
    ] {
        let st = lab().args(&args).output().unwrap().status;
        assert_eq!(st.code(), Some(2), "{args:?}");
    }
}

#[test]
fn bijections_suite_passes() {
    let st = lab()
        .args(["verify", "bijections", "--reps", "2000", "--seed", "1"])
        .output()
        .unwrap()
        .status;
    assert_eq!(st.code(), Some(0));
}

#[test]
fn construct_output_is_a_loadable_spec() {
    let out = lab()
        .args([
            "construct",
            "--preset",
            "power",
            "--levels",
            "3",
            "--reps",
            "50",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let d = load_spec(&text).unwrap();
    assert!(d.is_critical());
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert!(v["metadata"]["delta_2"].as_f64().unwrap() > 0.0);
}

#[test]
fn stochorder_reports_the_skew_relation() {
    let out = lab()
        .args(["stochorder", "--d", "4,0,0,0,0", "--d2", "1,1,1,1,0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["relation"], "d < d2");
    assert_eq!(v["height_d"], 1.0);
    assert_eq!(v["height_d2"], 4.0);
}
