use std::process::Command;

use hillquota::apportion::replay;
use hillquota::cli::{
    run, ApportionOutput, CheckOutput, ExactProbOutput, PdfProbOutput, TableOutput, EXIT_COMPUTATION,
    EXIT_OK, EXIT_USAGE,
};
use hillquota::{exact_uniform_probability, Arithmetic, CriteriaReport, DoubleDouble, RegionData, SampleEstimate};

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn hq(args: &[&str]) -> Run {
    hq_stdin(args, "")
}

fn hq_stdin(args: &[&str], input: &str) -> Run {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("hillquota").chain(args.iter().copied());
    let code = run(argv, &mut input.as_bytes(), &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn ok(args: &[&str]) -> String {
    let r = hq(args);
    assert_eq!(r.code, EXIT_OK, "{args:?} failed: {}", r.err);
    r.out
}

#[test]
fn apportion_gives_one_seat_each_at_house_size_three() {
    let out: ApportionOutput = serde_json::from_str(&ok(&["apportion", "--pops", "10,20,30", "--seats", "3"])).unwrap();
    assert_eq!(out.apportionment.seats(), &[1, 1, 1]);
    assert_eq!(out.arithmetic, Arithmetic::Exact);
}

#[test]
fn decimal_populations_take_the_float_path() {
    let out: ApportionOutput =
        serde_json::from_str(&ok(&["apportion", "--pops", "0.4,0.5,2.1", "--seats", "3"])).unwrap();
    assert_eq!(out.arithmetic, Arithmetic::Float);
    let out: ApportionOutput = serde_json::from_str(&ok(&[
        "apportion", "--pops", "0.4,0.5,2.1", "--seats", "3", "--arithmetic", "exact",
    ]))
    .unwrap();
    assert_eq!(out.arithmetic, Arithmetic::Exact);
}

#[test]
fn trace_replays_to_the_apportionment() {
    let text = ok(&["apportion", "--pops", "2560,3315,995,5012,1203", "--seats", "40", "--trace"]);
    let out: ApportionOutput = serde_json::from_str(&text).unwrap();
    let trace = out.trace.expect("trace requested");
    assert_eq!(trace.len(), 35);
    assert_eq!(replay(5, &trace), out.apportionment);
    let divisor: ApportionOutput = serde_json::from_str(&ok(&[
        "apportion", "--pops", "2560,3315,995,5012,1203", "--seats", "40", "--method", "divisor",
    ]))
    .unwrap();
    assert_eq!(divisor.apportionment, out.apportionment);
}

#[test]
fn populations_from_stdin() {
    let r = hq_stdin(&["apportion", "--pops", "-", "--seats", "6", "--format", "csv"], "10\n20\n30\n");
    assert_eq!(r.code, EXIT_OK, "{}", r.err);
    assert_eq!(r.out, "state,seats\n0,1\n1,2\n2,3\n");
}

#[test]
fn check_reports_the_lower_violation() {
    let text = ok(&["check", "--pops", "4,5,21", "--seats", "3"]);
    let out: CheckOutput = serde_json::from_str(&text).unwrap();
    assert!(out.report.has_lower);
    assert_eq!(out.report.seats().seats(), &[1, 1, 1]);
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["report"]["per_state"][2]["class"], "LOWER");
}

#[test]
fn criteria_json_and_text() {
    let report: CriteriaReport =
        serde_json::from_str(&ok(&["criteria", "--quotas", "0.4,0.5,2.1", "--seats", "3"])).unwrap();
    assert!(report.holds);
    assert_eq!(report.arithmetic, Arithmetic::Exact);
    let text = ok(&["criteria", "--quotas", "0.4,0.5,2.1", "--seats", "3", "--format", "text"]);
    assert!(text.starts_with("violation: true"));
    let r = hq(&["criteria", "--quotas", "1,2", "--seats", "3"]);
    assert_eq!(r.code, EXIT_USAGE);
}

#[test]
fn exact_prob_in_rational_precision() {
    let out: ExactProbOutput =
        serde_json::from_str(&ok(&["exact-prob", "--seats", "3", "--precision", "rational"])).unwrap();
    assert_eq!(out.fraction.as_deref(), Some("1/3"));
    let r = hq(&["exact-prob", "--seats", "5", "--precision", "rational"]);
    assert_eq!(r.code, EXIT_COMPUTATION);
    let cells: ExactProbOutput =
        serde_json::from_str(&ok(&["exact-prob", "--seats", "10", "--list-cells"])).unwrap();
    let cells = cells.cells.unwrap();
    let covered: f64 = cells.iter().map(|c| c.cell_area).sum();
    assert!((covered - 100.0 / 6.0).abs() < 1e-9);
}

#[test]
fn pdf_prob_three_seats() {
    let out: PdfProbOutput =
        serde_json::from_str(&ok(&["pdf-prob", "--seats", "3", "--dist", "uniform:0:1000"])).unwrap();
    assert!((out.probability - 0.125).abs() < 1e-9);
    let simplex: PdfProbOutput =
        serde_json::from_str(&ok(&["pdf-prob", "--seats", "10", "--dist", "simplex"])).unwrap();
    assert!((simplex.probability - 0.04904).abs() < 1e-5);
    assert_eq!(hq(&["pdf-prob", "--seats", "3", "--dist", "normal:0:1"]).code, EXIT_USAGE);
    assert_eq!(hq(&["pdf-prob", "--seats", "3", "--dist", "simplex", "--tol", "1e-20"]).code, EXIT_USAGE);
}

#[test]
fn sample_is_reproducible() {
    let args = ["sample", "--mode", "quotas", "--seats", "10", "--samples", "5000", "--seed", "4"];
    let a: SampleEstimate = serde_json::from_str(&ok(&args)).unwrap();
    let b: SampleEstimate = serde_json::from_str(&ok(&[&args[..], &["--workers", "3"]].concat())).unwrap();
    assert_eq!(a, b);
    assert!(a.ci_low <= a.p_hat && a.p_hat <= a.ci_high);
    let pops: SampleEstimate = serde_json::from_str(&ok(&[
        "sample", "--mode", "populations", "--seats", "5", "--samples", "2000", "--seed", "1", "--cross-check",
    ]))
    .unwrap();
    assert!(pops.dist.is_some());
    let r = hq(&["sample", "--mode", "quotas", "--seats", "5", "--samples", "10", "--seed", "1", "--dist", "uniform:0:1"]);
    assert_eq!(r.code, EXIT_USAGE);
}

#[test]
fn region_formats() {
    let data: RegionData =
        serde_json::from_str(&ok(&["region", "--seats", "100", "--floor1", "20", "--floor2", "27"])).unwrap();
    assert!(data.empty);
    let csv = ok(&["region", "--seats", "10", "--floor1", "0", "--floor2", "1", "--format", "csv"]);
    assert!(csv.contains("element,id,kind,x,y"));
    assert_eq!(csv.lines().filter(|l| l.starts_with("vertex,")).count(), 3);
    let svg = ok(&["region", "--seats", "10", "--floor1", "0", "--floor2", "1", "--format", "svg"]);
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("id=\"feasible\""));
    assert_eq!(svg.matches("<polyline").count(), 3);
    let r = hq(&["region", "--seats", "10", "--floor1", "9", "--floor2", "9"]);
    assert_eq!(r.code, EXIT_COMPUTATION);
}

#[test]
fn table_theoretical_column_is_seed_independent() {
    let run = |seed: &str| -> TableOutput {
        serde_json::from_str(&ok(&["table", "--which", "uniform", "--seats", "3,5,10", "--samples", "2000", "--seed", seed]))
            .unwrap()
    };
    let (a, b) = (run("1"), run("2"));
    for (ra, rb) in a.rows.iter().zip(&b.rows) {
        assert_eq!(ra.theoretical, rb.theoretical);
        let exact = exact_uniform_probability::<DoubleDouble>(ra.seats).unwrap().hi();
        assert_eq!(ra.theoretical, exact);
    }
    let csv = ok(&["table", "--which", "iid", "--seats", "3", "--samples", "1000", "--seed", "1", "--format", "csv"]);
    assert!(csv.starts_with("M,theoretical,sampled,ci_low,ci_high\n3,0.12"));
}

#[test]
fn errors_are_json_with_distinct_exit_codes() {
    let r = hq(&["apportion", "--seats", "3"]);
    assert_eq!(r.code, EXIT_USAGE);
    let last = r.err.lines().last().unwrap();
    let v: serde_json::Value = serde_json::from_str(last).unwrap();
    assert_eq!(v["error"]["kind"], "usage");

    let r = hq(&["apportion", "--pops", "10,10,30", "--seats", "3"]);
    assert_eq!(r.code, EXIT_COMPUTATION);
    let v: serde_json::Value = serde_json::from_str(r.err.trim()).unwrap();
    assert_eq!(v["error"]["kind"], "computation");

    assert_eq!(hq(&["apportion", "--pops", "1,2,3", "--seats", "2"]).code, EXIT_COMPUTATION);
    assert_eq!(hq(&["check", "--pops", "1,2", "--seats", "3", "--format", "svg"]).code, EXIT_USAGE);
    assert_eq!(hq(&["apportion", "--pops", "1,2", "--seats", "3", "--method", "divisor", "--trace"]).code, EXIT_USAGE);
    assert_eq!(hq(&["apportion", "--pops", "1,x", "--seats", "3"]).code, EXIT_USAGE);
    assert_eq!(hq(&["--help"]).code, EXIT_OK);
}

#[test]
fn binary_entry_point() {
    let out = Command::new(env!("CARGO_BIN_EXE_hillquota"))
        .args(["apportion", "--pops", "10,20,30", "--seats", "6", "--format", "text"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("[1, 2, 3]"));
    let out = Command::new(env!("CARGO_BIN_EXE_hillquota")).arg("bogus").output().unwrap();
    assert_eq!(out.status.code(), Some(EXIT_USAGE));
}
