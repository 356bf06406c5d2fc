use std::path::PathBuf;

use super::*;
use crate::kernel::{fmt_rational, parse_rational};

fn bundled(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(format!("{name}.scenario"))
}

fn parse(text: &str) -> Result<Scenario, ScenarioError> {
    Scenario::parse("t", text)
}

fn run(text: &str) -> Report {
    run_scenario(&parse(text).unwrap(), &Overrides::default()).unwrap()
}

fn err_line(e: &ScenarioError) -> usize {
    match e {
        ScenarioError::Parse { line, .. } | ScenarioError::Unresolved { line, .. } | ScenarioError::Budget { line, .. } => *line,
        other => panic!("no line in {other}"),
    }
}

const AFFINE: &str = "\
[budget]
depth = 6
fuel = 100000

[reals]
half = exact 1/2
beta = leftce geometric 3/4 0 1/2

[witnesses]
g = affine -1/4 1 1
";

fn with_task(task: &str) -> String {
    format!("{AFFINE}\n{task}")
}

#[test]
fn parses_sections_comments_and_defaults() {
    let sc = parse(&with_task("[task lip]  # trailing\nkind = lipschitz\nwitness = g\nd = 2\n")).unwrap();
    assert_eq!((sc.budget.depth, sc.budget.fuel), (6, 100_000));
    assert_eq!(sc.reals.len(), 2);
    assert_eq!(sc.tasks.len(), 1);
    assert_eq!(sc.tasks[0].expect, Verdict::Pass);
    assert_eq!(sc.tasks[0].line, 12);

    let bare = parse("[witnesses]\ng = constant 1/3 1\n").unwrap();
    assert_eq!((bare.budget.depth, bare.budget.fuel), (8, 1_000_000));
}

#[test]
fn parse_errors_carry_lines() {
    let cases: &[(&str, usize)] = &[
        ("depth = 3\n", 1),
        ("[budget]\n\n[bogus]\n", 3),
        ("[reals]\nx = exact one\n", 2),
        ("[reals]\nx exact 1/2\n", 2),
        ("[reals]\nx = exact 1/2\nx = exact 1/3\n", 3),
        ("[witnesses]\ng = spline 1 2\n", 2),
        ("[task a]\nkind = lipschitz\nwitness = g\n", 1),
        ("[witnesses]\ng = affine 0 1 1\n[task a]\nkind = monotone\nwitness = g\nmode = sideways\n", 6),
        ("[witnesses]\ng = affine 0 1 1\n[task a]\nkind = monotone\nwitness = g\ncolour = red\n", 6),
        ("[witnesses]\ng = affine 0 1 1\n[task a]\nkind = monotone\nwitness = g\nexpect = maybe\n", 6),
        ("[witnesses]\ng = affine 0 1 1\n[task a]\nkind = monotone\nwitness = g\n[task a]\n", 6),
        ("[task a]\nkind = dance\n", 2),
        ("[tests]\ns = finite 1/2:1/4\n", 2),
    ];
    for (text, line) in cases {
        let e = parse(text).unwrap_err();
        assert!(matches!(e, ScenarioError::Parse { .. }), "{text:?}: {e}");
        assert_eq!(err_line(&e), *line, "{text:?}: {e}");
        assert!(e.to_string().contains(&format!("line {line}")), "{e}");
    }
}

#[test]
fn unresolved_references_are_reported() {
    let cases: &[(&str, usize, &str)] = &[
        ("[task a]\nkind = lipschitz\nwitness = nope\nd = 1\n", 1, "nope"),
        ("[witnesses]\ng = interp a b 1 4\n", 2, "a"),
        ("[reals]\na = exact 1/2\nb = exact 1\n[witnesses]\ng = interp a b 1 4\n", 5, "a"),
        ("[witnesses]\nk = r-constant 1/3\nh = h k\n", 3, "k"),
        ("[witnesses]\ng = affine 0 1 1\n[task a]\nkind = solovay\nwitness = g\nalpha = x\nbeta = y\n", 3, "x"),
        ("[witnesses]\ng = affine 0 1 1\n[task a]\nkind = transform\ntest = t\nwitness = g\n", 3, "t"),
        ("[reals]\nx = exact 1/2\n[witnesses]\nk = r-constant 1/3\n[task a]\nkind = lipschitz\nwitness = k\nd = 1\n", 5, "rational witness"),
    ];
    for (text, line, name) in cases {
        let e = parse(text).unwrap_err();
        assert!(matches!(e, ScenarioError::Unresolved { .. }), "{text:?}: {e}");
        assert_eq!(err_line(&e), *line, "{text:?}: {e}");
        assert!(e.to_string().contains(name), "{e}");
    }
}

#[test]
fn budgets_are_bounded() {
    for (text, line) in [
        ("[budget]\ndepth = 0\n", 2),
        ("[budget]\ndepth = 65\n", 2),
        ("[budget]\nfuel = 0\n", 2),
        ("[budget]\nfuel = 2000000000000\n", 2),
    ] {
        let e = parse(text).unwrap_err();
        assert!(matches!(e, ScenarioError::Budget { .. }), "{e}");
        assert_eq!(err_line(&e), line);
    }
    let e = parse(&with_task("[task a]\nkind = monotone\nwitness = g\ndepth = 100\n")).unwrap_err();
    assert!(matches!(e, ScenarioError::Budget { line: 15, .. }), "{e}");

    let sc = parse(&with_task("[task a]\nkind = monotone\nwitness = g\n")).unwrap();
    let e = run_scenario(&sc, &Overrides { depth: Some(0), ..Overrides::default() }).unwrap_err();
    assert!(matches!(e, ScenarioError::Budget { .. }), "{e}");
    let e = run_scenario(&sc, &Overrides { fuel: Some(MAX_FUEL + 1), ..Overrides::default() }).unwrap_err();
    assert!(matches!(e, ScenarioError::Budget { .. }), "{e}");
}

const CHAIN: &str = "\
[reals]
alpha = leftce geometric 1/2 0 1/2
beta = leftce geometric 3/4 0 1/2

[witnesses]
g = monotone-from alpha beta backward
f = monotone-from alpha beta forward

[task late]
kind = solovay
witness = g
alpha = read
beta = beta

[task lip]
kind = lipschitz
witness = g
d = 1

[task read-alpha]
kind = extract
witness = g
from = beta
direction = backward
output = read
";

#[test]
fn tasks_run_in_dependency_order() {
    let sc = parse(CHAIN).unwrap();
    assert_eq!(sc.order(None).unwrap(), vec![1, 2, 0]);
    assert_eq!(sc.order(Some(&["late".to_string()])).unwrap(), vec![2, 0]);
    assert_eq!(sc.order(Some(&["lip".to_string()])).unwrap(), vec![1]);
    let e = sc.order(Some(&["nope".to_string()])).unwrap_err();
    assert!(matches!(e, ScenarioError::UnknownTask(_)), "{e}");

    let report = run_scenario(&sc, &Overrides { tasks: vec!["late".into()], ..Overrides::default() }).unwrap();
    let names: Vec<_> = report.tasks.iter().map(|t| t.name.as_str()).collect();
    assert_eq!(names, ["read-alpha", "late"]);
}

#[test]
fn cyclic_outputs_are_rejected() {
    let text = "\
[reals]
beta = leftce geometric 3/4 0 1/2
[witnesses]
g = affine 0 1/2 1
[task a]
kind = extract
witness = g
from = y
direction = forward
output = x
[task b]
kind = extract
witness = g
from = x
direction = forward
output = y
";
    let e = parse(text).unwrap_err();
    assert!(matches!(e, ScenarioError::Cycle(_)), "{e}");

    let dup = "[reals]\nbeta = leftce geometric 3/4 0 1/2\n[witnesses]\ng = affine 0 1/2 1\n[task a]\nkind = extract\nwitness = g\nfrom = beta\ndirection = forward\noutput = beta\n";
    assert!(matches!(parse(dup).unwrap_err(), ScenarioError::Parse { line: 5, .. }));
}

#[test]
fn expect_fail_inverts_outcome_and_keeps_counterexamples() {
    let report = run(&with_task(
        "[task sol]\nkind = solovay\nwitness = g\nalpha = half\nbeta = beta\n\n[task sol-x]\nkind = solovay\nwitness = g\nalpha = half\nbeta = beta\nexpect = fail\n",
    ));
    let (plain, inverted) = (report.task("sol").unwrap(), report.task("sol-x").unwrap());
    assert_eq!((plain.verdict, plain.outcome), (Verdict::Pass, Verdict::Pass));
    assert!(plain.violations.is_empty());
    assert_eq!((inverted.verdict, inverted.outcome), (Verdict::Pass, Verdict::Fail));
    assert!(inverted.violations.iter().any(|v| v.starts_with("expected a failure; none among")), "{inverted:?}");
    assert_eq!(report.exit_code(), 1);

    let report = run(&with_task("[task mono]\nkind = lipschitz\nwitness = g\nd = 1/4\nexpect = fail\n"));
    let t = report.task("mono").unwrap();
    assert_eq!((t.verdict, t.outcome), (Verdict::Fail, Verdict::Pass));
    assert!(!t.violations.is_empty());
    assert_eq!(report.exit_code(), 0);
}

#[test]
fn failing_tasks_carry_counterexamples() {
    let report = run(&with_task("[task lip]\nkind = lipschitz\nwitness = g\nd = 1/4\n"));
    let t = report.task("lip").unwrap();
    assert_eq!(t.outcome, Verdict::Fail);
    assert!(!t.violations.is_empty());
    assert!(report.to_string().contains("  violation: "));
}

#[test]
fn exit_codes() {
    assert_eq!(run(&with_task("[task lip]\nkind = lipschitz\nwitness = g\nd = 2\n")).exit_code(), 0);
    assert_eq!(run(&with_task("[task lip]\nkind = lipschitz\nwitness = g\nd = 1/4\n")).exit_code(), 1);
    let starved = run(&format!(
        "{AFFINE}\n[reals]\nalpha = leftce geometric 1/2 0 1/2\n[witnesses]\nslow = interp alpha beta 1 16\nh = h slow\n[task sol]\nkind = r-witness\nwitness = h\nalpha = alpha\nbeta = beta\nfuel = 50\n"
    ));
    let t = starved.task("sol").unwrap();
    assert_eq!(t.outcome, Verdict::Inconclusive, "{starved}");
    assert_eq!(starved.exit_code(), 2);
}

#[test]
fn overrides_replace_defaults_but_not_task_keys() {
    let sc = parse(&with_task("[task a]\nkind = monotone\nwitness = g\n\n[task b]\nkind = monotone\nwitness = g\ndepth = 3\nfuel = 500\n")).unwrap();
    let r = run_scenario(&sc, &Overrides { depth: Some(5), fuel: Some(7_000), ..Overrides::default() }).unwrap();
    assert_eq!((r.defaults.depth, r.defaults.fuel), (5, 7_000));
    let (a, b) = (r.task("a").unwrap(), r.task("b").unwrap());
    assert_eq!((a.depth, a.fuel), (5, 7_000));
    assert_eq!((b.depth, b.fuel), (3, 500));
}

fn check_csv(csv: &str, header: &str) {
    assert!(!csv.contains('\r'));
    assert!(csv.ends_with('\n'));
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(header));
    let width = header.split(',').count();
    for row in lines {
        let cells: Vec<_> = row.split(',').collect();
        assert_eq!(cells.len(), width, "{row}");
        for c in cells {
            if c.contains('/') {
                let q = parse_rational(c).unwrap();
                assert_eq!(fmt_rational(&q), c, "cell not in lowest terms");
            }
        }
    }
}

#[test]
fn csv_tables_are_stable() {
    let report = run_scenario_file(&bundled("randomness-closure"), &Overrides::default()).unwrap();
    let t = report.task("transform").unwrap();
    let transform = &t.tables.iter().find(|(n, _)| n == "transform").unwrap().1;
    check_csv(transform, "n,l_n,r_n,defined,hit");
    let measure = &t.tables.iter().find(|(n, _)| n == "measure").unwrap().1;
    check_csv(measure, "N,partial_measure,bound");

    let report = run_scenario_file(&bundled("pipeline-claims"), &Overrides::default()).unwrap();
    let stages = &report.task("stages").unwrap().tables[0];
    assert_eq!(stages.0, "stages");
    check_csv(&stages.1, "q,n,p_size,f,ftilde");

    let dir = tempfile::tempdir().unwrap();
    let written = emit_csv(&report, "stages", dir.path()).unwrap();
    assert_eq!(written, vec![dir.path().join("stages.stages.csv")]);
    assert_eq!(std::fs::read_to_string(&written[0]).unwrap(), stages.1);
    assert!(matches!(emit_csv(&report, "nope", dir.path()), Err(ScenarioError::UnknownTask(_))));
}

#[test]
fn reruns_are_identical() {
    for name in ["prop4-separation", "least-degree", "randomness-closure", "extraction", "pipeline-claims"] {
        let a = run_scenario_file(&bundled(name), &Overrides::default()).unwrap();
        let b = run_scenario_file(&bundled(name), &Overrides::default()).unwrap();
        assert_eq!(a.to_string(), b.to_string(), "{name}");
        for (ta, tb) in a.tasks.iter().zip(&b.tasks) {
            assert_eq!(ta.tables, tb.tables, "{name}/{}", ta.name);
        }
    }
}

#[test]
fn prop4_separation_passes_with_a_failed_monotone_check() {
    let report = run_scenario_file(&bundled("prop4-separation"), &Overrides::default()).unwrap();
    assert_eq!(report.exit_code(), 0, "{report}");
    let solovay = report.tasks.iter().find(|t| t.kind == "solovay").unwrap();
    assert_eq!(solovay.verdict, Verdict::Pass);
    let mono = report.tasks.iter().find(|t| t.kind == "monotone").unwrap();
    assert_eq!((mono.expect, mono.verdict, mono.outcome), (Verdict::Fail, Verdict::Fail, Verdict::Pass));
    assert!(!mono.violations.is_empty());
    let alone = run_scenario_file(&bundled("prop4-separation"), &Overrides { tasks: vec![mono.name.clone()], ..Overrides::default() }).unwrap();
    assert_eq!(alone.task(&mono.name).unwrap().verdict, Verdict::Fail);
}

#[test]
fn least_degree_passes() {
    let report = run_scenario_file(&bundled("least-degree"), &Overrides::default()).unwrap();
    assert_eq!(report.exit_code(), 0, "{report}");
    assert!(report.tasks.iter().filter(|t| t.kind == "r-witness").all(|t| t.verdict == Verdict::Pass));
}

#[test]
fn bundled_scenarios_validate() {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "scenario") {
            Scenario::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 6);
}

#[test]
fn missing_file_is_an_io_error() {
    let e = Scenario::load(&bundled("no-such-scenario")).unwrap_err();
    assert!(matches!(e, ScenarioError::Io { .. }), "{e}");
}
