mod common {
    pub mod corpus;
}

use std::process::Command;

use common::corpus;
use levtt::check::CheckerConfig;
use levtt::driver::Session;
use levtt::mono;
use levtt::surface::parse_file;

fn load(path: &std::path::Path, config: CheckerConfig) -> (Session, Vec<levtt::driver::DeclReport>) {
    let mut s = Session::new(config);
    let reports = s.load(&path.display().to_string(), &corpus::read(path)).expect("corpus parses");
    (s, reports)
}

#[test]
fn accept_corpus_checks() {
    for f in corpus::files("accept") {
        for config in [CheckerConfig::internal(), CheckerConfig::internal().cumulative(true)] {
            let (_, reports) = load(&f, config);
            for r in reports {
                assert!(r.is_ok(), "{}: {} failed: {}", f.display(), r.name, r.diagnostic.unwrap());
            }
        }
    }
}

#[test]
fn cumulative_corpus_needs_the_flag() {
    for f in corpus::files("cumulative") {
        let (_, ok) = load(&f, CheckerConfig::internal().cumulative(true));
        assert!(ok.iter().all(|r| r.is_ok()), "{}", f.display());
        let (_, off) = load(&f, CheckerConfig::internal());
        assert!(off.iter().any(|r| r.diagnostic.as_ref().is_some_and(|d| d.rule == "lift-disabled")));
    }
}

#[test]
fn reject_corpus_fails_with_expected_rule() {
    let files = corpus::files("reject");
    assert!(files.len() >= 4);
    for f in files {
        let expected = corpus::expected_rule(&f);
        let (_, reports) = load(&f, CheckerConfig::internal());
        let rules: Vec<_> = reports.iter().filter_map(|r| r.diagnostic.as_ref()).map(|d| d.rule.clone()).collect();
        assert!(rules.contains(&expected), "{}: {rules:?}, expected {expected}", f.display());
    }
}

#[test]
fn parse_print_parse_is_identity() {
    for sub in ["accept", "reject", "cumulative"] {
        for f in corpus::files(sub) {
            let decls = parse_file(&corpus::read(&f)).unwrap();
            let printed: String = decls.iter().map(|d| format!("{d}\n")).collect();
            let again = parse_file(&printed).unwrap_or_else(|e| panic!("{}: {e}\n{printed}", f.display()));
            assert_eq!(decls, again, "{}", f.display());
        }
    }
}

#[test]
fn json_reports_are_deterministic() {
    let mut args = vec!["check".to_string(), "--json".to_string()];
    for sub in ["accept", "reject"] {
        args.extend(corpus::files(sub).iter().map(|p| p.display().to_string()));
    }
    let run = || Command::new(env!("CARGO_BIN_EXE_levtt")).args(&args).output().unwrap().stdout;
    let first = run();
    assert!(!first.is_empty());
    assert_eq!(first, run());
}

#[test]
fn specialization_preserves_conversion() {
    for f in corpus::files("accept") {
        let (s, _) = load(&f, CheckerConfig::internal());
        for d in &s.defs {
            let (ctx, ty, body) = mono::peel(&d.ty, &d.body);
            let sb = mono::specialize(&s.checker, &ctx, &body);
            let st = mono::specialize(&s.checker, &ctx, &ty);
            assert!(s.checker.conv(&ctx, &body, &sb), "{}: body", d.name);
            assert!(s.checker.conv(&ctx, &ty, &st), "{}: type", d.name);
            s.checker.check(&ctx, &sb, &st).unwrap_or_else(|e| panic!("{}: {e}", d.name));
        }
    }
}
