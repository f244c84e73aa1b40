use opakit::fixtures::{run_criterion, Corpus, CRITERIA};

fn criterion(id: u8) {
    let corpus = Corpus::embedded().expect("embedded corpus verifies");
    let out = run_criterion(&corpus, id);
    println!("{}", out.line());
    for c in &out.checks {
        println!("    {} {}: {}", if c.pass { "ok  " } else { "FAIL" }, c.name, c.detail);
    }
    assert!(out.pass(), "{}", out.line());
}

#[test]
fn acceptance_01_hardy_table() {
    criterion(1);
}

#[test]
fn acceptance_02_dirichlet_and_bergman_tables() {
    criterion(2);
}

#[test]
fn acceptance_03_decimal_entries() {
    criterion(3);
}

#[test]
fn acceptance_04_drury_arveson_table() {
    criterion(4);
}

#[test]
fn acceptance_05_diagonal_families() {
    criterion(5);
}

#[test]
fn acceptance_06_optimal_norms() {
    criterion(6);
}

#[test]
fn acceptance_07_shanks_counterexamples() {
    criterion(7);
}

#[test]
fn acceptance_08_residual_orthogonality() {
    criterion(8);
}

#[test]
fn acceptance_09_orthogonality_structure() {
    criterion(9);
}

#[test]
fn acceptance_10_shapiro_shields() {
    criterion(10);
}

#[test]
fn acceptance_11_weakly_inner() {
    criterion(11);
}

#[test]
fn acceptance_12_filters() {
    criterion(12);
}

#[test]
fn acceptance_13_stirling_and_cyclicity() {
    criterion(13);
}

#[test]
fn criteria_are_numbered_consecutively() {
    assert!(CRITERIA.iter().enumerate().all(|(i, c)| c.id as usize == i + 1));
}
