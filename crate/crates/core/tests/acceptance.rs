use lorentz2d::verify::{check_ids, run_check, VerifyOptions};

#[test]
fn acceptance_suite() {
    let opts = VerifyOptions::default();
    let mut failed = Vec::new();
    for id in check_ids() {
        let c = run_check(id, &opts).expect("known id");
        println!(
            "criterion {:>2} {} {}: expected {}; observed {} ({:.2}s)",
            c.id,
            if c.pass { "PASS" } else { "FAIL" },
            c.name,
            c.expected,
            c.observed,
            c.runtime.as_secs_f64()
        );
        for n in &c.notes {
            println!("    {n}");
        }
        if !c.pass {
            failed.push(c.id);
        }
    }
    assert!(failed.is_empty(), "failing criteria: {failed:?}");
}
