// trec_eval-style evaluation (AP, MAP, GMAP, P@5) and a paired t-test
// between two runs.

use embqe::eval::{self, Qrels};
use embqe::lm;

const QRELS: &str = "\
1 0 a 1
1 0 b 0
1 0 c 1
2 0 d 1
2 0 e 2
3 0 f 1
";

const RUN_A: &str = "\
1 Q0 a 1 -1.0 A
1 Q0 b 2 -2.0 A
1 Q0 c 3 -3.0 A
2 Q0 e 1 -1.0 A
2 Q0 x 2 -2.0 A
2 Q0 d 3 -3.0 A
3 Q0 f 1 -0.5 A
";

const RUN_B: &str = "\
1 Q0 b 1 -1.0 B
1 Q0 a 2 -2.0 B
2 Q0 x 1 -1.0 B
2 Q0 d 2 -2.0 B
3 Q0 y 1 -0.5 B
3 Q0 f 2 -0.7 B
";

pub fn run_example() -> anyhow::Result<()> {
    let qrels = Qrels::parse(QRELS.as_bytes())?;
    let a = eval::evaluate_run(&lm::read_run(RUN_A.as_bytes())?, &qrels, 5)?;
    let b = eval::evaluate_run(&lm::read_run(RUN_B.as_bytes())?, &qrels, 5)?;

    for (q, e) in &a.per_query {
        println!("A q{q}: AP {:.4}  P@5 {:.2}", e.ap, e.p_at_k);
    }
    // [R, N, R] with two relevant: (1/1 + 2/3) / 2
    assert!((a.per_query["1"].ap - 0.833333).abs() < 1e-6);
    println!("MAP A {:.4}  GMAP A {:.4}", a.map, a.gmap);
    println!("MAP B {:.4}  GMAP B {:.4}", b.map, b.gmap);

    let (_, ap_a, ap_b) = eval::paired_ap(&a, &b)?;
    let t = eval::paired_t_test(&ap_a, &ap_b)?;
    println!(
        "t = {:.4}, p = {:.4}, significant: {}",
        t.t_statistic, t.p_value, t.significant_at_95
    );

    let mut csv = Vec::new();
    eval::write_ap_differences_csv(&eval::ap_difference_table(&a, &b)?, &mut csv)?;
    print!("{}", String::from_utf8(csv)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> anyhow::Result<()> {
    run_example()
}
