//! Checks the first-letter paradoxical decomposition of F_2 on growing
//! balls and shows that corrupting one rule breaks it.

use folner::paradox::{f2_standard_certificate, verify_on_window, Evaluation};
use folner::GroupModel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f2 = GroupModel::free(2);
    let cert = f2_standard_certificate();
    println!("{}", serde_json::to_string(&cert.to_json())?);
    for n in 1..=6 {
        let rep = verify_on_window(&f2, &cert, &f2.word_ball(n)?, Evaluation::Direct)?;
        println!(
            "B_{n}: {} points, {} interior violations, {} boundary defects",
            rep.window_size,
            rep.interior_violations(),
            rep.boundary_defects()
        );
    }
    let b4 = f2.word_ball(4)?;
    for (label, bad) in cert.single_rule_corruptions().iter().take(4) {
        let rep = verify_on_window(&f2, bad, &b4, Evaluation::Direct)?;
        println!("{label}: {} interior violations on B_4", rep.interior_violations());
    }
    Ok(())
}
