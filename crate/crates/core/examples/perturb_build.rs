//! Assembles a perturbed translation of the circle from two Følner
//! packages and verifies it.

use folner::perturb::{build_perturbation, verify_perturbation, IndexSpec};
use folner::rational::format_rational;
use folner::{Entourage, GroupModel, Rational};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = GroupModel::circle();
    let family = [
        IndexSpec {
            e: c.parse_window(&["0", "1/5"])?,
            n: 4,
        },
        IndexSpec {
            e: c.parse_window(&["0", "2/5"])?,
            n: 4,
        },
    ];
    let u = Entourage::new(Rational::new(1, 10));
    let out = build_perturbation(&c, &family, &u, 200)?;
    for p in &out.packages {
        println!("package shift {} |F|={} |D|={}", p.shift, p.f.len(), p.d.len());
    }
    let rep = verify_perturbation(&c, &out.action, &u)?;
    println!("{} entries checked, {} violations", rep.checked, rep.violations.len());
    for row in &rep.rosenblatt {
        println!("  {}: |α(E)F|/|F| = {}", row.label, format_rational(&row.ratio));
    }
    let involutions = out.action.involution_flags(&c)?;
    println!(
        "every ψ(g) an involution: {}",
        involutions.iter().all(|f| *f == Some(true))
    );
    Ok(())
}
