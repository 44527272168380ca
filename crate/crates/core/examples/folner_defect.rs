//! Matching defects of boxes in Z^2 and balls in F_2, with the seminorm
//! values of the same certificates.

use folner::folner::{lattice_box, topological_defect};
use folner::rational::format_rational;
use folner::{Entourage, FiniteWindow, GroupModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let z2 = GroupModel::lattice(2);
    let gens = FiniteWindow::new(z2.standard_generators());
    println!("n,theta,max_p_d,bound");
    for n in [2, 5, 10, 20] {
        let cert = topological_defect(&z2, &lattice_box(&z2, n)?, &gens, &Entourage::identity_only())?;
        let b = cert.bridge_check(&z2)?;
        println!(
            "{n},{},{},{}",
            format_rational(&cert.theta),
            format_rational(&b.max_p_d()),
            format_rational(&b.bound)
        );
    }

    let f2 = GroupModel::free(2);
    let a = f2.parse_window(&["a"])?;
    for n in 1..=5 {
        let cert = topological_defect(&f2, &f2.word_ball(n)?, &a, &Entourage::identity_only())?;
        println!("F_2 ball {n}: theta = {}", format_rational(&cert.theta));
    }
    Ok(())
}
