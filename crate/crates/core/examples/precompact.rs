//! Perturbs the circle's translations so that they generate a finite group.

use folner::perturb::{precompact_perturbation, verify_perturbation};
use folner::{Entourage, GroupModel, Rational};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = GroupModel::circle();
    let u = Entourage::new(Rational::new(7, 20));
    let res = precompact_perturbation(&c, &u, &c.grid_sample(60, None)?, &c.grid_sample(12, None)?)?;
    let centers: Vec<String> = res.centers.iter().map(|x| x.to_string()).collect();
    println!("F = {{{}}} (greedy: {})", centers.join(", "), res.greedy);
    println!(
        "generated group order {:?}, |F|! = {}",
        res.group_order,
        res.factorial_bound()
    );
    let rep = verify_perturbation(&c, &res.action, &u)?;
    println!("{} entries checked, {} violations", rep.checked, rep.violations.len());
    Ok(())
}
