//! Searches for Følner sets: boxes in Z^2 reach 9/10, balls in F_2 never
//! pass 1/2.

use folner::folner::{folner_search, SearchOptions, Strategy};
use folner::rational::format_rational;
use folner::{Entourage, FiniteWindow, GroupModel, Rational};

fn run(
    model: &GroupModel,
    strategy: Strategy,
    theta: Rational,
    budget: usize,
) -> Result<(), Box<dyn std::error::Error>> {
    let gens = FiniteWindow::new(model.standard_generators());
    let out = folner_search(
        model,
        &gens,
        &Entourage::identity_only(),
        &SearchOptions {
            theta,
            strategy,
            budget,
            seed: None,
        },
    )?;
    println!(
        "{} {}: target {} found={} after {} candidates, best theta {}",
        model.id(),
        strategy.name(),
        format_rational(&theta),
        out.found,
        out.evaluated,
        out.best_theta().map(|t| format_rational(&t)).unwrap_or_default()
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    run(&GroupModel::lattice(2), Strategy::Boxes, Rational::new(9, 10), 50)?;
    run(&GroupModel::free(2), Strategy::Balls, Rational::new(3, 5), 6)?;
    run(&GroupModel::lattice(1), Strategy::Local, Rational::new(19, 20), 200)?;
    Ok(())
}
