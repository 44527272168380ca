//! Searches small piece counts for paradoxical labelings of a window of Z,
//! where none can exist, and of a ball in F_2.

use folner::paradox::search_small_paradox;
use folner::{Element, FiniteWindow, GroupModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let z = GroupModel::lattice(1);
    let window = FiniteWindow::new((-10..=10).map(|k| Element::Lattice(vec![k])));
    let pool = FiniteWindow::new((-1..=1).map(|k| Element::Lattice(vec![k])));
    let rep = search_small_paradox(&z, &window, &pool, 6, 1 << 12)?;
    print!("{}", rep.to_csv());

    let f2 = GroupModel::free(2);
    let pool = f2.parse_window(&["", "a", "A", "b", "B"])?;
    let rep = search_small_paradox(&f2, &f2.word_ball(3)?, &pool, 4, 1 << 12)?;
    print!("{}", rep.to_csv());
    Ok(())
}
