//! Splits a permutation of Z/12 into pieces on which it is a translation.

use folner::folner::LeftTranslation;
use folner::perturb::decompose_wobbling;
use folner::{Element, FiniteWindow, GroupModel};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cyc = GroupModel::cyclic(12);
    let window = FiniteWindow::new((0..12).map(Element::Cyclic));
    // swap 2k and 2k+1
    let image: Vec<usize> = (0..12).map(|i| i ^ 1).collect();
    let pool = FiniteWindow::new([Element::Cyclic(1), Element::Cyclic(11)]);
    let action = LeftTranslation(&cyc);
    let w = decompose_wobbling(&window, &image, &pool, &action)?;
    for (g, piece) in &w.pieces {
        let pts: Vec<String> = piece.iter().map(|x| x.to_string()).collect();
        println!("translate by {g} on {{{}}}", pts.join(", "));
    }
    println!("reapplied: {:?}", w.reapply(&action).map(|v| v.len()));
    Ok(())
}
