//! Builds each group model, multiplies a few elements and prints word-ball
//! growth next to the closed forms.

use folner::group::{free_ball_size, lattice_ball_size};
use folner::rational::format_rational;
use folner::GroupModel;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let f2 = GroupModel::free(2);
    let x = f2.parse_element("ab")?;
    let y = f2.parse_element("BA")?;
    println!(
        "F_2: ab * BA = {:?}, |ab| = {}",
        f2.mul(&x, &y)?.to_string(),
        format_rational(&f2.norm(&x)?)
    );

    let h = GroupModel::heisenberg();
    let g = h.parse_element("1,0,0")?;
    let k = h.parse_element("0,1,0")?;
    let comm = h.mul(&h.mul(&g, &k)?, &h.mul(&h.inv(&g)?, &h.inv(&k)?)?)?;
    println!("heisenberg: [x, y] = {comm}");

    let c = GroupModel::circle();
    let d = c.distance(&c.parse_element("1/10")?, &c.parse_element("9/10")?)?;
    println!("circle: d(1/10, 9/10) = {}", format_rational(&d));

    println!("radius,free_ball,closed_form,lattice_ball,closed_form");
    let z = GroupModel::lattice(1);
    for n in 0..=6 {
        println!(
            "{n},{},{},{},{}",
            f2.word_ball(n)?.len(),
            free_ball_size(2, n),
            z.word_ball(n)?.len(),
            lattice_ball_size(1, n)
        );
    }
    Ok(())
}
