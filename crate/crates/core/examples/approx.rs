//! Approximates a stochastic weight on the circle by a uniform measure on
//! grid points.

use folner::algebra::{approx_by_uniform, FiniteWeight, DEFAULT_N_MAX};
use folner::rational::format_rational;
use folner::{Element, GroupModel, Rational};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = GroupModel::circle();
    let a = FiniteWeight::new([
        (Element::Circle(Rational::from_integer(0)), Rational::new(2, 3)),
        (Element::Circle(Rational::new(1, 2)), Rational::new(1, 3)),
    ]);
    let supply = c.grid_sample(60, None)?;
    let out = approx_by_uniform(&c, &a, Rational::new(1, 5), &supply, DEFAULT_N_MAX)?;
    println!("|F| = {}, p_d(a - δ_F) = {}", out.f.len(), format_rational(&out.defect));
    for (x, piece) in &out.pieces {
        let pts: Vec<String> = piece.iter().map(|p| p.to_string()).collect();
        println!("  {x} <- {}", pts.join(" "));
    }
    Ok(())
}
