//! Exact seminorm values and invariance defects of weights on the circle
//! and on Z.

use folner::algebra::{invariance_defect, seminorm_pd, FiniteWeight};
use folner::rational::format_rational;
use folner::{Element, FiniteWindow, GroupModel, Rational};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let c = GroupModel::circle();
    let x = c.parse_element("0")?;
    let y = c.parse_element("3/10")?;
    let pair = FiniteWeight::new([(x, Rational::from_integer(1)), (y, Rational::from_integer(-1))]);
    let sol = seminorm_pd(&c, &pair)?;
    println!(
        "p_d(δ_0 - δ_3/10) = {} after {} pivots",
        format_rational(&sol.value),
        sol.pivots
    );

    let z = GroupModel::lattice(1);
    let a = FiniteWeight::uniform(&FiniteWindow::new((0..10).map(|k| Element::Lattice(vec![k]))));
    let rep = invariance_defect(&z, &a, &FiniteWindow::new([Element::Lattice(vec![1])]))?;
    println!(
        "uniform on 0..9 moved by 1: p_d = {}, [0,1] variant = {}",
        format_rational(&rep.defect()),
        format_rational(&rep.unit_defect())
    );
    print!("{}", rep.to_csv());
    Ok(())
}
