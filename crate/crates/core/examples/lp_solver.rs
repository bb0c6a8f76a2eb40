//! The bundled LP and MILP solver on a small production-planning model.

use std::error::Error;

use xorbid::solver::{solve_lp, solve_milp, write_lp_format, Comparator, LinearProgram, MixedIntegerProgram, Sense};

fn main() -> Result<(), Box<dyn Error>> {
    // two products sharing machine hours and labour
    let mut lp = LinearProgram::new(Sense::Maximize);
    let chairs = lp.add_named_var("chairs", 0.0, f64::INFINITY, 45.0);
    let tables = lp.add_named_var("tables", 0.0, f64::INFINITY, 80.0);
    lp.add_row(vec![(chairs, 5.0), (tables, 20.0)], Comparator::Le, 400.0);
    lp.add_row(vec![(chairs, 10.0), (tables, 15.0)], Comparator::Le, 450.0);
    let relaxed = solve_lp(&lp)?;
    println!("LP: {:?} objective {:.2} at {:?}", relaxed.status, relaxed.objective, relaxed.x);

    let mut mip = MixedIntegerProgram::from_lp(lp);
    let setup = mip.add_binary("tables_setup", -100.0);
    mip.add_row(vec![(tables, 1.0), (setup, -30.0)], Comparator::Le, 0.0);
    mip.set_kind(chairs, xorbid::solver::VarKind::Integer);
    mip.set_kind(tables, xorbid::solver::VarKind::Integer);
    let integral = solve_milp(&mip, 1e-9)?;
    println!("MILP: {:?} objective {:.2} at {:?}", integral.status, integral.objective, integral.x);

    println!("\n{}", write_lp_format(&mip));
    Ok(())
}
