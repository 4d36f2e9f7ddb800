//! Applies the named f-structures to a generic element of m and compares
//! with the explicit matrix form of their action.

use flagf::canonical::{generate_f_structures, golden_action, golden_action_check};
use flagf::phispace::{build_automorphism, build_phi_space};
use flagf::LieElement;
use nalgebra::DMatrix;

fn main() -> flagf::Result<()> {
    let n = 5;
    // generic S in m: a_{1j}, a_{2j}, a_{3j} for the flag block pattern
    let mut m = DMatrix::zeros(n, n);
    for (i, j) in [(0, 1), (0, 2), (0, 3), (0, 4), (1, 3), (1, 4), (2, 3), (2, 4)] {
        let v = (1 + i * n + j) as f64;
        m[(i, j)] = v;
        m[(j, i)] = -v;
    }
    let s = LieElement::new(m)?;

    for k in [4, 6] {
        let ps = build_phi_space(build_automorphism(n, 1, k)?)?;
        let fs = generate_f_structures(&ps)?;
        for f in fs.iter().filter(|f| !f.id().starts_with('-')) {
            let Some(expected) = golden_action(f.id(), &s) else { continue };
            let got = f.op().apply(&s)?;
            println!("{}(S) ={:.0}", f.id(), got.matrix());
            println!("max deviation from the explicit form: {:.1e}\n", (&got - &expected).amax());
        }
        let report = golden_action_check(&ps, &fs)?;
        println!("k={k}: golden check over all inputs, worst {:.1e}, {} mismatches\n", report.max_deviation(), report.mismatches.len());
    }
    Ok(())
}
