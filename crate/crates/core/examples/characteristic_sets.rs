//! Zero sets of the Kill f, NKf and G1f conditions in the (s, t) quadrant for
//! every canonical f-structure, for orders 4 and 6 and n = 4..8.

use flagf::canonical::generate_f_structures;
use flagf::classify::{characteristic_set, ClassContext, Grid};
use flagf::metricgeom::build_split;
use flagf::phispace::{build_automorphism, build_phi_space};
use flagf::{ClassCondition, UMethod};

fn main() -> flagf::Result<()> {
    let grid = Grid::default_grid();
    for k in [4, 6] {
        for n in 4..=8 {
            let ps = build_phi_space(build_automorphism(n, 1, k)?)?;
            let split = build_split(&ps)?;
            for f in generate_f_structures(&ps)?.iter().filter(|f| !f.id().starts_with('-')) {
                let ctx = ClassContext::new(&split, f)?;
                let sets: Vec<String> = ClassCondition::ALL
                    .iter()
                    .map(|&c| {
                        characteristic_set(&ctx, c, &grid, (n - 1) as f64, 1e-12, UMethod::Closed)
                            .map(|set| format!("{c}: {set}"))
                    })
                    .collect::<flagf::Result<_>>()?;
                println!("k={k} n={n} {}: {}", f.id(), sets.join("; "));
            }
        }
    }
    Ok(())
}
