//! Rooted planar trees, homomorphism densities and the moments they produce.

use qvelab::trees::{catalan, enumerate_trees, hom_density, moment_table, RootedPlanarTree};
use qvelab::StepKernel;

fn main() -> qvelab::Result<()> {
    for tree in enumerate_trees(3)? {
        println!("{tree}");
    }
    println!("trees with 1..=8 edges: {:?}", (1..=8).map(catalan).collect::<Vec<_>>());

    let w = StepKernel::uniform(vec![vec![1.0, 3.0], vec![3.0, 0.0]])?;
    let star = RootedPlanarTree::star(3);
    let path = RootedPlanarTree::path(3);
    println!("t(star3, W) = {}, t(path3, W) = {}", hom_density(&star, &w), hom_density(&path, &w));

    for (order, value) in moment_table(&w, 8)? {
        println!("order {order}: {value}");
    }
    Ok(())
}
