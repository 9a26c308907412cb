//! Matching pursuit on a clustered dictionary, once with brute-force selection
//! and once guided by a cluster tree, with the inner products each spends.

use stmp::pursuit::{matching_pursuit_with_residual, predicted_ip_count};
use stmp::synthetic::{clustered_dictionary, noisy_atom_queries};
use stmp::{build_tree, norm, reconstruct, ExactSelector, SearchParams, StmpSelector};

fn main() -> stmp::Result<()> {
    let d = clustered_dictionary(32, 20_000, 200, 0.5, 1);
    let branching = [20, 10, 10];
    let tree = build_tree(&d, &branching, 2)?;

    // a query close to atom 1234 plus a weaker second atom
    let mut x: Vec<f32> = d.atom(1234).iter().map(|v| 2.0 * v).collect();
    for (xi, a) in x.iter_mut().zip(d.atom(77)) {
        *xi += 0.8 * a;
    }

    let params = SearchParams::new(0.1, 5);
    let exact = ExactSelector::new(&d);
    let (code, r) = matching_pursuit_with_residual(&exact, &x, &params)?;
    println!("exact: picks {:?}", code.history);
    println!(
        "       residual {:.4}, {} inner products",
        norm(&r),
        code.ip_count()
    );

    for alpha in [0.1, 0.2, 1.0] {
        let sel = StmpSelector::new(&tree, &d, alpha)?;
        let (code, r) = matching_pursuit_with_residual(&sel, &x, &SearchParams::new(alpha, 5))?;
        println!(
            "alpha {alpha}: picks {:?}\n           residual {:.4}, {} centroid + {} atom products (predicted centroids per step {})",
            code.history.iter().map(|(i, _)| *i).collect::<Vec<_>>(),
            norm(&r),
            code.cost.centroid,
            code.cost.atom,
            predicted_ip_count(&branching, alpha)?
        );
        let back = reconstruct(&d, &code)?;
        let err: f32 = back
            .iter()
            .zip(&x)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f32>()
            .sqrt();
        println!("           reconstruction error {err:.4}");
    }

    // how often a 10% descent agrees with brute force on noisy atoms
    let queries = noisy_atom_queries(&d, 500, 0.2, 3);
    let sel = StmpSelector::new(&tree, &d, 0.1)?;
    let one = SearchParams::new(0.1, 1);
    let mut agree = 0;
    for q in &queries {
        let a = stmp::matching_pursuit(&exact, q, &one)?;
        let b = stmp::matching_pursuit(&sel, q, &one)?;
        agree += usize::from(a.support() == b.support());
    }
    println!("first-atom agreement at alpha 0.1: {agree}/500");
    Ok(())
}
