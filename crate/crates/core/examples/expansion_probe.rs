use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use recur_core::geometry::mvee;
use recur_core::instances::gen_ellipsoidal;
use recur_core::recur::greedy_hull_expansion;

fn main() {
    let inst = gen_ellipsoidal(100_000, 5, 8, 1.0, 100.0, 908).unwrap();
    let cluster0: Vec<usize> = (0..inst.n()).filter(|&i| inst.labels[i] == 0).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut sample: Vec<usize> =
        (0..15).map(|_| cluster0[rng.gen_range(0..cluster0.len())]).collect();
    sample.sort_unstable();
    sample.dedup();

    // Emulate one tessellation round: everything of the cluster inside the
    // sample's enclosing ellipsoid is recovered.
    let (e, _) = mvee(&inst.points, &sample, 1e-3).unwrap();
    let recovered: Vec<usize> = cluster0
        .iter()
        .copied()
        .filter(|&i| e.contains(inst.points.point(i)))
        .collect();
    println!("sample {} -> ellipsoid recovers {}", sample.len(), recovered.len());

    let residual: Vec<usize> = (0..inst.n())
        .filter(|i| !recovered.contains(i))
        .collect();
    let t = std::time::Instant::now();
    let absorbed =
        greedy_hull_expansion(&inst.points, &recovered, &residual, 0.5, 1.001).unwrap();
    println!(
        "cluster {} recovered-seed {} absorbed {} in {:?}",
        cluster0.len(),
        recovered.len(),
        absorbed.len(),
        t.elapsed()
    );
    let ok = absorbed.iter().all(|&i| inst.labels[i] == 0);
    println!("all absorbed latently correct: {ok}");
}
