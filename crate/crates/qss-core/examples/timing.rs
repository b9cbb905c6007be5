use std::time::Instant;
use qss_core::grid::{Grid, PhysicsParams};
use qss_core::preset::{sample_preset, Preset};
use qss_core::transform::forward_transform;
use qss_core::evolution::{evolve, IntegratorConfig};

fn main() {
    for (n, pts, l) in [(4usize, 24usize, 12.0f64), (4, 32, 12.0), (5, 16, 10.0)] {
        let grid = Grid::new(n, &vec![pts; n], &vec![l; n]).unwrap();
        let fields = sample_preset(&grid, &Preset::Gaussian { amp_u: 1.3, amp_v: 0.9, sigma: 1.0 }).unwrap();
        let t0 = Instant::now();
        let reps = 5;
        for _ in 0..reps { let _ = forward_transform(&fields, &grid).unwrap(); }
        let per = t0.elapsed().as_secs_f64() / (reps * 2) as f64;
        println!("n={} {}^{}: fft {:.1} ms", n, pts, n, per * 1e3);

        let params = PhysicsParams::new(1.0, 1.0, 0.5, 1.0).unwrap();
        let config = IntegratorConfig { dt0: 5e-4, t_end: 5e-4 * 20.0, record_every: 1000, ..Default::default() };
        let t0 = Instant::now();
        let r = evolve(&fields, &grid, &params, &config).unwrap();
        println!("  step: {:.1} ms ({} steps)", t0.elapsed().as_secs_f64() * 1e3 / r.steps as f64, r.steps);
    }
}
