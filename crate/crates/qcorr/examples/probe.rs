use qcorr::bounds::DETECTION_THRESHOLD;
use qcorr::config::RunConfig;
use qcorr::states;
use qcorr::witness::random_robustness_cutting_plane;

fn main() {
    let base = states::upb_tiles_4x4().unwrap();
    let t_all = std::time::Instant::now();
    for s in [0.0f64, 0.05, 0.10, 0.13, 0.16, 0.20, 0.30] {
        let state = base.mix_with_noise(s).unwrap();
        let mut config = RunConfig::with_seed(7);
        config.max_cuts = 6000;
        config.detection_target = Some(DETECTION_THRESHOLD);
        let t0 = std::time::Instant::now();
        let r = random_robustness_cutting_plane(&state, &config);
        let dt = t0.elapsed().as_secs_f64();
        match r {
            Ok(r) => println!(
                "s {:.2}  value {:.6e}  detected {}  capped {}  cuts {:?}  {:.1}s",
                s,
                r.value,
                r.value > DETECTION_THRESHOLD,
                r.capped,
                r.cuts_used,
                dt
            ),
            Err(e) => println!("s {:.2}  ERROR {e}  {:.1}s", s, dt),
        }
    }
    println!("total {:.1}s", t_all.elapsed().as_secs_f64());
}
