use tfdf_core::data_io::Preprocess;
use tfdf_core::objective::ObjectiveParams;
use tfdf_core::solver::{solve_tfdf, PreparedTask, SolverConfig};
use tfdf_core::synthetic::{generate, SyntheticConfig};

fn accuracy(pred: &[usize], truth: &[usize]) -> f64 {
    100.0 * pred.iter().zip(truth).filter(|(a, b)| a == b).count() as f64 / truth.len() as f64
}
fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = v.len();
    if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) }
}

fn main() {
    println!("sigma rot sx  sy  | 1nn   srm   f.01  | marg5 margsrm");
    for (sigma, rot, sx, sy) in [
        (0.6, 28.0, 2.2, 2.2),
        (0.6, 25.0, 2.2, 2.2),
        (0.6, 30.0, 2.2, 2.2),
        (0.65, 28.0, 2.2, 2.2),
        (0.55, 28.0, 2.2, 2.2),
        (0.6, 28.0, 2.0, 2.0),
        (0.6, 28.0, 2.4, 2.4),
    ] {
        let mut nn1 = vec![];
        let mut srm = vec![];
        let mut full = vec![];
        for seed in 0..10u64 {
            let gen_cfg = SyntheticConfig {
                seed,
                per_class: 100,
                class_separation: 3.0,
                noise_sigma: sigma,
                rotation_deg: rot,
                shift: [sx, sy],
            };
            let task = generate(&gen_cfg).unwrap();
            let truth: Vec<usize> = task.target_y_truth.as_ref().unwrap().as_slice().to_vec();
            let full_cfg = SolverConfig {
                params: ObjectiveParams { xi: 0.01, ..Default::default() },
                ..SolverConfig::default()
            };
            let prepared = PreparedTask::prepare(&task, Preprocess::ZscoreThenUnitL2, &full_cfg).unwrap();
            nn1.push(accuracy(&prepared.nn1_pseudo_labels(), &truth));
            full.push(accuracy(solve_tfdf(&prepared, &full_cfg).unwrap().pseudo_labels.as_slice(), &truth));
            let srm_cfg = SolverConfig {
                params: ObjectiveParams { lambda: 0.0, rho: 0.0, xi: 0.0, ..Default::default() },
                ..SolverConfig::default()
            };
            full_cfg.validate().unwrap();
            srm.push(accuracy(solve_tfdf(&prepared, &srm_cfg).unwrap().pseudo_labels.as_slice(), &truth));
        }
        let (m1, ms, mf) = (median(nn1), median(srm), median(full));
        println!("{sigma:5} {rot:3} {sx:3} {sy:3} | {m1:5.1} {ms:5.1} {mf:5.1} | {:+5.1} {:+5.1}", mf - m1 - 5.0, mf - ms);
    }
}
