//! Acceptance suite. Prints one PASS/FAIL line per criterion, followed by
//! indented detail lines, then a summary.
//!
//! Exit status is nonzero when any criterion fails, except for criteria listed
//! in `KNOWN_UNATTAINABLE`, which are still evaluated at full tolerance and
//! reported as FAIL.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use malus_core::classical_limit::{self, PhaseSpaceFunction};
use malus_core::linalg::log_log_slope;
use malus_core::malus::{self, ChshSettings, HiddenVariableModel, Transmission};
use malus_core::path_integral::{self, PathSpec};
use malus_core::quasi_dist::{QuasiDistribution, BUILTIN_NAMES};
use malus_core::sphere::{build_grid, Direction};
use malus_core::spin_states::{
    overlap, projector, resolution_of_identity_defect, scs_closed_form, scs_exponential, singlet_projector,
    DensityMatrix, SpinQuantumNumber, SpinState,
};

/// The raw loop amplitude at N = 10^4 carries the slicing loss
/// `cos^{2sN}(pi/N)`, about 4.9e-4 at s = 1/2, which no implementation of the
/// sliced product can bring under 1e-4.
const KNOWN_UNATTAINABLE: &[u32] = &[9];

struct Verdict {
    id: u32,
    title: &'static str,
    pass: bool,
    details: Vec<String>,
}

impl Verdict {
    fn new(id: u32, title: &'static str) -> Self {
        Self {
            id,
            title,
            pass: true,
            details: Vec::new(),
        }
    }

    /// Records a sub-check; any failing sub-check fails the criterion.
    fn check(&mut self, ok: bool, detail: String) {
        self.pass &= ok;
        self.details
            .push(format!("{} {detail}", if ok { "ok  " } else { "FAIL" }));
    }

    fn note(&mut self, detail: String) {
        self.details.push(format!("note {detail}"));
    }
}

fn spin(twice: u32) -> SpinQuantumNumber {
    SpinQuantumNumber::from_twice(twice).unwrap()
}

fn random_direction(rng: &mut ChaCha8Rng) -> Direction {
    let u: f64 = rng.gen_range(-1.0..=1.0);
    Direction::new(u.acos(), rng.gen_range(0.0..TAU)).unwrap()
}

fn malus_sweep(rng: &mut ChaCha8Rng) -> Vec<(SpinQuantumNumber, Direction, Direction)> {
    (0..1000)
        .map(|_| {
            (
                spin(rng.gen_range(1..=50)),
                random_direction(rng),
                random_direction(rng),
            )
        })
        .collect()
}

fn criterion_1(sweep: &[(SpinQuantumNumber, Direction, Direction)]) -> Verdict {
    let mut v = Verdict::new(1, "spin-s Malus law |<W|W'>|^2 = cos^{4s}(alpha/2)");
    let worst = sweep
        .iter()
        .map(|(s, a, b)| {
            let amp = overlap(&scs_exponential(*s, a), &scs_exponential(*s, b)).unwrap();
            let alpha = malus_core::relative_angle(a, b);
            (amp.norm_sqr() - (alpha / 2.0).cos().powi(2 * s.twice_s() as i32)).abs()
        })
        .fold(0.0, f64::max);
    v.check(
        worst < 1e-10,
        format!("max deviation {worst:.3e} over {} samples (2s <= 50)", sweep.len()),
    );
    v
}

fn criterion_2(sweep: &[(SpinQuantumNumber, Direction, Direction)]) -> Verdict {
    let mut v = Verdict::new(2, "exponential and closed-form coherent states agree");
    let worst = sweep
        .iter()
        .flat_map(|(s, a, b)| [(*s, *a), (*s, *b)])
        .map(|(s, d)| scs_exponential(s, &d).distance(&scs_closed_form(s, &d)).unwrap())
        .fold(0.0, f64::max);
    v.check(worst < 1e-10, format!("max entrywise distance {worst:.3e}"));
    v
}

fn criterion_3() -> Verdict {
    let mut v = Verdict::new(3, "resolution of identity on exact grids");
    for twice in [1u32, 2, 10] {
        let n = twice as usize + 1;
        let d = resolution_of_identity_defect(spin(twice), &build_grid(n, n).unwrap());
        v.check(d < 1e-10, format!("2s = {twice}, grid {n}x{n}: defect {d:.3e}"));
    }
    let d = resolution_of_identity_defect(spin(10), &build_grid(3, 3).unwrap());
    v.check(
        d > 1e-2,
        format!("negative control 2s = 10, grid 3x3: defect {d:.3e} > 1e-2"),
    );
    v
}

fn criterion_4() -> Verdict {
    let mut v = Verdict::new(4, "P-representation reconstruction of one spin-1/2");
    let half = SpinQuantumNumber::half();
    let grid = build_grid(8, 8).unwrap();
    let cases = [
        (
            QuasiDistribution::p_plus(),
            projector(&SpinState::basis(half, 1)),
            "|+><+|",
        ),
        (
            QuasiDistribution::p_minus(),
            projector(&SpinState::basis(half, 0)),
            "|-><-|",
        ),
        (
            QuasiDistribution::uniform(),
            DensityMatrix::maximally_mixed(vec![2]),
            "I/2",
        ),
    ];
    for (p, target, label) in cases {
        let rho = p.reconstruct_density(&[half], &grid).unwrap();
        let d = rho.max_entry_distance(&target).unwrap();
        v.check(d < 1e-10, format!("{} -> {label}: max-entry error {d:.3e}", p.name()));
    }
    v
}

fn criterion_5(rng: &mut ChaCha8Rng) -> Verdict {
    let mut v = Verdict::new(5, "singlet joint probability from pro2 matches the matrix oracle");
    let p = QuasiDistribution::pro2();
    let grid = build_grid(8, 8).unwrap();
    let (mut vs_oracle, mut vs_formula, mut ratio_dev) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..200 {
        let (a, b) = (random_direction(rng), random_direction(rng));
        let value = malus::joint_probability(&p, &a, &b, &grid).unwrap().value;
        let oracle = malus::quantum_joint_oracle(&a, &b);
        vs_oracle = vs_oracle.max((value - oracle).abs());
        vs_formula = vs_formula.max((oracle - 0.25 * (1.0 - a.dot(&b))).abs());
        let claim = malus::printed_singlet_claim(&a, &b);
        if value > 1e-6 {
            ratio_dev = ratio_dev.max((claim / value - 2.0).abs());
        }
    }
    v.check(
        vs_oracle < 1e-10,
        format!("max |quadrature - oracle| {vs_oracle:.3e} over 200 pairs"),
    );
    v.check(
        vs_formula < 1e-10,
        format!("max |oracle - (1 - a.b)/4| {vs_formula:.3e}"),
    );
    v.note(format!(
        "printed claim (1 - a.b)/2 is twice the computed value: max |claim/value - 2| = {ratio_dev:.3e}"
    ));
    v
}

fn criterion_6() -> Verdict {
    let mut v = Verdict::new(6, "pro1 sign adjudication against the singlet projector");
    let half = SpinQuantumNumber::half();
    let grid = build_grid(8, 8).unwrap();
    let target = singlet_projector();
    let error = |p: QuasiDistribution| {
        let rho = p.reconstruct_density(&[half, half], &grid).unwrap();
        (rho.max_entry_distance(&target).unwrap(), rho.min_eigenvalue())
    };
    let (printed, printed_min) = error(QuasiDistribution::pro1());
    let (flipped, _) = error(QuasiDistribution::pro1_flipped());
    let winners = [printed < 1e-8, flipped < 1e-8];
    v.check(
        winners.iter().filter(|w| **w).count() == 1,
        "exactly one candidate reconstructs the singlet".into(),
    );
    v.check(winners[1], format!("winner pro1-flipped: error {flipped:.3e}"));
    v.note(format!(
        "loser pro1 (as printed): error {printed:.3e}, min eigenvalue {printed_min:.3}"
    ));
    v
}

/// Mixture of an antipodal-delta component (weight `lambda`) and
/// `sum_k w_k (1 + c_k.n_a)(1 + d_k.n_b) / (4pi)^2` with `|c_k|, |d_k| <= 1`.
/// Nonnegative everywhere, and its total mass is integrated exactly by any grid.
fn random_local_distribution(rng: &mut ChaCha8Rng) -> QuasiDistribution {
    let vector = |rng: &mut ChaCha8Rng| {
        let r: f64 = rng.gen_range(0.0..=1.0);
        random_direction(rng).unit_vector().map(|x| x * r)
    };
    let terms: Vec<(f64, [f64; 3], [f64; 3])> = (0..rng.gen_range(1..=4))
        .map(|_| (rng.gen_range(0.1..1.0), vector(rng), vector(rng)))
        .collect();
    let lambda: f64 = rng.gen_range(0.0..=1.0);
    let total: f64 = terms.iter().map(|t| t.0).sum();
    let norm = (1.0 - lambda) / (16.0 * PI * PI * total);
    QuasiDistribution::pair(
        "local mixture",
        move |a: &Direction, b: &Direction| {
            let (na, nb) = (a.unit_vector(), b.unit_vector());
            let dot = |u: &[f64; 3], v: &[f64; 3]| u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
            norm * terms
                .iter()
                .map(|(w, c, d)| w * (1.0 + dot(c, &na)) * (1.0 + dot(d, &nb)))
                .sum::<f64>()
        },
        lambda / (4.0 * PI),
    )
}

fn random_transmission(rng: &mut ChaCha8Rng) -> Transmission {
    match rng.gen_range(0..3) {
        0 => Arc::new(malus::spin_half_transmission),
        1 => Arc::new(|a: &Direction, l: &Direction| if a.dot(l) > 0.0 { 1.0 } else { 0.0 }),
        _ => {
            let n = rng.gen_range(1..=8);
            Arc::new(move |a: &Direction, l: &Direction| malus::spin_half_transmission(a, l).powi(n))
        }
    }
}

fn criterion_7(rng: &mut ChaCha8Rng) -> Verdict {
    let mut v = Verdict::new(7, "CHSH: quantum 2*sqrt(2), local models bounded by 2");
    let joint = |a: &Direction, b: &Direction| malus::quantum_joint_oracle(a, b);
    let s = malus::chsh_value(joint, &ChshSettings::standard());
    let dev = (s.abs() - 2.0 * 2f64.sqrt()).abs();
    v.check(
        dev < 1e-6,
        format!("quantum oracle at standard settings: S = {s:.10}, | |S| - 2sqrt2 | = {dev:.3e}"),
    );

    let grid = build_grid(8, 8).unwrap();
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let model = HiddenVariableModel::new(
            random_local_distribution(rng),
            random_transmission(rng),
            random_transmission(rng),
        );
        let settings = if rng.gen_bool(0.5) {
            ChshSettings::standard()
        } else {
            ChshSettings {
                a: random_direction(rng),
                a_prime: random_direction(rng),
                b: random_direction(rng),
                b_prime: random_direction(rng),
            }
        };
        let joint =
            |a: &Direction, b: &Direction| malus::hidden_variable_probability(&model, a, b, &grid).unwrap().value;
        worst = worst.max(malus::chsh_value(joint, &settings).abs());
    }
    v.check(
        worst <= 2.0 + 1e-9,
        format!("max |S| over 100 randomized local models: {worst:.12}"),
    );
    v
}

fn criterion_8(rng: &mut ChaCha8Rng) -> Verdict {
    let mut v = Verdict::new(8, "amplitude composition through resolutions of the identity");
    let mut worst = 0.0f64;
    for twice in [1u32, 4] {
        let n = twice as usize + 1;
        let grid = build_grid(n, n).unwrap();
        for k in 1..=3 {
            for _ in 0..3 {
                let (a, b) = (random_direction(rng), random_direction(rng));
                let r = path_integral::compose_amplitude(spin(twice), &a, &b, k, &grid);
                worst = worst.max(r.abs_error);
            }
        }
    }
    v.check(
        worst < 1e-10,
        format!("max abs_error {worst:.3e} for 2s in {{1, 4}}, K in {{1, 2, 3}}"),
    );
    v
}

fn criterion_9() -> Verdict {
    let mut v = Verdict::new(9, "geometric phase of the closed equatorial loop, s = 1/2");
    let s = SpinQuantumNumber::half();
    let loop_path = PathSpec::closed_loop(s, FRAC_PI_2, 10_000).unwrap();
    let amp = path_integral::path_amplitude(&loop_path).unwrap();
    let target = Complex64::new(-1.0, 0.0);
    let raw = (amp - target).norm();
    v.check(
        raw < 1e-4,
        format!(
            "N = 1e4: |amplitude - (-1)| = {raw:.3e} (amplitude {:.9} {:+.3e}i)",
            amp.re, amp.im
        ),
    );
    let phase_only = (amp / amp.norm() - target).norm();
    v.note(format!(
        "phase factor alone: |A/|A| - (-1)| = {phase_only:.3e}; modulus loss 1 - |A| = {:.3e}, predicted 1 - cos^N(pi/N) = {:.3e}",
        1.0 - amp.norm(),
        1.0 - (PI / 10_000.0).cos().powi(10_000)
    ));

    let steps = [10, 30, 100, 300, 1000];
    let rows = path_integral::refinement_sweep(|n| PathSpec::spiral(s, 0.5, 2.0, 0.0, 3.0, n), &steps).unwrap();
    let xs: Vec<f64> = rows.iter().map(|r| r.steps as f64).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.gap.abs()).collect();
    let slope = log_log_slope(&xs, &ys);
    v.check(
        (slope + 1.0).abs() < 0.1,
        format!("phase-convention gap slope {slope:.4} over N = 10..1000 (spiral path)"),
    );
    v
}

fn criterion_10() -> Verdict {
    let mut v = Verdict::new(10, "classical limit: width scaling, precession, energy conservation");
    let spins: Vec<_> = [20u32, 40, 80, 160, 320, 640].iter().map(|&t| spin(t)).collect();
    let rows = classical_limit::width_sweep(&spins, 0.5).unwrap();
    let slope = classical_limit::width_scaling_slope(&rows);
    v.check(
        (slope + 0.5).abs() < 0.02,
        format!("width slope {slope:.5} over s = 10..320"),
    );

    let (omega0, phi0, s) = (1.3, 0.4, spin(7));
    let h = PhaseSpaceFunction::precession(omega0, s);
    let start = Direction::new(1.1, phi0).unwrap();
    let tr = classical_limit::integrate_motion(&h, &start, s, TAU / omega0, 1e-3 / omega0).unwrap();
    let err = tr
        .samples
        .iter()
        .map(|x| (x.phi - (phi0 - omega0 * x.t)).abs())
        .fold(0.0, f64::max);
    v.check(
        err < 1e-8,
        format!("precession max phase error {err:.3e} over one period"),
    );

    let s = spin(5);
    let h = PhaseSpaceFunction::transverse_field(1.0, s);
    let tr = classical_limit::integrate_motion(&h, &Direction::new(0.9, 0.3).unwrap(), s, 10.0, 1e-3).unwrap();
    let drift = tr.energy_drift();
    v.check(
        drift < 1e-9 && tr.samples.len() == 10_001,
        format!(
            "transverse-field energy drift {drift:.3e} over {} steps",
            tr.samples.len() - 1
        ),
    );
    v
}

fn criterion_11(rng: &mut ChaCha8Rng) -> Verdict {
    let mut v = Verdict::new(11, "trace identity for every built-in distribution");
    for name in BUILTIN_NAMES {
        let p = QuasiDistribution::by_name(name).unwrap();
        let mut worst = 0.0f64;
        if p.parties() == 1 {
            for twice in [1u32, 2, 5] {
                let n = (2 * twice as usize + 1).max(8);
                let grid = build_grid(n, n).unwrap();
                for _ in 0..100 {
                    let a = random_direction(rng);
                    let avg = malus::quantum_malus_average(&p, spin(twice), &a, &grid).unwrap().value;
                    let tr = malus::quantum_malus_trace(&p, spin(twice), &a, &grid).unwrap();
                    worst = worst.max((avg - tr).abs());
                }
            }
            v.check(
                worst < 1e-10,
                format!("{name}: max |average - trace| {worst:.3e} (2s in {{1, 2, 5}})"),
            );
        } else {
            let grid = build_grid(8, 8).unwrap();
            for _ in 0..100 {
                let (a, b) = (random_direction(rng), random_direction(rng));
                let joint = malus::joint_probability(&p, &a, &b, &grid).unwrap().value;
                let tr = malus::joint_probability_trace(&p, &a, &b, &grid).unwrap();
                worst = worst.max((joint - tr).abs());
            }
            v.check(worst < 1e-10, format!("{name}: max |joint - trace| {worst:.3e}"));
        }
    }
    v
}

fn main() -> ExitCode {
    let mut rng = ChaCha8Rng::seed_from_u64(0x4d61_6c75);
    let sweep = malus_sweep(&mut rng);
    let started = Instant::now();
    let verdicts = vec![
        criterion_1(&sweep),
        criterion_2(&sweep),
        criterion_3(),
        criterion_4(),
        criterion_5(&mut rng),
        criterion_6(),
        criterion_7(&mut rng),
        criterion_8(&mut rng),
        criterion_9(),
        criterion_10(),
        criterion_11(&mut rng),
    ];
    for v in &verdicts {
        println!(
            "criterion {:>2} {} {}",
            v.id,
            if v.pass { "PASS" } else { "FAIL" },
            v.title
        );
        for d in &v.details {
            println!("    {d}");
        }
    }
    let passed = verdicts.iter().filter(|v| v.pass).count();
    let unexpected: Vec<u32> = verdicts
        .iter()
        .filter(|v| !v.pass && !KNOWN_UNATTAINABLE.contains(&v.id))
        .map(|v| v.id)
        .collect();
    let known: Vec<u32> = verdicts
        .iter()
        .filter(|v| !v.pass && KNOWN_UNATTAINABLE.contains(&v.id))
        .map(|v| v.id)
        .collect();
    println!(
        "acceptance: {passed}/{} PASS in {:.1}s; known-unattainable FAIL: {known:?}; unexpected FAIL: {unexpected:?}",
        verdicts.len(),
        started.elapsed().as_secs_f64()
    );
    if unexpected.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
