use std::path::Path;
use std::process::{Command, Output};

use hmcf::field::{Grid2D, ScalarField};
use hmcf::io::{load_field, save_field};

fn hmcf(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hmcf"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write_uniform_pgm(path: &Path, n: usize) {
    let mut s = format!("P2\n{n} {n}\n255\n");
    for _ in 0..n {
        s.push_str(&vec!["128"; n].join(" "));
        s.push('\n');
    }
    std::fs::write(path, s).unwrap();
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let o = hmcf(
        dir.path(),
        &["segment", "synthetic:disk", "--out-prefix", "x"],
    );
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(code(&hmcf(dir.path(), &["no-such-command"])), 1);
    assert_eq!(code(&hmcf(dir.path(), &["--help"])), 0);
}

#[test]
fn data_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = hmcf(
        p,
        &[
            "segment",
            "synthetic:disk",
            "--config",
            "missing.cfg",
            "--out-prefix",
            "x",
        ],
    );
    assert_eq!(code(&o), 2);

    std::fs::write(p.join("bad.cfg"), "model = hmcf-cv\nwave.eta = 1.5\n").unwrap();
    let o = hmcf(
        p,
        &[
            "segment",
            "synthetic:disk",
            "--config",
            "bad.cfg",
            "--out-prefix",
            "x",
        ],
    );
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));

    std::fs::write(p.join("trunc.pgm"), "P5\n4 4\n255\n\x01\x02").unwrap();
    std::fs::write(p.join("ok.cfg"), "model = hmcf-cv\ninit.circle = 2,2,1\n").unwrap();
    let o = hmcf(
        p,
        &[
            "segment",
            "trunc.pgm",
            "--config",
            "ok.cfg",
            "--out-prefix",
            "x",
        ],
    );
    assert_eq!(code(&o), 2);
}

#[test]
fn vanishing_contour_exit_code_follows_allow_vanish() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    write_uniform_pgm(&p.join("flat.pgm"), 40);
    let base = "model = hmcf-cv\nwave.b = 400\ninit.circle = 20,20,6\nmax_iters = 200\n";
    std::fs::write(p.join("strict.cfg"), base).unwrap();
    std::fs::write(
        p.join("lenient.cfg"),
        format!("{base}allow_vanish = true\n"),
    )
    .unwrap();

    let o = hmcf(
        p,
        &[
            "segment",
            "flat.pgm",
            "--config",
            "strict.cfg",
            "--out-prefix",
            "s",
        ],
    );
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));

    let o = hmcf(
        p,
        &[
            "segment",
            "flat.pgm",
            "--config",
            "lenient.cfg",
            "--out-prefix",
            "l",
        ],
    );
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("vanished=true"), "{}", stdout(&o));
    assert!(p.join("l_phi.txt").exists());
}

#[test]
fn segment_writes_overlay_field_and_history() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    std::fs::write(
        p.join("run.cfg"),
        "model = hmcf-cv\nmodelp.lambda = 100\nwave.b = 50\ninit.circle = 32,32,22\n",
    )
    .unwrap();
    let o = hmcf(
        p,
        &[
            "segment",
            "synthetic:disk:64",
            "--config",
            "run.cfg",
            "--out-prefix",
            "d",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let dice: f64 = out
        .split_whitespace()
        .find_map(|t| t.strip_prefix("dice="))
        .expect("dice printed")
        .parse()
        .unwrap();
    assert!(dice > 0.95, "{out}");

    let phi = load_field(p.join("d_phi.txt")).unwrap();
    assert_eq!((phi.grid().width(), phi.grid().height()), (64, 64));
    let history = std::fs::read_to_string(p.join("d_history.csv")).unwrap();
    assert!(history.starts_with("iteration,changed_fraction"));
    let iterations = out
        .split_whitespace()
        .find_map(|t| t.strip_prefix("iterations="))
        .unwrap();
    assert_eq!(
        history.lines().count() - 1,
        iterations.parse::<usize>().unwrap()
    );
    let overlay = std::fs::read(p.join("d_overlay.ppm")).unwrap();
    assert!(overlay.starts_with(b"P6"));
}

#[test]
fn demo_star_smooths_towards_convexity() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    // Each interval moves the front by b tau^2 kappa / 2; b = 1 barely moves it.
    let o = hmcf(p, &["demo", "star", "--b", "50", "--out-prefix", "s"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for k in 0..=5 {
        assert!(p.join(format!("s_{k:03}.ppm")).exists(), "snapshot {k}");
    }
    let table = std::fs::read_to_string(p.join("s_snapshots.csv")).unwrap();
    let rows: Vec<Vec<String>> = table
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect();
    let deficiency: Vec<f64> = rows.iter().map(|r| r[4].parse().unwrap()).collect();
    assert!(deficiency.windows(2).all(|w| w[1] < w[0]), "{deficiency:?}");
    assert_eq!(rows.last().unwrap()[2], "1");
}

#[test]
fn reinit_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let g = Grid2D::new(32, 32).unwrap();
    let field = ScalarField::from_fn(g, |x, y| {
        let (dx, dy) = (x as f64 - 16.0, y as f64 - 15.0);
        0.1 * (100.0 - dx * dx - dy * dy)
    });
    save_field(&field, p.join("in.txt")).unwrap();
    let o = hmcf(p, &["reinit", "in.txt", "--out", "out.txt"]);
    assert_eq!(code(&o), 0);
    let sdf = load_field(p.join("out.txt")).unwrap();
    assert!((sdf.get(16, 15) - 10.0).abs() < 0.05, "{}", sdf.get(16, 15));
    assert!((sdf.get(16, 31) + 6.0).abs() < 0.05, "{}", sdf.get(16, 31));

    save_field(&ScalarField::filled(g, 1.0), p.join("flat.txt")).unwrap();
    assert_eq!(code(&hmcf(p, &["reinit", "flat.txt", "--out", "o.txt"])), 3);
}

#[test]
fn sweep_requires_ground_truth_and_accepts_one_value() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    write_uniform_pgm(&p.join("flat.pgm"), 64);
    std::fs::write(
        p.join("run.cfg"),
        "model = hmcf-cv\nmodelp.lambda = 100\ninit.circle = 32,32,22\n",
    )
    .unwrap();
    let o = hmcf(
        p,
        &[
            "sweep-b", "flat.pgm", "--config", "run.cfg", "--b-list", "50", "--out", "a.csv",
        ],
    );
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("truth"));

    let o = hmcf(
        p,
        &[
            "sweep-b",
            "synthetic:disk:64",
            "--config",
            "run.cfg",
            "--b-list",
            "50",
            "--out",
            "b.csv",
        ],
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(p.join("b.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(
        lines[0],
        "experiment,model,noise_kind,noise_strength,b,mu,dice,hausdorff,iterations,converged,runtime_ms"
    );
    assert!(lines[1].starts_with("sweep-b,hmcf-cv,,,50,"));
    assert!(
        lines[1].ends_with(','),
        "runtime left blank without --timing"
    );
}
