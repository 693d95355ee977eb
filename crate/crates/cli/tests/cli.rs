use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use scaffold_core::grid::read_volume;
use scaffold_core::isosurface::read_obj;
use scaffold_core::mesh::{load_mesh, save_mesh, MeshFormat, MeshKind, VolumetricMesh};
use scaffold_core::{shapes, Point3};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data")
        .join(name)
}

fn arbf(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_arbf"))
        .args(args)
        .env_remove("ARBF_WORKERS")
        .output()
        .expect("run arbf")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn ok(o: &Output) -> String {
    assert_eq!(o.status.code(), Some(0), "stderr: {}", stderr(o));
    stdout(o)
}

fn field(out: &str, key: &str) -> f64 {
    out.lines()
        .find_map(|l| l.strip_prefix(key))
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or_else(|| panic!("no '{key}' in output:\n{out}"))
}

fn solid_fractions(out: &str) -> Vec<f64> {
    out.lines()
        .filter_map(|l| l.split("solid fraction ").nth(1))
        .map(|s| s.split_whitespace().next().unwrap().parse().unwrap())
        .collect()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn fit_reports_counts_and_residual() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("tet.arbf");
    let out = ok(&arbf(&[
        "fit",
        "--mesh",
        p(&data("tet1.node")),
        "--mode",
        "aniso",
        "--basis",
        "imq",
        "--c",
        "0.1",
        "-o",
        p(&model),
    ]));
    assert_eq!(field(&out, "N "), 14.0);
    assert!(field(&out, "residual ") <= 1e-8);
    assert!(field(&out, "condition estimate ") >= 1.0);
    assert!(model.exists());

    let out = ok(&arbf(&[
        "fit",
        "--mesh",
        p(&data("tri1.off")),
        "--mode",
        "iso",
        "-o",
        p(&dir.path().join("t.arbf")),
    ]));
    assert_eq!(field(&out, "N "), 7.0);
}

#[test]
fn missing_mesh_exits_2_naming_the_path() {
    let o = arbf(&["fit", "--mesh", "does/not/exist.node"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("does/not/exist.node"));
}

#[test]
fn sample_then_iso_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("tet.arbf");
    ok(&arbf(&[
        "fit",
        "--mesh",
        p(&data("tet1.node")),
        "-o",
        p(&model),
    ]));
    let vol = dir.path().join("tet");
    ok(&arbf(&[
        "sample",
        "--model",
        p(&model),
        "--resolution",
        "64",
        "-o",
        p(&vol),
    ]));
    let grid = read_volume(&vol).unwrap();
    assert_eq!(grid.dims, [64, 64, 64]);
    let (lo, hi) = grid.min_max();
    assert!(lo < 0.0 && hi > 0.0);

    let out = ok(&arbf(&["iso", "--volume", p(&vol), "--iso", "-0.5,0,0.5"]));
    for iso in ["-0.5", "0", "0.5"] {
        let obj = dir.path().join(format!("tet_iso{iso}.obj"));
        assert!(!read_obj(&obj).unwrap().is_empty(), "{}", obj.display());
    }
    let f = solid_fractions(&out);
    assert_eq!(f.len(), 3);
    assert!(f[0] > f[1] && f[1] > f[2], "{f:?}");

    let o = arbf(&["iso", "--volume", p(&vol), "--iso", "1000"]);
    ok(&o);
    assert!(stderr(&o).contains("warning"));
    let empty = dir.path().join("tet_iso1000.obj");
    assert_eq!(fs::read_to_string(empty).unwrap(), "");

    assert_eq!(arbf(&["iso", "--volume", p(&vol)]).status.code(), Some(2));
}

#[test]
fn sample_resolution_two_and_bad_model() {
    let dir = tempfile::tempdir().unwrap();
    let model = dir.path().join("tet.arbf");
    ok(&arbf(&[
        "fit",
        "--mesh",
        p(&data("tet1.node")),
        "-o",
        p(&model),
    ]));
    let vol = dir.path().join("tiny");
    ok(&arbf(&[
        "sample",
        "--model",
        p(&model),
        "--resolution",
        "2",
        "-o",
        p(&vol),
    ]));
    assert_eq!(read_volume(&vol).unwrap().values.len(), 8);

    let text = fs::read_to_string(&model).unwrap();
    fs::write(&model, text.replacen("N 14", "N 15", 1)).unwrap();
    let o = arbf(&["sample", "--model", p(&model), "-o", p(&vol)]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn tpms_p_is_half_solid() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("p");
    let out = ok(&arbf(&[
        "tpms",
        "--kind",
        "p",
        "--resolution",
        "64",
        "--iso",
        "0",
        "-o",
        p(&stem),
    ]));
    let f = solid_fractions(&out);
    assert!((f[0] - 0.5).abs() <= 0.02);
    assert!(!read_obj(dir.path().join("p_iso0.obj")).unwrap().is_empty());
}

#[test]
fn pipeline_is_deterministic_and_sensitive_to_perturbation() {
    let dir = tempfile::tempdir().unwrap();
    let run = |mesh: &Path, stem: &str, workers: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_arbf"))
            .args([
                "pipeline",
                "--mesh",
                p(mesh),
                "--mode",
                "aniso",
                "--iso",
                "-0.2,0,0.2",
                "--resolution",
                "40",
                "-o",
                p(&dir.path().join(stem)),
            ])
            .env("ARBF_WORKERS", workers)
            .output()
            .unwrap();
        ok(&o);
        ["-0.2", "0", "0.2"]
            .map(|iso| fs::read(dir.path().join(format!("{stem}_iso{iso}.obj"))).unwrap())
    };
    let a = run(&data("hex8.hexmesh"), "a", "1");
    let b = run(&data("hex8.hexmesh"), "b", "4");
    assert_eq!(a, b);
    assert!(a.iter().all(|bytes| !bytes.is_empty()));

    let perturbed = dir.path().join("p.hexmesh");
    ok(&arbf(&[
        "perturb",
        "--mesh",
        p(&data("hex8.hexmesh")),
        "--seed",
        "7",
        "--magnitude",
        "0.15",
        "-o",
        p(&perturbed),
    ]));
    let c = run(&perturbed, "c", "0");
    assert_ne!(a[1], c[1]);
}

#[test]
fn pipeline_reads_toml_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    fs::copy(data("hex1.hexmesh"), dir.path().join("cube.hexmesh")).unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(
        &cfg,
        "mesh = \"cube.hexmesh\"\nmode = \"aniso\"\nbasis = \"mq\"\nc = 0.1\nresolution = 24\n\
         iso = [-0.25, 0.25]\noutput = \"out/cube\"\n",
    )
    .unwrap();
    let out = ok(&arbf(&["pipeline", "--config", p(&cfg)]));
    assert_eq!(field(&out, "N "), 26.0);
    assert!(dir.path().join("out/cube_iso-0.25.obj").exists());
    assert!(dir.path().join("out/cube_iso0.25.obj").exists());
    assert!(dir.path().join("out/cube.arbf").exists());

    ok(&arbf(&[
        "pipeline",
        "--config",
        p(&cfg),
        "--iso",
        "0",
        "--sweep",
        "2",
    ]));
    assert!(dir.path().join("out/cube_iso0.obj").exists());

    fs::write(&cfg, "mesh = \"cube.hexmesh\"\nbogus = 1\n").unwrap();
    assert_eq!(
        arbf(&["pipeline", "--config", p(&cfg)]).status.code(),
        Some(2)
    );
    fs::write(&cfg, "mesh = \"cube.hexmesh\"\niso = []\n").unwrap();
    assert_eq!(
        arbf(&["pipeline", "--config", p(&cfg)]).status.code(),
        Some(2)
    );
}

#[test]
fn numerical_failures_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    // c multiplies r in the Gaussian: nearly flat on a unit block
    let o = arbf(&[
        "fit",
        "--mesh",
        p(&data("hex8.hexmesh")),
        "--basis",
        "gaussian",
        "-o",
        p(&dir.path().join("g")),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("--lambda"));
    ok(&arbf(&[
        "fit",
        "--mesh",
        p(&data("hex8.hexmesh")),
        "--basis",
        "gaussian",
        "--lambda",
        "1e-8",
        "-o",
        p(&dir.path().join("g")),
    ]));

    let sliver = dir.path().join("sliver.node");
    let mesh = VolumetricMesh::new(
        MeshKind::Tet,
        vec![
            Point3::origin(),
            Point3::new(1.0, 0.0, 0.0),
            Point3::new(0.0, 1.0, 0.0),
            Point3::new(0.3, 0.3, 0.01),
        ],
        vec![0, 1, 2, 3],
    )
    .unwrap();
    save_mesh(&mesh, &sliver, MeshFormat::NodeEle).unwrap();
    let codes: Vec<Option<i32>> = (0..40)
        .map(|seed| {
            arbf(&[
                "perturb",
                "--mesh",
                p(&sliver),
                "--seed",
                &seed.to_string(),
                "--magnitude",
                "0.3",
                "--fraction",
                "1",
                "-o",
                p(&dir.path().join("out.node")),
            ])
            .status
            .code()
        })
        .collect();
    assert!(codes.contains(&Some(3)), "{codes:?}");
    assert!(codes.iter().all(|c| *c == Some(0) || *c == Some(3)));
}

#[test]
fn bad_arguments_exit_2() {
    assert_eq!(
        arbf(&[
            "perturb",
            "--mesh",
            p(&data("hex8.hexmesh")),
            "--magnitude",
            "0.5",
            "-o",
            "x.hexmesh"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        arbf(&[
            "fit",
            "--mesh",
            p(&data("hex8.hexmesh")),
            "--basis",
            "cubic"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(arbf(&["nonsense"]).status.code(), Some(2));
    let o = Command::new(env!("CARGO_BIN_EXE_arbf"))
        .args([
            "tpms",
            "--kind",
            "g",
            "--iso",
            "0",
            "-o",
            "/nonexistent-dir/x",
        ])
        .env("ARBF_WORKERS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn planar_pipeline_writes_contours_and_preview() {
    let dir = tempfile::tempdir().unwrap();
    let stem = dir.path().join("tri");
    let out = ok(&arbf(&[
        "pipeline",
        "--mesh",
        p(&data("tri1.off")),
        "--mode",
        "iso",
        "--iso",
        "0",
        "-o",
        p(&stem),
    ]));
    assert!(out.contains("segments"));
    let pgm = fs::read(dir.path().join("tri.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n"));
    let obj = fs::read_to_string(dir.path().join("tri_iso0.obj")).unwrap();
    assert!(obj.lines().any(|l| l.starts_with("l ")));
}

#[test]
fn shipped_fixtures_match_reference_shapes() {
    let cases = [
        ("tri1.off", MeshFormat::Off, shapes::single_triangle()),
        ("tet1.node", MeshFormat::NodeEle, shapes::unit_tet()),
        ("hex1.hexmesh", MeshFormat::HexAscii, shapes::unit_hex()),
        (
            "hex8.hexmesh",
            MeshFormat::HexAscii,
            shapes::hex_block(2, 2, 2, 1.0),
        ),
        (
            "rod4.hexmesh",
            MeshFormat::HexAscii,
            shapes::hex_rod(4, 1.0),
        ),
        ("icosa20.node", MeshFormat::NodeEle, shapes::icosahedron()),
    ];
    for (name, format, expected) in cases {
        assert_eq!(load_mesh(data(name), format).unwrap(), expected, "{name}");
    }
}
