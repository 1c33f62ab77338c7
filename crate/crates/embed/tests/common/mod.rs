//! Fixtures shared by the integration tests: synthetic embeddings with
//! planted per-language gender directions over the bundled lexicon, and
//! helpers to drive the command-line binary.

#![allow(dead_code)]

use std::collections::HashSet;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use debias_embed::lexicon_json::bundled_lexicon;
use debias_embed::vec_format::save_vec;
use debias_embed_core::lexicon::GenderLexicon;
use debias_embed_core::EmbeddingSpace;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

pub const BIN: &str = env!("CARGO_BIN_EXE_debias-embed");

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| StandardNormal.sample(rng)).collect()
}

pub fn gaussian(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// Random orthogonal matrix from the QR factor of a Gaussian matrix.
pub fn random_orthogonal(rng: &mut ChaCha8Rng, d: usize) -> DMatrix<f64> {
    let qr = gaussian(rng, d, d).qr();
    let mut q = qr.q();
    let r = qr.r();
    for c in 0..d {
        if r[(c, c)] < 0.0 {
            for i in 0..d {
                q[(i, c)] = -q[(i, c)];
            }
        }
    }
    q
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

fn add(a: &[f64], b: &[f64], s: f64) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + s * y).collect()
}

/// Ordered, de-duplicated rows of one language.
struct Rows {
    words: Vec<String>,
    rows: Vec<Vec<f64>>,
    seen: HashSet<String>,
}

impl Rows {
    fn push(&mut self, word: &str, row: Vec<f64>) {
        if self.seen.insert(word.to_string()) {
            self.words.push(word.to_string());
            self.rows.push(row);
        }
    }
}

/// One monolingual space per language of `lexicon`, each with its own random
/// gender direction `g`: defining pairs sit at `base ± g`, occupation pairs
/// carry an asymmetric `g` loading, neutral words a small random one.
pub fn language_spaces(lexicon: &GenderLexicon, seed: u64, d: usize, fillers: usize) -> Vec<EmbeddingSpace> {
    let mut r = rng(seed);
    let noise = 1.0 / (d as f64).sqrt();
    let mut out = Vec::new();
    for (tag, lex) in lexicon.iter() {
        let g = unit(gaussian_vec(&mut r, d));
        let mut rows = Rows {
            words: Vec::new(),
            rows: Vec::new(),
            seen: HashSet::new(),
        };
        let base = |r: &mut ChaCha8Rng| gaussian_vec(r, d).into_iter().map(|x| x * noise).collect::<Vec<_>>();
        for p in &lex.pairs {
            let b = base(&mut r);
            let a = 0.6 + 0.3 * r.random::<f64>();
            rows.push(&p.male, add(&b, &g, a));
            rows.push(&p.female, add(&b, &g, -a));
        }
        for w in lex.seeds.male.iter() {
            let b = base(&mut r);
            rows.push(w, add(&b, &g, 0.7));
        }
        for w in lex.seeds.female.iter() {
            let b = base(&mut r);
            rows.push(w, add(&b, &g, -0.7));
        }
        for o in &lex.occupation_pairs {
            let b = base(&mut r);
            let lean = 0.2 + 0.4 * r.random::<f64>();
            rows.push(&o.masculine, add(&b, &g, lean));
            rows.push(&o.feminine, add(&b, &g, -0.3 * lean));
        }
        for w in lex.neutral.all() {
            let b = base(&mut r);
            let lean = 0.5 * (r.random::<f64>() - 0.5);
            rows.push(w, add(&b, &g, lean));
        }
        for i in 0..fillers {
            let b = base(&mut r);
            rows.push(&format!("{tag}filler{i}"), b);
        }
        out.push(EmbeddingSpace::from_rows(tag, &rows.words, &rows.rows).unwrap());
    }
    out
}

/// Bundled lexicon with one synthetic space per language.
pub fn bundled_fixture(seed: u64, d: usize) -> (GenderLexicon, Vec<EmbeddingSpace>) {
    let lex = bundled_lexicon();
    let spaces = language_spaces(&lex, seed, d, 30);
    (lex, spaces)
}

/// Source-to-target dictionary pairing words by position.
pub fn positional_dictionary(source: &EmbeddingSpace, target: &EmbeddingSpace) -> String {
    source
        .words()
        .iter()
        .zip(target.words())
        .map(|(s, t)| format!("{s}\t{t}\n"))
        .collect()
}

/// Writes each language's space as `<tag>.vec` and returns the paths.
pub fn write_spaces(dir: &Path, spaces: &[EmbeddingSpace]) -> Vec<PathBuf> {
    spaces
        .iter()
        .map(|s| {
            let p = dir.join(format!("{}.vec", s.language_tag()));
            save_vec(s, &p, 17).unwrap();
            p
        })
        .collect()
}

pub fn run_bin(args: &[&str]) -> Output {
    run_bin_env(args, &[])
}

pub fn run_bin_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.args(args).env("RUST_LOG", "error");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

pub fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

pub fn run_bin_in(dir: &Path, args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(BIN);
    cmd.current_dir(dir).args(args).env("RUST_LOG", "error");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

/// Runs align → merge → debias → synth-corpus → reports inside `dir` with
/// relative paths, using `threads` workers. Returns every step's stdout.
pub fn run_pipeline(dir: &Path, threads: usize) -> Result<Vec<String>, String> {
    let (_, spaces) = bundled_fixture(21, 24);
    write_spaces(dir, &spaces);
    let threads = threads.to_string();
    let env = [("DEBIAS_EMBED_THREADS", threads.as_str())];
    let mut steps: Vec<Vec<String>> = Vec::new();
    for src in &spaces[1..] {
        let tag = src.language_tag();
        std::fs::write(dir.join(format!("{tag}-en.txt")), positional_dictionary(src, &spaces[0])).unwrap();
        steps.push(
            [
                "align", "--src", &format!("{tag}.vec"), "--src-lang", tag, "--tgt", "en.vec", "--tgt-lang", "en",
                "--dict", &format!("{tag}-en.txt"), "--out", &format!("{tag}-aligned.vec"),
            ]
            .map(String::from)
            .to_vec(),
        );
    }
    let mut merge = vec!["merge".to_string(), "--input".into(), "en=en.vec".into()];
    for src in &spaces[1..] {
        let tag = src.language_tag();
        merge.extend(["--input".into(), format!("{tag}={tag}-aligned.vec")]);
    }
    merge.extend(["--out".into(), "merged.vec".into()]);
    steps.push(merge);
    let rest: [&[&str]; 5] = [
        &["debias", "--embedding", "merged.vec", "--variant", "eqr", "--k", "4", "--out", "eqr.vec"],
        &["synth-corpus", "--embedding", "merged.vec", "--language", "en", "--records", "800", "--out", "bios.tsv"],
        &[
            "report", "--inbias", "--embedding", "merged.vec", "--label", "Orig", "--embedding", "eqr.vec", "--label",
            "EQR", "--out", "inbias.json", "--csv", "inbias.csv",
        ],
        &["report", "--xscore", "--embedding", "merged.vec", "--out", "xscore.json"],
        &[
            "report", "--exbias", "--embedding", "merged.vec", "--label", "Orig", "--embedding", "eqr.vec", "--label",
            "EQR", "--corpus", "bios.tsv", "--language", "en", "--epochs", "100", "--out", "exbias.json",
        ],
    ];
    steps.extend(rest.iter().map(|s| s.iter().map(|a| a.to_string()).collect()));
    let mut outputs = Vec::new();
    for step in &steps {
        let args: Vec<&str> = step.iter().map(String::as_str).collect();
        let o = run_bin_in(dir, &args, &env);
        if o.status.code() != Some(0) {
            return Err(format!("`{}` failed: {}", step.join(" "), stderr(&o)));
        }
        outputs.push(stdout(&o));
    }
    Ok(outputs)
}

/// Differences between two pipeline directories: every file must match
/// byte-for-byte, except manifests, which may differ only in `created_at`.
pub fn directory_differences(a: &Path, b: &Path) -> Vec<String> {
    let names = |d: &Path| {
        let mut v: Vec<String> = std::fs::read_dir(d)
            .unwrap()
            .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
            .collect();
        v.sort();
        v
    };
    let (na, nb) = (names(a), names(b));
    if na != nb {
        return vec![format!("file lists differ: {na:?} vs {nb:?}")];
    }
    let mut diffs = Vec::new();
    for name in &na {
        let (x, y) = (std::fs::read(a.join(name)).unwrap(), std::fs::read(b.join(name)).unwrap());
        let same = if name.ends_with(".manifest.json") {
            let strip = |bytes: &[u8]| {
                let mut v: serde_json::Value = serde_json::from_slice(bytes).unwrap();
                v.as_object_mut().unwrap().remove("created_at");
                v
            };
            strip(&x) == strip(&y)
        } else {
            x == y
        };
        if !same {
            diffs.push(name.clone());
        }
    }
    diffs
}
