//! Command-line reports over the `endtree` library.
//!
//! Every subcommand produces a plain-text report and the same data as JSON
//! (`--json`). Exit status is 0 on success, 1 when the library rejects the
//! input or a check fails, and 2 for usage errors.

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{ArgGroup, Args, Parser, Subcommand};
use serde_json::{json, Value};

use endtree::bratteli::{BratteliDiagram, Cuts};
use endtree::cuntz::{rho, seeded_representation_checks, verify_representation};
use endtree::dimension::{Certificate, DimensionGroup, Element, Positivity};
use endtree::groupoid::{germ_exists, isometry_witness, tail_equivalent, DiagramEdge, EndPoint, Germ, GermGroupoid};
use endtree::json::{tree_from_value, TreeSpec};
use endtree::rigidity::{is_locally_rigid, isometry_group_order, RigidityStatus};
use endtree::thompson::PrefixMap;
use endtree::tree::TreeSystem;
use endtree::ultrametric::FiniteUltrametricSpace;

#[derive(Debug, Parser)]
#[command(name = "endtree", version, about = "Exact computations with end spaces of trees")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Print the report as JSON.
    #[arg(long, global = true)]
    pub json: bool,

    /// Write the report to a file instead of standard output.
    #[arg(long, global = true, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

/// Exactly one tree source.
#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct TreeInput {
    /// Built-in tree: cantor, fibonacci, sturmian, regular(n), ary(n), ended(n).
    #[arg(long, value_name = "NAME")]
    pub builtin: Option<String>,

    /// Tree-system JSON file.
    #[arg(long, value_name = "PATH")]
    pub file: Option<PathBuf>,

    /// Inline tree-system JSON.
    #[arg(long, value_name = "JSON")]
    pub spec: Option<String>,

    /// JSON file holding a 0/1 transition matrix, bare or as {"kind":"sft","matrix":…}.
    #[arg(long, value_name = "PATH")]
    pub sft: Option<PathBuf>,

    /// Continued fraction coefficients as `prefix;cycle`, e.g. `3,4;1`.
    #[arg(long, value_name = "COEFFS")]
    pub cfrac: Option<String>,
}

fn positive(s: &str) -> Result<usize, String> {
    match s.parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(format!("`{s}` is not a positive integer")),
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a tree system and list every problem found.
    Validate {
        #[command(flatten)]
        input: TreeInput,
    },
    /// Tree of closed-ball partitions of a finite ultrametric space.
    Dendrogram {
        /// Distance-matrix JSON: {"points": [...], "dist": [["p/q", ...], ...]}.
        #[arg(long, value_name = "PATH")]
        space: PathBuf,
    },
    /// Bratteli diagram of the subtree classes.
    Bratteli {
        #[command(flatten)]
        input: TreeInput,
        /// Emit Graphviz DOT.
        #[arg(long)]
        dot: bool,
        #[arg(long, default_value = "4", value_parser = positive)]
        levels: usize,
    },
    /// Telescope the diagram at levels `offset, offset + every, …`.
    Telescope {
        #[command(flatten)]
        input: TreeInput,
        #[arg(long, value_parser = positive)]
        every: usize,
        #[arg(long, default_value_t = 0)]
        offset: usize,
        #[arg(long, default_value = "4", value_parser = positive)]
        levels: usize,
    },
    /// Rank, order unit, Perron state and positive cone of the dimension group.
    Dimgroup {
        #[command(flatten)]
        input: TreeInput,
        /// Element to test, written `level:v0,v1,…`. Repeatable.
        #[arg(long = "element", value_name = "LEVEL:VECTOR")]
        elements: Vec<String>,
        /// Pushforward budget for positivity decisions.
        #[arg(long, default_value = "200", value_parser = positive)]
        bound: usize,
    },
    /// Local rigidity verdict and isometry group order.
    Rigidity {
        #[command(flatten)]
        input: TreeInput,
    },
    /// Germs of the local isometry groupoid and their diagram path pairs.
    Germs {
        #[command(flatten)]
        input: TreeInput,
        #[arg(long, default_value_t = 2)]
        level: usize,
        /// Show the path pair of each germ.
        #[arg(long)]
        kappa: bool,
        /// Compose the germs FROM → VIA and VIA → TO (vertex paths like `010` or `ε`).
        #[arg(long, num_args = 3, value_names = ["FROM", "VIA", "TO"])]
        compose: Option<Vec<String>>,
    },
    /// Tail equivalence of two ends given as child-index sequences `prefix;cycle`.
    Tailer {
        #[command(flatten)]
        input: TreeInput,
        #[arg(long, value_name = "LABELS")]
        x: String,
        #[arg(long, value_name = "LABELS")]
        y: String,
        /// Depth at which the witness isometry is checked.
        #[arg(long, default_value = "10", value_parser = positive)]
        depth: usize,
    },
    /// Higman–Thompson prefix maps and their Cuntz representation.
    #[command(group(ArgGroup::new("action").required(true).multiple(true).args(["verify", "maps"])))]
    Thompson {
        /// Run seeded random representation checks.
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        /// Alphabet size.
        #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u8).range(2..=36))]
        n: u8,
        /// Maximal word length of random maps.
        #[arg(long, default_value = "3", value_parser = positive)]
        depth: usize,
        #[arg(long, default_value = "100", value_parser = positive)]
        count: usize,
        /// Prefix map as inline JSON or a file path; give two to compose (first after second).
        #[arg(long = "map", value_name = "JSON|PATH")]
        maps: Vec<String>,
    },
    /// Number of vertices on each level.
    Profile {
        #[command(flatten)]
        input: TreeInput,
        #[arg(long, default_value = "6", value_parser = positive)]
        levels: usize,
    },
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Domain(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) | CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Domain(m) | CliError::Io(m) => f.write_str(m),
        }
    }
}

impl From<endtree::Error> for CliError {
    fn from(e: endtree::Error) -> Self {
        CliError::Domain(e.to_string())
    }
}

/// A finished report. `ok` is false when a check inside the report failed.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub text: String,
    pub json: Value,
    pub ok: bool,
}

impl Report {
    fn new(text: String, json: Value) -> Self {
        Report { text, json, ok: true }
    }

    pub fn render(&self, as_json: bool) -> String {
        if as_json {
            let mut s = serde_json::to_string_pretty(&self.json).expect("reports serialize");
            s.push('\n');
            s
        } else {
            self.text.clone()
        }
    }
}

pub fn parse_args<I, T>(argv: I) -> Result<Cli, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    Cli::try_parse_from(argv)
}

/// Runs a parsed command, writes its output, and returns the exit status.
pub fn execute(cli: &Cli) -> Result<u8, CliError> {
    let report = run(&cli.command)?;
    let text = report.render(cli.json);
    match &cli.out {
        Some(path) => fs::write(path, text).map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(if report.ok { 0 } else { 1 })
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))
}

fn parse_json(text: &str) -> Result<Value, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Domain(format!("malformed input: invalid JSON: {e}")))
}

fn parse_list(s: &str) -> Result<Vec<u64>, CliError> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| CliError::Usage(format!("`{t}` is not a nonnegative integer"))))
        .collect()
}

fn parse_prefix_cycle(s: &str) -> Result<(Vec<u64>, Vec<u64>), CliError> {
    match s.split_once(';') {
        Some((p, c)) => Ok((parse_list(p)?, parse_list(c)?)),
        None => Ok((Vec::new(), parse_list(s)?)),
    }
}

fn load_tree(input: &TreeInput, unchecked: bool) -> Result<TreeSystem, CliError> {
    let from_value = |v: &Value| -> Result<TreeSystem, CliError> {
        if unchecked {
            Ok(TreeSpec::from_value(v)?.build_unchecked()?)
        } else {
            Ok(tree_from_value(v)?)
        }
    };
    if let Some(name) = &input.builtin {
        return Ok(TreeSystem::builtin(name)?);
    }
    if let Some(path) = &input.file {
        return from_value(&parse_json(&read(path)?)?);
    }
    if let Some(text) = &input.spec {
        return from_value(&parse_json(text)?);
    }
    if let Some(path) = &input.sft {
        let v = parse_json(&read(path)?)?;
        if v.is_array() {
            return Ok(tree_from_value(&json!({"kind": "sft", "matrix": v}))?);
        }
        return Ok(tree_from_value(&v)?);
    }
    if let Some(coeffs) = &input.cfrac {
        let (p, c) = parse_prefix_cycle(coeffs)?;
        return Ok(TreeSystem::from_continued_fraction(&p, &c)?);
    }
    Err(CliError::Usage("one tree source is required".into()))
}

fn path_string<T: fmt::Display>(p: &[T]) -> String {
    if p.is_empty() {
        return "ε".into();
    }
    let parts: Vec<String> = p.iter().map(ToString::to_string).collect();
    if parts.iter().all(|s| s.len() == 1) {
        parts.concat()
    } else {
        parts.join(",")
    }
}

fn parse_path(s: &str) -> Result<Vec<usize>, CliError> {
    let s = s.trim();
    if s.is_empty() || s == "ε" {
        return Ok(Vec::new());
    }
    let bad = || CliError::Usage(format!("`{s}` is not a vertex path"));
    if s.contains(',') {
        s.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect()
    } else {
        s.chars().map(|c| c.to_digit(10).map(|d| d as usize).ok_or_else(bad)).collect()
    }
}

fn edges_string(edges: &[DiagramEdge]) -> String {
    let parts: Vec<String> = edges.iter().map(|e| format!("{}:{}→{}#{}", e.level, e.source, e.target, e.index)).collect();
    if parts.is_empty() {
        "ε".into()
    } else {
        parts.join(" ")
    }
}

fn matrices_text(d: &BratteliDiagram, levels: usize) -> Result<String, CliError> {
    let mut text = String::new();
    for i in 0..levels {
        let m = d.matrix(i).ok_or_else(|| CliError::Domain(format!("level {i} is not described")))?;
        text.push_str(&format!("A_{i} = {m}\n"));
    }
    Ok(text)
}

fn periodicity_line(d: &BratteliDiagram) -> String {
    match d {
        BratteliDiagram::EventuallyPeriodic { prefix, cycle } => {
            format!("prefix of {} level(s), then a cycle of {}\n", prefix.len(), cycle.len())
        }
        BratteliDiagram::Explicit(m) => format!("{} described level(s)\n", m.len()),
    }
}

pub fn run(command: &Command) -> Result<Report, CliError> {
    match command {
        Command::Validate { input } => validate(input),
        Command::Dendrogram { space } => dendrogram(space),
        Command::Bratteli { input, dot, levels } => {
            let d = BratteliDiagram::from_tree(&load_tree(input, false)?)?;
            if *dot {
                let text = d.to_dot(*levels)?;
                return Ok(Report::new(text.clone(), json!({"dot": text})));
            }
            let text = format!("{}{}", periodicity_line(&d), matrices_text(&d, *levels)?);
            Ok(Report::new(text, d.to_json()))
        }
        Command::Telescope { input, every, offset, levels } => {
            let d = BratteliDiagram::from_tree(&load_tree(input, false)?)?;
            let cuts = Cuts::offset_every(*offset, *every);
            let t = d.telescope(&cuts)?;
            let text = format!("cuts {cuts}\n{}{}", periodicity_line(&t), matrices_text(&t, *levels)?);
            Ok(Report::new(text, json!({"cuts": cuts.to_string(), "diagram": t.to_json()})))
        }
        Command::Dimgroup { input, elements, bound } => dimgroup(input, elements, *bound),
        Command::Rigidity { input } => rigidity(input),
        Command::Germs { input, level, kappa, compose } => germs(input, *level, *kappa, compose.as_deref()),
        Command::Tailer { input, x, y, depth } => tailer(input, x, y, *depth),
        Command::Thompson { verify, seed, n, depth, count, maps } => thompson(*verify, *seed, *n, *depth, *count, maps),
        Command::Profile { input, levels } => {
            let ts = load_tree(input, false)?;
            let counts = ts.level_profile(*levels)?;
            let text: String = counts.iter().enumerate().map(|(i, c)| format!("level {i}: {c}\n")).collect();
            let values: Vec<String> = counts.iter().map(ToString::to_string).collect();
            Ok(Report::new(text, json!({"levels": values})))
        }
    }
}

fn validate(input: &TreeInput) -> Result<Report, CliError> {
    let ts = load_tree(input, true)?;
    let report = ts.validate();
    let mut text = if report.is_valid() {
        format!("valid ({} level(s) checked)\n", report.checked_levels)
    } else {
        format!("invalid ({} level(s) checked)\n", report.checked_levels)
    };
    for issue in &report.issues {
        text.push_str(&format!("  - {issue}\n"));
    }
    let json = serde_json::to_value(&report).expect("validation reports serialize");
    Ok(Report { text, json, ok: report.is_valid() })
}

fn dendrogram(path: &Path) -> Result<Report, CliError> {
    let space = FiniteUltrametricSpace::from_json(&read(path)?)?;
    let den = space.dendrogram()?;
    let labels = space.labels();
    let block = |b: &Vec<usize>| format!("{{{}}}", b.iter().map(|&p| labels[p].as_str()).collect::<Vec<_>>().join(","));
    let mut text = format!("{} point(s), {} distinct distance(s)\n", space.len(), den.distances.len());
    for (i, t) in den.distances.iter().enumerate() {
        let blocks: Vec<String> = den.blocks[i].iter().map(block).collect();
        text.push_str(&format!("level {i}: d = {t} ↦ e^-{i}; balls {}\n", blocks.join(" ")));
    }
    let order = isometry_group_order(&den.tree)?;
    let direct = space.isometry_group().len();
    text.push_str(&format!("isometry group order {order} (direct enumeration {direct})\n"));
    let json = json!({
        "distances": den.distances.iter().map(ToString::to_string).collect::<Vec<_>>(),
        "blocks": den.blocks.iter().map(|level| level.iter().map(|b| b.iter().map(|&p| labels[p].clone()).collect::<Vec<_>>()).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "tree": endtree::json::tree_to_json(&den.tree)?,
        "isometry_group_order": order.to_string(),
    });
    Ok(Report::new(text, json))
}

fn parse_element(s: &str) -> Result<(usize, Vec<i64>), CliError> {
    let bad = || CliError::Usage(format!("`{s}` is not an element `level:v0,v1,…`"));
    let (level, vector) = s.split_once(':').ok_or_else(bad)?;
    let level = level.trim().parse().map_err(|_| bad())?;
    let vector = vector.split(',').map(|t| t.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
    Ok((level, vector))
}

fn describe_positivity(p: &Positivity) -> String {
    match p {
        Positivity::Positive { level, vector } => {
            let v: Vec<String> = vector.iter().map(ToString::to_string).collect();
            format!("positive: [{}] at level {level}", v.join(", "))
        }
        Positivity::NotPositive(c) => format!(
            "not positive: {}",
            match c {
                Certificate::PerronNegative => "the Perron state is negative".to_string(),
                Certificate::PerronBoundary => "the Perron state vanishes on a nonzero element".to_string(),
                Certificate::LeadingTerm { coordinate, order } => {
                    format!("coordinate {coordinate} is eventually negative (leading term of order {order})")
                }
                Certificate::NonpositivePushforward { level } => format!("the pushforward to level {level} is nonpositive"),
            }
        ),
        Positivity::Unknown { bound } => format!("undecided within {bound} level(s)"),
    }
}

fn dimgroup(input: &TreeInput, elements: &[String], bound: usize) -> Result<Report, CliError> {
    let g = DimensionGroup::of_tree(&load_tree(input, false)?)?;
    let mut text = format!("rank {}\n", g.rank());
    let mut json = json!({"rank": g.rank(), "cone": g.cone_description()});
    if let (Some(p), Some(symbol)) = (g.perron(), g.perron_symbol()) {
        text.push_str(&format!("Perron value {symbol} = {p}\n"));
        json["perron_value"] = json!(p.to_string());
    }
    text.push_str(&format!("cone {}\n", g.cone_description()));
    if let Some(u) = g.order_unit_image()? {
        text.push_str(&format!("unit ↦ {u}\n"));
        json["unit_image"] = json!(u.to_string());
    }
    let mut queries = Vec::new();
    for e in elements {
        let (level, vector) = parse_element(e)?;
        let el = Element::from_i64(level, &vector);
        let verdict = describe_positivity(&g.is_positive(&el, bound)?);
        let state = g.evaluate(&el)?.map(|v| v.to_string());
        text.push_str(&format!("{el}: {verdict}"));
        if let Some(s) = &state {
            text.push_str(&format!("; state {s}"));
        }
        text.push('\n');
        queries.push(json!({"element": el.to_string(), "positivity": verdict, "state": state}));
    }
    json["elements"] = json!(queries);
    Ok(Report::new(text, json))
}

fn rigidity(input: &TreeInput) -> Result<Report, CliError> {
    let ts = load_tree(input, false)?;
    let verdict = is_locally_rigid(&ts)?;
    let order = isometry_group_order(&ts)?;
    let text = format!("{verdict}\nisometry group order: {order}\n");
    let status = match verdict.status {
        RigidityStatus::LocallyRigid => "LocallyRigid".to_string(),
        RigidityStatus::NotLocallyRigid => "NotLocallyRigid".to_string(),
        RigidityStatus::UnknownBeyondDepth(n) => format!("UnknownBeyondDepth({n})"),
    };
    let witness = verdict.witness.as_ref().map(|w| {
        json!({"level": w.level, "class": w.class, "path": w.path, "child_class": w.child_class, "multiplicity": w.multiplicity})
    });
    let json = json!({"status": status, "epsilon_level": verdict.epsilon_level, "witness": witness, "isometry_group_order": order.to_string()});
    Ok(Report::new(text, json))
}

fn germ_string(g: &Germ) -> String {
    format!("{} → {}", path_string(&g.source), path_string(&g.target))
}

fn germs(input: &TreeInput, level: usize, kappa: bool, compose: Option<&[String]>) -> Result<Report, CliError> {
    let g = GermGroupoid::new(Arc::new(load_tree(input, false)?))?;
    if let Some([from, via, to]) = compose {
        let (from, via, to) = (parse_path(from)?, parse_path(via)?, parse_path(to)?);
        let g1 = g.germ(&from, &via)?;
        let g2 = g.germ(&via, &to)?;
        let c = g.compose(&g2, &g1)?;
        let pp = g.kappa_star(&c)?;
        let text = format!(
            "({}) ∘ ({}) = {}\nshift {}\npath pair {} ⇒ {}\n",
            germ_string(&g2),
            germ_string(&g1),
            germ_string(&c),
            c.shift(),
            edges_string(&pp.source),
            edges_string(&pp.target)
        );
        return Ok(Report::new(text, json!({"germ": c, "path_pair": pp})));
    }
    let list = g.enumerate_germs(level)?;
    let mut text = format!("{} germ(s) at level {level} (rigid from level {})\n", list.len(), g.epsilon_level());
    let mut items = Vec::new();
    for germ in &list {
        text.push_str(&germ_string(germ));
        let mut item = json!({"source": germ.source, "target": germ.target});
        if kappa {
            let pp = g.kappa_star(germ)?;
            text.push_str(&format!("   {} ⇒ {}", edges_string(&pp.source), edges_string(&pp.target)));
            item["path_pair"] = serde_json::to_value(&pp).expect("path pairs serialize");
        }
        text.push('\n');
        items.push(item);
    }
    Ok(Report::new(text, json!({"level": level, "germs": items})))
}

fn end_point(tree: &Arc<TreeSystem>, s: &str) -> Result<EndPoint, CliError> {
    let (p, c) = parse_prefix_cycle(s)?;
    let to_usize = |v: Vec<u64>| v.into_iter().map(|x| x as usize).collect::<Vec<_>>();
    Ok(EndPoint::new(tree.clone(), to_usize(p), to_usize(c))?)
}

fn tailer(input: &TreeInput, x: &str, y: &str, depth: usize) -> Result<Report, CliError> {
    let tree = Arc::new(load_tree(input, false)?);
    let (x, y) = (end_point(&tree, x)?, end_point(&tree, y)?);
    let distance = x.distance(&y)?;
    let tail = tail_equivalent(&x, &y)?;
    let balls = germ_exists(&tree, &x.truncate(1), &y.truncate(1))?;
    let mut text = format!("x = {x}\ny = {y}\ndistance {distance}\n");
    let mut json = json!({"x": x.to_string(), "y": y.to_string(), "distance": distance.to_string(), "tail_index": tail, "isometric_level_one_balls": balls});
    let mut ok = true;
    match tail {
        Some(n) => {
            let w = isometry_witness(&x, &y)?.expect("tail equivalent points have a witness");
            let verified = w.verify(&tree, depth) && w.apply(&x.truncate(depth)) == Some(y.truncate(depth));
            ok = verified;
            text.push_str(&format!("tail equivalent from index {n}\n"));
            text.push_str(&format!(
                "witness: swap {} ↔ {}, {} at depth {depth}\n",
                path_string(&w.from),
                path_string(&w.to),
                if verified { "verified" } else { "FAILED" }
            ));
            json["witness"] = json!({"from": w.from, "to": w.to, "verified_depth": depth, "verified": verified});
        }
        None => text.push_str("not tail equivalent\n"),
    }
    text.push_str(&format!("balls below the level-1 vertices are {}isometric\n", if balls { "" } else { "not " }));
    Ok(Report { text, json, ok })
}

fn load_map(s: &str) -> Result<PrefixMap, CliError> {
    let text = if s.trim_start().starts_with('{') { s.to_string() } else { read(Path::new(s))? };
    Ok(PrefixMap::from_json(&text)?)
}

fn thompson(verify: bool, seed: u64, n: u8, depth: usize, count: usize, maps: &[String]) -> Result<Report, CliError> {
    let mut text = String::new();
    let mut json = json!({});
    let mut ok = true;
    if verify {
        let passed = seeded_representation_checks(n, depth, count, seed)?;
        ok &= passed == count;
        text.push_str(&format!("{passed}/{count} representation checks passed\n"));
        json["verify"] = json!({"n": n, "depth": depth, "seed": seed, "passed": passed, "count": count});
    }
    match maps {
        [] => {}
        [g] => {
            let g = load_map(g)?;
            let r = verify_representation(&g, &g)?;
            ok &= r.passed();
            text.push_str(&format!("g = {g}\nclass {}\nρ(g) = {}\nunitary {}\n", g.classify(), rho(&g), r.unitary));
            json["map"] = json!({"reduced": g.to_json(), "class": g.classify().to_string(), "rho": rho(&g).to_string(), "unitary": r.unitary});
        }
        [g, h] => {
            let (g, h) = (load_map(g)?, load_map(h)?);
            let gh = g.compose(&h)?;
            let r = verify_representation(&g, &h)?;
            ok &= r.passed();
            text.push_str(&format!(
                "g = {g}\nh = {h}\ng∘h = {gh}\nclass {}\nρ(g∘h) = {}\nρ(g∘h) = ρ(g)ρ(h): {}\n",
                gh.classify(),
                rho(&gh),
                r.homomorphism
            ));
            json["composition"] = json!({"reduced": gh.to_json(), "class": gh.classify().to_string(), "rho": rho(&gh).to_string(), "homomorphism": r.homomorphism});
        }
        _ => return Err(CliError::Usage("give at most two --map values".into())),
    }
    Ok(Report { text, json, ok })
}
