use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use okit_core::coxeter::DEFAULT_ORDER_CAP;
use okit_core::hecke_kl::load_or_build;
use okit_core::koszulver::{verify_s5c4, verify_t11, verify_t21, verify_tback, verify_tbgs};
use okit_core::parablock::bgg_complex_profile;
use okit_core::stratblock::{b_block_data, c_ext_profile};
use okit_core::{
    Block, BlockSpec, CBlock, CoxeterDiagram, CoxeterGroup, Element, Flavor, LaurentPoly, LinearData, MultMatrix,
    OkitError, ParabolicSubset, RegularBlock, VerifyReport,
};

#[derive(Parser)]
#[command(name = "okit", version, about = "Graded combinatorics of category O blocks")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Elements, order and Coxeter matrix.
    Group {
        #[command(flatten)]
        common: Common,
        /// Print the canonical word of every element, one per line.
        #[arg(long)]
        list: bool,
    },
    /// Kazhdan-Lusztig polynomial P_{x,y} in q, or every nonzero one.
    Kl(Common),
    /// mu(x, y), or every nonzero mu(z, y) when --x is omitted.
    Mu(Common),
    /// Graded decomposition matrix of a block.
    Decmat(Common),
    /// Graded Cartan matrix of a block.
    Cartan(Common),
    /// Tilting Delta-flags of a block (rows tiltings, variable v).
    Tilt(Common),
    /// BGG complex of Delta_G(x) in the regular block.
    Bgg(Common),
    /// Linear tilting coresolution or projective resolution of Delta(x).
    Linres {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value_t = ResKind::Tilting)]
        kind: ResKind,
    },
    /// Graded Ext profile in the block C_e^H.
    Ext(Common),
    /// Exact numeric checks of the duality and stratification identities.
    Verify {
        #[arg(value_enum)]
        theorem: Theorem,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// Coxeter type, e.g. A3, B2, D4, I2(5).
    #[arg(long = "type")]
    diagram: String,
    /// Singular generators, e.g. 1,2.
    #[arg(long = "G", default_value = "")]
    g: String,
    /// Parabolic generators, e.g. 3.
    #[arg(long = "H", default_value = "")]
    h: String,
    #[arg(long)]
    x: Option<String>,
    #[arg(long)]
    y: Option<String>,
    /// regular, singular, parabolic, singular-parabolic, B or C; inferred from G/H when omitted.
    #[arg(long)]
    flavor: Option<String>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Refuse groups with more elements than this.
    #[arg(long, default_value_t = DEFAULT_ORDER_CAP)]
    cap: u64,
    /// KL cache directory; defaults to $OKIT_CACHE, no caching if unset.
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ResKind {
    Tilting,
    Projective,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Theorem {
    T21,
    Tbgs,
    Tback,
    T11,
    S5c4,
}

enum Failure {
    Usage(String),
    Breach(String),
}

impl From<OkitError> for Failure {
    fn from(e: OkitError) -> Self {
        match e {
            OkitError::InvariantBreach(_) => Failure::Breach(e.to_string()),
            e => Failure::Usage(e.to_string()),
        }
    }
}

type Out = std::result::Result<(String, bool), Failure>;

struct Ctx {
    group: Arc<CoxeterGroup>,
    g: ParabolicSubset,
    h: ParabolicSubset,
    format: Format,
    cache: Option<PathBuf>,
}

impl Ctx {
    fn new(c: &Common) -> std::result::Result<Self, Failure> {
        let diagram: CoxeterDiagram = c.diagram.parse()?;
        let group = CoxeterGroup::build_with_cap(diagram, c.cap)?;
        let g: ParabolicSubset = c.g.parse()?;
        let h: ParabolicSubset = c.h.parse()?;
        group.check_subset(g)?;
        group.check_subset(h)?;
        let cache = c.cache.clone().or_else(|| std::env::var_os("OKIT_CACHE").map(PathBuf::from));
        Ok(Self { group, g, h, format: c.format, cache })
    }

    fn regular(&self) -> std::result::Result<Arc<RegularBlock>, Failure> {
        let (kl, _) = load_or_build(self.group.clone(), self.cache.as_deref())?;
        Ok(Arc::new(RegularBlock::new(Arc::new(kl))))
    }

    fn element(&self, s: &Option<String>, name: &str) -> std::result::Result<Element, Failure> {
        let s = s.as_deref().ok_or_else(|| Failure::Usage(format!("--{name} is required")))?;
        Ok(self.group.parse(s)?)
    }

    fn spec(&self, flavor: &Option<String>) -> std::result::Result<BlockSpec, Failure> {
        let flavor = match flavor {
            Some(f) => f.parse()?,
            None => BlockSpec::default_flavor(self.g, self.h),
        };
        Ok(BlockSpec::new(self.group.diagram(), self.g, self.h, flavor)?)
    }

    fn matrix(&self, m: &MultMatrix, var: &str) -> String {
        match self.format {
            Format::Table => m.to_table(&self.group, var),
            Format::Json => format!("{}\n", m.to_json(&self.group)),
            Format::Csv => m.to_csv(&self.group, var),
        }
    }

    fn json_or(&self, v: Value, text: impl FnOnce() -> String) -> String {
        match self.format {
            Format::Json => format!("{v}\n"),
            _ => text(),
        }
    }
}

fn poly_json(p: &LaurentPoly) -> Value {
    serde_json::to_value(p).expect("serializable")
}

fn run_group(c: &Common, list: bool) -> Out {
    let ctx = Ctx::new(c)?;
    let g = &ctx.group;
    let words: Vec<String> = g.elements().map(|w| g.format(w)).collect();
    let v = json!({
        "type": g.diagram().to_string(),
        "rank": g.rank(),
        "order": g.order(),
        "coxeter_matrix": g.coxeter_matrix(),
        "elements": words,
    });
    let text = || {
        if list {
            return words.iter().map(|w| format!("{w}\n")).collect();
        }
        let mut s = format!("type {}\nrank {}\norder {}\n", g.diagram(), g.rank(), g.order());
        for row in g.coxeter_matrix() {
            let r: Vec<String> = row.iter().map(|m| m.to_string()).collect();
            s.push_str(&format!("{}\n", r.join(" ")));
        }
        s
    };
    Ok((ctx.json_or(v, text), true))
}

fn run_kl(c: &Common) -> Out {
    let ctx = Ctx::new(c)?;
    let reg = ctx.regular()?;
    let g = &ctx.group;
    let kl = reg.kl();
    let pairs: Vec<(Element, Element)> = match (&c.x, &c.y) {
        (Some(_), Some(_)) => vec![(ctx.element(&c.x, "x")?, ctx.element(&c.y, "y")?)],
        (None, None) => g
            .elements()
            .flat_map(|y| g.lower_interval(y).into_iter().map(move |x| (x, y)))
            .collect(),
        _ => return Err(Failure::Usage("give both --x and --y, or neither".into())),
    };
    let single = pairs.len() == 1 && c.x.is_some();
    let mut rows = Vec::new();
    let mut text = String::new();
    for (x, y) in pairs {
        let p = kl.kl_poly(x, y)?;
        rows.push(json!({ "x": g.format(x), "y": g.format(y), "p": poly_json(&p) }));
        let s = p.to_string_ascending("q");
        if single {
            text.push_str(&format!("{s}\n"));
        } else if ctx.format == Format::Csv {
            text.push_str(&format!("\"{}\",\"{}\",{s}\n", g.format(x), g.format(y)));
        } else {
            text.push_str(&format!("{}\t{}\t{s}\n", g.label(x), g.label(y)));
        }
    }
    let v = if single { rows.remove(0) } else { Value::Array(rows) };
    Ok((ctx.json_or(v, || text), true))
}

fn run_mu(c: &Common) -> Out {
    let ctx = Ctx::new(c)?;
    let reg = ctx.regular()?;
    let g = &ctx.group;
    let y = ctx.element(&c.y, "y")?;
    if c.x.is_some() {
        let x = ctx.element(&c.x, "x")?;
        let m = reg.kl().mu(x, y)?;
        let v = json!({ "x": g.format(x), "y": g.format(y), "mu": m.to_string() });
        return Ok((ctx.json_or(v, || format!("{m}\n")), true));
    }
    let list: Vec<(Element, String)> = reg.kl().mu_list(y).map(|(z, m)| (z, m.to_string())).collect();
    let v = Value::Array(list.iter().map(|(z, m)| json!({ "x": g.format(*z), "mu": m })).collect());
    let text = || list.iter().map(|(z, m)| format!("{}\t{m}\n", g.label(*z))).collect();
    Ok((ctx.json_or(v, text), true))
}

fn run_decmat(c: &Common) -> Out {
    let ctx = Ctx::new(c)?;
    let spec = ctx.spec(&c.flavor)?;
    let reg = ctx.regular()?;
    let m = match spec.flavor {
        Flavor::C => CBlock::new(reg, ctx.h)?.standard_dec_matrix().clone(),
        Flavor::B => return Err(Failure::Usage("decomposition matrices of B blocks are not modelled".into())),
        _ => Block::new(reg, spec)?.dec_matrix().clone(),
    };
    Ok((ctx.matrix(&m, "v"), true))
}

fn run_cartan(c: &Common) -> Out {
    let ctx = Ctx::new(c)?;
    let spec = ctx.spec(&c.flavor)?;
    let reg = ctx.regular()?;
    let m = match spec.flavor {
        Flavor::C => CBlock::new(reg, ctx.h)?.cartan().clone(),
        Flavor::B => b_block_data(&reg, ctx.g, ctx.h)?.cartan,
        _ => Block::new(reg, spec)?.cartan().clone(),
    };
    Ok((ctx.matrix(&m, "v"), true))
}

fn run_tilt(c: &Common) -> Out {
    let ctx = Ctx::new(c)?;
    let spec = ctx.spec(&c.flavor)?;
    let data = LinearData::new(ctx.regular()?, spec)?;
    let m = data.tilting_matrix()?;
    if c.x.is_none() {
        return Ok((ctx.matrix(m, "v"), true));
    }
    let g = &ctx.group;
    let x = ctx.element(&c.x, "x")?;
    let i = m.position(x).ok_or_else(|| OkitError::NotInIndexSet(g.format(x)))?;
    let terms: Vec<(Element, &LaurentPoly)> =
        m.index().iter().enumerate().map(|(j, &y)| (y, m.at(i, j))).filter(|(_, p)| !p.is_zero()).collect();
    let v = json!({
        "x": g.format(x),
        "flag": terms.iter().map(|(y, p)| json!({ "w": g.format(*y), "coef": poly_json(p) })).collect::<Vec<_>>(),
    });
    let text = || {
        let parts: Vec<String> =
            terms.iter().map(|(y, p)| format!("({})D({})", p.to_string_descending("v"), g.label(*y))).collect();
        format!("{}\n", parts.join(" + "))
    };
    Ok((ctx.json_or(v, text), true))
}

fn run_bgg(c: &Common) -> Out {
    let ctx = Ctx::new(c)?;
    let x = ctx.element(&c.x, "x")?;
    let p = bgg_complex_profile(&*ctx.regular()?, ctx.g, x)?;
    Ok((ctx.json_or(p.to_json(&ctx.group), || p.render(&ctx.group, "D")), true))
}

fn run_linres(c: &Common, kind: ResKind) -> Out {
    let ctx = Ctx::new(c)?;
    let spec = ctx.spec(&c.flavor)?;
    let data = LinearData::new(ctx.regular()?, spec)?;
    let x = ctx.element(&c.x, "x")?;
    let (p, sym) = match kind {
        ResKind::Tilting => (data.linear_tilting_coresolution(x)?, "T"),
        ResKind::Projective => (data.linear_projective_resolution(x)?, "P"),
    };
    Ok((ctx.json_or(p.to_json(&ctx.group), || p.render(&ctx.group, sym)), true))
}

fn run_ext(c: &Common) -> Out {
    let ctx = Ctx::new(c)?;
    if !ctx.g.is_empty() {
        return Err(Failure::Usage("Ext profiles are computed for C_e^H only; drop --G".into()));
    }
    let reg = ctx.regular()?;
    let cb = CBlock::new(reg.clone(), ctx.h)?;
    let data = LinearData::new(reg, *cb.spec())?;
    let (x, y) = (ctx.element(&c.x, "x")?, ctx.element(&c.y, "y")?);
    let rep = c_ext_profile(&data, &cb, x, y)?;
    let g = &ctx.group;
    let text = || {
        let mut s = format!("x {}\ny {}\n", g.label(x), g.label(y));
        for e in &rep.entries {
            s.push_str(&format!("k={} m={} dim={}\n", e.k, e.m, e.dim));
        }
        s.push_str(&format!("rank {}\next_dim {}\nbounds_ok {}\n", rep.rank, rep.ext_dim, rep.bounds_ok));
        s
    };
    Ok((ctx.json_or(rep.to_json(g), text), true))
}

fn run_verify(theorem: Theorem, c: &Common) -> Out {
    let ctx = Ctx::new(c)?;
    let reg = ctx.regular()?;
    let rep: VerifyReport = match theorem {
        Theorem::T21 => verify_t21(&reg)?,
        Theorem::Tbgs => verify_tbgs(&reg, ctx.g)?,
        Theorem::Tback => verify_tback(&reg, ctx.g, ctx.h)?,
        Theorem::T11 => verify_t11(&reg, ctx.g, ctx.h)?,
        Theorem::S5c4 => verify_s5c4(&reg, ctx.h)?,
    };
    let text = || {
        let mut s = format!(
            "{} {} {} entries checked\n",
            rep.theorem,
            if rep.pass { "pass" } else { "FAIL" },
            rep.checked_entries
        );
        if let Some(w) = &rep.worst {
            s.push_str(&format!("first mismatch at ({}, {}): expected {}, got {}\n", w.x, w.y, w.expected, w.got));
        }
        s
    };
    Ok((ctx.json_or(rep.to_json(), text), rep.pass))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let out = match &cli.cmd {
        Cmd::Group { common, list } => run_group(common, *list),
        Cmd::Kl(c) => run_kl(c),
        Cmd::Mu(c) => run_mu(c),
        Cmd::Decmat(c) => run_decmat(c),
        Cmd::Cartan(c) => run_cartan(c),
        Cmd::Tilt(c) => run_tilt(c),
        Cmd::Bgg(c) => run_bgg(c),
        Cmd::Linres { common, kind } => run_linres(common, *kind),
        Cmd::Ext(c) => run_ext(c),
        Cmd::Verify { theorem, common } => run_verify(*theorem, common),
    };
    match out {
        Ok((text, pass)) => {
            print!("{text}");
            if pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Breach(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
