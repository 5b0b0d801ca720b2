use std::path::PathBuf;
use std::time::Duration;

use anyhow::{anyhow, Context, Result};
use oodchess::engine::{engine_from_env, Engine, EngineConfig, EngineKind, SearchLimit};
use oodchess::kernel::Variant;
use oodchess::policy::{EnginePolicy, Policy, PolicyEndpoint, PolicyError, RandomLegal, UniformPolicy, WirePolicy};

use crate::args::PolicyArgs;
use crate::run::{ErrorClass, Run};

pub const ENGINE_VAR: &str = "OODCHESS_ENGINE";
pub const VARIANT_ENGINE_VAR: &str = "OODCHESS_VARIANT_ENGINE";

/// The engine binary: an explicit path, else the environment variable for
/// the engine kind.
pub fn engine_path(explicit: Option<PathBuf>, kind: EngineKind) -> Result<PathBuf> {
    let var = match kind {
        EngineKind::Classic => ENGINE_VAR,
        EngineKind::VariantCapable => VARIANT_ENGINE_VAR,
    };
    let path = match explicit {
        Some(p) => p,
        None => engine_from_env(var)
            .ok_or_else(|| anyhow!("no engine binary: pass a path or set {var}"))
            .context(ErrorClass::Engine)?,
    };
    if !path.is_file() {
        return Err(anyhow!("engine binary {} does not exist", path.display())).context(ErrorClass::Engine);
    }
    Ok(path)
}

/// Oracle engine for `variant`: Horde needs a variant-capable engine.
pub fn oracle_engine(explicit: Option<PathBuf>, variant: Variant, run: &mut Run) -> Result<Engine> {
    let kind = if variant == Variant::Horde { EngineKind::VariantCapable } else { EngineKind::Classic };
    let path = engine_path(explicit, kind)?;
    run.engine(&path);
    let mut engine = Engine::spawn(&EngineConfig::new(&path, kind))?;
    engine.configure_variant(variant)?;
    Ok(engine)
}

/// A parsed `--policy` value that can be instantiated repeatedly.
#[derive(Clone, Debug)]
pub enum PolicySource {
    RandomLegal,
    Uniform,
    Engine { path: PathBuf, kind: EngineKind, limit: SearchLimit, skill: Option<u32> },
    Remote { endpoint: PolicyEndpoint, timeout: Duration },
}

impl PolicySource {
    pub fn parse(args: &PolicyArgs) -> Result<PolicySource> {
        let spec = args.policy.as_str();
        let engine = |kind: EngineKind, path: Option<&str>| -> Result<PolicySource> {
            Ok(PolicySource::Engine {
                path: engine_path(path.map(PathBuf::from), kind)?,
                kind,
                limit: args.depth.map_or(SearchLimit::Movetime(args.movetime), SearchLimit::Depth),
                skill: args.skill,
            })
        };
        match spec.split_once(':') {
            _ if spec == "random-legal" => Ok(PolicySource::RandomLegal),
            _ if spec == "uniform" => Ok(PolicySource::Uniform),
            _ if spec == "engine" => engine(EngineKind::Classic, None),
            _ if spec == "variant-engine" => engine(EngineKind::VariantCapable, None),
            Some(("engine", path)) => engine(EngineKind::Classic, Some(path)),
            Some(("variant-engine", path)) => engine(EngineKind::VariantCapable, Some(path)),
            Some(("tcp" | "stdio", _)) => Ok(PolicySource::Remote {
                endpoint: spec.parse().context(ErrorClass::Usage)?,
                timeout: Duration::from_millis(args.timeout_ms),
            }),
            _ => Err(anyhow!(
                "unknown policy {spec:?}; expected random-legal, uniform, engine[:PATH], variant-engine[:PATH], \
                 tcp://HOST:PORT or stdio:COMMAND"
            ))
            .context(ErrorClass::Usage),
        }
    }

    /// Notes engines and nondeterminism in the run manifest.
    pub fn record(&self, run: &mut Run) {
        match self {
            PolicySource::Engine { path, .. } => run.engine(path),
            PolicySource::Remote { .. } => run.nondeterministic("remote policy"),
            _ => {}
        }
    }

    pub fn instantiate(&self, seed: u64) -> Result<Box<dyn Policy>, PolicyError> {
        Ok(match self {
            PolicySource::RandomLegal => Box::new(RandomLegal::new(seed)),
            PolicySource::Uniform => Box::new(UniformPolicy),
            PolicySource::Engine { path, kind, limit, skill } => {
                let mut engine = Engine::spawn(&EngineConfig::new(path, *kind))?;
                if let Some(level) = skill {
                    engine.set_skill(*level)?;
                }
                let name = engine.name().unwrap_or("engine").to_string();
                Box::new(EnginePolicy::new(name, engine, *limit))
            }
            PolicySource::Remote { endpoint, timeout } => Box::new(WirePolicy::connect(endpoint, *timeout)?),
        })
    }
}

/// Builds the policy named by `args.policy` and records it in the run.
pub fn build(args: &PolicyArgs, seed: u64, run: &mut Run) -> Result<Box<dyn Policy>> {
    let source = PolicySource::parse(args)?;
    source.record(run);
    source.instantiate(seed).with_context(|| format!("starting policy {}", args.policy))
}
