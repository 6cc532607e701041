//! Config files: TOML, `schema = 1`, strict.
//!
//! Unknown keys, wrong types, dimension mismatches and dangling references
//! are all collected and reported together, each with its key path.
//!
//! ```toml
//! schema = 1
//!
//! [system]
//! labels = ["e", "p"]
//! masses = [1.0, 1836.0]
//!
//! [potential]            # either `matrix = [[..]]` or a builder
//! builder = "two_body"
//! spring = 1.0
//! cm_trap = 0.0          # optional stiffness of a trap on the centre of mass
//!
//! [transforms.cm_r]      # builder: two_body | normal_modes | point | symplectic
//! builder = "two_body"
//!
//! [[divisions]]
//! name = "CM+R"
//! transform = "cm_r"     # default "identity"
//! parts = [{ name = "CM", modes = [0] }, { name = "R", modes = [1] }]
//!
//! [state]                # kind: ground | product
//! kind = "product"
//! transform = "cm_r"
//! free_width_ratio = 2.0 # or free_width = <absolute width>
//!
//! [noise]                # acts on modes of `frame`
//! frame = "cm_r"
//! target_modes = [1]
//! diffusion = [[0.1, 0.0], [0.0, 0.0]]
//! damping = 0.0
//!
//! [moments]              # measured in the coordinates of `frame`
//! frame = "cm_r"
//! means = [0.0, 1.0]
//! covariance = [[1.0, 0.0], [0.0, 1.0]]
//!
//! [run]
//! tol = 1e-10
//! grid = 512
//! extent = 6.0
//! horizon = 10.0
//! dt = 1e-3
//! checkpoints = 10
//! ```

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::gaussian_state::{FreeWidth, GaussianState};
use crate::hamiltonian::QuadraticHamiltonian;
use crate::open_system::NoiseSpec;
use crate::phase_space::{
    extend_point_transform, two_body_transform_for, DivisionSpec, ModeSystem, Part, SymplecticTransform,
    TransformRegistry,
};
use crate::entanglement::RegisteredDivision;
use crate::tolerances;

pub const SCHEMA: i64 = 1;
pub const IDENTITY: &str = "identity";

#[derive(Debug, Clone, PartialEq)]
pub enum TransformBuilder {
    TwoBody,
    NormalModes,
    /// Position map `T`, extended to `blockdiag(T, T⁻ᵀ)`.
    Point(DMatrix<f64>),
    /// Full `2n × 2n` matrix, checked against the canonicity tolerance.
    Symplectic(DMatrix<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransformDef {
    pub name: String,
    pub builder: TransformBuilder,
    pub displacement: Option<DVector<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DivisionDef {
    pub division: DivisionSpec,
    pub transform: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateDef {
    Ground,
    Product { transform: String, width: FreeWidth },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseDef {
    pub frame: String,
    pub noise: NoiseSpec,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentsDef {
    pub frame: String,
    pub means: DVector<f64>,
    pub covariance: DMatrix<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunParams {
    pub tol: f64,
    pub grid: usize,
    pub extent: f64,
    pub horizon: f64,
    pub dt: f64,
    pub checkpoints: usize,
}

impl Default for RunParams {
    fn default() -> Self {
        Self {
            tol: tolerances::CANONICITY,
            grid: tolerances::DEFAULT_GRID_POINTS,
            extent: tolerances::DEFAULT_GRID_EXTENT,
            horizon: tolerances::DEFAULT_HORIZON,
            dt: tolerances::DEFAULT_DT,
            checkpoints: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigDocument {
    pub system: ModeSystem,
    /// Position-space potential `V` (`n × n`).
    pub potential: DMatrix<f64>,
    /// Sorted by name.
    pub transforms: Vec<TransformDef>,
    pub divisions: Vec<DivisionDef>,
    pub state: StateDef,
    pub noise: Option<NoiseDef>,
    pub moments: Option<MomentsDef>,
    pub run: RunParams,
}

pub fn parse(path: impl AsRef<Path>) -> Result<ConfigDocument> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    parse_str(&text)
}

pub fn parse_str(text: &str) -> Result<ConfigDocument> {
    let table: Table = text.parse().map_err(|e: toml::de::Error| {
        let offset = e.span().map_or(text.len(), |s| s.start).min(text.len());
        let before = &text[..offset];
        let line = before.matches('\n').count() + 1;
        let column = before.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
        Error::Parse {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    let mut w = Walker::default();
    let doc = w.document(&table);
    match doc {
        Some(doc) if w.issues.is_empty() => Ok(doc),
        _ => Err(Error::Config { issues: w.issues }),
    }
}

impl ConfigDocument {
    pub fn n_modes(&self) -> usize {
        self.system.n_modes()
    }

    pub fn hamiltonian(&self) -> Result<QuadraticHamiltonian> {
        QuadraticHamiltonian::build(&self.system, &self.potential)
    }

    /// The matrix a transform definition expands to, before any canonicity check.
    pub fn expand(&self, def: &TransformDef) -> Result<(DMatrix<f64>, Option<DVector<f64>>)> {
        let matrix = match &def.builder {
            TransformBuilder::TwoBody => two_body_transform_for(&self.system)?.matrix().clone(),
            TransformBuilder::NormalModes => self.hamiltonian()?.normal_modes()?.transform.matrix().clone(),
            TransformBuilder::Point(t) => extend_point_transform(t)?.matrix().clone(),
            TransformBuilder::Symplectic(s) => s.clone(),
        };
        Ok((matrix, def.displacement.clone()))
    }

    pub fn transform(&self, def: &TransformDef) -> Result<SymplecticTransform> {
        let (matrix, displacement) = self.expand(def)?;
        let mut s = SymplecticTransform::with_tolerance(matrix, self.run.tol)?.with_labels("native", def.name.clone());
        if let Some(d) = displacement {
            s = s.with_displacement(d)?;
        }
        Ok(s)
    }

    pub fn registry(&self) -> Result<TransformRegistry> {
        let mut registry = TransformRegistry::new();
        for def in &self.transforms {
            registry.insert(def.name.clone(), self.transform(def)?);
        }
        Ok(registry)
    }

    pub fn lookup(&self, registry: &TransformRegistry, name: &str) -> Result<SymplecticTransform> {
        registry
            .get(name, self.n_modes())
            .ok_or_else(|| Error::UnreachableDivision { missing: vec![name.to_string()] })
    }

    pub fn registered_divisions(&self) -> Vec<RegisteredDivision> {
        self.divisions
            .iter()
            .map(|d| RegisteredDivision {
                division: d.division.clone(),
                transform: d.transform.clone(),
            })
            .collect()
    }

    pub fn state(&self, h: &QuadraticHamiltonian, registry: &TransformRegistry) -> Result<GaussianState> {
        match &self.state {
            StateDef::Ground => GaussianState::ground_state(h),
            StateDef::Product { transform, width } => {
                GaussianState::product_in_frame(h, &self.lookup(registry, transform)?, *width)
            }
        }
    }
}

#[derive(Default)]
struct Walker {
    issues: Vec<String>,
}

fn join(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn type_name(v: &Value) -> &'static str {
    v.type_str()
}

impl Walker {
    fn issue(&mut self, path: &str, message: impl std::fmt::Display) {
        self.issues.push(format!("{path}: {message}"));
    }

    fn allow(&mut self, table: &Table, path: &str, allowed: &[&str]) {
        for key in table.keys() {
            if !allowed.contains(&key.as_str()) {
                self.issue(&join(path, key), format!("unknown key (expected one of: {})", allowed.join(", ")));
            }
        }
    }

    fn table<'a>(&mut self, parent: &'a Table, key: &str, path: &str) -> Option<&'a Table> {
        match parent.get(key) {
            None => None,
            Some(Value::Table(t)) => Some(t),
            Some(v) => {
                self.issue(&join(path, key), format!("expected a table, found {}", type_name(v)));
                None
            }
        }
    }

    fn required<'a>(&mut self, table: &'a Table, key: &str, path: &str) -> Option<&'a Value> {
        let v = table.get(key);
        if v.is_none() {
            self.issue(&join(path, key), "missing required key");
        }
        v
    }

    fn number(&mut self, v: &Value, path: &str) -> Option<f64> {
        match v {
            Value::Float(x) if x.is_finite() => Some(*x),
            Value::Integer(i) => Some(*i as f64),
            Value::Float(x) => {
                self.issue(path, format!("expected a finite number, found {x}"));
                None
            }
            other => {
                self.issue(path, format!("expected a number, found {}", type_name(other)));
                None
            }
        }
    }

    fn opt_number(&mut self, table: &Table, key: &str, path: &str) -> Option<f64> {
        table.get(key).and_then(|v| self.number(v, &join(path, key)))
    }

    fn string(&mut self, v: &Value, path: &str) -> Option<String> {
        match v {
            Value::String(s) => Some(s.clone()),
            other => {
                self.issue(path, format!("expected a string, found {}", type_name(other)));
                None
            }
        }
    }

    fn index(&mut self, v: &Value, path: &str) -> Option<usize> {
        match v {
            Value::Integer(i) if *i >= 0 => Some(*i as usize),
            other => {
                self.issue(path, format!("expected a non-negative integer, found {other}"));
                None
            }
        }
    }

    fn array<'a>(&mut self, v: &'a Value, path: &str) -> Option<&'a Vec<Value>> {
        match v {
            Value::Array(a) => Some(a),
            other => {
                self.issue(path, format!("expected an array, found {}", type_name(other)));
                None
            }
        }
    }

    fn vector(&mut self, v: &Value, path: &str, len: Option<usize>) -> Option<DVector<f64>> {
        let items = self.array(v, path)?;
        let values: Vec<Option<f64>> = items
            .iter()
            .enumerate()
            .map(|(i, x)| self.number(x, &format!("{path}[{i}]")))
            .collect();
        let values: Option<Vec<f64>> = values.into_iter().collect();
        let values = values?;
        if let Some(n) = len {
            if values.len() != n {
                self.issue(path, format!("expected {n} entries, found {}", values.len()));
                return None;
            }
        }
        Some(DVector::from_vec(values))
    }

    fn matrix(&mut self, v: &Value, path: &str, dim: usize) -> Option<DMatrix<f64>> {
        let rows = self.array(v, path)?;
        if rows.len() != dim {
            self.issue(path, format!("expected {dim}x{dim} matrix, found {} rows", rows.len()));
            return None;
        }
        let mut m = DMatrix::zeros(dim, dim);
        let mut ok = true;
        for (i, row) in rows.iter().enumerate() {
            match self.vector(row, &format!("{path}[{i}]"), Some(dim)) {
                Some(r) => m.row_mut(i).copy_from(&r.transpose()),
                None => ok = false,
            }
        }
        ok.then_some(m)
    }

    fn indices(&mut self, v: &Value, path: &str, bound: usize) -> Option<Vec<usize>> {
        let items = self.array(v, path)?;
        let mut out = Vec::with_capacity(items.len());
        let mut ok = true;
        for (i, x) in items.iter().enumerate() {
            match self.index(x, &format!("{path}[{i}]")) {
                Some(k) if k < bound => out.push(k),
                Some(k) => {
                    self.issue(&format!("{path}[{i}]"), format!("mode index {k} out of range for {bound} modes"));
                    ok = false;
                }
                None => ok = false,
            }
        }
        ok.then_some(out)
    }

    fn document(&mut self, root: &Table) -> Option<ConfigDocument> {
        self.allow(
            root,
            "",
            &["schema", "system", "potential", "transforms", "divisions", "state", "noise", "moments", "run"],
        );
        match root.get("schema") {
            Some(Value::Integer(SCHEMA)) => {}
            Some(v) => self.issue("schema", format!("unsupported schema {v}, expected {SCHEMA}")),
            None => self.issue("schema", "missing required key (expected schema = 1)"),
        }

        let system = self.system(root);
        let n = system.as_ref().map(ModeSystem::n_modes);
        let potential = n.and_then(|n| self.potential(root, system.as_ref().expect("n implies system"), n));
        let transforms = self.transforms(root, n);
        let names: Vec<String> = transforms.iter().map(|t| t.name.clone()).collect();
        let resolves = |name: &str| name == IDENTITY || names.iter().any(|t| t == name);
        let divisions = self.divisions(root, n, &resolves);
        let state = self.state(root, &resolves);
        let noise = self.noise(root, n, &resolves);
        let moments = self.moments(root, n, &resolves);
        let run = self.run(root);

        Some(ConfigDocument {
            system: system?,
            potential: potential?,
            transforms,
            divisions,
            state: state?,
            noise,
            moments,
            run,
        })
    }

    fn system(&mut self, root: &Table) -> Option<ModeSystem> {
        let Some(t) = self.table(root, "system", "") else {
            if !root.contains_key("system") {
                self.issue("system", "missing required section");
            }
            return None;
        };
        self.allow(t, "system", &["labels", "masses"]);
        let masses = self
            .required(t, "masses", "system")
            .and_then(|v| self.vector(v, "system.masses", None))?;
        let n = masses.len();
        let labels = match t.get("labels") {
            Some(v) => {
                let items = self.array(v, "system.labels")?;
                let labels: Option<Vec<String>> = items
                    .iter()
                    .enumerate()
                    .map(|(i, x)| self.string(x, &format!("system.labels[{i}]")))
                    .collect();
                let labels = labels?;
                if labels.len() != n {
                    self.issue("system.labels", format!("expected {n} labels to match masses, found {}", labels.len()));
                    return None;
                }
                labels
            }
            None => (1..=n).map(|i| i.to_string()).collect(),
        };
        match ModeSystem::new(labels, masses.iter().copied().collect()) {
            Ok(s) => Some(s),
            Err(e) => {
                self.issue("system", e);
                None
            }
        }
    }

    fn potential(&mut self, root: &Table, system: &ModeSystem, n: usize) -> Option<DMatrix<f64>> {
        let Some(t) = self.table(root, "potential", "") else {
            if !root.contains_key("potential") {
                self.issue("potential", "missing required section");
            }
            return None;
        };
        match (t.get("matrix"), t.get("builder")) {
            (Some(m), None) => {
                self.allow(t, "potential", &["matrix"]);
                self.matrix(m, "potential.matrix", n)
            }
            (None, Some(b)) => {
                self.allow(t, "potential", &["builder", "spring", "cm_trap"]);
                let builder = self.string(b, "potential.builder")?;
                if builder != "two_body" {
                    self.issue("potential.builder", format!("unknown builder {builder:?} (expected \"two_body\")"));
                    return None;
                }
                if n != 2 {
                    self.issue("potential.builder", format!("two_body needs 2 modes, system has {n}"));
                    return None;
                }
                let spring = self
                    .required(t, "spring", "potential")
                    .and_then(|v| self.number(v, "potential.spring"))?;
                let trap = self.opt_number(t, "cm_trap", "potential").unwrap_or(0.0);
                Some(two_body_potential(system.masses()[0], system.masses()[1], spring, trap))
            }
            (Some(_), Some(_)) => {
                self.issue("potential", "give either `matrix` or `builder`, not both");
                None
            }
            (None, None) => {
                self.issue("potential", "needs `matrix` or `builder`");
                None
            }
        }
    }

    fn transforms(&mut self, root: &Table, n: Option<usize>) -> Vec<TransformDef> {
        let Some(t) = self.table(root, "transforms", "") else {
            return Vec::new();
        };
        let mut out = Vec::new();
        for (name, v) in t {
            let path = format!("transforms.{name}");
            if name == IDENTITY {
                self.issue(&path, "the name \"identity\" is reserved");
                continue;
            }
            let Value::Table(def) = v else {
                self.issue(&path, format!("expected a table, found {}", type_name(v)));
                continue;
            };
            self.allow(def, &path, &["builder", "matrix", "displacement"]);
            let Some(builder) = self
                .required(def, "builder", &path)
                .and_then(|b| self.string(b, &format!("{path}.builder")))
            else {
                continue;
            };
            let matrix_key = def.get("matrix");
            let builder = match (builder.as_str(), matrix_key) {
                ("two_body", None) => {
                    if n.is_some_and(|n| n != 2) {
                        self.issue(&format!("{path}.builder"), "two_body needs a 2-mode system");
                        continue;
                    }
                    TransformBuilder::TwoBody
                }
                ("normal_modes", None) => TransformBuilder::NormalModes,
                ("point", Some(m)) => match n.and_then(|n| self.matrix(m, &format!("{path}.matrix"), n)) {
                    Some(m) => TransformBuilder::Point(m),
                    None => continue,
                },
                ("symplectic", Some(m)) => match n.and_then(|n| self.matrix(m, &format!("{path}.matrix"), 2 * n)) {
                    Some(m) => TransformBuilder::Symplectic(m),
                    None => continue,
                },
                ("two_body" | "normal_modes", Some(_)) => {
                    self.issue(&format!("{path}.matrix"), format!("builder {builder} takes no matrix"));
                    continue;
                }
                ("point" | "symplectic", None) => {
                    self.issue(&format!("{path}.matrix"), format!("builder {builder} needs a matrix"));
                    continue;
                }
                (other, _) => {
                    self.issue(
                        &format!("{path}.builder"),
                        format!("unknown builder {other:?} (expected two_body, normal_modes, point or symplectic)"),
                    );
                    continue;
                }
            };
            let displacement = match def.get("displacement") {
                Some(d) => match n.and_then(|n| self.vector(d, &format!("{path}.displacement"), Some(2 * n))) {
                    Some(d) => Some(d),
                    None => continue,
                },
                None => None,
            };
            out.push(TransformDef {
                name: name.clone(),
                builder,
                displacement,
            });
        }
        out
    }

    fn reference(&mut self, t: &Table, key: &str, path: &str, resolves: &dyn Fn(&str) -> bool) -> Option<String> {
        let name = match t.get(key) {
            Some(v) => self.string(v, &join(path, key))?,
            None => IDENTITY.to_string(),
        };
        if !resolves(&name) {
            self.issue(&join(path, key), format!("unknown transform {name:?}"));
            return None;
        }
        Some(name)
    }

    fn divisions(&mut self, root: &Table, n: Option<usize>, resolves: &dyn Fn(&str) -> bool) -> Vec<DivisionDef> {
        let Some(v) = root.get("divisions") else {
            return Vec::new();
        };
        let Some(items) = self.array(v, "divisions") else {
            return Vec::new();
        };
        let mut out: Vec<DivisionDef> = Vec::new();
        for (i, item) in items.iter().enumerate() {
            let path = format!("divisions[{i}]");
            let Value::Table(t) = item else {
                self.issue(&path, format!("expected a table, found {}", type_name(item)));
                continue;
            };
            self.allow(t, &path, &["name", "transform", "parts"]);
            let name = self
                .required(t, "name", &path)
                .and_then(|v| self.string(v, &format!("{path}.name")));
            let transform = self.reference(t, "transform", &path, resolves);
            let parts = self.required(t, "parts", &path).and_then(|v| self.parts(v, &format!("{path}.parts"), n));
            let (Some(name), Some(transform), Some(parts), Some(n)) = (name, transform, parts, n) else {
                continue;
            };
            if out.iter().any(|d| d.division.name() == name) {
                self.issue(&format!("{path}.name"), format!("duplicate division name {name:?}"));
                continue;
            }
            match DivisionSpec::new(name, parts, n) {
                Ok(division) => out.push(DivisionDef { division, transform }),
                Err(e) => self.issue(&path, e),
            }
        }
        out
    }

    fn parts(&mut self, v: &Value, path: &str, n: Option<usize>) -> Option<Vec<Part>> {
        let items = self.array(v, path)?;
        let mut parts = Vec::new();
        let mut ok = true;
        for (i, item) in items.iter().enumerate() {
            let p = format!("{path}[{i}]");
            let Value::Table(t) = item else {
                self.issue(&p, format!("expected a table, found {}", type_name(item)));
                ok = false;
                continue;
            };
            self.allow(t, &p, &["name", "modes"]);
            let name = self.required(t, "name", &p).and_then(|v| self.string(v, &format!("{p}.name")));
            let modes = match (self.required(t, "modes", &p), n) {
                (Some(v), Some(n)) => self.indices(v, &format!("{p}.modes"), n),
                _ => None,
            };
            match (name, modes) {
                (Some(name), Some(modes)) => parts.push(Part::new(name, modes)),
                _ => ok = false,
            }
        }
        ok.then_some(parts)
    }

    fn state(&mut self, root: &Table, resolves: &dyn Fn(&str) -> bool) -> Option<StateDef> {
        let Some(t) = self.table(root, "state", "") else {
            return root.get("state").is_none().then_some(StateDef::Ground);
        };
        let kind = match t.get("kind") {
            Some(v) => self.string(v, "state.kind")?,
            None => "ground".into(),
        };
        match kind.as_str() {
            "ground" => {
                self.allow(t, "state", &["kind"]);
                Some(StateDef::Ground)
            }
            "product" => {
                self.allow(t, "state", &["kind", "transform", "free_width", "free_width_ratio"]);
                if !t.contains_key("transform") {
                    self.issue("state.transform", "missing required key for a product state");
                }
                let transform = self.reference(t, "transform", "state", resolves);
                let absolute = self.opt_number(t, "free_width", "state");
                let ratio = self.opt_number(t, "free_width_ratio", "state");
                let width = match (absolute, ratio) {
                    (Some(w), None) => FreeWidth::Absolute(w),
                    (None, Some(r)) => FreeWidth::RelativeToConfined(r),
                    (Some(_), Some(_)) => {
                        self.issue("state", "give either free_width or free_width_ratio, not both");
                        return None;
                    }
                    // only needed when the frame has a free mode
                    (None, None) => FreeWidth::RelativeToConfined(1.0),
                };
                match width {
                    FreeWidth::Absolute(x) | FreeWidth::RelativeToConfined(x) if !(x > 0.0) => {
                        self.issue("state", format!("free width must be positive, got {x}"));
                        return None;
                    }
                    _ => {}
                }
                Some(StateDef::Product { transform: transform?, width })
            }
            other => {
                self.issue("state.kind", format!("unknown state kind {other:?} (expected ground or product)"));
                None
            }
        }
    }

    fn noise(&mut self, root: &Table, n: Option<usize>, resolves: &dyn Fn(&str) -> bool) -> Option<NoiseDef> {
        let t = self.table(root, "noise", "")?;
        self.allow(t, "noise", &["frame", "target_modes", "diffusion", "damping"]);
        let frame = self.reference(t, "frame", "noise", resolves);
        let modes = match (self.required(t, "target_modes", "noise"), n) {
            (Some(v), Some(n)) => self.indices(v, "noise.target_modes", n),
            _ => None,
        };
        let k = modes.as_ref().map(Vec::len);
        let diffusion = match (t.get("diffusion"), k) {
            (Some(v), Some(k)) => self.matrix(v, "noise.diffusion", 2 * k),
            (None, Some(k)) => Some(DMatrix::zeros(2 * k, 2 * k)),
            _ => None,
        };
        let damping = self.opt_number(t, "damping", "noise").unwrap_or(0.0);
        let (frame, modes, diffusion) = (frame?, modes?, diffusion?);
        match NoiseSpec::new(modes, diffusion, damping) {
            Ok(noise) => Some(NoiseDef { frame, noise }),
            Err(e) => {
                self.issue("noise", e);
                None
            }
        }
    }

    fn moments(&mut self, root: &Table, n: Option<usize>, resolves: &dyn Fn(&str) -> bool) -> Option<MomentsDef> {
        let t = self.table(root, "moments", "")?;
        self.allow(t, "moments", &["frame", "means", "covariance"]);
        let frame = self.reference(t, "frame", "moments", resolves);
        let n = n?;
        let means = self
            .required(t, "means", "moments")
            .and_then(|v| self.vector(v, "moments.means", None))?;
        if means.len() != n && means.len() != 2 * n {
            self.issue("moments.means", format!("expected {n} or {} entries, found {}", 2 * n, means.len()));
            return None;
        }
        let dim = means.len();
        let covariance = match t.get("covariance") {
            Some(v) => self.matrix(v, "moments.covariance", dim)?,
            None => DMatrix::zeros(dim, dim),
        };
        Some(MomentsDef {
            frame: frame?,
            means,
            covariance,
        })
    }

    fn run(&mut self, root: &Table) -> RunParams {
        let mut run = RunParams::default();
        let Some(t) = self.table(root, "run", "") else {
            return run;
        };
        self.allow(t, "run", &["tol", "grid", "extent", "horizon", "dt", "checkpoints"]);
        let positive = |w: &mut Self, key: &str, x: Option<f64>| -> Option<f64> {
            match x {
                Some(x) if x > 0.0 => Some(x),
                Some(x) => {
                    w.issue(&join("run", key), format!("must be positive, got {x}"));
                    None
                }
                None => None,
            }
        };
        for (key, slot) in [
            ("tol", &mut run.tol),
            ("extent", &mut run.extent),
            ("horizon", &mut run.horizon),
            ("dt", &mut run.dt),
        ] {
            let x = self.opt_number(t, key, "run");
            if let Some(x) = positive(self, key, x) {
                *slot = x;
            }
        }
        for (key, slot, min) in [("grid", &mut run.grid, 2), ("checkpoints", &mut run.checkpoints, 1)] {
            if let Some(v) = t.get(key) {
                match self.index(v, &join("run", key)) {
                    Some(k) if k >= min => *slot = k,
                    Some(k) => self.issue(&join("run", key), format!("must be at least {min}, got {k}")),
                    None => {}
                }
            }
        }
        run
    }
}

/// `V` for `½ k (x₁ − x₂)² + ½ κ X²` with `X` the centre of mass.
pub fn two_body_potential(m1: f64, m2: f64, spring: f64, cm_trap: f64) -> DMatrix<f64> {
    let total = m1 + m2;
    let (a, b) = (m1 / total, m2 / total);
    DMatrix::from_row_slice(
        2,
        2,
        &[
            spring + cm_trap * a * a,
            -spring + cm_trap * a * b,
            -spring + cm_trap * a * b,
            spring + cm_trap * b * b,
        ],
    )
}
