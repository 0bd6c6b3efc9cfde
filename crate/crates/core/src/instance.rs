//! Problem instances: sites with characteristic bits, team count and route cap.
//!
//! Text format, one record per line (blank lines and `#` comments ignored):
//!
//! ```text
//! SARP <name> <num_sites> <m> <K> <Tmax> <speed>
//! DEPOT <x> <y>
//! <id> <x> <y> <b1> ... <bm> [service_time]
//! ```
//!
//! Travel times are Euclidean distances divided by `speed`, rounded to six decimals.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("characteristic {0} is carried by no site")]
    UncoveredCharacteristic(usize),
    #[error("site {0} carries no characteristic")]
    EmptySite(usize),
    #[error("duplicate site id {0}")]
    DuplicateSite(usize),
    #[error("site ids must be contiguous from 1 (site {0} missing)")]
    MissingSite(usize),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Point) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Site {
    pub id: usize,
    pub position: Point,
    pub characteristics: Vec<bool>,
    pub service_time: Option<f64>,
}

/// A validated, immutable leximin-SARP instance.
///
/// Node index 0 is the depot; site `i` has node index `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    name: String,
    num_characteristics: usize,
    depot: Point,
    sites: Vec<Site>,
    num_teams: usize,
    t_max: f64,
    speed: f64,
    travel: Vec<f64>,
    service: Vec<f64>,
    characteristic_totals: Vec<u32>,
    site_characteristics: Vec<Vec<usize>>,
}

fn round6(v: f64) -> f64 {
    (v * 1e6).round() / 1e6
}

impl Instance {
    /// Validates the sites and computes the travel-time matrix.
    pub fn new(
        name: impl Into<String>,
        depot: Point,
        mut sites: Vec<Site>,
        num_teams: usize,
        t_max: f64,
        speed: f64,
    ) -> Result<Self, InstanceError> {
        let name = name.into();
        if name.is_empty() || name.chars().any(char::is_whitespace) {
            return Err(InstanceError::Invalid(format!("name {name:?} must be one non-empty token")));
        }
        if sites.is_empty() {
            return Err(InstanceError::Invalid("at least one site is required".into()));
        }
        if num_teams == 0 {
            return Err(InstanceError::Invalid("number of teams must be positive".into()));
        }
        if !(t_max.is_finite() && t_max >= 0.0) {
            return Err(InstanceError::Invalid(format!("Tmax must be finite and non-negative, got {t_max}")));
        }
        if !(speed.is_finite() && speed > 0.0) {
            return Err(InstanceError::Invalid(format!("speed must be positive, got {speed}")));
        }
        let m = sites[0].characteristics.len();
        if m == 0 {
            return Err(InstanceError::Invalid("at least one characteristic is required".into()));
        }

        sites.sort_by_key(|s| s.id);
        for pair in sites.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(InstanceError::DuplicateSite(pair[0].id));
            }
        }
        for (expected, site) in (1..).zip(&sites) {
            if site.id != expected {
                return Err(InstanceError::MissingSite(expected));
            }
        }

        let mut totals = vec![0u32; m];
        let mut site_characteristics = vec![Vec::new()];
        let mut service = vec![0.0];
        for site in &sites {
            if site.characteristics.len() != m {
                return Err(InstanceError::Invalid(format!(
                    "site {} has {} characteristic bits, expected {m}",
                    site.id,
                    site.characteristics.len()
                )));
            }
            let carried: Vec<usize> =
                site.characteristics.iter().enumerate().filter_map(|(c, &b)| b.then_some(c)).collect();
            if carried.is_empty() {
                return Err(InstanceError::EmptySite(site.id));
            }
            for &c in &carried {
                totals[c] += 1;
            }
            site_characteristics.push(carried);
            let st = site.service_time.unwrap_or(0.0);
            if !(st.is_finite() && st >= 0.0) {
                return Err(InstanceError::Invalid(format!("site {} has invalid service time {st}", site.id)));
            }
            service.push(st);
        }
        if let Some(c) = totals.iter().position(|&t| t == 0) {
            return Err(InstanceError::UncoveredCharacteristic(c + 1));
        }

        let positions: Vec<Point> = std::iter::once(depot).chain(sites.iter().map(|s| s.position)).collect();
        let nodes = positions.len();
        let mut travel = vec![0.0; nodes * nodes];
        for i in 0..nodes {
            for j in (i + 1)..nodes {
                let t = round6(positions[i].distance(&positions[j]) / speed);
                travel[i * nodes + j] = t;
                travel[j * nodes + i] = t;
            }
        }

        Ok(Self {
            name,
            num_characteristics: m,
            depot,
            sites,
            num_teams,
            t_max,
            speed,
            travel,
            service,
            characteristic_totals: totals,
            site_characteristics,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn num_nodes(&self) -> usize {
        self.sites.len() + 1
    }

    pub fn num_characteristics(&self) -> usize {
        self.num_characteristics
    }

    pub fn num_teams(&self) -> usize {
        self.num_teams
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn depot(&self) -> Point {
        self.depot
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn site(&self, id: usize) -> &Site {
        &self.sites[id - 1]
    }

    /// Travel time between two nodes (0 = depot).
    #[inline]
    pub fn travel_time(&self, from: usize, to: usize) -> f64 {
        self.travel[from * self.num_nodes() + to]
    }

    #[inline]
    pub fn service_time(&self, node: usize) -> f64 {
        self.service[node]
    }

    pub fn has_service_times(&self) -> bool {
        self.sites.iter().any(|s| s.service_time.is_some())
    }

    pub fn characteristic_totals(&self) -> &[u32] {
        &self.characteristic_totals
    }

    /// Indices of the characteristics carried by a site.
    #[inline]
    pub fn characteristics_of(&self, site: usize) -> &[usize] {
        &self.site_characteristics[site]
    }

    pub fn site_ids(&self) -> impl Iterator<Item = usize> {
        1..=self.sites.len()
    }

    /// Duration of a closed route depot → sites → depot, including service times.
    pub fn route_duration(&self, route: &[usize]) -> f64 {
        let mut prev = 0;
        let mut total = 0.0;
        for &s in route {
            total += self.travel_time(prev, s) + self.service_time(s);
            prev = s;
        }
        if !route.is_empty() {
            total += self.travel_time(prev, 0);
        }
        total
    }

    pub fn parse(text: &str) -> Result<Self, InstanceError> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let perr = |line: usize, msg: String| InstanceError::Parse { line, msg };

        let (hline, header) = lines.next().ok_or_else(|| perr(1, "empty instance file".into()))?;
        let tokens: Vec<&str> = header.split_whitespace().collect();
        if tokens.len() != 7 || tokens[0] != "SARP" {
            return Err(perr(hline, "expected `SARP <name> <num_sites> <m> <K> <Tmax> <speed>`".into()));
        }
        let name = tokens[1].to_string();
        let num_sites: usize = parse_token(tokens[2], "num_sites", hline)?;
        let m: usize = parse_token(tokens[3], "m", hline)?;
        let num_teams: usize = parse_token(tokens[4], "K", hline)?;
        let t_max: f64 = parse_token(tokens[5], "Tmax", hline)?;
        let speed: f64 = parse_token(tokens[6], "speed", hline)?;
        if num_sites == 0 || m == 0 || num_teams == 0 {
            return Err(perr(hline, "num_sites, m and K must be positive".into()));
        }

        let (dline, depot_line) = lines.next().ok_or_else(|| perr(hline + 1, "missing DEPOT line".into()))?;
        let tokens: Vec<&str> = depot_line.split_whitespace().collect();
        if tokens.len() != 3 || tokens[0] != "DEPOT" {
            return Err(perr(dline, "expected `DEPOT <x> <y>`".into()));
        }
        let depot = Point::new(parse_token(tokens[1], "x", dline)?, parse_token(tokens[2], "y", dline)?);

        let mut sites = Vec::with_capacity(num_sites);
        let mut last_line = dline;
        for (line, row) in lines {
            last_line = line;
            let tokens: Vec<&str> = row.split_whitespace().collect();
            if tokens.len() != m + 3 && tokens.len() != m + 4 {
                return Err(perr(line, format!("expected {} or {} fields, found {}", m + 3, m + 4, tokens.len())));
            }
            let id: usize = parse_token(tokens[0], "site id", line)?;
            if id == 0 {
                return Err(perr(line, "site ids start at 1".into()));
            }
            let position = Point::new(parse_token(tokens[1], "x", line)?, parse_token(tokens[2], "y", line)?);
            let characteristics = tokens[3..3 + m]
                .iter()
                .map(|t| match *t {
                    "0" => Ok(false),
                    "1" => Ok(true),
                    other => Err(perr(line, format!("characteristic bit must be 0 or 1, found {other:?}"))),
                })
                .collect::<Result<Vec<_>, _>>()?;
            let service_time = match tokens.get(m + 3) {
                Some(t) => Some(parse_token::<f64>(t, "service_time", line)?),
                None => None,
            };
            sites.push(Site { id, position, characteristics, service_time });
        }
        if sites.len() != num_sites {
            return Err(perr(last_line, format!("header declares {num_sites} sites, found {}", sites.len())));
        }
        Self::new(name, depot, sites, num_teams, t_max, speed)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, InstanceError> {
        Self::parse(&std::fs::read_to_string(path)?)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "SARP {} {} {} {} {} {}",
            self.name,
            self.num_sites(),
            self.num_characteristics,
            self.num_teams,
            self.t_max,
            self.speed
        );
        let _ = writeln!(out, "DEPOT {} {}", self.depot.x, self.depot.y);
        for site in &self.sites {
            let _ = write!(out, "{} {} {}", site.id, site.position.x, site.position.y);
            for &b in &site.characteristics {
                out.push_str(if b { " 1" } else { " 0" });
            }
            if let Some(st) = site.service_time {
                let _ = write!(out, " {st}");
            }
            out.push('\n');
        }
        out
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), InstanceError> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }
}

fn parse_token<T: std::str::FromStr>(token: &str, what: &str, line: usize) -> Result<T, InstanceError> {
    token.parse().map_err(|_| InstanceError::Parse { line, msg: format!("invalid {what}: {token:?}") })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// Positions uniform over the square.
    Random,
    /// Half the sites clustered around a few centres, half uniform.
    RandomClustered,
}

impl Layout {
    pub fn tag(&self) -> &'static str {
        match self {
            Layout::Random => "R",
            Layout::RandomClustered => "RC",
        }
    }
}

/// Parameters of the Solomon-style instance generator.
#[derive(Debug, Clone)]
pub struct GeneratorParams {
    pub num_sites: usize,
    pub num_characteristics: usize,
    pub num_teams: usize,
    pub t_max: f64,
    pub layout: Layout,
    pub seed: u64,
    /// Distance units travelled per time unit.
    pub speed: f64,
}

/// Default speed: maps the 100×100 square onto Tmax values in the 2–8 range.
pub const DEFAULT_GENERATOR_SPEED: f64 = 20.0;

const GRID: f64 = 100.0;
const CLUSTER_RADIUS: f64 = 10.0;
const MAX_CHARACTERISTIC_REDRAWS: usize = 10_000;

impl GeneratorParams {
    pub fn new(
        num_sites: usize,
        num_characteristics: usize,
        num_teams: usize,
        t_max: f64,
        layout: Layout,
        seed: u64,
    ) -> Self {
        Self { num_sites, num_characteristics, num_teams, t_max, layout, seed, speed: DEFAULT_GENERATOR_SPEED }
    }
}

fn round2(v: f64) -> f64 {
    (v * 100.0).round() / 100.0
}

pub fn generate_instance(params: &GeneratorParams) -> Result<Instance, InstanceError> {
    let n = params.num_sites;
    let m = params.num_characteristics;
    if n == 0 || m == 0 {
        return Err(InstanceError::Invalid("num_sites and num_characteristics must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);

    let uniform =
        |rng: &mut ChaCha8Rng| Point::new(round2(rng.random_range(0.0..=GRID)), round2(rng.random_range(0.0..=GRID)));
    let positions: Vec<Point> = match params.layout {
        Layout::Random => (0..n).map(|_| uniform(&mut rng)).collect(),
        Layout::RandomClustered => {
            let clustered = n / 2;
            let num_centres = clustered.div_ceil(6).max(1);
            let centres: Vec<Point> = (0..num_centres)
                .map(|_| {
                    Point::new(
                        rng.random_range(CLUSTER_RADIUS..=GRID - CLUSTER_RADIUS),
                        rng.random_range(CLUSTER_RADIUS..=GRID - CLUSTER_RADIUS),
                    )
                })
                .collect();
            let mut pts = Vec::with_capacity(n);
            for i in 0..clustered {
                let c = centres[i % num_centres];
                // uniform over the disc
                let r = CLUSTER_RADIUS * rng.random::<f64>().sqrt();
                let theta = rng.random_range(0.0..std::f64::consts::TAU);
                pts.push(Point::new(
                    round2((c.x + r * theta.cos()).clamp(0.0, GRID)),
                    round2((c.y + r * theta.sin()).clamp(0.0, GRID)),
                ));
            }
            pts.extend((clustered..n).map(|_| uniform(&mut rng)));
            pts
        }
    };

    let mut bits = draw_characteristics(&mut rng, n, m);
    let mut redraws = 0;
    while !all_carried(&bits, m) {
        redraws += 1;
        if redraws >= MAX_CHARACTERISTIC_REDRAWS {
            patch_uncovered(&mut rng, &mut bits, m);
            break;
        }
        bits = draw_characteristics(&mut rng, n, m);
    }

    let sites = positions
        .into_iter()
        .zip(bits)
        .enumerate()
        .map(|(i, (position, characteristics))| Site { id: i + 1, position, characteristics, service_time: None })
        .collect();
    let name = format!("{}_{}/{}/{}", n, params.layout.tag(), params.num_teams, params.t_max);
    Instance::new(name, Point::new(GRID / 2.0, GRID / 2.0), sites, params.num_teams, params.t_max, params.speed)
}

/// One non-zero characteristic vector per site, uniform over the 2^m − 1 candidates.
fn draw_characteristics(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Vec<Vec<bool>> {
    (0..n)
        .map(|_| loop {
            let v: Vec<bool> = (0..m).map(|_| rng.random::<bool>()).collect();
            if v.iter().any(|&b| b) {
                break v;
            }
        })
        .collect()
}

fn all_carried(bits: &[Vec<bool>], m: usize) -> bool {
    (0..m).all(|c| bits.iter().any(|v| v[c]))
}

fn patch_uncovered(rng: &mut ChaCha8Rng, bits: &mut [Vec<bool>], m: usize) {
    for c in 0..m {
        if !bits.iter().any(|v| v[c]) {
            let i = rng.random_range(0..bits.len());
            bits[i][c] = true;
        }
    }
}
