//! Lattice-surgery identities on merged patches.
//!
//! Patches are copies of the standard triangle placed on the infinite tiling
//! by colour-preserving reflections. A merge crops the union of the patch
//! regions and an ancilla region from the tiling. Ancilla modes are prepared
//! in pairs ("bars", each the operator `i c_i c_j` with eigenvalue +1), then
//! every merged stabilizer is measured. One colour carries the outcome: the
//! product of its merged stabilizers equals a fixed product of patch
//! logicals times bars.
//!
//! Every check is an exact monomial identity; phases are tracked with the
//! ascending-order convention of [`Monomial`].

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algebra::{commutes, gf2_solve, mono_mul, ModeSet, Monomial};
use crate::code::lattice::{self, Color, QPoint};
use crate::code::{layout_from_cropped, logical_operator, validate_code, CodeLayout};
use crate::code::{CHECK_COLORING, CHECK_COMMUTATION, CHECK_EVEN_SIZE, CHECK_VERTEX_IDS};
use crate::error::{Error, Result};
use crate::report::Report;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MergeType {
    /// Legs facing; the red product measures `i ā b̄`.
    TypeI,
    /// Hypotenuses facing; the green product measures `i ā b̄`.
    TypeII,
    /// Four patches around a cross-shaped ancilla; the red product measures `ā b̄ c̄ d̄`.
    ParityProjection,
}

impl MergeType {
    pub fn n_patches(self) -> usize {
        match self {
            MergeType::ParityProjection => 4,
            _ => 2,
        }
    }

    /// Colour whose stabilizer product reveals the joint logical.
    pub fn outcome_color(self) -> Color {
        match self {
            MergeType::TypeII => Color::Green,
            _ => Color::Red,
        }
    }
}

impl fmt::Display for MergeType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MergeType::TypeI => "type-I",
            MergeType::TypeII => "type-II",
            MergeType::ParityProjection => "parity-projection",
        })
    }
}

impl FromStr for MergeType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "1" | "i" | "type-i" | "type1" => Ok(MergeType::TypeI),
            "2" | "ii" | "type-ii" | "type2" => Ok(MergeType::TypeII),
            "pp" | "parity" | "parity-projection" => Ok(MergeType::ParityProjection),
            _ => Err(Error::Config(format!("unknown merge type {s:?} (expected 1, 2 or pp)"))),
        }
    }
}

/// A colour-preserving isometry of the tiling in quarter units: optional
/// transpose, then per-axis sign and translation. All placements used here
/// are involutions, so the same map sends merged coordinates back.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Placement {
    pub transpose: bool,
    pub sx: i64,
    pub sy: i64,
    pub tx: i64,
    pub ty: i64,
}

impl Placement {
    pub const IDENTITY: Placement = Placement { transpose: false, sx: 1, sy: 1, tx: 0, ty: 0 };

    fn mirror_y(ty: i64) -> Self {
        Placement { sy: -1, ty, ..Self::IDENTITY }
    }

    fn mirror_x(tx: i64) -> Self {
        Placement { sx: -1, tx, ..Self::IDENTITY }
    }

    pub fn apply(&self, (x, y): QPoint) -> QPoint {
        let (x, y) = if self.transpose { (y, x) } else { (x, y) };
        (self.sx * x + self.tx, self.sy * y + self.ty)
    }
}

/// Ancilla-region and placement parameters of one merge, in quarter units.
#[derive(Clone, Debug)]
struct Geometry {
    placements: Vec<Placement>,
    ancilla: fn(i64, i64, &Params) -> bool,
    params: Params,
    scan: (i64, i64),
}

#[derive(Clone, Copy, Debug)]
struct Params {
    d: i64,
    /// Mirror offset: patch B of a type-I merge is `y -> my - y`.
    my: i64,
    /// Second offset: the x-mirror for parity projection, the anti-diagonal
    /// `x + y = mx` for type-II.
    mx: i64,
    /// Outer left edge of the type-II corridor.
    xl: i64,
}

fn geometry(d: usize, t: MergeType) -> Geometry {
    let d = d as i64;
    // Patch B sits a distance ~d below A, mirrored so the bottom legs face.
    let my = -4 * (d - 1);
    match t {
        MergeType::TypeI => Geometry {
            placements: vec![Placement::IDENTITY, Placement::mirror_y(my)],
            // The strip is closed off by the two hypotenuses, continued.
            ancilla: |x, y, p| x > -2 && x + y < 4 * p.d && x - y < 4 * p.d - p.my,
            params: Params { d, my, mx: 0, xl: 0 },
            scan: (-3 * d - 6, 3 * d + 6),
        },
        MergeType::TypeII => {
            // Reflection through the anti-diagonal x + y = c keeps colours when c/8 is integral.
            let c = 8 * ((3 * d + 3) / 4);
            Geometry {
                placements: vec![
                    Placement::IDENTITY,
                    Placement { transpose: true, sx: -1, sy: -1, tx: c, ty: c },
                ],
                // An L-shaped corridor along A's left leg and B's top leg,
                // around the vacuum between the hypotenuses.
                ancilla: |x, y, p| {
                    let c = p.mx;
                    let corridor = x > p.xl && y < c - p.xl && y > 2 && x < c - 2;
                    let gap = x > 0 && y < c && x + y >= 4 * p.d && x + y <= 2 * c - 4 * p.d && x - y > -c;
                    corridor && !gap
                },
                params: Params { d, my, mx: c, xl: 2 - 4 * (d - 1) },
                scan: (-2 * d - 6, 3 * d + 8),
            }
        }
        MergeType::ParityProjection => {
            let mx = 8 * ((12 * d - 5) / 8) - 8;
            Geometry {
                placements: vec![
                    Placement::IDENTITY,
                    Placement::mirror_y(my),
                    Placement::mirror_x(mx),
                    Placement { sx: -1, sy: -1, tx: mx, ty: my, transpose: false },
                ],
                // Two type-I regions, mirrored so their tips overlap.
                ancilla: |x, y, p| {
                    let four = 4 * p.d;
                    let big = |x: i64| x > -2 && x + y < four && x - y < four - p.my;
                    big(x) || big(p.mx - x)
                },
                params: Params { d, my, mx, xl: 0 },
                scan: (-3 * d - 6, 4 * d + 6),
            }
        }
    }
}

/// Patches and ancilla cropped into one lattice.
#[derive(Clone, Debug, Serialize)]
pub struct MergedLayout {
    pub merge_type: MergeType,
    pub d: usize,
    /// The merged lattice. Its `logical_support` is empty: the merge has no
    /// logical of its own.
    pub layout: CodeLayout,
    pub patches: Vec<CodeLayout>,
    pub placements: Vec<Placement>,
    /// `embeddings[k][v]` is the merged id of vertex `v` of patch `k`.
    pub embeddings: Vec<Vec<usize>>,
    /// Merged ids that belong to no patch, ascending.
    pub ancilla: Vec<usize>,
}

fn quarter(v: &crate::code::Vertex) -> QPoint {
    ((v.x * 4.0).round() as i64, (v.y * 4.0).round() as i64)
}

/// Merge `patches` (two for type-I/II, four for parity projection). Each must
/// be the standard triangle of the same side length.
pub fn build_merge(patches: &[&CodeLayout], merge_type: MergeType) -> Result<MergedLayout> {
    if patches.len() != merge_type.n_patches() {
        return Err(Error::Merge(format!(
            "{merge_type} merge needs {} patches, got {}",
            merge_type.n_patches(),
            patches.len()
        )));
    }
    let d = patches[0].d;
    if let Some(p) = patches.iter().find(|p| p.d != d) {
        return Err(Error::Merge(format!("patch sizes differ: d = {d} and d = {}", p.d)));
    }
    let reference = crate::code::build_code_unchecked(d);
    for (k, p) in patches.iter().enumerate() {
        let same = p.vertices.len() == reference.vertices.len()
            && p.vertices.iter().zip(&reference.vertices).all(|(a, b)| quarter(a) == quarter(b));
        if !same {
            return Err(Error::Merge(format!("patch {k} is not the standard d = {d} triangle")));
        }
    }

    let g = geometry(d, merge_type);
    let triangle = lattice::triangle_region(d);
    let params = g.params;
    let placements = g.placements.clone();
    let ancilla = g.ancilla;
    let inside = |x: i64, y: i64| {
        ancilla(x, y, &params) || placements.iter().any(|pl| {
            let (u, v) = pl.apply((x, y));
            triangle(u, v)
        })
    };
    let cropped = lattice::crop(inside, g.scan.0, g.scan.1);
    let mut layout = layout_from_cropped(d, &cropped);
    layout.logical_support.clear();

    let index: HashMap<QPoint, usize> =
        cropped.points.iter().enumerate().map(|(i, &p)| (p, i)).collect();
    let mut owner = vec![None; cropped.points.len()];
    let mut embeddings = Vec::new();
    for (k, (patch, pl)) in patches.iter().zip(&g.placements).enumerate() {
        let mut emb = Vec::with_capacity(patch.vertices.len());
        for v in &patch.vertices {
            let q = pl.apply(quarter(v));
            let id = *index.get(&q).ok_or_else(|| {
                Error::Merge(format!("patch {k} vertex {} falls outside the merged region", v.id))
            })?;
            if let Some(other) = owner[id].replace(k) {
                return Err(Error::Merge(format!("patches {other} and {k} overlap at {q:?}")));
            }
            emb.push(id);
        }
        embeddings.push(emb);
    }
    let ancilla = (0..owner.len()).filter(|&i| owner[i].is_none()).collect();

    Ok(MergedLayout {
        merge_type,
        d,
        layout,
        patches: patches.iter().map(|p| (*p).clone()).collect(),
        placements: g.placements,
        embeddings,
        ancilla,
    })
}

impl MergedLayout {
    pub fn n_modes(&self) -> usize {
        self.layout.vertices.len()
    }

    /// Patch `k`'s logical in merged ids, with the patch's own phase convention.
    pub fn logical(&self, k: usize) -> Monomial {
        let emb = &self.embeddings[k];
        let ids: Vec<usize> = self.patches[k].logical_support.iter().map(|&v| emb[v]).collect();
        Monomial::product_of(&ids).times_phase(logical_operator(&self.patches[k]).phase())
    }

    /// Patch `k`'s stabilizers in merged ids, each with the patch's phase.
    pub fn patch_stabilizers(&self, k: usize) -> Vec<Monomial> {
        let emb = &self.embeddings[k];
        self.patches[k]
            .plaquettes
            .iter()
            .map(|p| {
                let mut ids = p.vertices.clone();
                ids.sort_unstable();
                let ids: Vec<usize> = ids.iter().map(|&v| emb[v]).collect();
                Monomial::product_of(&ids).times_phase(p.stabilizer().phase())
            })
            .collect()
    }

    fn patch_modes(&self, k: usize) -> ModeSet {
        self.embeddings[k].iter().copied().collect()
    }

    fn ancilla_set(&self) -> ModeSet {
        self.ancilla.iter().copied().collect()
    }

    /// Structural checks: even sizes and overlaps, colouring, and that every
    /// patch stabilizer is the restriction of exactly one merged plaquette.
    pub fn validate(&self) -> Report {
        let mut r = Report::new(format!("{} merge, d = {}", self.merge_type, self.d));
        let v = validate_code(&self.layout);
        for name in [CHECK_VERTEX_IDS, CHECK_EVEN_SIZE, CHECK_COMMUTATION, CHECK_COLORING] {
            let c = v.check(name).expect("validation always runs this check");
            r.check(name, c.passed, c.detail.clone());
        }
        let merged: Vec<ModeSet> = self.layout.plaquettes.iter().map(|p| p.support()).collect();
        for k in 0..self.patches.len() {
            let modes = self.patch_modes(k);
            let mut bad = Vec::new();
            for (pid, s) in self.patch_stabilizers(k).iter().enumerate() {
                let hits = merged.iter().filter(|m| &m.intersection(&modes) == s.support()).count();
                if hits != 1 {
                    bad.push(pid);
                }
            }
            let name = (b'A' + k as u8) as char;
            r.check(
                format!("patch {name} stabilizers preserved"),
                bad.is_empty(),
                if bad.is_empty() {
                    format!("{} plaquettes, each the restriction of one merged plaquette", modes.len())
                } else {
                    format!("patch plaquettes {bad:?} are not restrictions of exactly one merged plaquette")
                },
            );
        }
        r.check(
            "ancilla present",
            !self.ancilla.is_empty(),
            format!("{} ancilla modes, {} merged plaquettes", self.ancilla.len(), merged.len()),
        );
        r
    }
}

/// One white bar: the operator `i c_i c_j` in this order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bar(pub usize, pub usize);

impl Bar {
    pub fn operator(&self) -> Monomial {
        Monomial::product_of(&[self.0, self.1]).times_phase(1)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BarPattern {
    pub bars: Vec<Bar>,
}

impl BarPattern {
    /// Product of the listed bars (they commute, so order is irrelevant).
    pub fn product<'a>(bars: impl IntoIterator<Item = &'a Bar>) -> Monomial {
        bars.into_iter().fold(Monomial::identity(), |acc, b| mono_mul(&acc, &b.operator()))
    }

    pub fn without(&self, index: usize) -> BarPattern {
        let mut bars = self.bars.clone();
        bars.remove(index);
        BarPattern { bars }
    }
}

/// Plaquettes whose stabilizer must survive the merge as a product of
/// pre-merge stabilizers and bars: every colour except the outcome colour.
fn constrained(m: &MergedLayout) -> Vec<usize> {
    let out = m.merge_type.outcome_color();
    m.layout.plaquettes.iter().filter(|p| p.color != out).map(|p| p.id).collect()
}

/// Find bars such that no constrained plaquette cuts a bar in half.
///
/// Two ancilla modes may share a bar only if every constrained plaquette
/// contains both or neither, so the modes split into compatibility classes;
/// each class must have even size and is paired in ascending order. Bars
/// that pair up on a blue square are oriented so their product is exactly
/// that square's stabilizer.
pub fn construct_pattern(m: &MergedLayout) -> Result<BarPattern> {
    let plaq = constrained(m);
    let mut signature: BTreeMap<Vec<usize>, Vec<usize>> = BTreeMap::new();
    let incidence = m.layout.incidence();
    for &a in &m.ancilla {
        let key: Vec<usize> =
            incidence[a].iter().copied().filter(|p| plaq.binary_search(p).is_ok()).collect();
        signature.entry(key).or_default().push(a);
    }
    let mut bars = Vec::new();
    for (key, modes) in &signature {
        if modes.len() % 2 == 1 {
            let plaquette = key.first().copied().unwrap_or(usize::MAX);
            return Err(Error::PatternSearch {
                plaquette,
                reason: format!(
                    "ancilla modes {modes:?} share plaquettes {key:?} but cannot be paired"
                ),
            });
        }
        // Prefer pairs that lie on a common blue square.
        let mut left: Vec<usize> = modes.clone();
        while let Some(a) = left.first().copied() {
            left.remove(0);
            let partner = left
                .iter()
                .position(|&b| {
                    incidence[a].iter().any(|p| {
                        m.layout.plaquettes[*p].color == Color::Blue && incidence[b].contains(p)
                    })
                })
                .unwrap_or(0);
            let b = left.remove(partner);
            bars.push(Bar(a, b));
        }
    }
    orient_square_pairs(m, &mut bars);
    bars.sort_by_key(|b| b.0.min(b.1));
    fix_overall_sign(m, &mut bars);
    Ok(BarPattern { bars })
}

/// Bars on a blue square are pinned by that square; the rest have a free
/// orientation, and with it the sign of `Q_W`. Choose it so the outcome
/// identity carries no stray `-1`.
fn fix_overall_sign(m: &MergedLayout, bars: &mut [Bar]) {
    let (ratio, _) = outcome_ratio(m, bars);
    if ratio != Monomial::scalar(2) {
        return;
    }
    let pinned: HashSet<usize> = square_pairs(m, bars).iter().flat_map(|&(_, i, j)| [i, j]).collect();
    let q = color_product(m, m.merge_type.outcome_color());
    let free = (0..bars.len()).find(|i| !pinned.contains(i) && q.support().contains(bars[*i].0));
    if let Some(i) = free {
        let b = bars[i];
        bars[i] = Bar(b.1, b.0);
    }
}

/// `Q_X (joint · ∏ bars in supp Q_X)^{-1}` and the number of bars used.
fn outcome_ratio(m: &MergedLayout, bars: &[Bar]) -> (Monomial, usize) {
    let q = color_product(m, m.merge_type.outcome_color());
    let anc_in_q = q.support().intersection(&m.ancilla_set());
    let in_q: Vec<Bar> = bars.iter().copied().filter(|b| anc_in_q.contains(b.0)).collect();
    let rhs = mono_mul(&joint_logical(m), &BarPattern::product(&in_q));
    (mono_mul(&q, &rhs.inverse()), in_q.len())
}

/// Blue squares covered by exactly two bars, with the bar indices.
fn square_pairs(m: &MergedLayout, bars: &[Bar]) -> Vec<(usize, usize, usize)> {
    let mut bar_of = HashMap::new();
    for (i, b) in bars.iter().enumerate() {
        bar_of.insert(b.0, i);
        bar_of.insert(b.1, i);
    }
    let mut out = Vec::new();
    for p in m.layout.plaquettes_of(Color::Blue) {
        let ids: Option<Vec<usize>> = p.vertices.iter().map(|v| bar_of.get(v).copied()).collect();
        if let Some(mut ids) = ids {
            ids.sort_unstable();
            ids.dedup();
            if ids.len() == 2 {
                out.push((p.id, ids[0], ids[1]));
            }
        }
    }
    out
}

fn orient_square_pairs(m: &MergedLayout, bars: &mut [Bar]) {
    for (pid, i, j) in square_pairs(m, bars) {
        let want = m.layout.plaquettes[pid].stabilizer();
        let got = mono_mul(&bars[i].operator(), &bars[j].operator());
        if got != want {
            let b = bars[j];
            bars[j] = Bar(b.1, b.0);
        }
    }
}

/// The prefactor `i^k ∏ logicals` that the outcome colour should reproduce:
/// `i ā b̄` for two patches, `ā b̄ c̄ d̄` for four.
pub fn joint_logical(m: &MergedLayout) -> Monomial {
    let phase = if m.patches.len() == 2 { 1 } else { 0 };
    (0..m.patches.len()).fold(Monomial::scalar(phase), |acc, k| mono_mul(&acc, &m.logical(k)))
}

/// Product of all merged stabilizers of one colour.
pub fn color_product(m: &MergedLayout, color: Color) -> Monomial {
    m.layout
        .plaquettes_of(color)
        .fold(Monomial::identity(), |acc, p| mono_mul(&acc, &p.stabilizer()))
}

/// Bars not paired with another bar on a blue square.
pub fn unpaired_bars(m: &MergedLayout, p: &BarPattern) -> Vec<Bar> {
    let mut paired = vec![false; p.bars.len()];
    for (_, i, j) in square_pairs(m, &p.bars) {
        paired[i] = true;
        paired[j] = true;
    }
    p.bars.iter().zip(paired).filter(|(_, q)| !q).map(|(b, _)| *b).collect()
}

/// Write `target` as a product of patch stabilizers and bars. Returns the
/// product (equal to `target` up to sign) or a reason it is impossible.
fn decompose(m: &MergedLayout, bars: &[Bar], target: &ModeSet) -> std::result::Result<Monomial, String> {
    let mut product = Monomial::identity();
    let anc = m.ancilla_set();
    for k in 0..m.patches.len() {
        let modes = m.patch_modes(k);
        let part = target.intersection(&modes);
        if part.is_empty() {
            continue;
        }
        let stabs = m.patch_stabilizers(k);
        // Unknown x_s per patch stabilizer; one equation per patch mode.
        let mut rows = vec![ModeSet::new(); m.n_modes()];
        for (s, st) in stabs.iter().enumerate() {
            for v in st.support().iter() {
                rows[v].insert(s);
            }
        }
        let idx: Vec<usize> = modes.iter().collect();
        let eq: Vec<ModeSet> = idx.iter().map(|&v| rows[v].clone()).collect();
        let rhs: Vec<bool> = idx.iter().map(|&v| part.contains(v)).collect();
        let x = gf2_solve(&eq, &rhs, stabs.len())
            .ok_or_else(|| format!("patch part {:?} is not a product of patch stabilizers", part.to_vec()))?;
        for (s, on) in x.iter().enumerate() {
            if *on {
                product = mono_mul(&product, &stabs[s]);
            }
        }
    }
    let anc_part = target.intersection(&anc);
    let mut used = ModeSet::new();
    for b in bars {
        let (i, j) = (anc_part.contains(b.0), anc_part.contains(b.1));
        if i != j {
            return Err(format!("bar ({}, {}) is cut", b.0, b.1));
        }
        if i {
            product = mono_mul(&product, &b.operator());
            used.insert(b.0);
            used.insert(b.1);
        }
    }
    if used != anc_part {
        return Err(format!("ancilla modes {:?} are not on bars", anc_part.xor(&used).to_vec()));
    }
    Ok(product)
}

fn sign_of(phase: u8) -> &'static str {
    ["+1", "+i", "-1", "-i"][phase as usize]
}

/// Check a bar pattern against a merge. Failures are report entries.
pub fn verify_pattern(m: &MergedLayout, p: &BarPattern) -> Report {
    let mut r = Report::new(format!("{} pattern, d = {}", m.merge_type, m.d));
    let anc = m.ancilla_set();

    // Bars are disjoint and cover the ancilla.
    let mut covered = ModeSet::new();
    let mut overlap = false;
    for b in &p.bars {
        for v in [b.0, b.1] {
            overlap |= covered.contains(v);
            covered.insert(v);
        }
    }
    let covers = covered == anc;
    r.check(
        "bars cover ancilla exactly once",
        covers && !overlap,
        format!("{} bars over {} ancilla modes", p.bars.len(), anc.len()),
    );

    // Outcome identity.
    let color = m.merge_type.outcome_color();
    let q = color_product(m, color);
    let (ratio, n_in_q) = outcome_ratio(m, &p.bars);
    let label = match m.merge_type {
        MergeType::TypeI => "Q_R = i a b Q_A",
        MergeType::TypeII => "Q_G = i a b Q_W",
        MergeType::ParityProjection => "Q_R = a b c d Q_W",
    };
    r.check(
        label,
        ratio == Monomial::identity(),
        if ratio.is_scalar() {
            format!("ratio {} ({} bars in the product)", sign_of(ratio.phase()), n_in_q)
        } else {
            format!("supports differ on {:?}", ratio.support().to_vec())
        },
    );
    if m.merge_type != MergeType::TypeII {
        let all = q.support().len() == m.n_modes();
        r.check(
            "Q_R covers every mode",
            all,
            format!("|supp Q_R| = {} of {}", q.support().len(), m.n_modes()),
        );
    }

    // Non-outcome colours survive as products of old stabilizers and bars.
    let mut failures = Vec::new();
    let mut negative = 0;
    let plaq = constrained(m);
    for &pid in &plaq {
        let st = m.layout.plaquettes[pid].stabilizer();
        match decompose(m, &p.bars, st.support()) {
            Ok(prod) => {
                let ratio = mono_mul(&st, &prod.inverse());
                if ratio.phase() == 2 {
                    negative += 1;
                }
                if !ratio.is_scalar() || ratio.phase() % 2 == 1 {
                    failures.push(format!("plaquette {pid}: ratio {ratio}"));
                }
            }
            Err(e) => failures.push(format!("plaquette {pid}: {e}")),
        }
    }
    r.check(
        "non-outcome stabilizers from old stabilizers and bars",
        failures.is_empty(),
        if failures.is_empty() {
            format!("{} plaquettes, {} with sign -1", plaq.len(), negative)
        } else {
            format!("{} failures, first: {}", failures.len(), failures[0])
        },
    );

    // Blue squares fully in the ancilla are pairs of bars.
    let pairs = square_pairs(m, &p.bars);
    let anc_squares: Vec<usize> = m
        .layout
        .plaquettes_of(Color::Blue)
        .filter(|s| s.vertices.iter().all(|v| anc.contains(*v)))
        .map(|s| s.id)
        .collect();
    let exact = pairs.iter().all(|&(pid, i, j)| {
        mono_mul(&p.bars[i].operator(), &p.bars[j].operator()) == m.layout.plaquettes[pid].stabilizer()
    });
    r.check(
        "ancilla blue squares are bar pairs",
        pairs.len() == anc_squares.len() && exact,
        format!("{} of {} squares", pairs.len(), anc_squares.len()),
    );

    // Conserved quantity.
    let qb = unpaired_bars(m, p);
    let conserved = mono_mul(&joint_logical(m), &BarPattern::product(&qb));
    let anti: Vec<usize> = m
        .layout
        .plaquettes
        .iter()
        .filter(|pl| !commutes(&conserved, &pl.stabilizer()))
        .map(|pl| pl.id)
        .collect();
    r.check(
        "conserved quantity commutes with merged stabilizers",
        anti.is_empty(),
        if anti.is_empty() {
            format!("{} unpaired bars", qb.len())
        } else {
            format!("anticommutes with {anti:?}")
        },
    );
    r
}

/// Single-mode flips over a whole patch act like the logical flip.
///
/// The flip frame of a monomial `x` is the set of modes `j` (data modes plus
/// one external mode `V`) whose `c_j` anticommutes with `x`.
pub fn verify_logical_phase(layout: &CodeLayout) -> Report {
    let mut r = Report::new(format!("logical phase, d = {}", layout.d));
    let logical = logical_operator(layout);
    let n = layout.vertices.len();
    let anti: Vec<usize> = layout
        .plaquettes
        .iter()
        .filter(|p| !commutes(&logical, &p.stabilizer()))
        .map(|p| p.id)
        .collect();
    r.check("stabilizers commute with the logical", anti.is_empty(), format!("{} plaquettes", layout.plaquettes.len()));

    let frame = |flips: &[Monomial]| -> ModeSet {
        (0..=n)
            .filter(|&j| flips.iter().filter(|f| !commutes(f, &Monomial::mode(j))).count() % 2 == 1)
            .collect()
    };
    let singles: Vec<Monomial> = layout.logical_support.iter().map(|&v| Monomial::mode(v)).collect();
    let f_singles = frame(&singles);
    let f_logical = frame(std::slice::from_ref(&logical));
    r.check(
        "frame of single flips equals frame of logical flip",
        f_singles == f_logical,
        format!("both flip {:?}", f_logical.to_vec()),
    );
    let product = Monomial::product_of(&layout.logical_support);
    r.check(
        "product of single modes is the logical up to phase",
        product.support() == logical.support(),
        format!("support {}", product.weight()),
    );
    r.check(
        "odd logical support",
        logical.weight() % 2 == 1,
        format!("|supp| = {}", logical.weight()),
    );
    r
}

/// One row of the parity-projection correction table: bar-row outcomes
/// (top, bottom, left, right) and the logical flips applied, as patch
/// indices (0 = a, ..., 3 = d).
pub const PARITY_CORRECTIONS: [([i8; 4], &[usize]); 8] = [
    ([1, 1, 1, 1], &[]),
    ([-1, -1, 1, 1], &[0, 3]),
    ([1, -1, -1, 1], &[3]),
    ([1, 1, -1, -1], &[0, 1]),
    ([-1, 1, 1, -1], &[1]),
    ([-1, 1, -1, 1], &[0]),
    ([1, -1, 1, -1], &[2]),
    ([-1, -1, -1, -1], &[0, 2]),
];

/// Group consistency of the parity-projection corrections: rows obey
/// `η_t η_b = η_l η_r`, cover every such outcome once, and the map from
/// outcomes to flips (modulo the four-patch flip) is a homomorphism.
pub fn verify_parity_table() -> Report {
    check_corrections(&PARITY_CORRECTIONS)
}

fn check_corrections(rows: &[([i8; 4], &[usize])]) -> Report {
    let mut r = Report::new("parity-projection corrections");
    let mask = |s: &[usize]| s.iter().fold(0u8, |m, &k| m ^ (1 << k));
    let key = |e: [i8; 4]| e.iter().enumerate().fold(0u8, |m, (i, &x)| m | (((x < 0) as u8) << i));
    let reduce = |m: u8| if m.count_ones() > 2 || (m.count_ones() == 2 && m & 1 == 0) { m ^ 0b1111 } else { m };
    let table: HashMap<u8, u8> =
        rows.iter().map(|(e, c)| (key(*e), reduce(mask(c)))).collect();

    let constraint = rows.iter().all(|(e, _)| e[0] * e[1] == e[2] * e[3]);
    r.check("eta_t eta_b = eta_l eta_r", constraint, "all rows");
    r.check("every outcome listed once", table.len() == 8, format!("{} distinct rows", table.len()));

    let mut bad = 0;
    for (&a, &ca) in &table {
        for (&b, &cb) in &table {
            if table.get(&(a ^ b)).copied() != Some(reduce(ca ^ cb)) {
                bad += 1;
            }
        }
    }
    r.check("corrections compose", bad == 0, format!("{bad} of 64 products inconsistent"));
    let distinct: HashSet<u8> = table.values().copied().collect();
    r.check("corrections distinct modulo abcd", distinct.len() == 8, format!("{} classes", distinct.len()));
    r
}

/// Build the merge for side `d`, construct its pattern and verify everything.
pub fn run_surgery(d: usize, merge_type: MergeType) -> Result<(MergedLayout, BarPattern, Report)> {
    let patch = crate::code::build_code(d)?;
    let patches = vec![&patch; merge_type.n_patches()];
    let m = build_merge(&patches, merge_type)?;
    let mut report = m.validate();
    let p = construct_pattern(&m)?;
    report.extend(verify_pattern(&m, &p));
    if merge_type == MergeType::ParityProjection {
        report.extend(verify_parity_table());
    }
    Ok((m, p, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn merged(d: usize, t: MergeType) -> (MergedLayout, BarPattern) {
        let patch = crate::code::build_code(d).unwrap();
        let m = build_merge(&vec![&patch; t.n_patches()], t).unwrap();
        let p = construct_pattern(&m).unwrap();
        (m, p)
    }

    #[test]
    fn type_i_identity_is_exact_at_d5() {
        let (m, p, r) = run_surgery(5, MergeType::TypeI).unwrap();
        assert!(r.passed(), "{r}");
        let q = color_product(&m, Color::Red);
        let (ratio, _) = outcome_ratio(&m, &p.bars);
        assert_eq!(ratio, Monomial::identity());
        assert_eq!(q.support().len(), m.n_modes());
    }

    #[test]
    fn every_merge_type_verifies() {
        for d in [5, 9] {
            for t in [MergeType::TypeI, MergeType::TypeII, MergeType::ParityProjection] {
                let (_, _, r) = run_surgery(d, t).unwrap();
                assert!(r.passed(), "{t} d={d}\n{r}");
            }
        }
    }

    #[test]
    fn patches_do_not_overlap_and_keep_their_size() {
        let patch = crate::code::build_code(5).unwrap();
        for t in [MergeType::TypeI, MergeType::TypeII, MergeType::ParityProjection] {
            let (m, _) = merged(5, t);
            let mut seen = HashSet::new();
            for e in &m.embeddings {
                assert_eq!(e.len(), patch.vertices.len());
                for &v in e {
                    assert!(seen.insert(v), "{t}: mode {v} shared");
                    assert!(!m.ancilla.contains(&v));
                }
            }
            assert_eq!(seen.len() + m.ancilla.len(), m.n_modes());
        }
    }

    #[test]
    fn blue_ancilla_squares_are_bar_pairs() {
        let (m, p) = merged(5, MergeType::TypeI);
        let anc = m.ancilla_set();
        let pairs = square_pairs(&m, &p.bars);
        for sq in m.layout.plaquettes_of(Color::Blue) {
            if sq.vertices.iter().all(|v| anc.contains(*v)) {
                let (_, i, j) = *pairs.iter().find(|(pid, _, _)| *pid == sq.id).expect("square split");
                assert_eq!(mono_mul(&p.bars[i].operator(), &p.bars[j].operator()), sq.stabilizer());
            }
        }
    }

    #[test]
    fn dropping_a_bar_breaks_the_pattern() {
        let (m, p) = merged(5, MergeType::TypeI);
        for i in [0, p.bars.len() / 2, p.bars.len() - 1] {
            assert!(!verify_pattern(&m, &p.without(i)).passed());
        }
    }

    #[test]
    fn flipping_a_free_bar_flips_the_sign() {
        let (m, mut p) = merged(5, MergeType::TypeI);
        let free = unpaired_bars(&m, &p)[0];
        let i = p.bars.iter().position(|b| *b == free).unwrap();
        p.bars[i] = Bar(free.1, free.0);
        let (ratio, _) = outcome_ratio(&m, &p.bars);
        let q = color_product(&m, Color::Red);
        if q.support().contains(free.0) {
            assert_eq!(ratio, Monomial::scalar(2));
        } else {
            assert_eq!(ratio, Monomial::identity());
        }
    }

    #[test]
    fn pattern_is_deterministic() {
        let (_, a) = merged(5, MergeType::TypeII);
        let (_, b) = merged(5, MergeType::TypeII);
        assert_eq!(a, b);
    }

    #[test]
    fn merge_rejects_bad_inputs() {
        let p5 = crate::code::build_code(5).unwrap();
        let p9 = crate::code::build_code(9).unwrap();
        assert!(build_merge(&[&p5, &p9], MergeType::TypeI).is_err());
        assert!(build_merge(&[&p5], MergeType::TypeI).is_err());
        assert!(build_merge(&[&p5, &p5], MergeType::ParityProjection).is_err());
    }

    #[test]
    fn logical_phase_and_parity_table() {
        for d in [5, 9] {
            let r = verify_logical_phase(&crate::code::build_code(d).unwrap());
            assert!(r.passed(), "{r}");
        }
        assert!(verify_parity_table().passed());
    }

    #[test]
    fn corrupted_parity_table_is_caught() {
        // Swapping two corrections must break the homomorphism.
        let mut rows = PARITY_CORRECTIONS;
        let c = rows[2].1;
        rows[2].1 = rows[4].1;
        rows[4].1 = c;
        assert!(!check_corrections(&rows).passed());
    }

    #[test]
    fn merge_type_parsing() {
        for (s, t) in [("1", MergeType::TypeI), ("ii", MergeType::TypeII), ("pp", MergeType::ParityProjection)] {
            assert_eq!(s.parse::<MergeType>().unwrap(), t);
        }
        assert!("3".parse::<MergeType>().is_err());
        assert_eq!(MergeType::TypeII.outcome_color(), Color::Green);
    }
}
