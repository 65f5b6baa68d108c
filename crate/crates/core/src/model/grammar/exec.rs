use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Axis, GrammarError, Op, PrimitiveKind, Production, RuleProgram, SplitSize};
use crate::geom::{self, P2, V2};
use crate::model::mesh::{Albedo, Mesh};
use crate::model::primitives::{self, ROUND_SEGMENTS};
use crate::model::SemanticClass;
use crate::rng::{keyed_rng, Domain};

pub const MAX_DEPTH: usize = 64;

const DEFAULT_ALBEDO: Albedo = [0.7, 0.7, 0.7];
const MIN_PIECE_AREA: f64 = 1e-9;

#[derive(Debug, Clone)]
struct Shape {
    ring: Vec<P2>,
    z0: f64,
    height: f64,
    class: SemanticClass,
    color: Albedo,
}

struct Exec<'a> {
    program: &'a RuleProgram,
    rng: ChaCha8Rng,
    mesh: Mesh,
    /// Scope axes, aligned with the footprint's longest edge.
    x_axis: V2,
    y_axis: V2,
}

impl Exec<'_> {
    fn axis_dir(&self, axis: Axis) -> V2 {
        match axis {
            Axis::X => self.x_axis,
            Axis::Y => self.y_axis,
            Axis::Z => unreachable!("z is handled separately"),
        }
    }

    fn extent(&self, shape: &Shape, axis: Axis) -> (f64, f64) {
        match axis {
            Axis::Z => (shape.z0, shape.z0 + shape.height),
            _ => {
                let d = self.axis_dir(axis);
                shape.ring.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
                    let t = p.coords.dot(&d);
                    (lo.min(t), hi.max(t))
                })
            }
        }
    }

    /// Slab of `shape` between `a` and `b` along `axis`.
    fn slab(&self, shape: &Shape, axis: Axis, a: f64, b: f64) -> Option<Shape> {
        let mut piece = shape.clone();
        match axis {
            Axis::Z => {
                piece.z0 = a;
                piece.height = b - a;
            }
            _ => {
                let d = self.axis_dir(axis);
                let lower = geom::clip_halfplane(&shape.ring, d, a);
                let upper = geom::clip_halfplane(&lower, -d, -b);
                let ring = geom::clean_ring(&upper);
                if ring.len() < 3 || geom::signed_area(&ring) < MIN_PIECE_AREA {
                    return None;
                }
                piece.ring = ring;
            }
        }
        Some(piece)
    }

    fn invoke(&mut self, symbol: &str, shape: Shape, depth: usize) -> Result<(), GrammarError> {
        if depth > MAX_DEPTH {
            return Err(GrammarError::RecursionLimit {
                rule: symbol.to_string(),
                limit: MAX_DEPTH,
            });
        }
        let program = self.program;
        let productions = &program.rules[symbol];
        let chosen = self.pick(productions);
        self.run(symbol, &chosen.ops, shape, depth)
    }

    fn pick<'p>(&mut self, productions: &'p [Production]) -> &'p Production {
        if productions.len() == 1 {
            return &productions[0];
        }
        let u: f64 = self.rng.random();
        let mut acc = 0.0;
        for p in productions {
            acc += p.weight.unwrap_or(0.0);
            if u < acc {
                return p;
            }
        }
        // rounding left u above the final cumulative weight
        productions
            .iter()
            .rev()
            .find(|p| p.weight.unwrap_or(0.0) > 0.0)
            .unwrap_or(&productions[productions.len() - 1])
    }

    fn run(&mut self, rule: &str, ops: &[Op], mut shape: Shape, depth: usize) -> Result<(), GrammarError> {
        for op in ops {
            match op {
                Op::Extrude(h) => shape.height = *h,
                Op::Color(c) => shape.color = *c,
                Op::Class(c) => shape.class = *c,
                Op::Invoke(sym) => self.invoke(sym, shape.clone(), depth + 1)?,
                Op::Primitive(kind) => self.emit(*kind, &shape),
                Op::Choose(branches) => {
                    let chosen = self.pick(branches).clone();
                    self.run(rule, &chosen.ops, shape.clone(), depth + 1)?;
                }
                Op::Setback { distance, symbol } => {
                    if let Some(ring) = geom::inset(&shape.ring, *distance) {
                        let top = Shape {
                            ring,
                            z0: shape.z0 + shape.height,
                            height: 0.0,
                            ..shape.clone()
                        };
                        self.invoke(symbol, top, depth + 1)?;
                    }
                }
                Op::Repeat { axis, size, symbol } => {
                    let (lo, hi) = self.extent(&shape, *axis);
                    let span = hi - lo;
                    if span <= 0.0 {
                        continue;
                    }
                    let count = ((span / size).round() as usize).max(1);
                    let step = span / count as f64;
                    for k in 0..count {
                        let a = lo + step * k as f64;
                        let b = if k + 1 == count { hi } else { a + step };
                        if let Some(piece) = self.slab(&shape, *axis, a, b) {
                            self.invoke(symbol, piece, depth + 1)?;
                        }
                    }
                }
                Op::Split { axis, parts } => {
                    let (lo, hi) = self.extent(&shape, *axis);
                    let span = hi - lo;
                    let absolute: f64 = parts
                        .iter()
                        .filter_map(|p| match p.size {
                            SplitSize::Absolute(v) => Some(v),
                            SplitSize::Relative(_) => None,
                        })
                        .sum();
                    if absolute > span + 1e-9 {
                        return Err(GrammarError::SplitOverflow {
                            rule: rule.to_string(),
                            requested: absolute,
                            extent: span,
                        });
                    }
                    let weights: f64 = parts
                        .iter()
                        .filter_map(|p| match p.size {
                            SplitSize::Relative(w) => Some(w),
                            SplitSize::Absolute(_) => None,
                        })
                        .sum();
                    let remainder = (span - absolute).max(0.0);
                    let mut cursor = lo;
                    for (k, part) in parts.iter().enumerate() {
                        let len = match part.size {
                            SplitSize::Absolute(v) => v,
                            SplitSize::Relative(w) => remainder * w / weights,
                        };
                        let a = cursor;
                        let fills_to_end = k + 1 == parts.len() && weights > 0.0;
                        let b = if fills_to_end { hi } else { (a + len).min(hi) };
                        cursor = b;
                        if b - a <= 1e-12 {
                            continue;
                        }
                        if let Some(piece) = self.slab(&shape, *axis, a, b) {
                            self.invoke(&part.symbol, piece, depth + 1)?;
                        }
                    }
                }
            }
        }
        Ok(())
    }

    fn emit(&mut self, kind: PrimitiveKind, s: &Shape) {
        let top = s.z0 + s.height;
        match kind {
            PrimitiveKind::Box => {
                primitives::add_prism(&mut self.mesh, &s.ring, s.z0, top, s.class, s.color)
            }
            PrimitiveKind::Quad => primitives::add_polygon(&mut self.mesh, &s.ring, top, s.class, s.color),
            PrimitiveKind::Cylinder | PrimitiveKind::Cone => {
                let (xl, xh) = self.extent(s, Axis::X);
                let (yl, yh) = self.extent(s, Axis::Y);
                let radius = 0.5 * (xh - xl).min(yh - yl);
                let center = P2::from(self.x_axis * (xl + xh) / 2.0 + self.y_axis * (yl + yh) / 2.0);
                if radius <= 0.0 {
                    return;
                }
                if kind == PrimitiveKind::Cylinder {
                    let ring = primitives::circle(center, radius, ROUND_SEGMENTS);
                    primitives::add_prism(&mut self.mesh, &ring, s.z0, top, s.class, s.color);
                } else if s.height > 0.0 {
                    primitives::add_cone(&mut self.mesh, center, radius, s.z0, top, s.class, s.color);
                }
            }
        }
    }
}

/// Expands `program` over one footprint. The result depends only on
/// `(program, footprint, footprint_id, seed)`; random choices come from a
/// stream keyed by `(seed, footprint_id)`.
pub fn apply_rules(
    program: &RuleProgram,
    footprint: &[P2],
    footprint_id: u64,
    seed: u64,
) -> Result<Mesh, GrammarError> {
    let mut ring = geom::clean_ring(footprint);
    if geom::signed_area(&ring) < 0.0 {
        ring.reverse();
    }
    let n = ring.len();
    let longest = (0..n)
        .map(|i| ring[(i + 1) % n] - ring[i])
        .max_by(|a, b| a.norm().total_cmp(&b.norm()))
        .and_then(|d| d.try_normalize(1e-12))
        .unwrap_or_else(V2::x);
    let mut exec = Exec {
        program,
        rng: keyed_rng(seed, Domain::Grammar, footprint_id),
        mesh: Mesh::new(),
        x_axis: longest,
        y_axis: geom::left_normal(longest),
    };
    let shape = Shape {
        ring,
        z0: 0.0,
        height: 0.0,
        class: SemanticClass::Building,
        color: DEFAULT_ALBEDO,
    };
    exec.invoke(&program.axiom, shape, 0)?;
    Ok(exec.mesh)
}
