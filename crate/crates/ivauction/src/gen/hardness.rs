//! Four-agent ratio instances encoding 1-in-3 SAT.
//!
//! Every entry is 1 or `epsilon`, and `epsilon` only appears at gadget
//! corners. Values increase along every line, so agent `i` keeps the item
//! on the whole ray above any profile where it wins. The fourth signal is
//! ignored: tables are built on `(s1, s2, s3)` and broadcast over `s4`.
//!
//! Gadgets use disjoint `s2` and `s3` ranges. Variable gadgets sit on a
//! diagonal (both ranges grow with the index), and so do clause gadgets, so
//! rays of agents 1 and 2 from two gadgets of the same kind never meet.
//! Variables and clauses are anti-diagonal to each other, as the connectors
//! need, so they get separate heights: variable bottoms, clause bottoms,
//! connectors, variable tops, clause tops.
//!
//! Each literal cycle of a clause has the corner pattern of a variable
//! gadget and spans from its bottom to height `k`, so its lines are fixed at
//! every connector height. The first slot's cycle reaches the center with its
//! agent-2 ray and keeps agent 2 out with an agent-1 ray above it; the third
//! slot's cycle uses an agent-0 line through the center. The second slot has
//! two cycles: one whose agent-1 ray passes the center when the literal is
//! true, and one one level lower whose agent-0 line right of the center keeps
//! agent 1 out when it is false. Top corners lie on a diagonal.

use super::formula::{Formula1in3, Literal};
use super::GenError;
use crate::model::{values_from_ratios, AllocationRule, Dims, Instance, LineOrdering, Mode, Ratios};
use crate::rational::{fmt_q, one, qi, Q};
use num_traits::{One, Zero};
use std::collections::BTreeMap;

/// `(s1, s2, s3)`, 1-based.
pub type Cell = (usize, usize, usize);

/// An agent-0 line, i.e. a fixed `(s2, s3)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct LineCoord {
    pub s2: usize,
    pub s3: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VariableGadget {
    pub var: usize,
    pub bottom: usize,
    pub top: usize,
    /// Active (agent 0 along it) iff the variable is true.
    pub true_line: LineCoord,
    /// Active iff the variable is false.
    pub false_line: LineCoord,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClauseGadget {
    pub clause: usize,
    /// Heights `[low bottom, middle bottom, center, top]`.
    pub heights: [usize; 4],
    pub center: Cell,
    /// `(slot, line)` per cycle, each line with coordinates no other
    /// literal line of the clause shares.
    pub literal_lines: [(usize, LineCoord); 4],
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Connector {
    pub height: usize,
    pub clause: usize,
    pub slot: usize,
    pub var_line: LineCoord,
    pub literal_line: LineCoord,
}

/// Mapping from formula elements to coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HardnessLayout {
    pub k: usize,
    pub variables: Vec<VariableGadget>,
    pub clauses: Vec<ClauseGadget>,
    pub connectors: Vec<Connector>,
}

impl HardnessLayout {
    /// Plain-text table, one element per line.
    pub fn table(&self) -> String {
        let mut out = format!("k {}\n", self.k);
        for v in &self.variables {
            out += &format!(
                "var {} heights {}..{} true_line ({},{}) false_line ({},{})\n",
                v.var + 1,
                v.bottom,
                v.top,
                v.true_line.s2,
                v.true_line.s3,
                v.false_line.s2,
                v.false_line.s3
            );
        }
        for c in &self.clauses {
            out += &format!(
                "clause {} heights {:?} center ({},{},{}) lines",
                c.clause + 1,
                c.heights,
                c.center.0,
                c.center.1,
                c.center.2
            );
            for (slot, l) in &c.literal_lines {
                out += &format!(" {}:({},{})", slot + 1, l.s2, l.s3);
            }
            out.push('\n');
        }
        for x in &self.connectors {
            out += &format!(
                "xor h {} clause {} slot {} var_line ({},{}) literal_line ({},{})\n",
                x.height,
                x.clause + 1,
                x.slot + 1,
                x.var_line.s2,
                x.var_line.s3,
                x.literal_line.s2,
                x.literal_line.s3
            );
        }
        out
    }
}

/// A corner whose winner depends on one literal.
#[derive(Debug, Clone, Copy)]
struct Choice {
    cell: Cell,
    driver: Literal,
    when_true: usize,
    when_false: usize,
}

#[derive(Debug, Clone)]
pub struct Hardness {
    pub formula: Formula1in3,
    pub epsilon: Q,
    pub layout: HardnessLayout,
    pub ratios: Ratios,
    /// Allowed agents (bitmask over the first three) at each corner.
    corners: BTreeMap<Cell, u8>,
    choices: Vec<Choice>,
}

const AGENTS: usize = 4;

struct CycleSpec {
    slot: usize,
    /// `(height code, ds2, ds3, winner if the literal is true, winner if
    /// false)` relative to the center, height codes indexing `heights`.
    corners: [(usize, i64, i64, usize, usize); 3],
    line: (i64, i64),
    active_when_true: bool,
}

const CYCLES: [CycleSpec; 4] = [
    CycleSpec {
        slot: 0,
        corners: [(2, -1, 1, 0, 1), (3, -1, -3, 1, 2), (2, 0, -3, 2, 0)],
        line: (-1, 1),
        active_when_true: true,
    },
    CycleSpec {
        slot: 1,
        corners: [(2, -3, 0, 1, 0), (3, -3, -4, 2, 1), (2, -2, -4, 0, 2)],
        line: (-2, -4),
        active_when_true: true,
    },
    CycleSpec {
        slot: 1,
        corners: [(1, 1, 0, 1, 0), (3, 1, -1, 2, 1), (1, 3, -1, 0, 2)],
        line: (3, -1),
        active_when_true: true,
    },
    CycleSpec {
        slot: 2,
        corners: [(0, 0, 0, 0, 1), (3, 0, -2, 1, 2), (0, 2, -2, 2, 0)],
        line: (2, -2),
        active_when_true: false,
    },
];
/// Winner at the center when the given slot holds the true literal.
const CENTER_WINNER: [usize; 3] = [2, 1, 0];
/// Clause bands are this wide in `s2` and `s3`.
const CLAUSE_BAND: usize = 7;

fn offset(base: usize, d: i64) -> usize {
    (base as i64 + d) as usize
}

/// Builds the gadget instance. Requires `beta > 1` and `0 < epsilon < 1/beta`.
pub fn gen_hardness(phi: &Formula1in3, epsilon: &Q, beta: &Q) -> Result<Hardness, GenError> {
    if *beta <= one() {
        return Err(GenError::BadParameter(format!("beta = {} must exceed 1", fmt_q(beta))));
    }
    if *epsilon <= Q::zero() || *epsilon >= beta.recip() {
        return Err(GenError::BadParameter(format!(
            "epsilon = {} must lie in (0, 1/beta)",
            fmt_q(epsilon)
        )));
    }
    let nv = phi.vars();
    let m = phi.clauses().len();
    if nv == 0 {
        return Err(GenError::BadParameter("formula has no variables".into()));
    }
    let connectors_total = CYCLES.len() * m;
    let (var_low, first_connector) = (1, 5);
    let var_top = first_connector + 2 * connectors_total;
    let k = (var_top + 1).max(2 * nv + CLAUSE_BAND * m);
    let heights = [2, 3, 4, k];
    let mut corners: BTreeMap<Cell, u8> = BTreeMap::new();
    let mut choices = Vec::new();
    let mut add_corner = |cell: Cell, allowed: u8| {
        let prev = corners.insert(cell, allowed);
        debug_assert!(prev.is_none(), "corner {cell:?} placed twice");
    };

    let mut variables = Vec::with_capacity(nv);
    for v in 0..nv {
        let (b2, b3) = (1 + 2 * v, CLAUSE_BAND * m + 1 + 2 * v);
        let lit = Literal::new(v, true);
        let (lo, hi) = (var_low, var_top);
        for (cell, t, f) in [((lo, b2, b3 + 1), 0, 1), ((hi, b2, b3), 1, 2), ((lo, b2 + 1, b3), 2, 0)] {
            add_corner(cell, 1 << t | 1 << f);
            choices.push(Choice {
                cell,
                driver: lit,
                when_true: t,
                when_false: f,
            });
        }
        variables.push(VariableGadget {
            var: v,
            bottom: lo,
            top: hi,
            true_line: LineCoord { s2: b2, s3: b3 + 1 },
            false_line: LineCoord { s2: b2 + 1, s3: b3 },
        });
    }

    let mut clauses = Vec::with_capacity(m);
    let mut connectors = Vec::with_capacity(connectors_total);
    for (j, lits) in phi.clauses().iter().enumerate() {
        let (c2, c3) = (2 * nv + 4 + CLAUSE_BAND * j, 5 + CLAUSE_BAND * j);
        let center = (heights[2], c2, c3);
        add_corner(center, 0b111);
        let mut literal_lines = [(0, LineCoord { s2: 0, s3: 0 }); 4];
        for (spec, out) in CYCLES.iter().zip(literal_lines.iter_mut()) {
            let lit = lits[spec.slot];
            for &(code, d2, d3, solid, dashed) in &spec.corners {
                let cell = (heights[code], offset(c2, d2), offset(c3, d3));
                add_corner(cell, 1 << solid | 1 << dashed);
                choices.push(Choice {
                    cell,
                    driver: lit,
                    when_true: solid,
                    when_false: dashed,
                });
            }
            let line = LineCoord {
                s2: offset(c2, spec.line.0),
                s3: offset(c3, spec.line.1),
            };
            *out = (spec.slot, line);
            let gadget = &variables[lit.var];
            // The XOR needs the variable line that is active exactly when
            // the literal line is not.
            let literal_active_when_var_true = lit.positive == spec.active_when_true;
            let var_line = if literal_active_when_var_true {
                gadget.false_line
            } else {
                gadget.true_line
            };
            let var_line_driver = Literal::new(lit.var, !literal_active_when_var_true);
            let h = first_connector + 2 * connectors.len();
            let (big, small) = (var_line, line);
            for (cell, allowed, t, f) in [
                ((h, big.s2, big.s3), 0b011, 0, 1),
                ((h, small.s2, small.s3), 0b101, 2, 0),
                ((h + 1, big.s2, small.s3), 0b110, 1, 2),
            ] {
                add_corner(cell, allowed);
                choices.push(Choice {
                    cell,
                    driver: var_line_driver,
                    when_true: t,
                    when_false: f,
                });
            }
            connectors.push(Connector {
                height: h,
                clause: j,
                slot: spec.slot,
                var_line,
                literal_line: small,
            });
        }
        clauses.push(ClauseGadget {
            clause: j,
            heights,
            center,
            literal_lines,
        });
    }

    let dims = Dims::new(AGENTS, k)?;
    let ratios = Ratios::from_fn(dims, |i, s| {
        let cell = (s.0[0], s.0[1], s.0[2]);
        match corners.get(&cell) {
            Some(mask) if i == 3 || mask >> i & 1 == 0 => epsilon.clone(),
            _ => one(),
        }
    })?;
    Ok(Hardness {
        formula: phi.clone(),
        epsilon: epsilon.clone(),
        layout: HardnessLayout {
            k,
            variables,
            clauses,
            connectors,
        },
        ratios,
        corners,
        choices,
    })
}

/// Default epsilon `1/(2 beta)`.
pub fn default_epsilon(beta: &Q) -> Q {
    (qi(2) * beta).recip()
}

impl Hardness {
    pub fn dims(&self) -> Dims {
        self.ratios.dims()
    }

    pub fn ordering(&self) -> LineOrdering {
        LineOrdering::increasing(self.dims())
    }

    /// Strictly increasing values inducing the ratios.
    pub fn instance(&self, mode: Mode) -> Instance {
        values_from_ratios(&self.ratios, mode)
    }

    /// Deterministic rule of ratio 1 built from a satisfying assignment.
    pub fn witness(&self, assignment: &[bool]) -> Result<AllocationRule, GenError> {
        if !self.formula.satisfied_by(assignment) {
            return Err(GenError::NotSatisfying);
        }
        let k = self.layout.k;
        let cell_index = |(a, b, c): Cell| ((c - 1) * k + (b - 1)) * k + (a - 1);
        let mut owner: Vec<Option<usize>> = vec![None; k * k * k];
        let mut seeds: Vec<(Cell, usize)> = self
            .choices
            .iter()
            .map(|c| {
                let agent = if c.driver.eval(assignment) { c.when_true } else { c.when_false };
                (c.cell, agent)
            })
            .collect();
        for (gadget, lits) in self.layout.clauses.iter().zip(self.formula.clauses()) {
            let slot = lits.iter().position(|l| l.eval(assignment)).expect("exactly one true literal");
            seeds.push((gadget.center, CENTER_WINNER[slot]));
        }
        for (cell, agent) in seeds {
            let start = [cell.0, cell.1, cell.2][agent];
            for t in start..=k {
                let mut c = [cell.0, cell.1, cell.2];
                c[agent] = t;
                let at = (c[0], c[1], c[2]);
                if let Some(mask) = self.corners.get(&at) {
                    if mask >> agent & 1 == 0 {
                        return Err(GenError::WitnessConflict(format!("agent {agent} reaches excluded corner {at:?}")));
                    }
                }
                let slot = &mut owner[cell_index(at)];
                match *slot {
                    Some(a) if a != agent => {
                        return Err(GenError::WitnessConflict(format!("agents {a} and {agent} both claim {at:?}")));
                    }
                    _ => *slot = Some(agent),
                }
            }
        }
        if let Some(cell) = self
            .corners
            .keys()
            .find(|&&c| owner[cell_index(c)].is_none())
        {
            return Err(GenError::WitnessConflict(format!("corner {cell:?} left to agent 3")));
        }
        let dims = self.dims();
        let winners: Vec<usize> = (0..dims.profiles())
            .map(|p| {
                let cell = (dims.signal(p, 0), dims.signal(p, 1), dims.signal(p, 2));
                owner[cell_index(cell)].unwrap_or(3)
            })
            .collect();
        debug_assert!(winners.iter().enumerate().all(|(p, &w)| self.ratios.get(w, p).is_one()));
        Ok(AllocationRule::from_winners(dims, &winners)?)
    }
}
