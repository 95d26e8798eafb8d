use std::collections::BTreeMap;
use std::sync::Arc;

use super::poly::{AtomRef, CoeffExpr, Coord, Var};
use super::SymbolicError;

/// Largest jet order accepted by [`JetContext::new`].
pub const DEFAULT_MAX_ORDER: usize = 8;

/// Declaration of an opaque atom in a context's atom table.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomDecl {
    /// Roster coordinates the atom varies with. Empty means a constant
    /// symbol whose partials all vanish.
    pub depends_on: Vec<Coord>,
}

/// The finite jet space `J^m(ℝ×ℝ)` with roster `(θ, s₀, …, s_m)` and a
/// table of opaque atoms. Immutable after construction; shared by `Arc`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JetContext {
    order: usize,
    atoms: BTreeMap<String, AtomDecl>,
}

impl JetContext {
    pub fn new(order: usize) -> Result<Arc<Self>, SymbolicError> {
        Self::with_atoms(order, std::iter::empty::<(String, Vec<Coord>)>())
    }

    /// Context of the given order with the listed atoms and their
    /// dependencies.
    pub fn with_atoms<I, S>(order: usize, atoms: I) -> Result<Arc<Self>, SymbolicError>
    where
        I: IntoIterator<Item = (S, Vec<Coord>)>,
        S: Into<String>,
    {
        Self::with_limit(order, DEFAULT_MAX_ORDER, atoms)
    }

    pub fn with_limit<I, S>(
        order: usize,
        max_order: usize,
        atoms: I,
    ) -> Result<Arc<Self>, SymbolicError>
    where
        I: IntoIterator<Item = (S, Vec<Coord>)>,
        S: Into<String>,
    {
        if order > max_order {
            return Err(SymbolicError::OrderExceedsLimit {
                order,
                limit: max_order,
            });
        }
        let mut table = BTreeMap::new();
        for (name, deps) in atoms {
            let name = name.into();
            validate_atom_name(&name)?;
            for d in &deps {
                if !coord_in_roster(*d, order) {
                    return Err(SymbolicError::UnknownCoordinate {
                        coord: d.symbol(),
                        order,
                    });
                }
            }
            let mut deps = deps;
            deps.sort();
            deps.dedup();
            if table
                .insert(name.clone(), AtomDecl { depends_on: deps })
                .is_some()
            {
                return Err(SymbolicError::InvalidAtomName(format!(
                    "{name} registered twice"
                )));
            }
        }
        Ok(Arc::new(JetContext {
            order,
            atoms: table,
        }))
    }

    /// The next jet space `J^{m+1}` carrying the same atom table. This is the
    /// target of prolongation and contact-ideal reduction, so it may exceed
    /// the default order limit by one.
    pub fn prolonged(&self) -> Arc<Self> {
        Arc::new(JetContext {
            order: self.order + 1,
            atoms: self.atoms.clone(),
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Ordered roster `(θ, s₀, …, s_m)`.
    pub fn roster(&self) -> Vec<Coord> {
        std::iter::once(Coord::Theta)
            .chain((0..=self.order).map(Coord::S))
            .collect()
    }

    pub fn contains(&self, c: Coord) -> bool {
        coord_in_roster(c, self.order)
    }

    pub fn atom(&self, name: &str) -> Option<&AtomDecl> {
        self.atoms.get(name)
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&String, &AtomDecl)> {
        self.atoms.iter()
    }

    /// Whether `atom` varies with coordinate `c`.
    pub fn depends(&self, atom: &AtomRef, c: Coord) -> bool {
        self.atoms
            .get(&atom.name)
            .is_some_and(|d| d.depends_on.contains(&c))
    }

    pub fn coord_expr(&self, c: Coord) -> Result<CoeffExpr, SymbolicError> {
        self.check_coord(c)?;
        Ok(CoeffExpr::coord(c))
    }

    pub fn atom_expr(&self, name: &str) -> Result<CoeffExpr, SymbolicError> {
        if !self.atoms.contains_key(name) {
            return Err(SymbolicError::UnregisteredAtom(name.to_string()));
        }
        Ok(CoeffExpr::atom(name))
    }

    /// `s_k` as a polynomial.
    pub fn s(&self, k: usize) -> Result<CoeffExpr, SymbolicError> {
        self.coord_expr(Coord::S(k))
    }

    pub(crate) fn check_coord(&self, c: Coord) -> Result<(), SymbolicError> {
        if self.contains(c) {
            Ok(())
        } else {
            Err(SymbolicError::UnknownCoordinate {
                coord: c.symbol(),
                order: self.order,
            })
        }
    }

    /// Checks that `expr` only mentions roster coordinates and registered
    /// atoms (formal partials of an atom are allowed only along its
    /// declared dependencies).
    pub fn check_expr(&self, expr: &CoeffExpr) -> Result<(), SymbolicError> {
        for v in expr.vars() {
            match v {
                Var::Coord(c) => self.check_coord(c)?,
                Var::Atom(a) => {
                    let decl = self
                        .atoms
                        .get(&a.name)
                        .ok_or_else(|| SymbolicError::UnregisteredAtom(a.name.clone()))?;
                    if let Some(bad) = a.partials.iter().find(|p| !decl.depends_on.contains(p)) {
                        return Err(SymbolicError::UnregisteredAtom(format!(
                            "{} (no dependence on {})",
                            a.name,
                            bad.symbol()
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

fn coord_in_roster(c: Coord, order: usize) -> bool {
    match c {
        Coord::Theta => true,
        Coord::S(k) => k <= order,
    }
}

fn validate_atom_name(name: &str) -> Result<(), SymbolicError> {
    let looks_like_coord = name == "θ"
        || name == "theta"
        || name.strip_prefix('s').is_some_and(|rest| {
            !rest.is_empty()
                && rest
                    .chars()
                    .all(|ch| ch.is_ascii_digit() || ('₀'..='₉').contains(&ch))
        });
    if name.is_empty() || looks_like_coord || name.contains(char::is_whitespace) {
        return Err(SymbolicError::InvalidAtomName(name.to_string()));
    }
    Ok(())
}
