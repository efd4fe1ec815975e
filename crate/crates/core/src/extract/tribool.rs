use serde::{Deserialize, Serialize};

/// Three-valued verdict with Kleene connectives.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TriBool {
    DefTrue,
    DefFalse,
    Unknown,
}

impl TriBool {
    pub fn from_bool(b: bool) -> TriBool {
        if b {
            TriBool::DefTrue
        } else {
            TriBool::DefFalse
        }
    }

    pub fn and(self, o: TriBool) -> TriBool {
        use TriBool::*;
        match (self, o) {
            (DefFalse, _) | (_, DefFalse) => DefFalse,
            (DefTrue, DefTrue) => DefTrue,
            _ => Unknown,
        }
    }

    pub fn or(self, o: TriBool) -> TriBool {
        use TriBool::*;
        match (self, o) {
            (DefTrue, _) | (_, DefTrue) => DefTrue,
            (DefFalse, DefFalse) => DefFalse,
            _ => Unknown,
        }
    }

    pub fn not(self) -> TriBool {
        match self {
            TriBool::DefTrue => TriBool::DefFalse,
            TriBool::DefFalse => TriBool::DefTrue,
            TriBool::Unknown => TriBool::Unknown,
        }
    }

    pub fn possibly(self) -> bool {
        self != TriBool::DefFalse
    }

    pub fn definitely(self) -> bool {
        self == TriBool::DefTrue
    }
}
