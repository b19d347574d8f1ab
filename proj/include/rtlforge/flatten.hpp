#pragma once

#include "rtlforge/elaborate.hpp"
#include "rtlforge/ir.hpp"

namespace rtlforge {

// Inlines the instance hierarchy of an elaborated circuit into one flat,
// FSM-free circuit: a child signal s of instance i becomes "i__s", instance
// ports become plain wires connected by the parent's assigns. All types are
// fully resolved and the typedef table is dropped.
CircuitDef flatten(const ElaboratedCircuit& elab);

}  // namespace rtlforge
