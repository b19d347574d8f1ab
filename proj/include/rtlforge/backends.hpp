#pragma once

#include <string>
#include <vector>

#include "rtlforge/elaborate.hpp"

namespace rtlforge {

struct EmissionUnit {
    enum class Kind { SupportPackage, TypesPackage, Entity };
    std::string file_name;
    Kind kind = Kind::Entity;
    std::string text;
};

// Clock/reset naming; defaults match the single-process template.
struct VhdlOptions {
    std::string clock = "clk";
    std::string reset_n = "reset_n";   // asynchronous, active low
    std::string sreset = "sreset";     // synchronous, active high
};

// One entity per unique circuit definition (children first), plus one types
// package per circuit that declares typedefs. Deterministic output.
std::vector<EmissionUnit> emit_vhdl(const ElaboratedCircuit& elab,
                                    const VhdlOptions& opts = {});

// Fixed helper package (to_bv/to_uint/resize/...); byte-identical across runs.
EmissionUnit emit_support_package();

// Graphviz digraph of the constructed AST with deterministic pre-order
// node numbering.
std::string emit_dot(const ElaboratedCircuit& elab);

// Indented human-readable rendering of the constructed circuit.
std::string pretty(const ElaboratedCircuit& elab);

}  // namespace rtlforge
