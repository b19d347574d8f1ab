#pragma once

#include <functional>
#include <optional>
#include <string>

#include "rtlforge/diag.hpp"
#include "rtlforge/ir.hpp"

namespace rtlforge {

// Symbol lookup used by the checker: signal or instance-port name to its
// fully resolved (alias-free) type. Returns nullopt for unknown names.
using TypeLookup =
    std::function<std::optional<TypeDesc>(const Expr& ref)>;

// Fully resolves aliases in `t` against a circuit's typedef table and the
// built-in alias table. Returns nullopt on an unresolvable name.
std::optional<TypeDesc> resolve_type(const TypeDesc& t, const CircuitDef& circuit);

// Bit width of a fully resolved type. Bit -> 1, vector kinds -> width,
// Record -> sum of field widths, Array -> length * element width.
int width_of(const TypeDesc& t);

// Natural (un-coerced) type of an expression under the lookup, fully
// resolved. Nullopt when the expression is ill-formed or a name is unknown.
std::optional<TypeDesc> natural_type(const Expr& e, const TypeLookup& lookup);

// Collapses literal-only subtrees into a single Lit with recomputed width.
// Non-constant subtrees are left untouched.
Expr fold_constants(const Expr& e);

// Result of a successful contextual type analysis: the expression rewritten
// with explicit Conv nodes (resize-to / to-signed / to-unsigned /
// bit-to-uint), typed at the assignment target.
struct CoercionPlan {
    Expr rewritten;
    TypeDesc result_type;   // resolved type of the assignment target
    int context_width = 0;  // width everything is evaluated at

    // Conversions inserted anywhere in the plan, outermost first per node.
    std::vector<std::pair<ConvKind, int>> conversions() const;
};

// Contextual analysis of `lhs_type <= rhs` under the automatic conversion
// rules. Exactly one of plan/diagnostic is produced.
struct CheckResult {
    std::optional<CoercionPlan> plan;
    std::optional<Diagnostic> diagnostic;
    bool ok() const { return plan.has_value(); }
};

CheckResult check_assign(const TypeDesc& lhs_type, const Expr& rhs,
                         const TypeLookup& lookup);

// Analysis of an If/Case-style condition; result type is Bit. Single-bit
// signals compared against literal 0/1 get a bit-to-uint(1) conversion on
// the signal side.
CheckResult check_condition(const Expr& cond, const TypeLookup& lookup);

}  // namespace rtlforge
