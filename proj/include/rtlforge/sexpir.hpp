#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rtlforge/diag.hpp"
#include "rtlforge/ir.hpp"

namespace rtlforge {

// S-expression tree. Atoms are identifiers, integers or operator symbols.
struct SexpNode {
    bool is_list = false;
    std::string atom;
    std::vector<SexpNode> children;

    bool operator==(const SexpNode&) const = default;

    static SexpNode make_atom(std::string text) {
        SexpNode n;
        n.atom = std::move(text);
        return n;
    }
    static SexpNode make_list(std::vector<SexpNode> children = {}) {
        SexpNode n;
        n.is_list = true;
        n.children = std::move(children);
        return n;
    }
    const SexpNode* find_form(const std::string& head) const;
};

// Iterative parser (no recursion, nesting depth is heap-bound). ";;" starts
// a line comment; whitespace between tokens is free; identifiers are
// case-sensitive. Exactly one top-level form per input.
std::optional<SexpNode> sexp_parse(const std::string& text, DiagnosticList& diags);

// Canonical formatting: block forms (circuit/sequential/combinatorial/if/
// then/else/case/when/default) put one statement per line at two-space
// indentation; declarations and expressions print inline.
// parse(print(n)) == n for all trees; print(parse(t)) == t for canonical t.
std::string sexp_print(const SexpNode& node);

// Grammar conformance check without building IR; reports every violation.
DiagnosticList sexp_validate(const SexpNode& node);

// Sexpir -> CircuitDef. Null on any error diagnostic.
std::shared_ptr<const CircuitDef> lower_to_ir(const SexpNode& node,
                                              DiagnosticList& diags);

// CircuitDef -> canonical Sexpir text. The circuit must be flat (no
// instances) and FSM-free; hierarchical circuits are flattened first and
// FSMs lowered (Sexpir has no fsm form).
std::string emit_sexpir(const CircuitDef& circuit);

}  // namespace rtlforge
