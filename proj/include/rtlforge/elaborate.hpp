#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rtlforge/diag.hpp"
#include "rtlforge/ir.hpp"
#include "rtlforge/typesys.hpp"

namespace rtlforge {

// Data-dependency graph over signals. Instance ports appear as
// "<instance>.<port>"; edges are tagged combinational or registered.
struct DependencyGraph {
    struct Edge {
        int from = 0;
        int to = 0;
        bool registered = false;
        bool operator==(const Edge&) const = default;
    };

    std::vector<std::string> nodes;
    std::vector<Edge> edges;

    int node_index(const std::string& name) const;
    bool has_edge(const std::string& from, const std::string& to) const;
    bool has_edge(const std::string& from, const std::string& to,
                  bool registered) const;
    // Nodes forming a combinational cycle, empty when acyclic.
    std::vector<std::string> find_comb_cycle() const;
    // Topological order of the combinational subgraph (ignores registered
    // edges); valid only when acyclic.
    std::vector<int> comb_topo_order() const;
};

// One lowered FSM: symbolic state register plus the single-process form.
struct FsmInfo {
    std::string label;
    std::string state_reg;            // "<label>_state"
    std::vector<std::string> states;  // declaration order, first = reset
};

struct FsmLowering {
    FsmInfo info;
    WireDecl state_reg;       // enumerated register, stored as unsigned bits
    Stmt sequential;          // defaults, then case over the state register
    std::optional<Stmt> comb; // comb_assign case, when any state uses one
};

struct ElaboratedCircuit {
    std::shared_ptr<const CircuitDef> source;
    // Fully alias-free types for every port, wire and state register.
    std::map<std::string, TypeDesc> symbols;
    std::vector<PortDecl> ports;  // same order as source
    // FSM-free statement list, expressions as constructed.
    std::vector<Stmt> lowered;
    // Same shape as `lowered`, expressions rewritten with the coercion
    // plans (explicit Conv nodes). Backends and the simulator read this.
    std::vector<Stmt> checked;
    std::vector<FsmInfo> fsms;
    // Direct child definitions, deduplicated by structural equality.
    std::vector<std::shared_ptr<const CircuitDef>> unique_children;
    // Elaborations of the unique children, parallel to unique_children.
    std::vector<std::shared_ptr<const ElaboratedCircuit>> child_elabs;
    DependencyGraph graph;
    // Signals assigned under a sequential context (includes state registers).
    std::vector<std::string> registered;
    bool has_registers = false;  // here or in any descendant

    std::optional<TypeDesc> type_of(const std::string& name) const;
    bool is_state_reg(const std::string& name) const;
    const FsmInfo* fsm_of_reg(const std::string& name) const;
    const ElaboratedCircuit* child_elab(const std::string& instance) const;

    // The lowered form as a plain circuit (state registers become wires);
    // re-elaborating it yields a structurally identical result.
    CircuitDef lowered_circuit() const;
};

struct ElaborationResult {
    std::shared_ptr<const ElaboratedCircuit> circuit;  // null on errors
    DiagnosticList diags;
    bool ok() const { return circuit != nullptr; }
};

ElaborationResult elaborate(std::shared_ptr<const CircuitDef> circuit);

FsmLowering lower_fsm(const Stmt& fsm);

// Port inference for Sexpir-origin circuits (zero declared ports): a signal
// with no driver becomes an input, a driven signal never read by another
// statement becomes an output, driven-and-read stays internal. Explicit
// overrides win.
struct PortPartition {
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;
    std::vector<std::string> internals;
};

struct PortOverride {
    std::string name;
    PortDirection direction;
};

PortPartition infer_ports(const CircuitDef& circuit,
                          const std::vector<PortOverride>& overrides,
                          DiagnosticList& diags);

// Applies a partition: listed signals become ports, the rest stay wires.
CircuitDef apply_ports(const CircuitDef& circuit, const PortPartition& p);

// Parses a port-override sidecar: lines "input <name>" / "output <name>".
std::vector<PortOverride> parse_port_overrides(const std::string& text,
                                               DiagnosticList& diags);

// Elaboration-time constant value: integer, array or record aggregate.
struct ConstValue {
    enum class Kind { Int, Array, Record };
    Kind kind = Kind::Int;
    std::uint64_t value = 0;
    std::vector<ConstValue> elements;       // Array
    std::vector<std::string> field_names;   // Record
    std::vector<ConstValue> fields;         // Record

    bool operator==(const ConstValue&) const = default;
};

// Evaluates index/field chains over the constant aggregate assignments
// recorded in `circuit`. Fails with a not-constant diagnostic when the
// expression depends on anything non-constant.
std::optional<ConstValue> const_eval(const Expr& expr, const CircuitDef& circuit,
                                     DiagnosticList& diags);

DependencyGraph build_dep_graph(const ElaboratedCircuit& elab);

}  // namespace rtlforge
