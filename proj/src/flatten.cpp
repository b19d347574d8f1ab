#include "rtlforge/flatten.hpp"

#include <functional>

namespace rtlforge {

namespace {

Expr rename_expr(const Expr& e, const std::string& prefix) {
    Expr out = e;
    if (e.kind == ExprKind::Ref) {
        out.name = prefix + e.name;
    } else if (e.kind == ExprKind::PortRef) {
        // inst.port under prefix p becomes a plain ref "p + inst__port".
        out = Expr::ref(prefix + e.name + "__" + e.port);
    }
    for (std::size_t i = 0; i < e.args.size(); ++i)
        out.args[i] = rename_expr(e.args[i], prefix);
    return out;
}

Stmt rename_stmt(const Stmt& s, const std::string& prefix) {
    Stmt out = s;
    out.lhs = rename_expr(s.lhs, prefix);
    out.rhs = rename_expr(s.rhs, prefix);
    for (auto& b : out.body) b = rename_stmt(b, prefix);
    for (auto& b : out.else_body) b = rename_stmt(b, prefix);
    for (auto& arm : out.arm_bodies)
        for (auto& b : arm) b = rename_stmt(b, prefix);
    for (auto& b : out.default_body) b = rename_stmt(b, prefix);
    return out;
}

void flatten_into(const ElaboratedCircuit& elab, const std::string& prefix,
                  bool as_child, CircuitDef& out) {
    auto resolved = [&](const TypeDesc& t) {
        auto r = resolve_type(t, *elab.source);
        return r ? *r : t;
    };

    for (const auto& p : elab.source->ports) {
        if (as_child)
            out.wires.push_back({prefix + p.name, resolved(p.type)});
        else
            out.ports.push_back({p.name, p.direction, resolved(p.type)});
    }
    for (const auto& w : elab.source->wires)
        out.wires.push_back({prefix + w.name, resolved(w.type)});
    for (const auto& f : elab.fsms) {
        auto it = elab.symbols.find(f.state_reg);
        out.wires.push_back({prefix + f.state_reg, it->second});
    }

    for (const auto& s : elab.lowered) {
        Stmt flat = rename_stmt(s, prefix);
        if (as_child && flat.has_label) flat.label = prefix + flat.label;
        out.statements.push_back(std::move(flat));
    }

    for (const auto& inst : elab.source->instances) {
        const ElaboratedCircuit* ce = elab.child_elab(inst.name);
        if (!ce) continue;
        flatten_into(*ce, prefix + inst.name + "__", true, out);
    }
}

}  // namespace

CircuitDef flatten(const ElaboratedCircuit& elab) {
    CircuitDef out;
    out.name = elab.source->name;
    flatten_into(elab, "", false, out);
    return out;
}

}  // namespace rtlforge
