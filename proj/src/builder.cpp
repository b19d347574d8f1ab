#include "rtlforge/builder.hpp"

#include <algorithm>

#include "rtlforge/typesys.hpp"

namespace rtlforge {

namespace {

// Root signal of an assign target: strips Index/Field chains.
const Expr* target_root(const Expr& lhs) {
    const Expr* e = &lhs;
    while (e->kind == ExprKind::Index || e->kind == ExprKind::Field)
        e = &e->args[0];
    if (e->kind == ExprKind::Ref || e->kind == ExprKind::PortRef) return e;
    return nullptr;
}

bool type_contains_ruint(const TypeDesc& t) {
    if (t.kind == TypeKind::RUInt) return true;
    for (const auto& f : t.field_types)
        if (type_contains_ruint(f)) return true;
    for (const auto& el : t.element)
        if (type_contains_ruint(el)) return true;
    return false;
}

bool type_widths_valid(const TypeDesc& t) {
    switch (t.kind) {
    case TypeKind::BitVector:
    case TypeKind::Unsigned:
    case TypeKind::Signed:
    case TypeKind::RUInt:
        return t.width >= 1;
    case TypeKind::Record:
        return std::all_of(t.field_types.begin(), t.field_types.end(),
                           type_widths_valid);
    case TypeKind::Array:
        return t.length >= 1 && type_widths_valid(t.element[0]);
    default:
        return true;
    }
}

void collect_alias_names(const TypeDesc& t, std::vector<std::string>& out) {
    if (t.kind == TypeKind::Alias) out.push_back(t.alias_name);
    for (const auto& f : t.field_types) collect_alias_names(f, out);
    for (const auto& el : t.element) collect_alias_names(el, out);
}

}  // namespace

CircuitBuilder::CircuitBuilder(std::string name) { circuit_.name = std::move(name); }

std::string CircuitBuilder::loc(const std::string& detail) const {
    return detail.empty() ? circuit_.name : circuit_.name + "." + detail;
}

bool CircuitBuilder::name_free(const std::string& name, const std::string& what) {
    if (circuit_.find_port(name) || circuit_.find_wire(name) ||
        circuit_.find_instance(name)) {
        diags_.error("duplicate-name", loc(name),
                     what + " '" + name + "' conflicts with an existing declaration");
        return false;
    }
    return true;
}

bool CircuitBuilder::resolve_type(const std::string& type_name, TypeDesc& out) {
    if (auto b = builtin_type(type_name)) {
        out = *b;
        return true;
    }
    if (circuit_.find_typedef(type_name)) {
        out = TypeDesc::alias(type_name);
        return true;
    }
    diags_.error("unresolved-type", loc(type_name),
                 "unknown type name '" + type_name + "'");
    return false;
}

void CircuitBuilder::declare_port(const std::string& name, PortDirection dir,
                                  const TypeDesc& type) {
    if (!name_free(name, "port")) return;
    if (type_contains_ruint(type)) {
        diags_.error("structural", loc(name),
                     "ruint is a literal-only type and cannot be declared");
        return;
    }
    if (!type_widths_valid(type)) {
        diags_.error("structural", loc(name), "type widths/lengths must be >= 1");
        return;
    }
    circuit_.ports.push_back({name, dir, type});
}

void CircuitBuilder::input(const std::string& name) {
    declare_port(name, PortDirection::Input, TypeDesc::bit());
}
void CircuitBuilder::input(const std::string& name, const TypeDesc& type) {
    declare_port(name, PortDirection::Input, type);
}
void CircuitBuilder::input(const std::string& name, const std::string& type_name) {
    TypeDesc t;
    if (resolve_type(type_name, t)) declare_port(name, PortDirection::Input, t);
}
void CircuitBuilder::output(const std::string& name) {
    declare_port(name, PortDirection::Output, TypeDesc::bit());
}
void CircuitBuilder::output(const std::string& name, const TypeDesc& type) {
    declare_port(name, PortDirection::Output, type);
}
void CircuitBuilder::output(const std::string& name, const std::string& type_name) {
    TypeDesc t;
    if (resolve_type(type_name, t)) declare_port(name, PortDirection::Output, t);
}

void CircuitBuilder::wire(const std::string& name, const TypeDesc& type) {
    if (!name_free(name, "wire")) return;
    if (type_contains_ruint(type)) {
        diags_.error("structural", loc(name),
                     "ruint is a literal-only type and cannot be declared");
        return;
    }
    if (!type_widths_valid(type)) {
        diags_.error("structural", loc(name), "type widths/lengths must be >= 1");
        return;
    }
    std::vector<std::string> aliases;
    collect_alias_names(type, aliases);
    for (const auto& a : aliases) {
        if (!builtin_type(a) && !circuit_.find_typedef(a)) {
            diags_.error("unresolved-type", loc(name),
                         "unknown type name '" + a + "'");
            return;
        }
    }
    circuit_.wires.push_back({name, type});
}

void CircuitBuilder::wire(const std::string& name, const std::string& type_name) {
    TypeDesc t;
    if (resolve_type(type_name, t)) wire(name, t);
}

void CircuitBuilder::typedef_(const std::string& name, const TypeDesc& desc) {
    if (circuit_.find_typedef(name)) {
        diags_.error("duplicate-name", loc(name),
                     "typedef '" + name + "' already declared");
        return;
    }
    if (type_contains_ruint(desc)) {
        diags_.error("structural", loc(name),
                     "ruint is a literal-only type and cannot be declared");
        return;
    }
    if (!type_widths_valid(desc)) {
        diags_.error("structural", loc(name), "type widths/lengths must be >= 1");
        return;
    }
    std::vector<std::string> aliases;
    collect_alias_names(desc, aliases);
    for (const auto& a : aliases) {
        if (a == name) {
            diags_.error("cycle", loc(name),
                         "typedef '" + name + "' refers to itself");
            return;
        }
        if (!builtin_type(a) && !circuit_.find_typedef(a)) {
            diags_.error("unresolved-type", loc(name),
                         "typedef '" + name + "' uses undeclared type '" + a + "'");
            return;
        }
    }
    circuit_.typedef_names.push_back(name);
    circuit_.typedef_types.push_back(desc);
}

void CircuitBuilder::component(const std::string& name,
                               std::shared_ptr<const CircuitDef> child) {
    if (!name_free(name, "instance")) return;
    if (!child) {
        diags_.error("structural", loc(name), "null child circuit");
        return;
    }
    circuit_.instances.push_back({name, std::move(child)});
}

const TypeDesc* CircuitBuilder::type_of(const std::string& name) const {
    if (const auto* p = circuit_.find_port(name)) return &p->type;
    if (const auto* w = circuit_.find_wire(name)) return &w->type;
    return nullptr;
}

bool CircuitBuilder::in_process_context() const {
    for (const auto& f : stack_) {
        if (f.frame == Frame::Sequential || f.frame == Frame::Comb ||
            f.frame == Frame::Fsm || f.frame == Frame::State)
            return true;
    }
    return false;
}

bool CircuitBuilder::in_fsm_state() const {
    for (const auto& f : stack_)
        if (f.frame == Frame::State) return true;
    return false;
}

std::vector<Stmt>* CircuitBuilder::current_list() {
    if (stack_.empty()) return &circuit_.statements;
    return &stack_.back().stmt.body;
}

void CircuitBuilder::append(Stmt s) { current_list()->push_back(std::move(s)); }

void CircuitBuilder::assign(Expr lhs, Expr rhs) {
    // Name resolution on both sides; construction-time references must be
    // already declared.
    auto check_refs = [&](const Expr& e, auto&& self) -> bool {
        if (e.kind == ExprKind::Ref) {
            if (!circuit_.find_port(e.name) && !circuit_.find_wire(e.name)) {
                diags_.error("unknown-name", loc(e.name),
                             "reference to undeclared signal '" + e.name + "'");
                return false;
            }
        } else if (e.kind == ExprKind::PortRef) {
            const auto* inst = circuit_.find_instance(e.name);
            if (!inst) {
                diags_.error("unknown-name", loc(e.name),
                             "reference to undeclared instance '" + e.name + "'");
                return false;
            }
            if (!inst->child->find_port(e.port)) {
                diags_.error("unknown-name", loc(e.name + "." + e.port),
                             "instance '" + e.name + "' has no port '" + e.port + "'");
                return false;
            }
        }
        for (const auto& a : e.args)
            if (!self(a, self)) return false;
        return true;
    };
    if (!check_refs(lhs, check_refs) || !check_refs(rhs, check_refs)) return;

    const Expr* root = target_root(lhs);
    if (!root) {
        diags_.error("illegal-target", loc(),
                     "assign target must be a signal, instance port, index or field");
        return;
    }
    if (root->kind == ExprKind::Ref) {
        const auto* p = circuit_.find_port(root->name);
        if (p && p->direction == PortDirection::Input) {
            diags_.error("illegal-target", loc(root->name),
                         "input port '" + root->name + "' cannot be driven");
            return;
        }
    } else {  // PortRef target: only child inputs are drivable
        const auto* inst = circuit_.find_instance(root->name);
        const auto* p = inst->child->find_port(root->port);
        if (p->direction == PortDirection::Output) {
            diags_.error("illegal-target", loc(root->name + "." + root->port),
                         "output port of child instance cannot be driven");
            return;
        }
    }

    Stmt s;
    s.kind = StmtKind::Assign;
    s.assign_kind =
        in_process_context() ? AssignKind::Embedded : AssignKind::Continuous;
    s.lhs = std::move(lhs);
    s.rhs = std::move(rhs);
    append(std::move(s));
}

void CircuitBuilder::comb_assign(Expr lhs, Expr rhs) {
    if (!in_fsm_state()) {
        diags_.error("structural", loc(),
                     "comb_assign is only allowed inside an fsm state");
        return;
    }
    assign(std::move(lhs), std::move(rhs));
    auto* list = current_list();
    if (!list->empty() && list->back().kind == StmtKind::Assign)
        list->back().assign_kind = AssignKind::Comb;
}

void CircuitBuilder::next_state(const std::string& target) {
    if (!in_fsm_state()) {
        diags_.error("structural", loc(),
                     "next_state is only allowed inside an fsm state");
        return;
    }
    Stmt s;
    s.kind = StmtKind::NextState;
    s.label = target;
    append(std::move(s));
}

void CircuitBuilder::begin_if(Expr cond) {
    OpenBlock b;
    b.frame = Frame::If;
    b.stmt.kind = StmtKind::If;
    b.stmt.rhs = std::move(cond);
    stack_.push_back(std::move(b));
}

void CircuitBuilder::begin_else() {
    auto* list = current_list();
    if (list->empty() || list->back().kind != StmtKind::If ||
        list->back().has_else) {
        diags_.error("dangling-else", loc(),
                     "Else without an immediately preceding If");
        // Open a throwaway frame so a matching end_block stays balanced.
        OpenBlock b;
        b.frame = Frame::Else;
        b.stmt.kind = StmtKind::If;
        b.stmt.label = "<dangling>";
        stack_.push_back(std::move(b));
        return;
    }
    OpenBlock b;
    b.frame = Frame::Else;
    b.stmt.kind = StmtKind::If;
    stack_.push_back(std::move(b));
}

void CircuitBuilder::begin_case(Expr selector) {
    OpenBlock b;
    b.frame = Frame::Case;
    b.stmt.kind = StmtKind::Case;
    b.stmt.rhs = std::move(selector);
    stack_.push_back(std::move(b));
}

void CircuitBuilder::begin_when(std::uint64_t value) {
    if (stack_.empty() || stack_.back().frame != Frame::Case) {
        diags_.error("structural", loc(), "when outside of a case");
        return;
    }
    OpenBlock b;
    b.frame = Frame::When;
    b.when_value = value;
    stack_.push_back(std::move(b));
}

void CircuitBuilder::begin_default() {
    if (stack_.empty() || stack_.back().frame != Frame::Case) {
        diags_.error("structural", loc(), "default outside of a case");
        return;
    }
    OpenBlock b;
    b.frame = Frame::Default;
    stack_.push_back(std::move(b));
}

void CircuitBuilder::begin_sequential(const std::string& label) {
    OpenBlock b;
    b.frame = Frame::Sequential;
    b.stmt.kind = StmtKind::Sequential;
    b.stmt.label = label;
    b.stmt.has_label = true;
    if (!stack_.empty()) {
        diags_.error("structural", loc(label),
                     "sequential blocks may only appear at circuit top level");
        b.stmt.label = "<dropped>";
    }
    stack_.push_back(std::move(b));
}

void CircuitBuilder::begin_combinatorial() {
    OpenBlock b;
    b.frame = Frame::Comb;
    b.stmt.kind = StmtKind::Combinatorial;
    if (!stack_.empty()) {
        diags_.error("structural", loc(),
                     "combinatorial blocks may only appear at circuit top level");
        b.stmt.label = "<dropped>";
        b.stmt.has_label = true;
    }
    stack_.push_back(std::move(b));
}

void CircuitBuilder::begin_combinatorial(const std::string& label) {
    begin_combinatorial();
    if (stack_.back().stmt.label.empty()) {
        stack_.back().stmt.label = label;
        stack_.back().stmt.has_label = true;
    }
}

void CircuitBuilder::begin_fsm(const std::string& label) {
    OpenBlock b;
    b.frame = Frame::Fsm;
    b.stmt.kind = StmtKind::Fsm;
    b.stmt.label = label;
    b.stmt.has_label = true;
    if (!stack_.empty()) {
        diags_.error("structural", loc(label),
                     "fsm blocks may only appear at circuit top level");
        b.stmt.label = "<dropped>";
    }
    stack_.push_back(std::move(b));
}

void CircuitBuilder::begin_state(const std::string& name) {
    if (stack_.empty() || stack_.back().frame != Frame::Fsm) {
        diags_.error("structural", loc(name), "state outside of an fsm");
        return;
    }
    const auto& names = stack_.back().stmt.state_names;
    if (std::find(names.begin(), names.end(), name) != names.end()) {
        diags_.error("duplicate-name", loc(name),
                     "state '" + name + "' already declared in this fsm");
    }
    OpenBlock b;
    b.frame = Frame::State;
    b.stmt.label = name;
    stack_.push_back(std::move(b));
}

void CircuitBuilder::end_block() {
    if (stack_.empty()) {
        diags_.error("structural", loc(), "end_block with no open block");
        return;
    }
    OpenBlock b = std::move(stack_.back());
    stack_.pop_back();
    const bool dropped = b.stmt.label == "<dropped>";
    const bool dangling = b.stmt.label == "<dangling>";

    switch (b.frame) {
    case Frame::If:
        append(std::move(b.stmt));
        break;
    case Frame::Else: {
        if (dangling) break;
        auto* list = current_list();
        list->back().has_else = true;
        list->back().else_body = std::move(b.stmt.body);
        break;
    }
    case Frame::When: {
        auto& cs = stack_.back().stmt;
        if (std::find(cs.arm_values.begin(), cs.arm_values.end(), b.when_value) !=
            cs.arm_values.end()) {
            diags_.error("duplicate-arm", loc(),
                         "duplicate case arm constant " + std::to_string(b.when_value));
            break;
        }
        cs.arm_values.push_back(b.when_value);
        cs.arm_bodies.push_back(std::move(b.stmt.body));
        break;
    }
    case Frame::Default: {
        auto& cs = stack_.back().stmt;
        if (cs.has_default) {
            diags_.error("structural", loc(), "case has two default arms");
            break;
        }
        cs.has_default = true;
        cs.default_body = std::move(b.stmt.body);
        break;
    }
    case Frame::Case: {
        // Arm constants must be representable in the selector width when the
        // selector's type is known at construction time.
        if (auto st = selector_width(b.stmt.rhs)) {
            for (auto v : b.stmt.arm_values) {
                if (literal_width(v) > *st) {
                    diags_.error("width", loc(),
                                 "case arm constant " + std::to_string(v) +
                                     " needs " + std::to_string(literal_width(v)) +
                                     " bits but selector has " + std::to_string(*st));
                }
            }
        }
        append(std::move(b.stmt));
        break;
    }
    case Frame::Sequential:
    case Frame::Comb:
        if (b.stmt.body.empty())
            diags_.warning("empty-body", loc(b.stmt.label),
                           "empty process body");
        if (!dropped) append(std::move(b.stmt));
        break;
    case Frame::State: {
        if (stack_.empty() || stack_.back().frame != Frame::Fsm) break;
        if (b.stmt.body.empty())
            diags_.warning("empty-body", loc(b.stmt.label), "empty state body");
        auto& fsm = stack_.back().stmt;
        fsm.state_names.push_back(b.stmt.label);
        fsm.state_bodies.push_back(std::move(b.stmt.body));
        break;
    }
    case Frame::Fsm: {
        if (b.stmt.state_names.empty()) {
            diags_.error("structural", loc(b.stmt.label),
                         "fsm must declare at least one state");
            break;
        }
        // Statements added before the first state are the per-cycle defaults;
        // they were accumulated in `body`.
        for (const auto& d : b.stmt.body) {
            if (d.kind != StmtKind::Assign) {
                diags_.error("structural", loc(b.stmt.label),
                             "fsm defaults must be plain assignments");
            }
        }
        // Every next_state target must name a declared state.
        auto check_targets = [&](const std::vector<Stmt>& body,
                                 auto&& self) -> void {
            for (const auto& s : body) {
                if (s.kind == StmtKind::NextState) {
                    const auto& names = b.stmt.state_names;
                    if (std::find(names.begin(), names.end(), s.label) ==
                        names.end()) {
                        diags_.error("unknown-name", loc(b.stmt.label),
                                     "next_state target '" + s.label +
                                         "' is not a declared state");
                    }
                }
                self(s.body, self);
                self(s.else_body, self);
                for (const auto& arm : s.arm_bodies) self(arm, self);
                self(s.default_body, self);
            }
        };
        for (const auto& sb : b.stmt.state_bodies) check_targets(sb, check_targets);
        if (!dropped) append(std::move(b.stmt));
        break;
    }
    }
}

std::optional<int> CircuitBuilder::selector_width(const Expr& sel) const {
    const Expr* e = &sel;
    if (e->kind != ExprKind::Ref) return std::nullopt;
    const TypeDesc* t = type_of(e->name);
    if (!t) return std::nullopt;
    auto resolved = rtlforge::resolve_type(*t, circuit_);
    if (!resolved) return std::nullopt;
    return width_of(*resolved);
}

void CircuitBuilder::add_if(Expr cond, std::vector<Stmt> then_body) {
    Stmt s;
    s.kind = StmtKind::If;
    s.rhs = std::move(cond);
    s.body = std::move(then_body);
    append(std::move(s));
}

void CircuitBuilder::add_if(Expr cond, std::vector<Stmt> then_body,
                            std::vector<Stmt> else_body) {
    Stmt s;
    s.kind = StmtKind::If;
    s.rhs = std::move(cond);
    s.body = std::move(then_body);
    s.else_body = std::move(else_body);
    s.has_else = true;
    append(std::move(s));
}

std::shared_ptr<const CircuitDef> CircuitBuilder::finish() {
    if (!stack_.empty()) {
        diags_.error("structural", loc(),
                     std::to_string(stack_.size()) + " block(s) left open");
        stack_.clear();
    }
    finished_ = true;
    if (diags_.has_errors()) return nullptr;
    return std::make_shared<CircuitDef>(std::move(circuit_));
}

}  // namespace rtlforge
