#include "rtlforge/elaborate.hpp"

#include <algorithm>
#include <bit>
#include <set>
#include <sstream>

namespace rtlforge {

namespace {

std::string portref_name(const Expr& e) { return e.name + "." + e.port; }

// Root signal of an assign target; "" when malformed.
std::string target_root(const Expr& lhs) {
    const Expr* e = &lhs;
    while (e->kind == ExprKind::Index || e->kind == ExprKind::Field)
        e = &e->args[0];
    if (e->kind == ExprKind::Ref) return e->name;
    if (e->kind == ExprKind::PortRef) return portref_name(*e);
    return "";
}

void collect_signals(const Expr& e, std::vector<std::string>& out) {
    if (e.kind == ExprKind::Ref) out.push_back(e.name);
    else if (e.kind == ExprKind::PortRef) out.push_back(portref_name(e));
    for (const auto& a : e.args) collect_signals(a, out);
}

// Element key of an assign target: constant index/field path, or the bare
// root when any index is non-constant (treated as driving the whole signal).
struct TargetKey {
    std::string root;
    std::string elem;  // "" = whole signal
};

TargetKey target_key(const Expr& lhs) {
    std::vector<std::string> path;
    const Expr* e = &lhs;
    bool whole = false;
    while (true) {
        if (e->kind == ExprKind::Index) {
            if (e->args[1].kind == ExprKind::Lit)
                path.push_back("[" + std::to_string(e->args[1].value) + "]");
            else
                whole = true;
            e = &e->args[0];
        } else if (e->kind == ExprKind::Field) {
            path.push_back("." + e->name);
            e = &e->args[0];
        } else {
            break;
        }
    }
    TargetKey k;
    k.root = target_root(lhs);
    if (!whole) {
        std::reverse(path.begin(), path.end());
        for (const auto& p : path) k.elem += p;
    }
    return k;
}

int ceil_log2(std::size_t n) {
    if (n <= 2) return 1;
    return std::bit_width(n - 1);
}

// Splits an FSM state body into the synchronous part and the comb_assign
// part; NextState becomes an assignment to the state register.
struct StateSplit {
    std::vector<Stmt> sync;
    std::vector<Stmt> comb;
};

StateSplit split_state_body(const std::vector<Stmt>& body,
                            const std::string& state_reg,
                            const std::vector<std::string>& states) {
    StateSplit out;
    for (const auto& s : body) {
        switch (s.kind) {
        case StmtKind::Assign: {
            Stmt c = s;
            c.assign_kind = AssignKind::Embedded;
            if (s.assign_kind == AssignKind::Comb)
                out.comb.push_back(std::move(c));
            else
                out.sync.push_back(std::move(c));
            break;
        }
        case StmtKind::NextState: {
            auto it = std::find(states.begin(), states.end(), s.label);
            Stmt a;
            a.kind = StmtKind::Assign;
            a.assign_kind = AssignKind::Embedded;
            a.lhs = Expr::ref(state_reg);
            a.rhs = Expr::lit(static_cast<std::uint64_t>(it - states.begin()));
            out.sync.push_back(std::move(a));
            break;
        }
        case StmtKind::If: {
            StateSplit then_s = split_state_body(s.body, state_reg, states);
            StateSplit else_s = split_state_body(s.else_body, state_reg, states);
            if (!then_s.sync.empty() || !else_s.sync.empty()) {
                Stmt i = s;
                i.body = std::move(then_s.sync);
                i.else_body = std::move(else_s.sync);
                i.has_else = s.has_else && !i.else_body.empty();
                out.sync.push_back(std::move(i));
            }
            if (!then_s.comb.empty() || !else_s.comb.empty()) {
                Stmt i = s;
                i.body = std::move(then_s.comb);
                i.else_body = std::move(else_s.comb);
                i.has_else = s.has_else && !i.else_body.empty();
                out.comb.push_back(std::move(i));
            }
            break;
        }
        case StmtKind::Case: {
            Stmt sync_c = s;
            Stmt comb_c = s;
            bool any_sync = false, any_comb = false;
            for (std::size_t i = 0; i < s.arm_bodies.size(); ++i) {
                StateSplit arm = split_state_body(s.arm_bodies[i], state_reg, states);
                any_sync |= !arm.sync.empty();
                any_comb |= !arm.comb.empty();
                sync_c.arm_bodies[i] = std::move(arm.sync);
                comb_c.arm_bodies[i] = std::move(arm.comb);
            }
            StateSplit def = split_state_body(s.default_body, state_reg, states);
            any_sync |= !def.sync.empty();
            any_comb |= !def.comb.empty();
            sync_c.default_body = std::move(def.sync);
            comb_c.default_body = std::move(def.comb);
            if (any_sync) out.sync.push_back(std::move(sync_c));
            if (any_comb) out.comb.push_back(std::move(comb_c));
            break;
        }
        default:
            break;  // nested processes are rejected at construction
        }
    }
    return out;
}

}  // namespace

FsmLowering lower_fsm(const Stmt& fsm) {
    FsmLowering out;
    out.info.label = fsm.label;
    out.info.state_reg = fsm.label + "_state";
    out.info.states = fsm.state_names;

    const int reg_width = ceil_log2(fsm.state_names.size());
    out.state_reg = WireDecl{out.info.state_reg, TypeDesc::uint_t(reg_width)};

    Stmt seq;
    seq.kind = StmtKind::Sequential;
    seq.label = fsm.label;
    seq.has_label = true;
    for (const auto& d : fsm.body) {  // per-cycle synchronous defaults
        Stmt a = d;
        a.assign_kind = AssignKind::Embedded;
        seq.body.push_back(std::move(a));
    }

    Stmt sync_case;
    sync_case.kind = StmtKind::Case;
    sync_case.rhs = Expr::ref(out.info.state_reg);
    Stmt comb_case = sync_case;
    bool any_comb = false;
    for (std::size_t i = 0; i < fsm.state_names.size(); ++i) {
        StateSplit split = split_state_body(fsm.state_bodies[i],
                                            out.info.state_reg, fsm.state_names);
        any_comb |= !split.comb.empty();
        sync_case.arm_values.push_back(i);
        sync_case.arm_bodies.push_back(std::move(split.sync));
        comb_case.arm_values.push_back(i);
        comb_case.arm_bodies.push_back(std::move(split.comb));
    }
    seq.body.push_back(std::move(sync_case));
    out.sequential = std::move(seq);

    if (any_comb) {
        Stmt comb;
        comb.kind = StmtKind::Combinatorial;
        comb.label = fsm.label + "_comb";
        comb.has_label = true;
        comb.body.push_back(std::move(comb_case));
        out.comb = std::move(comb);
    }
    return out;
}

// ---------------------------------------------------------------------------
// DependencyGraph

int DependencyGraph::node_index(const std::string& name) const {
    auto it = std::find(nodes.begin(), nodes.end(), name);
    return it == nodes.end() ? -1 : static_cast<int>(it - nodes.begin());
}

bool DependencyGraph::has_edge(const std::string& from, const std::string& to) const {
    int f = node_index(from), t = node_index(to);
    for (const auto& e : edges)
        if (e.from == f && e.to == t) return true;
    return false;
}

bool DependencyGraph::has_edge(const std::string& from, const std::string& to,
                               bool registered) const {
    int f = node_index(from), t = node_index(to);
    for (const auto& e : edges)
        if (e.from == f && e.to == t && e.registered == registered) return true;
    return false;
}

std::vector<std::string> DependencyGraph::find_comb_cycle() const {
    const int n = static_cast<int>(nodes.size());
    std::vector<std::vector<int>> adj(n);
    for (const auto& e : edges)
        if (!e.registered) adj[e.from].push_back(e.to);

    std::vector<int> color(n, 0);  // 0 white, 1 grey, 2 black
    std::vector<int> parent(n, -1);
    // Iterative DFS; returns the grey cycle when a back edge is found.
    for (int start = 0; start < n; ++start) {
        if (color[start] != 0) continue;
        std::vector<std::pair<int, std::size_t>> stack{{start, 0}};
        color[start] = 1;
        while (!stack.empty()) {
            auto& [u, idx] = stack.back();
            if (idx < adj[u].size()) {
                int v = adj[u][idx++];
                if (color[v] == 0) {
                    color[v] = 1;
                    parent[v] = u;
                    stack.push_back({v, 0});
                } else if (color[v] == 1) {
                    std::vector<std::string> cycle{nodes[v]};
                    for (int w = u; w != v && w != -1; w = parent[w])
                        cycle.push_back(nodes[w]);
                    std::reverse(cycle.begin() + 1, cycle.end());
                    return cycle;
                }
            } else {
                color[u] = 2;
                stack.pop_back();
            }
        }
    }
    return {};
}

std::vector<int> DependencyGraph::comb_topo_order() const {
    const int n = static_cast<int>(nodes.size());
    std::vector<std::vector<int>> adj(n);
    std::vector<int> indeg(n, 0);
    for (const auto& e : edges) {
        if (e.registered) continue;
        adj[e.from].push_back(e.to);
        ++indeg[e.to];
    }
    std::vector<int> order;
    std::vector<int> queue;
    for (int i = 0; i < n; ++i)
        if (indeg[i] == 0) queue.push_back(i);
    while (!queue.empty()) {
        int u = queue.front();
        queue.erase(queue.begin());
        order.push_back(u);
        for (int v : adj[u])
            if (--indeg[v] == 0) queue.push_back(v);
    }
    return order;
}

// ---------------------------------------------------------------------------
// ElaboratedCircuit

std::optional<TypeDesc> ElaboratedCircuit::type_of(const std::string& name) const {
    auto it = symbols.find(name);
    if (it != symbols.end()) return it->second;
    auto dot = name.find('.');
    if (dot != std::string::npos) {
        const auto* inst = source->find_instance(name.substr(0, dot));
        if (inst) {
            const auto* p = inst->child->find_port(name.substr(dot + 1));
            if (p) return resolve_type(p->type, *inst->child);
        }
    }
    return std::nullopt;
}

bool ElaboratedCircuit::is_state_reg(const std::string& name) const {
    return fsm_of_reg(name) != nullptr;
}

const FsmInfo* ElaboratedCircuit::fsm_of_reg(const std::string& name) const {
    for (const auto& f : fsms)
        if (f.state_reg == name) return &f;
    return nullptr;
}

const ElaboratedCircuit* ElaboratedCircuit::child_elab(
    const std::string& instance) const {
    const auto* inst = source->find_instance(instance);
    if (!inst) return nullptr;
    for (std::size_t i = 0; i < unique_children.size(); ++i)
        if (*unique_children[i] == *inst->child) return child_elabs[i].get();
    return nullptr;
}

CircuitDef ElaboratedCircuit::lowered_circuit() const {
    CircuitDef c;
    c.name = source->name;
    c.typedef_names = source->typedef_names;
    c.typedef_types = source->typedef_types;
    c.ports = source->ports;
    c.wires = source->wires;
    for (const auto& f : fsms) {
        auto t = symbols.find(f.state_reg);
        c.wires.push_back({f.state_reg, t->second});
    }
    c.instances = source->instances;
    c.statements = lowered;
    return c;
}

// ---------------------------------------------------------------------------
// elaborate

namespace {

class Elaborator {
public:
    Elaborator(std::shared_ptr<const CircuitDef> circuit, DiagnosticList& diags)
        : src_(std::move(circuit)), diags_(diags) {}

    std::shared_ptr<const ElaboratedCircuit> run() {
        elab_ = std::make_shared<ElaboratedCircuit>();
        elab_->source = src_;
        elab_->ports = src_->ports;
        build_symbols();
        collect_children();
        lower_statements();
        check_drive_rules();
        type_check();
        elab_->graph = build_graph();
        check_comb_cycles();
        elab_->has_registers = !elab_->registered.empty();
        for (const auto& ce : elab_->child_elabs)
            if (ce && ce->has_registers) elab_->has_registers = true;
        if (diags_.has_errors()) return nullptr;
        return elab_;
    }

private:
    std::string loc(const std::string& detail) const {
        return detail.empty() ? src_->name : src_->name + "." + detail;
    }

    void build_symbols() {
        for (const auto& p : src_->ports) {
            auto r = resolve_type(p.type, *src_);
            if (!r)
                diags_.error("unresolved-type", loc(p.name),
                             "cannot resolve type of port '" + p.name + "'");
            else
                elab_->symbols[p.name] = *r;
        }
        for (const auto& w : src_->wires) {
            auto r = resolve_type(w.type, *src_);
            if (!r)
                diags_.error("unresolved-type", loc(w.name),
                             "cannot resolve type of wire '" + w.name + "'");
            else
                elab_->symbols[w.name] = *r;
        }
    }

    void collect_children() {
        for (const auto& inst : src_->instances) {
            bool known = false;
            for (const auto& u : elab_->unique_children)
                if (*u == *inst.child) { known = true; break; }
            if (!known) elab_->unique_children.push_back(inst.child);
        }
        for (const auto& u : elab_->unique_children) {
            auto sub = elaborate(u);
            for (const auto& d : sub.diags.items()) {
                Diagnostic copy = d;
                copy.where = loc("") + "/" + copy.where;
                if (d.severity == Severity::Error)
                    diags_.error(copy.rule, copy.where, copy.message);
                else
                    diags_.warning(copy.rule, copy.where, copy.message);
            }
            elab_->child_elabs.push_back(sub.circuit);
        }
    }

    void lower_statements() {
        for (const auto& s : src_->statements) {
            if (s.kind != StmtKind::Fsm) {
                elab_->lowered.push_back(s);
                continue;
            }
            FsmLowering lf = lower_fsm(s);
            if (elab_->symbols.count(lf.info.state_reg)) {
                diags_.error("duplicate-name", loc(lf.info.state_reg),
                             "state register name collides with a declared signal");
                continue;
            }
            elab_->symbols[lf.info.state_reg] = lf.state_reg.type;
            elab_->fsms.push_back(lf.info);
            elab_->lowered.push_back(std::move(lf.sequential));
            if (lf.comb) elab_->lowered.push_back(std::move(*lf.comb));
        }
        // Registered signals: everything assigned under a sequential block.
        for (const auto& s : elab_->lowered) {
            if (s.kind != StmtKind::Sequential) continue;
            std::vector<std::string> targets;
            collect_targets(s.body, targets);
            for (const auto& t : targets) {
                if (std::find(elab_->registered.begin(), elab_->registered.end(),
                              t) == elab_->registered.end())
                    elab_->registered.push_back(t);
            }
        }
    }

    static void collect_targets(const std::vector<Stmt>& body,
                                std::vector<std::string>& out) {
        for (const auto& s : body) {
            if (s.kind == StmtKind::Assign) out.push_back(target_root(s.lhs));
            collect_targets(s.body, out);
            collect_targets(s.else_body, out);
            for (const auto& a : s.arm_bodies) collect_targets(a, out);
            collect_targets(s.default_body, out);
        }
    }

    void check_drive_rules() {
        struct Drive {
            int context;
            std::string elem;
        };
        std::map<std::string, std::vector<Drive>> drives;
        std::set<std::string> reported;
        int context = 0;
        auto record = [&](const Stmt& assign) {
            TargetKey k = target_key(assign.lhs);
            if (k.root.empty()) return;
            auto& v = drives[k.root];
            for (const auto& d : v) {
                bool overlap = d.elem.empty() || k.elem.empty() || d.elem == k.elem;
                if (d.context != context && overlap && !reported.count(k.root)) {
                    diags_.error("multiple-driver", loc(k.root),
                                 "signal '" + k.root +
                                     "' is driven from more than one context");
                    reported.insert(k.root);
                }
            }
            v.push_back({context, k.elem});
        };
        auto walk = [&](const std::vector<Stmt>& body, auto&& self) -> void {
            for (const auto& s : body) {
                if (s.kind == StmtKind::Assign) record(s);
                self(s.body, self);
                self(s.else_body, self);
                for (const auto& a : s.arm_bodies) self(a, self);
                self(s.default_body, self);
            }
        };
        for (const auto& s : elab_->lowered) {
            if (s.kind == StmtKind::Assign) {
                record(s);
            } else {
                std::vector<Stmt> one{s};
                walk(one, walk);
            }
            ++context;
        }
    }

    TypeLookup make_lookup() const {
        return [this](const Expr& e) -> std::optional<TypeDesc> {
            if (e.kind == ExprKind::Ref) {
                auto it = elab_->symbols.find(e.name);
                if (it == elab_->symbols.end()) return std::nullopt;
                return it->second;
            }
            if (e.kind == ExprKind::PortRef)
                return elab_->type_of(portref_name(e));
            return std::nullopt;
        };
    }

    void type_check() {
        TypeLookup lookup = make_lookup();
        auto check_body = [&](const std::vector<Stmt>& body,
                              auto&& self) -> std::vector<Stmt> {
            std::vector<Stmt> out;
            for (const auto& s : body) {
                Stmt c = s;
                switch (s.kind) {
                case StmtKind::Assign: {
                    auto lhs_t = natural_type(s.lhs, lookup);
                    if (!lhs_t) {
                        diags_.error("unknown-name", loc(target_root(s.lhs)),
                                     "cannot type assign target '" +
                                         expr_to_string(s.lhs) + "'");
                        break;
                    }
                    auto cr = check_assign(*lhs_t, s.rhs, lookup);
                    if (!cr.ok()) {
                        Diagnostic d = *cr.diagnostic;
                        d.where = loc(target_root(s.lhs));
                        diags_.error(d.rule, d.where, d.message);
                        break;
                    }
                    c.rhs = cr.plan->rewritten;
                    break;
                }
                case StmtKind::If: {
                    auto cr = check_condition(s.rhs, lookup);
                    if (!cr.ok()) {
                        Diagnostic d = *cr.diagnostic;
                        d.where = loc("if");
                        diags_.error(d.rule, d.where, d.message);
                    } else {
                        c.rhs = cr.plan->rewritten;
                    }
                    c.body = self(s.body, self);
                    c.else_body = self(s.else_body, self);
                    break;
                }
                case StmtKind::Case: {
                    auto st = natural_type(s.rhs, lookup);
                    if (!st) {
                        diags_.error("unknown-name", loc("case"),
                                     "cannot type case selector");
                    } else {
                        int w = width_of(*st);
                        for (auto v : s.arm_values) {
                            if (literal_width(v) > w)
                                diags_.error(
                                    "width", loc("case"),
                                    "case arm constant " + std::to_string(v) +
                                        " does not fit selector width " +
                                        std::to_string(w));
                        }
                    }
                    for (auto& arm : c.arm_bodies) arm = self(arm, self);
                    c.default_body = self(s.default_body, self);
                    break;
                }
                case StmtKind::Sequential:
                case StmtKind::Combinatorial:
                    c.body = self(s.body, self);
                    break;
                default:
                    break;
                }
                out.push_back(std::move(c));
            }
            return out;
        };
        elab_->checked = check_body(elab_->lowered, check_body);
    }

    DependencyGraph build_graph() {
        DependencyGraph g;
        for (const auto& [name, t] : elab_->symbols) g.nodes.push_back(name);
        for (const auto& inst : src_->instances)
            for (const auto& p : inst.child->ports)
                g.nodes.push_back(inst.name + "." + p.name);

        auto add_edge = [&](const std::string& from, const std::string& to,
                            bool registered) {
            int f = g.node_index(from), t = g.node_index(to);
            if (f < 0 || t < 0) return;
            DependencyGraph::Edge e{f, t, registered};
            if (std::find(g.edges.begin(), g.edges.end(), e) == g.edges.end())
                g.edges.push_back(e);
        };

        std::vector<std::string> cond_stack;
        auto walk = [&](const std::vector<Stmt>& body, bool registered,
                        auto&& self) -> void {
            for (const auto& s : body) {
                switch (s.kind) {
                case StmtKind::Assign: {
                    std::string t = target_root(s.lhs);
                    std::vector<std::string> srcs;
                    collect_signals(s.rhs, srcs);
                    // index expressions on the target side are also inputs
                    const Expr* l = &s.lhs;
                    while (l->kind == ExprKind::Index || l->kind == ExprKind::Field) {
                        if (l->kind == ExprKind::Index)
                            collect_signals(l->args[1], srcs);
                        l = &l->args[0];
                    }
                    for (const auto& src : srcs) add_edge(src, t, registered);
                    for (const auto& cnd : cond_stack) add_edge(cnd, t, registered);
                    break;
                }
                case StmtKind::If: {
                    std::size_t mark = cond_stack.size();
                    collect_signals(s.rhs, cond_stack);
                    self(s.body, registered, self);
                    self(s.else_body, registered, self);
                    cond_stack.resize(mark);
                    break;
                }
                case StmtKind::Case: {
                    std::size_t mark = cond_stack.size();
                    collect_signals(s.rhs, cond_stack);
                    for (const auto& a : s.arm_bodies) self(a, registered, self);
                    self(s.default_body, registered, self);
                    cond_stack.resize(mark);
                    break;
                }
                case StmtKind::Sequential:
                    self(s.body, true, self);
                    break;
                case StmtKind::Combinatorial:
                    self(s.body, false, self);
                    break;
                default:
                    break;
                }
            }
        };
        walk(elab_->lowered, false, walk);

        // Summarize each instance's combinational input->output paths so
        // cross-hierarchy loops are caught without flattening.
        for (const auto& inst : src_->instances) {
            const ElaboratedCircuit* ce = elab_->child_elab(inst.name);
            if (!ce) continue;
            for (const auto& pi : inst.child->ports) {
                if (pi.direction != PortDirection::Input) continue;
                for (const auto& po : inst.child->ports) {
                    if (po.direction != PortDirection::Output) continue;
                    if (comb_reachable(ce->graph, pi.name, po.name))
                        add_edge(inst.name + "." + pi.name,
                                 inst.name + "." + po.name, false);
                }
            }
        }
        return g;
    }

    static bool comb_reachable(const DependencyGraph& g, const std::string& from,
                               const std::string& to) {
        int f = g.node_index(from), t = g.node_index(to);
        if (f < 0 || t < 0) return false;
        std::vector<std::vector<int>> adj(g.nodes.size());
        for (const auto& e : g.edges)
            if (!e.registered) adj[e.from].push_back(e.to);
        std::vector<bool> seen(g.nodes.size(), false);
        std::vector<int> stack{f};
        seen[f] = true;
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            if (u == t) return true;
            for (int v : adj[u])
                if (!seen[v]) {
                    seen[v] = true;
                    stack.push_back(v);
                }
        }
        return false;
    }

    void check_comb_cycles() {
        auto cycle = elab_->graph.find_comb_cycle();
        if (cycle.empty()) return;
        std::string desc;
        for (const auto& n : cycle) desc += n + " -> ";
        desc += cycle.front();
        diags_.error("comb-cycle", loc(""),
                     "combinational cycle: " + desc);
    }

    std::shared_ptr<const CircuitDef> src_;
    DiagnosticList& diags_;
    std::shared_ptr<ElaboratedCircuit> elab_;
};

}  // namespace

ElaborationResult elaborate(std::shared_ptr<const CircuitDef> circuit) {
    ElaborationResult res;
    if (!circuit) {
        res.diags.error("internal", "", "null circuit");
        return res;
    }
    Elaborator e(circuit, res.diags);
    res.circuit = e.run();
    return res;
}

// ---------------------------------------------------------------------------
// Port inference

PortPartition infer_ports(const CircuitDef& circuit,
                          const std::vector<PortOverride>& overrides,
                          DiagnosticList& diags) {
    PortPartition part;
    if (!circuit.ports.empty()) {
        diags.error("structural", circuit.name,
                    "port inference requires a circuit with plain signals only");
        return part;
    }

    // Per top-level statement: targets and sources (conditions included).
    struct StmtIO {
        std::set<std::string> targets;
        std::set<std::string> sources;
    };
    std::vector<StmtIO> io;
    auto walk = [&](const std::vector<Stmt>& body, StmtIO& rec,
                    auto&& self) -> void {
        for (const auto& s : body) {
            switch (s.kind) {
            case StmtKind::Assign: {
                rec.targets.insert(target_root(s.lhs));
                std::vector<std::string> srcs;
                collect_signals(s.rhs, srcs);
                const Expr* l = &s.lhs;
                while (l->kind == ExprKind::Index || l->kind == ExprKind::Field) {
                    if (l->kind == ExprKind::Index) collect_signals(l->args[1], srcs);
                    l = &l->args[0];
                }
                rec.sources.insert(srcs.begin(), srcs.end());
                break;
            }
            case StmtKind::If: {
                std::vector<std::string> srcs;
                collect_signals(s.rhs, srcs);
                rec.sources.insert(srcs.begin(), srcs.end());
                self(s.body, rec, self);
                self(s.else_body, rec, self);
                break;
            }
            case StmtKind::Case: {
                std::vector<std::string> srcs;
                collect_signals(s.rhs, srcs);
                rec.sources.insert(srcs.begin(), srcs.end());
                for (const auto& a : s.arm_bodies) self(a, rec, self);
                self(s.default_body, rec, self);
                break;
            }
            case StmtKind::Sequential:
            case StmtKind::Combinatorial:
                self(s.body, rec, self);
                break;
            default:
                break;
            }
        }
    };
    for (const auto& s : circuit.statements) {
        StmtIO rec;
        std::vector<Stmt> one{s};
        walk(one, rec, walk);
        io.push_back(std::move(rec));
    }

    auto classify = [&](const std::string& name) -> char {
        for (const auto& o : overrides)
            if (o.name == name)
                return o.direction == PortDirection::Input ? 'i' : 'o';
        bool driven = false, read_elsewhere = false, read_anywhere = false;
        for (const auto& rec : io) {
            bool drives = rec.targets.count(name) > 0;
            bool reads = rec.sources.count(name) > 0;
            driven |= drives;
            read_anywhere |= reads;
            if (reads && !drives) read_elsewhere = true;
        }
        if (!driven && !read_anywhere) {
            diags.warning("dangling-signal", circuit.name + "." + name,
                          "signal is neither driven nor read");
            return 'i';
        }
        if (!driven) return 'i';
        if (!read_elsewhere) return 'o';
        return 'n';
    };

    for (const auto& w : circuit.wires) {
        switch (classify(w.name)) {
        case 'i': part.inputs.push_back(w.name); break;
        case 'o': part.outputs.push_back(w.name); break;
        default: part.internals.push_back(w.name); break;
        }
    }
    return part;
}

CircuitDef apply_ports(const CircuitDef& circuit, const PortPartition& p) {
    CircuitDef out = circuit;
    out.ports.clear();
    out.wires.clear();
    auto in = [&](const std::vector<std::string>& v, const std::string& n) {
        return std::find(v.begin(), v.end(), n) != v.end();
    };
    for (const auto& w : circuit.wires) {
        if (in(p.inputs, w.name))
            out.ports.push_back({w.name, PortDirection::Input, w.type});
        else if (in(p.outputs, w.name))
            out.ports.push_back({w.name, PortDirection::Output, w.type});
        else
            out.wires.push_back(w);
    }
    return out;
}

std::vector<PortOverride> parse_port_overrides(const std::string& text,
                                               DiagnosticList& diags) {
    std::vector<PortOverride> out;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        std::istringstream ls(line);
        std::string dir, name;
        if (!(ls >> dir)) continue;  // blank line
        if (dir.starts_with("#")) continue;
        ls >> name;
        if (dir == "input" && !name.empty())
            out.push_back({name, PortDirection::Input});
        else if (dir == "output" && !name.empty())
            out.push_back({name, PortDirection::Output});
        else
            diags.error("parse", "ports:" + std::to_string(lineno),
                        "expected 'input <name>' or 'output <name>'");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Constant evaluation

namespace {

ConstValue zero_value(const TypeDesc& t) {
    ConstValue v;
    switch (t.kind) {
    case TypeKind::Record:
        v.kind = ConstValue::Kind::Record;
        v.field_names = t.field_names;
        for (const auto& ft : t.field_types) v.fields.push_back(zero_value(ft));
        break;
    case TypeKind::Array:
        v.kind = ConstValue::Kind::Array;
        v.elements.assign(t.length, zero_value(t.element[0]));
        break;
    default:
        v.kind = ConstValue::Kind::Int;
        break;
    }
    return v;
}

class ConstEvaluator {
public:
    ConstEvaluator(const CircuitDef& circuit, DiagnosticList& diags)
        : circuit_(circuit), diags_(diags) {}

    std::optional<ConstValue> eval(const Expr& e) {
        switch (e.kind) {
        case ExprKind::Lit:
            return int_value(e.value);
        case ExprKind::Ref:
            return signal_value(e.name);
        case ExprKind::Index: {
            auto base = eval(e.args[0]);
            if (!base) return std::nullopt;
            auto idx = eval_int(e.args[1]);
            if (!idx) return std::nullopt;
            if (base->kind != ConstValue::Kind::Array ||
                *idx >= base->elements.size()) {
                fail("index-range", "constant index out of range");
                return std::nullopt;
            }
            return base->elements[*idx];
        }
        case ExprKind::Field: {
            auto base = eval(e.args[0]);
            if (!base) return std::nullopt;
            if (base->kind != ConstValue::Kind::Record) {
                fail("structural", "field select on a non-record value");
                return std::nullopt;
            }
            for (std::size_t i = 0; i < base->field_names.size(); ++i)
                if (base->field_names[i] == e.name) return base->fields[i];
            fail("unknown-name", "record value has no field '" + e.name + "'");
            return std::nullopt;
        }
        case ExprKind::Aggregate: {
            ConstValue v;
            v.kind = ConstValue::Kind::Record;
            v.field_names = e.agg_fields;
            for (const auto& a : e.args) {
                auto f = eval(a);
                if (!f) return std::nullopt;
                v.fields.push_back(std::move(*f));
            }
            return v;
        }
        case ExprKind::Binary: {
            auto l = eval_int(e.args[0]);
            auto r = eval_int(e.args[1]);
            if (!l || !r) return std::nullopt;
            Expr folded = fold_constants(
                Expr::binary(e.bin_op, Expr::lit(*l), Expr::lit(*r)));
            if (folded.kind != ExprKind::Lit) {
                fail("not-constant", "cannot fold operator " + binop_symbol(e.bin_op));
                return std::nullopt;
            }
            return int_value(folded.value);
        }
        default:
            fail("not-constant",
                 "expression '" + expr_to_string(e) + "' is not constant");
            return std::nullopt;
        }
    }

private:
    std::optional<std::uint64_t> eval_int(const Expr& e) {
        auto v = eval(e);
        if (!v) return std::nullopt;
        if (v->kind != ConstValue::Kind::Int) {
            fail("structural", "expected an integer value");
            return std::nullopt;
        }
        return v->value;
    }

    static ConstValue int_value(std::uint64_t v) {
        ConstValue c;
        c.kind = ConstValue::Kind::Int;
        c.value = v;
        return c;
    }

    // Replays every continuous assignment driving `name` in declaration
    // order over a zero-initialized skeleton of its type.
    std::optional<ConstValue> signal_value(const std::string& name) {
        if (visiting_.count(name)) {
            fail("not-constant", "signal '" + name + "' depends on itself");
            return std::nullopt;
        }
        const TypeDesc* declared = nullptr;
        if (const auto* w = circuit_.find_wire(name)) declared = &w->type;
        else if (const auto* p = circuit_.find_port(name)) declared = &p->type;
        if (!declared) {
            fail("unknown-name", "unknown signal '" + name + "'");
            return std::nullopt;
        }
        auto resolved = resolve_type(*declared, circuit_);
        if (!resolved) {
            fail("unresolved-type", "cannot resolve type of '" + name + "'");
            return std::nullopt;
        }
        visiting_.insert(name);
        ConstValue value = zero_value(*resolved);
        bool any = false;
        bool ok = true;
        for (const auto& s : circuit_.statements) {
            if (s.kind != StmtKind::Assign) {
                // A non-constant driving context makes the signal non-constant.
                std::vector<std::string> targets;
                std::vector<Stmt> one{s};
                collect_all_targets(one, targets);
                if (std::find(targets.begin(), targets.end(), name) != targets.end()) {
                    fail("not-constant",
                         "signal '" + name + "' is driven in a process");
                    ok = false;
                    break;
                }
                continue;
            }
            const Expr* root = &s.lhs;
            std::vector<const Expr*> path;
            while (root->kind == ExprKind::Index || root->kind == ExprKind::Field) {
                path.push_back(root);
                root = &root->args[0];
            }
            if (root->kind != ExprKind::Ref || root->name != name) continue;
            any = true;
            std::reverse(path.begin(), path.end());
            auto rhs = eval(s.rhs);
            if (!rhs) { ok = false; break; }
            ConstValue* slot = &value;
            for (const Expr* step : path) {
                if (step->kind == ExprKind::Index) {
                    auto idx = eval_int(step->args[1]);
                    if (!idx) { ok = false; break; }
                    if (slot->kind != ConstValue::Kind::Array ||
                        *idx >= slot->elements.size()) {
                        fail("index-range", "constant index out of range");
                        ok = false;
                        break;
                    }
                    slot = &slot->elements[*idx];
                } else {
                    bool found = false;
                    for (std::size_t i = 0; i < slot->field_names.size(); ++i) {
                        if (slot->field_names[i] == step->name) {
                            slot = &slot->fields[i];
                            found = true;
                            break;
                        }
                    }
                    if (!found) {
                        fail("unknown-name",
                             "record has no field '" + step->name + "'");
                        ok = false;
                        break;
                    }
                }
            }
            if (!ok) break;
            // Aggregates store field-by-field so later element writes merge.
            *slot = reorder_record(*slot, *rhs, ok);
            if (!ok) break;
        }
        visiting_.erase(name);
        if (!ok) return std::nullopt;
        if (!any) {
            fail("not-constant", "signal '" + name + "' has no constant driver");
            return std::nullopt;
        }
        return value;
    }

    // Matches an aggregate value against the slot's field layout.
    ConstValue reorder_record(const ConstValue& slot, const ConstValue& rhs,
                              bool& ok) {
        if (slot.kind != ConstValue::Kind::Record ||
            rhs.kind != ConstValue::Kind::Record)
            return rhs;
        ConstValue out = slot;
        for (std::size_t i = 0; i < rhs.field_names.size(); ++i) {
            bool found = false;
            for (std::size_t j = 0; j < out.field_names.size(); ++j) {
                if (out.field_names[j] == rhs.field_names[i]) {
                    out.fields[j] = rhs.fields[i];
                    found = true;
                    break;
                }
            }
            if (!found) {
                fail("unknown-name",
                     "record has no field '" + rhs.field_names[i] + "'");
                ok = false;
                return out;
            }
        }
        return out;
    }

    static void collect_all_targets(const std::vector<Stmt>& body,
                                    std::vector<std::string>& out) {
        for (const auto& s : body) {
            if (s.kind == StmtKind::Assign) out.push_back(target_root(s.lhs));
            collect_all_targets(s.body, out);
            collect_all_targets(s.else_body, out);
            for (const auto& a : s.arm_bodies) collect_all_targets(a, out);
            collect_all_targets(s.default_body, out);
        }
    }

    void fail(std::string rule, std::string message) {
        diags_.error(std::move(rule), circuit_.name, std::move(message));
    }

    const CircuitDef& circuit_;
    DiagnosticList& diags_;
    std::set<std::string> visiting_;
};

}  // namespace

std::optional<ConstValue> const_eval(const Expr& expr, const CircuitDef& circuit,
                                     DiagnosticList& diags) {
    ConstEvaluator ev(circuit, diags);
    return ev.eval(expr);
}

DependencyGraph build_dep_graph(const ElaboratedCircuit& elab) {
    return elab.graph;
}

}  // namespace rtlforge
