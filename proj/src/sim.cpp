#include "rtlforge/sim.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <sstream>

#include "rtlforge/flatten.hpp"

namespace rtlforge {

namespace {

std::uint64_t mask_of(int width) {
    if (width >= 64) return ~0ull;
    return (1ull << width) - 1;
}

struct Val {
    std::uint64_t v = 0;
    int w = 1;
    bool sgn = false;
};

std::int64_t as_signed(const Val& x) {
    if (x.w >= 64) return static_cast<std::int64_t>(x.v);
    if (x.v & (1ull << (x.w - 1)))
        return static_cast<std::int64_t>(x.v | ~mask_of(x.w));
    return static_cast<std::int64_t>(x.v);
}

// Storage layout of one signal: `length` packed elements of `elem_width`
// bits; record fields live at fixed bit offsets inside an element.
struct Slot {
    TypeDesc type;
    int elem_width = 1;
    int length = 1;            // 1 for scalars
    bool is_array = false;
    bool sgn = false;
    std::vector<std::uint64_t> cur;
    std::vector<std::uint64_t> next;
};

// Field path position inside a packed element.
struct FieldPos {
    int offset = 0;
    int width = 0;
    bool sgn = false;
};

std::optional<FieldPos> field_pos(const TypeDesc& rec,
                                  const std::string& field) {
    int offset = 0;
    for (std::size_t i = 0; i < rec.field_names.size(); ++i) {
        int w = width_of(rec.field_types[i]);
        if (rec.field_names[i] == field)
            return FieldPos{offset, w,
                            rec.field_types[i].kind == TypeKind::Signed};
        offset += w;
    }
    return std::nullopt;
}

struct Unit {
    const Stmt* stmt = nullptr;
    std::vector<std::string> reads;
    std::vector<std::string> writes;
};

void scan_expr_reads(const Expr& e, std::set<std::string>& out);

void scan_stmt_io(const Stmt& s, std::set<std::string>& reads,
                  std::set<std::string>& writes) {
    switch (s.kind) {
    case StmtKind::Assign: {
        scan_expr_reads(s.rhs, reads);
        const Expr* t = &s.lhs;
        while (t->kind == ExprKind::Index || t->kind == ExprKind::Field) {
            if (t->kind == ExprKind::Index) scan_expr_reads(t->args[1], reads);
            t = &t->args[0];
        }
        if (t->kind == ExprKind::Ref) writes.insert(t->name);
        return;
    }
    case StmtKind::If:
    case StmtKind::Case:
        scan_expr_reads(s.rhs, reads);
        break;
    default:
        break;
    }
    for (const auto& b : s.body) scan_stmt_io(b, reads, writes);
    for (const auto& b : s.else_body) scan_stmt_io(b, reads, writes);
    for (const auto& arm : s.arm_bodies)
        for (const auto& b : arm) scan_stmt_io(b, reads, writes);
    for (const auto& b : s.default_body) scan_stmt_io(b, reads, writes);
}

void scan_expr_reads(const Expr& e, std::set<std::string>& out) {
    if (e.kind == ExprKind::Ref) out.insert(e.name);
    for (const auto& a : e.args) scan_expr_reads(a, out);
}

}  // namespace

struct Simulator::Impl {
    std::shared_ptr<const ElaboratedCircuit> flat;
    std::map<std::string, Slot> slots;
    std::set<std::string> inputs;
    std::vector<Unit> comb_units;   // topological order
    std::vector<const Stmt*> seq_blocks;
    bool ok = true;

    // ----- value access -----------------------------------------------------

    Val load(const std::string& name, std::size_t idx) const {
        auto it = slots.find(name);
        if (it == slots.end()) return {};
        const Slot& s = it->second;
        if (idx >= s.cur.size()) return {0, s.elem_width, s.sgn};
        return {s.cur[idx], s.elem_width, s.sgn};
    }

    // ----- expression evaluation --------------------------------------------

    Val eval(const Expr& e) const {
        switch (e.kind) {
        case ExprKind::Lit:
            return {e.value, e.lit_width, false};
        case ExprKind::Ref:
            return load(e.name, 0);
        case ExprKind::Unary: {
            Val a = eval(e.args[0]);
            if (e.un_op == UnOp::Not) return {~a.v & mask_of(a.w), a.w, a.sgn};
            int w = std::min(a.w + 1, 64);
            return {(0 - a.v) & mask_of(w), w, true};
        }
        case ExprKind::Binary: {
            Val a = eval(e.args[0]);
            Val b = eval(e.args[1]);
            int w = std::max(a.w, b.w);
            std::uint64_t m = mask_of(w);
            switch (e.bin_op) {
            case BinOp::And: return {(a.v & b.v) & m, w, false};
            case BinOp::Or: return {(a.v | b.v) & m, w, false};
            case BinOp::Xor: return {(a.v ^ b.v) & m, w, false};
            case BinOp::Add: return {(a.v + b.v) & m, w, a.sgn || b.sgn};
            case BinOp::Sub: return {(a.v - b.v) & m, w, a.sgn || b.sgn};
            default: break;
            }
            bool res;
            if (a.sgn || b.sgn) {
                std::int64_t x = as_signed(a), y = as_signed(b);
                switch (e.bin_op) {
                case BinOp::Eq: res = x == y; break;
                case BinOp::Neq: res = x != y; break;
                case BinOp::Lt: res = x < y; break;
                case BinOp::Gt: res = x > y; break;
                case BinOp::Le: res = x <= y; break;
                default: res = x >= y; break;
                }
            } else {
                switch (e.bin_op) {
                case BinOp::Eq: res = a.v == b.v; break;
                case BinOp::Neq: res = a.v != b.v; break;
                case BinOp::Lt: res = a.v < b.v; break;
                case BinOp::Gt: res = a.v > b.v; break;
                case BinOp::Le: res = a.v <= b.v; break;
                default: res = a.v >= b.v; break;
                }
            }
            return {res ? 1ull : 0ull, 1, false};
        }
        case ExprKind::Index: {
            const Expr& base = e.args[0];
            std::uint64_t idx = eval(e.args[1]).v;
            if (base.kind == ExprKind::Ref) {
                auto it = slots.find(base.name);
                if (it != slots.end() && it->second.is_array)
                    return load(base.name, static_cast<std::size_t>(idx));
                // Bit select of a vector-valued signal/expression.
                Val v = load(base.name, 0);
                return {(v.v >> idx) & 1ull, 1, false};
            }
            Val v = eval(base);
            return {(v.v >> idx) & 1ull, 1, false};
        }
        case ExprKind::Field: {
            const Expr& base = e.args[0];
            TypeDesc bt = base_type(base);
            auto fp = field_pos(bt, e.name);
            Val v = eval(base);
            if (!fp) return {0, 1, false};
            return {(v.v >> fp->offset) & mask_of(fp->width), fp->width,
                    fp->sgn};
        }
        case ExprKind::Conv: {
            Val a = eval(e.args[0]);
            switch (e.conv) {
            case ConvKind::ResizeTo:
                return {a.v & mask_of(e.conv_width), e.conv_width, a.sgn};
            case ConvKind::ToSigned:
                return {a.v, a.w, true};
            case ConvKind::ToUnsigned:
                return {a.v, a.w, false};
            case ConvKind::BitToUint:
                return {a.v & mask_of(e.conv_width), e.conv_width, false};
            }
            return a;
        }
        case ExprKind::Aggregate: {
            // Pack by declared field order of the target; handled at
            // assignment sites, so evaluate left to right by offsets of the
            // natural order here.
            return {0, 1, false};
        }
        default:
            return {};
        }
    }

    // Structural type of an expression rooted at a signal, for field packing.
    TypeDesc base_type(const Expr& e) const {
        if (e.kind == ExprKind::Ref) {
            auto it = slots.find(e.name);
            if (it != slots.end()) {
                TypeDesc t = it->second.type;
                if (t.kind == TypeKind::Array) return t.element[0];
                return t;
            }
        }
        if (e.kind == ExprKind::Index) {
            TypeDesc bt = base_type(e.args[0]);
            if (bt.kind == TypeKind::Array) return bt.element[0];
            return bt;
        }
        if (e.kind == ExprKind::Field) {
            TypeDesc bt = base_type(e.args[0]);
            auto fp = field_pos(bt, e.name);
            for (std::size_t i = 0; i < bt.field_names.size(); ++i)
                if (bt.field_names[i] == e.name) return bt.field_types[i];
            (void)fp;
        }
        return TypeDesc::bit();
    }

    // ----- assignment -------------------------------------------------------

    void store(const Expr& lhs, const Expr& rhs, bool to_next) {
        // Resolve the target: root signal, element index, bit range.
        const Expr* t = &lhs;
        std::vector<const Expr*> path;
        while (t->kind == ExprKind::Index || t->kind == ExprKind::Field) {
            path.push_back(t);
            t = &t->args[0];
        }
        if (t->kind != ExprKind::Ref) return;
        auto it = slots.find(t->name);
        if (it == slots.end()) return;
        Slot& slot = it->second;
        std::reverse(path.begin(), path.end());

        std::size_t elem = 0;
        int offset = 0;
        int width = slot.elem_width;
        bool whole_array = slot.is_array && path.empty();
        TypeDesc cur_type =
            slot.is_array ? slot.type.element[0] : slot.type;
        bool first = true;
        for (const Expr* p : path) {
            if (p->kind == ExprKind::Index && first && slot.is_array) {
                elem = static_cast<std::size_t>(eval(p->args[1]).v);
                width = slot.elem_width;
            } else if (p->kind == ExprKind::Index) {
                // Bit select inside an element.
                offset += static_cast<int>(eval(p->args[1]).v);
                width = 1;
            } else {
                auto fp = field_pos(cur_type, p->name);
                if (!fp) return;
                offset += fp->offset;
                width = fp->width;
                for (std::size_t i = 0; i < cur_type.field_names.size(); ++i)
                    if (cur_type.field_names[i] == p->name)
                        cur_type = cur_type.field_types[i];
            }
            first = false;
        }

        auto& dst = to_next ? slot.next : slot.cur;
        if (whole_array) {
            // Whole-array assignment from another array signal.
            if (rhs.kind == ExprKind::Ref) {
                auto src = slots.find(rhs.name);
                if (src != slots.end())
                    for (std::size_t i = 0;
                         i < dst.size() && i < src->second.cur.size(); ++i)
                        dst[i] = src->second.cur[i];
            }
            return;
        }
        if (elem >= dst.size()) return;

        std::uint64_t value;
        if (rhs.kind == ExprKind::Aggregate) {
            value = pack_aggregate(cur_type, rhs);
        } else {
            value = eval(rhs).v;
        }
        std::uint64_t m = mask_of(width);
        dst[elem] = (dst[elem] & ~(m << offset)) | ((value & m) << offset);
    }

    std::uint64_t pack_aggregate(const TypeDesc& rec, const Expr& agg) const {
        std::uint64_t out = 0;
        for (std::size_t i = 0; i < agg.agg_fields.size(); ++i) {
            auto fp = field_pos(rec, agg.agg_fields[i]);
            if (!fp) continue;
            std::uint64_t v = eval(agg.args[i]).v & mask_of(fp->width);
            out |= v << fp->offset;
        }
        return out;
    }

    // ----- statement execution ----------------------------------------------

    void exec(const Stmt& s, bool to_next) {
        switch (s.kind) {
        case StmtKind::Assign:
            store(s.lhs, s.rhs, to_next);
            return;
        case StmtKind::If:
            if (eval(s.rhs).v != 0)
                for (const auto& b : s.body) exec(b, to_next);
            else
                for (const auto& b : s.else_body) exec(b, to_next);
            return;
        case StmtKind::Case: {
            std::uint64_t sel = eval(s.rhs).v;
            for (std::size_t i = 0; i < s.arm_values.size(); ++i)
                if (s.arm_values[i] == sel) {
                    for (const auto& b : s.arm_bodies[i]) exec(b, to_next);
                    return;
                }
            for (const auto& b : s.default_body) exec(b, to_next);
            return;
        }
        case StmtKind::Sequential:
        case StmtKind::Combinatorial:
            for (const auto& b : s.body) exec(b, to_next);
            return;
        default:
            return;
        }
    }

    void settle() {
        for (const Unit& u : comb_units) exec(*u.stmt, false);
    }

    void step_once() {
        for (auto& [name, slot] : slots) slot.next = slot.cur;
        for (const Stmt* s : seq_blocks)
            for (const auto& b : s->body) exec(b, true);
        for (auto& [name, slot] : slots) slot.cur = slot.next;
        settle();
    }
};

Simulator::Simulator() : impl_(new Impl) {}
Simulator::~Simulator() = default;

std::unique_ptr<Simulator> Simulator::create(const ElaboratedCircuit& elab,
                                             DiagnosticList& diags,
                                             const SimOptions& opts) {
    CircuitDef flat = flatten(elab);
    auto flat_res = elaborate(std::make_shared<CircuitDef>(std::move(flat)));
    if (!flat_res.ok()) {
        diags.append(flat_res.diags);
        diags.error("internal", elab.source->name,
                    "flattened circuit failed to re-elaborate");
        return nullptr;
    }
    const ElaboratedCircuit& fe = *flat_res.circuit;

    std::unique_ptr<Simulator> sim(new Simulator);
    Impl& impl = *sim->impl_;
    impl.flat = flat_res.circuit;

    for (const auto& [name, type] : fe.symbols) {
        Slot slot;
        slot.type = type;
        if (type.kind == TypeKind::Array) {
            slot.is_array = true;
            slot.length = type.length;
            slot.elem_width = width_of(type.element[0]);
            slot.sgn = type.element[0].kind == TypeKind::Signed;
        } else {
            slot.elem_width = width_of(type);
            slot.sgn = type.kind == TypeKind::Signed;
        }
        if (slot.elem_width > 64) {
            diags.error("unsupported", elab.source->name + "." + name,
                        "element width " + std::to_string(slot.elem_width) +
                            " exceeds the 64-bit simulation limit");
            return nullptr;
        }
        slot.cur.assign(static_cast<std::size_t>(slot.length), 0);
        slot.next = slot.cur;
        impl.slots.emplace(name, std::move(slot));
        sim->order_.push_back(name);
    }
    for (const auto& p : fe.ports)
        if (p.direction == PortDirection::Input) impl.inputs.insert(p.name);

    // Partition top-level statements into combinational units and
    // sequential blocks.
    std::vector<Unit> units;
    for (const auto& s : fe.checked) {
        if (s.kind == StmtKind::Sequential) {
            impl.seq_blocks.push_back(&s);
            continue;
        }
        Unit u;
        u.stmt = &s;
        std::set<std::string> r, w;
        scan_stmt_io(s, r, w);
        for (const auto& x : w) r.erase(x);
        u.reads.assign(r.begin(), r.end());
        u.writes.assign(w.begin(), w.end());
        units.push_back(std::move(u));
    }

    if (opts.shuffle) {
        std::mt19937_64 rng(opts.shuffle_seed);
        std::shuffle(units.begin(), units.end(), rng);
        std::shuffle(impl.seq_blocks.begin(), impl.seq_blocks.end(), rng);
    }

    // Topological order of combinational units (writer before reader).
    std::size_t n = units.size();
    std::vector<std::vector<std::size_t>> succ(n);
    std::vector<int> indeg(n, 0);
    std::map<std::string, std::vector<std::size_t>> writer_of;
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& w : units[i].writes) writer_of[w].push_back(i);
    for (std::size_t i = 0; i < n; ++i)
        for (const auto& r : units[i].reads) {
            auto it = writer_of.find(r);
            if (it == writer_of.end()) continue;
            for (std::size_t j : it->second) {
                succ[j].push_back(i);
                ++indeg[i];
            }
        }
    std::vector<std::size_t> ready;
    for (std::size_t i = 0; i < n; ++i)
        if (indeg[i] == 0) ready.push_back(i);
    std::vector<std::size_t> topo;
    for (std::size_t k = 0; k < ready.size(); ++k) {
        std::size_t i = ready[k];
        topo.push_back(i);
        for (std::size_t j : succ[i])
            if (--indeg[j] == 0) ready.push_back(j);
    }
    if (topo.size() != n) {
        // Should be unreachable: elaboration rejects combinational cycles.
        for (std::size_t i = 0; i < n; ++i) topo.push_back(i);
    }
    for (std::size_t i : topo)
        if (i < n) impl.comb_units.push_back(units[i]);
    if (impl.comb_units.size() > n)
        impl.comb_units.resize(n);

    impl.settle();
    return sim;
}

bool Simulator::poke(const std::string& input, std::uint64_t value,
                     DiagnosticList& diags) {
    auto it = impl_->slots.find(input);
    if (it == impl_->slots.end() || !impl_->inputs.count(input)) {
        diags.error("unknown-name", input, "no such input signal");
        return false;
    }
    Slot& s = it->second;
    if (s.is_array) {
        diags.error("unsupported", input, "cannot poke an array signal");
        return false;
    }
    if (s.elem_width < 64 && value > mask_of(s.elem_width)) {
        diags.error("value", input,
                    "value " + std::to_string(value) + " does not fit " +
                        std::to_string(s.elem_width) + " bits");
        return false;
    }
    s.cur[0] = value & mask_of(s.elem_width);
    impl_->settle();
    return true;
}

std::optional<std::uint64_t> Simulator::peek(const std::string& name,
                                             DiagnosticList& diags) const {
    auto it = impl_->slots.find(name);
    if (it == impl_->slots.end()) {
        diags.error("unknown-name", name, "no such signal");
        return std::nullopt;
    }
    if (it->second.is_array) {
        diags.error("unsupported", name,
                    "array signal: peek an element instead");
        return std::nullopt;
    }
    return it->second.cur[0];
}

std::optional<std::uint64_t> Simulator::peek_element(
    const std::string& name, std::size_t index, DiagnosticList& diags) const {
    auto it = impl_->slots.find(name);
    if (it == impl_->slots.end()) {
        diags.error("unknown-name", name, "no such signal");
        return std::nullopt;
    }
    if (index >= it->second.cur.size()) {
        diags.error("index-range", name,
                    "element " + std::to_string(index) + " out of range");
        return std::nullopt;
    }
    return it->second.cur[index];
}

void Simulator::step(int cycles) {
    for (int i = 0; i < cycles; ++i) impl_->step_once();
    cycle_ += static_cast<std::uint64_t>(cycles);
}

StimulusResult run_stimulus(Simulator& sim, const std::string& script,
                            DiagnosticList& diags) {
    StimulusResult result;
    std::istringstream in(script);
    std::string line;
    int lineno = 0;
    std::ostringstream log;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string cmd;
        if (!(ls >> cmd)) continue;
        if (cmd == "poke") {
            std::string name;
            std::uint64_t value;
            if (!(ls >> name >> value)) {
                diags.error("stimulus", "line " + std::to_string(lineno),
                            "poke needs a name and a value");
                result.passed = false;
                continue;
            }
            if (!sim.poke(name, value, diags)) result.passed = false;
        } else if (cmd == "step") {
            int n = 1;
            ls >> n;
            sim.step(n);
        } else if (cmd == "expect") {
            std::string name;
            std::uint64_t value;
            if (!(ls >> name >> value)) {
                diags.error("stimulus", "line " + std::to_string(lineno),
                            "expect needs a name and a value");
                result.passed = false;
                continue;
            }
            auto got = sim.peek(name, diags);
            if (!got) {
                result.passed = false;
                ++result.failures;
            } else if (*got != value) {
                log << "line " << lineno << ": expect " << name << " == "
                    << value << ", got " << *got << "\n";
                result.passed = false;
                ++result.failures;
            } else {
                log << "line " << lineno << ": " << name << " == " << value
                    << " ok\n";
            }
        } else {
            diags.error("stimulus", "line " + std::to_string(lineno),
                        "unknown command '" + cmd + "'");
            result.passed = false;
        }
    }
    result.log = log.str();
    return result;
}

}  // namespace rtlforge
