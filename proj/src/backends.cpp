#include "rtlforge/backends.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace rtlforge {

namespace {

// ---------------------------------------------------------------------------
// Shared helpers

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

void collect_entities(const ElaboratedCircuit& elab,
                      std::vector<const ElaboratedCircuit*>& order,
                      std::set<std::string>& seen) {
    for (const auto& child : elab.child_elabs)
        collect_entities(*child, order, seen);
    if (seen.insert(elab.source->name).second) order.push_back(&elab);
}

// ---------------------------------------------------------------------------
// VHDL

class VhdlEmitter {
public:
    VhdlEmitter(const ElaboratedCircuit& elab, const VhdlOptions& opts)
        : elab_(elab), circuit_(*elab.source), opts_(opts) {}

    std::string emit_entity() {
        find_read_outputs();
        std::ostringstream os;
        os << "-- Generated by rtlforge. Do not edit.\n"
           << "library ieee;\n"
           << "use ieee.std_logic_1164.all;\n"
           << "use ieee.numeric_std.all;\n"
           << "library work;\n"
           << "use work.rtlforge_support.all;\n";
        if (!circuit_.typedef_names.empty())
            os << "use work." << circuit_.name << "_pkg.all;\n";
        os << "\n";
        emit_entity_decl(os);
        os << "\n";
        emit_architecture(os);
        return os.str();
    }

    std::string emit_types_package() {
        std::ostringstream os;
        os << "-- Generated by rtlforge. Do not edit.\n"
           << "library ieee;\n"
           << "use ieee.std_logic_1164.all;\n"
           << "use ieee.numeric_std.all;\n\n"
           << "package " << circuit_.name << "_pkg is\n";
        for (std::size_t i = 0; i < circuit_.typedef_names.size(); ++i)
            emit_typedef(os, circuit_.typedef_names[i],
                         circuit_.typedef_types[i]);
        os << "end package " << circuit_.name << "_pkg;\n";
        return os.str();
    }

private:
    // -- types --------------------------------------------------------------

    TypeDesc resolved(const TypeDesc& t) const {
        auto r = resolve_type(t, circuit_);
        return r ? *r : t;
    }

    std::string vhdl_type(const TypeDesc& t) const {
        if (t.kind == TypeKind::Alias) {
            if (circuit_.find_typedef(t.alias_name)) return t.alias_name;
            auto b = builtin_type(t.alias_name);
            if (b) return vhdl_type(*b);
            return t.alias_name;
        }
        switch (t.kind) {
        case TypeKind::Bit:
            return "std_logic";
        case TypeKind::BitVector:
        case TypeKind::Unsigned:
        case TypeKind::Signed:
        case TypeKind::RUInt:
            return "std_logic_vector(" + std::to_string(t.width - 1) +
                   " downto 0)";
        case TypeKind::Record:
        case TypeKind::Array:
            return "<anonymous>";  // only reachable through typedefs
        default:
            return "std_logic";
        }
    }

    void emit_typedef(std::ostringstream& os, const std::string& name,
                      const TypeDesc& t) const {
        if (t.kind == TypeKind::Record) {
            os << "  type " << name << " is record\n";
            for (std::size_t i = 0; i < t.field_names.size(); ++i)
                os << "    " << t.field_names[i] << " : "
                   << vhdl_type(t.field_types[i]) << ";\n";
            os << "  end record;\n";
        } else if (t.kind == TypeKind::Array) {
            os << "  type " << name << " is array (0 to "
               << (t.length - 1) << ") of " << vhdl_type(t.element[0])
               << ";\n";
        } else {
            os << "  subtype " << name << " is " << vhdl_type(resolved(t))
               << ";\n";
        }
    }

    std::string reset_literal(const TypeDesc& t) const {
        TypeDesc r = resolved(t);
        switch (r.kind) {
        case TypeKind::Bit: return "'0'";
        case TypeKind::Array:
            return "(others => " + reset_literal(r.element[0]) + ")";
        case TypeKind::Record: {
            std::vector<std::string> fields;
            for (std::size_t i = 0; i < r.field_names.size(); ++i)
                fields.push_back(r.field_names[i] + " => " +
                                 reset_literal(r.field_types[i]));
            return "(" + join(fields, ", ") + ")";
        }
        default: return "(others=>'0')";
        }
    }

    // -- name handling ------------------------------------------------------

    void find_read_outputs() {
        std::set<std::string> read;
        std::function<void(const Expr&)> scan_expr = [&](const Expr& e) {
            if (e.kind == ExprKind::Ref) read.insert(e.name);
            for (const auto& a : e.args) scan_expr(a);
        };
        std::function<void(const Stmt&)> scan = [&](const Stmt& s) {
            if (s.kind == StmtKind::Assign) {
                scan_expr(s.rhs);
                // Index positions of the target are reads too.
                const Expr* t = &s.lhs;
                while (t->kind == ExprKind::Index ||
                       t->kind == ExprKind::Field) {
                    if (t->kind == ExprKind::Index) scan_expr(t->args[1]);
                    t = &t->args[0];
                }
                return;
            }
            if (s.kind == StmtKind::If || s.kind == StmtKind::Case)
                scan_expr(s.rhs);
            for (const auto& b : s.body) scan(b);
            for (const auto& b : s.else_body) scan(b);
            for (const auto& arm : s.arm_bodies)
                for (const auto& b : arm) scan(b);
            for (const auto& b : s.default_body) scan(b);
        };
        for (const auto& s : elab_.checked) scan(s);
        for (const auto& p : circuit_.ports)
            if (p.direction == PortDirection::Output && read.count(p.name))
                buffered_.insert(p.name);
    }

    std::string signal_name(const std::string& name) const {
        if (buffered_.count(name)) return name + "_i";
        return name;
    }

    static std::string inst_signal(const std::string& inst,
                                   const std::string& port) {
        return inst + "_" + port;
    }

    // -- expression rendering ------------------------------------------------

    bool is_bit_expr(const Expr& e) const {
        switch (e.kind) {
        case ExprKind::Ref: {
            auto t = elab_.type_of(e.name);
            return t && t->kind == TypeKind::Bit;
        }
        case ExprKind::PortRef: {
            const auto* inst = circuit_.find_instance(e.name);
            if (!inst) return false;
            const auto* p = inst->child->find_port(e.port);
            if (!p) return false;
            auto r = resolve_type(p->type, *inst->child);
            return r && r->kind == TypeKind::Bit;
        }
        case ExprKind::Index: {
            // Indexing a vector yields one bit; indexing an array yields
            // the element type.
            TypeDesc bt = expr_type(e.args[0]);
            if (bt.kind == TypeKind::Array)
                return resolved(bt.element[0]).kind == TypeKind::Bit;
            return bt.kind != TypeKind::Record;
        }
        case ExprKind::Unary:
            return e.un_op == UnOp::Not && is_bit_expr(e.args[0]);
        case ExprKind::Binary:
            return is_bitwise(e.bin_op) &&
                   (is_bit_expr(e.args[0]) || is_bit_expr(e.args[1]));
        default:
            return false;
        }
    }

    TypeDesc expr_type(const Expr& e) const {
        if (e.kind == ExprKind::Ref) {
            auto t = elab_.type_of(e.name);
            if (t) return *t;
        }
        if (e.kind == ExprKind::Field) {
            TypeDesc bt = expr_type(e.args[0]);
            for (std::size_t i = 0; i < bt.field_names.size(); ++i)
                if (bt.field_names[i] == e.name)
                    return resolved(bt.field_types[i]);
        }
        if (e.kind == ExprKind::Index) {
            TypeDesc bt = expr_type(e.args[0]);
            if (bt.kind == TypeKind::Array) return resolved(bt.element[0]);
            return TypeDesc::bit();
        }
        return TypeDesc::bit();
    }

    static bool is_cmp(const Expr& e) {
        return e.kind == ExprKind::Binary && is_comparison(e.bin_op);
    }

    std::string render_index(const Expr& idx) const {
        if (idx.kind == ExprKind::Lit) return std::to_string(idx.value);
        return "to_integer(unsigned(" + render(idx, false) + "))";
    }

    // `bit_ctx`: literals render as '0'/'1' character literals.
    std::string render(const Expr& e, bool bit_ctx) const {
        switch (e.kind) {
        case ExprKind::Lit:
            if (bit_ctx) return e.value ? "'1'" : "'0'";
            return std::to_string(e.value);
        case ExprKind::Ref:
            if (elab_.is_state_reg(e.name)) return e.name;
            return signal_name(e.name);
        case ExprKind::PortRef:
            return inst_signal(e.name, e.port);
        case ExprKind::Unary:
            if (e.un_op == UnOp::Not)
                return "(not " + render(e.args[0], bit_ctx) + ")";
            return "negate(" + render(e.args[0], false) + ")";
        case ExprKind::Binary: {
            if (is_comparison(e.bin_op))
                return "to_sl" + render_relation(e);
            bool bits = bit_ctx || is_bit_expr(e);
            std::string op;
            switch (e.bin_op) {
            case BinOp::And: op = bits ? "and" : "and"; break;
            case BinOp::Or: op = "or"; break;
            case BinOp::Xor: op = "xor"; break;
            case BinOp::Add: op = "+"; break;
            case BinOp::Sub: op = "-"; break;
            default: op = "?"; break;
            }
            bool operand_bits = bits && is_bitwise(e.bin_op);
            return "(" + render(e.args[0], operand_bits) + " " + op + " " +
                   render(e.args[1], operand_bits) + ")";
        }
        case ExprKind::Index:
            return render(e.args[0], false) + "(" + render_index(e.args[1]) +
                   ")";
        case ExprKind::Field:
            return render(e.args[0], false) + "." + e.name;
        case ExprKind::Aggregate: {
            std::vector<std::string> fields;
            for (std::size_t i = 0; i < e.agg_fields.size(); ++i)
                fields.push_back(e.agg_fields[i] + " => " +
                                 render(e.args[i], false));
            return "(" + join(fields, ", ") + ")";
        }
        case ExprKind::Conv:
            return render_conv(e);
        }
        return "?";
    }

    std::string render_conv(const Expr& e) const {
        const Expr& inner = e.args[0];
        switch (e.conv) {
        case ConvKind::ResizeTo:
            if (inner.kind == ExprKind::Lit)
                return "to_bv(" + std::to_string(inner.value) + "," +
                       std::to_string(e.conv_width) + ")";
            if (is_cmp(inner))
                return "resize(to_sl" + render_relation(inner) + ", " +
                       std::to_string(e.conv_width) + ")";
            return "resize(" + render(inner, false) + ", " +
                   std::to_string(e.conv_width) + ")";
        case ConvKind::BitToUint:
            return "to_uint(" + render(inner, true) + "," +
                   std::to_string(e.conv_width) + ")";
        case ConvKind::ToSigned:
        case ConvKind::ToUnsigned:
            // Width-preserving bit reinterpretation; signedness only
            // matters inside relations, handled there.
            return render(inner, false);
        }
        return render(inner, false);
    }

    static bool has_to_signed(const Expr& e) {
        if (e.kind == ExprKind::Conv && e.conv == ConvKind::ToSigned)
            return true;
        if (e.kind == ExprKind::Binary && is_arith(e.bin_op))
            return has_to_signed(e.args[0]) || has_to_signed(e.args[1]);
        return false;
    }

    static bool is_uint_side(const Expr& e) {
        return e.kind == ExprKind::Conv && e.conv == ConvKind::BitToUint;
    }

    // Renders a comparison as a parenthesized boolean expression.
    std::string render_relation(const Expr& e) const {
        const Expr& a = e.args[0];
        const Expr& b = e.args[1];
        std::string op;
        switch (e.bin_op) {
        case BinOp::Eq: op = "="; break;
        case BinOp::Neq: op = "/="; break;
        case BinOp::Lt: op = "<"; break;
        case BinOp::Gt: op = ">"; break;
        case BinOp::Le: op = "<="; break;
        case BinOp::Ge: op = ">="; break;
        default: op = "="; break;
        }
        bool ordered = e.bin_op != BinOp::Eq && e.bin_op != BinOp::Neq;
        bool integer_cmp = is_uint_side(a) || is_uint_side(b);
        bool bits = !integer_cmp && (is_bit_expr(a) || is_bit_expr(b));
        auto side = [&](const Expr& s) -> std::string {
            if (s.kind == ExprKind::Lit && (integer_cmp || ordered))
                return std::to_string(s.value);
            if (bits) return render(s, true);
            if (ordered) {
                bool sgn = has_to_signed(s);
                return (sgn ? "signed(" : "unsigned(") + render(s, false) +
                       ")";
            }
            return render(s, false);
        };
        return "(" + side(a) + " " + op + " " + side(b) + ")";
    }

    // Boolean condition rendering for if statements.
    std::string render_cond(const Expr& e) const {
        if (is_cmp(e)) return render_relation(e);
        if (e.kind == ExprKind::Unary && e.un_op == UnOp::Not)
            return "(not " + render_cond(e.args[0]) + ")";
        if (e.kind == ExprKind::Binary && is_bitwise(e.bin_op) &&
            (is_cmp(e.args[0]) || is_cmp(e.args[1]) ||
             !is_bit_expr(e))) {
            const char* op = e.bin_op == BinOp::And   ? "and"
                             : e.bin_op == BinOp::Or ? "or"
                                                     : "xor";
            return "(" + render_cond(e.args[0]) + " " + op + " " +
                   render_cond(e.args[1]) + ")";
        }
        // A lone bit-valued expression.
        return "(" + render(e, true) + " = '1')";
    }

    // -- statements ----------------------------------------------------------

    std::string render_target(const Expr& lhs) const {
        if (lhs.kind == ExprKind::Ref) return signal_name(lhs.name);
        if (lhs.kind == ExprKind::PortRef)
            return inst_signal(lhs.name, lhs.port);
        if (lhs.kind == ExprKind::Index)
            return render_target(lhs.args[0]) + "(" +
                   render_index(lhs.args[1]) + ")";
        if (lhs.kind == ExprKind::Field)
            return render_target(lhs.args[0]) + "." + lhs.name;
        return "?";
    }

    const Expr& target_root(const Expr& lhs) const {
        const Expr* t = &lhs;
        while (t->kind == ExprKind::Index || t->kind == ExprKind::Field)
            t = &t->args[0];
        return *t;
    }

    bool target_is_bit(const Expr& lhs) const {
        if (lhs.kind == ExprKind::Ref) {
            auto t = elab_.type_of(lhs.name);
            return t && t->kind == TypeKind::Bit;
        }
        if (lhs.kind == ExprKind::PortRef) {
            const auto* inst = circuit_.find_instance(lhs.name);
            if (!inst) return false;
            const auto* p = inst->child->find_port(lhs.port);
            if (!p) return false;
            auto r = resolve_type(p->type, *inst->child);
            return r && r->kind == TypeKind::Bit;
        }
        if (lhs.kind == ExprKind::Index) return is_bit_expr(lhs);
        return false;
    }

    std::string render_assign_rhs(const Expr& lhs, const Expr& rhs) const {
        bool bit = target_is_bit(lhs);
        if (bit && is_cmp(rhs)) return "to_sl" + render_relation(rhs);
        return render(rhs, bit);
    }

    void emit_stmt(std::ostringstream& os, const Stmt& s, int indent) {
        std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
        switch (s.kind) {
        case StmtKind::Assign: {
            const Expr& root = target_root(s.lhs);
            if (root.kind == ExprKind::Ref && elab_.is_state_reg(root.name)) {
                const FsmInfo* f = elab_.fsm_of_reg(root.name);
                const Expr* v = &s.rhs;
                while (v->kind == ExprKind::Conv) v = &v->args[0];
                os << pad << root.name << " <= "
                   << f->states[static_cast<std::size_t>(v->value)] << ";\n";
                return;
            }
            os << pad << render_target(s.lhs) << " <= "
               << render_assign_rhs(s.lhs, s.rhs) << ";\n";
            return;
        }
        case StmtKind::If:
            os << pad << "if " << render_cond(s.rhs) << " then\n";
            for (const auto& b : s.body) emit_stmt(os, b, indent + 1);
            if (s.has_else || !s.else_body.empty()) {
                os << pad << "else\n";
                for (const auto& b : s.else_body) emit_stmt(os, b, indent + 1);
            }
            os << pad << "end if;\n";
            return;
        case StmtKind::Case:
            emit_case(os, s, indent);
            return;
        default:
            for (const auto& b : s.body) emit_stmt(os, b, indent);
            return;
        }
    }

    std::string case_choice(const Stmt& s, std::uint64_t value) const {
        const Expr& sel = s.rhs;
        if (sel.kind == ExprKind::Ref && elab_.is_state_reg(sel.name)) {
            const FsmInfo* f = elab_.fsm_of_reg(sel.name);
            return f->states[static_cast<std::size_t>(value)];
        }
        int w = 1;
        if (sel.kind == ExprKind::Ref) {
            auto t = elab_.type_of(sel.name);
            if (t) w = width_of(*t);
        }
        if (sel.kind == ExprKind::Ref && is_bit_expr(sel))
            return value ? "'1'" : "'0'";
        std::string bitstr;
        for (int i = w - 1; i >= 0; --i)
            bitstr += ((value >> i) & 1) ? '1' : '0';
        return "\"" + bitstr + "\"";
    }

    void emit_case(std::ostringstream& os, const Stmt& s, int indent) {
        std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
        os << pad << "case " << render(s.rhs, false) << " is\n";
        for (std::size_t i = 0; i < s.arm_values.size(); ++i) {
            os << pad << "  when " << case_choice(s, s.arm_values[i])
               << " =>\n";
            if (s.arm_bodies[i].empty())
                os << pad << "    null;\n";
            for (const auto& b : s.arm_bodies[i]) emit_stmt(os, b, indent + 2);
        }
        os << pad << "  when others =>\n";
        if (s.has_default) {
            if (s.default_body.empty()) os << pad << "    null;\n";
            for (const auto& b : s.default_body) emit_stmt(os, b, indent + 2);
        } else {
            os << pad << "    null;\n";
        }
        os << pad << "end case;\n";
    }

    // -- processes -----------------------------------------------------------

    void collect_targets(const Stmt& s, std::vector<std::string>& out,
                         std::set<std::string>& seen) const {
        if (s.kind == StmtKind::Assign) {
            const Expr& root = target_root(s.lhs);
            std::string name = root.kind == ExprKind::PortRef
                                   ? inst_signal(root.name, root.port)
                                   : (elab_.is_state_reg(root.name)
                                          ? root.name
                                          : signal_name(root.name));
            if (seen.insert(name).second) out.push_back(name);
            return;
        }
        for (const auto& b : s.body) collect_targets(b, out, seen);
        for (const auto& b : s.else_body) collect_targets(b, out, seen);
        for (const auto& arm : s.arm_bodies)
            for (const auto& b : arm) collect_targets(b, out, seen);
        for (const auto& b : s.default_body) collect_targets(b, out, seen);
    }

    void collect_reads(const Stmt& s, std::set<std::string>& out) const {
        std::function<void(const Expr&)> scan = [&](const Expr& e) {
            if (e.kind == ExprKind::Ref) {
                out.insert(elab_.is_state_reg(e.name) ? e.name
                                                      : signal_name(e.name));
            } else if (e.kind == ExprKind::PortRef) {
                out.insert(inst_signal(e.name, e.port));
            }
            for (const auto& a : e.args) scan(a);
        };
        if (s.kind == StmtKind::Assign) {
            scan(s.rhs);
            const Expr* t = &s.lhs;
            while (t->kind == ExprKind::Index || t->kind == ExprKind::Field) {
                if (t->kind == ExprKind::Index) scan(t->args[1]);
                t = &t->args[0];
            }
            return;
        }
        if (s.kind == StmtKind::If || s.kind == StmtKind::Case) scan(s.rhs);
        for (const auto& b : s.body) collect_reads(b, out);
        for (const auto& b : s.else_body) collect_reads(b, out);
        for (const auto& arm : s.arm_bodies)
            for (const auto& b : arm) collect_reads(b, out);
        for (const auto& b : s.default_body) collect_reads(b, out);
    }

    std::string state_reset(const std::string& name) const {
        const FsmInfo* f = elab_.fsm_of_reg(name);
        if (f) return f->states[0];
        auto t = elab_.type_of(name);
        return reset_literal(t ? *t : TypeDesc::bit());
    }

    void emit_sequential(std::ostringstream& os, const Stmt& s) {
        std::string label = s.has_label ? s.label : "seq";
        std::vector<std::string> targets;
        std::set<std::string> seen;
        for (const auto& b : s.body) collect_targets(b, targets, seen);

        os << "  " << label << "_update : process(" << opts_.reset_n << ","
           << opts_.clock << ")\n  begin\n"
           << "    if " << opts_.reset_n << "='0' then\n";
        for (const auto& t : targets)
            os << "      " << t << " <= " << state_reset(unbuffer(t)) << ";\n";
        os << "    elsif rising_edge(" << opts_.clock << ") then\n"
           << "      if " << opts_.sreset << "='1' then\n";
        for (const auto& t : targets)
            os << "        " << t << " <= " << state_reset(unbuffer(t))
               << ";\n";
        os << "      else\n";
        for (const auto& b : s.body) emit_stmt(os, b, 4);
        os << "      end if;\n"
           << "    end if;\n"
           << "  end process;\n";
    }

    std::string unbuffer(const std::string& rendered) const {
        if (rendered.size() > 2 &&
            rendered.compare(rendered.size() - 2, 2, "_i") == 0 &&
            buffered_.count(rendered.substr(0, rendered.size() - 2)))
            return rendered.substr(0, rendered.size() - 2);
        return rendered;
    }

    void emit_combinatorial(std::ostringstream& os, const Stmt& s, int idx) {
        std::string label =
            s.has_label ? s.label : ("comb_" + std::to_string(idx));
        std::set<std::string> reads_set;
        std::set<std::string> writes;
        std::vector<std::string> targets;
        std::set<std::string> tseen;
        for (const auto& b : s.body) {
            collect_reads(b, reads_set);
            collect_targets(b, targets, tseen);
        }
        if (s.kind != StmtKind::Combinatorial) {
            collect_reads(s, reads_set);
            collect_targets(s, targets, tseen);
        }
        for (const auto& t : targets) reads_set.erase(t);
        std::vector<std::string> reads(reads_set.begin(), reads_set.end());
        os << "  " << label << " : process(" << join(reads, ",") << ")\n"
           << "  begin\n";
        if (s.kind == StmtKind::Combinatorial)
            for (const auto& b : s.body) emit_stmt(os, b, 2);
        else
            emit_stmt(os, s, 2);
        os << "  end process;\n";
    }

    // -- structure -----------------------------------------------------------

    void emit_entity_decl(std::ostringstream& os) {
        os << "entity " << circuit_.name << "_c is\n  port (\n";
        std::vector<std::string> lines;
        for (const auto& p : elab_.ports) {
            auto t = elab_.type_of(p.name);
            lines.push_back(
                "    " + p.name + " : " +
                (p.direction == PortDirection::Input ? "in  " : "out ") +
                vhdl_type_for_decl(p.type, t));
        }
        if (elab_.has_registers) {
            lines.push_back("    " + opts_.clock + " : in  std_logic");
            lines.push_back("    " + opts_.reset_n + " : in  std_logic");
            lines.push_back("    " + opts_.sreset + " : in  std_logic");
        }
        os << join(lines, ";\n") << "\n  );\nend entity " << circuit_.name
           << "_c;\n";
    }

    // Prefer the declared typedef name; fall back to the resolved shape.
    std::string vhdl_type_for_decl(const TypeDesc& declared,
                                   const std::optional<TypeDesc>& res) const {
        if (declared.kind == TypeKind::Alias &&
            circuit_.find_typedef(declared.alias_name))
            return declared.alias_name;
        return vhdl_type(res ? *res : resolved(declared));
    }

    void emit_architecture(std::ostringstream& os) {
        os << "architecture rtl of " << circuit_.name << "_c is\n";
        // FSM state enumerations.
        for (const auto& f : elab_.fsms) {
            os << "  type " << f.label << "_state_t is ("
               << join(f.states, ",") << ");\n";
            os << "  signal " << f.state_reg << " : " << f.label
               << "_state_t;\n";
        }
        for (const auto& w : circuit_.wires) {
            auto t = elab_.type_of(w.name);
            os << "  signal " << w.name << " : "
               << vhdl_type_for_decl(w.type, t) << ";\n";
        }
        for (const auto& name : buffered_) {
            auto t = elab_.type_of(name);
            os << "  signal " << name << "_i : "
               << vhdl_type(t ? *t : TypeDesc::bit()) << ";\n";
        }
        // Instance connection signals.
        for (const auto& inst : circuit_.instances) {
            for (const auto& p : inst.child->ports) {
                auto r = resolve_type(p.type, *inst.child);
                os << "  signal " << inst_signal(inst.name, p.name) << " : "
                   << vhdl_type(r ? *r : p.type) << ";\n";
            }
        }
        os << "begin\n";

        int comb_idx = 0;
        for (const auto& s : elab_.checked) {
            switch (s.kind) {
            case StmtKind::Assign:
                emit_stmt(os, s, 1);
                break;
            case StmtKind::Sequential:
                emit_sequential(os, s);
                break;
            case StmtKind::Combinatorial:
            case StmtKind::If:
            case StmtKind::Case:
                emit_combinatorial(os, s, comb_idx++);
                break;
            default:
                break;
            }
        }

        for (const auto& name : buffered_)
            os << "  " << name << " <= " << name << "_i;\n";

        for (const auto& inst : circuit_.instances) {
            const ElaboratedCircuit* child = elab_.child_elab(inst.name);
            os << "  " << inst.name << " : entity work." << inst.child->name
               << "_c\n    port map (\n";
            std::vector<std::string> maps;
            for (const auto& p : inst.child->ports)
                maps.push_back("      " + p.name + " => " +
                               inst_signal(inst.name, p.name));
            if (child && child->has_registers) {
                maps.push_back("      " + opts_.clock + " => " + opts_.clock);
                maps.push_back("      " + opts_.reset_n + " => " +
                               opts_.reset_n);
                maps.push_back("      " + opts_.sreset + " => " +
                               opts_.sreset);
            }
            os << join(maps, ",\n") << "\n    );\n";
        }

        os << "end architecture rtl;\n";
    }

    const ElaboratedCircuit& elab_;
    const CircuitDef& circuit_;
    VhdlOptions opts_;
    std::set<std::string> buffered_;  // output ports that are read back
};

}  // namespace

std::vector<EmissionUnit> emit_vhdl(const ElaboratedCircuit& elab,
                                    const VhdlOptions& opts) {
    std::vector<const ElaboratedCircuit*> order;
    std::set<std::string> seen;
    collect_entities(elab, order, seen);

    std::vector<EmissionUnit> units;
    for (const ElaboratedCircuit* e : order) {
        if (!e->source->typedef_names.empty()) {
            VhdlEmitter em(*e, opts);
            units.push_back({e->source->name + "_pkg.vhd",
                             EmissionUnit::Kind::TypesPackage,
                             em.emit_types_package()});
        }
        VhdlEmitter em(*e, opts);
        units.push_back({e->source->name + "_c.vhd",
                         EmissionUnit::Kind::Entity, em.emit_entity()});
    }
    return units;
}

EmissionUnit emit_support_package() {
    static const char* text = R"(-- Generated by rtlforge. Do not edit.
library ieee;
use ieee.std_logic_1164.all;
use ieee.numeric_std.all;

package rtlforge_support is
  function to_bv(value : integer; width : integer) return std_logic_vector;
  function to_uint(x : std_logic; width : integer) return integer;
  function to_uint(x : std_logic_vector; width : integer) return integer;
  function resize(x : std_logic_vector; width : integer) return std_logic_vector;
  function resize(x : std_logic; width : integer) return std_logic_vector;
  function negate(x : std_logic_vector) return std_logic_vector;
  function to_sl(b : boolean) return std_logic;
  function "+"(a : std_logic_vector; b : std_logic_vector) return std_logic_vector;
  function "-"(a : std_logic_vector; b : std_logic_vector) return std_logic_vector;
end package rtlforge_support;

package body rtlforge_support is

  function to_bv(value : integer; width : integer) return std_logic_vector is
  begin
    return std_logic_vector(to_unsigned(value, width));
  end function;

  function to_uint(x : std_logic; width : integer) return integer is
  begin
    if x = '1' then
      return 1;
    else
      return 0;
    end if;
  end function;

  function to_uint(x : std_logic_vector; width : integer) return integer is
  begin
    return to_integer(unsigned(x));
  end function;

  function resize(x : std_logic_vector; width : integer) return std_logic_vector is
  begin
    return std_logic_vector(resize(unsigned(x), width));
  end function;

  function resize(x : std_logic; width : integer) return std_logic_vector is
    variable v : std_logic_vector(width - 1 downto 0) := (others => '0');
  begin
    v(0) := x;
    return v;
  end function;

  function negate(x : std_logic_vector) return std_logic_vector is
  begin
    return std_logic_vector(0 - unsigned(x));
  end function;

  function to_sl(b : boolean) return std_logic is
  begin
    if b then
      return '1';
    else
      return '0';
    end if;
  end function;

  function "+"(a : std_logic_vector; b : std_logic_vector) return std_logic_vector is
  begin
    return std_logic_vector(unsigned(a) + unsigned(b));
  end function;

  function "-"(a : std_logic_vector; b : std_logic_vector) return std_logic_vector is
  begin
    return std_logic_vector(unsigned(a) - unsigned(b));
  end function;

end package body rtlforge_support;
)";
    return {"rtlforge_support.vhd", EmissionUnit::Kind::SupportPackage, text};
}

// ---------------------------------------------------------------------------
// Graphviz dot

namespace {

class DotEmitter {
public:
    std::string run(const ElaboratedCircuit& elab) {
        os_ << "digraph " << elab.source->name << " {\n"
            << "  node [shape=box, fontname=\"monospace\"];\n";
        int root = node("circuit " + elab.source->name);
        for (const auto& p : elab.source->ports)
            edge(root, node((p.direction == PortDirection::Input
                                 ? "input "
                                 : "output ") +
                            p.name));
        for (const auto& w : elab.source->wires)
            edge(root, node("signal " + w.name));
        for (const auto& inst : elab.source->instances)
            edge(root, node("instance " + inst.name + " : " +
                            inst.child->name));
        for (const auto& s : elab.source->statements) edge(root, stmt(s));
        os_ << "}\n";
        return os_.str();
    }

private:
    int node(const std::string& label) {
        int id = next_++;
        std::string escaped;
        for (char c : label) {
            if (c == '"' || c == '\\') escaped += '\\';
            escaped += c;
        }
        os_ << "  n" << id << " [label=\"" << escaped << "\"];\n";
        return id;
    }

    void edge(int from, int to) {
        os_ << "  n" << from << " -> n" << to << ";\n";
    }

    int expr(const Expr& e) {
        switch (e.kind) {
        case ExprKind::Lit: return node("lit " + std::to_string(e.value));
        case ExprKind::Ref: return node("ref " + e.name);
        case ExprKind::PortRef:
            return node("ref " + e.name + "." + e.port);
        case ExprKind::Unary: {
            int id = node(e.un_op == UnOp::Not ? "op ~" : "op -");
            edge(id, expr(e.args[0]));
            return id;
        }
        case ExprKind::Binary: {
            int id = node("op " + binop_symbol(e.bin_op));
            edge(id, expr(e.args[0]));
            edge(id, expr(e.args[1]));
            return id;
        }
        case ExprKind::Index: {
            int id = node("index");
            edge(id, expr(e.args[0]));
            edge(id, expr(e.args[1]));
            return id;
        }
        case ExprKind::Field: {
            int id = node("field " + e.name);
            edge(id, expr(e.args[0]));
            return id;
        }
        case ExprKind::Aggregate: {
            int id = node("aggregate");
            for (std::size_t i = 0; i < e.args.size(); ++i) {
                int f = node("field " + e.agg_fields[i]);
                edge(id, f);
                edge(f, expr(e.args[i]));
            }
            return id;
        }
        case ExprKind::Conv: {
            int id = node("conv");
            edge(id, expr(e.args[0]));
            return id;
        }
        }
        return node("?");
    }

    int stmt(const Stmt& s) {
        switch (s.kind) {
        case StmtKind::Assign: {
            int id = node("assign");
            edge(id, expr(s.lhs));
            edge(id, expr(s.rhs));
            return id;
        }
        case StmtKind::If: {
            int id = node("if");
            edge(id, expr(s.rhs));
            int then_id = node("then");
            edge(id, then_id);
            for (const auto& b : s.body) edge(then_id, stmt(b));
            if (s.has_else || !s.else_body.empty()) {
                int else_id = node("else");
                edge(id, else_id);
                for (const auto& b : s.else_body) edge(else_id, stmt(b));
            }
            return id;
        }
        case StmtKind::Case: {
            int id = node("case");
            edge(id, expr(s.rhs));
            for (std::size_t i = 0; i < s.arm_values.size(); ++i) {
                int arm = node("when " + std::to_string(s.arm_values[i]));
                edge(id, arm);
                for (const auto& b : s.arm_bodies[i]) edge(arm, stmt(b));
            }
            if (s.has_default) {
                int d = node("default");
                edge(id, d);
                for (const auto& b : s.default_body) edge(d, stmt(b));
            }
            return id;
        }
        case StmtKind::Sequential:
        case StmtKind::Combinatorial: {
            int id = node(
                (s.kind == StmtKind::Sequential ? "sequential"
                                                : "combinatorial") +
                (s.has_label ? " " + s.label : std::string()));
            for (const auto& b : s.body) edge(id, stmt(b));
            return id;
        }
        case StmtKind::Fsm: {
            int id = node("fsm " + s.label);
            for (const auto& b : s.body) edge(id, stmt(b));
            for (std::size_t i = 0; i < s.state_names.size(); ++i) {
                int st = node("state " + s.state_names[i]);
                edge(id, st);
                for (const auto& b : s.state_bodies[i]) edge(st, stmt(b));
            }
            return id;
        }
        case StmtKind::NextState:
            return node("next_state " + s.label);
        }
        return node("?");
    }

    std::ostringstream os_;
    int next_ = 0;
};

}  // namespace

std::string emit_dot(const ElaboratedCircuit& elab) {
    DotEmitter em;
    return em.run(elab);
}

// ---------------------------------------------------------------------------
// Pretty printer

namespace {

void pretty_stmt(std::ostringstream& os, const Stmt& s, int indent) {
    std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    switch (s.kind) {
    case StmtKind::Assign:
        os << pad << expr_to_string(s.lhs) << " <= " << expr_to_string(s.rhs)
           << "\n";
        return;
    case StmtKind::If:
        os << pad << "if " << expr_to_string(s.rhs) << "\n";
        for (const auto& b : s.body) pretty_stmt(os, b, indent + 1);
        if (s.has_else || !s.else_body.empty()) {
            os << pad << "else\n";
            for (const auto& b : s.else_body) pretty_stmt(os, b, indent + 1);
        }
        return;
    case StmtKind::Case:
        os << pad << "case " << expr_to_string(s.rhs) << "\n";
        for (std::size_t i = 0; i < s.arm_values.size(); ++i) {
            os << pad << "  when " << s.arm_values[i] << "\n";
            for (const auto& b : s.arm_bodies[i])
                pretty_stmt(os, b, indent + 2);
        }
        if (s.has_default) {
            os << pad << "  default\n";
            for (const auto& b : s.default_body)
                pretty_stmt(os, b, indent + 2);
        }
        return;
    case StmtKind::Sequential:
    case StmtKind::Combinatorial:
        os << pad
           << (s.kind == StmtKind::Sequential ? "sequential" : "combinatorial");
        if (s.has_label) os << " " << s.label;
        os << "\n";
        for (const auto& b : s.body) pretty_stmt(os, b, indent + 1);
        return;
    case StmtKind::Fsm:
        os << pad << "fsm " << s.label << "\n";
        for (const auto& b : s.body) pretty_stmt(os, b, indent + 1);
        for (std::size_t i = 0; i < s.state_names.size(); ++i) {
            os << pad << "  state " << s.state_names[i] << "\n";
            for (const auto& b : s.state_bodies[i])
                pretty_stmt(os, b, indent + 2);
        }
        return;
    case StmtKind::NextState:
        os << pad << "next_state " << s.label << "\n";
        return;
    }
}

}  // namespace

std::string pretty(const ElaboratedCircuit& elab) {
    std::ostringstream os;
    const CircuitDef& c = *elab.source;
    os << "circuit " << c.name << "\n";
    for (std::size_t i = 0; i < c.typedef_names.size(); ++i)
        os << "  typedef " << c.typedef_names[i] << " : "
           << type_to_string(c.typedef_types[i]) << "\n";
    for (const auto& p : c.ports)
        os << "  " << (p.direction == PortDirection::Input ? "input " : "output ")
           << p.name << " : " << type_to_string(p.type) << "\n";
    for (const auto& w : c.wires)
        os << "  signal " << w.name << " : " << type_to_string(w.type) << "\n";
    for (const auto& inst : c.instances)
        os << "  instance " << inst.name << " : " << inst.child->name << "\n";
    for (const auto& s : c.statements) pretty_stmt(os, s, 1);
    return os.str();
}

}  // namespace rtlforge
