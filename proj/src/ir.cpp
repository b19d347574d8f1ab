#include "rtlforge/ir.hpp"

#include <bit>
#include <sstream>

namespace rtlforge {

int literal_width(std::uint64_t value) {
    if (value <= 1) return 1;
    return std::bit_width(value);
}

std::optional<TypeDesc> builtin_type(const std::string& name) {
    if (name == "bit") return TypeDesc::bit();
    if (name == "byte") return TypeDesc::bv(8);
    auto widthed = [&](const std::string& prefix) -> std::optional<int> {
        if (name.size() <= prefix.size() || name.compare(0, prefix.size(), prefix) != 0)
            return std::nullopt;
        int w = 0;
        for (std::size_t i = prefix.size(); i < name.size(); ++i) {
            char c = name[i];
            if (c < '0' || c > '9') return std::nullopt;
            w = w * 10 + (c - '0');
            if (w > 1 << 20) return std::nullopt;
        }
        return w >= 1 ? std::optional<int>(w) : std::nullopt;
    };
    if (auto w = widthed("bv")) return TypeDesc::bv(*w);
    if (auto w = widthed("uint")) return TypeDesc::uint_t(*w);
    if (auto w = widthed("int")) return TypeDesc::int_t(*w);
    return std::nullopt;
}

std::string type_to_string(const TypeDesc& t) {
    std::ostringstream os;
    switch (t.kind) {
    case TypeKind::Bit: os << "bit"; break;
    case TypeKind::BitVector: os << "bv" << t.width; break;
    case TypeKind::Unsigned: os << "uint" << t.width; break;
    case TypeKind::Signed: os << "int" << t.width; break;
    case TypeKind::RUInt: os << "ruint" << t.width; break;
    case TypeKind::Alias: os << t.alias_name; break;
    case TypeKind::Record:
        os << "record{";
        for (std::size_t i = 0; i < t.field_names.size(); ++i) {
            if (i) os << ",";
            os << t.field_names[i] << ":" << type_to_string(t.field_types[i]);
        }
        os << "}";
        break;
    case TypeKind::Array:
        os << "array(" << t.length << "," << type_to_string(t.element[0]) << ")";
        break;
    }
    return os.str();
}

bool is_comparison(BinOp op) {
    switch (op) {
    case BinOp::Eq:
    case BinOp::Neq:
    case BinOp::Lt:
    case BinOp::Gt:
    case BinOp::Le:
    case BinOp::Ge:
        return true;
    default:
        return false;
    }
}

bool is_arith(BinOp op) { return op == BinOp::Add || op == BinOp::Sub; }

bool is_bitwise(BinOp op) {
    return op == BinOp::And || op == BinOp::Or || op == BinOp::Xor;
}

std::string binop_symbol(BinOp op) {
    switch (op) {
    case BinOp::And: return "&";
    case BinOp::Or: return "|";
    case BinOp::Xor: return "^";
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Eq: return "==";
    case BinOp::Neq: return "!=";
    case BinOp::Lt: return "<";
    case BinOp::Gt: return ">";
    case BinOp::Le: return "<=";
    case BinOp::Ge: return ">=";
    }
    return "?";
}

std::optional<BinOp> binop_from_symbol(const std::string& s) {
    if (s == "&") return BinOp::And;
    if (s == "|") return BinOp::Or;
    if (s == "^") return BinOp::Xor;
    if (s == "+") return BinOp::Add;
    if (s == "-") return BinOp::Sub;
    if (s == "==") return BinOp::Eq;
    if (s == "!=") return BinOp::Neq;
    if (s == "<") return BinOp::Lt;
    if (s == ">") return BinOp::Gt;
    if (s == "<=") return BinOp::Le;
    if (s == ">=") return BinOp::Ge;
    return std::nullopt;
}

std::string expr_to_string(const Expr& e) {
    std::ostringstream os;
    switch (e.kind) {
    case ExprKind::Lit: os << e.value; break;
    case ExprKind::Ref: os << e.name; break;
    case ExprKind::PortRef: os << e.name << '.' << e.port; break;
    case ExprKind::Unary:
        os << (e.un_op == UnOp::Not ? "~" : "-") << expr_to_string(e.args[0]);
        break;
    case ExprKind::Binary:
        os << '(' << expr_to_string(e.args[0]) << ' ' << binop_symbol(e.bin_op)
           << ' ' << expr_to_string(e.args[1]) << ')';
        break;
    case ExprKind::Index:
        os << expr_to_string(e.args[0]) << '[' << expr_to_string(e.args[1]) << ']';
        break;
    case ExprKind::Field:
        os << expr_to_string(e.args[0]) << '.' << e.name;
        break;
    case ExprKind::Aggregate:
        os << '{';
        for (std::size_t i = 0; i < e.agg_fields.size(); ++i) {
            if (i) os << ", ";
            os << e.agg_fields[i] << ": " << expr_to_string(e.args[i]);
        }
        os << '}';
        break;
    case ExprKind::Conv: {
        const char* fn = "resize";
        switch (e.conv) {
        case ConvKind::ResizeTo: fn = "resize"; break;
        case ConvKind::ToUnsigned: fn = "unsigned"; break;
        case ConvKind::ToSigned: fn = "signed"; break;
        case ConvKind::BitToUint: fn = "to_uint"; break;
        }
        os << fn << '(' << expr_to_string(e.args[0]);
        if (e.conv != ConvKind::ToSigned && e.conv != ConvKind::ToUnsigned)
            os << ',' << e.conv_width;
        os << ')';
        break;
    }
    }
    return os.str();
}

bool InstanceDecl::operator==(const InstanceDecl& o) const {
    if (name != o.name) return false;
    if (child == o.child) return true;
    if (!child || !o.child) return false;
    return *child == *o.child;
}

const PortDecl* CircuitDef::find_port(const std::string& n) const {
    for (const auto& p : ports)
        if (p.name == n) return &p;
    return nullptr;
}

const WireDecl* CircuitDef::find_wire(const std::string& n) const {
    for (const auto& w : wires)
        if (w.name == n) return &w;
    return nullptr;
}

const InstanceDecl* CircuitDef::find_instance(const std::string& n) const {
    for (const auto& i : instances)
        if (i.name == n) return &i;
    return nullptr;
}

const TypeDesc* CircuitDef::find_typedef(const std::string& n) const {
    for (std::size_t i = 0; i < typedef_names.size(); ++i)
        if (typedef_names[i] == n) return &typedef_types[i];
    return nullptr;
}

}  // namespace rtlforge
