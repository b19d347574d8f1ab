#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace rtlforge {

// ---------------------------------------------------------------------------
// Types

enum class TypeKind {
    Bit,
    BitVector,
    Unsigned,
    Signed,
    RUInt,  // literal-only, never declarable
    Record,
    Array,
    Alias,
};

struct TypeDesc {
    TypeKind kind = TypeKind::Bit;
    int width = 1;  // BitVector/Unsigned/Signed/RUInt
    int length = 0; // Array
    std::string alias_name;
    // Record fields as parallel vectors (declaration order).
    std::vector<std::string> field_names;
    std::vector<TypeDesc> field_types;
    std::vector<TypeDesc> element;  // Array element, size 1 when kind==Array

    bool operator==(const TypeDesc&) const = default;

    static TypeDesc bit() { return {}; }
    static TypeDesc bv(int w) { return make_width(TypeKind::BitVector, w); }
    static TypeDesc uint_t(int w) { return make_width(TypeKind::Unsigned, w); }
    static TypeDesc int_t(int w) { return make_width(TypeKind::Signed, w); }
    static TypeDesc ruint(int w) { return make_width(TypeKind::RUInt, w); }
    static TypeDesc alias(std::string name) {
        TypeDesc t;
        t.kind = TypeKind::Alias;
        t.alias_name = std::move(name);
        return t;
    }
    static TypeDesc record(std::vector<std::string> names,
                           std::vector<TypeDesc> types) {
        TypeDesc t;
        t.kind = TypeKind::Record;
        t.field_names = std::move(names);
        t.field_types = std::move(types);
        return t;
    }
    static TypeDesc array(int length, TypeDesc elem) {
        TypeDesc t;
        t.kind = TypeKind::Array;
        t.length = length;
        t.element.push_back(std::move(elem));
        return t;
    }

private:
    static TypeDesc make_width(TypeKind k, int w) {
        TypeDesc t;
        t.kind = k;
        t.width = w;
        return t;
    }
};

// Natural width of a nonnegative literal: 1 for 0/1, else floor(log2 v)+1.
int literal_width(std::uint64_t value);

// Built-in alias table: bit, byte, bvN, intN, uintN. Returns nullopt for
// names that are not built-in (caller then consults the typedef table).
std::optional<TypeDesc> builtin_type(const std::string& name);

std::string type_to_string(const TypeDesc& t);

// ---------------------------------------------------------------------------
// Expressions

enum class ExprKind {
    Lit,
    Ref,
    PortRef,
    Unary,
    Binary,
    Index,
    Field,
    Aggregate,
    Conv,  // inserted by type analysis, never by construction
};

enum class UnOp { Not, Neg };
enum class BinOp { And, Or, Xor, Add, Sub, Eq, Neq, Lt, Gt, Le, Ge };

enum class ConvKind { ResizeTo, ToUnsigned, ToSigned, BitToUint };

bool is_comparison(BinOp op);
bool is_arith(BinOp op);
bool is_bitwise(BinOp op);
std::string binop_symbol(BinOp op);
std::optional<BinOp> binop_from_symbol(const std::string& s);

struct Expr {
    ExprKind kind = ExprKind::Lit;
    std::uint64_t value = 0;  // Lit
    int lit_width = 1;        // Lit: RUInt width
    std::string name;         // Ref signal / PortRef instance / Field name
    std::string port;         // PortRef port
    UnOp un_op = UnOp::Not;
    BinOp bin_op = BinOp::And;
    ConvKind conv = ConvKind::ResizeTo;
    int conv_width = 0;
    std::vector<Expr> args;               // children
    std::vector<std::string> agg_fields;  // Aggregate field names, parallel to args

    bool operator==(const Expr&) const = default;

    static Expr lit(std::uint64_t v) {
        Expr e;
        e.kind = ExprKind::Lit;
        e.value = v;
        e.lit_width = literal_width(v);
        return e;
    }
    static Expr ref(std::string signal) {
        Expr e;
        e.kind = ExprKind::Ref;
        e.name = std::move(signal);
        return e;
    }
    static Expr port_ref(std::string instance, std::string port) {
        Expr e;
        e.kind = ExprKind::PortRef;
        e.name = std::move(instance);
        e.port = std::move(port);
        return e;
    }
    static Expr unary(UnOp op, Expr operand) {
        Expr e;
        e.kind = ExprKind::Unary;
        e.un_op = op;
        e.args.push_back(std::move(operand));
        return e;
    }
    static Expr binary(BinOp op, Expr lhs, Expr rhs) {
        Expr e;
        e.kind = ExprKind::Binary;
        e.bin_op = op;
        e.args.push_back(std::move(lhs));
        e.args.push_back(std::move(rhs));
        return e;
    }
    static Expr index(Expr base, Expr idx) {
        Expr e;
        e.kind = ExprKind::Index;
        e.args.push_back(std::move(base));
        e.args.push_back(std::move(idx));
        return e;
    }
    static Expr field(Expr base, std::string field_name) {
        Expr e;
        e.kind = ExprKind::Field;
        e.name = std::move(field_name);
        e.args.push_back(std::move(base));
        return e;
    }
    static Expr aggregate(std::vector<std::string> fields,
                          std::vector<Expr> values) {
        Expr e;
        e.kind = ExprKind::Aggregate;
        e.agg_fields = std::move(fields);
        e.args = std::move(values);
        return e;
    }
    static Expr convert(ConvKind kind, int width, Expr inner) {
        Expr e;
        e.kind = ExprKind::Conv;
        e.conv = kind;
        e.conv_width = width;
        e.args.push_back(std::move(inner));
        return e;
    }
};

std::string expr_to_string(const Expr& e);

// ---------------------------------------------------------------------------
// Statements

enum class StmtKind {
    Assign,
    If,
    Case,
    Sequential,
    Combinatorial,
    Fsm,
    NextState,  // only inside FSM state bodies
};

enum class AssignKind {
    Continuous,  // circuit top level
    Embedded,    // inside sequential/combinatorial/FSM (synchronous in FSM)
    Comb,        // comb_assign inside an FSM state
};

struct Stmt {
    StmtKind kind = StmtKind::Assign;
    AssignKind assign_kind = AssignKind::Continuous;
    Expr lhs;       // Assign
    Expr rhs;       // Assign; If/Case reuse `rhs` as cond/selector
    std::string label;   // Sequential/Combinatorial/Fsm label, NextState target
    bool has_label = false;
    std::vector<Stmt> body;       // If-then / Sequential / Combinatorial body
    std::vector<Stmt> else_body;  // If
    bool has_else = false;
    // Case arms (declaration order).
    std::vector<std::uint64_t> arm_values;
    std::vector<std::vector<Stmt>> arm_bodies;
    std::vector<Stmt> default_body;
    bool has_default = false;
    // Fsm: defaults live in `body`; states as parallel vectors.
    std::vector<std::string> state_names;
    std::vector<std::vector<Stmt>> state_bodies;

    bool operator==(const Stmt&) const = default;
};

// ---------------------------------------------------------------------------
// Circuit

enum class PortDirection { Input, Output };

struct PortDecl {
    std::string name;
    PortDirection direction = PortDirection::Input;
    TypeDesc type;  // Bit when omitted at declaration

    bool operator==(const PortDecl&) const = default;
};

struct WireDecl {
    std::string name;
    TypeDesc type;

    bool operator==(const WireDecl&) const = default;
};

struct CircuitDef;

struct InstanceDecl {
    std::string name;
    std::shared_ptr<const CircuitDef> child;

    bool operator==(const InstanceDecl& o) const;
};

struct CircuitDef {
    std::string name;
    // Typedefs in declaration order (drives VHDL package emission order).
    std::vector<std::string> typedef_names;
    std::vector<TypeDesc> typedef_types;
    std::vector<PortDecl> ports;
    std::vector<WireDecl> wires;
    std::vector<InstanceDecl> instances;
    std::vector<Stmt> statements;

    bool operator==(const CircuitDef&) const = default;

    const PortDecl* find_port(const std::string& n) const;
    const WireDecl* find_wire(const std::string& n) const;
    const InstanceDecl* find_instance(const std::string& n) const;
    const TypeDesc* find_typedef(const std::string& n) const;
};

}  // namespace rtlforge
