#include "rtlforge/typesys.hpp"

#include <algorithm>

namespace rtlforge {

std::optional<TypeDesc> resolve_type(const TypeDesc& t, const CircuitDef& circuit) {
    // Alias chains resolve in at most typedef-count steps; anything longer
    // is a cycle that slipped past construction.
    const std::size_t limit = circuit.typedef_names.size() + 1;
    TypeDesc cur = t;
    std::size_t steps = 0;
    while (cur.kind == TypeKind::Alias) {
        if (++steps > limit) return std::nullopt;
        if (auto b = builtin_type(cur.alias_name)) {
            cur = *b;
            continue;
        }
        const TypeDesc* td = circuit.find_typedef(cur.alias_name);
        if (!td) return std::nullopt;
        cur = *td;
    }
    if (cur.kind == TypeKind::Record) {
        for (auto& ft : cur.field_types) {
            auto r = resolve_type(ft, circuit);
            if (!r) return std::nullopt;
            ft = *r;
        }
    } else if (cur.kind == TypeKind::Array) {
        auto r = resolve_type(cur.element[0], circuit);
        if (!r) return std::nullopt;
        cur.element[0] = *r;
    }
    return cur;
}

int width_of(const TypeDesc& t) {
    switch (t.kind) {
    case TypeKind::Bit:
        return 1;
    case TypeKind::BitVector:
    case TypeKind::Unsigned:
    case TypeKind::Signed:
    case TypeKind::RUInt:
        return t.width;
    case TypeKind::Record: {
        int sum = 0;
        for (const auto& f : t.field_types) sum += width_of(f);
        return sum;
    }
    case TypeKind::Array:
        return t.length * width_of(t.element[0]);
    case TypeKind::Alias:
        return 0;  // callers must resolve first
    }
    return 0;
}

Expr fold_constants(const Expr& e) {
    Expr out = e;
    for (auto& a : out.args) a = fold_constants(a);
    if (out.kind != ExprKind::Binary) return out;
    const Expr& l = out.args[0];
    const Expr& r = out.args[1];
    if (l.kind != ExprKind::Lit || r.kind != ExprKind::Lit) return out;
    switch (out.bin_op) {
    case BinOp::Add: return Expr::lit(l.value + r.value);
    case BinOp::Sub:
        if (l.value < r.value) return out;  // would go negative, keep symbolic
        return Expr::lit(l.value - r.value);
    case BinOp::And: return Expr::lit(l.value & r.value);
    case BinOp::Or: return Expr::lit(l.value | r.value);
    case BinOp::Xor: return Expr::lit(l.value ^ r.value);
    case BinOp::Eq: return Expr::lit(l.value == r.value ? 1 : 0);
    case BinOp::Neq: return Expr::lit(l.value != r.value ? 1 : 0);
    case BinOp::Lt: return Expr::lit(l.value < r.value ? 1 : 0);
    case BinOp::Gt: return Expr::lit(l.value > r.value ? 1 : 0);
    case BinOp::Le: return Expr::lit(l.value <= r.value ? 1 : 0);
    case BinOp::Ge: return Expr::lit(l.value >= r.value ? 1 : 0);
    }
    return out;
}

std::vector<std::pair<ConvKind, int>> CoercionPlan::conversions() const {
    std::vector<std::pair<ConvKind, int>> out;
    auto walk = [&](const Expr& e, auto&& self) -> void {
        if (e.kind == ExprKind::Conv) out.push_back({e.conv, e.conv_width});
        for (const auto& a : e.args) self(a, self);
    };
    walk(rewritten, walk);
    return out;
}

namespace {

bool is_scalar(const TypeDesc& t) {
    switch (t.kind) {
    case TypeKind::Bit:
    case TypeKind::BitVector:
    case TypeKind::Unsigned:
    case TypeKind::Signed:
    case TypeKind::RUInt:
        return true;
    default:
        return false;
    }
}

class Checker {
public:
    explicit Checker(const TypeLookup& lookup) : lookup_(lookup) {}

    std::optional<Diagnostic> error;

    std::optional<TypeDesc> natural(const Expr& e) {
        switch (e.kind) {
        case ExprKind::Lit:
            return TypeDesc::ruint(e.lit_width);
        case ExprKind::Ref:
        case ExprKind::PortRef: {
            auto t = lookup_(e);
            if (!t) {
                fail("unknown-name", "unresolved reference '" + expr_to_string(e) + "'");
                return std::nullopt;
            }
            return t;
        }
        case ExprKind::Unary: {
            auto t = natural(e.args[0]);
            if (!t) return std::nullopt;
            if (e.un_op == UnOp::Neg) return TypeDesc::int_t(width_of(*t) + 1);
            return t;
        }
        case ExprKind::Binary: {
            if (is_comparison(e.bin_op)) return TypeDesc::bit();
            auto l = natural(e.args[0]);
            auto r = natural(e.args[1]);
            if (!l || !r) return std::nullopt;
            int w = std::max(width_of(*l), width_of(*r));
            if (l->kind == TypeKind::Signed || r->kind == TypeKind::Signed)
                return TypeDesc::int_t(w);
            return TypeDesc::uint_t(w);
        }
        case ExprKind::Index: {
            auto base = natural(e.args[0]);
            if (!base) return std::nullopt;
            if (base->kind == TypeKind::Array) {
                if (e.args[1].kind == ExprKind::Lit &&
                    e.args[1].value >= static_cast<std::uint64_t>(base->length)) {
                    fail("index-range",
                         "index " + std::to_string(e.args[1].value) +
                             " out of range for array of length " +
                             std::to_string(base->length));
                    return std::nullopt;
                }
                return base->element[0];
            }
            if (is_scalar(*base) && base->kind != TypeKind::Bit) {
                if (e.args[1].kind != ExprKind::Lit) {
                    fail("structural", "bit-vector index must be a constant");
                    return std::nullopt;
                }
                if (e.args[1].value >= static_cast<std::uint64_t>(base->width)) {
                    fail("index-range",
                         "bit index " + std::to_string(e.args[1].value) +
                             " out of range for width " + std::to_string(base->width));
                    return std::nullopt;
                }
                return TypeDesc::bit();
            }
            fail("structural", "index applied to a non-indexable type");
            return std::nullopt;
        }
        case ExprKind::Field: {
            auto base = natural(e.args[0]);
            if (!base) return std::nullopt;
            if (base->kind != TypeKind::Record) {
                fail("structural", "field select on a non-record type");
                return std::nullopt;
            }
            for (std::size_t i = 0; i < base->field_names.size(); ++i)
                if (base->field_names[i] == e.name) return base->field_types[i];
            fail("unknown-name", "record has no field '" + e.name + "'");
            return std::nullopt;
        }
        default:
            fail("structural", "expression not allowed here");
            return std::nullopt;
        }
    }

    // Coerces `e` into a numeric context of width W. `signed_ctx` wraps
    // resized unsigned operands in to-signed; `bit_target` marks a Bit
    // assignment target (logical, not numeric).
    std::optional<Expr> fit(const Expr& e, int W, bool signed_ctx, bool bit_target) {
        switch (e.kind) {
        case ExprKind::Lit: {
            if (e.lit_width > W) {
                fail("literal-too-wide",
                     "literal " + std::to_string(e.value) + " (ruint" +
                         std::to_string(e.lit_width) + ") does not fit width " +
                         std::to_string(W));
                return std::nullopt;
            }
            Expr out = e;
            if (!bit_target) out = Expr::convert(ConvKind::ResizeTo, W, out);
            if (signed_ctx) out = Expr::convert(ConvKind::ToSigned, W, out);
            return out;
        }
        case ExprKind::Ref:
        case ExprKind::PortRef:
        case ExprKind::Index:
        case ExprKind::Field: {
            auto t = natural(e);
            if (!t) return std::nullopt;
            if (!is_scalar(*t)) {
                fail("structural", "composite value used in a numeric context");
                return std::nullopt;
            }
            return fit_scalar(e, *t, W, signed_ctx);
        }
        case ExprKind::Unary: {
            if (e.un_op == UnOp::Neg) {
                if (!signed_ctx) {
                    fail("structural", "negation requires a signed target");
                    return std::nullopt;
                }
                auto inner = fit(e.args[0], W, true, false);
                if (!inner) return std::nullopt;
                return Expr::unary(UnOp::Neg, *inner);
            }
            auto inner = fit(e.args[0], W, false, bit_target);
            if (!inner) return std::nullopt;
            Expr out = Expr::unary(UnOp::Not, *inner);
            if (signed_ctx) out = Expr::convert(ConvKind::ToSigned, W, out);
            return out;
        }
        case ExprKind::Binary: {
            if (is_comparison(e.bin_op)) {
                auto c = condition(e);
                if (!c) return std::nullopt;
                Expr out = *c;
                if (!bit_target) out = Expr::convert(ConvKind::ResizeTo, W, out);
                return out;
            }
            if (is_arith(e.bin_op)) {
                if (bit_target) {
                    fail("arithmetic-into-bit",
                         "result of " + binop_symbol(e.bin_op) +
                             " cannot be assigned to a bit target");
                    return std::nullopt;
                }
                auto check_operand = [&](const Expr& op) -> std::optional<Expr> {
                    auto t = natural(op);
                    if (!t) return std::nullopt;
                    int w = width_of(*t);
                    if (w > W) {
                        if (op.kind == ExprKind::Lit)
                            fail("literal-too-wide",
                                 "literal operand needs " + std::to_string(w) +
                                     " bits but target has " + std::to_string(W));
                        else
                            fail("operand-too-wide",
                                 "operand '" + expr_to_string(op) + "' is " +
                                     std::to_string(w) + " bits wide, target is " +
                                     std::to_string(W));
                        return std::nullopt;
                    }
                    return fit(op, W, signed_ctx, false);
                };
                auto l = check_operand(e.args[0]);
                if (!l) return std::nullopt;
                auto r = check_operand(e.args[1]);
                if (!r) return std::nullopt;
                return Expr::binary(e.bin_op, *l, *r);
            }
            // Bitwise: equal operand widths after literal coercion.
            return fit_bitwise(e, W, signed_ctx, bit_target);
        }
        default:
            fail("structural", "expression not allowed in an assignment");
            return std::nullopt;
        }
    }

    std::optional<Expr> condition(const Expr& e) {
        if (e.kind == ExprKind::Binary && is_comparison(e.bin_op)) {
            const Expr& l = e.args[0];
            const Expr& r = e.args[1];
            // A lone single-bit signal compared to literal 0/1 becomes an
            // unsigned integer of size 1.
            if (auto c = bit_vs_literal(e, l, r, /*swap=*/false)) return c;
            if (auto c = bit_vs_literal(e, r, l, /*swap=*/true)) return c;
            if (error) return std::nullopt;
            if (l.kind == ExprKind::Lit || r.kind == ExprKind::Lit) {
                const Expr& lit = l.kind == ExprKind::Lit ? l : r;
                const Expr& sig = l.kind == ExprKind::Lit ? r : l;
                auto t = natural(sig);
                if (!t) return std::nullopt;
                int w = width_of(*t);
                if (lit.lit_width > w) {
                    fail("literal-too-wide",
                         "comparison literal " + std::to_string(lit.value) +
                             " does not fit operand width " + std::to_string(w));
                    return std::nullopt;
                }
                Expr coerced = Expr::convert(ConvKind::ResizeTo, w, lit);
                if (t->kind == TypeKind::Signed)
                    coerced = Expr::convert(ConvKind::ToSigned, w, coerced);
                Expr lhs = l.kind == ExprKind::Lit ? coerced : sig;
                Expr rhs = l.kind == ExprKind::Lit ? sig : coerced;
                return Expr::binary(e.bin_op, lhs, rhs);
            }
            auto lt = natural(l);
            auto rt = natural(r);
            if (!lt || !rt) return std::nullopt;
            if (width_of(*lt) != width_of(*rt)) {
                fail("width-mismatch",
                     "comparison operands have widths " +
                         std::to_string(width_of(*lt)) + " and " +
                         std::to_string(width_of(*rt)));
                return std::nullopt;
            }
            return e;
        }
        if (e.kind == ExprKind::Binary && is_bitwise(e.bin_op)) {
            auto l = condition(e.args[0]);
            if (!l) return std::nullopt;
            auto r = condition(e.args[1]);
            if (!r) return std::nullopt;
            return Expr::binary(e.bin_op, *l, *r);
        }
        if (e.kind == ExprKind::Unary && e.un_op == UnOp::Not) {
            auto inner = condition(e.args[0]);
            if (!inner) return std::nullopt;
            return Expr::unary(UnOp::Not, *inner);
        }
        if (e.kind == ExprKind::Lit) {
            if (e.value > 1) {
                fail("width-mismatch", "condition literal must be 0 or 1");
                return std::nullopt;
            }
            return e;
        }
        auto t = natural(e);
        if (!t) return std::nullopt;
        if (width_of(*t) != 1) {
            fail("width-mismatch",
                 "condition must be a comparison or a single-bit expression");
            return std::nullopt;
        }
        return e;
    }

private:
    std::optional<Expr> bit_vs_literal(const Expr& cmp, const Expr& sig,
                                       const Expr& lit, bool swap) {
        if (lit.kind != ExprKind::Lit || lit.value > 1) return std::nullopt;
        if (sig.kind != ExprKind::Ref && sig.kind != ExprKind::PortRef &&
            sig.kind != ExprKind::Index && sig.kind != ExprKind::Field)
            return std::nullopt;
        auto t = natural(sig);
        if (!t) return std::nullopt;
        if (t->kind != TypeKind::Bit) return std::nullopt;
        Expr conv = Expr::convert(ConvKind::BitToUint, 1, sig);
        if (swap) return Expr::binary(cmp.bin_op, lit, conv);
        return Expr::binary(cmp.bin_op, conv, lit);
    }

    std::optional<Expr> fit_scalar(const Expr& e, const TypeDesc& t, int W,
                                   bool signed_ctx) {
        int w = width_of(t);
        if (w > W) {
            fail("operand-too-wide",
                 "'" + expr_to_string(e) + "' is " + std::to_string(w) +
                     " bits wide, target is " + std::to_string(W));
            return std::nullopt;
        }
        Expr out = e;
        if (w < W) out = Expr::convert(ConvKind::ResizeTo, W, out);
        if (signed_ctx && t.kind != TypeKind::Signed)
            out = Expr::convert(ConvKind::ToSigned, W, out);
        else if (!signed_ctx && t.kind == TypeKind::Signed)
            out = Expr::convert(ConvKind::ToUnsigned, W, out);
        return out;
    }

    std::optional<Expr> fit_bitwise(const Expr& e, int W, bool signed_ctx,
                                    bool bit_target) {
        const Expr& l = e.args[0];
        const Expr& r = e.args[1];
        const bool llit = l.kind == ExprKind::Lit;
        const bool rlit = r.kind == ExprKind::Lit;
        int rw = 0;  // operand/result width
        std::optional<Expr> lf, rf;
        if (llit != rlit) {
            const Expr& lit = llit ? l : r;
            const Expr& sig = llit ? r : l;
            auto t = natural(sig);
            if (!t) return std::nullopt;
            rw = width_of(*t);
            if (lit.lit_width > rw) {
                fail("literal-too-wide",
                     "literal " + std::to_string(lit.value) +
                         " does not fit operand width " + std::to_string(rw));
                return std::nullopt;
            }
            auto litf = fit(lit, rw, false, rw == 1 && t->kind == TypeKind::Bit);
            auto sigf = fit(sig, rw, false, false);
            if (!litf || !sigf) return std::nullopt;
            lf = llit ? litf : sigf;
            rf = llit ? sigf : litf;
        } else {
            auto lt = natural(l);
            auto rt = natural(r);
            if (!lt || !rt) return std::nullopt;
            if (width_of(*lt) != width_of(*rt)) {
                fail("width-mismatch",
                     "bitwise operands have widths " + std::to_string(width_of(*lt)) +
                         " and " + std::to_string(width_of(*rt)));
                return std::nullopt;
            }
            rw = width_of(*lt);
            lf = fit(l, rw, false, lt->kind == TypeKind::Bit);
            rf = fit(r, rw, false, rt->kind == TypeKind::Bit);
            if (!lf || !rf) return std::nullopt;
        }
        if (rw > W) {
            fail("operand-too-wide",
                 "bitwise result is " + std::to_string(rw) +
                     " bits wide, target is " + std::to_string(W));
            return std::nullopt;
        }
        Expr out = Expr::binary(e.bin_op, *lf, *rf);
        if (rw < W && !bit_target) out = Expr::convert(ConvKind::ResizeTo, W, out);
        if (signed_ctx) out = Expr::convert(ConvKind::ToSigned, W, out);
        return out;
    }

    void fail(std::string rule, std::string message) {
        if (!error)
            error = Diagnostic{Severity::Error, std::move(rule), "", std::move(message)};
    }

    const TypeLookup& lookup_;
};

CheckResult failure(std::optional<Diagnostic> d) {
    CheckResult r;
    r.diagnostic = d ? d
                     : Diagnostic{Severity::Error, "structural", "",
                                  "type analysis failed"};
    return r;
}

}  // namespace

std::optional<TypeDesc> natural_type(const Expr& e, const TypeLookup& lookup) {
    Checker chk(lookup);
    return chk.natural(e);
}

CheckResult check_assign(const TypeDesc& lhs_type, const Expr& rhs,
                         const TypeLookup& lookup) {
    Checker chk(lookup);
    CheckResult res;
    if (lhs_type.kind == TypeKind::Alias) {
        res.diagnostic = Diagnostic{Severity::Error, "internal", "",
                                    "unresolved alias reached the type checker"};
        return res;
    }

    if (lhs_type.kind == TypeKind::Record) {
        if (rhs.kind == ExprKind::Aggregate) {
            // Field-by-field, matched by name, all fields required.
            std::vector<Expr> values(lhs_type.field_names.size());
            std::vector<bool> seen(lhs_type.field_names.size(), false);
            for (std::size_t i = 0; i < rhs.agg_fields.size(); ++i) {
                auto it = std::find(lhs_type.field_names.begin(),
                                    lhs_type.field_names.end(), rhs.agg_fields[i]);
                if (it == lhs_type.field_names.end()) {
                    res.diagnostic = Diagnostic{
                        Severity::Error, "unknown-name", "",
                        "record has no field '" + rhs.agg_fields[i] + "'"};
                    return res;
                }
                std::size_t idx = it - lhs_type.field_names.begin();
                auto sub = check_assign(lhs_type.field_types[idx], rhs.args[i], lookup);
                if (!sub.ok()) return sub;
                values[idx] = sub.plan->rewritten;
                seen[idx] = true;
            }
            for (std::size_t i = 0; i < seen.size(); ++i) {
                if (!seen[i]) {
                    res.diagnostic =
                        Diagnostic{Severity::Error, "missing-field", "",
                                   "aggregate misses field '" +
                                       lhs_type.field_names[i] + "'"};
                    return res;
                }
            }
            res.plan = CoercionPlan{
                Expr::aggregate(lhs_type.field_names, std::move(values)), lhs_type,
                width_of(lhs_type)};
            return res;
        }
        auto t = chk.natural(rhs);
        if (t && *t == lhs_type) {
            res.plan = CoercionPlan{rhs, lhs_type, width_of(lhs_type)};
            return res;
        }
        return failure(chk.error
                           ? chk.error
                           : std::optional<Diagnostic>(Diagnostic{
                                 Severity::Error, "width-mismatch", "",
                                 "record target requires an aggregate or a "
                                 "signal of the same record type"}));
    }

    if (lhs_type.kind == TypeKind::Array) {
        auto t = chk.natural(rhs);
        if (t && *t == lhs_type) {
            res.plan = CoercionPlan{rhs, lhs_type, width_of(lhs_type)};
            return res;
        }
        return failure(chk.error
                           ? chk.error
                           : std::optional<Diagnostic>(Diagnostic{
                                 Severity::Error, "width-mismatch", "",
                                 "array target requires a signal of the same "
                                 "array type"}));
    }

    const int W = width_of(lhs_type);
    Expr folded = fold_constants(rhs);
    auto fitted = chk.fit(folded, W, lhs_type.kind == TypeKind::Signed,
                          lhs_type.kind == TypeKind::Bit);
    if (!fitted) return failure(chk.error);
    res.plan = CoercionPlan{std::move(*fitted), lhs_type, W};
    return res;
}

CheckResult check_condition(const Expr& cond, const TypeLookup& lookup) {
    Checker chk(lookup);
    Expr folded = fold_constants(cond);
    auto c = chk.condition(folded);
    if (!c) return failure(chk.error);
    CheckResult res;
    res.plan = CoercionPlan{std::move(*c), TypeDesc::bit(), 1};
    return res;
}

}  // namespace rtlforge
