#include "rtlforge/sexpir.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

#include "rtlforge/builder.hpp"
#include "rtlforge/typesys.hpp"

namespace rtlforge {

const SexpNode* SexpNode::find_form(const std::string& head) const {
    for (const auto& c : children) {
        if (c.is_list && !c.children.empty() && !c.children[0].is_list &&
            c.children[0].atom == head)
            return &c;
    }
    return nullptr;
}

// ---------------------------------------------------------------------------
// Parser

namespace {

bool is_atom_char(char c) {
    return !std::isspace(static_cast<unsigned char>(c)) && c != '(' && c != ')' &&
           c != ';';
}

struct Token {
    enum class Kind { LParen, RParen, Atom, End } kind;
    std::string text;
    int line;
    int col;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : text_(text) {}

    Token next() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '\n') {
                ++line_;
                col_ = 1;
                ++pos_;
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else if (c == ';') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else if (c == '(') {
                Token t{Token::Kind::LParen, "(", line_, col_};
                advance();
                return t;
            } else if (c == ')') {
                Token t{Token::Kind::RParen, ")", line_, col_};
                advance();
                return t;
            } else {
                Token t{Token::Kind::Atom, "", line_, col_};
                while (pos_ < text_.size() && is_atom_char(text_[pos_])) {
                    t.text += text_[pos_];
                    advance();
                }
                return t;
            }
        }
        return {Token::Kind::End, "", line_, col_};
    }

private:
    void advance() {
        ++pos_;
        ++col_;
    }
    const std::string& text_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

std::string at(int line, int col) {
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

std::optional<SexpNode> sexp_parse(const std::string& text, DiagnosticList& diags) {
    Lexer lex(text);
    // Explicit stack of open lists; no recursion.
    std::vector<SexpNode> stack;
    std::vector<std::pair<int, int>> open_at;
    std::optional<SexpNode> result;

    for (;;) {
        Token t = lex.next();
        switch (t.kind) {
        case Token::Kind::End:
            if (!stack.empty()) {
                diags.error("parse", at(open_at.back().first, open_at.back().second),
                            "unbalanced parenthesis: list is never closed");
                return std::nullopt;
            }
            if (!result) {
                diags.error("parse", at(t.line, t.col), "empty input");
                return std::nullopt;
            }
            return result;
        case Token::Kind::LParen:
            if (result && stack.empty()) {
                diags.error("parse", at(t.line, t.col),
                            "more than one top-level form");
                return std::nullopt;
            }
            stack.push_back(SexpNode::make_list());
            open_at.push_back({t.line, t.col});
            break;
        case Token::Kind::RParen: {
            if (stack.empty()) {
                diags.error("parse", at(t.line, t.col),
                            "unbalanced parenthesis: stray ')'");
                return std::nullopt;
            }
            SexpNode done = std::move(stack.back());
            stack.pop_back();
            open_at.pop_back();
            if (stack.empty())
                result = std::move(done);
            else
                stack.back().children.push_back(std::move(done));
            break;
        }
        case Token::Kind::Atom:
            if (stack.empty()) {
                if (result) {
                    diags.error("parse", at(t.line, t.col),
                                "stray token '" + t.text + "' after the top form");
                    return std::nullopt;
                }
                result = SexpNode::make_atom(t.text);
            } else {
                stack.back().children.push_back(SexpNode::make_atom(t.text));
            }
            break;
        }
    }
}

// ---------------------------------------------------------------------------
// Printer

namespace {

// Block forms get one child per line; everything else prints inline.
// Returns the number of header arguments kept on the head line, or -1 for
// non-block forms.
int block_header_args(const SexpNode& n) {
    if (!n.is_list || n.children.empty() || n.children[0].is_list) return -1;
    const std::string& head = n.children[0].atom;
    if (head == "circuit" || head == "sequential" || head == "combinatorial" ||
        head == "if" || head == "case" || head == "when")
        return 1;
    if (head == "then" || head == "else" || head == "default") return 0;
    return -1;
}

void print_inline(const SexpNode& n, std::string& out) {
    if (!n.is_list) {
        out += n.atom;
        return;
    }
    out += '(';
    for (std::size_t i = 0; i < n.children.size(); ++i) {
        if (i) out += ' ';
        print_inline(n.children[i], out);
    }
    out += ')';
}

void print_node(const SexpNode& n, int indent, std::string& out) {
    std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    int header = block_header_args(n);
    if (header < 0) {
        out += pad;
        print_inline(n, out);
        out += '\n';
        return;
    }
    out += pad + '(';
    print_inline(n.children[0], out);
    for (int i = 1; i <= header && i < static_cast<int>(n.children.size()); ++i) {
        out += ' ';
        print_inline(n.children[static_cast<std::size_t>(i)], out);
    }
    out += '\n';
    for (std::size_t i = static_cast<std::size_t>(header) + 1;
         i < n.children.size(); ++i)
        print_node(n.children[i], indent + 1, out);
    out += pad + ")\n";
}

}  // namespace

std::string sexp_print(const SexpNode& node) {
    std::string out;
    print_node(node, 0, out);
    return out;
}

// ---------------------------------------------------------------------------
// Validation and lowering

namespace {

bool is_identifier(const std::string& s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    return std::all_of(s.begin(), s.end(), [](char c) {
        return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
    });
}

bool is_integer(const std::string& s) {
    if (s.empty()) return false;
    std::size_t i = s[0] == '-' ? 1 : 0;
    if (i == s.size()) return false;
    return std::all_of(s.begin() + i, s.end(), [](char c) {
        return std::isdigit(static_cast<unsigned char>(c));
    });
}

const std::string& head_of(const SexpNode& n) {
    static const std::string empty;
    if (!n.is_list || n.children.empty() || n.children[0].is_list) return empty;
    return n.children[0].atom;
}

// Shared grammar walker for validate and lower. `builder` is null during
// pure validation.
class SexpirReader {
public:
    SexpirReader(DiagnosticList& diags, CircuitBuilder* builder)
        : diags_(diags), builder_(builder) {}

    void read_circuit(const SexpNode& n) {
        if (!n.is_list || head_of(n) != "circuit") {
            diags_.error("unknown-form", "sexpir",
                         "top-level form must be (circuit <name> ...)");
            return;
        }
        if (n.children.size() < 2 || n.children[1].is_list ||
            !is_identifier(n.children[1].atom)) {
            diags_.error("arity", "circuit",
                         "circuit needs an identifier name");
            return;
        }
        circuit_ = n.children[1].atom;
        // Declarations first (lowering needs declare-before-use), then
        // statements in their original order.
        for (std::size_t i = 2; i < n.children.size(); ++i) {
            const std::string& h = head_of(n.children[i]);
            if (h == "input" || h == "output" || h == "signal")
                read_decl(n.children[i]);
        }
        for (std::size_t i = 2; i < n.children.size(); ++i) {
            const std::string& h = head_of(n.children[i]);
            if (h == "input" || h == "output" || h == "signal") continue;
            read_stmt(n.children[i]);
        }
    }

private:
    void read_decl(const SexpNode& n) {
        const std::string& h = head_of(n);
        const SexpNode* name = n.find_form("name");
        if (!name || name->children.size() != 2 || name->children[1].is_list ||
            !is_identifier(name->children[1].atom)) {
            diags_.error("missing-field", where(h),
                         h + " declaration needs a (name <identifier>) field");
            return;
        }
        const std::string& sig = name->children[1].atom;

        TypeDesc type;
        if (h == "input" || h == "output") {
            const SexpNode* ty = n.find_form("type");
            if (!ty || ty->children.size() != 2 || ty->children[1].is_list) {
                diags_.error("missing-field", where(sig),
                             h + " declaration needs a (type <name>) field");
                return;
            }
            auto t = builtin_type(ty->children[1].atom);
            if (!t) {
                diags_.error("unresolved-type", where(sig),
                             "unknown type name '" + ty->children[1].atom + "'");
                return;
            }
            if (t->kind == TypeKind::Bit) *t = TypeDesc::bv(1);
            type = *t;
        } else {
            const SexpNode* bs = n.find_form("bits_sign");
            if (!bs || bs->children.size() != 2) {
                diags_.error("missing-field", where(sig),
                             "signal declaration needs a (bits_sign ...) field");
                return;
            }
            const SexpNode& spec = bs->children[1];
            if (!spec.is_list) {
                if (!is_integer(spec.atom) || spec.atom[0] == '-') {
                    diags_.error("non-integer-width", where(sig),
                                 "bits_sign width must be a positive integer");
                    return;
                }
                type = TypeDesc::bv(std::stoi(spec.atom));
            } else if (spec.children.size() == 2 && !spec.children[0].is_list &&
                       is_integer(spec.children[0].atom) &&
                       head_or_atom(spec.children[1]) == "signed") {
                type = TypeDesc::int_t(std::stoi(spec.children[0].atom));
            } else {
                diags_.error("non-integer-width", where(sig),
                             "bits_sign must be an integer or (<width> signed)");
                return;
            }
            if (type.width < 1) {
                diags_.error("non-integer-width", where(sig),
                             "bits_sign width must be >= 1");
                return;
            }
        }

        if (!builder_) return;
        if (h == "input")
            builder_->input(sig, type);
        else if (h == "output")
            builder_->output(sig, type);
        else
            builder_->wire(sig, type);
    }

    void read_stmt(const SexpNode& n) {
        const std::string& h = head_of(n);
        if (h == "assign") {
            if (n.children.size() != 3) {
                diags_.error("arity", where(h), "assign takes a target and a value");
                return;
            }
            auto lhs = read_lvalue(n.children[1]);
            auto rhs = read_expr(n.children[2]);
            if (lhs && rhs && builder_) builder_->assign(*lhs, *rhs);
        } else if (h == "combinatorial" || h == "sequential") {
            if (n.children.size() < 2 || n.children[1].is_list ||
                (n.children[1].atom != "nil" && !is_identifier(n.children[1].atom))) {
                diags_.error("arity", where(h),
                             h + " needs a label identifier or nil");
                return;
            }
            const std::string& label = n.children[1].atom;
            if (builder_) {
                if (h == "sequential")
                    builder_->begin_sequential(label == "nil" ? "anon" : label);
                else if (label == "nil")
                    builder_->begin_combinatorial();
                else
                    builder_->begin_combinatorial(label);
            }
            for (std::size_t i = 2; i < n.children.size(); ++i)
                read_stmt(n.children[i]);
            if (builder_) builder_->end_block();
        } else if (h == "if") {
            if (n.children.size() < 3 || head_of(n.children[2]) != "then") {
                diags_.error("arity", where(h),
                             "if needs a condition and a (then ...) branch");
                return;
            }
            auto cond = read_expr(n.children[1]);
            const SexpNode& then_n = n.children[2];
            const SexpNode* else_n = nullptr;
            if (n.children.size() >= 4) {
                if (head_of(n.children[3]) != "else" || n.children.size() > 4) {
                    diags_.error("arity", where(h),
                                 "if allows only (then ...) and (else ...)");
                    return;
                }
                else_n = &n.children[3];
            }
            if (builder_ && cond) builder_->begin_if(*cond);
            for (std::size_t i = 1; i < then_n.children.size(); ++i)
                read_stmt(then_n.children[i]);
            if (builder_ && cond) builder_->end_block();
            if (else_n) {
                if (builder_ && cond) builder_->begin_else();
                for (std::size_t i = 1; i < else_n->children.size(); ++i)
                    read_stmt(else_n->children[i]);
                if (builder_ && cond) builder_->end_block();
            }
        } else if (h == "case") {
            if (n.children.size() < 2) {
                diags_.error("arity", where(h), "case needs a selector");
                return;
            }
            auto sel = read_expr(n.children[1]);
            if (builder_ && sel) builder_->begin_case(*sel);
            for (std::size_t i = 2; i < n.children.size(); ++i) {
                const SexpNode& arm = n.children[i];
                const std::string& ah = head_of(arm);
                if (ah == "when") {
                    if (arm.children.size() < 2 || arm.children[1].is_list ||
                        !is_integer(arm.children[1].atom) ||
                        arm.children[1].atom[0] == '-') {
                        diags_.error("arity", where("case"),
                                     "when needs a nonnegative integer constant");
                        continue;
                    }
                    if (builder_ && sel)
                        builder_->begin_when(std::stoull(arm.children[1].atom));
                    for (std::size_t j = 2; j < arm.children.size(); ++j)
                        read_stmt(arm.children[j]);
                    if (builder_ && sel) builder_->end_block();
                } else if (ah == "default") {
                    if (builder_ && sel) builder_->begin_default();
                    for (std::size_t j = 1; j < arm.children.size(); ++j)
                        read_stmt(arm.children[j]);
                    if (builder_ && sel) builder_->end_block();
                } else {
                    diags_.error("unknown-form", where("case"),
                                 "case arms must be (when ...) or (default ...)");
                }
            }
            if (builder_ && sel) builder_->end_block();
        } else if (h.empty()) {
            diags_.error("unknown-form", where(""),
                         "statement must be a list with an identifier head");
        } else {
            diags_.error("unknown-form", where(h),
                         "unknown form '" + h + "'");
        }
    }

    std::optional<Expr> read_lvalue(const SexpNode& n) {
        if (!n.is_list) {
            if (!is_identifier(n.atom)) {
                diags_.error("parse", where(""),
                             "assign target must be an identifier");
                return std::nullopt;
            }
            return Expr::ref(n.atom);
        }
        if (head_of(n) == "index" && n.children.size() == 3) {
            auto base = read_lvalue(n.children[1]);
            auto idx = read_expr(n.children[2]);
            if (!base || !idx) return std::nullopt;
            return Expr::index(*base, *idx);
        }
        diags_.error("unknown-form", where(""),
                     "assign target must be an identifier or (index ...)");
        return std::nullopt;
    }

    std::optional<Expr> read_expr(const SexpNode& n) {
        if (!n.is_list) {
            if (is_integer(n.atom)) {
                if (n.atom[0] == '-') {
                    // Negative literal: neg of the magnitude.
                    return Expr::unary(UnOp::Neg,
                                       Expr::lit(std::stoull(n.atom.substr(1))));
                }
                return Expr::lit(std::stoull(n.atom));
            }
            if (is_identifier(n.atom)) return Expr::ref(n.atom);
            diags_.error("parse", where(""),
                         "'" + n.atom + "' is neither an integer nor an identifier");
            return std::nullopt;
        }
        if (n.children.empty() || n.children[0].is_list) {
            diags_.error("unknown-form", where(""),
                         "expression list needs an operator head");
            return std::nullopt;
        }
        const std::string& h = n.children[0].atom;
        if (h == "~") {
            if (n.children.size() != 2) {
                diags_.error("arity", where(h), "~ takes one operand");
                return std::nullopt;
            }
            auto a = read_expr(n.children[1]);
            if (!a) return std::nullopt;
            return Expr::unary(UnOp::Not, *a);
        }
        if (h == "index") {
            if (n.children.size() != 3) {
                diags_.error("arity", where(h), "index takes a base and an index");
                return std::nullopt;
            }
            auto base = read_expr(n.children[1]);
            auto idx = read_expr(n.children[2]);
            if (!base || !idx) return std::nullopt;
            return Expr::index(*base, *idx);
        }
        if (auto op = binop_from_symbol(h)) {
            if (n.children.size() != 3) {
                diags_.error("arity", where(h), h + " takes two operands");
                return std::nullopt;
            }
            auto a = read_expr(n.children[1]);
            auto b = read_expr(n.children[2]);
            if (!a || !b) return std::nullopt;
            return Expr::binary(*op, *a, *b);
        }
        diags_.error("unknown-form", where(h), "unknown form '" + h + "'");
        return std::nullopt;
    }

    static std::string head_or_atom(const SexpNode& n) {
        return n.is_list ? head_of(n) : n.atom;
    }

    std::string where(const std::string& detail) const {
        if (circuit_.empty()) return detail.empty() ? "sexpir" : detail;
        return detail.empty() ? circuit_ : circuit_ + "." + detail;
    }

    DiagnosticList& diags_;
    CircuitBuilder* builder_;
    std::string circuit_;
};

}  // namespace

DiagnosticList sexp_validate(const SexpNode& node) {
    DiagnosticList diags;
    SexpirReader reader(diags, nullptr);
    reader.read_circuit(node);
    return diags;
}

std::shared_ptr<const CircuitDef> lower_to_ir(const SexpNode& node,
                                              DiagnosticList& diags) {
    if (!node.is_list || head_of(node) != "circuit" || node.children.size() < 2 ||
        node.children[1].is_list) {
        SexpirReader reader(diags, nullptr);
        reader.read_circuit(node);
        return nullptr;
    }
    CircuitBuilder builder(node.children[1].atom);
    SexpirReader reader(diags, &builder);
    reader.read_circuit(node);
    auto circuit = builder.finish();
    diags.append(builder.diagnostics());
    if (diags.has_errors()) return nullptr;
    return circuit;
}

// ---------------------------------------------------------------------------
// Emission

namespace {

SexpNode atom(const std::string& s) { return SexpNode::make_atom(s); }
SexpNode list(std::vector<SexpNode> c) { return SexpNode::make_list(std::move(c)); }

std::string port_type_name(const TypeDesc& t) {
    switch (t.kind) {
    case TypeKind::Bit: return "bv1";
    case TypeKind::BitVector: return "bv" + std::to_string(t.width);
    case TypeKind::Unsigned: return "uint" + std::to_string(t.width);
    case TypeKind::Signed: return "int" + std::to_string(t.width);
    default: return "bv" + std::to_string(width_of(t));
    }
}

SexpNode emit_expr(const Expr& e) {
    switch (e.kind) {
    case ExprKind::Lit:
        return atom(std::to_string(e.value));
    case ExprKind::Ref:
        return atom(e.name);
    case ExprKind::PortRef:
        return atom(e.name + "__" + e.port);  // flattened spelling
    case ExprKind::Unary:
        if (e.un_op == UnOp::Neg)
            return list({atom("-"), atom("0"), emit_expr(e.args[0])});
        return list({atom("~"), emit_expr(e.args[0])});
    case ExprKind::Binary:
        return list({atom(binop_symbol(e.bin_op)), emit_expr(e.args[0]),
                     emit_expr(e.args[1])});
    case ExprKind::Index:
        return list({atom("index"), emit_expr(e.args[0]), emit_expr(e.args[1])});
    case ExprKind::Conv:
        return emit_expr(e.args[0]);  // conversions are re-derived on load
    default:
        return atom("0");  // records/arrays have no Sexpir form
    }
}

SexpNode emit_stmt(const Stmt& s) {
    switch (s.kind) {
    case StmtKind::Assign:
        return list({atom("assign"), emit_expr(s.lhs), emit_expr(s.rhs)});
    case StmtKind::If: {
        std::vector<SexpNode> out{atom("if"), emit_expr(s.rhs)};
        std::vector<SexpNode> then_c{atom("then")};
        for (const auto& b : s.body) then_c.push_back(emit_stmt(b));
        out.push_back(list(std::move(then_c)));
        if (s.has_else || !s.else_body.empty()) {
            std::vector<SexpNode> else_c{atom("else")};
            for (const auto& b : s.else_body) else_c.push_back(emit_stmt(b));
            out.push_back(list(std::move(else_c)));
        }
        return list(std::move(out));
    }
    case StmtKind::Case: {
        std::vector<SexpNode> out{atom("case"), emit_expr(s.rhs)};
        for (std::size_t i = 0; i < s.arm_values.size(); ++i) {
            std::vector<SexpNode> arm{atom("when"),
                                      atom(std::to_string(s.arm_values[i]))};
            for (const auto& b : s.arm_bodies[i]) arm.push_back(emit_stmt(b));
            out.push_back(list(std::move(arm)));
        }
        if (s.has_default) {
            std::vector<SexpNode> def{atom("default")};
            for (const auto& b : s.default_body) def.push_back(emit_stmt(b));
            out.push_back(list(std::move(def)));
        }
        return list(std::move(out));
    }
    case StmtKind::Sequential:
    case StmtKind::Combinatorial: {
        std::vector<SexpNode> out{
            atom(s.kind == StmtKind::Sequential ? "sequential" : "combinatorial"),
            atom(s.has_label && !s.label.empty() ? s.label : "nil")};
        for (const auto& b : s.body) out.push_back(emit_stmt(b));
        return list(std::move(out));
    }
    default:
        return list({atom("assign"), atom("0"), atom("0")});  // unreachable
    }
}

}  // namespace

std::string emit_sexpir(const CircuitDef& circuit) {
    std::vector<SexpNode> top{atom("circuit"), atom(circuit.name)};
    for (const auto& p : circuit.ports) {
        auto t = resolve_type(p.type, circuit);
        top.push_back(list(
            {atom(p.direction == PortDirection::Input ? "input" : "output"),
             list({atom("name"), atom(p.name)}),
             list({atom("type"), atom(port_type_name(t ? *t : p.type))})}));
    }
    for (const auto& w : circuit.wires) {
        auto t = resolve_type(w.type, circuit);
        TypeDesc rt = t ? *t : w.type;
        SexpNode width_spec =
            rt.kind == TypeKind::Signed
                ? list({atom(std::to_string(rt.width)), atom("signed")})
                : atom(std::to_string(width_of(rt)));
        top.push_back(list({atom("signal"), list({atom("name"), atom(w.name)}),
                            list({atom("bits_sign"), std::move(width_spec)})}));
    }
    for (const auto& s : circuit.statements) top.push_back(emit_stmt(s));
    return sexp_print(list(std::move(top)));
}

}  // namespace rtlforge
