#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <random>
#include <sstream>

#include "rtlforge/builtins.hpp"
#include "rtlforge/elaborate.hpp"
#include "rtlforge/flatten.hpp"
#include "rtlforge/sexpir.hpp"

using namespace rtlforge;

namespace {

SexpNode A(const std::string& s) { return SexpNode::make_atom(s); }
SexpNode L(std::vector<SexpNode> c) { return SexpNode::make_list(std::move(c)); }

std::string read_data(const std::string& name) {
    std::ifstream in(std::string(TEST_DATA_DIR) + "/" + name);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// Random well-formed statement trees for the round-trip property.
SexpNode random_expr(std::mt19937& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 4);
    switch (pick(rng)) {
    case 0: return A("sig" + std::to_string(rng() % 4));
    case 1: return A(std::to_string(rng() % 256));
    case 2:
        return L({A("~"), random_expr(rng, depth - 1)});
    case 3:
        return L({A("index"), A("sig" + std::to_string(rng() % 4)),
                  A(std::to_string(rng() % 8))});
    default: {
        static const char* ops[] = {"&", "|", "^", "+", "-", "==", "<", ">="};
        return L({A(ops[rng() % 8]), random_expr(rng, depth - 1),
                  random_expr(rng, depth - 1)});
    }
    }
}

SexpNode random_stmt(std::mt19937& rng, int depth) {
    std::uniform_int_distribution<int> pick(0, depth <= 0 ? 0 : 3);
    switch (pick(rng)) {
    case 1: {
        std::vector<SexpNode> out{A("if"), random_expr(rng, 2),
                                  L({A("then"), random_stmt(rng, depth - 1)})};
        if (rng() % 2)
            out.push_back(L({A("else"), random_stmt(rng, depth - 1)}));
        return L(std::move(out));
    }
    case 2:
        return L({A("case"), A("sig0"),
                  L({A("when"), A("0"), random_stmt(rng, depth - 1)}),
                  L({A("when"), A("1"), random_stmt(rng, depth - 1)}),
                  L({A("default"), random_stmt(rng, depth - 1)})});
    case 3:
        return L({A(rng() % 2 ? "sequential" : "combinatorial"),
                  A("blk" + std::to_string(rng() % 3)),
                  random_stmt(rng, depth - 1), random_stmt(rng, depth - 1)});
    default:
        return L({A("assign"), A("sig" + std::to_string(rng() % 4)),
                  random_expr(rng, 2)});
    }
}

SexpNode random_circuit(std::mt19937& rng) {
    std::vector<SexpNode> out{A("circuit"), A("c")};
    for (int i = 0; i < 4; ++i)
        out.push_back(L({A("signal"),
                         L({A("name"), A("sig" + std::to_string(i))}),
                         L({A("bits_sign"), A(std::to_string(1 + rng() % 8))})}));
    int n = 1 + static_cast<int>(rng() % 4);
    for (int i = 0; i < n; ++i) out.push_back(random_stmt(rng, 3));
    return L(std::move(out));
}

}  // namespace

TEST_CASE("parser: atoms, nesting, comments") {
    DiagnosticList diags;
    auto n = sexp_parse("(a (b 12) ;; trailing comment\n c)", diags);
    REQUIRE(n);
    CHECK(diags.empty());
    REQUIRE(n->is_list);
    REQUIRE(n->children.size() == 3);
    CHECK(n->children[0].atom == "a");
    CHECK(n->children[1].children[1].atom == "12");
    CHECK(n->children[2].atom == "c");
}

TEST_CASE("parser: error cases carry positions") {
    DiagnosticList d1;
    CHECK(!sexp_parse("(a (b)", d1));
    CHECK(to_text(d1).find("never closed") != std::string::npos);

    DiagnosticList d2;
    CHECK(!sexp_parse("(a)) ", d2));
    CHECK(to_text(d2).find("stray") != std::string::npos);

    DiagnosticList d3;
    CHECK(!sexp_parse("  ;; only a comment\n", d3));
    CHECK(to_text(d3).find("empty input") != std::string::npos);

    DiagnosticList d4;
    CHECK(!sexp_parse("(a) (b)", d4));
    CHECK(d4.has_errors());
}

TEST_CASE("printer: canonical block layout") {
    DiagnosticList diags;
    auto n = sexp_parse("(circuit c (signal (name s) (bits_sign 2)) "
                        "(combinatorial nil (assign s 1)))",
                        diags);
    REQUIRE(n);
    CHECK(sexp_print(*n) ==
          "(circuit c\n"
          "  (signal (name s) (bits_sign 2))\n"
          "  (combinatorial nil\n"
          "    (assign s 1)\n"
          "  )\n"
          ")\n");
}

TEST_CASE("parse of print is the identity on random trees") {
    std::mt19937 rng(7);
    for (int i = 0; i < 100; ++i) {
        SexpNode t = random_circuit(rng);
        DiagnosticList diags;
        auto back = sexp_parse(sexp_print(t), diags);
        REQUIRE(back);
        CHECK(*back == t);
    }
}

TEST_CASE("print of parse is the identity on canonical text") {
    std::string text = read_data("uart.sexp");
    DiagnosticList diags;
    auto n = sexp_parse(text, diags);
    REQUIRE(n);
    auto n2 = sexp_parse(sexp_print(*n), diags);
    REQUIRE(n2);
    CHECK(*n2 == *n);
}

TEST_CASE("validate: grammar violations are reported") {
    DiagnosticList diags;
    auto bad = sexp_parse("(circuit c (signal (bits_sign 4)))", diags);
    REQUIRE(bad);
    auto v1 = sexp_validate(*bad);
    CHECK(v1.contains_rule("missing-field"));

    auto bad2 = sexp_parse("(circuit c (signal (name s) (bits_sign x)))",
                           diags);
    auto v2 = sexp_validate(*bad2);
    CHECK(v2.contains_rule("non-integer-width"));

    auto bad3 = sexp_parse("(circuit c (frobnicate 1))", diags);
    auto v3 = sexp_validate(*bad3);
    CHECK(v3.contains_rule("unknown-form"));
    CHECK(to_text(v3).find("frobnicate") != std::string::npos);

    auto bad4 = sexp_parse("(circuit c (assign x))", diags);
    auto v4 = sexp_validate(*bad4);
    CHECK(v4.contains_rule("arity"));

    auto good = sexp_parse(read_data("uart.sexp"), diags);
    REQUIRE(good);
    CHECK(!sexp_validate(*good).has_errors());
}

TEST_CASE("lowering: declarations, types and statements") {
    DiagnosticList diags;
    auto tree = sexp_parse(
        "(circuit tiny"
        " (input (name a) (type bv4))"
        " (output (name y) (type bv4))"
        " (signal (name t) (bits_sign (4 signed)))"
        " (assign t (+ a 1))"
        " (assign y t))",
        diags);
    REQUIRE(tree);
    auto c = lower_to_ir(*tree, diags);
    INFO(to_text(diags));
    REQUIRE(c);
    CHECK(c->name == "tiny");
    REQUIRE(c->ports.size() == 2);
    CHECK(c->ports[0].direction == PortDirection::Input);
    CHECK(c->find_wire("t")->type == TypeDesc::int_t(4));
    CHECK(c->statements.size() == 2);
}

TEST_CASE("lowering: unknown name inside a statement fails") {
    DiagnosticList diags;
    auto tree =
        sexp_parse("(circuit c (signal (name s) (bits_sign 2))"
                   " (assign s missing))",
                   diags);
    REQUIRE(tree);
    CHECK(!lower_to_ir(*tree, diags));
    CHECK(diags.has_errors());
}

TEST_CASE("emission: builtins round-trip through the flat form") {
    for (const auto& name : builtin_names()) {
        CAPTURE(name);
        auto b = resolve_builtin("builtin:" + name);
        REQUIRE(b);
        auto e1 = elaborate(*b);
        REQUIRE(e1.ok());
        CircuitDef flat = flatten(*e1.circuit);
        std::string text = emit_sexpir(flat);

        DiagnosticList diags;
        auto tree = sexp_parse(text, diags);
        REQUIRE(tree);
        CHECK(!sexp_validate(*tree).has_errors());
        auto c2 = lower_to_ir(*tree, diags);
        INFO(to_text(diags));
        REQUIRE(c2);

        // Same signal set with the same widths.
        auto e2 = elaborate(c2);
        REQUIRE(e2.ok());
        auto flat_res = elaborate(std::make_shared<CircuitDef>(flat));
        REQUIRE(flat_res.ok());
        const auto& s1 = flat_res.circuit->symbols;
        const auto& s2 = e2.circuit->symbols;
        REQUIRE(s1.size() == s2.size());
        for (const auto& [n, t] : s1) {
            REQUIRE(s2.count(n));
            CHECK(width_of(s2.at(n)) == width_of(t));
        }
        CHECK(e2.circuit->lowered.size() == flat_res.circuit->lowered.size());
    }
}

TEST_CASE("emission is stable: print twice, byte-identical") {
    auto e = elaborate(builtin_counter());
    REQUIRE(e.ok());
    CircuitDef flat = flatten(*e.circuit);
    CHECK(emit_sexpir(flat) == emit_sexpir(flat));
}
