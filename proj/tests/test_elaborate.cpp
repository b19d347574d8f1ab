#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "rtlforge/builder.hpp"
#include "rtlforge/builtins.hpp"
#include "rtlforge/elaborate.hpp"
#include "rtlforge/sexpir.hpp"

using namespace rtlforge;

namespace {

std::string read_data(const std::string& name) {
    std::ifstream in(std::string(TEST_DATA_DIR) + "/" + name);
    REQUIRE(in.good());
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

std::shared_ptr<const ElaboratedCircuit> elab_or_fail(
    std::shared_ptr<const CircuitDef> c) {
    auto res = elaborate(c);
    INFO(to_text(res.diags));
    REQUIRE(res.ok());
    return res.circuit;
}

}  // namespace

TEST_CASE("fsm lowering: single-process case form") {
    auto elab = elab_or_fail(builtin_fsm1());
    REQUIRE(elab->fsms.size() == 1);
    const FsmInfo& f = elab->fsms[0];
    CHECK(f.label == "simple");
    CHECK(f.state_reg == "simple_state");
    CHECK(f.states == std::vector<std::string>{"s0", "s1", "s2"});
    // Register is wide enough for 3 states.
    CHECK(elab->type_of("simple_state") == TypeDesc::uint_t(2));

    // Lowered form: one sequential block; defaults first, then the case.
    REQUIRE(elab->lowered.size() == 1);
    const Stmt& seq = elab->lowered[0];
    CHECK(seq.kind == StmtKind::Sequential);
    REQUIRE(seq.body.size() == 2);
    CHECK(seq.body[0].kind == StmtKind::Assign);   // f <= 0 default
    const Stmt& cs = seq.body[1];
    REQUIRE(cs.kind == StmtKind::Case);
    CHECK(cs.rhs == Expr::ref("simple_state"));
    CHECK(cs.arm_values == std::vector<std::uint64_t>{0, 1, 2});
    // next_state :s1 became an assignment to the state register.
    bool found = false;
    for (const auto& st : cs.arm_bodies[1])
        if (st.kind == StmtKind::Assign && st.lhs == Expr::ref("simple_state"))
            found = st.rhs.kind == ExprKind::Lit && st.rhs.value == 2;
    CHECK(found);
}

TEST_CASE("fsm lowering: comb_assign extracts a parallel case") {
    CircuitBuilder b("m");
    b.input("go");
    b.output("f", "bv2");
    b.output("ready");
    b.begin_fsm("ctl");
    b.begin_state("idle");
    b.comb_assign(Expr::ref("ready"), Expr::lit(1));
    b.assign(Expr::ref("f"), Expr::lit(1));
    b.next_state("busy");
    b.end_block();
    b.begin_state("busy");
    b.assign(Expr::ref("f"), Expr::lit(2));
    b.next_state("idle");
    b.end_block();
    b.end_block();
    auto elab = elab_or_fail(b.finish());
    REQUIRE(elab->lowered.size() == 2);
    CHECK(elab->lowered[0].kind == StmtKind::Sequential);
    const Stmt& comb = elab->lowered[1];
    CHECK(comb.kind == StmtKind::Combinatorial);
    CHECK(comb.label == "ctl_comb");
}

TEST_CASE("drive rule: two continuous drivers conflict") {
    CircuitBuilder b("c");
    b.input("a");
    b.output("x");
    b.assign(Expr::ref("x"), Expr::ref("a"));
    b.assign(Expr::ref("x"), Expr::lit(0));
    auto res = elaborate(b.finish());
    CHECK(!res.ok());
    CHECK(res.diags.contains_rule("multiple-driver"));
}

TEST_CASE("drive rule: distinct constant elements do not conflict") {
    CircuitBuilder b("c");
    b.input("a");
    b.output("x", "bv2");
    b.assign(Expr::index(Expr::ref("x"), Expr::lit(0)), Expr::ref("a"));
    b.assign(Expr::index(Expr::ref("x"), Expr::lit(1)), Expr::ref("a"));
    CHECK(elaborate(b.finish()).ok());
}

TEST_CASE("drive rule: process and continuous drivers conflict") {
    CircuitBuilder b("c");
    b.input("a");
    b.output("x", "bv2");
    b.assign(Expr::ref("x"), Expr::lit(1));
    b.begin_sequential("p");
    b.assign(Expr::ref("x"), Expr::lit(2));
    b.end_block();
    auto res = elaborate(b.finish());
    CHECK(!res.ok());
    CHECK(res.diags.contains_rule("multiple-driver"));
}

TEST_CASE("dependency graph: counter registers its self-edge") {
    auto elab = elab_or_fail(builtin_counter());
    CHECK(elab->graph.has_edge("tick", "count", true));
    CHECK(elab->graph.has_edge("count", "count", true));
    CHECK(elab->has_registers);
    CHECK(elab->registered == std::vector<std::string>{"count"});
}

TEST_CASE("dependency graph: combinational cycle is diagnosed") {
    CircuitBuilder b("c");
    b.output("x");
    b.output("y");
    b.assign(Expr::ref("x"), Expr::ref("y"));
    b.assign(Expr::ref("y"), Expr::ref("x"));
    auto res = elaborate(b.finish());
    CHECK(!res.ok());
    CHECK(res.diags.contains_rule("comb-cycle"));
}

TEST_CASE("dependency graph: registered cycle is fine") {
    CircuitBuilder b("c");
    b.output("x");
    b.output("y");
    b.begin_sequential("p");
    b.assign(Expr::ref("x"), Expr::ref("y"));
    b.end_block();
    b.assign(Expr::ref("y"), Expr::ref("x"));
    CHECK(elaborate(b.finish()).ok());
}

TEST_CASE("instance summary edges: adder carry chain is combinational") {
    auto elab = elab_or_fail(builtin_adder(2));
    // fa_0.cout feeds fa_1.cin purely combinationally through the child.
    CHECK(elab->graph.has_edge("fa_0.cout", "fa_1.cin", false));
    CHECK(!elab->has_registers);
}

TEST_CASE("hierarchy: unique children are deduplicated") {
    auto elab = elab_or_fail(builtin_adder(8));
    REQUIRE(elab->unique_children.size() == 1);  // 8 x full_adder
    CHECK(elab->unique_children[0]->name == "full_adder");
    REQUIRE(elab->child_elabs.size() == 1);
    CHECK(elab->child_elabs[0]->unique_children.size() == 1);  // half_adder
}

TEST_CASE("elaboration is idempotent over the lowered circuit") {
    for (const char* which : {"fsm1", "counter"}) {
        auto base = which == std::string("fsm1") ? builtin_fsm1()
                                                 : builtin_counter();
        auto e1 = elab_or_fail(base);
        auto c2 = std::make_shared<CircuitDef>(e1->lowered_circuit());
        auto e2 = elab_or_fail(c2);
        CHECK(e1->lowered == e2->lowered);
        CHECK(e2->fsms.empty());
    }
}

TEST_CASE("port inference on a flat interchange circuit") {
    DiagnosticList diags;
    auto tree = sexp_parse(read_data("uart.sexp"), diags);
    REQUIRE(tree);
    auto circuit = lower_to_ir(*tree, diags);
    INFO(to_text(diags));
    REQUIRE(circuit);
    REQUIRE(circuit->ports.empty());

    PortPartition part = infer_ports(*circuit, {}, diags);
    auto has = [](const std::vector<std::string>& v, const std::string& s) {
        return std::find(v.begin(), v.end(), s) != v.end();
    };
    CHECK(has(part.inputs, "sys_rst"));
    CHECK(has(part.inputs, "sys_clk"));
    CHECK(has(part.inputs, "rx"));
    CHECK(has(part.internals, "rx_strobe"));
    CHECK(has(part.outputs, "rx_error"));
    CHECK(has(part.internals, "fsm0_state"));
    // Total: every signal lands in exactly one bucket.
    CHECK(part.inputs.size() + part.outputs.size() + part.internals.size() ==
          circuit->wires.size());

    // Overrides win over inference.
    PortPartition forced =
        infer_ports(*circuit, {{"rx_strobe", PortDirection::Output}}, diags);
    CHECK(has(forced.outputs, "rx_strobe"));

    auto applied = apply_ports(*circuit, part);
    CHECK(elaborate(std::make_shared<CircuitDef>(applied)).ok());
}

TEST_CASE("port override sidecar parsing") {
    DiagnosticList diags;
    auto ov = parse_port_overrides("# comment\ninput a\noutput b\n", diags);
    REQUIRE(ov.size() == 2);
    CHECK(ov[0].name == "a");
    CHECK(ov[0].direction == PortDirection::Input);
    CHECK(ov[1].direction == PortDirection::Output);
    parse_port_overrides("sideways c\n", diags);
    CHECK(diags.has_errors());
}

TEST_CASE("const_eval: array-of-record scenario") {
    CircuitBuilder b("c");
    TypeDesc rec = TypeDesc::record({"re", "im"},
                                    {TypeDesc::int_t(6), TypeDesc::int_t(6)});
    b.typedef_("cplx", rec);
    b.typedef_("cplx_ary", TypeDesc::array(256, TypeDesc::alias("cplx")));
    b.wire("mem", "cplx_ary");
    b.wire("x", "bv8");
    b.output("dummy");
    b.assign(Expr::ref("dummy"), Expr::lit(0));
    for (int i = 0; i < 256; ++i)
        b.assign(Expr::index(Expr::ref("mem"), Expr::lit(i)),
                 Expr::aggregate({"re", "im"},
                                 {Expr::lit(i), Expr::lit(2 * i)}));
    auto c = b.finish();
    REQUIRE(c);

    DiagnosticList diags;
    auto v = const_eval(
        Expr::field(Expr::index(Expr::ref("mem"), Expr::lit(13)), "im"), *c,
        diags);
    REQUIRE(v);
    CHECK(v->kind == ConstValue::Kind::Int);
    CHECK(v->value == 26);

    auto v0 = const_eval(
        Expr::field(Expr::index(Expr::ref("mem"), Expr::lit(0)), "re"), *c,
        diags);
    REQUIRE(v0);
    CHECK(v0->value == 0);

    // Indexing with a non-constant signal is not a constant expression.
    DiagnosticList bad;
    auto nc = const_eval(
        Expr::field(Expr::index(Expr::ref("mem"), Expr::ref("x")), "im"), *c,
        bad);
    CHECK(!nc);
    CHECK(bad.contains_rule("not-constant"));
}

TEST_CASE("warnings: undriven never-read signal is flagged dangling") {
    DiagnosticList diags;
    CircuitBuilder b("c");
    b.wire("ghost", TypeDesc::bv(4));
    b.wire("x", TypeDesc::bv(4));
    b.wire("y", TypeDesc::bv(4));
    b.assign(Expr::ref("y"), Expr::ref("x"));
    auto c = b.finish();
    REQUIRE(c);
    infer_ports(*c, {}, diags);
    CHECK(diags.contains_rule("dangling-signal"));
    CHECK(!diags.has_errors());
}
