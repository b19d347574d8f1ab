#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "rtlforge/backends.hpp"
#include "rtlforge/builder.hpp"
#include "rtlforge/builtins.hpp"

using namespace rtlforge;

namespace {

std::shared_ptr<const ElaboratedCircuit> elab(
    std::shared_ptr<const CircuitDef> c) {
    auto res = elaborate(c);
    INFO(to_text(res.diags));
    REQUIRE(res.ok());
    return res.circuit;
}

const EmissionUnit& unit_named(const std::vector<EmissionUnit>& units,
                               const std::string& file) {
    for (const auto& u : units)
        if (u.file_name == file) return u;
    REQUIRE_MESSAGE(false, "no unit " << file);
    static EmissionUnit dummy;
    return dummy;
}

// Golden-file normalization: trailing whitespace stripped, LF endings.
std::string normalize(std::string s) {
    std::string out;
    std::string line;
    for (std::size_t i = 0; i <= s.size(); ++i) {
        if (i == s.size() || s[i] == '\n') {
            while (!line.empty() && (line.back() == ' ' || line.back() == '\t' ||
                                     line.back() == '\r'))
                line.pop_back();
            out += line;
            out += '\n';
            line.clear();
        } else {
            line += s[i];
        }
    }
    return out;
}

}  // namespace

TEST_CASE("vhdl: fsm1 matches the single-process template") {
    auto e = elab(builtin_fsm1());
    auto units = emit_vhdl(*e);
    REQUIRE(units.size() == 1);
    std::string text = normalize(units[0].text);
    CHECK(units[0].file_name == "fsm1_c.vhd");
    CHECK(text.find("entity fsm1_c is") != std::string::npos);
    CHECK(text.find("architecture rtl of fsm1_c is") != std::string::npos);
    CHECK(text.find("type simple_state_t is (s0,s1,s2)") != std::string::npos);
    CHECK(text.find("if reset_n='0' then") != std::string::npos);
    CHECK(text.find("if sreset='1' then") != std::string::npos);
    CHECK(text.find("f <= to_bv(1,2);") != std::string::npos);
    CHECK(text.find("if (to_uint(go,1) = 1) then") != std::string::npos);
    CHECK(text.find("when others =>") != std::string::npos);
    CHECK(text.find("rising_edge(clk)") != std::string::npos);
    // Register resets to zero in both reset branches.
    CHECK(std::count(text.begin(), text.end(), '\f') == 0);
}

TEST_CASE("vhdl: half_adder has four ports and no clock") {
    auto e = elab(builtin_half_adder());
    auto units = emit_vhdl(*e);
    REQUIRE(units.size() == 1);
    const std::string& text = units[0].text;
    CHECK(text.find("clk") == std::string::npos);
    CHECK(text.find("reset_n") == std::string::npos);
    for (const char* port : {"a : in  std_logic", "b : in  std_logic",
                             "sum : out std_logic", "cout : out std_logic"})
        CHECK(text.find(port) != std::string::npos);
    CHECK(text.find("sum <= (a xor b);") != std::string::npos);
    CHECK(text.find("cout <= (a and b);") != std::string::npos);
}

TEST_CASE("vhdl: adder hierarchy emits three entities with port maps") {
    auto e = elab(builtin_adder(8));
    auto units = emit_vhdl(*e);
    REQUIRE(units.size() == 3);
    CHECK(units[0].file_name == "half_adder_c.vhd");
    CHECK(units[1].file_name == "full_adder_c.vhd");
    CHECK(units[2].file_name == "adder_c.vhd");
    const std::string& fa = units[1].text;
    CHECK(fa.find("ha1 : entity work.half_adder_c") != std::string::npos);
    CHECK(fa.find("port map") != std::string::npos);
    const std::string& top = units[2].text;
    CHECK(top.find("fa_7 : entity work.full_adder_c") != std::string::npos);
    CHECK(top.find("fa_0_cin <= '0';") != std::string::npos);
}

TEST_CASE("vhdl: implicit ports appear iff a register exists somewhere") {
    auto counter = emit_vhdl(*elab(builtin_counter()));
    CHECK(counter[0].text.find("sreset : in  std_logic") != std::string::npos);

    // A wrapper with no registers of its own, but a registered child.
    CircuitBuilder b("wrap");
    b.input("t");
    b.output("c", "byte");
    b.component("u0", builtin_counter());
    b.assign(Expr::port_ref("u0", "tick"), Expr::ref("t"));
    b.assign(Expr::ref("c"), Expr::port_ref("u0", "count"));
    auto units = emit_vhdl(*elab(b.finish()));
    const std::string& top = unit_named(units, "wrap_c.vhd").text;
    CHECK(top.find("sreset : in  std_logic") != std::string::npos);
    CHECK(top.find("sreset => sreset") != std::string::npos);
}

TEST_CASE("vhdl: outputs read back are buffered through _i") {
    auto units = emit_vhdl(*elab(builtin_counter()));
    const std::string& text = units[0].text;
    CHECK(text.find("signal count_i : std_logic_vector(7 downto 0);") !=
          std::string::npos);
    CHECK(text.find("count <= count_i;") != std::string::npos);
    // fsm1's f is never read: no buffer there.
    auto fsm = emit_vhdl(*elab(builtin_fsm1()));
    CHECK(fsm[0].text.find("f_i") == std::string::npos);
}

TEST_CASE("vhdl: typedefs emit a types package") {
    CircuitBuilder b("c");
    TypeDesc rec = TypeDesc::record({"re", "im"},
                                    {TypeDesc::int_t(6), TypeDesc::int_t(6)});
    b.typedef_("cplx", rec);
    b.typedef_("cplx_ary", TypeDesc::array(4, TypeDesc::alias("cplx")));
    b.wire("mem", "cplx_ary");
    b.input("i", "bv2");
    b.output("q", "int6");
    b.assign(Expr::index(Expr::ref("mem"), Expr::lit(0)),
             Expr::aggregate({"re", "im"}, {Expr::lit(1), Expr::lit(2)}));
    b.assign(Expr::ref("q"),
             Expr::field(Expr::index(Expr::ref("mem"), Expr::ref("i")), "im"));
    auto units = emit_vhdl(*elab(b.finish()));
    REQUIRE(units.size() == 2);
    CHECK(units[0].kind == EmissionUnit::Kind::TypesPackage);
    const std::string& pkg = units[0].text;
    CHECK(pkg.find("package c_pkg is") != std::string::npos);
    CHECK(pkg.find("type cplx is record") != std::string::npos);
    CHECK(pkg.find("type cplx_ary is array (0 to 3) of cplx;") !=
          std::string::npos);
    const std::string& ent = units[1].text;
    CHECK(ent.find("use work.c_pkg.all;") != std::string::npos);
    CHECK(ent.find("signal mem : cplx_ary;") != std::string::npos);
}

TEST_CASE("vhdl: clock and reset names are configurable") {
    VhdlOptions opts;
    opts.clock = "clock";
    opts.reset_n = "rst_n";
    opts.sreset = "srst";
    auto units = emit_vhdl(*elab(builtin_counter()), opts);
    const std::string& text = units[0].text;
    CHECK(text.find("rising_edge(clock)") != std::string::npos);
    CHECK(text.find("if rst_n='0' then") != std::string::npos);
    CHECK(text.find("if srst='1' then") != std::string::npos);
    CHECK(text.find("reset_n") == std::string::npos);
}

TEST_CASE("support package is fixed and self-consistent") {
    auto a = emit_support_package();
    auto b = emit_support_package();
    CHECK(a.text == b.text);
    CHECK(a.file_name == "rtlforge_support.vhd");
    CHECK(a.kind == EmissionUnit::Kind::SupportPackage);
    for (const char* fn : {"function to_bv", "function to_uint",
                           "function resize", "function to_sl"})
        CHECK(a.text.find(fn) != std::string::npos);
}

TEST_CASE("dot: deterministic digraph with labeled nodes") {
    auto ha = emit_dot(*elab(builtin_half_adder()));
    CHECK(ha.rfind("digraph half_adder {", 0) == 0);
    CHECK(std::count(ha.begin(), ha.end(), '\n') > 10);
    // 2 assigns, 4 ports.
    auto count_label = [&](const std::string& text, const std::string& l) {
        std::size_t n = 0, pos = 0;
        while ((pos = text.find(l, pos)) != std::string::npos) {
            ++n;
            pos += l.size();
        }
        return n;
    };
    CHECK(count_label(ha, "label=\"assign\"") == 2);
    CHECK(count_label(ha, "label=\"input ") == 2);
    CHECK(count_label(ha, "label=\"output ") == 2);

    auto fsm = emit_dot(*elab(builtin_fsm1()));
    CHECK(fsm.find("label=\"fsm simple\"") != std::string::npos);
    for (const char* st : {"state s0", "state s1", "state s2"})
        CHECK(fsm.find(st) != std::string::npos);

    CircuitBuilder empty("nothing");
    auto ed = emit_dot(*elab(empty.finish()));
    CHECK(ed.find("label=\"circuit nothing\"") != std::string::npos);
}

TEST_CASE("pretty: readable rendering") {
    auto ha = pretty(*elab(builtin_half_adder()));
    CHECK(ha.find("sum <= (a ^ b)") != std::string::npos);
    CHECK(ha.find("cout <= (a & b)") != std::string::npos);

    auto cnt = pretty(*elab(builtin_counter()));
    CHECK(cnt.find("sequential counting") != std::string::npos);
    CHECK(cnt.find("if (tick == 1)") != std::string::npos);
    CHECK(cnt.find("else") != std::string::npos);

    CircuitBuilder empty("nothing");
    CHECK(pretty(*elab(empty.finish())) == "circuit nothing\n");
}

TEST_CASE("backends are read-only and deterministic") {
    auto c = builtin_fsm1();
    CircuitDef before = *c;
    auto e = elab(c);
    std::string v1, v2;
    for (const auto& u : emit_vhdl(*e)) v1 += u.text;
    std::string d1 = emit_dot(*e);
    std::string p1 = pretty(*e);
    for (const auto& u : emit_vhdl(*e)) v2 += u.text;
    CHECK(v1 == v2);
    CHECK(emit_dot(*e) == d1);
    CHECK(pretty(*e) == p1);
    CHECK(*c == before);
}
