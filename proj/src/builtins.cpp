#include "rtlforge/builtins.hpp"

#include <stdexcept>

#include "rtlforge/builder.hpp"

namespace rtlforge {

namespace {

std::shared_ptr<const CircuitDef> must(CircuitBuilder& b) {
    auto c = b.finish();
    if (!c)
        throw std::logic_error("builtin circuit failed to build: " +
                               to_text(b.diagnostics()));
    return c;
}

}  // namespace

std::shared_ptr<const CircuitDef> builtin_half_adder() {
    CircuitBuilder b("half_adder");
    b.input("a");
    b.input("b");
    b.output("sum");
    b.output("cout");
    b.assign(Expr::ref("sum"), Expr::binary(BinOp::Xor, Expr::ref("a"),
                                            Expr::ref("b")));
    b.assign(Expr::ref("cout"), Expr::binary(BinOp::And, Expr::ref("a"),
                                             Expr::ref("b")));
    return must(b);
}

std::shared_ptr<const CircuitDef> builtin_full_adder() {
    CircuitBuilder b("full_adder");
    b.input("a");
    b.input("b");
    b.input("cin");
    b.output("sum");
    b.output("cout");
    auto ha = builtin_half_adder();
    b.component("ha1", ha);
    b.component("ha2", ha);
    b.assign(Expr::port_ref("ha1", "a"), Expr::ref("a"));
    b.assign(Expr::port_ref("ha1", "b"), Expr::ref("b"));
    b.assign(Expr::port_ref("ha2", "a"), Expr::ref("cin"));
    b.assign(Expr::port_ref("ha2", "b"), Expr::port_ref("ha1", "sum"));
    b.assign(Expr::ref("sum"), Expr::port_ref("ha2", "sum"));
    b.assign(Expr::ref("cout"),
             Expr::binary(BinOp::Or, Expr::port_ref("ha1", "cout"),
                          Expr::port_ref("ha2", "cout")));
    return must(b);
}

std::shared_ptr<const CircuitDef> builtin_adder(int nbits) {
    if (nbits < 1) return nullptr;
    CircuitBuilder b("adder");
    b.input("a", TypeDesc::bv(nbits));
    b.input("b", TypeDesc::bv(nbits));
    b.output("sum", TypeDesc::bv(nbits));
    b.output("cout");
    auto fa = builtin_full_adder();
    for (int i = 0; i < nbits; ++i)
        b.component("fa_" + std::to_string(i), fa);
    for (int i = 0; i < nbits; ++i) {
        std::string fi = "fa_" + std::to_string(i);
        b.assign(Expr::port_ref(fi, "a"),
                 Expr::index(Expr::ref("a"), Expr::lit(i)));
        b.assign(Expr::port_ref(fi, "b"),
                 Expr::index(Expr::ref("b"), Expr::lit(i)));
        if (i == 0)
            b.assign(Expr::port_ref(fi, "cin"), Expr::lit(0));
        else
            b.assign(Expr::port_ref(fi, "cin"),
                     Expr::port_ref("fa_" + std::to_string(i - 1), "cout"));
        b.assign(Expr::index(Expr::ref("sum"), Expr::lit(i)),
                 Expr::port_ref(fi, "sum"));
    }
    b.assign(Expr::ref("cout"),
             Expr::port_ref("fa_" + std::to_string(nbits - 1), "cout"));
    return must(b);
}

std::shared_ptr<const CircuitDef> builtin_counter() {
    CircuitBuilder b("counter");
    b.input("tick");
    b.output("count", "byte");
    b.begin_sequential("counting");
    b.begin_if(Expr::binary(BinOp::Eq, Expr::ref("tick"), Expr::lit(1)));
    b.begin_if(Expr::binary(BinOp::Eq, Expr::ref("count"), Expr::lit(255)));
    b.assign(Expr::ref("count"), Expr::lit(0));
    b.end_block();
    b.begin_else();
    b.assign(Expr::ref("count"),
             Expr::binary(BinOp::Add, Expr::ref("count"), Expr::lit(1)));
    b.end_block();
    b.end_block();
    b.end_block();
    return must(b);
}

std::shared_ptr<const CircuitDef> builtin_fsm1() {
    CircuitBuilder b("fsm1");
    b.input("go");
    b.output("f", "bv2");
    b.begin_fsm("simple");
    b.assign(Expr::ref("f"), Expr::lit(0));
    b.begin_state("s0");
    b.assign(Expr::ref("f"), Expr::lit(1));
    b.begin_if(Expr::binary(BinOp::Eq, Expr::ref("go"), Expr::lit(1)));
    b.next_state("s1");
    b.end_block();
    b.end_block();
    b.begin_state("s1");
    b.assign(Expr::ref("f"), Expr::lit(2));
    b.next_state("s2");
    b.end_block();
    b.begin_state("s2");
    b.assign(Expr::ref("f"), Expr::lit(3));
    b.next_state("s0");
    b.end_block();
    b.end_block();
    return must(b);
}

std::vector<std::string> builtin_names() {
    return {"half_adder", "full_adder", "adder", "counter", "fsm1"};
}

std::optional<std::shared_ptr<const CircuitDef>> resolve_builtin(
    const std::string& spec) {
    const std::string prefix = "builtin:";
    if (spec.rfind(prefix, 0) != 0) return std::nullopt;
    std::string rest = spec.substr(prefix.size());
    std::string name = rest;
    std::string param;
    auto colon = rest.find(':');
    if (colon != std::string::npos) {
        name = rest.substr(0, colon);
        param = rest.substr(colon + 1);
    }
    if (name == "half_adder" && param.empty()) return builtin_half_adder();
    if (name == "full_adder" && param.empty()) return builtin_full_adder();
    if (name == "adder") {
        int n = 8;
        if (!param.empty()) {
            try {
                n = std::stoi(param);
            } catch (...) {
                return std::shared_ptr<const CircuitDef>();
            }
        }
        return builtin_adder(n);
    }
    if (name == "counter" && param.empty()) return builtin_counter();
    if (name == "fsm1" && param.empty()) return builtin_fsm1();
    return std::shared_ptr<const CircuitDef>();
}

}  // namespace rtlforge
