// rtlforge command-line driver: check, convert, emit and simulate circuits.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "rtlforge/backends.hpp"
#include "rtlforge/builtins.hpp"
#include "rtlforge/elaborate.hpp"
#include "rtlforge/flatten.hpp"
#include "rtlforge/sexpir.hpp"
#include "rtlforge/sim.hpp"

namespace fs = std::filesystem;
using namespace rtlforge;

namespace {

struct CommonOpts {
    std::string input;
    std::string outdir = ".";
    std::string ports_file;
    bool structured = false;
    VhdlOptions vhdl;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_out) {
    cmd->add_option("input", opts.input,
                    "builtin:<name>[:<param>] or a Sexpir (.sexp) file")
        ->required();
    if (needs_out)
        cmd->add_option("-o,--outdir", opts.outdir, "output directory");
    cmd->add_option("--ports", opts.ports_file,
                    "port-override sidecar (lines: input/output <name>)");
    cmd->add_flag("--structured", opts.structured,
                  "machine-readable (JSON) diagnostics");
    cmd->add_option("--clock", opts.vhdl.clock, "clock port name");
    cmd->add_option("--reset-n", opts.vhdl.reset_n,
                    "asynchronous reset port name (active low)");
    cmd->add_option("--sreset", opts.vhdl.sreset,
                    "synchronous reset port name (active high)");
}

void print_diags(const DiagnosticList& diags, bool structured) {
    if (diags.empty()) return;
    if (structured)
        std::cerr << to_json(diags) << "\n";
    else
        std::cerr << to_text(diags);
}

std::optional<std::string> read_file(const std::string& path,
                                     DiagnosticList& diags) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        diags.error("file-not-found", path, "cannot open file");
        return std::nullopt;
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

bool write_file_atomic(const fs::path& path, const std::string& text,
                       DiagnosticList& diags) {
    std::error_code ec;
    fs::create_directories(path.parent_path().empty() ? "."
                                                      : path.parent_path(),
                           ec);
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            diags.error("io", path.string(), "cannot create output file");
            return false;
        }
        out << text;
        if (!out) {
            diags.error("io", path.string(), "write failed");
            return false;
        }
    }
    fs::rename(tmp, path, ec);
    if (ec) {
        diags.error("io", path.string(), "rename failed: " + ec.message());
        return false;
    }
    return true;
}

// Loads the input (builtin reference or Sexpir file) into a CircuitDef.
std::shared_ptr<const CircuitDef> load_input(const CommonOpts& opts,
                                             DiagnosticList& diags) {
    if (auto b = resolve_builtin(opts.input)) {
        if (!*b)
            diags.error("unknown-name", opts.input,
                        "unknown builtin circuit or bad parameter");
        return *b;
    }
    auto text = read_file(opts.input, diags);
    if (!text) return nullptr;
    auto tree = sexp_parse(*text, diags);
    if (!tree) return nullptr;
    auto circuit = lower_to_ir(*tree, diags);
    if (!circuit) return nullptr;

    // Files with explicit input/output declarations skip inference.
    if (!circuit->ports.empty()) return circuit;

    // Sexpir files that carry only plain signals need their port
    // directions recovered.
    std::vector<PortOverride> overrides;
    if (!opts.ports_file.empty()) {
        auto ptext = read_file(opts.ports_file, diags);
        if (!ptext) return nullptr;
        overrides = parse_port_overrides(*ptext, diags);
        if (diags.has_errors()) return nullptr;
    }
    PortPartition part = infer_ports(*circuit, overrides, diags);
    if (diags.has_errors()) return nullptr;
    return std::make_shared<CircuitDef>(apply_ports(*circuit, part));
}

std::shared_ptr<const ElaboratedCircuit> load_and_elaborate(
    const CommonOpts& opts, DiagnosticList& diags) {
    auto circuit = load_input(opts, diags);
    if (!circuit) return nullptr;
    auto res = elaborate(circuit);
    diags.append(res.diags);
    return res.circuit;
}

int emit_files(const ElaboratedCircuit& elab, const CommonOpts& opts,
               const std::vector<std::string>& emits, DiagnosticList& diags) {
    fs::path out(opts.outdir);
    const std::string& name = elab.source->name;
    for (const auto& what : emits) {
        if (what == "vhdl") {
            for (const auto& unit : emit_vhdl(elab, opts.vhdl))
                if (!write_file_atomic(out / unit.file_name, unit.text, diags))
                    return 1;
            auto support = emit_support_package();
            if (!write_file_atomic(out / support.file_name, support.text,
                                   diags))
                return 1;
        } else if (what == "dot") {
            if (!write_file_atomic(out / (name + ".dot"), emit_dot(elab),
                                   diags))
                return 1;
        } else if (what == "pretty") {
            if (!write_file_atomic(out / (name + ".txt"), pretty(elab), diags))
                return 1;
        } else if (what == "sexp") {
            if (!write_file_atomic(out / (name + ".sexp"),
                                   emit_sexpir(flatten(elab)), diags))
                return 1;
        } else {
            diags.error("usage", what, "unknown --emit kind");
            return 1;
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"rtlforge: RTL construction, interchange and VHDL emission"};
    app.require_subcommand(1);

    CommonOpts check_o, vhdl_o, dot_o, pretty_o, tosexp_o, fromsexp_o, sim_o;
    std::vector<std::string> emits;
    std::string script_path;

    add_common(app.add_subcommand("check", "parse + elaborate, print diagnostics"),
               check_o, false);
    add_common(app.add_subcommand("vhdl", "emit VHDL entities + support package"),
               vhdl_o, true);
    add_common(app.add_subcommand("dot", "emit a Graphviz AST view"), dot_o,
               true);
    add_common(app.add_subcommand("pretty", "emit a readable text rendering"),
               pretty_o, true);
    add_common(app.add_subcommand("to-sexp", "emit the flat Sexpir form"),
               tosexp_o, true);
    auto* fromsexp =
        app.add_subcommand("from-sexp", "compile a Sexpir file to backends");
    add_common(fromsexp, fromsexp_o, true);
    fromsexp->add_option("--emit", emits, "vhdl|dot|pretty|sexp (repeatable)");
    auto* simcmd = app.add_subcommand("sim", "cycle-based simulation");
    add_common(simcmd, sim_o, false);
    simcmd->add_option("--script", script_path, "stimulus script")->required();

    CLI11_PARSE(app, argc, argv);

    DiagnosticList diags;
    int status = 0;

    if (app.got_subcommand("check")) {
        auto elab = load_and_elaborate(check_o, diags);
        print_diags(diags, check_o.structured);
        return diags.has_errors() || !elab ? 1 : 0;
    }

    auto run_emit = [&](const CommonOpts& o,
                        std::vector<std::string> kinds) -> int {
        auto elab = load_and_elaborate(o, diags);
        int rc = 1;
        if (elab) rc = emit_files(*elab, o, kinds, diags);
        print_diags(diags, o.structured);
        return diags.has_errors() ? 1 : rc;
    };

    if (app.got_subcommand("vhdl")) return run_emit(vhdl_o, {"vhdl"});
    if (app.got_subcommand("dot")) return run_emit(dot_o, {"dot"});
    if (app.got_subcommand("pretty")) return run_emit(pretty_o, {"pretty"});
    if (app.got_subcommand("to-sexp")) return run_emit(tosexp_o, {"sexp"});
    if (app.got_subcommand("from-sexp")) {
        if (emits.empty()) emits = {"vhdl"};
        return run_emit(fromsexp_o, emits);
    }

    if (app.got_subcommand("sim")) {
        auto elab = load_and_elaborate(sim_o, diags);
        if (!elab) {
            print_diags(diags, sim_o.structured);
            return 1;
        }
        auto script = read_file(script_path, diags);
        if (!script) {
            print_diags(diags, sim_o.structured);
            return 1;
        }
        auto sim = Simulator::create(*elab, diags);
        if (!sim) {
            print_diags(diags, sim_o.structured);
            return 1;
        }
        StimulusResult res = run_stimulus(*sim, *script, diags);
        std::cout << res.log;
        print_diags(diags, sim_o.structured);
        if (!res.passed) {
            std::cout << res.failures << " expectation(s) failed\n";
            return 1;
        }
        std::cout << "all expectations passed\n";
        return diags.has_errors() ? 1 : 0;
    }

    return status;
}
