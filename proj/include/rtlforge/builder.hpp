#pragma once

#include <memory>
#include <string>
#include <vector>

#include "rtlforge/diag.hpp"
#include "rtlforge/ir.hpp"

namespace rtlforge {

// Mutating builder for a single CircuitDef. All structural rules (name
// uniqueness, nesting restrictions, If/Else merging, FSM state resolution)
// are enforced here; violations are collected as diagnostics and the
// offending construct is dropped. A builder is single-threaded; the
// finished CircuitDef is immutable.
class CircuitBuilder {
public:
    explicit CircuitBuilder(std::string name);

    // Declarations -----------------------------------------------------------
    void input(const std::string& name);                       // type Bit
    void input(const std::string& name, const TypeDesc& type);
    void input(const std::string& name, const std::string& type_name);
    void output(const std::string& name);
    void output(const std::string& name, const TypeDesc& type);
    void output(const std::string& name, const std::string& type_name);
    void wire(const std::string& name, const TypeDesc& type);
    void wire(const std::string& name, const std::string& type_name);
    void typedef_(const std::string& name, const TypeDesc& desc);
    void component(const std::string& name,
                   std::shared_ptr<const CircuitDef> child);

    // Statements -------------------------------------------------------------
    void assign(Expr lhs, Expr rhs);
    void comb_assign(Expr lhs, Expr rhs);  // only inside an FSM state
    void next_state(const std::string& target);

    // Block style: open / add statements / close. Else attaches to the If
    // statement that immediately precedes it in the enclosing block.
    void begin_if(Expr cond);
    void begin_else();
    void begin_case(Expr selector);
    void begin_when(std::uint64_t value);
    void begin_default();
    void begin_sequential(const std::string& label);
    void begin_combinatorial();
    void begin_combinatorial(const std::string& label);
    void begin_fsm(const std::string& label);
    void begin_state(const std::string& name);
    void end_block();

    // Convenience composers.
    void add_if(Expr cond, std::vector<Stmt> then_body);
    void add_if(Expr cond, std::vector<Stmt> then_body,
                std::vector<Stmt> else_body);

    // Looks up a declared name and resolves it through the typedef table;
    // used by front ends that need declared types during construction.
    const TypeDesc* type_of(const std::string& name) const;

    // Finish -----------------------------------------------------------------
    // Returns nullptr when any error diagnostic was recorded.
    std::shared_ptr<const CircuitDef> finish();
    const DiagnosticList& diagnostics() const { return diags_; }

private:
    enum class Frame { If, Else, Case, When, Default, Sequential, Comb, Fsm, State };

    struct OpenBlock {
        Frame frame;
        Stmt stmt;                  // under construction
        std::uint64_t when_value = 0;
    };

    bool name_free(const std::string& name, const std::string& what);
    bool resolve_type(const std::string& type_name, TypeDesc& out);
    void declare_port(const std::string& name, PortDirection dir,
                      const TypeDesc& type);
    std::vector<Stmt>* current_list();
    std::optional<int> selector_width(const Expr& sel) const;
    bool in_process_context() const;
    bool in_fsm_state() const;
    void append(Stmt s);
    std::string loc(const std::string& detail = "") const;

    CircuitDef circuit_;
    std::vector<OpenBlock> stack_;
    DiagnosticList diags_;
    bool finished_ = false;
};

}  // namespace rtlforge
