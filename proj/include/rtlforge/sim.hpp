#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rtlforge/diag.hpp"
#include "rtlforge/elaborate.hpp"

namespace rtlforge {

struct SimOptions {
    // When set, statement iteration order is permuted before scheduling;
    // two-phase semantics make results independent of the permutation.
    bool shuffle = false;
    std::uint64_t shuffle_seed = 0;
};

// Cycle-based two-phase evaluator. The hierarchy is flattened up front
// (child signal s of instance i becomes i__s); every signal value is kept
// masked to its width. Per cycle: sequential blocks read current values and
// produce next values, all next values commit atomically, then
// combinational nets resettle in topological order.
class Simulator {
public:
    // Null on unsupported constructs (element widths over 64 bits).
    static std::unique_ptr<Simulator> create(const ElaboratedCircuit& elab,
                                             DiagnosticList& diags,
                                             const SimOptions& opts = {});

    bool poke(const std::string& input, std::uint64_t value,
              DiagnosticList& diags);
    // Scalar signals only; masked to the signal width.
    std::optional<std::uint64_t> peek(const std::string& name,
                                      DiagnosticList& diags) const;
    std::optional<std::uint64_t> peek_element(const std::string& name,
                                              std::size_t index,
                                              DiagnosticList& diags) const;
    void step(int cycles = 1);
    std::uint64_t cycle() const { return cycle_; }
    const std::vector<std::string>& signal_names() const { return order_; }

    ~Simulator();

private:
    Simulator();
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::vector<std::string> order_;
    std::uint64_t cycle_ = 0;
};

// Stimulus script: lines `poke <name> <value>`, `step [n]`,
// `expect <name> <value>`; '#' starts a comment.
struct StimulusResult {
    bool passed = true;
    int failures = 0;
    std::string log;
};

StimulusResult run_stimulus(Simulator& sim, const std::string& script,
                            DiagnosticList& diags);

}  // namespace rtlforge
