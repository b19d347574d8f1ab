#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rtlforge/ir.hpp"

namespace rtlforge {

// Example circuits compiled into the tool, addressable from the CLI as
// "builtin:<name>" or "builtin:<name>:<param>" (adder takes a bit count).
std::shared_ptr<const CircuitDef> builtin_half_adder();
std::shared_ptr<const CircuitDef> builtin_full_adder();
std::shared_ptr<const CircuitDef> builtin_adder(int nbits);
std::shared_ptr<const CircuitDef> builtin_counter();
std::shared_ptr<const CircuitDef> builtin_fsm1();

// All builtin names (parameterized ones at their default: adder -> 8 bits).
std::vector<std::string> builtin_names();

// Resolves "builtin:<name>[:<param>]"; nullopt when `spec` is not a builtin
// reference, nullptr when it is one but the name/param is invalid.
std::optional<std::shared_ptr<const CircuitDef>> resolve_builtin(
    const std::string& spec);

}  // namespace rtlforge
