#include "rtlforge/diag.hpp"

#include <nlohmann/json.hpp>
#include <sstream>

namespace rtlforge {

std::string to_text(const Diagnostic& d) {
    std::ostringstream os;
    os << (d.severity == Severity::Error ? "error" : "warning") << ' '
       << d.rule << ' ' << d.where << ": " << d.message;
    return os.str();
}

std::string to_text(const DiagnosticList& diags) {
    std::ostringstream os;
    for (const auto& d : diags.items()) os << to_text(d) << '\n';
    return os.str();
}

std::string to_json(const DiagnosticList& diags) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& d : diags.items()) {
        arr.push_back({
            {"severity", d.severity == Severity::Error ? "error" : "warning"},
            {"rule", d.rule},
            {"where", d.where},
            {"message", d.message},
        });
    }
    return arr.dump(2);
}

}  // namespace rtlforge
