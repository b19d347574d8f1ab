#pragma once

#include <string>
#include <vector>

namespace rtlforge {

enum class Severity { Warning, Error };

// Structured diagnostic: rule identifier + location tag + message.
struct Diagnostic {
    Severity severity = Severity::Error;
    std::string rule;     // closed set of rule ids, e.g. "duplicate-name"
    std::string where;    // "<circuit>.<path>"
    std::string message;

    bool operator==(const Diagnostic&) const = default;
};

class DiagnosticList {
public:
    void error(std::string rule, std::string where, std::string message) {
        items_.push_back({Severity::Error, std::move(rule), std::move(where),
                          std::move(message)});
    }
    void warning(std::string rule, std::string where, std::string message) {
        items_.push_back({Severity::Warning, std::move(rule), std::move(where),
                          std::move(message)});
    }
    void append(const DiagnosticList& other) {
        items_.insert(items_.end(), other.items_.begin(), other.items_.end());
    }

    bool has_errors() const {
        for (const auto& d : items_)
            if (d.severity == Severity::Error) return true;
        return false;
    }
    bool empty() const { return items_.empty(); }
    std::size_t size() const { return items_.size(); }
    const std::vector<Diagnostic>& items() const { return items_; }
    const Diagnostic& operator[](std::size_t i) const { return items_[i]; }

    bool contains_rule(const std::string& rule) const {
        for (const auto& d : items_)
            if (d.rule == rule) return true;
        return false;
    }

private:
    std::vector<Diagnostic> items_;
};

// Line-oriented text form: "<severity> <rule-id> <where>: <message>".
std::string to_text(const Diagnostic& d);
std::string to_text(const DiagnosticList& diags);

// Machine-readable dump (JSON array), used behind the CLI --structured flag.
std::string to_json(const DiagnosticList& diags);

}  // namespace rtlforge
