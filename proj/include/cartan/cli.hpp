#pragma once

// Spec-file language, command driver and reports for the `eds` tool.

#include "cartan/varcalc.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cartan {

constexpr uint64_t default_seed = 20240917;
constexpr const char* tool_version = "0.9.0";
constexpr const char* report_schema = "cartan-eds/1";

class SpecError : public std::runtime_error {
public:
    SpecError(int line, int column, const std::string& what);
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_, column_;
};

class SyntaxError : public SpecError {
public:
    SyntaxError(int line, int column, std::vector<std::string> expected, const std::string& found);
    const std::vector<std::string>& expected() const { return expected_; }

private:
    std::vector<std::string> expected_;
};

class DegreeMismatch : public SpecError {
public:
    using SpecError::SpecError;
};

class UnresolvedName : public SpecError {
public:
    UnresolvedName(int line, int column, const std::string& name, const std::string& why = "unknown name");
    const std::string& name() const { return name_; }

private:
    std::string name_;
};

struct SpecSystem {
    std::string name;
    ExteriorSystem system;
    int line = 0;
};

struct SpecProblem {
    std::string name;
    VariationalProblem problem;
    std::vector<Expr> initial_constraints;  // densities imposed at the first round
    std::vector<Symbol> keep;               // fields kept by the projection
    int line = 0;
};

struct SpecCheck {
    int line = 0;
    std::string text;
    bool holds = false;
};

struct ProblemSpec {
    ChartPtr chart;
    std::vector<std::pair<std::string, DiffForm>> forms;  // declaration order
    std::vector<SpecSystem> systems;
    std::optional<SpecProblem> problem;
    std::optional<std::pair<Symbol, Rational>> slice;
    std::vector<int> flag_order;  // base positions
    std::vector<std::string> branch_names;
    std::vector<SpecCheck> checks;

    const DiffForm* form(const std::string& name) const;
};

ProblemSpec parse_spec(const std::string& text);
ProblemSpec parse_spec_file(const std::string& path);
// Declarations and named forms in spec syntax; parse_spec of the result
// gives back the same chart and forms.
std::string print_spec(const ProblemSpec& spec);

struct RunOptions {
    std::optional<std::pair<Symbol, Rational>> slice;
    std::vector<int> flag_order;
    int max_steps = 6;
    int max_rounds = 12;
    int consequence_order = 2;
    uint64_t seed = default_seed;
};

struct BranchReport {
    std::string id;
    std::string name;
    bool analyzed = true;
    std::vector<std::string> equations;    // "u_x = q", "b = 0", ...
    std::vector<std::string> assumptions;  // "m != 0"
    std::vector<std::string> flags;
    std::optional<CharacterReport> characters;
};

struct ChainRoundReport {
    int round = 0;
    std::string status;
    std::vector<std::string> constraints;
    int complement_vectors = 0;
    std::vector<std::string> split_factors;
};

struct Report {
    std::string command;
    std::string spec_name;
    uint64_t seed = default_seed;
    std::vector<BranchReport> branches;
    // principal branch, or last step of a Cartan-Kuranishi run
    std::vector<int> characters;
    std::vector<int> reduced_characters;
    std::optional<int> codim;
    std::optional<bool> involutive;
    std::vector<std::string> generators;
    std::vector<std::string> zero_forms;
    std::vector<ChainRoundReport> chain;
    std::vector<std::string> rules;
    std::vector<std::string> projection;
    std::vector<std::string> evolution;    // Hamilton's equations once the chain terminates
    std::vector<std::string> undetermined; // velocities they leave free
    std::vector<std::string> surfaced;  // "step k: expr"
    std::vector<std::string> notes;
    std::vector<std::string> warnings;
};

const std::vector<std::string>& commands();
// Errors from the modules come back as SpecError carrying the line of the
// declaration that fed the failing stage.
Report run(const ProblemSpec& spec, const std::string& command, const RunOptions& opt = {});

enum class ReportFormat { text, json };
std::string emit_report(const Report& r, ReportFormat f);
// Checks the json report against the schema; returns the problems found.
std::vector<std::string> validate_report_json(const std::string& json_text);

}  // namespace cartan
