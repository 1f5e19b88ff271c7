#include "cartan/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace cartan;

namespace {

std::pair<Symbol, Rational> parse_slice(const std::string& s) {
    auto eq = s.find('=');
    if (eq == std::string::npos) throw CLI::ValidationError("--slice", "expected coord=value");
    std::string name = s.substr(0, eq), value = s.substr(eq + 1);
    if (!Symbol::valid_name(name)) throw CLI::ValidationError("--slice", "bad coordinate name " + name);
    Rational q;
    try {
        q = Rational(value);
        q.canonicalize();
    } catch (const std::exception&) {
        throw CLI::ValidationError("--slice", "bad value " + value);
    }
    return {Symbol(name), q};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Exterior differential systems: involution, prolongation, slicing and constraint analysis"};
    app.set_version_flag("--version", tool_version);
    std::string command, file, slice, flag_order, format = "text";
    RunOptions opt;
    app.add_option("command", command, "analyze | involution | prolong | slice | dirac | gotay-nester")
        ->required()
        ->check(CLI::IsMember(commands()));
    app.add_option("spec", file, "spec file (.eds)")->required()->check(CLI::ExistingFile);
    app.add_option("--slice", slice, "slice coordinate, e.g. x0=0");
    app.add_option("--flag-order", flag_order, "flag order as comma-separated base coordinates");
    app.add_option("--max-steps", opt.max_steps, "prolongation budget")->check(CLI::NonNegativeNumber);
    app.add_option("--max-rounds", opt.max_rounds, "Gotay-Nester round budget")->check(CLI::PositiveNumber);
    app.add_option("--consequence-order", opt.consequence_order, "derivative order of consequences tried")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--seed", opt.seed, "seed for generic points and flags");
    app.add_option("--report", format, "report format")->check(CLI::IsMember({"text", "json"}));
    CLI11_PARSE(app, argc, argv);

    try {
        ProblemSpec spec = parse_spec_file(file);
        if (!slice.empty()) opt.slice = parse_slice(slice);
        if (!flag_order.empty()) {
            std::stringstream ss(flag_order);
            std::string item;
            while (std::getline(ss, item, ',')) {
                int p = spec.chart->base_position(Symbol(item));
                if (p < 0) throw std::invalid_argument("--flag-order: not a base coordinate: " + item);
                opt.flag_order.push_back(p);
            }
            if (opt.flag_order.size() != spec.chart->base.size())
                throw std::invalid_argument("--flag-order must list every base coordinate");
        }
        Report r = run(spec, command, opt);
        std::cout << emit_report(r, format == "json" ? ReportFormat::json : ReportFormat::text);
    } catch (const SpecError& e) {
        std::cerr << file << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
