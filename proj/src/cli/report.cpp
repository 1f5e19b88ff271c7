#include "cartan/cli.hpp"

#include <json.hpp>

#include <sstream>

namespace cartan {

namespace {

using nlohmann::ordered_json;

std::string ints(const std::vector<int>& v) {
    std::string s = "(";
    for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s + ")";
}

ordered_json character_json(const CharacterReport& c) {
    ordered_json j;
    j["characters"] = c.characters;
    j["reduced_characters"] = c.reduced_characters;
    j["codim"] = c.variety_codim;
    j["cartan_sum"] = c.cartan_sum;
    j["involutive"] = c.involutive_at_flag;
    j["stable"] = c.stable;
    j["nested"] = c.nested;
    j["notes"] = c.notes;
    return j;
}

ordered_json to_json(const Report& r) {
    ordered_json j;
    j["schema"] = report_schema;
    j["version"] = tool_version;
    j["command"] = r.command;
    j["spec"] = r.spec_name;
    j["seed"] = r.seed;
    j["branches"] = ordered_json::array();
    for (auto& b : r.branches) {
        ordered_json bj;
        bj["id"] = b.id;
        bj["name"] = b.name;
        bj["analyzed"] = b.analyzed;
        bj["equations"] = b.equations;
        bj["assumptions"] = b.assumptions;
        bj["flags"] = b.flags;
        bj["characters"] = b.characters ? character_json(*b.characters) : ordered_json(nullptr);
        j["branches"].push_back(bj);
    }
    j["characters"] = r.characters;
    j["reduced_characters"] = r.reduced_characters;
    j["codim"] = r.codim ? ordered_json(*r.codim) : ordered_json(nullptr);
    j["involutive"] = r.involutive ? ordered_json(*r.involutive) : ordered_json(nullptr);
    j["generators"] = r.generators;
    j["zero_forms"] = r.zero_forms;
    j["chain"] = ordered_json::array();
    for (auto& c : r.chain) {
        ordered_json cj;
        cj["round"] = c.round;
        cj["status"] = c.status;
        cj["constraints"] = c.constraints;
        cj["complement_vectors"] = c.complement_vectors;
        cj["split_factors"] = c.split_factors;
        j["chain"].push_back(cj);
    }
    j["rules"] = r.rules;
    j["projection"] = r.projection;
    j["evolution"] = r.evolution;
    j["undetermined"] = r.undetermined;
    j["surfaced"] = r.surfaced;
    j["notes"] = r.notes;
    j["warnings"] = r.warnings;
    return j;
}

void list(std::ostringstream& os, const char* title, const std::vector<std::string>& v) {
    if (v.empty()) return;
    os << title << ":\n";
    for (auto& s : v) os << "  " << s << "\n";
}

std::string to_text(const Report& r) {
    std::ostringstream os;
    os << "command: " << r.command << "\n";
    os << "spec: " << r.spec_name << "\n";
    os << "seed: " << r.seed << "\n";
    for (auto& b : r.branches) {
        os << "branch " << b.name;
        if (b.name != b.id) os << " (" << b.id << ")";
        if (!b.analyzed) os << " [not analyzed]";
        os << ":\n";
        for (auto& e : b.equations) os << "    " << e << "\n";
        for (auto& a : b.assumptions) os << "    assume " << a << "\n";
        for (auto& f : b.flags) os << "    note: " << f << "\n";
        if (b.characters) {
            const auto& c = *b.characters;
            os << "    characters " << ints(c.characters) << ", reduced " << ints(c.reduced_characters) << ", codim "
               << c.variety_codim << ", Cartan sum " << c.cartan_sum << ", "
               << (c.involutive_at_flag ? "involutive" : "not involutive") << "\n";
        }
    }
    if (!r.characters.empty()) os << "characters: " << ints(r.characters) << "\n";
    if (!r.reduced_characters.empty()) os << "reduced characters: " << ints(r.reduced_characters) << "\n";
    if (r.codim) os << "codim: " << *r.codim << "\n";
    if (r.involutive) os << "involutive: " << (*r.involutive ? "yes" : "no") << "\n";
    list(os, "generators", r.generators);
    list(os, "zero-forms", r.zero_forms);
    list(os, "surfaced zero-forms", r.surfaced);
    if (!r.chain.empty()) {
        os << "chain:\n";
        for (auto& c : r.chain) {
            os << "  round " << c.round << " [" << c.status << "]";
            if (c.constraints.empty()) os << " no new constraints";
            os << "\n";
            for (auto& e : c.constraints) os << "    " << e << "\n";
            for (auto& s : c.split_factors) os << "    splits: " << s << "\n";
        }
    }
    list(os, "rules", r.rules);
    list(os, "projection", r.projection);
    list(os, "evolution", r.evolution);
    if (!r.undetermined.empty()) {
        os << "undetermined:";
        for (auto& u : r.undetermined) os << " " << u;
        os << "\n";
    }
    list(os, "notes", r.notes);
    list(os, "warnings", r.warnings);
    return os.str();
}

}  // namespace

std::string emit_report(const Report& r, ReportFormat f) {
    if (f == ReportFormat::json) return to_json(r).dump(2) + "\n";
    return to_text(r);
}

std::vector<std::string> validate_report_json(const std::string& json_text) {
    std::vector<std::string> bad;
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const std::exception& e) {
        return {std::string("not json: ") + e.what()};
    }
    if (!j.is_object()) return {"top level is not an object"};
    auto need = [&](const char* key, auto pred, const char* what) {
        if (!j.contains(key)) bad.push_back(std::string("missing key ") + key);
        else if (!pred(j[key])) bad.push_back(std::string(key) + " is not " + what);
    };
    auto is_str = [](const nlohmann::json& v) { return v.is_string(); };
    auto str_array = [](const nlohmann::json& v) {
        if (!v.is_array()) return false;
        for (auto& e : v)
            if (!e.is_string()) return false;
        return true;
    };
    auto int_array = [](const nlohmann::json& v) {
        if (!v.is_array()) return false;
        for (auto& e : v)
            if (!e.is_number_integer()) return false;
        return true;
    };
    need("schema", [&](const nlohmann::json& v) { return v.is_string() && v.get<std::string>() == report_schema; },
         report_schema);
    need("command", is_str, "a string");
    need("seed", [](const nlohmann::json& v) { return v.is_number_unsigned() || v.is_number_integer(); }, "an integer");
    need("branches", [](const nlohmann::json& v) { return v.is_array(); }, "an array");
    need("characters", int_array, "an integer array");
    need("reduced_characters", int_array, "an integer array");
    need("codim", [](const nlohmann::json& v) { return v.is_null() || v.is_number_integer(); }, "an integer or null");
    need("involutive", [](const nlohmann::json& v) { return v.is_null() || v.is_boolean(); }, "a boolean or null");
    need("generators", str_array, "a string array");
    need("chain", [](const nlohmann::json& v) { return v.is_array(); }, "an array");
    need("evolution", str_array, "a string array");
    need("warnings", str_array, "a string array");
    if (j.contains("branches") && j["branches"].is_array())
        for (auto& b : j["branches"]) {
            if (!b.is_object() || !b.contains("id") || !b.contains("equations") || !str_array(b["equations"]))
                bad.push_back("malformed branch entry");
        }
    if (j.contains("chain") && j["chain"].is_array())
        for (auto& c : j["chain"]) {
            if (!c.is_object() || !c.contains("round") || !c.contains("status") || !c.contains("constraints") ||
                !str_array(c["constraints"]))
                bad.push_back("malformed chain entry");
        }
    return bad;
}

}  // namespace cartan
