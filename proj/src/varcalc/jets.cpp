#include "cartan/varcalc.hpp"

#include <algorithm>
#include <mutex>

namespace cartan {

namespace {

// Derivative symbols are shared by every jet space: a symbol stands for the
// derivative of a field along a multiset of coordinates.
struct JetRegistry {
    std::mutex mu;
    std::map<std::pair<uint32_t, std::vector<uint32_t>>, Symbol> by_key;
    std::map<uint32_t, std::pair<Symbol, std::vector<uint32_t>>> by_symbol;
};

JetRegistry& jet_registry() {
    static JetRegistry r;
    return r;
}

Symbol intern_jet(Symbol field, std::vector<uint32_t> along) {
    std::sort(along.begin(), along.end());
    auto& r = jet_registry();
    std::lock_guard<std::mutex> lock(r.mu);
    auto key = std::make_pair(field.id(), along);
    auto it = r.by_key.find(key);
    if (it != r.by_key.end()) return it->second;
    std::string name = field.name() + "__";
    std::string shown = display_name(field);
    if (shown.find('_') == std::string::npos) shown += "_";
    for (size_t i = 0; i < along.size(); ++i) {
        if (i) name += ".";
        name += Symbol::from_id(along[i]).name();
        shown += display_name(Symbol::from_id(along[i]));
    }
    Symbol s(name);
    set_display_name(s, shown);
    r.by_key.emplace(key, s);
    r.by_symbol.emplace(s.id(), std::make_pair(field, along));
    return s;
}

std::optional<std::pair<Symbol, std::vector<uint32_t>>> lookup_jet(Symbol s) {
    auto& r = jet_registry();
    std::lock_guard<std::mutex> lock(r.mu);
    auto it = r.by_symbol.find(s.id());
    if (it == r.by_symbol.end()) return std::nullopt;
    return it->second;
}

}  // namespace

int JetSpace::Jet::order() const {
    int o = 0;
    for (int c : counts) o += c;
    return o;
}

JetSpace::JetSpace(std::vector<Symbol> coords, std::vector<Symbol> fields)
    : coords_(std::move(coords)), fields_(std::move(fields)) {}

void JetSpace::add_field(Symbol f) {
    if (!is_field(f)) fields_.push_back(f);
}

int JetSpace::field_index(Symbol f) const {
    auto it = std::find(fields_.begin(), fields_.end(), f);
    return it == fields_.end() ? -1 : static_cast<int>(it - fields_.begin());
}

Symbol JetSpace::jet(Symbol field, const std::vector<int>& counts) const {
    if (counts.size() != coords_.size()) throw std::invalid_argument("jet: multi-index has the wrong length");
    std::vector<uint32_t> along;
    for (size_t i = 0; i < counts.size(); ++i)
        for (int k = 0; k < counts[i]; ++k) along.push_back(coords_[i].id());
    if (along.empty()) return field;
    return intern_jet(field, along);
}

Symbol JetSpace::jet(Symbol field, Symbol coord) const {
    auto j = split(field);
    if (!j) throw std::invalid_argument("jet: " + field.name() + " is not a field");
    auto it = std::find(coords_.begin(), coords_.end(), coord);
    if (it == coords_.end()) throw std::invalid_argument("jet: " + coord.name() + " is not a slice coordinate");
    j->counts[static_cast<size_t>(it - coords_.begin())]++;
    return jet(j->field, j->counts);
}

std::optional<JetSpace::Jet> JetSpace::split(Symbol s) const {
    if (is_field(s)) return Jet{s, std::vector<int>(coords_.size(), 0)};
    auto r = lookup_jet(s);
    if (!r || !is_field(r->first)) return std::nullopt;
    Jet j{r->first, std::vector<int>(coords_.size(), 0)};
    for (auto id : r->second) {
        auto it = std::find_if(coords_.begin(), coords_.end(), [&](Symbol c) { return c.id() == id; });
        if (it == coords_.end()) return std::nullopt;
        j.counts[static_cast<size_t>(it - coords_.begin())]++;
    }
    return j;
}

std::vector<JetSpace::Jet> JetSpace::jets_of(const Expr& e, Symbol field) const {
    std::vector<Jet> out;
    for (auto v : e.variables()) {
        auto j = split(Symbol::from_id(v));
        if (j && j->field == field) out.push_back(*j);
    }
    return out;
}

bool JetSpace::involves_fields(const Expr& e) const {
    for (auto v : e.variables())
        if (split(Symbol::from_id(v))) return true;
    return false;
}

Expr JetSpace::total_derivative(const Expr& e, Symbol coord) const {
    auto ci = std::find(coords_.begin(), coords_.end(), coord);
    if (ci == coords_.end()) throw std::invalid_argument("total_derivative: " + coord.name() + " is not a slice coordinate");
    size_t k = static_cast<size_t>(ci - coords_.begin());
    Expr acc = partial(e, coord);
    for (auto v : e.variables()) {
        Symbol s = Symbol::from_id(v);
        auto j = split(s);
        if (!j) continue;
        j->counts[k]++;
        acc += partial(e, s) * Expr(jet(j->field, j->counts));
    }
    return acc;
}

Expr JetSpace::total_derivative(const Expr& e, const std::vector<int>& counts) const {
    Expr r = e;
    for (size_t i = 0; i < counts.size() && i < coords_.size(); ++i)
        for (int k = 0; k < counts[i]; ++k) r = total_derivative(r, coords_[i]);
    return r;
}

Expr JetSpace::euler(const Expr& e, Symbol field) const {
    Expr acc;
    for (auto& j : jets_of(e, field)) {
        Expr t = total_derivative(partial(e, jet(j.field, j.counts)), j.counts);
        acc += j.order() % 2 ? -t : t;
    }
    return acc;
}

bool JetSpace::ranks_above(Symbol a, Symbol b) const {
    auto ja = split(a), jb = split(b);
    if (!ja) return false;
    if (!jb) return true;
    int fa = field_index(ja->field), fb = field_index(jb->field);
    if (fa != fb) return fa > fb;
    if (ja->order() != jb->order()) return ja->order() > jb->order();
    return ja->counts > jb->counts;
}

}  // namespace cartan
