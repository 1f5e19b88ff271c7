#include "cartan/forms.hpp"

#include <algorithm>
#include <mutex>
#include <set>
#include <sstream>

namespace cartan {

// ---- charts ----

int Chart::index(Symbol s) const {
    for (size_t i = 0; i < coords.size(); ++i)
        if (coords[i] == s) return static_cast<int>(i);
    return -1;
}

int Chart::base_position(Symbol s) const {
    for (size_t i = 0; i < base.size(); ++i)
        if (base[i] == s) return static_cast<int>(i);
    return -1;
}

std::vector<Symbol> Chart::fibers() const {
    std::vector<Symbol> out;
    for (auto s : coords)
        if (!is_base(s)) out.push_back(s);
    return out;
}

const FamilyMember* Chart::family_member(Symbol s, std::string* family) const {
    for (auto& [name, members] : families)
        for (auto& m : members)
            if (m.coord == s) {
                if (family) *family = name;
                return &m;
            }
    return nullptr;
}

ChartPtr make_chart(const std::string& name, const std::vector<Symbol>& base, const std::vector<Symbol>& fibers,
                    const std::vector<Rational>& metric) {
    auto c = std::make_shared<Chart>();
    c->name = name;
    c->base = base;
    c->coords = base;
    c->coords.insert(c->coords.end(), fibers.begin(), fibers.end());
    c->metric = metric;
    std::set<Symbol> seen(c->coords.begin(), c->coords.end());
    if (seen.size() != c->coords.size()) throw std::invalid_argument("chart " + name + ": duplicate coordinate");
    if (!metric.empty() && metric.size() != base.size())
        throw std::invalid_argument("chart " + name + ": metric must cover the base coordinates");
    for (auto& g : metric)
        if (g == 0) throw std::invalid_argument("chart " + name + ": degenerate metric");
    return c;
}

ChartPtr slice_chart(const ChartPtr& c, Symbol coord) {
    static std::mutex mu;
    static std::map<std::pair<const Chart*, uint32_t>, std::pair<ChartPtr, ChartPtr>> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_pair(c.get(), coord.id());
    auto it = cache.find(key);
    if (it != cache.end()) return it->second.second;
    auto s = std::make_shared<Chart>();
    s->name = c->name + "|" + coord.name();
    int removed = c->base_position(coord);
    for (auto x : c->coords)
        if (x != coord) s->coords.push_back(x);
    for (size_t i = 0; i < c->base.size(); ++i)
        if (c->base[i] != coord) {
            s->base.push_back(c->base[i]);
            if (!c->metric.empty()) s->metric.push_back(c->metric[i]);
        }
    auto shift = [&](const std::vector<int>& lab, std::vector<int>& out) {
        out.clear();
        for (int p : lab) {
            if (p == removed) return false;
            out.push_back(removed >= 0 && p > removed ? p - 1 : p);
        }
        return true;
    };
    s->family_order = c->family_order;
    for (auto& [name, members] : c->families) {
        auto& dst = s->families[name];
        for (auto& m : members) {
            std::vector<int> lab;
            if (m.coord != coord && shift(m.label, lab)) dst.push_back({m.coord, lab});
        }
    }
    for (auto& [id, j] : c->jets) {
        std::vector<int> lab;
        if (id != coord.id() && shift(j.multi, lab)) s->jets[id] = {j.root, lab};
    }
    ChartPtr sp = s;
    cache[key] = {c, sp};
    return sp;
}

// ---- forms ----

DiffForm DiffForm::scalar(ChartPtr chart, const Expr& f) {
    DiffForm r(std::move(chart), 0);
    if (!f.is_zero()) r.terms_[{}] = f;
    return r;
}

DiffForm DiffForm::d_coord(ChartPtr chart, Symbol s) {
    int i = chart->index(s);
    if (i < 0) throw std::invalid_argument("d(" + s.name() + "): not a coordinate of chart " + chart->name);
    DiffForm r(std::move(chart), 1);
    r.terms_[{static_cast<uint16_t>(i)}] = Expr(1);
    return r;
}

DiffForm DiffForm::basis(ChartPtr chart, const Index& idx, const Expr& c) {
    DiffForm r(std::move(chart), static_cast<int>(idx.size()));
    r.add_term(idx, c);
    return r;
}

Expr DiffForm::coefficient(const Index& idx) const {
    auto it = terms_.find(idx);
    return it == terms_.end() ? Expr() : it->second;
}

Expr DiffForm::value() const {
    if (degree_ != 0) throw std::logic_error("value() of a form of positive degree");
    return coefficient({});
}

void DiffForm::add_term(const Index& idx, const Expr& c) {
    if (c.is_zero()) return;
    auto it = terms_.find(idx);
    if (it == terms_.end()) {
        terms_.emplace(idx, c);
        return;
    }
    it->second += c;
    if (it->second.is_zero()) terms_.erase(it);
}

static void check_same(const DiffForm& a, const DiffForm& b) {
    if (a.chart() != b.chart() && !(a.chart() && b.chart() && a.chart()->same_as(*b.chart()))) throw ChartMismatch();
}

DiffForm DiffForm::operator-() const {
    DiffForm r = *this;
    for (auto& [i, c] : r.terms_) c = -c;
    return r;
}

DiffForm operator+(const DiffForm& a, const DiffForm& b) {
    if (!a.chart_) return b;
    if (!b.chart_) return a;
    check_same(a, b);
    if (a.is_zero()) {
        if (b.is_zero() && a.degree_ != b.degree_) return a;
        return b;
    }
    if (b.is_zero()) return a;
    if (a.degree_ != b.degree_) throw std::invalid_argument("adding forms of different degree");
    DiffForm r = a;
    for (auto& [i, c] : b.terms_) r.add_term(i, c);
    return r;
}

DiffForm operator-(const DiffForm& a, const DiffForm& b) { return a + (-b); }

DiffForm operator*(const Expr& f, const DiffForm& a) {
    DiffForm r(a.chart_, a.degree_);
    if (f.is_zero()) return r;
    for (auto& [i, c] : a.terms_) {
        Expr v = f * c;
        if (!v.is_zero()) r.terms_.emplace(i, std::move(v));
    }
    return r;
}

bool operator==(const DiffForm& a, const DiffForm& b) {
    if (a.is_zero() && b.is_zero()) return true;
    return a.degree_ == b.degree_ && a.terms_ == b.terms_ &&
           (a.chart_ == b.chart_ || (a.chart_ && b.chart_ && a.chart_->same_as(*b.chart_)));
}

DiffForm DiffForm::substitute_coefficients(const Bindings& b) const {
    DiffForm r(chart_, degree_);
    for (auto& [i, c] : terms_) r.add_term(i, substitute(c, b));
    return r;
}

DiffForm DiffForm::evaluate_coefficients(const Point& p) const {
    DiffForm r(chart_, degree_);
    for (auto& [i, c] : terms_) r.add_term(i, c.evaluate_partial(p));
    return r;
}

DiffForm DiffForm::on_chart(ChartPtr other) const {
    DiffForm r(other, degree_);
    for (auto& [idx, c] : terms_) {
        std::vector<int> pos;
        for (auto k : idx) {
            int p = other->index(chart_->coords[k]);
            if (p < 0) throw ChartMismatch();
            pos.push_back(p);
        }
        // sort with sign
        int sign = 1;
        for (size_t i = 0; i < pos.size(); ++i)
            for (size_t j = i + 1; j < pos.size(); ++j)
                if (pos[i] > pos[j]) sign = -sign;
        std::sort(pos.begin(), pos.end());
        Index ni(pos.begin(), pos.end());
        r.add_term(ni, sign > 0 ? c : -c);
    }
    return r;
}

bool DiffForm::is_semibasic() const {
    for (auto& [idx, c] : terms_)
        for (auto k : idx)
            if (!chart_->is_base(chart_->coords[k])) return false;
    return true;
}

bool DiffForm::uses_differential(Symbol s) const {
    int i = chart_->index(s);
    if (i < 0) return false;
    for (auto& [idx, c] : terms_)
        if (std::find(idx.begin(), idx.end(), static_cast<uint16_t>(i)) != idx.end()) return true;
    return false;
}

std::vector<Symbol> DiffForm::differentials_used() const {
    std::set<uint16_t> ks;
    for (auto& [idx, c] : terms_) ks.insert(idx.begin(), idx.end());
    std::vector<Symbol> out;
    for (auto k : ks) out.push_back(chart_->coords[k]);
    return out;
}

std::vector<uint32_t> DiffForm::coefficient_variables() const {
    std::set<uint32_t> vs;
    for (auto& [idx, c] : terms_)
        for (auto v : c.variables()) vs.insert(v);
    return {vs.begin(), vs.end()};
}

DiffForm DiffForm::sign_normalized() const {
    if (terms_.empty()) return *this;
    const Expr& lead = terms_.begin()->second;
    if (lead.num().leading_coef() < 0) return -*this;
    return *this;
}

std::string DiffForm::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto& [idx, c] : terms_) {
        std::string basis;
        for (size_t i = 0; i < idx.size(); ++i) {
            if (i) basis += "^";
            basis += "d" + display_name(chart_->coords[idx[i]]);
        }
        std::string cs = c.str();
        bool neg = false;
        Expr cc = c;
        if (c.num().leading_coef() < 0 && (c.num().terms().size() == 1)) {
            neg = true;
            cc = -c;
            cs = cc.str();
        }
        if (!first) os << (neg ? " - " : " + ");
        else if (neg) os << "-";
        first = false;
        if (idx.empty()) {
            os << cs;
            continue;
        }
        if (cc.is_one()) {
            os << basis;
        } else {
            bool paren = cc.num().terms().size() > 1 && cc.den().is_one();
            os << (paren ? "(" + cs + ")" : cs) << "*" << basis;
        }
    }
    return os.str();
}

std::ostream& operator<<(std::ostream& os, const DiffForm& f) { return os << f.str(); }

int merge_sign(const Index& a, const Index& b, Index& out) {
    out.clear();
    out.reserve(a.size() + b.size());
    size_t i = 0, j = 0;
    int inversions = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] == b[j]) return 0;
        if (a[i] < b[j]) {
            out.push_back(a[i++]);
        } else {
            inversions += static_cast<int>(a.size() - i);
            out.push_back(b[j++]);
        }
    }
    while (i < a.size()) out.push_back(a[i++]);
    while (j < b.size()) out.push_back(b[j++]);
    return (inversions % 2) ? -1 : 1;
}

VectorField VectorField::coordinate(ChartPtr chart, Symbol s) {
    VectorField v;
    v.chart = std::move(chart);
    v.components[s] = Expr(1);
    return v;
}

Expr VectorField::apply(const Expr& f) const {
    Expr r;
    for (auto& [s, c] : components)
        if (f.depends_on(s)) r += c * partial(f, s);
    return r;
}

DiffForm wedge(const DiffForm& a, const DiffForm& b) {
    check_same(a, b);
    DiffForm r(a.chart(), a.degree() + b.degree());
    Index out;
    for (auto& [ia, ca] : a.terms())
        for (auto& [ib, cb] : b.terms()) {
            int s = merge_sign(ia, ib, out);
            if (!s) continue;
            Expr v = ca * cb;
            r.add_term(out, s > 0 ? v : -v);
        }
    return r;
}

DiffForm exterior_derivative(const DiffForm& a) {
    DiffForm r(a.chart(), a.degree() + 1);
    const Chart& ch = *a.chart();
    Index out;
    for (auto& [idx, c] : a.terms()) {
        for (uint32_t v : c.variables()) {
            int k = ch.index(Symbol::from_id(v));
            if (k < 0) continue;  // symbols outside the chart are parameters
            Index one{static_cast<uint16_t>(k)};
            int s = merge_sign(one, idx, out);
            if (!s) continue;
            Expr dc = partial(c, Symbol::from_id(v));
            r.add_term(out, s > 0 ? dc : -dc);
        }
    }
    return r;
}

DiffForm interior_product(const VectorField& X, const DiffForm& a) {
    if (a.degree() == 0) throw DegreeZero();
    if (X.chart && a.chart() && X.chart != a.chart() && !X.chart->same_as(*a.chart())) throw ChartMismatch();
    DiffForm r(a.chart(), a.degree() - 1);
    const Chart& ch = *a.chart();
    std::map<uint16_t, Expr> comp;
    for (auto& [s, c] : X.components) {
        int k = ch.index(s);
        if (k < 0) throw ChartMismatch();
        if (!c.is_zero()) comp[static_cast<uint16_t>(k)] = c;
    }
    for (auto& [idx, c] : a.terms()) {
        for (size_t p = 0; p < idx.size(); ++p) {
            auto it = comp.find(idx[p]);
            if (it == comp.end()) continue;
            Index rest;
            for (size_t q = 0; q < idx.size(); ++q)
                if (q != p) rest.push_back(idx[q]);
            Expr v = it->second * c;
            r.add_term(rest, (p % 2) ? -v : v);
        }
    }
    return r;
}

DiffForm lie_derivative(const VectorField& X, const DiffForm& a) {
    if (a.degree() == 0) return DiffForm::scalar(a.chart(), X.apply(a.value()));
    return interior_product(X, exterior_derivative(a)) + exterior_derivative(interior_product(X, a));
}

DiffForm pullback(const ChartMap& f, const DiffForm& a) {
    if (a.chart() != f.target && !a.chart()->same_as(*f.target)) throw ChartMismatch();
    const Chart& tgt = *f.target;
    Bindings b;
    std::vector<DiffForm> dimg(tgt.dim());
    std::vector<bool> done(tgt.dim(), false);
    for (size_t i = 0; i < tgt.dim(); ++i) {
        auto it = f.images.find(tgt.coords[i]);
        if (it == f.images.end()) throw std::invalid_argument("chart map lacks an image for " + tgt.coords[i].name());
        b[tgt.coords[i]] = it->second;
    }
    auto dimage = [&](uint16_t k) -> const DiffForm& {
        if (!done[k]) {
            dimg[k] = exterior_derivative(DiffForm::scalar(f.source, b[tgt.coords[k]]));
            done[k] = true;
        }
        return dimg[k];
    };
    DiffForm r(f.source, a.degree());
    for (auto& [idx, c] : a.terms()) {
        Expr cs = substitute(c, b);
        if (cs.is_zero()) continue;
        DiffForm t = DiffForm::scalar(f.source, cs);
        for (auto k : idx) {
            t = wedge(t, dimage(k));
            if (t.is_zero()) break;
        }
        r += t;
    }
    if (r.is_zero()) return DiffForm(f.source, a.degree());
    return r;
}

ChartMap compose(const ChartMap& f, const ChartMap& g) {
    ChartMap h;
    h.source = g.source;
    h.target = f.target;
    Bindings b(g.images.begin(), g.images.end());
    for (auto& [s, e] : f.images) h.images[s] = substitute(e, b);
    return h;
}

ChartMap slice_inclusion(const ChartPtr& chart, Symbol coord, const Rational& value) {
    ChartMap m;
    m.target = chart;
    m.source = slice_chart(chart, coord);
    for (auto s : chart->coords) m.images[s] = (s == coord) ? Expr(value) : Expr(s);
    return m;
}

DiffForm restrict_to_slice(const DiffForm& a, Symbol coord, const Rational& value) {
    ChartPtr sc = slice_chart(a.chart(), coord);
    int k = a.chart()->index(coord);
    if (k < 0) throw std::invalid_argument("restrict_to_slice: " + coord.name() + " is not a coordinate");
    Bindings b{{coord, Expr(value)}};
    DiffForm r(sc, a.degree());
    for (auto& [idx, c] : a.terms()) {
        if (std::find(idx.begin(), idx.end(), static_cast<uint16_t>(k)) != idx.end()) continue;
        Index ni;
        for (auto i : idx) ni.push_back(static_cast<uint16_t>(i > k ? i - 1 : i));
        r.add_term(ni, substitute(c, b));
    }
    return r;
}

DiffForm hodge_star_semibasic(const DiffForm& a) {
    const Chart& ch = *a.chart();
    if (ch.metric.empty()) throw NoMetric();
    if (!a.is_semibasic()) throw NotSemibasic();
    size_t n = ch.base.size();
    std::vector<uint16_t> base_idx(n);
    for (size_t i = 0; i < n; ++i) base_idx[i] = static_cast<uint16_t>(ch.index(ch.base[i]));
    DiffForm r(a.chart(), static_cast<int>(n) - a.degree());
    for (auto& [idx, c] : a.terms()) {
        // base positions of the term, in orientation order
        std::vector<size_t> pos;
        for (auto k : idx) pos.push_back(static_cast<size_t>(ch.base_position(ch.coords[k])));
        int sign = 1;
        for (size_t i = 0; i < pos.size(); ++i)
            for (size_t j = i + 1; j < pos.size(); ++j)
                if (pos[i] > pos[j]) sign = -sign;
        std::sort(pos.begin(), pos.end());
        std::vector<size_t> comp;
        for (size_t p = 0; p < n; ++p)
            if (!std::binary_search(pos.begin(), pos.end(), p)) comp.push_back(p);
        // sign of the permutation (pos, comp) of 0..n-1
        std::vector<size_t> perm = pos;
        perm.insert(perm.end(), comp.begin(), comp.end());
        for (size_t i = 0; i < perm.size(); ++i)
            for (size_t j = i + 1; j < perm.size(); ++j)
                if (perm[i] > perm[j]) sign = -sign;
        Rational g(1);
        for (auto p : pos) g /= ch.metric[p];
        // express e_comp (orientation order) in chart index order
        std::vector<uint16_t> ci;
        for (auto p : comp) ci.push_back(base_idx[p]);
        for (size_t i = 0; i < ci.size(); ++i)
            for (size_t j = i + 1; j < ci.size(); ++j)
                if (ci[i] > ci[j]) sign = -sign;
        std::sort(ci.begin(), ci.end());
        Expr v = Expr(g) * c;
        r.add_term(Index(ci.begin(), ci.end()), sign > 0 ? v : -v);
    }
    return r;
}

DiffForm canonical_form(const ChartPtr& chart, const std::string& family) {
    auto it = chart->families.find(family);
    if (it == chart->families.end()) throw BadChartLabeling("no family " + family);
    int k = -1;
    DiffForm r;
    for (auto& m : it->second) {
        if (k < 0) {
            k = static_cast<int>(m.label.size());
            r = DiffForm(chart, k);
        }
        if (static_cast<int>(m.label.size()) != k) throw BadChartLabeling("mixed degrees in family " + family);
        Index idx;
        for (size_t i = 0; i < m.label.size(); ++i) {
            if (i && m.label[i] <= m.label[i - 1]) throw BadChartLabeling("label not increasing in " + family);
            idx.push_back(static_cast<uint16_t>(chart->index(chart->base.at(static_cast<size_t>(m.label[i])))));
        }
        // base order and chart order agree since base coords come first
        std::vector<uint16_t> sorted = idx;
        int sign = 1;
        for (size_t i = 0; i < sorted.size(); ++i)
            for (size_t j = i + 1; j < sorted.size(); ++j)
                if (sorted[i] > sorted[j]) sign = -sign;
        std::sort(sorted.begin(), sorted.end());
        r.add_term(Index(sorted.begin(), sorted.end()), sign > 0 ? Expr(m.coord) : -Expr(m.coord));
    }
    if (k < 0) throw BadChartLabeling("empty family " + family);
    return r;
}

DiffForm canonical_form(const ChartPtr& chart, int k) {
    std::string found;
    for (auto& [name, members] : chart->families) {
        if (members.empty() || static_cast<int>(members[0].label.size()) != k) continue;
        if (!found.empty()) throw BadChartLabeling("several families of degree " + std::to_string(k));
        found = name;
    }
    if (found.empty()) throw BadChartLabeling("no family of degree " + std::to_string(k));
    return canonical_form(chart, found);
}

}  // namespace cartan
