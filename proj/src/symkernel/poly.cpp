#include "cartan/symkernel.hpp"

#include <algorithm>
#include <functional>
#include <mutex>
#include <regex>
#include <sstream>
#include <unordered_map>

namespace cartan {

namespace {

struct Registry {
    std::mutex mu;
    std::vector<std::string> names;
    std::vector<std::string> display;
    std::unordered_map<std::string, uint32_t> ids;
};

Registry& registry() {
    static Registry r;
    return r;
}

}  // namespace

Symbol::Symbol(const std::string& name) {
    auto& r = registry();
    std::lock_guard<std::mutex> lock(r.mu);
    auto it = r.ids.find(name);
    if (it != r.ids.end()) {
        id_ = it->second;
        return;
    }
    id_ = static_cast<uint32_t>(r.names.size());
    r.names.push_back(name);
    r.display.emplace_back();
    r.ids.emplace(name, id_);
}

Symbol Symbol::from_id(uint32_t id) {
    Symbol s;
    s.id_ = id;
    return s;
}

const std::string& Symbol::name() const {
    auto& r = registry();
    std::lock_guard<std::mutex> lock(r.mu);
    return r.names.at(id_);
}

bool Symbol::valid_name(const std::string& name) {
    static const std::regex re("[A-Za-z_][A-Za-z0-9_']*");
    return std::regex_match(name, re);
}

void set_display_name(Symbol s, const std::string& display) {
    auto& r = registry();
    std::lock_guard<std::mutex> lock(r.mu);
    r.display.at(s.id()) = display;
}

std::string display_name(Symbol s) {
    auto& r = registry();
    std::lock_guard<std::mutex> lock(r.mu);
    const auto& d = r.display.at(s.id());
    return d.empty() ? r.names.at(s.id()) : d;
}

std::ostream& operator<<(std::ostream& os, Symbol s) { return os << display_name(s); }

// ---- monomials ----

unsigned total_degree(const Monomial& m) {
    unsigned d = 0;
    for (auto& [v, e] : m) d += e;
    return d;
}

int grlex_compare(const Monomial& a, const Monomial& b) {
    unsigned da = total_degree(a), db = total_degree(b);
    if (da != db) return da > db ? 1 : -1;
    // lex with smaller id as the larger variable
    size_t i = 0;
    for (; i < a.size() && i < b.size(); ++i) {
        if (a[i].first != b[i].first) return a[i].first < b[i].first ? 1 : -1;
        if (a[i].second != b[i].second) return a[i].second > b[i].second ? 1 : -1;
    }
    if (i < a.size()) return 1;
    if (i < b.size()) return -1;
    return 0;
}

Monomial mono_mul(const Monomial& a, const Monomial& b) {
    Monomial r;
    r.reserve(a.size() + b.size());
    size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].first < b[j].first)) {
            r.push_back(a[i++]);
        } else if (i == a.size() || b[j].first < a[i].first) {
            r.push_back(b[j++]);
        } else {
            r.emplace_back(a[i].first, a[i].second + b[j].second);
            ++i;
            ++j;
        }
    }
    return r;
}

std::optional<Monomial> mono_div(const Monomial& a, const Monomial& b) {
    Monomial r;
    size_t i = 0;
    for (auto& [v, e] : b) {
        while (i < a.size() && a[i].first < v) r.push_back(a[i++]);
        if (i == a.size() || a[i].first != v || a[i].second < e) return std::nullopt;
        if (a[i].second > e) r.emplace_back(v, a[i].second - e);
        ++i;
    }
    while (i < a.size()) r.push_back(a[i++]);
    return r;
}

uint32_t mono_exponent(const Monomial& m, uint32_t var) {
    for (auto& [v, e] : m)
        if (v == var) return e;
    return 0;
}

// ---- polynomials ----

Poly::Poly(const Rational& c) {
    if (c != 0) terms_.push_back({{}, c});
}

Poly::Poly(Symbol s) { terms_.push_back({{{s.id(), 1u}}, Rational(1)}); }

Poly Poly::monomial(Monomial m, const Rational& c) {
    Poly p;
    if (c != 0) p.terms_.push_back({std::move(m), c});
    return p;
}

Poly Poly::from_terms(std::vector<Term> terms) {
    Poly p;
    p.terms_ = std::move(terms);
    p.normalize();
    return p;
}

void Poly::normalize() {
    std::sort(terms_.begin(), terms_.end(),
              [](const Term& a, const Term& b) { return grlex_compare(a.mono, b.mono) > 0; });
    std::vector<Term> out;
    out.reserve(terms_.size());
    for (auto& t : terms_) {
        if (!out.empty() && out.back().mono == t.mono) {
            out.back().coef += t.coef;
        } else {
            if (!out.empty() && out.back().coef == 0) out.pop_back();
            out.push_back(std::move(t));
        }
    }
    if (!out.empty() && out.back().coef == 0) out.pop_back();
    terms_ = std::move(out);
}

bool Poly::is_constant() const { return terms_.empty() || (terms_.size() == 1 && terms_[0].mono.empty()); }

bool Poly::is_one() const { return terms_.size() == 1 && terms_[0].mono.empty() && terms_[0].coef == 1; }

Rational Poly::constant_value() const { return terms_.empty() ? Rational(0) : terms_[0].coef; }

unsigned Poly::degree() const { return terms_.empty() ? 0 : total_degree(terms_[0].mono); }

unsigned Poly::degree_in(uint32_t var) const {
    unsigned d = 0;
    for (auto& t : terms_) d = std::max(d, mono_exponent(t.mono, var));
    return d;
}

std::vector<uint32_t> Poly::variables() const {
    std::vector<uint32_t> vs;
    for (auto& t : terms_)
        for (auto& [v, e] : t.mono) vs.push_back(v);
    std::sort(vs.begin(), vs.end());
    vs.erase(std::unique(vs.begin(), vs.end()), vs.end());
    return vs;
}

bool Poly::contains(uint32_t var) const {
    for (auto& t : terms_)
        for (auto& [v, e] : t.mono)
            if (v == var) return true;
    return false;
}

Poly Poly::operator-() const {
    Poly r = *this;
    for (auto& t : r.terms_) t.coef = -t.coef;
    return r;
}

Poly operator+(const Poly& a, const Poly& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    Poly r;
    r.terms_.reserve(a.terms_.size() + b.terms_.size());
    size_t i = 0, j = 0;
    while (i < a.terms_.size() && j < b.terms_.size()) {
        int c = grlex_compare(a.terms_[i].mono, b.terms_[j].mono);
        if (c > 0) {
            r.terms_.push_back(a.terms_[i++]);
        } else if (c < 0) {
            r.terms_.push_back(b.terms_[j++]);
        } else {
            Rational s = a.terms_[i].coef + b.terms_[j].coef;
            if (s != 0) r.terms_.push_back({a.terms_[i].mono, s});
            ++i;
            ++j;
        }
    }
    for (; i < a.terms_.size(); ++i) r.terms_.push_back(a.terms_[i]);
    for (; j < b.terms_.size(); ++j) r.terms_.push_back(b.terms_[j]);
    return r;
}

Poly operator-(const Poly& a, const Poly& b) { return a + (-b); }

Poly operator*(const Poly& a, const Poly& b) {
    if (a.is_zero() || b.is_zero()) return Poly();
    if (a.is_one()) return b;
    if (b.is_one()) return a;
    if (b.terms_.size() == 1) return a.mul_monomial(b.terms_[0].mono, b.terms_[0].coef);
    if (a.terms_.size() == 1) return b.mul_monomial(a.terms_[0].mono, a.terms_[0].coef);
    std::vector<Poly::Term> ts;
    ts.reserve(a.terms_.size() * b.terms_.size());
    for (auto& x : a.terms_)
        for (auto& y : b.terms_) ts.push_back({mono_mul(x.mono, y.mono), x.coef * y.coef});
    return Poly::from_terms(std::move(ts));
}

Poly Poly::scaled(const Rational& c) const {
    if (c == 0) return Poly();
    Poly r = *this;
    for (auto& t : r.terms_) t.coef *= c;
    return r;
}

Poly Poly::mul_monomial(const Monomial& m, const Rational& c) const {
    if (c == 0) return Poly();
    Poly r;
    r.terms_.reserve(terms_.size());
    // multiplying by a monomial preserves grlex order
    for (auto& t : terms_) r.terms_.push_back({mono_mul(t.mono, m), t.coef * c});
    return r;
}

Poly Poly::pow(unsigned k) const {
    Poly r(1), b = *this;
    while (k) {
        if (k & 1u) r = r * b;
        k >>= 1u;
        if (k) b = b * b;
    }
    return r;
}

bool operator==(const Poly& a, const Poly& b) {
    if (a.terms_.size() != b.terms_.size()) return false;
    for (size_t i = 0; i < a.terms_.size(); ++i)
        if (a.terms_[i].mono != b.terms_[i].mono || a.terms_[i].coef != b.terms_[i].coef) return false;
    return true;
}

int Poly::compare(const Poly& a, const Poly& b) {
    size_t n = std::min(a.terms_.size(), b.terms_.size());
    for (size_t i = 0; i < n; ++i) {
        int c = grlex_compare(a.terms_[i].mono, b.terms_[i].mono);
        if (c) return c;
        int d = cmp(a.terms_[i].coef, b.terms_[i].coef);
        if (d) return d > 0 ? 1 : -1;
    }
    if (a.terms_.size() != b.terms_.size()) return a.terms_.size() > b.terms_.size() ? 1 : -1;
    return 0;
}

Poly Poly::partial(uint32_t var) const {
    std::vector<Term> ts;
    for (auto& t : terms_) {
        uint32_t e = mono_exponent(t.mono, var);
        if (!e) continue;
        Monomial m;
        for (auto& [v, x] : t.mono) {
            if (v != var) m.emplace_back(v, x);
            else if (x > 1) m.emplace_back(v, x - 1);
        }
        ts.push_back({std::move(m), t.coef * e});
    }
    return from_terms(std::move(ts));
}

static Rational rpow(const Rational& b, unsigned e) {
    Rational r(1);
    for (unsigned i = 0; i < e; ++i) r *= b;
    return r;
}

Rational Poly::evaluate(const std::map<uint32_t, Rational>& point) const {
    Rational s(0);
    for (auto& t : terms_) {
        Rational v = t.coef;
        for (auto& [var, e] : t.mono) {
            auto it = point.find(var);
            if (it == point.end())
                throw std::invalid_argument("evaluate: unbound symbol " + Symbol::from_id(var).name());
            v *= rpow(it->second, e);
        }
        s += v;
    }
    return s;
}

Poly Poly::evaluate_partial(const std::map<uint32_t, Rational>& point) const {
    std::vector<Term> ts;
    ts.reserve(terms_.size());
    for (auto& t : terms_) {
        Rational c = t.coef;
        Monomial m;
        for (auto& [var, e] : t.mono) {
            auto it = point.find(var);
            if (it == point.end()) m.emplace_back(var, e);
            else c *= rpow(it->second, e);
        }
        ts.push_back({std::move(m), c});
    }
    return from_terms(std::move(ts));
}

std::map<unsigned, Poly> Poly::coefficients_in(uint32_t var) const {
    std::map<unsigned, std::vector<Term>> parts;
    for (auto& t : terms_) {
        unsigned e = 0;
        Monomial m;
        for (auto& [v, x] : t.mono) {
            if (v == var) e = x;
            else m.emplace_back(v, x);
        }
        parts[e].push_back({std::move(m), t.coef});
    }
    std::map<unsigned, Poly> out;
    for (auto& [e, ts] : parts) out[e] = from_terms(std::move(ts));
    return out;
}

Poly Poly::from_coefficients(uint32_t var, const std::map<unsigned, Poly>& coeffs) {
    std::vector<Term> ts;
    for (auto& [e, c] : coeffs) {
        Monomial xm;
        if (e) xm.emplace_back(var, e);
        for (auto& t : c.terms_) ts.push_back({mono_mul(t.mono, xm), t.coef});
    }
    return from_terms(std::move(ts));
}

Monomial Poly::monomial_content() const {
    if (terms_.empty()) return {};
    Monomial g = terms_[0].mono;
    for (size_t i = 1; i < terms_.size() && !g.empty(); ++i) {
        Monomial r;
        for (auto& [v, e] : g) {
            uint32_t x = mono_exponent(terms_[i].mono, v);
            if (x) r.emplace_back(v, std::min(e, x));
        }
        g = std::move(r);
    }
    return g;
}

Poly Poly::monic() const {
    if (terms_.empty() || terms_[0].coef == 1) return *this;
    Rational inv = 1 / terms_[0].coef;
    return scaled(inv);
}

static std::string rational_str(const Rational& q) { return q.get_str(); }

std::string Poly::str() const {
    if (terms_.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto& t : terms_) {
        Rational c = t.coef;
        bool neg = c < 0;
        if (neg) c = -c;
        if (first) {
            if (neg) os << "-";
        } else {
            os << (neg ? " - " : " + ");
        }
        first = false;
        bool unit = (c == 1);
        if (!unit || t.mono.empty()) {
            os << rational_str(c);
            if (!t.mono.empty()) os << "*";
        }
        bool firstv = true;
        for (auto& [v, e] : t.mono) {
            if (!firstv) os << "*";
            firstv = false;
            os << display_name(Symbol::from_id(v));
            if (e > 1) os << "^" << e;
        }
    }
    return os.str();
}

size_t Poly::hash() const {
    size_t h = terms_.size();
    std::hash<std::string> hs;
    for (auto& t : terms_) {
        for (auto& [v, e] : t.mono) h = h * 1000003u ^ (v * 31u + e);
        h = h * 1000003u ^ hs(t.coef.get_str());
    }
    return h;
}

std::ostream& operator<<(std::ostream& os, const Poly& p) { return os << p.str(); }

}  // namespace cartan
