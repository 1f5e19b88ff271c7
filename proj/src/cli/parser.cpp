#include "cartan/cli.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace cartan {

namespace {

std::string position_prefix(int line, int column) {
    return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": ";
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
    std::string out;
    for (size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
    return out;
}

}  // namespace

SpecError::SpecError(int line, int column, const std::string& what)
    : std::runtime_error(position_prefix(line, column) + what), line_(line), column_(column) {}

SyntaxError::SyntaxError(int line, int column, std::vector<std::string> expected, const std::string& found)
    : SpecError(line, column, "expected " + join(expected, " or ") + ", found " + found),
      expected_(std::move(expected)) {}

UnresolvedName::UnresolvedName(int line, int column, const std::string& name, const std::string& why)
    : SpecError(line, column, why + ": " + name), name_(name) {}

const DiffForm* ProblemSpec::form(const std::string& name) const {
    for (auto& [n, f] : forms)
        if (n == name) return &f;
    return nullptr;
}

namespace {

struct Token {
    enum Kind { ident, number, punct, end } kind;
    std::string text;
    int line, col;
};

std::vector<Token> lex(const std::string& src) {
    std::vector<Token> out;
    int line = 1, col = 1;
    size_t i = 0;
    auto adv = [&](size_t k) {
        for (size_t j = 0; j < k; ++j) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
            ++i;
        }
    };
    while (i < src.size()) {
        char ch = src[i];
        if (ch == '#') {
            while (i < src.size() && src[i] != '\n') adv(1);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(ch))) {
            adv(1);
            continue;
        }
        int l = line, c = col;
        if (std::isalpha(static_cast<unsigned char>(ch)) || ch == '_') {
            size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) ++j;
            out.push_back({Token::ident, src.substr(i, j - i), l, c});
            adv(j - i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(ch))) {
            size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            out.push_back({Token::number, src.substr(i, j - i), l, c});
            adv(j - i);
            continue;
        }
        static const char* two[] = {"..", "==", "**"};
        bool matched = false;
        for (auto t : two)
            if (src.compare(i, 2, t) == 0) {
                out.push_back({Token::punct, t, l, c});
                adv(2);
                matched = true;
                break;
            }
        if (matched) continue;
        if (std::string("(){}[];,=+-*/^:").find(ch) != std::string::npos) {
            out.push_back({Token::punct, std::string(1, ch), l, c});
            adv(1);
            continue;
        }
        throw SyntaxError(l, c, {"a name, number or operator"}, "'" + std::string(1, ch) + "'");
    }
    out.push_back({Token::end, "", line, col});
    return out;
}

class Parser {
public:
    explicit Parser(const std::string& text) : toks_(lex(text)) {}

    ProblemSpec parse() {
        while (peek().kind != Token::end) statement();
        out_.chart = chart();
        for (auto& [n, f] : out_.forms) f = f.on_chart(out_.chart);
        return out_;
    }

private:
    std::vector<Token> toks_;
    size_t pos_ = 0;
    std::map<std::string, long> vars_;

    std::string chart_name_ = "spec";
    std::vector<Symbol> base_, fibers_;
    std::vector<Rational> metric_;
    std::vector<std::string> family_order_;
    std::map<std::string, std::vector<FamilyMember>> families_;
    std::map<uint32_t, JetLabel> jets_;
    ChartPtr chart_;
    ProblemSpec out_;

    // ---- tokens

    const Token& peek(size_t k = 0) const { return toks_[std::min(pos_ + k, toks_.size() - 1)]; }
    const Token& next() {
        const Token& t = peek();
        if (pos_ < toks_.size() - 1) ++pos_;
        return t;
    }
    bool is(const std::string& p) const { return peek().kind != Token::end && peek().text == p && peek().kind != Token::number; }
    bool accept(const std::string& p) {
        if (!is(p)) return false;
        next();
        return true;
    }
    static std::string describe(const Token& t) {
        if (t.kind == Token::end) return "end of input";
        return "'" + t.text + "'";
    }
    [[noreturn]] void fail(std::vector<std::string> expected) const {
        throw SyntaxError(peek().line, peek().col, std::move(expected), describe(peek()));
    }
    const Token& expect(const std::string& p) {
        if (!is(p)) fail({"'" + p + "'"});
        return next();
    }
    const Token& expect_ident() {
        if (peek().kind != Token::ident) fail({"a name"});
        return next();
    }

    // ---- chart

    void touch() { chart_.reset(); }

    ChartPtr chart() {
        if (chart_) return chart_;
        auto c = std::make_shared<Chart>(*make_chart(chart_name_, base_, fibers_, metric_));
        c->families = families_;
        c->family_order = family_order_;
        c->jets = jets_;
        chart_ = c;
        return chart_;
    }

    bool declared(Symbol s) const {
        return std::find(base_.begin(), base_.end(), s) != base_.end() ||
               std::find(fibers_.begin(), fibers_.end(), s) != fibers_.end();
    }

    int base_pos(Symbol s) const {
        auto it = std::find(base_.begin(), base_.end(), s);
        return it == base_.end() ? -1 : static_cast<int>(it - base_.begin());
    }

    bool is_fiber(Symbol s) const { return std::find(fibers_.begin(), fibers_.end(), s) != fibers_.end(); }

    // ---- names with integer indices: eta[a][mu] -> "eta" + a + mu

    std::string indexed_name(const Token& head) {
        std::string name = head.text;
        while (accept("[")) {
            name += std::to_string(int_expr());
            expect("]");
        }
        return name;
    }

    Symbol new_symbol(const Token& at, const std::string& name) {
        if (!Symbol::valid_name(name)) throw SpecError(at.line, at.col, "not a valid symbol name: " + name);
        Symbol s(name);
        if (declared(s)) throw SpecError(at.line, at.col, "coordinate declared twice: " + name);
        return s;
    }

    Symbol coordinate(bool base_only) {
        const Token& t = expect_ident();
        std::string name = indexed_name(t);
        if (!Symbol::valid_name(name)) throw UnresolvedName(t.line, t.col, name);
        Symbol s(name);
        if (base_only && base_pos(s) < 0) throw UnresolvedName(t.line, t.col, name, "not a base coordinate");
        if (!declared(s)) throw UnresolvedName(t.line, t.col, name, "not a coordinate");
        return s;
    }

    // ---- integer expressions (indices and ranges)

    long int_expr() {
        long v = int_term();
        for (;;) {
            if (accept("+")) v += int_term();
            else if (accept("-")) v -= int_term();
            else return v;
        }
    }
    long int_term() {
        long v = int_atom();
        while (accept("*")) v *= int_atom();
        return v;
    }
    long int_atom() {
        if (accept("-")) return -int_atom();
        if (accept("(")) {
            long v = int_expr();
            expect(")");
            return v;
        }
        const Token& t = peek();
        if (t.kind == Token::number) {
            next();
            return std::stol(t.text);
        }
        if (t.kind == Token::ident) {
            auto it = vars_.find(t.text);
            if (it == vars_.end()) throw UnresolvedName(t.line, t.col, t.text, "not an index variable");
            next();
            return it->second;
        }
        fail({"an integer", "an index variable"});
    }

    struct Range {
        std::string var;
        long lo, hi;
    };
    Range range_header() {
        const Token& v = expect_ident();
        expect("in");
        long lo = int_expr();
        expect("..");
        long hi = int_expr();
        return {v.text, lo, hi};
    }

    // Skip tokens up to (not including) one of `stops` at bracket depth 0.
    void skip_until(const std::string& stops) {
        int depth = 0;
        for (;;) {
            const Token& t = peek();
            if (t.kind == Token::end) fail({"'" + stops.substr(0, 1) + "'"});
            if (t.kind == Token::punct) {
                if (depth == 0 && stops.find(t.text) != std::string::npos && t.text.size() == 1) return;
                if (t.text == "(" || t.text == "[" || t.text == "{") ++depth;
                if (t.text == ")" || t.text == "]" || t.text == "}") --depth;
            }
            next();
        }
    }

    // ---- form expressions

    DiffForm scalar(const Expr& e) { return DiffForm::scalar(chart(), e); }

    DiffForm expr() {
        DiffForm acc;
        const Token& first = peek();
        if (accept("-")) acc = -term();
        else {
            accept("+");
            acc = term();
        }
        (void)first;
        for (;;) {
            const Token& op = peek();
            if (!is("+") && !is("-")) return acc;
            next();
            DiffForm rhs = term();
            if (rhs.degree() != acc.degree())
                throw DegreeMismatch(op.line, op.col,
                                     "adding forms of degree " + std::to_string(acc.degree()) + " and " +
                                         std::to_string(rhs.degree()));
            acc = op.text == "+" ? acc + rhs : acc - rhs;
        }
    }

    DiffForm term() {
        DiffForm acc = factor();
        for (;;) {
            const Token& op = peek();
            if (accept("^")) {
                acc = wedge(acc, factor());
            } else if (accept("*")) {
                DiffForm rhs = factor();
                if (acc.degree() != 0 && rhs.degree() != 0)
                    throw DegreeMismatch(op.line, op.col, "'*' needs a 0-form on one side; use '^' for wedge");
                acc = wedge(acc, rhs);
            } else if (accept("/")) {
                DiffForm rhs = factor();
                if (rhs.degree() != 0) throw DegreeMismatch(op.line, op.col, "division by a form of positive degree");
                if (rhs.is_zero()) throw SpecError(op.line, op.col, "division by zero");
                acc = (Expr(1) / rhs.value()) * acc;
            } else {
                return acc;
            }
        }
    }

    DiffForm factor() {
        if (accept("-")) return -factor();
        DiffForm base = primary();
        const Token& op = peek();
        if (accept("**")) {
            long k = int_atom();
            if (base.degree() != 0) throw DegreeMismatch(op.line, op.col, "power of a form of positive degree");
            if (k < 0) throw SpecError(op.line, op.col, "negative power");
            return scalar(base.is_zero() ? Expr(k == 0 ? 1 : 0) : base.value().pow(static_cast<int>(k)));
        }
        return base;
    }

    DiffForm primary() {
        const Token& t = peek();
        if (t.kind == Token::number) {
            next();
            return scalar(Expr(Rational(t.text)));
        }
        if (accept("(")) {
            DiffForm f = expr();
            expect(")");
            return f;
        }
        if (t.kind != Token::ident) fail({"a number", "a name", "'('"});
        if (peek(1).text == "(" && peek(1).kind == Token::punct) {
            if (t.text == "d") {
                next();
                expect("(");
                DiffForm f = expr();
                expect(")");
                return d(f);
            }
            if (t.text == "hodge") {
                next();
                expect("(");
                DiffForm f = expr();
                expect(")");
                if (!f.is_semibasic()) throw DegreeMismatch(t.line, t.col, "hodge() needs a semibasic form");
                return hodge_star_semibasic(f);
            }
            if (t.text == "contract") {
                next();
                expect("(");
                Symbol v = coordinate(false);
                expect(",");
                DiffForm f = expr();
                expect(")");
                if (f.degree() == 0) throw DegreeMismatch(t.line, t.col, "contract() of a 0-form");
                return interior_product(VectorField::coordinate(chart(), v), f);
            }
            if (t.text == "partial") {
                next();
                expect("(");
                DiffForm f = expr();
                expect(",");
                Symbol v = coordinate(false);
                expect(")");
                if (f.degree() != 0) throw DegreeMismatch(t.line, t.col, "partial() of a form of positive degree");
                return scalar(partial(f.value(), v));
            }
            if (t.text == "D") return jet_call();
            if (t.text == "sum") return sum_call();
        }
        next();
        std::string name = indexed_name(t);
        if (auto it = vars_.find(name); it != vars_.end()) return scalar(Expr(Rational(it->second)));
        for (auto& [n, f] : out_.forms)
            if (n == name) return f.on_chart(chart());
        if (Symbol::valid_name(name) && declared(Symbol(name))) return scalar(Expr(Symbol(name)));
        throw UnresolvedName(t.line, t.col, name);
    }

    // D(field, coord, ...): the derivative symbol of a field along base coordinates.
    DiffForm jet_call() {
        const Token& t = next();
        expect("(");
        const Token& ft = peek();
        Symbol f = coordinate(false);
        if (!is_fiber(f)) throw UnresolvedName(ft.line, ft.col, f.name(), "not a fiber coordinate");
        std::vector<int> counts(base_.size());
        while (accept(",")) counts[static_cast<size_t>(base_pos(coordinate(true)))]++;
        expect(")");
        (void)t;
        JetSpace jets(base_, fibers_);
        return scalar(Expr(jets.jet(f, counts)));
    }

    DiffForm sum_call() {
        next();
        expect("(");
        Range r = range_header();
        expect(",");
        size_t start = pos_;
        DiffForm acc;
        bool any = false;
        auto saved = vars_;
        for (long v = r.lo; v <= r.hi; ++v) {
            pos_ = start;
            vars_[r.var] = v;
            DiffForm f = expr();
            if (any && f.degree() != acc.degree())
                throw DegreeMismatch(toks_[start].line, toks_[start].col, "sum() terms of different degrees");
            acc = any ? acc + f : f;
            any = true;
        }
        vars_ = saved;
        if (!any) {
            pos_ = start;
            skip_until(")");
            acc = scalar(Expr(0));
        }
        expect(")");
        return acc;
    }

    // `{ item, item, forall v in a..b: item }`
    std::vector<DiffForm> form_list() {
        std::vector<DiffForm> out;
        expect("{");
        if (accept("}")) return out;
        for (;;) {
            list_item(out);
            if (accept("}")) return out;
            expect(",");
        }
    }

    void list_item(std::vector<DiffForm>& out) {
        if (!accept("forall")) {
            out.push_back(expr());
            return;
        }
        Range r = range_header();
        expect(":");
        size_t start = pos_;
        auto saved = vars_;
        bool any = false;
        for (long v = r.lo; v <= r.hi; ++v) {
            pos_ = start;
            vars_[r.var] = v;
            list_item(out);
            any = true;
        }
        vars_ = saved;
        if (!any) skip_until(",}");
    }

    std::vector<Symbol> symbol_list(bool declare, bool base_only = false) {
        std::vector<Symbol> out;
        do {
            if (accept("forall")) {
                Range r = range_header();
                expect(":");
                size_t start = pos_;
                auto saved = vars_;
                bool any = false;
                for (long v = r.lo; v <= r.hi; ++v) {
                    pos_ = start;
                    vars_[r.var] = v;
                    auto inner = symbol_list_item(declare, base_only, out);
                    (void)inner;
                    any = true;
                }
                vars_ = saved;
                if (!any) skip_until(",;");
            } else {
                symbol_list_item(declare, base_only, out);
            }
        } while (accept(","));
        return out;
    }

    bool symbol_list_item(bool declare, bool base_only, std::vector<Symbol>& out) {
        if (declare) {
            const Token& t = expect_ident();
            std::string name = indexed_name(t);
            Symbol s = new_symbol(t, name);
            for (auto o : out)
                if (o == s) throw SpecError(t.line, t.col, "coordinate declared twice: " + name);
            out.push_back(s);
        } else {
            out.push_back(coordinate(base_only));
        }
        return true;
    }

    // ---- statements

    void end_statement() { expect(";"); }

    void statement() {
        const Token& t = peek();
        if (t.kind != Token::ident) fail({"a statement"});
        const std::string& k = t.text;
        if (k == "chart") {
            next();
            chart_name_ = expect_ident().text;
            end_statement();
        } else if (k == "base") {
            next();
            for (auto s : symbol_list(true)) base_.push_back(s);
            touch();
            end_statement();
        } else if (k == "fiber") {
            next();
            for (auto s : symbol_list(true)) fibers_.push_back(s);
            touch();
            end_statement();
        } else if (k == "metric") {
            next();
            metric_.clear();
            do {
                DiffForm v = expr();
                if (v.degree() != 0 || !(v.is_zero() || v.value().is_constant()))
                    throw SpecError(t.line, t.col, "metric entries must be numbers");
                metric_.push_back(v.is_zero() ? Rational(0) : v.value().constant_value());
            } while (accept(","));
            if (metric_.size() != base_.size())
                throw SpecError(t.line, t.col, "metric needs one entry per base coordinate");
            touch();
            end_statement();
        } else if (k == "family") {
            next();
            family();
        } else if (k == "jet") {
            next();
            jet_decl();
        } else if (k == "form") {
            next();
            const Token& nt = expect_ident();
            std::string name = indexed_name(nt);
            expect("=");
            DiffForm f = expr();
            bool replaced = false;
            for (auto& [n, g] : out_.forms)
                if (n == name) {
                    g = f;
                    replaced = true;
                }
            if (!replaced) out_.forms.emplace_back(name, f);
            end_statement();
        } else if (k == "eds") {
            next();
            eds_decl(t.line);
        } else if (k == "problem") {
            next();
            problem_decl(t.line);
        } else if (k == "slice") {
            next();
            Symbol c = coordinate(true);
            expect("=");
            DiffForm v = expr();
            if (v.degree() != 0 || !(v.is_zero() || v.value().is_constant()))
                throw SpecError(t.line, t.col, "slice value must be a number");
            out_.slice = std::make_pair(c, v.is_zero() ? Rational(0) : v.value().constant_value());
            end_statement();
        } else if (k == "flag_order") {
            next();
            out_.flag_order.clear();
            for (auto s : symbol_list(false, true)) out_.flag_order.push_back(base_pos(s));
            auto sorted = out_.flag_order;
            std::sort(sorted.begin(), sorted.end());
            for (size_t i = 0; i < sorted.size(); ++i)
                if (sorted[i] != static_cast<int>(i) || sorted.size() != base_.size())
                    throw SpecError(t.line, t.col, "flag_order must list every base coordinate once");
            end_statement();
        } else if (k == "branches") {
            next();
            do out_.branch_names.push_back(expect_ident().text);
            while (accept(","));
            end_statement();
        } else if (k == "check") {
            next();
            size_t start = pos_;
            DiffForm a = expr();
            const Token& op = expect("==");
            DiffForm b = expr();
            if (a.degree() != b.degree() && !(a.is_zero() && b.is_zero()))
                throw DegreeMismatch(op.line, op.col, "check compares forms of different degrees");
            std::vector<std::string> words;
            for (size_t i = start; i < pos_; ++i) words.push_back(toks_[i].text);
            out_.checks.push_back({t.line, join(words, " "), (a - b.on_chart(a.chart())).is_zero()});
            end_statement();
        } else if (k == "forall") {
            next();
            Range r = range_header();
            expect("{");
            size_t start = pos_;
            auto saved = vars_;
            bool any = false;
            for (long v = r.lo; v <= r.hi; ++v) {
                pos_ = start;
                vars_[r.var] = v;
                while (!is("}")) {
                    if (peek().kind == Token::end) fail({"'}'"});
                    statement();
                }
                any = true;
            }
            vars_ = saved;
            if (!any) {
                pos_ = start;
                skip_until("}");
            }
            expect("}");
        } else {
            fail({"chart", "base", "fiber", "metric", "family", "jet", "form", "eds", "problem", "slice",
                  "flag_order", "branches", "check", "forall"});
        }
    }

    // family F: e23(x1, x0), e31(x2, x0);
    void family() {
        const Token& nt = expect_ident();
        std::string name = indexed_name(nt);
        expect(":");
        auto& members = families_[name];
        if (std::find(family_order_.begin(), family_order_.end(), name) == family_order_.end())
            family_order_.push_back(name);
        auto member = [&] {
            Symbol m = coordinate(false);
            if (!is_fiber(m)) throw UnresolvedName(nt.line, nt.col, m.name(), "family member is not a fiber coordinate");
            expect("(");
            std::vector<int> label;
            if (!is(")")) {
                do label.push_back(base_pos(coordinate(true)));
                while (accept(","));
            }
            expect(")");
            std::sort(label.begin(), label.end());
            members.push_back({m, label});
        };
        do {
            if (accept("forall")) {
                Range r = range_header();
                expect(":");
                size_t start = pos_;
                auto saved = vars_;
                for (long v = r.lo; v <= r.hi; ++v) {
                    pos_ = start;
                    vars_[r.var] = v;
                    member();
                }
                vars_ = saved;
            } else {
                member();
            }
        } while (accept(","));
        touch();
        end_statement();
    }

    // jet p = D(phi, x);
    void jet_decl() {
        Symbol j = coordinate(false);
        expect("=");
        expect("D");
        expect("(");
        const Token& rt = peek();
        Symbol root = coordinate(false);
        if (!is_fiber(root)) throw UnresolvedName(rt.line, rt.col, root.name(), "not a fiber coordinate");
        std::vector<int> multi;
        while (accept(",")) multi.push_back(base_pos(coordinate(true)));
        expect(")");
        std::sort(multi.begin(), multi.end());
        jets_[j.id()] = {root, multi};
        touch();
        end_statement();
    }

    std::vector<Symbol> independence() {
        if (!accept("independent")) return base_;
        return symbol_list(false, true);
    }

    void eds_decl(int line) {
        SpecSystem s;
        s.name = expect_ident().text;
        s.line = line;
        expect("=");
        s.system.generators = form_list();
        s.system.independence = independence();
        if (accept("closed")) s.system.closed = true;
        s.system.chart = chart();
        for (auto& g : s.system.generators) g = g.on_chart(s.system.chart);
        out_.systems.push_back(s);
        end_statement();
    }

    void problem_decl(int line) {
        SpecProblem sp;
        sp.name = expect_ident().text;
        sp.line = line;
        auto& p = sp.problem;
        std::vector<std::string> fams;
        std::vector<std::vector<Symbol>> names;
        std::optional<DiffForm> lagrangian;
        std::vector<DiffForm> prolongation;
        int lag_line = line, lag_col = 1;
        expect("{");
        while (!accept("}")) {
            const Token& t = peek();
            if (accept("prolongation")) {
                prolongation = form_list();
                accept(";");
            } else if (accept("lagrangian")) {
                lag_line = t.line;
                lag_col = t.col;
                lagrangian = expr();
                end_statement();
            } else if (accept("lepage_sign")) {
                long s = int_expr();
                if (s != 1 && s != -1) throw SpecError(t.line, t.col, "lepage_sign must be 1 or -1");
                p.lepage_sign = static_cast<int>(s);
                end_statement();
            } else if (accept("multipliers")) {
                fams.push_back(expect_ident().text);
                expect(":");
                std::vector<Symbol> ns;
                do {
                    const Token& mt = expect_ident();
                    std::string n = indexed_name(mt);
                    if (!Symbol::valid_name(n)) throw SpecError(mt.line, mt.col, "not a valid symbol name: " + n);
                    ns.emplace_back(n);
                } while (accept(","));
                names.push_back(ns);
                end_statement();
            } else if (accept("constraint")) {
                DiffForm c = expr();
                if (c.degree() != 0) throw DegreeMismatch(t.line, t.col, "constraints are densities (0-forms)");
                if (!c.is_zero()) sp.initial_constraints.push_back(c.value());
                end_statement();
            } else if (accept("keep")) {
                for (auto s : symbol_list(false)) sp.keep.push_back(s);
                end_statement();
            } else {
                fail({"prolongation", "lagrangian", "lepage_sign", "multipliers", "constraint", "keep", "'}'"});
            }
        }
        accept(";");
        int n = static_cast<int>(base_.size());
        if (lagrangian && lagrangian->degree() != n && !lagrangian->is_zero())
            throw DegreeMismatch(lag_line, lag_col,
                                 "lagrangian has degree " + std::to_string(lagrangian->degree()) + ", expected " +
                                     std::to_string(n));
        if (names.size() > prolongation.size())
            throw SpecError(line, 1, "more multiplier declarations than prolongation generators");

        // the problem lives on the chart without its multiplier coordinates,
        // which the Lepage construction appends again
        std::set<Symbol> mult;
        for (auto& ns : names) mult.insert(ns.begin(), ns.end());
        auto pc = std::make_shared<Chart>(*chart());
        pc->coords.erase(std::remove_if(pc->coords.begin(), pc->coords.end(), [&](Symbol s) { return mult.count(s); }),
                         pc->coords.end());
        for (auto it = pc->families.begin(); it != pc->families.end();) {
            bool hit = std::any_of(it->second.begin(), it->second.end(),
                                   [&](const FamilyMember& m) { return mult.count(m.coord); });
            if (hit) {
                pc->family_order.erase(std::remove(pc->family_order.begin(), pc->family_order.end(), it->first),
                                       pc->family_order.end());
                it = pc->families.erase(it);
            } else {
                ++it;
            }
        }
        ChartPtr c = pc;
        p.chart = c;
        p.prolongation.chart = c;
        p.prolongation.independence = base_;
        try {
            for (auto& g : prolongation) p.prolongation.generators.push_back(g.on_chart(c));
            p.lagrangian = lagrangian && !lagrangian->is_zero() ? lagrangian->on_chart(c) : DiffForm(c, n);
        } catch (const std::exception& e) {
            throw SpecError(line, 1, std::string("problem forms use a multiplier coordinate: ") + e.what());
        }
        p.multiplier_families = fams;
        p.multiplier_names = names;
        out_.problem = sp;
    }
};

}  // namespace

ProblemSpec parse_spec(const std::string& text) { return Parser(text).parse(); }

ProblemSpec parse_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_spec(ss.str());
}

namespace {

std::string rational_dsl(const Rational& q) {
    std::string s = q.get_str();
    return s;
}

std::string poly_dsl(const Poly& p, const JetSpace& jets) {
    if (p.is_zero()) return "0";
    std::string out;
    bool first = true;
    for (auto& t : p.terms()) {
        Rational c = t.coef;
        bool neg = c < 0;
        if (neg) c = -c;
        std::vector<std::string> parts;
        if (c != 1 || t.mono.empty()) parts.push_back(rational_dsl(c));
        for (auto& [v, e] : t.mono) {
            Symbol s = Symbol::from_id(v);
            std::string name = s.name();
            if (auto j = jets.split(s); j && j->order() > 0) {
                name = "D(" + j->field.name();
                for (size_t i = 0; i < j->counts.size(); ++i)
                    for (int k = 0; k < j->counts[i]; ++k) name += ", " + jets.coords()[i].name();
                name += ")";
            }
            parts.push_back(e > 1 ? name + "**" + std::to_string(e) : name);
        }
        std::string term = join(parts, "*");
        if (first) out += neg ? "-" + term : term;
        else out += (neg ? " - " : " + ") + term;
        first = false;
    }
    return out;
}

std::string expr_dsl(const Expr& e, const JetSpace& jets) {
    std::string n = poly_dsl(e.num(), jets);
    if (e.den().is_one()) return n;
    return "(" + n + ")/(" + poly_dsl(e.den(), jets) + ")";
}

std::string form_dsl(const DiffForm& f, const JetSpace& jets) {
    const auto& c = *f.chart();
    if (f.is_zero()) {
        if (f.degree() == 0) return "0";
        std::vector<std::string> ds;
        for (int i = 0; i < f.degree(); ++i) ds.push_back("d(" + c.coords[static_cast<size_t>(i)].name() + ")");
        return "0*" + join(ds, "^");
    }
    if (f.degree() == 0) return expr_dsl(f.value(), jets);
    std::vector<std::string> terms;
    for (auto& [idx, coef] : f.terms()) {
        std::vector<std::string> ds;
        for (auto i : idx) ds.push_back("d(" + c.coords[i].name() + ")");
        terms.push_back("(" + expr_dsl(coef, jets) + ")*" + join(ds, "^"));
    }
    return join(terms, " + ");
}

std::string names(const std::vector<Symbol>& v) {
    std::vector<std::string> s;
    for (auto x : v) s.push_back(x.name());
    return join(s, ", ");
}

}  // namespace

std::string print_spec(const ProblemSpec& spec) {
    const Chart& c = *spec.chart;
    JetSpace jets(c.base, c.fibers());
    std::ostringstream os;
    os << "chart " << c.name << ";\n";
    if (!c.base.empty()) os << "base " << names(c.base) << ";\n";
    if (!c.fibers().empty()) os << "fiber " << names(c.fibers()) << ";\n";
    if (!c.metric.empty()) {
        std::vector<std::string> m;
        for (auto& q : c.metric) m.push_back(rational_dsl(q));
        os << "metric " << join(m, ", ") << ";\n";
    }
    for (auto& fam : c.family_order) {
        std::vector<std::string> ms;
        for (auto& m : c.families.at(fam)) {
            std::vector<std::string> l;
            for (int p : m.label) l.push_back(c.base[static_cast<size_t>(p)].name());
            ms.push_back(m.coord.name() + "(" + join(l, ", ") + ")");
        }
        os << "family " << fam << ": " << join(ms, ", ") << ";\n";
    }
    for (auto& [id, j] : c.jets) {
        os << "jet " << Symbol::from_id(id).name() << " = D(" << j.root.name();
        for (int p : j.multi) os << ", " << c.base[static_cast<size_t>(p)].name();
        os << ");\n";
    }
    for (auto& [n, f] : spec.forms) os << "form " << n << " = " << form_dsl(f, jets) << ";\n";
    for (auto& s : spec.systems) {
        std::vector<std::string> gs;
        for (auto& g : s.system.generators) gs.push_back(form_dsl(g, jets));
        os << "eds " << s.name << " = {" << join(gs, ", ") << "}";
        if (s.system.independence != c.base) os << " independent " << names(s.system.independence);
        if (s.system.closed) os << " closed";
        os << ";\n";
    }
    if (spec.slice) os << "slice " << spec.slice->first.name() << " = " << rational_dsl(spec.slice->second) << ";\n";
    return os.str();
}

}  // namespace cartan
