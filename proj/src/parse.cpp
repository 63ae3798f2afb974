#include "wq/parse.hpp"

#include <cctype>

namespace wq {

Rational parse_rational(const std::string &text)
{
    Rational q;
    std::string t = text;
    if (!t.empty() && t[0] == '+')
        t.erase(0, 1);
    if (t.empty() || q.set_str(t, 10) != 0)
        throw Error(ErrorKind::Parse, "bad rational '" + text + "'");
    if (q.get_den() == 0)
        throw Error(ErrorKind::Parse, "zero denominator in '" + text + "'");
    q.canonicalize();
    return q;
}

namespace {

class LiteralParser {
public:
    explicit LiteralParser(const std::string &text) : s_(text) {}

    std::vector<LiteralTerm> run()
    {
        std::vector<LiteralTerm> terms;
        skip();
        if (pos_ == s_.size())
            throw Error(ErrorKind::Parse, "empty literal");
        while (pos_ < s_.size()) {
            int sign = 1;
            if (s_[pos_] == '+' || s_[pos_] == '-') {
                sign = s_[pos_] == '-' ? -1 : 1;
                ++pos_;
                skip();
            } else if (!terms.empty()) {
                fail("expected '+' or '-'");
            }
            LiteralTerm t = term();
            t.coeff *= sign;
            terms.push_back(std::move(t));
            skip();
        }
        return terms;
    }

private:
    const std::string &s_;
    std::size_t pos_ = 0;

    [[noreturn]] void fail(const std::string &msg) const
    {
        throw Error(ErrorKind::Parse, msg + " at position " + std::to_string(pos_) + " in '" + s_ + "'");
    }

    void skip()
    {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
    }

    std::string digits()
    {
        std::size_t start = pos_;
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_])))
            ++pos_;
        if (start == pos_)
            fail("expected digits");
        return s_.substr(start, pos_ - start);
    }

    LiteralTerm term()
    {
        LiteralTerm t;
        bool any = false;
        while (pos_ < s_.size() && s_[pos_] != '+' && s_[pos_] != '-') {
            char c = s_[pos_];
            if (c == '*') {
                if (!any)
                    fail("dangling '*'");
                ++pos_;
            } else if (std::isdigit(static_cast<unsigned char>(c))) {
                std::string num = digits();
                if (pos_ < s_.size() && s_[pos_] == '/') {
                    ++pos_;
                    num += "/" + digits();
                }
                t.coeff *= parse_rational(num);
                any = true;
            } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::size_t start = pos_;
                while (pos_ < s_.size() &&
                       (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                    ++pos_;
                std::string name = s_.substr(start, pos_ - start);
                int power = 1;
                if (pos_ < s_.size() && s_[pos_] == '^') {
                    ++pos_;
                    int sign = 1;
                    if (pos_ < s_.size() && (s_[pos_] == '-' || s_[pos_] == '+')) {
                        sign = s_[pos_] == '-' ? -1 : 1;
                        ++pos_;
                    }
                    power = sign * std::stoi(digits());
                }
                t.factors.emplace_back(name, power);
                any = true;
            } else {
                fail(std::string("unexpected character '") + c + "'");
            }
            skip();
        }
        if (!any)
            fail("empty term");
        return t;
    }
};

} // namespace

std::vector<LiteralTerm> parse_literal(const std::string &text) { return LiteralParser(text).run(); }

Series parse_series(const std::string &text, const Ring &ring)
{
    Series out(ring);
    for (const auto &t : parse_literal(text)) {
        Monomial m{std::vector<int>(ring.size(), 0), 0};
        for (const auto &[name, power] : t.factors) {
            if (name == "h") {
                m.hbar += power;
                continue;
            }
            int i = ring.index_of(name);
            if (i < 0)
                throw Error(ErrorKind::UnknownVariable, name);
            m.exps[static_cast<std::size_t>(i)] += power;
        }
        Series term(ring, kUnbounded, kUnbounded, std::min(0, m.hbar));
        term.add_term(m, t.coeff);
        out += term;
    }
    return out;
}

Series parse_series(const std::string &text)
{
    std::vector<std::string> vars;
    std::vector<bool> inv;
    auto terms = parse_literal(text);
    for (const auto &t : terms)
        for (const auto &[name, power] : t.factors) {
            if (name == "h")
                continue;
            auto it = std::find(vars.begin(), vars.end(), name);
            if (it == vars.end()) {
                vars.push_back(name);
                inv.push_back(power < 0);
            } else if (power < 0) {
                inv[static_cast<std::size_t>(it - vars.begin())] = true;
            }
        }
    return parse_series(text, Ring(vars, inv));
}

nlohmann::json to_json(const Integer &z)
{
    if (z.fits_slong_p())
        return z.get_si();
    return z.get_str();
}

namespace {

Integer integer_from_json(const nlohmann::json &j)
{
    if (j.is_number_integer())
        return Integer(j.get<long>());
    if (j.is_string())
        return Integer(j.get<std::string>());
    throw Error(ErrorKind::Parse, "expected integer, got " + j.dump());
}

int cap_from_json(const nlohmann::json &j, const char *key)
{
    if (!j.contains(key) || j[key].is_null())
        return kUnbounded;
    return j[key].get<int>();
}

} // namespace

nlohmann::json to_json(const Series &s)
{
    nlohmann::json terms = nlohmann::json::array();
    for (const auto &[m, c] : s.terms())
        terms.push_back({m.exps, m.hbar, to_json(Integer(c.get_num())), to_json(Integer(c.get_den()))});
    nlohmann::json out;
    out["vars"] = s.vars();
    std::vector<std::string> inv;
    for (std::size_t i = 0; i < s.ring().size(); ++i)
        if (s.ring().invertible[i])
            inv.push_back(s.ring().vars[i]);
    out["invertible"] = inv;
    out["x_cap"] = s.x_cap() >= kUnbounded ? nlohmann::json() : nlohmann::json(s.x_cap());
    out["hbar_order"] = s.hbar_order() >= kUnbounded ? nlohmann::json() : nlohmann::json(s.hbar_order());
    out["terms"] = terms;
    return out;
}

Series series_from_json(const nlohmann::json &j)
{
    try {
        Ring ring(j.at("vars").get<std::vector<std::string>>());
        if (j.contains("invertible"))
            ring = ring.with_invertible(j["invertible"].get<std::vector<std::string>>());
        int min_h = 0;
        for (const auto &t : j.at("terms"))
            min_h = std::min(min_h, t.at(1).get<int>());
        Series s(ring, cap_from_json(j, "x_cap"), cap_from_json(j, "hbar_order"), min_h);
        for (const auto &t : j.at("terms")) {
            Monomial m{t.at(0).get<std::vector<int>>(), t.at(1).get<int>()};
            Rational c(integer_from_json(t.at(2)), integer_from_json(t.at(3)));
            c.canonicalize();
            s.add_term(m, c);
        }
        return s;
    } catch (const nlohmann::json::exception &e) {
        throw Error(ErrorKind::Parse, e.what());
    }
}

} // namespace wq
