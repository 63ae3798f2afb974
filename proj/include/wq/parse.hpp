#ifndef WQ_PARSE_HPP
#define WQ_PARSE_HPP

#include "wq/series.hpp"

#include <nlohmann/json.hpp>

#include <string>
#include <utility>
#include <vector>

namespace wq {

/// One term of a literal: coefficient times an ordered list of factors.
struct LiteralTerm {
    Rational coeff = 1;
    std::vector<std::pair<std::string, int>> factors; // (name, power), in written order
};

/// Tokenizes `3/2 x1^2 y2 h - x1` style literals. Factors keep their order so
/// noncommutative callers can multiply them as written. `*` is optional.
std::vector<LiteralTerm> parse_literal(const std::string &text);

/// Commutative reading of a literal over `ring`; `h` is hbar.
Series parse_series(const std::string &text, const Ring &ring);

/// Parses a literal, creating a ring from the variables it mentions in order
/// of first appearance.
Series parse_series(const std::string &text);

/// {"vars": [...], "invertible": [...], "x_cap": .., "hbar_order": .., "terms": [[exps, hbar, num, den], ...]}
nlohmann::json to_json(const Series &s);
Series series_from_json(const nlohmann::json &j);

/// Integer when it fits in 64 bits, decimal string otherwise.
nlohmann::json to_json(const Integer &z);

} // namespace wq

#endif
