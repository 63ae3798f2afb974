#include "wq/linalg.hpp"

namespace wq {

void axpy(SparseVec &y, const Rational &a, const SparseVec &x)
{
    if (a == 0)
        return;
    for (const auto &[i, v] : x) {
        auto [it, inserted] = y.try_emplace(i, a * v);
        if (!inserted) {
            it->second += a * v;
            if (it->second == 0)
                y.erase(it);
        }
    }
}

SparseVec Echelon::reduce(SparseVec v) const
{
    auto it = v.begin();
    while (it != v.end()) {
        auto row = rows_.find(it->first);
        if (row == rows_.end()) {
            ++it;
            continue;
        }
        int at = it->first;
        axpy(v, -it->second, row->second);
        it = v.upper_bound(at);
    }
    return v;
}

bool Echelon::insert(SparseVec v)
{
    v = reduce(std::move(v));
    if (v.empty())
        return false;
    Rational lead = v.begin()->second;
    for (auto &[i, c] : v)
        c /= lead;
    int pivot = v.begin()->first;
    rows_.emplace(pivot, std::move(v));
    return true;
}

LinearSolution solve_linear(std::size_t unknowns, const std::vector<std::pair<SparseVec, Rational>> &equations)
{
    // Row: coefficients plus the right-hand side stored at index `unknowns`.
    const int rhs = static_cast<int>(unknowns);
    std::map<int, SparseVec> rows;
    LinearSolution out;
    for (const auto &[a, b] : equations) {
        SparseVec r = a;
        if (b != 0)
            r[rhs] = b;
        for (auto it = r.begin(); it != r.end() && it->first < rhs;) {
            auto row = rows.find(it->first);
            if (row == rows.end()) {
                ++it;
                continue;
            }
            int at = it->first;
            axpy(r, -it->second, row->second);
            it = r.upper_bound(at);
        }
        if (r.empty())
            continue;
        if (r.begin()->first == rhs)
            return out;
        Rational lead = r.begin()->second;
        for (auto &[i, c] : r)
            c /= lead;
        int pivot = r.begin()->first;
        for (auto &[p, row] : rows) {
            auto hit = row.find(pivot);
            if (hit != row.end())
                axpy(row, -Rational(hit->second), r);
        }
        rows.emplace(pivot, std::move(r));
    }
    out.consistent = true;
    out.rank = rows.size();
    out.particular.assign(unknowns, 0);
    for (const auto &[p, row] : rows) {
        auto it = row.find(rhs);
        if (it != row.end())
            out.particular[static_cast<std::size_t>(p)] = it->second;
    }
    for (std::size_t f = 0; f < unknowns; ++f) {
        if (rows.count(static_cast<int>(f)))
            continue;
        std::vector<Rational> k(unknowns, 0);
        k[f] = 1;
        for (const auto &[p, row] : rows) {
            auto it = row.find(static_cast<int>(f));
            if (it != row.end())
                k[static_cast<std::size_t>(p)] = -it->second;
        }
        out.kernel.push_back(std::move(k));
    }
    return out;
}

} // namespace wq
