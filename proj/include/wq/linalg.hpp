#ifndef WQ_LINALG_HPP
#define WQ_LINALG_HPP

#include "wq/rational.hpp"

#include <map>
#include <utility>
#include <vector>

namespace wq {

using SparseVec = std::map<int, Rational>;

void axpy(SparseVec &y, const Rational &a, const SparseVec &x);

/// Echelon basis of a subspace; the pivot of each row is its smallest index.
/// reduce() returns the unique representative of v + span with zeros at
/// every pivot, so the residual is canonical for the subspace.
class Echelon {
public:
    /// Returns false when v already lies in the span.
    bool insert(SparseVec v);
    SparseVec reduce(SparseVec v) const;
    std::size_t rank() const { return rows_.size(); }

private:
    std::map<int, SparseVec> rows_;
};

struct LinearSolution {
    bool consistent = false;
    std::size_t rank = 0;
    /// Basic solution: free unknowns set to zero.
    std::vector<Rational> particular;
    /// One basis vector per free unknown.
    std::vector<std::vector<Rational>> kernel;
};

/// Solves sum_k a_k x_k = b for each (a, b) by exact reduced row echelon form.
LinearSolution solve_linear(std::size_t unknowns, const std::vector<std::pair<SparseVec, Rational>> &equations);

} // namespace wq

#endif
