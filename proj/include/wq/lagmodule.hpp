#ifndef WQ_LAGMODULE_HPP
#define WQ_LAGMODULE_HPP

#include "wq/series.hpp"
#include "wq/weyl.hpp"

#include <vector>

namespace wq {

/// Elements of the standard module are series in x1..xn and hbar, read as u * 1_M.
Ring module_ring(int n);

/// A candidate module structure on k[[x, hbar]]: y_j(1_M) = f_j * 1_M.
struct ModuleData {
    int n = 0;
    std::vector<Series> f;

    static ModuleData trivial(int n);
};

struct LiftResult {
    Series g; // integrated potential, in the ideal (x1..xn)
    Series m; // e^{-g}, the generator killed by every y_j
    std::vector<Series> residuals; // y_j(m), all zero
};

/// x_i acts by multiplication, y_j by hbar d/dx_j + f_j (f = 0 for the
/// standard module), applied in normal order. Throws IllDefinedAction when an
/// hbar^-1 part survives.
Series act(const WeylElement &u, const Series &v);
Series act(const WeylElement &u, const Series &v, const ModuleData &data);

struct SigmaWeight {
    Rational eigenvalue;         // act(sigma(a), 1_M) = eigenvalue * 1_M, by direct evaluation
    Rational half_trace_g;       // 1/2 Tr of the upper-left block
    Rational half_trace_stated;  // 1/2 Tr(a restricted to span(y)) = 1/2 Tr of the lower-right block
};

/// Requires a to preserve span(y) (NotParabolic otherwise).
SigmaWeight sigma_weight(const SpMatrix &a);

/// Checks d_i g_j = d_j g_i for g_j = f_j / hbar.
bool integrable_reduced(const ModuleData &data);
/// Checks y_i y_j (1_M) = y_j y_i (1_M) through the action itself.
bool integrable_full(const ModuleData &data);

/// Builds m = e^{-g} with y_j(m) = 0. Exact data is truncated at `x_cap`
/// before exponentiating. Throws NotIntegrable.
LiftResult lift_module(const ModuleData &data, int x_cap = 8);

/// f_j -> f_j + hbar a_j for a closed 1-form sum a_j dx_j. Throws NotClosed.
ModuleData twist_action(const ModuleData &data, const std::vector<Series> &a);

/// act(sigma(a), v) == theta_M(a)(v) + eigenvalue * v, with
/// theta_M(a)(u 1_M) := theta_D(a)(u) 1_M.
bool verify_error_identity(const SpMatrix &a, const Series &v);

} // namespace wq

#endif
