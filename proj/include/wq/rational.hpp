#ifndef WQ_RATIONAL_HPP
#define WQ_RATIONAL_HPP

#include <gmpxx.h>

#include <string>

namespace wq {

using Rational = mpq_class;
using Integer = mpz_class;

/// Parses "p", "-p" or "p/q"; canonicalizes the result.
Rational parse_rational(const std::string &text);

inline std::string to_string(const Rational &q) { return q.get_str(); }

inline Rational binomial(long n, long k)
{
    if (k < 0 || k > n)
        return 0;
    Integer r;
    mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
    return Rational(r);
}

inline Rational factorial(long n)
{
    Integer r;
    mpz_fac_ui(r.get_mpz_t(), static_cast<unsigned long>(n));
    return Rational(r);
}

} // namespace wq

#endif
